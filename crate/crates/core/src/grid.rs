//! The dyadic lattice `D(root)` over a half-open root cube.
//!
//! Cubes are addressed by `(level, index)` where `index` holds one integer
//! coordinate per axis in `[0, 2^level)`. Whenever cubes or cells are listed,
//! the order is row-major: the first axis varies slowest. The row-major linear
//! index of a cube at level `l` is the concatenation of its coordinates as
//! `l`-bit fields, which makes parent lookups a handful of shifts.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Default cap on the number of finest cells, `2^24`.
pub const DEFAULT_CELL_CAP: u64 = 1 << 24;

/// Root cube `[corner, corner + side)^n` refined to `depth` bisections.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    dim: usize,
    corner: Vec<f64>,
    side: f64,
    depth: u32,
}

impl GridSpec {
    pub fn new(corner: Vec<f64>, side: f64, depth: u32) -> Result<Self> {
        Self::with_cap(corner, side, depth, DEFAULT_CELL_CAP)
    }

    pub fn with_cap(corner: Vec<f64>, side: f64, depth: u32, cap: u64) -> Result<Self> {
        let dim = corner.len();
        if dim == 0 {
            return Err(Error::InvalidGrid("dimension must be positive"));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::InvalidGrid(
                "side length must be finite and positive",
            ));
        }
        if corner.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGrid("root corner must be finite"));
        }
        let log2_cells = u64::from(depth) * dim as u64;
        if log2_cells >= 63 || (1u64 << log2_cells) > cap {
            return Err(Error::TooManyCells { log2_cells, cap });
        }
        Ok(Self {
            dim,
            corner,
            side,
            depth,
        })
    }

    /// `[0, 1)^dim` at the given depth.
    pub fn unit(dim: usize, depth: u32) -> Result<Self> {
        Self::new(vec![0.0; dim], 1.0, depth)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn corner(&self) -> &[f64] {
        &self.corner
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Same root, different depth.
    pub fn with_depth(&self, depth: u32) -> Result<Self> {
        Self::new(self.corner.clone(), self.side, depth)
    }

    /// Number of cubes at `level`, `2^{level·n}`.
    pub fn cube_count(&self, level: u32) -> usize {
        1usize << (level as usize * self.dim)
    }

    pub fn cell_count(&self) -> usize {
        self.cube_count(self.depth)
    }

    /// Number of finest cells inside one cube of `level`.
    pub fn cells_per_cube(&self, level: u32) -> usize {
        1usize << ((self.depth - level) as usize * self.dim)
    }

    pub fn root_measure(&self) -> f64 {
        math::powi(self.side, self.dim as i32)
    }

    /// `2^{-level·n} |root|`, exact.
    pub fn measure(&self, level: u32) -> f64 {
        math::ldexp(self.root_measure(), -((level as usize * self.dim) as i32))
    }

    pub fn cell_measure(&self) -> f64 {
        self.measure(self.depth)
    }

    pub fn side_at(&self, level: u32) -> f64 {
        math::ldexp(self.side, -(level as i32))
    }

    pub fn root(&self) -> DyadicCube {
        DyadicCube::root(self.dim)
    }

    pub fn check_level(&self, level: u32) -> Result<()> {
        if level > self.depth {
            return Err(Error::LevelOutOfRange {
                level,
                depth: self.depth,
            });
        }
        Ok(())
    }

    pub fn check_cube(&self, cube: &DyadicCube) -> Result<()> {
        let in_range = cube.index.len() == self.dim
            && cube.level <= self.depth
            && cube
                .index
                .iter()
                .all(|&i| u64::from(i) < (1u64 << cube.level));
        if in_range {
            Ok(())
        } else {
            Err(Error::ForeignCube { level: cube.level })
        }
    }

    /// All cubes at `level`, row-major.
    pub fn cells(&self, level: u32) -> Result<Vec<DyadicCube>> {
        self.check_level(level)?;
        Ok((0..self.cube_count(level))
            .map(|lin| DyadicCube::from_linear(self.dim, level, lin))
            .collect())
    }

    /// Every cube of the lattice, level by level, row-major within a level.
    pub fn all_cubes(&self) -> impl Iterator<Item = DyadicCube> + '_ {
        (0..=self.depth).flat_map(move |level| {
            (0..self.cube_count(level))
                .map(move |lin| DyadicCube::from_linear(self.dim, level, lin))
        })
    }

    /// Row-major linear indices of the finest cells inside `cube`.
    pub fn finest_cells(&self, cube: &DyadicCube) -> CellIter {
        CellIter::new(self.dim, self.depth, cube)
    }

    /// The finest cell with row-major index `cell`, as a cube at the finest level.
    pub fn cell_cube(&self, cell: usize) -> DyadicCube {
        DyadicCube::from_linear(self.dim, self.depth, cell)
    }

    pub fn cube_corner(&self, cube: &DyadicCube) -> Vec<f64> {
        let h = self.side_at(cube.level);
        self.corner
            .iter()
            .zip(&cube.index)
            .map(|(c, &i)| c + f64::from(i) * h)
            .collect()
    }

    pub fn cube_center(&self, cube: &DyadicCube) -> Vec<f64> {
        let h = self.side_at(cube.level);
        self.corner
            .iter()
            .zip(&cube.index)
            .map(|(c, &i)| c + (f64::from(i) + 0.5) * h)
            .collect()
    }

    pub fn cell_center(&self, cell: usize) -> Vec<f64> {
        self.cube_center(&self.cell_cube(cell))
    }
}

/// Row-major linear index of the parent of the cube `child` at level `child_level`.
#[inline]
pub(crate) fn parent_linear(dim: usize, child_level: u32, child: usize) -> usize {
    if dim == 1 {
        return child >> 1;
    }
    let l = child_level as usize;
    let mask = (1usize << l) - 1;
    let mut parent = 0usize;
    for d in 0..dim {
        let coord = (child >> (l * (dim - 1 - d))) & mask;
        parent |= (coord >> 1) << ((l - 1) * (dim - 1 - d));
    }
    parent
}

/// A node of the dyadic lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    level: u32,
    index: Vec<u32>,
}

impl DyadicCube {
    pub fn new(level: u32, index: Vec<u32>) -> Self {
        Self { level, index }
    }

    pub fn root(dim: usize) -> Self {
        Self {
            level: 0,
            index: vec![0; dim],
        }
    }

    pub fn from_linear(dim: usize, level: u32, linear: usize) -> Self {
        let l = level as usize;
        let mask = if l == 0 { 0 } else { (1usize << l) - 1 };
        let index = (0..dim)
            .map(|d| ((linear >> (l * (dim - 1 - d))) & mask) as u32)
            .collect();
        Self { level, index }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> &[u32] {
        &self.index
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn linear(&self) -> usize {
        let l = self.level as usize;
        let n = self.index.len();
        self.index.iter().enumerate().fold(0usize, |acc, (d, &i)| {
            acc | ((i as usize) << (l * (n - 1 - d)))
        })
    }

    pub fn is_root(&self) -> bool {
        self.level == 0
    }

    pub fn parent(&self) -> Option<Self> {
        (self.level > 0).then(|| Self {
            level: self.level - 1,
            index: self.index.iter().map(|i| i >> 1).collect(),
        })
    }

    /// The `2^n` children in row-major order.
    pub fn children(&self) -> Vec<Self> {
        let n = self.index.len();
        (0..1usize << n)
            .map(|offset| Self {
                level: self.level + 1,
                index: self
                    .index
                    .iter()
                    .enumerate()
                    .map(|(d, &i)| 2 * i + ((offset >> (n - 1 - d)) & 1) as u32)
                    .collect(),
            })
            .collect()
    }

    /// Ancestor at `level`, if `level` does not exceed this cube's level.
    pub fn ancestor(&self, level: u32) -> Option<Self> {
        (level <= self.level).then(|| Self {
            level,
            index: self
                .index
                .iter()
                .map(|i| i >> (self.level - level))
                .collect(),
        })
    }

    /// Whether `other ⊆ self`.
    pub fn contains(&self, other: &DyadicCube) -> bool {
        other.level >= self.level
            && other.index.len() == self.index.len()
            && other
                .index
                .iter()
                .zip(&self.index)
                .all(|(o, s)| o >> (other.level - self.level) == *s)
    }
}

/// Iterator over the finest cells of a cube, row-major.
#[derive(Clone, Debug)]
pub struct CellIter {
    dim: usize,
    depth: usize,
    base: Vec<usize>,
    span: usize,
    local: Vec<usize>,
    done: bool,
}

impl CellIter {
    fn new(dim: usize, depth: u32, cube: &DyadicCube) -> Self {
        let shift = (depth - cube.level) as usize;
        Self {
            dim,
            depth: depth as usize,
            base: cube.index.iter().map(|&i| (i as usize) << shift).collect(),
            span: 1usize << shift,
            local: vec![0; dim],
            done: false,
        }
    }
}

impl Iterator for CellIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.done {
            return None;
        }
        let d = self.depth;
        let n = self.dim;
        let cell = (0..n).fold(0usize, |acc, k| {
            acc | ((self.base[k] + self.local[k]) << (d * (n - 1 - k)))
        });
        // odometer, last axis fastest
        let mut axis = n;
        loop {
            if axis == 0 {
                self.done = true;
                break;
            }
            axis -= 1;
            self.local[axis] += 1;
            if self.local[axis] < self.span {
                break;
            }
            self.local[axis] = 0;
        }
        Some(cell)
    }
}

/// Per-level sums of cell values over every cube of the lattice.
///
/// Each parent sum is the left fold, starting from `0.0`, of its children's
/// sums in row-major order. [`crate::StepFunction::integrate`] reduces a cube's
/// block in the same order, so the two agree bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct Pyramid {
    dim: usize,
    levels: Vec<Vec<f64>>,
}

impl Pyramid {
    pub fn build(grid: &GridSpec, values: &[f64]) -> Self {
        debug_assert_eq!(values.len(), grid.cell_count());
        Self::from_block(grid.dim(), grid.depth(), values.to_vec())
    }

    /// Pyramid of a row-major block of side `2^depth`.
    pub(crate) fn from_block(dim: usize, depth: u32, finest: Vec<f64>) -> Self {
        let mut levels = Vec::with_capacity(depth as usize + 1);
        levels.push(finest);
        for child_level in (1..=depth).rev() {
            let child = levels.last().expect("nonempty");
            let mut parent = vec![0.0; child.len() >> dim];
            for (lin, v) in child.iter().enumerate() {
                parent[parent_linear(dim, child_level, lin)] += v;
            }
            levels.push(parent);
        }
        levels.reverse();
        Self { dim, levels }
    }

    pub fn depth(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    pub fn level(&self, level: u32) -> &[f64] {
        &self.levels[level as usize]
    }

    pub fn sum(&self, level: u32, linear: usize) -> f64 {
        self.levels[level as usize][linear]
    }

    pub fn sum_at(&self, cube: &DyadicCube) -> f64 {
        self.sum(cube.level(), cube.linear())
    }

    /// Mean cell value over each cube: sums divided by the (power of two) cell count.
    pub fn means(&self) -> Vec<Vec<f64>> {
        let depth = self.depth();
        self.levels
            .iter()
            .enumerate()
            .map(|(level, sums)| {
                let shift = -(((depth - level as u32) as usize * self.dim) as i32);
                sums.iter().map(|s| math::ldexp(*s, shift)).collect()
            })
            .collect()
    }
}
