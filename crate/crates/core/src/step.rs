//! Nonnegative step functions constant on the finest cells of a grid.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{DyadicCube, GridSpec, Pyramid};
use crate::math;

/// A nonnegative function constant on each finest cell, values in row-major
/// cell order. Functions and weights share this representation.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    grid: GridSpec,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        let expected = grid.cell_count();
        if values.len() != expected {
            return Err(Error::ValueCount {
                expected,
                got: values.len(),
            });
        }
        if let Some((cell, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidValue { cell, value });
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: GridSpec, value: f64) -> Result<Self> {
        let n = grid.cell_count();
        Self::new(grid, alloc::vec![value; n])
    }

    /// `χ_Q`.
    pub fn indicator(grid: GridSpec, cube: &DyadicCube) -> Result<Self> {
        grid.check_cube(cube)?;
        let mut values = alloc::vec![0.0; grid.cell_count()];
        for cell in grid.finest_cells(cube) {
            values[cell] = 1.0;
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_grid(&self, other: &StepFunction) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Applies `op` cellwise; the result is validated.
    pub fn map(&self, op: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.grid.clone(),
            self.values.iter().map(|&v| op(v)).collect(),
        )
    }

    /// Combines two functions on the same grid cellwise.
    pub fn zip_map(&self, other: &StepFunction, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.same_grid(other)?;
        Self::new(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    /// `|f|^r`.
    pub fn pow(&self, r: f64) -> Result<Self> {
        self.map(|v| math::powf(v, r))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn pyramid(&self) -> Pyramid {
        Pyramid::build(&self.grid, &self.values)
    }

    /// Cell values inside `cube`, row-major.
    pub fn block(&self, cube: &DyadicCube) -> Vec<f64> {
        self.grid
            .finest_cells(cube)
            .map(|c| self.values[c])
            .collect()
    }

    /// Sum of cell values over `cube`, folded in dyadic tree order.
    pub fn cube_sum(&self, cube: &DyadicCube) -> Result<f64> {
        self.grid.check_cube(cube)?;
        let depth = self.grid.depth() - cube.level();
        let block = self.block(cube);
        Ok(Pyramid::from_block(self.grid.dim(), depth, block).sum(0, 0))
    }

    /// Sum of all cell values, in the same tree order as [`Self::cube_sum`].
    pub fn sum(&self) -> f64 {
        self.pyramid().sum(0, 0)
    }

    /// `∫_Q f dx`.
    pub fn integrate(&self, cube: &DyadicCube) -> Result<f64> {
        Ok(self.cube_sum(cube)? * self.grid.cell_measure())
    }

    /// `∫_root f dx`.
    pub fn integral(&self) -> f64 {
        self.sum() * self.grid.cell_measure()
    }

    /// `⟨f⟩_Q`, computed as the mean of the cell values in `Q`.
    pub fn average(&self, cube: &DyadicCube) -> Result<f64> {
        let sum = self.cube_sum(cube)?;
        let cells = (self.grid.depth() - cube.level()) as usize * self.grid.dim();
        Ok(math::ldexp(sum, -(cells as i32)))
    }

    /// `|{x ∈ Q : f(x) > λ}|`, over the root when `cube` is `None`.
    pub fn superlevel_measure(&self, lambda: f64, cube: Option<&DyadicCube>) -> Result<f64> {
        let count = match cube {
            Some(q) => {
                self.grid.check_cube(q)?;
                self.grid
                    .finest_cells(q)
                    .filter(|&c| self.values[c] > lambda)
                    .count()
            }
            None => self.values.iter().filter(|&&v| v > lambda).count(),
        };
        Ok(count as f64 * self.grid.cell_measure())
    }

    /// The same function on a finer grid over the same root.
    pub fn refine(&self, depth: u32) -> Result<Self> {
        let current = self.grid.depth();
        if depth < current {
            return Err(Error::Parameter(alloc::format!(
                "cannot refine depth {current} down to {depth}"
            )));
        }
        let grid = self.grid.with_depth(depth)?;
        let values = (0..grid.cell_count())
            .map(|cell| {
                let coarse = grid
                    .cell_cube(cell)
                    .ancestor(current)
                    .expect("coarser level");
                self.values[coarse.linear()]
            })
            .collect();
        Ok(Self { grid, values })
    }
}
