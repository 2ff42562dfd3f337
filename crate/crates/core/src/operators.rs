//! Dyadic maximal operators `M^D`, `M^D_α`, `M^D_w` and `M^D_{α,w}`.
//!
//! Each operator is the pointwise maximum, over the dyadic ancestors of a cell
//! (root down to the cell itself), of a per-cube score:
//!
//! | kind                | score on `Q`                          |
//! |---------------------|---------------------------------------|
//! | plain               | `⟨f⟩_Q`                               |
//! | fractional          | `|Q|^{α/n} ⟨f⟩_Q`                     |
//! | weighted            | `w(Q)^{-1} ∫_Q f w`                   |
//! | fractional-weighted | `w(Q)^{α/n} · w(Q)^{-1} ∫_Q f w`      |
//!
//! Weighted scores on cubes with `w(Q) = 0` are `0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{parent_linear, DyadicCube, Pyramid};
use crate::math;
use crate::step::StepFunction;

/// Largest instance [`brute_force_maximal`] accepts.
pub const BRUTE_FORCE_CELL_LIMIT: usize = 4096;

#[derive(Clone, Copy, Debug)]
pub enum MaximalQuery<'a> {
    Plain,
    Fractional {
        alpha: f64,
    },
    Weighted {
        weight: &'a StepFunction,
    },
    FractionalWeighted {
        alpha: f64,
        weight: &'a StepFunction,
    },
}

impl<'a> MaximalQuery<'a> {
    pub fn alpha(&self) -> f64 {
        match *self {
            Self::Plain | Self::Weighted { .. } => 0.0,
            Self::Fractional { alpha } | Self::FractionalWeighted { alpha, .. } => alpha,
        }
    }

    pub fn weight(&self) -> Option<&'a StepFunction> {
        match *self {
            Self::Weighted { weight } | Self::FractionalWeighted { weight, .. } => Some(weight),
            _ => None,
        }
    }

    fn validate(&self, f: &StepFunction) -> Result<()> {
        let alpha = self.alpha();
        let n = f.grid().dim() as f64;
        if !(alpha >= 0.0 && alpha < n) {
            return Err(Error::Parameter(alloc::format!(
                "fractional order {alpha} must lie in [0, {n})"
            )));
        }
        if let Some(w) = self.weight() {
            f.same_grid(w)?;
            if w.sum() <= 0.0 {
                return Err(Error::DegenerateWeight);
            }
        }
        Ok(())
    }
}

/// Scores of every lattice cube, level by level in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct ScorePyramid {
    dim: usize,
    levels: Vec<Vec<f64>>,
}

impl ScorePyramid {
    pub fn build(f: &StepFunction, query: MaximalQuery<'_>) -> Result<Self> {
        query.validate(f)?;
        let grid = f.grid();
        let alpha = query.alpha();
        let n = grid.dim() as f64;
        let levels = match query.weight() {
            None => {
                let means = f.pyramid().means();
                means
                    .into_iter()
                    .enumerate()
                    .map(|(level, row)| {
                        if alpha == 0.0 {
                            row
                        } else {
                            let factor = math::powf(grid.measure(level as u32), alpha / n);
                            row.into_iter().map(|m| factor * m).collect()
                        }
                    })
                    .collect()
            }
            Some(w) => {
                let fw: Vec<f64> = f
                    .values()
                    .iter()
                    .zip(w.values())
                    .map(|(a, b)| a * b)
                    .collect();
                let num = Pyramid::build(grid, &fw);
                let den = w.pyramid();
                let cm = grid.cell_measure();
                (0..=grid.depth())
                    .map(|level| {
                        num.level(level)
                            .iter()
                            .zip(den.level(level))
                            .map(|(&s_fw, &s_w)| {
                                if s_w <= 0.0 {
                                    return 0.0;
                                }
                                let avg = s_fw / s_w;
                                if alpha == 0.0 {
                                    avg
                                } else {
                                    math::powf(s_w * cm, alpha / n) * avg
                                }
                            })
                            .collect()
                    })
                    .collect()
            }
        };
        Ok(Self {
            dim: grid.dim(),
            levels,
        })
    }

    pub fn score(&self, cube: &DyadicCube) -> f64 {
        self.levels[cube.level() as usize][cube.linear()]
    }

    pub fn level(&self, level: u32) -> &[f64] {
        &self.levels[level as usize]
    }

    pub fn depth(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    /// Running maximum over ancestors at every level; the last row is the
    /// maximal function on the finest cells.
    pub fn running_max(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(self.levels.len());
        out.push(self.levels[0].clone());
        for level in 1..self.levels.len() {
            let prev = &out[level - 1];
            let row: Vec<f64> = self.levels[level]
                .iter()
                .enumerate()
                .map(|(lin, &s)| s.max(prev[parent_linear(self.dim, level as u32, lin)]))
                .collect();
            out.push(row);
        }
        out
    }
}

/// The dyadic maximal function of `f` as a step function on the same grid.
pub fn dyadic_maximal(f: &StepFunction, query: MaximalQuery<'_>) -> Result<StepFunction> {
    let scores = ScorePyramid::build(f, query)?;
    let mut rows = scores.running_max();
    let finest = rows.pop().expect("at least one level");
    StepFunction::new(f.grid().clone(), finest)
}

/// Score of a single cube, read from the same pyramid as [`dyadic_maximal`].
pub fn cube_score(f: &StepFunction, cube: &DyadicCube, query: MaximalQuery<'_>) -> Result<f64> {
    f.grid().check_cube(cube)?;
    Ok(ScorePyramid::build(f, query)?.score(cube))
}

/// Reference implementation by explicit enumeration of cubes and cells.
pub fn brute_force_maximal(f: &StepFunction, query: MaximalQuery<'_>) -> Result<StepFunction> {
    let grid = f.grid();
    let cells = grid.cell_count();
    if cells > BRUTE_FORCE_CELL_LIMIT {
        return Err(Error::Guard {
            cells,
            limit: BRUTE_FORCE_CELL_LIMIT,
        });
    }
    query.validate(f)?;
    let n = grid.dim();
    let alpha = query.alpha();
    let cell_measure = math::powi(grid.side() / (1u64 << grid.depth()) as f64, n as i32);
    let cubes: Vec<DyadicCube> = grid.all_cubes().collect();
    let scores: Vec<f64> = cubes
        .iter()
        .map(|cube| {
            let members: Vec<usize> = (0..cells)
                .filter(|&c| cube.contains(&grid.cell_cube(c)))
                .collect();
            let measure = members.len() as f64 * cell_measure;
            match query.weight() {
                None => {
                    let integral: f64 = members.iter().map(|&c| f.values()[c] * cell_measure).sum();
                    math::powf(measure, alpha / n as f64) * integral / measure
                }
                Some(w) => {
                    let wq: f64 = members.iter().map(|&c| w.values()[c] * cell_measure).sum();
                    if wq <= 0.0 {
                        return 0.0;
                    }
                    let fw: f64 = members
                        .iter()
                        .map(|&c| f.values()[c] * w.values()[c] * cell_measure)
                        .sum();
                    math::powf(wq, alpha / n as f64) * fw / wq
                }
            }
        })
        .collect();
    let mut out = vec![0.0f64; cells];
    for (cell, slot) in out.iter_mut().enumerate() {
        let here = grid.cell_cube(cell);
        for (cube, &s) in cubes.iter().zip(&scores) {
            if cube.contains(&here) && s > *slot {
                *slot = s;
            }
        }
    }
    StepFunction::new(grid.clone(), out)
}

/// Whether the maximal function dominates the score of `cube` on every cell of `cube`.
pub fn pointwise_lower_bound_check(
    f: &StepFunction,
    cube: &DyadicCube,
    query: MaximalQuery<'_>,
) -> Result<bool> {
    f.grid().check_cube(cube)?;
    let scores = ScorePyramid::build(f, query)?;
    let bound = scores.score(cube);
    let rows = scores.running_max();
    let finest = rows.last().expect("at least one level");
    Ok(f.grid().finest_cells(cube).all(|c| finest[c] >= bound))
}
