//! Closed forms for one-dimensional power weights `|x - c|^a`.
//!
//! On an interval `[u, v)` the distance `|x - c|` sweeps one segment
//! `[d1, d2]` (centre outside) or two segments `[0, c-u]`, `[0, v-c]`
//! (centre inside), so integrals, weak norms and extrema of any power of the
//! weight reduce to one-variable formulas on at most two segments.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{DyadicCube, GridSpec};
use crate::math;
use crate::step::StepFunction;

/// `w(x) = |x - center|^exponent` on the root interval `[left, right)`, with
/// the lattice truncated at `depth`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerWeight {
    center: f64,
    exponent: f64,
    left: f64,
    right: f64,
    depth: u32,
}

/// Default lattice truncation for power weights.
pub const DEFAULT_POWER_DEPTH: u32 = 16;

/// How a power weight is turned into cell values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Discretization {
    /// Exact cell average of `w`; fails on cells where `w` is not integrable.
    WeightAverage,
    /// `w = ⟨σ⟩^{1/(1-p')}` with `⟨σ⟩` the exact cell average of `σ = w^{1-p'}`.
    DualAverage { p: f64 },
}

impl PowerWeight {
    pub fn new(center: f64, exponent: f64, left: f64, right: f64, depth: u32) -> Result<Self> {
        if !(center.is_finite() && exponent.is_finite() && left.is_finite() && right.is_finite()) {
            return Err(Error::Domain(
                "power weight parameters must be finite".into(),
            ));
        }
        if right <= left {
            return Err(Error::InvalidGrid(
                "root interval must have positive length",
            ));
        }
        GridSpec::new(alloc::vec![left], right - left, depth)?;
        Ok(Self {
            center,
            exponent,
            left,
            right,
            depth,
        })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn root(&self) -> (f64, f64) {
        (self.left, self.right)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// The same centre and root with exponent `exponent`.
    pub fn with_exponent(&self, exponent: f64) -> Self {
        Self { exponent, ..*self }
    }

    pub fn with_depth(&self, depth: u32) -> Self {
        Self { depth, ..*self }
    }

    /// Lattice grid over the root at the truncation depth.
    pub fn grid(&self) -> GridSpec {
        GridSpec::new(alloc::vec![self.left], self.right - self.left, self.depth)
            .expect("validated at construction")
    }

    /// `[u, v)` for a cube of the lattice.
    pub fn interval(&self, cube: &DyadicCube) -> (f64, f64) {
        let h = math::ldexp(self.right - self.left, -(cube.level() as i32));
        let i = f64::from(cube.index()[0]);
        (self.left + i * h, self.left + (i + 1.0) * h)
    }

    /// Whether `∫_Q w` is finite for every cube, including those touching the centre.
    pub fn locally_integrable(&self) -> bool {
        self.exponent > -1.0 || !self.touches_root()
    }

    /// Whether `w^t` is integrable on every cube.
    pub fn power_locally_integrable(&self, t: f64) -> bool {
        self.exponent * t > -1.0 || !self.touches_root()
    }

    fn touches_root(&self) -> bool {
        self.left <= self.center && self.center <= self.right
    }

    /// `⟨w^t⟩_Q`.
    pub fn moment(&self, cube: &DyadicCube, t: f64) -> f64 {
        let (u, v) = self.interval(cube);
        power_integral(u, v, self.center, self.exponent * t) / (v - u)
    }

    /// `|Q|^{-1} ‖w^t χ_Q‖_{L^{1,∞}}`.
    pub fn weak_mean(&self, cube: &DyadicCube, t: f64) -> f64 {
        let (u, v) = self.interval(cube);
        power_weak_l1(u, v, self.center, self.exponent * t) / (v - u)
    }

    /// `ess inf_Q w`.
    pub fn ess_inf(&self, cube: &DyadicCube) -> f64 {
        let (u, v) = self.interval(cube);
        power_ess_inf(u, v, self.center, self.exponent)
    }

    /// Cell values of the weight at `depth`.
    pub fn tabulate(&self, depth: u32, scheme: Discretization) -> Result<StepFunction> {
        let grid = GridSpec::new(alloc::vec![self.left], self.right - self.left, depth)?;
        let values = (0..grid.cell_count())
            .map(|cell| {
                let (u, v) = self.interval(&grid.cell_cube(cell));
                let value = match scheme {
                    Discretization::WeightAverage => {
                        power_integral(u, v, self.center, self.exponent) / (v - u)
                    }
                    Discretization::DualAverage { p } => {
                        let e = 1.0 - math::conjugate(p);
                        let avg = power_integral(u, v, self.center, self.exponent * e) / (v - u);
                        math::powf(avg, 1.0 / e)
                    }
                };
                if value.is_finite() && value > 0.0 {
                    Ok(value)
                } else {
                    Err(Error::Domain(alloc::format!(
                        "cell {cell} gets value {value} under {scheme:?}"
                    )))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        StepFunction::new(grid, values)
    }
}

/// Distance segments `[d1, d2]` swept by `|x - c|` for `x ∈ [u, v]`.
fn distance_segments(u: f64, v: f64, c: f64) -> ([(f64, f64); 2], usize) {
    if c <= u {
        ([(u - c, v - c), (0.0, 0.0)], 1)
    } else if c >= v {
        ([(c - v, c - u), (0.0, 0.0)], 1)
    } else {
        ([(0.0, c - u), (0.0, v - c)], 2)
    }
}

/// `∫_{d1}^{d2} s^b ds` for `0 <= d1 <= d2`.
fn segment_integral(d1: f64, d2: f64, b: f64) -> f64 {
    if d1 == d2 {
        return 0.0;
    }
    if b <= -1.0 && d1 == 0.0 {
        return f64::INFINITY;
    }
    if b == -1.0 {
        math::ln(d2 / d1)
    } else {
        (math::powf(d2, b + 1.0) - math::powf(d1, b + 1.0)) / (b + 1.0)
    }
}

/// `∫_u^v |x - c|^b dx`, `+∞` when divergent.
pub fn power_integral(u: f64, v: f64, c: f64, b: f64) -> f64 {
    let (segs, count) = distance_segments(u, v, c);
    segs[..count]
        .iter()
        .map(|&(d1, d2)| segment_integral(d1, d2, b))
        .sum()
}

/// `ess inf_{[u,v)} |x - c|^a`.
pub fn power_ess_inf(u: f64, v: f64, c: f64, a: f64) -> f64 {
    let (segs, count) = distance_segments(u, v, c);
    let near = segs[..count]
        .iter()
        .map(|s| s.0)
        .fold(f64::INFINITY, f64::min);
    let far = segs[..count].iter().map(|s| s.1).fold(0.0, f64::max);
    if a > 0.0 {
        math::powf(near, a)
    } else if a < 0.0 {
        math::powf(far, a)
    } else {
        1.0
    }
}

/// `‖|x - c|^b χ_{[u,v)}‖_{L^{1,∞}} = sup_ρ ρ^b m(ρ)`, where `m(ρ)` is the
/// measure of `{|x - c| < ρ}` (for `b < 0`) or `{|x - c| > ρ}` (for `b > 0`)
/// inside `[u, v)`. `m` is piecewise linear in `ρ` with breakpoints at the
/// segment ends, so the supremum is taken over the breakpoints, the
/// stationary point of each linear piece, and the limit `ρ → 0`.
pub fn power_weak_l1(u: f64, v: f64, c: f64, b: f64) -> f64 {
    if b == 0.0 {
        return v - u;
    }
    let (segs, count) = distance_segments(u, v, c);
    let segs = &segs[..count];
    let decreasing = b < 0.0;
    let m = |rho: f64| -> f64 {
        segs.iter()
            .map(|&(d1, d2)| {
                if decreasing {
                    (rho - d1).clamp(0.0, d2 - d1)
                } else {
                    d2 - rho.clamp(d1, d2)
                }
            })
            .sum()
    };
    let g = |rho: f64| math::powf(rho, b) * m(rho);

    let mut breaks: Vec<f64> = segs.iter().flat_map(|&(d1, d2)| [d1, d2]).collect();
    breaks.push(0.0);
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    breaks.dedup();

    // limit ρ → 0
    let mut best: f64 = 0.0;
    if decreasing {
        let touching = segs.iter().filter(|s| s.0 == 0.0 && s.1 > 0.0).count() as f64;
        if touching > 0.0 {
            if b == -1.0 {
                best = touching;
            } else if b < -1.0 {
                return f64::INFINITY;
            }
        }
    }
    for &r in breaks.iter().filter(|&&r| r > 0.0) {
        best = best.max(g(r));
    }
    // stationary points of ρ^b (kρ + e) on each piece: (b+1) k ρ + b e = 0
    let pieces = breaks
        .windows(2)
        .map(|w| (w[0], w[1]))
        .chain(core::iter::once((
            *breaks.last().expect("nonempty"),
            f64::INFINITY,
        )));
    for (r0, r1) in pieces {
        if b == -1.0 {
            continue;
        }
        let probe = if r1.is_finite() {
            0.5 * (r0 + r1)
        } else {
            r0 + 1.0
        };
        let k = (m(probe) - m(r0)) / (probe - r0);
        if k == 0.0 {
            continue;
        }
        let e = m(r0) - k * r0;
        let star = -b * e / ((b + 1.0) * k);
        if star > r0 && star < r1 {
            best = best.max(g(star));
        }
    }
    best
}
