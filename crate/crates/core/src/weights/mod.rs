//! Weight constants over the dyadic lattice, dual weights, and power weights.
//!
//! Every constant is a maximum over the finitely many lattice cubes of a
//! per-cube quantity built from three primitives: the moment `⟨w^t⟩_Q`, the
//! normalized weak norm `|Q|^{-1} ‖w^t χ_Q‖_{L^{1,∞}}`, and `ess inf_Q w`.
//! Products use the convention `0 · ∞ = 0`.

mod power;

pub use power::{
    power_ess_inf, power_integral, power_weak_l1, Discretization, PowerWeight, DEFAULT_POWER_DEPTH,
};

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{DyadicCube, GridSpec, Pyramid};
use crate::lorentz::weak_norm_of_values;
use crate::math;
use crate::step::StepFunction;

/// A weight, either tabulated on a grid or a one-dimensional power `|x - c|^a`.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSpec {
    Tabulated {
        step: StepFunction,
        allow_zeros: bool,
    },
    Power(PowerWeight),
}

impl WeightSpec {
    /// A strictly positive tabulated weight.
    pub fn tabulated(step: StepFunction) -> Result<Self> {
        if let Some(cell) = step.values().iter().position(|&v| v == 0.0) {
            return Err(Error::Positivity { cell });
        }
        Ok(Self::Tabulated {
            step,
            allow_zeros: false,
        })
    }

    /// A tabulated weight that may vanish on some cells.
    pub fn tabulated_with_zeros(step: StepFunction) -> Self {
        Self::Tabulated {
            step,
            allow_zeros: true,
        }
    }

    pub fn power(weight: PowerWeight) -> Self {
        Self::Power(weight)
    }

    pub fn as_step(&self) -> Option<&StepFunction> {
        match self {
            Self::Tabulated { step, .. } => Some(step),
            Self::Power(_) => None,
        }
    }

    /// The lattice over which constants are taken.
    pub fn grid(&self) -> GridSpec {
        match self {
            Self::Tabulated { step, .. } => step.grid().clone(),
            Self::Power(pw) => pw.grid(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Tabulated { step, .. } => step.grid().dim(),
            Self::Power(_) => 1,
        }
    }

    /// Short human-readable description.
    pub fn label(&self) -> String {
        match self {
            Self::Tabulated { step, .. } => alloc::format!(
                "tabulated(n={}, depth={})",
                step.grid().dim(),
                step.grid().depth()
            ),
            Self::Power(pw) => {
                let (l, r) = pw.root();
                alloc::format!("|x-{}|^{} on [{l},{r})", pw.center(), pw.exponent())
            }
        }
    }

    /// Cell values of the weight. Tabulated weights are refined to `depth`;
    /// power weights are discretized with `scheme`.
    pub fn to_step(&self, depth: u32, scheme: Discretization) -> Result<StepFunction> {
        match self {
            Self::Tabulated { step, .. } => step.refine(depth),
            Self::Power(pw) => pw.tabulate(depth, scheme),
        }
    }
}

/// Which constant to compute, with its exponents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightClass {
    Ap { p: f64 },
    A1,
    Apq { p: f64, q: f64 },
    A1q { q: f64 },
    ReverseHolder { r: f64 },
    ApStar { p: f64 },
    ApqStar { p: f64, q: f64 },
    ApStarKernel { p: f64 },
}

impl WeightClass {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Ap { .. } => "A_p",
            Self::A1 => "A_1",
            Self::Apq { .. } => "A_pq",
            Self::A1q { .. } => "A_1q",
            Self::ReverseHolder { .. } => "RH_r",
            Self::ApStar { .. } => "A_p*",
            Self::ApqStar { .. } => "A_pq*",
            Self::ApStarKernel { .. } => "A_p*_kernel",
        }
    }

    /// The first exponent (`p`, or `r` for reverse Hölder), if any.
    pub fn p(&self) -> Option<f64> {
        match *self {
            Self::Ap { p } | Self::Apq { p, .. } | Self::ApStar { p } => Some(p),
            Self::ApqStar { p, .. } | Self::ApStarKernel { p } => Some(p),
            Self::ReverseHolder { r } => Some(r),
            Self::A1 | Self::A1q { .. } => None,
        }
    }

    pub fn q(&self) -> Option<f64> {
        match *self {
            Self::Apq { q, .. } | Self::A1q { q } | Self::ApqStar { q, .. } => Some(q),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let above_one = |name: &str, x: f64| {
            if x.is_finite() && x > 1.0 {
                Ok(())
            } else {
                Err(Error::Exponent(alloc::format!(
                    "{name} = {x} must be finite and > 1"
                )))
            }
        };
        match *self {
            Self::Ap { p } | Self::ApStar { p } | Self::ApStarKernel { p } => above_one("p", p),
            Self::A1 => Ok(()),
            Self::A1q { q } => above_one("q", q),
            Self::ReverseHolder { r } => above_one("r", r),
            Self::Apq { p, q } | Self::ApqStar { p, q } => {
                above_one("p", p)?;
                if q.is_finite() && q > p {
                    Ok(())
                } else {
                    Err(Error::Exponent(alloc::format!(
                        "q = {q} must exceed p = {p}"
                    )))
                }
            }
        }
    }
}

/// A constant together with the cube attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightConstant {
    pub class: WeightClass,
    pub value: f64,
    pub witness: DyadicCube,
}

/// Per-cube primitives for one weight.
enum Source<'a> {
    Tabulated {
        step: &'a StepFunction,
        centers: Option<Vec<Vec<f64>>>,
    },
    Power(&'a PowerWeight),
}

impl<'a> Source<'a> {
    fn new(w: &'a WeightSpec, class: &WeightClass) -> Result<Self> {
        class.validate()?;
        match w {
            WeightSpec::Tabulated { step, .. } => {
                let centers = matches!(class, WeightClass::ApStarKernel { .. }).then(|| {
                    (0..step.grid().cell_count())
                        .map(|c| step.grid().cell_center(c))
                        .collect()
                });
                Ok(Self::Tabulated { step, centers })
            }
            WeightSpec::Power(pw) => {
                if matches!(class, WeightClass::ApStarKernel { .. }) {
                    return Err(Error::Unsupported(
                        "the kernel form is only available for tabulated weights",
                    ));
                }
                Ok(Self::Power(pw))
            }
        }
    }

    fn powered_block(step: &StepFunction, cube: &DyadicCube, t: f64) -> Vec<f64> {
        step.grid()
            .finest_cells(cube)
            .map(|c| math::powf(step.values()[c], t))
            .collect()
    }

    /// `⟨w^t⟩_Q`.
    fn moment(&self, cube: &DyadicCube, t: f64) -> f64 {
        match self {
            Self::Tabulated { step, .. } => {
                let grid = step.grid();
                let depth = grid.depth() - cube.level();
                let block = Self::powered_block(step, cube, t);
                let sum = Pyramid::from_block(grid.dim(), depth, block).sum(0, 0);
                math::ldexp(sum, -((depth as usize * grid.dim()) as i32))
            }
            Self::Power(pw) => pw.moment(cube, t),
        }
    }

    /// `|Q|^{-1} ‖w^t χ_Q‖_{L^{1,∞}}`.
    fn weak_mean(&self, cube: &DyadicCube, t: f64) -> f64 {
        match self {
            Self::Tabulated { step, .. } => {
                let grid = step.grid();
                let block = Self::powered_block(step, cube, t);
                let cells = (grid.depth() - cube.level()) as usize * grid.dim();
                math::ldexp(weak_norm_of_values(&block, 1.0, 1.0), -(cells as i32))
            }
            Self::Power(pw) => pw.weak_mean(cube, t),
        }
    }

    fn ess_inf(&self, cube: &DyadicCube) -> f64 {
        match self {
            Self::Tabulated { step, .. } => step
                .grid()
                .finest_cells(cube)
                .map(|c| step.values()[c])
                .fold(f64::INFINITY, f64::min),
            Self::Power(pw) => pw.ess_inf(cube),
        }
    }

    /// `‖w(x) |Q|^{p-1} / (|Q|^p + |x - x_Q|^{np})‖_{L^{1,∞}}` over the root,
    /// or over `Q` alone when `local`.
    fn kernel_weak_norm(&self, cube: &DyadicCube, p: f64, local: bool) -> f64 {
        let Self::Tabulated { step, centers } = self else {
            unreachable!("rejected in Source::new");
        };
        let grid = step.grid();
        let n = grid.dim() as f64;
        let m = grid.measure(cube.level());
        let xq = grid.cube_center(cube);
        let scale = math::powf(m, p - 1.0);
        let mp = math::powf(m, p);
        let kernel = |cell: usize| {
            let dist2: f64 = match centers {
                Some(cs) => cs[cell]
                    .iter()
                    .zip(&xq)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum(),
                None => grid
                    .cell_center(cell)
                    .iter()
                    .zip(&xq)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum(),
            };
            step.values()[cell] * scale / (mp + math::powf(dist2, 0.5 * n * p))
        };
        let values: Vec<f64> = if local {
            grid.finest_cells(cube).map(kernel).collect()
        } else {
            (0..grid.cell_count()).map(kernel).collect()
        };
        weak_norm_of_values(&values, grid.cell_measure(), 1.0)
    }

    fn evaluate(&self, class: &WeightClass, cube: &DyadicCube) -> f64 {
        match *class {
            WeightClass::Ap { p } => {
                let pc = math::conjugate(p);
                math::mul0(
                    self.moment(cube, 1.0),
                    math::powf(self.moment(cube, 1.0 - pc), p - 1.0),
                )
            }
            WeightClass::A1 => math::mul0(self.moment(cube, 1.0), 1.0 / self.ess_inf(cube)),
            WeightClass::Apq { p, q } => {
                let pc = math::conjugate(p);
                math::mul0(
                    math::powf(self.moment(cube, q), 1.0 / q),
                    math::powf(self.moment(cube, -pc), 1.0 / pc),
                )
            }
            WeightClass::A1q { q } => math::mul0(
                math::powf(self.moment(cube, q), 1.0 / q),
                1.0 / self.ess_inf(cube),
            ),
            WeightClass::ReverseHolder { r } => math::mul0(
                math::powf(self.moment(cube, r), 1.0 / r),
                1.0 / self.moment(cube, 1.0),
            ),
            WeightClass::ApStar { p } => {
                let pc = math::conjugate(p);
                math::mul0(
                    self.weak_mean(cube, 1.0),
                    math::powf(self.moment(cube, 1.0 - pc), p - 1.0),
                )
            }
            WeightClass::ApqStar { p, q } => {
                let pc = math::conjugate(p);
                math::mul0(
                    math::powf(self.weak_mean(cube, q), 1.0 / q),
                    math::powf(self.moment(cube, -pc), 1.0 / pc),
                )
            }
            WeightClass::ApStarKernel { p } => {
                let pc = math::conjugate(p);
                math::mul0(
                    self.kernel_weak_norm(cube, p, false),
                    math::powf(self.moment(cube, 1.0 - pc), p - 1.0),
                )
            }
        }
    }
}

/// The per-cube quantity of `class` on `cube`; the constant is its maximum.
pub fn evaluate(w: &WeightSpec, class: WeightClass, cube: &DyadicCube) -> Result<f64> {
    let source = Source::new(w, &class)?;
    w.grid().check_cube(cube)?;
    Ok(source.evaluate(&class, cube))
}

/// Every per-cube value of `class`, level by level in row-major order.
pub fn per_cube(w: &WeightSpec, class: WeightClass) -> Result<Vec<(DyadicCube, f64)>> {
    let source = Source::new(w, &class)?;
    let grid = w.grid();
    let values: Vec<(DyadicCube, f64)> = grid
        .all_cubes()
        .map(|q| {
            let v = source.evaluate(&class, &q);
            (q, v)
        })
        .collect();
    if let Some((q, _)) = values.iter().find(|(_, v)| v.is_nan()) {
        return Err(Error::Invariant(alloc::format!(
            "{} is undefined on cube {:?}",
            class.label(),
            q
        )));
    }
    Ok(values)
}

/// The maximum of the per-cube quantity over the lattice, with the first cube
/// (coarsest level, then row-major) attaining it.
pub fn constant(w: &WeightSpec, class: WeightClass) -> Result<WeightConstant> {
    let mut best: Option<(DyadicCube, f64)> = None;
    for (q, v) in per_cube(w, class)? {
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((q, v));
        }
    }
    let (witness, value) = best.expect("the root is always enumerated");
    Ok(WeightConstant {
        class,
        value,
        witness,
    })
}

/// `[w]_{A_p} = sup_Q ⟨w⟩_Q ⟨w^{1-p'}⟩_Q^{p-1}`.
pub fn ap_constant(w: &WeightSpec, p: f64) -> Result<WeightConstant> {
    constant(w, WeightClass::Ap { p })
}

/// `[w]_{A_1} = sup_Q ⟨w⟩_Q / ess inf_Q w`.
pub fn a1_constant(w: &WeightSpec) -> Result<WeightConstant> {
    constant(w, WeightClass::A1)
}

/// `[w]_{A_{p,q}} = sup_Q ⟨w^q⟩_Q^{1/q} ⟨w^{-p'}⟩_Q^{1/p'}`.
pub fn apq_constant(w: &WeightSpec, p: f64, q: f64) -> Result<WeightConstant> {
    constant(w, WeightClass::Apq { p, q })
}

/// `[w]_{A_{1,q}} = sup_Q ⟨w^q⟩_Q^{1/q} / ess inf_Q w`.
pub fn a1q_constant(w: &WeightSpec, q: f64) -> Result<WeightConstant> {
    constant(w, WeightClass::A1q { q })
}

/// `[w]_{RH_r} = sup_Q ⟨w^r⟩_Q^{1/r} / ⟨w⟩_Q`.
pub fn rh_constant(w: &WeightSpec, r: f64) -> Result<WeightConstant> {
    constant(w, WeightClass::ReverseHolder { r })
}

/// `[w]_{A_p^*} = sup_Q |Q|^{-1} ‖w χ_Q‖_{L^{1,∞}} ⟨w^{1-p'}⟩_Q^{p-1}`.
pub fn ap_star_constant(w: &WeightSpec, p: f64) -> Result<WeightConstant> {
    constant(w, WeightClass::ApStar { p })
}

/// `[w]_{A_{p,q}^*} = sup_Q (|Q|^{-1} ‖w^q χ_Q‖_{L^{1,∞}})^{1/q} ⟨w^{-p'}⟩_Q^{1/p'}`.
pub fn apq_star_constant(w: &WeightSpec, p: f64, q: f64) -> Result<WeightConstant> {
    constant(w, WeightClass::ApqStar { p, q })
}

/// The kernel form of the multiplier constant,
/// `sup_Q ‖w(x) |Q|^{p-1} / (|Q|^p + |x - x_Q|^{np})‖_{L^{1,∞}} ⟨w^{1-p'}⟩_Q^{p-1}`,
/// with the kernel sampled at cell centres and the weak norm taken over the root.
pub fn ap_star_kernel_constant(w: &WeightSpec, p: f64) -> Result<WeightConstant> {
    constant(w, WeightClass::ApStarKernel { p })
}

/// The weak norm of the sampled kernel for one cube, over the root or over
/// the cube alone.
pub fn kernel_weak_norm(w: &WeightSpec, p: f64, cube: &DyadicCube, local: bool) -> Result<f64> {
    let class = WeightClass::ApStarKernel { p };
    let source = Source::new(w, &class)?;
    w.grid().check_cube(cube)?;
    Ok(source.kernel_weak_norm(cube, p, local))
}

/// `|Q|^{-1} ‖w^t χ_Q‖_{L^{1,∞}}` for one cube.
pub fn weak_mean(w: &WeightSpec, cube: &DyadicCube, t: f64) -> Result<f64> {
    let class = WeightClass::A1;
    let source = Source::new(w, &class)?;
    w.grid().check_cube(cube)?;
    Ok(source.weak_mean(cube, t))
}

/// `⟨w^t⟩_Q` for one cube.
pub fn moment(w: &WeightSpec, cube: &DyadicCube, t: f64) -> Result<f64> {
    let class = WeightClass::A1;
    let source = Source::new(w, &class)?;
    w.grid().check_cube(cube)?;
    Ok(source.moment(cube, t))
}

/// Which dual weight: `σ = w^{1-p'}` or `σ = w^{-p'}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DualFlavor {
    Ap,
    Apq,
}

impl DualFlavor {
    /// The exponent `e` with `σ = w^e`.
    pub fn exponent(self, p: f64) -> f64 {
        let pc = math::conjugate(p);
        match self {
            Self::Ap => 1.0 - pc,
            Self::Apq => -pc,
        }
    }
}

/// `σ = w^{1-p'}` (flavor `Ap`) or `σ = w^{-p'}` (flavor `Apq`), in the same mode as `w`.
pub fn dual_weight(w: &WeightSpec, p: f64, flavor: DualFlavor) -> Result<WeightSpec> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::Exponent(alloc::format!(
            "p = {p} must be finite and > 1"
        )));
    }
    let e = flavor.exponent(p);
    match w {
        WeightSpec::Tabulated { step, .. } => {
            if let Some(cell) = step.values().iter().position(|&v| v == 0.0) {
                return Err(Error::Positivity { cell });
            }
            WeightSpec::tabulated(step.pow(e)?)
        }
        WeightSpec::Power(pw) => Ok(WeightSpec::Power(pw.with_exponent(pw.exponent() * e))),
    }
}

/// The reverse-Hölder data of the dual weight: the subset-inequality constant
/// `c` and `[σ]_{RH}`, both derived from the multiplier constant `star`.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaRh {
    pub c: f64,
    pub sigma_rh: f64,
    pub star: WeightConstant,
}

/// Plain (`q = None`): `c = 4^{p'/p}`, `[σ]_{RH} = [w]_{A_p^*}^{p'-1}`.
/// Fractional: `c = 4^{p'/q}`, `[σ]_{RH} = [w]_{A_{p,q}^*}^{p'}`.
pub fn sigma_rh_constant(w: &WeightSpec, p: f64, q: Option<f64>) -> Result<SigmaRh> {
    let pc = math::conjugate(p);
    match q {
        None => {
            let star = ap_star_constant(w, p)?;
            Ok(SigmaRh {
                c: math::powf(4.0, pc / p),
                sigma_rh: math::powf(star.value, pc - 1.0),
                star,
            })
        }
        Some(q) => {
            let star = apq_star_constant(w, p, q)?;
            Ok(SigmaRh {
                c: math::powf(4.0, pc / q),
                sigma_rh: math::powf(star.value, pc),
                star,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn tab(depth: u32, values: Vec<f64>) -> WeightSpec {
        WeightSpec::tabulated(StepFunction::new(GridSpec::unit(1, depth).unwrap(), values).unwrap())
            .unwrap()
    }

    fn all_classes() -> Vec<WeightClass> {
        vec![
            WeightClass::Ap { p: 2.0 },
            WeightClass::A1,
            WeightClass::Apq { p: 2.0, q: 4.0 },
            WeightClass::A1q { q: 3.0 },
            WeightClass::ReverseHolder { r: 2.0 },
            WeightClass::ApStar { p: 2.0 },
            WeightClass::ApqStar { p: 2.0, q: 4.0 },
        ]
    }

    #[test]
    fn constant_weight_gives_one() {
        let w = tab(3, vec![1.0; 8]);
        for class in all_classes() {
            let c = constant(&w, class).unwrap();
            assert_eq!(c.value, 1.0, "{}", class.label());
            assert!(c.witness.is_root());
        }
    }

    #[test]
    fn enumerated_examples() {
        let w = tab(2, vec![2.0, 2.0, 1.0, 1.0]);
        let ap = ap_constant(&w, 2.0).unwrap();
        assert_eq!(ap.value, 1.125);
        assert!(ap.witness.is_root());
        let half = tab(1, vec![2.0, 1.0]);
        assert_eq!(a1_constant(&half).unwrap().value, 1.5);
        assert_eq!(a1_constant(&tab(1, vec![1.0, 2.0])).unwrap().value, 1.5);
        // root: sqrt((4 + 1) / 2) / 1.5
        let rh = rh_constant(&half, 2.0).unwrap();
        assert!((rh.value - 2.5f64.sqrt() / 1.5).abs() < 1e-15);
        // root: ((16 + 1) / 2)^{1/4} ((1/4 + 1) / 2)^{1/2}
        let apq = apq_constant(&half, 2.0, 4.0).unwrap();
        let hand = 8.5f64.powf(0.25) * 0.625f64.sqrt();
        assert!((apq.value - hand).abs() < 1e-14);
        // root: ‖wχ‖_{1,∞} = max(2·1/2, 1·1) = 1, ⟨1/w⟩ = 3/4
        assert_eq!(ap_star_constant(&half, 2.0).unwrap().value, 1.0);
    }

    #[test]
    fn exponent_errors() {
        let w = tab(1, vec![2.0, 1.0]);
        assert!(matches!(
            apq_constant(&w, 2.0, 2.0),
            Err(Error::Exponent(_))
        ));
        assert!(matches!(ap_constant(&w, 1.0), Err(Error::Exponent(_))));
        let pw = WeightSpec::power(PowerWeight::new(0.0, -1.0, 0.0, 1.0, 6).unwrap());
        assert!(matches!(
            ap_star_kernel_constant(&pw, 2.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn inverse_distance_power_weight() {
        let pw = PowerWeight::new(0.0, -1.0, 0.0, 1.0, 12).unwrap();
        let w = WeightSpec::power(pw);
        assert_eq!(ap_constant(&w, 2.0).unwrap().value, f64::INFINITY);
        for k in 0..=12 {
            let q = DyadicCube::new(k, vec![0]);
            let v = evaluate(&w, WeightClass::ApStar { p: 2.0 }, &q).unwrap();
            assert!((v - 0.5).abs() < 1e-10, "level {k}: {v}");
        }
        assert!(ap_star_constant(&w, 2.0).unwrap().value.is_finite());
    }

    #[test]
    fn dual_weights() {
        let w = tab(1, vec![4.0, 1.0]);
        let s = dual_weight(&w, 2.0, DualFlavor::Ap).unwrap();
        assert_eq!(s.as_step().unwrap().values(), &[0.25, 1.0]);
        let pw = WeightSpec::power(PowerWeight::new(0.0, -1.0, 0.0, 1.0, 4).unwrap());
        match dual_weight(&pw, 2.0, DualFlavor::Ap).unwrap() {
            WeightSpec::Power(d) => assert_eq!(d.exponent(), 1.0),
            _ => panic!("mode changed"),
        }
        let zeros = WeightSpec::tabulated_with_zeros(
            StepFunction::new(GridSpec::unit(1, 1).unwrap(), vec![0.0, 1.0]).unwrap(),
        );
        assert!(matches!(
            dual_weight(&zeros, 2.0, DualFlavor::Ap),
            Err(Error::Positivity { cell: 0 })
        ));
    }

    #[test]
    fn sigma_rh_for_constant_weight() {
        let w = tab(2, vec![1.0; 4]);
        let plain = sigma_rh_constant(&w, 2.0, None).unwrap();
        assert_eq!((plain.sigma_rh, plain.c), (1.0, 4.0));
        let frac = sigma_rh_constant(&w, 2.0, Some(4.0)).unwrap();
        assert_eq!(frac.c, 2.0);
    }

    #[test]
    fn zero_cells_use_the_product_convention() {
        let w = WeightSpec::tabulated_with_zeros(
            StepFunction::new(GridSpec::unit(1, 1).unwrap(), vec![0.0, 1.0]).unwrap(),
        );
        let left = DyadicCube::new(1, vec![0]);
        assert_eq!(
            evaluate(&w, WeightClass::Ap { p: 2.0 }, &left).unwrap(),
            0.0
        );
        assert_eq!(ap_constant(&w, 2.0).unwrap().value, f64::INFINITY);
    }

    #[test]
    fn kernel_is_locally_dominated() {
        let w = tab(3, vec![3.0, 0.5, 1.0, 7.0, 2.0, 2.0, 0.25, 1.0]);
        for q in w.grid().all_cubes() {
            let local = kernel_weak_norm(&w, 2.0, &q, true).unwrap();
            let bound = weak_mean(&w, &q, 1.0).unwrap();
            assert!(local <= bound * (1.0 + 1e-12), "{q:?}");
        }
        let one = tab(2, vec![1.0; 4]);
        let root = one.grid().root();
        assert!(kernel_weak_norm(&one, 2.0, &root, false).unwrap() <= 1.0);
        assert!(ap_star_kernel_constant(&one, 2.0)
            .unwrap()
            .value
            .is_finite());
    }
}
