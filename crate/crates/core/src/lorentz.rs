//! Lorentz quasi-norms of step functions, evaluated exactly.
//!
//! With the distribution function `d_f(λ) = |{|f| > λ}|`,
//!
//! ```text
//! ‖f‖_{L^{p,∞}} = sup_λ λ d_f(λ)^{1/p}
//! ‖f‖_{L^{p,q}} = p^{1/q} ( ∫_0^∞ [d_f(λ)^{1/p} λ]^q dλ/λ )^{1/q}
//! ```
//!
//! For a step function `d_f` is constant between consecutive distinct values,
//! so the supremum is attained as `λ` increases to a value `v` (measure of
//! `{f ≥ v}`) and the integral is a finite sum of closed-form segments.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::grid::DyadicCube;
use crate::math;
use crate::step::StepFunction;

/// Second Lorentz exponent; `Infinite` selects the weak space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SecondIndex {
    Finite(f64),
    Infinite,
}

/// The exponent pair `(p, q)` of `L^{p,q}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzIndex {
    p: f64,
    q: SecondIndex,
}

impl LorentzIndex {
    pub fn new(p: f64, q: SecondIndex) -> Result<Self> {
        check_exponent("p", p)?;
        if let SecondIndex::Finite(q) = q {
            check_exponent("q", q)?;
        }
        Ok(Self { p, q })
    }

    pub fn weak(p: f64) -> Result<Self> {
        Self::new(p, SecondIndex::Infinite)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> SecondIndex {
        self.q
    }

    /// Index of `|f|^r` matching `f` in `L^{pr, qr}`.
    pub fn scaled(&self, r: f64) -> Result<Self> {
        let q = match self.q {
            SecondIndex::Finite(q) => SecondIndex::Finite(q * r),
            SecondIndex::Infinite => SecondIndex::Infinite,
        };
        Self::new(self.p * r, q)
    }
}

fn check_exponent(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(alloc::format!(
            "exponent {name} = {value} must be finite and positive"
        )))
    }
}

fn descending(values: &mut [f64]) {
    values.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
}

/// `sup_λ λ |{v > λ}|^{1/p}` for cell values of equal measure `cell_measure`.
pub fn weak_norm_of_values(values: &[f64], cell_measure: f64, p: f64) -> f64 {
    let mut sorted = values.to_vec();
    descending(&mut sorted);
    let mut best: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() && sorted[i] > 0.0 {
        let v = sorted[i];
        while i < sorted.len() && sorted[i] == v {
            i += 1;
        }
        let measure = i as f64 * cell_measure;
        best = best.max(v * math::powf(measure, 1.0 / p));
    }
    best
}

/// Weak norm of a function given as `(value, measure)` pieces with disjoint
/// supports, or of a sum of distribution functions when pieces overlap.
pub fn weak_norm_of_pieces(pieces: &mut [(f64, f64)], p: f64) -> f64 {
    pieces.sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
    let mut best: f64 = 0.0;
    let mut measure = 0.0;
    let mut i = 0;
    while i < pieces.len() && pieces[i].0 > 0.0 {
        let v = pieces[i].0;
        while i < pieces.len() && pieces[i].0 == v {
            measure += pieces[i].1;
            i += 1;
        }
        best = best.max(v * math::powf(measure, 1.0 / p));
    }
    best
}

/// `‖f χ_Q‖_{L^{p,∞}}` (over the root when `cube` is `None`).
pub fn weak_norm(f: &StepFunction, p: f64, cube: Option<&DyadicCube>) -> Result<f64> {
    check_exponent("p", p)?;
    let cm = f.grid().cell_measure();
    match cube {
        Some(q) => {
            f.grid().check_cube(q)?;
            Ok(weak_norm_of_values(&f.block(q), cm, p))
        }
        None => Ok(weak_norm_of_values(f.values(), cm, p)),
    }
}

/// `‖f‖_{L^{p,q}}` for finite `p, q`, summed per constancy segment of `d_f`.
pub fn lorentz_norm(f: &StepFunction, p: f64, q: f64) -> Result<f64> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    Ok(lorentz_norm_of_values(
        f.values(),
        f.grid().cell_measure(),
        p,
        q,
    ))
}

pub(crate) fn lorentz_norm_of_values(values: &[f64], cell_measure: f64, p: f64, q: f64) -> f64 {
    let mut sorted = values.to_vec();
    descending(&mut sorted);
    // distinct values u_1 > ... > u_m > 0; on (u_{j+1}, u_j) the distribution
    // equals the measure of {f >= u_j}
    let mut total = 0.0;
    let mut i = 0;
    while i < sorted.len() && sorted[i] > 0.0 {
        let v = sorted[i];
        while i < sorted.len() && sorted[i] == v {
            i += 1;
        }
        let next = if i < sorted.len() {
            sorted[i].max(0.0)
        } else {
            0.0
        };
        let d = i as f64 * cell_measure;
        total += math::powf(d, q / p) * (math::powf(v, q) - math::powf(next, q)) / q;
    }
    math::powf(p, 1.0 / q) * math::powf(total, 1.0 / q)
}

/// `‖f‖` in the space named by `index`.
pub fn norm(f: &StepFunction, index: LorentzIndex) -> Result<f64> {
    match index.q {
        SecondIndex::Finite(q) => lorentz_norm(f, index.p, q),
        SecondIndex::Infinite => weak_norm(f, index.p, None),
    }
}

/// Outcome of a numerical identity or inequality check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOutcome {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// Relative residual for identities, `rhs - lhs` for inequalities.
    pub residual: f64,
}

/// Checks `‖|f|^r‖_{L^{p,q}} = ‖f‖^r_{L^{pr,qr}}`; holds when the relative
/// residual is at most `1e-10`.
pub fn power_identity_check(
    f: &StepFunction,
    r: f64,
    p: f64,
    q: SecondIndex,
) -> Result<CheckOutcome> {
    check_exponent("r", r)?;
    let index = LorentzIndex::new(p, q)?;
    let lhs = norm(&f.pow(r)?, index)?;
    let rhs = math::powf(norm(f, index.scaled(r)?)?, r);
    let residual = math::relative_gap(lhs, rhs);
    Ok(CheckOutcome {
        holds: residual <= 1e-10,
        lhs,
        rhs,
        residual,
    })
}

/// Checks `‖fg‖_{L^{1,1}} ≤ ‖f‖_{L^{s,∞}} ‖g‖_{L^{s',1}}`; the residual is the
/// slack `rhs - lhs`, and the check tolerates `-1e-12` relative.
pub fn lorentz_holder_check(f: &StepFunction, g: &StepFunction, s: f64) -> Result<CheckOutcome> {
    f.same_grid(g)?;
    if !(s.is_finite() && s > 1.0) {
        return Err(Error::Domain(alloc::format!(
            "Hölder exponent s = {s} must exceed 1"
        )));
    }
    let s_conj = math::conjugate(s);
    let product: Vec<f64> = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| a * b)
        .collect();
    let cm = f.grid().cell_measure();
    let lhs = lorentz_norm_of_values(&product, cm, 1.0, 1.0);
    let rhs = weak_norm(f, s, None)? * lorentz_norm(g, s_conj, 1.0)?;
    let slack = rhs - lhs;
    Ok(CheckOutcome {
        holds: slack >= -1e-12 * rhs.abs().max(lhs.abs()),
        lhs,
        rhs,
        residual: slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use alloc::vec;

    fn quarters(values: Vec<f64>) -> StepFunction {
        StepFunction::new(GridSpec::unit(1, 2).unwrap(), values).unwrap()
    }

    /// Midpoint rule of `p ∫ d_f(λ)^{q/p} λ^{q-1} dλ` on a log grid, then `1/q` root.
    /// `p ∫_0^∞ λ^{q-1} d_f(λ)^{q/p} dλ` by composite Simpson, split at the
    /// cell values where the distribution function jumps.
    fn quadrature_lorentz(f: &StepFunction, p: f64, q: f64) -> f64 {
        let mut breaks: Vec<f64> = f.values().to_vec();
        breaks.push(0.0);
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
        let panels = 2000;
        let mut acc = 0.0;
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            // d_f is constant on the open interval
            let d = f.superlevel_measure(0.5 * (a + b), None).unwrap();
            let h = (b - a) / panels as f64;
            let g = |x: f64| q * x.powf(q - 1.0) * d.powf(q / p);
            let mut s = g(a) + g(b);
            for i in 1..panels {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(a + i as f64 * h);
            }
            acc += s * h / 3.0;
        }
        (p / q * acc).powf(1.0 / q)
    }

    #[test]
    fn weak_norm_examples() {
        let f = quarters(vec![1.0, 1.0, 0.0, 0.0]);
        assert!((weak_norm(&f, 2.0, None).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let spike = quarters(vec![4.0, 0.0, 0.0, 0.0]);
        assert_eq!(weak_norm(&spike, 2.0, None).unwrap(), 2.0);
        assert_eq!(weak_norm(&spike, 1.0, None).unwrap(), 1.0);
        assert_eq!(weak_norm(&quarters(vec![0.0; 4]), 1.0, None).unwrap(), 0.0);
    }

    #[test]
    fn weak_norm_restricted() {
        let f = quarters(vec![4.0, 2.0, 1.0, 1.0]);
        let left = DyadicCube::new(1, vec![0]);
        // values 4 on 1/4 and 2 on 1/2: max(4 * 1/4, 2 * 1/2)
        assert_eq!(weak_norm(&f, 1.0, Some(&left)).unwrap(), 1.0);
        assert!(weak_norm(&f, 0.0, None).is_err());
    }

    #[test]
    fn lorentz_norm_examples() {
        let ind = quarters(vec![1.0, 0.0, 0.0, 0.0]);
        assert!((lorentz_norm(&ind, 2.0, 2.0).unwrap() - 0.5).abs() < 1e-15);
        let f = quarters(vec![1.0, 2.0, 3.0, 4.0]);
        assert!((lorentz_norm(&f, 1.0, 1.0).unwrap() - 2.5).abs() < 1e-15);
        assert!(lorentz_norm(&f, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn lorentz_norm_matches_quadrature() {
        let spike = quarters(vec![4.0, 0.0, 0.0, 0.0]);
        // d = 1/4 on (0, 4): 2 * ∫_0^4 (1/4)^{1/2} dλ = 4
        let exact = lorentz_norm(&spike, 2.0, 1.0).unwrap();
        assert!((exact - 4.0).abs() < 1e-14);
        let quad = quadrature_lorentz(&spike, 2.0, 1.0);
        assert!((exact - quad).abs() / exact < 1e-8, "{exact} vs {quad}");

        let f = quarters(vec![0.3, 2.0, 1.1, 0.0]);
        for (p, q) in [(2.0, 1.0), (1.5, 3.0), (3.0, 2.0)] {
            let exact = lorentz_norm(&f, p, q).unwrap();
            let quad = quadrature_lorentz(&f, p, q);
            assert!(
                (exact - quad).abs() / exact < 1e-8,
                "p={p} q={q}: {exact} vs {quad}"
            );
        }
    }

    #[test]
    fn lorentz_equals_lp_when_p_equals_q() {
        let f = quarters(vec![0.3, 2.0, 1.1, 0.7]);
        for p in [1.0, 1.5, 2.0, 3.0] {
            let direct: f64 = f
                .values()
                .iter()
                .map(|v| v.powf(p) * 0.25)
                .sum::<f64>()
                .powf(1.0 / p);
            let ln = lorentz_norm(&f, p, p).unwrap();
            assert!((ln - direct).abs() / direct < 1e-12);
        }
    }

    #[test]
    fn power_identity_examples() {
        let f = quarters(vec![1.0, 2.0, 3.0, 4.0]);
        let check = power_identity_check(&f, 2.0, 1.0, SecondIndex::Infinite).unwrap();
        assert!(check.holds, "{check:?}");
        let ind = quarters(vec![0.0, 1.0, 1.0, 0.0]);
        for r in [0.5, 2.0, 3.0] {
            let c = power_identity_check(&ind, r, 2.0, SecondIndex::Finite(1.0)).unwrap();
            assert!(c.residual < 1e-14);
        }
    }

    #[test]
    fn holder_examples() {
        let f = quarters(vec![3.0, 0.5, 2.0, 1.0]);
        let g = quarters(vec![1.0, 1.0, 1.0, 1.0]);
        let check = lorentz_holder_check(&f, &g, 2.0).unwrap();
        assert!(check.holds);
        // ‖χ_Q‖_{L^{s',1}} = s' |Q|^{1/s'}
        assert!((lorentz_norm(&g, 2.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
        let zero = quarters(vec![0.0; 4]);
        let c = lorentz_holder_check(&zero, &f, 3.0).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert!(c.holds);
        let other = StepFunction::constant(GridSpec::unit(1, 3).unwrap(), 1.0).unwrap();
        assert_eq!(
            lorentz_holder_check(&f, &other, 2.0),
            Err(Error::GridMismatch)
        );
    }
}
