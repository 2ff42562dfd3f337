//! Calderón–Zygmund decomposition of the level sets of `M^D f` and `M^D_α f`,
//! the sparse family it induces, and the term-by-term evaluation of the
//! sparse bound for the multiplier weak-type inequality.
//!
//! Level sets are taken at thresholds `τ a^k`, `k = 0, 1, ...`, where `τ` is
//! the root score divided by `2^{n-α}`. With this normalization the root is the
//! single cube of level 0, every selected cube satisfies
//! `τ a^k < score(Q) ≤ 2^{n-α} τ a^k`, and every cell of the root lies in
//! `Ω_0`, so the sparse family accounts for the whole root.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{DyadicCube, GridSpec};
use crate::lorentz::{weak_norm_of_pieces, weak_norm_of_values};
use crate::math;
use crate::operators::{MaximalQuery, ScorePyramid};
use crate::step::StepFunction;
use crate::weights::{sigma_rh_constant, WeightSpec};

/// Relative slack for comparisons between quantities computed along
/// different floating-point paths.
pub const LINK_TOLERANCE: f64 = 1e-12;

/// The maximal cubes of one level set `Ω_k = {M f > τ a^k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CzLevel {
    pub k: u32,
    pub threshold: f64,
    /// Maximal cubes, ordered by level and then row-major.
    pub cubes: Vec<DyadicCube>,
    /// Number of finest cells in `Ω_k`.
    pub omega_cells: usize,
}

#[derive(Clone, Debug)]
pub struct CzDecomposition {
    f: StepFunction,
    base: f64,
    alpha: f64,
    scale: f64,
    scores: ScorePyramid,
    running: Vec<Vec<f64>>,
    levels: Vec<CzLevel>,
    top: Vec<Option<u32>>,
}

/// The smallest admissible base, `2^{n+1-α}`.
pub fn default_base(dim: usize, alpha: f64) -> f64 {
    math::powf(2.0, dim as f64 + 1.0 - alpha)
}

/// Decomposes the level sets of `M^D f` (`alpha = 0`) or `M^D_α f`.
/// `base` defaults to `2^{n+1-α}` and may not be smaller.
pub fn cz_decompose(f: &StepFunction, base: Option<f64>, alpha: f64) -> Result<CzDecomposition> {
    let grid = f.grid();
    let n = grid.dim();
    let min_base = default_base(n, alpha);
    let a = base.unwrap_or(min_base);
    if !(a.is_finite() && a >= min_base) {
        return Err(Error::Parameter(alloc::format!(
            "base {a} is below the admissible minimum {min_base}"
        )));
    }
    let query = if alpha == 0.0 {
        MaximalQuery::Plain
    } else {
        MaximalQuery::Fractional { alpha }
    };
    let scores = ScorePyramid::build(f, query)?;
    let running = scores.running_max();
    let upper = math::powf(2.0, n as f64 - alpha);
    let root_score = scores.level(0)[0];
    let scale = root_score / upper;
    let mut dec = CzDecomposition {
        f: f.clone(),
        base: a,
        alpha,
        scale,
        scores,
        running,
        levels: Vec::new(),
        top: alloc::vec![None; grid.cell_count()],
    };
    if f.is_zero() {
        return Ok(dec);
    }
    let depth = grid.depth();
    let maximal = dec.running[depth as usize].clone();
    let peak = maximal.iter().copied().fold(0.0, f64::max);
    let mut k = 0u32;
    loop {
        let threshold = scale * math::powi(a, k as i32);
        if peak <= threshold {
            break;
        }
        let mut cubes = Vec::new();
        for level in 0..=depth {
            let row = dec.scores.level(level);
            for (lin, &s) in row.iter().enumerate() {
                if s <= threshold {
                    continue;
                }
                let parent_ok = level == 0 || {
                    let parent = crate::grid::parent_linear(n, level, lin);
                    dec.running[level as usize - 1][parent] <= threshold
                };
                if parent_ok {
                    cubes.push(DyadicCube::from_linear(n, level, lin));
                }
            }
        }
        let mut omega_cells = 0;
        for (cell, &m) in maximal.iter().enumerate() {
            if m > threshold {
                dec.top[cell] = Some(k);
                omega_cells += 1;
            }
        }
        dec.levels.push(CzLevel {
            k,
            threshold,
            cubes,
            omega_cells,
        });
        k += 1;
    }
    Ok(dec)
}

impl CzDecomposition {
    pub fn function(&self) -> &StepFunction {
        &self.f
    }

    pub fn grid(&self) -> &GridSpec {
        self.f.grid()
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `τ`, the threshold of level 0.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn levels(&self) -> &[CzLevel] {
        &self.levels
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `(k_min, k_max)` over the nonempty level sets.
    pub fn k_range(&self) -> Option<(u32, u32)> {
        Some((self.levels.first()?.k, self.levels.last()?.k))
    }

    pub fn score(&self, cube: &DyadicCube) -> f64 {
        self.scores.score(cube)
    }

    /// `M^D f` or `M^D_α f` on the finest cells.
    pub fn maximal_values(&self) -> &[f64] {
        &self.running[self.grid().depth() as usize]
    }

    /// The largest `k` with the cell in `Ω_k`.
    pub fn top_level(&self, cell: usize) -> Option<u32> {
        self.top[cell]
    }

    /// Threshold `τ a^k`, also for `k` past the last nonempty level.
    pub fn threshold(&self, k: u32) -> f64 {
        self.levels
            .get(k as usize)
            .map(|l| l.threshold)
            .unwrap_or_else(|| self.scale * math::powi(self.base, k as i32))
    }

    pub fn omega_measure(&self, k: u32) -> f64 {
        self.levels
            .get(k as usize)
            .map_or(0.0, |l| l.omega_cells as f64 * self.grid().cell_measure())
    }

    /// Upper factor `2^{n-α}` in `score(Q) ≤ 2^{n-α} τ a^k`.
    pub fn upper_factor(&self) -> f64 {
        math::powf(2.0, self.grid().dim() as f64 - self.alpha)
    }

    /// Checks every structural invariant: the cubes of each level are disjoint
    /// and cover `Ω_k` cell for cell, each cube is maximal, scores lie in
    /// `(τ a^k, 2^{n-α} τ a^k]`, and the level sets are nested.
    pub fn verify(&self) -> Result<()> {
        let grid = self.grid();
        let maximal = self.maximal_values();
        let upper = self.upper_factor();
        let fail = |msg: String| Err(Error::Invariant(msg));
        let mut previous: Option<Vec<bool>> = None;
        for level in &self.levels {
            let t = level.threshold;
            let mut covered = alloc::vec![false; grid.cell_count()];
            let mut cube_cells = 0usize;
            for q in &level.cubes {
                for cell in grid.finest_cells(q) {
                    if covered[cell] {
                        return fail(alloc::format!(
                            "k={}: cubes overlap at cell {cell}",
                            level.k
                        ));
                    }
                    covered[cell] = true;
                    cube_cells += 1;
                }
                let s = self.score(q);
                let slack = if self.alpha == 0.0 {
                    0.0
                } else {
                    LINK_TOLERANCE
                };
                if !(s > t && s <= upper * t * (1.0 + slack)) {
                    return fail(alloc::format!(
                        "k={}: score {s} of {q:?} outside ({t}, {}]",
                        level.k,
                        upper * t
                    ));
                }
                if let Some(parent) = q.parent() {
                    let inside = grid.finest_cells(&parent).all(|c| maximal[c] > t);
                    if inside {
                        return fail(alloc::format!("k={}: {q:?} is not maximal", level.k));
                    }
                }
            }
            for (cell, &m) in maximal.iter().enumerate() {
                if (m > t) != covered[cell] {
                    return fail(alloc::format!(
                        "k={}: cell {cell} with M = {m} misclassified",
                        level.k
                    ));
                }
            }
            if cube_cells != level.omega_cells {
                return fail(alloc::format!(
                    "k={}: cube measure differs from |Ω_k|",
                    level.k
                ));
            }
            if let Some(prev) = &previous {
                if covered
                    .iter()
                    .zip(prev)
                    .any(|(&now, &before)| now && !before)
                {
                    return fail(alloc::format!(
                        "Ω_{} is not inside Ω_{}",
                        level.k,
                        level.k - 1
                    ));
                }
            }
            previous = Some(covered);
        }
        if let Some(last) = self.levels.last() {
            let next = self.threshold(last.k + 1);
            if maximal.iter().any(|&m| m > next) {
                return fail(String::from(
                    "level sets beyond the last level are nonempty",
                ));
            }
        }
        Ok(())
    }
}

/// One cube of the sparse family with its disjoint portion `E = Q \ Ω_{k+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseEntry {
    pub k: u32,
    /// 1-based position of the cube within its level.
    pub j: usize,
    pub cube: DyadicCube,
    /// Finest cells of `E`, ascending.
    pub e_cells: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseFamily {
    grid: GridSpec,
    entries: Vec<SparseEntry>,
}

impl SparseFamily {
    pub fn entries(&self) -> &[SparseEntry] {
        &self.entries
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Smallest `|E| / |Q|` over the family.
    pub fn min_ratio(&self) -> Option<f64> {
        self.entries
            .iter()
            .map(|e| e.e_cells.len() as f64 / self.grid.cells_per_cube(e.cube.level()) as f64)
            .reduce(f64::min)
    }

    /// `E ⊆ Q`, the `E` are pairwise disjoint, and `|Q| ≤ 2|E|`, in cell counts.
    pub fn verify(&self) -> Result<()> {
        let mut owner = alloc::vec![false; self.grid.cell_count()];
        for e in &self.entries {
            let q_cells = self.grid.cells_per_cube(e.cube.level());
            for &cell in &e.e_cells {
                if !e.cube.contains(&self.grid.cell_cube(cell)) {
                    return Err(Error::Invariant(alloc::format!(
                        "E_{{{},{}}} leaves its cube at cell {cell}",
                        e.k,
                        e.j
                    )));
                }
                if owner[cell] {
                    return Err(Error::Invariant(alloc::format!(
                        "E sets overlap at cell {cell}"
                    )));
                }
                owner[cell] = true;
            }
            if q_cells > 2 * e.e_cells.len() {
                return Err(Error::Invariant(alloc::format!(
                    "sparsity fails for Q_{{{},{}}}: |Q| = {q_cells} cells, |E| = {} cells",
                    e.k,
                    e.j,
                    e.e_cells.len()
                )));
            }
        }
        Ok(())
    }
}

/// The sparse family `{Q_{k,j}}` with `E_{k,j} = Q_{k,j} \ Ω_{k+1}`, verified.
pub fn build_sparse(dec: &CzDecomposition) -> Result<SparseFamily> {
    let grid = dec.grid().clone();
    let mut entries = Vec::new();
    for level in dec.levels() {
        for (idx, q) in level.cubes.iter().enumerate() {
            let e_cells = grid
                .finest_cells(q)
                .filter(|&c| dec.top_level(c) == Some(level.k))
                .collect::<Vec<_>>();
            let mut e_cells = e_cells;
            e_cells.sort_unstable();
            entries.push(SparseEntry {
                k: level.k,
                j: idx + 1,
                cube: q.clone(),
                e_cells,
            });
        }
    }
    let family = SparseFamily { grid, entries };
    family.verify()?;
    Ok(family)
}

/// One quantity in the sparse bound.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainTerm {
    pub name: &'static str,
    pub value: f64,
}

/// `terms[i] ≤ constant · terms[i+1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainLink {
    pub from: &'static str,
    pub to: &'static str,
    pub constant: f64,
    pub holds: bool,
}

/// Every intermediate sum of the sparse bound and the links between them.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseTrace {
    pub terms: Vec<ChainTerm>,
    pub links: Vec<ChainLink>,
    /// `[w]` (the multiplier constant) and `[σ]_{RH}` used in the chain.
    pub star: f64,
    pub sigma_rh: f64,
    /// Product of all link constants.
    pub overall_constant: f64,
}

impl SparseTrace {
    pub fn all_hold(&self) -> bool {
        self.links.iter().all(|l| l.holds)
    }
}

fn holds(lhs: f64, constant: f64, rhs: f64) -> bool {
    if lhs <= constant * rhs {
        return true;
    }
    let scale = lhs.abs().max((constant * rhs).abs());
    lhs - constant * rhs <= LINK_TOLERANCE * scale
}

/// Evaluates the chain
///
/// ```text
/// ‖w (Mf)^p‖_{1,∞}
///   ≤ ‖Σ_k w t_{k+1}^p χ_{Ω_k \ Ω_{k+1}}‖_{1,∞}
///   ≤ sup_λ λ Σ_{k,j} |{x ∈ Q_{k,j} : w t_{k+1}^p > λ}|
///   ≤ Σ t_{k+1}^p ‖w χ_Q‖_{1,∞}
///   ≤ a^p Σ ⟨f⟩_Q^p ‖w χ_Q‖_{1,∞}
///   ≤ a^p [w] Σ ⟨fσ^{-1}⟩_{σ,Q}^p σ(Q)
///   ≤ a^p c 4^{p'} [w][σ]_RH Σ ⟨fσ^{-1}⟩_{σ,Q}^p σ(E)
///   ≤ ... Σ ∫_E M_σ(fσ^{-1})^p σ  ≤  ... ∫ M_σ(fσ^{-1})^p σ
///   ≤ ... (p')^p [w][σ]_RH ∫ f^p w,
/// ```
///
/// with `t_k = τ a^k`, and its fractional analogue (`q` given, `σ = w^{-p'}`,
/// powers `q`, `w^q` in place of `w`, scores `|Q|^{α/n} ⟨f⟩_Q`, and the final
/// bound `(p')^p [w]^q [σ]_RH (∫ f^p w^p)^{q/p}`).
pub fn sparse_sum(
    dec: &CzDecomposition,
    family: &SparseFamily,
    w: &StepFunction,
    sigma: &StepFunction,
    p: f64,
    q: Option<f64>,
) -> Result<SparseTrace> {
    let f = dec.function();
    f.same_grid(w)?;
    f.same_grid(sigma)?;
    if family.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid();
    let n = grid.dim() as f64;
    let alpha = dec.alpha();
    let pc = math::conjugate(p);
    let fractional = match q {
        None if alpha == 0.0 => false,
        None => {
            return Err(Error::Parameter(String::from(
                "a fractional decomposition needs the target exponent q",
            )))
        }
        Some(q) => {
            if (1.0 / p - 1.0 / q - alpha / n).abs() > LINK_TOLERANCE {
                return Err(Error::Exponent(alloc::format!(
                    "1/p - 1/q = {} differs from α/n = {}",
                    1.0 / p - 1.0 / q,
                    alpha / n
                )));
            }
            true
        }
    };
    let r = q.unwrap_or(p);
    let a = dec.base();
    let cm = grid.cell_measure();
    // multiplier: w (plain) or w^q (fractional)
    let mult: Vec<f64> = if fractional {
        w.values().iter().map(|&v| math::powf(v, r)).collect()
    } else {
        w.values().to_vec()
    };
    let wspec = WeightSpec::tabulated(w.clone())?;
    let rh = sigma_rh_constant(&wspec, p, q)?;
    let star = rh.star.value;
    let star_factor = if fractional {
        math::powf(star, r)
    } else {
        star
    };
    let front = star_factor * rh.sigma_rh;

    let maximal = dec.maximal_values();
    let t0 = weak_norm_of_values(
        &maximal
            .iter()
            .zip(&mult)
            .map(|(&m, &v)| v * math::powf(m, r))
            .collect::<Vec<_>>(),
        cm,
        1.0,
    );
    let t1 = weak_norm_of_values(
        &(0..grid.cell_count())
            .map(|c| match dec.top_level(c) {
                Some(k) => mult[c] * math::powf(dec.threshold(k + 1), r),
                None => 0.0,
            })
            .collect::<Vec<_>>(),
        cm,
        1.0,
    );
    let mut pieces: Vec<(f64, f64)> = Vec::new();
    let mut t3 = 0.0;
    let mut t4 = 0.0;
    let mut t5 = 0.0;
    let mut t6 = 0.0;
    let mut t7 = 0.0;
    let g = f.zip_map(sigma, |a, b| a / b)?;
    let sigma_query = if fractional {
        MaximalQuery::FractionalWeighted {
            alpha,
            weight: sigma,
        }
    } else {
        MaximalQuery::Weighted { weight: sigma }
    };
    let sigma_scores = ScorePyramid::build(&g, sigma_query)?;
    let sigma_max = sigma_scores
        .running_max()
        .pop()
        .expect("at least one level");
    let sigma_pyr = sigma.pyramid();
    for e in family.entries() {
        let tk = math::powf(dec.threshold(e.k + 1), r);
        let block: Vec<f64> = grid.finest_cells(&e.cube).map(|c| mult[c]).collect();
        pieces.extend(block.iter().map(|&v| (tk * v, cm)));
        let weak_q = weak_norm_of_values(&block, cm, 1.0);
        t3 += tk * weak_q;
        t4 += math::powf(dec.score(&e.cube), r) * weak_q;
        let sigma_q = sigma_pyr.sum_at(&e.cube) * cm;
        let sigma_e: f64 = e.e_cells.iter().map(|&c| sigma.values()[c]).sum::<f64>() * cm;
        let avg = if fractional {
            // σ(Q)^{α/n} ⟨fσ^{-1}⟩_{σ,Q}, so strip the size factor back off
            sigma_scores.score(&e.cube) / math::powf(sigma_q, alpha / n)
        } else {
            sigma_scores.score(&e.cube)
        };
        if fractional {
            t5 += math::powf(avg, r) * math::powf(sigma_q, r - r / pc);
        } else {
            t5 += math::powf(avg, r) * sigma_q;
        }
        t6 += math::powf(sigma_scores.score(&e.cube), r) * sigma_e;
        t7 += e
            .e_cells
            .iter()
            .map(|&c| math::powf(sigma_max[c], r) * sigma.values()[c])
            .sum::<f64>()
            * cm;
    }
    let t2 = weak_norm_of_pieces(&mut pieces, 1.0);
    let t8: f64 = sigma_max
        .iter()
        .zip(sigma.values())
        .map(|(&m, &s)| math::powf(m, r) * s)
        .sum::<f64>()
        * cm;
    let strong = if fractional {
        let inner: f64 = f
            .values()
            .iter()
            .zip(w.values())
            .map(|(&x, &v)| math::powf(x * v, p))
            .sum::<f64>()
            * cm;
        math::powf(inner, r / p)
    } else {
        f.values()
            .iter()
            .zip(w.values())
            .map(|(&x, &v)| math::powf(x, p) * v)
            .sum::<f64>()
            * cm
    };

    let names = [
        "weak norm of w(Mf)^p",
        "level-set majorant",
        "sum over cubes under one supremum",
        "sum of cube weak norms",
        "sum with cube averages",
        "dual-weight averages over Q",
        "dual-weight averages over E",
        "weighted maximal function over E",
        "weighted maximal function over the root",
        "strong norm of f",
    ];
    let values = [
        t0,
        t1,
        t2,
        t3,
        t4,
        star_factor * t5,
        front * t6,
        front * t7,
        front * t8,
        front * strong,
    ];
    let c = rh.c;
    let constants = [
        1.0,
        1.0,
        1.0,
        math::powf(a, r),
        1.0,
        c * math::powf(4.0, pc),
        1.0,
        1.0,
        math::powf(pc, p),
    ];
    let terms: Vec<ChainTerm> = names
        .iter()
        .zip(values)
        .map(|(&name, value)| ChainTerm { name, value })
        .collect();
    let links = constants
        .iter()
        .enumerate()
        .map(|(i, &constant)| ChainLink {
            from: names[i],
            to: names[i + 1],
            constant,
            holds: holds(values[i], constant, values[i + 1]),
        })
        .collect();
    Ok(SparseTrace {
        terms,
        links,
        star,
        sigma_rh: rh.sigma_rh,
        overall_constant: constants.iter().product(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{dual_weight, DualFlavor};
    use alloc::vec;

    fn quarters(values: Vec<f64>) -> StepFunction {
        StepFunction::new(GridSpec::unit(1, 2).unwrap(), values).unwrap()
    }

    #[test]
    fn spike_decomposition() {
        let f = quarters(vec![4.0, 0.0, 0.0, 0.0]);
        let dec = cz_decompose(&f, Some(4.0), 0.0).unwrap();
        dec.verify().unwrap();
        assert_eq!(dec.scale(), 0.5);
        assert_eq!(dec.k_range(), Some((0, 1)));
        assert_eq!(dec.levels()[0].cubes, vec![DyadicCube::root(1)]);
        assert_eq!(dec.levels()[1].cubes, vec![DyadicCube::new(2, vec![0])]);
        assert_eq!(dec.omega_measure(1), 0.25);
        let family = build_sparse(&dec).unwrap();
        assert_eq!(family.entries()[0].e_cells, vec![1, 2, 3]);
        assert_eq!(family.entries()[1].e_cells, vec![0]);
        assert_eq!(family.min_ratio(), Some(0.75));
    }

    #[test]
    fn constant_function_has_one_level() {
        let f = quarters(vec![1.0; 4]);
        let dec = cz_decompose(&f, None, 0.0).unwrap();
        dec.verify().unwrap();
        assert_eq!(dec.levels().len(), 1);
        let family = build_sparse(&dec).unwrap();
        assert_eq!(family.entries().len(), 1);
        assert_eq!(family.entries()[0].e_cells, vec![0, 1, 2, 3]);
    }

    #[test]
    fn zero_function_and_small_base() {
        let f = quarters(vec![0.0; 4]);
        let dec = cz_decompose(&f, None, 0.0).unwrap();
        assert!(dec.is_empty());
        assert!(build_sparse(&dec).unwrap().entries().is_empty());
        let g = quarters(vec![1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            cz_decompose(&g, Some(3.9), 0.0),
            Err(Error::Parameter(_))
        ));
        assert!(cz_decompose(&g, Some(2f64.powf(1.5)), 0.5).is_ok());
    }

    #[test]
    fn spike_trace_holds() {
        let f = quarters(vec![4.0, 0.0, 0.0, 0.0]);
        let w = quarters(vec![2.0, 2.0, 1.0, 1.0]);
        let sigma = dual_weight(
            &WeightSpec::tabulated(w.clone()).unwrap(),
            2.0,
            DualFlavor::Ap,
        )
        .unwrap()
        .as_step()
        .unwrap()
        .clone();
        let dec = cz_decompose(&f, None, 0.0).unwrap();
        let family = build_sparse(&dec).unwrap();
        let trace = sparse_sum(&dec, &family, &w, &sigma, 2.0, None).unwrap();
        assert_eq!(trace.terms.len(), 10);
        assert!(trace.all_hold(), "{trace:?}");
    }

    #[test]
    fn fractional_trace_holds() {
        let g = GridSpec::unit(1, 4).unwrap();
        let f =
            StepFunction::new(g.clone(), (0..16).map(|i| ((i * 5) % 7) as f64).collect()).unwrap();
        let w =
            StepFunction::new(g, (0..16).map(|i| 0.5 + ((i * 3) % 5) as f64).collect()).unwrap();
        let sigma = dual_weight(
            &WeightSpec::tabulated(w.clone()).unwrap(),
            2.0,
            DualFlavor::Apq,
        )
        .unwrap()
        .as_step()
        .unwrap()
        .clone();
        let dec = cz_decompose(&f, None, 0.25).unwrap();
        dec.verify().unwrap();
        let family = build_sparse(&dec).unwrap();
        let trace = sparse_sum(&dec, &family, &w, &sigma, 2.0, Some(4.0)).unwrap();
        assert!(trace.all_hold(), "{trace:?}");
        assert!(sparse_sum(&dec, &family, &w, &sigma, 2.0, Some(3.0)).is_err());
    }
}
