//! Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and
//! exits with a failure status if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use dyadic_weights_core::cz::{build_sparse, cz_decompose, default_base, sparse_sum};
use dyadic_weights_core::harness::*;
use dyadic_weights_core::lorentz::{power_identity_check, SecondIndex};
use dyadic_weights_core::operators::{brute_force_maximal, dyadic_maximal, MaximalQuery};
use dyadic_weights_core::weights::*;
use dyadic_weights_core::{DyadicCube, GridSpec, StepFunction};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn dual_step(w: &StepFunction, p: f64, flavor: DualFlavor) -> StepFunction {
    let spec = WeightSpec::tabulated(w.clone()).unwrap();
    dual_weight(&spec, p, flavor)
        .unwrap()
        .as_step()
        .unwrap()
        .clone()
}

fn oracle_equivalence() -> Outcome {
    let mut rng = seeded_rng(101);
    let mut worst: f64 = 0.0;
    for i in 0..200u32 {
        let grid = if i % 2 == 0 {
            GridSpec::unit(1, i % 7).unwrap()
        } else {
            GridSpec::unit(2, i % 4).unwrap()
        };
        let f = random_function(&grid, &mut rng);
        let w = random_weight(&grid, &mut rng);
        let alpha = 0.5 * grid.dim() as f64;
        for query in [
            MaximalQuery::Plain,
            MaximalQuery::Fractional { alpha },
            MaximalQuery::Weighted { weight: &w },
            MaximalQuery::FractionalWeighted { alpha, weight: &w },
        ] {
            let fast = dyadic_maximal(&f, query).unwrap();
            let slow = brute_force_maximal(&f, query).unwrap();
            for (a, b) in fast.values().iter().zip(slow.values()) {
                worst = worst.max(rel(*a, *b));
            }
        }
    }
    ensure(worst <= 1e-13, || format!("worst relative error {worst:e}"))?;
    Ok(format!(
        "200 instances x 4 operators, worst relative error {worst:e}"
    ))
}

fn trivial_exactness() -> Outcome {
    let mut checked = 0;
    for grid in [GridSpec::unit(1, 6).unwrap(), GridSpec::unit(2, 3).unwrap()] {
        let one = StepFunction::constant(grid.clone(), 1.0).unwrap();
        let w = WeightSpec::tabulated(one.clone()).unwrap();
        let mut values = vec![
            ap_constant(&w, 2.0).unwrap().value,
            a1_constant(&w).unwrap().value,
            apq_constant(&w, 2.0, 4.0).unwrap().value,
            a1q_constant(&w, 4.0).unwrap().value,
            rh_constant(&w, 2.0).unwrap().value,
            ap_star_constant(&w, 2.0).unwrap().value,
            apq_star_constant(&w, 2.0, 4.0).unwrap().value,
        ];
        values.push(sigma_rh_constant(&w, 2.0, None).unwrap().sigma_rh);
        for (i, v) in values.iter().enumerate() {
            ensure((v - 1.0).abs() <= 1e-12, || {
                format!("constant #{i} = {v} on n = {}", grid.dim())
            })?;
        }
        checked += values.len();
        let chi = StepFunction::indicator(grid.clone(), &grid.root()).unwrap();
        let ratio = multiplier_ratio(&chi, &one, 2.0, 0.0, None).unwrap();
        ensure((ratio - 1.0).abs() <= 1e-12, || {
            format!("ratio of the root indicator {ratio}")
        })?;
    }
    Ok(format!(
        "{checked} constants and 2 root-indicator ratios equal 1"
    ))
}

fn lorentz_identity() -> Outcome {
    let mut rng = seeded_rng(103);
    let grid = GridSpec::unit(1, 6).unwrap();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for _ in 0..100 {
        let f = random_function(&grid, &mut rng);
        for r in [0.5, 2.0, 3.0] {
            for (p, q) in [
                (1.0, SecondIndex::Infinite),
                (2.0, SecondIndex::Finite(2.0)),
                (2.0, SecondIndex::Finite(1.0)),
            ] {
                let out = power_identity_check(&f, r, p, q).unwrap();
                worst = worst.max(rel(out.lhs, out.rhs));
                count += 1;
            }
        }
    }
    ensure(worst <= 1e-10, || format!("worst residual {worst:e}"))?;
    Ok(format!(
        "{count} evaluations, worst relative residual {worst:e}"
    ))
}

fn chebyshev_ordering() -> Outcome {
    let mut rng = seeded_rng(104);
    let mut violations = 0;
    for i in 0..200 {
        let grid = if i % 2 == 0 {
            GridSpec::unit(1, 6).unwrap()
        } else {
            GridSpec::unit(2, 3).unwrap()
        };
        let f = random_function(&grid, &mut rng);
        let w = random_weight(&grid, &mut rng);
        let p = [1.5, 2.0, 3.0, 5.0][i % 4];
        let out = chebyshev_check(&f, &w, p).unwrap();
        if out.lhs > out.rhs && rel(out.lhs, out.rhs) > 1e-12 {
            violations += 1;
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok("200 triples, 0 violations".into())
}

fn lemma_suites() -> Outcome {
    let mut rng = seeded_rng(105);
    let mut evaluated = 0;
    let mut runs = 0;
    for depth in [2, 4, 8] {
        let grid = GridSpec::unit(1, depth).unwrap();
        let trials = if depth == 8 { 3 } else { 10 };
        for t in 0..trials {
            let w = WeightSpec::tabulated(random_weight(&grid, &mut rng)).unwrap();
            for (p, q) in [(1.5, None), (2.0, None), (3.0, None), (2.0, Some(4.0))] {
                let report = lemma_suite(&w, p, q, t).unwrap();
                for check in &report.checks {
                    ensure(check.violations == 0, || {
                        format!(
                            "D = {depth}, p = {p}, q = {q:?}: {} has {} violations",
                            check.name, check.violations
                        )
                    })?;
                    evaluated += check.evaluated;
                }
                ensure(report.passed, || {
                    format!("D = {depth}, p = {p}: {:?}", report.diagnostic)
                })?;
                runs += 1;
            }
        }
    }
    Ok(format!(
        "{runs} suites, {evaluated} inequalities, 0 violations"
    ))
}

fn inverse_distance() -> Outcome {
    let pw = PowerWeight::new(0.0, -1.0, 0.0, 1.0, 16).unwrap();
    let w = WeightSpec::power(pw);
    let ap = ap_constant(&w, 2.0).unwrap().value;
    ensure(ap == f64::INFINITY, || format!("analytic A_2 = {ap}"))?;
    let star = ap_star_constant(&w, 2.0).unwrap().value;
    ensure(star.is_finite(), || format!("analytic A_2* = {star}"))?;
    for k in 0..=16 {
        let cube = DyadicCube::new(k, vec![0]);
        let v = evaluate(&w, WeightClass::ApStar { p: 2.0 }, &cube).unwrap();
        ensure((v - 0.5).abs() <= 1e-10, || {
            format!("cube [0, 2^-{k}) gives {v}")
        })?;
    }
    let rows = depth_sweep(&pw, 2.0, &[6, 8, 10, 12]).unwrap();
    let growth = rows[3].ap / rows[0].ap;
    let lo = rows.iter().map(|r| r.ap_star).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.ap_star).fold(0.0, f64::max);
    let spread = (hi - lo) / lo;
    ensure(growth >= 1.3, || format!("A_2 growth {growth}"))?;
    ensure(spread < 0.05, || format!("A_2* spread {spread}"))?;
    let ap_line: Vec<String> = rows.iter().map(|r| format!("{:.3}", r.ap)).collect();
    Ok(format!(
        "A_2 = inf, A_2* = {star:.6}, A_2 by depth [{}] (growth {growth:.2}x), A_2* spread {:.2}%",
        ap_line.join(", "),
        100.0 * spread
    ))
}

fn sandwich() -> Outcome {
    let mut rng = seeded_rng(107);
    let grid = GridSpec::unit(1, 6).unwrap();
    let mut worst_norm: f64 = 0.0;
    let mut runs = 0;
    // (p, α, q); the fractional case needs 1/p - 1/q = α/n with n = 1
    let cases = [
        (1.5, 0.0, None),
        (2.0, 0.0, None),
        (3.0, 0.0, None),
        (2.0, 0.25, Some(4.0)),
    ];
    for i in 0..50 {
        let w = WeightSpec::tabulated(random_weight(&grid, &mut rng)).unwrap();
        for (p, alpha, q) in cases {
            let config = SuiteConfig {
                seed: i,
                ..SuiteConfig::default()
            };
            let report = sufficiency_check(&w, p, alpha, q, &config).unwrap();
            let star = match q {
                None => ap_star_constant(&w, p).unwrap().value.powf(1.0 / p),
                Some(q) => apq_star_constant(&w, p, q).unwrap().value,
            };
            let what = || format!("weight {i}, p = {p}, q = {q:?}");
            ensure(report.measured_ratio >= star - 1e-9, || {
                format!("{}: ratio {} below {star}", what(), report.measured_ratio)
            })?;
            ensure(
                report.measured_ratio <= DEFAULT_C_DESK * report.theoretical_bound,
                || format!("{}: normalized {}", what(), report.normalized),
            )?;
            ensure(report.passed, || {
                format!("{}: {:?}", what(), report.diagnostic)
            })?;
            let nec = necessity_check(&w, p, alpha, q).unwrap();
            ensure(nec.passed, || format!("{}: necessity failed", what()))?;
            worst_norm = worst_norm.max(report.normalized);
            runs += 1;
        }
    }
    Ok(format!(
        "{runs} runs (fractional with alpha = 1/4), worst normalized ratio {worst_norm:.4} <= C_desk = {DEFAULT_C_DESK}"
    ))
}

fn cz_certificates() -> Outcome {
    let mut rng = seeded_rng(108);
    let mut links = 0;
    for i in 0..100 {
        let grid = if i % 2 == 0 {
            GridSpec::unit(1, 6).unwrap()
        } else {
            GridSpec::unit(2, 3).unwrap()
        };
        let n = grid.dim();
        let f = random_function(&grid, &mut rng);
        let w = random_weight(&grid, &mut rng);
        // plain, then fractional with p = 2, q = 4, α = n/4
        for (alpha, q) in [(0.0, None), (0.25 * n as f64, Some(4.0))] {
            let base = default_base(n, alpha);
            let expected = 2f64.powf(n as f64 + 1.0 - alpha);
            ensure(rel(base, expected) <= 1e-15, || {
                format!("base {base} vs {expected}")
            })?;
            let dec = cz_decompose(&f, Some(base), alpha).unwrap();
            dec.verify().map_err(|e| format!("instance {i}: {e}"))?;
            let family = build_sparse(&dec).unwrap();
            family.verify().map_err(|e| format!("instance {i}: {e}"))?;
            let ratio = family.min_ratio().unwrap_or(1.0);
            ensure(ratio >= 0.5, || format!("instance {i}: |E|/|Q| = {ratio}"))?;
            let flavor = if q.is_some() {
                DualFlavor::Apq
            } else {
                DualFlavor::Ap
            };
            let sigma = dual_step(&w, 2.0, flavor);
            let trace = sparse_sum(&dec, &family, &w, &sigma, 2.0, q).unwrap();
            for link in &trace.links {
                ensure(link.holds, || {
                    format!("instance {i}: {} -> {} fails", link.from, link.to)
                })?;
            }
            links += trace.links.len();
        }
    }
    Ok(format!("200 decompositions, {links} chain links hold"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_dyadic-weights");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let w = write(
        dir.path(),
        "w.json",
        r#"{"mode":"tabulated","step":{"n":1,"root_corner":[0.0],"root_side":1.0,"depth":2,"values":[2,2,1,1]}}"#,
    );
    let bad = write(
        dir.path(),
        "bad.json",
        "{\"mode\": \"tabulated\",\n \"step\": 3}\n",
    );
    let status = |args: &[&str]| -> Result<i32, String> {
        let out = Command::new(bin)
            .args(args)
            .env_remove("DYADIC_WEIGHTS_OUT_DIR")
            .output()
            .map_err(|e| e.to_string())?;
        out.status
            .code()
            .ok_or_else(|| "terminated by signal".to_string())
    };
    let mut reports = Vec::new();
    for (run, format) in [("a", "json"), ("b", "json"), ("c", "csv"), ("d", "csv")] {
        let out = dir.path().join(format!("{run}.{format}"));
        let out = out.to_str().unwrap();
        let code = status(&[
            "verify", "--weight", &w, "--p", "2", "--depth", "6", "--seed", "7", "--format",
            format, "--output", out,
        ])?;
        ensure(code == 0, || format!("verify exited with {code}"))?;
        reports.push(std::fs::read(out).map_err(|e| e.to_string())?);
    }
    ensure(reports[0] == reports[1], || "JSON reports differ".into())?;
    ensure(reports[2] == reports[3], || "CSV reports differ".into())?;
    serde_json::from_slice::<dyadic_weights::format::ReportJson>(&reports[0])
        .map_err(|e| format!("report does not re-parse: {e}"))?;

    let fail = status(&[
        "verify",
        "--weight",
        &w,
        "--p",
        "2",
        "--c-desk",
        "0.5",
        "--output",
        dir.path().join("f.json").to_str().unwrap(),
    ])?;
    ensure(fail == 2, || {
        format!("failing verification exited with {fail}")
    })?;
    let missing_p = status(&["verify", "--weight", &w])?;
    ensure(missing_p == 1, || {
        format!("missing --p exited with {missing_p}")
    })?;
    let malformed = status(&["constants", "--weight", &bad, "--p", "2"])?;
    ensure(malformed == 1, || {
        format!("malformed file exited with {malformed}")
    })?;
    let unknown = status(&["frobnicate"])?;
    ensure(unknown == 1, || {
        format!("unknown command exited with {unknown}")
    })?;
    Ok("byte-identical JSON and CSV reruns; exit codes 0 / 2 / 1 as specified".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("trivial exactness", trivial_exactness),
        ("Lorentz power identity", lorentz_identity),
        ("Chebyshev ordering", chebyshev_ordering),
        ("subset and root-power suites", lemma_suites),
        ("inverse distance weight", inverse_distance),
        ("necessity/sufficiency sandwich", sandwich),
        ("CZ and sparse certificates", cz_certificates),
        ("CLI determinism and exit codes", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
