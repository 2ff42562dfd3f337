use dyadic_weights_core::cz::{build_sparse, cz_decompose, default_base, sparse_sum};
use dyadic_weights_core::harness::{random_function, random_weight, seeded_rng};
use dyadic_weights_core::weights::{dual_weight, DualFlavor, WeightSpec};
use dyadic_weights_core::{GridSpec, StepFunction};
use proptest::prelude::*;

fn dual(w: &StepFunction, p: f64, flavor: DualFlavor) -> StepFunction {
    dual_weight(&WeightSpec::tabulated(w.clone()).unwrap(), p, flavor)
        .unwrap()
        .as_step()
        .unwrap()
        .clone()
}

#[test]
fn plain_sweep() {
    let mut rng = seeded_rng(3);
    for i in 0..60 {
        let grid = if i % 3 == 0 {
            GridSpec::unit(2, 3).unwrap()
        } else {
            GridSpec::unit(1, 6).unwrap()
        };
        let f = random_function(&grid, &mut rng);
        let w = random_weight(&grid, &mut rng);
        for a in [None, Some(2.0 * default_base(grid.dim(), 0.0))] {
            let dec = cz_decompose(&f, a, 0.0).unwrap();
            dec.verify().unwrap();
            let family = build_sparse(&dec).unwrap();
            assert!(family.min_ratio().unwrap() >= 0.5);
            let total: usize = family.entries().iter().map(|e| e.e_cells.len()).sum();
            assert_eq!(total, grid.cell_count());
            for p in [1.5, 2.0, 3.0] {
                let sigma = dual(&w, p, DualFlavor::Ap);
                let trace = sparse_sum(&dec, &family, &w, &sigma, p, None).unwrap();
                assert!(trace.all_hold(), "{trace:#?}");
            }
        }
    }
}

#[test]
fn fractional_sweep() {
    let mut rng = seeded_rng(4);
    let grid = GridSpec::unit(1, 6).unwrap();
    for _ in 0..40 {
        let f = random_function(&grid, &mut rng);
        let w = random_weight(&grid, &mut rng);
        let dec = cz_decompose(&f, None, 0.25).unwrap();
        dec.verify().unwrap();
        let family = build_sparse(&dec).unwrap();
        let sigma = dual(&w, 2.0, DualFlavor::Apq);
        let trace = sparse_sum(&dec, &family, &w, &sigma, 2.0, Some(4.0)).unwrap();
        assert!(trace.all_hold(), "{trace:#?}");
    }
}

#[test]
fn constant_weight_trace_collapses() {
    let grid = GridSpec::unit(1, 3).unwrap();
    let one = StepFunction::constant(grid.clone(), 1.0).unwrap();
    let dec = cz_decompose(&one, None, 0.0).unwrap();
    let family = build_sparse(&dec).unwrap();
    let trace = sparse_sum(&dec, &family, &one, &one, 2.0, None).unwrap();
    assert!(trace.all_hold());
    assert_eq!(trace.star, 1.0);
    assert_eq!(trace.terms[0].value, 1.0);
    assert_eq!(trace.terms.last().unwrap().value, 1.0);
}

proptest! {
    #[test]
    fn level_sets_nest_and_cover(values in prop::collection::vec(prop_oneof![Just(0.0), 0.0..100.0f64], 32), alpha in prop_oneof![Just(0.0), 0.0..0.9f64]) {
        let f = StepFunction::new(GridSpec::unit(1, 5).unwrap(), values).unwrap();
        let dec = cz_decompose(&f, None, alpha).unwrap();
        prop_assert!(dec.verify().is_ok());
        let family = build_sparse(&dec).unwrap();
        prop_assert!(family.verify().is_ok());
        let cm = f.grid().cell_measure();
        for level in dec.levels() {
            let cube_measure: f64 = level.cubes.iter().map(|q| f.grid().measure(q.level())).sum();
            prop_assert_eq!(cube_measure, level.omega_cells as f64 * cm);
        }
        for pair in dec.levels().windows(2) {
            prop_assert!(pair[1].omega_cells <= pair[0].omega_cells);
        }
    }
}
