mod common;

use proptest::prelude::*;
use satnls_core::{
    box_potential_eigen, check_corollary2, count_nodes, eigenvalues_l, find_bifurcation_points, log_spaced,
    positivity_constraint, potential_ws, Params, RadialGrid, DEFAULT_TAIL_THRESHOLD,
};

proptest! {
    #[test]
    fn positivity_verdict_is_swap_invariant(p in common::params()) {
        let a = positivity_constraint(&p);
        let b = positivity_constraint(&p.swapped());
        prop_assert_eq!(a.kind, b.kind);
        match (a.bound, b.bound) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-15 * x.abs()),
            (None, None) => {}
            _ => prop_assert!(false, "bound present on one side only"),
        }
    }
}

#[test]
fn deeper_box_has_larger_eigenvalue() {
    let grid = RadialGrid::new(40.0, 1601).unwrap();
    for n in 1..=3 {
        let shallow = box_potential_eigen(1.0, 1.0, 0.05, 0, n, &grid).unwrap();
        let deep = box_potential_eigen(2.0, 1.0, 0.05, 0, n, &grid).unwrap();
        assert!(deep >= shallow, "n {n}");
    }
}

#[test]
fn eigenfunction_node_law() {
    for n in 1..=3 {
        let p = Params::new(1.0, 0.5, 1.0, 0.9, 0.4, n).unwrap();
        let grid = p.default_grid(2001).unwrap();
        let us = satnls_core::discrete_ground_state(&satnls_core::ScalarProblem::for_u(&p), &grid, None).unwrap();
        let spec = eigenvalues_l(&potential_ws(&us, &p), p.lambda2, n, 4).unwrap();
        for (k, f) in spec.eigenfunctions.iter().enumerate() {
            assert_eq!(count_nodes(f, DEFAULT_TAIL_THRESHOLD).nodes, k, "n {n}");
            assert_eq!(count_nodes(&f.scaled(-1.0), DEFAULT_TAIL_THRESHOLD).nodes, k);
        }
    }
}

#[test]
fn crossings_are_ordered_and_accumulate() {
    let p = common::quarter(0.5);
    let grid = RadialGrid::new(30.0, 2001).unwrap();
    let s = log_spaced(0.5, 0.99, 40);
    let search = find_bifurcation_points(&p, 1..=4, &s, 1e-10, &grid).unwrap();
    let first: Vec<f64> = (1..=4).map(|k| search.first(k).unwrap().s_k).collect();
    for w in first.windows(2) {
        assert!(w[0] < w[1]);
    }
    assert!(first.iter().all(|&x| x > 0.0 && x < p.s_star_u()));
    assert!(check_corollary2(&p, 1).unwrap());
}
