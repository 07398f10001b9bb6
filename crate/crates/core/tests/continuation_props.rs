mod common;

use proptest::prelude::*;
use satnls_core::{
    continue_branch, discrete_ground_state, find_bifurcation_points, jacobian, log_spaced, residual, residual_sup_norm,
    ContinuationConfig, Params, RadialGrid, RadialProfile, ScalarProblem, StatePair,
};

fn shifted(x: &StatePair, d: &StatePair, t: f64) -> StatePair {
    let g = x.grid();
    let add = |a: &RadialProfile, b: &RadialProfile| {
        RadialProfile::new(g, a.values.iter().zip(&b.values).map(|(p, q)| p + t * q).collect()).unwrap()
    };
    StatePair::new(add(&x.u, &d.u), add(&x.v, &d.v)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn jacobian_matches_central_differences(
        p in common::params(),
        a in common::shape(0.2..3.0),
        b in common::shape(0.2..3.0),
        da in common::shape(0.5..1.0),
        db in common::shape(0.5..1.0),
    ) {
        let grid = RadialGrid::new(10.0, 201).unwrap();
        let x = common::state(grid, a, b);
        let d = common::state(grid, da, db);
        let (ju, jv) = jacobian(&x, &p).unwrap().apply(&d.u.values, &d.v.values);
        let delta = 1e-5;
        let (pu, pv) = residual(&shifted(&x, &d, delta), &p).unwrap();
        let (mu, mv) = residual(&shifted(&x, &d, -delta), &p).unwrap();
        let fd = |a: &RadialProfile, b: &RadialProfile| -> Vec<f64> {
            a.values.iter().zip(&b.values).map(|(x, y)| (x - y) / (2.0 * delta)).collect()
        };
        let (fu, fv) = (fd(&pu, &mu), fd(&pv, &mv));
        let scale = common::sup(&fu).max(common::sup(&fv));
        let err = ju.iter().zip(&fu).chain(jv.iter().zip(&fv)).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        prop_assert!(err / scale <= 1e-6, "relative error {}", err / scale);
    }
}

#[test]
fn symmetric_theta_family_solves_the_system() {
    let p = Params::new(1.0, 1.0, 1.0, 1.0, 0.6, 1).unwrap();
    let grid = RadialGrid::new(30.0, 3001).unwrap();
    let us = discrete_ground_state(&ScalarProblem::for_u(&p), &grid, None).unwrap();
    for i in 0..=16 {
        let theta = std::f64::consts::PI * i as f64 / 16.0;
        let st = StatePair::new(us.scaled(theta.cos()), us.scaled(theta.sin())).unwrap();
        assert!(residual_sup_norm(&st, &p).unwrap() < 1e-9, "theta {theta}");
    }
}

#[test]
fn mirror_branch_and_residual_invariant() {
    let p = Params::new(1.0, 0.25, 1.0, 1.0, 0.5, 1).unwrap();
    let grid = RadialGrid::new(30.0, 1201).unwrap();
    let search = find_bifurcation_points(&p, 2..=2, &log_spaced(0.8, 0.97, 16), 1e-10, &grid).unwrap();
    let origin = search.first(2).unwrap();
    let cfg = ContinuationConfig {
        max_steps: 15,
        ..Default::default()
    };
    let up = continue_branch(origin, &p, &cfg, 1).unwrap();
    let down = continue_branch(origin, &p, &cfg, -1).unwrap();
    assert_eq!(up.points.len(), down.points.len());
    assert!(up.points.len() > 5);
    for (a, b) in up.points.iter().zip(&down.points) {
        assert_eq!(a.s, b.s);
        assert_eq!(a.state.u, b.state.u);
        assert_eq!(a.state.v, b.state.v.scaled(-1.0));
        assert!(a.residual <= cfg.newton_tol);
        assert!(residual_sup_norm(&a.state, &p.with_s(a.s)).unwrap() <= cfg.newton_tol);
    }
    for pt in up.points.iter().take(5) {
        assert_eq!(pt.nodal_type, (0, 2));
    }
}
