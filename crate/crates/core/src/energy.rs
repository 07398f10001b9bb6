//! The energy `I_s(u, v) = ½(‖u‖²_{λ₁} + ‖v‖²_{λ₂}) - (1/2s²)∫g(sZ)`, the
//! Nehari functional, the fibering map `r ↦ I_s(√r·u, √r·v)` and the
//! comparison of branch energies with the semitrivial level `c_s*`.
//!
//! All integrals use the shell quadrature of [`RadialStencil`], for which
//! the residual is the exact gradient of the discrete energy.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bifurcation::{count_nodes, DEFAULT_TAIL_THRESHOLD};
use crate::continuation::Branch;
use crate::error::{Error, Result};
use crate::ground_state::{discrete_ground_state, ScalarProblem};
use crate::model::{g_scaled, same_grid, Params, RadialGrid, RadialProfile, RadialStencil, StatePair};

/// Default relative tolerance of [`verify_semitrivial_groundstate`].
pub const DEFAULT_ENERGY_RTOL: f64 = 1e-4;

pub(crate) fn energy_on(st: &RadialStencil, u: &[f64], v: &[f64], s: f64, p: &Params) -> f64 {
    let quad = 0.5 * (st.norm_sq(u, p.lambda1) + st.norm_sq(v, p.lambda2));
    let pot = st.integrate(|i| g_scaled(p.alpha * u[i] * u[i] + p.beta * v[i] * v[i], s));
    quad - 0.5 * pot
}

fn stencil_for(state: &StatePair, s: f64, params: &Params) -> Result<RadialStencil> {
    same_grid(&state.u.grid, &state.v.grid)?;
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::Domain(format!("s must be nonnegative, got {s}")));
    }
    RadialStencil::new(state.grid(), params.n)
}

/// `I_s(u, v)`; at `s = 0` the nonlinear term is `¼∫Z²`.
pub fn energy_is(state: &StatePair, s: f64, params: &Params) -> Result<f64> {
    let st = stencil_for(state, s, params)?;
    Ok(energy_on(&st, &state.u.values, &state.v.values, s, params))
}

/// `H(u, v) = ‖u‖²_{λ₁} + ‖v‖²_{λ₂} - ∫Z²/(1 + sZ)`.
pub fn nehari_h(state: &StatePair, s: f64, params: &Params) -> Result<f64> {
    let st = stencil_for(state, s, params)?;
    let (u, v) = (&state.u.values, &state.v.values);
    let quad = st.norm_sq(u, params.lambda1) + st.norm_sq(v, params.lambda2);
    let z = |i: usize| params.alpha * u[i] * u[i] + params.beta * v[i] * v[i];
    Ok(quad - st.integrate(|i| z(i) * z(i) / (1.0 + s * z(i))))
}

/// Maximum of the fibering map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Fibering {
    Bounded {
        r_star: f64,
        max_value: f64,
    },
    /// `β'(r) > 0` for all `r`: the supremum is `+∞`.
    Unbounded,
}

impl Fibering {
    pub fn r_star(&self) -> Option<f64> {
        match self {
            Fibering::Bounded { r_star, .. } => Some(*r_star),
            Fibering::Unbounded => None,
        }
    }

    /// `+∞` when unbounded.
    pub fn sup_value(&self) -> f64 {
        match self {
            Fibering::Bounded { max_value, .. } => *max_value,
            Fibering::Unbounded => f64::INFINITY,
        }
    }
}

/// Maximizes `β(r) = I_s(√r·u, √r·v)` over `r > 0`.
///
/// `2β'(r) = N - r∫Z²/(1 + srZ)` with `N = ‖u‖²_{λ₁} + ‖v‖²_{λ₂}`; the
/// second term increases to `∫Z/s`, so a maximizer exists iff `N < ∫Z/s`.
pub fn fibering_maximize(state: &StatePair, s: f64, params: &Params) -> Result<Fibering> {
    let st = stencil_for(state, s, params)?;
    let (u, v) = (&state.u.values, &state.v.values);
    let z: Vec<f64> = u
        .iter()
        .zip(v)
        .map(|(a, b)| params.alpha * a * a + params.beta * b * b)
        .collect();
    let nq = st.norm_sq(u, params.lambda1) + st.norm_sq(v, params.lambda2);
    let z2 = st.integrate(|i| z[i] * z[i]);
    if nq == 0.0 || z2 == 0.0 {
        return Err(Error::Domain("the fibering map needs a nonzero state".into()));
    }
    if s > 0.0 && nq >= st.integrate(|i| z[i]) / s {
        return Ok(Fibering::Unbounded);
    }
    // φ(r) = r∫Z²/(1+srZ) - N is increasing and concave; Newton from the
    // s = 0 root approaches from the left without overshoot.
    let phi = |r: f64| r * st.integrate(|i| z[i] * z[i] / (1.0 + s * r * z[i])) - nq;
    let dphi = |r: f64| {
        st.integrate(|i| {
            let d = 1.0 + s * r * z[i];
            z[i] * z[i] / (d * d)
        })
    };
    let mut r = nq / z2;
    let (mut lo, mut hi) = (r, f64::INFINITY);
    for _ in 0..200 {
        let f = phi(r);
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = lo.max(r);
        } else {
            hi = hi.min(r);
        }
        let mut next = r - f / dphi(r);
        if !(next > lo && next < hi) {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * lo };
        }
        if (next - r).abs() <= 1e-16 * r {
            r = next;
            break;
        }
        r = next;
    }
    let max_value = 0.5 * r * nq - 0.5 * st.integrate(|i| g_scaled(r * z[i], s));
    Ok(Fibering::Bounded { r_star: r, max_value })
}

/// Energies of the semitrivial solutions at `params.s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemitrivialLevels {
    /// `I_s(u_s, 0)` when `s < α/λ₁`.
    pub level_u: Option<f64>,
    /// `I_s(0, v_s)` when `s < β/λ₂`.
    pub level_v: Option<f64>,
    pub c_s_star: f64,
}

/// Computes `u_s` and/or `v_s` on `grid` and their energies.
pub fn semitrivial_levels(params: &Params, grid: &RadialGrid) -> Result<SemitrivialLevels> {
    params.validate()?;
    let s = params.s;
    let st = RadialStencil::new(*grid, params.n)?;
    let zero = vec![0.0; grid.num_points];
    let level = |prob: ScalarProblem, as_u: bool| -> Result<Option<f64>> {
        if prob.validate().is_err() {
            return Ok(None);
        }
        let w = discrete_ground_state(&prob, grid, None)?.values;
        Ok(Some(if as_u {
            energy_on(&st, &w, &zero, s, params)
        } else {
            energy_on(&st, &zero, &w, s, params)
        }))
    };
    let level_u = level(ScalarProblem::for_u(params), true)?;
    let level_v = level(ScalarProblem::for_v(params), false)?;
    let c_s_star = match (level_u, level_v) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => {
            return Err(Error::ExistenceWindow {
                s,
                bound: params.s_star_u().max(params.s_star_v()),
            })
        }
    };
    Ok(SemitrivialLevels {
        level_u,
        level_v,
        c_s_star,
    })
}

/// One fully nontrivial branch point compared with `c_s*` at its own `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub branch: usize,
    pub step: usize,
    pub s: f64,
    pub energy: f64,
    pub c_s_star: f64,
    /// `energy - c_s_star`
    pub margin: f64,
    pub tol: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// `c_s*` at `params.s`.
    pub c_s_star: f64,
    pub candidates: Vec<Candidate>,
    pub symmetric_case: bool,
    /// Spread of `I_s(cos θ·u_s, sin θ·u_s)` over θ (symmetric case only).
    pub theta_spread: Option<f64>,
    pub violations: usize,
}

/// Checks that no fully nontrivial branch point lies below the semitrivial
/// level: `I_s(u, v) ≥ c_s* - tol` at each point's own `s`.
///
/// `rtol` defaults to [`DEFAULT_ENERGY_RTOL`], and `tol = rtol·|c_s*|`. For
/// symmetric parameters the θ-family `(cos θ·u_s, sin θ·u_s)` is checked instead.
pub fn verify_semitrivial_groundstate(
    branches: &[Branch],
    params: &Params,
    rtol: Option<f64>,
    grid: &RadialGrid,
) -> Result<EnergyReport> {
    params.validate()?;
    let rtol = rtol.unwrap_or(DEFAULT_ENERGY_RTOL);
    let base = semitrivial_levels(params, grid)?;
    if params.is_symmetric() {
        let us = discrete_ground_state(&ScalarProblem::for_u(params), grid, None)?;
        let energies = theta_family_energies(&us, params, 17)?;
        let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return Ok(EnergyReport {
            c_s_star: base.c_s_star,
            candidates: Vec::new(),
            symmetric_case: true,
            theta_spread: Some(hi - lo),
            violations: 0,
        });
    }
    let mut levels: HashMap<u64, f64> = HashMap::new();
    levels.insert(params.s.to_bits(), base.c_s_star);
    let mut candidates = Vec::new();
    for (b, branch) in branches.iter().enumerate() {
        for pt in &branch.points {
            let nontrivial = !count_nodes(&pt.state.u, DEFAULT_TAIL_THRESHOLD).effectively_zero
                && !count_nodes(&pt.state.v, DEFAULT_TAIL_THRESHOLD).effectively_zero;
            if !nontrivial {
                continue;
            }
            let c = match levels.get(&pt.s.to_bits()) {
                Some(c) => *c,
                None => {
                    let c = semitrivial_levels(&params.with_s(pt.s), &pt.state.grid())?.c_s_star;
                    levels.insert(pt.s.to_bits(), c);
                    c
                }
            };
            let energy = energy_is(&pt.state, pt.s, params)?;
            let tol = rtol * c.abs();
            let margin = energy - c;
            candidates.push(Candidate {
                branch: b,
                step: pt.step,
                s: pt.s,
                energy,
                c_s_star: c,
                margin,
                tol,
                violation: margin < -tol,
            });
        }
    }
    let violations = candidates.iter().filter(|c| c.violation).count();
    Ok(EnergyReport {
        c_s_star: base.c_s_star,
        candidates,
        symmetric_case: false,
        theta_spread: None,
        violations,
    })
}

/// `I_s(cos θ·u, sin θ·u)` for `count` equally spaced θ in `[0, π/2]`.
pub fn theta_family_energies(us: &RadialProfile, params: &Params, count: usize) -> Result<Vec<f64>> {
    (0..count)
        .map(|j| {
            let theta = std::f64::consts::FRAC_PI_2 * j as f64 / (count.max(2) - 1) as f64;
            let state = StatePair::new(us.scaled(theta.cos()), us.scaled(theta.sin()))?;
            energy_is(&state, params.s, params)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground_state::ground_state_1d;

    #[test]
    fn zero_state_energy() {
        let p = Params::new(1.0, 1.0, 1.0, 1.0, 0.5, 1).unwrap();
        let grid = RadialGrid::new(10.0, 101).unwrap();
        assert_eq!(energy_is(&StatePair::zeros(grid), 0.5, &p).unwrap(), 0.0);
        assert_eq!(nehari_h(&StatePair::zeros(grid), 0.5, &p).unwrap(), 0.0);
        assert!(fibering_maximize(&StatePair::zeros(grid), 0.5, &p)
            .unwrap_err()
            .is_domain());
    }

    #[test]
    fn semitrivial_energy_matches_quadrature() {
        // full-line value from an independent high-precision quadrature
        let p = Params::new(1.0, 1.0, 1.0, 1.0, 0.5, 1).unwrap();
        let grid = RadialGrid::new(30.0, 12001).unwrap();
        let prob = ScalarProblem::for_u(&p);
        let us = ground_state_1d(&prob, &grid).unwrap();
        let e = energy_is(&StatePair::semitrivial_u(us), 0.5, &p).unwrap();
        assert!((e - 2.74124207003876).abs() < 1e-4, "{e}");
    }

    #[test]
    fn quartic_limit() {
        let p = Params::new(1.0, 1.0, 1.0, 0.6, 0.0, 2).unwrap();
        let grid = RadialGrid::new(10.0, 401).unwrap();
        let st = StatePair::new(
            RadialProfile::from_fn(grid, |r| 2.0 * (-r * r).exp()),
            RadialProfile::from_fn(grid, |r| (-r * r / 2.0).exp()),
        )
        .unwrap();
        let e0 = energy_is(&st, 0.0, &p).unwrap();
        let d3 = (energy_is(&st, 1e-3, &p).unwrap() - e0).abs();
        let d4 = (energy_is(&st, 1e-4, &p).unwrap() - e0).abs();
        assert!(d4 < d3 && d4 < 1e-3 * e0.abs());
    }

    #[test]
    fn fibering_scaling_and_nehari() {
        let p = Params::new(1.0, 0.5, 1.0, 0.7, 0.3, 3).unwrap();
        let grid = RadialGrid::new(12.0, 401).unwrap();
        let st = StatePair::new(
            RadialProfile::from_fn(grid, |r| 1.5 * (-r * r / 2.0).exp()),
            RadialProfile::from_fn(grid, |r| 0.5 * (-r * r / 3.0).exp()),
        )
        .unwrap();
        let f = fibering_maximize(&st, 0.3, &p).unwrap();
        let r = f.r_star().unwrap();
        let on = st.scaled(r.sqrt());
        let h = nehari_h(&on, 0.3, &p).unwrap();
        let nq = solution_norm_sum(&on, &p);
        assert!(h.abs() < 1e-10 * nq);
        let again = fibering_maximize(&on, 0.3, &p).unwrap().r_star().unwrap();
        assert!((again - 1.0).abs() < 1e-12);
        let c: f64 = 2.5;
        let scaled = fibering_maximize(&st.scaled(c.sqrt()), 0.3, &p)
            .unwrap()
            .r_star()
            .unwrap();
        assert!((scaled - r / c).abs() < 1e-12 * r);
        assert!(f.sup_value() >= energy_is(&st, 0.3, &p).unwrap());
    }

    fn solution_norm_sum(st: &StatePair, p: &Params) -> f64 {
        let stn = RadialStencil::new(st.grid(), p.n).unwrap();
        stn.norm_sq(&st.u.values, p.lambda1) + stn.norm_sq(&st.v.values, p.lambda2)
    }

    #[test]
    fn fibering_unbounded_when_gradient_dominates() {
        // oscillating u: ‖u‖²_λ ≥ (α/s)‖u‖²₂
        let p = Params::new(1.0, 1.0, 1.0, 1.0, 0.9, 1).unwrap();
        let grid = RadialGrid::new(10.0, 2001).unwrap();
        let u = RadialProfile::from_fn(grid, |r| (4.0 * r).cos() * (-r * r / 4.0).exp());
        let f = fibering_maximize(&StatePair::semitrivial_u(u), 0.9, &p).unwrap();
        assert_eq!(f, Fibering::Unbounded);
        assert_eq!(f.sup_value(), f64::INFINITY);
    }

    #[test]
    fn semitrivial_levels_cases() {
        let grid = RadialGrid::new(30.0, 3001).unwrap();
        let sym = Params::new(1.0, 1.0, 1.0, 1.0, 0.5, 1).unwrap();
        let l = semitrivial_levels(&sym, &grid).unwrap();
        assert_eq!(l.level_u, l.level_v);
        let one_sided = Params::new(1.0, 1.0, 1.0, 0.3, 0.5, 1).unwrap();
        let l = semitrivial_levels(&one_sided, &grid).unwrap();
        assert!(l.level_v.is_none());
        assert_eq!(Some(l.c_s_star), l.level_u);
        let quarter = Params::new(1.0, 0.25, 1.0, 1.0, 0.5, 1).unwrap();
        let l = semitrivial_levels(&quarter, &RadialGrid::new(60.0, 12001).unwrap()).unwrap();
        assert!((l.c_s_star - 0.19205507115767).abs() < 1e-4, "{}", l.c_s_star);
        let none = Params::new(1.0, 1.0, 1.0, 1.0, 1.5, 1).unwrap();
        assert!(semitrivial_levels(&none, &grid).is_err());
    }

    #[test]
    fn symmetric_theta_family() {
        let p = Params::new(1.0, 1.0, 1.0, 1.0, 0.4, 1).unwrap();
        let grid = RadialGrid::new(30.0, 1501).unwrap();
        let rep = verify_semitrivial_groundstate(&[], &p, None, &grid).unwrap();
        assert!(rep.symmetric_case);
        assert!(rep.theta_spread.unwrap() < 1e-8);
        assert!(rep.c_s_star > 0.0);
        let asym = Params::new(1.0, 0.25, 1.0, 1.0, 0.4, 1).unwrap();
        let rep = verify_semitrivial_groundstate(&[], &asym, None, &RadialGrid::new(60.0, 1501).unwrap()).unwrap();
        assert!(rep.candidates.is_empty() && rep.violations == 0 && !rep.symmetric_case);
    }
}
