//! Bifurcation points on the semitrivial branch `T₂ = {(u_s, 0, s)}`, the
//! sufficient conditions for their existence, the sign constraint on
//! positive solutions, and nodal counting.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Params, RadialGrid, RadialProfile};
use crate::spectrum::{eigenvalue_list, eigenvalues_l, mu_bar_closed_form, potential_ws, semitrivial_profile};

/// Default relative threshold below which values are ignored by [`count_nodes`].
pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-6;

/// Number of points of [`default_s_grid`].
pub const DEFAULT_S_COUNT: usize = 200;

/// A root `s_k` of `μ_k(s) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPoint {
    pub k: usize,
    pub s_k: f64,
    /// Eigenfunction of `L(s_k)` for the eigenvalue `μ_k(s_k) ≈ 1`.
    pub kernel_fn: RadialProfile,
    /// Grid interval on which `μ_k - 1` changes sign.
    pub bracket: (f64, f64),
    pub mu_at_root: f64,
}

/// Result of a crossing search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingSearch {
    pub points: Vec<BifurcationPoint>,
    /// Indices `k` for which the grid showed no sign change.
    pub no_crossing: Vec<usize>,
    /// Grid values of `s` where `u_s` could not be computed on the radial grid.
    pub unresolved: Vec<f64>,
}

impl CrossingSearch {
    /// First crossing for index `k`.
    pub fn first(&self, k: usize) -> Option<&BifurcationPoint> {
        self.points.iter().find(|p| p.k == k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PositivityKind {
    /// `α = β`, `λ₁ = λ₂`: positive solutions `(cos θ·u_s, sin θ·u_s)` for every s.
    SymmetricFamily,
    /// Positive solutions need `s < bound`.
    Bound,
    /// No positive solutions for any s.
    NoPositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityVerdict {
    pub kind: PositivityKind,
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeCount {
    pub nodes: usize,
    /// The whole profile lies below the threshold.
    pub effectively_zero: bool,
}

/// 200 log-spaced values in `(0.01, 0.99)·α/λ₁`.
pub fn default_s_grid(params: &Params) -> Vec<f64> {
    log_spaced(0.01 * params.s_star_u(), 0.99 * params.s_star_u(), DEFAULT_S_COUNT)
}

/// `count` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i + 1 == count {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (count - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Scans `μ_k(s) - 1` over `s_grid` for every `k` in `k_range` and refines
/// each sign change by bisection until `|μ_k - 1| < tol`.
///
/// Every crossing found on the grid is reported, in increasing `s` for each `k`.
pub fn find_bifurcation_points(
    params: &Params,
    k_range: RangeInclusive<usize>,
    s_grid: &[f64],
    tol: f64,
    grid: &RadialGrid,
) -> Result<CrossingSearch> {
    params.validate()?;
    let ratio_l = params.lambda2 / params.lambda1;
    let ratio_c = params.beta / params.alpha;
    if ratio_l >= ratio_c {
        return Err(Error::Domain(format!(
            "bifurcation from T2 requires lambda2/lambda1 < beta/alpha, got {ratio_l} >= {ratio_c}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain("tol must be positive".into()));
    }
    if let Some(s) = s_grid.iter().find(|&&s| !(s > 0.0 && s < params.s_star_u())) {
        return Err(Error::ExistenceWindow {
            s: *s,
            bound: params.s_star_u(),
        });
    }
    if s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("s_grid must be strictly increasing".into()));
    }
    if k_range.is_empty() {
        return Ok(CrossingSearch {
            points: Vec::new(),
            no_crossing: Vec::new(),
            unresolved: Vec::new(),
        });
    }
    let k_hi = *k_range.end();

    let computed: Vec<Result<(RadialProfile, Vec<f64>)>> = s_grid
        .par_iter()
        .map(|&s| {
            let p = params.with_s(s);
            let us = semitrivial_profile(&p, grid, None)?;
            let mu = eigenvalue_list(&potential_ws(&us, &p), p.lambda2, p.n, k_hi + 1)?;
            Ok((us, mu))
        })
        .collect();
    // u_s may be unresolvable on this grid near α/λ₁ (the profile outgrows r_max)
    let mut samples = Vec::new();
    let mut unresolved = Vec::new();
    for (&s, c) in s_grid.iter().zip(computed) {
        match c {
            Ok((us, mu)) => samples.push((s, us, mu)),
            Err(e) if e.is_domain() => return Err(e),
            Err(_) => unresolved.push(s),
        }
    }

    let mut brackets = Vec::new();
    let mut no_crossing = Vec::new();
    for k in k_range {
        let f = |j: usize| samples[j].2.get(k).copied().unwrap_or(0.0) - 1.0;
        let before = brackets.len();
        for j in 0..samples.len().saturating_sub(1) {
            let (a, b) = (f(j), f(j + 1));
            if a == 0.0 || (a > 0.0) != (b > 0.0) && b != 0.0 {
                brackets.push((k, j));
            }
        }
        if brackets.len() == before {
            no_crossing.push(k);
        }
    }

    let points = brackets
        .par_iter()
        .map(|&(k, j)| refine_crossing(params, k, (samples[j].0, samples[j + 1].0), &samples[j].1, tol, grid))
        .collect::<Result<Vec<_>>>()?;
    Ok(CrossingSearch {
        points,
        no_crossing,
        unresolved,
    })
}

fn mu_k_at(params: &Params, k: usize, s: f64, grid: &RadialGrid, warm: &RadialProfile) -> Result<(f64, RadialProfile)> {
    let p = params.with_s(s);
    let us = match semitrivial_profile(&p, grid, Some(warm)) {
        Ok(us) => us,
        Err(_) => semitrivial_profile(&p, grid, None)?,
    };
    let mu = eigenvalue_list(&potential_ws(&us, &p), p.lambda2, p.n, k + 1)?;
    Ok((mu.get(k).copied().unwrap_or(0.0), us))
}

fn refine_crossing(
    params: &Params,
    k: usize,
    bracket: (f64, f64),
    warm: &RadialProfile,
    tol: f64,
    grid: &RadialGrid,
) -> Result<BifurcationPoint> {
    let (mut lo, mut hi) = bracket;
    let (mu_lo, mut us) = mu_k_at(params, k, lo, grid, warm)?;
    let mut f_lo = mu_lo - 1.0;
    let (mut s, mut mu) = (lo, mu_lo);
    if f_lo.abs() >= tol {
        let (mu_hi, us_hi) = mu_k_at(params, k, hi, grid, &us)?;
        s = hi;
        mu = mu_hi;
        us = us_hi;
        let f_hi = mu_hi - 1.0;
        if f_hi.abs() >= tol {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let (m, u_mid) = mu_k_at(params, k, mid, grid, &us)?;
                s = mid;
                mu = m;
                us = u_mid;
                let fm = m - 1.0;
                if fm.abs() < tol {
                    break;
                }
                if (fm > 0.0) == (f_lo > 0.0) {
                    lo = mid;
                    f_lo = fm;
                } else {
                    hi = mid;
                }
            }
        }
    }
    let p = params.with_s(s);
    let spectrum = eigenvalues_l(&potential_ws(&us, &p), p.lambda2, p.n, k + 1)?;
    let kernel_fn = spectrum
        .eigenfunctions
        .get(k)
        .cloned()
        .ok_or_else(|| Error::NoRoot(format!("eigenfunction {k} unavailable at s = {s}")))?;
    Ok(BifurcationPoint {
        k,
        s_k: s,
        kernel_fn,
        bracket,
        mu_at_root: mu,
    })
}

/// `λ₂/λ₁ < β/α < (λ₂/λ₁)^{(4-n)/4}` for n ∈ {2, 3}.
pub fn check_corollary1(params: &Params) -> Result<bool> {
    if !(params.n == 2 || params.n == 3) {
        return Err(Error::Domain(format!(
            "this window condition needs n = 2 or 3, got {}",
            params.n
        )));
    }
    let rl = params.lambda2 / params.lambda1;
    let rc = params.beta / params.alpha;
    Ok(rl < rc && rc < rl.powf((4.0 - params.n as f64) / 4.0))
}

/// `λ₂/λ₁ < β/α < ½(ω + 2k₀)(ω + 2k₀ + 1)` with `ω = √(λ₂/λ₁)`, n = 1.
pub fn check_corollary2(params: &Params, k0: usize) -> Result<bool> {
    if params.n != 1 {
        return Err(Error::Domain(format!(
            "this window condition needs n = 1, got {}",
            params.n
        )));
    }
    let rl = params.lambda2 / params.lambda1;
    let rc = params.beta / params.alpha;
    let omega = rl.sqrt();
    let k = 2.0 * k0 as f64;
    Ok(rl < rc && rc < 0.5 * (omega + k) * (omega + k + 1.0))
}

/// Equivalent form of [`check_corollary2`]: `λ₂/λ₁ < β/α` and `μ̄_{k₀} < 1`.
pub fn corollary2_via_mu_bar(params: &Params, k0: usize) -> bool {
    params.lambda2 / params.lambda1 < params.beta / params.alpha && mu_bar_closed_form(params, k0) < 1.0
}

/// Where positive solutions can exist.
pub fn positivity_constraint(params: &Params) -> PositivityVerdict {
    if params.is_symmetric() {
        return PositivityVerdict {
            kind: PositivityKind::SymmetricFamily,
            bound: None,
        };
    }
    let den = params.lambda1 - params.lambda2;
    if den != 0.0 {
        let q = (params.alpha - params.beta) / den;
        if q > 0.0 && q < params.s_star_u().min(params.s_star_v()) {
            return PositivityVerdict {
                kind: PositivityKind::Bound,
                bound: Some(q),
            };
        }
    }
    PositivityVerdict {
        kind: PositivityKind::NoPositive,
        bound: None,
    }
}

/// Strict sign changes among nodes with `|value| > tail_threshold·max|value|`.
///
/// A profile whose sup-norm does not exceed `tail_threshold` counts as zero.
pub fn count_nodes(profile: &RadialProfile, tail_threshold: f64) -> NodeCount {
    let sup = profile.sup_norm();
    if sup <= tail_threshold || sup == 0.0 {
        return NodeCount {
            nodes: 0,
            effectively_zero: true,
        };
    }
    let cut = tail_threshold * sup;
    let mut nodes = 0;
    let mut last = 0.0f64;
    for &v in &profile.values {
        if v.abs() <= cut {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            nodes += 1;
        }
        last = v;
    }
    NodeCount {
        nodes,
        effectively_zero: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(l1: f64, l2: f64, a: f64, b: f64, n: usize) -> Params {
        Params::new(l1, l2, a, b, 0.1, n).unwrap()
    }

    #[test]
    fn corollary1_examples() {
        assert!(check_corollary1(&p(1.0, 0.5, 1.0, 0.7, 3)).unwrap());
        assert!(!check_corollary1(&p(1.0, 0.5, 1.0, 0.9, 3)).unwrap());
        assert!(check_corollary1(&p(1.0, 0.5, 1.0, 0.7, 2)).unwrap());
        assert!(check_corollary1(&p(1.0, 0.5, 1.0, 0.7, 1)).unwrap_err().is_domain());
    }

    #[test]
    fn corollary2_examples() {
        assert!(check_corollary2(&p(1.0, 0.25, 1.0, 0.3, 1), 0).unwrap());
        assert!(!check_corollary2(&p(1.0, 0.25, 1.0, 1.0, 1), 0).unwrap());
        assert!(check_corollary2(&p(1.0, 0.25, 1.0, 1.0, 1), 1).unwrap());
        assert!(check_corollary2(&p(1.0, 0.25, 1.0, 1.0, 3), 1).is_err());
        for beta in [0.1, 0.3, 0.5, 1.0, 3.0, 5.0] {
            let q = p(1.0, 0.25, 1.0, beta, 1);
            for k in 0..4 {
                assert_eq!(check_corollary2(&q, k).unwrap(), corollary2_via_mu_bar(&q, k));
            }
        }
    }

    #[test]
    fn positivity_examples() {
        let v = positivity_constraint(&p(1.0, 1.0, 1.0, 1.0, 1));
        assert_eq!(v.kind, PositivityKind::SymmetricFamily);
        let v = positivity_constraint(&p(1.0, 4.0, 1.0, 2.0, 1));
        assert_eq!(v.kind, PositivityKind::Bound);
        assert!((v.bound.unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let v = positivity_constraint(&p(1.0, 2.0, 2.0, 1.0, 1));
        assert_eq!(v.kind, PositivityKind::NoPositive);
        let q = p(1.0, 0.5, 1.0, 0.7, 3);
        assert_eq!(positivity_constraint(&q), positivity_constraint(&q.swapped()));
    }

    #[test]
    fn node_counting() {
        let grid = RadialGrid::new(10.0, 501).unwrap();
        let sech = RadialProfile::from_fn(grid, |x| 2f64.sqrt() / x.cosh());
        assert_eq!(count_nodes(&sech, DEFAULT_TAIL_THRESHOLD).nodes, 0);
        let cos = RadialProfile::from_fn(grid, |x| (x * 0.9).cos() * (-0.1 * x).exp());
        let c = count_nodes(&cos, DEFAULT_TAIL_THRESHOLD);
        assert_eq!(c.nodes, 3);
        assert_eq!(count_nodes(&cos.scaled(-1.0), DEFAULT_TAIL_THRESHOLD), c);
        let z = count_nodes(&RadialProfile::zeros(grid), DEFAULT_TAIL_THRESHOLD);
        assert!(z.effectively_zero && z.nodes == 0);
        // tail noise below the threshold is ignored
        let mut noisy = sech.clone();
        let last = noisy.values.len() - 1;
        noisy.values[last - 1] = -1e-9;
        assert_eq!(count_nodes(&noisy, DEFAULT_TAIL_THRESHOLD).nodes, 0);
    }

    #[test]
    fn log_grid() {
        let g = log_spaced(0.01, 0.99, 200);
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[199], 0.99);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn refuses_without_hypothesis() {
        let q = Params::new(1.0, 1.0, 1.0, 0.5, 0.1, 1).unwrap();
        let grid = q.default_grid(201).unwrap();
        let err = find_bifurcation_points(&q, 0..=2, &[0.1, 0.2], 1e-8, &grid).unwrap_err();
        assert!(err.is_domain());
    }

    #[test]
    fn no_crossing_when_mu_stays_above_one() {
        // k = 0 for (λ₁, λ₂, α, β) = (1, 1/4, 1, 1): μ̄₀ = 8/3 and the limit is 4
        let q = Params::new(1.0, 0.25, 1.0, 1.0, 0.1, 1).unwrap();
        let grid = q.default_grid(801).unwrap();
        let s_grid = log_spaced(0.01, 0.99, 40);
        let res = find_bifurcation_points(&q, 0..=0, &s_grid, 1e-8, &grid).unwrap();
        assert!(res.points.is_empty());
        assert_eq!(res.no_crossing, vec![0]);
    }

    #[test]
    fn first_crossing_is_refined() {
        let q = Params::new(1.0, 0.25, 1.0, 1.0, 0.1, 1).unwrap();
        let grid = q.default_grid(801).unwrap();
        let s_grid = log_spaced(0.01, 0.99, 40);
        let res = find_bifurcation_points(&q, 1..=2, &s_grid, 1e-9, &grid).unwrap();
        let s1 = res.first(1).unwrap();
        let s2 = res.first(2).unwrap();
        assert!((s1.mu_at_root - 1.0).abs() < 1e-9);
        assert!(0.0 < s1.s_k && s1.s_k < s2.s_k && s2.s_k < 1.0);
        assert_eq!(count_nodes(&s1.kernel_fn, DEFAULT_TAIL_THRESHOLD).nodes, 1);
        assert_eq!(count_nodes(&s2.kernel_fn, DEFAULT_TAIL_THRESHOLD).nodes, 2);
    }
}
