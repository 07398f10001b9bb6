//! Spectrum of the linearization along the semitrivial branch `(u_s, 0)`.
//!
//! The eigenvalues `μ` of `L(s)φ = (-Δ + λ₂)^{-1}(W_s φ)` solve the
//! generalized problem `μ(K + λ₂M)φ = M_W φ` on the radial grid, where `K`
//! is the finite-volume stiffness matrix, `M` the diagonal of shell measures
//! and `M_W = diag(W_i M_ii)`. Both sides are symmetric tridiagonal (the
//! right one diagonal), so the number of eigenvalues above a trial `μ` is the
//! number of negative pivots in the `LDLᵀ` factorization of `μA - M_W`
//! (Sylvester's law of inertia). Eigenvalues are bisected on that count and
//! eigenvectors follow from shifted inverse iteration.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bifurcation::count_nodes;
use crate::error::{Error, Result};
use crate::ground_state::{discrete_ground_state, ScalarProblem};
use crate::linalg::BandMatrix;
use crate::model::{check_dimension, Params, RadialGrid, RadialProfile, RadialStencil};

/// Grid size used by [`mu_bar`] in dimensions 2 and 3.
pub const DEFAULT_POINTS: usize = 2001;

/// Nonnegative potential sampled on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
}

impl Potential {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_points {
            return Err(Error::GridMismatch("potential length differs from grid".into()));
        }
        if values.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Domain("potential values must be finite and nonnegative".into()));
        }
        Ok(Potential { grid, values })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Potential {
            grid: self.grid,
            values: self.values.iter().map(|w| c * w).collect(),
        }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Decreasing eigenvalues of `L` with their eigenfunctions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Normalized to `∫_{ℝⁿ} φ² = 1`, positive at `r = 0`.
    pub eigenfunctions: Vec<RadialProfile>,
    /// Fewer than the requested number of positive eigenvalues exist.
    pub truncated: bool,
}

/// `W_s = αβu_s²/(1 + sαu_s²)` evaluated at `params.s`.
pub fn potential_ws(us: &RadialProfile, params: &Params) -> Potential {
    let (a, b, s) = (params.alpha, params.beta, params.s);
    Potential {
        grid: us.grid,
        values: us
            .values
            .iter()
            .map(|u| {
                let w = a * u * u;
                b * w / (1.0 + s * w)
            })
            .collect(),
    }
}

/// The pencil `(A, B)` with `A = K + λM` and `B = diag(W·M)` on interior nodes.
struct Pencil {
    a_diag: Vec<f64>,
    a_off: Vec<f64>,
    b_diag: Vec<f64>,
}

impl Pencil {
    fn new(w: &Potential, lambda: f64, n: usize) -> Result<(Self, RadialStencil)> {
        let st = RadialStencil::new(w.grid, n)?;
        let m = w.grid.num_points - 1;
        let a_diag = (0..m).map(|i| st.stiffness_diag(i) + lambda * st.cell(i)).collect();
        let a_off = (0..m - 1).map(|i| st.stiffness_off(i)).collect();
        let b_diag = (0..m).map(|i| w.values[i] * st.cell(i)).collect();
        Ok((Pencil { a_diag, a_off, b_diag }, st))
    }

    fn dim(&self) -> usize {
        self.a_diag.len()
    }

    /// Number of generalized eigenvalues strictly above `mu`.
    fn count_above(&self, mu: f64) -> usize {
        let mut count = 0;
        let mut d = mu * self.a_diag[0] - self.b_diag[0];
        let tiny = f64::MIN_POSITIVE.sqrt();
        for i in 0..self.dim() {
            if i > 0 {
                let e = mu * self.a_off[i - 1];
                let prev = if d == 0.0 { -tiny } else { d };
                d = mu * self.a_diag[i] - self.b_diag[i] - e * e / prev;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// `k`-th largest eigenvalue (0-based) inside `(0, upper]`.
    fn bisect_eigenvalue(&self, k: usize, upper: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, upper);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-15 * hi || mid == lo || mid == hi {
                break;
            }
            if self.count_above(mid) > k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Inverse iteration `x ← (B - σA)^{-1} A x` with `σ` just above `mu`.
    fn eigenvector(&self, mu: f64) -> Result<Vec<f64>> {
        let m = self.dim();
        let sigma = mu * (1.0 + 1e-10);
        let mut mat = BandMatrix::zeros(m, 1, 1);
        for i in 0..m {
            mat.set(i, i, self.b_diag[i] - sigma * self.a_diag[i]);
            if i + 1 < m {
                mat.set(i, i + 1, -sigma * self.a_off[i]);
                mat.set(i + 1, i, -sigma * self.a_off[i]);
            }
        }
        let lu = mat.factorize()?;
        let mut x = vec![1.0; m];
        for _ in 0..4 {
            let mut ax = vec![0.0; m];
            for i in 0..m {
                ax[i] = self.a_diag[i] * x[i];
                if i > 0 {
                    ax[i] += self.a_off[i - 1] * x[i - 1];
                }
                if i + 1 < m {
                    ax[i] += self.a_off[i] * x[i + 1];
                }
            }
            lu.solve_in_place(&mut ax);
            let norm = ax.iter().fold(0.0, |s: f64, v| s.max(v.abs()));
            x = ax.into_iter().map(|v| v / norm).collect();
        }
        Ok(x)
    }
}

/// The `k_max` largest eigenvalues of `φ ↦ (-Δ + λ₂)^{-1}(Wφ)` with eigenfunctions.
pub fn eigenvalues_l(w: &Potential, lambda2: f64, n: usize, k_max: usize) -> Result<Spectrum> {
    check_dimension(n)?;
    if k_max == 0 {
        return Err(Error::Domain("k_max must be at least 1".into()));
    }
    if !(lambda2 > 0.0) {
        return Err(Error::Domain("lambda2 must be positive".into()));
    }
    let values = eigenvalue_list(w, lambda2, n, k_max)?;
    let (pencil, st) = Pencil::new(w, lambda2, n)?;
    let truncated = values.len() < k_max;
    let mut eigenfunctions = Vec::with_capacity(values.len());
    for &mu in &values {
        let mut x = pencil.eigenvector(mu)?;
        x.push(0.0);
        let norm = st.integrate(|i| x[i] * x[i]).sqrt();
        let sign = if x[0] < 0.0 { -1.0 } else { 1.0 };
        eigenfunctions.push(RadialProfile::new(
            w.grid,
            x.into_iter().map(|v| sign * v / norm).collect(),
        )?);
    }
    Ok(Spectrum {
        eigenvalues: values,
        eigenfunctions,
        truncated,
    })
}

/// Eigenvalues only (no eigenvectors).
pub fn eigenvalue_list(w: &Potential, lambda2: f64, n: usize, k_max: usize) -> Result<Vec<f64>> {
    let (pencil, _) = Pencil::new(w, lambda2, n)?;
    // Rayleigh quotient bound: μ ≤ max W / λ₂
    let upper = w.max() / lambda2 * (1.0 + 1e-12);
    if upper == 0.0 {
        return Ok(Vec::new());
    }
    let available = pencil.count_above(upper * 1e-14);
    let k = k_max.min(available);
    let mut values: Vec<f64> = (0..k).map(|j| pencil.bisect_eigenvalue(j, upper)).collect();
    // simple spectrum: enforce strict decrease against round-off ties
    values.dedup_by(|b, a| *b >= *a);
    Ok(values)
}

/// Closed-form `μ̄_k` for n = 1 (sech² potential).
pub fn mu_bar_closed_form(params: &Params, k: usize) -> f64 {
    let omega = (params.lambda2 / params.lambda1).sqrt();
    let kf = 2.0 * k as f64;
    params.beta / params.alpha * 2.0 / ((omega + kf) * (omega + kf + 1.0))
}

/// Limit `μ̄_k` of `μ_k(s)` as `s → 0`.
///
/// For n = 1 the closed form is used; otherwise `u₀` is computed on the
/// default grid with [`DEFAULT_POINTS`] nodes.
pub fn mu_bar(params: &Params, k: usize) -> Result<f64> {
    params.validate()?;
    if params.n == 1 {
        return Ok(mu_bar_closed_form(params, k));
    }
    let grid = params.default_grid(DEFAULT_POINTS)?;
    mu_bar_on(params, k, &grid)
}

/// Numerical `μ̄_k` on a given grid (any dimension).
pub fn mu_bar_on(params: &Params, k: usize, grid: &RadialGrid) -> Result<f64> {
    let p0 = params.with_s(0.0);
    let u0 = semitrivial_profile(&p0, grid, None)?;
    let values = eigenvalue_list(&potential_ws(&u0, &p0), p0.lambda2, p0.n, k + 1)?;
    values
        .get(k)
        .copied()
        .ok_or_else(|| Error::Domain(format!("fewer than {} positive eigenvalues on this grid", k + 1)))
}

/// `βλ₁/(αλ₂)`, the common limit of all `μ_k(s)` as `s → α/λ₁`.
pub fn mu_limit_saturation(params: &Params) -> f64 {
    params.beta * params.lambda1 / (params.alpha * params.lambda2)
}

/// Discrete `u_s` (Newton-polished) at `params.s`.
pub fn semitrivial_profile(params: &Params, grid: &RadialGrid, warm: Option<&RadialProfile>) -> Result<RadialProfile> {
    let prob = ScalarProblem::for_u(params);
    prob.validate()?;
    discrete_ground_state(&prob, grid, warm)
}

/// `μ_k^ε` for the box potential `(κ - ε)·1_{|x| < 1/ε}`.
///
/// The indicator is averaged over each shell so that the jump at `1/ε`
/// does not degrade the second-order accuracy.
pub fn box_potential_eigen(kappa: f64, lambda: f64, eps: f64, k: usize, n: usize, grid: &RadialGrid) -> Result<f64> {
    check_dimension(n)?;
    if !(eps > 0.0 && kappa > eps && lambda > 0.0) {
        return Err(Error::Domain(format!(
            "box potential needs kappa > eps > 0 and lambda > 0 (kappa {kappa}, eps {eps}, lambda {lambda})"
        )));
    }
    let radius = 1.0 / eps;
    if radius >= grid.r_max {
        return Err(Error::Truncation(format!(
            "box radius 1/eps = {radius} does not fit in r_max = {}",
            grid.r_max
        )));
    }
    let w = box_potential(kappa - eps, radius, n, grid)?;
    let values = eigenvalue_list(&w, lambda, n, k + 1)?;
    values
        .get(k)
        .copied()
        .ok_or_else(|| Error::Domain(format!("box potential has fewer than {} eigenvalues", k + 1)))
}

/// Shell-averaged `depth·1_{r < radius}`.
pub fn box_potential(depth: f64, radius: f64, n: usize, grid: &RadialGrid) -> Result<Potential> {
    let h = grid.spacing();
    let nf = n as f64;
    let pw = |r: f64| r.powi(n as i32) / nf;
    let np = grid.num_points;
    let values = (0..np)
        .map(|i| {
            let r = grid.node(i);
            let lo = if i == 0 { 0.0 } else { r - 0.5 * h };
            let hi = if i + 1 == np { grid.r_max } else { r + 0.5 * h };
            let inside = pw(hi.min(radius)) - pw(lo.min(radius));
            depth * (inside / (pw(hi) - pw(lo))).clamp(0.0, 1.0)
        })
        .collect();
    Potential::new(*grid, values)
}

/// One sample of the eigenvalue curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub s: f64,
    pub mu: Vec<f64>,
}

/// `μ_0(s), …, μ_{k_max-1}(s)` for every `s` in `s_values` (computed in parallel).
pub fn eigen_curves(params: &Params, grid: &RadialGrid, s_values: &[f64], k_max: usize) -> Result<Vec<CurveSample>> {
    s_values
        .par_iter()
        .map(|&s| {
            let p = params.with_s(s);
            let us = semitrivial_profile(&p, grid, None)?;
            let mu = eigenvalue_list(&potential_ws(&us, &p), p.lambda2, p.n, k_max)?;
            Ok(CurveSample { s, mu })
        })
        .collect()
}

/// Checks the Sturm–Liouville node law on a computed spectrum.
pub fn node_law_holds(spectrum: &Spectrum, tail_threshold: f64) -> bool {
    spectrum
        .eigenfunctions
        .iter()
        .enumerate()
        .all(|(k, phi)| count_nodes(phi, tail_threshold).nodes == k)
}
