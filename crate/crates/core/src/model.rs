//! Parameters, radial grids and profiles, the saturation function and the
//! discretized residual of the coupled system
//!
//! ```text
//! -Δu + λ₁u = αu·Z/(1+sZ),   -Δv + λ₂v = βv·Z/(1+sZ),   Z = αu² + βv².
//! ```
//!
//! Radial functions live on a uniform grid `r_i = i·h` on `[0, r_max]`.
//! The radial Laplacian is a conservative finite-volume stencil: node `i`
//! owns the shell `[r_i - h/2, r_i + h/2] ∩ [0, r_max]` with measure
//! `∫ r^{n-1} dr`, and fluxes are taken through the shell faces with area
//! `r^{n-1}`. At `r = 0` this reduces to `Δu(0) ≈ 2n(u₁ - u₀)/h²`, the
//! one-sided second difference of the removable singularity `Δu(0) = n·u''(0)`.
//! The node at `r_max` carries the homogeneous Dirichlet condition.
//!
//! Integrals over ℝⁿ use the same shell measures times the area of the unit
//! sphere (2, 2π, 4π for n = 1, 2, 3), so the discrete energy has the
//! discrete residual as its exact gradient.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Default number of decay lengths `1/√λ` covered by the truncated grid.
pub const DECAY_MARGIN: f64 = 15.0;

/// Below this argument `g(z) = z - ln(1+z)` is evaluated by its Taylor series.
const G_SERIES_SWITCH: f64 = 1e-4;

/// Physical constants of the system together with the space dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub lambda1: f64,
    pub lambda2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
    pub n: usize,
}

impl Params {
    pub fn new(lambda1: f64, lambda2: f64, alpha: f64, beta: f64, s: f64, n: usize) -> Result<Self> {
        let p = Params {
            lambda1,
            lambda2,
            alpha,
            beta,
            s,
            n,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("alpha", self.alpha),
            ("beta", self.beta),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Domain(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if !(self.s.is_finite() && self.s >= 0.0) {
            return Err(Error::Domain(format!("s must be nonnegative, got {}", self.s)));
        }
        check_dimension(self.n)
    }

    /// Upper end `α/λ₁` of the window where `u_s` exists.
    pub fn s_star_u(&self) -> f64 {
        self.alpha / self.lambda1
    }

    /// Upper end `β/λ₂` of the window where `v_s` exists.
    pub fn s_star_v(&self) -> f64 {
        self.beta / self.lambda2
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.s = s;
        self
    }

    /// Exchanges the roles of the two equations: `(α, λ₁) ↔ (β, λ₂)`.
    pub fn swapped(&self) -> Self {
        Params {
            lambda1: self.lambda2,
            lambda2: self.lambda1,
            alpha: self.beta,
            beta: self.alpha,
            ..*self
        }
    }

    /// `α = β` and `λ₁ = λ₂`.
    pub fn is_symmetric(&self) -> bool {
        self.alpha == self.beta && self.lambda1 == self.lambda2
    }

    /// `DECAY_MARGIN / √min(λ₁, λ₂)`.
    pub fn default_r_max(&self) -> f64 {
        DECAY_MARGIN / self.lambda1.min(self.lambda2).sqrt()
    }

    pub fn default_grid(&self, num_points: usize) -> Result<RadialGrid> {
        RadialGrid::new(self.default_r_max(), num_points)
    }

    /// Rejects grids shorter than `margin / √min(λ₁, λ₂)`.
    pub fn check_truncation(&self, grid: &RadialGrid, margin: f64) -> Result<()> {
        let needed = margin / self.lambda1.min(self.lambda2).sqrt();
        if grid.r_max < needed * (1.0 - 1e-12) {
            return Err(Error::Truncation(format!(
                "r_max = {} is below {margin}/sqrt(min(lambda1, lambda2)) = {needed}",
                grid.r_max
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_dimension(n: usize) -> Result<()> {
    if (1..=3).contains(&n) {
        Ok(())
    } else {
        Err(Error::Domain(format!("dimension n must be 1, 2 or 3, got {n}")))
    }
}

/// Area of the unit sphere in ℝⁿ (counting measure on {±1} for n = 1).
pub fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => panic!("unsupported dimension {n}"),
    }
}

/// Uniform grid `0 = r_0 < r_1 < … < r_{N-1} = r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_max: f64,
    pub num_points: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, num_points: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::Domain(format!("r_max must be positive, got {r_max}")));
        }
        if num_points < 3 {
            return Err(Error::Domain(format!(
                "a grid needs at least 3 points, got {num_points}"
            )));
        }
        Ok(RadialGrid { r_max, num_points })
    }

    pub fn spacing(&self) -> f64 {
        self.r_max / (self.num_points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.num_points {
            self.r_max
        } else {
            i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.num_points).map(|i| self.node(i)).collect()
    }

    /// Same extent, `2N - 1` points (spacing halved).
    pub fn refined(&self) -> Self {
        RadialGrid {
            r_max: self.r_max,
            num_points: 2 * self.num_points - 1,
        }
    }
}

/// A radial function sampled at the nodes of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_points {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.num_points
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite profile value at node {i}")));
        }
        Ok(RadialProfile { grid, values })
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        RadialProfile {
            values: vec![0.0; grid.num_points],
            grid,
        }
    }

    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        RadialProfile {
            values: grid.nodes().into_iter().map(f).collect(),
            grid,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, c: f64) -> Self {
        RadialProfile {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn tail_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Checks that the value at `r_max` is below `tol · sup|u|`.
    pub fn check_decayed(&self, tol: f64) -> Result<()> {
        let sup = self.sup_norm();
        if self.tail_value().abs() > tol * sup {
            return Err(Error::Truncation(format!(
                "profile value {:e} at r_max exceeds tail tolerance {:e}",
                self.tail_value(),
                tol * sup
            )));
        }
        Ok(())
    }

    /// Sup-norm distance to another profile on the same grid.
    pub fn distance(&self, other: &RadialProfile) -> Result<f64> {
        same_grid(&self.grid, &other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

pub(crate) fn same_grid(a: &RadialGrid, b: &RadialGrid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "grids (r_max {}, {} points) and (r_max {}, {} points) differ",
            a.r_max, a.num_points, b.r_max, b.num_points
        )))
    }
}

/// The pair `(u, v)` on a shared grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatePair {
    pub u: RadialProfile,
    pub v: RadialProfile,
}

impl StatePair {
    pub fn new(u: RadialProfile, v: RadialProfile) -> Result<Self> {
        same_grid(&u.grid, &v.grid)?;
        Ok(StatePair { u, v })
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        StatePair {
            u: RadialProfile::zeros(grid),
            v: RadialProfile::zeros(grid),
        }
    }

    /// `(u_s, 0)`.
    pub fn semitrivial_u(u: RadialProfile) -> Self {
        let v = RadialProfile::zeros(u.grid);
        StatePair { u, v }
    }

    pub fn grid(&self) -> RadialGrid {
        self.u.grid
    }

    pub fn scaled(&self, c: f64) -> Self {
        StatePair {
            u: self.u.scaled(c),
            v: self.v.scaled(c),
        }
    }

    pub fn mirrored(&self) -> Self {
        StatePair {
            u: self.u.clone(),
            v: self.v.scaled(-1.0),
        }
    }
}

/// `g(z) = z - ln(1 + z)` for `z >= 0`.
pub fn saturation_g(z: f64) -> Result<f64> {
    if z.is_nan() || z < 0.0 {
        return Err(Error::Domain(format!("g(z) requires z >= 0, got {z}")));
    }
    Ok(g(z))
}

#[inline]
pub(crate) fn g(z: f64) -> f64 {
    if z < G_SERIES_SWITCH {
        // z²/2 - z³/3 + z⁴/4 - z⁵/5
        z * z * (0.5 - z * (1.0 / 3.0 - z * (0.25 - z * 0.2)))
    } else {
        z - z.ln_1p()
    }
}

/// `g(sZ)/s²`, continuous at `s = 0` where it equals `Z²/2`.
#[inline]
pub(crate) fn g_scaled(z: f64, s: f64) -> f64 {
    if s == 0.0 {
        0.5 * z * z
    } else {
        g(s * z) / (s * s)
    }
}

/// Pointwise `Z = αu² + βv²`.
pub fn intensity_z(state: &StatePair, params: &Params) -> Result<RadialProfile> {
    same_grid(&state.u.grid, &state.v.grid)?;
    let values = state
        .u
        .values
        .iter()
        .zip(&state.v.values)
        .map(|(u, v)| params.alpha * u * u + params.beta * v * v)
        .collect();
    Ok(RadialProfile {
        grid: state.grid(),
        values,
    })
}

/// Shell measures and face areas of the finite-volume radial Laplacian.
#[derive(Debug, Clone)]
pub struct RadialStencil {
    pub grid: RadialGrid,
    pub n: usize,
    h: f64,
    /// `∫ r^{n-1} dr` over the shell owned by node i (half shell at both ends).
    cell: Vec<f64>,
    /// `r^{n-1}` at the face between node i and i+1.
    face: Vec<f64>,
    sphere: f64,
}

impl RadialStencil {
    pub fn new(grid: RadialGrid, n: usize) -> Result<Self> {
        check_dimension(n)?;
        let h = grid.spacing();
        let np = grid.num_points;
        let nf = n as f64;
        let pow = |r: f64| r.powi(n as i32) / nf;
        let mut cell = Vec::with_capacity(np);
        for i in 0..np {
            let r = grid.node(i);
            let lo = if i == 0 { 0.0 } else { r - 0.5 * h };
            let hi = if i + 1 == np { grid.r_max } else { r + 0.5 * h };
            cell.push(pow(hi) - pow(lo));
        }
        let face = (0..np - 1)
            .map(|i| (grid.node(i) + 0.5 * h).powi(n as i32 - 1))
            .collect();
        Ok(RadialStencil {
            grid,
            n,
            h,
            cell,
            face,
            sphere: sphere_area(n),
        })
    }

    pub fn len(&self) -> usize {
        self.grid.num_points
    }

    pub fn is_empty(&self) -> bool {
        self.grid.num_points == 0
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn cell(&self, i: usize) -> f64 {
        self.cell[i]
    }

    pub fn face(&self, i: usize) -> f64 {
        self.face[i]
    }

    pub fn sphere(&self) -> f64 {
        self.sphere
    }

    /// Finite-volume `(-Δu)(r_i)` for a node `i < N - 1`.
    #[inline]
    pub fn neg_laplacian_at(&self, u: &[f64], i: usize) -> f64 {
        let mut flux = self.face[i] * (u[i] - u[i + 1]);
        if i > 0 {
            flux += self.face[i - 1] * (u[i] - u[i - 1]);
        }
        flux / (self.h * self.cell[i])
    }

    /// Stiffness entries `K_ii` and `K_{i,i+1}` (the quadratic form `Σ face (Δu)²/h`).
    pub(crate) fn stiffness_diag(&self, i: usize) -> f64 {
        let mut d = self.face[i] / self.h;
        if i > 0 {
            d += self.face[i - 1] / self.h;
        }
        d
    }

    pub(crate) fn stiffness_off(&self, i: usize) -> f64 {
        -self.face[i] / self.h
    }

    /// `∫_{ℝⁿ} f` for nodal values `f(i)`.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.sphere * (0..self.len()).map(|i| self.cell[i] * f(i)).sum::<f64>()
    }

    /// `∫_{ℝⁿ} |∇u|²`.
    pub fn dirichlet_form(&self, u: &[f64]) -> f64 {
        self.sphere
            * self
                .face
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let d = u[i + 1] - u[i];
                    f * d * d
                })
                .sum::<f64>()
            / self.h
    }

    /// `‖u‖²_λ = ∫ |∇u|² + λu²`.
    pub fn norm_sq(&self, u: &[f64], lambda: f64) -> f64 {
        self.dirichlet_form(u) + lambda * self.integrate(|i| u[i] * u[i])
    }
}

/// Pointwise coefficients of the nonlinearity at one node.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LocalTerms {
    /// `αuZ/(1+sZ)`
    pub fu: f64,
    /// `βvZ/(1+sZ)`
    pub fv: f64,
    /// `∂fu/∂u = (sαZ² + 3α²u² + αβv²)/(1+sZ)²`
    pub a11: f64,
    /// `∂fu/∂v = ∂fv/∂u = 2αβuv/(1+sZ)²`
    pub a12: f64,
    /// `∂fv/∂v = (sβZ² + 3β²v² + αβu²)/(1+sZ)²`
    pub a22: f64,
    /// `∂fu/∂s = -αuZ²/(1+sZ)²`
    pub fu_s: f64,
    /// `∂fv/∂s = -βvZ²/(1+sZ)²`
    pub fv_s: f64,
}

#[inline]
pub(crate) fn local_terms(u: f64, v: f64, s: f64, p: &Params) -> LocalTerms {
    let (a, b) = (p.alpha, p.beta);
    let z = a * u * u + b * v * v;
    let den = 1.0 + s * z;
    let den2 = den * den;
    let z2 = z * z;
    LocalTerms {
        fu: a * u * z / den,
        fv: b * v * z / den,
        a11: (s * a * z2 + 3.0 * a * a * u * u + a * b * v * v) / den2,
        a12: 2.0 * a * b * u * v / den2,
        a22: (s * b * z2 + 3.0 * b * b * v * v + a * b * u * u) / den2,
        fu_s: -a * u * z2 / den2,
        fv_s: -b * v * z2 / den2,
    }
}

/// Residual of both equations at every node, evaluated at the saturation
/// parameter `s` (rather than `params.s`).
pub(crate) fn residual_at(stencil: &RadialStencil, u: &[f64], v: &[f64], s: f64, p: &Params) -> (Vec<f64>, Vec<f64>) {
    let np = stencil.len();
    let mut ru = vec![0.0; np];
    let mut rv = vec![0.0; np];
    for i in 0..np - 1 {
        let t = local_terms(u[i], v[i], s, p);
        ru[i] = stencil.neg_laplacian_at(u, i) + p.lambda1 * u[i] - t.fu;
        rv[i] = stencil.neg_laplacian_at(v, i) + p.lambda2 * v[i] - t.fv;
    }
    ru[np - 1] = u[np - 1];
    rv[np - 1] = v[np - 1];
    (ru, rv)
}

/// Discretized left-minus-right sides of both equations.
///
/// Interior nodes (including `r = 0`) carry `-Δu + λ₁u - αuZ/(1+sZ)` and its
/// counterpart for `v`; the node at `r_max` carries the Dirichlet residual,
/// i.e. the boundary value itself.
pub fn residual(state: &StatePair, params: &Params) -> Result<(RadialProfile, RadialProfile)> {
    same_grid(&state.u.grid, &state.v.grid)?;
    params.validate()?;
    let stencil = RadialStencil::new(state.grid(), params.n)?;
    let (ru, rv) = residual_at(&stencil, &state.u.values, &state.v.values, params.s, params);
    let grid = state.grid();
    Ok((RadialProfile { grid, values: ru }, RadialProfile { grid, values: rv }))
}

/// `max(‖R_u‖_∞, ‖R_v‖_∞)`.
pub fn residual_sup_norm(state: &StatePair, params: &Params) -> Result<f64> {
    let (ru, rv) = residual(state, params)?;
    Ok(ru.sup_norm().max(rv.sup_norm()))
}
