//! Newton's method for the discretized system and pseudo-arclength
//! continuation of the branches `C_k` bifurcating from `(u_{s_k}, 0, s_k)`.
//!
//! The unknowns are the interior nodal values, interleaved as
//! `(u_0, v_0, u_1, v_1, …)` so that the Jacobian is banded with two sub- and
//! two super-diagonals. Rows are multiplied by the shell measures, which
//! makes the matrix symmetric; the sup-norm of the unscaled residual is what
//! the tolerances refer to.
//!
//! Continuation uses the augmented system `F(x, s) = 0`,
//! `⟨t, (x, s) - X_pred⟩ = 0` solved by block elimination on the factorized
//! Jacobian, with one refinement sweep on the full bordered system.

use rayon::join;
use serde::{Deserialize, Serialize};

use crate::bifurcation::{count_nodes, BifurcationPoint, DEFAULT_TAIL_THRESHOLD};
use crate::energy::energy_on;
use crate::error::{Error, Result};
use crate::linalg::{BandLu, BandMatrix};
use crate::model::{local_terms, residual_at, same_grid, Params, RadialGrid, RadialProfile, RadialStencil, StatePair};
use crate::spectrum::semitrivial_profile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationConfig {
    /// Seed amplitude of `v` relative to `‖u_{s_k}‖_∞`.
    pub initial_amplitude: f64,
    /// Initial arclength step.
    pub step: f64,
    pub step_min: f64,
    pub step_max: f64,
    pub max_steps: usize,
    /// Bound on the sup-norm of the residual.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            initial_amplitude: 1e-3,
            step: 0.01,
            step_min: 1e-4,
            step_max: 0.05,
            max_steps: 200,
            newton_tol: 1e-8,
            newton_max_iter: 12,
        }
    }
}

impl ContinuationConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.initial_amplitude,
            self.step,
            self.step_min,
            self.step_max,
            self.newton_tol,
        ];
        if positive.iter().any(|x| !(x.is_finite() && *x > 0.0)) || self.newton_max_iter == 0 {
            return Err(Error::Domain("continuation settings must be positive".into()));
        }
        if !(self.step_min <= self.step && self.step <= self.step_max) {
            return Err(Error::Domain(format!(
                "step {} outside [{}, {}]",
                self.step, self.step_min, self.step_max
            )));
        }
        Ok(())
    }
}

/// Why a branch ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// `s` left `(0, α/λ₁)`.
    LeftDomain,
    /// The corrector failed at the smallest step.
    StepFailure,
    /// `v` fell below `10·newton_tol` or changed sign as a whole: back on `T₂`.
    ReturnedToSemitrivial,
    /// The same for `u`: the branch reached `T₁ = {(0, v_s)}`.
    ReachedOtherSemitrivial,
    MaxSteps,
    /// Newton failed at the seed; the branch is empty.
    SeedFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub step: usize,
    pub state: StatePair,
    pub s: f64,
    /// Sup-norm of the residual.
    pub residual: f64,
    pub energy: f64,
    /// Zeros of `(u, v)`.
    pub nodal_type: (usize, usize),
    /// Minimum over the interior nodes of each component.
    pub min_values: (f64, f64),
    /// `(‖u‖_{λ₁}, ‖v‖_{λ₂})`
    pub norms: (f64, f64),
    /// Distance to the previous point in the continuation metric.
    pub distance: f64,
}

impl BranchPoint {
    pub fn is_positive(&self) -> bool {
        self.min_values.0 > 0.0 && self.min_values.1 > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub k: usize,
    pub direction: i32,
    pub origin: BifurcationPoint,
    pub points: Vec<BranchPoint>,
    pub termination: Termination,
    pub diagnostic: Option<String>,
}

/// Jacobian of the discretized residual as pointwise coefficient profiles.
///
/// Row `i < N - 1` of the `u` block reads `-Δ + λ₁ - a11` with coupling
/// `-a12` to `v`; the `v` block reads `-Δ + λ₂ - a22`. Boundary rows are the identity.
#[derive(Debug, Clone)]
pub struct BlockJacobian {
    stencil: RadialStencil,
    lambda1: f64,
    lambda2: f64,
    pub a11: Vec<f64>,
    pub a12: Vec<f64>,
    pub a22: Vec<f64>,
}

impl BlockJacobian {
    fn at(stencil: &RadialStencil, u: &[f64], v: &[f64], s: f64, p: &Params) -> Self {
        let np = stencil.len();
        let (mut a11, mut a12, mut a22) = (vec![0.0; np], vec![0.0; np], vec![0.0; np]);
        for i in 0..np {
            let t = local_terms(u[i], v[i], s, p);
            a11[i] = t.a11;
            a12[i] = t.a12;
            a22[i] = t.a22;
        }
        BlockJacobian {
            stencil: stencil.clone(),
            lambda1: p.lambda1,
            lambda2: p.lambda2,
            a11,
            a12,
            a22,
        }
    }

    /// Directional derivative of the residual along `(du, dv)`.
    pub fn apply(&self, du: &[f64], dv: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let np = self.stencil.len();
        let mut ju = vec![0.0; np];
        let mut jv = vec![0.0; np];
        for i in 0..np - 1 {
            ju[i] = self.stencil.neg_laplacian_at(du, i) + (self.lambda1 - self.a11[i]) * du[i] - self.a12[i] * dv[i];
            jv[i] = self.stencil.neg_laplacian_at(dv, i) + (self.lambda2 - self.a22[i]) * dv[i] - self.a12[i] * du[i];
        }
        ju[np - 1] = du[np - 1];
        jv[np - 1] = dv[np - 1];
        (ju, jv)
    }

    /// Interior block in interleaved order with rows scaled by the shell measure.
    fn banded(&self) -> BandMatrix {
        let st = &self.stencil;
        let m = st.len() - 1;
        let mut band = BandMatrix::zeros(2 * m, 2, 2);
        for i in 0..m {
            let w = st.cell(i);
            let (ru, rv) = (2 * i, 2 * i + 1);
            band.set(ru, ru, st.stiffness_diag(i) + w * (self.lambda1 - self.a11[i]));
            band.set(rv, rv, st.stiffness_diag(i) + w * (self.lambda2 - self.a22[i]));
            band.set(ru, rv, -w * self.a12[i]);
            band.set(rv, ru, -w * self.a12[i]);
            if i + 1 < m {
                let k = st.stiffness_off(i);
                band.set(ru, ru + 2, k);
                band.set(ru + 2, ru, k);
                band.set(rv, rv + 2, k);
                band.set(rv + 2, rv, k);
            }
        }
        band
    }
}

/// Jacobian of [`crate::model::residual`] at `state` and `params.s`.
pub fn jacobian(state: &StatePair, params: &Params) -> Result<BlockJacobian> {
    same_grid(&state.u.grid, &state.v.grid)?;
    params.validate()?;
    let st = RadialStencil::new(state.grid(), params.n)?;
    Ok(BlockJacobian::at(
        &st,
        &state.u.values,
        &state.v.values,
        params.s,
        params,
    ))
}

/// Discretized system on a fixed grid in interleaved interior coordinates.
struct System {
    stencil: RadialStencil,
    params: Params,
    m: usize,
    /// Continuation metric weights `|S|·cell_i` per interleaved entry.
    weight: Vec<f64>,
}

impl System {
    fn new(grid: RadialGrid, params: Params) -> Result<Self> {
        let stencil = RadialStencil::new(grid, params.n)?;
        let m = grid.num_points - 1;
        let weight = (0..2 * m).map(|j| stencil.sphere() * stencil.cell(j / 2)).collect();
        Ok(System {
            stencil,
            params,
            m,
            weight,
        })
    }

    fn pack(&self, state: &StatePair) -> Vec<f64> {
        let mut x = vec![0.0; 2 * self.m];
        for i in 0..self.m {
            x[2 * i] = state.u.values[i];
            x[2 * i + 1] = state.v.values[i];
        }
        x
    }

    fn unpack(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut u = vec![0.0; self.m + 1];
        let mut v = vec![0.0; self.m + 1];
        for i in 0..self.m {
            u[i] = x[2 * i];
            v[i] = x[2 * i + 1];
        }
        (u, v)
    }

    fn state(&self, x: &[f64]) -> Result<StatePair> {
        let (u, v) = self.unpack(x);
        let grid = self.stencil.grid;
        StatePair::new(RadialProfile::new(grid, u)?, RadialProfile::new(grid, v)?)
    }

    /// Interleaved residual and its `s`-derivative.
    fn residual(&self, x: &[f64], s: f64) -> (Vec<f64>, Vec<f64>) {
        let (u, v) = self.unpack(x);
        let (ru, rv) = residual_at(&self.stencil, &u, &v, s, &self.params);
        let mut r = vec![0.0; 2 * self.m];
        let mut rs = vec![0.0; 2 * self.m];
        for i in 0..self.m {
            r[2 * i] = ru[i];
            r[2 * i + 1] = rv[i];
            let t = local_terms(u[i], v[i], s, &self.params);
            rs[2 * i] = -t.fu_s;
            rs[2 * i + 1] = -t.fv_s;
        }
        (r, rs)
    }

    fn factorize(&self, x: &[f64], s: f64) -> Result<BandLu> {
        let (u, v) = self.unpack(x);
        BlockJacobian::at(&self.stencil, &u, &v, s, &self.params)
            .banded()
            .factorize()
    }

    /// Solves `J y = b` for an unscaled right-hand side.
    fn solve(&self, lu: &BandLu, b: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = b
            .iter()
            .enumerate()
            .map(|(j, bj)| self.stencil.cell(j / 2) * bj)
            .collect();
        lu.solve_in_place(&mut y);
        y
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(&self.weight).map(|((x, y), w)| w * x * y).sum()
    }

    fn dot_component(&self, a: &RadialProfile, b: &RadialProfile) -> f64 {
        self.stencil.integrate(|i| a.values[i] * b.values[i])
    }

    fn point(&self, x: &[f64], s: f64, step: usize, distance: f64) -> Result<BranchPoint> {
        let state = self.state(x)?;
        let (r, _) = self.residual(x, s);
        let (u, v) = (&state.u.values, &state.v.values);
        let m = self.m;
        let min_of = |w: &[f64]| w[..m].iter().copied().fold(f64::INFINITY, f64::min);
        Ok(BranchPoint {
            step,
            s,
            residual: sup(&r),
            energy: energy_on(&self.stencil, u, v, s, &self.params),
            nodal_type: (
                count_nodes(&state.u, DEFAULT_TAIL_THRESHOLD).nodes,
                count_nodes(&state.v, DEFAULT_TAIL_THRESHOLD).nodes,
            ),
            min_values: (min_of(u), min_of(v)),
            norms: (
                self.stencil.norm_sq(u, self.params.lambda1).sqrt(),
                self.stencil.norm_sq(v, self.params.lambda2).sqrt(),
            ),
            distance,
            state,
        })
    }

    /// Newton on `F(x, s) = 0`, `⟨t_x, x⟩ + t_s·s = target`.
    fn correct(
        &self,
        mut x: Vec<f64>,
        mut s: f64,
        t: (&[f64], f64),
        target: f64,
        cfg: &ContinuationConfig,
    ) -> Result<(Vec<f64>, f64, usize)> {
        let (tx, ts) = t;
        let scale = 1.0 + self.dot(&x, &x).sqrt() + s.abs();
        let mut first = f64::NAN;
        for it in 0..=cfg.newton_max_iter {
            let (r, rs) = self.residual(&x, s);
            let rnorm = sup(&r);
            let n_res = self.dot(tx, &x) + ts * s - target;
            if !rnorm.is_finite() {
                break;
            }
            if rnorm <= cfg.newton_tol && n_res.abs() <= 1e-12 * scale {
                return Ok((x, s, it));
            }
            if it == 0 {
                first = rnorm;
            } else if rnorm > 1e3 * first.max(cfg.newton_tol) {
                break;
            }
            if it == cfg.newton_max_iter {
                return Err(Error::NewtonFailed {
                    iterations: it,
                    residual: rnorm,
                });
            }
            let lu = self.factorize(&x, s)?;
            let c = self.solve(&lu, &rs.iter().map(|v| -v).collect::<Vec<_>>());
            let den = self.dot(tx, &c) + ts;
            if den == 0.0 || !den.is_finite() {
                return Err(Error::SingularJacobian);
            }
            // bordered solve of [J rs; tᵀ ts] (dx, ds) = (f, g), refined once
            let bordered = |f: &[f64], g: f64| -> (Vec<f64>, f64) {
                let a = self.solve(&lu, f);
                let ds = (g - self.dot(tx, &a)) / den;
                let dx = a.iter().zip(&c).map(|(a, c)| a + ds * c).collect();
                (dx, ds)
            };
            let f: Vec<f64> = r.iter().map(|v| -v).collect();
            let (mut dx, mut ds) = bordered(&f, -n_res);
            let (ju, jv) = {
                let (u, v) = self.unpack(&dx);
                let (xu, xv) = self.unpack(&x);
                BlockJacobian::at(&self.stencil, &xu, &xv, s, &self.params).apply(&u, &v)
            };
            let mut f2 = vec![0.0; 2 * self.m];
            for i in 0..self.m {
                f2[2 * i] = f[2 * i] - ju[i] - rs[2 * i] * ds;
                f2[2 * i + 1] = f[2 * i + 1] - jv[i] - rs[2 * i + 1] * ds;
            }
            let g2 = -n_res - self.dot(tx, &dx) - ts * ds;
            let (ex, es) = bordered(&f2, g2);
            for (d, e) in dx.iter_mut().zip(&ex) {
                *d += e;
            }
            ds += es;
            for (xi, d) in x.iter_mut().zip(&dx) {
                *xi += d;
            }
            s += ds;
        }
        Err(Error::NewtonFailed {
            iterations: cfg.newton_max_iter,
            residual: sup(&self.residual(&x, s).0),
        })
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Result of [`newton_solve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonOutcome {
    pub state: StatePair,
    pub iterations: usize,
    pub residual: f64,
}

/// Damped Newton iteration for the residual at fixed `s`.
///
/// A singular Jacobian (typically at a bifurcation point) is reported as
/// [`Error::SingularJacobian`].
pub fn newton_solve(initial: &StatePair, s: f64, params: &Params, cfg: &ContinuationConfig) -> Result<NewtonOutcome> {
    same_grid(&initial.u.grid, &initial.v.grid)?;
    let p = params.with_s(s);
    p.validate()?;
    if !(s > 0.0 && s < p.s_star_u()) && s != 0.0 {
        return Err(Error::ExistenceWindow { s, bound: p.s_star_u() });
    }
    let sys = System::new(initial.grid(), p)?;
    let mut x = sys.pack(initial);
    let mut r = sys.residual(&x, s).0;
    let mut rnorm = sup(&r);
    let mut iterations = 0;
    while rnorm > cfg.newton_tol {
        if iterations >= cfg.newton_max_iter {
            return Err(Error::NewtonFailed {
                iterations,
                residual: rnorm,
            });
        }
        iterations += 1;
        let lu = sys.factorize(&x, s)?;
        let dx = sys.solve(&lu, &r.iter().map(|v| -v).collect::<Vec<_>>());
        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + step * d).collect();
            let rt = sys.residual(&trial, s).0;
            let nt = sup(&rt);
            if nt < rnorm || step < 1e-3 {
                if !(nt < rnorm) {
                    return Err(Error::NewtonFailed {
                        iterations,
                        residual: nt,
                    });
                }
                x = trial;
                r = rt;
                rnorm = nt;
                break;
            }
            step *= 0.5;
        }
    }
    Ok(NewtonOutcome {
        state: sys.state(&x)?,
        iterations,
        residual: rnorm,
    })
}

/// `(‖u‖_{λ₁}, ‖v‖_{λ₂})` with `‖u‖²_λ = ∫_{ℝⁿ} |∇u|² + λu²`.
///
/// For n = 1 the integral runs over the whole line, so `√2·sech` has `‖·‖²_1 = 16/3`.
pub fn solution_norms(state: &StatePair, params: &Params) -> Result<(f64, f64)> {
    same_grid(&state.u.grid, &state.v.grid)?;
    let st = RadialStencil::new(state.grid(), params.n)?;
    Ok((
        st.norm_sq(&state.u.values, params.lambda1).sqrt(),
        st.norm_sq(&state.v.values, params.lambda2).sqrt(),
    ))
}

/// Traces `C_k` from `origin` with `v` initially along `direction·φ_k`.
///
/// The seed `(u_{s_k}, ε·φ_k/‖φ_k‖_∞, s_k)` is corrected with `s` free and
/// the projection of `v` on `φ_k` held fixed; the seed becomes step 0.
pub fn continue_branch(
    origin: &BifurcationPoint,
    params: &Params,
    cfg: &ContinuationConfig,
    direction: i32,
) -> Result<Branch> {
    params.validate()?;
    cfg.validate()?;
    if direction != 1 && direction != -1 {
        return Err(Error::Domain(format!("direction must be +1 or -1, got {direction}")));
    }
    let s_hi = params.s_star_u();
    if !(origin.s_k > 0.0 && origin.s_k < s_hi) {
        return Err(Error::ExistenceWindow {
            s: origin.s_k,
            bound: s_hi,
        });
    }
    let grid = origin.kernel_fn.grid;
    let mut branch = Branch {
        k: origin.k,
        direction,
        origin: origin.clone(),
        points: Vec::new(),
        termination: Termination::SeedFailure,
        diagnostic: None,
    };
    let sys = System::new(grid, *params)?;
    let us = semitrivial_profile(&params.with_s(origin.s_k), &grid, None)?;
    let phi_sup = origin.kernel_fn.sup_norm();
    if phi_sup == 0.0 {
        return Err(Error::Domain("kernel eigenfunction vanishes".into()));
    }
    let amp = cfg.initial_amplitude * us.sup_norm();
    let dir = direction as f64;
    let phi = origin.kernel_fn.scaled(dir / phi_sup);
    let seed_state = StatePair::new(us, phi.scaled(amp))?;
    let x_seed = sys.pack(&seed_state);

    let mut tx = sys.pack(&StatePair::new(RadialProfile::zeros(grid), phi)?);
    let tn = sys.dot(&tx, &tx).sqrt();
    tx.iter_mut().for_each(|t| *t /= tn);
    let mut ts = 0.0;
    let target = sys.dot(&tx, &x_seed);
    let (mut x, mut s) = match sys.correct(x_seed, origin.s_k, (&tx, 0.0), target, cfg) {
        Ok((x, s, _)) => (x, s),
        Err(e) => {
            branch.diagnostic = Some(format!("seed correction failed: {e}"));
            return Ok(branch);
        }
    };
    if !(s > 0.0 && s < s_hi) {
        branch.termination = Termination::LeftDomain;
        branch.diagnostic = Some(format!("seed converged outside the window at s = {s}"));
        return Ok(branch);
    }
    branch.points.push(sys.point(&x, s, 0, 0.0)?);

    let floor = 10.0 * cfg.newton_tol;
    let mut ds = cfg.step;
    let mut easy = 0;
    branch.termination = Termination::MaxSteps;
    'steps: for step in 1..=cfg.max_steps {
        loop {
            let x_pred: Vec<f64> = x.iter().zip(&tx).map(|(a, t)| a + ds * t).collect();
            let s_pred = s + ds * ts;
            let target = sys.dot(&tx, &x_pred) + ts * s_pred;
            let attempt = sys
                .correct(x_pred, s_pred, (&tx, ts), target, cfg)
                .and_then(|(xn, sn, it)| {
                    let mut dx: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
                    let mut dsn = sn - s;
                    let dist = (sys.dot(&dx, &dx) + dsn * dsn).sqrt();
                    if !(dist > 0.0 && dist <= 2.0 * ds) || sys.dot(&dx, &tx) + dsn * ts <= 0.0 {
                        return Err(Error::NoRoot("corrector left the predicted neighbourhood".into()));
                    }
                    dx.iter_mut().for_each(|d| *d /= dist);
                    dsn /= dist;
                    Ok((xn, sn, it, dx, dsn, dist))
                });
            match attempt {
                Ok((xn, sn, it, dx, dsn, dist)) => {
                    x = xn;
                    s = sn;
                    tx = dx;
                    ts = dsn;
                    if it <= 3 {
                        easy += 1;
                        if easy >= 3 {
                            ds = (2.0 * ds).min(cfg.step_max);
                            easy = 0;
                        }
                    } else {
                        easy = 0;
                    }
                    if !(s > 0.0 && s < s_hi) {
                        branch.termination = Termination::LeftDomain;
                        break 'steps;
                    }
                    let pt = sys.point(&x, s, step, dist)?;
                    let (u_sup, v_sup) = (pt.state.u.sup_norm(), pt.state.v.sup_norm());
                    // a component changing sign as a whole has passed through zero
                    let prev = &branch.points[branch.points.len() - 1].state;
                    let flip_u = sys.dot_component(&pt.state.u, &prev.u) < 0.0;
                    let flip_v = sys.dot_component(&pt.state.v, &prev.v) < 0.0;
                    branch.points.push(pt);
                    if v_sup < floor || flip_v {
                        branch.termination = Termination::ReturnedToSemitrivial;
                        break 'steps;
                    }
                    if u_sup < floor || flip_u {
                        branch.termination = Termination::ReachedOtherSemitrivial;
                        break 'steps;
                    }
                    continue 'steps;
                }
                Err(e) => {
                    ds *= 0.5;
                    easy = 0;
                    if ds < cfg.step_min {
                        branch.termination = Termination::StepFailure;
                        branch.diagnostic = Some(format!("step {step}: {e}"));
                        break 'steps;
                    }
                }
            }
        }
    }
    Ok(branch)
}

/// Both directions of `C_k`, traced concurrently.
pub fn continue_both(origin: &BifurcationPoint, params: &Params, cfg: &ContinuationConfig) -> Result<(Branch, Branch)> {
    let (a, b) = join(
        || continue_branch(origin, params, cfg, 1),
        || continue_branch(origin, params, cfg, -1),
    );
    Ok((a?, b?))
}
