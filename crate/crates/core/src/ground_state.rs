//! Scalar ground states of `-Δu + λu = c²u³/(1 + s·c·u²)`.
//!
//! In one dimension the profile follows from the first integral
//! `u'² = P(u) := λu² - g(s·c·u²)/s²`: the peak `a = u(0)` is the positive
//! root of `P`, and the inverse function is `x(z) = ∫_z^a P^{-1/2}`. In two
//! and three dimensions the radial ODE is shot from `r = 0` and bisected on
//! `u(0)`.
//!
//! [`discrete_ground_state`] polishes either profile into an exact zero of
//! the finite-volume residual used by the rest of the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::BandMatrix;
use crate::model::{check_dimension, g, g_scaled, Params, RadialGrid, RadialProfile, RadialStencil};
use crate::numerics::{bisect, Dopri5, GaussRule};

/// One scalar equation: `lambda` is λ₁ or λ₂, `coupling` is α or β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarProblem {
    pub lambda: f64,
    pub coupling: f64,
    pub s: f64,
    pub n: usize,
}

impl ScalarProblem {
    pub fn new(lambda: f64, coupling: f64, s: f64, n: usize) -> Result<Self> {
        let p = ScalarProblem { lambda, coupling, s, n };
        p.validate()?;
        Ok(p)
    }

    /// The equation satisfied by `u_s` (λ₁, α) at `params.s`.
    pub fn for_u(params: &Params) -> Self {
        ScalarProblem {
            lambda: params.lambda1,
            coupling: params.alpha,
            s: params.s,
            n: params.n,
        }
    }

    /// The equation satisfied by `v_s` (λ₂, β) at `params.s`.
    pub fn for_v(params: &Params) -> Self {
        ScalarProblem::for_u(&params.swapped())
    }

    pub fn s_bound(&self) -> f64 {
        self.coupling / self.lambda
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite() && self.coupling > 0.0 && self.coupling.is_finite()) {
            return Err(Error::Domain("lambda and coupling must be positive".into()));
        }
        check_dimension(self.n)?;
        if !(self.s >= 0.0 && self.s < self.s_bound()) {
            return Err(Error::ExistenceWindow {
                s: self.s,
                bound: self.s_bound(),
            });
        }
        Ok(())
    }

    /// `c²u³/(1 + s·c·u²)`
    #[inline]
    pub fn nonlinearity(&self, u: f64) -> f64 {
        let c = self.coupling;
        c * c * u * u * u / (1.0 + self.s * c * u * u)
    }

    /// `d/du` of [`Self::nonlinearity`].
    #[inline]
    fn nonlinearity_du(&self, u: f64) -> f64 {
        let c = self.coupling;
        let w = c * u * u;
        let den = 1.0 + self.s * w;
        (3.0 * c * c * u * u + self.s * c * w * w) / (den * den)
    }

    /// `P(z) = λz² - g(s·c·z²)/s²`.
    fn first_integral(&self, z: f64) -> f64 {
        self.lambda * z * z - g_scaled(self.coupling * z * z, self.s)
    }

    /// Amplitude `b` where `nonlinearity(b) = λb`; the ground state peak lies above it.
    fn equilibrium(&self) -> f64 {
        let c = self.coupling;
        (self.lambda / (c * (c - self.s * self.lambda))).sqrt()
    }
}

/// Unique positive root of `λa² - g(s·c·a²)/s² = 0` (`a = √(2λ)/c` at `s = 0`).
pub fn peak_amplitude_1d(prob: &ScalarProblem) -> Result<f64> {
    prob.validate()?;
    if prob.n != 1 {
        return Err(Error::Domain(format!(
            "peak_amplitude_1d requires n = 1, got {}",
            prob.n
        )));
    }
    peak_amplitude(prob)
}

fn peak_amplitude(prob: &ScalarProblem) -> Result<f64> {
    let (lambda, c, s) = (prob.lambda, prob.coupling, prob.s);
    if s == 0.0 {
        return Ok((2.0 * lambda).sqrt() / c);
    }
    // With t = s·c·a² the root equation reads g(t)/t = λs/c; g(t)/t rises from 0 to 1.
    let target = lambda * s / c;
    let ratio = |t: f64| g(t) / t - target;
    let mut hi = 4.0 * target.max(1e-300);
    let mut guard = 0;
    while ratio(hi) <= 0.0 {
        hi *= 4.0;
        guard += 1;
        if guard > 2000 || !hi.is_finite() {
            return Err(Error::NoRoot(format!("peak amplitude diverges at s = {s}")));
        }
    }
    let t = bisect(ratio, 0.0_f64.max(hi * 1e-300), hi, 0.0, 1e-15)?;
    Ok((t / (s * c)).sqrt())
}

/// Sampled `u_s` for n = 1 from the inverse-function quadrature.
pub fn ground_state_1d(prob: &ScalarProblem, grid: &RadialGrid) -> Result<RadialProfile> {
    prob.validate()?;
    if prob.n != 1 {
        return Err(Error::Domain(format!("ground_state_1d requires n = 1, got {}", prob.n)));
    }
    let a = peak_amplitude(prob)?;
    let inv = InverseProfile::new(*prob, a);
    let values = inv.sample(grid)?;
    RadialProfile::new(*grid, values)
}

/// Inverse-function quadrature for the 1D profile.
///
/// Near the peak the substitution `z = a(1 - τ²)` removes the
/// `(a - z)^{-1/2}` singularity; below `a/2` the variable `y = ln z` keeps
/// the integrand bounded as `z → 0` (it tends to `1/√λ`).
struct InverseProfile {
    prob: ScalarProblem,
    a: f64,
    /// `λ - c²a²/(1 + s·c·a²)` (negative)
    peak_slope: f64,
    rule: GaussRule,
}

const TAU_SWITCH: f64 = std::f64::consts::FRAC_1_SQRT_2;

impl InverseProfile {
    fn new(prob: ScalarProblem, a: f64) -> Self {
        let c = prob.coupling;
        let peak_slope = prob.lambda - c * c * a * a / (1.0 + prob.s * c * a * a);
        InverseProfile {
            prob,
            a,
            peak_slope,
            rule: GaussRule::new(10),
        }
    }

    /// `P(a(1 - τ²))` written around the root so that it stays accurate for small τ.
    fn first_integral_near_peak(&self, tau: f64) -> f64 {
        let (a, c, s) = (self.a, self.prob.coupling, self.prob.s);
        let d = a * a * tau * tau * (tau * tau - 2.0);
        if s == 0.0 {
            let z2 = a * a * (1.0 - tau * tau).powi(2);
            return d * (self.prob.lambda - 0.5 * c * c * (z2 + a * a));
        }
        let q = s * c * d / (1.0 + s * c * a * a);
        d * self.peak_slope - (q - q.ln_1p()) / (s * s)
    }

    /// `dx/dτ` in the peak region.
    fn rate_peak(&self, tau: f64) -> f64 {
        if tau == 0.0 {
            return (2.0 / -self.peak_slope).sqrt();
        }
        2.0 * self.a * tau / self.first_integral_near_peak(tau).sqrt()
    }

    /// `-dx/dy` with `y = ln z` in the tail region.
    fn rate_tail(&self, y: f64) -> f64 {
        let z = y.exp();
        z / self.prob.first_integral(z).sqrt()
    }

    /// Solves `∫_{p}^{p'} rate = dx` for `p'` by Newton's method.
    fn advance(&self, p: f64, dx: f64, rate: &dyn Fn(f64) -> f64, sign: f64) -> f64 {
        let mut q = p + sign * dx / rate(p);
        for _ in 0..30 {
            let integral = sign * self.rule.integrate(p, q, rate);
            let step = (integral - dx) / rate(q);
            q -= sign * step;
            if step.abs() <= 1e-15 * (1.0 + q.abs()) {
                break;
            }
        }
        q
    }

    fn sample(&self, grid: &RadialGrid) -> Result<Vec<f64>> {
        let a = self.a;
        let rate_peak = |t: f64| self.rate_peak(t);
        let rate_tail = |y: f64| self.rate_tail(y);
        let x_switch = self.rule.integrate_panels(0.0, TAU_SWITCH, 32, rate_peak);
        let y_switch = (a * (1.0 - TAU_SWITCH * TAU_SWITCH)).ln();

        let mut values = Vec::with_capacity(grid.num_points);
        values.push(a);
        let (mut tau, mut x_tau) = (0.0, 0.0);
        let (mut y, mut x_y) = (y_switch, x_switch);
        for i in 1..grid.num_points {
            let x = grid.node(i);
            let z = if x <= x_switch {
                tau = self.advance(tau, x - x_tau, &rate_peak, 1.0);
                x_tau = x;
                a * (1.0 - tau * tau)
            } else {
                y = self.advance(y, x - x_y, &rate_tail, -1.0);
                x_y = x;
                y.exp()
            };
            if !z.is_finite() {
                return Err(Error::NoRoot(format!("inverse quadrature failed at r = {x}")));
            }
            values.push(z);
        }
        Ok(values)
    }
}

/// Shooting classification of a trial `u(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    /// `u` reaches zero: `u(0)` too large.
    Overshoot,
    /// `u'` turns positive while `u > 0`: `u(0)` too small.
    Undershoot,
    /// Neither happened before the end of the interval.
    Undecided,
}

const SHOOT_START: f64 = 1e-4;

struct Shooter {
    prob: ScalarProblem,
    r_end: f64,
}

impl Shooter {
    fn rhs(&self) -> impl Fn(f64, [f64; 2]) -> [f64; 2] + '_ {
        let nm1 = (self.prob.n - 1) as f64;
        move |r: f64, y: [f64; 2]| {
            [
                y[1],
                self.prob.lambda * y[0] - self.prob.nonlinearity(y[0]) - nm1 / r * y[1],
            ]
        }
    }

    /// Series start `u ≈ a + κr²/2`, `κ = (λa - f(a))/n`.
    fn start(&self, a: f64) -> [f64; 2] {
        let kappa = (self.prob.lambda * a - self.prob.nonlinearity(a)) / self.prob.n as f64;
        [a + 0.5 * kappa * SHOOT_START * SHOOT_START, kappa * SHOOT_START]
    }

    fn classify(&self, a: f64) -> Result<Shot> {
        let solver = Dopri5::new(self.rhs(), 1e-12, 1e-14 * a);
        let mut verdict = Shot::Undecided;
        solver.integrate(SHOOT_START, self.start(a), self.r_end, 1e-3, &[], |_, y, _| {
            if y[0] <= 0.0 {
                verdict = Shot::Overshoot;
                false
            } else if y[1] > 0.0 {
                verdict = Shot::Undershoot;
                false
            } else {
                true
            }
        })?;
        Ok(verdict)
    }

    /// Samples the trajectory at grid nodes until it is classified.
    fn trajectory(&self, a: f64, grid: &RadialGrid) -> Result<Vec<Option<f64>>> {
        let mut solver = Dopri5::new(self.rhs(), 1e-12, 1e-14 * a);
        solver.h_max = grid.spacing();
        let nodes = grid.nodes();
        let mut out = vec![None; grid.num_points];
        out[0] = Some(a);
        let mut idx = 1;
        solver.integrate(
            SHOOT_START,
            self.start(a),
            grid.r_max,
            1e-3,
            &nodes[1..],
            |_, y, at_stop| {
                if y[0] <= 0.0 || y[1] > 0.0 {
                    return false;
                }
                if at_stop {
                    out[idx] = Some(y[0]);
                    idx += 1;
                }
                true
            },
        )?;
        Ok(out)
    }
}

/// `u_s` for n = 2, 3 by shooting on `u(0)`.
///
/// The two bracketing trajectories are averaged while they agree; past the
/// radius where they separate (or fall below the tail floor) the profile
/// continues with the decaying solution `r^{-(n-1)/2} e^{-√λ r}` of the
/// linearized equation, matched in value.
pub fn ground_state_radial(prob: &ScalarProblem, grid: &RadialGrid) -> Result<RadialProfile> {
    prob.validate()?;
    if !(2..=3).contains(&prob.n) {
        return Err(Error::Domain(format!(
            "ground_state_radial requires n = 2 or 3, got {}",
            prob.n
        )));
    }
    let (lo, hi) = shoot_bracket(prob, grid.r_max.max(20.0 / prob.lambda.sqrt()))?;
    let shooter = Shooter {
        prob: *prob,
        r_end: grid.r_max,
    };
    let lower = shooter.trajectory(lo, grid)?;
    let upper = shooter.trajectory(hi, grid)?;
    let a = 0.5 * (lo + hi);
    let floor = 1e-9 * a;
    let mut values = vec![0.0; grid.num_points];
    values[0] = a;
    let mut cut = grid.num_points;
    for i in 1..grid.num_points {
        match (lower[i], upper[i]) {
            (Some(l), Some(u)) if (l - u).abs() <= 1e-6 * (l + u) && 0.5 * (l + u) > floor => {
                values[i] = 0.5 * (l + u);
            }
            _ => {
                cut = i;
                break;
            }
        }
    }
    if cut < 3 {
        return Err(Error::BracketNotFound { lo, hi });
    }
    let (r_c, u_c) = (grid.node(cut - 1), values[cut - 1]);
    let decay = |r: f64| r.powf(-0.5 * (prob.n - 1) as f64) * (-prob.lambda.sqrt() * r).exp();
    for (i, v) in values.iter_mut().enumerate().skip(cut) {
        *v = u_c * decay(grid.node(i)) / decay(r_c);
    }
    RadialProfile::new(*grid, values)
}

/// Returns `(lo, hi)` with `lo` undershooting and `hi` overshooting, `hi - lo`
/// at the resolution limit.
fn shoot_bracket(prob: &ScalarProblem, r_end: f64) -> Result<(f64, f64)> {
    let shooter = Shooter { prob: *prob, r_end };
    let b = prob.equilibrium();
    let mut lo = b;
    let mut hi = 2.0 * b;
    let mut guard = 0;
    loop {
        match shooter.classify(hi)? {
            Shot::Overshoot => break,
            _ => {
                lo = hi;
                hi *= 2.0;
            }
        }
        guard += 1;
        if guard > 60 {
            return Err(Error::BracketNotFound { lo: b, hi });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 4.0 * f64::EPSILON * hi || mid == lo || mid == hi {
            break;
        }
        match shooter.classify(mid)? {
            Shot::Overshoot => hi = mid,
            Shot::Undershoot => lo = mid,
            Shot::Undecided => {
                lo = mid;
                hi = mid;
                break;
            }
        }
    }
    Ok((lo, hi))
}

/// `u(0)` of the radial ground state from shooting alone.
pub fn shooting_peak(prob: &ScalarProblem) -> Result<f64> {
    prob.validate()?;
    let (lo, hi) = shoot_bracket(prob, 40.0 / prob.lambda.sqrt())?;
    Ok(0.5 * (lo + hi))
}

/// Continuum ground state: quadrature for n = 1, shooting for n = 2, 3.
pub fn ground_state(prob: &ScalarProblem, grid: &RadialGrid) -> Result<RadialProfile> {
    if prob.n == 1 {
        ground_state_1d(prob, grid)
    } else {
        ground_state_radial(prob, grid)
    }
}

/// Newton iteration on the discretized scalar equation (Dirichlet at `r_max`),
/// started from `init` or from [`ground_state`].
pub fn discrete_ground_state(
    prob: &ScalarProblem,
    grid: &RadialGrid,
    init: Option<&RadialProfile>,
) -> Result<RadialProfile> {
    prob.validate()?;
    let mut u = match init {
        Some(p) => p.values.clone(),
        None => ground_state(prob, grid)?.values,
    };
    let np = grid.num_points;
    u[np - 1] = 0.0;
    let st = RadialStencil::new(*grid, prob.n)?;
    let m = np - 1;
    let scale = 1.0 + prob.lambda * u[0].abs();
    let tol = 1e-12 * scale;
    let residual = |u: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|i| st.neg_laplacian_at(u, i) + prob.lambda * u[i] - prob.nonlinearity(u[i]))
            .collect()
    };
    let mut r = residual(&u);
    let mut rnorm = sup(&r);
    let mut iterations = 0;
    while rnorm > tol {
        if iterations >= 40 {
            return Err(Error::NewtonFailed {
                iterations,
                residual: rnorm,
            });
        }
        iterations += 1;
        // symmetric form: rows scaled by the shell measure
        let mut jac = BandMatrix::zeros(m, 1, 1);
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            let w = st.cell(i);
            jac.set(
                i,
                i,
                st.stiffness_diag(i) + w * (prob.lambda - prob.nonlinearity_du(u[i])),
            );
            if i + 1 < m {
                jac.set(i, i + 1, st.stiffness_off(i));
                jac.set(i + 1, i, st.stiffness_off(i));
            }
            rhs[i] = -w * r[i];
        }
        let lu = jac.factorize()?;
        lu.solve_in_place(&mut rhs);
        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = u
                .iter()
                .enumerate()
                .map(|(i, x)| if i < m { x + step * rhs[i] } else { 0.0 })
                .collect();
            let rt = residual(&trial);
            let nt = sup(&rt);
            if nt < rnorm || step < 1e-3 {
                if nt >= rnorm && nt > tol {
                    // stagnation at round-off level
                    if nt < 1e3 * tol {
                        return RadialProfile::new(*grid, u);
                    }
                    return Err(Error::NewtonFailed {
                        iterations,
                        residual: nt,
                    });
                }
                u = trial;
                r = rt;
                rnorm = nt;
                break;
            }
            step *= 0.5;
        }
    }
    RadialProfile::new(*grid, u)
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{residual, StatePair};

    fn prob(lambda: f64, c: f64, s: f64, n: usize) -> ScalarProblem {
        ScalarProblem::new(lambda, c, s, n).unwrap()
    }

    #[test]
    fn peak_limits() {
        let a0 = peak_amplitude_1d(&prob(1.0, 1.0, 0.0, 1)).unwrap();
        assert!((a0 - 2f64.sqrt()).abs() < 1e-15);
        let tiny = peak_amplitude_1d(&prob(1.0, 1.0, 1e-9, 1)).unwrap();
        assert!((tiny - 2f64.sqrt()).abs() < 1e-8);
        // mpmath reference: root of 4 ln(1 + t/2) = t
        let a = peak_amplitude_1d(&prob(1.0, 1.0, 0.5, 1)).unwrap();
        assert!((a - 2.241_812_845_557_068).abs() < 1e-12);
        let a99 = peak_amplitude_1d(&prob(1.0, 1.0, 0.99, 1)).unwrap();
        assert!(a99 > 10.0);
        assert!((a99 - 25.573_424_454_741_28).abs() < 1e-9);
    }

    #[test]
    fn window_violations() {
        assert!(matches!(
            ScalarProblem::new(1.0, 1.0, 1.0, 1),
            Err(Error::ExistenceWindow { .. })
        ));
        let bad = ScalarProblem {
            lambda: 2.0,
            coupling: 1.0,
            s: 0.6,
            n: 1,
        };
        assert!(peak_amplitude_1d(&bad).is_err());
        let grid = RadialGrid::new(10.0, 100).unwrap();
        assert!(ground_state_1d(&bad, &grid).is_err());
        assert!(peak_amplitude_1d(&prob(1.0, 1.0, 0.3, 2)).is_err());
    }

    #[test]
    fn peak_is_increasing_in_s() {
        let mut last = 0.0;
        for k in 0..50 {
            let s = 0.02 * k as f64;
            let a = peak_amplitude_1d(&prob(1.0, 1.0, s, 1)).unwrap();
            assert!(a > last);
            last = a;
        }
    }

    #[test]
    fn sech_profile() {
        let grid = RadialGrid::new(15.0, 4000).unwrap();
        let u = ground_state_1d(&prob(1.0, 1.0, 0.0, 1), &grid).unwrap();
        let err = grid
            .nodes()
            .iter()
            .zip(&u.values)
            .map(|(x, v)| (v - 2f64.sqrt() / x.cosh()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "sup error {err}");
    }

    #[test]
    fn profile_starts_at_peak_and_decreases() {
        let grid = RadialGrid::new(20.0, 1000).unwrap();
        for s in [0.1, 0.5, 0.9] {
            let p = prob(1.0, 1.0, s, 1);
            let u = ground_state_1d(&p, &grid).unwrap();
            assert!((u.values[0] - peak_amplitude_1d(&p).unwrap()).abs() < 1e-10);
            assert!(u.values.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
        }
    }

    #[test]
    fn one_d_profile_solves_discrete_equation() {
        let grid = RadialGrid::new(20.0, 40001).unwrap();
        let p = prob(1.0, 1.0, 0.5, 1);
        let u = ground_state_1d(&p, &grid).unwrap();
        let params = Params::new(1.0, 1.0, 1.0, 1.0, 0.5, 1).unwrap();
        let (ru, _) = residual(&StatePair::semitrivial_u(u), &params).unwrap();
        assert!(ru.sup_norm() < 1e-6, "residual {}", ru.sup_norm());
    }

    #[test]
    fn scaling_law_at_zero_saturation() {
        let grid = RadialGrid::new(20.0, 2001).unwrap();
        let (lambda, c) = (2.5, 0.7);
        let u = ground_state_1d(&prob(lambda, c, 0.0, 1), &grid).unwrap();
        for (x, v) in grid.nodes().iter().zip(&u.values) {
            let zeta = 2f64.sqrt() / (lambda.sqrt() * x).cosh();
            assert!((v - lambda.sqrt() / c * zeta).abs() < 1e-6);
        }
    }

    #[test]
    fn profiles_converge_as_s_decreases() {
        let grid = RadialGrid::new(15.0, 1500).unwrap();
        let u0 = ground_state_1d(&prob(1.0, 1.0, 0.0, 1), &grid).unwrap();
        let mut last = f64::INFINITY;
        for s in [0.2, 0.1, 0.05, 0.01, 0.001] {
            let us = ground_state_1d(&prob(1.0, 1.0, s, 1), &grid).unwrap();
            let d = us.distance(&u0).unwrap();
            assert!(d < last);
            last = d;
        }
        assert!(last < 5e-3);
    }

    #[test]
    fn shooting_three_dimensional_cubic() {
        // independent shooting oracle (scipy DOP853, rtol 1e-13): 4.337387679977
        let a = shooting_peak(&prob(1.0, 1.0, 0.0, 3)).unwrap();
        assert!((a - 4.337_387_68).abs() < 1e-6, "{a}");
        let a2 = shooting_peak(&prob(1.0, 1.0, 0.0, 2)).unwrap();
        assert!((a2 - 2.206_200_86).abs() < 1e-6, "{a2}");
    }

    #[test]
    fn radial_profile_shape_and_tail() {
        let grid = RadialGrid::new(40.0, 4001).unwrap();
        let p = prob(1.0, 1.0, 0.3, 3);
        let u = ground_state_radial(&p, &grid).unwrap();
        assert!(u.values.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
        let (i1, i2) = (2000, 2500); // r = 20, 25
        let slope = (u.values[i2].ln() - u.values[i1].ln()) / (grid.node(i2) - grid.node(i1));
        assert!((slope + 1.0).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn shooting_is_insensitive_to_initial_bracket() {
        let p = prob(1.0, 1.0, 0.4, 3);
        let a = shooting_peak(&p).unwrap();
        let far = shoot_bracket(&p, 40.0).unwrap();
        let shooter = Shooter { prob: p, r_end: 40.0 };
        // restart the bisection from a wider, perturbed bracket
        let (mut lo, mut hi) = (0.5 * p.equilibrium(), 3.0 * a);
        assert_eq!(shooter.classify(hi).unwrap(), Shot::Overshoot);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            match shooter.classify(mid).unwrap() {
                Shot::Overshoot => hi = mid,
                _ => lo = mid,
            }
        }
        assert!((0.5 * (lo + hi) - a).abs() < 1e-8);
        assert!((0.5 * (far.0 + far.1) - a).abs() < 1e-12);
    }

    #[test]
    fn discrete_polish_reduces_residual() {
        let grid = RadialGrid::new(20.0, 801).unwrap();
        for n in 1..=3 {
            let p = prob(1.0, 1.0, 0.5, n);
            let params = Params::new(1.0, 1.0, 1.0, 1.0, 0.5, n).unwrap();
            let u = discrete_ground_state(&p, &grid, None).unwrap();
            let r = crate::model::residual_sup_norm(&StatePair::semitrivial_u(u.clone()), &params).unwrap();
            assert!(r < 1e-9, "n={n} residual {r}");
            let cont = ground_state(&p, &grid).unwrap();
            assert!(u.distance(&cont).unwrap() < 1e-2);
        }
    }
}
