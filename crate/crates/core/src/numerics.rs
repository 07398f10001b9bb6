//! Small numerical kernels: Gauss–Legendre rules, scalar bisection and a
//! Dormand–Prince 5(4) integrator for two-dimensional first-order systems.

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = mf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[m - 1 - i] = w[i];
    }
    (x, w)
}

/// Fixed Gauss–Legendre rule mapped to arbitrary intervals.
#[derive(Debug, Clone)]
pub struct GaussRule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl GaussRule {
    pub fn new(m: usize) -> Self {
        let (x, w) = gauss_legendre(m);
        GaussRule { x, w }
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let c = 0.5 * (a + b);
        let d = 0.5 * (b - a);
        d * self.x.iter().zip(&self.w).map(|(x, w)| w * f(c + d * x)).sum::<f64>()
    }

    /// Composite rule on `panels` equal subintervals.
    pub fn integrate_panels(&self, a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| self.integrate(a + k as f64 * h, a + (k + 1) as f64 * h, &f))
            .sum()
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`, stopping when the
/// bracket is narrower than `xtol` (absolute) or `rtol·|x|`.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, xtol: f64, rtol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::NoRoot(format!("no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol.max(rtol * mid.abs()) || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

pub type State2 = [f64; 2];

#[inline]
fn axpy(y: State2, terms: &[(f64, State2)], h: f64) -> State2 {
    let mut out = y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Adaptive Dormand–Prince integrator for `y' = f(t, y)` with `y ∈ ℝ²`.
pub struct Dopri5<F: Fn(f64, State2) -> State2> {
    f: F,
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
}

impl<F: Fn(f64, State2) -> State2> Dopri5<F> {
    pub fn new(f: F, rtol: f64, atol: f64) -> Self {
        Dopri5 {
            f,
            rtol,
            atol,
            h_max: f64::INFINITY,
        }
    }

    /// Integrates from `t0` to `t_end`, calling `observe(t, y)` after every
    /// accepted step and at every `stops` time (sorted ascending, each hit
    /// exactly). Integration ends early when `observe` returns `false`.
    pub fn integrate(
        &self,
        t0: f64,
        y0: State2,
        t_end: f64,
        h0: f64,
        stops: &[f64],
        mut observe: impl FnMut(f64, State2, bool) -> bool,
    ) -> Result<(f64, State2)> {
        let mut t = t0;
        let mut y = y0;
        let mut h = h0.min(self.h_max);
        let mut k1 = (self.f)(t, y);
        let mut stop_idx = stops.partition_point(|&s| s <= t0);
        let mut steps = 0usize;
        while t < t_end {
            steps += 1;
            if steps > 5_000_000 {
                return Err(Error::NoRoot("ODE integration exceeded step budget".into()));
            }
            let target = if stop_idx < stops.len() {
                stops[stop_idx].min(t_end)
            } else {
                t_end
            };
            let mut hit = false;
            if t + h >= target {
                h = target - t;
                hit = true;
            }
            let k2 = (self.f)(t + C2 * h, axpy(y, &[(A21, k1)], h));
            let k3 = (self.f)(t + C3 * h, axpy(y, &[(A31, k1), (A32, k2)], h));
            let k4 = (self.f)(t + C4 * h, axpy(y, &[(A41, k1), (A42, k2), (A43, k3)], h));
            let k5 = (self.f)(t + C5 * h, axpy(y, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)], h));
            let k6 = (self.f)(
                t + h,
                axpy(y, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)], h),
            );
            let y5 = axpy(y, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)], h);
            let k7 = (self.f)(t + h, y5);
            let mut err = 0.0f64;
            for c in 0..2 {
                let e = h * (E1 * k1[c] + E3 * k3[c] + E4 * k4[c] + E5 * k5[c] + E6 * k6[c] + E7 * k7[c]);
                let sc = self.atol + self.rtol * y[c].abs().max(y5[c].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                h *= 0.1;
                if h < 1e-300 {
                    return Err(Error::NoRoot("ODE step size underflow".into()));
                }
                continue;
            }
            if err <= 1.0 {
                t = if hit { target } else { t + h };
                y = y5;
                k1 = k7;
                let at_stop = hit && stop_idx < stops.len() && target == stops[stop_idx];
                if at_stop {
                    stop_idx += 1;
                }
                if !observe(t, y, at_stop) {
                    return Ok((t, y));
                }
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = (h * fac).min(self.h_max);
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < 1e-300 {
                    return Err(Error::NoRoot("ODE step size underflow".into()));
                }
            }
        }
        Ok((t, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exactness() {
        let rule = GaussRule::new(8);
        // exact for degree 15
        let val = rule.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((val - 2f64.powi(16) / 16.0).abs() < 1e-9);
        let (_, w) = gauss_legendre(5);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let val = rule.integrate_panels(0.0, std::f64::consts::PI, 4, f64::sin);
        assert!((val - 2.0).abs() < 1e-14);
    }

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 0.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        assert!(bisect(|x| x * x + 1.0, 0.0, 2.0, 1e-12, 0.0).is_err());
    }

    #[test]
    fn dopri_harmonic_oscillator() {
        let solver = Dopri5::new(|_t, y: State2| [y[1], -y[0]], 1e-12, 1e-14);
        let stops = [1.0, 2.0, 3.0];
        let mut seen = Vec::new();
        let (t, y) = solver
            .integrate(0.0, [1.0, 0.0], 3.0, 0.01, &stops, |t, y, at| {
                if at {
                    seen.push((t, y[0]));
                }
                true
            })
            .unwrap();
        assert_eq!(t, 3.0);
        assert!((y[0] - 3f64.cos()).abs() < 1e-10);
        assert_eq!(seen.len(), 3);
        for (t, v) in seen {
            assert!((v - t.cos()).abs() < 1e-10);
        }
    }
}
