#![allow(dead_code)]

use proptest::prelude::*;
use satnls_core::{Params, RadialGrid, RadialProfile, StatePair};

/// Shape coefficients of a smooth decaying random profile.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub amp: f64,
    pub width: f64,
    pub freq: f64,
    pub mix: f64,
}

impl Shape {
    pub fn profile(&self, grid: RadialGrid) -> RadialProfile {
        RadialProfile::from_fn(grid, |r| {
            self.amp * (1.0 + self.mix * (self.freq * r).cos()) / (r / self.width).cosh()
        })
    }
}

pub fn shape(amp: std::ops::Range<f64>) -> impl Strategy<Value = Shape> {
    (amp, 0.7..2.5f64, 0.0..3.0f64, -0.5..0.5f64).prop_map(|(amp, width, freq, mix)| Shape { amp, width, freq, mix })
}

pub fn state(grid: RadialGrid, a: Shape, b: Shape) -> StatePair {
    StatePair::new(a.profile(grid), b.profile(grid)).unwrap()
}

pub fn params() -> impl Strategy<Value = Params> {
    (
        0.3..2.0f64,
        0.2..2.0f64,
        0.3..2.0f64,
        0.3..2.0f64,
        0.0..0.9f64,
        1usize..=3,
    )
        .prop_map(|(l1, l2, a, b, frac, n)| {
            let s = frac * (a / l1).min(b / l2);
            Params::new(l1, l2, a, b, s, n).unwrap()
        })
}

pub fn quarter(s: f64) -> Params {
    Params::new(1.0, 0.25, 1.0, 1.0, s, 1).unwrap()
}

pub fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
