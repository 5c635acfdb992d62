#![allow(dead_code)]

use std::sync::OnceLock;

use nlslab::{solve_ground_state, Field, GroundState, Grid};
use num_complex::Complex64;
use rand::Rng;

/// `Q` at the default resolution, solved once per test binary.
pub fn q() -> &'static GroundState {
    static Q: OnceLock<GroundState> = OnceLock::new();
    Q.get_or_init(|| solve_ground_state(20.0, 16384, 1e-12).unwrap())
}

/// One Gaussian lump `amp exp(-|x - c|^2 / (2 w^2) + i k.x)`.
#[derive(Debug, Clone, Copy)]
pub struct Lump {
    pub amp: Complex64,
    pub center: [f64; 3],
    pub width: f64,
    pub kick: [f64; 3],
}

impl Lump {
    pub fn at(&self, x: [f64; 3]) -> Complex64 {
        let mut d2 = 0.0;
        let mut phase = 0.0;
        for j in 0..3 {
            d2 += (x[j] - self.center[j]).powi(2);
            phase += self.kick[j] * x[j];
        }
        self.amp * (-0.5 * d2 / (self.width * self.width)).exp() * Complex64::from_polar(1.0, phase)
    }
}

/// A few lumps, well inside a box of half-width 8 and resolved at spacing 0.25.
pub fn random_lumps(rng: &mut impl Rng, kicked: bool) -> Vec<Lump> {
    let k = rng.gen_range(1..=3);
    (0..k)
        .map(|_| Lump {
            amp: Complex64::from_polar(rng.gen_range(0.2..2.0), rng.gen_range(0.0..std::f64::consts::TAU)),
            center: [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)],
            width: rng.gen_range(0.8..1.4),
            kick: if kicked {
                [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]
            } else {
                [0.0; 3]
            },
        })
        .collect()
}

pub fn lumps_field(grid: Grid, lumps: &[Lump]) -> Field {
    Field::from_fn(grid, |x| lumps.iter().map(|l| l.at(x)).sum())
}

pub fn gaussian(grid: Grid, amp: f64, width: f64) -> Field {
    let s = 0.5 / (width * width);
    Field::from_fn(grid, |x| Complex64::new(amp * (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) * s).exp(), 0.0))
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
