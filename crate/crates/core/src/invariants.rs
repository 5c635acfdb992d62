//! Conserved functionals and the scale-invariant ratios built from them.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{radial_gradient_norm_sq, Field, Gradient};
use crate::grid::GridKind;
use crate::groundstate::GroundState;
use crate::spectral::{derivative_wavenumbers, wavenumbers, Fft3};

/// Mass, energy, momentum and the derived `eta` of one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport {
    pub mass: f64,
    pub energy: f64,
    pub momentum: [f64; 3],
    pub grad_norm_sq: f64,
    pub l4_norm_4: f64,
    pub eta: f64,
}

impl InvariantReport {
    pub fn from_norms(mass: f64, grad_norm_sq: f64, l4_norm_4: f64, momentum: [f64; 3], q: &GroundState) -> Self {
        Self {
            mass,
            energy: 0.5 * grad_norm_sq - 0.25 * l4_norm_4,
            momentum,
            grad_norm_sq,
            l4_norm_4,
            eta: (mass * grad_norm_sq).sqrt() / q.eta_scale(),
        }
    }

    pub fn momentum_sq(&self) -> f64 {
        self.momentum.iter().map(|p| p * p).sum()
    }

    /// `M[u] E[u] / (M[Q] E[Q])`.
    pub fn me_ratio(&self, q: &GroundState) -> f64 {
        self.mass * self.energy / (q.mass_sq() * q.energy())
    }

    /// GN quotient `||u||_4^4 / (||u||_2 ||grad u||_2^3)`.
    pub fn gn_ratio(&self) -> Result<f64> {
        if !(self.mass > 0.0 && self.grad_norm_sq > 0.0) {
            return Err(Error::UndefinedRatio);
        }
        Ok(self.l4_norm_4 / (self.mass.sqrt() * self.grad_norm_sq.powf(1.5)))
    }
}

/// Quadratic and quartic norms of a field, independent of `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub mass: f64,
    pub grad_sq: f64,
    pub l4_4: f64,
    pub momentum: [f64; 3],
}

impl Norms {
    pub fn energy(&self) -> f64 {
        0.5 * self.grad_sq - 0.25 * self.l4_4
    }

    /// Right side of the virial identity, `24 E - 4 ||grad u||^2`.
    pub fn virial_rhs(&self) -> f64 {
        24.0 * self.energy() - 4.0 * self.grad_sq
    }

    pub fn report(&self, q: &GroundState) -> InvariantReport {
        InvariantReport::from_norms(self.mass, self.grad_sq, self.l4_4, self.momentum, q)
    }
}

/// Norms of `f`; periodic gradients and momenta come from Parseval sums
/// over the spectrum, so `fft` is reused when the caller has a plan.
pub(crate) fn norms_with(f: &Field, fft: Option<&Fft3>) -> Norms {
    let grid = f.grid();
    let mass = f.mass();
    let l4_4 = f.integrate(|v| v.norm_sqr() * v.norm_sqr());
    match grid.kind() {
        GridKind::Periodic3d => {
            let owned;
            let fft = match fft {
                Some(p) => p,
                None => {
                    owned = Fft3::new(grid.n());
                    &owned
                }
            };
            let mut hat = f.values().to_vec();
            fft.forward(&mut hat);
            let (grad_sq, momentum) = spectral_moments(&hat, grid.n(), grid.half_width(), grid.weight(0));
            Norms { mass, grad_sq, l4_4, momentum }
        }
        GridKind::Radial1d => Norms { mass, grad_sq: radial_gradient_norm_sq(f), l4_4, momentum: [0.0; 3] },
    }
}

/// `(||grad u||^2, P)` from an unnormalized spectrum `hat`.
pub(crate) fn spectral_moments(hat: &[Complex64], n: usize, half_width: f64, cell: f64) -> (f64, [f64; 3]) {
    let k = wavenumbers(n, half_width);
    let kd = derivative_wavenumbers(n, half_width);
    let mut grad = 0.0;
    let mut p = [0.0; 3];
    for (idx, v) in hat.iter().enumerate() {
        let (ix, iy, iz) = (idx % n, (idx / n) % n, idx / (n * n));
        let a = v.norm_sqr();
        grad += (k[ix] * k[ix] + k[iy] * k[iy] + k[iz] * k[iz]) * a;
        p[0] += kd[ix] * a;
        p[1] += kd[iy] * a;
        p[2] += kd[iz] * a;
    }
    let scale = cell / hat.len() as f64;
    (grad * scale, p.map(|c| c * scale))
}

pub fn norms(f: &Field) -> Result<Norms> {
    f.ensure_finite()?;
    Ok(norms_with(f, None))
}

/// Mass, energy, momentum, gradient and `L^4` norms, and `eta` of `f`.
///
/// Periodic fields are differentiated spectrally (Parseval on the FFT);
/// radial fields use the finite-difference form consistent with the radial
/// Laplacian.
pub fn compute_invariants(f: &Field, q: &GroundState) -> Result<InvariantReport> {
    f.ensure_finite()?;
    Ok(norms_with(f, None).report(q))
}

/// GN quotient `||f||_4^4 / (||f||_2 ||grad f||_2^3)`; bounded above by
/// `c_GN` with equality at `Q`.
pub fn gn_functional(f: &Field, q: &GroundState) -> Result<f64> {
    compute_invariants(f, q)?.gn_ratio()
}

/// Norms restricted to the exterior region `|x| >= R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExteriorNorms {
    pub radius: f64,
    pub mass: f64,
    pub grad_sq: f64,
    pub l4_4: f64,
}

pub(crate) fn exterior_norms_with(f: &Field, grad: &Gradient, radius: f64) -> ExteriorNorms {
    let grid = f.grid();
    let (mut m, mut g, mut l) = (0.0, 0.0, 0.0);
    for (i, u) in f.values().iter().enumerate() {
        let x = grid.position(i);
        if (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() < radius {
            continue;
        }
        let w = grid.weight(i);
        let a = u.norm_sqr();
        let du = grad.at(i);
        m += w * a;
        l += w * a * a;
        g += w * du.iter().map(Complex64::norm_sqr).sum::<f64>();
    }
    ExteriorNorms { radius, mass: m, grad_sq: g, l4_4: l }
}
