//! Sampled wavefunctions and the pointwise derivative machinery shared by the
//! quadrature-based functionals.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridKind};
use crate::spectral::{derivative_wavenumbers, Fft3};

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
    t: f64,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<Complex64>, t: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DegenerateInput(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, t })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![Complex64::default(); grid.len()], t: 0.0 }
    }

    /// Samples `f(x)` at every grid position (radial samples at `(r, 0, 0)`).
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self { grid, values, t: 0.0 }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn set_time(&mut self, t: f64) {
        self.t = t;
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::DegenerateInput("field contains non-finite samples".into()))
        }
    }

    /// Weighted sum `sum_i w_i g(u_i)` over the grid quadrature.
    pub fn integrate(&self, g: impl Fn(Complex64) -> f64) -> f64 {
        let mut acc = 0.0;
        match self.grid.kind() {
            GridKind::Periodic3d => {
                for v in &self.values {
                    acc += g(*v);
                }
                acc * self.grid.weight(0)
            }
            GridKind::Radial1d => {
                for (i, v) in self.values.iter().enumerate() {
                    acc += self.grid.weight(i) * g(*v);
                }
                acc
            }
        }
    }

    pub fn mass(&self) -> f64 {
        self.integrate(|v| v.norm_sqr())
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// Multiplies by the global phase `e^{i theta}`.
    pub fn with_phase(&self, theta: f64) -> Self {
        self.scaled(Complex64::from_polar(1.0, theta))
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = v.conj());
        out
    }

    /// Periodic shift by whole grid cells: `out(x) = self(x - shift * h)`.
    pub fn rolled(&self, shift: [i64; 3]) -> Result<Self> {
        if self.grid.kind() != GridKind::Periodic3d {
            return Err(Error::WrongMode { expected: "periodic3d" });
        }
        let n = self.grid.n();
        let wrap = |i: usize, s: i64| ((i as i64 - s).rem_euclid(n as i64)) as usize;
        let mut out = vec![Complex64::default(); self.values.len()];
        for iz in 0..n {
            for iy in 0..n {
                for ix in 0..n {
                    let src = wrap(ix, shift[0]) + n * (wrap(iy, shift[1]) + n * wrap(iz, shift[2]));
                    out[ix + n * (iy + n * iz)] = self.values[src];
                }
            }
        }
        Ok(Self { grid: self.grid, values: out, t: self.t })
    }

    /// Fraction of the mass sitting where `max_i |x_i| >= 0.9 L` (periodic) or
    /// `r >= 0.9 r_max` (radial).
    pub fn outer_shell_mass_fraction(&self) -> f64 {
        let total = self.mass();
        if total == 0.0 {
            return 0.0;
        }
        let edge = 0.9 * self.grid.half_width();
        let mut shell = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let x = self.grid.position(i);
            let outer = match self.grid.kind() {
                GridKind::Periodic3d => x.iter().any(|c| c.abs() >= edge),
                GridKind::Radial1d => x[0] >= edge,
            };
            if outer {
                shell += self.grid.weight(i) * v.norm_sqr();
            }
        }
        shell / total
    }
}

/// Pointwise gradient of a field.
///
/// Periodic fields carry three Cartesian components obtained spectrally;
/// radial fields carry the single radial derivative `u'(r)`.
#[derive(Debug, Clone)]
pub enum Gradient {
    Cartesian([Vec<Complex64>; 3]),
    Radial(Vec<Complex64>),
}

impl Gradient {
    pub fn of(field: &Field) -> Self {
        Self::with_plan(field, None)
    }

    pub(crate) fn with_plan(field: &Field, fft: Option<&Fft3>) -> Self {
        match (field.grid().kind(), fft) {
            (GridKind::Periodic3d, Some(fft)) => Gradient::Cartesian(spectral_gradient(field, fft)),
            (GridKind::Periodic3d, None) => Gradient::Cartesian(spectral_gradient(field, &Fft3::new(field.grid().n()))),
            (GridKind::Radial1d, _) => Gradient::Radial(radial_derivative(field)),
        }
    }

    /// Gradient vector at flat index `i`; radial gradients point along `+x`,
    /// matching [`Grid::position`].
    #[inline]
    pub fn at(&self, i: usize) -> [Complex64; 3] {
        match self {
            Gradient::Cartesian(g) => [g[0][i], g[1][i], g[2][i]],
            Gradient::Radial(d) => [d[i], Complex64::default(), Complex64::default()],
        }
    }
}

pub(crate) fn spectral_gradient(field: &Field, fft: &Fft3) -> [Vec<Complex64>; 3] {
    let grid = field.grid();
    let n = grid.n();
    let k = derivative_wavenumbers(n, grid.half_width());
    let mut hat = field.values().to_vec();
    fft.forward(&mut hat);
    let component = |axis: usize| {
        let mut out = hat.clone();
        for (idx, v) in out.iter_mut().enumerate() {
            let i = match axis {
                0 => idx % n,
                1 => (idx / n) % n,
                _ => idx / (n * n),
            };
            *v *= Complex64::new(0.0, k[i]);
        }
        fft.inverse(&mut out);
        out
    };
    [component(0), component(1), component(2)]
}

/// Second-order radial derivative with the even extension through `r = 0`
/// (using `u(0) = (4 u_0 - u_1) / 3`) and `u = 0` beyond `r_max`.
pub(crate) fn radial_derivative(field: &Field) -> Vec<Complex64> {
    let u = field.values();
    let n = u.len();
    let h = field.grid().spacing();
    let mut d = vec![Complex64::default(); n];
    d[0] = (u[1] - u[0]) * (2.0 / (3.0 * h));
    for i in 1..n - 1 {
        d[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
    }
    d[n - 1] = -u[n - 2] / (2.0 * h);
    d
}

/// `||grad u||^2` in radial mode from the staggered differences of
/// `v = r u` (with `v = 0` at the origin), the quadratic form that matches
/// the discrete Laplacian used by the evolution.
pub(crate) fn radial_gradient_norm_sq(field: &Field) -> f64 {
    let grid = field.grid();
    let h = grid.spacing();
    let mut prev = Complex64::default();
    let mut acc = 0.0;
    for (i, u) in field.values().iter().enumerate() {
        let v = *u * grid.radius(i);
        acc += (v - prev).norm_sqr();
        prev = v;
    }
    4.0 * std::f64::consts::PI * acc / h
}
