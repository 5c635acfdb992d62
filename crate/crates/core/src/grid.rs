use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridKind {
    /// Periodic box `[-L, L)^3` with `n` cells per axis, sampled at cell
    /// midpoints.
    Periodic3d,
    /// Radial abscissae `r_i = (i + 1) * r_max / n`, `i = 0..n`.
    Radial1d,
}

impl GridKind {
    pub fn code(self) -> u8 {
        match self {
            GridKind::Periodic3d => 0,
            GridKind::Radial1d => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(GridKind::Periodic3d),
            1 => Some(GridKind::Radial1d),
            _ => None,
        }
    }
}

impl fmt::Display for GridKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridKind::Periodic3d => f.write_str("periodic3d"),
            GridKind::Radial1d => f.write_str("radial1d"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    kind: GridKind,
    n: usize,
    half_width: f64,
}

impl Grid {
    pub fn new(kind: GridKind, n: usize, half_width: f64) -> Result<Self> {
        match kind {
            GridKind::Periodic3d => Self::periodic(n, half_width),
            GridKind::Radial1d => Self::radial(n, half_width),
        }
    }

    pub fn periodic(n: usize, half_width: f64) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("periodic n = {n} must be a power of two >= 2")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half-width {half_width} must be positive")));
        }
        Ok(Self { kind: GridKind::Periodic3d, n, half_width })
    }

    pub fn radial(n: usize, r_max: f64) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidGrid(format!("radial n = {n} is too small")));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidGrid(format!("r_max {r_max} must be positive")));
        }
        Ok(Self { kind: GridKind::Radial1d, n, half_width: r_max })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `L` for the periodic box, `r_max` for the radial grid.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        match self.kind {
            GridKind::Periodic3d => 2.0 * self.half_width / self.n as f64,
            GridKind::Radial1d => self.half_width / self.n as f64,
        }
    }

    pub fn len(&self) -> usize {
        match self.kind {
            GridKind::Periodic3d => self.n * self.n * self.n,
            GridKind::Radial1d => self.n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_radial(&self) -> bool {
        self.kind == GridKind::Radial1d
    }

    /// Coordinate of index `i` along one periodic axis: the midpoint of the
    /// `i`-th cell of `[-L, L)`.
    pub fn axis_coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    /// Radius of radial index `i`.
    pub fn radius(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.spacing()
    }

    /// Position of flat sample index `idx` (radial samples sit on the x axis).
    pub fn position(&self, idx: usize) -> [f64; 3] {
        match self.kind {
            GridKind::Periodic3d => {
                let n = self.n;
                [
                    self.axis_coord(idx % n),
                    self.axis_coord((idx / n) % n),
                    self.axis_coord(idx / (n * n)),
                ]
            }
            GridKind::Radial1d => [self.radius(idx), 0.0, 0.0],
        }
    }

    /// Quadrature weight of flat sample `idx`: midpoint cell volume in 3D,
    /// trapezoid weight with the `4 pi r^2` measure in radial mode.
    pub fn weight(&self, idx: usize) -> f64 {
        let h = self.spacing();
        match self.kind {
            GridKind::Periodic3d => h * h * h,
            GridKind::Radial1d => {
                let r = self.radius(idx);
                let w = 4.0 * std::f64::consts::PI * r * r * h;
                if idx + 1 == self.n {
                    0.5 * w
                } else {
                    w
                }
            }
        }
    }

    /// Largest radius for which the ball is fully inside the domain.
    pub fn inscribed_radius(&self) -> f64 {
        self.half_width
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::periodic(12, 1.0).is_err());
        assert!(Grid::periodic(16, 0.0).is_err());
        assert!(Grid::radial(2, 1.0).is_err());
        assert!(Grid::radial(64, -1.0).is_err());
    }

    #[test]
    fn spacing_and_positions() {
        let g = Grid::periodic(8, 4.0).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.len(), 512);
        assert_eq!(g.position(0), [-3.5, -3.5, -3.5]);
        assert_eq!(g.position(4 + 8 * 4 + 64 * 4), [0.5, 0.5, 0.5]);
        let r = Grid::radial(10, 5.0).unwrap();
        assert_eq!(r.spacing(), 0.5);
        assert_eq!(r.radius(0), 0.5);
        assert_eq!(r.radius(9), 5.0);
    }
}
