use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// One sublattice of the space-time lattice at a fixed time: a periodic grid
/// with spacing `2Δ`, plus the time step `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeGeometry {
    pub grid: Grid,
    pub delta: f64,
    pub eps: f64,
    pub parity: Parity,
}

impl LatticeGeometry {
    /// Sites per axis along `extents`; spacing between sites is `2Δ`.
    pub fn new(extents: [usize; 3], delta: f64, eps: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidGeometry(format!("delta must be positive, got {delta}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidGeometry(format!("eps must be positive, got {eps}")));
        }
        Ok(Self { grid: Grid::new(extents, 2.0 * delta)?, delta, eps, parity: Parity::Even })
    }

    /// `L³/8` sites: `L/2` along each axis.
    pub fn cubic(l: usize, delta: f64, eps: f64) -> Result<Self> {
        if l == 0 || l % 2 != 0 {
            return Err(Error::InvalidGeometry(format!("L must be even and positive, got {l}")));
        }
        Self::new([l / 2; 3], delta, eps)
    }

    /// Reduced geometry with `n` sites along axis 3 only.
    pub fn chain(n: usize, delta: f64, eps: f64) -> Result<Self> {
        Self::new([1, 1, n], delta, eps)
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }

    pub fn sites(&self) -> usize {
        self.grid.sites()
    }

    pub fn extents(&self) -> [usize; 3] {
        self.grid.extents
    }

    /// Site coordinates in units of `Δ`; odd sublattice sites sit at odd
    /// multiples.
    pub fn coords_in_delta(&self, site: usize) -> [i64; 3] {
        let off = match self.parity {
            Parity::Even => 0,
            Parity::Odd => 1,
        };
        self.grid.coords(site).map(|c| 2 * c as i64 + off)
    }

    /// With `ε = Δ` the two sublattices form the bcc fundamental lattice.
    pub fn is_bcc(&self) -> bool {
        (self.eps - self.delta).abs() <= 1e-15 * self.delta
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_counts() {
        let g = LatticeGeometry::cubic(8, 0.5, 0.5).unwrap();
        assert_eq!(g.sites(), 64);
        assert_eq!(g.grid.spacing, 1.0);
        assert!(g.is_bcc());
        assert!(LatticeGeometry::cubic(3, 1.0, 1.0).is_err());
        assert!(LatticeGeometry::chain(4, 0.0, 1.0).is_err());
    }

    #[test]
    fn sublattice_coordinates() {
        let g = LatticeGeometry::chain(3, 1.0, 1.0).unwrap();
        assert_eq!(g.coords_in_delta(2), [0, 0, 4]);
        assert_eq!(g.with_parity(Parity::Odd).coords_in_delta(2), [1, 1, 5]);
    }
}
