//! Periodic spatial grids. Axes with extent 1 are inactive; a `d < 3` grid is
//! a 3-axis grid with some extents equal to one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub extents: [usize; 3],
    /// Distance between neighbouring sites.
    pub spacing: f64,
}

impl Grid {
    pub fn new(extents: [usize; 3], spacing: f64) -> Result<Self> {
        if extents.iter().any(|&n| n == 0) {
            return Err(Error::InvalidGeometry(format!("zero extent in {extents:?}")));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidGeometry(format!("spacing must be positive, got {spacing}")));
        }
        Ok(Self { extents, spacing })
    }

    /// `n` sites along axis 3.
    pub fn line(n: usize, spacing: f64) -> Result<Self> {
        Self::new([1, 1, n], spacing)
    }

    /// `nx × ny` sites in the (1, 2) plane.
    pub fn plane(nx: usize, ny: usize, spacing: f64) -> Result<Self> {
        Self::new([nx, ny, 1], spacing)
    }

    pub fn sites(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn dimension(&self) -> usize {
        self.extents.iter().filter(|&&n| n > 1).count()
    }

    pub fn active_axes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..3).filter(|&k| self.extents[k] > 1)
    }

    /// Row-major with axis 1 slowest: `((x1 · n2) + x2) · n3 + x3`.
    pub fn index(&self, c: [usize; 3]) -> usize {
        (c[0] * self.extents[1] + c[1]) * self.extents[2] + c[2]
    }

    pub fn coords(&self, site: usize) -> [usize; 3] {
        let x3 = site % self.extents[2];
        let rest = site / self.extents[2];
        [rest / self.extents[1], rest % self.extents[1], x3]
    }

    /// Periodic neighbour `site + step · ê_axis`.
    pub fn shift(&self, site: usize, axis: usize, step: isize) -> usize {
        let mut c = self.coords(site);
        let n = self.extents[axis] as isize;
        c[axis] = (c[axis] as isize + step).rem_euclid(n) as usize;
        self.index(c)
    }

    /// Physical position of a site, centred so that the grid spans
    /// `[-n/2, n/2) · spacing` along each active axis and sits at 0 otherwise.
    pub fn position(&self, site: usize) -> [f64; 3] {
        let c = self.coords(site);
        let mut x = [0.0; 3];
        for k in 0..3 {
            if self.extents[k] > 1 {
                x[k] = (c[k] as f64 - (self.extents[k] / 2) as f64) * self.spacing;
            }
        }
        x
    }

    /// Lattice momenta `2π n / (N h)` with `n` in FFT order.
    pub fn momenta(&self, axis: usize) -> Vec<f64> {
        let n = self.extents[axis];
        let l = n as f64 * self.spacing;
        (0..n)
            .map(|j| {
                let signed = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                2.0 * std::f64::consts::PI * signed / l
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip_and_shift() {
        let g = Grid::new([2, 3, 4], 0.5).unwrap();
        for s in 0..g.sites() {
            assert_eq!(g.index(g.coords(s)), s);
        }
        let s = g.index([1, 2, 3]);
        assert_eq!(g.coords(g.shift(s, 2, 1)), [1, 2, 0]);
        assert_eq!(g.coords(g.shift(s, 1, -3)), [1, 2, 3]);
        assert_eq!(g.dimension(), 3);
    }

    #[test]
    fn positions_are_centred() {
        let g = Grid::line(4, 0.5).unwrap();
        let xs: Vec<f64> = (0..4).map(|s| g.position(s)[2]).collect();
        assert_eq!(xs, vec![-1.0, -0.5, 0.0, 0.5]);
        assert_eq!(g.position(0)[0], 0.0);
    }

    #[test]
    fn invalid() {
        assert!(Grid::new([0, 1, 1], 1.0).is_err());
        assert!(Grid::new([1, 1, 1], -1.0).is_err());
    }
}
