//! Multi-dimensional FFTs over a [`Grid`], one axis at a time.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

pub struct GridFft {
    grid: Grid,
    plans: Vec<(usize, Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
}

impl std::fmt::Debug for GridFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridFft").field("grid", &self.grid).finish()
    }
}

impl GridFft {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let plans = grid
            .active_axes()
            .map(|k| {
                let n = grid.extents[k];
                (k, planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
            })
            .collect();
        Self { grid, plans }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn run(&self, data: &mut [Complex64], forward: bool) {
        assert_eq!(data.len(), self.grid.sites());
        let ext = self.grid.extents;
        let strides = [ext[1] * ext[2], ext[2], 1];
        for (axis, fwd, inv) in &self.plans {
            let plan = if forward { fwd } else { inv };
            let n = ext[*axis];
            let stride = strides[*axis];
            let mut line = vec![Complex64::default(); n];
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            for start in 0..data.len() {
                // first element of each line along `axis`
                if (start / stride) % n != 0 {
                    continue;
                }
                for (j, l) in line.iter_mut().enumerate() {
                    *l = data[start + j * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (j, l) in line.iter().enumerate() {
                    data[start + j * stride] = *l;
                }
            }
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, true);
    }

    /// Normalized inverse: `inverse(forward(x)) = x`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, false);
        let s = 1.0 / self.grid.sites() as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    /// Momentum vector of every Fourier index, in data order.
    pub fn momenta(&self) -> Vec<[f64; 3]> {
        let m: Vec<Vec<f64>> = (0..3).map(|k| self.grid.momenta(k)).collect();
        (0..self.grid.sites())
            .map(|s| {
                let c = self.grid.coords(s);
                [m[0][c[0]], m[1][c[1]], m[2][c[2]]]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_plane_wave() {
        let grid = Grid::new([4, 1, 6], 0.5).unwrap();
        let fft = GridFft::new(grid);
        let p = fft.momenta();
        let target = grid.index([1, 0, 5]);
        let mut data: Vec<Complex64> = (0..grid.sites())
            .map(|s| {
                let x = grid.position(s);
                let ph = p[target][0] * x[0] + p[target][2] * x[2];
                Complex64::from_polar(1.0, ph)
            })
            .collect();
        let orig = data.clone();
        fft.forward(&mut data);
        let peak = data.iter().map(|z| z.norm()).enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
        assert_eq!(peak, target);
        fft.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
