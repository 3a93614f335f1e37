//! Antisymmetric generators and rotation-preserving integrators.
//!
//! Two routes produce `R(t) = exp(tK)`:
//! - the dense matrix exponential, used below [`EXACT_DIM_LIMIT`] and as the
//!   reference everywhere else;
//! - a splitting of `K` into its elementary planar rotations
//!   `K_ij (e_i e_jᵀ - e_j e_iᵀ)`. Each factor is an exact Givens rotation, so
//!   every step is orthogonal to rounding. A symmetric sweep gives second
//!   order and the triple-jump composition fourth order.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Largest dimension for which the dense exponential is used automatically.
pub const EXACT_DIM_LIMIT: usize = 512;

/// Largest tolerated `max |K + Kᵀ|`.
pub const ANTISYMMETRY_TOL: f64 = 1e-13;

/// Real antisymmetric generator `K` of `∂_t q = K q`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionGenerator {
    matrix: SparseMatrix<f64>,
    /// Strict upper triangle `(i, j, K_ij)`, `i < j`.
    rotations: Vec<(usize, usize, f64)>,
}

impl EvolutionGenerator {
    pub fn new(matrix: SparseMatrix<f64>) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::DimensionMismatch { expected: matrix.rows(), got: matrix.cols() });
        }
        let defect = matrix.antisymmetry_defect();
        if !(defect < ANTISYMMETRY_TOL) {
            return Err(Error::NotAntisymmetric { defect });
        }
        let rotations = matrix.iter().filter(|&(r, c, _)| r < c).collect();
        Ok(Self { matrix, rotations })
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(SparseMatrix::from_dense(m))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &SparseMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, q: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(q)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.matrix.to_dense()
    }

    pub fn is_zero(&self) -> bool {
        self.rotations.is_empty()
    }

    /// Dense `exp(tK)`.
    pub fn propagator(&self, t: f64) -> DMatrix<f64> {
        (self.to_dense() * t).exp()
    }

    fn sweep(&self, q: &mut [f64], h: f64, forward: bool) {
        let rotate = |q: &mut [f64], &(i, j, k): &(usize, usize, f64)| {
            let (s, c) = (k * h).sin_cos();
            let (qi, qj) = (q[i], q[j]);
            q[i] = c * qi + s * qj;
            q[j] = -s * qi + c * qj;
        };
        if forward {
            self.rotations.iter().for_each(|r| rotate(q, r));
        } else {
            self.rotations.iter().rev().for_each(|r| rotate(q, r));
        }
    }

    /// One symmetric (second-order) splitting step.
    pub fn strang_step(&self, q: &mut [f64], h: f64) {
        self.sweep(q, 0.5 * h, true);
        self.sweep(q, 0.5 * h, false);
    }

    /// One fourth-order triple-jump step built from [`Self::strang_step`].
    pub fn yoshida_step(&self, q: &mut [f64], h: f64) {
        let cbrt2 = 2f64.cbrt();
        let w1 = 1.0 / (2.0 - cbrt2);
        let w0 = -cbrt2 / (2.0 - cbrt2);
        self.strang_step(q, w1 * h);
        self.strang_step(q, w0 * h);
        self.strang_step(q, w1 * h);
    }

    /// `n` fourth-order steps covering duration `t`.
    pub fn split_evolve(&self, q: &[f64], t: f64, n: usize) -> Vec<f64> {
        let mut out = q.to_vec();
        let h = t / n as f64;
        for _ in 0..n {
            self.yoshida_step(&mut out, h);
        }
        out
    }
}

/// How [`crate::ensemble::evolve`] applies `exp(tK)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Dense matrix exponential.
    Exact,
    /// Fourth-order rotation splitting with step doubling until the estimated
    /// error is below `tol` (max-norm).
    Splitting { tol: f64 },
    /// `Exact` below [`EXACT_DIM_LIMIT`], `Splitting` above.
    Auto { tol: f64 },
}

impl Default for Method {
    fn default() -> Self {
        Method::Auto { tol: 1e-10 }
    }
}

/// Outcome of a tolerance-controlled splitting run.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitReport {
    pub steps: usize,
    pub error_estimate: f64,
}

const MAX_SPLIT_STEPS: usize = 1 << 24;

/// Splitting evolution with step doubling. The returned state comes from the
/// finer of the last two runs; the estimate is their difference over 15.
pub fn split_with_tolerance(k: &EvolutionGenerator, q: &[f64], t: f64, tol: f64) -> (Vec<f64>, SplitReport) {
    if k.is_zero() || t == 0.0 {
        return (q.to_vec(), SplitReport { steps: 0, error_estimate: 0.0 });
    }
    let scale = k.matrix().norm_inf() * t.abs();
    let mut n = (scale / 0.5).ceil().max(1.0) as usize;
    let mut coarse = k.split_evolve(q, t, n);
    loop {
        let fine = k.split_evolve(q, t, 2 * n);
        let diff = coarse.iter().zip(&fine).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let est = diff / 15.0;
        if est <= tol || 2 * n >= MAX_SPLIT_STEPS {
            return (fine, SplitReport { steps: 2 * n, error_estimate: est });
        }
        n *= 2;
        coarse = fine;
    }
}

/// Applies a dense propagator.
pub fn apply_dense(r: &DMatrix<f64>, q: &[f64]) -> Vec<f64> {
    (r * DVector::from_column_slice(q)).as_slice().to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(omega: f64) -> EvolutionGenerator {
        EvolutionGenerator::new(SparseMatrix::from_triplets(2, 2, [(0, 1, omega), (1, 0, -omega)])).unwrap()
    }

    #[test]
    fn rejects_symmetric_part() {
        let s = SparseMatrix::from_triplets(2, 2, [(0, 1, 1.0), (1, 0, 1.0)]);
        assert!(matches!(EvolutionGenerator::new(s), Err(Error::NotAntisymmetric { .. })));
    }

    #[test]
    fn single_rotation_is_exact() {
        // one planar generator: the splitting is the exact rotation
        let k = two_state(1.3);
        let q = k.split_evolve(&[0.6, 0.8], 0.7, 1);
        let (s, c) = (1.3f64 * 0.7).sin_cos();
        assert!((q[0] - (c * 0.6 + s * 0.8)).abs() < 1e-15);
        assert!((q[1] - (-s * 0.6 + c * 0.8)).abs() < 1e-15);
    }

    #[test]
    fn fourth_order_convergence() {
        let k = EvolutionGenerator::from_dense(&DMatrix::from_row_slice(
            3,
            3,
            &[0.0, 1.0, 0.5, -1.0, 0.0, -0.7, -0.5, 0.7, 0.0],
        ))
        .unwrap();
        let q0 = [1.0, 0.0, 0.0];
        let exact = apply_dense(&k.propagator(2.0), &q0);
        let err = |n| {
            k.split_evolve(&q0, 2.0, n)
                .iter()
                .zip(&exact)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        };
        let ratio = err(20) / err(40);
        assert!(ratio > 12.0 && ratio < 20.0, "observed ratio {ratio}");
    }
}
