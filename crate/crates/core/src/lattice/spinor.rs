//! Real 4×4 spinor matrices: `T_k`, `Ĩ`, the Majorana-basis `γ^μ` and `γ̄`.

use nalgebra::Matrix4;
use num_complex::Complex64;

pub type Mat4 = Matrix4<f64>;
pub type CMat4 = Matrix4<Complex64>;

/// Minkowski metric `diag(-1, 1, 1, 1)`.
pub const ETA: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct SpinorAlgebra {
    /// Real symmetric `T_1, T_2, T_3`.
    pub t: [Mat4; 3],
    /// `Ĩ = T_1 T_2 T_3`, real antisymmetric.
    pub i_tilde: Mat4,
    /// Real Dirac matrices `γ^0..γ^3`.
    pub gamma: [Mat4; 4],
    /// `γ̄ = -iγ^0γ^1γ^2γ^3` is imaginary here; this holds its imaginary
    /// part, so `γ̄ = i · gamma_bar_im`.
    pub gamma_bar_im: Mat4,
}

fn blocks(a: [[f64; 2]; 2], b: [[f64; 2]; 2], c: [[f64; 2]; 2], d: [[f64; 2]; 2]) -> Mat4 {
    #[rustfmt::skip]
    let m = Mat4::new(
        a[0][0], a[0][1], b[0][0], b[0][1],
        a[1][0], a[1][1], b[1][0], b[1][1],
        c[0][0], c[0][1], d[0][0], d[0][1],
        c[1][0], c[1][1], d[1][0], d[1][1],
    );
    m
}

const ZERO: [[f64; 2]; 2] = [[0.0, 0.0], [0.0, 0.0]];
const ONE: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];
const MINUS_ONE: [[f64; 2]; 2] = [[-1.0, 0.0], [0.0, -1.0]];
/// `c = iτ_2`.
const C: [[f64; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];
const MINUS_C: [[f64; 2]; 2] = [[0.0, -1.0], [1.0, 0.0]];
const TAU1: [[f64; 2]; 2] = [[0.0, 1.0], [1.0, 0.0]];
const MINUS_TAU1: [[f64; 2]; 2] = [[0.0, -1.0], [-1.0, 0.0]];

pub fn complexify(m: &Mat4) -> CMat4 {
    m.map(|x| Complex64::new(x, 0.0))
}

impl SpinorAlgebra {
    pub fn build() -> Self {
        let t1 = blocks(ZERO, ONE, ONE, ZERO);
        let t2 = blocks(ZERO, C, MINUS_C, ZERO);
        let t3 = blocks(ONE, ZERO, ZERO, MINUS_ONE);
        let i_tilde = t1 * t2 * t3;
        let g0 = blocks(ZERO, TAU1, MINUS_TAU1, ZERO);
        let gamma = [g0, -g0 * t1, -g0 * t2, -g0 * t3];
        let gamma_bar_im = -(gamma[0] * gamma[1] * gamma[2] * gamma[3]);
        Self { t: [t1, t2, t3], i_tilde, gamma, gamma_bar_im }
    }

    /// `γ̄` as a complex matrix.
    pub fn gamma_bar(&self) -> CMat4 {
        self.gamma_bar_im.map(|x| Complex64::new(0.0, x))
    }

    /// `γ^0 Ĩ`, the real antisymmetric mass matrix of the generator.
    pub fn mass_matrix(&self) -> Mat4 {
        self.gamma[0] * self.i_tilde
    }

    /// `γ^0 γ̄`, hermitean with square one.
    pub fn beta(&self) -> CMat4 {
        complexify(&self.gamma[0]) * self.gamma_bar()
    }

    /// `max |{γ^μ, γ^ν} - 2η^{μν}|` over all pairs.
    pub fn clifford_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for mu in 0..4 {
            for nu in mu..4 {
                let anti = self.gamma[mu] * self.gamma[nu] + self.gamma[nu] * self.gamma[mu];
                let target = if mu == nu { Mat4::identity() * (2.0 * ETA[mu]) } else { Mat4::zeros() };
                worst = worst.max((anti - target).amax());
            }
        }
        worst
    }
}

impl Default for SpinorAlgebra {
    fn default() -> Self {
        Self::build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t1_block_form() {
        let a = SpinorAlgebra::build();
        #[rustfmt::skip]
        let expected = Mat4::new(
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
        );
        assert_eq!(a.t[0], expected);
    }

    #[test]
    fn i_tilde_is_minus_block_c() {
        let a = SpinorAlgebra::build();
        assert_eq!(a.i_tilde, blocks(MINUS_C, ZERO, ZERO, MINUS_C));
        assert_eq!(a.i_tilde.transpose(), -a.i_tilde);
        assert_eq!(a.i_tilde * a.i_tilde, -Mat4::identity());
    }

    #[test]
    fn symmetric_anticommuting_t() {
        let a = SpinorAlgebra::build();
        for j in 0..3 {
            assert_eq!(a.t[j].transpose(), a.t[j]);
            for k in 0..3 {
                let anti = a.t[j] * a.t[k] + a.t[k] * a.t[j];
                let target = if j == k { Mat4::identity() * 2.0 } else { Mat4::zeros() };
                assert_eq!(anti, target);
            }
        }
    }

    #[test]
    fn clifford_pairs() {
        let a = SpinorAlgebra::build();
        assert_eq!(a.clifford_defect(), 0.0);
        assert_eq!(a.gamma[0] * a.gamma[0] * 2.0, -Mat4::identity() * 2.0);
        assert_eq!(a.gamma[1] * a.gamma[2] + a.gamma[2] * a.gamma[1], Mat4::zeros());
    }

    #[test]
    fn gamma_bar_is_minus_i_times_i_tilde() {
        let a = SpinorAlgebra::build();
        assert_eq!(a.gamma_bar_im, -a.i_tilde);
        let beta = a.beta();
        assert_eq!(beta.adjoint(), beta);
        assert_eq!(beta * beta, CMat4::identity());
        // the mass term anticommutes with every T_k
        for t in &a.t {
            let tc = complexify(t);
            assert_eq!(beta * tc + tc * beta, CMat4::zeros());
        }
        let m = a.mass_matrix();
        assert_eq!(m.transpose(), -m);
    }
}
