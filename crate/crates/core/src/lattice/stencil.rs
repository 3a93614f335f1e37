//! The cube-corner stencil `Y({v})` coupling a site to its eight diagonal
//! neighbours on the other sublattice.

use super::spinor::{Mat4, SpinorAlgebra};

/// Corner sign vector `(v1, v2, v3)`, each `±1`.
pub type Corner = [i8; 3];

/// The eight corners in lexicographic order of `(v1, v2, v3)`, `-1` first.
pub fn corners() -> [Corner; 8] {
    let mut out = [[0i8; 3]; 8];
    for (n, c) in out.iter_mut().enumerate() {
        for k in 0..3 {
            c[k] = if n >> (2 - k) & 1 == 1 { 1 } else { -1 };
        }
    }
    out
}

/// `w1 = -v2 v3`, `w2 = v1 v3`, `w3 = -v1 v2`.
pub fn w_signs(v: Corner) -> [f64; 3] {
    let v = v.map(f64::from);
    [-v[1] * v[2], v[0] * v[2], -v[0] * v[1]]
}

/// `Y({v}) = ⅛ [1 - Σ_k (v_k + w_k Ĩ) T_k - v1 v2 v3 Ĩ]`.
pub fn stencil(alg: &SpinorAlgebra, v: Corner) -> Mat4 {
    assert!(v.iter().all(|&s| s == 1 || s == -1), "corner signs must be ±1, got {v:?}");
    let w = w_signs(v);
    let vf = v.map(f64::from);
    let mut acc = Mat4::identity();
    for k in 0..3 {
        acc -= (Mat4::identity() * vf[k] + alg.i_tilde * w[k]) * alg.t[k];
    }
    acc -= alg.i_tilde * (vf[0] * vf[1] * vf[2]);
    acc / 8.0
}

/// All eight stencil matrices, in [`corners`] order.
pub fn stencil_table(alg: &SpinorAlgebra) -> [(Corner, Mat4); 8] {
    corners().map(|v| (v, stencil(alg, v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_sum_is_identity() {
        let alg = SpinorAlgebra::build();
        let sum = stencil_table(&alg).iter().fold(Mat4::zeros(), |acc, (_, y)| acc + y);
        assert_eq!(sum, Mat4::identity());
    }

    #[test]
    fn first_moment_is_minus_t() {
        let alg = SpinorAlgebra::build();
        for j in 0..3 {
            let m = stencil_table(&alg)
                .iter()
                .fold(Mat4::zeros(), |acc, (v, y)| acc + y * f64::from(v[j]));
            assert_eq!(m, -alg.t[j]);
        }
    }

    #[test]
    fn all_plus_corner() {
        let alg = SpinorAlgebra::build();
        let (t, it) = (&alg.t, &alg.i_tilde);
        assert_eq!(w_signs([1, 1, 1]), [-1.0, 1.0, -1.0]);
        let expected = (Mat4::identity() - t[0] - t[1] - t[2] + it * t[0] - it * t[1] + it * t[2] - it) / 8.0;
        assert_eq!(stencil(&alg, [1, 1, 1]), expected);
    }

    #[test]
    fn corners_are_distinct() {
        let c = corners();
        for a in 0..8 {
            for b in a + 1..8 {
                assert_ne!(c[a], c[b]);
            }
        }
    }
}
