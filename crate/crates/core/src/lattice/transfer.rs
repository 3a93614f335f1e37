//! Finite-ε evolution between the even and odd sublattices.
//!
//! `W[(x,γ),(y,δ)] = Σ Y_γδ({v})` over corners with `y = x + vΔ`. One step
//! of `g(t+ε) = ∫Dψ(t) e^{-L(t)} g(t)` turns a particle above the empty
//! vacuum into a hole above the filled one, `h = Wᵀ q`; the next step turns
//! the hole back into a particle through the cofactors of the second stencil,
//! `q'' = det(W') W'^{-1} h`.

use nalgebra::DMatrix;

use super::geometry::{LatticeGeometry, Parity};
use super::spinor::SpinorAlgebra;
use super::stencil::stencil_table;
use crate::error::{Error, Result};
use crate::grassmann::{full_mask, GrassmannElement, MAX_ALGEBRA_VARS, SPECIES};

/// Stencil matrix from `geom`'s sublattice to the other one.
pub fn stencil_matrix(geom: &LatticeGeometry) -> DMatrix<f64> {
    let alg = SpinorAlgebra::build();
    let n = SPECIES * geom.sites();
    let ext = geom.extents();
    let mut w = DMatrix::zeros(n, n);
    for x in 0..geom.sites() {
        let c = geom.grid.coords(x);
        for (v, y) in stencil_table(&alg) {
            let mut t = [0usize; 3];
            for k in 0..3 {
                let step = match geom.parity {
                    Parity::Even => (i64::from(v[k]) - 1) / 2,
                    Parity::Odd => (i64::from(v[k]) + 1) / 2,
                };
                t[k] = (c[k] as i64 + step).rem_euclid(ext[k] as i64) as usize;
            }
            let target = geom.grid.index(t);
            for g in 0..SPECIES {
                for d in 0..SPECIES {
                    w[(x * SPECIES + g, target * SPECIES + d)] += y[(g, d)];
                }
            }
        }
    }
    w
}

/// The two half-steps of the staggered evolution starting on the even
/// sublattice.
#[derive(Debug, Clone)]
pub struct StaggeredTransfer {
    pub geometry: LatticeGeometry,
    /// Even → odd.
    pub forward: DMatrix<f64>,
    /// Odd → even.
    pub backward: DMatrix<f64>,
}

impl StaggeredTransfer {
    pub fn new(geometry: LatticeGeometry) -> Self {
        let even = geometry.with_parity(Parity::Even);
        Self {
            geometry: even,
            forward: stencil_matrix(&even),
            backward: stencil_matrix(&even.with_parity(Parity::Odd)),
        }
    }

    /// Particle amplitudes at `t` → hole amplitudes at `t + ε`.
    pub fn particle_to_hole(&self) -> DMatrix<f64> {
        self.forward.transpose()
    }

    /// Hole amplitudes at `t + ε` → particle amplitudes at `t + 2ε`.
    pub fn hole_to_particle(&self) -> Result<DMatrix<f64>> {
        let lu = self.backward.clone().lu();
        let det = lu.determinant();
        let inv = lu
            .try_inverse()
            .ok_or_else(|| Error::InvalidGeometry("singular stencil matrix".into()))?;
        Ok(inv * det)
    }

    /// `R(t + 2ε, t)` on one-particle amplitudes of the even sublattice.
    pub fn two_step(&self) -> Result<DMatrix<f64>> {
        Ok(self.hole_to_particle()? * self.particle_to_hole())
    }
}

/// `max |RᵀR - 1|`.
pub fn orthogonality_defect(r: &DMatrix<f64>) -> f64 {
    (r.transpose() * r - DMatrix::identity(r.nrows(), r.ncols())).amax()
}

/// Particle state `Σ_l q_l a†_l |0⟩` over `q.len()` variables.
pub fn particle_element(q: &[f64]) -> Result<GrassmannElement> {
    let top = GrassmannElement::top(q.len())?;
    let mut g = GrassmannElement::zero(q.len())?;
    for (l, &a) in q.iter().enumerate() {
        g = g.add(&top.derive(l)?.scale(a))?;
    }
    Ok(g)
}

/// Hole state `Σ_l h_l a_l 1`.
pub fn hole_element(h: &[f64]) -> Result<GrassmannElement> {
    let one = GrassmannElement::one(h.len())?;
    let mut g = GrassmannElement::zero(h.len())?;
    for (l, &a) in h.iter().enumerate() {
        g = g.add(&one.mul_generator(l)?.scale(a))?;
    }
    Ok(g)
}

/// `q_l = ∫ (a†_l|0⟩)~ g`.
pub fn particle_amplitudes(g: &GrassmannElement) -> Result<Vec<f64>> {
    let n = g.n_vars();
    let top = GrassmannElement::top(n)?;
    (0..n)
        .map(|l| {
            let basis = top.derive(l)?;
            let (mask, sign) = basis.terms().next().expect("nonzero");
            Ok(sign * g.coefficient(mask))
        })
        .collect()
}

/// `h_l = ∫ (a_l 1)~ g`.
pub fn hole_amplitudes(g: &GrassmannElement) -> Result<Vec<f64>> {
    (0..g.n_vars()).map(|l| Ok(g.coefficient(1 << l))).collect()
}

/// `∫ Dψ(t) e^{-L(t)} g(t)` with `L = Σ_i ψ_i Σ_j W_ij φ_j`, evaluated in the
/// joint algebra of `ψ` (variables `0..n`) and `φ` (`n..2n`). The result is
/// re-indexed onto `φ`.
pub fn grassmann_step(w: &DMatrix<f64>, g: &GrassmannElement) -> Result<GrassmannElement> {
    let n = w.nrows();
    if w.ncols() != n || g.n_vars() != n {
        return Err(Error::DimensionMismatch { expected: n, got: g.n_vars() });
    }
    if 2 * n > MAX_ALGEBRA_VARS {
        return Err(Error::TooManyVariables { n: 2 * n, max: MAX_ALGEBRA_VARS });
    }
    let mut cur = g.embed(2 * n, 0)?;
    // the factors (1 - ψ_i B_i) are even and commute
    for i in 0..n {
        let mut bterm = GrassmannElement::zero(2 * n)?;
        for j in 0..n {
            if w[(i, j)] != 0.0 {
                bterm = bterm.add(&cur.mul_generator(n + j)?.scale(w[(i, j)]))?;
            }
        }
        cur = cur.sub(&bterm.mul_generator(i)?)?;
    }
    let low = full_mask(n);
    cur.integrate_out(low)?.compact(full_mask(2 * n) & !low)
}
