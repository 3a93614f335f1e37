//! The evolution generator `K = Σ_ij C_ij ∂/∂ψ_i ψ_j`.
//!
//! `C` is a real antisymmetric `B × B` matrix. Per flavor it is
//! `Σ_k T_k ⊗ D_k - m γ⁰Ĩ`, with `D_k` the periodic symmetric difference
//! `(δ_{y,x+ê_k} - δ_{y,x-ê_k}) / (4Δ)`. For `N_s = 8` the flavors are
//! coupled by `± e (A_0 - A_k T_k)`, which turns the complex combination
//! `φ = q_1 + i q_2` into a solution of `i∂_t φ = H φ` with
//! `H = iT_k∂_k + mγ⁰γ̄ + e(A_0 - T_k A_k)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::geometry::LatticeGeometry;
use super::params::{ModelParams, Species};
use super::spinor::{complexify, CMat4, Mat4, SpinorAlgebra};
use crate::error::{Error, Result};
use crate::evolution::EvolutionGenerator;
use crate::grassmann::{conjugate_basis, GrassmannElement, MAX_ALGEBRA_VARS, SPECIES};
use crate::sectors::{one_body_operator, SectorBasis};
use crate::sparse::SparseMatrix;

/// Total number of variables `B = N_s · S`.
pub fn variable_count(params: &ModelParams, geom: &LatticeGeometry) -> usize {
    params.species.count() * geom.sites()
}

fn var(geom: &LatticeGeometry, flavor: usize, site: usize, species: usize) -> usize {
    flavor * SPECIES * geom.sites() + site * SPECIES + species
}

/// The `(i, j, C_ij)` terms of the action, before duplicates are summed.
pub fn action_terms(params: &ModelParams, geom: &LatticeGeometry) -> Result<Vec<(usize, usize, f64)>> {
    params.validate(geom.sites())?;
    let alg = SpinorAlgebra::build();
    let flavors = params.species.flavors();
    let inv = 1.0 / (4.0 * geom.delta);
    let mass = alg.mass_matrix() * (-params.mass);
    let mut out = Vec::new();
    for f in 0..flavors {
        for x in 0..geom.sites() {
            for k in 0..3 {
                let xp = geom.grid.shift(x, k, 1);
                let xm = geom.grid.shift(x, k, -1);
                for g in 0..SPECIES {
                    for d in 0..SPECIES {
                        let t = alg.t[k][(g, d)];
                        if t != 0.0 {
                            out.push((var(geom, f, x, g), var(geom, f, xp, d), t * inv));
                            out.push((var(geom, f, x, g), var(geom, f, xm, d), -t * inv));
                        }
                    }
                }
            }
            for g in 0..SPECIES {
                for d in 0..SPECIES {
                    if mass[(g, d)] != 0.0 {
                        out.push((var(geom, f, x, g), var(geom, f, x, d), mass[(g, d)]));
                    }
                }
            }
        }
    }
    if params.species == Species::Dirac && params.coupling != 0.0 {
        for x in 0..geom.sites() {
            let m = coupling_block(&alg, &params.potential, x) * params.coupling;
            for g in 0..SPECIES {
                for d in 0..SPECIES {
                    if m[(g, d)] != 0.0 {
                        out.push((var(geom, 0, x, g), var(geom, 1, x, d), m[(g, d)]));
                        out.push((var(geom, 1, x, g), var(geom, 0, x, d), -m[(g, d)]));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `A_0(x) - Σ_k A_k(x) T_k`.
pub fn coupling_block(alg: &SpinorAlgebra, pot: &super::params::ExternalPotential, x: usize) -> Mat4 {
    let mut m = Mat4::identity() * pot.a0_at(x);
    for k in 0..3 {
        m -= alg.t[k] * pot.ak_at(k, x);
    }
    m
}

/// The one-body matrix `C`.
pub fn one_body_matrix(params: &ModelParams, geom: &LatticeGeometry) -> Result<SparseMatrix<f64>> {
    let b = variable_count(params, geom);
    Ok(SparseMatrix::from_triplets(b, b, action_terms(params, geom)?))
}

/// `K` as an operator on the full Grassmann algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannGenerator {
    n_vars: usize,
    terms: Vec<(usize, usize, f64)>,
}

impl GrassmannGenerator {
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// `K g = Σ C_ij ∂_i (ψ_j g)`.
    pub fn apply(&self, g: &GrassmannElement) -> Result<GrassmannElement> {
        if g.n_vars() != self.n_vars {
            return Err(Error::VariableSetMismatch { left: self.n_vars, right: g.n_vars() });
        }
        let mut out = GrassmannElement::zero(self.n_vars)?;
        for &(i, j, c) in &self.terms {
            let t = g.mul_generator(j)?.derive(i)?;
            if !t.is_zero() {
                out = out.add(&t.scale(c))?;
            }
        }
        Ok(out)
    }

    /// `K_ρτ = ∫ Dψ g̃_ρ K g_τ`.
    pub fn matrix_element(&self, rho: u32, tau: u32) -> Result<f64> {
        let kg = self.apply(&GrassmannElement::basis(self.n_vars, tau)?)?;
        projection(&kg, rho)
    }

    /// Matrix of `K` between the listed basis masks, each column by
    /// conjugate-basis projection.
    pub fn project(&self, masks: &[u32]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(masks.len(), masks.len());
        for (c, &tau) in masks.iter().enumerate() {
            let kg = self.apply(&GrassmannElement::basis(self.n_vars, tau)?)?;
            for (r, &rho) in masks.iter().enumerate() {
                m[(r, c)] = projection(&kg, rho)?;
            }
        }
        Ok(m)
    }
}

/// `∫ Dψ g̃_ρ g`.
pub fn projection(g: &GrassmannElement, rho: u32) -> Result<f64> {
    let (sigma, sign) = conjugate_basis(rho, g.n_vars());
    let conj = GrassmannElement::basis(g.n_vars(), sigma)?.scale(sign);
    Ok(conj.multiply(g)?.berezin_integrate())
}

pub fn build_generator_grassmann(params: &ModelParams, geom: &LatticeGeometry) -> Result<GrassmannGenerator> {
    let n = variable_count(params, geom);
    if n > MAX_ALGEBRA_VARS {
        return Err(Error::TooManyVariables { n, max: MAX_ALGEBRA_VARS });
    }
    let c = one_body_matrix(params, geom)?;
    Ok(GrassmannGenerator { n_vars: n, terms: c.iter().collect() })
}

/// `K` restricted to the sector with `m` occupied modes.
pub fn build_generator_sector(
    params: &ModelParams,
    geom: &LatticeGeometry,
    m: usize,
    limit: usize,
) -> Result<(SectorBasis, EvolutionGenerator)> {
    let c = one_body_matrix(params, geom)?;
    let basis = SectorBasis::new(c.rows(), m, limit)?;
    let k = EvolutionGenerator::new(one_body_operator(&basis, &c)?)?;
    Ok((basis, k))
}

/// Bloch block of `C` at lattice momentum `p` (one entry per axis): the
/// `N_s × N_s` matrix with `C q = C(p) q̂` for `q = q̂ e^{ip·x}`.
pub fn bloch_block(params: &ModelParams, geom: &LatticeGeometry, p: [f64; 3]) -> Result<DMatrix<Complex64>> {
    params.validate(geom.sites())?;
    if !params.potential.is_zero() && !potential_is_uniform(params, geom) {
        return Err(Error::InvalidParameter("Bloch blocks need a uniform potential".into()));
    }
    let alg = SpinorAlgebra::build();
    let h = geom.grid.spacing;
    let mut c0: CMat4 = complexify(&(alg.mass_matrix() * (-params.mass)));
    for k in 0..3 {
        if geom.grid.extents[k] > 2 {
            let s = (p[k] * h).sin() / h;
            c0 += complexify(&alg.t[k]) * Complex64::new(0.0, s);
        }
    }
    let f = params.species.flavors();
    let mut out = DMatrix::zeros(4 * f, 4 * f);
    for a in 0..f {
        out.view_mut((4 * a, 4 * a), (4, 4)).copy_from(&c0);
    }
    if f == 2 {
        let m = complexify(&(coupling_block(&alg, &params.potential, 0) * params.coupling));
        out.view_mut((0, 4), (4, 4)).copy_from(&m);
        out.view_mut((4, 0), (4, 4)).copy_from(&(-m));
    }
    Ok(out)
}

fn potential_is_uniform(params: &ModelParams, geom: &LatticeGeometry) -> bool {
    let pot = &params.potential;
    (0..geom.sites()).all(|x| {
        pot.a0_at(x) == pot.a0_at(0) && (0..3).all(|k| pot.ak_at(k, x) == pot.ak_at(k, 0))
    })
}

/// Analytic `ω(p)² = Σ_k sin²(2Δ p_k)/(2Δ)² + m²` on active axes.
pub fn lattice_dispersion(geom: &LatticeGeometry, mass: f64, p: [f64; 3]) -> f64 {
    let h = geom.grid.spacing;
    let mut w2 = mass * mass;
    for k in 0..3 {
        if geom.grid.extents[k] > 2 {
            let s = (p[k] * h).sin() / h;
            w2 += s * s;
        }
    }
    w2
}

/// All lattice momenta of the periodic site grid.
pub fn momenta(geom: &LatticeGeometry) -> Vec<[f64; 3]> {
    let m: Vec<Vec<f64>> = (0..3).map(|k| geom.grid.momenta(k)).collect();
    let mut out = Vec::with_capacity(geom.sites());
    for &a in &m[0] {
        for &b in &m[1] {
            for &c in &m[2] {
                out.push([a, b, c]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::params::ExternalPotential;

    #[test]
    fn majorana_chain_matrix_is_antisymmetric() {
        let geom = LatticeGeometry::chain(5, 0.5, 0.5).unwrap();
        let c = one_body_matrix(&ModelParams::majorana(), &geom).unwrap();
        assert_eq!(c.rows(), 20);
        assert_eq!(c.antisymmetry_defect(), 0.0);
        // T_3 = diag(1, 1, -1, -1) couples each species to itself
        assert_eq!(c.get(0, 4), 0.5);
        assert_eq!(c.get(2, 6), -0.5);
        assert_eq!(c.get(0, 16), -0.5);
    }

    #[test]
    fn two_site_chain_has_no_derivative() {
        let geom = LatticeGeometry::chain(2, 1.0, 1.0).unwrap();
        assert_eq!(one_body_matrix(&ModelParams::majorana(), &geom).unwrap().nnz(), 0);
    }

    #[test]
    fn dirac_matrix_with_potential_is_antisymmetric() {
        let geom = LatticeGeometry::chain(4, 0.5, 0.5).unwrap();
        let pot = ExternalPotential {
            a0: vec![0.1, -0.2, 0.3, 0.0],
            ak: [vec![], vec![0.2; 4], vec![0.5, 0.1, 0.0, -0.3]],
        };
        let c = one_body_matrix(&ModelParams::dirac(0.7, 1.3, pot), &geom).unwrap();
        assert_eq!(c.rows(), 32);
        assert!(c.antisymmetry_defect() < 1e-15);
    }

    #[test]
    fn oracle_refuses_large_geometries() {
        let geom = LatticeGeometry::chain(7, 0.5, 0.5).unwrap();
        assert!(matches!(
            build_generator_grassmann(&ModelParams::majorana(), &geom),
            Err(Error::TooManyVariables { n: 28, .. })
        ));
    }

    #[test]
    fn one_particle_sector_is_the_one_body_matrix() {
        let geom = LatticeGeometry::chain(4, 0.5, 0.5).unwrap();
        let p = ModelParams::majorana();
        let (basis, k) = build_generator_sector(&p, &geom, 1, 1000).unwrap();
        assert_eq!(basis.dim(), 16);
        let c = one_body_matrix(&p, &geom).unwrap();
        for r in 0..16 {
            for col in 0..16 {
                let (i, j) = (basis.unrank(r)[0], basis.unrank(col)[0]);
                // sector amplitudes carry the sign of a†_l |0⟩ = (-1)^l g_τ
                let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(k.matrix().get(r, col), s * c.get(i, j));
            }
        }
        let (b0, k0) = build_generator_sector(&p, &geom, 0, 10).unwrap();
        assert_eq!(b0.dim(), 1);
        assert!(k0.is_zero());
    }
}
