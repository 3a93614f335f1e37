//! Exact sparse real Grassmann algebra with Berezin calculus.
//!
//! A basis element `g_τ` is the product of the generators whose bits are set
//! in a mask, taken in ascending variable order. All reordering signs are
//! relative to that canonical order, and the top element `|0⟩` (every bit
//! set) integrates to `+1`.
//!
//! The occupation convention is inverted: a bit set in the Grassmann mask
//! means the variable is present in the product, which is an *empty*
//! occupation number. [`OccupationVector::from_mask`] performs the flip.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::ensemble::ClassicalWaveFunction;
use crate::error::{Error, Result};

/// Largest number of variables for which the full algebra is materialised.
pub const MAX_ALGEBRA_VARS: usize = 24;

/// Number of spinor components per Majorana flavor.
pub const SPECIES: usize = 4;

/// Maps `(site, species, flavor)` to a linear variable index.
///
/// Order is flavor-major, then site, then species, so the variables of one
/// flavor form a contiguous block of `4 · sites` indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VariableLayout {
    pub sites: usize,
    pub flavors: usize,
}

impl VariableLayout {
    pub fn new(sites: usize, flavors: usize) -> Result<Self> {
        if sites == 0 {
            return Err(Error::InvalidGeometry("layout needs at least one site".into()));
        }
        if flavors != 1 && flavors != 2 {
            return Err(Error::InvalidParameter(format!(
                "flavor count must be 1 (Ns = 4) or 2 (Ns = 8), got {flavors}"
            )));
        }
        Ok(Self { sites, flavors })
    }

    /// Species per site, `N_s`.
    pub fn species_per_site(&self) -> usize {
        SPECIES * self.flavors
    }

    /// Total number of variables `B`.
    pub fn len(&self) -> usize {
        SPECIES * self.sites * self.flavors
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, v: VariableIndex) -> Result<usize> {
        if v.site >= self.sites || v.species >= SPECIES || v.flavor >= self.flavors {
            return Err(Error::IndexOutOfRange {
                index: v.site * SPECIES + v.species,
                n: self.len(),
            });
        }
        Ok(v.flavor * SPECIES * self.sites + v.site * SPECIES + v.species)
    }

    pub fn variable(&self, linear: usize) -> Result<VariableIndex> {
        if linear >= self.len() {
            return Err(Error::IndexOutOfRange { index: linear, n: self.len() });
        }
        let block = SPECIES * self.sites;
        let flavor = linear / block;
        let rest = linear % block;
        Ok(VariableIndex { site: rest / SPECIES, species: rest % SPECIES, flavor })
    }
}

/// One Grassmann variable `ψ_γ(x)` (flavor `a` only matters for `N_s = 8`).
/// Species and flavor are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct VariableIndex {
    pub site: usize,
    pub species: usize,
    pub flavor: usize,
}

/// Occupation numbers `n_b ∈ {0, 1}` of a classical state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupationVector {
    bits: Vec<bool>,
}

impl OccupationVector {
    /// `n_b = 1` exactly when `ψ_b` is absent from the basis product.
    pub fn from_mask(mask: u32, n_vars: usize) -> Self {
        Self { bits: (0..n_vars).map(|b| mask & (1 << b) == 0).collect() }
    }

    pub fn to_mask(&self) -> u32 {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &occ)| !occ)
            .fold(0, |m, (b, _)| m | (1 << b))
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn particle_number(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

#[inline]
fn below(b: usize) -> u32 {
    (1u32 << b) - 1
}

#[inline]
fn odd(n: u32) -> bool {
    n & 1 == 1
}

/// Sign of `g_a · g_b = sign · g_{a|b}` for disjoint canonical products.
#[inline]
pub fn reorder_sign(a: u32, b: u32) -> f64 {
    debug_assert_eq!(a & b, 0);
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inversions += (a >> j).count_ones();
        rest &= rest - 1;
    }
    if odd(inversions) {
        -1.0
    } else {
        1.0
    }
}

/// Conjugate basis element: returns `(σ, sign)` with `g̃_τ = sign · g_σ`,
/// `σ` the complement of `τ`, and `g̃_τ g_τ = +|0⟩`.
pub fn conjugate_basis(mask: u32, n_vars: usize) -> (u32, f64) {
    let full = full_mask(n_vars);
    let sigma = !mask & full;
    (sigma, reorder_sign(sigma, mask & full))
}

pub fn full_mask(n_vars: usize) -> u32 {
    if n_vars == 32 {
        u32::MAX
    } else {
        (1u32 << n_vars) - 1
    }
}

/// Element of the real Grassmann algebra over `n_vars` generators.
#[derive(Clone, PartialEq)]
pub struct GrassmannElement {
    n_vars: usize,
    terms: BTreeMap<u32, f64>,
}

impl fmt::Debug for GrassmannElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G{}[", self.n_vars)?;
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}·{m:#x}")?;
        }
        write!(f, "]")
    }
}

#[derive(Serialize)]
struct DumpTerm {
    bits: String,
    coeff: f64,
}

impl GrassmannElement {
    pub fn zero(n_vars: usize) -> Result<Self> {
        if n_vars > MAX_ALGEBRA_VARS {
            return Err(Error::TooManyVariables { n: n_vars, max: MAX_ALGEBRA_VARS });
        }
        Ok(Self { n_vars, terms: BTreeMap::new() })
    }

    /// The empty product `1`.
    pub fn one(n_vars: usize) -> Result<Self> {
        Self::basis(n_vars, 0)
    }

    /// The full product `|0⟩ = ψ_0 ψ_1 … ψ_{B-1}`.
    pub fn top(n_vars: usize) -> Result<Self> {
        Self::basis(n_vars, full_mask(n_vars))
    }

    pub fn basis(n_vars: usize, mask: u32) -> Result<Self> {
        let mut g = Self::zero(n_vars)?;
        if mask & !full_mask(n_vars) != 0 {
            return Err(Error::IndexOutOfRange { index: 31 - mask.leading_zeros() as usize, n: n_vars });
        }
        g.terms.insert(mask, 1.0);
        Ok(g)
    }

    /// The single generator `ψ_b`.
    pub fn generator(n_vars: usize, b: usize) -> Result<Self> {
        if b >= n_vars {
            return Err(Error::IndexOutOfRange { index: b, n: n_vars });
        }
        Self::basis(n_vars, 1 << b)
    }

    /// Builds an element from `(mask, coefficient)` pairs; repeated masks add.
    pub fn from_terms<I: IntoIterator<Item = (u32, f64)>>(n_vars: usize, terms: I) -> Result<Self> {
        let mut g = Self::zero(n_vars)?;
        let full = full_mask(n_vars);
        for (m, c) in terms {
            if m & !full != 0 {
                return Err(Error::IndexOutOfRange { index: 31 - m.leading_zeros() as usize, n: n_vars });
            }
            g.accumulate(m, c);
        }
        Ok(g)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mask: u32) -> f64 {
        self.terms.get(&mask).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    fn accumulate(&mut self, mask: u32, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(mask).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&mask);
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n_vars != other.n_vars {
            return Err(Error::VariableSetMismatch { left: self.n_vars, right: other.n_vars });
        }
        Ok(())
    }

    fn check_var(&self, b: usize) -> Result<()> {
        if b >= self.n_vars {
            return Err(Error::IndexOutOfRange { index: b, n: self.n_vars });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.accumulate(m, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self { n_vars: self.n_vars, terms: BTreeMap::new() };
        for (m, c) in self.terms() {
            out.accumulate(m, s * c);
        }
        out
    }

    /// Graded product `self · other`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = Self { n_vars: self.n_vars, terms: BTreeMap::new() };
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                if a & b != 0 {
                    continue;
                }
                out.accumulate(a | b, reorder_sign(a, b) * ca * cb);
            }
        }
        Ok(out)
    }

    /// Left derivative `∂/∂ψ_b`, the creation operator `a†_b`.
    pub fn derive(&self, b: usize) -> Result<Self> {
        self.check_var(b)?;
        let bit = 1u32 << b;
        let mut out = Self { n_vars: self.n_vars, terms: BTreeMap::new() };
        for (m, c) in self.terms() {
            if m & bit == 0 {
                continue;
            }
            let s = if odd((m & below(b)).count_ones()) { -c } else { c };
            out.accumulate(m & !bit, s);
        }
        Ok(out)
    }

    /// Left multiplication by `ψ_b`, the annihilation operator `a_b`.
    pub fn mul_generator(&self, b: usize) -> Result<Self> {
        self.check_var(b)?;
        let bit = 1u32 << b;
        let mut out = Self { n_vars: self.n_vars, terms: BTreeMap::new() };
        for (m, c) in self.terms() {
            if m & bit != 0 {
                continue;
            }
            let s = if odd((m & below(b)).count_ones()) { -c } else { c };
            out.accumulate(m | bit, s);
        }
        Ok(out)
    }

    /// Berezin integral over all variables: the coefficient of `|0⟩`.
    pub fn berezin_integrate(&self) -> f64 {
        self.coefficient(full_mask(self.n_vars))
    }

    /// Integrates out the variables in `vars`, which are first anticommuted
    /// to the front of each term in canonical order. Terms missing any of them
    /// vanish. The remaining variables keep their indices.
    pub fn integrate_out(&self, vars: u32) -> Result<Self> {
        if vars & !full_mask(self.n_vars) != 0 {
            return Err(Error::IndexOutOfRange { index: 31 - vars.leading_zeros() as usize, n: self.n_vars });
        }
        let mut out = Self { n_vars: self.n_vars, terms: BTreeMap::new() };
        for (m, c) in self.terms() {
            if m & vars != vars {
                continue;
            }
            let rest = m & !vars;
            out.accumulate(rest, reorder_sign(vars, rest) * c);
        }
        Ok(out)
    }

    /// Re-indexes the surviving variables `keep` (ascending) to `0..keep.len()`.
    /// The map is monotone, so no signs arise. Terms touching a variable outside
    /// `keep` are an error.
    pub fn compact(&self, keep: u32) -> Result<Self> {
        let new_n = keep.count_ones() as usize;
        let mut out = Self::zero(new_n)?;
        for (m, c) in self.terms() {
            if m & !keep != 0 {
                return Err(Error::InvalidParameter(format!(
                    "term {m:#x} has variables outside the kept set {keep:#x}"
                )));
            }
            let mut nm = 0u32;
            let mut k = 0;
            for b in 0..self.n_vars {
                if keep & (1 << b) != 0 {
                    if m & (1 << b) != 0 {
                        nm |= 1 << k;
                    }
                    k += 1;
                }
            }
            out.accumulate(nm, c);
        }
        Ok(out)
    }

    /// Embeds into a larger algebra, shifting every variable index by `offset`.
    pub fn embed(&self, new_n: usize, offset: usize) -> Result<Self> {
        if self.n_vars + offset > new_n {
            return Err(Error::IndexOutOfRange { index: self.n_vars + offset - 1, n: new_n });
        }
        let mut out = Self::zero(new_n)?;
        for (m, c) in self.terms() {
            out.accumulate(m << offset, c);
        }
        Ok(out)
    }

    /// `g̃ = Σ q_τ g̃_τ`.
    pub fn conjugate(&self) -> Self {
        let mut out = Self { n_vars: self.n_vars, terms: BTreeMap::new() };
        for (m, c) in self.terms() {
            let (sigma, s) = conjugate_basis(m, self.n_vars);
            out.accumulate(sigma, s * c);
        }
        out
    }

    /// `Some(parity)` for homogeneous elements (`false` = even), `None` otherwise.
    pub fn grade_parity(&self) -> Option<bool> {
        let mut it = self.terms.keys().map(|m| odd(m.count_ones()));
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    /// Dense coefficient vector indexed by mask; `q_τ` in `g = Σ_τ q_τ g_τ`.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut q = vec![0.0; 1usize << self.n_vars];
        for (m, c) in self.terms() {
            q[m as usize] = c;
        }
        q
    }

    /// The classical wave function of a normalized element.
    pub fn wavefunction_of(&self) -> Result<ClassicalWaveFunction> {
        ClassicalWaveFunction::new(self.coefficients())
    }

    /// Rebuilds `g = Σ_τ q_τ g_τ` from a dense amplitude vector of length `2^B`.
    pub fn from_wavefunction(n_vars: usize, q: &[f64]) -> Result<Self> {
        if n_vars > MAX_ALGEBRA_VARS {
            return Err(Error::TooManyVariables { n: n_vars, max: MAX_ALGEBRA_VARS });
        }
        if q.len() != 1usize << n_vars {
            return Err(Error::DimensionMismatch { expected: 1 << n_vars, got: q.len() });
        }
        let wf = ClassicalWaveFunction::new(q.to_vec())?;
        Self::from_terms(n_vars, wf.amplitudes().iter().enumerate().map(|(m, &c)| (m as u32, c)))
    }

    /// Debug dump: `[{"bits": "0x..", "coeff": ..}, ...]`.
    pub fn to_json(&self) -> String {
        let dump: Vec<DumpTerm> = self
            .terms()
            .map(|(m, c)| DumpTerm { bits: format!("{m:#x}"), coeff: c })
            .collect();
        serde_json::to_string(&dump).expect("plain data serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn psi(n: usize, b: usize) -> GrassmannElement {
        GrassmannElement::generator(n, b).unwrap()
    }

    #[test]
    fn anticommuting_generators() {
        let p01 = psi(3, 0).multiply(&psi(3, 1)).unwrap();
        let p10 = psi(3, 1).multiply(&psi(3, 0)).unwrap();
        assert_eq!(p01.coefficient(0b011), 1.0);
        assert_eq!(p10.coefficient(0b011), -1.0);
        assert!(psi(3, 0).multiply(&psi(3, 0)).unwrap().is_zero());
    }

    #[test]
    fn dead_term_in_product() {
        // (ψ0 + 2ψ1)(ψ1ψ2) = ψ0ψ1ψ2
        let a = psi(3, 0).add(&psi(3, 1).scale(2.0)).unwrap();
        let b = GrassmannElement::basis(3, 0b110).unwrap();
        let p = a.multiply(&b).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.coefficient(0b111), 1.0);
    }

    #[test]
    fn mismatched_variable_sets() {
        let err = psi(3, 0).multiply(&psi(4, 0)).unwrap_err();
        assert_eq!(err, Error::VariableSetMismatch { left: 3, right: 4 });
    }

    #[test]
    fn derivative_signs() {
        let p01 = GrassmannElement::basis(3, 0b011).unwrap();
        assert_eq!(p01.derive(0).unwrap(), psi(3, 1));
        assert_eq!(p01.derive(1).unwrap(), psi(3, 0).scale(-1.0));
        let p12 = GrassmannElement::basis(3, 0b110).unwrap();
        assert!(p12.derive(0).unwrap().is_zero());
    }

    #[test]
    fn berezin_examples() {
        assert_eq!(GrassmannElement::top(5).unwrap().berezin_integrate(), 1.0);
        assert_eq!(GrassmannElement::one(5).unwrap().berezin_integrate(), 0.0);
        let g = GrassmannElement::top(5).unwrap().scale(3.0).add(&psi(5, 0)).unwrap();
        assert_eq!(g.berezin_integrate(), 3.0);
    }

    #[test]
    fn conjugate_of_single_generator() {
        // B = 2: g = ψ0, g̃ = -ψ1 since ψ1ψ0 = -ψ0ψ1.
        assert_eq!(conjugate_basis(0b01, 2), (0b10, -1.0));
        assert_eq!(conjugate_basis(0b11, 2), (0b00, 1.0));
        for tau in 0..4u32 {
            let (s, sign) = conjugate_basis(tau, 2);
            let gt = GrassmannElement::basis(2, s).unwrap().scale(sign);
            let prod = gt.multiply(&GrassmannElement::basis(2, tau).unwrap()).unwrap();
            assert_eq!(prod, GrassmannElement::top(2).unwrap());
        }
    }

    #[test]
    fn wavefunction_round_trip_and_errors() {
        let g = GrassmannElement::basis(3, 0b101).unwrap();
        let wf = g.wavefunction_of().unwrap();
        assert_eq!(wf.amplitudes()[0b101], 1.0);
        assert_eq!(wf.amplitudes().iter().filter(|&&x| x != 0.0).count(), 1);

        let h = GrassmannElement::from_terms(3, [(0b001, 0.5f64.sqrt()), (0b110, 0.5f64.sqrt())]).unwrap();
        let q = h.wavefunction_of().unwrap();
        assert_eq!(q.amplitudes().iter().filter(|&&x| x != 0.0).count(), 2);
        assert_eq!(GrassmannElement::from_wavefunction(3, q.amplitudes()).unwrap(), h);

        let bad = vec![1.0; 8];
        assert!(matches!(
            GrassmannElement::from_wavefunction(3, &bad),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn integrate_out_leading_block() {
        // ∫dψ(0,1) ψ0ψ1ψ2 = ψ2; ∫dψ(1) ψ0ψ1 = -ψ0
        let g = GrassmannElement::basis(3, 0b111).unwrap();
        assert_eq!(g.integrate_out(0b011).unwrap(), psi(3, 2));
        let h = GrassmannElement::basis(3, 0b011).unwrap();
        assert_eq!(h.integrate_out(0b010).unwrap(), psi(3, 0).scale(-1.0));
        assert_eq!(g.integrate_out(0b111).unwrap().coefficient(0), 1.0);
    }

    #[test]
    fn compact_and_embed_are_inverse() {
        let g = GrassmannElement::from_terms(3, [(0b011, 2.0), (0b100, -1.0)]).unwrap();
        let e = g.embed(6, 3).unwrap();
        assert_eq!(e.coefficient(0b011_000), 2.0);
        assert_eq!(e.compact(0b111_000).unwrap(), g);
    }

    #[test]
    fn occupation_is_inverted() {
        let occ = OccupationVector::from_mask(0b0101, 4);
        assert_eq!(occ.bits(), &[false, true, false, true]);
        assert_eq!(occ.particle_number(), 2);
        assert_eq!(occ.to_mask(), 0b0101);
    }

    #[test]
    fn layout_is_flavor_major() {
        let layout = VariableLayout::new(3, 2).unwrap();
        let v = VariableIndex { site: 1, species: 2, flavor: 1 };
        let lin = layout.index(v).unwrap();
        assert_eq!(lin, 12 + 4 + 2);
        assert_eq!(layout.variable(lin).unwrap(), v);
        assert!(layout.index(VariableIndex { site: 3, species: 0, flavor: 0 }).is_err());
    }

    #[test]
    fn json_dump() {
        let g = GrassmannElement::from_terms(2, [(0b10, 1.5)]).unwrap();
        assert_eq!(g.to_json(), r#"[{"bits":"0x2","coeff":1.5}]"#);
    }

    #[test]
    fn cap_on_variables() {
        assert!(matches!(GrassmannElement::zero(25), Err(Error::TooManyVariables { .. })));
    }
}
