//! Vacua, one- and two-particle states, and diagonal classical observables.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::ensemble::ClassicalWaveFunction;
use crate::error::{Error, Result};
use crate::evolution::EvolutionGenerator;
use crate::grassmann::VariableLayout;
use crate::grid::Grid;
use crate::sectors::{
    annihilation_sign, apply_annihilation, apply_creation, creation_sign, one_body_operator, SectorBasis,
    DEFAULT_SECTOR_LIMIT,
};
use crate::sparse::SparseMatrix;

/// Amplitudes over one sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorState {
    pub basis: SectorBasis,
    pub amplitudes: Vec<f64>,
}

impl SectorState {
    pub fn new(basis: SectorBasis, amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), got: amplitudes.len() });
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn wavefunction(&self) -> Result<ClassicalWaveFunction> {
        ClassicalWaveFunction::new(self.amplitudes.clone())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Whether single excitations of a vacuum are added particles or holes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Excitation {
    Particle,
    Hole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VacuumKind {
    /// Every mode empty: `g₀ = |0⟩`.
    Empty,
    /// Every mode occupied: `g₀ = 1`.
    Full,
    /// Half of the modes filled with whole invariant planes of `C`.
    HalfFilled,
}

/// A static particle-number eigenstate `g₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct VacuumState {
    pub kind: Option<VacuumKind>,
    pub state: SectorState,
}

impl VacuumState {
    pub fn empty(modes: usize) -> Result<Self> {
        let basis = SectorBasis::new(modes, 0, 1)?;
        Ok(Self { kind: Some(VacuumKind::Empty), state: SectorState::new(basis, vec![1.0])? })
    }

    pub fn full(modes: usize) -> Result<Self> {
        let basis = SectorBasis::new(modes, modes, 1)?;
        Ok(Self { kind: Some(VacuumKind::Full), state: SectorState::new(basis, vec![1.0])? })
    }

    /// Slater determinant of `B/2` orthonormal orbitals spanning invariant
    /// subspaces of the antisymmetric one-body matrix `c`.
    pub fn half_filled(c: &SparseMatrix<f64>, limit: usize) -> Result<Self> {
        let modes = c.rows();
        let orbitals = invariant_orbitals(&c.to_dense(), modes / 2)?;
        let state = slater_state(&orbitals, limit)?;
        Ok(Self { kind: Some(VacuumKind::HalfFilled), state })
    }

    /// Any normalized sector state; must be static under `c`.
    pub fn custom(state: SectorState, c: &SparseMatrix<f64>) -> Result<Self> {
        let n2 = state.norm().powi(2);
        if (n2 - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { norm_sq: n2 });
        }
        let v = Self { kind: None, state };
        let residual = v.static_residual(c)?;
        if residual > 1e-12 {
            return Err(Error::VacuumNotStatic { residual });
        }
        Ok(v)
    }

    pub fn build(kind: VacuumKind, c: &SparseMatrix<f64>) -> Result<Self> {
        match kind {
            VacuumKind::Empty => Self::empty(c.rows()),
            VacuumKind::Full => Self::full(c.rows()),
            VacuumKind::HalfFilled => Self::half_filled(c, DEFAULT_SECTOR_LIMIT),
        }
    }

    pub fn particles(&self) -> usize {
        self.state.basis.particles()
    }

    pub fn modes(&self) -> usize {
        self.state.basis.modes()
    }

    pub fn excitation(&self) -> Excitation {
        if self.particles() == self.modes() {
            Excitation::Hole
        } else {
            Excitation::Particle
        }
    }

    /// `‖K g₀‖` in the vacuum's sector.
    pub fn static_residual(&self, c: &SparseMatrix<f64>) -> Result<f64> {
        let k = one_body_operator(&self.state.basis, c)?;
        Ok(k.mul_vec(&self.state.amplitudes).iter().map(|x| x * x).sum::<f64>().sqrt())
    }

    /// Sector holding single excitations.
    pub fn excited_basis(&self, limit: usize) -> Result<SectorBasis> {
        let m = match self.excitation() {
            Excitation::Particle => self.particles() + 1,
            Excitation::Hole => self.particles() - 1,
        };
        SectorBasis::new(self.modes(), m, limit)
    }

    /// `a†_l g₀` (particles) or `a_l g₀` (holes).
    pub fn excite(&self, to: &SectorBasis, l: usize) -> Result<Vec<f64>> {
        match self.excitation() {
            Excitation::Particle => apply_creation(&self.state.basis, to, &self.state.amplitudes, l),
            Excitation::Hole => apply_annihilation(&self.state.basis, to, &self.state.amplitudes, l),
        }
    }
}

/// Orthonormal columns spanning `count` dimensions of whole invariant
/// subspaces of the antisymmetric `c`: planes `(a, Ca/ω)` and kernel vectors.
pub fn invariant_orbitals(c: &DMatrix<f64>, count: usize) -> Result<DMatrix<f64>> {
    let n = c.nrows();
    let eig = SymmetricEigen::new(c.transpose() * c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let scale = c.amax().max(1.0);
    let mut cols: Vec<nalgebra::DVector<f64>> = Vec::new();
    let orth = |v: &mut nalgebra::DVector<f64>, cols: &[nalgebra::DVector<f64>]| {
        for _ in 0..2 {
            for u in cols {
                let p = u.dot(v);
                *v -= u * p;
            }
        }
    };
    for &e in &order {
        if cols.len() == count {
            break;
        }
        let mut a = eig.eigenvectors.column(e).into_owned();
        orth(&mut a, &cols);
        if a.norm() < 1e-8 {
            continue;
        }
        a /= a.norm();
        let mut b = c * &a;
        if b.norm() <= 1e-10 * scale {
            cols.push(a);
            continue;
        }
        if cols.len() + 2 > count {
            continue;
        }
        orth(&mut b, &cols);
        b -= &a * a.dot(&b);
        b /= b.norm();
        cols.push(a);
        cols.push(b);
    }
    if cols.len() != count {
        return Err(Error::InvalidParameter(format!(
            "cannot fill {count} modes with whole invariant planes of the generator"
        )));
    }
    Ok(DMatrix::from_columns(&cols))
}

/// `b†_1 ⋯ b†_m |0⟩` with `b†_k = Σ_i Φ_ik a†_i`.
pub fn slater_state(orbitals: &DMatrix<f64>, limit: usize) -> Result<SectorState> {
    let modes = orbitals.nrows();
    let mut basis = SectorBasis::new(modes, 0, limit)?;
    let mut amps = vec![1.0];
    for k in 0..orbitals.ncols() {
        let next = SectorBasis::new(modes, k + 1, limit)?;
        let mut out = vec![0.0; next.dim()];
        for i in 0..modes {
            let w = orbitals[(i, k)];
            if w != 0.0 {
                for (o, v) in out.iter_mut().zip(apply_creation(&basis, &next, &amps, i)?) {
                    *o += w * v;
                }
            }
        }
        basis = next;
        amps = out;
    }
    SectorState::new(basis, amps)
}

fn check_normalized(q: &[f64]) -> Result<()> {
    if let Some(i) = q.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    let n2: f64 = q.iter().map(|x| x * x).sum();
    if (n2 - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { norm_sq: n2 });
    }
    Ok(())
}

/// `g₁ = Σ_l q_l a†_l g₀` (or `a_l` for the filled vacuum).
pub fn one_particle_state(q: &[f64], vacuum: &VacuumState) -> Result<SectorState> {
    if q.len() != vacuum.modes() {
        return Err(Error::DimensionMismatch { expected: vacuum.modes(), got: q.len() });
    }
    check_normalized(q)?;
    let basis = vacuum.excited_basis(DEFAULT_SECTOR_LIMIT)?;
    let mut amps = vec![0.0; basis.dim()];
    for (l, &a) in q.iter().enumerate() {
        if a != 0.0 {
            for (o, v) in amps.iter_mut().zip(vacuum.excite(&basis, l)?) {
                *o += a * v;
            }
        }
    }
    let state = SectorState::new(basis, amps)?;
    let n2 = state.norm().powi(2);
    if (n2 - 1.0).abs() > 1e-9 {
        // components along filled orbitals are annihilated
        return Err(Error::NotNormalized { norm_sq: n2 });
    }
    Ok(state)
}

/// `q_l = ⟨a†_l g₀ | g₁⟩`.
pub fn extract_one_particle(state: &SectorState, vacuum: &VacuumState) -> Result<Vec<f64>> {
    (0..vacuum.modes())
        .map(|l| Ok(dot(&vacuum.excite(&state.basis, l)?, &state.amplitudes)))
        .collect()
}

/// `g₂ = (1/√2) Σ_ij q_ij a†_i a†_j g₀` above the empty vacuum, with `q`
/// antisymmetrized and scaled to unit Frobenius norm.
pub fn two_particle_state(q: &DMatrix<f64>, limit: usize) -> Result<SectorState> {
    let n = q.nrows();
    if q.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: q.ncols() });
    }
    let a = (q - q.transpose()) * 0.5;
    let norm = a.norm();
    if norm <= 1e-14 * q.norm().max(f64::MIN_POSITIVE) || norm == 0.0 {
        return Err(Error::PauliExcluded);
    }
    let a = a / norm;
    let basis = SectorBasis::new(n, 2, limit)?;
    let mut amps = vec![0.0; basis.dim()];
    for (r, occ) in basis.states().enumerate() {
        let (i, j) = (occ[0], occ[1]);
        // a†_i a†_j |0⟩ with i < j, and the j ↔ i term
        let s = creation_sign(&[], j) * creation_sign(&[j], i);
        amps[r] = s * (a[(i, j)] - a[(j, i)]) / std::f64::consts::SQRT_2;
    }
    SectorState::new(basis, amps)
}

/// `q_ij = ⟨a†_i a†_j g₀ | g₂⟩ / √2`.
pub fn extract_two_particle(state: &SectorState) -> Result<DMatrix<f64>> {
    let n = state.basis.modes();
    if state.basis.particles() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: state.basis.particles() });
    }
    let mut q = DMatrix::zeros(n, n);
    for (r, occ) in state.basis.states().enumerate() {
        let (i, j) = (occ[0], occ[1]);
        let s = creation_sign(&[], j) * creation_sign(&[j], i);
        let v = s * state.amplitudes[r] / std::f64::consts::SQRT_2;
        q[(i, j)] = v;
        q[(j, i)] = -v;
    }
    Ok(q)
}

/// `max |q + qᵀ| / max |q|`.
pub fn antisymmetry_defect(q: &DMatrix<f64>) -> f64 {
    (q + q.transpose()).amax() / q.amax().max(f64::MIN_POSITIVE)
}

/// Maps mode indices to sites and positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeContext {
    pub layout: VariableLayout,
    pub grid: Grid,
}

impl ModeContext {
    pub fn new(layout: VariableLayout, grid: Grid) -> Result<Self> {
        if layout.sites != grid.sites() {
            return Err(Error::GridMismatch(format!("{} layout sites vs {} grid sites", layout.sites, grid.sites())));
        }
        Ok(Self { layout, grid })
    }

    pub fn site_of(&self, mode: usize) -> usize {
        (mode % (4 * self.layout.sites)) / 4
    }

    pub fn modes(&self) -> usize {
        self.layout.len()
    }
}

/// Rules generating diagonal observables `A_τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObservableSpec {
    /// `n_mode`.
    Occupation { mode: usize },
    /// `N(x)`: all species and flavors at one site.
    #[serde(rename = "local_N")]
    LocalNumber { site: usize },
    /// Total particle number.
    Total,
    /// `X_k = Σ_x x_k N(x)`, `axis ∈ {0, 1, 2}`.
    Position { axis: usize },
    /// `J_R = Σ_{x ∈ R} N(x)`.
    Interval { sites: Vec<usize> },
}

impl ObservableSpec {
    pub fn name(&self) -> String {
        match self {
            ObservableSpec::Occupation { mode } => format!("n_{mode}"),
            ObservableSpec::LocalNumber { site } => format!("N_{site}"),
            ObservableSpec::Total => "N_total".into(),
            ObservableSpec::Position { axis } => format!("X_{}", axis + 1),
            ObservableSpec::Interval { sites } => format!("J_{}", sites.len()),
        }
    }

    pub fn validate(&self, ctx: &ModeContext) -> Result<()> {
        let sites = ctx.grid.sites();
        match self {
            ObservableSpec::Occupation { mode } if *mode >= ctx.modes() => {
                Err(Error::IndexOutOfRange { index: *mode, n: ctx.modes() })
            }
            ObservableSpec::LocalNumber { site } if *site >= sites => {
                Err(Error::IndexOutOfRange { index: *site, n: sites })
            }
            ObservableSpec::Position { axis } if *axis >= 3 => Err(Error::IndexOutOfRange { index: *axis, n: 3 }),
            ObservableSpec::Interval { sites: r } => match r.iter().find(|&&s| s >= sites) {
                Some(&s) => Err(Error::IndexOutOfRange { index: s, n: sites }),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }

    /// Value on the classical state with the given occupied modes.
    pub fn value(&self, occ: &[usize], ctx: &ModeContext) -> f64 {
        match self {
            ObservableSpec::Occupation { mode } => f64::from(u8::from(occ.contains(mode))),
            ObservableSpec::LocalNumber { site } => occ.iter().filter(|&&l| ctx.site_of(l) == *site).count() as f64,
            ObservableSpec::Total => occ.len() as f64,
            ObservableSpec::Position { axis } => occ.iter().map(|&l| ctx.grid.position(ctx.site_of(l))[*axis]).sum(),
            ObservableSpec::Interval { sites } => occ.iter().filter(|&&l| sites.contains(&ctx.site_of(l))).count() as f64,
        }
    }
}

/// A diagonal observable tabulated over a state list.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalObservable {
    pub name: String,
    pub values: Vec<f64>,
}

impl DiagonalObservable {
    pub fn on_sector(spec: &ObservableSpec, basis: &SectorBasis, ctx: &ModeContext) -> Result<Self> {
        spec.validate(ctx)?;
        if basis.modes() != ctx.modes() {
            return Err(Error::DimensionMismatch { expected: ctx.modes(), got: basis.modes() });
        }
        let values = basis.states().map(|occ| spec.value(&occ, ctx)).collect();
        Ok(Self { name: spec.name(), values })
    }

    /// Tabulated over all `2^B` Grassmann masks.
    pub fn on_full_space(spec: &ObservableSpec, ctx: &ModeContext) -> Result<Self> {
        spec.validate(ctx)?;
        let b = ctx.modes();
        if b > crate::grassmann::MAX_ALGEBRA_VARS {
            return Err(Error::TooManyVariables { n: b, max: crate::grassmann::MAX_ALGEBRA_VARS });
        }
        let values = (0u32..1 << b)
            .map(|mask| {
                let occ: Vec<usize> = (0..b).filter(|&l| mask >> l & 1 == 0).collect();
                spec.value(&occ, ctx)
            })
            .collect();
        Ok(Self { name: spec.name(), values })
    }

    /// Distinct attained values, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn to_sparse(&self) -> SparseMatrix<f64> {
        let n = self.values.len();
        SparseMatrix::from_triplets(n, n, self.values.iter().enumerate().map(|(i, &a)| (i, i, a)))
    }
}

/// `⟨A⟩` by the classical rule `Σ p_τ A_τ` and the quantum rule `qᵀÂq`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expectation {
    pub classical: f64,
    pub quantum: f64,
}

impl Expectation {
    pub fn discrepancy(&self) -> f64 {
        (self.classical - self.quantum).abs()
    }
}

pub fn expect(a: &DiagonalObservable, q: &ClassicalWaveFunction) -> Result<Expectation> {
    if a.values.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: q.len(), got: a.values.len() });
    }
    let (p, _signs) = q.split();
    let classical = p.expect(&a.values);
    let quantum = dot(q.amplitudes(), &a.to_sparse().mul_vec(q.amplitudes()));
    Ok(Expectation { classical, quantum })
}

/// Quantum-rule density `Σ_ε q_ε(x)²` of one-particle amplitudes per site.
pub fn one_particle_density(q: &[f64], ctx: &ModeContext) -> Vec<f64> {
    let mut d = vec![0.0; ctx.grid.sites()];
    for (l, a) in q.iter().enumerate() {
        d[ctx.site_of(l)] += a * a;
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositionMoments {
    pub mean: [f64; 3],
    /// `Σ_k ⟨X_k X_k⟩ - ⟨X_k⟩⟨X_k⟩`.
    pub dispersion: f64,
}

/// Position moments of a one-particle sector state by the classical rule.
pub fn position_moments_classical(state: &SectorState, ctx: &ModeContext) -> Result<PositionMoments> {
    let q = state.wavefunction()?;
    let (p, _) = q.split();
    let mut mean = [0.0; 3];
    let mut second = 0.0;
    for axis in 0..3 {
        let x = DiagonalObservable::on_sector(&ObservableSpec::Position { axis }, &state.basis, ctx)?;
        mean[axis] = p.expect(&x.values);
        let x2: Vec<f64> = x.values.iter().map(|v| v * v).collect();
        second += p.expect(&x2);
    }
    Ok(PositionMoments { mean, dispersion: second - mean.iter().map(|m| m * m).sum::<f64>() })
}

/// `∫ x φ†φ` and `∫ x² φ†φ` from one-particle amplitudes.
pub fn position_moments_quantum(q: &[f64], ctx: &ModeContext) -> PositionMoments {
    let d = one_particle_density(q, ctx);
    let mut mean = [0.0; 3];
    let mut second = 0.0;
    for (x, w) in d.iter().enumerate() {
        let pos = ctx.grid.position(x);
        for k in 0..3 {
            mean[k] += w * pos[k];
            second += w * pos[k] * pos[k];
        }
    }
    PositionMoments { mean, dispersion: second - mean.iter().map(|m| m * m).sum::<f64>() }
}

/// `d⟨A⟩/dt = ⟨q [Â, K] q⟩`.
pub fn expectation_flow(a: &DiagonalObservable, q: &[f64], k: &EvolutionGenerator) -> Result<f64> {
    if a.values.len() != q.len() || k.dim() != q.len() {
        return Err(Error::DimensionMismatch { expected: q.len(), got: k.dim() });
    }
    let aq: Vec<f64> = q.iter().zip(&a.values).map(|(x, v)| x * v).collect();
    let akq: Vec<f64> = k.apply(q).iter().zip(&a.values).map(|(x, v)| x * v).collect();
    let kaq = k.apply(&aq);
    Ok(q.iter().zip(akq.iter().zip(&kaq)).map(|(x, (u, w))| x * (u - w)).sum())
}

/// `ρ_ij = ⟨q| ∂/∂ψ_i ψ_j |q⟩` for a sector state.
pub fn one_body_density(state: &SectorState) -> DMatrix<f64> {
    let b = &state.basis;
    let q = &state.amplitudes;
    let n = b.modes();
    let mut rho = DMatrix::zeros(n, n);
    let mut rest = Vec::new();
    for (r, occ) in b.states().enumerate() {
        if q[r] == 0.0 {
            continue;
        }
        for (p, &j) in occ.iter().enumerate() {
            rho[(j, j)] += q[r] * q[r];
            let sj = annihilation_sign(&occ, j);
            rest.clear();
            rest.extend(occ[..p].iter().chain(&occ[p + 1..]));
            for i in 0..n {
                if i == j || rest.binary_search(&i).is_ok() {
                    continue;
                }
                let si = creation_sign(&rest, i);
                let mut next = rest.clone();
                next.insert(next.partition_point(|&o| o < i), i);
                rho[(i, j)] += q[b.rank(&next)] * sj * si * q[r];
            }
        }
    }
    rho
}

/// `∂_t⟨N(x)⟩` from the bilocal expectations `⟨∂/∂ψ_i ψ_j⟩`: the lattice
/// form of `(T_k)_ηα ∂_k ⟨M_αη⟩`, `Σ_{i∈x} Σ_j C_ij ρ_ij - Σ_i Σ_{j∈x} C_ij ρ_ij`.
pub fn density_flow_bilocal(rho: &DMatrix<f64>, c: &SparseMatrix<f64>, site: usize, ctx: &ModeContext) -> f64 {
    c.iter()
        .map(|(i, j, v)| {
            let inside = |l: usize| f64::from(u8::from(ctx.site_of(l) == site));
            v * rho[(i, j)] * (inside(i) - inside(j))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{one_body_matrix, LatticeGeometry, ModelParams};

    fn chain(n: usize) -> (SparseMatrix<f64>, ModeContext) {
        let geom = LatticeGeometry::chain(n, 0.5, 0.5).unwrap();
        let c = one_body_matrix(&ModelParams::majorana(), &geom).unwrap();
        let ctx = ModeContext::new(VariableLayout::new(n, 1).unwrap(), geom.grid).unwrap();
        (c, ctx)
    }

    #[test]
    fn delta_state_above_empty_vacuum() {
        let vac = VacuumState::empty(8).unwrap();
        let mut q = vec![0.0; 8];
        q[5] = 1.0;
        let g1 = one_particle_state(&q, &vac).unwrap();
        assert_eq!(g1.basis.particles(), 1);
        assert_eq!(g1.amplitudes.iter().filter(|a| **a != 0.0).count(), 1);
        assert_eq!(extract_one_particle(&g1, &vac).unwrap(), q);
    }

    #[test]
    fn unnormalized_amplitudes_rejected() {
        let vac = VacuumState::empty(4).unwrap();
        assert!(matches!(one_particle_state(&[1.0, 1.0, 0.0, 0.0], &vac), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn vacua_are_static() {
        let (c, _) = chain(3);
        for kind in [VacuumKind::Empty, VacuumKind::Full, VacuumKind::HalfFilled] {
            let v = VacuumState::build(kind, &c).unwrap();
            assert!(v.static_residual(&c).unwrap() < 1e-13, "{kind:?}");
            assert!((v.state.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_two_particle_input_is_excluded() {
        let q = DMatrix::from_fn(4, 4, |i, j| (i + j) as f64);
        assert_eq!(two_particle_state(&q, 100).unwrap_err(), Error::PauliExcluded);
    }

    #[test]
    fn two_particle_round_trip() {
        let q = DMatrix::from_fn(5, 5, |i, j| (i as f64 - 2.0 * j as f64).sin());
        let g2 = two_particle_state(&q, 100).unwrap();
        assert!((g2.norm() - 1.0).abs() < 1e-14);
        let back = extract_two_particle(&g2).unwrap();
        let a = (&q - q.transpose()) * 0.5;
        let a = &a / a.norm();
        assert!((back - a).amax() < 1e-15);
    }

    #[test]
    fn total_number_on_one_particle_state() {
        let (_, ctx) = chain(4);
        let vac = VacuumState::empty(16).unwrap();
        let q: Vec<f64> = (0..16).map(|l| 0.25 * if l % 3 == 0 { -1.0 } else { 1.0 }).collect();
        let g1 = one_particle_state(&q, &vac).unwrap();
        let n = DiagonalObservable::on_sector(&ObservableSpec::Total, &g1.basis, &ctx).unwrap();
        let e = expect(&n, &g1.wavefunction().unwrap()).unwrap();
        assert_eq!(e.classical, 1.0);
        assert!((e.quantum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn local_number_matches_density() {
        let (_, ctx) = chain(4);
        let vac = VacuumState::empty(16).unwrap();
        let raw: Vec<f64> = (0..16).map(|l| (l * 5 % 7) as f64 - 3.0).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let q: Vec<f64> = raw.iter().map(|x| x / norm).collect();
        let g1 = one_particle_state(&q, &vac).unwrap();
        let dens = one_particle_density(&q, &ctx);
        let wf = g1.wavefunction().unwrap();
        for x in 0..4 {
            let n = DiagonalObservable::on_sector(&ObservableSpec::LocalNumber { site: x }, &g1.basis, &ctx).unwrap();
            let e = expect(&n, &wf).unwrap();
            assert!((e.classical - dens[x]).abs() < 1e-15);
            assert!(e.discrepancy() < 1e-15);
        }
    }

    #[test]
    fn two_peak_position_moments() {
        let (_, ctx) = chain(8);
        let vac = VacuumState::empty(32).unwrap();
        // sites 2 and 6 sit at -2 and +2 (spacing 1, centre site 4)
        let mut q = vec![0.0; 32];
        q[2 * 4] = std::f64::consts::FRAC_1_SQRT_2;
        q[6 * 4 + 3] = -std::f64::consts::FRAC_1_SQRT_2;
        let g1 = one_particle_state(&q, &vac).unwrap();
        let c = position_moments_classical(&g1, &ctx).unwrap();
        let qm = position_moments_quantum(&q, &ctx);
        assert!(c.mean[2].abs() < 1e-15);
        assert!((c.dispersion - 4.0).abs() < 1e-14);
        assert!((qm.dispersion - c.dispersion).abs() < 1e-14);
    }

    #[test]
    fn one_particle_interval_spectrum() {
        let (_, ctx) = chain(4);
        let basis = SectorBasis::new(16, 1, 100).unwrap();
        let j = DiagonalObservable::on_sector(&ObservableSpec::Interval { sites: vec![1, 2] }, &basis, &ctx).unwrap();
        assert_eq!(j.spectrum(), vec![0.0, 1.0]);
        let all = DiagonalObservable::on_sector(&ObservableSpec::Interval { sites: vec![0, 1, 2, 3] }, &basis, &ctx).unwrap();
        assert_eq!(all.spectrum(), vec![1.0]);
    }

    #[test]
    fn flow_vanishes_for_conserved_and_static() {
        let (c, ctx) = chain(4);
        let basis = SectorBasis::new(16, 2, 1000).unwrap();
        let k = EvolutionGenerator::new(one_body_operator(&basis, &c).unwrap()).unwrap();
        let q: Vec<f64> = (0..basis.dim()).map(|r| ((r * 13 % 11) as f64 - 5.0) / 30.0).collect();
        let n = DiagonalObservable::on_sector(&ObservableSpec::Total, &basis, &ctx).unwrap();
        assert_eq!(expectation_flow(&n, &q, &k).unwrap(), 0.0);
        let zero = EvolutionGenerator::new(SparseMatrix::zeros(basis.dim(), basis.dim())).unwrap();
        let nx = DiagonalObservable::on_sector(&ObservableSpec::LocalNumber { site: 1 }, &basis, &ctx).unwrap();
        assert_eq!(expectation_flow(&nx, &q, &zero).unwrap(), 0.0);
    }
}
