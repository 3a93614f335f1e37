//! One-particle Dirac equation on a periodic grid.
//!
//! `i∂_t φ = H φ`, `H = iT_k D_k + mγ⁰γ̄ + e(A_0 - T_k A_k)`, with `D_k` the
//! symmetric difference `(φ(x+ê) - φ(x-ê)) / (2h)`. This is the complex form
//! of the `N_s = 8` lattice generator, so both routes share one
//! discretization.

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensemble::{evolve, ClassicalWaveFunction};
use crate::error::{Error, Result};
use crate::evolution::Method;
use crate::fft::GridFft;
use crate::grid::Grid;
use crate::lattice::generator::build_generator_sector;
use crate::lattice::spinor::{complexify, CMat4, SpinorAlgebra};
use crate::lattice::{ExternalPotential, LatticeGeometry, ModelParams};
use crate::observables::{extract_one_particle, one_particle_state, VacuumState};
use crate::sectors::DEFAULT_SECTOR_LIMIT;
use crate::sparse::SparseMatrix;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub const NORM_TOL: f64 = 1e-9;

/// Largest `4 · sites` for the dense exponential.
pub const EXACT_DIM_LIMIT: usize = 1024;

/// Complex 4-spinor per site, stored site-major (`4 · site + component`).
#[derive(Debug, Clone, PartialEq)]
pub struct DiracField {
    pub grid: Grid,
    pub data: Vec<Complex64>,
}

impl DiracField {
    pub fn new(grid: Grid, data: Vec<Complex64>) -> Result<Self> {
        let f = Self::unchecked(grid, data)?;
        let n2 = f.norm_sq();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq: n2 });
        }
        Ok(f)
    }

    fn unchecked(grid: Grid, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != 4 * grid.sites() {
            return Err(Error::DimensionMismatch { expected: 4 * grid.sites(), got: data.len() });
        }
        if let Some(i) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(Self { grid, data })
    }

    pub fn normalized(grid: Grid, mut data: Vec<Complex64>) -> Result<Self> {
        let n = data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(Error::NotNormalized { norm_sq: 0.0 });
        }
        data.iter_mut().for_each(|z| *z /= n);
        Self::new(grid, data)
    }

    /// `φ = q₁ + i q₂` from the two real Majorana amplitude sets.
    pub fn from_majorana(grid: Grid, q1: &[f64], q2: &[f64]) -> Result<Self> {
        let data = q1.iter().zip(q2).map(|(&a, &b)| Complex64::new(a, b)).collect();
        Self::new(grid, data)
    }

    pub fn to_majorana(&self) -> (Vec<f64>, Vec<f64>) {
        (self.data.iter().map(|z| z.re).collect(), self.data.iter().map(|z| z.im).collect())
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `φ†φ` per site.
    pub fn density(&self) -> Vec<f64> {
        self.data.chunks(4).map(|c| c.iter().map(|z| z.norm_sqr()).sum()).collect()
    }

    pub fn spinor(&self, site: usize) -> Vector4<Complex64> {
        Vector4::from_column_slice(&self.data[4 * site..4 * site + 4])
    }

    /// Plane wave `u e^{ip·x}` normalized over the grid.
    pub fn plane_wave(grid: Grid, p: [f64; 3], u: Vector4<Complex64>) -> Result<Self> {
        let mut data = Vec::with_capacity(4 * grid.sites());
        for s in 0..grid.sites() {
            let x = grid.position(s);
            let ph = Complex64::from_polar(1.0, p[0] * x[0] + p[1] * x[1] + p[2] * x[2]);
            data.extend(u.iter().map(|c| c * ph));
        }
        Self::normalized(grid, data)
    }

    /// Gaussian packet `u exp(-|x - x₀|²/(4σ²) + i k·x)`.
    pub fn gaussian(grid: Grid, center: [f64; 3], width: f64, k: [f64; 3], u: Vector4<Complex64>) -> Result<Self> {
        let mut data = Vec::with_capacity(4 * grid.sites());
        for s in 0..grid.sites() {
            let x = grid.position(s);
            let mut r2 = 0.0;
            let mut ph = 0.0;
            for a in grid.active_axes() {
                r2 += (x[a] - center[a]).powi(2);
                ph += k[a] * x[a];
            }
            let amp = Complex64::from_polar((-r2 / (4.0 * width * width)).exp(), ph);
            data.extend(u.iter().map(|c| c * amp));
        }
        Self::normalized(grid, data)
    }
}

/// Spinor basis of a Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinorBasis {
    /// The real-`T_k` basis of the lattice action; `γ⁰γ̄` is off-diagonal.
    #[default]
    Original,
    /// `γ⁰γ̄ = diag(1, 1, -1, -1)`.
    Diagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub mass: f64,
    pub coupling: f64,
    pub potential: ExternalPotential,
    #[serde(default)]
    pub basis: SpinorBasis,
}

impl HamiltonianSpec {
    pub fn free(mass: f64) -> Self {
        Self { mass, coupling: 0.0, potential: ExternalPotential::zero(), basis: SpinorBasis::Original }
    }

    pub fn from_params(p: &ModelParams) -> Self {
        Self { mass: p.mass, coupling: p.coupling, potential: p.potential.clone(), basis: SpinorBasis::Original }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !self.mass.is_finite() || !self.coupling.is_finite() {
            return Err(Error::InvalidParameter("mass and coupling must be finite".into()));
        }
        self.potential.validate(grid.sites())
    }

    /// `V(x) = e A_0(x)`.
    pub fn scalar_potential(&self, sites: usize) -> Vec<f64> {
        (0..sites).map(|x| self.coupling * self.potential.a0_at(x)).collect()
    }
}

/// Unitary `U` with `U γ⁰γ̄ U† = diag(1, 1, -1, -1)` and
/// `U (-T_k) U† = (0, σ_k; σ_k†, 0)`, `σ₁ = -1`, `σ₂ = iτ₂`, `σ₃ = iτ₃`.
pub fn diagonal_basis() -> CMat4 {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (a, b) = (Complex64::new(r, 0.0), Complex64::new(0.0, r));
    #[rustfmt::skip]
    let u = Matrix4::new(
        ZERO, -b, ZERO, a,
        -b, ZERO, -a, ZERO,
        ZERO, a, ZERO, -b,
        -a, ZERO, -b, ZERO,
    );
    u
}

struct Blocks {
    /// `i T_k` (rotated into the chosen basis).
    kinetic: [CMat4; 3],
    /// `γ⁰γ̄`.
    beta: CMat4,
    t: [CMat4; 3],
}

fn blocks(basis: SpinorBasis) -> Blocks {
    let alg = SpinorAlgebra::build();
    let u = match basis {
        SpinorBasis::Original => CMat4::identity(),
        SpinorBasis::Diagonal => diagonal_basis(),
    };
    let rot = |m: &CMat4| u * m * u.adjoint();
    let t = alg.t.map(|tk| rot(&complexify(&tk)));
    Blocks { kinetic: t.map(|tk| tk * I), beta: rot(&alg.beta()), t }
}

/// Sparse matrix of `H` on the grid.
pub fn hamiltonian_matrix(spec: &HamiltonianSpec, grid: &Grid) -> Result<SparseMatrix<Complex64>> {
    spec.validate(grid)?;
    let b = blocks(spec.basis);
    let n = 4 * grid.sites();
    let inv = 1.0 / (2.0 * grid.spacing);
    let mut trip = Vec::new();
    let mut push = |r: usize, c: usize, m: &CMat4, s: f64| {
        for g in 0..4 {
            for d in 0..4 {
                let v = m[(g, d)] * s;
                if v != ZERO {
                    trip.push((4 * r + g, 4 * c + d, v));
                }
            }
        }
    };
    for x in 0..grid.sites() {
        for k in grid.active_axes() {
            push(x, grid.shift(x, k, 1), &b.kinetic[k], inv);
            push(x, grid.shift(x, k, -1), &b.kinetic[k], -inv);
        }
        push(x, x, &b.beta, spec.mass);
        let mut v = CMat4::identity() * Complex64::from(spec.potential.a0_at(x));
        for k in 0..3 {
            v -= b.t[k] * Complex64::from(spec.potential.ak_at(k, x));
        }
        push(x, x, &v, spec.coupling);
    }
    Ok(SparseMatrix::from_triplets(n, n, trip))
}

/// `max |H_ij - conj(H_ji)|`.
pub fn hermiticity_defect(h: &SparseMatrix<Complex64>) -> f64 {
    h.iter().fold(0.0f64, |m, (r, c, v)| m.max((v - h.get(c, r).conj()).norm()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum DiracScheme {
    /// Dense `exp(-iHt)`.
    Exact,
    /// Strang split-step: potential half steps around the exact free step in
    /// momentum space.
    SplitStep { dt: f64 },
}

fn check_hermitean(spec: &HamiltonianSpec, grid: &Grid) -> Result<SparseMatrix<Complex64>> {
    let h = hamiltonian_matrix(spec, grid)?;
    let defect = hermiticity_defect(&h);
    if defect >= 1e-12 {
        return Err(Error::NotHermitean { defect });
    }
    Ok(h)
}

/// Lattice momentum `sin(p h)/h` per axis (zero on axes without a derivative).
fn lattice_momentum(grid: &Grid, p: [f64; 3]) -> [f64; 3] {
    let h = grid.spacing;
    let mut s = [0.0; 3];
    for k in 0..3 {
        if grid.extents[k] > 2 {
            s[k] = (p[k] * h).sin() / h;
        }
    }
    s
}

/// Largest free energy on the grid and largest potential magnitude.
pub fn spectral_bounds(spec: &HamiltonianSpec, grid: &Grid) -> (f64, f64) {
    let k_axes: f64 = (0..3).filter(|&k| grid.extents[k] > 2).count() as f64;
    let e_max = (k_axes / (grid.spacing * grid.spacing) + spec.mass * spec.mass).sqrt();
    let v_max = (0..grid.sites())
        .map(|x| {
            let a: f64 = (0..3).map(|k| spec.potential.ak_at(k, x).powi(2)).sum::<f64>().sqrt();
            spec.coupling.abs() * (spec.potential.a0_at(x).abs() + a)
        })
        .fold(0.0, f64::max);
    (e_max, v_max)
}

/// Rejects `dt (E_max + V_max) > π`, which aliases phases.
pub fn check_step(dt: f64, e_max: f64, v_max: f64) -> Result<()> {
    let bound = e_max + v_max;
    if !(dt > 0.0) || dt * bound > std::f64::consts::PI {
        let suggested = if bound > 0.0 { std::f64::consts::PI / bound } else { f64::INFINITY };
        return Err(Error::StepTooLarge { dt, suggested });
    }
    Ok(())
}

pub fn dirac_evolve(phi: &DiracField, spec: &HamiltonianSpec, t: f64, scheme: DiracScheme) -> Result<DiracField> {
    let h = check_hermitean(spec, &phi.grid)?;
    match scheme {
        DiracScheme::Exact => {
            let n = phi.data.len();
            if n > EXACT_DIM_LIMIT {
                return Err(Error::InvalidParameter(format!(
                    "dense propagator limited to dimension {EXACT_DIM_LIMIT}, got {n}; use split_step"
                )));
            }
            let u = (h.to_dense() * Complex64::new(0.0, -t)).exp();
            let out = u * DVector::from_column_slice(&phi.data);
            DiracField::unchecked(phi.grid, out.as_slice().to_vec())
        }
        DiracScheme::SplitStep { dt } => {
            let (e_max, v_max) = spectral_bounds(spec, &phi.grid);
            check_step(dt, e_max, v_max)?;
            let steps = (t.abs() / dt).ceil().max(1.0) as usize;
            let tau = t / steps as f64;
            let stepper = SplitStepper::new(spec, phi.grid, tau);
            let mut data = phi.data.clone();
            for _ in 0..steps {
                stepper.step(&mut data);
            }
            DiracField::unchecked(phi.grid, data)
        }
    }
}

/// Precomputed factors of one Strang step.
struct SplitStepper {
    fft: GridFft,
    /// Free propagator per momentum.
    free: Vec<CMat4>,
    /// Potential half-step per site, `None` where the potential vanishes.
    half: Vec<Option<CMat4>>,
}

impl SplitStepper {
    fn new(spec: &HamiltonianSpec, grid: Grid, tau: f64) -> Self {
        let b = blocks(spec.basis);
        let fft = GridFft::new(grid);
        let free = fft
            .momenta()
            .iter()
            .map(|&p| {
                let s = lattice_momentum(&grid, p);
                let h0 = b.beta * Complex64::from(spec.mass)
                    - (b.t[0] * Complex64::from(s[0]) + b.t[1] * Complex64::from(s[1]) + b.t[2] * Complex64::from(s[2]));
                let e = (s.iter().map(|x| x * x).sum::<f64>() + spec.mass * spec.mass).sqrt();
                let (sn, cs) = (e * tau).sin_cos();
                let sinc = if e == 0.0 { tau } else { sn / e };
                CMat4::identity() * Complex64::from(cs) - h0 * Complex64::new(0.0, sinc)
            })
            .collect();
        let half = (0..grid.sites())
            .map(|x| {
                let a0 = spec.coupling * spec.potential.a0_at(x);
                let a: [f64; 3] = std::array::from_fn(|k| spec.coupling * spec.potential.ak_at(k, x));
                let amag = a.iter().map(|v| v * v).sum::<f64>().sqrt();
                if a0 == 0.0 && amag == 0.0 {
                    return None;
                }
                // exp(-iτ/2 (a0 - a·T)) = e^{-iτa0/2} (cos(τ|a|/2) + i sin(τ|a|/2) â·T)
                let th = 0.5 * tau * amag;
                let mut m = CMat4::identity() * Complex64::from(th.cos());
                if amag > 0.0 {
                    let dir = b.t[0] * Complex64::from(a[0]) + b.t[1] * Complex64::from(a[1]) + b.t[2] * Complex64::from(a[2]);
                    m += dir * Complex64::new(0.0, th.sin() / amag);
                }
                Some(m * Complex64::from_polar(1.0, -0.5 * tau * a0))
            })
            .collect();
        Self { fft, free, half }
    }

    fn apply_sites(&self, data: &mut [Complex64]) {
        for (x, m) in self.half.iter().enumerate() {
            if let Some(m) = m {
                let v = m * Vector4::from_column_slice(&data[4 * x..4 * x + 4]);
                data[4 * x..4 * x + 4].copy_from_slice(v.as_slice());
            }
        }
    }

    fn step(&self, data: &mut [Complex64]) {
        self.apply_sites(data);
        let sites = data.len() / 4;
        let mut comps: Vec<Vec<Complex64>> = (0..4).map(|g| (0..sites).map(|x| data[4 * x + g]).collect()).collect();
        comps.iter_mut().for_each(|c| self.fft.forward(c));
        for (p, m) in self.free.iter().enumerate() {
            let v = m * Vector4::new(comps[0][p], comps[1][p], comps[2][p], comps[3][p]);
            for g in 0..4 {
                comps[g][p] = v[g];
            }
        }
        comps.iter_mut().for_each(|c| self.fft.inverse(c));
        for x in 0..sites {
            for g in 0..4 {
                data[4 * x + g] = comps[g][x];
            }
        }
        self.apply_sites(data);
    }
}

/// Free Bloch Hamiltonian `H₀(p) = -T_k s_k + mγ⁰γ̄` in the original basis.
pub fn free_bloch(grid: &Grid, mass: f64, p: [f64; 3]) -> CMat4 {
    let b = blocks(SpinorBasis::Original);
    let s = lattice_momentum(grid, p);
    b.beta * Complex64::from(mass) - (0..3).fold(CMat4::zeros(), |acc, k| acc + b.t[k] * Complex64::from(s[k]))
}

/// Evolves `φ₀` both as the one-particle sector of the `N_s = 8` lattice
/// model and with the direct solver; returns the largest amplitude deviation.
pub fn crosscheck_sector(phi0: &DiracField, params: &ModelParams, geom: &LatticeGeometry, t: f64) -> Result<f64> {
    if phi0.grid != geom.grid {
        return Err(Error::GridMismatch(format!("field grid {:?} vs lattice grid {:?}", phi0.grid, geom.grid)));
    }
    let (q1, q2) = phi0.to_majorana();
    let q: Vec<f64> = q1.into_iter().chain(q2).collect();
    let (basis, k) = build_generator_sector(params, geom, 1, DEFAULT_SECTOR_LIMIT)?;
    let vac = VacuumState::empty(basis.modes())?;
    let g1 = one_particle_state(&q, &vac)?;
    let wf = evolve(&ClassicalWaveFunction::new(g1.amplitudes.clone())?, &k, t, Method::Exact)?;
    let g1t = crate::observables::SectorState::new(g1.basis, wf.into_amplitudes())?;
    let qt = extract_one_particle(&g1t, &vac)?;
    let direct = dirac_evolve(phi0, &HamiltonianSpec::from_params(params), t, DiracScheme::Exact)?;
    let n = phi0.data.len();
    let dev = direct
        .data
        .iter()
        .enumerate()
        .map(|(l, z)| (z.re - qt[l]).abs().max((z.im - qt[n + l]).abs()))
        .fold(0.0, f64::max);
    Ok(dev)
}

/// A field rotated into the diagonal basis: upper `χ`, lower `ρ`.
pub fn to_diagonal(phi: &DiracField) -> DiracField {
    let u = diagonal_basis();
    let mut data = phi.data.clone();
    for x in 0..phi.grid.sites() {
        let v = u * phi.spinor(x);
        data[4 * x..4 * x + 4].copy_from_slice(v.as_slice());
    }
    DiracField { grid: phi.grid, data }
}

pub fn from_diagonal(phi: &DiracField) -> DiracField {
    let u = diagonal_basis().adjoint();
    let mut data = phi.data.clone();
    for x in 0..phi.grid.sites() {
        let v = u * phi.spinor(x);
        data[4 * x..4 * x + 4].copy_from_slice(v.as_slice());
    }
    DiracField { grid: phi.grid, data }
}

/// `σ_k` of the diagonal-basis Hamiltonian.
pub fn sigma() -> [nalgebra::Matrix2<Complex64>; 3] {
    let one = Complex64::from(1.0);
    [
        nalgebra::Matrix2::new(-one, ZERO, ZERO, -one),
        nalgebra::Matrix2::new(ZERO, one, -one, ZERO),
        nalgebra::Matrix2::new(I, ZERO, ZERO, -I),
    ]
}

/// `A χ = σ_k† p_k χ / (2M)` with `p_k = -i D_k`, for a 2-spinor field stored
/// site-major.
pub fn lower_from_upper(chi: &[Complex64], grid: &Grid, mass: f64) -> Vec<Complex64> {
    let sig = sigma();
    let inv = 1.0 / (2.0 * grid.spacing);
    let mut out = vec![ZERO; chi.len()];
    for x in 0..grid.sites() {
        let mut acc = nalgebra::Vector2::zeros();
        for k in grid.active_axes() {
            if grid.extents[k] <= 2 {
                continue;
            }
            let (xp, xm) = (grid.shift(x, k, 1), grid.shift(x, k, -1));
            let d = nalgebra::Vector2::new(chi[2 * xp] - chi[2 * xm], chi[2 * xp + 1] - chi[2 * xm + 1]) * Complex64::from(inv);
            acc += sig[k].adjoint() * d * (-I);
        }
        acc /= Complex64::from(2.0 * mass);
        out[2 * x] = acc[0];
        out[2 * x + 1] = acc[1];
    }
    out
}

/// Outcome of [`nonrel_reduce`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub psi: crate::schrodinger::SchrodingerField,
    /// `‖ρ - Aχ‖`.
    pub residual: f64,
    /// `‖ρ‖`, the weight of the small components.
    pub lower_norm: f64,
}

/// Non-relativistic reduction at time `t`: rotates to the diagonal basis,
/// keeps the upper components and removes the rest-energy phase,
/// `ψ = e^{iMt} χ`.
pub fn nonrel_reduce(phi: &DiracField, mass: f64, t: f64) -> Result<Reduction> {
    if mass == 0.0 {
        return Err(Error::ZeroMass);
    }
    let d = to_diagonal(phi);
    let sites = phi.grid.sites();
    let phase = Complex64::from_polar(1.0, mass * t);
    let mut chi = Vec::with_capacity(2 * sites);
    let mut rho = Vec::with_capacity(2 * sites);
    for x in 0..sites {
        chi.extend_from_slice(&d.data[4 * x..4 * x + 2]);
        rho.extend_from_slice(&d.data[4 * x + 2..4 * x + 4]);
    }
    let a_chi = lower_from_upper(&chi, &phi.grid, mass);
    let residual = rho.iter().zip(&a_chi).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let lower_norm = rho.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let psi = crate::schrodinger::SchrodingerField {
        grid: phi.grid,
        components: 2,
        data: chi.iter().map(|z| z * phase).collect(),
    };
    Ok(Reduction { psi, residual, lower_norm })
}

/// Projects onto the positive-energy subspace of the free lattice
/// Hamiltonian with `(1 + H₀(p)/E(p)) / 2`, then normalizes.
pub fn positive_energy_projection(phi: &DiracField, mass: f64) -> Result<DiracField> {
    let grid = phi.grid;
    let fft = GridFft::new(grid);
    let sites = grid.sites();
    let mut comps: Vec<Vec<Complex64>> = (0..4).map(|g| (0..sites).map(|x| phi.data[4 * x + g]).collect()).collect();
    comps.iter_mut().for_each(|c| fft.forward(c));
    for (i, p) in fft.momenta().into_iter().enumerate() {
        let h0 = free_bloch(&grid, mass, p);
        let s = lattice_momentum(&grid, p);
        let e = (s.iter().map(|x| x * x).sum::<f64>() + mass * mass).sqrt();
        let proj = if e > 0.0 { (CMat4::identity() + h0 / Complex64::from(e)) * Complex64::from(0.5) } else { CMat4::identity() };
        let v = proj * Vector4::new(comps[0][i], comps[1][i], comps[2][i], comps[3][i]);
        for g in 0..4 {
            comps[g][i] = v[g];
        }
    }
    comps.iter_mut().for_each(|c| fft.inverse(c));
    let data = (0..sites).flat_map(|x| (0..4).map(move |g| (x, g))).map(|(x, g)| comps[g][x]).collect();
    DiracField::normalized(grid, data)
}

/// Positive-energy Dirac state whose upper diagonal-basis components are
/// close to `chi` (2 components per site).
pub fn positive_energy_packet(chi: &[Complex64], grid: Grid, mass: f64) -> Result<DiracField> {
    if mass == 0.0 {
        return Err(Error::ZeroMass);
    }
    if chi.len() != 2 * grid.sites() {
        return Err(Error::DimensionMismatch { expected: 2 * grid.sites(), got: chi.len() });
    }
    let mut data = Vec::with_capacity(4 * grid.sites());
    for x in 0..grid.sites() {
        data.extend_from_slice(&chi[2 * x..2 * x + 2]);
        data.extend_from_slice(&[ZERO, ZERO]);
    }
    let upper = from_diagonal(&DiracField::unchecked(grid, data)?);
    positive_energy_projection(&upper, mass)
}

/// Outcome of [`nonrel_comparison`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonrelReport {
    pub mass: f64,
    /// `Σ_x |φ†φ - ψ†ψ|` at the final time.
    pub l1: f64,
    /// `‖ρ - Aχ‖` at the final time.
    pub residual: f64,
    pub lower_norm: f64,
    pub dirac_norm_drift: f64,
    pub schrodinger_norm_drift: f64,
}

/// Evolves a positive-energy packet built from `chi` with the free Dirac
/// Hamiltonian and its Schrödinger reduction with the matching kinetic
/// symbol, and compares the densities at time `t`.
pub fn nonrel_comparison(chi: &[Complex64], grid: Grid, mass: f64, t: f64, dt: f64) -> Result<NonrelReport> {
    use crate::schrodinger::{schrodinger_evolve, KineticMode, SchrodingerField, SchrodingerScheme, SchrodingerSpec};
    let phi0 = positive_energy_packet(chi, grid, mass)?;
    let psi0 = nonrel_reduce(&phi0, mass, 0.0)?.psi;
    let psi0 = SchrodingerField::normalized(grid, 2, psi0.data)?;
    let phi = dirac_evolve(&phi0, &HamiltonianSpec::free(mass), t, DiracScheme::SplitStep { dt })?;
    let kinetic = KineticMode::SymmetricDifference;
    let psi = schrodinger_evolve(&psi0, &SchrodingerSpec::free(mass), t, SchrodingerScheme::SplitStep { dt, kinetic })?;
    let red = nonrel_reduce(&phi, mass, t)?;
    let l1 = phi.density().iter().zip(psi.density()).map(|(a, b)| (a - b).abs()).sum();
    Ok(NonrelReport {
        mass,
        l1,
        residual: red.residual,
        lower_norm: red.lower_norm,
        dirac_norm_drift: (phi.norm_sq() - 1.0).abs(),
        schrodinger_norm_drift: (psi.norm_sq() - 1.0).abs(),
    })
}

/// Dense `H` for small grids, for spectral checks.
pub fn dense_hamiltonian(spec: &HamiltonianSpec, grid: &Grid) -> Result<DMatrix<Complex64>> {
    Ok(hamiltonian_matrix(spec, grid)?.to_dense())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_basis_block_form() {
        let u = diagonal_basis();
        assert!((u * u.adjoint() - CMat4::identity()).camax() < 1e-15);
        let b = blocks(SpinorBasis::Diagonal);
        let g = CMat4::from_diagonal(&Vector4::new(1.0, 1.0, -1.0, -1.0).map(Complex64::from));
        assert!((b.beta - g).camax() < 1e-15);
        let sig = sigma();
        for k in 0..3 {
            let m = -b.t[k];
            assert!(m.fixed_view::<2, 2>(0, 0).camax() < 1e-15);
            assert!((m.fixed_view::<2, 2>(0, 2) - sig[k]).camax() < 1e-15);
            assert!((m.fixed_view::<2, 2>(2, 0) - sig[k].adjoint()).camax() < 1e-15);
        }
    }

    #[test]
    fn hamiltonian_is_hermitean() {
        let grid = Grid::new([3, 1, 5], 0.5).unwrap();
        let pot = ExternalPotential {
            a0: (0..15).map(|x| (x as f64 * 0.3).sin()).collect(),
            ak: [vec![0.1; 15], vec![], (0..15).map(|x| x as f64 * 0.01).collect()],
        };
        for basis in [SpinorBasis::Original, SpinorBasis::Diagonal] {
            let spec = HamiltonianSpec { mass: 0.8, coupling: 1.2, potential: pot.clone(), basis };
            assert!(hermiticity_defect(&hamiltonian_matrix(&spec, &grid).unwrap()) < 1e-15);
        }
    }

    #[test]
    fn rest_frame_oscillates_at_mass() {
        let grid = Grid::line(8, 0.5).unwrap();
        let m = 1.7;
        // eigenvector of γ⁰γ̄ with eigenvalue +1, uniform in space
        let u = diagonal_basis().adjoint() * Vector4::new(1.0, 0.0, 0.0, 0.0).map(Complex64::from);
        let phi = DiracField::plane_wave(grid, [0.0; 3], u).unwrap();
        let t = 0.9;
        for scheme in [DiracScheme::Exact, DiracScheme::SplitStep { dt: 0.05 }] {
            let out = dirac_evolve(&phi, &HamiltonianSpec::free(m), t, scheme).unwrap();
            let ph = Complex64::from_polar(1.0, -m * t);
            for (a, b) in out.data.iter().zip(&phi.data) {
                assert!((a - b * ph).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn step_guard_suggests_a_step() {
        let grid = Grid::line(8, 0.1).unwrap();
        let phi = DiracField::plane_wave(grid, [0.0; 3], Vector4::new(1.0, 0.0, 0.0, 0.0).map(Complex64::from)).unwrap();
        match dirac_evolve(&phi, &HamiltonianSpec::free(1.0), 1.0, DiracScheme::SplitStep { dt: 1.0 }) {
            Err(Error::StepTooLarge { suggested, .. }) => assert!(suggested < 1.0 && suggested > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_mass_has_no_reduction() {
        let grid = Grid::line(4, 1.0).unwrap();
        let phi = DiracField::plane_wave(grid, [0.0; 3], Vector4::new(1.0, 0.0, 0.0, 0.0).map(Complex64::from)).unwrap();
        assert_eq!(nonrel_reduce(&phi, 0.0, 0.0).unwrap_err(), Error::ZeroMass);
    }
    fn random_field(grid: Grid, seed: u64) -> DiracField {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data = (0..4 * grid.sites()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        DiracField::normalized(grid, data).unwrap()
    }

    #[test]
    fn sector_and_direct_paths_agree() {
        let geom = LatticeGeometry::chain(16, 0.25, 0.1).unwrap();
        let a0 = (0..16).map(|x| 0.4 * (x as f64 * 0.7).cos()).collect();
        let params = ModelParams::dirac(0.9, 0.6, ExternalPotential::scalar(a0));
        let phi = random_field(geom.grid, 7);
        assert!(crosscheck_sector(&phi, &params, &geom, 1.0).unwrap() < 1e-8);
        let other = LatticeGeometry::chain(12, 0.25, 0.1).unwrap();
        assert!(matches!(crosscheck_sector(&phi, &params, &other, 1.0), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn massless_plane_wave_follows_lattice_dispersion() {
        let grid = Grid::line(16, 0.3).unwrap();
        let p = grid.momenta(2)[3];
        let h0 = free_bloch(&grid, 0.0, [0.0, 0.0, p]);
        let eig = nalgebra::linalg::SymmetricEigen::new(h0.map(|z| z));
        let j = eig.eigenvalues.imax();
        let omega = eig.eigenvalues[j];
        assert!((omega - (p * 0.3).sin() / 0.3).abs() < 1e-12);
        let u: Vector4<Complex64> = eig.eigenvectors.column(j).into_owned();
        let phi = DiracField::plane_wave(grid, [0.0, 0.0, p], u).unwrap();
        let t = 1.3;
        for scheme in [DiracScheme::Exact, DiracScheme::SplitStep { dt: 0.05 }] {
            let out = dirac_evolve(&phi, &HamiltonianSpec::free(0.0), t, scheme).unwrap();
            let ph = Complex64::from_polar(1.0, -omega * t);
            assert!(out.data.iter().zip(&phi.data).all(|(a, b)| (a - b * ph).norm() < 1e-12));
        }
    }

    #[test]
    fn constant_scalar_potential_is_a_global_phase() {
        let grid = Grid::line(10, 0.5).unwrap();
        let phi = random_field(grid, 3);
        let (e, a0, t) = (0.7, 1.1, 0.8);
        let free = dirac_evolve(&phi, &HamiltonianSpec::free(0.5), t, DiracScheme::Exact).unwrap();
        let spec = HamiltonianSpec { mass: 0.5, coupling: e, potential: ExternalPotential::constant(10, a0), basis: SpinorBasis::Original };
        let ph = Complex64::from_polar(1.0, -e * a0 * t);
        for scheme in [DiracScheme::Exact, DiracScheme::SplitStep { dt: 0.02 }] {
            let out = dirac_evolve(&phi, &spec, t, scheme).unwrap();
            assert!(out.data.iter().zip(&free.data).all(|(a, b)| (a - b * ph).norm() < 1e-12));
            assert!((out.norm_sq() - 1.0).abs() < 1e-12);
        }
    }
    #[test]
    fn rest_frame_reduction_is_static() {
        let grid = Grid::line(8, 0.5).unwrap();
        let chi = vec![Complex64::from(0.25); 16];
        let phi = positive_energy_packet(&chi, grid, 2.0).unwrap();
        for t in [0.0, 0.7, 3.1] {
            let out = dirac_evolve(&phi, &HamiltonianSpec::free(2.0), t, DiracScheme::Exact).unwrap();
            let red = nonrel_reduce(&out, 2.0, t).unwrap();
            assert!(red.psi.data.iter().all(|z| (z - Complex64::from(0.25)).norm() < 1e-12));
            assert!(red.residual < 1e-14);
        }
    }

    #[test]
    fn nonrel_distance_shrinks_with_mass() {
        let grid = Grid::line(128, 0.25).unwrap();
        let chi: Vec<Complex64> = (0..128)
            .flat_map(|s| {
                let x = grid.position(s)[2];
                let a = Complex64::from_polar((-x * x / 16.0).exp(), 0.3 * x);
                [a, a * Complex64::new(0.0, 0.5)]
            })
            .collect();
        let reports: Vec<NonrelReport> = [1.0, 2.0, 4.0, 8.0].iter().map(|&m| nonrel_comparison(&chi, grid, m, 5.0, 0.05).unwrap()).collect();
        for w in reports.windows(2) {
            assert!(w[1].l1 < w[0].l1, "{reports:?}");
            assert!(w[1].residual < w[0].residual);
        }
    }
}
