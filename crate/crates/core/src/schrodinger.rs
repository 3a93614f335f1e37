//! Schrödinger equation `iħ∂_t ψ = (p²/2M + V) ψ` on a periodic grid.
//!
//! Two unitary propagators: a Strang split-step with the kinetic factor
//! applied in momentum space, and Crank-Nicolson with the 3-point Laplacian.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::GridFft;
use crate::grid::Grid;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest site count for the dense Crank-Nicolson solve (`d > 1`).
pub const CN_DENSE_LIMIT: usize = 1024;

/// 1- or 2-component amplitude per site, stored site-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SchrodingerField {
    pub grid: Grid,
    pub components: usize,
    pub data: Vec<Complex64>,
}

impl SchrodingerField {
    pub fn new(grid: Grid, components: usize, data: Vec<Complex64>) -> Result<Self> {
        if components != 1 && components != 2 {
            return Err(Error::InvalidParameter(format!("components must be 1 or 2, got {components}")));
        }
        if data.len() != components * grid.sites() {
            return Err(Error::DimensionMismatch { expected: components * grid.sites(), got: data.len() });
        }
        if let Some(i) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(Self { grid, components, data })
    }

    pub fn normalized(grid: Grid, components: usize, data: Vec<Complex64>) -> Result<Self> {
        let mut f = Self::new(grid, components, data)?;
        let n = f.norm_sq().sqrt();
        if n == 0.0 {
            return Err(Error::NotNormalized { norm_sq: 0.0 });
        }
        f.data.iter_mut().for_each(|z| *z /= n);
        Ok(f)
    }

    /// Spin-ignored Gaussian `exp(-|x - x₀|²/(4σ²) + i k·x)`; `σ` is the
    /// position spread of the density.
    pub fn gaussian(grid: Grid, center: [f64; 3], width: f64, k: [f64; 3]) -> Result<Self> {
        let data = (0..grid.sites())
            .map(|s| {
                let x = grid.position(s);
                let (mut r2, mut ph) = (0.0, 0.0);
                for a in grid.active_axes() {
                    r2 += (x[a] - center[a]).powi(2);
                    ph += k[a] * x[a];
                }
                Complex64::from_polar((-r2 / (4.0 * width * width)).exp(), ph)
            })
            .collect();
        Self::normalized(grid, 1, data)
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn density(&self) -> Vec<f64> {
        self.data.chunks(self.components).map(|c| c.iter().map(|z| z.norm_sqr()).sum()).collect()
    }

    fn component(&self, c: usize) -> Vec<Complex64> {
        self.data.iter().skip(c).step_by(self.components).copied().collect()
    }

    fn set_component(&mut self, c: usize, v: &[Complex64]) {
        for (x, z) in v.iter().enumerate() {
            self.data[self.components * x + c] = *z;
        }
    }

    /// `⟨x_axis⟩` and `⟨(x_axis - ⟨x_axis⟩)²⟩` with the density as weight.
    pub fn position_moments(&self, axis: usize) -> (f64, f64) {
        let w = self.density();
        let total: f64 = w.iter().sum();
        let xs: Vec<f64> = (0..self.grid.sites()).map(|s| self.grid.position(s)[axis]).collect();
        let mean = w.iter().zip(&xs).map(|(w, x)| w * x).sum::<f64>() / total;
        let var = w.iter().zip(&xs).map(|(w, x)| w * (x - mean).powi(2)).sum::<f64>() / total;
        (mean, var)
    }
}

/// Discretization of `p²` used by the split-step kinetic factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KineticMode {
    /// Exact `k²`.
    #[default]
    Spectral,
    /// `sin²(kh)/h²`, the square of the symmetric difference; matches the
    /// non-relativistic limit of the lattice Dirac operator.
    SymmetricDifference,
    /// `4 sin²(kh/2)/h²`, the 3-point Laplacian.
    Standard3Point,
}

impl KineticMode {
    pub fn symbol(self, k: f64, h: f64) -> f64 {
        match self {
            KineticMode::Spectral => k * k,
            KineticMode::SymmetricDifference => ((k * h).sin() / h).powi(2),
            KineticMode::Standard3Point => (2.0 * (0.5 * k * h).sin() / h).powi(2),
        }
    }

    fn max_symbol(self, h: f64) -> f64 {
        match self {
            KineticMode::Spectral => (std::f64::consts::PI / h).powi(2),
            KineticMode::SymmetricDifference => 1.0 / (h * h),
            KineticMode::Standard3Point => 4.0 / (h * h),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchrodingerSpec {
    pub mass: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    /// `V(x)` per site; empty means zero.
    #[serde(default)]
    pub potential: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

impl SchrodingerSpec {
    pub fn free(mass: f64) -> Self {
        Self { mass, hbar: 1.0, potential: Vec::new() }
    }

    pub fn with_potential(mass: f64, potential: Vec<f64>) -> Self {
        Self { mass, hbar: 1.0, potential }
    }

    pub fn v(&self, x: usize) -> f64 {
        self.potential.get(x).copied().unwrap_or(0.0)
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {}", self.mass)));
        }
        if !(self.hbar > 0.0) || !self.hbar.is_finite() {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {}", self.hbar)));
        }
        if !self.potential.is_empty() && self.potential.len() != grid.sites() {
            return Err(Error::DimensionMismatch { expected: grid.sites(), got: self.potential.len() });
        }
        if let Some(i) = self.potential.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(())
    }

    fn v_max(&self) -> f64 {
        self.potential.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum SchrodingerScheme {
    SplitStep {
        dt: f64,
        #[serde(default)]
        kinetic: KineticMode,
    },
    /// Unconditionally stable; no step restriction.
    CrankNicolson { dt: f64 },
}

/// Kinetic energy `ħ²p²/2M` per momentum index.
fn kinetic_energies(spec: &SchrodingerSpec, grid: &Grid, mode: KineticMode, fft: &GridFft) -> Vec<f64> {
    let c = spec.hbar * spec.hbar / (2.0 * spec.mass);
    fft.momenta().iter().map(|p| c * (0..3).map(|k| mode.symbol(p[k], grid.spacing)).sum::<f64>()).collect()
}

pub fn split_step_bound(spec: &SchrodingerSpec, grid: &Grid, mode: KineticMode) -> f64 {
    let axes = grid.active_axes().count() as f64;
    (spec.hbar * spec.hbar / (2.0 * spec.mass) * axes * mode.max_symbol(grid.spacing) + spec.v_max()) / spec.hbar
}

/// Reusable split-step propagator for a fixed step.
#[derive(Debug)]
pub struct SplitStepper {
    fft: GridFft,
    kinetic: Vec<Complex64>,
    half: Vec<Complex64>,
}

impl SplitStepper {
    pub fn new(spec: &SchrodingerSpec, grid: Grid, dt: f64, mode: KineticMode) -> Result<Self> {
        spec.validate(&grid)?;
        let rate = split_step_bound(spec, &grid, mode);
        if !(dt > 0.0) || dt * rate > std::f64::consts::PI {
            return Err(Error::StepTooLarge { dt, suggested: std::f64::consts::PI / rate });
        }
        let fft = GridFft::new(grid);
        let kinetic = kinetic_energies(spec, &grid, mode, &fft)
            .into_iter()
            .map(|e| Complex64::from_polar(1.0, -e * dt / spec.hbar))
            .collect();
        let half = (0..grid.sites()).map(|x| Complex64::from_polar(1.0, -0.5 * spec.v(x) * dt / spec.hbar)).collect();
        Ok(Self { fft, kinetic, half })
    }

    pub fn step(&self, psi: &mut SchrodingerField) {
        for c in 0..psi.components {
            let mut v = psi.component(c);
            v.iter_mut().zip(&self.half).for_each(|(z, h)| *z *= h);
            self.fft.forward(&mut v);
            v.iter_mut().zip(&self.kinetic).for_each(|(z, k)| *z *= k);
            self.fft.inverse(&mut v);
            v.iter_mut().zip(&self.half).for_each(|(z, h)| *z *= h);
            psi.set_component(c, &v);
        }
    }
}

/// Crank-Nicolson `(1 + iτH/2ħ) ψ' = (1 - iτH/2ħ) ψ` with the 3-point
/// Laplacian.
#[derive(Debug)]
pub struct CrankNicolson {
    grid: Grid,
    /// `iτ/(2ħ) H` as a sparse row list.
    rows: Vec<Vec<(usize, Complex64)>>,
    solver: CnSolver,
}

#[derive(Debug)]
enum CnSolver {
    Cyclic { sub: Complex64, diag: Vec<Complex64>, sup: Complex64 },
    Dense(nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>),
}

fn hamiltonian_rows(spec: &SchrodingerSpec, grid: &Grid) -> Vec<Vec<(usize, f64)>> {
    let c = spec.hbar * spec.hbar / (2.0 * spec.mass * grid.spacing * grid.spacing);
    (0..grid.sites())
        .map(|x| {
            let mut row = vec![(x, spec.v(x))];
            for k in grid.active_axes() {
                row[0].1 += 2.0 * c;
                row.push((grid.shift(x, k, 1), -c));
                row.push((grid.shift(x, k, -1), -c));
            }
            row
        })
        .collect()
}

impl CrankNicolson {
    pub fn new(spec: &SchrodingerSpec, grid: Grid, dt: f64) -> Result<Self> {
        spec.validate(&grid)?;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
        }
        let a = Complex64::new(0.0, 0.5 * dt / spec.hbar);
        let rows: Vec<Vec<(usize, Complex64)>> =
            hamiltonian_rows(spec, &grid).into_iter().map(|r| r.into_iter().map(|(c, v)| (c, a * v)).collect()).collect();
        let n = grid.sites();
        let axes: Vec<usize> = grid.active_axes().collect();
        let solver = if axes.len() == 1 && grid.extents[axes[0]] >= 3 {
            let off = rows[0].iter().find(|(c, _)| *c != 0).map(|e| e.1).unwrap_or(ZERO);
            CnSolver::Cyclic { sub: off, diag: rows.iter().map(|r| Complex64::from(1.0) + r[0].1).collect(), sup: off }
        } else if n <= CN_DENSE_LIMIT {
            let mut m = DMatrix::<Complex64>::identity(n, n);
            for (x, r) in rows.iter().enumerate() {
                for &(c, v) in r {
                    m[(x, c)] += v;
                }
            }
            CnSolver::Dense(m.lu())
        } else {
            return Err(Error::InvalidParameter(format!(
                "Crank-Nicolson supports 1-d grids or at most {CN_DENSE_LIMIT} sites; use split_step"
            )));
        };
        Ok(Self { grid, rows, solver })
    }

    pub fn step(&self, psi: &mut SchrodingerField) {
        for c in 0..psi.components {
            let v = psi.component(c);
            let rhs: Vec<Complex64> = self.rows.iter().enumerate().map(|(x, r)| v[x] - r.iter().map(|&(j, a)| a * v[j]).sum::<Complex64>()).collect();
            let out = match &self.solver {
                CnSolver::Cyclic { sub, diag, sup } => solve_cyclic(*sub, diag, *sup, &rhs),
                CnSolver::Dense(lu) => lu.solve(&nalgebra::DVector::from_vec(rhs)).expect("nonsingular").as_slice().to_vec(),
            };
            psi.set_component(c, &out);
        }
        debug_assert_eq!(psi.grid, self.grid);
    }
}

/// Solves the periodic tridiagonal system with constant off-diagonals
/// (`x[i-1]·sub + x[i]·diag[i] + x[i+1]·sup = r[i]`, indices mod n) by
/// Sherman-Morrison.
fn solve_cyclic(sub: Complex64, diag: &[Complex64], sup: Complex64, r: &[Complex64]) -> Vec<Complex64> {
    let n = diag.len();
    let gamma = -diag[0];
    let mut b = diag.to_vec();
    b[0] -= gamma;
    // corners: A[0][n-1] = sub, A[n-1][0] = sup
    b[n - 1] -= sup * sub / gamma;
    let thomas = |rhs: &[Complex64]| {
        let mut cp = vec![ZERO; n];
        let mut dp = vec![ZERO; n];
        cp[0] = sup / b[0];
        dp[0] = rhs[0] / b[0];
        for i in 1..n {
            let m = b[i] - sub * cp[i - 1];
            cp[i] = sup / m;
            dp[i] = (rhs[i] - sub * dp[i - 1]) / m;
        }
        for i in (0..n - 1).rev() {
            dp[i] = dp[i] - cp[i] * dp[i + 1];
        }
        dp
    };
    let y = thomas(r);
    let mut u = vec![ZERO; n];
    u[0] = gamma;
    u[n - 1] = sup;
    let z = thomas(&u);
    // v = (1, 0, ..., 0, sub/gamma)
    let vy = y[0] + sub / gamma * y[n - 1];
    let vz = z[0] + sub / gamma * z[n - 1];
    let f = vy / (Complex64::from(1.0) + vz);
    y.iter().zip(&z).map(|(y, z)| y - f * z).collect()
}

pub fn schrodinger_evolve(psi: &SchrodingerField, spec: &SchrodingerSpec, t: f64, scheme: SchrodingerScheme) -> Result<SchrodingerField> {
    let dt = match scheme {
        SchrodingerScheme::SplitStep { dt, .. } | SchrodingerScheme::CrankNicolson { dt } => dt,
    };
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    let steps = (t.abs() / dt).ceil() as usize;
    let mut out = psi.clone();
    if steps == 0 {
        return Ok(out);
    }
    let tau = t.abs() / steps as f64;
    // H is real, so backward evolution is conj ∘ forward ∘ conj
    let backward = t < 0.0;
    if backward {
        out.data.iter_mut().for_each(|z| *z = z.conj());
    }
    match scheme {
        SchrodingerScheme::SplitStep { kinetic, .. } => {
            let s = SplitStepper::new(spec, psi.grid, tau, kinetic)?;
            (0..steps).for_each(|_| s.step(&mut out));
        }
        SchrodingerScheme::CrankNicolson { .. } => {
            let s = CrankNicolson::new(spec, psi.grid, tau)?;
            (0..steps).for_each(|_| s.step(&mut out));
        }
    }
    if backward {
        out.data.iter_mut().for_each(|z| *z = z.conj());
    }
    Ok(out)
}

/// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩` with the kinetic symbol of `mode`.
pub fn energy(psi: &SchrodingerField, spec: &SchrodingerSpec, mode: KineticMode) -> f64 {
    let fft = GridFft::new(psi.grid);
    let kin = kinetic_energies(spec, &psi.grid, mode, &fft);
    let n = psi.grid.sites() as f64;
    let mut e = 0.0;
    for c in 0..psi.components {
        let mut v = psi.component(c);
        e += v.iter().enumerate().map(|(x, z)| spec.v(x) * z.norm_sqr()).sum::<f64>();
        fft.forward(&mut v);
        e += v.iter().zip(&kin).map(|(z, k)| k * z.norm_sqr()).sum::<f64>() / n;
    }
    e / psi.norm_sq()
}

/// `σ²(t) = σ₀² (1 + (ħt / (2Mσ₀²))²)`.
pub fn free_spread(sigma0: f64, mass: f64, hbar: f64, t: f64) -> f64 {
    sigma0 * sigma0 * (1.0 + (hbar * t / (2.0 * mass * sigma0 * sigma0)).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_solver_matches_dense() {
        let n = 7;
        let sub = Complex64::new(0.3, -0.1);
        let sup = Complex64::new(-0.2, 0.4);
        let diag: Vec<Complex64> = (0..n).map(|i| Complex64::new(2.0 + i as f64 * 0.1, 0.5)).collect();
        let r: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let x = solve_cyclic(sub, &diag, sup, &r);
        for i in 0..n {
            let lhs = sub * x[(i + n - 1) % n] + diag[i] * x[i] + sup * x[(i + 1) % n];
            assert!((lhs - r[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn free_packet_moves_and_spreads() {
        let grid = Grid::line(1024, 0.1).unwrap();
        let (m, k0, s0, t) = (1.3, 1.5, 2.0, 3.0);
        let psi = SchrodingerField::gaussian(grid, [0.0, 0.0, -10.0], s0, [0.0, 0.0, k0]).unwrap();
        let (x0, _) = psi.position_moments(2);
        let out = schrodinger_evolve(&psi, &SchrodingerSpec::free(m), t, SchrodingerScheme::SplitStep { dt: 0.005, kinetic: KineticMode::Spectral }).unwrap();
        let (x1, v1) = out.position_moments(2);
        assert!((out.norm_sq() - 1.0).abs() < 1e-12);
        assert!(((x1 - x0) - k0 / m * t).abs() < 1e-6 * (k0 / m * t));
        assert!((v1 - free_spread(s0, m, 1.0, t)).abs() < 1e-6);
    }

    #[test]
    fn crank_nicolson_conserves_energy_in_stiff_well() {
        let n = 200;
        let grid = Grid::line(n, 0.05).unwrap();
        let pot: Vec<f64> = (0..n).map(|x| if !(40..160).contains(&x) { 1e4 } else { 0.0 }).collect();
        let spec = SchrodingerSpec::with_potential(1.0, pot);
        let psi = SchrodingerField::gaussian(grid, [0.0, 0.0, -0.5], 0.4, [0.0, 0.0, 3.0]).unwrap();
        let e0 = energy(&psi, &spec, KineticMode::Standard3Point);
        let out = schrodinger_evolve(&psi, &spec, 2.0, SchrodingerScheme::CrankNicolson { dt: 1e-3 }).unwrap();
        assert!((out.norm_sq() - 1.0).abs() < 1e-10);
        assert!((energy(&out, &spec, KineticMode::Standard3Point) - e0).abs() < 1e-8 * e0.abs().max(1.0));
    }

    #[test]
    fn constant_potential_keeps_density() {
        let grid = Grid::plane(16, 12, 0.3).unwrap();
        let psi = SchrodingerField::gaussian(grid, [0.5, -0.2, 0.0], 1.0, [0.7, 0.0, 0.0]).unwrap();
        let spec0 = SchrodingerSpec::free(1.0);
        let spec1 = SchrodingerSpec::with_potential(1.0, vec![2.5; grid.sites()]);
        for kinetic in [KineticMode::Spectral, KineticMode::Standard3Point] {
            let scheme = SchrodingerScheme::SplitStep { dt: 0.01, kinetic };
            let a = schrodinger_evolve(&psi, &spec0, 0.5, scheme).unwrap().density();
            let b = schrodinger_evolve(&psi, &spec1, 0.5, scheme).unwrap().density();
            assert!(a.iter().zip(&b).all(|(a, b)| (a - b).abs() < 1e-12));
        }
    }

    #[test]
    fn step_guard() {
        let grid = Grid::line(64, 0.1).unwrap();
        let psi = SchrodingerField::gaussian(grid, [0.0; 3], 1.0, [0.0; 3]).unwrap();
        let err = schrodinger_evolve(&psi, &SchrodingerSpec::free(1.0), 1.0, SchrodingerScheme::SplitStep { dt: 0.1, kinetic: KineticMode::Spectral });
        assert!(matches!(err, Err(Error::StepTooLarge { .. })));
    }
}
