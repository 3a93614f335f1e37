//! Invariant suites behind `isingq verify`.

use std::collections::BTreeMap;

use clap::ValueEnum;
use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use isingq::demos::{demo_double_slit, demo_tunneling, DoubleSlitConfig, SlitsOpen, TunnelingConfig};
use isingq::dirac::{crosscheck_sector, nonrel_comparison, DiracField};
use isingq::ensemble::{evolve, track_signs, trajectory, two_state_generator, ClassicalWaveFunction};
use isingq::evolution::{EvolutionGenerator, Method};
use isingq::grassmann::{conjugate_basis, GrassmannElement, VariableLayout};
use isingq::grid::Grid;
use isingq::lattice::generator::variable_count;
use isingq::lattice::spinor::{SpinorAlgebra, ETA};
use isingq::lattice::transfer::{orthogonality_defect, StaggeredTransfer};
use isingq::lattice::{build_generator_grassmann, build_generator_sector, ExternalPotential, LatticeGeometry, ModelParams};
use isingq::observables::{
    antisymmetry_defect, expect, extract_one_particle, extract_two_particle, one_particle_state, position_moments_classical,
    position_moments_quantum, two_particle_state, DiagonalObservable, ModeContext, ObservableSpec, SectorState, VacuumState,
};
use isingq::sectors::{SectorBasis, DEFAULT_SECTOR_LIMIT};
use isingq::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Tiny,
    Small,
}

pub const SUITES: [&str; 11] =
    ["clifford", "grassmann", "generator", "two-state", "evolution", "equivalence", "dispersion", "observables", "nonrel", "antisymmetry", "demos"];

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub check: String,
    pub measured: f64,
    pub tolerance: f64,
    /// `"max"`: pass when measured <= tolerance; `"min"`: when measured > tolerance.
    pub bound: &'static str,
    pub pass: bool,
}

struct Suite {
    name: &'static str,
    geometry: Geometry,
    rng: ChaCha8Rng,
    checks: Vec<Check>,
}

impl Suite {
    fn at_most(&mut self, check: impl Into<String>, measured: f64, tolerance: f64) {
        let pass = measured <= tolerance;
        self.checks.push(Check { suite: self.name, check: check.into(), measured, tolerance, bound: "max", pass });
    }

    fn above(&mut self, check: impl Into<String>, measured: f64, tolerance: f64) {
        let pass = measured > tolerance;
        self.checks.push(Check { suite: self.name, check: check.into(), measured, tolerance, bound: "min", pass });
    }

    fn small(&self) -> bool {
        self.geometry == Geometry::Small
    }

    fn unit(&mut self, n: usize) -> Vec<f64> {
        let v: Vec<f64> = (0..n).map(|_| self.rng.gen_range(-1.0..1.0)).collect();
        let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / s).collect()
    }

    fn dirac_chain(&mut self, n: usize, m: f64, e: f64) -> (LatticeGeometry, ModelParams) {
        let a0 = (0..n).map(|_| self.rng.gen_range(-0.5..0.5)).collect();
        (LatticeGeometry::chain(n, 0.25, 0.1).unwrap(), ModelParams::dirac(m, e, ExternalPotential::scalar(a0)))
    }
}

/// Suites run by `all`: demos only at the small geometry.
pub fn expand(suite: &str, geometry: Geometry) -> Option<Vec<&'static str>> {
    match suite {
        "all" => Some(SUITES.iter().copied().filter(|s| *s != "demos" || geometry == Geometry::Small).collect()),
        s => SUITES.iter().find(|n| **n == s).map(|n| vec![*n]),
    }
}

pub fn run(name: &'static str, geometry: Geometry, seed: u64) -> anyhow::Result<Vec<Check>> {
    let mut s = Suite { name, geometry, rng: ChaCha8Rng::seed_from_u64(seed), checks: Vec::new() };
    match name {
        "clifford" => clifford(&mut s),
        "grassmann" => grassmann(&mut s)?,
        "generator" => generator(&mut s)?,
        "two-state" => two_state(&mut s)?,
        "evolution" => evolution(&mut s)?,
        "equivalence" => equivalence(&mut s)?,
        "dispersion" => dispersion(&mut s)?,
        "observables" => observables(&mut s)?,
        "nonrel" => nonrel(&mut s)?,
        "antisymmetry" => antisymmetry(&mut s)?,
        "demos" => demos(&mut s)?,
        _ => unreachable!("suite names come from SUITES"),
    }
    Ok(s.checks)
}

fn clifford(s: &mut Suite) {
    let alg = SpinorAlgebra::build();
    for (k, t) in alg.t.iter().enumerate() {
        s.at_most(format!("T{} symmetric", k + 1), (t - t.transpose()).amax(), 1e-15);
    }
    let i = alg.t[0] * alg.t[1] * alg.t[2];
    s.at_most("I = T1 T2 T3 antisymmetric", (i + i.transpose()).amax(), 1e-15);
    for mu in 0..4 {
        for nu in mu..4 {
            let ac = alg.gamma[mu] * alg.gamma[nu] + alg.gamma[nu] * alg.gamma[mu];
            let target = if mu == nu { Matrix4::identity() * (2.0 * ETA[mu]) } else { Matrix4::zeros() };
            s.at_most(format!("{{gamma{mu}, gamma{nu}}} = 2 eta"), (ac - target).amax(), 1e-15);
        }
    }
}

fn grassmann(s: &mut Suite) -> anyhow::Result<()> {
    let b = 4;
    let mut failures = 0usize;
    for mask in 0u32..1 << b {
        let g = GrassmannElement::basis(b, mask)?;
        for i in 0..b {
            for j in 0..b {
                let lhs = g.mul_generator(j)?.derive(i)?.add(&g.derive(i)?.mul_generator(j)?)?;
                let rhs = if i == j { g.clone() } else { GrassmannElement::zero(b)? };
                failures += usize::from(lhs != rhs);
            }
        }
    }
    s.at_most("{a+_i, a_j} = delta_ij, all states at B = 4 (failures)", failures as f64, 0.0);
    let top = if s.small() { 6 } else { 5 };
    let mut bad = 0usize;
    for n in 1..=top {
        for tau in 0u32..1 << n {
            let (sigma, sign) = conjugate_basis(tau, n);
            let conj = GrassmannElement::basis(n, sigma)?.scale(sign);
            for rho in 0u32..1 << n {
                let v = conj.multiply(&GrassmannElement::basis(n, rho)?)?.berezin_integrate();
                bad += usize::from(v != f64::from(u8::from(rho == tau)));
            }
        }
    }
    s.at_most(format!("conjugate-basis orthonormality, B <= {top} (failures)"), bad as f64, 0.0);
    Ok(())
}

fn generator(s: &mut Suite) -> anyhow::Result<()> {
    let pot = ExternalPotential { a0: vec![0.3, -0.2], ak: [vec![0.1, 0.0], vec![], vec![-0.4, 0.25]] };
    let mut cases = vec![
        ("Ns=4 chain 3", ModelParams::majorana(), LatticeGeometry::chain(3, 0.5, 0.2)?, 12),
        ("Ns=8 chain 2", ModelParams::dirac(0.7, 1.1, pot), LatticeGeometry::chain(2, 0.5, 0.2)?, if s.small() { 16 } else { 3 }),
    ];
    if s.small() {
        cases.push(("Ns=4 chain 4", ModelParams::majorana(), LatticeGeometry::chain(4, 0.5, 0.2)?, 16));
    }
    for (name, params, geom, top) in cases {
        let oracle = build_generator_grassmann(&params, &geom)?;
        let b = variable_count(&params, &geom);
        let (mut dev, mut anti, mut leaks) = (0.0f64, 0.0f64, 0usize);
        for m in 0..=top {
            let (basis, k) = build_generator_sector(&params, &geom, m, DEFAULT_SECTOR_LIMIT)?;
            anti = anti.max(k.matrix().antisymmetry_defect());
            let kt = k.matrix().transpose();
            for col in 0..basis.dim() {
                let image = oracle.apply(&GrassmannElement::basis(b, basis.mask_of(&basis.unrank(col)))?)?;
                let mut column: BTreeMap<usize, f64> = kt.row(col).collect();
                for (rho, v) in image.terms() {
                    match basis.from_mask(rho) {
                        Some(row) if b - rho.count_ones() as usize == m => dev = dev.max((column.remove(&row).unwrap_or(0.0) - v).abs()),
                        _ => leaks += 1,
                    }
                }
                dev = column.values().fold(dev, |d, v| d.max(v.abs()));
            }
        }
        s.at_most(format!("{name}: sector K vs Grassmann oracle"), dev, 1e-14);
        s.at_most(format!("{name}: K + K^T"), anti, 1e-13);
        s.at_most(format!("{name}: [N, K] cross-sector terms"), leaks as f64, 0.0);
    }
    Ok(())
}

fn two_state(s: &mut Suite) -> anyhow::Result<()> {
    let (omega, alpha): (f64, f64) = (1.3, 0.4);
    let h = 5e-4;
    let steps = (10.0 * 2.0 * std::f64::consts::PI / omega / h).ceil() as usize;
    let q0 = ClassicalWaveFunction::new(vec![alpha.cos(), -alpha.sin()])?;
    let series = trajectory(&q0, &two_state_generator(omega), h, steps)?;
    let times: Vec<f64> = (0..=steps).map(|n| n as f64 * h).collect();
    let err = series.iter().zip(&times).map(|(q, t)| (q.amplitudes()[0].powi(2) - (omega * t + alpha).cos().powi(2)).abs()).fold(0.0, f64::max);
    s.at_most("p0(t) vs cos^2(wt + a), 10 periods", err, 1e-10);
    let (_, report) = track_signs(&times, &series, 1e-6)?;
    s.at_most("sign flips outside p < 1e-6", report.violations.len() as f64, 0.0);
    s.above("sign flips observed", report.jumps.len() as f64, 0.0);
    Ok(())
}

fn random_generator(rng: &mut ChaCha8Rng, n: usize) -> anyhow::Result<EvolutionGenerator> {
    let mut trip = Vec::new();
    for i in 0..n {
        for _ in 0..4 {
            let j = rng.gen_range(0..n);
            if j != i {
                let v = rng.gen_range(-1.0..1.0);
                trip.extend([(i, j, v), (j, i, -v)]);
            }
        }
    }
    Ok(EvolutionGenerator::new(SparseMatrix::from_triplets(n, n, trip))?)
}

fn evolution(s: &mut Suite) -> anyhow::Result<()> {
    let dims: &[usize] = if s.small() { &[16, 100, 500, 2000] } else { &[16, 100, 300] };
    for &n in dims {
        let k = random_generator(&mut s.rng, n)?;
        let q = ClassicalWaveFunction::new(s.unit(n))?;
        let out = evolve(&q, &k, 10.0, Method::Auto { tol: 1e-8 })?;
        s.at_most(format!("norm drift, dim {n}, t = 10"), (out.norm() - 1.0).abs(), 1e-9);
    }
    let k = random_generator(&mut s.rng, 16)?;
    let q = ClassicalWaveFunction::new(s.unit(16))?;
    let a = evolve(&q, &k, 1.0, Method::Exact)?;
    let b = evolve(&q, &k, 1.0, Method::Splitting { tol: 1e-10 })?;
    let d = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    s.at_most("exponential vs splitting integrator, dim 16", d, 1e-8);
    for (ext, eps) in [([1, 1, 4], 0.1), ([2, 2, 2], 0.3), ([2, 3, 4], 0.05)] {
        let r = StaggeredTransfer::new(LatticeGeometry::new(ext, 0.5, eps)?).two_step()?;
        s.at_most(format!("two-step transfer R^T R = 1, extents {ext:?}"), orthogonality_defect(&r), 1e-12);
    }
    Ok(())
}

fn shipped_observables(ctx: &ModeContext) -> Vec<ObservableSpec> {
    let sites = ctx.grid.sites();
    let mut v: Vec<ObservableSpec> = (0..ctx.modes()).map(|mode| ObservableSpec::Occupation { mode }).collect();
    v.extend((0..sites).map(|site| ObservableSpec::LocalNumber { site }));
    v.push(ObservableSpec::Total);
    v.extend((0..3).map(|axis| ObservableSpec::Position { axis }));
    v.push(ObservableSpec::Interval { sites: (0..sites / 2).collect() });
    v
}

fn equivalence(s: &mut Suite) -> anyhow::Result<()> {
    let n = if s.small() { 16 } else { 8 };
    let (geom, params) = s.dirac_chain(n, 0.8, 0.6);
    let mut dev = 0.0f64;
    for _ in 0..3 {
        let data = (0..4 * n).map(|_| Complex64::new(s.rng.gen_range(-1.0..1.0), s.rng.gen_range(-1.0..1.0))).collect();
        dev = dev.max(crosscheck_sector(&DiracField::normalized(geom.grid, data)?, &params, &geom, 1.0)?);
    }
    s.at_most(format!("sector vs direct Dirac, {n} sites, m, e, A0"), dev, 1e-8);
    let ctx = ModeContext::new(VariableLayout::new(n, 2)?, geom.grid)?;
    let (basis, k) = build_generator_sector(&params, &geom, 1, DEFAULT_SECTOR_LIMIT)?;
    let g = one_particle_state(&s.unit(ctx.modes()), &VacuumState::empty(ctx.modes())?)?;
    let q = evolve(&g.wavefunction()?, &k, 0.7, Method::Exact)?;
    let mut disc = 0.0f64;
    for spec in shipped_observables(&ctx) {
        disc = disc.max(expect(&DiagonalObservable::on_sector(&spec, &basis, &ctx)?, &q)?.discrepancy());
    }
    s.at_most("sum p A vs q^T A q, all observables", disc, 1e-12);
    Ok(())
}

fn spectrum_error(params: &ModelParams, geom: &LatticeGeometry) -> anyhow::Result<(f64, f64)> {
    let (_, k) = build_generator_sector(params, geom, 1, DEFAULT_SECTOR_LIMIT)?;
    let h = k.to_dense().map(|v| Complex64::new(0.0, v));
    let mut numeric: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    numeric.sort_by(f64::total_cmp);
    let (ext, sp) = (geom.grid.extents, geom.grid.spacing);
    let mut analytic = Vec::new();
    for site in 0..geom.sites() {
        let c = geom.grid.coords(site);
        let s2: f64 = (0..3)
            .filter(|&a| ext[a] > 2)
            .map(|a| ((2.0 * std::f64::consts::PI * c[a] as f64 / ext[a] as f64).sin() / sp).powi(2))
            .sum();
        let w = (s2 + params.mass * params.mass).sqrt();
        for _ in 0..2 * params.species.flavors() {
            analytic.extend([w, -w]);
        }
    }
    analytic.sort_by(f64::total_cmp);
    let freq = numeric.iter().zip(&analytic).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let sq = numeric.iter().zip(&analytic).map(|(a, b)| (a * a - b * b).abs()).fold(0.0, f64::max);
    Ok((freq, sq))
}

fn dispersion(s: &mut Suite) -> anyhow::Result<()> {
    let n = if s.small() { 16 } else { 8 };
    let (f, _) = spectrum_error(&ModelParams::majorana(), &LatticeGeometry::chain(n, 0.25, 0.1)?)?;
    s.at_most(format!("massless chain {n}: w vs lattice dispersion"), f, 1e-10);
    let cube = if s.small() { [3, 4, 5] } else { [3, 3, 1] };
    let (f, _) = spectrum_error(&ModelParams::majorana(), &LatticeGeometry::new(cube, 0.5, 0.1)?)?;
    s.at_most(format!("massless {cube:?}: w vs lattice dispersion"), f, 1e-10);
    let (_, sq) = spectrum_error(&ModelParams::dirac(0.9, 0.0, ExternalPotential::zero()), &LatticeGeometry::chain(n, 0.5, 0.1)?)?;
    s.at_most(format!("m = 0.9 chain {n}: w^2 - k^2 - m^2"), sq, 1e-8);
    Ok(())
}

fn observables(s: &mut Suite) -> anyhow::Result<()> {
    let cases = if s.small() { vec![(4, 1), (2, 2)] } else { vec![(3, 1)] };
    for (sites, flavors) in cases {
        let geom = LatticeGeometry::chain(sites, 0.5, 0.5)?;
        let ctx = ModeContext::new(VariableLayout::new(sites, flavors)?, geom.grid)?;
        let basis = SectorBasis::new(ctx.modes(), 1, DEFAULT_SECTOR_LIMIT)?;
        let mut bad = 0usize;
        for subset in 0u32..1 << sites {
            let r: Vec<usize> = (0..sites).filter(|&x| subset >> x & 1 == 1).collect();
            let j = DiagonalObservable::on_sector(&ObservableSpec::Interval { sites: r }, &basis, &ctx)?;
            bad += usize::from(j.spectrum().iter().any(|&v| v != 0.0 && v != 1.0));
        }
        s.at_most(format!("interval spectra outside {{0, 1}}, B = {}", ctx.modes()), bad as f64, 0.0);
    }
    let (geom, params) = s.dirac_chain(if s.small() { 8 } else { 4 }, 0.6, 0.8);
    let ctx = ModeContext::new(VariableLayout::new(geom.sites(), 2)?, geom.grid)?;
    let (basis, k) = build_generator_sector(&params, &geom, 1, DEFAULT_SECTOR_LIMIT)?;
    let vac = VacuumState::empty(ctx.modes())?;
    let g = one_particle_state(&s.unit(ctx.modes()), &vac)?;
    let q = evolve(&g.wavefunction()?, &k, 0.9, Method::Exact)?;
    let st = SectorState::new(basis, q.into_amplitudes())?;
    let c = position_moments_classical(&st, &ctx)?;
    let qm = position_moments_quantum(&extract_one_particle(&st, &vac)?, &ctx);
    let dev = (0..3).map(|a| (c.mean[a] - qm.mean[a]).abs()).fold((c.dispersion - qm.dispersion).abs(), f64::max);
    s.at_most("position moments, classical vs quantum rule", dev, 1e-12);
    Ok(())
}

fn nonrel(s: &mut Suite) -> anyhow::Result<()> {
    let grid = Grid::line(128, 0.25)?;
    let chi: Vec<Complex64> = (0..128)
        .flat_map(|i| {
            let x = grid.position(i)[2];
            let a = Complex64::from_polar((-x * x / 16.0).exp(), 0.3 * x);
            [a, a * Complex64::new(0.0, 0.5)]
        })
        .collect();
    let masses: &[f64] = &[1.0, 2.0, 4.0, 8.0];
    let mut l1 = Vec::new();
    for &m in masses {
        let r = nonrel_comparison(&chi, grid, m, 5.0, 0.05)?;
        s.at_most(format!("M = {m}: Dirac norm drift"), r.dirac_norm_drift, 1e-9);
        l1.push(r.l1);
    }
    let rises = l1.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    s.at_most("largest L1 increase along the mass sweep", rises, 0.0);
    s.at_most("L1(Dirac, Schrodinger) at M = 8", l1[3], 1e-3);
    Ok(())
}

fn antisymmetry(s: &mut Suite) -> anyhow::Result<()> {
    let n = if s.small() { 4 } else { 3 };
    let (geom, params) = s.dirac_chain(n, 0.7, 1.2);
    let (basis, k) = build_generator_sector(&params, &geom, 2, DEFAULT_SECTOR_LIMIT)?;
    let modes = basis.modes();
    let q = DMatrix::from_fn(modes, modes, |_, _| s.rng.gen_range(-1.0..1.0));
    let g2 = two_particle_state(&q, DEFAULT_SECTOR_LIMIT)?;
    let qt = evolve(&g2.wavefunction()?, &k, 1.0, Method::Exact)?;
    let st = SectorState::new(basis, qt.into_amplitudes())?;
    s.at_most(format!("two-particle antisymmetry after t = 1, {n} sites"), antisymmetry_defect(&extract_two_particle(&st)?), 1e-12);
    Ok(())
}

fn demos(s: &mut Suite) -> anyhow::Result<()> {
    let both = demo_double_slit(&DoubleSlitConfig::default())?;
    let one = demo_double_slit(&DoubleSlitConfig { open: SlitsOpen::Upper, ..Default::default() })?;
    s.above("double slit fringe contrast", both.contrast, 0.5);
    s.at_most("single slit central maxima", one.central_maxima as f64, 1.0);
    s.at_most("double slit symmetry defect", both.symmetry_defect, 1e-10);
    s.at_most("double slit norm drift", both.norm_drift.max(one.norm_drift), 1e-9);
    let t = demo_tunneling(&TunnelingConfig::default())?;
    s.at_most("tunneling |T - T_analytic| / T_analytic", (t.transmission - t.analytic).abs() / t.analytic, 0.15);
    let free = demo_tunneling(&TunnelingConfig { barrier_height: 0.0, ..Default::default() })?;
    s.at_most("tunneling |T - 1| without barrier", (free.transmission - 1.0).abs(), 1e-6);
    s.at_most("tunneling norm drift", t.norm_drift.max(free.norm_drift), 1e-9);
    Ok(())
}
