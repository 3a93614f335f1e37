//! Config-driven runs for `simulate` and `demo`.

use std::path::Path;

use anyhow::{bail, Context};
use nalgebra::{DMatrix, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use isingq::config::{GridConfig, LatticeConfig, PotentialConfig, PotentialShape};
use isingq::demos::{demo_double_slit, demo_tunneling, DensityFrame, DoubleSlitConfig, Packet, SlitsOpen, TunnelingConfig};
use isingq::dirac::{crosscheck_sector, dirac_evolve, DiracField, DiracScheme, HamiltonianSpec};
use isingq::ensemble::{evolve, second_order_check, track_signs, trajectory, two_state_closed_form, two_state_generator, ClassicalWaveFunction};
use isingq::evolution::Method;
use isingq::grassmann::VariableLayout;
use isingq::grid::Grid;
use isingq::lattice::{build_generator_sector, one_body_matrix, Species};
use isingq::observables::{
    expect, one_particle_state, two_particle_state, DiagonalObservable, ModeContext, ObservableSpec, VacuumKind, VacuumState,
};
use isingq::schrodinger::{energy, schrodinger_evolve, KineticMode, SchrodingerField, SchrodingerScheme, SchrodingerSpec};
use isingq::sectors::DEFAULT_SECTOR_LIMIT;

use crate::output::{write_json, Csv};
use crate::CliError;

/// A scenario file: `{"scenario": "...", "seed": N, ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub scenario: Scenario,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum Scenario {
    TwoState(TwoStateConfig),
    SectorEvolution(SectorConfig),
    Crosscheck(CrosscheckConfig),
    Dirac(DiracConfig),
    Schrodinger(SchrodingerConfig),
    DoubleSlit(DoubleSlitConfig),
    Tunneling(TunnelingConfig),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoStateConfig {
    pub omega: f64,
    pub alpha: f64,
    pub periods: f64,
    pub dt: f64,
    pub sign_threshold: f64,
}

impl Default for TwoStateConfig {
    fn default() -> Self {
        Self { omega: 1.0, alpha: 0.3, periods: 10.0, dt: 1e-3, sign_threshold: 1e-6 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Real Gaussian profile on one species/flavor, modulated by `cos(k·x)`.
    Gaussian {
        center: [f64; 3],
        width: f64,
        #[serde(default)]
        momentum: [f64; 3],
        #[serde(default)]
        species: usize,
        #[serde(default)]
        flavor: usize,
    },
    /// A single mode above the vacuum.
    Mode { mode: usize },
    /// Uniformly random amplitudes from the run seed.
    Random,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorConfig {
    pub lattice: LatticeConfig,
    #[serde(default = "one")]
    pub particles: usize,
    #[serde(default = "empty_vacuum")]
    pub vacuum: VacuumKind,
    pub initial: InitialState,
    pub t_end: f64,
    pub output_every: f64,
    #[serde(default)]
    pub observables: Vec<ObservableSpec>,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
}

fn one() -> usize {
    1
}

fn empty_vacuum() -> VacuumKind {
    VacuumKind::Empty
}

fn default_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrosscheckConfig {
    pub lattice: LatticeConfig,
    pub t: f64,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default = "crosscheck_tol")]
    pub tolerance: f64,
}

fn crosscheck_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiracIntegrator {
    Exact {
        dt: f64,
        #[serde(default = "default_tol")]
        tolerance: f64,
    },
    SplitStep {
        dt: f64,
        #[serde(default = "default_tol")]
        tolerance: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiracConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub mass: f64,
    #[serde(default)]
    pub coupling: f64,
    #[serde(default)]
    pub potential: PotentialConfig,
    pub packet: Packet,
    /// Spinor of the packet as `[re, im]` pairs; normalized on use.
    #[serde(default = "default_spinor")]
    pub spinor: [[f64; 2]; 4],
    pub integrator: DiracIntegrator,
    pub t_end: f64,
    /// Frames are written every this many integrator steps (0: first and last only).
    #[serde(default)]
    pub frame_every: usize,
}

fn default_spinor() -> [[f64; 2]; 4] {
    [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case", deny_unknown_fields)]
pub enum SchrodingerIntegrator {
    SplitStep {
        dt: f64,
        #[serde(default = "spectral")]
        kinetic: KineticMode,
        #[serde(default = "default_tol")]
        tolerance: f64,
    },
    CrankNicolson {
        dt: f64,
        #[serde(default = "default_tol")]
        tolerance: f64,
    },
}

fn spectral() -> KineticMode {
    KineticMode::Spectral
}

impl SchrodingerIntegrator {
    fn parts(&self) -> (SchrodingerScheme, f64, f64) {
        match *self {
            SchrodingerIntegrator::SplitStep { dt, kinetic, tolerance } => (SchrodingerScheme::SplitStep { dt, kinetic }, dt, tolerance),
            SchrodingerIntegrator::CrankNicolson { dt, tolerance } => (SchrodingerScheme::CrankNicolson { dt }, dt, tolerance),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchrodingerConfig {
    pub grid: GridConfig,
    #[serde(default = "unit_mass")]
    pub mass: f64,
    #[serde(default = "unit_mass")]
    pub hbar: f64,
    #[serde(default = "no_potential")]
    pub potential: PotentialShape,
    pub packet: Packet,
    pub integrator: SchrodingerIntegrator,
    pub t_end: f64,
    #[serde(default)]
    pub frame_every: usize,
}

fn unit_mass() -> f64 {
    1.0
}

fn no_potential() -> PotentialShape {
    PotentialShape::None
}

/// Outcome of a run: the summary is always written; `failed` lists checks
/// that did not hold.
pub struct Outcome {
    pub summary: Value,
    pub failed: Vec<String>,
}

fn steps_for(t_end: f64, dt: f64) -> anyhow::Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_end >= 0.0 && t_end.is_finite()) {
        bail!(CliError::Config(format!("need dt > 0 and t_end >= 0, got dt = {dt}, t_end = {t_end}")));
    }
    Ok((t_end / dt).round() as usize)
}

fn config_err(e: isingq::Error) -> anyhow::Error {
    CliError::Config(e.to_string()).into()
}

pub fn run(cfg: &RunConfig, seed: u64, out: &Path) -> anyhow::Result<Outcome> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match &cfg.scenario {
        Scenario::TwoState(c) => two_state(c, out),
        Scenario::SectorEvolution(c) => sector_evolution(c, &mut rng, out),
        Scenario::Crosscheck(c) => crosscheck(c, &mut rng, out),
        Scenario::Dirac(c) => dirac(c, out),
        Scenario::Schrodinger(c) => schrodinger(c, out),
        Scenario::DoubleSlit(c) => double_slit(c, out),
        Scenario::Tunneling(c) => tunneling(c, out),
    }
}

fn two_state(c: &TwoStateConfig, out: &Path) -> anyhow::Result<Outcome> {
    if c.omega <= 0.0 {
        bail!(CliError::Config("omega must be positive".into()));
    }
    let t_end = c.periods * std::f64::consts::PI / c.omega;
    let steps = steps_for(t_end, c.dt)?;
    let q0 = [c.alpha.cos(), -c.alpha.sin()];
    let k = two_state_generator(c.omega);
    let series = trajectory(&ClassicalWaveFunction::new(q0.to_vec())?, &k, c.dt, steps)?;
    let times: Vec<f64> = (0..=steps).map(|n| n as f64 * c.dt).collect();
    let (signs, report) = track_signs(&times, &series, c.sign_threshold)?;

    let mut csv = Csv::create(&out.join("trajectory.csv"), &["t", "q0", "q1", "p0", "s0"])?;
    let mut p0 = Vec::with_capacity(series.len());
    let mut err = 0.0f64;
    let mut closed = 0.0f64;
    for ((t, q), s) in times.iter().zip(&series).zip(&signs) {
        let a = q.amplitudes();
        let p = a[0] * a[0];
        p0.push(p);
        err = err.max((p - (c.omega * t + c.alpha).cos().powi(2)).abs());
        let cf = two_state_closed_form(q0, c.omega, *t);
        closed = closed.max((a[0] - cf[0]).abs().max((a[1] - cf[1]).abs()));
        csv.row(&[*t, a[0], a[1], p, f64::from(s.values()[0])])?;
    }
    csv.finish()?;
    let residual = second_order_check(&p0, c.dt, c.omega)?;
    let mut failed = Vec::new();
    if err >= 1e-10 {
        failed.push(format!("p0 deviates from cos^2(wt+a) by {err:e}"));
    }
    if !report.ok() {
        failed.push(format!("{} sign flips away from p < {}", report.violations.len(), c.sign_threshold));
    }
    let flips: Vec<f64> = report.jumps.iter().filter(|j| j.state == 0).map(|j| j.t_zero).collect();
    Ok(Outcome {
        summary: json!({
            "steps": steps,
            "max_p0_error": err,
            "max_closed_form_error": closed,
            "second_order_residual": residual,
            "sign_flips_s0": flips,
            "sign_violations": report.violations.len(),
        }),
        failed,
    })
}

fn initial_amplitudes(init: &InitialState, ctx: &ModeContext, rng: &mut ChaCha8Rng) -> anyhow::Result<Vec<f64>> {
    let n = ctx.modes();
    let mut q = vec![0.0; n];
    match init {
        InitialState::Gaussian { center, width, momentum, species, flavor } => {
            if *species >= 4 || *flavor >= ctx.layout.flavors {
                bail!(CliError::Config(format!("species {species} / flavor {flavor} out of range")));
            }
            for (mode, slot) in q.iter_mut().enumerate() {
                let v = ctx.layout.variable(mode)?;
                if v.species != *species || v.flavor != *flavor {
                    continue;
                }
                let x = ctx.grid.position(v.site);
                let r2: f64 = (0..3).map(|a| (x[a] - center[a]).powi(2)).sum();
                let kx: f64 = (0..3).map(|a| momentum[a] * x[a]).sum();
                *slot = (-r2 / (4.0 * width * width)).exp() * kx.cos();
            }
        }
        InitialState::Mode { mode } => {
            if *mode >= n {
                bail!(CliError::Config(format!("mode {mode} out of range ({n} modes)")));
            }
            q[*mode] = 1.0;
        }
        InitialState::Random => q.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0)),
    }
    let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        bail!(CliError::Config("initial state vanishes on the lattice".into()));
    }
    Ok(q.into_iter().map(|v| v / norm).collect())
}

fn sector_evolution(c: &SectorConfig, rng: &mut ChaCha8Rng, out: &Path) -> anyhow::Result<Outcome> {
    let (geom, params) = c.lattice.resolve().map_err(config_err)?;
    let ctx = ModeContext::new(VariableLayout::new(geom.sites(), params.species.flavors())?, geom.grid)?;
    for spec in &c.observables {
        spec.validate(&ctx).map_err(config_err)?;
    }
    let samples = steps_for(c.t_end, c.output_every)?;
    let vacuum = VacuumState::build(c.vacuum, &one_body_matrix(&params, &geom)?).map_err(config_err)?;
    let state = match c.particles {
        1 => one_particle_state(&initial_amplitudes(&c.initial, &ctx, rng)?, &vacuum)?,
        2 if c.vacuum == VacuumKind::Empty => {
            let n = ctx.modes();
            let a = initial_amplitudes(&c.initial, &ctx, rng)?;
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            two_particle_state(&DMatrix::from_fn(n, n, |i, j| a[i] * b[j]), DEFAULT_SECTOR_LIMIT).map_err(config_err)?
        }
        p => bail!(CliError::Config(format!("particles = {p} is not supported with the {:?} vacuum (use 1, or 2 above the empty vacuum)", c.vacuum))),
    };
    let m = state.basis.particles();
    let (basis, k) = build_generator_sector(&params, &geom, m, DEFAULT_SECTOR_LIMIT).map_err(config_err)?;
    let local: Vec<DiagonalObservable> = (0..geom.sites())
        .map(|site| DiagonalObservable::on_sector(&ObservableSpec::LocalNumber { site }, &basis, &ctx))
        .collect::<isingq::Result<_>>()?;
    let named: Vec<(String, DiagonalObservable)> =
        c.observables.iter().map(|s| Ok((s.name(), DiagonalObservable::on_sector(s, &basis, &ctx)?))).collect::<isingq::Result<_>>()?;

    let mut density = Csv::create(&out.join("density.csv"), &["t", "site", "x", "y", "z", "density"])?;
    let mut obs = Csv::create(&out.join("observables.csv"), &["t", "name", "value_classical", "value_quantum"])?;
    let q0 = state.wavefunction()?;
    let method = Method::Auto { tol: c.tolerance * 1e-2 };
    let mut q = q0.clone();
    let mut drift = 0.0f64;
    let mut discrepancy = 0.0f64;
    let mut t_prev = 0.0;
    for n in 0..=samples {
        let t = n as f64 * c.output_every;
        if n > 0 {
            q = evolve(&q, &k, t - t_prev, method)?;
        }
        t_prev = t;
        drift = drift.max((q.norm() - 1.0).abs());
        for (site, a) in local.iter().enumerate() {
            let e = expect(a, &q)?;
            discrepancy = discrepancy.max(e.discrepancy());
            let [x, y, z] = geom.grid.position(site);
            density.row(&[t, site as f64, x, y, z, e.classical])?;
        }
        for (name, a) in &named {
            let e = expect(a, &q)?;
            discrepancy = discrepancy.max(e.discrepancy());
            obs.record(&[&format!("{t:?}"), name, &format!("{:?}", e.classical), &format!("{:?}", e.quantum)])?;
        }
    }
    density.finish()?;
    obs.finish()?;
    let mut failed = Vec::new();
    if drift >= c.tolerance {
        failed.push(format!("norm drift {drift:e} exceeds {}", c.tolerance));
    }
    if discrepancy >= 1e-12 {
        failed.push(format!("classical and quantum expectations differ by {discrepancy:e}"));
    }
    Ok(Outcome {
        summary: json!({
            "sites": geom.sites(),
            "modes": ctx.modes(),
            "sector_particles": m,
            "sector_dim": basis.dim(),
            "samples": samples + 1,
            "norm_drift": drift,
            "max_rule_discrepancy": discrepancy,
        }),
        failed,
    })
}

fn crosscheck(c: &CrosscheckConfig, rng: &mut ChaCha8Rng, out: &Path) -> anyhow::Result<Outcome> {
    let (geom, params) = c.lattice.resolve().map_err(config_err)?;
    if params.species != Species::Dirac {
        bail!(CliError::Config("crosscheck needs Ns = 8".into()));
    }
    let mut deviations = Vec::with_capacity(c.trials);
    for _ in 0..c.trials {
        let data = (0..4 * geom.sites()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let phi = DiracField::normalized(geom.grid, data)?;
        deviations.push(crosscheck_sector(&phi, &params, &geom, c.t)?);
    }
    let max = deviations.iter().copied().fold(0.0, f64::max);
    let summary = json!({ "trials": c.trials, "deviations": deviations, "max_deviation": max, "tolerance": c.tolerance });
    write_json(&out.join("crosscheck.json"), &summary)?;
    let failed = if max < c.tolerance { vec![] } else { vec![format!("max deviation {max:e} exceeds {}", c.tolerance)] };
    Ok(Outcome { summary, failed })
}

fn frame_header(grid: &Grid) -> Vec<&'static str> {
    let names = ["x", "y", "z"];
    let mut h: Vec<&str> = grid.active_axes().map(|a| names[a]).collect();
    h.extend(["t", "w"]);
    h
}

fn write_frames(path: &Path, grid: &Grid, frames: &[DensityFrame]) -> anyhow::Result<()> {
    let mut csv = Csv::create(path, &frame_header(grid))?;
    let axes: Vec<usize> = grid.active_axes().collect();
    let mut row = Vec::with_capacity(axes.len() + 2);
    for f in frames {
        for (s, w) in f.density.iter().enumerate() {
            let x = grid.position(s);
            row.clear();
            row.extend(axes.iter().map(|&a| x[a]));
            row.extend([f.t, *w]);
            csv.row(&row)?;
        }
    }
    csv.finish()
}

fn dirac(c: &DiracConfig, out: &Path) -> anyhow::Result<Outcome> {
    let grid = c.grid.grid().map_err(config_err)?;
    let potential = c.potential.resolve(&grid).map_err(config_err)?;
    let spec = HamiltonianSpec { mass: c.mass, coupling: c.coupling, potential, ..HamiltonianSpec::free(0.0) };
    spec.validate(&grid).map_err(config_err)?;
    let u = Vector4::from_fn(|i, _| Complex64::new(c.spinor[i][0], c.spinor[i][1]));
    if u.norm() == 0.0 {
        bail!(CliError::Config("spinor must be nonzero".into()));
    }
    let phi0 = DiracField::gaussian(grid, c.packet.center, c.packet.width, c.packet.momentum, u / Complex64::from(u.norm())).map_err(config_err)?;
    let (scheme, dt, tol) = match c.integrator {
        DiracIntegrator::Exact { dt, tolerance } => (DiracScheme::Exact, dt, tolerance),
        DiracIntegrator::SplitStep { dt, tolerance } => (DiracScheme::SplitStep { dt }, dt, tolerance),
    };
    let steps = steps_for(c.t_end, dt)?;
    let every = if c.frame_every == 0 { steps.max(1) } else { c.frame_every };
    let mut frames = vec![DensityFrame { t: 0.0, density: phi0.density() }];
    let mut phi = phi0;
    let mut drift = 0.0f64;
    let mut n = 0;
    while n < steps {
        let chunk = every.min(steps - n);
        phi = dirac_evolve(&phi, &spec, chunk as f64 * dt, scheme).map_err(|e| match e {
            isingq::Error::StepTooLarge { .. } => config_err(e),
            other => other.into(),
        })?;
        n += chunk;
        drift = drift.max((phi.norm_sq() - 1.0).abs());
        frames.push(DensityFrame { t: n as f64 * dt, density: phi.density() });
    }
    write_frames(&out.join("density.csv"), &grid, &frames)?;
    let failed = if drift < tol { vec![] } else { vec![format!("norm drift {drift:e} exceeds {tol}")] };
    Ok(Outcome { summary: json!({ "steps": steps, "frames": frames.len(), "norm_drift": drift }), failed })
}

fn schrodinger(c: &SchrodingerConfig, out: &Path) -> anyhow::Result<Outcome> {
    let grid = c.grid.grid().map_err(config_err)?;
    let v = c.potential.resolve(&grid).map_err(config_err)?;
    let spec = SchrodingerSpec { mass: c.mass, hbar: c.hbar, potential: v };
    spec.validate(&grid).map_err(config_err)?;
    let psi0 = SchrodingerField::gaussian(grid, c.packet.center, c.packet.width, c.packet.momentum).map_err(config_err)?;
    let (scheme, dt, tol) = c.integrator.parts();
    let kinetic = match scheme {
        SchrodingerScheme::SplitStep { kinetic, .. } => kinetic,
        SchrodingerScheme::CrankNicolson { .. } => KineticMode::Standard3Point,
    };
    let steps = steps_for(c.t_end, dt)?;
    let every = if c.frame_every == 0 { steps.max(1) } else { c.frame_every };
    let e0 = energy(&psi0, &spec, kinetic);
    let mut frames = vec![DensityFrame { t: 0.0, density: psi0.density() }];
    let mut psi = psi0;
    let (mut drift, mut e_drift) = (0.0f64, 0.0f64);
    let mut n = 0;
    while n < steps {
        let chunk = every.min(steps - n);
        psi = schrodinger_evolve(&psi, &spec, chunk as f64 * dt, scheme).map_err(|e| match e {
            isingq::Error::StepTooLarge { .. } => config_err(e),
            other => other.into(),
        })?;
        n += chunk;
        drift = drift.max((psi.norm_sq() - 1.0).abs());
        e_drift = e_drift.max((energy(&psi, &spec, kinetic) - e0).abs());
        frames.push(DensityFrame { t: n as f64 * dt, density: psi.density() });
    }
    write_frames(&out.join("density.csv"), &grid, &frames)?;
    let failed = if drift < tol { vec![] } else { vec![format!("norm drift {drift:e} exceeds {tol}")] };
    Ok(Outcome {
        summary: json!({ "steps": steps, "frames": frames.len(), "norm_drift": drift, "energy": e0, "energy_drift": e_drift }),
        failed,
    })
}

fn double_slit(c: &DoubleSlitConfig, out: &Path) -> anyhow::Result<Outcome> {
    c.validate().map_err(config_err)?;
    let r = demo_double_slit(c).map_err(|e| match e {
        isingq::Error::StepTooLarge { .. } => config_err(e),
        other => other.into(),
    })?;
    write_frames(&out.join("density.csv"), &r.grid, &r.frames)?;
    let mut det = Csv::create(&out.join("detection.csv"), &["y", "w"])?;
    for (y, w) in r.y.iter().zip(&r.detection) {
        det.row(&[*y, *w])?;
    }
    det.finish()?;
    let mut failed = Vec::new();
    if r.norm_drift >= 1e-9 {
        failed.push(format!("norm drift {:e}", r.norm_drift));
    }
    match c.open {
        SlitsOpen::Both if r.contrast <= 0.5 => failed.push(format!("fringe contrast {:.3} not above 0.5", r.contrast)),
        SlitsOpen::Upper | SlitsOpen::Lower if r.central_maxima > 1 => {
            failed.push(format!("single slit shows {} central maxima", r.central_maxima))
        }
        _ => {}
    }
    let summary = json!({
        "contrast": r.contrast,
        "central_maxima": r.central_maxima,
        "symmetry_defect": r.symmetry_defect,
        "norm_drift": r.norm_drift,
        "steps": r.steps,
        "frames": r.frames.len(),
    });
    write_json(&out.join("metric.json"), &json!({ "contrast": r.contrast, "central_maxima": r.central_maxima }))?;
    Ok(Outcome { summary, failed })
}

fn tunneling(c: &TunnelingConfig, out: &Path) -> anyhow::Result<Outcome> {
    let r = demo_tunneling(c).map_err(|e| match e {
        isingq::Error::StepTooLarge { .. } | isingq::Error::InvalidParameter(_) => config_err(e),
        other => other.into(),
    })?;
    write_frames(&out.join("density.csv"), &r.grid, &r.frames)?;
    let mut failed = Vec::new();
    if r.norm_drift >= 1e-9 {
        failed.push(format!("norm drift {:e}", r.norm_drift));
    }
    let rel = (r.transmission - r.analytic).abs() / r.analytic.max(f64::MIN_POSITIVE);
    if c.barrier_height == 0.0 {
        if (r.transmission - 1.0).abs() >= 1e-6 {
            failed.push(format!("free transmission {} differs from 1", r.transmission));
        }
    } else if rel >= 0.15 {
        failed.push(format!("transmission {:.4} is {:.1}% off the analytic {:.4}", r.transmission, 100.0 * rel, r.analytic));
    }
    let summary = json!({
        "T": r.transmission,
        "R": r.reflection,
        "T_analytic": r.analytic,
        "T_analytic_packet": r.analytic_packet,
        "relative_error": rel,
        "norm_drift": r.norm_drift,
        "steps": r.steps,
        "frames": r.frames.len(),
    });
    write_json(&out.join("metric.json"), &json!({ "T": r.transmission, "T_analytic": r.analytic }))?;
    Ok(Outcome { summary, failed })
}

/// Built-in demo scenarios; `overrides` is merged over the defaults.
pub fn demo_config(name: &str, overrides: Option<Value>) -> anyhow::Result<RunConfig> {
    let mut base = match name {
        "double-slit" => serde_json::to_value(DoubleSlitConfig { frame_every: 700, ..Default::default() })?,
        "tunneling" => serde_json::to_value(TunnelingConfig { frame_every: 1500, ..Default::default() })?,
        "two-state" => serde_json::to_value(TwoStateConfig::default())?,
        other => bail!(CliError::Config(format!("unknown demo {other:?} (expected double-slit, tunneling or two-state)"))),
    };
    let mut seed = None;
    if let Some(Value::Object(map)) = overrides {
        let obj = base.as_object_mut().expect("demo defaults serialize to objects");
        for (k, v) in map {
            match k.as_str() {
                "seed" => seed = Some(serde_json::from_value(v).map_err(|e| CliError::Config(format!("seed: {e}")))?),
                "scenario" => {}
                _ => {
                    obj.insert(k, v);
                }
            }
        }
    } else if overrides.is_some() {
        bail!(CliError::Config("demo config must be a table of overrides".into()));
    }
    let scenario = match name {
        "double-slit" => Scenario::DoubleSlit(serde_json::from_value(base).map_err(|e| CliError::Config(e.to_string()))?),
        "tunneling" => Scenario::Tunneling(serde_json::from_value(base).map_err(|e| CliError::Config(e.to_string()))?),
        _ => Scenario::TwoState(serde_json::from_value(base).map_err(|e| CliError::Config(e.to_string()))?),
    };
    Ok(RunConfig { seed, scenario })
}
