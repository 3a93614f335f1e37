//! Double-slit and tunneling runs of the spin-ignored Schrödinger solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::schrodinger::{KineticMode, SchrodingerField, SchrodingerSpec, SplitStepper};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Packet {
    pub center: [f64; 3],
    pub width: f64,
    pub momentum: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlitsOpen {
    Both,
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DoubleSlitConfig {
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
    pub mass: f64,
    pub packet: Packet,
    /// Packet spread across the slits (axis 2).
    pub transverse_width: f64,
    pub barrier_x: f64,
    pub barrier_thickness: f64,
    pub barrier_height: f64,
    pub slit_width: f64,
    /// Centre-to-centre distance of the two slits.
    pub slit_separation: f64,
    pub open: SlitsOpen,
    /// Distance of the detection line behind the barrier.
    pub detection_distance: f64,
    /// Half-width of the region around the axis used for the fringe metrics.
    pub central_half_width: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Store a density frame every this many steps; 0 stores none.
    pub frame_every: usize,
}

impl Default for DoubleSlitConfig {
    fn default() -> Self {
        Self {
            nx: 384,
            ny: 256,
            spacing: 0.1,
            mass: 1.0,
            packet: Packet { center: [-8.0, 0.0, 0.0], width: 1.5, momentum: [4.0, 0.0, 0.0] },
            transverse_width: 4.0,
            barrier_x: 0.0,
            barrier_thickness: 1.0,
            barrier_height: 100.0,
            slit_width: 1.0,
            slit_separation: 4.0,
            open: SlitsOpen::Both,
            detection_distance: 10.0,
            central_half_width: 6.0,
            dt: 2.5e-3,
            t_end: 7.0,
            frame_every: 0,
        }
    }
}

impl DoubleSlitConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::plane(self.nx, self.ny, self.spacing)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        pos("spacing", self.spacing)?;
        pos("mass", self.mass)?;
        pos("packet.width", self.packet.width)?;
        pos("transverse_width", self.transverse_width)?;
        pos("barrier_thickness", self.barrier_thickness)?;
        pos("slit_width", self.slit_width)?;
        pos("slit_separation", self.slit_separation)?;
        pos("detection_distance", self.detection_distance)?;
        pos("dt", self.dt)?;
        pos("t_end", self.t_end)?;
        if self.slit_separation <= self.slit_width {
            return Err(Error::OverlappingSlits(format!(
                "separation {} must exceed slit width {}",
                self.slit_separation, self.slit_width
            )));
        }
        let half_y = 0.5 * self.ny as f64 * self.spacing;
        if 0.5 * (self.slit_separation + self.slit_width) >= half_y {
            return Err(Error::InvalidGeometry("slits extend beyond the grid".into()));
        }
        if self.slit_width < self.spacing {
            return Err(Error::InvalidGeometry("slit narrower than one grid cell".into()));
        }
        let half_x = 0.5 * self.nx as f64 * self.spacing;
        if self.barrier_x + self.detection_distance >= half_x || self.packet.center[0] <= -half_x {
            return Err(Error::InvalidGeometry("packet or detection line outside the grid".into()));
        }
        Ok(())
    }

    fn in_slit(&self, y: f64) -> bool {
        let c = 0.5 * self.slit_separation;
        let upper = (y - c).abs() < 0.5 * self.slit_width;
        let lower = (y + c).abs() < 0.5 * self.slit_width;
        match self.open {
            SlitsOpen::Both => upper || lower,
            SlitsOpen::Upper => upper,
            SlitsOpen::Lower => lower,
        }
    }

    pub fn potential(&self, grid: &Grid) -> Vec<f64> {
        (0..grid.sites())
            .map(|s| {
                let [x, y, _] = grid.position(s);
                let wall = (x - self.barrier_x).abs() < 0.5 * self.barrier_thickness;
                if wall && !self.in_slit(y) {
                    self.barrier_height
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn initial_state(&self, grid: Grid) -> Result<SchrodingerField> {
        let p = &self.packet;
        let data = (0..grid.sites())
            .map(|s| {
                let [x, y, _] = grid.position(s);
                let r = (x - p.center[0]).powi(2) / (4.0 * p.width * p.width)
                    + (y - p.center[1]).powi(2) / (4.0 * self.transverse_width * self.transverse_width);
                num_complex::Complex64::from_polar((-r).exp(), p.momentum[0] * x + p.momentum[1] * y)
            })
            .collect();
        SchrodingerField::normalized(grid, 1, data)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityFrame {
    pub t: f64,
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoubleSlitResult {
    pub grid: Grid,
    /// Transverse coordinates of the detection line.
    pub y: Vec<f64>,
    /// Time-integrated density along the detection line.
    pub detection: Vec<f64>,
    pub contrast: f64,
    /// Prominent maxima inside the central region.
    pub central_maxima: usize,
    pub norm_drift: f64,
    /// `max |w(y) - w(-y)|` over the final density, relative to its maximum.
    pub symmetry_defect: f64,
    pub frames: Vec<DensityFrame>,
    pub steps: usize,
}

pub fn demo_double_slit(cfg: &DoubleSlitConfig) -> Result<DoubleSlitResult> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let spec = SchrodingerSpec::with_potential(cfg.mass, cfg.potential(&grid));
    let steps = (cfg.t_end / cfg.dt).ceil() as usize;
    let dt = cfg.t_end / steps as f64;
    let stepper = SplitStepper::new(&spec, grid, dt, KineticMode::Spectral)?;
    let mut psi = cfg.initial_state(grid)?;

    let xs = grid.momenta(0).len();
    let line = (0..xs)
        .min_by(|&a, &b| {
            let d = |c: usize| (grid.position(grid.index([c, 0, 0]))[0] - cfg.barrier_x - cfg.detection_distance).abs();
            d(a).total_cmp(&d(b))
        })
        .expect("non-empty grid");
    let ny = cfg.ny;
    let mut detection = vec![0.0; ny];
    let mut frames = Vec::new();
    let accumulate = |psi: &SchrodingerField, acc: &mut [f64], w: f64| {
        for (c, a) in acc.iter_mut().enumerate() {
            *a += w * psi.data[grid.index([line, c, 0])].norm_sqr();
        }
    };
    accumulate(&psi, &mut detection, 0.5 * dt);
    for n in 1..=steps {
        stepper.step(&mut psi);
        accumulate(&psi, &mut detection, if n == steps { 0.5 * dt } else { dt });
        if cfg.frame_every > 0 && n % cfg.frame_every == 0 {
            frames.push(DensityFrame { t: n as f64 * dt, density: psi.density() });
        }
    }
    let y: Vec<f64> = (0..ny).map(|c| grid.position(grid.index([0, c, 0]))[1]).collect();
    let (contrast, central_maxima) = fringe_metrics(&y, &detection, cfg.central_half_width);
    let density = psi.density();
    let peak = density.iter().fold(0.0f64, |m, &v| m.max(v));
    let mut sym = 0.0f64;
    for cx in 0..cfg.nx {
        for cy in 0..ny {
            let a = density[grid.index([cx, cy, 0])];
            let b = density[grid.index([cx, (ny - cy) % ny, 0])];
            sym = sym.max((a - b).abs());
        }
    }
    Ok(DoubleSlitResult {
        grid,
        y,
        detection,
        contrast,
        central_maxima,
        norm_drift: (psi.norm_sq() - 1.0).abs(),
        symmetry_defect: sym / peak,
        frames,
        steps,
    })
}

/// Contrast `(max - min)/(max + min)` between the strongest maximum inside
/// `|y| ≤ half_width` and the deepest minimum between it and its
/// neighbouring maxima, plus the number of maxima whose prominence exceeds
/// 10% of the peak.
pub fn fringe_metrics(y: &[f64], w: &[f64], half_width: f64) -> (f64, usize) {
    let idx: Vec<usize> = {
        let mut v: Vec<usize> = (0..y.len()).filter(|&i| y[i].abs() <= half_width).collect();
        v.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
        v
    };
    if idx.len() < 3 {
        return (0.0, 0);
    }
    let vals: Vec<f64> = idx.iter().map(|&i| w[i]).collect();
    let peak = vals.iter().fold(0.0f64, |m, &v| m.max(v));
    let prominence = |i: usize| {
        let left = vals[..i].iter().rev().take_while(|&&v| v <= vals[i]).fold(vals[i], |m, &v| m.min(v));
        let right = vals[i + 1..].iter().take_while(|&&v| v <= vals[i]).fold(vals[i], |m, &v| m.min(v));
        vals[i] - left.max(right)
    };
    let maxima: Vec<usize> = (1..vals.len() - 1)
        .filter(|&i| vals[i] >= vals[i - 1] && vals[i] > vals[i + 1] && prominence(i) > 0.1 * peak)
        .collect();
    let Some(&top) = maxima.iter().max_by(|&&a, &&b| vals[a].total_cmp(&vals[b])) else {
        return (0.0, 0);
    };
    let pos = maxima.iter().position(|&m| m == top).unwrap();
    let lo = if pos > 0 { maxima[pos - 1] } else { 0 };
    let hi = if pos + 1 < maxima.len() { maxima[pos + 1] } else { vals.len() - 1 };
    let min = vals[lo..=hi].iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let max = vals[top];
    ((max - min) / (max + min), maxima.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TunnelingConfig {
    pub n: usize,
    pub spacing: f64,
    pub mass: f64,
    pub packet: Packet,
    pub barrier_height: f64,
    pub barrier_width: f64,
    /// Left edge of the barrier.
    pub barrier_start: f64,
    pub dt: f64,
    pub t_end: f64,
    pub frame_every: usize,
}

impl Default for TunnelingConfig {
    fn default() -> Self {
        Self {
            n: 4096,
            spacing: 0.1,
            mass: 1.0,
            packet: Packet { center: [0.0, 0.0, -60.0], width: 10.0, momentum: [0.0, 0.0, 2.0] },
            barrier_height: 4.0,
            barrier_width: 1.0,
            barrier_start: 0.0,
            dt: 5e-3,
            t_end: 75.0,
            frame_every: 0,
        }
    }
}

impl TunnelingConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::line(self.n, self.spacing)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("spacing", self.spacing), ("mass", self.mass), ("packet.width", self.packet.width), ("dt", self.dt), ("t_end", self.t_end)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.barrier_width >= 0.0) || !self.barrier_height.is_finite() {
            return Err(Error::InvalidParameter("barrier width must be non-negative and height finite".into()));
        }
        let half = 0.5 * self.n as f64 * self.spacing;
        if self.barrier_start + self.barrier_width >= half || self.packet.center[2] <= -half || self.packet.center[2] >= self.barrier_start {
            return Err(Error::InvalidGeometry("packet must start left of the barrier, both inside the grid".into()));
        }
        Ok(())
    }

    fn in_barrier(&self, x: f64) -> bool {
        x >= self.barrier_start && x < self.barrier_start + self.barrier_width
    }

    pub fn potential(&self, grid: &Grid) -> Vec<f64> {
        (0..grid.sites()).map(|s| if self.in_barrier(grid.position(s)[2]) { self.barrier_height } else { 0.0 }).collect()
    }

    /// Mean kinetic energy `ħ²k₀²/2M` of the incident packet.
    pub fn energy(&self) -> f64 {
        self.packet.momentum[2].powi(2) / (2.0 * self.mass)
    }
}

/// Plane-wave transmission through a rectangular barrier of height `v0` and
/// width `w` at energy `e` (`ħ = 1`).
pub fn rectangular_transmission(e: f64, v0: f64, w: f64, mass: f64) -> f64 {
    if v0 == 0.0 || w == 0.0 {
        return 1.0;
    }
    let d = 4.0 * e * (e - v0);
    if e < v0 {
        let kappa = (2.0 * mass * (v0 - e)).sqrt();
        1.0 / (1.0 + v0 * v0 * (kappa * w).sinh().powi(2) / (-d))
    } else if e > v0 {
        let k = (2.0 * mass * (e - v0)).sqrt();
        1.0 / (1.0 + v0 * v0 * (k * w).sin().powi(2) / d)
    } else {
        1.0 / (1.0 + mass * v0 * w * w / 2.0)
    }
}

/// `T(E)` averaged over the momentum distribution of a Gaussian packet.
pub fn packet_transmission(cfg: &TunnelingConfig) -> f64 {
    let k0 = cfg.packet.momentum[2];
    let sk = 1.0 / (2.0 * cfg.packet.width);
    let n = 2001;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        let k = k0 + sk * (-8.0 + 16.0 * i as f64 / (n - 1) as f64);
        if k <= 0.0 {
            continue;
        }
        let w = (-(k - k0).powi(2) / (2.0 * sk * sk)).exp();
        num += w * rectangular_transmission(k * k / (2.0 * cfg.mass), cfg.barrier_height, cfg.barrier_width, cfg.mass);
        den += w;
    }
    num / den
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TunnelingResult {
    pub grid: Grid,
    pub transmission: f64,
    pub reflection: f64,
    /// Plane-wave value at the mean energy.
    pub analytic: f64,
    /// Analytic value averaged over the packet's momentum spread.
    pub analytic_packet: f64,
    pub norm_drift: f64,
    pub frames: Vec<DensityFrame>,
    pub steps: usize,
}

pub fn demo_tunneling(cfg: &TunnelingConfig) -> Result<TunnelingResult> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let spec = SchrodingerSpec::with_potential(cfg.mass, cfg.potential(&grid));
    let steps = (cfg.t_end / cfg.dt).ceil() as usize;
    let dt = cfg.t_end / steps as f64;
    let stepper = SplitStepper::new(&spec, grid, dt, KineticMode::Spectral)?;
    let p = &cfg.packet;
    let mut psi = SchrodingerField::gaussian(grid, p.center, p.width, p.momentum)?;
    let mut frames = Vec::new();
    for n in 1..=steps {
        stepper.step(&mut psi);
        if cfg.frame_every > 0 && n % cfg.frame_every == 0 {
            frames.push(DensityFrame { t: n as f64 * dt, density: psi.density() });
        }
    }
    let density = psi.density();
    let (mut trans, mut refl) = (0.0, 0.0);
    for (s, w) in density.iter().enumerate() {
        let x = grid.position(s)[2];
        if x >= cfg.barrier_start + cfg.barrier_width {
            trans += w;
        } else if x < cfg.barrier_start {
            refl += w;
        }
    }
    Ok(TunnelingResult {
        grid,
        transmission: trans,
        reflection: refl,
        analytic: rectangular_transmission(cfg.energy(), cfg.barrier_height, cfg.barrier_width, cfg.mass),
        analytic_packet: packet_transmission(cfg),
        norm_drift: (psi.norm_sq() - 1.0).abs(),
        frames,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlapping_slits_are_rejected() {
        let cfg = DoubleSlitConfig { slit_width: 2.0, slit_separation: 1.5, ..Default::default() };
        assert!(matches!(demo_double_slit(&cfg), Err(Error::OverlappingSlits(_))));
    }

    #[test]
    fn transmission_formula_limits() {
        assert_eq!(rectangular_transmission(1.0, 0.0, 1.0, 1.0), 1.0);
        // continuity through E = V0
        let at = rectangular_transmission(2.0, 2.0, 1.0, 1.0);
        assert!((rectangular_transmission(2.0 - 1e-7, 2.0, 1.0, 1.0) - at).abs() < 1e-6);
        assert!((rectangular_transmission(2.0 + 1e-7, 2.0, 1.0, 1.0) - at).abs() < 1e-6);
        let t = rectangular_transmission(2.0, 4.0, 1.0, 1.0);
        assert!((t - 1.0 / (1.0 + 2f64.sinh().powi(2))).abs() < 1e-15);
    }

    #[test]
    fn fringe_metrics_on_synthetic_profiles() {
        let y: Vec<f64> = (0..201).map(|i| -10.0 + 0.1 * i as f64).collect();
        let two: Vec<f64> = y.iter().map(|y| (-(y / 6.0).powi(2)).exp() * (0.5 * y).cos().powi(2)).collect();
        let (c, n) = fringe_metrics(&y, &two, 8.0);
        assert!(c > 0.99 && n >= 3);
        let one: Vec<f64> = y.iter().map(|y| (-(y / 6.0).powi(2)).exp()).collect();
        assert_eq!(fringe_metrics(&y, &one, 8.0).1, 1);
    }
}
