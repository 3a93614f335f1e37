//! Browser bindings for the demo page in `www/`.
//!
//! The interactive runs use reduced grids so a single call stays within a
//! few seconds in the browser.

use wasm_bindgen::prelude::*;

use isingq::demos::{demo_double_slit, demo_tunneling, DoubleSlitConfig, Packet, SlitsOpen, TunnelingConfig};
use isingq::ensemble::{trajectory, two_state_generator, ClassicalWaveFunction};
use isingq::schrodinger::SchrodingerField;

fn js(e: isingq::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Two-state rotation sampled at `samples + 1` times over `periods`
/// half-turns, flattened as `[t, p0, s0, t, p0, s0, ...]`.
#[wasm_bindgen]
pub fn two_state_curve(omega: f64, alpha: f64, periods: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    if !(omega > 0.0) || samples == 0 || !(periods > 0.0) {
        return Err(JsError::new("need omega > 0, periods > 0 and samples > 0"));
    }
    let h = periods * std::f64::consts::PI / omega / samples as f64;
    let q0 = ClassicalWaveFunction::new(vec![alpha.cos(), -alpha.sin()]).map_err(js)?;
    let series = trajectory(&q0, &two_state_generator(omega), h, samples).map_err(js)?;
    Ok(series
        .iter()
        .enumerate()
        .flat_map(|(n, q)| {
            let a = q.amplitudes()[0];
            [n as f64 * h, a * a, if a < 0.0 { -1.0 } else { 1.0 }]
        })
        .collect())
}

#[wasm_bindgen]
pub struct TunnelingRun {
    transmission: f64,
    reflection: f64,
    analytic: f64,
    norm_drift: f64,
    x: Vec<f64>,
    initial: Vec<f64>,
    density: Vec<f64>,
}

#[wasm_bindgen]
impl TunnelingRun {
    #[wasm_bindgen(getter)]
    pub fn transmission(&self) -> f64 {
        self.transmission
    }
    #[wasm_bindgen(getter)]
    pub fn reflection(&self) -> f64 {
        self.reflection
    }
    #[wasm_bindgen(getter)]
    pub fn analytic(&self) -> f64 {
        self.analytic
    }
    #[wasm_bindgen(getter)]
    pub fn norm_drift(&self) -> f64 {
        self.norm_drift
    }
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn initial(&self) -> Vec<f64> {
        self.initial.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn density(&self) -> Vec<f64> {
        self.density.clone()
    }
}

pub fn tunneling_config(height: f64, width: f64, momentum: f64) -> TunnelingConfig {
    TunnelingConfig {
        n: 2048,
        spacing: 0.2,
        barrier_height: height,
        barrier_width: width,
        packet: Packet { center: [0.0, 0.0, -60.0], width: 10.0, momentum: [0.0, 0.0, momentum] },
        t_end: 150.0 / momentum.abs().max(0.5),
        frame_every: 0,
        ..TunnelingConfig::default()
    }
}

/// Rectangular-barrier scattering of a Gaussian packet on a 1D line.
#[wasm_bindgen]
pub fn tunneling(height: f64, width: f64, momentum: f64) -> Result<TunnelingRun, JsError> {
    if !(momentum > 0.0 && momentum <= 4.0) {
        return Err(JsError::new("momentum must lie in (0, 4]"));
    }
    let mut cfg = tunneling_config(height, width, momentum);
    cfg.frame_every = (cfg.t_end / cfg.dt).round() as usize;
    let r = demo_tunneling(&cfg).map_err(js)?;
    let x: Vec<f64> = (0..r.grid.sites()).map(|s| r.grid.position(s)[2]).collect();
    let initial = SchrodingerField::gaussian(r.grid, cfg.packet.center, cfg.packet.width, cfg.packet.momentum).map_err(js)?.density();
    let density = r.frames.last().map(|f| f.density.clone()).unwrap_or_default();
    Ok(TunnelingRun { transmission: r.transmission, reflection: r.reflection, analytic: r.analytic, norm_drift: r.norm_drift, x, initial, density })
}

#[wasm_bindgen]
pub struct DoubleSlitRun {
    nx: usize,
    ny: usize,
    contrast: f64,
    maxima: usize,
    norm_drift: f64,
    density: Vec<f64>,
    potential: Vec<f64>,
    y: Vec<f64>,
    detection: Vec<f64>,
}

#[wasm_bindgen]
impl DoubleSlitRun {
    #[wasm_bindgen(getter)]
    pub fn nx(&self) -> usize {
        self.nx
    }
    #[wasm_bindgen(getter)]
    pub fn ny(&self) -> usize {
        self.ny
    }
    #[wasm_bindgen(getter)]
    pub fn contrast(&self) -> f64 {
        self.contrast
    }
    #[wasm_bindgen(getter)]
    pub fn maxima(&self) -> usize {
        self.maxima
    }
    #[wasm_bindgen(getter)]
    pub fn norm_drift(&self) -> f64 {
        self.norm_drift
    }
    /// Final density, row-major with `x` as the slow index.
    #[wasm_bindgen(getter)]
    pub fn density(&self) -> Vec<f64> {
        self.density.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn potential(&self) -> Vec<f64> {
        self.potential.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn y(&self) -> Vec<f64> {
        self.y.clone()
    }
    /// Time-integrated density on the detection line.
    #[wasm_bindgen(getter)]
    pub fn detection(&self) -> Vec<f64> {
        self.detection.clone()
    }
}

pub fn double_slit_config(open: SlitsOpen) -> DoubleSlitConfig {
    DoubleSlitConfig { nx: 192, ny: 128, spacing: 0.2, dt: 8e-3, open, ..DoubleSlitConfig::default() }
}

/// Gaussian packet through a wall with slits; `open` is `both`, `upper` or `lower`.
#[wasm_bindgen]
pub fn double_slit(open: &str) -> Result<DoubleSlitRun, JsError> {
    let open = match open {
        "both" => SlitsOpen::Both,
        "upper" => SlitsOpen::Upper,
        "lower" => SlitsOpen::Lower,
        other => return Err(JsError::new(&format!("unknown slit selection {other:?}"))),
    };
    let mut cfg = double_slit_config(open);
    cfg.frame_every = (cfg.t_end / cfg.dt).round() as usize;
    let potential = cfg.potential(&cfg.grid().map_err(js)?);
    let r = demo_double_slit(&cfg).map_err(js)?;
    let density = r.frames.last().map(|f| f.density.clone()).unwrap_or_default();
    Ok(DoubleSlitRun {
        nx: cfg.nx,
        ny: cfg.ny,
        contrast: r.contrast,
        maxima: r.central_maxima,
        norm_drift: r.norm_drift,
        density,
        potential,
        y: r.y,
        detection: r.detection,
    })
}
