//! Serde records for lattice and field configurations, and their resolution
//! into model types.
//!
//! Scalar fields such as `A0` are given as a number, a per-site list, or an
//! expression in the site coordinates `x`, `y`, `z` (centred, in lattice
//! units), the site index `i` and `pi`. Functions use the `math::` prefix,
//! e.g. `"0.3 * math::cos(2 * pi * z / 8)"`.

use evalexpr::{build_operator_tree, ContextWithMutableVariables, HashMapContext, Value};
use serde::{Deserialize, Serialize};

use crate::demos::SlitsOpen;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::lattice::{ExternalPotential, LatticeGeometry, ModelParams, Species};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Constant(f64),
    Grid(Vec<f64>),
    Expression(String),
}

impl FieldSpec {
    /// Values on every site of `grid`.
    pub fn resolve(&self, grid: &Grid) -> Result<Vec<f64>> {
        let n = grid.sites();
        let values = match self {
            FieldSpec::Constant(v) => vec![*v; n],
            FieldSpec::Grid(v) => {
                if v.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: v.len() });
                }
                v.clone()
            }
            FieldSpec::Expression(src) => {
                let tree = build_operator_tree(src).map_err(|e| Error::Expression(format!("{src:?}: {e}")))?;
                let mut ctx = HashMapContext::new();
                let mut out = Vec::with_capacity(n);
                for s in 0..n {
                    let [x, y, z] = grid.position(s);
                    for (k, v) in [("x", x), ("y", y), ("z", z), ("i", s as f64), ("pi", std::f64::consts::PI)] {
                        ctx.set_value(k.into(), Value::Float(v)).map_err(|e| Error::Expression(e.to_string()))?;
                    }
                    out.push(tree.eval_number_with_context(&ctx).map_err(|e| Error::Expression(format!("{src:?} at site {s}: {e}")))?);
                }
                out
            }
        };
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(rename = "A0", default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<FieldSpec>,
    #[serde(rename = "Ak", default, skip_serializing_if = "Option::is_none")]
    pub ak: Option<[FieldSpec; 3]>,
}

impl PotentialConfig {
    pub fn resolve(&self, grid: &Grid) -> Result<ExternalPotential> {
        let a0 = self.a0.as_ref().map(|f| f.resolve(grid)).transpose()?.unwrap_or_default();
        let ak = match &self.ak {
            Some([a, b, c]) => [a.resolve(grid)?, b.resolve(grid)?, c.resolve(grid)?],
            None => Default::default(),
        };
        Ok(ExternalPotential { a0, ak })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
}

/// `{L | extents, delta, eps, Ns, m, e, A, boundary}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    /// Cubic lattice with `L/2` sites per axis.
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    /// Sites per axis; overrides `L`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extents: Option<[usize; 3]>,
    pub delta: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(rename = "Ns")]
    pub ns: usize,
    #[serde(default)]
    pub m: f64,
    #[serde(default)]
    pub e: f64,
    #[serde(rename = "A", default)]
    pub a: PotentialConfig,
    #[serde(default)]
    pub boundary: Boundary,
}

fn default_eps() -> f64 {
    1.0
}

impl LatticeConfig {
    pub fn geometry(&self) -> Result<LatticeGeometry> {
        match (self.extents, self.l) {
            (Some(ext), _) => LatticeGeometry::new(ext, self.delta, self.eps),
            (None, Some(l)) => LatticeGeometry::cubic(l, self.delta, self.eps),
            (None, None) => Err(Error::InvalidGeometry("one of `L` or `extents` is required".into())),
        }
    }

    pub fn params(&self, geom: &LatticeGeometry) -> Result<ModelParams> {
        let params = match Species::from_count(self.ns)? {
            Species::Majorana => {
                if self.m != 0.0 || self.e != 0.0 || self.a != PotentialConfig::default() {
                    return Err(Error::InvalidParameter("Ns = 4 takes no mass, coupling or potential".into()));
                }
                ModelParams::majorana()
            }
            Species::Dirac => ModelParams::dirac(self.m, self.e, self.a.resolve(&geom.grid)?),
        };
        params.validate(geom.sites())?;
        Ok(params)
    }

    pub fn resolve(&self) -> Result<(LatticeGeometry, ModelParams)> {
        let geom = self.geometry()?;
        let params = self.params(&geom)?;
        Ok((geom, params))
    }
}

/// Grid for the direct solvers: `extents` sites at `spacing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub extents: [usize; 3],
    pub spacing: f64,
}

impl GridConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.extents, self.spacing)
    }
}

/// Potential shapes for the Schrödinger scenarios. `axis` defaults to the
/// first active grid axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialShape {
    None,
    /// Wall across `axis` at `position` with gaps symmetric about the
    /// other active axis.
    Slit {
        position: f64,
        thickness: f64,
        height: f64,
        slit_width: f64,
        separation: f64,
        #[serde(default = "both")]
        open: SlitsOpen,
        #[serde(default)]
        axis: Option<usize>,
    },
    /// `height` on `[start, start + width)`.
    Barrier {
        start: f64,
        width: f64,
        height: f64,
        #[serde(default)]
        axis: Option<usize>,
    },
    /// Zero on `|x - center| < width/2`, `height` elsewhere.
    Well {
        center: f64,
        width: f64,
        height: f64,
        #[serde(default)]
        axis: Option<usize>,
    },
    CustomGrid { values: FieldSpec },
}

fn both() -> SlitsOpen {
    SlitsOpen::Both
}

fn axis_or_first(grid: &Grid, axis: Option<usize>) -> Result<usize> {
    match axis {
        Some(a) if a < 3 && grid.extents[a] > 1 => Ok(a),
        Some(a) => Err(Error::InvalidGeometry(format!("axis {a} is not an active grid axis"))),
        None => grid.active_axes().next().ok_or_else(|| Error::InvalidGeometry("grid has no active axis".into())),
    }
}

impl PotentialShape {
    pub fn resolve(&self, grid: &Grid) -> Result<Vec<f64>> {
        let n = grid.sites();
        let coord = |axis: usize| (0..n).map(move |s| grid.position(s)[axis]);
        Ok(match self {
            PotentialShape::None => vec![0.0; n],
            PotentialShape::Barrier { start, width, height, axis } => {
                let a = axis_or_first(grid, *axis)?;
                coord(a).map(|x| if x >= *start && x < start + width { *height } else { 0.0 }).collect()
            }
            PotentialShape::Well { center, width, height, axis } => {
                let a = axis_or_first(grid, *axis)?;
                coord(a).map(|x| if (x - center).abs() < 0.5 * width { 0.0 } else { *height }).collect()
            }
            PotentialShape::Slit { position, thickness, height, slit_width, separation, open, axis } => {
                if separation <= slit_width {
                    return Err(Error::OverlappingSlits(format!("separation {separation} must exceed slit width {slit_width}")));
                }
                let a = axis_or_first(grid, *axis)?;
                let b = grid
                    .active_axes()
                    .find(|&k| k != a)
                    .ok_or_else(|| Error::InvalidGeometry("slits need a 2-d grid".into()))?;
                let c = 0.5 * separation;
                (0..n)
                    .map(|s| {
                        let p = grid.position(s);
                        let upper = (p[b] - c).abs() < 0.5 * slit_width;
                        let lower = (p[b] + c).abs() < 0.5 * slit_width;
                        let gap = match open {
                            SlitsOpen::Both => upper || lower,
                            SlitsOpen::Upper => upper,
                            SlitsOpen::Lower => lower,
                        };
                        if (p[a] - position).abs() < 0.5 * thickness && !gap {
                            *height
                        } else {
                            0.0
                        }
                    })
                    .collect()
            }
            PotentialShape::CustomGrid { values } => values.resolve(grid)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_forms() {
        let grid = Grid::line(4, 0.5).unwrap();
        assert_eq!(FieldSpec::Constant(0.3).resolve(&grid).unwrap(), vec![0.3; 4]);
        assert_eq!(FieldSpec::Grid(vec![1.0, 2.0, 3.0, 4.0]).resolve(&grid).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert!(FieldSpec::Grid(vec![1.0]).resolve(&grid).is_err());
        let v = FieldSpec::Expression("2 * z + i".into()).resolve(&grid).unwrap();
        assert_eq!(v, vec![-2.0, 0.0, 2.0, 4.0]);
        let c = FieldSpec::Expression("math::cos(pi * i)".into()).resolve(&grid).unwrap();
        assert!((c[1] + 1.0).abs() < 1e-15);
        assert!(matches!(FieldSpec::Expression("2 *".into()).resolve(&grid), Err(Error::Expression(_))));
    }

    #[test]
    fn lattice_config_from_json() {
        let src = r#"{"extents": [1, 1, 6], "delta": 0.5, "eps": 0.1, "Ns": 8, "m": 0.5, "e": 1.0,
                      "A": {"A0": "0.1 * z"}, "boundary": "periodic"}"#;
        let cfg: LatticeConfig = serde_json::from_str(src).unwrap();
        let (geom, params) = cfg.resolve().unwrap();
        assert_eq!(geom.sites(), 6);
        assert!((params.potential.a0_at(0) - 0.1 * geom.grid.position(0)[2]).abs() < 1e-15);
        let bad: std::result::Result<LatticeConfig, _> = serde_json::from_str(r#"{"L": 2, "delta": 1, "Ns": 8, "mass": 1}"#);
        assert!(bad.is_err());
        let maj = LatticeConfig { ns: 4, m: 1.0, ..cfg };
        assert!(maj.resolve().is_err());
    }

    #[test]
    fn potential_shapes() {
        let grid = Grid::line(10, 1.0).unwrap();
        let b = PotentialShape::Barrier { start: 0.0, width: 2.0, height: 3.0, axis: None }.resolve(&grid).unwrap();
        assert_eq!(b.iter().filter(|&&v| v == 3.0).count(), 2);
        let w = PotentialShape::Well { center: 0.0, width: 4.1, height: 9.0, axis: None }.resolve(&grid).unwrap();
        assert_eq!(w.iter().filter(|&&v| v == 0.0).count(), 5);
        let slit = PotentialShape::Slit { position: 0.0, thickness: 1.0, height: 1.0, slit_width: 2.0, separation: 1.0, open: SlitsOpen::Both, axis: None };
        assert!(matches!(slit.resolve(&Grid::plane(8, 8, 1.0).unwrap()), Err(Error::OverlappingSlits(_))));
        let shape: PotentialShape = serde_json::from_str(r#"{"type": "custom-grid", "values": 2.0}"#).unwrap();
        assert_eq!(shape.resolve(&grid).unwrap(), vec![2.0; 10]);
    }
}
