use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ising species per site: one Majorana spinor (4) or a Dirac spinor built
/// from two Majorana flavors (8).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Species {
    Majorana,
    Dirac,
}

impl Species {
    pub fn from_count(ns: usize) -> Result<Self> {
        match ns {
            4 => Ok(Species::Majorana),
            8 => Ok(Species::Dirac),
            _ => Err(Error::InvalidParameter(format!("Ns must be 4 or 8, got {ns}"))),
        }
    }

    pub fn count(self) -> usize {
        4 * self.flavors()
    }

    pub fn flavors(self) -> usize {
        match self {
            Species::Majorana => 1,
            Species::Dirac => 2,
        }
    }
}

/// `A_μ` sampled on sites. Empty vectors stand for zero fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExternalPotential {
    pub a0: Vec<f64>,
    pub ak: [Vec<f64>; 3],
}

impl ExternalPotential {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(sites: usize, a0: f64) -> Self {
        Self { a0: vec![a0; sites], ak: Default::default() }
    }

    pub fn scalar(a0: Vec<f64>) -> Self {
        Self { a0, ak: Default::default() }
    }

    pub fn a0_at(&self, site: usize) -> f64 {
        self.a0.get(site).copied().unwrap_or(0.0)
    }

    pub fn ak_at(&self, k: usize, site: usize) -> f64 {
        self.ak[k].get(site).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.a0.iter().chain(self.ak.iter().flatten()).all(|&a| a == 0.0)
    }

    pub fn validate(&self, sites: usize) -> Result<()> {
        for (name, field) in std::iter::once(("A0", &self.a0)).chain(["A1", "A2", "A3"].into_iter().zip(&self.ak)) {
            if !field.is_empty() && field.len() != sites {
                return Err(Error::GridMismatch(format!("{name} has {} samples for {sites} sites", field.len())));
            }
            if let Some(i) = field.iter().position(|a| !a.is_finite()) {
                return Err(Error::NonFinite { index: i });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub species: Species,
    pub mass: f64,
    pub coupling: f64,
    pub potential: ExternalPotential,
}

impl ModelParams {
    /// Massless, uncoupled Majorana model.
    pub fn majorana() -> Self {
        Self { species: Species::Majorana, mass: 0.0, coupling: 0.0, potential: ExternalPotential::zero() }
    }

    pub fn dirac(mass: f64, coupling: f64, potential: ExternalPotential) -> Self {
        Self { species: Species::Dirac, mass, coupling, potential }
    }

    pub fn validate(&self, sites: usize) -> Result<()> {
        if !self.mass.is_finite() || !self.coupling.is_finite() {
            return Err(Error::InvalidParameter("mass and coupling must be finite".into()));
        }
        if self.species == Species::Majorana && (self.mass != 0.0 || self.coupling != 0.0 || !self.potential.is_zero()) {
            return Err(Error::InvalidParameter("Ns = 4 requires m = 0, e = 0 and no potential".into()));
        }
        self.potential.validate(sites)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majorana_forbids_mass() {
        let mut p = ModelParams::majorana();
        assert!(p.validate(4).is_ok());
        p.mass = 1.0;
        assert!(matches!(p.validate(4), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn potential_length_checked() {
        let p = ModelParams::dirac(1.0, 0.5, ExternalPotential::constant(3, 1.0));
        assert!(p.validate(3).is_ok());
        assert!(matches!(p.validate(4), Err(Error::GridMismatch(_))));
        assert_eq!(Species::from_count(8).unwrap().count(), 8);
        assert!(Species::from_count(6).is_err());
    }
}
