//! Isotropic linear-elastic phases in plane stress or plane strain.

use std::collections::BTreeMap;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisMode {
    PlaneStress,
    #[default]
    PlaneStrain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialPhase {
    pub young: f64,
    pub poisson: f64,
    pub mode: AnalysisMode,
}

/// Lamé pair. In plane stress `lambda` is the effective in-plane value
/// `2λμ/(λ+2μ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LameParameters {
    pub lambda: f64,
    pub mu: f64,
}

/// Phase id to material.
pub type PhaseTable = BTreeMap<u32, MaterialPhase>;

impl MaterialPhase {
    pub fn new(young: f64, poisson: f64, mode: AnalysisMode) -> Result<Self> {
        let phase = Self { young, poisson, mode };
        phase.validate()?;
        Ok(phase)
    }

    pub fn validate(&self) -> Result<()> {
        if self.poisson == 0.5 {
            return Err(Error::Incompressible);
        }
        if !(self.young > 0.0) {
            return Err(Error::InvalidMaterial(format!("young modulus {} must be positive", self.young)));
        }
        if !(self.poisson > -1.0 && self.poisson < 0.5) {
            return Err(Error::InvalidMaterial(format!("poisson ratio {} must lie in (-1, 0.5)", self.poisson)));
        }
        Ok(())
    }

    pub fn lame(&self) -> Result<LameParameters> {
        self.validate()?;
        let (e, nu) = (self.young, self.poisson);
        let mu = e / (2.0 * (1.0 + nu));
        let lambda = match self.mode {
            AnalysisMode::PlaneStrain => e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)),
            AnalysisMode::PlaneStress => e * nu / (1.0 - nu * nu),
        };
        Ok(LameParameters { lambda, mu })
    }

    /// Voigt constitutive matrix mapping `(εxx, εyy, γxy)` to `(σxx, σyy, τxy)`.
    pub fn constitutive_matrix(&self) -> Result<Matrix3<f64>> {
        self.validate()?;
        let (e, nu) = (self.young, self.poisson);
        Ok(match self.mode {
            AnalysisMode::PlaneStress => {
                let c = e / (1.0 - nu * nu);
                Matrix3::new(c, c * nu, 0.0, c * nu, c, 0.0, 0.0, 0.0, c * (1.0 - nu) / 2.0)
            }
            AnalysisMode::PlaneStrain => {
                let c = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
                Matrix3::new(
                    c * (1.0 - nu),
                    c * nu,
                    0.0,
                    c * nu,
                    c * (1.0 - nu),
                    0.0,
                    0.0,
                    0.0,
                    c * (1.0 - 2.0 * nu) / 2.0,
                )
            }
        })
    }
}

impl LameParameters {
    pub fn constitutive_matrix(&self) -> Matrix3<f64> {
        let (l, m) = (self.lambda, self.mu);
        Matrix3::new(l + 2.0 * m, l, 0.0, l, l + 2.0 * m, 0.0, 0.0, 0.0, m)
    }
}
