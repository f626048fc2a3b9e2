//! Closed-form solution of a disk inclusion (radius `a`) in a circular
//! matrix (radius `b`) under the radial boundary displacement `u_r(b) = b`.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::materials::{AnalysisMode, LameParameters, MaterialPhase};
use crate::mesh::INCLUSION_PHASE;
use crate::{Error, Point, Result, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BimaterialProblem {
    pub a: f64,
    pub b: f64,
    pub inclusion: MaterialPhase,
    pub matrix: MaterialPhase,
}

/// Which branch of the piecewise solution to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Selected by radius (`r ≤ a` is the inclusion).
    ByRadius,
    Inclusion,
    Matrix,
}

impl Branch {
    /// Branch of a material phase id.
    pub fn of_phase(phase: u32) -> Self {
        if phase == INCLUSION_PHASE {
            Branch::Inclusion
        } else {
            Branch::Matrix
        }
    }
}

impl BimaterialProblem {
    /// Matrix `E = 1`, inclusion `E = η`, common Poisson ratio.
    pub fn with_modular_ratio(a: f64, b: f64, eta: f64, poisson: f64, mode: AnalysisMode) -> Result<Self> {
        if !(a > 0.0 && a < b) {
            return Err(Error::Config(format!("need 0 < a < b, got a = {a}, b = {b}")));
        }
        Ok(Self { a, b, inclusion: MaterialPhase::new(eta, poisson, mode)?, matrix: MaterialPhase::new(1.0, poisson, mode)? })
    }

    pub fn modular_ratio(&self) -> f64 {
        self.inclusion.young / self.matrix.young
    }

    fn lame(&self) -> (LameParameters, LameParameters) {
        (self.inclusion.lame().expect("validated phase"), self.matrix.lame().expect("validated phase"))
    }

    /// The coefficient `α` of the matrix branch `u_r = (r − b²/r) α + b²/r`.
    pub fn alpha(&self) -> f64 {
        let (p1, p2) = self.lame();
        let (a2, b2) = (self.a * self.a, self.b * self.b);
        (p1.lambda + p1.mu + p2.mu) * b2 / ((p2.lambda + p2.mu) * a2 + (p1.lambda + p1.mu) * (b2 - a2) + p2.mu * b2)
    }

    /// Uniform strain `u_r / r` inside the inclusion.
    pub fn inclusion_strain(&self) -> f64 {
        let ratio = self.b * self.b / (self.a * self.a);
        (1.0 - ratio) * self.alpha() + ratio
    }

    fn branch(&self, r: f64, branch: Branch) -> Result<Branch> {
        if r > self.b * (1.0 + 1e-12) {
            return Err(Error::OutsideDomain { r, b: self.b });
        }
        Ok(match branch {
            Branch::ByRadius if r <= self.a => Branch::Inclusion,
            Branch::ByRadius => Branch::Matrix,
            other => other,
        })
    }

    /// Radial displacement `u_r(r)`.
    pub fn displacement(&self, r: f64) -> Result<f64> {
        self.radial_displacement(r, Branch::ByRadius)
    }

    pub fn radial_displacement(&self, r: f64, branch: Branch) -> Result<f64> {
        Ok(match self.branch(r, branch)? {
            Branch::Inclusion => self.inclusion_strain() * r,
            _ => {
                let alpha = self.alpha();
                (r - self.b * self.b / r) * alpha + self.b * self.b / r
            }
        })
    }

    /// `(ε_rr, ε_θθ)`.
    pub fn strains(&self, r: f64, branch: Branch) -> Result<(f64, f64)> {
        Ok(match self.branch(r, branch)? {
            Branch::Inclusion => (self.inclusion_strain(), self.inclusion_strain()),
            _ => {
                let alpha = self.alpha();
                let q = (1.0 - alpha) * self.b * self.b / (r * r);
                (alpha - q, alpha + q)
            }
        })
    }

    /// `(σ_rr, σ_θθ)`.
    pub fn stress(&self, r: f64) -> Result<(f64, f64)> {
        self.polar_stress(r, Branch::ByRadius)
    }

    pub fn polar_stress(&self, r: f64, branch: Branch) -> Result<(f64, f64)> {
        let b = self.branch(r, branch)?;
        let (err, ett) = self.strains(r, b)?;
        let (p1, p2) = self.lame();
        let p = if b == Branch::Inclusion { p1 } else { p2 };
        let trace = err + ett;
        Ok((2.0 * p.mu * err + p.lambda * trace, 2.0 * p.mu * ett + p.lambda * trace))
    }

    /// Cartesian displacement at `p` (centre at the origin).
    pub fn displacement_at(&self, p: &Point, branch: Branch) -> Result<Vec2> {
        let r = p.coords.norm();
        if r == 0.0 {
            return Ok(Vec2::zeros());
        }
        Ok(p.coords * (self.radial_displacement(r, branch)? / r))
    }

    /// Voigt stress `(σxx, σyy, τxy)` at `p`.
    pub fn stress_at(&self, p: &Point, branch: Branch) -> Result<Vector3<f64>> {
        let r = p.coords.norm();
        let (srr, stt) = self.polar_stress(r.max(f64::MIN_POSITIVE), branch)?;
        let (c, s) = if r == 0.0 { (1.0, 0.0) } else { (p.x / r, p.y / r) };
        Ok(Vector3::new(srr * c * c + stt * s * s, srr * s * s + stt * c * c, (srr - stt) * c * s))
    }
}

/// Radial component `n·σ·n` of a Voigt stress at `p`; `σxx` at the origin.
pub fn radial_stress(stress: &Vector3<f64>, p: &Point) -> f64 {
    let r = p.coords.norm();
    if r == 0.0 {
        return stress[0];
    }
    let (c, s) = (p.x / r, p.y / r);
    stress[0] * c * c + stress[1] * s * s + 2.0 * stress[2] * c * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn problem(eta: f64) -> BimaterialProblem {
        BimaterialProblem::with_modular_ratio(0.25, 1.0, eta, 0.3, AnalysisMode::PlaneStrain).unwrap()
    }

    #[test]
    fn homogeneous_limit_is_uniform_dilation() {
        let p = problem(1.0);
        assert_relative_eq!(p.alpha(), 1.0, epsilon = 1e-15);
        let lame = p.matrix.lame().unwrap();
        for r in [0.0, 0.1, 0.25, 0.5, 1.0] {
            assert_relative_eq!(p.displacement(r).unwrap(), r, epsilon = 1e-15);
            if r > 0.0 {
                let (srr, stt) = p.stress(r).unwrap();
                assert_relative_eq!(srr, 2.0 * lame.mu + 2.0 * lame.lambda, epsilon = 1e-14);
                assert_relative_eq!(stt, srr, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn boundary_value_and_domain_error() {
        for eta in [1.0, 10.0, 100.0, 0.1] {
            assert_relative_eq!(problem(eta).displacement(1.0).unwrap(), 1.0, epsilon = 1e-15);
        }
        assert!(matches!(problem(10.0).displacement(1.01), Err(Error::OutsideDomain { .. })));
        assert!(problem(10.0).displacement(1.0 + 1e-14).is_ok());
    }

    #[test]
    fn interface_continuity() {
        for eta in [10.0, 100.0] {
            let p = problem(eta);
            let a = p.a;
            let inner = p.radial_displacement(a, Branch::Inclusion).unwrap();
            let outer = p.radial_displacement(a, Branch::Matrix).unwrap();
            assert!((inner - outer).abs() <= 1e-14);
            let (srr_in, stt_in) = p.polar_stress(a, Branch::Inclusion).unwrap();
            let (srr_out, stt_out) = p.polar_stress(a, Branch::Matrix).unwrap();
            assert!((srr_in - srr_out).abs() <= 1e-12 * srr_in.abs());
            assert!((stt_in - stt_out).abs() > 1e-3 * stt_in.abs());
        }
    }

    #[test]
    fn inclusion_stress_is_uniform() {
        let p = problem(100.0);
        let s0 = p.stress_at(&Point::origin(), Branch::ByRadius).unwrap();
        for q in [Point::new(0.1, 0.0), Point::new(-0.05, 0.2), Point::new(0.0, 0.24)] {
            assert_relative_eq!(p.stress_at(&q, Branch::ByRadius).unwrap(), s0, epsilon = 1e-12 * s0.amax());
        }
        assert_relative_eq!(s0[0], s0[1], epsilon = 1e-12 * s0.amax());
    }

    proptest! {
        #[test]
        fn radial_derivative_matches_strain(eta in 0.5f64..200.0, r in 0.3f64..0.95) {
            // finite-difference oracle for ε_rr and the polar-to-Cartesian mapping
            let p = problem(eta);
            let h = 1e-6;
            let du = (p.displacement(r + h).unwrap() - p.displacement(r - h).unwrap()) / (2.0 * h);
            let (err, ett) = p.strains(r, Branch::ByRadius).unwrap();
            prop_assert!((du - err).abs() <= 1e-7 * (1.0 + err.abs()));
            prop_assert!((ett - p.displacement(r).unwrap() / r).abs() <= 1e-13);
            let q = Point::new(r * 0.6, r * 0.8);
            let s = p.stress_at(&q, Branch::ByRadius).unwrap();
            let (srr, _) = p.stress(r).unwrap();
            prop_assert!((radial_stress(&s, &q) - srr).abs() <= 1e-12 * (1.0 + srr.abs()));
        }
    }
}
