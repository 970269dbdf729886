//! Sphere-plate force from the plate-plate energy via the proximity force
//! approximation, `F = 2πR·E_pp(a)`. Only the sphere-plate geometry is
//! provided; cylinder-cylinder configurations are not modelled.

use std::f64::consts::PI;

use serde::Serialize;

use crate::engine::{energy_per_area, GapConfig, QuadratureConfig};
use crate::error::{Error, Result};
use crate::material::MaterialResponse;

/// Default `a/R` above which the approximation is flagged.
pub const PFA_VALIDITY_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePlate {
    radius: f64,
    gap: f64,
}

impl SpherePlate {
    pub fn new(radius: f64, gap: f64) -> Result<Self> {
        for (n, v) in [("sphere radius", radius), ("gap", gap)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{n} must be positive and finite, got {v}")));
            }
        }
        Ok(Self { radius, gap })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn aspect(&self) -> f64 {
        self.gap / self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PfaForce {
    /// N, negative means attraction.
    pub force: f64,
    pub error_estimate: f64,
    /// Plate-plate energy per area the force was derived from, J/m².
    pub energy_per_area: f64,
    pub a_over_r: f64,
    pub warnings: Vec<String>,
    pub flags: Vec<String>,
}

pub fn pfa_force(
    geom: SpherePlate,
    sphere: &MaterialResponse,
    plate: &MaterialResponse,
    quad: &QuadratureConfig,
) -> Result<PfaForce> {
    pfa_force_with_threshold(geom, sphere, plate, quad, PFA_VALIDITY_RATIO)
}

pub fn pfa_force_with_threshold(
    geom: SpherePlate,
    sphere: &MaterialResponse,
    plate: &MaterialResponse,
    quad: &QuadratureConfig,
    validity_ratio: f64,
) -> Result<PfaForce> {
    let cfg = GapConfig::new(geom.gap, sphere.clone(), plate.clone())?;
    let e = energy_per_area(&cfg, quad)?;
    let scale = 2.0 * PI * geom.radius;
    let mut warnings = e.warnings;
    let a_over_r = geom.aspect();
    if a_over_r > validity_ratio {
        warnings.push(format!(
            "proximity force approximation questionable: a/R = {a_over_r:.3} exceeds {validity_ratio}"
        ));
    }
    Ok(PfaForce {
        force: scale * e.value,
        error_estimate: scale * e.error_estimate,
        energy_per_area: e.value,
        a_over_r,
        warnings,
        flags: e.flags,
    })
}
