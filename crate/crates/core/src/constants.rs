//! Physical constants (CODATA 2018 exact/recommended values, SI).

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Speed of light in vacuum, m/s.
pub const C: f64 = 2.997_924_58e8;

/// Identifier of the constants table, recorded in run manifests.
pub const CONSTANTS_VERSION: &str = "CODATA-2018";

/// Ideal-conductor Casimir energy per unit area, `-π²ħc/(720 a³)`, J/m².
pub fn ideal_energy(a: f64) -> f64 {
    -std::f64::consts::PI.powi(2) * HBAR * C / (720.0 * a.powi(3))
}

/// Ideal-conductor Casimir pressure, `-π²ħc/(240 a⁴)`, Pa.
pub fn ideal_pressure(a: f64) -> f64 {
    -std::f64::consts::PI.powi(2) * HBAR * C / (240.0 * a.powi(4))
}
