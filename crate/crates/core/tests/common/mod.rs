//! Reference models shared by the integration suites.
#![allow(dead_code)]

use casimir_core::material::{HighTail, LorentzOscillator, LowTail, TailConfig};
use casimir_core::sign::log_spaced;
use casimir_core::{MaterialResponse, TabulatedAbsorption};

pub fn gold_drude() -> MaterialResponse {
    MaterialResponse::drude(1.37e16, 5.32e13).unwrap().with_label("gold (Drude)")
}

pub fn aluminium_plasma() -> MaterialResponse {
    MaterialResponse::plasma(1.88e16).unwrap().with_label("aluminium (plasma)")
}

/// One ultraviolet oscillator, static permittivity 3.8.
pub fn silica_like() -> LorentzOscillator {
    LorentzOscillator { strength: 1.0, omega_p: 2e16 * 2.8f64.sqrt(), omega_0: 2e16, gamma: 1e15 }
}

pub fn lorentz_dielectric() -> MaterialResponse {
    MaterialResponse::lorentz(vec![silica_like()]).unwrap().with_label("silica-like (Lorentz)")
}

/// Infrared plus ultraviolet oscillators.
pub fn lorentz_two_band() -> MaterialResponse {
    MaterialResponse::lorentz(vec![
        LorentzOscillator { strength: 1.0, omega_p: 3e14 * 5f64.sqrt(), omega_0: 3e14, gamma: 3e13 },
        LorentzOscillator { strength: 1.0, omega_p: 1.5e16 * 0.8f64.sqrt(), omega_0: 1.5e16, gamma: 2e15 },
    ])
    .unwrap()
    .with_label("two-band (Lorentz)")
}

/// Real-frequency absorption of a single oscillator.
pub fn lorentz_eps_imag(o: LorentzOscillator, w: f64) -> f64 {
    let wp2 = o.strength * o.omega_p * o.omega_p;
    wp2 * o.gamma * w / ((o.omega_0 * o.omega_0 - w * w).powi(2) + (o.gamma * w).powi(2))
}

/// Closed-form imaginary-axis permittivity of a single oscillator.
pub fn lorentz_eps(o: LorentzOscillator, xi: f64) -> f64 {
    1.0 + o.strength * o.omega_p * o.omega_p / (o.omega_0 * o.omega_0 + xi * xi + o.gamma * xi)
}

pub fn drude_eps_imag(omega_p: f64, gamma: f64, w: f64) -> f64 {
    omega_p * omega_p * gamma / (w * (w * w + gamma * gamma))
}

pub fn drude_eps(omega_p: f64, gamma: f64, xi: f64) -> f64 {
    1.0 + omega_p * omega_p / (xi * (xi + gamma))
}

/// Table of `f` on `[lo, hi]`, refined until linear interpolation between
/// neighbouring samples reproduces `f` at the midpoint to `rel_tol`.
pub fn sampled(f: impl Fn(f64) -> f64, lo: f64, hi: f64, rel_tol: f64, tails: TailConfig) -> TabulatedAbsorption {
    fn refine(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fb: f64, tol: f64, depth: u32, out: &mut Vec<(f64, f64)>) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if depth == 0 || (fm - 0.5 * (fa + fb)).abs() <= tol * fm.abs() {
            out.push((b, fb));
            return;
        }
        refine(f, a, m, fa, fm, tol, depth - 1, out);
        refine(f, m, b, fm, fb, tol, depth - 1, out);
    }
    let seeds = log_spaced(lo, hi, ((hi / lo).log10() * 5.0).ceil() as usize + 1);
    let mut samples = vec![(lo, f(lo))];
    for w in seeds.windows(2) {
        refine(&f, w[0], w[1], f(w[0]), f(w[1]), rel_tol, 30, &mut samples);
    }
    TabulatedAbsorption::new(samples, tails).unwrap()
}

pub fn lorentz_table(rel_tol: f64) -> TabulatedAbsorption {
    let o = silica_like();
    let tails = TailConfig { low_tail: LowTail::PowerLaw { exponent: 1.0 }, high_tail: HighTail::PowerLaw { exponent: 3.0 } };
    sampled(|w| lorentz_eps_imag(o, w), 1e14, 1e18, rel_tol, tails)
}

/// Midpoint interpolation tolerance of the reference tables.
pub const TABLE_TOL: f64 = 1e-4;

pub const TABLE_DRUDE: (f64, f64) = (1.2e16, 1e14);

pub fn drude_table(rel_tol: f64) -> TabulatedAbsorption {
    let (wp, g) = TABLE_DRUDE;
    let tails = TailConfig { low_tail: LowTail::PowerLaw { exponent: -1.0 }, high_tail: HighTail::PowerLaw { exponent: 3.0 } };
    sampled(|w| drude_eps_imag(wp, g, w), 1e11, 1e17, rel_tol, tails)
}

/// Six dispersive electric-only models: Drude, plasma, two Lorentz and two
/// tables ingested through the Kramers-Kronig transform.
pub fn attraction_family() -> Vec<MaterialResponse> {
    vec![
        gold_drude(),
        aluminium_plasma(),
        lorentz_dielectric(),
        lorentz_two_band(),
        MaterialResponse::tabulated(lorentz_table(TABLE_TOL)).with_label("silica-like (table)"),
        MaterialResponse::tabulated(drude_table(TABLE_TOL)).with_label("metal (table)"),
    ]
}

/// Relative difference, exact zero for identical values.
pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
