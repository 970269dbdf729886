//! Measured absorption spectra and their Kramers-Kronig continuation to the
//! imaginary frequency axis:
//!
//! ```text
//! ε(iξ) = 1 + (2/π) ∫₀^∞ ω ε''(ω) / (ω² + ξ²) dω
//! ```
//!
//! Between samples `ε''` is linearly interpolated and each segment is
//! integrated in closed form. Below the first and above the last sample the
//! configured tail models take over.

use std::f64::consts::FRAC_2_PI;

use serde::{Deserialize, Serialize};

use super::ResponseValue;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_plain, Tolerance};

/// Extrapolation of `ε''` below the first sample `(ω₁, ε''₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LowTail {
    Zero,
    /// `ε''(ω) = ε''₁` down to zero frequency.
    #[default]
    Constant,
    /// `ε''(ω) = ε''₁ (ω/ω₁)^exponent`; integrable for `exponent > -2`.
    PowerLaw { exponent: f64 },
}

/// Extrapolation of `ε''` above the last sample `(ω_N, ε''_N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HighTail {
    Zero,
    /// `ε''(ω) = ε''_N (ω_N/ω)^exponent`; integrable for `exponent > 0`.
    PowerLaw { exponent: f64 },
}

impl Default for HighTail {
    fn default() -> Self {
        HighTail::PowerLaw { exponent: 3.0 }
    }
}

/// Tail configuration, as stored in the JSON sidecar next to a CSV table.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailConfig {
    #[serde(default)]
    pub low_tail: LowTail,
    #[serde(default)]
    pub high_tail: HighTail,
}

/// Result of a Kramers-Kronig evaluation with its discretisation error.
#[derive(Debug, Clone, PartialEq)]
pub struct KkEstimate {
    pub value: f64,
    pub error_estimate: f64,
    /// Set when the requested tolerance cannot be met with the given samples.
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct TabulatedAbsorption {
    omega: Vec<f64>,
    eps_imag: Vec<f64>,
    tails: TailConfig,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    samples: Vec<(f64, f64)>,
    #[serde(default)]
    low_tail: LowTail,
    #[serde(default)]
    high_tail: HighTail,
}

impl TryFrom<RawTable> for TabulatedAbsorption {
    type Error = Error;

    fn try_from(raw: RawTable) -> Result<Self> {
        TabulatedAbsorption::new(
            raw.samples,
            TailConfig { low_tail: raw.low_tail, high_tail: raw.high_tail },
        )
    }
}

impl From<TabulatedAbsorption> for RawTable {
    fn from(t: TabulatedAbsorption) -> Self {
        RawTable {
            samples: t.samples().collect(),
            low_tail: t.tails.low_tail,
            high_tail: t.tails.high_tail,
        }
    }
}

impl TabulatedAbsorption {
    /// Validates and stores `(ω [rad/s], ε'')` samples.
    pub fn new(samples: Vec<(f64, f64)>, tails: TailConfig) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Ingestion(format!(
                "at least 2 samples required, got {}",
                samples.len()
            )));
        }
        for (i, &(w, e)) in samples.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Ingestion(format!("sample {i}: omega {w} must be finite and non-negative")));
            }
            if !e.is_finite() || e < 0.0 {
                return Err(Error::Ingestion(format!("sample {i}: eps_imag {e} must be finite and non-negative")));
            }
            if i > 0 && w <= samples[i - 1].0 {
                return Err(Error::Ingestion(format!("sample {i}: omega must be strictly increasing")));
            }
        }
        match tails.low_tail {
            LowTail::PowerLaw { exponent } if !(exponent.is_finite() && exponent > -2.0) => {
                return Err(Error::Ingestion(format!(
                    "low-frequency tail exponent {exponent} makes the transform divergent (need > -2)"
                )));
            }
            _ => {}
        }
        match tails.high_tail {
            HighTail::PowerLaw { exponent } if !(exponent.is_finite() && exponent > 0.0) => {
                return Err(Error::Ingestion(format!(
                    "high-frequency tail exponent {exponent} makes the transform divergent (need > 0)"
                )));
            }
            _ => {}
        }
        let (omega, eps_imag) = samples.into_iter().unzip();
        Ok(Self { omega, eps_imag, tails })
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.omega.iter().copied().zip(self.eps_imag.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn tails(&self) -> TailConfig {
        self.tails
    }

    /// Sampled frequency range `(ω₁, ω_N)`.
    pub fn range(&self) -> (f64, f64) {
        (self.omega[0], self.omega[self.omega.len() - 1])
    }

    /// `ε(iξ)` for `ξ > 0` without an error estimate.
    pub fn eps(&self, xi: f64) -> f64 {
        1.0 + FRAC_2_PI * (self.sampled_integral(xi, 1) + self.tail_integral(xi))
    }

    /// `ε(0)`, or the divergent sentinel when the low-frequency absorption
    /// is not integrable against `1/ω`.
    pub fn eps_static(&self) -> ResponseValue {
        let divergent = ResponseValue::Divergent { xi_sq_limit: 0.0 };
        let (w1, e1) = (self.omega[0], self.eps_imag[0]);
        let low = if w1 == 0.0 {
            if e1 != 0.0 {
                return divergent;
            }
            0.0
        } else if e1 == 0.0 {
            0.0
        } else {
            match self.tails.low_tail {
                LowTail::Zero => 0.0,
                LowTail::PowerLaw { exponent } if exponent > 0.0 => e1 / exponent,
                _ => return divergent,
            }
        };
        let mut sampled = 0.0;
        for i in 0..self.omega.len() - 1 {
            let (a, b) = (self.omega[i], self.omega[i + 1]);
            let (ea, eb) = (self.eps_imag[i], self.eps_imag[i + 1]);
            let slope = (eb - ea) / (b - a);
            let alpha = ea - slope * a;
            // ∫ (α + βω)/ω dω
            let log_part = if a == 0.0 { 0.0 } else { alpha * (b / a).ln() };
            sampled += log_part + slope * (b - a);
        }
        let n = self.omega.len() - 1;
        let high = match self.tails.high_tail {
            HighTail::Zero => 0.0,
            HighTail::PowerLaw { exponent } => self.eps_imag[n] / exponent,
        };
        ResponseValue::Finite(1.0 + FRAC_2_PI * (low + sampled + high))
    }

    /// Kramers-Kronig transform at `ξ > 0`. The error estimate compares the
    /// full table against every second sample (second-order Richardson).
    pub fn kramers_kronig(&self, xi: f64, tol: f64) -> Result<KkEstimate> {
        if !(xi.is_finite() && xi > 0.0) {
            return Err(Error::Domain(format!("Kramers-Kronig requires finite xi > 0, got {xi}")));
        }
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tolerance must be positive, got {tol}")));
        }
        let full = self.sampled_integral(xi, 1);
        let value = 1.0 + FRAC_2_PI * (full + self.tail_integral(xi));
        let (error_estimate, reason) = if self.omega.len() >= 3 {
            let coarse = self.sampled_integral(xi, 2);
            (FRAC_2_PI * (full - coarse).abs() / 3.0, None)
        } else {
            (
                (value - 1.0).abs(),
                Some("fewer than 3 samples; error cannot be estimated"),
            )
        };
        let warning = match reason {
            Some(r) => Some(r.to_string()),
            None if error_estimate > tol * value.abs() => Some(format!(
                "estimated error {:.3e} exceeds requested relative tolerance {:.1e}; refine the table",
                error_estimate / value.abs(),
                tol
            )),
            None => None,
        };
        Ok(KkEstimate { value, error_estimate, warning })
    }

    /// `∫ ω ε''(ω)/(ω²+ξ²) dω` over the sampled range using samples
    /// `0, stride, 2·stride, …, last`.
    fn sampled_integral(&self, xi: f64, stride: usize) -> f64 {
        let n = self.omega.len();
        let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
        if *idx.last().unwrap() != n - 1 {
            idx.push(n - 1);
        }
        idx.windows(2)
            .map(|w| {
                segment(
                    self.omega[w[0]],
                    self.omega[w[1]],
                    self.eps_imag[w[0]],
                    self.eps_imag[w[1]],
                    xi,
                )
            })
            .sum()
    }

    fn tail_integral(&self, xi: f64) -> f64 {
        let n = self.omega.len() - 1;
        low_tail(self.tails.low_tail, self.omega[0], self.eps_imag[0], xi)
            + high_tail(self.tails.high_tail, self.omega[n], self.eps_imag[n], xi)
    }
}

/// `∫_a^b ω (α + βω)/(ω²+ξ²) dω` for the linear interpolant through
/// `(a, ea)` and `(b, eb)`.
fn segment(a: f64, b: f64, ea: f64, eb: f64, xi: f64) -> f64 {
    if ea == 0.0 && eb == 0.0 {
        return 0.0;
    }
    let slope = (eb - ea) / (b - a);
    let alpha = ea - slope * a;
    let first = 0.5 * ((b - a) * (b + a) / (a * a + xi * xi)).ln_1p();
    let second = if b <= 0.1 * xi {
        excess_series(b, xi) - excess_series(a, xi)
    } else {
        (b - a) - xi * (xi * (b - a) / (xi * xi + a * b)).atan()
    };
    alpha * first + slope * second
}

/// `w - ξ·atan(w/ξ)` for `w ≤ 0.1 ξ`.
fn excess_series(w: f64, xi: f64) -> f64 {
    let u = w / xi;
    let u2 = u * u;
    let mut term = u * u2;
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..12 {
        sum += sign * term / (2 * k + 1) as f64;
        term *= u2;
        sign = -sign;
    }
    xi * sum
}

fn knee_breakpoints(knee: f64) -> Vec<f64> {
    let mut bp = vec![0.0];
    for f in [1e-2, 1e-1, 1.0, 1e1, 1e2] {
        let x = knee * f;
        if x > 0.0 && x < 1.0 {
            bp.push(x);
        }
    }
    bp.push(1.0);
    bp
}

fn low_tail(tail: LowTail, w1: f64, e1: f64, xi: f64) -> f64 {
    if w1 == 0.0 || e1 == 0.0 {
        return 0.0;
    }
    let s = xi / w1;
    let exponent = match tail {
        LowTail::Zero => return 0.0,
        LowTail::Constant => 0.0,
        LowTail::PowerLaw { exponent } => exponent,
    };
    if exponent == 0.0 {
        e1 * 0.5 * (1.0 / (s * s)).ln_1p()
    } else if exponent == -1.0 {
        e1 * (1.0 / s).atan() / s
    } else {
        // t = w^(1/q) maps ∫₀¹ t^(1+p)/(t²+s²) dt onto a bounded integrand.
        let q = exponent + 2.0;
        let est = integrate_plain(
            |w| 1.0 / (w.powf(2.0 / q) + s * s),
            &knee_breakpoints(s.powf(q)),
            Tolerance::relative(1e-11),
            400,
        );
        e1 * est.value / q
    }
}

fn high_tail(tail: HighTail, wn: f64, en: f64, xi: f64) -> f64 {
    let exponent = match tail {
        HighTail::Zero => return 0.0,
        HighTail::PowerLaw { exponent } => exponent,
    };
    if en == 0.0 {
        return 0.0;
    }
    let s = xi / wn;
    if exponent == 3.0 {
        // ∫₁^∞ t⁻²/(t²+s²) dt = (1 - atan(s)/s)/s²
        let v = if s < 1e-3 {
            let s2 = s * s;
            1.0 / 3.0 - s2 / 5.0 + s2 * s2 / 7.0
        } else {
            (1.0 - s.atan() / s) / (s * s)
        };
        en * v
    } else {
        let est = integrate_plain(
            |w| 1.0 / (1.0 + s * s * w.powf(2.0 / exponent)),
            &knee_breakpoints(s.powf(-exponent)),
            Tolerance::relative(1e-11),
            400,
        );
        en * est.value / exponent
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Brute-force Kramers-Kronig of a continuous ε'' by adaptive quadrature
    /// in log ω, independent of the tabulated path.
    fn brute_force(eps_imag: impl Fn(f64) -> f64 + Sync, xi: f64, lo: f64, hi: f64) -> f64 {
        let (a, b) = (lo.ln(), hi.ln());
        let breaks: Vec<f64> = (0..=40).map(|i| a + (b - a) * i as f64 / 40.0).collect();
        let est = integrate_plain(
            |u| {
                let w = u.exp();
                w * w * eps_imag(w) / (w * w + xi * xi)
            },
            &breaks,
            Tolerance::relative(1e-12),
            2000,
        );
        1.0 + FRAC_2_PI * est.value
    }

    #[test]
    fn rejects_bad_tables() {
        let t = TailConfig::default();
        assert!(TabulatedAbsorption::new(vec![(1.0, 0.0)], t).is_err());
        assert!(TabulatedAbsorption::new(vec![(2.0, 0.0), (1.0, 0.0)], t).is_err());
        assert!(TabulatedAbsorption::new(vec![(1.0, -0.1), (2.0, 0.0)], t).is_err());
        assert!(TabulatedAbsorption::new(vec![(1.0, f64::NAN), (2.0, 0.0)], t).is_err());
    }

    #[test]
    fn divergent_tails_are_ingestion_errors() {
        let s = vec![(1.0, 1.0), (2.0, 1.0)];
        let high = TailConfig { high_tail: HighTail::PowerLaw { exponent: 0.0 }, ..Default::default() };
        assert!(matches!(TabulatedAbsorption::new(s.clone(), high), Err(Error::Ingestion(_))));
        let low = TailConfig { low_tail: LowTail::PowerLaw { exponent: -2.0 }, ..Default::default() };
        assert!(matches!(TabulatedAbsorption::new(s, low), Err(Error::Ingestion(_))));
    }

    #[test]
    fn vacuum_table_is_exactly_one() {
        let t = TabulatedAbsorption::new(vec![(1e13, 0.0), (1e14, 0.0), (1e15, 0.0)], TailConfig::default()).unwrap();
        let kk = t.kramers_kronig(3e14, 1e-6).unwrap();
        assert_eq!(kk.value, 1.0);
        assert_eq!(kk.error_estimate, 0.0);
        assert_eq!(t.eps_static(), ResponseValue::Finite(1.0));
    }

    #[test]
    fn box_absorption_matches_brute_force() {
        // Piecewise-linear ε'' is reproduced exactly by the segment formula.
        let samples = vec![(1e14, 0.0), (2e14, 1.0), (5e14, 1.0), (6e14, 0.0)];
        let tails = TailConfig { low_tail: LowTail::Zero, high_tail: HighTail::Zero };
        let t = TabulatedAbsorption::new(samples, tails).unwrap();
        let interp = |w: f64| {
            if w < 1e14 || w > 6e14 {
                0.0
            } else if w < 2e14 {
                (w - 1e14) / 1e14
            } else if w < 5e14 {
                1.0
            } else {
                (6e14 - w) / 1e14
            }
        };
        for xi in [1e12, 1e14, 4e14, 1e16, 1e18] {
            let oracle = brute_force(interp, xi, 1e14, 6e14);
            assert_relative_eq!(t.eps(xi), oracle, max_relative = 1e-10);
        }
    }

    #[test]
    fn tail_closed_forms_match_numeric_route() {
        // exponent 3 closed form vs the generic substitution
        for s in [1e-5, 1e-2, 0.7, 3.0, 1e3] {
            let closed = high_tail(HighTail::PowerLaw { exponent: 3.0 }, 1.0, 1.0, s);
            let numeric = integrate_plain(
                |w| 1.0 / (1.0 + s * s * w.powf(2.0 / 3.0)),
                &knee_breakpoints(s.powf(-3.0)),
                Tolerance::relative(1e-12),
                400,
            )
            .value
                / 3.0;
            assert_relative_eq!(closed, numeric, max_relative = 1e-9);
        }
        // constant / inverse low tails vs generic power law
        for s in [1e-3, 0.5, 20.0] {
            let c = low_tail(LowTail::Constant, 1.0, 1.0, s);
            let g = low_tail(LowTail::PowerLaw { exponent: 1e-12 }, 1.0, 1.0, s);
            assert_relative_eq!(c, g, max_relative = 1e-8);
            let inv = low_tail(LowTail::PowerLaw { exponent: -1.0 }, 1.0, 1.0, s);
            let inv_g = low_tail(LowTail::PowerLaw { exponent: -1.0 + 1e-12 }, 1.0, 1.0, s);
            assert_relative_eq!(inv, inv_g, max_relative = 1e-8);
        }
    }

    #[test]
    fn excess_series_matches_direct_form() {
        let xi: f64 = 1.0;
        for w in [0.01, 0.05, 0.1] {
            let direct = w - xi * (w / xi).atan();
            assert_relative_eq!(excess_series(w, xi), direct, max_relative = 1e-9);
        }
    }

    #[test]
    fn static_limit() {
        let tails = TailConfig { low_tail: LowTail::Zero, high_tail: HighTail::Zero };
        let t = TabulatedAbsorption::new(vec![(1.0, 1.0), (2.0, 1.0)], tails).unwrap();
        // 1 + (2/π) ln 2
        assert_eq!(t.eps_static(), ResponseValue::Finite(1.0 + FRAC_2_PI * 2f64.ln()));
        let t = TabulatedAbsorption::new(vec![(1.0, 1.0), (2.0, 1.0)], TailConfig::default()).unwrap();
        assert!(matches!(t.eps_static(), ResponseValue::Divergent { .. }));
    }

    #[test]
    fn sparse_table_warns() {
        let t = TabulatedAbsorption::new(
            vec![(1e14, 0.0), (1e15, 3.0), (1e16, 0.0)],
            TailConfig::default(),
        )
        .unwrap();
        let kk = t.kramers_kronig(1e15, 1e-8).unwrap();
        assert!(kk.warning.is_some());
        assert!(kk.error_estimate > 0.0);
    }

    #[test]
    fn serde_round_trip() {
        let t = TabulatedAbsorption::new(vec![(1.0, 0.5), (2.0, 0.25)], TailConfig::default()).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        let back: TabulatedAbsorption = serde_json::from_str(&s).unwrap();
        assert_eq!(t, back);
        let bad = r#"{"samples": [[1.0, 0.5]]}"#;
        assert!(serde_json::from_str::<TabulatedAbsorption>(bad).is_err());
    }
}
