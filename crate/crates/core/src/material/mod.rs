//! Material response on the imaginary frequency axis.
//!
//! Causality makes `ε(iξ)` and `μ(iξ)` real, so everything downstream works
//! in real arithmetic. Every model except [`MaterialKind::ConstantEpsMu`] and
//! the two ideal mirrors is a genuine function of `ξ`; the constant model
//! reproduces the frequency-independent assumption and is always flagged.

mod tabulated;

pub use tabulated::{HighTail, KkEstimate, LowTail, TabulatedAbsorption, TailConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Flag carried by every non-dispersive model and surfaced in all outputs.
pub const UNPHYSICAL_FLAG: &str = "unphysical: non-dispersive";

/// Angular frequency on the positive imaginary axis, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ImaginaryFrequency(f64);

impl ImaginaryFrequency {
    pub fn new(xi: f64) -> Result<Self> {
        if xi.is_finite() && xi >= 0.0 {
            Ok(Self(xi))
        } else {
            Err(Error::Domain(format!("imaginary frequency must be finite and >= 0, got {xi}")))
        }
    }

    pub const ZERO: Self = Self(0.0);

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Value of a response function at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResponseValue {
    Finite(f64),
    /// Static divergence of conducting models at `ξ = 0`. Carries
    /// `lim ξ² ε(iξ)`, which fixes the TE reflection limit.
    Divergent { xi_sq_limit: f64 },
    /// Ideal mirror: the response is infinite at every frequency.
    Ideal,
}

impl ResponseValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            ResponseValue::Finite(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorentzOscillator {
    /// Oscillator strength `f`.
    pub strength: f64,
    /// Plasma frequency `ωp`, rad/s.
    pub omega_p: f64,
    /// Resonance frequency `ω₀`, rad/s.
    pub omega_0: f64,
    /// Damping `γ`, rad/s.
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "snake_case")]
pub enum MaterialKind {
    /// Ideal electric mirror, `(r_TE, r_TM) = (-1, +1)`.
    PerfectConductor,
    /// Ideal infinitely-permeable mirror, `(r_TE, r_TM) = (+1, -1)`.
    InfinitelyPermeable,
    ConstantEpsMu { eps: f64, mu: f64 },
    /// `ε(iξ) = 1 + ωp²/(ξ(ξ+γ))`
    Drude { omega_p: f64, gamma: f64 },
    /// `ε(iξ) = 1 + ωp²/ξ²`
    Plasma { omega_p: f64 },
    /// `ε(iξ) = 1 + Σ f ωp²/(ω₀² + ξ² + γξ)`
    Lorentz { oscillators: Vec<LorentzOscillator> },
    /// `μ(iξ) = 1 + Δμ/(1 + ξ/ω_m)` on top of an electric-only `electric` model.
    DebyeMagnetic { delta_mu: f64, omega_m: f64, electric: Box<MaterialKind> },
    Tabulated(TabulatedAbsorption),
}

impl MaterialKind {
    fn name(&self) -> &'static str {
        match self {
            MaterialKind::PerfectConductor => "perfect_conductor",
            MaterialKind::InfinitelyPermeable => "infinitely_permeable",
            MaterialKind::ConstantEpsMu { .. } => "constant_eps_mu",
            MaterialKind::Drude { .. } => "drude",
            MaterialKind::Plasma { .. } => "plasma",
            MaterialKind::Lorentz { .. } => "lorentz",
            MaterialKind::DebyeMagnetic { .. } => "debye_magnetic",
            MaterialKind::Tabulated(_) => "tabulated",
        }
    }

    fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!("{name} must be finite and > 0, got {v}")))
            }
        }
        fn non_negative(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!("{name} must be finite and >= 0, got {v}")))
            }
        }
        match self {
            MaterialKind::PerfectConductor | MaterialKind::InfinitelyPermeable => Ok(()),
            MaterialKind::ConstantEpsMu { eps, mu } => {
                for (n, v) in [("eps", *eps), ("mu", *mu)] {
                    if !(v.is_finite() && v >= 1.0) {
                        return Err(Error::InvalidModel(format!("{n} must be finite and >= 1, got {v}")));
                    }
                }
                Ok(())
            }
            MaterialKind::Drude { omega_p, gamma } => {
                positive("omega_p", *omega_p)?;
                positive("gamma", *gamma)
            }
            MaterialKind::Plasma { omega_p } => positive("omega_p", *omega_p),
            MaterialKind::Lorentz { oscillators } => {
                if oscillators.is_empty() {
                    return Err(Error::InvalidModel("lorentz model needs at least one oscillator".into()));
                }
                for o in oscillators {
                    non_negative("strength", o.strength)?;
                    positive("omega_p", o.omega_p)?;
                    positive("omega_0", o.omega_0)?;
                    non_negative("gamma", o.gamma)?;
                }
                Ok(())
            }
            MaterialKind::DebyeMagnetic { delta_mu, omega_m, electric } => {
                non_negative("delta_mu", *delta_mu)?;
                positive("omega_m", *omega_m)?;
                match electric.as_ref() {
                    MaterialKind::Drude { .. }
                    | MaterialKind::Plasma { .. }
                    | MaterialKind::Lorentz { .. }
                    | MaterialKind::Tabulated(_) => electric.validate(),
                    other => Err(Error::InvalidModel(format!(
                        "debye_magnetic electric part must be a dispersive electric model, got {}",
                        other.name()
                    ))),
                }
            }
            // Validated on construction.
            MaterialKind::Tabulated(_) => Ok(()),
        }
    }

    fn eps(&self, xi: f64) -> ResponseValue {
        use ResponseValue::*;
        match self {
            MaterialKind::PerfectConductor => Ideal,
            MaterialKind::InfinitelyPermeable => Finite(1.0),
            MaterialKind::ConstantEpsMu { eps, .. } => Finite(*eps),
            MaterialKind::Drude { omega_p, gamma } => {
                if xi == 0.0 {
                    Divergent { xi_sq_limit: 0.0 }
                } else {
                    Finite(1.0 + omega_p * omega_p / (xi * (xi + gamma)))
                }
            }
            MaterialKind::Plasma { omega_p } => {
                if xi == 0.0 {
                    Divergent { xi_sq_limit: omega_p * omega_p }
                } else {
                    Finite(1.0 + (omega_p / xi).powi(2))
                }
            }
            MaterialKind::Lorentz { oscillators } => Finite(
                1.0 + oscillators
                    .iter()
                    .map(|o| {
                        o.strength * o.omega_p * o.omega_p
                            / (o.omega_0 * o.omega_0 + xi * xi + o.gamma * xi)
                    })
                    .sum::<f64>(),
            ),
            MaterialKind::DebyeMagnetic { electric, .. } => electric.eps(xi),
            MaterialKind::Tabulated(t) => {
                if xi == 0.0 {
                    t.eps_static()
                } else {
                    Finite(t.eps(xi))
                }
            }
        }
    }

    fn mu(&self, xi: f64) -> ResponseValue {
        match self {
            MaterialKind::InfinitelyPermeable => ResponseValue::Ideal,
            MaterialKind::ConstantEpsMu { mu, .. } => ResponseValue::Finite(*mu),
            MaterialKind::DebyeMagnetic { delta_mu, omega_m, .. } => {
                ResponseValue::Finite(1.0 + delta_mu / (1.0 + xi / omega_m))
            }
            _ => ResponseValue::Finite(1.0),
        }
    }

    fn characteristic_frequencies(&self, out: &mut Vec<f64>) {
        match self {
            MaterialKind::Drude { omega_p, gamma } => out.extend([*omega_p, *gamma]),
            MaterialKind::Plasma { omega_p } => out.push(*omega_p),
            MaterialKind::Lorentz { oscillators } => {
                for o in oscillators {
                    out.extend([o.omega_0, o.omega_p]);
                    if o.gamma > 0.0 {
                        out.push(o.gamma);
                    }
                }
            }
            MaterialKind::DebyeMagnetic { omega_m, delta_mu, electric } => {
                out.push(*omega_m);
                if *delta_mu > 1.0 {
                    out.push(omega_m * delta_mu);
                }
                electric.characteristic_frequencies(out);
            }
            MaterialKind::Tabulated(t) => {
                let (lo, hi) = t.range();
                if lo > 0.0 {
                    out.push(lo);
                }
                out.push(hi);
            }
            _ => {}
        }
    }
}

/// A validated, immutable material model with a human-readable label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMaterial", into = "RawMaterial")]
pub struct MaterialResponse {
    label: String,
    kind: MaterialKind,
    // Only the UVL vacuum-index mode builds constants outside eps, mu >= 1.
    relaxed: bool,
}

#[derive(Serialize, Deserialize)]
struct RawMaterial {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(flatten)]
    kind: MaterialKind,
}

impl TryFrom<RawMaterial> for MaterialResponse {
    type Error = Error;

    fn try_from(raw: RawMaterial) -> Result<Self> {
        MaterialResponse::new(raw.kind, raw.label)
    }
}

impl From<MaterialResponse> for RawMaterial {
    fn from(m: MaterialResponse) -> Self {
        RawMaterial { label: Some(m.label), kind: m.kind }
    }
}

impl MaterialResponse {
    /// Validates `kind`; the label defaults to the kind name.
    pub fn new(kind: MaterialKind, label: Option<String>) -> Result<Self> {
        kind.validate()?;
        let label = label.unwrap_or_else(|| kind.name().to_string());
        Ok(Self { label, kind, relaxed: false })
    }

    pub fn perfect_conductor() -> Self {
        Self { label: "perfect_conductor".into(), kind: MaterialKind::PerfectConductor, relaxed: false }
    }

    pub fn infinitely_permeable() -> Self {
        Self { label: "infinitely_permeable".into(), kind: MaterialKind::InfinitelyPermeable, relaxed: false }
    }

    pub fn vacuum() -> Self {
        Self { label: "vacuum".into(), kind: MaterialKind::ConstantEpsMu { eps: 1.0, mu: 1.0 }, relaxed: false }
    }

    pub fn constant(eps: f64, mu: f64) -> Result<Self> {
        Self::new(MaterialKind::ConstantEpsMu { eps, mu }, Some(format!("constant(eps={eps}, mu={mu})")))
    }

    /// Constant model that only requires `eps, mu > 0`. Used for the
    /// vacuum-index UVL family where `ε = 1/μ < 1`; not representable as a file.
    pub fn constant_relaxed(eps: f64, mu: f64) -> Result<Self> {
        for (n, v) in [("eps", eps), ("mu", mu)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidModel(format!("{n} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self {
            label: format!("constant(eps={eps}, mu={mu})"),
            kind: MaterialKind::ConstantEpsMu { eps, mu },
            relaxed: true,
        })
    }

    pub fn drude(omega_p: f64, gamma: f64) -> Result<Self> {
        Self::new(MaterialKind::Drude { omega_p, gamma }, None)
    }

    pub fn plasma(omega_p: f64) -> Result<Self> {
        Self::new(MaterialKind::Plasma { omega_p }, None)
    }

    pub fn lorentz(oscillators: Vec<LorentzOscillator>) -> Result<Self> {
        Self::new(MaterialKind::Lorentz { oscillators }, None)
    }

    pub fn debye_magnetic(delta_mu: f64, omega_m: f64, electric: MaterialResponse) -> Result<Self> {
        Self::new(
            MaterialKind::DebyeMagnetic { delta_mu, omega_m, electric: Box::new(electric.kind) },
            None,
        )
    }

    /// Ferrite/garnet-like magnetic dielectric: Debye permeability on top of
    /// a single UV Lorentz oscillator with static permittivity 12.
    pub fn ferrite(delta_mu: f64, omega_m: f64) -> Result<Self> {
        let electric = Self::lorentz(vec![LorentzOscillator {
            strength: 1.0,
            omega_p: 11f64.sqrt() * 1e16,
            omega_0: 1e16,
            gamma: 1e14,
        }])?;
        Ok(Self::debye_magnetic(delta_mu, omega_m, electric)?
            .with_label(format!("ferrite(delta_mu={delta_mu}, omega_m={omega_m:e})")))
    }

    pub fn tabulated(table: TabulatedAbsorption) -> Self {
        Self { label: "tabulated".into(), kind: MaterialKind::Tabulated(table), relaxed: false }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> &MaterialKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn eps(&self, xi: ImaginaryFrequency) -> ResponseValue {
        self.kind.eps(xi.get())
    }

    pub fn mu(&self, xi: ImaginaryFrequency) -> ResponseValue {
        self.kind.mu(xi.get())
    }

    /// `Some(UNPHYSICAL_FLAG)` for frequency-independent models.
    pub fn unphysical_flag(&self) -> Option<&'static str> {
        match self.kind {
            MaterialKind::ConstantEpsMu { .. }
            | MaterialKind::PerfectConductor
            | MaterialKind::InfinitelyPermeable => Some(UNPHYSICAL_FLAG),
            _ => None,
        }
    }

    pub fn is_dispersive(&self) -> bool {
        self.unphysical_flag().is_none()
    }

    /// True when `μ ≡ 1`.
    pub fn is_electric_only(&self) -> bool {
        match &self.kind {
            MaterialKind::InfinitelyPermeable | MaterialKind::DebyeMagnetic { .. } => false,
            MaterialKind::ConstantEpsMu { mu, .. } => *mu == 1.0,
            _ => true,
        }
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self.kind, MaterialKind::ConstantEpsMu { eps, mu } if eps == 1.0 && mu == 1.0)
    }

    pub fn is_relaxed(&self) -> bool {
        self.relaxed
    }

    /// Resonance, damping and band-edge frequencies (rad/s) where the
    /// response changes character. Empty for constant models.
    pub fn characteristic_frequencies(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.kind.characteristic_frequencies(&mut out);
        out
    }
}

/// `ε(iξ)` with domain checking on `ξ`.
pub fn eval_eps(model: &MaterialResponse, xi: f64) -> Result<ResponseValue> {
    Ok(model.eps(ImaginaryFrequency::new(xi)?))
}

/// `μ(iξ)` with domain checking on `ξ`.
pub fn eval_mu(model: &MaterialResponse, xi: f64) -> Result<ResponseValue> {
    Ok(model.mu(ImaginaryFrequency::new(xi)?))
}

/// Kramers-Kronig continuation of tabulated absorption to `ε(iξ)`.
pub fn kramers_kronig(table: &TabulatedAbsorption, xi: f64, tol: f64) -> Result<KkEstimate> {
    table.kramers_kronig(xi, tol)
}
