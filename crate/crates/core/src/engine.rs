//! Zero-temperature Lifshitz energy and pressure between two half-spaces.
//!
//! With `κ₀ = √(k² + ξ²/c²)` and the substitutions `y = 2κ₀a`, `x = 2aξ/c`:
//!
//! ```text
//! E(a) = (ħ/4π²) ∫dξ ∫k dk Σₚ ln(1 − r₁ᵖr₂ᵖ e^{−2κ₀a})
//!      = ħc/(32π²a³) ∫₀^∞ dx ∫ₓ^∞ y dy Σₚ ln(1 − Rₚ e^{−y})
//! P(a) = −∂E/∂a
//!      = −ħc/(32π²a⁴) ∫₀^∞ dx ∫ₓ^∞ y² dy Σₚ Rₚ/(e^{y} − Rₚ)
//! ```
//!
//! Negative values mean attraction. Both axes use adaptive Gauss-Kronrod;
//! the inner error estimates are carried into the outer one.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::constants::{C, HBAR};
use crate::error::{Error, Quantity, Result};
use crate::exec::Execution;
use crate::material::{ImaginaryFrequency, MaterialResponse, ResponseValue};
use crate::quadrature::{integrate, Estimate, Tolerance};

/// Separations below this get a continuum-model warning, m.
pub const CONTINUUM_WARNING_GAP: f64 = 1e-9;

/// Integration variables: imaginary frequency and transverse wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraturePoint {
    xi: ImaginaryFrequency,
    k: f64,
}

impl QuadraturePoint {
    /// `xi` in rad/s, `k = √(kx² + ky²)` in 1/m.
    pub fn new(xi: f64, k: f64) -> Result<Self> {
        let xi = ImaginaryFrequency::new(xi)?;
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::Domain(format!("wavenumber must be finite and >= 0, got {k}")));
        }
        Ok(Self { xi, k })
    }

    pub fn xi(&self) -> f64 {
        self.xi.get()
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Vacuum decay constant `κ₀ = √(k² + ξ²/c²)`, 1/m.
    pub fn kappa0(&self) -> f64 {
        self.k.hypot(self.xi.get() / C)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionPair {
    pub r_te: f64,
    pub r_tm: f64,
}

/// Two half-spaces separated by a vacuum gap.
#[derive(Debug, Clone, PartialEq)]
pub struct GapConfig {
    a: f64,
    material1: MaterialResponse,
    material2: MaterialResponse,
}

impl GapConfig {
    pub fn new(a: f64, material1: MaterialResponse, material2: MaterialResponse) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Domain(format!("gap must be positive and finite, got {a}")));
        }
        Ok(Self { a, material1, material2 })
    }

    pub fn separation(&self) -> f64 {
        self.a
    }

    pub fn material1(&self) -> &MaterialResponse {
        &self.material1
    }

    pub fn material2(&self) -> &MaterialResponse {
        &self.material2
    }

    pub fn with_separation(&self, a: f64) -> Result<Self> {
        Self::new(a, self.material1.clone(), self.material2.clone())
    }

    pub fn swapped(&self) -> Self {
        Self { a: self.a, material1: self.material2.clone(), material2: self.material1.clone() }
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.a < CONTINUUM_WARNING_GAP {
            w.push(format!(
                "continuum-model warning: gap {:e} m is below 1 nm where bulk response is questionable",
                self.a
            ));
        }
        w
    }

    /// Unphysical flags of both materials, deduplicated.
    pub fn flags(&self) -> Vec<String> {
        let mut f: Vec<String> = [&self.material1, &self.material2]
            .iter()
            .filter_map(|m| m.unphysical_flag())
            .map(str::to_string)
            .collect();
        f.dedup();
        f
    }

    fn max_characteristic_frequency(&self) -> f64 {
        self.material1
            .characteristic_frequencies()
            .into_iter()
            .chain(self.material2.characteristic_frequencies())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    /// Absolute floor on the error target (J/m² for energy, Pa for pressure).
    pub abs_floor: f64,
    /// Panel budget for each adaptive integration.
    pub max_subdivisions: usize,
    /// Outer cutoff as a multiple of `c/a`.
    pub xi_cutoff_factor: f64,
    /// Upper limit of the dimensionless inner variable `y = 2κ₀a`.
    pub y_cutoff: f64,
    pub execution: Execution,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_floor: 1e-30,
            max_subdivisions: 1000,
            xi_cutoff_factor: 60.0,
            y_cutoff: 80.0,
            execution: Execution::default(),
        }
    }
}

impl QuadratureConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidConfig(format!("rel_tol must lie in (0, 1), got {}", self.rel_tol)));
        }
        if !(self.abs_floor.is_finite() && self.abs_floor >= 0.0) {
            return Err(Error::InvalidConfig(format!("abs_floor must be >= 0, got {}", self.abs_floor)));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidConfig("max_subdivisions must be positive".into()));
        }
        for (n, v) in [("xi_cutoff_factor", self.xi_cutoff_factor), ("y_cutoff", self.y_cutoff)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{n} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyResult {
    /// J/m², negative means binding.
    pub value: f64,
    pub error_estimate: f64,
    /// Peak of the outer integrand in `ln ξ`, rad/s; `None` for a zero integrand.
    pub dominant_xi: Option<f64>,
    pub units: &'static str,
    pub warnings: Vec<String>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureResult {
    /// Pa, negative means attraction.
    pub value: f64,
    pub error_estimate: f64,
    pub units: &'static str,
    pub warnings: Vec<String>,
    pub flags: Vec<String>,
}

/// One half-space's response frozen at a single imaginary frequency.
#[derive(Debug, Clone, Copy)]
enum Mirror {
    Fixed(ReflectionPair),
    Medium { eps: f64, mu: f64 },
    /// `ξ = 0` limit of a conductor; holds `μ·lim(ξ²ε)·s²/c²` for the TE branch.
    StaticConductor { mu: f64, te_shift: f64 },
}

impl Mirror {
    /// Response at `xi`, for wavenumbers measured in units of `1/scale`.
    fn at(material: &MaterialResponse, xi: ImaginaryFrequency, scale: f64) -> Mirror {
        let mu = match material.mu(xi) {
            ResponseValue::Ideal => return Mirror::Fixed(ReflectionPair { r_te: 1.0, r_tm: -1.0 }),
            ResponseValue::Finite(mu) => mu,
            ResponseValue::Divergent { .. } => unreachable!("permeability models are finite"),
        };
        match material.eps(xi) {
            ResponseValue::Ideal => Mirror::Fixed(ReflectionPair { r_te: -1.0, r_tm: 1.0 }),
            ResponseValue::Finite(eps) => Mirror::Medium { eps, mu },
            ResponseValue::Divergent { xi_sq_limit } => Mirror::StaticConductor {
                mu,
                te_shift: mu * xi_sq_limit * (scale / C).powi(2),
            },
        }
    }

    /// Coefficients at scaled decay constant `y = s·κ₀` and frequency `x = s·ξ/c`.
    #[inline]
    fn reflect(&self, y: f64, x: f64) -> ReflectionPair {
        match *self {
            Mirror::Fixed(r) => r,
            Mirror::Medium { eps, mu } => fresnel(eps, mu, y, x),
            Mirror::StaticConductor { mu, te_shift } => {
                let kappa = (y * y + te_shift).sqrt();
                let den = mu * y + kappa;
                let r_te = if den == 0.0 { 0.0 } else { (mu * y - kappa) / den };
                ReflectionPair { r_te, r_tm: 1.0 }
            }
        }
    }
}

/// Vacuum–medium Fresnel coefficients with `κ = √(y² + (εμ−1)x²)`, with the
/// numerators rationalised to avoid cancellation near vacuum.
#[inline]
fn fresnel(eps: f64, mu: f64, y: f64, x: f64) -> ReflectionPair {
    if y == 0.0 {
        return ReflectionPair { r_te: (mu - 1.0) / (mu + 1.0), r_tm: (eps - 1.0) / (eps + 1.0) };
    }
    let d = eps * mu - 1.0;
    let dx2 = d * x * x;
    let y2 = y * y;
    let kappa = (y2 + dx2).sqrt();
    let r_tm = ((eps - 1.0) * (eps + 1.0) * y2 - dx2) / (eps * y + kappa);
    let r_te = ((mu - 1.0) * (mu + 1.0) * y2 - dx2) / (mu * y + kappa);
    // (εy − κ)/(εy + κ) = ((ε²−1)y² − (εμ−1)x²)/(εy + κ)²
    ReflectionPair { r_te: r_te / (mu * y + kappa), r_tm: r_tm / (eps * y + kappa) }
}

/// Vacuum–medium reflection coefficients at one quadrature point.
pub fn reflection(material: &MaterialResponse, point: QuadraturePoint) -> ReflectionPair {
    Mirror::at(material, point.xi, 1.0).reflect(point.kappa0(), point.xi() / C)
}

/// `ln(1 − R e^{−y})` without cancellation for `R e^{−y}` near 0 or near 1.
#[inline]
fn ln_one_minus(r: f64, y: f64) -> f64 {
    let t = r * (-y).exp();
    if t.abs() < 0.5 {
        (-t).ln_1p()
    } else {
        ((1.0 - r) - r * (-y).exp_m1()).ln()
    }
}

/// `R e^{−y}/(1 − R e^{−y}) = R/(e^{y} − R)`.
#[inline]
fn occupation(r: f64, y: f64) -> f64 {
    r / ((1.0 - r) + y.exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kernel {
    Energy,
    Pressure,
}

/// Absolute accuracy floor as a fraction of `rel_tol × envelope`.
const ENVELOPE_FLOOR: f64 = 1e-3;

/// Shared state of one double integral in the dimensionless `(x, y)` variables.
struct LifshitzIntegral<'a> {
    cfg: &'a GapConfig,
    quad: &'a QuadratureConfig,
    kernel: Kernel,
    x_max: f64,
    inner_failures: AtomicUsize,
}

impl<'a> LifshitzIntegral<'a> {
    fn new(cfg: &'a GapConfig, quad: &'a QuadratureConfig, kernel: Kernel) -> Self {
        let a = cfg.a;
        let xi_max = (quad.xi_cutoff_factor * C / a).max(1e3 * cfg.max_characteristic_frequency());
        // The inner range [x, y_cutoff] is empty beyond y_cutoff.
        let x_max = (2.0 * a * xi_max / C).min(quad.y_cutoff);
        Self { cfg, quad, kernel, x_max, inner_failures: AtomicUsize::new(0) }
    }

    fn xi_of(&self, x: f64) -> f64 {
        C * x / (2.0 * self.cfg.a)
    }

    /// Frequencies where the materials change character, in `x` units.
    fn feature_points(&self) -> Vec<f64> {
        let to_x = 2.0 * self.cfg.a / C;
        self.cfg
            .material1
            .characteristic_frequencies()
            .into_iter()
            .chain(self.cfg.material2.characteristic_frequencies())
            .map(|w| w * to_x)
            .collect()
    }

    fn outer_breakpoints(&self) -> Vec<f64> {
        let mut bp = vec![0.0, self.x_max];
        bp.extend([1e-3, 1e-2, 0.1, 0.3, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]);
        bp.extend(self.feature_points());
        tidy(bp, 0.0, self.x_max)
    }

    /// Inner integral over `y ∈ [x, y_cutoff]` at fixed `x`. With `envelope`
    /// the two polarisation terms enter in absolute value.
    fn inner(&self, x: f64, tol: Tolerance, envelope: bool) -> Estimate {
        let xi = ImaginaryFrequency::new(self.xi_of(x)).expect("x is finite and non-negative");
        let scale = 2.0 * self.cfg.a;
        let m1 = Mirror::at(&self.cfg.material1, xi, scale);
        let m2 = Mirror::at(&self.cfg.material2, xi, scale);
        let y_max = self.quad.y_cutoff;

        let mut bp = vec![x, y_max, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
        for m in [&m1, &m2] {
            if let Mirror::Medium { eps, mu } = m {
                let n = (eps * mu).sqrt();
                bp.push(n * x);
            }
        }
        let bp = tidy(bp, x, y_max);

        let kernel = self.kernel;
        let integrand = move |y: f64| {
            let r1 = m1.reflect(y, x);
            let r2 = m2.reflect(y, x);
            let te = r1.r_te * r2.r_te;
            let tm = r1.r_tm * r2.r_tm;
            let (t, m) = match kernel {
                Kernel::Energy => (y * ln_one_minus(te, y), y * ln_one_minus(tm, y)),
                Kernel::Pressure => (y * y * occupation(te, y), y * y * occupation(tm, y)),
            };
            (if envelope { t.abs() + m.abs() } else { t + m }, 0.0)
        };
        let est = integrate(integrand, &bp, tol, self.quad.max_subdivisions, Execution::Sequential);
        if !est.converged && !envelope {
            self.inner_failures.fetch_add(1, Ordering::Relaxed);
        }
        est
    }

    fn prefactor(&self) -> f64 {
        let a = self.cfg.a;
        match self.kernel {
            Kernel::Energy => HBAR * C / (32.0 * PI * PI * a.powi(3)),
            Kernel::Pressure => -HBAR * C / (32.0 * PI * PI * a.powi(4)),
        }
    }

    /// Coarse outer pass at relative accuracy 1e-3 with the given inner rule.
    fn pilot(&self, envelope: bool, abs: f64) -> f64 {
        let tol = Tolerance::relative(1e-3).with_abs(abs.max(f64::MIN_POSITIVE));
        let inner_tol = Tolerance::relative(1e-4).with_abs(1e-4 * abs / self.x_max);
        integrate(
            |x| (self.inner(x, inner_tol, envelope).value, 0.0),
            &self.outer_breakpoints(),
            tol,
            self.quad.max_subdivisions,
            self.quad.execution,
        )
        .value
    }

    /// Error targets `(inner, outer)` in dimensionless units.
    ///
    /// The envelope `∫∫ (|TE term| + |TM term|)` bounds what rounding allows
    /// when the polarisations or frequency bands cancel. The inner rule is
    /// then tightened by the expected cancellation so that its noise stays
    /// below the outer target.
    fn tolerances(&self) -> (Tolerance, Tolerance) {
        let rel = self.quad.rel_tol;
        let envelope = self.pilot(true, 0.0);
        let default_inner = Tolerance::relative(0.1 * rel).with_magnitude_rel(1e-3 * rel);
        if !(envelope > 0.0) {
            return (default_inner.with_abs(f64::MIN_POSITIVE), Tolerance::relative(rel));
        }
        let floor = ENVELOPE_FLOOR * rel * envelope;
        let signed = self.pilot(false, 0.1 * floor);
        let target = (rel * signed.abs()).max(floor);
        let inner = Tolerance::relative((0.1 * target / envelope).max(1e-13))
            .with_abs(0.01 * target / self.x_max);
        let outer = Tolerance::relative(rel).with_abs(floor.max(self.quad.abs_floor / self.prefactor().abs()));
        (inner, outer)
    }

    fn evaluate(&self) -> Result<(f64, f64)> {
        let prefactor = self.prefactor();
        let (inner_tol, outer_tol) = self.tolerances();
        let est = integrate(
            |x| {
                let e = self.inner(x, inner_tol, false);
                (e.value, e.error)
            },
            &self.outer_breakpoints(),
            outer_tol,
            self.quad.max_subdivisions,
            self.quad.execution,
        );
        // `+ 0.0` turns a vanishing integral's `-0` into `0`.
        let value = prefactor * est.value + 0.0;
        let error = prefactor.abs() * est.error;
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite Lifshitz integral ({value}); reflection coefficients left the unit disc"
            )));
        }
        let target = (self.quad.rel_tol * value.abs()).max(prefactor.abs() * outer_tol.abs);
        if error > target {
            let quantity = match self.kernel {
                Kernel::Energy => Quantity::Energy,
                Kernel::Pressure => Quantity::Pressure,
            };
            return Err(Error::Convergence { quantity, value, error_estimate: error });
        }
        Ok((value, error))
    }
}

/// Sorts, removes duplicates and clips breakpoints to `[lo, hi]`.
fn tidy(mut bp: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    bp.retain(|&v| v.is_finite() && v >= lo && v <= hi);
    bp.push(lo);
    bp.push(hi);
    bp.sort_by(f64::total_cmp);
    bp.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
    bp
}

/// Casimir energy per unit area, J/m².
pub fn energy_per_area(cfg: &GapConfig, quad: &QuadratureConfig) -> Result<EnergyResult> {
    quad.validate()?;
    let (value, error_estimate) = LifshitzIntegral::new(cfg, quad, Kernel::Energy).evaluate()?;
    let dominant_xi = match dominant_frequency(cfg, quad) {
        Ok(xi) => Some(xi),
        Err(Error::UndefinedDiagnostic(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(EnergyResult {
        value,
        error_estimate,
        dominant_xi,
        units: "J/m^2",
        warnings: cfg.warnings(),
        flags: cfg.flags(),
    })
}

/// Casimir pressure `−∂E/∂a`, Pa.
pub fn pressure(cfg: &GapConfig, quad: &QuadratureConfig) -> Result<PressureResult> {
    quad.validate()?;
    let (value, error_estimate) = LifshitzIntegral::new(cfg, quad, Kernel::Pressure).evaluate()?;
    Ok(PressureResult {
        value,
        error_estimate,
        units: "Pa",
        warnings: cfg.warnings(),
        flags: cfg.flags(),
    })
}

/// Imaginary frequency (rad/s) at which the energy's outer integrand,
/// taken per unit `ln ξ`, peaks.
pub fn dominant_frequency(cfg: &GapConfig, quad: &QuadratureConfig) -> Result<f64> {
    quad.validate()?;
    let integral = LifshitzIntegral::new(cfg, quad, Kernel::Energy);
    let (inner_tol, _) = integral.tolerances();
    let weight = |ln_x: f64| {
        let x = ln_x.exp();
        x * integral.inner(x, inner_tol, false).value.abs()
    };

    let (lo, hi) = (1e-3f64.ln(), integral.x_max.ln());
    let n = ((hi - lo) / std::f64::consts::LN_10 * 20.0).ceil().max(2.0) as usize;
    let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let values = quad.execution.map(&grid, |&u| weight(u));
    let (best, &peak) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is non-empty");
    if !(peak > 0.0) {
        return Err(Error::UndefinedDiagnostic(
            "outer integrand vanishes everywhere (one side is vacuum)".into(),
        ));
    }

    // Golden-section refinement between the neighbours of the grid maximum.
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(n)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (weight(c), weight(d));
    for _ in 0..40 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = weight(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = weight(d);
        }
        if b - a < 1e-6 {
            break;
        }
    }
    Ok(integral.xi_of((0.5 * (a + b)).exp()))
}
