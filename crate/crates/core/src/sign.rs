//! Force-sign classification and sweeps over material parameter space.
//!
//! Constant-`ε, μ` sweeps reproduce the frequency-independent regime (every
//! row carries the unphysical flag); [`dispersion_restores_attraction`]
//! checks the opposite regime, where all models are genuinely dispersive.

use std::io::{self, Write};

use serde::Serialize;

use crate::engine::{pressure, GapConfig, QuadratureConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::material::{MaterialKind, MaterialResponse, UNPHYSICAL_FLAG};

/// Lower bound of the default Indeterminate band, Pa.
pub const MIN_THRESHOLD: f64 = 1e-12;

/// Relative resolution of located sign boundaries.
pub const BOUNDARY_RESOLUTION: f64 = 1e-3;

/// Highest magnetic relaxation frequency treated as a known material, rad/s.
/// Debye models above it are evaluated but never asserted.
pub const REALISTIC_MAGNETIC_CUTOFF: f64 = 1e11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    Attractive,
    Repulsive,
    Indeterminate,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Attractive => "Attractive",
            Verdict::Repulsive => "Repulsive",
            Verdict::Indeterminate => "Indeterminate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignVerdict {
    pub verdict: Verdict,
    /// Pa
    pub pressure: f64,
    pub error_estimate: f64,
    /// Half-width of the Indeterminate band, Pa.
    pub threshold: f64,
}

impl SignVerdict {
    fn from_pressure(pressure: f64, error_estimate: f64, threshold: f64) -> Self {
        let verdict = if pressure < -threshold {
            Verdict::Attractive
        } else if pressure > threshold {
            Verdict::Repulsive
        } else {
            Verdict::Indeterminate
        };
        Self { verdict, pressure, error_estimate, threshold }
    }
}

/// `max(10 × error, 1e-12 Pa)`.
pub fn default_threshold(error_estimate: f64) -> f64 {
    (10.0 * error_estimate).max(MIN_THRESHOLD)
}

/// Classifies the force sign. With `threshold = None` the default band is
/// used. A non-converged pressure is still classified from its best estimate
/// as long as the threshold out-resolves the reported error.
pub fn classify(cfg: &GapConfig, quad: &QuadratureConfig, threshold: Option<f64>) -> Result<SignVerdict> {
    let (p, err) = match pressure(cfg, quad) {
        Ok(p) => (p.value, p.error_estimate),
        Err(Error::Convergence { value, error_estimate, .. }) => (value, error_estimate),
        Err(e) => return Err(e),
    };
    let threshold = match threshold {
        None => default_threshold(err),
        Some(t) if !(t >= err) => return Err(Error::Inconclusive { threshold: t, error_estimate: err }),
        Some(t) => t,
    };
    Ok(SignVerdict::from_pressure(p, err, threshold))
}

/// Constant material pair. `eps = ∞` stands for a perfect conductor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImpedancePoint {
    pub eps1: f64,
    pub mu1: f64,
    pub eps2: f64,
    pub mu2: f64,
}

fn constant_body(eps: f64, mu: f64, relaxed: bool) -> Result<MaterialResponse> {
    if eps == f64::INFINITY {
        Ok(MaterialResponse::perfect_conductor())
    } else if relaxed {
        MaterialResponse::constant_relaxed(eps, mu)
    } else {
        MaterialResponse::constant(eps, mu)
    }
}

impl ImpedancePoint {
    pub fn new(eps1: f64, mu1: f64, eps2: f64, mu2: f64) -> Self {
        Self { eps1, mu1, eps2, mu2 }
    }

    /// `√(μ₁/ε₁)`; zero for a perfect conductor.
    pub fn z1(&self) -> f64 {
        (self.mu1 / self.eps1).sqrt()
    }

    pub fn z2(&self) -> f64 {
        (self.mu2 / self.eps2).sqrt()
    }

    pub fn swapped(&self) -> Self {
        Self { eps1: self.eps2, mu1: self.mu2, eps2: self.eps1, mu2: self.mu1 }
    }

    fn gap(&self, a: f64, relaxed: bool) -> Result<GapConfig> {
        GapConfig::new(
            a,
            constant_body(self.eps1, self.mu1, relaxed)?,
            constant_body(self.eps2, self.mu2, relaxed)?,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignRow {
    pub point: ImpedancePoint,
    pub z1: f64,
    pub z2: f64,
    pub verdict: SignVerdict,
    pub unphysical: bool,
}

/// A sign change between two neighbouring grid points, located by bisection
/// in the logarithm of one coordinate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Boundary {
    pub axis: &'static str,
    /// Grid coordinates with the bisected axis set to the boundary location.
    pub coordinates: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    pub location: f64,
    pub point: ImpedancePoint,
    pub below: Verdict,
    pub above: Verdict,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct VerdictCounts {
    pub attractive: usize,
    pub repulsive: usize,
    pub indeterminate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignMap {
    pub separation: f64,
    pub axes: Vec<&'static str>,
    pub rows: Vec<SignRow>,
    pub boundaries: Vec<Boundary>,
    pub counts: VerdictCounts,
    pub assumptions: Vec<String>,
    pub flag: &'static str,
}

#[derive(Serialize)]
pub struct SignMapSummary<'a> {
    pub separation_m: f64,
    pub axes: &'a [&'static str],
    pub points: usize,
    pub counts: VerdictCounts,
    pub boundaries: &'a [Boundary],
    pub assumptions: &'a [String],
    pub flag: &'static str,
}

impl SignMap {
    pub const CSV_HEADER: &'static str = "eps1,mu1,eps2,mu2,z1,z2,pressure_Pa,error_Pa,verdict,unphysical";

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            let p = r.point;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                sci(p.eps1),
                sci(p.mu1),
                sci(p.eps2),
                sci(p.mu2),
                sci(r.z1),
                sci(r.z2),
                sci(r.verdict.pressure),
                sci(r.verdict.error_estimate),
                r.verdict.verdict,
                if r.unphysical { UNPHYSICAL_FLAG } else { "" }
            )?;
        }
        Ok(())
    }

    pub fn summary(&self) -> SignMapSummary<'_> {
        SignMapSummary {
            separation_m: self.separation,
            axes: &self.axes,
            points: self.rows.len(),
            counts: self.counts,
            boundaries: &self.boundaries,
            assumptions: &self.assumptions,
            flag: self.flag,
        }
    }

    /// True when every boundary point, with the two materials exchanged,
    /// is also a boundary point of `other` and vice versa.
    pub fn mirrors(&self, other: &SignMap) -> bool {
        let contains = |set: &[Boundary], p: ImpedancePoint| set.iter().any(|b| same_point(b.point, p));
        self.boundaries.len() == other.boundaries.len()
            && self.boundaries.iter().all(|b| contains(&other.boundaries, b.point.swapped()))
            && other.boundaries.iter().all(|b| contains(&self.boundaries, b.point.swapped()))
    }

    pub fn verdict_at(&self, point: ImpedancePoint) -> Option<Verdict> {
        self.rows
            .iter()
            .find(|r| same_point(r.point, point))
            .map(|r| r.verdict.verdict)
    }
}

fn same_point(p: ImpedancePoint, q: ImpedancePoint) -> bool {
    let close = |a: f64, b: f64| a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    close(p.eps1, q.eps1) && close(p.mu1, q.mu1) && close(p.eps2, q.eps2) && close(p.mu2, q.mu2)
}

/// Full-precision scientific notation (17 significant digits).
pub fn sci(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            // Base 10 keeps whole decades exact.
            let (l, h) = (lo.log10(), hi.log10());
            (0..n)
                .map(|i| match i {
                    0 => lo,
                    i if i == n - 1 => hi,
                    i => 10f64.powf(l + (h - l) * i as f64 / (n - 1) as f64),
                })
                .collect()
        }
    }
}

/// Cartesian grid of constant-`ε, μ` pairs. An `eps2` entry of `∞` puts a
/// perfect conductor on side 2 (and likewise for `eps1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SignGrid {
    pub eps1: Vec<f64>,
    pub mu1: Vec<f64>,
    pub eps2: Vec<f64>,
    pub mu2: Vec<f64>,
}

impl SignGrid {
    /// Conductor on side 2, `(ε₁, μ₁)` swept.
    pub fn against_conductor(eps1: Vec<f64>, mu1: Vec<f64>) -> Self {
        Self { eps1, mu1, eps2: vec![f64::INFINITY], mu2: vec![1.0] }
    }

    pub fn swapped(&self) -> Self {
        Self { eps1: self.eps2.clone(), mu1: self.mu2.clone(), eps2: self.eps1.clone(), mu2: self.mu1.clone() }
    }

    fn validate(&self) -> Result<()> {
        for (name, axis) in [("eps1", &self.eps1), ("mu1", &self.mu1), ("eps2", &self.eps2), ("mu2", &self.mu2)] {
            if axis.is_empty() {
                return Err(Error::Precondition(format!("sign map axis {name} is empty")));
            }
            if let Some(v) = axis.iter().find(|v| !(**v >= 1.0) || v.is_nan()) {
                return Err(Error::Precondition(format!("sign map axis {name} has value {v} < 1")));
            }
        }
        Ok(())
    }
}

/// Grid in abstract coordinates mapped onto material pairs.
struct Family<'a> {
    axes: Vec<(&'static str, Vec<f64>)>,
    to_point: &'a (dyn Fn(&[f64]) -> ImpedancePoint + Sync),
    relaxed: bool,
}

impl Family<'_> {
    fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|(_, v)| v.len()).collect()
    }

    fn coordinates(&self, mut flat: usize) -> Vec<f64> {
        let shape = self.shape();
        let mut idx = vec![0; shape.len()];
        for d in (0..shape.len()).rev() {
            idx[d] = flat % shape[d];
            flat /= shape[d];
        }
        idx.iter().zip(&self.axes).map(|(&i, (_, v))| v[i]).collect()
    }

    fn evaluate(&self, coords: &[f64], a: f64, quad: &QuadratureConfig, threshold: Option<f64>) -> Result<SignRow> {
        let point = (self.to_point)(coords);
        let verdict = classify(&point.gap(a, self.relaxed)?, quad, threshold)?;
        Ok(SignRow { point, z1: point.z1(), z2: point.z2(), verdict, unphysical: true })
    }

    fn run(
        &self,
        a: f64,
        quad: &QuadratureConfig,
        threshold: Option<f64>,
        assumptions: Vec<String>,
    ) -> Result<SignMap> {
        let total: usize = self.shape().iter().product();
        if total == 0 {
            return Err(Error::Precondition("sign map grid is empty".into()));
        }
        // Points fan out; each pressure integral runs sequentially inside.
        let inner = quad.with_execution(Execution::Sequential);
        let flat: Vec<usize> = (0..total).collect();
        let rows: Vec<SignRow> = quad
            .execution
            .map(&flat, |&i| self.evaluate(&self.coordinates(i), a, &inner, threshold))
            .into_iter()
            .collect::<Result<_>>()?;

        let mut counts = VerdictCounts::default();
        for r in &rows {
            match r.verdict.verdict {
                Verdict::Attractive => counts.attractive += 1,
                Verdict::Repulsive => counts.repulsive += 1,
                Verdict::Indeterminate => counts.indeterminate += 1,
            }
        }

        let shape = self.shape();
        let mut jobs = Vec::new();
        for (d, (_, values)) in self.axes.iter().enumerate() {
            let stride: usize = shape[d + 1..].iter().product();
            for i in 0..total {
                let pos = (i / stride) % shape[d];
                if pos + 1 >= values.len() {
                    continue;
                }
                let (lo, hi) = (&rows[i], &rows[i + stride]);
                let flip = matches!(
                    (lo.verdict.verdict, hi.verdict.verdict),
                    (Verdict::Attractive, Verdict::Repulsive) | (Verdict::Repulsive, Verdict::Attractive)
                );
                if flip {
                    jobs.push((d, i, lo.verdict.verdict, hi.verdict.verdict));
                }
            }
        }
        let boundaries = quad
            .execution
            .map(&jobs, |&(d, i, below, above)| self.bisect(d, i, below, above, a, &inner))
            .into_iter()
            .collect::<Result<_>>()?;

        Ok(SignMap {
            separation: a,
            axes: self.axes.iter().map(|(n, _)| *n).collect(),
            rows,
            boundaries,
            counts,
            assumptions,
            flag: UNPHYSICAL_FLAG,
        })
    }

    fn bisect(
        &self,
        d: usize,
        flat: usize,
        below: Verdict,
        above: Verdict,
        a: f64,
        quad: &QuadratureConfig,
    ) -> Result<Boundary> {
        let mut coords = self.coordinates(flat);
        let values = &self.axes[d].1;
        let pos = values.iter().position(|&v| v == coords[d]).expect("coordinate on axis");
        let (lower, upper) = (values[pos], values[pos + 1]);
        let (mut lo, mut hi) = (lower, upper);
        let sign_lo = below == Verdict::Repulsive;
        while hi / lo - 1.0 > BOUNDARY_RESOLUTION {
            let mid = (lo * hi).sqrt();
            coords[d] = mid;
            let p = (self.to_point)(&coords);
            let v = match pressure(&p.gap(a, self.relaxed)?, quad) {
                Ok(r) => r.value,
                Err(Error::Convergence { value, .. }) => value,
                Err(e) => return Err(e),
            };
            if (v > 0.0) == sign_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let location = (lo * hi).sqrt();
        coords[d] = location;
        let point = (self.to_point)(&coords);
        Ok(Boundary { axis: self.axes[d].0, coordinates: coords, lower, upper, location, point, below, above })
    }
}

/// Sign map over a constant-`ε, μ` grid at separation `a`.
pub fn sign_map(grid: &SignGrid, a: f64, quad: &QuadratureConfig, threshold: Option<f64>) -> Result<SignMap> {
    grid.validate()?;
    let to_point = |c: &[f64]| ImpedancePoint::new(c[0], c[1], c[2], c[3]);
    let family = Family {
        axes: vec![
            ("eps1", grid.eps1.clone()),
            ("mu1", grid.mu1.clone()),
            ("eps2", grid.eps2.clone()),
            ("mu2", grid.mu2.clone()),
        ],
        to_point: &to_point,
        relaxed: false,
    };
    family.run(a, quad, threshold, vec![format!("{UNPHYSICAL_FLAG}: eps and mu independent of frequency")])
}

/// How "uniform velocity of light" constrains the two media.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UvlMode {
    /// `ε₁μ₁ = ε₂μ₂ = μ₁μ₂`, i.e. `ε₁ = μ₂`, `ε₂ = μ₁`: same light speed in
    /// both media, vacuum recovered at `μ₁ = μ₂ = 1`.
    #[default]
    CommonIndex,
    /// `ε_jμ_j = 1`: same light speed as the vacuum gap (`ε_j = 1/μ_j`).
    VacuumIndex,
}

impl UvlMode {
    fn assumption(self) -> &'static str {
        match self {
            UvlMode::CommonIndex => {
                "uniform velocity of light interpreted as eps1*mu1 = eps2*mu2 (= mu1*mu2): eps1 = mu2, eps2 = mu1"
            }
            UvlMode::VacuumIndex => {
                "uniform velocity of light interpreted as eps_j*mu_j = 1 (vacuum index): eps_j = 1/mu_j"
            }
        }
    }

    pub fn point(self, mu1: f64, mu2: f64) -> ImpedancePoint {
        match self {
            UvlMode::CommonIndex => ImpedancePoint::new(mu2, mu1, mu1, mu2),
            UvlMode::VacuumIndex => ImpedancePoint::new(1.0 / mu1, mu1, 1.0 / mu2, mu2),
        }
    }
}

/// Sign map over `(μ₁, μ₂)` within the uniform-velocity-of-light family.
pub fn uvl_map(
    mu1: &[f64],
    mu2: &[f64],
    mode: UvlMode,
    a: f64,
    quad: &QuadratureConfig,
    threshold: Option<f64>,
) -> Result<SignMap> {
    for (name, axis) in [("mu1", mu1), ("mu2", mu2)] {
        if axis.is_empty() {
            return Err(Error::Precondition(format!("uvl map axis {name} is empty")));
        }
        if let Some(v) = axis.iter().find(|v| !(**v >= 1.0)) {
            return Err(Error::Precondition(format!("uvl map axis {name} has value {v} < 1")));
        }
    }
    let to_point = move |c: &[f64]| mode.point(c[0], c[1]);
    let family = Family {
        axes: vec![("mu1", mu1.to_vec()), ("mu2", mu2.to_vec())],
        to_point: &to_point,
        relaxed: mode == UvlMode::VacuumIndex,
    };
    family.run(
        a,
        quad,
        threshold,
        vec![
            format!("{UNPHYSICAL_FLAG}: eps and mu independent of frequency"),
            mode.assumption().to_string(),
        ],
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractionRow {
    pub material1: String,
    pub material2: String,
    pub separation: f64,
    pub verdict: SignVerdict,
    /// False for pairs involving a hypothetical material; recorded only.
    pub asserted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractionReport {
    pub rows: Vec<AttractionRow>,
    pub counterexamples: Vec<AttractionRow>,
    /// Non-attractive verdicts from pairs that are recorded but not asserted.
    pub exploratory: Vec<AttractionRow>,
}

impl AttractionReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Debye magnetic response faster than any known material.
pub fn is_hypothetical(model: &MaterialResponse) -> bool {
    matches!(model.kind(), MaterialKind::DebyeMagnetic { omega_m, .. } if *omega_m > REALISTIC_MAGNETIC_CUTOFF)
}

/// Pairs every model with every other (and itself) at every separation and
/// records a counterexample for each non-attractive verdict.
pub fn dispersion_restores_attraction(
    models: &[MaterialResponse],
    separations: &[f64],
    quad: &QuadratureConfig,
) -> Result<AttractionReport> {
    if models.is_empty() || separations.is_empty() {
        return Err(Error::Precondition("need at least one model and one separation".into()));
    }
    if let Some(m) = models.iter().find(|m| !m.is_dispersive()) {
        return Err(Error::Precondition(format!(
            "model '{}' is non-dispersive; use sign_map for the non-dispersive regime",
            m.label()
        )));
    }
    let mut jobs = Vec::new();
    for i in 0..models.len() {
        for j in i..models.len() {
            for &a in separations {
                jobs.push((i, j, a));
            }
        }
    }
    let inner = quad.with_execution(Execution::Sequential);
    let rows: Vec<AttractionRow> = quad
        .execution
        .map(&jobs, |&(i, j, a)| {
            let cfg = GapConfig::new(a, models[i].clone(), models[j].clone())?;
            Ok(AttractionRow {
                material1: models[i].label().to_string(),
                material2: models[j].label().to_string(),
                separation: a,
                verdict: classify(&cfg, &inner, None)?,
                asserted: !is_hypothetical(&models[i]) && !is_hypothetical(&models[j]),
            })
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let not_attractive = |r: &&AttractionRow| r.verdict.verdict != Verdict::Attractive;
    let counterexamples = rows.iter().filter(|r| r.asserted).filter(not_attractive).cloned().collect();
    let exploratory = rows.iter().filter(|r| !r.asserted).filter(not_attractive).cloned().collect();
    Ok(AttractionReport { rows, counterexamples, exploratory })
}
