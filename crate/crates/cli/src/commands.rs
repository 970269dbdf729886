use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use casimir_core::pfa::{pfa_force, SpherePlate};
use casimir_core::sign::{
    classify, dispersion_restores_attraction, log_spaced, sign_map, uvl_map, AttractionRow, SignGrid, SignMap,
    UvlMode, Verdict,
};
use casimir_core::{
    dominant_frequency, energy_per_area, kramers_kronig, pressure, Error, Execution, GapConfig, MaterialResponse,
    QuadratureConfig,
};
use serde::Serialize;

use crate::output::{csv_preamble, sci, to_json, Manifest, Param};
use crate::{materials, CliError};

/// Outcome of a command: exit code 0 or 3 once output has been written.
pub enum Status {
    Ok,
    NotConverged,
    CheckFailed,
}

#[derive(Serialize)]
struct QuantityDoc<'a> {
    quantity: &'static str,
    value: f64,
    error_estimate: f64,
    units: &'static str,
    converged: bool,
    dominant_xi: Option<f64>,
    verdict: Verdict,
    #[serde(rename = "pressure_Pa")]
    pressure: f64,
    #[serde(rename = "threshold_Pa")]
    threshold: f64,
    warnings: Vec<String>,
    flags: Vec<String>,
    manifest: &'a Manifest,
}

struct Computation {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
}

fn best_estimate<T>(r: casimir_core::Result<T>, f: impl FnOnce(T) -> (f64, f64)) -> Result<Computation, CliError> {
    match r {
        Ok(v) => {
            let (value, error_estimate) = f(v);
            Ok(Computation { value, error_estimate, converged: true })
        }
        Err(Error::Convergence { value, error_estimate, .. }) => {
            Ok(Computation { value, error_estimate, converged: false })
        }
        Err(e) => Err(e.into()),
    }
}

fn gap_manifest(command: &'static str, cfg: &GapConfig, quad: &QuadratureConfig) -> Manifest {
    Manifest::new(command)
        .param("gap_m", Param::Number(cfg.separation()))
        .param("rel_tol", Param::Number(quad.rel_tol))
        .param("max_subdivisions", Param::Count(quad.max_subdivisions))
        .material("material1", cfg.material1())
        .material("material2", cfg.material2())
}

pub fn quantity(
    energy: bool,
    m1: &str,
    m2: &str,
    gap: f64,
    quad: &QuadratureConfig,
    csv: bool,
    out: &mut dyn Write,
) -> Result<Status, CliError> {
    let cfg = GapConfig::new(gap, materials::resolve(m1)?, materials::resolve(m2)?)?;
    let (name, units, result) = if energy {
        ("energy", "J/m^2", best_estimate(energy_per_area(&cfg, quad), |e| (e.value, e.error_estimate))?)
    } else {
        ("pressure", "Pa", best_estimate(pressure(&cfg, quad), |p| (p.value, p.error_estimate))?)
    };
    let dominant_xi = match dominant_frequency(&cfg, quad) {
        Ok(xi) => Some(xi),
        Err(Error::UndefinedDiagnostic(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let verdict = classify(&cfg, quad, None)?;
    let manifest = gap_manifest(name, &cfg, quad);
    if csv {
        csv_preamble(
            out,
            &manifest,
            "quantity,value,error_estimate,units,converged,dominant_xi_rad_s,verdict,pressure_Pa,threshold_Pa",
        )?;
        writeln!(
            out,
            "{name},{},{},{units},{},{},{},{},{}",
            sci(result.value),
            sci(result.error_estimate),
            result.converged,
            dominant_xi.map(sci).unwrap_or_default(),
            verdict.verdict,
            sci(verdict.pressure),
            sci(verdict.threshold),
        )?;
    } else {
        let doc = QuantityDoc {
            quantity: name,
            value: result.value,
            error_estimate: result.error_estimate,
            units,
            converged: result.converged,
            dominant_xi,
            verdict: verdict.verdict,
            pressure: verdict.pressure,
            threshold: verdict.threshold,
            warnings: cfg.warnings(),
            flags: cfg.flags(),
            manifest: &manifest,
        };
        writeln!(out, "{}", to_json(&doc))?;
    }
    Ok(if result.converged { Status::Ok } else { Status::NotConverged })
}

pub fn sweep(
    m1: &str,
    m2: &str,
    from: f64,
    to: f64,
    points: usize,
    quad: &QuadratureConfig,
    out: &mut dyn Write,
) -> Result<Status, CliError> {
    if !(from > 0.0 && to >= from && points > 0) {
        return Err(CliError::Input(format!("sweep needs 0 < from <= to and points > 0, got {from}..{to} x {points}")));
    }
    let (m1, m2) = (materials::resolve(m1)?, materials::resolve(m2)?);
    let gaps = log_spaced(from, to, points);
    let inner = quad.with_execution(Execution::Sequential);
    let rows = quad.execution.map(&gaps, |&a| -> Result<_, CliError> {
        let cfg = GapConfig::new(a, m1.clone(), m2.clone())?;
        let e = best_estimate(energy_per_area(&cfg, &inner), |e| (e.value, e.error_estimate))?;
        let p = best_estimate(pressure(&cfg, &inner), |p| (p.value, p.error_estimate))?;
        let v = classify(&cfg, &inner, None)?;
        Ok((a, e, p, v.verdict))
    });
    let manifest = Manifest::new("sweep")
        .param("from_m", Param::Number(from))
        .param("to_m", Param::Number(to))
        .param("points", Param::Count(points))
        .param("rel_tol", Param::Number(quad.rel_tol))
        .param("max_subdivisions", Param::Count(quad.max_subdivisions))
        .material("material1", &m1)
        .material("material2", &m2);
    let mut all_converged = true;
    let mut body = Vec::new();
    for row in rows {
        let (a, e, p, verdict) = row?;
        all_converged &= e.converged && p.converged;
        writeln!(body, "{},{},{},{},{verdict}", sci(a), sci(e.value), sci(p.value), sci(p.error_estimate))?;
    }
    csv_preamble(out, &manifest, "a_m,energy_J_m2,pressure_Pa,error,verdict")?;
    out.write_all(&body)?;
    Ok(if all_converged { Status::Ok } else { Status::NotConverged })
}

fn emit_map(map: &SignMap, manifest: Manifest, summary: Option<&Path>, out: &mut dyn Write) -> Result<Status, CliError> {
    #[derive(Serialize)]
    struct Summary<'a> {
        #[serde(flatten)]
        summary: casimir_core::sign::SignMapSummary<'a>,
        manifest: &'a Manifest,
    }
    writeln!(out, "# manifest {}", crate::output::to_json_line(&manifest))?;
    map.write_csv(&mut *out)?;
    write_summary(&to_json(&Summary { summary: map.summary(), manifest: &manifest }), summary)?;
    Ok(Status::Ok)
}

fn write_summary(json: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, format!("{json}\n")).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => Ok(writeln!(io::stderr(), "{json}")?),
    }
}

pub fn signmap(
    grid: SignGrid,
    gap: f64,
    threshold: Option<f64>,
    quad: &QuadratureConfig,
    summary: Option<&Path>,
    out: &mut dyn Write,
) -> Result<Status, CliError> {
    let map = sign_map(&grid, gap, quad, threshold)?;
    let manifest = Manifest::new("signmap")
        .param("eps1", Param::Numbers(grid.eps1.clone()))
        .param("mu1", Param::Numbers(grid.mu1.clone()))
        .param("eps2", Param::Numbers(grid.eps2.clone()))
        .param("mu2", Param::Numbers(grid.mu2.clone()))
        .param("gap_m", Param::Number(gap))
        .param("threshold_Pa", threshold.map_or(Param::Text("default".into()), Param::Number))
        .param("rel_tol", Param::Number(quad.rel_tol));
    emit_map(&map, manifest, summary, out)
}

#[allow(clippy::too_many_arguments)]
pub fn uvlmap(
    mu1: Vec<f64>,
    mu2: Vec<f64>,
    mode: UvlMode,
    gap: f64,
    threshold: Option<f64>,
    quad: &QuadratureConfig,
    summary: Option<&Path>,
    out: &mut dyn Write,
) -> Result<Status, CliError> {
    let map = uvl_map(&mu1, &mu2, mode, gap, quad, threshold)?;
    let mode_name = match mode {
        UvlMode::CommonIndex => "common-index",
        UvlMode::VacuumIndex => "vacuum-index",
    };
    let manifest = Manifest::new("uvlmap")
        .param("mu1", Param::Numbers(mu1))
        .param("mu2", Param::Numbers(mu2))
        .param("mode", Param::Text(mode_name.into()))
        .param("gap_m", Param::Number(gap))
        .param("threshold_Pa", threshold.map_or(Param::Text("default".into()), Param::Number))
        .param("rel_tol", Param::Number(quad.rel_tol));
    emit_map(&map, manifest, summary, out)
}

pub fn kk(
    table: &Path,
    sidecar: Option<&Path>,
    label: Option<String>,
    rel_tol: f64,
    output: Option<&PathBuf>,
    out: &mut dyn Write,
) -> Result<Status, CliError> {
    let data = materials::read_table(table, sidecar)?;
    let (lo, hi) = data.range();
    // Spot-check the transform across the sampled band.
    let probes = log_spaced(lo.max(hi * 1e-12), hi, 25);
    let mut warnings = Vec::new();
    for xi in probes {
        if let Some(w) = kramers_kronig(&data, xi, rel_tol)?.warning {
            warnings.push(format!("xi = {xi:.3e} rad/s: {w}"));
        }
    }
    let label = label.unwrap_or_else(|| {
        table.file_stem().map_or("tabulated".into(), |s| s.to_string_lossy().into_owned())
    });
    let model = MaterialResponse::tabulated(data).with_label(label);
    let manifest = Manifest::new("kk")
        .param("table", Param::Text(table.display().to_string()))
        .param("samples", Param::Count(match model.kind() {
            casimir_core::MaterialKind::Tabulated(t) => t.len(),
            _ => unreachable!(),
        }))
        .param("rel_tol", Param::Number(rel_tol))
        .param("warnings", Param::Texts(warnings.clone()))
        .material("output", &model);

    #[derive(Serialize)]
    struct Doc<'a> {
        #[serde(flatten)]
        model: &'a MaterialResponse,
        manifest: &'a Manifest,
    }
    let json = to_json(&Doc { model: &model, manifest: &manifest });
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    match output {
        Some(p) => fs::write(p, format!("{json}\n")).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        None => writeln!(out, "{json}")?,
    }
    Ok(Status::Ok)
}

pub fn pfa(
    sphere: &str,
    plate: &str,
    radius: f64,
    gap: f64,
    quad: &QuadratureConfig,
    out: &mut dyn Write,
) -> Result<Status, CliError> {
    let (s, p) = (materials::resolve(sphere)?, materials::resolve(plate)?);
    let geom = SpherePlate::new(radius, gap)?;
    let manifest = Manifest::new("pfa")
        .param("radius_m", Param::Number(radius))
        .param("gap_m", Param::Number(gap))
        .param("rel_tol", Param::Number(quad.rel_tol))
        .material("sphere", &s)
        .material("plate", &p);

    #[derive(Serialize)]
    struct Doc<'a> {
        force: f64,
        error_estimate: f64,
        units: &'static str,
        converged: bool,
        #[serde(rename = "energy_per_area_J_m2")]
        energy_per_area: f64,
        a_over_r: f64,
        verdict: Verdict,
        warnings: Vec<String>,
        flags: Vec<String>,
        manifest: &'a Manifest,
    }
    let scale = 2.0 * std::f64::consts::PI * radius;
    let (force, error_estimate, energy, converged, warnings, flags) = match pfa_force(geom, &s, &p, quad) {
        Ok(f) => (f.force, f.error_estimate, f.energy_per_area, true, f.warnings, f.flags),
        Err(Error::Convergence { value, error_estimate, .. }) => {
            let cfg = GapConfig::new(gap, s.clone(), p.clone())?;
            (scale * value, scale * error_estimate, value, false, cfg.warnings(), cfg.flags())
        }
        Err(e) => return Err(e.into()),
    };
    let verdict = if force < -error_estimate.max(f64::MIN_POSITIVE) {
        Verdict::Attractive
    } else if force > error_estimate.max(f64::MIN_POSITIVE) {
        Verdict::Repulsive
    } else {
        Verdict::Indeterminate
    };
    let doc = Doc {
        force,
        error_estimate,
        units: "N",
        converged,
        energy_per_area: energy,
        a_over_r: geom.aspect(),
        verdict,
        warnings,
        flags,
        manifest: &manifest,
    };
    writeln!(out, "{}", to_json(&doc))?;
    Ok(if converged { Status::Ok } else { Status::NotConverged })
}

pub fn attraction(
    models: &[String],
    from: f64,
    to: f64,
    points: usize,
    quad: &QuadratureConfig,
    summary: Option<&Path>,
    out: &mut dyn Write,
) -> Result<Status, CliError> {
    let resolved = models.iter().map(|m| materials::resolve(m)).collect::<Result<Vec<_>, _>>()?;
    let separations = log_spaced(from, to, points);
    let report = dispersion_restores_attraction(&resolved, &separations, quad)?;
    let mut manifest = Manifest::new("attraction")
        .param("from_m", Param::Number(from))
        .param("to_m", Param::Number(to))
        .param("points", Param::Count(points))
        .param("rel_tol", Param::Number(quad.rel_tol));
    for (i, m) in resolved.iter().enumerate() {
        manifest = manifest.material(format!("model{}", i + 1), m);
    }
    csv_preamble(out, &manifest, "material1,material2,a_m,pressure_Pa,error_Pa,verdict,asserted")?;
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            csv_field(&r.material1),
            csv_field(&r.material2),
            sci(r.separation),
            sci(r.verdict.pressure),
            sci(r.verdict.error_estimate),
            r.verdict.verdict,
            r.asserted
        )?;
    }

    #[derive(Serialize)]
    struct Summary<'a> {
        triples: usize,
        passed: bool,
        counterexamples: &'a [AttractionRow],
        exploratory: &'a [AttractionRow],
        manifest: &'a Manifest,
    }
    let summary_doc = Summary {
        triples: report.rows.len(),
        passed: report.passed(),
        counterexamples: &report.counterexamples,
        exploratory: &report.exploratory,
        manifest: &manifest,
    };
    write_summary(&to_json(&summary_doc), summary)?;
    Ok(if report.passed() { Status::Ok } else { Status::CheckFailed })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
