//! Material lookup: built-in names or JSON model files.

use std::fs;
use std::path::Path;

use casimir_core::material::{TabulatedAbsorption, TailConfig};
use casimir_core::MaterialResponse;

use crate::CliError;

pub const BUILTINS: &str = "pc, vacuum, pmc";

pub fn resolve(spec: &str) -> Result<MaterialResponse, CliError> {
    match spec {
        "pc" | "perfect_conductor" => return Ok(MaterialResponse::perfect_conductor()),
        "vacuum" => return Ok(MaterialResponse::vacuum()),
        "pmc" | "infinitely_permeable" => return Ok(MaterialResponse::infinitely_permeable()),
        _ => {}
    }
    let text = fs::read_to_string(spec).map_err(|e| {
        CliError::Input(format!("cannot read material '{spec}' ({e}); built-in names are {BUILTINS}"))
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("material file '{spec}': {e}")))
}

/// Reads an absorption table (`omega_rad_s,eps_imag`) and its tail sidecar.
/// Without an explicit sidecar, `<stem>.json` next to the table is used if present.
pub fn read_table(path: &Path, sidecar: Option<&Path>) -> Result<TabulatedAbsorption, CliError> {
    let input = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| input(e.to_string()))?;
    let headers = reader.headers().map_err(|e| input(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["omega_rad_s", "eps_imag"] {
        return Err(input(format!("expected header 'omega_rad_s,eps_imag', found '{}'", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| input(e.to_string()))?;
        let field = |j: usize| -> Result<f64, CliError> {
            record[j].parse().map_err(|_| input(format!("row {}: '{}' is not a number", i + 1, &record[j])))
        };
        samples.push((field(0)?, field(1)?));
    }

    let default_sidecar = path.with_extension("json");
    let sidecar = match sidecar {
        Some(p) => Some(p.to_path_buf()),
        None if default_sidecar.is_file() => Some(default_sidecar),
        None => None,
    };
    let tails = match sidecar {
        Some(p) => {
            let text = fs::read_to_string(&p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<TailConfig>(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?
        }
        None => TailConfig::default(),
    };
    Ok(TabulatedAbsorption::new(samples, tails)?)
}
