//! JSON/CSV emission with full-precision floats and run manifests.

use std::collections::BTreeMap;
use std::io::{self, Write};

use casimir_core::constants::CONSTANTS_VERSION;
use casimir_core::MaterialResponse;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

pub use casimir_core::sign::sci;

/// Pretty JSON, but every float printed with 17 significant digits.
struct SciFormatter(PrettyFormatter<'static>);

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{}", sci(v))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write!(w, "{}", sci(v as f64))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory JSON serialisation");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Single-line form, used for the CSV manifest comment.
pub fn to_json_line<T: Serialize>(value: &T) -> String {
    to_json(value).lines().map(str::trim_start).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Param {
    Number(f64),
    Count(usize),
    Text(String),
    Numbers(Vec<f64>),
    Texts(Vec<String>),
}

#[derive(Debug, Clone, Serialize)]
pub struct MaterialDigest {
    pub role: String,
    pub label: String,
    pub kind: &'static str,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: &'static str,
    pub parameters: BTreeMap<&'static str, Param>,
    pub materials: Vec<MaterialDigest>,
    pub constants_version: &'static str,
    pub tool_version: &'static str,
    pub timestamp: String,
}

impl Manifest {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            parameters: BTreeMap::new(),
            materials: Vec::new(),
            constants_version: CONSTANTS_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn param(mut self, name: &'static str, value: Param) -> Self {
        self.parameters.insert(name, value);
        self
    }

    pub fn material(mut self, role: impl Into<String>, m: &MaterialResponse) -> Self {
        self.materials.push(MaterialDigest {
            role: role.into(),
            label: m.label().to_string(),
            kind: m.kind_name(),
            sha256: digest(m),
        });
        self
    }
}

/// SHA-256 of the canonical JSON form of a model.
pub fn digest(m: &MaterialResponse) -> String {
    let canonical = serde_json::to_string(m).expect("material serialises");
    format!("{:x}", Sha256::digest(canonical.as_bytes()))
}

/// CSV preamble: `# manifest {...}` then the header row.
pub fn csv_preamble<W: Write + ?Sized>(w: &mut W, manifest: &Manifest, header: &str) -> io::Result<()> {
    writeln!(w, "# manifest {}", to_json_line(manifest))?;
    writeln!(w, "{header}")
}
