use std::fs;
use std::io::{self, Write};
use std::path::Path;

use quasi_core::measure::{AtomicMeasure, MeasureWire};
use quasi_core::pointset::{PointSet, PointSetWire};
use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// Writes every float with 17 significant digits so output is byte-stable
/// and round-trips exactly.
struct Fixed17;

impl serde_json::ser::Formatter for Fixed17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17);
    value.serialize(&mut ser).map_err(|e| CliError::Io(e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

pub fn emit<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), CliError> {
    let bytes = to_json(value)?;
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => io::stdout().write_all(&bytes).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

pub fn read_file<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_value(read_json(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

/// Accepts a bare measure or point set, or a tool output carrying one under
/// `measure` / `pointset`. Point sets become counting measures.
pub fn load_measure(path: &Path) -> Result<AtomicMeasure, CliError> {
    let name = path.display().to_string();
    let v = read_json(path)?;
    let bad = |e: &dyn std::fmt::Display| CliError::Invalid(format!("{name}: {e}"));
    let v = v.get("measure").or_else(|| v.get("pointset")).cloned().unwrap_or(v);
    if v.get("atoms").is_some() {
        let w: MeasureWire = serde_json::from_value(v).map_err(|e| bad(&e))?;
        return AtomicMeasure::from_wire(&w, &name).map_err(|e| bad(&e));
    }
    if v.get("points").is_some() {
        let w: PointSetWire = serde_json::from_value(v).map_err(|e| bad(&e))?;
        return Ok(AtomicMeasure::counting(PointSet::from_wire(&w, &name).map_err(|e| bad(&e))?));
    }
    Err(CliError::Invalid(format!("{name}: neither a measure nor a point set")))
}

pub fn load_pointset(path: &Path) -> Result<PointSet, CliError> {
    Ok(load_measure(path)?.support().clone())
}

pub fn floats(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("not a number: `{t}`"))))
        .collect()
}
