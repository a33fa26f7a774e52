use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use linepack_core::domain::{m_to_km, pa_to_table_unit};
use linepack_core::PressureField;

use crate::config::ScenarioFile;
use crate::error::{CliError, CliResult};

/// Six significant digits, shortest round-trip rendering of the rounded value.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{v:.5e}")
        .parse()
        .expect("scientific literal parses");
    format!("{rounded}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PressureUnit {
    /// 10⁻² MPa, the table unit.
    Table,
    Pascal,
}

/// `x_km` then one column per time offset since `t1`; one row per position.
pub fn field_csv(field: &PressureField, t1: f64, unit: PressureUnit) -> String {
    let mut out = String::from("x_km");
    for t in &field.ts {
        let _ = write!(out, ",{}", sig6(t - t1));
    }
    out.push('\n');
    for (ix, x) in field.xs.iter().enumerate() {
        out.push_str(&sig6(m_to_km(*x)));
        for it in 0..field.ts.len() {
            let p = field.get(ix, it);
            let v = match unit {
                PressureUnit::Table => pa_to_table_unit(p),
                PressureUnit::Pascal => p,
            };
            let _ = write!(out, ",{}", sig6(v));
        }
        out.push('\n');
    }
    out
}

/// Writes through a sibling temporary file and renames it into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::io(path, e)
    })
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serialises");
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub si: bool,
    /// SHA-256 of the canonical JSON form of `config`.
    pub input_sha256: String,
    pub outputs: Vec<String>,
    pub config: &'a ScenarioFile,
}

pub fn config_digest(file: &ScenarioFile) -> String {
    let canonical = serde_json::to_vec(file).expect("config serialises");
    hex::encode(Sha256::digest(canonical))
}

#[cfg(test)]
mod tests {
    use super::*;
    use linepack_core::FieldSource;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(18.13456789), "18.1346");
        assert_eq!(sig6(181345.6789), "181346");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(600.0), "600");
        assert_eq!(sig6(14.5), "14.5");
    }

    #[test]
    fn csv_is_x_major_with_offset_headers() {
        let f = PressureField::new(
            None,
            vec![0.0, 5_000.0],
            vec![300.0, 360.0],
            vec![1.336e5, 1.413e5, 1.282e5, 1.322e5],
            FieldSource::Analytic,
        )
        .unwrap();
        let csv = field_csv(&f, 300.0, PressureUnit::Table);
        assert_eq!(csv, "x_km,0,60\n0,13.36,14.13\n5,12.82,13.22\n");
    }

    #[test]
    fn atomic_write_leaves_no_temporary() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.txt");
        atomic_write(&path, b"hello").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "hello");
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(names.len(), 1);
    }
}
