//! File formats: scattering functions, Verblunsky sequences and reports.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::check::CheckReport;
use crate::circle::{CircleGrid, LaurentSeries, ScatteringFunction};
use crate::error::{Error, Result};
use crate::scattering::RoundtripStep;
use crate::spectral::SpectralDensity;
use crate::verblunsky::{ConvergenceReport, LevelReport, VerblunskySequence};
use crate::C64;

// A flat struct rather than a tagged enum: tagged enums buffer their content,
// which loses the line and column of nested errors.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScatteringFile {
    #[serde(rename = "type")]
    kind: String,
    entries: Option<Vec<(i64, f64, f64)>>,
    grid: Option<usize>,
    values: Option<Vec<(f64, f64)>>,
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn json_err(path: &Path, e: serde_json::Error) -> Error {
    parse_err(
        path,
        format!("line {}, column {}: {e}", e.line(), e.column()),
    )
}

/// Reads a scattering function from JSON (`coeffs` or `samples`) or from a
/// CSV with columns `theta,re,im`. Coefficient files are synthesized on a grid
/// of `grid_size` nodes.
pub fn read_scattering(path: &Path, grid_size: usize) -> Result<ScatteringFunction> {
    let text = fs::read_to_string(path)?;
    let is_csv = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        return parse_samples_csv(path, &text);
    }
    let file: ScatteringFile = serde_json::from_str(&text).map_err(|e| json_err(path, e))?;
    match (file.kind.as_str(), file.entries, file.grid, file.values) {
        ("coeffs", Some(entries), None, None) => {
            if entries.is_empty() {
                return Err(parse_err(path, "no coefficient entries"));
            }
            let mut list: Vec<(i64, C64)> = Vec::with_capacity(entries.len());
            for (j, re, im) in entries {
                if list.iter().any(|(k, _)| *k == j) {
                    return Err(parse_err(
                        path,
                        format!("coefficient index {j} appears twice"),
                    ));
                }
                list.push((j, C64::new(re, im)));
            }
            let grid = CircleGrid::new(grid_size)?;
            ScatteringFunction::from_coeffs(grid, &LaurentSeries::from_entries(&list)?)
        }
        ("samples", None, Some(grid), Some(values)) => {
            let g = CircleGrid::new(grid).map_err(|e| parse_err(path, e.to_string()))?;
            if values.len() != grid {
                return Err(parse_err(
                    path,
                    format!("grid {grid} but {} sample values", values.len()),
                ));
            }
            ScatteringFunction::from_samples(
                g,
                values
                    .into_iter()
                    .map(|(re, im)| C64::new(re, im))
                    .collect(),
            )
        }
        ("coeffs", ..) => Err(parse_err(
            path,
            "a coeffs file holds exactly the field `entries`",
        )),
        ("samples", ..) => Err(parse_err(
            path,
            "a samples file holds exactly the fields `grid` and `values`",
        )),
        (other, ..) => Err(parse_err(
            path,
            format!("unknown type `{other}`, expected coeffs or samples"),
        )),
    }
}

fn parse_samples_csv(path: &Path, text: &str) -> Result<ScatteringFunction> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, e.to_string()))?
        .clone();
    let cols: Vec<&str> = headers.iter().map(str::trim).collect();
    if cols != ["theta", "re", "im"] {
        return Err(parse_err(
            path,
            format!("expected header theta,re,im, found {}", cols.join(",")),
        ));
    }
    let mut thetas = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in reader.deserialize::<(f64, f64, f64)>().enumerate() {
        let (theta, re, im) = rec.map_err(|e| parse_err(path, format!("line {}: {e}", i + 2)))?;
        thetas.push(theta);
        values.push(C64::new(re, im));
    }
    let grid = CircleGrid::new(values.len()).map_err(|e| parse_err(path, e.to_string()))?;
    for (k, th) in thetas.iter().enumerate() {
        if (th - grid.theta(k)).abs() > 1e-9 {
            return Err(parse_err(
                path,
                format!(
                    "line {}: theta {th} is not the grid node {}",
                    k + 2,
                    grid.theta(k)
                ),
            ));
        }
    }
    ScatteringFunction::from_samples(grid, values)
}

#[derive(Deserialize)]
struct WrappedSequence {
    sequence: VerblunskySequence,
}

/// Reads `{"lo": j0, "alphas": [[re, im], ...], "a0s": [...]}`, or an inverse
/// report holding such an object under `sequence`.
pub fn read_sequence(path: &Path) -> Result<VerblunskySequence> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| json_err(path, e))?;
    // Re-parse the text rather than the value so that errors keep their position.
    let seq = if value.get("sequence").is_some() {
        serde_json::from_str::<WrappedSequence>(&text)
            .map_err(|e| json_err(path, e))?
            .sequence
    } else {
        serde_json::from_str::<VerblunskySequence>(&text).map_err(|e| json_err(path, e))?
    };
    seq.validate()?;
    Ok(seq)
}

/// Output of the inverse command.
#[derive(Debug, Serialize)]
pub struct InverseReport<'a> {
    pub sequence: &'a VerblunskySequence,
    pub convergence: &'a ConvergenceReport,
    pub levels: &'a [LevelReport],
}

/// Boundary samples in the same format `read_scattering` accepts.
#[derive(Debug, Serialize)]
pub struct SamplesFile<'a> {
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub grid: usize,
    pub values: &'a [C64],
}

impl<'a> SamplesFile<'a> {
    pub fn new(grid: CircleGrid, values: &'a [C64]) -> Self {
        Self {
            kind: "samples",
            grid: grid.size(),
            values,
        }
    }
}

/// Indented JSON with a trailing newline. Arrays of scalars (complex numbers,
/// short vectors) stay on one line.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let mut s = String::new();
    write_value(&mut s, &v, 0);
    s.push('\n');
    Ok(s)
}

fn write_value(out: &mut String, v: &serde_json::Value, indent: usize) {
    use serde_json::Value;
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n("  ", n));
    match v {
        Value::Array(items) if items.iter().all(|i| !i.is_array() && !i.is_object()) => {
            out.push_str(&v.to_string());
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, item, indent + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(out, item, indent + 1);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
        _ => out.push_str(&v.to_string()),
    }
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

// Debug formatting is the shortest representation that parses back exactly.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn csv_records(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e)))
}

fn csv_text(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<String> {
    csv_records(header, rows.map(|r| r.into_iter().map(num).collect()))
}

/// Reconstruction output `{"z": [...], "R": [...]}`.
#[derive(Debug, Serialize)]
pub struct Reconstruction<'a> {
    pub z: &'a [C64],
    #[serde(rename = "R")]
    pub r: &'a [C64],
}

pub fn reconstruction_csv(z: &[C64], r: &[C64]) -> Result<String> {
    csv_text(
        &["z_re", "z_im", "re", "im"],
        z.iter().zip(r).map(|(z, v)| vec![z.re, z.im, v.re, v.im]),
    )
}

/// Samples on a grid as `theta,re,im`.
pub fn samples_csv(grid: CircleGrid, values: &[C64]) -> Result<String> {
    csv_text(
        &["theta", "re", "im"],
        values
            .iter()
            .enumerate()
            .map(|(k, v)| vec![grid.theta(k), v.re, v.im]),
    )
}

/// Density samples as `theta` plus real and imaginary parts of the four entries.
pub fn density_csv(d: &SpectralDensity) -> Result<String> {
    csv_text(
        &[
            "theta", "s00_re", "s00_im", "s01_re", "s01_im", "s10_re", "s10_im", "s11_re", "s11_im",
        ],
        d.samples.iter().enumerate().map(|(k, m)| {
            vec![
                d.grid.theta(k),
                m[(0, 0)].re,
                m[(0, 0)].im,
                m[(0, 1)].re,
                m[(0, 1)].im,
                m[(1, 0)].re,
                m[(1, 0)].im,
                m[(1, 1)].re,
                m[(1, 1)].im,
            ]
        }),
    )
}

/// Alphas as `level,re,im,rho[,a0]`.
pub fn sequence_csv(seq: &VerblunskySequence) -> Result<String> {
    let mut header = vec!["level", "re", "im", "rho"];
    if seq.a0s.is_some() {
        header.push("a0");
    }
    csv_records(
        &header,
        (seq.lo..=seq.hi()).map(|j| {
            let a = seq.get(j);
            let mut row = vec![j.to_string(), num(a.re), num(a.im), num(seq.rho(j))];
            row.extend(seq.a0(j).map(num));
            row
        }),
    )
}

/// The doubling ladder as `levels,window,depth,section_cap,sup_error,l2_error,wandering_residual`.
pub fn ladder_csv(steps: &[RoundtripStep]) -> Result<String> {
    csv_records(
        &[
            "levels",
            "window",
            "depth",
            "section_cap",
            "sup_error",
            "l2_error",
            "wandering_residual",
        ],
        steps.iter().map(|s| {
            vec![
                s.levels.to_string(),
                s.window.to_string(),
                s.depth.to_string(),
                s.section_cap.to_string(),
                num(s.sup_error),
                num(s.l2_error),
                num(s.wandering_residual),
            ]
        }),
    )
}

/// One row per check: `name,value,tol,passed`.
pub fn check_csv(rep: &CheckReport) -> Result<String> {
    csv_records(
        &["name", "value", "tol", "passed"],
        rep.items.iter().map(|i| {
            vec![
                i.name.clone(),
                num(i.value),
                num(i.tol),
                i.passed.to_string(),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp(name: &str, body: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(name);
        std::fs::File::create(&p)
            .unwrap()
            .write_all(body.as_bytes())
            .unwrap();
        (dir, p)
    }

    #[test]
    fn reads_coeff_file() {
        let (_d, p) = temp("r.json", r#"{"type":"coeffs","entries":[[-1,0.5,0]]}"#);
        let r = read_scattering(&p, 64).unwrap();
        assert_eq!(r.coefficient(-1).unwrap(), C64::new(0.5, 0.0));
        assert_eq!(r.grid().size(), 64);
    }

    #[test]
    fn reads_sample_files() {
        let (_d, p) = temp(
            "r.json",
            &format!(
                r#"{{"type":"samples","grid":8,"values":{}}}"#,
                "[[0.1,0]".to_string() + &",[0.1,0]".repeat(7) + "]"
            ),
        );
        let r = read_scattering(&p, 1024).unwrap();
        assert_eq!(r.grid().size(), 8);
        assert!((r.coefficient(0).unwrap() - C64::new(0.1, 0.0)).norm() < 1e-15);

        let grid = CircleGrid::new(8).unwrap();
        let body = samples_csv(grid, &[C64::new(0.2, -0.1); 8]).unwrap();
        let (_d, p) = temp("r.csv", &body);
        let r = read_scattering(&p, 1024).unwrap();
        assert!((r.coefficient(0).unwrap() - C64::new(0.2, -0.1)).norm() < 1e-15);
    }

    #[test]
    fn parse_errors_carry_location() {
        let (_d, p) = temp("r.json", "{\"type\":\"coeffs\",\n\"entries\":[[1,2]]}");
        let e = read_scattering(&p, 64).unwrap_err();
        assert!(matches!(e, Error::Parse { .. }));
        assert!(e.to_string().contains("line 2"), "{e}");
        assert_eq!(e.exit_code(), 2);

        let (_d, p) = temp("r.csv", "theta,re,im\n0,0.1,0\nx,0,0\n");
        let e = read_scattering(&p, 64).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn sequence_file_roundtrip() {
        let (_d, p) = temp("a.json", r#"{"lo":-1,"alphas":[[0,0],[-0.5,0],[0,0.25]]}"#);
        let s = read_sequence(&p).unwrap();
        assert_eq!(s.lo, -1);
        assert_eq!(s.get(0), C64::new(-0.5, 0.0));
        let text = to_json(&s).unwrap();
        let back: VerblunskySequence = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);

        let (_d, p) = temp("a.json", r#"{"lo":0,"alphas":[[1,0]]}"#);
        assert_eq!(read_sequence(&p).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn json_layout() {
        #[derive(Serialize)]
        struct T {
            b: Vec<C64>,
            a: f64,
        }
        let t = T {
            b: vec![C64::new(0.5, -1.0)],
            a: 2.0,
        };
        assert_eq!(
            to_json(&t).unwrap(),
            "{\n  \"a\": 2.0,\n  \"b\": [\n    [0.5,-1.0]\n  ]\n}\n"
        );
    }

    #[test]
    fn csv_writers() {
        let z = [C64::new(0.5, 0.0)];
        let r = [C64::new(0.25, 0.0)];
        assert_eq!(
            reconstruction_csv(&z, &r).unwrap(),
            "z_re,z_im,re,im\n0.5,0.0,0.25,0.0\n"
        );
        let s = VerblunskySequence::new(0, vec![C64::new(-0.6, 0.0)]).unwrap();
        assert_eq!(
            sequence_csv(&s).unwrap(),
            "level,re,im,rho\n0,-0.6,0.0,0.8\n"
        );
    }
}
