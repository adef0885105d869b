//! Scheme, system and report files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scheme::{Scheme, SchemeError, Tensor};
use crate::search::{SearchConfig, SearchReport};
use crate::system::{LinearSystem, SystemError, Term};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    System(#[from] SystemError),
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, IoError> {
    std::fs::read(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    std::fs::write(path, contents).map_err(|source| IoError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Scheme file as written, before range checks.
#[derive(Deserialize)]
struct RawScheme {
    m: usize,
    n: usize,
    p: usize,
    r: usize,
    u: Vec<Vec<i64>>,
    v: Vec<Vec<i64>>,
    w: Vec<Vec<i64>>,
}

fn narrow(tensor: Tensor, rows: Vec<Vec<i64>>) -> Result<Vec<Vec<i8>>, SchemeError> {
    rows.into_iter()
        .enumerate()
        .map(|(row, coeffs)| {
            coeffs
                .into_iter()
                .enumerate()
                .map(|(position, value)| {
                    if (-1..=1).contains(&value) {
                        Ok(value as i8)
                    } else {
                        Err(SchemeError::Coefficient {
                            tensor,
                            row,
                            position,
                            value,
                        })
                    }
                })
                .collect()
        })
        .collect()
}

pub fn parse_scheme(bytes: &[u8]) -> Result<Scheme, IoError> {
    let raw: RawScheme = serde_json::from_slice(bytes)?;
    let u = narrow(Tensor::U, raw.u)?;
    let v = narrow(Tensor::V, raw.v)?;
    let w = narrow(Tensor::W, raw.w)?;
    Ok(Scheme::new((raw.m, raw.n, raw.p, raw.r), u, v, w)?)
}

fn write_rows(out: &mut String, name: &str, rows: &[Vec<i8>], last: bool) {
    let _ = writeln!(out, "  \"{name}\": [");
    for (k, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        let sep = if k + 1 < rows.len() { "," } else { "" };
        let _ = writeln!(out, "    [{}]{sep}", cells.join(", "));
    }
    let _ = writeln!(out, "  ]{}", if last { "" } else { "," });
}

/// Scheme JSON with one coefficient row per line.
pub fn scheme_to_json(s: &Scheme) -> String {
    let mut out = String::from("{\n");
    for (key, value) in [("m", s.m), ("n", s.n), ("p", s.p), ("r", s.r)] {
        let _ = writeln!(out, "  \"{key}\": {value},");
    }
    write_rows(&mut out, "u", &s.u, false);
    write_rows(&mut out, "v", &s.v, false);
    write_rows(&mut out, "w", &s.w, true);
    out.push_str("}\n");
    out
}

/// A bare expression set: `{"n_x": 4, "expressions": [[1, 2, -3, 4], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemFile {
    pub n_x: u32,
    pub expressions: Vec<Vec<Term>>,
}

pub fn parse_system(bytes: &[u8]) -> Result<LinearSystem, IoError> {
    let file: SystemFile = serde_json::from_slice(bytes)?;
    Ok(LinearSystem::new(file.n_x, file.expressions)?)
}

pub fn system_to_json(sys: &LinearSystem) -> String {
    let file = SystemFile {
        n_x: sys.n_x(),
        expressions: sys.sorted_expressions(),
    };
    let mut out = serde_json::to_string(&file).expect("system serializes");
    out.push('\n');
    out
}

/// True when the JSON document looks like an expression set rather than a scheme.
pub fn is_system_json(bytes: &[u8]) -> bool {
    serde_json::from_slice::<serde_json::Value>(bytes)
        .map(|v| v.get("n_x").is_some())
        .unwrap_or(false)
}

pub fn report_to_json<T: Serialize>(report: &T) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}

pub fn parse_report(bytes: &[u8]) -> Result<SearchReport, IoError> {
    Ok(serde_json::from_slice(bytes)?)
}

/// Reads a search configuration, either bare or as the `config` field of a
/// report.
pub fn parse_config(bytes: &[u8]) -> Result<SearchConfig, IoError> {
    let value: serde_json::Value = serde_json::from_slice(bytes)?;
    let inner = match value.get("config") {
        Some(c) if value.get("scheme_digest").is_some() || value.get("cost").is_some() => c.clone(),
        _ => value,
    };
    Ok(serde_json::from_value(inner)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_round_trip() {
        let s = Scheme::strassen();
        let text = scheme_to_json(&s);
        let parsed = parse_scheme(text.as_bytes()).unwrap();
        assert_eq!(parsed, s);
        assert_eq!(scheme_to_json(&parsed), text);
    }

    #[test]
    fn out_of_range_coefficient_names_its_place() {
        let mut s = Scheme::strassen();
        let mut value: serde_json::Value = serde_json::from_str(&scheme_to_json(&s)).unwrap();
        value["u"][3][1] = 2.into();
        let err = parse_scheme(value.to_string().as_bytes()).unwrap_err();
        match err {
            IoError::Scheme(SchemeError::Coefficient {
                tensor,
                row,
                position,
                value,
            }) => assert_eq!((tensor, row, position, value), (Tensor::U, 3, 1, 2)),
            other => panic!("unexpected {other}"),
        }
        s.u.pop();
        let err = parse_scheme(scheme_to_json(&s).as_bytes()).unwrap_err();
        assert!(matches!(
            err,
            IoError::Scheme(SchemeError::RowCount {
                tensor: Tensor::U,
                expected: 7,
                found: 6
            })
        ));
    }

    #[test]
    fn malformed_json_is_reported() {
        assert!(matches!(parse_scheme(b"{\"m\": 2,"), Err(IoError::Json(_))));
        assert!(matches!(parse_system(b"[]"), Err(IoError::Json(_))));
    }

    #[test]
    fn system_files() {
        let text = br#"{"n_x": 4, "expressions": [[1, 2, -3, 4], [1, -2, -4], [1, -2, -3, 4]]}"#;
        assert!(is_system_json(text));
        let sys = parse_system(text).unwrap();
        assert_eq!(sys.naive_cost(), 8);
        assert_eq!(parse_system(system_to_json(&sys).as_bytes()).unwrap(), sys);
        assert!(!is_system_json(scheme_to_json(&Scheme::strassen()).as_bytes()));
        assert!(matches!(
            parse_system(br#"{"n_x": 2, "expressions": [[1, 3]]}"#),
            Err(IoError::System(_))
        ));
    }

    #[test]
    fn config_from_bare_file_or_report() {
        let cfg = SearchConfig {
            master_seed: 17,
            patience: 4,
            ..Default::default()
        };
        let bare = serde_json::to_string(&cfg).unwrap();
        assert_eq!(parse_config(bare.as_bytes()).unwrap(), cfg);
        assert_eq!(parse_config(b"{\"master_seed\": 3}").unwrap().master_seed, 3);
        let wrapped = format!("{{\"scheme_digest\": \"x\", \"config\": {bare}}}");
        assert_eq!(parse_config(wrapped.as_bytes()).unwrap(), cfg);
    }
}
