//! Consolidation of JSON and CSV artifacts into one versioned document.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::SCHEMA_VERSION;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvTable {
    pub columns: Vec<String>,
    /// Empty fields are `None`.
    pub rows: Vec<Vec<Option<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", content = "data", rename_all = "snake_case")]
pub enum ArtifactContent {
    Json(Value),
    Csv(CsvTable),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    /// `verification`, `simulation`, `json` or `csv`.
    pub kind: String,
    pub content: ArtifactContent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossReference {
    pub from: usize,
    pub to: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsolidatedReport {
    pub schema_version: String,
    pub artifacts: Vec<Artifact>,
    pub references: Vec<CrossReference>,
}

impl ConsolidatedReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Numeric CSV with a header row; every field must parse as a float or be
/// empty.
pub fn parse_csv(text: &str) -> Result<CsvTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let columns: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, f)| {
                let f = f.trim();
                if f.is_empty() {
                    Ok(None)
                } else {
                    f.parse::<f64>().map(Some).map_err(|_| Error::Parse {
                        line,
                        message: format!("column {:?}: {f:?} is not a number", columns.get(j).map_or("?", |c| c)),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(CsvTable { columns, rows })
}

fn classify(v: &Value) -> &'static str {
    if v.get("deltas").is_some() && v.get("validation").is_some() {
        "verification"
    } else if v.get("run").is_some() && v.get("delta").is_some() {
        "simulation"
    } else {
        "json"
    }
}

fn model_kind(v: &Value) -> Option<&str> {
    v.get("model").and_then(|m| m.get("kind")).and_then(Value::as_str)
}

fn load(path: &Path) -> Result<Artifact> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{name}: {e}"))))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => {
            let v: Value = serde_json::from_str(&text)
                .map_err(|e| Error::Parse { line: e.line() as u64, message: e.to_string() })?;
            Ok(Artifact { path: name, kind: classify(&v).into(), content: ArtifactContent::Json(v) })
        }
        Some("csv") => Ok(Artifact { path: name, kind: "csv".into(), content: ArtifactContent::Csv(parse_csv(&text)?) }),
        _ => Err(Error::Unsupported(format!("{name}: expected a .json or .csv artifact"))),
    }
}

/// Loads every artifact in order and links related ones: a verification
/// report to simulations of the same model kind at one of its `δ`, and a
/// simulation summary to the CSV with the same file stem.
pub fn cmd_report(paths: &[impl AsRef<Path>]) -> Result<ConsolidatedReport> {
    let artifacts = paths
        .iter()
        .map(|p| {
            load(p.as_ref()).map_err(|e| match e {
                Error::Parse { line, message } => {
                    Error::Parse { line, message: format!("{}: {message}", p.as_ref().display()) }
                }
                e => e,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut references = Vec::new();
    let stem = |a: &Artifact| Path::new(&a.path).with_extension("").display().to_string();
    for (i, a) in artifacts.iter().enumerate() {
        let ArtifactContent::Json(va) = &a.content else { continue };
        for (j, b) in artifacts.iter().enumerate() {
            if i == j {
                continue;
            }
            match (a.kind.as_str(), &b.content) {
                ("verification", ArtifactContent::Json(vb)) if b.kind == "simulation" => {
                    let same_kind = model_kind(va).is_some() && model_kind(va) == model_kind(vb);
                    let delta = vb.get("delta").and_then(Value::as_f64);
                    let listed = va["deltas"]
                        .as_array()
                        .is_some_and(|ds| ds.iter().any(|d| d["delta"].as_f64() == delta));
                    if same_kind && listed {
                        references.push(CrossReference {
                            from: i,
                            to: j,
                            reason: format!("simulation of the verified model at delta = {}", delta.unwrap_or(f64::NAN)),
                        });
                    }
                }
                ("simulation", ArtifactContent::Csv(_)) if stem(a) == stem(b) => {
                    references.push(CrossReference { from: i, to: j, reason: "time series of the run".into() });
                }
                _ => {}
            }
        }
    }
    Ok(ConsolidatedReport { schema_version: SCHEMA_VERSION.to_string(), artifacts, references })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_list_gives_versioned_empty_report() {
        let none: [&str; 0] = [];
        let r = cmd_report(&none).unwrap();
        assert_eq!(r.schema_version, SCHEMA_VERSION);
        assert!(r.artifacts.is_empty() && r.references.is_empty());
        assert!(r.to_json().contains("\"schema_version\""));
    }

    #[test]
    fn corrupted_csv_names_the_line() {
        let e = parse_csv("t,sigma\n0,1\n1,2\n2,abc\n").unwrap_err();
        match e {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            e => panic!("{e}"),
        }
        let e = parse_csv("t,sigma\n0,1\n1,2,3\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let t = parse_csv("t,sigma\n0,\n1,2.5\n").unwrap();
        assert_eq!(t.rows, vec![vec![Some(0.0), None], vec![Some(1.0), Some(2.5)]]);
    }
}
