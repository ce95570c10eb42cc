//! Report persistence: one directory per configuration hash, every write
//! recorded as an artifact of the run.

use crate::error::{CliError, Result, Stage};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Report,
    Table,
    PlotSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub name: String,
    /// Relative to the run directory.
    pub file: String,
    pub kind: ArtifactKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_hash: String,
    /// Fully resolved configuration.
    pub config: serde_json::Value,
    pub overrides: Vec<String>,
    pub artifacts: Vec<Artifact>,
    pub versions: BTreeMap<String, String>,
    /// Wall-clock per stage; the only field that varies between reruns.
    pub timings: Vec<StageTiming>,
}

impl RunManifest {
    /// The manifest without timings.
    pub fn payload(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("manifest serializes");
        if let Some(o) = v.as_object_mut() {
            o.remove("timings");
        }
        v
    }
}

/// A CSV table of preformatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// 17 significant digits, `.` decimal, round-trips every `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn opt_show<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// The single write sink of a run.
#[derive(Debug)]
pub struct RunDir {
    root: PathBuf,
    artifacts: Vec<Artifact>,
}

impl RunDir {
    pub fn create(root: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(RunDir { root, artifacts: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.artifacts
    }

    fn write(&mut self, name: &str, file: String, kind: ArtifactKind, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(&file);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.artifacts.push(Artifact { name: name.into(), file, kind });
        Ok(())
    }

    pub fn report<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
        text.push('\n');
        self.write(name, format!("{name}.json"), ArtifactKind::Report, text.as_bytes())
    }

    pub fn table(&mut self, table: &Table) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Output(e.to_string());
        w.write_record(&table.header).map_err(err)?;
        for r in &table.rows {
            w.write_record(r).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        self.write(&table.name, format!("{}.csv", table.name), ArtifactKind::Table, &bytes)
    }

    /// Registers a file written by someone else (e.g. a basis artifact).
    pub fn register(&mut self, name: &str, file: &str, kind: ArtifactKind) {
        self.artifacts.push(Artifact { name: name.into(), file: file.into(), kind });
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.root.join(file)
    }
}

/// Column pairs plotted for each known table.
fn projection(table: &str) -> Option<(&'static str, &'static str)> {
    Some(match table {
        "sweep" => ("lambda", "s_lambda"),
        "move_boundary" => ("alpha", "lambda_1s"),
        "pohozaev" => ("level", "relative"),
        "eigenvalues" => ("k", "lambda"),
        "trace" => ("iteration", "q"),
        "dtn" => ("levels", "error"),
        _ => return None,
    })
}

/// Two-column plot series (`<table>.dat`) for every plottable table in the
/// manifest. Rows with an empty cell are skipped.
pub fn emit_plot_data(manifest: &RunManifest, dir: &Path) -> Result<Vec<Artifact>> {
    let tables: Vec<&Artifact> = manifest.artifacts.iter().filter(|a| a.kind == ArtifactKind::Table).collect();
    if tables.is_empty() {
        return Err(CliError::Plot("manifest lists no tables".into()));
    }
    let mut out = Vec::new();
    for t in tables {
        let Some((xc, yc)) = projection(&t.name) else { continue };
        let path = dir.join(&t.file);
        let mut r = csv::Reader::from_path(&path).map_err(|e| CliError::Plot(format!("table {} missing: {e}", t.name)))?;
        let header = r.headers().map_err(|e| CliError::Plot(e.to_string()))?.clone();
        let col = |c: &str| {
            header.iter().position(|h| h == c).ok_or_else(|| CliError::Plot(format!("table {} has no column {c}", t.name)))
        };
        let (xi, yi) = (col(xc)?, col(yc)?);
        let mut text = format!("# {xc} {yc}\n");
        for rec in r.records() {
            let rec = rec.map_err(|e| CliError::Plot(e.to_string()))?;
            let (x, y) = (&rec[xi], &rec[yi]);
            if !x.is_empty() && !y.is_empty() {
                text.push_str(&format!("{x} {y}\n"));
            }
        }
        let file = format!("{}.dat", t.name);
        let p = dir.join(&file);
        std::fs::write(&p, text).map_err(|e| CliError::io(&p, e))?;
        out.push(Artifact { name: t.name.clone(), file, kind: ArtifactKind::PlotSeries });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(artifacts: Vec<Artifact>) -> RunManifest {
        RunManifest {
            subcommand: "sweep-lambda".into(),
            config_hash: "0".into(),
            config: serde_json::Value::Null,
            overrides: vec![],
            artifacts,
            versions: BTreeMap::new(),
            timings: vec![StageTiming { stage: Stage::Sweep, seconds: 0.5 }],
        }
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert_eq!(s.split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
        }
    }

    #[test]
    fn plot_series_from_tables() {
        let dir = tempfile::tempdir().unwrap();
        let mut rd = RunDir::create(dir.path().join("h")).unwrap();
        let mut t = Table::new("sweep", &["lambda", "s_lambda", "nonexistence"]);
        t.push(vec![num(0.0), num(1.5), "false".into()]);
        t.push(vec![num(2.0), String::new(), "true".into()]);
        rd.table(&t).unwrap();
        let m = manifest(rd.artifacts().to_vec());
        let plots = emit_plot_data(&m, rd.root()).unwrap();
        assert_eq!(plots.len(), 1);
        let text = std::fs::read_to_string(rd.root().join("sweep.dat")).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().nth(1).unwrap().starts_with("0.0000000000000000e0 1.5"));
    }

    #[test]
    fn empty_manifest_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(emit_plot_data(&manifest(vec![]), dir.path()), Err(CliError::Plot(_))));
        let missing = Artifact { name: "sweep".into(), file: "nope.csv".into(), kind: ArtifactKind::Table };
        assert!(emit_plot_data(&manifest(vec![missing]), dir.path()).is_err());
    }

    #[test]
    fn manifest_round_trips_and_payload_drops_timings() {
        let m = manifest(vec![Artifact { name: "a".into(), file: "a.json".into(), kind: ArtifactKind::Report }]);
        let back: RunManifest = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        assert!(m.payload().get("timings").is_none());
    }
}
