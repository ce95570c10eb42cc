//! Experiment configuration: TOML file plus `--set key=value` overrides.

use crate::error::{CliError, Result};
use fraclap_core::bn::{Metric, Quadrature};
use fraclap_core::extension::DtnScheme;
use fraclap_core::spectral::DEFAULT_DOF_CAP;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub s: f64,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default)]
    pub partition: PartitionSpec,
    /// Absolute λ for `minimize` and `pohozaev`.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// λ as a fraction of λ_{1,s}; used when `lambda` is absent.
    #[serde(default)]
    pub lambda_fraction: Option<f64>,
    #[serde(default = "default_grid")]
    pub lambda_grid: Vec<f64>,
    /// Grid values are fractions of λ_{1,s}.
    #[serde(default = "yes")]
    pub lambda_grid_relative: bool,
    #[serde(default)]
    pub moving: MovingSpec,
    #[serde(default)]
    pub cylinder: CylinderSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub eig: EigSpec,
    #[serde(default)]
    pub frac_apply: FracApplySpec,
    #[serde(default)]
    pub extend_check: ExtendCheckSpec,
    #[serde(default)]
    pub pohozaev: PohozaevSpec,
    #[serde(default)]
    pub extremal: Option<ExtremalSpec>,
    #[serde(default)]
    pub cone: Option<ConeSpec>,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    /// Recorded for provenance; no experiment samples randomly.
    #[serde(default)]
    pub seed: u64,
}

fn yes() -> bool {
    true
}

fn default_grid() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.1]
}

fn default_output_dir() -> String {
    "runs".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DomainSpec {
    pub dim: usize,
    /// `[lo, hi]` per axis; unit box when absent.
    pub extents: Option<Vec<[f64; 2]>>,
    /// Cells per axis; a single entry is used for every axis.
    pub cells: Vec<usize>,
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec { dim: 2, extents: None, cells: vec![16] }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PartitionSpec {
    /// Whole faces carrying the Dirichlet condition, e.g. `["x-", "z+"]`.
    pub dirichlet_faces: Vec<String>,
    /// Dirichlet measure grown from `anchor` instead of whole faces.
    pub alpha: Option<f64>,
    pub anchor: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MovingSpec {
    pub anchor: String,
    pub alphas: Vec<f64>,
    pub compute_s_tilde: bool,
}

impl Default for MovingSpec {
    fn default() -> Self {
        MovingSpec { anchor: "y-".into(), alphas: Vec::new(), compute_s_tilde: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CylinderSpec {
    /// `6/√λ_1` when absent.
    pub height: Option<f64>,
    pub levels: usize,
    pub grading: f64,
}

impl Default for CylinderSpec {
    fn default() -> Self {
        CylinderSpec { height: None, levels: 64, grading: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSpec {
    pub max_iter: usize,
    pub window: usize,
    pub window_rtol: f64,
    pub residual_tol: f64,
    pub armijo: f64,
    pub metric: Metric,
    pub quadrature: Quadrature,
    pub dof_cap: usize,
    pub force_dense: bool,
    pub parallel: bool,
    pub dtn_scheme: DtnScheme,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let m = fraclap_core::bn::MinimizeOptions::default();
        SolverSpec {
            max_iter: m.max_iter,
            window: m.window,
            window_rtol: m.window_rtol,
            residual_tol: m.residual_tol,
            armijo: m.armijo,
            metric: m.metric,
            quadrature: Quadrature::default(),
            dof_cap: DEFAULT_DOF_CAP,
            force_dense: false,
            parallel: true,
            dtn_scheme: DtnScheme::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigSpec {
    /// Number of eigenpairs; the full basis when absent.
    pub count: Option<usize>,
    pub save_basis: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FracApplySpec {
    /// `[k, c]` pairs with 1-based mode index: `u = Σ c φ_k`.
    pub modes: Vec<(usize, f64)>,
}

impl Default for FracApplySpec {
    fn default() -> Self {
        FracApplySpec { modes: vec![(1, 1.0)] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtendCheckSpec {
    pub modes: usize,
}

impl Default for ExtendCheckSpec {
    fn default() -> Self {
        ExtendCheckSpec { modes: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PohozaevSpec {
    /// Cells per axis at each refinement level.
    pub cells: Vec<usize>,
    /// y-levels at each refinement level.
    pub cylinder_levels: Vec<usize>,
    /// Domain centre when absent.
    pub x0: Option<Vec<f64>>,
    pub t_max: f64,
}

impl Default for PohozaevSpec {
    fn default() -> Self {
        PohozaevSpec { cells: vec![6, 10, 14], cylinder_levels: vec![32, 64, 128], x0: None, t_max: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtremalSpec {
    pub x0: Vec<f64>,
    pub rho: f64,
    pub epsilons: Vec<f64>,
    pub extension_route: bool,
}

impl Default for ExtremalSpec {
    fn default() -> Self {
        ExtremalSpec { x0: vec![0.5, 1.0], rho: 0.5, epsilons: vec![0.25], extension_route: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConeSpec {
    pub radius: f64,
    pub regularization: f64,
    pub cells: usize,
}

impl Default for ConeSpec {
    fn default() -> Self {
        ConeSpec { radius: 1.0, regularization: 0.0, cells: 16 }
    }
}

impl ExperimentConfig {
    /// Every optional section populated, so its JSON form lists all keys.
    fn schema_example() -> Self {
        ExperimentConfig {
            s: 0.75,
            domain: DomainSpec::default(),
            partition: PartitionSpec::default(),
            lambda: None,
            lambda_fraction: None,
            lambda_grid: default_grid(),
            lambda_grid_relative: true,
            moving: MovingSpec::default(),
            cylinder: CylinderSpec::default(),
            solver: SolverSpec::default(),
            eig: EigSpec::default(),
            frac_apply: FracApplySpec::default(),
            extend_check: ExtendCheckSpec::default(),
            pohozaev: PohozaevSpec::default(),
            extremal: Some(ExtremalSpec::default()),
            cone: Some(ConeSpec::default()),
            output_dir: default_output_dir(),
            seed: 0,
        }
    }

    /// Hash of the resolved configuration, output directory excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir.clear();
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(&Sha256::digest(&bytes)[..8])
    }
}

/// A configuration after overrides, with what was overridden.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub overrides: Vec<String>,
    pub hash: String,
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text, overrides)
}

pub fn parse_config(text: &str, overrides: &[String]) -> Result<LoadedConfig> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::config(e.to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let allowed = serde_json::to_value(ExperimentConfig::schema_example()).expect("schema serializes");
    let mut unknown = Vec::new();
    collect_unknown(&table, &allowed, "", &mut unknown);
    if !unknown.is_empty() {
        return Err(CliError::Config { message: format!("unknown keys: {}", unknown.join(", ")), keys: unknown });
    }
    let config: ExperimentConfig =
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::config(e.message().to_owned()))?;
    validate(&config)?;
    let hash = config.hash();
    Ok(LoadedConfig { config, overrides: overrides.to_vec(), hash })
}

fn apply_override(table: &mut toml::Table, raw: &str) -> Result<()> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("override {raw:?} is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::config(format!("override {raw:?} has an empty key")));
    }
    let value = format!("v = {}", value.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.trim().to_owned()));
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(format!("override {key:?}: {p:?} is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_owned(), value);
    Ok(())
}

fn collect_unknown(table: &toml::Table, allowed: &serde_json::Value, prefix: &str, out: &mut Vec<String>) {
    for (k, v) in table {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match allowed.get(k) {
            None => out.push(path),
            Some(sub @ serde_json::Value::Object(_)) => {
                if let toml::Value::Table(t) = v {
                    collect_unknown(t, sub, &path, out);
                }
            }
            Some(_) => {}
        }
    }
}

fn validate(c: &ExperimentConfig) -> Result<()> {
    let d = &c.domain;
    if !(1..=3).contains(&d.dim) {
        return Err(CliError::Config { message: format!("domain.dim = {} not in 1..=3", d.dim), keys: vec!["domain.dim".into()] });
    }
    if d.cells.len() != 1 && d.cells.len() != d.dim {
        return Err(CliError::Config {
            message: format!("domain.cells needs 1 or {} entries", d.dim),
            keys: vec!["domain.cells".into()],
        });
    }
    if let Some(e) = &d.extents {
        if e.len() != d.dim {
            return Err(CliError::Config {
                message: format!("domain.extents needs {} entries", d.dim),
                keys: vec!["domain.extents".into()],
            });
        }
    }
    if c.pohozaev.cells.len() != c.pohozaev.cylinder_levels.len() {
        return Err(CliError::Config {
            message: "pohozaev.cells and pohozaev.cylinder_levels differ in length".into(),
            keys: vec!["pohozaev.cells".into(), "pohozaev.cylinder_levels".into()],
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_all_listed() {
        let err = parse_config("s = 0.75\nfoo = 1\n[solver]\nmax_iters = 3\n[domain]\ndim = 2\n", &["cylinder.hieght=2".into()])
            .unwrap_err();
        match err {
            CliError::Config { keys, .. } => {
                assert_eq!(keys, ["cylinder.hieght", "foo", "solver.max_iters"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overrides_apply_and_change_the_hash() {
        let base = parse_config("s = 0.75\n", &[]).unwrap();
        let over = parse_config("s = 0.75\n", &["s=0.8".into(), "cylinder.levels=128".into(), "output_dir=elsewhere".into()]).unwrap();
        assert_eq!(over.config.s, 0.8);
        assert_eq!(over.config.cylinder.levels, 128);
        assert_eq!(over.config.output_dir, "elsewhere");
        assert_ne!(base.hash, over.hash);
        let moved = parse_config("s = 0.75\n", &["output_dir=x".into()]).unwrap();
        assert_eq!(base.hash, moved.hash);
    }

    #[test]
    fn strings_and_arrays_override() {
        let c = parse_config("s = 0.75\n", &["partition.dirichlet_faces=[\"x-\"]".into(), "moving.anchor=x+".into()]).unwrap();
        assert_eq!(c.config.partition.dirichlet_faces, ["x-"]);
        assert_eq!(c.config.moving.anchor, "x+");
        assert!(parse_config("s = 0.75\n", &["novalue".into()]).is_err());
        assert!(parse_config("s = 0.75\n", &["s.x=1".into()]).is_err());
    }

    #[test]
    fn type_errors_and_shape_errors() {
        assert!(parse_config("s = \"half\"\n", &[]).is_err());
        assert!(parse_config("", &[]).is_err());
        assert!(parse_config("s = 0.75\n[domain]\ndim = 3\ncells = [4, 4]\n", &[]).is_err());
    }
}
