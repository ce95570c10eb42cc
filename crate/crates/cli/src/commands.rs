//! Subcommand orchestration. Each experiment builds what it needs from the
//! configuration and writes its reports through the run's [`RunDir`].

use crate::config::{ExperimentConfig, LoadedConfig};
use crate::error::{AtStage, CliError, Result, Stage};
use crate::output::{emit_plot_data, num, opt_num, opt_show, ArtifactKind, RunDir, RunManifest, StageTiming, Table};
use fraclap_core::assembly::{assemble_operators, OperatorPair};
use fraclap_core::bn::{
    first_mode_witness, minimize_quotient, move_boundary_experiment, rescale_to_solution, sweep_lambda, CriticalNorm,
    MinimizeOptions, MinimizeOutcome, MovingBoundaryOptions, NonexistenceWitness, SolutionReport,
};
use fraclap_core::constants::{concentration_threshold, constants_report};
use fraclap_core::extension::{build_cylinder, default_height, DtnScheme, ExtensionSolver};
use fraclap_core::extremal::{test_function_quotient, EnergyRoute, TestFunctionReport};
use fraclap_core::fractional::{frac_apply, frac_apply_truncated, frac_norm, lambda1s, FracParams, Field};
use fraclap_core::linalg::dot;
use fraclap_core::mesh::{build_tensor_mesh, moving_family, partition_faces, BoundaryGeometry, BoundaryPartition, ConeDomain, Face, Mesh};
use fraclap_core::par::Parallelism;
use fraclap_core::pohozaev::{domain_center, nonexistence_check, pohozaev_for_field, NonexistenceCheck, NonlinearitySpec, PohozaevReport};
use fraclap_core::spectral::{eigendecompose, EigenCount, EigenOptions, SpectralBasis};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Eig,
    FracApply,
    ExtendCheck,
    Minimize,
    SweepLambda,
    MoveBoundary,
    Constants,
    Pohozaev,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Eig,
        Command::FracApply,
        Command::ExtendCheck,
        Command::Minimize,
        Command::SweepLambda,
        Command::MoveBoundary,
        Command::Constants,
        Command::Pohozaev,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Eig => "eig",
            Command::FracApply => "frac-apply",
            Command::ExtendCheck => "extend-check",
            Command::Minimize => "minimize",
            Command::SweepLambda => "sweep-lambda",
            Command::MoveBoundary => "move-boundary",
            Command::Constants => "constants",
            Command::Pohozaev => "pohozaev",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown subcommand {s:?}"))
    }
}

#[derive(Default)]
struct Timer {
    timings: Vec<StageTiming>,
}

impl Timer {
    fn run<T>(&mut self, stage: Stage, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t0 = Instant::now();
        let r = f();
        self.timings.push(StageTiming { stage, seconds: t0.elapsed().as_secs_f64() });
        r
    }
}

struct Problem {
    mesh: Mesh,
    partition: BoundaryPartition,
    ops: OperatorPair,
    params: FracParams,
}

fn policy(cfg: &ExperimentConfig) -> Parallelism {
    if cfg.solver.parallel {
        Parallelism::Parallel
    } else {
        Parallelism::Sequential
    }
}

fn eigen_options(cfg: &ExperimentConfig) -> EigenOptions {
    EigenOptions { dof_cap: cfg.solver.dof_cap, force_dense: cfg.solver.force_dense, policy: policy(cfg) }
}

fn minimize_options(cfg: &ExperimentConfig) -> MinimizeOptions {
    let s = &cfg.solver;
    MinimizeOptions {
        max_iter: s.max_iter,
        window: s.window,
        window_rtol: s.window_rtol,
        residual_tol: s.residual_tol,
        armijo: s.armijo,
        metric: s.metric,
    }
}

fn keyed(message: impl Into<String>, key: &str) -> CliError {
    CliError::Config { message: message.into(), keys: vec![key.into()] }
}

fn build_mesh(cfg: &ExperimentConfig, cells: Option<usize>) -> Result<Mesh> {
    let d = &cfg.domain;
    let extents = d.extents.clone().unwrap_or_else(|| vec![[0.0, 1.0]; d.dim]);
    let n: Vec<usize> = match cells {
        Some(n) => vec![n; d.dim],
        None if d.cells.len() == 1 => vec![d.cells[0]; d.dim],
        None => d.cells.clone(),
    };
    build_tensor_mesh(d.dim, &extents, &n).at(Stage::Setup)
}

fn parse_face(name: &str, key: &str) -> Result<Face> {
    Face::parse(name).map_err(|e| keyed(e.to_string(), key))
}

fn build_partition(cfg: &ExperimentConfig, mesh: &Mesh) -> Result<BoundaryPartition> {
    let p = &cfg.partition;
    match p.alpha {
        Some(alpha) => {
            let anchor = parse_face(p.anchor.as_deref().unwrap_or("y-"), "partition.anchor")?;
            let mut fam = moving_family(mesh, anchor, &[alpha]).at(Stage::Setup)?;
            Ok(fam.remove(0))
        }
        None => {
            let faces =
                p.dirichlet_faces.iter().map(|f| parse_face(f, "partition.dirichlet_faces")).collect::<Result<Vec<_>>>()?;
            partition_faces(mesh, &faces).at(Stage::Setup)
        }
    }
}

fn problem(cfg: &ExperimentConfig, cells: Option<usize>) -> Result<Problem> {
    let params = FracParams::new(cfg.s, cfg.domain.dim).at(Stage::Setup)?;
    let mesh = build_mesh(cfg, cells)?;
    let partition = build_partition(cfg, &mesh)?;
    let ops = assemble_operators(&mesh, &partition).at(Stage::Setup)?;
    Ok(Problem { mesh, partition, ops, params })
}

fn full_basis(cfg: &ExperimentConfig, ops: &OperatorPair) -> Result<SpectralBasis> {
    eigendecompose(ops, EigenCount::All, &eigen_options(cfg)).at(Stage::Eigen)
}

fn resolve_lambda(cfg: &ExperimentConfig, l1s: f64) -> Result<f64> {
    match (cfg.lambda, cfg.lambda_fraction) {
        (Some(l), _) => Ok(l),
        (None, Some(f)) => Ok(f * l1s),
        (None, None) => Err(CliError::Config {
            message: "set lambda or lambda_fraction".into(),
            keys: vec!["lambda".into(), "lambda_fraction".into()],
        }),
    }
}

fn point(v: &[f64], key: &str) -> Result<[f64; 3]> {
    if v.len() > 3 {
        return Err(keyed(format!("{key} has {} coordinates", v.len()), key));
    }
    let mut p = [0.0; 3];
    p[..v.len()].copy_from_slice(v);
    Ok(p)
}

fn cylinder_solver(cfg: &ExperimentConfig, ops: &OperatorPair, params: &FracParams, lambda1: f64, levels: usize) -> Result<ExtensionSolver> {
    let c = &cfg.cylinder;
    let cyl = build_cylinder(c.height.unwrap_or_else(|| default_height(lambda1)), levels, c.grading).at(Stage::Extension)?;
    ExtensionSolver::new(ops, &cyl, params, policy(cfg)).at(Stage::Extension)
}

fn m_norm(ops: &OperatorPair, f: &Field) -> f64 {
    let v = f.free_values(ops.dofs());
    dot(&v, &ops.mass.mul_vec(&v)).sqrt()
}

/// Runs `cmd` and writes its reports, plot series and manifest under
/// `<output_dir>/<config hash>/`.
pub fn run(cmd: Command, loaded: &LoadedConfig) -> Result<RunManifest> {
    let cfg = &loaded.config;
    let mut dir = RunDir::create(Path::new(&cfg.output_dir).join(&loaded.hash))?;
    let mut timer = Timer::default();
    match cmd {
        Command::Eig => eig(cfg, &mut dir, &mut timer)?,
        Command::FracApply => frac_apply_cmd(cfg, &mut dir, &mut timer)?,
        Command::ExtendCheck => extend_check(cfg, &mut dir, &mut timer)?,
        Command::Minimize => minimize(cfg, &mut dir, &mut timer)?,
        Command::SweepLambda => sweep(cfg, &mut dir, &mut timer)?,
        Command::MoveBoundary => move_boundary(cfg, &mut dir, &mut timer)?,
        Command::Constants => constants(cfg, &mut dir, &mut timer)?,
        Command::Pohozaev => pohozaev(cfg, &mut dir, &mut timer)?,
    }
    let versions = BTreeMap::from([
        ("fraclap".to_owned(), env!("CARGO_PKG_VERSION").to_owned()),
        ("fraclap-core".to_owned(), fraclap_core::VERSION.to_owned()),
    ]);
    let mut manifest = RunManifest {
        subcommand: cmd.name().into(),
        config_hash: loaded.hash.clone(),
        config: serde_json::to_value(cfg).map_err(|e| CliError::Output(e.to_string()))?,
        overrides: loaded.overrides.clone(),
        artifacts: dir.artifacts().to_vec(),
        versions,
        timings: Vec::new(),
    };
    if manifest.artifacts.iter().any(|a| a.kind == ArtifactKind::Table) {
        let plots = timer.run(Stage::Output, || emit_plot_data(&manifest, dir.root()))?;
        manifest.artifacts.extend(plots);
    }
    manifest.timings = timer.timings;
    let path = dir.path(&format!("manifest-{}.json", cmd.name()));
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}

/// Directory a configuration's outputs go to.
pub fn run_dir(loaded: &LoadedConfig) -> std::path::PathBuf {
    Path::new(&loaded.config.output_dir).join(&loaded.hash)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigReport {
    pub free_dofs: usize,
    pub retained: usize,
    pub complete: bool,
    pub tensor: bool,
    pub s: f64,
    pub eigenvalues: Vec<f64>,
    pub fractional_eigenvalues: Vec<f64>,
    pub lambda_1s: f64,
    /// Over the first (at most 20) pairs.
    pub orthonormality_error: f64,
    pub residual_error: f64,
}

fn eig(cfg: &ExperimentConfig, dir: &mut RunDir, timer: &mut Timer) -> Result<()> {
    let p = timer.run(Stage::Setup, || problem(cfg, None))?;
    let count = cfg.eig.count.map_or(EigenCount::All, EigenCount::First);
    let basis = timer.run(Stage::Eigen, || eigendecompose(&p.ops, count, &eigen_options(cfg)).at(Stage::Eigen))?;
    let (ortho, resid) = basis.invariant_errors(basis.retained().min(20));
    let s = p.params.s();
    let report = EigReport {
        free_dofs: p.ops.free_count(),
        retained: basis.retained(),
        complete: basis.is_complete(),
        tensor: basis.is_tensor(),
        s,
        eigenvalues: basis.eigenvalues().to_vec(),
        fractional_eigenvalues: basis.eigenvalues().iter().map(|l| l.powf(s)).collect(),
        lambda_1s: lambda1s(&basis, &p.params),
        orthonormality_error: ortho,
        residual_error: resid,
    };
    let mut t = Table::new("eigenvalues", &["k", "lambda", "lambda_s"]);
    for (k, (l, ls)) in report.eigenvalues.iter().zip(&report.fractional_eigenvalues).enumerate() {
        t.push(vec![(k + 1).to_string(), num(*l), num(*ls)]);
    }
    dir.report("eig", &report)?;
    dir.table(&t)?;
    if cfg.eig.save_basis {
        basis.save_json(&dir.path("basis.json")).at(Stage::Output)?;
        dir.register("basis", "basis.json", ArtifactKind::Report);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FracApplyReport {
    pub modes: Vec<(usize, f64)>,
    pub truncated: bool,
    pub input_mass_norm: f64,
    pub output_mass_norm: f64,
    pub frac_norm: Option<f64>,
    /// `‖(−Δ)^s u − Σ c λ_k^s φ_k‖_M` relative to the second term.
    pub eigen_identity_error: f64,
    pub residual_mass: Option<f64>,
    pub tail_estimate: Option<f64>,
}

fn frac_apply_cmd(cfg: &ExperimentConfig, dir: &mut RunDir, timer: &mut Timer) -> Result<()> {
    let p = timer.run(Stage::Setup, || problem(cfg, None))?;
    let count = cfg.eig.count.map_or(EigenCount::All, EigenCount::First);
    let basis = timer.run(Stage::Eigen, || eigendecompose(&p.ops, count, &eigen_options(cfg)).at(Stage::Eigen))?;
    let modes = &cfg.frac_apply.modes;
    if modes.is_empty() || modes.iter().any(|&(k, _)| k == 0 || k > basis.retained()) {
        return Err(keyed(format!("mode indices must lie in 1..={}", basis.retained()), "frac_apply.modes"));
    }
    let s = p.params.s();
    let dofs = p.ops.dofs();
    let mut u = Field::zeros(dofs);
    let mut expected = Field::zeros(dofs);
    for &(k, c) in modes {
        let phi = basis.eigenvector(k - 1);
        u = u.plus(&phi.scaled(c));
        expected = expected.plus(&phi.scaled(c * basis.eigenvalues()[k - 1].powf(s)));
    }
    let (out, norm, residual_mass, tail) = timer.run(Stage::Eigen, || {
        if basis.is_complete() {
            Ok((frac_apply(&basis, &p.params, &u).at(Stage::Eigen)?, Some(frac_norm(&basis, &p.params, &u).at(Stage::Eigen)?), None, None))
        } else {
            let t = frac_apply_truncated(&basis, &p.params, &u);
            Ok((t.field, None, Some(t.residual_mass), Some(t.tail_estimate)))
        }
    })?;
    let report = FracApplyReport {
        modes: modes.clone(),
        truncated: !basis.is_complete(),
        input_mass_norm: m_norm(&p.ops, &u),
        output_mass_norm: m_norm(&p.ops, &out),
        frac_norm: norm,
        eigen_identity_error: m_norm(&p.ops, &out.plus(&expected.scaled(-1.0))) / m_norm(&p.ops, &expected),
        residual_mass,
        tail_estimate: tail,
    };
    let mut t = Table::new("frac_apply", &["node", "x", "y", "z", "u", "frac_u"]);
    for (i, (a, b)) in u.values().iter().zip(out.values()).enumerate() {
        let x = p.mesh.node_coords(i);
        t.push(vec![i.to_string(), num(x[0]), num(x[1]), num(x[2]), num(*a), num(*b)]);
    }
    dir.report("frac_apply", &report)?;
    dir.table(&t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtnRow {
    pub k: usize,
    pub lambda_s: f64,
    pub levels: usize,
    /// `‖dtn(extend(φ_k)) − λ_k^s φ_k‖_M / λ_k^s`.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryRow {
    pub field: String,
    pub frac_norm: f64,
    pub x_norm: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendCheckReport {
    pub height: f64,
    pub grading: f64,
    pub kappa: f64,
    pub scheme: DtnScheme,
    pub dtn: Vec<DtnRow>,
    /// Per mode: the error dropped when the y-levels doubled.
    pub decreasing_in_levels: Vec<bool>,
    pub isometry: Vec<IsometryRow>,
    pub max_extension_residual: f64,
}

fn extend_check(cfg: &ExperimentConfig, dir: &mut RunDir, timer: &mut Timer) -> Result<()> {
    let p = timer.run(Stage::Setup, || problem(cfg, None))?;
    let basis = timer.run(Stage::Eigen, || full_basis(cfg, &p.ops))?;
    let lambda1 = basis.eigenvalues()[0];
    let modes = cfg.extend_check.modes.clamp(1, basis.retained());
    let levels = [cfg.cylinder.levels, 2 * cfg.cylinder.levels];
    let scheme = cfg.solver.dtn_scheme;
    let s = p.params.s();
    let (solvers, dtn, max_res) = timer.run(Stage::Extension, || {
        let solvers = levels
            .iter()
            .map(|&j| cylinder_solver(cfg, &p.ops, &p.params, lambda1, j))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        let mut max_res: f64 = 0.0;
        for k in 0..modes {
            let phi = basis.eigenvector(k);
            let ls = basis.eigenvalues()[k].powf(s);
            for (ext, &j) in solvers.iter().zip(&levels) {
                let w = ext.extend(&phi).at(Stage::Extension)?;
                max_res = max_res.max(w.residual);
                let d = ext.dtn(&w, scheme).at(Stage::Extension)?;
                let error = m_norm(&p.ops, &d.plus(&phi.scaled(-ls))) / ls;
                rows.push(DtnRow { k: k + 1, lambda_s: ls, levels: j, error });
            }
        }
        Ok((solvers, rows, max_res))
    })?;
    let decreasing = dtn.chunks(2).map(|c| c[1].error < c[0].error).collect();
    let ext = &solvers[0];
    let mut fields = vec![("phi_1".to_owned(), basis.eigenvector(0))];
    if basis.retained() > 1 {
        fields.push(("phi_1+phi_2".to_owned(), basis.eigenvector(0).plus(&basis.eigenvector(1))));
    }
    let isometry = timer.run(Stage::Extension, || {
        fields
            .iter()
            .map(|(name, u)| {
                let fnorm = frac_norm(&basis, &p.params, u).at(Stage::Eigen)?;
                let xnorm = ext.x_norm(&ext.extend(u).at(Stage::Extension)?).at(Stage::Extension)?;
                Ok(IsometryRow { field: name.clone(), frac_norm: fnorm, x_norm: xnorm, relative: (xnorm - fnorm).abs() / fnorm })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let report = ExtendCheckReport {
        height: ext.cylinder().height,
        grading: ext.cylinder().grading,
        kappa: ext.kappa(),
        scheme,
        dtn,
        decreasing_in_levels: decreasing,
        isometry,
        max_extension_residual: max_res,
    };
    let mut t = Table::new("dtn", &["k", "levels", "lambda_s", "error"]);
    for r in &report.dtn {
        t.push(vec![r.k.to_string(), r.levels.to_string(), num(r.lambda_s), num(r.error)]);
    }
    let mut iso = Table::new("isometry", &["field", "frac_norm", "x_norm", "relative"]);
    for r in &report.isometry {
        iso.push(vec![r.field.clone(), num(r.frac_norm), num(r.x_norm), num(r.relative)]);
    }
    dir.report("extend_check", &report)?;
    dir.table(&t)?;
    dir.table(&iso)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeRun {
    pub lambda: f64,
    pub lambda_1s: f64,
    pub threshold: f64,
    pub witness: NonexistenceWitness,
    pub outcome: MinimizeOutcome,
    pub solution: Option<SolutionReport>,
    pub extremal: Vec<TestFunctionReport>,
}

fn minimize(cfg: &ExperimentConfig, dir: &mut RunDir, timer: &mut Timer) -> Result<()> {
    let p = timer.run(Stage::Setup, || problem(cfg, None))?;
    let basis = timer.run(Stage::Eigen, || full_basis(cfg, &p.ops))?;
    let norm = CriticalNorm::new(&p.mesh, &p.ops, cfg.solver.quadrature);
    let l1s = lambda1s(&basis, &p.params);
    let lambda = resolve_lambda(cfg, l1s)?;
    let threshold = concentration_threshold(&p.params).at(Stage::Constants)?;
    let (witness, outcome, solution) = timer.run(Stage::Minimize, || {
        let witness = first_mode_witness(&basis, &norm, &p.params, lambda).at(Stage::Minimize)?;
        let outcome = minimize_quotient(&basis, &norm, &p.params, lambda, None, &minimize_options(cfg)).at(Stage::Minimize)?;
        let solution = match outcome.minimizer() {
            Some(r) if r.s_lambda > 0.0 => Some(rescale_to_solution(r, &basis, &norm, &p.params).at(Stage::Minimize)?),
            _ => None,
        };
        Ok((witness, outcome, solution))
    })?;
    let extremal = match &cfg.extremal {
        None => Vec::new(),
        Some(x) => {
            let x0 = point(&x.x0, "extremal.x0")?;
            let ext = if x.extension_route {
                Some(timer.run(Stage::Extension, || cylinder_solver(cfg, &p.ops, &p.params, basis.eigenvalues()[0], cfg.cylinder.levels))?)
            } else {
                None
            };
            let route = ext.as_ref().map_or(EnergyRoute::Spectral(&basis), EnergyRoute::Extension);
            timer.run(Stage::Minimize, || {
                x.epsilons
                    .iter()
                    .map(|&eps| test_function_quotient(&p.mesh, &p.partition, route, &p.params, x0, x.rho, eps, lambda).at(Stage::Minimize))
                    .collect::<Result<Vec<_>>>()
            })?
        }
    };
    let run = MinimizeRun { lambda, lambda_1s: l1s, threshold, witness, outcome, solution, extremal };
    dir.report("minimize", &run)?;
    if let Some(r) = run.outcome.minimizer() {
        let mut t = Table::new("trace", &["iteration", "q", "step"]);
        for (i, e) in r.trace.iter().enumerate() {
            t.push(vec![i.to_string(), num(e.q), num(e.step)]);
        }
        dir.table(&t)?;
    }
    if !run.extremal.is_empty() {
        let mut t = Table::new("extremal", &["epsilon", "rho", "q", "energy", "l2_squared", "critical_squared", "below_threshold"]);
        for e in &run.extremal {
            let q = &e.quotient;
            t.push(vec![
                num(e.epsilon),
                num(e.rho),
                num(q.q),
                num(q.energy),
                num(q.l2_squared),
                num(q.critical_squared),
                (q.q < threshold).to_string(),
            ]);
        }
        dir.table(&t)?;
    }
    Ok(())
}

fn sweep(cfg: &ExperimentConfig, dir: &mut RunDir, timer: &mut Timer) -> Result<()> {
    let p = timer.run(Stage::Setup, || problem(cfg, None))?;
    let basis = timer.run(Stage::Eigen, || full_basis(cfg, &p.ops))?;
    let norm = CriticalNorm::new(&p.mesh, &p.ops, cfg.solver.quadrature);
    let l1s = lambda1s(&basis, &p.params);
    if cfg.lambda_grid.is_empty() {
        return Err(keyed("empty lambda grid", "lambda_grid"));
    }
    let grid: Vec<f64> = cfg.lambda_grid.iter().map(|&g| if cfg.lambda_grid_relative { g * l1s } else { g }).collect();
    let table = timer.run(Stage::Sweep, || {
        sweep_lambda(&basis, &norm, &p.params, &grid, &minimize_options(cfg), policy(cfg)).at(Stage::Sweep)
    })?;
    let mut t = Table::new(
        "sweep",
        &[
            "lambda",
            "nonexistence",
            "witness_q",
            "witness_closed_form",
            "s_lambda",
            "converged",
            "iterations",
            "el_residual",
            "max_abs",
            "inverse_participation",
            "below_threshold",
            "warm_started",
        ],
    );
    for r in &table.rows {
        t.push(vec![
            num(r.lambda),
            r.nonexistence.to_string(),
            num(r.witness_q),
            num(r.witness_closed_form),
            opt_num(r.s_lambda),
            opt_show(r.converged),
            opt_show(r.iterations),
            opt_num(r.el_residual),
            opt_num(r.max_abs),
            opt_num(r.inverse_participation),
            opt_show(r.below_threshold),
            r.warm_started.to_string(),
        ]);
    }
    dir.report("sweep", &table)?;
    dir.table(&t)
}

fn move_boundary(cfg: &ExperimentConfig, dir: &mut RunDir, timer: &mut Timer) -> Result<()> {
    let params = FracParams::new(cfg.s, cfg.domain.dim).at(Stage::Setup)?;
    let mv = &cfg.moving;
    if mv.alphas.is_empty() {
        return Err(keyed("moving.alphas is empty", "moving.alphas"));
    }
    let (mesh, family) = timer.run(Stage::Setup, || {
        let mesh = build_mesh(cfg, None)?;
        let anchor = parse_face(&mv.anchor, "moving.anchor")?;
        let family = moving_family(&mesh, anchor, &mv.alphas).at(Stage::Setup)?;
        Ok((mesh, family))
    })?;
    let opts = MovingBoundaryOptions {
        compute_s_tilde: mv.compute_s_tilde,
        quadrature: cfg.solver.quadrature,
        eigen: eigen_options(cfg),
        minimize: minimize_options(cfg),
        policy: policy(cfg),
    };
    let table = timer.run(Stage::MoveBoundary, || move_boundary_experiment(&mesh, &family, &params, &opts).at(Stage::MoveBoundary))?;
    let mut t = Table::new(
        "move_boundary",
        &[
            "alpha",
            "lambda_11",
            "lambda_1s",
            "holder_bound",
            "holder_below_threshold",
            "s_tilde",
            "s_tilde_converged",
            "s_tilde_below_threshold",
            "positive_eigenvector",
        ],
    );
    for r in &table.rows {
        t.push(vec![
            num(r.alpha),
            num(r.lambda_11),
            num(r.lambda_1s),
            num(r.holder_bound),
            r.holder_below_threshold.to_string(),
            opt_num(r.s_tilde),
            opt_show(r.s_tilde_converged),
            opt_show(r.s_tilde_below_threshold),
            r.positive_eigenvector.to_string(),
        ]);
    }
    dir.report("move_boundary", &table)?;
    dir.table(&t)
}

fn constants(cfg: &ExperimentConfig, dir: &mut RunDir, timer: &mut Timer) -> Result<()> {
    let report = timer.run(Stage::Constants, || {
        let params = FracParams::new(cfg.s, cfg.domain.dim).at(Stage::Constants)?;
        constants_report(&params).at(Stage::Constants)
    })?;
    dir.report("constants", &report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PohozaevLevel {
    pub level: usize,
    pub cells: usize,
    pub cylinder_levels: usize,
    pub lambda: f64,
    pub s_lambda: f64,
    pub converged: bool,
    pub iterations: usize,
    pub solution_residual: f64,
    pub positive: bool,
    pub report: PohozaevReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PohozaevStudy {
    pub x0: [f64; 3],
    pub levels: Vec<PohozaevLevel>,
    /// `relative` does not increase from one level to the next.
    pub nonincreasing: bool,
    /// Residual of the identity for `u ≡ 0` on the finest level.
    pub zero_field_residual: f64,
    /// Sufficient nonexistence condition on the domain's own partition.
    pub geometry: NonexistenceCheck,
    /// The same check on the configured cone, pure critical power.
    pub cone: Option<NonexistenceCheck>,
}

fn pohozaev(cfg: &ExperimentConfig, dir: &mut RunDir, timer: &mut Timer) -> Result<()> {
    let ph = &cfg.pohozaev;
    if ph.cells.is_empty() {
        return Err(keyed("pohozaev.cells is empty", "pohozaev.cells"));
    }
    let mut levels = Vec::new();
    let mut finest = None;
    for (i, (&n, &jj)) in ph.cells.iter().zip(&ph.cylinder_levels).enumerate() {
        let p = timer.run(Stage::Setup, || problem(cfg, Some(n)))?;
        let basis = timer.run(Stage::Eigen, || full_basis(cfg, &p.ops))?;
        let norm = CriticalNorm::new(&p.mesh, &p.ops, cfg.solver.quadrature);
        let lambda = resolve_lambda(cfg, lambda1s(&basis, &p.params))?;
        let x0 = match &ph.x0 {
            Some(v) => point(v, "pohozaev.x0")?,
            None => domain_center(&p.mesh),
        };
        let (r, sol) = timer.run(Stage::Minimize, || {
            let out = minimize_quotient(&basis, &norm, &p.params, lambda, None, &minimize_options(cfg)).at(Stage::Minimize)?;
            let r = match out {
                MinimizeOutcome::Minimizer(r) => r,
                MinimizeOutcome::Nonexistence(w) => {
                    return Err(CliError::Numerical {
                        stage: Stage::Minimize,
                        source: fraclap_core::Error::NonexistenceRegime { lambda, lambda_1s: w.lambda_1s },
                    })
                }
            };
            let sol = rescale_to_solution(&r, &basis, &norm, &p.params).at(Stage::Minimize)?;
            Ok((r, sol))
        })?;
        let spec = NonlinearitySpec::linear_plus_critical(lambda, &p.params).at(Stage::Pohozaev)?;
        let ext = timer.run(Stage::Extension, || cylinder_solver(cfg, &p.ops, &p.params, basis.eigenvalues()[0], jj))?;
        let report = timer.run(Stage::Pohozaev, || {
            pohozaev_for_field(&p.mesh, &p.partition, &ext, &sol.solution, &norm, &spec, &p.params, x0).at(Stage::Pohozaev)
        })?;
        levels.push(PohozaevLevel {
            level: i,
            cells: n,
            cylinder_levels: jj,
            lambda,
            s_lambda: r.s_lambda,
            converged: r.converged,
            iterations: r.iterations,
            solution_residual: sol.residual,
            positive: sol.positive,
            report,
        });
        finest = Some((p, ext, norm, spec, x0));
    }
    let (p, ext, norm, spec, x0) = finest.expect("at least one level");
    let zero = Field::zeros(p.ops.dofs());
    let zero_report = pohozaev_for_field(&p.mesh, &p.partition, &ext, &zero, &norm, &spec, &p.params, x0).at(Stage::Pohozaev)?;
    let geo = BoundaryGeometry::from_partition(&p.mesh, &p.partition).at(Stage::Pohozaev)?;
    let geometry = nonexistence_check(&geo, &spec, &p.params, x0, ph.t_max).at(Stage::Pohozaev)?;
    let cone = match &cfg.cone {
        None => None,
        Some(c) => {
            let cd = ConeDomain::new(cfg.domain.dim, c.radius, c.regularization).at(Stage::Pohozaev)?;
            let g = cd.geometry(c.cells).at(Stage::Pohozaev)?;
            let crit = NonlinearitySpec::critical(&p.params).at(Stage::Pohozaev)?;
            Some(nonexistence_check(&g, &crit, &p.params, cd.apex(), ph.t_max).at(Stage::Pohozaev)?)
        }
    };
    let nonincreasing = levels.windows(2).all(|w| w[1].report.relative <= w[0].report.relative);
    let study = PohozaevStudy { x0, levels, nonincreasing, zero_field_residual: zero_report.residual, geometry, cone };
    let mut t = Table::new(
        "pohozaev",
        &[
            "level",
            "cells",
            "cylinder_levels",
            "lambda",
            "s_lambda",
            "volume_uf",
            "volume_f",
            "lateral_neumann",
            "lateral_dirichlet",
            "boundary_neumann",
            "residual",
            "scale",
            "relative",
        ],
    );
    for l in &study.levels {
        let r = &l.report;
        t.push(vec![
            l.level.to_string(),
            l.cells.to_string(),
            l.cylinder_levels.to_string(),
            num(l.lambda),
            num(l.s_lambda),
            num(r.volume_uf),
            num(r.volume_f),
            num(r.lateral_neumann),
            num(r.lateral_dirichlet),
            num(r.boundary_neumann),
            num(r.residual),
            num(r.scale),
            num(r.relative),
        ]);
    }
    dir.report("pohozaev", &study)?;
    dir.table(&t)
}
