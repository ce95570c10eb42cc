//! Critical quotient minimization.
//!
//! `Q_λ(u) = (‖u‖²_{H^s} − λ‖u‖²₂) / ‖u‖²_{p}` with `p = 2N/(N−2s)`. The
//! minimizer is found by projected descent on the unit sphere of the
//! discrete `L^p` norm, working in eigen-coefficients so the gradient can be
//! taken in the energy metric (preconditioned by `Λ^{-s}`).

use crate::assembly::OperatorPair;
use crate::constants;
use crate::error::{Error, Result};
use crate::extension::ExtensionSolver;
use crate::fractional::{frac_norm, lambda1s, FracParams, Field};
use crate::linalg::dot;
use crate::mesh::{BoundaryPartition, Mesh};
use crate::par::{self, Parallelism};
use crate::quadrature::gauss_legendre;
use crate::spectral::{eigendecompose, first_eigenpair, EigenCount, EigenOptions, SpectralBasis};
use crate::assembly::assemble_operators;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    /// Nodal powers weighted by the lumped mass.
    #[default]
    Lumped,
    /// Tensor two-point Gauss rule per cell on the Q1 interpolant.
    Gauss,
}

/// Discrete `‖u‖_p^p = Σ_q w_q |(Bu)_q|^p` for a sampling operator `B` on
/// free dofs.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalNorm {
    rows: Vec<Vec<(usize, f64)>>,
    weights: Vec<f64>,
    pub quadrature: Quadrature,
}

impl CriticalNorm {
    pub fn new(mesh: &Mesh, ops: &OperatorPair, quadrature: Quadrature) -> Self {
        match quadrature {
            Quadrature::Lumped => CriticalNorm {
                rows: (0..ops.free_count()).map(|i| vec![(i, 1.0)]).collect(),
                weights: ops.lumped_free(),
                quadrature,
            },
            Quadrature::Gauss => {
                let dim = mesh.dim();
                let (gx, gw) = gauss_legendre(2);
                let nl = 1usize << dim;
                let vol: f64 = (0..dim).map(|d| mesh.spacing(d)).product();
                let mut rows = Vec::new();
                let mut weights = Vec::new();
                for c in 0..mesh.cell_count() {
                    let nodes = mesh.cell_nodes(mesh.cell_multi(c));
                    for q in 0..nl {
                        let mut row = Vec::new();
                        let mut wq = vol;
                        for d in 0..dim {
                            wq *= 0.5 * gw[(q >> d) & 1];
                        }
                        for (l, &node) in nodes.iter().enumerate() {
                            let Some(k) = ops.dofs().free_index(node) else { continue };
                            let mut phi = 1.0;
                            for d in 0..dim {
                                let t = 0.5 * (1.0 + gx[(q >> d) & 1]);
                                phi *= if (l >> d) & 1 == 1 { t } else { 1.0 - t };
                            }
                            row.push((k, phi));
                        }
                        rows.push(row);
                        weights.push(wq);
                    }
                }
                CriticalNorm { rows, weights, quadrature }
            }
        }
    }

    fn sample(&self, u: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|&(k, v)| v * u[k]).sum()).collect()
    }

    /// `Σ w |Bu|^p`.
    pub fn power_sum(&self, u: &[f64], p: f64) -> f64 {
        self.sample(u).iter().zip(&self.weights).map(|(v, w)| w * v.abs().powf(p)).sum()
    }

    pub fn norm(&self, u: &[f64], p: f64) -> f64 {
        self.power_sum(u, p).powf(1.0 / p)
    }

    /// `Σ w g(Bu)`, the same rule applied to any pointwise integrand.
    pub fn integrate<G: Fn(f64) -> f64>(&self, u: &[f64], g: G) -> f64 {
        self.sample(u).iter().zip(&self.weights).map(|(v, w)| w * g(*v)).sum()
    }

    /// `Bᵀ(w |Bu|^{p−2} Bu)`, the dual vector of `∫|u|^{p−2} u ·`.
    pub fn dual_power(&self, u: &[f64], p: f64, n: usize) -> Vec<f64> {
        let bu = self.sample(u);
        let mut out = vec![0.0; n];
        for ((r, v), w) in self.rows.iter().zip(&bu).zip(&self.weights) {
            let g = w * v.abs().powf(p - 2.0) * v;
            for &(k, b) in r {
                out[k] += b * g;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Spectral,
    Extension,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientReport {
    pub energy: f64,
    pub l2_squared: f64,
    pub critical_squared: f64,
    pub lambda: f64,
    pub q: f64,
    pub route: Route,
}

impl QuotientReport {
    fn assemble(energy: f64, l2_squared: f64, critical_squared: f64, lambda: f64, route: Route) -> Self {
        QuotientReport { energy, l2_squared, critical_squared, lambda, q: (energy - lambda * l2_squared) / critical_squared, route }
    }
}

fn require_nonzero(u: &[f64]) -> Result<()> {
    if u.iter().all(|&v| v == 0.0) {
        Err(Error::InvalidInput("quotient of the zero function".into()))
    } else {
        Ok(())
    }
}

pub fn quotient(basis: &SpectralBasis, norm: &CriticalNorm, params: &FracParams, lambda: f64, u: &Field) -> Result<QuotientReport> {
    let p = params.critical_exponent()?;
    let ops = basis.operators();
    let uf = u.free_values(ops.dofs());
    require_nonzero(&uf)?;
    let energy = frac_norm(basis, params, u)?.powi(2);
    Ok(QuotientReport::assemble(energy, ops.mass.quad_form(&uf), norm.norm(&uf, p).powi(2), lambda, Route::Spectral))
}

/// Same quotient with the energy from the extension.
pub fn quotient_extension(
    ext: &ExtensionSolver,
    norm: &CriticalNorm,
    params: &FracParams,
    lambda: f64,
    u: &Field,
) -> Result<QuotientReport> {
    let p = params.critical_exponent()?;
    let ops = ext.operators();
    let uf = u.free_values(ops.dofs());
    require_nonzero(&uf)?;
    let energy = ext.x_norm(&ext.extend_free(&uf)?)?.powi(2);
    Ok(QuotientReport::assemble(energy, ops.mass.quad_form(&uf), norm.norm(&uf, p).powi(2), lambda, Route::Extension))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Gradient preconditioned by `Λ^{-s}` (the `H^s` Riesz map).
    #[default]
    Energy,
    /// Gradient in the mass inner product.
    Mass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    pub window: usize,
    pub window_rtol: f64,
    /// Relative Euler–Lagrange residual required, together with the window
    /// rule, before stopping.
    pub residual_tol: f64,
    pub armijo: f64,
    pub metric: Metric,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions { max_iter: 20_000, window: 25, window_rtol: 1e-10, residual_tol: 1e-7, armijo: 1e-4, metric: Metric::Energy }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Euler–Lagrange residual below tolerance and the window decrease
    /// below tolerance, or no longer representable.
    Window,
    /// Line search failed to decrease `Q` above the residual tolerance.
    Stalled,
    IterationCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub q: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizerReport {
    pub lambda: f64,
    pub minimizer: Field,
    pub s_lambda: f64,
    pub critical_norm: f64,
    pub trace: Vec<TraceEntry>,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Relative Euler–Lagrange residual at the minimizer.
    pub el_residual: f64,
    pub max_abs: f64,
    pub inverse_participation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonexistenceWitness {
    pub lambda: f64,
    pub lambda_1s: f64,
    /// `Q_λ(φ_1)` evaluated by quadrature.
    pub witness_q: f64,
    /// `(λ_{1,s} − λ)/‖φ_1‖²_p`.
    pub closed_form: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum MinimizeOutcome {
    Minimizer(MinimizerReport),
    Nonexistence(NonexistenceWitness),
}

impl MinimizeOutcome {
    pub fn minimizer(&self) -> Option<&MinimizerReport> {
        match self {
            MinimizeOutcome::Minimizer(r) => Some(r),
            MinimizeOutcome::Nonexistence(_) => None,
        }
    }
}

/// `Q_λ(φ_1)` both by quadrature and in closed form.
pub fn first_mode_witness(basis: &SpectralBasis, norm: &CriticalNorm, params: &FracParams, lambda: f64) -> Result<NonexistenceWitness> {
    let p = params.critical_exponent()?;
    let phi = basis.eigenvector(0);
    let l1s = lambda1s(basis, params);
    let q = quotient(basis, norm, params, lambda, &phi)?;
    let n2 = norm.norm(&basis.eigenvector_free(0), p).powi(2);
    Ok(NonexistenceWitness { lambda, lambda_1s: l1s, witness_q: q.q, closed_form: (l1s - lambda) / n2 })
}

/// State of one iterate, all in eigen-coefficients.
struct Iterate {
    u: Vec<f64>,
    q: f64,
    /// Coefficients of the dual gradient, `Φᵀ∇Q`.
    grad: Vec<f64>,
    /// Relative Euler–Lagrange residual.
    residual: f64,
}

struct Problem<'a> {
    basis: &'a SpectralBasis,
    norm: &'a CriticalNorm,
    lam_s: Vec<f64>,
    lambda: f64,
    p: f64,
}

impl Problem<'_> {
    fn normalize(&self, mut u: Vec<f64>) -> Vec<f64> {
        let n = self.norm.norm(&u, self.p);
        u.iter_mut().for_each(|v| *v /= n);
        u
    }

    /// `u` must be normalized.
    fn evaluate(&self, u: Vec<f64>) -> Iterate {
        let a = self.basis.analyze(&u);
        let q: f64 = a.iter().zip(&self.lam_s).map(|(a, l)| (l - self.lambda) * a * a).sum();
        let g = self.basis.analyze_dual(&self.norm.dual_power(&u, self.p, u.len()));
        // with ‖u‖_p = 1: ∇Q = 2(Λ^s − λ)a − 2Q Φᵀ(|u|^{p−2}u)
        let grad: Vec<f64> = (0..a.len()).map(|j| 2.0 * (self.lam_s[j] - self.lambda) * a[j] - 2.0 * q * g[j]).collect();
        let scale: f64 = a.iter().zip(&self.lam_s).map(|(a, l)| (l * a).powi(2)).sum::<f64>().sqrt();
        let residual = 0.5 * dot(&grad, &grad).sqrt() / scale;
        Iterate { u, q, grad, residual }
    }
}

fn diagnostics(u: &[f64]) -> (f64, f64) {
    let max_abs = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let s2: f64 = u.iter().map(|v| v * v).sum();
    let s4: f64 = u.iter().map(|v| v.powi(4)).sum();
    (max_abs, s4 / (s2 * s2))
}

/// Relative decrease of `Q` over the last `window` accepted steps, infinite
/// until that many steps exist.
pub fn window_decrease(trace: &[TraceEntry], window: usize) -> f64 {
    let k = trace.len();
    if k <= window {
        return f64::INFINITY;
    }
    let last = trace[k - 1].q;
    (trace[k - 1 - window].q - last) / last.abs()
}

/// Minimizes `Q_λ` over nonnegative fields. Returns the first-mode witness
/// instead when `λ ≥ λ_{1,s}`.
pub fn minimize_quotient(
    basis: &SpectralBasis,
    norm: &CriticalNorm,
    params: &FracParams,
    lambda: f64,
    init: Option<&Field>,
    opts: &MinimizeOptions,
) -> Result<MinimizeOutcome> {
    if !basis.is_complete() {
        return Err(Error::TruncatedBasis { retained: basis.retained(), total: basis.total() });
    }
    if !(lambda >= 0.0) {
        return Err(Error::Parameter(format!("lambda = {lambda} must be nonnegative")));
    }
    let witness = first_mode_witness(basis, norm, params, lambda)?;
    if witness.closed_form <= 0.0 {
        return Ok(MinimizeOutcome::Nonexistence(witness));
    }
    let dofs = basis.operators().dofs();
    let prob = Problem {
        basis,
        norm,
        lam_s: basis.eigenvalues().iter().map(|l| l.powf(params.s())).collect(),
        lambda,
        p: params.critical_exponent()?,
    };
    let start: Vec<f64> = match init {
        Some(f) => f.free_values(dofs),
        None => basis.eigenvector_free(0),
    };
    require_nonzero(&start)?;
    let start = prob.normalize(start.into_iter().map(f64::abs).collect());
    let mut it = prob.evaluate(start);
    let mut trace = vec![TraceEntry { q: it.q, step: 0.0 }];
    let mut step: f64 = 1.0;
    let weight = |j: usize| match opts.metric {
        Metric::Energy => prob.lam_s[j],
        Metric::Mass => 1.0,
    };
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut reason = StopReason::IterationCap;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        if it.residual < opts.residual_tol && window_decrease(&trace, opts.window) <= opts.window_rtol {
            reason = StopReason::Window;
            break;
        }
        let dir_coeff: Vec<f64> = match opts.metric {
            Metric::Energy => it.grad.iter().zip(&prob.lam_s).map(|(g, l)| g / l).collect(),
            Metric::Mass => it.grad.clone(),
        };
        let slope = dot(&it.grad, &dir_coeff);
        let dir = basis.synthesize(&dir_coeff);
        let coeffs = basis.analyze(&it.u);
        // Barzilai–Borwein trial step in the chosen metric
        let mut t = (2.0 * step).min(1e6);
        if let Some((pa, pg)) = &prev {
            let (mut ss, mut sy) = (0.0, 0.0);
            for j in 0..coeffs.len() {
                let sj = coeffs[j] - pa[j];
                ss += weight(j) * sj * sj;
                sy += sj * (it.grad[j] - pg[j]);
            }
            if sy > 0.0 && ss > 0.0 {
                t = (ss / sy).min(1e6);
            }
        }
        prev = Some((coeffs, it.grad.clone()));
        let mut accepted = None;
        for _ in 0..80 {
            let trial: Vec<f64> = it.u.iter().zip(&dir).map(|(u, d)| (u - t * d).abs()).collect();
            let next = prob.evaluate(prob.normalize(trial));
            if next.q <= it.q - opts.armijo * t * slope && next.q <= it.q {
                accepted = Some(next);
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some(next) => {
                step = t;
                it = next;
                iterations += 1;
                trace.push(TraceEntry { q: it.q, step: t });
            }
            None => {
                // below tolerance a failed search means no decrease is
                // representable, so every further window decrease is zero
                reason = if it.residual < opts.residual_tol { StopReason::Window } else { StopReason::Stalled };
                break;
            }
        }
    }
    let converged = match reason {
        StopReason::Window => true,
        StopReason::Stalled | StopReason::IterationCap => false,
    };
    let (max_abs, ipr) = diagnostics(&it.u);
    let critical_norm = norm.norm(&it.u, prob.p);
    Ok(MinimizeOutcome::Minimizer(MinimizerReport {
        lambda,
        minimizer: Field::from_free(dofs, &it.u),
        s_lambda: it.q,
        critical_norm,
        trace,
        iterations,
        converged,
        stop_reason: reason,
        el_residual: it.residual,
        max_abs,
        inverse_participation: ipr,
    }))
}

/// `S̃(Σ_D)`: the quotient infimum at λ = 0.
pub fn sobolev_constant_dirichlet(
    basis: &SpectralBasis,
    norm: &CriticalNorm,
    params: &FracParams,
    opts: &MinimizeOptions,
) -> Result<MinimizeOutcome> {
    minimize_quotient(basis, norm, params, 0.0, None, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub k: f64,
    pub solution: Field,
    /// `‖(−Δ)^s v − λv − v^{p−1}‖_M / ‖(−Δ)^s v‖_M` with the power term
    /// projected by the same quadrature as the critical norm.
    pub residual: f64,
    pub min_interior: f64,
    pub positive: bool,
    /// `½‖v‖²_{H^s} − λ/2 ‖v‖²₂ − (1/p) ∫|v|^p`.
    pub energy_functional: f64,
}

/// `v = S_λ^{1/(p−2)} u*` solves the critical equation.
pub fn rescale_to_solution(
    report: &MinimizerReport,
    basis: &SpectralBasis,
    norm: &CriticalNorm,
    params: &FracParams,
) -> Result<SolutionReport> {
    if !(report.s_lambda > 0.0) {
        return Err(Error::NonexistenceRegime { lambda: report.lambda, lambda_1s: lambda1s(basis, params) });
    }
    let p = params.critical_exponent()?;
    let ops = basis.operators();
    let k = report.s_lambda.powf(1.0 / (p - 2.0));
    let v: Vec<f64> = report.minimizer.free_values(ops.dofs()).iter().map(|u| k * u).collect();
    let a = basis.analyze(&v);
    let g = basis.analyze_dual(&norm.dual_power(&v, p, v.len()));
    let lam = basis.eigenvalues();
    let s = params.s();
    let mut r2 = 0.0;
    let mut f2 = 0.0;
    let mut energy = 0.0;
    for j in 0..a.len() {
        let ls = lam[j].powf(s);
        r2 += ((ls - report.lambda) * a[j] - g[j]).powi(2);
        f2 += (ls * a[j]).powi(2);
        energy += (ls - report.lambda) * a[j] * a[j];
    }
    let min_interior = v
        .iter()
        .zip(ops.interior_free())
        .filter(|(_, &i)| i)
        .map(|(x, _)| *x)
        .fold(f64::INFINITY, f64::min);
    Ok(SolutionReport {
        k,
        solution: Field::from_free(ops.dofs(), &v),
        residual: (r2 / f2).sqrt(),
        min_interior,
        positive: min_interior > 0.0,
        energy_functional: 0.5 * energy - norm.power_sum(&v, p) / p,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub nonexistence: bool,
    pub witness_q: f64,
    pub witness_closed_form: f64,
    pub s_lambda: Option<f64>,
    pub converged: Option<bool>,
    pub iterations: Option<usize>,
    pub el_residual: Option<f64>,
    pub max_abs: Option<f64>,
    pub inverse_participation: Option<f64>,
    pub below_threshold: Option<bool>,
    /// Restarted from the minimizer of the next smaller λ.
    pub warm_started: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub lambda_1s: f64,
    pub threshold: f64,
    pub rows: Vec<SweepRow>,
    /// Whether the `s_lambda` column is nonincreasing where defined.
    pub monotone: bool,
}

fn sweep_row(lambda: f64, w: NonexistenceWitness, m: Option<&MinimizerReport>, threshold: f64, warm_started: bool) -> SweepRow {
    SweepRow {
        lambda,
        nonexistence: m.is_none(),
        witness_q: w.witness_q,
        witness_closed_form: w.closed_form,
        s_lambda: m.map(|r| r.s_lambda),
        converged: m.map(|r| r.converged),
        iterations: m.map(|r| r.iterations),
        el_residual: m.map(|r| r.el_residual),
        max_abs: m.map(|r| r.max_abs),
        inverse_participation: m.map(|r| r.inverse_participation),
        below_threshold: m.map(|r| r.s_lambda < threshold),
        warm_started,
    }
}

/// One independent minimization per grid value, in parallel, then a
/// continuation pass in increasing λ: where `S_λ` rose above its left
/// neighbour, the run restarts from that neighbour's minimizer and keeps
/// the lower value.
pub fn sweep_lambda(
    basis: &SpectralBasis,
    norm: &CriticalNorm,
    params: &FracParams,
    grid: &[f64],
    opts: &MinimizeOptions,
    policy: Parallelism,
) -> Result<SweepTable> {
    let threshold = constants::concentration_threshold(params)?;
    let runs = par::map(policy, grid, |&lambda| -> Result<(NonexistenceWitness, MinimizeOutcome)> {
        Ok((first_mode_witness(basis, norm, params, lambda)?, minimize_quotient(basis, norm, params, lambda, None, opts)?))
    });
    let mut runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let mut warm = vec![false; grid.len()];
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]));
    let mut best: Option<usize> = None;
    for &i in &order {
        let Some(cur) = runs[i].1.minimizer().map(|r| r.s_lambda) else { continue };
        if let Some(j) = best {
            let prev = runs[j].1.minimizer().unwrap();
            if cur > prev.s_lambda {
                let init = prev.minimizer.clone();
                let again = minimize_quotient(basis, norm, params, grid[i], Some(&init), opts)?;
                if again.minimizer().is_some_and(|r| r.s_lambda < cur) {
                    runs[i].1 = again;
                    warm[i] = true;
                }
            }
        }
        best = Some(i);
    }
    let rows: Vec<SweepRow> = runs
        .into_iter()
        .zip(grid)
        .zip(warm)
        .map(|(((w, out), &lambda), warm)| sweep_row(lambda, w, out.minimizer(), threshold, warm))
        .collect();
    let mut defined: Vec<&SweepRow> = rows.iter().filter(|r| r.s_lambda.is_some()).collect();
    defined.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let monotone = defined.windows(2).all(|w| w[1].s_lambda.unwrap() <= w[0].s_lambda.unwrap() * (1.0 + 1e-9));
    Ok(SweepTable { lambda_1s: lambda1s(basis, params), threshold, rows, monotone })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovingBoundaryRow {
    pub alpha: f64,
    pub lambda_11: f64,
    pub lambda_1s: f64,
    /// `|Ω|^{2s/N} λ_{1,s}`, an upper bound for `S̃(Σ_D)`.
    pub holder_bound: f64,
    pub holder_below_threshold: bool,
    pub s_tilde: Option<f64>,
    pub s_tilde_converged: Option<bool>,
    pub s_tilde_below_threshold: Option<bool>,
    pub positive_eigenvector: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovingBoundaryTable {
    pub threshold: f64,
    pub rows: Vec<MovingBoundaryRow>,
    /// First (largest) α whose Hölder bound falls below the threshold.
    pub first_alpha_below: Option<f64>,
    pub strictly_decreasing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MovingBoundaryOptions {
    pub compute_s_tilde: bool,
    pub quadrature: Quadrature,
    pub eigen: EigenOptions,
    pub minimize: MinimizeOptions,
    pub policy: Parallelism,
}

impl Default for MovingBoundaryOptions {
    fn default() -> Self {
        MovingBoundaryOptions {
            compute_s_tilde: true,
            quadrature: Quadrature::Lumped,
            eigen: EigenOptions::default(),
            minimize: MinimizeOptions::default(),
            policy: Parallelism::default(),
        }
    }
}

/// λ_{1,1}, λ_{1,s}, the Hölder bound and optionally `S̃` along a family of
/// partitions, listed in the order given.
pub fn move_boundary_experiment(
    mesh: &Mesh,
    partitions: &[BoundaryPartition],
    params: &FracParams,
    opts: &MovingBoundaryOptions,
) -> Result<MovingBoundaryTable> {
    let threshold = constants::concentration_threshold(params)?;
    let n = mesh.dim() as f64;
    let vol_factor = mesh.volume().powf(2.0 * params.s() / n);
    let rows = par::map(opts.policy, partitions, |part| -> Result<MovingBoundaryRow> {
        let ops = assemble_operators(mesh, part)?;
        let fe = first_eigenpair(&ops, &opts.eigen)?;
        let l1s = fe.lambda.powf(params.s());
        let holder = vol_factor * l1s;
        let (mut s_tilde, mut conv) = (None, None);
        if opts.compute_s_tilde {
            let basis = eigendecompose(&ops, EigenCount::All, &opts.eigen)?;
            let norm = CriticalNorm::new(mesh, &ops, opts.quadrature);
            if let MinimizeOutcome::Minimizer(r) = sobolev_constant_dirichlet(&basis, &norm, params, &opts.minimize)? {
                s_tilde = Some(r.s_lambda);
                conv = Some(r.converged);
            }
        }
        Ok(MovingBoundaryRow {
            alpha: part.alpha(),
            lambda_11: fe.lambda,
            lambda_1s: l1s,
            holder_bound: holder,
            holder_below_threshold: holder < threshold,
            s_tilde,
            s_tilde_converged: conv,
            s_tilde_below_threshold: s_tilde.map(|v| v < threshold),
            positive_eigenvector: fe.positive,
        })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let first_alpha_below = rows.iter().find(|r| r.holder_below_threshold).map(|r| r.alpha);
    // ordered by decreasing α, λ must strictly decrease
    let mut by_alpha: Vec<&MovingBoundaryRow> = rows.iter().collect();
    by_alpha.sort_by(|a, b| b.alpha.total_cmp(&a.alpha));
    let strictly_decreasing = by_alpha.windows(2).all(|w| w[1].lambda_11 < w[0].lambda_11);
    Ok(MovingBoundaryTable { threshold, rows, first_alpha_below, strictly_decreasing })
}
