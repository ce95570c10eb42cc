use fraclap_core::assembly::assemble_operators;
use fraclap_core::bn::*;
use fraclap_core::constants::concentration_threshold;
use fraclap_core::extension::*;
use fraclap_core::extremal::{test_function_quotient, EnergyRoute};
use fraclap_core::fractional::*;
use fraclap_core::mesh::*;
use fraclap_core::par::Parallelism;
use fraclap_core::pohozaev::*;
use fraclap_core::spectral::*;
use proptest::prelude::*;
use std::sync::OnceLock;

struct Problem {
    mesh: Mesh,
    partition: BoundaryPartition,
    basis: SpectralBasis,
    norm: CriticalNorm,
    params: FracParams,
}

fn build(dim: usize, n: usize) -> Problem {
    let mesh = build_tensor_mesh(dim, &vec![[0.0, 1.0]; dim], &vec![n; dim]).unwrap();
    let partition = partition_faces(&mesh, &[Face::new(dim - 1, Side::Low)]).unwrap();
    let ops = assemble_operators(&mesh, &partition).unwrap();
    let basis = eigendecompose(&ops, EigenCount::All, &EigenOptions::default()).unwrap();
    let norm = CriticalNorm::new(&mesh, &ops, Quadrature::Lumped);
    Problem { mesh, partition, basis, norm, params: FracParams::new(0.75, dim).unwrap() }
}

fn square() -> &'static Problem {
    static P: OnceLock<Problem> = OnceLock::new();
    P.get_or_init(|| build(2, 12))
}

fn minimize(p: &Problem, lambda: f64, init: Option<&Field>) -> MinimizerReport {
    let out = minimize_quotient(&p.basis, &p.norm, &p.params, lambda, init, &MinimizeOptions::default()).unwrap();
    out.minimizer().unwrap().clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn minimizer_invariants(frac in 0.05f64..0.95) {
        let p = square();
        let l1s = lambda1s(&p.basis, &p.params);
        let r = minimize(p, frac * l1s, None);
        prop_assert!(r.converged);
        prop_assert!(r.trace.windows(2).all(|w| w[1].q <= w[0].q));
        prop_assert!((r.critical_norm - 1.0).abs() < 1e-10);
        let w = first_mode_witness(&p.basis, &p.norm, &p.params, frac * l1s).unwrap();
        prop_assert!(r.s_lambda <= w.witness_q);
        prop_assert!((w.witness_q - w.closed_form).abs() < 1e-10 * w.closed_form.abs().max(1.0));
    }

    #[test]
    fn argmin_ignores_init_scale(frac in 0.1f64..0.9) {
        let p = square();
        let lambda = frac * lambda1s(&p.basis, &p.params);
        let init = Field::interpolate(&p.mesh, p.basis.operators().dofs(), |x| 0.2 + x[0] * x[1]);
        let a = minimize(p, lambda, Some(&init));
        let b = minimize(p, lambda, Some(&init.scaled(5.0)));
        prop_assert!((a.s_lambda - b.s_lambda).abs() < 1e-8);
    }
}

#[test]
fn sweep_flags_exactly_the_upper_grid() {
    let p = square();
    let l1s = lambda1s(&p.basis, &p.params);
    let grid: Vec<f64> = [0.0, 0.25, 0.5, 0.75, 1.0, 1.1].iter().map(|f| f * l1s).collect();
    let t = sweep_lambda(&p.basis, &p.norm, &p.params, &grid, &MinimizeOptions::default(), Parallelism::default()).unwrap();
    let flags: Vec<bool> = t.rows.iter().map(|r| r.nonexistence).collect();
    assert_eq!(flags, [false, false, false, false, true, true]);
    assert!(t.monotone);
    for r in &t.rows {
        assert!((r.witness_q - r.witness_closed_form).abs() < 1e-10);
        if let Some(s) = r.s_lambda {
            assert!(s < t.threshold);
        }
    }
}

#[test]
fn solution_solves_the_equation() {
    let p = square();
    let r = minimize(p, 0.5 * lambda1s(&p.basis, &p.params), None);
    let sol = rescale_to_solution(&r, &p.basis, &p.norm, &p.params).unwrap();
    assert!(sol.residual < 1e-6 && sol.positive);
    let k = r.s_lambda.powf(1.0 / (p.params.critical_exponent().unwrap() - 2.0));
    assert!((sol.k - k).abs() < 1e-14 * k);
}

#[test]
fn pohozaev_terms_on_the_cube() {
    let p = build(3, 6);
    let lambda = 0.5 * lambda1s(&p.basis, &p.params);
    let r = minimize(&p, lambda, None);
    let sol = rescale_to_solution(&r, &p.basis, &p.norm, &p.params).unwrap();
    let ops = p.basis.operators();
    let cyl = build_cylinder(default_height(p.basis.eigenvalues()[0]), 32, 3.0).unwrap();
    let ext = ExtensionSolver::new(ops, &cyl, &p.params, Parallelism::default()).unwrap();
    let spec = NonlinearitySpec::linear_plus_critical(lambda, &p.params).unwrap();
    let audit = |x0| pohozaev_for_field(&p.mesh, &p.partition, &ext, &sol.solution, &p.norm, &spec, &p.params, x0).unwrap();
    let center = audit(domain_center(&p.mesh));
    let shifted = audit([0.3, 0.6, 0.4]);
    assert!(center.relative < 0.1, "{center:?}");
    assert!(shifted.relative < 0.1, "{shifted:?}");
    assert!((center.boundary_neumann - shifted.boundary_neumann).abs() > 1e-3 * center.scale);
    assert!((center.residual - shifted.residual).abs() < 0.05 * center.scale);
    assert_eq!(center.recomputed_residual(), center.residual);

    let zero = Field::zeros(ops.dofs());
    let z = pohozaev_for_field(&p.mesh, &p.partition, &ext, &zero, &p.norm, &spec, &p.params, [0.5; 3]).unwrap();
    assert_eq!(z.residual, 0.0);
    assert_eq!(z.scale, 0.0);
}

#[test]
fn broad_extremal_sits_below_threshold() {
    let p = build(3, 12);
    let threshold = concentration_threshold(&p.params).unwrap();
    let lambda = 0.5 * lambda1s(&p.basis, &p.params);
    let r = test_function_quotient(&p.mesh, &p.partition, EnergyRoute::Spectral(&p.basis), &p.params, [0.5, 0.5, 1.0], 0.9, 0.35, lambda)
        .unwrap();
    assert!(r.quotient.q < threshold, "{} vs {threshold}", r.quotient.q);
}

#[test]
fn nonexistence_prediction_on_the_cone() {
    let params = FracParams::new(0.75, 2).unwrap();
    let cone = ConeDomain::new(2, 1.0, 0.0).unwrap();
    let geo = cone.geometry(16).unwrap();
    let crit = NonlinearitySpec::critical(&params).unwrap();
    let c = nonexistence_check(&geo, &crit, &params, cone.apex(), 5.0).unwrap();
    assert_eq!(c.prediction, Prediction::NoSolutionPredicted);
    assert!(c.neumann_max_abs <= 1e-10);
    let lin = NonlinearitySpec::linear_plus_critical(1.0, &params).unwrap();
    let c = nonexistence_check(&geo, &lin, &params, cone.apex(), 5.0).unwrap();
    assert_eq!(c.prediction, Prediction::NoPrediction);
}
