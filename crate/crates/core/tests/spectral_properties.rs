use fraclap_core::assembly::assemble_operators;
use fraclap_core::fractional::*;
use fraclap_core::linalg::dot;
use fraclap_core::mesh::*;
use fraclap_core::spectral::*;
use proptest::prelude::*;
use std::sync::OnceLock;

fn square_basis() -> &'static SpectralBasis {
    static B: OnceLock<SpectralBasis> = OnceLock::new();
    B.get_or_init(|| {
        let m = build_tensor_mesh(2, &[[0.0, 1.0]; 2], &[10, 10]).unwrap();
        let p = partition_faces(&m, &[Face::new(0, Side::Low), Face::new(1, Side::High)]).unwrap();
        let ops = assemble_operators(&m, &p).unwrap();
        eigendecompose(&ops, EigenCount::All, &EigenOptions::default()).unwrap()
    })
}

fn field_from(b: &SpectralBasis, raw: &[f64]) -> Field {
    let n = b.operators().free_count();
    let free: Vec<f64> = (0..n).map(|i| raw[i % raw.len()] * (1.0 + (i as f64 * 0.37).sin())).collect();
    Field::from_free(b.operators().dofs(), &free)
}

fn m_norm(b: &SpectralBasis, f: &Field) -> f64 {
    let v = f.free_values(b.operators().dofs());
    dot(&v, &b.operators().mass.mul_vec(&v)).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parseval(raw in prop::collection::vec(-1.0f64..1.0, 1..20)) {
        let b = square_basis();
        let u = field_from(b, &raw);
        let c = b.analyze(&u.free_values(b.operators().dofs()));
        let lhs = m_norm(b, &u).powi(2);
        let rhs: f64 = c.iter().map(|x| x * x).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.max(1e-300));
    }

    #[test]
    fn semigroup(raw in prop::collection::vec(-1.0f64..1.0, 1..20), s in 0.05f64..0.95, t in 0.05f64..0.95) {
        let b = square_basis();
        let u = field_from(b, &raw);
        let once = apply_spectral_power(b, s + t, &u).unwrap();
        let twice = apply_spectral_power(b, s, &apply_spectral_power(b, t, &u).unwrap()).unwrap();
        let scale = m_norm(b, &once);
        prop_assert!(m_norm(b, &once.plus(&twice.scaled(-1.0))) <= 1e-9 * scale);
    }

    #[test]
    fn linear_and_homogeneous(raw in prop::collection::vec(-1.0f64..1.0, 2..20), c in -5.0f64..5.0, s in 0.51f64..0.99) {
        let b = square_basis();
        let params = FracParams::new(s, 2).unwrap();
        let u = field_from(b, &raw);
        let v = field_from(b, &raw[1..]);
        let lhs = frac_apply(b, &params, &u.scaled(c).plus(&v)).unwrap();
        let rhs = frac_apply(b, &params, &u).unwrap().scaled(c).plus(&frac_apply(b, &params, &v).unwrap());
        let scale = m_norm(b, &lhs).max(m_norm(b, &rhs)).max(1e-300);
        prop_assert!(m_norm(b, &lhs.plus(&rhs.scaled(-1.0))) <= 1e-10 * scale);
        let n1 = frac_norm(b, &params, &u).unwrap();
        let nc = frac_norm(b, &params, &u.scaled(c)).unwrap();
        prop_assert!((nc - c.abs() * n1).abs() <= 1e-12 * nc.max(1e-300));
    }

    #[test]
    fn first_fractional_eigenvalue_is_a_power(s in 0.51f64..0.99) {
        let b = square_basis();
        let params = FracParams::new(s, 2).unwrap();
        let l1 = b.eigenvalues()[0];
        prop_assert!((lambda1s(b, &params) - l1.powf(s)).abs() <= 1e-12 * l1.powf(s));
    }
}

#[test]
fn more_dirichlet_raises_eigenvalues() {
    let m = build_tensor_mesh(2, &[[0.0, 1.0]; 2], &[12, 12]).unwrap();
    let small = partition_faces(&m, &[Face::new(0, Side::Low)]).unwrap();
    let large = partition_faces(&m, &[Face::new(0, Side::Low), Face::new(1, Side::Low)]).unwrap();
    let e = |p: &BoundaryPartition| {
        let ops = assemble_operators(&m, p).unwrap();
        eigendecompose(&ops, EigenCount::First(4), &EigenOptions::default()).unwrap().eigenvalues().to_vec()
    };
    let (a, b) = (e(&small), e(&large));
    for k in 0..4 {
        assert!(b[k] > a[k], "k={k}: {} vs {}", b[k], a[k]);
    }
}

#[test]
fn eigenvalues_scale_with_domain_size() {
    let base = build_tensor_mesh(2, &[[0.0, 1.0], [0.0, 1.0]], &[8, 8]).unwrap();
    let big = build_tensor_mesh(2, &[[0.0, 3.0], [0.0, 3.0]], &[8, 8]).unwrap();
    let ev = |m: &Mesh| {
        let p = partition_faces(m, &[Face::new(1, Side::Low)]).unwrap();
        let ops = assemble_operators(m, &p).unwrap();
        eigendecompose(&ops, EigenCount::All, &EigenOptions::default()).unwrap().eigenvalues().to_vec()
    };
    let (a, b) = (ev(&base), ev(&big));
    for (x, y) in a.iter().zip(&b) {
        assert!((x / 9.0 - y).abs() <= 1e-11 * y);
    }
}

#[test]
fn dense_and_tensor_paths_agree() {
    let m = build_tensor_mesh(2, &[[0.0, 1.0], [0.0, 2.0]], &[7, 9]).unwrap();
    let p = partition_faces(&m, &[Face::new(0, Side::High)]).unwrap();
    let ops = assemble_operators(&m, &p).unwrap();
    let t = eigendecompose(&ops, EigenCount::All, &EigenOptions::default()).unwrap();
    let d = eigendecompose(&ops, EigenCount::All, &EigenOptions { force_dense: true, ..Default::default() }).unwrap();
    assert!(t.is_tensor() && !d.is_tensor());
    for (x, y) in t.eigenvalues().iter().zip(d.eigenvalues()) {
        assert!((x - y).abs() <= 1e-10 * y);
    }
}

#[test]
fn basis_survives_json() {
    let b = square_basis();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("basis.json");
    b.save_json(&path).unwrap();
    let back = SpectralBasis::load_json(&path, b.operators()).unwrap();
    assert_eq!(back.eigenvalues(), b.eigenvalues());
    assert_eq!(back.eigenvector_free(3), b.eigenvector_free(3));
}
