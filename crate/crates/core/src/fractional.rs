//! Spectral fractional powers, norms and the nodal [`Field`] type.

use crate::assembly::DofMap;
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::mesh::Mesh;
use crate::spectral::SpectralBasis;
use serde::{Deserialize, Serialize};

/// Fractional order and space dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracParams {
    s: f64,
    dim: usize,
}

impl FracParams {
    pub fn new(s: f64, dim: usize) -> Result<Self> {
        if !(s > 0.5 && s < 1.0) {
            return Err(Error::Parameter(format!("s = {s} outside (1/2, 1)")));
        }
        if dim == 0 {
            return Err(Error::Parameter("dimension must be positive".into()));
        }
        Ok(FracParams { s, dim })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `2N / (N − 2s)`, defined for N > 2s.
    pub fn critical_exponent(&self) -> Result<f64> {
        let n = self.dim as f64;
        if n <= 2.0 * self.s {
            return Err(Error::Parameter(format!("N = {} does not exceed 2s = {}", self.dim, 2.0 * self.s)));
        }
        Ok(2.0 * n / (n - 2.0 * self.s))
    }

    /// Whether N ≥ 4s, the dimension range of the existence theory. Recorded,
    /// never enforced.
    pub fn large_dimension(&self) -> bool {
        self.dim as f64 >= 4.0 * self.s
    }
}

/// Nodal values on Ω; zero on Dirichlet nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(dofs: &DofMap) -> Self {
        Field { values: vec![0.0; dofs.node_count()] }
    }

    pub fn from_free(dofs: &DofMap, free: &[f64]) -> Self {
        assert_eq!(free.len(), dofs.free_count(), "free vector length");
        Field { values: dofs.scatter(free) }
    }

    /// Wraps nodal values after checking finiteness and the Dirichlet zeros.
    pub fn from_nodal(dofs: &DofMap, values: Vec<f64>) -> Result<Self> {
        if values.len() != dofs.node_count() {
            return Err(Error::InvalidInput(format!("{} nodal values for {} nodes", values.len(), dofs.node_count())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value at node {i}")));
        }
        if let Some(i) = (0..values.len()).find(|&i| dofs.is_dirichlet(i) && values[i] != 0.0) {
            return Err(Error::InvalidInput(format!("nonzero value on Dirichlet node {i}")));
        }
        Ok(Field { values })
    }

    /// Nodal interpolant of `f`, forced to zero on Dirichlet nodes.
    pub fn interpolate<F: Fn([f64; 3]) -> f64>(mesh: &Mesh, dofs: &DofMap, f: F) -> Self {
        let values = (0..mesh.node_count())
            .map(|i| if dofs.is_dirichlet(i) { 0.0 } else { f(mesh.node_coords(i)) })
            .collect();
        Field { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn free_values(&self, dofs: &DofMap) -> Vec<f64> {
        dofs.gather(&self.values)
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field { values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn plus(&self, other: &Field) -> Field {
        assert_eq!(self.values.len(), other.values.len());
        Field { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Result of applying a power of the operator on a truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedApply {
    pub field: Field,
    /// `‖u‖²_M − Σ_{j≤m} a_j²`, the mass left outside the retained modes.
    pub residual_mass: f64,
    /// `residual_mass · λ_m^s`, the tail energy estimate from the last band.
    pub tail_estimate: f64,
}

fn require_complete(basis: &SpectralBasis) -> Result<()> {
    if basis.is_complete() {
        Ok(())
    } else {
        Err(Error::TruncatedBasis { retained: basis.retained(), total: basis.total() })
    }
}

/// `Σ a_j λ_j^t φ_j` on free dofs; any real `t`.
pub fn apply_power_free(basis: &SpectralBasis, t: f64, u: &[f64]) -> Vec<f64> {
    let a = basis.analyze(u);
    let c: Vec<f64> = a.iter().zip(basis.eigenvalues()).map(|(a, l)| a * l.powf(t)).collect();
    basis.synthesize(&c)
}

/// `(−Δ)^s u`; the basis must be complete.
pub fn frac_apply(basis: &SpectralBasis, params: &FracParams, u: &Field) -> Result<Field> {
    require_complete(basis)?;
    apply_spectral_power(basis, params.s(), u)
}

/// `(−Δ)^t u` for any real `t` on a complete basis.
pub fn apply_spectral_power(basis: &SpectralBasis, t: f64, u: &Field) -> Result<Field> {
    require_complete(basis)?;
    let dofs = basis.operators().dofs();
    Ok(Field::from_free(dofs, &apply_power_free(basis, t, &u.free_values(dofs))))
}

/// Explicit opt-in to a truncated spectrum, with the tail reported.
pub fn frac_apply_truncated(basis: &SpectralBasis, params: &FracParams, u: &Field) -> TruncatedApply {
    let ops = basis.operators();
    let uf = u.free_values(ops.dofs());
    let a = basis.analyze(&uf);
    let lams = basis.eigenvalues();
    let c: Vec<f64> = a.iter().zip(lams).map(|(a, l)| a * l.powf(params.s())).collect();
    let total = ops.mass.quad_form(&uf);
    let residual_mass = (total - dot(&a, &a)).max(0.0);
    let last = lams[lams.len() - 1];
    TruncatedApply {
        field: Field::from_free(ops.dofs(), &basis.synthesize(&c)),
        residual_mass,
        tail_estimate: residual_mass * last.powf(params.s()),
    }
}

/// `sqrt(Σ a_j² λ_j^s)`.
pub fn frac_norm(basis: &SpectralBasis, params: &FracParams, u: &Field) -> Result<f64> {
    require_complete(basis)?;
    let a = basis.analyze(&u.free_values(basis.operators().dofs()));
    Ok(a.iter().zip(basis.eigenvalues()).map(|(a, l)| a * a * l.powf(params.s())).sum::<f64>().sqrt())
}

/// `λ_{1,s} = λ_1^s`.
pub fn lambda1s(basis: &SpectralBasis, params: &FracParams) -> f64 {
    basis.eigenvalues()[0].powf(params.s())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_operators;
    use crate::mesh::{build_tensor_mesh, partition_faces, Face, Side};
    use crate::spectral::{eigendecompose, EigenCount, EigenOptions};
    use std::f64::consts::PI;

    fn interval_basis(n: usize, count: EigenCount) -> SpectralBasis {
        let m = build_tensor_mesh(1, &[[0.0, 1.0]], &[n]).unwrap();
        let p = partition_faces(&m, &[Face::new(0, Side::Low)]).unwrap();
        let ops = assemble_operators(&m, &p).unwrap();
        eigendecompose(&ops, count, &EigenOptions::default()).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(FracParams::new(0.5, 3).is_err());
        assert!(FracParams::new(1.0, 3).is_err());
        assert_eq!(FracParams::new(0.75, 3).unwrap().critical_exponent().unwrap(), 4.0);
        let p = FracParams::new(0.6, 3).unwrap().critical_exponent().unwrap();
        assert!((p - 10.0 / 3.0).abs() < 1e-14);
        assert_eq!(FracParams::new(0.75, 2).unwrap().critical_exponent().unwrap(), 8.0);
        assert!(FracParams::new(0.75, 1).unwrap().critical_exponent().is_err());
        assert!(FracParams::new(0.75, 3).unwrap().large_dimension());
        assert!(!FracParams::new(0.75, 2).unwrap().large_dimension());
    }

    #[test]
    fn eigenfunction_and_zero() {
        let b = interval_basis(256, EigenCount::All);
        let params = FracParams::new(0.75, 1).unwrap();
        let phi1 = b.eigenvector(0);
        let out = frac_apply(&b, &params, &phi1).unwrap();
        let expect = phi1.scaled(lambda1s(&b, &params));
        assert!(out.max_abs_diff(&expect) < 1e-10, "{}", out.max_abs_diff(&expect));
        let z = Field::zeros(b.operators().dofs());
        assert_eq!(frac_apply(&b, &params, &z).unwrap(), z);
        assert!((lambda1s(&b, &params) - (PI * PI / 4.0).powf(0.75)).abs() < 1e-3);
        assert!((lambda1s(&b, &params) - 1.9687).abs() < 1e-3);
    }

    #[test]
    fn norms_of_modes() {
        let b = interval_basis(64, EigenCount::All);
        let params = FracParams::new(0.75, 1).unwrap();
        let (l1, l2) = (b.eigenvalues()[0], b.eigenvalues()[1]);
        let u = b.eigenvector(0).plus(&b.eigenvector(1));
        let n = frac_norm(&b, &params, &u).unwrap();
        assert!((n - (l1.powf(0.75) + l2.powf(0.75)).sqrt()).abs() < 1e-10 * n);
        let n1 = frac_norm(&b, &params, &b.eigenvector(0)).unwrap();
        assert!((n1 - l1.powf(0.375)).abs() < 1e-10);
        let n3 = frac_norm(&b, &params, &u.scaled(-3.0)).unwrap();
        assert!((n3 - 3.0 * n).abs() < 1e-10 * n3);
    }

    #[test]
    fn truncation_needs_opt_in() {
        let b = interval_basis(32, EigenCount::First(4));
        let params = FracParams::new(0.75, 1).unwrap();
        let u = b.eigenvector(0);
        assert!(matches!(frac_apply(&b, &params, &u), Err(Error::TruncatedBasis { retained: 4, total: 32 })));
        let t = frac_apply_truncated(&b, &params, &u);
        assert!(t.residual_mass < 1e-12);
        let dofs = b.operators().dofs();
        let bump = Field::interpolate(&build_tensor_mesh(1, &[[0.0, 1.0]], &[32]).unwrap(), dofs, |x| x[0] * x[0]);
        let t = frac_apply_truncated(&b, &params, &bump);
        assert!(t.residual_mass > 0.0 && t.tail_estimate >= t.residual_mass * b.eigenvalues()[3].powf(0.75) * 0.999);
    }

    #[test]
    fn field_validation() {
        let m = build_tensor_mesh(1, &[[0.0, 1.0]], &[4]).unwrap();
        let p = partition_faces(&m, &[Face::new(0, Side::Low)]).unwrap();
        let ops = assemble_operators(&m, &p).unwrap();
        assert!(Field::from_nodal(ops.dofs(), vec![1.0, 1.0, 1.0, 1.0, 1.0]).is_err());
        assert!(Field::from_nodal(ops.dofs(), vec![0.0, 1.0, f64::NAN, 1.0, 1.0]).is_err());
        assert!(Field::from_nodal(ops.dofs(), vec![0.0; 4]).is_err());
        assert!(Field::from_nodal(ops.dofs(), vec![0.0, 1.0, 2.0, 1.0, 1.0]).is_ok());
    }
}
