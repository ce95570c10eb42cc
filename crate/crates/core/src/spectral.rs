//! Mass-orthonormal eigenbasis of the mixed-BC Laplacian.
//!
//! Three routes produce a [`SpectralBasis`]:
//!
//! * face-aligned partitions: products of per-axis 1-D eigenpairs
//!   (`A = Σ_d ⊗ ...`), exact and never densified;
//! * otherwise, dense Cholesky-reduced symmetric eigensolve up to
//!   [`EigenOptions::dof_cap`] free dofs;
//! * a handful of leading modes beyond the cap by block inverse iteration.

use crate::assembly::OperatorPair;
use crate::error::{Error, Result};
use crate::fractional::Field;
use crate::linalg::{self, dot, generalized_eigen, normalize_signs, SpdSolver};
use crate::par::{self, Parallelism};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const DEFAULT_DOF_CAP: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EigenCount {
    All,
    First(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    pub dof_cap: usize,
    /// Ignore Kronecker structure even when available.
    pub force_dense: bool,
    pub policy: Parallelism,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { dof_cap: DEFAULT_DOF_CAP, force_dense: false, policy: Parallelism::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct TensorBasis {
    dims: Vec<usize>,
    /// Per-axis eigenvalues and M_d-orthonormal eigenvectors.
    values: Vec<Vec<f64>>,
    vectors: Vec<DMatrix<f64>>,
    /// `Φ_dᵀ M_d`, the per-axis analysis operator.
    analysis: Vec<DMatrix<f64>>,
    /// Sorted position -> flat tensor index.
    order: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
enum Representation {
    Dense(DMatrix<f64>),
    Tensor(TensorBasis),
}

#[derive(Debug, Clone)]
pub struct SpectralBasis {
    eigenvalues: Vec<f64>,
    repr: Representation,
    ops: OperatorPair,
}

impl SpectralBasis {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn retained(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn total(&self) -> usize {
        self.ops.free_count()
    }

    pub fn is_complete(&self) -> bool {
        self.retained() == self.total()
    }

    pub fn is_tensor(&self) -> bool {
        matches!(self.repr, Representation::Tensor(_))
    }

    pub fn operators(&self) -> &OperatorPair {
        &self.ops
    }

    /// `a_j = φ_jᵀ M u` for the retained modes (u on free dofs).
    pub fn analyze(&self, u: &[f64]) -> Vec<f64> {
        match &self.repr {
            Representation::Dense(phi) => {
                let mu = self.ops.mass.mul_vec(u);
                let mu = linalg::to_dvector(&mu);
                (phi.tr_mul(&mu)).iter().copied().collect()
            }
            Representation::Tensor(t) => {
                let mut data = u.to_vec();
                for (axis, op) in t.analysis.iter().enumerate() {
                    data = apply_along_axis(&data, &t.dims, axis, op);
                }
                t.order[..self.retained()].iter().map(|&i| data[i]).collect()
            }
        }
    }

    /// `Φᵀ g` for a dual vector `g` (a load, not a field).
    pub fn analyze_dual(&self, g: &[f64]) -> Vec<f64> {
        match &self.repr {
            Representation::Dense(phi) => phi.tr_mul(&linalg::to_dvector(g)).iter().copied().collect(),
            Representation::Tensor(t) => {
                let mut data = g.to_vec();
                for (axis, v) in t.vectors.iter().enumerate() {
                    data = apply_along_axis(&data, &t.dims, axis, &v.transpose());
                }
                t.order[..self.retained()].iter().map(|&i| data[i]).collect()
            }
        }
    }

    /// `Σ_j c_j φ_j` on free dofs.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.retained());
        match &self.repr {
            Representation::Dense(phi) => (phi * linalg::to_dvector(coeffs)).iter().copied().collect(),
            Representation::Tensor(t) => {
                let mut data = vec![0.0; self.total()];
                for (k, &i) in t.order[..self.retained()].iter().enumerate() {
                    data[i] = coeffs[k];
                }
                for (axis, v) in t.vectors.iter().enumerate() {
                    data = apply_along_axis(&data, &t.dims, axis, v);
                }
                data
            }
        }
    }

    /// The k-th eigenvector (0-based) on free dofs.
    pub fn eigenvector_free(&self, k: usize) -> Vec<f64> {
        match &self.repr {
            Representation::Dense(phi) => phi.column(k).iter().copied().collect(),
            Representation::Tensor(_) => {
                let mut c = vec![0.0; self.retained()];
                c[k] = 1.0;
                self.synthesize(&c)
            }
        }
    }

    pub fn eigenvector(&self, k: usize) -> Field {
        Field::from_free(self.ops.dofs(), &self.eigenvector_free(k))
    }

    /// Largest deviation from M-orthonormality and largest scaled residual
    /// `‖Aφ − λMφ‖ / (λ ‖φ‖_M)` over the first `count` modes.
    pub fn invariant_errors(&self, count: usize) -> (f64, f64) {
        let count = count.min(self.retained());
        let vecs: Vec<Vec<f64>> = (0..count).map(|k| self.eigenvector_free(k)).collect();
        let mvecs: Vec<Vec<f64>> = vecs.iter().map(|v| self.ops.mass.mul_vec(v)).collect();
        let mut ortho: f64 = 0.0;
        let mut resid: f64 = 0.0;
        for i in 0..count {
            for j in 0..count {
                let e = if i == j { 1.0 } else { 0.0 };
                ortho = ortho.max((dot(&vecs[i], &mvecs[j]) - e).abs());
            }
            let av = self.ops.stiffness.mul_vec(&vecs[i]);
            let lam = self.eigenvalues[i];
            let r: Vec<f64> = av.iter().zip(&mvecs[i]).map(|(a, m)| a - lam * m).collect();
            let mnorm = dot(&vecs[i], &mvecs[i]).sqrt();
            resid = resid.max(linalg::norm2(&r) / (lam * mnorm));
        }
        (ortho, resid)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let artifact = BasisArtifact::from_basis(self);
        std::fs::write(path, serde_json::to_vec(&artifact)?)?;
        Ok(())
    }

    /// Reloads a basis previously saved for the same (mesh, partition).
    pub fn load_json(path: &Path, ops: &OperatorPair) -> Result<Self> {
        let artifact: BasisArtifact = serde_json::from_slice(&std::fs::read(path)?)?;
        artifact.into_basis(ops)
    }
}

/// On-disk form of a basis, keyed by the mesh and partition hashes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisArtifact {
    pub mesh_key: String,
    pub partition_key: String,
    pub eigenvalues: Vec<f64>,
    pub payload: ArtifactPayload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ArtifactPayload {
    Dense { rows: usize, cols: usize, column_major: Vec<f64> },
    Tensor { dims: Vec<usize>, axis_values: Vec<Vec<f64>>, axis_vectors: Vec<Vec<f64>>, order: Vec<usize> },
}

impl BasisArtifact {
    fn from_basis(b: &SpectralBasis) -> Self {
        let payload = match &b.repr {
            Representation::Dense(phi) => ArtifactPayload::Dense {
                rows: phi.nrows(),
                cols: phi.ncols(),
                column_major: phi.as_slice().to_vec(),
            },
            Representation::Tensor(t) => ArtifactPayload::Tensor {
                dims: t.dims.clone(),
                axis_values: t.values.clone(),
                axis_vectors: t.vectors.iter().map(|v| v.as_slice().to_vec()).collect(),
                order: t.order.clone(),
            },
        };
        BasisArtifact {
            mesh_key: b.ops.mesh_key().to_string(),
            partition_key: b.ops.partition_key().to_string(),
            eigenvalues: b.eigenvalues.clone(),
            payload,
        }
    }

    fn into_basis(self, ops: &OperatorPair) -> Result<SpectralBasis> {
        if self.mesh_key != ops.mesh_key() || self.partition_key != ops.partition_key() {
            return Err(Error::Mismatch(format!(
                "artifact keyed ({}, {}) does not match operators ({}, {})",
                self.mesh_key,
                self.partition_key,
                ops.mesh_key(),
                ops.partition_key()
            )));
        }
        let repr = match self.payload {
            ArtifactPayload::Dense { rows, cols, column_major } => {
                if rows != ops.free_count() || column_major.len() != rows * cols {
                    return Err(Error::Mismatch("dense payload has the wrong shape".into()));
                }
                Representation::Dense(DMatrix::from_column_slice(rows, cols, &column_major))
            }
            ArtifactPayload::Tensor { dims, axis_values, axis_vectors, order } => {
                let t = ops.tensor().ok_or_else(|| Error::Mismatch("tensor payload for non-separable operators".into()))?;
                let vectors: Vec<DMatrix<f64>> =
                    dims.iter().zip(&axis_vectors).map(|(&n, v)| DMatrix::from_column_slice(n, n, v)).collect();
                let analysis = vectors.iter().zip(&t.axes).map(|(v, ax)| v.transpose() * &ax.mass).collect();
                Representation::Tensor(TensorBasis { dims, values: axis_values, vectors, analysis, order })
            }
        };
        Ok(SpectralBasis { eigenvalues: self.eigenvalues, repr, ops: ops.clone() })
    }
}

/// `out[.., i, ..] = Σ_j mat[i, j] data[.., j, ..]` along `axis` of a flat
/// tensor with axis 0 fastest.
fn apply_along_axis(data: &[f64], dims: &[usize], axis: usize, mat: &DMatrix<f64>) -> Vec<f64> {
    let stride: usize = dims[..axis].iter().product();
    let n = dims[axis];
    let outer: usize = dims[axis + 1..].iter().product();
    let mut out = vec![0.0; data.len()];
    let mut line = vec![0.0; n];
    for o in 0..outer {
        for inner in 0..stride {
            for (j, l) in line.iter_mut().enumerate() {
                *l = data[(o * n + j) * stride + inner];
            }
            for i in 0..n {
                let mut s = 0.0;
                for (j, l) in line.iter().enumerate() {
                    s += mat[(i, j)] * l;
                }
                out[(o * n + i) * stride + inner] = s;
            }
        }
    }
    out
}

fn tensor_basis(ops: &OperatorPair, count: EigenCount) -> Result<(Vec<f64>, Representation)> {
    let t = ops.tensor().expect("tensor factors present");
    let dims = t.dims();
    let mut values = Vec::new();
    let mut vectors = Vec::new();
    let mut analysis = Vec::new();
    for ax in &t.axes {
        let (vals, mut vecs) = generalized_eigen(&ax.stiffness, &ax.mass)?;
        normalize_signs(&mut vecs);
        analysis.push(vecs.transpose() * &ax.mass);
        values.push(vals);
        vectors.push(vecs);
    }
    let total: usize = dims.iter().product();
    let flat_value = |mut idx: usize| -> f64 {
        let mut lam = 0.0;
        for (d, &n) in dims.iter().enumerate() {
            lam += values[d][idx % n];
            idx /= n;
        }
        lam
    };
    let lam: Vec<f64> = (0..total).map(flat_value).collect();
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&i, &j| lam[i].total_cmp(&lam[j]).then(i.cmp(&j)));
    let m = match count {
        EigenCount::All => total,
        EigenCount::First(m) => m.min(total),
    };
    let eigenvalues = order[..m].iter().map(|&i| lam[i]).collect();
    Ok((eigenvalues, Representation::Tensor(TensorBasis { dims, values, vectors, analysis, order })))
}

/// Leading `m` eigenpairs by block inverse iteration with Rayleigh–Ritz.
fn subspace_iteration(ops: &OperatorPair, m: usize, policy: Parallelism) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = ops.free_count();
    let k = (2 * m + 2).min(n);
    let solver = SpdSolver::new(ops.stiffness.clone())?;
    // deterministic start: a constant plus low-discrepancy perturbations
    let mut x: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            (0..n)
                .map(|i| {
                    if c == 0 {
                        1.0
                    } else {
                        let t = ((i as f64 + 1.0) * (c as f64 * 0.618_033_988_749_895 + 0.1)).fract();
                        t - 0.5
                    }
                })
                .collect()
        })
        .collect();
    let mut prev = vec![f64::INFINITY; m];
    for _ in 0..1000 {
        let y: Vec<Result<Vec<f64>>> = par::map(policy, &x, |v| solver.solve(&ops.mass.mul_vec(v)));
        let y: Vec<Vec<f64>> = y.into_iter().collect::<Result<_>>()?;
        let basis = m_orthonormalize(ops, y);
        let kk = basis.len();
        let ab: Vec<Vec<f64>> = basis.iter().map(|v| ops.stiffness.mul_vec(v)).collect();
        let mut ar = DMatrix::zeros(kk, kk);
        for i in 0..kk {
            for j in 0..kk {
                ar[(i, j)] = dot(&basis[i], &ab[j]);
            }
        }
        let ar = (&ar + ar.transpose()) * 0.5;
        let (theta, w) = generalized_eigen(&ar, &DMatrix::identity(kk, kk))?;
        x = (0..kk)
            .map(|c| {
                let mut v = vec![0.0; n];
                for (j, b) in basis.iter().enumerate() {
                    let wj = w[(j, c)];
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi += wj * bi;
                    }
                }
                v
            })
            .collect();
        let mut done = true;
        for j in 0..m {
            let av = ops.stiffness.mul_vec(&x[j]);
            let mv = ops.mass.mul_vec(&x[j]);
            let r: Vec<f64> = av.iter().zip(&mv).map(|(a, b)| a - theta[j] * b).collect();
            let rel = linalg::norm2(&r) / (theta[j] * dot(&x[j], &mv).sqrt());
            if rel > 1e-11 || (theta[j] - prev[j]).abs() > 1e-14 * theta[j] {
                done = false;
            }
            prev[j] = theta[j];
        }
        if done {
            let mut vecs = DMatrix::zeros(n, m);
            for j in 0..m {
                vecs.set_column(j, &linalg::to_dvector(&x[j]));
            }
            normalize_signs(&mut vecs);
            return Ok((theta[..m].to_vec(), vecs));
        }
    }
    Err(Error::Eigen("block inverse iteration did not converge".into()))
}

fn m_orthonormalize(ops: &OperatorPair, vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    let mut mout: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for mut v in vs {
        for _ in 0..2 {
            for (q, mq) in out.iter().zip(&mout) {
                let c = dot(&v, mq);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let mv = ops.mass.mul_vec(&v);
        let nrm = dot(&v, &mv).sqrt();
        if nrm > 1e-10 {
            v.iter_mut().for_each(|x| *x /= nrm);
            out.push(v);
            mout.push(mv.into_iter().map(|x| x / nrm).collect());
        }
    }
    out
}

/// Eigenpairs of `A φ = λ M φ`, ascending, M-orthonormal.
pub fn eigendecompose(ops: &OperatorPair, count: EigenCount, opts: &EigenOptions) -> Result<SpectralBasis> {
    let n = ops.free_count();
    if let EigenCount::First(m) = count {
        if m == 0 || m > n {
            return Err(Error::InvalidInput(format!("requested {m} eigenpairs of {n} free dofs")));
        }
    }
    let (eigenvalues, repr) = if ops.tensor().is_some() && !opts.force_dense {
        tensor_basis(ops, count)?
    } else if n <= opts.dof_cap {
        let (_, mut vecs) = generalized_eigen(&ops.stiffness.to_dense(), &ops.mass.to_dense())?;
        normalize_signs(&mut vecs);
        let m = match count {
            EigenCount::All => n,
            EigenCount::First(m) => m,
        };
        // Ritz values against the sparse pencil: the reduced problem loses
        // about eps·cond in the low eigenvalues, the quotient only its square
        let vals = (0..m)
            .map(|k| {
                let v: Vec<f64> = vecs.column(k).iter().copied().collect();
                ops.stiffness.quad_form(&v) / ops.mass.quad_form(&v)
            })
            .collect();
        (vals, Representation::Dense(vecs.columns(0, m).into_owned()))
    } else {
        match count {
            EigenCount::First(m) if m <= 32 => {
                let (vals, vecs) = subspace_iteration(ops, m, opts.policy)?;
                (vals, Representation::Dense(vecs))
            }
            _ => return Err(Error::DofCapExceeded { dofs: n, cap: opts.dof_cap }),
        }
    };
    if !(eigenvalues[0] > 0.0) {
        return Err(Error::Eigen(format!("first eigenvalue {} is not positive", eigenvalues[0])));
    }
    Ok(SpectralBasis { eigenvalues, repr, ops: ops.clone() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstEigenpair {
    pub lambda: f64,
    pub vector: Field,
    /// Smallest value over free nodes off ∂Ω.
    pub min_interior: f64,
    pub positive: bool,
}

/// λ_1 and its sign-normalized eigenvector; positivity on interior free
/// nodes is checked and reported rather than assumed.
pub fn first_eigenpair(ops: &OperatorPair, opts: &EigenOptions) -> Result<FirstEigenpair> {
    let (lambda, v) = if ops.tensor().is_some() && !opts.force_dense {
        let b = eigendecompose(ops, EigenCount::First(1), opts)?;
        (b.eigenvalues[0], b.eigenvector_free(0))
    } else {
        let (vals, vecs) = subspace_iteration(ops, 1, opts.policy)?;
        (vals[0], vecs.column(0).iter().copied().collect::<Vec<f64>>())
    };
    let min_interior = v
        .iter()
        .zip(ops.interior_free())
        .filter(|(_, &i)| i)
        .map(|(x, _)| *x)
        .fold(f64::INFINITY, f64::min);
    Ok(FirstEigenpair {
        lambda,
        vector: Field::from_free(ops.dofs(), &v),
        min_interior,
        positive: min_interior > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_operators;
    use crate::mesh::{build_tensor_mesh, moving_family, partition_faces, Face, Side};
    use std::f64::consts::PI;

    fn interval(n: usize) -> OperatorPair {
        let m = build_tensor_mesh(1, &[[0.0, 1.0]], &[n]).unwrap();
        let p = partition_faces(&m, &[Face::new(0, Side::Low)]).unwrap();
        assemble_operators(&m, &p).unwrap()
    }

    #[test]
    fn sturm_liouville_oracle() {
        let ops = interval(256);
        let b = eigendecompose(&ops, EigenCount::All, &EigenOptions::default()).unwrap();
        for k in 1..=5 {
            let exact = ((k as f64 - 0.5) * PI).powi(2);
            assert!((b.eigenvalues()[k - 1] / exact - 1.0).abs() < 0.01);
        }
        assert!((b.eigenvalues()[0] - PI * PI / 4.0).abs() < 1e-3);
    }

    #[test]
    fn dense_and_tensor_routes_agree() {
        let m = build_tensor_mesh(2, &[[0.0, 1.0], [0.0, 1.0]], &[6, 5]).unwrap();
        let p = partition_faces(&m, &[Face::new(0, Side::Low), Face::new(1, Side::High)]).unwrap();
        let ops = assemble_operators(&m, &p).unwrap();
        let t = eigendecompose(&ops, EigenCount::All, &EigenOptions::default()).unwrap();
        let d = eigendecompose(&ops, EigenCount::All, &EigenOptions { force_dense: true, ..Default::default() })
            .unwrap();
        assert!(t.is_tensor() && !d.is_tensor());
        for (a, b) in t.eigenvalues().iter().zip(d.eigenvalues()) {
            assert!((a - b).abs() < 1e-10 * b);
        }
        // mode 0 is simple, so the vectors coincide after sign normalization
        let (v0, w0) = (t.eigenvector_free(0), d.eigenvector_free(0));
        for (a, b) in v0.iter().zip(&w0) {
            assert!((a - b).abs() < 1e-9);
        }
        let u: Vec<f64> = (0..ops.free_count()).map(|i| (i as f64 * 0.3).cos()).collect();
        let (ct, cd) = (t.analyze(&u), d.analyze(&u));
        let energy_t: f64 = ct.iter().zip(t.eigenvalues()).map(|(c, l)| c * c * l).sum();
        let energy_d: f64 = cd.iter().zip(d.eigenvalues()).map(|(c, l)| c * c * l).sum();
        assert!((energy_t - energy_d).abs() < 1e-10 * energy_d);
        let back = t.synthesize(&ct);
        for (a, b) in back.iter().zip(&u) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn basis_invariants_hold() {
        let m = build_tensor_mesh(2, &[[0.0, 1.0]; 2], &[8, 8]).unwrap();
        let p = moving_family(&m, Face::new(0, Side::Low), &[0.5]).unwrap().remove(0);
        let ops = assemble_operators(&m, &p).unwrap();
        let b = eigendecompose(&ops, EigenCount::All, &EigenOptions::default()).unwrap();
        let (ortho, resid) = b.invariant_errors(b.retained());
        assert!(ortho < 1e-10, "orthonormality {ortho}");
        assert!(resid < 1e-8, "residual {resid}");
        let phi1 = b.eigenvector_free(0);
        let imax = (0..phi1.len()).max_by(|&i, &j| phi1[i].abs().total_cmp(&phi1[j].abs())).unwrap();
        assert!(phi1[imax] > 0.0);
    }

    #[test]
    fn truncation_and_iterative_route_match_full() {
        let m = build_tensor_mesh(2, &[[0.0, 1.0]; 2], &[10, 10]).unwrap();
        let p = moving_family(&m, Face::new(1, Side::Low), &[0.35]).unwrap().remove(0);
        let ops = assemble_operators(&m, &p).unwrap();
        let full = eigendecompose(&ops, EigenCount::All, &EigenOptions::default()).unwrap();
        let one = eigendecompose(&ops, EigenCount::First(1), &EigenOptions::default()).unwrap();
        assert!((one.eigenvalues()[0] - full.eigenvalues()[0]).abs() < 1e-10 * full.eigenvalues()[0]);
        let small_cap = EigenOptions { dof_cap: 10, ..Default::default() };
        let it = eigendecompose(&ops, EigenCount::First(3), &small_cap).unwrap();
        for k in 0..3 {
            assert!((it.eigenvalues()[k] - full.eigenvalues()[k]).abs() < 1e-10 * full.eigenvalues()[k]);
        }
        assert!(matches!(
            eigendecompose(&ops, EigenCount::All, &small_cap),
            Err(Error::DofCapExceeded { .. })
        ));
        let fe = first_eigenpair(&ops, &EigenOptions::default()).unwrap();
        assert!((fe.lambda - full.eigenvalues()[0]).abs() < 1e-10 * fe.lambda);
        assert!(fe.positive);
        let again = first_eigenpair(&ops, &EigenOptions::default()).unwrap();
        assert_eq!(fe, again);
    }

    #[test]
    fn first_eigenpair_refines_toward_oracle() {
        let exact = PI * PI / 4.0;
        let mut last_err = f64::INFINITY;
        for n in [8, 16, 32, 64] {
            let fe = first_eigenpair(&interval(n), &EigenOptions::default()).unwrap();
            let err = fe.lambda - exact;
            // conforming elements approximate from above
            assert!(err > 0.0 && err < last_err);
            assert!(fe.positive);
            last_err = err;
        }
    }

    #[test]
    fn artifact_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ops = interval(16);
        let b = eigendecompose(&ops, EigenCount::All, &EigenOptions::default()).unwrap();
        let path = dir.path().join("basis.json");
        b.save_json(&path).unwrap();
        let back = SpectralBasis::load_json(&path, &ops).unwrap();
        assert_eq!(back.eigenvalues(), b.eigenvalues());
        assert_eq!(back.eigenvector_free(3), b.eigenvector_free(3));
        let other = interval(8);
        assert!(SpectralBasis::load_json(&path, &other).is_err());
    }
}
