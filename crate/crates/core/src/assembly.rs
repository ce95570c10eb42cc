//! Q1 (multilinear) stiffness and consistent mass on the tensor grid.
//!
//! Dirichlet nodes are eliminated; the Neumann condition is natural and
//! needs no treatment. When the partition is face-aligned the operators are
//! Kronecker sums of per-axis 1-D matrices, which [`TensorFactors`] keeps.

use crate::error::Result;
use crate::linalg::CsrMatrix;
use crate::mesh::{BoundaryPartition, Mesh, Side};
use nalgebra::DMatrix;

/// Free-node numbering after Dirichlet elimination.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    node_count: usize,
    free: Vec<usize>,
    node_to_free: Vec<Option<usize>>,
}

impl DofMap {
    pub fn new(dirichlet: &[bool]) -> Self {
        let mut free = Vec::new();
        let node_to_free = dirichlet
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                if d {
                    None
                } else {
                    free.push(i);
                    Some(free.len() - 1)
                }
            })
            .collect();
        DofMap { node_count: dirichlet.len(), free, node_to_free }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn free_count(&self) -> usize {
        self.free.len()
    }

    /// Node index of each free dof.
    pub fn free_nodes(&self) -> &[usize] {
        &self.free
    }

    pub fn free_index(&self, node: usize) -> Option<usize> {
        self.node_to_free[node]
    }

    pub fn is_dirichlet(&self, node: usize) -> bool {
        self.node_to_free[node].is_none()
    }

    pub fn scatter(&self, free: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.node_count];
        for (k, &n) in self.free.iter().enumerate() {
            out[n] = free[k];
        }
        out
    }

    pub fn gather(&self, nodal: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&n| nodal[n]).collect()
    }
}

/// One axis of a Kronecker-structured operator, restricted to the free 1-D
/// nodes `first_free .. first_free + stiffness.nrows()`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisFactor {
    pub stiffness: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub first_free: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorFactors {
    pub axes: Vec<AxisFactor>,
}

impl TensorFactors {
    pub fn dims(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.stiffness.nrows()).collect()
    }
}

/// Stiffness `A`, mass `M` on free nodes plus bookkeeping.
#[derive(Debug, Clone)]
pub struct OperatorPair {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    dofs: DofMap,
    /// Row sums of the unreduced mass matrix, per node.
    lumped_nodal: Vec<f64>,
    tensor: Option<TensorFactors>,
    interior: Vec<bool>,
    mesh_key: String,
    partition_key: String,
    dim: usize,
    volume: f64,
}

impl OperatorPair {
    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn free_count(&self) -> usize {
        self.dofs.free_count()
    }

    pub fn lumped_nodal(&self) -> &[f64] {
        &self.lumped_nodal
    }

    pub fn lumped_free(&self) -> Vec<f64> {
        self.dofs.gather(&self.lumped_nodal)
    }

    pub fn tensor(&self) -> Option<&TensorFactors> {
        self.tensor.as_ref()
    }

    /// Drops the Kronecker factors so every consumer takes the general path.
    pub fn without_tensor(mut self) -> Self {
        self.tensor = None;
        self
    }

    /// True for free dofs whose node is not on ∂Ω.
    pub fn interior_free(&self) -> &[bool] {
        &self.interior
    }

    pub fn mesh_key(&self) -> &str {
        &self.mesh_key
    }

    pub fn partition_key(&self) -> &str {
        &self.partition_key
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }
}

/// 1-D linear element matrices on a cell of width h.
fn element_1d(h: f64) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    ([[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]], [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]])
}

/// Element stiffness and mass for a Q1 cell, local nodes ordered as in
/// [`Mesh::cell_nodes`].
fn element_matrices(mesh: &Mesh) -> (Vec<f64>, Vec<f64>) {
    let dim = mesh.dim();
    let nl = 1usize << dim;
    let per_axis: Vec<_> = (0..dim).map(|d| element_1d(mesh.spacing(d))).collect();
    let mut ke = vec![0.0; nl * nl];
    let mut me = vec![0.0; nl * nl];
    for a in 0..nl {
        for b in 0..nl {
            let bit = |l: usize, d: usize| (l >> d) & 1;
            let mass: f64 = (0..dim).map(|d| per_axis[d].1[bit(a, d)][bit(b, d)]).product();
            let stiff: f64 = (0..dim)
                .map(|d| {
                    (0..dim)
                        .map(|e| if e == d { per_axis[e].0[bit(a, e)][bit(b, e)] } else { per_axis[e].1[bit(a, e)][bit(b, e)] })
                        .product::<f64>()
                })
                .sum();
            ke[a * nl + b] = stiff;
            me[a * nl + b] = mass;
        }
    }
    (ke, me)
}

fn axis_matrices(mesh: &Mesh, axis: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = mesh.nodes_along(axis);
    let (k, m) = element_1d(mesh.spacing(axis));
    let mut kk = DMatrix::zeros(n, n);
    let mut mm = DMatrix::zeros(n, n);
    for c in 0..n - 1 {
        for a in 0..2 {
            for b in 0..2 {
                kk[(c + a, c + b)] += k[a][b];
                mm[(c + a, c + b)] += m[a][b];
            }
        }
    }
    (kk, mm)
}

/// Assembles the mixed-BC Laplacian pair on the free nodes of `partition`.
pub fn assemble_operators(mesh: &Mesh, partition: &BoundaryPartition) -> Result<OperatorPair> {
    partition.check_mesh(mesh)?;
    let dirichlet = partition.dirichlet_nodes(mesh);
    let dofs = DofMap::new(&dirichlet);
    let (ke, me) = element_matrices(mesh);
    let nl = 1usize << mesh.dim();
    let mut tk = Vec::with_capacity(mesh.cell_count() * nl * nl);
    let mut tm = Vec::with_capacity(mesh.cell_count() * nl * nl);
    for c in 0..mesh.cell_count() {
        let nodes = mesh.cell_nodes(mesh.cell_multi(c));
        for a in 0..nl {
            let Some(ia) = dofs.free_index(nodes[a]) else { continue };
            for b in 0..nl {
                let Some(ib) = dofs.free_index(nodes[b]) else { continue };
                tk.push((ia, ib, ke[a * nl + b]));
                tm.push((ia, ib, me[a * nl + b]));
            }
        }
    }
    let nf = dofs.free_count();
    let stiffness = CsrMatrix::from_triplets(nf, tk);
    let mass = CsrMatrix::from_triplets(nf, tm);

    let lumped_nodal = (0..mesh.node_count())
        .map(|i| {
            let m = mesh.node_multi(i);
            (0..mesh.dim())
                .map(|d| {
                    let h = mesh.spacing(d);
                    if m[d] == 0 || m[d] == mesh.cells()[d] {
                        0.5 * h
                    } else {
                        h
                    }
                })
                .product()
        })
        .collect();

    let tensor = partition.face_aligned(mesh).map(|faces| TensorFactors {
        axes: (0..mesh.dim())
            .map(|d| {
                let n = mesh.nodes_along(d);
                let lo = usize::from(faces.iter().any(|f| f.axis == d && f.side == Side::Low));
                let hi = n - usize::from(faces.iter().any(|f| f.axis == d && f.side == Side::High));
                let (k, m) = axis_matrices(mesh, d);
                AxisFactor {
                    stiffness: k.view((lo, lo), (hi - lo, hi - lo)).into_owned(),
                    mass: m.view((lo, lo), (hi - lo, hi - lo)).into_owned(),
                    first_free: lo,
                }
            })
            .collect(),
    });

    let interior = dofs.free_nodes().iter().map(|&n| !mesh.is_boundary_node(n)).collect();

    Ok(OperatorPair {
        stiffness,
        mass,
        dofs,
        lumped_nodal,
        tensor,
        interior,
        mesh_key: mesh.key(),
        partition_key: partition.key(),
        dim: mesh.dim(),
        volume: mesh.volume(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_tensor_mesh, partition_faces, Face};

    #[test]
    fn elimination_counts() {
        let m = build_tensor_mesh(1, &[[0.0, 1.0]], &[4]).unwrap();
        let p = partition_faces(&m, &[Face::new(0, Side::Low)]).unwrap();
        let ops = assemble_operators(&m, &p).unwrap();
        assert_eq!(ops.free_count(), 4);

        let m = build_tensor_mesh(2, &[[0.0, 1.0]; 2], &[4, 4]).unwrap();
        let p = partition_faces(&m, &[Face::new(0, Side::Low)]).unwrap();
        let ops = assemble_operators(&m, &p).unwrap();
        assert_eq!(ops.free_count(), 20);
    }

    #[test]
    fn operators_are_symmetric_and_mass_sums_to_volume() {
        let m = build_tensor_mesh(3, &[[0.0, 1.0], [0.0, 2.0], [0.0, 0.5]], &[3, 4, 2]).unwrap();
        let p = partition_faces(&m, &[Face::new(2, Side::Low)]).unwrap();
        let ops = assemble_operators(&m, &p).unwrap();
        assert!(ops.stiffness.is_symmetric(1e-14));
        assert!(ops.mass.is_symmetric(1e-14));
        let total: f64 = ops.lumped_nodal().iter().sum();
        assert!((total - 1.0).abs() < 1e-13);
        // constants lie in the kernel of the unreduced stiffness: rows of
        // interior nodes away from Σ_D sum to zero
        let sums = ops.stiffness.row_sums();
        for (k, &node) in ops.dofs().free_nodes().iter().enumerate() {
            if m.node_multi(node)[2] >= 2 {
                assert!(sums[k].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kronecker_factors_reproduce_assembly() {
        let m = build_tensor_mesh(2, &[[0.0, 1.0], [0.0, 1.5]], &[3, 4]).unwrap();
        let p = partition_faces(&m, &[Face::new(0, Side::Low), Face::new(1, Side::High)]).unwrap();
        let ops = assemble_operators(&m, &p).unwrap();
        let t = ops.tensor().unwrap();
        let (a0, a1) = (&t.axes[0], &t.axes[1]);
        let a = a1.mass.kronecker(&a0.stiffness) + a1.stiffness.kronecker(&a0.mass);
        let mm = a1.mass.kronecker(&a0.mass);
        assert!((a - ops.stiffness.to_dense()).norm() < 1e-13);
        assert!((mm - ops.mass.to_dense()).norm() < 1e-13);
    }
}
