//! Axis-aligned tensor-product domains and their boundary decompositions.
//!
//! Nodes are numbered lexicographically with axis 0 running fastest.
//! Boundary facets are the (N-1)-dimensional faces of boundary cells; a
//! Dirichlet set is always a union of whole facets, and the nodes lying on
//! the closure of that union are the Dirichlet nodes.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Low,
    High,
}

/// One face of the bounding box, e.g. `{x = a_0}` is `Face { axis: 0, side: Low }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Face {
    pub axis: usize,
    pub side: Side,
}

impl Face {
    pub const fn new(axis: usize, side: Side) -> Self {
        Face { axis, side }
    }

    /// Parses names of the form `x-`, `x+`, `y-`, `y+`, `z-`, `z+`.
    pub fn parse(name: &str) -> Result<Self> {
        let mut chars = name.trim().chars();
        let axis = match chars.next() {
            Some('x') => 0,
            Some('y') => 1,
            Some('z') => 2,
            _ => return Err(Error::InvalidInput(format!("unknown face name {name:?}"))),
        };
        let side = match (chars.next(), chars.next()) {
            (Some('-'), None) => Side::Low,
            (Some('+'), None) => Side::High,
            _ => return Err(Error::InvalidInput(format!("unknown face name {name:?}"))),
        };
        Ok(Face { axis, side })
    }

    pub fn name(&self) -> String {
        let axis = ["x", "y", "z"][self.axis];
        let side = match self.side {
            Side::Low => "-",
            Side::High => "+",
        };
        format!("{axis}{side}")
    }

    /// Outward unit normal component along `self.axis`.
    pub fn outward_sign(&self) -> f64 {
        match self.side {
            Side::Low => -1.0,
            Side::High => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub face: Face,
    /// Multi-index of the boundary cell owning this facet (unused axes are 0).
    pub cell: [usize; 3],
    /// H_{N-1} measure; a 1-D boundary point counts as 1.
    pub measure: f64,
    pub centroid: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    extents: Vec<[f64; 2]>,
    cells: Vec<usize>,
    facets: Vec<Facet>,
}

#[derive(Serialize)]
struct MeshDescriptor<'a> {
    dim: usize,
    extents: &'a [[f64; 2]],
    cells: &'a [usize],
}

/// Builds the tensor grid on `Π_d [a_d, b_d]` with `n[d]` cells per axis.
pub fn build_tensor_mesh(dim: usize, extents: &[[f64; 2]], n: &[usize]) -> Result<Mesh> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidInput(format!("dimension {dim} not in {{1,2,3}}")));
    }
    if extents.len() != dim || n.len() != dim {
        return Err(Error::InvalidInput(format!(
            "expected {dim} extents and cell counts, got {} and {}",
            extents.len(),
            n.len()
        )));
    }
    for (d, (&[a, b], &nd)) in extents.iter().zip(n).enumerate() {
        if nd < 2 {
            return Err(Error::InvalidInput(format!("axis {d}: need at least 2 cells, got {nd}")));
        }
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidInput(format!("axis {d}: degenerate extent [{a}, {b}]")));
        }
    }
    let mut mesh = Mesh { dim, extents: extents.to_vec(), cells: n.to_vec(), facets: Vec::new() };
    mesh.facets = mesh.enumerate_facets();
    Ok(mesh)
}

impl Mesh {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extents(&self) -> &[[f64; 2]] {
        &self.extents
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn nodes_along(&self, axis: usize) -> usize {
        self.cells[axis] + 1
    }

    pub fn node_count(&self) -> usize {
        self.cells.iter().map(|n| n + 1).product()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let [a, b] = self.extents[axis];
        (b - a) / self.cells[axis] as f64
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        let [a, b] = self.extents[axis];
        if i == self.cells[axis] {
            b
        } else {
            a + i as f64 * self.spacing(axis)
        }
    }

    pub fn node_index(&self, multi: [usize; 3]) -> usize {
        let mut idx = 0;
        for d in (0..self.dim).rev() {
            idx = idx * (self.cells[d] + 1) + multi[d];
        }
        idx
    }

    pub fn node_multi(&self, mut idx: usize) -> [usize; 3] {
        let mut m = [0; 3];
        for d in 0..self.dim {
            let nd = self.cells[d] + 1;
            m[d] = idx % nd;
            idx /= nd;
        }
        m
    }

    pub fn node_coords(&self, idx: usize) -> [f64; 3] {
        let m = self.node_multi(idx);
        let mut x = [0.0; 3];
        for d in 0..self.dim {
            x[d] = self.coord(d, m[d]);
        }
        x
    }

    pub fn is_boundary_node(&self, idx: usize) -> bool {
        let m = self.node_multi(idx);
        (0..self.dim).any(|d| m[d] == 0 || m[d] == self.cells[d])
    }

    pub fn cell_multi(&self, mut idx: usize) -> [usize; 3] {
        let mut m = [0; 3];
        for d in 0..self.dim {
            m[d] = idx % self.cells[d];
            idx /= self.cells[d];
        }
        m
    }

    /// Corner nodes of a cell in local lexicographic order (bit d of the
    /// local index selects the upper node along axis d).
    pub fn cell_nodes(&self, cell: [usize; 3]) -> Vec<usize> {
        (0..1usize << self.dim)
            .map(|local| {
                let mut m = cell;
                for (d, md) in m.iter_mut().enumerate().take(self.dim) {
                    *md += (local >> d) & 1;
                }
                self.node_index(m)
            })
            .collect()
    }

    pub fn cell_center(&self, cell: [usize; 3]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for d in 0..self.dim {
            x[d] = self.coord(d, cell[d]) + 0.5 * self.spacing(d);
        }
        x
    }

    pub fn volume(&self) -> f64 {
        self.extents.iter().map(|[a, b]| b - a).product()
    }

    /// H_{N-1}(∂Ω) of the box (2 in 1-D by the point-counting convention).
    pub fn boundary_measure(&self) -> f64 {
        (0..self.dim).map(|d| 2.0 * self.face_measure(d)).sum()
    }

    /// Measure of either face orthogonal to `axis`.
    pub fn face_measure(&self, axis: usize) -> f64 {
        (0..self.dim).filter(|&e| e != axis).map(|e| self.extents[e][1] - self.extents[e][0]).product()
    }

    /// Nodes of a boundary facet.
    pub fn facet_nodes(&self, facet: &Facet) -> Vec<usize> {
        let along = match facet.face.side {
            Side::Low => 0,
            Side::High => 1,
        };
        let a = facet.face.axis;
        self.cell_nodes(facet.cell)
            .into_iter()
            .enumerate()
            .filter(|(local, _)| (local >> a) & 1 == along)
            .map(|(_, n)| n)
            .collect()
    }

    /// Stable content hash of (dim, extents, cells).
    pub fn key(&self) -> String {
        let desc = MeshDescriptor { dim: self.dim, extents: &self.extents, cells: &self.cells };
        short_hash(&serde_json::to_vec(&desc).expect("mesh descriptor serializes"))
    }

    fn enumerate_facets(&self) -> Vec<Facet> {
        let mut facets = Vec::with_capacity(self.boundary_facet_estimate());
        for axis in 0..self.dim {
            for side in [Side::Low, Side::High] {
                let transverse: Vec<usize> = (0..self.dim).filter(|&e| e != axis).collect();
                let count: usize = transverse.iter().map(|&e| self.cells[e]).product();
                for t in 0..count {
                    let mut cell = [0usize; 3];
                    let mut rem = t;
                    for &e in &transverse {
                        cell[e] = rem % self.cells[e];
                        rem /= self.cells[e];
                    }
                    cell[axis] = match side {
                        Side::Low => 0,
                        Side::High => self.cells[axis] - 1,
                    };
                    let measure: f64 = transverse.iter().map(|&e| self.spacing(e)).product();
                    let mut centroid = self.cell_center(cell);
                    centroid[axis] = match side {
                        Side::Low => self.extents[axis][0],
                        Side::High => self.extents[axis][1],
                    };
                    facets.push(Facet { face: Face { axis, side }, cell, measure, centroid });
                }
            }
        }
        facets
    }

    fn boundary_facet_estimate(&self) -> usize {
        (0..self.dim)
            .map(|a| 2 * (0..self.dim).filter(|&e| e != a).map(|e| self.cells[e]).product::<usize>())
            .sum()
    }
}

pub(crate) fn short_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    hex::encode(&digest[..8])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BcLabel {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPartition {
    mesh_key: String,
    labels: Vec<BcLabel>,
    alpha: f64,
}

impl BoundaryPartition {
    pub fn labels(&self) -> &[BcLabel] {
        &self.labels
    }

    /// H_{N-1}(Σ_D).
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mesh_key(&self) -> &str {
        &self.mesh_key
    }

    pub fn is_dirichlet(&self, facet: usize) -> bool {
        self.labels[facet] == BcLabel::Dirichlet
    }

    pub fn dirichlet_facets(&self) -> impl Iterator<Item = usize> + '_ {
        self.labels.iter().enumerate().filter(|(_, l)| **l == BcLabel::Dirichlet).map(|(i, _)| i)
    }

    pub fn key(&self) -> String {
        let labels: String =
            self.labels.iter().map(|l| if *l == BcLabel::Dirichlet { 'D' } else { 'N' }).collect();
        short_hash(format!("{}:{}", self.mesh_key, labels).as_bytes())
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.mesh_key != mesh.key() || self.labels.len() != mesh.facets().len() {
            return Err(Error::Mismatch("partition was built for a different mesh".into()));
        }
        Ok(())
    }

    /// Nodes on the closure of Σ_D.
    pub fn dirichlet_nodes(&self, mesh: &Mesh) -> Vec<bool> {
        let mut marked = vec![false; mesh.node_count()];
        for f in self.dirichlet_facets() {
            for n in mesh.facet_nodes(&mesh.facets()[f]) {
                marked[n] = true;
            }
        }
        marked
    }

    /// Labels are constant on each box face, so the Dirichlet node set is a
    /// tensor product of per-axis sets. Returns the Dirichlet faces if so.
    pub fn face_aligned(&self, mesh: &Mesh) -> Option<Vec<Face>> {
        let mut faces: Vec<(Face, Option<BcLabel>)> = Vec::new();
        for (f, facet) in mesh.facets().iter().enumerate() {
            match faces.iter_mut().find(|(face, _)| *face == facet.face) {
                Some((_, label)) => {
                    if *label != Some(self.labels[f]) {
                        return None;
                    }
                }
                None => faces.push((facet.face, Some(self.labels[f]))),
            }
        }
        Some(faces.into_iter().filter(|(_, l)| *l == Some(BcLabel::Dirichlet)).map(|(f, _)| f).collect())
    }
}

fn make_partition(mesh: &Mesh, labels: Vec<BcLabel>) -> Result<BoundaryPartition> {
    let n_dir = labels.iter().filter(|l| **l == BcLabel::Dirichlet).count();
    if n_dir == 0 {
        return Err(Error::Partition("selection marks no Dirichlet facet (H_{N-1}(Σ_D) = 0)".into()));
    }
    if n_dir == labels.len() {
        return Err(Error::Partition("selection leaves no Neumann facet (Σ_D = ∂Ω)".into()));
    }
    let alpha = mesh
        .facets()
        .iter()
        .zip(&labels)
        .filter(|(_, l)| **l == BcLabel::Dirichlet)
        .map(|(f, _)| f.measure)
        .sum();
    Ok(BoundaryPartition { mesh_key: mesh.key(), labels, alpha })
}

/// Labels every facet accepted by `selector` as Dirichlet, the rest Neumann.
pub fn partition_boundary<F>(mesh: &Mesh, selector: F) -> Result<BoundaryPartition>
where
    F: Fn(&Facet) -> bool,
{
    let labels =
        mesh.facets().iter().map(|f| if selector(f) { BcLabel::Dirichlet } else { BcLabel::Neumann }).collect();
    make_partition(mesh, labels)
}

pub fn partition_faces(mesh: &Mesh, faces: &[Face]) -> Result<BoundaryPartition> {
    for f in faces {
        if f.axis >= mesh.dim() {
            return Err(Error::InvalidInput(format!("face {} does not exist in {}-D", f.name(), mesh.dim())));
        }
    }
    partition_boundary(mesh, |facet| faces.contains(&facet.face))
}

/// Nested Dirichlet sets growing from `anchor`.
///
/// Facets are ordered with the anchor face first (its own facets in
/// lexicographic transverse order), followed by the remaining boundary
/// facets. Each requested alpha selects the longest prefix whose measure
/// does not exceed it, so alphas round down and the sets are nested.
pub fn moving_family(mesh: &Mesh, anchor: Face, alphas: &[f64]) -> Result<Vec<BoundaryPartition>> {
    if anchor.axis >= mesh.dim() {
        return Err(Error::InvalidInput(format!("anchor face {} does not exist", anchor.name())));
    }
    if alphas.is_empty() {
        return Err(Error::InvalidInput("empty alpha list".into()));
    }
    if alphas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("alphas must be strictly decreasing".into()));
    }
    let total = mesh.boundary_measure();
    let order: Vec<usize> = {
        let facets = mesh.facets();
        let mut ord: Vec<usize> = (0..facets.len()).filter(|&i| facets[i].face == anchor).collect();
        ord.extend((0..facets.len()).filter(|&i| facets[i].face != anchor));
        ord
    };
    let mut cumulative = Vec::with_capacity(order.len());
    let mut acc = 0.0;
    for &i in &order {
        acc += mesh.facets()[i].measure;
        cumulative.push(acc);
    }

    alphas
        .iter()
        .map(|&alpha| {
            if !(alpha > 0.0) {
                return Err(Error::InvalidInput(format!("alpha {alpha} must be positive")));
            }
            if alpha >= total * (1.0 - 1e-12) {
                return Err(Error::Partition(format!(
                    "alpha {alpha} is not below the full boundary measure {total}"
                )));
            }
            let k = cumulative.iter().take_while(|&&c| c <= alpha * (1.0 + 1e-12)).count();
            if k == 0 {
                return Err(Error::Partition(format!(
                    "alpha {alpha} is smaller than the smallest facet; nothing to snap to"
                )));
            }
            let mut labels = vec![BcLabel::Neumann; mesh.facets().len()];
            for &i in &order[..k] {
                labels[i] = BcLabel::Dirichlet;
            }
            make_partition(mesh, labels)
        })
        .collect()
}

/// A facet of a polytope boundary with constant outward normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoFacet {
    pub centroid: [f64; 3],
    pub normal: [f64; 3],
    pub measure: f64,
    pub label: BcLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGeometry {
    pub dim: usize,
    pub facets: Vec<GeoFacet>,
}

impl BoundaryGeometry {
    pub fn from_partition(mesh: &Mesh, partition: &BoundaryPartition) -> Result<Self> {
        partition.check_mesh(mesh)?;
        let facets = mesh
            .facets()
            .iter()
            .zip(partition.labels())
            .map(|(f, &label)| {
                let mut normal = [0.0; 3];
                normal[f.face.axis] = f.face.outward_sign();
                GeoFacet { centroid: f.centroid, normal, measure: f.measure, label }
            })
            .collect();
        Ok(BoundaryGeometry { dim: mesh.dim(), facets })
    }
}

/// Staircase model of the cone `{t x : x ∈ A, 0 < t < 1}` with apex at the
/// origin: the box `[0, R]^N` seen from its corner. The lateral set (faces
/// through the apex) is Neumann, `cap` faces on the far side are Dirichlet.
/// A positive `regularization` cuts the corner cube `[0, ρ)^N` out of the
/// apex region, which tilts part of the lateral boundary away from the rays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeDomain {
    pub dim: usize,
    pub radius: f64,
    pub regularization: f64,
    /// Far faces (all `Side::High`) forming the Dirichlet cap.
    pub cap: Vec<Face>,
}

impl ConeDomain {
    pub fn new(dim: usize, radius: f64, regularization: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidInput(format!("dimension {dim} not in {{1,2,3}}")));
        }
        if !(radius > 0.0) || !(regularization >= 0.0) || regularization >= radius {
            return Err(Error::InvalidInput("need 0 <= rho < R".into()));
        }
        let cap = (0..dim).map(|a| Face::new(a, Side::High)).collect();
        Ok(ConeDomain { dim, radius, regularization, cap })
    }

    pub fn apex(&self) -> [f64; 3] {
        [0.0; 3]
    }

    /// Finite-element mesh of the unregularized cone.
    pub fn mesh(&self, n: usize) -> Result<Mesh> {
        build_tensor_mesh(self.dim, &vec![[0.0, self.radius]; self.dim], &vec![n; self.dim])
    }

    pub fn partition(&self, mesh: &Mesh) -> Result<BoundaryPartition> {
        partition_faces(mesh, &self.cap)
    }

    /// Boundary facets of the (possibly notched) staircase domain with `n`
    /// cells per axis; the notch is snapped to whole cells.
    pub fn geometry(&self, n: usize) -> Result<BoundaryGeometry> {
        let mesh = self.mesh(n)?;
        let h = mesh.spacing(0);
        let notch = (self.regularization / h).round() as usize;
        let inside = |c: [isize; 3]| -> bool {
            for d in 0..self.dim {
                if c[d] < 0 || c[d] >= n as isize {
                    return false;
                }
            }
            notch == 0 || (0..self.dim).any(|d| c[d] >= notch as isize)
        };
        let mut facets = Vec::new();
        for ci in 0..mesh.cell_count() {
            let cm = mesh.cell_multi(ci);
            let c = [cm[0] as isize, cm[1] as isize, cm[2] as isize];
            if !inside(c) {
                continue;
            }
            for axis in 0..self.dim {
                for side in [Side::Low, Side::High] {
                    let mut nb = c;
                    nb[axis] += if side == Side::Low { -1 } else { 1 };
                    if inside(nb) {
                        continue;
                    }
                    let mut centroid = mesh.cell_center(cm);
                    centroid[axis] += if side == Side::Low { -0.5 * h } else { 0.5 * h };
                    let mut normal = [0.0; 3];
                    normal[axis] = if side == Side::Low { -1.0 } else { 1.0 };
                    let on_cap = side == Side::High
                        && cm[axis] == n - 1
                        && self.cap.contains(&Face::new(axis, Side::High));
                    let measure = if self.dim == 1 { 1.0 } else { h.powi(self.dim as i32 - 1) };
                    facets.push(GeoFacet {
                        centroid,
                        normal,
                        measure,
                        label: if on_cap { BcLabel::Dirichlet } else { BcLabel::Neumann },
                    });
                }
            }
        }
        Ok(BoundaryGeometry { dim: self.dim, facets })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(dim: usize, n: usize) -> Mesh {
        build_tensor_mesh(dim, &vec![[0.0, 1.0]; dim], &vec![n; dim]).unwrap()
    }

    #[test]
    fn tensor_mesh_counts() {
        let m1 = unit(1, 4);
        assert_eq!(m1.node_count(), 5);
        assert_eq!(m1.facets().len(), 2);
        assert!(m1.facets().iter().all(|f| f.measure == 1.0));

        let m2 = unit(2, 4);
        assert_eq!(m2.node_count(), 25);
        assert_eq!(m2.facets().len(), 16);
        let total: f64 = m2.facets().iter().map(|f| f.measure).sum();
        assert!((total - 4.0).abs() < 1e-14);
        assert_eq!(m2.boundary_measure(), 4.0);

        let m3 = unit(3, 4);
        assert_eq!(m3.node_count(), 125);
        let total: f64 = m3.facets().iter().map(|f| f.measure).sum();
        assert!((total - 6.0).abs() < 1e-13);
    }

    #[test]
    fn tensor_mesh_rejects_bad_input() {
        assert!(build_tensor_mesh(4, &[[0.0, 1.0]; 4], &[2; 4]).is_err());
        assert!(build_tensor_mesh(0, &[], &[]).is_err());
        assert!(build_tensor_mesh(2, &[[0.0, 1.0]; 2], &[4, 1]).is_err());
        assert!(build_tensor_mesh(1, &[[1.0, 1.0]], &[4]).is_err());
    }

    #[test]
    fn node_indexing_round_trips() {
        let m = build_tensor_mesh(3, &[[0.0, 1.0], [0.0, 2.0], [-1.0, 1.0]], &[3, 4, 5]).unwrap();
        for i in 0..m.node_count() {
            assert_eq!(m.node_index(m.node_multi(i)), i);
        }
        assert_eq!(m.node_coords(m.node_count() - 1), [1.0, 2.0, 1.0]);
    }

    #[test]
    fn every_facet_lies_on_one_box_face() {
        let m = unit(3, 3);
        for f in m.facets() {
            let on: Vec<usize> = (0..3)
                .filter(|&d| f.centroid[d] == 0.0 || f.centroid[d] == 1.0)
                .collect();
            assert_eq!(on, vec![f.face.axis]);
            assert_eq!(m.facet_nodes(f).len(), 4);
        }
    }

    #[test]
    fn partition_examples() {
        let sq = unit(2, 4);
        let p = partition_faces(&sq, &[Face::new(0, Side::Low)]).unwrap();
        assert!((p.alpha() - 1.0).abs() < 1e-14);
        let cube = unit(3, 4);
        let p = partition_faces(&cube, &[Face::new(2, Side::Low)]).unwrap();
        assert!((p.alpha() - 1.0).abs() < 1e-14);
        assert!(matches!(partition_boundary(&sq, |_| false), Err(Error::Partition(_))));
        assert!(matches!(partition_boundary(&sq, |_| true), Err(Error::Partition(_))));
    }

    #[test]
    fn moving_family_examples() {
        let sq = unit(2, 4);
        let x0 = Face::new(0, Side::Low);
        let fam = moving_family(&sq, x0, &[1.0, 0.5, 0.25]).unwrap();
        let counts: Vec<usize> = fam.iter().map(|p| p.dirichlet_facets().count()).collect();
        assert_eq!(counts, vec![4, 2, 1]);

        let fam = moving_family(&sq, x0, &[0.5, 0.3]).unwrap();
        assert!((fam[1].alpha() - 0.25).abs() < 1e-15);

        let cube = unit(3, 2);
        assert!(moving_family(&cube, Face::new(2, Side::Low), &[6.0]).is_err());
        assert!(moving_family(&sq, x0, &[0.25, 0.5]).is_err());
        assert!(moving_family(&sq, x0, &[0.1]).is_err());
    }

    #[test]
    fn moving_family_is_nested_and_additive() {
        let sq = unit(2, 8);
        let fam = moving_family(&sq, Face::new(1, Side::High), &[2.5, 1.3, 0.9, 0.4, 0.2]).unwrap();
        for w in fam.windows(2) {
            for f in w[1].dirichlet_facets() {
                assert!(w[0].is_dirichlet(f));
            }
        }
        for p in &fam {
            let sum: f64 = p.dirichlet_facets().map(|f| sq.facets()[f].measure).sum();
            assert!((sum - p.alpha()).abs() <= 1e-12 * p.alpha());
        }
    }

    #[test]
    fn face_aligned_detection() {
        let sq = unit(2, 4);
        let p = partition_faces(&sq, &[Face::new(0, Side::Low), Face::new(1, Side::High)]).unwrap();
        assert_eq!(p.face_aligned(&sq).unwrap().len(), 2);
        let fam = moving_family(&sq, Face::new(0, Side::Low), &[0.5]).unwrap();
        assert!(fam[0].face_aligned(&sq).is_none());
    }

    #[test]
    fn face_names() {
        for name in ["x-", "x+", "y-", "y+", "z-", "z+"] {
            assert_eq!(Face::parse(name).unwrap().name(), name);
        }
        assert!(Face::parse("w+").is_err());
        assert!(Face::parse("x").is_err());
    }

    #[test]
    fn exact_cone_lateral_facets_are_radial() {
        let cone = ConeDomain::new(3, 1.0, 0.0).unwrap();
        let g = cone.geometry(4).unwrap();
        for f in &g.facets {
            let dot: f64 = (0..3).map(|d| f.centroid[d] * f.normal[d]).sum();
            match f.label {
                BcLabel::Neumann => assert_eq!(dot, 0.0),
                BcLabel::Dirichlet => assert!(dot > 0.0),
            }
        }
        let total: f64 = g.facets.iter().map(|f| f.measure).sum();
        assert!((total - 6.0).abs() < 1e-12);
    }

    #[test]
    fn regularized_cone_has_tilted_lateral_facets() {
        let cone = ConeDomain::new(2, 1.0, 0.25).unwrap();
        let g = cone.geometry(8).unwrap();
        let tilted = g
            .facets
            .iter()
            .filter(|f| f.label == BcLabel::Neumann)
            .filter(|f| (0..3).map(|d| f.centroid[d] * f.normal[d]).sum::<f64>().abs() > 1e-12)
            .count();
        assert_eq!(tilted, 4);
    }
}
