//! Weighted extension to the cylinder Ω×(0,Y) and its Dirichlet-to-Neumann
//! map.
//!
//! The discrete problem is Q1 in x times P1 in y with weight `y^{1−2s}`:
//!
//! ```text
//! (A ⊗ M_y + M ⊗ K_y) w = 0,   w(·,0) = u,   w(·,Y) = 0.
//! ```
//!
//! Diagonalizing the interior y-pencil `K_y v = μ M_y v` splits it into
//! independent shifted problems `(A + μ_k M) z_k = b_k`, one per y-mode.

use crate::assembly::OperatorPair;
use crate::constants;
use crate::error::{Error, Result};
use crate::fractional::{FracParams, Field};
use crate::linalg::{dot, generalized_eigen, norm2, SpdSolver};
use crate::par::{self, Parallelism};
use crate::quadrature::gauss_on;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Graded nodes `y_j = Y (j/J)^γ`, clustered at the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderMesh {
    pub height: f64,
    pub grading: f64,
    y: Vec<f64>,
}

pub const MIN_LEVELS: usize = 16;

pub fn build_cylinder(height: f64, levels: usize, grading: f64) -> Result<CylinderMesh> {
    if levels < MIN_LEVELS {
        return Err(Error::InvalidInput(format!("J = {levels} is below the minimum of {MIN_LEVELS}")));
    }
    if !(height > 0.0 && height.is_finite()) {
        return Err(Error::InvalidInput(format!("height {height} must be positive")));
    }
    if !(grading >= 1.0) {
        return Err(Error::InvalidInput(format!("grading {grading} must be at least 1")));
    }
    let y = (0..=levels).map(|j| height * (j as f64 / levels as f64).powf(grading)).collect();
    Ok(CylinderMesh { height, grading, y })
}

/// `Y = 6/√λ_1`, past which the slowest mode has decayed below `e^{-6}`.
pub fn default_height(lambda1: f64) -> f64 {
    6.0 / lambda1.sqrt()
}

impl CylinderMesh {
    pub fn levels(&self) -> usize {
        self.y.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.y
    }
}

/// `∫ y^a` and the weighted P1 mass matrix on `[y0, y1]`.
pub fn weighted_element(y0: f64, y1: f64, a: f64) -> (f64, [[f64; 2]; 2]) {
    let h = y1 - y0;
    if y0 == 0.0 || h >= 0.5 * y0 {
        let m = |k: f64| (y1.powf(a + k + 1.0) - y0.powf(a + k + 1.0)) / (a + k + 1.0);
        let (m0, m1, m2) = (m(0.0), m(1.0), m(2.0));
        let ll = (y1 * y1 * m0 - 2.0 * y1 * m1 + m2) / (h * h);
        let rr = (m2 - 2.0 * y0 * m1 + y0 * y0 * m0) / (h * h);
        let lr = ((y0 + y1) * m1 - y0 * y1 * m0 - m2) / (h * h);
        (m0, [[ll, lr], [lr, rr]])
    } else {
        // smooth weight on a short interval away from 0
        let mut m0 = 0.0;
        let mut mass = [[0.0; 2]; 2];
        for (y, w) in gauss_on(12, y0, y1) {
            let wy = w * y.powf(a);
            let phi = [(y1 - y) / h, (y - y0) / h];
            m0 += wy;
            for i in 0..2 {
                for j in 0..2 {
                    mass[i][j] += wy * phi[i] * phi[j];
                }
            }
        }
        (m0, mass)
    }
}

/// Weighted 1-D mass and stiffness on the full y-grid.
fn y_matrices(cyl: &CylinderMesh, a: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = cyl.y.len();
    let mut my = DMatrix::zeros(n, n);
    let mut ky = DMatrix::zeros(n, n);
    for j in 0..n - 1 {
        let (y0, y1) = (cyl.y[j], cyl.y[j + 1]);
        let (m0, me) = weighted_element(y0, y1, a);
        let k = m0 / ((y1 - y0) * (y1 - y0));
        for p in 0..2 {
            for q in 0..2 {
                my[(j + p, j + q)] += me[p][q];
                ky[(j + p, j + q)] += if p == q { k } else { -k };
            }
        }
    }
    (my, ky)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtnScheme {
    /// Residual of the trace row of the discrete system (a discrete Green
    /// formula); consistent with the extension energy.
    #[default]
    WeakFlux,
    /// `2s (u − w(·,y_1)) / y_1^{2s}` from the `y^{2s}` leading term.
    Extrapolated,
}

/// Solution on all levels, free x-dofs per level (level 0 is the trace).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionField {
    levels: Vec<Vec<f64>>,
    /// Relative residual of the global linear system.
    pub residual: f64,
}

impl ExtensionField {
    /// Wraps explicit level data, e.g. a competitor with a prescribed trace.
    pub fn from_levels(levels: Vec<Vec<f64>>) -> Result<Self> {
        let n = levels.first().map(Vec::len).unwrap_or(0);
        if levels.len() < 2 || levels.iter().any(|l| l.len() != n) {
            return Err(Error::InvalidInput("levels must be at least two vectors of equal length".into()));
        }
        Ok(ExtensionField { levels, residual: 0.0 })
    }

    pub fn level(&self, j: usize) -> &[f64] {
        &self.levels[j]
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn free_count(&self) -> usize {
        self.levels[0].len()
    }

    /// Level-major flat copy.
    pub fn values(&self) -> Vec<f64> {
        self.levels.concat()
    }
}

#[derive(Debug, Clone)]
pub struct ExtensionSolver {
    ops: OperatorPair,
    cylinder: CylinderMesh,
    s: f64,
    kappa: f64,
    my: DMatrix<f64>,
    ky: DMatrix<f64>,
    /// Interior y-eigenvectors, `M_y`-orthonormal, one column per mode.
    modes: DMatrix<f64>,
    shifts: Vec<f64>,
    solvers: Vec<SpdSolver>,
    mass_solver: SpdSolver,
    policy: Parallelism,
}

/// Tolerance on the global relative residual.
pub const EXTENSION_RTOL: f64 = 1e-10;

impl ExtensionSolver {
    pub fn new(ops: &OperatorPair, cylinder: &CylinderMesh, params: &FracParams, policy: Parallelism) -> Result<Self> {
        let s = params.s();
        let (y1, yy) = (cylinder.y[1], cylinder.height);
        if !(y1.powf(2.0 * s) < 0.01 * yy.powf(2.0 * s)) {
            return Err(Error::InvalidInput(format!(
                "first y-cell too coarse: y_1^(2s) = {:.3e} is not below 1% of Y^(2s)",
                y1.powf(2.0 * s)
            )));
        }
        let kappa = constants::kappa_s(params)?.kappa;
        let (my, ky) = y_matrices(cylinder, 1.0 - 2.0 * s);
        let ni = cylinder.levels() - 1;
        let (shifts, modes) = generalized_eigen(&ky.view((1, 1), (ni, ni)).into_owned(), &my.view((1, 1), (ni, ni)).into_owned())?;
        let solvers = par::map(policy, &shifts, |&mu| SpdSolver::new(ops.stiffness.add_scaled(mu, &ops.mass)));
        let solvers = solvers.into_iter().collect::<Result<Vec<_>>>()?;
        let mass_solver = SpdSolver::new(ops.mass.clone())?;
        Ok(ExtensionSolver {
            ops: ops.clone(),
            cylinder: cylinder.clone(),
            s,
            kappa,
            my,
            ky,
            modes,
            shifts,
            solvers,
            mass_solver,
            policy,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn cylinder(&self) -> &CylinderMesh {
        &self.cylinder
    }

    pub fn operators(&self) -> &OperatorPair {
        &self.ops
    }

    /// Weighted 1-D mass and stiffness on the y-grid.
    pub fn y_matrices(&self) -> (&DMatrix<f64>, &DMatrix<f64>) {
        (&self.my, &self.ky)
    }

    pub fn extend(&self, u: &Field) -> Result<ExtensionField> {
        self.extend_free(&u.free_values(self.ops.dofs()))
    }

    pub fn extend_free(&self, u: &[f64]) -> Result<ExtensionField> {
        let n = self.ops.free_count();
        let jj = self.cylinder.levels();
        let au = self.ops.stiffness.mul_vec(u);
        let mu = self.ops.mass.mul_vec(u);
        let (m10, k10) = (self.my[(1, 0)], self.ky[(1, 0)]);
        let r1: Vec<f64> = au.iter().zip(&mu).map(|(a, m)| -(m10 * a + k10 * m)).collect();
        let z = par::map_range(self.policy, self.shifts.len(), |k| {
            let c = self.modes[(0, k)];
            let b: Vec<f64> = r1.iter().map(|r| c * r).collect();
            self.solvers[k].solve(&b)
        });
        let z = z.into_iter().collect::<Result<Vec<_>>>()?;
        let mut levels = vec![u.to_vec()];
        for i in 1..jj {
            let mut w = vec![0.0; n];
            for (k, zk) in z.iter().enumerate() {
                let c = self.modes[(i - 1, k)];
                for (wi, zi) in w.iter_mut().zip(zk) {
                    *wi += c * zi;
                }
            }
            levels.push(w);
        }
        levels.push(vec![0.0; n]);
        let mut field = ExtensionField { levels, residual: 0.0 };
        let rnorm = norm2(&r1);
        if rnorm > 0.0 {
            field.residual = self.interior_residual(&field) / rnorm;
        }
        if !(field.residual <= EXTENSION_RTOL) {
            return Err(Error::SolverDivergence { residual: field.residual, iterations: self.shifts.len() });
        }
        Ok(field)
    }

    fn products(&self, w: &ExtensionField) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let aw = par::map(self.policy, &w.levels, |l| self.ops.stiffness.mul_vec(l));
        let mw = par::map(self.policy, &w.levels, |l| self.ops.mass.mul_vec(l));
        (aw, mw)
    }

    /// Row `i` of the global operator applied to `w`.
    fn row(&self, i: usize, aw: &[Vec<f64>], mw: &[Vec<f64>]) -> Vec<f64> {
        let jj = self.cylinder.levels();
        let mut r = vec![0.0; self.ops.free_count()];
        for j in i.saturating_sub(1)..=(i + 1).min(jj) {
            let (m, k) = (self.my[(i, j)], self.ky[(i, j)]);
            if m == 0.0 && k == 0.0 {
                continue;
            }
            for (ri, (a, b)) in r.iter_mut().zip(aw[j].iter().zip(&mw[j])) {
                *ri += m * a + k * b;
            }
        }
        r
    }

    fn interior_residual(&self, w: &ExtensionField) -> f64 {
        let (aw, mw) = self.products(w);
        (1..self.cylinder.levels())
            .map(|i| {
                let r = self.row(i, &aw, &mw);
                dot(&r, &r)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `κ_s · (−lim y^{1−2s} ∂_y w)` at y = 0, on free dofs.
    fn check_shape(&self, w: &ExtensionField) -> Result<()> {
        if w.level_count() != self.cylinder.levels() + 1 || w.free_count() != self.ops.free_count() {
            return Err(Error::Mismatch(format!(
                "extension field has {} levels of {} dofs, solver expects {} of {}",
                w.level_count(),
                w.free_count(),
                self.cylinder.levels() + 1,
                self.ops.free_count()
            )));
        }
        Ok(())
    }

    pub fn dtn_free(&self, w: &ExtensionField, scheme: DtnScheme) -> Result<Vec<f64>> {
        self.check_shape(w)?;
        match scheme {
            DtnScheme::WeakFlux => {
                // K_y row 0 written as k_0 (u − w_1) to avoid cancelling
                // two O(y_1^{-2s}) terms
                let (u, w1) = (&w.levels[0], &w.levels[1]);
                let au = self.ops.stiffness.mul_vec(u);
                let aw1 = self.ops.stiffness.mul_vec(w1);
                let d: Vec<f64> = u.iter().zip(w1).map(|(a, b)| a - b).collect();
                let md = self.ops.mass.mul_vec(&d);
                let (m00, m01, k0) = (self.my[(0, 0)], self.my[(0, 1)], self.ky[(0, 0)]);
                let flux: Vec<f64> =
                    (0..d.len()).map(|i| m00 * au[i] + m01 * aw1[i] + k0 * md[i]).collect();
                let g = self.mass_solver.solve(&flux)?;
                Ok(g.into_iter().map(|v| self.kappa * v).collect())
            }
            DtnScheme::Extrapolated => {
                let y1 = self.cylinder.y[1];
                let c = self.kappa * 2.0 * self.s / y1.powf(2.0 * self.s);
                Ok(w.levels[0].iter().zip(&w.levels[1]).map(|(u, w1)| c * (u - w1)).collect())
            }
        }
    }

    pub fn dtn(&self, w: &ExtensionField, scheme: DtnScheme) -> Result<Field> {
        Ok(Field::from_free(self.ops.dofs(), &self.dtn_free(w, scheme)?))
    }

    /// `sqrt(κ_s ∫ y^{1−2s} |∇w|²)`.
    pub fn x_norm(&self, w: &ExtensionField) -> Result<f64> {
        self.check_shape(w)?;
        let (aw, _) = self.products(w);
        let a = 1.0 - 2.0 * self.s;
        let y = &self.cylinder.y;
        let cells = par::map_range(self.policy, self.cylinder.levels(), |j| {
            let (m0, me) = weighted_element(y[j], y[j + 1], a);
            let k = m0 / ((y[j + 1] - y[j]) * (y[j + 1] - y[j]));
            let (w0, w1) = (&w.levels[j], &w.levels[j + 1]);
            let d: Vec<f64> = w0.iter().zip(w1).map(|(a, b)| a - b).collect();
            me[0][0] * dot(w0, &aw[j]) + 2.0 * me[0][1] * dot(w0, &aw[j + 1]) + me[1][1] * dot(w1, &aw[j + 1])
                + k * self.ops.mass.quad_form(&d)
        });
        Ok((self.kappa * cells.iter().sum::<f64>()).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_operators;
    use crate::mesh::{build_tensor_mesh, partition_faces, Face, Side};
    use crate::spectral::{eigendecompose, EigenCount, EigenOptions};

    #[test]
    fn cylinder_validation() {
        assert!(build_cylinder(1.0, 8, 3.0).is_err());
        assert!(build_cylinder(0.0, 32, 3.0).is_err());
        assert!(build_cylinder(1.0, 32, 0.5).is_err());
        let c = build_cylinder(2.0, 16, 3.0).unwrap();
        assert_eq!(c.nodes()[0], 0.0);
        assert_eq!(c.nodes()[16], 2.0);
        assert!(c.nodes()[1] < c.nodes()[16] / 16.0);
    }

    #[test]
    fn weighted_element_branches_agree() {
        let a = 1.0 - 2.0 * 0.75;
        for (y0, y1) in [(0.3, 0.4), (1.0, 1.01), (0.0, 0.1), (0.2, 0.5)] {
            let (m0, m) = weighted_element(y0, y1, a);
            let mut q0 = 0.0;
            let mut q = [[0.0; 2]; 2];
            // many-panel reference quadrature
            for p in 0..200 {
                let (a0, a1) = (y0 + (y1 - y0) * p as f64 / 200.0, y0 + (y1 - y0) * (p + 1) as f64 / 200.0);
                if a0 == 0.0 {
                    let (e0, _) = weighted_element(a0, a1, a);
                    q0 += e0;
                    let h = y1 - y0;
                    let mm = |k: f64| (a1.powf(a + k + 1.0)) / (a + k + 1.0);
                    q[0][0] += (y1 * y1 * mm(0.0) - 2.0 * y1 * mm(1.0) + mm(2.0)) / (h * h);
                    q[1][1] += mm(2.0) / (h * h);
                    q[0][1] += (y1 * mm(1.0) - mm(2.0)) / (h * h);
                    continue;
                }
                for (y, w) in gauss_on(12, a0, a1) {
                    let wy = w * y.powf(a);
                    let phi = [(y1 - y) / (y1 - y0), (y - y0) / (y1 - y0)];
                    q0 += wy;
                    for i in 0..2 {
                        for j in 0..2 {
                            q[i][j] += wy * phi[i] * phi[j];
                        }
                    }
                }
            }
            assert!((m0 - q0).abs() < 1e-12 * m0, "{y0} {y1}");
            assert!((m[0][0] - q[0][0]).abs() < 1e-12 * m0);
            assert!((m[1][1] - q[1][1]).abs() < 1e-12 * m0);
            assert!((m[0][1] - q[0][1]).abs() < 1e-12 * m0);
        }
    }

    #[test]
    fn interval_dtn_matches_spectral_power() {
        let m = build_tensor_mesh(1, &[[0.0, 1.0]], &[64]).unwrap();
        let p = partition_faces(&m, &[Face::new(0, Side::Low)]).unwrap();
        let ops = assemble_operators(&m, &p).unwrap();
        let b = eigendecompose(&ops, EigenCount::All, &EigenOptions::default()).unwrap();
        let params = FracParams::new(0.75, 1).unwrap();
        let lam1 = b.eigenvalues()[0];
        let cyl = build_cylinder(default_height(lam1), 64, 3.0).unwrap();
        let ext = ExtensionSolver::new(&ops, &cyl, &params, Parallelism::Sequential).unwrap();
        let phi = b.eigenvector_free(0);
        let w = ext.extend_free(&phi).unwrap();
        assert!(w.residual <= EXTENSION_RTOL);
        let d = ext.dtn_free(&w, DtnScheme::WeakFlux).unwrap();
        let ls = lam1.powf(0.75);
        let err: Vec<f64> = d.iter().zip(&phi).map(|(d, p)| d - ls * p).collect();
        let rel = ops.mass.quad_form(&err).sqrt() / ls;
        assert!(rel < 0.01, "{rel}");
        // discrete Green identity
        let x2 = ext.x_norm(&w).unwrap().powi(2);
        let gap = (x2 - dot(&ops.mass.mul_vec(&phi), &d)).abs() / x2;
        // the graded first cell makes K_y entries O(y_1^{-2s}); about nine
        // digits survive
        assert!(gap < 1e-7, "{gap}");
        let zero = ext.extend_free(&vec![0.0; phi.len()]).unwrap();
        assert_eq!(zero.residual, 0.0);
        assert_eq!(ext.x_norm(&zero).unwrap(), 0.0);
    }
}
