//! Quotient of the cut-off extremal family centred at a Neumann point,
//!
//! ```text
//! u_ε(x) = φ_0(|x−x₀|/ρ) · ε^{(N−2s)/2} / (ε² + |x−x₀|²)^{(N−2s)/2}.
//! ```

use crate::bn::{QuotientReport, Route};
use crate::error::{Error, Result};
use crate::extension::ExtensionSolver;
use crate::fractional::{frac_norm, FracParams, Field};
use crate::mesh::{BoundaryPartition, Mesh};
use crate::spectral::SpectralBasis;
use serde::{Deserialize, Serialize};

/// Where the fractional energy of `u_ε` comes from.
#[derive(Debug, Clone, Copy)]
pub enum EnergyRoute<'a> {
    Spectral(&'a SpectralBasis),
    Extension(&'a ExtensionSolver),
}

/// Quintic smoothstep cut-off: 1 on `[0, 1/2]`, 0 on `[1, ∞)`.
pub fn cutoff(t: f64) -> f64 {
    if t <= 0.5 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let r = 2.0 * (t - 0.5);
        1.0 - r * r * r * (10.0 - 15.0 * r + 6.0 * r * r)
    }
}

fn profile(x: &[f64; 3], x0: &[f64; 3], dim: usize, rho: f64, eps: f64, s: f64) -> f64 {
    let r2: f64 = (0..dim).map(|d| (x[d] - x0[d]).powi(2)).sum();
    let e = 0.5 * (dim as f64 - 2.0 * s);
    cutoff(r2.sqrt() / rho) * eps.powf(e) / (eps * eps + r2).powf(e)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionReport {
    pub x0: [f64; 3],
    pub rho: f64,
    pub epsilon: f64,
    pub cells_across_epsilon: f64,
    pub quotient: QuotientReport,
}

/// True when `x0` lies on the closure of a Neumann facet.
fn on_neumann_closure(mesh: &Mesh, partition: &BoundaryPartition, x0: &[f64; 3]) -> bool {
    let tol = 1e-12 * mesh.extents().iter().map(|e| e[1] - e[0]).fold(1.0, f64::max);
    mesh.facets().iter().enumerate().any(|(i, f)| {
        !partition.is_dirichlet(i)
            && (0..mesh.dim()).all(|d| {
                if d == f.face.axis {
                    (x0[d] - f.centroid[d]).abs() <= tol
                } else {
                    (x0[d] - f.centroid[d]).abs() <= 0.5 * mesh.spacing(d) + tol
                }
            })
    })
}

#[allow(clippy::too_many_arguments)]
pub fn test_function_quotient(
    mesh: &Mesh,
    partition: &BoundaryPartition,
    route: EnergyRoute<'_>,
    params: &FracParams,
    x0: [f64; 3],
    rho: f64,
    epsilon: f64,
    lambda: f64,
) -> Result<TestFunctionReport> {
    if !(epsilon > 0.0 && epsilon < rho) {
        return Err(Error::InvalidInput(format!("need 0 < epsilon < rho, got epsilon = {epsilon}, rho = {rho}")));
    }
    let h = (0..mesh.dim()).map(|d| mesh.spacing(d)).fold(0.0, f64::max);
    let cells = epsilon / h;
    if cells < 4.0 {
        return Err(Error::InvalidInput(format!("epsilon spans {cells:.2} cells, at least 4 required")));
    }
    if !on_neumann_closure(mesh, partition, &x0) {
        return Err(Error::InvalidInput("x0 is not on the closure of the Neumann boundary".into()));
    }
    let p = params.critical_exponent()?;
    let (dim, s) = (mesh.dim(), params.s());
    let ops = match route {
        EnergyRoute::Spectral(b) => b.operators(),
        EnergyRoute::Extension(e) => e.operators(),
    };
    if ops.mesh_key() != mesh.key() || ops.partition_key() != partition.key() {
        return Err(Error::Mismatch("energy route built on another mesh or partition".into()));
    }
    let u = Field::interpolate(mesh, ops.dofs(), |x| profile(&x, &x0, dim, rho, epsilon, s));
    let energy = match route {
        EnergyRoute::Spectral(b) => frac_norm(b, params, &u)?.powi(2),
        EnergyRoute::Extension(e) => e.x_norm(&e.extend(&u)?)?.powi(2),
    };
    let vol: f64 = (0..dim).map(|d| mesh.spacing(d)).product();
    let (mut l2, mut lp) = (0.0, 0.0);
    for c in 0..mesh.cell_count() {
        let v = profile(&mesh.cell_center(mesh.cell_multi(c)), &x0, dim, rho, epsilon, s);
        l2 += vol * v * v;
        lp += vol * v.powf(p);
    }
    let critical_squared = lp.powf(2.0 / p);
    let route_tag = match route {
        EnergyRoute::Spectral(_) => Route::Spectral,
        EnergyRoute::Extension(_) => Route::Extension,
    };
    Ok(TestFunctionReport {
        x0,
        rho,
        epsilon,
        cells_across_epsilon: cells,
        quotient: QuotientReport {
            energy,
            l2_squared: l2,
            critical_squared,
            lambda,
            q: (energy - lambda * l2) / critical_squared,
            route: route_tag,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_operators;
    use crate::mesh::{build_tensor_mesh, partition_faces, Face, Side};
    use crate::spectral::{eigendecompose, EigenCount, EigenOptions};

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.3), 1.0);
        assert_eq!(cutoff(1.2), 0.0);
        assert!((cutoff(0.75) - 0.5).abs() < 1e-15);
        let mut last = 1.0;
        for i in 0..=100 {
            let v = cutoff(0.5 + 0.005 * i as f64);
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn guards_and_lambda_ordering() {
        let m = build_tensor_mesh(2, &[[0.0, 1.0]; 2], &[32, 32]).unwrap();
        let p = partition_faces(&m, &[Face::new(1, Side::Low)]).unwrap();
        let ops = assemble_operators(&m, &p).unwrap();
        let b = eigendecompose(&ops, EigenCount::All, &EigenOptions::default()).unwrap();
        let params = FracParams::new(0.75, 2).unwrap();
        let x0 = [0.5, 1.0, 0.0];
        let route = EnergyRoute::Spectral(&b);
        assert!(test_function_quotient(&m, &p, route, &params, x0, 0.3, 0.3, 0.0).is_err());
        assert!(test_function_quotient(&m, &p, route, &params, x0, 0.4, 0.05, 0.0).is_err());
        assert!(test_function_quotient(&m, &p, route, &params, [0.5, 0.0, 0.0], 0.4, 0.2, 0.0).is_err());
        let q0 = test_function_quotient(&m, &p, route, &params, x0, 0.4, 0.15, 0.0).unwrap();
        let q1 = test_function_quotient(&m, &p, route, &params, x0, 0.4, 0.15, 0.5).unwrap();
        assert!(q1.quotient.q < q0.quotient.q);
        assert!(q0.quotient.q > 0.0);
    }
}
