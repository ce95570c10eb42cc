//! Pohozaev-type identity audit and the star-shapedness nonexistence test.
//!
//! For a solution of `(−Δ)^s u = f(u)` with extension `w`,
//!
//! ```text
//! (N−2s)∫u f(u) − 2N∫F(u)
//!     = κ∫_{Σ_N×(0,∞)} y^{1−2s}|∇w|²⟨x−x₀,ν⟩ − κ∫_{Σ_D×(0,∞)} (same)
//!       − 2∫_{Σ_N} F(u)⟨x−x₀,ν⟩.
//! ```

use crate::bn::CriticalNorm;
use crate::error::{Error, Result};
use crate::extension::{weighted_element, ExtensionField, ExtensionSolver};
use crate::fractional::{FracParams, Field};
use crate::mesh::{BcLabel, BoundaryGeometry, BoundaryPartition, Mesh, Side};
use crate::quadrature::gauss_legendre;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A nonlinearity `f` with primitive `F`, `F(0) = 0`.
#[derive(Clone)]
pub enum NonlinearitySpec {
    /// `f(t) = |t|^{p−2} t`.
    CriticalPower { p: f64 },
    /// `f(t) = λt + |t|^{p−2} t`.
    LinearPlusCritical { lambda: f64, p: f64 },
    Custom { name: String, f: Scalar, primitive: Scalar },
}

impl fmt::Debug for NonlinearitySpec {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NonlinearitySpec::CriticalPower { p } => write!(fm, "CriticalPower {{ p: {p} }}"),
            NonlinearitySpec::LinearPlusCritical { lambda, p } => write!(fm, "LinearPlusCritical {{ lambda: {lambda}, p: {p} }}"),
            NonlinearitySpec::Custom { name, .. } => write!(fm, "Custom({name})"),
        }
    }
}

impl NonlinearitySpec {
    pub fn critical(params: &FracParams) -> Result<Self> {
        Ok(NonlinearitySpec::CriticalPower { p: params.critical_exponent()? })
    }

    pub fn linear_plus_critical(lambda: f64, params: &FracParams) -> Result<Self> {
        Ok(NonlinearitySpec::LinearPlusCritical { lambda, p: params.critical_exponent()? })
    }

    pub fn custom<F, G>(name: &str, f: F, primitive: G) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let spec = NonlinearitySpec::Custom { name: name.into(), f: Arc::new(f), primitive: Arc::new(primitive) };
        spec.check_primitive(4.0)?;
        Ok(spec)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            NonlinearitySpec::CriticalPower { .. } => "CRITICAL_POWER",
            NonlinearitySpec::LinearPlusCritical { .. } => "LINEAR_PLUS_CRITICAL",
            NonlinearitySpec::Custom { .. } => "CUSTOM",
        }
    }

    pub fn f(&self, t: f64) -> f64 {
        match self {
            NonlinearitySpec::CriticalPower { p } => t.abs().powf(p - 2.0) * t,
            NonlinearitySpec::LinearPlusCritical { lambda, p } => lambda * t + t.abs().powf(p - 2.0) * t,
            NonlinearitySpec::Custom { f, .. } => f(t),
        }
    }

    pub fn primitive(&self, t: f64) -> f64 {
        match self {
            NonlinearitySpec::CriticalPower { p } => t.abs().powf(*p) / p,
            NonlinearitySpec::LinearPlusCritical { lambda, p } => 0.5 * lambda * t * t + t.abs().powf(*p) / p,
            NonlinearitySpec::Custom { primitive, .. } => primitive(t),
        }
    }

    /// `F(0) = 0` and `F′ = f` by central differences on `[−t_max, t_max]`.
    pub fn check_primitive(&self, t_max: f64) -> Result<()> {
        if self.primitive(0.0) != 0.0 {
            return Err(Error::InvalidInput(format!("{}: F(0) = {} is not zero", self.tag(), self.primitive(0.0))));
        }
        let h = 1e-5 * t_max;
        for i in 1..=40 {
            for t in [t_max * i as f64 / 40.0, -t_max * i as f64 / 40.0] {
                let d = (self.primitive(t + h) - self.primitive(t - h)) / (2.0 * h);
                let f = self.f(t);
                if (d - f).abs() > 1e-6 * f.abs().max(1.0) {
                    return Err(Error::InvalidInput(format!("{}: F' = {d} but f = {f} at t = {t}", self.tag())));
                }
            }
        }
        Ok(())
    }

    /// `g(t) = (N−2s) t f(t) − 2N F(t)`, with the cancellation done
    /// symbolically for the built-in powers.
    pub fn g(&self, t: f64, params: &FracParams) -> f64 {
        let n = params.dim() as f64;
        let c = n - 2.0 * params.s();
        match self {
            NonlinearitySpec::CriticalPower { p } => (c - 2.0 * n / p) * t.abs().powf(*p),
            NonlinearitySpec::LinearPlusCritical { lambda, p } => {
                (c - n) * lambda * t * t + (c - 2.0 * n / p) * t.abs().powf(*p)
            }
            NonlinearitySpec::Custom { .. } => c * t * self.f(t) - 2.0 * n * self.primitive(t),
        }
    }

    /// Scale of the two parts of `g(t)`, for relative comparisons.
    pub fn g_scale(&self, t: f64, params: &FracParams) -> f64 {
        let n = params.dim() as f64;
        ((n - 2.0 * params.s()) * t * self.f(t)).abs().max((2.0 * n * self.primitive(t)).abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PohozaevReport {
    pub x0: [f64; 3],
    /// `(N−2s)∫u f(u)`.
    pub volume_uf: f64,
    /// `2N∫F(u)`.
    pub volume_f: f64,
    /// `κ∫_{Σ_N*} y^{1−2s}|∇w|²⟨x−x₀,ν⟩`.
    pub lateral_neumann: f64,
    /// `κ∫_{Σ_D*} y^{1−2s}|∇w|²⟨x−x₀,ν⟩`.
    pub lateral_dirichlet: f64,
    /// `2∫_{Σ_N} F(u)⟨x−x₀,ν⟩`.
    pub boundary_neumann: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Largest absolute term.
    pub scale: f64,
    pub relative: f64,
}

impl PohozaevReport {
    fn from_terms(x0: [f64; 3], volume_uf: f64, volume_f: f64, lateral_neumann: f64, lateral_dirichlet: f64, boundary_neumann: f64) -> Self {
        let lhs = volume_uf - volume_f;
        let rhs = lateral_neumann - lateral_dirichlet - boundary_neumann;
        let residual = lhs - rhs;
        let scale = [volume_uf, volume_f, lateral_neumann, lateral_dirichlet, boundary_neumann]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let relative = if scale > 0.0 { residual.abs() / scale } else { 0.0 };
        PohozaevReport { x0, volume_uf, volume_f, lateral_neumann, lateral_dirichlet, boundary_neumann, lhs, rhs, residual, scale, relative }
    }

    /// Recombines the stored terms.
    pub fn recomputed_residual(&self) -> f64 {
        (self.volume_uf - self.volume_f) - (self.lateral_neumann - self.lateral_dirichlet - self.boundary_neumann)
    }
}

/// Centroid of the mesh box.
pub fn domain_center(mesh: &Mesh) -> [f64; 3] {
    let mut c = [0.0; 3];
    for (d, e) in mesh.extents().iter().enumerate() {
        c[d] = 0.5 * (e[0] + e[1]);
    }
    c
}

/// Values and gradients of the Q1 basis of a cell at local point `t`.
fn q1_basis(dim: usize, t: &[f64; 3], h: &[f64; 3]) -> (Vec<f64>, Vec<[f64; 3]>) {
    let nl = 1usize << dim;
    let mut val = vec![1.0; nl];
    let mut grad = vec![[0.0; 3]; nl];
    for l in 0..nl {
        for d in 0..dim {
            let up = (l >> d) & 1 == 1;
            val[l] *= if up { t[d] } else { 1.0 - t[d] };
        }
        for d in 0..dim {
            let mut g = if (l >> d) & 1 == 1 { 1.0 } else { -1.0 } / h[d];
            for e in 0..dim {
                if e != d {
                    g *= if (l >> e) & 1 == 1 { t[e] } else { 1.0 - t[e] };
                }
            }
            grad[l][d] = g;
        }
    }
    (val, grad)
}

/// Evaluates every term of the identity for `u` (trace of `w`).
#[allow(clippy::too_many_arguments)]
pub fn pohozaev_terms(
    mesh: &Mesh,
    partition: &BoundaryPartition,
    ext: &ExtensionSolver,
    w: &ExtensionField,
    norm: &CriticalNorm,
    spec: &NonlinearitySpec,
    params: &FracParams,
    x0: [f64; 3],
) -> Result<PohozaevReport> {
    let ops = ext.operators();
    if ops.mesh_key() != mesh.key() || ops.partition_key() != partition.key() {
        return Err(Error::Mismatch("extension solver built on another mesh or partition".into()));
    }
    let cyl = ext.cylinder();
    if w.level_count() != cyl.levels() + 1 || w.free_count() != ops.free_count() {
        return Err(Error::Mismatch("extension field does not match the solver".into()));
    }
    let dim = mesh.dim();
    let n = dim as f64;
    let dofs = ops.dofs();
    let nodal: Vec<Vec<f64>> = (0..w.level_count()).map(|j| dofs.scatter(w.level(j))).collect();
    let u = w.level(0);

    let volume_uf = (n - 2.0 * params.s()) * norm.integrate(u, |t| t * spec.f(t));
    let volume_f = 2.0 * n * norm.integrate(u, |t| spec.primitive(t));

    let a = 1.0 - 2.0 * params.s();
    let y = cyl.nodes();
    let ycells: Vec<(f64, [[f64; 2]; 2])> = (0..cyl.levels())
        .map(|j| {
            let (m0, me) = weighted_element(y[j], y[j + 1], a);
            (m0 / ((y[j + 1] - y[j]) * (y[j + 1] - y[j])), me)
        })
        .collect();
    let (gx, gw) = gauss_legendre(2);
    let mut h = [1.0; 3];
    for (d, hd) in h.iter_mut().enumerate().take(dim) {
        *hd = mesh.spacing(d);
    }

    let (mut lat_n, mut lat_d, mut bnd_n) = (0.0, 0.0, 0.0);
    for (fi, facet) in mesh.facets().iter().enumerate() {
        let axis = facet.face.axis;
        let support = (facet.centroid[axis] - x0[axis]) * facet.face.outward_sign();
        let nodes = mesh.cell_nodes(facet.cell);
        let tangential: Vec<usize> = (0..dim).filter(|&d| d != axis).collect();
        let npts = 1usize << tangential.len();
        let mut lateral = 0.0;
        let mut boundary = 0.0;
        for q in 0..npts {
            let mut t = [0.0; 3];
            t[axis] = if facet.face.side == Side::Low { 0.0 } else { 1.0 };
            let mut wq = facet.measure;
            for (k, &d) in tangential.iter().enumerate() {
                let b = (q >> k) & 1;
                t[d] = 0.5 * (1.0 + gx[b]);
                wq *= 0.5 * gw[b];
            }
            let (val, grad) = q1_basis(dim, &t, &h);
            let eval = |level: &[f64]| -> (f64, [f64; 3]) {
                let mut v = 0.0;
                let mut g = [0.0; 3];
                for (l, &node) in nodes.iter().enumerate() {
                    v += val[l] * level[node];
                    for d in 0..dim {
                        g[d] += grad[l][d] * level[node];
                    }
                }
                (v, g)
            };
            let samples: Vec<(f64, [f64; 3])> = nodal.iter().map(|lv| eval(lv)).collect();
            let mut acc = 0.0;
            for (j, (k, me)) in ycells.iter().enumerate() {
                let (v0, g0) = samples[j];
                let (v1, g1) = samples[j + 1];
                let dot = |p: &[f64; 3], r: &[f64; 3]| p[0] * r[0] + p[1] * r[1] + p[2] * r[2];
                acc += me[0][0] * dot(&g0, &g0) + 2.0 * me[0][1] * dot(&g0, &g1) + me[1][1] * dot(&g1, &g1)
                    + k * (v1 - v0) * (v1 - v0);
            }
            lateral += wq * acc;
            boundary += wq * spec.primitive(samples[0].0);
        }
        if partition.is_dirichlet(fi) {
            lat_d += ext.kappa() * support * lateral;
        } else {
            lat_n += ext.kappa() * support * lateral;
            bnd_n += 2.0 * support * boundary;
        }
    }
    Ok(PohozaevReport::from_terms(x0, volume_uf, volume_f, lat_n, lat_d, bnd_n))
}

/// Convenience wrapper: extends `u` and evaluates the identity.
#[allow(clippy::too_many_arguments)]
pub fn pohozaev_for_field(
    mesh: &Mesh,
    partition: &BoundaryPartition,
    ext: &ExtensionSolver,
    u: &Field,
    norm: &CriticalNorm,
    spec: &NonlinearitySpec,
    params: &FracParams,
    x0: [f64; 3],
) -> Result<PohozaevReport> {
    let w = ext.extend(u)?;
    pohozaev_terms(mesh, partition, ext, &w, norm, spec, params, x0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Prediction {
    NoSolutionPredicted,
    NoPrediction,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonexistenceCheck {
    pub prediction: Prediction,
    pub x0: [f64; 3],
    /// `max |⟨x−x₀,ν⟩|` over Neumann facet centroids.
    pub neumann_max_abs: f64,
    pub neumann_mixed_sign: bool,
    /// `min ⟨x−x₀,ν⟩` over Dirichlet facet centroids.
    pub dirichlet_min: f64,
    pub geometric_condition: bool,
    /// Smallest `g(t)` over the sample grid.
    pub g_min: f64,
    pub g_condition: bool,
}

pub const GEOMETRY_TOL: f64 = 1e-10;
const G_RTOL: f64 = 1e-14;

/// Sufficient condition for nonexistence: `⟨x−x₀,ν⟩ = 0` on Σ_N,
/// `> 0` on Σ_D, and `g ≥ 0` on `(0, t_max]`.
pub fn nonexistence_check(
    geometry: &BoundaryGeometry,
    spec: &NonlinearitySpec,
    params: &FracParams,
    x0: [f64; 3],
    t_max: f64,
) -> Result<NonexistenceCheck> {
    if !(t_max > 0.0) {
        return Err(Error::InvalidInput("t_max must be positive".into()));
    }
    let support = |c: &[f64; 3], nu: &[f64; 3]| (0..3).map(|d| (c[d] - x0[d]) * nu[d]).sum::<f64>();
    let (mut nmax, mut npos, mut nneg) = (0.0f64, false, false);
    let mut dmin = f64::INFINITY;
    for f in &geometry.facets {
        let v = support(&f.centroid, &f.normal);
        match f.label {
            BcLabel::Neumann => {
                nmax = nmax.max(v.abs());
                npos |= v > GEOMETRY_TOL;
                nneg |= v < -GEOMETRY_TOL;
            }
            BcLabel::Dirichlet => dmin = dmin.min(v),
        }
    }
    let geometric_condition = nmax <= GEOMETRY_TOL && dmin > 0.0;
    let mut g_min = f64::INFINITY;
    let mut g_condition = true;
    for i in 1..=1000 {
        let t = t_max * i as f64 / 1000.0;
        let g = spec.g(t, params);
        g_min = g_min.min(g);
        if g < -G_RTOL * spec.g_scale(t, params) {
            g_condition = false;
        }
    }
    let mixed = npos && nneg;
    // a geometry outside the hypotheses says nothing either way; with the
    // geometry in place, only the sign of g decides
    let prediction = if !geometric_condition {
        Prediction::Inconclusive
    } else if g_condition {
        Prediction::NoSolutionPredicted
    } else {
        Prediction::NoPrediction
    };
    Ok(NonexistenceCheck {
        prediction,
        x0,
        neumann_max_abs: nmax,
        neumann_mixed_sign: mixed,
        dirichlet_min: dmin,
        geometric_condition,
        g_min,
        g_condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::ConeDomain;

    #[test]
    fn g_for_builtin_powers() {
        for (s, n) in [(0.75, 3), (0.6, 3), (0.9, 2), (0.55, 1)] {
            let params = FracParams::new(s, n).unwrap();
            if params.critical_exponent().is_err() {
                continue;
            }
            let crit = NonlinearitySpec::critical(&params).unwrap();
            for t in [0.1, 1.0, 7.5] {
                assert!(crit.g(t, &params).abs() <= 1e-14 * crit.g_scale(t, &params));
            }
            let lin = NonlinearitySpec::custom("linear", |t| 2.0 * t, |t| t * t).unwrap();
            let g = lin.g(1.5, &params);
            assert!((g + 2.0 * s * 2.0 * 2.25).abs() < 1e-12);
        }
    }

    #[test]
    fn primitive_check_catches_mismatch() {
        assert!(NonlinearitySpec::custom("bad", |t| t, |t| t * t).is_err());
        assert!(NonlinearitySpec::custom("shifted", |t| 2.0 * t, |t| t * t + 1.0).is_err());
        let params = FracParams::new(0.75, 3).unwrap();
        NonlinearitySpec::linear_plus_critical(1.3, &params).unwrap().check_primitive(3.0).unwrap();
    }

    #[test]
    fn cone_predictions() {
        let params = FracParams::new(0.75, 3).unwrap();
        let crit = NonlinearitySpec::critical(&params).unwrap();
        let cone = ConeDomain::new(3, 1.0, 0.0).unwrap();
        let r = nonexistence_check(&cone.geometry(6).unwrap(), &crit, &params, cone.apex(), 5.0).unwrap();
        assert_eq!(r.prediction, Prediction::NoSolutionPredicted);
        assert!(r.neumann_max_abs <= 1e-10);
        let lin = NonlinearitySpec::linear_plus_critical(1.0, &params).unwrap();
        let r = nonexistence_check(&cone.geometry(6).unwrap(), &lin, &params, cone.apex(), 5.0).unwrap();
        assert_eq!(r.prediction, Prediction::NoPrediction);
        let notched = ConeDomain::new(3, 1.0, 0.34).unwrap();
        let r = nonexistence_check(&notched.geometry(6).unwrap(), &crit, &params, notched.apex(), 5.0).unwrap();
        assert_eq!(r.prediction, Prediction::Inconclusive);
    }
}
