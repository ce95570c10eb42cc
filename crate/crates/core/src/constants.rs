//! Domain-independent constants: the fractional Sobolev constant, the
//! extension constant κ_s and the concentration threshold.

use crate::error::{Error, Result};
use crate::fractional::FracParams;
use libm::tgamma;
use serde::{Deserialize, Serialize};

/// Best constant of the fractional Sobolev inequality on ℝ^N.
pub fn sobolev_constant(params: &FracParams) -> Result<f64> {
    let (s, n) = (params.s(), params.dim() as f64);
    params.critical_exponent()?;
    Ok(sobolev_prefactor(s, n) * (tgamma(n / 2.0) / tgamma(n)).powf(2.0 * s / n))
}

/// The same formula with `Γ(N)^s` in the denominator instead of
/// `Γ(N)^{2s/N}`. The two agree only at N = 2.
pub fn sobolev_constant_as_printed(params: &FracParams) -> Result<f64> {
    let (s, n) = (params.s(), params.dim() as f64);
    params.critical_exponent()?;
    Ok(sobolev_prefactor(s, n) * tgamma(n / 2.0).powf(2.0 * s / n) / tgamma(n).powf(s))
}

fn sobolev_prefactor(s: f64, n: f64) -> f64 {
    2.0 * std::f64::consts::PI.powf(s) * tgamma(1.0 - s) * tgamma((n + 2.0 * s) / 2.0)
        / (tgamma(s) * tgamma((n - 2.0 * s) / 2.0))
}

/// `Γ(s) / (2^{1−2s} Γ(1−s))`, used only as a cross-check.
pub fn kappa_closed_form(s: f64) -> f64 {
    tgamma(s) / (2f64.powf(1.0 - 2.0 * s) * tgamma(1.0 - s))
}

/// Scaled height `√μ·Y` at which the decaying solution is pinned.
const CALIBRATION_HEIGHT: f64 = 20.0;

/// κ_s from one mode of `−(y^{1−2s} w′)′ + μ y^{1−2s} w = 0`, `w(0) = 1`,
/// `w` decaying: `κ_s = μ^s / (−lim y^{1−2s} w′)`.
///
/// The two Frobenius solutions `w₁ = Σ a_k y^{2k}` and
/// `w₂ = y^{2s} Σ b_k y^{2k}` both grow; the decaying one is `w₁ − C w₂`
/// with `C = lim w₁/w₂`, read off at height `Y_big` where the recessive
/// part is below `e^{−2√μ Y_big}`. Its flux at 0 is `2sC`.
pub fn kappa_for_mu(s: f64, mu: f64) -> f64 {
    let y = CALIBRATION_HEIGHT / mu.sqrt();
    let x = mu * y * y;
    let (mut w1, mut w2) = (1.0, 1.0);
    let (mut a, mut b) = (1.0, 1.0);
    let mut k = 1.0;
    loop {
        a *= x / (2.0 * k * (2.0 * k - 2.0 * s));
        b *= x / ((2.0 * k + 2.0 * s) * 2.0 * k);
        w1 += a;
        w2 += b;
        if a < 1e-18 * w1 && b < 1e-18 * w2 {
            break;
        }
        k += 1.0;
    }
    let c = w1 / (y.powf(2.0 * s) * w2);
    mu.powf(s) / (2.0 * s * c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaCalibration {
    pub kappa: f64,
    pub kappa_mu4: f64,
    pub spread: f64,
}

/// κ_s calibrated at μ = 1 and μ = 4; fails if they disagree beyond 1e-6.
pub fn kappa_s(params: &FracParams) -> Result<KappaCalibration> {
    let k1 = kappa_for_mu(params.s(), 1.0);
    let k4 = kappa_for_mu(params.s(), 4.0);
    let spread = (k1 - k4).abs() / k1;
    if !(spread <= 1e-6) || !(k1 > 0.0) {
        return Err(Error::Calibration { spread });
    }
    Ok(KappaCalibration { kappa: k1, kappa_mu4: k4, spread })
}

/// `2^{−2s/N} κ_s S(s,N)`.
pub fn concentration_threshold(params: &FracParams) -> Result<f64> {
    let kappa = kappa_s(params)?.kappa;
    Ok(2f64.powf(-2.0 * params.s() / params.dim() as f64) * kappa * sobolev_constant(params)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub s: f64,
    pub n: usize,
    pub critical_exponent: f64,
    pub large_dimension: bool,
    pub sobolev_constant: f64,
    pub sobolev_constant_as_printed: f64,
    pub kappa: f64,
    pub kappa_mu4: f64,
    pub kappa_spread: f64,
    pub kappa_closed_form: f64,
    pub threshold: f64,
    pub threshold_as_printed: f64,
    pub notes: Vec<String>,
}

pub fn constants_report(params: &FracParams) -> Result<ConstantsReport> {
    let cal = kappa_s(params)?;
    let sc = sobolev_constant(params)?;
    let sp = sobolev_constant_as_printed(params)?;
    let factor = 2f64.powf(-2.0 * params.s() / params.dim() as f64) * cal.kappa;
    let closed = kappa_closed_form(params.s());
    Ok(ConstantsReport {
        s: params.s(),
        n: params.dim(),
        critical_exponent: params.critical_exponent()?,
        large_dimension: params.large_dimension(),
        sobolev_constant: sc,
        sobolev_constant_as_printed: sp,
        kappa: cal.kappa,
        kappa_mu4: cal.kappa_mu4,
        kappa_spread: cal.spread,
        kappa_closed_form: closed,
        threshold: factor * sc,
        threshold_as_printed: factor * sp,
        notes: vec![
            "kappa: one-mode ODE calibration (normative)".into(),
            format!("kappa vs Gamma(s)/(2^(1-2s) Gamma(1-s)): relative gap {:.3e}", (cal.kappa - closed).abs() / closed),
            "sobolev_constant uses Gamma(N)^(2s/N); sobolev_constant_as_printed uses Gamma(N)^s".into(),
        ],
    })
}
