//! Delay-induced Hopf points for symmetric self-repression delays.
//!
//! With `τ1 = τ2 = τ` and undelayed cross-activation the linearisation at an
//! equilibrium has characteristic function
//!
//! ```text
//! F(μ, τ) = (μ + γ_A + α_A e^{-μτ}) (μ + γ_B + α_B e^{-μτ}) - β
//! ```
//!
//! Purely imaginary roots `μ = iω` are sought in `(ω, θ = ωτ)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_finite, Error, Result};
use crate::model::{DelayConfig, Model, State};

/// Linearisation constants at an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfCoefficients {
    /// delayed self-repression gain (1/min)
    #[serde(rename = "alpha_A")]
    pub alpha_a: f64,
    #[serde(rename = "alpha_B")]
    pub alpha_b: f64,
    /// product of the two cross-activation gains (1/min²)
    pub beta: f64,
    #[serde(rename = "gamma_A")]
    pub gamma_a: f64,
    #[serde(rename = "gamma_B")]
    pub gamma_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Primary,
    Secondary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfPoint {
    /// 1/min
    pub omega_c: f64,
    /// min
    pub tau_c: f64,
    /// rad
    pub theta_c: f64,
    /// d Re(μ)/dτ at the crossing (1/min²)
    pub transversality: f64,
    /// min
    pub period: f64,
    pub branch: Branch,
    pub replica_index: u32,
    /// `max(|Re|, |Im|)` of the characteristic residual
    pub residual: f64,
}

/// Seeding grid and Newton settings for [`find_hopf`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfSearch {
    pub omega_min: f64,
    pub omega_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    /// seeds per axis
    pub grid_density: usize,
    pub newton_tol: f64,
    pub max_iter: usize,
    pub dedup_radius: f64,
}

impl Default for HopfSearch {
    fn default() -> Self {
        Self {
            omega_min: 0.05,
            omega_max: 5.0,
            theta_min: 0.05,
            theta_max: PI - 0.05,
            grid_density: 60,
            newton_tol: 1e-12,
            max_iter: 50,
            dedup_radius: 1e-6,
        }
    }
}

/// Residual threshold every reported point must meet.
pub const CERTIFY_TOL: f64 = 1e-10;

/// Only the symmetric configuration `τ1 = τ2`, `τ12 = τ21 = 0` is analysed.
pub fn ensure_supported_delays(d: &DelayConfig) -> Result<()> {
    d.validate()?;
    if d.tau_1 != d.tau_2 || d.tau_12 != 0.0 || d.tau_21 != 0.0 {
        return Err(Error::Unsupported(format!(
            "Hopf analysis needs tau_1 = tau_2 and tau_12 = tau_21 = 0, got {:?}",
            d.as_array()
        )));
    }
    Ok(())
}

/// `α = -(J_kk + γ_k)`, `β = J12·J21` from the delay-free Jacobian.
///
/// For the linear additive form this is `α_A = λ_A (g_A + g_AB·B̄) f(1-f)` and
/// `β = g_AB g_BA f_A f_B`; for the weighted form `α_A = κ₁λ₃ f₁ f₃(1-f₃)`.
pub fn hopf_coefficients(model: &Model, eq: State) -> Result<HopfCoefficients> {
    require_finite("eq.A", eq.a)?;
    require_finite("eq.B", eq.b)?;
    let j = model.jacobian(eq)?;
    let c = model.core();
    Ok(HopfCoefficients {
        alpha_a: -(j[0][0] + c.gamma_a),
        alpha_b: -(j[1][1] + c.gamma_b),
        beta: j[0][1] * j[1][0],
        gamma_a: c.gamma_a,
        gamma_b: c.gamma_b,
    })
}

/// Real and imaginary parts of `F(iω)` written with `θ = ωτ`.
pub fn char_residual(omega: f64, theta: f64, c: &HopfCoefficients) -> (f64, f64) {
    let (s, co) = theta.sin_cos();
    let (aa, ab) = (c.alpha_a, c.alpha_b);
    let re = (c.gamma_a + aa * co) * (c.gamma_b + ab * co) - (omega - aa * s) * (omega - ab * s) - c.beta;
    let im = omega * ((c.gamma_a + c.gamma_b) + (aa + ab) * co)
        - s * (aa * c.gamma_b + ab * c.gamma_a + 2.0 * aa * ab * co);
    (re, im)
}

/// Jacobian of [`char_residual`] with respect to `(ω, θ)`.
fn char_jacobian(omega: f64, theta: f64, c: &HopfCoefficients) -> [[f64; 2]; 2] {
    let (s, co) = theta.sin_cos();
    let (aa, ab, ga, gb) = (c.alpha_a, c.alpha_b, c.gamma_a, c.gamma_b);
    let re_w = -(2.0 * omega - (aa + ab) * s);
    let re_t = -s * (aa * (gb + ab * co) + ab * (ga + aa * co))
        + co * (aa * (omega - ab * s) + ab * (omega - aa * s));
    let im_w = (ga + gb) + (aa + ab) * co;
    let im_t = -omega * (aa + ab) * s - co * (aa * gb + ab * ga) - 2.0 * aa * ab * co * co
        + 2.0 * aa * ab * s * s;
    [[re_w, re_t], [im_w, im_t]]
}

fn fd_char_jacobian(omega: f64, theta: f64, c: &HopfCoefficients) -> [[f64; 2]; 2] {
    let h = 1e-7;
    let (rw1, iw1) = char_residual(omega + h, theta, c);
    let (rw0, iw0) = char_residual(omega - h, theta, c);
    let (rt1, it1) = char_residual(omega, theta + h, c);
    let (rt0, it0) = char_residual(omega, theta - h, c);
    [
        [(rw1 - rw0) / (2.0 * h), (rt1 - rt0) / (2.0 * h)],
        [(iw1 - iw0) / (2.0 * h), (it1 - it0) / (2.0 * h)],
    ]
}

fn solve2(j: &[[f64; 2]; 2], r: (f64, f64)) -> Option<(f64, f64)> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let scale = j.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if !det.is_finite() || scale == 0.0 || det.abs() <= 1e-14 * scale * scale {
        return None;
    }
    Some((
        (r.0 * j[1][1] - j[0][1] * r.1) / det,
        (j[0][0] * r.1 - j[1][0] * r.0) / det,
    ))
}

fn residual_norm(omega: f64, theta: f64, c: &HopfCoefficients) -> f64 {
    let (re, im) = char_residual(omega, theta, c);
    re.abs().max(im.abs())
}

/// Damped Newton on the residual pair from one seed.
fn newton_from(seed: (f64, f64), c: &HopfCoefficients, search: &HopfSearch) -> Option<(f64, f64)> {
    let (mut w, mut th) = seed;
    let mut norm = residual_norm(w, th, c);
    for _ in 0..search.max_iter {
        if norm < search.newton_tol {
            return Some((w, th));
        }
        let r = char_residual(w, th, c);
        let step = solve2(&char_jacobian(w, th, c), r)
            .or_else(|| solve2(&fd_char_jacobian(w, th, c), r))?;
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..20 {
            let (nw, nth) = (w - t * step.0, th - t * step.1);
            let n = residual_norm(nw, nth, c);
            if n.is_finite() && n < norm {
                (w, th, norm) = (nw, nth, n);
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (norm < search.newton_tol).then_some((w, th))
}

/// All certified crossings on the fundamental branch, sorted by `τ_c`.
///
/// The first entry is the primary point. An empty list means no crossing in
/// range, which is a valid outcome.
pub fn find_hopf(c: &HopfCoefficients, search: &HopfSearch) -> Result<Vec<HopfPoint>> {
    if !(search.omega_min > 0.0 && search.omega_max > search.omega_min) {
        return Err(Error::Config(format!(
            "omega range must satisfy 0 < min < max, got ({}, {})",
            search.omega_min, search.omega_max
        )));
    }
    if !(search.theta_min > 0.0 && search.theta_max > search.theta_min) {
        return Err(Error::Config(format!(
            "theta range must satisfy 0 < min < max, got ({}, {})",
            search.theta_min, search.theta_max
        )));
    }
    if search.grid_density < 10 {
        return Err(Error::Config(format!(
            "grid density must be at least 10 per axis, got {}",
            search.grid_density
        )));
    }

    let n = search.grid_density;
    let mut roots: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        let w0 = search.omega_min + (search.omega_max - search.omega_min) * i as f64 / (n - 1) as f64;
        for k in 0..n {
            let t0 = search.theta_min
                + (search.theta_max - search.theta_min) * k as f64 / (n - 1) as f64;
            let Some((w, th)) = newton_from((w0, t0), c, search) else {
                continue;
            };
            let th = th.rem_euclid(TAU);
            if !(w > 0.0 && th > 0.0 && th < PI) {
                continue;
            }
            let dup = roots
                .iter()
                .any(|&(rw, rt)| (rw - w).hypot(rt - th) < search.dedup_radius);
            if !dup {
                roots.push((w, th));
            }
        }
    }

    let mut points: Vec<HopfPoint> = roots
        .into_iter()
        .filter_map(|(w, th)| {
            let residual = residual_norm(w, th, c);
            if residual >= CERTIFY_TOL {
                return None;
            }
            let tau = th / w;
            let trans = transversality(c, w, tau).re;
            if trans.abs() < 1e-12 {
                log::debug!("dropping degenerate crossing at omega={w}, tau={tau}");
                return None;
            }
            Some(HopfPoint {
                omega_c: w,
                tau_c: tau,
                theta_c: th,
                transversality: trans,
                period: TAU / w,
                branch: Branch::Secondary,
                replica_index: 0,
                residual,
            })
        })
        .collect();
    points.sort_by(|a, b| a.tau_c.total_cmp(&b.tau_c).then(a.omega_c.total_cmp(&b.omega_c)));
    if let Some(first) = points.first_mut() {
        first.branch = Branch::Primary;
    }
    Ok(points)
}

/// `dμ/dτ` at `μ = iω` by implicit differentiation of `F(μ, τ) = 0`.
pub fn transversality(c: &HopfCoefficients, omega: f64, tau: f64) -> Complex64 {
    let mu = Complex64::new(0.0, omega);
    let e = (-mu * tau).exp();
    let pa = mu + c.gamma_a + c.alpha_a * e;
    let pb = mu + c.gamma_b + c.alpha_b * e;
    let f_mu = (1.0 - c.alpha_a * tau * e) * pb + pa * (1.0 - c.alpha_b * tau * e);
    let f_tau = -c.alpha_a * mu * e * pb - pa * c.alpha_b * mu * e;
    -f_tau / f_mu
}

/// Characteristic function `F(μ, τ)` at a complex `μ`.
pub fn characteristic(c: &HopfCoefficients, mu: Complex64, tau: f64) -> Complex64 {
    let e = (-mu * tau).exp();
    (mu + c.gamma_a + c.alpha_a * e) * (mu + c.gamma_b + c.alpha_b * e) - c.beta
}

/// `τ_c + 2kπ/ω_c` for `k = 1..=k_max`.
pub fn higher_order_taus(h: &HopfPoint, k_max: u32) -> Vec<f64> {
    (1..=k_max).map(|k| replica_tau(h, k)).collect()
}

pub fn replica_tau(h: &HopfPoint, k: u32) -> f64 {
    h.tau_c + TAU * f64::from(k) / h.omega_c
}

/// Replica points `k = 1..=k_max`, each re-certified against the residual
/// and carrying its own transversality.
pub fn replicas(c: &HopfCoefficients, h: &HopfPoint, k_max: u32) -> Vec<HopfPoint> {
    (1..=k_max)
        .map(|k| {
            let tau = replica_tau(h, k);
            let theta = h.omega_c * tau;
            HopfPoint {
                tau_c: tau,
                theta_c: theta,
                transversality: transversality(c, h.omega_c, tau).re,
                replica_index: k,
                residual: residual_norm(h.omega_c, theta, c),
                ..*h
            }
        })
        .collect()
}

/// Hopf analysis at one equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfAnalysis {
    pub coefficients: HopfCoefficients,
    /// fundamental branch, sorted by τ
    pub points: Vec<HopfPoint>,
    /// replicas of the primary point
    pub higher_order: Vec<HopfPoint>,
}

impl HopfAnalysis {
    pub fn primary(&self) -> Option<&HopfPoint> {
        self.points.first()
    }
}

pub fn analyze(model: &Model, eq: State, search: &HopfSearch, k_max: u32) -> Result<HopfAnalysis> {
    let coefficients = hopf_coefficients(model, eq)?;
    let points = find_hopf(&coefficients, search)?;
    let higher_order = points
        .first()
        .map(|p| replicas(&coefficients, p, k_max))
        .unwrap_or_default();
    Ok(HopfAnalysis {
        coefficients,
        points,
        higher_order,
    })
}
