//! Delay-free local stability of a 2×2 Jacobian.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_finite, Result};
use crate::model::{Mat2, Model, State};
use crate::sigmoid::{hill_deriv, logistic, logistic_deriv, HillParams};

/// Below this magnitude trace or determinant count as zero.
pub const MARGINAL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    StableNode,
    StableFocus,
    Unstable,
    Saddle,
    Marginal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// 1/min
    pub trace: f64,
    /// 1/min²
    pub determinant: f64,
    /// 1/min²
    pub discriminant: f64,
    /// 1/min, sorted by descending real part
    pub eigenvalues: [Complex64; 2],
    pub classification: Classification,
}

pub fn classify(j: &Mat2) -> StabilityReport {
    let trace = j[0][0] + j[1][1];
    let determinant = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let discriminant = trace * trace - 4.0 * determinant;
    let eigenvalues = eigenvalues(trace, determinant, discriminant);

    let classification = if trace.abs() < MARGINAL_EPS || determinant.abs() < MARGINAL_EPS {
        Classification::Marginal
    } else if determinant < 0.0 {
        Classification::Saddle
    } else if trace > 0.0 {
        Classification::Unstable
    } else if discriminant < 0.0 {
        Classification::StableFocus
    } else {
        Classification::StableNode
    };

    StabilityReport {
        trace,
        determinant,
        discriminant,
        eigenvalues,
        classification,
    }
}

/// Roots of `μ² - tr μ + det`, avoiding cancellation in the real case.
fn eigenvalues(tr: f64, det: f64, disc: f64) -> [Complex64; 2] {
    if disc < 0.0 {
        let re = 0.5 * tr;
        let im = 0.5 * (-disc).sqrt();
        return [Complex64::new(re, im), Complex64::new(re, -im)];
    }
    let q = 0.5 * (tr + tr.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 {
        // tr = 0 and disc = 0 imply det = 0
        (0.0, 0.0)
    } else {
        (q, det / q)
    };
    let (hi, lo) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
    [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
}

/// Trace of the delay-free Jacobian split into its sign-definite parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceCertificate {
    /// `(label, value)` in 1/min
    pub terms: Vec<(String, f64)>,
    pub total: f64,
    /// Every term is strictly negative.
    pub certified: bool,
    /// Diagonal entries `(J11, J22)`.
    pub diagonal: (f64, f64),
}

/// Splits `tr J` at `point` into the self-repression contribution of each
/// gene and the total degradation, and checks that each is negative.
pub fn trace_negativity_certificate(model: &Model, point: State) -> Result<TraceCertificate> {
    require_finite("point.A", point.a)?;
    require_finite("point.B", point.b)?;
    model.validate()?;
    let c = model.core();
    let (rep_a, rep_b) = match model {
        Model::Hill(c) => {
            let ha = HillParams::new(c.a0, c.n)?;
            let hb = HillParams::new(c.b0, c.n)?;
            (
                (c.g_a + c.g_ab * point.b)
                    * hill_deriv(point.a, &ha, crate::sigmoid::Direction::Decreasing)?,
                (c.g_b + c.g_ba * point.a)
                    * hill_deriv(point.b, &hb, crate::sigmoid::Direction::Decreasing)?,
            )
        }
        Model::LinearAdditive(p) => (
            (c.g_a + c.g_ab * point.b) * logistic_deriv(point.a, &p.repression_a()),
            (c.g_b + c.g_ba * point.a) * logistic_deriv(point.b, &p.repression_b()),
        ),
        Model::Weighted(p) => (
            p.kappa_1
                * logistic(c.g_ab * point.b, &p.activation_a())
                * logistic_deriv(point.a, &p.repression_a()),
            p.kappa_2
                * logistic(c.g_ba * point.a, &p.activation_b())
                * logistic_deriv(point.b, &p.repression_b()),
        ),
    };
    let degradation = -(c.gamma_a + c.gamma_b);
    let terms = vec![
        ("self-repression A".to_string(), rep_a),
        ("self-repression B".to_string(), rep_b),
        ("degradation".to_string(), degradation),
    ];
    let total = rep_a + rep_b + degradation;
    let certified = terms.iter().all(|(_, v)| *v < 0.0);
    Ok(TraceCertificate {
        terms,
        total,
        certified,
        diagonal: (rep_a - c.gamma_a, rep_b - c.gamma_b),
    })
}
