//! Logistic and Hill primitives and the closed-form rules that match one to
//! the other.
//!
//! The increasing logistic is `1 / (1 + exp(-λ(x - θ)))` and the decreasing
//! one its complement `1 / (1 + exp(λ(x - θ)))`. Both are evaluated through
//! the branch that only ever exponentiates a non-positive number, so they stay
//! finite for any finite argument.

use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_positive, Error, Result};

/// ln 3, the steepness-times-threshold product of basal/slope matching.
pub const LN_3: f64 = 1.098_612_288_668_109_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Activation: rises from 0 to 1.
    Increasing,
    /// Repression: falls from 1 to 0.
    Decreasing,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Increasing => 1.0,
            Direction::Decreasing => -1.0,
        }
    }
}

/// Threshold and steepness of one logistic term.
///
/// `theta` carries the unit of the logistic's input (nM for a concentration,
/// nM/min for a weighted signal) and `lambda` its reciprocal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidParams {
    pub theta: f64,
    pub lambda: f64,
    pub direction: Direction,
}

impl SigmoidParams {
    pub fn new(theta: f64, lambda: f64, direction: Direction) -> Result<Self> {
        require_finite("theta", theta)?;
        require_positive("lambda", lambda)?;
        Ok(Self {
            theta,
            lambda,
            direction,
        })
    }

    pub fn increasing(theta: f64, lambda: f64) -> Result<Self> {
        Self::new(theta, lambda, Direction::Increasing)
    }

    pub fn decreasing(theta: f64, lambda: f64) -> Result<Self> {
        Self::new(theta, lambda, Direction::Decreasing)
    }

    /// Same threshold and steepness, opposite direction.
    pub fn flipped(&self) -> Self {
        let direction = match self.direction {
            Direction::Increasing => Direction::Decreasing,
            Direction::Decreasing => Direction::Increasing,
        };
        Self { direction, ..*self }
    }

    fn signed_argument(&self, x: f64) -> f64 {
        self.direction.sign() * self.lambda * (x - self.theta)
    }
}

/// Numerically stable `1 / (1 + exp(-s))`.
#[inline]
pub(crate) fn standard_logistic(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// Evaluates the logistic at `x`. Total on all finite reals.
#[inline]
pub fn logistic(x: f64, p: &SigmoidParams) -> f64 {
    standard_logistic(p.signed_argument(x))
}

/// `f * (1 - f)` computed from the two complementary branches so that neither
/// factor suffers cancellation in the tails.
#[inline]
fn spread(s: f64) -> f64 {
    standard_logistic(s) * standard_logistic(-s)
}

/// First derivative `±λ f (1 - f)`; the sign follows the direction.
#[inline]
pub fn logistic_deriv(x: f64, p: &SigmoidParams) -> f64 {
    p.direction.sign() * p.lambda * spread(p.signed_argument(x))
}

/// Second derivative `λ² f (1 - f)(1 - 2f)` for either direction.
///
/// The decreasing logistic is the increasing one reflected about `θ`, so its
/// curvature is the increasing curvature taken at the mirrored argument,
/// which is again `λ² f(1-f)(1-2f)` in terms of its own value `f`.
#[inline]
pub fn logistic_second_deriv(x: f64, p: &SigmoidParams) -> f64 {
    let s = p.signed_argument(x);
    let f = standard_logistic(s);
    let g = standard_logistic(-s);
    // 1 - 2f = g - f
    p.lambda * p.lambda * f * g * (g - f)
}

/// Closed-form logit inverse: the `x` at which the logistic equals `y`.
pub fn logistic_inverse(y: f64, p: &SigmoidParams) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::Domain(format!(
            "logistic inverse needs 0 < y < 1, got {y}"
        )));
    }
    // ln(y / (1 - y)) without forming 1 - y explicitly
    let logit = y.ln() - (-y).ln_1p();
    Ok(p.theta + p.direction.sign() * logit / p.lambda)
}

/// Half-maximal concentration and Hill coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillParams {
    pub theta: f64,
    pub n: f64,
    /// Map negative inputs to zero instead of failing. Off by default; only
    /// meant for reproducing legacy integrations that silently clamp.
    #[serde(default)]
    pub clamp_negative: bool,
}

impl HillParams {
    pub fn new(theta: f64, n: f64) -> Result<Self> {
        require_positive("theta", theta)?;
        require_positive("n", n)?;
        Ok(Self {
            theta,
            n,
            clamp_negative: false,
        })
    }

    pub fn with_clamp_negative(mut self, clamp: bool) -> Self {
        self.clamp_negative = clamp;
        self
    }

    fn admit(&self, x: f64) -> Result<f64> {
        if x >= 0.0 {
            Ok(x)
        } else if self.clamp_negative && x.is_finite() {
            Ok(0.0)
        } else {
            Err(Error::Domain(format!(
                "Hill function of negative input {x}: x^n is not real for general n"
            )))
        }
    }
}

/// Hill activation `x^n / (x^n + θ^n)` or repression `θ^n / (x^n + θ^n)`.
///
/// Negative `x` is refused unless [`HillParams::clamp_negative`] is set.
pub fn hill(x: f64, p: &HillParams, direction: Direction) -> Result<f64> {
    let x = p.admit(x)?;
    let r = (x / p.theta).powf(p.n);
    let up = if r.is_infinite() { 1.0 } else { r / (1.0 + r) };
    let down = if r.is_infinite() { 0.0 } else { 1.0 / (1.0 + r) };
    Ok(match direction {
        Direction::Increasing => up,
        Direction::Decreasing => down,
    })
}

/// Derivative of [`hill`] with respect to `x`.
pub fn hill_deriv(x: f64, p: &HillParams, direction: Direction) -> Result<f64> {
    let x = p.admit(x)?;
    if x == 0.0 {
        // n x^{n-1} θ^n / (x^n+θ^n)^2 at the origin
        let slope = if p.n > 1.0 {
            0.0
        } else if p.n == 1.0 {
            1.0 / p.theta
        } else {
            f64::INFINITY
        };
        return Ok(direction.sign() * slope);
    }
    let r = (x / p.theta).powf(p.n);
    if r.is_infinite() {
        return Ok(0.0);
    }
    let d = p.n * r / (x * (1.0 + r) * (1.0 + r));
    Ok(direction.sign() * d)
}

/// Logistic steepness that reproduces the Hill slope at the half-maximal
/// point: `λ = n / θ`.
///
/// Derived for the repression term, where both slopes equal `-n/(4θ)` at
/// `x = θ`. The activation forms share the same magnitude at `θ`, so the rule
/// applies to them as well.
pub fn match_steepness(h: &HillParams) -> f64 {
    h.n / h.theta
}

/// Maximal rate, threshold and steepness of a weighted-signal activation
/// logistic `κ f⁺(u, θ, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedMatchResult {
    /// nM/min
    pub kappa: f64,
    /// nM/min
    pub theta: f64,
    /// (nM/min)⁻¹
    pub lambda: f64,
}

impl WeightedMatchResult {
    /// Production at zero activator, `κ / (1 + e^{λθ})`.
    pub fn basal_rate(&self) -> f64 {
        self.kappa * standard_logistic(-self.lambda * self.theta)
    }

    /// Linearised activation slope at the inflection point relative to the
    /// weighted signal, `κλ/4`.
    pub fn slope_coefficient(&self) -> f64 {
        self.kappa * self.lambda / 4.0
    }
}

/// Matches basal rate and activation slope with the threshold placed where
/// cross-activation equals basal expression: `κ = 4g`, `θ = g`,
/// `λ = ln 3 / g`.
///
/// The basal identity holds exactly; the slope coefficient comes out as
/// `ln 3` instead of 1.
pub fn match_weighted_basal_slope(g_basal: f64) -> Result<WeightedMatchResult> {
    require_positive("g_basal", g_basal)?;
    Ok(WeightedMatchResult {
        kappa: 4.0 * g_basal,
        theta: g_basal,
        lambda: LN_3 / g_basal,
    })
}

/// Matching for a caller-chosen threshold (e.g. a steady-state signal level):
/// `κ = 2(g + θ)`, `λ = ln(1 + 2θ/g) / θ`.
pub fn match_weighted_custom_threshold(g_basal: f64, theta: f64) -> Result<WeightedMatchResult> {
    require_positive("g_basal", g_basal)?;
    require_positive("theta", theta)?;
    Ok(WeightedMatchResult {
        kappa: 2.0 * (g_basal + theta),
        theta,
        lambda: (2.0 * theta / g_basal).ln_1p() / theta,
    })
}

/// Absorbs a positive input weight into the logistic parameters:
/// `f(w·x; θ, λ) = f(x; θ/w, λw)`.
pub fn rescale_weight(p: &SigmoidParams, w: f64) -> Result<SigmoidParams> {
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::Domain(format!("weight must be positive, got {w}")));
    }
    SigmoidParams::new(p.theta / w, p.lambda * w, p.direction)
}
