//! Parameter containers and right-hand sides of the three formulations.
//!
//! Every right-hand side reads the current state plus exactly four delayed
//! concentrations ([`DelayedState`]); history bookkeeping belongs to the
//! integrator.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::sigmoid::{
    hill, hill_deriv, logistic, logistic_deriv, match_steepness, match_weighted_basal_slope,
    Direction, HillParams, SigmoidParams,
};

/// Row-major 2×2 matrix, used for Jacobians (min⁻¹).
pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formulation {
    Hill,
    LinearAdditive,
    Weighted,
}

impl Formulation {
    pub fn name(self) -> &'static str {
        match self {
            Formulation::Hill => "hill",
            Formulation::LinearAdditive => "linear-additive",
            Formulation::Weighted => "weighted",
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hill" => Ok(Formulation::Hill),
            "linear-additive" => Ok(Formulation::LinearAdditive),
            "weighted" => Ok(Formulation::Weighted),
            other => Err(Error::Config(format!(
                "unknown formulation `{other}` (expected hill, linear-additive or weighted)"
            ))),
        }
    }
}

/// Protein concentrations (nM). Also used for rates (nM/min) where a
/// right-hand side returns `(dA/dt, dB/dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
}

impl State {
    pub const fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite()
    }

    pub fn inf_norm(&self) -> f64 {
        self.a.abs().max(self.b.abs())
    }

    pub fn distance(&self, other: &State) -> f64 {
        (*self - *other).inf_norm()
    }
}

impl Add for State {
    type Output = State;
    fn add(self, o: State) -> State {
        State::new(self.a + o.a, self.b + o.b)
    }
}

impl Sub for State {
    type Output = State;
    fn sub(self, o: State) -> State {
        State::new(self.a - o.a, self.b - o.b)
    }
}

impl Mul<State> for f64 {
    type Output = State;
    fn mul(self, s: State) -> State {
        State::new(self * s.a, self * s.b)
    }
}

/// The four delayed concentrations entering the right-hand side (nM).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DelayedState {
    /// A(t - τ1), self-repression of A
    #[serde(rename = "A_tau1")]
    pub a_tau1: f64,
    /// B(t - τ2), self-repression of B
    #[serde(rename = "B_tau2")]
    pub b_tau2: f64,
    /// B(t - τ12), activation of A by B
    #[serde(rename = "B_tau12")]
    pub b_tau12: f64,
    /// A(t - τ21), activation of B by A
    #[serde(rename = "A_tau21")]
    pub a_tau21: f64,
}

impl DelayedState {
    /// All four delayed values equal to the current state (delay-free case).
    pub fn undelayed(s: State) -> Self {
        Self {
            a_tau1: s.a,
            b_tau2: s.b,
            b_tau12: s.b,
            a_tau21: s.a,
        }
    }
}

/// Delays in minutes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DelayConfig {
    pub tau_1: f64,
    pub tau_2: f64,
    pub tau_12: f64,
    pub tau_21: f64,
}

impl DelayConfig {
    pub fn none() -> Self {
        Self::default()
    }

    /// `τ1 = τ2 = tau_s`, no cross-activation delay.
    pub fn symmetric(tau_s: f64) -> Self {
        Self {
            tau_1: tau_s,
            tau_2: tau_s,
            tau_12: 0.0,
            tau_21: 0.0,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.tau_1, self.tau_2, self.tau_12, self.tau_21]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tau_1", self.tau_1),
            ("tau_2", self.tau_2),
            ("tau_12", self.tau_12),
            ("tau_21", self.tau_21),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, v, "delays must be finite and non-negative"));
            }
        }
        Ok(())
    }

    pub fn is_delay_free(&self) -> bool {
        self.as_array().iter().all(|&t| t == 0.0)
    }

    pub fn min_positive(&self) -> Option<f64> {
        self.as_array()
            .into_iter()
            .filter(|&t| t > 0.0)
            .min_by(f64::total_cmp)
    }
}

/// A parameter value outside its commonly reported experimental range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeWarning {
    pub name: &'static str,
    pub value: f64,
    pub low: f64,
    pub high: f64,
}

impl fmt::Display for RangeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} = {} is outside the experimental range [{}, {}]",
            self.name, self.value, self.low, self.high
        )
    }
}

fn check_range(out: &mut Vec<RangeWarning>, name: &'static str, value: f64, low: f64, high: f64) {
    if value < low || value > high {
        out.push(RangeWarning {
            name,
            value,
            low,
            high,
        });
    }
}

/// Parameters shared by all three formulations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoreParams {
    /// basal production of A (nM/min)
    #[serde(rename = "g_A")]
    pub g_a: f64,
    #[serde(rename = "g_B")]
    pub g_b: f64,
    /// activation of A by B (1/min)
    #[serde(rename = "g_AB")]
    pub g_ab: f64,
    #[serde(rename = "g_BA")]
    pub g_ba: f64,
    /// degradation (1/min)
    #[serde(rename = "gamma_A")]
    pub gamma_a: f64,
    #[serde(rename = "gamma_B")]
    pub gamma_b: f64,
    /// repression thresholds (nM)
    #[serde(rename = "A0")]
    pub a0: f64,
    #[serde(rename = "B0")]
    pub b0: f64,
    /// Hill coefficient
    pub n: f64,
}

impl CoreParams {
    pub const UNITS: &'static [(&'static str, &'static str)] = &[
        ("g_A", "nM/min"),
        ("g_B", "nM/min"),
        ("g_AB", "1/min"),
        ("g_BA", "1/min"),
        ("gamma_A", "1/min"),
        ("gamma_B", "1/min"),
        ("A0", "nM"),
        ("B0", "nM"),
        ("n", "1"),
    ];

    /// Validates positivity and logs a warning for every value outside the
    /// experimental ranges.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        g_a: f64,
        g_b: f64,
        g_ab: f64,
        g_ba: f64,
        gamma_a: f64,
        gamma_b: f64,
        a0: f64,
        b0: f64,
        n: f64,
    ) -> Result<Self> {
        let p = Self {
            g_a,
            g_b,
            g_ab,
            g_ba,
            gamma_a,
            gamma_b,
            a0,
            b0,
            n,
        };
        p.validate()?;
        for w in p.range_warnings() {
            log::warn!("{w}");
        }
        Ok(p)
    }

    /// Basal and cross-activation rates, degradation, thresholds and Hill
    /// coefficient of the reference two-gene study.
    pub fn reference() -> Self {
        Self {
            g_a: 50.0,
            g_b: 50.0,
            g_ab: 3.0,
            g_ba: 3.0,
            gamma_a: 0.20,
            gamma_b: 0.24,
            a0: 100.0,
            b0: 100.0,
            n: 4.0,
        }
    }

    /// The delay-free comparison set: weaker activation, lower thresholds.
    pub fn comparison() -> Self {
        Self {
            g_ab: 2.5,
            g_ba: 2.5,
            a0: 70.0,
            b0: 70.0,
            ..Self::reference()
        }
    }

    pub fn values(&self) -> [(&'static str, f64); 9] {
        [
            ("g_A", self.g_a),
            ("g_B", self.g_b),
            ("g_AB", self.g_ab),
            ("g_BA", self.g_ba),
            ("gamma_A", self.gamma_a),
            ("gamma_B", self.gamma_b),
            ("A0", self.a0),
            ("B0", self.b0),
            ("n", self.n),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.values() {
            require_positive(name, v)?;
        }
        Ok(())
    }

    pub fn range_warnings(&self) -> Vec<RangeWarning> {
        let mut out = Vec::new();
        check_range(&mut out, "g_A", self.g_a, 10.0, 100.0);
        check_range(&mut out, "g_B", self.g_b, 10.0, 100.0);
        check_range(&mut out, "g_AB", self.g_ab, 1.0, 5.0);
        check_range(&mut out, "g_BA", self.g_ba, 1.0, 5.0);
        check_range(&mut out, "gamma_A", self.gamma_a, 0.05, 0.30);
        check_range(&mut out, "gamma_B", self.gamma_b, 0.05, 0.30);
        check_range(&mut out, "A0", self.a0, 50.0, 200.0);
        check_range(&mut out, "B0", self.b0, 50.0, 200.0);
        check_range(&mut out, "n", self.n, 2.0, 5.0);
        out
    }

    fn hill_a(&self) -> HillParams {
        HillParams {
            theta: self.a0,
            n: self.n,
            clamp_negative: false,
        }
    }

    fn hill_b(&self) -> HillParams {
        HillParams {
            theta: self.b0,
            n: self.n,
            clamp_negative: false,
        }
    }
}

/// Linear additive activation with logistic self-repression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticModelParams {
    pub core: CoreParams,
    /// repression steepness (1/nM)
    #[serde(rename = "lambda_A")]
    pub lambda_a: f64,
    #[serde(rename = "lambda_B")]
    pub lambda_b: f64,
}

impl LogisticModelParams {
    pub const UNITS: &'static [(&'static str, &'static str)] =
        &[("lambda_A", "1/nM"), ("lambda_B", "1/nM")];

    pub fn new(core: CoreParams, lambda_a: f64, lambda_b: f64) -> Result<Self> {
        let p = Self {
            core,
            lambda_a,
            lambda_b,
        };
        p.validate()?;
        for w in p.range_warnings() {
            log::warn!("{w}");
        }
        Ok(p)
    }

    /// Steepness from slope matching, `λ = n / threshold`.
    pub fn from_core(core: CoreParams) -> Self {
        Self {
            lambda_a: match_steepness(&core.hill_a()),
            lambda_b: match_steepness(&core.hill_b()),
            core,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.core.validate()?;
        require_positive("lambda_A", self.lambda_a)?;
        require_positive("lambda_B", self.lambda_b)
    }

    pub fn range_warnings(&self) -> Vec<RangeWarning> {
        let mut out = self.core.range_warnings();
        check_range(&mut out, "lambda_A", self.lambda_a, 0.01, 0.1);
        check_range(&mut out, "lambda_B", self.lambda_b, 0.01, 0.1);
        out
    }

    pub fn repression_a(&self) -> SigmoidParams {
        SigmoidParams {
            theta: self.core.a0,
            lambda: self.lambda_a,
            direction: Direction::Decreasing,
        }
    }

    pub fn repression_b(&self) -> SigmoidParams {
        SigmoidParams {
            theta: self.core.b0,
            lambda: self.lambda_b,
            direction: Direction::Decreasing,
        }
    }
}

/// Product of a weighted-signal activation logistic and a repression
/// logistic, scaled by a maximal production rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedModelParams {
    pub core: CoreParams,
    /// maximal production (nM/min)
    pub kappa_1: f64,
    pub kappa_2: f64,
    /// threshold on the signal g_BA·A entering gene B (nM/min)
    #[serde(rename = "theta_A")]
    pub theta_a: f64,
    /// threshold on the signal g_AB·B entering gene A (nM/min)
    #[serde(rename = "theta_B")]
    pub theta_b: f64,
    /// activation steepness ((nM/min)⁻¹)
    pub lambda_1: f64,
    pub lambda_2: f64,
    /// repression steepness (1/nM)
    pub lambda_3: f64,
    pub lambda_4: f64,
}

impl WeightedModelParams {
    pub const UNITS: &'static [(&'static str, &'static str)] = &[
        ("kappa_1", "nM/min"),
        ("kappa_2", "nM/min"),
        ("theta_A", "nM/min"),
        ("theta_B", "nM/min"),
        ("lambda_1", "min/nM"),
        ("lambda_2", "min/nM"),
        ("lambda_3", "1/nM"),
        ("lambda_4", "1/nM"),
    ];

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        core: CoreParams,
        kappa_1: f64,
        kappa_2: f64,
        theta_a: f64,
        theta_b: f64,
        lambda_1: f64,
        lambda_2: f64,
        lambda_3: f64,
        lambda_4: f64,
    ) -> Result<Self> {
        let p = Self {
            core,
            kappa_1,
            kappa_2,
            theta_a,
            theta_b,
            lambda_1,
            lambda_2,
            lambda_3,
            lambda_4,
        };
        p.validate()?;
        for w in p.core.range_warnings() {
            log::warn!("{w}");
        }
        Ok(p)
    }

    /// Basal/slope matching for activation (`κ = 4g`, `θ = g`, `λ = ln3/g`)
    /// and slope matching for repression.
    pub fn from_core(core: CoreParams) -> Result<Self> {
        core.validate()?;
        let act_a = match_weighted_basal_slope(core.g_a)?;
        let act_b = match_weighted_basal_slope(core.g_b)?;
        Ok(Self {
            kappa_1: act_a.kappa,
            theta_b: act_a.theta,
            lambda_1: act_a.lambda,
            kappa_2: act_b.kappa,
            theta_a: act_b.theta,
            lambda_2: act_b.lambda,
            lambda_3: match_steepness(&core.hill_a()),
            lambda_4: match_steepness(&core.hill_b()),
            core,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.core.validate()?;
        for (name, v) in [
            ("kappa_1", self.kappa_1),
            ("kappa_2", self.kappa_2),
            ("theta_A", self.theta_a),
            ("theta_B", self.theta_b),
            ("lambda_1", self.lambda_1),
            ("lambda_2", self.lambda_2),
            ("lambda_3", self.lambda_3),
            ("lambda_4", self.lambda_4),
        ] {
            require_positive(name, v)?;
        }
        Ok(())
    }

    /// Activation of gene A by the signal `g_AB·B`.
    pub fn activation_a(&self) -> SigmoidParams {
        SigmoidParams {
            theta: self.theta_b,
            lambda: self.lambda_1,
            direction: Direction::Increasing,
        }
    }

    /// Activation of gene B by the signal `g_BA·A`.
    pub fn activation_b(&self) -> SigmoidParams {
        SigmoidParams {
            theta: self.theta_a,
            lambda: self.lambda_2,
            direction: Direction::Increasing,
        }
    }

    pub fn repression_a(&self) -> SigmoidParams {
        SigmoidParams {
            theta: self.core.a0,
            lambda: self.lambda_3,
            direction: Direction::Decreasing,
        }
    }

    pub fn repression_b(&self) -> SigmoidParams {
        SigmoidParams {
            theta: self.core.b0,
            lambda: self.lambda_4,
            direction: Direction::Decreasing,
        }
    }

    /// Production of A with no activator, `κ₁ / (1 + e^{λ₁θ_B})`, before
    /// self-repression.
    pub fn basal_prefactor_a(&self) -> f64 {
        self.kappa_1 * logistic(0.0, &self.activation_a())
    }

    pub fn basal_prefactor_b(&self) -> f64 {
        self.kappa_2 * logistic(0.0, &self.activation_b())
    }

    /// Production terms `(κ₁ f₁⁺ f₃⁻, κ₂ f₂⁺ f₄⁻)` at the given delayed values.
    pub fn production(&self, d: &DelayedState) -> (f64, f64) {
        let c = &self.core;
        let pa = self.kappa_1
            * logistic(c.g_ab * d.b_tau12, &self.activation_a())
            * logistic(d.a_tau1, &self.repression_a());
        let pb = self.kappa_2
            * logistic(c.g_ba * d.a_tau21, &self.activation_b())
            * logistic(d.b_tau2, &self.repression_b());
        (pa, pb)
    }
}

/// Hill-linear hybrid right-hand side. Refuses negative delayed
/// concentrations.
pub fn rhs_hill(s: State, d: &DelayedState, p: &CoreParams) -> Result<State> {
    rhs_hill_with(s, d, p, false)
}

/// [`rhs_hill`] with an explicit choice of clamping negative inputs to zero.
pub fn rhs_hill_with(s: State, d: &DelayedState, p: &CoreParams, clamp_negative: bool) -> Result<State> {
    let ha = p.hill_a().with_clamp_negative(clamp_negative);
    let hb = p.hill_b().with_clamp_negative(clamp_negative);
    let ra = hill(d.a_tau1, &ha, Direction::Decreasing)?;
    let rb = hill(d.b_tau2, &hb, Direction::Decreasing)?;
    Ok(State::new(
        (p.g_a + p.g_ab * d.b_tau12) * ra - p.gamma_a * s.a,
        (p.g_b + p.g_ba * d.a_tau21) * rb - p.gamma_b * s.b,
    ))
}

pub fn rhs_linear_additive(s: State, d: &DelayedState, p: &LogisticModelParams) -> State {
    let c = &p.core;
    State::new(
        (c.g_a + c.g_ab * d.b_tau12) * logistic(d.a_tau1, &p.repression_a()) - c.gamma_a * s.a,
        (c.g_b + c.g_ba * d.a_tau21) * logistic(d.b_tau2, &p.repression_b()) - c.gamma_b * s.b,
    )
}

pub fn rhs_weighted(s: State, d: &DelayedState, p: &WeightedModelParams) -> State {
    let (pa, pb) = p.production(d);
    State::new(pa - p.core.gamma_a * s.a, pb - p.core.gamma_b * s.b)
}

/// Delay-free Jacobian of the Hill-linear hybrid.
pub fn jacobian_hill(s: State, p: &CoreParams) -> Result<Mat2> {
    let (ha, hb) = (p.hill_a(), p.hill_b());
    let ra = hill(s.a, &ha, Direction::Decreasing)?;
    let rb = hill(s.b, &hb, Direction::Decreasing)?;
    let da = hill_deriv(s.a, &ha, Direction::Decreasing)?;
    let db = hill_deriv(s.b, &hb, Direction::Decreasing)?;
    Ok([
        [(p.g_a + p.g_ab * s.b) * da - p.gamma_a, p.g_ab * ra],
        [p.g_ba * rb, (p.g_b + p.g_ba * s.a) * db - p.gamma_b],
    ])
}

/// Delay-free Jacobian of the linear additive formulation.
pub fn jacobian_linear_additive(s: State, p: &LogisticModelParams) -> Mat2 {
    let c = &p.core;
    let (ra, rb) = (p.repression_a(), p.repression_b());
    [
        [
            (c.g_a + c.g_ab * s.b) * logistic_deriv(s.a, &ra) - c.gamma_a,
            c.g_ab * logistic(s.a, &ra),
        ],
        [
            c.g_ba * logistic(s.b, &rb),
            (c.g_b + c.g_ba * s.a) * logistic_deriv(s.b, &rb) - c.gamma_b,
        ],
    ]
}

/// Delay-free Jacobian of the weighted formulation.
pub fn jacobian_weighted(s: State, p: &WeightedModelParams) -> Mat2 {
    let c = &p.core;
    let (act_a, act_b) = (p.activation_a(), p.activation_b());
    let (rep_a, rep_b) = (p.repression_a(), p.repression_b());
    let (ua, ub) = (c.g_ab * s.b, c.g_ba * s.a);
    let f1 = logistic(ua, &act_a);
    let f2 = logistic(ub, &act_b);
    let f3 = logistic(s.a, &rep_a);
    let f4 = logistic(s.b, &rep_b);
    [
        [
            p.kappa_1 * f1 * logistic_deriv(s.a, &rep_a) - c.gamma_a,
            p.kappa_1 * c.g_ab * logistic_deriv(ua, &act_a) * f3,
        ],
        [
            p.kappa_2 * c.g_ba * logistic_deriv(ub, &act_b) * f4,
            p.kappa_2 * f2 * logistic_deriv(s.b, &rep_b) - c.gamma_b,
        ],
    ]
}

/// One formulation together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "formulation", content = "params", rename_all = "kebab-case")]
pub enum Model {
    Hill(CoreParams),
    LinearAdditive(LogisticModelParams),
    Weighted(WeightedModelParams),
}

impl Model {
    pub fn formulation(&self) -> Formulation {
        match self {
            Model::Hill(_) => Formulation::Hill,
            Model::LinearAdditive(_) => Formulation::LinearAdditive,
            Model::Weighted(_) => Formulation::Weighted,
        }
    }

    pub fn core(&self) -> &CoreParams {
        match self {
            Model::Hill(c) => c,
            Model::LinearAdditive(p) => &p.core,
            Model::Weighted(p) => &p.core,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Model::Hill(c) => c.validate(),
            Model::LinearAdditive(p) => p.validate(),
            Model::Weighted(p) => p.validate(),
        }
    }

    pub fn rhs(&self, s: State, d: &DelayedState) -> Result<State> {
        match self {
            Model::Hill(c) => rhs_hill(s, d, c),
            Model::LinearAdditive(p) => Ok(rhs_linear_additive(s, d, p)),
            Model::Weighted(p) => Ok(rhs_weighted(s, d, p)),
        }
    }

    /// Residual map of the delay-free system, `F(s) = rhs(s, s)`.
    pub fn rhs_undelayed(&self, s: State) -> Result<State> {
        self.rhs(s, &DelayedState::undelayed(s))
    }

    pub fn jacobian(&self, s: State) -> Result<Mat2> {
        match self {
            Model::Hill(c) => jacobian_hill(s, c),
            Model::LinearAdditive(p) => Ok(jacobian_linear_additive(s, p)),
            Model::Weighted(p) => Ok(jacobian_weighted(s, p)),
        }
    }

    /// Names of every scalar parameter, core first.
    pub fn param_names(&self) -> Vec<&'static str> {
        let mut names: Vec<&'static str> = CoreParams::UNITS.iter().map(|(n, _)| *n).collect();
        match self {
            Model::Hill(_) => {}
            Model::LinearAdditive(_) => {
                names.extend(LogisticModelParams::UNITS.iter().map(|(n, _)| *n))
            }
            Model::Weighted(_) => names.extend(WeightedModelParams::UNITS.iter().map(|(n, _)| *n)),
        }
        names
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        let mut copy = *self;
        copy.param_slot(name).map(|v| *v)
    }

    /// Copy of the model with one parameter replaced, validated.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Model> {
        let mut copy = *self;
        let slot = copy
            .param_slot(name)
            .ok_or_else(|| Error::Config(format!("unknown parameter `{name}` for {}", self.formulation())))?;
        *slot = value;
        copy.validate()?;
        Ok(copy)
    }

    fn param_slot(&mut self, name: &str) -> Option<&mut f64> {
        let (core, extra): (&mut CoreParams, Option<&mut f64>) = match self {
            Model::Hill(c) => (c, None),
            Model::LinearAdditive(p) => {
                let slot = match name {
                    "lambda_A" => Some(&mut p.lambda_a),
                    "lambda_B" => Some(&mut p.lambda_b),
                    _ => None,
                };
                (&mut p.core, slot)
            }
            Model::Weighted(p) => {
                let slot = match name {
                    "kappa_1" => Some(&mut p.kappa_1),
                    "kappa_2" => Some(&mut p.kappa_2),
                    "theta_A" => Some(&mut p.theta_a),
                    "theta_B" => Some(&mut p.theta_b),
                    "lambda_1" => Some(&mut p.lambda_1),
                    "lambda_2" => Some(&mut p.lambda_2),
                    "lambda_3" => Some(&mut p.lambda_3),
                    "lambda_4" => Some(&mut p.lambda_4),
                    _ => None,
                };
                (&mut p.core, slot)
            }
        };
        if extra.is_some() {
            return extra;
        }
        match name {
            "g_A" => Some(&mut core.g_a),
            "g_B" => Some(&mut core.g_b),
            "g_AB" => Some(&mut core.g_ab),
            "g_BA" => Some(&mut core.g_ba),
            "gamma_A" => Some(&mut core.gamma_a),
            "gamma_B" => Some(&mut core.gamma_b),
            "A0" => Some(&mut core.a0),
            "B0" => Some(&mut core.b0),
            "n" => Some(&mut core.n),
            _ => None,
        }
    }
}
