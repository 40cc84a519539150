//! End-to-end comparison of the two logistic formulations for one core set.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{solve_default, EquilibriumReport};
use crate::error::Result;
use crate::hopf::{analyze, HopfCoefficients, HopfPoint, HopfSearch};
use crate::lipschitz::{lipschitz, DomainBox, LipschitzReport};
use crate::model::{CoreParams, Formulation, LogisticModelParams, Model, WeightedModelParams};
use crate::stability::{classify, StabilityReport};

pub const SCHEMA_VERSION: u32 = 1;

/// Replicas listed per formulation.
pub const HIGHER_ORDER_COUNT: u32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulationBlock {
    pub formulation: Formulation,
    /// every parameter of the formulation, by name
    pub matched_params: Vec<(String, f64)>,
    pub equilibrium: EquilibriumReport,
    pub stability: StabilityReport,
    pub hopf_coefficients: HopfCoefficients,
    pub hopf_primary: Option<HopfPoint>,
    /// remaining fundamental-branch crossings, sorted by delay
    pub hopf_secondary: Vec<HopfPoint>,
    pub hopf_higher: Vec<HopfPoint>,
    pub lipschitz: LipschitzReport,
}

impl FormulationBlock {
    fn converged(&self) -> bool {
        self.equilibrium.converged && self.hopf_primary.is_some()
    }
}

/// Weighted relative to linear additive, in percent where noted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    /// `100·(lin - wl)/wl` for protein A
    pub equilibrium_shift_a_pct: f64,
    pub equilibrium_shift_b_pct: f64,
    /// `τ_c(wl) / τ_c(lin)`; NaN-free, absent when either crossing is missing
    pub tau_c_ratio: Option<f64>,
    pub l_f_ratio: f64,
    pub l_df_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub core: CoreParams,
    pub lipschitz_box: DomainBox,
    pub linear_additive: FormulationBlock,
    pub weighted: FormulationBlock,
    pub ratios: Ratios,
    pub all_converged: bool,
}

impl ComparisonReport {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

fn block(model: Model, domain: DomainBox) -> Result<FormulationBlock> {
    let equilibrium = solve_default(&model)?;
    let stability = classify(&model.jacobian(equilibrium.point)?);
    let hopf = analyze(&model, equilibrium.point, &HopfSearch::default(), HIGHER_ORDER_COUNT)?;
    let matched_params = model
        .param_names()
        .into_iter()
        .map(|n| (n.to_string(), model.param(n).expect("listed name")))
        .collect();
    let mut points = hopf.points.into_iter();
    Ok(FormulationBlock {
        formulation: model.formulation(),
        matched_params,
        stability,
        hopf_coefficients: hopf.coefficients,
        hopf_primary: points.next(),
        hopf_secondary: points.collect(),
        hopf_higher: hopf.higher_order,
        lipschitz: lipschitz(&model, domain)?,
        equilibrium,
    })
}

pub fn run_full_analysis(core: &CoreParams) -> Result<ComparisonReport> {
    run_full_analysis_in(core, DomainBox::conservative())
}

pub fn run_full_analysis_in(core: &CoreParams, domain: DomainBox) -> Result<ComparisonReport> {
    core.validate()?;
    let lin = block(Model::LinearAdditive(LogisticModelParams::from_core(*core)), domain)?;
    let wl = block(Model::Weighted(WeightedModelParams::from_core(*core)?), domain)?;
    let (pl, pw) = (lin.equilibrium.point, wl.equilibrium.point);
    let ratios = Ratios {
        equilibrium_shift_a_pct: 100.0 * (pl.a - pw.a) / pw.a,
        equilibrium_shift_b_pct: 100.0 * (pl.b - pw.b) / pw.b,
        tau_c_ratio: match (&lin.hopf_primary, &wl.hopf_primary) {
            (Some(l), Some(w)) => Some(w.tau_c / l.tau_c),
            _ => None,
        },
        l_f_ratio: wl.lipschitz.l_f / lin.lipschitz.l_f,
        l_df_ratio: wl.lipschitz.l_df / lin.lipschitz.l_df,
    };
    Ok(ComparisonReport {
        schema_version: SCHEMA_VERSION,
        core: *core,
        lipschitz_box: domain,
        all_converged: lin.converged() && wl.converged(),
        linear_additive: lin,
        weighted: wl,
        ratios,
    })
}
