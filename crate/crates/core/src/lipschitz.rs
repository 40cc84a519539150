//! Closed-form Lipschitz bounds for the vector field and its Jacobian.
//!
//! Built from `f(1-f) ≤ 1/4` and `|f(1-f)(1-2f)| ≤ √3/18` for any logistic.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::model::{LogisticModelParams, Mat2, Model, WeightedModelParams};

/// `max |f(1-f)(1-2f)|` over `f ∈ (0, 1)`, attained at `f = (1 - 1/√3)/2`.
pub fn rho_constant() -> f64 {
    3f64.sqrt() / 18.0
}

/// State box `[0, A_max] × [0, B_max]` (nM).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    #[serde(rename = "A_max")]
    pub a_max: f64,
    #[serde(rename = "B_max")]
    pub b_max: f64,
}

impl DomainBox {
    pub fn new(a_max: f64, b_max: f64) -> Result<Self> {
        require_positive("A_max", a_max)?;
        require_positive("B_max", b_max)?;
        Ok(Self { a_max, b_max })
    }

    /// 500 nM on both axes, well above any equilibrium in the experimental
    /// parameter ranges.
    pub fn conservative() -> Self {
        Self {
            a_max: 500.0,
            b_max: 500.0,
        }
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.a_max, self.b_max).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub formulation: String,
    #[serde(rename = "box")]
    pub domain: DomainBox,
    /// infinity-norm bound on the Jacobian (1/min)
    #[serde(rename = "L_F")]
    pub l_f: f64,
    /// bound on the second partials (1/(nM·min))
    #[serde(rename = "L_DF")]
    pub l_df: f64,
    /// `|J_ij|` bounds, row-major (1/min)
    pub entry_bounds: Mat2,
    /// named second-partial bounds (1/(nM·min))
    pub hessian_bounds: BTreeMap<String, f64>,
    pub rho: f64,
}

impl LipschitzReport {
    fn assemble(formulation: &str, domain: DomainBox, entry_bounds: Mat2, hessian: Vec<(&str, f64)>) -> Self {
        let l_f = (entry_bounds[0][0] + entry_bounds[0][1]).max(entry_bounds[1][0] + entry_bounds[1][1]);
        let l_df = hessian.iter().map(|(_, v)| *v).fold(0.0, f64::max);
        Self {
            formulation: formulation.to_string(),
            domain,
            l_f,
            l_df,
            entry_bounds,
            hessian_bounds: hessian.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            rho: rho_constant(),
        }
    }

    /// Step size below which explicit integration resolves the fastest rate.
    pub fn step_hint(&self) -> f64 {
        1.0 / self.l_f
    }
}

pub fn lipschitz_linear_additive(p: &LogisticModelParams, domain: DomainBox) -> Result<LipschitzReport> {
    domain.validate()?;
    p.validate()?;
    let c = &p.core;
    let rho = rho_constant();
    let prod_a = c.g_a + c.g_ab * domain.b_max;
    let prod_b = c.g_b + c.g_ba * domain.a_max;
    let entries = [
        [prod_a * p.lambda_a / 4.0 + c.gamma_a, c.g_ab],
        [c.g_ba, prod_b * p.lambda_b / 4.0 + c.gamma_b],
    ];
    let hessian = vec![
        ("d2A/dA2", prod_a * p.lambda_a * p.lambda_a * rho),
        ("d2A/dAdB", c.g_ab * p.lambda_a / 4.0),
        ("d2B/dB2", prod_b * p.lambda_b * p.lambda_b * rho),
        ("d2B/dAdB", c.g_ba * p.lambda_b / 4.0),
    ];
    Ok(LipschitzReport::assemble("linear-additive", domain, entries, hessian))
}

/// Box-independent: every factor of the weighted production is bounded.
/// The box is recorded for uniformity only.
pub fn lipschitz_weighted(p: &WeightedModelParams, domain: DomainBox) -> Result<LipschitzReport> {
    domain.validate()?;
    p.validate()?;
    let c = &p.core;
    let rho = rho_constant();
    // steepness of the activation logistic as a function of the concentration
    let act_a = p.lambda_1 * c.g_ab;
    let act_b = p.lambda_2 * c.g_ba;
    let entries = [
        [p.kappa_1 * p.lambda_3 / 4.0 + c.gamma_a, p.kappa_1 * act_a / 4.0],
        [p.kappa_2 * act_b / 4.0, p.kappa_2 * p.lambda_4 / 4.0 + c.gamma_b],
    ];
    let hessian = vec![
        ("d2A/dA2", p.kappa_1 * p.lambda_3 * p.lambda_3 * rho),
        ("d2A/dB2", p.kappa_1 * act_a * act_a * rho),
        ("d2A/dAdB", p.kappa_1 * act_a * p.lambda_3 / 16.0),
        ("d2B/dB2", p.kappa_2 * p.lambda_4 * p.lambda_4 * rho),
        ("d2B/dA2", p.kappa_2 * act_b * act_b * rho),
        ("d2B/dAdB", p.kappa_2 * act_b * p.lambda_4 / 16.0),
    ];
    Ok(LipschitzReport::assemble("weighted", domain, entries, hessian))
}

/// Dispatch on the formulation. The Hill form has no finite `L_DF` near the
/// origin for non-integer `n`, so it is refused.
pub fn lipschitz(model: &Model, domain: DomainBox) -> Result<LipschitzReport> {
    match model {
        Model::LinearAdditive(p) => lipschitz_linear_additive(p, domain),
        Model::Weighted(p) => lipschitz_weighted(p, domain),
        Model::Hill(_) => Err(Error::Unsupported(
            "Lipschitz bounds are only provided for the logistic formulations; \
             Hill second derivatives are unbounded near zero for non-integer n"
                .into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CoreParams, State};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lin() -> LogisticModelParams {
        LogisticModelParams::from_core(CoreParams::reference())
    }

    fn wl() -> WeightedModelParams {
        WeightedModelParams::from_core(CoreParams::reference()).unwrap()
    }

    #[test]
    fn rho_value_and_maximiser() {
        let rho = rho_constant();
        assert!((rho - 0.09622504486493762).abs() < 1e-16);
        let f = (1.0 - 1.0 / 3f64.sqrt()) / 2.0;
        assert!((f * (1.0 - f) * (1.0 - 2.0 * f) - rho).abs() < 1e-15);
    }

    #[test]
    fn linear_additive_reference() {
        let r = lipschitz_linear_additive(&lin(), DomainBox::conservative()).unwrap();
        assert!((r.l_f - 18.74).abs() < 1e-12, "{}", r.l_f);
        assert!((r.l_df - 0.238).abs() < 1e-3);
        assert!((r.l_df - 0.23864).abs() < 1e-5);
        assert!((r.l_df / r.l_f - 0.013).abs() < 5e-4);
    }

    #[test]
    fn weighted_reference() {
        let r = lipschitz_weighted(&wl(), DomainBox::conservative()).unwrap();
        // 2.24 + 3 ln 3
        assert!((r.l_f - (2.24 + 3.0 * crate::sigmoid::LN_3)).abs() < 1e-12);
        assert_eq!((r.l_f * 100.0).round() / 100.0, 5.54);
        assert!((r.l_df - 0.0836).abs() < 1e-3);
        assert!((r.hessian_bounds["d2A/dAdB"] - 0.033).abs() < 5e-4);
        assert!((r.l_df / r.l_f - 0.015).abs() < 5e-4);
        let lr = lipschitz_linear_additive(&lin(), DomainBox::conservative()).unwrap();
        assert!((r.l_f / lr.l_f - 0.30).abs() < 0.01);
        assert!((r.l_df / lr.l_df - 0.35).abs() < 0.01);
    }

    #[test]
    fn degenerate_box_is_rejected() {
        assert!(DomainBox::new(0.0, 0.0).is_err());
        let bad = DomainBox { a_max: 0.0, b_max: 10.0 };
        assert!(lipschitz_linear_additive(&lin(), bad).is_err());
        assert!(lipschitz(&Model::Hill(CoreParams::reference()), DomainBox::conservative()).is_err());
    }

    #[test]
    fn monotone_in_the_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w0 = lipschitz_weighted(&wl(), DomainBox::conservative()).unwrap();
        for _ in 0..50 {
            let small = DomainBox::new(rng.random_range(1.0..500.0), rng.random_range(1.0..500.0)).unwrap();
            let big = DomainBox::new(small.a_max * 1.5, small.b_max * 2.0).unwrap();
            let (s, b) = (
                lipschitz_linear_additive(&lin(), small).unwrap(),
                lipschitz_linear_additive(&lin(), big).unwrap(),
            );
            assert!(b.l_f >= s.l_f && b.l_df >= s.l_df);
            let w = lipschitz_weighted(&wl(), small).unwrap();
            assert_eq!((w.l_f, w.l_df), (w0.l_f, w0.l_df));
        }
    }

    #[test]
    fn jacobian_grid_stays_inside_entry_bounds() {
        for m in [Model::LinearAdditive(lin()), Model::Weighted(wl())] {
            let r = lipschitz(&m, DomainBox::conservative()).unwrap();
            for i in 0..200 {
                for k in 0..200 {
                    let s = State::new(500.0 * i as f64 / 199.0, 500.0 * k as f64 / 199.0);
                    let j = m.jacobian(s).unwrap();
                    for row in 0..2 {
                        for col in 0..2 {
                            assert!(j[row][col].abs() <= r.entry_bounds[row][col] * (1.0 + 1e-12));
                        }
                    }
                }
            }
        }
    }
}
