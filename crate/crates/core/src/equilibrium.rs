//! Delay-free fixed points by damped Newton iteration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_positive, Result};
use crate::model::{Mat2, Model, State};
use crate::sigmoid::{hill, logistic, Direction, HillParams};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100;
const MAX_HALVINGS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    /// The Newton matrix could not be inverted at the last iterate.
    SingularJacobian,
    /// The residual stopped decreasing along the Newton direction.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub formulation: String,
    /// nM
    pub point: State,
    /// nM/min
    pub residual_inf_norm: f64,
    pub iterations: usize,
    /// Newton steps replaced by a Gauss–Seidel sweep.
    pub relaxation_sweeps: usize,
    pub factors: BTreeMap<String, f64>,
    pub converged: bool,
    pub status: SolveStatus,
    pub tolerance: f64,
}

/// Default solve: guess at the repression thresholds, tol 1e-10 nM/min.
pub fn solve_default(model: &Model) -> Result<EquilibriumReport> {
    let c = model.core();
    solve_equilibrium(model, State::new(c.a0, c.b0), DEFAULT_TOL, DEFAULT_MAX_ITER)
}

/// Newton on `F(s) = rhs(s, s)` with the analytic Jacobian and a halving
/// line search on `‖F‖∞`.
///
/// A guess in the non-negative quadrant keeps every iterate there. The
/// linear additive field has a second, negative fixed point (activation
/// `g + g_AB·B` changes sign at negative B) that full Newton steps from far
/// guesses would otherwise reach. When no feasible step along the Newton
/// direction reduces the residual, one Gauss–Seidel sweep (each equation
/// solved for its own variable by bisection) replaces the step.
///
/// Failing to converge is reported through `converged`/`status`, not as an
/// error. Errors are reserved for bad inputs.
pub fn solve_equilibrium(
    model: &Model,
    guess: State,
    tol: f64,
    max_iter: usize,
) -> Result<EquilibriumReport> {
    require_positive("tol", tol)?;
    require_finite("guess.A", guess.a)?;
    require_finite("guess.B", guess.b)?;
    model.validate()?;

    let norm = |s: State| -> f64 {
        match model.rhs_undelayed(s) {
            Ok(r) if r.is_finite() => r.inf_norm(),
            _ => f64::INFINITY,
        }
    };

    let feasible = |s: State| s.a >= 0.0 && s.b >= 0.0;
    let keep_feasible = feasible(guess);

    let mut s = guess;
    let mut res = model.rhs_undelayed(s)?;
    let mut res_norm = res.inf_norm();
    let mut iterations = 0;
    let mut relaxation_sweeps = 0;
    let mut status = SolveStatus::MaxIterations;

    while iterations < max_iter {
        if res_norm < tol {
            status = SolveStatus::Converged;
            break;
        }
        let j = model.jacobian(s)?;
        let Some(step) = solve2(&j, res) else {
            log::debug!("singular Newton matrix at {s:?}");
            status = SolveStatus::SingularJacobian;
            break;
        };
        iterations += 1;

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = s - t * step;
            if keep_feasible && !feasible(trial) {
                t *= 0.5;
                continue;
            }
            let n = norm(trial);
            if n < res_norm {
                accepted = Some((trial, n));
                break;
            }
            t *= 0.5;
        }
        s = match accepted {
            Some((next, _)) => next,
            None if keep_feasible => {
                relaxation_sweeps += 1;
                gauss_seidel_sweep(model, s)
            }
            None => {
                status = SolveStatus::Stalled;
                break;
            }
        };
        res = model.rhs_undelayed(s)?;
        res_norm = res.inf_norm();
    }
    if status == SolveStatus::MaxIterations && res_norm < tol {
        status = SolveStatus::Converged;
    }
    let converged = status == SolveStatus::Converged;
    if !converged {
        log::warn!(
            "{} equilibrium not converged ({status:?}) after {iterations} iterations, residual {res_norm:e}",
            model.formulation()
        );
    }

    Ok(EquilibriumReport {
        formulation: model.formulation().to_string(),
        point: s,
        residual_inf_norm: res_norm,
        iterations,
        relaxation_sweeps,
        factors: equilibrium_factors(s, model)?,
        converged,
        status,
        tolerance: tol,
    })
}

/// Solves `rhs_A(a, B) = 0` for `a`, then `rhs_B(A, b) = 0` for `b`.
///
/// Production is non-negative and bounded for a fixed partner, so each scalar
/// equation has a root on `[0, ∞)` that bisection brackets by doubling.
fn gauss_seidel_sweep(model: &Model, s: State) -> State {
    let a = scalar_root(|a| model.rhs_undelayed(State::new(a, s.b)).map(|r| r.a), s.a);
    let b = scalar_root(|b| model.rhs_undelayed(State::new(a, b)).map(|r| r.b), s.b);
    State::new(a, b)
}

fn scalar_root(f: impl Fn(f64) -> Result<f64>, start: f64) -> f64 {
    let value = |x: f64| f(x).unwrap_or(f64::NAN);
    let (mut lo, mut hi) = (0.0, start.max(1.0));
    if value(lo) <= 0.0 {
        return lo;
    }
    for _ in 0..1100 {
        if value(hi) <= 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if value(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `J x = r` by Cramer's rule; `None` when `J` is numerically singular.
fn solve2(j: &Mat2, r: State) -> Option<State> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let scale = j.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if !det.is_finite() || det.abs() <= 1e-14 * scale * scale || scale == 0.0 {
        return None;
    }
    Some(State::new(
        (r.a * j[1][1] - j[0][1] * r.b) / det,
        (j[0][0] * r.b - j[1][0] * r.a) / det,
    ))
}

/// Named sigmoid values at a delay-free state.
///
/// Keys: `f_A-`, `f_B-` (linear additive); `f1+`, `f2+`, `f3-`, `f4-`
/// (weighted); `h_A-`, `h_B-` (Hill).
pub fn equilibrium_factors(point: State, model: &Model) -> Result<BTreeMap<String, f64>> {
    require_finite("point.A", point.a)?;
    require_finite("point.B", point.b)?;
    let mut out = BTreeMap::new();
    match model {
        Model::Hill(c) => {
            let ha = HillParams::new(c.a0, c.n)?;
            let hb = HillParams::new(c.b0, c.n)?;
            out.insert("h_A-".into(), hill(point.a, &ha, Direction::Decreasing)?);
            out.insert("h_B-".into(), hill(point.b, &hb, Direction::Decreasing)?);
        }
        Model::LinearAdditive(p) => {
            out.insert("f_A-".into(), logistic(point.a, &p.repression_a()));
            out.insert("f_B-".into(), logistic(point.b, &p.repression_b()));
        }
        Model::Weighted(p) => {
            let c = &p.core;
            out.insert("f1+".into(), logistic(c.g_ab * point.b, &p.activation_a()));
            out.insert("f2+".into(), logistic(c.g_ba * point.a, &p.activation_b()));
            out.insert("f3-".into(), logistic(point.a, &p.repression_a()));
            out.insert("f4-".into(), logistic(point.b, &p.repression_b()));
        }
    }
    Ok(out)
}

/// Componentwise `|rhs(point, point)|` (nM/min).
pub fn verify_residual(point: State, model: &Model) -> Result<State> {
    let r = model.rhs_undelayed(point)?;
    Ok(State::new(r.a.abs(), r.b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CoreParams, LogisticModelParams, WeightedModelParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lin() -> Model {
        Model::LinearAdditive(LogisticModelParams::from_core(CoreParams::reference()))
    }

    fn wl() -> Model {
        Model::Weighted(WeightedModelParams::from_core(CoreParams::reference()).unwrap())
    }

    #[test]
    fn linear_additive_reference() {
        let r = solve_equilibrium(&lin(), State::new(100.0, 100.0), 1e-8, 100).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 10, "{}", r.iterations);
        assert!((r.point.a - 167.96).abs() < 5e-3);
        assert!((r.point.b - 164.22).abs() < 5e-3);
        assert!(r.residual_inf_norm < 1e-8);
        assert!((r.factors["f_A-"] - 0.0619).abs() < 5e-5);
        assert!((r.factors["f_B-"] - 0.0712).abs() < 5e-5);
    }

    #[test]
    fn weighted_reference() {
        let r = solve_equilibrium(&wl(), State::new(100.0, 100.0), 1e-10, 100).unwrap();
        assert!(r.converged);
        assert!((r.point.a - 144.46).abs() < 5e-3);
        assert!((r.point.b - 139.99).abs() < 5e-3);
        let expect = [("f1+", 0.9997), ("f2+", 0.9998), ("f3-", 0.1445), ("f4-", 0.1680)];
        for (k, v) in expect {
            assert!((r.factors[k] - v).abs() < 5e-5, "{k} {}", r.factors[k]);
        }
    }

    #[test]
    fn default_guess_and_tolerance() {
        for m in [lin(), wl(), Model::Hill(CoreParams::reference())] {
            let r = solve_default(&m).unwrap();
            assert!(r.converged, "{m:?}");
            assert!(r.residual_inf_norm < DEFAULT_TOL);
            assert!(verify_residual(r.point, &m).unwrap().inf_norm() < DEFAULT_TOL);
        }
    }

    #[test]
    fn factors_at_thresholds_are_one_half() {
        let f = equilibrium_factors(State::new(100.0, 100.0), &lin()).unwrap();
        assert_eq!((f["f_A-"], f["f_B-"]), (0.5, 0.5));
        let f = equilibrium_factors(State::new(100.0, 100.0), &wl()).unwrap();
        assert_eq!((f["f3-"], f["f4-"]), (0.5, 0.5));
    }

    #[test]
    fn residual_at_rounded_point() {
        // rounding slack of the 2-decimal point, frozen
        let r = verify_residual(State::new(167.96, 164.22), &lin()).unwrap();
        assert!((r.a - 3.350905577e-3).abs() < 1e-11, "{}", r.a);
        assert!((r.b - 8.829562577e-3).abs() < 1e-11, "{}", r.b);
        let r = verify_residual(State::default(), &lin()).unwrap();
        assert!((r.a - 49.10068950189542).abs() < 1e-10);
        assert!((r.b - 49.10068950189542).abs() < 1e-10);
    }

    #[test]
    fn non_convergence_is_reported() {
        let r = solve_equilibrium(&lin(), State::new(1.0, 1.0), 1e-10, 1).unwrap();
        assert!(!r.converged);
        assert_eq!(r.status, SolveStatus::MaxIterations);
        assert_eq!(r.iterations, 1);
        assert!(solve_equilibrium(&lin(), State::default(), 0.0, 10).is_err());
        assert!(solve_equilibrium(&lin(), State::new(f64::NAN, 1.0), 1e-8, 10).is_err());
    }

    #[test]
    fn singular_jacobian_is_flagged() {
        assert!(solve2(&[[1.0, 2.0], [2.0, 4.0]], State::new(1.0, 1.0)).is_none());
        assert!(solve2(&[[0.0, 0.0], [0.0, 0.0]], State::new(1.0, 1.0)).is_none());
        let x = solve2(&[[2.0, 1.0], [1.0, 3.0]], State::new(3.0, 5.0)).unwrap();
        assert!((x.a - 0.8).abs() < 1e-15 && (x.b - 1.4).abs() < 1e-15);
    }

    #[test]
    fn basin_robustness() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for m in [lin(), wl(), Model::Hill(CoreParams::reference())] {
            let reference = solve_default(&m).unwrap().point;
            for _ in 0..500 {
                let g = State::new(rng.random_range(1.0..500.0), rng.random_range(1.0..500.0));
                let r = solve_equilibrium(&m, g, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
                assert!(r.converged, "{g:?}");
                assert!(r.point.distance(&reference) < 1e-6, "{g:?} -> {:?}", r.point);
            }
        }
    }

    #[test]
    fn negative_fixed_point_of_linear_additive_exists() {
        // unreachable from non-negative guesses, found from a negative one
        let r = solve_equilibrium(&lin(), State::new(-20.0, -20.0), 1e-10, 100).unwrap();
        assert!(r.converged);
        assert!(r.point.a < 0.0 && r.point.b < 0.0, "{:?}", r.point);
    }

    #[test]
    fn weighted_equilibrium_is_confined_and_dominated() {
        let e_lin = solve_default(&lin()).unwrap().point;
        let e_wl = solve_default(&wl()).unwrap().point;
        assert!(e_wl.a > 0.0 && e_wl.a < 1000.0 && e_wl.b > 0.0 && e_wl.b < 200.0 / 0.24);
        assert!(e_lin.a > e_wl.a && e_lin.b > e_wl.b);
    }
}
