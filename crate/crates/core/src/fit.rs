//! Least-squares fitting of model parameters to observed trajectories.
//!
//! Levenberg–Marquardt over the logarithms of the free parameters, which keeps
//! them positive. Sensitivities come from forward differences of full
//! simulations.

use std::collections::BTreeMap;
use std::io::Read;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DelayConfig, Model, State};
use crate::simulate::{integrate, HistorySpec, Trajectory};

/// Observations of both proteins on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    /// min
    pub times: Vec<f64>,
    /// nM
    pub observations: Vec<State>,
    /// optional positive per-point weights
    pub weights: Option<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, observations: Vec<State>, weights: Option<Vec<f64>>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Config("time series is empty".into()));
        }
        if times.len() != observations.len() {
            return Err(Error::Config(format!(
                "{} times but {} observations",
                times.len(),
                observations.len()
            )));
        }
        if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::invalid("time", *t, "observation times must be finite and non-negative"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("observation times must be strictly increasing".into()));
        }
        if observations.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("observations must be finite".into()));
        }
        if let Some(w) = &weights {
            if w.len() != times.len() {
                return Err(Error::Config(format!("{} weights for {} points", w.len(), times.len())));
            }
            if let Some(bad) = w.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::invalid("weight", *bad, "weights must be finite and positive"));
            }
        }
        Ok(Self {
            times,
            observations,
            weights,
        })
    }

    /// Every `stride`-th point of a trajectory, skipping `t = 0`.
    pub fn from_trajectory(traj: &Trajectory, stride: usize) -> Result<Self> {
        let stride = stride.max(1);
        let (times, obs) = traj
            .times
            .iter()
            .zip(&traj.states)
            .skip(stride)
            .step_by(stride)
            .map(|(t, s)| (*t, *s))
            .unzip();
        Self::new(times, obs, None)
    }

    /// Reads the `t,A,B` CSV written by the simulator. A fourth column, if
    /// present, is taken as weights.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = rdr.headers().map_err(|e| Error::Io(e.to_string()))?.clone();
        let names: Vec<&str> = headers.iter().collect();
        if names.len() < 3 || names[..3] != ["t", "A", "B"] {
            return Err(Error::Config(format!("expected header `t,A,B[,w]`, found `{}`", names.join(","))));
        }
        let weighted = names.len() >= 4;
        let (mut times, mut obs, mut weights) = (Vec::new(), Vec::new(), Vec::new());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
            let field = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Config(format!("row {}: missing column {}", line + 2, i + 1)))?
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("row {}: {e}", line + 2)))
            };
            times.push(field(0)?);
            obs.push(State::new(field(1)?, field(2)?));
            if weighted {
                weights.push(field(3)?);
            }
        }
        Self::new(times, obs, weighted.then_some(weights))
    }

    /// Constant history equal to the first observation, which must sit at
    /// `t = 0`.
    pub fn initial_history(&self) -> Result<HistorySpec> {
        if self.times[0] != 0.0 {
            return Err(Error::Config(format!(
                "first observation is at t = {}, not 0; pass an explicit history",
                self.times[0]
            )));
        }
        HistorySpec::constant(self.observations[0])
    }

    fn normalized_weights(&self) -> Vec<f64> {
        match &self.weights {
            None => vec![1.0; self.times.len()],
            Some(w) => {
                let mean = w.iter().sum::<f64>() / w.len() as f64;
                w.iter().map(|v| v / mean).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iter: usize,
    pub initial_damping: f64,
    /// stop when the relative decrease of the objective falls below this
    pub rel_tol: f64,
    /// stop when the infinity norm of the log-parameter gradient falls below this
    pub grad_tol: f64,
    /// forward-difference step in log-parameter space
    pub fd_step: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            initial_damping: 1e-3,
            rel_tol: 1e-10,
            grad_tol: 1e-8,
            fd_step: 1e-6,
        }
    }
}

/// What to fit: `model` carries the fixed parameters and the initial guess
/// for the free ones.
#[derive(Debug, Clone, PartialEq)]
pub struct FitProblem {
    pub data: TimeSeries,
    pub model: Model,
    pub free_params: Vec<String>,
    pub history: HistorySpec,
    pub delays: DelayConfig,
    /// min
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitStatus {
    /// relative objective change below tolerance
    SmallDecrease,
    SmallGradient,
    /// no damping level produced a decrease; at a minimum to working precision
    NoDescent,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// fitted values of the free parameters
    pub params: BTreeMap<String, f64>,
    pub model: Model,
    /// weighted sum of squared residuals with the caller's weights (nM²)
    pub sse: f64,
    pub initial_sse: f64,
    pub iterations: usize,
    pub converged: bool,
    pub status: FitStatus,
}

struct Objective<'a> {
    problem: &'a FitProblem,
    sqrt_w: Vec<f64>,
    t_end: f64,
}

impl Objective<'_> {
    fn model_at(&self, logp: &[f64]) -> Result<Model> {
        let mut m = self.problem.model;
        for (name, lp) in self.problem.free_params.iter().zip(logp) {
            m = m.with_param(name, lp.exp())?;
        }
        Ok(m)
    }

    /// Weighted residuals `√w (sim - obs)`, A then B per point.
    fn residuals(&self, logp: &[f64]) -> Result<DVector<f64>> {
        let model = self.model_at(logp)?;
        let p = self.problem;
        let traj = integrate(&model, &p.delays, &p.history, self.t_end, p.dt)?;
        let mut r = DVector::zeros(2 * p.data.times.len());
        for (i, (t, obs)) in p.data.times.iter().zip(&p.data.observations).enumerate() {
            let sim = traj
                .state_at(*t)
                .ok_or_else(|| Error::Domain(format!("no simulated state at t = {t}")))?;
            r[2 * i] = self.sqrt_w[i] * (sim.a - obs.a);
            r[2 * i + 1] = self.sqrt_w[i] * (sim.b - obs.b);
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                time: self.t_end,
                detail: "non-finite residual".into(),
            });
        }
        Ok(r)
    }
}

/// Fits the free parameters of a delay-free model.
pub fn fit(problem: &FitProblem, opts: &FitOptions) -> Result<FitResult> {
    if problem.free_params.is_empty() {
        return Err(Error::Config("no free parameters to fit".into()));
    }
    if !problem.delays.is_delay_free() {
        return Err(Error::Unsupported("fitting with nonzero delays is not supported".into()));
    }
    let mut logp = Vec::with_capacity(problem.free_params.len());
    for name in &problem.free_params {
        let v = problem
            .model
            .param(name)
            .ok_or_else(|| Error::Config(format!("unknown parameter `{name}` for {}", problem.model.formulation())))?;
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid("initial guess", v, "free parameters must start positive"));
        }
        logp.push(v.ln());
    }
    let mut seen = problem.free_params.clone();
    seen.sort();
    seen.dedup();
    if seen.len() != problem.free_params.len() {
        return Err(Error::Config("free parameter listed twice".into()));
    }

    let user_w = problem.data.weights.clone().unwrap_or_else(|| vec![1.0; problem.data.times.len()]);
    let obj = Objective {
        problem,
        sqrt_w: problem.data.normalized_weights().iter().map(|w| w.sqrt()).collect(),
        t_end: *problem.data.times.last().expect("non-empty series"),
    };
    // the simulator needs a positive horizon
    if obj.t_end <= 0.0 {
        return Err(Error::Config("time series must extend beyond t = 0".into()));
    }
    let n = logp.len();
    let mut r = obj.residuals(&logp)?;
    let mut cost = r.norm_squared();
    let mut damping = opts.initial_damping;
    let mut iterations = 0;
    let mut status = FitStatus::MaxIterations;

    while iterations < opts.max_iter {
        if cost == 0.0 {
            status = FitStatus::SmallGradient;
            break;
        }
        let mut jac = DMatrix::zeros(r.len(), n);
        for k in 0..n {
            let mut shifted = logp.clone();
            shifted[k] += opts.fd_step;
            let rk = obj.residuals(&shifted)?;
            jac.set_column(k, &((rk - &r) / opts.fd_step));
        }
        let grad = jac.transpose() * &r;
        if grad.amax() < opts.grad_tol {
            status = FitStatus::SmallGradient;
            break;
        }
        let jtj = jac.transpose() * &jac;
        let diag_floor = 1e-12 * jtj.diagonal().max().max(f64::MIN_POSITIVE);
        iterations += 1;

        let mut accepted = None;
        while damping <= 1e16 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += damping * jtj[(k, k)].max(diag_floor);
            }
            let step = a.lu().solve(&(-&grad));
            let Some(step) = step else {
                damping *= 10.0;
                continue;
            };
            let trial: Vec<f64> = logp.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
            match obj.residuals(&trial) {
                Ok(rt) if rt.norm_squared() < cost => {
                    accepted = Some((trial, rt));
                    damping = (damping / 10.0).max(1e-15);
                    break;
                }
                Ok(_) => damping *= 10.0,
                Err(e) => {
                    log::debug!("trial step rejected: {e}");
                    damping *= 10.0;
                }
            }
        }
        let Some((trial, rt)) = accepted else {
            status = FitStatus::NoDescent;
            break;
        };
        let new_cost = rt.norm_squared();
        let rel = (cost - new_cost) / cost;
        logp = trial;
        r = rt;
        cost = new_cost;
        if rel < opts.rel_tol {
            status = FitStatus::SmallDecrease;
            break;
        }
    }

    let model = obj.model_at(&logp)?;
    let sse_with = |m: &Model| -> Result<f64> {
        let traj = integrate(m, &problem.delays, &problem.history, obj.t_end, problem.dt)?;
        let mut s = 0.0;
        for ((t, obs), w) in problem.data.times.iter().zip(&problem.data.observations).zip(&user_w) {
            let sim = traj.state_at(*t).expect("time inside the simulated span");
            s += w * ((sim.a - obs.a).powi(2) + (sim.b - obs.b).powi(2));
        }
        Ok(s)
    };
    let initial_sse = sse_with(&problem.model)?;
    let sse = sse_with(&model)?;
    let params = problem
        .free_params
        .iter()
        .zip(&logp)
        .map(|(k, lp)| (k.clone(), lp.exp()))
        .collect();
    Ok(FitResult {
        params,
        model,
        sse,
        initial_sse,
        iterations,
        converged: status != FitStatus::MaxIterations,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CoreParams, LogisticModelParams};

    fn lin() -> Model {
        Model::LinearAdditive(LogisticModelParams::from_core(CoreParams::reference()))
    }

    fn synthetic() -> TimeSeries {
        let h = HistorySpec::constant(State::new(10.0, 10.0)).unwrap();
        let t = integrate(&lin(), &DelayConfig::none(), &h, 50.0, 0.05).unwrap();
        TimeSeries::from_trajectory(&t, 10).unwrap()
    }

    fn problem(data: TimeSeries, guess: f64) -> FitProblem {
        let model = lin().with_param("lambda_A", guess).unwrap().with_param("lambda_B", guess).unwrap();
        FitProblem {
            data,
            model,
            free_params: vec!["lambda_A".into(), "lambda_B".into()],
            history: HistorySpec::constant(State::new(10.0, 10.0)).unwrap(),
            delays: DelayConfig::none(),
            dt: 0.05,
        }
    }

    #[test]
    fn recovers_steepness_from_clean_data() {
        let data = synthetic();
        assert_eq!(data.times.len(), 100);
        let r = fit(&problem(data, 0.02), &FitOptions::default()).unwrap();
        assert!(r.converged, "{r:?}");
        assert!(r.sse < 1e-6, "{}", r.sse);
        assert!(r.sse <= r.initial_sse);
        for k in ["lambda_A", "lambda_B"] {
            assert!((r.params[k] / 0.04 - 1.0).abs() < 0.02, "{k} {}", r.params[k]);
        }
    }

    #[test]
    fn argument_errors() {
        let mut p = problem(synthetic(), 0.02);
        p.free_params.clear();
        assert!(matches!(fit(&p, &FitOptions::default()), Err(Error::Config(_))));
        let mut p = problem(synthetic(), 0.02);
        p.free_params = vec!["kappa_1".into()];
        assert!(fit(&p, &FitOptions::default()).is_err());
        let mut p = problem(synthetic(), 0.02);
        p.delays = DelayConfig::symmetric(1.0);
        assert!(matches!(fit(&p, &FitOptions::default()), Err(Error::Unsupported(_))));
        let mut p = problem(synthetic(), 0.02);
        p.free_params = vec!["lambda_A".into(), "lambda_A".into()];
        assert!(fit(&p, &FitOptions::default()).is_err());
    }

    #[test]
    fn time_series_validation() {
        let s = State::new(1.0, 1.0);
        assert!(TimeSeries::new(vec![0.0, 1.0], vec![s, s], None).is_ok());
        assert!(TimeSeries::new(vec![1.0, 1.0], vec![s, s], None).is_err());
        assert!(TimeSeries::new(vec![0.0], vec![s, s], None).is_err());
        assert!(TimeSeries::new(vec![0.0, 1.0], vec![s, s], Some(vec![1.0, 0.0])).is_err());
        assert!(TimeSeries::new(vec![], vec![], None).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let h = HistorySpec::constant(State::new(10.0, 10.0)).unwrap();
        let t = integrate(&lin(), &DelayConfig::none(), &h, 1.0, 0.1).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let ts = TimeSeries::read_csv(buf.as_slice()).unwrap();
        assert_eq!(ts.times.len(), 11);
        assert_eq!(ts.initial_history().unwrap().value, State::new(10.0, 10.0));
        for (a, b) in ts.observations.iter().zip(&t.states) {
            assert!((a.a - b.a).abs() <= 1e-8 * b.a.abs());
        }
        assert!(TimeSeries::read_csv("x,y\n1,2\n".as_bytes()).is_err());
        let w = TimeSeries::read_csv("t,A,B,w\n0,1,1,2\n1,2,2,4\n".as_bytes()).unwrap();
        assert_eq!(w.weights, Some(vec![2.0, 4.0]));
        assert_eq!(w.normalized_weights(), vec![2.0 / 3.0, 4.0 / 3.0]);
    }
}
