//! Fixed-step RK4 for the delayed system, reading delayed values from a cubic
//! Hermite interpolant of the stored solution.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DelayConfig, DelayedState, Model, State};

pub const DEFAULT_DT: f64 = 0.01;

/// Below this half-range (nM) a trajectory counts as settled.
pub const OSCILLATION_FLOOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HistoryKind {
    Constant,
}

/// Solution on `t ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistorySpec {
    pub kind: HistoryKind,
    pub value: State,
}

impl HistorySpec {
    /// Constant history; the value must be finite and non-negative.
    pub fn constant(value: State) -> Result<Self> {
        if !(value.a >= 0.0 && value.b >= 0.0) {
            return Err(Error::invalid(
                "history",
                value.a.min(value.b),
                "history concentrations must be non-negative",
            ));
        }
        Self::constant_unchecked_sign(value)
    }

    /// Constant history that may hold negative values, e.g. a perturbation
    /// around an equilibrium.
    pub fn constant_unchecked_sign(value: State) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::invalid("history", f64::NAN, "history must be finite"));
        }
        Ok(Self {
            kind: HistoryKind::Constant,
            value,
        })
    }

    fn at(&self, _t: f64) -> State {
        match self.kind {
            HistoryKind::Constant => self.value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub model: Model,
    pub delays: DelayConfig,
    pub history: HistorySpec,
    /// min
    pub dt: f64,
    /// min
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// min, strictly increasing, starts at 0
    pub times: Vec<f64>,
    /// nM
    pub states: Vec<State>,
    /// right-hand side at each stored point (nM/min), used for interpolation
    #[serde(skip)]
    rates: Vec<State>,
    pub meta: TrajectoryMeta,
    /// non-fatal observations such as negative concentrations
    pub diagnostics: Vec<String>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> State {
        *self.states.last().expect("trajectory holds at least the initial point")
    }

    /// Dense output: history for `t ≤ 0`, Hermite interpolation inside.
    pub fn state_at(&self, t: f64) -> Option<State> {
        if t <= 0.0 {
            return Some(self.meta.history.at(t));
        }
        let last = *self.times.last()?;
        if t > last || self.rates.len() != self.times.len() {
            return None;
        }
        Some(hermite(&self.times, &self.states, &self.rates, t))
    }

    /// CSV with header `t,A,B` and 9 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["t", "A", "B"]).map_err(io)?;
        for (t, s) in self.times.iter().zip(&self.states) {
            w.write_record([format!("{t:.8e}"), format!("{:.8e}", s.a), format!("{:.8e}", s.b)])
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

/// Cubic Hermite interpolation on the stored grid; `t` must lie inside it.
fn hermite(times: &[f64], states: &[State], rates: &[State], t: f64) -> State {
    let i = times.partition_point(|&x| x < t);
    if i == 0 {
        return states[0];
    }
    if i == times.len() {
        return states[i - 1];
    }
    if times[i] == t {
        return states[i];
    }
    let (t0, t1) = (times[i - 1], times[i]);
    let h = t1 - t0;
    let u = (t - t0) / h;
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    h00 * states[i - 1] + (h * h10) * rates[i - 1] + h01 * states[i] + (h * h11) * rates[i]
}

struct Integrator<'a> {
    model: &'a Model,
    delays: [f64; 4],
    history: HistorySpec,
    times: Vec<f64>,
    states: Vec<State>,
    rates: Vec<State>,
}

impl Integrator<'_> {
    fn past(&self, t: f64) -> State {
        if t <= 0.0 {
            self.history.at(t)
        } else {
            hermite(&self.times, &self.states, &self.rates, t)
        }
    }

    fn delayed(&self, t: f64, current: State) -> DelayedState {
        let [t1, t2, t12, t21] = self.delays;
        let pick = |tau: f64| if tau == 0.0 { current } else { self.past(t - tau) };
        DelayedState {
            a_tau1: pick(t1).a,
            b_tau2: pick(t2).b,
            b_tau12: pick(t12).b,
            a_tau21: pick(t21).a,
        }
    }

    fn eval(&self, t: f64, s: State) -> Result<State> {
        self.model.rhs(s, &self.delayed(t, s))
    }
}

/// Integrates from `t = 0` to `t_end` with fixed step `dt` (min).
///
/// Times are `i·dt`; a shorter final step lands exactly on `t_end`. Every
/// positive delay must be at least `dt` so that delayed lookups never reach
/// past the last completed step.
pub fn integrate(
    model: &Model,
    delays: &DelayConfig,
    history: &HistorySpec,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    model.validate()?;
    delays.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", dt, "step size must be finite and positive"));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::invalid("t_end", t_end, "end time must be finite and positive"));
    }
    if let Some(tau_min) = delays.min_positive() {
        if dt > tau_min {
            return Err(Error::Config(format!(
                "dt = {dt} min exceeds the smallest positive delay {tau_min} min"
            )));
        }
    }

    let ratio = t_end / dt;
    let whole = ratio.round();
    let (n_full, partial) = if (ratio - whole).abs() <= 1e-9 * whole.max(1.0) {
        (whole as usize, false)
    } else {
        (ratio.floor() as usize, true)
    };
    let n_points = n_full + 1 + usize::from(partial);

    let mut it = Integrator {
        model,
        delays: delays.as_array(),
        history: *history,
        times: Vec::with_capacity(n_points),
        states: Vec::with_capacity(n_points),
        rates: Vec::with_capacity(n_points),
    };
    let mut diagnostics = Vec::new();
    let mut warned_negative = false;
    let history_non_negative = history.value.a >= 0.0 && history.value.b >= 0.0;

    let mut t = 0.0;
    let mut y = history.at(0.0);
    it.times.push(t);
    it.states.push(y);

    for i in 1..n_points {
        let t_next = if i == n_points - 1 { t_end } else { i as f64 * dt };
        let h = t_next - t;

        let k1 = it.eval(t, y)?;
        // stored before the later stages read the interval ending at t
        it.rates.push(k1);
        let k2 = it.eval(t + 0.5 * h, y + (0.5 * h) * k1)?;
        let k3 = it.eval(t + 0.5 * h, y + (0.5 * h) * k2)?;
        let k4 = it.eval(t_next, y + h * k3)?;
        let y_next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        if !y_next.is_finite() {
            return Err(Error::NonFinite {
                time: t_next,
                detail: format!("state became {y_next:?} after a step from {y:?} at t = {t}"),
            });
        }
        if history_non_negative && !warned_negative && (y_next.a < 0.0 || y_next.b < 0.0) {
            let msg = format!("negative concentration {y_next:?} at t = {t_next}");
            log::warn!("{msg}");
            diagnostics.push(msg);
            warned_negative = true;
        }
        t = t_next;
        y = y_next;
        it.times.push(t);
        it.states.push(y);
    }
    let k_end = it.eval(t, y)?;
    it.rates.push(k_end);

    Ok(Trajectory {
        times: it.times,
        states: it.states,
        rates: it.rates,
        meta: TrajectoryMeta {
            model: *model,
            delays: *delays,
            history: *history,
            dt,
            t_end,
        },
        diagnostics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationMetrics {
    /// half the peak-to-peak range of A (nM)
    pub amplitude: f64,
    /// mean spacing of successive maxima of A (min); none when settled
    pub period: Option<f64>,
    pub maxima: usize,
}

/// Amplitude and period of A after dropping `t < t_discard`.
pub fn oscillation_metrics(traj: &Trajectory, t_discard: f64) -> Result<OscillationMetrics> {
    let t_end = traj.times.last().copied().unwrap_or(0.0);
    if t_discard.is_nan() || t_discard >= t_end {
        return Err(Error::invalid(
            "t_discard",
            t_discard,
            "transient cut must lie before the end of the trajectory",
        ));
    }
    let start = traj.times.partition_point(|&t| t < t_discard);
    let times = &traj.times[start..];
    let a: Vec<f64> = traj.states[start..].iter().map(|s| s.a).collect();
    let (lo, hi) = a
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let amplitude = 0.5 * (hi - lo);

    let mut peaks = Vec::new();
    for i in 1..a.len().saturating_sub(1) {
        if a[i] > a[i - 1] && a[i] >= a[i + 1] {
            // vertex of the parabola through the three samples
            let denom = a[i - 1] - 2.0 * a[i] + a[i + 1];
            let shift = if denom != 0.0 {
                0.5 * (a[i - 1] - a[i + 1]) / denom
            } else {
                0.0
            };
            let h = 0.5 * (times[i + 1] - times[i - 1]);
            peaks.push(times[i] + shift * h);
        }
    }
    let period = if amplitude >= OSCILLATION_FLOOR && peaks.len() >= 2 {
        Some((peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64)
    } else {
        None
    };
    Ok(OscillationMetrics {
        amplitude,
        period,
        maxima: peaks.len(),
    })
}
