//! Adaptive Dormand–Prince 4(5) integration of two-particle trajectories.
//!
//! Only the transverse coordinates are integrated; the forward coordinate is
//! `u_x t` for both particles, so the screen is reached at `t_D` exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guidance::velocity;
use crate::wavefunction::{ConfigurationPoint, WaveFunction};

pub type State = [f64; 2];

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    /// Local error tolerance per step, relative to `length_scale + |y|`.
    pub tol: f64,
    pub length_scale: f64,
    /// Minimum step as a fraction of the integration span.
    pub min_step_fraction: f64,
    /// Maximum step as a fraction of the integration span.
    pub max_step_fraction: f64,
    /// Step attempts (accepted and rejected) before giving up.
    pub max_steps: usize,
    /// Number of evenly spaced output intervals; `None` keeps only the
    /// initial and terminal points.
    pub output_intervals: Option<usize>,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            length_scale: 1.0,
            min_step_fraction: 1e-12,
            max_step_fraction: 1e-2,
            max_steps: 1_000_000,
            output_intervals: Some(200),
        }
    }
}

impl IntegratorOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Default::default() }
    }

    pub fn terminal_only(mut self) -> Self {
        self.output_intervals = None;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1e-12..=1e-3).contains(&self.tol) {
            return Err(Error::InvalidConfig(format!("tolerance {} outside [1e-12, 1e-3]", self.tol)));
        }
        if !(self.length_scale > 0.0) {
            return Err(Error::InvalidConfig("length scale must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryStatus {
    Completed,
    NodeAbort,
    StepLimitAbort,
}

impl TrajectoryStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TrajectoryStatus::Completed => "completed",
            TrajectoryStatus::NodeAbort => "node-abort",
            TrajectoryStatus::StepLimitAbort => "step-limit-abort",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Output samples, strictly increasing in `t`, starting at the initial
    /// point. Ends at `t_end` when the status is `Completed`.
    pub samples: Vec<ConfigurationPoint>,
    pub status: TrajectoryStatus,
    /// Smallest interference ratio `|psi| / sum |terms|` met on accepted steps.
    pub min_density_seen: f64,
    /// Step attempts rejected because the velocity hit the node threshold.
    pub node_events: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Accepted steps over which `y1` (resp. `y2`) changed sign or touched zero.
    pub sign_changes: [usize; 2],
    /// Accepted steps over which `y1 - y2` changed sign or touched zero.
    pub diagonal_crossings: usize,
}

impl Trajectory {
    pub fn initial(&self) -> &ConfigurationPoint {
        &self.samples[0]
    }

    pub fn terminal(&self) -> &ConfigurationPoint {
        self.samples.last().expect("trajectory has at least the initial sample")
    }
}

fn crossed(old: f64, new: f64) -> bool {
    old != 0.0 && old * new <= 0.0
}

/// Integrate `dy/dt = f(t, y)` from `(t0, y0)` to `t_end`.
///
/// `f` may fail (e.g. near a node); the step is then shrunk. `observe` is
/// called after every accepted step with `(t, y)`.
pub(crate) fn dopri5<F, O>(
    mut f: F,
    t0: f64,
    y0: State,
    t_end: f64,
    opts: &IntegratorOptions,
    mut observe: O,
) -> (TrajectoryStatus, StepStats)
where
    F: FnMut(f64, &State) -> Result<State>,
    O: FnMut(f64, &State, bool),
{
    let span = t_end - t0;
    let h_min = opts.min_step_fraction * span;
    let h_max = opts.max_step_fraction * span;
    let mut stats = StepStats::default();
    let mut t = t0;
    let mut y = y0;
    let mut h = 0.1 * h_max;
    let mut next_output = opts.output_intervals.map(|n| (1usize, n));
    let mut k1: Option<State> = None;

    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return (TrajectoryStatus::StepLimitAbort, stats);
        }
        let mut target = t_end;
        if let Some((k, n)) = next_output {
            target = target.min(t0 + span * k as f64 / n as f64);
        }
        let clipped = t + h >= target;
        let step = if clipped { target - t } else { h };

        let first = match k1 {
            Some(k) => Ok(k),
            None => f(t, &y),
        };
        let attempt = first.and_then(|k1v| stage_step(&mut f, t, &y, step, k1v));
        let (y_new, k7, err_vec) = match attempt {
            Ok(v) => v,
            Err(_) => {
                stats.node_events += 1;
                stats.rejected += 1;
                k1 = None;
                h = 0.25 * step;
                if h < h_min {
                    return (TrajectoryStatus::NodeAbort, stats);
                }
                continue;
            }
        };

        let mut err: f64 = 0.0;
        for i in 0..2 {
            let sc = opts.tol * (opts.length_scale + y[i].abs().max(y_new[i].abs()));
            err = err.max((err_vec[i] / sc).abs());
        }
        if !err.is_finite() {
            err = f64::INFINITY;
        }

        if err <= 1.0 {
            stats.accepted += 1;
            t = if clipped { target } else { t + step };
            y = y_new;
            k1 = Some(k7);
            let mut at_output = false;
            if clipped {
                if let Some((k, n)) = next_output {
                    if (t - (t0 + span * k as f64 / n as f64)).abs() <= f64::EPSILON * t_end.abs() {
                        at_output = true;
                        next_output = if k < n { Some((k + 1, n)) } else { None };
                    }
                }
            }
            observe(t, &y, at_output || t >= t_end);
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            // keep the pre-clip step so output cadence does not shrink it permanently
            h = (h.max(step) * factor).min(h_max);
        } else {
            stats.rejected += 1;
            h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < h_min {
                return (TrajectoryStatus::NodeAbort, stats);
            }
        }
    }
    (TrajectoryStatus::Completed, stats)
}

type StageResult = (State, State, State);

fn stage_step<F>(f: &mut F, t: f64, y: &State, h: f64, k1: State) -> Result<StageResult>
where
    F: FnMut(f64, &State) -> Result<State>,
{
    let mut k = [[0.0; 2]; 7];
    k[0] = k1;
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                ys[0] += h * a * kj[0];
                ys[1] += h * a * kj[1];
            }
        }
        k[s] = f(t + C[s] * h, &ys)?;
    }
    // the seventh stage is evaluated at the fifth-order solution
    let mut y_new = *y;
    for (j, kj) in k.iter().enumerate().take(6) {
        y_new[0] += h * A[6][j] * kj[0];
        y_new[1] += h * A[6][j] * kj[1];
    }
    let mut err = [0.0; 2];
    for (j, kj) in k.iter().enumerate() {
        err[0] += h * E[j] * kj[0];
        err[1] += h * E[j] * kj[1];
    }
    Ok((y_new, k[6], err))
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub node_events: usize,
}

/// Integrate the guidance equation from `initial` (at `t = 0`) to `t_end`.
pub fn integrate_trajectory(
    wf: &WaveFunction,
    initial: ConfigurationPoint,
    t_end: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    opts.validate()?;
    if initial.t != 0.0 {
        return Err(Error::InvalidConfig(format!("initial time must be 0, got {}", initial.t)));
    }
    if !(t_end > 0.0) {
        return Err(Error::InvalidConfig(format!("end time must be positive, got {t_end}")));
    }
    let mut samples = vec![initial];
    let keep_samples = opts.output_intervals.is_some();
    let mut sign_changes = [0usize; 2];
    let mut diagonal_crossings = 0usize;
    let mut min_ratio = wf.interference_ratio(&initial);
    let mut prev = [initial.y1, initial.y2];
    let mut last = initial;

    let rhs = |t: f64, y: &State| -> Result<State> {
        let v = velocity(wf, &ConfigurationPoint::new(y[0], y[1], t))?;
        Ok([v.v1, v.v2])
    };
    let (status, stats) = dopri5(rhs, 0.0, [initial.y1, initial.y2], t_end, opts, |t, y, at_output| {
        let p = ConfigurationPoint::new(y[0], y[1], t);
        for i in 0..2 {
            if crossed(prev[i], y[i]) {
                sign_changes[i] += 1;
            }
        }
        if crossed(prev[0] - prev[1], y[0] - y[1]) {
            diagonal_crossings += 1;
        }
        min_ratio = min_ratio.min(wf.interference_ratio(&p));
        prev = *y;
        last = p;
        if keep_samples && at_output {
            samples.push(p);
        }
    });
    if !keep_samples && last.t > 0.0 {
        samples.push(last);
    }
    Ok(Trajectory {
        samples,
        status,
        min_density_seen: min_ratio,
        node_events: stats.node_events,
        accepted_steps: stats.accepted,
        rejected_steps: stats.rejected,
        sign_changes,
        diagonal_crossings,
    })
}
