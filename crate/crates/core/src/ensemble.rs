//! Trajectory ensembles and selective detection.
//!
//! Trajectory `i` draws its initial configuration from its own random
//! stream `(seed, i)`, so an ensemble is reproducible for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SourceSpec;
use crate::error::{Error, Result};
use crate::integrator::{integrate_trajectory, IntegratorOptions, TrajectoryStatus};
use crate::sampling::{trajectory_rng, InitialSampler};
use crate::wavefunction::{ConfigurationPoint, WaveFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub trajectory_id: u64,
    pub y1_initial: f64,
    pub y2_initial: f64,
    pub y1_final: f64,
    pub y2_final: f64,
    pub t_arrival: f64,
    /// Center-of-mass offset of the pair at emission.
    pub y0_initial: f64,
    pub status: TrajectoryStatus,
    pub sign_changes: [usize; 2],
    pub diagonal_crossings: usize,
    pub node_events: usize,
}

impl DetectionRecord {
    pub fn is_completed(&self) -> bool {
        self.status == TrajectoryStatus::Completed
    }

    pub fn initial(&self) -> ConfigurationPoint {
        ConfigurationPoint::new(self.y1_initial, self.y2_initial, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleOptions {
    pub integrator: IntegratorOptions,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Integration end time; `None` means the screen time.
    pub t_end: Option<f64>,
    /// Largest tolerated fraction of aborted trajectories.
    pub abort_quota: f64,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self { integrator: IntegratorOptions::default().terminal_only(), workers: None, t_end: None, abort_quota: 0.01 }
    }
}

impl EnsembleOptions {
    pub fn with_tol(tol: f64) -> Self {
        let mut o = Self::default();
        o.integrator.tol = tol;
        o
    }
}

fn in_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidConfig(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// `n` initial configurations at `t = 0`, trajectory `i` drawn from stream `i`.
pub fn sample_initial(wf: &WaveFunction, source: &SourceSpec, n: usize) -> Result<Vec<ConfigurationPoint>> {
    if n == 0 {
        return Err(Error::InvalidConfig("sample size must be at least 1".into()));
    }
    let sampler = InitialSampler::new(wf, source)?;
    Ok((0..n as u64).into_par_iter().map(|i| sampler.draw(&mut trajectory_rng(source.rng_seed, i)).0).collect())
}

/// Sample and integrate `n` trajectories to the screen (or `opts.t_end`).
///
/// Individual aborts are reported through each record's status; the run
/// fails only when the aborted fraction exceeds `opts.abort_quota`.
pub fn run_ensemble(
    wf: &WaveFunction,
    source: &SourceSpec,
    n: usize,
    opts: &EnsembleOptions,
) -> Result<Vec<DetectionRecord>> {
    if n == 0 {
        return Err(Error::InvalidConfig("ensemble size must be at least 1".into()));
    }
    let sampler = InitialSampler::new(wf, source)?;
    let t_end = opts.t_end.unwrap_or(wf.kin.t_d);
    let mut integ = opts.integrator;
    integ.length_scale = wf.config.sigma0;

    let results: Vec<Result<DetectionRecord>> = in_pool(opts.workers, || {
        (0..n as u64)
            .into_par_iter()
            .map(|i| {
                let (p, y0) = sampler.draw(&mut trajectory_rng(source.rng_seed, i));
                let traj = integrate_trajectory(wf, p, t_end, &integ)?;
                let end = traj.terminal();
                Ok(DetectionRecord {
                    trajectory_id: i,
                    y1_initial: p.y1,
                    y2_initial: p.y2,
                    y1_final: end.y1,
                    y2_final: end.y2,
                    t_arrival: end.t,
                    y0_initial: y0,
                    status: traj.status,
                    sign_changes: traj.sign_changes,
                    diagonal_crossings: traj.diagonal_crossings,
                    node_events: traj.node_events,
                })
            })
            .collect()
    })?;
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;
    let aborted = records.iter().filter(|r| !r.is_completed()).count();
    if aborted as f64 > opts.abort_quota * n as f64 {
        return Err(Error::AbortQuota { aborted, total: n });
    }
    Ok(records)
}

/// Keep completed pairs detected on opposite sides of the axis. Pairs with a
/// coordinate exactly on the axis are dropped.
pub fn selective_filter(records: &[DetectionRecord]) -> Vec<DetectionRecord> {
    records.iter().filter(|r| r.is_completed() && r.y1_final * r.y2_final < 0.0).copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{PhysicalConfig, WaveKind};

    fn rec(y1: f64, y2: f64, status: TrajectoryStatus) -> DetectionRecord {
        DetectionRecord {
            trajectory_id: 0,
            y1_initial: 0.0,
            y2_initial: 0.0,
            y1_final: y1,
            y2_final: y2,
            t_arrival: 1.0,
            y0_initial: 0.0,
            status,
            sign_changes: [0, 0],
            diagonal_crossings: 0,
            node_events: 0,
        }
    }

    #[test]
    fn selective_filter_cases() {
        let c = TrajectoryStatus::Completed;
        let kept = selective_filter(&[
            rec(1.0, -2.0, c),
            rec(1.0, 2.0, c),
            rec(-1.0, -2.0, c),
            rec(0.0, -2.0, c),
            rec(-3.0, 0.5, c),
            rec(1.0, -1.0, TrajectoryStatus::NodeAbort),
        ]);
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].y1_final, 1.0);
        assert_eq!(kept[1].y1_final, -3.0);
        assert_eq!(selective_filter(&kept), kept);
    }

    #[test]
    fn entangled_fixed_source_is_exactly_antisymmetric() {
        let wf = WaveFunction::new(WaveKind::EntangledSymmetric, PhysicalConfig::default()).unwrap();
        let pts = sample_initial(&wf, &SourceSpec::new(WaveKind::EntangledSymmetric).with_seed(3), 500).unwrap();
        assert!(pts.iter().all(|p| p.y1 + p.y2 == 0.0 && p.t == 0.0));
    }

    #[test]
    fn zero_samples_rejected() {
        let wf = WaveFunction::new(WaveKind::UnentangledProduct, PhysicalConfig::default()).unwrap();
        assert!(sample_initial(&wf, &SourceSpec::new(WaveKind::UnentangledProduct), 0).is_err());
    }

    #[test]
    fn worker_count_does_not_change_records() {
        let wf = WaveFunction::new(WaveKind::UnentangledProduct, PhysicalConfig::default()).unwrap();
        let src = SourceSpec::new(WaveKind::UnentangledProduct).with_seed(11);
        let one = run_ensemble(&wf, &src, 64, &EnsembleOptions { workers: Some(1), ..Default::default() }).unwrap();
        let many = run_ensemble(&wf, &src, 64, &EnsembleOptions { workers: Some(4), ..Default::default() }).unwrap();
        assert_eq!(one, many);
    }
}
