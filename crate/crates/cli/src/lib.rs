//! Scenario orchestration behind the `bohmsim` binary.
//!
//! A [`RunManifest`] pins one experiment: physics, source, ensemble size and
//! output location. [`run_scenario`] executes it and [`emit_plot_data`]
//! writes the resulting data files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use bohmsim_core::config::ConfigFile;
use bohmsim_core::export::{write_pattern, write_records, write_trajectories, Summary};
use bohmsim_core::oracles::{empty_interval_with, screen_oracles};
use bohmsim_core::{
    compare_patterns, derive_kinematics, histogram, integrate_trajectory, measure_gap, run_ensemble,
    sampling::{trajectory_rng, InitialSampler},
    selective_filter, validate_regime, DetectionRecord, EnsembleOptions, Error, Gap, IntegratorOptions, Pattern,
    PhysicalConfig, Projection, RegimeFinding, Result, Scenario, SourceSpec, SqmPredictor, Strictness, Trajectory,
    WaveFunction, WaveKind,
};

/// Smallest ensemble a manifest accepts.
pub const MIN_ENSEMBLE: usize = 100;
/// Threshold for "low intensity" when measuring the empty interval.
pub const GAP_PEAK_FRACTION: f64 = 0.05;

/// What a run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Trajectory ensemble only.
    Simulate,
    /// Quadrature predictions only.
    Predict,
    /// Both, plus divergences between them.
    Compare,
}

impl Mode {
    fn bqm(self) -> bool {
        self != Mode::Predict
    }

    fn sqm(self) -> bool {
        self != Mode::Simulate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: Scenario,
    pub config: PhysicalConfig,
    pub source: SourceSpec,
    pub n: usize,
    pub tol: f64,
    pub selective: bool,
    pub strict_regime: bool,
    pub strictness: Strictness,
    /// Histogram bin width; the detector width when unset.
    pub bin_width: Option<f64>,
    /// Number of trajectories written in full to `trajectories.csv`.
    pub dump_trajectories: usize,
    pub out: PathBuf,
    /// Worker threads; not part of the output.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl RunManifest {
    /// Built-in parameters for each scenario, in natural units.
    pub fn preset(scenario: Scenario) -> Self {
        let (config, source, selective) = match scenario {
            Scenario::Fig1Entangled | Scenario::Custom => {
                let cfg = PhysicalConfig::default().with_screen_tau(1.0);
                (cfg, SourceSpec::new(WaveKind::EntangledSymmetric), false)
            }
            Scenario::Fig2UnentangledSymmetric => {
                let cfg = PhysicalConfig { slit_offset: 0.05, ..Default::default() }.with_screen_tau(1.0);
                (cfg, SourceSpec::new(WaveKind::UnentangledProduct), true)
            }
            Scenario::Fig3UnentangledShifted => {
                let cfg = PhysicalConfig { slit_offset: 0.05, ..Default::default() }.with_screen_tau(20.0);
                let src = SourceSpec { y0_mean: 20.0, ..SourceSpec::new(WaveKind::UnentangledProduct) };
                (cfg, src, true)
            }
        };
        Self {
            scenario,
            config,
            source,
            n: 10_000,
            tol: 1e-9,
            selective,
            strict_regime: false,
            strictness: Strictness::default(),
            bin_width: None,
            dump_trajectories: 0,
            out: PathBuf::from("bohmsim-out"),
            workers: None,
        }
    }

    /// Overlay a JSON config file on the preset.
    pub fn apply_config_file(&mut self, path: &Path) -> Result<()> {
        let file = ConfigFile::load(path).map_err(|e| match e {
            Error::Io(io) => Error::InvalidConfig(format!("cannot read {}: {io}", path.display())),
            other => other,
        })?;
        file.apply(&mut self.config, &mut self.source, &mut self.strictness);
        Ok(())
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width.unwrap_or(self.config.detector_width)
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.source.validate()?;
        if self.n < MIN_ENSEMBLE {
            return Err(Error::InvalidConfig(format!("ensemble size must be at least {MIN_ENSEMBLE}, got {}", self.n)));
        }
        if !(self.bin_width() > 0.0) {
            return Err(Error::InvalidConfig(format!("bin width must be positive, got {}", self.bin_width())));
        }
        IntegratorOptions::with_tol(self.tol).validate()?;
        if self.workers == Some(0) {
            return Err(Error::InvalidConfig("worker count must be at least 1".into()));
        }
        Ok(())
    }

    pub fn wave(&self) -> Result<WaveFunction> {
        WaveFunction::new(self.source.wave_kind, self.config)
    }

    pub fn regime(&self) -> Result<Vec<RegimeFinding>> {
        let kin = derive_kinematics(&self.config)?;
        Ok(validate_regime(&self.config, &kin, &self.source, self.scenario, &self.strictness))
    }
}

/// Everything a run produced, ready to be written out.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub manifest: RunManifest,
    pub mode: Mode,
    pub summary: Summary,
    pub records: Vec<DetectionRecord>,
    pub trajectories: Vec<(u64, Trajectory)>,
    pub bqm_pattern: Option<Pattern>,
    pub bqm_selected_pattern: Option<Pattern>,
    pub sqm_marginal: Option<Pattern>,
    pub sqm_selective: Option<Pattern>,
}

/// Fails with `RegimeViolation` under `--strict-regime` when any finding is
/// unsatisfied.
pub fn check_regime(manifest: &RunManifest) -> Result<Vec<RegimeFinding>> {
    let findings = manifest.regime()?;
    if manifest.strict_regime {
        let failed: Vec<&str> = findings.iter().filter(|f| !f.satisfied).map(|f| f.name.as_str()).collect();
        if !failed.is_empty() {
            return Err(Error::RegimeViolation(format!("unsatisfied: {}", failed.join(", "))));
        }
    }
    Ok(findings)
}

/// Half-width of the histogram grid: the quadrature support, widened to hold
/// every recorded arrival.
fn screen_half_width(wf: &WaveFunction, records: &[DetectionRecord]) -> f64 {
    let support = wf.support_half_width(wf.kin.t_d, bohmsim_core::sqm::SUPPORT_WIDTHS);
    let reach =
        records.iter().filter(|r| r.is_completed()).map(|r| r.y1_final.abs().max(r.y2_final.abs())).fold(0.0, f64::max);
    support.max(1.05 * reach)
}

/// Largest SQM density inside `[lo, hi]` as a fraction of the pattern's peak.
fn peak_fraction_inside(pattern: &Pattern, lo: f64, hi: f64) -> f64 {
    let dens = pattern.densities();
    let peak = dens.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return 0.0;
    }
    (0..pattern.len())
        .filter(|&i| pattern.bin_edges[i] >= lo && pattern.bin_edges[i + 1] <= hi)
        .map(|i| dens[i])
        .fold(0.0, f64::max)
        / peak
}

pub fn run_scenario(manifest: &RunManifest, mode: Mode) -> Result<RunReport> {
    manifest.validate()?;
    let findings = check_regime(manifest)?;
    let wf = manifest.wave()?;
    let kin = wf.kin;
    let t_d = kin.t_d;
    let width = manifest.bin_width();

    let mut summary = Summary::default();
    let m = &mut summary.metadata;
    m.insert("scenario".into(), json!(manifest.scenario));
    m.insert("mode".into(), json!(mode));
    m.insert("seed".into(), json!(manifest.source.rng_seed));
    m.insert("n".into(), json!(manifest.n));
    m.insert("tol".into(), json!(manifest.tol));
    m.insert("selective".into(), json!(manifest.selective));
    m.insert("bin_width".into(), json!(width));
    m.insert("parameters".into(), serde_json::to_value(manifest.config)?);
    m.insert("kinematics".into(), serde_json::to_value(kin)?);
    m.insert("source".into(), serde_json::to_value(manifest.source)?);
    m.insert("regime".into(), serde_json::to_value(&findings)?);
    m.insert("crate_version".into(), json!(env!("CARGO_PKG_VERSION")));

    let y0_char = manifest.source.y0_mean;
    summary.oracles = screen_oracles(&manifest.config, &kin, y0_char);

    let mut records = Vec::new();
    let mut trajectories = Vec::new();
    let mut selected = Vec::new();
    if mode.bqm() {
        let opts = EnsembleOptions { workers: manifest.workers, ..EnsembleOptions::with_tol(manifest.tol) };
        records = run_ensemble(&wf, &manifest.source, manifest.n, &opts)?;
        selected = selective_filter(&records);
        let completed: Vec<&DetectionRecord> = records.iter().filter(|r| r.is_completed()).collect();
        let c = &mut summary.counts;
        c.insert("trajectories".into(), records.len() as u64);
        c.insert("completed".into(), completed.len() as u64);
        c.insert("aborted".into(), (records.len() - completed.len()) as u64);
        c.insert("node_events".into(), records.iter().map(|r| r.node_events as u64).sum());
        c.insert("selected_pairs".into(), selected.len() as u64);
        c.insert(
            "axis_crossings".into(),
            completed.iter().map(|r| (r.sign_changes[0] + r.sign_changes[1]) as u64).sum(),
        );
        c.insert("diagonal_crossings".into(), completed.iter().map(|r| r.diagonal_crossings as u64).sum());
        let max_pair_sum = completed.iter().map(|r| (r.y1_final + r.y2_final).abs()).fold(0.0, f64::max);
        summary.metadata.insert("max_abs_pair_sum".into(), json!(max_pair_sum));
        if !selected.is_empty() {
            let sums: Vec<f64> = selected.iter().map(|r| r.y1_final + r.y2_final).collect();
            let mean = sums.iter().sum::<f64>() / sums.len() as f64;
            summary.metadata.insert("selected_mean_pair_sum".into(), json!(mean));
        }

        if manifest.dump_trajectories > 0 {
            let sampler = InitialSampler::new(&wf, &manifest.source)?;
            let integ =
                IntegratorOptions { length_scale: wf.config.sigma0, ..IntegratorOptions::with_tol(manifest.tol) };
            for i in 0..manifest.dump_trajectories.min(manifest.n) as u64 {
                let (p, _) = sampler.draw(&mut trajectory_rng(manifest.source.rng_seed, i));
                trajectories.push((i, integrate_trajectory(&wf, p, t_d, &integ)?));
            }
        }
    }

    let half = screen_half_width(&wf, &records);
    let bins = Pattern::symmetric(half, width)?;
    let range = (bins.lo(), bins.hi());

    let bqm_pattern = if mode.bqm() { Some(histogram(&records, Projection::BothPooled, width, range)?) } else { None };
    let bqm_selected_pattern = if mode.bqm() && manifest.selective {
        Some(histogram(&selected, Projection::BothPooled, width, range)?)
    } else {
        None
    };

    let mut sqm_marginal = None;
    let mut sqm_selective = None;
    if mode.sqm() {
        let sqm = SqmPredictor::new(&wf, t_d)?;
        summary.metadata.insert("quadrature_grid".into(), serde_json::to_value(sqm.grid())?);
        summary.metadata.insert("normalization".into(), json!(sqm.normalization()));
        sqm_marginal = Some(sqm.marginal_pattern(&bins)?);
        if manifest.selective {
            let sel = sqm.conditional_pattern_selective(&bins)?;
            summary.metadata.insert("sqm_opposite_side_mass".into(), json!(sel.opposite_side_mass));
            summary.notes.push(
                "SQM selective pattern: opposite-side pairs of |psi|^2, renormalized to unit mass. \
                 The alternative reading, that SQM makes no prediction for selective detection, has no pattern."
                    .into(),
            );
            sqm_selective = Some(sel.pattern);
        }
    }

    if let (Some(obs), Some(exp)) = (&bqm_pattern, &sqm_marginal) {
        summary.divergences.insert("bqm_vs_sqm_marginal".into(), compare_patterns(obs, exp)?);
    }
    if let (Some(obs), Some(exp)) = (&bqm_selected_pattern, &sqm_selective) {
        if obs.total_weight > 0.0 {
            summary.divergences.insert("bqm_selected_vs_sqm_selective".into(), compare_patterns(obs, exp)?);
        }
    }

    if let Some(p) = bqm_selected_pattern.as_ref().or(bqm_pattern.as_ref()) {
        let gap = measure_gap(p, GAP_PEAK_FRACTION);
        summary.gaps.insert("bqm".into(), gap);
    }
    if let Some(sel) = &sqm_selective {
        // SQM intensity where the trajectory picture predicts an empty interval
        if let Ok(l) = empty_interval_with(&manifest.config, y0_char, t_d, &manifest.strictness) {
            let gap = summary.gaps.get("bqm").copied().filter(|g| !g.is_empty());
            let (lo, hi) = gap.map(|g| (g.start, g.end)).unwrap_or((-0.5 * l, 0.5 * l));
            let probe = Gap { length: hi - lo, center: 0.5 * (lo + hi), start: lo, end: hi };
            summary.metadata.insert("empty_interval_probe".into(), serde_json::to_value(probe)?);
            summary
                .metadata
                .insert("sqm_selective_peak_fraction_in_interval".into(), json!(peak_fraction_inside(sel, lo, hi)));
        }
    }

    Ok(RunReport {
        manifest: manifest.clone(),
        mode,
        summary,
        records,
        trajectories,
        bqm_pattern,
        bqm_selected_pattern,
        sqm_marginal,
        sqm_selective,
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Write CSV patterns, records and the JSON summary into `dir`. Returns the
/// file names written.
pub fn emit_plot_data(report: &RunReport, dir: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if report.mode.bqm() {
        write_records(create(dir, "records.csv")?, &report.records)?;
        written.push("records.csv".to_string());
    }
    let patterns = [
        ("bqm_pattern.csv", &report.bqm_pattern),
        ("bqm_selected_pattern.csv", &report.bqm_selected_pattern),
        ("sqm_marginal.csv", &report.sqm_marginal),
        ("sqm_selective.csv", &report.sqm_selective),
    ];
    for (name, pattern) in patterns {
        if let Some(p) = pattern {
            write_pattern(create(dir, name)?, p)?;
            written.push(name.to_string());
        }
    }
    if !report.trajectories.is_empty() {
        let wf = report.manifest.wave()?;
        let refs: Vec<(u64, &Trajectory)> = report.trajectories.iter().map(|(i, t)| (*i, t)).collect();
        write_trajectories(create(dir, "trajectories.csv")?, &wf, &refs)?;
        written.push("trajectories.csv".to_string());
    }
    report.summary.write(&dir.join("summary.json"))?;
    written.push("summary.json".to_string());
    Ok(written)
}

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_) | Error::ConfigParse(_) => 2,
        Error::RegimeViolation(_) => 3,
        Error::AbortQuota { .. } => 4,
        Error::Io(_) | Error::Csv(_) => 5,
        _ => 1,
    }
}
