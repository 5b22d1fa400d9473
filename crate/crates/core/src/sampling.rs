//! Initial-position sampling from tabulated densities.
//!
//! The production path is an inverse-CDF lookup on a dense grid with linear
//! interpolation of the cumulative distribution. A rejection sampler with an
//! exact two-Gaussian envelope is kept as an independent cross-check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{SourceSpec, WaveKind};
use crate::error::{Error, Result};
use crate::wavefunction::{ConfigurationPoint, LogPair, WaveFunction};

/// Grid points used to tabulate initial densities.
pub const TABLE_POINTS: usize = 1 << 14;
/// Tabulation half-width beyond the outer slit center, in units of `sigma0`.
pub const TABLE_WIDTHS: f64 = 8.0;
/// Minimum acceptance rate before the rejection sampler reports failure.
pub const MIN_ACCEPTANCE: f64 = 1e-3;

/// Independent random stream for trajectory `index`: the master seed keys
/// a ChaCha8 generator and the index selects its stream.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Inverse-CDF sampler for a density tabulated on a uniform grid.
#[derive(Debug, Clone)]
pub struct TabulatedSampler {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl TabulatedSampler {
    pub fn new<F: FnMut(f64) -> f64>(lo: f64, hi: f64, points: usize, mut density: F) -> Result<Self> {
        if !(hi > lo) || points < 2 {
            return Err(Error::InvalidConfig(format!("bad tabulation range [{lo}, {hi}] with {points} points")));
        }
        let h = (hi - lo) / (points - 1) as f64;
        let grid: Vec<f64> = (0..points).map(|i| lo + h * i as f64).collect();
        let values: Vec<f64> = grid.iter().map(|&y| density(y)).collect();
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::SamplingFailure("tabulated density is negative or non-finite".into()));
        }
        let mut cdf = Vec::with_capacity(points);
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::SamplingFailure("tabulated density has no mass".into()));
        }
        for c in &mut cdf {
            *c /= acc;
        }
        Ok(Self { grid, cdf })
    }

    /// Position whose interpolated CDF equals `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let (y0, y1) = (self.grid[i - 1], self.grid[i]);
        if c1 > c0 {
            y0 + (u - c0) / (c1 - c0) * (y1 - y0)
        } else {
            y0
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    pub fn cdf_at(&self, y: f64) -> f64 {
        if y <= self.grid[0] {
            return 0.0;
        }
        if y >= *self.grid.last().unwrap() {
            return 1.0;
        }
        let h = self.grid[1] - self.grid[0];
        let i = (((y - self.grid[0]) / h) as usize).min(self.grid.len() - 2);
        let f = (y - self.grid[i]) / h;
        self.cdf[i] + f * (self.cdf[i + 1] - self.cdf[i])
    }
}

/// Draws initial configurations for one source and wave function.
#[derive(Debug, Clone)]
pub struct InitialSampler {
    kind: WaveKind,
    source: SourceSpec,
    /// Entangled kinds: offset `y1 - y0` of particle 1 from the pair's
    /// center of mass. Product kind: single-particle position.
    table: TabulatedSampler,
}

impl InitialSampler {
    pub fn new(wf: &WaveFunction, source: &SourceSpec) -> Result<Self> {
        source.validate()?;
        let half = wf.config.slit_offset + TABLE_WIDTHS * wf.config.sigma0;
        let table = if wf.kind.is_entangled() {
            // At t = 0 the entangled amplitude factors into a center-of-mass
            // Gaussian times a function of y1 - y2, so the conditional law of
            // y1 - y0 given y0 is the same for every y0.
            TabulatedSampler::new(-half, half, TABLE_POINTS, |d| relative_density(wf, d))?
        } else {
            TabulatedSampler::new(-half, half, TABLE_POINTS, |y| wf.single_particle(y, 0.0).norm_sqr())?
        };
        Ok(Self { kind: wf.kind, source: *source, table })
    }

    pub fn table(&self) -> &TabulatedSampler {
        &self.table
    }

    /// Returns the configuration and the pair's center-of-mass offset.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (ConfigurationPoint, f64) {
        if self.kind.is_entangled() {
            let z: f64 = StandardNormal.sample(rng);
            let y0 = if self.source.y0_spread > 0.0 {
                self.source.y0_mean + self.source.y0_spread * z
            } else {
                self.source.y0_mean
            };
            let d = self.table.sample(rng);
            let p = ConfigurationPoint::new(y0 + d, y0 - d, 0.0);
            (p, y0)
        } else {
            let y1 = self.source.y0_mean + self.table.sample(rng);
            let y2 = self.source.y0_mean + self.table.sample(rng);
            (ConfigurationPoint::new(y1, y2, 0.0), 0.5 * (y1 + y2))
        }
    }
}

/// `|psi(d, -d, 0)|^2`: the conditional density of `y1 - y0` for the
/// entangled kinds.
pub fn relative_density(wf: &WaveFunction, d: f64) -> f64 {
    wf.psi(&ConfigurationPoint::new(d, -d, 0.0)).norm_sqr()
}

/// Rejection sampler for a two-term superposition `|e1 + e2|^2` whose terms
/// have Gaussian moduli with equal width. The envelope
/// `2 (|e1|^2 + |e2|^2)` is an equal-weight two-Gaussian mixture.
pub struct RejectionSampler<'a> {
    centers: [f64; 2],
    std: f64,
    terms: Box<dyn Fn(f64) -> LogPair + Sync + 'a>,
    pub proposals: u64,
    pub accepted: u64,
}

impl<'a> RejectionSampler<'a> {
    /// Cross-check sampler for the same quantity [`InitialSampler`] tabulates.
    pub fn for_wave(wf: &'a WaveFunction) -> Self {
        let y = wf.config.slit_offset;
        let s = wf.config.sigma0;
        if wf.kind.is_entangled() {
            Self {
                centers: [y, -y],
                std: s / 2f64.sqrt(),
                terms: Box::new(move |d| wf.entangled_terms(&ConfigurationPoint::new(d, -d, 0.0))),
                proposals: 0,
                accepted: 0,
            }
        } else {
            Self {
                centers: [y, -y],
                std: s,
                terms: Box::new(move |v| wf.single_terms(v, 0.0)),
                proposals: 0,
                accepted: 0,
            }
        }
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            1.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        loop {
            self.proposals += 1;
            let c = if rng.random::<bool>() { self.centers[0] } else { self.centers[1] };
            let z: f64 = StandardNormal.sample(rng);
            let y = c + self.std * z;
            let terms = (self.terms)(y);
            let (_, e1, e2) = terms.scaled();
            let accept = (e1 + e2).norm_sqr() / (2.0 * (e1.norm_sqr() + e2.norm_sqr()));
            if rng.random::<f64>() < accept {
                self.accepted += 1;
                return Ok(y);
            }
            if self.proposals >= 10_000 && self.acceptance_rate() < MIN_ACCEPTANCE {
                return Err(Error::SamplingFailure(format!(
                    "rejection acceptance rate {:.2e} below floor {MIN_ACCEPTANCE:e}",
                    self.acceptance_rate()
                )));
            }
        }
    }
}
