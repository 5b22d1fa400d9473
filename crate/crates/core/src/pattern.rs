//! Screen patterns: histograms of arrivals, divergences between patterns,
//! and low-intensity gap detection.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::ensemble::DetectionRecord;
use crate::error::{Error, Result};
use crate::integrator::TrajectoryStatus;

/// Binned weights on a screen grid. `counts` may hold raw arrival counts or
/// probabilities; `total_weight` is always their sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<f64>,
    pub total_weight: f64,
    pub bin_width: f64,
    /// Weight that fell outside the binned range and is not counted.
    #[serde(default)]
    pub outside: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Projection {
    Y1,
    Y2,
    /// Both arrivals of every pair.
    BothPooled,
}

impl Pattern {
    /// Empty pattern with bins of `bin_width` from `lo`; the last edge is the
    /// first one at or beyond `hi`.
    pub fn uniform(lo: f64, hi: f64, bin_width: f64) -> Result<Self> {
        if !(bin_width > 0.0) || !(hi > lo) {
            return Err(Error::InvalidConfig(format!("bad pattern grid [{lo}, {hi}] step {bin_width}")));
        }
        let n = ((hi - lo) / bin_width - 1e-9).ceil().max(1.0) as usize;
        let bin_edges = (0..=n).map(|i| lo + bin_width * i as f64).collect();
        Ok(Self { bin_edges, counts: vec![0.0; n], total_weight: 0.0, bin_width, outside: 0.0 })
    }

    /// Symmetric grid `[-half_width, half_width]` whose edges include zero.
    pub fn symmetric(half_width: f64, bin_width: f64) -> Result<Self> {
        let bins_per_side = (half_width / bin_width).ceil().max(1.0);
        Self::uniform(-bins_per_side * bin_width, bins_per_side * bin_width, bin_width)
    }

    pub fn with_weights(bin_edges: Vec<f64>, counts: Vec<f64>) -> Result<Self> {
        if bin_edges.len() != counts.len() + 1 || counts.is_empty() {
            return Err(Error::GridMismatch(format!("{} edges for {} bins", bin_edges.len(), counts.len())));
        }
        if bin_edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::GridMismatch("edges must be strictly increasing".into()));
        }
        if counts.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::InvalidConfig("pattern weights must be non-negative".into()));
        }
        let bin_width = bin_edges[1] - bin_edges[0];
        let total_weight = counts.iter().sum();
        Ok(Self { bin_edges, counts, total_weight, bin_width, outside: 0.0 })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.bin_edges[0]
    }

    pub fn hi(&self) -> f64 {
        *self.bin_edges.last().expect("pattern has edges")
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        0.5 * (self.bin_edges[i] + self.bin_edges[i + 1])
    }

    pub fn add(&mut self, y: f64, weight: f64) {
        match self.bin_of(y) {
            Some(i) => {
                self.counts[i] += weight;
                self.total_weight += weight;
            }
            None => self.outside += weight,
        }
    }

    fn bin_of(&self, y: f64) -> Option<usize> {
        if !(y >= self.lo() && y < self.hi()) {
            return None;
        }
        let i = ((y - self.lo()) / self.bin_width) as usize;
        // guard the floor against edge rounding
        let i = i.min(self.len() - 1);
        if y < self.bin_edges[i] {
            Some(i - 1)
        } else if y >= self.bin_edges[i + 1] {
            Some((i + 1).min(self.len() - 1))
        } else {
            Some(i)
        }
    }

    /// Weights normalized to unit sum (all zero for an empty pattern).
    pub fn probabilities(&self) -> Vec<f64> {
        if self.total_weight > 0.0 {
            self.counts.iter().map(|c| c / self.total_weight).collect()
        } else {
            vec![0.0; self.len()]
        }
    }

    /// Probability density per bin: normalized weight over bin width.
    pub fn densities(&self) -> Vec<f64> {
        self.probabilities().iter().zip(self.bin_edges.windows(2)).map(|(p, e)| p / (e[1] - e[0])).collect()
    }

    /// Pattern of the same grid mirrored through `y = 0`. Requires a grid
    /// symmetric about zero.
    pub fn mirrored(&self) -> Self {
        let mut out = self.clone();
        out.counts.reverse();
        out
    }
}

/// Histogram the terminal positions of completed records.
pub fn histogram(
    records: &[DetectionRecord],
    projection: Projection,
    bin_width: f64,
    range: (f64, f64),
) -> Result<Pattern> {
    let mut pattern = Pattern::uniform(range.0, range.1, bin_width)?;
    for r in records.iter().filter(|r| r.status == TrajectoryStatus::Completed) {
        match projection {
            Projection::Y1 => pattern.add(r.y1_final, 1.0),
            Projection::Y2 => pattern.add(r.y2_final, 1.0),
            Projection::BothPooled => {
                pattern.add(r.y1_final, 1.0);
                pattern.add(r.y2_final, 1.0);
            }
        }
    }
    Ok(pattern)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    /// Largest difference between the two cumulative distributions at bin edges.
    pub ks: f64,
    /// Half the summed absolute differences of normalized bin weights.
    pub total_variation: f64,
    /// Per-bin `(O - E)^2 / E` with `O` the observed weight and
    /// `E = observed.total_weight * expected probability`.
    pub chi2_per_bin: Vec<f64>,
    /// Pearson statistic after pooling adjacent bins until every group
    /// expects at least five arrivals.
    pub chi2: f64,
    pub chi2_dof: usize,
    pub chi2_p_value: f64,
}

/// Divergences between an observed pattern and an expected one on the same grid.
pub fn compare_patterns(observed: &Pattern, expected: &Pattern) -> Result<Divergence> {
    if observed.len() != expected.len() {
        return Err(Error::GridMismatch(format!("{} vs {} bins", observed.len(), expected.len())));
    }
    let scale = observed.hi().abs().max(observed.lo().abs()).max(observed.bin_width);
    for (a, b) in observed.bin_edges.iter().zip(&expected.bin_edges) {
        if (a - b).abs() > 1e-9 * scale {
            return Err(Error::GridMismatch(format!("edge {a} vs {b}")));
        }
    }
    let p = observed.probabilities();
    let q = expected.probabilities();

    let mut ks: f64 = 0.0;
    let (mut cp, mut cq) = (0.0, 0.0);
    let mut tv = 0.0;
    for (pi, qi) in p.iter().zip(&q) {
        cp += pi;
        cq += qi;
        ks = ks.max((cp - cq).abs());
        tv += (pi - qi).abs();
    }

    let n = observed.total_weight;
    let chi2_per_bin: Vec<f64> = observed
        .counts
        .iter()
        .zip(&q)
        .map(|(&o, &qi)| {
            let e = n * qi;
            if e > 0.0 {
                (o - e).powi(2) / e
            } else if o > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .collect();

    let mut groups: Vec<(f64, f64)> = Vec::new();
    let (mut go, mut ge) = (0.0, 0.0);
    for (&o, &qi) in observed.counts.iter().zip(&q) {
        go += o;
        ge += n * qi;
        if ge >= 5.0 {
            groups.push((go, ge));
            go = 0.0;
            ge = 0.0;
        }
    }
    if go > 0.0 || ge > 0.0 {
        match groups.last_mut() {
            Some(last) => {
                last.0 += go;
                last.1 += ge;
            }
            None => groups.push((go, ge)),
        }
    }
    let chi2: f64 = groups
        .iter()
        .map(|&(o, e)| {
            if e > 0.0 {
                (o - e).powi(2) / e
            } else if o > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .sum();
    let chi2_dof = groups.len().saturating_sub(1);
    let chi2_p_value = if chi2 == 0.0 {
        1.0
    } else if chi2_dof == 0 || !chi2.is_finite() {
        0.0
    } else {
        let dist = ChiSquared::new(chi2_dof as f64).expect("positive degrees of freedom");
        dist.sf(chi2)
    };

    Ok(Divergence { ks, total_variation: 0.5 * tv, chi2_per_bin, chi2, chi2_dof, chi2_p_value })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub length: f64,
    pub center: f64,
    pub start: f64,
    pub end: f64,
}

impl Gap {
    pub fn none() -> Self {
        Self { length: 0.0, center: 0.0, start: 0.0, end: 0.0 }
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0.0
    }
}

/// Widest run of bins below `peak_fraction` of the peak density that is
/// enclosed on both sides by bins at or above it.
pub fn measure_gap(pattern: &Pattern, peak_fraction: f64) -> Gap {
    assert!(peak_fraction > 0.0 && peak_fraction < 1.0, "peak_fraction must lie in (0, 1)");
    let d = pattern.densities();
    let peak = d.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Gap::none();
    }
    let threshold = peak_fraction * peak;
    let mut best = Gap::none();
    let mut last_high: Option<usize> = None;
    for (i, &di) in d.iter().enumerate() {
        if di >= threshold {
            if let Some(h) = last_high {
                if i > h + 1 {
                    let start = pattern.bin_edges[h + 1];
                    let end = pattern.bin_edges[i];
                    if end - start > best.length {
                        best = Gap { length: end - start, center: 0.5 * (start + end), start, end };
                    }
                }
            }
            last_high = Some(i);
        }
    }
    best
}
