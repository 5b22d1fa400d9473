//! Standard quantum-mechanical predictions by quadrature.
//!
//! All probabilities are `|psi|^2` integrals divided by the numerically
//! computed norm `Z(t)`; the amplitude's own normalization constants are
//! never used. Integrals run over a symmetric support grid
//! `[-H, H]` with `H = Y + |u_y t| + 8 sigma0 sqrt(1 + tau^2)`, split into
//! an even number of 32-point Gauss–Legendre panels so that the axis
//! `y = 0` is always a panel boundary.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::Pattern;
use crate::quadrature::{composite_points, GaussLegendre};
use crate::wavefunction::{ConfigurationPoint, Slit, WaveFunction};

/// Support half-width in units of the spread packet width.
pub const SUPPORT_WIDTHS: f64 = 8.0;
/// Relative change of `Z` under grid doubling that counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-8;
const GL_PANEL: usize = 32;
const MAX_PANELS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureRule {
    Trapezoid,
    GaussLegendreComposite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub y_min: f64,
    pub y_max: f64,
    pub n_points: usize,
    pub rule: QuadratureRule,
}

impl QuadratureGrid {
    /// Default Gauss–Legendre grid for `wf` at time `t`.
    pub fn for_wave(wf: &WaveFunction, t: f64) -> Self {
        let h = wf.support_half_width(t, SUPPORT_WIDTHS);
        let c = &wf.config;
        let tau = c.tau_at(t);
        let width = c.sigma0 * (1.0 + tau * tau).sqrt();
        // shortest interference period in either coordinate
        let period = if tau > 0.0 {
            std::f64::consts::PI * c.sigma0 * c.sigma0 * (1.0 + tau * tau) / (c.slit_offset * tau)
        } else {
            f64::INFINITY
        };
        let scale = width.min(period);
        let panels = ((2.0 * h) / (0.5 * scale)).ceil() as usize;
        let panels = (panels.clamp(8, MAX_PANELS) + 1) & !1;
        Self { y_min: -h, y_max: h, n_points: panels * GL_PANEL, rule: QuadratureRule::GaussLegendreComposite }
    }

    pub fn trapezoid(y_min: f64, y_max: f64, n_points: usize) -> Self {
        Self { y_min, y_max, n_points, rule: QuadratureRule::Trapezoid }
    }

    pub fn refined(&self) -> Self {
        Self { n_points: 2 * self.n_points, ..*self }
    }

    pub fn validate(&self, wf: &WaveFunction, t: f64) -> Result<()> {
        if self.n_points < 64 {
            return Err(Error::InvalidConfig(format!("quadrature grid needs >= 64 points, got {}", self.n_points)));
        }
        let need = wf.support_half_width(t, 6.0);
        if self.y_min > -need || self.y_max < need {
            return Err(Error::InvalidConfig(format!(
                "quadrature grid [{}, {}] does not cover +-{need}",
                self.y_min, self.y_max
            )));
        }
        Ok(())
    }

    /// Nodes and weights of the rule.
    pub fn points(&self) -> Vec<(f64, f64)> {
        match self.rule {
            QuadratureRule::GaussLegendreComposite => {
                let panels = (self.n_points / GL_PANEL).max(1);
                composite_points(GaussLegendre::panel32(), self.y_min, self.y_max, panels).collect()
            }
            QuadratureRule::Trapezoid => {
                let n = self.n_points.max(2);
                let h = (self.y_max - self.y_min) / (n - 1) as f64;
                (0..n)
                    .map(|i| {
                        let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
                        (self.y_min + h * i as f64, w)
                    })
                    .collect()
            }
        }
    }
}

/// Slit amplitudes at the nodes of a 1D rule.
#[derive(Debug, Clone)]
struct NodeAmplitudes {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl NodeAmplitudes {
    fn new(wf: &WaveFunction, t: f64, points: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let (nodes, weights): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        let a = nodes.iter().map(|&y| wf.packet(Slit::A, y, t)).collect();
        let b = nodes.iter().map(|&y| wf.packet(Slit::B, y, t)).collect();
        Self { nodes, weights, a, b }
    }
}

/// `|psi|^2` at a node pair from precomputed slit amplitudes.
#[inline]
fn pair_density(wf: &WaveFunction, a1: Complex64, b1: Complex64, a2: Complex64, b2: Complex64) -> f64 {
    if wf.kind.is_entangled() {
        (a1 * b2 + a2 * b1 * wf.kind.exchange_sign()).norm_sqr()
    } else {
        ((a1 + b1) * (a2 + b2)).norm_sqr()
    }
}

/// `sum_j w_j |psi(y1, y2_j)|^2` over the given second-coordinate nodes,
/// optionally restricted to one side of the axis.
fn integrate_second(wf: &WaveFunction, a1: Complex64, b1: Complex64, second: &NodeAmplitudes, side: Side) -> f64 {
    let mut sum = 0.0;
    for j in 0..second.nodes.len() {
        if side.admits(second.nodes[j]) {
            sum += second.weights[j] * pair_density(wf, a1, b1, second.a[j], second.b[j]);
        }
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Side {
    All,
    Below,
    Above,
}

impl Side {
    fn admits(self, y: f64) -> bool {
        match self {
            Side::All => true,
            Side::Below => y < 0.0,
            Side::Above => y > 0.0,
        }
    }
}

fn norm_on(wf: &WaveFunction, t: f64, grid: &QuadratureGrid) -> f64 {
    let amps = NodeAmplitudes::new(wf, t, grid.points());
    (0..amps.nodes.len())
        .into_par_iter()
        .map(|i| amps.weights[i] * integrate_second(wf, amps.a[i], amps.b[i], &amps, Side::All))
        .sum()
}

/// `Z(t) = ∫∫ |psi|^2` on a given grid, without the convergence check.
pub fn normalization_on(wf: &WaveFunction, t: f64, grid: &QuadratureGrid) -> f64 {
    norm_on(wf, t, grid)
}

/// Predictions for one wave function at one time.
#[derive(Debug, Clone)]
pub struct SqmPredictor {
    wf: WaveFunction,
    t: f64,
    grid: QuadratureGrid,
    z: f64,
    amps: NodeAmplitudes,
}

/// Selective-detection prediction: `|psi|^2` restricted to pairs on opposite
/// sides of the axis and renormalized over those pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectivePrediction {
    pub pattern: Pattern,
    pub opposite_side_mass: f64,
    pub same_side_mass: f64,
}

impl SqmPredictor {
    /// Builds the default grid and refines it until `Z` is stable under
    /// doubling.
    pub fn new(wf: &WaveFunction, t: f64) -> Result<Self> {
        let mut grid = QuadratureGrid::for_wave(wf, t);
        let mut z = norm_on(wf, t, &grid);
        loop {
            let finer = grid.refined();
            let z_fine = norm_on(wf, t, &finer);
            if (z_fine - z).abs() <= CONVERGENCE_TOL * z_fine.abs() {
                break;
            }
            if finer.n_points / GL_PANEL > MAX_PANELS {
                return Err(Error::NonConvergence(format!(
                    "norm changed from {z} to {z_fine} at {} points",
                    finer.n_points
                )));
            }
            grid = finer;
            z = z_fine;
        }
        Self::finish(wf, t, grid, z)
    }

    /// Uses `grid` as given; `Z` is computed on it once.
    pub fn with_grid(wf: &WaveFunction, t: f64, grid: QuadratureGrid) -> Result<Self> {
        grid.validate(wf, t)?;
        let z = norm_on(wf, t, &grid);
        Self::finish(wf, t, grid, z)
    }

    fn finish(wf: &WaveFunction, t: f64, grid: QuadratureGrid, z: f64) -> Result<Self> {
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::NonConvergence(format!("norm is {z}")));
        }
        let amps = NodeAmplitudes::new(wf, t, grid.points());
        Ok(Self { wf: *wf, t, grid, z, amps })
    }

    pub fn wave(&self) -> &WaveFunction {
        &self.wf
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    /// Norm `Z(t)` of the unnormalized amplitude.
    pub fn normalization(&self) -> f64 {
        self.z
    }

    fn panel_width(&self) -> f64 {
        match self.grid.rule {
            QuadratureRule::GaussLegendreComposite => {
                (self.grid.y_max - self.grid.y_min) / (self.grid.n_points / GL_PANEL).max(1) as f64
            }
            QuadratureRule::Trapezoid => 32.0 * (self.grid.y_max - self.grid.y_min) / self.grid.n_points as f64,
        }
    }

    /// Gauss–Legendre nodes on `[lo, hi]` at the grid's panel resolution,
    /// split at the axis.
    fn interval_points(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let pw = self.panel_width();
        let mut out = Vec::new();
        let mut push = |a: f64, b: f64| {
            if b > a {
                let panels = ((b - a) / pw).ceil().max(1.0) as usize;
                out.extend(composite_points(GaussLegendre::panel32(), a, b, panels));
            }
        };
        if lo < 0.0 && hi > 0.0 {
            push(lo, 0.0);
            push(0.0, hi);
        } else {
            push(lo, hi);
        }
        out
    }

    pub fn normalized_density(&self, y1: f64, y2: f64) -> f64 {
        self.wf.density(&ConfigurationPoint::new(y1, y2, self.t)) / self.z
    }

    /// Probability of simultaneous detection in `[y_m, y_m + delta)` and
    /// `[y_n, y_n + delta)`.
    pub fn joint_probability(&self, y_m: f64, y_n: f64, delta: f64) -> Result<f64> {
        if !(delta > 0.0) {
            return Err(Error::InvalidConfig(format!("detector width must be positive, got {delta}")));
        }
        Ok(self.rectangle_probability((y_m, y_m + delta), (y_n, y_n + delta)))
    }

    /// Probability of `y1` in `r1` and `y2` in `r2`.
    pub fn rectangle_probability(&self, r1: (f64, f64), r2: (f64, f64)) -> f64 {
        let first = NodeAmplitudes::new(&self.wf, self.t, self.interval_points(r1.0, r1.1));
        let second = NodeAmplitudes::new(&self.wf, self.t, self.interval_points(r2.0, r2.1));
        let mut sum = 0.0;
        for i in 0..first.nodes.len() {
            sum += first.weights[i] * integrate_second(&self.wf, first.a[i], first.b[i], &second, Side::All);
        }
        (sum / self.z).clamp(0.0, 1.0)
    }

    /// Marginal density of particle 1 at `y1`.
    pub fn marginal_density(&self, y1: f64) -> f64 {
        let a1 = self.wf.packet(Slit::A, y1, self.t);
        let b1 = self.wf.packet(Slit::B, y1, self.t);
        integrate_second(&self.wf, a1, b1, &self.amps, Side::All) / self.z
    }

    /// Per-bin probabilities for particle 1 and particle 2 over `bins`,
    /// optionally keeping only pairs on opposite sides of the axis.
    fn bin_marginals(&self, bins: &Pattern, opposite_only: bool) -> (Vec<f64>, Vec<f64>) {
        let per_bin: Vec<(f64, f64)> = bins
            .bin_edges
            .par_windows(2)
            .map(|e| {
                let nodes = NodeAmplitudes::new(&self.wf, self.t, self.interval_points(e[0], e[1]));
                let mut p1 = 0.0;
                let mut p2 = 0.0;
                for i in 0..nodes.nodes.len() {
                    let side = if !opposite_only {
                        Side::All
                    } else if nodes.nodes[i] > 0.0 {
                        Side::Below
                    } else {
                        Side::Above
                    };
                    let (a, b) = (nodes.a[i], nodes.b[i]);
                    let w = nodes.weights[i];
                    p1 += w * integrate_second(&self.wf, a, b, &self.amps, side);
                    // particle 2 at the bin node, particle 1 integrated
                    let mut s = 0.0;
                    for j in 0..self.amps.nodes.len() {
                        if side.admits(self.amps.nodes[j]) {
                            s += self.amps.weights[j] * pair_density(&self.wf, self.amps.a[j], self.amps.b[j], a, b);
                        }
                    }
                    p2 += w * s;
                }
                (p1 / self.z, p2 / self.z)
            })
            .collect();
        per_bin.into_iter().unzip()
    }

    /// Pooled screen pattern `(p1 + p2) / 2` binned on `bins`' grid, as
    /// probabilities per bin.
    pub fn marginal_pattern(&self, bins: &Pattern) -> Result<Pattern> {
        let (p1, p2) = self.bin_marginals(bins, false);
        let pooled = p1.iter().zip(&p2).map(|(a, b)| 0.5 * (a + b)).collect();
        Pattern::with_weights(bins.bin_edges.clone(), pooled)
    }

    /// Marginal pattern of particle 1 only.
    pub fn marginal_pattern_y1(&self, bins: &Pattern) -> Result<Pattern> {
        let (p1, _) = self.bin_marginals(bins, false);
        Pattern::with_weights(bins.bin_edges.clone(), p1)
    }

    /// Probability that the two particles are detected on opposite sides.
    pub fn opposite_side_mass(&self) -> f64 {
        let amps = &self.amps;
        let sum: f64 = (0..amps.nodes.len())
            .into_par_iter()
            .map(|i| {
                let side = if amps.nodes[i] > 0.0 {
                    Side::Below
                } else if amps.nodes[i] < 0.0 {
                    Side::Above
                } else {
                    return 0.0;
                };
                amps.weights[i] * integrate_second(&self.wf, amps.a[i], amps.b[i], amps, side)
            })
            .sum();
        sum / self.z
    }

    /// Selective-detection pattern, read as a rescaling of the joint
    /// probability: keep the opposite-side quadrants, renormalize to unit
    /// mass and pool both particles.
    pub fn conditional_pattern_selective(&self, bins: &Pattern) -> Result<SelectivePrediction> {
        let opposite = self.opposite_side_mass();
        if !(opposite >= 1e-12) {
            return Err(Error::DegenerateSupport(opposite));
        }
        let (p1, p2) = self.bin_marginals(bins, true);
        let pooled = p1.iter().zip(&p2).map(|(a, b)| 0.5 * (a + b) / opposite).collect();
        Ok(SelectivePrediction {
            pattern: Pattern::with_weights(bins.bin_edges.clone(), pooled)?,
            opposite_side_mass: opposite,
            same_side_mass: 1.0 - opposite,
        })
    }
}
