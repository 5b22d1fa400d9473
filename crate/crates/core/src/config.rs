//! Physical parameters, derived kinematics and regime checks.
//!
//! Every "much less than" condition of the two-slit setup is a dimensionless
//! ratio. A condition `a << b` is reported as satisfied when `a / b` does not
//! exceed [`Strictness::much_less`]; "of order one" and "much greater than
//! one" conditions on the spreading parameter use fixed windows.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConfig {
    pub hbar: f64,
    /// Mass of each (identical) particle.
    pub mass: f64,
    /// Slit half-width; the width of each Gaussian slit packet at t = 0.
    pub sigma0: f64,
    /// Slit centers sit at `+slit_offset` (slit A) and `-slit_offset` (slit B).
    pub slit_offset: f64,
    pub k_x: f64,
    pub k_y: f64,
    pub screen_distance: f64,
    /// Detector (bin) width used for joint detection probabilities.
    pub detector_width: f64,
}

impl Default for PhysicalConfig {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            sigma0: 1.0,
            slit_offset: 1.0,
            k_x: 1.0,
            k_y: 0.0,
            screen_distance: 2.0,
            detector_width: 0.1,
        }
    }
}

impl PhysicalConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("hbar", self.hbar),
            ("mass", self.mass),
            ("sigma0", self.sigma0),
            ("slit_offset", self.slit_offset),
            ("k_x", self.k_x),
            ("screen_distance", self.screen_distance),
            ("detector_width", self.detector_width),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {value}")));
            }
        }
        if !self.k_y.is_finite() {
            return Err(Error::InvalidConfig(format!("k_y must be finite, got {}", self.k_y)));
        }
        Ok(())
    }

    /// Rate `hbar / (2 m sigma0^2)`; the spreading parameter is `rate * t`.
    pub fn spreading_rate(&self) -> f64 {
        self.hbar / (2.0 * self.mass * self.sigma0 * self.sigma0)
    }

    /// Dimensionless spreading parameter `hbar t / (2 m sigma0^2)`.
    pub fn tau_at(&self, t: f64) -> f64 {
        self.spreading_rate() * t
    }

    /// Screen distance that makes the screen arrival time correspond to the
    /// given spreading parameter for the current `k_x`.
    pub fn with_screen_tau(mut self, tau: f64) -> Self {
        let u_x = self.hbar * self.k_x / self.mass;
        self.screen_distance = u_x * tau / self.spreading_rate();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinematics {
    pub u_x: f64,
    pub u_y: f64,
    pub e_x: f64,
    /// Screen arrival time `D / u_x`.
    pub t_d: f64,
    /// Spreading parameter at the screen.
    pub tau: f64,
}

pub fn derive_kinematics(config: &PhysicalConfig) -> Result<Kinematics> {
    config.validate()?;
    let u_x = config.hbar * config.k_x / config.mass;
    if !(u_x > 0.0) {
        return Err(Error::InvalidConfig(format!("forward speed u_x must be positive, got {u_x}")));
    }
    let u_y = config.hbar * config.k_y / config.mass;
    let t_d = config.screen_distance / u_x;
    Ok(Kinematics { u_x, u_y, e_x: 0.5 * config.mass * u_x * u_x, t_d, tau: config.tau_at(t_d) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveKind {
    EntangledSymmetric,
    EntangledAntisymmetric,
    UnentangledProduct,
}

impl WaveKind {
    pub const ALL: [WaveKind; 3] =
        [WaveKind::EntangledSymmetric, WaveKind::EntangledAntisymmetric, WaveKind::UnentangledProduct];

    pub fn is_entangled(self) -> bool {
        !matches!(self, WaveKind::UnentangledProduct)
    }

    /// Sign multiplying the exchanged term of the entangled amplitude.
    pub fn exchange_sign(self) -> f64 {
        match self {
            WaveKind::EntangledAntisymmetric => -1.0,
            _ => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WaveKind::EntangledSymmetric => "entangled-symmetric",
            WaveKind::EntangledAntisymmetric => "entangled-antisymmetric",
            WaveKind::UnentangledProduct => "unentangled-product",
        }
    }
}

impl fmt::Display for WaveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WaveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WaveKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown wave kind '{s}'")))
    }
}

/// How initial configurations are emitted by the source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub wave_kind: WaveKind,
    /// Mean center-of-mass offset of the emitted pair.
    pub y0_mean: f64,
    /// Spread of the center-of-mass offset; zero means deterministic.
    pub y0_spread: f64,
    pub rng_seed: u64,
}

impl SourceSpec {
    pub fn new(wave_kind: WaveKind) -> Self {
        Self { wave_kind, y0_mean: 0.0, y0_spread: 0.0, rng_seed: 0 }
    }

    /// Source whose center-of-mass spread matches the |psi|^2 distribution at
    /// t = 0, i.e. `sigma0 / sqrt(2)` for the entangled amplitude.
    pub fn equilibrium(wave_kind: WaveKind, config: &PhysicalConfig) -> Self {
        let spread = if wave_kind.is_entangled() { config.sigma0 / 2f64.sqrt() } else { 0.0 };
        Self { wave_kind, y0_mean: 0.0, y0_spread: spread, rng_seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.y0_mean.is_finite() {
            return Err(Error::InvalidConfig("y0_mean must be finite".into()));
        }
        if !(self.y0_spread.is_finite() && self.y0_spread >= 0.0) {
            return Err(Error::InvalidConfig(format!("y0_spread must be non-negative, got {}", self.y0_spread)));
        }
        Ok(())
    }
}

/// The three experimental scenarios plus free-form configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "fig1-entangled")]
    Fig1Entangled,
    #[serde(rename = "fig2-unentangled-symmetric")]
    Fig2UnentangledSymmetric,
    #[serde(rename = "fig3-unentangled-shifted")]
    Fig3UnentangledShifted,
    #[serde(rename = "custom")]
    Custom,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Fig1Entangled,
        Scenario::Fig2UnentangledSymmetric,
        Scenario::Fig3UnentangledShifted,
        Scenario::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Fig1Entangled => "fig1-entangled",
            Scenario::Fig2UnentangledSymmetric => "fig2-unentangled-symmetric",
            Scenario::Fig3UnentangledShifted => "fig3-unentangled-shifted",
            Scenario::Custom => "custom",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scenario '{s}'")))
    }
}

/// Numeric meaning of the qualitative inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strictness {
    /// `a << b` holds when `a / b <= much_less`.
    pub much_less: f64,
    /// Window for "tau of order one".
    pub tau_order_one: (f64, f64),
    /// Lower bound for "tau much greater than one".
    pub tau_large: f64,
    /// Window for `Y / sigma0` of order one.
    pub slit_order_one: (f64, f64),
}

impl Default for Strictness {
    fn default() -> Self {
        Self { much_less: 0.1, tau_order_one: (0.5, 2.0), tau_large: 10.0, slit_order_one: (0.5, 2.0) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bound {
    AtMost { limit: f64 },
    AtLeast { limit: f64 },
    Within { lower: f64, upper: f64 },
}

impl Bound {
    fn holds(&self, value: f64) -> bool {
        match *self {
            Bound::AtMost { limit } => value <= limit,
            Bound::AtLeast { limit } => value >= limit,
            Bound::Within { lower, upper } => (lower..=upper).contains(&value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeFinding {
    pub name: String,
    pub condition: String,
    pub ratio: f64,
    pub bound: Bound,
    pub satisfied: bool,
}

impl RegimeFinding {
    fn new(name: &str, condition: &str, ratio: f64, bound: Bound) -> Self {
        Self { name: name.to_string(), condition: condition.to_string(), ratio, satisfied: bound.holds(ratio), bound }
    }
}

/// Evaluate the inequality conditions that the scenario relies on.
///
/// `Custom` picks the checks by wave kind and source offset: entangled
/// sources get the first scenario's checks, unentangled sources the second
/// or third depending on whether the source is displaced.
pub fn validate_regime(
    config: &PhysicalConfig,
    kin: &Kinematics,
    source: &SourceSpec,
    scenario: Scenario,
    strictness: &Strictness,
) -> Vec<RegimeFinding> {
    let scenario = match scenario {
        Scenario::Custom if source.wave_kind.is_entangled() => Scenario::Fig1Entangled,
        Scenario::Custom if source.y0_mean == 0.0 => Scenario::Fig2UnentangledSymmetric,
        Scenario::Custom => Scenario::Fig3UnentangledShifted,
        other => other,
    };
    let much_less = Bound::AtMost { limit: strictness.much_less };
    let sigma0 = config.sigma0;
    let y = config.slit_offset;
    let fringe = std::f64::consts::PI * config.hbar * kin.t_d / (y * config.mass);
    let tau_one = Bound::Within { lower: strictness.tau_order_one.0, upper: strictness.tau_order_one.1 };
    let ky_small = RegimeFinding::new("k_y-negligible", "|k_y| sigma0 << 1", config.k_y.abs() * sigma0, much_less);

    match scenario {
        Scenario::Fig1Entangled => vec![
            RegimeFinding::new(
                "com-spread-vs-fringe",
                "dy0 << pi hbar t / (Y m)",
                source.y0_spread / fringe,
                much_less,
            ),
            RegimeFinding::new("com-spread-vs-slit", "dy0 << sigma0", source.y0_spread / sigma0, much_less),
            RegimeFinding::new("com-offset-vs-slit", "0 <= y0 << sigma0", source.y0_mean.abs() / sigma0, much_less),
            RegimeFinding::new("tau-order-one", "hbar t / 2 m sigma0^2 ~ 1", kin.tau, tau_one),
            RegimeFinding::new(
                "slit-offset-order-sigma0",
                "Y ~ sigma0",
                y / sigma0,
                Bound::Within { lower: strictness.slit_order_one.0, upper: strictness.slit_order_one.1 },
            ),
        ],
        Scenario::Fig2UnentangledSymmetric => vec![
            RegimeFinding::new(
                "slit-offset-vs-2pi-sigma0",
                "Y << 2 pi sigma0",
                y / (2.0 * std::f64::consts::PI * sigma0),
                much_less,
            ),
            RegimeFinding::new("tau-order-one", "hbar t / 2 m sigma0^2 ~ 1", kin.tau, tau_one),
            ky_small,
        ],
        Scenario::Fig3UnentangledShifted | Scenario::Custom => vec![
            RegimeFinding::new("slit-offset-vs-sigma0", "Y << sigma0", y / sigma0, much_less),
            RegimeFinding::new(
                "sigma0-vs-source-offset",
                "sigma0 << <y0>",
                if source.y0_mean == 0.0 { f64::INFINITY } else { sigma0 / source.y0_mean.abs() },
                much_less,
            ),
            RegimeFinding::new(
                "tau-large",
                "hbar t / 2 m sigma0^2 >> 1",
                kin.tau,
                Bound::AtLeast { limit: strictness.tau_large },
            ),
            ky_small,
        ],
    }
}

/// Optional-field configuration file. Missing fields keep the values of the
/// base configuration; unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub hbar: Option<f64>,
    pub mass: Option<f64>,
    pub sigma0: Option<f64>,
    pub slit_offset: Option<f64>,
    pub k_x: Option<f64>,
    pub k_y: Option<f64>,
    pub screen_distance: Option<f64>,
    pub detector_width: Option<f64>,
    pub wave_kind: Option<WaveKind>,
    pub y0_mean: Option<f64>,
    pub y0_spread: Option<f64>,
    pub seed: Option<u64>,
    pub much_less: Option<f64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn apply(&self, config: &mut PhysicalConfig, source: &mut SourceSpec, strictness: &mut Strictness) {
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        set!(config.hbar, self.hbar);
        set!(config.mass, self.mass);
        set!(config.sigma0, self.sigma0);
        set!(config.slit_offset, self.slit_offset);
        set!(config.k_x, self.k_x);
        set!(config.k_y, self.k_y);
        set!(config.screen_distance, self.screen_distance);
        set!(config.detector_width, self.detector_width);
        set!(source.wave_kind, self.wave_kind);
        set!(source.y0_mean, self.y0_mean);
        set!(source.y0_spread, self.y0_spread);
        set!(source.rng_seed, self.seed);
        set!(strictness.much_less, self.much_less);
    }
}
