//! Closed-form reference quantities.
//!
//! With `a = hbar / (2 m sigma0^2)`:
//!
//! * center-of-mass path `y(t) = y0 sqrt(1 + a^2 t^2)`;
//! * center-of-mass quantum potential
//!   `Q = m y0^4 a^2 / (2 y^2) = m y0^2 a^2 / (2 (1 + a^2 t^2))`, taken with
//!   the single-particle mass `m`;
//! * fringe spacing `lambda D / 2Y = pi hbar t / (Y m)`, where the de Broglie
//!   wavelength of the forward motion is `lambda = 2 pi hbar / (m u_x)` and
//!   `D = u_x t`;
//! * empty-interval length `hbar t y0 / (m sigma0^2)`, the large-`t` limit of
//!   twice the center-of-mass offset.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::{Kinematics, PhysicalConfig, Strictness};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub name: String,
    pub value: f64,
    pub unit: String,
    pub inputs: BTreeMap<String, f64>,
}

impl OracleReport {
    fn new(name: &str, value: f64, unit: &str, inputs: &[(&str, f64)]) -> Self {
        Self {
            name: name.into(),
            value,
            unit: unit.into(),
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

pub fn com_path(config: &PhysicalConfig, y0: f64, t: f64) -> f64 {
    let at = config.spreading_rate() * t;
    y0 * (1.0 + at * at).sqrt()
}

/// Quantum potential of the center of mass as a function of time.
pub fn quantum_potential_com(config: &PhysicalConfig, y0: f64, t: f64) -> f64 {
    let a = config.spreading_rate();
    0.5 * config.mass * y0 * y0 * a * a / (1.0 + a * a * t * t)
}

/// The same potential written in terms of the current center-of-mass
/// coordinate `y` along the path started at `y0`.
pub fn quantum_potential_com_at(config: &PhysicalConfig, y0: f64, y: f64) -> f64 {
    if y0 == 0.0 {
        return 0.0;
    }
    let a = config.spreading_rate();
    config.mass * y0.powi(4) * a * a / (2.0 * y * y)
}

pub fn de_broglie_wavelength(config: &PhysicalConfig, kin: &Kinematics) -> f64 {
    2.0 * std::f64::consts::PI * config.hbar / (config.mass * kin.u_x)
}

pub fn fringe_spacing(config: &PhysicalConfig, t: f64) -> f64 {
    std::f64::consts::PI * config.hbar * t / (config.slit_offset * config.mass)
}

/// Empty-interval length for a characteristic source offset `y0_char`.
/// Only meaningful once the packets have spread far beyond their initial
/// width.
pub fn empty_interval(config: &PhysicalConfig, y0_char: f64, t: f64) -> Result<f64> {
    empty_interval_with(config, y0_char, t, &Strictness::default())
}

pub fn empty_interval_with(config: &PhysicalConfig, y0_char: f64, t: f64, strictness: &Strictness) -> Result<f64> {
    let tau = config.tau_at(t);
    if tau < strictness.tau_large {
        return Err(Error::RegimeViolation(format!("empty interval needs tau >= {}, got {tau}", strictness.tau_large)));
    }
    Ok(config.hbar * t * y0_char / (config.mass * config.sigma0 * config.sigma0))
}

/// All oracle values for a run, evaluated at the screen time.
pub fn screen_oracles(config: &PhysicalConfig, kin: &Kinematics, y0_char: f64) -> Vec<OracleReport> {
    let t = kin.t_d;
    let mut out = vec![
        OracleReport::new("de_broglie_wavelength", de_broglie_wavelength(config, kin), "length", &[("u_x", kin.u_x)]),
        OracleReport::new(
            "fringe_spacing",
            fringe_spacing(config, t),
            "length",
            &[("t", t), ("Y", config.slit_offset)],
        ),
        OracleReport::new("com_path", com_path(config, y0_char, t), "length", &[("y0", y0_char), ("t", t)]),
        OracleReport::new(
            "quantum_potential_com",
            quantum_potential_com(config, y0_char, t),
            "energy",
            &[("y0", y0_char), ("t", t)],
        ),
    ];
    if let Ok(l) = empty_interval(config, y0_char, t) {
        out.push(OracleReport::new("empty_interval", l, "length", &[("y0", y0_char), ("t", t)]));
    }
    out
}
