//! Gaussian slit packets and the two-particle composite amplitudes.
//!
//! Each slit emits a freely spreading Gaussian packet with complex width
//! `sigma_t = sigma0 (1 + i hbar t / 2 m sigma0^2)`. Slit A sits at `+Y` and
//! drifts upward with `u_y`, slit B sits at `-Y` and drifts downward. The
//! forward (x) motion is a plane wave evaluated at `x = u_x t`, so both
//! particles reach the screen together.
//!
//! Amplitudes are assembled in log space: a packet's Gaussian exponent,
//! phase and prefactor are summed before a single `exp`, which keeps far
//! tails finite well beyond `12 sigma0 sqrt(1 + tau^2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{derive_kinematics, Kinematics, PhysicalConfig, WaveKind};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Slit {
    A,
    B,
}

impl Slit {
    fn sign(self) -> f64 {
        match self {
            Slit::A => 1.0,
            Slit::B => -1.0,
        }
    }
}

/// Two-particle configuration `(y1, y2)` at time `t`; `x1 = x2 = u_x t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationPoint {
    pub y1: f64,
    pub y2: f64,
    pub t: f64,
}

impl ConfigurationPoint {
    pub fn new(y1: f64, y2: f64, t: f64) -> Self {
        Self { y1, y2, t }
    }

    pub fn center_of_mass(&self) -> f64 {
        0.5 * (self.y1 + self.y2)
    }

    pub fn swapped(&self) -> Self {
        Self { y1: self.y2, y2: self.y1, t: self.t }
    }

    pub fn reflected(&self) -> Self {
        Self { y1: -self.y1, y2: -self.y2, t: self.t }
    }
}

/// Log-space amplitude terms at a configuration point.
///
/// For the entangled kinds `first = ln[A(y1) B(y2)]` and
/// `second = ln[A(y2) B(y1)]`, combined as `first ± second`. For the product
/// kind the terms are per particle: `ln A(y_i)` and `ln B(y_i)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogPair {
    pub first: Complex64,
    pub second: Complex64,
    pub sign: f64,
}

impl LogPair {
    /// Returns `(ln |first| scale, e_first, e_second)` with both terms
    /// rescaled so the larger modulus is one.
    pub fn scaled(&self) -> (f64, Complex64, Complex64) {
        let scale = self.first.re.max(self.second.re);
        let e1 = (self.first - scale).exp();
        let e2 = (self.second - scale).exp() * self.sign;
        (scale, e1, e2)
    }

    pub fn sum(&self) -> Complex64 {
        let (scale, e1, e2) = self.scaled();
        (e1 + e2) * scale.exp()
    }

    /// `|first ± second| / (|first| + |second|)`; zero on an exact node.
    pub fn interference_ratio(&self) -> f64 {
        let (_, e1, e2) = self.scaled();
        (e1 + e2).norm() / (e1.norm() + e2.norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveFunction {
    pub kind: WaveKind,
    pub config: PhysicalConfig,
    pub kin: Kinematics,
}

impl WaveFunction {
    pub fn new(kind: WaveKind, config: PhysicalConfig) -> Result<Self> {
        let kin = derive_kinematics(&config)?;
        Ok(Self { kind, config, kin })
    }

    /// Complex packet width `sigma0 (1 + i hbar t / 2 m sigma0^2)`.
    pub fn sigma_t(&self, t: f64) -> Complex64 {
        Complex64::new(self.config.sigma0, self.config.sigma0 * self.config.tau_at(t))
    }

    /// Center of the packet from `slit` at time `t`.
    pub fn packet_center(&self, slit: Slit, t: f64) -> f64 {
        slit.sign() * (self.config.slit_offset + self.kin.u_y * t)
    }

    /// Natural log of the packet amplitude (principal branch).
    pub fn log_packet(&self, slit: Slit, y: f64, t: f64) -> Complex64 {
        let c = &self.config;
        let s = slit.sign();
        let sigma_t = self.sigma_t(t);
        let dy = y - s * (c.slit_offset + self.kin.u_y * t);
        let gaussian = -Complex64::new(dy * dy, 0.0) / (4.0 * c.sigma0 * sigma_t);
        let x = self.kin.u_x * t;
        let phase =
            s * c.k_y * (y - s * (c.slit_offset + 0.5 * self.kin.u_y * t)) + c.k_x * x - self.kin.e_x * t / c.hbar;
        let prefactor = -0.25 * (2.0 * std::f64::consts::PI * sigma_t * sigma_t).ln();
        prefactor + gaussian + Complex64::new(0.0, phase)
    }

    pub fn packet(&self, slit: Slit, y: f64, t: f64) -> Complex64 {
        self.log_packet(slit, y, t).exp()
    }

    /// `d/dy ln packet`, i.e. `-2 (y - center) / (4 sigma0 sigma_t) ± i k_y`.
    pub fn packet_log_derivative(&self, slit: Slit, y: f64, t: f64) -> Complex64 {
        let s = slit.sign();
        let dy = y - self.packet_center(slit, t);
        -Complex64::new(2.0 * dy, 0.0) / (4.0 * self.config.sigma0 * self.sigma_t(t))
            + Complex64::new(0.0, s * self.config.k_y)
    }

    /// `packet_A + packet_B` for a single particle.
    pub fn single_particle(&self, y: f64, t: f64) -> Complex64 {
        self.single_terms(y, t).sum()
    }

    pub(crate) fn single_terms(&self, y: f64, t: f64) -> LogPair {
        LogPair { first: self.log_packet(Slit::A, y, t), second: self.log_packet(Slit::B, y, t), sign: 1.0 }
    }

    pub(crate) fn entangled_terms(&self, p: &ConfigurationPoint) -> LogPair {
        LogPair {
            first: self.log_packet(Slit::A, p.y1, p.t) + self.log_packet(Slit::B, p.y2, p.t),
            second: self.log_packet(Slit::A, p.y2, p.t) + self.log_packet(Slit::B, p.y1, p.t),
            sign: self.kind.exchange_sign(),
        }
    }

    /// Unnormalized two-particle amplitude.
    pub fn psi(&self, p: &ConfigurationPoint) -> Complex64 {
        match self.kind {
            WaveKind::UnentangledProduct => {
                let s1 = self.single_terms(p.y1, p.t);
                let s2 = self.single_terms(p.y2, p.t);
                let (l1, e1a, e1b) = s1.scaled();
                let (l2, e2a, e2b) = s2.scaled();
                (e1a + e1b) * (e2a + e2b) * (l1 + l2).exp()
            }
            _ => self.entangled_terms(p).sum(),
        }
    }

    /// `|psi|^2`, unnormalized.
    pub fn density(&self, p: &ConfigurationPoint) -> f64 {
        self.psi(p).norm_sqr()
    }

    /// How far the configuration is from destructive cancellation: the
    /// modulus of the superposition relative to the sum of the moduli of its
    /// terms. For the product kind the smaller of the two particle ratios is
    /// returned.
    pub fn interference_ratio(&self, p: &ConfigurationPoint) -> f64 {
        match self.kind {
            WaveKind::UnentangledProduct => {
                self.single_terms(p.y1, p.t).interference_ratio().min(self.single_terms(p.y2, p.t).interference_ratio())
            }
            _ => self.entangled_terms(p).interference_ratio(),
        }
    }

    /// Half-width around the outermost drifted packet center that contains
    /// all but a negligible part of the density at time `t`.
    pub fn support_half_width(&self, t: f64, widths: f64) -> f64 {
        let outer = self.config.slit_offset + (self.kin.u_y * t).abs();
        let spread = self.config.sigma0 * (1.0 + self.config.tau_at(t).powi(2)).sqrt();
        outer + widths * spread
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn wf(kind: WaveKind) -> WaveFunction {
        let cfg = PhysicalConfig { k_y: 0.4, ..Default::default() };
        WaveFunction::new(kind, cfg).unwrap()
    }

    /// Slit packet at formation time written directly from its definition.
    fn formation_packet(w: &WaveFunction, slit: Slit, y: f64) -> Complex64 {
        let c = &w.config;
        let (center, ky) = match slit {
            Slit::A => (c.slit_offset, c.k_y),
            Slit::B => (-c.slit_offset, -c.k_y),
        };
        let norm = (2.0 * std::f64::consts::PI * c.sigma0 * c.sigma0).powf(-0.25);
        let g = (-(y - center).powi(2) / (4.0 * c.sigma0 * c.sigma0)).exp();
        norm * g * Complex64::new(0.0, ky * (y - center)).exp()
    }

    #[test]
    fn sigma_t_values() {
        let w = wf(WaveKind::EntangledSymmetric);
        assert_eq!(w.sigma_t(0.0), Complex64::new(1.0, 0.0));
        assert_eq!(w.sigma_t(2.0), Complex64::new(1.0, 1.0));
        for t in [0.3, 1.0, 7.5] {
            let tau = w.config.tau_at(t);
            assert_relative_eq!(w.sigma_t(t).norm_sqr(), 1.0 + tau * tau, max_relative = 1e-14);
        }
    }

    #[test]
    fn formation_time_reduces_to_initial_packets() {
        let w = wf(WaveKind::EntangledSymmetric);
        for i in 0..=240 {
            let y = -6.0 + 0.05 * i as f64;
            for slit in [Slit::A, Slit::B] {
                let got = w.packet(slit, y, 0.0);
                let want = formation_packet(&w, slit, y);
                assert!((got - want).norm() <= 1e-12 * want.norm(), "{slit:?} y={y}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn slit_packets_mirror_each_other() {
        let w = WaveFunction::new(WaveKind::EntangledSymmetric, PhysicalConfig::default()).unwrap();
        for &t in &[0.0, 0.5, 3.0] {
            for i in -20..=20 {
                let y = 0.3 * i as f64;
                let a = w.packet(Slit::A, y, t);
                let b = w.packet(Slit::B, -y, t);
                assert!((a - b).norm() <= 1e-14 * a.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn peak_modulus_at_moving_center() {
        let w = wf(WaveKind::EntangledSymmetric);
        for &t in &[0.0, 1.0, 4.0] {
            let tau = w.config.tau_at(t);
            let y = w.packet_center(Slit::A, t);
            let peak = 1.0 / (2.0 * std::f64::consts::PI * (1.0 + tau * tau)).sqrt();
            assert_relative_eq!(w.packet(Slit::A, y, t).norm_sqr(), peak, max_relative = 1e-13);
        }
    }

    #[test]
    fn antisymmetric_vanishes_on_diagonal() {
        let w = wf(WaveKind::EntangledAntisymmetric);
        for i in -10..=10 {
            let p = ConfigurationPoint::new(0.37 * i as f64, 0.37 * i as f64, 1.3);
            assert_eq!(w.psi(&p).norm(), 0.0);
            assert_eq!(w.interference_ratio(&p), 0.0);
        }
    }

    #[test]
    fn exchange_symmetry() {
        for kind in [WaveKind::EntangledSymmetric, WaveKind::EntangledAntisymmetric] {
            let w = wf(kind);
            let p = ConfigurationPoint::new(0.8, -1.7, 0.9);
            let a = w.psi(&p);
            let b = w.psi(&p.swapped()) * kind.exchange_sign();
            assert!((a - b).norm() <= 1e-14 * a.norm());
            assert_relative_eq!(w.density(&p), w.density(&p.swapped()), max_relative = 1e-14);
        }
    }

    #[test]
    fn entangled_density_reflects_through_axis() {
        let cfg = PhysicalConfig::default();
        for kind in [WaveKind::EntangledSymmetric, WaveKind::EntangledAntisymmetric] {
            let w = WaveFunction::new(kind, cfg).unwrap();
            for i in -5..=5 {
                for j in -5..=5 {
                    let p = ConfigurationPoint::new(0.41 * i as f64, 0.29 * j as f64, 1.7);
                    let d = w.density(&p);
                    assert!(d >= 0.0);
                    assert!((d - w.density(&p.reflected())).abs() <= 1e-13 * d.max(1e-300));
                }
            }
        }
    }

    #[test]
    fn product_factorizes() {
        let w = wf(WaveKind::UnentangledProduct);
        for i in -6..=6 {
            for j in -6..=6 {
                let p = ConfigurationPoint::new(0.5 * i as f64, 0.45 * j as f64, 2.2);
                let direct = w.single_particle(p.y1, p.t) * w.single_particle(p.y2, p.t);
                let via_terms = w.packet(Slit::A, p.y1, p.t) * w.packet(Slit::A, p.y2, p.t)
                    + w.packet(Slit::A, p.y1, p.t) * w.packet(Slit::B, p.y2, p.t)
                    + w.packet(Slit::B, p.y1, p.t) * w.packet(Slit::A, p.y2, p.t)
                    + w.packet(Slit::B, p.y1, p.t) * w.packet(Slit::B, p.y2, p.t);
                let psi = w.psi(&p);
                assert!((psi - direct).norm() <= 1e-14 * direct.norm().max(1e-300));
                assert!((psi - via_terms).norm() <= 1e-13 * via_terms.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn far_tail_stays_finite() {
        let cfg = PhysicalConfig::default().with_screen_tau(20.0);
        let w = WaveFunction::new(WaveKind::UnentangledProduct, cfg).unwrap();
        let t = w.kin.t_d;
        let edge = 12.0 * (1.0f64 + 400.0).sqrt();
        let p = ConfigurationPoint::new(edge, -edge, t);
        let psi = w.psi(&p);
        assert!(psi.re.is_finite() && psi.im.is_finite());
        assert!(psi.norm() > 0.0);
        // formation-time tail at 20 sigma0 used by the displaced source
        assert!(w.single_particle(20.0, 0.0).norm() > 0.0);
    }
}
