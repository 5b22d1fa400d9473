//! Bohmian guidance velocities.
//!
//! The velocity of particle `i` is `(hbar/m) Im(d_{y_i} psi / psi)`. The
//! production path differentiates each Gaussian term analytically; the
//! phase-difference quotient in [`phase_gradient_velocity`] is an
//! independent cross-check that only evaluates `psi`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{Strictness, WaveKind};
use crate::error::{Error, Result};
use crate::wavefunction::{ConfigurationPoint, Slit, WaveFunction};

/// Relative amplitude below which a configuration counts as sitting on a node.
pub const NODE_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityPair {
    pub v1: f64,
    pub v2: f64,
}

fn node_error(p: &ConfigurationPoint, ratio: f64) -> Error {
    Error::NodeProximity { y1: p.y1, y2: p.y2, t: p.t, ratio }
}

/// Analytic guidance velocity `(dy1/dt, dy2/dt)`.
///
/// Fails with [`Error::NodeProximity`] when the superposition has cancelled
/// to below [`NODE_THRESHOLD`] of the summed term moduli.
pub fn velocity(wf: &WaveFunction, p: &ConfigurationPoint) -> Result<VelocityPair> {
    let scale = wf.config.hbar / wf.config.mass;
    match wf.kind {
        WaveKind::UnentangledProduct => {
            let v1 = single_velocity(wf, p.y1, p.t).ok_or_else(|| node_error(p, wf.interference_ratio(p)))?;
            let v2 = single_velocity(wf, p.y2, p.t).ok_or_else(|| node_error(p, wf.interference_ratio(p)))?;
            Ok(VelocityPair { v1, v2 })
        }
        _ => {
            let terms = wf.entangled_terms(p);
            let (_, e1, e2) = terms.scaled();
            let sum = e1 + e2;
            let ratio = sum.norm() / (e1.norm() + e2.norm());
            if !(ratio >= NODE_THRESHOLD) {
                return Err(node_error(p, ratio));
            }
            // e1 ~ A(y1) B(y2), e2 ~ ±A(y2) B(y1)
            let d_a1 = wf.packet_log_derivative(Slit::A, p.y1, p.t);
            let d_b1 = wf.packet_log_derivative(Slit::B, p.y1, p.t);
            let d_a2 = wf.packet_log_derivative(Slit::A, p.y2, p.t);
            let d_b2 = wf.packet_log_derivative(Slit::B, p.y2, p.t);
            let g1 = (d_a1 * e1 + d_b1 * e2) / sum;
            let g2 = (d_b2 * e1 + d_a2 * e2) / sum;
            Ok(VelocityPair { v1: scale * g1.im, v2: scale * g2.im })
        }
    }
}

/// Velocity of one particle of the product state; depends on its own
/// coordinate only. `None` near a node.
fn single_velocity(wf: &WaveFunction, y: f64, t: f64) -> Option<f64> {
    let (_, ea, eb) = wf.single_terms(y, t).scaled();
    let sum = ea + eb;
    let ratio = sum.norm() / (ea.norm() + eb.norm());
    if !(ratio >= NODE_THRESHOLD) {
        return None;
    }
    let g = (wf.packet_log_derivative(Slit::A, y, t) * ea + wf.packet_log_derivative(Slit::B, y, t) * eb) / sum;
    Some(wf.config.hbar / wf.config.mass * g.im)
}

/// Guidance velocity from central differences of the phase of `psi` with
/// step `h`: `(hbar/m) arg(psi(y+h) conj(psi(y-h))) / 2h`.
pub fn phase_gradient_velocity(wf: &WaveFunction, p: &ConfigurationPoint, h: f64) -> VelocityPair {
    let phase_step = |plus: ConfigurationPoint, minus: ConfigurationPoint| -> f64 {
        (wf.psi(&plus) * wf.psi(&minus).conj()).arg() / (2.0 * h)
    };
    let scale = wf.config.hbar / wf.config.mass;
    let v1 = phase_step(ConfigurationPoint { y1: p.y1 + h, ..*p }, ConfigurationPoint { y1: p.y1 - h, ..*p });
    let v2 = phase_step(ConfigurationPoint { y2: p.y2 + h, ..*p }, ConfigurationPoint { y2: p.y2 - h, ..*p });
    VelocityPair { v1: scale * v1, v2: scale * v2 }
}

/// `(hbar/m) |d psi / psi|` per particle from the analytic derivative, the
/// natural magnitude against which velocity errors are measured.
pub fn log_gradient_magnitude(wf: &WaveFunction, p: &ConfigurationPoint) -> (f64, f64) {
    let scale = wf.config.hbar / wf.config.mass;
    let single = |y: f64| {
        let (_, ea, eb) = wf.single_terms(y, p.t).scaled();
        let g: Complex64 = (wf.packet_log_derivative(Slit::A, y, p.t) * ea
            + wf.packet_log_derivative(Slit::B, y, p.t) * eb)
            / (ea + eb);
        scale * g.norm()
    };
    match wf.kind {
        WaveKind::UnentangledProduct => (single(p.y1), single(p.y2)),
        _ => {
            let (_, e1, e2) = wf.entangled_terms(p).scaled();
            let sum = e1 + e2;
            let g1 = (wf.packet_log_derivative(Slit::A, p.y1, p.t) * e1
                + wf.packet_log_derivative(Slit::B, p.y1, p.t) * e2)
                / sum;
            let g2 = (wf.packet_log_derivative(Slit::B, p.y2, p.t) * e1
                + wf.packet_log_derivative(Slit::A, p.y2, p.t) * e2)
                / sum;
            (scale * g1.norm(), scale * g2.norm())
        }
    }
}

/// Closed-form center-of-mass velocity `a^2 t y / (1 + a^2 t^2)` with
/// `a = hbar / 2 m sigma0^2`.
///
/// Exact for the entangled kinds. For the product kind it only holds when
/// `k_y` is negligible and the slits are much closer than `sigma0`.
pub fn com_velocity(wf: &WaveFunction, y: f64, t: f64) -> Result<f64> {
    com_velocity_with(wf, y, t, &Strictness::default())
}

pub fn com_velocity_with(wf: &WaveFunction, y: f64, t: f64, strictness: &Strictness) -> Result<f64> {
    let c = &wf.config;
    if !wf.kind.is_entangled() {
        let ky = c.k_y.abs() * c.sigma0;
        let slit = c.slit_offset / c.sigma0;
        if ky > strictness.much_less || slit > strictness.much_less {
            return Err(Error::RegimeViolation(format!(
                "product-state center-of-mass law needs |k_y| sigma0 << 1 and Y << sigma0 (got {ky}, {slit})"
            )));
        }
    }
    let a = c.spreading_rate();
    Ok(a * a * t * y / (1.0 + a * a * t * t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PhysicalConfig;
    use approx::assert_relative_eq;

    fn wf(kind: WaveKind, cfg: PhysicalConfig) -> WaveFunction {
        WaveFunction::new(kind, cfg).unwrap()
    }

    #[test]
    fn bosons_at_rest_on_axis() {
        let w = wf(WaveKind::EntangledSymmetric, PhysicalConfig::default());
        for &t in &[0.0, 0.7, 2.0, 9.0] {
            let v = velocity(&w, &ConfigurationPoint::new(0.0, 0.0, t)).unwrap();
            assert_eq!(v.v1, 0.0);
            assert_eq!(v.v2, 0.0);
        }
    }

    #[test]
    fn product_state_at_rest_on_axis() {
        let w = wf(WaveKind::UnentangledProduct, PhysicalConfig::default());
        for &y2 in &[-3.0, 0.2, 4.0] {
            for &t in &[0.0, 1.0, 5.0] {
                let v = velocity(&w, &ConfigurationPoint::new(0.0, y2, t)).unwrap();
                assert_eq!(v.v1, 0.0);
            }
        }
    }

    #[test]
    fn generic_point_matches_phase_gradient() {
        let cfg = PhysicalConfig::default();
        for kind in WaveKind::ALL {
            let w = wf(kind, cfg);
            let p = ConfigurationPoint::new(0.3, -0.7, 0.5);
            let v = velocity(&w, &p).unwrap();
            let fd = phase_gradient_velocity(&w, &p, 1e-5);
            assert_relative_eq!(v.v1, fd.v1, max_relative = 1e-6);
            assert_relative_eq!(v.v2, fd.v2, max_relative = 1e-6);
        }
    }

    #[test]
    fn velocity_is_invariant_under_amplitude_scaling() {
        // Scaling psi by a constant leaves d psi / psi unchanged; the
        // phase-difference oracle sees the same thing.
        let w = wf(WaveKind::EntangledSymmetric, PhysicalConfig { k_y: 0.2, ..Default::default() });
        let p = ConfigurationPoint::new(1.1, -0.4, 0.8);
        let h = 1e-5;
        let base = phase_gradient_velocity(&w, &p, h);
        for factor in [Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0)] {
            let plus = w.psi(&ConfigurationPoint { y1: p.y1 + h, ..p }) * factor;
            let minus = w.psi(&ConfigurationPoint { y1: p.y1 - h, ..p }) * factor;
            let v1 = (plus * minus.conj()).arg() / (2.0 * h);
            assert_relative_eq!(v1, base.v1, max_relative = 1e-12);
        }
    }

    #[test]
    fn antisymmetric_diagonal_is_a_node() {
        let w = wf(WaveKind::EntangledAntisymmetric, PhysicalConfig::default());
        let err = velocity(&w, &ConfigurationPoint::new(0.5, 0.5, 1.0)).unwrap_err();
        assert!(matches!(err, Error::NodeProximity { .. }));
        assert!(velocity(&w, &ConfigurationPoint::new(0.5, 0.5 + 1e-3, 1.0)).is_ok());
    }

    #[test]
    fn com_velocity_values() {
        let w = wf(WaveKind::EntangledSymmetric, PhysicalConfig::default());
        assert_eq!(com_velocity(&w, 0.0, 3.0).unwrap(), 0.0);
        assert_eq!(com_velocity(&w, 2.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(com_velocity(&w, 1.0, 2.0).unwrap(), 0.25, max_relative = 1e-15);
    }

    #[test]
    fn com_velocity_regime_guard() {
        let wide = wf(WaveKind::UnentangledProduct, PhysicalConfig::default());
        assert!(matches!(com_velocity(&wide, 1.0, 1.0), Err(Error::RegimeViolation(_))));
        let narrow = wf(WaveKind::UnentangledProduct, PhysicalConfig { slit_offset: 0.05, ..Default::default() });
        assert!(com_velocity(&narrow, 1.0, 1.0).is_ok());
    }

    #[test]
    fn entangled_sum_rule() {
        for kind in [WaveKind::EntangledSymmetric, WaveKind::EntangledAntisymmetric] {
            let w = wf(kind, PhysicalConfig { k_y: 0.3, ..Default::default() });
            for i in -4..=4 {
                for j in -4..=4 {
                    let p = ConfigurationPoint::new(0.53 * i as f64 + 0.01, 0.61 * j as f64 - 0.02, 1.4);
                    let v = velocity(&w, &p).unwrap();
                    let want = com_velocity(&w, p.center_of_mass(), p.t).unwrap();
                    let scale = log_gradient_magnitude(&w, &p);
                    assert!(
                        (0.5 * (v.v1 + v.v2) - want).abs() <= 1e-10 * want.abs().max(scale.0.max(scale.1)),
                        "{p:?}"
                    );
                }
            }
        }
    }
}
