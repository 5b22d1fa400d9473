use bohmsim_core::oracles::com_path;
use bohmsim_core::{
    histogram, run_ensemble, sample_initial, selective_filter, ConfigurationPoint, EnsembleOptions, PhysicalConfig,
    Projection, SourceSpec, SqmPredictor, WaveFunction, WaveKind,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const TOL: f64 = 1e-9;

#[test]
fn entangled_pairs_land_symmetrically() {
    for kind in [WaveKind::EntangledSymmetric, WaveKind::EntangledAntisymmetric] {
        let wf = WaveFunction::new(kind, PhysicalConfig::default()).unwrap();
        let recs =
            run_ensemble(&wf, &SourceSpec::new(kind).with_seed(1), 1000, &EnsembleOptions::with_tol(TOL)).unwrap();
        for r in recs.iter().filter(|r| r.is_completed()) {
            assert!((r.y1_final + r.y2_final).abs() <= 10.0 * TOL * wf.config.sigma0, "{r:?}");
            assert_eq!(r.t_arrival, wf.kin.t_d);
        }
    }
}

#[test]
fn fixed_offset_pairs_land_on_the_spread_line() {
    let wf = WaveFunction::new(WaveKind::EntangledSymmetric, PhysicalConfig::default()).unwrap();
    let src = SourceSpec { y0_mean: 0.3, ..SourceSpec::new(WaveKind::EntangledSymmetric) }.with_seed(3);
    let line = 2.0 * com_path(&wf.config, 0.3, wf.kin.t_d);
    for r in run_ensemble(&wf, &src, 300, &EnsembleOptions::with_tol(TOL)).unwrap() {
        assert!(((r.y1_final + r.y2_final) / line - 1.0).abs() < 10.0 * TOL, "{r:?}");
    }
}

#[test]
fn unentangled_particles_keep_their_side() {
    let wf =
        WaveFunction::new(WaveKind::UnentangledProduct, PhysicalConfig { k_y: 0.05, ..Default::default() }).unwrap();
    let recs = run_ensemble(
        &wf,
        &SourceSpec::new(WaveKind::UnentangledProduct).with_seed(2),
        1000,
        &EnsembleOptions::default(),
    )
    .unwrap();
    for r in recs.iter().filter(|r| r.is_completed()) {
        assert_eq!(r.y1_final.signum(), r.y1_initial.signum());
        assert_eq!(r.y2_final.signum(), r.y2_initial.signum());
        assert_eq!(r.sign_changes, [0, 0]);
    }
}

#[test]
fn selective_filter_keeps_every_symmetric_pair() {
    let wf = WaveFunction::new(WaveKind::EntangledSymmetric, PhysicalConfig::default()).unwrap();
    let recs = run_ensemble(
        &wf,
        &SourceSpec::new(WaveKind::EntangledSymmetric).with_seed(4),
        10_000,
        &EnsembleOptions::default(),
    )
    .unwrap();
    let kept = selective_filter(&recs);
    assert_eq!(kept.len(), recs.iter().filter(|r| r.is_completed()).count());
}

#[test]
fn selective_filter_commutes_with_histogramming() {
    let wf = WaveFunction::new(WaveKind::UnentangledProduct, PhysicalConfig::default()).unwrap();
    let recs = run_ensemble(
        &wf,
        &SourceSpec::new(WaveKind::UnentangledProduct).with_seed(6),
        2000,
        &EnsembleOptions::default(),
    )
    .unwrap();
    let kept = selective_filter(&recs);
    assert_eq!(selective_filter(&kept), kept);
    let direct: Vec<_> = recs.iter().filter(|r| r.y1_final * r.y2_final < 0.0).copied().collect();
    for proj in [Projection::Y1, Projection::Y2, Projection::BothPooled] {
        let a = histogram(&kept, proj, 0.2, (-8.0, 8.0)).unwrap();
        let b = histogram(&direct, proj, 0.2, (-8.0, 8.0)).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn pooled_pattern_is_mirror_symmetric() {
    let kind = WaveKind::EntangledSymmetric;
    let cfg = PhysicalConfig::default();
    let wf = WaveFunction::new(kind, cfg).unwrap();
    let recs =
        run_ensemble(&wf, &SourceSpec::equilibrium(kind, &cfg).with_seed(7), 20_000, &EnsembleOptions::default())
            .unwrap();
    let p = histogram(&recs, Projection::BothPooled, 0.25, (-8.0, 8.0)).unwrap();
    let m = p.mirrored();
    // two-sample chi-square on the positive half against the mirrored half
    let half = p.len() / 2;
    let (mut chi2, mut dof) = (0.0, 0usize);
    for i in half..p.len() {
        let (a, b) = (p.counts[i], m.counts[i]);
        if a + b >= 10.0 {
            chi2 += (a - b).powi(2) / (a + b);
            dof += 1;
        }
    }
    let pval = ChiSquared::new(dof as f64).unwrap().sf(chi2);
    assert!(pval > 0.01, "chi2 {chi2} on {dof} bins, p = {pval}");
}

/// Largest gap between the empirical and quadrature 2D CDFs over a lattice of
/// corner points `(a, b)`, with the CDF taken over `y1 < a, y2 < b`.
fn ks_2d(points: &[ConfigurationPoint], sqm: &SqmPredictor, corners: &[f64]) -> f64 {
    let lo = sqm.grid().y_min;
    let n = points.len() as f64;
    let mut worst = 0.0f64;
    for &a in corners {
        for &b in corners {
            let emp = points.iter().filter(|p| p.y1 < a && p.y2 < b).count() as f64 / n;
            let exact = sqm.rectangle_probability((lo, a), (lo, b));
            worst = worst.max((emp - exact).abs());
        }
    }
    worst
}

#[test]
fn ensemble_is_equivariant_in_configuration_space() {
    let n = 30_000;
    let cfg = PhysicalConfig::default();
    for kind in WaveKind::ALL {
        let wf = WaveFunction::new(kind, cfg).unwrap();
        let src = SourceSpec::equilibrium(kind, &cfg).with_seed(21);
        for &t in &[0.0, 0.5 * wf.kin.t_d, wf.kin.t_d] {
            let points: Vec<ConfigurationPoint> = if t == 0.0 {
                sample_initial(&wf, &src, n).unwrap()
            } else {
                let opts = EnsembleOptions { t_end: Some(t), ..Default::default() };
                run_ensemble(&wf, &src, n, &opts)
                    .unwrap()
                    .iter()
                    .filter(|r| r.is_completed())
                    .map(|r| ConfigurationPoint::new(r.y1_final, r.y2_final, t))
                    .collect()
            };
            let sqm = SqmPredictor::new(&wf, t).unwrap();
            let w = wf.support_half_width(t, 3.0);
            let corners: Vec<f64> = (0..=20).map(|i| -w + 2.0 * w * i as f64 / 20.0).collect();
            let ks = ks_2d(&points, &sqm, &corners);
            assert!(ks < 0.02, "{kind} at t = {t}: KS {ks}");
        }
    }
}

#[test]
fn run_is_reproducible_from_seed() {
    let wf = WaveFunction::new(WaveKind::EntangledAntisymmetric, PhysicalConfig::default()).unwrap();
    let src = SourceSpec::equilibrium(WaveKind::EntangledAntisymmetric, &wf.config).with_seed(99);
    let a = run_ensemble(&wf, &src, 200, &EnsembleOptions::default()).unwrap();
    let b = run_ensemble(&wf, &src, 200, &EnsembleOptions { workers: Some(3), ..Default::default() }).unwrap();
    assert_eq!(a, b);
    let c = run_ensemble(&wf, &src.with_seed(100), 200, &EnsembleOptions::default()).unwrap();
    assert_ne!(a, c);
}
