use bohmsim_core::quadrature::GaussLegendre;
use bohmsim_core::sampling::{relative_density, trajectory_rng, InitialSampler, RejectionSampler};
use bohmsim_core::{sample_initial, PhysicalConfig, SourceSpec, WaveFunction, WaveKind};

/// One-sample KS statistic against a CDF.
fn ks_against(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn two_sample_ks(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// CDF of an unnormalized density by composite Gauss–Legendre on a fixed
/// panel lattice, independent of the sampler's trapezoid table.
struct QuadCdf {
    lo: f64,
    width: f64,
    cumulative: Vec<f64>,
    total: f64,
}

impl QuadCdf {
    fn new(lo: f64, hi: f64, panels: usize, f: &dyn Fn(f64) -> f64) -> Self {
        let gl = GaussLegendre::new(16);
        let width = (hi - lo) / panels as f64;
        let mut cumulative = vec![0.0];
        for p in 0..panels {
            let a = lo + width * p as f64;
            let v = gl.integrate(a, a + width, f);
            cumulative.push(cumulative.last().unwrap() + v);
        }
        let total = *cumulative.last().unwrap();
        Self { lo, width, cumulative, total }
    }

    fn at(&self, y: f64, f: &dyn Fn(f64) -> f64) -> f64 {
        let k = ((y - self.lo) / self.width).floor().clamp(0.0, (self.cumulative.len() - 2) as f64) as usize;
        let a = self.lo + self.width * k as f64;
        let part = GaussLegendre::new(16).integrate(a, y.max(a), f);
        ((self.cumulative[k] + part) / self.total).clamp(0.0, 1.0)
    }
}

#[test]
fn entangled_marginal_matches_conditional_density() {
    let wf = WaveFunction::new(WaveKind::EntangledSymmetric, PhysicalConfig::default()).unwrap();
    let pts = sample_initial(&wf, &SourceSpec::new(WaveKind::EntangledSymmetric).with_seed(5), 100_000).unwrap();
    let f = |d: f64| relative_density(&wf, d);
    let cdf = QuadCdf::new(-12.0, 12.0, 480, &f);
    let ks = ks_against(pts.iter().map(|p| p.y1).collect(), |y| cdf.at(y, &f));
    assert!(ks < 0.01, "KS {ks}");
}

#[test]
fn rejection_and_inverse_cdf_agree() {
    for kind in WaveKind::ALL {
        let cfg = PhysicalConfig { k_y: 0.3, ..Default::default() };
        let wf = WaveFunction::new(kind, cfg).unwrap();
        let n = 50_000;
        let table = InitialSampler::new(&wf, &SourceSpec::new(kind)).unwrap();
        let mut rng = trajectory_rng(9, 0);
        let a: Vec<f64> = (0..n).map(|_| table.table().sample(&mut rng)).collect();
        let mut rej = RejectionSampler::for_wave(&wf);
        let mut rng = trajectory_rng(9, 1);
        let b: Vec<f64> = (0..n).map(|_| rej.sample(&mut rng).unwrap()).collect();
        let d = two_sample_ks(a, b);
        // 1% critical value of the two-sample statistic
        let crit = 1.63 * (2.0 / n as f64).sqrt();
        assert!(d < crit, "{kind}: D = {d}, critical {crit}");
        assert!(rej.acceptance_rate() > 0.1, "{kind}: {}", rej.acceptance_rate());
    }
}

#[test]
fn unentangled_center_of_mass_moments() {
    let cfg = PhysicalConfig { slit_offset: 0.05, ..Default::default() };
    let wf = WaveFunction::new(WaveKind::UnentangledProduct, cfg).unwrap();
    let n = 100_000;
    let pts = sample_initial(&wf, &SourceSpec::new(WaveKind::UnentangledProduct).with_seed(2), n).unwrap();
    let y0: Vec<f64> = pts.iter().map(|p| p.center_of_mass()).collect();
    let mean = y0.iter().sum::<f64>() / n as f64;
    let var = y0.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64;

    let gl = GaussLegendre::panel32();
    let rho = |y: f64| wf.single_particle(y, 0.0).norm_sqr();
    let z = gl.composite(-12.0, 12.0, 24, rho);
    let single_var = gl.composite(-12.0, 12.0, 24, |y| y * y * rho(y)) / z;
    let expect_var = single_var / 2.0;

    assert!(mean.abs() < 4.0 * (var / n as f64).sqrt(), "mean {mean}");
    // sampling error of a variance estimate is about sqrt(2/n)
    assert!((var / expect_var - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt(), "{var} vs {expect_var}");
    assert!((expect_var.sqrt() - 1.0 / 2f64.sqrt()).abs() < 0.01);
}

#[test]
fn translated_source_shifts_every_particle() {
    let wf = WaveFunction::new(WaveKind::UnentangledProduct, PhysicalConfig::default()).unwrap();
    let base = SourceSpec::new(WaveKind::UnentangledProduct).with_seed(4);
    let shifted = SourceSpec { y0_mean: 20.0, ..base };
    let a = sample_initial(&wf, &base, 200).unwrap();
    let b = sample_initial(&wf, &shifted, 200).unwrap();
    for (p, q) in a.iter().zip(&b) {
        assert!((q.y1 - p.y1 - 20.0).abs() < 1e-12);
        assert!((q.y2 - p.y2 - 20.0).abs() < 1e-12);
    }
}

#[test]
fn entangled_spread_controls_center_of_mass() {
    let wf = WaveFunction::new(WaveKind::EntangledAntisymmetric, PhysicalConfig::default()).unwrap();
    let src = SourceSpec { y0_mean: 0.3, y0_spread: 0.2, ..SourceSpec::new(WaveKind::EntangledAntisymmetric) };
    let n = 40_000;
    let y0: Vec<f64> = sample_initial(&wf, &src.with_seed(8), n).unwrap().iter().map(|p| p.center_of_mass()).collect();
    let mean = y0.iter().sum::<f64>() / n as f64;
    let sd = (y0.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    assert!((mean - 0.3).abs() < 4.0 * 0.2 / (n as f64).sqrt());
    assert!((sd / 0.2 - 1.0).abs() < 0.02);
}
