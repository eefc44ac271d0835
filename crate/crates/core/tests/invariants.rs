use num_complex::Complex64;
use rqi_core::constrained::{hausdorff_dim, threshold_probe};
use rqi_core::lft::size_triple;
use rqi_core::necklace::canonical_rotation;
use rqi_core::spectral::mean_cost_closed_form;
use rqi_core::traces::{dirichlet_partials, trace_hk_direct, SeriesTruncation};
use rqi_core::{count_pn, enumerate_necklaces, CostSpec, DigitWord, SpectralConfig, SpectralEngine};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[test]
fn epsilon_is_not_multiplicative_when_parity_flips() {
    let one = size_triple(&DigitWord::new(vec![1]).unwrap()).unwrap();
    let two = size_triple(&DigitWord::new(vec![1, 1]).unwrap()).unwrap();
    let phi2 = rqi_core::lft::PHI.powi(2);
    assert!((one.epsilon - phi2).abs() < 1e-12);
    assert!((two.epsilon - phi2).abs() < 1e-12);
    assert!((two.alpha - one.alpha.powi(2)).abs() < 1e-15);
}

#[test]
fn necklaces_are_canonical_and_distinct() {
    let orbits = enumerate_necklaces(3000.0, None, &[CostSpec::unit()]).unwrap();
    let mut seen = std::collections::BTreeSet::new();
    for o in &orbits {
        assert_eq!(canonical_rotation(&o.word), o.word);
        assert!(seen.insert(o.word.clone()), "{} emitted twice", o.word);
        assert_eq!(o.period, o.word.len());
        for k in 0..o.period {
            let r = size_triple(&o.word.rotated(k)).unwrap();
            assert!((r.epsilon / o.sizes.epsilon - 1.0).abs() < 1e-12);
            assert!(r.bracket_holds());
        }
    }
    let total: usize = orbits.iter().map(|o| o.period).sum();
    assert_eq!(total as u64, count_pn(3000.0).unwrap());
}

#[test]
fn mu_is_twice_mean_cost_over_entropy() {
    let entropy = std::f64::consts::PI.powi(2) / (6.0 * std::f64::consts::LN_2);
    for cost in [CostSpec::unit(), CostSpec::binary_length(), CostSpec::digit_indicator(3).unwrap()] {
        let engine = SpectralEngine::new(cost.clone(), SpectralConfig::compact()).unwrap();
        let g = engine.gaussian_constants().unwrap();
        let mean = mean_cost_closed_form(&cost, u64::MAX).unwrap().value;
        let expected = 2.0 * mean / entropy;
        assert!(((g.mu - expected) / expected).abs() < 1e-6, "{}: {} vs {expected}", cost.id(), g.mu);
        assert!(g.nu > 0.0);
    }
}

#[test]
fn sigma_slope_matches_finite_differences() {
    let engine = SpectralEngine::new(CostSpec::binary_length(), SpectralConfig::compact()).unwrap();
    let g = engine.gaussian_constants().unwrap();
    let h = 1e-3;
    let plus = engine.sigma(c(h)).unwrap().re;
    let minus = engine.sigma(c(-h)).unwrap().re;
    let slope = (plus - minus) / (2.0 * h);
    // U = 2(σ − σ(0)), so σ′(0) = μ/2
    assert!((slope - g.mu / 2.0).abs() < 1e-6);
}

#[test]
fn lambda_converges_geometrically_in_the_order() {
    let lam = |d: usize| {
        SpectralEngine::new(CostSpec::unit(), SpectralConfig::compact().with_order(d))
            .unwrap()
            .lambda_real(1.1, 0.05)
            .unwrap()
    };
    let gaps: Vec<f64> = [8, 12, 16].iter().map(|&d| (lam(d) - lam(2 * d)).abs()).collect();
    assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "{gaps:?}");
    assert!(gaps[2] < 1e-6);
}

#[test]
fn dimension_solver_meets_its_tolerances() {
    let mut prev = 0.0;
    for m in [2, 5, 20, 100] {
        let d = hausdorff_dim(m, 64).unwrap();
        assert!(d.residual <= 1e-9 && d.doubling_drift <= 1e-9, "M = {m}: {d:?}");
        assert!(d.sigma_m > prev && d.sigma_m < 1.0);
        prev = d.sigma_m;
    }
}

#[test]
fn threshold_is_directional() {
    let n: f64 = 1e3;
    let big = (10.0 * n.ln()).ceil() as u64;
    let rows = threshold_probe(&[n], &[1, big], 32).unwrap();
    assert!(rows[0].pi < 0.1, "{:?}", rows[0]);
    assert!(rows[1].pi > 0.9, "{:?}", rows[1]);
}

#[test]
fn partial_sums_are_positive() {
    for cost in [CostSpec::unit(), CostSpec::binary_length()] {
        for (s, w) in [(2.5, 0.0), (3.0, 0.1), (3.0, -0.1)] {
            let d = dirichlet_partials(c(s), c(w), &cost, 500.0).unwrap();
            assert!(d.p.re > 0.0 && d.z.re > 0.0);
            assert!(d.z_by_length.iter().all(|z| z.re >= 0.0));
            assert!(d.z_by_length[0].re > 0.0);
            assert!(d.z.re >= d.p.re);
        }
    }
    let trunc = SeriesTruncation::new(3, 500).unwrap();
    for k in 1..=3 {
        let t = trace_hk_direct(k, c(2.4), c(0.05), &CostSpec::unit(), &trunc).unwrap();
        assert!(t.value.re > 0.0, "k = {k}");
    }
}
