use shrinkage_core::family::{registry_samples, PriorFamily};
use shrinkage_core::posterior::{decision_threshold, posterior_mean, posterior_variance, sample_posterior, PosteriorQuery};

fn moments(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let c2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let c4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    (mean, c2, c4)
}

#[test]
fn sampler_moments_match_quadrature() {
    let fams = registry_samples().unwrap();
    let m = 1_000_000;
    for (f, x, tau) in [(&fams[0], 2.5, 0.1), (&fams[3], -4.0, 0.01), (&fams[6], 1.0, 0.3)] {
        let q = PosteriorQuery::new(x, tau, f);
        let draws = sample_posterior(&q, m, 2024).unwrap();
        let (mean, var, c4) = moments(&draws);
        let t = posterior_mean(&q).unwrap();
        let v = posterior_variance(&q).unwrap();
        let se_mean = (var / m as f64).sqrt();
        let se_var = ((c4 - var * var) / m as f64).sqrt();
        assert!((mean - t).abs() < 4.0 * se_mean, "{} mean {mean} vs {t}", f.name);
        assert!((var - v).abs() < 4.0 * se_var, "{} variance {var} vs {v}", f.name);
    }
}

#[test]
fn threshold_scales_like_sqrt_log() {
    let h = PriorFamily::horseshoe();
    let mut prev = f64::INFINITY;
    let mut ratios = Vec::new();
    for e in (1..=6).rev() {
        let tau = 10f64.powi(-e);
        let x = decision_threshold(tau, &h).unwrap();
        assert!(x < prev || prev.is_infinite());
        prev = x;
        ratios.push(x / (2.0 * (1.0 / tau).ln()).sqrt());
    }
    let (lo, hi) = ratios.iter().fold((f64::MAX, f64::MIN), |(l, u), &r| (l.min(r), u.max(r)));
    assert!(hi / lo < 1.5 && hi < 3.0, "{ratios:?}");
}

#[test]
fn shrinkage_gap_eventually_decreases() {
    let h = PriorFamily::horseshoe();
    let gaps: Vec<f64> = (10..=60)
        .step_by(5)
        .map(|x| {
            let x = x as f64;
            x - posterior_mean(&PosteriorQuery::new(x, 0.1, &h)).unwrap()
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}
