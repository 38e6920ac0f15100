mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use shrinkage_core::bounds::{j_bound, j_integral, moment_bound};
use shrinkage_core::family::{registry_samples, PriorFamily};
use shrinkage_core::posterior::{posterior_mean, PosteriorQuery};

const SLACK_FILE: &str = "slack.json";

fn shrink_weight(x: f64, tau: f64, f: &PriorFamily) -> f64 {
    if x == 0.0 {
        // T/x is 0/0 here
        return shrinkage_core::posterior::summary(&PosteriorQuery::new(0.0, tau, f))
            .unwrap()
            .shrinkage_weight;
    }
    posterior_mean(&PosteriorQuery::new(x, tau, f)).unwrap() / x
}

/// Worst true/bound ratios at slack 1 over τ ∈ [1e-6, 1e-2] and |x| ≤ 4.
fn worst_ratios(f: &PriorFamily) -> (f64, f64) {
    let mut moment: f64 = 0.0;
    let mut j: f64 = 0.0;
    for i in 0..=16 {
        let tau = 10f64.powf(-6.0 + 4.0 * i as f64 / 16.0);
        for k in 0..=32 {
            let x = -4.0 + 8.0 * k as f64 / 32.0;
            moment = moment.max(shrink_weight(x, tau, f) / moment_bound(x, tau, f, 1.0).unwrap());
            if x != 0.0 {
                j = j.max(j_integral(x, tau, f).unwrap() / j_bound(x, tau, f, 1.0).unwrap());
            }
        }
    }
    (moment, j)
}

/// Freezes slack = max(1, 1.1 × worst ratio) per family; run with `--ignored`.
#[test]
#[ignore]
fn calibrate_slack() {
    let mut out = serde_json::Map::new();
    for f in registry_samples().unwrap() {
        let (m, j) = worst_ratios(&f);
        out.insert(
            family_label(&f),
            json!({
                "moment_worst_ratio": m,
                "moment_slack": (1.1 * m).max(1.0),
                "j_worst_ratio": j,
                "j_slack": (1.1 * j).max(1.0),
            }),
        );
    }
    let text = serde_json::to_string_pretty(&Value::Object(out)).unwrap();
    std::fs::write(golden_dir().join(SLACK_FILE), text + "\n").unwrap();
}

fn slack_for(f: &PriorFamily) -> (f64, f64) {
    let text = std::fs::read_to_string(golden_dir().join(SLACK_FILE)).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let e = &v[family_label(f)];
    (e["moment_slack"].as_f64().unwrap(), e["j_slack"].as_f64().unwrap())
}

#[test]
fn calibrated_envelopes_dominate_for_small_tau() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x51AC);
    for f in registry_samples().unwrap() {
        let (sm, sj) = slack_for(&f);
        assert!(sm >= 1.0 && sj >= 1.0);
        for _ in 0..150 {
            let tau = rng.random_range(1e-6f64.ln()..1e-2f64.ln()).exp();
            let x: f64 = rng.random_range(-4.0..4.0);
            let w = shrink_weight(x, tau, &f);
            assert!(w <= moment_bound(x, tau, &f, sm).unwrap(), "{} x={x} tau={tau}", f.name);
            let jv = j_integral(x, tau, &f).unwrap();
            assert!(jv <= j_bound(x, tau, &f, sj).unwrap(), "{} x={x} tau={tau}", f.name);
        }
    }
}

#[test]
fn moment_and_j_bounds_are_even() {
    let h = PriorFamily::horseshoe();
    for x in [0.5, 1.7, 3.0] {
        assert_eq!(moment_bound(x, 1e-3, &h, 1.5).unwrap(), moment_bound(-x, 1e-3, &h, 1.5).unwrap());
        assert_eq!(j_bound(x, 1e-3, &h, 1.5).unwrap(), j_bound(-x, 1e-3, &h, 1.5).unwrap());
    }
}

#[test]
fn horseshoe_reference_comparisons() {
    let h = PriorFamily::horseshoe();
    let w = shrink_weight(1.0, 1e-3, &h);
    assert!(w <= moment_bound(1.0, 1e-3, &h, 1.5).unwrap());
    let (_, sj) = slack_for(&h);
    let j = j_integral(1.0, 1e-3, &h).unwrap();
    assert!(j <= sj * 2.0 * h.k * h.m * 0.5f64.exp() * 1e-3);
}
