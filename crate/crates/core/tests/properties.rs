mod common;

use common::family_label;
use proptest::prelude::*;
use shrinkage_core::bounds::BoundParams;
use shrinkage_core::family::{registry_samples, PriorFamily};
use shrinkage_core::posterior::{
    kappa_moment, posterior_mean, sample_posterior, summary, PosteriorQuery, VarianceForms,
};
use shrinkage_core::report::{Cell, ColumnKind, Schema, Table};
use shrinkage_core::testing::{
    abos_limit, empirical_bayes_tau, exact_rule_errors, type_one_envelopes, DecisionReport,
    EmpiricalBayesConfig, Rule, TwoGroupsModel,
};
use std::sync::OnceLock;

fn registry() -> &'static [PriorFamily] {
    static R: OnceLock<Vec<PriorFamily>> = OnceLock::new();
    R.get_or_init(|| registry_samples().unwrap())
}

fn family() -> impl Strategy<Value = usize> {
    0..registry().len()
}

fn log_tau() -> impl Strategy<Value = f64> {
    (1e-6f64.ln()..0.9f64.ln()).prop_map(f64::exp)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn summary_invariants(fi in family(), x in -20.0f64..20.0, tau in log_tau()) {
        let f = &registry()[fi];
        let s = summary(&PosteriorQuery::new(x, tau, f)).unwrap();
        prop_assert!(s.e_kappa > 0.0 && s.e_kappa < 1.0, "{}", family_label(f));
        prop_assert!(s.e_kappa_sq <= s.e_kappa);
        prop_assert!(s.mean.abs() <= x.abs());
        prop_assert!((s.mean - s.shrinkage_weight * x).abs() <= 4.0 * f64::EPSILON * x.abs());
        prop_assert!(s.variance > 0.0 && s.variance <= 1.0 + x * x);
        // E(κ) and E(1−κ) share panels but are summed separately
        prop_assert!((s.shrinkage_weight - (1.0 - s.e_kappa)).abs() <= 1e-9);
    }

    #[test]
    fn variance_identities_agree(fi in family(), x in -20.0f64..20.0, tau in log_tau()) {
        let f = &registry()[fi];
        let m = shrinkage_core::posterior::kappa_moments(&PosteriorQuery::new(x, tau, f)).unwrap();
        let forms = VarianceForms::from_moments(x, &m);
        prop_assert!(forms.agree(), "{} gap {}", family_label(f), forms.gap());
    }

    #[test]
    fn symmetric_in_x(fi in family(), x in 0.0f64..20.0, tau in log_tau()) {
        let f = &registry()[fi];
        let a = kappa_moment(&PosteriorQuery::new(x, tau, f), 1).unwrap();
        let b = kappa_moment(&PosteriorQuery::new(-x, tau, f), 1).unwrap();
        prop_assert_eq!(a, b);
        let ma = posterior_mean(&PosteriorQuery::new(x, tau, f)).unwrap();
        let mb = posterior_mean(&PosteriorQuery::new(-x, tau, f)).unwrap();
        prop_assert_eq!(ma, -mb);
    }

    #[test]
    fn shrinkage_decreases_with_tau(fi in family(), x in 0.1f64..15.0, t1 in log_tau(), t2 in log_tau()) {
        let f = &registry()[fi];
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        let e_lo = kappa_moment(&PosteriorQuery::new(x, lo, f), 1).unwrap();
        let e_hi = kappa_moment(&PosteriorQuery::new(x, hi, f), 1).unwrap();
        prop_assert!(e_hi <= e_lo * (1.0 + 1e-9));
    }

    #[test]
    fn horseshoe_l_is_nondecreasing(t1 in -30.0f64..30.0, d in 0.0f64..10.0) {
        let h = PriorFamily::horseshoe();
        prop_assert!(h.l(t1.exp()) <= h.l((t1 + d).exp()));
    }

    #[test]
    fn sampler_is_reproducible(x in -8.0f64..8.0, tau in log_tau(), seed in any::<u64>()) {
        let h = PriorFamily::horseshoe();
        let q = PosteriorQuery::new(x, tau, &h);
        prop_assert_eq!(sample_posterior(&q, 64, seed).unwrap(), sample_posterior(&q, 64, seed).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn model_identity(p in 1e-6f64..0.999, psi in 1e-3f64..1e4) {
        let m = TwoGroupsModel::new(p, psi).unwrap();
        let expect = m.u * ((1.0 - p) / p).powi(2);
        prop_assert!((m.v - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn rule_errors_are_probabilities(c in 1e-3f64..40.0, p in 1e-6f64..0.5, psi in 1e-3f64..1e4) {
        let m = TwoGroupsModel::new(p, psi).unwrap();
        let (t1, t2) = exact_rule_errors(c, &m).unwrap();
        prop_assert!((0.0..=1.0).contains(&t1) && (0.0..=1.0).contains(&t2));
    }

    #[test]
    fn decision_report_identities(c in 0.1f64..10.0, p in 1e-5f64..0.2, psi in 1.0f64..1e3, n in 1u64..1_000_000) {
        let m = TwoGroupsModel::new(p, psi).unwrap();
        let r = DecisionReport::build(Rule::Induced, c, &m, n).unwrap();
        let expect = n as f64 * ((1.0 - p) * r.t1 + p * r.t2);
        prop_assert!((r.bayes_risk - expect).abs() <= 1e-12 * expect.max(1.0));
        if r.oracle_risk > 0.0 {
            prop_assert_eq!(r.risk_ratio.unwrap(), r.bayes_risk / r.oracle_risk);
            // the oracle threshold minimises the Bayes risk
            prop_assert!(r.risk_ratio.unwrap() >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn abos_limit_monotone(a in 0.5f64..0.99, da in 0.0f64..0.3, al in 1.0f64..4.0, dal in 0.0f64..3.0, c in 0.05f64..10.0) {
        let base = abos_limit(a, al, c).unwrap();
        prop_assert!(abos_limit(a, al + dal, c).unwrap() >= base);
        let a2 = (a + da).min(0.999);
        prop_assert!(abos_limit(a2, al, c).unwrap() >= base);
    }

    #[test]
    fn eb_tau_range(xs in proptest::collection::vec(-10.0f64..10.0, 2..200), c1 in 2.0f64..6.0, c2 in 1.0f64..4.0) {
        let cfg = EmpiricalBayesConfig { c1, c2 };
        let t = empirical_bayes_tau(&xs, &cfg).unwrap();
        let n = xs.len() as f64;
        prop_assert!(t >= 1.0 / n && t <= 1.0f64.max(1.0 / c2));
    }

    #[test]
    fn envelope_gap_grows(e1 in 1.5f64..6.0, d in 0.5f64..3.0, a in 0.5f64..0.99) {
        let p = BoundParams { zeta: Some(3.2), ..Default::default() };
        let (lo1, up1) = type_one_envelopes(10f64.powf(-e1), a, &p).unwrap();
        let (lo2, up2) = type_one_envelopes(10f64.powf(-e1 - d), a, &p).unwrap();
        prop_assert!(up2 / lo2 > up1 / lo1);
    }

    #[test]
    fn report_round_trip(vals in proptest::collection::vec((any::<i32>(), -1e300f64..1e300, "[a-z ,\"]{0,8}"), 0..30)) {
        let schema = Schema::new(&[("i", ColumnKind::Int), ("v", ColumnKind::Float), ("s", ColumnKind::Text)]);
        let mut t = Table::new(schema.clone());
        for (i, v, s) in vals {
            t.push(vec![Cell::Int(i as i64), Cell::Float(v), Cell::Text(s)]).unwrap();
        }
        let back = Table::from_csv_str(&t.to_csv_string().unwrap(), &schema).unwrap();
        prop_assert_eq!(back, t);
    }
}
