//! Two-groups model, the Bayes oracle and the induced one-group tests.

use crate::bounds::BoundParams;
use crate::error::{invalid, Result};
use crate::family::PriorFamily;
use crate::posterior::decision_threshold;
use crate::special::{central_mass, norm_cdf, two_sided_tail};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// X ~ (1−p)·N(0,1) + p·N(0, 1+ψ²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoGroupsModel {
    pub p: f64,
    pub psi_sq: f64,
    pub u: f64,
    pub v: f64,
    pub c_const: Option<f64>,
}

impl TwoGroupsModel {
    pub fn new(p: f64, psi_sq: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid(format!("mixing proportion p must lie in (0,1), got {p}")));
        }
        if !(psi_sq > 0.0 && psi_sq.is_finite()) {
            return Err(invalid(format!("slab variance psi^2 must be positive, got {psi_sq}")));
        }
        let odds = (1.0 - p) / p;
        Ok(TwoGroupsModel {
            p,
            psi_sq,
            u: psi_sq,
            v: psi_sq * odds * odds,
            c_const: None,
        })
    }

    pub fn with_c(mut self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid(format!("limit constant C must be positive, got {c}")));
        }
        self.c_const = Some(c);
        Ok(self)
    }

    /// n·((1−p)·t1 + p·t2).
    pub fn bayes_risk(&self, n: u64, t1: f64, t2: f64) -> f64 {
        n as f64 * ((1.0 - self.p) * t1 + self.p * t2)
    }
}

/// c with c² = ((1+ψ²)/ψ²)·(log(1+ψ²) + 2 log((1−p)/p)).
pub fn oracle_threshold(model: &TwoGroupsModel) -> Result<f64> {
    let psi2 = model.psi_sq;
    let c2 = (1.0 + psi2) / psi2 * (psi2.ln_1p() + 2.0 * ((1.0 - model.p) / model.p).ln());
    if !(c2 > 0.0) {
        return Err(invalid(format!(
            "oracle threshold c^2 = {c2} is not positive for p = {}, psi^2 = {psi2}; the rule rejects everything",
            model.p
        )));
    }
    Ok(c2.sqrt())
}

/// Type I and II errors of the rule |X| > threshold when the slab variance is ψ² ≥ 0.
pub fn rule_errors_for_slab(threshold: f64, psi_sq: f64) -> Result<(f64, f64)> {
    if !(threshold > 0.0) {
        return Err(invalid(format!("threshold must be positive, got {threshold}")));
    }
    if !(psi_sq >= 0.0) {
        return Err(invalid(format!("slab variance must be non-negative, got {psi_sq}")));
    }
    Ok((
        two_sided_tail(threshold),
        central_mass(threshold / (1.0 + psi_sq).sqrt()),
    ))
}

/// t1 = 2(1 − Φ(c)), t2 = 2Φ(c/√(1+ψ²)) − 1.
pub fn exact_rule_errors(threshold: f64, model: &TwoGroupsModel) -> Result<(f64, f64)> {
    rule_errors_for_slab(threshold, model.psi_sq)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleAsymptotics {
    pub t1: f64,
    pub t2: f64,
    pub risk: f64,
}

/// Limiting oracle errors along a sequence with log v/u → C.
pub fn oracle_asymptotics(model: &TwoGroupsModel, n: u64) -> Result<OracleAsymptotics> {
    let c = model
        .c_const
        .ok_or_else(|| invalid("oracle asymptotics need the limit constant C"))?;
    if !(model.v > 1.0) {
        return Err(invalid(format!("oracle asymptotics need v > 1, got v = {}", model.v)));
    }
    let lv = model.v.ln();
    let t1 = (-c / 2.0).exp() * (2.0 / (PI * model.v * lv)).sqrt();
    let t2 = 2.0 * norm_cdf(c.sqrt()) - 1.0;
    Ok(OracleAsymptotics {
        t1,
        t2,
        risk: n as f64 * model.p * t2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InducedErrors {
    pub threshold: f64,
    pub t1: f64,
    pub t2: f64,
}

/// Exact errors of "reject when E(1−κ|X,τ) > ½", via its |x| cutoff.
pub fn induced_rule_errors(
    tau: f64,
    family: &PriorFamily,
    model: &TwoGroupsModel,
) -> Result<InducedErrors> {
    let threshold = decision_threshold(tau, family)?;
    let (t1, t2) = exact_rule_errors(threshold, model)?;
    Ok(InducedErrors { threshold, t1, t2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalBayesConfig {
    pub c1: f64,
    pub c2: f64,
}

impl Default for EmpiricalBayesConfig {
    fn default() -> Self {
        EmpiricalBayesConfig { c1: 2.0, c2: 1.0 }
    }
}

impl EmpiricalBayesConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c1 >= 2.0) {
            return Err(invalid(format!("c1 must be at least 2, got {}", self.c1)));
        }
        if !(self.c2 >= 1.0) {
            return Err(invalid(format!("c2 must be at least 1, got {}", self.c2)));
        }
        Ok(())
    }

    /// √(c1·log n), the exceedance cutoff.
    pub fn cutoff(&self, n: usize) -> f64 {
        (self.c1 * (n as f64).ln()).sqrt()
    }
}

/// τ̂ = max{1/n, #{j : |x_j| > √(c1 log n)}/(c2·n)}.
pub fn empirical_bayes_tau(xs: &[f64], cfg: &EmpiricalBayesConfig) -> Result<f64> {
    cfg.validate()?;
    let n = xs.len();
    if n < 2 {
        return Err(invalid(format!("empirical Bayes tau needs at least 2 observations, got {n}")));
    }
    let cut = cfg.cutoff(n);
    let count = xs.iter().filter(|x| x.abs() > cut).count();
    Ok(eb_tau_from_count(count, n, cfg))
}

pub(crate) fn eb_tau_from_count(count: usize, n: usize, cfg: &EmpiricalBayesConfig) -> f64 {
    let nf = n as f64;
    (1.0 / nf).max(count as f64 / (cfg.c2 * nf))
}

/// (2Φ(√(2aα)·√C) − 1)/(2Φ(√C) − 1).
pub fn abos_limit(a: f64, alpha: f64, c_const: f64) -> Result<f64> {
    if !(0.5..1.0).contains(&a) {
        return Err(invalid(format!("ABOS limit needs a in [0.5, 1), got {a}")));
    }
    if !(alpha >= 1.0) {
        return Err(invalid(format!("ABOS limit needs alpha >= 1, got {alpha}")));
    }
    if !(c_const > 0.0) {
        return Err(invalid(format!("ABOS limit needs C > 0, got {c_const}")));
    }
    let sc = c_const.sqrt();
    Ok(central_mass((2.0 * a * alpha).sqrt() * sc) / central_mass(sc))
}

/// τ-shapes (τ^{2a})^{ζ/2}/√(log(1/τ²)) and τ^{2a}/√(log(1/τ²)) of the type I envelope.
pub fn type_one_envelopes(tau: f64, a: f64, p: &BoundParams) -> Result<(f64, f64)> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(invalid(format!("tau must lie in (0,1), got {tau}")));
    }
    if !(a > 0.0) {
        return Err(invalid(format!("exponent a must be positive, got {a}")));
    }
    p.validate()?;
    let zeta = p
        .zeta
        .ok_or_else(|| invalid("the lower envelope needs zeta > 2/(eta(1-delta))"))?;
    let root = (-2.0 * tau.ln()).sqrt();
    let t2a = tau.powf(2.0 * a);
    Ok((t2a.powf(zeta / 2.0) / root, t2a / root))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Oracle,
    Induced,
    InducedEb,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Oracle => "oracle",
            Rule::Induced => "induced",
            Rule::InducedEb => "induced-eb",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecisionReport {
    pub rule: Rule,
    pub n: u64,
    pub threshold: f64,
    pub t1: f64,
    pub t2: f64,
    pub bayes_risk: f64,
    pub oracle_risk: f64,
    pub risk_ratio: Option<f64>,
}

impl DecisionReport {
    /// Report for a fixed-threshold rule, with the exact oracle risk alongside.
    pub fn build(rule: Rule, threshold: f64, model: &TwoGroupsModel, n: u64) -> Result<Self> {
        let (t1, t2) = exact_rule_errors(threshold, model)?;
        let c = oracle_threshold(model)?;
        let (o1, o2) = exact_rule_errors(c, model)?;
        let bayes_risk = model.bayes_risk(n, t1, t2);
        let oracle_risk = model.bayes_risk(n, o1, o2);
        Ok(DecisionReport {
            rule,
            n,
            threshold,
            t1,
            t2,
            bayes_risk,
            oracle_risk,
            risk_ratio: (oracle_risk > 0.0).then(|| bayes_risk / oracle_risk),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_threshold_values() {
        let m = TwoGroupsModel::new(0.5, 1.0).unwrap();
        let c = oracle_threshold(&m).unwrap();
        assert!((c * c - 2.0 * 2f64.ln()).abs() < 1e-14);
        let near_one = TwoGroupsModel::new(0.99, 1.0).unwrap();
        assert!(oracle_threshold(&near_one).is_err());
        let big = TwoGroupsModel::new(0.5, 1e8).unwrap();
        let c2 = oracle_threshold(&big).unwrap().powi(2);
        assert!((c2 / (1e8f64).ln_1p() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn model_derived_fields() {
        let m = TwoGroupsModel::new(0.1, 3.0).unwrap();
        assert_eq!(m.v, m.u * (0.9f64 / 0.1).powi(2));
        assert!(TwoGroupsModel::new(0.0, 1.0).is_err());
        assert!(TwoGroupsModel::new(0.5, 0.0).is_err());
    }

    #[test]
    fn rule_error_limits() {
        let (t1, t2) = rule_errors_for_slab(1e-12, 2.0).unwrap();
        assert!(t1 > 1.0 - 1e-11 && t2 < 1e-11);
        let (t1, t2) = rule_errors_for_slab(40.0, 2.0).unwrap();
        assert!(t1 < 1e-300 && t2 > 1.0 - 1e-15);
        let (t1, t2) = rule_errors_for_slab(1.96, 0.0).unwrap();
        assert!((t2 - 0.950_004_209_703_559_3).abs() < 1e-14);
        assert!((t1 + t2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn oracle_asymptotic_forms() {
        let m = TwoGroupsModel::new(1e-3, 20.0).unwrap().with_c(1.0).unwrap();
        let o = oracle_asymptotics(&m, 1000).unwrap();
        assert!((o.t2 - 0.682_689_492_137_085_9).abs() < 1e-14);
        assert!((o.risk / (1000.0 * m.p) - o.t2).abs() < 1e-15);
        assert!(oracle_asymptotics(&TwoGroupsModel::new(1e-3, 20.0).unwrap(), 10).is_err());
    }

    #[test]
    fn eb_tau_cases() {
        let cfg = EmpiricalBayesConfig::default();
        assert_eq!(empirical_bayes_tau(&[0.0, 0.0, 3.0, 0.0], &cfg).unwrap(), 0.25);
        assert_eq!(empirical_bayes_tau(&[0.1; 50], &cfg).unwrap(), 1.0 / 50.0);
        assert_eq!(empirical_bayes_tau(&[100.0; 50], &cfg).unwrap(), 1.0);
        assert!(empirical_bayes_tau(&[1.0], &cfg).is_err());
        assert!(empirical_bayes_tau(&[1.0, 2.0], &EmpiricalBayesConfig { c1: 1.0, c2: 1.0 }).is_err());
    }

    #[test]
    fn abos_limit_values() {
        for c in [0.3, 1.0, 4.0] {
            assert!((abos_limit(0.5, 1.0, c).unwrap() - 1.0).abs() < 1e-15);
        }
        let v = abos_limit(0.5, 2.0, 1.0).unwrap();
        assert!((v - 1.2344).abs() < 1e-4);
        assert!(abos_limit(0.6, 2.0, 1.0).unwrap() >= v);
        assert!(abos_limit(0.4, 1.0, 1.0).is_err());
        assert!(abos_limit(0.5, 0.9, 1.0).is_err());
    }

    #[test]
    fn envelope_forms() {
        let p = BoundParams {
            zeta: Some(3.2),
            ..Default::default()
        };
        let (lo, up) = type_one_envelopes(1e-2, 0.5, &p).unwrap();
        assert!((up - 1e-2 / (1e4f64).ln().sqrt()).abs() < 1e-16);
        let (lo2, up2) = type_one_envelopes(1e-6, 0.5, &p).unwrap();
        assert!(up2 / lo2 > up / lo);
    }

    #[test]
    fn report_consistency() {
        let m = TwoGroupsModel::new(0.01, 10.0).unwrap();
        let r = DecisionReport::build(Rule::Induced, 3.0, &m, 500).unwrap();
        assert!((r.bayes_risk - 500.0 * (0.99 * r.t1 + 0.01 * r.t2)).abs() < 1e-12);
        assert_eq!(r.risk_ratio.unwrap(), r.bayes_risk / r.oracle_risk);
        let c = oracle_threshold(&m).unwrap();
        let o = DecisionReport::build(Rule::Oracle, c, &m, 500).unwrap();
        assert!(o.risk_ratio.unwrap() == 1.0 && r.risk_ratio.unwrap() >= 1.0);
    }
}
