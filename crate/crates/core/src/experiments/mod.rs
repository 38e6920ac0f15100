//! Desk-scale simulation studies.
//!
//! Every replication owns a generator seeded from `(root_seed, index)`, and
//! results are gathered in index order, so tables do not depend on the
//! number of worker threads.

mod abos;
mod contraction;
mod estimation;
mod table;

pub use abos::{
    abos_experiment, abos_table, build_asymptotic_sequence, eb_experiment, eb_table, AbosConfig,
    AbosRow, EbConfig, EbRow, SequencePoint,
};
pub use contraction::{contraction_experiment, contraction_table, ContractionRow};
pub use estimation::{
    estimation_risk_experiment, estimation_table, posterior_spread_experiment, spread_table,
    EstimationRow, SpreadRow,
};
pub use table::ShrinkageTable;

use crate::error::{invalid, Result};
use crate::family::PriorFamily;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of stream `index` under `root`.
pub fn split_seed(root: u64, index: u64) -> u64 {
    mix(root ^ mix(index.wrapping_add(0x632b_e59b_d9b4_e019)))
}

pub fn stream_rng(root: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(split_seed(root, index))
}

/// 2q·log(n/q).
pub fn minimax_risk(n: u64, q: u64) -> Result<f64> {
    if q == 0 || q >= n {
        return Err(invalid(format!("minimax risk needs 0 < q < n, got n = {n}, q = {q}")));
    }
    Ok(2.0 * q as f64 * (n as f64 / q as f64).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TauRule {
    /// τ = (q/n)^α
    Power { alpha: f64 },
    /// τ = (q/n)·√(log(n/q))
    #[serde(rename = "sqrtlog")]
    SqrtLog,
}

impl TauRule {
    pub fn tau(&self, n: u64, q: u64) -> Result<f64> {
        let r = q as f64 / n as f64;
        let tau = match *self {
            TauRule::Power { alpha } => r.powf(alpha),
            TauRule::SqrtLog => r * (1.0 / r).ln().sqrt(),
        };
        if !(tau > 0.0 && tau < 1.0) {
            return Err(invalid(format!("tau rule gives tau = {tau} outside (0,1) at n = {n}, q = {q}")));
        }
        Ok(tau)
    }

    pub fn label(&self) -> String {
        match self {
            TauRule::Power { alpha } => format!("power({alpha})"),
            TauRule::SqrtLog => "sqrtlog".into(),
        }
    }
}

/// Number of non-zero means as a function of n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QRule {
    Fixed { q: u64 },
    /// q = ⌈n^γ⌉
    Power { gamma: f64 },
}

impl QRule {
    pub fn q(&self, n: u64) -> u64 {
        match *self {
            QRule::Fixed { q } => q,
            QRule::Power { gamma } => (n as f64).powf(gamma).ceil() as u64,
        }
    }
}

/// Radius inflation M_n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MnRule {
    LogN,
    N,
}

impl MnRule {
    pub fn value(&self, n: u64) -> f64 {
        match self {
            MnRule::LogN => (n as f64).ln(),
            MnRule::N => n as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparseMeanScenario {
    pub n: u64,
    pub q: u64,
    pub theta0: Vec<f64>,
    pub signal_magnitude: f64,
    pub tau_rule: TauRule,
    pub tau: f64,
}

/// √(2 log(n/q)).
pub fn default_magnitude(n: u64, q: u64) -> f64 {
    (2.0 * (n as f64 / q as f64).ln()).sqrt()
}

/// θ₀ with q entries equal to `magnitude` at uniformly random positions.
pub fn simulate_nearly_black(
    n: u64,
    q: u64,
    magnitude: Option<f64>,
    tau_rule: TauRule,
    seed: u64,
) -> Result<SparseMeanScenario> {
    if q == 0 || q >= n {
        return Err(invalid(format!("nearly black vector needs 0 < q < n, got n = {n}, q = {q}")));
    }
    let magnitude = magnitude.unwrap_or_else(|| default_magnitude(n, q));
    if !(magnitude > 0.0 && magnitude.is_finite()) {
        return Err(invalid(format!("signal magnitude must be positive, got {magnitude}")));
    }
    let tau = tau_rule.tau(n, q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta0 = vec![0.0; n as usize];
    for i in sample(&mut rng, n as usize, q as usize) {
        theta0[i] = magnitude;
    }
    Ok(SparseMeanScenario {
        n,
        q,
        theta0,
        signal_magnitude: magnitude,
        tau_rule,
        tau,
    })
}

/// Settings shared by the estimation, spread and contraction studies.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n_grid: Vec<u64>,
    pub q_rule: QRule,
    pub magnitude: Option<f64>,
    pub tau_rule: TauRule,
    pub family: PriorFamily,
    pub replications: usize,
    pub posterior_draws: usize,
    pub m_n: MnRule,
    pub root_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(invalid("the n sweep is empty"));
        }
        if self.replications == 0 {
            return Err(invalid("replications must be at least 1"));
        }
        self.family.require_estimation_range()?;
        for &n in &self.n_grid {
            let q = self.q_rule.q(n);
            if q == 0 || q >= n {
                return Err(invalid(format!("q rule gives q = {q} at n = {n}; need 0 < q < n")));
            }
            self.tau_rule.tau(n, q)?;
        }
        Ok(())
    }

    /// Scenario for the sweep point `n`, seeded independently of the replications.
    pub fn scenario(&self, n: u64) -> Result<SparseMeanScenario> {
        let q = self.q_rule.q(n);
        simulate_nearly_black(n, q, self.magnitude, self.tau_rule, split_seed(self.root_seed, n ^ SCENARIO_TAG))
    }

    /// Root of the replication streams at sweep point `n`.
    pub fn point_seed(&self, n: u64) -> u64 {
        split_seed(self.root_seed, n)
    }
}

const SCENARIO_TAG: u64 = 0x5ce0_a210_0000_0000;

/// Mean and standard error.
pub(crate) fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimax_values() {
        assert!((minimax_risk(1000, 10).unwrap() - 20.0 * 100f64.ln()).abs() < 1e-12);
        let d = minimax_risk(2000, 10).unwrap() - minimax_risk(1000, 10).unwrap();
        assert!((d - 20.0 * 2f64.ln()).abs() < 1e-12);
        assert!(minimax_risk(1000, 999).unwrap() > 0.0);
        assert!(minimax_risk(10, 10).is_err());
        assert!(minimax_risk(10, 0).is_err());
    }

    #[test]
    fn nearly_black_construction() {
        let s = simulate_nearly_black(1000, 10, None, TauRule::SqrtLog, 3).unwrap();
        assert_eq!(s.theta0.iter().filter(|&&t| t != 0.0).count(), 10);
        assert!((s.signal_magnitude - (2.0 * 100f64.ln()).sqrt()).abs() < 1e-15);
        assert!(simulate_nearly_black(1000, 0, None, TauRule::SqrtLog, 3).is_err());
        let again = simulate_nearly_black(1000, 10, None, TauRule::SqrtLog, 3).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn seeds_are_distinct() {
        let a: Vec<u64> = (0..1000).map(|i| split_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(a.len(), b.len());
        assert_ne!(split_seed(7, 0), split_seed(8, 0));
    }

    #[test]
    fn tau_rules() {
        assert!((TauRule::Power { alpha: 1.0 }.tau(100, 1).unwrap() - 0.01).abs() < 1e-16);
        let t = TauRule::SqrtLog.tau(10_000, 100).unwrap();
        assert!((t - 0.01 * 100f64.ln().sqrt()).abs() < 1e-16);
        assert_eq!(QRule::Power { gamma: 0.4 }.q(2000), 21);
    }
}
