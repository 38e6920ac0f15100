use super::{mean_se, split_seed, stream_rng};
use crate::error::{invalid, Result, ShrinkError};
use crate::family::PriorFamily;
use crate::posterior::decision_threshold;
use crate::report::{Cell, ColumnKind, Schema, Table};
use crate::testing::{
    abos_limit, eb_tau_from_count, oracle_threshold, DecisionReport, EmpiricalBayesConfig, Rule,
    TwoGroupsModel,
};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequencePoint {
    pub n: u64,
    pub model: TwoGroupsModel,
}

/// p = n^{−β} and the larger ψ² with log v = C·u, for each n.
pub fn build_asymptotic_sequence(c_const: f64, beta: f64, n_grid: &[u64]) -> Result<Vec<SequencePoint>> {
    if !(c_const > 0.0 && c_const.is_finite()) {
        return Err(invalid(format!("C must be positive, got {c_const}")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid(format!("beta must lie in (0,1), got {beta}")));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("the n grid must be strictly increasing"));
    }
    n_grid
        .iter()
        .map(|&n| {
            let p = (n as f64).powf(-beta);
            let infeasible = || {
                ShrinkError::NoRoot(format!(
                    "no admissible slab variance for n = {n}, beta = {beta}, C = {c_const} (p = {p})"
                ))
            };
            if !(p < 0.5) {
                return Err(infeasible());
            }
            let lo_odds = 2.0 * ((1.0 - p) / p).ln();
            // g(u) = C·u − log u − 2 log((1−p)/p) is convex with its minimum at u = 1/C
            let g = |u: f64| c_const * u - u.ln() - lo_odds;
            let mut lo = 1.0 / c_const;
            let mut hi = 1e9;
            if !(g(lo) < 0.0 && g(hi) > 0.0) {
                return Err(infeasible());
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if g(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let u = 0.5 * (lo + hi);
            let model = TwoGroupsModel::new(p, u)?.with_c(c_const)?;
            let resid = (model.v.ln() / model.u - c_const).abs();
            if resid >= 1e-10 {
                return Err(ShrinkError::NoRoot(format!(
                    "slab variance bisection stalled at n = {n}: |log v/u - C| = {resid:e}"
                )));
            }
            Ok(SequencePoint { n, model })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct AbosConfig {
    pub c_const: f64,
    pub beta: f64,
    pub n_grid: Vec<u64>,
    pub family: PriorFamily,
    /// τ = tau_scale·p^α
    pub alpha: f64,
    pub tau_scale: f64,
}

impl AbosConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.5..1.0).contains(&self.family.a) {
            return Err(invalid(format!(
                "the ABOS study needs a in [0.5, 1), family `{}` has a = {}",
                self.family.name, self.family.a
            )));
        }
        if !(self.alpha > 0.0) {
            return Err(invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.tau_scale > 0.0) {
            return Err(invalid(format!("tau scale must be positive, got {}", self.tau_scale)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbosRow {
    pub n: u64,
    pub p: f64,
    pub psi_sq: f64,
    pub tau: f64,
    pub threshold: f64,
    pub t1: f64,
    pub t2: f64,
    pub oracle_threshold: f64,
    pub risk: f64,
    pub oracle_risk: f64,
    pub ratio: f64,
    pub limit: Option<f64>,
}

/// Exact R_OG/R_Opt^BO of the induced rule along the sequence.
pub fn abos_experiment(cfg: &AbosConfig) -> Result<Vec<AbosRow>> {
    cfg.validate()?;
    let seq = build_asymptotic_sequence(cfg.c_const, cfg.beta, &cfg.n_grid)?;
    let limit = (cfg.alpha >= 1.0)
        .then(|| abos_limit(cfg.family.a, cfg.alpha, cfg.c_const))
        .transpose()?;
    seq.par_iter()
        .map(|pt| {
            let m = &pt.model;
            let tau = cfg.tau_scale * m.p.powf(cfg.alpha);
            let x_star = decision_threshold(tau, &cfg.family)?;
            let rep = DecisionReport::build(Rule::Induced, x_star, m, pt.n)?;
            Ok(AbosRow {
                n: pt.n,
                p: m.p,
                psi_sq: m.psi_sq,
                tau,
                threshold: x_star,
                t1: rep.t1,
                t2: rep.t2,
                oracle_threshold: oracle_threshold(m)?,
                risk: rep.bayes_risk,
                oracle_risk: rep.oracle_risk,
                ratio: rep.bayes_risk / rep.oracle_risk,
                limit,
            })
        })
        .collect()
}

pub fn abos_table(rows: &[AbosRow]) -> Result<Table> {
    let schema = Schema::new(&[
        ("n", ColumnKind::Int),
        ("p", ColumnKind::Float),
        ("psi_sq", ColumnKind::Float),
        ("tau", ColumnKind::Float),
        ("threshold", ColumnKind::Float),
        ("t1", ColumnKind::Float),
        ("t2", ColumnKind::Float),
        ("oracle_threshold", ColumnKind::Float),
        ("risk", ColumnKind::Float),
        ("oracle_risk", ColumnKind::Float),
        ("ratio", ColumnKind::Float),
        ("limit", ColumnKind::Float),
    ]);
    let mut t = Table::new(schema);
    for r in rows {
        t.push(vec![
            r.n.into(),
            r.p.into(),
            r.psi_sq.into(),
            r.tau.into(),
            r.threshold.into(),
            r.t1.into(),
            r.t2.into(),
            r.oracle_threshold.into(),
            r.risk.into(),
            r.oracle_risk.into(),
            r.ratio.into(),
            r.limit.into(),
        ])?;
    }
    Ok(t)
}

#[derive(Debug, Clone)]
pub struct EbConfig {
    pub c_const: f64,
    pub beta: f64,
    pub n_grid: Vec<u64>,
    pub family: PriorFamily,
    pub datasets: usize,
    pub eb: EmpiricalBayesConfig,
    pub root_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EbRow {
    pub n: u64,
    pub p: f64,
    pub psi_sq: f64,
    pub seed: u64,
    pub datasets: usize,
    pub mean_tau_hat: f64,
    pub risk: f64,
    pub risk_se: f64,
    pub oracle_risk: f64,
    pub ratio: f64,
    pub ratio_se: f64,
}

/// One two-groups dataset, regenerated identically from its stream.
fn dataset<'r, R: Rng>(
    rng: &'r mut R,
    n: u64,
    model: &TwoGroupsModel,
) -> impl Iterator<Item = (bool, f64)> + use<'r, R> {
    let p = model.p;
    let slab_sd = (1.0 + model.psi_sq).sqrt();
    (0..n).map(move |_| {
        let signal = rng.random::<f64>() < p;
        let z: f64 = rng.sample(StandardNormal);
        (signal, if signal { slab_sd * z } else { z })
    })
}

/// Monte Carlo Bayes risk of the induced rule with τ̂, relative to the exact oracle risk.
pub fn eb_experiment(cfg: &EbConfig) -> Result<Vec<EbRow>> {
    cfg.eb.validate()?;
    if cfg.datasets == 0 {
        return Err(invalid("datasets must be at least 1"));
    }
    if !(0.5..1.0).contains(&cfg.family.a) {
        return Err(invalid(format!(
            "the empirical Bayes study needs a in [0.5, 1), got a = {}",
            cfg.family.a
        )));
    }
    let seq = build_asymptotic_sequence(cfg.c_const, cfg.beta, &cfg.n_grid)?;
    seq.iter()
        .map(|pt| {
            let (n, m) = (pt.n, pt.model);
            let seed = split_seed(cfg.root_seed, n);
            let cut = cfg.eb.cutoff(n as usize);
            let counts: Vec<usize> = (0..cfg.datasets)
                .into_par_iter()
                .map(|d| {
                    let mut rng = stream_rng(seed, d as u64);
                    dataset(&mut rng, n, &m).filter(|(_, x)| x.abs() > cut).count()
                })
                .collect();
            let distinct: BTreeSet<usize> = counts.iter().copied().collect();
            let thresholds: BTreeMap<usize, f64> = distinct
                .into_par_iter()
                .map(|c| {
                    let tau = eb_tau_from_count(c, n as usize, &cfg.eb);
                    Ok((c, decision_threshold(tau, &cfg.family)?))
                })
                .collect::<Result<_>>()?;
            let losses: Vec<f64> = counts
                .par_iter()
                .enumerate()
                .map(|(d, c)| {
                    let x_star = thresholds[c];
                    let mut rng = stream_rng(seed, d as u64);
                    dataset(&mut rng, n, &m)
                        .filter(|&(signal, x)| signal != (x.abs() > x_star))
                        .count() as f64
                })
                .collect();
            let (risk, risk_se) = mean_se(&losses);
            let c = oracle_threshold(&m)?;
            let oracle = DecisionReport::build(Rule::Oracle, c, &m, n)?;
            let mean_tau_hat = counts
                .iter()
                .map(|&c| eb_tau_from_count(c, n as usize, &cfg.eb))
                .sum::<f64>()
                / cfg.datasets as f64;
            Ok(EbRow {
                n,
                p: m.p,
                psi_sq: m.psi_sq,
                seed,
                datasets: cfg.datasets,
                mean_tau_hat,
                risk,
                risk_se,
                oracle_risk: oracle.bayes_risk,
                ratio: risk / oracle.bayes_risk,
                ratio_se: risk_se / oracle.bayes_risk,
            })
        })
        .collect()
}

pub fn eb_table(rows: &[EbRow]) -> Result<Table> {
    let schema = Schema::new(&[
        ("n", ColumnKind::Int),
        ("p", ColumnKind::Float),
        ("psi_sq", ColumnKind::Float),
        ("seed", ColumnKind::Text),
        ("datasets", ColumnKind::Int),
        ("mean_tau_hat", ColumnKind::Float),
        ("risk", ColumnKind::Float),
        ("risk_se", ColumnKind::Float),
        ("oracle_risk", ColumnKind::Float),
        ("ratio", ColumnKind::Float),
        ("ratio_se", ColumnKind::Float),
    ]);
    let mut t = Table::new(schema);
    for r in rows {
        t.push(vec![
            r.n.into(),
            r.p.into(),
            r.psi_sq.into(),
            Cell::Text(r.seed.to_string()),
            r.datasets.into(),
            r.mean_tau_hat.into(),
            r.risk.into(),
            r.risk_se.into(),
            r.oracle_risk.into(),
            r.ratio.into(),
            r.ratio_se.into(),
        ])?;
    }
    Ok(t)
}
