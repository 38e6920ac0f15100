use super::{mean_se, stream_rng, ExperimentConfig, ShrinkageTable};
use crate::error::{invalid, Result, ShrinkError};
use crate::posterior::{PosteriorQuery, PosteriorSampler};
use crate::report::{Cell, ColumnKind, Schema, Table};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionRow {
    pub n: u64,
    pub q: u64,
    pub tau: f64,
    pub family: String,
    pub seed: u64,
    pub replications: usize,
    pub draws: usize,
    pub m_n: f64,
    pub radius_sq: f64,
    /// Π(‖θ−θ₀‖² > r² | X), averaged over replications
    pub mass_truth: f64,
    pub mass_truth_se: f64,
    /// Π(‖θ−T_τ(X)‖² > r² | X), averaged over replications
    pub mass_estimate: f64,
    pub mass_estimate_se: f64,
    pub diagnostics: Vec<String>,
}

/// Posterior mass outside the ball of radius² M_n·q·log(n/q), around θ₀ and around T_τ(X).
pub fn contraction_experiment(cfg: &ExperimentConfig) -> Result<Vec<ContractionRow>> {
    cfg.validate()?;
    if cfg.posterior_draws < 1000 {
        return Err(invalid(format!(
            "contraction runs need at least 1000 posterior draws, got {}",
            cfg.posterior_draws
        )));
    }
    let draws = cfg.posterior_draws;
    cfg.n_grid
        .iter()
        .map(|&n| {
            let scenario = cfg.scenario(n)?;
            let seed = cfg.point_seed(n);
            let table = ShrinkageTable::build_validated(scenario.tau, &cfg.family, seed)?;
            let m_n = cfg.m_n.value(n);
            let radius_sq = m_n * scenario.q as f64 * (n as f64 / scenario.q as f64).ln();
            let results: Vec<Result<(f64, f64)>> = (0..cfg.replications)
                .into_par_iter()
                .map(|r| {
                    let mut rng = stream_rng(seed, r as u64);
                    let mut around_truth = vec![0.0; draws];
                    let mut around_mean = vec![0.0; draws];
                    for &t0 in &scenario.theta0 {
                        let z: f64 = rng.sample(StandardNormal);
                        let x = t0 + z;
                        let centre = table.mean(x)?;
                        let sampler = PosteriorSampler::new(&PosteriorQuery::new(x, scenario.tau, &cfg.family))?;
                        for j in 0..draws {
                            let theta = sampler.draw(&mut rng);
                            around_truth[j] += (theta - t0) * (theta - t0);
                            around_mean[j] += (theta - centre) * (theta - centre);
                        }
                    }
                    let frac = |v: &[f64]| v.iter().filter(|&&s| s > radius_sq).count() as f64 / draws as f64;
                    Ok((frac(&around_truth), frac(&around_mean)))
                })
                .collect();
            let mut truth = Vec::new();
            let mut estimate = Vec::new();
            let mut diagnostics = Vec::new();
            for (r, res) in results.into_iter().enumerate() {
                match res {
                    Ok((a, b)) => {
                        truth.push(a);
                        estimate.push(b);
                    }
                    Err(e) => diagnostics.push(format!("n={n} replication {r}: {e}")),
                }
            }
            if truth.is_empty() {
                return Err(ShrinkError::NoRoot(format!(
                    "every replication failed at n = {n}: {}",
                    diagnostics.join("; ")
                )));
            }
            let (mass_truth, mass_truth_se) = mean_se(&truth);
            let (mass_estimate, mass_estimate_se) = mean_se(&estimate);
            Ok(ContractionRow {
                n,
                q: scenario.q,
                tau: scenario.tau,
                family: cfg.family.name.clone(),
                seed,
                replications: truth.len(),
                draws,
                m_n,
                radius_sq,
                mass_truth,
                mass_truth_se,
                mass_estimate,
                mass_estimate_se,
                diagnostics,
            })
        })
        .collect()
}

pub fn contraction_table(rows: &[ContractionRow]) -> Result<Table> {
    let schema = Schema::new(&[
        ("n", ColumnKind::Int),
        ("q", ColumnKind::Int),
        ("tau", ColumnKind::Float),
        ("family", ColumnKind::Text),
        ("seed", ColumnKind::Text),
        ("replications", ColumnKind::Int),
        ("draws", ColumnKind::Int),
        ("m_n", ColumnKind::Float),
        ("radius_sq", ColumnKind::Float),
        ("mass_truth", ColumnKind::Float),
        ("mass_truth_se", ColumnKind::Float),
        ("mass_estimate", ColumnKind::Float),
        ("mass_estimate_se", ColumnKind::Float),
    ]);
    let mut t = Table::new(schema);
    for r in rows {
        t.push(vec![
            r.n.into(),
            r.q.into(),
            r.tau.into(),
            r.family.as_str().into(),
            Cell::Text(r.seed.to_string()),
            r.replications.into(),
            r.draws.into(),
            r.m_n.into(),
            r.radius_sq.into(),
            r.mass_truth.into(),
            r.mass_truth_se.into(),
            r.mass_estimate.into(),
            r.mass_estimate_se.into(),
        ])?;
    }
    Ok(t)
}
