use super::{mean_se, minimax_risk, stream_rng, ExperimentConfig, ShrinkageTable};
use crate::error::{Result, ShrinkError};
use crate::report::{Cell, ColumnKind, Schema, Table};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationRow {
    pub n: u64,
    pub q: u64,
    pub tau: f64,
    pub family: String,
    pub seed: u64,
    pub replications: usize,
    pub mse: f64,
    pub mse_se: f64,
    pub minimax: f64,
    pub ratio: f64,
    pub ratio_se: f64,
    /// q·log(1/τ^{2a}) + (n−q)·τ^{2a}·√(log(1/τ^{2a}))
    pub upper_form: f64,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpreadRow {
    pub n: u64,
    pub q: u64,
    pub tau: f64,
    pub family: String,
    pub seed: u64,
    pub replications: usize,
    pub spread: f64,
    pub spread_se: f64,
    pub upper_form: f64,
    /// (n−q)·τ·√(log(1/τ))
    pub lower_form: f64,
    pub minimax: f64,
    pub diagnostics: Vec<String>,
}

impl SpreadRow {
    pub fn upper_constant(&self) -> f64 {
        self.spread / self.upper_form
    }

    pub fn lower_constant(&self) -> f64 {
        self.spread / self.lower_form
    }
}

pub(crate) fn upper_form(n: u64, q: u64, tau: f64, a: f64) -> f64 {
    let t2a = tau.powf(2.0 * a);
    let l = -t2a.ln();
    q as f64 * l + (n - q) as f64 * t2a * l.sqrt()
}

pub(crate) fn lower_form(n: u64, q: u64, tau: f64) -> f64 {
    (n - q) as f64 * tau * (-tau.ln()).sqrt()
}

/// Per-replication sums of squared error and of posterior variance.
struct RepOutcome {
    sse: f64,
    spread: f64,
}

struct PointRun {
    n: u64,
    q: u64,
    tau: f64,
    seed: u64,
    outcomes: Vec<RepOutcome>,
    diagnostics: Vec<String>,
}

fn run_point(cfg: &ExperimentConfig, n: u64) -> Result<PointRun> {
    let scenario = cfg.scenario(n)?;
    let seed = cfg.point_seed(n);
    let table = ShrinkageTable::build_validated(scenario.tau, &cfg.family, seed)?;
    let results: Vec<Result<RepOutcome>> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            let mut sse = 0.0;
            let mut spread = 0.0;
            for &t0 in &scenario.theta0 {
                let z: f64 = rng.sample(StandardNormal);
                let x = t0 + z;
                let m = table.moments(x)?;
                let est = m.w * x;
                sse += (est - t0) * (est - t0);
                spread += m.w + x * x * m.var_kappa;
            }
            Ok(RepOutcome { sse, spread })
        })
        .collect();
    let mut outcomes = Vec::new();
    let mut diagnostics = Vec::new();
    for (r, res) in results.into_iter().enumerate() {
        match res {
            Ok(o) => outcomes.push(o),
            Err(e) => diagnostics.push(format!("n={n} replication {r}: {e}")),
        }
    }
    if outcomes.is_empty() {
        return Err(ShrinkError::NoRoot(format!(
            "every replication failed at n = {n}: {}",
            diagnostics.join("; ")
        )));
    }
    Ok(PointRun {
        n,
        q: scenario.q,
        tau: scenario.tau,
        seed,
        outcomes,
        diagnostics,
    })
}

/// Mean squared error of T_τ against θ₀ and its ratio to 2q·log(n/q).
pub fn estimation_risk_experiment(cfg: &ExperimentConfig) -> Result<Vec<EstimationRow>> {
    cfg.validate()?;
    cfg.n_grid
        .iter()
        .map(|&n| {
            let run = run_point(cfg, n)?;
            let sse: Vec<f64> = run.outcomes.iter().map(|o| o.sse).collect();
            let (mse, mse_se) = mean_se(&sse);
            let minimax = minimax_risk(run.n, run.q)?;
            Ok(EstimationRow {
                n: run.n,
                q: run.q,
                tau: run.tau,
                family: cfg.family.name.clone(),
                seed: run.seed,
                replications: run.outcomes.len(),
                mse,
                mse_se,
                minimax,
                ratio: mse / minimax,
                ratio_se: mse_se / minimax,
                upper_form: upper_form(run.n, run.q, run.tau, cfg.family.a),
                diagnostics: run.diagnostics,
            })
        })
        .collect()
}

/// Total posterior variance Σ Var(θᵢ|Xᵢ) against its upper and lower rate forms.
pub fn posterior_spread_experiment(cfg: &ExperimentConfig) -> Result<Vec<SpreadRow>> {
    cfg.validate()?;
    cfg.n_grid
        .iter()
        .map(|&n| {
            let run = run_point(cfg, n)?;
            let sp: Vec<f64> = run.outcomes.iter().map(|o| o.spread).collect();
            let (spread, spread_se) = mean_se(&sp);
            Ok(SpreadRow {
                n: run.n,
                q: run.q,
                tau: run.tau,
                family: cfg.family.name.clone(),
                seed: run.seed,
                replications: run.outcomes.len(),
                spread,
                spread_se,
                upper_form: upper_form(run.n, run.q, run.tau, cfg.family.a),
                lower_form: lower_form(run.n, run.q, run.tau),
                minimax: minimax_risk(run.n, run.q)?,
                diagnostics: run.diagnostics,
            })
        })
        .collect()
}

pub fn estimation_table(rows: &[EstimationRow]) -> Result<Table> {
    let schema = Schema::new(&[
        ("n", ColumnKind::Int),
        ("q", ColumnKind::Int),
        ("tau", ColumnKind::Float),
        ("family", ColumnKind::Text),
        ("seed", ColumnKind::Text),
        ("replications", ColumnKind::Int),
        ("mse", ColumnKind::Float),
        ("mse_se", ColumnKind::Float),
        ("minimax", ColumnKind::Float),
        ("ratio", ColumnKind::Float),
        ("ratio_se", ColumnKind::Float),
        ("upper_form", ColumnKind::Float),
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
            r.mse.into(),
            r.mse_se.into(),
            r.minimax.into(),
            r.ratio.into(),
            r.ratio_se.into(),
            r.upper_form.into(),
        ])?;
    }
    Ok(t)
}

pub fn spread_table(rows: &[SpreadRow]) -> Result<Table> {
    let schema = Schema::new(&[
        ("n", ColumnKind::Int),
        ("q", ColumnKind::Int),
        ("tau", ColumnKind::Float),
        ("family", ColumnKind::Text),
        ("seed", ColumnKind::Text),
        ("replications", ColumnKind::Int),
        ("spread", ColumnKind::Float),
        ("spread_se", ColumnKind::Float),
        ("upper_form", ColumnKind::Float),
        ("lower_form", ColumnKind::Float),
        ("upper_constant", ColumnKind::Float),
        ("lower_constant", ColumnKind::Float),
        ("minimax", ColumnKind::Float),
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
            r.spread.into(),
            r.spread_se.into(),
            r.upper_form.into(),
            r.lower_form.into(),
            r.upper_constant().into(),
            r.lower_constant().into(),
            r.minimax.into(),
        ])?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_form_reference() {
        let v = lower_form(10_000, 100, 0.01);
        assert!((v - 9900.0 * 0.01 * 100f64.ln().sqrt()).abs() < 1e-9);
        assert!((v - 212.45).abs() < 0.1);
    }
}
