use crate::config::Config;
use rayon::prelude::*;
use rand::Rng;
use serde_json::{json, Value};
use shrinkage_core::bounds::{
    i_k, j_bound, j_integral, moment_bound, BoundParams, EnvelopeContext, IkOrder,
};
use shrinkage_core::error::Result;
use shrinkage_core::experiments::{
    abos_experiment, abos_table, contraction_experiment, contraction_table, eb_experiment, eb_table,
    estimation_risk_experiment, estimation_table, posterior_spread_experiment, split_seed,
    spread_table, stream_rng, AbosConfig, EbConfig, ExperimentConfig,
};
use shrinkage_core::family::{check_regularity, default_grid, log_grid, make_family, PriorFamily};
use shrinkage_core::posterior::{kappa_moments, kappa_tail_prob, PosteriorQuery};
use shrinkage_core::report::{Cell, ColumnKind, Schema, Table};
use shrinkage_core::testing::{
    induced_rule_errors, oracle_asymptotics, oracle_threshold, DecisionReport, EmpiricalBayesConfig,
    Rule, TwoGroupsModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Job {
    EstimateRisk,
    Spread,
    Contract,
    Abos,
    Oracle,
    InducedTest,
    EbTest,
    BoundsAudit,
    FamilyCheck,
}

impl Job {
    pub fn name(self) -> &'static str {
        match self {
            Job::EstimateRisk => "estimate-risk",
            Job::Spread => "spread",
            Job::Contract => "contract",
            Job::Abos => "abos",
            Job::Oracle => "oracle",
            Job::InducedTest => "induced-test",
            Job::EbTest => "eb-test",
            Job::BoundsAudit => "bounds-audit",
            Job::FamilyCheck => "family-check",
        }
    }
}

fn family(cfg: &Config) -> Result<PriorFamily> {
    make_family(&cfg.family.name, &cfg.family.params)
}

fn experiment(cfg: &Config) -> Result<ExperimentConfig> {
    let s = &cfg.sweep;
    Ok(ExperimentConfig {
        n_grid: s.n.clone(),
        q_rule: s.q,
        magnitude: s.magnitude,
        tau_rule: s.tau,
        family: family(cfg)?,
        replications: s.replications,
        posterior_draws: s.posterior_draws,
        m_n: s.m_n,
        root_seed: cfg.run.root_seed,
    })
}

fn diagnostics<'a>(d: impl Iterator<Item = &'a Vec<String>>) -> Value {
    json!(d.flatten().collect::<Vec<_>>())
}

pub fn execute(job: Job, cfg: &Config) -> Result<(Table, Value)> {
    match job {
        Job::EstimateRisk => {
            let rows = estimation_risk_experiment(&experiment(cfg)?)?;
            let summary = json!({
                "family": cfg.family.name,
                "ratio": rows.iter().map(|r| r.ratio).collect::<Vec<_>>(),
                "diagnostics": diagnostics(rows.iter().map(|r| &r.diagnostics)),
            });
            Ok((estimation_table(&rows)?, summary))
        }
        Job::Spread => {
            let rows = posterior_spread_experiment(&experiment(cfg)?)?;
            let summary = json!({
                "family": cfg.family.name,
                "upper_constant": rows.iter().map(|r| r.upper_constant()).collect::<Vec<_>>(),
                "lower_constant": rows.iter().map(|r| r.lower_constant()).collect::<Vec<_>>(),
                "diagnostics": diagnostics(rows.iter().map(|r| &r.diagnostics)),
            });
            Ok((spread_table(&rows)?, summary))
        }
        Job::Contract => {
            let rows = contraction_experiment(&experiment(cfg)?)?;
            let summary = json!({
                "family": cfg.family.name,
                "mass_truth": rows.iter().map(|r| r.mass_truth).collect::<Vec<_>>(),
                "mass_estimate": rows.iter().map(|r| r.mass_estimate).collect::<Vec<_>>(),
                "diagnostics": diagnostics(rows.iter().map(|r| &r.diagnostics)),
            });
            Ok((contraction_table(&rows)?, summary))
        }
        Job::Abos => {
            let a = &cfg.abos;
            let rows = abos_experiment(&AbosConfig {
                c_const: a.c,
                beta: a.beta,
                n_grid: a.n.clone(),
                family: family(cfg)?,
                alpha: a.alpha,
                tau_scale: a.tau_scale,
            })?;
            let summary = json!({
                "family": cfg.family.name,
                "limit": rows.first().and_then(|r| r.limit),
                "final_ratio": rows.last().map(|r| r.ratio),
            });
            Ok((abos_table(&rows)?, summary))
        }
        Job::EbTest => {
            let e = &cfg.eb;
            let rows = eb_experiment(&EbConfig {
                c_const: e.c,
                beta: e.beta,
                n_grid: e.n.clone(),
                family: family(cfg)?,
                datasets: e.datasets,
                eb: EmpiricalBayesConfig { c1: e.c1, c2: e.c2 },
                root_seed: cfg.run.root_seed,
            })?;
            let summary = json!({
                "family": cfg.family.name,
                "ratio": rows.iter().map(|r| r.ratio).collect::<Vec<_>>(),
            });
            Ok((eb_table(&rows)?, summary))
        }
        Job::Oracle => oracle(cfg),
        Job::InducedTest => induced(cfg),
        Job::BoundsAudit => bounds_audit(cfg),
        Job::FamilyCheck => family_check(cfg),
    }
}

fn model(cfg: &Config) -> Result<TwoGroupsModel> {
    let m = TwoGroupsModel::new(cfg.model.p, cfg.model.psi_sq)?;
    match cfg.model.c {
        Some(c) => m.with_c(c),
        None => Ok(m),
    }
}

fn decision_schema(with_tau: bool) -> Schema {
    let mut cols = vec![("rule", ColumnKind::Text)];
    if with_tau {
        cols.push(("tau", ColumnKind::Float));
    }
    cols.extend([
        ("n", ColumnKind::Int),
        ("p", ColumnKind::Float),
        ("psi_sq", ColumnKind::Float),
        ("threshold", ColumnKind::Float),
        ("t1", ColumnKind::Float),
        ("t2", ColumnKind::Float),
        ("bayes_risk", ColumnKind::Float),
        ("oracle_risk", ColumnKind::Float),
        ("risk_ratio", ColumnKind::Float),
    ]);
    Schema::new(&cols)
}

fn decision_cells(r: &DecisionReport, m: &TwoGroupsModel) -> Vec<Cell> {
    vec![
        r.n.into(),
        m.p.into(),
        m.psi_sq.into(),
        r.threshold.into(),
        r.t1.into(),
        r.t2.into(),
        r.bayes_risk.into(),
        r.oracle_risk.into(),
        r.risk_ratio.into(),
    ]
}

fn oracle(cfg: &Config) -> Result<(Table, Value)> {
    let m = model(cfg)?;
    let n = cfg.model.n;
    let rep = DecisionReport::build(Rule::Oracle, oracle_threshold(&m)?, &m, n)?;
    let mut t = Table::new(decision_schema(false));
    let mut row = vec![Cell::from(rep.rule.as_str())];
    row.extend(decision_cells(&rep, &m));
    t.push(row)?;
    let asymptotic = m.c_const.map(|_| oracle_asymptotics(&m, n)).transpose()?;
    Ok((t, json!({ "report": rep, "asymptotic": asymptotic })))
}

fn induced(cfg: &Config) -> Result<(Table, Value)> {
    let m = model(cfg)?;
    let f = family(cfg)?;
    let mut t = Table::new(decision_schema(true));
    let mut reports = Vec::new();
    for &tau in &cfg.model.tau {
        let e = induced_rule_errors(tau, &f, &m)?;
        let rep = DecisionReport::build(Rule::Induced, e.threshold, &m, cfg.model.n)?;
        let mut row = vec![Cell::from(rep.rule.as_str()), tau.into()];
        row.extend(decision_cells(&rep, &m));
        t.push(row)?;
        reports.push(rep);
    }
    Ok((t, json!({ "family": cfg.family.name, "reports": reports })))
}

/// Values at one audit point, with a violation count.
struct AuditPoint {
    x: f64,
    e_kappa: f64,
    gap: f64,
    h: Option<f64>,
    g: f64,
    tail: f64,
    concentration: f64,
    weight: f64,
    moment: Option<f64>,
    j: Option<f64>,
    j_env: Option<f64>,
    violations: [bool; 6],
}

const AUDIT_CHECKS: [&str; 6] = ["h", "g", "concentration", "variance", "moment", "j"];

/// The (1+o(1)) bounds are only audited for τ at or below this.
const ASYMPTOTIC_TAU: f64 = 1e-2;

fn audit_point(x: f64, tau: f64, f: &PriorFamily, ctx: &EnvelopeContext, slack: f64) -> Result<AuditPoint> {
    let q = PosteriorQuery::new(x, tau, f);
    let m = kappa_moments(&q)?;
    let e_kappa = m.k[0];
    let weight = m.c[0];
    let gap = x.abs() * e_kappa;
    let h = (x != 0.0).then(|| ctx.h(x)).transpose()?;
    let g = ctx.g(x);
    let tail = kappa_tail_prob(&q, ctx.params.eta)?;
    let concentration = ctx.concentration(x);
    let variance = weight + x * x * m.var();
    let estimation = f.require_estimation_range().is_ok();
    let moment = estimation.then(|| moment_bound(x, tau, f, slack)).transpose()?;
    let (j, j_env) = if estimation {
        (Some(j_integral(x, tau, f)?), Some(j_bound(x, tau, f, slack)?))
    } else {
        (None, None)
    };
    let asym = tau <= ASYMPTOTIC_TAU;
    let violations = [
        h.is_some_and(|h| gap > h),
        e_kappa > g,
        tail > concentration,
        variance > 1.0 + x * x,
        asym && moment.is_some_and(|b| weight > b),
        asym && j.zip(j_env).is_some_and(|(j, b)| j > b),
    ];
    Ok(AuditPoint {
        x,
        e_kappa,
        gap,
        h,
        g,
        tail,
        concentration,
        weight,
        moment,
        j,
        j_env,
        violations,
    })
}

fn bounds_audit(cfg: &Config) -> Result<(Table, Value)> {
    let b = &cfg.bounds;
    let f = family(cfg)?;
    let params = BoundParams {
        eta: b.eta,
        delta: b.delta,
        zeta: b.zeta,
        rho: b.rho,
        slack: b.slack,
    };
    params.validate()?;
    let schema = Schema::new(&[
        ("tau", ColumnKind::Float),
        ("x", ColumnKind::Float),
        ("e_kappa", ColumnKind::Float),
        ("shrinkage_gap", ColumnKind::Float),
        ("h", ColumnKind::Float),
        ("g", ColumnKind::Float),
        ("tail_prob", ColumnKind::Float),
        ("concentration", ColumnKind::Float),
        ("weight", ColumnKind::Float),
        ("moment_bound", ColumnKind::Float),
        ("j", ColumnKind::Float),
        ("j_bound", ColumnKind::Float),
        ("violations", ColumnKind::Int),
    ]);
    let mut t = Table::new(schema);
    let mut counts = [0usize; 6];
    for (ti, &tau) in b.tau.iter().enumerate() {
        let ctx = EnvelopeContext::new(tau, &f, params)?;
        let stream = split_seed(cfg.run.root_seed, ti as u64);
        let points: Vec<AuditPoint> = (0..b.points)
            .into_par_iter()
            .map(|i| {
                let x = stream_rng(stream, i as u64).random_range(-20.0..20.0);
                audit_point(x, tau, &f, &ctx, b.slack)
            })
            .collect::<Result<_>>()?;
        for p in points {
            for (c, &v) in counts.iter_mut().zip(&p.violations) {
                *c += v as usize;
            }
            t.push(vec![
                tau.into(),
                p.x.into(),
                p.e_kappa.into(),
                p.gap.into(),
                p.h.into(),
                p.g.into(),
                p.tail.into(),
                p.concentration.into(),
                p.weight.into(),
                p.moment.into(),
                p.j.into(),
                p.j_env.into(),
                p.violations.iter().filter(|&&v| v).count().into(),
            ])?;
        }
    }
    let mut ik = json!(null);
    if f.a == 0.5 && f.l_nondecreasing {
        let mut checked = 0usize;
        let mut failed = 0usize;
        for order in [IkOrder::Half, IkOrder::ThreeHalves, IkOrder::FiveHalves] {
            for &tau in b.tau.iter().filter(|&&tau| tau < order.tau_limit()) {
                for y in log_grid(1e-2, 100.0, 25) {
                    checked += 1;
                    failed += !i_k(y, tau, &f, order)?.holds() as usize;
                }
            }
        }
        ik = json!({ "checked": checked, "violations": failed });
    }
    let violations: serde_json::Map<String, Value> =
        AUDIT_CHECKS.iter().zip(counts).map(|(k, c)| (k.to_string(), json!(c))).collect();
    let summary = json!({
        "family": cfg.family.name,
        "points": t.rows.len(),
        "asymptotic_bounds_tau_max": ASYMPTOTIC_TAU,
        "violations": violations,
        "i_k": ik,
    });
    Ok((t, summary))
}

fn family_check(cfg: &Config) -> Result<(Table, Value)> {
    let f = family(cfg)?;
    let rep = check_regularity(&f, &default_grid())?;
    let schema = Schema::new(&[
        ("family", ColumnKind::Text),
        ("grid_points", ColumnKind::Int),
        ("max_l", ColumnKind::Float),
        ("m", ColumnKind::Float),
        ("c0", ColumnKind::Float),
        ("t0", ColumnKind::Float),
        ("min_tail_l", ColumnKind::Float),
        ("tail_limit", ColumnKind::Float),
        ("slow_variation_gap", ColumnKind::Float),
        ("pass", ColumnKind::Text),
    ]);
    let mut t = Table::new(schema);
    t.push(vec![
        rep.family.as_str().into(),
        rep.grid_points.into(),
        rep.max_l.into(),
        rep.m.into(),
        rep.c0.into(),
        rep.t0.into(),
        rep.min_tail_l.into(),
        rep.tail_limit.into(),
        rep.slow_variation_gap.into(),
        rep.pass.to_string().into(),
    ])?;
    let summary = json!({ "params": cfg.family.params, "report": rep });
    Ok((t, summary))
}
