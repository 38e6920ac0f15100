//! Analytic envelopes for posterior shrinkage quantities.
//!
//! Each bound is an ordinary function of (x, τ, family) so that the
//! inequalities can be checked directly against [`crate::posterior`].
//! Bounds that only hold up to a (1+o(1)) factor take an explicit `slack`.

use crate::error::{invalid, Result, ShrinkError};
use crate::family::PriorFamily;
use crate::posterior::{kappa_quad, PosteriorQuery};
use crate::quadrature::{integrate, unit_point, QuadOptions, Sample, DE_HALF_WIDTH};
use crate::special::{full_gamma_integral, lower_gamma_integral};
use serde::{Deserialize, Serialize};

/// Upper end of the explicit part of the ξ tail integral.
pub const TAIL_CUTOFF: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub eta: f64,
    pub delta: f64,
    pub zeta: Option<f64>,
    pub rho: Option<f64>,
    pub slack: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams {
            eta: 5.0 / 6.0,
            delta: 0.2,
            zeta: None,
            rho: None,
            slack: 1.0,
        }
    }
}

impl BoundParams {
    /// 2/(η(1−δ)), the lower limit for ζ and ρ.
    pub fn critical(&self) -> f64 {
        2.0 / (self.eta * (1.0 - self.delta))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(invalid(format!("eta must lie in (0,1), got {}", self.eta)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        if !(self.slack >= 1.0) {
            return Err(invalid(format!("slack must be at least 1, got {}", self.slack)));
        }
        let crit = self.critical();
        for (name, v) in [("zeta", self.zeta), ("rho", self.rho)] {
            if let Some(v) = v {
                if !(v > crit) {
                    return Err(invalid(format!(
                        "{name} = {v} must exceed 2/(eta(1-delta)) = {crit}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("tau must lie in (0,1), got {tau}")))
    }
}

fn check_slack(slack: f64) -> Result<()> {
    if slack >= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("slack must be at least 1, got {slack}")))
    }
}

/// slack·K·M/(a(1−a))·e^{x²/2}·τ^{2a}, an envelope for E(1−κ|x,τ).
pub fn moment_bound(x: f64, tau: f64, family: &PriorFamily, slack: f64) -> Result<f64> {
    check_tau(tau)?;
    check_slack(slack)?;
    let a = family.a;
    if !(a > 0.0 && a < 1.0) {
        return Err(invalid(format!("moment bound needs 0 < a < 1, got a = {a}")));
    }
    let ln = (slack * family.k * family.m / (a * (1.0 - a))).ln() + 0.5 * x * x + 2.0 * a * tau.ln();
    Ok(ln.exp())
}

/// H(a,η,δ) = (a+½)(1−ηδ)^a / (K(ηδ)^{a+½}).
pub fn h_constant(family: &PriorFamily, eta: f64, delta: f64) -> f64 {
    let a = family.a;
    let ed = eta * delta;
    (a + 0.5) * (1.0 - ed).powf(a) / (family.k * ed.powf(a + 0.5))
}

/// Δ(τ²,η,δ) = (a+½)·t*^{a+½}·∫_{t*}^∞ t^{−(a+3/2)} L(t) dt with t* = (1/(ηδ) − 1)/τ².
///
/// Evaluated as (a+½)∫₀^∞ e^{−(a+½)w} L(t* e^w) dw; the piece beyond
/// t = max(10¹², t*)·e^{40/(a+½)} is replaced by its value with L frozen.
pub fn delta_term(tau: f64, family: &PriorFamily, eta: f64, delta: f64) -> Result<f64> {
    check_tau(tau)?;
    let a = family.a;
    let b = a + 0.5;
    let ln_t_star = (1.0 / (eta * delta) - 1.0).ln() - 2.0 * tau.ln();
    let w_max = (TAIL_CUTOFF.ln() - ln_t_star).max(0.0) + 40.0 / b;
    let opts = QuadOptions {
        rel_tol: 1e-12,
        initial_panels: 32,
        ..Default::default()
    };
    let q = integrate(
        |w: f64| Sample {
            ln_base: -b * w + family.ln_l(ln_t_star + w),
            weights: [1.0],
        },
        0.0,
        w_max,
        &[],
        &opts,
    )
    .map_err(|e| ShrinkError::Convergence {
        panels: e.partial.panels.len(),
        denominator: e.partial.totals[0],
        denominator_error: e.partial.errors[0],
        numerator: 0.0,
        numerator_error: 0.0,
    })?;
    let body = q.ln_total(0).exp();
    let tail = (family.ln_l(ln_t_star + w_max) - b * w_max).exp() / b;
    Ok(b * (body + tail))
}

/// C* = M·2^{a+3/2}Γ(a+3/2) / (c₀(1−η)^{1+a}).
pub fn c_star(family: &PriorFamily, eta: f64) -> f64 {
    let a = family.a;
    family.m * full_gamma_integral(a + 1.5) / (family.c0 * (1.0 - eta).powf(1.0 + a))
}

/// Quantities shared by the envelopes at one τ.
#[derive(Debug, Clone)]
pub struct EnvelopeContext<'a> {
    pub tau: f64,
    pub family: &'a PriorFamily,
    pub params: BoundParams,
    pub h_const: f64,
    pub delta_term: f64,
    pub c_star: f64,
    /// s = 1/(1+t₀)
    pub s: f64,
}

impl<'a> EnvelopeContext<'a> {
    pub fn new(tau: f64, family: &'a PriorFamily, params: BoundParams) -> Result<Self> {
        check_tau(tau)?;
        params.validate()?;
        Ok(EnvelopeContext {
            tau,
            family,
            params,
            h_const: h_constant(family, params.eta, params.delta),
            delta_term: delta_term(tau, family, params.eta, params.delta)?,
            c_star: c_star(family, params.eta),
            s: 1.0 / (1.0 + family.t0),
        })
    }

    /// H·e^{−η(1−δ)x²/2} / (τ^{2a}Δ), the Pr(κ > η) envelope.
    pub fn concentration(&self, x: f64) -> f64 {
        let p = &self.params;
        let ln = self.h_const.ln() - 0.5 * p.eta * (1.0 - p.delta) * x * x
            - 2.0 * self.family.a * self.tau.ln()
            - self.delta_term.ln();
        ln.exp()
    }

    /// C*/(x²·∫₀^{s x²} e^{−u/2}u^{a−1/2} du), the first part of g.
    fn g_first(&self, x: f64) -> f64 {
        let x2 = x * x;
        self.c_star / (x2 * lower_gamma_integral(self.family.a + 0.5, self.s * x2))
    }

    /// h(x,τ) bounding |T_τ(x) − x|.
    pub fn h(&self, x: f64) -> Result<f64> {
        if x == 0.0 || !x.is_finite() {
            return Err(invalid(format!("h envelope needs finite x != 0, got {x}")));
        }
        Ok(x.abs() * (self.g_first(x) + self.concentration(x)))
    }

    /// g(x,τ) bounding E(κ|x,τ); g(0,τ) = 1.
    pub fn g(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 1.0;
        }
        self.g_first(x) + self.concentration(x)
    }

    /// √(c·log(1/τ^{2a})), the lower edge of the sup region.
    pub fn sup_edge(&self, c: f64) -> f64 {
        (c * -2.0 * self.family.a * self.tau.ln()).sqrt()
    }

    /// sup of h (or g) over |x| > √(c·log(1/τ^{2a})), probed on a log grid out to 50× the edge.
    pub fn envelope_sup(&self, c: f64, kind: EnvelopeKind) -> Result<f64> {
        let edge = self.sup_edge(c);
        let mut best: f64 = 0.0;
        for i in 0..=400 {
            let x = edge * (50f64).powf(i as f64 / 400.0);
            let v = match kind {
                EnvelopeKind::H => self.h(x)?,
                EnvelopeKind::G => self.g(x),
            };
            best = best.max(v);
        }
        Ok(best)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvelopeKind {
    H,
    G,
}

pub fn concentration_bound(x: f64, tau: f64, family: &PriorFamily, p: BoundParams) -> Result<f64> {
    Ok(EnvelopeContext::new(tau, family, p)?.concentration(x))
}

pub fn h_envelope(x: f64, tau: f64, family: &PriorFamily, p: BoundParams) -> Result<f64> {
    if x == 0.0 {
        return Err(invalid("h envelope is undefined at x = 0"));
    }
    EnvelopeContext::new(tau, family, p)?.h(x)
}

pub fn g_envelope(x: f64, tau: f64, family: &PriorFamily, p: BoundParams) -> Result<f64> {
    Ok(EnvelopeContext::new(tau, family, p)?.g(x))
}

/// J(x,τ) = x²·E((1−κ)²|x,τ).
pub fn j_integral(x: f64, tau: f64, family: &PriorFamily) -> Result<f64> {
    family.require_estimation_range()?;
    if x == 0.0 {
        PosteriorQuery::new(x, tau, family).validate()?;
        return Ok(0.0);
    }
    let q = PosteriorQuery::new(x, tau, family);
    let quad = kappa_quad::<2>(&q, &[], |p, _| [1.0, p.one_minus_k * p.one_minus_k])?;
    Ok(x * x * quad.ratio(1, 0))
}

/// slack·2KM·e^{x²/2}·τ^{2a}.
pub fn j_bound(x: f64, tau: f64, family: &PriorFamily, slack: f64) -> Result<f64> {
    check_tau(tau)?;
    check_slack(slack)?;
    family.require_estimation_range()?;
    let ln = (slack * 2.0 * family.k * family.m).ln() + 0.5 * x * x + 2.0 * family.a * tau.ln();
    Ok(ln.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IkOrder {
    Half,
    ThreeHalves,
    FiveHalves,
}

impl IkOrder {
    pub fn k(self) -> f64 {
        match self {
            IkOrder::Half => 0.5,
            IkOrder::ThreeHalves => 1.5,
            IkOrder::FiveHalves => 2.5,
        }
    }

    /// Largest τ for which the closed-form bounds are stated.
    pub fn tau_limit(self) -> f64 {
        match self {
            IkOrder::Half => 0.5,
            _ => std::f64::consts::FRAC_1_SQRT_2,
        }
    }
}

/// I_k together with the closed-form bounds available for that k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IkValue {
    pub order: f64,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl IkValue {
    pub fn holds(&self) -> bool {
        self.lower.is_none_or(|l| self.value >= l) && self.upper.is_none_or(|u| self.value <= u)
    }
}

/// I_k = ∫(tτ²)^{k−½}(1+tτ²)^{−k} t^{−3/2} L(t) e^{tτ²y/(1+tτ²)} dt.
///
/// With u = tτ²/(1+tτ²) this is τ∫₀¹ u^{k−2} L(u/((1−u)τ²)) e^{uy} du,
/// integrated on the same κ = 1−u map as the posterior.
pub fn i_k(y: f64, tau: f64, family: &PriorFamily, order: IkOrder) -> Result<IkValue> {
    if family.a != 0.5 || !family.l_nondecreasing {
        return Err(invalid(format!(
            "I_k bounds need a = 0.5 and non-decreasing L; family `{}` has a = {}",
            family.name, family.a
        )));
    }
    if !(y > 0.0 && y.is_finite()) {
        return Err(invalid(format!("I_k needs finite y > 0, got {y}")));
    }
    if !(tau > 0.0 && tau < order.tau_limit()) {
        return Err(invalid(format!(
            "I_k bound for k = {} needs 0 < tau < {}, got {tau}",
            order.k(),
            order.tau_limit()
        )));
    }
    let k = order.k();
    let ln_tau2 = 2.0 * tau.ln();
    let opts = QuadOptions::default();
    let quad = integrate(
        |s: f64| {
            let p = unit_point(s);
            let ln_t = p.ln_1mk - p.ln_k - ln_tau2;
            Sample {
                ln_base: p.ln_jac + (k - 2.0) * p.ln_1mk + family.ln_l(ln_t) + p.one_minus_k * y,
                weights: [1.0],
            }
        },
        -DE_HALF_WIDTH,
        DE_HALF_WIDTH,
        &[],
        &opts,
    )
    .map_err(|e| ShrinkError::Convergence {
        panels: e.partial.panels.len(),
        denominator: e.partial.totals[0],
        denominator_error: e.partial.errors[0],
        numerator: 0.0,
        numerator_error: 0.0,
    })?;
    let value = tau * quad.ln_total(0).exp();

    let l1 = family.l(1.0);
    let (m, kk) = (family.m, family.k);
    let (e_t2y, e_ty, e_half, e_y) = ((tau * tau * y).exp(), (tau * y).exp(), (0.5 * y).exp(), y.exp());
    let rt = tau.sqrt();
    let sqrt2 = std::f64::consts::SQRT_2;
    let (lower, upper) = match order {
        IkOrder::FiveHalves => (
            Some(l1 * tau * ((tau / y) * (e_half - e_t2y) + (e_y - e_half) / (sqrt2 * y))),
            None,
        ),
        IkOrder::ThreeHalves => (
            None,
            Some(m * tau * (e_t2y * tau + 2.0 * e_half * (1.0 / sqrt2 - tau) + sqrt2 / y * (e_y - e_half))),
        ),
        IkOrder::Half => (
            Some(
                l1 * tau
                    * (e_t2y * (1.0 / tau - 1.0 / rt)
                        + sqrt2 / y * (e_y - e_ty)
                        + (e_y - e_half) / (2.0 * y)),
            ),
            Some(
                tau * (e_t2y / (kk * tau)
                    + 2.0 * m * e_ty * (1.0 / tau - 1.0 / rt)
                    + 2.0 * m * e_half * (1.0 / rt - sqrt2)
                    + 2.0 * m * sqrt2 / y * (e_y - e_half)),
            ),
        ),
    };
    Ok(IkValue {
        order: k,
        value,
        lower,
        upper,
    })
}
