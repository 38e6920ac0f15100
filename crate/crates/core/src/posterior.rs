//! Posterior shrinkage quantities for one observation.
//!
//! With κ = 1/(1+λ²τ²) the posterior of κ given x has unnormalized density
//!
//! ```text
//! f(κ) = κ^{a−1/2} (1−κ)^{−a−1} L((1/τ²)(1/κ − 1)) e^{−κx²/2},   0 < κ < 1
//! ```
//!
//! and T_τ(x) = (1 − E(κ|x,τ))·x. All moments are ratios of integrals of f
//! taken on one shared panel set. The variance uses
//!
//! ```text
//! Var(θ|x) = E(1−κ) + x²·[E((1−κ)²) − E²(1−κ)]
//! ```
//!
//! and is cross-checked against the κ-form E(1−κ) + x²·[E(κ²) − E²(κ)].

use crate::error::{invalid, Result, ShrinkError};
use crate::family::PriorFamily;
use crate::quadrature::{
    integrate, unit_point, unit_point_inverse, QuadOptions, Quadrature, Sample, UnitPoint,
    DE_HALF_WIDTH,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Relative tolerance for agreement of the two variance identities.
pub const VARIANCE_IDENTITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub struct PosteriorQuery<'a> {
    pub x: f64,
    pub tau: f64,
    pub family: &'a PriorFamily,
    pub rel_tol: f64,
}

impl<'a> PosteriorQuery<'a> {
    pub fn new(x: f64, tau: f64, family: &'a PriorFamily) -> Self {
        PosteriorQuery {
            x,
            tau,
            family,
            rel_tol: DEFAULT_REL_TOL,
        }
    }

    pub fn with_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.x.is_finite() {
            return Err(invalid(format!("observation must be finite, got {}", self.x)));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(invalid(format!("tau must lie in (0,1), got {}", self.tau)));
        }
        if !(1e-12..=1e-4).contains(&self.rel_tol) {
            return Err(invalid(format!(
                "rel_tol must lie in [1e-12, 1e-4], got {}",
                self.rel_tol
            )));
        }
        Ok(())
    }

    fn options(&self) -> QuadOptions {
        QuadOptions {
            rel_tol: self.rel_tol,
            ..Default::default()
        }
    }
}

/// ln f(κ) at a mapped node, without the Jacobian.
#[inline]
fn ln_density(p: &UnitPoint, a: f64, ln_tau2: f64, half_x2: f64, family: &PriorFamily) -> f64 {
    let ln_t = p.ln_1mk - p.ln_k - ln_tau2;
    (a - 0.5) * p.ln_k - (a + 1.0) * p.ln_1mk + family.ln_l(ln_t) - p.k * half_x2
}

/// The unnormalized κ-density of a query.
#[derive(Debug, Clone, Copy)]
pub struct KappaDensity<'a> {
    query: PosteriorQuery<'a>,
}

pub fn kappa_density<'a>(q: &PosteriorQuery<'a>) -> Result<KappaDensity<'a>> {
    q.validate()?;
    Ok(KappaDensity { query: *q })
}

impl KappaDensity<'_> {
    pub fn ln_eval(&self, kappa: f64) -> f64 {
        assert!(kappa > 0.0 && kappa < 1.0, "kappa must lie in (0,1)");
        let q = &self.query;
        let ln_k = kappa.ln();
        let ln_1mk = (-kappa).ln_1p();
        let p = UnitPoint {
            ln_jac: 0.0,
            ln_k,
            ln_1mk,
            k: kappa,
            one_minus_k: 1.0 - kappa,
        };
        ln_density(&p, q.family.a, 2.0 * q.tau.ln(), 0.5 * q.x * q.x, q.family)
    }

    pub fn eval(&self, kappa: f64) -> f64 {
        self.ln_eval(kappa).exp()
    }
}

/// Integrates e^{ln f}·weights(node, s) over κ ∈ (0,1).
pub(crate) fn kappa_quad<const N: usize>(
    q: &PosteriorQuery,
    breaks: &[f64],
    weights: impl Fn(&UnitPoint, f64) -> [f64; N],
) -> Result<Quadrature<N>> {
    kappa_quad_with(q, &q.options(), breaks, weights)
}

fn kappa_quad_with<const N: usize>(
    q: &PosteriorQuery,
    opts: &QuadOptions,
    breaks: &[f64],
    weights: impl Fn(&UnitPoint, f64) -> [f64; N],
) -> Result<Quadrature<N>> {
    q.validate()?;
    let a = q.family.a;
    let ln_tau2 = 2.0 * q.tau.ln();
    let half_x2 = 0.5 * q.x * q.x;
    let family = q.family;
    let f = |s: f64| {
        let p = unit_point(s);
        Sample {
            ln_base: p.ln_jac + ln_density(&p, a, ln_tau2, half_x2, family),
            weights: weights(&p, s),
        }
    };
    integrate(f, -DE_HALF_WIDTH, DE_HALF_WIDTH, breaks, opts).map_err(|e| {
        let p = e.partial;
        let (num, num_err) = if N > 1 {
            (p.totals[1], p.errors[1])
        } else {
            (0.0, 0.0)
        };
        ShrinkError::Convergence {
            panels: p.panels.len(),
            denominator: p.totals[0],
            denominator_error: p.errors[0],
            numerator: num,
            numerator_error: num_err,
        }
    })
}

/// Raw and complementary moments of κ from one panel set.
#[derive(Debug, Clone, Copy)]
pub struct KappaMoments {
    /// E(κ^r), r = 1..3
    pub k: [f64; 3],
    /// E((1−κ)^r), r = 1..3
    pub c: [f64; 3],
}

impl KappaMoments {
    /// Var(κ) = Var(1−κ), centred on whichever side has the smaller mean.
    pub fn var(&self) -> f64 {
        let v = if self.c[0] <= 0.5 {
            self.c[1] - self.c[0] * self.c[0]
        } else {
            self.k[1] - self.k[0] * self.k[0]
        };
        v.max(0.0)
    }

    /// Third central moment of κ.
    pub fn third_central(&self) -> f64 {
        if self.c[0] <= 0.5 {
            let m = self.c[0];
            -(self.c[2] - 3.0 * m * self.c[1] + 2.0 * m * m * m)
        } else {
            let m = self.k[0];
            self.k[2] - 3.0 * m * self.k[1] + 2.0 * m * m * m
        }
    }
}

pub fn kappa_moments(q: &PosteriorQuery) -> Result<KappaMoments> {
    let quad = kappa_quad::<7>(q, &[], |p, _| {
        let (k, c) = (p.k, p.one_minus_k);
        [1.0, k, k * k, k * k * k, c, c * c, c * c * c]
    })?;
    let t = &quad.totals;
    Ok(KappaMoments {
        k: [t[1] / t[0], t[2] / t[0], t[3] / t[0]],
        c: [t[4] / t[0], t[5] / t[0], t[6] / t[0]],
    })
}

/// E(κ^r | x, τ) for r ∈ {1, 2}.
pub fn kappa_moment(q: &PosteriorQuery, r: u32) -> Result<f64> {
    if !(r == 1 || r == 2) {
        return Err(invalid(format!("moment order must be 1 or 2, got {r}")));
    }
    let quad = kappa_quad::<2>(q, &[], |p, _| [1.0, p.k.powi(r as i32)])?;
    Ok(quad.ratio(1, 0))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PosteriorSummary {
    pub e_kappa: f64,
    pub e_kappa_sq: f64,
    pub mean: f64,
    pub variance: f64,
    pub shrinkage_weight: f64,
}

/// Both variance identities evaluated from the same moments.
#[derive(Debug, Clone, Copy)]
pub struct VarianceForms {
    /// T/x − (T−x)² + x²E(κ²)
    pub kappa_form: f64,
    /// T/x − T² + x²E((1−κ)²)
    pub complement_form: f64,
    /// Rounding floor of the κ-form, which cancels when κ concentrates near 1.
    pub rounding_floor: f64,
}

impl VarianceForms {
    pub fn from_moments(x: f64, m: &KappaMoments) -> Self {
        let x2 = x * x;
        let w = m.c[0];
        let e = m.k[0];
        let kappa_form = w - x2 * e * e + x2 * m.k[1];
        let complement_form = if x == 0.0 {
            w
        } else {
            w - x2 * w * w + x2 * m.c[1]
        };
        VarianceForms {
            kappa_form,
            complement_form,
            rounding_floor: 64.0 * f64::EPSILON * (x2 * m.k[1] + w),
        }
    }

    pub fn gap(&self) -> f64 {
        (self.kappa_form - self.complement_form).abs()
    }

    pub fn agree(&self) -> bool {
        self.gap() <= VARIANCE_IDENTITY_TOL * self.complement_form.abs() + self.rounding_floor
    }
}

fn summary_from(x: f64, m: &KappaMoments) -> Result<PosteriorSummary> {
    let forms = VarianceForms::from_moments(x, m);
    if !forms.agree() {
        return Err(ShrinkError::IdentityMismatch {
            first: forms.kappa_form,
            second: forms.complement_form,
            gap: forms.gap() / forms.complement_form.abs(),
        });
    }
    // the complement form with a stably centred variance
    let variance = m.c[0] + x * x * m.var();
    Ok(PosteriorSummary {
        e_kappa: m.k[0],
        e_kappa_sq: m.k[1],
        mean: m.c[0] * x,
        variance,
        shrinkage_weight: m.c[0],
    })
}

pub fn summary(q: &PosteriorQuery) -> Result<PosteriorSummary> {
    let m = kappa_moments(q)?;
    summary_from(q.x, &m)
}

/// T_τ(x) = (1 − E(κ|x,τ))·x.
pub fn posterior_mean(q: &PosteriorQuery) -> Result<f64> {
    if q.x == 0.0 {
        q.validate()?;
        return Ok(0.0);
    }
    let quad = kappa_quad::<2>(q, &[], |p, _| [1.0, p.one_minus_k])?;
    Ok(quad.ratio(1, 0) * q.x)
}

pub fn posterior_variance(q: &PosteriorQuery) -> Result<f64> {
    Ok(summary(q)?.variance)
}

/// Pr(κ > η | x, τ).
pub fn kappa_tail_prob(q: &PosteriorQuery, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid(format!("eta must lie in (0,1), got {eta}")));
    }
    let split = unit_point_inverse(eta);
    let quad = kappa_quad::<2>(q, &[split], |_, s| [1.0, if s > split { 1.0 } else { 0.0 }])?;
    Ok(quad.ratio(1, 0).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    s0: f64,
    s1: f64,
    f0: f64,
    f1: f64,
    cum: f64,
}

/// Inverse-CDF sampler over the converged panel set of the κ-density.
#[derive(Debug, Clone)]
pub struct PosteriorSampler {
    x: f64,
    cells: Vec<Cell>,
    total: f64,
}

const SUBCELLS: usize = 8;
const SAMPLER_INITIAL_PANELS: usize = 32;
const GL3_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL3_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

impl PosteriorSampler {
    pub fn new(q: &PosteriorQuery) -> Result<Self> {
        // the sampler only needs the panel layout, so a coarser start suffices
        let opts = QuadOptions {
            initial_panels: SAMPLER_INITIAL_PANELS,
            ..q.options()
        };
        let quad = kappa_quad_with::<1>(q, &opts, &[], |_, _| [1.0])?;
        let a = q.family.a;
        let ln_tau2 = 2.0 * q.tau.ln();
        let half_x2 = 0.5 * q.x * q.x;
        let scale = quad.ln_scale;
        let dens = |s: f64| {
            let p = unit_point(s);
            (p.ln_jac + ln_density(&p, a, ln_tau2, half_x2, q.family) - scale).exp()
        };
        let cutoff = 1e-17 * quad.totals[0];
        let mut cells = Vec::new();
        let mut cum = 0.0;
        for panel in &quad.panels {
            let mass = if panel.ln_scale.is_finite() {
                (panel.ln_scale - scale).exp() * panel.kronrod[0]
            } else {
                0.0
            };
            if mass <= cutoff {
                continue;
            }
            let h = (panel.b - panel.a) / SUBCELLS as f64;
            let mut left = dens(panel.a);
            for i in 0..SUBCELLS {
                let s0 = panel.a + h * i as f64;
                let s1 = s0 + h;
                let right = dens(s1);
                let mid = 0.5 * (s0 + s1);
                let m: f64 = GL3_NODES
                    .iter()
                    .zip(GL3_WEIGHTS)
                    .map(|(&u, w)| w * dens(mid + 0.5 * h * u))
                    .sum::<f64>()
                    * 0.5
                    * h;
                cum += m;
                cells.push(Cell {
                    s0,
                    s1,
                    f0: left,
                    f1: right,
                    cum,
                });
                left = right;
            }
        }
        if cells.is_empty() || !(cum > 0.0) {
            return Err(ShrinkError::Convergence {
                panels: quad.panels.len(),
                denominator: quad.totals[0],
                denominator_error: quad.errors[0],
                numerator: 0.0,
                numerator_error: 0.0,
            });
        }
        Ok(PosteriorSampler {
            x: q.x,
            cells,
            total: cum,
        })
    }

    /// One κ draw as (κ, 1−κ).
    pub fn draw_kappa<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let u = rng.random::<f64>() * self.total;
        let idx = self
            .cells
            .partition_point(|c| c.cum <= u)
            .min(self.cells.len() - 1);
        let c = &self.cells[idx];
        let start = if idx == 0 { 0.0 } else { self.cells[idx - 1].cum };
        let v = ((u - start) / (c.cum - start)).clamp(0.0, 1.0);
        let d = c.f1 - c.f0;
        let r = if d.abs() <= 1e-12 * (c.f0 + c.f1) {
            v
        } else {
            let disc = c.f0 * c.f0 + d * v * (c.f0 + c.f1);
            ((disc.max(0.0).sqrt() - c.f0) / d).clamp(0.0, 1.0)
        };
        let p = unit_point(c.s0 + r * (c.s1 - c.s0));
        (p.k, p.one_minus_k)
    }

    /// One θ draw: κ from the grid, then θ | κ ~ N((1−κ)x, 1−κ).
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (_, c) = self.draw_kappa(rng);
        let z: f64 = rng.sample(StandardNormal);
        c * self.x + c.sqrt() * z
    }
}

/// m posterior draws of θ, deterministic in `seed`.
pub fn sample_posterior(q: &PosteriorQuery, m: usize, seed: u64) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    let sampler = PosteriorSampler::new(q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..m).map(|_| sampler.draw(&mut rng)).collect())
}

/// ζ_τ = √(2 log(1/τ^{2a})).
pub fn zeta_tau(tau: f64, a: f64) -> f64 {
    (-4.0 * a * tau.ln()).sqrt()
}

/// The x* > 0 with E(κ|x*,τ) = 1/2, the boundary of the induced test.
pub fn decision_threshold(tau: f64, family: &PriorFamily) -> Result<f64> {
    decision_threshold_with(tau, family, DEFAULT_REL_TOL)
}

pub fn decision_threshold_with(tau: f64, family: &PriorFamily, rel_tol: f64) -> Result<f64> {
    let e_kappa = |x: f64| -> Result<f64> {
        let q = PosteriorQuery::new(x, tau, family).with_tol(rel_tol);
        kappa_moment(&q, 1)
    };
    PosteriorQuery::new(0.0, tau, family).with_tol(rel_tol).validate()?;
    let at_zero = e_kappa(0.0)?;
    if at_zero <= 0.5 {
        return Err(ShrinkError::NoRoot(format!(
            "E(kappa|0, tau={tau}) = {at_zero:.6} <= 1/2, so the induced rule rejects every observation"
        )));
    }
    let mut hi = 20.0 * zeta_tau(tau, family.a);
    let mut g_hi = e_kappa(hi)? - 0.5;
    let mut expansions = 0;
    while g_hi > 0.0 {
        if expansions == 3 {
            return Err(ShrinkError::NoRoot(format!(
                "E(kappa|x, tau={tau}) stays above 1/2 up to x = {hi:.4}"
            )));
        }
        hi *= 2.0;
        g_hi = e_kappa(hi)? - 0.5;
        expansions += 1;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-14 * hi {
            break;
        }
        if e_kappa(mid)? - 0.5 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x_star = 0.5 * (lo + hi);

    let mut prev = f64::INFINITY;
    for i in 0..64 {
        let x = 2.0 * x_star * i as f64 / 63.0;
        let e = e_kappa(x)?;
        if e > prev * (1.0 + 1e-9) {
            return Err(ShrinkError::Monotonicity(format!(
                "E(kappa|x, tau={tau}) increases between grid points near x = {x:.6}"
            )));
        }
        prev = e;
    }
    Ok(x_star)
}
