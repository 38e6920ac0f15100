//! Prior families in the form π(λ²) = K·(λ²)^{−a−1}·L(λ²).
//!
//! Registered mappings (t = λ²):
//!
//! ```text
//! horseshoe          a = 1/2     K = 1/π                    L = t/(1+t)
//! tpbn(A, B)         a = A       K = 1/B(A,B)               L = (t/(1+t))^{A+B}
//! neg(λ, φ)          a = λ       K = λ·φ^λ                  L = (t/(φ+t))^{λ+1}
//! half-t(ν, s)       a = ν/2     K = c_ν·ν^{(ν+1)/2}·s^ν    L = (t/(νs²+t))^{(ν+1)/2}
//! inverse-gamma(α,β) a = α       K = β^α/Γ(α)               L = e^{−β/t}
//! gdp(α, η)          a = α/2     K = η^α·F(0)/(2Γ(α))       L = F(η/√t)/F(0)
//! ```
//!
//! Here c_ν = Γ((ν+1)/2)/(Γ(ν/2)√(νπ)) and F(z) = ∫₀^∞ w^{α+1}e^{−w²/2−zw}dw.
//! TPBN uses the density t^{B−1}(1+t)^{−(A+B)}/B(A,B), so its first shape is
//! the tail exponent: horseshoe is tpbn(1/2, 1/2), Strawderman–Berger is
//! tpbn(1/2, 1). F has no elementary closed form for general α, so it is
//! tabulated once per family as a cubic Hermite table in ln z.

use crate::error::{invalid, Result, ShrinkError};
use crate::quadrature::{integrate_line, softplus, QuadOptions, Sample};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub type FamilyParams = BTreeMap<String, f64>;

/// Design grid: 400 log-spaced points over [10⁻⁶, 10¹²].
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-6, 1e12, 400)
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[derive(Clone)]
pub enum Kernel {
    /// t/(1+t)
    Horseshoe,
    /// (t/(scale+t))^power
    BetaPrime { power: f64, scale: f64 },
    /// e^{−scale/t}
    InverseGamma { scale: f64 },
    Gdp(Arc<GdpTable>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Horseshoe => write!(f, "Horseshoe"),
            Kernel::BetaPrime { power, scale } => {
                write!(f, "BetaPrime {{ power: {power}, scale: {scale} }}")
            }
            Kernel::InverseGamma { scale } => write!(f, "InverseGamma {{ scale: {scale} }}"),
            Kernel::Gdp(t) => write!(f, "Gdp {{ alpha: {}, eta: {} }}", t.alpha, t.eta),
            Kernel::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Kernel {
    fn ln_l(&self, ln_t: f64) -> f64 {
        match self {
            Kernel::Horseshoe => ln_t - softplus(ln_t),
            Kernel::BetaPrime { power, scale } => {
                let d = ln_t - scale.ln();
                -power * softplus(-d)
            }
            Kernel::InverseGamma { scale } => -scale * (-ln_t).exp(),
            Kernel::Gdp(table) => table.ln_ratio(table.eta.ln() - 0.5 * ln_t),
            Kernel::Custom(f) => f(ln_t.exp()).ln(),
        }
    }
}

/// ln F(z) for F(z) = ∫₀^∞ w^{α+1} e^{−w²/2 − zw} dw, tabulated in ln z.
#[derive(Debug)]
pub struct GdpTable {
    pub alpha: f64,
    pub eta: f64,
    lo: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    ln_f0: f64,
    ratio0: f64,
}

const GDP_LN_Z_MIN: f64 = -16.118_095_650_958_32; // ln 1e-7
const GDP_NODES: usize = 1601;

/// G_ν(z) and G_{ν+1}(z) in log form, where G_ν(z) = ∫₀^∞ w^ν e^{−w²/2−zw} dw.
fn gdp_moments(nu: f64, z: f64) -> Result<(f64, f64)> {
    let e_peak = 2.0 * (nu + 1.0) / (z + (z * z + 4.0 * (nu + 1.0)).sqrt());
    let opts = QuadOptions {
        rel_tol: 1e-13,
        initial_panels: 24,
        ..Default::default()
    };
    let q = integrate_line(
        e_peak.ln(),
        |y: f64| {
            let w = y.exp();
            Sample {
                ln_base: (nu + 1.0) * y - 0.5 * w * w - z * w,
                weights: [1.0, w],
            }
        },
        &opts,
    )
    .map_err(|e| ShrinkError::Convergence {
        panels: e.partial.panels.len(),
        denominator: e.partial.totals[0],
        denominator_error: e.partial.errors[0],
        numerator: e.partial.totals[1],
        numerator_error: e.partial.errors[1],
    })?;
    Ok((q.ln_total(0), q.ln_total(1)))
}

impl GdpTable {
    pub fn build(alpha: f64, eta: f64) -> Result<Self> {
        let nu = alpha + 1.0;
        let lo = GDP_LN_Z_MIN;
        let step = -2.0 * lo / (GDP_NODES - 1) as f64;
        let mut values = Vec::with_capacity(GDP_NODES);
        let mut slopes = Vec::with_capacity(GDP_NODES);
        for i in 0..GDP_NODES {
            let ln_z = lo + step * i as f64;
            let z = ln_z.exp();
            let (g0, g1) = gdp_moments(nu, z)?;
            values.push(g0);
            slopes.push(-z * (g1 - g0).exp());
        }
        // G_ν(0) = 2^{(ν−1)/2} Γ((ν+1)/2)
        let ln_g = |v: f64| 0.5 * (v - 1.0) * std::f64::consts::LN_2 + ln_gamma(0.5 * (v + 1.0));
        let ln_f0 = ln_g(nu);
        let ratio0 = (ln_g(nu + 1.0) - ln_f0).exp();
        Ok(GdpTable {
            alpha,
            eta,
            lo,
            step,
            values,
            slopes,
            ln_f0,
            ratio0,
        })
    }

    /// ln F(z) at ln z.
    pub fn ln_f(&self, ln_z: f64) -> f64 {
        let hi = self.lo + self.step * (GDP_NODES - 1) as f64;
        if ln_z <= self.lo {
            return self.ln_f0 - ln_z.exp() * self.ratio0;
        }
        if ln_z >= hi {
            let z2 = (2.0 * ln_z).exp();
            let m = self.alpha + 2.0;
            return ln_gamma(m) - m * ln_z + (-(m * (m + 1.0)) / (2.0 * z2)).ln_1p();
        }
        let pos = (ln_z - self.lo) / self.step;
        let i = (pos.floor() as usize).min(GDP_NODES - 2);
        let u = pos - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * d0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * d1
    }

    fn ln_ratio(&self, ln_z: f64) -> f64 {
        self.ln_f(ln_z) - self.ln_f0
    }

    pub fn ln_f_zero(&self) -> f64 {
        self.ln_f0
    }
}

/// A prior in the class, with the regularity constants it was validated with.
#[derive(Clone, Debug)]
pub struct PriorFamily {
    pub name: String,
    pub params: FamilyParams,
    pub a: f64,
    pub k: f64,
    pub kernel: Kernel,
    pub c0: f64,
    pub t0: f64,
    pub m: f64,
    pub tail_limit: f64,
    pub l_nondecreasing: bool,
}

fn take(params: &FamilyParams, key: &str, default: Option<f64>) -> Result<f64> {
    match params.get(key).copied().or(default) {
        Some(v) if v.is_finite() && v > 0.0 => Ok(v),
        Some(v) => Err(invalid(format!("family parameter `{key}` must be positive, got {v}"))),
        None => Err(invalid(format!("family parameter `{key}` is required"))),
    }
}

fn reject_unknown(params: &FamilyParams, allowed: &[&str], name: &str) -> Result<()> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(invalid(format!(
                "family `{name}` does not take parameter `{k}` (allowed: {})",
                if allowed.is_empty() { "none".to_string() } else { allowed.join(", ") }
            )));
        }
    }
    Ok(())
}

/// Looks up a registered family by name.
pub fn make_family(name: &str, params: &FamilyParams) -> Result<PriorFamily> {
    let key = name.to_ascii_lowercase();
    let (a, ln_k, kernel) = match key.as_str() {
        "horseshoe" => {
            reject_unknown(params, &[], name)?;
            (0.5, -PI.ln(), Kernel::Horseshoe)
        }
        "tpbn" => {
            reject_unknown(params, &["a_shape", "b_shape"], name)?;
            let sa = take(params, "a_shape", None)?;
            let sb = take(params, "b_shape", None)?;
            (
                sa,
                -ln_beta(sa, sb),
                Kernel::BetaPrime {
                    power: sa + sb,
                    scale: 1.0,
                },
            )
        }
        "neg" => {
            reject_unknown(params, &["shape", "scale"], name)?;
            let lam = take(params, "shape", None)?;
            let phi = take(params, "scale", Some(1.0))?;
            (
                lam,
                lam.ln() + lam * phi.ln(),
                Kernel::BetaPrime {
                    power: lam + 1.0,
                    scale: phi,
                },
            )
        }
        "half-t" => {
            reject_unknown(params, &["nu", "scale"], name)?;
            let nu = take(params, "nu", None)?;
            let s = take(params, "scale", Some(1.0))?;
            let ln_c = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln();
            (
                0.5 * nu,
                ln_c + 0.5 * (nu + 1.0) * nu.ln() + nu * s.ln(),
                Kernel::BetaPrime {
                    power: 0.5 * (nu + 1.0),
                    scale: nu * s * s,
                },
            )
        }
        "inverse-gamma" => {
            reject_unknown(params, &["shape", "scale"], name)?;
            let alpha = take(params, "shape", None)?;
            let beta = take(params, "scale", Some(1.0))?;
            (
                alpha,
                alpha * beta.ln() - ln_gamma(alpha),
                Kernel::InverseGamma { scale: beta },
            )
        }
        "gdp" => {
            reject_unknown(params, &["alpha", "eta"], name)?;
            let alpha = take(params, "alpha", None)?;
            let eta = take(params, "eta", Some(1.0))?;
            let table = GdpTable::build(alpha, eta)?;
            let ln_k = alpha * eta.ln() + table.ln_f_zero()
                - std::f64::consts::LN_2
                - ln_gamma(alpha);
            (0.5 * alpha, ln_k, Kernel::Gdp(Arc::new(table)))
        }
        _ => return Err(ShrinkError::UnknownFamily(name.to_string())),
    };
    Ok(PriorFamily::assemble(
        key,
        params.clone(),
        a,
        ln_k.exp(),
        kernel,
        Some(1.0),
        Some(1.0),
        true,
    ))
}

/// Builds a parameter map from pairs.
pub fn params(pairs: &[(&str, f64)]) -> FamilyParams {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

impl PriorFamily {
    pub fn horseshoe() -> Self {
        make_family("horseshoe", &FamilyParams::new()).expect("horseshoe is registered")
    }

    /// A family with a user-supplied L. M and the tail limit come from the
    /// design grid when not given.
    pub fn custom(
        name: &str,
        a: f64,
        k: f64,
        l: impl Fn(f64) -> f64 + Send + Sync + 'static,
        l_nondecreasing: bool,
    ) -> Result<Self> {
        if !(a > 0.0 && k > 0.0) {
            return Err(invalid("custom family needs a > 0 and K > 0"));
        }
        Ok(Self::assemble(
            name.to_string(),
            FamilyParams::new(),
            a,
            k,
            Kernel::Custom(Arc::new(l)),
            None,
            None,
            l_nondecreasing,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        name: String,
        params: FamilyParams,
        a: f64,
        k: f64,
        kernel: Kernel,
        sup: Option<f64>,
        limit: Option<f64>,
        l_nondecreasing: bool,
    ) -> Self {
        let grid = default_grid();
        let values: Vec<f64> = grid.iter().map(|&t| kernel.ln_l(t.ln()).exp()).collect();
        let m = sup.unwrap_or_else(|| 1.01 * values.iter().copied().fold(0.0, f64::max));
        let tail_limit = limit.unwrap_or_else(|| last_decade_mean(&grid, &values));
        let c0 = 0.5 * tail_limit;
        let t0 = grid
            .iter()
            .zip(&values)
            .find(|(_, &v)| v >= c0)
            .map(|(&t, _)| t)
            .unwrap_or(*grid.last().unwrap());
        PriorFamily {
            name,
            params,
            a,
            k,
            kernel,
            c0,
            t0,
            m,
            tail_limit,
            l_nondecreasing,
        }
    }

    /// L(t).
    pub fn eval_l(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(invalid(format!("L(t) needs finite t > 0, got {t}")));
        }
        Ok(self.l(t))
    }

    pub fn l(&self, t: f64) -> f64 {
        self.ln_l(t.ln()).exp()
    }

    /// ln L evaluated at ln t; the quadrature kernels work in this form.
    #[inline]
    pub fn ln_l(&self, ln_t: f64) -> f64 {
        self.kernel.ln_l(ln_t)
    }

    /// ∫₀^∞ K t^{−a−1} L(t) dt, which must equal 1.
    pub fn normalization(&self) -> Result<f64> {
        let ln_k = self.k.ln();
        let opts = QuadOptions {
            rel_tol: 1e-12,
            ..Default::default()
        };
        let q = integrate_line(
            0.0,
            |w: f64| Sample {
                ln_base: ln_k - self.a * w + self.ln_l(w),
                weights: [1.0],
            },
            &opts,
        )
        .map_err(|e| ShrinkError::Convergence {
            panels: e.partial.panels.len(),
            denominator: e.partial.totals[0],
            denominator_error: e.partial.errors[0],
            numerator: 0.0,
            numerator_error: 0.0,
        })?;
        Ok(q.ln_total(0).exp())
    }

    /// Checks the exponent range the estimation results need.
    pub fn require_estimation_range(&self) -> Result<()> {
        if self.a >= 0.5 && self.a < 1.0 {
            Ok(())
        } else {
            Err(invalid(format!(
                "family `{}` has a = {}, outside [0.5, 1)",
                self.name, self.a
            )))
        }
    }
}

fn last_decade_mean(grid: &[f64], values: &[f64]) -> f64 {
    let top = *grid.last().unwrap();
    let (sum, count) = grid
        .iter()
        .zip(values)
        .filter(|(&t, _)| t >= top / 10.0)
        .fold((0.0, 0usize), |(s, c), (_, &v)| (s + v, c + 1));
    sum / count as f64
}

/// Regularity diagnostics for L on a probe grid.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RegularityReport {
    pub family: String,
    pub grid_points: usize,
    pub max_l: f64,
    pub m: f64,
    pub bounded: bool,
    pub c0: f64,
    pub t0: f64,
    pub min_tail_l: f64,
    pub tail_lower_bound: bool,
    pub tail_limit: f64,
    pub tail_limit_positive: bool,
    pub slow_variation_gap: f64,
    pub slowly_varying: bool,
    pub monotone: Option<bool>,
    pub pass: bool,
}

/// Probes L on `grid` against the family's M, c₀, t₀ and its tail limit.
pub fn check_regularity(family: &PriorFamily, grid: &[f64]) -> Result<RegularityReport> {
    if grid.is_empty() {
        return Err(invalid("assumption check needs a non-empty grid"));
    }
    let mut grid: Vec<f64> = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let (lo, hi) = (grid[0], *grid.last().unwrap());
    if !(lo > 0.0) || hi / lo < 1e8 {
        return Err(invalid("assumption check grid must be positive and span at least 8 decades"));
    }
    let values: Vec<f64> = grid.iter().map(|&t| family.l(t)).collect();
    let max_l = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // sup must be attained inside the grid, not still growing at its top
    let prev_decade_max = grid
        .iter()
        .zip(&values)
        .filter(|(&t, _)| t <= hi / 10.0)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let still_growing = values.last().copied().unwrap() > prev_decade_max * (1.0 + 1e-3);
    let bounded = max_l.is_finite() && max_l <= family.m && !still_growing;

    let min_tail_l = grid
        .iter()
        .zip(&values)
        .filter(|(&t, _)| t >= family.t0)
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min);
    let tail_lower_bound = family.c0 > 0.0 && min_tail_l >= family.c0;

    let tail_limit = last_decade_mean(&grid, &values);
    let tail_limit_positive = tail_limit.is_finite() && tail_limit > 1e-12;

    let mut gap: f64 = 0.0;
    for &t in grid.iter().filter(|&&t| t >= hi / 100.0) {
        let base = family.l(t);
        for alpha in [2.0, 10.0] {
            gap = gap.max((family.l(alpha * t) / base - 1.0).abs());
        }
    }
    let slowly_varying = gap.is_finite() && gap < 1e-3;

    let monotone = family
        .l_nondecreasing
        .then(|| values.windows(2).all(|w| w[0] <= w[1]));

    let pass = bounded
        && tail_lower_bound
        && tail_limit_positive
        && slowly_varying
        && monotone.unwrap_or(true);
    Ok(RegularityReport {
        family: family.name.clone(),
        grid_points: grid.len(),
        max_l,
        m: family.m,
        bounded,
        c0: family.c0,
        t0: family.t0,
        min_tail_l,
        tail_lower_bound,
        tail_limit,
        tail_limit_positive,
        slow_variation_gap: gap,
        slowly_varying,
        monotone,
        pass,
    })
}

/// Parameterised instances used when sweeping "the registry" in tests and
/// audits.
pub fn registry_samples() -> Result<Vec<PriorFamily>> {
    Ok(vec![
        PriorFamily::horseshoe(),
        make_family("tpbn", &params(&[("a_shape", 0.5), ("b_shape", 1.0)]))?,
        make_family("tpbn", &params(&[("a_shape", 0.75), ("b_shape", 0.4)]))?,
        make_family("neg", &params(&[("shape", 0.6), ("scale", 2.0)]))?,
        make_family("half-t", &params(&[("nu", 1.5)]))?,
        make_family("inverse-gamma", &params(&[("shape", 0.5), ("scale", 1.0)]))?,
        make_family("gdp", &params(&[("alpha", 1.0)]))?,
        make_family("gdp", &params(&[("alpha", 1.6), ("eta", 0.7)]))?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horseshoe_constants() {
        let h = PriorFamily::horseshoe();
        assert_eq!(h.a, 0.5);
        assert!((h.k - 1.0 / PI).abs() < 1e-16);
        assert!((h.eval_l(1.0).unwrap() - 0.5).abs() < 1e-15);
        for k in 1..=12 {
            let t = 10f64.powi(k);
            assert!((h.l(t) / (t / (1.0 + t)) - 1.0).abs() < 1e-14);
        }
        assert!(h.eval_l(0.0).is_err());
        assert!(h.eval_l(-1.0).is_err());
    }

    #[test]
    fn horseshoe_tail_constants() {
        let h = PriorFamily::horseshoe();
        assert_eq!(h.c0, 0.5);
        assert_eq!(h.m, 1.0);
        assert!(h.t0 >= 1.0 && h.t0 < 1.2);
        assert!(h.l(h.t0) >= h.c0);
    }

    #[test]
    fn half_t_one_is_horseshoe() {
        let ht = make_family("half-t", &params(&[("nu", 1.0)])).unwrap();
        let h = PriorFamily::horseshoe();
        assert!((ht.k / h.k - 1.0).abs() < 1e-14);
        for &t in &[1e-3, 0.7, 5.0, 1e6] {
            assert!((ht.l(t) / h.l(t) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn tpbn_half_half_is_horseshoe() {
        let f = make_family("tpbn", &params(&[("a_shape", 0.5), ("b_shape", 0.5)])).unwrap();
        assert!((f.k * PI - 1.0).abs() < 1e-13);
        assert!((f.l(3.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn gdp_exponent_is_half_alpha() {
        let f = make_family("gdp", &params(&[("alpha", 1.0)])).unwrap();
        assert_eq!(f.a, 0.5);
        let g = make_family("gdp", &params(&[("alpha", 1.4)])).unwrap();
        assert!((g.a - 0.7).abs() < 1e-15);
    }

    #[test]
    fn gdp_table_matches_closed_form_for_alpha_one() {
        // α = 1: F(z) = ∫ w² e^{−w²/2−zw} dw = (1+z²)·R(z) − z, R(z) = √(π/2)·erfcx(z/√2)
        let f = make_family("gdp", &params(&[("alpha", 1.0)])).unwrap();
        let Kernel::Gdp(table) = &f.kernel else { panic!() };
        for &z in &[1e-9, 1e-3, 0.2, 1.0, 3.0, 8.0] {
            let r = (PI / 2.0).sqrt()
                * libm::erfc(z / 2f64.sqrt())
                * (0.5 * z * z).exp();
            let exact = (1.0 + z * z) * r - z;
            let got = table.ln_f(z.ln()).exp();
            assert!((got / exact - 1.0).abs() < 1e-9, "z={z}: {got} vs {exact}");
        }
        // large z: F ~ Γ(3)/z³
        let z: f64 = 1e8;
        assert!((table.ln_f(z.ln()).exp() * z.powi(3) / 2.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn registry_normalizes() {
        for f in registry_samples().unwrap() {
            let norm = f.normalization().unwrap();
            assert!((norm - 1.0).abs() < 1e-8, "{} {:?}: {norm}", f.name, f.params);
        }
    }

    #[test]
    fn registry_slow_variation_and_bounds() {
        for f in registry_samples().unwrap() {
            for &t in &[1e10, 1e11, 1e12] {
                for alpha in [2.0, 10.0] {
                    assert!((f.l(alpha * t) / f.l(t) - 1.0).abs() < 1e-3);
                }
            }
            let rep = check_regularity(&f, &default_grid()).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn unknown_and_bad_params() {
        assert!(matches!(
            make_family("dirichlet-laplace", &FamilyParams::new()),
            Err(ShrinkError::UnknownFamily(_))
        ));
        assert!(make_family("tpbn", &params(&[("a_shape", -1.0), ("b_shape", 1.0)])).is_err());
        assert!(make_family("gdp", &FamilyParams::new()).is_err());
        assert!(make_family("horseshoe", &params(&[("alpha", 1.0)])).is_err());
    }

    #[test]
    fn artificial_families_fail() {
        let unbounded = PriorFamily::custom("linear", 0.5, 1.0, |t| t, true).unwrap();
        let rep = check_regularity(&unbounded, &log_grid(1e-4, 1e12, 200)).unwrap();
        assert!(!rep.bounded && !rep.pass);

        let vanishing = PriorFamily::custom("exp-decay", 0.5, 1.0, |t: f64| (-t).exp(), false).unwrap();
        let rep = check_regularity(&vanishing, &log_grid(1e-4, 1e12, 200)).unwrap();
        assert!(!rep.tail_lower_bound && !rep.pass);
    }

    #[test]
    fn narrow_grid_rejected() {
        let h = PriorFamily::horseshoe();
        assert!(check_regularity(&h, &log_grid(1.0, 1e5, 20)).is_err());
        assert!(check_regularity(&h, &[]).is_err());
    }
}
