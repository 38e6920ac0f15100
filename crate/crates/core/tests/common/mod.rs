//! Test-side reference integrals, independent of the library's quadrature.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shrinkage_core::family::{registry_samples, PriorFamily};
use std::path::PathBuf;

/// Composite Simpson intervals (even) for the reference rule.
pub const SIMPSON_INTERVALS: usize = 10_000_000;
pub const V_HALF_WIDTH: f64 = 400.0;

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

fn log1pexp(y: f64) -> f64 {
    if y > 35.0 {
        y + (-y).exp()
    } else if y < -35.0 {
        y.exp()
    } else {
        y.exp().ln_1p()
    }
}

/// Streaming Σ e^{l_i}·w_i with a running maximum.
#[derive(Clone, Copy)]
struct LogSum<const N: usize> {
    max: f64,
    sums: [f64; N],
}

impl<const N: usize> LogSum<N> {
    fn new() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            sums: [0.0; N],
        }
    }

    fn add(&mut self, l: f64, w: [f64; N]) {
        if l == f64::NEG_INFINITY {
            return;
        }
        if l > self.max {
            let r = (self.max - l).exp();
            for s in &mut self.sums {
                *s *= r;
            }
            self.max = l;
        }
        let e = (l - self.max).exp();
        for (s, wi) in self.sums.iter_mut().zip(w) {
            *s += e * wi;
        }
    }

    fn merge(a: Self, b: Self) -> Self {
        let m = a.max.max(b.max);
        let mut out = LogSum { max: m, sums: [0.0; N] };
        for j in 0..N {
            out.sums[j] = a.sums[j] * (a.max - m).exp() + b.sums[j] * (b.max - m).exp();
        }
        out
    }
}

/// Posterior functionals from the reference rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValues {
    pub e_kappa: f64,
    pub e_kappa_sq: f64,
    pub e_one_minus_kappa: f64,
    /// Pr(κ > 1/2 | x, τ)
    pub tail_half: f64,
}

/// Simpson's rule in v = ½·log(κ/(1−κ)) over [−400, 400].
///
/// The two halves meet at κ = ½, so Pr(κ > ½) is a ratio of half-range sums.
pub fn simpson_oracle(family: &PriorFamily, x: f64, tau: f64, intervals: usize) -> OracleValues {
    assert!(intervals % 4 == 0);
    let a = family.a;
    let ln_tau2 = 2.0 * tau.ln();
    let half_x2 = 0.5 * x * x;
    let h = 2.0 * V_HALF_WIDTH / intervals as f64;
    let half = intervals / 2;
    let term = |i: usize| -> (f64, [f64; 4]) {
        let v = -V_HALF_WIDTH + h * i as f64;
        let ln_k = -log1pexp(-2.0 * v);
        let ln_c = -log1pexp(2.0 * v);
        let k = ln_k.exp();
        let ln_t = ln_c - ln_k - ln_tau2;
        // dκ/dv = 2κ(1−κ)
        let l = std::f64::consts::LN_2 + ln_k + ln_c + (a - 0.5) * ln_k - (a + 1.0) * ln_c
            + family.ln_l(ln_t)
            - k * half_x2;
        (l, [1.0, k, k * k, ln_c.exp()])
    };
    let simpson = |from: usize, to: usize| {
        let mut acc = LogSum::<4>::new();
        for i in from..=to {
            let c = if i == from || i == to {
                1.0
            } else if (i - from) % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let (l, w) = term(i);
            acc.add(l + f64::ln(c), w);
        }
        acc
    };
    let left = simpson(0, half);
    let right = simpson(half, intervals);
    let total = LogSum::merge(left, right);
    let z = total.sums[0];
    let right_share = right.sums[0] * (right.max - total.max).exp();
    OracleValues {
        e_kappa: total.sums[1] / z,
        e_kappa_sq: total.sums[2] / z,
        e_one_minus_kappa: total.sums[3] / z,
        tail_half: right_share / z,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleTuple {
    pub family_index: usize,
    pub x: f64,
    pub tau: f64,
}

/// 200 randomized (family, x, τ) with x ∈ [−20, 20] and log-uniform τ ∈ [1e-6, 0.9].
pub fn oracle_tuples() -> Vec<OracleTuple> {
    let n_fam = registry_samples().unwrap().len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
    (0..200)
        .map(|_| {
            let family_index = rng.random_range(0..n_fam);
            let x = rng.random_range(-20.0..=20.0);
            let tau = (rng.random_range(1e-6f64.ln()..0.9f64.ln())).exp();
            OracleTuple { family_index, x, tau }
        })
        .collect()
}

/// Named horseshoe reference points.
pub fn named_points() -> Vec<(&'static str, f64, f64)> {
    vec![
        ("horseshoe_x2_tau0.1", 2.0, 0.1),
        ("horseshoe_x0_tau0.1", 0.0, 0.1),
        ("horseshoe_x1_tau0.2", 1.0, 0.2),
        ("horseshoe_x10_tau0.1", 10.0, 0.1),
        ("horseshoe_x20_tau0.1", 20.0, 0.1),
    ]
}

#[derive(Debug, Clone)]
pub struct GoldenRow {
    pub label: String,
    pub family_index: usize,
    pub x: f64,
    pub tau: f64,
    pub values: OracleValues,
}

pub const GOLDEN_FILE: &str = "oracle_kappa.csv";

pub fn read_golden() -> Vec<GoldenRow> {
    let path = golden_dir().join(GOLDEN_FILE);
    let mut r = csv::Reader::from_path(&path)
        .unwrap_or_else(|e| panic!("missing golden file {}: {e}", path.display()));
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            let f = |i: usize| rec[i].parse::<f64>().unwrap();
            GoldenRow {
                label: rec[0].to_string(),
                family_index: rec[1].parse().unwrap(),
                x: f(2),
                tau: f(3),
                values: OracleValues {
                    e_kappa: f(4),
                    e_kappa_sq: f(5),
                    e_one_minus_kappa: f(6),
                    tail_half: f(7),
                },
            }
        })
        .collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// "name(k=v,…)" label that tells registry entries apart.
pub fn family_label(f: &PriorFamily) -> String {
    let p: Vec<String> = f.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{}({})", f.name, p.join(","))
}
