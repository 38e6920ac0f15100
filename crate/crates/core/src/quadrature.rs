//! Globally adaptive Gauss–Kronrod (7/15) quadrature with log-scaled panels.
//!
//! Integrands are supplied in factored form: each node returns a shared
//! log-magnitude `ln_base` and a vector of `N` non-negative multipliers, so a
//! single panel set integrates several weighted versions of one density at
//! once. Every panel stores its own log scale; totals are assembled in a
//! common scale, which keeps values like e^{−x²/2} with |x| ≳ 40 from
//! underflowing.
//!
//! The double-exponential map used for unit-interval integrals is
//!
//! ```text
//! v = (π/2)·sinh(s),   κ = 1/(1 + e^{−2v}),   dκ/ds = π·cosh(s)·κ(1−κ)
//! ```
//!
//! with ln κ and ln(1−κ) formed directly so that neither endpoint loses
//! precision.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Half-width of the s-interval used for the unit-interval map.
pub const DE_HALF_WIDTH: f64 = 8.0;
/// Half-width of the s-interval used for whole-line integrals.
pub const LINE_HALF_WIDTH: f64 = 7.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub max_panels: usize,
    pub initial_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-10,
            max_panels: 10_000,
            initial_panels: 128,
        }
    }
}

/// Integrand value at one node: component j equals e^{ln_base}·weights[j].
#[derive(Debug, Clone, Copy)]
pub struct Sample<const N: usize> {
    pub ln_base: f64,
    pub weights: [f64; N],
}

#[derive(Debug, Clone)]
pub struct Panel<const N: usize> {
    pub a: f64,
    pub b: f64,
    pub segment: usize,
    pub ln_scale: f64,
    pub kronrod: [f64; N],
    pub error: [f64; N],
}

/// Converged (or partial) result. Component j of the integral is
/// e^{ln_scale}·totals[j].
#[derive(Debug, Clone)]
pub struct Quadrature<const N: usize> {
    pub ln_scale: f64,
    pub totals: [f64; N],
    pub errors: [f64; N],
    pub segments: Vec<[f64; N]>,
    pub panels: Vec<Panel<N>>,
    pub evaluations: usize,
}

impl<const N: usize> Quadrature<N> {
    pub fn ln_total(&self, j: usize) -> f64 {
        self.ln_scale + self.totals[j].ln()
    }

    pub fn ratio(&self, num: usize, den: usize) -> f64 {
        self.totals[num] / self.totals[den]
    }
}

#[derive(Debug, Clone)]
pub struct QuadFailure<const N: usize> {
    pub partial: Quadrature<N>,
}

#[derive(PartialEq)]
struct Key {
    priority: f64,
    index: usize,
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.index.cmp(&self.index))
    }
}

fn eval_panel<const N: usize, F>(f: &F, a: f64, b: f64, segment: usize) -> Panel<N>
where
    F: Fn(f64) -> Sample<N>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut samples = [Sample {
        ln_base: f64::NEG_INFINITY,
        weights: [0.0; N],
    }; 15];
    for i in 0..7 {
        samples[2 * i] = f(c - h * XGK[i]);
        samples[2 * i + 1] = f(c + h * XGK[i]);
    }
    samples[14] = f(c);

    let ln_ref = samples
        .iter()
        .map(|s| s.ln_base)
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !ln_ref.is_finite() {
        return Panel {
            a,
            b,
            segment,
            ln_scale: f64::NEG_INFINITY,
            kronrod: [0.0; N],
            error: [0.0; N],
        };
    }

    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let mut resabs = [0.0; N];
    for (idx, s) in samples.iter().enumerate() {
        let base = if s.ln_base.is_finite() {
            (s.ln_base - ln_ref).exp()
        } else {
            0.0
        };
        let (wk, wg) = if idx == 14 {
            (WGK[7], WG[3])
        } else {
            let node = idx / 2;
            let wg = if node % 2 == 1 { WG[node / 2] } else { 0.0 };
            (WGK[node], wg)
        };
        for j in 0..N {
            let v = base * s.weights[j];
            kron[j] += wk * v;
            gauss[j] += wg * v;
            resabs[j] += wk * v.abs();
        }
    }
    let mut error = [0.0; N];
    for j in 0..N {
        kron[j] *= h;
        gauss[j] *= h;
        resabs[j] *= h;
        error[j] = (kron[j] - gauss[j]).abs().max(50.0 * f64::EPSILON * resabs[j]);
    }
    Panel {
        a,
        b,
        segment,
        ln_scale: ln_ref,
        kronrod: kron,
        error,
    }
}

fn scaled(ln_scale: f64, common: f64) -> f64 {
    if ln_scale.is_finite() {
        (ln_scale - common).exp()
    } else {
        0.0
    }
}

fn sums<const N: usize>(panels: &[Panel<N>], common: f64) -> ([f64; N], [f64; N]) {
    let mut tot = [0.0; N];
    let mut err = [0.0; N];
    for p in panels {
        let w = scaled(p.ln_scale, common);
        if w == 0.0 {
            continue;
        }
        for j in 0..N {
            tot[j] += w * p.kronrod[j];
            err[j] += w * p.error[j];
        }
    }
    (tot, err)
}

fn converged<const N: usize>(tot: &[f64; N], err: &[f64; N], rel_tol: f64) -> bool {
    (0..N).all(|j| err[j] <= rel_tol * tot[j].abs())
}

fn priority<const N: usize>(p: &Panel<N>, ln_totals: &[f64; N]) -> f64 {
    if !p.ln_scale.is_finite() {
        return f64::NEG_INFINITY;
    }
    (0..N)
        .filter(|&j| p.error[j] > 0.0)
        .map(|j| {
            let lt = if ln_totals[j].is_finite() {
                ln_totals[j]
            } else {
                p.ln_scale + p.error[j].ln()
            };
            p.ln_scale + p.error[j].ln() - lt
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Adaptive integration of a vector integrand over [a, b].
///
/// `breaks` are interior points that panels never straddle; the result
/// reports per-segment totals between consecutive breaks.
pub fn integrate<const N: usize, F>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Result<Quadrature<N>, QuadFailure<N>>
where
    F: Fn(f64) -> Sample<N>,
{
    assert!(b > a, "integration interval must be non-empty");
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let n_segments = cuts.len() + 1;

    let init = opts.initial_panels.max(1);
    let mut grid: Vec<f64> = (0..=init)
        .map(|i| a + (b - a) * i as f64 / init as f64)
        .collect();
    grid.extend(cuts.iter().copied());
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (b - a));

    let segment_of = |left: f64| cuts.iter().filter(|&&c| c <= left).count();

    let mut panels: Vec<Panel<N>> = grid
        .windows(2)
        .map(|w| eval_panel(&f, w[0], w[1], segment_of(w[0])))
        .collect();
    let mut evaluations = 15 * panels.len();

    let mut common = panels
        .iter()
        .map(|p| p.ln_scale)
        .fold(f64::NEG_INFINITY, f64::max);
    let (mut tot, mut err) = sums(&panels, common);
    let ln_tot = |tot: &[f64; N], common: f64| {
        let mut out = [f64::NEG_INFINITY; N];
        for j in 0..N {
            out[j] = common + tot[j].abs().ln();
        }
        out
    };

    let mut heap = BinaryHeap::new();
    {
        let lt = ln_tot(&tot, common);
        for (i, p) in panels.iter().enumerate() {
            heap.push(Key {
                priority: priority(p, &lt),
                index: i,
            });
        }
    }

    let mut ok = common.is_infinite() || converged(&tot, &err, opts.rel_tol);
    while !ok && panels.len() < opts.max_panels {
        let Some(top) = heap.pop() else { break };
        if top.priority == f64::NEG_INFINITY {
            break;
        }
        let parent = panels[top.index].clone();
        let mid = 0.5 * (parent.a + parent.b);
        let left = eval_panel(&f, parent.a, mid, parent.segment);
        let right = eval_panel(&f, mid, parent.b, parent.segment);
        evaluations += 30;

        let new_max = left.ln_scale.max(right.ln_scale);
        if new_max > common {
            let w = scaled(common, new_max);
            for j in 0..N {
                tot[j] *= w;
                err[j] *= w;
            }
            common = new_max;
        }
        let wp = scaled(parent.ln_scale, common);
        let wl = scaled(left.ln_scale, common);
        let wr = scaled(right.ln_scale, common);
        for j in 0..N {
            tot[j] += wl * left.kronrod[j] + wr * right.kronrod[j] - wp * parent.kronrod[j];
            err[j] += wl * left.error[j] + wr * right.error[j] - wp * parent.error[j];
            if err[j] < 0.0 {
                err[j] = 0.0;
            }
        }

        panels[top.index] = left;
        panels.push(right);
        let lt = ln_tot(&tot, common);
        heap.push(Key {
            priority: priority(&panels[top.index], &lt),
            index: top.index,
        });
        heap.push(Key {
            priority: priority(&panels[panels.len() - 1], &lt),
            index: panels.len() - 1,
        });

        if converged(&tot, &err, opts.rel_tol) {
            // confirm against a fresh summation to shed accumulated roundoff
            let (t2, e2) = sums(&panels, common);
            tot = t2;
            err = e2;
            ok = converged(&tot, &err, opts.rel_tol);
        }
    }

    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let (tot, err) = sums(&panels, common);
    let mut segments = vec![[0.0; N]; n_segments];
    for p in &panels {
        let w = scaled(p.ln_scale, common);
        for j in 0..N {
            segments[p.segment][j] += w * p.kronrod[j];
        }
    }
    let ok = common.is_infinite() || converged(&tot, &err, opts.rel_tol);
    let result = Quadrature {
        ln_scale: common,
        totals: tot,
        errors: err,
        segments,
        panels,
        evaluations,
    };
    if ok {
        Ok(result)
    } else {
        Err(QuadFailure { partial: result })
    }
}

/// A node of the double-exponential map onto (0,1).
#[derive(Debug, Clone, Copy)]
pub struct UnitPoint {
    /// ln(dκ/ds)
    pub ln_jac: f64,
    pub ln_k: f64,
    pub ln_1mk: f64,
    pub k: f64,
    pub one_minus_k: f64,
}

/// ln(1 + e^{y}) without overflow.
pub fn softplus(y: f64) -> f64 {
    if y > 0.0 {
        y + (-y).exp().ln_1p()
    } else {
        y.exp().ln_1p()
    }
}

pub fn unit_point(s: f64) -> UnitPoint {
    let v = FRAC_PI_2 * s.sinh();
    let ln_k = -softplus(-2.0 * v);
    let ln_1mk = -softplus(2.0 * v);
    UnitPoint {
        ln_jac: PI.ln() + s.cosh().ln() + ln_k + ln_1mk,
        ln_k,
        ln_1mk,
        k: ln_k.exp(),
        one_minus_k: ln_1mk.exp(),
    }
}

/// Inverse of the unit map: the s with κ(s) = kappa.
pub fn unit_point_inverse(kappa: f64) -> f64 {
    let v = 0.5 * (kappa.ln() - (-kappa).ln_1p());
    (v / FRAC_PI_2).asinh()
}

/// ∫ over the real line of e^{ln_f(y)}·weights, using y = centre + sinh(s).
pub fn integrate_line<const N: usize, F>(
    centre: f64,
    f: F,
    opts: &QuadOptions,
) -> Result<Quadrature<N>, QuadFailure<N>>
where
    F: Fn(f64) -> Sample<N>,
{
    let g = |s: f64| {
        let mut out = f(centre + s.sinh());
        out.ln_base += s.cosh().ln();
        out
    };
    integrate(g, -LINE_HALF_WIDTH, LINE_HALF_WIDTH, &[], opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact_on_one_panel() {
        let opts = QuadOptions {
            initial_panels: 1,
            ..Default::default()
        };
        let q = integrate(
            |x: f64| Sample {
                ln_base: 0.0,
                weights: [x.powi(6), 1.0],
            },
            0.0,
            2.0,
            &[],
            &opts,
        )
        .unwrap();
        assert!((q.totals[0] - 128.0 / 7.0).abs() < 1e-12);
        assert!((q.totals[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn unit_map_beta_integral() {
        // ∫₀¹ κ^{-1/2}(1−κ)^{-1/2} dκ = π
        let q = integrate(
            |s| {
                let p = unit_point(s);
                Sample {
                    ln_base: p.ln_jac - 0.5 * p.ln_k - 0.5 * p.ln_1mk,
                    weights: [1.0],
                }
            },
            -DE_HALF_WIDTH,
            DE_HALF_WIDTH,
            &[],
            &QuadOptions::default(),
        )
        .unwrap();
        assert!((q.ln_total(0).exp() / PI - 1.0).abs() < 1e-12);
    }

    #[test]
    fn segments_split_mass() {
        let split = unit_point_inverse(0.25);
        let q = integrate(
            |s| {
                let p = unit_point(s);
                Sample {
                    ln_base: p.ln_jac,
                    weights: [1.0],
                }
            },
            -DE_HALF_WIDTH,
            DE_HALF_WIDTH,
            &[split],
            &QuadOptions::default(),
        )
        .unwrap();
        let total = q.totals[0];
        assert!((q.segments[0][0] / total - 0.25).abs() < 1e-12);
        assert!((q.segments[1][0] / total - 0.75).abs() < 1e-12);
    }

    #[test]
    fn huge_log_offsets_survive() {
        // e^{-2000}·√(2π) from a Gaussian on the line
        let q = integrate_line(
            3.0,
            |y: f64| Sample {
                ln_base: -2000.0 - 0.5 * (y - 3.0) * (y - 3.0),
                weights: [1.0],
            },
            &QuadOptions::default(),
        )
        .unwrap();
        let expect = -2000.0 + 0.5 * (2.0 * PI).ln();
        assert!((q.ln_total(0) - expect).abs() < 1e-11);
    }

    #[test]
    fn inverse_map_round_trip() {
        for &k in &[1e-200, 1e-9, 0.3, 0.5, 0.999] {
            let p = unit_point(unit_point_inverse(k));
            assert!((p.k / k - 1.0).abs() < 1e-12);
        }
    }
}
