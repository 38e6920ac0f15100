use crate::error::{invalid, Result};
use crate::family::PriorFamily;
use crate::posterior::{kappa_moments, KappaMoments, PosteriorQuery};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const TABLE_NODES: usize = 2048;
pub const TABLE_X_MAX: f64 = 40.0;
/// Interpolation error allowed against direct quadrature.
pub const TABLE_TOL: f64 = 1e-6;

/// Cubic Hermite tables of E(1−κ|x,τ) and Var(κ|x,τ) over |x| ≤ 40.
///
/// Node slopes are exact: d/dx E(1−κ) = x·Var(κ) and d/dx Var(κ) = −x·μ₃(κ).
/// Larger |x| falls back to direct quadrature.
#[derive(Debug, Clone)]
pub struct ShrinkageTable {
    pub tau: f64,
    family: PriorFamily,
    step: f64,
    w: Vec<f64>,
    dw: Vec<f64>,
    vk: Vec<f64>,
    dvk: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateMoments {
    /// E(1−κ|x,τ)
    pub w: f64,
    /// Var(κ|x,τ)
    pub var_kappa: f64,
}

impl CoordinateMoments {
    fn from_moments(m: &KappaMoments) -> Self {
        CoordinateMoments {
            w: m.c[0],
            var_kappa: m.var(),
        }
    }
}

fn hermite(y0: f64, y1: f64, d0: f64, d1: f64, h: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

impl ShrinkageTable {
    pub fn build(tau: f64, family: &PriorFamily) -> Result<Self> {
        let step = TABLE_X_MAX / (TABLE_NODES - 1) as f64;
        let nodes: Vec<(f64, f64, f64, f64)> = (0..TABLE_NODES)
            .into_par_iter()
            .map(|i| {
                let x = step * i as f64;
                let m = kappa_moments(&PosteriorQuery::new(x, tau, family))?;
                let var = m.var();
                Ok((m.c[0], x * var, var, -x * m.third_central()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ShrinkageTable {
            tau,
            family: family.clone(),
            step,
            w: nodes.iter().map(|n| n.0).collect(),
            dw: nodes.iter().map(|n| n.1).collect(),
            vk: nodes.iter().map(|n| n.2).collect(),
            dvk: nodes.iter().map(|n| n.3).collect(),
        })
    }

    pub fn family(&self) -> &PriorFamily {
        &self.family
    }

    pub fn moments(&self, x: f64) -> Result<CoordinateMoments> {
        let ax = x.abs();
        if !ax.is_finite() {
            return Err(invalid(format!("observation must be finite, got {x}")));
        }
        if ax >= TABLE_X_MAX {
            let m = kappa_moments(&PosteriorQuery::new(ax, self.tau, &self.family))?;
            return Ok(CoordinateMoments::from_moments(&m));
        }
        let pos = ax / self.step;
        let i = (pos.floor() as usize).min(TABLE_NODES - 2);
        let t = pos - i as f64;
        let h = self.step;
        Ok(CoordinateMoments {
            w: hermite(self.w[i], self.w[i + 1], self.dw[i], self.dw[i + 1], h, t).clamp(0.0, 1.0),
            var_kappa: hermite(self.vk[i], self.vk[i + 1], self.dvk[i], self.dvk[i + 1], h, t).max(0.0),
        })
    }

    /// T_τ(x) = E(1−κ|x,τ)·x.
    pub fn mean(&self, x: f64) -> Result<f64> {
        Ok(self.moments(x)?.w * x)
    }

    /// Var(θ|x) = E(1−κ) + x²·Var(κ).
    pub fn variance(&self, x: f64) -> Result<f64> {
        let m = self.moments(x)?;
        Ok(m.w + x * x * m.var_kappa)
    }

    /// Largest absolute interpolation error over `points` random |x| in the table range.
    pub fn max_error(&self, points: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<f64> = (0..points).map(|_| rng.random::<f64>() * TABLE_X_MAX).collect();
        let errs = xs
            .par_iter()
            .map(|&x| {
                let m = kappa_moments(&PosteriorQuery::new(x, self.tau, &self.family))?;
                let direct = CoordinateMoments::from_moments(&m);
                let t = self.moments(x)?;
                Ok((t.w - direct.w).abs().max((t.var_kappa - direct.var_kappa).abs()))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(errs.into_iter().fold(0.0, f64::max))
    }

    /// Builds the table and checks it on 100 random points.
    pub fn build_validated(tau: f64, family: &PriorFamily, seed: u64) -> Result<Self> {
        let t = Self::build(tau, family)?;
        let err = t.max_error(100, seed)?;
        if err > TABLE_TOL {
            return Err(crate::error::ShrinkError::Interpolation {
                max_error: err,
                tolerance: TABLE_TOL,
            });
        }
        Ok(t)
    }
}
