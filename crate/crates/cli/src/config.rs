use serde::{Deserialize, Serialize};
use shrinkage_core::experiments::{MnRule, QRule, TauRule};
use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

/// Environment variable that overrides `run.root_seed`.
pub const SEED_ENV: &str = "SHRINK_SEED";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub run: RunSection,
    pub family: FamilySection,
    pub sweep: SweepSection,
    pub abos: AbosSection,
    pub eb: EbSection,
    pub model: ModelSection,
    pub bounds: BoundsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub root_seed: u64,
    pub workers: Option<usize>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            root_seed: 42,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilySection {
    pub name: String,
    pub params: BTreeMap<String, f64>,
}

impl Default for FamilySection {
    fn default() -> Self {
        FamilySection {
            name: "horseshoe".into(),
            params: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub n: Vec<u64>,
    pub q: QRule,
    pub tau: TauRule,
    pub magnitude: Option<f64>,
    pub replications: usize,
    pub posterior_draws: usize,
    pub m_n: MnRule,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            n: vec![2000, 8000, 32000],
            q: QRule::Power { gamma: 0.4 },
            tau: TauRule::SqrtLog,
            magnitude: None,
            replications: 20,
            posterior_draws: 1000,
            m_n: MnRule::LogN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbosSection {
    pub c: f64,
    pub beta: f64,
    pub n: Vec<u64>,
    pub alpha: f64,
    pub tau_scale: f64,
}

impl Default for AbosSection {
    fn default() -> Self {
        AbosSection {
            c: 1.0,
            beta: 0.6,
            n: (2..=8).map(|e| 10u64.pow(e)).collect(),
            alpha: 1.0,
            tau_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EbSection {
    pub c: f64,
    pub beta: f64,
    pub n: Vec<u64>,
    pub datasets: usize,
    pub c1: f64,
    pub c2: f64,
}

impl Default for EbSection {
    fn default() -> Self {
        EbSection {
            c: 1.0,
            beta: 0.6,
            n: vec![1_000, 10_000, 100_000],
            datasets: 200,
            c1: 2.0,
            c2: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub p: f64,
    pub psi_sq: f64,
    pub n: u64,
    pub c: Option<f64>,
    pub tau: Vec<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            p: 0.01,
            psi_sq: 100.0,
            n: 1000,
            c: None,
            tau: vec![0.1, 0.01, 0.001],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsSection {
    pub eta: f64,
    pub delta: f64,
    pub zeta: Option<f64>,
    pub rho: Option<f64>,
    pub slack: f64,
    pub tau: Vec<f64>,
    pub points: usize,
}

impl Default for BoundsSection {
    fn default() -> Self {
        BoundsSection {
            eta: 5.0 / 6.0,
            delta: 0.2,
            zeta: None,
            rho: None,
            slack: 1.0,
            tau: (1..=6).map(|e| 10f64.powi(-e)).collect(),
            points: 200,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Input(format!("invalid config {}: {}", path.display(), e.message())))
    }

    /// Applies `SHRINK_SEED` when set.
    pub fn apply_env(&mut self) -> Result<(), CliError> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.run.root_seed = v
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("{SEED_ENV} must be an unsigned integer, got `{v}`")))?;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        if self.run.root_seed > i64::MAX as u64 {
            return Err(CliError::Input(format!(
                "root seed {} does not fit a config integer (max {})",
                self.run.root_seed,
                i64::MAX
            )));
        }
        toml::to_string(self).map_err(|e| CliError::Input(format!("cannot serialize config: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = Config::default();
        let text = c.to_toml().unwrap();
        let back: Config = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn sections_parse() {
        let c: Config = toml::from_str(
            r#"
            [run]
            root_seed = 7
            [family]
            name = "tpbn"
            params = { a_shape = 0.5, b_shape = 0.5 }
            [sweep]
            n = [500]
            q = { kind = "fixed", q = 5 }
            tau = { kind = "power", alpha = 1.0 }
            m_n = "n"
            "#,
        )
        .unwrap();
        assert_eq!(c.run.root_seed, 7);
        assert_eq!(c.sweep.q, QRule::Fixed { q: 5 });
        assert_eq!(c.sweep.m_n, MnRule::N);
        assert!(toml::from_str::<Config>("[run]\nseed = 1\n").is_err());
    }
}
