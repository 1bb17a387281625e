//! Scenario files (TOML).
//!
//! ```toml
//! [contract]
//! entry_age = 35
//! end_age = 100
//! sum_insured = 250000
//! surrender = { kind = "proportional", k = 0.5 }
//!
//! [pricing]
//! delta = 0.05
//! lapse_rate = 0.06
//! regime = "case2"
//!
//! [experience]
//! lapse_high_risk = "differential"
//! mortality_multiplier = 5
//! sum_multiple = 10
//! initial_proportion = 0.001
//!
//! [run]
//! output_path = "decomposition.csv"
//! ```

use std::path::{Path, PathBuf};

use lapse_core::advsel::{CaseId, LapsingMode};
use lapse_core::DEFAULT_STEP;
use serde::Deserialize;

use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub contract: ContractBlock,
    pub pricing: PricingBlock,
    pub experience: ExperienceBlock,
    #[serde(default)]
    pub run: RunBlock,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractBlock {
    pub entry_age: f64,
    pub end_age: f64,
    pub sum_insured: f64,
    /// Defaults to the sum insured.
    pub maturity: Option<f64>,
    #[serde(default)]
    pub surrender: SurrenderBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SurrenderKind {
    #[default]
    Zero,
    Proportional,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SurrenderBlock {
    pub kind: SurrenderKind,
    pub k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingBlock {
    pub delta: f64,
    pub lapse_rate: f64,
    pub regime: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HighRiskLapse {
    Uniform,
    Differential,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperienceBlock {
    /// Defaults to the pricing lapse rate.
    pub lapse_normal: Option<f64>,
    pub lapse_high_risk: HighRiskLapse,
    pub mortality_multiplier: f64,
    pub sum_multiple: f64,
    pub initial_proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    #[serde(default = "default_step")]
    pub step_h: f64,
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Monte Carlo paths per class for a simulated cross-check; 0 skips it.
    #[serde(default)]
    pub paths: usize,
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

impl Default for RunBlock {
    fn default() -> Self {
        Self {
            step_h: DEFAULT_STEP,
            output_path: None,
            seed: 0,
            paths: 0,
        }
    }
}

fn invariant(ok: bool, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(message()))
    }
}

fn non_negative(name: &str, x: f64) -> Result<()> {
    invariant(x >= 0.0 && x.is_finite(), || format!("{name} must be >= 0, got {x}"))
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.contract;
        non_negative("contract.entry_age", c.entry_age)?;
        invariant(c.end_age > c.entry_age, || {
            format!("contract.end_age ({}) must exceed contract.entry_age ({})", c.end_age, c.entry_age)
        })?;
        invariant(c.sum_insured > 0.0 && c.sum_insured.is_finite(), || {
            format!("contract.sum_insured must be > 0, got {}", c.sum_insured)
        })?;
        non_negative("contract.maturity", self.maturity())?;
        match (c.surrender.kind, c.surrender.k) {
            (SurrenderKind::Zero, Some(_)) => {
                return Err(CliError::Config("contract.surrender.k needs kind = \"proportional\"".into()))
            }
            (SurrenderKind::Proportional, None) => {
                return Err(CliError::Config("contract.surrender.k is required for kind = \"proportional\"".into()))
            }
            (SurrenderKind::Proportional, Some(k)) => {
                invariant((0.0..=1.0).contains(&k), || format!("contract.surrender.k must lie in [0, 1], got {k}"))?
            }
            (SurrenderKind::Zero, None) => {}
        }
        non_negative("pricing.delta", self.pricing.delta)?;
        non_negative("pricing.lapse_rate", self.pricing.lapse_rate)?;
        self.case()?;
        let e = &self.experience;
        non_negative("experience.lapse_normal", self.normal_lapse())?;
        invariant(e.mortality_multiplier >= 1.0, || {
            format!("experience.mortality_multiplier must be >= 1, got {}", e.mortality_multiplier)
        })?;
        invariant(e.sum_multiple >= 1.0, || {
            format!("experience.sum_multiple must be >= 1, got {}", e.sum_multiple)
        })?;
        invariant((0.0..=1.0).contains(&e.initial_proportion), || {
            format!("experience.initial_proportion must lie in [0, 1], got {}", e.initial_proportion)
        })?;
        invariant(self.run.step_h > 0.0 && self.run.step_h <= 1.0, || {
            format!("run.step_h must lie in (0, 1], got {}", self.run.step_h)
        })?;
        let steps = (c.end_age - c.entry_age) / self.run.step_h;
        invariant((steps - steps.round()).abs() < 1e-9 * steps.max(1.0), || {
            format!("run.step_h ({}) must divide the term ({})", self.run.step_h, c.end_age - c.entry_age)
        })
    }

    pub fn case(&self) -> Result<CaseId> {
        CaseId::parse(&self.pricing.regime).ok_or_else(|| {
            let labels: Vec<&str> = CaseId::ALL.iter().map(|c| c.label()).collect();
            CliError::Config(format!("pricing.regime must be one of {labels:?}, got {:?}", self.pricing.regime))
        })
    }

    pub fn maturity(&self) -> f64 {
        self.contract.maturity.unwrap_or(self.contract.sum_insured)
    }

    pub fn surrender_proportion(&self) -> f64 {
        self.contract.surrender.k.unwrap_or(0.0)
    }

    pub fn normal_lapse(&self) -> f64 {
        self.experience.lapse_normal.unwrap_or(self.pricing.lapse_rate)
    }

    pub fn mode(&self) -> LapsingMode {
        match self.experience.lapse_high_risk {
            HighRiskLapse::Uniform => LapsingMode::Uniform,
            HighRiskLapse::Differential => LapsingMode::Differential,
        }
    }
}
