use std::path::PathBuf;

use clap::ValueEnum;
use dynzsig_core::divisibility::FactorBudget;
use dynzsig_core::heights::HeightOptions;
use dynzsig_core::zsigmondy::SequenceOptions;
use serde_json::{json, Value};
use thiserror::Error;

use crate::report::real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "text",
        }
    }
}

/// Settings shared by every subcommand.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub trial_bound: u64,
    pub rho_budget: u64,
    pub digit_budget: u64,
    pub tol: f64,
    pub seed: u64,
    pub cache: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("tolerance must lie in (0, 1), got {0}")]
    Tolerance(f64),
}

impl Default for RunConfig {
    fn default() -> Self {
        let b = FactorBudget::default();
        RunConfig {
            trial_bound: b.trial_bound,
            rho_budget: b.rho_iterations,
            digit_budget: SequenceOptions::default().digit_budget,
            tol: 1e-6,
            seed: b.seed,
            cache: None,
            format: Format::Json,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trial_bound == 0 {
            return Err(ConfigError::NotPositive("trial bound"));
        }
        if self.rho_budget == 0 {
            return Err(ConfigError::NotPositive("rho budget"));
        }
        if self.digit_budget == 0 {
            return Err(ConfigError::NotPositive("digit budget"));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(ConfigError::Tolerance(self.tol));
        }
        Ok(())
    }

    pub fn factor_budget(&self) -> FactorBudget {
        FactorBudget {
            trial_bound: self.trial_bound,
            rho_iterations: self.rho_budget,
            seed: self.seed,
            ..FactorBudget::default()
        }
    }

    pub fn sequence_options(&self) -> SequenceOptions {
        SequenceOptions {
            digit_budget: self.digit_budget,
        }
    }

    pub fn height_options(&self) -> HeightOptions {
        HeightOptions {
            digit_budget: self.digit_budget,
            bound: None,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "trial_bound": self.trial_bound.to_string(),
            "rho_budget": self.rho_budget.to_string(),
            "digit_budget": self.digit_budget.to_string(),
            "tol": real(self.tol),
            "seed": self.seed.to_string(),
            "cache": self.cache.as_ref().map(|p| p.display().to_string()),
            "format": self.format.name(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert_eq!(RunConfig::default().validate(), Ok(()));
        let c = RunConfig {
            tol: 1.0,
            ..RunConfig::default()
        };
        assert_eq!(c.validate(), Err(ConfigError::Tolerance(1.0)));
        let c = RunConfig {
            rho_budget: 0,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        let c = RunConfig {
            seed: 0,
            ..RunConfig::default()
        };
        assert_eq!(c.factor_budget().seed, 0);
    }
}
