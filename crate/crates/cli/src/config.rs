use std::path::PathBuf;

use crate::CliError;

/// Tuning shared by `decompose` and `sweep`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    pub max_epsilon: f64,
    pub step: f64,
    pub min_samples: usize,
    pub stopwords: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: 0.5,
            max_epsilon: 0.7,
            step: 0.05,
            min_samples: 2,
            stopwords: None,
        }
    }
}

fn unit(name: &str, v: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--{name} must be within [0, 1], got {v}"
        )))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        unit("alpha", self.alpha)?;
        unit("max-epsilon", self.max_epsilon)?;
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(CliError::Usage(format!(
                "--step must be positive, got {}",
                self.step
            )));
        }
        if self.min_samples == 0 {
            return Err(CliError::Usage("--min-samples must be at least 1".into()));
        }
        Ok(())
    }
}
