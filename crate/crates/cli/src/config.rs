//! Flat key-value experiment configs: `key = value` lines, `#` comments.
//! Every key must be consumed by the experiment that loads the file; unknown
//! keys are an error, so typos fail loudly instead of silently running with
//! defaults.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Default, Clone)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn empty() -> Self {
        RawConfig::default()
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::parse(origin, lineno + 1, "expected `key = value`"));
            };
            let key = key.trim().to_string();
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::parse(origin, lineno + 1, format!("duplicate key `{key}`")));
            }
        }
        Ok(RawConfig { entries })
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn take_f64(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.entries.remove(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|_| CliError::Config(format!("key `{key}`: `{raw}` is not a number"))),
        }
    }

    pub fn take_u64(&mut self, key: &str, default: u64) -> Result<u64, CliError> {
        match self.entries.remove(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|_| CliError::Config(format!("key `{key}`: `{raw}` is not an integer"))),
        }
    }

    pub fn take_usize(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        Ok(self.take_u64(key, default as u64)? as usize)
    }

    /// All keys must have been consumed by now.
    pub fn finish(self) -> Result<(), CliError> {
        if let Some(key) = self.entries.keys().next() {
            return Err(CliError::Config(format!("unknown key `{key}`")));
        }
        Ok(())
    }
}

/// Optimizer settings shared by every experiment. `tol_rel` scales the
/// window-convergence tolerance by the magnitude of the initial loss.
#[derive(Debug, Clone, Copy)]
pub struct OptimConfig {
    pub seed: u64,
    pub max_steps: u64,
    pub window: usize,
    pub tol_rel: f64,
    pub rate_a: f64,
    pub rate_b: f64,
    pub noise_std: f64,
}

impl OptimConfig {
    pub fn take(
        raw: &mut RawConfig,
        seed: u64,
        max_steps: u64,
        window: usize,
        rate_a: f64,
        rate_b: f64,
        tol_rel: f64,
    ) -> Result<Self, CliError> {
        let cfg = OptimConfig {
            seed: raw.take_u64("seed", seed)?,
            max_steps: raw.take_u64("steps", max_steps)?,
            window: raw.take_usize("window", window)?,
            tol_rel: raw.take_f64("tol_rel", tol_rel)?,
            rate_a: raw.take_f64("rate_a", rate_a)?,
            rate_b: raw.take_f64("rate_b", rate_b)?,
            noise_std: raw.take_f64("noise_std", 0.0)?,
        };
        if cfg.max_steps == 0 {
            return Err(CliError::Config("steps must be positive".into()));
        }
        Ok(cfg)
    }

    pub fn schedule(&self) -> persopt_core::Schedule {
        persopt_core::Schedule::InverseTime {
            a: self.rate_a,
            b: self.rate_b,
        }
    }

    pub fn noise(&self) -> persopt_core::NoiseModel {
        if self.noise_std > 0.0 {
            persopt_core::NoiseModel::Gaussian {
                stddev: self.noise_std,
            }
        } else {
            persopt_core::NoiseModel::None
        }
    }

    /// Window tolerance anchored at the initial loss magnitude.
    pub fn stop_rule(&self, initial_loss: f64) -> persopt_core::StopRule {
        persopt_core::StopRule {
            max_steps: self.max_steps,
            loss_window: self.window,
            tol: (self.tol_rel * initial_loss.abs()).max(1e-12),
        }
    }
}
