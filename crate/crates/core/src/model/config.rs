use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Fully connected backbone on a downsampled grayscale square.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackboneConfig {
    /// Side of the square the input is resized to; `input_dim = side^2`.
    pub input_side: usize,
    pub hidden: Vec<usize>,
    pub feature_dim: usize,
}

impl Default for BackboneConfig {
    fn default() -> Self {
        Self {
            input_side: 32,
            hidden: vec![64],
            feature_dim: 32,
        }
    }
}

impl BackboneConfig {
    pub fn input_dim(&self) -> usize {
        self.input_side * self.input_side
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.input_side == 0 {
            return Err(ModelError::Config("input_side must be positive".into()));
        }
        if self.feature_dim < 2 {
            return Err(ModelError::Config(format!(
                "feature_dim must be at least 2, got {}",
                self.feature_dim
            )));
        }
        if self.hidden.contains(&0) {
            return Err(ModelError::Config("hidden widths must be positive".into()));
        }
        Ok(())
    }
}

/// Loss weights and optimizer settings.
///
/// The default weights give `alpha / beta = 0.2` with `alpha1 = alpha2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta: f64,
    pub lr: f64,
    pub batch: usize,
    pub epochs: usize,
    pub seed: u64,
    pub input_side: usize,
    pub feature_dim: usize,
    pub hidden: Vec<usize>,
    /// Both networks use one set of backbone weights.
    pub shared_weights: bool,
    /// Start the second network as a copy of the first.
    pub mirrored_init: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let bb = BackboneConfig::default();
        Self {
            alpha1: 0.2,
            alpha2: 0.2,
            beta: 1.0,
            lr: 0.01,
            batch: 32,
            epochs: 60,
            seed: 0,
            input_side: bb.input_side,
            feature_dim: bb.feature_dim,
            hidden: bb.hidden,
            shared_weights: false,
            mirrored_init: false,
        }
    }
}

impl TrainConfig {
    pub fn backbone(&self) -> BackboneConfig {
        BackboneConfig {
            input_side: self.input_side,
            hidden: self.hidden.clone(),
            feature_dim: self.feature_dim,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, w) in [
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("beta", self.beta),
        ] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(ModelError::Config(format!(
                    "{name} must be finite and >= 0, got {w}"
                )));
            }
        }
        if self.alpha1 + self.alpha2 + self.beta <= 0.0 {
            return Err(ModelError::Config(
                "alpha1 + alpha2 + beta must be positive".into(),
            ));
        }
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            return Err(ModelError::Config(format!(
                "lr must be finite and >= 0, got {}",
                self.lr
            )));
        }
        if self.batch == 0 {
            return Err(ModelError::Config("batch must be positive".into()));
        }
        self.backbone().validate()
    }

    pub fn from_toml(text: &str) -> Result<Self, ModelError> {
        let cfg: TrainConfig =
            toml::from_str(text).map_err(|e| ModelError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plain config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = TrainConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.alpha1 / cfg.beta, 0.2);
        assert_eq!(TrainConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_and_bad_values_fail() {
        assert!(TrainConfig::from_toml("alpha3 = 1.0").is_err());
        assert!(TrainConfig::from_toml("alpha1 = 0.0\nalpha2 = 0.0\nbeta = 0.0").is_err());
        assert!(TrainConfig::from_toml("feature_dim = 1").is_err());
        assert!(TrainConfig::from_toml("hidden = [8, 0]").is_err());
        let cfg = TrainConfig::from_toml("beta = 0.0\nepochs = 3").unwrap();
        assert_eq!((cfg.beta, cfg.epochs, cfg.alpha1), (0.0, 3, 0.2));
    }
}
