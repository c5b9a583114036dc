use serde::{Deserialize, Serialize};

use super::NetError;

/// Optimizer, batching and augmentation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrainConfig {
    pub momentum: f64,
    pub iterations: u64,
    pub batch_size: usize,
    pub subdivision: usize,
    pub learning_rate: f64,
    /// Iterations over which the learning rate ramps up linearly from
    /// `learning_rate / burn_in`; 0 means the full rate from the start.
    #[serde(default)]
    pub burn_in: u64,
    pub decay: f64,
    pub exposure: f64,
    pub saturation: f64,
    pub hue: f64,
    pub channels: usize,
    pub checkpoint_every: u64,
    pub lambda_coord: f64,
    pub lambda_noobj: f64,
    pub augment: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            momentum: 0.9,
            iterations: 10_000,
            batch_size: 32,
            subdivision: 16,
            learning_rate: 0.001,
            burn_in: 0,
            decay: 0.0005,
            exposure: 1.5,
            saturation: 1.5,
            hue: 0.1,
            channels: 3,
            checkpoint_every: 1000,
            lambda_coord: 5.0,
            lambda_noobj: 0.5,
            augment: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// The GPU run described alongside the main table: batch 64, subdivision 8.
    pub fn gpu_preset() -> Self {
        Self {
            batch_size: 64,
            subdivision: 8,
            ..Self::default()
        }
    }

    /// Learning rate used for the step taken at `iteration` (zero-based).
    pub fn learning_rate_at(&self, iteration: u64) -> f64 {
        if iteration >= self.burn_in {
            self.learning_rate
        } else {
            self.learning_rate * (iteration + 1) as f64 / self.burn_in as f64
        }
    }

    pub fn slice_size(&self) -> usize {
        self.batch_size / self.subdivision
    }

    pub fn validate(&self) -> Result<(), NetError> {
        let fail = |msg: String| Err(NetError::Config(msg));
        if self.batch_size == 0 || self.subdivision == 0 {
            return fail("batch size and subdivision must be positive".into());
        }
        if self.batch_size % self.subdivision != 0 {
            return fail(format!(
                "batch size {} is not divisible by subdivision {}",
                self.batch_size, self.subdivision
            ));
        }
        for (name, v) in [
            ("learning rate", self.learning_rate),
            ("lambda coord", self.lambda_coord),
            ("lambda noobj", self.lambda_noobj),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.decay.is_finite() && self.decay >= 0.0) {
            return fail(format!("decay must be non-negative, got {}", self.decay));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return fail(format!("momentum must be in [0, 1), got {}", self.momentum));
        }
        for (name, v) in [("exposure", self.exposure), ("saturation", self.saturation)] {
            if !(v.is_finite() && v >= 1.0) {
                return fail(format!("{name} must be >= 1, got {v}"));
            }
        }
        if !(0.0..=0.5).contains(&self.hue) {
            return fail(format!("hue must be in [0, 0.5], got {}", self.hue));
        }
        if self.channels != 3 {
            return fail(format!("only 3-channel input is supported, got {}", self.channels));
        }
        if self.checkpoint_every == 0 {
            return fail("checkpoint interval must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_the_parameter_table() {
        let c = TrainConfig::default();
        assert_eq!(c.momentum, 0.9);
        assert_eq!(c.iterations, 10_000);
        assert_eq!(c.batch_size, 32);
        assert_eq!(c.subdivision, 16);
        assert_eq!(c.learning_rate, 0.001);
        assert_eq!(c.decay, 0.0005);
        assert_eq!((c.exposure, c.saturation, c.hue), (1.5, 1.5, 0.1));
        assert_eq!(c.channels, 3);
        assert_eq!(c.checkpoint_every, 1000);
        assert_eq!(c.lambda_coord, 5.0);
        assert_eq!(c.slice_size(), 2);
        assert_eq!(c.burn_in, 0);
        c.validate().unwrap();
        TrainConfig::gpu_preset().validate().unwrap();
    }

    #[test]
    fn burn_in_ramps_linearly() {
        let c = TrainConfig { burn_in: 4, learning_rate: 0.01, ..Default::default() };
        let rates: Vec<f64> = (0..6).map(|i| c.learning_rate_at(i)).collect();
        assert_eq!(rates, [0.0025, 0.005, 0.0075, 0.01, 0.01, 0.01]);
        assert_eq!(TrainConfig::default().learning_rate_at(0), 0.001);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            TrainConfig { subdivision: 5, ..Default::default() },
            TrainConfig { learning_rate: 0.0, ..Default::default() },
            TrainConfig { hue: 0.6, ..Default::default() },
            TrainConfig { lambda_noobj: -1.0, ..Default::default() },
            TrainConfig { momentum: 1.0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }
}
