use super::{NetError, Network, Scalar, Tensor, TrainConfig};

/// Tracks gradient accumulation across the `subdivision` slices of one batch.
#[derive(Debug, Clone)]
pub struct GradientAccumulator {
    batch_size: usize,
    subdivision: usize,
    slices_seen: usize,
    loss_sum: f64,
}

impl GradientAccumulator {
    pub fn new(batch_size: usize, subdivision: usize) -> Result<Self, NetError> {
        if subdivision == 0 || batch_size == 0 || batch_size % subdivision != 0 {
            return Err(NetError::Config(format!(
                "batch size {batch_size} is not divisible by subdivision {subdivision}"
            )));
        }
        Ok(Self {
            batch_size,
            subdivision,
            slices_seen: 0,
            loss_sum: 0.0,
        })
    }

    pub fn from_config(cfg: &TrainConfig) -> Result<Self, NetError> {
        Self::new(cfg.batch_size, cfg.subdivision)
    }

    pub fn slice_size(&self) -> usize {
        self.batch_size / self.subdivision
    }

    pub fn slices_seen(&self) -> usize {
        self.slices_seen
    }

    pub fn is_complete(&self) -> bool {
        self.slices_seen == self.subdivision
    }

    /// Sum of the slice losses seen since the last optimizer step.
    pub fn loss_sum(&self) -> f64 {
        self.loss_sum
    }

    /// Runs one slice forward and backward.
    ///
    /// `loss_fn` maps the network output to `(loss, dloss/doutput)` summed
    /// over the slice. Gradients are scaled by `1 / batch_size` so a full batch
    /// accumulates the gradient of the per-image mean loss.
    pub fn accumulate<T, E, F>(
        &mut self,
        net: &mut Network<T>,
        input: &Tensor<T>,
        loss_fn: F,
    ) -> Result<f64, E>
    where
        T: Scalar,
        E: From<NetError>,
        F: FnOnce(&Tensor<T>) -> Result<(f64, Tensor<T>), E>,
    {
        let n = input.shape().first().copied().unwrap_or(0);
        if n != self.slice_size() {
            return Err(NetError::SliceSize {
                expected: self.slice_size(),
                got: n,
            }
            .into());
        }
        if self.is_complete() {
            return Err(NetError::Config(
                "batch already complete; take an optimizer step first".into(),
            )
            .into());
        }
        let trace = net.forward_trace(input)?;
        let (loss, mut grad) = loss_fn(&trace.output)?;
        let scale = T::from_f64_lossy(1.0 / self.batch_size as f64);
        for g in grad.data_mut() {
            *g = *g * scale;
        }
        net.backward(trace, &grad)?;
        self.slices_seen += 1;
        self.loss_sum += loss;
        Ok(loss)
    }

    fn reset(&mut self) {
        self.slices_seen = 0;
        self.loss_sum = 0.0;
    }
}

/// One SGD-with-momentum update over every parameter; decay applies to
/// conv weights only. Returns the batch loss sum.
pub fn sgd_step<T: Scalar>(
    net: &mut Network<T>,
    acc: &mut GradientAccumulator,
    cfg: &TrainConfig,
) -> Result<f64, NetError> {
    if !acc.is_complete() {
        return Err(NetError::MidAccumulation {
            seen: acc.slices_seen,
            expected: acc.subdivision,
        });
    }
    for layer in net.layers_mut() {
        for (param, decays) in layer.params_mut() {
            let decay = if decays { cfg.decay } else { 0.0 };
            param.sgd_update(cfg.learning_rate, cfg.momentum, decay);
        }
    }
    let loss = acc.loss_sum;
    acc.reset();
    Ok(loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{Param, Tensor};

    fn scalar_param(w: f64, g: f64) -> Param<f64> {
        let mut p = Param::new(Tensor::full(&[1], w));
        p.grad.data_mut()[0] = g;
        p
    }

    #[test]
    fn zero_gradient_is_fixed_point_without_decay() {
        let mut p = scalar_param(0.75, 0.0);
        p.sgd_update(0.001, 0.9, 0.0);
        assert_eq!(p.value.data(), &[0.75]);
        assert_eq!(p.momentum.data(), &[0.0]);
    }

    #[test]
    fn single_step_hand_computation() {
        let mut p = scalar_param(1.0, 0.5);
        p.sgd_update(0.001, 0.9, 0.0005);
        // v = -0.001 * (0.5 + 0.0005 * 1.0)
        let v = -0.000_500_5;
        assert!((p.momentum.data()[0] - v).abs() < 1e-15);
        assert!((p.value.data()[0] - (1.0 + v)).abs() < 1e-15);
        assert_eq!(p.grad.data(), &[0.0]);
    }

    #[test]
    fn two_steps_follow_momentum_recurrence() {
        let (lr, mu, g) = (0.01, 0.9, 0.3);
        let mut p = scalar_param(2.0, g);
        p.sgd_update(lr, mu, 0.0);
        p.grad.data_mut()[0] = g;
        p.sgd_update(lr, mu, 0.0);
        // v1 = -lr g; v2 = mu v1 - lr g; w2 = w0 + v1 + v2
        let v1 = -lr * g;
        let v2 = mu * v1 - lr * g;
        assert!((p.value.data()[0] - (2.0 + v1 + v2)).abs() < 1e-15);
        assert!((p.momentum.data()[0] - v2).abs() < 1e-15);
    }

    #[test]
    fn accumulator_rejects_bad_splits() {
        assert!(GradientAccumulator::new(32, 5).is_err());
        assert_eq!(GradientAccumulator::new(32, 16).unwrap().slice_size(), 2);
    }
}
