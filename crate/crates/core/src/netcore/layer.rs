use super::{Activation, Conv2d, MaxPool2d, NetError, Scalar, Tensor};

/// A trainable tensor with its accumulated gradient and momentum buffer.
#[derive(Debug, Clone)]
pub struct Param<T> {
    pub value: Tensor<T>,
    pub grad: Tensor<T>,
    pub momentum: Tensor<T>,
}

impl<T: Scalar> Param<T> {
    pub fn new(value: Tensor<T>) -> Self {
        let grad = Tensor::zeros(value.shape());
        let momentum = Tensor::zeros(value.shape());
        Self {
            value,
            grad,
            momentum,
        }
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::new(Tensor::zeros(shape))
    }

    pub fn zero_grad(&mut self) {
        self.grad.data_mut().fill(T::zero());
    }

    /// `v ← momentum·v − lr·(g + decay·w); w ← w + v`, then clears `g`.
    pub fn sgd_update(&mut self, lr: f64, momentum: f64, decay: f64) {
        let lr = T::from_f64_lossy(lr);
        let mu = T::from_f64_lossy(momentum);
        let decay = T::from_f64_lossy(decay);
        let w = self.value.data_mut();
        let v = self.momentum.data_mut();
        let g = self.grad.data_mut();
        for i in 0..w.len() {
            v[i] = mu * v[i] - lr * (g[i] + decay * w[i]);
            w[i] = w[i] + v[i];
            g[i] = T::zero();
        }
    }
}

/// Final layer: squashes every head channel into `(0, 1)` with the logistic map.
///
/// Channel layout per cell is `boxes` groups of `[tx, ty, w, h, conf, p_0 .. p_{C-1}]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionHead {
    pub boxes: usize,
    pub classes: usize,
}

impl DetectionHead {
    pub fn channels(&self) -> usize {
        self.boxes * (self.classes + 5)
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>, NetError> {
        let [_, c, _, _] = *input else {
            return Err(NetError::RankMismatch {
                expected: 4,
                got: input.to_vec(),
            });
        };
        if c != self.channels() {
            return Err(NetError::DimMismatch {
                layer: "detection head".into(),
                dim: "channel count",
                expected: self.channels(),
                got: c,
            });
        }
        Ok(input.to_vec())
    }
}

#[derive(Debug, Clone)]
pub enum Layer<T> {
    Conv2d(Conv2d<T>),
    MaxPool2d(MaxPool2d),
    Activation(Activation),
    DetectionHead(DetectionHead),
}

impl<T: Scalar> Layer<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Conv2d(_) => "conv2d",
            Layer::MaxPool2d(_) => "maxpool2d",
            Layer::Activation(_) => "activation",
            Layer::DetectionHead(_) => "detectionHead",
        }
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>, NetError> {
        match self {
            Layer::Conv2d(conv) => conv.output_shape(input),
            Layer::MaxPool2d(pool) => pool.output_shape(input),
            Layer::Activation(_) => Ok(input.to_vec()),
            Layer::DetectionHead(head) => head.output_shape(input),
        }
    }

    pub fn forward(&self, input: &Tensor<T>) -> Result<Tensor<T>, NetError> {
        match self {
            Layer::Conv2d(conv) => conv.forward(input),
            Layer::MaxPool2d(pool) => pool.forward(input),
            Layer::Activation(act) => Ok(act.forward(input)),
            Layer::DetectionHead(head) => {
                head.output_shape(input.shape())?;
                Ok(Activation::Logistic.forward(input))
            }
        }
    }

    /// Accumulates parameter gradients and returns the input gradient when
    /// `need_input_grad` is set.
    pub fn backward(
        &mut self,
        input: &Tensor<T>,
        upstream: &Tensor<T>,
        need_input_grad: bool,
    ) -> Result<Option<Tensor<T>>, NetError> {
        match self {
            Layer::Conv2d(conv) => conv.accumulate_backward(input, upstream, need_input_grad),
            Layer::MaxPool2d(pool) => pool.backward(input, upstream).map(Some),
            Layer::Activation(act) => act.backward(input, upstream).map(Some),
            Layer::DetectionHead(head) => {
                head.output_shape(input.shape())?;
                Activation::Logistic.backward(input, upstream).map(Some)
            }
        }
    }

    pub fn params_mut(&mut self) -> Vec<(&mut Param<T>, bool)> {
        match self {
            Layer::Conv2d(conv) => vec![(&mut conv.weight, true), (&mut conv.bias, false)],
            _ => Vec::new(),
        }
    }
}
