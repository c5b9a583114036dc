use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use super::{
    Activation, ArchSpec, Conv2d, DetectionHead, Layer, LayerSpec, MaxPool2d, NetError, Scalar,
    Tensor,
};

/// An ordered layer stack ending in a detection head.
#[derive(Debug, Clone)]
pub struct Network<T> {
    spec: ArchSpec,
    layers: Vec<Layer<T>>,
    grid_size: usize,
}

/// Layer inputs recorded by [`Network::forward_trace`] for the backward pass.
#[derive(Debug)]
pub struct Trace<T> {
    inputs: Vec<Tensor<T>>,
    pub output: Tensor<T>,
}

/// Initial confidence logit; the logistic of it is about 0.018, so empty
/// cells start near their target instead of at 0.5.
pub const CONF_PRIOR_LOGIT: f64 = -4.0;

fn init_gain(next: Option<&LayerSpec>) -> f64 {
    match next {
        Some(LayerSpec::Act(Activation::LeakyRelu)) => (2.0 / (1.0 + 0.01f64)).sqrt(),
        Some(LayerSpec::Act(Activation::Relu | Activation::Mish)) => 2f64.sqrt(),
        _ => 1.0,
    }
}

impl<T: Scalar> Network<T> {
    /// Builds the layer stack with Kaiming-uniform weights and zero biases,
    /// except that the head conv starts its confidence channels at
    /// [`CONF_PRIOR_LOGIT`].
    pub fn new(spec: &ArchSpec, seed: u64) -> Result<Self, NetError> {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let mut channels = spec.input[0];
        let mut layers = Vec::with_capacity(spec.layers.len());
        for (i, ls) in spec.layers.iter().enumerate() {
            let layer = match *ls {
                LayerSpec::Conv {
                    filters,
                    kernel,
                    stride,
                    pad,
                } => {
                    let mut conv = Conv2d::new(channels, filters, kernel, stride, pad);
                    let fan_in = (channels * kernel * kernel) as f64;
                    let bound = init_gain(spec.layers.get(i + 1)) * (3.0 / fan_in).sqrt();
                    for w in conv.weight.value.data_mut() {
                        *w = T::from_f64_lossy(rng.gen_range(-bound..bound));
                    }
                    if spec.layers.get(i + 1) == Some(&LayerSpec::Head) {
                        let fields = spec.num_classes + 5;
                        for b in 0..spec.boxes_per_cell {
                            conv.bias.value.data_mut()[b * fields + 4] =
                                T::from_f64_lossy(CONF_PRIOR_LOGIT);
                        }
                    }
                    channels = filters;
                    Layer::Conv2d(conv)
                }
                LayerSpec::MaxPool { size, stride } => Layer::MaxPool2d(MaxPool2d::new(size, stride)),
                LayerSpec::Act(a) => Layer::Activation(a),
                LayerSpec::Head => Layer::DetectionHead(DetectionHead {
                    boxes: spec.boxes_per_cell,
                    classes: spec.num_classes,
                }),
            };
            layers.push(layer);
        }
        Self::from_layers(spec.clone(), layers)
    }

    /// Validates the layer chain against the spec's input and head geometry.
    pub fn from_layers(spec: ArchSpec, layers: Vec<Layer<T>>) -> Result<Self, NetError> {
        let mut shape = vec![1, spec.input[0], spec.input[1], spec.input[2]];
        for layer in &layers {
            shape = layer.output_shape(&shape)?;
        }
        if !matches!(layers.last(), Some(Layer::DetectionHead(_))) {
            return Err(NetError::Architecture("last layer must be the detection head".into()));
        }
        let head = spec.head_channels();
        if shape[1] != head {
            return Err(NetError::Architecture(format!(
                "head has {} channels, (classes + 5) x boxes = {head}",
                shape[1]
            )));
        }
        if shape[2] != shape[3] {
            return Err(NetError::Architecture(format!(
                "output grid {}x{} is not square",
                shape[2], shape[3]
            )));
        }
        let grid_size = shape[2];
        Ok(Self {
            spec,
            layers,
            grid_size,
        })
    }

    pub fn spec(&self) -> &ArchSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer<T>] {
        &mut self.layers
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn num_classes(&self) -> usize {
        self.spec.num_classes
    }

    pub fn boxes_per_cell(&self) -> usize {
        self.spec.boxes_per_cell
    }

    /// `(channels, height, width)`
    pub fn input_shape(&self) -> [usize; 3] {
        self.spec.input
    }

    pub fn parameter_count(&self) -> usize {
        self.convs().map(|c| c.weight.value.len() + c.bias.value.len()).sum()
    }

    pub fn convs(&self) -> impl Iterator<Item = &Conv2d<T>> {
        self.layers.iter().filter_map(|l| match l {
            Layer::Conv2d(c) => Some(c),
            _ => None,
        })
    }

    pub fn convs_mut(&mut self) -> impl Iterator<Item = &mut Conv2d<T>> {
        self.layers.iter_mut().filter_map(|l| match l {
            Layer::Conv2d(c) => Some(c),
            _ => None,
        })
    }

    fn check_input(&self, input: &Tensor<T>) -> Result<(), NetError> {
        let (_, c, h, w) = input.dims4()?;
        if [c, h, w] != self.spec.input {
            return Err(NetError::ShapeMismatch {
                what: "network input (c, h, w)",
                expected: self.spec.input.to_vec(),
                got: vec![c, h, w],
            });
        }
        Ok(())
    }

    /// Inference. Pure over immutable weights.
    pub fn forward(&self, input: &Tensor<T>) -> Result<Tensor<T>, NetError> {
        self.check_input(input)?;
        let mut x = self.layers[0].forward(input)?;
        for layer in &self.layers[1..] {
            x = layer.forward(&x)?;
        }
        Ok(x)
    }

    pub fn forward_trace(&self, input: &Tensor<T>) -> Result<Trace<T>, NetError> {
        self.check_input(input)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut x = input.clone();
        for layer in &self.layers {
            let y = layer.forward(&x)?;
            inputs.push(x);
            x = y;
        }
        Ok(Trace { inputs, output: x })
    }

    /// Accumulates parameter gradients of `sum(grad_output * output)`.
    pub fn backward(&mut self, trace: Trace<T>, grad_output: &Tensor<T>) -> Result<(), NetError> {
        self.backward_inner(trace, grad_output, false).map(|_| ())
    }

    /// Like [`backward`](Self::backward) but also returns the gradient with
    /// respect to the network input.
    pub fn backward_with_input_grad(
        &mut self,
        trace: Trace<T>,
        grad_output: &Tensor<T>,
    ) -> Result<Tensor<T>, NetError> {
        self.backward_inner(trace, grad_output, true)
            .map(|g| g.expect("input gradient requested"))
    }

    fn backward_inner(
        &mut self,
        trace: Trace<T>,
        grad_output: &Tensor<T>,
        want_input_grad: bool,
    ) -> Result<Option<Tensor<T>>, NetError> {
        if grad_output.shape() != trace.output.shape() {
            return Err(NetError::ShapeMismatch {
                what: "network output gradient",
                expected: trace.output.shape().to_vec(),
                got: grad_output.shape().to_vec(),
            });
        }
        let mut grad = grad_output.clone();
        let mut inputs = trace.inputs;
        for i in (0..self.layers.len()).rev() {
            let input = inputs.pop().expect("one recorded input per layer");
            let need = i > 0 || want_input_grad;
            match self.layers[i].backward(&input, &grad, need)? {
                Some(g) => grad = g,
                None => return Ok(None),
            }
        }
        Ok(Some(grad))
    }

    pub fn zero_grad(&mut self) {
        for conv in self.convs_mut() {
            conv.weight.zero_grad();
            conv.bias.zero_grad();
        }
    }

    pub fn cast<U: Scalar>(&self) -> Network<U> {
        let layers = self
            .layers
            .iter()
            .map(|l| match l {
                Layer::Conv2d(c) => {
                    let mut conv = Conv2d::new(c.in_channels, c.out_channels, c.kernel, c.stride, c.pad);
                    conv.weight.value = c.weight.value.cast();
                    conv.bias.value = c.bias.value.cast();
                    Layer::Conv2d(conv)
                }
                Layer::MaxPool2d(p) => Layer::MaxPool2d(*p),
                Layer::Activation(a) => Layer::Activation(*a),
                Layer::DetectionHead(h) => Layer::DetectionHead(*h),
            })
            .collect();
        Network {
            spec: self.spec.clone(),
            layers,
            grid_size: self.grid_size,
        }
    }
}
