use serde::{Deserialize, Serialize};

use super::{NetError, Scalar, Tensor};

pub const LEAKY_SLOPE: f64 = 0.1;

/// Elementwise nonlinearities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Activation {
    Linear,
    Relu,
    LeakyRelu,
    Mish,
    Logistic,
}

/// Above this, `tanh(softplus(x))` is 1 to working precision.
const MISH_LINEAR_ABOVE: f64 = 20.0;

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Relu => "relu",
            Activation::LeakyRelu => "leaky",
            Activation::Mish => "mish",
            Activation::Logistic => "logistic",
        }
    }

    #[inline]
    pub fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            Activation::Linear => x,
            Activation::Relu => x.max(T::zero()),
            Activation::LeakyRelu => {
                if x > T::zero() {
                    x
                } else {
                    x * T::from_f64_lossy(LEAKY_SLOPE)
                }
            }
            Activation::Mish => {
                if x > T::from_f64_lossy(MISH_LINEAR_ABOVE) {
                    return x;
                }
                // tanh(ln(1 + e^x)) = n / (n + 2) with n = e^x (e^x + 2)
                let e = x.exp();
                let n = e * (e + T::from_f64_lossy(2.0));
                x * n / (n + T::from_f64_lossy(2.0))
            }
            Activation::Logistic => logistic(x),
        }
    }

    /// Derivative at the pre-activation value `x`.
    #[inline]
    pub fn derivative<T: Scalar>(self, x: T) -> T {
        match self {
            Activation::Linear => T::one(),
            Activation::Relu => {
                if x > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::LeakyRelu => {
                if x > T::zero() {
                    T::one()
                } else {
                    T::from_f64_lossy(LEAKY_SLOPE)
                }
            }
            Activation::Mish => {
                if x > T::from_f64_lossy(MISH_LINEAR_ABOVE) {
                    return T::one();
                }
                let two = T::from_f64_lossy(2.0);
                let e = x.exp();
                let n = e * (e + two);
                let t = n / (n + two);
                let sigma = e / (T::one() + e);
                t + x * (T::one() - t * t) * sigma
            }
            Activation::Logistic => {
                let s = logistic(x);
                s * (T::one() - s)
            }
        }
    }

    pub fn forward<T: Scalar>(self, input: &Tensor<T>) -> Tensor<T> {
        if self == Activation::Linear {
            return input.clone();
        }
        input.map(|v| self.apply(v))
    }

    pub fn backward<T: Scalar>(
        self,
        input: &Tensor<T>,
        upstream: &Tensor<T>,
    ) -> Result<Tensor<T>, NetError> {
        if input.shape() != upstream.shape() {
            return Err(NetError::ShapeMismatch {
                what: "activation upstream gradient",
                expected: input.shape().to_vec(),
                got: upstream.shape().to_vec(),
            });
        }
        let mut grad = upstream.clone();
        if self != Activation::Linear {
            for (g, &x) in grad.data_mut().iter_mut().zip(input.data()) {
                *g = *g * self.derivative(x);
            }
        }
        Ok(grad)
    }
}

impl std::str::FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Activation::Linear),
            "relu" => Ok(Activation::Relu),
            "leaky" | "leakyRelu" | "leaky_relu" => Ok(Activation::LeakyRelu),
            "mish" => Ok(Activation::Mish),
            "logistic" | "sigmoid" => Ok(Activation::Logistic),
            other => Err(format!("unknown activation `{other}`")),
        }
    }
}

#[inline]
pub fn logistic<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}
