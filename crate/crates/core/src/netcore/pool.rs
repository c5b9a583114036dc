use super::{NetError, Scalar, Tensor};

/// Max pooling. Windows that run past the edge see the missing cells as −∞,
/// so the output size is `ceil(in / stride)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaxPool2d {
    pub size: usize,
    pub stride: usize,
}

impl MaxPool2d {
    pub fn new(size: usize, stride: usize) -> Self {
        Self { size, stride }
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>, NetError> {
        let [n, c, h, w] = *input else {
            return Err(NetError::RankMismatch {
                expected: 4,
                got: input.to_vec(),
            });
        };
        if self.stride == 0 || self.size == 0 {
            return Err(NetError::Architecture("zero pool size or stride".into()));
        }
        Ok(vec![n, c, h.div_ceil(self.stride), w.div_ceil(self.stride)])
    }

    /// Visits every window and yields `(output index, flat input index of the
    /// first maximum)`.
    fn for_each_argmax<T: Scalar>(
        &self,
        input: &Tensor<T>,
        mut visit: impl FnMut(usize, usize),
    ) -> Result<Vec<usize>, NetError> {
        let out_shape = self.output_shape(input.shape())?;
        let (n, c, h, w) = input.dims4()?;
        let (oh, ow) = (out_shape[2], out_shape[3]);
        let data = input.data();
        let mut out_idx = 0;
        if self.size == 2 && self.stride == 2 && h % 2 == 0 && w % 2 == 0 {
            for plane in 0..n * c {
                let base = plane * h * w;
                for oy in 0..oh {
                    let r0 = base + 2 * oy * w;
                    let r1 = r0 + w;
                    for ox in 0..ow {
                        let cands = [r0 + 2 * ox, r0 + 2 * ox + 1, r1 + 2 * ox, r1 + 2 * ox + 1];
                        let mut best = cands[0];
                        for &idx in &cands[1..] {
                            if data[idx] > data[best] {
                                best = idx;
                            }
                        }
                        visit(out_idx, best);
                        out_idx += 1;
                    }
                }
            }
            return Ok(out_shape);
        }
        for plane in 0..n * c {
            let base = plane * h * w;
            for oy in 0..oh {
                let y0 = oy * self.stride;
                let y1 = (y0 + self.size).min(h);
                for ox in 0..ow {
                    let x0 = ox * self.stride;
                    let x1 = (x0 + self.size).min(w);
                    let mut best = base + y0 * w + x0;
                    for iy in y0..y1 {
                        for ix in x0..x1 {
                            let idx = base + iy * w + ix;
                            if data[idx] > data[best] {
                                best = idx;
                            }
                        }
                    }
                    visit(out_idx, best);
                    out_idx += 1;
                }
            }
        }
        Ok(out_shape)
    }

    pub fn forward<T: Scalar>(&self, input: &Tensor<T>) -> Result<Tensor<T>, NetError> {
        let mut values = Vec::with_capacity(input.len() / (self.stride * self.stride).max(1) + 1);
        let data = input.data();
        let shape = self.for_each_argmax(input, |_, src| values.push(data[src]))?;
        Tensor::from_vec(&shape, values)
    }

    /// Routes each upstream element to its window's first maximum.
    pub fn backward<T: Scalar>(
        &self,
        input: &Tensor<T>,
        upstream: &Tensor<T>,
    ) -> Result<Tensor<T>, NetError> {
        let expected = self.output_shape(input.shape())?;
        if upstream.shape() != expected.as_slice() {
            return Err(NetError::ShapeMismatch {
                what: "maxpool upstream gradient",
                expected,
                got: upstream.shape().to_vec(),
            });
        }
        let mut grad = Tensor::zeros(input.shape());
        let up = upstream.data();
        let g = grad.data_mut();
        self.for_each_argmax(input, |out, src| g[src] = g[src] + up[out])?;
        Ok(grad)
    }
}
