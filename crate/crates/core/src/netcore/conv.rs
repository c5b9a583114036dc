use super::{NetError, Param, Scalar, Tensor};

/// 2-D cross-correlation with bias over NCHW tensors.
#[derive(Debug, Clone)]
pub struct Conv2d<T> {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
    /// `(out_channels, in_channels, kernel, kernel)`
    pub weight: Param<T>,
    /// `(out_channels)`
    pub bias: Param<T>,
}

/// Gradients returned by [`Conv2d::backward`].
#[derive(Debug, Clone)]
pub struct ConvGrads<T> {
    pub input: Tensor<T>,
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

pub fn conv_output_size(input: usize, kernel: usize, stride: usize, pad: usize) -> Option<usize> {
    let padded = input + 2 * pad;
    if padded < kernel || stride == 0 {
        return None;
    }
    Some((padded - kernel) / stride + 1)
}

impl<T: Scalar> Conv2d<T> {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        pad: usize,
    ) -> Self {
        Self {
            in_channels,
            out_channels,
            kernel,
            stride,
            pad,
            weight: Param::zeros(&[out_channels, in_channels, kernel, kernel]),
            bias: Param::zeros(&[out_channels]),
        }
    }

    pub fn from_weights(
        weight: Tensor<T>,
        bias: Tensor<T>,
        stride: usize,
        pad: usize,
    ) -> Result<Self, NetError> {
        let shape = weight.shape().to_vec();
        let [out_channels, in_channels, k, k2] = shape[..] else {
            return Err(NetError::RankMismatch {
                expected: 4,
                got: shape,
            });
        };
        if k != k2 {
            return Err(NetError::Architecture(format!(
                "non-square kernel {k}x{k2}"
            )));
        }
        if bias.shape() != [out_channels] {
            return Err(NetError::ShapeMismatch {
                what: "conv bias",
                expected: vec![out_channels],
                got: bias.shape().to_vec(),
            });
        }
        Ok(Self {
            in_channels,
            out_channels,
            kernel: k,
            stride,
            pad,
            weight: Param::new(weight),
            bias: Param::new(bias),
        })
    }

    fn name(&self) -> String {
        format!(
            "conv{}x{}({}->{}, stride {}, pad {})",
            self.kernel, self.kernel, self.in_channels, self.out_channels, self.stride, self.pad
        )
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>, NetError> {
        let [n, c, h, w] = *input else {
            return Err(NetError::RankMismatch {
                expected: 4,
                got: input.to_vec(),
            });
        };
        if c != self.in_channels {
            return Err(NetError::DimMismatch {
                layer: self.name(),
                dim: "channel count",
                expected: self.in_channels,
                got: c,
            });
        }
        let size = |dim: usize| {
            conv_output_size(dim, self.kernel, self.stride, self.pad).ok_or_else(|| {
                NetError::SpatialTooSmall {
                    layer: self.name(),
                    size: dim,
                    kernel: self.kernel,
                    pad: self.pad,
                }
            })
        };
        Ok(vec![n, self.out_channels, size(h)?, size(w)?])
    }

    pub fn forward(&self, input: &Tensor<T>) -> Result<Tensor<T>, NetError> {
        let out_shape = self.output_shape(input.shape())?;
        let (n, c, h, w) = input.dims4()?;
        let (oh, ow) = (out_shape[2], out_shape[3]);
        let spatial = oh * ow;
        let patch = c * self.kernel * self.kernel;
        let geom = Geometry::of(self);
        let rows = geom.tile_rows(patch, oh, ow);
        let mut out = Tensor::zeros(&out_shape);
        let mut col = if geom.is_pointwise() {
            Vec::new()
        } else {
            vec![T::zero(); patch * rows * ow]
        };
        let weight = self.weight.value.data();
        let bias = self.bias.value.data();
        for s in 0..n {
            let x = input.sample(s);
            let y = out.sample_mut(s);
            for (o, row) in y.chunks_exact_mut(spatial).enumerate() {
                row.fill(bias[o]);
            }
            if geom.is_pointwise() {
                T::gemm(
                    self.out_channels, patch, spatial, T::one(), weight, patch as isize, 1, x,
                    spatial as isize, 1, T::one(), y, spatial as isize, 1,
                );
                continue;
            }
            for oy0 in (0..oh).step_by(rows) {
                let oy1 = (oy0 + rows).min(oh);
                let cols = (oy1 - oy0) * ow;
                let col = &mut col[..patch * cols];
                geom.im2col(x, c, h, w, oy0, oy1, ow, col);
                T::gemm(
                    self.out_channels, patch, cols, T::one(), weight, patch as isize, 1, col,
                    cols as isize, 1, T::one(), &mut y[oy0 * ow..], spatial as isize, 1,
                );
            }
        }
        Ok(out)
    }

    /// Pure backward pass: gradients of `sum(upstream * forward(input))`.
    pub fn backward(
        &self,
        input: &Tensor<T>,
        upstream: &Tensor<T>,
    ) -> Result<ConvGrads<T>, NetError> {
        let mut weight = Tensor::zeros(self.weight.value.shape());
        let mut bias = Tensor::zeros(self.bias.value.shape());
        let out_shape = self.output_shape(input.shape())?;
        let input_grad = Geometry::of(self)
            .backward(
                self.weight.value.data(),
                input,
                upstream,
                &out_shape,
                weight.data_mut(),
                bias.data_mut(),
                true,
            )?
            .expect("input gradient requested");
        Ok(ConvGrads {
            input: input_grad,
            weight,
            bias,
        })
    }

    /// Adds this pass's parameter gradients into `weight.grad` / `bias.grad`;
    /// computes the input gradient only when `need_input_grad` is set.
    pub fn accumulate_backward(
        &mut self,
        input: &Tensor<T>,
        upstream: &Tensor<T>,
        need_input_grad: bool,
    ) -> Result<Option<Tensor<T>>, NetError> {
        let out_shape = self.output_shape(input.shape())?;
        let geom = Geometry::of(self);
        geom.backward(
            self.weight.value.data(),
            input,
            upstream,
            &out_shape,
            self.weight.grad.data_mut(),
            self.bias.grad.data_mut(),
            need_input_grad,
        )
    }
}

#[derive(Clone, Copy)]
struct Geometry {
    out_channels: usize,
    kernel: usize,
    stride: usize,
    pad: usize,
}

impl Geometry {
    fn of<T>(conv: &Conv2d<T>) -> Self {
        Self {
            out_channels: conv.out_channels,
            kernel: conv.kernel,
            stride: conv.stride,
            pad: conv.pad,
        }
    }

    fn is_pointwise(&self) -> bool {
        self.kernel == 1 && self.stride == 1 && self.pad == 0
    }

    #[allow(clippy::too_many_arguments)]
    fn backward<T: Scalar>(
        &self,
        weight: &[T],
        input: &Tensor<T>,
        upstream: &Tensor<T>,
        out_shape: &[usize],
        weight_grad: &mut [T],
        bias_grad: &mut [T],
        need_input_grad: bool,
    ) -> Result<Option<Tensor<T>>, NetError> {
        if upstream.shape() != out_shape {
            return Err(NetError::ShapeMismatch {
                what: "conv upstream gradient",
                expected: out_shape.to_vec(),
                got: upstream.shape().to_vec(),
            });
        }
        let (n, c, h, w) = input.dims4()?;
        let (oh, ow) = (out_shape[2], out_shape[3]);
        let spatial = oh * ow;
        let patch = c * self.kernel * self.kernel;
        let pointwise = self.is_pointwise();
        let rows = if pointwise { oh } else { self.tile_rows(patch, oh, ow) };
        let tile = patch * rows * ow;
        let mut col = if pointwise { Vec::new() } else { vec![T::zero(); tile] };
        let mut dcol = if need_input_grad && !pointwise {
            vec![T::zero(); tile]
        } else {
            Vec::new()
        };
        let mut input_grad = need_input_grad.then(|| Tensor::zeros(input.shape()));

        for s in 0..n {
            let x = input.sample(s);
            let dy = upstream.sample(s);
            for (o, row) in dy.chunks_exact(spatial).enumerate() {
                bias_grad[o] = bias_grad[o] + row.iter().fold(T::zero(), |acc, &v| acc + v);
            }
            let mut dx = input_grad.as_mut().map(|g| g.sample_mut(s));
            for oy0 in (0..oh).step_by(rows) {
                let oy1 = (oy0 + rows).min(oh);
                let cols = (oy1 - oy0) * ow;
                let dy_tile = &dy[oy0 * ow..];
                let col_tile: &[T] = if pointwise {
                    x
                } else {
                    let col = &mut col[..patch * cols];
                    self.im2col(x, c, h, w, oy0, oy1, ow, col);
                    col
                };
                // dW += dY · colᵀ
                T::gemm(
                    self.out_channels, cols, patch, T::one(), dy_tile, spatial as isize, 1,
                    col_tile, 1, cols as isize, T::one(), weight_grad, patch as isize, 1,
                );
                let Some(dx) = dx.as_deref_mut() else { continue };
                if pointwise {
                    // dX = Wᵀ · dY
                    T::gemm(
                        patch, self.out_channels, cols, T::one(), weight, 1, patch as isize,
                        dy_tile, spatial as isize, 1, T::zero(), dx, spatial as isize, 1,
                    );
                } else {
                    let dcol = &mut dcol[..patch * cols];
                    T::gemm(
                        patch, self.out_channels, cols, T::one(), weight, 1, patch as isize,
                        dy_tile, spatial as isize, 1, T::zero(), dcol, cols as isize, 1,
                    );
                    self.col2im(dcol, c, h, w, oy0, oy1, ow, dx);
                }
            }
        }
        Ok(input_grad)
    }

    /// Output rows per tile: the patch matrix stays around 1 MiB while each
    /// GEMM still sees at least `MIN_COLS` columns.
    fn tile_rows(&self, patch: usize, oh: usize, ow: usize) -> usize {
        const TILE_BYTES: usize = 1 << 20;
        const MIN_COLS: usize = 1024;
        let per_row = patch * ow * std::mem::size_of::<f32>();
        let by_cache = TILE_BYTES / per_row.max(1);
        let by_width = MIN_COLS.div_ceil(ow.max(1));
        by_cache.max(by_width).clamp(1, oh.max(1))
    }

    /// Patch matrix for output rows `oy0..oy1`, shape `[c·k·k, (oy1-oy0)·ow]`.
    #[allow(clippy::too_many_arguments)]
    fn im2col<T: Scalar>(
        &self,
        x: &[T],
        c: usize,
        h: usize,
        w: usize,
        oy0: usize,
        oy1: usize,
        ow: usize,
        col: &mut [T],
    ) {
        let (k, stride, pad) = (self.kernel, self.stride, self.pad);
        let cols = (oy1 - oy0) * ow;
        let oh = oy1;
        for ch in 0..c {
            let plane = &x[ch * h * w..(ch + 1) * h * w];
            for ky in 0..k {
                let (y_lo, y_hi) = valid_range(oh, h, stride, ky, pad);
                for kx in 0..k {
                    let row = (ch * k + ky) * k + kx;
                    let dst = &mut col[row * cols..(row + 1) * cols];
                    let (x_lo, x_hi) = valid_range(ow, w, stride, kx, pad);
                    for oy in oy0..oy1 {
                        let line = &mut dst[(oy - oy0) * ow..(oy - oy0 + 1) * ow];
                        if oy < y_lo || oy >= y_hi || x_lo >= x_hi {
                            line.fill(T::zero());
                            continue;
                        }
                        let iy = oy * stride + ky - pad;
                        let src = &plane[iy * w..(iy + 1) * w];
                        line[..x_lo].fill(T::zero());
                        line[x_hi..].fill(T::zero());
                        let ix0 = x_lo * stride + kx - pad;
                        if stride == 1 {
                            line[x_lo..x_hi].copy_from_slice(&src[ix0..ix0 + (x_hi - x_lo)]);
                        } else {
                            for (j, v) in line[x_lo..x_hi].iter_mut().enumerate() {
                                *v = src[ix0 + j * stride];
                            }
                        }
                    }
                }
            }
        }
    }

    /// Scatter-adds a patch-matrix gradient for rows `oy0..oy1` into `dx`.
    #[allow(clippy::too_many_arguments)]
    fn col2im<T: Scalar>(
        &self,
        col: &[T],
        c: usize,
        h: usize,
        w: usize,
        oy0: usize,
        oy1: usize,
        ow: usize,
        dx: &mut [T],
    ) {
        let (k, stride, pad) = (self.kernel, self.stride, self.pad);
        let cols = (oy1 - oy0) * ow;
        for ch in 0..c {
            let plane = &mut dx[ch * h * w..(ch + 1) * h * w];
            for ky in 0..k {
                let (y_lo, y_hi) = valid_range(oy1, h, stride, ky, pad);
                for kx in 0..k {
                    let row = (ch * k + ky) * k + kx;
                    let src = &col[row * cols..(row + 1) * cols];
                    let (x_lo, x_hi) = valid_range(ow, w, stride, kx, pad);
                    if x_lo >= x_hi {
                        continue;
                    }
                    for oy in y_lo.max(oy0)..y_hi {
                        let iy = oy * stride + ky - pad;
                        let line = &src[(oy - oy0) * ow..(oy - oy0 + 1) * ow];
                        let dst = &mut plane[iy * w..(iy + 1) * w];
                        let ix0 = x_lo * stride + kx - pad;
                        if stride == 1 {
                            for (d, &g) in dst[ix0..ix0 + (x_hi - x_lo)].iter_mut().zip(&line[x_lo..x_hi]) {
                                *d = *d + g;
                            }
                        } else {
                            for (j, &g) in line[x_lo..x_hi].iter().enumerate() {
                                let ix = ix0 + j * stride;
                                dst[ix] = dst[ix] + g;
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Range of output positions `o` for which `o * stride + offset - pad` lies in `[0, size)`.
fn valid_range(out: usize, size: usize, stride: usize, offset: usize, pad: usize) -> (usize, usize) {
    let lo = if pad > offset {
        (pad - offset).div_ceil(stride)
    } else {
        0
    };
    let hi = if size + pad > offset {
        ((size - 1 + pad - offset) / stride + 1).min(out)
    } else {
        0
    };
    (lo.min(hi), hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conv(weight: Vec<f64>, shape: [usize; 4], stride: usize, pad: usize) -> Conv2d<f64> {
        let bias = Tensor::zeros(&[shape[0]]);
        Conv2d::from_weights(Tensor::from_vec(&shape, weight).unwrap(), bias, stride, pad).unwrap()
    }

    /// Direct nested-loop convolution, independent of im2col.
    fn naive(layer: &Conv2d<f64>, x: &Tensor<f64>) -> Tensor<f64> {
        let (n, c, h, w) = x.dims4().unwrap();
        let k = layer.kernel;
        let oh = conv_output_size(h, k, layer.stride, layer.pad).unwrap();
        let ow = conv_output_size(w, k, layer.stride, layer.pad).unwrap();
        let mut out = Tensor::zeros(&[n, layer.out_channels, oh, ow]);
        let wt = layer.weight.value.data();
        for s in 0..n {
            for o in 0..layer.out_channels {
                for oy in 0..oh {
                    for ox in 0..ow {
                        let mut acc = layer.bias.value.data()[o];
                        for ch in 0..c {
                            for ky in 0..k {
                                for kx in 0..k {
                                    let iy = (oy * layer.stride + ky) as isize - layer.pad as isize;
                                    let ix = (ox * layer.stride + kx) as isize - layer.pad as isize;
                                    if iy < 0 || ix < 0 || iy >= h as isize || ix >= w as isize {
                                        continue;
                                    }
                                    let xv = x.data()[((s * c + ch) * h + iy as usize) * w + ix as usize];
                                    acc += wt[((o * c + ch) * k + ky) * k + kx] * xv;
                                }
                            }
                        }
                        out.data_mut()[((s * layer.out_channels + o) * oh + oy) * ow + ox] = acc;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn scalar_kernel_scales_input() {
        let layer = conv(vec![2.0], [1, 1, 1, 1], 1, 0);
        let x = Tensor::full(&[1, 1, 2, 2], 1.0);
        let y = layer.forward(&x).unwrap();
        assert_eq!(y.shape(), &[1, 1, 2, 2]);
        assert_eq!(y.data(), &[2.0; 4]);
    }

    #[test]
    fn zero_kernel_annihilates() {
        let layer = conv(vec![0.0; 2 * 3 * 9], [2, 3, 3, 3], 1, 1);
        let x = Tensor::from_vec(&[1, 3, 4, 4], (0..48).map(f64::from).collect()).unwrap();
        assert!(layer.forward(&x).unwrap().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hand_summed_windows() {
        let layer = conv(vec![1.0; 4], [1, 1, 2, 2], 1, 0);
        let x = Tensor::from_vec(&[1, 1, 3, 3], (1..=9).map(f64::from).collect()).unwrap();
        let y = layer.forward(&x).unwrap();
        assert_eq!(y.data(), &[12.0, 16.0, 24.0, 28.0]);
    }

    #[test]
    fn matches_naive_loops_over_geometry_sweep() {
        for k in [1, 3] {
            for stride in [1, 2] {
                for pad in [0, 1] {
                    let c = 2;
                    let weight: Vec<f64> = (0..3 * c * k * k).map(|i| (i as f64 * 0.37).sin()).collect();
                    let mut layer = conv(weight, [3, c, k, k], stride, pad);
                    layer.bias.value.data_mut().copy_from_slice(&[0.1, -0.2, 0.3]);
                    let x = Tensor::from_vec(
                        &[2, c, 5, 6],
                        (0..2 * c * 30).map(|i| (i as f64 * 0.11).cos()).collect(),
                    )
                    .unwrap();
                    let fast = layer.forward(&x).unwrap();
                    let slow = naive(&layer, &x);
                    assert_eq!(fast.shape(), slow.shape(), "k={k} s={stride} p={pad}");
                    let expect_h = (5 + 2 * pad - k) / stride + 1;
                    let expect_w = (6 + 2 * pad - k) / stride + 1;
                    assert_eq!(fast.shape(), &[2, 3, expect_h, expect_w]);
                    for (a, b) in fast.data().iter().zip(slow.data()) {
                        assert!((a - b).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn channel_mismatch_names_dimension() {
        let layer = conv(vec![1.0; 9], [1, 1, 3, 3], 1, 1);
        let err = layer.forward(&Tensor::zeros(&[1, 2, 4, 4])).unwrap_err();
        assert!(err.to_string().contains("channel count"), "{err}");
        let small = conv(vec![1.0; 9], [1, 1, 3, 3], 1, 0);
        assert!(matches!(
            small.forward(&Tensor::zeros(&[1, 1, 2, 2])),
            Err(NetError::SpatialTooSmall { .. })
        ));
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let layer = conv((0..18).map(f64::from).collect(), [1, 2, 3, 3], 1, 1);
        let x = Tensor::full(&[1, 2, 4, 4], 0.5);
        let g = layer.backward(&x, &Tensor::zeros(&[1, 1, 4, 4])).unwrap();
        assert!(g.input.data().iter().all(|&v| v == 0.0));
        assert!(g.weight.data().iter().all(|&v| v == 0.0));
        assert!(g.bias.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pointwise_weight_grad_is_input_upstream_product() {
        let layer = conv(vec![0.7], [1, 1, 1, 1], 1, 0);
        let x = Tensor::from_vec(&[1, 1, 2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let up = Tensor::from_vec(&[1, 1, 2, 2], vec![0.5, -1.0, 2.0, 0.25]).unwrap();
        let g = layer.backward(&x, &up).unwrap();
        let expected: f64 = x.data().iter().zip(up.data()).map(|(a, b)| a * b).sum();
        assert_eq!(g.weight.data(), &[expected]);
        assert_eq!(g.bias.data(), &[1.75]);
        let dx: Vec<f64> = up.data().iter().map(|u| u * 0.7).collect();
        assert_eq!(g.input.data(), dx.as_slice());
    }

    #[test]
    fn upstream_shape_is_checked() {
        let layer = conv(vec![1.0; 9], [1, 1, 3, 3], 1, 1);
        let x = Tensor::zeros(&[1, 1, 4, 4]);
        assert!(layer.backward(&x, &Tensor::zeros(&[1, 1, 3, 3])).is_err());
    }
}
