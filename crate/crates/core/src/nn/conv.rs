//! Convolution over the attention matrix, reduced to a fixed-length vector.
//!
//! A `k × k` kernel with `channels` output maps slides over the m×n matrix
//! (stride 1, no padding). Each spatial position becomes one `channels`-wide
//! vector, taken in row-major order. A 1-D convolution of `width` positions
//! runs over that sequence and max-over-time pooling yields the output.
//! Sequences shorter than `width` are zero-padded on the right.

use rand::Rng;

use super::layers::Linear;
use super::mat::Mat;
use crate::scalar::Scalar;

pub const CONV_KERNEL: usize = 12;

/// Number of spatial positions of a valid `k × k` convolution over m×n.
pub fn conv_positions(m: usize, n: usize, k: usize) -> usize {
    if m >= k && n >= k {
        (m - k + 1) * (n - k + 1)
    } else {
        0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvFeature<T> {
    pub kernel_size: usize,
    pub channels: usize,
    pub width: usize,
    /// channels × k × k
    pub kernel: Vec<T>,
    pub bias: Vec<T>,
    /// (width · channels) → output dim
    pub encoder: Linear<T>,
}

#[derive(Debug, Clone)]
pub struct ConvCache<T> {
    input: Mat<T>,
    out_cols: usize,
    positions: Mat<T>,
    windows: Mat<T>,
    activations: Mat<T>,
    argmax: Vec<usize>,
}

impl<T: Scalar> ConvCache<T> {
    pub fn positions(&self) -> usize {
        self.positions.rows()
    }
}

impl<T: Scalar> ConvFeature<T> {
    pub fn zeros(kernel_size: usize, channels: usize, width: usize, out: usize) -> Self {
        ConvFeature {
            kernel_size,
            channels,
            width,
            kernel: vec![T::zero(); channels * kernel_size * kernel_size],
            bias: vec![T::zero(); channels],
            encoder: Linear::zeros(width * channels, out),
        }
    }

    pub fn init<R: Rng>(kernel_size: usize, channels: usize, width: usize, out: usize, rng: &mut R) -> Self {
        let fan = (kernel_size * kernel_size) as f64;
        let s = (6.0 / (fan + channels as f64)).sqrt();
        ConvFeature {
            kernel_size,
            channels,
            width,
            kernel: (0..channels * kernel_size * kernel_size)
                .map(|_| T::of(rng.gen_range(-s..s)))
                .collect(),
            bias: vec![T::zero(); channels],
            encoder: Linear::init(width * channels, out, rng),
        }
    }

    pub fn output_dim(&self) -> usize {
        self.encoder.output_dim()
    }

    /// None when either side is shorter than the kernel.
    pub fn forward(&self, e: &Mat<T>) -> Option<(Vec<T>, ConvCache<T>)> {
        let k = self.kernel_size;
        let (m, n) = (e.rows(), e.cols());
        if m < k || n < k {
            return None;
        }
        let (out_rows, out_cols) = (m - k + 1, n - k + 1);
        let c_n = self.channels;
        let mut positions = Mat::zeros(out_rows * out_cols, c_n);
        for p in 0..out_rows {
            for q in 0..out_cols {
                let pos = p * out_cols + q;
                for c in 0..c_n {
                    let mut acc = self.bias[c];
                    for u in 0..k {
                        let krow = &self.kernel[(c * k + u) * k..(c * k + u + 1) * k];
                        let erow = &e.row(p + u)[q..q + k];
                        for (&a, &b) in krow.iter().zip(erow) {
                            acc += a * b;
                        }
                    }
                    positions.set(pos, c, acc.max(T::zero()));
                }
            }
        }
        let windows = self.windows(&positions);
        let mut activations = self.encoder.forward(&windows);
        activations.relu_inplace();
        let z_dim = self.output_dim();
        let mut z = vec![T::zero(); z_dim];
        let mut argmax = vec![0; z_dim];
        for d in 0..z_dim {
            let mut best = activations.get(0, d);
            for t in 1..activations.rows() {
                let v = activations.get(t, d);
                if v > best {
                    best = v;
                    argmax[d] = t;
                }
            }
            z[d] = best;
        }
        Some((
            z,
            ConvCache {
                input: e.clone(),
                out_cols,
                positions,
                windows,
                activations,
                argmax,
            },
        ))
    }

    fn windows(&self, positions: &Mat<T>) -> Mat<T> {
        let c_n = self.channels;
        let len = positions.rows().max(self.width);
        let count = len - self.width + 1;
        let mut w = Mat::zeros(count, self.width * c_n);
        for t in 0..count {
            for off in 0..self.width {
                let pos = t + off;
                if pos < positions.rows() {
                    w.row_mut(t)[off * c_n..(off + 1) * c_n].copy_from_slice(positions.row(pos));
                }
            }
        }
        w
    }

    /// Accumulates into `grad`, returns dL/d(attention matrix).
    pub fn backward(&self, cache: &ConvCache<T>, dz: &[T], grad: &mut ConvFeature<T>) -> Mat<T> {
        let k = self.kernel_size;
        let c_n = self.channels;
        let mut du = Mat::zeros(cache.activations.rows(), cache.activations.cols());
        for (d, &t) in cache.argmax.iter().enumerate() {
            du.set(t, d, dz[d]);
        }
        du.mask_relu(&cache.activations);
        let dwin = self.encoder.backward(&cache.windows, &du, &mut grad.encoder);
        let p_n = cache.positions.rows();
        let mut ds = Mat::zeros(p_n, c_n);
        for t in 0..dwin.rows() {
            for off in 0..self.width {
                let pos = t + off;
                if pos < p_n {
                    let src = &dwin.row(t)[off * c_n..(off + 1) * c_n];
                    for (a, &b) in ds.row_mut(pos).iter_mut().zip(src) {
                        *a += b;
                    }
                }
            }
        }
        ds.mask_relu(&cache.positions);
        let e = &cache.input;
        let mut de = Mat::zeros(e.rows(), e.cols());
        for pos in 0..p_n {
            let (p, q) = (pos / cache.out_cols, pos % cache.out_cols);
            for c in 0..c_n {
                let g = ds.get(pos, c);
                if g == T::zero() {
                    continue;
                }
                grad.bias[c] += g;
                for u in 0..k {
                    let base = (c * k + u) * k;
                    for v in 0..k {
                        grad.kernel[base + v] += g * e.get(p + u, q + v);
                        let cur = de.get(p + u, q + v);
                        de.set(p + u, q + v, cur + g * self.kernel[base + v]);
                    }
                }
            }
        }
        de
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Slides a k×k window by brute force and counts placements.
    fn sliding_window_count(m: usize, n: usize, k: usize) -> usize {
        let mut count = 0;
        for top in 0..m {
            for left in 0..n {
                if top + k <= m && left + k <= n {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn position_count_law() {
        assert_eq!(conv_positions(12, 12, 12), 1);
        assert_eq!(conv_positions(14, 13, 12), 6);
        assert_eq!(conv_positions(5, 30, 12), 0);
        for m in 1..30 {
            for n in 1..30 {
                assert_eq!(conv_positions(m, n, 12), sliding_window_count(m, n, 12));
            }
        }
    }

    #[test]
    fn forward_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let conv: ConvFeature<f64> = ConvFeature::init(12, 3, 2, 4, &mut rng);
        let e = Mat::from_vec(14, 13, (0..14 * 13).map(|i| (i as f64 * 0.37).sin()).collect());
        let (z, cache) = conv.forward(&e).unwrap();
        assert_eq!(z.len(), 4);
        assert_eq!(cache.positions(), 6);
        let (_, cache) = conv.forward(&Mat::zeros(12, 12)).unwrap();
        assert_eq!(cache.positions(), 1);
        assert!(conv.forward(&Mat::zeros(11, 40)).is_none());
    }
}
