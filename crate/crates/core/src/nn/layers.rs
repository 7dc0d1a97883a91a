use rand::Rng;

use super::mat::Mat;
use crate::scalar::Scalar;

/// y = x·W + b with W stored input-major (in × out).
#[derive(Debug, Clone, PartialEq)]
pub struct Linear<T> {
    pub w: Mat<T>,
    pub b: Vec<T>,
}

impl<T: Scalar> Linear<T> {
    pub fn zeros(input: usize, output: usize) -> Self {
        Linear {
            w: Mat::zeros(input, output),
            b: vec![T::zero(); output],
        }
    }

    /// Glorot-uniform weights, zero bias.
    pub fn init<R: Rng>(input: usize, output: usize, rng: &mut R) -> Self {
        let s = (6.0 / (input + output) as f64).sqrt();
        let data = (0..input * output).map(|_| T::of(rng.gen_range(-s..s))).collect();
        Linear {
            w: Mat::from_vec(input, output, data),
            b: vec![T::zero(); output],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn forward(&self, x: &Mat<T>) -> Mat<T> {
        let mut y = x.matmul(&self.w);
        y.add_row(&self.b);
        y
    }

    /// Accumulates parameter gradients into `grad`, returns dL/dx.
    pub fn backward(&self, x: &Mat<T>, dy: &Mat<T>, grad: &mut Linear<T>) -> Mat<T> {
        grad.w.add_assign(&x.matmul_at(dy));
        for (g, d) in grad.b.iter_mut().zip(dy.col_sums()) {
            *g += d;
        }
        dy.matmul_bt(&self.w)
    }
}

/// Two ReLU layers, the shape of the attend and compare networks.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedForward<T> {
    pub l1: Linear<T>,
    pub l2: Linear<T>,
}

#[derive(Debug, Clone)]
pub struct FeedForwardCache<T> {
    pub x: Mat<T>,
    pub h: Mat<T>,
    pub out: Mat<T>,
}

impl<T: Scalar> FeedForward<T> {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        FeedForward {
            l1: Linear::zeros(input, hidden),
            l2: Linear::zeros(hidden, hidden),
        }
    }

    pub fn init<R: Rng>(input: usize, hidden: usize, rng: &mut R) -> Self {
        FeedForward {
            l1: Linear::init(input, hidden, rng),
            l2: Linear::init(hidden, hidden, rng),
        }
    }

    pub fn forward(&self, x: Mat<T>) -> FeedForwardCache<T> {
        let mut h = self.l1.forward(&x);
        h.relu_inplace();
        let mut out = self.l2.forward(&h);
        out.relu_inplace();
        FeedForwardCache { x, h, out }
    }

    pub fn backward(&self, cache: &FeedForwardCache<T>, dout: &Mat<T>, grad: &mut FeedForward<T>) -> Mat<T> {
        let mut d = dout.clone();
        d.mask_relu(&cache.out);
        let mut dh = self.l2.backward(&cache.h, &d, &mut grad.l2);
        dh.mask_relu(&cache.h);
        self.l1.backward(&cache.x, &dh, &mut grad.l1)
    }
}
