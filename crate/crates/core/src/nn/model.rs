use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::conv::{ConvCache, ConvFeature, CONV_KERNEL};
use super::layers::{FeedForward, FeedForwardCache, Linear};
use super::mat::{softmax_inplace, Mat};
use crate::error::{Error, Result};
use crate::label::Label;
use crate::scalar::Scalar;
use crate::text::stable_hash;

pub const UNK: &str = "<unk>";

/// Probabilities in (SUPPORTS, REFUTES, NOT ENOUGH INFO) order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntailmentDistribution(pub [f64; 3]);

impl EntailmentDistribution {
    pub fn from_logits(logits: &[f64; 3]) -> Self {
        let mut p = *logits;
        softmax_inplace(&mut p);
        EntailmentDistribution(p)
    }

    pub fn get(&self, label: Label) -> f64 {
        self.0[label.index()]
    }

    /// Ties resolve toward the earlier label.
    pub fn argmax(&self) -> Label {
        let mut best = 0;
        for i in 1..3 {
            if self.0[i] > self.0[best] {
                best = i;
            }
        }
        Label::from_index(best).unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    pub embed_dim: usize,
    pub hidden: usize,
    pub channels: usize,
    pub z_dim: usize,
    pub kernel_size: usize,
    pub encoder_width: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            embed_dim: 50,
            hidden: 64,
            channels: 16,
            z_dim: 32,
            kernel_size: CONV_KERNEL,
            encoder_width: 2,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kernel_size != CONV_KERNEL {
            return Err(Error::Config(format!("conv kernel must be {CONV_KERNEL}")));
        }
        if [self.embed_dim, self.hidden, self.channels, self.z_dim, self.encoder_width].contains(&0) {
            return Err(Error::Config("model dimensions must be positive".into()));
        }
        Ok(())
    }

    pub fn aggregate_input(&self) -> usize {
        2 * self.hidden + self.z_dim
    }
}

/// Token → row of the embedding table. Row 0 is the shared unknown token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    words: Vec<String>,
    lookup: HashMap<String, usize>,
}

impl Vocab {
    pub fn new(words: impl IntoIterator<Item = String>) -> Self {
        let mut list = vec![UNK.to_string()];
        let rest: BTreeSet<String> = words.into_iter().filter(|w| w != UNK).collect();
        list.extend(rest);
        Self::from_list(list)
    }

    pub(crate) fn from_list(words: Vec<String>) -> Self {
        let lookup = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Vocab { words, lookup }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn id(&self, token: &str) -> usize {
        self.lookup.get(token).copied().unwrap_or(0)
    }

    pub fn ids(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params<T> {
    pub embed: Mat<T>,
    pub attend: FeedForward<T>,
    pub compare: FeedForward<T>,
    pub aggregate: Linear<T>,
    pub output: Linear<T>,
    pub conv: ConvFeature<T>,
}

impl<T: Scalar> Params<T> {
    pub fn zeros(config: &ModelConfig, vocab: usize) -> Self {
        let e = config.embed_dim;
        let h = config.hidden;
        Params {
            embed: Mat::zeros(vocab, e),
            attend: FeedForward::zeros(e, h),
            compare: FeedForward::zeros(2 * e, h),
            aggregate: Linear::zeros(config.aggregate_input(), h),
            output: Linear::zeros(h, 3),
            conv: ConvFeature::zeros(config.kernel_size, config.channels, config.encoder_width, config.z_dim),
        }
    }

    /// Embedding rows are seeded from a hash of the token so a word's initial
    /// vector does not depend on vocabulary order.
    pub fn init(config: &ModelConfig, vocab: &Vocab, seed: u64) -> Self {
        let e = config.embed_dim;
        let h = config.hidden;
        let mut data = Vec::with_capacity(vocab.len() * e);
        for w in vocab.words() {
            let mut r = ChaCha8Rng::seed_from_u64(seed ^ stable_hash(w));
            data.extend((0..e).map(|_| T::of(r.gen_range(-0.5..0.5))));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Params {
            embed: Mat::from_vec(vocab.len(), e, data),
            attend: FeedForward::init(e, h, &mut rng),
            compare: FeedForward::init(2 * e, h, &mut rng),
            aggregate: Linear::init(config.aggregate_input(), h, &mut rng),
            output: Linear::init(h, 3, &mut rng),
            conv: ConvFeature::init(config.kernel_size, config.channels, config.encoder_width, config.z_dim, &mut rng),
        }
    }

    /// Parameter tensors in a fixed order, shared by the optimizer, the
    /// gradient checker and the model file.
    pub fn groups(&self) -> Vec<(&'static str, &[T])> {
        vec![
            ("embed", self.embed.data()),
            ("attend.l1.w", self.attend.l1.w.data()),
            ("attend.l1.b", &self.attend.l1.b),
            ("attend.l2.w", self.attend.l2.w.data()),
            ("attend.l2.b", &self.attend.l2.b),
            ("compare.l1.w", self.compare.l1.w.data()),
            ("compare.l1.b", &self.compare.l1.b),
            ("compare.l2.w", self.compare.l2.w.data()),
            ("compare.l2.b", &self.compare.l2.b),
            ("aggregate.w", self.aggregate.w.data()),
            ("aggregate.b", &self.aggregate.b),
            ("output.w", self.output.w.data()),
            ("output.b", &self.output.b),
            ("conv.kernel", &self.conv.kernel),
            ("conv.bias", &self.conv.bias),
            ("encoder.w", self.conv.encoder.w.data()),
            ("encoder.b", &self.conv.encoder.b),
        ]
    }

    pub fn groups_mut(&mut self) -> Vec<(&'static str, &mut [T])> {
        vec![
            ("embed", self.embed.data_mut()),
            ("attend.l1.w", self.attend.l1.w.data_mut()),
            ("attend.l1.b", &mut self.attend.l1.b),
            ("attend.l2.w", self.attend.l2.w.data_mut()),
            ("attend.l2.b", &mut self.attend.l2.b),
            ("compare.l1.w", self.compare.l1.w.data_mut()),
            ("compare.l1.b", &mut self.compare.l1.b),
            ("compare.l2.w", self.compare.l2.w.data_mut()),
            ("compare.l2.b", &mut self.compare.l2.b),
            ("aggregate.w", self.aggregate.w.data_mut()),
            ("aggregate.b", &mut self.aggregate.b),
            ("output.w", self.output.w.data_mut()),
            ("output.b", &mut self.output.b),
            ("conv.kernel", &mut self.conv.kernel),
            ("conv.bias", &mut self.conv.bias),
            ("encoder.w", self.conv.encoder.w.data_mut()),
            ("encoder.b", &mut self.conv.encoder.b),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.groups().iter().all(|(_, g)| g.iter().all(|v| v.is_finite()))
    }

    /// self += scale · other
    pub fn axpy(&mut self, scale: T, other: &Params<T>) {
        for ((_, dst), (_, src)) in self.groups_mut().into_iter().zip(other.groups()) {
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }
}

/// Whether the convolution branch may run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvGate {
    /// Runs when both sides reach the kernel size.
    Auto,
    /// Always contributes a zero vector.
    Off,
}

pub(crate) struct Forward<T> {
    a_ids: Vec<usize>,
    b_ids: Vec<usize>,
    a: Mat<T>,
    b: Mat<T>,
    fa: FeedForwardCache<T>,
    fb: FeedForwardCache<T>,
    p_row: Mat<T>,
    p_col: Mat<T>,
    ga: FeedForwardCache<T>,
    gb: FeedForwardCache<T>,
    pub(crate) conv: Option<ConvCache<T>>,
    v: Mat<T>,
    h: Mat<T>,
    pub(crate) logits: [T; 3],
}

/// Decomposable attention with a convolution branch over the attention matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EntailmentModel<T> {
    pub config: ModelConfig,
    pub vocab: Vocab,
    pub params: Params<T>,
}

impl<T: Scalar> EntailmentModel<T> {
    pub fn new(config: ModelConfig, vocab: Vocab, seed: u64) -> Result<Self> {
        config.validate()?;
        let params = Params::init(&config, &vocab, seed);
        Ok(EntailmentModel { config, vocab, params })
    }

    pub fn zero_grad(&self) -> Params<T> {
        Params::zeros(&self.config, self.vocab.len())
    }

    pub(crate) fn forward(&self, a_ids: &[usize], b_ids: &[usize], gate: ConvGate) -> Forward<T> {
        self.forward_impl(a_ids, b_ids, gate, None)
    }

    fn forward_impl(&self, a_ids: &[usize], b_ids: &[usize], gate: ConvGate, z_fixed: Option<&[T]>) -> Forward<T> {
        let p = &self.params;
        let a = p.embed.gather_rows(a_ids);
        let b = p.embed.gather_rows(b_ids);
        let fa = p.attend.forward(a.clone());
        let fb = p.attend.forward(b.clone());
        let e = fa.out.matmul_bt(&fb.out);
        let p_row = e.softmax_rows();
        let p_col = e.softmax_cols();
        let beta = p_row.matmul(&b);
        let alpha = p_col.matmul_at(&a);
        let ga = p.compare.forward(a.hcat(&beta));
        let gb = p.compare.forward(b.hcat(&alpha));
        let zeros = || vec![T::zero(); self.config.z_dim];
        let (z, conv) = match (z_fixed, gate) {
            (Some(z), _) => (z.to_vec(), None),
            (None, ConvGate::Auto) => match p.conv.forward(&e) {
                Some((z, cache)) => (z, Some(cache)),
                None => (zeros(), None),
            },
            (None, ConvGate::Off) => (zeros(), None),
        };
        let mut v = ga.out.col_sums();
        v.extend(gb.out.col_sums());
        v.extend(z);
        let v = Mat::row_vector(v);
        let mut h = p.aggregate.forward(&v);
        h.relu_inplace();
        let out = p.output.forward(&h);
        let logits = [out.get(0, 0), out.get(0, 1), out.get(0, 2)];
        Forward {
            a_ids: a_ids.to_vec(),
            b_ids: b_ids.to_vec(),
            a,
            b,
            fa,
            fb,
            p_row,
            p_col,
            ga,
            gb,
            conv,
            v,
            h,
            logits,
        }
    }

    /// Cross-entropy of the forward pass against `label`.
    pub(crate) fn loss_of(fwd: &Forward<T>, label: Label) -> T {
        let max = fwd.logits.iter().fold(T::neg_infinity(), |m, &x| m.max(x));
        let lse = fwd.logits.iter().map(|&x| (x - max).exp()).fold(T::zero(), |s, x| s + x).ln() + max;
        lse - fwd.logits[label.index()]
    }

    /// Accumulates dLoss/dparams into `grad`.
    pub(crate) fn backward(&self, fwd: &Forward<T>, label: Label, grad: &mut Params<T>) {
        let p = &self.params;
        let h_dim = self.config.hidden;
        let e_dim = self.config.embed_dim;

        let mut probs = fwd.logits;
        softmax_inplace(&mut probs);
        probs[label.index()] -= T::one();
        let dlogits = Mat::row_vector(probs.to_vec());

        let mut dh = p.output.backward(&fwd.h, &dlogits, &mut grad.output);
        dh.mask_relu(&fwd.h);
        let dv = p.aggregate.backward(&fwd.v, &dh, &mut grad.aggregate);
        let dv = dv.row(0);
        let (dv1, rest) = dv.split_at(h_dim);
        let (dv2, dz) = rest.split_at(h_dim);

        let broadcast = |rows: usize, g: &[T]| {
            let mut m = Mat::zeros(rows, g.len());
            for r in 0..rows {
                m.row_mut(r).copy_from_slice(g);
            }
            m
        };
        let m = fwd.a.rows();
        let n = fwd.b.rows();
        let dga_in = p.compare.backward(&fwd.ga, &broadcast(m, dv1), &mut grad.compare);
        let dgb_in = p.compare.backward(&fwd.gb, &broadcast(n, dv2), &mut grad.compare);
        let (mut da, dbeta) = dga_in.split_cols(e_dim);
        let (mut db, dalpha) = dgb_in.split_cols(e_dim);

        // beta = p_row · b
        let dp_row = dbeta.matmul_bt(&fwd.b);
        db.add_assign(&fwd.p_row.matmul_at(&dbeta));
        // alpha = p_colᵀ · a
        let dp_col = fwd.a.matmul_bt(&dalpha);
        da.add_assign(&fwd.p_col.matmul(&dalpha));

        let mut de = Mat::zeros(m, n);
        for i in 0..m {
            let dot: T = (0..n).fold(T::zero(), |s, j| s + fwd.p_row.get(i, j) * dp_row.get(i, j));
            for j in 0..n {
                de.set(i, j, fwd.p_row.get(i, j) * (dp_row.get(i, j) - dot));
            }
        }
        for j in 0..n {
            let dot: T = (0..m).fold(T::zero(), |s, i| s + fwd.p_col.get(i, j) * dp_col.get(i, j));
            for i in 0..m {
                let cur = de.get(i, j);
                de.set(i, j, cur + fwd.p_col.get(i, j) * (dp_col.get(i, j) - dot));
            }
        }
        if let Some(cache) = &fwd.conv {
            de.add_assign(&p.conv.backward(cache, dz, &mut grad.conv));
        }

        // e = fa · fbᵀ
        let dfa = de.matmul(&fwd.fb.out);
        let dfb = de.matmul_at(&fwd.fa.out);
        da.add_assign(&p.attend.backward(&fwd.fa, &dfa, &mut grad.attend));
        db.add_assign(&p.attend.backward(&fwd.fb, &dfb, &mut grad.attend));

        grad.embed.scatter_add_rows(&fwd.a_ids, &da);
        grad.embed.scatter_add_rows(&fwd.b_ids, &db);
    }

    fn check_inputs(premise: &[String], hypothesis: &[String]) -> Result<()> {
        if premise.is_empty() || hypothesis.is_empty() {
            return Err(Error::Input("premise and hypothesis must be non-empty".into()));
        }
        Ok(())
    }

    pub fn predict(&self, premise: &[String], hypothesis: &[String]) -> Result<EntailmentDistribution> {
        self.predict_gated(premise, hypothesis, ConvGate::Auto)
    }

    pub fn predict_gated(
        &self,
        premise: &[String],
        hypothesis: &[String],
        gate: ConvGate,
    ) -> Result<EntailmentDistribution> {
        Self::check_inputs(premise, hypothesis)?;
        let fwd = self.forward(&self.vocab.ids(premise), &self.vocab.ids(hypothesis), gate);
        Ok(EntailmentDistribution::from_logits(&fwd.logits.map(Scalar::as_f64)))
    }

    /// Runs the network with an explicit convolution feature vector in place
    /// of the computed one.
    pub fn predict_with_feature(&self, premise: &[String], hypothesis: &[String], z: &[T]) -> Result<EntailmentDistribution> {
        Self::check_inputs(premise, hypothesis)?;
        if z.len() != self.config.z_dim {
            return Err(Error::Input(format!("feature must have {} entries", self.config.z_dim)));
        }
        let fwd = self.forward_impl(&self.vocab.ids(premise), &self.vocab.ids(hypothesis), ConvGate::Off, Some(z));
        Ok(EntailmentDistribution::from_logits(&fwd.logits.map(Scalar::as_f64)))
    }

    /// The m×n attention matrix F(a)·F(b)ᵀ.
    pub fn attention_matrix(&self, premise: &[String], hypothesis: &[String]) -> Mat<T> {
        let p = &self.params;
        let fa = p.attend.forward(p.embed.gather_rows(&self.vocab.ids(premise)));
        let fb = p.attend.forward(p.embed.gather_rows(&self.vocab.ids(hypothesis)));
        fa.out.matmul_bt(&fb.out)
    }

    /// Number of conv positions the pair produces (0 when gated off).
    pub fn conv_positions(&self, premise: &[String], hypothesis: &[String]) -> usize {
        let fwd = self.forward(&self.vocab.ids(premise), &self.vocab.ids(hypothesis), ConvGate::Auto);
        fwd.conv.as_ref().map_or(0, ConvCache::positions)
    }

    /// Loss and gradient for one example at the current parameters.
    pub fn loss_and_grad(&self, premise: &[String], hypothesis: &[String], label: Label, grad: &mut Params<T>) -> Result<T> {
        Self::check_inputs(premise, hypothesis)?;
        let fwd = self.forward(&self.vocab.ids(premise), &self.vocab.ids(hypothesis), ConvGate::Auto);
        self.backward(&fwd, label, grad);
        Ok(Self::loss_of(&fwd, label))
    }

    pub fn loss(&self, premise: &[String], hypothesis: &[String], label: Label) -> Result<T> {
        Self::check_inputs(premise, hypothesis)?;
        let fwd = self.forward(&self.vocab.ids(premise), &self.vocab.ids(hypothesis), ConvGate::Auto);
        Ok(Self::loss_of(&fwd, label))
    }

    /// Casts every parameter to another precision.
    pub fn cast<U: Scalar>(&self) -> EntailmentModel<U> {
        let mut out = EntailmentModel {
            config: self.config,
            vocab: self.vocab.clone(),
            params: Params::zeros(&self.config, self.vocab.len()),
        };
        for ((_, dst), (_, src)) in out.params.groups_mut().into_iter().zip(self.params.groups()) {
            for (d, &s) in dst.iter_mut().zip(src) {
                *d = U::of(s.as_f64());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    fn small() -> ModelConfig {
        ModelConfig {
            embed_dim: 8,
            hidden: 8,
            channels: 4,
            z_dim: 4,
            ..Default::default()
        }
    }

    fn words(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{}", i % 7)).collect()
    }

    fn model() -> EntailmentModel<f64> {
        EntailmentModel::new(small(), Vocab::new(words(7)), 11).unwrap()
    }

    #[test]
    fn rejects_bad_kernel() {
        let cfg = ModelConfig { kernel_size: 5, ..small() };
        assert!(EntailmentModel::<f64>::new(cfg, Vocab::new(vec![]), 1).is_err());
    }

    #[test]
    fn distribution_is_normalized() {
        let m = model();
        for (a, b) in [(1, 1), (3, 20), (15, 12), (30, 30)] {
            let d = m.predict(&words(a), &words(b)).unwrap();
            assert!((d.0.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(d.0.iter().all(|&p| p >= 0.0));
        }
        let f32m: EntailmentModel<f32> = m.cast();
        let d = f32m.predict(&words(13), &words(14)).unwrap();
        assert!((d.0.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_input_is_error() {
        let m = model();
        assert!(m.predict(&[], &words(3)).is_err());
        assert!(m.predict(&words(3), &[]).is_err());
    }

    #[test]
    fn singleton_attention() {
        let m = model();
        let fwd = m.forward(&[1], &[2], ConvGate::Auto);
        assert_eq!(fwd.p_row.data(), &[1.0]);
        assert_eq!(fwd.p_col.data(), &[1.0]);
        // beta_1 = b_1 and alpha_1 = a_1
        let (_, beta) = fwd.ga.x.split_cols(8);
        assert_eq!(beta, fwd.b);
        let (_, alpha) = fwd.gb.x.split_cols(8);
        assert_eq!(alpha, fwd.a);
    }

    #[test]
    fn identical_inputs_symmetric_attention() {
        let m = model();
        let toks = tokenize("w1 w2 w3 w4");
        let e = m.attention_matrix(&toks, &toks);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(e.get(i, j), e.get(j, i));
            }
        }
    }

    #[test]
    fn attention_rows_sum_to_one() {
        let m = model();
        let fwd = m.forward(&[1, 2, 3], &[4, 5, 6, 0], ConvGate::Auto);
        for i in 0..3 {
            let s: f64 = fwd.p_row.row(i).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        for j in 0..4 {
            let s: f64 = (0..3).map(|i| fwd.p_col.get(i, j)).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn short_side_equals_zero_feature() {
        let m = model();
        let z = vec![0.0; 4];
        for (a, b) in [(5, 30), (30, 11), (1, 1)] {
            let auto = m.predict(&words(a), &words(b)).unwrap();
            let zero = m.predict_with_feature(&words(a), &words(b), &z).unwrap();
            assert_eq!(auto.0.map(f64::to_bits), zero.0.map(f64::to_bits));
        }
    }

    #[test]
    fn conv_position_counts() {
        let m = model();
        assert_eq!(m.conv_positions(&words(12), &words(12)), 1);
        assert_eq!(m.conv_positions(&words(14), &words(13)), 6);
        assert_eq!(m.conv_positions(&words(5), &words(30)), 0);
    }

    #[test]
    fn unknown_tokens_share_row_zero() {
        let v = Vocab::new(vec!["b".into(), "a".into(), "a".into()]);
        assert_eq!(v.words(), &["<unk>", "a", "b"]);
        assert_eq!(v.id("zzz"), 0);
        assert_eq!(v.id("b"), 2);
    }

    #[test]
    fn argmax_ties_prefer_earlier_label() {
        assert_eq!(EntailmentDistribution([0.4, 0.4, 0.2]).argmax(), Label::Supports);
        assert_eq!(EntailmentDistribution([0.2, 0.4, 0.4]).argmax(), Label::Refutes);
        assert_eq!(EntailmentDistribution([0.2, 0.3, 0.5]).argmax(), Label::NotEnoughInfo);
    }
}
