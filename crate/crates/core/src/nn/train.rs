use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::data::TrainingPair;
use super::model::{ConvGate, EntailmentModel, ModelConfig, Vocab};
use crate::error::{Error, Result};
use crate::label::Label;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            epochs: 10,
            batch_size: 16,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub model: EntailmentModel<T>,
    /// Mean training loss per epoch, measured during the epoch.
    pub loss_trace: Vec<f64>,
}

/// Builds the vocabulary from `pairs`, initializes a model and fits it.
pub fn train<T: Scalar>(pairs: &[TrainingPair], config: ModelConfig, hyper: &TrainConfig) -> Result<TrainOutcome<T>> {
    for label in Label::ALL {
        if !pairs.iter().any(|p| p.label == label) {
            return Err(Error::Input(format!("no training pairs labeled {label}")));
        }
    }
    let vocab = Vocab::new(
        pairs
            .iter()
            .flat_map(|p| p.premise.iter().chain(&p.hypothesis))
            .cloned(),
    );
    let mut model = EntailmentModel::new(config, vocab, hyper.seed)?;
    let loss_trace = fit(&mut model, pairs, hyper)?;
    Ok(TrainOutcome { model, loss_trace })
}

/// Plain minibatch SGD on mean cross-entropy. Examples within a batch are
/// accumulated in order on one thread so results are bit-reproducible.
pub fn fit<T: Scalar>(model: &mut EntailmentModel<T>, pairs: &[TrainingPair], hyper: &TrainConfig) -> Result<Vec<f64>> {
    if hyper.batch_size == 0 || hyper.learning_rate.is_nan() || hyper.learning_rate <= 0.0 {
        return Err(Error::Config("batch size and learning rate must be positive".into()));
    }
    if let Some(p) = pairs.iter().find(|p| p.premise.is_empty() || p.hypothesis.is_empty()) {
        return Err(Error::Input(format!("empty training pair {p:?}")));
    }
    let encoded: Vec<(Vec<usize>, Vec<usize>, Label)> = pairs
        .iter()
        .map(|p| (model.vocab.ids(&p.premise), model.vocab.ids(&p.hypothesis), p.label))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..encoded.len()).collect();
    let mut trace = Vec::with_capacity(hyper.epochs);
    for epoch in 0..hyper.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(hyper.batch_size) {
            let mut grad = model.zero_grad();
            for &i in batch {
                let (a, b, label) = &encoded[i];
                let fwd = model.forward(a, b, ConvGate::Auto);
                total += EntailmentModel::loss_of(&fwd, *label).as_f64();
                model.backward(&fwd, *label, &mut grad);
            }
            if !total.is_finite() {
                return Err(Error::Diverged { epoch, loss: total });
            }
            let step = T::of(-hyper.learning_rate / batch.len() as f64);
            model.params.axpy(step, &grad);
            if !model.params.is_finite() {
                return Err(Error::Diverged { epoch, loss: f64::NAN });
            }
        }
        trace.push(total / encoded.len().max(1) as f64);
    }
    Ok(trace)
}

/// Fraction of pairs whose argmax prediction equals the gold label.
pub fn accuracy<T: Scalar>(model: &EntailmentModel<T>, pairs: &[TrainingPair]) -> Result<f64> {
    let mut correct = 0;
    for p in pairs {
        if model.predict(&p.premise, &p.hypothesis)?.argmax() == p.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / pairs.len().max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::data::synthetic_pairs;
    use crate::nn::model::Params;

    fn small() -> ModelConfig {
        ModelConfig {
            embed_dim: 8,
            hidden: 8,
            channels: 2,
            z_dim: 4,
            ..Default::default()
        }
    }

    #[test]
    fn zero_epochs_keeps_initialization() {
        let pairs = synthetic_pairs(30, 5);
        let hyper = TrainConfig { epochs: 0, seed: 9, ..Default::default() };
        let out = train::<f64>(&pairs, small(), &hyper).unwrap();
        assert!(out.loss_trace.is_empty());
        assert_eq!(out.model.params, Params::init(&small(), &out.model.vocab, 9));
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let pairs = synthetic_pairs(30, 5);
        let hyper = TrainConfig { epochs: 3, seed: 4, ..Default::default() };
        let a = train::<f64>(&pairs, small(), &hyper).unwrap();
        let b = train::<f64>(&pairs, small(), &hyper).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.loss_trace, b.loss_trace);
    }

    #[test]
    fn requires_every_label() {
        let pairs: Vec<_> = synthetic_pairs(30, 5)
            .into_iter()
            .filter(|p| p.label != Label::Refutes)
            .collect();
        assert!(matches!(train::<f64>(&pairs, small(), &TrainConfig::default()), Err(Error::Input(_))));
    }

    #[test]
    fn huge_learning_rate_diverges() {
        let pairs = synthetic_pairs(30, 5);
        let hyper = TrainConfig { learning_rate: 1e30, epochs: 5, ..Default::default() };
        assert!(matches!(train::<f64>(&pairs, small(), &hyper), Err(Error::Diverged { .. })));
    }

    #[test]
    fn full_batch_loss_is_non_increasing() {
        let pairs = synthetic_pairs(200, 2);
        let hyper = TrainConfig { learning_rate: 0.02, epochs: 25, batch_size: 200, seed: 1 };
        let out = train::<f64>(&pairs, small(), &hyper).unwrap();
        for w in out.loss_trace.windows(2) {
            assert!(w[1] <= w[0], "loss rose: {:?}", out.loss_trace);
        }
    }
}
