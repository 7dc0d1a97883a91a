//! Central finite-difference check of the analytic gradient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::conv::CONV_KERNEL;
use super::data::TrainingPair;
use super::model::{EntailmentModel, ModelConfig, Vocab};
use crate::error::Result;
use crate::label::Label;

/// Denominator floor for the relative error, so entries where both
/// gradients are ~0 are judged on absolute error.
pub const REL_FLOOR: f64 = 1e-6;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupError {
    pub name: &'static str,
    pub entries: usize,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradCheckReport {
    pub epsilon: f64,
    pub conv_active: bool,
    pub groups: Vec<GroupError>,
    pub max_rel_error: f64,
    /// Largest |analytic gradient| over the conv kernel, bias and encoder.
    pub conv_grad_max_abs: f64,
}

const CONV_GROUPS: [&str; 4] = ["conv.kernel", "conv.bias", "encoder.w", "encoder.b"];

/// Checks every parameter of `model` on one example.
pub fn gradient_check(model: &EntailmentModel<f64>, pair: &TrainingPair, epsilon: f64) -> Result<GradCheckReport> {
    let mut grad = model.zero_grad();
    model.loss_and_grad(&pair.premise, &pair.hypothesis, pair.label, &mut grad)?;
    let conv_active = model.conv_positions(&pair.premise, &pair.hypothesis) > 0;

    let mut probe = model.clone();
    let mut groups = Vec::new();
    let mut conv_grad_max_abs: f64 = 0.0;
    let analytic = grad.groups();
    for (gi, (name, g)) in analytic.iter().enumerate() {
        let mut worst: f64 = 0.0;
        for (j, &a) in g.iter().enumerate() {
            let orig = probe.params.groups_mut()[gi].1[j];
            probe.params.groups_mut()[gi].1[j] = orig + epsilon;
            let up = probe.loss(&pair.premise, &pair.hypothesis, pair.label)?;
            probe.params.groups_mut()[gi].1[j] = orig - epsilon;
            let down = probe.loss(&pair.premise, &pair.hypothesis, pair.label)?;
            probe.params.groups_mut()[gi].1[j] = orig;
            let numeric = (up - down) / (2.0 * epsilon);
            worst = worst.max(relative_error(a, numeric));
            if CONV_GROUPS.contains(name) {
                conv_grad_max_abs = conv_grad_max_abs.max(a.abs());
            }
        }
        groups.push(GroupError {
            name,
            entries: g.len(),
            max_rel_error: worst,
        });
    }
    let max_rel_error = groups.iter().map(|g| g.max_rel_error).fold(0.0, f64::max);
    Ok(GradCheckReport {
        epsilon,
        conv_active,
        groups,
        max_rel_error,
        conv_grad_max_abs,
    })
}

/// The small configuration used for checking.
pub fn check_config() -> ModelConfig {
    ModelConfig {
        embed_dim: 8,
        hidden: 8,
        channels: 4,
        z_dim: 4,
        ..Default::default()
    }
}

/// A random model and example. With `conv` both sides reach the kernel
/// size; without it at least one side is shorter. Biases are drawn away
/// from zero so ReLU units do not sit exactly on their kink.
pub fn random_case(seed: u64, conv: bool) -> (EntailmentModel<f64>, TrainingPair) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words: Vec<String> = (0..10).map(|i| format!("v{i}")).collect();
    let mut model = EntailmentModel::new(check_config(), Vocab::new(words.clone()), seed)
        .expect("check config is valid");
    for (name, g) in model.params.groups_mut() {
        if name.ends_with(".b") || name == "conv.bias" {
            for v in g.iter_mut() {
                *v = rng.gen_range(-0.1..0.1);
            }
        }
    }
    let k = CONV_KERNEL;
    let (m, n) = if conv {
        (rng.gen_range(k..k + 4), rng.gen_range(k..k + 4))
    } else if rng.gen_bool(0.5) {
        (rng.gen_range(2..k), rng.gen_range(2..k + 6))
    } else {
        (rng.gen_range(2..k + 6), rng.gen_range(2..k))
    };
    let mut draw = |len: usize| -> Vec<String> { (0..len).map(|_| words[rng.gen_range(0..words.len())].clone()).collect() };
    let premise = draw(m);
    let hypothesis = draw(n);
    let label = Label::ALL[rng.gen_range(0..3)];
    (model, TrainingPair { premise, hypothesis, label })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conv_path_matches_finite_differences() {
        let (model, pair) = random_case(3, true);
        let r = gradient_check(&model, &pair, 1e-5).unwrap();
        assert!(r.conv_active);
        assert!(r.max_rel_error < 1e-4, "{r:#?}");
        assert!(r.conv_grad_max_abs > 0.0);
    }

    #[test]
    fn gated_path_has_zero_conv_gradient() {
        let (model, pair) = random_case(4, false);
        let r = gradient_check(&model, &pair, 1e-5).unwrap();
        assert!(!r.conv_active);
        assert_eq!(r.conv_grad_max_abs, 0.0);
        assert!(r.max_rel_error < 1e-4, "{r:#?}");
    }

    #[test]
    fn smaller_step_stays_within_an_order_of_magnitude() {
        // roundoff grows like 1/epsilon, so the finer step is held to ten
        // times the tolerance rather than to the coarse step's error
        for seed in 30..36 {
            let (model, pair) = random_case(seed, seed % 2 == 0);
            let coarse = gradient_check(&model, &pair, 1e-5).unwrap().max_rel_error;
            let fine = gradient_check(&model, &pair, 1e-6).unwrap().max_rel_error;
            assert!(coarse < 1e-4, "seed {seed}: {coarse:e}");
            assert!(fine < 1e-3, "seed {seed}: {fine:e}");
        }
    }

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert!((relative_error(1.0, 1.1) - 0.1 / 1.1).abs() < 1e-12);
        assert!((relative_error(0.0, 1e-9) - 1e-3).abs() < 1e-12);
    }
}
