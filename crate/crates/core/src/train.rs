//! Training loop, held-out metrics, and the distance-regression baseline.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adam::Adam;
use crate::error::{Error, Result};
use crate::field::{
    bce_from_logit, evaluate_batch, objective_gradients, FieldConfig, FieldParams, LossRow, Target,
};
use crate::kinematics::RobotModel;
use crate::sampler::{sample_uniform_pose, Dataset, LabeledPose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularizer {
    Eikonal,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    /// `s = exp(ρ)` trained jointly with the network.
    Learned,
    /// `s = 1`, not trained.
    FixedOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Head {
    /// BCE on `σ(s·g)` against the collision label.
    SdfClassifier,
    /// L1 regression of `g` onto the signed nearest-neighbour distance.
    NdfRegression,
}

/// Where the Eikonal penalty is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EikonalPoints {
    BatchOnly,
    /// Batch poses plus as many fresh uniform poses.
    BatchAndUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub iterations: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Metrics are logged every `eval_every` steps and after the last one.
    pub eval_every: usize,
    pub seed: u64,
    pub heldout_fraction: f64,
    /// Network shape; `field.encoder` selects hierarchical or flattened.
    pub field: FieldConfig,
    pub regularizer: Regularizer,
    pub scale: ScaleMode,
    pub head: Head,
    pub eikonal_points: EikonalPoints,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 10_000,
            batch_size: 512,
            learning_rate: 1e-3,
            alpha: 0.1,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            eval_every: 1000,
            seed: 0,
            heldout_fraction: 0.1,
            field: FieldConfig::default(),
            regularizer: Regularizer::Eikonal,
            scale: ScaleMode::Learned,
            head: Head::SdfClassifier,
            eikonal_points: EikonalPoints::BatchAndUniform,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.eval_every == 0 {
            return Err(Error::InvalidConfig("batch_size and eval_every must be positive".into()));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig("alpha must be >= 0".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        if !(self.heldout_fraction > 0.0 && self.heldout_fraction < 1.0) {
            return Err(Error::InvalidConfig("heldout_fraction must be in (0, 1)".into()));
        }
        self.field.validate()
    }

    fn effective_alpha(&self) -> f64 {
        match self.regularizer {
            Regularizer::Eikonal => self.alpha,
            Regularizer::None => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub step: usize,
    pub bce: f64,
    pub mean_eikonal: f64,
    pub accuracy: f64,
    pub mean_grad_norm: f64,
}

const EVAL_CHUNK: usize = 2048;
const SPLIT_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// Held-out style metrics. Accuracy thresholds `f` at 0.5, equivalently the sign of `g`.
pub fn evaluate_metrics(
    params: &FieldParams,
    model: &RobotModel,
    samples: &[LabeledPose],
) -> Result<MetricsReport> {
    if samples.is_empty() {
        return Err(Error::Empty("metrics need at least one sample"));
    }
    let s = params.scale();
    let (mut correct, mut bce, mut eik, mut norm_sum) = (0usize, 0.0, 0.0, 0.0);
    for chunk in samples.chunks(EVAL_CHUNK) {
        let poses: Vec<_> = chunk.iter().map(|c| c.pose.clone()).collect();
        let evals = evaluate_batch(params, model, &poses)?;
        for (e, c) in evals.iter().zip(chunk) {
            if (e.f > 0.5) == c.collided {
                correct += 1;
            }
            bce += bce_from_logit(s * e.g, c.label());
            let n = e.grad_theta.iter().map(|v| v * v).sum::<f64>().sqrt();
            norm_sum += n;
            eik += (n - 1.0) * (n - 1.0);
        }
    }
    let n = samples.len() as f64;
    Ok(MetricsReport {
        step: 0,
        bce: bce / n,
        mean_eikonal: eik / n,
        accuracy: correct as f64 / n,
        mean_grad_norm: norm_sum / n,
    })
}

/// Seeded 90/10-style split: `(train, held_out)`.
pub fn split_dataset(dataset: &Dataset, heldout_fraction: f64, seed: u64) -> (Vec<LabeledPose>, Vec<LabeledPose>) {
    let mut idx: Vec<usize> = (0..dataset.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ SPLIT_STREAM));
    let n_held = ((dataset.len() as f64) * heldout_fraction).round().max(1.0) as usize;
    let n_held = n_held.min(dataset.len().saturating_sub(1));
    let held = idx[..n_held].iter().map(|&i| dataset.samples[i].clone()).collect();
    let train = idx[n_held..].iter().map(|&i| dataset.samples[i].clone()).collect();
    (train, held)
}


pub struct TrainOutcome {
    pub params: FieldParams,
    pub metrics: Vec<MetricsReport>,
}

/// Trains a field on `dataset`. `on_eval` sees every logged report together
/// with the parameters at that step.
pub fn train_with(
    dataset: &Dataset,
    model: &RobotModel,
    config: &TrainConfig,
    mut on_eval: impl FnMut(&MetricsReport, &FieldParams) -> Result<()>,
) -> Result<TrainOutcome> {
    config.validate()?;
    if dataset.dof != model.dof() {
        return Err(Error::JointCountMismatch {
            checkpoint: dataset.dof,
            scene: model.dof(),
        });
    }
    if config.head == Head::NdfRegression && dataset.samples.iter().any(|s| s.ndf_distance.is_none()) {
        return Err(Error::InvalidConfig("distance regression needs ndf labels on every sample".into()));
    }
    let (train_set, held_out) = split_dataset(dataset, config.heldout_fraction, config.seed);
    if train_set.is_empty() {
        return Err(Error::Empty("training split is empty"));
    }

    let mut params = FieldParams::init(model, config.field, config.seed)?;
    params.scene_id = dataset.scene_id.clone();
    let train_scale = match config.scale {
        ScaleMode::Learned => true,
        ScaleMode::FixedOne => {
            params.log_scale = 0.0;
            false
        }
    };
    let alpha = config.effective_alpha();
    let limits = model.limits();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut adam = Adam::new(
        params.num_params(),
        config.learning_rate,
        config.beta1,
        config.beta2,
        config.eps,
    );

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut cursor = order.len();
    let mut metrics = Vec::new();
    let mut log = |step: usize, params: &FieldParams, metrics: &mut Vec<MetricsReport>| -> Result<()> {
        let mut m = evaluate_metrics(params, model, &held_out)?;
        m.step = step;
        on_eval(&m, params)?;
        metrics.push(m);
        Ok(())
    };

    for step in 0..config.iterations {
        let mut rows = Vec::with_capacity(2 * config.batch_size);
        for _ in 0..config.batch_size.min(train_set.len()) {
            if cursor == order.len() {
                order.shuffle(&mut rng);
                cursor = 0;
            }
            let s = &train_set[order[cursor]];
            cursor += 1;
            let target = match config.head {
                Head::SdfClassifier => Target::Label(s.label()),
                Head::NdfRegression => Target::Distance(s.ndf_distance.expect("checked above")),
            };
            rows.push(LossRow {
                pose: s.pose.clone(),
                target: Some(target),
                eikonal: alpha > 0.0,
            });
        }
        if alpha > 0.0 && config.eikonal_points == EikonalPoints::BatchAndUniform {
            let n = rows.len();
            for _ in 0..n {
                rows.push(LossRow {
                    pose: sample_uniform_pose(&limits, &mut rng),
                    target: None,
                    eikonal: true,
                });
            }
        }
        let (loss, grads) = match objective_gradients(&params, model, &rows, alpha, train_scale) {
            Ok(v) => v,
            Err(Error::NonFinite(_)) | Err(Error::NonFiniteLayer { .. }) => {
                return Err(Error::NonFiniteLoss { step })
            }
            Err(e) => return Err(e),
        };
        if !loss.total.is_finite() {
            return Err(Error::NonFiniteLoss { step });
        }
        adam.begin_step();
        let mut offset = 0;
        params.zip_slices_mut(&grads, |p, g| offset = adam.update(offset, p, g));
        if !params.log_scale.is_finite() {
            return Err(Error::NonFiniteLoss { step });
        }
        if (step + 1) % config.eval_every == 0 || step + 1 == config.iterations {
            log(step + 1, &params, &mut metrics)?;
        }
    }
    if config.iterations == 0 {
        log(0, &params, &mut metrics)?;
    }
    Ok(TrainOutcome { params, metrics })
}

pub fn train(dataset: &Dataset, model: &RobotModel, config: &TrainConfig) -> Result<TrainOutcome> {
    train_with(dataset, model, config, |_, _| Ok(()))
}

/// Distance-regression baseline: same network, L1 loss on the signed
/// nearest-opposite-neighbour distance, no Eikonal term. Returns the final
/// held-out report.
pub fn train_ndf_baseline(
    dataset: &Dataset,
    model: &RobotModel,
    config: &TrainConfig,
) -> Result<(FieldParams, MetricsReport)> {
    if dataset.samples.iter().any(|s| s.ndf_distance.is_none()) {
        return Err(Error::InvalidConfig("dataset has no ndf distance labels".into()));
    }
    let cfg = TrainConfig {
        head: Head::NdfRegression,
        regularizer: Regularizer::None,
        ..*config
    };
    let out = train(dataset, model, &cfg)?;
    let last = *out.metrics.last().expect("training logs at least once");
    Ok((out.params, last))
}

/// Mean `|g - ndf|` over labeled samples.
pub fn regression_loss(params: &FieldParams, model: &RobotModel, samples: &[LabeledPose]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("regression loss needs samples"));
    }
    let poses: Vec<_> = samples.iter().map(|s| s.pose.clone()).collect();
    let evals = evaluate_batch(params, model, &poses)?;
    let mut total = 0.0;
    for (e, s) in evals.iter().zip(samples) {
        let d = s
            .ndf_distance
            .ok_or_else(|| Error::InvalidConfig("sample without ndf label".into()))?;
        total += (e.g - d).abs();
    }
    Ok(total / samples.len() as f64)
}
