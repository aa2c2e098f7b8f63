//! The learned collision field.
//!
//! `g(θ)` is a LeakyReLU network built from per-joint encoders (each joint sees
//! its own normalized angle plus its parent joint's feature) feeding a trunk
//! MLP with a scalar head. The classifier is `f = σ(s·g)` with `s = exp(ρ)`.
//!
//! Every layer is affine followed by an optional LeakyReLU, so once the
//! activation slopes of a forward pass are recorded the network is affine in
//! its input. That gives three cheap batched passes:
//!
//! * reverse with unit output adjoint: `∂g/∂θ` plus the per-layer backprop
//!   signals `P_l = ∂g/∂z_l`;
//! * parameter gradient of a per-sample loss on `g`: `Σ_i w_i P_l[i] ⊗ x_l[i]`;
//! * parameter gradient of `u·∂g/∂θ` (the Eikonal term, `u` held fixed):
//!   push `u` forward through the linearized network to get tangents
//!   `t_l`, then `Σ_i P_l[i] ⊗ t_l[i]`. Biases drop out of this term.
//!
//! Slopes are treated as locally constant, which is exact away from kinks.

use ndarray::linalg::general_mat_mul;
use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{Pose, RobotModel};
use crate::sampler::LabeledPose;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    /// One small MLP per joint, conditioned on the parent joint's feature.
    Hierarchical,
    /// A single dense layer from all angles to all joint features.
    Flattened,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    pub encoder: EncoderKind,
    /// Per-joint feature width.
    pub feature_dim: usize,
    /// Hidden width of each per-joint encoder.
    pub encoder_hidden: usize,
    pub trunk_width: usize,
    pub trunk_depth: usize,
    /// LeakyReLU negative slope.
    pub slope: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            encoder: EncoderKind::Hierarchical,
            feature_dim: 8,
            encoder_hidden: 32,
            trunk_width: 512,
            trunk_depth: 4,
            slope: 0.01,
        }
    }
}

impl FieldConfig {
    pub fn validate(&self) -> Result<()> {
        if self.feature_dim == 0
            || self.encoder_hidden == 0
            || self.trunk_width == 0
            || self.trunk_depth == 0
        {
            return Err(Error::InvalidConfig("network widths and depth must be positive".into()));
        }
        if !(self.slope.is_finite() && self.slope >= 0.0 && self.slope < 1.0) {
            return Err(Error::InvalidConfig("LeakyReLU slope must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Where a layer reads one block of its input from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// The normalized angle of joint `k` (one column).
    Angle(usize),
    /// The output of an earlier layer.
    Layer(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: Vec<Source>,
    /// `out × in`, row-major.
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: bool,
}

impl Dense {
    pub fn in_dim(&self) -> usize {
        self.weight.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.nrows()
    }
}

/// Trainable state of the field. The last layer is the scalar head.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldParams {
    pub config: FieldConfig,
    pub dof: usize,
    pub layers: Vec<Dense>,
    /// `ρ`, with scale `s = exp(ρ)`.
    pub log_scale: f64,
    pub scene_id: String,
    pub seed: u64,
}

/// Gradient with the same layout as [`FieldParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub log_scale: f64,
}

impl Gradients {
    pub fn zeros_like(params: &FieldParams) -> Self {
        Gradients {
            weights: params
                .layers
                .iter()
                .map(|l| Array2::zeros(l.weight.raw_dim()))
                .collect(),
            biases: params
                .layers
                .iter()
                .map(|l| Array1::zeros(l.bias.raw_dim()))
                .collect(),
            log_scale: 0.0,
        }
    }

    /// Flattened in the same order as [`FieldParams::flat_values`].
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out.push(self.log_scale);
        out
    }
}

/// Value, probability and input gradient of the field at one pose.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldEval {
    pub g: f64,
    pub f: f64,
    pub grad_theta: Vec<f64>,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Binary cross-entropy of `σ(z)` against `label` in {0, 1}.
pub fn bce_from_logit(z: f64, label: f64) -> f64 {
    softplus(z) - label * z
}

impl FieldParams {
    /// Layer graph for a robot; weights drawn from `U(-1/√fan_in, 1/√fan_in)`.
    pub fn init(model: &RobotModel, config: FieldConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let dof = model.dof();
        let ell = config.feature_dim;
        let mut specs: Vec<(Vec<Source>, usize, usize, bool)> = Vec::new();
        let mut feature_layers = Vec::with_capacity(dof);
        match config.encoder {
            EncoderKind::Hierarchical => {
                let mut out_layer = vec![0usize; dof];
                for k in 0..dof {
                    let mut inputs = vec![Source::Angle(k)];
                    let mut in_dim = 1;
                    if let Some(p) = model.parent_joint(k) {
                        inputs.push(Source::Layer(out_layer[p]));
                        in_dim += ell;
                    }
                    specs.push((inputs, in_dim, config.encoder_hidden, true));
                    let hidden = specs.len() - 1;
                    specs.push((vec![Source::Layer(hidden)], config.encoder_hidden, ell, true));
                    out_layer[k] = specs.len() - 1;
                    feature_layers.push(Source::Layer(out_layer[k]));
                }
            }
            EncoderKind::Flattened => {
                specs.push(((0..dof).map(Source::Angle).collect(), dof, ell * dof, true));
                feature_layers.push(Source::Layer(0));
            }
        }
        let mut prev = feature_layers;
        let mut prev_dim = ell * dof;
        for _ in 0..config.trunk_depth {
            specs.push((prev, prev_dim, config.trunk_width, true));
            prev = vec![Source::Layer(specs.len() - 1)];
            prev_dim = config.trunk_width;
        }
        specs.push((prev, prev_dim, 1, false));

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = specs
            .into_iter()
            .map(|(inputs, in_dim, out_dim, activation)| {
                let bound = 1.0 / (in_dim as f64).sqrt();
                let weight =
                    Array2::from_shape_fn((out_dim, in_dim), |_| rng.gen_range(-bound..bound));
                let bias = Array1::from_shape_fn(out_dim, |_| rng.gen_range(-bound..bound));
                Dense {
                    inputs,
                    weight,
                    bias,
                    activation,
                }
            })
            .collect();
        Ok(FieldParams {
            config,
            dof,
            layers,
            log_scale: std::f64::consts::LN_10,
            scene_id: String::new(),
            seed,
        })
    }

    pub fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    pub fn head(&self) -> &Dense {
        self.layers.last().expect("field has a head layer")
    }

    pub fn head_mut(&mut self) -> &mut Dense {
        self.layers.last_mut().expect("field has a head layer")
    }

    /// Input width of the first trunk layer.
    pub fn trunk_input_dim(&self) -> usize {
        let first_trunk = self.layers.len() - 1 - self.config.trunk_depth;
        self.layers[first_trunk].in_dim()
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.len() + l.bias.len())
            .sum::<usize>()
            + 1
    }

    /// All parameters, layer by layer (weights row-major, then biases), `ρ` last.
    pub fn flat_values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend(l.weight.iter());
            out.extend(l.bias.iter());
        }
        out.push(self.log_scale);
        out
    }

    pub fn set_flat_values(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                got: values.len(),
            });
        }
        let mut it = values.iter().copied();
        for l in &mut self.layers {
            l.weight.iter_mut().for_each(|w| *w = it.next().unwrap());
            l.bias.iter_mut().for_each(|b| *b = it.next().unwrap());
        }
        self.log_scale = it.next().unwrap();
        Ok(())
    }

    /// Visits matching parameter and gradient slices in flat order.
    pub fn zip_slices_mut(&mut self, grads: &Gradients, mut f: impl FnMut(&mut [f64], &[f64])) {
        for ((l, gw), gb) in self.layers.iter_mut().zip(&grads.weights).zip(&grads.biases) {
            f(
                l.weight.as_slice_mut().expect("standard layout"),
                gw.as_slice().expect("standard layout"),
            );
            f(
                l.bias.as_slice_mut().expect("standard layout"),
                gb.as_slice().expect("standard layout"),
            );
        }
        f(
            std::slice::from_mut(&mut self.log_scale),
            std::slice::from_ref(&grads.log_scale),
        );
    }

    pub fn check_model(&self, model: &RobotModel) -> Result<()> {
        if model.dof() != self.dof {
            return Err(Error::JointCountMismatch {
                checkpoint: self.dof,
                scene: model.dof(),
            });
        }
        Ok(())
    }
}

/// Recorded forward pass over a batch.
struct Forward {
    /// Assembled input of each layer, `B × in`.
    inputs: Vec<Array2<f64>>,
    /// Activation slope at each pre-activation, `B × out` (all ones when linear).
    masks: Vec<Array2<f64>>,
    outputs: Vec<Array2<f64>>,
}

/// Per-joint factor `dx/dθ = 2 / (hi - lo)` and normalized angle matrix.
fn normalize(model: &RobotModel, poses: &[Pose]) -> Result<(Array2<f64>, Vec<f64>)> {
    let k = model.dof();
    let limits = model.limits();
    let mut x = Array2::zeros((poses.len(), k));
    for (i, p) in poses.iter().enumerate() {
        if p.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: p.len(),
            });
        }
        for (j, (a, l)) in p.angles().iter().zip(&limits).enumerate() {
            if !a.is_finite() {
                return Err(Error::NonFinite(format!("angle of joint {}", j + 1)));
            }
            x[[i, j]] = (2.0 * a - (l.lo + l.hi)) / l.width();
        }
    }
    let factors = limits.iter().map(|l| 2.0 / l.width()).collect();
    Ok((x, factors))
}

fn gather(sources: &[Source], angles: &Array2<f64>, layers: &[Array2<f64>]) -> Array2<f64> {
    if let [Source::Layer(l)] = sources {
        return layers[*l].clone();
    }
    let views: Vec<ArrayView2<f64>> = sources
        .iter()
        .map(|s| match *s {
            Source::Angle(k) => angles.slice(s![.., k..k + 1]),
            Source::Layer(l) => layers[l].view(),
        })
        .collect();
    concatenate(Axis(1), &views).expect("consistent batch rows")
}

fn source_width(src: Source, params: &FieldParams) -> usize {
    match src {
        Source::Angle(_) => 1,
        Source::Layer(l) => params.layers[l].out_dim(),
    }
}

fn forward(params: &FieldParams, x: &Array2<f64>) -> Result<Forward> {
    let slope = params.config.slope;
    let n = params.layers.len();
    let mut inputs = Vec::with_capacity(n);
    let mut masks = Vec::with_capacity(n);
    let mut outputs: Vec<Array2<f64>> = Vec::with_capacity(n);
    for (idx, layer) in params.layers.iter().enumerate() {
        let input = gather(&layer.inputs, x, &outputs);
        let mut z = input.dot(&layer.weight.t());
        z += &layer.bias;
        let mask = if layer.activation {
            z.mapv(|v| if v > 0.0 { 1.0 } else { slope })
        } else {
            Array2::ones(z.raw_dim())
        };
        if layer.activation {
            z.zip_mut_with(&mask, |v, m| *v *= m);
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLayer { layer: idx });
        }
        inputs.push(input);
        masks.push(mask);
        outputs.push(z);
    }
    Ok(Forward {
        inputs,
        masks,
        outputs,
    })
}

/// Reverse pass with unit output adjoint. Returns `∂g/∂x` (B × K) and the
/// per-layer signals `∂g/∂z_l`.
fn backprop_unit(params: &FieldParams, fwd: &Forward, dof: usize) -> (Array2<f64>, Vec<Array2<f64>>) {
    let rows = fwd.inputs[0].nrows();
    let n = params.layers.len();
    let mut adj: Vec<Option<Array2<f64>>> = vec![None; n];
    adj[n - 1] = Some(Array2::ones((rows, 1)));
    let mut dx = Array2::zeros((rows, dof));
    let mut signals: Vec<Array2<f64>> = vec![Array2::zeros((0, 0)); n];
    for l in (0..n).rev() {
        let layer = &params.layers[l];
        let mut dz = adj[l]
            .take()
            .unwrap_or_else(|| Array2::zeros((rows, layer.out_dim())));
        if layer.activation {
            dz *= &fwd.masks[l];
        }
        let din = dz.dot(&layer.weight);
        let mut col = 0;
        for src in &layer.inputs {
            let w = source_width(*src, params);
            let block = din.slice(s![.., col..col + w]);
            match *src {
                Source::Angle(k) => {
                    let mut c = dx.slice_mut(s![.., k..k + 1]);
                    c += &block;
                }
                Source::Layer(p) => match &mut adj[p] {
                    Some(a) => *a += &block,
                    slot @ None => *slot = Some(block.to_owned()),
                },
            }
            col += w;
        }
        signals[l] = dz;
    }
    (dx, signals)
}

/// Forward-mode push of input tangents through the linearized network.
/// Returns the tangent of each layer's assembled input.
fn tangent_inputs(params: &FieldParams, fwd: &Forward, tx: &Array2<f64>) -> Vec<Array2<f64>> {
    let n = params.layers.len();
    let mut t_in = Vec::with_capacity(n);
    let mut t_out: Vec<Array2<f64>> = Vec::with_capacity(n);
    for (l, layer) in params.layers.iter().enumerate() {
        let input = gather(&layer.inputs, tx, &t_out);
        let mut tz = input.dot(&layer.weight.t());
        if layer.activation {
            tz *= &fwd.masks[l];
        }
        t_in.push(input);
        t_out.push(tz);
    }
    t_in
}

/// Field values and input gradients for many poses in one batched pass.
pub fn evaluate_batch(params: &FieldParams, model: &RobotModel, poses: &[Pose]) -> Result<Vec<FieldEval>> {
    params.check_model(model)?;
    if poses.is_empty() {
        return Ok(Vec::new());
    }
    let (x, factors) = normalize(model, poses)?;
    let fwd = forward(params, &x)?;
    let (dx, _) = backprop_unit(params, &fwd, params.dof);
    let s = params.scale();
    let g = fwd.outputs.last().unwrap();
    Ok((0..poses.len())
        .map(|i| {
            let gi = g[[i, 0]];
            FieldEval {
                g: gi,
                f: sigmoid(s * gi),
                grad_theta: dx.row(i).iter().zip(&factors).map(|(d, c)| d * c).collect(),
            }
        })
        .collect())
}

/// Which units sit on the positive side of their LeakyReLU, per layer, at one
/// pose. Two poses with equal patterns lie in the same linear region.
pub fn activation_pattern(params: &FieldParams, model: &RobotModel, pose: &Pose) -> Result<Vec<Vec<bool>>> {
    params.check_model(model)?;
    let (x, _) = normalize(model, std::slice::from_ref(pose))?;
    let fwd = forward(params, &x)?;
    Ok(fwd
        .masks
        .iter()
        .map(|m| m.iter().map(|&v| v == 1.0).collect())
        .collect())
}

pub fn evaluate_field(params: &FieldParams, model: &RobotModel, pose: &Pose) -> Result<FieldEval> {
    Ok(evaluate_batch(params, model, std::slice::from_ref(pose))?.remove(0))
}

/// Data term applied to `g` at a supervised row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    /// Binary cross-entropy of `σ(s·g)` against a 0/1 label.
    Label(f64),
    /// `|g - d|` regression.
    Distance(f64),
}

/// One row of a training objective.
#[derive(Debug, Clone, PartialEq)]
pub struct LossRow {
    pub pose: Pose,
    pub target: Option<Target>,
    pub eikonal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossBreakdown {
    pub total: f64,
    /// Mean data term over supervised rows.
    pub data: f64,
    /// Mean `(‖∂g/∂θ‖ - 1)²` over Eikonal rows.
    pub eikonal: f64,
    pub mean_grad_norm: f64,
}

/// `mean(data) + α · mean((‖∂g/∂θ‖ - 1)²)` and its full parameter gradient,
/// including the path through `∂g/∂θ`. `train_scale = false` zeroes the `ρ` gradient.
pub fn objective_gradients(
    params: &FieldParams,
    model: &RobotModel,
    rows: &[LossRow],
    alpha: f64,
    train_scale: bool,
) -> Result<(LossBreakdown, Gradients)> {
    params.check_model(model)?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidConfig(format!("alpha must be >= 0, got {alpha}")));
    }
    let n_sup = rows.iter().filter(|r| r.target.is_some()).count();
    let n_eik = rows.iter().filter(|r| r.eikonal).count();
    if n_sup == 0 {
        return Err(Error::Empty("loss needs at least one supervised sample"));
    }
    if alpha > 0.0 && n_eik == 0 {
        return Err(Error::Empty("Eikonal term needs at least one point"));
    }
    // With the regularizer off, Eikonal-only rows are dropped so the data
    // gradient is computed over exactly the supervised rows.
    let kept: Vec<LossRow>;
    let rows = if alpha == 0.0 && n_eik > 0 {
        kept = rows.iter().filter(|r| r.target.is_some()).cloned().collect();
        &kept[..]
    } else {
        rows
    };
    let n_eik = rows.iter().filter(|r| r.eikonal).count();
    let poses: Vec<Pose> = rows.iter().map(|r| r.pose.clone()).collect();
    let (x, factors) = normalize(model, &poses)?;
    let fwd = forward(params, &x)?;
    let (dx, signals) = backprop_unit(params, &fwd, params.dof);
    let g = fwd.outputs.last().unwrap();
    let s = params.scale();

    let mut breakdown = LossBreakdown::default();
    let mut grads = Gradients::zeros_like(params);
    // dL/dg per row
    let mut row_weight = Array1::<f64>::zeros(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let gi = g[[i, 0]];
        match r.target {
            Some(Target::Label(c)) => {
                let z = s * gi;
                breakdown.data += bce_from_logit(z, c);
                let dz = sigmoid(z) - c;
                row_weight[i] = dz * s / n_sup as f64;
                grads.log_scale += dz * z / n_sup as f64;
            }
            Some(Target::Distance(d)) => {
                let r = gi - d;
                breakdown.data += r.abs();
                row_weight[i] = if r > 0.0 {
                    1.0
                } else if r < 0.0 {
                    -1.0
                } else {
                    0.0
                } / n_sup as f64;
            }
            None => {}
        }
    }
    breakdown.data /= n_sup as f64;

    // Eikonal direction u = α/n · 2(‖G‖ - 1) G/‖G‖, mapped to normalized input space.
    let mut tx = Array2::<f64>::zeros(dx.raw_dim());
    let mut norm_sum = 0.0;
    let mut eik_sum = 0.0;
    for (i, r) in rows.iter().enumerate() {
        if !r.eikonal {
            continue;
        }
        let grad: Vec<f64> = dx.row(i).iter().zip(&factors).map(|(d, c)| d * c).collect();
        let norm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        norm_sum += norm;
        eik_sum += (norm - 1.0) * (norm - 1.0);
        if alpha > 0.0 && norm > 0.0 {
            let coef = alpha * 2.0 * (norm - 1.0) / norm / n_eik as f64;
            for (j, (gv, c)) in grad.iter().zip(&factors).enumerate() {
                tx[[i, j]] = coef * gv * c;
            }
        }
    }
    if n_eik > 0 {
        breakdown.eikonal = eik_sum / n_eik as f64;
        breakdown.mean_grad_norm = norm_sum / n_eik as f64;
    }
    breakdown.total = breakdown.data + alpha * breakdown.eikonal;
    if !breakdown.total.is_finite() {
        return Err(Error::NonFinite("loss".into()));
    }

    let tangents = (alpha > 0.0).then(|| tangent_inputs(params, &fwd, &tx));
    for l in 0..params.layers.len() {
        let p = &signals[l];
        let mut rhs = &fwd.inputs[l] * &row_weight.view().insert_axis(Axis(1));
        if let Some(t) = &tangents {
            rhs += &t[l];
        }
        general_mat_mul(1.0, &p.t(), &rhs, 0.0, &mut grads.weights[l]);
        grads.biases[l] = p.t().dot(&row_weight);
    }
    if !train_scale {
        grads.log_scale = 0.0;
    }
    Ok((breakdown, grads))
}

/// Combined BCE + Eikonal objective over a labeled batch and a separate set of
/// Eikonal points.
pub fn loss_param_gradients(
    params: &FieldParams,
    model: &RobotModel,
    batch: &[LabeledPose],
    eik_points: &[Pose],
    alpha: f64,
) -> Result<(f64, Gradients)> {
    let rows: Vec<LossRow> = batch
        .iter()
        .map(|b| LossRow {
            pose: b.pose.clone(),
            target: Some(Target::Label(b.label())),
            eikonal: false,
        })
        .chain(eik_points.iter().map(|p| LossRow {
            pose: p.clone(),
            target: None,
            eikonal: true,
        }))
        .collect();
    let (b, g) = objective_gradients(params, model, &rows, alpha, true)?;
    Ok((b.total, g))
}

/// Anything the pose and trajectory optimizers can descend.
pub trait CollisionField {
    fn dof(&self) -> usize;
    fn scale(&self) -> f64;
    fn evaluate(&self, pose: &Pose) -> Result<FieldEval>;
    fn evaluate_many(&self, poses: &[Pose]) -> Result<Vec<FieldEval>> {
        poses.iter().map(|p| self.evaluate(p)).collect()
    }
}

/// A trained network bound to the robot it was trained for.
#[derive(Debug, Clone, Copy)]
pub struct NeuralField<'a> {
    pub params: &'a FieldParams,
    pub model: &'a RobotModel,
}

impl<'a> NeuralField<'a> {
    pub fn new(params: &'a FieldParams, model: &'a RobotModel) -> Result<Self> {
        params.check_model(model)?;
        Ok(NeuralField { params, model })
    }
}

impl CollisionField for NeuralField<'_> {
    fn dof(&self) -> usize {
        self.params.dof
    }

    fn scale(&self) -> f64 {
        self.params.scale()
    }

    fn evaluate(&self, pose: &Pose) -> Result<FieldEval> {
        evaluate_field(self.params, self.model, pose)
    }

    fn evaluate_many(&self, poses: &[Pose]) -> Result<Vec<FieldEval>> {
        evaluate_batch(self.params, self.model, poses)
    }
}

/// `g(θ) = sign·(‖θ - center‖ - radius)`: an exact signed distance in joint
/// space, handy for checking optimizers without a trained network. With
/// `sign = 1` everything outside the ball is "collided"; with `sign = -1` the
/// ball is an obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub center: Vec<f64>,
    pub radius: f64,
    pub sign: f64,
    pub scale: f64,
}

impl RadialField {
    pub fn unit(dof: usize) -> Self {
        RadialField {
            center: vec![0.0; dof],
            radius: 1.0,
            sign: 1.0,
            scale: 10.0,
        }
    }

    pub fn obstacle(center: Vec<f64>, radius: f64) -> Self {
        RadialField {
            center,
            radius,
            sign: -1.0,
            scale: 10.0,
        }
    }
}

impl CollisionField for RadialField {
    fn dof(&self) -> usize {
        self.center.len()
    }

    fn scale(&self) -> f64 {
        self.scale
    }

    fn evaluate(&self, pose: &Pose) -> Result<FieldEval> {
        if pose.len() != self.center.len() {
            return Err(Error::DimensionMismatch {
                expected: self.center.len(),
                got: pose.len(),
            });
        }
        let d: Vec<f64> = pose.0.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        let r = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let g = self.sign * (r - self.radius);
        let grad_theta = if r > 0.0 {
            d.iter().map(|v| self.sign * v / r).collect()
        } else {
            vec![0.0; d.len()]
        };
        Ok(FieldEval {
            g,
            f: sigmoid(self.scale * g),
            grad_theta,
        })
    }
}
