//! Optimizers that consume a collision field: collision resolution by
//! descending `g`, trajectory refinement under an SDF hinge plus total
//! variation, and tangent-projected descent toward a goal pose.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::adam::Adam;
use crate::collision::{detect_collisions, Scene};
use crate::error::{Error, Result};
use crate::field::{CollisionField, FieldEval};
use crate::kinematics::{JointLimits, Pose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolveObjective {
    /// Descend `g` until `g <= l_thres`.
    Sdf,
    /// Descend `f = σ(s·g)` until `f < 0.5`. Used for fields trained without
    /// the Eikonal term.
    Probability,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolveConfig {
    pub l_thres: f64,
    pub learning_rate: f64,
    pub max_iters: usize,
    pub objective: ResolveObjective,
}

impl Default for ResolveConfig {
    fn default() -> Self {
        ResolveConfig {
            l_thres: -0.1,
            learning_rate: 0.01,
            max_iters: 1000,
            objective: ResolveObjective::Sdf,
        }
    }
}

impl ResolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l_thres <= 0.0) {
            return Err(Error::InvalidConfig("l_thres must be <= 0".into()));
        }
        if self.max_iters == 0 || !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(
                "max_iters must be >= 1 and learning_rate positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub iteration: usize,
    pub pose: Pose,
    pub g: f64,
    pub grad_norm: f64,
    /// Objective value at this iteration (`g`, `f`, or the trajectory loss).
    pub loss: f64,
    /// `⟨D, ∂g/∂θ / ‖∂g/∂θ‖⟩` for tangent descent.
    pub projection_dot: Option<f64>,
    /// Tangent descent fell back to the raw goal direction.
    pub unprojected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimTrace {
    pub steps: Vec<TraceStep>,
    /// Number of parameter updates performed.
    pub iterations: usize,
    pub converged: bool,
    /// `‖θ_final - θ_init‖` (all waypoints stacked for trajectories).
    pub move_angle: f64,
    pub wall_time_secs: f64,
}

impl OptimTrace {
    pub fn final_pose(&self) -> &Pose {
        &self.steps.last().expect("trace has at least one step").pose
    }

    pub fn final_g(&self) -> f64 {
        self.steps.last().expect("trace has at least one step").g
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn clamp_into(limits: &[JointLimits], v: &mut [f64]) {
    for (x, l) in v.iter_mut().zip(limits) {
        *x = l.clamp(*x);
    }
}

fn check_dims(field: &impl CollisionField, limits: &[JointLimits], pose: &Pose) -> Result<()> {
    if limits.len() != field.dof() {
        return Err(Error::DimensionMismatch {
            expected: field.dof(),
            got: limits.len(),
        });
    }
    if pose.len() != field.dof() {
        return Err(Error::DimensionMismatch {
            expected: field.dof(),
            got: pose.len(),
        });
    }
    Ok(())
}

struct ResolveRun {
    theta: Vec<f64>,
    start: Vec<f64>,
    adam: Adam,
    steps: Vec<TraceStep>,
    done: bool,
    converged: bool,
    started: Instant,
    wall: f64,
}

fn objective(eval: &FieldEval, scale: f64, cfg: &ResolveConfig) -> (f64, bool, Vec<f64>) {
    match cfg.objective {
        ResolveObjective::Sdf => (eval.g, eval.g <= cfg.l_thres, eval.grad_theta.clone()),
        ResolveObjective::Probability => {
            let k = eval.f * (1.0 - eval.f) * scale;
            (
                eval.f,
                eval.f < 0.5,
                eval.grad_theta.iter().map(|v| v * k).collect(),
            )
        }
    }
}

/// Resolves many poses at once; each run keeps its own Adam state and stops
/// independently. Field evaluations are batched across the active runs.
pub fn resolve_poses(
    field: &impl CollisionField,
    limits: &[JointLimits],
    poses: &[Pose],
    cfg: &ResolveConfig,
) -> Result<Vec<OptimTrace>> {
    cfg.validate()?;
    for p in poses {
        check_dims(field, limits, p)?;
    }
    let scale = field.scale();
    let mut runs: Vec<ResolveRun> = poses
        .iter()
        .map(|p| ResolveRun {
            theta: p.0.clone(),
            start: p.0.clone(),
            adam: Adam::with_lr(p.len(), cfg.learning_rate),
            steps: Vec::new(),
            done: false,
            converged: false,
            started: Instant::now(),
            wall: 0.0,
        })
        .collect();

    for it in 0..=cfg.max_iters {
        let active: Vec<usize> = (0..runs.len()).filter(|&i| !runs[i].done).collect();
        if active.is_empty() {
            break;
        }
        let batch: Vec<Pose> = active.iter().map(|&i| Pose(runs[i].theta.clone())).collect();
        let evals = field.evaluate_many(&batch)?;
        for (&i, (eval, pose)) in active.iter().zip(evals.iter().zip(batch)) {
            let run = &mut runs[i];
            if !eval.g.is_finite() || eval.grad_theta.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteField { iteration: it });
            }
            let (loss, reached, grad) = objective(eval, scale, cfg);
            run.steps.push(TraceStep {
                iteration: it,
                pose,
                g: eval.g,
                grad_norm: norm(&eval.grad_theta),
                loss,
                projection_dot: None,
                unprojected: false,
            });
            if reached || it == cfg.max_iters {
                run.done = true;
                run.converged = reached;
                run.wall = run.started.elapsed().as_secs_f64();
                continue;
            }
            run.adam.step(&mut run.theta, &grad);
            clamp_into(limits, &mut run.theta);
        }
    }

    Ok(runs
        .into_iter()
        .map(|r| {
            let move_angle = Pose(r.theta.clone()).distance(&Pose(r.start));
            OptimTrace {
                iterations: r.steps.len() - 1,
                steps: r.steps,
                converged: r.converged,
                move_angle,
                wall_time_secs: r.wall,
            }
        })
        .collect())
}

/// Descends the field from `pose0` until the stopping rule of `cfg` holds or
/// `max_iters` updates have been made. Poses are clamped to `limits` after
/// every update.
pub fn resolve_pose(
    field: &impl CollisionField,
    limits: &[JointLimits],
    pose0: &Pose,
    cfg: &ResolveConfig,
) -> Result<OptimTrace> {
    Ok(resolve_poses(field, limits, std::slice::from_ref(pose0), cfg)?.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TvNorm {
    /// `Σ ‖θ_{i+1} - θ_i‖`.
    Euclidean,
    /// `Σ ‖θ_{i+1} - θ_i‖²`, whose minimizer is the evenly spaced segment.
    Squared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajConfig {
    /// Weight of the SDF hinge term.
    pub gamma_sdf: f64,
    /// Weight of the total-variation term.
    pub gamma_tv: f64,
    pub l_thres: f64,
    pub learning_rate: f64,
    pub max_iters: usize,
    pub endpoints_frozen: bool,
    pub tv: TvNorm,
}

impl Default for TrajConfig {
    fn default() -> Self {
        TrajConfig {
            gamma_sdf: 1.0,
            gamma_tv: 0.1,
            l_thres: -0.1,
            learning_rate: 0.01,
            max_iters: 1000,
            endpoints_frozen: true,
            tv: TvNorm::Euclidean,
        }
    }
}

impl TrajConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_sdf >= 0.0 && self.gamma_tv >= 0.0) {
            return Err(Error::InvalidConfig("trajectory weights must be >= 0".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        if !(self.l_thres <= 0.0) {
            return Err(Error::InvalidConfig("l_thres must be <= 0".into()));
        }
        Ok(())
    }
}

/// Trajectory loss and its gradient with respect to every waypoint.
pub fn trajectory_loss(
    evals: &[FieldEval],
    waypoints: &[Vec<f64>],
    cfg: &TrajConfig,
) -> (f64, Vec<Vec<f64>>) {
    let n = waypoints.len();
    let k = waypoints[0].len();
    let mut grad = vec![vec![0.0; k]; n];
    let mut loss = 0.0;
    for (i, e) in evals.iter().enumerate() {
        let h = e.g - cfg.l_thres;
        if h > 0.0 {
            loss += cfg.gamma_sdf * h / n as f64;
            for (gv, d) in grad[i].iter_mut().zip(&e.grad_theta) {
                *gv += cfg.gamma_sdf * d / n as f64;
            }
        }
    }
    let w = cfg.gamma_tv / (n - 1) as f64;
    for i in 0..n - 1 {
        let diff: Vec<f64> = waypoints[i + 1]
            .iter()
            .zip(&waypoints[i])
            .map(|(a, b)| a - b)
            .collect();
        let len = norm(&diff);
        let (term, coef) = match cfg.tv {
            TvNorm::Euclidean if len > 0.0 => (len, 1.0 / len),
            TvNorm::Euclidean => (0.0, 0.0),
            TvNorm::Squared => (len * len, 2.0),
        };
        loss += w * term;
        for j in 0..k {
            let d = w * coef * diff[j];
            grad[i + 1][j] += d;
            grad[i][j] -= d;
        }
    }
    (loss, grad)
}

/// Refines a waypoint sequence with Adam. With `gamma_sdf > 0` the run stops
/// as soon as every waypoint satisfies `g <= l_thres`.
pub fn optimize_trajectory(
    field: &impl CollisionField,
    limits: &[JointLimits],
    waypoints: &[Pose],
    cfg: &TrajConfig,
) -> Result<(Vec<Pose>, OptimTrace)> {
    cfg.validate()?;
    if waypoints.len() < 2 {
        return Err(Error::InvalidConfig("trajectory needs at least 2 waypoints".into()));
    }
    for p in waypoints {
        check_dims(field, limits, p)?;
    }
    let started = Instant::now();
    let n = waypoints.len();
    let k = field.dof();
    let mut theta: Vec<Vec<f64>> = waypoints.iter().map(|p| p.0.clone()).collect();
    let free: Vec<usize> = if cfg.endpoints_frozen {
        (1..n - 1).collect()
    } else {
        (0..n).collect()
    };

    let evals = field.evaluate_many(waypoints)?;
    if cfg.endpoints_frozen {
        for &i in &[0, n - 1] {
            if evals[i].g > cfg.l_thres {
                return Err(Error::EndpointAboveThreshold {
                    index: i,
                    g: evals[i].g,
                    threshold: cfg.l_thres,
                });
            }
        }
    }

    let mut adam = Adam::with_lr(free.len() * k, cfg.learning_rate);
    let mut steps = Vec::new();
    let mut evals = evals;
    let mut converged = false;
    for it in 0..=cfg.max_iters {
        if evals.iter().any(|e| !e.g.is_finite()) {
            return Err(Error::NonFiniteField { iteration: it });
        }
        let (loss, grad) = trajectory_loss(&evals, &theta, cfg);
        let (worst, worst_eval) = evals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.g.total_cmp(&b.1.g))
            .expect("non-empty trajectory");
        let mut flat_grad = Vec::with_capacity(free.len() * k);
        for &i in &free {
            flat_grad.extend_from_slice(&grad[i]);
        }
        steps.push(TraceStep {
            iteration: it,
            pose: Pose(theta[worst].clone()),
            g: worst_eval.g,
            grad_norm: norm(&flat_grad),
            loss,
            projection_dot: None,
            unprojected: false,
        });
        let feasible = evals.iter().all(|e| e.g <= cfg.l_thres);
        if (cfg.gamma_sdf > 0.0 && feasible) || it == cfg.max_iters || free.is_empty() {
            converged = feasible;
            break;
        }
        let mut flat: Vec<f64> = free.iter().flat_map(|&i| theta[i].iter().copied()).collect();
        adam.step(&mut flat, &flat_grad);
        for (slot, &i) in free.iter().enumerate() {
            theta[i].copy_from_slice(&flat[slot * k..(slot + 1) * k]);
            clamp_into(limits, &mut theta[i]);
        }
        let poses: Vec<Pose> = theta.iter().map(|t| Pose(t.clone())).collect();
        evals = field.evaluate_many(&poses)?;
    }

    let move_angle = theta
        .iter()
        .zip(waypoints)
        .map(|(t, p)| t.iter().zip(&p.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .sum::<f64>()
        .sqrt();
    let out: Vec<Pose> = theta.into_iter().map(Pose).collect();
    let trace = OptimTrace {
        iterations: steps.len() - 1,
        steps,
        converged,
        move_angle,
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    Ok((out, trace))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentConfig {
    /// Raw step size.
    pub delta: f64,
    pub max_iters: usize,
    /// Stop once `Σ|θ - θ_end| < tolerance`.
    pub tolerance: f64,
}

const MIN_SDF_GRAD: f64 = 1e-8;

/// Moves toward `end` along the sign-gradient of the L1 goal distance with its
/// component along `∂g/∂θ` removed, so the field value is held approximately
/// constant.
pub fn tangent_descent(
    field: &impl CollisionField,
    limits: &[JointLimits],
    start: &Pose,
    end: &Pose,
    cfg: &TangentConfig,
) -> Result<OptimTrace> {
    check_dims(field, limits, start)?;
    check_dims(field, limits, end)?;
    if !(cfg.delta > 0.0 && cfg.tolerance >= 0.0) {
        return Err(Error::InvalidConfig("delta must be positive and tolerance >= 0".into()));
    }
    let started = Instant::now();
    let mut theta = start.0.clone();
    let mut steps = Vec::new();
    let mut converged = false;
    for it in 0..=cfg.max_iters {
        let pose = Pose(theta.clone());
        let eval = field.evaluate(&pose)?;
        if !eval.g.is_finite() {
            return Err(Error::NonFiniteField { iteration: it });
        }
        let l1: f64 = theta.iter().zip(&end.0).map(|(a, b)| (a - b).abs()).sum();
        let grad_norm = norm(&eval.grad_theta);
        if l1 < cfg.tolerance || it == cfg.max_iters {
            converged = l1 < cfg.tolerance;
            steps.push(TraceStep {
                iteration: it,
                pose,
                g: eval.g,
                grad_norm,
                loss: l1,
                projection_dot: None,
                unprojected: false,
            });
            break;
        }
        let goal_grad: Vec<f64> = theta
            .iter()
            .zip(&end.0)
            .map(|(a, b)| {
                let d = a - b;
                if d > 0.0 {
                    1.0
                } else if d < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect();
        let (direction, dot, unprojected) = if grad_norm < MIN_SDF_GRAD {
            (goal_grad, None, true)
        } else {
            let unit: Vec<f64> = eval.grad_theta.iter().map(|v| v / grad_norm).collect();
            let along: f64 = unit.iter().zip(&goal_grad).map(|(a, b)| a * b).sum();
            let d: Vec<f64> = goal_grad
                .iter()
                .zip(&unit)
                .map(|(gq, n)| gq - along * n)
                .collect();
            let dot = d.iter().zip(&unit).map(|(a, b)| a * b).sum();
            (d, Some(dot), false)
        };
        steps.push(TraceStep {
            iteration: it,
            pose,
            g: eval.g,
            grad_norm,
            loss: l1,
            projection_dot: dot,
            unprojected,
        });
        for (t, d) in theta.iter_mut().zip(&direction) {
            *t -= cfg.delta * d;
        }
        clamp_into(limits, &mut theta);
    }
    Ok(OptimTrace {
        iterations: steps.len() - 1,
        move_angle: Pose(theta).distance(start),
        steps,
        converged,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// One row of a threshold or learning-rate sweep, averaged over the poses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// The swept value (`l_thres` or learning rate).
    pub value: f64,
    pub mean_iters: f64,
    pub mean_time_secs: f64,
    pub mean_move_angle: f64,
    /// Mean oracle pair count before and after resolution.
    pub pairs_before: f64,
    pub pairs_after: f64,
    /// Fraction of poses still colliding after resolution.
    pub collision_rate_after: f64,
    /// Fraction of runs that met their stopping rule.
    pub converged_rate: f64,
}

pub const SWEEP_THRESHOLDS: [f64; 9] = [0.0, -0.001, -0.005, -0.01, -0.02, -0.03, -0.04, -0.05, -0.1];
pub const SWEEP_LEARNING_RATES: [f64; 3] = [0.001, 0.01, 0.1];

/// Resolves `poses` once per config and scores the results with the
/// geometric oracle.
pub fn resolution_sweep(
    field: &impl CollisionField,
    scene: &Scene,
    poses: &[Pose],
    configs: &[(f64, ResolveConfig)],
) -> Result<Vec<SweepRow>> {
    if poses.is_empty() {
        return Err(Error::Empty("sweep needs at least one pose"));
    }
    let limits = scene.robot.limits();
    let mut before = 0usize;
    for p in poses {
        before += detect_collisions(scene, p)?.pair_count;
    }
    let n = poses.len() as f64;
    let mut rows = Vec::with_capacity(configs.len());
    for (value, cfg) in configs {
        let traces = resolve_poses(field, &limits, poses, cfg)?;
        let (mut iters, mut time, mut moved, mut after, mut hit, mut conv) = (0.0, 0.0, 0.0, 0usize, 0usize, 0usize);
        for t in &traces {
            iters += t.iterations as f64;
            time += t.wall_time_secs;
            moved += t.move_angle;
            let r = detect_collisions(scene, t.final_pose())?;
            after += r.pair_count;
            hit += usize::from(r.collided);
            conv += usize::from(t.converged);
        }
        rows.push(SweepRow {
            value: *value,
            mean_iters: iters / n,
            mean_time_secs: time / n,
            mean_move_angle: moved / n,
            pairs_before: before as f64 / n,
            pairs_after: after as f64 / n,
            collision_rate_after: hit as f64 / n,
            converged_rate: conv as f64 / n,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::RadialField;
    use std::f64::consts::PI;

    fn limits(k: usize) -> Vec<JointLimits> {
        vec![JointLimits::new(-PI, PI).unwrap(); k]
    }

    #[test]
    fn radial_resolve_matches_projection() {
        let field = RadialField::unit(2);
        let trace = resolve_pose(&field, &limits(2), &Pose(vec![2.0, 0.0]), &ResolveConfig::default()).unwrap();
        assert!(trace.converged);
        let p = trace.final_pose();
        assert!(trace.final_g() <= -0.1);
        assert!((p.0[0] - 0.9).abs() < 1e-2 && p.0[1].abs() < 1e-2, "{p:?}");
        assert!(trace.iterations <= 1000);
    }

    #[test]
    fn converged_pose_takes_no_steps() {
        let field = RadialField::unit(2);
        let trace = resolve_pose(&field, &limits(2), &Pose(vec![0.2, 0.1]), &ResolveConfig::default()).unwrap();
        assert_eq!(trace.iterations, 0);
        assert_eq!(trace.move_angle, 0.0);
        assert!(trace.converged);
    }

    #[test]
    fn probability_objective_stops_at_half() {
        let field = RadialField::unit(2);
        let cfg = ResolveConfig {
            objective: ResolveObjective::Probability,
            ..ResolveConfig::default()
        };
        let trace = resolve_pose(&field, &limits(2), &Pose(vec![1.3, 0.0]), &cfg).unwrap();
        assert!(trace.converged);
        let last = trace.steps.last().unwrap();
        assert!(last.loss < 0.5 && last.g < 0.0 && last.g > -0.05);
    }

    #[test]
    fn resolve_clamps_to_limits() {
        let field = RadialField {
            radius: 5.0,
            ..RadialField::unit(2)
        };
        let lim = vec![JointLimits::new(-0.5, 0.5).unwrap(); 2];
        let cfg = ResolveConfig {
            max_iters: 50,
            learning_rate: 0.1,
            ..ResolveConfig::default()
        };
        let trace = resolve_pose(&field, &lim, &Pose(vec![0.4, -0.4]), &cfg).unwrap();
        for s in &trace.steps {
            assert!(s.pose.0.iter().all(|v| (-0.5..=0.5).contains(v)));
        }
    }

    #[test]
    fn stationary_straight_path_has_no_gradient() {
        let field = RadialField::unit(2);
        let path = crate::kinematics::interpolate_poses(&Pose(vec![-0.3, 0.2]), &Pose(vec![0.3, 0.2]), 7).unwrap();
        let evals = field.evaluate_many(&path).unwrap();
        let theta: Vec<Vec<f64>> = path.iter().map(|p| p.0.clone()).collect();
        let cfg = TrajConfig {
            l_thres: -0.1,
            ..TrajConfig::default()
        };
        let (_, grad) = trajectory_loss(&evals, &theta, &cfg);
        for g in &grad[1..6] {
            assert!(g.iter().all(|v| v.abs() < 1e-12), "{g:?}");
        }
    }

    #[test]
    fn tv_alone_recovers_the_segment() {
        let field = RadialField::unit(2);
        let start = Pose(vec![-2.0, -1.0]);
        let end = Pose(vec![2.0, 1.5]);
        let mut path = crate::kinematics::interpolate_poses(&start, &end, 12).unwrap();
        for (i, p) in path.iter_mut().enumerate().skip(1).take(10) {
            p.0[0] += 0.3 * (i as f64).sin();
            p.0[1] -= 0.2 * (i as f64 * 0.7).cos();
        }
        let cfg = TrajConfig {
            gamma_sdf: 0.0,
            gamma_tv: 1.0,
            l_thres: 0.0,
            learning_rate: 0.002,
            max_iters: 40_000,
            tv: TvNorm::Squared,
            ..TrajConfig::default()
        };
        let field = RadialField {
            radius: 10.0,
            ..field
        };
        let (out, _) = optimize_trajectory(&field, &limits(2), &path, &cfg).unwrap();
        let exact = crate::kinematics::interpolate_poses(&start, &end, 12).unwrap();
        for (a, b) in out.iter().zip(&exact) {
            assert!(a.distance(b) < 1e-3, "{a:?} vs {b:?}");
        }
        assert_eq!(out[0], start);
        assert_eq!(out[11], end);
    }

    #[test]
    fn trajectory_leaves_obstacle_and_keeps_endpoints() {
        let field = RadialField::obstacle(vec![0.0, 0.05], 0.5);
        let start = Pose(vec![-1.2, 0.0]);
        let end = Pose(vec![1.2, 0.0]);
        let path = crate::kinematics::interpolate_poses(&start, &end, 30).unwrap();
        let (out, trace) = optimize_trajectory(&field, &limits(2), &path, &TrajConfig::default()).unwrap();
        assert!(trace.converged);
        assert!(field.evaluate_many(&out).unwrap().iter().all(|e| e.g <= -0.1));
        assert_eq!(out[0].0, start.0);
        assert_eq!(out[29].0, end.0);
    }

    #[test]
    fn colliding_endpoint_rejected() {
        let field = RadialField::unit(2);
        let path = crate::kinematics::interpolate_poses(&Pose(vec![0.0, 0.0]), &Pose(vec![3.0, 0.0]), 5).unwrap();
        let err = optimize_trajectory(&field, &limits(2), &path, &TrajConfig::default()).unwrap_err();
        assert!(matches!(err, Error::EndpointAboveThreshold { index: 4, .. }));
    }

    fn tangent_cfg(delta: f64) -> TangentConfig {
        TangentConfig {
            delta,
            max_iters: 300,
            tolerance: 1e-3,
        }
    }

    #[test]
    fn tangent_trivial_goal() {
        let field = RadialField::unit(2);
        let p = Pose(vec![0.5, 0.0]);
        let trace = tangent_descent(&field, &limits(2), &p, &p, &tangent_cfg(0.01)).unwrap();
        assert_eq!(trace.iterations, 0);
        assert_eq!(trace.steps[0].loss, 0.0);
    }

    #[test]
    fn tangent_stays_on_level_set() {
        let field = RadialField::unit(2);
        let delta = 0.01;
        for (start, end) in [
            (vec![0.5, 0.0], vec![-0.5, 0.0]),
            (vec![0.5, 0.1], vec![-0.5, 0.1]),
            (vec![0.3, -0.4], vec![-0.4, 0.3]),
        ] {
            let trace = tangent_descent(&field, &limits(2), &Pose(start.clone()), &Pose(end), &tangent_cfg(delta)).unwrap();
            let r0 = Pose(start).distance(&Pose::zeros(2));
            for s in &trace.steps {
                let r = s.pose.distance(&Pose::zeros(2));
                assert!((r - r0).abs() <= 5e-2 * delta * s.iteration as f64 + 1e-12);
                if let Some(dot) = s.projection_dot {
                    assert!(dot.abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn tangent_falls_back_at_zero_gradient() {
        let field = RadialField::unit(2);
        let trace = tangent_descent(&field, &limits(2), &Pose(vec![0.0, 0.0]), &Pose(vec![0.5, 0.5]), &tangent_cfg(0.01)).unwrap();
        assert!(trace.steps[0].unprojected);
        assert!(trace.steps[0].projection_dot.is_none());
    }
}
