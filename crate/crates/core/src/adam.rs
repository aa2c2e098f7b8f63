//! Adam over flat parameter slices.

#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(num_params: usize, learning_rate: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Adam {
            learning_rate,
            beta1,
            beta2,
            eps,
            step: 0,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
        }
    }

    /// Defaults: betas (0.9, 0.999), eps 1e-8.
    pub fn with_lr(num_params: usize, learning_rate: f64) -> Self {
        Adam::new(num_params, learning_rate, 0.9, 0.999, 1e-8)
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Starts a new step; call before the `update` calls that make it up.
    pub fn begin_step(&mut self) {
        self.step += 1;
    }

    /// Updates `params[offset..]` from `grads`; returns the next offset.
    pub fn update(&mut self, offset: usize, params: &mut [f64], grads: &[f64]) -> usize {
        assert_eq!(params.len(), grads.len());
        let t = self.step.max(1) as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let m = &mut self.m[offset..offset + params.len()];
        let v = &mut self.v[offset..offset + params.len()];
        for i in 0..params.len() {
            let g = grads[i];
            m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g;
            v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.eps);
        }
        offset + params.len()
    }

    /// One full step over a single contiguous parameter vector.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.begin_step();
        self.update(0, params, grads);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut adam = Adam::with_lr(3, 0.1);
        let mut p = vec![1.0, -2.0, 3.0];
        adam.step(&mut p, &[0.0; 3]);
        assert_eq!(p, vec![1.0, -2.0, 3.0]);
        assert_eq!(adam.steps(), 1);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut adam = Adam::with_lr(2, 0.01);
        let mut p = vec![0.0, 0.0];
        adam.step(&mut p, &[5.0, -0.001]);
        assert!((p[0] + 0.01).abs() < 1e-9);
        assert!((p[1] - 0.01).abs() < 1e-6);
    }

    #[test]
    fn minimizes_quadratic() {
        let mut adam = Adam::with_lr(1, 0.05);
        let mut p = vec![3.0];
        for _ in 0..2000 {
            let g = vec![2.0 * (p[0] - 1.0)];
            adam.step(&mut p, &g);
        }
        assert!((p[0] - 1.0).abs() < 1e-3);
    }
}
