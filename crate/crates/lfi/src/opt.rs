//! Adam, on flat parameter vectors.

/// First/second moment accumulators and step count.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;
/// Adam's default step size, used throughout the experiments.
pub const ADAM_DEFAULT_LR: f64 = 1e-3;

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        Self {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// One Adam update of `params`, descending along `grad` (the gradient of the
/// quantity being minimized; pass a negated log-likelihood gradient to
/// ascend).
pub fn adam_step(state: &mut AdamState, params: &mut [f64], grad: &[f64], learning_rate: f64) {
    assert_eq!(params.len(), state.m.len(), "Adam state shape mismatch");
    assert_eq!(params.len(), grad.len(), "gradient shape mismatch");
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - ADAM_BETA1.powi(t);
    let bc2 = 1.0 - ADAM_BETA2.powi(t);
    for i in 0..params.len() {
        state.m[i] = ADAM_BETA1 * state.m[i] + (1.0 - ADAM_BETA1) * grad[i];
        state.v[i] = ADAM_BETA2 * state.v[i] + (1.0 - ADAM_BETA2) * grad[i] * grad[i];
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPS);
    }
}
