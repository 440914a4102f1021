use crate::error::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// First/second moment estimates for Adam.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(state: &mut AdamState, params: &mut [f64], grad: &[f64], lr: f64) -> Result<()> {
    if params.len() != grad.len() || state.m.len() != grad.len() {
        return Err(Error::Shape(format!(
            "adam: {} params, {} grads, {} moments",
            params.len(),
            grad.len(),
            state.m.len()
        )));
    }
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::TrainingAborted {
            epoch: state.step as usize,
            reason: format!("non-finite gradient component {i}"),
        });
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - BETA1.powi(t);
    let bc2 = 1.0 - BETA2.powi(t);
    for i in 0..params.len() {
        let g = grad[i];
        state.m[i] = BETA1 * state.m[i] + (1.0 - BETA1) * g;
        state.v[i] = BETA2 * state.v[i] + (1.0 - BETA2) * g * g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + EPSILON);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut s = AdamState::new(3);
        let mut p = [1.0, -2.0, 3.0];
        adam_step(&mut s, &mut p, &[0.0; 3], 0.1).unwrap();
        assert_eq!(p, [1.0, -2.0, 3.0]);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut s = AdamState::new(2);
        let mut p = [0.0, 0.0];
        adam_step(&mut s, &mut p, &[3.0, -0.5], 0.01).unwrap();
        assert!((p[0] + 0.01).abs() < 1e-9);
        assert!((p[1] - 0.01).abs() < 1e-9);
    }

    #[test]
    fn minimizes_scalar_quadratic() {
        let mut s = AdamState::new(1);
        let mut x = [1.0];
        for _ in 0..500 {
            let g = [x[0]];
            adam_step(&mut s, &mut x, &g, 0.1).unwrap();
        }
        assert!(x[0].abs() < 1e-3, "{}", x[0]);
    }

    #[test]
    fn non_finite_gradient_aborts() {
        let mut s = AdamState::new(1);
        let mut x = [1.0];
        assert!(adam_step(&mut s, &mut x, &[f64::NAN], 0.1).is_err());
        assert_eq!(x, [1.0]);
    }
}
