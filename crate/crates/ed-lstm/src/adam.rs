//! Adam optimizer over a flat parameter vector.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    /// β1=0.9, β2=0.999, ε=1e-8.
    pub fn new(param_count: usize, lr: f64) -> AdamState {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
        }
    }
}

/// One update: τ+=1, m←β1m+(1−β1)g, v←β2v+(1−β2)g², bias-corrected, then
/// p ← p − lr·m̂/(√v̂+ε).
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::ShapeMismatch {
            context: "adam_step",
            expected: state.m.len(),
            found: params.len().min(grads.len()),
        });
    }
    state.step += 1;
    let bc1 = 1.0 - state.beta1.powi(state.step as i32);
    let bc2 = 1.0 - state.beta2.powi(state.step as i32);
    for j in 0..params.len() {
        let g = grads[j];
        state.m[j] = state.beta1 * state.m[j] + (1.0 - state.beta1) * g;
        state.v[j] = state.beta2 * state.v[j] + (1.0 - state.beta2) * g * g;
        let m_hat = state.m[j] / bc1;
        let v_hat = state.v[j] / bc2;
        params[j] -= state.lr * m_hat / (v_hat.sqrt() + state.epsilon);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_nearly_the_learning_rate() {
        // ε = 1e-8 shaves ε/|g| off the step, so keep |g| ≥ 1e-2 to stay
        // inside the stated (1 − 1e-6) band.
        for g in [2.0, -0.3, 1e4, -5e-2] {
            let mut p = [5.0];
            let mut state = AdamState::new(1, 1e-3);
            adam_step(&mut p, &[g], &mut state).unwrap();
            let delta = 5.0 - p[0];
            assert_eq!(delta.signum(), g.signum());
            let mag = delta.abs();
            assert!(mag <= 1e-3 && mag >= 1e-3 * (1.0 - 1e-6), "|Δ| = {mag}");
        }
    }

    #[test]
    fn zero_gradients_leave_params_untouched() {
        let mut p = [1.0, -2.0, 0.5];
        let mut state = AdamState::new(3, 1e-3);
        for _ in 0..100 {
            adam_step(&mut p, &[0.0; 3], &mut state).unwrap();
        }
        assert_eq!(p, [1.0, -2.0, 0.5]);
    }

    #[test]
    fn two_steps_on_a_parabola_match_hand_arithmetic() {
        // f(p) = p², p₀ = 1, lr = 1e-3. Oracle below is the update formula
        // evaluated longhand, sharing nothing with adam_step.
        let mut p = [1.0];
        let mut state = AdamState::new(1, 1e-3);

        let (b1, b2, eps, lr) = (0.9, 0.999, 1e-8, 1e-3);
        let mut om = 0.0;
        let mut ov = 0.0;
        let mut op = 1.0f64;
        for tau in 1..=2u32 {
            let g = 2.0 * op;
            om = b1 * om + (1.0 - b1) * g;
            ov = b2 * ov + (1.0 - b2) * g * g;
            let mh = om / (1.0 - b1.powi(tau as i32));
            let vh = ov / (1.0 - b2.powi(tau as i32));
            op -= lr * mh / (vh.sqrt() + eps);
        }

        let g1 = 2.0 * p[0];
        adam_step(&mut p, &[g1], &mut state).unwrap();
        let g2 = 2.0 * p[0];
        adam_step(&mut p, &[g2], &mut state).unwrap();

        assert!((p[0] - op).abs() < 1e-12, "{} vs {}", p[0], op);
        // First step lands at 1 − lr·(within rounding of 1).
        assert!((p[0] - (1.0 - 2.0 * 1e-3)).abs() < 1e-6);
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let mut p = [1.0, 2.0];
        let mut state = AdamState::new(2, 1e-3);
        assert!(matches!(
            adam_step(&mut p, &[0.0], &mut state),
            Err(Error::ShapeMismatch { .. })
        ));
    }
}
