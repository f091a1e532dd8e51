//! Adam with bias correction.

use crate::{Architecture, NetError, Parameters, Scalar};

/// Per-parameter first/second moment estimates plus the usual knobs.
#[derive(Debug, Clone)]
pub struct OptimizerState<T> {
    pub m: Parameters<T>,
    pub v: Parameters<T>,
    pub step: u64,
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    pub weight_decay: T,
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new(arch: &Architecture, learning_rate: T) -> Result<Self, NetError> {
        Ok(OptimizerState {
            m: Parameters::zeros(arch)?,
            v: Parameters::zeros(arch)?,
            step: 0,
            learning_rate,
            beta1: T::from_f64c(0.9),
            beta2: T::from_f64c(0.999),
            epsilon: T::from_f64c(1e-8),
            weight_decay: T::zero(),
        })
    }
}

/// One Adam update: moments decay toward the gradient, bias-corrected
/// estimates drive the step, and the step counter advances.
pub fn adam_step<T: Scalar>(
    params: &mut Parameters<T>,
    grads: &Parameters<T>,
    opt: &mut OptimizerState<T>,
) -> Result<(), NetError> {
    if !params.shapes_match(grads) || !params.shapes_match(&opt.m) {
        return Err(NetError::ShapeMismatch("adam_step tensor shapes".into()));
    }
    opt.step += 1;
    let t = opt.step as i32;
    let b1 = opt.beta1;
    let b2 = opt.beta2;
    let corr1 = T::one() - b1.powi(t);
    let corr2 = T::one() - b2.powi(t);
    let one = T::one();
    let wd = opt.weight_decay;

    let ps = params.tensors_mut();
    let gs = grads.tensors();
    let ms = opt.m.tensors_mut();
    let vs = opt.v.tensors_mut();
    for (((p, g), m), v) in ps.into_iter().zip(gs).zip(ms).zip(vs) {
        for i in 0..p.len() {
            let mut grad = g[i];
            if wd != T::zero() {
                grad = grad + wd * p[i];
            }
            m[i] = b1 * m[i] + (one - b1) * grad;
            v[i] = b2 * v[i] + (one - b2) * grad * grad;
            let m_hat = m[i] / corr1;
            let v_hat = v[i] / corr2;
            p[i] = p[i] - opt.learning_rate * m_hat / (v_hat.sqrt() + opt.epsilon);
        }
    }
    Ok(())
}
