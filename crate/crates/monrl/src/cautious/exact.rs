//! Exact (non-sampled) policy evaluation for small enumerable processes with
//! deterministic dynamics; the oracle-side counterpart to rollout scoring.

use crate::RlError;

/// Value of following `policy` from `start` under deterministic `dynamics`,
/// scored by `reward`, discounted by `gamma`. Iterates the evaluation
/// recursion to the requested tolerance.
pub fn evaluate_policy_exact(
    n_states: usize,
    start: usize,
    policy: impl Fn(usize) -> usize,
    dynamics: impl Fn(usize, usize) -> usize,
    reward: impl Fn(usize, usize) -> f64,
    gamma: f64,
    tol: f64,
) -> Result<f64, RlError> {
    if n_states == 0 || start >= n_states {
        return Err(RlError::Config("start state out of range".into()));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(RlError::Config("gamma must be in [0, 1)".into()));
    }
    let next: Vec<usize> = (0..n_states).map(|s| dynamics(s, policy(s))).collect();
    if next.iter().any(|&s| s >= n_states) {
        return Err(RlError::Config("dynamics left the state space".into()));
    }
    let r: Vec<f64> = (0..n_states).map(|s| reward(s, policy(s))).collect();
    let mut v = vec![0.0f64; n_states];
    let mut v_next = vec![0.0f64; n_states];
    // Geometric contraction: stop once the sup-norm step is below the
    // tolerance scaled by the remaining mass.
    let limit = tol * (1.0 - gamma);
    for _ in 0..5_000_000usize {
        let mut delta = 0.0f64;
        for s in 0..n_states {
            v_next[s] = r[s] + gamma * v[next[s]];
            delta = delta.max((v_next[s] - v[s]).abs());
        }
        std::mem::swap(&mut v, &mut v_next);
        if delta <= limit {
            return Ok(v[start]);
        }
    }
    Err(RlError::Config("policy evaluation did not converge".into()))
}
