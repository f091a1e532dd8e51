//! Mean squared error.

use crate::{NetError, Scalar};

/// Mean of squared differences between two equal-length vectors.
pub fn mse_loss<T: Scalar>(pred: &[T], target: &[T]) -> Result<T, NetError> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(NetError::ShapeMismatch(format!(
            "mse_loss lengths {} vs {}",
            pred.len(),
            target.len()
        )));
    }
    let mut acc = T::zero();
    for (&p, &t) in pred.iter().zip(target.iter()) {
        let d = p - t;
        acc = acc + d * d;
    }
    Ok(acc / T::from_f64c(pred.len() as f64))
}
