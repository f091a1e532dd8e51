//! Scalar abstraction so the whole engine runs in f32 or f64.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, NumAssignOps};

/// Floating-point scalar the network math is generic over.
///
/// f32 is the training type; f64 is used where oracles need the extra
/// precision (finite-difference gradient checks and the like).
pub trait Scalar:
    Float + FromPrimitive + NumAssignOps + Default + Debug + Send + Sync + 'static
{
    fn from_f64c(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
