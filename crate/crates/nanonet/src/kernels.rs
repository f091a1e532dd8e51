//! Inner-loop primitives. Everything hot reduces to a broadcast
//! multiply-accumulate or a lane-split dot product; both have a fixed
//! accumulation order so results are reproducible run to run.

use crate::Scalar;

/// acc += s * v, elementwise.
#[inline]
pub fn fma_sv<T: Scalar>(acc: &mut [T], s: T, v: &[T]) {
    debug_assert_eq!(acc.len(), v.len());
    for (a, &x) in acc.iter_mut().zip(v.iter()) {
        *a = *a + x * s;
    }
}

/// acc += v, elementwise.
#[inline]
pub fn add_v<T: Scalar>(acc: &mut [T], v: &[T]) {
    debug_assert_eq!(acc.len(), v.len());
    for (a, &x) in acc.iter_mut().zip(v.iter()) {
        *a = *a + x;
    }
}

/// Dot product with 8 independent accumulator lanes (vectorizable without
/// reassociation), reduced in a fixed order.
#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut lanes = [T::zero(); 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let ra = ca.remainder();
    let rb = cb.remainder();
    for (xs, ys) in ca.zip(cb) {
        for l in 0..8 {
            lanes[l] = lanes[l] + xs[l] * ys[l];
        }
    }
    let mut s = T::zero();
    for lane in lanes {
        s = s + lane;
    }
    for (&x, &y) in ra.iter().zip(rb.iter()) {
        s = s + x * y;
    }
    s
}

/// In-place ReLU.
#[inline]
pub fn relu<T: Scalar>(xs: &mut [T]) {
    for x in xs.iter_mut() {
        if *x < T::zero() {
            *x = T::zero();
        }
    }
}

/// d *= (a > 0), the ReLU Jacobian applied to an upstream gradient.
#[inline]
pub fn relu_mask<T: Scalar>(d: &mut [T], a: &[T]) {
    debug_assert_eq!(d.len(), a.len());
    for (g, &x) in d.iter_mut().zip(a.iter()) {
        if x <= T::zero() {
            *g = T::zero();
        }
    }
}
