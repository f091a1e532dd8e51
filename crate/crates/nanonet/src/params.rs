//! Parameter storage and seeded initialization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Architecture, Dims, NetError, Scalar};

/// All learnable tensors of a network.
///
/// Convolution weights are packed in the same order the im2col pass emits
/// columns: index `((ky * K + kx) * in_channels + ic) * out_channels + oc`.
/// Dense layer 1 is stored input-major (`[fc1_in][hidden]`), dense layer 2
/// output-major (`[out][hidden]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters<T> {
    pub conv1_w: Vec<T>,
    pub conv1_b: Vec<T>,
    pub conv2_w: Vec<T>,
    pub conv2_b: Vec<T>,
    pub fc1_w: Vec<T>,
    pub fc1_b: Vec<T>,
    pub fc2_w: Vec<T>,
    pub fc2_b: Vec<T>,
}

impl<T: Scalar> Parameters<T> {
    /// Zero-filled parameters shaped for `arch`.
    pub fn zeros(arch: &Architecture) -> Result<Self, NetError> {
        let d = arch.dims()?;
        Ok(Parameters {
            conv1_w: vec![T::zero(); conv1_w_len(&d, arch)],
            conv1_b: vec![T::zero(); d.c1],
            conv2_w: vec![T::zero(); conv2_w_len(&d, arch)],
            conv2_b: vec![T::zero(); d.c2],
            fc1_w: vec![T::zero(); d.fc1_in * d.hidden],
            fc1_b: vec![T::zero(); d.hidden],
            fc2_w: vec![T::zero(); d.out * d.hidden],
            fc2_b: vec![T::zero(); d.out],
        })
    }

    pub fn tensors(&self) -> [&[T]; 8] {
        [
            &self.conv1_w,
            &self.conv1_b,
            &self.conv2_w,
            &self.conv2_b,
            &self.fc1_w,
            &self.fc1_b,
            &self.fc2_w,
            &self.fc2_b,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<T>; 8] {
        [
            &mut self.conv1_w,
            &mut self.conv1_b,
            &mut self.conv2_w,
            &mut self.conv2_b,
            &mut self.fc1_w,
            &mut self.fc1_b,
            &mut self.fc2_w,
            &mut self.fc2_b,
        ]
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn zero_fill(&mut self) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|x| *x = T::zero());
        }
    }

    pub fn shapes_match(&self, other: &Self) -> bool {
        self.tensors()
            .iter()
            .zip(other.tensors().iter())
            .all(|(a, b)| a.len() == b.len())
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }
}

fn conv1_w_len(d: &Dims, arch: &Architecture) -> usize {
    arch.conv1.kernel * arch.conv1.kernel * d.c0 * d.c1
}

fn conv2_w_len(d: &Dims, arch: &Architecture) -> usize {
    arch.conv2.kernel * arch.conv2.kernel * d.c1 * d.c2
}

/// Uniform bound for a layer with the given fan-in: weights are drawn from
/// `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`.
pub fn init_bound(fan_in: usize) -> f64 {
    1.0 / (fan_in as f64).sqrt()
}

/// Deterministic seeded initialization: fan-in-scaled uniform weights, zero
/// biases. The draw sequence is fixed (conv1, conv2, fc1, fc2) and sampled
/// in f64 so f32 and f64 networks see the same underlying stream.
pub fn init_params<T: Scalar>(arch: &Architecture, seed: u64) -> Result<Parameters<T>, NetError> {
    let d = arch.dims()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = Parameters::zeros(arch)?;

    let fill = |w: &mut [T], fan_in: usize, rng: &mut ChaCha8Rng| {
        let b = init_bound(fan_in);
        for x in w.iter_mut() {
            let u: f64 = rng.gen::<f64>() * 2.0 - 1.0;
            *x = T::from_f64c(u * b);
        }
    };

    let fan1 = d.c0 * arch.conv1.kernel * arch.conv1.kernel;
    let fan2 = d.c1 * arch.conv2.kernel * arch.conv2.kernel;
    fill(&mut params.conv1_w, fan1, &mut rng);
    fill(&mut params.conv2_w, fan2, &mut rng);
    fill(&mut params.fc1_w, d.fc1_in, &mut rng);
    fill(&mut params.fc2_w, d.hidden, &mut rng);
    Ok(params)
}
