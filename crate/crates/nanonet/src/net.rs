//! Forward pass and exact reverse-mode gradients for the conv/dense stack.
//!
//! Layout notes: activations are kept position-major (`[y*w + x][channel]`)
//! so im2col rows are contiguous copies, and the conv weights are packed
//! `((ky*K + kx)*in_c + ic) * out_c + oc` to match. The flatten order fed to
//! the dense stage is therefore (row, col, channel).

use crate::kernels::{add_v, dot, fma_sv, relu, relu_mask};
use crate::{Architecture, Dims, NetError, Parameters, Scalar};

/// Scratch buffers reused across forward/backward calls.
#[derive(Debug, Clone)]
pub struct Workspace<T> {
    pub(crate) dims: Dims,
    a0: Vec<T>,
    cols1: Vec<T>,
    a1: Vec<T>,
    cols2: Vec<T>,
    a2_cat: Vec<T>,
    h1: Vec<T>,
    out: Vec<T>,
    d_out: Vec<T>,
    d_h1: Vec<T>,
    d_flat: Vec<T>,
    d_cols2: Vec<T>,
    d_a1: Vec<T>,
}

impl<T: Scalar> Workspace<T> {
    pub fn new(arch: &Architecture) -> Result<Self, NetError> {
        let d = arch.dims()?;
        let kk1 = arch.conv1.kernel * arch.conv1.kernel * d.c0;
        let kk2 = arch.conv2.kernel * arch.conv2.kernel * d.c1;
        Ok(Workspace {
            dims: d,
            a0: vec![T::zero(); d.h0 * d.w0 * d.c0],
            cols1: vec![T::zero(); d.p1 * kk1],
            a1: vec![T::zero(); d.p1 * d.c1],
            cols2: vec![T::zero(); d.p2 * kk2],
            a2_cat: vec![T::zero(); d.fc1_in],
            h1: vec![T::zero(); d.hidden],
            out: vec![T::zero(); d.out],
            d_out: vec![T::zero(); d.out],
            d_h1: vec![T::zero(); d.hidden],
            d_flat: vec![T::zero(); d.flat],
            d_cols2: vec![T::zero(); kk2],
            d_a1: vec![T::zero(); d.p1 * d.c1],
        })
    }

    /// Output of the most recent forward pass.
    pub fn output(&self) -> &[T] {
        &self.out
    }
}

/// A batch of inputs: `len` samples of `c*h*w` values each, with an optional
/// `len * concat_width` block of concat vectors.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a, T> {
    pub inputs: &'a [T],
    pub concats: Option<&'a [T]>,
    pub len: usize,
}

/// Regression targets for a batch.
#[derive(Debug, Clone, Copy)]
pub enum BatchTargets<'a, T> {
    /// One full output vector per sample (`len * output_width` values).
    Full(&'a [T]),
    /// One selected output per sample: the loss only reads the output at
    /// `indices[i]` against `values[i]`.
    Masked { indices: &'a [usize], values: &'a [T] },
}

fn check_input_shapes<T: Scalar>(
    arch: &Architecture,
    d: &Dims,
    input_len: usize,
    concat_len: Option<usize>,
    samples: usize,
) -> Result<(), NetError> {
    let expect_in = samples * d.c0 * d.h0 * d.w0;
    if input_len != expect_in {
        return Err(NetError::ShapeMismatch(format!(
            "input length {input_len}, expected {expect_in}"
        )));
    }
    match (arch.concat_width, concat_len) {
        (0, None) => Ok(()),
        (0, Some(_)) => Err(NetError::ShapeMismatch(
            "concat vector given but architecture has no concat point".into(),
        )),
        (w, None) => Err(NetError::ShapeMismatch(format!(
            "architecture expects a concat vector of width {w}"
        ))),
        (w, Some(n)) if n == samples * w => Ok(()),
        (w, Some(n)) => Err(NetError::ShapeMismatch(format!(
            "concat length {n}, expected {}",
            samples * w
        ))),
    }
}

/// im2col for position-major input; emits column order (ky, kx, channel).
fn im2col<T: Scalar>(
    src: &[T],
    w_in: usize,
    ch: usize,
    k: usize,
    stride: usize,
    h_out: usize,
    w_out: usize,
    cols: &mut [T],
) {
    let row_w = k * k * ch;
    let run = k * ch;
    for oy in 0..h_out {
        for ox in 0..w_out {
            let r = oy * w_out + ox;
            let dst = &mut cols[r * row_w..(r + 1) * row_w];
            for ky in 0..k {
                let src_base = ((oy * stride + ky) * w_in + ox * stride) * ch;
                dst[ky * run..(ky + 1) * run].copy_from_slice(&src[src_base..src_base + run]);
            }
        }
    }
}

/// out[r] = bias + cols[r] * w, followed by ReLU; `w` packed `[kkc][oc]`.
fn conv_apply<T: Scalar>(
    cols: &[T],
    positions: usize,
    kkc: usize,
    w: &[T],
    bias: &[T],
    out: &mut [T],
) {
    let oc = bias.len();
    for r in 0..positions {
        let row = &cols[r * kkc..(r + 1) * kkc];
        let acc = &mut out[r * oc..(r + 1) * oc];
        acc.copy_from_slice(bias);
        for (c, &x) in row.iter().enumerate() {
            if x != T::zero() {
                fma_sv(acc, x, &w[c * oc..(c + 1) * oc]);
            }
        }
        relu(acc);
    }
}

fn forward_ws<T: Scalar>(
    arch: &Architecture,
    params: &Parameters<T>,
    input: &[T],
    concat: Option<&[T]>,
    ws: &mut Workspace<T>,
) {
    let d = ws.dims;
    debug_assert_eq!(concat.map(|c| c.len()).unwrap_or(0), arch.concat_width);
    // Channel-major input to position-major.
    let p0 = d.h0 * d.w0;
    for c in 0..d.c0 {
        let plane = &input[c * p0..(c + 1) * p0];
        for (p, &v) in plane.iter().enumerate() {
            ws.a0[p * d.c0 + c] = v;
        }
    }
    let kk1 = arch.conv1.kernel * arch.conv1.kernel * d.c0;
    im2col(
        &ws.a0, d.w0, d.c0, arch.conv1.kernel, arch.conv1.stride, d.h1, d.w1, &mut ws.cols1,
    );
    conv_apply(&ws.cols1, d.p1, kk1, &params.conv1_w, &params.conv1_b, &mut ws.a1);

    let kk2 = arch.conv2.kernel * arch.conv2.kernel * d.c1;
    im2col(
        &ws.a1, d.w1, d.c1, arch.conv2.kernel, arch.conv2.stride, d.h2, d.w2, &mut ws.cols2,
    );
    {
        let (a2, _) = ws.a2_cat.split_at_mut(d.flat);
        conv_apply(&ws.cols2, d.p2, kk2, &params.conv2_w, &params.conv2_b, a2);
    }
    if let Some(cv) = concat {
        ws.a2_cat[d.flat..].copy_from_slice(cv);
    }

    ws.h1.copy_from_slice(&params.fc1_b);
    for (i, &x) in ws.a2_cat.iter().enumerate() {
        if x != T::zero() {
            fma_sv(&mut ws.h1, x, &params.fc1_w[i * d.hidden..(i + 1) * d.hidden]);
        }
    }
    relu(&mut ws.h1);

    for o in 0..d.out {
        ws.out[o] = params.fc2_b[o] + dot(&params.fc2_w[o * d.hidden..(o + 1) * d.hidden], &ws.h1);
    }
}

/// Backward pass for one sample; expects `ws` to hold the forward state and
/// `ws.d_out` the loss gradient w.r.t. the outputs. Accumulates into `grads`.
fn backward_ws<T: Scalar>(
    arch: &Architecture,
    params: &Parameters<T>,
    grads: &mut Parameters<T>,
    ws: &mut Workspace<T>,
) {
    let d = ws.dims;

    // Dense head.
    ws.d_h1.iter_mut().for_each(|x| *x = T::zero());
    for o in 0..d.out {
        let g = ws.d_out[o];
        if g == T::zero() {
            continue;
        }
        grads.fc2_b[o] = grads.fc2_b[o] + g;
        fma_sv(&mut grads.fc2_w[o * d.hidden..(o + 1) * d.hidden], g, &ws.h1);
        fma_sv(&mut ws.d_h1, g, &params.fc2_w[o * d.hidden..(o + 1) * d.hidden]);
    }
    relu_mask(&mut ws.d_h1, &ws.h1);

    // Hidden dense layer.
    add_v(&mut grads.fc1_b, &ws.d_h1);
    for (i, &x) in ws.a2_cat.iter().enumerate() {
        if x != T::zero() {
            fma_sv(&mut grads.fc1_w[i * d.hidden..(i + 1) * d.hidden], x, &ws.d_h1);
        }
    }
    for i in 0..d.flat {
        ws.d_flat[i] = dot(&params.fc1_w[i * d.hidden..(i + 1) * d.hidden], &ws.d_h1);
    }
    relu_mask(&mut ws.d_flat, &ws.a2_cat[..d.flat]);

    // Second convolution.
    let k2 = arch.conv2.kernel;
    let kk2 = k2 * k2 * d.c1;
    ws.d_a1.iter_mut().for_each(|x| *x = T::zero());
    for r in 0..d.p2 {
        let drow = &ws.d_flat[r * d.c2..(r + 1) * d.c2];
        if drow.iter().all(|&x| x == T::zero()) {
            continue;
        }
        add_v(&mut grads.conv2_b, drow);
        let cols_row = &ws.cols2[r * kk2..(r + 1) * kk2];
        for (c, &x) in cols_row.iter().enumerate() {
            if x != T::zero() {
                fma_sv(&mut grads.conv2_w[c * d.c2..(c + 1) * d.c2], x, drow);
            }
        }
        for c in 0..kk2 {
            ws.d_cols2[c] = dot(&params.conv2_w[c * d.c2..(c + 1) * d.c2], drow);
        }
        // Scatter the column gradient back onto conv1's activation grid.
        let oy = r / d.w2;
        let ox = r % d.w2;
        let run = k2 * d.c1;
        let stride = arch.conv2.stride;
        for ky in 0..k2 {
            let base = ((oy * stride + ky) * d.w1 + ox * stride) * d.c1;
            add_v(&mut ws.d_a1[base..base + run], &ws.d_cols2[ky * run..(ky + 1) * run]);
        }
    }
    relu_mask(&mut ws.d_a1, &ws.a1);

    // First convolution (no input gradient needed).
    let kk1 = arch.conv1.kernel * arch.conv1.kernel * d.c0;
    for r in 0..d.p1 {
        let drow = &ws.d_a1[r * d.c1..(r + 1) * d.c1];
        if drow.iter().all(|&x| x == T::zero()) {
            continue;
        }
        add_v(&mut grads.conv1_b, drow);
        let cols_row = &ws.cols1[r * kk1..(r + 1) * kk1];
        for (c, &x) in cols_row.iter().enumerate() {
            if x != T::zero() {
                fma_sv(&mut grads.conv1_w[c * d.c1..(c + 1) * d.c1], x, drow);
            }
        }
    }
}

/// Runs the network on a single input and returns the output vector.
pub fn forward<T: Scalar>(
    arch: &Architecture,
    params: &Parameters<T>,
    input: &[T],
    concat: Option<&[T]>,
) -> Result<Vec<T>, NetError> {
    let d = arch.dims()?;
    check_input_shapes::<T>(arch, &d, input.len(), concat.map(|c| c.len()), 1)?;
    let mut ws = Workspace::new(arch)?;
    forward_ws(arch, params, input, concat, &mut ws);
    Ok(ws.out)
}

/// Like [`forward`] but reusing caller scratch; returns a view of the output.
pub fn forward_into<'w, T: Scalar>(
    arch: &Architecture,
    params: &Parameters<T>,
    input: &[T],
    concat: Option<&[T]>,
    ws: &'w mut Workspace<T>,
) -> &'w [T] {
    forward_ws(arch, params, input, concat, ws);
    &ws.out
}

/// Computes the mean masked-MSE loss over a batch and its exact gradients
/// with respect to every parameter. `grads` is overwritten.
pub fn gradients<T: Scalar>(
    arch: &Architecture,
    params: &Parameters<T>,
    batch: &Batch<'_, T>,
    targets: &BatchTargets<'_, T>,
    grads: &mut Parameters<T>,
    ws: &mut Workspace<T>,
) -> Result<T, NetError> {
    let d = ws.dims;
    check_input_shapes::<T>(
        arch,
        &d,
        batch.inputs.len(),
        batch.concats.map(|c| c.len()),
        batch.len,
    )?;
    if !params.shapes_match(grads) {
        return Err(NetError::ShapeMismatch("gradient buffer shape".into()));
    }
    match targets {
        BatchTargets::Full(t) if t.len() != batch.len * d.out => {
            return Err(NetError::ShapeMismatch(format!(
                "target length {}, expected {}",
                t.len(),
                batch.len * d.out
            )));
        }
        BatchTargets::Masked { indices, values }
            if indices.len() != batch.len || values.len() != batch.len =>
        {
            return Err(NetError::ShapeMismatch("masked target length".into()));
        }
        _ => {}
    }

    grads.zero_fill();
    let sample_w = d.c0 * d.h0 * d.w0;
    let inv_b = T::from_f64c(1.0 / batch.len.max(1) as f64);
    let mut loss = T::zero();
    for s in 0..batch.len {
        let input = &batch.inputs[s * sample_w..(s + 1) * sample_w];
        let concat = batch
            .concats
            .map(|cv| &cv[s * arch.concat_width..(s + 1) * arch.concat_width]);
        forward_ws(arch, params, input, concat, ws);
        match targets {
            BatchTargets::Full(t) => {
                let trow = &t[s * d.out..(s + 1) * d.out];
                let inv = inv_b * T::from_f64c(1.0 / d.out as f64);
                for o in 0..d.out {
                    let diff = ws.out[o] - trow[o];
                    loss = loss + diff * diff * inv;
                    ws.d_out[o] = (diff + diff) * inv;
                }
            }
            BatchTargets::Masked { indices, values } => {
                let idx = indices[s];
                if idx >= d.out {
                    return Err(NetError::ShapeMismatch(format!(
                        "masked index {idx} out of range ({} outputs)",
                        d.out
                    )));
                }
                ws.d_out.iter_mut().for_each(|x| *x = T::zero());
                let diff = ws.out[idx] - values[s];
                loss = loss + diff * diff * inv_b;
                ws.d_out[idx] = (diff + diff) * inv_b;
            }
        }
        backward_ws(arch, params, grads, ws);
    }
    Ok(loss)
}
