//! Versioned binary parameter container: a shape header followed by
//! row-major little-endian f32 tensors. Loading rejects any shape mismatch.

use std::io::{Read, Write};


use crate::{Architecture, ConvSpec, NetError, Parameters, Scalar};

const MAGIC: &[u8; 4] = b"NNCP";
const VERSION: u32 = 1;

fn write_u32<W: Write>(w: &mut W, x: u32) -> Result<(), NetError> {
    w.write_all(&x.to_le_bytes())?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, NetError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn write_u64<W: Write>(w: &mut W, x: u64) -> Result<(), NetError> {
    w.write_all(&x.to_le_bytes())?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, NetError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn write_arch<W: Write>(w: &mut W, arch: &Architecture) -> Result<(), NetError> {
    let fields = [
        arch.input.0,
        arch.input.1,
        arch.input.2,
        arch.conv1.out_channels,
        arch.conv1.kernel,
        arch.conv1.stride,
        arch.conv2.out_channels,
        arch.conv2.kernel,
        arch.conv2.stride,
        arch.hidden,
        arch.concat_width,
        arch.output_width,
    ];
    for f in fields {
        write_u32(w, f as u32)?;
    }
    Ok(())
}

fn read_arch<R: Read>(r: &mut R) -> Result<Architecture, NetError> {
    let mut f = [0u32; 12];
    for v in f.iter_mut() {
        *v = read_u32(r)?;
    }
    Ok(Architecture {
        input: (f[0] as usize, f[1] as usize, f[2] as usize),
        conv1: ConvSpec { out_channels: f[3] as usize, kernel: f[4] as usize, stride: f[5] as usize },
        conv2: ConvSpec { out_channels: f[6] as usize, kernel: f[7] as usize, stride: f[8] as usize },
        hidden: f[9] as usize,
        concat_width: f[10] as usize,
        output_width: f[11] as usize,
    })
}

/// Writes `params` (converted to f32) with its architecture header.
pub fn save_params<T: Scalar, W: Write>(
    w: &mut W,
    arch: &Architecture,
    params: &Parameters<T>,
) -> Result<(), NetError> {
    let expected = Parameters::<T>::zeros(arch)?;
    if !expected.shapes_match(params) {
        return Err(NetError::ShapeMismatch("checkpoint save shape".into()));
    }
    w.write_all(MAGIC)?;
    write_u32(w, VERSION)?;
    write_arch(w, arch)?;
    for tensor in params.tensors() {
        write_u64(w, tensor.len() as u64)?;
        let mut buf = Vec::with_capacity(tensor.len() * 4);
        for x in tensor {
            let v = x.to_f32().ok_or_else(|| {
                NetError::ShapeMismatch("non-finite parameter in checkpoint".into())
            })?;
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

/// Reads a checkpoint, returning its architecture and parameters.
pub fn load_params<T: Scalar, R: Read>(r: &mut R) -> Result<(Architecture, Parameters<T>), NetError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(NetError::BadCheckpoint("bad magic".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(NetError::BadCheckpoint(format!("unsupported version {version}")));
    }
    let arch = read_arch(r)?;
    let mut params = Parameters::<T>::zeros(&arch)?;
    for tensor in params.tensors_mut() {
        let len = read_u64(r)? as usize;
        if len != tensor.len() {
            return Err(NetError::BadCheckpoint(format!(
                "tensor length {len}, expected {}",
                tensor.len()
            )));
        }
        let mut buf = vec![0u8; len * 4];
        r.read_exact(&mut buf)?;
        for (x, chunk) in tensor.iter_mut().zip(buf.chunks_exact(4)) {
            let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            *x = T::from_f64c(v as f64);
        }
    }
    Ok((arch, params))
}

/// Loads a checkpoint that must match `expected`, rejecting shape drift.
pub fn load_params_expecting<T: Scalar, R: Read>(
    r: &mut R,
    expected: &Architecture,
) -> Result<Parameters<T>, NetError> {
    let (arch, params) = load_params(r)?;
    if arch != *expected {
        return Err(NetError::BadCheckpoint(format!(
            "architecture mismatch: file {arch:?}, expected {expected:?}"
        )));
    }
    Ok(params)
}
