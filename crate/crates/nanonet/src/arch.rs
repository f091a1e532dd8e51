//! Network architecture description and shape propagation.

use crate::NetError;

/// One valid (no padding) convolution layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
}

/// Two convolutions, a hidden dense layer, and a linear head, with an
/// optional vector concatenated between the conv stack and the dense stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Architecture {
    /// Input tensor shape as (channels, height, width).
    pub input: (usize, usize, usize),
    pub conv1: ConvSpec,
    pub conv2: ConvSpec,
    /// Width of the hidden dense layer.
    pub hidden: usize,
    /// Width of the vector appended to the flattened conv features
    /// (0 when no concatenation point is used).
    pub concat_width: usize,
    pub output_width: usize,
}

/// Shapes derived from an [`Architecture`], computed once and reused by the
/// forward/backward passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub c0: usize,
    pub h0: usize,
    pub w0: usize,
    pub c1: usize,
    pub h1: usize,
    pub w1: usize,
    pub c2: usize,
    pub h2: usize,
    pub w2: usize,
    /// Spatial positions after conv1 / conv2.
    pub p1: usize,
    pub p2: usize,
    /// Flattened conv output width.
    pub flat: usize,
    /// Dense input width (flat + concat).
    pub fc1_in: usize,
    pub hidden: usize,
    pub concat: usize,
    pub out: usize,
}

fn conv_out(len: usize, k: usize, stride: usize) -> Option<usize> {
    if k == 0 || stride == 0 || len < k {
        return None;
    }
    Some((len - k) / stride + 1)
}

impl Architecture {
    /// The default stack: 5x5/32 and 3x3/64 convolutions (stride 1) into a
    /// 512-unit hidden layer.
    pub fn default_stack(
        input: (usize, usize, usize),
        concat_width: usize,
        output_width: usize,
    ) -> Self {
        Architecture {
            input,
            conv1: ConvSpec { out_channels: 32, kernel: 5, stride: 1 },
            conv2: ConvSpec { out_channels: 64, kernel: 3, stride: 1 },
            hidden: 512,
            concat_width,
            output_width,
        }
    }

    /// Validates the layer chain and returns all derived shapes.
    pub fn dims(&self) -> Result<Dims, NetError> {
        let (c0, h0, w0) = self.input;
        if c0 == 0 || h0 == 0 || w0 == 0 || self.hidden == 0 || self.output_width == 0 {
            return Err(NetError::InvalidArchitecture(format!("{self:?}")));
        }
        let h1 = conv_out(h0, self.conv1.kernel, self.conv1.stride);
        let w1 = conv_out(w0, self.conv1.kernel, self.conv1.stride);
        let (h1, w1) = match (h1, w1) {
            (Some(h), Some(w)) => (h, w),
            _ => return Err(NetError::InvalidArchitecture(format!("conv1 does not fit {self:?}"))),
        };
        let h2 = conv_out(h1, self.conv2.kernel, self.conv2.stride);
        let w2 = conv_out(w1, self.conv2.kernel, self.conv2.stride);
        let (h2, w2) = match (h2, w2) {
            (Some(h), Some(w)) => (h, w),
            _ => return Err(NetError::InvalidArchitecture(format!("conv2 does not fit {self:?}"))),
        };
        let c1 = self.conv1.out_channels;
        let c2 = self.conv2.out_channels;
        let flat = c2 * h2 * w2;
        Ok(Dims {
            c0,
            h0,
            w0,
            c1,
            h1,
            w1,
            c2,
            h2,
            w2,
            p1: h1 * w1,
            p2: h2 * w2,
            flat,
            fc1_in: flat + self.concat_width,
            hidden: self.hidden,
            concat: self.concat_width,
            out: self.output_width,
        })
    }
}
