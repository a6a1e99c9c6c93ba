use std::fmt;

use serde::{Deserialize, Serialize};

use super::DomainError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayerKind {
    #[serde(rename = "conv")]
    Conv,
    #[serde(rename = "fc")]
    FullyConnected,
    /// Fused non-convolutional block (residual add, pooling, reshape); costs no cycles.
    #[serde(rename = "passthrough")]
    Passthrough,
}

/// Tensor shape as (height, width, channels).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub h: u32,
    pub w: u32,
    pub c: u32,
}

impl Shape {
    pub const fn new(h: u32, w: u32, c: u32) -> Self {
        Shape { h, w, c }
    }

    pub fn elements(&self) -> u64 {
        self.h as u64 * self.w as u64 * self.c as u64
    }

    fn is_positive(&self) -> bool {
        self.h >= 1 && self.w >= 1 && self.c >= 1
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.h, self.w, self.c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "LayerRecord", into = "LayerRecord")]
pub struct LayerSpec {
    pub kind: LayerKind,
    /// Kernel size; only meaningful for convolutions.
    pub kernel: u32,
    pub in_shape: Shape,
    pub out_shape: Shape,
    pub weight_bytes: u64,
    pub bias_bytes: u64,
    pub out_bytes: u64,
}

impl LayerSpec {
    pub fn conv(kernel: u32, in_shape: Shape, out_shape: Shape) -> Self {
        LayerSpec {
            kind: LayerKind::Conv,
            kernel,
            in_shape,
            out_shape,
            weight_bytes: kernel as u64 * kernel as u64 * in_shape.c as u64 * out_shape.c as u64,
            bias_bytes: out_shape.c as u64,
            out_bytes: out_shape.elements(),
        }
    }

    pub fn fully_connected(in_shape: Shape, outputs: u32) -> Self {
        LayerSpec {
            kind: LayerKind::FullyConnected,
            kernel: 1,
            in_shape,
            out_shape: Shape::new(1, 1, outputs),
            weight_bytes: in_shape.elements() * outputs as u64,
            bias_bytes: outputs as u64,
            out_bytes: outputs as u64,
        }
    }

    pub fn passthrough(shape: Shape) -> Self {
        LayerSpec {
            kind: LayerKind::Passthrough,
            kernel: 1,
            in_shape: shape,
            out_shape: shape,
            weight_bytes: 0,
            bias_bytes: 0,
            out_bytes: shape.elements(),
        }
    }

    fn check(&self) -> Result<(), String> {
        if !self.in_shape.is_positive() || !self.out_shape.is_positive() {
            return Err("shape components must be >= 1".into());
        }
        if self.kind == LayerKind::Conv && self.kernel == 0 {
            return Err("convolution kernel must be >= 1".into());
        }
        if self.out_bytes == 0 {
            return Err("out_bytes must be > 0".into());
        }
        if self.kind == LayerKind::Passthrough && (self.weight_bytes != 0 || self.bias_bytes != 0) {
            return Err("passthrough layers carry no weights or biases".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub kind: LayerKind,
    #[serde(default = "one")]
    pub k: u32,
    pub h_in: u32,
    pub w_in: u32,
    pub c_in: u32,
    pub h_out: u32,
    pub w_out: u32,
    pub c_out: u32,
    pub weight_bytes: u64,
    pub bias_bytes: u64,
    pub out_bytes: u64,
}

fn one() -> u32 {
    1
}

impl From<LayerRecord> for LayerSpec {
    fn from(r: LayerRecord) -> Self {
        LayerSpec {
            kind: r.kind,
            kernel: r.k,
            in_shape: Shape::new(r.h_in, r.w_in, r.c_in),
            out_shape: Shape::new(r.h_out, r.w_out, r.c_out),
            weight_bytes: r.weight_bytes,
            bias_bytes: r.bias_bytes,
            out_bytes: r.out_bytes,
        }
    }
}

impl From<LayerSpec> for LayerRecord {
    fn from(l: LayerSpec) -> Self {
        LayerRecord {
            kind: l.kind,
            k: l.kernel,
            h_in: l.in_shape.h,
            w_in: l.in_shape.w,
            c_in: l.in_shape.c,
            h_out: l.out_shape.h,
            w_out: l.out_shape.w,
            c_out: l.out_shape.c,
            weight_bytes: l.weight_bytes,
            bias_bytes: l.bias_bytes,
            out_bytes: l.out_bytes,
        }
    }
}

/// Half-open range of layer indices `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LayerRange {
    pub start: usize,
    pub end: usize,
}

impl LayerRange {
    pub const fn new(start: usize, end: usize) -> Self {
        LayerRange { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

impl fmt::Display for LayerRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}:{})", self.start, self.end)
    }
}

/// Accelerator resources consumed by a slice of a model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Footprint {
    pub weight_bytes: u64,
    pub bias_bytes: u64,
    pub layers: u32,
}

impl Footprint {
    pub fn add(&mut self, other: &Footprint) {
        self.weight_bytes += other.weight_bytes;
        self.bias_bytes += other.bias_bytes;
        self.layers += other.layers;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ModelRecord", into = "ModelRecord")]
pub struct ModelDescriptor {
    pub name: String,
    pub input_bytes: u64,
    pub layers: Vec<LayerSpec>,
    /// Published model size, checked against the summed layer weights when present.
    pub declared_size: Option<u64>,
}

impl ModelDescriptor {
    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn weight_bytes(&self) -> u64 {
        self.layers.iter().map(|l| l.weight_bytes).sum()
    }

    pub fn bias_bytes(&self) -> u64 {
        self.layers.iter().map(|l| l.bias_bytes).sum()
    }

    /// Bytes entering layer `index`: the model input for layer 0, otherwise the previous output.
    pub fn input_bytes_of(&self, index: usize) -> u64 {
        if index == 0 {
            self.input_bytes
        } else {
            self.layers[index - 1].out_bytes
        }
    }

    /// Bytes leaving the last layer of `range`.
    pub fn output_bytes_of(&self, range: LayerRange) -> u64 {
        self.layers[range.end - 1].out_bytes
    }

    pub fn output_bytes(&self) -> u64 {
        self.layers.last().map_or(0, |l| l.out_bytes)
    }

    pub fn footprint(&self, range: LayerRange) -> Footprint {
        let slice = &self.layers[range.start..range.end];
        Footprint {
            weight_bytes: slice.iter().map(|l| l.weight_bytes).sum(),
            bias_bytes: slice.iter().map(|l| l.bias_bytes).sum(),
            layers: slice.len() as u32,
        }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        let err = |layer: Option<usize>, reason: String| DomainError::InvalidModel {
            model: self.name.clone(),
            layer,
            reason,
        };
        if self.name.is_empty() {
            return Err(err(None, "model name must be nonempty".into()));
        }
        if self.layers.is_empty() {
            return Err(err(None, "model has no layers".into()));
        }
        if self.input_bytes == 0 {
            return Err(err(None, "input_bytes must be > 0".into()));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            layer.check().map_err(|reason| err(Some(i), reason))?;
            if i > 0 {
                let prev = &self.layers[i - 1];
                if prev.out_shape != layer.in_shape {
                    return Err(err(
                        Some(i),
                        format!(
                            "input shape {} does not match previous output {}",
                            layer.in_shape, prev.out_shape
                        ),
                    ));
                }
            }
        }
        if let Some(size) = self.declared_size {
            let total = self.weight_bytes();
            if size != total {
                return Err(err(
                    None,
                    format!("declared size {size} B but layers sum to {total} B"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub name: String,
    pub input_bytes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_bytes: Option<u64>,
    pub layers: Vec<LayerSpec>,
}

pub fn validate_model(record: ModelRecord) -> Result<ModelDescriptor, DomainError> {
    let model = ModelDescriptor {
        name: record.name,
        input_bytes: record.input_bytes,
        layers: record.layers,
        declared_size: record.size_bytes,
    };
    model.validate()?;
    Ok(model)
}

impl TryFrom<ModelRecord> for ModelDescriptor {
    type Error = DomainError;

    fn try_from(record: ModelRecord) -> Result<Self, Self::Error> {
        validate_model(record)
    }
}

impl From<ModelDescriptor> for ModelRecord {
    fn from(m: ModelDescriptor) -> Self {
        ModelRecord {
            name: m.name,
            input_bytes: m.input_bytes,
            size_bytes: m.declared_size,
            layers: m.layers,
        }
    }
}
