//! Flat weight vectors and their deterministic layout.
//!
//! Layout is layer-major: for each layer, first the weight matrix in
//! row-major order (`row` = output neuron, `col` = input neuron), then the
//! biases. This single canonical flat index is what HMC momenta pair against
//! and what the serialized form stores.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::MlpArchitecture;

const MAGIC: &[u8; 4] = b"BNNW";
const VERSION: u32 = 1;

/// All parameters of a network as one flat `f64` vector.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    values: Vec<f64>,
}

/// One layer's parameters in matrix form, produced by [`WeightVector::unpack`].
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    /// Row-major `(fan_out, fan_in)` weight matrix.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl WeightVector {
    /// Wrap a flat vector, checking finiteness.
    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(format!(
                "weight vector has non-finite entry at index {i}"
            )));
        }
        Ok(Self { values })
    }

    /// All-zero weights for the given architecture.
    pub fn zeros(arch: &MlpArchitecture) -> Self {
        Self {
            values: vec![0.0; arch.param_count()],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// Check that this vector's length matches `arch`.
    pub fn check_arch(&self, arch: &MlpArchitecture) -> Result<()> {
        if self.values.len() != arch.param_count() {
            return Err(Error::contract(format!(
                "weight vector length {} does not match architecture parameter count {}",
                self.values.len(),
                arch.param_count()
            )));
        }
        Ok(())
    }

    /// Flat index of weight `(row, col)` in `layer`.
    pub fn weight_index(arch: &MlpArchitecture, layer: usize, row: usize, col: usize) -> usize {
        let dims = arch.layer_dims();
        let base: usize = dims[..layer].iter().map(|&(fi, fo)| (fi + 1) * fo).sum();
        let (fan_in, _) = dims[layer];
        base + row * fan_in + col
    }

    /// Flat index of the bias of neuron `row` in `layer`.
    pub fn bias_index(arch: &MlpArchitecture, layer: usize, row: usize) -> usize {
        let dims = arch.layer_dims();
        let base: usize = dims[..layer].iter().map(|&(fi, fo)| (fi + 1) * fo).sum();
        let (fan_in, fan_out) = dims[layer];
        base + fan_out * fan_in + row
    }

    /// Split into per-layer weight matrices and bias vectors.
    pub fn unpack(&self, arch: &MlpArchitecture) -> Result<Vec<LayerParams>> {
        self.check_arch(arch)?;
        let mut layers = Vec::with_capacity(arch.layer_count());
        let mut offset = 0;
        for (fan_in, fan_out) in arch.layer_dims() {
            let w_len = fan_in * fan_out;
            let weights = self.values[offset..offset + w_len].to_vec();
            offset += w_len;
            let biases = self.values[offset..offset + fan_out].to_vec();
            offset += fan_out;
            layers.push(LayerParams { weights, biases });
        }
        Ok(layers)
    }

    /// Inverse of [`unpack`](Self::unpack): re-flatten per-layer parameters.
    pub fn pack(arch: &MlpArchitecture, layers: &[LayerParams]) -> Result<Self> {
        let dims = arch.layer_dims();
        if layers.len() != dims.len() {
            return Err(Error::contract(format!(
                "expected {} layers, got {}",
                dims.len(),
                layers.len()
            )));
        }
        let mut values = Vec::with_capacity(arch.param_count());
        for (layer, &(fan_in, fan_out)) in layers.iter().zip(dims.iter()) {
            if layer.weights.len() != fan_in * fan_out || layer.biases.len() != fan_out {
                return Err(Error::contract("layer parameter shapes do not match architecture"));
            }
            values.extend_from_slice(&layer.weights);
            values.extend_from_slice(&layer.biases);
        }
        WeightVector::from_vec(values)
    }

    /// Serialize: 16-byte header (magic `BNNW`, version `u32`, length `u64`)
    /// followed by little-endian `f64` values.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.values.len() as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format {
                expected: format!("{MAGIC:?}"),
                actual: format!("{magic:?}"),
            });
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != VERSION {
            return Err(Error::Format {
                expected: format!("version {VERSION}"),
                actual: format!("version {version}"),
            });
        }
        let mut len_bytes = [0u8; 8];
        r.read_exact(&mut len_bytes)?;
        let len = u64::from_le_bytes(len_bytes) as usize;
        let mut values = Vec::with_capacity(len);
        let mut buf = [0u8; 8];
        for _ in 0..len {
            r.read_exact(&mut buf)?;
            values.push(f64::from_le_bytes(buf));
        }
        WeightVector::from_vec(values)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }
}
