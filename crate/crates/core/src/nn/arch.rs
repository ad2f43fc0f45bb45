//! Network architecture description.

use crate::error::{Error, Result};
use crate::nn::Activation;

/// What the last layer emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputHead {
    /// Softmax over the logits; outputs lie in (0, 1) and sum to 1.
    Softmax,
    /// Raw logits.
    Identity,
}

/// Shape of a fully connected network: `input_dim` features, one or more
/// hidden layers with a shared activation, and a `k`-dimensional output.
///
/// Layer `m` computes `z_m = W_m a_{m-1} + b_m` with `a_0 = x`; every hidden
/// layer applies the activation, the final layer applies the output head.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpArchitecture {
    input_dim: usize,
    hidden_sizes: Vec<usize>,
    output_dim: usize,
    activation: Activation,
    output_head: OutputHead,
}

impl MlpArchitecture {
    pub fn new(
        input_dim: usize,
        hidden_sizes: Vec<usize>,
        output_dim: usize,
        activation: Activation,
        output_head: OutputHead,
    ) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 {
            return Err(Error::contract("architecture dimensions must be >= 1"));
        }
        if hidden_sizes.is_empty() {
            return Err(Error::contract("hidden_sizes must be non-empty"));
        }
        if hidden_sizes.iter().any(|&h| h == 0) {
            return Err(Error::contract("hidden layer sizes must be >= 1"));
        }
        if let Activation::LeakyRelu { slope } = activation {
            if !slope.is_finite() || slope < 0.0 {
                return Err(Error::contract(format!(
                    "leaky-relu slope must be finite and >= 0, got {slope}"
                )));
            }
        }
        Ok(Self {
            input_dim,
            hidden_sizes,
            output_dim,
            activation,
            output_head,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_sizes(&self) -> &[usize] {
        &self.hidden_sizes
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn output_head(&self) -> OutputHead {
        self.output_head
    }

    /// Number of layers, hidden plus output.
    pub fn layer_count(&self) -> usize {
        self.hidden_sizes.len() + 1
    }

    /// `(fan_in, fan_out)` of each layer in order.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.layer_count());
        let mut fan_in = self.input_dim;
        for &h in &self.hidden_sizes {
            dims.push((fan_in, h));
            fan_in = h;
        }
        dims.push((fan_in, self.output_dim));
        dims
    }

    /// Total parameter count: sum over layers of `(fan_in + 1) * fan_out`.
    pub fn param_count(&self) -> usize {
        self.layer_dims()
            .iter()
            .map(|&(fi, fo)| (fi + 1) * fo)
            .sum()
    }

    /// Compact descriptor like `2-128-128-2`, used in CSV outputs.
    pub fn descriptor(&self) -> String {
        let mut s = self.input_dim.to_string();
        for h in &self.hidden_sizes {
            s.push('-');
            s.push_str(&h.to_string());
        }
        s.push('-');
        s.push_str(&self.output_dim.to_string());
        s
    }
}
