//! Elementwise nonlinearities.

/// Hidden-layer activation function.
///
/// `tanh` and `sigmoid` are smooth; `LeakyRelu` is piecewise linear with a
/// configurable negative slope. At the leaky-ReLU kink (`z = 0`) the
/// derivative is taken from the negative-slope branch, i.e. it equals
/// `slope`. This is a fixed convention so gradients stay deterministic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Tanh,
    Sigmoid,
    LeakyRelu { slope: f64 },
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::LeakyRelu { slope } => {
                if z > 0.0 {
                    z
                } else {
                    slope * z
                }
            }
        }
    }

    /// Derivative expressed in terms of the activation *output* `a`.
    ///
    /// For all three activations the derivative is recoverable from the
    /// output alone (for leaky ReLU because `sign(a) = sign(z)` whenever
    /// `slope >= 0`), which lets forward passes cache only post-activation
    /// values. `a = 0` maps to the negative branch, matching the kink
    /// convention above.
    #[inline]
    pub fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Sigmoid => a * (1.0 - a),
            Activation::LeakyRelu { slope } => {
                if a > 0.0 {
                    1.0
                } else {
                    slope
                }
            }
        }
    }

    /// Short name used in architecture descriptors and config files.
    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::LeakyRelu { .. } => "leaky-relu",
        }
    }
}
