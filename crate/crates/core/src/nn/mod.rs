//! The fully connected network: architecture, flat weight vectors, forward
//! evaluation, cross-entropy loss, and exact reverse-mode gradients with
//! respect to both weights and inputs.
//!
//! All operations here are pure functions of immutable arguments; identical
//! inputs produce bit-identical outputs regardless of evaluation order, so
//! they are safe to call concurrently across points and ensemble members.

mod activation;
mod arch;
pub mod batch;
mod forward;
mod weights;

pub use activation::Activation;
pub use arch::{MlpArchitecture, OutputHead};
pub use forward::{
    forward, gradients, loss, mean_gradients, squared_loss, squared_loss_gradients, GradientPair,
};
pub use weights::WeightVector;
