//! Dense feed-forward networks with hand-written backpropagation and
//! minibatch SGD. Shared by the cGAN and the MLP trading strategy.
//!
//! Rows are samples. Layer `i` maps `x (n x in)` to `x W_i + b_i` with
//! `W_i` stored `in x out`.

mod net;
mod train;

pub use net::{ForwardPass, Gradients, HiddenActivation, MlpNet, OutputActivation, SIGMOID_CLAMP};
pub use train::{train_regression, SgdConfig};
