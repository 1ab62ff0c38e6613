//! Dense feed-forward networks with hand-written backward passes, Gaussian
//! latents with closed-form KL divergences, and AdamW.

mod activation;
mod adamw;
mod dense;
mod latent;

pub use activation::{gelu, gelu_grad, Activation};
pub use adamw::{adamw_update, AdamWConfig, OptimizerState};
pub use dense::{DenseNet, ForwardCache, LayerShape};
pub use latent::{kl_gauss_gauss, kl_std_normal, reparam_sample, GaussianLatent};
