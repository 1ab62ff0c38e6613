//! Numerical core for recovering coherent event probabilities from language
//! model embeddings.
//!
//! The crate is `no_std` (with `alloc`). It covers exact dice corpora with
//! rational ground truth, a small dense-network substrate, the two-step
//! constrained VAE whose first latent carries sign-flipped log odds, the
//! comparison baselines, and the statistics used to score coherence and
//! accuracy. File formats and the command line live in the `coherent` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod corpus;
pub mod dice;
pub mod embeddings;
mod error;
pub mod eval;
pub mod linalg;
pub mod nn;
pub mod rational;
pub mod vae;

pub use error::{Error, Result};
