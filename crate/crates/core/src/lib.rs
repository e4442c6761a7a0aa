//! Morphable-model parameter regression trained as a Siamese network.
//!
//! A small two-head regressor maps noisy 2D landmarks to the 62 parameters of
//! a linear face model (scale, 3×3 projection matrix, 2D translation, 40
//! identity and 10 expression coefficients) and to an identity embedding.
//! Training combines a landmark-weighted parameter loss with contrastive
//! losses that pull same-identity shape predictions and embeddings together
//! and push different identities apart. The evaluation module measures how
//! stable reconstructed shapes are across poses and how well embeddings
//! verify identity.

pub mod error;
pub mod evaluation;
pub mod losses;
pub mod morphable_model;
pub mod regressor;
pub mod synth_data;
pub mod textio;

pub use error::{Error, Result};
