//! Agent-based simulation of misinformation cascades over a social network
//! cloned from post/reshare histories.
//!
//! The crate is organized around a pipeline:
//!
//! 1. [`netgraph`] builds the directed reshare-inferred network from post
//!    and retweet records.
//! 2. [`communities`] partitions the network and labels each community from
//!    member vocabulary.
//! 3. [`embeddings`] supplies text embedding vectors and linear
//!    dimensionality reduction.
//! 4. [`gbtlearn`] is a self-contained gradient-boosted tree classifier with
//!    quantile-binned probability calibration.
//! 5. [`infectmodel`] assembles user/tweet features and serves calibrated
//!    per-exposure reshare probabilities.
//! 6. [`mutate`] predicts quote-tweet commentary through a chat-completion
//!    endpoint (or deterministic stubs) and gates it per user.
//! 7. [`sei`] runs the susceptible-exposed-infective cascade engine and
//!    aggregates Monte Carlo ensembles.
//! 8. [`scenarios`] sweeps countermeasures (quarantine, inoculation), red
//!    teams topics, and scores fidelity against observations.
//! 9. [`datagen`] generates synthetic ground-truth corpora and provides the
//!    exact live-edge cascade oracle used for verification.
//!
//! Every stochastic step is keyed off explicit seeds; identical inputs and
//! seeds reproduce identical outputs regardless of worker-thread count.

pub mod communities;
pub mod datagen;
pub mod draws;
pub mod embeddings;
pub mod error;
pub mod gbtlearn;
pub mod infectmodel;
pub mod mutate;
pub mod netgraph;
pub mod scenarios;
pub mod sei;

pub use error::{CascadeError, Result};
