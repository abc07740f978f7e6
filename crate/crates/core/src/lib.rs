//! Consistent information for systems of coding/decoding agents over noisy
//! discrete channels.
//!
//! A [`CommSystem`] couples a world distribution, two agents (each a coder
//! and a decoder matrix) and a channel. From it the crate derives the joint
//! matrix over (decoded, sent) referents and the measures built on it:
//! entropies, mutual information, the referential parameter σ, consistent
//! information σ·I and the split of lost information into physical and
//! referential noise. [`capacity`] bounds all of this by the channel
//! capacity, [`structure`] classifies permutation pipelines and [`evolve`]
//! runs a seeded selection experiment on populations of agents.

pub mod capacity;
pub mod case_study;
pub mod cli;
pub mod error;
pub mod evolve;
pub mod measures;
pub mod sample;
pub mod structure;
pub mod system;

pub use error::{CoreError, Result};
pub use system::{
    compose_end_to_end, decoded_distribution, joint_matrix, received_signal_distribution, signal_distribution,
    Agent, CommSystem, Direction, Distribution, JointMatrix, Label, Role, StochasticMatrix,
};
