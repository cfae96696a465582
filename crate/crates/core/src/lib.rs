//! Debate arena core: strategy evolution, move prediction, argument scoring,
//! model routing, the debate engine and its event store.

pub mod clock;
pub mod config;
pub mod debate;
pub mod engine;
pub mod error;
pub mod ga;
pub mod gateway;
pub mod hash;
pub mod outcome;
pub mod par;
pub mod rng;
pub mod rubric;
pub mod search;
pub mod selfplay;
pub mod store;

pub use error::{Error, Result};
