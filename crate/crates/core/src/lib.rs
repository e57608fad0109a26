//! Markovian embeddings of non-Markovian open quantum systems: coupled block
//! master equations and their homodyne-monitored stochastic counterparts.

pub mod cli;
pub mod config;
pub mod error;
pub mod fixtures;
pub mod generators;
pub mod integrators;
pub mod linalg;
pub mod model;
pub mod noise;
pub mod verify;

pub use error::{Error, Result};
pub use generators::{BlockGenerator, BlockState, Fault, JointGenerator, JointState, Quadrature};
pub use integrators::{Measurement, Representation, Scheme, SimConfig, State};
pub use linalg::{CMatrix, SubsystemDims};
pub use model::{CompoundBath, EmbeddingModel, TimedOperator};
pub use num_complex::Complex64 as C64;
