//! Embedding-based evaluation of continuous-time dynamic graphs.
//!
//! A CTDG is projected twice through random matrices (per-node event
//! histories, then across nodes) into a fixed-size descriptor; two graphs are
//! compared by the cosine distance of their descriptors. Classical
//! snapshot-based baselines, perturbation generators and an experiment
//! harness live alongside.

pub mod classical;
pub mod ctdg;
pub mod distances;
pub mod error;
pub mod harness;
pub mod jl;
pub mod perturb;
pub mod rng;
pub mod srm;

pub use ctdg::{Ctdg, Event, NodeId};
pub use error::{Error, Result};
pub use jl::{jl_distance, GraphDescriptor, JlConfig, JlProjector};
