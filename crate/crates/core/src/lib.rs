//! Topology-aware segmentation tooling for 2D images and 3D volumes.
//!
//! The centre of the crate is [`critical_mask`], which finds the context
//! pixels around missed and false-positive connections by splitting a
//! skeleton with the opposite mask and comparing exact distance transforms.
//! Around it sit the pixel and context losses ([`losses`]), Betti-number
//! and skeleton-based evaluation metrics with tiled evaluation
//! ([`metrics`]), component-overlap post-processing ([`postproc`]) and
//! deterministic test scenes ([`fixtures`]).

pub mod config;
pub mod critical_mask;
pub mod error;
pub mod fixtures;
pub mod grid;
pub mod io;
pub mod losses;
pub mod metrics;
pub mod morphology;
pub mod postproc;
pub mod topology;

pub use config::{LossConfig, DEFAULT_SKELETON_ITERS};
pub use critical_mask::{critical_mask, CriticalMask, SkeletonMode};
pub use error::{Error, Result};
pub use grid::{Adjacency, AnyGrid, BinaryGrid, Connectivity, Grid, RealGrid, Shape};
pub use morphology::{distance_transform_sq, hard_skeleton, soft_skeleton, DistanceField};
pub use topology::{betti, euler_characteristic, label_components, BettiProfile, LabeledComponents};
