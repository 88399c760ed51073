//! Min/max pooling morphology, the iterative soft skeleton built on it, and
//! the exact squared Euclidean distance transform.

mod edt;
mod pooling;
mod skeleton;

pub use edt::{distance_transform_sq, DistanceField};
pub use pooling::{soft_dilate, soft_erode, PoolValue};
pub use skeleton::{hard_skeleton, soft_skeleton};
