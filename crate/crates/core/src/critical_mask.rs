//! Context critical-pixel masks around missed and false-positive connections.
//!
//! For missed connections the label skeleton is split by the binarized
//! prediction into a missed part and a kept part. Every label pixel strictly
//! closer to the missed part than to the kept part belongs to the gap
//! context. False positives are the mirror image: the prediction skeleton is
//! split by the label and the context is cropped to the prediction.

use crate::config::LossConfig;
use crate::error::Result;
use crate::grid::{BinaryGrid, RealGrid};
use crate::morphology::{distance_transform_sq, hard_skeleton, soft_skeleton};

/// How the prediction skeleton is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SkeletonMode {
    /// Soft skeleton of the foreground probabilities, thresholded at 0.5.
    #[default]
    Soft,
    /// Binary skeleton of the binarized prediction.
    Binary,
}

impl std::str::FromStr for SkeletonMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "soft" => Ok(SkeletonMode::Soft),
            "binary" => Ok(SkeletonMode::Binary),
            other => Err(format!("unknown skeleton mode `{other}` (expected soft or binary)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalMask {
    /// Context of missed connections, a subset of the label.
    pub v_gap: BinaryGrid,
    /// Context of false-positive connections, a subset of the binarized prediction.
    pub v_fp: BinaryGrid,
    /// `v_gap | v_fp`
    pub m: BinaryGrid,
}

/// Splits `skel` into the part outside `mask` and the part inside it.
pub fn split_skeleton(skel: &BinaryGrid, mask: &BinaryGrid) -> Result<(BinaryGrid, BinaryGrid)> {
    Ok((skel.and_not(mask)?, skel.and(mask)?))
}

/// Pixels of `crop` strictly closer (squared Euclidean) to `err_part` than to
/// `keep_part`. An empty seed set is infinitely far away, so an empty
/// `err_part` yields nothing and an empty `keep_part` yields all of `crop`.
pub fn context_region(err_part: &BinaryGrid, keep_part: &BinaryGrid, crop: &BinaryGrid) -> Result<BinaryGrid> {
    err_part.ensure_same_shape(keep_part)?;
    err_part.ensure_same_shape(crop)?;
    if !err_part.any() {
        return Ok(BinaryGrid::zeros(crop.shape()));
    }
    let to_err = distance_transform_sq(err_part);
    let to_keep = distance_transform_sq(keep_part);
    let data = to_keep
        .data()
        .iter()
        .zip(to_err.data())
        .zip(crop.data())
        .map(|((&k, &e), &c)| u8::from(k > e) & c)
        .collect();
    BinaryGrid::from_vec(crop.shape(), data)
}

/// Critical pixel mask for a foreground probability map `x_fore` and a label `y`.
pub fn critical_mask(x_fore: &RealGrid, y: &BinaryGrid, cfg: &LossConfig, mode: SkeletonMode) -> Result<CriticalMask> {
    x_fore.ensure_same_shape(y)?;
    x_fore.check_probability()?;
    y.check_binary()?;
    cfg.validate()?;

    let x_bin = x_fore.binarize();
    let iters = cfg.skeleton_iters;

    let s_y = hard_skeleton(y, iters);
    let (s_gap, keep_y) = split_skeleton(&s_y, &x_bin)?;
    let v_gap = context_region(&s_gap, &keep_y, y)?;

    let s_x = match mode {
        SkeletonMode::Soft => soft_skeleton(x_fore, iters).threshold(0.5),
        SkeletonMode::Binary => hard_skeleton(&x_bin, iters),
    };
    let (s_fp, keep_x) = split_skeleton(&s_x, y)?;
    let v_fp = context_region(&s_fp, &keep_x, &x_bin)?;

    let m = v_gap.or(&v_fp)?;
    Ok(CriticalMask { v_gap, v_fp, m })
}

/// [`critical_mask`] on an already binary prediction.
pub fn critical_mask_binary(x_bin: &BinaryGrid, y: &BinaryGrid, cfg: &LossConfig) -> Result<CriticalMask> {
    critical_mask(&x_bin.to_real(), y, cfg, SkeletonMode::Binary)
}
