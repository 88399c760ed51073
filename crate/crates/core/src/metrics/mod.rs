//! Overlap, skeleton and Betti-number metrics for binary prediction/label
//! pairs, plus tiled evaluation ([`evaluate_pair`]).

mod report;
mod tiling;

pub use report::{summarize, EvaluationSummary, MetricReport, ProtocolEcho, TileValue};
pub use tiling::{evaluate_pair, tiles, Metric, Protocol, Tile, Tiling};

use serde::Serialize;

use crate::error::Result;
use crate::grid::{Adjacency, BinaryGrid};
use crate::morphology::hard_skeleton;
use crate::topology::{betti, label_components};

fn overlap(a: &BinaryGrid, b: &BinaryGrid) -> usize {
    a.data().iter().zip(b.data()).filter(|(&p, &q)| p & q != 0).count()
}

/// `2|x ∧ y| / (|x| + |y|)`; 1 when both are empty.
pub fn dice_score(x: &BinaryGrid, y: &BinaryGrid) -> Result<f64> {
    x.ensure_same_shape(y)?;
    let denom = x.count() + y.count();
    if denom == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * overlap(x, y) as f64 / denom as f64)
}

/// Harmonic mean of topology precision `|S_x ∧ y| / |S_x|` and topology
/// sensitivity `|S_y ∧ x| / |S_y|`.
///
/// Empty cases: both masks empty, or both skeletons empty, give 1; exactly
/// one skeleton empty gives 0; zero precision and sensitivity give 0.
pub fn cldice_metric(x: &BinaryGrid, y: &BinaryGrid, iters: usize) -> Result<f64> {
    x.ensure_same_shape(y)?;
    if !x.any() && !y.any() {
        return Ok(1.0);
    }
    let s_x = hard_skeleton(x, iters);
    let s_y = hard_skeleton(y, iters);
    let (nx, ny) = (s_x.count(), s_y.count());
    match (nx, ny) {
        (0, 0) => return Ok(1.0),
        (0, _) | (_, 0) => return Ok(0.0),
        _ => {}
    }
    let precision = overlap(&s_x, y) as f64 / nx as f64;
    let sensitivity = overlap(&s_y, x) as f64 / ny as f64;
    if precision + sensitivity == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * sensitivity / (precision + sensitivity))
}

/// `|β0(x ∧ y) - β0(y)|`: the component error of the prediction restricted
/// to the label, which thickened predictions cannot inflate.
pub fn e0_gt(x: &BinaryGrid, y: &BinaryGrid, adjacency: Adjacency) -> Result<usize> {
    x.ensure_same_shape(y)?;
    adjacency.check(y.shape())?;
    let masked = x.and(y)?;
    let conn = adjacency.foreground();
    let b_masked = label_components(&masked, conn)?.count;
    let b_label = label_components(y, conn)?.count;
    Ok(b_masked.abs_diff(b_label))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ags {
    pub value: f64,
    /// The label skeleton was empty and `value` was set to 1.
    pub degenerate: bool,
}

/// Fraction of the label skeleton covered by the prediction.
pub fn ags(x: &BinaryGrid, y: &BinaryGrid, iters: usize) -> Result<Ags> {
    x.ensure_same_shape(y)?;
    let s_y = hard_skeleton(y, iters);
    let n = s_y.count();
    if n == 0 {
        return Ok(Ags {
            value: 1.0,
            degenerate: true,
        });
    }
    Ok(Ags {
        value: overlap(x, &s_y) as f64 / n as f64,
        degenerate: false,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BettiErrors {
    pub e0: usize,
    pub e1: usize,
    /// `e0 + e1`
    pub e: usize,
}

pub fn betti_errors(x: &BinaryGrid, y: &BinaryGrid, adjacency: Adjacency) -> Result<BettiErrors> {
    x.ensure_same_shape(y)?;
    let bx = betti(x, adjacency)?;
    let by = betti(y, adjacency)?;
    let e0 = bx.b0.abs_diff(by.b0);
    let e1 = bx.b1.abs_diff(by.b1);
    Ok(BettiErrors { e0, e1, e: e0 + e1 })
}
