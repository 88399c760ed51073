//! Keeps only the components of a fine-tuned prediction that overlap the
//! pretraining prediction.

use crate::error::Result;
use crate::grid::{Adjacency, BinaryGrid, Grid};
use crate::topology::label_components;

/// Union of the components of `ft` (under the foreground adjacency) that
/// share at least one pixel with `pre`.
pub fn topological_postprocess(ft: &BinaryGrid, pre: &BinaryGrid, adjacency: Adjacency) -> Result<BinaryGrid> {
    ft.ensure_same_shape(pre)?;
    adjacency.check(ft.shape())?;
    let lc = label_components(ft, adjacency.foreground())?;
    let mut keep = vec![false; lc.count + 1];
    for (&l, &p) in lc.labels.data().iter().zip(pre.data()) {
        if l != 0 && p != 0 {
            keep[l as usize] = true;
        }
    }
    let data = lc
        .labels
        .data()
        .iter()
        .map(|&l| u8::from(keep[l as usize] && l != 0))
        .collect();
    Grid::from_vec(ft.shape(), data)
}
