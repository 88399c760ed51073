use std::collections::BTreeMap;

use serde::Serialize;

use super::tiling::{Metric, Protocol, Tiling};
use crate::grid::Shape;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TileValue {
    pub image_id: String,
    pub metric: Metric,
    pub tile_origin: Vec<usize>,
    pub tile_shape: Vec<usize>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolEcho {
    /// Tiling per metric, e.g. `whole`, `slices`, `375x375`.
    pub patches: BTreeMap<String, String>,
    /// Foreground adjacency per metric (8 or 26).
    pub adjacency: BTreeMap<String, usize>,
    pub skeleton_iters: usize,
}

impl ProtocolEcho {
    pub fn new(protocol: &Protocol, shape: Shape) -> Self {
        let mut patches = BTreeMap::new();
        let mut adjacency = BTreeMap::new();
        for (metric, tiling) in &protocol.tilings {
            patches.insert(metric.name().to_string(), tiling.to_string());
            let ndim = if matches!(tiling, Tiling::Slices) {
                2
            } else {
                shape.ndim()
            };
            adjacency.insert(metric.name().to_string(), if ndim == 2 { 8 } else { 26 });
        }
        ProtocolEcho {
            patches,
            adjacency,
            skeleton_iters: protocol.skeleton_iters,
        }
    }
}

/// Per-tile values and their means for one prediction/label pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricReport {
    pub image_id: String,
    pub config: ProtocolEcho,
    pub per_tile: Vec<TileValue>,
    /// Mean over this image's tiles, per metric.
    pub aggregates: BTreeMap<String, f64>,
}

fn means<'a>(values: impl Iterator<Item = &'a TileValue>) -> BTreeMap<String, f64> {
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for tv in values {
        let slot = sums.entry(tv.metric.name().to_string()).or_default();
        slot.0 += tv.value;
        slot.1 += 1;
    }
    sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

impl MetricReport {
    pub fn new(image_id: String, config: ProtocolEcho, per_tile: Vec<TileValue>) -> Self {
        let aggregates = means(per_tile.iter());
        MetricReport {
            image_id,
            config,
            per_tile,
            aggregates,
        }
    }

    /// Tile values of one metric in report order.
    pub fn values(&self, metric: Metric) -> impl Iterator<Item = f64> + '_ {
        self.per_tile
            .iter()
            .filter(move |t| t.metric == metric)
            .map(|t| t.value)
    }

    pub fn aggregate(&self, metric: Metric) -> Option<f64> {
        self.aggregates.get(metric.name()).copied()
    }
}

/// Reports for several images with two dataset-level aggregations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationSummary {
    pub images: Vec<MetricReport>,
    /// Mean over images of each image's tile mean.
    pub per_image_mean: BTreeMap<String, f64>,
    /// Mean over all tiles of all images.
    pub pooled_tile_mean: BTreeMap<String, f64>,
}

pub fn summarize(images: Vec<MetricReport>) -> EvaluationSummary {
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for report in &images {
        for (k, v) in &report.aggregates {
            let slot = sums.entry(k.clone()).or_default();
            slot.0 += v;
            slot.1 += 1;
        }
    }
    let per_image_mean = sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect();
    let pooled_tile_mean = means(images.iter().flat_map(|r| r.per_tile.iter()));
    EvaluationSummary {
        images,
        per_image_mean,
        pooled_tile_mean,
    }
}
