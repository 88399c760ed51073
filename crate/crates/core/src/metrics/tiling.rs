use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use super::report::{MetricReport, ProtocolEcho, TileValue};
use super::{ags, betti_errors, cldice_metric, dice_score, e0_gt, BettiErrors};
use crate::config::DEFAULT_SKELETON_ITERS;
use crate::error::{Error, Result};
use crate::grid::{Adjacency, BinaryGrid, Shape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Dice,
    ClDice,
    E,
    E1,
    E0,
    E0Gt,
    Ags,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::Dice,
        Metric::ClDice,
        Metric::E,
        Metric::E1,
        Metric::E0,
        Metric::E0Gt,
        Metric::Ags,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Dice => "dice",
            Metric::ClDice => "cldice",
            Metric::E => "e",
            Metric::E1 => "e1",
            Metric::E0 => "e0",
            Metric::E0Gt => "e0_gt",
            Metric::Ags => "ags",
        }
    }

    fn is_betti(self) -> bool {
        matches!(self, Metric::E | Metric::E1 | Metric::E0)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

/// How a metric partitions the image.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Tiling {
    Whole,
    /// Windows of `shape` placed every `stride` pixels from the origin and
    /// clipped at the far border. With `stride == shape` the windows cover
    /// the image exactly once.
    Tiles {
        shape: Vec<usize>,
        stride: Vec<usize>,
    },
    /// Every z-slice of a 3D grid evaluated as a 2D image.
    Slices,
}

impl Tiling {
    pub fn tiles(shape: Vec<usize>) -> Self {
        Tiling::Tiles {
            stride: shape.clone(),
            shape,
        }
    }
}

fn fmt_extents(e: &[usize]) -> String {
    e.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
}

impl fmt::Display for Tiling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tiling::Whole => f.write_str("whole"),
            Tiling::Slices => f.write_str("slices"),
            Tiling::Tiles { shape, stride } if shape == stride => f.write_str(&fmt_extents(shape)),
            Tiling::Tiles { shape, stride } => {
                write!(f, "{}/{}", fmt_extents(shape), fmt_extents(stride))
            }
        }
    }
}

impl FromStr for Tiling {
    type Err = String;

    /// `whole`, `slices`, `RxC[xD]`, or `SHAPE/STRIDE`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| -> Result<Vec<usize>, String> {
            let dims = t
                .split('x')
                .map(|v| v.parse::<usize>().ok().filter(|&n| n > 0))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| format!("bad tile extents `{t}`"))?;
            if !(2..=3).contains(&dims.len()) {
                return Err(format!("tile `{t}` needs 2 or 3 extents"));
            }
            Ok(dims)
        };
        match s {
            "whole" => Ok(Tiling::Whole),
            "slices" => Ok(Tiling::Slices),
            _ => match s.split_once('/') {
                Some((shape, stride)) => {
                    let (shape, stride) = (parse(shape)?, parse(stride)?);
                    if shape.len() != stride.len() {
                        return Err(format!("tile `{s}` mixes ranks"));
                    }
                    Ok(Tiling::Tiles { shape, stride })
                }
                None => Ok(Tiling::tiles(parse(s)?)),
            },
        }
    }
}

/// Assignment of a tiling to every metric.
#[derive(Clone, Debug, PartialEq)]
pub struct Protocol {
    pub tilings: Vec<(Metric, Tiling)>,
    pub skeleton_iters: usize,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            tilings: Metric::ALL.iter().map(|&m| (m, Tiling::Whole)).collect(),
            skeleton_iters: DEFAULT_SKELETON_ITERS,
        }
    }
}

impl Protocol {
    pub fn tiling(&self, metric: Metric) -> Option<&Tiling> {
        self.tilings.iter().find(|(m, _)| *m == metric).map(|(_, t)| t)
    }

    /// Replaces (or adds) the tiling of `metric`.
    pub fn set(&mut self, metric: Metric, tiling: Tiling) {
        match self.tilings.iter_mut().find(|(m, _)| *m == metric) {
            Some(slot) => slot.1 = tiling,
            None => self.tilings.push((metric, tiling)),
        }
    }

    /// Same tiling for `e`, `e1` and `e0`.
    pub fn set_betti(&mut self, tiling: Tiling) {
        for m in [Metric::E, Metric::E1, Metric::E0] {
            self.set(m, tiling.clone());
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tile {
    pub origin: Vec<usize>,
    pub shape: Vec<usize>,
}

/// Tiles of `tiling` over a grid of `shape`, in raster order.
pub fn tiles(shape: Shape, tiling: &Tiling) -> Result<Vec<Tile>> {
    let extents = shape.extents();
    match tiling {
        Tiling::Whole => Ok(vec![Tile {
            origin: vec![0; extents.len()],
            shape: extents.to_vec(),
        }]),
        Tiling::Slices => {
            if shape.ndim() != 3 {
                return Err(Error::SliceNeeds3d);
            }
            Ok((0..extents[0])
                .map(|z| Tile {
                    origin: vec![z, 0, 0],
                    shape: vec![1, extents[1], extents[2]],
                })
                .collect())
        }
        Tiling::Tiles { shape: tile, stride } => {
            if tile.len() != extents.len() || stride.len() != extents.len() {
                return Err(Error::TileRank {
                    tile: tile.clone(),
                    ndim: extents.len(),
                });
            }
            if tile.contains(&0) || stride.contains(&0) {
                return Err(Error::InvalidConfig("tile extents and strides must be positive".into()));
            }
            let axes: Vec<Vec<usize>> = (0..extents.len())
                .map(|a| (0..extents[a]).step_by(stride[a]).collect())
                .collect();
            let mut out = Vec::new();
            let mut idx = vec![0usize; extents.len()];
            loop {
                let origin: Vec<usize> = idx.iter().enumerate().map(|(a, &i)| axes[a][i]).collect();
                let clipped = (0..extents.len())
                    .map(|a| tile[a].min(extents[a] - origin[a]))
                    .collect();
                out.push(Tile { origin, shape: clipped });
                // odometer over axes, last axis fastest
                let mut a = extents.len();
                loop {
                    if a == 0 {
                        return Ok(out);
                    }
                    a -= 1;
                    idx[a] += 1;
                    if idx[a] < axes[a].len() {
                        break;
                    }
                    idx[a] = 0;
                }
            }
        }
    }
}

fn crop_tile(grid: &BinaryGrid, tile: &Tile, sliced: bool) -> Result<BinaryGrid> {
    if sliced {
        grid.slice_z(tile.origin[0])
    } else {
        grid.crop(&tile.origin, &tile.shape)
    }
}

/// Evaluates every metric of `protocol` on `x` (prediction) against `y`
/// (label). Tiles are listed per metric in protocol order, raster order
/// within a metric; aggregates are unweighted tile means.
pub fn evaluate_pair(image_id: &str, x: &BinaryGrid, y: &BinaryGrid, protocol: &Protocol) -> Result<MetricReport> {
    x.ensure_same_shape(y)?;
    x.check_binary()?;
    y.check_binary()?;
    let shape = y.shape();
    let iters = protocol.skeleton_iters;
    if iters == 0 {
        return Err(Error::InvalidConfig("skeleton_iters must be at least 1".into()));
    }

    let mut per_tile = Vec::new();
    // betti errors are shared by e, e1 and e0 on identical tilings
    let mut betti_cache: Vec<(Tiling, Vec<BettiErrors>)> = Vec::new();

    for (metric, tiling) in &protocol.tilings {
        let sliced = matches!(tiling, Tiling::Slices);
        let tile_list = tiles(shape, tiling)?;

        let values: Vec<f64> = if metric.is_betti() {
            let cached = betti_cache.iter().find(|(t, _)| t == tiling);
            let errors = match cached {
                Some((_, e)) => e.clone(),
                None => {
                    let e = tile_list
                        .iter()
                        .map(|tile| {
                            let (tx, ty) = (crop_tile(x, tile, sliced)?, crop_tile(y, tile, sliced)?);
                            betti_errors(&tx, &ty, Adjacency::for_shape(ty.shape()))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    betti_cache.push((tiling.clone(), e.clone()));
                    e
                }
            };
            errors
                .iter()
                .map(|e| match metric {
                    Metric::E => e.e,
                    Metric::E1 => e.e1,
                    _ => e.e0,
                } as f64)
                .collect()
        } else {
            tile_list
                .iter()
                .map(|tile| {
                    let (tx, ty) = (crop_tile(x, tile, sliced)?, crop_tile(y, tile, sliced)?);
                    Ok(match metric {
                        Metric::Dice => dice_score(&tx, &ty)?,
                        Metric::ClDice => cldice_metric(&tx, &ty, iters)?,
                        Metric::E0Gt => e0_gt(&tx, &ty, Adjacency::for_shape(ty.shape()))? as f64,
                        Metric::Ags => ags(&tx, &ty, iters)?.value,
                        _ => unreachable!("betti metrics handled above"),
                    })
                })
                .collect::<Result<Vec<_>>>()?
        };

        per_tile.extend(tile_list.into_iter().zip(values).map(|(tile, value)| TileValue {
            image_id: image_id.to_string(),
            metric: *metric,
            tile_origin: tile.origin,
            tile_shape: tile.shape,
            value,
        }));
    }

    Ok(MetricReport::new(
        image_id.to_string(),
        ProtocolEcho::new(protocol, shape),
        per_tile,
    ))
}
