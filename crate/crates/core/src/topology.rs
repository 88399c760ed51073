//! Connected components, Euler characteristic and Betti numbers of binary
//! grids, treating each foreground pixel as a closed unit square (cube).
//!
//! With that reading the foreground is connected under 8 (26) adjacency and
//! its complement under 4 (6) adjacency, so holes and cavities are exactly
//! the background components that do not reach the grid border.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Adjacency, BinaryGrid, Connectivity, Grid, Shape};

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledComponents {
    /// 0 for background, `1..=count` for components in raster order of
    /// their first pixel.
    pub labels: Grid<u32>,
    pub count: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BettiProfile {
    pub b0: usize,
    pub b1: usize,
    pub b2: usize,
}

/// Labels the foreground of `mask` under `connectivity`.
///
/// Two raster passes with union-find over the already visited half of the
/// neighbourhood. Final ids follow the raster position of each component's
/// first pixel, so the result depends only on the grid contents.
pub fn label_components(mask: &BinaryGrid, connectivity: Connectivity) -> Result<LabeledComponents> {
    let shape = mask.shape();
    if connectivity.ndim() != shape.ndim() {
        return Err(Error::DimensionMismatch {
            adjacency: connectivity.ndim(),
            grid: shape.ndim(),
        });
    }
    Ok(label_unchecked(mask.data(), shape, connectivity))
}

pub(crate) fn label_unchecked(data: &[u8], shape: Shape, connectivity: Connectivity) -> LabeledComponents {
    let [d, h, w] = shape.zyx();
    let offsets: Vec<([isize; 3], isize)> = connectivity
        .backward_offsets()
        .into_iter()
        .map(|o| (o, (o[0] * h as isize + o[1]) * w as isize + o[2]))
        .collect();

    let mut provisional = vec![0u32; data.len()];
    let mut forest = UnionFind::default();

    let mut i = 0;
    for z in 0..d {
        for y in 0..h {
            for x in 0..w {
                if data[i] != 0 {
                    let mut label = 0u32;
                    for &([dz, dy, dx], delta) in &offsets {
                        // backward offsets never have positive dz, and dy > 0 only with dz < 0
                        if (dz < 0 && z == 0)
                            || (dy < 0 && y == 0)
                            || (dy > 0 && y + 1 == h)
                            || (dx < 0 && x == 0)
                            || (dx > 0 && x + 1 == w)
                        {
                            continue;
                        }
                        let n = provisional[(i as isize + delta) as usize];
                        if n == 0 || n == label {
                            continue;
                        }
                        // `label` is always a root, so one find per neighbour suffices
                        let root = forest.find(n);
                        label = if label == 0 { root } else { forest.link(label, root) };
                    }
                    if label == 0 {
                        label = forest.make();
                    }
                    provisional[i] = label;
                }
                i += 1;
            }
        }
    }

    forest.flatten();
    let mut dense = vec![0u32; forest.parent.len()];
    let mut count = 0u32;
    for l in provisional.iter_mut() {
        if *l == 0 {
            continue;
        }
        let root = forest.parent[*l as usize] as usize;
        if dense[root] == 0 {
            count += 1;
            dense[root] = count;
        }
        *l = dense[root];
    }
    LabeledComponents {
        labels: Grid::<u32>::with_data(shape, provisional),
        count: count as usize,
    }
}

#[derive(Default)]
struct UnionFind {
    /// `parent[0]` is unused so labels start at 1.
    parent: Vec<u32>,
}

impl UnionFind {
    fn make(&mut self) -> u32 {
        if self.parent.is_empty() {
            self.parent.push(0);
        }
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut a: u32) -> u32 {
        while self.parent[a as usize] != a {
            let grand = self.parent[self.parent[a as usize] as usize];
            self.parent[a as usize] = grand;
            a = grand;
        }
        a
    }

    /// Points every label straight at its root. Links always go under the
    /// smaller root, so parents precede children and one forward sweep
    /// suffices.
    fn flatten(&mut self) {
        for l in 1..self.parent.len() {
            self.parent[l] = self.parent[self.parent[l] as usize];
        }
    }

    /// Links two roots under the smaller one and returns it.
    fn link(&mut self, ra: u32, rb: u32) -> u32 {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        lo
    }
}

/// Ids of components with at least one pixel on a grid face.
pub fn border_touching(components: &LabeledComponents) -> BTreeSet<u32> {
    let labels = &components.labels;
    let shape = labels.shape();
    let [d, h, w] = shape.zyx();
    let mut touching = BTreeSet::new();
    for z in 0..d {
        for y in 0..h {
            let row = shape.index(z, y, 0);
            let cells = &labels.data()[row..row + w];
            let face_row = (shape.ndim() == 3 && (z == 0 || z + 1 == d)) || y == 0 || y + 1 == h;
            if face_row {
                touching.extend(cells.iter().copied().filter(|&l| l != 0));
            } else {
                touching.extend([cells[0], cells[w - 1]].into_iter().filter(|&l| l != 0));
            }
        }
    }
    touching
}

/// Euler characteristic of the union of closed unit squares (cubes), one per
/// foreground pixel: vertices - edges + faces (- cubes).
///
/// Cells are grouped by which axes they extend along. For a fixed group the
/// presence of every cell is an OR over its incident pixels, computed one
/// axis at a time.
pub fn euler_characteristic(mask: &BinaryGrid) -> i64 {
    let shape = mask.shape();
    let ndim = shape.ndim();
    let axes: Vec<usize> = (3 - ndim..3).collect();
    let mut chi = 0i64;
    for pattern in 0u32..(1 << ndim) {
        let mut data = mask.data().to_vec();
        let mut dims = shape.zyx();
        let mut dimension = 0;
        for (bit, &axis) in axes.iter().enumerate() {
            if pattern & (1 << bit) != 0 {
                // cells spanning this axis: one per pixel
                dimension += 1;
            } else {
                // cells at lattice positions along this axis: OR of both sides
                data = extend_axis(&data, &mut dims, axis);
            }
        }
        let count = data.iter().filter(|&&v| v != 0).count() as i64;
        chi += if dimension % 2 == 0 { count } else { -count };
    }
    chi
}

fn extend_axis(data: &[u8], dims: &mut [usize; 3], axis: usize) -> Vec<u8> {
    let [d, h, w] = *dims;
    let mut next = *dims;
    next[axis] += 1;
    let [nd, nh, nw] = next;
    let mut out = vec![0u8; nd * nh * nw];
    let src = |z: usize, y: usize, x: usize| data[(z * h + y) * w + x];
    for z in 0..nd {
        for y in 0..nh {
            for x in 0..nw {
                let c = [z, y, x];
                let hi = c[axis];
                let mut v = 0;
                if hi < dims[axis] {
                    v |= src(z.min(d - 1), y.min(h - 1), x.min(w - 1));
                }
                if hi > 0 {
                    let mut lo = c;
                    lo[axis] -= 1;
                    v |= src(lo[0], lo[1], lo[2]);
                }
                out[(z * nh + y) * nw + x] = v;
            }
        }
    }
    *dims = next;
    out
}

/// Betti numbers under the given adjacency convention.
///
/// `b0` counts foreground components; enclosed background components give
/// `b1` in 2D and `b2` in 3D. The 2D `b1` is cross-checked against
/// `b0 - chi`; the 3D `b1` is `b0 + b2 - chi`.
pub fn betti(mask: &BinaryGrid, adjacency: Adjacency) -> Result<BettiProfile> {
    let shape = mask.shape();
    adjacency.check(shape)?;
    let b0 = label_unchecked(mask.data(), shape, adjacency.foreground()).count;

    let background: Vec<u8> = mask.data().iter().map(|&v| 1 - v.min(1)).collect();
    let bg = label_unchecked(&background, shape, adjacency.background());
    let enclosed = bg.count - border_touching(&bg).len();

    let chi = euler_characteristic(mask);
    if shape.ndim() == 2 {
        let from_euler = b0 as i64 - chi;
        if from_euler != enclosed as i64 {
            return Err(Error::InconsistentBetti {
                dual: enclosed as i64,
                euler: from_euler,
            });
        }
        Ok(BettiProfile {
            b0,
            b1: enclosed,
            b2: 0,
        })
    } else {
        let b1 = b0 as i64 + enclosed as i64 - chi;
        if b1 < 0 {
            return Err(Error::InconsistentBetti {
                dual: enclosed as i64,
                euler: b1,
            });
        }
        Ok(BettiProfile {
            b0,
            b1: b1 as usize,
            b2: enclosed,
        })
    }
}
