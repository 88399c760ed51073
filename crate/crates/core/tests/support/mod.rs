//! Reference implementations used as test oracles. Everything here is
//! written directly from the definitions, without sharing code paths with
//! the library beyond the `Grid` container.
#![allow(dead_code)]

use std::collections::HashSet;

use ctxmask::{BinaryGrid, Connectivity, Grid, Shape};

/// splitmix64; independent of the library's fixture generator.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        lo + (self.next_u64() % (hi_inclusive - lo + 1) as u64) as usize
    }

    pub fn binary(&mut self, shape: Shape, density: f64) -> BinaryGrid {
        Grid::from_fn(shape, |_, _, _| u8::from(self.unit() < density))
    }

    /// Random 2D shape with extents in `lo..=hi`.
    pub fn shape2(&mut self, lo: usize, hi: usize) -> Shape {
        Shape::d2(self.range(lo, hi), self.range(lo, hi)).unwrap()
    }

    pub fn shape3(&mut self, lo: usize, hi: usize) -> Shape {
        Shape::d3(self.range(lo, hi), self.range(lo, hi), self.range(lo, hi)).unwrap()
    }

    /// Blobby grid: random grid smoothed by a 3x3 majority, giving larger
    /// structures with holes and gaps rather than salt noise.
    pub fn blobs(&mut self, shape: Shape, density: f64) -> BinaryGrid {
        let noise = self.binary(shape, density);
        let [d, h, w] = shape.zyx();
        Grid::from_fn(shape, |z, y, x| {
            let mut n = 0;
            let mut total = 0;
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let (yy, xx) = (y as isize + dy, x as isize + dx);
                    if (0..h as isize).contains(&yy) && (0..w as isize).contains(&xx) {
                        total += 1;
                        n += noise.at(z.min(d - 1), yy as usize, xx as usize) as usize;
                    }
                }
            }
            u8::from(2 * n > total)
        })
    }
}

fn neighbours(shape: Shape, i: usize, conn: Connectivity) -> Vec<usize> {
    let [d, h, w] = shape.zyx();
    let [z, y, x] = shape.coords(i);
    let full = matches!(conn, Connectivity::Eight | Connectivity::TwentySix);
    let dzs: &[isize] = if conn.ndim() == 3 { &[-1, 0, 1] } else { &[0] };
    let mut out = Vec::new();
    for &dz in dzs {
        for dy in -1..=1isize {
            for dx in -1..=1isize {
                let nz = (dz != 0) as u8 + (dy != 0) as u8 + (dx != 0) as u8;
                if nz == 0 || (!full && nz != 1) {
                    continue;
                }
                let (zz, yy, xx) = (z as isize + dz, y as isize + dy, x as isize + dx);
                if (0..d as isize).contains(&zz) && (0..h as isize).contains(&yy) && (0..w as isize).contains(&xx) {
                    out.push(shape.index(zz as usize, yy as usize, xx as usize));
                }
            }
        }
    }
    out
}

/// Flood-fill labelling; returns per-pixel component ids (0 = background)
/// in first-encounter raster order, and the count.
pub fn flood_labels(mask: &BinaryGrid, conn: Connectivity) -> (Vec<u32>, usize) {
    let shape = mask.shape();
    let mut labels = vec![0u32; shape.len()];
    let mut count = 0;
    for start in 0..shape.len() {
        if mask.data()[start] == 0 || labels[start] != 0 {
            continue;
        }
        count += 1;
        let mut stack = vec![start];
        labels[start] = count as u32;
        while let Some(i) = stack.pop() {
            for n in neighbours(shape, i, conn) {
                if mask.data()[n] != 0 && labels[n] == 0 {
                    labels[n] = count as u32;
                    stack.push(n);
                }
            }
        }
    }
    (labels, count)
}

/// Euler characteristic from the explicit set of cells of every closed unit
/// square (cube). Cells are keyed by doubled coordinates.
pub fn cell_euler(mask: &BinaryGrid) -> i64 {
    let shape = mask.shape();
    let ndim = shape.ndim();
    let mut cells: HashSet<[usize; 3]> = HashSet::new();
    for i in 0..shape.len() {
        if mask.data()[i] == 0 {
            continue;
        }
        let c = shape.coords(i);
        let zr: &[usize] = if ndim == 3 { &[0, 1, 2] } else { &[1] };
        for &oz in zr {
            for oy in 0..3 {
                for ox in 0..3 {
                    cells.insert([2 * c[0] + oz, 2 * c[1] + oy, 2 * c[2] + ox]);
                }
            }
        }
    }
    cells
        .iter()
        .map(|cell| {
            let dim = cell
                .iter()
                .enumerate()
                .filter(|&(a, &v)| (ndim == 3 || a > 0) && v % 2 == 1)
                .count();
            if dim % 2 == 0 {
                1
            } else {
                -1
            }
        })
        .sum()
}

/// Exhaustive squared distance to the nearest set pixel (`u64::MAX` if none).
pub fn brute_dist_sq(seeds: &BinaryGrid) -> Vec<u64> {
    let shape = seeds.shape();
    let pts: Vec<[usize; 3]> = (0..shape.len())
        .filter(|&i| seeds.data()[i] != 0)
        .map(|i| shape.coords(i))
        .collect();
    (0..shape.len())
        .map(|i| {
            let c = shape.coords(i);
            pts.iter()
                .map(|p| (0..3).map(|a| (c[a].abs_diff(p[a]) as u64).pow(2)).sum::<u64>())
                .min()
                .unwrap_or(u64::MAX)
        })
        .collect()
}

fn pool(g: &[f64], shape: Shape, cross: bool) -> Vec<f64> {
    let [d, h, w] = shape.zyx();
    let dzs: &[isize] = if shape.ndim() == 3 { &[-1, 0, 1] } else { &[0] };
    (0..shape.len())
        .map(|i| {
            let [z, y, x] = shape.coords(i);
            let mut acc = g[i];
            for &dz in dzs {
                for dy in -1..=1isize {
                    for dx in -1..=1isize {
                        let nz = (dz != 0) as u8 + (dy != 0) as u8 + (dx != 0) as u8;
                        if nz == 0 || (cross && nz != 1) {
                            continue;
                        }
                        let (zz, yy, xx) = (z as isize + dz, y as isize + dy, x as isize + dx);
                        let v = if (0..d as isize).contains(&zz)
                            && (0..h as isize).contains(&yy)
                            && (0..w as isize).contains(&xx)
                        {
                            g[shape.index(zz as usize, yy as usize, xx as usize)]
                        } else {
                            0.0
                        };
                        acc = if cross { acc.min(v) } else { acc.max(v) };
                    }
                }
            }
            acc
        })
        .collect()
}

/// The skeleton recurrence run literally for all `iters` rounds in f64.
pub fn reference_skeleton(g: &[f64], shape: Shape, iters: usize) -> Vec<f64> {
    let open = |v: &[f64]| pool(&pool(v, shape, true), shape, false);
    let relu = |a: f64| a.max(0.0);
    let mut img = g.to_vec();
    let o = open(&img);
    let mut skel: Vec<f64> = img.iter().zip(&o).map(|(a, b)| relu(a - b)).collect();
    for _ in 0..iters {
        img = pool(&img, shape, true);
        let o = open(&img);
        for i in 0..img.len() {
            let delta = relu(img[i] - o[i]);
            skel[i] += relu(delta - skel[i] * delta);
        }
    }
    skel
}

pub fn reference_hard_skeleton(mask: &BinaryGrid, iters: usize) -> BinaryGrid {
    let g: Vec<f64> = mask.data().iter().map(|&v| f64::from(v)).collect();
    let sk = reference_skeleton(&g, mask.shape(), iters);
    Grid::from_vec(mask.shape(), sk.iter().map(|&v| u8::from(v > 0.0)).collect()).unwrap()
}

/// Binary-mode critical mask rebuilt from the definitions with exhaustive
/// distances: returns `(v_gap, v_fp)`.
pub fn brute_critical_mask(x: &BinaryGrid, y: &BinaryGrid, iters: usize) -> (BinaryGrid, BinaryGrid) {
    let shape = y.shape();
    let context = |skel: &BinaryGrid, other: &BinaryGrid, crop: &BinaryGrid| {
        let err: BinaryGrid = Grid::from_fn(shape, |z, r, c| skel.at(z, r, c) & (1 - other.at(z, r, c)));
        let keep: BinaryGrid = Grid::from_fn(shape, |z, r, c| skel.at(z, r, c) & other.at(z, r, c));
        let de = brute_dist_sq(&err);
        let dk = brute_dist_sq(&keep);
        Grid::from_vec(
            shape,
            (0..shape.len())
                .map(|i| u8::from(dk[i] > de[i]) & crop.data()[i])
                .collect(),
        )
        .unwrap()
    };
    let s_y = reference_hard_skeleton(y, iters);
    let s_x = reference_hard_skeleton(x, iters);
    (context(&s_y, x, y), context(&s_x, y, x))
}
