use crate::grid::{BinaryGrid, Grid, RealGrid, Shape};

/// Squared Euclidean distances (pixel units) to the nearest seed.
///
/// Pixels with no seed anywhere in the grid hold [`DistanceField::INF`].
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField(Grid<u64>);

impl DistanceField {
    pub const INF: u64 = u64::MAX;

    pub fn grid(&self) -> &Grid<u64> {
        &self.0
    }

    pub fn shape(&self) -> Shape {
        self.0.shape()
    }

    pub fn data(&self) -> &[u64] {
        self.0.data()
    }

    /// `f32` copy for file output; [`Self::INF`] maps to `f32::MAX`.
    pub fn to_real(&self) -> RealGrid {
        self.0.map(|d| if d == Self::INF { f32::MAX } else { d as f32 })
    }
}

/// Exact squared Euclidean distance transform to the set pixels of `seeds`.
///
/// Runs a 1D lower envelope of parabolas along each axis in turn. All
/// arithmetic is integer, so the result equals exhaustive minimisation.
pub fn distance_transform_sq(seeds: &BinaryGrid) -> DistanceField {
    let shape = seeds.shape();
    let [d, h, w] = shape.zyx();
    let mut field: Vec<u64> = seeds
        .data()
        .iter()
        .map(|&s| if s != 0 { 0 } else { DistanceField::INF })
        .collect();

    let mut env = Envelope::with_capacity(w.max(h).max(d));
    let mut line = Vec::new();
    let mut out = Vec::new();

    // x: contiguous rows
    for row in field.chunks_exact_mut(w) {
        line.clear();
        line.extend_from_slice(row);
        env.transform(&line, &mut out);
        row.copy_from_slice(&out);
    }

    let mut strided = |extent: usize, step: usize, starts: &mut dyn Iterator<Item = usize>| {
        if extent == 1 {
            return;
        }
        for start in starts {
            line.clear();
            line.extend((0..extent).map(|i| field[start + i * step]));
            env.transform(&line, &mut out);
            for (i, &v) in out.iter().enumerate() {
                field[start + i * step] = v;
            }
        }
    };
    strided(h, w, &mut (0..d).flat_map(|z| (0..w).map(move |x| z * h * w + x)));
    strided(d, h * w, &mut (0..h * w));

    DistanceField(Grid::<u64>::with_data(shape, field))
}

/// Scratch buffers for the 1D transform.
struct Envelope {
    sites: Vec<usize>,
    /// First integer position at which the matching site is minimal.
    starts: Vec<i64>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Envelope {
            sites: Vec::with_capacity(n),
            starts: Vec::with_capacity(n),
        }
    }

    /// `out[x] = min_i (x - i)^2 + f[i]` over finite `f[i]`.
    fn transform(&mut self, f: &[u64], out: &mut Vec<u64>) {
        let n = f.len();
        self.sites.clear();
        self.starts.clear();

        for (q, &fq) in f.iter().enumerate() {
            if fq == DistanceField::INF {
                continue;
            }
            loop {
                let Some(&p) = self.sites.last() else {
                    self.sites.push(q);
                    self.starts.push(0);
                    break;
                };
                // parabola q is <= parabola p for every x >= s
                let num = (fq as i64 + (q * q) as i64) - (f[p] as i64 + (p * p) as i64);
                let den = 2 * (q - p) as i64;
                let s = ceil_div(num, den);
                if s <= *self.starts.last().expect("paired with sites") {
                    self.sites.pop();
                    self.starts.pop();
                    continue;
                }
                if s < n as i64 {
                    self.sites.push(q);
                    self.starts.push(s);
                }
                break;
            }
        }

        out.clear();
        if self.sites.is_empty() {
            out.resize(n, DistanceField::INF);
            return;
        }
        let mut k = 0;
        for x in 0..n {
            while k + 1 < self.sites.len() && self.starts[k + 1] <= x as i64 {
                k += 1;
            }
            let site = self.sites[k];
            let dx = x.abs_diff(site) as u64;
            out.push(dx * dx + f[site]);
        }
    }
}

#[inline]
fn ceil_div(num: i64, den: i64) -> i64 {
    debug_assert!(den > 0);
    -((-num).div_euclid(den))
}
