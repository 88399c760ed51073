//! Deterministic synthetic scenes.
//!
//! Random grids use ChaCha8 seeded from a `u64`, which yields the same
//! stream on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Adjacency, BinaryGrid, Grid, Shape};
use crate::topology::label_components;

/// Label and prediction for a solid bar with missing columns.
///
/// The bar of `thickness` rows and `length` columns is centred in the grid
/// (in the middle slice of a 3D grid). The prediction drops `gap_width`
/// columns starting `gap_at` columns into the bar.
pub fn gen_gap_line(
    length: usize,
    thickness: usize,
    gap_at: usize,
    gap_width: usize,
    shape: Shape,
) -> Result<(BinaryGrid, BinaryGrid)> {
    let [d, h, w] = shape.zyx();
    if length == 0 || thickness == 0 || length > w || thickness > h {
        return Err(Error::InvalidFixture(format!(
            "a {thickness}x{length} bar does not fit a {h}x{w} plane"
        )));
    }
    if gap_width > 0 && gap_at + gap_width > length {
        return Err(Error::InvalidFixture(format!(
            "gap at {gap_at} of width {gap_width} leaves a bar of length {length}"
        )));
    }
    let (top, left, mid) = ((h - thickness) / 2, (w - length) / 2, d / 2);
    let y = Grid::from_fn(shape, |z, r, c| {
        u8::from(z == mid && (top..top + thickness).contains(&r) && (left..left + length).contains(&c))
    });
    let gap = left + gap_at..left + gap_at + gap_width;
    let x = Grid::from_fn(shape, |z, r, c| y.at(z, r, c) & u8::from(!gap.contains(&c)));
    Ok((y, x))
}

/// Thin and thick renderings of one centreline.
#[derive(Clone, Debug, PartialEq)]
pub struct Fig4Scenario {
    pub y: BinaryGrid,
    pub x_thin: BinaryGrid,
    pub x_thick: BinaryGrid,
    pub tile: Vec<usize>,
}

/// Pixels whose centre lies within `width / 2` of the polyline `curve`
/// (points are `(row, col)`).
pub fn rasterize_polyline(curve: &[(f64, f64)], width: f64, shape: Shape) -> Result<BinaryGrid> {
    if shape.ndim() != 2 {
        return Err(Error::InvalidFixture("polylines are rasterized in 2D".into()));
    }
    if curve.len() < 2 || curve.windows(2).all(|s| s[0] == s[1]) {
        return Err(Error::InvalidFixture("curve needs two distinct points".into()));
    }
    let [_, h, w] = shape.zyx();
    if curve
        .iter()
        .any(|&(r, c)| !(0.0..=(h - 1) as f64).contains(&r) || !(0.0..=(w - 1) as f64).contains(&c))
    {
        return Err(Error::InvalidFixture("curve leaves the grid".into()));
    }
    let radius_sq = (width / 2.0).powi(2);
    Ok(Grid::from_fn(shape, |_, r, c| {
        let p = (r as f64, c as f64);
        let near = curve.windows(2).any(|s| segment_dist_sq(p, s[0], s[1]) <= radius_sq);
        u8::from(near)
    }))
}

fn segment_dist_sq(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dr, dc) = (b.0 - a.0, b.1 - a.1);
    let len_sq = dr * dr + dc * dc;
    let t = if len_sq == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dr + (p.1 - a.1) * dc) / len_sq).clamp(0.0, 1.0)
    };
    let (qr, qc) = (a.0 + t * dr - p.0, a.1 + t * dc - p.1);
    qr * qr + qc * qc
}

/// Label and prediction rendered at `thin` width, second prediction at
/// `thick` width. Both predictions have the label's component count.
pub fn gen_fig4_scenario(
    curve: &[(f64, f64)],
    thin: f64,
    thick: f64,
    shape: Shape,
    tile: Vec<usize>,
) -> Result<Fig4Scenario> {
    if !(thin > 0.0 && thin < thick) {
        return Err(Error::InvalidFixture(format!(
            "need 0 < thin < thick, got {thin} and {thick}"
        )));
    }
    if tile.len() != shape.ndim() || tile.contains(&0) {
        return Err(Error::TileRank {
            tile,
            ndim: shape.ndim(),
        });
    }
    let y = rasterize_polyline(curve, thin, shape)?;
    let x_thick = rasterize_polyline(curve, thick, shape)?;
    let conn = Adjacency::for_shape(shape).foreground();
    let (by, bt) = (
        label_components(&y, conn)?.count,
        label_components(&x_thick, conn)?.count,
    );
    if by != bt {
        return Err(Error::InvalidFixture(format!(
            "thin rendering has {by} components but thick has {bt}"
        )));
    }
    Ok(Fig4Scenario {
        x_thin: y.clone(),
        y,
        x_thick,
        tile,
    })
}

/// A V-shaped curve whose tip stops four pixels short of the tile border at
/// column 32; the thick rendering crosses that border, the thin one does not.
pub fn fig4_default() -> Fig4Scenario {
    gen_fig4_scenario(
        &[(4.0, 4.0), (16.0, 28.0), (28.0, 4.0)],
        1.0,
        9.0,
        Shape::d2(32, 64).expect("static shape"),
        vec![32, 32],
    )
    .expect("static scenario is valid")
}

/// Bernoulli(`density`) pixels from ChaCha8 seeded with `seed`.
pub fn gen_random(seed: u64, shape: Shape, density: f64) -> Result<BinaryGrid> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidFixture(format!("density {density} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Grid::from_fn(shape, |_, _, _| u8::from(rng.gen::<f64>() < density)))
}
