use super::pooling::{soft_dilate, soft_erode};
use crate::grid::{BinaryGrid, Grid, RealGrid};

/// Iterative min/max-pooling skeleton.
///
/// ```text
/// skel <- relu(g - open(g))
/// repeat iters: g <- erode(g); delta <- relu(g - open(g)); skel <- skel + relu(delta - skel * delta)
/// ```
/// with `open = dilate . erode`. The erosion inside `open(g)` is the next
/// iterate of `g`, so each round costs one erosion and one dilation.
pub fn soft_skeleton(grid: &RealGrid, iters: usize) -> RealGrid {
    let mut current = grid.clone();
    let mut eroded = soft_erode(&current);
    let opened = soft_dilate(&eroded);
    let mut skel: Vec<f32> = current
        .data()
        .iter()
        .zip(opened.data())
        .map(|(&g, &o)| (g - o).max(0.0))
        .collect();

    for _ in 0..iters {
        if eroded.data().iter().all(|&v| v == 0.0) {
            // every later iterate is zero, so every later delta is zero
            break;
        }
        current = eroded;
        eroded = soft_erode(&current);
        let opened = soft_dilate(&eroded);
        for ((s, &g), &o) in skel.iter_mut().zip(current.data()).zip(opened.data()) {
            let delta = (g - o).max(0.0);
            *s += (delta - *s * delta).max(0.0);
        }
    }
    Grid::<f32>::with_data(grid.shape(), skel)
}

/// Binary skeleton: the same recurrence evaluated on `{0, 1}` values, where
/// `relu(a - b)` reduces to `a & !b` and the accumulation to `skel | delta`.
/// Equal to `soft_skeleton(mask) > 0` and always a subset of `mask`.
pub fn hard_skeleton(mask: &BinaryGrid, iters: usize) -> BinaryGrid {
    let mut current = mask.clone();
    let mut eroded = soft_erode(&current);
    let opened = soft_dilate(&eroded);
    let mut skel: Vec<u8> = current
        .data()
        .iter()
        .zip(opened.data())
        .map(|(&g, &o)| g & !o & 1)
        .collect();

    for _ in 0..iters {
        if !eroded.any() {
            break;
        }
        current = eroded;
        eroded = soft_erode(&current);
        let opened = soft_dilate(&eroded);
        for ((s, &g), &o) in skel.iter_mut().zip(current.data()).zip(opened.data()) {
            *s |= g & !o & 1;
        }
    }
    Grid::<u8>::with_data(mask.shape(), skel)
}
