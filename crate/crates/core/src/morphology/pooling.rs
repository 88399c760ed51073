use crate::grid::Grid;

/// Scalar types the pooling kernels operate on.
pub trait PoolValue: Copy + PartialOrd + Send + Sync + 'static {
    const ZERO: Self;

    #[inline]
    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    #[inline]
    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl PoolValue for u8 {
    const ZERO: Self = 0;
}

impl PoolValue for f32 {
    const ZERO: Self = 0.0;
}

/// Minimum over the centre and its `2 * ndim` axis neighbours. Neighbours
/// outside the grid count as zero.
pub fn soft_erode<T: PoolValue>(grid: &Grid<T>) -> Grid<T> {
    let shape = grid.shape();
    let [d, h, w] = shape.zyx();
    let volumetric = shape.ndim() == 3;
    let src = grid.data();
    let mut out = vec![T::ZERO; src.len()];

    for z in 0..d {
        for y in 0..h {
            let row = shape.index(z, y, 0);
            let dst = &mut out[row..row + w];
            let cur = &src[row..row + w];
            for x in 0..w {
                let left = if x > 0 { cur[x - 1] } else { T::ZERO };
                let right = if x + 1 < w { cur[x + 1] } else { T::ZERO };
                dst[x] = cur[x].min_of(left).min_of(right);
            }

            let mut fold = |neighbour: Option<usize>| match neighbour {
                Some(start) => {
                    for (v, &n) in dst.iter_mut().zip(&src[start..start + w]) {
                        *v = v.min_of(n);
                    }
                }
                None => {
                    for v in dst.iter_mut() {
                        *v = v.min_of(T::ZERO);
                    }
                }
            };
            fold((y > 0).then(|| shape.index(z, y - 1, 0)));
            fold((y + 1 < h).then(|| shape.index(z, y + 1, 0)));
            if volumetric {
                fold((z > 0).then(|| shape.index(z - 1, y, 0)));
                fold((z + 1 < d).then(|| shape.index(z + 1, y, 0)));
            }
        }
    }
    Grid::<T>::with_data(shape, out)
}

/// Maximum over the full `3^ndim` box. Neighbours outside the grid count as
/// zero. Computed as one 3-tap pass per axis.
pub fn soft_dilate<T: PoolValue>(grid: &Grid<T>) -> Grid<T> {
    let shape = grid.shape();
    let [d, h, w] = shape.zyx();
    let src = grid.data();

    let mut along_x = vec![T::ZERO; src.len()];
    for (dst, cur) in along_x.chunks_exact_mut(w).zip(src.chunks_exact(w)) {
        for x in 0..w {
            let left = if x > 0 { cur[x - 1] } else { T::ZERO };
            let right = if x + 1 < w { cur[x + 1] } else { T::ZERO };
            dst[x] = cur[x].max_of(left).max_of(right);
        }
    }

    // rows of `w` values at stride `step` along y (step = w) or z (step = h * w)
    let pass = |input: &[T], extent: usize, step: usize| -> Vec<T> {
        let mut out = input.to_vec();
        for (i, chunk) in out.chunks_exact_mut(w).enumerate() {
            let start = i * w;
            let pos = (start / step) % extent;
            let mut fold = |neighbour: Option<usize>| match neighbour {
                Some(s) => {
                    for (v, &n) in chunk.iter_mut().zip(&input[s..s + w]) {
                        *v = v.max_of(n);
                    }
                }
                None => {
                    for v in chunk.iter_mut() {
                        *v = v.max_of(T::ZERO);
                    }
                }
            };
            fold((pos > 0).then(|| start - step));
            fold((pos + 1 < extent).then(|| start + step));
        }
        out
    };

    let mut out = pass(&along_x, h, w);
    if shape.ndim() == 3 {
        out = pass(&out, d, h * w);
    }
    Grid::<T>::with_data(shape, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BinaryGrid, RealGrid, Shape};

    /// Direct neighbourhood scan used as the reference.
    fn reference(grid: &RealGrid, cross: bool) -> RealGrid {
        let shape = grid.shape();
        let [d, h, w] = shape.zyx();
        let dz: &[isize] = if shape.ndim() == 3 { &[-1, 0, 1] } else { &[0] };
        Grid::from_fn(shape, |z, y, x| {
            let mut acc = grid.at(z, y, x);
            for &oz in dz {
                for oy in -1..=1isize {
                    for ox in -1..=1isize {
                        let nonzero = (oz != 0) as u8 + (oy != 0) as u8 + (ox != 0) as u8;
                        if nonzero == 0 || (cross && nonzero != 1) {
                            continue;
                        }
                        let (nz, ny, nx) = (z as isize + oz, y as isize + oy, x as isize + ox);
                        let inside = (0..d as isize).contains(&nz)
                            && (0..h as isize).contains(&ny)
                            && (0..w as isize).contains(&nx);
                        let v = if inside {
                            grid.at(nz as usize, ny as usize, nx as usize)
                        } else {
                            0.0
                        };
                        acc = if cross { acc.min(v) } else { acc.max(v) };
                    }
                }
            }
            acc
        })
    }

    fn lcg_grid(shape: Shape, seed: u64) -> RealGrid {
        let mut state = seed;
        Grid::from_fn(shape, |_, _, _| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 40) as f32) / (1u64 << 24) as f32
        })
    }

    #[test]
    fn thin_row_erodes_to_zero() {
        let g = BinaryGrid::filled(Shape::d2(1, 7).unwrap(), 1);
        assert!(!soft_erode(&g).any());
    }

    #[test]
    fn square_keeps_interior() {
        let g = BinaryGrid::filled(Shape::d2(5, 5).unwrap(), 1);
        let e = soft_erode(&g);
        let expected = Grid::from_fn(g.shape(), |_, y, x| {
            u8::from((1..4).contains(&y) && (1..4).contains(&x))
        });
        assert_eq!(e, expected);
    }

    #[test]
    fn point_dilates_to_block() {
        let s = Shape::d2(5, 5).unwrap();
        let g = Grid::from_fn(s, |_, y, x| u8::from(y == 2 && x == 2));
        let expected = Grid::from_fn(s, |_, y, x| u8::from((1..4).contains(&y) && (1..4).contains(&x)));
        assert_eq!(soft_dilate(&g), expected);
        assert!(!soft_dilate(&BinaryGrid::zeros(s)).any());
    }

    #[test]
    fn matches_direct_scan_2d_and_3d() {
        for (i, extents) in [[6usize, 9].as_slice(), &[4, 5, 7], &[1, 3, 3], &[3, 1]]
            .iter()
            .enumerate()
        {
            let g = lcg_grid(Shape::new(extents).unwrap(), i as u64 + 11);
            let e = soft_erode(&g);
            let dl = soft_dilate(&g);
            assert_eq!(e, reference(&g, true));
            assert_eq!(dl, reference(&g, false));
            assert!(e.data().iter().zip(g.data()).all(|(a, b)| a <= b));
            assert!(dl.data().iter().zip(g.data()).all(|(a, b)| a >= b));
        }
    }

    #[test]
    fn negative_values_keep_their_minimum() {
        let g = RealGrid::from_vec(Shape::d2(1, 3).unwrap(), vec![-1.0, -2.0, -0.5]).unwrap();
        assert_eq!(soft_erode(&g).data(), &[-2.0, -2.0, -2.0]);
    }
}
