//! Dense row-major 2D/3D grids and the connectivity conventions applied to them.
//!
//! A 2D grid with extents `(rows, cols)` is stored internally as a 3D grid of
//! extents `(1, rows, cols)` so that every algorithm can run one `(z, y, x)`
//! loop nest. The logical dimensionality is kept separately; operations that
//! look at neighbours only step along the z axis for real 3D grids.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    ndim: usize,
    zyx: [usize; 3],
}

impl Shape {
    pub fn new(extents: &[usize]) -> Result<Self> {
        if !(2..=3).contains(&extents.len()) || extents.contains(&0) {
            return Err(Error::InvalidShape(extents.to_vec()));
        }
        let mut zyx = [1; 3];
        zyx[3 - extents.len()..].copy_from_slice(extents);
        if zyx.iter().try_fold(1usize, |acc, &e| acc.checked_mul(e)).is_none() {
            return Err(Error::InvalidShape(extents.to_vec()));
        }
        Ok(Shape {
            ndim: extents.len(),
            zyx,
        })
    }

    pub fn d2(rows: usize, cols: usize) -> Result<Self> {
        Self::new(&[rows, cols])
    }

    pub fn d3(depth: usize, rows: usize, cols: usize) -> Result<Self> {
        Self::new(&[depth, rows, cols])
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    /// Logical extents: `(rows, cols)` in 2D, `(z, y, x)` in 3D.
    pub fn extents(&self) -> &[usize] {
        &self.zyx[3 - self.ndim..]
    }

    /// Extents padded to 3D; `depth == 1` for 2D grids.
    pub fn zyx(&self) -> [usize; 3] {
        self.zyx
    }

    pub fn len(&self) -> usize {
        self.zyx.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, z: usize, y: usize, x: usize) -> usize {
        (z * self.zyx[1] + y) * self.zyx[2] + x
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let x = index % self.zyx[2];
        let rest = index / self.zyx[2];
        [rest / self.zyx[1], rest % self.zyx[1], x]
    }

    /// Flat index from logical coordinates (length must equal `ndim`).
    pub fn flat(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.ndim);
        let mut zyx = [0; 3];
        zyx[3 - self.ndim..].copy_from_slice(coords);
        self.index(zyx[0], zyx[1], zyx[2])
    }

    /// True if the voxel lies on any face of the grid.
    #[inline]
    pub fn on_border(&self, z: usize, y: usize, x: usize) -> bool {
        let [d, h, w] = self.zyx;
        (self.ndim == 3 && (z == 0 || z + 1 == d)) || y == 0 || y + 1 == h || x == 0 || x + 1 == w
    }
}

impl Serialize for Shape {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.extents().serialize(serializer)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    shape: Shape,
    data: Vec<T>,
}

pub type BinaryGrid = Grid<u8>;
pub type RealGrid = Grid<f32>;

impl<T: Copy> Grid<T> {
    pub fn from_vec(shape: Shape, data: Vec<T>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::LengthMismatch {
                shape: shape.extents().to_vec(),
                expected: shape.len(),
                actual: data.len(),
            });
        }
        Ok(Grid { shape, data })
    }

    pub fn filled(shape: Shape, value: T) -> Self {
        Grid {
            shape,
            data: vec![value; shape.len()],
        }
    }

    /// Builds a grid from a function of `(z, y, x)`; `z == 0` in 2D.
    pub fn from_fn(shape: Shape, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let [d, h, w] = shape.zyx();
        let mut data = Vec::with_capacity(shape.len());
        for z in 0..d {
            for y in 0..h {
                for x in 0..w {
                    data.push(f(z, y, x));
                }
            }
        }
        Grid { shape, data }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.ndim()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Value at logical coordinates.
    pub fn get(&self, coords: &[usize]) -> T {
        self.data[self.shape.flat(coords)]
    }

    #[inline]
    pub fn at(&self, z: usize, y: usize, x: usize) -> T {
        self.data[self.shape.index(z, y, x)]
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Grid<U> {
        Grid {
            shape: self.shape,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn ensure_same_shape<U>(&self, other: &Grid<U>) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                left: self.shape.extents().to_vec(),
                right: other.shape.extents().to_vec(),
            });
        }
        Ok(())
    }

    pub fn zip_map<U: Copy, V: Copy>(&self, other: &Grid<U>, f: impl Fn(T, U) -> V) -> Result<Grid<V>> {
        self.ensure_same_shape(other)?;
        Ok(Grid {
            shape: self.shape,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Sub-grid starting at `origin` with `extent` (logical coordinates),
    /// clipped to the grid bounds.
    pub fn crop(&self, origin: &[usize], extent: &[usize]) -> Result<Self> {
        let ndim = self.ndim();
        if origin.len() != ndim || extent.len() != ndim {
            return Err(Error::TileRank {
                tile: extent.to_vec(),
                ndim,
            });
        }
        let clipped: Vec<usize> = (0..ndim)
            .map(|a| extent[a].min(self.shape.extents()[a].saturating_sub(origin[a])))
            .collect();
        let shape = Shape::new(&clipped)?;
        let mut o = [0; 3];
        o[3 - ndim..].copy_from_slice(origin);
        Ok(Grid::from_fn(shape, |z, y, x| self.at(z + o[0], y + o[1], x + o[2])))
    }

    /// The 2D grid at depth `z` of a 3D grid.
    pub fn slice_z(&self, z: usize) -> Result<Self> {
        if self.ndim() != 3 {
            return Err(Error::SliceNeeds3d);
        }
        let [_, h, w] = self.shape.zyx();
        let start = self.shape.index(z, 0, 0);
        Grid::from_vec(Shape::d2(h, w)?, self.data[start..start + h * w].to_vec())
    }

    pub(crate) fn with_data<U>(shape: Shape, data: Vec<U>) -> Grid<U> {
        debug_assert_eq!(shape.len(), data.len());
        Grid { shape, data }
    }
}

impl BinaryGrid {
    /// Validated binary grid: every value must be 0 or 1.
    pub fn binary(shape: Shape, data: Vec<u8>) -> Result<Self> {
        let grid = Self::from_vec(shape, data)?;
        grid.check_binary()?;
        Ok(grid)
    }

    pub fn zeros(shape: Shape) -> Self {
        Self::filled(shape, 0)
    }

    pub fn check_binary(&self) -> Result<()> {
        match self.data.iter().position(|&v| v > 1) {
            Some(index) => Err(Error::NotBinary {
                index,
                value: self.data[index],
            }),
            None => Ok(()),
        }
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn any(&self) -> bool {
        self.data.iter().any(|&v| v != 0)
    }

    pub fn and(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a & b)
    }

    pub fn or(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a | b)
    }

    /// `self ∧ ¬other`
    pub fn and_not(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a & !b & 1)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.shape == other.shape && self.data.iter().zip(&other.data).all(|(&a, &b)| a <= b)
    }

    pub fn to_real(&self) -> RealGrid {
        self.map(f32::from)
    }
}

impl RealGrid {
    /// Validated probability grid: every value must lie in `[0, 1]`.
    pub fn probability(shape: Shape, data: Vec<f32>) -> Result<Self> {
        let grid = Self::from_vec(shape, data)?;
        grid.check_probability()?;
        Ok(grid)
    }

    pub fn check_probability(&self) -> Result<()> {
        match self.data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            Some(index) => Err(Error::NotProbability {
                index,
                value: self.data[index],
            }),
            None => Ok(()),
        }
    }

    /// Foreground where `value >= threshold`.
    pub fn threshold(&self, threshold: f32) -> BinaryGrid {
        self.map(|v| u8::from(v >= threshold))
    }

    /// Binarized prediction; ties at 0.5 go to foreground.
    pub fn binarize(&self) -> BinaryGrid {
        self.threshold(0.5)
    }
}

/// Either dtype a BTF file can carry.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyGrid {
    Binary(BinaryGrid),
    Real(RealGrid),
}

impl AnyGrid {
    pub fn shape(&self) -> Shape {
        match self {
            AnyGrid::Binary(g) => g.shape(),
            AnyGrid::Real(g) => g.shape(),
        }
    }

    /// Binary view: real grids are thresholded at 0.5.
    pub fn to_binary(&self) -> BinaryGrid {
        match self {
            AnyGrid::Binary(g) => g.clone(),
            AnyGrid::Real(g) => g.binarize(),
        }
    }

    /// Probability view: binary grids map to 0.0 / 1.0.
    pub fn to_probability(&self) -> Result<RealGrid> {
        match self {
            AnyGrid::Binary(g) => Ok(g.to_real()),
            AnyGrid::Real(g) => {
                g.check_probability()?;
                Ok(g.clone())
            }
        }
    }
}

impl From<BinaryGrid> for AnyGrid {
    fn from(g: BinaryGrid) -> Self {
        AnyGrid::Binary(g)
    }
}

impl From<RealGrid> for AnyGrid {
    fn from(g: RealGrid) -> Self {
        AnyGrid::Real(g)
    }
}

/// Neighbourhood used to decide whether two pixels are connected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Connectivity {
    /// 2D edge neighbours.
    Four,
    /// 2D edge and corner neighbours.
    Eight,
    /// 3D face neighbours.
    Six,
    /// 3D face, edge and corner neighbours.
    TwentySix,
}

impl Connectivity {
    pub fn ndim(self) -> usize {
        match self {
            Connectivity::Four | Connectivity::Eight => 2,
            Connectivity::Six | Connectivity::TwentySix => 3,
        }
    }

    pub fn dual(self) -> Self {
        match self {
            Connectivity::Four => Connectivity::Eight,
            Connectivity::Eight => Connectivity::Four,
            Connectivity::Six => Connectivity::TwentySix,
            Connectivity::TwentySix => Connectivity::Six,
        }
    }

    pub fn count(self) -> usize {
        match self {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
            Connectivity::Six => 6,
            Connectivity::TwentySix => 26,
        }
    }

    /// Neighbour offsets `(dz, dy, dx)` that precede the centre in raster order.
    pub fn backward_offsets(self) -> Vec<[isize; 3]> {
        let full = matches!(self, Connectivity::Eight | Connectivity::TwentySix);
        let dzs: &[isize] = if self.ndim() == 3 { &[-1, 0] } else { &[0] };
        let mut out = Vec::new();
        for &dz in dzs {
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let before = dz < 0 || (dz == 0 && (dy < 0 || (dy == 0 && dx < 0)));
                    let nonzero = (dz != 0) as u8 + (dy != 0) as u8 + (dx != 0) as u8;
                    if before && (full || nonzero == 1) {
                        out.push([dz, dy, dx]);
                    }
                }
            }
        }
        out
    }
}

/// Foreground connectivity convention with its dual background connectivity:
/// 8/4 in 2D and 26/6 in 3D.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Adjacency {
    ndim: usize,
}

impl Adjacency {
    pub fn for_ndim(ndim: usize) -> Result<Self> {
        match ndim {
            2 | 3 => Ok(Adjacency { ndim }),
            _ => Err(Error::InvalidConfig(format!("no adjacency for {ndim}D grids"))),
        }
    }

    pub fn for_shape(shape: Shape) -> Self {
        Adjacency { ndim: shape.ndim() }
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    pub fn foreground(&self) -> Connectivity {
        if self.ndim == 2 {
            Connectivity::Eight
        } else {
            Connectivity::TwentySix
        }
    }

    pub fn background(&self) -> Connectivity {
        self.foreground().dual()
    }

    pub fn check(&self, shape: Shape) -> Result<()> {
        if shape.ndim() != self.ndim {
            return Err(Error::DimensionMismatch {
                adjacency: self.ndim,
                grid: shape.ndim(),
            });
        }
        Ok(())
    }
}

impl Serialize for Adjacency {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_u64(self.foreground().count() as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_rejects_bad_rank_and_zero_extents() {
        assert!(Shape::new(&[4]).is_err());
        assert!(Shape::new(&[1, 2, 3, 4]).is_err());
        assert!(Shape::new(&[3, 0]).is_err());
        let s = Shape::new(&[2, 3]).unwrap();
        assert_eq!(s.zyx(), [1, 2, 3]);
        assert_eq!(s.extents(), &[2, 3]);
        assert_eq!(s.len(), 6);
    }

    #[test]
    fn coords_round_trip() {
        let s = Shape::d3(3, 4, 5).unwrap();
        for i in 0..s.len() {
            let [z, y, x] = s.coords(i);
            assert_eq!(s.index(z, y, x), i);
        }
    }

    #[test]
    fn binary_validation() {
        let s = Shape::d2(1, 3).unwrap();
        assert!(BinaryGrid::binary(s, vec![0, 1, 0]).is_ok());
        assert!(matches!(
            BinaryGrid::binary(s, vec![0, 2, 0]),
            Err(Error::NotBinary { index: 1, value: 2 })
        ));
        assert!(matches!(
            BinaryGrid::binary(s, vec![0, 1]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn probability_validation_and_tie_binarization() {
        let s = Shape::d2(1, 3).unwrap();
        assert!(RealGrid::probability(s, vec![0.0, 1.5, 0.2]).is_err());
        assert!(RealGrid::probability(s, vec![0.0, f32::NAN, 0.2]).is_err());
        let g = RealGrid::probability(s, vec![0.49, 0.5, 1.0]).unwrap();
        assert_eq!(g.binarize().data(), &[0, 1, 1]);
    }

    #[test]
    fn crop_clips_at_border() {
        let s = Shape::d2(5, 5).unwrap();
        let g = Grid::from_fn(s, |_, y, x| (y * 5 + x) as u32);
        let c = g.crop(&[4, 3], &[4, 4]).unwrap();
        assert_eq!(c.shape().extents(), &[1, 2]);
        assert_eq!(c.data(), &[23, 24]);
    }

    #[test]
    fn backward_offsets_counts() {
        assert_eq!(Connectivity::Four.backward_offsets().len(), 2);
        assert_eq!(Connectivity::Eight.backward_offsets().len(), 4);
        assert_eq!(Connectivity::Six.backward_offsets().len(), 3);
        assert_eq!(Connectivity::TwentySix.backward_offsets().len(), 13);
    }

    #[test]
    fn adjacency_duals() {
        let a2 = Adjacency::for_ndim(2).unwrap();
        assert_eq!(a2.foreground(), Connectivity::Eight);
        assert_eq!(a2.background(), Connectivity::Four);
        let a3 = Adjacency::for_ndim(3).unwrap();
        assert_eq!(a3.background(), Connectivity::Six);
        assert!(Adjacency::for_ndim(4).is_err());
        assert!(a3.check(Shape::d2(2, 2).unwrap()).is_err());
    }
}
