use crate::grid::GridSpec;
use crate::scalar::Real;

/// Pixel selection over a grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    nx: usize,
    ny: usize,
    keep: Vec<bool>,
}

impl Mask {
    pub fn all<T: Real>(grid: &GridSpec<T>) -> Self {
        Self {
            nx: grid.nx,
            ny: grid.ny,
            keep: vec![true; grid.len()],
        }
    }

    pub fn from_fn<T: Real, F: Fn(T, T) -> bool>(grid: &GridSpec<T>, f: F) -> Self {
        let keep = (0..grid.len())
            .map(|idx| {
                let (x, y) = grid.xy(idx);
                f(x, y)
            })
            .collect();
        Self {
            nx: grid.nx,
            ny: grid.ny,
            keep,
        }
    }

    pub fn from_vec<T: Real>(grid: &GridSpec<T>, keep: Vec<bool>) -> Self {
        assert_eq!(keep.len(), grid.len());
        Self {
            nx: grid.nx,
            ny: grid.ny,
            keep,
        }
    }

    /// `r_min <= r <= r_max`.
    pub fn annulus<T: Real>(grid: &GridSpec<T>, r_min: T, r_max: T) -> Self {
        Self::from_fn(grid, |x, y| {
            let r = x.hypot(y);
            r >= r_min && r <= r_max
        })
    }

    /// Drops the band `x < 0, |y| <= half_width` around the theta = pi branch cut.
    pub fn without_cut<T: Real>(mut self, grid: &GridSpec<T>, half_width: T) -> Self {
        for (idx, k) in self.keep.iter_mut().enumerate() {
            let (x, y) = grid.xy(idx);
            if x < T::zero() && y.abs() <= half_width {
                *k = false;
            }
        }
        self
    }

    /// Drops pixels within `width` samples of the grid edge.
    pub fn without_border(mut self, width: usize) -> Self {
        for j in 0..self.ny {
            for i in 0..self.nx {
                if i < width || j < width || i + width >= self.nx || j + width >= self.ny {
                    self.keep[j * self.nx + i] = false;
                }
            }
        }
        self
    }

    pub fn and(mut self, other: &Mask) -> Self {
        assert_eq!(self.keep.len(), other.keep.len());
        for (a, b) in self.keep.iter_mut().zip(&other.keep) {
            *a &= *b;
        }
        self
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.keep[j * self.nx + i]
    }

    #[inline]
    pub fn keep(&self) -> &[bool] {
        &self.keep
    }

    pub fn count(&self) -> usize {
        self.keep.iter().filter(|&&k| k).count()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn indices(&self) -> Vec<usize> {
        self.keep
            .iter()
            .enumerate()
            .filter_map(|(i, &k)| k.then_some(i))
            .collect()
    }
}
