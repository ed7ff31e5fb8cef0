use crate::{Error, Result};

/// Uniformly spaced points `lo, lo + h, ..., lo + (n-1) h`.
///
/// The step is stored rather than recomputed from `hi` so that reciprocal
/// grids built by the Fourier transform keep their exact spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    lo: f64,
    step: f64,
    n: usize,
}

impl Grid {
    pub const MIN_POINTS: usize = 8;

    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidParameter(format!("grid bounds must satisfy lo < hi, got [{lo}, {hi}]")));
        }
        if n < Self::MIN_POINTS {
            return Err(Error::InvalidParameter(format!("grid needs at least {} points, got {n}", Self::MIN_POINTS)));
        }
        Ok(Self { lo, step: (hi - lo) / (n - 1) as f64, n })
    }

    pub fn from_step(lo: f64, step: f64, n: usize) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) || !lo.is_finite() {
            return Err(Error::InvalidParameter(format!("grid step must be positive, got {step}")));
        }
        if n < Self::MIN_POINTS {
            return Err(Error::InvalidParameter(format!("grid needs at least {} points, got {n}", Self::MIN_POINTS)));
        }
        Ok(Self { lo, step, n })
    }

    /// Grid of `n` points on `[center - half_width, center + half_width]`.
    pub fn centered(center: f64, half_width: f64, n: usize) -> Result<Self> {
        Self::new(center - half_width, center + half_width, n)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.point(self.n - 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.step
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.points().collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi()
    }

    /// Cell index `i` and fraction `t` in `[0, 1]` with
    /// `x = point(i) + t * spacing`, for `x` inside the grid.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        if !self.contains(x) {
            return None;
        }
        let s = (x - self.lo) / self.step;
        let i = (s.floor() as usize).min(self.n - 2);
        Some((i, (s - i as f64).clamp(0.0, 1.0)))
    }

    /// Index of the grid point closest to `x` (clamped to the ends).
    pub fn nearest(&self, x: f64) -> usize {
        let s = ((x - self.lo) / self.step).round();
        s.clamp(0.0, (self.n - 1) as f64) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_bounds_and_sizes() {
        assert!(Grid::new(1.0, 1.0, 10).is_err());
        assert!(Grid::new(2.0, 1.0, 10).is_err());
        assert!(Grid::new(0.0, 1.0, 7).is_err());
        assert!(Grid::new(0.0, f64::NAN, 10).is_err());
    }

    #[test]
    fn endpoints_and_spacing() {
        let g = Grid::new(-1.0, 1.0, 101).unwrap();
        assert_eq!(g.lo(), -1.0);
        assert!((g.hi() - 1.0).abs() < 1e-15);
        assert!((g.spacing() - 0.02).abs() < 1e-15);
        assert_eq!(g.points().len(), 101);
    }

    #[test]
    fn locate_inside_and_outside() {
        let g = Grid::new(0.0, 1.0, 11).unwrap();
        let (i, t) = g.locate(0.25).unwrap();
        assert_eq!(i, 2);
        assert!((t - 0.5).abs() < 1e-12);
        assert_eq!(g.locate(1.0).unwrap().0, 9);
        assert!(g.locate(1.5).is_none());
        assert_eq!(g.nearest(-3.0), 0);
        assert_eq!(g.nearest(0.31), 3);
    }
}
