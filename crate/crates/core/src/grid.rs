use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Uniform periodic lattice with `n` points per axis on a cube of side `period`.
///
/// Storage order everywhere is x-fastest: `idx = i + n * (j + n * k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    n: usize,
    period: f64,
}

impl Grid {
    pub fn new(n: usize, period: f64) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n must be even and >= 8, got {n}"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "period must be positive, got {period}"
            )));
        }
        Ok(Self { n, period })
    }

    /// Grid on the standard box of side 2π.
    pub fn periodic_2pi(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn period(&self) -> f64 {
        self.period
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Number of nodes, n³.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    /// Inverse of [`Grid::idx`].
    #[inline]
    pub fn ijk(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx % n, (idx / n) % n, idx / (n * n))
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    #[inline]
    pub fn node(&self, idx: usize) -> [f64; 3] {
        let (i, j, k) = self.ijk(idx);
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    /// Base wavenumber 2π/L.
    #[inline]
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Signed integer wavenumber of FFT index `m`, in (-n/2, n/2].
    #[inline]
    pub fn signed_mode(&self, m: usize) -> i64 {
        let n = self.n as i64;
        let m = m as i64;
        if m > n / 2 {
            m - n
        } else {
            m
        }
    }

    /// Physical wavenumber of FFT index `m` used for odd derivatives.
    /// The Nyquist mode has no real-valued derivative and maps to zero.
    #[inline]
    pub fn deriv_wavenumber(&self, m: usize) -> f64 {
        if m == self.n / 2 {
            0.0
        } else {
            self.signed_mode(m) as f64 * self.k0()
        }
    }

    /// Largest integer mode retained by the two-thirds rule.
    #[inline]
    pub fn dealias_cutoff(&self) -> i64 {
        // |k| > (2/3)(n/2) is removed
        (self.n as i64) / 3
    }

    /// Minimal-image difference `b - a` along one axis.
    #[inline]
    pub fn min_image(&self, d: f64) -> f64 {
        let l = self.period;
        d - l * (d / l).round()
    }

    #[inline]
    pub fn wrap(&self, x: f64) -> f64 {
        let r = x - self.period * (x / self.period).floor();
        // rounding can land exactly on the period
        if r >= self.period {
            r - self.period
        } else {
            r.max(0.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(6, 1.0).is_err());
        assert!(Grid::new(9, 1.0).is_err());
        assert!(Grid::new(16, 0.0).is_err());
        assert!(Grid::new(16, f64::NAN).is_err());
        assert!(Grid::new(8, 1.0).is_ok());
    }

    #[test]
    fn spacing_times_n_is_period() {
        for &(n, l) in &[(8usize, 1.0), (32, 2.0 * PI), (64, 3.7)] {
            let g = Grid::new(n, l).unwrap();
            assert_eq!(g.spacing() * n as f64, l);
        }
    }

    #[test]
    fn signed_modes_cover_half_open_band() {
        let g = Grid::new(8, 1.0).unwrap();
        let modes: Vec<i64> = (0..8).map(|m| g.signed_mode(m)).collect();
        assert_eq!(modes, vec![0, 1, 2, 3, 4, -3, -2, -1]);
        assert_eq!(g.deriv_wavenumber(4), 0.0);
        assert_eq!(g.dealias_cutoff(), 2);
    }

    #[test]
    fn index_roundtrip() {
        let g = Grid::new(8, 1.0).unwrap();
        for idx in [0, 1, 7, 8, 63, 64, 511] {
            let (i, j, k) = g.ijk(idx);
            assert_eq!(g.idx(i, j, k), idx);
        }
    }
}
