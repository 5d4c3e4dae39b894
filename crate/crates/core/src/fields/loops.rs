use super::{interpolate_at, Interpolation, VectorField};
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Closed polyline of marker points; the segment from the last point back
/// to the first is part of the loop.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkerLoop {
    pub points: Vec<[f64; 3]>,
}

impl MarkerLoop {
    pub const MIN_POINTS: usize = 16;

    pub fn new(points: Vec<[f64; 3]>) -> Result<Self> {
        if points.len() < Self::MIN_POINTS {
            return Err(Error::BadParameters(format!(
                "marker loop needs at least {} points, got {}",
                Self::MIN_POINTS,
                points.len()
            )));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "marker loop".into(),
            });
        }
        Ok(Self { points })
    }

    /// Circle of radius `r` about `center` in the plane normal to `axis`.
    pub fn circle(center: [f64; 3], r: f64, axis: usize, m: usize) -> Result<Self> {
        let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
        let points = (0..m)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
                let mut p = center;
                p[a] += r * th.cos();
                p[b] += r * th.sin();
                p
            })
            .collect();
        Self::new(points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Minimal-image segment vectors `p_{i+1} − p_i`, closing segment last.
    pub fn segments(&self, grid: Grid) -> Vec<[f64; 3]> {
        let m = self.points.len();
        (0..m)
            .map(|i| {
                let a = self.points[i];
                let b = self.points[(i + 1) % m];
                [0, 1, 2].map(|d| grid.min_image(b[d] - a[d]))
            })
            .collect()
    }
}

/// ∮ u·dγ with the loop treated as a periodic curve sampled at the markers.
pub fn circulation(u: &VectorField, lp: &MarkerLoop, scheme: Interpolation) -> Result<f64> {
    let vals = interpolate_at(u, &lp.points, scheme);
    circulation_from_values(u.grid(), lp, &vals)
}

/// Same quadrature with velocities already sampled at the markers.
///
/// Markers are taken as equispaced samples of a parameter s ∈ [0, 2π); the
/// tangent dγ/ds comes from the discrete Fourier series of the unwrapped
/// positions and the integral from the trapezoid rule, which is spectrally
/// accurate for a smooth closed curve.
pub fn circulation_from_values(grid: Grid, lp: &MarkerLoop, vals: &[[f64; 3]]) -> Result<f64> {
    let m = lp.points.len();
    if m < MarkerLoop::MIN_POINTS {
        return Err(Error::BadParameters(format!(
            "marker loop has only {m} points"
        )));
    }
    let tol = 1e-12 * grid.period();
    let segs = lp.segments(grid);
    for (i, s) in segs.iter().enumerate() {
        if (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt() <= tol {
            return Err(Error::DegenerateLoop {
                index: i,
                next: (i + 1) % m,
            });
        }
    }
    let gap: [f64; 3] = [0, 1, 2].map(|d| segs.iter().map(|s| s[d]).sum::<f64>());
    if gap.iter().any(|g| g.abs() > 1e-9 * grid.period()) {
        return Err(Error::BadParameters(
            "marker loop winds around the box".into(),
        ));
    }
    // unwrapped positions along the loop
    let mut pos = vec![lp.points[0]; m];
    for i in 1..m {
        pos[i] = [0, 1, 2].map(|d| pos[i - 1][d] + segs[i - 1][d]);
    }
    let tangent = spectral_derivative(&pos);
    let ds = 2.0 * std::f64::consts::PI / m as f64;
    Ok(vals
        .iter()
        .zip(&tangent)
        .map(|(u, t)| u[0] * t[0] + u[1] * t[1] + u[2] * t[2])
        .sum::<f64>()
        * ds)
}

/// d/ds of periodic samples on s ∈ [0, 2π), by the discrete Fourier series
/// with the Nyquist mode dropped.
fn spectral_derivative(x: &[[f64; 3]]) -> Vec<[f64; 3]> {
    use std::f64::consts::PI;
    let m = x.len();
    let modes: Vec<i64> = (0..m as i64)
        .map(|k| if 2 * k < m as i64 { k } else { k - m as i64 })
        .collect();
    let mut out = vec![[0.0; 3]; m];
    for (k, &kk) in modes.iter().enumerate() {
        if kk == 0 || 2 * kk.unsigned_abs() as usize == m {
            continue;
        }
        let mut c = [(0.0, 0.0); 3];
        for (i, p) in x.iter().enumerate() {
            let (sn, cs) = (-2.0 * PI * (k * i) as f64 / m as f64).sin_cos();
            for d in 0..3 {
                c[d].0 += p[d] * cs;
                c[d].1 += p[d] * sn;
            }
        }
        for (i, o) in out.iter_mut().enumerate() {
            let (sn, cs) = (2.0 * PI * (k * i) as f64 / m as f64).sin_cos();
            for d in 0..3 {
                // real part of i k c e^{iks}
                let im = c[d].0 * sn + c[d].1 * cs;
                o[d] -= kk as f64 * im / m as f64;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_has_zero_circulation() {
        let g = Grid::periodic_2pi(8).unwrap();
        let u = VectorField::from_fn(g, |_, _, _| [1.0, -2.0, 0.5]);
        let lp = MarkerLoop::circle([3.0, 3.0, 3.0], 1.0, 2, 32).unwrap();
        assert!(circulation(&u, &lp, Interpolation::TRICUBIC).unwrap().abs() < 1e-13);
        // kernel evaluation error is a few 1e-8 of the field size
        assert!(
            circulation(&u, &lp, Interpolation::default())
                .unwrap()
                .abs()
                < 1e-7
        );
    }

    #[test]
    fn circle_in_rotating_field_matches_bessel() {
        // u = (−sin y, sin x, 0): circulation on a circle of radius r about
        // the origin is 4π r J1(r)
        let g = Grid::periodic_2pi(32).unwrap();
        let u = VectorField::from_fn(g, |x, y, _| [-y.sin(), x.sin(), 0.0]);
        let r = std::f64::consts::PI / 2.0;
        let lp = MarkerLoop::circle([0.0, 0.0, 1.0], r, 2, 64).unwrap();
        let j1 = bessel_j1(r);
        let got = circulation(&u, &lp, Interpolation::Lagrange { points: 8 }).unwrap();
        assert!(
            (got - 4.0 * std::f64::consts::PI * r * j1).abs() < 1e-6,
            "{got}"
        );
    }

    fn bessel_j1(x: f64) -> f64 {
        // power series, ample terms for x < 3
        let mut term = x / 2.0;
        let mut sum = term;
        for k in 1..40 {
            term *= -(x * x / 4.0) / (k as f64 * (k + 1) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn coincident_points_rejected() {
        let g = Grid::periodic_2pi(8).unwrap();
        let mut lp = MarkerLoop::circle([3.0, 3.0, 3.0], 1.0, 2, 16).unwrap();
        lp.points[4] = lp.points[3];
        let u = VectorField::zeros(g);
        assert!(matches!(
            circulation(&u, &lp, Interpolation::TRICUBIC),
            Err(Error::DegenerateLoop { index: 3, next: 4 })
        ));
    }

    #[test]
    fn too_few_points_rejected() {
        assert!(MarkerLoop::circle([0.0; 3], 1.0, 0, 8).is_err());
    }
}
