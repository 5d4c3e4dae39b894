//! Initial-condition library. Every generated velocity is spectrally
//! divergence free and band-limited inside the two-thirds band.

use crate::error::{Error, Result};
use crate::fields::VectorField;
use crate::grid::Grid;
use crate::spectral::{self, SpectralField};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Clone, Debug, PartialEq)]
pub enum Scenario {
    /// `(sin x cos y, −cos x sin y, 0)` on the box, times `amplitude`.
    TaylorGreen2d { amplitude: f64 },
    /// `(A sin z + C cos y, B sin x + A cos z, C sin y + B cos x)`.
    Abc { a: f64, b: f64, c: f64 },
    /// Gaussian modes with amplitude `|k|^(−exponent)` for `0 < |k| ≤ k_cut`,
    /// projected and rescaled to rms speed `amplitude`.
    RandomBandlimited {
        seed: u64,
        exponent: f64,
        k_cut: f64,
        amplitude: f64,
        two_d: bool,
    },
    /// Doubly periodic shear layers `u = tanh(ρ(y − π/2))` / `tanh(ρ(3π/2 − y))`
    /// with a transverse `perturbation · sin x`, band-limited by truncation.
    ShearLayer2d { rho: f64, perturbation: f64 },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::TaylorGreen2d { .. } => "taylor_green_2d",
            Scenario::Abc { .. } => "abc",
            Scenario::RandomBandlimited { .. } => "random_bandlimited",
            Scenario::ShearLayer2d { .. } => "shear_layer_2d",
        }
    }
}

/// Builds the chart-zero velocity φ for `scenario` on `grid`.
pub fn generate_ic(scenario: &Scenario, grid: Grid) -> Result<VectorField> {
    let k0 = grid.k0();
    let raw = match *scenario {
        Scenario::TaylorGreen2d { amplitude } => {
            check_finite(&[amplitude])?;
            VectorField::from_fn(grid, |x, y, _| {
                let (x, y) = (k0 * x, k0 * y);
                [
                    amplitude * x.sin() * y.cos(),
                    -amplitude * x.cos() * y.sin(),
                    0.0,
                ]
            })
        }
        Scenario::Abc { a, b, c } => {
            check_finite(&[a, b, c])?;
            VectorField::from_fn(grid, |x, y, z| {
                let (x, y, z) = (k0 * x, k0 * y, k0 * z);
                [
                    a * z.sin() + c * y.cos(),
                    b * x.sin() + a * z.cos(),
                    c * y.sin() + b * x.cos(),
                ]
            })
        }
        Scenario::RandomBandlimited {
            seed,
            exponent,
            k_cut,
            amplitude,
            two_d,
        } => {
            check_finite(&[exponent, k_cut, amplitude])?;
            if k_cut < 1.0 || k_cut > grid.dealias_cutoff() as f64 {
                return Err(Error::BadParameters(format!(
                    "k_cut must lie in [1, {}], got {k_cut}",
                    grid.dealias_cutoff()
                )));
            }
            let mut v = random_modes(grid, seed, k_cut, exponent, two_d);
            let s = spectral::leray_project(&spectral::forward_vector(&v));
            v = spectral::inverse_vector(&s);
            let rms = v.rms();
            if rms == 0.0 {
                return Err(Error::BadParameters(
                    "random field vanished after projection".into(),
                ));
            }
            v.scale(amplitude / rms);
            return Ok(v);
        }
        Scenario::ShearLayer2d { rho, perturbation } => {
            check_finite(&[rho, perturbation])?;
            if rho <= 0.0 {
                return Err(Error::BadParameters(format!(
                    "rho must be positive, got {rho}"
                )));
            }
            use std::f64::consts::PI;
            VectorField::from_fn(grid, |x, y, _| {
                let (x, y) = (k0 * x, k0 * y);
                let ux = if y <= PI {
                    (rho * (y - PI / 2.0)).tanh()
                } else {
                    (rho * (1.5 * PI - y)).tanh()
                };
                [ux, perturbation * x.sin(), 0.0]
            })
        }
    };
    Ok(spectral::dealias_project(&raw))
}

/// Band-limited random vector field (not projected): Gaussian modes with
/// amplitude `|k|^(−exponent)` inside `0 < |k| ≤ k_cut` (integer modes).
/// With `two_d` only `k_z = 0` modes and the x, y components are filled.
pub fn random_modes(grid: Grid, seed: u64, k_cut: f64, exponent: f64, two_d: bool) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kc = k_cut.floor() as i64;
    let ncomp = if two_d { 2 } else { 3 };
    let mut comps: Vec<SpectralField> = (0..3).map(|_| SpectralField::zeros(grid)).collect();
    let kz_range = if two_d { 0..=0 } else { -kc..=kc };
    for c in kz_range {
        for b in -kc..=kc {
            for a in -kc..=kc {
                let k2 = (a * a + b * b + c * c) as f64;
                if k2 == 0.0 || k2.sqrt() > k_cut {
                    continue;
                }
                let amp = k2.sqrt().powf(-exponent);
                for comp in comps.iter_mut().take(ncomp) {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    comp.set_mode(a, b, c, Complex64::new(re, im) * amp);
                }
            }
        }
    }
    // the real part of the synthesis is the conjugate-symmetric part
    let [x, y, z]: [SpectralField; 3] = comps.try_into().expect("three components");
    VectorField::from_scalars(
        spectral::inverse(&x),
        spectral::inverse(&y),
        spectral::inverse(&z),
    )
}

fn check_finite(vals: &[f64]) -> Result<()> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::BadParameters(
            "scenario parameters must be finite".into(),
        ))
    }
}
