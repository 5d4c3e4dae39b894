#![allow(clippy::needless_range_loop)]

use av_euler::diagnostics::{cofactor_inverse, det_of, distribution_integrals};
use av_euler::eos::{grad_a, EquationOfState};
use av_euler::fields::{compose, holder_norm_c0mu_vector, Interpolation};
use av_euler::scenario::random_modes;
use av_euler::{spectral, Grid, VectorField};
use proptest::prelude::*;

fn grid(n: usize) -> Grid {
    Grid::periodic_2pi(n).unwrap()
}

/// Random band-limited δ with sup|∇δ| = `g`.
fn small_delta(n: usize, seed: u64, g: f64) -> VectorField {
    let mut d = random_modes(grid(n), seed, 3.0, 1.0, false);
    let s = spectral::jacobian_real(&d).max_norm();
    d.scale(g / s);
    d
}

fn schemes() -> impl Strategy<Value = Interpolation> {
    prop_oneof![
        (2usize..=6).prop_map(|h| Interpolation::Spectral { width: 2 * h }),
        (1usize..=4).prop_map(|h| Interpolation::Lagrange { points: 2 * h }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn projection_is_idempotent_and_solenoidal(seed in any::<u64>()) {
        let v = random_modes(grid(16), seed, 6.0, 0.0, false);
        let p = spectral::project_real(&v);
        prop_assert!(spectral::div_real(&p).max_abs() < 1e-12 * v.max_norm().max(1.0));
        prop_assert!(spectral::project_real(&p).max_dist(&p) < 1e-13);
    }

    #[test]
    fn curl_of_gradient_and_div_of_curl_vanish(seed in any::<u64>()) {
        let v = random_modes(grid(16), seed, 5.0, 0.0, false);
        let s = v.scalar(0);
        prop_assert!(spectral::curl_real(&spectral::grad_real(&s)).max_norm() < 1e-11);
        prop_assert!(spectral::div_real(&spectral::curl_real(&v)).max_abs() < 1e-11);
    }

    #[test]
    fn cofactor_times_jacobian_is_det_identity(seed in any::<u64>(), g in 0.0f64..0.9) {
        let delta = small_delta(12, seed, g);
        let jac = grad_a(&delta);
        let cof = cofactor_inverse(&jac);
        let det = det_of(&jac);
        let grid = delta.grid();
        for idx in 0..grid.len() {
            let (c, j, d) = (cof.at(idx), jac.at(idx), det.data()[idx]);
            for r in 0..3 {
                for s in 0..3 {
                    let prod: f64 = (0..3).map(|k| c[r][k] * j[k][s]).sum();
                    let want = if r == s { d } else { 0.0 };
                    prop_assert!((prod - want).abs() < 1e-13, "({r},{s}) {prod} vs {want}");
                }
            }
        }
    }

    #[test]
    fn composition_with_zero_map_is_identity(seed in any::<u64>(), scheme in schemes()) {
        let f = random_modes(grid(16), seed, 5.0, 1.0, false);
        let back = compose(&f, &VectorField::zeros(f.grid()), scheme);
        prop_assert!(back.max_dist(&f) < 1e-12 * f.max_norm());
    }

    #[test]
    fn composition_with_whole_cell_shift_is_a_roll(seed in any::<u64>(), s in 0usize..16, scheme in schemes()) {
        let g = grid(16);
        let f = random_modes(g, seed, 5.0, 1.0, false);
        let h = g.spacing() * s as f64;
        let shifted = compose(&f, &VectorField::from_fn(g, |_, _, _| [h, 0.0, 0.0]), scheme);
        for idx in 0..g.len() {
            let (i, j, k) = g.ijk(idx);
            let src = g.idx((i + s) % 16, j, k);
            for c in 0..3 {
                prop_assert!((shifted.comp(c)[idx] - f.comp(c)[src]).abs() < 1e-12 * f.max_norm());
            }
        }
    }

    #[test]
    fn holder_norm_is_homogeneous_and_shift_invariant(seed in any::<u64>(), a in -5.0f64..5.0, s in 0usize..12) {
        let g = grid(12);
        let f = random_modes(g, seed, 4.0, 1.0, false);
        let base = holder_norm_c0mu_vector(&f, 0.5).total;
        prop_assert!((holder_norm_c0mu_vector(&f.scaled(a), 0.5).total - a.abs() * base).abs() < 1e-12 * base.max(1.0));
        let mut rolled = VectorField::zeros(g);
        for idx in 0..g.len() {
            let (i, j, k) = g.ijk(idx);
            let src = g.idx(i, (j + s) % 12, k);
            for c in 0..3 {
                rolled.comp_mut(c)[idx] = f.comp(c)[src];
            }
        }
        prop_assert!((holder_norm_c0mu_vector(&rolled, 0.5).total - base).abs() < 1e-12 * base);
    }

    #[test]
    fn velocity_at_zero_map_is_phi(seed in any::<u64>()) {
        let phi = spectral::dealias_project(&random_modes(grid(16), seed, 4.0, 1.0, false));
        let eos = EquationOfState::new(phi.clone(), Interpolation::default()).unwrap();
        prop_assert!(eos.velocity_w(&VectorField::zeros(phi.grid())).max_dist(&phi) < 1e-12 * phi.max_norm());
    }

    #[test]
    fn shear_maps_preserve_volume_and_test_integrals(amp in -0.4f64..0.4, m in 1i32..3) {
        let g = grid(16);
        let m = m as f64;
        let delta = VectorField::from_fn(g, |_, y, z| [amp * (m * y).sin(), amp * z.cos(), 0.0]);
        let det = det_of(&grad_a(&delta));
        prop_assert!(det.data().iter().all(|d| (d - 1.0).abs() < 1e-12));
        let moved = distribution_integrals(&delta);
        let rest = distribution_integrals(&VectorField::zeros(g));
        for (a, b) in moved.iter().zip(&rest) {
            prop_assert!((a - b).abs() < 1e-10 * b.abs(), "{a} vs {b}");
        }
    }
}
