//! Conserved quantities and structural checks along a run.

mod identities;

pub use identities::*;

use crate::error::Result;
use crate::evolve::{ChartState, StageVelocities};
use crate::fields::{
    circulation_from_values, Interpolation, Interpolator, MarkerLoop, VectorField,
};
use crate::grid::Grid;
use crate::scenario::random_modes;
use crate::spectral;
use std::f64::consts::PI;

/// One row of diagnostics at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// ∫|u|² dx.
    pub energy: f64,
    /// ∫u·ω dx.
    pub helicity: f64,
    pub sup_vorticity: f64,
    /// ∫₀ᵗ sup|ω| ds by the trapezoid rule over recorded times.
    pub bkm_integral: f64,
    /// max |det ∇A − 1|.
    pub det_error: f64,
    pub holder_grad_delta: f64,
    pub circulations: Vec<f64>,
    /// ∫Φ_m(A) dx for each test function.
    pub distribution_check: Vec<f64>,
    /// Relative L² distance between the Cauchy vorticity and ∇×u.
    pub cauchy_residual: f64,
    /// max over ψ of sup|ω·w_ψ − (ζ·ψ)(A)| / sup|ζ·ψ|.
    pub omega_dot_w_drift: f64,
}

/// Number of test functions Φ_m.
pub const TEST_FUNCTIONS: usize = 4;

/// L-periodic test function Φ_m evaluated at label `a`.
pub fn test_function(m: usize, a: [f64; 3], period: f64) -> f64 {
    let k = 2.0 * PI / period;
    let [s1, s2, s3] = a.map(|v| (k * v).sin());
    let sq = |v: f64| (0.5 * k * v).sin().powi(2);
    match m {
        0 => sq(a[0]),
        1 => sq(a[0]) * sq(a[1]),
        2 => (1.0 + s2) * (1.0 + (k * a[2]).cos()),
        3 => (1.0 + s1) * (1.0 + s2) * (1.0 + s3),
        _ => panic!("test function index out of range"),
    }
}

/// ∫Φ_m(x + δ(x)) dx for every test function, by the grid mean.
pub fn distribution_integrals(delta: &VectorField) -> Vec<f64> {
    let grid = delta.grid();
    let vol = grid.period().powi(3);
    (0..TEST_FUNCTIONS)
        .map(|m| {
            let sum: f64 = (0..grid.len())
                .map(|idx| {
                    let x = grid.node(idx);
                    let d = delta.at(idx);
                    test_function(m, [x[0] + d[0], x[1] + d[1], x[2] + d[2]], grid.period())
                })
                .sum();
            sum / grid.len() as f64 * vol
        })
        .collect()
}

/// Size of the ψ ensemble used for the ω·w_ψ check.
pub const PSI_COUNT: usize = 8;
const PSI_SEED: u64 = 0x5eed_0000;
const PSI_K_CUT: f64 = 4.0;

/// The fixed ensemble of band-limited test fields ψ.
pub fn psi_ensemble(grid: Grid) -> Vec<VectorField> {
    (0..PSI_COUNT as u64)
        .map(|i| random_modes(grid, PSI_SEED + i, PSI_K_CUT, 1.0, false))
        .collect()
}

/// Default loops: three axis-aligned circles of radius L/4 about the box
/// centre, 64 markers each.
pub fn default_loops(grid: Grid) -> Vec<MarkerLoop> {
    let c = grid.period() / 2.0;
    (0..3)
        .map(|axis| {
            MarkerLoop::circle([c, c, c], grid.period() / 4.0, axis, 64).expect("valid circle")
        })
        .collect()
}

/// Interpolation used for marker velocities: local, no set-up transform.
pub const MARKER_INTERPOLATION: Interpolation = Interpolation::Lagrange { points: 8 };

/// Per-run diagnostics state: the marker loops, the ψ ensemble and the
/// running BKM integral.
pub struct Diagnostics {
    grid: Grid,
    psi: Vec<VectorField>,
    psi_interp: Vec<Interpolator>,
    loops: Vec<MarkerLoop>,
    bkm: f64,
    last: Option<(f64, f64)>,
}

impl Diagnostics {
    pub fn new(grid: Grid, scheme: Interpolation, loops: Vec<MarkerLoop>) -> Self {
        let psi = psi_ensemble(grid);
        let psi_interp = psi
            .iter()
            .map(|p| Interpolator::for_vector(p, scheme))
            .collect();
        Self {
            grid,
            psi,
            psi_interp,
            loops,
            bkm: 0.0,
            last: None,
        }
    }

    pub fn loops(&self) -> &[MarkerLoop] {
        &self.loops
    }

    /// RK4 step of every marker with the stage velocities of one solver step.
    pub fn advect_loops(&mut self, stages: &StageVelocities, dt: f64) {
        let interp: Vec<Interpolator> = stages
            .iter()
            .map(|u| Interpolator::for_vector(u, MARKER_INTERPOLATION))
            .collect();
        let grid = self.grid;
        for lp in &mut self.loops {
            for p in &mut lp.points {
                let vel = |s: usize, q: [f64; 3]| {
                    let v = interp[s].eval(q);
                    [v[0], v[1], v[2]]
                };
                let shift = |q: [f64; 3], k: [f64; 3], h: f64| [0, 1, 2].map(|d| q[d] + h * k[d]);
                let k1 = vel(0, *p);
                let k2 = vel(1, shift(*p, k1, 0.5 * dt));
                let k3 = vel(2, shift(*p, k2, 0.5 * dt));
                let k4 = vel(3, shift(*p, k3, dt));
                *p = [0, 1, 2].map(|d| {
                    grid.wrap(p[d] + dt / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]))
                });
            }
        }
    }

    /// Full diagnostics of the current state.
    pub fn record(&mut self, state: &ChartState) -> Result<DiagnosticsRecord> {
        let grid = self.grid;
        let vol = grid.period().powi(3);
        let u = &state.u;
        let omega = spectral::curl_real(u);
        let energy = u.dot(u).mean() * vol;
        let helicity = u.dot(&omega).mean() * vol;
        let sup_vorticity = omega.max_norm();
        if let Some((t0, w0)) = self.last {
            self.bkm += 0.5 * (state.t_now - t0) * (w0 + sup_vorticity);
        }
        self.last = Some((state.t_now, sup_vorticity));

        let mut jac = state.grad_delta.clone();
        for d in 0..3 {
            jac.entry_mut(d, d).iter_mut().for_each(|v| *v += 1.0);
        }
        let det_error = det_of(&jac)
            .data()
            .iter()
            .fold(0.0_f64, |m, v| m.max((v - 1.0).abs()));
        let zeta_a = state.eos().zeta_at_map(&state.delta);
        let cauchy = apply(&cofactor_inverse(&jac), &zeta_a);
        let cauchy_residual = cauchy.rel_l2_dist(&omega);

        let mut omega_dot_w_drift: f64 = 0.0;
        let zeta = state.zeta();
        for (psi, interp) in self.psi.iter().zip(&self.psi_interp) {
            let psi_a = interp.compose(&state.delta);
            let w = crate::eos::apply_transpose(&jac, &psi_a);
            let mut scale: f64 = 0.0;
            let mut worst: f64 = 0.0;
            for idx in 0..grid.len() {
                let zp: f64 = (0..3).map(|c| zeta.comp(c)[idx] * psi.comp(c)[idx]).sum();
                scale = scale.max(zp.abs());
                let lhs: f64 = (0..3).map(|c| omega.comp(c)[idx] * w.comp(c)[idx]).sum();
                let rhs: f64 = (0..3).map(|c| zeta_a[c][idx] * psi_a[c][idx]).sum();
                worst = worst.max((lhs - rhs).abs());
            }
            if scale > 0.0 {
                omega_dot_w_drift = omega_dot_w_drift.max(worst / scale);
            }
        }

        let circulations = self
            .loops
            .iter()
            .map(|lp| {
                let vals = crate::fields::interpolate_at(u, &lp.points, MARKER_INTERPOLATION);
                circulation_from_values(grid, lp, &vals)
            })
            .collect::<Result<Vec<f64>>>()?;

        Ok(DiagnosticsRecord {
            t: state.t_now,
            energy,
            helicity,
            sup_vorticity,
            bkm_integral: self.bkm,
            det_error,
            holder_grad_delta: state.holder_grad_delta.total,
            circulations,
            distribution_check: distribution_integrals(&state.delta),
            cauchy_residual,
            omega_dot_w_drift,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_functions_are_periodic_with_known_means() {
        let g = Grid::periodic_2pi(16).unwrap();
        let l = g.period();
        for m in 0..TEST_FUNCTIONS {
            let a = [0.3, 1.7, 4.1];
            let b = [0.3 + l, 1.7 - 2.0 * l, 4.1 + l];
            assert!((test_function(m, a, l) - test_function(m, b, l)).abs() < 1e-12);
        }
        let zero = VectorField::zeros(g);
        let vol = l.powi(3);
        let got = distribution_integrals(&zero);
        let expect = [0.5, 0.25, 1.0, 1.0].map(|v| v * vol);
        for (a, b) in got.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12 * vol);
        }
    }

    #[test]
    fn distribution_is_invariant_under_shear() {
        // a shear is volume preserving and periodic
        let g = Grid::periodic_2pi(32).unwrap();
        let zero = distribution_integrals(&VectorField::zeros(g));
        let d = VectorField::from_fn(g, |_, y, z| [0.3 * y.sin(), 0.2 * z.cos(), 0.0]);
        for (a, b) in distribution_integrals(&d).iter().zip(&zero) {
            assert!((a - b).abs() < 1e-12 * b.abs());
        }
    }

    #[test]
    fn psi_ensemble_is_deterministic() {
        let g = Grid::periodic_2pi(8).unwrap();
        assert_eq!(psi_ensemble(g), psi_ensemble(g));
        assert_eq!(psi_ensemble(g).len(), PSI_COUNT);
    }
}
