//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use av_euler::diagnostics::{
    calibrator, default_loops, inverse_grad_a, label_derivative_of_coordinate, stretching_alpha,
    vorticity_from_determinants, CALIBRATOR_STRIDE,
};
use av_euler::driver::{picard_steps, run_direct, RunOutput};
use av_euler::eos::EquationOfState;
use av_euler::evolve::{picard_solve, step_self_consistent, ChartState, RunConfig};
use av_euler::fields::{holder_norm_c0mu_vector, Interpolation};
use av_euler::scenario::{generate_ic, random_modes, Scenario};
use av_euler::{spectral, Error, Grid, VectorField};
use std::time::{Duration, Instant};

struct Verdict {
    id: usize,
    pass: bool,
    detail: String,
}

fn verdict(id: usize, checks: &[(bool, String)]) -> Verdict {
    let pass = checks.iter().all(|c| c.0);
    let detail = checks
        .iter()
        .map(|(ok, s)| {
            if *ok {
                s.clone()
            } else {
                format!("{s} [fail]")
            }
        })
        .collect::<Vec<_>>()
        .join("; ");
    Verdict { id, pass, detail }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn abc() -> Scenario {
    Scenario::Abc {
        a: 1.0,
        b: 1.0,
        c: 1.0,
    }
}

fn random_2d() -> Scenario {
    Scenario::RandomBandlimited {
        seed: 1,
        exponent: 2.0,
        k_cut: 4.0,
        amplitude: 1.0,
        two_d: true,
    }
}

/// φ rescaled to ‖∇×φ‖_{0,μ} = 1.
fn unit_curl_phi(grid: Grid, seed: u64, mu: f64) -> VectorField {
    let sc = Scenario::RandomBandlimited {
        seed,
        exponent: 1.0,
        k_cut: 3.0,
        amplitude: 1.0,
        two_d: false,
    };
    let mut phi = generate_ic(&sc, grid).unwrap();
    let norm = holder_norm_c0mu_vector(&spectral::curl_real(&phi), mu).total;
    phi.scale(1.0 / norm);
    phi
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let g = Grid::periodic_2pi(32).unwrap();
    let mut worst: f64 = 0.0;
    for s in 0..20u64 {
        let sc = Scenario::RandomBandlimited {
            seed: 100 + s,
            exponent: 1.0,
            k_cut: 5.0,
            amplitude: 1.0,
            two_d: false,
        };
        let phi = generate_ic(&sc, g).unwrap();
        let mut delta = random_modes(g, 200 + s, 5.0, 1.0, false);
        let sup = spectral::jacobian_real(&delta).max_norm();
        delta.scale(0.3 / sup);
        let eos = EquationOfState::new(phi, Interpolation::default()).unwrap();
        let det = eos.velocity_gradient_det(&delta);
        let direct = spectral::jacobian_real(&eos.velocity_w(&delta)).transpose();
        worst = worst.max(det.rel_l2_dist(&direct));
    }
    let t = secs(start.elapsed());
    verdict(
        1,
        &[
            (
                worst < 1e-6,
                format!("worst relative L2 {worst:.2e} over 20 pairs (< 1e-6)"),
            ),
            (t < 60.0, format!("{t:.1} s (< 60 s)")),
        ],
    )
}

struct Trajectory {
    name: &'static str,
    out: RunOutput,
    /// State with the largest sup|δ| among recorded rows.
    widest: ChartState,
    helicity: bool,
}

fn trajectory(
    name: &'static str,
    sc: &Scenario,
    n: usize,
    dt: f64,
    cadence: usize,
    oracle: bool,
) -> Trajectory {
    let g = Grid::periodic_2pi(n).unwrap();
    let phi = generate_ic(sc, g).unwrap();
    let run = RunConfig {
        dt_max: dt,
        t_end: 0.5,
        cfl: 1.0,
        epsilon_reset: 0.25,
        ..Default::default()
    };
    let mut widest: Option<(f64, ChartState)> = None;
    let out = run_direct(
        &phi,
        &run,
        cadence,
        default_loops(g),
        oracle,
        |row, state, _| {
            if widest.as_ref().is_none_or(|(s, _)| row.sup_delta > *s) {
                widest = Some((row.sup_delta, state.clone()));
            }
            Ok(())
        },
    )
    .unwrap_or_else(|e| panic!("{name}: {e}"));
    Trajectory {
        name,
        out,
        widest: widest.expect("rows").1,
        helicity: matches!(sc, Scenario::Abc { .. }),
    }
}

fn max_rows(t: &Trajectory, f: impl Fn(&av_euler::driver::Row) -> f64) -> f64 {
    t.out.rows.iter().map(f).fold(0.0, f64::max)
}

fn criterion_2() -> (Verdict, Vec<Trajectory>) {
    let start = Instant::now();
    let abc_run = trajectory("abc", &abc(), 32, 1e-3, 25, false);
    let tg = trajectory(
        "taylor_green",
        &Scenario::TaylorGreen2d { amplitude: 1.0 },
        32,
        1e-3,
        25,
        false,
    );
    let t = secs(start.elapsed());
    let abc_drift = max_rows(&abc_run, |r| r.velocity_drift);
    let tg_drift = max_rows(&tg, |r| r.velocity_drift);
    let sup_delta = abc_run.out.max_sup_delta;
    let v = verdict(
        2,
        &[
            (
                abc_drift < 1e-3,
                format!("ABC drift {abc_drift:.2e} (< 1e-3)"),
            ),
            (
                sup_delta > 0.05,
                format!(
                    "max sup|delta| in a chart {sup_delta:.3} over {} charts (> 0.05)",
                    abc_run.out.charts
                ),
            ),
            (
                tg_drift < 1e-4,
                format!("Taylor-Green drift {tg_drift:.2e} (< 1e-4)"),
            ),
            (t < 300.0, format!("{t:.0} s (< 300 s)")),
        ],
    );
    (v, vec![abc_run, tg])
}

fn criterion_3() -> (Verdict, Vec<Trajectory>) {
    let start = Instant::now();
    let coarse = trajectory("random_2d dt=0.02", &random_2d(), 64, 0.02, 5, true);
    let fine = trajectory("random_2d dt=0.01", &random_2d(), 64, 0.01, 10, true);
    let t = secs(start.elapsed());
    let final_compare = |tr: &Trajectory| {
        tr.out
            .rows
            .last()
            .and_then(|r| r.compare)
            .expect("compare column")
    };
    let (c0, c1) = (final_compare(&coarse), final_compare(&fine));
    let v = verdict(
        3,
        &[
            (
                c0 < 1e-3 && c1 < 1e-3,
                format!("oracle distance {c0:.2e} at dt=0.02, {c1:.2e} at dt=0.01 (< 1e-3)"),
            ),
            (c1 < c0, "decreasing under dt halving".to_string()),
            (t < 600.0, format!("{t:.0} s (< 600 s)")),
        ],
    );
    (v, vec![coarse, fine])
}

fn criterion_4(runs: &[&Trajectory]) -> Verdict {
    let mut checks = Vec::new();
    for tr in runs {
        let rows = &tr.out.rows;
        let r0 = &rows[0].record;
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        let energy = rows
            .iter()
            .map(|r| rel(r.record.energy, r0.energy))
            .fold(0.0, f64::max);
        let det = rows.iter().map(|r| r.record.det_error).fold(0.0, f64::max);
        let circ = rows
            .iter()
            .flat_map(|r| {
                r.record
                    .circulations
                    .iter()
                    .zip(&r0.circulations)
                    .map(|(a, b)| (a - b).abs())
            })
            .fold(0.0, f64::max);
        let dist = rows
            .iter()
            .flat_map(|r| {
                r.record
                    .distribution_check
                    .iter()
                    .zip(&r0.distribution_check)
                    .map(|(a, b)| rel(*a, *b))
            })
            .fold(0.0, f64::max);
        let wdrift = rows
            .iter()
            .map(|r| r.record.omega_dot_w_drift)
            .fold(0.0, f64::max);
        let mut line = vec![
            energy < 1e-5,
            det < 1e-4,
            circ < 1e-3,
            dist < 1e-5,
            wdrift < 1e-3,
        ];
        let mut text = format!(
            "{}: energy {energy:.1e}, det {det:.1e}, circulation {circ:.1e}, distribution {dist:.1e}, w-drift {wdrift:.1e}",
            tr.name
        );
        if tr.helicity {
            let h = rows
                .iter()
                .map(|r| rel(r.record.helicity, r0.helicity))
                .fold(0.0, f64::max);
            line.push(h < 1e-5);
            text.push_str(&format!(", helicity {h:.1e}"));
        }
        checks.push((line.iter().all(|&b| b), text));
    }
    verdict(4, &checks)
}

fn criterion_5(runs: &[&Trajectory]) -> Verdict {
    let checks: Vec<(bool, String)> = runs
        .iter()
        .map(|tr| {
            let worst = max_rows(tr, |r| r.record.cauchy_residual);
            (
                worst < 1e-3,
                format!(
                    "{} max Cauchy residual {worst:.2e} over {} charts (< 1e-3)",
                    tr.name, tr.out.charts
                ),
            )
        })
        .collect();
    verdict(5, &checks)
}

/// Picard fixed point and direct self-consistent stepping over `[0, t_end]`.
fn picard_vs_direct(phi: &VectorField, run: &RunConfig) -> (Vec<f64>, f64) {
    let steps = picard_steps(phi, run);
    let p = picard_solve(phi, run, steps).unwrap();
    let dt = run.t_end / steps as f64;
    let mut s = ChartState::new(phi.clone(), 0.0, 0, run.interpolation, run.mu).unwrap();
    let step_cfg = RunConfig {
        dt_max: dt,
        cfl: 1.0,
        ..run.clone()
    };
    for _ in 0..steps {
        s = step_self_consistent(&s, dt, &step_cfg).unwrap();
    }
    (
        p.holder_residuals.clone(),
        p.final_delta().max_dist(&s.delta),
    )
}

fn criterion_6() -> Verdict {
    let mu = 0.5;
    let g = Grid::periodic_2pi(32).unwrap();
    let phi = unit_curl_phi(g, 3, mu);
    let base = RunConfig {
        t_end: 0.05,
        mu,
        picard_tol: 1e-13,
        picard_max_iter: 30,
        ..Default::default()
    };
    let mut gaps = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    for dt in [1e-2, 5e-3] {
        let (res, gap) = picard_vs_direct(
            &phi,
            &RunConfig {
                dt_max: dt,
                ..base.clone()
            },
        );
        // ratios from the third residual on, while above round-off
        for w in res.windows(2).skip(1) {
            if w[0] > 1e-12 {
                worst_ratio = worst_ratio.max(w[1] / w[0]);
            }
        }
        gaps.push(gap);
    }

    let g16 = Grid::periodic_2pi(16).unwrap();
    let seeds = 0..4u64;
    let mut fired = 0;
    let mut last_residuals = Vec::new();
    for seed in seeds.clone() {
        let phi = unit_curl_phi(g16, seed, mu);
        let run = RunConfig {
            t_end: 2.0,
            dt_max: 0.2,
            mu,
            picard_tol: 1e-13,
            picard_max_iter: 10,
            ..Default::default()
        };
        match picard_solve(&phi, &run, picard_steps(&phi, &run)) {
            Err(Error::NoContraction { .. }) => fired += 1,
            Ok(r) => last_residuals.push(r.residuals.last().copied().unwrap_or(f64::NAN)),
            Err(e) => panic!("picard at the regime boundary: {e}"),
        }
    }
    let smallest = last_residuals.iter().copied().fold(f64::INFINITY, f64::min);
    verdict(
        6,
        &[
            (worst_ratio < 0.9, format!("worst contraction ratio after iteration 2: {worst_ratio:.2e} (< 0.9)")),
            (
                gaps[1] < 1e-4 && gaps[1] <= gaps[0],
                format!("fixed point vs direct stepping {:.2e} at dt=1e-2, {:.2e} at dt=5e-3 (< 1e-4)", gaps[0], gaps[1]),
            ),
            (
                fired > 0,
                format!(
                    "NoContraction at T|curl phi|=2 on {fired}/{} seeds within 10 iterations (smallest final residual otherwise {smallest:.1e})",
                    seeds.count()
                ),
            ),
        ],
    )
}

fn criterion_7(abc_state: &ChartState, two_d: &[&ChartState]) -> Verdict {
    let delta = &abc_state.delta;
    let cal = calibrator(delta, &[[0, 0, 0]], CALIBRATOR_STRIDE);
    let adj = inverse_grad_a(delta);
    let mut label: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let l = label_derivative_of_coordinate(delta, i, j);
            let dev = l
                .data()
                .iter()
                .zip(adj.entry(i, j))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            label = label.max(dev);
        }
    }
    let recon = vorticity_from_determinants(delta, abc_state.eos());
    let omega_err = recon.rel_l2_dist(&spectral::curl_real(&abc_state.u));
    let alpha = two_d
        .iter()
        .map(|s| stretching_alpha(&s.u, &spectral::curl_real(&s.u)).max_abs())
        .fold(0.0, f64::max);
    verdict(
        7,
        &[
            (
                cal.summary < 1e-13,
                format!(
                    "calibrator at z=0: max |C - I| {:.1e} (machine precision)",
                    cal.summary
                ),
            ),
            (
                label < 1e-6,
                format!("L_j[x_i] vs inverse_grad_A {label:.1e} (< 1e-6)"),
            ),
            (
                omega_err < 1e-6,
                format!("determinant vorticity vs curl u {omega_err:.1e} (< 1e-6)"),
            ),
            (
                alpha < 1e-8,
                format!("alpha on 2D flows {alpha:.1e} (< 1e-8)"),
            ),
        ],
    )
}

/// sup|u(t_end) − φ| on the ABC flow with the h-convergent Lagrange scheme.
fn abc_steadiness(n: usize, dt: f64, t_end: f64) -> f64 {
    let g = Grid::periodic_2pi(n).unwrap();
    let phi = generate_ic(&abc(), g).unwrap();
    let run = RunConfig {
        dt_max: dt,
        t_end,
        cfl: 1.0,
        interpolation: Interpolation::Lagrange { points: 8 },
        ..Default::default()
    };
    let out = run_direct(&phi, &run, usize::MAX, Vec::new(), false, |_, _, _| Ok(())).unwrap();
    out.rows.last().expect("final row").velocity_drift
}

fn criterion_8() -> Verdict {
    let (e1, e2) = (
        abc_steadiness(64, 0.03, 0.48),
        abc_steadiness(64, 0.015, 0.48),
    );
    let ratio = e1 / e2;
    let (s32, s64) = (
        abc_steadiness(32, 0.005, 0.12),
        abc_steadiness(64, 0.005, 0.12),
    );
    let drop = s32 / s64;
    verdict(
        8,
        &[
            (
                (13.0..=19.0).contains(&ratio),
                format!("RK4 ratio {ratio:.1} ({e1:.2e} -> {e2:.2e}, in 13..19)"),
            ),
            (
                drop > 1e2,
                format!("N=32 -> 64 drop {drop:.0} ({s32:.2e} -> {s64:.2e}, > 1e2)"),
            ),
        ],
    )
}

fn main() {
    let start = Instant::now();
    let mut verdicts = Vec::new();
    let mut report = |v: Verdict| {
        println!(
            "criterion {}: {}  {}",
            v.id,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        verdicts.push(v.pass);
    };
    report(criterion_1());
    let (v2, short) = criterion_2();
    report(v2);
    let (v3, long) = criterion_3();
    report(v3);
    let all: Vec<&Trajectory> = short.iter().chain(&long).collect();
    report(criterion_4(&all));
    report(criterion_5(&short.iter().collect::<Vec<_>>()));
    report(criterion_6());
    let two_d = [&short[1].out.final_state, &long[1].out.final_state];
    report(criterion_7(&short[0].widest, &two_d));
    report(criterion_8());
    let failed = verdicts.iter().filter(|p| !**p).count();
    println!(
        "acceptance: {} of {} criteria pass ({:.0} s)",
        verdicts.len() - failed,
        verdicts.len(),
        secs(start.elapsed())
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
