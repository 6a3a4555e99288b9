//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers. Run with `cargo test --test acceptance -- --nocapture`
//! to see them all.

use std::sync::OnceLock;
use std::time::Instant;

use epinet::dynamics::{self, EpidemicParams};
use epinet::equilibrium::{self, scalar_cap_root, Regime};
use epinet::graph::{self, Network};
use epinet::integrate::{
    integrate, simulate_until_converged, ConvergenceStatus, Method, RunOptions,
};
use epinet::spectral::{self, MetzlerMatrix};
use epinet::verify;
use epinetctl::commands::{cmd_reproduce, SimulationOutcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

const PHI_ROOT: f64 = 0.19098300562505258; // (3 - sqrt(5)) / 4

fn unit_cross_pair() -> Network {
    Network::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
}

struct Repro {
    outcome: SimulationOutcome,
    _dir: tempfile::TempDir,
}

static REPRO_CELLS: [OnceLock<Repro>; 5] = [
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
];

/// Built-in experiment run once per process at the shared seed 42.
fn reproduce(id: u8) -> &'static Repro {
    REPRO_CELLS[id as usize - 1].get_or_init(|| {
        let dir = tempfile::tempdir().expect("tempdir");
        let outcome = cmd_reproduce(id, 42, dir.path(), false)
            .unwrap_or_else(|e| panic!("reproduce({id}) failed: {e}"));
        Repro {
            outcome,
            _dir: dir,
        }
    })
}

/// Node caps of a reproduce run, reconstructed from its band structure.
fn band_caps_per_node(outcome: &SimulationOutcome) -> Vec<f64> {
    let cmp = outcome.summary.comparison.as_ref().expect("reproduce block");
    let mut caps = vec![0.0; 100];
    for (range, cap) in cmp.band_ranges.iter().zip(&cmp.band_caps) {
        for i in range[0]..=range[1] {
            caps[i - 1] = *cap;
        }
    }
    caps
}

#[test]
fn acceptance_1_closed_form_endemic_point() {
    let started = Instant::now();
    let params = EpidemicParams::uniform(2, 1.0, 0.5, 2.0).unwrap();
    let net = unit_cross_pair();

    let solved = equilibrium::solve_endemic(&params, &net, 1e-13, 100_000).unwrap();
    for v in &solved.x {
        assert!(
            (v - PHI_ROOT).abs() <= 1e-8,
            "solver endemic point {v} vs closed form {PHI_ROOT}"
        );
    }

    let traj = integrate(
        |x, out| dynamics::closed_loop_into(&params, &net, x, out),
        &[0.1, 0.1],
        &RunOptions {
            method: Method::Rk4 { dt: 0.01 },
            t_end: 200.0,
            record_every: 0.1,
            ..Default::default()
        },
    )
    .unwrap();
    let ode_err = traj
        .terminal()
        .iter()
        .map(|v| (v - PHI_ROOT).abs())
        .fold(0.0f64, f64::max);
    assert!(ode_err <= 1e-4, "ODE terminal error {ode_err}");

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "acceptance 1 (closed-form endemic point): PASS — solver error {:.2e}, ODE error {:.2e}, {:?}",
        solved
            .x
            .iter()
            .map(|v| (v - PHI_ROOT).abs())
            .fold(0.0f64, f64::max),
        ode_err,
        elapsed
    );
}

#[test]
fn acceptance_2_cap_invariance_at_scale() {
    let started = Instant::now();
    let sizes = [2usize, 10, 50, 100];
    let mut worst_cap = 0.0f64;
    let mut worst_neg = 0.0f64;
    for trial in 0..100u64 {
        let n = sizes[trial as usize % sizes.len()];
        let mut rng = ChaCha12Rng::seed_from_u64(1000 + trial);
        let net = graph::random_geometric(n, 10.0, 4.5, 0.3, 0.25, trial).unwrap();
        let beta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let gamma: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let cap_c: Vec<f64> = (0..n).map(|_| rng.gen_range(1.1..4.0)).collect();
        let params = EpidemicParams::new(beta, gamma, cap_c).unwrap();
        let x0: Vec<f64> = params
            .cap_c()
            .iter()
            .map(|c| rng.gen_range(0.0..1.0 / c))
            .collect();
        let traj = integrate(
            |x, out| dynamics::closed_loop_into(&params, &net, x, out),
            &x0,
            &RunOptions {
                t_end: 30.0,
                ..Default::default()
            },
        )
        .unwrap();
        let report =
            verify::check_cap_invariance(&traj, params.cap_c(), verify::DEFAULT_CAP_TOL).unwrap();
        assert!(
            report.pass,
            "trial {trial} (n = {n}): cap violation {:.3e}, negativity {:.3e}",
            report.max_cap_violation, report.max_negativity
        );
        worst_cap = worst_cap.max(report.max_cap_violation);
        worst_neg = worst_neg.max(report.max_negativity);
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!(
        "acceptance 2 (cap invariance, 100 scenarios): PASS — worst cap overshoot {worst_cap:.2e} \
         (tol 1e-7), worst negativity {worst_neg:.2e} (tol 1e-9), {elapsed:?}"
    );
}

#[test]
fn acceptance_3_dfe_regime_extinction() {
    let mut checked = 0usize;
    let mut worst_terminal = 0.0f64;

    let mut run_case = |params: &EpidemicParams, net: &Network, label: &str| {
        let m = spectral::build_linearized(params, net).unwrap();
        let s = spectral::spectral_abscissa_default(&m).unwrap().abscissa;
        assert!(s <= -0.1, "{label}: expected s <= -0.1, got {s}");
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let caps = params.cap_levels();
        let starts: Vec<Vec<f64>> = vec![
            caps.clone(),
            caps.iter().map(|v| 0.5 * v).collect(),
            caps.iter().map(|v| rng.gen_range(0.0..*v)).collect(),
        ];
        for x0 in starts {
            let traj = integrate(
                |x, out| dynamics::closed_loop_into(params, net, x, out),
                &x0,
                &RunOptions {
                    t_end: 500.0,
                    record_every: 1.0,
                    ..Default::default()
                },
            )
            .unwrap();
            let norm = traj.terminal().iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            assert!(norm <= 1e-6, "{label}: ||x(500)|| = {norm:.3e}");
            worst_terminal = worst_terminal.max(norm);
            checked += 1;
        }
    };

    // the n = 100 geometric analog with beta 0.3 / gamma 0.5
    let exp1 = epinetctl::scenario::builtin::experiment(1, 42).resolve().unwrap();
    run_case(&exp1.params, &exp1.net, "scale analog");

    // small random scenarios pushed into s <= -0.1 by strong healing
    let mut found = 0;
    for seed in 0..20u64 {
        if found >= 6 {
            break;
        }
        let n = [2usize, 10, 50][seed as usize % 3];
        let net = graph::random_geometric(n, 10.0, 4.5, 0.3, 0.2, 300 + seed).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(400 + seed);
        let params = EpidemicParams::uniform(
            n,
            rng.gen_range(0.1..0.4),
            rng.gen_range(0.6..1.0),
            rng.gen_range(1.5..4.0),
        )
        .unwrap();
        let m = spectral::build_linearized(&params, &net).unwrap();
        if spectral::spectral_abscissa_default(&m).unwrap().abscissa > -0.1 {
            continue;
        }
        run_case(&params, &net, &format!("random seed {seed}"));
        found += 1;
    }
    assert!(found >= 6, "only {found} random DFE scenarios drawn");
    println!(
        "acceptance 3 (DFE extinction by t = 500): PASS — {checked} runs, worst ||x(500)|| = {worst_terminal:.2e}"
    );
}

#[test]
fn acceptance_4_endemic_regime_consistency() {
    let sizes = [2usize, 5, 10, 20, 50];
    let mut accepted = 0usize;
    let mut seed = 0u64;
    let mut worst_ode_gap = 0.0f64;
    let mut worst_restart_gap = 0.0f64;

    while accepted < 20 {
        seed += 1;
        assert!(seed < 200, "could not draw 20 endemic scenarios");
        let n = sizes[seed as usize % sizes.len()];
        let net = graph::random_geometric(n, 10.0, 4.5, 0.3, 0.25, 500 + seed).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(600 + seed);
        let params = EpidemicParams::uniform(
            n,
            rng.gen_range(0.5..1.0),
            rng.gen_range(0.0..0.2),
            rng.gen_range(2.0..4.0),
        )
        .unwrap();
        let m = spectral::build_linearized(&params, &net).unwrap();
        let s = spectral::spectral_abscissa_default(&m).unwrap().abscissa;
        if s <= 0.05 {
            continue;
        }
        accepted += 1;

        let tol = 1e-13;
        let solved = equilibrium::solve_endemic(&params, &net, tol, 100_000).unwrap();

        // terminal ODE state matches the solver
        let x0: Vec<f64> = params
            .cap_c()
            .iter()
            .map(|c| rng.gen_range(1e-3..1.0 / c))
            .collect();
        let (traj, status) = simulate_until_converged(
            |x, out| dynamics::closed_loop_into(&params, &net, x, out),
            &x0,
            &RunOptions {
                t_end: 2000.0,
                converge_tol: Some(1e-9),
                converge_window: Some(5.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(status, ConvergenceStatus::Converged, "seed {seed}");
        let ode_gap = traj
            .terminal()
            .iter()
            .zip(&solved.x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(ode_gap <= 1e-4, "seed {seed}: ODE vs solver gap {ode_gap:.3e}");
        worst_ode_gap = worst_ode_gap.max(ode_gap);

        // uniqueness: Gauss–Seidel from 50 random interior starts
        for restart in 0..50 {
            let mut x: Vec<f64> = params
                .cap_c()
                .iter()
                .map(|c| rng.gen_range(1e-3..1.0 / c))
                .collect();
            let mut field = vec![0.0; n];
            let mut converged = false;
            for _ in 0..100_000 {
                for i in 0..n {
                    let s_i: f64 = net.row(i).iter().zip(&x).map(|(a, b)| a * b).sum();
                    x[i] = scalar_cap_root(
                        params.beta()[i],
                        params.gamma()[i],
                        params.cap_c()[i],
                        s_i,
                    );
                }
                dynamics::closed_loop_into(&params, &net, &x, &mut field);
                if field.iter().fold(0.0f64, |a, &b| a.max(b.abs())) <= tol {
                    converged = true;
                    break;
                }
            }
            assert!(converged, "seed {seed} restart {restart} did not converge");
            let gap = x
                .iter()
                .zip(&solved.x)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(
                gap <= 1e-11,
                "seed {seed} restart {restart}: equilibria differ by {gap:.3e}"
            );
            worst_restart_gap = worst_restart_gap.max(gap);
        }
    }
    println!(
        "acceptance 4 (endemic consistency, {accepted} scenarios): PASS — worst ODE gap \
         {worst_ode_gap:.2e} (tol 1e-4), worst restart gap {worst_restart_gap:.2e} (tol 1e-11)"
    );
}

/// Largest real eigenvalue of a 2×2 matrix (quadratic formula).
fn analytic_2x2(m: &MetzlerMatrix) -> f64 {
    let (a, b, c, d) = (m.entry(0, 0), m.entry(0, 1), m.entry(1, 0), m.entry(1, 1));
    let disc = (a - d) * (a - d) + 4.0 * b * c;
    (a + d + disc.sqrt()) / 2.0
}

/// Largest real root of the characteristic cubic (trigonometric/Cardano).
fn analytic_3x3(m: &MetzlerMatrix) -> f64 {
    let a = [
        [m.entry(0, 0), m.entry(0, 1), m.entry(0, 2)],
        [m.entry(1, 0), m.entry(1, 1), m.entry(1, 2)],
        [m.entry(2, 0), m.entry(2, 1), m.entry(2, 2)],
    ];
    let tr = a[0][0] + a[1][1] + a[2][2];
    let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2]
        - a[0][2] * a[2][0]
        + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    let p = minors - tr * tr / 3.0;
    let q = -2.0 * tr * tr * tr / 27.0 + tr * minors / 3.0 - det;
    let shift = tr / 3.0;
    if p.abs() < 1e-14 {
        return shift + (-q).cbrt();
    }
    let disc = q * q / 4.0 + p * p * p / 27.0;
    if disc <= 0.0 {
        let r = (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) / r).clamp(-1.0, 1.0);
        return shift + 2.0 * r * ((arg.acos()) / 3.0).cos();
    }
    let d = disc.sqrt();
    shift + (-q / 2.0 + d).cbrt() + (-q / 2.0 - d).cbrt()
}

fn random_dense_metzler(seed: u64, n: usize) -> MetzlerMatrix {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = if i == j {
                -rng.gen_range(0.0..1.0)
            } else {
                rng.gen_range(0.2..1.0) / n as f64
            };
        }
    }
    MetzlerMatrix::new(n, entries).unwrap()
}

/// Semigroup growth oracle: integrate dy/dt = M y with per-unit-time
/// renormalization and measure the tail growth rate of log||y||, i.e.
/// (1/t) log||exp(Mt) v|| evaluated past a burn-in that removes the
/// alignment transient of the start vector.
fn semigroup_growth_rate(m: &MetzlerMatrix, burn_in: usize, chunks: usize) -> f64 {
    let n = m.n();
    let field = |x: &[f64], out: &mut [f64]| {
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += m.entry(i, j) * x[j];
            }
            out[i] = acc;
        }
    };
    let opts = RunOptions {
        method: Method::Rk45 {
            abs_tol: 1e-11,
            rel_tol: 1e-11,
        },
        t_end: 1.0,
        record_every: 1.0,
        ..Default::default()
    };
    let mut v = vec![1.0; n];
    let mut log_norm = 0.0;
    let mut log_at_burn_in = 0.0;
    for k in 0..chunks {
        let traj = integrate(field, &v, &opts).unwrap();
        v = traj.terminal().to_vec();
        let norm = v.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        log_norm += norm.ln();
        for vi in &mut v {
            *vi /= norm;
        }
        if k + 1 == burn_in {
            log_at_burn_in = log_norm;
        }
    }
    (log_norm - log_at_burn_in) / (chunks - burn_in) as f64
}

#[test]
fn acceptance_5_spectral_correctness() {
    // (a) analytic eigenvalues for every n <= 3 case
    let one_by_one = vec![vec![vec![-1.5]], vec![vec![0.7]]];
    let two_by_two = vec![
        vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        vec![vec![-0.41, 0.0009], vec![0.0009, -0.41]],
        vec![vec![-0.5, 1.0], vec![1.0, -0.5]],
        vec![vec![0.2, 0.7], vec![0.1, -1.0]],
        vec![vec![-2.0, 0.01], vec![3.0, -0.3]],
    ];
    let three_by_three = vec![
        vec![
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ],
        vec![
            vec![-0.2, 0.5, 0.1],
            vec![0.3, -0.7, 0.2],
            vec![0.6, 0.1, -0.4],
        ],
        vec![
            vec![-1.0, 0.2, 2.0],
            vec![0.4, -0.1, 0.3],
            vec![0.05, 1.5, -2.0],
        ],
    ];
    let mut worst_analytic = 0.0f64;
    let mut check = |rows: Vec<Vec<f64>>, want: f64| {
        let m = MetzlerMatrix::from_rows(rows).unwrap();
        let got = spectral::spectral_abscissa(&m, 1e-12, 1_000_000)
            .unwrap()
            .abscissa;
        assert!(
            (got - want).abs() <= 1e-10,
            "analytic {want} vs power iteration {got}"
        );
        worst_analytic = worst_analytic.max((got - want).abs());
    };
    for rows in one_by_one {
        let want = rows[0][0];
        check(rows, want);
    }
    for rows in two_by_two {
        let want = analytic_2x2(&MetzlerMatrix::from_rows(rows.clone()).unwrap());
        check(rows, want);
    }
    for rows in three_by_three {
        let want = analytic_3x3(&MetzlerMatrix::from_rows(rows.clone()).unwrap());
        check(rows, want);
    }

    // (b) semigroup growth on 20 random 50-node irreducible Metzler matrices
    let mut worst_semigroup = 0.0f64;
    for seed in 0..20u64 {
        let m = random_dense_metzler(900 + seed, 50);
        let s = spectral::spectral_abscissa(&m, 1e-12, 1_000_000)
            .unwrap()
            .abscissa;
        let grown = semigroup_growth_rate(&m, 100, 200);
        assert!(
            (s - grown).abs() <= 1e-3,
            "seed {seed}: abscissa {s} vs semigroup {grown}"
        );
        worst_semigroup = worst_semigroup.max((s - grown).abs());
    }

    // (c) shift invariance
    let mut worst_shift = 0.0f64;
    for seed in 0..5u64 {
        let m = random_dense_metzler(950 + seed, 12);
        let s = spectral::spectral_abscissa(&m, 1e-12, 1_000_000)
            .unwrap()
            .abscissa;
        for alpha in [-1.0, 0.5, 3.0] {
            let moved = spectral::spectral_abscissa(&m.shifted(alpha), 1e-12, 1_000_000)
                .unwrap()
                .abscissa;
            assert!(
                (moved - (s + alpha)).abs() <= 1e-10,
                "alpha {alpha}: {moved} vs {}",
                s + alpha
            );
            worst_shift = worst_shift.max((moved - (s + alpha)).abs());
        }
    }
    println!(
        "acceptance 5 (spectral correctness): PASS — analytic gap {worst_analytic:.2e} (tol 1e-10), \
         semigroup gap {worst_semigroup:.2e} (tol 1e-3), shift gap {worst_shift:.2e} (tol 1e-10)"
    );
}

#[test]
fn acceptance_6_internal_consistency_relation() {
    // one fixed graph, the two uniform parameter pairs of the scale
    // experiments; both normalizations recover s(A)
    let resolved = epinetctl::scenario::builtin::experiment(1, 42).resolve().unwrap();
    let net = resolved.net;
    let n = net.n();
    let s_of = |beta: f64, gamma: f64| -> f64 {
        let params = EpidemicParams::uniform(n, beta, gamma, 2.0).unwrap();
        let m = spectral::build_linearized(&params, &net).unwrap();
        spectral::spectral_abscissa(&m, 1e-12, 1_000_000)
            .unwrap()
            .abscissa
    };
    let s1 = s_of(0.3, 0.5);
    let s2 = s_of(0.8, 0.3);
    let lhs = (s1 + 0.5) / 0.3;
    let rhs = (s2 + 0.3) / 0.8;
    assert!(
        (lhs - rhs).abs() <= 1e-9,
        "(s1 + 0.5)/0.3 = {lhs} vs (s2 + 0.3)/0.8 = {rhs}"
    );
    println!(
        "acceptance 6 (shared-graph relation): PASS — s1 = {s1:.6}, s2 = {s2:.6}, \
         |(s1+0.5)/0.3 - (s2+0.3)/0.8| = {:.2e} (tol 1e-9)",
        (lhs - rhs).abs()
    );
}

#[test]
fn acceptance_7_suppression_property() {
    // desk-scale closed forms first
    let params = EpidemicParams::uniform(2, 1.0, 0.5, 2.0).unwrap();
    let net = unit_cross_pair();
    let cmp = verify::compare_open_closed(
        &params,
        &net,
        &[0.1, 0.1],
        &RunOptions {
            t_end: 200.0,
            ..Default::default()
        },
    )
    .unwrap();
    for i in 0..2 {
        assert!((cmp.summary.terminal_open[i] - 0.5).abs() <= 1e-4);
        assert!((cmp.summary.terminal_closed[i] - PHI_ROOT).abs() <= 1e-4);
    }
    assert!(cmp.summary.suppression_ok);

    // every endemic-regime reproduce run
    let mut endemic_runs = 0;
    for id in 1..=5u8 {
        let outcome = &reproduce(id).outcome;
        let summary = &outcome.summary;
        let suppression = summary.verification.suppression.as_ref().unwrap();
        assert!(
            suppression.max_peak_excess <= verify::DEFAULT_PEAK_TOL,
            "experiment {id}: controlled peak exceeds uncontrolled by {:.3e}",
            suppression.max_peak_excess
        );
        if summary.regime != Regime::Endemic {
            continue;
        }
        endemic_runs += 1;
        let caps = band_caps_per_node(outcome);
        let controlled = summary.terminal_controlled.as_ref().unwrap();
        let uncontrolled = summary.terminal_uncontrolled.as_ref().unwrap();
        for (i, (x, cap)) in controlled.iter().zip(&caps).enumerate() {
            assert!(
                x < cap,
                "experiment {id}: controlled terminal of node {} is {x}, not below cap {cap}",
                i + 1
            );
        }
        let exceeded = uncontrolled
            .iter()
            .zip(&caps)
            .filter(|(x, cap)| x > cap)
            .count();
        assert!(
            exceeded > 0,
            "experiment {id}: uncontrolled terminal exceeds no cap"
        );
    }
    assert!(
        endemic_runs >= 3,
        "expected experiments 2, 4, 5 to be endemic; saw {endemic_runs}"
    );
    println!(
        "acceptance 7 (suppression): PASS — desk pair 0.5 vs {PHI_ROOT:.6}, \
         {endemic_runs} endemic scale runs suppressed below caps"
    );
}

#[test]
fn acceptance_8_lyapunov_monotonicity() {
    // asserted for the c >= 2 endemic experiments
    for id in [2u8, 4, 5] {
        let outcome = &reproduce(id).outcome;
        let summary = &outcome.summary;
        assert_eq!(summary.regime, Regime::Endemic, "experiment {id}");
        let lyap = summary.verification.lyapunov.as_ref().unwrap();
        assert!(lyap.asserted, "experiment {id} has c >= 2 everywhere");
        assert!(
            lyap.uptick_after_transient <= 1e-6,
            "experiment {id}: max uptick {:.3e} after the first sample",
            lyap.uptick_after_transient
        );
    }

    // reported (not asserted) for the loose-band experiment 3
    let outcome = &reproduce(3).outcome;
    let summary = &outcome.summary;
    let endemic = summary.endemic_point.as_ref().unwrap();
    let terminal = summary.terminal_controlled.as_ref().unwrap();
    let distance = terminal
        .iter()
        .zip(endemic)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let verdict = if distance <= 1e-3 { "reached" } else { "missed" };
    println!(
        "acceptance 8 (Lyapunov decrease): PASS — experiments 2/4/5 monotone within 1e-6; \
         experiment 3 (1 < c < 2, no proof claimed) {verdict} the endemic point by t = 500 \
         (distance {distance:.2e}, reported only)"
    );
}

#[test]
fn acceptance_9_radius_and_clustering_monotonicity() {
    // shared positions, doubled radius
    let exp2 = &reproduce(2).outcome;
    let resolved2 = epinetctl::scenario::builtin::experiment(2, 42).resolve().unwrap();
    let positions = resolved2.net.positions().unwrap().to_vec();
    let identity = EpidemicParams::uniform(positions.len(), 1.0, 0.0, 2.0).unwrap();
    let s_at = |radius: f64| -> f64 {
        let net = graph::from_positions(
            positions.clone(),
            radius,
            epinetctl::scenario::builtin::SELF_WEIGHT,
            epinetctl::scenario::builtin::CROSS_WEIGHT,
        )
        .unwrap();
        let m = spectral::build_linearized(&identity, &net).unwrap();
        spectral::spectral_abscissa_default(&m).unwrap().abscissa
    };
    let s25 = s_at(25.0);
    let s50 = s_at(50.0);
    assert!(s50 > s25, "s(r=50) = {s50} should exceed s(r=25) = {s25}");

    // clustered layout persists at higher levels than the uniform one
    let exp5 = &reproduce(5).outcome;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let uniform_mean = mean(exp2.summary.terminal_controlled.as_ref().unwrap());
    let clustered_mean = mean(exp5.summary.terminal_controlled.as_ref().unwrap());
    assert!(
        clustered_mean > uniform_mean,
        "clustered terminal mean {clustered_mean} should exceed uniform {uniform_mean}"
    );
    println!(
        "acceptance 9 (radius/clustering): PASS — s(A) {s25:.4} -> {s50:.4} when r doubles; \
         controlled terminal mean {uniform_mean:.4} (uniform) -> {clustered_mean:.4} (clustered)"
    );
}
