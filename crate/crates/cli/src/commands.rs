//! Command implementations shared by the binary and the test suites.

use std::path::{Path, PathBuf};

use epinet::dynamics::{self, EpidemicParams};
use epinet::equilibrium::{self, Regime};
use epinet::graph::{self, Network, RNG_ALGORITHM};
use epinet::integrate::{integrate, RunOptions, Trajectory};
use epinet::spectral;
use epinet::verify::{self, InvarianceReport, LyapunovReport, SuppressionSummary};
use rayon::prelude::*;
use serde::Serialize;

use crate::output;
use crate::scenario::{builtin, CapsSpec, GeneratorSpec, GraphSpec, Resolved, Scenario};
use crate::CliError;

/// Solver residual tolerance used by the commands.
pub const SOLVER_TOL: f64 = 1e-12;

/// Cap the rayon worker count from `EPINETCTL_THREADS`; call once at
/// startup.
pub fn install_thread_cap() {
    if let Ok(value) = std::env::var(crate::THREADS_ENV) {
        if let Ok(k) = value.parse::<usize>() {
            if k >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimulateMode {
    Controlled,
    Uncontrolled,
    Both,
}

impl SimulateMode {
    fn wants_controlled(self) -> bool {
        self != SimulateMode::Uncontrolled
    }

    fn wants_uncontrolled(self) -> bool {
        self != SimulateMode::Controlled
    }

    fn label(self) -> &'static str {
        match self {
            SimulateMode::Controlled => "controlled",
            SimulateMode::Uncontrolled => "uncontrolled",
            SimulateMode::Both => "both",
        }
    }
}

/// Regime analysis of one scenario.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeSummary {
    pub scenario_hash: String,
    pub seed: u64,
    pub n: usize,
    pub rng: &'static str,
    pub spectral_abscissa: f64,
    pub regime: Regime,
    pub marginal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endemic_point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endemic_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver_iterations: Option<usize>,
}

pub fn cmd_analyze(sc: &Scenario, seed: Option<u64>) -> Result<AnalyzeSummary, CliError> {
    let resolved = sc.resolve_with_seed(seed.unwrap_or(sc.seed))?;
    let (abscissa, report) = analyze_resolved(&resolved)?;
    Ok(AnalyzeSummary {
        scenario_hash: sc.hash(),
        seed: resolved.seed,
        n: resolved.net.n(),
        rng: RNG_ALGORITHM,
        spectral_abscissa: abscissa,
        regime: report.regime,
        marginal: report.marginal,
        endemic_residual: report.endemic_point.as_ref().map(|_| report.residual),
        solver_iterations: report.endemic_point.as_ref().map(|_| report.iterations),
        endemic_point: report.endemic_point,
    })
}

fn analyze_resolved(
    resolved: &Resolved,
) -> Result<(f64, equilibrium::EquilibriumReport), CliError> {
    let m = spectral::build_linearized(&resolved.params, &resolved.net)?;
    let abscissa = spectral::spectral_abscissa_default(&m)?.abscissa;
    let report = equilibrium::classify_with_abscissa(
        &resolved.params,
        &resolved.net,
        SOLVER_TOL,
        abscissa,
    )?;
    Ok((abscissa, report))
}

/// Equilibrium report of one scenario (the `equilibrium` verb).
pub fn cmd_equilibrium(
    sc: &Scenario,
    seed: Option<u64>,
) -> Result<equilibrium::EquilibriumReport, CliError> {
    let resolved = sc.resolve_with_seed(seed.unwrap_or(sc.seed))?;
    let (_, report) = analyze_resolved(&resolved)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovSection {
    pub report: LyapunovReport,
    /// Largest uptick after discarding the first sample.
    pub uptick_after_transient: f64,
    pub pass_after_transient: bool,
    /// The decrease is a guarantee only when every c_i >= 2; otherwise the
    /// numbers are reported without a claim.
    pub asserted: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Verification {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariance: Option<InvarianceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<LyapunovSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_decrease: Option<LyapunovReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suppression: Option<SuppressionSummary>,
}

/// Per-band comparison block appended by the reproduce command.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub experiment: u8,
    pub spectral_abscissa: f64,
    pub regime: Regime,
    pub band_ranges: Vec<[usize; 2]>,
    pub band_caps: Vec<f64>,
    pub band_terminal_mean_controlled: Vec<f64>,
    pub band_terminal_mean_uncontrolled: Vec<f64>,
    /// Every recorded controlled sample stayed at or below its cap
    /// (within tolerance).
    pub cap_compliance: bool,
    pub suppression_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub scenario_hash: String,
    pub seed: u64,
    pub n: usize,
    pub rng: &'static str,
    pub mode: &'static str,
    pub spectral_abscissa: f64,
    pub regime: Regime,
    pub marginal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endemic_point: Option<Vec<f64>>,
    pub run: RunOptions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terminal_controlled: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terminal_uncontrolled: Option<Vec<f64>>,
    pub verification: Verification,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
}

/// Everything a simulation run produced, before or after writing to disk.
#[derive(Debug)]
pub struct SimulationOutcome {
    pub summary: SimulateSummary,
    pub controlled: Option<Trajectory>,
    pub uncontrolled: Option<Trajectory>,
    pub files: Vec<PathBuf>,
}

/// Run the scenario's loop(s), verify, and write CSV + JSON artifacts into
/// `out_dir`. A cap violation in the controlled run still writes everything,
/// then surfaces as `InvarianceFailure` (exit 4).
pub fn cmd_simulate(
    sc: &Scenario,
    mode: SimulateMode,
    out_dir: &Path,
    record_controls: bool,
    seed: Option<u64>,
) -> Result<SimulationOutcome, CliError> {
    let resolved = sc.resolve_with_seed(seed.unwrap_or(sc.seed))?;
    let mut outcome = run_simulation(sc, &resolved, mode, record_controls)?;
    write_outcome(&mut outcome, out_dir)?;
    if let Some(inv) = &outcome.summary.verification.invariance {
        if !inv.pass {
            return Err(CliError::InvarianceFailure {
                max_cap_violation: inv.max_cap_violation,
                max_negativity: inv.max_negativity,
            });
        }
    }
    Ok(outcome)
}

fn run_simulation(
    sc: &Scenario,
    resolved: &Resolved,
    mode: SimulateMode,
    record_controls: bool,
) -> Result<SimulationOutcome, CliError> {
    let Resolved {
        net,
        params,
        x0,
        opts,
        seed,
    } = resolved;
    let hash = sc.hash();
    let (abscissa, report) = analyze_resolved(resolved)?;

    let uncontrolled = if mode.wants_uncontrolled() {
        let traj = integrate(
            |x, out| dynamics::open_loop_into(params, net, x, out),
            x0,
            opts,
        )?
        .with_scenario_hash(hash.clone());
        Some(traj)
    } else {
        None
    };

    let controlled = if mode.wants_controlled() {
        let mut traj = integrate(
            |x, out| dynamics::closed_loop_into(params, net, x, out),
            x0,
            opts,
        )?
        .with_scenario_hash(hash.clone());
        if record_controls {
            traj = traj.with_controls(|x| {
                dynamics::control_input(params, net, x).expect("dimensions fixed")
            });
        }
        Some(traj)
    } else {
        None
    };

    let mut verification = Verification::default();
    if let Some(traj) = &controlled {
        verification.invariance = Some(verify::check_cap_invariance(
            traj,
            params.cap_c(),
            verify::DEFAULT_CAP_TOL,
        )?);
        match (&report.regime, &report.endemic_point) {
            (Regime::Endemic, Some(endemic)) => {
                let lyap = verify::check_lyapunov_decrease(traj, endemic, verify::DEFAULT_UPTICK_TOL)?;
                let uptick = verify::max_uptick(&lyap.values, 1);
                verification.lyapunov = Some(LyapunovSection {
                    uptick_after_transient: uptick,
                    pass_after_transient: uptick <= verify::DEFAULT_UPTICK_TOL,
                    asserted: params.cap_c().iter().all(|&c| c >= 2.0),
                    report: lyap,
                });
            }
            _ => {
                verification.norm_decrease =
                    Some(verify::check_norm_decrease(traj, verify::DEFAULT_UPTICK_TOL));
            }
        }
    }
    if let (Some(open), Some(closed)) = (&uncontrolled, &controlled) {
        verification.suppression = Some(verify::summarize_suppression(open, closed));
    }

    let summary = SimulateSummary {
        scenario_hash: hash,
        seed: *seed,
        n: net.n(),
        rng: RNG_ALGORITHM,
        mode: mode.label(),
        spectral_abscissa: abscissa,
        regime: report.regime,
        marginal: report.marginal,
        endemic_point: report.endemic_point,
        run: *opts,
        terminal_controlled: controlled.as_ref().map(|t| t.terminal().to_vec()),
        terminal_uncontrolled: uncontrolled.as_ref().map(|t| t.terminal().to_vec()),
        verification,
        comparison: None,
    };
    Ok(SimulationOutcome {
        summary,
        controlled,
        uncontrolled,
        files: Vec::new(),
    })
}

fn write_outcome(outcome: &mut SimulationOutcome, out_dir: &Path) -> Result<(), CliError> {
    output::ensure_dir(out_dir)?;
    if let Some(traj) = &outcome.uncontrolled {
        outcome
            .files
            .push(output::write_trajectory_csv(out_dir, "uncontrolled.csv", traj)?);
    }
    if let Some(traj) = &outcome.controlled {
        outcome
            .files
            .push(output::write_trajectory_csv(out_dir, "controlled.csv", traj)?);
    }
    outcome.files.push(output::write_json(
        out_dir,
        "verification.json",
        &outcome.summary.verification,
    )?);
    outcome
        .files
        .push(output::write_json(out_dir, "summary.json", &outcome.summary)?);
    Ok(())
}

/// Materialize a built-in experiment, run both loops, and append the
/// per-band comparison block.
pub fn cmd_reproduce(
    experiment: u8,
    seed: u64,
    out_dir: &Path,
    record_controls: bool,
) -> Result<SimulationOutcome, CliError> {
    if !(1..=5).contains(&experiment) {
        return Err(CliError::Scenario {
            field: "experiment".into(),
            message: format!("experiment id {experiment} outside 1..=5"),
        });
    }
    let sc = builtin::experiment(experiment, seed);
    let resolved = sc.resolve()?;
    let mut outcome = run_simulation(&sc, &resolved, SimulateMode::Both, record_controls)?;

    let controlled = outcome.controlled.as_ref().expect("both mode");
    let uncontrolled = outcome.uncontrolled.as_ref().expect("both mode");
    let band_ranges: Vec<[usize; 2]> = (0..5).map(|k| [20 * k + 1, 20 * (k + 1)]).collect();
    let band_mean = |terminal: &[f64]| -> Vec<f64> {
        band_ranges
            .iter()
            .map(|[lo, hi]| terminal[lo - 1..*hi].iter().sum::<f64>() / 20.0)
            .collect()
    };
    let caps = resolved.params.cap_levels();
    let comparison = Comparison {
        experiment,
        spectral_abscissa: outcome.summary.spectral_abscissa,
        regime: outcome.summary.regime,
        band_caps: band_ranges.iter().map(|[lo, _]| caps[lo - 1]).collect(),
        band_terminal_mean_controlled: band_mean(controlled.terminal()),
        band_terminal_mean_uncontrolled: band_mean(uncontrolled.terminal()),
        cap_compliance: outcome
            .summary
            .verification
            .invariance
            .as_ref()
            .is_some_and(|inv| inv.pass),
        suppression_ok: outcome
            .summary
            .verification
            .suppression
            .as_ref()
            .is_some_and(|s| s.suppression_ok),
        band_ranges,
    };
    outcome.summary.comparison = Some(comparison);

    write_outcome(&mut outcome, out_dir)?;
    if let Some(inv) = &outcome.summary.verification.invariance {
        if !inv.pass {
            return Err(CliError::InvarianceFailure {
                max_cap_violation: inv.max_cap_violation,
                max_negativity: inv.max_negativity,
            });
        }
    }
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Beta,
    Gamma,
    Radius,
    Cap,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Beta => "beta",
            SweepParam::Gamma => "gamma",
            SweepParam::Radius => "radius",
            SweepParam::Cap => "cap",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub spectral_abscissa: f64,
    pub regime: Regime,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endemic_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endemic_mean: Option<f64>,
    pub controlled_peak: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub param: &'static str,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// CSV rendering: one row per swept value, full precision.
    pub fn to_csv(&self) -> String {
        let mut text = format!(
            "{},spectral_abscissa,regime,endemic_max,endemic_mean,controlled_peak\n",
            self.param
        );
        for row in &self.rows {
            let regime = match row.regime {
                Regime::DfeOnly => "DFE",
                Regime::Endemic => "endemic",
            };
            let opt = |v: Option<f64>| v.map(|v| format!("{v:.16e}")).unwrap_or_default();
            text.push_str(&format!(
                "{:.16e},{:.16e},{},{},{},{:.16e}\n",
                row.value,
                row.spectral_abscissa,
                regime,
                opt(row.endemic_max),
                opt(row.endemic_mean),
                row.controlled_peak
            ));
        }
        text
    }
}

/// One classification + controlled run per swept value; rows keep the input
/// order. Radius sweeps rebuild edges over the scenario's fixed positions.
pub fn cmd_sweep(
    sc: &Scenario,
    param: SweepParam,
    values: &[f64],
    seed: Option<u64>,
) -> Result<SweepTable, CliError> {
    let seed = seed.unwrap_or(sc.seed);
    let base = sc.resolve_with_seed(seed)?;

    // radius sweeps need the underlying point cloud
    let positions: Option<Vec<[f64; 2]>> = base.net.positions().map(<[_]>::to_vec);
    if param == SweepParam::Radius && positions.is_none() {
        return Err(CliError::Scenario {
            field: "sweep.param".into(),
            message: "radius sweep needs a position-backed graph".into(),
        });
    }

    let rows = values
        .par_iter()
        .map(|&value| sweep_row(sc, &base, param, value, positions.as_deref(), seed))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(SweepTable {
        param: param.name(),
        rows,
    })
}

fn sweep_row(
    sc: &Scenario,
    base: &Resolved,
    param: SweepParam,
    value: f64,
    positions: Option<&[[f64; 2]]>,
    seed: u64,
) -> Result<SweepRow, CliError> {
    let field_err = |message: String| CliError::Scenario {
        field: "sweep.values".into(),
        message,
    };
    let n = base.net.n();
    let (net, params): (Network, EpidemicParams) = match param {
        SweepParam::Beta => {
            let params =
                EpidemicParams::new(vec![value; n], base.params.gamma().to_vec(), base.params.cap_c().to_vec())
                    .map_err(|e| field_err(e.to_string()))?;
            (base.net.clone(), params)
        }
        SweepParam::Gamma => {
            let params =
                EpidemicParams::new(base.params.beta().to_vec(), vec![value; n], base.params.cap_c().to_vec())
                    .map_err(|e| field_err(e.to_string()))?;
            (base.net.clone(), params)
        }
        SweepParam::Cap => {
            let mut trial = sc.clone();
            trial.caps = Some(CapsSpec::Uniform(value));
            trial.params.cap_c = None;
            let resolved = trial.resolve_with_seed(seed)?;
            (resolved.net, resolved.params)
        }
        SweepParam::Radius => {
            let (self_weight, cross_weight) = match &sc.graph {
                GraphSpec::Generator(GeneratorSpec::Geometric {
                    self_weight,
                    cross_weight,
                    ..
                })
                | GraphSpec::Generator(GeneratorSpec::Clustered {
                    self_weight,
                    cross_weight,
                    ..
                })
                | GraphSpec::Generator(GeneratorSpec::Positions {
                    self_weight,
                    cross_weight,
                    ..
                }) => (*self_weight, *cross_weight),
                GraphSpec::Explicit { .. } => {
                    return Err(field_err("radius sweep needs a generator graph".into()))
                }
            };
            let net = graph::from_positions(
                positions.expect("checked by caller").to_vec(),
                value,
                self_weight,
                cross_weight,
            )
            .map_err(|e| field_err(e.to_string()))?;
            (net, base.params.clone())
        }
    };

    let m = spectral::build_linearized(&params, &net)?;
    let abscissa = spectral::spectral_abscissa_default(&m)?.abscissa;
    let report = equilibrium::classify_with_abscissa(&params, &net, SOLVER_TOL, abscissa)?;

    // x0 may exceed a tightened cap; clip it to stay admissible for the run
    let x0: Vec<f64> = base
        .x0
        .iter()
        .zip(params.cap_c())
        .map(|(xi, c)| xi.min(1.0 / c))
        .collect();
    let traj = integrate(
        |x, out| dynamics::closed_loop_into(&params, &net, x, out),
        &x0,
        &base.opts,
    )?;
    let controlled_peak = traj
        .states
        .iter()
        .flat_map(|x| x.iter())
        .fold(0.0f64, |a, &b| a.max(b));

    let (endemic_max, endemic_mean) = match &report.endemic_point {
        Some(point) => (
            Some(point.iter().fold(0.0f64, |a, &b| a.max(b))),
            Some(point.iter().sum::<f64>() / point.len() as f64),
        ),
        None => (None, None),
    };
    Ok(SweepRow {
        value,
        spectral_abscissa: abscissa,
        regime: report.regime,
        endemic_max,
        endemic_mean,
        controlled_peak,
    })
}
