//! Machine-checkable verdicts on trajectories: cap invariance, Lyapunov
//! decrease toward the endemic equilibrium, and open-vs-closed suppression.
//!
//! Monotonicity is asserted on recorded samples, not between them; the
//! default sampling interval (0.1) makes missed upticks implausible for
//! these smooth polynomial fields.

use serde::Serialize;

use crate::dynamics::{self, EpidemicParams};
use crate::graph::Network;
use crate::integrate::{integrate, RunOptions, Trajectory};
use crate::{Error, Result};

/// Allowed overshoot of a cap (absorbs integrator truncation error).
pub const DEFAULT_CAP_TOL: f64 = 1e-7;
/// Allowed dip below zero.
pub const DEFAULT_NEGATIVITY_TOL: f64 = 1e-9;
/// Allowed Lyapunov uptick between consecutive samples.
pub const DEFAULT_UPTICK_TOL: f64 = 1e-6;
/// Allowed per-node excess of the controlled peak over the uncontrolled one.
pub const DEFAULT_PEAK_TOL: f64 = 1e-7;

/// Verdict on the box invariant x_i(t) ∈ [0, 1/c_i].
#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    /// max over nodes and samples of x_i(t) − 1/c_i, clamped at 0.
    pub max_cap_violation: f64,
    /// max over nodes and samples of −x_i(t), clamped at 0.
    pub max_negativity: f64,
    pub pass: bool,
}

/// Exact maxima over the recorded samples; `cap_tol` bounds the allowed cap
/// overshoot and `DEFAULT_NEGATIVITY_TOL` the allowed dip below zero.
pub fn check_cap_invariance(
    traj: &Trajectory,
    cap_c: &[f64],
    cap_tol: f64,
) -> Result<InvarianceReport> {
    let n = traj.n_nodes();
    if cap_c.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: cap_c.len(),
        });
    }
    let mut max_cap_violation = 0.0f64;
    let mut max_negativity = 0.0f64;
    for state in &traj.states {
        for (xi, c) in state.iter().zip(cap_c) {
            max_cap_violation = max_cap_violation.max(xi - 1.0 / c);
            max_negativity = max_negativity.max(-xi);
        }
    }
    Ok(InvarianceReport {
        max_cap_violation,
        max_negativity,
        pass: max_cap_violation <= cap_tol && max_negativity <= DEFAULT_NEGATIVITY_TOL,
    })
}

/// Sampled values of a scalar decrease certificate along a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct LyapunovReport {
    /// V at every recorded sample.
    pub values: Vec<f64>,
    /// Largest positive increment between consecutive samples.
    pub max_uptick: f64,
    pub pass: bool,
}

/// V(t) = max_i |x_i(t) − x̄_i| / x̄_i, the max-metric distance to the
/// endemic equilibrium. Every component of `endemic` must be positive.
pub fn check_lyapunov_decrease(
    traj: &Trajectory,
    endemic: &[f64],
    tol: f64,
) -> Result<LyapunovReport> {
    let n = traj.n_nodes();
    if endemic.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: endemic.len(),
        });
    }
    if let Some(i) = endemic.iter().position(|&v| v <= 0.0) {
        return Err(Error::ZeroEquilibriumComponent { index: i });
    }
    let values: Vec<f64> = traj
        .states
        .iter()
        .map(|x| {
            x.iter()
                .zip(endemic)
                .map(|(xi, ei)| (xi - ei).abs() / ei)
                .fold(0.0f64, f64::max)
        })
        .collect();
    let max_uptick = max_uptick(&values, 0);
    Ok(LyapunovReport {
        values,
        max_uptick,
        pass: max_uptick <= tol,
    })
}

/// Sup-norm decrease surrogate for DFE-regime runs, where the relative
/// metric is undefined.
pub fn check_norm_decrease(traj: &Trajectory, tol: f64) -> LyapunovReport {
    let values: Vec<f64> = traj
        .states
        .iter()
        .map(|x| x.iter().fold(0.0f64, |a, &b| a.max(b.abs())))
        .collect();
    let max_uptick = max_uptick(&values, 0);
    LyapunovReport {
        values,
        max_uptick,
        pass: max_uptick <= tol,
    }
}

/// Largest positive increment between consecutive values, ignoring the
/// first `skip` samples (used to discard an initial transient).
pub fn max_uptick(values: &[f64], skip: usize) -> f64 {
    values
        .iter()
        .skip(skip)
        .zip(values.iter().skip(skip + 1))
        .map(|(a, b)| b - a)
        .fold(0.0f64, f64::max)
}

/// Per-node comparison numbers of an open/closed pair from one initial
/// condition.
#[derive(Debug, Clone, Serialize)]
pub struct SuppressionSummary {
    pub peak_open: Vec<f64>,
    pub peak_closed: Vec<f64>,
    pub terminal_open: Vec<f64>,
    pub terminal_closed: Vec<f64>,
    /// terminal_open − terminal_closed per node.
    pub terminal_gap: Vec<f64>,
    /// max over nodes of peak_closed − peak_open.
    pub max_peak_excess: f64,
    /// True when no controlled peak exceeds its uncontrolled peak beyond
    /// [`DEFAULT_PEAK_TOL`].
    pub suppression_ok: bool,
}

/// Both trajectories plus the comparison block.
#[derive(Debug, Clone)]
pub struct OpenClosedComparison {
    pub open: Trajectory,
    pub closed: Trajectory,
    pub summary: SuppressionSummary,
}

/// Integrate the open- and closed-loop fields from the same cap-respecting
/// start and compare peaks and terminal levels.
pub fn compare_open_closed(
    params: &EpidemicParams,
    net: &Network,
    x0: &[f64],
    opts: &RunOptions,
) -> Result<OpenClosedComparison> {
    if x0.len() != params.n() {
        return Err(Error::DimensionMismatch {
            expected: params.n(),
            found: x0.len(),
        });
    }
    for (i, (xi, c)) in x0.iter().zip(params.cap_c()).enumerate() {
        if *xi < 0.0 || *xi > 1.0 / c {
            return Err(Error::InvalidParameter(format!(
                "x0[{i}] = {xi} violates the cap {}",
                1.0 / c
            )));
        }
    }
    let open = integrate(
        |x, out| dynamics::open_loop_into(params, net, x, out),
        x0,
        opts,
    )?;
    let closed = integrate(
        |x, out| dynamics::closed_loop_into(params, net, x, out),
        x0,
        opts,
    )?;
    let summary = summarize_suppression(&open, &closed);
    Ok(OpenClosedComparison {
        open,
        closed,
        summary,
    })
}

/// Comparison block for an open/closed pair that was already integrated
/// (same start, same sampling grid).
pub fn summarize_suppression(open: &Trajectory, closed: &Trajectory) -> SuppressionSummary {
    let n = open.n_nodes();
    debug_assert_eq!(closed.n_nodes(), n);
    let peak = |traj: &Trajectory| -> Vec<f64> {
        let mut p = vec![f64::NEG_INFINITY; n];
        for state in &traj.states {
            for (pi, xi) in p.iter_mut().zip(state) {
                *pi = pi.max(*xi);
            }
        }
        p
    };
    let peak_open = peak(open);
    let peak_closed = peak(closed);
    let terminal_open = open.terminal().to_vec();
    let terminal_closed = closed.terminal().to_vec();
    let terminal_gap: Vec<f64> = terminal_open
        .iter()
        .zip(&terminal_closed)
        .map(|(o, c)| o - c)
        .collect();
    let max_peak_excess = peak_closed
        .iter()
        .zip(&peak_open)
        .map(|(c, o)| c - o)
        .fold(f64::NEG_INFINITY, f64::max);
    SuppressionSummary {
        peak_open,
        peak_closed,
        terminal_open,
        terminal_closed,
        terminal_gap,
        max_peak_excess,
        suppression_ok: max_peak_excess <= DEFAULT_PEAK_TOL,
    }
}
