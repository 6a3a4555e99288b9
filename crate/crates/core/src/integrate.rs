//! Time integration of the epidemic vector fields: classic fixed-step RK4
//! and an embedded Dormand–Prince 4(5) pair with standard step control.
//!
//! States are never clamped or projected: the closed-loop mathematics
//! guarantees invariance of the cap box and the test suite verifies it, so
//! clamping would only mask integrator or model bugs.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Integrator selection with its own parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    /// Classic 4-stage Runge–Kutta with step size at most `dt` (steps are
    /// fitted evenly between output samples).
    Rk4 { dt: f64 },
    /// Dormand–Prince embedded 4(5) pair with per-component error control.
    Rk45 { abs_tol: f64, rel_tol: f64 },
}

impl Method {
    pub fn describe(&self) -> String {
        match self {
            Method::Rk4 { dt } => format!("rk4 dt={dt}"),
            Method::Rk45 { abs_tol, rel_tol } => {
                format!("rk45 abs_tol={abs_tol} rel_tol={rel_tol}")
            }
        }
    }
}

/// How long and how finely to integrate, plus optional convergence
/// detection for [`simulate_until_converged`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    #[serde(flatten)]
    pub method: Method,
    pub t_end: f64,
    /// Output sampling interval; samples land at multiples of this plus
    /// `t_end`.
    pub record_every: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge_window: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            method: Method::Rk4 { dt: 0.01 },
            t_end: 200.0,
            record_every: 0.1,
            converge_tol: None,
            converge_window: None,
        }
    }
}

impl RunOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if !(self.record_every > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "record_every must be positive, got {}",
                self.record_every
            )));
        }
        match self.method {
            Method::Rk4 { dt } => {
                if !(dt > 0.0) || dt > self.t_end {
                    return Err(Error::InvalidParameter(format!(
                        "dt must satisfy 0 < dt <= t_end, got {dt}"
                    )));
                }
            }
            Method::Rk45 { abs_tol, rel_tol } => {
                if !(abs_tol > 0.0) || !(rel_tol > 0.0) {
                    return Err(Error::InvalidParameter(
                        "adaptive tolerances must be positive".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Metadata attached to every trajectory: where it came from and how it was
/// integrated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario_hash: Option<String>,
    pub options: RunOptions,
}

/// Time-stamped state samples; controls are attached on demand since they
/// double the memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub controls: Option<Vec<Vec<f64>>>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_nodes(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn terminal(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least one sample")
    }

    /// Populate the control channel by evaluating `control` at every
    /// recorded state.
    pub fn with_controls(mut self, control: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        self.controls = Some(self.states.iter().map(|x| control(x)).collect());
        self
    }

    pub fn with_scenario_hash(mut self, hash: impl Into<String>) -> Self {
        self.meta.scenario_hash = Some(hash.into());
        self
    }

    /// CSV with header `t,x_1,...,x_n[,u_1,...,u_n]`, one row per sample,
    /// 17 significant digits, LF line endings.
    pub fn write_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        let n = self.n_nodes();
        let mut header = String::from("t");
        for i in 1..=n {
            header.push_str(&format!(",x_{i}"));
        }
        if self.controls.is_some() {
            for i in 1..=n {
                header.push_str(&format!(",u_{i}"));
            }
        }
        out.write_all(header.as_bytes())?;
        out.write_all(b"\n")?;
        for (k, t) in self.times.iter().enumerate() {
            let mut row = format!("{t:.16e}");
            for v in &self.states[k] {
                row.push_str(&format!(",{v:.16e}"));
            }
            if let Some(controls) = &self.controls {
                for v in &controls[k] {
                    row.push_str(&format!(",{v:.16e}"));
                }
            }
            out.write_all(row.as_bytes())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceStatus {
    Converged,
    TimedOut,
}

/// Integrate an autonomous field from `x0`, sampling at multiples of
/// `record_every` plus `t_end`.
pub fn integrate<F>(field: F, x0: &[f64], opts: &RunOptions) -> Result<Trajectory>
where
    F: Fn(&[f64], &mut [f64]),
{
    run(field, x0, opts, |_, _, _| true)
}

/// Integrate until the field norm stays below `converge_tol` for a trailing
/// window of length `converge_window`, or until `t_end`.
pub fn simulate_until_converged<F>(
    field: F,
    x0: &[f64],
    opts: &RunOptions,
) -> Result<(Trajectory, ConvergenceStatus)>
where
    F: Fn(&[f64], &mut [f64]),
{
    let tol = opts.converge_tol.ok_or_else(|| {
        Error::InvalidParameter("simulate_until_converged requires converge_tol".into())
    })?;
    let window = opts.converge_window.ok_or_else(|| {
        Error::InvalidParameter("simulate_until_converged requires converge_window".into())
    })?;
    if !(window > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "converge_window must be positive, got {window}"
        )));
    }

    let mut last_bad = f64::NEG_INFINITY;
    let mut converged = false;
    let traj = run(field, x0, opts, |t, _x, f| {
        let norm = f.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if norm > tol {
            last_bad = t;
        }
        if t >= window && t - last_bad >= window {
            converged = true;
            return false;
        }
        true
    })?;
    let status = if converged {
        ConvergenceStatus::Converged
    } else {
        ConvergenceStatus::TimedOut
    };
    Ok((traj, status))
}

/// Shared driver: integrates record interval by record interval, invoking
/// `on_record(t, x, f(x))` at every sample; a `false` return stops the run.
fn run<F>(
    field: F,
    x0: &[f64],
    opts: &RunOptions,
    mut on_record: impl FnMut(f64, &[f64], &[f64]) -> bool,
) -> Result<Trajectory>
where
    F: Fn(&[f64], &mut [f64]),
{
    opts.validate()?;
    for (i, v) in x0.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteState {
                time: 0.0,
                component: i,
            });
        }
    }

    let n = x0.len();
    let record_times = build_record_times(opts.t_end, opts.record_every);
    let mut times = Vec::with_capacity(record_times.len() + 1);
    let mut states = Vec::with_capacity(record_times.len() + 1);
    let mut x = x0.to_vec();
    let mut scratch = vec![0.0; n];

    field(&x, &mut scratch);
    times.push(0.0);
    states.push(x.clone());
    let mut stop = !on_record(0.0, &x, &scratch);

    let mut stepper = Stepper::new(opts.method, n);
    let mut t = 0.0;
    for &t_next in &record_times {
        if stop {
            break;
        }
        stepper.advance(&field, &mut x, t, t_next)?;
        check_finite(&x, t_next)?;
        t = t_next;
        field(&x, &mut scratch);
        times.push(t);
        states.push(x.clone());
        stop = !on_record(t, &x, &scratch);
    }

    Ok(Trajectory {
        times,
        states,
        controls: None,
        meta: TrajectoryMeta {
            scenario_hash: None,
            options: *opts,
        },
    })
}

fn build_record_times(t_end: f64, every: f64) -> Vec<f64> {
    let mut times = Vec::new();
    let mut k = 1u64;
    loop {
        let t = k as f64 * every;
        if t >= t_end * (1.0 - 1e-12) {
            break;
        }
        times.push(t);
        k += 1;
    }
    times.push(t_end);
    times
}

fn check_finite(x: &[f64], t: f64) -> Result<()> {
    for (i, v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteState {
                time: t,
                component: i,
            });
        }
    }
    Ok(())
}

enum Stepper {
    Rk4 {
        dt: f64,
        stages: [Vec<f64>; 4],
        work: Vec<f64>,
    },
    Rk45 {
        abs_tol: f64,
        rel_tol: f64,
        h: f64,
        stages: [Vec<f64>; 7],
        work: Vec<f64>,
        candidate: Vec<f64>,
    },
}

impl Stepper {
    fn new(method: Method, n: usize) -> Self {
        match method {
            Method::Rk4 { dt } => Stepper::Rk4 {
                dt,
                stages: std::array::from_fn(|_| vec![0.0; n]),
                work: vec![0.0; n],
            },
            Method::Rk45 { abs_tol, rel_tol } => Stepper::Rk45 {
                abs_tol,
                rel_tol,
                h: 0.0,
                stages: std::array::from_fn(|_| vec![0.0; n]),
                work: vec![0.0; n],
                candidate: vec![0.0; n],
            },
        }
    }

    fn advance<F>(&mut self, field: &F, x: &mut [f64], t0: f64, t1: f64) -> Result<()>
    where
        F: Fn(&[f64], &mut [f64]),
    {
        match self {
            Stepper::Rk4 { dt, stages, work } => {
                let span = t1 - t0;
                let steps = (span / *dt - 1e-9).ceil().max(1.0) as usize;
                let h = span / steps as f64;
                for _ in 0..steps {
                    rk4_step(field, x, h, stages, work);
                }
                Ok(())
            }
            Stepper::Rk45 {
                abs_tol,
                rel_tol,
                h,
                stages,
                work,
                candidate,
            } => {
                let mut t = t0;
                if *h <= 0.0 {
                    *h = (t1 - t0) / 20.0;
                }
                while t < t1 {
                    let h_try = h.min(t1 - t);
                    if h_try < 1e-14 * t.abs().max(1.0) {
                        return Err(Error::StepSizeUnderflow { time: t });
                    }
                    let err = dopri_step(field, x, candidate, h_try, stages, work, *abs_tol, *rel_tol);
                    if !err.is_finite() {
                        // reject hard; persistent blow-up ends in step
                        // underflow
                        *h = h_try * 0.2;
                        continue;
                    }
                    let factor = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    if err <= 1.0 {
                        x.copy_from_slice(candidate);
                        t += h_try;
                    }
                    *h = h_try * factor;
                }
                Ok(())
            }
        }
    }
}

fn rk4_step<F>(field: &F, x: &mut [f64], h: f64, stages: &mut [Vec<f64>; 4], work: &mut [f64])
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = x.len();
    let [k1, k2, k3, k4] = stages;
    field(x, k1);
    for i in 0..n {
        work[i] = x[i] + 0.5 * h * k1[i];
    }
    field(work, k2);
    for i in 0..n {
        work[i] = x[i] + 0.5 * h * k2[i];
    }
    field(work, k3);
    for i in 0..n {
        work[i] = x[i] + h * k3[i];
    }
    field(work, k4);
    for i in 0..n {
        x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

// Dormand–Prince 4(5) tableau.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One trial step; returns the scaled error norm (accept iff <= 1). The
/// 5th-order candidate lands in `candidate`.
#[allow(clippy::too_many_arguments)]
fn dopri_step<F>(
    field: &F,
    x: &[f64],
    candidate: &mut [f64],
    h: f64,
    stages: &mut [Vec<f64>; 7],
    work: &mut [f64],
    abs_tol: f64,
    rel_tol: f64,
) -> f64
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = x.len();
    field(x, &mut stages[0]);
    let tableau: [&[f64]; 5] = [&A2, &A3, &A4, &A5, &A6];
    for (stage, coeffs) in tableau.iter().enumerate() {
        for i in 0..n {
            let mut acc = 0.0;
            for (j, &a) in coeffs.iter().enumerate() {
                acc += a * stages[j][i];
            }
            work[i] = x[i] + h * acc;
        }
        let (_, tail) = stages.split_at_mut(stage + 1);
        field(work, &mut tail[0]);
    }
    // 5th-order solution, then its slope as the 7th stage
    for i in 0..n {
        let mut acc = 0.0;
        for (j, &b) in B5.iter().enumerate() {
            acc += b * stages[j][i];
        }
        candidate[i] = x[i] + h * acc;
    }
    {
        let (head, tail) = stages.split_at_mut(6);
        let _ = head;
        field(candidate, &mut tail[0]);
    }

    let mut err = 0.0f64;
    for i in 0..n {
        let mut fourth = 0.0;
        for (j, &b) in B4.iter().enumerate() {
            fourth += b * stages[j][i];
        }
        let e = h * (B5.iter().enumerate().map(|(j, &b)| b * stages[j][i]).sum::<f64>() - fourth);
        let scale = abs_tol + rel_tol * x[i].abs().max(candidate[i].abs());
        err = err.max((e / scale).abs());
    }
    err
}
