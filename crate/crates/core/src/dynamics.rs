//! Epidemic parameterization and the three vector fields: open loop, the
//! infection-cap feedback term, and the resulting closed loop.
//!
//! All fields are polynomial in the state and defined on the whole unit box,
//! including points above the caps, so the verifier can probe near the
//! boundary. Cap compliance is checked separately, never baked into
//! evaluation.

use serde::{Deserialize, Serialize};

use crate::graph::Network;
use crate::{Error, Result};

/// Per-node rates and cap parameters. Validated once at construction; field
/// evaluation is the hot loop and does not re-check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpidemicParams {
    beta: Vec<f64>,
    gamma: Vec<f64>,
    cap_c: Vec<f64>,
}

impl EpidemicParams {
    /// beta_i > 0, gamma_i >= 0, cap parameter c_i > 1, all of length n.
    pub fn new(beta: Vec<f64>, gamma: Vec<f64>, cap_c: Vec<f64>) -> Result<Self> {
        let n = beta.len();
        if n == 0 {
            return Err(Error::InvalidParameter("parameter vectors are empty".into()));
        }
        for v in [&gamma, &cap_c] {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
        }
        for &b in &beta {
            if !(b > 0.0) || !b.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "infection rate beta must be positive, got {b}"
                )));
            }
        }
        for &g in &gamma {
            if !(g >= 0.0) || !g.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "healing rate gamma must be non-negative, got {g}"
                )));
            }
        }
        for &c in &cap_c {
            if !(c > 1.0) || !c.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "cap parameter c must exceed 1, got {c}"
                )));
            }
        }
        Ok(Self { beta, gamma, cap_c })
    }

    /// Uniform parameters broadcast to n nodes.
    pub fn uniform(n: usize, beta: f64, gamma: f64, cap_c: f64) -> Result<Self> {
        Self::new(vec![beta; n], vec![gamma; n], vec![cap_c; n])
    }

    pub fn n(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn cap_c(&self) -> &[f64] {
        &self.cap_c
    }

    /// Node caps 1/c_i, the guaranteed upper bounds on infection levels.
    pub fn cap_levels(&self) -> Vec<f64> {
        self.cap_c.iter().map(|c| 1.0 / c).collect()
    }

    fn check_net(&self, net: &Network) -> Result<()> {
        if net.n() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: net.n(),
            });
        }
        Ok(())
    }

    fn check_state(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: x.len(),
            });
        }
        Ok(())
    }
}

/// Broadcastable parameter spec: each entry is either one scalar for all
/// nodes or a full per-node array. This is the JSON-facing form; `resolve`
/// produces validated per-node vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsSpec {
    pub beta: ScalarOrVec,
    pub gamma: ScalarOrVec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap_c: Option<ScalarOrVec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrVec {
    Scalar(f64),
    Vec(Vec<f64>),
}

impl ScalarOrVec {
    pub fn resolve(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            ScalarOrVec::Scalar(v) => Ok(vec![*v; n]),
            ScalarOrVec::Vec(v) => {
                if v.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: v.len(),
                    });
                }
                Ok(v.clone())
            }
        }
    }
}

impl ParamsSpec {
    /// Resolve against a known node count; `cap_c` must be present here (use
    /// [`ParamsSpec::resolve_with_caps`] when caps come from elsewhere).
    pub fn resolve(&self, n: usize) -> Result<EpidemicParams> {
        let cap = self.cap_c.as_ref().ok_or_else(|| {
            Error::InvalidParameter("params.cap_c missing and no caps given".into())
        })?;
        EpidemicParams::new(
            self.beta.resolve(n)?,
            self.gamma.resolve(n)?,
            cap.resolve(n)?,
        )
    }

    /// Resolve with an externally supplied cap vector.
    pub fn resolve_with_caps(&self, n: usize, cap_c: Vec<f64>) -> Result<EpidemicParams> {
        EpidemicParams::new(self.beta.resolve(n)?, self.gamma.resolve(n)?, cap_c)
    }
}

/// dx_i/dt = beta_i (1 - x_i) S_i - gamma_i x_i with S = neighbor sums.
pub fn open_loop_into(params: &EpidemicParams, net: &Network, x: &[f64], out: &mut [f64]) {
    net.neighbor_sum_into(x, out);
    for i in 0..x.len() {
        out[i] = params.beta[i] * (1.0 - x[i]) * out[i] - params.gamma[i] * x[i];
    }
}

/// u_i = -beta_i c_i x_i (1 - x_i) S_i, the cap feedback term (never
/// positive on the unit box).
pub fn control_into(params: &EpidemicParams, net: &Network, x: &[f64], out: &mut [f64]) {
    net.neighbor_sum_into(x, out);
    for i in 0..x.len() {
        out[i] *= -params.beta[i] * params.cap_c[i] * x[i] * (1.0 - x[i]);
    }
}

/// dx_i/dt = beta_i (1 - c_i x_i)(1 - x_i) S_i - gamma_i x_i, i.e. open loop
/// plus control.
pub fn closed_loop_into(params: &EpidemicParams, net: &Network, x: &[f64], out: &mut [f64]) {
    net.neighbor_sum_into(x, out);
    for i in 0..x.len() {
        out[i] = params.beta[i] * (1.0 - params.cap_c[i] * x[i]) * (1.0 - x[i]) * out[i]
            - params.gamma[i] * x[i];
    }
}

/// Open-loop infection field at state x.
pub fn open_loop_field(params: &EpidemicParams, net: &Network, x: &[f64]) -> Result<Vec<f64>> {
    params.check_net(net)?;
    params.check_state(x)?;
    let mut out = vec![0.0; x.len()];
    open_loop_into(params, net, x, &mut out);
    Ok(out)
}

/// State feedback control input at state x.
pub fn control_input(params: &EpidemicParams, net: &Network, x: &[f64]) -> Result<Vec<f64>> {
    params.check_net(net)?;
    params.check_state(x)?;
    let mut out = vec![0.0; x.len()];
    control_into(params, net, x, &mut out);
    Ok(out)
}

/// Controlled infection field at state x.
pub fn closed_loop_field(params: &EpidemicParams, net: &Network, x: &[f64]) -> Result<Vec<f64>> {
    params.check_net(net)?;
    params.check_state(x)?;
    let mut out = vec![0.0; x.len()];
    closed_loop_into(params, net, x, &mut out);
    Ok(out)
}

/// b_i = 1 - c_i x_i, the interaction-strength multiplier the controller
/// effectively imposes; lies in [0, 1] whenever x_i ∈ [0, 1/c_i].
pub fn scaling_factor(params: &EpidemicParams, x: &[f64]) -> Vec<f64> {
    params
        .cap_c
        .iter()
        .zip(x)
        .map(|(c, xi)| 1.0 - c * xi)
        .collect()
}
