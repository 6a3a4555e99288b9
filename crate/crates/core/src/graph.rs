//! Weighted interaction networks and the geometric generators used by the
//! scale experiments.
//!
//! Edge convention: `weights[(i, j)] = a_ij` is the influence of node `j` on
//! node `i`; the support graph has a directed edge `j -> i` whenever
//! `a_ij > 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Seedable RNG used by all generators, recorded in run metadata so results
/// are reproducible within this implementation.
pub const RNG_ALGORITHM: &str = "chacha12";

/// Position draws are retried this many times before giving up on strong
/// connectivity.
pub const MAX_REGEN_ATTEMPTS: usize = 1000;

/// Dense weighted directed network, immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkJson", into = "NetworkJson")]
pub struct Network {
    n: usize,
    /// Row-major n×n, entry (i, j) = a_ij ≥ 0.
    weights: Vec<f64>,
    positions: Option<Vec<[f64; 2]>>,
}

impl Network {
    /// Build a network from dense rows; every entry must be finite and
    /// non-negative.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidParameter("network must have n >= 1".into()));
        }
        let mut weights = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for &w in row {
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "edge weights must be finite and non-negative, got {w}"
                    )));
                }
                weights.push(w);
            }
        }
        Ok(Self {
            n,
            weights,
            positions: None,
        })
    }

    /// Attach node positions (used by radius re-sweeps and plotting).
    pub fn with_positions(mut self, positions: Vec<[f64; 2]>) -> Result<Self> {
        if positions.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: positions.len(),
            });
        }
        self.positions = Some(positions);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// a_ij: influence of node j on node i.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// Row i of the weight matrix, i.e. all in-weights of node i.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    pub fn positions(&self) -> Option<&[[f64; 2]]> {
        self.positions.as_deref()
    }

    /// Component i of Σ_j a_ij x_j, written into `out`.
    pub fn neighbor_sum_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for i in 0..self.n {
            let row = self.row(i);
            let mut acc = 0.0;
            for (a, xj) in row.iter().zip(x) {
                acc += a * xj;
            }
            out[i] = acc;
        }
    }

    /// Σ_j a_ij x_j for every node, the coupling term of the infection
    /// dynamics.
    pub fn neighbor_sum(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        let mut out = vec![0.0; self.n];
        self.neighbor_sum_into(x, &mut out);
        Ok(out)
    }

    /// True iff every node reaches every other along directed support edges.
    /// For n = 1 the convention is a_11 > 0, which keeps the Perron machinery
    /// well-posed downstream.
    pub fn is_strongly_connected(&self) -> bool {
        if self.n == 1 {
            return self.weights[0] > 0.0;
        }
        // edge j -> i iff a_ij > 0
        strongly_connected(self.n, |from, to| self.weight(to, from) > 0.0)
    }
}

/// Strong connectivity of a directed graph given by an edge predicate:
/// forward and backward reachability from node 0 must both cover all nodes.
pub(crate) fn strongly_connected(n: usize, has_edge: impl Fn(usize, usize) -> bool) -> bool {
    reaches_all(n, &has_edge) && reaches_all(n, &|from, to| has_edge(to, from))
}

fn reaches_all(n: usize, has_edge: &dyn Fn(usize, usize) -> bool) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for w in 0..n {
            if !seen[w] && has_edge(v, w) {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

fn geometric_weights(
    positions: &[[f64; 2]],
    radius: f64,
    self_weight: f64,
    cross_weight: f64,
) -> Vec<f64> {
    let n = positions.len();
    let mut weights = vec![0.0; n * n];
    let r2 = radius * radius;
    for i in 0..n {
        weights[i * n + i] = self_weight;
        for j in (i + 1)..n {
            let dx = positions[i][0] - positions[j][0];
            let dy = positions[i][1] - positions[j][1];
            // closed ball: "within a distance of r" includes equality
            if dx * dx + dy * dy <= r2 {
                weights[i * n + j] = cross_weight;
                weights[j * n + i] = cross_weight;
            }
        }
    }
    weights
}

/// Apply the geometric edge rule to caller-supplied positions. No
/// connectivity regeneration happens here; the caller checks.
pub fn from_positions(
    positions: Vec<[f64; 2]>,
    radius: f64,
    self_weight: f64,
    cross_weight: f64,
) -> Result<Network> {
    if positions.is_empty() {
        return Err(Error::InvalidParameter("positions must be non-empty".into()));
    }
    check_edge_params(radius, self_weight, cross_weight)?;
    let weights = geometric_weights(&positions, radius, self_weight, cross_weight);
    Ok(Network {
        n: positions.len(),
        weights,
        positions: Some(positions),
    })
}

fn check_edge_params(radius: f64, self_weight: f64, cross_weight: f64) -> Result<()> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive, got {radius}"
        )));
    }
    for (name, w) in [("self_weight", self_weight), ("cross_weight", cross_weight)] {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "{name} must be finite and non-negative, got {w}"
            )));
        }
    }
    Ok(())
}

/// Random geometric network: n nodes uniform in [0, side]², nodes at
/// Euclidean distance ≤ radius linked with `cross_weight`, diagonal set to
/// `self_weight`. Positions are redrawn until the support graph is strongly
/// connected; deterministic for a fixed seed.
pub fn random_geometric(
    n: usize,
    side: f64,
    radius: f64,
    self_weight: f64,
    cross_weight: f64,
    seed: u64,
) -> Result<Network> {
    generate_connected(n, side, seed, radius, self_weight, cross_weight, |rng, n, side| {
        uniform_positions(rng, n, side)
    })
}

/// Geometric network with a concentrated corner cluster:
/// `cluster_fraction` of the nodes (the lowest indices) are drawn in
/// [0, cluster_side]², the rest uniformly in [0, side]².
pub fn random_clustered(
    n: usize,
    side: f64,
    radius: f64,
    cluster_fraction: f64,
    cluster_side: f64,
    self_weight: f64,
    cross_weight: f64,
    seed: u64,
) -> Result<Network> {
    if !(0.0..=1.0).contains(&cluster_fraction) {
        return Err(Error::InvalidParameter(format!(
            "cluster_fraction must lie in [0, 1], got {cluster_fraction}"
        )));
    }
    if !(cluster_side > 0.0) || cluster_side > side {
        return Err(Error::InvalidParameter(format!(
            "cluster_side must lie in (0, side], got {cluster_side}"
        )));
    }
    let k = ((n as f64) * cluster_fraction).round() as usize;
    generate_connected(n, side, seed, radius, self_weight, cross_weight, move |rng, n, side| {
        let mut positions = uniform_positions(rng, k.min(n), cluster_side);
        positions.extend(uniform_positions(rng, n - k.min(n), side));
        positions
    })
}

fn uniform_positions(rng: &mut ChaCha12Rng, n: usize, side: f64) -> Vec<[f64; 2]> {
    (0..n)
        .map(|_| [rng.gen_range(0.0..=side), rng.gen_range(0.0..=side)])
        .collect()
}

fn generate_connected(
    n: usize,
    side: f64,
    seed: u64,
    radius: f64,
    self_weight: f64,
    cross_weight: f64,
    draw: impl Fn(&mut ChaCha12Rng, usize, f64) -> Vec<[f64; 2]>,
) -> Result<Network> {
    if n == 0 {
        return Err(Error::InvalidParameter("network must have n >= 1".into()));
    }
    if !(side > 0.0) || !side.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "side must be positive, got {side}"
        )));
    }
    check_edge_params(radius, self_weight, cross_weight)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..MAX_REGEN_ATTEMPTS {
        let positions = draw(&mut rng, n, side);
        let net = from_positions(positions, radius, self_weight, cross_weight)?;
        if net.is_strongly_connected() {
            return Ok(net);
        }
    }
    Err(Error::Disconnected {
        attempts: MAX_REGEN_ATTEMPTS,
    })
}

#[derive(Serialize, Deserialize)]
struct NetworkJson {
    n: usize,
    weights: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    positions: Option<Vec<[f64; 2]>>,
}

impl From<Network> for NetworkJson {
    fn from(net: Network) -> Self {
        let rows = (0..net.n).map(|i| net.row(i).to_vec()).collect();
        NetworkJson {
            n: net.n,
            weights: rows,
            positions: net.positions,
        }
    }
}

impl TryFrom<NetworkJson> for Network {
    type Error = Error;

    fn try_from(json: NetworkJson) -> Result<Self> {
        if json.weights.len() != json.n {
            return Err(Error::DimensionMismatch {
                expected: json.n,
                found: json.weights.len(),
            });
        }
        let net = Network::from_rows(json.weights)?;
        match json.positions {
            Some(p) => net.with_positions(p),
            None => Ok(net),
        }
    }
}
