//! Spectral abscissa and Perron vectors of irreducible Metzler matrices.
//!
//! For an irreducible Metzler matrix M the abscissa s(M) is a simple real
//! eigenvalue with a strictly positive eigenvector. Shifting by
//! σ = max_i |m_ii| + 1 makes M + σI non-negative with strictly positive
//! diagonal, hence primitive, so plain power iteration converges and
//! s(M) = ρ(M + σI) − σ with the same eigenvector. No deflation, no complex
//! arithmetic.

use serde::Serialize;

use crate::dynamics::EpidemicParams;
use crate::graph::{strongly_connected, Network};
use crate::{Error, Result};

/// Residual tolerance ‖Mv − s v‖∞ used when callers do not override.
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

/// Square matrix with non-negative off-diagonal entries.
#[derive(Debug, Clone, PartialEq)]
pub struct MetzlerMatrix {
    n: usize,
    entries: Vec<f64>, // row-major
}

impl MetzlerMatrix {
    /// Validates the sign pattern: entries off the diagonal must be
    /// non-negative and everything finite.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("matrix must be at least 1x1".into()));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let m = entries[i * n + j];
                if !m.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "entry ({i},{j}) is not finite"
                    )));
                }
                if i != j && m < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "off-diagonal entry ({i},{j}) = {m} is negative"
                    )));
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            entries.extend(row);
        }
        Self::new(n, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// M + alpha I, keeps the Metzler sign pattern.
    pub fn shifted(&self, alpha: f64) -> MetzlerMatrix {
        let mut entries = self.entries.clone();
        for i in 0..self.n {
            entries[i * self.n + i] += alpha;
        }
        MetzlerMatrix { n: self.n, entries }
    }

    /// Irreducibility = strong connectivity of the off-diagonal support.
    /// A 1×1 matrix is trivially irreducible.
    pub fn is_irreducible(&self) -> bool {
        if self.n == 1 {
            return true;
        }
        strongly_connected(self.n, |from, to| {
            from != to && self.entry(to, from) > 0.0
        })
    }

    fn mul_into(&self, v: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let row = &self.entries[i * self.n..(i + 1) * self.n];
            let mut acc = 0.0;
            for (m, x) in row.iter().zip(v) {
                acc += m * x;
            }
            out[i] = acc;
        }
    }
}

/// Converged dominant eigenpair of a Metzler matrix.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralResult {
    /// s(M), the largest real part among eigenvalues.
    pub abscissa: f64,
    /// Strictly positive eigenvector, normalized to unit max-norm.
    pub perron: Vec<f64>,
    pub iterations: usize,
    /// ‖Mv − s v‖∞ at return.
    pub residual: f64,
}

/// Assemble the linearization of the infection dynamics at the origin:
/// entry (i, j) = beta_i a_ij − [i = j] gamma_i.
pub fn build_linearized(params: &EpidemicParams, net: &Network) -> Result<MetzlerMatrix> {
    let n = net.n();
    if params.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: params.n(),
        });
    }
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut m = params.beta()[i] * net.weight(i, j);
            if i == j {
                m -= params.gamma()[i];
            }
            entries.push(m);
        }
    }
    MetzlerMatrix::new(n, entries)
}

/// Spectral abscissa by shifted power iteration, starting from the all-ones
/// vector. Converges when the eigen-equation residual drops below `tol`;
/// near-degenerate dominant pairs surface as `NoConvergence` rather than a
/// silently wrong classification.
pub fn spectral_abscissa(m: &MetzlerMatrix, tol: f64, max_iter: usize) -> Result<SpectralResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if !m.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let n = m.n();
    let sigma = (0..n)
        .map(|i| m.entry(i, i).abs())
        .fold(0.0f64, f64::max)
        + 1.0;
    let shifted = m.shifted(sigma);

    let mut v = vec![1.0; n];
    let mut w = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for k in 1..=max_iter {
        shifted.mul_into(&v, &mut w);
        // v > 0 and primitive shift keep w strictly positive
        let rho = w.iter().fold(0.0f64, |a, &b| a.max(b));
        residual = v
            .iter()
            .zip(&w)
            .map(|(vi, wi)| (wi - rho * vi).abs())
            .fold(0.0f64, f64::max);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / rho;
        }
        if residual <= tol {
            return Ok(SpectralResult {
                abscissa: rho - sigma,
                perron: v,
                iterations: k,
                residual,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

/// Spectral abscissa with the default tolerance and iteration budget.
pub fn spectral_abscissa_default(m: &MetzlerMatrix) -> Result<SpectralResult> {
    spectral_abscissa(m, DEFAULT_TOL, DEFAULT_MAX_ITER)
}
