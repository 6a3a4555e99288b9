//! Regime classification and the endemic equilibrium of the controlled
//! system.
//!
//! When s(BA − Γ) > 0 the controlled dynamics admit a unique endemic
//! equilibrium with 0 < x̄_i ≤ 1/c_i. Componentwise the equilibrium condition
//! gamma_i x = beta_i (1 − c_i x)(1 − x) S_i is a quadratic in x whose
//! smaller root lies in (0, 1/c_i]; sweeping that scalar solve over the nodes
//! (Gauss–Seidel, started from the cap vector) converges to x̄.

use serde::Serialize;

use crate::dynamics::{self, EpidemicParams};
use crate::graph::Network;
use crate::spectral::{self, build_linearized};
use crate::{Error, Result};

/// Residual tolerance ‖closed_loop_field(x̄)‖∞ for the solver.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Gauss–Seidel sweep budget.
pub const DEFAULT_MAX_SWEEPS: usize = 100_000;
/// |s| below this is treated as the boundary case s = 0 (classified DFE,
/// flagged marginal).
pub const MARGINAL_BAND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    #[serde(rename = "DFE")]
    DfeOnly,
    #[serde(rename = "endemic")]
    Endemic,
}

/// Outcome of classification: the regime, and the endemic point when it
/// exists.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumReport {
    pub regime: Regime,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endemic_point: Option<Vec<f64>>,
    /// ‖closed_loop_field(x̄)‖∞ (0 for the DFE-only regime).
    pub residual: f64,
    pub iterations: usize,
    /// True when |s(BA − Γ)| fell inside the marginal band around zero.
    pub marginal: bool,
}

/// Endemic solver output.
#[derive(Debug, Clone)]
pub struct EndemicSolution {
    pub x: Vec<f64>,
    pub residual: f64,
    pub sweeps: usize,
}

/// Classify the closed-loop regime from the spectral abscissa of BA − Γ and,
/// in the endemic case, solve for x̄.
pub fn classify(params: &EpidemicParams, net: &Network, tol: f64) -> Result<EquilibriumReport> {
    let m = build_linearized(params, net)?;
    let s = spectral::spectral_abscissa_default(&m)?.abscissa;
    classify_with_abscissa(params, net, tol, s)
}

/// Classification when the caller has already computed s(BA − Γ).
pub fn classify_with_abscissa(
    params: &EpidemicParams,
    net: &Network,
    tol: f64,
    abscissa: f64,
) -> Result<EquilibriumReport> {
    let marginal = abscissa.abs() <= MARGINAL_BAND;
    if abscissa <= MARGINAL_BAND {
        return Ok(EquilibriumReport {
            regime: Regime::DfeOnly,
            endemic_point: None,
            residual: 0.0,
            iterations: 0,
            marginal,
        });
    }
    let sol = solve_endemic(params, net, tol, DEFAULT_MAX_SWEEPS)?;
    Ok(EquilibriumReport {
        regime: Regime::Endemic,
        endemic_point: Some(sol.x),
        residual: sol.residual,
        iterations: sol.sweeps,
        marginal,
    })
}

/// Smaller root of beta*c*S x² − (beta(1+c)S + gamma) x + beta*S = 0 in
/// [0, 1/c]: the componentwise equilibrium level for a frozen neighbor sum S.
/// Returns 0 when S = 0, and 1/c when gamma = 0 (zero healing saturates at
/// the cap).
pub fn scalar_cap_root(beta: f64, gamma: f64, c: f64, neighbor_sum: f64) -> f64 {
    debug_assert!(neighbor_sum >= 0.0);
    if neighbor_sum == 0.0 {
        return 0.0;
    }
    if gamma == 0.0 {
        return 1.0 / c;
    }
    let a = beta * c * neighbor_sum;
    let b = beta * (1.0 + c) * neighbor_sum + gamma;
    let cc = beta * neighbor_sum;
    let disc = b * b - 4.0 * a * cc;
    // the quadratic is positive at 0 and equals -gamma/c at 1/c, so the
    // discriminant cannot be negative on this domain
    assert!(disc >= 0.0, "negative discriminant {disc}");
    // cancellation-free form of (b - sqrt(disc)) / (2a)
    2.0 * cc / (b + disc.sqrt())
}

/// Gauss–Seidel solve of the endemic equilibrium, initialized at the cap
/// vector. Iterates are monotone decreasing in practice; if the residual
/// stalls the loop switches to damped Jacobi (factor 0.5).
pub fn solve_endemic(
    params: &EpidemicParams,
    net: &Network,
    tol: f64,
    max_sweeps: usize,
) -> Result<EndemicSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let m = build_linearized(params, net)?;
    let s = spectral::spectral_abscissa_default(&m)?.abscissa;
    if s <= 0.0 {
        return Err(Error::WrongRegime { abscissa: s });
    }

    let n = net.n();
    let mut x: Vec<f64> = params.cap_c().iter().map(|c| 1.0 / c).collect();
    let mut field = vec![0.0; n];
    let mut damped_jacobi = false;
    let mut residual_100_ago = f64::INFINITY;
    let mut residual = f64::INFINITY;

    for sweep in 1..=max_sweeps {
        if damped_jacobi {
            let prev = x.clone();
            for i in 0..n {
                let s_i = dot(net.row(i), &prev);
                let root = scalar_cap_root(
                    params.beta()[i],
                    params.gamma()[i],
                    params.cap_c()[i],
                    s_i,
                );
                x[i] = 0.5 * prev[i] + 0.5 * root;
            }
        } else {
            for i in 0..n {
                let s_i = dot(net.row(i), &x);
                x[i] = scalar_cap_root(
                    params.beta()[i],
                    params.gamma()[i],
                    params.cap_c()[i],
                    s_i,
                );
            }
        }

        dynamics::closed_loop_into(params, net, &x, &mut field);
        residual = field.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if residual <= tol {
            return Ok(EndemicSolution {
                x,
                residual,
                sweeps: sweep,
            });
        }
        if sweep % 100 == 0 {
            if !damped_jacobi && residual > (1.0 - 1e-3) * residual_100_ago {
                damped_jacobi = true;
            }
            residual_100_ago = residual;
        }
    }
    Err(Error::NoConvergence {
        iterations: max_sweeps,
        residual,
    })
}

/// ‖closed_loop_field(params, net, x)‖∞: how far x is from being an
/// equilibrium of the controlled system.
pub fn equilibrium_residual(params: &EpidemicParams, net: &Network, x: &[f64]) -> Result<f64> {
    let f = dynamics::closed_loop_field(params, net, x)?;
    Ok(f.iter().fold(0.0f64, |a, &b| a.max(b.abs())))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn cross_net() -> Network {
        Network::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    /// Independent root finder for gamma*x = beta*(1-c*x)(1-x)*S on [0, 1/c]
    /// by bisection on g(x) = beta*(1-c*x)(1-x)*S - gamma*x, which is
    /// positive at 0+ and negative at 1/c for S, gamma > 0.
    fn bisect_cap_root(beta: f64, gamma: f64, c: f64, s: f64) -> f64 {
        let g = |x: f64| beta * (1.0 - c * x) * (1.0 - x) * s - gamma * x;
        let mut lo = 0.0;
        let mut hi = 1.0 / c;
        assert!(g(lo) >= 0.0 && g(hi) <= 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn classify_dfe_pair() {
        // s = 0.3 - 0.5 = -0.2
        let params = EpidemicParams::uniform(2, 0.3, 0.5, 2.0).unwrap();
        let report = classify(&params, &cross_net(), DEFAULT_TOL).unwrap();
        assert_eq!(report.regime, Regime::DfeOnly);
        assert!(report.endemic_point.is_none());
        assert!(!report.marginal);
    }

    #[test]
    fn classify_endemic_pair_closed_form() {
        let params = EpidemicParams::uniform(2, 1.0, 0.5, 2.0).unwrap();
        let report = classify(&params, &cross_net(), DEFAULT_TOL).unwrap();
        assert_eq!(report.regime, Regime::Endemic);
        let q = (3.0 - 5.0f64.sqrt()) / 4.0; // 0.19098300562505258
        let x = report.endemic_point.unwrap();
        assert!((x[0] - q).abs() < 1e-10, "{} vs {q}", x[0]);
        assert!((x[1] - q).abs() < 1e-10);
        assert!(report.residual <= DEFAULT_TOL);
    }

    #[test]
    fn classify_strong_healing_is_dfe() {
        let params = EpidemicParams::uniform(2, 1.0, 10.0, 2.0).unwrap();
        let report = classify(&params, &cross_net(), DEFAULT_TOL).unwrap();
        assert_eq!(report.regime, Regime::DfeOnly);
    }

    #[test]
    fn marginal_band_classifies_dfe() {
        let params = EpidemicParams::uniform(2, 1.0, 0.5, 2.0).unwrap();
        let report = classify_with_abscissa(&params, &cross_net(), DEFAULT_TOL, 5e-9).unwrap();
        assert_eq!(report.regime, Regime::DfeOnly);
        assert!(report.marginal);
    }

    #[test]
    fn scalar_root_examples() {
        let q = (3.0 - 5.0f64.sqrt()) / 4.0;
        assert!((scalar_cap_root(1.0, 0.5, 2.0, q) - q).abs() < 1e-15);
        assert_eq!(scalar_cap_root(0.7, 0.2, 3.0, 0.0), 0.0);
        assert_eq!(scalar_cap_root(1.0, 0.0, 2.0, 0.5), 0.5);
    }

    #[test]
    fn scalar_root_in_range_and_matches_bisection() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..500 {
            let beta = rng.gen_range(0.05..2.0);
            let gamma = rng.gen_range(1e-3..2.0);
            let c = rng.gen_range(1.01..6.0);
            let s = rng.gen_range(1e-6..3.0);
            let root = scalar_cap_root(beta, gamma, c, s);
            assert!(root > 0.0 && root <= 1.0 / c, "root {root} out of (0, 1/c]");
            let oracle = bisect_cap_root(beta, gamma, c, s);
            assert!(
                (root - oracle).abs() < 1e-12,
                "{root} vs bisection {oracle}"
            );
        }
    }

    #[test]
    fn solve_scalar_node_self_loop() {
        // self-consistency gamma = beta (1 - c x)(1 - x) reduces to
        // 2x^2 - 3x + 0.9 = 0; smaller root (3 - sqrt(1.8)) / 4
        let net = Network::from_rows(vec![vec![1.0]]).unwrap();
        let params = EpidemicParams::uniform(1, 1.0, 0.1, 2.0).unwrap();
        let sol = solve_endemic(&params, &net, 1e-13, DEFAULT_MAX_SWEEPS).unwrap();
        let expected = (3.0 - 1.8f64.sqrt()) / 4.0; // 0.41458980337503153
        assert!((sol.x[0] - expected).abs() < 1e-11, "{} vs {expected}", sol.x[0]);
        assert!(sol.x[0] > 0.0 && sol.x[0] <= 0.5);
        assert!(equilibrium_residual(&params, &net, &sol.x).unwrap() <= 1e-13);
    }

    #[test]
    fn solve_rejects_wrong_regime() {
        let params = EpidemicParams::uniform(2, 0.3, 0.5, 2.0).unwrap();
        match solve_endemic(&params, &cross_net(), DEFAULT_TOL, DEFAULT_MAX_SWEEPS) {
            Err(Error::WrongRegime { abscissa }) => assert!((abscissa + 0.2).abs() < 1e-9),
            other => panic!("expected WrongRegime, got {other:?}"),
        }
    }

    #[test]
    fn residual_examples() {
        let params = EpidemicParams::uniform(2, 1.0, 0.5, 2.0).unwrap();
        let net = cross_net();
        assert_eq!(equilibrium_residual(&params, &net, &[0.0, 0.0]).unwrap(), 0.0);
        // at the cap vector the field is exactly -gamma_i / c_i
        let caps = params.cap_levels();
        let r = equilibrium_residual(&params, &net, &caps).unwrap();
        assert!((r - 0.25).abs() < 1e-15);
    }

    #[test]
    fn uniqueness_probe_many_starts() {
        // solver restarted from scaled cap vectors and random interior points
        // returns the same equilibrium
        let net = graph::random_geometric(10, 10.0, 5.0, 0.3, 0.2, 3).unwrap();
        let params = EpidemicParams::uniform(10, 0.8, 0.2, 2.5).unwrap();
        let tol = 1e-13;
        let reference = solve_endemic(&params, &net, tol, DEFAULT_MAX_SWEEPS).unwrap().x;

        let mut rng = ChaCha12Rng::seed_from_u64(99);
        for trial in 0..52 {
            let start: Vec<f64> = match trial {
                0 => params.cap_levels(),
                1 => params.cap_levels().iter().map(|v| 0.5 * v).collect(),
                _ => params
                    .cap_levels()
                    .iter()
                    .map(|v| rng.gen_range(1e-3..*v))
                    .collect(),
            };
            let x = solve_from(&params, &net, start, tol);
            for i in 0..10 {
                assert!(
                    (x[i] - reference[i]).abs() < 10.0 * tol,
                    "trial {trial} node {i}: {} vs {}",
                    x[i],
                    reference[i]
                );
            }
        }
    }

    /// Same Gauss–Seidel loop but from an arbitrary interior start; used by
    /// the uniqueness probes.
    fn solve_from(params: &EpidemicParams, net: &Network, mut x: Vec<f64>, tol: f64) -> Vec<f64> {
        let n = net.n();
        let mut field = vec![0.0; n];
        for _ in 0..DEFAULT_MAX_SWEEPS {
            for i in 0..n {
                let s_i = dot(net.row(i), &x);
                x[i] = scalar_cap_root(
                    params.beta()[i],
                    params.gamma()[i],
                    params.cap_c()[i],
                    s_i,
                );
            }
            crate::dynamics::closed_loop_into(params, net, &x, &mut field);
            if field.iter().fold(0.0f64, |a, &b| a.max(b.abs())) <= tol {
                return x;
            }
        }
        panic!("no convergence in uniqueness probe");
    }

    #[test]
    fn cap_strictness_under_positive_healing() {
        let net = graph::random_geometric(8, 10.0, 6.0, 0.3, 0.3, 5).unwrap();
        let params = EpidemicParams::uniform(8, 1.0, 0.3, 2.0).unwrap();
        let sol = solve_endemic(&params, &net, 1e-12, DEFAULT_MAX_SWEEPS).unwrap();
        for (xi, cap) in sol.x.iter().zip(params.cap_levels()) {
            assert!(*xi < cap, "{xi} should be strictly below {cap}");
            assert!(*xi > 0.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn raising_healing_lowers_equilibrium(seed in 0u64..50, bump in 0.01f64..0.2) {
            let net = graph::random_geometric(6, 10.0, 6.0, 0.3, 0.3, seed).unwrap();
            let lo = EpidemicParams::uniform(6, 1.0, 0.1, 2.0).unwrap();
            let hi = EpidemicParams::uniform(6, 1.0, 0.1 + bump, 2.0).unwrap();
            let x_lo = solve_endemic(&lo, &net, 1e-12, DEFAULT_MAX_SWEEPS).unwrap().x;
            let x_hi = solve_endemic(&hi, &net, 1e-12, DEFAULT_MAX_SWEEPS).unwrap().x;
            for i in 0..6 {
                prop_assert!(x_hi[i] <= x_lo[i] + 1e-10,
                    "node {i}: {} should not exceed {}", x_hi[i], x_lo[i]);
            }
        }
    }
}
