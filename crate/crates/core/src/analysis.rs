//! Diagnostics around the multi-cluster manifold: target values and
//! bounds, the intra-cluster Jacobian, convergence metrics along a
//! trajectory, empirical plasticity bracketing and the representative probe.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::conditions::{check_all, CheckOptions, ConditionReport};
use crate::dynamics::{
    integrate, CoordinateMap, ErrorState, ErrorSystem, LearningRule, NetworkSpec, PlasticNetwork,
    SimError, SimState, SpecError, StepSettings, Trajectory,
};
use crate::graph::{residual_matrices_for, Cardinalities, ClusterStructure, Digraph, Partition};
use crate::matrix::Matrix;
use crate::spectral::{eig, SpectralError, Spectrum};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error("plasticity grid: {0}")]
    Grid(String),
}

/// Constant intra-cluster coupling on the manifold and the norm bounds on
/// both coupling groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ManifoldTarget {
    pub k_intra_star: f64,
    pub intra_bound: f64,
    pub inter_bound: f64,
}

pub fn manifold_target(spec: &NetworkSpec, card: &Cardinalities) -> ManifoldTarget {
    let delta = spec.rule.delta();
    ManifoldTarget {
        k_intra_star: spec.k_intra_star(),
        intra_bound: spec.mu_intra / spec.gamma * delta * (card.c_in as f64).sqrt(),
        inter_bound: spec.mu_inter / spec.gamma * delta * (card.c_out as f64).sqrt(),
    }
}

/// Linearization of the phase errors at the manifold, one block per cluster.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntraJacobian {
    /// `μ̃Γ(0)/γ`.
    pub scale: f64,
    /// Block `s` has size `n_s − 1`; rows follow the cluster member order
    /// with the representative left out.
    pub blocks: Vec<Matrix<f64>>,
}

impl IntraJacobian {
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(Matrix::rows).sum()
    }

    /// Block-diagonal assembly in error-node order.
    pub fn to_dense(&self) -> Matrix<f64> {
        let n = self.dim();
        let mut out = Matrix::zeros(n, n);
        let mut offset = 0;
        for b in &self.blocks {
            for i in 0..b.rows() {
                for j in 0..b.cols() {
                    out[(offset + i, offset + j)] = b[(i, j)];
                }
            }
            offset += b.rows();
        }
        out
    }

    pub fn spectra(&self) -> Result<Vec<Spectrum>, SpectralError> {
        self.blocks.iter().map(eig).collect()
    }
}

pub fn intra_jacobian(spec: &NetworkSpec, structure: &ClusterStructure) -> IntraJacobian {
    let scale = spec.k_intra_star();
    IntraJacobian {
        scale,
        blocks: structure
            .residuals
            .iter()
            .map(|r| r.stability_matrix().to_f64().scaled(scale))
            .collect(),
    }
}

/// The manifold point used for linearization: all phase errors zero,
/// intra-cluster couplings at their target and inter-cluster couplings zero.
///
/// With nonzero inter-cluster couplings the error equations pick up
/// `O(μ)` diagonal terms from the cluster phase differences, so the
/// linearization is only block diagonal on this slice.
pub fn manifold_point(spec: &NetworkSpec, map: &CoordinateMap, phi: &[f64]) -> ErrorState {
    ErrorState {
        phi: phi.to_vec(),
        e: vec![0.0; map.error_nodes().len()],
        k_inter: vec![0.0; map.inter_edges().len()],
        k_intra: vec![spec.k_intra_star(); map.intra_edges().len()],
    }
}

/// Central-difference Jacobian of `ė` with respect to `e` at the manifold point.
pub fn fd_intra_jacobian(
    spec: &NetworkSpec,
    p: &Partition,
    phi: &[f64],
    step: f64,
) -> Result<Matrix<f64>, AnalysisError> {
    let sys = ErrorSystem::new(spec, p)?;
    let base = manifold_point(spec, sys.map(), phi);
    let n_e = base.e.len();
    let mut jac = Matrix::zeros(n_e, n_e);
    for col in 0..n_e {
        let mut plus = base.clone();
        plus.e[col] += step;
        let mut minus = base.clone();
        minus.e[col] -= step;
        let dp = sys.rhs_error(&plus).e;
        let dm = sys.rhs_error(&minus).e;
        for row in 0..n_e {
            jac[(row, col)] = (dp[row] - dm[row]) / (2.0 * step);
        }
    }
    Ok(jac)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobianCheck {
    pub jacobian: IntraJacobian,
    pub spectra: Vec<Spectrum>,
    pub fd_step: f64,
    pub fd_max_deviation: f64,
}

pub const FD_STEP: f64 = 1e-6;

/// Analytic Jacobian, its block spectra and the largest deviation from
/// central differences, evaluated at cluster phases `phi`.
pub fn jacobian_check(
    spec: &NetworkSpec,
    p: &Partition,
    phi: &[f64],
) -> Result<JacobianCheck, AnalysisError> {
    let structure = ClusterStructure::new(&spec.graph, p);
    let jacobian = intra_jacobian(spec, &structure);
    let fd = fd_intra_jacobian(spec, p, phi, FD_STEP)?;
    Ok(JacobianCheck {
        spectra: jacobian.spectra()?,
        fd_max_deviation: jacobian.to_dense().max_abs_diff(&fd),
        fd_step: FD_STEP,
        jacobian,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSample {
    pub t: f64,
    /// Largest wrapped phase error (rad).
    pub max_abs_error: f64,
    /// Largest deviation of an intra-cluster coupling from its target.
    pub intra_residual: f64,
    /// Euclidean norm of the inter-cluster couplings.
    pub inter_norm: f64,
}

pub fn metrics_at(map: &CoordinateMap, target: &ManifoldTarget, t: f64, state: &SimState) -> MetricSample {
    let max_abs_error = map
        .phase_errors(&state.theta)
        .iter()
        .fold(0.0f64, |acc, e| acc.max(e.abs()));
    let intra_residual = map
        .intra_edges()
        .iter()
        .fold(0.0f64, |acc, &e| acc.max((state.k[e] - target.k_intra_star).abs()));
    let inter_norm = map
        .inter_edges()
        .iter()
        .map(|&e| state.k[e] * state.k[e])
        .sum::<f64>()
        .sqrt();
    MetricSample {
        t,
        max_abs_error,
        intra_residual,
        inter_norm,
    }
}

pub fn convergence_metrics(
    traj: &Trajectory,
    map: &CoordinateMap,
    target: &ManifoldTarget,
) -> Vec<MetricSample> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| metrics_at(map, target, t, s))
        .collect()
}

/// Fixed simulation protocol used to classify one plasticity value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketProtocol {
    pub seed: u64,
    /// Initial phase errors are drawn from `[−perturbation, perturbation]`.
    pub perturbation: f64,
    pub dt: f64,
    /// Convergent iff the final largest phase error is below this.
    pub tolerance: f64,
    /// Upper limit on the simulated horizon.
    pub max_horizon: f64,
    /// Horizon used when no contraction rate can be estimated.
    pub fallback_horizon: f64,
}

impl Default for BracketProtocol {
    fn default() -> Self {
        Self {
            seed: 7,
            perturbation: 0.1,
            dt: 1e-2,
            tolerance: 1e-2,
            max_horizon: 1e5,
            fallback_horizon: 2000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Convergent,
    NotConvergent,
    /// The state became non-finite.
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketRow {
    pub mu: f64,
    pub a1: bool,
    pub a2: bool,
    pub a3: bool,
    pub a4: bool,
    pub existence: bool,
    pub stability: bool,
    pub l7: f64,
    pub l8: Option<f64>,
    pub horizon: f64,
    pub final_max_abs_error: Option<f64>,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketReport {
    /// Empirical only: a convergent run at some `μ` does not certify any
    /// threshold.
    pub rows: Vec<BracketRow>,
    pub largest_convergent: Option<f64>,
}

/// Slowest linear contraction rate of the phase errors, `None` when no
/// cluster has errors or some cluster does not contract.
pub fn contraction_rate(spec: &NetworkSpec, structure: &ClusterStructure) -> Result<Option<f64>, SpectralError> {
    let kappa = spec.k_intra_star();
    let mut rate = f64::INFINITY;
    for r in &structure.residuals {
        let spectrum = eig(&r.stability_matrix().to_f64())?;
        if spectrum.is_empty() {
            continue;
        }
        rate = rate.min(-kappa * spectrum.max_real_part);
    }
    Ok((rate.is_finite() && rate > 0.0).then_some(rate))
}

fn perturbed_start(spec: &NetworkSpec, map: &CoordinateMap, protocol: &BracketProtocol) -> SimState {
    let mut rng = ChaCha8Rng::seed_from_u64(protocol.seed);
    let m = map.partition().cluster_count();
    let phi: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    let mut start = manifold_point(spec, map, &phi);
    let a = protocol.perturbation;
    for e in &mut start.e {
        *e = if a > 0.0 { rng.gen_range(-a..=a) } else { 0.0 };
    }
    map.from_error(&start)
}

fn classify(spec: &NetworkSpec, p: &Partition, protocol: &BracketProtocol) -> Result<BracketRow, AnalysisError> {
    let report: ConditionReport = check_all(spec, p, &CheckOptions::default())?;
    let rate = contraction_rate(spec, &report.structure)?;
    let horizon = match rate {
        Some(r) => (20.0 / r.min(spec.gamma)).min(protocol.max_horizon),
        None => protocol.fallback_horizon,
    };
    let network = PlasticNetwork::new(spec, Some(p))?;
    let map = CoordinateMap::new(spec, p)?;
    let start = perturbed_start(spec, &map, protocol);
    let settings = StepSettings::new(protocol.dt, horizon, usize::MAX);
    let (final_err, classification) = match integrate(&network, Some(&map), &start, &settings, |_, _| {}) {
        Ok(traj) => {
            let err = traj
                .errors
                .last()
                .map(|e| e.iter().fold(0.0f64, |acc, x| acc.max(x.abs())))
                .unwrap_or(0.0);
            let class = if err < protocol.tolerance {
                Classification::Convergent
            } else {
                Classification::NotConvergent
            };
            (Some(err), class)
        }
        Err(SimError::NonFinite { .. }) => (None, Classification::Diverged),
        Err(e) => return Err(e.into()),
    };
    Ok(BracketRow {
        mu: spec.mu_inter,
        a1: report.a1.pass,
        a2: report.a2.pass,
        a3: report.a3.pass,
        a4: report.a4.pass,
        existence: report.existence,
        stability: report.stability,
        l7: report.a3.l7,
        l8: report.a3.l8,
        horizon,
        final_max_abs_error: final_err,
        classification,
    })
}

/// Classifies every inter-cluster plasticity value of `grid` with the
/// fixed protocol. Runs in parallel on the current rayon pool.
pub fn bracket_mu0(
    spec: &NetworkSpec,
    p: &Partition,
    grid: &[f64],
    protocol: &BracketProtocol,
) -> Result<BracketReport, AnalysisError> {
    if let Some(bad) = grid.iter().find(|mu| !mu.is_finite() || **mu < 0.0) {
        return Err(AnalysisError::Grid(format!("values must be finite and >= 0, got {bad}")));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(AnalysisError::Grid("values must be sorted ascending".into()));
    }
    let rows = grid
        .par_iter()
        .map(|&mu| classify(&spec.with_mu_inter(mu), p, protocol))
        .collect::<Result<Vec<_>, _>>()?;
    let largest_convergent = rows
        .iter()
        .rev()
        .find(|r| r.classification == Classification::Convergent)
        .map(|r| r.mu);
    Ok(BracketReport {
        rows,
        largest_convergent,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepresentativeChoice {
    pub representative: usize,
    pub spectrum: Spectrum,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterProbe {
    pub cluster: usize,
    pub choices: Vec<RepresentativeChoice>,
    pub unanimous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepresentativeProbe {
    pub clusters: Vec<ClusterProbe>,
    pub unanimous: bool,
}

/// Evaluates the stability test of every cluster for every possible
/// representative. Reports data only.
pub fn representative_invariance_probe(
    g: &Digraph,
    p: &Partition,
    rule: &LearningRule,
) -> Result<RepresentativeProbe, SpectralError> {
    let gamma0 = rule.at_zero();
    let mut clusters = Vec::with_capacity(p.cluster_count());
    for (s, members) in p.clusters().iter().enumerate() {
        let mut choices = Vec::with_capacity(members.len());
        for &rep in members {
            let residual = residual_matrices_for(g, members, rep).expect("member of its own cluster");
            let spectrum = eig(&residual.stability_matrix().to_f64())?;
            let pass = spectrum.is_empty() || (gamma0 != 0.0 && gamma0.signum() * spectrum.max_real_part < 0.0);
            choices.push(RepresentativeChoice {
                representative: rep,
                spectrum,
                pass,
            });
        }
        let unanimous = choices.windows(2).all(|w| w[0].pass == w[1].pass);
        clusters.push(ClusterProbe {
            cluster: s,
            choices,
            unanimous,
        });
    }
    Ok(RepresentativeProbe {
        unanimous: clusters.iter().all(|c| c.unanimous),
        clusters,
    })
}
