//! Network parameters and the vector field of the adaptive Kuramoto model
//!
//! ```text
//! dθ_i/dt  = w_i + Σ_j a_ij k_ij sin(θ_j − θ_i)
//! dk_ij/dt = −γ k_ij + μ_ij Γ(θ_j − θ_i)
//! ```
//!
//! Couplings are only stored for edges of the graph.

use serde::Serialize;
use thiserror::Error;

use super::integrator::OdeSystem;
use super::rule::LearningRule;
use crate::graph::{Digraph, Partition};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("expected {expected} natural frequencies, got {got}")]
    FrequencyCount { expected: usize, got: usize },
    #[error("natural frequency of node {0} is not finite")]
    NonFiniteFrequency(usize),
    #[error("{name} must be {requirement}, got {value}")]
    Parameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("partition covers {got} nodes but the graph has {expected}")]
    PartitionSize { expected: usize, got: usize },
    #[error("state has {got_theta} phases and {got_k} couplings, expected {n} and {edges}")]
    StateShape {
        n: usize,
        edges: usize,
        got_theta: usize,
        got_k: usize,
    },
}

/// Parameters of the network `Σ(μ̃, μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub graph: Digraph,
    /// Natural frequencies (rad/s).
    pub omega: Vec<f64>,
    /// Coupling decay rate γ (1/s).
    pub gamma: f64,
    /// Plasticity gain μ of inter-cluster links. Zero is allowed so that
    /// sweeps can include the decoupled limit.
    pub mu_inter: f64,
    /// Plasticity gain μ̃ of intra-cluster links.
    pub mu_intra: f64,
    pub rule: LearningRule,
}

impl NetworkSpec {
    pub fn new(
        graph: Digraph,
        omega: Vec<f64>,
        gamma: f64,
        mu_inter: f64,
        mu_intra: f64,
        rule: LearningRule,
    ) -> Result<Self, SpecError> {
        let spec = Self {
            graph,
            omega,
            gamma,
            mu_inter,
            mu_intra,
            rule,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let n = self.graph.node_count();
        if self.omega.len() != n {
            return Err(SpecError::FrequencyCount {
                expected: n,
                got: self.omega.len(),
            });
        }
        if let Some(i) = self.omega.iter().position(|w| !w.is_finite()) {
            return Err(SpecError::NonFiniteFrequency(i));
        }
        let positive = |name, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(SpecError::Parameter {
                    name,
                    requirement: "positive and finite",
                    value,
                })
            }
        };
        positive("gamma", self.gamma)?;
        positive("mu_intra", self.mu_intra)?;
        if !(self.mu_inter >= 0.0 && self.mu_inter.is_finite()) {
            return Err(SpecError::Parameter {
                name: "mu_inter",
                requirement: "non-negative and finite",
                value: self.mu_inter,
            });
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn w_min(&self) -> f64 {
        self.omega.iter().map(|w| w.abs()).fold(f64::INFINITY, f64::min)
    }

    pub fn w_max(&self) -> f64 {
        self.omega.iter().map(|w| w.abs()).fold(0.0, f64::max)
    }

    /// Intra-cluster coupling value on the synchronization manifold, `μ̃Γ(0)/γ`.
    pub fn k_intra_star(&self) -> f64 {
        self.mu_intra * self.rule.at_zero() / self.gamma
    }

    pub fn with_mu_inter(&self, mu: f64) -> Self {
        Self {
            mu_inter: mu,
            ..self.clone()
        }
    }

    pub fn with_rule(&self, rule: LearningRule) -> Self {
        Self {
            rule,
            ..self.clone()
        }
    }
}

/// Phases (unwrapped, rad) and per-edge coupling strengths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimState {
    pub theta: Vec<f64>,
    pub k: Vec<f64>,
}

impl SimState {
    pub fn new(theta: Vec<f64>, k: Vec<f64>) -> Self {
        Self { theta, k }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(self.theta.len() + self.k.len());
        y.extend_from_slice(&self.theta);
        y.extend_from_slice(&self.k);
        y
    }

    pub fn from_flat(y: &[f64], n: usize) -> Self {
        Self {
            theta: y[..n].to_vec(),
            k: y[n..].to_vec(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().chain(&self.k).all(|x| x.is_finite())
    }
}

/// The full-state vector field with per-edge plasticity gains resolved.
///
/// State layout for [`OdeSystem`]: `[θ_1..θ_N, k_e for e in edge order]`.
#[derive(Debug, Clone)]
pub struct PlasticNetwork<'a> {
    spec: &'a NetworkSpec,
    mu_edge: Vec<f64>,
}

impl<'a> PlasticNetwork<'a> {
    /// Links inside a cluster of `partition` use `mu_intra`, all others
    /// `mu_inter`. Without a partition every link uses `mu_inter`.
    pub fn new(spec: &'a NetworkSpec, partition: Option<&Partition>) -> Result<Self, SpecError> {
        spec.validate()?;
        if let Some(p) = partition {
            if p.node_count() != spec.node_count() {
                return Err(SpecError::PartitionSize {
                    expected: spec.node_count(),
                    got: p.node_count(),
                });
            }
        }
        let mu_edge = spec
            .graph
            .edges()
            .iter()
            .map(|&(i, j)| match partition {
                Some(p) if p.same_cluster(i, j) => spec.mu_intra,
                _ => spec.mu_inter,
            })
            .collect();
        Ok(Self { spec, mu_edge })
    }

    pub fn spec(&self) -> &NetworkSpec {
        self.spec
    }

    pub fn mu_edge(&self) -> &[f64] {
        &self.mu_edge
    }

    pub fn check_state(&self, state: &SimState) -> Result<(), SpecError> {
        let n = self.spec.node_count();
        let edges = self.spec.graph.edge_count();
        if state.theta.len() != n || state.k.len() != edges {
            return Err(SpecError::StateShape {
                n,
                edges,
                got_theta: state.theta.len(),
                got_k: state.k.len(),
            });
        }
        Ok(())
    }

    /// Time derivative of `state`.
    pub fn rhs_full(&self, state: &SimState) -> Result<SimState, SpecError> {
        self.check_state(state)?;
        let mut dy = vec![0.0; self.dim()];
        self.rhs(&state.to_flat(), &mut dy);
        Ok(SimState::from_flat(&dy, self.spec.node_count()))
    }
}

impl OdeSystem for PlasticNetwork<'_> {
    fn dim(&self) -> usize {
        self.spec.node_count() + self.spec.graph.edge_count()
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let n = self.spec.node_count();
        let (theta, k) = y.split_at(n);
        let (dtheta, dk) = dy.split_at_mut(n);
        dtheta.copy_from_slice(&self.spec.omega);
        let gamma = self.spec.gamma;
        for (e, &(i, j)) in self.spec.graph.edges().iter().enumerate() {
            let diff = theta[j] - theta[i];
            dtheta[i] += k[e] * diff.sin();
            dk[e] = -gamma * k[e] + self.mu_edge[e] * self.spec.rule.value(diff);
        }
    }
}
