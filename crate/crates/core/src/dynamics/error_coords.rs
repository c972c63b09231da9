//! Cluster-phase / phase-error coordinates.
//!
//! For each cluster `s` with representative `i_s`, `φ_s = θ_{i_s}` and every
//! other member `i` carries the relative error `e_i = θ_i − φ_s`. Couplings
//! are split into inter-cluster and intra-cluster vectors, each in edge
//! order. The vector field below is written directly in these coordinates.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use super::integrator::OdeSystem;
use super::network::{NetworkSpec, SimState, SpecError};
use crate::graph::Partition;

/// Wraps an angle into `(−π, π]`.
pub fn wrap_pi(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_tau(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y >= TAU {
        0.0
    } else {
        y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorState {
    /// Cluster phases, one per cluster.
    pub phi: Vec<f64>,
    /// Errors of the non-representative nodes, in [`Partition::error_nodes`] order.
    pub e: Vec<f64>,
    pub k_inter: Vec<f64>,
    pub k_intra: Vec<f64>,
}

impl ErrorState {
    pub fn to_flat(&self) -> Vec<f64> {
        [&self.phi[..], &self.e, &self.k_inter, &self.k_intra].concat()
    }

    pub fn dim(&self) -> usize {
        self.phi.len() + self.e.len() + self.k_inter.len() + self.k_intra.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeSlot {
    Inter(usize),
    Intra(usize),
}

/// Index bookkeeping between full and error coordinates.
#[derive(Debug, Clone)]
pub struct CoordinateMap {
    partition: Partition,
    n: usize,
    error_nodes: Vec<usize>,
    /// Position of each node in the error vector; `None` for representatives.
    error_slot: Vec<Option<usize>>,
    inter_edges: Vec<usize>,
    intra_edges: Vec<usize>,
    edge_slot: Vec<EdgeSlot>,
}

impl CoordinateMap {
    pub fn new(spec: &NetworkSpec, partition: &Partition) -> Result<Self, SpecError> {
        let n = spec.node_count();
        if partition.node_count() != n {
            return Err(SpecError::PartitionSize {
                expected: n,
                got: partition.node_count(),
            });
        }
        let error_nodes = partition.error_nodes();
        let mut error_slot = vec![None; n];
        for (x, &i) in error_nodes.iter().enumerate() {
            error_slot[i] = Some(x);
        }
        let mut inter_edges = Vec::new();
        let mut intra_edges = Vec::new();
        let edge_slot = spec
            .graph
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(i, j))| {
                if partition.same_cluster(i, j) {
                    intra_edges.push(e);
                    EdgeSlot::Intra(intra_edges.len() - 1)
                } else {
                    inter_edges.push(e);
                    EdgeSlot::Inter(inter_edges.len() - 1)
                }
            })
            .collect();
        Ok(Self {
            partition: partition.clone(),
            n,
            error_nodes,
            error_slot,
            inter_edges,
            intra_edges,
            edge_slot,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn error_nodes(&self) -> &[usize] {
        &self.error_nodes
    }

    pub fn error_slot(&self, node: usize) -> Option<usize> {
        self.error_slot[node]
    }

    /// Edge indices of inter-cluster links, in edge order.
    pub fn inter_edges(&self) -> &[usize] {
        &self.inter_edges
    }

    /// Edge indices of intra-cluster links, in edge order.
    pub fn intra_edges(&self) -> &[usize] {
        &self.intra_edges
    }

    pub fn edge_slot(&self, edge: usize) -> EdgeSlot {
        self.edge_slot[edge]
    }

    /// Full-state dimension `N + card(ℰ)`, equal to `m + (N − m) + c_out + c_in`.
    pub fn dim(&self) -> usize {
        self.n + self.edge_slot.len()
    }

    /// Phase errors `θ_i − θ_{i_s}` wrapped into `(−π, π]`.
    pub fn phase_errors(&self, theta: &[f64]) -> Vec<f64> {
        self.error_nodes
            .iter()
            .map(|&i| {
                let rep = self.partition.representative(self.partition.cluster_of(i));
                wrap_pi(theta[i] - theta[rep])
            })
            .collect()
    }

    pub fn to_error(&self, state: &SimState) -> ErrorState {
        let phi = self
            .partition
            .representatives()
            .iter()
            .map(|&r| state.theta[r])
            .collect();
        ErrorState {
            phi,
            e: self.phase_errors(&state.theta),
            k_inter: self.inter_edges.iter().map(|&e| state.k[e]).collect(),
            k_intra: self.intra_edges.iter().map(|&e| state.k[e]).collect(),
        }
    }

    pub fn from_error(&self, state: &ErrorState) -> SimState {
        let theta = (0..self.n)
            .map(|i| {
                let phi = state.phi[self.partition.cluster_of(i)];
                match self.error_slot[i] {
                    Some(x) => phi + state.e[x],
                    None => phi,
                }
            })
            .collect();
        let k = self
            .edge_slot
            .iter()
            .map(|slot| match *slot {
                EdgeSlot::Inter(q) => state.k_inter[q],
                EdgeSlot::Intra(q) => state.k_intra[q],
            })
            .collect();
        SimState { theta, k }
    }

    pub fn error_from_flat(&self, y: &[f64]) -> ErrorState {
        let m = self.partition.cluster_count();
        let n_e = self.error_nodes.len();
        let n_out = self.inter_edges.len();
        ErrorState {
            phi: y[..m].to_vec(),
            e: y[m..m + n_e].to_vec(),
            k_inter: y[m + n_e..m + n_e + n_out].to_vec(),
            k_intra: y[m + n_e + n_out..].to_vec(),
        }
    }
}

/// The network written in error coordinates.
///
/// State layout for [`OdeSystem`]: `[φ, e, k_inter, k_intra]`.
#[derive(Debug, Clone)]
pub struct ErrorSystem<'a> {
    spec: &'a NetworkSpec,
    map: CoordinateMap,
    /// Per node: `(source node, slot in k_intra)` of incoming intra-cluster links.
    intra_in: Vec<Vec<(usize, usize)>>,
    /// Per node: `(source node, slot in k_inter)` of incoming inter-cluster links.
    inter_in: Vec<Vec<(usize, usize)>>,
}

impl<'a> ErrorSystem<'a> {
    pub fn new(spec: &'a NetworkSpec, partition: &Partition) -> Result<Self, SpecError> {
        spec.validate()?;
        let map = CoordinateMap::new(spec, partition)?;
        let n = spec.node_count();
        let mut intra_in = vec![Vec::new(); n];
        let mut inter_in = vec![Vec::new(); n];
        for (e, &(i, j)) in spec.graph.edges().iter().enumerate() {
            match map.edge_slot(e) {
                EdgeSlot::Intra(q) => intra_in[i].push((j, q)),
                EdgeSlot::Inter(q) => inter_in[i].push((j, q)),
            }
        }
        Ok(Self {
            spec,
            map,
            intra_in,
            inter_in,
        })
    }

    pub fn map(&self) -> &CoordinateMap {
        &self.map
    }

    /// Time derivative in error coordinates.
    pub fn rhs_error(&self, state: &ErrorState) -> ErrorState {
        assert_eq!(state.dim(), self.dim(), "error state dimension");
        let mut dy = vec![0.0; self.dim()];
        self.rhs(&state.to_flat(), &mut dy);
        self.map.error_from_flat(&dy)
    }
}

impl OdeSystem for ErrorSystem<'_> {
    fn dim(&self) -> usize {
        self.map.dim()
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let p = &self.map.partition;
        let spec = self.spec;
        let m = p.cluster_count();
        let n_e = self.map.error_nodes.len();
        let n_out = self.map.inter_edges.len();
        let (phi, rest) = y.split_at(m);
        let (e, rest) = rest.split_at(n_e);
        let (k_inter, k_intra) = rest.split_at(n_out);

        let err = |i: usize| self.map.error_slot[i].map_or(0.0, |x| e[x]);
        let cluster_phase = |i: usize| phi[p.cluster_of(i)];

        // Σ_{j ∈ P_s} a_ij k_ij sin(e_j − e_i) and the inter-cluster
        // counterpart with the cluster phase offset φ_r − φ_s.
        let n = spec.node_count();
        let mut intra_drive = vec![0.0; n];
        let mut inter_drive = vec![0.0; n];
        for i in 0..n {
            let ei = err(i);
            intra_drive[i] = self.intra_in[i]
                .iter()
                .map(|&(j, q)| k_intra[q] * (err(j) - ei).sin())
                .sum();
            let phi_i = cluster_phase(i);
            inter_drive[i] = self.inter_in[i]
                .iter()
                .map(|&(j, q)| k_inter[q] * (err(j) - ei + cluster_phase(j) - phi_i).sin())
                .sum();
        }

        let (dphi, drest) = dy.split_at_mut(m);
        let (de, drest) = drest.split_at_mut(n_e);
        let (dk_inter, dk_intra) = drest.split_at_mut(n_out);

        for (d, &rep) in dphi.iter_mut().zip(p.representatives()) {
            *d = spec.omega[rep] + intra_drive[rep] + inter_drive[rep];
        }
        for (x, &i) in self.map.error_nodes.iter().enumerate() {
            let rep = p.representative(p.cluster_of(i));
            de[x] = spec.omega[i] - spec.omega[rep] + (intra_drive[i] - intra_drive[rep])
                + (inter_drive[i] - inter_drive[rep]);
        }
        let edges = spec.graph.edges();
        for (q, &edge) in self.map.inter_edges.iter().enumerate() {
            let (i, j) = edges[edge];
            let arg = err(j) - err(i) + cluster_phase(j) - cluster_phase(i);
            dk_inter[q] = -spec.gamma * k_inter[q] + spec.mu_inter * spec.rule.value(arg);
        }
        for (q, &edge) in self.map.intra_edges.iter().enumerate() {
            let (i, j) = edges[edge];
            dk_intra[q] = -spec.gamma * k_intra[q] + spec.mu_intra * spec.rule.value(err(j) - err(i));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::network::PlasticNetwork;
    use crate::graph::Digraph;
    use crate::presets;
    use crate::LearningRule;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wrapping_ranges() {
        assert_eq!(wrap_pi(PI), PI);
        assert!((wrap_pi(-PI) - PI).abs() < 1e-15);
        assert!((wrap_pi(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_tau(0.0), 0.0);
        assert!((wrap_tau(-0.1) - (TAU - 0.1)).abs() < 1e-15);
        assert!(wrap_tau(-1e-20) < TAU);
    }

    #[test]
    fn equal_phases_give_zero_errors() {
        let spec = presets::example2_spec();
        let map = CoordinateMap::new(&spec, &presets::example2_partition()).unwrap();
        let es = map.to_error(&SimState::new(vec![1.3; 7], vec![0.0; 14]));
        assert_eq!(es.phi, vec![1.3, 1.3]);
        assert!(es.e.iter().all(|&x| x == 0.0));
        assert_eq!(es.dim(), map.dim());
    }

    #[test]
    fn example1_initial_errors() {
        let spec = presets::example1_spec();
        let map = CoordinateMap::new(&spec, &presets::example1_partition()).unwrap();
        let es = map.to_error(&SimState::new(presets::example1_initial_theta(), vec![0.0; 20]));
        assert_eq!(map.error_nodes(), &[0, 1, 3]);
        for (got, want) in es.e.iter().zip([-0.25, -0.10, 0.10]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert_eq!(es.k_inter.len(), 12);
        assert_eq!(es.k_intra.len(), 8);
    }

    #[test]
    fn manifold_is_fixed_in_error_and_intra_components() {
        let spec = presets::example2_spec();
        let p = presets::example2_partition();
        let sys = ErrorSystem::new(&spec, &p).unwrap();
        let map = sys.map();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let pair_k: Vec<Vec<f64>> = (0..2)
                .map(|_| (0..2).map(|_| rng.gen_range(-0.1..0.1)).collect())
                .collect();
            let state = ErrorState {
                phi: vec![rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
                e: vec![0.0; map.error_nodes().len()],
                // one shared value per ordered cluster pair, as on the manifold
                k_inter: map
                    .inter_edges()
                    .iter()
                    .map(|&e| {
                        let (i, j) = spec.graph.edges()[e];
                        pair_k[p.cluster_of(i)][p.cluster_of(j)]
                    })
                    .collect(),
                k_intra: vec![spec.k_intra_star(); map.intra_edges().len()],
            };
            let d = sys.rhs_error(&state);
            assert!(d.e.iter().all(|x| x.abs() < 1e-15));
            assert!(d.k_intra.iter().all(|x| x.abs() < 1e-18));
        }
    }

    #[test]
    fn singleton_partition_reduces_to_full_phases() {
        let spec = presets::example1_spec();
        let p = Partition::singletons(5).unwrap();
        let sys = ErrorSystem::new(&spec, &p).unwrap();
        let net = PlasticNetwork::new(&spec, Some(&p)).unwrap();
        let state = SimState::new(presets::example1_initial_theta(), vec![0.01; 20]);
        let es = sys.map().to_error(&state);
        assert!(es.e.is_empty());
        let d = sys.rhs_error(&es);
        let full = net.rhs_full(&state).unwrap();
        for (a, b) in d.phi.iter().zip(&full.theta) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    fn random_state(rng: &mut ChaCha8Rng, spec: &NetworkSpec) -> SimState {
        SimState::new(
            (0..spec.node_count()).map(|_| rng.gen_range(-PI..PI)).collect(),
            (0..spec.graph.edge_count()).map(|_| rng.gen_range(-0.5..0.5)).collect(),
        )
    }

    /// ė_i = θ̇_i − θ̇_{i_s}, φ̇_s = θ̇_{i_s}, k̇ unchanged.
    fn pushforward(map: &CoordinateMap, d: &SimState) -> ErrorState {
        let p = map.partition();
        ErrorState {
            phi: p.representatives().iter().map(|&r| d.theta[r]).collect(),
            e: map
                .error_nodes()
                .iter()
                .map(|&i| d.theta[i] - d.theta[p.representative(p.cluster_of(i))])
                .collect(),
            k_inter: map.inter_edges().iter().map(|&e| d.k[e]).collect(),
            k_intra: map.intra_edges().iter().map(|&e| d.k[e]).collect(),
        }
    }

    #[test]
    fn chain_rule_consistency_on_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (spec, p) in [
            (presets::example1_spec(), presets::example1_partition()),
            (presets::example2_spec(), presets::example2_partition()),
        ] {
            let sys = ErrorSystem::new(&spec, &p).unwrap();
            let net = PlasticNetwork::new(&spec, Some(&p)).unwrap();
            for _ in 0..50 {
                let state = random_state(&mut rng, &spec);
                let want = pushforward(sys.map(), &net.rhs_full(&state).unwrap());
                let got = sys.rhs_error(&sys.map().to_error(&state));
                for (a, b) in got.to_flat().iter().zip(want.to_flat()) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip_is_identity_mod_tau(seed in any::<u64>(), n in 2usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = Digraph::complete(n);
            let split = rng.gen_range(1..n);
            let p = Partition::new(n, vec![(0..split).collect(), (split..n).collect()], None).unwrap();
            let spec = NetworkSpec::new(g, vec![1.0; n], 1.0, 0.1, 0.1, LearningRule::HebbianCos).unwrap();
            let map = CoordinateMap::new(&spec, &p).unwrap();
            let state = SimState::new(
                (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect(),
                (0..n * (n - 1)).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            );
            let back = map.from_error(&map.to_error(&state));
            for (a, b) in back.theta.iter().zip(&state.theta) {
                prop_assert!(wrap_pi(a - b).abs() < 1e-14);
            }
            prop_assert_eq!(back.k, state.k);
        }
    }
}
