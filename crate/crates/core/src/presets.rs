//! The two reference networks used throughout the tests and bundled
//! configurations: a five-node all-to-all network split 3 + 2, and a
//! seven-node sparse network split 3 + 4.

use std::f64::consts::PI;

use crate::dynamics::{LearningRule, NetworkSpec};
use crate::graph::{Digraph, Partition};
use crate::seeding::uniform_per_index;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn example1_graph() -> Digraph {
    Digraph::complete(5)
}

pub fn example1_partition() -> Partition {
    Partition::new(5, vec![vec![0, 1, 2], vec![3, 4]], None).unwrap()
}

pub fn example1_spec() -> NetworkSpec {
    let w2 = 2f64.sqrt() / 3.0;
    NetworkSpec::new(
        example1_graph(),
        vec![0.5, 0.5, 0.5, w2, w2],
        1.0,
        0.01,
        0.01,
        LearningRule::HebbianCos,
    )
    .unwrap()
}

pub fn example1_initial_theta() -> Vec<f64> {
    vec![PI / 2.0, PI / 2.0 + 0.15, PI / 2.0 + 0.25, 0.0, -0.1]
}

/// Initial couplings drawn uniformly from `[-0.015, 0.015]`.
pub fn example1_initial_k(seed: u64) -> Vec<f64> {
    uniform_per_index(seed, -0.015, 0.015, 20)
}

pub fn example2_graph() -> Digraph {
    Digraph::from_adjacency(&[
        vec![0, 1, 0, 0, 1, 0, 0],
        vec![0, 0, 1, 0, 0, 0, 1],
        vec![1, 0, 0, 1, 0, 0, 0],
        vec![0, 1, 0, 0, 1, 0, 0],
        vec![0, 1, 0, 0, 0, 1, 0],
        vec![0, 0, 1, 0, 0, 0, 1],
        vec![0, 0, 1, 1, 0, 0, 0],
    ])
    .unwrap()
}

pub fn example2_partition() -> Partition {
    Partition::new(7, vec![vec![0, 1, 2], vec![3, 4, 5, 6]], None).unwrap()
}

pub fn example2_spec() -> NetworkSpec {
    let w2 = 2.0 / 5f64.sqrt();
    NetworkSpec::new(
        example2_graph(),
        vec![0.5, 0.5, 0.5, w2, w2, w2, w2],
        0.2,
        0.001,
        0.001,
        LearningRule::HebbianCos,
    )
    .unwrap()
}

/// The seventh phase continues the `π/3 − k/10` pattern of nodes 4–6.
pub fn example2_initial_theta() -> Vec<f64> {
    vec![
        PI / 2.0,
        PI / 2.0 + 0.15,
        PI / 2.0 + 0.25,
        PI / 3.0 - 0.1,
        PI / 3.0 - 0.2,
        PI / 3.0 - 0.3,
        PI / 3.0 - 0.4,
    ]
}

/// Initial couplings drawn uniformly from `[-0.01, 0.01]`.
pub fn example2_initial_k(seed: u64) -> Vec<f64> {
    uniform_per_index(seed, -0.01, 0.01, 14)
}

/// A random network with `2 ≤ N ≤ max_n` nodes and a partition for which
/// frequencies agree inside clusters and every node of cluster `s` receives
/// the same number of links from cluster `r`. Intra-cluster links are
/// arbitrary. Plasticity parameters are drawn from small ranges.
pub fn random_equitable_network(seed: u64, max_n: usize) -> (NetworkSpec, Partition) {
    assert!(max_n >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_n);
    let m = rng.gen_range(2..=n);
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(&mut rng);
    // m - 1 distinct cut points give m nonempty consecutive blocks
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(&mut rng);
    let mut cuts = cuts[..m - 1].to_vec();
    cuts.sort_unstable();
    let mut clusters = Vec::with_capacity(m);
    let mut start = 0;
    for &c in cuts.iter().chain(std::iter::once(&n)) {
        let mut block = nodes[start..c].to_vec();
        block.sort_unstable();
        clusters.push(block);
        start = c;
    }
    let mut edges = Vec::new();
    for (s, target) in clusters.iter().enumerate() {
        for (r, source) in clusters.iter().enumerate() {
            if s == r {
                for &i in target {
                    for &j in source {
                        if i != j && rng.gen_bool(0.5) {
                            edges.push((i, j));
                        }
                    }
                }
                continue;
            }
            let c_sr = rng.gen_range(0..=source.len());
            for &i in target {
                for &j in source.choose_multiple(&mut rng, c_sr) {
                    edges.push((i, j));
                }
            }
        }
    }
    let graph = Digraph::from_edges(n, &edges).unwrap();
    let cluster_omega: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..2.0)).collect();
    let mut omega = vec![0.0; n];
    for (s, members) in clusters.iter().enumerate() {
        for &i in members {
            omega[i] = cluster_omega[s];
        }
    }
    let reps = clusters.iter().map(|c| *c.choose(&mut rng).unwrap()).collect();
    let partition = Partition::new(n, clusters, Some(reps)).unwrap();
    let spec = NetworkSpec::new(
        graph,
        omega,
        rng.gen_range(0.1..1.0),
        rng.gen_range(0.0005..0.01),
        rng.gen_range(0.0005..0.01),
        LearningRule::HebbianCos,
    )
    .unwrap();
    (spec, partition)
}
