//! Directed interconnection graphs, cluster partitions and the structural
//! quantities derived from them.
//!
//! Convention: `a[i][j] = 1` means the edge `(i, j)` exists and node `i`
//! is influenced by node `j`. Node ids are 0-based everywhere in the
//! library; configuration files are 1-based and converted on ingest.

use serde::Serialize;
use thiserror::Error;

use crate::matrix::Matrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("adjacency matrix is not square ({rows} rows, row {row} has {len} entries)")]
    NotSquare { rows: usize, row: usize, len: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("adjacency entry ({i}, {j}) = {value} is not 0 or 1")]
    NonBinary { i: usize, j: usize, value: i64 },
    #[error("partition needs at least two clusters, got {0}")]
    TooFewClusters(usize),
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("node {node} is out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("node {0} appears in more than one cluster")]
    DuplicateNode(usize),
    #[error("node {0} is not covered by any cluster")]
    UncoveredNode(usize),
    #[error("expected {expected} representatives, got {got}")]
    RepresentativeCount { expected: usize, got: usize },
    #[error("representative {node} is not a member of cluster {cluster}")]
    RepresentativeNotInCluster { node: usize, cluster: usize },
    #[error("representative {0} is not in the given node set")]
    RepresentativeNotInSet(usize),
}

/// A validated simple digraph without self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct Digraph {
    n: usize,
    adjacency: Vec<bool>,
    edges: Vec<(usize, usize)>,
    /// Position of each edge in `edges`, indexed by `i * n + j`.
    edge_slot: Vec<Option<usize>>,
}

impl Digraph {
    /// Validates a 0/1 adjacency matrix. Edges are enumerated row-major,
    /// which fixes the order of every per-edge vector in the crate.
    pub fn from_adjacency(rows: &[Vec<i64>]) -> Result<Self, GraphError> {
        let n = rows.len();
        let mut adjacency = vec![false; n * n];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(GraphError::NotSquare {
                    rows: n,
                    row: i,
                    len: row.len(),
                });
            }
            for (j, &value) in row.iter().enumerate() {
                match value {
                    0 => {}
                    1 if i == j => return Err(GraphError::SelfLoop(i)),
                    1 => adjacency[i * n + j] = true,
                    _ => return Err(GraphError::NonBinary { i, j, value }),
                }
            }
        }
        Ok(Self::from_bool_adjacency(n, adjacency))
    }

    /// Builds a digraph from an edge list, ignoring duplicates.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut adjacency = vec![false; n * n];
        for &(i, j) in edges {
            for node in [i, j] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { node, n });
                }
            }
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            adjacency[i * n + j] = true;
        }
        Ok(Self::from_bool_adjacency(n, adjacency))
    }

    pub fn complete(n: usize) -> Self {
        let adjacency = (0..n * n).map(|x| x / n != x % n).collect();
        Self::from_bool_adjacency(n, adjacency)
    }

    fn from_bool_adjacency(n: usize, adjacency: Vec<bool>) -> Self {
        let mut edges = Vec::new();
        let mut edge_slot = vec![None; n * n];
        for i in 0..n {
            for j in 0..n {
                if adjacency[i * n + j] {
                    edge_slot[i * n + j] = Some(edges.len());
                    edges.push((i, j));
                }
            }
        }
        Self {
            n,
            adjacency,
            edges,
            edge_slot,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.n + j]
    }

    /// `a_ij` as an integer.
    pub fn a(&self, i: usize, j: usize) -> i64 {
        i64::from(self.has_edge(i, j))
    }

    /// Edges `(i, j)` in row-major order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.edge_slot[i * self.n + j]
    }

    /// Nodes `j` with `a_ij = 1`.
    pub fn in_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.has_edge(i, j))
    }

    pub fn adjacency_rows(&self) -> Vec<Vec<i64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.a(i, j)).collect())
            .collect()
    }
}

/// An ordered partition of the nodes into clusters, with one
/// representative node per cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    clusters: Vec<Vec<usize>>,
    representatives: Vec<usize>,
    membership: Vec<usize>,
}

impl Partition {
    /// Validates `clusters` against a graph with `n` nodes. When
    /// `representatives` is `None` the last node of each cluster is used.
    pub fn new(
        n: usize,
        clusters: Vec<Vec<usize>>,
        representatives: Option<Vec<usize>>,
    ) -> Result<Self, GraphError> {
        if clusters.len() < 2 {
            return Err(GraphError::TooFewClusters(clusters.len()));
        }
        let mut membership = vec![usize::MAX; n];
        for (s, cluster) in clusters.iter().enumerate() {
            if cluster.is_empty() {
                return Err(GraphError::EmptyCluster(s));
            }
            for &node in cluster {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { node, n });
                }
                if membership[node] != usize::MAX {
                    return Err(GraphError::DuplicateNode(node));
                }
                membership[node] = s;
            }
        }
        if let Some(node) = membership.iter().position(|&s| s == usize::MAX) {
            return Err(GraphError::UncoveredNode(node));
        }
        let representatives = match representatives {
            Some(reps) => {
                if reps.len() != clusters.len() {
                    return Err(GraphError::RepresentativeCount {
                        expected: clusters.len(),
                        got: reps.len(),
                    });
                }
                for (s, &node) in reps.iter().enumerate() {
                    if node >= n || membership[node] != s {
                        return Err(GraphError::RepresentativeNotInCluster { node, cluster: s });
                    }
                }
                reps
            }
            None => clusters.iter().map(|c| c[c.len() - 1]).collect(),
        };
        Ok(Self {
            clusters,
            representatives,
            membership,
        })
    }

    /// Every node in its own cluster.
    pub fn singletons(n: usize) -> Result<Self, GraphError> {
        Self::new(n, (0..n).map(|i| vec![i]).collect(), None)
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn node_count(&self) -> usize {
        self.membership.len()
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn members(&self, s: usize) -> &[usize] {
        &self.clusters[s]
    }

    pub fn representative(&self, s: usize) -> usize {
        self.representatives[s]
    }

    pub fn representatives(&self) -> &[usize] {
        &self.representatives
    }

    pub fn cluster_of(&self, node: usize) -> usize {
        self.membership[node]
    }

    pub fn same_cluster(&self, i: usize, j: usize) -> bool {
        self.membership[i] == self.membership[j]
    }

    pub fn is_representative(&self, node: usize) -> bool {
        self.representatives[self.membership[node]] == node
    }

    /// Non-representative nodes, cluster by cluster in member order. This is
    /// the ordering of the phase-error vector.
    pub fn error_nodes(&self) -> Vec<usize> {
        self.clusters
            .iter()
            .zip(&self.representatives)
            .flat_map(|(c, &rep)| c.iter().copied().filter(move |&i| i != rep))
            .collect()
    }

    pub fn with_representatives(&self, representatives: Vec<usize>) -> Result<Self, GraphError> {
        Self::new(
            self.node_count(),
            self.clusters.clone(),
            Some(representatives),
        )
    }
}

/// Intra/inter edge counts and per cluster pair in-degrees.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cardinalities {
    pub c_in: usize,
    pub c_out: usize,
    /// `c_sr[s][r]`: inter-cluster in-degree of nodes in cluster `s` from
    /// cluster `r`. When nodes of `s` disagree the largest observed value is
    /// stored; the disagreement itself is reported by the (A2) check.
    pub c_sr: Matrix<usize>,
    pub c_max: usize,
}

impl Cardinalities {
    /// Sum of `c_sr` over all ordered pairs `s != r`.
    pub fn inter_sum(&self) -> usize {
        let m = self.c_sr.rows();
        (0..m)
            .flat_map(|s| (0..m).filter(move |&r| r != s).map(move |r| (s, r)))
            .map(|(s, r)| self.c_sr[(s, r)])
            .sum()
    }
}

/// Number of edges into `i` from the nodes of cluster `r`.
pub fn in_degree_from(g: &Digraph, p: &Partition, i: usize, r: usize) -> usize {
    p.members(r).iter().filter(|&&j| g.has_edge(i, j)).count()
}

pub fn cluster_cardinalities(g: &Digraph, p: &Partition) -> Cardinalities {
    let m = p.cluster_count();
    let c_in = g
        .edges()
        .iter()
        .filter(|&&(i, j)| p.same_cluster(i, j))
        .count();
    let c_out = g.edge_count() - c_in;
    let c_sr = Matrix::from_fn(m, m, |s, r| {
        if s == r {
            return 0;
        }
        p.members(s)
            .iter()
            .map(|&i| in_degree_from(g, p, i, r))
            .max()
            .unwrap_or(0)
    });
    let c_max = (0..m)
        .map(|s| (0..m).filter(|&r| r != s).map(|r| c_sr[(s, r)]).sum())
        .max()
        .unwrap_or(0);
    Cardinalities {
        c_in,
        c_out,
        c_sr,
        c_max,
    }
}

/// Cardinalities together with the residual matrices of every cluster.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterStructure {
    pub cardinalities: Cardinalities,
    pub residuals: Vec<ResidualMatrices>,
}

impl ClusterStructure {
    pub fn new(g: &Digraph, p: &Partition) -> Self {
        Self {
            cardinalities: cluster_cardinalities(g, p),
            residuals: (0..p.cluster_count())
                .map(|s| residual_matrices(g, p, s))
                .collect(),
        }
    }
}

/// Intra-cluster adjacency, its reduction with respect to the
/// representative, and the matching degree matrices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualMatrices {
    /// Adjacency of the intra-cluster subgraph, in cluster member order.
    pub a_s: Matrix<i64>,
    /// Degree matrix of `a_s` (row sums on the diagonal).
    pub d_s: Matrix<i64>,
    /// Position of the representative in the cluster member list.
    pub rep_position: usize,
    /// `a_s` with the representative's row and column removed.
    pub a_s_minus: Matrix<i64>,
    /// `a_s_minus` minus the matrix whose every row is the representative's
    /// reduced row of `a_s`.
    pub a_tilde: Matrix<i64>,
    /// `d_s` with the representative's row and column removed.
    pub d_s_minus: Matrix<i64>,
}

impl ResidualMatrices {
    /// `Ã_s − D_s⁻`, the matrix governing linearized intra-cluster errors.
    pub fn stability_matrix(&self) -> Matrix<i64> {
        let n = self.a_tilde.rows();
        Matrix::from_fn(n, n, |i, j| self.a_tilde[(i, j)] - self.d_s_minus[(i, j)])
    }
}

/// Residual matrices of cluster `s` with respect to its representative.
pub fn residual_matrices(g: &Digraph, p: &Partition, s: usize) -> ResidualMatrices {
    residual_matrices_for(g, p.members(s), p.representative(s))
        .expect("partition representatives are cluster members")
}

/// Residual matrices of an arbitrary node set with respect to `rep`.
pub fn residual_matrices_for(
    g: &Digraph,
    cluster: &[usize],
    rep: usize,
) -> Result<ResidualMatrices, GraphError> {
    let rep_position = cluster
        .iter()
        .position(|&i| i == rep)
        .ok_or(GraphError::RepresentativeNotInSet(rep))?;
    let n_s = cluster.len();
    let a_s = Matrix::from_fn(n_s, n_s, |x, y| g.a(cluster[x], cluster[y]));
    let d_s = Matrix::from_fn(n_s, n_s, |x, y| {
        if x == y {
            a_s.row(x).iter().sum()
        } else {
            0
        }
    });
    let kept: Vec<usize> = (0..n_s).filter(|&x| x != rep_position).collect();
    let reduce = |m: &Matrix<i64>| Matrix::from_fn(kept.len(), kept.len(), |x, y| m[(kept[x], kept[y])]);
    let a_s_minus = reduce(&a_s);
    let d_s_minus = reduce(&d_s);
    let a_tilde = Matrix::from_fn(kept.len(), kept.len(), |x, y| {
        a_s_minus[(x, y)] - a_s[(rep_position, kept[y])]
    });
    Ok(ResidualMatrices {
        a_s,
        d_s,
        rep_position,
        a_s_minus,
        a_tilde,
        d_s_minus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use proptest::prelude::*;

    fn m(rows: Vec<Vec<i64>>) -> Matrix<i64> {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn build_example_graphs() {
        assert_eq!(presets::example2_graph().edge_count(), 14);
        assert_eq!(presets::example1_graph().edge_count(), 20);
        let g = Digraph::from_adjacency(&[vec![0]]).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn rejects_malformed_adjacency() {
        assert!(matches!(
            Digraph::from_adjacency(&[vec![0, 1], vec![0]]),
            Err(GraphError::NotSquare { .. })
        ));
        assert_eq!(
            Digraph::from_adjacency(&[vec![0, 1], vec![0, 1]]),
            Err(GraphError::SelfLoop(1))
        );
        assert!(matches!(
            Digraph::from_adjacency(&[vec![0, 2], vec![0, 0]]),
            Err(GraphError::NonBinary { value: 2, .. })
        ));
    }

    #[test]
    fn partition_validation() {
        assert_eq!(
            Partition::new(3, vec![vec![0, 1, 2]], None),
            Err(GraphError::TooFewClusters(1))
        );
        assert_eq!(
            Partition::new(3, vec![vec![0, 1], vec![1, 2]], None),
            Err(GraphError::DuplicateNode(1))
        );
        assert_eq!(
            Partition::new(3, vec![vec![0], vec![1]], None),
            Err(GraphError::UncoveredNode(2))
        );
        assert!(matches!(
            Partition::new(3, vec![vec![0], vec![1, 2]], Some(vec![0, 0])),
            Err(GraphError::RepresentativeNotInCluster { node: 0, cluster: 1 })
        ));
        let p = Partition::new(3, vec![vec![0, 1], vec![2]], None).unwrap();
        assert_eq!(p.representatives(), &[1, 2]);
        assert_eq!(p.error_nodes(), vec![0]);
    }

    #[test]
    fn cardinalities_example1() {
        let c = cluster_cardinalities(&presets::example1_graph(), &presets::example1_partition());
        assert_eq!(c.c_sr[(0, 1)], 2);
        assert_eq!(c.c_sr[(1, 0)], 3);
        assert_eq!(c.c_max, 3);
        assert_eq!(c.c_out, 12);
        assert_eq!(c.c_in, 8);
        assert_eq!(c.inter_sum(), 5);
    }

    #[test]
    fn cardinalities_example2() {
        let c = cluster_cardinalities(&presets::example2_graph(), &presets::example2_partition());
        assert_eq!(c.c_sr[(0, 1)], 1);
        assert_eq!(c.c_sr[(1, 0)], 1);
        assert_eq!(c.c_max, 1);
        assert_eq!(c.c_out, 7);
        assert_eq!(c.c_in, 7);
    }

    #[test]
    fn no_inter_cluster_edges() {
        let g = Digraph::from_edges(4, &[(0, 1), (1, 0), (2, 3)]).unwrap();
        let p = Partition::new(4, vec![vec![0, 1], vec![2, 3]], None).unwrap();
        let c = cluster_cardinalities(&g, &p);
        assert_eq!(c.c_out, 0);
        assert_eq!(c.c_sr.as_slice(), &[0, 0, 0, 0]);
        assert_eq!(c.c_max, 0);
    }

    #[test]
    fn residual_matrices_example2() {
        let g = presets::example2_graph();
        let p = presets::example2_partition();
        let r1 = residual_matrices(&g, &p, 0);
        assert_eq!(r1.a_s, m(vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]));
        assert_eq!(r1.a_tilde, m(vec![vec![-1, 1], vec![-1, 0]]));
        assert_eq!(r1.d_s_minus, m(vec![vec![1, 0], vec![0, 1]]));
        assert_eq!(r1.stability_matrix(), m(vec![vec![-2, 1], vec![-1, -1]]));

        let r2 = residual_matrices(&g, &p, 1);
        assert_eq!(
            r2.a_tilde,
            m(vec![vec![-1, 1, 0], vec![-1, 0, 1], vec![-1, 0, 0]])
        );
        assert_eq!(
            r2.d_s_minus,
            m(vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]])
        );
    }

    #[test]
    fn singleton_cluster_has_empty_residuals() {
        let g = Digraph::complete(3);
        let p = Partition::new(3, vec![vec![0, 1], vec![2]], None).unwrap();
        let r = residual_matrices(&g, &p, 1);
        assert_eq!((r.a_tilde.rows(), r.a_tilde.cols()), (0, 0));
        assert_eq!(r.stability_matrix().rows(), 0);
    }

    #[test]
    fn representative_must_be_member() {
        let g = Digraph::complete(4);
        assert!(residual_matrices_for(&g, &[0, 1], 3).is_err());
    }

    #[test]
    fn complete_digraph_gives_scaled_identity() {
        for n_s in 2..=6 {
            let g = Digraph::complete(n_s + 2);
            let cluster: Vec<usize> = (0..n_s).collect();
            for &rep in &cluster {
                let h = residual_matrices_for(&g, &cluster, rep).unwrap().stability_matrix();
                let expected = Matrix::from_fn(n_s - 1, n_s - 1, |i, j| {
                    if i == j {
                        -(n_s as i64)
                    } else {
                        0
                    }
                });
                assert_eq!(h, expected, "n_s={n_s} rep={rep}");
            }
        }
    }

    fn random_graph_and_partition() -> impl Strategy<Value = (Digraph, Partition)> {
        (2usize..=8)
            .prop_flat_map(|n| {
                (
                    Just(n),
                    proptest::collection::vec(any::<bool>(), n * n),
                    proptest::collection::vec(0usize..n, n),
                )
            })
            .prop_filter_map("need two clusters", |(n, bits, labels)| {
                let edges: Vec<_> = (0..n * n)
                    .filter(|&x| bits[x] && x / n != x % n)
                    .map(|x| (x / n, x % n))
                    .collect();
                let g = Digraph::from_edges(n, &edges).unwrap();
                let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); n];
                for (node, &l) in labels.iter().enumerate() {
                    clusters[l].push(node);
                }
                clusters.retain(|c| !c.is_empty());
                Partition::new(n, clusters, None).ok().map(|p| (g, p))
            })
    }

    proptest! {
        #[test]
        fn edge_counts_add_up((g, p) in random_graph_and_partition()) {
            let c = cluster_cardinalities(&g, &p);
            let mut intra = 0;
            let mut inter = 0;
            for i in 0..g.node_count() {
                for j in 0..g.node_count() {
                    if g.has_edge(i, j) {
                        if p.cluster_of(i) == p.cluster_of(j) { intra += 1 } else { inter += 1 }
                    }
                }
            }
            prop_assert_eq!(c.c_in, intra);
            prop_assert_eq!(c.c_out, inter);
            prop_assert_eq!(c.c_in + c.c_out, g.edge_count());
        }

        #[test]
        fn relabeling_non_representatives_is_a_similarity(
            (g, p) in random_graph_and_partition(),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for s in 0..p.cluster_count() {
                let members = p.members(s).to_vec();
                let rep = p.representative(s);
                let mut shuffled = members.clone();
                shuffled.shuffle(&mut rng);
                let h1 = residual_matrices_for(&g, &members, rep).unwrap().stability_matrix();
                let h2 = residual_matrices_for(&g, &shuffled, rep).unwrap().stability_matrix();
                // reduced index of each node in both orderings
                let order1: Vec<usize> = members.iter().copied().filter(|&i| i != rep).collect();
                let order2: Vec<usize> = shuffled.iter().copied().filter(|&i| i != rep).collect();
                for (x, a) in order1.iter().enumerate() {
                    for (y, b) in order1.iter().enumerate() {
                        let x2 = order2.iter().position(|i| i == a).unwrap();
                        let y2 = order2.iter().position(|i| i == b).unwrap();
                        prop_assert_eq!(h1[(x, y)], h2[(x2, y2)]);
                    }
                }
            }
        }
    }
}
