//! Existence conditions (A1)–(A3) and the clusterwise stability
//! condition (A4) for a prescribed partition.
//!
//! * (A1) natural frequencies agree inside every cluster;
//! * (A2) every node of cluster `s` has the same number `c_sr` of incoming
//!   links from cluster `r`;
//! * (A3) `w_min − μγ⁻¹δc_max > 0` and
//!   `4(μ/γ²)δ√c_out · Σ_{s≠r} c_sr · (w_max + μγ⁻¹δc_max)/(w_min − μγ⁻¹δc_max) < 1`;
//! * (A4) `sign Γ(0) · Re λ(Ã_s − D_s⁻) < 0` for every cluster.

use serde::Serialize;

use crate::dynamics::{LearningRule, NetworkSpec};
use crate::graph::{in_degree_from, ClusterStructure, Digraph, Partition};
use crate::spectral::{eig, SpectralError, Spectrum};

/// How (A1) compares frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub enum FrequencyMatch {
    /// Bitwise equality of the configured values.
    #[default]
    Exact,
    /// `|w_i − w_j| ≤ tol · max(|w_i|, |w_j|)`.
    Relative(f64),
}

impl FrequencyMatch {
    pub const RELAXED: Self = Self::Relative(1e-12);

    fn equal(self, a: f64, b: f64) -> bool {
        match self {
            Self::Exact => a == b,
            Self::Relative(tol) => (a - b).abs() <= tol * a.abs().max(b.abs()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckOptions {
    pub frequency_match: FrequencyMatch,
    /// (A4) requires `sign Γ(0) · max Re λ < −margin`.
    pub hurwitz_margin: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            frequency_match: FrequencyMatch::Exact,
            hurwitz_margin: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyViolation {
    pub cluster: usize,
    /// Consecutive cluster members with different frequencies.
    pub nodes: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct A1Report {
    pub pass: bool,
    pub violations: Vec<FrequencyViolation>,
}

pub fn check_a1(spec: &NetworkSpec, p: &Partition, mode: FrequencyMatch) -> A1Report {
    let mut violations = Vec::new();
    for (s, members) in p.clusters().iter().enumerate() {
        for pair in members.windows(2) {
            if !mode.equal(spec.omega[pair[0]], spec.omega[pair[1]]) {
                violations.push(FrequencyViolation {
                    cluster: s,
                    nodes: (pair[0], pair[1]),
                });
            }
        }
    }
    A1Report {
        pass: violations.is_empty(),
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairInDegrees {
    pub s: usize,
    pub r: usize,
    /// Distinct in-degrees from `r` observed over the nodes of `s`, ascending.
    pub degrees: Vec<usize>,
}

impl PairInDegrees {
    pub fn uniform(&self) -> bool {
        self.degrees.len() == 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct A2Report {
    pub pass: bool,
    pub pairs: Vec<PairInDegrees>,
}

pub fn check_a2(g: &Digraph, p: &Partition) -> A2Report {
    let m = p.cluster_count();
    let mut pairs = Vec::new();
    for s in 0..m {
        for r in (0..m).filter(|&r| r != s) {
            let mut degrees: Vec<usize> = p
                .members(s)
                .iter()
                .map(|&i| in_degree_from(g, p, i, r))
                .collect();
            degrees.sort_unstable();
            degrees.dedup();
            pairs.push(PairInDegrees { s, r, degrees });
        }
    }
    A2Report {
        pass: pairs.iter().all(PairInDegrees::uniform),
        pairs,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct A3Report {
    pub pass: bool,
    /// `w_min − μγ⁻¹δc_max` (rad/s).
    pub l7: f64,
    /// Left side of the second inequality; `None` when `l7 ≤ 0`.
    pub l8: Option<f64>,
    pub w_min: f64,
    pub w_max: f64,
    pub delta: f64,
    pub c_max: usize,
    pub c_out: usize,
    pub inter_sum: usize,
}

pub fn check_a3(spec: &NetworkSpec, structure: &ClusterStructure) -> A3Report {
    let card = &structure.cardinalities;
    let delta = spec.rule.delta();
    let w_min = spec.w_min();
    let w_max = spec.w_max();
    let drift = spec.mu_inter / spec.gamma * delta * card.c_max as f64;
    let l7 = w_min - drift;
    let inter_sum = card.inter_sum();
    let l8 = (l7 > 0.0).then(|| {
        4.0 * spec.mu_inter / (spec.gamma * spec.gamma)
            * delta
            * (card.c_out as f64).sqrt()
            * inter_sum as f64
            * (w_max + drift)
            / l7
    });
    A3Report {
        pass: l8.is_some_and(|v| v < 1.0),
        l7,
        l8,
        w_min,
        w_max,
        delta,
        c_max: card.c_max,
        c_out: card.c_out,
        inter_sum,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterStability {
    pub cluster: usize,
    pub size: usize,
    pub representative: usize,
    /// Spectrum of `Ã_s − D_s⁻` (empty for single-node clusters).
    pub spectrum: Spectrum,
    /// `sign Γ(0) · max Re λ`; `None` for single-node clusters.
    pub signed_max_real_part: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct A4Report {
    pub pass: bool,
    pub gamma0: f64,
    /// `Γ(0) = 0`: the sign test is undefined and (A4) fails.
    pub degenerate_gamma0: bool,
    pub margin: f64,
    pub clusters: Vec<ClusterStability>,
}

fn sign_of(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn check_a4(
    structure: &ClusterStructure,
    p: &Partition,
    rule: &LearningRule,
    margin: f64,
) -> Result<A4Report, SpectralError> {
    let gamma0 = rule.at_zero();
    let sign = sign_of(gamma0);
    let degenerate = sign == 0.0;
    let mut clusters = Vec::with_capacity(p.cluster_count());
    for (s, residual) in structure.residuals.iter().enumerate() {
        let spectrum = eig(&residual.stability_matrix().to_f64())?;
        let (signed, pass) = if spectrum.is_empty() {
            (None, true)
        } else {
            let v = sign * spectrum.max_real_part;
            (Some(v), !degenerate && v < -margin)
        };
        clusters.push(ClusterStability {
            cluster: s,
            size: p.members(s).len(),
            representative: p.representative(s),
            spectrum,
            signed_max_real_part: signed,
            pass,
        });
    }
    Ok(A4Report {
        pass: !degenerate && clusters.iter().all(|c| c.pass),
        gamma0,
        degenerate_gamma0: degenerate,
        margin,
        clusters,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub a1: A1Report,
    pub a2: A2Report,
    pub a3: A3Report,
    pub a4: A4Report,
    /// (A1) ∧ (A2) ∧ (A3).
    pub existence: bool,
    /// Existence ∧ (A4).
    pub stability: bool,
    pub structure: ClusterStructure,
}

impl ConditionReport {
    /// 0 if stable, 2 if the manifold exists but (A4) fails, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.stability {
            0
        } else if self.existence {
            2
        } else {
            1
        }
    }
}

pub fn check_all(
    spec: &NetworkSpec,
    p: &Partition,
    options: &CheckOptions,
) -> Result<ConditionReport, SpectralError> {
    let structure = ClusterStructure::new(&spec.graph, p);
    let a1 = check_a1(spec, p, options.frequency_match);
    let a2 = check_a2(&spec.graph, p);
    let a3 = check_a3(spec, &structure);
    let a4 = check_a4(&structure, p, &spec.rule, options.hurwitz_margin)?;
    let existence = a1.pass && a2.pass && a3.pass;
    Ok(ConditionReport {
        stability: existence && a4.pass,
        existence,
        a1,
        a2,
        a3,
        a4,
        structure,
    })
}
