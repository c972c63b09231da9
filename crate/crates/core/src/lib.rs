//! Adaptive Kuramoto networks with plastic couplings: structural conditions
//! for multi-cluster behavior, spectral stability tests, simulation in full
//! and error coordinates, and diagnostics of convergence to the cluster
//! manifold.
//!
//! ```
//! use kuramoto_clusters::conditions::{check_all, CheckOptions};
//! use kuramoto_clusters::presets;
//!
//! let spec = presets::example2_spec();
//! let report = check_all(&spec, &presets::example2_partition(), &CheckOptions::default()).unwrap();
//! assert!(report.stability);
//! assert!((report.a3.l7 - 0.495).abs() < 1e-12);
//! ```

pub mod analysis;
pub mod cli;
pub mod conditions;
pub mod dynamics;
pub mod graph;
pub mod io;
pub mod matrix;
pub mod presets;
pub mod seeding;
pub mod spectral;

#[cfg(test)]
mod oracle;

pub use dynamics::{LearningRule, NetworkSpec, SimState, Trajectory};
pub use graph::{Digraph, Partition};
