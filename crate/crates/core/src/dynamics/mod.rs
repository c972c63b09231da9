//! Vector fields of the adaptive network in full and error coordinates,
//! learning rules, and the fixed-step integrator.

pub mod error_coords;
pub mod integrator;
pub mod network;
pub mod rule;

pub use error_coords::{wrap_pi, wrap_tau, CoordinateMap, EdgeSlot, ErrorState, ErrorSystem};
pub use integrator::{
    integrate, integrate_system, NonFiniteState, OdeSystem, Rk4, SimError, StepSettings,
    Trajectory,
};
pub use network::{NetworkSpec, PlasticNetwork, SimState, SpecError};
pub use rule::LearningRule;
