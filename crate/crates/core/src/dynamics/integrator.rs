//! Fixed-step classic Runge–Kutta integration.

use log::warn;
use serde::Serialize;
use thiserror::Error;

use super::error_coords::CoordinateMap;
use super::network::{PlasticNetwork, SimState, SpecError};

/// An autonomous ODE `y' = f(y)` on a flat state vector.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, y: &[f64], dy: &mut [f64]);
}

/// Scratch space for RK4 steps.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    pub fn step<S: OdeSystem + ?Sized>(&mut self, sys: &S, y: &mut [f64], h: f64) {
        sys.rhs(y, &mut self.k1);
        axpy(&mut self.tmp, y, 0.5 * h, &self.k1);
        sys.rhs(&self.tmp, &mut self.k2);
        axpy(&mut self.tmp, y, 0.5 * h, &self.k2);
        sys.rhs(&self.tmp, &mut self.k3);
        axpy(&mut self.tmp, y, h, &self.k3);
        sys.rhs(&self.tmp, &mut self.k4);
        let parts = self.k1.iter().zip(&self.k2).zip(self.k3.iter().zip(&self.k4));
        for (yi, ((a, b), (c, d))) in y.iter_mut().zip(parts) {
            *yi += h / 6.0 * (a + 2.0 * b + 2.0 * c + d);
        }
    }
}

/// `out = y + a·x`.
fn axpy(out: &mut [f64], y: &[f64], a: f64, x: &[f64]) {
    for ((o, yi), xi) in out.iter_mut().zip(y).zip(x) {
        *o = yi + a * xi;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepSettings {
    pub dt: f64,
    pub t_end: f64,
    /// Record every this many steps; the final state is always recorded.
    pub sample_every: usize,
}

impl StepSettings {
    pub fn new(dt: f64, t_end: f64, sample_every: usize) -> Self {
        Self {
            dt,
            t_end,
            sample_every,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::Settings(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(SimError::Settings(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        if self.sample_every == 0 {
            return Err(SimError::Settings("sample_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps; the last one is shortened when `t_end` is not a
    /// multiple of `dt`.
    pub fn step_count(&self) -> usize {
        let ratio = self.t_end / self.dt;
        let rounded = ratio.round();
        if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
            rounded as usize
        } else {
            ratio.ceil() as usize
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid step settings: {0}")]
    Settings(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("state became non-finite after t = {t_last_good}")]
    NonFinite {
        t_last_good: f64,
        partial: Box<Trajectory>,
    },
}

/// Outcome of a raw integration that hit a non-finite state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonFiniteState {
    pub t_last_good: f64,
}

/// Integrates `sys` from `y` in place, calling `on_sample(t, y)` at `t = 0`,
/// every `sample_every` steps and at `t_end`.
pub fn integrate_system<S: OdeSystem + ?Sized>(
    sys: &S,
    y: &mut [f64],
    settings: &StepSettings,
    mut on_sample: impl FnMut(f64, &[f64]),
) -> Result<(), NonFiniteState> {
    let steps = settings.step_count();
    let mut rk = Rk4::new(sys.dim());
    on_sample(0.0, y);
    let mut t = 0.0;
    for step in 1..=steps {
        let t_next = if step == steps {
            settings.t_end
        } else {
            step as f64 * settings.dt
        };
        rk.step(sys, y, t_next - t);
        if !y.iter().all(|x| x.is_finite()) {
            return Err(NonFiniteState { t_last_good: t });
        }
        t = t_next;
        if step % settings.sample_every == 0 || step == steps {
            on_sample(t, y);
        }
    }
    Ok(())
}

/// Recorded samples of a simulation of the full network.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SimState>,
    /// Non-representative nodes whose phase errors are recorded.
    pub error_nodes: Vec<usize>,
    /// Wrapped phase errors per sample, empty without a partition.
    pub errors: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &SimState)> {
        self.times.last().map(|&t| (t, self.states.last().unwrap()))
    }
}

/// Runs RK4 on the full network from `initial`. `observer` sees every
/// recorded sample; phase errors are derived when `coords` is given.
pub fn integrate(
    network: &PlasticNetwork<'_>,
    coords: Option<&CoordinateMap>,
    initial: &SimState,
    settings: &StepSettings,
    mut observer: impl FnMut(f64, &SimState),
) -> Result<Trajectory, SimError> {
    settings.validate()?;
    network.check_state(initial)?;
    let spec = network.spec();
    let limit = 0.1 / spec.gamma.max(spec.w_max()).max(1.0);
    if settings.dt > limit {
        warn!(
            "dt = {} exceeds the recommended {:.3e} for these parameters",
            settings.dt, limit
        );
    }
    let n = spec.node_count();
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        error_nodes: coords.map(|c| c.error_nodes().to_vec()).unwrap_or_default(),
        errors: Vec::new(),
    };
    let mut y = initial.to_flat();
    let outcome = integrate_system(network, &mut y, settings, |t, y| {
        let state = SimState::from_flat(y, n);
        observer(t, &state);
        if let Some(c) = coords {
            traj.errors.push(c.phase_errors(&state.theta));
        }
        traj.times.push(t);
        traj.states.push(state);
    });
    match outcome {
        Ok(()) => Ok(traj),
        Err(NonFiniteState { t_last_good }) => Err(SimError::NonFinite {
            t_last_good,
            partial: Box::new(traj),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::error_coords::wrap_pi;
    use crate::dynamics::network::NetworkSpec;
    use crate::graph::{Digraph, Partition};
    use crate::presets;
    use crate::LearningRule;
    use std::f64::consts::TAU;

    struct Linear(f64);

    impl OdeSystem for Linear {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, y: &[f64], dy: &mut [f64]) {
            dy[0] = self.0 * y[0];
        }
    }

    struct Blowup;

    impl OdeSystem for Blowup {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[0] * y[0];
        }
    }

    #[test]
    fn step_count_handles_non_multiples() {
        assert_eq!(StepSettings::new(0.01, 1.0, 1).step_count(), 100);
        assert_eq!(StepSettings::new(0.3, 1.0, 1).step_count(), 4);
        assert_eq!(StepSettings::new(0.1, 0.0, 1).step_count(), 0);
    }

    #[test]
    fn sampling_schedule() {
        let mut times = Vec::new();
        let mut y = vec![1.0];
        integrate_system(&Linear(-1.0), &mut y, &StepSettings::new(0.1, 1.05, 4), |t, _| {
            times.push(t)
        })
        .unwrap();
        assert_eq!(times.len(), 4);
        assert_eq!(times[0], 0.0);
        assert!((times[1] - 0.4).abs() < 1e-15);
        assert_eq!(*times.last().unwrap(), 1.05);
    }

    #[test]
    fn linear_decay_accuracy() {
        let mut y = vec![1.0];
        integrate_system(&Linear(-1.0), &mut y, &StepSettings::new(0.01, 1.0, 1), |_, _| {})
            .unwrap();
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn non_finite_aborts_with_last_good_time() {
        let mut y = vec![1.0];
        let err = integrate_system(&Blowup, &mut y, &StepSettings::new(0.1, 10.0, 1), |_, _| {})
            .unwrap_err();
        assert!(err.t_last_good > 0.5 && err.t_last_good < 2.0);
    }

    #[test]
    fn invalid_settings() {
        let spec = presets::example1_spec();
        let net = PlasticNetwork::new(&spec, None).unwrap();
        let init = SimState::new(vec![0.0; 5], vec![0.0; 20]);
        for s in [
            StepSettings::new(0.0, 1.0, 1),
            StepSettings::new(0.1, -1.0, 1),
            StepSettings::new(0.1, 1.0, 0),
        ] {
            assert!(matches!(
                integrate(&net, None, &init, &s, |_, _| {}),
                Err(SimError::Settings(_))
            ));
        }
    }

    #[test]
    fn single_node_rotates_once() {
        let g = Digraph::from_adjacency(&[vec![0]]).unwrap();
        let spec = NetworkSpec::new(g, vec![1.0], 1.0, 0.1, 0.1, LearningRule::HebbianCos).unwrap();
        let net = PlasticNetwork::new(&spec, None).unwrap();
        let init = SimState::new(vec![0.3], vec![]);
        let traj = integrate(&net, None, &init, &StepSettings::new(1e-3, TAU, 100), |_, _| {})
            .unwrap();
        let (t, last) = traj.last().unwrap();
        assert_eq!(t, TAU);
        assert!(wrap_pi(last.theta[0] - 0.3).abs() < 1e-10);
    }

    #[test]
    fn zero_rule_gives_exponential_decay() {
        let g = Digraph::from_edges(2, &[(0, 1)]).unwrap();
        let rule = LearningRule::CustomFourier {
            constant: 0.0,
            cos: vec![0.0],
            sin: vec![0.0],
        };
        let spec = NetworkSpec::new(g, vec![0.5, 0.7], 0.8, 0.1, 0.1, rule).unwrap();
        let net = PlasticNetwork::new(&spec, None).unwrap();
        let init = SimState::new(vec![0.0, 1.0], vec![0.4]);
        let traj = integrate(&net, None, &init, &StepSettings::new(0.01, 5.0, 50), |_, _| {})
            .unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert!((s.k[0] - 0.4 * (-0.8 * t).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn observer_sees_every_sample_and_errors_are_recorded() {
        let spec = presets::example2_spec();
        let p = presets::example2_partition();
        let net = PlasticNetwork::new(&spec, Some(&p)).unwrap();
        let coords = CoordinateMap::new(&spec, &p).unwrap();
        let init = SimState::new(presets::example2_initial_theta(), vec![0.0; 14]);
        let mut seen = 0;
        let traj = integrate(&net, Some(&coords), &init, &StepSettings::new(0.01, 1.0, 10), |_, _| {
            seen += 1
        })
        .unwrap();
        assert_eq!(seen, traj.len());
        assert_eq!(traj.len(), 11);
        assert_eq!(traj.errors[0].len(), 5);
        assert_eq!(traj.error_nodes, p.error_nodes());
    }

    #[test]
    fn t_end_zero_gives_initial_state_only() {
        let spec = presets::example1_spec();
        let net = PlasticNetwork::new(&spec, None).unwrap();
        let init = SimState::new(presets::example1_initial_theta(), vec![0.01; 20]);
        let traj = integrate(&net, None, &init, &StepSettings::new(0.01, 0.0, 1), |_, _| {})
            .unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.states[0], init);
    }

    #[test]
    fn partition_mismatch_rejected() {
        let spec = presets::example1_spec();
        let p = Partition::new(3, vec![vec![0], vec![1, 2]], None).unwrap();
        assert!(PlasticNetwork::new(&spec, Some(&p)).is_err());
    }
}
