#![allow(dead_code)]

pub mod oracle;

use interfersim_core::experiment::ExperimentGraph;
use interfersim_core::measurement::{scatter_entangle, EventKind};
use interfersim_core::optics::apply_mode_transform;
use interfersim_core::{BasisConfig, Complex64, StateVector};

/// Applies every transform and interaction scheduled before `time`.
pub fn evolve_before(graph: &ExperimentGraph, time: i64) -> StateVector {
    let mut state = graph.initial_state().unwrap();
    for event in graph.events().unwrap() {
        if event.time >= time {
            break;
        }
        state = match &event.kind {
            EventKind::Transform(t) => apply_mode_transform(&state, t).unwrap(),
            EventKind::Entangle(d) => scatter_entangle(&state, d).unwrap(),
            _ => state,
        };
    }
    state
}

/// Keeps the configurations accepted by `keep` and renormalizes.
pub fn restrict(state: &StateVector, keep: impl Fn(&BasisConfig) -> bool) -> StateVector {
    let space = std::sync::Arc::new(state.space().clone());
    let kept = state.iter().filter(|(c, _)| keep(c)).map(|(c, a)| (*c, *a));
    StateVector::from_amplitudes(space, kept).unwrap().normalized().unwrap()
}

/// `|⟨a|b⟩|` for normalized states; 1 means equal up to a global phase.
pub fn fidelity(a: &StateVector, b: &StateVector) -> f64 {
    a.inner_product(b).unwrap().norm()
}

pub fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}
