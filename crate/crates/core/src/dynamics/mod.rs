//! Lindblad generators built from collision maps, their propagation and the
//! observables used to read out thermalization.

mod generator;
mod observables;
mod propagate;

pub use generator::{
    generic_generator, poisson_generator, repeated_interaction_generator, Liouvillian, Spectral,
};
pub use observables::{
    observables, perturbative_coherences, ObservableSpec, Observables, POPULATION_FLOOR,
};
pub use propagate::{
    evolve, steady_state, Method, Trajectory, MAX_SPECTRAL_CONDITION, STEADY_GAP_TOL,
};
