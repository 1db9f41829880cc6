//! Analytic rate models: ancilla cooling and the round-to-round data chain.

mod chain;
mod cooling;
mod fit;

pub use chain::{
    event_probabilities, first_round_p0, flow_coefficients, iterate_round_chain, perturbative_delta,
    perturbative_p0, perturbative_steady_p0, EventProbabilities, FlowMatrix, RoundChainState, RoundEventParams,
    CLASSES,
};
pub use cooling::{
    ancilla_steady_fidelity, cooled_fidelity, cooling_closed_form, cooling_rhs, cooling_steady_state,
    integrate_cooling, slow_cooling_fss, AncillaPopulations, CoolingRates,
};
pub use fit::{fit_decay_constant, DecayFit, FIT_WINDOW};
