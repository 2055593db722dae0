//! Local-content bounds for bipartite quantum correlations.
//!
//! A bipartite probability distribution `P_Q` admits an EPR2 decomposition
//! `P_Q = p * P_L + (1 - p) * P_NL` where `P_L` is local and `P_NL` is
//! no-signaling. The largest feasible `p` is the local content of `P_Q`.
//! This crate computes certified lower bounds on the local content of
//! partially entangled two-qubit states (explicit local models), upper
//! bounds from chained Bell inequalities, and lower bounds on the
//! *nonlocal* content of a two-qutrit family (deterministic-model search).
//!
//! The crate is `no_std` compatible (with `alloc`); enable the `libm`
//! feature to supply the math intrinsics when `std` is disabled.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("enable either the `std` or the `libm` feature");

pub mod bloch;
pub mod chained;
pub mod error;
mod math;
pub mod optimize;
pub mod qubit;
pub mod qutrit;

pub use bloch::{BlochVector, Outcome};
pub use chained::{
    bkp_upper_bound, chained_value, equal_spacing_angles, optimize_chained, ChainedConfig,
    ChainedResult,
};
pub use error::Error;
pub use optimize::{fibonacci_sphere_grid, multistart, nelder_mead, OptConfig, OptOutcome};
pub use qubit::{
    chsh_max_of_pnl, f_eval, local_prob_improved, local_prob_sign, max_weight_for_local_model,
    nonlocal_bias, nonlocal_correlator, nonlocal_prob, quantum_prob, verify_decomposition,
    DecompositionReport, JointProb, LocalModel, ThetaParam,
};
pub use qutrit::{
    argmax_overlap, local_weight_objective, qutrit_amplitudes, qutrit_lower_bound, qutrit_prob,
    GammaParam, QutritBasis, QutritBound, QutritOutcomePair,
};
