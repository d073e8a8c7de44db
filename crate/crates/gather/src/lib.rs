//! Crash-tolerant gathering of asynchronous, oblivious, anonymous robots on
//! finite anonymous grids: configuration analysis, the gathering policy, a
//! deterministic scheduler simulator and an exhaustive adversarial verifier.

pub mod classify;
pub mod grid;
pub mod lemmas;
pub mod policy;
pub mod sim;
pub mod symmetry;
pub mod verify;
