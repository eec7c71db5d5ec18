//! Statistical model checking of HyperPCTL* on discrete-time Markov chains.
//!
//! The crate is organized bottom-up:
//!
//! - [`dtmc`] holds explicit chains, the generative [`dtmc::ModelSampler`]
//!   interface, path sampling and exhaustive path enumeration.
//! - [`logic`] parses formulas and evaluates path formulas on assignments.
//! - [`sprt`] implements the scalar and the multi-dimensional sequential
//!   probability ratio tests together with the region geometry they need.
//! - [`checker`] compiles formulas into test plans and runs them, and also
//!   offers an exact oracle for small explicit chains.
//! - [`casestudies`] contains generative models for the security examples.

pub mod dtmc;
pub mod numeric;
pub mod stream;
pub mod logic;
pub mod checker;
pub mod sprt;
pub mod casestudies;
