//! Core algorithms for the team formation problem with person-job matching.
//!
//! A team plan assigns one candidate to each open position. Its quality is the
//! sum of person-job match scores of the seated pairs, scaled by a team
//! communication factor derived from a pairwise willingness matrix. Match
//! scores come from intuitionistic fuzzy evaluations aggregated per position
//! with a power interactive weighted average ([`fuzzy`]).
//!
//! Plans are constructed greedily by priority rules: expression trees over
//! problem-state features that rank candidates ([`gp`]). Rules are evolved by
//! a genetic programming loop whose population search mode is picked each
//! generation by a tabular Q-learning agent ([`rl`]), with offspring fitness
//! estimated by a k-nearest-neighbour surrogate over rule phenotypes
//! ([`surrogate`]). Construction heuristics and direct search baselines live
//! in [`baselines`]; the full training loop in [`train`].
//!
//! The crate is `no_std`-compatible (`alloc` required); disable the default
//! `std` feature for embedded use. All randomness flows through seeded
//! streams ([`rng`]), so every run is reproducible from one seed.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baselines;
pub mod evaluator;
pub mod fuzzy;
pub mod gp;
pub mod problem;
pub mod rl;
pub mod rng;
pub mod surrogate;
pub mod train;
