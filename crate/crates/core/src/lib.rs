// SPDX-License-Identifier: Apache-2.0

//! Intuitionistic first-order logic toolkit: Kripke models, proof terms and
//! bounded proof search, the Eros/Afrodite game, countermodel-driven
//! Afrodite strategies and run-trace compaction.

pub mod arcadian;
pub mod corpus;
pub mod formula;
pub mod game;
pub mod kripke;
pub mod proof;
pub mod service;
pub mod smp;
pub mod strategy;
