// SPDX-License-Identifier: Apache-2.0

//! Afrodite strategies built from countermodels, and the variable
//! quasiorder they are measured with.

pub mod quasiorder;
pub mod synth;

pub use quasiorder::{
    equivalence_classes, maximal_vars, preceq, OrderCache, OrderMode, QuasiOrderRel, Relation,
};
pub use synth::{
    check_invariant, invariant_holds, pointwise_holds, smallness_report, substitute_in_strategy,
    ChildEdge, Exploration, SmallStrategyReport, Strategy, StrategyAfrodite, StrategyError,
    StrategyNode, StrategyTree, TreeNode,
};
