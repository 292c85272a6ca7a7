//! Dynamic meta-constraint networks: a constraint tree with cardinality
//! metas and activators, five-valued propagation, trail-based backtracking
//! search, a small problem language, and classic baselines.

pub mod activation;
pub mod baselines;
pub mod engine;
pub mod io;
pub mod model;
pub mod propagation;
pub mod search;
pub mod trail;

pub use activation::{activation_closure, ActivationReport};
pub use engine::{Counters, Engine, RunStats, SearchOptions};
pub use model::{
    active_variables, validate, Activator, ActivatorId, ActivatorMode, Condition, Constraint,
    ConstraintId, ConstraintKind, MetaKind, Network, Relation, SatisfactionValue, State, VarId,
    Variable, Violation,
};
pub use propagation::{evaluate_base, evaluate_meta, ChildTally};
pub use search::{Path, Polarity, Solution, SolveMode, SolveOutcome, StepFailure, Task};
pub use trail::{HistoryRecord, Previous, Subject, Tick, Trail, TrailError, TrailStats};
