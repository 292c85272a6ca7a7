//! Shared helpers for the integration tests: an independent brute-force
//! oracle and random network generators.

#![allow(dead_code)]

pub mod checks;
pub mod gen;
pub mod oracle;

use std::collections::{BTreeMap, BTreeSet};

use dmc_core::{Engine, Network, SearchOptions, SolveMode, Task, VarId};

pub type Assignment = BTreeMap<VarId, usize>;

/// All solutions of `Satisfy(top)` after `requests`, as a set.
pub fn engine_solution_set(net: &Network, requests: &[Task], pruning: bool) -> (Vec<Assignment>, u64) {
    let mut e = Engine::new(net.clone()).with_options(SearchOptions { pruning });
    let mut tasks = requests.to_vec();
    tasks.push(Task::satisfy(net.top));
    let out = e.solve(&tasks, SolveMode::AllSols);
    let list = out.solutions.into_iter().map(|s| s.assignment).collect();
    (list, out.stats.backtracks)
}

pub fn as_set(list: &[Assignment]) -> BTreeSet<Assignment> {
    list.iter().cloned().collect()
}
