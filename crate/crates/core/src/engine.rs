//! Mutable solving context: a network, its state, the trail and counters.

use serde::{Deserialize, Serialize};

use crate::model::{
    validate, ActivatorId, ConstraintId, Network, SatisfactionValue, State, VarId, Violation,
};
use crate::trail::{Previous, Subject, Tick, Trail, TrailStats};

/// Work counters accumulated over the lifetime of an [`Engine`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub assignments: u64,
    pub backtracks: u64,
    pub constraint_checks: u64,
}

/// Counters reported for one run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunStats {
    pub assignments: u64,
    pub backtracks: u64,
    pub constraint_checks: u64,
    pub solutions: u64,
    pub trail: TrailStats,
}

/// Search switches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    /// Yet-value short-circuits and doomed-vector skipping. Turning this
    /// off must never change the solution set.
    pub pruning: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { pruning: true }
    }
}

#[derive(Clone, Debug)]
pub struct Engine {
    pub(crate) net: Network,
    pub(crate) state: State,
    pub(crate) trail: Trail,
    pub(crate) counters: Counters,
    pub(crate) options: SearchOptions,
    /// Require-inactive activators found violated by the last wave.
    pub(crate) last_violations: Vec<ActivatorId>,
}

impl Engine {
    /// Loads `net` in its initial state. The network is assumed valid.
    pub fn new(net: Network) -> Self {
        let state = net.initial_state();
        let trail = Trail::new(net.constraints.len(), net.variables.len());
        Engine {
            net,
            state,
            trail,
            counters: Counters::default(),
            options: SearchOptions::default(),
            last_violations: Vec::new(),
        }
    }

    /// Re-evaluates every active constraint, children before parents, so
    /// that values no assignment has touched yet (an empty all-receiver,
    /// a min 0 meta) are correct. Changes are recorded at the current tick.
    pub(crate) fn settle_values(&mut self) {
        let mut order: Vec<ConstraintId> = self
            .net
            .constraint_ids()
            .filter(|c| self.state.active[c.0])
            .collect();
        order.sort_by_key(|&c| std::cmp::Reverse(self.net.depth(c)));
        for c in order {
            let v = self.evaluate_node(c);
            self.set_value(c, v);
        }
    }

    /// Validates, then loads.
    pub fn load(net: Network) -> Result<Self, Vec<Violation>> {
        let v = validate(&net);
        if v.is_empty() {
            Ok(Engine::new(net))
        } else {
            Err(v)
        }
    }

    pub fn with_options(mut self, options: SearchOptions) -> Self {
        self.options = options;
        self
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn trail(&self) -> &Trail {
        &self.trail
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn options(&self) -> SearchOptions {
        self.options
    }

    pub fn now(&self) -> Tick {
        self.trail.now()
    }

    pub fn advance(&mut self) -> Tick {
        self.trail.advance()
    }

    /// Restores state to `to`. Does not touch the backtrack counter.
    pub fn restore(&mut self, to: Tick) -> Result<(), crate::trail::TrailError> {
        self.last_violations.clear();
        self.trail.restore(&mut self.state, to)
    }

    /// Require-inactive activators that the last wave found violated.
    pub fn last_violations(&self) -> &[ActivatorId] {
        &self.last_violations
    }

    pub fn is_active(&self, c: ConstraintId) -> bool {
        self.state.active[c.0]
    }

    pub fn value(&self, c: ConstraintId) -> SatisfactionValue {
        self.state.value[c.0]
    }

    pub fn assignment(&self, v: VarId) -> Option<usize> {
        self.state.assignment[v.0]
    }

    pub fn is_variable_active(&self, v: VarId) -> bool {
        self.state.is_variable_active(&self.net, v)
    }

    /// See [`crate::activation::settled`].
    pub fn settled(&self, c: ConstraintId) -> bool {
        crate::activation::settled(&self.net, &self.state, c)
    }

    pub(crate) fn set_value(&mut self, c: ConstraintId, v: SatisfactionValue) -> bool {
        let old = self.state.value[c.0];
        if old == v {
            return false;
        }
        self.trail.record(Subject::Constraint(c), Previous::Value(old));
        self.state.value[c.0] = v;
        true
    }

    pub(crate) fn set_active(&mut self, c: ConstraintId) -> bool {
        if self.state.active[c.0] {
            return false;
        }
        self.trail.record(Subject::Constraint(c), Previous::Active(false));
        self.state.active[c.0] = true;
        true
    }

    pub(crate) fn set_assignment(&mut self, var: VarId, value: usize) {
        let old = self.state.assignment[var.0];
        self.trail
            .record(Subject::Variable(var), Previous::Assignment(old));
        self.state.assignment[var.0] = Some(value);
    }

    /// Run statistics relative to a starting snapshot of the counters.
    pub fn stats_since(&self, start: Counters, solutions: u64) -> RunStats {
        RunStats {
            assignments: self.counters.assignments - start.assignments,
            backtracks: self.counters.backtracks - start.backtracks,
            constraint_checks: self.counters.constraint_checks - start.constraint_checks,
            solutions,
            trail: self.trail_stats(),
        }
    }

    pub fn trail_stats(&self) -> TrailStats {
        self.trail.stats()
    }
}
