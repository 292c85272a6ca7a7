//! Activator firing, activity changes and require-inactive obligations.

use std::collections::BTreeSet;

use crate::engine::Engine;
use crate::model::{
    ActivatorId, ActivatorMode, Condition, ConstraintId, Network, State,
};

/// Outcome of one activation check.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ActivationReport {
    /// Activate-mode activators that switched at least one target on, in
    /// firing order.
    pub fired: Vec<ActivatorId>,
    /// Require-inactive activators whose condition holds while a target is
    /// active.
    pub violated: Vec<ActivatorId>,
}

impl ActivationReport {
    pub fn is_consistent(&self) -> bool {
        self.violated.is_empty()
    }
}

/// Inactive children of `c` that an activator may still switch on.
pub fn pending_children(net: &Network, state: &State, c: ConstraintId) -> usize {
    net.constraint(c)
        .children
        .iter()
        .filter(|ch| !state.active[ch.0] && net.is_activatable(**ch))
        .count()
}

/// True when nothing in the active part of `c`'s subtree can still gain
/// children. A fixed value of a settled constraint is final and its Yet
/// values are reliable; an unsettled one may still move either way.
pub fn settled(net: &Network, state: &State, c: ConstraintId) -> bool {
    net.constraint(c).children.iter().all(|&ch| {
        if state.active[ch.0] {
            settled(net, state, ch)
        } else {
            !net.is_activatable(ch)
        }
    })
}

/// Whether `cond` holds in `state`. A watched constraint counts as
/// satisfied only once its value can no longer change through activity,
/// which keeps firing independent of the order things happen in.
pub fn condition_holds(net: &Network, state: &State, cond: Condition) -> bool {
    match cond {
        Condition::ConstraintSatisfied(c) => {
            state.active[c.0] && state.value[c.0].leans_satisfied() && settled(net, state, c)
        }
        Condition::VariableActive(v) => state.is_variable_active(net, v),
    }
}

/// Require-inactive activators currently violated in `state`.
pub fn violated_obligations(net: &Network, state: &State) -> Vec<ActivatorId> {
    net.activator_ids()
        .filter(|&a| {
            let act = net.activator(a);
            act.mode == ActivatorMode::RequireInactive
                && condition_holds(net, state, act.condition)
                && act.targets.iter().any(|t| state.active[t.0])
        })
        .collect()
}

/// Constraints that are initially active or targeted by some
/// Activate-mode activator.
pub fn activation_closure(net: &Network) -> BTreeSet<ConstraintId> {
    let mut set = net.initially_active.clone();
    for a in &net.activators {
        if a.mode == ActivatorMode::Activate {
            set.extend(a.targets.iter().copied());
        }
    }
    set
}

impl Engine {
    /// Fires Activate-mode activators until nothing changes, then reports
    /// violated require-inactive obligations.
    pub fn check_activators(&mut self) -> ActivationReport {
        let mut fired = Vec::new();
        loop {
            let mut changed = false;
            for a in self.net.activator_ids() {
                let act = self.net.activator(a);
                if act.mode != ActivatorMode::Activate
                    || !condition_holds(&self.net, &self.state, act.condition)
                {
                    continue;
                }
                let pending: Vec<ConstraintId> = act
                    .targets
                    .iter()
                    .copied()
                    .filter(|t| !self.state.active[t.0])
                    .collect();
                if pending.is_empty() {
                    continue;
                }
                self.activate(pending);
                fired.push(a);
                changed = true;
            }
            if !changed {
                break;
            }
        }
        let violated = violated_obligations(&self.net, &self.state);
        self.last_violations = violated.clone();
        ActivationReport { fired, violated }
    }

    /// Switches `targets` on, evaluates them deepest first and propagates.
    fn activate(&mut self, mut targets: Vec<ConstraintId>) {
        for &t in &targets {
            self.set_active(t);
        }
        targets.sort_by_key(|t| std::cmp::Reverse(self.net.depth(*t)));
        for t in targets {
            let v = self.evaluate_node(t);
            self.set_value(t, v);
            self.propagate_up(t);
        }
    }
}
