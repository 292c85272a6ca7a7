//! Upward propagation: assignments fix base values, metas recompute from
//! tallies of their active children, and changes bubble towards the root.

use crate::engine::Engine;
use crate::model::{ConstraintId, ConstraintKind, Relation, SatisfactionValue, VarId};

/// Counts of active children by satisfaction value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ChildTally {
    pub sat: usize,
    pub unsat: usize,
    pub sat_yet: usize,
    pub unsat_yet: usize,
    pub undet: usize,
}

impl ChildTally {
    pub fn add(&mut self, v: SatisfactionValue) {
        match v {
            SatisfactionValue::Satisfied => self.sat += 1,
            SatisfactionValue::Unsatisfied => self.unsat += 1,
            SatisfactionValue::SatisfiedYet => self.sat_yet += 1,
            SatisfactionValue::UnsatisfiedYet => self.unsat_yet += 1,
            SatisfactionValue::Undetermined => self.undet += 1,
        }
    }

    pub fn from_values(values: impl IntoIterator<Item = SatisfactionValue>) -> Self {
        let mut t = ChildTally::default();
        for v in values {
            t.add(v);
        }
        t
    }

    pub fn total(&self) -> usize {
        self.sat + self.unsat + self.sat_yet + self.unsat_yet + self.undet
    }
}

/// Value of a unary relation under an optional assignment.
pub fn evaluate_base(relation: Relation, value: usize, assigned: Option<usize>) -> SatisfactionValue {
    match assigned {
        None => SatisfactionValue::Undetermined,
        Some(a) if relation.holds(a, value) => SatisfactionValue::Satisfied,
        Some(_) => SatisfactionValue::Unsatisfied,
    }
}

/// Value of a meta constraint with bounds `min..=max` over `tally`.
pub fn evaluate_meta(min: usize, max: usize, tally: ChildTally) -> SatisfactionValue {
    let guaranteed = tally.sat + tally.sat_yet;
    let potential = guaranteed + tally.undet;
    if tally.sat_yet == 0 && tally.unsat_yet == 0 && tally.undet == 0 {
        if min <= tally.sat && tally.sat <= max {
            SatisfactionValue::Satisfied
        } else {
            SatisfactionValue::Unsatisfied
        }
    } else if guaranteed >= min && potential <= max {
        SatisfactionValue::SatisfiedYet
    } else if potential < min || guaranteed > max {
        SatisfactionValue::UnsatisfiedYet
    } else {
        SatisfactionValue::Undetermined
    }
}

impl Engine {
    /// Tally over the active children of `c`.
    pub fn tally(&self, c: ConstraintId) -> ChildTally {
        let mut t = ChildTally::default();
        for &ch in &self.net.constraint(c).children {
            if self.state.active[ch.0] {
                t.add(self.state.value[ch.0]);
            }
        }
        t
    }

    /// Computes the value `c` should have from its variable or children.
    /// Counts a constraint check whenever a relation is actually tested.
    pub(crate) fn evaluate_node(&mut self, c: ConstraintId) -> SatisfactionValue {
        match self.net.constraint(c).kind {
            ConstraintKind::Base {
                var,
                relation,
                value,
            } => {
                let assigned = self.state.assignment[var.0];
                if assigned.is_some() {
                    self.counters.constraint_checks += 1;
                }
                evaluate_base(relation, value, assigned)
            }
            ConstraintKind::Meta(kind) => {
                let t = self.tally(c);
                let (min, max) = kind.effective_bounds(t.total());
                self.counters.constraint_checks += 1;
                evaluate_meta(min, max, t)
            }
        }
    }

    /// Re-evaluates ancestors of `changed` until one keeps its value, an
    /// inactive ancestor is reached, or the root has been updated.
    pub fn propagate_up(&mut self, changed: ConstraintId) {
        let mut node = changed;
        while let Some(p) = self.net.parent(node) {
            if !self.state.active[p.0] {
                break;
            }
            let v = self.evaluate_node(p);
            if !self.set_value(p, v) {
                break;
            }
            node = p;
        }
    }

    /// Assigns `var := value` and propagates through its active bases.
    /// The variable must be unassigned.
    pub(crate) fn assign_and_propagate(&mut self, var: VarId, value: usize) {
        debug_assert!(self.state.assignment[var.0].is_none());
        self.set_assignment(var, value);
        self.counters.assignments += 1;
        let bases = self.net.bases_of(var).to_vec();
        for b in bases {
            if !self.state.active[b.0] {
                continue;
            }
            let v = self.evaluate_node(b);
            if self.set_value(b, v) {
                self.propagate_up(b);
            }
        }
    }
}
