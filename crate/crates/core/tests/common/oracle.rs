//! Brute-force reference semantics, written without the engine's
//! propagation code: every value is recomputed from scratch.

use std::collections::BTreeSet;

use dmc_core::{
    ActivatorMode, Condition, ConstraintId, ConstraintKind, MetaKind, Network, Polarity, Relation,
    SatisfactionValue, VarId,
};

use super::Assignment;

/// Five-valued value of `c` under `active` and `assignment`.
pub fn value_of(net: &Network, active: &[bool], assignment: &[Option<usize>], c: ConstraintId) -> SatisfactionValue {
    value_with(net, active, &|b| base_value(net, assignment, b), c)
}

pub fn base_value(net: &Network, assignment: &[Option<usize>], b: ConstraintId) -> SatisfactionValue {
    let ConstraintKind::Base { var, relation, value } = net.constraint(b).kind else {
        panic!("not a base constraint");
    };
    match assignment[var.0] {
        None => SatisfactionValue::Undetermined,
        Some(a) => {
            let ok = match relation {
                Relation::Equal => a == value,
                Relation::NotEqual => a != value,
            };
            if ok {
                SatisfactionValue::Satisfied
            } else {
                SatisfactionValue::Unsatisfied
            }
        }
    }
}

/// Meta values computed bottom-up from whatever `leaf` says about bases.
pub fn value_with(
    net: &Network,
    active: &[bool],
    leaf: &dyn Fn(ConstraintId) -> SatisfactionValue,
    c: ConstraintId,
) -> SatisfactionValue {
    use SatisfactionValue::*;
    let node = net.constraint(c);
    let ConstraintKind::Meta(kind) = node.kind else {
        return leaf(c);
    };
    let kids: Vec<SatisfactionValue> = node
        .children
        .iter()
        .filter(|ch| active[ch.0])
        .map(|&ch| value_with(net, active, leaf, ch))
        .collect();
    let (min, max) = match kind {
        MetaKind::Standard { min, max } | MetaKind::Receiver { min, max } => (min, max),
        MetaKind::AllReceiver | MetaKind::Top => (kids.len(), kids.len()),
    };
    let count = |v: SatisfactionValue| kids.iter().filter(|&&k| k == v).count();
    let sat = count(Satisfied);
    let lo = sat + count(SatisfiedYet);
    let hi = lo + count(Undetermined);
    if kids.iter().all(|k| matches!(k, Satisfied | Unsatisfied)) {
        if (min..=max).contains(&sat) {
            Satisfied
        } else {
            Unsatisfied
        }
    } else if lo >= min && hi <= max {
        SatisfiedYet
    } else if hi < min || lo > max {
        UnsatisfiedYet
    } else {
        Undetermined
    }
}

/// Active bases in the active part of `c`'s subtree.
pub fn active_bases_below(net: &Network, active: &[bool], c: ConstraintId, out: &mut Vec<ConstraintId>) {
    let node = net.constraint(c);
    if node.is_base() {
        out.push(c);
        return;
    }
    for &ch in &node.children {
        if active[ch.0] {
            active_bases_below(net, active, ch, out);
        }
    }
}

pub fn values(net: &Network, active: &[bool], assignment: &[Option<usize>]) -> Vec<SatisfactionValue> {
    net.constraint_ids()
        .map(|c| value_of(net, active, assignment, c))
        .collect()
}

pub fn variable_active(net: &Network, active: &[bool], v: VarId) -> bool {
    net.constraint_ids().any(|c| {
        active[c.0] && matches!(net.constraint(c).kind, ConstraintKind::Base { var, .. } if var == v)
    })
}

/// No inactive constraint that some activator targets hangs below the
/// active part of `c`'s subtree.
pub fn settled(net: &Network, active: &[bool], c: ConstraintId) -> bool {
    net.constraint(c).children.iter().all(|&ch| {
        if active[ch.0] {
            settled(net, active, ch)
        } else {
            !net.activators.iter().any(|a| a.mode == ActivatorMode::Activate && a.targets.contains(&ch))
        }
    })
}

fn holds(net: &Network, active: &[bool], assignment: &[Option<usize>], cond: Condition) -> bool {
    match cond {
        Condition::ConstraintSatisfied(c) => {
            active[c.0]
                && settled(net, active, c)
                && matches!(
                    value_of(net, active, assignment, c),
                    SatisfactionValue::Satisfied | SatisfactionValue::SatisfiedYet
                )
        }
        Condition::VariableActive(v) => variable_active(net, active, v),
    }
}

/// Activity reached by firing activate-mode activators until nothing
/// changes, starting from the initially active set.
pub fn fixpoint(net: &Network, assignment: &[Option<usize>]) -> Vec<bool> {
    let mut active = vec![false; net.constraints.len()];
    for c in &net.initially_active {
        active[c.0] = true;
    }
    loop {
        let mut changed = false;
        for a in &net.activators {
            if a.mode != ActivatorMode::Activate || !holds(net, &active, assignment, a.condition) {
                continue;
            }
            for t in &a.targets {
                if !active[t.0] {
                    active[t.0] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return active;
        }
    }
}

/// Checks every solution condition for an assignment over a subset of
/// the variables, with `required` tasks that must end at their target.
pub fn is_solution(net: &Network, assignment: &[Option<usize>], required: &[(ConstraintId, Polarity)]) -> bool {
    let active = fixpoint(net, assignment);
    let vals = values(net, &active, assignment);
    let vars_match = net
        .variable_ids()
        .all(|v| variable_active(net, &active, v) == assignment[v.0].is_some());
    let all_fixed = net
        .constraint_ids()
        .all(|c| !active[c.0] || vals[c.0].is_fixed());
    let required_ok = required.iter().all(|&(c, p)| {
        active[c.0]
            && vals[c.0]
                == match p {
                    Polarity::Satisfy => SatisfactionValue::Satisfied,
                    Polarity::Unsatisfy => SatisfactionValue::Unsatisfied,
                }
    });
    let obligations_ok = net.activators.iter().all(|a| {
        a.mode != ActivatorMode::RequireInactive
            || !holds(net, &active, assignment, a.condition)
            || a.targets.iter().all(|t| !active[t.0])
    });
    vars_match && all_fixed && vals[net.top.0] == SatisfactionValue::Satisfied && required_ok && obligations_ok
}

/// Every solution, by enumerating each variable as unassigned or one of
/// its values.
pub fn solutions(net: &Network, required: &[(ConstraintId, Polarity)]) -> BTreeSet<Assignment> {
    let n = net.variables.len();
    let radix: Vec<usize> = net.variables.iter().map(|v| v.domain.len() + 1).collect();
    let mut digits = vec![0usize; n];
    let mut out = BTreeSet::new();
    loop {
        // Digit 0 means unassigned.
        let assignment: Vec<Option<usize>> = digits.iter().map(|&d| d.checked_sub(1)).collect();
        if is_solution(net, &assignment, required) {
            out.insert(
                assignment
                    .iter()
                    .enumerate()
                    .filter_map(|(i, a)| a.map(|x| (VarId(i), x)))
                    .collect(),
            );
        }
        let mut k = 0;
        loop {
            if k == n {
                return out;
            }
            digits[k] += 1;
            if digits[k] < radix[k] {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

/// Dense form of a solution map.
pub fn dense(net: &Network, a: &Assignment) -> Vec<Option<usize>> {
    let mut out = vec![None; net.variables.len()];
    for (v, &x) in a {
        out[v.0] = Some(x);
    }
    out
}
