//! Random networks.
//!
//! `structured` draws from the class on which the search is complete:
//! the top and every section are all-receivers, each section owns a static
//! body of cardinality metas and bases, and an activator switches on one
//! section together with its body. Conditions watch a body constraint or a
//! variable, so they only ever turn true as a branch grows.

use std::collections::BTreeSet;

use dmc_core::{
    Activator, ActivatorMode, Condition, Constraint, ConstraintId, ConstraintKind, MetaKind, Network,
    Relation, VarId, Variable,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const VALUES: [&str; 3] = ["a", "b", "c"];

struct Gen {
    rng: StdRng,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    limit: usize,
}

impl Gen {
    fn new(seed: u64, limit: usize) -> Self {
        Gen {
            rng: StdRng::seed_from_u64(seed),
            variables: Vec::new(),
            constraints: Vec::new(),
            limit,
        }
    }

    fn variables(&mut self, count: std::ops::RangeInclusive<usize>, sizes: std::ops::RangeInclusive<usize>) {
        let n = self.rng.gen_range(count);
        for i in 0..n {
            let d = self.rng.gen_range(sizes.clone());
            self.variables.push(Variable {
                name: format!("x{i}"),
                domain: VALUES[..d].iter().map(|s| s.to_string()).collect(),
                initial: false,
            });
        }
    }

    fn room(&self) -> usize {
        self.limit.saturating_sub(self.constraints.len())
    }

    fn push(&mut self, kind: ConstraintKind, children: Vec<ConstraintId>) -> ConstraintId {
        let id = ConstraintId(self.constraints.len());
        self.constraints.push(Constraint {
            name: format!("c{}", id.0),
            kind,
            children,
        });
        id
    }

    fn base(&mut self) -> ConstraintId {
        let var = self.rng.gen_range(0..self.variables.len());
        let value = self.rng.gen_range(0..self.variables[var].domain.len());
        let relation = if self.rng.gen_bool(0.7) {
            Relation::Equal
        } else {
            Relation::NotEqual
        };
        self.push(
            ConstraintKind::Base {
                var: VarId(var),
                relation,
                value,
            },
            vec![],
        )
    }

    /// A tree of cardinality metas and bases. Every created id goes into
    /// `out`.
    fn tree(&mut self, depth: usize, allow_all: bool, out: &mut Vec<ConstraintId>) -> ConstraintId {
        if depth == 0 || self.room() < 3 || self.rng.gen_bool(0.45) {
            let b = self.base();
            out.push(b);
            return b;
        }
        let id = self.push(ConstraintKind::Base { var: VarId(0), relation: Relation::Equal, value: 0 }, vec![]);
        out.push(id);
        let want = self.rng.gen_range(1..=3);
        let mut kids = Vec::new();
        for _ in 0..want {
            if self.room() == 0 {
                break;
            }
            kids.push(self.tree(depth - 1, allow_all, out));
        }
        let k = kids.len();
        let kind = if allow_all && self.rng.gen_bool(0.15) {
            MetaKind::AllReceiver
        } else {
            let min = self.rng.gen_range(0..=k);
            let max = self.rng.gen_range(min..=k);
            if self.rng.gen_bool(0.2) {
                MetaKind::Receiver { min, max }
            } else {
                MetaKind::Standard { min, max }
            }
        };
        self.constraints[id.0].kind = ConstraintKind::Meta(kind);
        self.constraints[id.0].children = kids;
        id
    }
}

/// An activator network from the structured class, at most 4 variables,
/// 12 constraints and 4 activators.
pub fn structured(seed: u64) -> Network {
    let mut g = Gen::new(seed, 12);
    g.variables(1..=4, 1..=3);
    let top = g.push(ConstraintKind::Meta(MetaKind::Top), vec![]);
    let mut initial: BTreeSet<ConstraintId> = [top].into();
    let mut top_kids = Vec::new();

    if g.rng.gen_bool(0.4) {
        let mut ids = Vec::new();
        top_kids.push(g.tree(2, false, &mut ids));
        initial.extend(ids);
    }

    // Sections: (id, parent, group).
    let mut sections: Vec<(ConstraintId, Option<usize>, Vec<ConstraintId>)> = Vec::new();
    let count = g.rng.gen_range(1..=3);
    for i in 0..count {
        if g.room() < 2 {
            break;
        }
        let parent = if i > 0 && g.rng.gen_bool(0.3) {
            Some(g.rng.gen_range(0..sections.len()))
        } else {
            None
        };
        let id = g.push(ConstraintKind::Meta(MetaKind::AllReceiver), vec![]);
        let mut group = vec![id];
        let mut body = Vec::new();
        for _ in 0..g.rng.gen_range(1..=2) {
            if g.room() == 0 {
                break;
            }
            body.push(g.tree(2, false, &mut group));
        }
        g.constraints[id.0].children = body;
        match parent {
            Some(p) => {
                let pid = sections[p].0;
                g.constraints[pid.0].children.push(id);
            }
            None => top_kids.push(id),
        }
        sections.push((id, parent, group));
    }
    g.constraints[top.0].children = top_kids;

    for (_, _, group) in &sections {
        if g.rng.gen_bool(0.4) {
            initial.extend(group.iter().copied());
        }
    }

    let watchable: Vec<ConstraintId> = (0..g.constraints.len())
        .map(ConstraintId)
        .filter(|c| *c != top && !sections.iter().any(|s| s.0 == *c))
        .collect();
    let mut activators = Vec::new();
    let wanted = if sections.is_empty() { 0 } else { g.rng.gen_range(0..=4) };
    for i in 0..wanted {
        let condition = if watchable.is_empty() || g.rng.gen_bool(0.5) {
            Condition::VariableActive(VarId(g.rng.gen_range(0..g.variables.len())))
        } else {
            Condition::ConstraintSatisfied(watchable[g.rng.gen_range(0..watchable.len())])
        };
        let s = &sections[g.rng.gen_range(0..sections.len())];
        let (mode, targets) = if g.rng.gen_bool(0.2) {
            (ActivatorMode::RequireInactive, vec![s.0])
        } else {
            (ActivatorMode::Activate, s.2.clone())
        };
        activators.push(Activator {
            name: format!("a{i}"),
            condition,
            mode,
            targets,
        });
    }
    Network::new(format!("random-{seed}"), g.variables, g.constraints, activators, top, initial)
}

/// A static network with every constraint active and at most `max_bases`
/// base constraints.
pub fn static_tree(seed: u64, max_bases: usize) -> Network {
    let mut g = Gen::new(seed, 3 * max_bases);
    g.variables(1..=5, 2..=3);
    let top = g.push(ConstraintKind::Meta(MetaKind::Top), vec![]);
    let mut ids = Vec::new();
    let mut kids = Vec::new();
    for _ in 0..g.rng.gen_range(1..=3) {
        let before = g.constraints.len();
        let t = g.tree(3, true, &mut ids);
        let bases = g.constraints.iter().filter(|c| c.is_base()).count();
        if bases > max_bases {
            g.constraints.truncate(before);
            ids.retain(|c| c.0 < before);
            break;
        }
        kids.push(t);
    }
    if kids.is_empty() {
        let b = g.base();
        ids.push(b);
        kids.push(b);
    }
    g.constraints[top.0].children = kids;
    ids.push(top);
    Network::new(format!("static-{seed}"), g.variables, g.constraints, vec![], top, ids)
}

/// A structured network whose activators are then rewired to random
/// target sets and whose initial set is redrawn, so metas of every kind
/// may gain children late and watched metas may change value.
pub fn general(seed: u64) -> Network {
    let net = structured(seed);
    let mut rng = StdRng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let n = net.constraints.len();
    let mut activators = net.activators.clone();
    for a in &mut activators {
        let k = rng.gen_range(1..=3);
        let mut targets: Vec<ConstraintId> = (0..k).map(|_| ConstraintId(rng.gen_range(1..n.max(2)))).collect();
        targets.retain(|t| t.0 < n);
        targets.sort();
        targets.dedup();
        if targets.is_empty() {
            targets.push(net.top);
        }
        a.targets = targets;
    }
    let mut initial: BTreeSet<ConstraintId> = (1..n).filter(|_| rng.gen_bool(0.4)).map(ConstraintId).collect();
    initial.insert(net.top);
    Network::new(format!("general-{seed}"), net.variables, net.constraints, activators, net.top, initial)
}
