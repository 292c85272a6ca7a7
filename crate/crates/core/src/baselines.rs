//! Classic solvers over the static projection of a network: chronological
//! backtracking and AC-3.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ConstraintId, ConstraintKind, Network, State};
use crate::search::SolveMode;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BaselineError {
    #[error("network has activators; baselines need a static problem")]
    HasActivators,
    #[error("relation {0} has more than two variables")]
    NonBinary(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CspVariable {
    pub name: String,
    pub domain: Vec<String>,
}

/// An extensional relation: the value tuples allowed over `scope`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CspRelation {
    pub name: String,
    pub scope: Vec<usize>,
    pub allowed: BTreeSet<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Csp {
    pub variables: Vec<CspVariable>,
    pub relations: Vec<CspRelation>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BacktrackStats {
    pub assignments: u64,
    pub backtracks: u64,
    pub constraint_checks: u64,
    pub solutions: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BacktrackOutcome {
    /// Value index per variable, one vector per solution.
    pub solutions: Vec<Vec<usize>>,
    pub stats: BacktrackStats,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Ac3Outcome {
    pub consistent: bool,
    /// Remaining value indices per variable.
    pub domains: Vec<Vec<usize>>,
    pub revise_calls: u64,
    pub assignments: u64,
}

/// Flattens every active child of the root into an allowed-tuple relation
/// over the variables its subtree mentions.
pub fn static_project(net: &Network) -> Result<Csp, BaselineError> {
    if !net.activators.is_empty() {
        return Err(BaselineError::HasActivators);
    }
    let state = net.initial_state();
    let variables = net
        .variables
        .iter()
        .map(|v| CspVariable {
            name: v.name.clone(),
            domain: v.domain.clone(),
        })
        .collect();
    let mut relations = Vec::new();
    for &c in &net.constraint(net.top).children {
        if !state.active[c.0] {
            continue;
        }
        let mut scope = Vec::new();
        collect_scope(net, &state, c, &mut scope);
        let mut allowed = BTreeSet::new();
        let mut tuple = vec![0; scope.len()];
        let mut assignment = vec![None; net.variables.len()];
        'tuples: loop {
            for (k, &v) in scope.iter().enumerate() {
                assignment[v] = Some(tuple[k]);
            }
            if holds(net, &state, &assignment, c) {
                allowed.insert(tuple.clone());
            }
            // Odometer over the scope's domains.
            let mut k = scope.len();
            loop {
                if k == 0 {
                    break 'tuples;
                }
                k -= 1;
                tuple[k] += 1;
                if tuple[k] < net.variables[scope[k]].domain.len() {
                    continue 'tuples;
                }
                tuple[k] = 0;
            }
        }
        relations.push(CspRelation {
            name: net.constraint(c).name.clone(),
            scope,
            allowed,
        });
    }
    Ok(Csp {
        variables,
        relations,
    })
}

fn collect_scope(net: &Network, state: &State, c: ConstraintId, out: &mut Vec<usize>) {
    let node = net.constraint(c);
    match node.kind {
        ConstraintKind::Base { var, .. } => {
            if !out.contains(&var.0) {
                out.push(var.0);
            }
        }
        ConstraintKind::Meta(_) => {
            for &ch in &node.children {
                if state.active[ch.0] {
                    collect_scope(net, state, ch, out);
                }
            }
        }
    }
}

/// Two-valued evaluation with every scope variable assigned.
fn holds(net: &Network, state: &State, assignment: &[Option<usize>], c: ConstraintId) -> bool {
    let node = net.constraint(c);
    match node.kind {
        ConstraintKind::Base {
            var,
            relation,
            value,
        } => assignment[var.0].is_some_and(|a| relation.holds(a, value)),
        ConstraintKind::Meta(kind) => {
            let active: Vec<ConstraintId> = node
                .children
                .iter()
                .copied()
                .filter(|ch| state.active[ch.0])
                .collect();
            let (min, max) = kind.effective_bounds(active.len());
            let sat = active
                .iter()
                .filter(|&&ch| holds(net, state, assignment, ch))
                .count();
            min <= sat && sat <= max
        }
    }
}

/// Chronological backtracking in declaration order. Each relation is
/// tested once its last scope variable is placed, in declaration order,
/// stopping at the first failure.
///
/// A backtrack is counted for every placement a check rejects, plus one
/// when the whole search ends without any solution.
pub fn backtrack_solve(csp: &Csp, mode: SolveMode) -> BacktrackOutcome {
    let n = csp.variables.len();
    // Relations becoming fully assigned at each depth.
    let mut due: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut always = Vec::new();
    for (i, r) in csp.relations.iter().enumerate() {
        match r.scope.iter().max() {
            Some(&last) => due[last].push(i),
            None => always.push(i),
        }
    }
    let mut st = Bt {
        csp,
        due,
        mode,
        assignment: vec![0; n],
        stats: BacktrackStats::default(),
        solutions: Vec::new(),
    };
    let empty_ok = always.iter().all(|&i| {
        st.stats.constraint_checks += 1;
        !csp.relations[i].allowed.is_empty()
    });
    if empty_ok {
        st.go(0);
    }
    if st.solutions.is_empty() {
        st.stats.backtracks += 1;
    }
    st.stats.solutions = st.solutions.len() as u64;
    BacktrackOutcome {
        solutions: st.solutions,
        stats: st.stats,
    }
}

struct Bt<'a> {
    csp: &'a Csp,
    due: Vec<Vec<usize>>,
    mode: SolveMode,
    assignment: Vec<usize>,
    stats: BacktrackStats,
    solutions: Vec<Vec<usize>>,
}

impl Bt<'_> {
    /// Returns true to stop the search.
    fn go(&mut self, i: usize) -> bool {
        if i == self.assignment.len() {
            self.solutions.push(self.assignment.clone());
            return self.mode == SolveMode::FirstSol;
        }
        for x in 0..self.csp.variables[i].domain.len() {
            self.assignment[i] = x;
            self.stats.assignments += 1;
            let mut ok = true;
            for &r in &self.due[i] {
                self.stats.constraint_checks += 1;
                let rel = &self.csp.relations[r];
                let tuple: Vec<usize> = rel.scope.iter().map(|&v| self.assignment[v]).collect();
                if !rel.allowed.contains(&tuple) {
                    ok = false;
                    break;
                }
            }
            if !ok {
                self.stats.backtracks += 1;
                continue;
            }
            if self.go(i + 1) {
                return true;
            }
        }
        false
    }
}

/// Node consistency for unary relations, then AC-3 over binary ones.
pub fn ac3_solve(csp: &Csp) -> Result<Ac3Outcome, BaselineError> {
    let mut domains: Vec<Vec<usize>> = csp
        .variables
        .iter()
        .map(|v| (0..v.domain.len()).collect())
        .collect();
    let mut revise_calls = 0;
    let mut arcs: Vec<(usize, usize, usize)> = Vec::new();
    for (ri, r) in csp.relations.iter().enumerate() {
        match r.scope.len() {
            0 => {
                if r.allowed.is_empty() {
                    return Ok(Ac3Outcome {
                        consistent: false,
                        domains,
                        revise_calls,
                        assignments: 0,
                    });
                }
            }
            1 => {
                let v = r.scope[0];
                domains[v].retain(|&x| r.allowed.contains(&vec![x]));
            }
            2 => {
                arcs.push((r.scope[0], r.scope[1], ri));
                arcs.push((r.scope[1], r.scope[0], ri));
            }
            _ => return Err(BaselineError::NonBinary(r.name.clone())),
        }
    }
    if domains.iter().any(Vec::is_empty) {
        return Ok(Ac3Outcome {
            consistent: false,
            domains,
            revise_calls,
            assignments: 0,
        });
    }
    let mut queue: VecDeque<(usize, usize, usize)> = arcs.iter().copied().collect();
    let mut queued: BTreeSet<(usize, usize, usize)> = arcs.iter().copied().collect();
    while let Some(arc) = queue.pop_front() {
        queued.remove(&arc);
        let (x, y, ri) = arc;
        revise_calls += 1;
        let rel = &csp.relations[ri];
        let x_first = rel.scope[0] == x;
        let before = domains[x].len();
        let ys = domains[y].clone();
        domains[x].retain(|&a| {
            ys.iter().any(|&b| {
                let t = if x_first { vec![a, b] } else { vec![b, a] };
                rel.allowed.contains(&t)
            })
        });
        if domains[x].len() != before {
            if domains[x].is_empty() {
                return Ok(Ac3Outcome {
                    consistent: false,
                    domains,
                    revise_calls,
                    assignments: 0,
                });
            }
            for &(k, target, rk) in &arcs {
                if target == x && !(k == y && rk == ri) && queued.insert((k, target, rk)) {
                    queue.push_back((k, target, rk));
                }
            }
        }
    }
    Ok(Ac3Outcome {
        consistent: true,
        domains,
        revise_calls,
        assignments: 0,
    })
}
