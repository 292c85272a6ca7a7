//! Downward search: tasks, path generation, choice points and the
//! completion loop that turns partial states into solutions.

use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use crate::activation::violated_obligations;
use crate::engine::{Counters, Engine, RunStats};
use crate::model::{ConstraintId, ConstraintKind, Network, Relation, SatisfactionValue, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    Satisfy,
    Unsatisfy,
}

impl Polarity {
    pub fn keyword(self) -> &'static str {
        match self {
            Polarity::Satisfy => "satisfy",
            Polarity::Unsatisfy => "unsatisfy",
        }
    }

    /// The fixed value a constraint must end with to honour this polarity.
    pub fn target(self) -> SatisfactionValue {
        match self {
            Polarity::Satisfy => SatisfactionValue::Satisfied,
            Polarity::Unsatisfy => SatisfactionValue::Unsatisfied,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Task {
    pub constraint: ConstraintId,
    pub polarity: Polarity,
}

impl Task {
    pub fn satisfy(constraint: ConstraintId) -> Self {
        Task {
            constraint,
            polarity: Polarity::Satisfy,
        }
    }

    pub fn unsatisfy(constraint: ConstraintId) -> Self {
        Task {
            constraint,
            polarity: Polarity::Unsatisfy,
        }
    }
}

/// One task per active child of a meta constraint, in child order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path(pub Vec<Task>);

impl Path {
    pub fn satisfy_count(&self) -> usize {
        self.0
            .iter()
            .filter(|t| t.polarity == Polarity::Satisfy)
            .count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMode {
    FirstSol,
    AllSols,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Solution {
    /// Value index per active variable.
    pub assignment: BTreeMap<VarId, usize>,
    /// Active constraints at acceptance. Not part of solution identity.
    pub active: BTreeSet<ConstraintId>,
}

impl Solution {
    /// `(variable, value)` names sorted by variable name.
    pub fn named(&self, net: &Network) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .assignment
            .iter()
            .map(|(v, &x)| {
                let var = net.variable(*v);
                (var.name.clone(), var.domain[x].clone())
            })
            .collect();
        out.sort();
        out
    }

    /// One `var=value` line, pairs sorted by variable name.
    pub fn to_line(&self, net: &Network) -> String {
        self.named(net)
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub solutions: Vec<Solution>,
    pub stats: RunStats,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Flow {
    Continue,
    Stop,
}

/// Persistent stack shared between sibling alternatives.
struct List<T>(Option<Rc<(T, List<T>)>>);

impl<T> Clone for List<T> {
    fn clone(&self) -> Self {
        List(self.0.clone())
    }
}

impl<T: Copy> List<T> {
    fn nil() -> Self {
        List(None)
    }

    fn push(&self, x: T) -> Self {
        List(Some(Rc::new((x, self.clone()))))
    }

    /// Builds a stack whose top is `items[0]`.
    fn from_front(items: &[T], rest: &List<T>) -> Self {
        let mut l = rest.clone();
        for &x in items.iter().rev() {
            l = l.push(x);
        }
        l
    }

    fn pop(&self) -> Option<(T, List<T>)> {
        self.0.as_ref().map(|n| (n.0, n.1.clone()))
    }

    fn iter(&self) -> impl Iterator<Item = T> + '_ {
        let mut cur = self.0.as_deref();
        std::iter::from_fn(move || {
            let n = cur?;
            cur = n.1 .0.as_deref();
            Some(n.0)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    /// Interactive step: stop as soon as the agenda is empty.
    StepOnly,
    /// Agenda empty means: try to finish the solution.
    Request,
    /// A completion round is running; `marker` is the live record count
    /// before it started.
    Completing { marker: u64 },
}

enum Outcome {
    Fail,
    Done,
    Values(VarId, Vec<usize>),
    Paths(Vec<Path>),
}

/// Why an interactive step failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepFailure {
    Inactive,
    Conflict,
    NoConsistentBranch,
    Violated(Vec<String>),
}

impl std::fmt::Display for StepFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StepFailure::Inactive => f.write_str("target is inactive"),
            StepFailure::Conflict => f.write_str("variable already holds a different value"),
            StepFailure::NoConsistentBranch => f.write_str("no consistent branch"),
            StepFailure::Violated(names) => {
                write!(f, "require-inactive violated: {}", names.join(", "))
            }
        }
    }
}

type Sink<'a> = dyn FnMut(&Engine) -> Flow + 'a;

impl Engine {
    /// Candidate child-task vectors for a meta constraint, in trial order.
    pub fn generate_paths(&self, c: ConstraintId, polarity: Polarity) -> Vec<Path> {
        let node = self.net.constraint(c);
        let ConstraintKind::Meta(kind) = node.kind else {
            return Vec::new();
        };
        let children: Vec<ConstraintId> = node
            .children
            .iter()
            .copied()
            .filter(|ch| self.state.active[ch.0])
            .collect();
        let k = children.len();
        // Children still to come can each land either way, so a count
        // short of the target or at its edge may yet be pushed across.
        let late = crate::activation::pending_children(&self.net, &self.state, c);
        let (min, max) = match kind.bounds() {
            Some(b) => b,
            None => (k, k),
        };
        let all = kind.bounds().is_none();
        let forced: Vec<Option<bool>> = children
            .iter()
            .map(|&ch| {
                let v = self.state.value[ch.0];
                if !self.options.pruning || !self.settled(ch) {
                    None
                } else if v.leans_satisfied() {
                    Some(true)
                } else if v.leans_unsatisfied() {
                    Some(false)
                } else {
                    None
                }
            })
            .collect();

        let mut vectors: Vec<Vec<bool>> = Vec::new();
        match polarity {
            Polarity::Satisfy => {
                let lo = if all { k } else { min.saturating_sub(late) };
                let hi = max.min(k);
                if lo <= hi {
                    for s in (lo..=hi).rev() {
                        combos(&forced, s, &mut vectors);
                    }
                }
            }
            Polarity::Unsatisfy => {
                let distance = |s: usize| if s < min { min - s } else { s.saturating_sub(max) };
                let mut counts: Vec<usize> = (0..=k).filter(|&s| s < min || s > max).collect();
                counts.sort_by_key(|&s| (distance(s), s));
                let mut i = 0;
                while i < counts.len() {
                    let d = distance(counts[i]);
                    let mut group = Vec::new();
                    while i < counts.len() && distance(counts[i]) == d {
                        combos(&forced, counts[i], &mut group);
                        i += 1;
                    }
                    // Satisfy sorts before Unsatisfy.
                    group.sort_by(|a, b| b.cmp(a));
                    vectors.extend(group);
                }
                // In-range counts that late children could still overturn.
                if late > 0 {
                    let from = if all { k } else { min.max((max + 1).saturating_sub(late)) };
                    for s in (from..=max.min(k)).rev() {
                        combos(&forced, s, &mut vectors);
                    }
                }
            }
        }
        vectors
            .into_iter()
            .map(|v| {
                Path(
                    children
                        .iter()
                        .zip(v)
                        .map(|(&ch, s)| Task {
                            constraint: ch,
                            polarity: if s { Polarity::Satisfy } else { Polarity::Unsatisfy },
                        })
                        .collect(),
                )
            })
            .collect()
    }

    /// Enumerates solutions reachable from the current state after running
    /// `requests` in order. The state is restored afterwards.
    pub fn solve(&mut self, requests: &[Task], mode: SolveMode) -> SolveOutcome {
        self.solve_committed(requests, &[], mode)
    }

    /// Like [`Engine::solve`], with earlier tasks whose polarity every
    /// solution must still honour.
    pub fn solve_committed(
        &mut self,
        requests: &[Task],
        commitments: &[Task],
        mode: SolveMode,
    ) -> SolveOutcome {
        let start = self.counters;
        let mark = self.trail.now();
        let mut solutions = Vec::new();
        self.search_from(requests, commitments, |e| {
            solutions.push(e.current_solution());
            match mode {
                SolveMode::FirstSol => Flow::Stop,
                SolveMode::AllSols => Flow::Continue,
            }
        });
        self.restore_counted(mark);
        let n = solutions.len() as u64;
        SolveOutcome {
            solutions,
            stats: self.stats_since(start, n),
        }
    }

    /// Finds the first solution and keeps the engine in that state.
    /// On failure the state is restored.
    pub fn extend_to_solution(&mut self, commitments: &[Task]) -> (Option<Solution>, RunStats) {
        let start: Counters = self.counters;
        let mark = self.trail.now();
        let mut found = None;
        let flow = self.search_from(&[], commitments, |e| {
            found = Some(e.current_solution());
            Flow::Stop
        });
        if flow == Flow::Continue {
            self.restore_counted(mark);
        }
        let n = found.is_some() as u64;
        (found, self.stats_since(start, n))
    }

    /// Runs one task, keeping the first consistent branch beneath it.
    /// On failure the state is restored.
    pub fn execute_step(&mut self, task: Task) -> Result<(), StepFailure> {
        let mark = self.trail.now();
        self.trail.advance();
        self.settle_values();
        if !self.check_activators().violated.is_empty() {
            let names = self.violation_names();
            self.restore_counted(mark);
            return Err(StepFailure::Violated(names));
        }
        if !self.state.active[task.constraint.0] {
            self.restore(mark).ok();
            return Err(StepFailure::Inactive);
        }
        let flow = self.run(
            List::nil().push(task),
            List::nil(),
            Phase::StepOnly,
            &mut |_: &Engine| Flow::Stop,
        );
        if flow == Flow::Stop {
            Ok(())
        } else {
            let names = self.violation_names();
            self.restore_counted(mark);
            if names.is_empty() {
                Err(StepFailure::NoConsistentBranch)
            } else {
                Err(StepFailure::Violated(names))
            }
        }
    }

    /// Assigns a variable as an interactive step. On failure the state is
    /// restored.
    pub fn assign_step(&mut self, var: VarId, value: usize) -> Result<(), StepFailure> {
        if !self.is_variable_active(var) {
            return Err(StepFailure::Inactive);
        }
        if matches!(self.state.assignment[var.0], Some(x) if x != value) {
            return Err(StepFailure::Conflict);
        }
        let mark = self.trail.now();
        self.trail.advance();
        self.settle_values();
        if self.state.assignment[var.0].is_none() && !self.assign_and_wave(var, value) {
            let names = self.violation_names();
            self.restore_counted(mark);
            return Err(StepFailure::Violated(names));
        }
        let report = self.check_activators();
        if !report.violated.is_empty() {
            let names = self.violation_names();
            self.restore_counted(mark);
            return Err(StepFailure::Violated(names));
        }
        Ok(())
    }

    /// Runs the opening wave on its own: every active value is brought up
    /// to date and the activators are checked. Keeps the result unless an
    /// obligation is violated.
    pub fn settle(&mut self) -> Result<(), StepFailure> {
        let mark = self.trail.now();
        self.trail.advance();
        self.settle_values();
        if !self.check_activators().violated.is_empty() {
            let names = self.violation_names();
            self.restore(mark).ok();
            return Err(StepFailure::Violated(names));
        }
        Ok(())
    }

    fn violation_names(&self) -> Vec<String> {
        self.last_violations
            .iter()
            .map(|a| self.net.activator(*a).name.clone())
            .collect()
    }

    fn restore_counted(&mut self, mark: crate::trail::Tick) {
        self.restore(mark).expect("mark precedes the current tick");
        self.counters.backtracks += 1;
    }

    fn search_from(
        &mut self,
        requests: &[Task],
        commitments: &[Task],
        mut sink: impl FnMut(&Engine) -> Flow,
    ) -> Flow {
        self.trail.advance();
        self.settle_values();
        if !self.check_activators().violated.is_empty() {
            return Flow::Continue;
        }
        let commits = List::from_front(commitments, &List::nil());
        self.run(
            List::from_front(requests, &List::nil()),
            commits,
            Phase::Request,
            &mut sink,
        )
    }

    /// Snapshot of the current assignment and active set.
    pub fn current_solution(&self) -> Solution {
        let assignment = self
            .net
            .variable_ids()
            .filter_map(|v| self.state.assignment[v.0].map(|x| (v, x)))
            .collect();
        let active = self
            .net
            .constraint_ids()
            .filter(|c| self.state.active[c.0])
            .collect();
        Solution { assignment, active }
    }

    /// Assigns, propagates and fires activators. False when a
    /// require-inactive obligation ends up violated.
    pub(crate) fn assign_and_wave(&mut self, var: VarId, value: usize) -> bool {
        self.assign_and_propagate(var, value);
        self.check_activators().violated.is_empty()
    }

    fn run(
        &mut self,
        mut agenda: List<Task>,
        mut commits: List<Task>,
        phase: Phase,
        sink: &mut Sink<'_>,
    ) -> Flow {
        loop {
            let Some((task, rest)) = agenda.pop() else {
                return self.complete(commits, phase, sink);
            };
            agenda = rest;
            match self.execute(task) {
                Outcome::Fail => return Flow::Continue,
                Outcome::Done => commits = commits.push(task),
                Outcome::Values(var, values) => {
                    commits = commits.push(task);
                    return self.explore(values, |e, x| {
                        if !e.assign_and_wave(var, x) {
                            return Flow::Continue;
                        }
                        e.run(agenda.clone(), commits.clone(), phase, sink)
                    });
                }
                Outcome::Paths(paths) => {
                    commits = commits.push(task);
                    return self.explore(paths, |e, p| {
                        e.run(List::from_front(&p.0, &agenda), commits.clone(), phase, sink)
                    });
                }
            }
        }
    }

    /// Tries each alternative in turn from the same state.
    fn explore<A>(&mut self, alts: Vec<A>, mut each: impl FnMut(&mut Self, A) -> Flow) -> Flow {
        let mark = self.trail.now();
        for (i, a) in alts.into_iter().enumerate() {
            if i > 0 {
                self.restore_counted(mark);
            }
            self.trail.advance();
            if each(self, a) == Flow::Stop {
                return Flow::Stop;
            }
        }
        Flow::Continue
    }

    /// Applies short-circuits and either finishes the task or returns the
    /// alternatives beneath it.
    fn execute(&mut self, task: Task) -> Outcome {
        use SatisfactionValue::*;
        let c = task.constraint;
        if !self.state.active[c.0] {
            return Outcome::Fail;
        }
        let v = self.state.value[c.0];
        match (task.polarity, v) {
            (Polarity::Satisfy, Satisfied) | (Polarity::Unsatisfy, Unsatisfied) => {
                return Outcome::Done
            }
            (Polarity::Satisfy, Unsatisfied) | (Polarity::Unsatisfy, Satisfied)
                if self.settled(c) =>
            {
                return Outcome::Fail
            }
            (Polarity::Satisfy, UnsatisfiedYet) | (Polarity::Unsatisfy, SatisfiedYet)
                if self.options.pruning && self.settled(c) =>
            {
                return Outcome::Fail
            }
            _ => {}
        }
        match self.net.constraint(c).kind {
            ConstraintKind::Base {
                var,
                relation,
                value,
            } => {
                // A non-fixed base has an unassigned variable.
                let direct = matches!(
                    (relation, task.polarity),
                    (Relation::Equal, Polarity::Satisfy) | (Relation::NotEqual, Polarity::Unsatisfy)
                );
                if direct {
                    if self.assign_and_wave(var, value) {
                        Outcome::Done
                    } else {
                        Outcome::Fail
                    }
                } else {
                    let n = self.net.variable(var).domain.len();
                    Outcome::Values(var, (0..n).filter(|&x| x != value).collect())
                }
            }
            ConstraintKind::Meta(_) => Outcome::Paths(self.generate_paths(c, task.polarity)),
        }
    }

    fn complete(&mut self, commits: List<Task>, phase: Phase, sink: &mut Sink<'_>) -> Flow {
        let marker = match phase {
            Phase::StepOnly => return sink(self),
            Phase::Request => None,
            Phase::Completing { marker } => Some(marker),
        };
        if self.all_active_fixed() {
            let top = self.net.top;
            let accepted = self.state.value[top.0] == SatisfactionValue::Satisfied
                && commits.iter().all(|t| {
                    self.state.active[t.constraint.0]
                        && self.state.value[t.constraint.0] == t.polarity.target()
                })
                && violated_obligations(&self.net, &self.state).is_empty();
            return if accepted { sink(self) } else { Flow::Continue };
        }
        let now = self.trail.live_records();
        if marker == Some(now) {
            // Satisfying the root changed nothing: the open part is not
            // reachable from it, so branch on a variable directly.
            let Some(var) = self.first_open_variable() else {
                return Flow::Continue;
            };
            let n = self.net.variable(var).domain.len();
            return self.explore((0..n).collect(), |e, x| {
                if !e.assign_and_wave(var, x) {
                    return Flow::Continue;
                }
                e.run(List::nil(), commits.clone(), Phase::Request, sink)
            });
        }
        let top = Task::satisfy(self.net.top);
        self.run(
            List::nil().push(top),
            commits,
            Phase::Completing { marker: now },
            sink,
        )
    }

    fn all_active_fixed(&self) -> bool {
        self.state
            .active
            .iter()
            .zip(&self.state.value)
            .all(|(&a, v)| !a || v.is_fixed())
    }

    fn first_open_variable(&self) -> Option<VarId> {
        self.net
            .variable_ids()
            .find(|&v| self.state.assignment[v.0].is_none() && self.is_variable_active(v))
    }
}

/// Appends every vector consistent with `forced` that has exactly `s`
/// Satisfy entries, Satisfy-first lexicographic order.
fn combos(forced: &[Option<bool>], s: usize, out: &mut Vec<Vec<bool>>) {
    fn go(forced: &[Option<bool>], i: usize, left: usize, cur: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if i == forced.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let remaining = forced.len() - i;
        if left > remaining {
            return;
        }
        if left > 0 && forced[i] != Some(false) {
            cur.push(true);
            go(forced, i + 1, left - 1, cur, out);
            cur.pop();
        }
        if forced[i] != Some(true) {
            cur.push(false);
            go(forced, i + 1, left, cur, out);
            cur.pop();
        }
    }
    go(forced, 0, s, &mut Vec::with_capacity(forced.len()), out);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combos_are_satisfy_first() {
        let mut out = Vec::new();
        combos(&[None, None, None], 2, &mut out);
        assert_eq!(
            out,
            vec![
                vec![true, true, false],
                vec![true, false, true],
                vec![false, true, true]
            ]
        );
    }

    #[test]
    fn combos_respect_forced_positions() {
        let mut out = Vec::new();
        combos(&[Some(true), None, Some(false)], 1, &mut out);
        assert_eq!(out, vec![vec![true, false, false]]);
    }

    #[test]
    fn list_order() {
        let l = List::from_front(&[1, 2, 3], &List::nil());
        assert_eq!(l.iter().collect::<Vec<_>>(), vec![1, 2, 3]);
        let (x, rest) = l.pop().unwrap();
        assert_eq!(x, 1);
        assert_eq!(rest.push(9).iter().collect::<Vec<_>>(), vec![9, 2, 3]);
    }
}
