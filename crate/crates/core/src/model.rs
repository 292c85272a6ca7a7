//! Constraint network data model: variables, the constraint tree, activators
//! and the five-valued satisfaction lattice.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub usize);

        impl $name {
            pub fn index(self) -> usize {
                self.0
            }
        }
    };
}

id_type!(
    /// Index of a variable inside its [`Network`].
    VarId
);
id_type!(
    /// Index of a constraint node inside its [`Network`].
    ConstraintId
);
id_type!(
    /// Index of an activator inside its [`Network`].
    ActivatorId
);

/// Satisfaction state carried by every constraint node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SatisfactionValue {
    #[default]
    Undetermined,
    Satisfied,
    Unsatisfied,
    SatisfiedYet,
    UnsatisfiedYet,
}

impl SatisfactionValue {
    pub const ALL: [SatisfactionValue; 5] = [
        SatisfactionValue::Undetermined,
        SatisfactionValue::Satisfied,
        SatisfactionValue::Unsatisfied,
        SatisfactionValue::SatisfiedYet,
        SatisfactionValue::UnsatisfiedYet,
    ];

    /// Satisfied or Unsatisfied.
    pub fn is_fixed(self) -> bool {
        matches!(self, Self::Satisfied | Self::Unsatisfied)
    }

    /// Satisfied, or pinned towards it.
    pub fn leans_satisfied(self) -> bool {
        matches!(self, Self::Satisfied | Self::SatisfiedYet)
    }

    /// Unsatisfied, or pinned towards it.
    pub fn leans_unsatisfied(self) -> bool {
        matches!(self, Self::Unsatisfied | Self::UnsatisfiedYet)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Undetermined => "undetermined",
            Self::Satisfied => "satisfied",
            Self::Unsatisfied => "unsatisfied",
            Self::SatisfiedYet => "satisfied_yet",
            Self::UnsatisfiedYet => "unsatisfied_yet",
        }
    }
}

impl fmt::Display for SatisfactionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub domain: Vec<String>,
    /// Must-be-assigned marker. Carried through for reporting; activity is
    /// what decides whether a variable needs a value.
    pub initial: bool,
}

impl Variable {
    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.domain.iter().position(|v| v == value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Equal,
    NotEqual,
}

impl Relation {
    pub fn holds(self, assigned: usize, value: usize) -> bool {
        match self {
            Relation::Equal => assigned == value,
            Relation::NotEqual => assigned != value,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Equal => "=",
            Relation::NotEqual => "!=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MetaKind {
    /// Bounds against all children; only active ones are counted.
    Standard { min: usize, max: usize },
    /// Bounds interpreted against the active children.
    Receiver { min: usize, max: usize },
    /// All active children must be satisfied.
    AllReceiver,
    /// The root; behaves as an AllReceiver.
    Top,
}

impl MetaKind {
    pub fn keyword(self) -> &'static str {
        match self {
            MetaKind::Standard { .. } => "meta",
            MetaKind::Receiver { .. } => "receiver",
            MetaKind::AllReceiver => "allreceiver",
            MetaKind::Top => "top",
        }
    }

    /// Declared bounds, if the kind carries any.
    pub fn bounds(self) -> Option<(usize, usize)> {
        match self {
            MetaKind::Standard { min, max } | MetaKind::Receiver { min, max } => Some((min, max)),
            MetaKind::AllReceiver | MetaKind::Top => None,
        }
    }

    /// Bounds used for evaluation given the number of active children.
    pub fn effective_bounds(self, active_children: usize) -> (usize, usize) {
        self.bounds().unwrap_or((active_children, active_children))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    Base {
        var: VarId,
        relation: Relation,
        value: usize,
    },
    Meta(MetaKind),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub kind: ConstraintKind,
    /// Empty for base constraints.
    pub children: Vec<ConstraintId>,
}

impl Constraint {
    pub fn is_base(&self) -> bool {
        matches!(self.kind, ConstraintKind::Base { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    ConstraintSatisfied(ConstraintId),
    VariableActive(VarId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ActivatorMode {
    Activate,
    RequireInactive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Activator {
    pub name: String,
    pub condition: Condition,
    pub mode: ActivatorMode,
    pub targets: Vec<ConstraintId>,
}

/// A loaded constraint network. Structure is immutable after construction;
/// mutable per-run state lives in [`State`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    pub name: String,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub activators: Vec<Activator>,
    pub top: ConstraintId,
    pub initially_active: BTreeSet<ConstraintId>,
    parent: Vec<Option<ConstraintId>>,
    depth: Vec<usize>,
    var_bases: Vec<Vec<ConstraintId>>,
    constraint_watchers: Vec<Vec<ActivatorId>>,
    variable_watchers: Vec<Vec<ActivatorId>>,
    activatable: Vec<bool>,
}

impl Network {
    /// Builds the network and its derived indices. Dangling references are
    /// tolerated here so that [`validate`] can report them.
    pub fn new(
        name: impl Into<String>,
        variables: Vec<Variable>,
        constraints: Vec<Constraint>,
        activators: Vec<Activator>,
        top: ConstraintId,
        initially_active: impl IntoIterator<Item = ConstraintId>,
    ) -> Self {
        let n = constraints.len();
        let mut parent = vec![None; n];
        for (i, c) in constraints.iter().enumerate() {
            for &ch in &c.children {
                if ch.0 < n && parent[ch.0].is_none() && ch.0 != i {
                    parent[ch.0] = Some(ConstraintId(i));
                }
            }
        }
        let mut depth = vec![0; n];
        for (i, d) in depth.iter_mut().enumerate() {
            let mut cur = i;
            let mut steps = 0;
            while let Some(p) = parent[cur] {
                steps += 1;
                if steps > n {
                    break;
                }
                cur = p.0;
            }
            *d = steps;
        }
        let mut var_bases = vec![Vec::new(); variables.len()];
        for (i, c) in constraints.iter().enumerate() {
            if let ConstraintKind::Base { var, .. } = c.kind {
                if var.0 < variables.len() {
                    var_bases[var.0].push(ConstraintId(i));
                }
            }
        }
        let mut constraint_watchers = vec![Vec::new(); n];
        let mut variable_watchers = vec![Vec::new(); variables.len()];
        for (i, a) in activators.iter().enumerate() {
            match a.condition {
                Condition::ConstraintSatisfied(c) if c.0 < n => {
                    constraint_watchers[c.0].push(ActivatorId(i))
                }
                Condition::VariableActive(v) if v.0 < variables.len() => {
                    variable_watchers[v.0].push(ActivatorId(i))
                }
                _ => {}
            }
        }
        let mut activatable = vec![false; n];
        for a in &activators {
            if a.mode == ActivatorMode::Activate {
                for t in a.targets.iter().filter(|t| t.0 < n) {
                    activatable[t.0] = true;
                }
            }
        }
        Network {
            name: name.into(),
            variables,
            constraints,
            activators,
            top,
            initially_active: initially_active.into_iter().collect(),
            parent,
            depth,
            var_bases,
            constraint_watchers,
            variable_watchers,
            activatable,
        }
    }

    pub fn constraint(&self, id: ConstraintId) -> &Constraint {
        &self.constraints[id.0]
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn activator(&self, id: ActivatorId) -> &Activator {
        &self.activators[id.0]
    }

    pub fn parent(&self, id: ConstraintId) -> Option<ConstraintId> {
        self.parent[id.0]
    }

    /// Distance from the root along parent links.
    pub fn depth(&self, id: ConstraintId) -> usize {
        self.depth[id.0]
    }

    /// Base constraints referring to `var`.
    pub fn bases_of(&self, var: VarId) -> &[ConstraintId] {
        &self.var_bases[var.0]
    }

    /// Whether some activate-mode activator targets `id`.
    pub fn is_activatable(&self, id: ConstraintId) -> bool {
        self.activatable[id.0]
    }

    pub fn watchers_of_constraint(&self, id: ConstraintId) -> &[ActivatorId] {
        &self.constraint_watchers[id.0]
    }

    pub fn watchers_of_variable(&self, id: VarId) -> &[ActivatorId] {
        &self.variable_watchers[id.0]
    }

    pub fn constraint_ids(&self) -> impl Iterator<Item = ConstraintId> {
        (0..self.constraints.len()).map(ConstraintId)
    }

    pub fn variable_ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.variables.len()).map(VarId)
    }

    pub fn activator_ids(&self) -> impl Iterator<Item = ActivatorId> {
        (0..self.activators.len()).map(ActivatorId)
    }

    pub fn constraint_by_name(&self, name: &str) -> Option<ConstraintId> {
        self.constraints
            .iter()
            .position(|c| c.name == name)
            .map(ConstraintId)
    }

    pub fn variable_by_name(&self, name: &str) -> Option<VarId> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .map(VarId)
    }

    pub fn activator_by_name(&self, name: &str) -> Option<ActivatorId> {
        self.activators
            .iter()
            .position(|a| a.name == name)
            .map(ActivatorId)
    }

    /// The load state: initially active constraints flagged, everything
    /// else Undetermined and unassigned.
    pub fn initial_state(&self) -> State {
        let mut active = vec![false; self.constraints.len()];
        for id in &self.initially_active {
            if id.0 < active.len() {
                active[id.0] = true;
            }
        }
        State {
            assignment: vec![None; self.variables.len()],
            active,
            value: vec![SatisfactionValue::Undetermined; self.constraints.len()],
        }
    }

    /// Renders a base constraint as `var = value` or `var != value`.
    pub fn describe_base(&self, id: ConstraintId) -> Option<String> {
        match self.constraint(id).kind {
            ConstraintKind::Base {
                var,
                relation,
                value,
            } => {
                let v = self.variable(var);
                Some(format!("{} {} {}", v.name, relation.symbol(), v.domain[value]))
            }
            ConstraintKind::Meta(_) => None,
        }
    }
}

/// Mutable per-run state of a network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct State {
    pub assignment: Vec<Option<usize>>,
    pub active: Vec<bool>,
    pub value: Vec<SatisfactionValue>,
}

impl State {
    pub fn is_active(&self, id: ConstraintId) -> bool {
        self.active[id.0]
    }

    pub fn value_of(&self, id: ConstraintId) -> SatisfactionValue {
        self.value[id.0]
    }

    pub fn assignment_of(&self, var: VarId) -> Option<usize> {
        self.assignment[var.0]
    }

    pub fn is_variable_active(&self, network: &Network, var: VarId) -> bool {
        network.bases_of(var).iter().any(|b| self.active[b.0])
    }
}

/// Variables referenced by at least one active base constraint.
pub fn active_variables(network: &Network, state: &State) -> BTreeSet<VarId> {
    network
        .constraints
        .iter()
        .enumerate()
        .filter(|(i, _)| state.active[*i])
        .filter_map(|(_, c)| match c.kind {
            ConstraintKind::Base { var, .. } => Some(var),
            ConstraintKind::Meta(_) => None,
        })
        .collect()
}

/// One structural problem found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Name of the offending item, when there is one.
    pub subject: Option<String>,
    pub message: String,
}

impl Violation {
    fn on(subject: &str, message: impl Into<String>) -> Self {
        Violation {
            subject: Some(subject.to_string()),
            message: message.into(),
        }
    }

    fn general(message: impl Into<String>) -> Self {
        Violation {
            subject: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.subject {
            Some(s) => write!(f, "{s}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Lists every structural problem of `network`. Empty means valid.
pub fn validate(network: &Network) -> Vec<Violation> {
    let mut out = Vec::new();
    let nc = network.constraints.len();
    let nv = network.variables.len();

    let mut seen = std::collections::HashSet::new();
    for v in &network.variables {
        if !seen.insert(("var", v.name.as_str())) {
            out.push(Violation::on(&v.name, "duplicate variable id"));
        }
        if v.domain.is_empty() {
            out.push(Violation::on(&v.name, "empty domain"));
        }
        let mut vals = std::collections::HashSet::new();
        for d in &v.domain {
            if !vals.insert(d) {
                out.push(Violation::on(&v.name, format!("duplicate domain value {d}")));
            }
        }
    }
    let mut names = std::collections::HashSet::new();
    for c in &network.constraints {
        if !names.insert(c.name.as_str()) {
            out.push(Violation::on(&c.name, "duplicate constraint id"));
        }
    }
    for a in &network.activators {
        if !names.insert(a.name.as_str()) {
            out.push(Violation::on(&a.name, "duplicate activator id"));
        }
    }

    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); nc];
    for (i, c) in network.constraints.iter().enumerate() {
        match c.kind {
            ConstraintKind::Base {
                var,
                relation: _,
                value,
            } => {
                if !c.children.is_empty() {
                    out.push(Violation::on(&c.name, "base constraint has children"));
                }
                if var.0 >= nv {
                    out.push(Violation::on(&c.name, "dangling variable reference"));
                } else if value >= network.variables[var.0].domain.len() {
                    out.push(Violation::on(&c.name, "value outside the variable's domain"));
                }
            }
            ConstraintKind::Meta(kind) => {
                if let Some((min, max)) = kind.bounds() {
                    if min > max {
                        out.push(Violation::on(&c.name, format!("min {min} exceeds max {max}")));
                    } else if matches!(kind, MetaKind::Standard { .. }) && max > c.children.len() {
                        out.push(Violation::on(
                            &c.name,
                            format!("max {max} exceeds child count {}", c.children.len()),
                        ));
                    }
                }
                if matches!(kind, MetaKind::Top) && ConstraintId(i) != network.top {
                    out.push(Violation::on(&c.name, "second top constraint"));
                }
            }
        }
        for &ch in &c.children {
            if ch.0 >= nc {
                out.push(Violation::on(&c.name, "dangling child reference"));
            } else {
                parents[ch.0].push(i);
            }
        }
    }

    if network.top.0 >= nc {
        out.push(Violation::general("top constraint missing"));
        return out;
    }
    let top = &network.constraints[network.top.0];
    if top.kind != ConstraintKind::Meta(MetaKind::Top) {
        out.push(Violation::on(&top.name, "root is not declared as top"));
    }
    if !parents[network.top.0].is_empty() {
        out.push(Violation::on(&top.name, "top constraint has a parent"));
    }
    let mut tree_ok = true;
    for (i, ps) in parents.iter().enumerate() {
        if i == network.top.0 {
            continue;
        }
        let name = &network.constraints[i].name;
        match ps.len() {
            0 => {
                out.push(Violation::on(name, "constraint has no parent"));
                tree_ok = false;
            }
            1 => {}
            _ => {
                out.push(Violation::on(name, "constraint has more than one parent"));
                tree_ok = false;
            }
        }
    }
    if tree_ok {
        for i in 0..nc {
            let mut cur = i;
            let mut steps = 0;
            while cur != network.top.0 {
                match parents[cur].first() {
                    Some(&p) => cur = p,
                    None => break,
                }
                steps += 1;
                if steps > nc {
                    out.push(Violation::on(
                        &network.constraints[i].name,
                        "cycle in parent links",
                    ));
                    break;
                }
            }
        }
    }

    for a in &network.activators {
        match a.condition {
            Condition::ConstraintSatisfied(c) if c.0 >= nc => {
                out.push(Violation::on(&a.name, "condition names an unknown constraint"))
            }
            Condition::VariableActive(v) if v.0 >= nv => {
                out.push(Violation::on(&a.name, "condition names an unknown variable"))
            }
            _ => {}
        }
        if a.targets.is_empty() {
            out.push(Violation::on(&a.name, "activator has no targets"));
        }
        if a.targets.iter().any(|t| t.0 >= nc) {
            out.push(Violation::on(&a.name, "dangling target reference"));
        }
    }

    if !network.initially_active.contains(&network.top) {
        out.push(Violation::on(&top.name, "top constraint is not initially active"));
    }
    if network.initially_active.iter().any(|c| c.0 >= nc) {
        out.push(Violation::general("initially active set names an unknown constraint"));
    }
    out
}
