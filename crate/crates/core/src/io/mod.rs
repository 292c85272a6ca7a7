//! The `.dmc` problem language: document model, parser, serializer,
//! lowering to a [`Network`] and bundled fixtures.

mod parse;
mod serialize;
pub mod fixtures;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::model::{
    validate, Activator, ActivatorMode, Condition, Constraint, ConstraintId, ConstraintKind,
    MetaKind, Network, Relation, Variable, VarId, Violation,
};

pub use parse::{parse, ParseError};
pub use serialize::serialize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub domain: Vec<String>,
    pub initial: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseDecl {
    pub name: String,
    pub var: String,
    pub relation: Relation,
    pub value: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetaKeyword {
    Meta,
    Receiver,
    AllReceiver,
    Top,
}

impl MetaKeyword {
    pub fn as_str(self) -> &'static str {
        match self {
            MetaKeyword::Meta => "meta",
            MetaKeyword::Receiver => "receiver",
            MetaKeyword::AllReceiver => "allreceiver",
            MetaKeyword::Top => "top",
        }
    }

    pub fn takes_bounds(self) -> bool {
        matches!(self, MetaKeyword::Meta | MetaKeyword::Receiver)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetaDecl {
    pub name: String,
    pub keyword: MetaKeyword,
    /// Present exactly for `meta` and `receiver`.
    pub bounds: Option<(usize, usize)>,
    pub children: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CondDecl {
    Satisfied(String),
    VariableActive(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActivatorDecl {
    pub name: String,
    pub condition: CondDecl,
    pub mode: ActivatorMode,
    pub targets: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Comment(String),
    Var(VarDecl),
    Base(BaseDecl),
    Meta(MetaDecl),
    Activator(ActivatorDecl),
    Active(Vec<String>),
}

/// A parsed problem, in declaration order. Whole-line comments are kept.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ProblemDocument {
    pub name: String,
    pub items: Vec<Item>,
}

/// A name-resolution problem found while lowering a document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemanticError {
    pub message: String,
}

impl fmt::Display for SemanticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{0}")]
    Syntax(#[from] ParseError),
    #[error("{}", join(.0))]
    Semantic(Vec<SemanticError>),
    #[error("{}", join(.0))]
    Invalid(Vec<Violation>),
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl ProblemDocument {
    /// Resolves names into a network. Unknown and duplicate ids are
    /// collected and reported together.
    pub fn to_network(&self) -> Result<Network, Vec<SemanticError>> {
        let mut errors = Vec::new();
        let mut err = |m: String| errors.push(SemanticError { message: m });

        let mut var_ix: HashMap<&str, usize> = HashMap::new();
        let mut con_ix: HashMap<&str, usize> = HashMap::new();
        let mut act_names: HashMap<&str, ()> = HashMap::new();
        let mut vars = Vec::new();
        let mut ncon = 0;
        for item in &self.items {
            match item {
                Item::Var(v) => {
                    if var_ix.insert(&v.name, vars.len()).is_some() {
                        err(format!("duplicate variable id {}", v.name));
                    }
                    vars.push(v);
                }
                Item::Base(BaseDecl { name, .. }) | Item::Meta(MetaDecl { name, .. }) => {
                    if con_ix.insert(name, ncon).is_some() {
                        err(format!("duplicate constraint id {name}"));
                    }
                    ncon += 1;
                }
                Item::Activator(a) => {
                    if act_names.insert(&a.name, ()).is_some() {
                        err(format!("duplicate activator id {}", a.name));
                    }
                }
                Item::Comment(_) | Item::Active(_) => {}
            }
        }
        for item in &self.items {
            if let Item::Activator(a) = item {
                if con_ix.contains_key(a.name.as_str()) {
                    err(format!("id {} names both a constraint and an activator", a.name));
                }
            }
        }
        let lookup_c = |name: &str, ctx: &str, err: &mut dyn FnMut(String)| -> ConstraintId {
            match con_ix.get(name) {
                Some(&i) => ConstraintId(i),
                None => {
                    err(format!("{ctx}: unknown constraint {name}"));
                    ConstraintId(usize::MAX)
                }
            }
        };

        let variables: Vec<Variable> = vars
            .iter()
            .map(|v| Variable {
                name: v.name.clone(),
                domain: v.domain.clone(),
                initial: v.initial,
            })
            .collect();
        let mut constraints = Vec::new();
        let mut activators = Vec::new();
        let mut active = Vec::new();
        let mut top = None;
        for item in &self.items {
            match item {
                Item::Base(b) => {
                    let (var, value) = match var_ix.get(b.var.as_str()) {
                        Some(&vi) => match variables[vi].value_index(&b.value) {
                            Some(x) => (VarId(vi), x),
                            None => {
                                err(format!(
                                    "{}: value {} is not in the domain of {}",
                                    b.name, b.value, b.var
                                ));
                                (VarId(vi), usize::MAX)
                            }
                        },
                        None => {
                            err(format!("{}: unknown variable {}", b.name, b.var));
                            (VarId(usize::MAX), usize::MAX)
                        }
                    };
                    constraints.push(Constraint {
                        name: b.name.clone(),
                        kind: ConstraintKind::Base {
                            var,
                            relation: b.relation,
                            value,
                        },
                        children: vec![],
                    });
                }
                Item::Meta(m) => {
                    let kind = match (m.keyword, m.bounds) {
                        (MetaKeyword::Meta, Some((min, max))) => MetaKind::Standard { min, max },
                        (MetaKeyword::Receiver, Some((min, max))) => MetaKind::Receiver { min, max },
                        (MetaKeyword::AllReceiver, _) => MetaKind::AllReceiver,
                        (MetaKeyword::Top, _) => MetaKind::Top,
                        (kw, None) => {
                            err(format!("{}: {} requires min and max", m.name, kw.as_str()));
                            MetaKind::Standard { min: 0, max: 0 }
                        }
                    };
                    if kind == MetaKind::Top {
                        if top.is_some() {
                            err(format!("{}: second top constraint", m.name));
                        }
                        top = Some(ConstraintId(constraints.len()));
                    }
                    let children = m
                        .children
                        .iter()
                        .map(|c| lookup_c(c, &m.name, &mut err))
                        .collect();
                    constraints.push(Constraint {
                        name: m.name.clone(),
                        kind: ConstraintKind::Meta(kind),
                        children,
                    });
                }
                Item::Activator(a) => {
                    let condition = match &a.condition {
                        CondDecl::Satisfied(c) => {
                            Condition::ConstraintSatisfied(lookup_c(c, &a.name, &mut err))
                        }
                        CondDecl::VariableActive(v) => match var_ix.get(v.as_str()) {
                            Some(&vi) => Condition::VariableActive(VarId(vi)),
                            None => {
                                err(format!("{}: unknown variable {v}", a.name));
                                Condition::VariableActive(VarId(usize::MAX))
                            }
                        },
                    };
                    let targets = a
                        .targets
                        .iter()
                        .map(|t| lookup_c(t, &a.name, &mut err))
                        .collect();
                    activators.push(Activator {
                        name: a.name.clone(),
                        condition,
                        mode: a.mode,
                        targets,
                    });
                }
                Item::Active(ids) => {
                    for id in ids {
                        active.push(lookup_c(id, "active", &mut err));
                    }
                }
                Item::Comment(_) | Item::Var(_) => {}
            }
        }
        if top.is_none() {
            err("no top constraint declared".to_string());
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        Ok(Network::new(
            self.name.clone(),
            variables,
            constraints,
            activators,
            top.unwrap_or(ConstraintId(0)),
            active,
        ))
    }

    /// Document listing `net` item by item: variables, constraints in index
    /// order, activators, then the initially active set.
    pub fn from_network(net: &Network) -> Self {
        let mut items = Vec::new();
        for v in &net.variables {
            items.push(Item::Var(VarDecl {
                name: v.name.clone(),
                domain: v.domain.clone(),
                initial: v.initial,
            }));
        }
        let cname = |c: &ConstraintId| net.constraint(*c).name.clone();
        for c in &net.constraints {
            items.push(match c.kind {
                ConstraintKind::Base {
                    var,
                    relation,
                    value,
                } => Item::Base(BaseDecl {
                    name: c.name.clone(),
                    var: net.variable(var).name.clone(),
                    relation,
                    value: net.variable(var).domain[value].clone(),
                }),
                ConstraintKind::Meta(kind) => Item::Meta(MetaDecl {
                    name: c.name.clone(),
                    keyword: match kind {
                        MetaKind::Standard { .. } => MetaKeyword::Meta,
                        MetaKind::Receiver { .. } => MetaKeyword::Receiver,
                        MetaKind::AllReceiver => MetaKeyword::AllReceiver,
                        MetaKind::Top => MetaKeyword::Top,
                    },
                    bounds: kind.bounds(),
                    children: c.children.iter().map(cname).collect(),
                }),
            });
        }
        for a in &net.activators {
            items.push(Item::Activator(ActivatorDecl {
                name: a.name.clone(),
                condition: match a.condition {
                    Condition::ConstraintSatisfied(c) => CondDecl::Satisfied(cname(&c)),
                    Condition::VariableActive(v) => {
                        CondDecl::VariableActive(net.variable(v).name.clone())
                    }
                },
                mode: a.mode,
                targets: a.targets.iter().map(cname).collect(),
            }));
        }
        items.push(Item::Active(net.initially_active.iter().map(cname).collect()));
        ProblemDocument {
            name: net.name.clone(),
            items,
        }
    }
}

/// Parses, resolves and validates `text`.
pub fn load_network(text: &str) -> Result<Network, LoadError> {
    let doc = parse(text)?;
    let net = doc.to_network().map_err(LoadError::Semantic)?;
    let violations = validate(&net);
    if violations.is_empty() {
        Ok(net)
    } else {
        Err(LoadError::Invalid(violations))
    }
}
