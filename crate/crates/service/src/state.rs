//! JSON view of a session.

use dmc_core::activation::condition_holds;
use dmc_core::{
    ActivatorId, ActivatorMode, Condition, ConstraintKind, MetaKind, Network, Relation, SatisfactionValue,
    Solution,
};
use serde::Serialize;

use crate::session::{Action, Session};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstraintJson {
    pub id: String,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<usize>,
    /// `var = value` or `var != value` for base constraints.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<String>,
    pub value: SatisfactionValue,
    pub active: bool,
    pub children: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VariableJson {
    pub id: String,
    pub domain: Vec<String>,
    pub assignment: Option<String>,
    pub active: bool,
    pub initial: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ActivatorJson {
    pub id: String,
    pub condition: ConditionJson,
    pub mode: &'static str,
    pub targets: Vec<String>,
    /// Condition holds now; for activate mode its targets are then active.
    pub fired: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConditionJson {
    Satisfied { constraint: String },
    VariableActive { variable: String },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ActivationJson {
    pub fired: Vec<String>,
    pub violated: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StepJson {
    pub step: usize,
    pub action: Action,
    pub tick: u64,
    pub activation: ActivationJson,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StateDocument {
    pub problem: String,
    pub top: String,
    pub constraints: Vec<ConstraintJson>,
    pub variables: Vec<VariableJson>,
    pub activators: Vec<ActivatorJson>,
    pub tick: u64,
    pub step_log: Vec<StepJson>,
    pub last_activation: ActivationJson,
}

pub fn activation_json(net: &Network, fired: &[ActivatorId], violated: &[ActivatorId]) -> ActivationJson {
    let names = |ids: &[ActivatorId]| ids.iter().map(|a| net.activator(*a).name.clone()).collect();
    ActivationJson {
        fired: names(fired),
        violated: names(violated),
    }
}

/// `{variable: value}` for one solution.
pub fn solution_json(net: &Network, s: &Solution) -> serde_json::Value {
    serde_json::Value::Object(
        s.named(net)
            .into_iter()
            .map(|(k, v)| (k, serde_json::Value::String(v)))
            .collect(),
    )
}

impl StateDocument {
    pub fn build(session: &Session) -> Self {
        let engine = session.engine();
        let net = engine.network();
        let st = engine.state();
        let name = |c: dmc_core::ConstraintId| net.constraint(c).name.clone();
        let constraints = net
            .constraint_ids()
            .map(|c| {
                let node = net.constraint(c);
                let (kind, bounds, test) = match node.kind {
                    ConstraintKind::Base { var, relation, value } => {
                        let v = net.variable(var);
                        let op = match relation {
                            Relation::Equal => "=",
                            Relation::NotEqual => "!=",
                        };
                        ("base", None, Some(format!("{} {op} {}", v.name, v.domain[value])))
                    }
                    ConstraintKind::Meta(m) => {
                        let kind = match m {
                            MetaKind::Standard { .. } => "meta",
                            MetaKind::Receiver { .. } => "receiver",
                            MetaKind::AllReceiver => "allreceiver",
                            MetaKind::Top => "top",
                        };
                        let active_kids = node.children.iter().filter(|k| st.active[k.0]).count();
                        (kind, Some(m.effective_bounds(active_kids)), None)
                    }
                };
                ConstraintJson {
                    id: node.name.clone(),
                    kind,
                    min: bounds.map(|b| b.0),
                    max: bounds.map(|b| b.1),
                    test,
                    value: st.value[c.0],
                    active: st.active[c.0],
                    children: node.children.iter().map(|&k| name(k)).collect(),
                }
            })
            .collect();
        let variables = net
            .variable_ids()
            .map(|v| {
                let var = net.variable(v);
                VariableJson {
                    id: var.name.clone(),
                    domain: var.domain.clone(),
                    assignment: st.assignment[v.0].map(|x| var.domain[x].clone()),
                    active: engine.is_variable_active(v),
                    initial: var.initial,
                }
            })
            .collect();
        let activators = net
            .activator_ids()
            .map(|a| {
                let act = net.activator(a);
                ActivatorJson {
                    id: act.name.clone(),
                    condition: match act.condition {
                        Condition::ConstraintSatisfied(c) => ConditionJson::Satisfied { constraint: name(c) },
                        Condition::VariableActive(v) => ConditionJson::VariableActive {
                            variable: net.variable(v).name.clone(),
                        },
                    },
                    mode: match act.mode {
                        ActivatorMode::Activate => "activate",
                        ActivatorMode::RequireInactive => "require-inactive",
                    },
                    targets: act.targets.iter().map(|&t| name(t)).collect(),
                    fired: condition_holds(net, st, act.condition),
                }
            })
            .collect();
        let step_log = session
            .steps()
            .iter()
            .map(|s| StepJson {
                step: s.number,
                action: s.action.clone(),
                tick: s.tick.0,
                activation: activation_json(net, &s.fired, &s.violated),
            })
            .collect();
        StateDocument {
            problem: net.name.clone(),
            top: name(net.top),
            constraints,
            variables,
            activators,
            tick: engine.now().0,
            step_log,
            last_activation: session.last_activation(),
        }
    }
}
