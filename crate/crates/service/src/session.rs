use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use dmc_core::activation::condition_holds;
use dmc_core::io::{load_network, LoadError};
use dmc_core::{
    ActivatorId, ActivatorMode, Engine, Polarity, RunStats, Solution, SolveMode, StepFailure, Task, Tick,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::{activation_json, solution_json, ActivationJson, StateDocument};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompleteMode {
    First,
    All,
}

/// One user action, as posted to `/sessions/{id}/steps`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "lowercase")]
pub enum Action {
    Task { constraint: String, polarity: PolarityName },
    Assign { variable: String, value: String },
    Complete { mode: CompleteMode },
    Undo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarityName {
    Satisfy,
    Unsatisfy,
}

impl From<PolarityName> for Polarity {
    fn from(p: PolarityName) -> Self {
        match p {
            PolarityName::Satisfy => Polarity::Satisfy,
            PolarityName::Unsatisfy => Polarity::Unsatisfy,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StepEntry {
    pub number: usize,
    pub action: Action,
    /// Tick in force before the step; undo restores to it.
    pub before: Tick,
    pub tick: Tick,
    pub fired: Vec<ActivatorId>,
    pub violated: Vec<ActivatorId>,
    /// Task to keep honouring in later completions.
    pub commitment: Option<Task>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SessionError {
    #[error("unknown session")]
    NotFound,
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Failed(String),
}

/// Result of a non-mutating count of every completion.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Completion {
    pub count: usize,
    pub solutions: Vec<serde_json::Value>,
    pub stats: RunStats,
}

pub struct Session {
    engine: Engine,
    steps: Vec<StepEntry>,
    last: (Vec<ActivatorId>, Vec<ActivatorId>),
    last_used: Instant,
}

impl Session {
    pub fn new(engine: Engine) -> Self {
        Session {
            engine,
            steps: Vec::new(),
            last: (Vec::new(), Vec::new()),
            last_used: Instant::now(),
        }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn steps(&self) -> &[StepEntry] {
        &self.steps
    }

    pub fn state(&self) -> StateDocument {
        StateDocument::build(self)
    }

    pub fn last_activation(&self) -> ActivationJson {
        activation_json(self.engine.network(), &self.last.0, &self.last.1)
    }

    fn commitments(&self) -> Vec<Task> {
        self.steps.iter().filter_map(|s| s.commitment).collect()
    }

    /// Activate-mode activators that switched a target on since `before`.
    fn fired_since(&self, before: &BTreeSet<usize>) -> Vec<ActivatorId> {
        let net = self.engine.network();
        let st = self.engine.state();
        net.activator_ids()
            .filter(|&a| {
                let act = net.activator(a);
                act.mode == ActivatorMode::Activate
                    && condition_holds(net, st, act.condition)
                    && act.targets.iter().any(|t| st.active[t.0] && !before.contains(&t.0))
            })
            .collect()
    }

    /// Applies one action. Failures leave the session exactly as it was.
    pub fn apply(&mut self, action: Action) -> Result<Option<Completion>, SessionError> {
        self.last_used = Instant::now();
        if action == Action::Undo {
            let entry = self
                .steps
                .pop()
                .ok_or_else(|| SessionError::Failed("nothing to undo".into()))?;
            self.engine
                .restore(entry.before)
                .map_err(|e| SessionError::Failed(e.to_string()))?;
            self.last = self
                .steps
                .last()
                .map(|s| (s.fired.clone(), s.violated.clone()))
                .unwrap_or_default();
            return Ok(None);
        }
        if let Action::Complete { mode: CompleteMode::All } = action {
            return Ok(Some(self.count_all()));
        }

        let before_tick = self.engine.now();
        let before_active: BTreeSet<usize> = (0..self.engine.network().constraints.len())
            .filter(|&c| self.engine.state().active[c])
            .collect();
        let net = self.engine.network();
        let mut commitment = None;
        let outcome: Result<(), StepFailure> = match &action {
            Action::Task { constraint, polarity } => {
                let c = net
                    .constraint_by_name(constraint)
                    .ok_or_else(|| SessionError::BadRequest(format!("unknown constraint {constraint}")))?;
                let task = Task {
                    constraint: c,
                    polarity: (*polarity).into(),
                };
                commitment = Some(task);
                self.engine.execute_step(task)
            }
            Action::Assign { variable, value } => {
                let v = net
                    .variable_by_name(variable)
                    .ok_or_else(|| SessionError::BadRequest(format!("unknown variable {variable}")))?;
                let x = net
                    .variable(v)
                    .value_index(value)
                    .ok_or_else(|| SessionError::BadRequest(format!("{value} is not in the domain of {variable}")))?;
                self.engine.assign_step(v, x)
            }
            Action::Complete { .. } => {
                let commitments = self.commitments();
                match self.engine.extend_to_solution(&commitments).0 {
                    Some(_) => Ok(()),
                    None => Err(StepFailure::NoConsistentBranch),
                }
            }
            Action::Undo => unreachable!(),
        };
        if let Err(f) = outcome {
            return Err(SessionError::Failed(match f {
                StepFailure::Inactive => "inactive".into(),
                StepFailure::Conflict => "conflict".into(),
                other => other.to_string(),
            }));
        }
        let fired = self.fired_since(&before_active);
        let violated = self.engine.last_violations().to_vec();
        self.last = (fired.clone(), violated.clone());
        self.steps.push(StepEntry {
            number: self.steps.len() + 1,
            action,
            before: before_tick,
            tick: self.engine.now(),
            fired,
            violated,
            commitment,
        });
        Ok(None)
    }

    /// Every solution reachable from the current state, found on a copy.
    fn count_all(&self) -> Completion {
        let mut copy = self.engine.clone();
        let top = copy.network().top;
        let out = copy.solve_committed(&[Task::satisfy(top)], &self.commitments(), SolveMode::AllSols);
        let net = self.engine.network();
        Completion {
            count: out.solutions.len(),
            solutions: out.solutions.iter().map(|s: &Solution| solution_json(net, s)).collect(),
            stats: out.stats,
        }
    }
}

/// All live sessions. Each session sits behind its own lock, so requests on
/// one session are serialised while different sessions proceed in parallel.
pub struct SessionManager {
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    idle: Duration,
}

impl SessionManager {
    pub fn new(idle: Duration) -> Self {
        SessionManager {
            sessions: Mutex::new(HashMap::new()),
            idle,
        }
    }

    pub fn create(&self, text: &str) -> Result<String, LoadError> {
        let net = load_network(text)?;
        let id = uuid::Uuid::new_v4().to_string();
        self.expire();
        self.sessions
            .lock()
            .unwrap()
            .insert(id.clone(), Arc::new(Mutex::new(Session::new(Engine::new(net)))));
        Ok(id)
    }

    pub fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, SessionError> {
        self.expire();
        self.sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or(SessionError::NotFound)
    }

    pub fn remove(&self, id: &str) -> bool {
        self.sessions.lock().unwrap().remove(id).is_some()
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops sessions idle for longer than the timeout. A session whose
    /// lock is held is in use and stays.
    pub fn expire(&self) {
        let idle = self.idle;
        self.sessions.lock().unwrap().retain(|_, s| match s.try_lock() {
            Ok(s) => s.last_used.elapsed() <= idle,
            Err(_) => true,
        });
    }
}
