//! Global clock and per-object history records.
//!
//! Every change to a constraint's value or activity flag, or to a variable's
//! assignment, is recorded against the current tick together with the
//! previous value. Restoring to a tick pops and replays newer records on each
//! object.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ConstraintId, SatisfactionValue, State, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tick(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subject {
    Constraint(ConstraintId),
    Variable(VarId),
}

/// Which attribute changed, carrying its previous content.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Previous {
    Value(SatisfactionValue),
    Active(bool),
    Assignment(Option<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HistoryRecord {
    pub tick: Tick,
    pub subject: Subject,
    pub previous: Previous,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrailError {
    #[error("cannot restore to tick {to}: current tick is {now}")]
    FutureTick { to: u64, now: u64 },
    #[error("record stamped at tick {at} while the clock reads {now}")]
    StaleTick { at: u64, now: u64 },
    #[error("variable record carries a constraint attribute")]
    AttributeMismatch,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrailStats {
    pub min: u64,
    pub max: u64,
    pub average: f64,
}

#[derive(Clone, Debug)]
pub struct Trail {
    now: u64,
    issued: u64,
    constraints: Vec<Vec<(u64, Previous)>>,
    variables: Vec<Vec<(u64, Previous)>>,
    accumulated: Vec<u64>,
    total: u64,
    live: u64,
}

impl Trail {
    pub fn new(constraints: usize, variables: usize) -> Self {
        Trail {
            now: 0,
            issued: 0,
            constraints: vec![Vec::new(); constraints],
            variables: vec![Vec::new(); variables],
            accumulated: vec![0; constraints],
            total: 0,
            live: 0,
        }
    }

    pub fn now(&self) -> Tick {
        Tick(self.now)
    }

    /// Moves the clock past every tick issued so far.
    pub fn advance(&mut self) -> Tick {
        self.issued = self.issued.max(self.now) + 1;
        self.now = self.issued;
        Tick(self.now)
    }

    /// Records a change at the current tick.
    pub fn record(&mut self, subject: Subject, previous: Previous) {
        let now = self.now;
        self.push(subject, previous, now);
    }

    /// Records a change stamped `at`, which must be the current tick.
    pub fn record_change(
        &mut self,
        subject: Subject,
        previous: Previous,
        at: Tick,
    ) -> Result<(), TrailError> {
        if at.0 != self.now {
            return Err(TrailError::StaleTick {
                at: at.0,
                now: self.now,
            });
        }
        if matches!(subject, Subject::Variable(_)) && !matches!(previous, Previous::Assignment(_))
        {
            return Err(TrailError::AttributeMismatch);
        }
        self.push(subject, previous, at.0);
        Ok(())
    }

    fn push(&mut self, subject: Subject, previous: Previous, tick: u64) {
        self.total += 1;
        self.live += 1;
        match subject {
            Subject::Constraint(c) => {
                self.constraints[c.0].push((tick, previous));
                self.accumulated[c.0] += 1;
            }
            Subject::Variable(v) => self.variables[v.0].push((tick, previous)),
        }
    }

    /// Total number of records ever appended, popped ones included.
    pub fn records_appended(&self) -> u64 {
        self.total
    }

    /// Records currently on the trail. Along one branch this only grows,
    /// so it measures progress since an earlier point of the same branch.
    pub fn live_records(&self) -> u64 {
        self.live
    }

    /// Puts `state` back to how it was when tick `to` completed.
    pub fn restore(&mut self, state: &mut State, to: Tick) -> Result<(), TrailError> {
        if to.0 > self.now {
            return Err(TrailError::FutureTick {
                to: to.0,
                now: self.now,
            });
        }
        for (i, hist) in self.constraints.iter_mut().enumerate() {
            while let Some(&(t, prev)) = hist.last() {
                if t <= to.0 {
                    break;
                }
                hist.pop();
                self.live -= 1;
                match prev {
                    Previous::Value(v) => state.value[i] = v,
                    Previous::Active(a) => state.active[i] = a,
                    Previous::Assignment(_) => {}
                }
            }
        }
        for (i, hist) in self.variables.iter_mut().enumerate() {
            while let Some(&(t, prev)) = hist.last() {
                if t <= to.0 {
                    break;
                }
                hist.pop();
                self.live -= 1;
                if let Previous::Assignment(a) = prev {
                    state.assignment[i] = a;
                }
            }
        }
        self.now = to.0;
        Ok(())
    }

    /// Live records of one subject, oldest first.
    pub fn history(&self, subject: Subject) -> Vec<HistoryRecord> {
        let hist = match subject {
            Subject::Constraint(c) => &self.constraints[c.0],
            Subject::Variable(v) => &self.variables[v.0],
        };
        hist.iter()
            .map(|&(t, previous)| HistoryRecord {
                tick: Tick(t),
                subject,
                previous,
            })
            .collect()
    }

    /// Records ever appended per constraint, popped ones included.
    pub fn constraint_counts(&self) -> &[u64] {
        &self.accumulated
    }

    pub fn stats(&self) -> TrailStats {
        summarize(&self.accumulated)
    }
}

pub(crate) fn summarize(counts: &[u64]) -> TrailStats {
    if counts.is_empty() {
        return TrailStats::default();
    }
    let min = *counts.iter().min().unwrap_or(&0);
    let max = *counts.iter().max().unwrap_or(&0);
    let average = counts.iter().sum::<u64>() as f64 / counts.len() as f64;
    TrailStats { min, max, average }
}
