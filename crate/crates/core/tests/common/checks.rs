//! Property checks shared by the proptest suites and the acceptance run.
//! Each returns a description of the first failure.

use std::collections::BTreeMap;

use dmc_core::{
    ConstraintId, ConstraintKind, Engine, Network, Polarity, Previous, SatisfactionValue, State, Subject, Task,
    Tick, Trail, VarId,
};

use super::{as_set, engine_solution_set, oracle};

fn describe(net: &Network) -> String {
    dmc_core::io::serialize(&dmc_core::io::ProblemDocument::from_network(net))
}

/// AllSols equals the brute-force enumeration, without duplicates, and
/// every emitted solution passes the independent checker.
pub fn oracle_agrees(net: &Network, requests: &[Task]) -> Result<usize, String> {
    let required: Vec<(ConstraintId, Polarity)> = requests.iter().map(|t| (t.constraint, t.polarity)).collect();
    let want = oracle::solutions(net, &required);
    let (got, _) = engine_solution_set(net, requests, true);
    let got_set = as_set(&got);
    if got_set.len() != got.len() {
        return Err(format!("duplicate solutions emitted\n{}", describe(net)));
    }
    for s in &got {
        if !oracle::is_solution(net, &oracle::dense(net, s), &required) {
            return Err(format!("emitted non-solution {s:?}\n{}", describe(net)));
        }
    }
    if got_set != want {
        return Err(format!(
            "engine found {} solutions, oracle {}\nengine {got_set:?}\noracle {want:?}\n{}",
            got_set.len(),
            want.len(),
            describe(net)
        ));
    }
    Ok(want.len())
}

/// Disabling the Yet short-circuits and doomed-vector skipping leaves the
/// solution set alone and never saves backtracks.
pub fn pruning_is_safe(net: &Network, requests: &[Task]) -> Result<(u64, u64), String> {
    let (on, bt_on) = engine_solution_set(net, requests, true);
    let (off, bt_off) = engine_solution_set(net, requests, false);
    if as_set(&on) != as_set(&off) {
        return Err(format!(
            "solution sets differ: {} with pruning, {} without\n{}",
            on.len(),
            off.len(),
            describe(net)
        ));
    }
    if bt_on > bt_off {
        return Err(format!("pruning raised backtracks from {bt_off} to {bt_on}\n{}", describe(net)));
    }
    Ok((bt_on, bt_off))
}

/// Applies `(variable, value)` steps through the interactive API after the
/// opening wave, calling `after` whenever a wave is kept. Steps that do not
/// apply are skipped.
fn apply_steps(e: &mut Engine, steps: &[(usize, usize)], mut after: impl FnMut(&Engine) -> Result<(), String>) -> Result<(), String> {
    if e.settle().is_err() {
        return Ok(());
    }
    after(e)?;
    let n = e.network().variables.len();
    for &(v, x) in steps {
        let var = VarId(v % n);
        let x = x % e.network().variable(var).domain.len();
        if e.assignment(var).is_some() || !e.is_variable_active(var) {
            continue;
        }
        if e.assign_step(var, x).is_ok() {
            after(e)?;
        }
    }
    Ok(())
}

/// After every wave, active flags match the from-scratch activation
/// fixpoint and every active value matches a from-scratch evaluation.
pub fn propagation_matches(net: &Network, steps: &[(usize, usize)]) -> Result<(), String> {
    let mut e = Engine::new(net.clone());
    apply_steps(&mut e, steps, |e| {
        let st = e.state();
        let active = oracle::fixpoint(net, &st.assignment);
        if active != st.active {
            return Err(format!("activity differs for {:?}\n{}", st.assignment, describe(net)));
        }
        let vals = oracle::values(net, &active, &st.assignment);
        for c in net.constraint_ids() {
            if st.active[c.0] && st.value[c.0] != vals[c.0] {
                return Err(format!(
                    "{} is {:?}, from scratch {:?}, under {:?}\n{}",
                    net.constraint(c).name,
                    st.value[c.0],
                    vals[c.0],
                    st.assignment,
                    describe(net)
                ));
            }
        }
        Ok(())
    })
}

/// Every SatisfiedYet meta ends Satisfied, and every UnsatisfiedYet one
/// Unsatisfied, under each way of fixing its undetermined bases. Returns
/// how many pinned metas were examined.
pub fn pinned_values_hold(net: &Network, steps: &[(usize, usize)], max_open: usize) -> Result<usize, String> {
    let mut e = Engine::new(net.clone());
    let mut examined = 0;
    let mut check = |e: &Engine| -> Result<(), String> {
        let st = e.state();
        for c in net.constraint_ids() {
            let want = match st.value[c.0] {
                SatisfactionValue::SatisfiedYet => SatisfactionValue::Satisfied,
                SatisfactionValue::UnsatisfiedYet => SatisfactionValue::Unsatisfied,
                _ => continue,
            };
            if !st.active[c.0] {
                continue;
            }
            let mut bases = Vec::new();
            oracle::active_bases_below(net, &st.active, c, &mut bases);
            let open: Vec<ConstraintId> = bases
                .into_iter()
                .filter(|b| st.value[b.0] == SatisfactionValue::Undetermined)
                .collect();
            if open.len() > max_open {
                continue;
            }
            examined += 1;
            for mask in 0u32..(1 << open.len()) {
                let leaf = |b: ConstraintId| match open.iter().position(|&o| o == b) {
                    Some(i) if mask & (1 << i) != 0 => SatisfactionValue::Satisfied,
                    Some(_) => SatisfactionValue::Unsatisfied,
                    None => st.value[b.0],
                };
                let got = oracle::value_with(net, &st.active, &leaf, c);
                if got != want {
                    return Err(format!(
                        "{} was {:?} but completion {mask:b} of {open:?} gives {got:?}\n{}",
                        net.constraint(c).name,
                        st.value[c.0],
                        describe(net)
                    ));
                }
            }
        }
        Ok(())
    };
    apply_steps(&mut e, steps, &mut check)?;
    Ok(examined)
}

/// Replays a random script of clock advances, recorded changes and
/// restores. Each restore must reproduce the state last seen at that tick;
/// restoring to 0 must give the loaded state.
pub fn trail_round_trips(net: &Network, script: &[(u8, u16, u16)]) -> Result<(), String> {
    let fresh = net.initial_state();
    let mut state = fresh.clone();
    let mut trail = Trail::new(net.constraints.len(), net.variables.len());
    let mut snapshots: BTreeMap<u64, State> = BTreeMap::new();
    snapshots.insert(0, state.clone());
    let mut last_issued = 0;
    let advance = |trail: &mut Trail, last: &mut u64| -> Result<(), String> {
        let t = trail.advance();
        if t.0 <= *last {
            return Err(format!("tick {} not above {}", t.0, *last));
        }
        *last = t.0;
        Ok(())
    };
    advance(&mut trail, &mut last_issued)?;
    let nc = net.constraints.len();
    let nv = net.variables.len();
    for &(op, a, b) in script {
        match op % 4 {
            0 => advance(&mut trail, &mut last_issued)?,
            1 | 2 => {
                let now = trail.now();
                if now.0 == 0 {
                    advance(&mut trail, &mut last_issued)?;
                }
                let at = trail.now();
                let kind = (b % 3) as usize;
                if kind == 2 && nv > 0 {
                    let v = a as usize % nv;
                    let old = state.assignment[v];
                    trail
                        .record_change(Subject::Variable(VarId(v)), Previous::Assignment(old), at)
                        .map_err(|e| e.to_string())?;
                    let d = net.variables[v].domain.len();
                    state.assignment[v] = if b % 5 == 0 { None } else { Some(b as usize % d) };
                } else {
                    let c = a as usize % nc;
                    if kind == 0 {
                        let old = state.value[c];
                        trail
                            .record_change(Subject::Constraint(ConstraintId(c)), Previous::Value(old), at)
                            .map_err(|e| e.to_string())?;
                        state.value[c] = SatisfactionValue::ALL[b as usize % 5];
                    } else {
                        let old = state.active[c];
                        trail
                            .record_change(Subject::Constraint(ConstraintId(c)), Previous::Active(old), at)
                            .map_err(|e| e.to_string())?;
                        state.active[c] = !old;
                    }
                }
                snapshots.insert(trail.now().0, state.clone());
            }
            _ => {
                let ticks: Vec<u64> = snapshots.keys().copied().collect();
                let to = ticks[a as usize % ticks.len()];
                trail.restore(&mut state, Tick(to)).map_err(|e| e.to_string())?;
                if state != snapshots[&to] {
                    return Err(format!("restore to {to} does not match its snapshot"));
                }
                snapshots.retain(|&t, _| t <= to);
                if trail.now().0 != to {
                    return Err(format!("clock reads {} after restoring to {to}", trail.now().0));
                }
            }
        }
        // A tick with no further changes still shows the latest state.
        snapshots.entry(trail.now().0).or_insert_with(|| state.clone());
    }
    trail.restore(&mut state, Tick(0)).map_err(|e| e.to_string())?;
    if state != fresh {
        return Err("restore(0) differs from the loaded state".into());
    }
    Ok(())
}

/// Count of bases, handy for generator sanity checks.
pub fn base_count(net: &Network) -> usize {
    net.constraints
        .iter()
        .filter(|c| matches!(c.kind, ConstraintKind::Base { .. }))
        .count()
}
