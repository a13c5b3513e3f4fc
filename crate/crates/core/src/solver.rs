//! Almost-sure reachability and parity solvers with policy synthesis.

use serde::Serialize;

use crate::attractor::{pattr_agent, pattr_env, pattr_env_blocking};
use crate::error::{Error, Result};
use crate::model::{remove_states, restrict_to, MemorylessPolicy, Rmdp};
use crate::oracle::{Oracle, OracleStats};
use crate::set::StateSet;

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub winning: StateSet,
    /// Agent policy on the winning set (empty for environment solvers).
    pub policy: MemorylessPolicy,
    /// States removed by each outer iteration at the top level.
    pub trace: Vec<StateSet>,
    pub stats: OracleStats,
    pub iterations: u32,
    /// Cost of the separate policy construction, when there is one.
    pub policy_stats: Option<OracleStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    Reach(StateSet),
    Parity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityAlgorithm {
    Standard,
    Efficient,
}

fn lowest_action(model: &Rmdp, s: crate::model::StateId) -> Option<crate::model::ActionId> {
    model.choices(s).first().map(|c| c.action)
}

/// Almost-sure reachability of `target`. Target states count as reached
/// on entry, so they are never removed.
pub fn as_reach(model: &Rmdp, target: &StateSet, oracle: &mut Oracle) -> Result<SolveResult> {
    if let Some(s) = target.difference(model.live()).iter().next() {
        return Err(Error::NotLive(model.state_name(s).to_string()));
    }
    let start = oracle.stats();
    let mut m = model.clone();
    let mut trace = Vec::new();
    let mut iterations = 0;
    let policy = loop {
        iterations += 1;
        let attr = pattr_agent(&m, target, oracle)?;
        let bad = m.live().difference(&attr.states);
        if bad.is_empty() {
            let mut policy = attr.witness;
            for t in target.iter() {
                if let Some(a) = lowest_action(&m, t) {
                    policy.set(t, a);
                }
            }
            break policy;
        }
        let z = pattr_env_blocking(&m, &bad, target, oracle)?.states;
        m = remove_states(&m, &z, oracle)?;
        trace.push(z);
    };
    Ok(SolveResult {
        winning: m.live().clone(),
        policy,
        trace,
        stats: oracle.stats().since(&start),
        iterations,
        policy_stats: None,
    })
}

fn top_priority(model: &Rmdp) -> Result<u32> {
    Ok(model.priorities().ok_or(Error::MissingPriorities)?.max_over(model.live()))
}

fn states_with_priority(model: &Rmdp, d: u32) -> Result<StateSet> {
    let pr = model.priorities().ok_or(Error::MissingPriorities)?;
    Ok(StateSet::from_ids(
        model.num_states(),
        model.live().iter().filter(|s| pr.get(*s) == d),
    ))
}

/// Outcome of one recursive level: the caller's winning set, the agent
/// policy on the states the agent wins (the winning set for the agent
/// variant, its complement for the environment variant) and the removals.
struct Level {
    winning: StateSet,
    policy: MemorylessPolicy,
    trace: Vec<StateSet>,
    iterations: u32,
}

fn agent_level(model: &Rmdp, d: u32, oracle: &mut Oracle) -> Result<Level> {
    let d = d + d % 2;
    let mut m = model.clone();
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let top = states_with_priority(&m, d)?;
        let attr = pattr_agent(&m, &top, oracle)?;
        let rest = m.live().difference(&attr.states);
        let (lost, rest_policy) = if rest.is_empty() {
            (m.empty_set(), MemorylessPolicy::new())
        } else {
            let sub = restrict_to(&m, &rest, oracle)?;
            let inner = env_level(&sub, d - 1, oracle)?;
            (inner.winning, inner.policy)
        };
        let g = pattr_env(&m, &lost, oracle)?.states;
        if g.is_empty() {
            let mut policy = attr.witness;
            for s in top.iter() {
                if let Some(a) = lowest_action(&m, s) {
                    policy.set(s, a);
                }
            }
            for (s, a) in rest_policy.iter() {
                policy.set(s, a);
            }
            return Ok(Level {
                winning: m.live().clone(),
                policy,
                trace,
                iterations,
            });
        }
        m = remove_states(&m, &g, oracle)?;
        trace.push(g);
    }
}

fn env_level(model: &Rmdp, d: u32, oracle: &mut Oracle) -> Result<Level> {
    let d = d + 1 - d % 2;
    let mut m = model.clone();
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut agent_policy = MemorylessPolicy::new();
    loop {
        iterations += 1;
        let top = states_with_priority(&m, d)?;
        let x = pattr_env(&m, &top, oracle)?.states;
        let rest = m.live().difference(&x);
        let (won, won_policy) = if rest.is_empty() {
            (m.empty_set(), MemorylessPolicy::new())
        } else {
            let sub = remove_states(&m, &x, oracle)?;
            let inner = agent_level(&sub, d - 1, oracle)?;
            (inner.winning, inner.policy)
        };
        let attr = pattr_agent(&m, &won, oracle)?;
        if attr.states.is_empty() {
            return Ok(Level {
                winning: m.live().clone(),
                policy: agent_policy,
                trace,
                iterations,
            });
        }
        for (s, a) in won_policy.iter() {
            agent_policy.set(s, a);
        }
        for (s, a) in attr.witness.iter() {
            agent_policy.set_if_absent(s, a);
        }
        let keep = m.live().difference(&attr.states);
        m = restrict_to(&m, &keep, oracle)?;
        trace.push(attr.states);
    }
}

/// States from which the agent satisfies the parity condition almost surely.
pub fn as_parity_agent(model: &Rmdp, oracle: &mut Oracle) -> Result<SolveResult> {
    let start = oracle.stats();
    let d = top_priority(model)?;
    let level = agent_level(model, d, oracle)?;
    Ok(SolveResult {
        winning: level.winning,
        policy: level.policy,
        trace: level.trace,
        stats: oracle.stats().since(&start),
        iterations: level.iterations,
        policy_stats: None,
    })
}

/// States from which the environment makes the parity condition fail
/// almost surely.
pub fn as_parity_env(model: &Rmdp, oracle: &mut Oracle) -> Result<SolveResult> {
    let start = oracle.stats();
    let d = top_priority(model)?;
    let level = env_level(model, d, oracle)?;
    Ok(SolveResult {
        winning: level.winning,
        policy: MemorylessPolicy::new(),
        trace: level.trace,
        stats: oracle.stats().since(&start),
        iterations: level.iterations,
        policy_stats: None,
    })
}

/// Agent policy winning outside the environment's region, as computed by
/// the environment solver.
pub fn env_counter_policy(model: &Rmdp, oracle: &mut Oracle) -> Result<MemorylessPolicy> {
    let d = top_priority(model)?;
    Ok(env_level(model, d, oracle)?.policy)
}

struct EffLevel {
    winning: StateSet,
    trace: Vec<StateSet>,
    iterations: u32,
}

/// One removal step of the agent procedure: returns the removed states.
fn eff_agent_step(m: &mut Rmdp, d: u32, ms_env: usize, ms_agent: usize, oracle: &mut Oracle) -> Result<StateSet> {
    let top = states_with_priority(m, d)?;
    let attr = pattr_agent(m, &top, oracle)?;
    let rest = m.live().difference(&attr.states);
    let lost = if rest.is_empty() {
        m.empty_set()
    } else {
        let sub = restrict_to(m, &rest, oracle)?;
        eff_env_level(&sub, d - 1, ms_env, ms_agent, oracle)?.winning
    };
    let g = pattr_env(m, &lost, oracle)?.states;
    if !g.is_empty() {
        *m = remove_states(m, &g, oracle)?;
    }
    Ok(g)
}

fn eff_env_step(m: &mut Rmdp, d: u32, ms_agent: usize, ms_env: usize, oracle: &mut Oracle) -> Result<StateSet> {
    let top = states_with_priority(m, d)?;
    let x = pattr_env(m, &top, oracle)?.states;
    let rest = m.live().difference(&x);
    let won = if rest.is_empty() {
        m.empty_set()
    } else {
        let sub = remove_states(m, &x, oracle)?;
        eff_agent_level(&sub, d - 1, ms_agent, ms_env, oracle)?.winning
    };
    let g = pattr_agent(m, &won, oracle)?.states;
    if !g.is_empty() {
        let keep = m.live().difference(&g);
        *m = restrict_to(m, &keep, oracle)?;
    }
    Ok(g)
}

/// Runs the shared three-phase schedule: small-budget removals until none
/// is found, one full-budget removal, then small-budget removals again.
fn three_phase(
    mut m: Rmdp,
    mut step: impl FnMut(&mut Rmdp, usize, &mut Oracle) -> Result<StateSet>,
    budget: usize,
    oracle: &mut Oracle,
) -> Result<EffLevel> {
    let mut trace = Vec::new();
    let mut iterations = 0;
    let record = |g: StateSet, trace: &mut Vec<StateSet>| {
        let empty = g.is_empty();
        if !empty {
            trace.push(g);
        }
        empty
    };
    loop {
        iterations += 1;
        let g = step(&mut m, budget / 2, oracle)?;
        if record(g, &mut trace) {
            break;
        }
    }
    iterations += 1;
    let g = step(&mut m, budget, oracle)?;
    record(g, &mut trace);
    loop {
        iterations += 1;
        let g = step(&mut m, budget / 2, oracle)?;
        if record(g, &mut trace) {
            break;
        }
    }
    Ok(EffLevel {
        winning: m.live().clone(),
        trace,
        iterations,
    })
}

fn eff_agent_level(model: &Rmdp, d: u32, ms_agent: usize, ms_env: usize, oracle: &mut Oracle) -> Result<EffLevel> {
    if model.num_live() == 0 || ms_agent == 0 {
        return Ok(EffLevel {
            winning: model.empty_set(),
            trace: Vec::new(),
            iterations: 0,
        });
    }
    let d = d + d % 2;
    three_phase(
        model.clone(),
        |m, budget, o| eff_agent_step(m, d, budget, ms_agent, o),
        ms_env,
        oracle,
    )
}

fn eff_env_level(model: &Rmdp, d: u32, ms_env: usize, ms_agent: usize, oracle: &mut Oracle) -> Result<EffLevel> {
    if model.num_live() == 0 || ms_env == 0 {
        return Ok(EffLevel {
            winning: model.empty_set(),
            trace: Vec::new(),
            iterations: 0,
        });
    }
    let d = d + 1 - d % 2;
    three_phase(
        model.clone(),
        |m, budget, o| eff_env_step(m, d, budget, ms_env, o),
        ms_agent,
        oracle,
    )
}

/// Quasi-polynomial parity solver for the agent with output-size budgets.
/// The policy is built afterwards on the actions that stay inside the
/// winning set; its oracle cost is reported separately in `policy_stats`.
pub fn eff_as_parity_agent(model: &Rmdp, ms_agent: usize, ms_env: usize, oracle: &mut Oracle) -> Result<SolveResult> {
    let start = oracle.stats();
    let d = top_priority(model)?;
    let level = eff_agent_level(model, d, ms_agent, ms_env, oracle)?;
    let stats = oracle.stats().since(&start);
    let policy_start = oracle.stats();
    let policy = if level.winning.is_empty() {
        MemorylessPolicy::new()
    } else {
        // keep only the actions that cannot leave the winning set
        let losing = model.live().difference(&level.winning);
        let sub = remove_states(model, &losing, oracle)?;
        let mut p = agent_level(&sub, d, oracle)?.policy;
        p.retain_domain(&level.winning);
        p
    };
    Ok(SolveResult {
        winning: level.winning,
        policy,
        trace: level.trace,
        stats,
        iterations: level.iterations,
        policy_stats: Some(oracle.stats().since(&policy_start)),
    })
}

pub fn eff_as_parity_env(model: &Rmdp, ms_env: usize, ms_agent: usize, oracle: &mut Oracle) -> Result<SolveResult> {
    let start = oracle.stats();
    let d = top_priority(model)?;
    let level = eff_env_level(model, d, ms_env, ms_agent, oracle)?;
    Ok(SolveResult {
        winning: level.winning,
        policy: MemorylessPolicy::new(),
        trace: level.trace,
        stats: oracle.stats().since(&start),
        iterations: level.iterations,
        policy_stats: None,
    })
}

/// Top-level efficient call with both budgets set to the number of live states.
pub fn eff_as_parity_agent_full(model: &Rmdp, oracle: &mut Oracle) -> Result<SolveResult> {
    let n = model.num_live();
    eff_as_parity_agent(model, n, n, oracle)
}

pub fn solve(model: &Rmdp, objective: &Objective, algorithm: ParityAlgorithm, oracle: &mut Oracle) -> Result<SolveResult> {
    match (objective, algorithm) {
        (Objective::Reach(t), _) => as_reach(model, t, oracle),
        (Objective::Parity, ParityAlgorithm::Standard) => as_parity_agent(model, oracle),
        (Objective::Parity, ParityAlgorithm::Efficient) => eff_as_parity_agent_full(model, oracle),
    }
}

/// Fixes the policy's action at every state of its domain and checks that
/// the whole domain stays winning.
pub fn verify_policy(model: &Rmdp, policy: &MemorylessPolicy, objective: &Objective, oracle: &mut Oracle) -> Result<bool> {
    let induced = model.induced_by(policy)?;
    let winning = solve(&induced, objective, ParityAlgorithm::Standard, oracle)?.winning;
    Ok(policy.domain(model.num_states()).is_subset(&winning))
}
