//! Positive attractors for the agent and for the environment.
//!
//! The layers are computed exactly as in the textbook recurrence
//! `T_i = T_{i-1} ∪ {s | force(s, T_{i-1})}`, except that a layer only
//! re-examines predecessors of the states added by the previous layer. A
//! force predicate depends only on which successors lie in the target, so
//! this yields the same layers and ranks as re-examining every state.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{MemorylessPolicy, Rmdp, StateId};
use crate::oracle::{Oracle, OracleStats};
use crate::set::StateSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Agent,
    Env,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Agent => Player::Env,
            Player::Env => Player::Agent,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AttractorResult {
    pub states: StateSet,
    /// Layer index at which each state entered; `None` outside the attractor.
    pub rank: Vec<Option<u32>>,
    /// Agent attractors only: an action forcing the previous layer, for every
    /// non-target member.
    pub witness: MemorylessPolicy,
    pub stats: OracleStats,
}

impl AttractorResult {
    pub fn rank_of(&self, state: StateId) -> Option<u32> {
        self.rank[state.0]
    }

    /// Number of layers added on top of the target.
    pub fn depth(&self) -> u32 {
        self.rank.iter().flatten().copied().max().unwrap_or(0)
    }
}

/// Live states with an available action whose face contains each state.
pub fn predecessors(model: &Rmdp) -> Vec<Vec<StateId>> {
    let mut preds = vec![Vec::new(); model.num_states()];
    for s in model.live().iter() {
        for choice in model.choices(s) {
            for t in choice.face_states() {
                let list: &mut Vec<StateId> = &mut preds[t.0];
                if list.last() != Some(&s) {
                    list.push(s);
                }
            }
        }
    }
    preds
}

pub fn pattr_agent(model: &Rmdp, target: &StateSet, oracle: &mut Oracle) -> Result<AttractorResult> {
    attractor(model, target, None, Player::Agent, oracle)
}

pub fn pattr_env(model: &Rmdp, target: &StateSet, oracle: &mut Oracle) -> Result<AttractorResult> {
    attractor(model, target, None, Player::Env, oracle)
}

/// Environment attractor in which the `blocked` states never join.
pub fn pattr_env_blocking(
    model: &Rmdp,
    target: &StateSet,
    blocked: &StateSet,
    oracle: &mut Oracle,
) -> Result<AttractorResult> {
    attractor(model, target, Some(blocked), Player::Env, oracle)
}

pub fn pattr(model: &Rmdp, target: &StateSet, player: Player, oracle: &mut Oracle) -> Result<AttractorResult> {
    attractor(model, target, None, player, oracle)
}

fn check_target(model: &Rmdp, target: &StateSet) -> Result<()> {
    if target.capacity() != model.num_states() {
        return Err(Error::InvalidModel("target set sized for a different model".into()));
    }
    match target.difference(model.live()).iter().next() {
        Some(s) => Err(Error::NotLive(model.state_name(s).to_string())),
        None => Ok(()),
    }
}

/// Evaluates the force predicate of `player`, returning the witness action
/// for the agent.
fn force(
    model: &Rmdp,
    s: StateId,
    current: &StateSet,
    player: Player,
    oracle: &mut Oracle,
) -> Result<Option<Option<crate::model::ActionId>>> {
    Ok(match player {
        Player::Agent => oracle.agent_witness(model, s, current)?.map(Some),
        Player::Env => oracle.force_env(model, s, current)?.then_some(None),
    })
}

fn attractor(
    model: &Rmdp,
    target: &StateSet,
    blocked: Option<&StateSet>,
    player: Player,
    oracle: &mut Oracle,
) -> Result<AttractorResult> {
    check_target(model, target)?;
    let start = oracle.stats();
    let n = model.num_states();
    let preds = predecessors(model);
    let mut current = target.clone();
    let mut rank = vec![None; n];
    for t in target.iter() {
        rank[t.0] = Some(0);
    }
    let mut witness = MemorylessPolicy::new();
    let mut frontier = target.clone();
    let mut layer = 0;
    loop {
        layer += 1;
        let mut candidates = StateSet::empty(n);
        for t in frontier.iter() {
            for &p in &preds[t.0] {
                candidates.insert(p);
            }
        }
        if layer == 1 && player == Player::Env {
            // Stuck states join the environment attractor vacuously.
            for s in model.live().iter() {
                if model.choices(s).is_empty() {
                    candidates.insert(s);
                }
            }
        }
        candidates.difference_with(&current);
        if let Some(b) = blocked {
            candidates.difference_with(b);
        }
        let mut added = StateSet::empty(n);
        for s in candidates.iter() {
            if let Some(action) = force(model, s, &current, player, oracle)? {
                added.insert(s);
                rank[s.0] = Some(layer);
                if let Some(a) = action {
                    witness.set(s, a);
                }
            }
        }
        if added.is_empty() {
            break;
        }
        current.union_with(&added);
        frontier = added;
    }
    let stats = oracle.stats().since(&start);
    let live = model.num_live() as u64;
    debug_assert!(stats.force_calls() <= live * live + live, "attractor used {} force calls", stats.force_calls());
    Ok(AttractorResult {
        states: current,
        rank,
        witness,
        stats,
    })
}

/// Layered loop that re-examines every state outside the current layer.
pub fn pattr_naive(model: &Rmdp, target: &StateSet, player: Player, oracle: &mut Oracle) -> Result<AttractorResult> {
    check_target(model, target)?;
    let start = oracle.stats();
    let n = model.num_states();
    let mut current = target.clone();
    let mut rank = vec![None; n];
    for t in target.iter() {
        rank[t.0] = Some(0);
    }
    let mut witness = MemorylessPolicy::new();
    let mut layer = 0;
    loop {
        layer += 1;
        let mut added = StateSet::empty(n);
        for s in model.live().difference(&current).iter() {
            if let Some(action) = force(model, s, &current, player, oracle)? {
                added.insert(s);
                rank[s.0] = Some(layer);
                if let Some(a) = action {
                    witness.set(s, a);
                }
            }
        }
        if added.is_empty() {
            break;
        }
        current.union_with(&added);
    }
    Ok(AttractorResult {
        states: current,
        rank,
        witness,
        stats: oracle.stats().since(&start),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn names(m: &Rmdp, set: &StateSet) -> Vec<String> {
        m.names_of(set)
    }

    #[test]
    fn running_agent_attractor_of_goal() {
        let m = fixtures::running_example();
        let mut o = Oracle::exact();
        let r = pattr_agent(&m, &m.state_set(&["s5"]).unwrap(), &mut o).unwrap();
        assert_eq!(names(&m, &r.states), ["s1", "s2", "s3", "s5"]);
        let a = m.action_id("a").unwrap();
        for s in ["s1", "s2", "s3"] {
            let id = m.state_id(s).unwrap();
            assert_eq!(r.rank_of(id), Some(1));
            assert_eq!(r.witness.get(id), Some(a));
        }
        assert_eq!(r.rank_of(m.state_id("s5").unwrap()), Some(0));
    }

    #[test]
    fn running_env_attractors() {
        let m = fixtures::running_example();
        let mut o = Oracle::exact();
        let r = pattr_env(&m, &m.state_set(&["s4"]).unwrap(), &mut o).unwrap();
        assert_eq!(names(&m, &r.states), ["s3", "s4"]);
        let r = pattr_env(&m, &m.state_set(&["s2"]).unwrap(), &mut o).unwrap();
        assert_eq!(names(&m, &r.states), ["s2"]);
        assert!(r.witness.is_empty());
    }

    #[test]
    fn trivial_targets() {
        let m = fixtures::running_example();
        let mut o = Oracle::exact();
        assert!(pattr_agent(&m, &m.empty_set(), &mut o).unwrap().states.is_empty());
        assert!(pattr_env(&m, &m.empty_set(), &mut o).unwrap().states.is_empty());
        let all = pattr_agent(&m, m.live(), &mut o).unwrap();
        assert_eq!(&all.states, m.live());
        assert!(all.rank.iter().all(|r| *r == Some(0)));
    }

    #[test]
    fn filtered_matches_naive_on_chain() {
        let m = fixtures::chain(6);
        for player in [Player::Agent, Player::Env] {
            for goal in ["goal", "sink", "c3"] {
                let t = m.state_set(&[goal]).unwrap();
                let fast = pattr(&m, &t, player, &mut Oracle::exact()).unwrap();
                let slow = pattr_naive(&m, &t, player, &mut Oracle::exact()).unwrap();
                assert_eq!(fast.states, slow.states);
                assert_eq!(fast.rank, slow.rank);
                assert_eq!(fast.witness, slow.witness);
            }
        }
    }

    #[test]
    fn blocked_states_never_join() {
        let m = fixtures::running_example();
        let mut o = Oracle::exact();
        let t = m.state_set(&["s4"]).unwrap();
        let blocked = m.state_set(&["s3"]).unwrap();
        let r = pattr_env_blocking(&m, &t, &blocked, &mut o).unwrap();
        assert_eq!(names(&m, &r.states), ["s4"]);
    }

    #[test]
    fn dead_target_is_an_error() {
        let m = fixtures::running_example();
        let mut o = Oracle::exact();
        let z = m.state_set(&["s4"]).unwrap();
        let sub = crate::model::remove_states(&m, &z, &mut o).unwrap();
        assert!(matches!(pattr_agent(&sub, &z, &mut o), Err(Error::NotLive(_))));
    }
}
