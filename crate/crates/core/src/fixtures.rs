//! Small hand-built models used throughout the tests and examples.

use crate::model::{Norm, Rmdp, RmdpBuilder, StateId, TransitionTemplate, UncertaintyEntry};
use crate::rational::from_ratio;

fn half_half_ball(left: StateId, right: StateId) -> UncertaintyEntry {
    let t = TransitionTemplate::new(vec![left, right], vec![from_ratio(1, 2), from_ratio(1, 2)]);
    UncertaintyEntry::ball(t, Norm::P(2), from_ratio(1, 5), false)
}

fn self_loop(s: StateId) -> UncertaintyEntry {
    UncertaintyEntry::ball(TransitionTemplate::dirac(s), Norm::P(2), from_ratio(1, 5), false)
}

/// Chain of `k` ball-uncertain states. State `c_i` can take action `a`,
/// an L2 ball of radius 1/5 around the uniform distribution over
/// `c_{i+1}` and `goal` (`c_{k+1}` is `sink`), or the self-loop `b`; the
/// last chain state has only `a`. `goal` and `sink` loop on `b`.
pub fn chain_named(k: usize, chain: &[String], goal: &str, sink: &str) -> Rmdp {
    assert!(k >= 1 && chain.len() == k);
    let mut b = RmdpBuilder::new();
    let ids: Vec<StateId> = chain.iter().map(|n| b.state(n)).collect();
    let sink_id_placeholder = b.state(sink);
    let goal_id = b.state(goal);
    for i in 0..k {
        let next = if i + 1 < k { ids[i + 1] } else { sink_id_placeholder };
        b.action(ids[i], "a", half_half_ball(next, goal_id));
        if i + 1 < k {
            b.action(ids[i], "b", self_loop(ids[i]));
        }
    }
    b.action(sink_id_placeholder, "b", self_loop(sink_id_placeholder));
    b.action(goal_id, "b", self_loop(goal_id));
    b.label("target", &[goal_id]);
    b.build()
}

/// `chain_named` with states `c1..ck`, `sink`, `goal`; label `target` = goal.
pub fn chain(k: usize) -> Rmdp {
    let names: Vec<String> = (1..=k).map(|i| format!("c{i}")).collect();
    chain_named(k, &names, "goal", "sink")
}

/// The five-state running example: `s1..s3` in a chain, sink `s4`, goal `s5`.
pub fn running_example() -> Rmdp {
    let names: Vec<String> = (1..=3).map(|i| format!("s{i}")).collect();
    chain_named(3, &names, "s5", "s4")
}

/// Running example with priorities `c(s2) = c(s4) = 1` and 2 elsewhere.
pub fn running_example_parity() -> Rmdp {
    let m = running_example();
    let pr: Vec<u32> = m
        .state_names()
        .iter()
        .map(|n| if n == "s2" || n == "s4" { 1 } else { 2 })
        .collect();
    m.with_priorities(crate::model::PriorityFunction::new(pr))
}

/// Two states: `x` can `go` to `goal` or `wait` in place; `goal` waits.
/// Label `target` = goal.
pub fn detour() -> Rmdp {
    let mut b = RmdpBuilder::new();
    let [x, goal] = [b.state("x"), b.state("goal")];
    b.action(x, "go", UncertaintyEntry::deterministic(goal));
    b.action(x, "wait", UncertaintyEntry::deterministic(x));
    b.action(goal, "wait", UncertaintyEntry::deterministic(goal));
    b.label("target", &[goal]);
    b.build()
}
