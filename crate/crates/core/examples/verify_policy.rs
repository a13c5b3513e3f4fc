//! Policies are checked by fixing them in the model and solving again.

use rmdpq::fixtures;
use rmdpq::solver::{as_reach, verify_policy, Objective};
use rmdpq::Oracle;

fn main() -> rmdpq::Result<()> {
    let m = fixtures::detour();
    let goal = m.state_set(&["goal"])?;
    let objective = Objective::Reach(goal.clone());
    let mut oracle = Oracle::exact();

    let result = as_reach(&m, &goal, &mut oracle)?;
    let show = |p: &rmdpq::MemorylessPolicy| {
        p.iter()
            .map(|(s, a)| format!("{}:{}", m.state_name(s), m.action_name(a)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!("synthesized  {}  verified: {}", show(&result.policy), verify_policy(&m, &result.policy, &objective, &mut oracle)?);

    let mut lazy = result.policy.clone();
    lazy.set(m.state_id("x").unwrap(), m.action_id("wait").unwrap());
    println!("always wait  {}  verified: {}", show(&lazy), verify_policy(&m, &lazy, &objective, &mut oracle)?);

    let mut bogus = rmdpq::MemorylessPolicy::new();
    bogus.set(m.state_id("goal").unwrap(), m.action_id("go").unwrap());
    match verify_policy(&m, &bogus, &objective, &mut oracle) {
        Err(e) => println!("inadmissible: {e}"),
        Ok(v) => println!("unexpectedly verified: {v}"),
    }
    Ok(())
}
