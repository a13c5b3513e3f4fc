//! The five-state running example: force predicates, reachability with its
//! removal trace, and the parity variant.
//!
//! ```text
//! cargo run --example running_example
//! ```

use rmdpq::fixtures;
use rmdpq::solver::{as_parity_agent, as_reach};
use rmdpq::Oracle;

fn main() -> rmdpq::Result<()> {
    let m = fixtures::running_example();
    let mut oracle = Oracle::exact();
    let id = |name: &str| m.state_id(name).expect("state exists");

    for (state, target) in [("s1", "s1"), ("s2", "s5"), ("s1", "s5")] {
        let t = m.state_set(&[target])?;
        println!("force_agent({state}, {{{target}}}) = {}", oracle.force_agent(&m, id(state), &t)?);
    }
    for (state, target) in [("s3", "s4"), ("s1", "s5"), ("s2", "s3")] {
        let t = m.state_set(&[target])?;
        println!("force_env({state}, {{{target}}})   = {}", oracle.force_env(&m, id(state), &t)?);
    }

    let goal = m.state_set(&["s5"])?;
    let reach = as_reach(&m, &goal, &mut oracle)?;
    println!("\nalmost-sure reach of s5: {:?}", m.names_of(&reach.winning));
    for (i, removed) in reach.trace.iter().enumerate() {
        println!("  iteration {}: removed {:?}", i + 1, m.names_of(removed));
    }
    println!("  {} iterations, {} force calls", reach.iterations, reach.stats.force_calls());

    let p = fixtures::running_example_parity();
    let parity = as_parity_agent(&p, &mut oracle)?;
    println!("\nalmost-sure parity (c(s2) = c(s4) = 1, else 2): {:?}", p.names_of(&parity.winning));
    for (s, a) in parity.policy.iter() {
        println!("  {} -> {}", p.state_name(s), p.action_name(a));
    }
    Ok(())
}
