//! Generates a slippery grid world and draws the states from which the goal
//! is reached with probability one, whatever the environment does inside
//! the uncertainty balls.
//!
//! ```text
//! cargo run --release --example frozen_lake_reach -- 12 7
//! ```

use rmdpq::bench::{gen_frozen_lake, FrozenLakeSpec, LakeObjective};
use rmdpq::model::Norm;
use rmdpq::rational::from_int;
use rmdpq::solver::as_reach;
use rmdpq::Oracle;

fn main() -> rmdpq::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(10);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);

    let spec = FrozenLakeSpec::new(n, Norm::P(1), from_int(1), seed, LakeObjective::Reach);
    let model = gen_frozen_lake(&spec)?;
    let goal = model.label("goal").expect("generator labels the goal").clone();
    let result = as_reach(&model, &goal, &mut Oracle::exact())?;

    println!("{n}x{n} lake, seed {seed}: {} of {} cells win", result.winning.len(), model.num_states());
    println!("legend: G goal, # hole, o winning, x losing; arrows show the policy\n");
    for r in 0..n {
        let row: String = (0..n)
            .map(|c| match model.state_id(&format!("r{r}c{c}")) {
                None => '#',
                Some(_) if r == n - 1 && c == n - 1 => 'G',
                Some(s) if !result.winning.contains(s) => 'x',
                Some(s) => match result.policy.get(s).map(|a| model.action_name(a)) {
                    Some("right") => '>',
                    Some("left") => '<',
                    Some("up") => '^',
                    Some("down") => 'v',
                    _ => 'o',
                },
            })
            .collect();
        println!("  {row}");
    }
    println!("\n{} iterations, {} force calls", result.iterations, result.stats.force_calls());
    Ok(())
}
