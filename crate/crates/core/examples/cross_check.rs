//! Compares the symbolic solvers with the explicit support-game reference
//! on a seeded suite of small random models.
//!
//! ```text
//! cargo run --release --example cross_check -- 500
//! ```

use rmdpq::bench::{random_suite, target_of};
use rmdpq::reference::{game_as_parity, game_as_reach, reduce};
use rmdpq::solver::{as_parity_agent, as_reach};
use rmdpq::Oracle;

fn main() -> rmdpq::Result<()> {
    let count: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(200);
    let (mut nodes, mut disagreements) = (0, 0);
    for (i, m) in random_suite(count, 0).iter().enumerate() {
        let mut oracle = Oracle::exact();
        let game = reduce(m, &mut oracle)?;
        nodes += game.len();
        let t = target_of(m);
        if as_reach(m, &t, &mut oracle)?.winning != game_as_reach(&game, &t) {
            println!("model {i}: reachability differs");
            disagreements += 1;
        }
        if as_parity_agent(m, &mut oracle)?.winning != game_as_parity(&game) {
            println!("model {i}: parity differs");
            disagreements += 1;
        }
    }
    println!("{count} models, {nodes} game nodes in total, {disagreements} disagreements");
    Ok(())
}
