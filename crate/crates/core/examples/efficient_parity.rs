//! The output-size budgets of the quasi-polynomial parity solver. With both
//! budgets at the number of states it matches the standard solver; an agent
//! budget of zero gives up at once.
//!
//! ```text
//! cargo run --release --example efficient_parity -- 5
//! ```

use rmdpq::bench::{gen_frozen_lake, FrozenLakeSpec, LakeObjective};
use rmdpq::model::Norm;
use rmdpq::rational::from_ratio;
use rmdpq::solver::{as_parity_agent, eff_as_parity_agent};
use rmdpq::Oracle;

fn main() -> rmdpq::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(4);
    let spec = FrozenLakeSpec::new(n, Norm::Inf, from_ratio(3, 2), 0, LakeObjective::Parity);
    let model = gen_frozen_lake(&spec)?;
    let live = model.num_live();

    let standard = as_parity_agent(&model, &mut Oracle::exact())?;
    println!("{live} states, standard solver: {} winning ({} force calls)", standard.winning.len(), standard.stats.force_calls());

    let mut budgets = vec![live, live / 2, live / 8, 2, 1, 0];
    budgets.dedup();
    println!("{:>6} {:>6} {:>8} {:>12}", "agent", "env", "winning", "force calls");
    for &ms in &budgets {
        for &me in &[live, 1] {
            let r = eff_as_parity_agent(&model, ms, me, &mut Oracle::exact())?;
            println!("{ms:>6} {me:>6} {:>8} {:>12}", r.winning.len(), r.stats.force_calls());
        }
    }
    Ok(())
}
