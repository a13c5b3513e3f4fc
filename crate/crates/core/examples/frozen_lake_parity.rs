//! The alternating objective on the grid: visit the leftmost and the
//! rightmost column infinitely often. Both parity algorithms solve it.
//!
//! ```text
//! cargo run --release --example frozen_lake_parity -- 10
//! ```

use std::time::Instant;

use rmdpq::bench::{gen_frozen_lake, FrozenLakeSpec, LakeObjective};
use rmdpq::model::Norm;
use rmdpq::rational::from_ratio;
use rmdpq::solver::{as_parity_agent, eff_as_parity_agent_full};
use rmdpq::Oracle;

fn main() -> rmdpq::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(8);
    for (norm, r_max) in [(Norm::P(1), from_ratio(1, 2)), (Norm::P(2), from_ratio(1, 1)), (Norm::Inf, from_ratio(3, 2))] {
        let spec = FrozenLakeSpec::new(n, norm, r_max.clone(), 3, LakeObjective::Parity);
        let model = gen_frozen_lake(&spec)?;

        let t = Instant::now();
        let standard = as_parity_agent(&model, &mut Oracle::exact())?;
        let t_std = t.elapsed();
        let t = Instant::now();
        let efficient = eff_as_parity_agent_full(&model, &mut Oracle::exact())?;
        let t_eff = t.elapsed();

        let start = model.label("start").expect("start label").iter().next().expect("one start state");
        println!(
            "L{norm} rmax {}: {}/{} product states win, start wins: {}",
            rmdpq::rational::format(&r_max),
            standard.winning.len(),
            model.num_states(),
            standard.winning.contains(start)
        );
        println!(
            "  standard  {:>8} force calls {:>10.2?}\n  efficient {:>8} force calls {:>10.2?}  same set: {}",
            standard.stats.force_calls(),
            t_std,
            efficient.stats.force_calls(),
            t_eff,
            standard.winning == efficient.winning
        );
    }
    Ok(())
}
