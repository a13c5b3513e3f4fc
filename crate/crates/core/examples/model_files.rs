//! Builds a model by hand, writes it as JSON and reads it back.

use rmdpq::io;
use rmdpq::model::{Norm, RmdpBuilder, TransitionTemplate, UncertaintyEntry};
use rmdpq::rational::from_ratio;

fn main() -> rmdpq::Result<()> {
    let mut b = RmdpBuilder::new();
    let [home, road, work] = [b.state("home"), b.state("road"), b.state("work")];
    let commute = TransitionTemplate::new(vec![road, work], vec![from_ratio(3, 4), from_ratio(1, 4)]);
    b.action(home, "leave", UncertaintyEntry::deterministic(road));
    b.action(road, "drive", UncertaintyEntry::ball(commute, Norm::P(1), from_ratio(1, 10), true));
    b.action(work, "stay", UncertaintyEntry::deterministic(work));
    b.label("target", &[work]);
    b.priorities(vec![1, 1, 2]);
    let model = b.build();

    let text = io::to_json(&model);
    println!("{text}");
    let back = io::from_json(&text)?;
    println!("round trip equal: {}", back == model);
    Ok(())
}
