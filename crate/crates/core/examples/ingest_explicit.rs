//! Reads an explicit transition list, wraps every row in an L∞ ball and
//! solves reachability.

use rmdpq::io::{ingest_explicit, ExplicitUncertainty};
use rmdpq::model::Norm;
use rmdpq::rational::from_ratio;
use rmdpq::solver::as_reach;
use rmdpq::Oracle;

const TRA: &str = "\
# states choices transitions
4 6 9
0 try 1 0.5
0 try 0 0.5
0 skip 2 1
1 try 3 0.9
1 try 0 0.1
2 try 2 1
3 done 3 1
1 back 0 1
2 back 0 1
";

const LAB: &str = "\
0 init
1
2 stuck
3 goal
";

fn main() -> rmdpq::Result<()> {
    let dir = std::env::temp_dir().join(format!("rmdpq-ingest-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|source| rmdpq::Error::Io { path: dir.clone(), source })?;
    let (tra, lab) = (dir.join("m.tra"), dir.join("m.lab"));
    for (path, text) in [(&tra, TRA), (&lab, LAB)] {
        std::fs::write(path, text).map_err(|source| rmdpq::Error::Io { path: path.clone(), source })?;
    }

    for radius in [from_ratio(0, 1), from_ratio(1, 20), from_ratio(1, 2)] {
        for support_restricted in [true, false] {
            let u = ExplicitUncertainty { norm: Norm::Inf, radius: radius.clone(), support_restricted };
            let m = ingest_explicit(&tra, Some(&lab), &u)?;
            let goal = m.label("goal").unwrap().clone();
            let r = as_reach(&m, &goal, &mut Oracle::exact())?;
            println!(
                "radius {:>4}, restricted {:<5}: winning {:?}",
                rmdpq::rational::format(&radius),
                support_restricted,
                m.names_of(&r.winning)
            );
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}
