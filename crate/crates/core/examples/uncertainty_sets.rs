//! The three uncertainty families behind the same face queries, and where
//! the closed-form ball distance and exact water-filling part ways.

use rmdpq::model::{LinearRow, Norm, Relation, StateId, TransitionTemplate, UncertaintyEntry};
use rmdpq::oracle::ball::{exact_face_cost, uniform_increment_cost};
use rmdpq::oracle::Oracle;
use rmdpq::rational::{format, from_int, from_ratio};

fn main() -> rmdpq::Result<()> {
    let succ = vec![StateId(0), StateId(1), StateId(2)];
    let center = vec![from_ratio(1, 2), from_ratio(1, 3), from_ratio(1, 6)];
    let t = TransitionTemplate::new(succ.clone(), center.clone());

    let entries = [
        ("L1 ball r=1/3", UncertaintyEntry::ball(t.clone(), Norm::P(1), from_ratio(1, 3), false)),
        ("L2 ball r=1/2", UncertaintyEntry::ball(t.clone(), Norm::P(2), from_ratio(1, 2), true)),
        (
            "polytope x0 >= 2/5",
            UncertaintyEntry::polytope(
                t.clone(),
                vec![LinearRow { coeffs: vec![from_int(-1), from_int(0), from_int(0)], relation: Relation::Le, rhs: from_ratio(-2, 5) }],
                false,
            ),
        ),
        (
            "menu of two",
            UncertaintyEntry::finite_menu(t.clone(), vec![center.clone(), vec![from_ratio(1, 2), from_int(0), from_ratio(1, 2)]], false),
        ),
    ];
    let mut oracle = Oracle::exact();
    let faces: [&[u32]; 4] = [&[0, 1], &[0, 2], &[1, 2], &[1]];
    println!("{:<20} {}", "", faces.map(|f| format!("{f:?}")).join("  "));
    for (name, e) in &entries {
        let row: Vec<String> = faces
            .iter()
            .map(|f| format!("{:<6}", oracle.face_feasible(e, f).unwrap()))
            .collect();
        println!("{name:<20} {}", row.join("  "));
    }

    // a zero-center coordinate under support restriction is capped at 0
    let capped = UncertaintyEntry::ball(
        TransitionTemplate::new(succ, vec![from_ratio(1, 2), from_ratio(1, 2), from_int(0)]),
        Norm::P(2),
        from_ratio(2, 3),
        true,
    );
    let face = [0, 2];
    println!(
        "\nsquared distance to face {face:?}: exact {}, closed form {}, feasible at r = 2/3: {}",
        format(&exact_face_cost(&capped, &face).unwrap()),
        format(&uniform_increment_cost(&capped, &face).unwrap()),
        oracle.face_feasible(&capped, &face)?
    );
    Ok(())
}
