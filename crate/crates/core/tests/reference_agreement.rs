//! Symbolic solvers against the explicit support-game reference.

use rmdpq::bench::{random_model, random_suite, target_of, FamilyKind, RandomSpec};
use rmdpq::model::{RmdpBuilder, TransitionTemplate, UncertaintyEntry};
use rmdpq::rational::from_ratio;
use rmdpq::reference::{game_as_parity, game_as_reach, game_env_parity, reduce};
use rmdpq::solver::{as_parity_agent, as_parity_env, as_reach, verify_policy, Objective};
use rmdpq::Oracle;

#[test]
fn random_suite_agrees() {
    for (i, m) in random_suite(120, 7_000).iter().enumerate() {
        let mut o = Oracle::exact();
        let g = reduce(m, &mut o).unwrap();
        let t = target_of(m);
        let reach = as_reach(m, &t, &mut o).unwrap();
        assert_eq!(reach.winning, game_as_reach(&g, &t), "reach, model {i}");
        assert!(verify_policy(m, &reach.policy, &Objective::Reach(t), &mut o).unwrap());
        let parity = as_parity_agent(m, &mut o).unwrap();
        assert_eq!(parity.winning, game_as_parity(&g), "parity, model {i}");
        assert!(verify_policy(m, &parity.policy, &Objective::Parity, &mut o).unwrap());
        assert_eq!(as_parity_env(m, &mut o).unwrap().winning, game_env_parity(&g), "env parity, model {i}");
    }
}

#[test]
fn finite_menus_agree_per_mode() {
    for restricted in [false, true] {
        for seed in 0..60 {
            let mut spec = RandomSpec::small(90_000 + seed);
            spec.family = Some(FamilyKind::FiniteMenu);
            spec.support_restricted = Some(restricted);
            let m = random_model(&spec);
            let mut o = Oracle::exact();
            let g = reduce(&m, &mut o).unwrap();
            assert_eq!(as_reach(&m, &target_of(&m), &mut o).unwrap().winning, game_as_reach(&g, &target_of(&m)));
            assert_eq!(as_parity_agent(&m, &mut o).unwrap().winning, game_as_parity(&g));
        }
    }
}

/// A menu whose members disagree on support gives the environment a real
/// choice: it can stall forever on the self-loop member.
#[test]
fn menu_member_choice_matters() {
    let mut b = RmdpBuilder::new();
    let [x, goal] = [b.state("x"), b.state("goal")];
    let t = TransitionTemplate::new(vec![x, goal], vec![from_ratio(1, 2), from_ratio(1, 2)]);
    let stall = vec![vec![from_ratio(1, 2), from_ratio(1, 2)], vec![from_ratio(1, 1), from_ratio(0, 1)]];
    b.action(x, "a", UncertaintyEntry::finite_menu(t.clone(), stall, false));
    b.action(goal, "a", UncertaintyEntry::deterministic(goal));
    let m = b.build();
    let mut o = Oracle::exact();
    let target = m.state_set(&["goal"]).unwrap();
    assert_eq!(m.names_of(&as_reach(&m, &target, &mut o).unwrap().winning), ["goal"]);
    let g = reduce(&m, &mut o).unwrap();
    assert_eq!(m.names_of(&game_as_reach(&g, &target)), ["goal"]);
}
