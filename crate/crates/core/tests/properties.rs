//! Structural laws of attractors and solvers on random small models.

use proptest::prelude::*;
use rmdpq::attractor::{pattr, pattr_naive, Player};
use rmdpq::bench::{random_model, FamilyKind, RandomSpec};
use rmdpq::model::{remove_states, restrict_to};
use rmdpq::solver::{as_parity_agent, as_parity_env, as_reach, eff_as_parity_agent_full};
use rmdpq::{Oracle, Rmdp, StateId, StateSet};

fn model_strategy() -> impl Strategy<Value = Rmdp> {
    (any::<u64>(), prop::option::of(0usize..5), prop::option::of(any::<bool>())).prop_map(|(seed, family, restricted)| {
        let mut spec = RandomSpec::small(seed);
        spec.family = family.map(|i| FamilyKind::ALL[i]);
        spec.support_restricted = restricted;
        random_model(&spec)
    })
}

fn subset(model: &Rmdp, bits: u64) -> StateSet {
    StateSet::from_ids(model.num_states(), (0..model.num_states()).filter(|i| bits >> i & 1 == 1).map(StateId))
}

fn player() -> impl Strategy<Value = Player> {
    prop_oneof![Just(Player::Agent), Just(Player::Env)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn attractor_is_extensive_monotone_idempotent(m in model_strategy(), a in any::<u64>(), b in any::<u64>(), p in player()) {
        let mut o = Oracle::exact();
        let small = subset(&m, a & b);
        let large = subset(&m, a);
        let x = pattr(&m, &small, p, &mut o).unwrap().states;
        let y = pattr(&m, &large, p, &mut o).unwrap().states;
        prop_assert!(small.is_subset(&x));
        prop_assert!(x.is_subset(&y));
        prop_assert!(x.is_subset(m.live()));
        let again = pattr(&m, &x, p, &mut o).unwrap().states;
        prop_assert_eq!(again, x);
    }

    #[test]
    fn filtered_attractor_matches_naive(m in model_strategy(), a in any::<u64>(), p in player()) {
        let mut o = Oracle::exact();
        let t = subset(&m, a);
        let fast = pattr(&m, &t, p, &mut o).unwrap();
        let slow = pattr_naive(&m, &t, p, &mut o).unwrap();
        prop_assert_eq!(fast.states, slow.states);
        prop_assert_eq!(fast.rank, slow.rank);
    }

    /// Outside the agent's attractor the environment keeps every state
    /// away from it, and vice versa.
    #[test]
    fn attractor_complement_is_a_trap(m in model_strategy(), a in any::<u64>()) {
        let mut o = Oracle::exact();
        let t = subset(&m, a);
        let agent = pattr(&m, &t, Player::Agent, &mut o).unwrap().states;
        for s in m.live().difference(&agent).iter() {
            prop_assert!(!o.force_agent(&m, s, &agent).unwrap());
        }
        let env = pattr(&m, &t, Player::Env, &mut o).unwrap().states;
        for s in m.live().difference(&env).iter() {
            prop_assert!(!o.force_env(&m, s, &env).unwrap());
        }
    }

    /// The two force predicates are complementary views of one choice:
    /// the agent forces `B` iff the environment cannot avoid it.
    #[test]
    fn force_duality(m in model_strategy(), a in any::<u64>()) {
        let mut o = Oracle::exact();
        let b = subset(&m, a);
        let not_b = m.live().difference(&b);
        for s in m.live().iter() {
            let agent = o.force_agent(&m, s, &b).unwrap();
            // the agent forces B iff some action has no member supported
            // inside the complement face
            let dual = m.choices(s).iter().any(|c| !o.face_feasible(&c.entry, &c.face_within(&not_b)).unwrap());
            prop_assert_eq!(agent, dual);
        }
    }

    #[test]
    fn sub_model_laws(m in model_strategy(), a in any::<u64>()) {
        let mut o = Oracle::exact();
        prop_assert_eq!(&remove_states(&m, &m.empty_set(), &mut o).unwrap(), &m);
        prop_assert_eq!(&restrict_to(&m, m.live(), &mut o).unwrap(), &m);
        let z = subset(&m, a);
        let r = remove_states(&m, &z, &mut o).unwrap();
        prop_assert_eq!(r.live(), &m.live().difference(&z));
        prop_assert!(rmdpq::model::validate(&r).is_empty());
    }

    #[test]
    fn reach_contains_target_and_is_monotone(m in model_strategy(), a in any::<u64>(), b in any::<u64>()) {
        let mut o = Oracle::exact();
        let small = subset(&m, a & b);
        let large = subset(&m, a);
        let x = as_reach(&m, &small, &mut o).unwrap().winning;
        let y = as_reach(&m, &large, &mut o).unwrap().winning;
        prop_assert!(small.is_subset(&x));
        prop_assert!(x.is_subset(&y));
    }

    #[test]
    fn parity_regions_are_disjoint_and_algorithms_agree(m in model_strategy()) {
        let mut o = Oracle::exact();
        let agent = as_parity_agent(&m, &mut o).unwrap().winning;
        let env = as_parity_env(&m, &mut o).unwrap().winning;
        prop_assert!(agent.is_disjoint(&env));
        prop_assert_eq!(eff_as_parity_agent_full(&m, &mut o).unwrap().winning, agent);
    }

    /// Shifting all priorities by two changes nothing.
    #[test]
    fn parity_is_shift_invariant(m in model_strategy()) {
        let mut o = Oracle::exact();
        let shifted = m.with_priorities(rmdpq::PriorityFunction::new(
            m.priorities().unwrap().values().iter().map(|p| p + 2).collect(),
        ));
        prop_assert_eq!(
            as_parity_agent(&m, &mut o).unwrap().winning,
            as_parity_agent(&shifted, &mut o).unwrap().winning
        );
    }
}
