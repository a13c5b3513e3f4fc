//! Independent ground truth for small models.
//!
//! An RMDP reduces to a finite turn-based stochastic game: the agent picks
//! an action at a state node, the environment then picks one of the
//! achievable supports of that action, and a random node moves uniformly
//! into the support. Qualitative winning only depends on which supports are
//! realizable, so the game and the RMDP have the same almost-sure winning
//! states. The game is solved here with self-contained worklist attractors
//! over explicit graphs; nothing from the symbolic solvers is reused.

use crate::error::Result;
use crate::model::{ActionId, Rmdp, StateId};
use crate::oracle::Oracle;
use crate::set::StateSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    State(StateId),
    Choice { state: StateId, action: ActionId },
    Support { state: StateId, action: ActionId, support: Vec<StateId> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Agent,
    Env,
}

impl Side {
    fn other(self) -> Side {
        match self {
            Side::Agent => Side::Env,
            Side::Env => Side::Agent,
        }
    }

    fn of_priority(d: u32) -> Side {
        if d.is_multiple_of(2) {
            Side::Agent
        } else {
            Side::Env
        }
    }
}

#[derive(Debug, Clone)]
pub struct SupportGame {
    pub nodes: Vec<Node>,
    pub succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    /// Priorities of state nodes; every intermediate node has priority 0.
    pub priority: Vec<u32>,
    state_node: Vec<Option<usize>>,
    capacity: usize,
}

impl SupportGame {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_of(&self, state: StateId) -> Option<usize> {
        self.state_node.get(state.0).copied().flatten()
    }

    /// Number of environment options (achievable supports) of `(state, action)`.
    pub fn options(&self, state: StateId, action: ActionId) -> Option<usize> {
        let s = self.node_of(state)?;
        self.succ[s]
            .iter()
            .find(|&&c| matches!(self.nodes[c], Node::Choice { action: a, .. } if a == action))
            .map(|&c| self.succ[c].len())
    }

    fn random(&self, v: usize) -> bool {
        matches!(self.nodes[v], Node::Support { .. })
    }

    fn owner(&self, v: usize) -> Option<Side> {
        match self.nodes[v] {
            Node::State(_) => Some(Side::Agent),
            Node::Choice { .. } => Some(Side::Env),
            Node::Support { .. } => None,
        }
    }

    fn states_in(&self, mask: &[bool]) -> StateSet {
        let mut out = StateSet::empty(self.capacity);
        for (v, node) in self.nodes.iter().enumerate() {
            if let (Node::State(s), true) = (node, mask[v]) {
                out.insert(*s);
            }
        }
        out
    }

    fn mask_of(&self, states: &StateSet) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        for s in states.iter() {
            if let Some(v) = self.node_of(s) {
                mask[v] = true;
            }
        }
        mask
    }
}

/// Builds the support game of the live part of `model`.
pub fn reduce(model: &Rmdp, oracle: &mut Oracle) -> Result<SupportGame> {
    let mut nodes = Vec::new();
    let mut state_node = vec![None; model.num_states()];
    for s in model.live().iter() {
        state_node[s.0] = Some(nodes.len());
        nodes.push(Node::State(s));
    }
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for s in model.live().iter() {
        let sv = state_node[s.0].expect("live state has a node");
        for choice in model.choices(s) {
            let cv = nodes.len();
            nodes.push(Node::Choice { state: s, action: choice.action });
            succ.push(Vec::new());
            succ[sv].push(cv);
            for positions in oracle.achievable_supports(&choice.entry, &choice.face)? {
                let support: Vec<StateId> = positions
                    .iter()
                    .map(|&p| choice.entry.template.successors[p as usize])
                    .collect();
                let tv = nodes.len();
                let targets = support
                    .iter()
                    .map(|t| state_node[t.0].expect("face states are live"))
                    .collect();
                nodes.push(Node::Support {
                    state: s,
                    action: choice.action,
                    support,
                });
                succ.push(targets);
                succ[cv].push(tv);
            }
        }
    }
    let mut pred = vec![Vec::new(); nodes.len()];
    for (v, out) in succ.iter().enumerate() {
        for &w in out {
            pred[w].push(v);
        }
    }
    let priority = nodes
        .iter()
        .map(|n| match (n, model.priorities()) {
            (Node::State(s), Some(pr)) => pr.get(*s),
            _ => 0,
        })
        .collect();
    Ok(SupportGame {
        nodes,
        succ,
        pred,
        priority,
        state_node,
        capacity: model.num_states(),
    })
}

/// Positive attractor of `side` to `target` inside the subgame `sub`:
/// its own and random nodes need one successor inside, opponent nodes need
/// all of them (vacuously true for dead ends). `blocked` nodes never join.
fn attract(g: &SupportGame, sub: &[bool], target: &[bool], side: Side, blocked: Option<&[bool]>) -> Vec<bool> {
    let n = g.len();
    let mut inside = vec![false; n];
    let mut missing = vec![0usize; n];
    let mut queue = Vec::new();
    for v in 0..n {
        if !sub[v] {
            continue;
        }
        missing[v] = g.succ[v].iter().filter(|&&w| sub[w]).count();
        if target[v] {
            inside[v] = true;
            queue.push(v);
        }
    }
    let joinable = |v: usize, inside: &[bool]| sub[v] && !inside[v] && !blocked.is_some_and(|b| b[v]);
    for v in 0..n {
        if joinable(v, &inside) && g.owner(v) == Some(side.other()) && missing[v] == 0 {
            inside[v] = true;
            queue.push(v);
        }
    }
    while let Some(w) = queue.pop() {
        for &v in &g.pred[w] {
            if !joinable(v, &inside) {
                continue;
            }
            let join = if g.random(v) || g.owner(v) == Some(side) {
                true
            } else {
                missing[v] -= 1;
                missing[v] == 0
            };
            if join {
                inside[v] = true;
                queue.push(v);
            }
        }
    }
    inside
}

fn minus(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| *x && !*y).collect()
}

fn any(a: &[bool]) -> bool {
    a.iter().any(|x| *x)
}

/// Almost-sure reachability for the agent; target nodes count as reached.
pub fn game_as_reach(g: &SupportGame, target: &StateSet) -> StateSet {
    let goal = g.mask_of(target);
    let mut sub = vec![true; g.len()];
    loop {
        let good = attract(g, &sub, &goal, Side::Agent, None);
        let bad = minus(&sub, &good);
        if !any(&bad) {
            break;
        }
        let lost = attract(g, &sub, &bad, Side::Env, Some(&goal));
        sub = minus(&sub, &lost);
    }
    g.states_in(&sub)
}

/// Winning region of the player favoured by the parity of `d` in `sub`,
/// where `d` bounds every priority in `sub`.
fn zielonka(g: &SupportGame, sub: Vec<bool>, d: u32) -> Vec<bool> {
    let me = Side::of_priority(d);
    let mut sub = sub;
    loop {
        let top: Vec<bool> = (0..g.len()).map(|v| sub[v] && g.priority[v] == d).collect();
        let mine = attract(g, &sub, &top, me, None);
        let rest = minus(&sub, &mine);
        let theirs = if any(&rest) {
            zielonka(g, rest, d - 1)
        } else {
            vec![false; g.len()]
        };
        let lost = attract(g, &sub, &theirs, me.other(), None);
        if !any(&lost) {
            return sub;
        }
        sub = minus(&sub, &lost);
    }
}

fn top_even(g: &SupportGame) -> u32 {
    let d = g.priority.iter().copied().max().unwrap_or(0);
    d + d % 2
}

/// Almost-sure parity winning region of the agent.
pub fn game_as_parity(g: &SupportGame) -> StateSet {
    g.states_in(&zielonka(g, vec![true; g.len()], top_even(g)))
}

/// States where the environment makes parity fail almost surely.
pub fn game_env_parity(g: &SupportGame) -> StateSet {
    let d = g.priority.iter().copied().max().unwrap_or(0);
    let d = d + 1 - d % 2;
    g.states_in(&zielonka(g, vec![true; g.len()], d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{RmdpBuilder, UncertaintyEntry};

    #[test]
    fn running_reduction_and_solutions() {
        let m = fixtures::running_example_parity();
        let g = reduce(&m, &mut Oracle::exact()).unwrap();
        let id = |n: &str| m.state_id(n).unwrap();
        assert_eq!(g.options(id("s2"), m.action_id("a").unwrap()), Some(1));
        let reach = game_as_reach(&g, &m.state_set(&["s5"]).unwrap());
        assert_eq!(m.names_of(&reach), ["s5"]);
        assert_eq!(m.names_of(&game_as_parity(&g)), ["s1", "s5"]);
        assert_eq!(m.names_of(&game_env_parity(&g)), ["s4"]);
        assert_eq!(&game_as_reach(&g, m.live()), m.live());
    }

    #[test]
    fn finite_menu_has_one_option_per_support() {
        use crate::rational::from_ratio;
        let mut b = RmdpBuilder::new();
        let [x, y] = [b.state("x"), b.state("y")];
        let t = crate::model::TransitionTemplate::new(vec![x, y], vec![from_ratio(1, 2), from_ratio(1, 2)]);
        let members = vec![
            vec![from_ratio(1, 2), from_ratio(1, 2)],
            vec![from_ratio(1, 3), from_ratio(2, 3)],
            vec![from_ratio(1, 1), from_ratio(0, 1)],
        ];
        b.action(x, "a", UncertaintyEntry::finite_menu(t, members, false));
        b.action(y, "a", UncertaintyEntry::deterministic(y));
        let m = b.build();
        let g = reduce(&m, &mut Oracle::exact()).unwrap();
        assert_eq!(g.options(x, m.action_id("a").unwrap()), Some(2));
        assert_eq!(g.options(y, m.action_id("a").unwrap()), Some(1));
    }

    #[test]
    fn dead_ends_lose() {
        let mut b = RmdpBuilder::new();
        let [x, y] = [b.state("x"), b.state("y")];
        b.action(x, "a", UncertaintyEntry::deterministic(y));
        b.priorities(vec![2, 2]);
        let m = b.build();
        let g = reduce(&m, &mut Oracle::exact()).unwrap();
        assert!(game_as_parity(&g).is_empty());
        assert_eq!(game_env_parity(&g).len(), 2);
    }
}
