//! Benchmark generators: the slippery Frozen Lake grid and seeded random
//! small models.
//!
//! All randomness comes from [`SplitMix64`], so a spec (including its seed)
//! always produces the same model.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{
    LinearRow, Norm, Relation, Rmdp, RmdpBuilder, StateId, TransitionTemplate, UncertaintyEntry,
};
use crate::rational::{from_int, from_ratio, Rational};

/// The splitmix64 generator (Steele, Lea and Flood).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw from `0..bound` (modulo reduction; `bound > 0`).
    pub fn below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }

    pub fn chance(&mut self, numer: u64, denom: u64) -> bool {
        self.below(denom) < numer
    }
}

/// Scale of the rational grid radii and hole probabilities are drawn on.
pub const QUANTUM: i64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LakeObjective {
    Reach,
    Parity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrozenLakeSpec {
    pub n: usize,
    pub norm: Norm,
    pub r_max: Rational,
    pub seed: u64,
    pub hole_density: Rational,
    pub objective: LakeObjective,
    pub support_restricted: bool,
    /// Every state gets radius `r_max` instead of a random one.
    pub constant_radius: bool,
}

impl FrozenLakeSpec {
    pub fn new(n: usize, norm: Norm, r_max: Rational, seed: u64, objective: LakeObjective) -> Self {
        FrozenLakeSpec {
            n,
            norm,
            r_max,
            seed,
            hole_density: from_ratio(1, 10),
            objective,
            support_restricted: true,
            constant_radius: false,
        }
    }

    fn check(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidSpec(format!("grid side must be at least 2, got {}", self.n)));
        }
        if self.hole_density < Rational::zero() || self.hole_density >= Rational::one() {
            return Err(Error::InvalidSpec("hole density must lie in [0, 1)".into()));
        }
        if self.r_max < Rational::zero() {
            return Err(Error::InvalidSpec("maximum radius must be non-negative".into()));
        }
        if let Norm::P(0) = self.norm {
            return Err(Error::InvalidSpec("norm exponent must be positive".into()));
        }
        Ok(())
    }
}

const MOVES: [(&str, i64, i64); 4] = [("right", 0, 1), ("left", 0, -1), ("up", -1, 0), ("down", 1, 0)];

fn perpendicular(dir: usize) -> [usize; 2] {
    if dir < 2 {
        [2, 3]
    } else {
        [0, 1]
    }
}

struct Grid {
    n: usize,
    hole: Vec<bool>,
    radius: Vec<Rational>,
}

impl Grid {
    fn draw(spec: &FrozenLakeSpec) -> Grid {
        let n = spec.n;
        let mut rng = SplitMix64::new(spec.seed);
        let hole_cut = (spec.hole_density.clone() * from_int(QUANTUM)).floor().to_integer();
        let hole_cut: u64 = hole_cut.try_into().unwrap_or(0);
        let mut hole = vec![false; n * n];
        for (i, h) in hole.iter_mut().enumerate() {
            let draw = rng.below(QUANTUM as u64) < hole_cut;
            *h = draw && i != 0 && i != n * n - 1;
        }
        let steps = (spec.r_max.clone() * from_int(QUANTUM)).floor().to_integer();
        let steps: u64 = steps.try_into().unwrap_or(u64::MAX - 1);
        let radius = (0..n * n)
            .map(|_| {
                let k = rng.below(steps + 1);
                if spec.constant_radius {
                    spec.r_max.clone()
                } else {
                    from_ratio(k as i64, QUANTUM)
                }
            })
            .collect();
        Grid { n, hole, radius }
    }

    fn cell(&self, r: usize, c: usize) -> usize {
        r * self.n + c
    }

    /// Cell reached by one move, staying put on walls and holes.
    fn step(&self, cell: usize, dir: usize) -> usize {
        let (r, c) = ((cell / self.n) as i64, (cell % self.n) as i64);
        let (nr, nc) = (r + MOVES[dir].1, c + MOVES[dir].2);
        if nr < 0 || nc < 0 || nr >= self.n as i64 || nc >= self.n as i64 {
            return cell;
        }
        let next = self.cell(nr as usize, nc as usize);
        if self.hole[next] {
            cell
        } else {
            next
        }
    }

    /// Nominal slip distribution: 1/3 intended, 1/3 each perpendicular,
    /// duplicate targets merged, in order of first appearance.
    fn nominal(&self, cell: usize, dir: usize) -> Vec<(usize, Rational)> {
        let [p, q] = perpendicular(dir);
        let mut out: Vec<(usize, Rational)> = Vec::new();
        for d in [dir, p, q] {
            let t = self.step(cell, d);
            match out.iter_mut().find(|(x, _)| *x == t) {
                Some((_, w)) => *w += from_ratio(1, 3),
                None => out.push((t, from_ratio(1, 3))),
            }
        }
        out
    }
}

fn cell_name(n: usize, cell: usize) -> String {
    format!("r{}c{}", cell / n, cell % n)
}

/// Generates the slippery grid. Reach models label the goal cell `goal`
/// and make it absorbing. Parity models are the product with a two-mode
/// monitor that alternates between seeking the leftmost and the rightmost
/// column; states that just switched mode have priority 2, all others 1.
pub fn gen_frozen_lake(spec: &FrozenLakeSpec) -> Result<Rmdp> {
    spec.check()?;
    let grid = Grid::draw(spec);
    let n = spec.n;
    let goal = n * n - 1;
    let cells: Vec<usize> = (0..n * n).filter(|&c| !grid.hole[c]).collect();
    let mut b = RmdpBuilder::new();
    let ball = |b: &mut RmdpBuilder, s: StateId, action: &str, succ: Vec<StateId>, center: Vec<Rational>, r: &Rational| {
        let t = TransitionTemplate::new(succ, center);
        b.action(s, action, UncertaintyEntry::ball(t, spec.norm, r.clone(), spec.support_restricted));
    };
    match spec.objective {
        LakeObjective::Reach => {
            let ids: Vec<Option<StateId>> = (0..n * n)
                .map(|c| (!grid.hole[c]).then(|| b.state(&cell_name(n, c))))
                .collect();
            for &c in &cells {
                let s = ids[c].expect("non-hole cell");
                if c == goal {
                    b.action(s, "stay", UncertaintyEntry::deterministic(s));
                    continue;
                }
                for (dir, (name, _, _)) in MOVES.iter().enumerate() {
                    let (succ, center): (Vec<_>, Vec<_>) = grid
                        .nominal(c, dir)
                        .into_iter()
                        .map(|(t, w)| (ids[t].expect("moves avoid holes"), w))
                        .unzip();
                    ball(&mut b, s, name, succ, center, &grid.radius[c]);
                }
            }
            b.label("goal", &[ids[goal].expect("goal is never a hole")]);
            b.label("start", &[ids[0].expect("start is never a hole")]);
            Ok(b.build())
        }
        LakeObjective::Parity => {
            // mode 0 seeks the leftmost column, mode 1 the rightmost.
            let mut ids = vec![[None, None]; n * n];
            for &c in &cells {
                for (slot, suffix) in ids[c].iter_mut().zip(["L", "R"]) {
                    *slot = Some(b.state(&format!("{}{}", cell_name(n, c), suffix)));
                }
            }
            let next_mode = |t: usize, mode: usize| -> usize {
                let col = t % n;
                match mode {
                    0 if col == 0 => 1,
                    1 if col == n - 1 => 0,
                    m => m,
                }
            };
            let mut priorities = Vec::new();
            for &c in &cells {
                for mode in 0..2 {
                    let s = ids[c][mode].expect("product state");
                    for (dir, (name, _, _)) in MOVES.iter().enumerate() {
                        let (succ, center): (Vec<_>, Vec<_>) = grid
                            .nominal(c, dir)
                            .into_iter()
                            .map(|(t, w)| (ids[t][next_mode(t, mode)].expect("moves avoid holes"), w))
                            .unzip();
                        ball(&mut b, s, name, succ, center, &grid.radius[c]);
                    }
                    let col = c % n;
                    let flipped = (col == 0 && mode == 1) || (col == n - 1 && mode == 0);
                    priorities.push(if flipped { 2 } else { 1 });
                }
            }
            b.label("start", &[ids[0][0].expect("start")]);
            let goal_states: Vec<StateId> = ids[goal].iter().flatten().copied().collect();
            b.label("goal", &goal_states);
            b.priorities(priorities);
            Ok(b.build())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    L1,
    L2,
    LInf,
    Polytope,
    FiniteMenu,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 5] = [
        FamilyKind::L1,
        FamilyKind::L2,
        FamilyKind::LInf,
        FamilyKind::Polytope,
        FamilyKind::FiniteMenu,
    ];
}

/// Shape of a random small model; `None` fields are drawn per entry.
#[derive(Debug, Clone)]
pub struct RandomSpec {
    pub seed: u64,
    pub max_states: usize,
    pub max_actions: usize,
    pub max_successors: usize,
    pub max_priority: u32,
    pub family: Option<FamilyKind>,
    pub support_restricted: Option<bool>,
}

impl RandomSpec {
    pub fn small(seed: u64) -> Self {
        RandomSpec {
            seed,
            max_states: 6,
            max_actions: 3,
            max_successors: 4,
            max_priority: 3,
            family: None,
            support_restricted: None,
        }
    }
}

const RADII: [(i64, i64); 7] = [(0, 1), (1, 10), (1, 5), (1, 3), (1, 2), (1, 1), (3, 2)];

fn random_distribution(rng: &mut SplitMix64, len: usize, allow_zero: bool) -> Vec<Rational> {
    let low = if allow_zero { 0 } else { 1 };
    let mut w: Vec<i64> = (0..len).map(|_| low + rng.below(5 - low as u64) as i64).collect();
    if w.iter().all(|x| *x == 0) {
        let i = rng.below(len as u64) as usize;
        w[i] = 1;
    }
    let total: i64 = w.iter().sum();
    w.into_iter().map(|x| from_ratio(x, total)).collect()
}

fn random_entry(rng: &mut SplitMix64, succ: Vec<StateId>, kind: FamilyKind, restricted: bool) -> UncertaintyEntry {
    let k = succ.len();
    let center = random_distribution(rng, k, true);
    let pick_radius = |rng: &mut SplitMix64| {
        let (p, q) = RADII[rng.below(RADII.len() as u64) as usize];
        from_ratio(p, q)
    };
    let t = TransitionTemplate::new(succ, center.clone());
    match kind {
        FamilyKind::L1 => UncertaintyEntry::ball(t, Norm::P(1), pick_radius(rng), restricted),
        FamilyKind::L2 => UncertaintyEntry::ball(t, Norm::P(2), pick_radius(rng), restricted),
        FamilyKind::LInf => UncertaintyEntry::ball(t, Norm::Inf, pick_radius(rng), restricted),
        FamilyKind::Polytope => {
            let rows = (0..rng.below(3))
                .map(|_| {
                    let coeffs: Vec<Rational> = (0..k).map(|_| from_int(rng.below(4) as i64 - 1)).collect();
                    let at_center: Rational = coeffs.iter().zip(&center).map(|(a, c)| a * c).sum();
                    let eq = rng.chance(1, 4);
                    let slack = if eq { Rational::zero() } else { from_ratio(rng.below(3) as i64, 8) };
                    LinearRow {
                        coeffs,
                        relation: if eq { Relation::Eq } else { Relation::Le },
                        rhs: at_center + slack,
                    }
                })
                .collect();
            UncertaintyEntry::polytope(t, rows, restricted)
        }
        FamilyKind::FiniteMenu => {
            let mut members = vec![center];
            for _ in 0..rng.below(4) {
                members.push(random_distribution(rng, k, true));
            }
            UncertaintyEntry::finite_menu(t, members, restricted)
        }
    }
}

/// Random model with every state keeping at least one action.
pub fn random_model(spec: &RandomSpec) -> Rmdp {
    let mut rng = SplitMix64::new(spec.seed);
    let n = 1 + rng.below(spec.max_states as u64) as usize;
    let mut b = RmdpBuilder::new();
    let ids: Vec<StateId> = (0..n).map(|i| b.state(&format!("q{i}"))).collect();
    for &s in &ids {
        let actions = 1 + rng.below(spec.max_actions as u64) as usize;
        for a in 0..actions {
            let k = 1 + rng.below(spec.max_successors.min(n) as u64) as usize;
            let mut pool = ids.clone();
            let mut succ = Vec::with_capacity(k);
            for _ in 0..k {
                let i = rng.below(pool.len() as u64) as usize;
                succ.push(pool.swap_remove(i));
            }
            let kind = spec
                .family
                .unwrap_or_else(|| FamilyKind::ALL[rng.below(FamilyKind::ALL.len() as u64) as usize]);
            let restricted = spec.support_restricted.unwrap_or_else(|| rng.chance(1, 2));
            b.action(s, &format!("a{a}"), random_entry(&mut rng, succ, kind, restricted));
        }
    }
    let target: Vec<StateId> = ids.iter().copied().filter(|_| rng.chance(1, 3)).collect();
    b.label("target", &target);
    let priorities = (0..n).map(|_| rng.below(spec.max_priority as u64 + 1) as u32).collect();
    b.priorities(priorities);
    b.build()
}

/// The seeded suite: all family/mode pairs in turn, with every third
/// model mixing families and modes per entry.
pub fn random_suite(count: usize, base_seed: u64) -> Vec<Rmdp> {
    (0..count)
        .map(|i| {
            let mut spec = RandomSpec::small(base_seed.wrapping_add(i as u64));
            if i % 3 != 2 {
                let combo = (i - i / 3) % 10;
                spec.family = Some(FamilyKind::ALL[combo % 5]);
                spec.support_restricted = Some(combo >= 5);
            }
            random_model(&spec)
        })
        .collect()
}

/// Target named `target` of a random model.
pub fn target_of(model: &Rmdp) -> crate::set::StateSet {
    model.label("target").cloned().unwrap_or_else(|| model.empty_set())
}
