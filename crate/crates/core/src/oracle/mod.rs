//! Decision procedures over a single uncertainty set, and the two force
//! predicates built from them.
//!
//! Faces and target sets are given as positions into the entry's successor
//! list. Every query goes through an [`Oracle`], which fixes the arithmetic
//! backend, counts calls and enforces an optional deadline.

pub mod ball;
pub mod scalar;
pub mod simplex;

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ActionId, Family, LinearRow, Relation, Rmdp, StateId, UncertaintyEntry};
use crate::rational::Rational;
use crate::set::StateSet;
use scalar::{Scalar, Tol};
use simplex::{Lp, LpOutcome, Rel};

/// Default tolerance of the floating-point backend.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Default bound on the face size enumerated by [`Oracle::achievable_supports`].
pub const DEFAULT_SUPPORT_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
#[derive(Default)]
pub enum Backend {
    #[default]
    Exact,
    /// Values within `tolerance` of zero count as zero.
    Float { tolerance: f64 },
}


impl Backend {
    pub fn float() -> Self {
        Backend::Float {
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Float { .. } => "float",
        }
    }
}

/// Call counters. Force calls are the unit of the complexity bounds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OracleStats {
    pub force_agent: u64,
    pub force_env: u64,
    pub face_feasible: u64,
    pub can_hit: u64,
    pub lp_solves: u64,
}

impl OracleStats {
    pub fn force_calls(&self) -> u64 {
        self.force_agent + self.force_env
    }

    /// Counts accumulated after the snapshot `earlier`.
    pub fn since(&self, earlier: &OracleStats) -> OracleStats {
        OracleStats {
            force_agent: self.force_agent - earlier.force_agent,
            force_env: self.force_env - earlier.force_env,
            face_feasible: self.face_feasible - earlier.face_feasible,
            can_hit: self.can_hit - earlier.can_hit,
            lp_solves: self.lp_solves - earlier.lp_solves,
        }
    }

    pub fn add(&mut self, other: &OracleStats) {
        self.force_agent += other.force_agent;
        self.force_env += other.force_env;
        self.face_feasible += other.face_feasible;
        self.can_hit += other.can_hit;
        self.lp_solves += other.lp_solves;
    }
}

#[derive(Debug, Clone)]
pub struct Oracle {
    backend: Backend,
    stats: OracleStats,
    deadline: Option<Instant>,
    support_cap: usize,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle::new(Backend::Exact)
    }
}

impl Oracle {
    pub fn new(backend: Backend) -> Self {
        Oracle {
            backend,
            stats: OracleStats::default(),
            deadline: None,
            support_cap: DEFAULT_SUPPORT_CAP,
        }
    }

    pub fn exact() -> Self {
        Self::new(Backend::Exact)
    }

    pub fn with_deadline(mut self, deadline: Option<Instant>) -> Self {
        self.deadline = deadline;
        self
    }

    pub fn with_support_cap(mut self, cap: usize) -> Self {
        self.support_cap = cap;
        self
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn stats(&self) -> OracleStats {
        self.stats
    }

    pub fn check_deadline(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Error::Timeout),
            _ => Ok(()),
        }
    }

    /// Is there a member whose support lies inside `face`?
    pub fn face_feasible(&mut self, entry: &UncertaintyEntry, face: &[u32]) -> Result<bool> {
        check_positions(entry, face)?;
        self.stats.face_feasible += 1;
        let mask = ball::effective_mask(entry, face);
        Ok(match &entry.family {
            Family::FiniteMenu { members } => members_on(entry, members, &mask).next().is_some(),
            Family::Ball { .. } | Family::Polytope { .. } => {
                if matches!(entry.family, Family::Polytope { .. }) {
                    self.stats.lp_solves += 1;
                }
                match self.backend {
                    Backend::Exact => feasible_generic::<Rational>(entry, &mask, &Tol::exact()),
                    Backend::Float { tolerance } => feasible_generic::<f64>(entry, &mask, &Tol { eps: tolerance }),
                }
            }
        })
    }

    /// Is there a member inside `face` with positive mass on `targets`?
    pub fn can_hit(&mut self, entry: &UncertaintyEntry, face: &[u32], targets: &[u32]) -> Result<bool> {
        check_positions(entry, face)?;
        check_positions(entry, targets)?;
        self.stats.can_hit += 1;
        let mask = ball::effective_mask(entry, face);
        let mut hit = vec![false; mask.len()];
        for &t in targets {
            hit[t as usize] = true;
        }
        if !mask.iter().zip(&hit).any(|(m, h)| *m && *h) {
            return Ok(false);
        }
        Ok(match &entry.family {
            Family::FiniteMenu { members } => {
                members_on(entry, members, &mask).any(|m| hit.iter().zip(m).any(|(h, p)| *h && *p > Rational::from_integer(0.into())))
            }
            Family::Ball { .. } | Family::Polytope { .. } => {
                if matches!(entry.family, Family::Polytope { .. }) {
                    self.stats.lp_solves += 1;
                }
                match self.backend {
                    Backend::Exact => can_hit_generic::<Rational>(entry, &mask, &hit, &Tol::exact()),
                    Backend::Float { tolerance } => can_hit_generic::<f64>(entry, &mask, &hit, &Tol { eps: tolerance }),
                }
            }
        })
    }

    /// Lowest action at `state` whose every member puts positive mass on
    /// `target`.
    pub fn agent_witness(&mut self, model: &Rmdp, state: StateId, target: &StateSet) -> Result<Option<ActionId>> {
        self.check_deadline()?;
        self.stats.force_agent += 1;
        for choice in model.choices(state) {
            let avoid = choice.face_without(target);
            if avoid.len() == choice.face.len() {
                continue;
            }
            if !self.face_feasible(&choice.entry, &avoid)? {
                return Ok(Some(choice.action));
            }
        }
        Ok(None)
    }

    /// `∃a ∀δ. δ[target] > 0`; false on an empty menu.
    pub fn force_agent(&mut self, model: &Rmdp, state: StateId, target: &StateSet) -> Result<bool> {
        Ok(self.agent_witness(model, state, target)?.is_some())
    }

    /// `∀a ∃δ. δ[target] > 0`; true on an empty menu.
    pub fn force_env(&mut self, model: &Rmdp, state: StateId, target: &StateSet) -> Result<bool> {
        self.check_deadline()?;
        self.stats.force_env += 1;
        for choice in model.choices(state) {
            let hits = choice.face_within(target);
            if hits.is_empty() || !self.can_hit(&choice.entry, &choice.face, &hits)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Every support `T ⊆ face` realized by some member, in ascending order.
    pub fn achievable_supports(&mut self, entry: &UncertaintyEntry, face: &[u32]) -> Result<Vec<Vec<u32>>> {
        check_positions(entry, face)?;
        if face.len() > self.support_cap {
            return Err(Error::SupportCapExceeded {
                size: face.len(),
                cap: self.support_cap,
            });
        }
        let mut face = face.to_vec();
        face.sort_unstable();
        face.dedup();
        let mut out = Vec::new();
        if let Family::FiniteMenu { members } = &entry.family {
            let mask = ball::effective_mask(entry, &face);
            for m in members_on(entry, members, &mask) {
                let supp: Vec<u32> = (0..m.len() as u32)
                    .filter(|&i| m[i as usize] > Rational::from_integer(0.into()))
                    .collect();
                out.push(supp);
            }
        } else {
            for bits in 1u64..(1u64 << face.len()) {
                let sub: Vec<u32> = face
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| bits >> i & 1 == 1)
                    .map(|(_, p)| *p)
                    .collect();
                if !self.face_feasible(entry, &sub)? {
                    continue;
                }
                let mut all = true;
                for &t in &sub {
                    if !self.can_hit(entry, &sub, &[t])? {
                        all = false;
                        break;
                    }
                }
                if all {
                    out.push(sub);
                }
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

fn check_positions(entry: &UncertaintyEntry, positions: &[u32]) -> Result<()> {
    let size = entry.template.len();
    match positions.iter().find(|&&p| p as usize >= size) {
        Some(&p) => Err(Error::OutsideDomain { index: p as usize, size }),
        None => Ok(()),
    }
}

/// Menu members the environment may use on the face.
fn members_on<'a>(
    entry: &'a UncertaintyEntry,
    members: &'a [Vec<Rational>],
    mask: &'a [bool],
) -> impl Iterator<Item = &'a Vec<Rational>> + 'a {
    let zero = Rational::from_integer(0.into());
    members.iter().filter(move |m| {
        m.iter().enumerate().all(|(i, p)| *p == zero || mask[i])
            && (!entry.support_restricted || m.iter().enumerate().all(|(i, p)| *p == zero || entry.template.in_support(i)))
    })
}

fn convert<F: Scalar>(values: &[Rational]) -> Vec<F> {
    values.iter().map(F::from_rational).collect()
}

fn polytope_lp<F: Scalar>(rows: &[LinearRow], mask: &[bool]) -> Lp<F> {
    let cols: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    let mut lp_rows = vec![(vec![F::one(); cols.len()], Rel::Eq, F::one())];
    for row in rows {
        let coeffs = cols.iter().map(|&j| F::from_rational(&row.coeffs[j])).collect();
        let rel = match row.relation {
            Relation::Le => Rel::Le,
            Relation::Eq => Rel::Eq,
        };
        lp_rows.push((coeffs, rel, F::from_rational(&row.rhs)));
    }
    Lp {
        nvars: cols.len(),
        rows: lp_rows,
    }
}

fn feasible_generic<F: Scalar>(entry: &UncertaintyEntry, mask: &[bool], tol: &Tol<F>) -> bool {
    if !mask.iter().any(|m| *m) {
        return false;
    }
    match &entry.family {
        Family::Ball { norm, radius } => {
            ball::feasible(&convert::<F>(&entry.template.center), mask, *norm, &F::from_rational(radius), tol)
        }
        Family::Polytope { rows } => {
            simplex::solve(&polytope_lp::<F>(rows, mask), None, tol) != LpOutcome::Infeasible
        }
        Family::FiniteMenu { .. } => unreachable!("finite menus are decided exactly"),
    }
}

fn can_hit_generic<F: Scalar>(entry: &UncertaintyEntry, mask: &[bool], hit: &[bool], tol: &Tol<F>) -> bool {
    match &entry.family {
        Family::Ball { norm, radius } => ball::can_hit(
            &convert::<F>(&entry.template.center),
            mask,
            hit,
            *norm,
            &F::from_rational(radius),
            tol,
        ),
        Family::Polytope { rows } => {
            let objective: Vec<F> = (0..mask.len())
                .filter(|&i| mask[i])
                .map(|i| if hit[i] { F::one() } else { F::zero() })
                .collect();
            match simplex::solve(&polytope_lp::<F>(rows, mask), Some(&objective), tol) {
                LpOutcome::Optimal(v) => tol.is_pos(&v),
                LpOutcome::Unbounded => true,
                LpOutcome::Infeasible => false,
            }
        }
        Family::FiniteMenu { .. } => unreachable!("finite menus are decided exactly"),
    }
}
