//! Robust MDP data model and sub-model operations.
//!
//! An [`Rmdp`] never changes after it is built. Removing states
//! ([`remove_states`]) and restricting to a state set ([`restrict_to`])
//! return new models whose choices carry a tightened *face*: the subset of
//! the declared successors that the environment may still put mass on. The
//! uncertainty families themselves are shared between a model and all of its
//! sub-models.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::rational::Rational;
use crate::set::StateSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActionId(pub usize);

/// Norm of an L-ball uncertainty set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    /// `L_d` for a positive integer `d`.
    P(u32),
    Inf,
}

impl Norm {
    pub fn parse(text: &str) -> Option<Norm> {
        match text.trim().to_ascii_lowercase().as_str() {
            "inf" | "linf" | "infinity" => Some(Norm::Inf),
            other => {
                let digits = other.strip_prefix('l').unwrap_or(other);
                digits.parse::<u32>().ok().filter(|d| *d >= 1).map(Norm::P)
            }
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::P(d) => write!(f, "{d}"),
            Norm::Inf => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
}

/// One row `coeffs · p (<= | =) rhs` over the successor domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRow {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl LinearRow {
    pub fn holds_at(&self, point: &[Rational]) -> bool {
        let lhs: Rational = self
            .coeffs
            .iter()
            .zip(point)
            .map(|(c, p)| c * p)
            .sum();
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    Ball { norm: Norm, radius: Rational },
    Polytope { rows: Vec<LinearRow> },
    FiniteMenu { members: Vec<Vec<Rational>> },
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Ball { .. } => "lball",
            Family::Polytope { .. } => "polytope",
            Family::FiniteMenu { .. } => "finite_menu",
        }
    }
}

/// Declared successor domain of one state-action pair and its nominal
/// distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionTemplate {
    pub successors: Vec<StateId>,
    pub center: Vec<Rational>,
}

impl TransitionTemplate {
    pub fn new(successors: Vec<StateId>, center: Vec<Rational>) -> Self {
        TransitionTemplate { successors, center }
    }

    pub fn dirac(target: StateId) -> Self {
        TransitionTemplate {
            successors: vec![target],
            center: vec![Rational::one()],
        }
    }

    pub fn len(&self) -> usize {
        self.successors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.successors.is_empty()
    }

    pub fn position(&self, state: StateId) -> Option<usize> {
        self.successors.iter().position(|s| *s == state)
    }

    pub fn in_support(&self, pos: usize) -> bool {
        self.center[pos].is_positive()
    }
}

/// The ambiguity set of one state-action pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UncertaintyEntry {
    pub template: TransitionTemplate,
    pub family: Family,
    /// Members may only use successors in the support of the center.
    pub support_restricted: bool,
}

impl UncertaintyEntry {
    pub fn ball(template: TransitionTemplate, norm: Norm, radius: Rational, restricted: bool) -> Self {
        UncertaintyEntry {
            template,
            family: Family::Ball { norm, radius },
            support_restricted: restricted,
        }
    }

    pub fn polytope(template: TransitionTemplate, rows: Vec<LinearRow>, restricted: bool) -> Self {
        UncertaintyEntry {
            template,
            family: Family::Polytope { rows },
            support_restricted: restricted,
        }
    }

    pub fn finite_menu(template: TransitionTemplate, members: Vec<Vec<Rational>>, restricted: bool) -> Self {
        UncertaintyEntry {
            template,
            family: Family::FiniteMenu { members },
            support_restricted: restricted,
        }
    }

    /// Deterministic transition: the only member is the Dirac distribution.
    pub fn deterministic(target: StateId) -> Self {
        Self::finite_menu(TransitionTemplate::dirac(target), vec![vec![Rational::one()]], false)
    }

    pub fn successors(&self) -> &[StateId] {
        &self.template.successors
    }
}

/// Positions (into the successor list) the environment may still use.
pub type Face = Vec<u32>;

/// An available action at a state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Choice {
    pub action: ActionId,
    pub entry: Arc<UncertaintyEntry>,
    pub face: Face,
}

impl Choice {
    pub fn new(action: ActionId, entry: Arc<UncertaintyEntry>) -> Self {
        let face = (0..entry.template.len() as u32).collect();
        Choice { action, entry, face }
    }

    pub fn face_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.face
            .iter()
            .map(move |&p| self.entry.template.successors[p as usize])
    }

    pub fn face_without(&self, set: &StateSet) -> Face {
        self.face
            .iter()
            .copied()
            .filter(|&p| !set.contains(self.entry.template.successors[p as usize]))
            .collect()
    }

    pub fn face_within(&self, set: &StateSet) -> Face {
        self.face
            .iter()
            .copied()
            .filter(|&p| set.contains(self.entry.template.successors[p as usize]))
            .collect()
    }
}

/// Priority of every state (dead states keep theirs; they are never read).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorityFunction {
    values: Vec<u32>,
}

impl PriorityFunction {
    pub fn new(values: Vec<u32>) -> Self {
        PriorityFunction { values }
    }

    pub fn get(&self, state: StateId) -> u32 {
        self.values[state.0]
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest priority among the given states (0 when empty).
    pub fn max_over(&self, states: &StateSet) -> u32 {
        states.iter().map(|s| self.get(s)).max().unwrap_or(0)
    }
}

/// Pure memoryless agent policy on a stated domain.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemorylessPolicy {
    choice: BTreeMap<StateId, ActionId>,
}

impl MemorylessPolicy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, state: StateId) -> Option<ActionId> {
        self.choice.get(&state).copied()
    }

    pub fn set(&mut self, state: StateId, action: ActionId) {
        self.choice.insert(state, action);
    }

    /// Sets the action only if the state has none yet.
    pub fn set_if_absent(&mut self, state: StateId, action: ActionId) {
        self.choice.entry(state).or_insert(action);
    }

    pub fn len(&self) -> usize {
        self.choice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choice.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateId, ActionId)> + '_ {
        self.choice.iter().map(|(s, a)| (*s, *a))
    }

    pub fn domain(&self, capacity: usize) -> StateSet {
        StateSet::from_ids(capacity, self.choice.keys().copied())
    }

    pub fn retain_domain(&mut self, keep: &StateSet) {
        self.choice.retain(|s, _| keep.contains(*s));
    }
}

/// A robust MDP over a fixed state table, some of whose states may have
/// been removed (they are then no longer *live*).
#[derive(Debug, Clone, PartialEq)]
pub struct Rmdp {
    state_names: Arc<Vec<String>>,
    action_names: Arc<Vec<String>>,
    live: StateSet,
    menus: Vec<Vec<Choice>>,
    labels: BTreeMap<String, StateSet>,
    priorities: Option<Arc<PriorityFunction>>,
}

impl Rmdp {
    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_live(&self) -> usize {
        self.live.len()
    }

    pub fn live(&self) -> &StateSet {
        &self.live
    }

    pub fn is_live(&self, state: StateId) -> bool {
        self.live.contains(state)
    }

    pub fn state_name(&self, state: StateId) -> &str {
        &self.state_names[state.0]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name).map(StateId)
    }

    pub fn action_name(&self, action: ActionId) -> &str {
        &self.action_names[action.0]
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.action_names.iter().position(|n| n == name).map(ActionId)
    }

    /// Available actions at `state`, ascending by [`ActionId`]. Dead states
    /// have an empty menu.
    pub fn choices(&self, state: StateId) -> &[Choice] {
        &self.menus[state.0]
    }

    pub fn choice(&self, state: StateId, action: ActionId) -> Option<&Choice> {
        self.menus[state.0].iter().find(|c| c.action == action)
    }

    pub fn labels(&self) -> &BTreeMap<String, StateSet> {
        &self.labels
    }

    pub fn label(&self, name: &str) -> Option<&StateSet> {
        self.labels.get(name)
    }

    pub fn priorities(&self) -> Option<&PriorityFunction> {
        self.priorities.as_deref()
    }

    pub fn empty_set(&self) -> StateSet {
        StateSet::empty(self.num_states())
    }

    /// Resolves state names into a set, failing on unknown names.
    pub fn state_set<S: AsRef<str>>(&self, names: &[S]) -> Result<StateSet> {
        let mut set = self.empty_set();
        for name in names {
            let id = self
                .state_id(name.as_ref())
                .ok_or_else(|| Error::UnknownState(name.as_ref().to_string()))?;
            set.insert(id);
        }
        Ok(set)
    }

    pub fn names_of(&self, set: &StateSet) -> Vec<String> {
        set.iter().map(|s| self.state_name(s).to_string()).collect()
    }

    pub fn with_priorities(&self, priorities: PriorityFunction) -> Rmdp {
        let mut out = self.clone();
        out.priorities = Some(Arc::new(priorities));
        out
    }

    pub fn with_label(&self, name: &str, states: StateSet) -> Rmdp {
        let mut out = self.clone();
        out.labels.insert(name.to_string(), states);
        out
    }

    /// Keeps exactly one action at every state in the policy domain.
    pub fn induced_by(&self, policy: &MemorylessPolicy) -> Result<Rmdp> {
        let mut out = self.clone();
        for (state, action) in policy.iter() {
            let admissible = self.is_live(state) && self.choice(state, action).is_some();
            if !admissible {
                return Err(Error::InadmissibleAction {
                    state: self.state_name(state).to_string(),
                    action: self
                        .action_names
                        .get(action.0)
                        .cloned()
                        .unwrap_or_else(|| format!("#{}", action.0)),
                });
            }
            out.menus[state.0].retain(|c| c.action == action);
        }
        Ok(out)
    }

    pub(crate) fn from_parts(
        state_names: Vec<String>,
        action_names: Vec<String>,
        live: StateSet,
        menus: Vec<Vec<Choice>>,
        labels: BTreeMap<String, StateSet>,
        priorities: Option<PriorityFunction>,
    ) -> Rmdp {
        Rmdp {
            state_names: Arc::new(state_names),
            action_names: Arc::new(action_names),
            live,
            menus,
            labels,
            priorities: priorities.map(Arc::new),
        }
    }

    fn derive(&self, live: StateSet, menus: Vec<Vec<Choice>>) -> Rmdp {
        let labels = self
            .labels
            .iter()
            .map(|(k, v)| (k.clone(), v.intersection(&live)))
            .collect();
        Rmdp {
            state_names: Arc::clone(&self.state_names),
            action_names: Arc::clone(&self.action_names),
            live,
            menus,
            labels,
            priorities: self.priorities.clone(),
        }
    }
}

/// Incremental constructor for [`Rmdp`].
#[derive(Debug, Default)]
pub struct RmdpBuilder {
    state_names: Vec<String>,
    state_index: HashMap<String, StateId>,
    action_names: Vec<String>,
    action_index: HashMap<String, ActionId>,
    menus: Vec<Vec<Choice>>,
    labels: BTreeMap<String, Vec<StateId>>,
    priorities: Option<Vec<u32>>,
}

impl RmdpBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `name`, adding the state if it is new.
    pub fn state(&mut self, name: &str) -> StateId {
        if let Some(id) = self.state_index.get(name) {
            return *id;
        }
        let id = StateId(self.state_names.len());
        self.state_names.push(name.to_string());
        self.state_index.insert(name.to_string(), id);
        self.menus.push(Vec::new());
        id
    }

    pub fn states<S: AsRef<str>>(&mut self, names: &[S]) -> Vec<StateId> {
        names.iter().map(|n| self.state(n.as_ref())).collect()
    }

    pub fn action_id(&mut self, name: &str) -> ActionId {
        if let Some(id) = self.action_index.get(name) {
            return *id;
        }
        let id = ActionId(self.action_names.len());
        self.action_names.push(name.to_string());
        self.action_index.insert(name.to_string(), id);
        id
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    /// Adds action `action` at `state`; a repeated action replaces the
    /// earlier entry.
    pub fn action(&mut self, state: StateId, action: &str, entry: UncertaintyEntry) -> &mut Self {
        let action = self.action_id(action);
        let menu = &mut self.menus[state.0];
        menu.retain(|c| c.action != action);
        menu.push(Choice::new(action, Arc::new(entry)));
        self
    }

    pub fn label(&mut self, name: &str, states: &[StateId]) -> &mut Self {
        self.labels.entry(name.to_string()).or_default().extend_from_slice(states);
        self
    }

    pub fn priorities(&mut self, values: Vec<u32>) -> &mut Self {
        self.priorities = Some(values);
        self
    }

    pub(crate) fn set_face(&mut self, state: StateId, action: ActionId, face: Face) {
        if let Some(c) = self.menus[state.0].iter_mut().find(|c| c.action == action) {
            c.face = face;
        }
    }

    pub fn build(self) -> Rmdp {
        self.build_with_live(None)
    }

    pub(crate) fn build_with_live(mut self, live: Option<StateSet>) -> Rmdp {
        let n = self.state_names.len();
        for menu in &mut self.menus {
            menu.sort_by_key(|c| c.action);
        }
        let labels = self
            .labels
            .into_iter()
            .map(|(k, ids)| (k, StateSet::from_ids(n, ids)))
            .collect();
        let live = live.unwrap_or_else(|| StateSet::full(n));
        let priorities = self.priorities.map(|mut v| {
            v.resize(n, 0);
            PriorityFunction::new(v)
        });
        Rmdp::from_parts(self.state_names, self.action_names, live, self.menus, labels, priorities)
    }
}

/// A single well-formedness problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub state: String,
    pub action: Option<String>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.action {
            Some(a) => write!(f, "{} / {}: {}", self.state, a, self.message),
            None => write!(f, "{}: {}", self.state, self.message),
        }
    }
}

fn is_distribution(values: &[Rational]) -> bool {
    values.iter().all(|v| !v.is_negative()) && values.iter().sum::<Rational>() == Rational::one()
}

/// Checks every structural invariant; an empty list means the model is valid.
pub fn validate(model: &Rmdp) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = model.num_states();
    for state in model.live.iter() {
        let sname = model.state_name(state).to_string();
        for choice in model.choices(state) {
            let mut report = |message: String| {
                out.push(Violation {
                    state: sname.clone(),
                    action: Some(model.action_name(choice.action).to_string()),
                    message,
                })
            };
            let entry = &choice.entry;
            let t = &entry.template;
            if t.successors.is_empty() {
                report("empty successor domain".into());
                continue;
            }
            if t.center.len() != t.successors.len() {
                report("center length differs from successor list".into());
                continue;
            }
            let mut seen = std::collections::BTreeSet::new();
            for s in &t.successors {
                if s.0 >= n {
                    report(format!("successor #{} is not a state", s.0));
                } else if !seen.insert(*s) {
                    report(format!("duplicate successor {}", model.state_name(*s)));
                }
            }
            if !is_distribution(&t.center) {
                report("center not a distribution".into());
            }
            match &entry.family {
                Family::Ball { norm, radius } => {
                    if radius.is_negative() {
                        report("negative radius".into());
                    }
                    if matches!(norm, Norm::P(0)) {
                        report("norm exponent must be positive".into());
                    }
                }
                Family::Polytope { rows } => {
                    for (i, row) in rows.iter().enumerate() {
                        if row.coeffs.len() != t.len() {
                            report(format!("row {i} has wrong length"));
                        } else if !row.holds_at(&t.center) {
                            report(format!("center outside polytope (row {i})"));
                        }
                    }
                }
                Family::FiniteMenu { members } => {
                    if members.is_empty() {
                        report("finite menu has no members".into());
                    }
                    for (i, m) in members.iter().enumerate() {
                        if m.len() != t.len() || !is_distribution(m) {
                            report(format!("menu member {i} not a distribution"));
                        }
                    }
                }
            }
            let mut last = None;
            for &p in &choice.face {
                if p as usize >= t.len() {
                    report(format!("face position {p} outside successor domain"));
                } else if last.is_some_and(|l| l >= p) {
                    report("face positions not strictly ascending".into());
                } else {
                    let succ = t.successors[p as usize];
                    if succ.0 < n && !model.live.contains(succ) {
                        report(format!("face reaches removed state {}", model.state_name(succ)));
                    }
                }
                last = Some(p);
            }
        }
    }
    if let Some(pr) = model.priorities() {
        if pr.len() != n {
            out.push(Violation {
                state: "<model>".into(),
                action: None,
                message: format!("priority table has {} entries for {n} states", pr.len()),
            });
        }
    }
    for (name, set) in &model.labels {
        if set.capacity() != n {
            out.push(Violation {
                state: "<model>".into(),
                action: None,
                message: format!("label {name:?} sized for a different state table"),
            });
        }
    }
    out
}

fn check_subset(model: &Rmdp, set: &StateSet) -> Result<()> {
    if set.capacity() != model.num_states() {
        return Err(Error::InvalidModel("state set sized for a different model".into()));
    }
    if let Some(s) = set.difference(&model.live).iter().next() {
        return Err(Error::NotLive(model.state_name(s).to_string()));
    }
    Ok(())
}

/// `M \ Z`: drops the states in `removed` and every action that could reach
/// them in one step; surviving actions lose those successors from their face.
pub fn remove_states(model: &Rmdp, removed: &StateSet, oracle: &mut Oracle) -> Result<Rmdp> {
    check_subset(model, removed)?;
    let live = model.live.difference(removed);
    let mut menus = vec![Vec::new(); model.num_states()];
    for state in live.iter() {
        for choice in model.choices(state) {
            let hits = choice.face_within(removed);
            if hits.is_empty() {
                menus[state.0].push(choice.clone());
            } else if !oracle.can_hit(&choice.entry, &choice.face, &hits)? {
                let face = choice.face_without(removed);
                menus[state.0].push(Choice { face, ..choice.clone() });
            }
        }
    }
    Ok(model.derive(live, menus))
}

/// `M|_B`: keeps only the states in `keep`; an action survives if some
/// member of its set stays inside `keep`, and its face shrinks accordingly.
pub fn restrict_to(model: &Rmdp, keep: &StateSet, oracle: &mut Oracle) -> Result<Rmdp> {
    check_subset(model, keep)?;
    let mut menus = vec![Vec::new(); model.num_states()];
    for state in keep.iter() {
        for choice in model.choices(state) {
            let face = choice.face_within(keep);
            if face.len() == choice.face.len() {
                menus[state.0].push(choice.clone());
            } else if oracle.face_feasible(&choice.entry, &face)? {
                menus[state.0].push(Choice { face, ..choice.clone() });
            }
        }
    }
    Ok(model.derive(keep.clone(), menus))
}

/// Total mass of the center on the given positions.
pub fn center_mass(entry: &UncertaintyEntry, positions: &[u32]) -> Rational {
    positions
        .iter()
        .map(|&p| entry.template.center[p as usize].clone())
        .fold(Rational::zero(), |a, b| a + b)
}
