//! Model files: the native JSON format and explicit transition lists.
//!
//! JSON models carry the schema tag `rmdpq-1`. Every rational is a `"p/q"`
//! string, and states and actions are referenced by name:
//!
//! ```json
//! {
//!   "schema": "rmdpq-1",
//!   "states": ["s1", "s2"],
//!   "actions": ["a"],
//!   "live": ["s1", "s2"],
//!   "labels": {"target": ["s2"]},
//!   "priorities": [1, 2],
//!   "choices": [
//!     {"state": "s1", "action": "a", "successors": ["s1", "s2"],
//!      "center": ["1/2", "1/2"],
//!      "family": {"type": "lball", "norm": "2", "radius": "1/5"},
//!      "support_restricted": false, "face": ["s1", "s2"]}
//!   ]
//! }
//! ```
//!
//! Other family tags are `polytope` (`rows` of `coeffs`, `rel` `"<="` or
//! `"="`, `rhs`) and `finite_menu` (`members`).
//!
//! The explicit format is a transition file with lines `src action dst prob`
//! and a label file with lines `state label...`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Family, LinearRow, MemorylessPolicy, Norm, PriorityFunction, Relation, Rmdp, RmdpBuilder, StateId,
    TransitionTemplate, UncertaintyEntry,
};
use crate::rational::{self, Rational};
use crate::set::StateSet;

pub const MODEL_SCHEMA: &str = "rmdpq-1";
pub const POLICY_SCHEMA: &str = "rmdpq-policy-1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    schema: String,
    states: Vec<String>,
    actions: Vec<String>,
    live: Vec<String>,
    #[serde(default)]
    labels: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    priorities: Option<Vec<u32>>,
    choices: Vec<ChoiceFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChoiceFile {
    state: String,
    action: String,
    successors: Vec<String>,
    #[serde(with = "rational::serde_vec")]
    center: Vec<Rational>,
    family: FamilyFile,
    support_restricted: bool,
    face: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum FamilyFile {
    Lball {
        norm: String,
        #[serde(with = "rational::serde_str")]
        radius: Rational,
    },
    Polytope {
        rows: Vec<RowFile>,
    },
    FiniteMenu {
        members: Vec<MemberFile>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct MemberFile(#[serde(with = "rational::serde_vec")] Vec<Rational>);

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RowFile {
    #[serde(with = "rational::serde_vec")]
    coeffs: Vec<Rational>,
    rel: String,
    #[serde(with = "rational::serde_str")]
    rhs: Rational,
}

fn family_to_file(family: &Family) -> FamilyFile {
    match family {
        Family::Ball { norm, radius } => FamilyFile::Lball {
            norm: norm.to_string(),
            radius: radius.clone(),
        },
        Family::Polytope { rows } => FamilyFile::Polytope {
            rows: rows
                .iter()
                .map(|r| RowFile {
                    coeffs: r.coeffs.clone(),
                    rel: match r.relation {
                        Relation::Le => "<=".into(),
                        Relation::Eq => "=".into(),
                    },
                    rhs: r.rhs.clone(),
                })
                .collect(),
        },
        Family::FiniteMenu { members } => FamilyFile::FiniteMenu {
            members: members.iter().cloned().map(MemberFile).collect(),
        },
    }
}

fn family_from_file(file: FamilyFile) -> Result<Family> {
    Ok(match file {
        FamilyFile::Lball { norm, radius } => Family::Ball {
            norm: Norm::parse(&norm).ok_or_else(|| Error::Schema(format!("unknown norm {norm:?}")))?,
            radius,
        },
        FamilyFile::Polytope { rows } => Family::Polytope {
            rows: rows
                .into_iter()
                .map(|r| {
                    let relation = match r.rel.as_str() {
                        "<=" => Relation::Le,
                        "=" | "==" => Relation::Eq,
                        other => return Err(Error::Schema(format!("unknown relation {other:?}"))),
                    };
                    Ok(LinearRow {
                        coeffs: r.coeffs,
                        relation,
                        rhs: r.rhs,
                    })
                })
                .collect::<Result<_>>()?,
        },
        FamilyFile::FiniteMenu { members } => Family::FiniteMenu {
            members: members.into_iter().map(|m| m.0).collect(),
        },
    })
}

fn names(model: &Rmdp, set: &StateSet) -> Vec<String> {
    model.names_of(set)
}

/// Serializes a model; equal models give identical text.
pub fn to_json(model: &Rmdp) -> String {
    let mut choices = Vec::new();
    for s in model.live().iter() {
        for c in model.choices(s) {
            let e = &c.entry;
            choices.push(ChoiceFile {
                state: model.state_name(s).to_string(),
                action: model.action_name(c.action).to_string(),
                successors: e.successors().iter().map(|t| model.state_name(*t).to_string()).collect(),
                center: e.template.center.clone(),
                family: family_to_file(&e.family),
                support_restricted: e.support_restricted,
                face: c.face_states().map(|t| model.state_name(t).to_string()).collect(),
            });
        }
    }
    let file = ModelFile {
        schema: MODEL_SCHEMA.into(),
        states: model.state_names().to_vec(),
        actions: model.action_names().to_vec(),
        live: names(model, model.live()),
        labels: model.labels().iter().map(|(k, v)| (k.clone(), names(model, v))).collect(),
        priorities: model.priorities().map(|p| p.values().to_vec()),
        choices,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("model serializes");
    text.push('\n');
    text
}

pub fn from_json(text: &str) -> Result<Rmdp> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    match value.get("schema").and_then(|s| s.as_str()) {
        Some(MODEL_SCHEMA) => {}
        Some(other) => return Err(Error::Schema(format!("unsupported schema {other:?}, expected {MODEL_SCHEMA:?}"))),
        None => return Err(Error::Schema("missing schema field".into())),
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
    let mut b = RmdpBuilder::new();
    for s in &file.states {
        b.state(s);
    }
    if b.num_states() != file.states.len() {
        return Err(Error::Schema("duplicate state names".into()));
    }
    for a in &file.actions {
        b.action_id(a);
    }
    let index: HashMap<&str, StateId> = file.states.iter().enumerate().map(|(i, s)| (s.as_str(), StateId(i))).collect();
    let lookup = |name: &str| index.get(name).copied().ok_or_else(|| Error::UnknownState(name.to_string()));
    let mut live = StateSet::empty(file.states.len());
    for s in &file.live {
        live.insert(lookup(s)?);
    }
    for (label, states) in &file.labels {
        let ids = states.iter().map(|s| lookup(s)).collect::<Result<Vec<_>>>()?;
        b.label(label, &ids);
    }
    if let Some(p) = &file.priorities {
        if p.len() != file.states.len() {
            return Err(Error::Schema("priorities must list one value per state".into()));
        }
        b.priorities(p.clone());
    }
    for c in file.choices {
        let state = lookup(&c.state)?;
        let successors = c.successors.iter().map(|s| lookup(s)).collect::<Result<Vec<_>>>()?;
        let mut face = Vec::with_capacity(c.face.len());
        for f in &c.face {
            let id = lookup(f)?;
            let pos = successors
                .iter()
                .position(|s| *s == id)
                .ok_or_else(|| Error::Schema(format!("face state {f:?} is not a successor of {}/{}", c.state, c.action)))?;
            face.push(pos as u32);
        }
        face.sort_unstable();
        let entry = UncertaintyEntry {
            template: TransitionTemplate::new(successors, c.center),
            family: family_from_file(c.family)?,
            support_restricted: c.support_restricted,
        };
        b.action(state, &c.action, entry);
        let action = b.action_id(&c.action);
        b.set_face(state, action, face);
    }
    Ok(b.build_with_live(Some(live)))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save_model(model: &Rmdp, path: &Path) -> Result<()> {
    write(path, &to_json(model))
}

pub fn load_model(path: &Path) -> Result<Rmdp> {
    from_json(&read(path)?)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyFile {
    schema: String,
    policy: BTreeMap<String, String>,
}

pub fn policy_to_json(model: &Rmdp, policy: &MemorylessPolicy) -> String {
    let file = PolicyFile {
        schema: POLICY_SCHEMA.into(),
        policy: policy
            .iter()
            .map(|(s, a)| (model.state_name(s).to_string(), model.action_name(a).to_string()))
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("policy serializes");
    text.push('\n');
    text
}

pub fn policy_from_json(model: &Rmdp, text: &str) -> Result<MemorylessPolicy> {
    let file: PolicyFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    if file.schema != POLICY_SCHEMA {
        return Err(Error::Schema(format!("unsupported policy schema {:?}", file.schema)));
    }
    let mut policy = MemorylessPolicy::new();
    for (s, a) in &file.policy {
        let state = model.state_id(s).ok_or_else(|| Error::UnknownState(s.clone()))?;
        let action = model.action_id(a).ok_or_else(|| Error::InadmissibleAction {
            state: s.clone(),
            action: a.clone(),
        })?;
        policy.set(state, action);
    }
    Ok(policy)
}

pub fn save_policy(model: &Rmdp, policy: &MemorylessPolicy, path: &Path) -> Result<()> {
    write(path, &policy_to_json(model, policy))
}

pub fn load_policy(model: &Rmdp, path: &Path) -> Result<MemorylessPolicy> {
    policy_from_json(model, &read(path)?)
}

/// How explicit transition rows are wrapped into uncertainty sets.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitUncertainty {
    pub norm: Norm,
    pub radius: Rational,
    pub support_restricted: bool,
}

fn significant(line: &str) -> Option<&str> {
    let body = line.split('#').next().unwrap_or("").trim();
    (!body.is_empty()).then_some(body)
}

/// Parses explicit transition and label text. `tra_name` and `lab_name`
/// only appear in error messages.
pub fn parse_explicit(
    tra: &str,
    tra_name: &str,
    lab: Option<(&str, &str)>,
    uncertainty: &ExplicitUncertainty,
) -> Result<Rmdp> {
    let mut b = RmdpBuilder::new();
    let mut labels: BTreeMap<String, Vec<StateId>> = BTreeMap::new();
    if let Some((text, _)) = lab {
        for line in text.lines() {
            let Some(body) = significant(line) else { continue };
            let mut tokens = body.split_whitespace();
            let state = b.state(tokens.next().expect("non-empty line"));
            for label in tokens {
                labels.entry(label.to_string()).or_default().push(state);
            }
        }
    }

    struct Row {
        line: usize,
        src_name: String,
        targets: Vec<(StateId, Rational)>,
    }
    let mut rows: Vec<((StateId, String), Row)> = Vec::new();
    let mut row_index: HashMap<(StateId, String), usize> = HashMap::new();
    let mut first = true;
    for (i, line) in tra.lines().enumerate() {
        let line_no = i + 1;
        let Some(body) = significant(line) else { continue };
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if first {
            first = false;
            if tokens.len() == 3 && tokens.iter().all(|t| t.parse::<u64>().is_ok()) {
                continue;
            }
        }
        let parse_err = |message: String| Error::Parse {
            path: tra_name.to_string(),
            line: line_no,
            message,
        };
        if tokens.len() != 4 {
            return Err(parse_err(format!("expected `src action dst prob`, found {} fields", tokens.len())));
        }
        let prob = rational::parse(tokens[3]).map_err(|e| parse_err(e.to_string()))?;
        if !rational::is_probability(&prob) {
            return Err(parse_err(format!("probability {} outside [0, 1]", tokens[3])));
        }
        let src = b.state(tokens[0]);
        let dst = b.state(tokens[2]);
        let key = (src, tokens[1].to_string());
        let idx = *row_index.entry(key.clone()).or_insert_with(|| {
            rows.push((
                key,
                Row {
                    line: line_no,
                    src_name: tokens[0].to_string(),
                    targets: Vec::new(),
                },
            ));
            rows.len() - 1
        });
        let targets = &mut rows[idx].1.targets;
        match targets.iter_mut().find(|(t, _)| *t == dst) {
            Some((_, p)) => *p += prob,
            None => targets.push((dst, prob)),
        }
    }
    for ((src, action), row) in rows {
        let (succ, center): (Vec<StateId>, Vec<Rational>) =
            row.targets.into_iter().filter(|(_, p)| !p.is_zero()).unzip();
        let total: Rational = center.iter().sum();
        if total != Rational::one() {
            return Err(Error::Parse {
                path: tra_name.to_string(),
                line: row.line,
                message: format!(
                    "probabilities of ({}, {}) sum to {}, not 1",
                    row.src_name,
                    action,
                    rational::format(&total)
                ),
            });
        }
        let t = TransitionTemplate::new(succ, center);
        let entry = UncertaintyEntry::ball(t, uncertainty.norm, uncertainty.radius.clone(), uncertainty.support_restricted);
        b.action(src, &action, entry);
    }
    for (label, ids) in &labels {
        b.label(label, ids);
    }
    Ok(b.build())
}

pub fn ingest_explicit(tra: &Path, lab: Option<&Path>, uncertainty: &ExplicitUncertainty) -> Result<Rmdp> {
    let tra_text = read(tra)?;
    let lab_text = match lab {
        Some(p) => Some((read(p)?, p.display().to_string())),
        None => None,
    };
    parse_explicit(
        &tra_text,
        &tra.display().to_string(),
        lab_text.as_ref().map(|(t, n)| (t.as_str(), n.as_str())),
        uncertainty,
    )
}

/// Writes the centers of a model as explicit transition and label text.
/// Every state appears in the label text, which fixes the state order.
pub fn export_explicit(model: &Rmdp) -> (String, String) {
    let mut tra = String::new();
    for s in model.live().iter() {
        for c in model.choices(s) {
            for (t, p) in c.entry.successors().iter().zip(&c.entry.template.center) {
                let _ = writeln!(
                    tra,
                    "{} {} {} {}",
                    model.state_name(s),
                    model.action_name(c.action),
                    model.state_name(*t),
                    rational::format(p)
                );
            }
        }
    }
    let mut lab = String::new();
    for (i, name) in model.state_names().iter().enumerate() {
        let s = StateId(i);
        let mut line = name.clone();
        for (label, set) in model.labels() {
            if set.contains(s) {
                line.push(' ');
                line.push_str(label);
            }
        }
        lab.push_str(&line);
        lab.push('\n');
    }
    (tra, lab)
}

/// Assigns priorities from a name-to-value map; unnamed states get 0.
pub fn with_named_priorities(model: &Rmdp, values: &BTreeMap<String, u32>) -> Result<Rmdp> {
    let mut pr = vec![0; model.num_states()];
    for (name, v) in values {
        let s = model.state_id(name).ok_or_else(|| Error::UnknownState(name.clone()))?;
        pr[s.0] = *v;
    }
    Ok(model.with_priorities(PriorityFunction::new(pr)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::validate;
    use crate::oracle::Oracle;
    use crate::rational::from_ratio;

    fn running_uncertainty() -> ExplicitUncertainty {
        ExplicitUncertainty {
            norm: Norm::P(2),
            radius: from_ratio(1, 5),
            support_restricted: false,
        }
    }

    #[test]
    fn json_round_trip() {
        for m in [fixtures::running_example(), fixtures::running_example_parity()] {
            let text = to_json(&m);
            let back = from_json(&text).unwrap();
            assert_eq!(back, m);
            assert_eq!(to_json(&back), text);
        }
    }

    #[test]
    fn json_round_trip_of_sub_model_keeps_faces() {
        let m = fixtures::running_example();
        let mut o = Oracle::exact();
        let sub = crate::model::restrict_to(&m, &m.state_set(&["s1", "s2", "s5"]).unwrap(), &mut o).unwrap();
        assert_eq!(from_json(&to_json(&sub)).unwrap(), sub);
    }

    #[test]
    fn schema_errors() {
        let text = to_json(&fixtures::running_example());
        let missing = text.replacen("\"center\"", "\"centre\"", 1);
        assert!(matches!(from_json(&missing), Err(Error::Schema(_))));
        let tag = text.replacen("\"lball\"", "\"kl\"", 1);
        assert!(matches!(from_json(&tag), Err(Error::Schema(_))));
        let version = text.replacen("rmdpq-1", "rmdpq-0", 1);
        assert!(matches!(from_json(&version), Err(Error::Schema(_))));
    }

    #[test]
    fn explicit_round_trip() {
        let m = fixtures::running_example();
        let (tra, lab) = export_explicit(&m);
        let back = parse_explicit(&tra, "running.tra", Some((&lab, "running.lab")), &running_uncertainty()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn explicit_chain_with_header_and_comments() {
        let tra = "2 1 2\n# a comment\n0 go 1 1\n\n1 go 1 1.0\n";
        let m = parse_explicit(tra, "t.tra", None, &running_uncertainty()).unwrap();
        assert_eq!(m.num_states(), 2);
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn explicit_bad_sum_names_the_pair() {
        let tra = "0 a 1 0.5\n0 a 0 0.499\n1 a 1 1\n";
        let err = parse_explicit(tra, "t.tra", None, &running_uncertainty()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(0, a)") && msg.contains("t.tra:1"), "{msg}");
    }

    #[test]
    fn explicit_malformed_line_reports_number() {
        let tra = "0 a 1 1\n1 a\n";
        match parse_explicit(tra, "t.tra", None, &running_uncertainty()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn policy_round_trip() {
        let m = fixtures::running_example();
        let mut p = MemorylessPolicy::new();
        p.set(m.state_id("s1").unwrap(), m.action_id("b").unwrap());
        let text = policy_to_json(&m, &p);
        assert_eq!(policy_from_json(&m, &text).unwrap(), p);
    }
}
