//! Contextuality scenarios: measurements, contexts (hyperedges of jointly
//! performable measurements), and the derived exclusivity structure.
//!
//! Compatibility is declared input: the file format records which
//! measurements form a context, it does not attempt to decide physical
//! compatibility or maximality (the `maximal` flag is metadata supplied by
//! whoever wrote the scenario down).

use crate::graphinv::ExclusivityGraph;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Identifier of a two-outcome measurement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeasurementId(pub String);

impl MeasurementId {
    pub fn new(s: impl Into<String>) -> Self {
        MeasurementId(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for MeasurementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for MeasurementId {
    fn from(s: &str) -> Self {
        MeasurementId(s.to_owned())
    }
}

/// A set of measurements that can be performed together.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Context {
    pub id: String,
    pub members: Vec<MeasurementId>,
    #[serde(rename = "maximal", default)]
    pub declared_maximal: bool,
}

impl Context {
    pub fn new(id: impl Into<String>, members: &[&str], maximal: bool) -> Self {
        Context {
            id: id.into(),
            members: members.iter().map(|m| MeasurementId::from(*m)).collect(),
            declared_maximal: maximal,
        }
    }
}

/// An outcome event of a single measurement. Outcome index 0 is the
/// positive outcome; it doubles as the event's identity when the
/// measurement becomes a vertex of the exclusivity graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub measurement: MeasurementId,
    pub outcome: usize,
}

impl Event {
    pub fn positive(m: impl Into<String>) -> Self {
        Event {
            measurement: MeasurementId(m.into()),
            outcome: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub measurements: Vec<MeasurementId>,
    pub contexts: Vec<Context>,
    #[serde(rename = "arity", default, skip_serializing_if = "BTreeMap::is_empty")]
    pub outcome_arity: BTreeMap<MeasurementId, usize>,
}

/// A single scenario-invariant violation. Violations are data, not errors:
/// validation always runs to completion and reports all of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum ScenarioViolation {
    NoContexts,
    DuplicateMeasurement {
        measurement: String,
    },
    DuplicateContextId {
        context: String,
    },
    EmptyContext {
        context: String,
    },
    DuplicateMember {
        context: String,
        member: String,
    },
    UnknownMember {
        context: String,
        member: String,
    },
    /// A context declared maximal is strictly contained in another context.
    MaximalSubset {
        context: String,
        superset: String,
    },
    BadArity {
        measurement: String,
    },
}

impl fmt::Display for ScenarioViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ScenarioViolation::*;
        match self {
            NoContexts => write!(f, "scenario declares no contexts"),
            DuplicateMeasurement { measurement } => {
                write!(f, "measurement {measurement} declared more than once")
            }
            DuplicateContextId { context } => write!(f, "context id {context} reused"),
            EmptyContext { context } => write!(f, "context {context} has no members"),
            DuplicateMember { context, member } => {
                write!(f, "context {context} lists member {member} twice")
            }
            UnknownMember { context, member } => {
                write!(f, "context {context} references unknown member {member}")
            }
            MaximalSubset { context, superset } => write!(
                f,
                "context {context} is declared maximal but is a strict subset of {superset}"
            ),
            BadArity { measurement } => {
                write!(
                    f,
                    "measurement {measurement} has non-positive outcome arity"
                )
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("measurement {0} has unsupported arity {1}; expand to two-outcome form first")]
    UnsupportedArity(String, usize),
    #[error("invalid scenario json: {0}")]
    Parse(#[from] serde_json::Error),
}

impl Scenario {
    pub fn new(measurements: Vec<MeasurementId>, contexts: Vec<Context>) -> Self {
        Scenario {
            measurements,
            contexts,
            outcome_arity: BTreeMap::new(),
        }
    }

    pub fn arity(&self, m: &MeasurementId) -> usize {
        self.outcome_arity.get(m).copied().unwrap_or(2)
    }

    pub fn context(&self, id: &str) -> Option<&Context> {
        self.contexts.iter().find(|c| c.id == id)
    }

    pub fn from_json(s: &str) -> Result<Self, ScenarioError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Check every scenario invariant, returning all violations found.
    pub fn validate(&self) -> Vec<ScenarioViolation> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for m in &self.measurements {
            if !seen.insert(m) {
                out.push(ScenarioViolation::DuplicateMeasurement {
                    measurement: m.0.clone(),
                });
            }
        }
        if self.contexts.is_empty() {
            out.push(ScenarioViolation::NoContexts);
        }
        let mut ids = BTreeSet::new();
        for c in &self.contexts {
            if !ids.insert(&c.id) {
                out.push(ScenarioViolation::DuplicateContextId {
                    context: c.id.clone(),
                });
            }
            if c.members.is_empty() {
                out.push(ScenarioViolation::EmptyContext {
                    context: c.id.clone(),
                });
            }
            let mut mem = BTreeSet::new();
            for m in &c.members {
                if !mem.insert(m) {
                    out.push(ScenarioViolation::DuplicateMember {
                        context: c.id.clone(),
                        member: m.0.clone(),
                    });
                }
                if !seen.contains(m) {
                    out.push(ScenarioViolation::UnknownMember {
                        context: c.id.clone(),
                        member: m.0.clone(),
                    });
                }
            }
        }
        for c in &self.contexts {
            if !c.declared_maximal {
                continue;
            }
            let cset: BTreeSet<_> = c.members.iter().collect();
            for other in &self.contexts {
                if other.id == c.id {
                    continue;
                }
                let oset: BTreeSet<_> = other.members.iter().collect();
                if cset.is_subset(&oset) && cset.len() < oset.len() {
                    out.push(ScenarioViolation::MaximalSubset {
                        context: c.id.clone(),
                        superset: other.id.clone(),
                    });
                }
            }
        }
        for (m, a) in &self.outcome_arity {
            if *a == 0 {
                out.push(ScenarioViolation::BadArity {
                    measurement: m.0.clone(),
                });
            }
        }
        out
    }

    /// Measurements occurring in two or more contexts, with the ids of the
    /// contexts containing them (declaration order).
    pub fn shared_measurements(&self) -> BTreeMap<MeasurementId, Vec<String>> {
        let mut by_meas: BTreeMap<MeasurementId, Vec<String>> = BTreeMap::new();
        for c in &self.contexts {
            for m in &c.members {
                by_meas.entry(m.clone()).or_default().push(c.id.clone());
            }
        }
        by_meas.retain(|_, ctxs| ctxs.len() >= 2);
        by_meas
    }

    /// Build the exclusivity graph: one vertex per measurement (its positive
    /// outcome), one hyperedge per context, pairwise adjacency from
    /// co-membership. Vertex order follows the declaration order, so the
    /// construction is deterministic.
    pub fn exclusivity_graph(&self) -> Result<ExclusivityGraph, ScenarioError> {
        for m in &self.measurements {
            let a = self.arity(m);
            if a > 2 {
                return Err(ScenarioError::UnsupportedArity(m.0.clone(), a));
            }
        }
        let index: BTreeMap<&MeasurementId, usize> = self
            .measurements
            .iter()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect();
        let hyperedges: Vec<Vec<usize>> = self
            .contexts
            .iter()
            .map(|c| c.members.iter().map(|m| index[m]).collect())
            .collect();
        let maximal = !self.contexts.is_empty() && self.contexts.iter().all(|c| c.declared_maximal);
        Ok(ExclusivityGraph::new(
            self.measurements.iter().map(|m| m.0.clone()).collect(),
            vec![1.0; self.measurements.len()],
            hyperedges,
            maximal,
        ))
    }

    /// Expand every measurement of arity k > 2 into k two-outcome
    /// measurements (`m=0`, ..., `m=k-1`), substituting the group for the
    /// original wherever it appears. This is the explicit ingestion step;
    /// nothing else in the crate performs the expansion implicitly.
    pub fn expand_multi_outcome(&self) -> Scenario {
        let mut measurements = Vec::new();
        let mut replacement: BTreeMap<MeasurementId, Vec<MeasurementId>> = BTreeMap::new();
        for m in &self.measurements {
            let a = self.arity(m);
            if a > 2 {
                let group: Vec<MeasurementId> = (0..a)
                    .map(|k| MeasurementId(format!("{}={}", m.0, k)))
                    .collect();
                measurements.extend(group.iter().cloned());
                replacement.insert(m.clone(), group);
            } else {
                measurements.push(m.clone());
            }
        }
        let contexts = self
            .contexts
            .iter()
            .map(|c| {
                let mut members = Vec::new();
                for m in &c.members {
                    match replacement.get(m) {
                        Some(group) => members.extend(group.iter().cloned()),
                        None => members.push(m.clone()),
                    }
                }
                Context {
                    id: c.id.clone(),
                    members,
                    declared_maximal: c.declared_maximal,
                }
            })
            .collect();
        Scenario {
            measurements,
            contexts,
            outcome_arity: BTreeMap::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Scenario {
        Scenario::new(
            vec!["A".into(), "B".into(), "C".into()],
            vec![Context::new("c1", &["A", "B", "C"], true)],
        )
    }

    #[test]
    fn single_context_is_valid() {
        assert!(abc().validate().is_empty());
    }

    #[test]
    fn unknown_member_reported() {
        let mut s = abc();
        s.contexts.push(Context::new("c2", &["A", "D"], false));
        let v = s.validate();
        assert_eq!(
            v,
            vec![ScenarioViolation::UnknownMember {
                context: "c2".into(),
                member: "D".into()
            }]
        );
    }

    #[test]
    fn maximal_subset_reported() {
        let s = Scenario::new(
            vec!["A".into(), "B".into(), "C".into()],
            vec![
                Context::new("big", &["A", "B", "C"], true),
                Context::new("small", &["A", "B"], true),
            ],
        );
        let v = s.validate();
        assert_eq!(
            v,
            vec![ScenarioViolation::MaximalSubset {
                context: "small".into(),
                superset: "big".into()
            }]
        );
    }

    #[test]
    fn shared_measurements_two_contexts() {
        let s = Scenario::new(
            vec!["A".into(), "B".into(), "C".into(), "D".into(), "E".into()],
            vec![
                Context::new("c1", &["A", "B", "C"], true),
                Context::new("c2", &["A", "D", "E"], true),
            ],
        );
        let shared = s.shared_measurements();
        assert_eq!(shared.len(), 1);
        assert_eq!(
            shared[&MeasurementId::from("A")],
            vec!["c1".to_string(), "c2".to_string()]
        );
    }

    #[test]
    fn shared_measurements_triangle_of_pairs() {
        let s = Scenario::new(
            vec!["A".into(), "B".into(), "C".into()],
            vec![
                Context::new("c1", &["A", "B"], false),
                Context::new("c2", &["B", "C"], false),
                Context::new("c3", &["C", "A"], false),
            ],
        );
        assert_eq!(s.shared_measurements().len(), 3);
    }

    #[test]
    fn one_context_has_no_shared_measurements() {
        assert!(abc().shared_measurements().is_empty());
    }

    #[test]
    fn five_cycle_graph() {
        let names = ["m1", "m2", "m3", "m4", "m5"];
        let contexts: Vec<Context> = (0..5)
            .map(|i| Context::new(format!("e{i}"), &[names[i], names[(i + 1) % 5]], true))
            .collect();
        let s = Scenario::new(names.iter().map(|n| (*n).into()).collect(), contexts);
        let g = s.exclusivity_graph().unwrap();
        assert_eq!(g.num_vertices(), 5);
        assert_eq!(g.num_edges(), 5);
        for i in 0..5 {
            assert!(g.adjacent(i, (i + 1) % 5));
            assert!(!g.adjacent(i, (i + 2) % 5));
        }
        // rebuilding gives an identical graph
        let g2 = s.exclusivity_graph().unwrap();
        assert_eq!(g.vertex_ids(), g2.vertex_ids());
        assert_eq!(g.hyperedges(), g2.hyperedges());
    }

    #[test]
    fn triangle_and_disjoint_contexts() {
        let g = abc().exclusivity_graph().unwrap();
        assert_eq!(g.num_edges(), 3);
        assert_eq!(g.hyperedges().len(), 1);

        let s = Scenario::new(
            vec!["A".into(), "B".into(), "C".into(), "D".into()],
            vec![
                Context::new("c1", &["A", "B"], false),
                Context::new("c2", &["C", "D"], false),
            ],
        );
        let g = s.exclusivity_graph().unwrap();
        assert_eq!(g.num_edges(), 2);
        assert!(!g.adjacent(0, 2));
    }

    #[test]
    fn arity_three_rejected_until_expanded() {
        let mut s = abc();
        s.outcome_arity.insert("A".into(), 3);
        assert!(matches!(
            s.exclusivity_graph(),
            Err(ScenarioError::UnsupportedArity(_, 3))
        ));
        let e = s.expand_multi_outcome();
        assert!(e.validate().is_empty());
        assert_eq!(e.measurements.len(), 5); // A=0,A=1,A=2,B,C
        assert!(e.exclusivity_graph().is_ok());
        assert_eq!(e.contexts[0].members.len(), 5);
    }

    #[test]
    fn json_round_trip_is_bit_exact_on_fields() {
        let s = abc();
        let j = s.to_json();
        assert!(j.contains("\"measurements\""));
        assert!(j.contains("\"contexts\""));
        assert!(j.contains("\"maximal\""));
        let s2 = Scenario::from_json(&j).unwrap();
        assert!(s2.validate().is_empty());
        assert_eq!(s2.measurements, s.measurements);
    }
}
