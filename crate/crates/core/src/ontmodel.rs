//! Finite ontological models: epistemic state vectors over N ontic states
//! and response function vectors per (event, context).
//!
//! A context with two or more members is treated as the multi-outcome
//! measurement whose outcomes are "which member fired"; the stored
//! response vectors are the positive-outcome vectors of each member and
//! must sum to the all-ones vector pointwise. A single-member context
//! stores both outcomes of its member. Response functions are stored per
//! context even when they coincide across contexts: non-contextuality is
//! something this module discovers, not a storage constraint.

use crate::scenario::{Context, Event, MeasurementId, Scenario};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

pub type ResponseKey = (String, MeasurementId, usize); // (context, measurement, outcome)

#[derive(Debug, Clone)]
pub struct OntologicalModel {
    pub scenario: Scenario,
    pub num_ontic_states: usize,
    pub preparations: BTreeMap<String, Vec<f64>>,
    pub responses: BTreeMap<ResponseKey, Vec<f64>>,
    pub equivalence_classes: Vec<EquivalenceClass>,
}

/// Preparations asserted operationally equivalent.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EquivalenceClass {
    pub preparations: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("preparation {0} has vector length {1}, expected {2}")]
    PreparationLength(String, usize, usize),
    #[error("response ({1}, outcome {2}) in context {0} has length {3}, expected {4}")]
    ResponseLength(String, MeasurementId, usize, usize, usize),
    #[error("context {0} is missing the response for ({1}, outcome {2})")]
    MissingResponse(String, MeasurementId, usize),
    #[error("response stored for ({1}, outcome {2}) which is not an outcome event of context {0}")]
    UnexpectedResponse(String, MeasurementId, usize),
    #[error("unknown preparation {0}")]
    UnknownPreparation(String),
    #[error("unknown context {0}")]
    UnknownContext(String),
    #[error("measurement {0} in context {1} has arity {2}; expand to two-outcome form first")]
    UnsupportedArity(MeasurementId, String, usize),
    #[error("mixture weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("negative mixture weight {0}")]
    NegativeWeight(f64),
    #[error("equivalence class has fewer than two members")]
    DegenerateClass,
    #[error("invalid model json: {0}")]
    Parse(#[from] serde_json::Error),
}

/// One violated validity condition, tagged with the condition number of the
/// standard list (1: state nonnegativity, 2: state normalization,
/// 3: response nonnegativity, 4: response completeness per context).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum ConditionViolation {
    NegativeStateEntry {
        preparation: String,
        index: usize,
        value: f64,
    },
    StateSum {
        preparation: String,
        sum: f64,
    },
    NegativeResponseEntry {
        context: String,
        measurement: String,
        outcome: usize,
        index: usize,
        value: f64,
    },
    ResponseCompleteness {
        context: String,
        lambda: usize,
        sum: f64,
    },
}

impl ConditionViolation {
    pub fn condition(&self) -> u8 {
        match self {
            ConditionViolation::NegativeStateEntry { .. } => 1,
            ConditionViolation::StateSum { .. } => 2,
            ConditionViolation::NegativeResponseEntry { .. } => 3,
            ConditionViolation::ResponseCompleteness { .. } => 4,
        }
    }
}

impl fmt::Display for ConditionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionViolation::NegativeStateEntry {
                preparation,
                index,
                value,
            } => write!(
                f,
                "condition 1: preparation {preparation} has negative entry {value} at {index}"
            ),
            ConditionViolation::StateSum { preparation, sum } => {
                write!(f, "condition 2: preparation {preparation} sums to {sum}")
            }
            ConditionViolation::NegativeResponseEntry {
                context,
                measurement,
                outcome,
                index,
                value,
            } => {
                write!(f, "condition 3: response ({measurement},{outcome}) in {context} has negative entry {value} at {index}")
            }
            ConditionViolation::ResponseCompleteness {
                context,
                lambda,
                sum,
            } => write!(
                f,
                "condition 4: context {context} responses sum to {sum} at ontic state {lambda}"
            ),
        }
    }
}

/// Outcome events of a context: the positive outcome of each member when
/// there are two or more members, both outcomes of the member otherwise.
pub fn context_events(context: &Context) -> Vec<Event> {
    if context.members.len() >= 2 {
        context
            .members
            .iter()
            .map(|m| Event {
                measurement: m.clone(),
                outcome: 0,
            })
            .collect()
    } else {
        let m = &context.members[0];
        vec![
            Event {
                measurement: m.clone(),
                outcome: 0,
            },
            Event {
                measurement: m.clone(),
                outcome: 1,
            },
        ]
    }
}

impl OntologicalModel {
    /// Structural integrity first (dimension and coverage errors), then the
    /// four validity conditions, all of which are reported.
    pub fn validate(&self, eps_sum: f64) -> Result<Vec<ConditionViolation>, ModelError> {
        let n = self.num_ontic_states;
        for (p, mu) in &self.preparations {
            if mu.len() != n {
                return Err(ModelError::PreparationLength(p.clone(), mu.len(), n));
            }
        }
        for c in &self.scenario.contexts {
            for m in &c.members {
                let a = self.scenario.arity(m);
                if a != 2 {
                    return Err(ModelError::UnsupportedArity(m.clone(), c.id.clone(), a));
                }
            }
            for ev in context_events(c) {
                let key = (c.id.clone(), ev.measurement.clone(), ev.outcome);
                match self.responses.get(&key) {
                    None => {
                        return Err(ModelError::MissingResponse(
                            c.id.clone(),
                            ev.measurement,
                            ev.outcome,
                        ))
                    }
                    Some(xi) if xi.len() != n => {
                        return Err(ModelError::ResponseLength(
                            c.id.clone(),
                            ev.measurement,
                            ev.outcome,
                            xi.len(),
                            n,
                        ))
                    }
                    _ => {}
                }
            }
        }
        for (ctx, m, o) in self.responses.keys() {
            let context = self
                .scenario
                .context(ctx)
                .ok_or_else(|| ModelError::UnknownContext(ctx.clone()))?;
            let allowed = context_events(context);
            if !allowed
                .iter()
                .any(|e| &e.measurement == m && e.outcome == *o)
            {
                return Err(ModelError::UnexpectedResponse(ctx.clone(), m.clone(), *o));
            }
        }

        let mut out = Vec::new();
        for (p, mu) in &self.preparations {
            for (i, &v) in mu.iter().enumerate() {
                if v < -eps_sum {
                    out.push(ConditionViolation::NegativeStateEntry {
                        preparation: p.clone(),
                        index: i,
                        value: v,
                    });
                }
            }
            let sum: f64 = mu.iter().sum();
            if (sum - 1.0).abs() > eps_sum {
                out.push(ConditionViolation::StateSum {
                    preparation: p.clone(),
                    sum,
                });
            }
        }
        for ((ctx, m, o), xi) in &self.responses {
            for (i, &v) in xi.iter().enumerate() {
                if v < -eps_sum {
                    out.push(ConditionViolation::NegativeResponseEntry {
                        context: ctx.clone(),
                        measurement: m.0.clone(),
                        outcome: *o,
                        index: i,
                        value: v,
                    });
                }
            }
        }
        for c in &self.scenario.contexts {
            for lambda in 0..n {
                let sum: f64 = context_events(c)
                    .iter()
                    .map(|ev| {
                        self.responses[&(c.id.clone(), ev.measurement.clone(), ev.outcome)][lambda]
                    })
                    .sum();
                if (sum - 1.0).abs() > eps_sum {
                    out.push(ConditionViolation::ResponseCompleteness {
                        context: c.id.clone(),
                        lambda,
                        sum,
                    });
                }
            }
        }
        Ok(out)
    }

    /// The probability of `event` in `context` after `preparation`: the dot
    /// product of the epistemic vector with the response vector.
    pub fn predict(
        &self,
        preparation: &str,
        event: &Event,
        context: &str,
    ) -> Result<f64, ModelError> {
        let mu = self
            .preparations
            .get(preparation)
            .ok_or_else(|| ModelError::UnknownPreparation(preparation.to_owned()))?;
        let key = (context.to_owned(), event.measurement.clone(), event.outcome);
        let xi = self.responses.get(&key).ok_or_else(|| {
            ModelError::MissingResponse(
                context.to_owned(),
                event.measurement.clone(),
                event.outcome,
            )
        })?;
        Ok(crate::linalg::dot(mu, xi))
    }

    /// Shared measurements whose positive-outcome response vectors differ
    /// across two contexts by more than `tol` in some entry. An empty list
    /// means the model is measurement non-contextual at this tolerance.
    pub fn measurement_contextuality(&self, tol: f64) -> Vec<MeasurementContextualityFinding> {
        let mut out = Vec::new();
        for (m, ctxs) in self.scenario.shared_measurements() {
            for i in 0..ctxs.len() {
                for j in i + 1..ctxs.len() {
                    let a = &self.responses[&(ctxs[i].clone(), m.clone(), 0)];
                    let b = &self.responses[&(ctxs[j].clone(), m.clone(), 0)];
                    let dev = a
                        .iter()
                        .zip(b)
                        .map(|(x, y)| (x - y).abs())
                        .fold(0.0f64, f64::max);
                    if dev > tol {
                        out.push(MeasurementContextualityFinding {
                            measurement: m.clone(),
                            context_a: ctxs[i].clone(),
                            context_b: ctxs[j].clone(),
                            max_deviation: dev,
                        });
                    }
                }
            }
        }
        out
    }

    /// Declared-equivalent preparations whose epistemic vectors differ by
    /// more than `tol` in some entry.
    pub fn preparation_contextuality(
        &self,
        classes: &[EquivalenceClass],
        tol: f64,
    ) -> Result<Vec<PreparationContextualityFinding>, ModelError> {
        let mut out = Vec::new();
        for (ci, class) in classes.iter().enumerate() {
            if class.preparations.len() < 2 {
                return Err(ModelError::DegenerateClass);
            }
            for p in &class.preparations {
                if !self.preparations.contains_key(p) {
                    return Err(ModelError::UnknownPreparation(p.clone()));
                }
            }
            for i in 0..class.preparations.len() {
                for j in i + 1..class.preparations.len() {
                    let a = &self.preparations[&class.preparations[i]];
                    let b = &self.preparations[&class.preparations[j]];
                    let dev = a
                        .iter()
                        .zip(b)
                        .map(|(x, y)| (x - y).abs())
                        .fold(0.0f64, f64::max);
                    if dev > tol {
                        out.push(PreparationContextualityFinding {
                            class: ci,
                            preparation_a: class.preparations[i].clone(),
                            preparation_b: class.preparations[j].clone(),
                            max_deviation: dev,
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Gaps in the operational statistics: for every preparation and shared
    /// measurement, the difference of predicted positive-outcome
    /// probabilities between two containing contexts. Empty means the
    /// model's statistics are context-independent at this tolerance.
    pub fn gleason_gaps(&self, tol: f64) -> Vec<GleasonGap> {
        let mut out = Vec::new();
        for (m, ctxs) in self.scenario.shared_measurements() {
            for p in self.preparations.keys() {
                let ev = Event {
                    measurement: m.clone(),
                    outcome: 0,
                };
                for i in 0..ctxs.len() {
                    for j in i + 1..ctxs.len() {
                        let pa = self.predict(p, &ev, &ctxs[i]).expect("validated model");
                        let pb = self.predict(p, &ev, &ctxs[j]).expect("validated model");
                        if (pa - pb).abs() > tol {
                            out.push(GleasonGap {
                                preparation: p.clone(),
                                measurement: m.clone(),
                                context_a: ctxs[i].clone(),
                                context_b: ctxs[j].clone(),
                                gap: pa - pb,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Convex mixture of stored preparations; the result satisfies the
    /// state conditions whenever the inputs do.
    pub fn convex_mixture(&self, parts: &[(String, f64)]) -> Result<Vec<f64>, ModelError> {
        let total: f64 = parts.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > crate::EPS_SUM {
            return Err(ModelError::WeightSum(total));
        }
        let mut out = vec![0.0; self.num_ontic_states];
        for (p, w) in parts {
            if *w < 0.0 {
                return Err(ModelError::NegativeWeight(*w));
            }
            let mu = self
                .preparations
                .get(p)
                .ok_or_else(|| ModelError::UnknownPreparation(p.clone()))?;
            for (o, x) in out.iter_mut().zip(mu) {
                *o += w * x;
            }
        }
        Ok(out)
    }

    /// Convenience helper: group preparations whose predictions agree on
    /// every stored response within `tol`. Classes of size one are dropped.
    pub fn infer_equivalence_classes(&self, tol: f64) -> Vec<EquivalenceClass> {
        let preps: Vec<&String> = self.preparations.keys().collect();
        let keys: Vec<&ResponseKey> = self.responses.keys().collect();
        let agree = |a: &str, b: &str| {
            keys.iter().all(|(ctx, m, o)| {
                let ev = Event {
                    measurement: m.clone(),
                    outcome: *o,
                };
                let pa = self.predict(a, &ev, ctx).unwrap();
                let pb = self.predict(b, &ev, ctx).unwrap();
                (pa - pb).abs() <= tol
            })
        };
        let mut assigned = vec![false; preps.len()];
        let mut classes = Vec::new();
        for i in 0..preps.len() {
            if assigned[i] {
                continue;
            }
            let mut class = vec![preps[i].clone()];
            assigned[i] = true;
            for j in i + 1..preps.len() {
                if !assigned[j] && agree(preps[i], preps[j]) {
                    class.push(preps[j].clone());
                    assigned[j] = true;
                }
            }
            if class.len() >= 2 {
                classes.push(EquivalenceClass {
                    preparations: class,
                });
            }
        }
        classes
    }

    /// The empirical model `preparation` induces: for every context, the
    /// joint table over that context's outcome events. For a multi-member
    /// context, event k maps to the outcome tuple with 0 (fired) at member
    /// k and 1 everywhere else.
    pub fn induced_empirical(
        &self,
        preparation: &str,
    ) -> Result<crate::empirical::EmpiricalModel, ModelError> {
        if !self.preparations.contains_key(preparation) {
            return Err(ModelError::UnknownPreparation(preparation.to_owned()));
        }
        let mut tables = BTreeMap::new();
        for c in &self.scenario.contexts {
            let arities: Vec<usize> = c.members.iter().map(|m| self.scenario.arity(m)).collect();
            let size: usize = arities.iter().product();
            let mut dist = vec![crate::Rat::from_integer(0.into()); size];
            if c.members.len() >= 2 {
                for (k, ev) in context_events(c).iter().enumerate() {
                    let mut tuple = vec![1usize; c.members.len()];
                    tuple[k] = 0;
                    let idx = crate::empirical::tuple_index(&tuple, &arities);
                    dist[idx] = crate::rat_from_f64(self.predict(preparation, ev, &c.id)?);
                }
            } else {
                for ev in context_events(c) {
                    dist[ev.outcome] =
                        crate::rat_from_f64(self.predict(preparation, &ev, &c.id)?);
                }
            }
            tables.insert(c.id.clone(), dist);
        }
        Ok(crate::empirical::EmpiricalModel {
            scenario: self.scenario.clone(),
            tables,
        })
    }

    /// Prediction table for every (preparation, context, event), as CSV with
    /// columns preparation,context,measurement,outcome,probability.
    pub fn prediction_csv(&self) -> String {
        let mut out = String::from("preparation,context,measurement,outcome,probability\n");
        for p in self.preparations.keys() {
            for c in &self.scenario.contexts {
                for ev in context_events(c) {
                    let prob = self.predict(p, &ev, &c.id).expect("validated model");
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        csv_field(p),
                        csv_field(&c.id),
                        csv_field(ev.measurement.as_str()),
                        ev.outcome,
                        prob
                    ));
                }
            }
        }
        out
    }

    pub fn from_json(s: &str) -> Result<Self, ModelError> {
        let file: ModelFile = serde_json::from_str(s)?;
        Ok(file.into())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelFile::from(self)).expect("model serializes")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasurementContextualityFinding {
    pub measurement: MeasurementId,
    pub context_a: String,
    pub context_b: String,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PreparationContextualityFinding {
    pub class: usize,
    pub preparation_a: String,
    pub preparation_b: String,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GleasonGap {
    pub preparation: String,
    pub measurement: MeasurementId,
    pub context_a: String,
    pub context_b: String,
    pub gap: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    scenario: Scenario,
    num_ontic_states: usize,
    preparations: BTreeMap<String, Vec<f64>>,
    responses: Vec<ResponseFile>,
    #[serde(default)]
    equivalence_classes: Vec<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ResponseFile {
    measurement: String,
    context: String,
    outcome: usize,
    xi: Vec<f64>,
}

impl From<ModelFile> for OntologicalModel {
    fn from(f: ModelFile) -> Self {
        let responses = f
            .responses
            .into_iter()
            .map(|r| ((r.context, MeasurementId(r.measurement), r.outcome), r.xi))
            .collect();
        OntologicalModel {
            scenario: f.scenario,
            num_ontic_states: f.num_ontic_states,
            preparations: f.preparations,
            responses,
            equivalence_classes: f
                .equivalence_classes
                .into_iter()
                .map(|preparations| EquivalenceClass { preparations })
                .collect(),
        }
    }
}

impl From<&OntologicalModel> for ModelFile {
    fn from(m: &OntologicalModel) -> Self {
        ModelFile {
            scenario: m.scenario.clone(),
            num_ontic_states: m.num_ontic_states,
            preparations: m.preparations.clone(),
            responses: m
                .responses
                .iter()
                .map(|((ctx, meas, o), xi)| ResponseFile {
                    measurement: meas.0.clone(),
                    context: ctx.clone(),
                    outcome: *o,
                    xi: xi.clone(),
                })
                .collect(),
            equivalence_classes: m
                .equivalence_classes
                .iter()
                .map(|c| c.preparations.clone())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Context;

    /// Two ontic states, one two-member context; responses (1,0)/(0,1).
    fn tiny_model() -> OntologicalModel {
        let scenario = Scenario::new(
            vec!["A".into(), "B".into()],
            vec![Context::new("c", &["A", "B"], true)],
        );
        let mut preparations = BTreeMap::new();
        preparations.insert("P".to_owned(), vec![0.5, 0.5]);
        let mut responses = BTreeMap::new();
        responses.insert(("c".to_owned(), "A".into(), 0), vec![1.0, 0.0]);
        responses.insert(("c".to_owned(), "B".into(), 0), vec![0.0, 1.0]);
        OntologicalModel {
            scenario,
            num_ontic_states: 2,
            preparations,
            responses,
            equivalence_classes: vec![],
        }
    }

    #[test]
    fn valid_model_passes() {
        assert!(tiny_model().validate(1e-9).unwrap().is_empty());
    }

    #[test]
    fn condition_two_violation() {
        let mut m = tiny_model();
        m.preparations.insert("Q".to_owned(), vec![0.7, 0.4]);
        let v = m.validate(1e-9).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].condition(), 2);
    }

    #[test]
    fn condition_three_violation_isolated() {
        let mut m = tiny_model();
        // keep completeness intact so only condition 3 fires
        m.responses
            .insert(("c".to_owned(), "A".into(), 0), vec![1.1, -0.1]);
        m.responses
            .insert(("c".to_owned(), "B".into(), 0), vec![-0.1, 1.1]);
        let v = m.validate(1e-9).unwrap();
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|x| x.condition() == 3));
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let mut m = tiny_model();
        m.preparations.insert("bad".to_owned(), vec![1.0]);
        assert!(matches!(
            m.validate(1e-9),
            Err(ModelError::PreparationLength(..))
        ));
    }

    #[test]
    fn predict_point_and_uniform() {
        let mut m = tiny_model();
        m.preparations.insert("point".to_owned(), vec![1.0, 0.0]);
        let a = Event::positive("A");
        assert_eq!(m.predict("point", &a, "c").unwrap(), 1.0);
        assert_eq!(m.predict("P", &a, "c").unwrap(), 0.5);
        assert!(m.predict("P", &Event::positive("Z"), "c").is_err());
    }

    #[test]
    fn predictions_sum_to_one_per_context() {
        let m = tiny_model();
        let total: f64 = context_events(&m.scenario.contexts[0])
            .iter()
            .map(|ev| m.predict("P", ev, "c").unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    /// Shared measurement with different responses in the two contexts.
    fn contextual_model() -> OntologicalModel {
        let scenario = Scenario::new(
            vec!["A".into(), "B".into(), "C".into()],
            vec![
                Context::new("c1", &["A", "B"], true),
                Context::new("c2", &["A", "C"], true),
            ],
        );
        let mut preparations = BTreeMap::new();
        preparations.insert("P".to_owned(), vec![0.5, 0.5]);
        let mut responses = BTreeMap::new();
        responses.insert(("c1".to_owned(), "A".into(), 0), vec![1.0, 0.0]);
        responses.insert(("c1".to_owned(), "B".into(), 0), vec![0.0, 1.0]);
        responses.insert(("c2".to_owned(), "A".into(), 0), vec![0.0, 1.0]);
        responses.insert(("c2".to_owned(), "C".into(), 0), vec![1.0, 0.0]);
        OntologicalModel {
            scenario,
            num_ontic_states: 2,
            preparations,
            responses,
            equivalence_classes: vec![],
        }
    }

    #[test]
    fn measurement_contextuality_detected_with_full_deviation() {
        let m = contextual_model();
        let findings = m.measurement_contextuality(1e-9);
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].max_deviation, 1.0);
        // identical responses -> empty
        let mut same = m.clone();
        same.responses
            .insert(("c2".to_owned(), "A".into(), 0), vec![1.0, 0.0]);
        same.responses
            .insert(("c2".to_owned(), "C".into(), 0), vec![0.0, 1.0]);
        assert!(same.measurement_contextuality(1e-9).is_empty());
        // perturbation below tolerance -> empty
        let mut nudged = same.clone();
        nudged
            .responses
            .insert(("c2".to_owned(), "A".into(), 0), vec![1.0 - 1e-12, 1e-12]);
        assert!(nudged.measurement_contextuality(1e-9).is_empty());
    }

    #[test]
    fn gleason_gap_detected_and_uniform_prior_hides_it() {
        let m = contextual_model();
        // P is uniform, so both contexts predict 1/2: the statistics hide
        // the response difference and the gap list stays empty.
        assert!(m.gleason_gaps(1e-9).is_empty());
        let mut skewed = m.clone();
        skewed.preparations.insert("P".to_owned(), vec![0.9, 0.1]);
        let gaps = skewed.gleason_gaps(1e-9);
        assert_eq!(gaps.len(), 1);
        assert!((gaps[0].gap.abs() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn single_context_scenario_has_no_gaps() {
        assert!(tiny_model().gleason_gaps(1e-9).is_empty());
    }

    #[test]
    fn identical_responses_force_empty_gleason_report() {
        let mut m = contextual_model();
        m.responses
            .insert(("c2".to_owned(), "A".into(), 0), vec![1.0, 0.0]);
        m.responses
            .insert(("c2".to_owned(), "C".into(), 0), vec![0.0, 1.0]);
        m.preparations.insert("skew".to_owned(), vec![0.3, 0.7]);
        assert!(m.measurement_contextuality(1e-9).is_empty());
        assert!(m.gleason_gaps(1e-9).is_empty());
    }

    #[test]
    fn preparation_contextuality_basic() {
        let mut m = tiny_model();
        m.preparations.insert("Q".to_owned(), vec![1.0, 0.0]);
        m.preparations.insert("R".to_owned(), vec![0.0, 1.0]);
        let class = EquivalenceClass {
            preparations: vec!["Q".into(), "R".into()],
        };
        let f = m.preparation_contextuality(&[class], 1e-9).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].max_deviation, 1.0);
        let same = EquivalenceClass {
            preparations: vec!["P".into(), "P".into()],
        };
        assert!(m
            .preparation_contextuality(&[same], 1e-9)
            .unwrap()
            .is_empty());
        let unknown = EquivalenceClass {
            preparations: vec!["P".into(), "missing".into()],
        };
        assert!(m.preparation_contextuality(&[unknown], 1e-9).is_err());
    }

    #[test]
    fn mixtures_compose_linearly() {
        let mut m = tiny_model();
        m.preparations.insert("e0".to_owned(), vec![1.0, 0.0]);
        m.preparations.insert("e1".to_owned(), vec![0.0, 1.0]);
        let mix = m
            .convex_mixture(&[("e0".into(), 0.5), ("e1".into(), 0.5)])
            .unwrap();
        assert_eq!(mix, vec![0.5, 0.5]);
        let id = m
            .convex_mixture(&[("e0".into(), 1.0), ("e1".into(), 0.0)])
            .unwrap();
        assert_eq!(id, vec![1.0, 0.0]);
        assert!(m.convex_mixture(&[("e0".into(), 0.6)]).is_err());

        // bilinearity of predict against the mixture
        m.preparations.insert("mix".to_owned(), mix);
        let ev = Event::positive("A");
        let direct = m.predict("mix", &ev, "c").unwrap();
        let weighted =
            0.5 * m.predict("e0", &ev, "c").unwrap() + 0.5 * m.predict("e1", &ev, "c").unwrap();
        assert!((direct - weighted).abs() < 1e-12);
    }

    #[test]
    fn inferred_classes_group_by_statistics() {
        let mut m = tiny_model();
        m.preparations.insert("P2".to_owned(), vec![0.5, 0.5]);
        m.preparations.insert("lone".to_owned(), vec![0.9, 0.1]);
        let classes = m.infer_equivalence_classes(1e-9);
        assert_eq!(classes.len(), 1);
        assert_eq!(
            classes[0].preparations,
            vec!["P".to_string(), "P2".to_string()]
        );
    }

    #[test]
    fn csv_export_shape() {
        let csv = tiny_model().prediction_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "preparation,context,measurement,outcome,probability"
        );
        assert_eq!(lines.len(), 3); // header + two events
        assert!(lines[1].starts_with("P,c,A,0,"));
    }

    #[test]
    fn json_round_trip() {
        let m = contextual_model();
        let j = m.to_json();
        assert!(j.contains("\"num_ontic_states\""));
        assert!(j.contains("\"xi\""));
        let m2 = OntologicalModel::from_json(&j).unwrap();
        assert!(m2.validate(1e-9).unwrap().is_empty());
        assert_eq!(m2.measurement_contextuality(1e-9).len(), 1);
    }
}
