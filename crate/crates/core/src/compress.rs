//! Compression of a measurement-contextual model with context-independent
//! statistics onto the subspace its allowed states live in.
//!
//! Every contextual response pair (xi_1, xi_2) of a shared measurement
//! constrains admissible epistemic vectors to the null space of
//! xi_1 - xi_2; intersecting all of those null spaces gives a subspace on
//! which the projected responses coincide, producing a quasi-model with one
//! response vector per event and fewer quasi-states. The basis is
//! Euclidean-orthonormal, and the unit-entry-sum normalization is split
//! into dual factors: s_i on states and 1/s_i on responses. That keeps all
//! three structure lemmas exact (state sums 1, per-context response
//! completeness, prediction preservation) while letting entries go
//! negative, which is the phenomenon being demonstrated.

use crate::linalg::{axpy, dot, norm, orthonormal_complement};
use crate::ontmodel::{context_events, OntologicalModel};
use crate::scenario::{MeasurementId, Scenario};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

const RANK_TOL: f64 = 1e-10;
const DELTA_PIVOT: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum CompressError {
    #[error(
        "model statistics are context-dependent: preparation {preparation}, measurement \
         {measurement}, contexts {context_a}/{context_b} differ by {gap}"
    )]
    StatisticsContextDependent {
        preparation: String,
        measurement: MeasurementId,
        context_a: String,
        context_b: String,
        gap: f64,
    },
    #[error("projected responses for ({0}, outcome {1}) disagree across contexts by {2}")]
    ProjectionMismatch(MeasurementId, usize, f64),
    #[error(
        "degenerate basis: the all-ones vector is orthogonal to the admissible subspace \
         (every basis entry sum vanishes), so no probability vector lives in it; \
         the input model cannot be a valid ontological model"
    )]
    DegenerateBasis,
    #[error(transparent)]
    Model(#[from] crate::ontmodel::ModelError),
}

/// Euclidean-orthonormal basis of the admissible subspace, with the entry
/// sums used by the dual scaling.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    pub ambient: usize,
    pub vectors: Vec<Vec<f64>>,
    pub entry_sums: Vec<f64>,
}

impl SubspaceBasis {
    pub fn dimension(&self) -> usize {
        self.vectors.len()
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient];
        for g in &self.vectors {
            let c = dot(g, v);
            for (o, gi) in out.iter_mut().zip(g) {
                *o += c * gi;
            }
        }
        out
    }

    /// Invariant check: orthonormality within 1e-10 and nonvanishing sums.
    pub fn check_invariants(&self) -> bool {
        for (i, a) in self.vectors.iter().enumerate() {
            if (dot(a, a) - 1.0).abs() > 1e-10 {
                return false;
            }
            for b in &self.vectors[i + 1..] {
                if dot(a, b).abs() > 1e-10 {
                    return false;
                }
            }
        }
        self.entry_sums.iter().all(|s| s.abs() > DELTA_PIVOT)
    }
}

/// Compressed model: quasi epistemic vectors and one context-free quasi
/// response vector per outcome event. Entries may be negative.
#[derive(Debug, Clone)]
pub struct QuasiModel {
    pub scenario: Scenario,
    pub num_quasi_states: usize,
    pub basis: SubspaceBasis,
    pub preparations: BTreeMap<String, Vec<f64>>,
    pub responses: BTreeMap<(MeasurementId, usize), Vec<f64>>,
    pub negativity: Vec<NegativityEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NegativityEntry {
    pub vector: String,
    pub index: usize,
    pub value: f64,
}

/// Difference vectors of contextual response pairs, in declaration order.
fn contextual_differences(model: &OntologicalModel, tol: f64) -> Vec<Vec<f64>> {
    let shared = model.scenario.shared_measurements();
    let mut diffs = Vec::new();
    for m in &model.scenario.measurements {
        let Some(ctxs) = shared.get(m) else { continue };
        let anchor = &model.responses[&(ctxs[0].clone(), m.clone(), 0)];
        for ctx in &ctxs[1..] {
            let other = &model.responses[&(ctx.clone(), m.clone(), 0)];
            let mut d: Vec<f64> = anchor.iter().zip(other).map(|(a, b)| a - b).collect();
            let gap = d.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
            if gap > tol {
                diffs.push(std::mem::take(&mut d));
            }
        }
    }
    diffs
}

/// Basis of the admissible subspace: the common null space of every
/// contextual difference vector. Requires the model's statistics to be
/// context-independent at tolerance `tol` (otherwise no admissible
/// subspace can reproduce them) and returns the eliminated difference
/// directions alongside the basis.
pub fn gleason_subspace(
    model: &OntologicalModel,
    tol: f64,
) -> Result<(SubspaceBasis, Vec<Vec<f64>>), CompressError> {
    if let Some(g) = model.gleason_gaps(tol).into_iter().next() {
        return Err(CompressError::StatisticsContextDependent {
            preparation: g.preparation,
            measurement: g.measurement,
            context_a: g.context_a,
            context_b: g.context_b,
            gap: g.gap.abs(),
        });
    }
    let n = model.num_ontic_states;
    let raw = contextual_differences(model, tol);
    let mut span: Vec<Vec<f64>> = Vec::new();
    let mut eliminated = Vec::new();
    for d in raw {
        let scale = norm(&d).max(1.0);
        let mut r = d.clone();
        for b in &span {
            let c = dot(&r, b);
            axpy(&mut r, c, b);
        }
        let nr = norm(&r);
        if nr > RANK_TOL * scale {
            for x in r.iter_mut() {
                *x /= nr;
            }
            span.push(r);
            eliminated.push(d);
        }
    }
    let vectors = orthonormal_complement(&span, n, RANK_TOL);
    let mut basis = SubspaceBasis {
        ambient: n,
        entry_sums: vectors.iter().map(|g| g.iter().sum()).collect(),
        vectors,
    };
    fix_vanishing_sums(&mut basis)?;
    Ok((basis, eliminated))
}

/// Rotate basis pairs so every entry sum clears the pivot threshold. A
/// vector with vanishing sum is mixed at 45 degrees with a partner whose
/// sum is large; if no partner exists the all-ones vector is orthogonal to
/// the whole subspace and compression cannot represent any probability
/// vector.
fn fix_vanishing_sums(basis: &mut SubspaceBasis) -> Result<(), CompressError> {
    let k = basis.vectors.len();
    for i in 0..k {
        if basis.entry_sums[i].abs() > DELTA_PIVOT {
            continue;
        }
        let partner = (0..k)
            .filter(|&j| j != i)
            .max_by(|&a, &b| {
                basis.entry_sums[a]
                    .abs()
                    .partial_cmp(&basis.entry_sums[b].abs())
                    .unwrap()
            })
            .filter(|&j| {
                // both rotated sums must clear the threshold
                let (si, sj) = (basis.entry_sums[i], basis.entry_sums[j]);
                let inv = std::f64::consts::FRAC_1_SQRT_2;
                ((si + sj) * inv).abs() > DELTA_PIVOT && ((sj - si) * inv).abs() > DELTA_PIVOT
            });
        let Some(j) = partner else {
            return Err(CompressError::DegenerateBasis);
        };
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let gi = basis.vectors[i].clone();
        let gj = basis.vectors[j].clone();
        for (idx, slot) in basis.vectors[i].iter_mut().enumerate() {
            *slot = (gi[idx] + gj[idx]) * inv;
        }
        for (idx, slot) in basis.vectors[j].iter_mut().enumerate() {
            *slot = (gj[idx] - gi[idx]) * inv;
        }
        basis.entry_sums[i] = basis.vectors[i].iter().sum();
        basis.entry_sums[j] = basis.vectors[j].iter().sum();
    }
    Ok(())
}

/// Project every stored response onto the subspace and check that a shared
/// event projects to the same vector from every context (within 1e-9).
/// Returns one ambient-space vector per outcome event.
pub fn project_responses(
    model: &OntologicalModel,
    basis: &SubspaceBasis,
) -> Result<BTreeMap<(MeasurementId, usize), Vec<f64>>, CompressError> {
    let mut out: BTreeMap<(MeasurementId, usize), Vec<f64>> = BTreeMap::new();
    for c in &model.scenario.contexts {
        for ev in context_events(c) {
            let xi = &model.responses[&(c.id.clone(), ev.measurement.clone(), ev.outcome)];
            let proj = basis.project(xi);
            match out.get(&(ev.measurement.clone(), ev.outcome)) {
                None => {
                    out.insert((ev.measurement.clone(), ev.outcome), proj);
                }
                Some(prev) => {
                    let gap = prev
                        .iter()
                        .zip(&proj)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0f64, f64::max);
                    if gap > 1e-9 {
                        return Err(CompressError::ProjectionMismatch(
                            ev.measurement.clone(),
                            ev.outcome,
                            gap,
                        ));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Full compression pipeline. The quasi state entries are
/// (mu . g_i) * s_i and the quasi response entries (proj(xi) . g_i) / s_i,
/// so states sum to one, per-context responses sum to the all-ones vector,
/// and every prediction is preserved.
pub fn build_quasi_model(model: &OntologicalModel, tol: f64) -> Result<QuasiModel, CompressError> {
    model.validate(crate::EPS_SUM)?;
    let (basis, _) = gleason_subspace(model, tol)?;
    let projected = project_responses(model, &basis)?;
    let n = basis.dimension();
    let mut preparations = BTreeMap::new();
    for (p, mu) in &model.preparations {
        let quasi: Vec<f64> = basis
            .vectors
            .iter()
            .zip(&basis.entry_sums)
            .map(|(g, s)| dot(mu, g) * s)
            .collect();
        preparations.insert(p.clone(), quasi);
    }
    let mut responses = BTreeMap::new();
    for (key, proj) in &projected {
        let quasi: Vec<f64> = basis
            .vectors
            .iter()
            .zip(&basis.entry_sums)
            .map(|(g, s)| dot(proj, g) / s)
            .collect();
        responses.insert(key.clone(), quasi);
    }
    let mut quasi = QuasiModel {
        scenario: model.scenario.clone(),
        num_quasi_states: n,
        basis,
        preparations,
        responses,
        negativity: vec![],
    };
    quasi.negativity = detect_negativity(&quasi, 1e-12);
    Ok(quasi)
}

/// All quasi entries below `-tol`, across states and responses.
pub fn detect_negativity(q: &QuasiModel, tol: f64) -> Vec<NegativityEntry> {
    let mut out = Vec::new();
    for (p, v) in &q.preparations {
        for (i, &x) in v.iter().enumerate() {
            if x < -tol {
                out.push(NegativityEntry {
                    vector: format!("state:{p}"),
                    index: i,
                    value: x,
                });
            }
        }
    }
    for ((m, o), v) in &q.responses {
        for (i, &x) in v.iter().enumerate() {
            if x < -tol {
                out.push(NegativityEntry {
                    vector: format!("response:{m}:{o}"),
                    index: i,
                    value: x,
                });
            }
        }
    }
    out
}

impl QuasiModel {
    /// Quasi-side prediction for an event; context-free by construction.
    pub fn predict(
        &self,
        preparation: &str,
        measurement: &MeasurementId,
        outcome: usize,
    ) -> Option<f64> {
        let mu = self.preparations.get(preparation)?;
        let xi = self.responses.get(&(measurement.clone(), outcome))?;
        Some(dot(mu, xi))
    }

    /// Largest deviation between quasi predictions and the original model's
    /// predictions over every stored (preparation, event, context) triple.
    pub fn prediction_gap(&self, original: &OntologicalModel) -> f64 {
        let mut worst = 0.0f64;
        for p in original.preparations.keys() {
            for c in &original.scenario.contexts {
                for ev in context_events(c) {
                    let orig = original.predict(p, &ev, &c.id).expect("validated");
                    let quasi = self
                        .predict(p, &ev.measurement, ev.outcome)
                        .expect("event present");
                    worst = worst.max((orig - quasi).abs());
                }
            }
        }
        worst
    }

    /// Max deviation of each quasi state sum from one.
    pub fn state_sum_gap(&self) -> f64 {
        self.preparations
            .values()
            .map(|v| (v.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Max entrywise deviation of per-context response sums from all-ones.
    pub fn completeness_gap(&self) -> f64 {
        let mut worst = 0.0f64;
        for c in &self.scenario.contexts {
            let mut total = vec![0.0; self.num_quasi_states];
            for ev in context_events(c) {
                let xi = &self.responses[&(ev.measurement.clone(), ev.outcome)];
                for (t, x) in total.iter_mut().zip(xi) {
                    *t += x;
                }
            }
            for t in &total {
                worst = worst.max((t - 1.0).abs());
            }
        }
        worst
    }

    pub fn to_json(&self) -> String {
        let file = QuasiFile {
            scenario: self.scenario.clone(),
            num_quasi_states: self.num_quasi_states,
            preparations: self.preparations.clone(),
            responses: self
                .responses
                .iter()
                .map(|((m, o), xi)| QuasiResponseFile {
                    measurement: m.0.clone(),
                    outcome: *o,
                    xi: xi.clone(),
                })
                .collect(),
            negativity: self.negativity.clone(),
            basis: self.basis.vectors.clone(),
        };
        serde_json::to_string_pretty(&file).expect("quasi model serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct QuasiFile {
    scenario: Scenario,
    num_quasi_states: usize,
    preparations: BTreeMap<String, Vec<f64>>,
    responses: Vec<QuasiResponseFile>,
    negativity: Vec<NegativityEntry>,
    basis: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct QuasiResponseFile {
    measurement: String,
    outcome: usize,
    xi: Vec<f64>,
}
