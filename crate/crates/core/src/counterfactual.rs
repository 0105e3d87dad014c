//! Counterfactual outcomes for deterministic-response models: per-context
//! outcome vectors, bias detection, and exact feasibility search over sets
//! of preparation constraints.
//!
//! The built-in six-state / three-measurement instance carries five
//! composite preparations of the maximally mixed state; requiring them all
//! to produce one distribution over counterfactual outcomes is an exact
//! rational LP that comes back infeasible, with a Farkas certificate. A
//! Fourier-Motzkin second route double-checks verdicts at desk scale.

use crate::empirical::ProbEntry;
use crate::lp::{self, Constraint, FarkasCertificate, LpOutcome};
use crate::ontmodel::OntologicalModel;
use crate::scenario::{Context, MeasurementId, Scenario};
use crate::{rat_to_f64, Rat};
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CounterfactualError {
    #[error("state is not normalized: |a0|^2 + |a1|^2 = {0}")]
    NotNormalized(f64),
    #[error("instance too large: {got} counterfactual outcomes exceed cap {cap}")]
    TooLarge { got: usize, cap: usize },
    #[error("marginal for ({preparation}, {context}) has {got} entries, expected {want}")]
    MarginalArity {
        preparation: String,
        context: String,
        got: usize,
        want: usize,
    },
    #[error("unknown context {0}")]
    UnknownContext(String),
    #[error("unknown preparation {0} in composite {1}")]
    UnknownPreparation(String, String),
    #[error("unknown composite {0}")]
    UnknownComposite(String),
    #[error("marginal for ({0}, {1}) does not sum to 1")]
    MarginalSum(String, String),
    #[error("distribution weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("negative weight on outcome {0:?}")]
    NegativeWeight(String),
    #[error("invalid instance json: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Lp(#[from] lp::LpError),
}

/// A pure qubit state (a0, a1), unit norm.
#[derive(Debug, Clone, Copy)]
pub struct QubitState {
    pub a0: Complex64,
    pub a1: Complex64,
}

impl QubitState {
    pub fn new(a0: Complex64, a1: Complex64) -> Result<Self, CounterfactualError> {
        let n = a0.norm_sqr() + a1.norm_sqr();
        if (n - 1.0).abs() > 1e-12 {
            return Err(CounterfactualError::NotNormalized(n));
        }
        Ok(QubitState { a0, a1 })
    }

    pub fn real(a0: f64, a1: f64) -> Result<Self, CounterfactualError> {
        Self::new(Complex64::new(a0, 0.0), Complex64::new(a1, 0.0))
    }

    /// Density matrix entries ((rho00, rho01), (rho10, rho11)).
    pub fn density_matrix(&self) -> [[Complex64; 2]; 2] {
        [
            [self.a0 * self.a0.conj(), self.a0 * self.a1.conj()],
            [self.a1 * self.a0.conj(), self.a1 * self.a1.conj()],
        ]
    }
}

/// Two-outcome projective measurement; `direction` spans the outcome-0
/// projector.
#[derive(Debug, Clone, Copy)]
pub struct QubitMeasurement {
    pub direction: QubitState,
}

/// Probability of outcome 0: |<m|psi>|^2.
pub fn born_probability(state: &QubitState, meas: &QubitMeasurement) -> f64 {
    let overlap = meas.direction.a0.conj() * state.a0 + meas.direction.a1.conj() * state.a1;
    overlap.norm_sqr()
}

/// Average density matrix of an equal-weight mixture.
pub fn mixture_density(states: &[QubitState]) -> [[Complex64; 2]; 2] {
    let mut rho = [[Complex64::new(0.0, 0.0); 2]; 2];
    for s in states {
        let d = s.density_matrix();
        for (r, dr) in rho.iter_mut().zip(&d) {
            for (x, y) in r.iter_mut().zip(dr) {
                *x += y / states.len() as f64;
            }
        }
    }
    rho
}

/// A distribution over counterfactual outcomes (one outcome index per
/// context), sparse over its support.
#[derive(Debug, Clone)]
pub struct CounterfactualDistribution {
    pub context_arities: Vec<usize>,
    pub weights: BTreeMap<Vec<usize>, Rat>,
}

impl CounterfactualDistribution {
    pub fn validate(&self) -> Result<(), CounterfactualError> {
        for (c, w) in &self.weights {
            if c.len() != self.context_arities.len()
                || c.iter().zip(&self.context_arities).any(|(o, a)| o >= a)
            {
                return Err(CounterfactualError::NegativeWeight(format!("{c:?}")));
            }
            if w.is_negative() {
                return Err(CounterfactualError::NegativeWeight(format!("{c:?}")));
            }
        }
        let total: Rat = self.weights.values().cloned().sum();
        let tf = rat_to_f64(&total);
        if (tf - 1.0).abs() > crate::EPS_SUM {
            return Err(CounterfactualError::WeightSum(tf));
        }
        Ok(())
    }

    /// Marginal distribution of entry `i`.
    pub fn marginal(&self, i: usize) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.context_arities[i]];
        for (c, w) in &self.weights {
            out[c[i]] += w;
        }
        out
    }
}

/// Outcome of the bias check for one entry of the counterfactual vector.
#[derive(Debug, Clone)]
pub struct BiasReport {
    pub unbiased: bool,
    /// On bias: the conditioning assignment of the other entries, with the
    /// conditional and unconditional marginals that disagree.
    pub witness: Option<BiasWitness>,
}

#[derive(Debug, Clone)]
pub struct BiasWitness {
    pub conditioning: Vec<(usize, usize)>, // (context index, outcome)
    pub conditional: Vec<f64>,
    pub marginal: Vec<f64>,
}

/// Unbiasedness of entry `i`: the conditional distribution of `c_i` given
/// any positive-probability assignment of the other entries must equal the
/// plain marginal within `tol`.
pub fn is_unbiased(d: &CounterfactualDistribution, i: usize, tol: f64) -> BiasReport {
    let marginal: Vec<f64> = d.marginal(i).iter().map(rat_to_f64).collect();
    let mut groups: BTreeMap<Vec<usize>, Vec<Rat>> = BTreeMap::new();
    for (c, w) in &d.weights {
        let rest: Vec<usize> = c
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, &o)| o)
            .collect();
        let entry = groups
            .entry(rest)
            .or_insert_with(|| vec![Rat::zero(); d.context_arities[i]]);
        entry[c[i]] += w;
    }
    for (rest, cond) in &groups {
        let total: Rat = cond.iter().cloned().sum();
        if !total.is_positive() {
            continue;
        }
        let conditional: Vec<f64> = cond.iter().map(|w| rat_to_f64(&(w / &total))).collect();
        let gap = conditional
            .iter()
            .zip(&marginal)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if gap > tol {
            let conditioning = (0..d.context_arities.len())
                .filter(|j| *j != i)
                .zip(rest.iter().copied())
                .collect();
            return BiasReport {
                unbiased: false,
                witness: Some(BiasWitness {
                    conditioning,
                    conditional,
                    marginal,
                }),
            };
        }
    }
    BiasReport {
        unbiased: true,
        witness: None,
    }
}

/// A feasibility instance: named preparations with per-context marginal
/// targets, equal-weight composites of them, and a set of composites
/// required to produce one shared distribution over counterfactual
/// outcomes.
#[derive(Debug, Clone)]
pub struct FeasibilityInstance {
    pub context_ids: Vec<String>,
    pub context_arities: Vec<usize>,
    /// preparation id -> per-context marginal target (None = unconstrained).
    pub targets: BTreeMap<String, Vec<Option<Vec<Rat>>>>,
    pub composites: Vec<Composite>,
    /// Composites constrained to share a single distribution.
    pub shared_composites: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Composite {
    pub id: String,
    pub parts: Vec<String>,
}

#[derive(Debug, Clone)]
pub enum FeasibilityOutcome {
    Feasible {
        per_preparation: BTreeMap<String, CounterfactualDistribution>,
        shared: Option<CounterfactualDistribution>,
    },
    Infeasible(FarkasCertificate),
}

impl FeasibilityOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityOutcome::Feasible { .. })
    }
}

struct CompiledInstance {
    num_vars: usize,
    constraints: Vec<Constraint>,
    /// per preparation: atom list (outcome vectors) and variable offsets
    prep_atoms: BTreeMap<String, (usize, Vec<Vec<usize>>)>,
    shared_offset: Option<usize>,
    atoms: Vec<Vec<usize>>,
}

impl FeasibilityInstance {
    pub fn validate(&self) -> Result<(), CounterfactualError> {
        for (p, targets) in &self.targets {
            if targets.len() != self.context_arities.len() {
                return Err(CounterfactualError::MarginalArity {
                    preparation: p.clone(),
                    context: "<all>".into(),
                    got: targets.len(),
                    want: self.context_arities.len(),
                });
            }
            for (ci, t) in targets.iter().enumerate() {
                if let Some(t) = t {
                    if t.len() != self.context_arities[ci] {
                        return Err(CounterfactualError::MarginalArity {
                            preparation: p.clone(),
                            context: self.context_ids[ci].clone(),
                            got: t.len(),
                            want: self.context_arities[ci],
                        });
                    }
                    if t.iter().cloned().sum::<Rat>() != Rat::one() {
                        return Err(CounterfactualError::MarginalSum(
                            p.clone(),
                            self.context_ids[ci].clone(),
                        ));
                    }
                }
            }
        }
        for comp in &self.composites {
            for part in &comp.parts {
                if !self.targets.contains_key(part) {
                    return Err(CounterfactualError::UnknownPreparation(
                        part.clone(),
                        comp.id.clone(),
                    ));
                }
            }
        }
        for s in &self.shared_composites {
            if !self.composites.iter().any(|c| &c.id == s) {
                return Err(CounterfactualError::UnknownComposite(s.clone()));
            }
        }
        Ok(())
    }

    fn atom_space(&self, cap: usize) -> Result<Vec<Vec<usize>>, CounterfactualError> {
        let mut total = 1usize;
        for &a in &self.context_arities {
            total = total.saturating_mul(a);
            if total > cap {
                return Err(CounterfactualError::TooLarge { got: total, cap });
            }
        }
        Ok((0..total)
            .map(|i| crate::empirical::index_tuple(i, &self.context_arities))
            .collect())
    }

    /// Atoms consistent with every certainty (probability 0 or 1) target of
    /// the preparation. This is the hard-constraint preprocessing: the LP
    /// only sees variables that survive it.
    fn allowed_atoms(&self, prep: &str, atoms: &[Vec<usize>]) -> Vec<Vec<usize>> {
        let targets = &self.targets[prep];
        atoms
            .iter()
            .filter(|atom| {
                targets.iter().enumerate().all(|(ci, t)| match t {
                    None => true,
                    // a zero-probability marginal outcome excludes the atom
                    Some(dist) => !dist[atom[ci]].is_zero(),
                })
            })
            .cloned()
            .collect()
    }

    fn compile(&self, cap: usize) -> Result<CompiledInstance, CounterfactualError> {
        self.validate()?;
        let atoms = self.atom_space(cap)?;
        let mut prep_atoms = BTreeMap::new();
        let mut offset = 0usize;
        for p in self.targets.keys() {
            let allowed = self.allowed_atoms(p, &atoms);
            prep_atoms.insert(p.clone(), (offset, allowed.clone()));
            offset += allowed.len();
        }
        let shared_offset = if self.shared_composites.is_empty() {
            None
        } else {
            let o = offset;
            offset += atoms.len();
            Some(o)
        };
        let num_vars = offset;
        let zrow = || vec![Rat::zero(); num_vars];
        let mut constraints = Vec::new();
        for (p, targets) in &self.targets {
            let (off, allowed) = &prep_atoms[p];
            let mut norm = zrow();
            for k in 0..allowed.len() {
                norm[off + k] = Rat::one();
            }
            constraints.push(Constraint::eq(norm, Rat::one()));
            for (ci, t) in targets.iter().enumerate() {
                let Some(dist) = t else { continue };
                for (outcome, target) in dist.iter().enumerate() {
                    if target.is_zero() || target.is_one() {
                        continue; // already folded into the allowed-atom set
                    }
                    let mut row = zrow();
                    for (k, atom) in allowed.iter().enumerate() {
                        if atom[ci] == outcome {
                            row[off + k] = Rat::one();
                        }
                    }
                    constraints.push(Constraint::eq(row, target.clone()));
                }
            }
        }
        if let Some(shared_off) = shared_offset {
            for comp_id in &self.shared_composites {
                let comp = self.composites.iter().find(|c| &c.id == comp_id).unwrap();
                let frac = Rat::new(1.into(), (comp.parts.len() as i64).into());
                for (ai, atom) in atoms.iter().enumerate() {
                    let mut row = zrow();
                    for part in &comp.parts {
                        let (off, allowed) = &prep_atoms[part];
                        if let Some(k) = allowed.iter().position(|a| a == atom) {
                            row[off + k] += frac.clone();
                        }
                    }
                    row[shared_off + ai] -= Rat::one();
                    constraints.push(Constraint::eq(row, Rat::zero()));
                }
            }
        }
        Ok(CompiledInstance {
            num_vars,
            constraints,
            prep_atoms,
            shared_offset,
            atoms,
        })
    }

    /// Exact feasibility: a distribution per preparation matching every
    /// marginal target, with all shared composites mixing to one common
    /// distribution. Certainty targets shrink the support combinatorially
    /// first; the remainder is an exact rational LP.
    pub fn feasibility_search(
        &self,
        cap: usize,
    ) -> Result<FeasibilityOutcome, CounterfactualError> {
        let compiled = self.compile(cap)?;
        match lp::feasible(compiled.num_vars, &compiled.constraints)? {
            LpOutcome::Infeasible(cert) => {
                debug_assert!(lp::verify_infeasibility(&compiled.constraints, &cert));
                Ok(FeasibilityOutcome::Infeasible(cert))
            }
            LpOutcome::Optimal { x, .. } => {
                let mut per_preparation = BTreeMap::new();
                for (p, (off, allowed)) in &compiled.prep_atoms {
                    let mut weights = BTreeMap::new();
                    for (k, atom) in allowed.iter().enumerate() {
                        if x[off + k].is_positive() {
                            weights.insert(atom.clone(), x[off + k].clone());
                        }
                    }
                    per_preparation.insert(
                        p.clone(),
                        CounterfactualDistribution {
                            context_arities: self.context_arities.clone(),
                            weights,
                        },
                    );
                }
                let shared = compiled.shared_offset.map(|off| {
                    let mut weights = BTreeMap::new();
                    for (ai, atom) in compiled.atoms.iter().enumerate() {
                        if x[off + ai].is_positive() {
                            weights.insert(atom.clone(), x[off + ai].clone());
                        }
                    }
                    CounterfactualDistribution {
                        context_arities: self.context_arities.clone(),
                        weights,
                    }
                });
                Ok(FeasibilityOutcome::Feasible {
                    per_preparation,
                    shared,
                })
            }
            LpOutcome::Unbounded => unreachable!("feasibility problem"),
        }
    }

    /// Second decision route for the same instance, via Fourier-Motzkin
    /// elimination. Independent of the simplex path.
    pub fn feasibility_oracle(
        &self,
        cap: usize,
        max_rows: usize,
    ) -> Result<bool, CounterfactualError> {
        let compiled = self.compile(cap)?;
        Ok(lp::fourier_motzkin_feasible(
            compiled.num_vars,
            &compiled.constraints,
            max_rows,
        )?)
    }

    /// Maximum total weight the shared distribution can place on `atom`,
    /// assuming the instance is feasible.
    pub fn max_shared_weight(
        &self,
        atom: &[usize],
        cap: usize,
    ) -> Result<Option<Rat>, CounterfactualError> {
        let compiled = self.compile(cap)?;
        let Some(off) = compiled.shared_offset else {
            return Ok(None);
        };
        let ai = compiled
            .atoms
            .iter()
            .position(|a| a == atom)
            .expect("atom in range");
        let mut objective = vec![Rat::zero(); compiled.num_vars];
        objective[off + ai] = Rat::one();
        match lp::solve(compiled.num_vars, &compiled.constraints, &objective)? {
            LpOutcome::Optimal { value, .. } => Ok(Some(value)),
            _ => Ok(None),
        }
    }

    /// Same bound for a composite's own mixture weight on `atom`.
    pub fn max_composite_weight(
        &self,
        composite: &str,
        atom: &[usize],
        cap: usize,
    ) -> Result<Option<Rat>, CounterfactualError> {
        let comp = self
            .composites
            .iter()
            .find(|c| c.id == composite)
            .ok_or_else(|| CounterfactualError::UnknownComposite(composite.to_owned()))?
            .clone();
        let compiled = self.compile(cap)?;
        let mut objective = vec![Rat::zero(); compiled.num_vars];
        let frac = Rat::new(1.into(), (comp.parts.len() as i64).into());
        for part in &comp.parts {
            let (off, allowed) = &compiled.prep_atoms[part];
            if let Some(k) = allowed.iter().position(|a| a.as_slice() == atom) {
                objective[off + k] += frac.clone();
            }
        }
        match lp::solve(compiled.num_vars, &compiled.constraints, &objective)? {
            LpOutcome::Optimal { value, .. } => Ok(Some(value)),
            _ => Ok(None),
        }
    }

    pub fn from_json(s: &str) -> Result<Self, CounterfactualError> {
        let file: InstanceFile = serde_json::from_str(s)?;
        let context_ids: Vec<String> = file.contexts.iter().map(|c| c.id.clone()).collect();
        let context_arities: Vec<usize> = file.contexts.iter().map(|c| c.arity).collect();
        let mut targets: BTreeMap<String, Vec<Option<Vec<Rat>>>> = BTreeMap::new();
        for t in &file.targets {
            let ci = context_ids
                .iter()
                .position(|c| c == &t.context)
                .ok_or_else(|| CounterfactualError::UnknownContext(t.context.clone()))?;
            let entry = targets
                .entry(t.preparation.clone())
                .or_insert_with(|| vec![None; context_ids.len()]);
            let dist: Result<Vec<Rat>, _> = t
                .marginal
                .iter()
                .map(|e| {
                    e.to_rat().map_err(|_| {
                        CounterfactualError::MarginalSum(t.preparation.clone(), t.context.clone())
                    })
                })
                .collect();
            entry[ci] = Some(dist?);
        }
        Ok(FeasibilityInstance {
            context_ids,
            context_arities,
            targets,
            composites: file
                .composites
                .into_iter()
                .map(|c| Composite {
                    id: c.id,
                    parts: c.parts,
                })
                .collect(),
            shared_composites: file.shared_composites,
        })
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            contexts: self
                .context_ids
                .iter()
                .zip(&self.context_arities)
                .map(|(id, a)| ContextFile {
                    id: id.clone(),
                    arity: *a,
                })
                .collect(),
            targets: self
                .targets
                .iter()
                .flat_map(|(p, ts)| {
                    ts.iter().enumerate().filter_map(move |(ci, t)| {
                        t.as_ref().map(|dist| TargetFile {
                            preparation: p.clone(),
                            context: self.context_ids[ci].clone(),
                            marginal: dist
                                .iter()
                                .map(|r| ProbEntry::Ratio(format!("{}/{}", r.numer(), r.denom())))
                                .collect(),
                        })
                    })
                })
                .collect(),
            composites: self
                .composites
                .iter()
                .map(|c| CompositeFile {
                    id: c.id.clone(),
                    parts: c.parts.clone(),
                })
                .collect(),
            shared_composites: self.shared_composites.clone(),
        };
        serde_json::to_string_pretty(&file).expect("instance serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    contexts: Vec<ContextFile>,
    targets: Vec<TargetFile>,
    #[serde(default)]
    composites: Vec<CompositeFile>,
    #[serde(default)]
    shared_composites: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ContextFile {
    id: String,
    #[serde(default = "two")]
    arity: usize,
}

fn two() -> usize {
    2
}

#[derive(Debug, Serialize, Deserialize)]
struct TargetFile {
    preparation: String,
    context: String,
    marginal: Vec<ProbEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CompositeFile {
    id: String,
    parts: Vec<String>,
}

/// The six pure states, three measurements, and five equal-weight composite
/// preparations of the maximally mixed state.
pub struct SixStateConstruction {
    pub states: [QubitState; 6],
    pub measurements: [QubitMeasurement; 3],
    pub composites: Vec<Composite>,
}

pub fn six_state_construction() -> SixStateConstruction {
    let h = 0.5f64;
    let s = 3f64.sqrt() / 2.0;
    let st = |a0: f64, a1: f64| QubitState::real(a0, a1).expect("unit norm");
    let states = [
        st(1.0, 0.0),
        st(0.0, 1.0),
        st(h, s),
        st(s, -h),
        st(h, -s),
        st(s, h),
    ];
    let measurements = [
        QubitMeasurement {
            direction: st(1.0, 0.0),
        },
        QubitMeasurement {
            direction: st(h, s),
        },
        QubitMeasurement {
            direction: st(h, -s),
        },
    ];
    let composites = vec![
        Composite {
            id: "P12".into(),
            parts: vec!["P1".into(), "P2".into()],
        },
        Composite {
            id: "P34".into(),
            parts: vec!["P3".into(), "P4".into()],
        },
        Composite {
            id: "P56".into(),
            parts: vec!["P5".into(), "P6".into()],
        },
        Composite {
            id: "P135".into(),
            parts: vec!["P1".into(), "P3".into(), "P5".into()],
        },
        Composite {
            id: "P246".into(),
            parts: vec!["P2".into(), "P4".into(), "P6".into()],
        },
    ];
    SixStateConstruction {
        states,
        measurements,
        composites,
    }
}

/// Exact outcome-0 probabilities of the construction; all entries are the
/// rationals 0, 1/4, 3/4, 1, and the floating Born rule reproduces them to
/// 1e-12 (checked in tests).
pub fn six_state_born_table() -> [[Rat; 3]; 6] {
    let r = |n: i64, d: i64| Rat::new(n.into(), d.into());
    [
        [r(1, 1), r(1, 4), r(1, 4)],
        [r(0, 1), r(3, 4), r(3, 4)],
        [r(1, 4), r(1, 1), r(1, 4)],
        [r(3, 4), r(0, 1), r(3, 4)],
        [r(1, 4), r(1, 4), r(1, 1)],
        [r(3, 4), r(3, 4), r(0, 1)],
    ]
}

/// The built-in infeasibility instance: every composite must produce one
/// shared distribution, and each pure state constrains only through its
/// certainty outcomes (the probability-1 rows of the Born table), which is
/// all the argument needs.
pub fn appendix_c_instance() -> FeasibilityInstance {
    instance_with_composites(&["P12", "P34", "P56", "P135", "P246"], false)
}

/// Variant with the full quantum marginal targets instead of certainties
/// only.
pub fn appendix_c_instance_full() -> FeasibilityInstance {
    instance_with_composites(&["P12", "P34", "P56", "P135", "P246"], true)
}

/// Instance restricted to a subset of the five composites.
pub fn instance_with_composites(keep: &[&str], full_marginals: bool) -> FeasibilityInstance {
    let construction = six_state_construction();
    let born = six_state_born_table();
    let composites: Vec<Composite> = construction
        .composites
        .iter()
        .filter(|c| keep.contains(&c.id.as_str()))
        .cloned()
        .collect();
    let mut targets = BTreeMap::new();
    for (i, row) in born.iter().enumerate() {
        let id = format!("P{}", i + 1);
        if !composites.iter().any(|c| c.parts.contains(&id)) {
            continue;
        }
        let ts = row
            .iter()
            .map(|p0| {
                let keep_target = full_marginals || p0.is_zero() || p0.is_one();
                keep_target.then(|| vec![p0.clone(), Rat::one() - p0])
            })
            .collect();
        targets.insert(id, ts);
    }
    FeasibilityInstance {
        context_ids: vec!["M1".into(), "M2".into(), "M3".into()],
        context_arities: vec![2, 2, 2],
        targets,
        composites: composites.clone(),
        shared_composites: composites.iter().map(|c| c.id.clone()).collect(),
    }
}

/// Deterministic-response ontological model of the construction: the ontic
/// states are the eight counterfactual outcomes, each pure state gets the
/// product distribution with its Born marginals, and the five composites
/// are stored as explicit mixtures (one operational equivalence class).
pub fn six_state_ontological_model() -> OntologicalModel {
    let scenario = Scenario::new(
        vec!["M1".into(), "M2".into(), "M3".into()],
        vec![
            Context::new("M1", &["M1"], true),
            Context::new("M2", &["M2"], true),
            Context::new("M3", &["M3"], true),
        ],
    );
    let born = six_state_born_table();
    let mut preparations: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (i, row) in born.iter().enumerate() {
        let mut mu = Vec::with_capacity(8);
        for atom in 0..8usize {
            let c = [(atom >> 2) & 1, (atom >> 1) & 1, atom & 1];
            let mut w = 1.0;
            for (j, &cj) in c.iter().enumerate() {
                let p0 = rat_to_f64(&row[j]);
                w *= if cj == 0 { p0 } else { 1.0 - p0 };
            }
            mu.push(w);
        }
        preparations.insert(format!("P{}", i + 1), mu);
    }
    let construction = six_state_construction();
    for comp in &construction.composites {
        let mut mu = vec![0.0; 8];
        for part in &comp.parts {
            for (o, x) in mu.iter_mut().zip(&preparations[part]) {
                *o += x / comp.parts.len() as f64;
            }
        }
        preparations.insert(comp.id.clone(), mu);
    }
    let mut responses = BTreeMap::new();
    for (j, ctx) in ["M1", "M2", "M3"].iter().enumerate() {
        for outcome in 0..2usize {
            let xi: Vec<f64> = (0..8)
                .map(|atom: usize| {
                    let cj = (atom >> (2 - j)) & 1;
                    if cj == outcome {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            responses.insert((ctx.to_string(), MeasurementId::new(*ctx), outcome), xi);
        }
    }
    let equivalence_classes = vec![crate::ontmodel::EquivalenceClass {
        preparations: construction
            .composites
            .iter()
            .map(|c| c.id.clone())
            .collect(),
    }];
    OntologicalModel {
        scenario,
        num_ontic_states: 8,
        preparations,
        responses,
        equivalence_classes,
    }
}
