//! Empirical models: one joint outcome distribution per context, glued by
//! marginal agreement on context intersections, together with the
//! contextuality hierarchy (probabilistic / possibilistic / strong) and
//! signed global sections.
//!
//! Table entries are exact rationals internally; floating input converts
//! losslessly. The probabilistic classifier is an exact LP over the global
//! assignment space, the possibilistic and strong classifiers are support
//! computations, so each verdict is a theorem about the instance rather
//! than an approximation.

use crate::lp::{self, Constraint, FarkasCertificate, LpOutcome};
use crate::scenario::{MeasurementId, Scenario};
use crate::{rat_from_f64, rat_to_f64, Rat};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct EmpiricalModel {
    pub scenario: Scenario,
    /// context id -> distribution over outcome tuples, indexed row-major in
    /// the context's declared member order.
    pub tables: BTreeMap<String, Vec<Rat>>,
}

/// Row-major index of an outcome tuple.
pub fn tuple_index(tuple: &[usize], arities: &[usize]) -> usize {
    tuple.iter().zip(arities).fold(0, |acc, (o, a)| acc * a + o)
}

/// Inverse of [`tuple_index`].
pub fn index_tuple(mut idx: usize, arities: &[usize]) -> Vec<usize> {
    let mut out = vec![0; arities.len()];
    for i in (0..arities.len()).rev() {
        out[i] = idx % arities[i];
        idx /= arities[i];
    }
    out
}

#[derive(Debug, Error)]
pub enum EmpiricalError {
    #[error("no table for context {0}")]
    MissingTable(String),
    #[error("table for context {0} has {1} entries, expected {2}")]
    TableSize(String, usize, usize),
    #[error("table references unknown context {0}")]
    UnknownContext(String),
    #[error("instance too large: {got} global assignments exceed cap {cap}")]
    TooLarge { got: usize, cap: usize },
    #[error("hierarchy classifiers disagree with the nesting theorem: {0}")]
    Internal(String),
    #[error(
        "signed section residual {residual} exceeds 1e-8 on a no-disturbance model; \
         this contradicts the guarantee the construction relies on and needs investigation"
    )]
    ResidualTooLarge { residual: f64 },
    #[error("cannot parse probability entry {0:?}")]
    BadEntry(String),
    #[error("bad outcome key {0:?} for context {1}")]
    BadKey(String, String),
    #[error("invalid empirical-model json: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum EmpiricalViolation {
    NegativeEntry {
        context: String,
        index: usize,
        value: f64,
    },
    TableSum {
        context: String,
        sum: f64,
    },
    SharedMarginalMismatch {
        context_a: String,
        context_b: String,
        shared: Vec<String>,
        max_gap: f64,
    },
}

/// Hierarchy levels, ordered by strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContextualityClass {
    Noncontextual,
    Probabilistic,
    Possibilistic,
    Strong,
}

impl std::fmt::Display for ContextualityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ContextualityClass::Noncontextual => "noncontextual",
            ContextualityClass::Probabilistic => "probabilistic",
            ContextualityClass::Possibilistic => "possibilistic",
            ContextualityClass::Strong => "strong",
        };
        f.write_str(s)
    }
}

/// A total outcome assignment: one outcome index per scenario measurement,
/// in declaration order.
pub type GlobalAssignment = Vec<usize>;

#[derive(Debug, Clone)]
pub enum ProbabilisticOutcome {
    /// Nonnegative weights over global assignments whose marginals
    /// reproduce every table.
    Section(Vec<(GlobalAssignment, Rat)>),
    Contextual(FarkasCertificate),
}

#[derive(Debug, Clone)]
pub struct PossibilisticOutcome {
    pub noncontextual: bool,
    /// The canonical certificate on success: all support-compatible
    /// assignments (their restrictions cover every context support).
    pub compatible: Vec<GlobalAssignment>,
    /// On failure, a support atom no compatible assignment reaches.
    pub uncovered: Option<(String, Vec<usize>)>,
}

#[derive(Debug, Clone)]
pub struct StrongOutcome {
    pub strongly_contextual: bool,
    /// A consistent assignment when one exists.
    pub witness: Option<GlobalAssignment>,
    pub assignments_checked: usize,
}

#[derive(Debug, Clone)]
pub struct HierarchyVerdict {
    pub level: ContextualityClass,
    pub probabilistic: ProbabilisticOutcome,
    pub possibilistic: PossibilisticOutcome,
    pub strong: StrongOutcome,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignedSection {
    pub weights: Vec<f64>,
    pub residual: f64,
    pub min_weight: f64,
}

impl EmpiricalModel {
    pub fn context_arities(&self, ctx: &str) -> Vec<usize> {
        let c = self.scenario.context(ctx).expect("known context");
        c.members.iter().map(|m| self.scenario.arity(m)).collect()
    }

    fn structural_check(&self) -> Result<(), EmpiricalError> {
        for ctx in self.tables.keys() {
            if self.scenario.context(ctx).is_none() {
                return Err(EmpiricalError::UnknownContext(ctx.clone()));
            }
        }
        for c in &self.scenario.contexts {
            let size: usize = c.members.iter().map(|m| self.scenario.arity(m)).product();
            match self.tables.get(&c.id) {
                None => return Err(EmpiricalError::MissingTable(c.id.clone())),
                Some(t) if t.len() != size => {
                    return Err(EmpiricalError::TableSize(c.id.clone(), t.len(), size))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Marginal of a context table onto a subset of its member positions.
    pub fn marginal(&self, ctx: &str, positions: &[usize]) -> Vec<Rat> {
        let arities = self.context_arities(ctx);
        let sub_arities: Vec<usize> = positions.iter().map(|&p| arities[p]).collect();
        let size: usize = sub_arities.iter().product();
        let mut out = vec![Rat::zero(); size];
        for (idx, v) in self.tables[ctx].iter().enumerate() {
            let tuple = index_tuple(idx, &arities);
            let sub: Vec<usize> = positions.iter().map(|&p| tuple[p]).collect();
            out[tuple_index(&sub, &sub_arities)] += v;
        }
        out
    }

    /// Full validation: nonnegative entries, normalization within
    /// `eps_sum`, and pairwise shared-marginal agreement within `eps_glue`
    /// (the no-disturbance condition).
    pub fn validate(
        &self,
        eps_sum: f64,
        eps_glue: f64,
    ) -> Result<Vec<EmpiricalViolation>, EmpiricalError> {
        self.structural_check()?;
        let mut out = Vec::new();
        for (ctx, table) in &self.tables {
            for (i, v) in table.iter().enumerate() {
                let vf = rat_to_f64(v);
                if vf < -eps_sum {
                    out.push(EmpiricalViolation::NegativeEntry {
                        context: ctx.clone(),
                        index: i,
                        value: vf,
                    });
                }
            }
            let sum = rat_to_f64(&table.iter().sum::<Rat>());
            if (sum - 1.0).abs() > eps_sum {
                out.push(EmpiricalViolation::TableSum {
                    context: ctx.clone(),
                    sum,
                });
            }
        }
        out.extend(self.no_disturbance_violations(eps_glue));
        Ok(out)
    }

    /// Just the gluing condition: for every pair of contexts with common
    /// measurements, their marginals on the shared part agree within `tol`.
    pub fn no_disturbance_violations(&self, tol: f64) -> Vec<EmpiricalViolation> {
        let mut out = Vec::new();
        let contexts = &self.scenario.contexts;
        for i in 0..contexts.len() {
            for j in i + 1..contexts.len() {
                let (ca, cb) = (&contexts[i], &contexts[j]);
                let shared: Vec<&MeasurementId> = ca
                    .members
                    .iter()
                    .filter(|m| cb.members.contains(m))
                    .collect();
                if shared.is_empty() {
                    continue;
                }
                let pos_a: Vec<usize> = shared
                    .iter()
                    .map(|m| ca.members.iter().position(|x| &x == m).unwrap())
                    .collect();
                let pos_b: Vec<usize> = shared
                    .iter()
                    .map(|m| cb.members.iter().position(|x| &x == m).unwrap())
                    .collect();
                let ma = self.marginal(&ca.id, &pos_a);
                let mb = self.marginal(&cb.id, &pos_b);
                let max_gap = ma
                    .iter()
                    .zip(&mb)
                    .map(|(x, y)| rat_to_f64(&(x - y)).abs())
                    .fold(0.0f64, f64::max);
                if max_gap > tol {
                    out.push(EmpiricalViolation::SharedMarginalMismatch {
                        context_a: ca.id.clone(),
                        context_b: cb.id.clone(),
                        shared: shared.iter().map(|m| m.0.clone()).collect(),
                        max_gap,
                    });
                }
            }
        }
        out
    }

    fn assignment_space(&self, cap: usize) -> Result<(Vec<usize>, usize), EmpiricalError> {
        let arities: Vec<usize> = self
            .scenario
            .measurements
            .iter()
            .map(|m| self.scenario.arity(m))
            .collect();
        let mut total = 1usize;
        for &a in &arities {
            total = total.saturating_mul(a);
            if total > cap {
                return Err(EmpiricalError::TooLarge { got: total, cap });
            }
        }
        Ok((arities, total))
    }

    /// Positions of a context's members inside the global measurement list.
    fn member_positions(&self, ctx: &str) -> Vec<usize> {
        let c = self.scenario.context(ctx).expect("known context");
        c.members
            .iter()
            .map(|m| {
                self.scenario
                    .measurements
                    .iter()
                    .position(|x| x == m)
                    .unwrap()
            })
            .collect()
    }

    fn restriction(&self, assignment: &[usize], positions: &[usize]) -> Vec<usize> {
        positions.iter().map(|&p| assignment[p]).collect()
    }

    /// Exact LP feasibility: nonnegative weights over all global
    /// assignments whose marginal on every context reproduces the table
    /// (exactly, or within `tol` when given). Infeasibility certifies
    /// probabilistic contextuality.
    pub fn global_section_probabilistic(
        &self,
        tol: Option<&Rat>,
        cap: usize,
    ) -> Result<ProbabilisticOutcome, EmpiricalError> {
        self.structural_check()?;
        let (arities, total) = self.assignment_space(cap)?;
        let mut constraints = Vec::new();
        for c in &self.scenario.contexts {
            let positions = self.member_positions(&c.id);
            let carities = self.context_arities(&c.id);
            let table = &self.tables[&c.id];
            for (entry_idx, target) in table.iter().enumerate() {
                let want = index_tuple(entry_idx, &carities);
                let mut coeffs = vec![Rat::zero(); total];
                for g in 0..total {
                    let assignment = index_tuple(g, &arities);
                    if self.restriction(&assignment, &positions) == want {
                        coeffs[g] = Rat::one();
                    }
                }
                match tol {
                    None => constraints.push(Constraint::eq(coeffs, target.clone())),
                    Some(eps) => {
                        constraints.push(Constraint::le(coeffs.clone(), target + eps));
                        constraints.push(Constraint::ge(coeffs, target - eps));
                    }
                }
            }
        }
        constraints.push(Constraint::eq(vec![Rat::one(); total], Rat::one()));
        match lp::feasible(total, &constraints).expect("well-formed LP") {
            LpOutcome::Optimal { x, .. } => {
                let section = x
                    .into_iter()
                    .enumerate()
                    .filter(|(_, w)| w.is_positive())
                    .map(|(g, w)| (index_tuple(g, &arities), w))
                    .collect();
                Ok(ProbabilisticOutcome::Section(section))
            }
            LpOutcome::Infeasible(cert) => Ok(ProbabilisticOutcome::Contextual(cert)),
            LpOutcome::Unbounded => unreachable!("feasibility problem"),
        }
    }

    /// All assignments whose restriction lies inside every context support.
    fn compatible_assignments(&self, cap: usize) -> Result<Vec<GlobalAssignment>, EmpiricalError> {
        self.structural_check()?;
        let (arities, total) = self.assignment_space(cap)?;
        let per_context: Vec<(Vec<usize>, Vec<usize>, &Vec<Rat>)> = self
            .scenario
            .contexts
            .iter()
            .map(|c| {
                (
                    self.member_positions(&c.id),
                    self.context_arities(&c.id),
                    &self.tables[&c.id],
                )
            })
            .collect();
        let mut out = Vec::new();
        for g in 0..total {
            let assignment = index_tuple(g, &arities);
            let ok = per_context.iter().all(|(positions, carities, table)| {
                let r = self.restriction(&assignment, positions);
                table[tuple_index(&r, carities)].is_positive()
            });
            if ok {
                out.push(assignment);
            }
        }
        Ok(out)
    }

    /// Support-level classification: non-contextual iff the compatible
    /// assignments cover every positive entry of every context table.
    /// Taking all compatible assignments is the canonical maximal choice,
    /// so coverage failure is an exhaustive proof.
    pub fn classify_possibilistic(
        &self,
        cap: usize,
    ) -> Result<PossibilisticOutcome, EmpiricalError> {
        let compatible = self.compatible_assignments(cap)?;
        for c in &self.scenario.contexts {
            let positions = self.member_positions(&c.id);
            let carities = self.context_arities(&c.id);
            let table = &self.tables[&c.id];
            for (idx, v) in table.iter().enumerate() {
                if !v.is_positive() {
                    continue;
                }
                let want = index_tuple(idx, &carities);
                let covered = compatible
                    .iter()
                    .any(|g| self.restriction(g, &positions) == want);
                if !covered {
                    return Ok(PossibilisticOutcome {
                        noncontextual: false,
                        compatible,
                        uncovered: Some((c.id.clone(), want)),
                    });
                }
            }
        }
        Ok(PossibilisticOutcome {
            noncontextual: true,
            compatible,
            uncovered: None,
        })
    }

    /// Strong contextuality: no single assignment is consistent with every
    /// context support.
    pub fn classify_strong(&self, cap: usize) -> Result<StrongOutcome, EmpiricalError> {
        let (_, total) = self.assignment_space(cap)?;
        let compatible = self.compatible_assignments(cap)?;
        Ok(StrongOutcome {
            strongly_contextual: compatible.is_empty(),
            witness: compatible.into_iter().next(),
            assignments_checked: total,
        })
    }

    /// Run all three classifiers and return the strongest level attained,
    /// enforcing the nesting theorem between them.
    pub fn classify_hierarchy(
        &self,
        tol: Option<&Rat>,
        cap: usize,
    ) -> Result<HierarchyVerdict, EmpiricalError> {
        let probabilistic = self.global_section_probabilistic(tol, cap)?;
        let possibilistic = self.classify_possibilistic(cap)?;
        let strong = self.classify_strong(cap)?;
        let prob_ctx = matches!(probabilistic, ProbabilisticOutcome::Contextual(_));
        if strong.strongly_contextual && possibilistic.noncontextual {
            return Err(EmpiricalError::Internal(
                "strong contextuality with a possibilistic cover".into(),
            ));
        }
        if !possibilistic.noncontextual && !prob_ctx && tol.is_none() {
            return Err(EmpiricalError::Internal(
                "possibilistic contextuality with a probabilistic section".into(),
            ));
        }
        let level = if strong.strongly_contextual {
            ContextualityClass::Strong
        } else if !possibilistic.noncontextual {
            ContextualityClass::Possibilistic
        } else if prob_ctx {
            ContextualityClass::Probabilistic
        } else {
            ContextualityClass::Noncontextual
        };
        Ok(HierarchyVerdict {
            level,
            probabilistic,
            possibilistic,
            strong,
        })
    }

    /// Minimum-norm signed weights over global assignments reproducing
    /// every table exactly (weights sum to one, signs unconstrained). For a
    /// no-disturbance model this linear system is consistent, so a residual
    /// above 1e-8 is reported as an error rather than a result.
    pub fn signed_global_section(&self, cap: usize) -> Result<SignedSection, EmpiricalError> {
        self.structural_check()?;
        let (arities, total) = self.assignment_space(cap)?;
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for c in &self.scenario.contexts {
            let positions = self.member_positions(&c.id);
            let carities = self.context_arities(&c.id);
            for (entry_idx, target) in self.tables[&c.id].iter().enumerate() {
                let want = index_tuple(entry_idx, &carities);
                let mut row = vec![0.0; total];
                for (g, slot) in row.iter_mut().enumerate() {
                    let assignment = index_tuple(g, &arities);
                    if self.restriction(&assignment, &positions) == want {
                        *slot = 1.0;
                    }
                }
                rows.push(row);
                rhs.push(rat_to_f64(target));
            }
        }
        rows.push(vec![1.0; total]);
        rhs.push(1.0);
        let weights = crate::linalg::min_norm_solution(&rows, &rhs, 1e-12)
            .map_err(|e| EmpiricalError::Internal(e.to_string()))?;
        let residual = crate::linalg::residual_inf(&rows, &weights, &rhs);
        if residual >= 1e-8 {
            return Err(EmpiricalError::ResidualTooLarge { residual });
        }
        let min_weight = weights.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(SignedSection {
            weights,
            residual,
            min_weight,
        })
    }

    /// Independent soundness check: re-marginalize explicit section weights
    /// and compare against the stored tables.
    pub fn remarginalization_gap(&self, section: &[(GlobalAssignment, Rat)]) -> f64 {
        let mut worst = 0.0f64;
        for c in &self.scenario.contexts {
            let positions = self.member_positions(&c.id);
            let carities = self.context_arities(&c.id);
            let table = &self.tables[&c.id];
            let mut rebuilt = vec![Rat::zero(); table.len()];
            for (g, w) in section {
                let r = self.restriction(g, &positions);
                rebuilt[tuple_index(&r, &carities)] += w;
            }
            for (a, b) in rebuilt.iter().zip(table) {
                worst = worst.max(rat_to_f64(&(a - b)).abs());
            }
        }
        worst
    }

    pub fn from_json(s: &str) -> Result<Self, EmpiricalError> {
        let file: EmpiricalFile = serde_json::from_str(s)?;
        let scenario = file.scenario;
        let mut tables = BTreeMap::new();
        for t in file.tables {
            let Some(c) = scenario.context(&t.context) else {
                return Err(EmpiricalError::UnknownContext(t.context.clone()));
            };
            let arities: Vec<usize> = c.members.iter().map(|m| scenario.arity(m)).collect();
            let size: usize = arities.iter().product();
            let mut dist = vec![Rat::zero(); size];
            for (key, entry) in &t.distribution {
                let tuple: Result<Vec<usize>, _> =
                    key.split(',').map(|p| p.trim().parse::<usize>()).collect();
                let tuple =
                    tuple.map_err(|_| EmpiricalError::BadKey(key.clone(), t.context.clone()))?;
                if tuple.len() != arities.len() || tuple.iter().zip(&arities).any(|(o, a)| o >= a) {
                    return Err(EmpiricalError::BadKey(key.clone(), t.context.clone()));
                }
                dist[tuple_index(&tuple, &arities)] = entry.to_rat()?;
            }
            tables.insert(t.context, dist);
        }
        Ok(EmpiricalModel { scenario, tables })
    }

    pub fn to_json(&self) -> String {
        let tables = self
            .scenario
            .contexts
            .iter()
            .filter_map(|c| self.tables.get(&c.id).map(|t| (c, t)))
            .map(|(c, table)| {
                let arities: Vec<usize> =
                    c.members.iter().map(|m| self.scenario.arity(m)).collect();
                let mut distribution = BTreeMap::new();
                for (idx, v) in table.iter().enumerate() {
                    let tuple = index_tuple(idx, &arities);
                    let key = tuple
                        .iter()
                        .map(|o| o.to_string())
                        .collect::<Vec<_>>()
                        .join(",");
                    distribution.insert(
                        key,
                        ProbEntry::Ratio(format!("{}/{}", v.numer(), v.denom())),
                    );
                }
                TableFile {
                    context: c.id.clone(),
                    distribution,
                }
            })
            .collect();
        let file = EmpiricalFile {
            scenario: self.scenario.clone(),
            tables,
        };
        serde_json::to_string_pretty(&file).expect("empirical model serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct EmpiricalFile {
    scenario: Scenario,
    tables: Vec<TableFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TableFile {
    context: String,
    distribution: BTreeMap<String, ProbEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum ProbEntry {
    Float(f64),
    Ratio(String),
}

impl ProbEntry {
    pub(crate) fn to_rat(&self) -> Result<Rat, EmpiricalError> {
        match self {
            ProbEntry::Float(x) => Ok(rat_from_f64(*x)),
            ProbEntry::Ratio(s) => {
                let parts: Vec<&str> = s.split('/').collect();
                let err = || EmpiricalError::BadEntry(s.clone());
                match parts.as_slice() {
                    [n, d] => {
                        let n: num_bigint::BigInt = n.trim().parse().map_err(|_| err())?;
                        let d: num_bigint::BigInt = d.trim().parse().map_err(|_| err())?;
                        if d == 0.into() {
                            return Err(err());
                        }
                        Ok(Rat::new(n, d))
                    }
                    [n] => Ok(Rat::from_integer(n.trim().parse().map_err(|_| err())?)),
                    _ => Err(err()),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::lp::rat;

    #[test]
    fn tuple_indexing_round_trips() {
        let arities = [2usize, 3, 2];
        for idx in 0..12 {
            let t = index_tuple(idx, &arities);
            assert_eq!(tuple_index(&t, &arities), idx);
        }
    }

    #[test]
    fn pr_box_is_no_disturbance_and_strong() {
        let pr = fixtures::pr_box();
        assert!(pr.validate(1e-9, 1e-9).unwrap().is_empty());
        match pr.global_section_probabilistic(None, 1 << 24).unwrap() {
            ProbabilisticOutcome::Contextual(cert) => {
                assert!(!cert.multipliers.is_empty());
            }
            _ => panic!("PR box must be probabilistically contextual"),
        }
        let poss = pr.classify_possibilistic(1 << 24).unwrap();
        assert!(!poss.noncontextual);
        let strong = pr.classify_strong(1 << 24).unwrap();
        assert!(strong.strongly_contextual);
        assert_eq!(strong.assignments_checked, 16);
        let verdict = pr.classify_hierarchy(None, 1 << 24).unwrap();
        assert_eq!(verdict.level, ContextualityClass::Strong);
    }

    #[test]
    fn chsh_quantum_is_probabilistic_only() {
        let chsh = fixtures::chsh_quantum();
        assert!(chsh.validate(1e-9, 1e-9).unwrap().is_empty());
        let verdict = chsh.classify_hierarchy(None, 1 << 24).unwrap();
        assert_eq!(verdict.level, ContextualityClass::Probabilistic);
        assert!(verdict.possibilistic.noncontextual);
        assert!(!verdict.strong.strongly_contextual);
    }

    #[test]
    fn classical_product_model_is_noncontextual() {
        let cl = fixtures::classical_uniform();
        let verdict = cl.classify_hierarchy(None, 1 << 24).unwrap();
        assert_eq!(verdict.level, ContextualityClass::Noncontextual);
        if let ProbabilisticOutcome::Section(sec) = &verdict.probabilistic {
            assert!(cl.remarginalization_gap(sec) < 1e-12);
        } else {
            panic!("expected a section");
        }
    }

    #[test]
    fn hardy_support_is_possibilistic_not_strong() {
        let hardy = fixtures::hardy_rational();
        assert!(
            hardy.validate(1e-12, 1e-12).unwrap().is_empty(),
            "fixture glues exactly"
        );
        let verdict = hardy.classify_hierarchy(None, 1 << 24).unwrap();
        assert_eq!(verdict.level, ContextualityClass::Possibilistic);
        let (ctx, tuple) = verdict.possibilistic.uncovered.unwrap();
        assert_eq!((ctx.as_str(), tuple.as_slice()), ("c00", &[0usize, 0][..]));
    }

    #[test]
    fn deterministic_model_has_point_section() {
        let scenario = Scenario::new(
            vec!["a".into(), "b".into()],
            vec![crate::scenario::Context::new("c", &["a", "b"], true)],
        );
        let mut tables = BTreeMap::new();
        let mut dist = vec![Rat::zero(); 4];
        dist[tuple_index(&[1, 0], &[2, 2])] = Rat::one();
        tables.insert("c".to_owned(), dist);
        let em = EmpiricalModel { scenario, tables };
        match em.global_section_probabilistic(None, 1 << 24).unwrap() {
            ProbabilisticOutcome::Section(sec) => {
                assert_eq!(sec.len(), 1);
                assert_eq!(sec[0].0, vec![1, 0]);
                assert_eq!(sec[0].1, rat(1, 1));
            }
            _ => panic!("deterministic model has a global section"),
        }
    }

    #[test]
    fn skewed_marginal_reports_gap() {
        // two contexts sharing measurement s with marginals 0.6 vs 0.4
        let scenario = Scenario::new(
            vec!["s".into(), "x".into(), "y".into()],
            vec![
                crate::scenario::Context::new("c1", &["s", "x"], false),
                crate::scenario::Context::new("c2", &["s", "y"], false),
            ],
        );
        let mut tables = BTreeMap::new();
        tables.insert(
            "c1".to_owned(),
            vec![rat(3, 10), rat(3, 10), rat(2, 10), rat(2, 10)],
        );
        tables.insert(
            "c2".to_owned(),
            vec![rat(2, 10), rat(2, 10), rat(3, 10), rat(3, 10)],
        );
        let em = EmpiricalModel { scenario, tables };
        let v = em.no_disturbance_violations(1e-9);
        assert_eq!(v.len(), 1);
        match &v[0] {
            EmpiricalViolation::SharedMarginalMismatch {
                shared, max_gap, ..
            } => {
                assert_eq!(shared, &vec!["s".to_string()]);
                assert!((max_gap - 0.2).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn signed_sections_exist_with_negativity_where_expected() {
        let pr = fixtures::pr_box();
        let s = pr.signed_global_section(1 << 16).unwrap();
        assert!(s.residual < 1e-8);
        assert!(
            s.min_weight < -1e-3,
            "PR box needs negative weights, got {}",
            s.min_weight
        );
        assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-8);

        let cl = fixtures::classical_uniform();
        let s = cl.signed_global_section(1 << 16).unwrap();
        assert!(s.residual < 1e-8);
        assert!(
            s.min_weight >= -1e-12,
            "uniform classical min-norm stays nonnegative"
        );

        let chsh = fixtures::chsh_quantum();
        let s = chsh.signed_global_section(1 << 16).unwrap();
        assert!(s.residual < 1e-8);
        assert!(s.min_weight < 0.0);
    }

    #[test]
    fn assignment_cap_enforced() {
        let pr = fixtures::pr_box();
        assert!(matches!(
            pr.global_section_probabilistic(None, 8),
            Err(EmpiricalError::TooLarge { .. })
        ));
    }

    #[test]
    fn json_round_trip_with_rational_entries() {
        let hardy = fixtures::hardy_rational();
        let j = hardy.to_json();
        assert!(j.contains("\"tables\""));
        assert!(j.contains("\"distribution\""));
        let back = EmpiricalModel::from_json(&j).unwrap();
        assert_eq!(back.tables, hardy.tables);
        let jf = j.replace("\"1/16\"", "0.0625");
        let back2 = EmpiricalModel::from_json(&jf).unwrap();
        assert_eq!(back2.tables, hardy.tables);
    }
}
