//! Entropy-based causal checks: Shannon quantities over finite joint
//! distributions, no-disturbance phenomena, the factorisability LP for
//! latent models, and loop compositions of deterministic boxes with the
//! audit of the entropy chain that forces outcome/input independence.

use crate::lp::{self, Constraint, FarkasCertificate, LpOutcome};
use crate::ontmodel::{context_events, OntologicalModel};
use crate::scenario::Event;
use crate::{rat_from_f64, Rat};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CausalError {
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("distribution sums to {0}, expected 1")]
    NotNormalized(f64),
    #[error("negative probability {0}")]
    NegativeProbability(f64),
    #[error("box is not deterministic; the determinism analysis does not apply")]
    NotDeterministic,
    #[error("box table shape does not match declared arities")]
    BadTable,
    #[error("loop wiring needs output/input arities to match: {0} vs {1}")]
    WiringMismatch(usize, usize),
    #[error("latent model does not reproduce the phenomenon: {0} differs by {1}")]
    ModelMismatch(String, f64),
    #[error("conditional slice for inputs ({0}, {1}) sums to {2}")]
    BadConditional(usize, usize, f64),
    #[error("invalid json: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] crate::ontmodel::ModelError),
}

/// A joint distribution over named finite variables, stored as a flat
/// row-major table.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    pub variables: Vec<(String, usize)>,
    pub probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(variables: Vec<(String, usize)>, probs: Vec<f64>) -> Result<Self, CausalError> {
        let size: usize = variables.iter().map(|(_, a)| a).product();
        if probs.len() != size {
            return Err(CausalError::BadTable);
        }
        for &p in &probs {
            if p < -1e-12 {
                return Err(CausalError::NegativeProbability(p));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > crate::EPS_SUM {
            return Err(CausalError::NotNormalized(total));
        }
        Ok(JointDistribution { variables, probs })
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<usize>, CausalError> {
        names
            .iter()
            .map(|n| {
                self.variables
                    .iter()
                    .position(|(v, _)| v == n)
                    .ok_or_else(|| CausalError::UnknownVariable((*n).to_owned()))
            })
            .collect()
    }

    /// Marginal probability table over the named variables.
    pub fn marginal(&self, names: &[&str]) -> Result<Vec<f64>, CausalError> {
        let positions = self.positions(names)?;
        let arities: Vec<usize> = self.variables.iter().map(|(_, a)| *a).collect();
        let sub: Vec<usize> = positions.iter().map(|&p| arities[p]).collect();
        let mut out = vec![0.0; sub.iter().product()];
        for (idx, &p) in self.probs.iter().enumerate() {
            let tuple = crate::empirical::index_tuple(idx, &arities);
            let key: Vec<usize> = positions.iter().map(|&q| tuple[q]).collect();
            out[crate::empirical::tuple_index(&key, &sub)] += p;
        }
        Ok(out)
    }

    /// Shannon entropy of the named variables, in bits (0 log 0 = 0).
    pub fn entropy(&self, names: &[&str]) -> Result<f64, CausalError> {
        Ok(shannon(&self.marginal(names)?))
    }

    /// I(A : B) in bits.
    pub fn mutual_information(&self, a: &[&str], b: &[&str]) -> Result<f64, CausalError> {
        let ab: Vec<&str> = a.iter().chain(b.iter()).copied().collect();
        Ok(self.entropy(a)? + self.entropy(b)? - self.entropy(&ab)?)
    }

    /// H(A | B) in bits.
    pub fn conditional_entropy(&self, a: &[&str], given: &[&str]) -> Result<f64, CausalError> {
        let ab: Vec<&str> = a.iter().chain(given.iter()).copied().collect();
        Ok(self.entropy(&ab)? - self.entropy(given)?)
    }
}

fn shannon(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// An input/output phenomenon P(A, B | X, Y), stored as [x][y][a][b].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Phenomenon {
    pub x_arity: usize,
    pub y_arity: usize,
    pub a_arity: usize,
    pub b_arity: usize,
    pub table: Vec<Vec<Vec<Vec<f64>>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NdViolation {
    /// Which output's marginal moved: "A" or "B".
    pub output: String,
    pub own_input: usize,
    pub other_input_a: usize,
    pub other_input_b: usize,
    pub max_gap: f64,
}

impl Phenomenon {
    pub fn validate(&self) -> Result<(), CausalError> {
        if self.table.len() != self.x_arity {
            return Err(CausalError::BadTable);
        }
        for (x, tx) in self.table.iter().enumerate() {
            if tx.len() != self.y_arity {
                return Err(CausalError::BadTable);
            }
            for (y, txy) in tx.iter().enumerate() {
                if txy.len() != self.a_arity || txy.iter().any(|r| r.len() != self.b_arity) {
                    return Err(CausalError::BadTable);
                }
                let total: f64 = txy.iter().flatten().sum();
                if (total - 1.0).abs() > crate::EPS_SUM {
                    return Err(CausalError::BadConditional(x, y, total));
                }
            }
        }
        Ok(())
    }

    fn a_marginal(&self, x: usize, y: usize) -> Vec<f64> {
        (0..self.a_arity)
            .map(|a| self.table[x][y][a].iter().sum())
            .collect()
    }

    fn b_marginal(&self, x: usize, y: usize) -> Vec<f64> {
        (0..self.b_arity)
            .map(|b| (0..self.a_arity).map(|a| self.table[x][y][a][b]).sum())
            .collect()
    }

    /// No-disturbance: P(A|XY) = P(A|X) and P(B|XY) = P(B|Y), each checked
    /// across all values of the other party's input.
    pub fn is_no_disturbance(&self, tol: f64) -> (bool, Vec<NdViolation>) {
        let mut violations = Vec::new();
        for x in 0..self.x_arity {
            for y1 in 0..self.y_arity {
                for y2 in y1 + 1..self.y_arity {
                    let m1 = self.a_marginal(x, y1);
                    let m2 = self.a_marginal(x, y2);
                    let gap = max_abs_diff(&m1, &m2);
                    if gap > tol {
                        violations.push(NdViolation {
                            output: "A".into(),
                            own_input: x,
                            other_input_a: y1,
                            other_input_b: y2,
                            max_gap: gap,
                        });
                    }
                }
            }
        }
        for y in 0..self.y_arity {
            for x1 in 0..self.x_arity {
                for x2 in x1 + 1..self.x_arity {
                    let m1 = self.b_marginal(x1, y);
                    let m2 = self.b_marginal(x2, y);
                    let gap = max_abs_diff(&m1, &m2);
                    if gap > tol {
                        violations.push(NdViolation {
                            output: "B".into(),
                            own_input: y,
                            other_input_a: x1,
                            other_input_b: x2,
                            max_gap: gap,
                        });
                    }
                }
            }
        }
        (violations.is_empty(), violations)
    }

    pub fn from_json(s: &str) -> Result<Self, CausalError> {
        Ok(serde_json::from_str(s)?)
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Factorisability verdict for a latent model against prepare-and-measure
/// statistics.
#[derive(Debug, Clone)]
pub enum FactorisabilityVerdict {
    /// A single latent prior reproduces every conditional through the
    /// stored response functions.
    Factorisable { prior: Vec<f64> },
    /// No such prior exists; `fine_tuned` marks the Appendix-style reading
    /// when the model's preparation vectors are distinct.
    NotFactorisable {
        certificate: FarkasCertificate,
        fine_tuned: bool,
    },
}

/// One row of prepare-and-measure statistics: probability of `event` in
/// `context` after `preparation`.
pub type PhenomenonRow = (String, String, Event, f64);

/// All (preparation, context, event) statistics a model generates.
pub fn phenomenon_of_model(model: &OntologicalModel) -> Vec<PhenomenonRow> {
    let mut rows = Vec::new();
    for p in model.preparations.keys() {
        for c in &model.scenario.contexts {
            for ev in context_events(c) {
                let prob = model.predict(p, &ev, &c.id).expect("validated model");
                rows.push((p.clone(), c.id.clone(), ev, prob));
            }
        }
    }
    rows
}

/// Search for one latent prior reproducing the phenomenon through the
/// model's response functions: P(O|M,P) = sum_l prior(l) xi(l) for every
/// row. The model must reproduce the rows itself first (within `tol`).
/// Infeasibility with distinct preparation vectors is the fine-tuning
/// verdict: the model hides preparation dependence that no single prior
/// can carry.
pub fn factorisable_check(
    phenomenon: &[PhenomenonRow],
    model: &OntologicalModel,
    tol: f64,
) -> Result<FactorisabilityVerdict, CausalError> {
    for (prep, ctx, ev, prob) in phenomenon {
        let predicted = model.predict(prep, ev, ctx)?;
        if (predicted - prob).abs() > tol.max(1e-12) {
            return Err(CausalError::ModelMismatch(
                format!("({prep}, {ctx}, {}:{})", ev.measurement, ev.outcome),
                (predicted - prob).abs(),
            ));
        }
    }
    let n = model.num_ontic_states;
    let mut constraints = Vec::new();
    let eps = rat_from_f64(tol);
    for (_, ctx, ev, prob) in phenomenon {
        let xi = &model.responses[&(ctx.clone(), ev.measurement.clone(), ev.outcome)];
        let coeffs: Vec<Rat> = xi.iter().map(|&x| rat_from_f64(x)).collect();
        let target = rat_from_f64(*prob);
        if tol > 0.0 {
            constraints.push(Constraint::le(coeffs.clone(), &target + &eps));
            constraints.push(Constraint::ge(coeffs, &target - &eps));
        } else {
            constraints.push(Constraint::eq(coeffs, target));
        }
    }
    constraints.push(Constraint::eq(
        vec![Rat::from_integer(1.into()); n],
        Rat::from_integer(1.into()),
    ));
    match lp::feasible(n, &constraints).expect("well-formed LP") {
        LpOutcome::Optimal { x, .. } => {
            let prior: Vec<f64> = x.iter().map(crate::rat_to_f64).collect();
            // independent soundness re-check of the returned prior
            for (_, ctx, ev, prob) in phenomenon {
                let xi = &model.responses[&(ctx.clone(), ev.measurement.clone(), ev.outcome)];
                let got = crate::linalg::dot(&prior, xi);
                debug_assert!((got - prob).abs() <= tol + 1e-9);
            }
            Ok(FactorisabilityVerdict::Factorisable { prior })
        }
        LpOutcome::Infeasible(certificate) => {
            let preps: Vec<&String> = model.preparations.keys().collect();
            let fine_tuned = preps.iter().enumerate().any(|(i, a)| {
                preps[i + 1..]
                    .iter()
                    .any(|b| max_abs_diff(&model.preparations[*a], &model.preparations[*b]) > 1e-9)
            });
            Ok(FactorisabilityVerdict::NotFactorisable {
                certificate,
                fine_tuned,
            })
        }
        LpOutcome::Unbounded => unreachable!("feasibility problem"),
    }
}

/// A finite process box: output O as a function (or conditional) of the
/// local input I and the ontic variable Q, with I and Q independent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxBehavior {
    pub input_arity: usize,
    pub output_arity: usize,
    pub ontic_arity: usize,
    pub p_input: Vec<f64>,
    pub p_ontic: Vec<f64>,
    pub deterministic: bool,
    /// deterministic: table[i][q] = o. Stochastic boxes are out of scope
    /// for the determinism analysis and are rejected there.
    pub table: Vec<Vec<usize>>,
}

impl BoxBehavior {
    pub fn validate(&self) -> Result<(), CausalError> {
        if self.table.len() != self.input_arity
            || self.table.iter().any(|row| row.len() != self.ontic_arity)
            || self.table.iter().flatten().any(|&o| o >= self.output_arity)
            || self.p_input.len() != self.input_arity
            || self.p_ontic.len() != self.ontic_arity
        {
            return Err(CausalError::BadTable);
        }
        let si: f64 = self.p_input.iter().sum();
        let sq: f64 = self.p_ontic.iter().sum();
        if (si - 1.0).abs() > crate::EPS_SUM || (sq - 1.0).abs() > crate::EPS_SUM {
            return Err(CausalError::NotNormalized(si.min(sq)));
        }
        if !self.deterministic {
            return Err(CausalError::NotDeterministic);
        }
        Ok(())
    }

    /// Joint distribution over (O, I, Q) with I and Q independent.
    pub fn joint(&self) -> Result<JointDistribution, CausalError> {
        self.validate()?;
        let vars = vec![
            ("O".to_owned(), self.output_arity),
            ("I".to_owned(), self.input_arity),
            ("Q".to_owned(), self.ontic_arity),
        ];
        let mut probs = vec![0.0; self.output_arity * self.input_arity * self.ontic_arity];
        for i in 0..self.input_arity {
            for q in 0..self.ontic_arity {
                let o = self.table[i][q];
                probs[(o * self.input_arity + i) * self.ontic_arity + q] +=
                    self.p_input[i] * self.p_ontic[q];
            }
        }
        JointDistribution::new(vars, probs)
    }

    /// |H(O) - I(O:I) - I(OI:Q)|: the decomposition identity for a
    /// deterministic box with independent input and ontic variable.
    pub fn entropy_decomposition_residual(&self) -> Result<f64, CausalError> {
        let j = self.joint()?;
        let h_o = j.entropy(&["O"])?;
        let i_oi = j.mutual_information(&["O"], &["I"])?;
        let i_oiq = j.mutual_information(&["O", "I"], &["Q"])?;
        Ok((h_o - (i_oi + i_oiq)).abs())
    }

    pub fn io_mutual_information(&self) -> Result<f64, CausalError> {
        self.joint()?.mutual_information(&["O"], &["I"])
    }

    pub fn from_json(s: &str) -> Result<Self, CausalError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("box serializes")
    }
}

/// The box that copies its input; composed in a loop it leaves the outputs
/// undetermined.
pub fn copy_box(arity: usize) -> BoxBehavior {
    BoxBehavior {
        input_arity: arity,
        output_arity: arity,
        ontic_arity: 2,
        p_input: vec![1.0 / arity as f64; arity],
        p_ontic: vec![0.5, 0.5],
        deterministic: true,
        table: (0..arity).map(|i| vec![i; 2]).collect(),
    }
}

/// Binary box o = i xor q with the given ontic bias.
pub fn xor_box(q_bias: f64) -> BoxBehavior {
    BoxBehavior {
        input_arity: 2,
        output_arity: 2,
        ontic_arity: 2,
        p_input: vec![0.5, 0.5],
        p_ontic: vec![1.0 - q_bias, q_bias],
        deterministic: true,
        table: vec![vec![0, 1], vec![1, 0]],
    }
}

/// Two boxes wired in a loop: X's output feeds Y's input and vice versa.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoopComposition {
    pub box_x: BoxBehavior,
    pub box_y: BoxBehavior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FixedPointClass {
    Unique,
    None,
    Multiple,
}

#[derive(Debug, Clone)]
pub struct LoopAnalysis {
    /// Classification per ontic pair (q_x, q_y).
    pub classes: Vec<((usize, usize), FixedPointClass)>,
    pub unique_everywhere: bool,
    /// Joint over (OX, OY, QX, QY) when every pair has a unique fixed
    /// point; the loop then certifies H(OX OY | QX QY) = 0.
    pub joint: Option<JointDistribution>,
    pub conditional_entropy: Option<f64>,
}

impl LoopComposition {
    pub fn self_composition(b: &BoxBehavior) -> Self {
        LoopComposition {
            box_x: b.clone(),
            box_y: b.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), CausalError> {
        self.box_x.validate()?;
        self.box_y.validate()?;
        if self.box_x.output_arity != self.box_y.input_arity {
            return Err(CausalError::WiringMismatch(
                self.box_x.output_arity,
                self.box_y.input_arity,
            ));
        }
        if self.box_y.output_arity != self.box_x.input_arity {
            return Err(CausalError::WiringMismatch(
                self.box_y.output_arity,
                self.box_x.input_arity,
            ));
        }
        Ok(())
    }

    /// Solve o_x = f_X(o_y, q_x), o_y = f_Y(o_x, q_y) for every ontic pair.
    pub fn fixed_points(&self) -> Result<LoopAnalysis, CausalError> {
        self.validate()?;
        let mut classes = Vec::new();
        let mut solutions: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
        for qx in 0..self.box_x.ontic_arity {
            for qy in 0..self.box_y.ontic_arity {
                let mut found = Vec::new();
                for ox in 0..self.box_x.output_arity {
                    for oy in 0..self.box_y.output_arity {
                        if self.box_x.table[oy][qx] == ox && self.box_y.table[ox][qy] == oy {
                            found.push((ox, oy));
                        }
                    }
                }
                let class = match found.len() {
                    0 => FixedPointClass::None,
                    1 => {
                        solutions.insert((qx, qy), found[0]);
                        FixedPointClass::Unique
                    }
                    _ => FixedPointClass::Multiple,
                };
                classes.push(((qx, qy), class));
            }
        }
        let unique_everywhere = classes.iter().all(|(_, c)| *c == FixedPointClass::Unique);
        let (joint, conditional_entropy) = if unique_everywhere {
            let vars = vec![
                ("OX".to_owned(), self.box_x.output_arity),
                ("OY".to_owned(), self.box_y.output_arity),
                ("QX".to_owned(), self.box_x.ontic_arity),
                ("QY".to_owned(), self.box_y.ontic_arity),
            ];
            let arities: Vec<usize> = vars.iter().map(|(_, a)| *a).collect();
            let mut probs = vec![0.0; arities.iter().product::<usize>()];
            for ((qx, qy), (ox, oy)) in &solutions {
                let idx = crate::empirical::tuple_index(&[*ox, *oy, *qx, *qy], &arities);
                probs[idx] += self.box_x.p_ontic[*qx] * self.box_y.p_ontic[*qy];
            }
            let j = JointDistribution::new(vars, probs)?;
            let h = j.conditional_entropy(&["OX", "OY"], &["QX", "QY"])?;
            (Some(j), Some(h))
        } else {
            (None, None)
        };
        Ok(LoopAnalysis {
            classes,
            unique_everywhere,
            joint,
            conditional_entropy,
        })
    }
}

/// One evaluated step of the determinism audit.
#[derive(Debug, Clone, Serialize)]
pub struct AuditStep {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub steps: Vec<AuditStep>,
    /// True when every ontic pair of the self-composed loop has a unique
    /// fixed point (the global-determinism requirement).
    pub determinism_holds: bool,
    pub io_mutual_information: f64,
    /// Whether the chain forces I(O:I) = 0 for this box.
    pub forces_independence: bool,
}

/// Evaluate the entropy chain on the loop composition of two copies of the
/// box. When the loop is deterministic (unique fixed points) the chain
/// bounds I(O:I) by zero; a box with I(O:I) > 0 shows up as a loop with
/// missing or multiple fixed points, i.e. global determinism fails.
pub fn determinism_audit(b: &BoxBehavior) -> Result<AuditReport, CausalError> {
    let mut steps = Vec::new();
    let residual = b.entropy_decomposition_residual()?;
    steps.push(AuditStep {
        name: "entropy_decomposition_residual".into(),
        lhs: residual,
        rhs: 0.0,
        slack: residual,
    });
    let joint = b.joint()?;
    let h_o = joint.entropy(&["O"])?;
    let i_oi = joint.mutual_information(&["O"], &["I"])?;
    let i_oiq = joint.mutual_information(&["O", "I"], &["Q"])?;
    let analysis = LoopComposition::self_composition(b).fixed_points()?;
    if let (Some(lj), Some(h_cond)) = (&analysis.joint, analysis.conditional_entropy) {
        steps.push(AuditStep {
            name: "loop_conditional_entropy".into(),
            lhs: h_cond,
            rhs: 0.0,
            slack: h_cond,
        });
        let h_oxoy = lj.entropy(&["OX", "OY"])?;
        let i_out_ontic = lj.mutual_information(&["OX", "OY"], &["QX", "QY"])?;
        steps.push(AuditStep {
            name: "joint_output_entropy_equals_ontic_information".into(),
            lhs: h_oxoy,
            rhs: i_out_ontic,
            slack: (h_oxoy - i_out_ontic).abs(),
        });
        // the construction reads I(OX:OY) as the box's I(O:I); computed on
        // both sides rather than assumed
        let i_oxoy = lj.mutual_information(&["OX"], &["OY"])?;
        steps.push(AuditStep {
            name: "loop_output_correlation_vs_box_io_information".into(),
            lhs: i_oxoy,
            rhs: i_oi,
            slack: (i_oxoy - i_oi).abs(),
        });
        steps.push(AuditStep {
            name: "ontic_information_bound".into(),
            lhs: i_out_ontic,
            rhs: 2.0 * i_oiq,
            slack: 2.0 * i_oiq - i_out_ontic,
        });
        let lhs_chain = 2.0 * h_o - i_oi;
        let rhs_chain = 2.0 * h_o - 2.0 * i_oi;
        steps.push(AuditStep {
            name: "combined_chain".into(),
            lhs: lhs_chain,
            rhs: rhs_chain,
            slack: rhs_chain - lhs_chain,
        });
    }
    Ok(AuditReport {
        steps,
        determinism_holds: analysis.unique_everywhere,
        io_mutual_information: i_oi,
        forces_independence: analysis.unique_everywhere,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_basics() {
        let coin = JointDistribution::new(vec![("X".into(), 2)], vec![0.5, 0.5]).unwrap();
        assert!((coin.entropy(&["X"]).unwrap() - 1.0).abs() < 1e-12);

        let indep =
            JointDistribution::new(vec![("X".into(), 2), ("Y".into(), 2)], vec![0.25; 4]).unwrap();
        assert!(indep.mutual_information(&["X"], &["Y"]).unwrap().abs() < 1e-12);

        let corr = JointDistribution::new(
            vec![("X".into(), 2), ("Y".into(), 2)],
            vec![0.5, 0.0, 0.0, 0.5],
        )
        .unwrap();
        assert!((corr.mutual_information(&["X"], &["Y"]).unwrap() - 1.0).abs() < 1e-12);
        assert!(corr.conditional_entropy(&["X"], &["Y"]).unwrap().abs() < 1e-12);
        assert!(corr.entropy(&["Z"]).is_err());
    }

    fn pr_phenomenon() -> Phenomenon {
        let mut table = vec![vec![vec![vec![0.0; 2]; 2]; 2]; 2];
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        if (a ^ b) == (x & y) {
                            table[x][y][a][b] = 0.5;
                        }
                    }
                }
            }
        }
        Phenomenon {
            x_arity: 2,
            y_arity: 2,
            a_arity: 2,
            b_arity: 2,
            table,
        }
    }

    #[test]
    fn pr_box_is_no_disturbance() {
        let p = pr_phenomenon();
        p.validate().unwrap();
        let (ok, v) = p.is_no_disturbance(1e-9);
        assert!(ok, "{v:?}");
    }

    #[test]
    fn signalling_box_is_flagged_with_witness() {
        let mut p = pr_phenomenon();
        // make A's marginal depend on Y when x = 0
        p.table[0][1] = vec![vec![0.8, 0.0], vec![0.0, 0.2]];
        let (ok, v) = p.is_no_disturbance(1e-9);
        assert!(!ok);
        assert!(v.iter().any(|w| w.output == "A" && w.own_input == 0));
    }

    #[test]
    fn trivial_output_phenomenon_is_no_disturbance() {
        // B is the always-occurring trivial event (arity 1)
        let table = vec![vec![vec![vec![1.0], vec![0.0]], vec![vec![0.3], vec![0.7]]]];
        let p = Phenomenon {
            x_arity: 1,
            y_arity: 2,
            a_arity: 2,
            b_arity: 1,
            table,
        };
        p.validate().unwrap();
        // P(A|XY) varies with Y here, so this signals; with identical
        // conditionals it must pass
        let table2 = vec![vec![vec![vec![0.3], vec![0.7]], vec![vec![0.3], vec![0.7]]]];
        let p2 = Phenomenon {
            x_arity: 1,
            y_arity: 2,
            a_arity: 2,
            b_arity: 1,
            table: table2,
        };
        let (ok, _) = p2.is_no_disturbance(1e-9);
        assert!(ok);
        assert!(!p.is_no_disturbance(1e-9).0);
    }

    #[test]
    fn xor_box_identity_holds() {
        let b = xor_box(0.5);
        assert!(b.entropy_decomposition_residual().unwrap() < 1e-12);
        let j = b.joint().unwrap();
        assert!((j.entropy(&["O"]).unwrap() - 1.0).abs() < 1e-12);
        assert!(j.mutual_information(&["O"], &["I"]).unwrap() < 1e-12);
    }

    #[test]
    fn constant_and_copy_identities() {
        let mut constant = copy_box(2);
        constant.table = vec![vec![1, 1], vec![1, 1]];
        assert!(constant.entropy_decomposition_residual().unwrap() < 1e-12);
        assert!(constant.joint().unwrap().entropy(&["O"]).unwrap() < 1e-12);

        let copy = copy_box(2);
        assert!(copy.entropy_decomposition_residual().unwrap() < 1e-12);
        let j = copy.joint().unwrap();
        assert!((j.mutual_information(&["O"], &["I"]).unwrap() - 1.0).abs() < 1e-12);
        assert!(j.mutual_information(&["O", "I"], &["Q"]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn loop_classifications() {
        // both boxes ignore their input: unique everywhere
        let mut ignore = copy_box(2);
        ignore.table = vec![vec![0, 1], vec![0, 1]]; // o = q
        let analysis = LoopComposition::self_composition(&ignore)
            .fixed_points()
            .unwrap();
        assert!(analysis.unique_everywhere);
        assert!(analysis.conditional_entropy.unwrap() < 1e-12);

        // copy loop: multiple everywhere
        let copy = copy_box(2);
        let analysis = LoopComposition::self_composition(&copy)
            .fixed_points()
            .unwrap();
        assert!(analysis
            .classes
            .iter()
            .all(|(_, c)| *c == FixedPointClass::Multiple));

        // negation against identity: no fixed point anywhere
        let mut neg = copy_box(2);
        neg.table = vec![vec![1, 1], vec![0, 0]];
        let l = LoopComposition {
            box_x: copy.clone(),
            box_y: neg,
        };
        let analysis = l.fixed_points().unwrap();
        assert!(analysis
            .classes
            .iter()
            .all(|(_, c)| *c == FixedPointClass::None));

        // identity against identity: multiple for all q
        let l2 = LoopComposition {
            box_x: copy.clone(),
            box_y: copy,
        };
        assert!(l2
            .fixed_points()
            .unwrap()
            .classes
            .iter()
            .all(|(_, c)| *c == FixedPointClass::Multiple));
    }

    #[test]
    fn audit_accepts_independent_box_and_flags_copy_box() {
        let mut ignore = copy_box(2);
        ignore.table = vec![vec![0, 1], vec![0, 1]];
        let report = determinism_audit(&ignore).unwrap();
        assert!(report.determinism_holds);
        assert!(report.io_mutual_information < 1e-12);
        assert!(report
            .steps
            .iter()
            .any(|s| s.name == "loop_conditional_entropy" && s.lhs < 1e-10));

        let report = determinism_audit(&copy_box(2)).unwrap();
        assert!(!report.determinism_holds);
        assert!((report.io_mutual_information - 1.0).abs() < 1e-12);

        let mut stochastic = copy_box(2);
        stochastic.deterministic = false;
        assert!(matches!(
            determinism_audit(&stochastic),
            Err(CausalError::NotDeterministic)
        ));
    }

    #[test]
    fn factorisability_of_identical_and_distinct_preparations() {
        let model = crate::counterfactual::six_state_ontological_model();
        let phenomenon = phenomenon_of_model(&model);
        match factorisable_check(&phenomenon, &model, 0.0).unwrap() {
            FactorisabilityVerdict::NotFactorisable {
                fine_tuned,
                certificate,
            } => {
                assert!(fine_tuned);
                assert!(!certificate.multipliers.is_empty());
            }
            _ => panic!("six-state statistics cannot come from one prior"),
        }

        // identical-mu control: every preparation the uniform distribution
        let mut control = model.clone();
        let uniform = vec![1.0 / 8.0; 8];
        for v in control.preparations.values_mut() {
            *v = uniform.clone();
        }
        let phenomenon = phenomenon_of_model(&control);
        match factorisable_check(&phenomenon, &control, 0.0).unwrap() {
            FactorisabilityVerdict::Factorisable { prior } => {
                // the returned prior reproduces every conditional
                for (_, ctx, ev, prob) in &phenomenon {
                    let xi = &control.responses[&(ctx.clone(), ev.measurement.clone(), ev.outcome)];
                    assert!((crate::linalg::dot(&prior, xi) - prob).abs() < 1e-9);
                }
            }
            _ => panic!("identical preparations factorize trivially"),
        }
    }

    #[test]
    fn mismatched_phenomenon_is_a_precondition_error() {
        let model = crate::counterfactual::six_state_ontological_model();
        let mut phenomenon = phenomenon_of_model(&model);
        phenomenon[0].3 += 0.25;
        assert!(matches!(
            factorisable_check(&phenomenon, &model, 0.0),
            Err(CausalError::ModelMismatch(..))
        ));
    }

    #[test]
    fn no_disturbance_is_relabeling_invariant() {
        let p = pr_phenomenon();
        // swap x labels and a labels
        let mut relabeled = p.clone();
        relabeled.table.swap(0, 1);
        for x in 0..2 {
            for y in 0..2 {
                relabeled.table[x][y].swap(0, 1);
            }
        }
        assert_eq!(
            p.is_no_disturbance(1e-9).0,
            relabeled.is_no_disturbance(1e-9).0
        );

        let mut signalling = pr_phenomenon();
        signalling.table[0][1] = vec![vec![0.8, 0.0], vec![0.0, 0.2]];
        let mut relabeled = signalling.clone();
        relabeled.table.swap(0, 1);
        assert_eq!(
            signalling.is_no_disturbance(1e-9).0,
            relabeled.is_no_disturbance(1e-9).0
        );
    }

    #[test]
    fn phenomenon_parses_from_json() {
        let j = serde_json::to_string(&pr_phenomenon()).unwrap();
        let p = Phenomenon::from_json(&j).unwrap();
        p.validate().unwrap();
        assert!(p.is_no_disturbance(1e-9).0);
    }

    #[test]
    fn box_json_round_trip() {
        let b = copy_box(3);
        let j = b.to_json();
        let b2 = BoxBehavior::from_json(&j).unwrap();
        assert_eq!(b2.table, b.table);
        b2.validate().unwrap();
    }
}
