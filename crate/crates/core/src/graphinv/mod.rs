//! Exclusivity graphs and their contextuality invariants.
//!
//! Vertices are measurement events carrying probabilities `p_v` in `[0,1]`;
//! hyperedges are contexts. Pairwise adjacency is derived from
//! co-membership in some hyperedge. The three bounds on the witness sum
//! (independence number, Lovász number, fractional packing number) each
//! come with a certificate, and the chain `alpha <= theta <= v_F` is a
//! theorem this module's tests exercise on random instances.
//!
//! Input files may list plain edges; a 2-element hyperedge is exactly that,
//! so the pairwise form needs no special casing.

mod cliques;
mod mis;
mod nchv;
mod packing;
mod theta;

pub use cliques::maximal_cliques;
pub use mis::{independence_number, WeightedIndependentSet};
pub use nchv::{nchv_exists, NchvResult};
pub use packing::{fractional_packing_number, packing_is_feasible, PackingResult};
pub use theta::{lovasz_number, odd_cycle_theta, ThetaOptions, ThetaResult};

use crate::Rat;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Hard limit imposed by the bitmask adjacency representation.
pub const MAX_VERTICES: usize = 64;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("instance too large: {what} ({got} > cap {cap})")]
    TooLarge {
        what: &'static str,
        got: usize,
        cap: usize,
    },
    #[error("vertex weight {0} outside [0,1]")]
    BadWeight(f64),
    #[error("unknown vertex id {0}")]
    UnknownVertex(String),
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(String),
    #[error("theta solver did not reach the gap target; best bracket [{lower}, {upper}]")]
    ThetaNoConvergence { lower: f64, upper: f64 },
    #[error("invalid graph json: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Weighted event graph with hyperedge (context) structure.
#[derive(Debug, Clone)]
pub struct ExclusivityGraph {
    ids: Vec<String>,
    weights: Vec<f64>,
    hyperedges: Vec<Vec<usize>>,
    adj: Vec<u64>,
    maximal_scenario: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphFile {
    vertices: Vec<VertexFile>,
    hyperedges: Vec<Vec<String>>,
    #[serde(default)]
    maximal: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VertexFile {
    id: String,
    weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum ModelViolation {
    WeightOutOfRange { vertex: String, weight: f64 },
    EdgeSumExceedsOne { hyperedge: usize, sum: f64 },
    EdgeSumNotOne { hyperedge: usize, sum: f64 },
}

impl fmt::Display for ModelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelViolation::WeightOutOfRange { vertex, weight } => {
                write!(f, "vertex {vertex} has weight {weight} outside [0,1]")
            }
            ModelViolation::EdgeSumExceedsOne { hyperedge, sum } => {
                write!(f, "hyperedge #{hyperedge} sums to {sum} > 1")
            }
            ModelViolation::EdgeSumNotOne { hyperedge, sum } => {
                write!(
                    f,
                    "hyperedge #{hyperedge} sums to {sum} != 1 (maximal scenario)"
                )
            }
        }
    }
}

impl ExclusivityGraph {
    pub fn new(
        ids: Vec<String>,
        weights: Vec<f64>,
        hyperedges: Vec<Vec<usize>>,
        maximal_scenario: bool,
    ) -> Self {
        assert!(
            ids.len() <= MAX_VERTICES,
            "at most {MAX_VERTICES} vertices supported"
        );
        assert_eq!(ids.len(), weights.len());
        let mut adj = vec![0u64; ids.len()];
        for e in &hyperedges {
            for &u in e {
                for &v in e {
                    if u != v {
                        adj[u] |= 1 << v;
                    }
                }
            }
        }
        ExclusivityGraph {
            ids,
            weights,
            hyperedges,
            adj,
            maximal_scenario,
        }
    }

    pub fn from_json(s: &str) -> Result<Self, GraphError> {
        let file: GraphFile = serde_json::from_str(s)?;
        if file.vertices.len() > MAX_VERTICES {
            return Err(GraphError::TooLarge {
                what: "vertices",
                got: file.vertices.len(),
                cap: MAX_VERTICES,
            });
        }
        let mut ids = Vec::new();
        let mut weights = Vec::new();
        let mut seen = BTreeSet::new();
        for v in &file.vertices {
            if !seen.insert(v.id.clone()) {
                return Err(GraphError::DuplicateVertex(v.id.clone()));
            }
            if !(0.0..=1.0).contains(&v.weight) {
                return Err(GraphError::BadWeight(v.weight));
            }
            ids.push(v.id.clone());
            weights.push(v.weight);
        }
        let mut hyperedges = Vec::new();
        for e in &file.hyperedges {
            let mut edge = Vec::new();
            for m in e {
                let idx = ids
                    .iter()
                    .position(|i| i == m)
                    .ok_or_else(|| GraphError::UnknownVertex(m.clone()))?;
                edge.push(idx);
            }
            hyperedges.push(edge);
        }
        Ok(ExclusivityGraph::new(
            ids,
            weights,
            hyperedges,
            file.maximal,
        ))
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            vertices: self
                .ids
                .iter()
                .zip(&self.weights)
                .map(|(id, w)| VertexFile {
                    id: id.clone(),
                    weight: *w,
                })
                .collect(),
            hyperedges: self
                .hyperedges
                .iter()
                .map(|e| e.iter().map(|&v| self.ids[v].clone()).collect())
                .collect(),
            maximal: self.maximal_scenario,
        };
        serde_json::to_string_pretty(&file).expect("graph serializes")
    }

    pub fn num_vertices(&self) -> usize {
        self.ids.len()
    }

    pub fn num_edges(&self) -> usize {
        let mut n = 0;
        for u in 0..self.ids.len() {
            n += (self.adj[u] >> (u + 1)).count_ones() as usize;
        }
        n
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        u != v && (self.adj[u] >> v) & 1 == 1
    }

    pub fn neighbors_mask(&self, v: usize) -> u64 {
        self.adj[v]
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.ids
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn set_weights(&mut self, weights: Vec<f64>) {
        assert_eq!(weights.len(), self.ids.len());
        self.weights = weights;
    }

    pub fn with_unit_weights(&self) -> Self {
        let mut g = self.clone();
        g.weights = vec![1.0; g.ids.len()];
        g
    }

    pub fn hyperedges(&self) -> &[Vec<usize>] {
        &self.hyperedges
    }

    pub fn is_maximal_scenario(&self) -> bool {
        self.maximal_scenario
    }

    /// The witness: the plain sum of all vertex weights.
    pub fn witness_sigma(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Probabilistic-model validity: weights in range, and per-hyperedge
    /// sums at most one (exactly one, within `tol`, for maximal scenarios).
    pub fn is_probabilistic_model(&self, tol: f64) -> (bool, Vec<ModelViolation>) {
        let mut violations = Vec::new();
        for (v, w) in self.weights.iter().enumerate() {
            if !(-tol..=1.0 + tol).contains(w) {
                violations.push(ModelViolation::WeightOutOfRange {
                    vertex: self.ids[v].clone(),
                    weight: *w,
                });
            }
        }
        for (i, e) in self.hyperedges.iter().enumerate() {
            let sum: f64 = e.iter().map(|&v| self.weights[v]).sum();
            if self.maximal_scenario {
                if (sum - 1.0).abs() > tol {
                    violations.push(ModelViolation::EdgeSumNotOne { hyperedge: i, sum });
                }
            } else if sum > 1.0 + tol {
                violations.push(ModelViolation::EdgeSumExceedsOne { hyperedge: i, sum });
            }
        }
        (violations.is_empty(), violations)
    }

    /// The Exclusivity condition: every clique's weight sum is at most one.
    /// Checking maximal cliques suffices.
    pub fn exclusivity_check(&self, tol: f64, clique_cap: usize) -> Result<bool, GraphError> {
        let cliques = maximal_cliques(self, clique_cap)?;
        Ok(cliques.iter().all(|c| {
            let sum: f64 = iter_bits(*c).map(|v| self.weights[v]).sum();
            sum <= 1.0 + tol
        }))
    }

    /// DOT rendering: one node per vertex (weight as label), one undirected
    /// edge per adjacent pair, hyperedges listed as comments.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph exclusivity {\n");
        for (i, e) in self.hyperedges.iter().enumerate() {
            let names: Vec<&str> = e.iter().map(|&v| self.ids[v].as_str()).collect();
            out.push_str(&format!("  // hyperedge {}: {}\n", i, names.join(" ")));
        }
        for (v, id) in self.ids.iter().enumerate() {
            out.push_str(&format!(
                "  \"{}\" [label=\"{} ({})\"];\n",
                id, id, self.weights[v]
            ));
        }
        for u in 0..self.ids.len() {
            for v in u + 1..self.ids.len() {
                if self.adjacent(u, v) {
                    out.push_str(&format!("  \"{}\" -- \"{}\";\n", self.ids[u], self.ids[v]));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Iterate set bits of a mask as vertex indices.
pub(crate) fn iter_bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |&i| (mask >> i) & 1 == 1)
}

/// Resource caps for the graph algorithms.
#[derive(Debug, Clone)]
pub struct GraphCaps {
    pub mis_vertices: usize,
    pub nchv_vertices: usize,
    pub clique_count: usize,
    pub theta_vertices: usize,
}

impl Default for GraphCaps {
    fn default() -> Self {
        GraphCaps {
            mis_vertices: 40,
            nchv_vertices: 40,
            clique_count: 100_000,
            theta_vertices: 25,
        }
    }
}

/// All three invariants with certificates, evaluated at the supplied vertex
/// weights.
#[derive(Debug, Clone)]
pub struct InvariantResult {
    pub alpha: WeightedIndependentSet,
    pub theta: ThetaResult,
    pub vf: PackingResult,
}

impl InvariantResult {
    /// The chain alpha <= theta <= v_F, allowing the theta bracket width on
    /// each comparison.
    pub fn squeeze_holds(&self, theta_tol: f64) -> bool {
        let vf = crate::rat_to_f64(&self.vf.value);
        self.alpha.value <= self.theta.upper + theta_tol && self.theta.lower <= vf + theta_tol
    }
}

pub fn invariants(
    g: &ExclusivityGraph,
    caps: &GraphCaps,
    theta_opts: &ThetaOptions,
) -> Result<InvariantResult, GraphError> {
    let alpha = independence_number(g, caps.mis_vertices)?;
    let theta = lovasz_number(g, caps.theta_vertices, theta_opts)?;
    let vf = fractional_packing_number(g, caps.clique_count)?;
    Ok(InvariantResult { alpha, theta, vf })
}

/// Exact weighted sum helper for certificates expressed over rationals.
pub(crate) fn rat_weights(g: &ExclusivityGraph) -> Vec<Rat> {
    g.weights()
        .iter()
        .map(|w| crate::rat_from_f64(*w))
        .collect()
}
