//! Fractional packing number: the Exclusivity-only bound on the witness,
//! computed as an exact rational LP over the maximal-clique constraints.

use super::{iter_bits, maximal_cliques, rat_weights, ExclusivityGraph, GraphError};
use crate::lp::{self, Constraint, LpOutcome};
use crate::Rat;
use num_traits::One;

#[derive(Debug, Clone)]
pub struct PackingResult {
    pub value: Rat,
    /// The optimal packing q_v, one entry per vertex.
    pub packing: Vec<Rat>,
}

/// max sum_v p_v q_v subject to sum_{v in C} q_v <= 1 for every maximal
/// clique C, q >= 0. Weights are converted to rationals exactly, so the
/// value is exact.
pub fn fractional_packing_number(
    g: &ExclusivityGraph,
    clique_cap: usize,
) -> Result<PackingResult, GraphError> {
    let n = g.num_vertices();
    let cliques = maximal_cliques(g, clique_cap)?;
    let mut constraints = Vec::with_capacity(cliques.len());
    for c in &cliques {
        let mut coeffs = vec![Rat::from_integer(0.into()); n];
        for v in iter_bits(*c) {
            coeffs[v] = Rat::one();
        }
        constraints.push(Constraint::le(coeffs, Rat::one()));
    }
    let objective = rat_weights(g);
    match lp::solve(n, &constraints, &objective).expect("well-formed LP") {
        LpOutcome::Optimal { x, value } => Ok(PackingResult { value, packing: x }),
        LpOutcome::Unbounded => unreachable!("every vertex lies in some maximal clique"),
        LpOutcome::Infeasible(_) => unreachable!("q = 0 is always feasible"),
    }
}

/// Exact feasibility re-check of a packing certificate against the clique
/// constraints.
pub fn packing_is_feasible(
    g: &ExclusivityGraph,
    packing: &[Rat],
    clique_cap: usize,
) -> Result<bool, GraphError> {
    use num_traits::Signed;
    let cliques = maximal_cliques(g, clique_cap)?;
    if packing.iter().any(|q| q.is_negative()) {
        return Ok(false);
    }
    for c in &cliques {
        let sum: Rat = iter_bits(*c).map(|v| packing[v].clone()).sum();
        if sum > Rat::one() {
            return Ok(false);
        }
    }
    Ok(true)
}
