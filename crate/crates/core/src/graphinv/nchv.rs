//! Search for non-contextual hidden-variable models: 0/1 vertex
//! assignments respecting the per-context constraints.

use super::{ExclusivityGraph, GraphError};

#[derive(Debug, Clone)]
pub struct NchvResult {
    /// A satisfying 0/1 assignment, if one exists.
    pub assignment: Option<Vec<u8>>,
    /// Search nodes visited; together with `assignment == None` this is the
    /// exhaustion proof.
    pub nodes_explored: u64,
}

/// Backtracking over 0/1 assignments in declaration order.
///
/// Maximal scenarios require exactly one assigned vertex per hyperedge;
/// otherwise hyperedge sums must stay at most one.
pub fn nchv_exists(g: &ExclusivityGraph, vertex_cap: usize) -> Result<NchvResult, GraphError> {
    let n = g.num_vertices();
    if n > vertex_cap {
        return Err(GraphError::TooLarge {
            what: "nchv vertices",
            got: n,
            cap: vertex_cap,
        });
    }
    let mut assign = vec![0u8; n];
    let mut edge_sum = vec![0u32; g.hyperedges().len()];
    // vertex -> hyperedges containing it
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ei, e) in g.hyperedges().iter().enumerate() {
        for &v in e {
            touching[v].push(ei);
        }
    }
    // per hyperedge, the index of its last member in declaration order:
    // once that vertex is assigned the edge sum is final
    let last_member: Vec<usize> = g
        .hyperedges()
        .iter()
        .map(|e| e.iter().copied().max().unwrap_or(0))
        .collect();
    let mut nodes = 0u64;
    let found = search(
        g,
        0,
        &mut assign,
        &mut edge_sum,
        &touching,
        &last_member,
        &mut nodes,
    );
    Ok(NchvResult {
        assignment: found.then(|| assign.clone()),
        nodes_explored: nodes,
    })
}

#[allow(clippy::too_many_arguments)]
fn search(
    g: &ExclusivityGraph,
    v: usize,
    assign: &mut [u8],
    edge_sum: &mut [u32],
    touching: &[Vec<usize>],
    last_member: &[usize],
    nodes: &mut u64,
) -> bool {
    *nodes += 1;
    if v == g.num_vertices() {
        return true;
    }
    'values: for value in [0u8, 1u8] {
        assign[v] = value;
        for &ei in &touching[v] {
            edge_sum[ei] += value as u32;
        }
        let mut ok = true;
        for &ei in &touching[v] {
            if edge_sum[ei] > 1 {
                ok = false;
                break;
            }
            if g.is_maximal_scenario() && last_member[ei] == v && edge_sum[ei] != 1 {
                ok = false;
                break;
            }
        }
        if ok && search(g, v + 1, assign, edge_sum, touching, last_member, nodes) {
            return true;
        }
        for &ei in &touching[v] {
            edge_sum[ei] -= value as u32;
        }
        if !ok {
            continue 'values;
        }
    }
    assign[v] = 0;
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphinv::tests::cycle;
    use crate::graphinv::ExclusivityGraph;

    #[test]
    fn triangle_single_hyperedge_has_model() {
        let g = ExclusivityGraph::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![1.0; 3],
            vec![vec![0, 1, 2]],
            true,
        );
        let r = nchv_exists(&g, 40).unwrap();
        let a = r.assignment.unwrap();
        assert_eq!(a.iter().map(|&x| x as u32).sum::<u32>(), 1);
    }

    #[test]
    fn odd_cycle_exactly_one_unsatisfiable() {
        let r = nchv_exists(&cycle(5), 40).unwrap();
        assert!(r.assignment.is_none());
        assert!(r.nodes_explored > 1);
    }

    #[test]
    fn even_cycle_satisfiable() {
        let r = nchv_exists(&cycle(6), 40).unwrap();
        assert_eq!(r.assignment.unwrap(), vec![0, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn non_maximal_always_has_all_zero() {
        let mut g = cycle(5);
        g.maximal_scenario = false;
        let r = nchv_exists(&g, 40).unwrap();
        assert_eq!(r.assignment.unwrap(), vec![0; 5]);
    }

    #[test]
    fn assignment_is_a_probabilistic_model_and_independent() {
        let g = cycle(6);
        let a = nchv_exists(&g, 40).unwrap().assignment.unwrap();
        let mut g2 = g.clone();
        g2.set_weights(a.iter().map(|&x| x as f64).collect());
        assert!(g2.is_probabilistic_model(1e-9).0);
        let chosen: Vec<usize> = a
            .iter()
            .enumerate()
            .filter(|(_, &x)| x == 1)
            .map(|(i, _)| i)
            .collect();
        assert!(super::super::mis::is_independent(&g, &chosen));
        // NCHV value is an independent-set weight, so alpha bounds it
        let alpha = super::super::independence_number(&g, 40).unwrap();
        assert!(g2.witness_sigma() <= alpha.value + 1e-12);
    }
}
