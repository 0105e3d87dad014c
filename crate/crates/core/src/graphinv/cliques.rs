//! Maximal clique enumeration (Bron-Kerbosch with pivoting) over the
//! bitmask adjacency representation.

use super::{iter_bits, ExclusivityGraph, GraphError};

/// Enumerate all maximal cliques as vertex bitmasks. Isolated vertices come
/// back as singleton cliques. Errors out when the count exceeds `cap`.
pub fn maximal_cliques(g: &ExclusivityGraph, cap: usize) -> Result<Vec<u64>, GraphError> {
    let n = g.num_vertices();
    if n == 0 {
        return Ok(vec![]);
    }
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut out = Vec::new();
    expand(g, 0, full, 0, &mut out, cap)?;
    Ok(out)
}

fn expand(
    g: &ExclusivityGraph,
    r: u64,
    mut p: u64,
    mut x: u64,
    out: &mut Vec<u64>,
    cap: usize,
) -> Result<(), GraphError> {
    if p == 0 && x == 0 {
        if out.len() >= cap {
            return Err(GraphError::TooLarge {
                what: "maximal cliques",
                got: cap + 1,
                cap,
            });
        }
        out.push(r);
        return Ok(());
    }
    // pivot on the vertex of P union X with the most neighbors in P
    let pivot = iter_bits(p | x)
        .max_by_key(|&u| (g.neighbors_mask(u) & p).count_ones())
        .expect("nonempty");
    let candidates = p & !g.neighbors_mask(pivot);
    for v in iter_bits(candidates) {
        let nv = g.neighbors_mask(v);
        expand(g, r | (1 << v), p & nv, x & nv, out, cap)?;
        p &= !(1 << v);
        x |= 1 << v;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphinv::tests::cycle;
    use crate::graphinv::ExclusivityGraph;

    #[test]
    fn five_cycle_cliques_are_its_edges() {
        let g = cycle(5);
        let mut cl = maximal_cliques(&g, 1000).unwrap();
        cl.sort();
        assert_eq!(cl.len(), 5);
        for c in cl {
            assert_eq!(c.count_ones(), 2);
        }
    }

    #[test]
    fn complete_graph_single_clique() {
        let ids = (0..4).map(|i| format!("v{i}")).collect();
        let g = ExclusivityGraph::new(ids, vec![1.0; 4], vec![vec![0, 1, 2, 3]], true);
        let cl = maximal_cliques(&g, 1000).unwrap();
        assert_eq!(cl, vec![0b1111]);
    }

    #[test]
    fn isolated_vertices_are_singletons() {
        let g = ExclusivityGraph::new(vec!["a".into(), "b".into()], vec![1.0, 1.0], vec![], false);
        let mut cl = maximal_cliques(&g, 1000).unwrap();
        cl.sort();
        assert_eq!(cl, vec![0b01, 0b10]);
    }

    #[test]
    fn cap_is_enforced() {
        let g = cycle(6);
        assert!(matches!(
            maximal_cliques(&g, 3),
            Err(GraphError::TooLarge {
                what: "maximal cliques",
                ..
            })
        ));
    }
}
