//! Exact weighted maximum independent set by branch and bound.

use super::{iter_bits, ExclusivityGraph, GraphError};

#[derive(Debug, Clone)]
pub struct WeightedIndependentSet {
    pub value: f64,
    /// Vertex indices of a maximum-weight independent set, ascending.
    pub vertices: Vec<usize>,
}

/// Branch and bound over candidate masks. Branching follows declaration
/// order (take the lowest candidate first), so ties resolve reproducibly.
/// The bound is the total remaining candidate weight.
pub fn independence_number(
    g: &ExclusivityGraph,
    vertex_cap: usize,
) -> Result<WeightedIndependentSet, GraphError> {
    let n = g.num_vertices();
    if n > vertex_cap {
        return Err(GraphError::TooLarge {
            what: "independent-set vertices",
            got: n,
            cap: vertex_cap,
        });
    }
    let full: u64 = if n == 0 {
        0
    } else if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    };
    let mut best = Best {
        value: 0.0,
        mask: 0,
    };
    branch(g, full, 0, 0.0, &mut best);
    let vertices: Vec<usize> = iter_bits(best.mask).collect();
    debug_assert!(is_independent(g, &vertices));
    Ok(WeightedIndependentSet {
        value: best.value,
        vertices,
    })
}

struct Best {
    value: f64,
    mask: u64,
}

fn branch(g: &ExclusivityGraph, candidates: u64, chosen: u64, weight: f64, best: &mut Best) {
    if candidates == 0 {
        if weight > best.value {
            best.value = weight;
            best.mask = chosen;
        }
        return;
    }
    let bound: f64 = iter_bits(candidates).map(|v| g.weights()[v].max(0.0)).sum();
    if weight + bound <= best.value {
        return;
    }
    let v = candidates.trailing_zeros() as usize;
    let rest = candidates & !(1 << v);
    // include v
    branch(
        g,
        rest & !g.neighbors_mask(v),
        chosen | (1 << v),
        weight + g.weights()[v],
        best,
    );
    // exclude v
    branch(g, rest, chosen, weight, best);
}

pub(crate) fn is_independent(g: &ExclusivityGraph, vertices: &[usize]) -> bool {
    for (i, &u) in vertices.iter().enumerate() {
        for &v in &vertices[i + 1..] {
            if g.adjacent(u, v) {
                return false;
            }
        }
    }
    true
}
