//! Cross-module properties: the bridges between scenarios, ontological
//! models, empirical models, and the graph layer.

use ctxkit::empirical::{EmpiricalModel, ProbabilisticOutcome};
use ctxkit::graphinv::{self, ThetaOptions};
use ctxkit::lp::rat;
use ctxkit::ontmodel::context_events;
use ctxkit::scenario::{Context, Scenario};
use ctxkit::{fixtures, Rat};
use proptest::prelude::*;
use std::collections::BTreeMap;

// Contexts that share no measurements always admit a global section: the
// product of the per-context tables is one.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn disjoint_contexts_always_have_global_sections(
        raw1 in proptest::collection::vec(1u32..8, 4),
        raw2 in proptest::collection::vec(1u32..8, 4),
    ) {
        let scenario = Scenario::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![
                Context::new("c1", &["a", "b"], false),
                Context::new("c2", &["c", "d"], false),
            ],
        );
        prop_assert!(scenario.shared_measurements().is_empty());
        let normalize = |raw: &[u32]| -> Vec<Rat> {
            let total: i64 = raw.iter().map(|&x| x as i64).sum();
            raw.iter().map(|&x| rat(x as i64, total)).collect()
        };
        let mut tables = BTreeMap::new();
        tables.insert("c1".to_owned(), normalize(&raw1));
        tables.insert("c2".to_owned(), normalize(&raw2));
        let em = EmpiricalModel { scenario, tables };
        prop_assert!(em.validate(1e-9, 1e-9).unwrap().is_empty());
        match em.global_section_probabilistic(None, 1 << 24).unwrap() {
            ProbabilisticOutcome::Section(sec) => {
                prop_assert!(em.remarginalization_gap(&sec) < 1e-12);
            }
            ProbabilisticOutcome::Contextual(_) => {
                return Err(TestCaseError::fail("disjoint contexts cannot be contextual"));
            }
        }
    }
}

/// The compression fixture is measurement-contextual with context-
/// independent statistics, so its induced empirical model glues exactly.
#[test]
fn induced_empirical_glues_when_statistics_are_context_independent() {
    for model in [
        fixtures::compress_contextual_model(),
        fixtures::compress_noncontextual_model(),
    ] {
        assert!(model.gleason_gaps(1e-9).is_empty());
        for p in model.preparations.keys() {
            let em = model.induced_empirical(p).unwrap();
            let violations = em.no_disturbance_violations(1e-9);
            assert!(violations.is_empty(), "{p}: {violations:?}");
        }
    }
}

/// A model whose statistics do depend on the context induces an empirical
/// model that fails the gluing check on the same measurement.
#[test]
fn induced_empirical_breaks_when_statistics_depend_on_context() {
    let mut model = fixtures::compress_contextual_model();
    model
        .preparations
        .insert("skew".to_owned(), vec![0.7, 0.1, 0.2]);
    assert!(!model.gleason_gaps(1e-9).is_empty());
    let em = model.induced_empirical("skew").unwrap();
    assert!(!em.no_disturbance_violations(1e-9).is_empty());
}

/// Identical response vectors per measurement force context-independent
/// statistics for every preparation.
#[test]
fn identical_responses_imply_empty_gleason_report() {
    let m = fixtures::compress_noncontextual_model();
    assert!(m.measurement_contextuality(1e-9).is_empty());
    assert!(m.gleason_gaps(1e-9).is_empty());
}

/// Per-context predictions always sum to one on valid models.
#[test]
fn predictions_sum_to_one_on_fixture_models() {
    for m in [
        fixtures::compress_contextual_model(),
        ctxkit::counterfactual::six_state_ontological_model(),
    ] {
        assert!(m.validate(1e-9).unwrap().is_empty());
        for p in m.preparations.keys() {
            for c in &m.scenario.contexts {
                let total: f64 = context_events(c)
                    .iter()
                    .map(|ev| m.predict(p, ev, &c.id).unwrap())
                    .sum();
                assert!((total - 1.0).abs() < 1e-9, "{p}/{}: {total}", c.id);
            }
        }
    }
}

/// Certificates from the graph layer hold up under independent re-checks.
#[test]
fn graph_certificates_are_sound() {
    let g = fixtures::kcbs_scenario().exclusivity_graph().unwrap();
    let inv = graphinv::invariants(&g, &Default::default(), &ThetaOptions::default()).unwrap();
    // independent set is independent
    for (i, &u) in inv.alpha.vertices.iter().enumerate() {
        for &v in &inv.alpha.vertices[i + 1..] {
            assert!(!g.adjacent(u, v));
        }
    }
    // packing is clique-feasible
    assert!(graphinv::packing_is_feasible(&g, &inv.vf.packing, 1000).unwrap());
    // theta multipliers reproduce the value
    let x = inv.theta.multipliers.as_ref().unwrap();
    let total: f64 = x.iter().zip(g.weights()).map(|(xi, w)| xi * w).sum();
    assert!((total - inv.theta.value).abs() < 1e-3);
    // the labelling is an orthonormal labelling with the weight row
    let lab = inv.theta.labelling.as_ref().unwrap();
    for u in 0..g.num_vertices() {
        for v in u + 1..g.num_vertices() {
            if !g.adjacent(u, v) {
                let dot: f64 = lab[u].iter().zip(&lab[v]).map(|(a, b)| a * b).sum();
                assert!(dot.abs() < 1e-5);
            }
        }
    }
}

/// The quantum weights saturating the pentagon inequality form a valid
/// probabilistic model on the plain (non-maximal) pentagon and stay below
/// the unit-weight Lovasz bound.
#[test]
fn pentagon_quantum_weights_respect_theta() {
    let g = fixtures::kcbs_scenario().exclusivity_graph().unwrap();
    let w = 1.0 / 5f64.sqrt();
    let mut free = graphinv::ExclusivityGraph::new(
        g.vertex_ids().to_vec(),
        vec![w; 5],
        g.hyperedges().to_vec(),
        false,
    );
    assert!(free.is_probabilistic_model(1e-9).0);
    let sigma = free.witness_sigma();
    free.set_weights(vec![1.0; 5]);
    let theta_unit = graphinv::lovasz_number(&free, 25, &ThetaOptions::default()).unwrap();
    assert!(
        sigma <= theta_unit.upper + 1e-4,
        "sigma {sigma} theta {}",
        theta_unit.value
    );
    assert!(
        (sigma - theta_unit.value).abs() < 1e-3,
        "the quantum value saturates the bound"
    );
}

/// Feasible counterfactual searches return distributions that reproduce
/// their marginal targets exactly. With the full quantum marginals a
/// single composite is feasible (and two of them already are not, except
/// the pair of triples).
#[test]
fn counterfactual_solutions_reproduce_targets() {
    for keep in [&["P12"][..], &["P135", "P246"][..]] {
        let inst = ctxkit::counterfactual::instance_with_composites(keep, true);
        match inst.feasibility_search(1 << 20).unwrap() {
            ctxkit::counterfactual::FeasibilityOutcome::Feasible {
                per_preparation, ..
            } => {
                for (p, targets) in &inst.targets {
                    let d = &per_preparation[p];
                    for (ci, t) in targets.iter().enumerate() {
                        if let Some(t) = t {
                            assert_eq!(&d.marginal(ci), t, "{p} context {ci}");
                        }
                    }
                }
            }
            _ => panic!("{keep:?} with full marginals is feasible"),
        }
    }
    // contrast: adjacent pairs of composites with the full marginals are
    // already infeasible
    let inst = ctxkit::counterfactual::instance_with_composites(&["P12", "P34"], true);
    assert!(!inst.feasibility_search(1 << 20).unwrap().is_feasible());
    assert!(!inst.feasibility_oracle(1 << 20, 400_000).unwrap());
}

/// On perfect graphs the three bounds collapse: alpha = theta = v_F.
/// Random bipartite graphs and random chordal constructions (each new
/// vertex attached to a clique) are both perfect.
#[test]
fn perfect_graphs_collapse_the_bounds() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    for trial in 0..12 {
        let (n, hyperedges) = if trial % 2 == 0 {
            // bipartite: left block 0..k, right block k..n
            let n = rng.gen_range(4..=10usize);
            let k = rng.gen_range(1..n);
            let mut edges = Vec::new();
            for u in 0..k {
                for v in k..n {
                    if rng.gen_bool(0.5) {
                        edges.push(vec![u, v]);
                    }
                }
            }
            (n, edges)
        } else {
            // chordal: attach each new vertex to a random clique among the
            // previous vertices (start from a triangle)
            let n = rng.gen_range(4..=10usize);
            let mut adj = vec![vec![false; n]; n];
            let mut edges = Vec::new();
            let add =
                |u: usize, v: usize, adj: &mut Vec<Vec<bool>>, edges: &mut Vec<Vec<usize>>| {
                    adj[u][v] = true;
                    adj[v][u] = true;
                    edges.push(vec![u, v]);
                };
            add(0, 1, &mut adj, &mut edges);
            add(0, 2, &mut adj, &mut edges);
            add(1, 2, &mut adj, &mut edges);
            for v in 3..n {
                // grow a clique greedily among 0..v
                let mut clique: Vec<usize> = vec![rng.gen_range(0..v)];
                for u in 0..v {
                    if clique.iter().all(|&c| adj[u][c])
                        && !clique.contains(&u)
                        && rng.gen_bool(0.7)
                    {
                        clique.push(u);
                    }
                }
                for &u in &clique {
                    add(u, v, &mut adj, &mut edges);
                }
            }
            (n, edges)
        };
        let ids = (0..n).map(|i| format!("v{i}")).collect();
        let g = graphinv::ExclusivityGraph::new(ids, vec![1.0; n], hyperedges, false);
        let inv = graphinv::invariants(&g, &Default::default(), &ThetaOptions::default()).unwrap();
        let vf = ctxkit::rat_to_f64(&inv.vf.value);
        assert!(
            (inv.alpha.value - inv.theta.value).abs() < 2e-4 && (inv.theta.value - vf).abs() < 2e-4,
            "trial {trial}: alpha {} theta {} vf {}",
            inv.alpha.value,
            inv.theta.value,
            vf
        );
    }
}

/// Every bundled fixture file parses and validates under its own kind.
#[test]
fn bundled_fixtures_validate() {
    for (name, body) in ctxkit::fixtures::bundled_files() {
        let value: serde_json::Value = serde_json::from_str(&body).expect(name);
        let obj = value.as_object().unwrap();
        if obj.contains_key("num_ontic_states") {
            let m = ctxkit::OntologicalModel::from_json(&body).expect(name);
            assert!(m.scenario.validate().is_empty(), "{name}");
            assert!(m.validate(1e-9).unwrap().is_empty(), "{name}");
        } else if obj.contains_key("tables") {
            let em = EmpiricalModel::from_json(&body).expect(name);
            assert!(em.scenario.validate().is_empty(), "{name}");
            assert!(em.validate(1e-9, 1e-9).unwrap().is_empty(), "{name}");
        } else if obj.contains_key("measurements") {
            let s = Scenario::from_json(&body).expect(name);
            assert!(s.validate().is_empty(), "{name}");
        }
        // remaining kinds (instances, boxes, marble configs) parse in their
        // own modules' tests
    }
}
