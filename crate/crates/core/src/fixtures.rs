//! Bundled instances used by the command-line demos and the test suites:
//! the Bell-scenario boxes (PR, near-Tsirelson quantum, classical), a
//! Hardy-type support model with exactly-gluing rational tables, the
//! 5-cycle scenario, and the compression demo models.

use crate::empirical::EmpiricalModel;
use crate::lp::rat;
use crate::ontmodel::OntologicalModel;
use crate::scenario::{Context, Scenario};
use crate::Rat;
use std::collections::BTreeMap;

/// Two-party, two-setting Bell scenario: measurements a0,a1,b0,b1 and the
/// four contexts {aX, bY}.
pub fn bell_scenario() -> Scenario {
    Scenario::new(
        vec!["a0".into(), "a1".into(), "b0".into(), "b1".into()],
        vec![
            Context::new("c00", &["a0", "b0"], true),
            Context::new("c01", &["a0", "b1"], true),
            Context::new("c10", &["a1", "b0"], true),
            Context::new("c11", &["a1", "b1"], true),
        ],
    )
}

fn bell_tables(entry: impl Fn(usize, usize, usize, usize) -> Rat) -> EmpiricalModel {
    let scenario = bell_scenario();
    let mut tables = BTreeMap::new();
    for (ctx, x, y) in [("c00", 0, 0), ("c01", 0, 1), ("c10", 1, 0), ("c11", 1, 1)] {
        let mut dist = Vec::with_capacity(4);
        for a in 0..2 {
            for b in 0..2 {
                dist.push(entry(x, y, a, b));
            }
        }
        tables.insert(ctx.to_owned(), dist);
    }
    EmpiricalModel { scenario, tables }
}

/// The PR box: perfect correlation a xor b = x and y.
pub fn pr_box() -> EmpiricalModel {
    bell_tables(|x, y, a, b| {
        if (a ^ b) == (x & y) {
            rat(1, 2)
        } else {
            rat(0, 1)
        }
    })
}

/// Quantum CHSH tables just inside the Tsirelson point, kept rational via
/// the Pell approximation E = 408/577 to 1/sqrt(2): the CHSH sum is
/// 4*408/577 = 2.828... > 2, full support, exact no-disturbance.
pub fn chsh_quantum() -> EmpiricalModel {
    let e = rat(408, 577);
    bell_tables(|x, y, a, b| {
        let corr = if (x, y) == (1, 1) {
            -e.clone()
        } else {
            e.clone()
        };
        let sign = if a == b { corr } else { -corr };
        (rat(1, 1) + sign) / rat(4, 1)
    })
}

/// Uniform classical product tables: every joint outcome 1/4.
pub fn classical_uniform() -> EmpiricalModel {
    bell_tables(|_, _, _, _| rat(1, 4))
}

/// A Hardy-type model with rational entries and exact gluing. The support
/// pattern forbids (0,0) on c01 and c10 and (1,1) on c11 while keeping
/// (0,0) possible on c00, which blocks any global section through that
/// atom: possibilistically contextual but not strongly.
pub fn hardy_rational() -> EmpiricalModel {
    let scenario = bell_scenario();
    let mut tables = BTreeMap::new();
    tables.insert(
        "c00".into(),
        vec![rat(1, 16), rat(3, 16), rat(1, 16), rat(11, 16)],
    );
    tables.insert(
        "c01".into(),
        vec![rat(0, 1), rat(1, 4), rat(1, 2), rat(1, 4)],
    );
    tables.insert(
        "c10".into(),
        vec![rat(0, 1), rat(3, 4), rat(1, 8), rat(1, 8)],
    );
    tables.insert(
        "c11".into(),
        vec![rat(1, 4), rat(1, 2), rat(1, 4), rat(0, 1)],
    );
    EmpiricalModel { scenario, tables }
}

/// The 5-cycle (pentagon) scenario: five measurements, five two-member
/// contexts in a ring.
pub fn kcbs_scenario() -> Scenario {
    let names = ["m1", "m2", "m3", "m4", "m5"];
    let contexts = (0..5)
        .map(|i| Context::new(format!("e{}", i + 1), &[names[i], names[(i + 1) % 5]], true))
        .collect();
    Scenario::new(names.iter().map(|n| (*n).into()).collect(), contexts)
}

/// Measurement-contextual model on three ontic states whose statistics are
/// context-independent: the shared measurement m has responses (1,1,0) and
/// (0,0,1) in its two contexts, and every allowed preparation is orthogonal
/// to the difference. The third context's responses stick out of the
/// compressed cone, which is what makes the quasi-model go negative.
pub fn compress_contextual_model() -> OntologicalModel {
    let scenario = Scenario::new(
        vec![
            "m".into(),
            "mp".into(),
            "mpp".into(),
            "p".into(),
            "pp".into(),
        ],
        vec![
            Context::new("C1", &["m", "mp"], true),
            Context::new("C2", &["m", "mpp"], true),
            Context::new("C3", &["p", "pp"], true),
        ],
    );
    let mut preparations = BTreeMap::new();
    preparations.insert("P1".to_owned(), vec![0.25, 0.25, 0.5]);
    preparations.insert("P2".to_owned(), vec![0.5, 0.0, 0.5]);
    preparations.insert("P3".to_owned(), vec![0.0, 0.5, 0.5]);
    let mut responses = BTreeMap::new();
    responses.insert(("C1".to_owned(), "m".into(), 0), vec![1.0, 1.0, 0.0]);
    responses.insert(("C1".to_owned(), "mp".into(), 0), vec![0.0, 0.0, 1.0]);
    responses.insert(("C2".to_owned(), "m".into(), 0), vec![0.0, 0.0, 1.0]);
    responses.insert(("C2".to_owned(), "mpp".into(), 0), vec![1.0, 1.0, 0.0]);
    responses.insert(("C3".to_owned(), "p".into(), 0), vec![0.0, 1.0, 0.0]);
    responses.insert(("C3".to_owned(), "pp".into(), 0), vec![1.0, 0.0, 1.0]);
    OntologicalModel {
        scenario,
        num_ontic_states: 3,
        preparations,
        responses,
        equivalence_classes: vec![],
    }
}

/// The non-contextual control: identical to the contextual fixture except
/// that m has the same response in both contexts.
pub fn compress_noncontextual_model() -> OntologicalModel {
    let mut m = compress_contextual_model();
    m.responses
        .insert(("C2".to_owned(), "m".into(), 0), vec![1.0, 1.0, 0.0]);
    m.responses
        .insert(("C2".to_owned(), "mpp".into(), 0), vec![0.0, 0.0, 1.0]);
    m
}

/// Names and JSON payloads of every bundled fixture file.
pub fn bundled_files() -> Vec<(&'static str, String)> {
    vec![
        ("bell-scenario.json", bell_scenario().to_json()),
        ("kcbs-scenario.json", kcbs_scenario().to_json()),
        ("pr-box.json", pr_box().to_json()),
        ("chsh-quantum.json", chsh_quantum().to_json()),
        ("classical-uniform.json", classical_uniform().to_json()),
        ("hardy.json", hardy_rational().to_json()),
        (
            "compress-contextual.json",
            compress_contextual_model().to_json(),
        ),
        (
            "compress-noncontextual.json",
            compress_noncontextual_model().to_json(),
        ),
        (
            "appendix-c.json",
            crate::counterfactual::appendix_c_instance().to_json(),
        ),
        ("copy-box.json", crate::causal::copy_box(2).to_json()),
        ("marble-demo.json", crate::marble::demo_config_json()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_empirical_fixtures_validate() {
        for em in [
            pr_box(),
            chsh_quantum(),
            classical_uniform(),
            hardy_rational(),
        ] {
            assert!(em.validate(1e-9, 1e-9).unwrap().is_empty());
        }
    }

    #[test]
    fn compression_fixtures_are_valid_models() {
        for m in [compress_contextual_model(), compress_noncontextual_model()] {
            assert!(m.validate(1e-9).unwrap().is_empty());
        }
        assert_eq!(
            compress_contextual_model()
                .measurement_contextuality(1e-9)
                .len(),
            1
        );
        assert!(compress_noncontextual_model()
            .measurement_contextuality(1e-9)
            .is_empty());
        // contextual but statistically context-independent
        assert!(compress_contextual_model().gleason_gaps(1e-9).is_empty());
    }

    #[test]
    fn kcbs_scenario_validates_and_derives_pentagon() {
        let s = kcbs_scenario();
        assert!(s.validate().is_empty());
        let g = s.exclusivity_graph().unwrap();
        assert_eq!(g.num_vertices(), 5);
        assert_eq!(g.num_edges(), 5);
    }
}
