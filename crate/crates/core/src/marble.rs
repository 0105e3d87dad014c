//! The closest-projector toy model: ontic states are unit vectors in a
//! complex projective space, measurement contexts are orthonormal frames,
//! and the outcome of a joint measurement is the frame vector with the
//! largest squared overlap (ties break to the lowest index so the
//! deterministic export is well-defined).

use crate::ontmodel::OntologicalModel;
use crate::scenario::{Context, MeasurementId, Scenario};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MarbleError {
    #[error("state norm is {0}, expected 1")]
    NotUnit(f64),
    #[error("context directions {0} and {1} are not orthogonal (|<a|b>| = {2})")]
    NotOrthogonal(usize, usize, f64),
    #[error("context has {0} directions, expected the dimension {1}")]
    WrongCount(usize, usize),
    #[error("the designated shared directions differ (overlap {0}, expected 1)")]
    SharedMismatch(f64),
    #[error("cannot parse complex pair {0:?}, expected \"re,im\"")]
    BadComplex(String),
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("invalid marble config json: {0}")]
    Parse(#[from] serde_json::Error),
}

/// A pure ontic state: unit vector over C^d.
#[derive(Debug, Clone, PartialEq)]
pub struct MarbleState(pub Vec<Complex64>);

impl MarbleState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, MarbleError> {
        let n: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (n - 1.0).abs() > 1e-12 {
            return Err(MarbleError::NotUnit(n));
        }
        Ok(MarbleState(amplitudes))
    }

    pub fn normalized(amplitudes: Vec<Complex64>) -> Self {
        let n: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        MarbleState(amplitudes.into_iter().map(|a| a / n).collect())
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }
}

/// A measurement context: d mutually orthogonal unit directions, one per
/// outcome.
#[derive(Debug, Clone)]
pub struct MarbleContext {
    pub directions: Vec<Vec<Complex64>>,
}

impl MarbleContext {
    pub fn new(directions: Vec<Vec<Complex64>>) -> Result<Self, MarbleError> {
        let d = directions.first().map_or(0, |v| v.len());
        if directions.len() != d {
            return Err(MarbleError::WrongCount(directions.len(), d));
        }
        for (i, a) in directions.iter().enumerate() {
            let n: f64 = a.iter().map(|x| x.norm_sqr()).sum();
            if (n - 1.0).abs() > 1e-10 {
                return Err(MarbleError::NotUnit(n));
            }
            for (j, b) in directions.iter().enumerate().skip(i + 1) {
                let ov = overlap(a, b).norm();
                if ov > 1e-10 {
                    return Err(MarbleError::NotOrthogonal(i, j, ov));
                }
            }
        }
        Ok(MarbleContext { directions })
    }

    pub fn dimension(&self) -> usize {
        self.directions.len()
    }
}

fn overlap(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn squared_overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    overlap(a, b).norm_sqr()
}

/// The winning outcome: argmax over directions of the squared overlap,
/// lowest index on ties. Invariant under global phase of either side.
pub fn marble_outcome(state: &MarbleState, ctx: &MarbleContext) -> usize {
    let mut best = 0usize;
    let mut best_ov = f64::NEG_INFINITY;
    for (k, dir) in ctx.directions.iter().enumerate() {
        let ov = squared_overlap(dir, &state.0);
        if ov > best_ov {
            best_ov = ov;
            best = k;
        }
    }
    best
}

/// Distribution to draw ontic states from.
#[derive(Debug, Clone)]
pub enum Prior {
    Point(MarbleState),
    Haar(usize),
    Custom(Vec<MarbleState>),
}

impl Prior {
    fn sample(&self, rng: &mut ChaCha8Rng) -> MarbleState {
        match self {
            Prior::Point(s) => s.clone(),
            Prior::Haar(d) => haar_state(*d, rng),
            Prior::Custom(list) => list[rng.gen_range(0..list.len())].clone(),
        }
    }
}

/// Normalized standard complex Gaussian vector.
pub fn haar_state(d: usize, rng: &mut ChaCha8Rng) -> MarbleState {
    let amplitudes = (0..d)
        .map(|_| Complex64::new(standard_normal(rng), standard_normal(rng)))
        .collect();
    MarbleState::normalized(amplitudes)
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller on open-interval uniforms
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[derive(Debug, Clone, Serialize)]
pub struct Frequencies {
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub samples: u64,
}

/// Monte Carlo outcome frequencies. Sampling is chunked over `jobs`
/// workers with per-worker derived streams, so the result depends only on
/// (seed, n, jobs assignment) and merging is order-independent.
pub fn sample_statistics(
    prior: &Prior,
    ctx: &MarbleContext,
    n: u64,
    seed: u64,
    jobs: usize,
) -> Result<Frequencies, MarbleError> {
    if n == 0 {
        return Err(MarbleError::NoSamples);
    }
    let d = ctx.dimension();
    let chunk_counts = run_chunked(
        n,
        seed,
        jobs,
        |rng, counts: &mut Vec<u64>| {
            let s = prior.sample(rng);
            counts[marble_outcome(&s, ctx)] += 1;
        },
        || vec![0u64; d],
        |a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        },
    );
    let frequencies: Vec<f64> = chunk_counts.iter().map(|&c| c as f64 / n as f64).collect();
    let std_errors = frequencies
        .iter()
        .map(|&p| (p * (1.0 - p) / n as f64).sqrt())
        .collect();
    Ok(Frequencies {
        counts: chunk_counts,
        frequencies,
        std_errors,
        samples: n,
    })
}

fn run_chunked<T: Send>(
    n: u64,
    seed: u64,
    jobs: usize,
    step: impl Fn(&mut ChaCha8Rng, &mut T) + Sync,
    init: impl Fn() -> T + Sync,
    merge: impl Fn(&mut T, T),
) -> T {
    let jobs = jobs.max(1);
    let base = n / jobs as u64;
    let extra = (n % jobs as u64) as usize;
    let sizes: Vec<u64> = (0..jobs)
        .map(|w| base + if w < extra { 1 } else { 0 })
        .collect();
    let results: Vec<T> = std::thread::scope(|scope| {
        let handles: Vec<_> = sizes
            .iter()
            .enumerate()
            .map(|(w, &size)| {
                let step = &step;
                let init = &init;
                scope.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(w as u64 + 1);
                    let mut acc = init();
                    for _ in 0..size {
                        step(&mut rng, &mut acc);
                    }
                    acc
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker"))
            .collect()
    });
    let mut out = init();
    for r in results {
        merge(&mut out, r);
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct GapEstimate {
    pub gap: f64,
    /// Two-sided 99% confidence interval of the paired difference.
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: u64,
}

impl GapEstimate {
    pub fn excludes_zero(&self) -> bool {
        self.ci_low > 0.0 || self.ci_high < 0.0
    }
}

/// Paired estimate of P(shared wins | c1) - P(shared wins | c2) under the
/// prior; each sampled state is evaluated in both contexts.
pub fn gleason_violation_test(
    prior: &Prior,
    c1: &MarbleContext,
    c2: &MarbleContext,
    shared_in_c1: usize,
    shared_in_c2: usize,
    n: u64,
    seed: u64,
    jobs: usize,
) -> Result<GapEstimate, MarbleError> {
    check_shared(c1, c2, shared_in_c1, shared_in_c2)?;
    if n == 0 {
        return Err(MarbleError::NoSamples);
    }
    // accumulate sum and sum of squares of the paired difference
    let (sum, sumsq) = run_chunked(
        n,
        seed,
        jobs,
        |rng, acc: &mut (f64, f64)| {
            let s = prior.sample(rng);
            let x1 = (marble_outcome(&s, c1) == shared_in_c1) as i64 as f64;
            let x2 = (marble_outcome(&s, c2) == shared_in_c2) as i64 as f64;
            let d = x1 - x2;
            acc.0 += d;
            acc.1 += d * d;
        },
        || (0.0, 0.0),
        |a, b| {
            a.0 += b.0;
            a.1 += b.1;
        },
    );
    let mean = sum / n as f64;
    let var = if n > 1 {
        ((sumsq - sum * sum / n as f64) / (n as f64 - 1.0)).max(0.0)
    } else {
        0.0
    };
    let half = 2.5758293035489004 * (var / n as f64).sqrt(); // z_{0.995}
    Ok(GapEstimate {
        gap: mean,
        ci_low: mean - half,
        ci_high: mean + half,
        samples: n,
    })
}

fn check_shared(
    c1: &MarbleContext,
    c2: &MarbleContext,
    s1: usize,
    s2: usize,
) -> Result<(), MarbleError> {
    let ov = squared_overlap(&c1.directions[s1], &c2.directions[s2]);
    if (ov - 1.0).abs() > 1e-10 {
        return Err(MarbleError::SharedMismatch(ov));
    }
    Ok(())
}

/// Search for an ontic state whose outcome is the shared direction in `c1`
/// but not in `c2`: random restarts followed by a Gaussian hill climb on
/// the worst of the two winning margins.
pub fn find_ks_witness(
    c1: &MarbleContext,
    c2: &MarbleContext,
    shared_in_c1: usize,
    shared_in_c2: usize,
    attempts: usize,
    seed: u64,
) -> Result<Option<MarbleState>, MarbleError> {
    check_shared(c1, c2, shared_in_c1, shared_in_c2)?;
    let d = c1.dimension();
    let score = |s: &MarbleState| -> f64 {
        let ov1: Vec<f64> = c1
            .directions
            .iter()
            .map(|dir| squared_overlap(dir, &s.0))
            .collect();
        let ov2: Vec<f64> = c2
            .directions
            .iter()
            .map(|dir| squared_overlap(dir, &s.0))
            .collect();
        let margin1 = ov1[shared_in_c1]
            - ov1
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != shared_in_c1)
                .map(|(_, v)| *v)
                .fold(f64::NEG_INFINITY, f64::max);
        let margin2 = ov2
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != shared_in_c2)
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max)
            - ov2[shared_in_c2];
        margin1.min(margin2)
    };
    let qualifies = |s: &MarbleState| {
        marble_outcome(s, c1) == shared_in_c1 && marble_outcome(s, c2) != shared_in_c2
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, MarbleState)> = None;
    for _ in 0..attempts.max(1) {
        let s = haar_state(d, &mut rng);
        if qualifies(&s) {
            return Ok(Some(s));
        }
        let sc = score(&s);
        if best.as_ref().map_or(true, |(b, _)| sc > *b) {
            best = Some((sc, s));
        }
    }
    // hill climb from the best restart
    let (mut best_score, mut current) = best.expect("at least one attempt");
    let mut sigma = 0.3;
    for _ in 0..attempts.max(1) * 4 {
        let perturbed: Vec<Complex64> = current
            .0
            .iter()
            .map(|a| {
                a + Complex64::new(
                    sigma * standard_normal(&mut rng),
                    sigma * standard_normal(&mut rng),
                )
            })
            .collect();
        let cand = MarbleState::normalized(perturbed);
        let sc = score(&cand);
        if sc > best_score {
            best_score = sc;
            current = cand;
            if qualifies(&current) {
                return Ok(Some(current));
            }
        } else {
            sigma *= 0.98;
        }
    }
    Ok(if qualifies(&current) {
        Some(current)
    } else {
        None
    })
}

/// Export a finite list of ontic states as a deterministic ontological
/// model over labeled contexts. Directions equal up to global phase are
/// identified as the same measurement; `weights` (uniform by default)
/// becomes the single stored preparation.
pub fn export_ontological(
    states: &[MarbleState],
    weights: Option<&[f64]>,
    contexts: &[(String, MarbleContext)],
) -> Result<OntologicalModel, MarbleError> {
    let mut measurement_dirs: Vec<Vec<Complex64>> = Vec::new();
    let mut measurement_ids: Vec<MeasurementId> = Vec::new();
    let mut scenario_contexts = Vec::new();
    let mut member_ids: Vec<Vec<MeasurementId>> = Vec::new();
    for (cid, ctx) in contexts {
        let mut members = Vec::new();
        for dir in &ctx.directions {
            let found = measurement_dirs
                .iter()
                .position(|known| (squared_overlap(known, dir) - 1.0).abs() < 1e-10);
            let id = match found {
                Some(k) => measurement_ids[k].clone(),
                None => {
                    let id = MeasurementId(format!("m{}", measurement_dirs.len()));
                    measurement_dirs.push(dir.clone());
                    measurement_ids.push(id.clone());
                    id
                }
            };
            members.push(id);
        }
        scenario_contexts.push(Context {
            id: cid.clone(),
            members: members.clone(),
            declared_maximal: true,
        });
        member_ids.push(members);
    }
    let scenario = Scenario::new(measurement_ids.clone(), scenario_contexts);
    let n = states.len();
    let mu: Vec<f64> = match weights {
        Some(w) => w.to_vec(),
        None => vec![1.0 / n as f64; n],
    };
    let mut preparations = BTreeMap::new();
    preparations.insert("prior".to_owned(), mu);
    let mut responses = BTreeMap::new();
    for ((cid, ctx), members) in contexts.iter().zip(&member_ids) {
        let outcomes: Vec<usize> = states.iter().map(|s| marble_outcome(s, ctx)).collect();
        for (k, member) in members.iter().enumerate() {
            let xi: Vec<f64> = outcomes
                .iter()
                .map(|&o| if o == k { 1.0 } else { 0.0 })
                .collect();
            responses.insert((cid.clone(), member.clone(), 0), xi);
        }
        if members.len() == 1 {
            let xi: Vec<f64> = outcomes
                .iter()
                .map(|&o| if o != 0 { 1.0 } else { 0.0 })
                .collect();
            responses.insert((cid.clone(), members[0].clone(), 1), xi);
        }
    }
    Ok(OntologicalModel {
        scenario,
        num_ontic_states: n,
        preparations,
        responses,
        equivalence_classes: vec![],
    })
}

// -- configuration ----------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarbleConfig {
    pub dimension: usize,
    pub contexts: Vec<ContextConfig>,
    pub prior: PriorConfig,
    pub samples: u64,
    pub seed: u64,
    /// Indices (context, direction) of the shared measurement to compare,
    /// when a gap estimate is requested.
    #[serde(default)]
    pub shared: Option<[usize; 4]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContextConfig {
    pub id: String,
    /// Directions as vectors of "re,im" pairs.
    pub vectors: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PriorConfig {
    Haar,
    Point { state: Vec<String> },
    Custom { states: Vec<Vec<String>> },
}

fn parse_complex(s: &str) -> Result<Complex64, MarbleError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(MarbleError::BadComplex(s.to_owned()));
    }
    let re: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| MarbleError::BadComplex(s.to_owned()))?;
    let im: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| MarbleError::BadComplex(s.to_owned()))?;
    Ok(Complex64::new(re, im))
}

fn parse_state(v: &[String]) -> Result<MarbleState, MarbleError> {
    let amps: Result<Vec<Complex64>, _> = v.iter().map(|s| parse_complex(s)).collect();
    MarbleState::new(amps?)
}

impl MarbleConfig {
    pub fn from_json(s: &str) -> Result<Self, MarbleError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn build(&self) -> Result<(Vec<(String, MarbleContext)>, Prior), MarbleError> {
        let mut contexts = Vec::new();
        for c in &self.contexts {
            let dirs: Result<Vec<Vec<Complex64>>, _> = c
                .vectors
                .iter()
                .map(|v| {
                    let amps: Result<Vec<Complex64>, _> =
                        v.iter().map(|s| parse_complex(s)).collect();
                    amps
                })
                .collect();
            contexts.push((c.id.clone(), MarbleContext::new(dirs?)?));
        }
        let prior = match &self.prior {
            PriorConfig::Haar => Prior::Haar(self.dimension),
            PriorConfig::Point { state } => Prior::Point(parse_state(state)?),
            PriorConfig::Custom { states } => {
                let list: Result<Vec<MarbleState>, _> =
                    states.iter().map(|v| parse_state(v)).collect();
                Prior::Custom(list?)
            }
        };
        Ok((contexts, prior))
    }
}

/// The bundled demo pair: the standard frame {A, B, C} against {C, D, E}
/// with D, E rotated by 0.9 rad inside the A-B plane (asymmetric).
pub fn demo_contexts() -> (MarbleContext, MarbleContext) {
    let z = |re: f64| Complex64::new(re, 0.0);
    let c1 = MarbleContext::new(vec![
        vec![z(1.0), z(0.0), z(0.0)],
        vec![z(0.0), z(1.0), z(0.0)],
        vec![z(0.0), z(0.0), z(1.0)],
    ])
    .expect("orthonormal");
    let th: f64 = 0.9;
    let c2 = MarbleContext::new(vec![
        vec![z(0.0), z(0.0), z(1.0)],
        vec![z(th.cos()), z(th.sin()), z(0.0)],
        vec![z(-th.sin()), z(th.cos()), z(0.0)],
    ])
    .expect("orthonormal");
    (c1, c2)
}

/// A concentrated custom prior around a state that prefers the shared
/// direction in the first context only: deterministic cloud of 60 nearby
/// unit vectors. Under this prior the demo pair shows a clear gap.
pub fn concentrated_prior(seed: u64) -> Prior {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = MarbleState::normalized(vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(1.1, 0.0),
    ]);
    let cloud = (0..60)
        .map(|_| {
            let amps: Vec<Complex64> = center
                .0
                .iter()
                .map(|a| {
                    a + Complex64::new(
                        0.25 * standard_normal(&mut rng),
                        0.25 * standard_normal(&mut rng),
                    )
                })
                .collect();
            MarbleState::normalized(amps)
        })
        .collect();
    Prior::Custom(cloud)
}

pub fn demo_config_json() -> String {
    let fmt = |x: f64| format!("{x},0");
    let th: f64 = 0.9;
    let config = MarbleConfig {
        dimension: 3,
        contexts: vec![
            ContextConfig {
                id: "abc".into(),
                vectors: vec![
                    vec![fmt(1.0), fmt(0.0), fmt(0.0)],
                    vec![fmt(0.0), fmt(1.0), fmt(0.0)],
                    vec![fmt(0.0), fmt(0.0), fmt(1.0)],
                ],
            },
            ContextConfig {
                id: "cde".into(),
                vectors: vec![
                    vec![fmt(0.0), fmt(0.0), fmt(1.0)],
                    vec![fmt(th.cos()), fmt(th.sin()), fmt(0.0)],
                    vec![fmt(-th.sin()), fmt(th.cos()), fmt(0.0)],
                ],
            },
        ],
        prior: PriorConfig::Haar,
        samples: 100_000,
        seed: 7,
        shared: Some([0, 2, 1, 0]),
    };
    serde_json::to_string_pretty(&config).expect("config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn outcome_at_a_direction_is_that_direction() {
        let (c1, _) = demo_contexts();
        for k in 0..3 {
            let s = MarbleState::new(c1.directions[k].clone()).unwrap();
            assert_eq!(marble_outcome(&s, &c1), k);
        }
    }

    #[test]
    fn equidistant_state_breaks_ties_low() {
        let (c1, _) = demo_contexts();
        let s = MarbleState::normalized(vec![z(1.0), z(1.0), z(0.0)]);
        assert_eq!(marble_outcome(&s, &c1), 0);
    }

    #[test]
    fn outcome_is_phase_invariant() {
        let (c1, c2) = demo_contexts();
        let s = MarbleState::normalized(vec![
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.2, 0.6),
            Complex64::new(0.5, -0.4),
        ]);
        let phase = Complex64::from_polar(1.0, 1.234);
        let rotated = MarbleState(s.0.iter().map(|a| a * phase).collect());
        for ctx in [&c1, &c2] {
            assert_eq!(marble_outcome(&s, ctx), marble_outcome(&rotated, ctx));
        }
    }

    #[test]
    fn paper_configuration_has_a_witness_state() {
        // closer to the shared direction than its own partners, but closer
        // to a rotated partner in the second frame
        let c1 = demo_contexts().0;
        let c2 = MarbleContext::new(vec![
            vec![z(0.0), z(0.0), z(1.0)],
            vec![
                z(std::f64::consts::FRAC_1_SQRT_2),
                z(std::f64::consts::FRAC_1_SQRT_2),
                z(0.0),
            ],
            vec![
                z(std::f64::consts::FRAC_1_SQRT_2),
                z(-std::f64::consts::FRAC_1_SQRT_2),
                z(0.0),
            ],
        ])
        .unwrap();
        let w = MarbleState::normalized(vec![z(1.0), z(1.0), z(1.1)]);
        assert_eq!(marble_outcome(&w, &c1), 2);
        assert_ne!(marble_outcome(&w, &c2), 0);
        let found = find_ks_witness(&c1, &c2, 2, 0, 400, 11).unwrap();
        let witness = found.expect("witness exists for the 45-degree pair");
        assert_eq!(marble_outcome(&witness, &c1), 2);
        assert_ne!(marble_outcome(&witness, &c2), 0);
    }

    #[test]
    fn identical_contexts_have_no_witness() {
        let (c1, _) = demo_contexts();
        let found = find_ks_witness(&c1, &c1, 2, 2, 100, 3).unwrap();
        assert!(found.is_none());
    }

    #[test]
    fn mismatched_shared_direction_is_an_error() {
        let (c1, c2) = demo_contexts();
        assert!(matches!(
            find_ks_witness(&c1, &c2, 0, 0, 10, 3),
            Err(MarbleError::SharedMismatch(_))
        ));
    }

    #[test]
    fn point_prior_is_deterministic() {
        let (c1, _) = demo_contexts();
        let s = MarbleState::new(c1.directions[1].clone()).unwrap();
        let f = sample_statistics(&Prior::Point(s), &c1, 500, 1, 2).unwrap();
        assert_eq!(f.frequencies, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn haar_frequencies_are_uniform_within_three_sigma() {
        let (c1, c2) = demo_contexts();
        for ctx in [&c1, &c2] {
            let f = sample_statistics(&Prior::Haar(3), ctx, 30_000, 5, 4).unwrap();
            for k in 0..3 {
                let dev = (f.frequencies[k] - 1.0 / 3.0).abs();
                assert!(dev < 3.0 * f.std_errors[k] + 1e-3, "outcome {k}: {dev}");
            }
        }
    }

    #[test]
    fn sampling_is_reproducible_and_job_count_invariant() {
        let (c1, _) = demo_contexts();
        let a = sample_statistics(&Prior::Haar(3), &c1, 2000, 42, 1).unwrap();
        let b = sample_statistics(&Prior::Haar(3), &c1, 2000, 42, 1).unwrap();
        assert_eq!(a.counts, b.counts);
        // changing the seed changes the sample
        let c = sample_statistics(&Prior::Haar(3), &c1, 2000, 43, 1).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn identical_contexts_give_zero_gap() {
        let (c1, _) = demo_contexts();
        let g = gleason_violation_test(&Prior::Haar(3), &c1, &c1, 2, 2, 5000, 9, 2).unwrap();
        assert_eq!(g.gap, 0.0);
        assert!(!g.excludes_zero());
    }

    #[test]
    fn concentrated_prior_certifies_a_gap() {
        let (c1, c2) = demo_contexts();
        let prior = concentrated_prior(17);
        let g = gleason_violation_test(&prior, &c1, &c2, 2, 0, 100_000, 23, 4).unwrap();
        assert!(
            g.excludes_zero(),
            "gap {} ci [{}, {}]",
            g.gap,
            g.ci_low,
            g.ci_high
        );
        assert!(g.gap.abs() > 0.02);
    }

    #[test]
    fn relabeling_outcomes_permutes_frequencies() {
        let (c1, _) = demo_contexts();
        let swapped = MarbleContext::new(vec![
            c1.directions[1].clone(),
            c1.directions[0].clone(),
            c1.directions[2].clone(),
        ])
        .unwrap();
        let f1 = sample_statistics(&Prior::Haar(3), &c1, 4000, 77, 2).unwrap();
        let f2 = sample_statistics(&Prior::Haar(3), &swapped, 4000, 77, 2).unwrap();
        assert_eq!(f1.counts[0], f2.counts[1]);
        assert_eq!(f1.counts[1], f2.counts[0]);
        assert_eq!(f1.counts[2], f2.counts[2]);
    }

    #[test]
    fn export_flags_contextuality_when_witness_included() {
        let c1 = demo_contexts().0;
        let c2 = MarbleContext::new(vec![
            vec![z(0.0), z(0.0), z(1.0)],
            vec![
                z(std::f64::consts::FRAC_1_SQRT_2),
                z(std::f64::consts::FRAC_1_SQRT_2),
                z(0.0),
            ],
            vec![
                z(std::f64::consts::FRAC_1_SQRT_2),
                z(-std::f64::consts::FRAC_1_SQRT_2),
                z(0.0),
            ],
        ])
        .unwrap();
        let witness = MarbleState::normalized(vec![z(1.0), z(1.0), z(1.1)]);
        let other = MarbleState::new(vec![z(1.0), z(0.0), z(0.0)]).unwrap();
        let model = export_ontological(
            &[witness, other],
            None,
            &[("abc".into(), c1), ("cde".into(), c2)],
        )
        .unwrap();
        assert!(model.validate(1e-9).unwrap().is_empty());
        // the shared direction was identified as one measurement
        assert_eq!(model.scenario.measurements.len(), 5);
        assert!(!model.measurement_contextuality(1e-9).is_empty());
    }

    #[test]
    fn config_round_trip() {
        let j = demo_config_json();
        let cfg = MarbleConfig::from_json(&j).unwrap();
        let (contexts, prior) = cfg.build().unwrap();
        assert_eq!(contexts.len(), 2);
        assert!(matches!(prior, Prior::Haar(3)));
        assert!(matches!(cfg.shared, Some([0, 2, 1, 0])));
    }
}
