//! Toolkit for analyzing contextuality scenarios.
//!
//! The crate is organized around a small set of data models and the
//! operations the analysis commands are built from:
//!
//! - [`scenario`]: measurements, contexts, and the derived exclusivity
//!   structure shared by every other module.
//! - [`ontmodel`]: finite ontological models (epistemic state vectors and
//!   response functions), validation, prediction, and contextuality
//!   detection.
//! - [`counterfactual`]: deterministic counterfactual-outcome
//!   distributions, bias detection, and exact feasibility search over
//!   preparation constraints.
//! - [`empirical`]: per-context outcome tables, no-disturbance gluing, the
//!   probabilistic/possibilistic/strong contextuality hierarchy, and
//!   signed global sections.
//! - [`compress`]: compression of a context-independent-statistics model
//!   onto its admissible subspace, producing a non-contextual quasi-model
//!   whose entries may go negative.
//! - [`graphinv`]: exclusivity graphs and the independence number, Lovász
//!   number, and fractional packing number with certificates.
//! - [`causal`]: Shannon-entropy machinery, no-disturbance phenomena,
//!   factorisability checks, and loop compositions of deterministic boxes.
//! - [`marble`]: the closest-projector toy model, Monte Carlo statistics,
//!   and its export as an ontological model.
//!
//! Exact verdicts (feasible/infeasible) are computed over arbitrary-
//! precision rationals via the [`lp`] module; floating point is reserved
//! for quantities that are intrinsically approximate (entropies, Monte
//! Carlo estimates, the Lovász number).

pub mod causal;
pub mod compress;
pub mod counterfactual;
pub mod empirical;
pub mod fixtures;
pub mod graphinv;
pub mod linalg;
pub mod lp;
pub mod marble;
pub mod ontmodel;
pub mod scenario;

pub use empirical::{ContextualityClass, EmpiricalModel, HierarchyVerdict};
pub use graphinv::ExclusivityGraph;
pub use ontmodel::OntologicalModel;

pub use scenario::{Context, Event, MeasurementId, Scenario};

/// Default tolerance for normalization checks (sums to one).
pub const EPS_SUM: f64 = 1e-9;
/// Default tolerance for contextuality / agreement detection.
pub const EPS_DETECT: f64 = 1e-9;
/// Duality-gap target for the Lovász number solver.
pub const THETA_TOL: f64 = 1e-4;

/// Exact rational used throughout the exact solvers.
pub type Rat = num_rational::BigRational;

/// Exact conversion of a finite float into a rational.
///
/// Every finite `f64` is a dyadic rational, so this is lossless; it is the
/// bridge from user-facing floating input to the exact LP path.
pub fn rat_from_f64(x: f64) -> Rat {
    Rat::from_float(x).expect("finite float")
}

/// Convert a rational to the nearest float, for reporting.
pub fn rat_to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}
