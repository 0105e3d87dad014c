//! Lovász number of a weighted graph.
//!
//! Solves the semidefinite program
//!     max <W, B>  s.t.  tr B = 1,  B_uv = 0 for adjacent u,v,  B psd
//! (W_uv = sqrt(w_u w_v)) with a first-order boundary-point iteration.
//! Every reported value carries a rigorous bracket: the lower bound comes
//! from a repaired primal-feasible B, the upper bound from a repaired
//! dual-feasible (t, Z) with the witness `t + max(0, -lambda_min)`. The
//! iteration stops when the bracket closes below the gap target.

use super::{ExclusivityGraph, GraphError};
use crate::linalg::symmetric_eigen;

#[derive(Debug, Clone)]
pub struct ThetaOptions {
    /// Target width of the duality bracket.
    pub tol: f64,
    pub max_iter: usize,
    /// Bracket evaluation period (each check costs two eigendecompositions).
    pub check_every: usize,
}

impl Default for ThetaOptions {
    fn default() -> Self {
        ThetaOptions {
            tol: crate::THETA_TOL,
            max_iter: 500_000,
            check_every: 25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ThetaResult {
    /// Bracket midpoint.
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub iterations: usize,
    /// Theta-body multipliers x_v extracted from the primal solution;
    /// sum_v w_v x_v reproduces the value.
    pub multipliers: Option<Vec<f64>>,
    /// Orthonormal labelling: unit vectors, orthogonal for every
    /// non-adjacent pair, first entry sqrt(w_v / upper). Present when the
    /// extracted vectors pass the feasibility re-check.
    pub labelling: Option<Vec<Vec<f64>>>,
}

pub fn lovasz_number(
    g: &ExclusivityGraph,
    vertex_cap: usize,
    opts: &ThetaOptions,
) -> Result<ThetaResult, GraphError> {
    let n = g.num_vertices();
    if n > vertex_cap {
        return Err(GraphError::TooLarge {
            what: "theta vertices",
            got: n,
            cap: vertex_cap,
        });
    }
    if n == 0 {
        return Ok(ThetaResult {
            value: 0.0,
            lower: 0.0,
            upper: 0.0,
            gap: 0.0,
            iterations: 0,
            multipliers: Some(vec![]),
            labelling: Some(vec![]),
        });
    }
    for &w in g.weights() {
        if !(w >= 0.0) {
            return Err(GraphError::BadWeight(w));
        }
    }
    let wmax = g.weights().iter().fold(0.0f64, |a, &b| a.max(b));
    if wmax == 0.0 {
        return Ok(ThetaResult {
            value: 0.0,
            lower: 0.0,
            upper: 0.0,
            gap: 0.0,
            iterations: 0,
            multipliers: Some(vec![0.0; n]),
            labelling: None,
        });
    }
    let w: Vec<f64> = g.weights().iter().map(|x| x / wmax).collect();
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| g.adjacent(u, v))
        .collect();
    // solve the max-weight-1 normalization; the bracket scales linearly
    let scaled_opts = ThetaOptions {
        tol: opts.tol / wmax.max(1.0),
        ..opts.clone()
    };
    let solved = admm(n, &edges, &w, &scaled_opts);
    let (lower, upper) = (solved.lower * wmax, solved.upper * wmax);
    if upper - lower > opts.tol {
        return Err(GraphError::ThetaNoConvergence { lower, upper });
    }
    let multipliers = solved.primal.as_ref().map(|b| {
        extract_multipliers(b, &w)
            .iter()
            .map(|x| x / wmax)
            .collect()
    });
    let labelling = solved
        .dual
        .as_ref()
        .and_then(|(yt, ye)| extract_labelling(n, &edges, &w, *yt, ye, solved.upper, g));
    Ok(ThetaResult {
        value: 0.5 * (lower + upper),
        lower,
        upper,
        gap: upper - lower,
        iterations: solved.iterations,
        multipliers,
        labelling,
    })
}

struct Solved {
    lower: f64,
    upper: f64,
    iterations: usize,
    primal: Option<Vec<Vec<f64>>>,
    dual: Option<(f64, Vec<f64>)>,
}

fn admm(n: usize, edges: &[(usize, usize)], w: &[f64], opts: &ThetaOptions) -> Solved {
    let r: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let wmat = outer(&r, &r);
    let mut x = identity(n, 1.0 / n as f64);
    let mut s = vec![vec![0.0; n]; n];
    let mut sig = 1.0f64;
    let mut best_lb = f64::NEG_INFINITY;
    let mut best_ub = f64::INFINITY;
    let mut best_primal = None;
    let mut best_dual = None;
    let mut iterations = 0;
    for it in 0..opts.max_iter {
        iterations = it + 1;
        // y-step: diagonal normal equations (constraint matrices orthogonal)
        let mut sw = add(&s, &wmat, 1.0);
        let tr_sw = trace(&sw);
        let tr_x = trace(&x);
        let yt = (tr_sw + (tr_x - 1.0) / sig) / n as f64;
        let ye: Vec<f64> = edges
            .iter()
            .map(|&(i, j)| (s[i][j] + wmat[i][j] + x[i][j] / sig) / 0.5)
            .collect();
        // m = A^T y - W - X/sigma
        for (row, (xr, wr)) in sw.iter_mut().zip(x.iter().zip(&wmat)) {
            for ((m, xe), we) in row.iter_mut().zip(xr).zip(wr) {
                *m = -we - xe / sig;
            }
        }
        for i in 0..n {
            sw[i][i] += yt;
        }
        for (k, &(i, j)) in edges.iter().enumerate() {
            sw[i][j] += ye[k] / 2.0;
            sw[j][i] += ye[k] / 2.0;
        }
        let m = sw;
        let Ok((vals, vecs)) = symmetric_eigen(&m) else {
            break;
        };
        s = psd_part(&vals, &vecs, n);
        x = add(&s, &m, -1.0);
        scale_in_place(&mut x, sig);
        if (it + 1) % opts.check_every == 0 {
            // dual repair
            let mut sd = add(&identity(n, yt), &wmat, -1.0);
            for (k, &(i, j)) in edges.iter().enumerate() {
                sd[i][j] += ye[k] / 2.0;
                sd[j][i] += ye[k] / 2.0;
            }
            let lmin = match symmetric_eigen(&sd) {
                Ok((vals, _)) => vals[0],
                Err(_) => break,
            };
            let ub = yt + (-lmin).max(0.0);
            // primal repair: zero the edges, lift the diagonal, renormalize
            let mut xf = x.clone();
            for &(i, j) in edges {
                xf[i][j] = 0.0;
                xf[j][i] = 0.0;
            }
            let l0 = match symmetric_eigen(&xf) {
                Ok((vals, _)) => vals[0],
                Err(_) => break,
            };
            if l0 < 0.0 {
                for i in 0..n {
                    xf[i][i] -= l0;
                }
            }
            let tr = trace(&xf);
            let lb = if tr > 1e-14 {
                frob_inner(&wmat, &xf) / tr
            } else {
                0.0
            };
            if lb > best_lb {
                best_lb = lb;
                let mut b = xf;
                scale_in_place(&mut b, 1.0 / tr);
                best_primal = Some(b);
            }
            if ub < best_ub {
                best_ub = ub;
                best_dual = Some((yt, ye.clone()));
            }
            if best_ub - best_lb <= opts.tol {
                break;
            }
            // sigma adaptation keyed to the residual balance; the dual
            // residual is ||S - (A^T y - W)|| with A^T y - W = m + X/sigma
            let mut pres = (tr_x - 1.0) * (tr_x - 1.0);
            for &(i, j) in edges {
                pres += x[i][j] * x[i][j];
            }
            let pres = pres.sqrt();
            let mut dres = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let d = s[i][j] - (m[i][j] + x[i][j] / sig);
                    dres += d * d;
                }
            }
            let dres = dres.sqrt();
            if pres > 10.0 * dres {
                sig = (sig / 1.5).max(1e-4);
            } else if dres > 10.0 * pres {
                sig = (sig * 1.5).min(1e4);
            }
        }
    }
    Solved {
        lower: best_lb,
        upper: best_ub,
        iterations,
        primal: best_primal,
        dual: best_dual,
    }
}

/// Theta-body multipliers from a primal-feasible B:
/// x_v = (sum_j r_j B_jv)^2 / (w_v <W,B> B_vv).
fn extract_multipliers(b: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let n = w.len();
    let r: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let val = frob_inner(&outer(&r, &r), b);
    (0..n)
        .map(|v| {
            if w[v] > 1e-12 && b[v][v] > 1e-12 && val > 1e-12 {
                let s: f64 = (0..n).map(|j| r[j] * b[j][v]).sum();
                s * s / (w[v] * val * b[v][v])
            } else {
                0.0
            }
        })
        .collect()
}

/// Orthonormal labelling from the repaired dual solution: factor
/// S = t I + Z - W psd as G^T G and lift with the weight row; vectors of
/// non-adjacent vertices are orthogonal because Z vanishes off the edges.
fn extract_labelling(
    n: usize,
    edges: &[(usize, usize)],
    w: &[f64],
    yt: f64,
    ye: &[f64],
    upper: f64,
    g: &ExclusivityGraph,
) -> Option<Vec<Vec<f64>>> {
    let t = upper;
    if t <= 0.0 {
        return None;
    }
    let r: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let mut sd = add(&identity(n, t), &outer(&r, &r), -1.0);
    for (k, &(i, j)) in edges.iter().enumerate() {
        sd[i][j] += ye[k] / 2.0;
        sd[j][i] += ye[k] / 2.0;
    }
    let _ = yt;
    let (vals, vecs) = symmetric_eigen(&sd).ok()?;
    // columns of the factor: entry v of eigvec k scaled by sqrt(lambda_k)
    let mut vectors: Vec<Vec<f64>> = (0..n)
        .map(|v| {
            let mut col = Vec::with_capacity(n + 1);
            col.push(r[v] / t.sqrt());
            for (lam, vec) in vals.iter().zip(&vecs) {
                col.push(lam.max(0.0).sqrt() * vec[v] / t.sqrt());
            }
            col
        })
        .collect();
    // feasibility re-check: unit norms, orthogonality on non-adjacent pairs
    for col in vectors.iter_mut() {
        let nrm = crate::linalg::norm(col);
        if (nrm - 1.0).abs() > 1e-4 {
            return None;
        }
        for x in col.iter_mut() {
            *x /= nrm;
        }
    }
    for u in 0..n {
        for v in u + 1..n {
            if !g.adjacent(u, v) && crate::linalg::dot(&vectors[u], &vectors[v]).abs() > 1e-5 {
                return None;
            }
        }
    }
    Some(vectors)
}

fn identity(n: usize, diag: f64) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        m[i][i] = diag;
    }
    m
}

fn outer(a: &[f64], b: &[f64]) -> Vec<Vec<f64>> {
    a.iter()
        .map(|x| b.iter().map(|y| x * y).collect())
        .collect()
}

fn add(a: &[Vec<f64>], b: &[Vec<f64>], cb: f64) -> Vec<Vec<f64>> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + cb * y).collect())
        .collect()
}

fn scale_in_place(a: &mut [Vec<f64>], c: f64) {
    for row in a {
        for x in row {
            *x *= c;
        }
    }
}

fn trace(a: &[Vec<f64>]) -> f64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

fn frob_inner(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| crate::linalg::dot(ra, rb))
        .sum()
}

fn psd_part(vals: &[f64], vecs: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; n]; n];
    for (lam, v) in vals.iter().zip(vecs) {
        if *lam > 0.0 {
            for i in 0..n {
                let li = lam * v[i];
                for j in 0..n {
                    out[i][j] += li * v[j];
                }
            }
        }
    }
    out
}

/// Closed-form Lovász number of the odd cycle C_n with unit weights:
/// n cos(pi/n) / (1 + cos(pi/n)). Used as an independent oracle in tests.
pub fn odd_cycle_theta(n: usize) -> f64 {
    let c = (std::f64::consts::PI / n as f64).cos();
    n as f64 * c / (1.0 + c)
}
