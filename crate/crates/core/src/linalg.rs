//! Small dense linear algebra: symmetric eigendecomposition, Gram-Schmidt
//! orthonormalization, and minimum-norm solutions of underdetermined
//! systems. Everything here targets desk-scale matrices (dimension up to a
//! few hundred), which keeps the implementations simple and allocation
//! patterns obvious.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("eigenvalue iteration failed to converge")]
    NoConvergence,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// a -= c * b
pub fn axpy(a: &mut [f64], c: f64, b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x -= c * y;
    }
}

/// Eigendecomposition of a real symmetric matrix.
///
/// Householder reduction to tridiagonal form followed by the implicit-shift
/// QL iteration. Returns eigenvalues in ascending order; `vectors[k]` is the
/// unit eigenvector for `values[k]`.
pub fn symmetric_eigen(a: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>), LinalgError> {
    let n = a.len();
    if n == 0 {
        return Ok((vec![], vec![]));
    }
    for row in a {
        if row.len() != n {
            return Err(LinalgError::Dimension(format!(
                "expected {n}x{n} matrix, got row of length {}",
                row.len()
            )));
        }
    }
    let mut z: Vec<Vec<f64>> = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut z, &mut d, &mut e);
    tql2(&mut d, &mut e, &mut z)?;
    // sort ascending, pull eigenvectors out of the columns of z
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&c| (0..n).map(|r| z[r][c]).collect())
        .collect();
    Ok((values, vectors))
}

fn tred2(a: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = a.len();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[i][k].abs()).sum();
            if scale == 0.0 {
                e[i] = a[i][l];
            } else {
                for k in 0..=l {
                    a[i][k] /= scale;
                    h += a[i][k] * a[i][k];
                }
                let mut f = a[i][l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i][l] = f - g;
                f = 0.0;
                for j in 0..=l {
                    a[j][i] = a[i][j] / h;
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j][k] * a[i][k];
                    }
                    for k in j + 1..=l {
                        g += a[k][j] * a[i][k];
                    }
                    e[j] = g / h;
                    f += e[j] * a[i][j];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[i][j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j][k] -= f * e[k] + g * a[i][k];
                    }
                }
            }
        } else {
            e[i] = a[i][l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += a[i][k] * a[k][j];
                }
                for k in 0..i {
                    a[k][j] -= g * a[k][i];
                }
            }
        }
        d[i] = a[i][i];
        a[i][i] = 1.0;
        for j in 0..i {
            a[j][i] = 0.0;
            a[i][j] = 0.0;
        }
    }
}

fn tql2(d: &mut [f64], e: &mut [f64], z: &mut [Vec<f64>]) -> Result<(), LinalgError> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iters = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iters += 1;
            if iters > 64 {
                return Err(LinalgError::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(if g >= 0.0 { 1.0 } else { -1.0 }));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for zk in z.iter_mut() {
                    f = zk[i + 1];
                    zk[i + 1] = s * zk[i] + c * f;
                    zk[i] = c * zk[i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Modified Gram-Schmidt: orthonormalize `vectors`, dropping entries whose
/// residual norm falls below `tol` relative to the input norm.
pub fn orthonormalize(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let scale = norm(v).max(1.0);
        let mut r = v.clone();
        for b in &basis {
            let c = dot(&r, b);
            axpy(&mut r, c, b);
        }
        let nr = norm(&r);
        if nr > tol * scale {
            for x in r.iter_mut() {
                *x /= nr;
            }
            basis.push(r);
        }
    }
    basis
}

/// Orthonormal basis of the orthogonal complement of `span` inside R^dim.
///
/// `span` must already be orthonormal; the complement is built by running
/// Gram-Schmidt over the standard basis vectors in index order, which makes
/// the output deterministic.
pub fn orthonormal_complement(span: &[Vec<f64>], dim: usize, tol: f64) -> Vec<Vec<f64>> {
    let mut all: Vec<Vec<f64>> = span.to_vec();
    let mut complement = Vec::new();
    for i in 0..dim {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        for b in &all {
            let c = dot(&v, b);
            axpy(&mut v, c, b);
        }
        let nv = norm(&v);
        if nv > tol {
            for x in v.iter_mut() {
                *x /= nv;
            }
            all.push(v.clone());
            complement.push(v);
        }
        if all.len() == dim {
            break;
        }
    }
    complement
}

/// Minimum-Euclidean-norm solution of the (possibly rank-deficient,
/// possibly redundant) system `rows * w = rhs`.
///
/// Solves through the Gram matrix `M M^T` with an eigenvalue cutoff
/// relative to the largest eigenvalue; the solution lives in the row space,
/// which is exactly the minimum-norm point of the affine solution set when
/// the system is consistent. Callers should check the residual.
pub fn min_norm_solution(
    rows: &[Vec<f64>],
    rhs: &[f64],
    rel_cutoff: f64,
) -> Result<Vec<f64>, LinalgError> {
    let m = rows.len();
    if m != rhs.len() {
        return Err(LinalgError::Dimension(format!(
            "{} rows vs {} rhs entries",
            m,
            rhs.len()
        )));
    }
    if m == 0 {
        return Ok(vec![]);
    }
    let ncols = rows[0].len();
    let mut gram = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i..m {
            let g = dot(&rows[i], &rows[j]);
            gram[i][j] = g;
            gram[j][i] = g;
        }
    }
    let (vals, vecs) = symmetric_eigen(&gram)?;
    let vmax = vals.last().copied().unwrap_or(0.0).max(0.0);
    let cut = vmax * rel_cutoff;
    // y = pinv(M M^T) rhs, keeping only well-conditioned eigendirections
    let mut y = vec![0.0; m];
    for (lam, v) in vals.iter().zip(&vecs) {
        if *lam > cut && *lam > 0.0 {
            let c = dot(v, rhs) / lam;
            for (yi, vi) in y.iter_mut().zip(v) {
                *yi += c * vi;
            }
        }
    }
    let mut w = vec![0.0; ncols];
    for (row, yi) in rows.iter().zip(&y) {
        for (wk, rk) in w.iter_mut().zip(row) {
            *wk += yi * rk;
        }
    }
    Ok(w)
}

/// Max absolute residual of `rows * w - rhs`.
pub fn residual_inf(rows: &[Vec<f64>], w: &[f64], rhs: &[f64]) -> f64 {
    rows.iter()
        .zip(rhs)
        .map(|(row, t)| (dot(row, w) - t).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn eigen_known_2x2() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let (vals, vecs) = symmetric_eigen(&a).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        for (lam, v) in vals.iter().zip(&vecs) {
            for r in 0..2 {
                let av = dot(&a[r], v);
                assert!((av - lam * v[r]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eigen_random_residuals() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 2, 5, 12, 25] {
            let mut a = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in i..n {
                    let x: f64 = rng.gen_range(-1.0..1.0);
                    a[i][j] = x;
                    a[j][i] = x;
                }
            }
            let (vals, vecs) = symmetric_eigen(&a).unwrap();
            for (lam, v) in vals.iter().zip(&vecs) {
                assert!((norm(v) - 1.0).abs() < 1e-9);
                for r in 0..n {
                    let av = dot(&a[r], v);
                    assert!((av - lam * v[r]).abs() < 1e-8, "residual too large");
                }
            }
            // pairwise orthogonality
            for i in 0..vecs.len() {
                for j in i + 1..vecs.len() {
                    assert!(dot(&vecs[i], &vecs[j]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn complement_is_orthogonal_and_full() {
        let span = orthonormalize(&[vec![1.0, 1.0, -1.0]], 1e-12);
        let comp = orthonormal_complement(&span, 3, 1e-10);
        assert_eq!(comp.len(), 2);
        for c in &comp {
            assert!(dot(c, &span[0]).abs() < 1e-12);
        }
        assert!(dot(&comp[0], &comp[1]).abs() < 1e-12);
    }

    #[test]
    fn min_norm_matches_hand_example() {
        // w0 + w1 = 1 has min-norm solution (0.5, 0.5)
        let rows = vec![vec![1.0, 1.0]];
        let w = min_norm_solution(&rows, &[1.0], 1e-12).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn min_norm_handles_redundant_rows() {
        let rows = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![1.0, -1.0]];
        let rhs = vec![1.0, 2.0, 0.0];
        let w = min_norm_solution(&rows, &rhs, 1e-12).unwrap();
        assert!(residual_inf(&rows, &w, &rhs) < 1e-10);
    }
}
