//! Dense solves, singular values, condition numbers and restricted maps.

use std::time::Instant;

use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{check_dense, GridFunction, Operator, Scalar};

/// Sizes up to this use a full SVD for norms and condition numbers.
pub const SVD_LIMIT: usize = 3000;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub residual_norm: f64,
    pub condition_estimate: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub size: usize,
    /// Singular directions discarded by a truncated solve.
    pub deflated: usize,
    pub elapsed: f64,
}

fn col_norm<T: Scalar>(x: &Mat<T>) -> f64 {
    let mut s = 0.0;
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            s += x[(i, j)].abs_s().powi(2);
        }
    }
    s.sqrt()
}

fn bytes<T: Scalar>() -> usize {
    std::mem::size_of::<T>()
}

/// Singular values in decreasing order.
pub fn singular_values<T: Scalar>(a: &Mat<T>) -> Result<Vec<f64>> {
    check_dense(a.nrows().max(a.ncols()), bytes::<T>())?;
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let mut s = a
        .singular_values()
        .map_err(|e| Error::Invalid(format!("svd failed: {e:?}")))?;
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    Ok(s)
}

/// (σ_max, σ_min, κ) from a full SVD.
pub fn condition_svd<T: Scalar>(a: &Mat<T>) -> Result<(f64, f64, f64)> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension("condition number needs a square matrix".into()));
    }
    let s = singular_values(a)?;
    let smax = s[0];
    let smin = *s.last().unwrap();
    Ok((smax, smin, smax / smin))
}

/// κ after discarding the `k` smallest singular values.
pub fn deflated_condition(sv: &[f64], k: usize) -> f64 {
    sv[0] / sv[sv.len() - 1 - k]
}

fn start_vector<T: Scalar>(n: usize) -> Mat<T> {
    Mat::from_fn(n, 1, |i, _| T::from_f64(1.0 + ((i * 7919) % 101) as f64 / 101.0))
}

fn normalize<T: Scalar>(x: &mut Mat<T>) -> f64 {
    let n = col_norm(x);
    let inv = T::from_f64(1.0 / n);
    for i in 0..x.nrows() {
        x[(i, 0)] *= inv;
    }
    n
}

/// Largest singular value by power iteration on AᴴA.
pub fn power_norm<T: Scalar>(a: &Mat<T>, tol: f64, max_iter: usize) -> f64 {
    let mut x = start_vector::<T>(a.ncols());
    normalize(&mut x);
    let mut prev = 0.0;
    for _ in 0..max_iter {
        let y = a * &x;
        let mut z = a.adjoint() * &y;
        let lambda = normalize(&mut z).sqrt();
        x = z;
        if (lambda - prev).abs() <= tol * lambda {
            return lambda;
        }
        prev = lambda;
    }
    prev
}

/// Spectral norm: SVD for moderate sizes, power iteration beyond.
pub fn spectral_norm<T: Scalar>(a: &Mat<T>) -> Result<f64> {
    if a.nrows().max(a.ncols()) <= SVD_LIMIT {
        Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
    } else {
        Ok(power_norm(a, 1e-10, 2000))
    }
}

/// Smallest singular value of a square matrix by inverse iteration through an LU factorization.
pub fn sigma_min_estimate<T: Scalar>(a: &Mat<T>, iters: usize) -> f64 {
    let lu = a.partial_piv_lu();
    let mut x = start_vector::<T>(a.ncols());
    normalize(&mut x);
    let mut est = 0.0;
    for _ in 0..iters {
        let y = lu.solve(&x);
        let mut z = lu.solve_adjoint(&y);
        let inv2 = normalize(&mut z);
        x = z;
        let new = 1.0 / inv2.sqrt();
        if (new - est).abs() <= 1e-8 * new {
            return new;
        }
        est = new;
    }
    est
}

/// LU solve of A x = b in the operator's coordinates, with residual and conditioning.
pub fn solve_dense<T: Scalar>(
    a: &Operator<T>,
    b: &GridFunction,
) -> Result<(GridFunction, SolveReport)> {
    let rhs = b.to_coords::<T>(&a.space)?;
    let (x, report) = solve_matrix(&a.weighted_matrix(), &weigh(&a.space, &rhs, 0.5))?;
    let x = weigh(&a.space, &x, -0.5);
    Ok((GridFunction::from_coords(&a.space, &x), report))
}

fn weigh<T: Scalar>(space: &crate::operators::Space, x: &Mat<T>, power: f64) -> Mat<T> {
    Mat::from_fn(x.nrows(), x.ncols(), |i, j| {
        x[(i, j)] * T::from_f64(space.weight_of(i).powf(power))
    })
}

/// LU solve of a plain matrix system; singular systems are reported as errors.
pub fn solve_matrix<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Result<(Mat<T>, SolveReport)> {
    let t0 = Instant::now();
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::Dimension("solve needs a square system and matching rhs".into()));
    }
    let (smax, smin) = if n <= SVD_LIMIT {
        let s = singular_values(a)?;
        (s[0], *s.last().unwrap())
    } else {
        (power_norm(a, 1e-8, 500), sigma_min_estimate(a, 50))
    };
    if !(smax > 0.0 && smin >= 1e-14 * smax) {
        return Err(Error::Singular {
            sigma_min: smin,
            sigma_max: smax,
        });
    }
    let x = a.partial_piv_lu().solve(b);
    let r = a * &x - b;
    let bn = col_norm(b);
    let report = SolveReport {
        residual_norm: if bn > 0.0 { col_norm(&r) / bn } else { col_norm(&r) },
        condition_estimate: smax / smin,
        sigma_min: smin,
        sigma_max: smax,
        size: n,
        deflated: 0,
        elapsed: t0.elapsed().as_secs_f64(),
    };
    Ok((x, report))
}

/// Minimum-norm solution discarding singular values below `rtol`·σ_max.
pub fn pinv_solve<T: Scalar>(a: &Mat<T>, b: &Mat<T>, rtol: f64) -> Result<(Mat<T>, SolveReport)> {
    let t0 = Instant::now();
    check_dense(a.nrows().max(a.ncols()), bytes::<T>())?;
    let svd = a.svd().map_err(|e| Error::Invalid(format!("svd failed: {e:?}")))?;
    let s: Vec<f64> = (0..a.nrows().min(a.ncols()))
        .map(|i| svd.S().column_vector()[i].to_c64().re)
        .collect();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > rtol * smax).collect();
    let u = svd.U();
    let v = svd.V();
    let utb = u.adjoint() * b;
    let mut x = Mat::<T>::zeros(a.ncols(), b.ncols());
    for &i in &keep {
        for c in 0..b.ncols() {
            let coef = utb[(i, c)] * T::from_f64(1.0 / s[i]);
            for r in 0..a.ncols() {
                x[(r, c)] += v[(r, i)] * coef;
            }
        }
    }
    let r = a * &x - b;
    let bn = col_norm(b);
    let smin_kept = keep.iter().map(|&i| s[i]).fold(f64::INFINITY, f64::min);
    let report = SolveReport {
        residual_norm: if bn > 0.0 { col_norm(&r) / bn } else { col_norm(&r) },
        condition_estimate: smax / smin_kept,
        sigma_min: s.iter().cloned().fold(f64::INFINITY, f64::min),
        sigma_max: smax,
        size: a.nrows(),
        deflated: s.len() - keep.len(),
        elapsed: t0.elapsed().as_secs_f64(),
    };
    Ok((x, report))
}

/// Matrix of Q·A restricted to range(P), in orthonormal bases of range(P) and range(Q).
#[derive(Clone, Debug)]
pub struct RestrictedMap<T> {
    pub matrix: Mat<T>,
    /// Columns span range(P).
    pub domain_basis: Mat<T>,
    /// Columns span range(Q).
    pub range_basis: Mat<T>,
}

fn max_abs<T: Scalar>(a: &Mat<T>) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].abs_s());
        }
    }
    m
}

/// Orthonormal basis of the column space of a projector via pivoted QR.
pub fn range_basis<T: Scalar>(p: &Mat<T>) -> Result<Mat<T>> {
    let n = p.nrows();
    let pp = p * p;
    let scale = max_abs(p).max(1.0);
    if max_abs(&(&pp - p)) > 1e-12 * scale {
        return Err(Error::Invalid("projector is not idempotent".into()));
    }
    let qr = p.col_piv_qr();
    let r = qr.R();
    let diag: Vec<f64> = (0..n.min(r.ncols())).map(|i| r[(i, i)].abs_s()).collect();
    let top = diag.first().copied().unwrap_or(0.0);
    let rank = diag.iter().take_while(|&&d| d > 1e-10 * top).count();
    if rank == 0 {
        return Err(Error::Invalid("projector has rank zero".into()));
    }
    let q = qr.compute_thin_Q();
    Ok(Mat::from_fn(n, rank, |i, j| q[(i, j)]))
}

/// Block-diagonal fast path: per-block QR when P has no entries outside `block`-sized diagonal blocks.
fn range_basis_blocked<T: Scalar>(p: &Mat<T>, block: usize) -> Result<Option<Mat<T>>> {
    let n = p.nrows();
    if block == 0 || !n.is_multiple_of(block) || block == n {
        return Ok(None);
    }
    for j in 0..n {
        for i in 0..n {
            if i / block != j / block && p[(i, j)] != T::from_f64(0.0) {
                return Ok(None);
            }
        }
    }
    let nb = n / block;
    let mut cols: Vec<(usize, Mat<T>)> = Vec::with_capacity(nb);
    for b in 0..nb {
        let sub = Mat::from_fn(block, block, |i, j| p[(b * block + i, b * block + j)]);
        cols.push((b, range_basis(&sub)?));
    }
    let total: usize = cols.iter().map(|(_, q)| q.ncols()).sum();
    let mut out = Mat::<T>::zeros(n, total);
    let mut c0 = 0;
    for (b, q) in cols {
        for j in 0..q.ncols() {
            for i in 0..block {
                out[(b * block + i, c0 + j)] = q[(i, j)];
            }
        }
        c0 += q.ncols();
    }
    Ok(Some(out))
}

/// Restricted map of plain matrices.
pub fn restricted_map<T: Scalar>(
    a: &Mat<T>,
    p: &Mat<T>,
    q: &Mat<T>,
    block: usize,
) -> Result<RestrictedMap<T>> {
    let up = match range_basis_blocked(p, block)? {
        Some(b) => b,
        None => range_basis(p)?,
    };
    let uq = match range_basis_blocked(q, block)? {
        Some(b) => b,
        None => range_basis(q)?,
    };
    let m = uq.adjoint() * (a * &up);
    Ok(RestrictedMap {
        matrix: m,
        domain_basis: up,
        range_basis: uq,
    })
}

/// Restricted map of operators in the weighted L2 metric. Pointwise projectors keep
/// the per-node fast path.
pub fn restricted_operator<T: Scalar>(
    a: &Operator<T>,
    p: &Operator<T>,
    q: &Operator<T>,
) -> Result<RestrictedMap<T>> {
    let block = a.space.rank() * a.space.parts();
    restricted_map(&a.weighted_matrix(), &p.weighted_matrix(), &q.weighted_matrix(), block)
}

/// ‖A⁻¹‖ for an injective restricted map: 1/σ_min.
pub fn norm_inverse<T: Scalar>(m: &RestrictedMap<T>) -> Result<f64> {
    let s = singular_values(&m.matrix)?;
    let smin = *s.last().ok_or_else(|| Error::Invalid("empty map".into()))?;
    if !(s[0] > 0.0 && smin > 1e-14 * s[0]) {
        return Err(Error::Singular {
            sigma_min: smin,
            sigma_max: s[0],
        });
    }
    Ok(1.0 / smin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::c64;

    #[test]
    fn identity_condition() {
        let a = Mat::<f64>::identity(5, 5);
        assert_eq!(condition_svd(&a).unwrap(), (1.0, 1.0, 1.0));
        let d = Mat::<c64>::from_fn(2, 2, |i, j| {
            if i == j {
                c64::new(2.0 - i as f64, 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        });
        assert!((condition_svd(&d).unwrap().2 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn restricted_identity() {
        let a = Mat::<f64>::identity(4, 4);
        let p = Mat::from_fn(4, 4, |i, j| if i == j && i < 2 { 1.0 } else { 0.0 });
        let r = restricted_map(&a, &p, &p, 0).unwrap();
        assert_eq!(r.matrix.nrows(), 2);
        assert!((norm_inverse(&r).unwrap() - 1.0).abs() < 1e-12);
        let half = Mat::from_fn(4, 4, |i, j| if i == j { 0.5 } else { 0.0 });
        let r = restricted_map(&half, &a, &a, 0).unwrap();
        assert!((norm_inverse(&r).unwrap() - 2.0).abs() < 1e-12);
        let bad = Mat::from_fn(4, 4, |i, j| if i == j { 0.5 } else { 0.0 });
        assert!(restricted_map(&a, &bad, &a, 0).is_err());
    }

    #[test]
    fn power_matches_svd() {
        let a = Mat::<f64>::from_fn(30, 30, |i, j| ((i * 3 + j * 5) % 7) as f64 - 3.0);
        let s = singular_values(&a).unwrap()[0];
        assert!((power_norm(&a, 1e-12, 5000) - s).abs() < 1e-6 * s);
    }

    #[test]
    fn singular_system_is_reported() {
        let a = Mat::<f64>::zeros(3, 3);
        let b = Mat::<f64>::ones(3, 1);
        assert!(matches!(solve_matrix(&a, &b), Err(Error::Singular { .. })));
    }
}
