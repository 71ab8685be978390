//! Fourier–Mellin symbols of the planar Cauchy operator on a cone of angle θ.
//!
//! Functions on the two rays of the cone take values in the even subalgebra
//! z + jw (z, w complex in i), the bicomplex numbers. The reflection N acts as
//! reversion j ↦ −j. Real-linear maps are realified over the basis {1, i, j, ij}
//! of each ray, so a 2×2 symbol becomes an 8×8 real matrix.

use std::ops::{Add, Mul, Neg, Sub};

use faer::Mat;
use num_complex::Complex;
use num_traits::{Float, FloatConst};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::{norm_inverse, restricted_map, singular_values};

/// a + b·i + c·j + d·ij with i² = j² = −1 and ij = ji.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bicomplex<T> {
    pub coeffs: [T; 4],
}

impl<T: Float> Bicomplex<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Bicomplex { coeffs: [a, b, c, d] }
    }

    pub fn zero() -> Self {
        let z = T::zero();
        Self::new(z, z, z, z)
    }

    pub fn one() -> Self {
        let z = T::zero();
        Self::new(T::one(), z, z, z)
    }

    pub fn i() -> Self {
        let z = T::zero();
        Self::new(z, T::one(), z, z)
    }

    pub fn j() -> Self {
        let z = T::zero();
        Self::new(z, z, T::one(), z)
    }

    pub fn real(x: T) -> Self {
        let z = T::zero();
        Self::new(x, z, z, z)
    }

    /// z + j·w.
    pub fn from_parts(z: Complex<T>, w: Complex<T>) -> Self {
        Self::new(z.re, z.im, w.re, w.im)
    }

    pub fn z(&self) -> Complex<T> {
        Complex::new(self.coeffs[0], self.coeffs[1])
    }

    pub fn w(&self) -> Complex<T> {
        Complex::new(self.coeffs[2], self.coeffs[3])
    }

    /// Reversion j ↦ −j (the reflection N).
    pub fn reverse(&self) -> Self {
        Self::from_parts(self.z(), -self.w())
    }

    /// cos t + j sin t.
    pub fn exp_j(t: T) -> Self {
        let z = T::zero();
        Self::new(t.cos(), z, t.sin(), z)
    }

    pub fn scale(&self, s: T) -> Self {
        let c = self.coeffs;
        Self::new(c[0] * s, c[1] * s, c[2] * s, c[3] * s)
    }

    pub fn scale_c(&self, s: Complex<T>) -> Self {
        Self::from_parts(self.z() * s, self.w() * s)
    }

    /// Inverse via (z + jw)⁻¹ = (z − jw)/(z² + w²); zero divisors have none.
    pub fn inverse(&self) -> Option<Self> {
        let (z, w) = (self.z(), self.w());
        let den = z * z + w * w;
        if den.norm_sqr() == T::zero() {
            return None;
        }
        Some(Self::from_parts(z / den, -w / den))
    }

    /// Matrix of x ↦ self·x on (a, b, c, d).
    pub fn left_matrix(&self) -> [[T; 4]; 4] {
        let mut m = [[T::zero(); 4]; 4];
        for k in 0..4 {
            let mut e = [T::zero(); 4];
            e[k] = T::one();
            let col = *self * Bicomplex { coeffs: e };
            for (r, row) in m.iter_mut().enumerate() {
                row[k] = col.coeffs[r];
            }
        }
        m
    }
}

impl<T: Float> Add for Bicomplex<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::from_parts(self.z() + o.z(), self.w() + o.w())
    }
}

impl<T: Float> Sub for Bicomplex<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::from_parts(self.z() - o.z(), self.w() - o.w())
    }
}

impl<T: Float> Neg for Bicomplex<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_parts(-self.z(), -self.w())
    }
}

impl<T: Float> Mul for Bicomplex<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (z1, w1, z2, w2) = (self.z(), self.w(), o.z(), o.w());
        Self::from_parts(z1 * z2 - w1 * w2, z1 * w2 + w1 * z2)
    }
}

/// 2×2 bicomplex matrix acting on the pair of ray functions at frequency ξ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MellinSymbol<T> {
    pub theta: T,
    pub alpha: T,
    pub xi: T,
    pub entries: [[Bicomplex<T>; 2]; 2],
}

/// 8×8 real matrix of a real-linear map on two bicomplex components.
pub type Real8<T> = [[T; 8]; 8];

impl<T: Float> MellinSymbol<T> {
    /// Realified matrix of (f₁, f₂) ↦ entries·(f₁, f₂).
    pub fn realify(&self) -> Real8<T> {
        let mut m = [[T::zero(); 8]; 8];
        for r in 0..2 {
            for c in 0..2 {
                let b = self.entries[r][c].left_matrix();
                for p in 0..4 {
                    for q in 0..4 {
                        m[4 * r + p][4 * c + q] = b[p][q];
                    }
                }
            }
        }
        m
    }
}

/// Reversion on both components, realified.
pub fn reflection_n<T: Float>() -> Real8<T> {
    let mut m = [[T::zero(); 8]; 8];
    for k in 0..8 {
        m[k][k] = if k % 4 < 2 { T::one() } else { -T::one() };
    }
    m
}

/// Projection onto the scalar (z) parts, N⁺.
pub fn projection_n_plus<T: Float>() -> Real8<T> {
    let mut m = [[T::zero(); 8]; 8];
    for k in 0..8 {
        if k % 4 < 2 {
            m[k][k] = T::one();
        }
    }
    m
}

fn check_theta<T: Float + FloatConst>(theta: T) -> Result<()> {
    if !(theta > T::zero() && theta <= T::PI()) {
        return Err(Error::Invalid(format!(
            "cone angle must lie in (0, π], got {}",
            theta.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(())
}

/// Symbol of E. The lower-left entry carries the phase e^{+jα/2}; with e^{−jα/2}
/// the symbol would not square to the identity.
pub fn symbol_e<T: Float + FloatConst>(theta: T, xi: T) -> Result<MellinSymbol<T>> {
    check_theta(theta)?;
    let alpha = T::PI() - theta;
    let two = T::one() + T::one();
    let t = (T::PI() * xi).tanh();
    let ch = (T::PI() * xi).cosh();
    let (c, s) = ((alpha * xi).cosh(), (alpha * xi).sinh());
    let ij = Bicomplex::i() * Bicomplex::j();
    let i = Bicomplex::i();
    let j = Bicomplex::j();
    let upper = (j.scale(c) - i.scale(s)).scale(T::one() / ch);
    let lower = (-j.scale(c) - i.scale(s)).scale(T::one() / ch);
    Ok(MellinSymbol {
        theta,
        alpha,
        xi,
        entries: [
            [-ij.scale(t), Bicomplex::exp_j(-alpha / two) * upper],
            [Bicomplex::exp_j(alpha / two) * lower, ij.scale(t)],
        ],
    })
}

/// The antidiagonal coefficient sin(α/2 − iαξ)/cosh(πξ) of N⁺EN⁺.
pub fn symbol_np_e_np<T: Float + FloatConst>(theta: T, xi: T) -> Result<Complex<T>> {
    check_theta(theta)?;
    let alpha = T::PI() - theta;
    let two = T::one() + T::one();
    let arg = Complex::new(alpha / two, -alpha * xi);
    Ok(arg.sin() / (T::PI() * xi).cosh())
}

/// 2×2 complex matrix c·antidiag(1, 1) of N⁺EN⁺.
pub fn symbol_np_e_np_matrix<T: Float + FloatConst>(theta: T, xi: T) -> Result<[[Complex<T>; 2]; 2]> {
    let c = symbol_np_e_np(theta, xi)?;
    let z = Complex::new(T::zero(), T::zero());
    Ok([[z, c], [c, z]])
}

/// ‖(I + c·antidiag(1,1))⁻¹‖ = 1/min|1 ± c| (the matrix is normal).
pub fn inv_norm_iplus_k_at<T: Float + FloatConst>(theta: T, xi: T) -> Result<T> {
    let c = symbol_np_e_np(theta, xi)?;
    let one = Complex::new(T::one(), T::zero());
    let m = (one + c).norm().min((one - c).norm());
    if m == T::zero() {
        return Err(Error::Invalid("I + K symbol is singular".into()));
    }
    Ok(T::one() / m)
}

/// Intermediate quantities of the closed-form inverse of the symbol of I + EN.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockInverseParts<T> {
    pub x: Complex<T>,
    pub y: Complex<T>,
}

/// X and Y of the closed-form Schur complement inverse.
pub fn block_parts<T: Float + FloatConst>(theta: T, xi: T) -> Result<BlockInverseParts<T>> {
    check_theta(theta)?;
    let alpha = T::PI() - theta;
    let two = T::one() + T::one();
    let ch2 = (two * T::PI() * xi).cosh();
    let (c2, s2) = ((two * alpha * xi).cosh(), (two * alpha * xi).sinh());
    let (ca, sa) = (alpha.cos(), alpha.sin());
    let x = Complex::new(ca * c2, sa * s2) / ch2;
    let y = Complex::new(-sa * c2, ca * s2) / ch2;
    Ok(BlockInverseParts { x, y })
}

fn mat4_mul<T: Float>(a: &[[T; 4]; 4], b: &[[T; 4]; 4]) -> [[T; 4]; 4] {
    let mut m = [[T::zero(); 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            for j in 0..4 {
                m[i][j] = m[i][j] + a[i][k] * b[k][j];
            }
        }
    }
    m
}

fn mat4_add<T: Float>(a: &[[T; 4]; 4], b: &[[T; 4]; 4], s: T) -> [[T; 4]; 4] {
    let mut m = *a;
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = m[i][j] + s * b[i][j];
        }
    }
    m
}

/// Realified i-linear map of a complex 2×2 matrix on the coordinates (z, w) of z + jw.
fn complex2_to_real4<T: Float>(m: [[Complex<T>; 2]; 2]) -> [[T; 4]; 4] {
    let mut r = [[T::zero(); 4]; 4];
    for p in 0..2 {
        for q in 0..2 {
            let c = m[p][q];
            r[2 * p][2 * q] = c.re;
            r[2 * p][2 * q + 1] = -c.im;
            r[2 * p + 1][2 * q] = c.im;
            r[2 * p + 1][2 * q + 1] = c.re;
        }
    }
    r
}

/// Inverse of the symbol of I + EN assembled from the closed-form blocks:
/// a⁻¹ = (1 + ij tanh(πξ) N)/(1 + tanh²(πξ)) and the Schur complement inverse
/// (2 + 2X)⁻¹[[1+X, i tanh(2πξ) + Y], [i tanh(2πξ) − Y, 1+X]], written in the basis {1, j}
/// with j = [[0, 1], [−1, 0]] and conjugated by diag(1, −1) into the coordinates (z, w)
/// of z + jw, combined by the standard block formula.
pub fn symbol_iplus_en_inverse<T: Float + FloatConst>(theta: T, xi: T) -> Result<Real8<T>> {
    let e = symbol_e(theta, xi)?;
    let one = T::one();
    let two = one + one;
    let t = (T::PI() * xi).tanh();
    let t2 = (two * T::PI() * xi).tanh();
    let BlockInverseParts { x, y } = block_parts(theta, xi)?;
    let c_one = Complex::new(one, T::zero());
    let den = c_one + x;
    if den.norm() == T::zero() {
        return Err(Error::Invalid("1 + X vanishes".into()));
    }
    let n4 = {
        let mut m = [[T::zero(); 4]; 4];
        m[0][0] = one;
        m[1][1] = one;
        m[2][2] = -one;
        m[3][3] = -one;
        m
    };
    let ij = (Bicomplex::i() * Bicomplex::j()).scale(t).left_matrix();
    let id4 = Bicomplex::<T>::one().left_matrix();
    let mut a_inv = mat4_add(&id4, &mat4_mul(&ij, &n4), one);
    for row in a_inv.iter_mut() {
        for v in row.iter_mut() {
            *v = *v / (one + t * t);
        }
    }
    let it2 = Complex::new(T::zero(), t2);
    let half = c_one / (den * two);
    let s_inv = complex2_to_real4([
        [(c_one + x) * half, -(it2 + y) * half],
        [(y - it2) * half, (c_one + x) * half],
    ]);
    // blocks of A = I + EN
    let b = mat4_mul(&e.entries[0][1].left_matrix(), &n4);
    let c = mat4_mul(&e.entries[1][0].left_matrix(), &n4);
    let s_c_ainv = mat4_mul(&s_inv, &mat4_mul(&c, &a_inv));
    let ainv_b = mat4_mul(&a_inv, &b);
    let tl = mat4_add(&a_inv, &mat4_mul(&ainv_b, &s_c_ainv), one);
    let tr = mat4_mul(&ainv_b, &s_inv);
    let mut out = [[T::zero(); 8]; 8];
    for p in 0..4 {
        for q in 0..4 {
            out[p][q] = tl[p][q];
            out[p][4 + q] = -tr[p][q];
            out[4 + p][q] = -s_c_ainv[p][q];
            out[4 + p][4 + q] = s_inv[p][q];
        }
    }
    Ok(out)
}

/// Realified I + EN.
pub fn symbol_iplus_en<T: Float + FloatConst>(theta: T, xi: T) -> Result<Real8<T>> {
    let e = symbol_e(theta, xi)?.realify();
    let n = reflection_n::<T>();
    let mut m = [[T::zero(); 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            let mut s = if i == j { T::one() } else { T::zero() };
            for k in 0..8 {
                s = s + e[i][k] * n[k][j];
            }
            m[i][j] = s;
        }
    }
    Ok(m)
}

fn to_mat<T: Float>(m: &Real8<T>) -> Mat<f64> {
    Mat::from_fn(8, 8, |i, j| m[i][j].to_f64().unwrap_or(f64::NAN))
}

/// Largest singular value of a realified map.
pub fn real8_norm<T: Float>(m: &Real8<T>) -> Result<f64> {
    Ok(singular_values(&to_mat(m))?[0])
}

/// Frequencies: symmetric geometric grid (`per_sign` points in [1e-4, Ξ] per sign)
/// plus `uniform` equispaced points in [−½, ½].
pub fn xi_grid(per_sign: usize, xi_max: f64, uniform: usize) -> Vec<f64> {
    let mut g = Vec::with_capacity(2 * per_sign + uniform);
    let lo: f64 = 1e-4;
    for k in 0..per_sign {
        let t = if per_sign > 1 { k as f64 / (per_sign - 1) as f64 } else { 1.0 };
        let x = lo * (xi_max / lo).powf(t);
        g.push(x);
        g.push(-x);
    }
    for k in 0..uniform {
        g.push(-0.5 + k as f64 / (uniform.max(2) - 1) as f64);
    }
    g
}

/// The default grid: 2001 points per sign up to Ξ = 40, plus 401 points in [−½, ½].
pub fn default_xi_grid() -> Vec<f64> {
    xi_grid(2001, 40.0, 401)
}

/// sup over the grid of ‖(I + K̂)⁻¹‖.
pub fn inv_norm_iplus_k(theta: f64, grid: &[f64]) -> Result<f64> {
    grid.iter()
        .map(|&xi| inv_norm_iplus_k_at(theta, xi))
        .try_fold(0.0f64, |m, v| Ok(m.max(v?)))
}

/// sup over the grid of ‖(I + ÊN̂)⁻¹‖, via the closed-form inverse.
pub fn inv_norm_iplus_en(theta: f64, grid: &[f64]) -> Result<f64> {
    grid.iter()
        .map(|&xi| real8_norm(&symbol_iplus_en_inverse(theta, xi)?))
        .try_fold(0.0f64, |m, v| Ok(m.max(v?)))
}

/// sup over the grid of the inverse norms of (N⁺: E⁺L₂ → N⁺L₂) and (E⁺: N⁺L₂ → E⁺L₂).
pub fn inv_norm_restricted(theta: f64, grid: &[f64]) -> Result<(f64, f64)> {
    let np = to_mat(&projection_n_plus::<f64>());
    let id = Mat::<f64>::identity(8, 8);
    let mut out = (0.0f64, 0.0f64);
    for &xi in grid {
        let e = to_mat(&symbol_e(theta, xi)?.realify());
        let ep = Mat::from_fn(8, 8, |i, j| 0.5 * (id[(i, j)] + e[(i, j)]));
        let a = norm_inverse(&restricted_map(&id, &ep, &np, 0)?)?;
        let b = norm_inverse(&restricted_map(&id, &np, &ep, 0)?)?;
        out = (out.0.max(a), out.1.max(b));
    }
    Ok(out)
}

/// Least-squares line y = a + b x with its coefficient of determination.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::Invalid("a fit needs at least two matching points".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Invalid("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(LineFit {
        intercept,
        slope,
        r_squared,
    })
}

/// One θ row of a Mellin sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaRow {
    pub theta: f64,
    pub xi_max: f64,
    pub inv_iplus_k: f64,
    pub inv_iplus_en: f64,
    pub inv_np_on_ep: f64,
    pub inv_ep_on_np: f64,
}

/// Sup-norms versus θ and the log-log exponents against 1/θ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<ThetaRow>,
    pub exponent_iplus_k: LineFit,
    pub exponent_iplus_en: LineFit,
    pub exponent_np_on_ep: LineFit,
    pub exponent_ep_on_np: LineFit,
}

pub fn theta_sweep(thetas: &[f64], grid: &[f64]) -> Result<SweepReport> {
    if thetas.len() < 3 {
        return Err(Error::Invalid("a θ sweep needs at least 3 angles".into()));
    }
    let xi_max = grid.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut rows = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let (a, b) = inv_norm_restricted(theta, grid)?;
        rows.push(ThetaRow {
            theta,
            xi_max,
            inv_iplus_k: inv_norm_iplus_k(theta, grid)?,
            inv_iplus_en: inv_norm_iplus_en(theta, grid)?,
            inv_np_on_ep: a,
            inv_ep_on_np: b,
        });
    }
    let lx: Vec<f64> = rows.iter().map(|r| (1.0 / r.theta).ln()).collect();
    let fit = |f: fn(&ThetaRow) -> f64| -> Result<LineFit> {
        let ly: Vec<f64> = rows.iter().map(|r| f(r).ln()).collect();
        fit_line(&lx, &ly)
    };
    Ok(SweepReport {
        exponent_iplus_k: fit(|r| r.inv_iplus_k)?,
        exponent_iplus_en: fit(|r| r.inv_iplus_en)?,
        exponent_np_on_ep: fit(|r| r.inv_np_on_ep)?,
        exponent_ep_on_np: fit(|r| r.inv_ep_on_np)?,
        rows,
    })
}

/// Closed-form sup over ξ of the off-diagonal entry norm, 2/(e^{θ|ξ|} + e^{−(2π−θ)|ξ|}) at ξ.
pub fn offdiag_entry_norm(theta: f64, xi: f64) -> f64 {
    let a = xi.abs();
    2.0 / ((theta * a).exp() + (-(2.0 * std::f64::consts::PI - theta) * a).exp())
}
