//! Pointwise multivector algebra on the complexified exterior algebra of R^2 and R^3.
//!
//! Coefficients are stored densely in canonical subset order: for n = 2 the
//! blades are `1, e1, e2, e12`; for n = 3 they are
//! `1, e1, e2, e3, e12, e13, e23, e123`.
//!
//! Everything that only needs ring operations is generic over `T: Ring`, so the
//! algebra can be exercised exactly with integers or rationals. Metric
//! operations (norms, unit vectors) need `T: Float`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{Float, Num, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalars the algebra is generic over.
pub trait Ring: Num + Copy + Neg<Output = Self> + fmt::Debug {}
impl<T: Num + Copy + Neg<Output = T> + fmt::Debug> Ring for T {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn n(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    /// Number of basis blades, 2^n.
    pub fn blades(self) -> usize {
        1 << self.n()
    }

    pub fn from_n(n: usize) -> Result<Dim> {
        match n {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            _ => Err(Error::Dimension(format!("unsupported dimension {n}"))),
        }
    }
}

const MASKS_2: [u8; 4] = [0b00, 0b01, 0b10, 0b11];
const MASKS_3: [u8; 8] = [0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111];

/// Bitmask (bit i-1 set for e_i) of canonical blade `index`.
pub fn blade_mask(dim: Dim, index: usize) -> u8 {
    match dim {
        Dim::Two => MASKS_2[index],
        Dim::Three => MASKS_3[index],
    }
}

/// Canonical index of the blade with bitmask `mask`.
pub fn blade_index(dim: Dim, mask: u8) -> usize {
    match dim {
        Dim::Two => mask as usize,
        // the n = 3 order is an involution on masks
        Dim::Three => MASKS_3[mask as usize] as usize,
    }
}

pub fn blade_grade(dim: Dim, index: usize) -> u32 {
    blade_mask(dim, index).count_ones()
}

/// Human readable blade name, e.g. `e13`.
pub fn blade_name(dim: Dim, index: usize) -> String {
    let mask = blade_mask(dim, index);
    if mask == 0 {
        return "1".to_string();
    }
    let mut s = String::from("e");
    for i in 0..3 {
        if mask & (1 << i) != 0 {
            s.push(char::from(b'1' + i as u8));
        }
    }
    s
}

/// Sign of moving the sorted factors of `b` past those of `a`:
/// (-1)^{#{(x, y) : x in a, y in b, x > y}}.
fn reorder_sign(a: u8, b: u8) -> i8 {
    let mut swaps = 0;
    let mut bb = b;
    while bb != 0 {
        let y = bb.trailing_zeros();
        swaps += (a >> (y + 1)).count_ones();
        bb &= bb - 1;
    }
    if swaps % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Product rule on basis blades: returns (sign, result mask), sign 0 if the product vanishes.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Product {
    Wedge,
    LeftContraction,
    Clifford,
}

pub fn basis_product(kind: Product, a: u8, b: u8) -> (i8, u8) {
    match kind {
        Product::Wedge => {
            if a & b != 0 {
                (0, 0)
            } else {
                (reorder_sign(a, b), a | b)
            }
        }
        Product::LeftContraction => {
            if a & !b != 0 {
                (0, 0)
            } else {
                let rest = b & !a;
                (reorder_sign(a, rest), rest)
            }
        }
        // Euclidean signature: e_i e_i = 1, so shared factors cancel
        Product::Clifford => (reorder_sign(a, b), a ^ b),
    }
}

fn grade_sign_involution(grade: u32) -> i8 {
    if grade.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn grade_sign_reversion(grade: u32) -> i8 {
    if (grade * grade.saturating_sub(1) / 2).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn signed<T: Ring>(s: i8, c: Complex<T>) -> Complex<T> {
    match s {
        1 => c,
        -1 => -c,
        _ => Complex::zero(),
    }
}

/// A multivector in the complexified exterior algebra of R^n, n in {2, 3}.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multivector<T> {
    dim: Dim,
    coeffs: [Complex<T>; 8],
}

impl<T: Ring> fmt::Debug for Multivector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        write!(f, "Multivector(")?;
        for i in 0..self.dim.blades() {
            let c = self.coeffs[i];
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:?}, {:?}){}", c.re, c.im, blade_name(self.dim, i))?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

impl<T: Ring> Multivector<T> {
    pub fn zero(dim: Dim) -> Self {
        Multivector {
            dim,
            coeffs: [Complex::zero(); 8],
        }
    }

    pub fn scalar(dim: Dim, c: Complex<T>) -> Self {
        let mut m = Self::zero(dim);
        m.coeffs[0] = c;
        m
    }

    pub fn one(dim: Dim) -> Self {
        Self::scalar(dim, Complex::new(T::one(), T::zero()))
    }

    /// Basis blade with canonical index `index`.
    pub fn basis(dim: Dim, index: usize) -> Self {
        assert!(index < dim.blades(), "blade index out of range");
        let mut m = Self::zero(dim);
        m.coeffs[index] = Complex::new(T::one(), T::zero());
        m
    }

    /// Basis blade e_s for a set of 1-based indices, e.g. `&[1, 3]` for e13.
    /// Unsorted input picks up the reordering sign.
    pub fn blade(dim: Dim, indices: &[usize]) -> Self {
        let mut out = Self::one(dim);
        for &i in indices {
            assert!(i >= 1 && i <= dim.n(), "vector index out of range");
            out = out.wedge(&Self::basis(dim, blade_index(dim, 1 << (i - 1))));
        }
        out
    }

    pub fn from_coeffs(dim: Dim, coeffs: &[Complex<T>]) -> Result<Self> {
        if coeffs.len() != dim.blades() {
            return Err(Error::Dimension(format!(
                "expected {} coefficients, got {}",
                dim.blades(),
                coeffs.len()
            )));
        }
        let mut m = Self::zero(dim);
        m.coeffs[..coeffs.len()].copy_from_slice(coeffs);
        Ok(m)
    }

    /// Real grade-1 multivector with the given components.
    pub fn vector(dim: Dim, comps: &[T]) -> Self {
        assert_eq!(comps.len(), dim.n());
        let mut m = Self::zero(dim);
        for (i, &c) in comps.iter().enumerate() {
            m.coeffs[blade_index(dim, 1 << i)] = Complex::new(c, T::zero());
        }
        m
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs[..self.dim.blades()]
    }

    pub fn coeff(&self, index: usize) -> Complex<T> {
        self.coeffs[index]
    }

    pub fn set_coeff(&mut self, index: usize, c: Complex<T>) {
        assert!(index < self.dim.blades());
        self.coeffs[index] = c;
    }

    pub fn scalar_part(&self) -> Complex<T> {
        self.coeffs[0]
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "dimension mismatch: {} vs {}",
                self.dim.n(),
                other.dim.n()
            )));
        }
        Ok(())
    }

    fn map_blades(&self, sign: impl Fn(u32) -> i8) -> Self {
        let mut m = *self;
        for i in 0..self.dim.blades() {
            m.coeffs[i] = signed(sign(blade_grade(self.dim, i)), self.coeffs[i]);
        }
        m
    }

    /// Grade-j part.
    pub fn grade(&self, j: u32) -> Self {
        self.map_blades(|g| if g == j { 1 } else { 0 })
    }

    pub fn even(&self) -> Self {
        self.map_blades(|g| if g % 2 == 0 { 1 } else { 0 })
    }

    pub fn odd(&self) -> Self {
        self.map_blades(|g| if g % 2 == 1 { 1 } else { 0 })
    }

    pub fn try_product(&self, other: &Self, kind: Product) -> Result<Self> {
        self.check_dim(other)?;
        let dim = self.dim;
        let mut out = Self::zero(dim);
        for i in 0..dim.blades() {
            let a = self.coeffs[i];
            if a.is_zero() {
                continue;
            }
            for j in 0..dim.blades() {
                let b = other.coeffs[j];
                if b.is_zero() {
                    continue;
                }
                let (s, mask) = basis_product(kind, blade_mask(dim, i), blade_mask(dim, j));
                if s != 0 {
                    let k = blade_index(dim, mask);
                    out.coeffs[k] = out.coeffs[k] + signed(s, a * b);
                }
            }
        }
        Ok(out)
    }

    pub fn try_wedge(&self, other: &Self) -> Result<Self> {
        self.try_product(other, Product::Wedge)
    }

    pub fn try_lcontract(&self, other: &Self) -> Result<Self> {
        self.try_product(other, Product::LeftContraction)
    }

    pub fn try_clifford(&self, other: &Self) -> Result<Self> {
        self.try_product(other, Product::Clifford)
    }

    /// Exterior product. Panics on dimension mismatch; see [`Self::try_wedge`].
    pub fn wedge(&self, other: &Self) -> Self {
        self.try_wedge(other).expect("wedge")
    }

    /// Left interior product `self ⌟ other`.
    pub fn lcontract(&self, other: &Self) -> Self {
        self.try_lcontract(other).expect("lcontract")
    }

    pub fn clifford(&self, other: &Self) -> Self {
        self.try_clifford(other).expect("clifford product")
    }

    /// Grade involution: grade j scaled by (-1)^j.
    pub fn involution(&self) -> Self {
        self.map_blades(grade_sign_involution)
    }

    /// Reversion: grade j scaled by (-1)^{j(j-1)/2}.
    pub fn reversion(&self) -> Self {
        self.map_blades(grade_sign_reversion)
    }

    /// Coefficientwise complex conjugation.
    pub fn conjugate(&self) -> Self {
        let mut m = *self;
        for c in m.coeffs.iter_mut() {
            *c = c.conj();
        }
        m
    }

    /// Hodge star in three dimensions: e_s ∧ *e_s = e123.
    pub fn try_hodge_star(&self) -> Result<Self> {
        if self.dim != Dim::Three {
            return Err(Error::Dimension("hodge star is defined for n = 3 only".into()));
        }
        let mut out = Self::zero(Dim::Three);
        for i in 0..8 {
            let a = blade_mask(Dim::Three, i);
            let c = a ^ 0b111;
            let (s, _) = basis_product(Product::Wedge, a, c);
            let k = blade_index(Dim::Three, c);
            out.coeffs[k] = out.coeffs[k] + signed(s, self.coeffs[i]);
        }
        Ok(out)
    }

    pub fn hodge_star(&self) -> Self {
        self.try_hodge_star().expect("hodge star")
    }

    /// Hermitian inner product, conjugate-linear in `self`.
    pub fn try_inner(&self, other: &Self) -> Result<Complex<T>> {
        self.check_dim(other)?;
        let mut acc = Complex::zero();
        for i in 0..self.dim.blades() {
            acc = acc + self.coeffs[i].conj() * other.coeffs[i];
        }
        Ok(acc)
    }

    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.try_inner(other).expect("inner product")
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        let mut m = *self;
        for x in m.coeffs.iter_mut() {
            *x = *x * c;
        }
        m
    }

    pub fn scale_re(&self, c: T) -> Self {
        self.scale(Complex::new(c, T::zero()))
    }

    /// Returns (½(aw + ŵa), ½(aw − ŵa)), which equal (a ∧ w, a ⌟ w) for a vector a.
    pub fn riesz(a: &Self, w: &Self) -> (Self, Self) {
        let two = T::one() + T::one();
        let aw = a.clifford(w);
        let wa = w.involution().clifford(a);
        let half = Complex::new(T::one() / two, T::zero());
        ((aw + wa).scale(half), (aw - wa).scale(half))
    }

    /// Maximum absolute coefficient difference, as a squared modulus.
    pub fn max_abs2_diff(&self, other: &Self) -> T
    where
        T: PartialOrd,
    {
        let mut m = T::zero();
        for i in 0..self.dim.blades() {
            let d = (self.coeffs[i] - other.coeffs[i]).norm_sqr();
            if d > m {
                m = d;
            }
        }
        m
    }
}

impl<T: Float + fmt::Debug> Multivector<T> {
    pub fn norm(&self) -> T {
        self.coeffs().iter().fold(T::zero(), |a, c| a + c.norm_sqr()).sqrt()
    }

    /// Maximum coefficient deviation |u_s - v_s|.
    pub fn max_diff(&self, other: &Self) -> T {
        self.max_abs2_diff(other).sqrt()
    }
}

impl<T: Ring> Add for Multivector<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut m = self;
        for i in 0..8 {
            m.coeffs[i] = m.coeffs[i] + rhs.coeffs[i];
        }
        m
    }
}

impl<T: Ring> Sub for Multivector<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut m = self;
        for i in 0..8 {
            m.coeffs[i] = m.coeffs[i] - rhs.coeffs[i];
        }
        m
    }
}

impl<T: Ring> Neg for Multivector<T> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut m = self;
        for c in m.coeffs.iter_mut() {
            *c = -*c;
        }
        m
    }
}

/// Clifford product.
impl<T: Ring> Mul for Multivector<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.clifford(&rhs)
    }
}

/// A real unit vector, typically a unit normal.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitVector<T> {
    mv: Multivector<T>,
}

impl<T: Ring> fmt::Debug for UnitVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UnitVector({:?})", self.mv)
    }
}

impl<T: Float + fmt::Debug> UnitVector<T> {
    /// Builds a unit vector from real components; |ν|² must be 1 within 64 ulp.
    pub fn new(dim: Dim, comps: &[T]) -> Result<Self> {
        if comps.len() != dim.n() {
            return Err(Error::Dimension("wrong number of vector components".into()));
        }
        let n2 = comps.iter().fold(T::zero(), |a, &c| a + c * c);
        let tol = T::epsilon() * T::from(64.0).unwrap();
        if (n2 - T::one()).abs() > tol {
            return Err(Error::NotUnit(n2.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(UnitVector {
            mv: Multivector::vector(dim, comps),
        })
    }

    /// Normalizes the given components.
    pub fn normalized(dim: Dim, comps: &[T]) -> Result<Self> {
        let n = comps.iter().fold(T::zero(), |a, &c| a + c * c).sqrt();
        if n == T::zero() || !n.is_finite() {
            return Err(Error::NotUnit(0.0));
        }
        let v: Vec<T> = comps.iter().map(|&c| c / n).collect();
        Self::new(dim, &v)
    }

    /// Checks that a multivector is a real unit vector.
    pub fn from_multivector(m: &Multivector<T>) -> Result<Self> {
        let dim = m.dim();
        let mut comps = Vec::with_capacity(dim.n());
        for i in 0..dim.blades() {
            let c = m.coeff(i);
            let g = blade_grade(dim, i);
            if c.im != T::zero() || (g != 1 && c.re != T::zero()) {
                return Err(Error::NotUnit(f64::NAN));
            }
        }
        for i in 0..dim.n() {
            comps.push(m.coeff(blade_index(dim, 1 << i)).re);
        }
        Self::new(dim, &comps)
    }

    pub fn as_multivector(&self) -> &Multivector<T> {
        &self.mv
    }

    pub fn components(&self) -> Vec<T> {
        let dim = self.mv.dim();
        (0..dim.n())
            .map(|i| self.mv.coeff(blade_index(dim, 1 << i)).re)
            .collect()
    }

    pub fn dim(&self) -> Dim {
        self.mv.dim()
    }
}

/// N f = ν f̂ ν: reflects normal multivectors across tangential ones.
pub fn reflect_n<T: Float + fmt::Debug>(nu: &UnitVector<T>, f: &Multivector<T>) -> Multivector<T> {
    let n = nu.as_multivector();
    n.clifford(&f.involution()).clifford(n)
}

/// S f = ν f.
pub fn reflect_s<T: Float + fmt::Debug>(nu: &UnitVector<T>, f: &Multivector<T>) -> Multivector<T> {
    nu.as_multivector().clifford(f)
}

/// T f = f̂.
pub fn reflect_t<T: Ring>(f: &Multivector<T>) -> Multivector<T> {
    f.involution()
}

/// N⁺ f = ν ⌟ (ν ∧ f), the tangential part.
pub fn tangential_part<T: Float + fmt::Debug>(
    nu: &UnitVector<T>,
    f: &Multivector<T>,
) -> Multivector<T> {
    let n = nu.as_multivector();
    n.lcontract(&n.wedge(f))
}

/// N⁻ f = ν ∧ (ν ⌟ f), the normal part.
pub fn normal_part<T: Float + fmt::Debug>(
    nu: &UnitVector<T>,
    f: &Multivector<T>,
) -> Multivector<T> {
    let n = nu.as_multivector();
    n.wedge(&n.lcontract(f))
}

/// Maxwell multiplier α + a + *b + *β ↦ α + ν∧a + (ν,b)(*ν), in three dimensions.
pub fn maxwell_multiplier<T: Float + fmt::Debug>(
    nu: &UnitVector<T>,
    f: &Multivector<T>,
) -> Multivector<T> {
    let n = nu.as_multivector();
    let alpha = f.grade(0);
    let a = f.grade(1);
    // *(*u) = u on vectors, so b = *(grade-2 part)
    let b = f.grade(2).hodge_star();
    let nb = n.inner(&b);
    alpha + n.wedge(&a) + n.hodge_star().scale(nb)
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = Multivector<f64>;

    fn e(ix: &[usize]) -> M {
        M::blade(Dim::Three, ix)
    }

    #[test]
    fn wedge_basis_examples() {
        assert_eq!(e(&[1]).wedge(&e(&[2])), e(&[1, 2]));
        assert_eq!(e(&[2]).wedge(&e(&[1, 3])), -e(&[1, 2, 3]));
        assert_eq!(e(&[1]).wedge(&e(&[1, 2])), M::zero(Dim::Three));
    }

    #[test]
    fn contraction_examples() {
        assert_eq!(e(&[1]).lcontract(&e(&[1, 2])), e(&[2]));
        assert_eq!(e(&[2]).lcontract(&e(&[1])), M::zero(Dim::Three));
    }

    #[test]
    fn clifford_examples() {
        assert_eq!(e(&[1]) * e(&[1]), M::one(Dim::Three));
        assert_eq!(e(&[1]) * e(&[2]), e(&[1, 2]));
        assert_eq!(e(&[2]) * e(&[1]), -e(&[1, 2]));
        let j = M::blade(Dim::Two, &[1, 2]);
        assert_eq!(j * j, -M::one(Dim::Two));
    }

    #[test]
    fn sign_maps() {
        assert_eq!(e(&[1, 2, 3]).involution(), -e(&[1, 2, 3]));
        assert_eq!(e(&[1, 2, 3]).reversion(), -e(&[1, 2, 3]));
        assert_eq!(e(&[1, 2]).reversion(), -e(&[1, 2]));
        assert_eq!(e(&[1, 2]).involution(), e(&[1, 2]));
    }

    #[test]
    fn hodge_table() {
        assert_eq!(M::one(Dim::Three).hodge_star(), e(&[1, 2, 3]));
        assert_eq!(e(&[1]).hodge_star(), e(&[2, 3]));
        assert_eq!(e(&[2]).hodge_star(), -e(&[1, 3]));
        assert_eq!(e(&[3]).hodge_star(), e(&[1, 2]));
        for i in 0..8 {
            let b = M::basis(Dim::Three, i);
            assert_eq!(b.hodge_star().hodge_star(), b);
        }
        assert!(M::one(Dim::Two).try_hodge_star().is_err());
    }

    #[test]
    fn reflections() {
        let nu = UnitVector::new(Dim::Three, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(reflect_n(&nu, &e(&[1])), -e(&[1]));
        assert_eq!(reflect_n(&nu, &e(&[2])), e(&[2]));
        let one = M::one(Dim::Three);
        assert_eq!(reflect_s(&nu, &one), e(&[1]));
        assert_eq!(reflect_s(&nu, &reflect_s(&nu, &one)), one);
    }

    #[test]
    fn inner_convention() {
        let i = Complex::new(0.0, 1.0);
        assert_eq!(e(&[1]).inner(&e(&[1])), Complex::new(1.0, 0.0));
        assert_eq!(e(&[1]).inner(&e(&[2])), Complex::new(0.0, 0.0));
        assert_eq!(e(&[1, 2]).scale(i).inner(&e(&[1, 2])), -i);
    }

    #[test]
    fn riesz_examples() {
        let (w, c) = M::riesz(&e(&[1]), &e(&[2]));
        assert_eq!((w, c), (e(&[1, 2]), M::zero(Dim::Three)));
        let (w, c) = M::riesz(&e(&[1]), &e(&[1, 2]));
        assert_eq!((w, c), (M::zero(Dim::Three), e(&[2])));
    }

    #[test]
    fn multiplier_formula() {
        let nu = UnitVector::new(Dim::Three, &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(maxwell_multiplier(&nu, &e(&[1])), -e(&[1, 3]));
        assert_eq!(maxwell_multiplier(&nu, &e(&[1, 2, 3])), M::zero(Dim::Three));
    }

    #[test]
    fn unit_vector_rejects() {
        assert!(UnitVector::new(Dim::Three, &[1.0, 1.0, 0.0]).is_err());
        let bad = e(&[1]).scale(Complex::new(0.0, 1.0));
        assert!(UnitVector::from_multivector(&bad).is_err());
        assert!(e(&[1]).try_wedge(&M::one(Dim::Two)).is_err());
    }
}
