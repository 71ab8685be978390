//! Dense discretizations of boundary operators acting on multivector-valued grid functions.
//!
//! An [`Operator`] is a dense matrix together with the [`Space`] it acts on. A
//! space fixes the nodes, their quadrature weights and the local coordinates at
//! each node: either a subset of basis blades or a per-node orthonormal basis of
//! a subspace of the algebra. Real fields (the static planar problems) use one
//! real coordinate per local coordinate; realified complex fields use two,
//! interleaved as (Re, Im).

mod dump;
mod plane;
pub mod quadrature;
mod surface;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use faer::traits::ComplexField;
use faer::{c64, Mat};
use num_complex::Complex64 as C64;

use crate::clifford::{
    maxwell_multiplier, reflect_n, reflect_s, reflect_t, Dim, Multivector, UnitVector,
};
use crate::error::{Error, Result};
use crate::geometry::{Curve2D, Mesh, Surface3D};

pub use dump::{dump_operator, read_dump, DumpHeader};
pub use plane::{assemble_e_2d, assemble_e_2d_with, assemble_k_2d, assemble_kstar_2d, PvRule};
pub use surface::{
    assemble_e_3d, cauchy_integral, identity_map, panel_average, CauchyKernel3d, NearFieldRule,
};

type Mv = Multivector<f64>;

/// Largest matrix the library agrees to store densely, in bytes.
pub const DENSE_BYTES_CAP: usize = 2 << 30;

/// Matrix entry types: real or complex double precision.
pub trait Scalar:
    ComplexField<Real = f64>
    + Copy
    + Send
    + Sync
    + fmt::Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    const IS_COMPLEX: bool;
    fn from_c64(z: C64) -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_c64(self) -> C64;
    fn conj_s(self) -> Self;
    fn abs_s(self) -> f64;
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;
    fn from_c64(z: C64) -> Self {
        z.re
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
    fn conj_s(self) -> Self {
        self
    }
    fn abs_s(self) -> f64 {
        self.abs()
    }
}

impl Scalar for c64 {
    const IS_COMPLEX: bool = true;
    fn from_c64(z: C64) -> Self {
        z
    }
    fn from_f64(x: f64) -> Self {
        c64::new(x, 0.0)
    }
    fn to_c64(self) -> C64 {
        self
    }
    fn conj_s(self) -> Self {
        self.conj()
    }
    fn abs_s(self) -> f64 {
        self.norm()
    }
}

pub fn check_dense(n: usize, bytes_per_entry: usize) -> Result<()> {
    if n.saturating_mul(n).saturating_mul(bytes_per_entry) > DENSE_BYTES_CAP {
        return Err(Error::TooLarge(n));
    }
    Ok(())
}

/// Local coordinates at each node.
#[derive(Clone, Debug, PartialEq)]
pub enum Local {
    /// Coefficients of the listed canonical blades.
    Blades(Vec<usize>),
    /// Coordinates in a per-node orthonormal basis; every node has the same rank.
    Basis(Arc<Vec<Vec<Mv>>>),
}

impl Local {
    pub fn all(dim: Dim) -> Local {
        Local::Blades((0..dim.blades()).collect())
    }

    pub fn even(dim: Dim) -> Local {
        Local::Blades(
            (0..dim.blades())
                .filter(|&b| crate::clifford::blade_grade(dim, b).is_multiple_of(2))
                .collect(),
        )
    }

    pub fn rank(&self) -> usize {
        match self {
            Local::Blades(b) => b.len(),
            Local::Basis(b) => b.first().map_or(0, |v| v.len()),
        }
    }

    /// The multivector of local coordinate `a` at `node`.
    pub fn vector(&self, dim: Dim, node: usize, a: usize) -> Mv {
        match self {
            Local::Blades(b) => Mv::basis(dim, b[a]),
            Local::Basis(b) => b[node][a],
        }
    }
}

/// Nodes, weights and local coordinates an operator acts on.
#[derive(Clone, Debug)]
pub struct Space {
    pub dim: Dim,
    pub weights: Arc<Vec<f64>>,
    pub local: Local,
    /// Two real coordinates (Re, Im) per local coordinate.
    pub realified: bool,
    pub mesh_hash: u64,
}

impl PartialEq for Space {
    fn eq(&self, o: &Self) -> bool {
        self.dim == o.dim
            && self.realified == o.realified
            && self.local == o.local
            && self.mesh_hash == o.mesh_hash
            && self.weights.len() == o.weights.len()
    }
}

impl Space {
    pub fn new(mesh: &Mesh, local: Local) -> Space {
        let dim = match mesh {
            Mesh::Curve(_) => Dim::Two,
            Mesh::Surface(_) => Dim::Three,
        };
        Space {
            dim,
            weights: Arc::new(mesh.weights()),
            local,
            realified: false,
            mesh_hash: mesh.hash(),
        }
    }

    pub fn of_curve(c: &Curve2D, local: Local) -> Space {
        Space::new(&Mesh::Curve(c.clone()), local)
    }

    pub fn of_surface(s: &Surface3D, local: Local) -> Space {
        Space::new(&Mesh::Surface(s.clone()), local)
    }

    pub fn nodes(&self) -> usize {
        self.weights.len()
    }

    pub fn rank(&self) -> usize {
        self.local.rank()
    }

    /// Coordinates per local coordinate.
    pub fn parts(&self) -> usize {
        if self.realified {
            2
        } else {
            1
        }
    }

    pub fn size(&self) -> usize {
        self.nodes() * self.rank() * self.parts()
    }

    pub fn with_local(&self, local: Local) -> Space {
        Space {
            local,
            ..self.clone()
        }
    }

    pub fn realified(&self) -> Space {
        Space {
            realified: true,
            ..self.clone()
        }
    }

    /// Weight attached to coordinate index `i`.
    pub fn weight_of(&self, i: usize) -> f64 {
        self.weights[i / (self.rank() * self.parts())]
    }

    pub fn node_of(&self, i: usize) -> usize {
        i / (self.rank() * self.parts())
    }
}

/// One multivector per node.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub dim: Dim,
    pub values: Vec<Mv>,
}

impl GridFunction {
    pub fn zeros(dim: Dim, n: usize) -> Self {
        GridFunction {
            dim,
            values: vec![Mv::zero(dim); n],
        }
    }

    pub fn from_fn(dim: Dim, n: usize, f: impl FnMut(usize) -> Mv) -> Self {
        GridFunction {
            dim,
            values: (0..n).map(f).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(usize, &Mv) -> Mv) -> Self {
        GridFunction {
            dim: self.dim,
            values: self.values.iter().enumerate().map(|(i, v)| f(i, v)).collect(),
        }
    }

    pub fn sub(&self, o: &GridFunction) -> GridFunction {
        self.map(|i, v| *v - o.values[i])
    }

    /// Weighted L2 norm (Σ w_i |f_i|²)^{1/2}.
    pub fn norm(&self, weights: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(weights)
            .map(|(v, w)| w * v.norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Weighted inner product Σ w_i (f_i, g_i).
    pub fn inner(&self, o: &GridFunction, weights: &[f64]) -> C64 {
        self.values
            .iter()
            .zip(&o.values)
            .zip(weights)
            .map(|((a, b), w)| a.inner(b) * *w)
            .sum()
    }

    /// Coordinates in `space`. For real-field spaces imaginary parts are dropped.
    pub fn to_coords<T: Scalar>(&self, space: &Space) -> Result<Mat<T>> {
        if self.len() != space.nodes() || self.dim != space.dim {
            return Err(Error::Dimension("grid function does not match the space".into()));
        }
        let r = space.rank();
        let p = space.parts();
        let mut out = Mat::<T>::zeros(space.size(), 1);
        for (n, v) in self.values.iter().enumerate() {
            for a in 0..r {
                let c = match &space.local {
                    Local::Blades(b) => v.coeff(b[a]),
                    Local::Basis(b) => b[n][a].inner(v),
                };
                let base = (n * r + a) * p;
                if space.realified {
                    out[(base, 0)] = T::from_f64(c.re);
                    out[(base + 1, 0)] = T::from_f64(c.im);
                } else {
                    out[(base, 0)] = T::from_c64(c);
                }
            }
        }
        Ok(out)
    }

    pub fn from_coords<T: Scalar>(space: &Space, x: &Mat<T>) -> GridFunction {
        let r = space.rank();
        let p = space.parts();
        GridFunction::from_fn(space.dim, space.nodes(), |n| {
            let mut v = Mv::zero(space.dim);
            for a in 0..r {
                let base = (n * r + a) * p;
                let c = if space.realified {
                    C64::new(x[(base, 0)].to_c64().re, x[(base + 1, 0)].to_c64().re)
                } else {
                    x[(base, 0)].to_c64()
                };
                v = v + space.local.vector(space.dim, n, a).scale(c);
            }
            v
        })
    }
}

/// Linear map on the algebra at a point, `map[out][in]`.
pub type LocalMap = [[C64; 8]; 8];

pub fn local_map(dim: Dim, f: impl Fn(&Mv) -> Mv) -> LocalMap {
    let mut m = [[C64::new(0.0, 0.0); 8]; 8];
    for j in 0..dim.blades() {
        let col = f(&Mv::basis(dim, j));
        for (i, c) in col.coeffs().iter().enumerate() {
            m[i][j] = *c;
        }
    }
    m
}

pub fn left_mul_map(m: &Mv) -> LocalMap {
    local_map(m.dim(), |x| m.clifford(x))
}

/// Composition a ∘ b of local maps.
pub fn compose_local(a: &LocalMap, b: &LocalMap) -> LocalMap {
    let mut m = [[C64::new(0.0, 0.0); 8]; 8];
    for i in 0..8 {
        for k in 0..8 {
            if a[i][k] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..8 {
                m[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    m
}

/// Coefficient of local coordinate `a` (out) against `b` (in) through map `l` at `node`.
fn local_entry(space: &Space, node: usize, l: &LocalMap, a: usize, b: usize) -> C64 {
    match &space.local {
        Local::Blades(bl) => l[bl[a]][bl[b]],
        Local::Basis(basis) => {
            let u = &basis[node][a];
            let v = &basis[node][b];
            let dim = space.dim.blades();
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..dim {
                let ui = u.coeff(i).conj();
                if ui == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..dim {
                    acc += ui * l[i][j] * v.coeff(j);
                }
            }
            acc
        }
    }
}

/// Writes the complex coefficient `c` into the block of local coordinates (a, b).
pub(crate) fn put<T: Scalar>(m: &mut Mat<T>, space: &Space, row: usize, col: usize, c: C64) {
    if space.realified {
        let (r, k) = (2 * row, 2 * col);
        m[(r, k)] = T::from_f64(c.re);
        m[(r, k + 1)] = T::from_f64(-c.im);
        m[(r + 1, k)] = T::from_f64(c.im);
        m[(r + 1, k + 1)] = T::from_f64(c.re);
    } else {
        m[(row, col)] = T::from_c64(c);
    }
}

pub(crate) fn add_to<T: Scalar>(m: &mut Mat<T>, space: &Space, row: usize, col: usize, c: C64) {
    if space.realified {
        let (r, k) = (2 * row, 2 * col);
        m[(r, k)] += T::from_f64(c.re);
        m[(r, k + 1)] += T::from_f64(-c.im);
        m[(r + 1, k)] += T::from_f64(c.im);
        m[(r + 1, k + 1)] += T::from_f64(c.re);
    } else {
        m[(row, col)] += T::from_c64(c);
    }
}

/// A dense matrix acting on grid functions of a [`Space`].
#[derive(Clone, Debug)]
pub struct Operator<T> {
    pub matrix: Mat<T>,
    pub space: Space,
    pub label: String,
}

/// Real matrices, acting on real fields or on realified complex fields.
pub type RealLinearOperator = Operator<f64>;
/// Complex-linear operators on complex fields.
pub type ComplexOperator = Operator<c64>;

impl<T: Scalar> Operator<T> {
    pub fn new(matrix: Mat<T>, space: Space, label: impl Into<String>) -> Result<Self> {
        if matrix.nrows() != space.size() || matrix.ncols() != space.size() {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, space has dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                space.size()
            )));
        }
        if T::IS_COMPLEX && space.realified {
            return Err(Error::Invalid("complex matrices act on unrealified spaces".into()));
        }
        Ok(Operator {
            matrix,
            space,
            label: label.into(),
        })
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn identity(space: &Space) -> Self {
        let n = space.size();
        Operator {
            matrix: Mat::from_fn(n, n, |i, j| T::from_f64(if i == j { 1.0 } else { 0.0 })),
            space: space.clone(),
            label: "I".into(),
        }
    }

    /// Block-diagonal operator applying `map(node)` at each node.
    pub fn pointwise(space: &Space, label: &str, map: impl Fn(usize) -> LocalMap) -> Result<Self> {
        let n = space.size();
        check_dense(n, std::mem::size_of::<T>())?;
        let r = space.rank();
        let mut m = Mat::<T>::zeros(n, n);
        for node in 0..space.nodes() {
            let l = map(node);
            for a in 0..r {
                for b in 0..r {
                    let c = local_entry(space, node, &l, a, b);
                    put(&mut m, space, node * r + a, node * r + b, c);
                }
            }
        }
        Operator::new(m, space.clone(), label)
    }

    fn check_same(&self, o: &Self) -> Result<()> {
        if self.space != o.space {
            return Err(Error::Dimension(format!(
                "operators '{}' and '{}' act on different spaces",
                self.label, o.label
            )));
        }
        Ok(())
    }

    /// self ∘ other.
    pub fn compose(&self, o: &Self) -> Result<Self> {
        self.check_same(o)?;
        Ok(Operator {
            matrix: &self.matrix * &o.matrix,
            space: self.space.clone(),
            label: format!("{}*{}", self.label, o.label),
        })
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.check_same(o)?;
        Ok(Operator {
            matrix: &self.matrix + &o.matrix,
            space: self.space.clone(),
            label: format!("({}+{})", self.label, o.label),
        })
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        self.check_same(o)?;
        Ok(Operator {
            matrix: &self.matrix - &o.matrix,
            space: self.space.clone(),
            label: format!("({}-{})", self.label, o.label),
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        let f = T::from_f64(s);
        Operator {
            matrix: Mat::from_fn(self.size(), self.size(), |i, j| self.matrix[(i, j)] * f),
            space: self.space.clone(),
            label: format!("{s}*{}", self.label),
        }
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// (½(I + A), ½(I - A)).
    pub fn projections(&self) -> (Self, Self) {
        let n = self.size();
        let half = T::from_f64(0.5);
        let id = |i: usize, j: usize| T::from_f64(if i == j { 1.0 } else { 0.0 });
        let plus = Mat::from_fn(n, n, |i, j| (id(i, j) + self.matrix[(i, j)]) * half);
        let minus = Mat::from_fn(n, n, |i, j| (id(i, j) - self.matrix[(i, j)]) * half);
        (
            Operator {
                matrix: plus,
                space: self.space.clone(),
                label: format!("{}+", self.label),
            },
            Operator {
                matrix: minus,
                space: self.space.clone(),
                label: format!("{}-", self.label),
            },
        )
    }

    /// Adjoint in the weighted inner product Σ w_i (f_i, g_i): W⁻¹ A^H W.
    pub fn adjoint(&self) -> Result<Self> {
        let sp = &self.space;
        if sp.weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Invalid("adjoint needs positive weights".into()));
        }
        let n = self.size();
        let m = Mat::from_fn(n, n, |i, j| {
            self.matrix[(j, i)].conj_s() * T::from_f64(sp.weight_of(j) / sp.weight_of(i))
        });
        Ok(Operator {
            matrix: m,
            space: sp.clone(),
            label: format!("{}^*", self.label),
        })
    }

    /// W^{1/2} A W^{-1/2}: its Euclidean norms are the weighted L2 operator norms.
    pub fn weighted_matrix(&self) -> Mat<T> {
        let sp = &self.space;
        let n = self.size();
        let s: Vec<f64> = (0..n).map(|i| sp.weight_of(i).sqrt()).collect();
        Mat::from_fn(n, n, |i, j| self.matrix[(i, j)] * T::from_f64(s[i] / s[j]))
    }

    /// Weighted L2 operator norm.
    pub fn norm(&self) -> Result<f64> {
        crate::solvers::spectral_norm(&self.weighted_matrix())
    }

    pub fn max_abs_entry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for j in 0..self.size() {
            for i in 0..self.size() {
                m = m.max(self.matrix[(i, j)].abs_s());
            }
        }
        m
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        let x = f.to_coords::<T>(&self.space)?;
        let y = &self.matrix * &x;
        Ok(GridFunction::from_coords(&self.space, &y))
    }

    /// Restriction to a smaller set of blades (rows and columns).
    pub fn restrict_blades(&self, blades: &[usize]) -> Result<Self> {
        let Local::Blades(have) = &self.space.local else {
            return Err(Error::Invalid("restriction needs a blade space".into()));
        };
        let mut pos = Vec::new();
        for b in blades {
            match have.iter().position(|h| h == b) {
                Some(p) => pos.push(p),
                None => return Err(Error::Invalid(format!("blade {b} not in the space"))),
            }
        }
        let space = self.space.with_local(Local::Blades(blades.to_vec()));
        let r_old = have.len();
        let p = space.parts();
        let idx: Vec<usize> = (0..space.nodes())
            .flat_map(|n| {
                pos.iter()
                    .flat_map(move |&a| (0..p).map(move |q| (n * r_old + a) * p + q))
            })
            .collect();
        let k = idx.len();
        Ok(Operator {
            matrix: Mat::from_fn(k, k, |i, j| self.matrix[(idx[i], idx[j])]),
            space,
            label: self.label.clone(),
        })
    }
}

impl ComplexOperator {
    /// The same map as a real matrix on (Re, Im) coordinates.
    pub fn realify(&self) -> RealLinearOperator {
        let n = self.size();
        let m = Mat::from_fn(2 * n, 2 * n, |i, j| {
            let c = self.matrix[(i / 2, j / 2)];
            match (i % 2, j % 2) {
                (0, 0) | (1, 1) => c.re,
                (0, 1) => -c.im,
                _ => c.im,
            }
        });
        Operator {
            matrix: m,
            space: self.space.realified(),
            label: self.label.clone(),
        }
    }
}

impl RealLinearOperator {
    /// Complex structure J (multiplication by i) on a realified space.
    pub fn complex_structure(space: &Space) -> Result<Self> {
        if !space.realified {
            return Err(Error::Invalid("complex structure needs a realified space".into()));
        }
        let n = space.size();
        let m = Mat::from_fn(n, n, |i, j| {
            if i / 2 != j / 2 {
                0.0
            } else {
                match (i % 2, j % 2) {
                    (0, 1) => -1.0,
                    (1, 0) => 1.0,
                    _ => 0.0,
                }
            }
        });
        Operator::new(m, space.clone(), "J")
    }

    /// Complex-linear extension of an operator on real fields.
    pub fn complexify(&self) -> Result<ComplexOperator> {
        if self.space.realified {
            return Err(Error::Invalid("operator is already realified".into()));
        }
        let n = self.size();
        Ok(Operator {
            matrix: Mat::from_fn(n, n, |i, j| c64::new(self.matrix[(i, j)], 0.0)),
            space: self.space.clone(),
            label: self.label.clone(),
        })
    }
}

/// Per-node unit normals of a mesh.
pub fn mesh_normals(mesh: &Mesh) -> Vec<UnitVector<f64>> {
    match mesh {
        Mesh::Curve(c) => c
            .normals
            .iter()
            .map(|n| UnitVector::normalized(Dim::Two, &[n.re, n.im]).expect("unit normal"))
            .collect(),
        Mesh::Surface(s) => s
            .normals
            .iter()
            .map(|n| UnitVector::normalized(Dim::Three, n).expect("unit normal"))
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reflection {
    N,
    S,
    T,
}

pub fn reflection_map(which: Reflection, nu: &UnitVector<f64>) -> LocalMap {
    let dim = nu.dim();
    match which {
        Reflection::N => local_map(dim, |f| reflect_n(nu, f)),
        Reflection::S => local_map(dim, |f| reflect_s(nu, f)),
        Reflection::T => local_map(dim, reflect_t),
    }
}

pub fn assemble_reflection<T: Scalar>(
    mesh: &Mesh,
    which: Reflection,
    space: &Space,
) -> Result<Operator<T>> {
    let normals = mesh_normals(mesh);
    let label = format!("{which:?}");
    Operator::pointwise(space, &label, |n| reflection_map(which, &normals[n]))
}

pub fn multiplier_map(nu: &UnitVector<f64>) -> LocalMap {
    local_map(Dim::Three, |f| maxwell_multiplier(nu, f))
}

/// Pointwise Maxwell multiplier α+a+*b+*β ↦ α+ν∧a+(ν,b)(*ν), which is 2·T⁺S⁺N⁺.
pub fn assemble_m<T: Scalar>(surface: &Surface3D, space: &Space) -> Result<Operator<T>> {
    let normals = mesh_normals(&Mesh::Surface(surface.clone()));
    Operator::pointwise(space, "M", |n| multiplier_map(&normals[n]))
}

/// ½(I ± R) for a pointwise local map R.
pub fn half_map(r: &LocalMap, sign: f64) -> LocalMap {
    let mut m = [[C64::new(0.0, 0.0); 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            let id = if i == j { 1.0 } else { 0.0 };
            m[i][j] = (r[i][j] * sign + id) * 0.5;
        }
    }
    m
}
