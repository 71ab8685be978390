use std::f64::consts::PI;

use faer::{c64, Mat};
use num_complex::Complex64 as C64;

use super::quadrature::{static_panel_integrals, TriangleRule};
use super::{
    add_to, check_dense, compose_local, left_mul_map, mesh_normals, Local, LocalMap, Operator,
    Space, ComplexOperator,
};
use crate::clifford::{Dim, Multivector};
use crate::error::{Error, Result};
use crate::geometry::{dot, norm, sub, Mesh, Surface3D, Vec3};
use crate::kernels::{psi3_parts, WaveNumber};

type Mv = Multivector<f64>;

/// Distance thresholds (in units of the larger panel diameter) and rules for the
/// near-field treatment of panel pairs.
#[derive(Clone, Copy, Debug)]
pub struct NearFieldRule {
    /// Below this centroid distance the static part is integrated in closed form.
    pub near: f64,
    /// Below this centroid distance a 6x6 product Gauss rule is used; beyond, centroids.
    pub medium: f64,
    /// Subdivision levels of the outer rule for near pairs.
    pub outer_levels: u32,
}

impl Default for NearFieldRule {
    fn default() -> Self {
        NearFieldRule {
            near: 1.5,
            medium: 4.0,
            outer_levels: 2,
        }
    }
}

/// Ψ_k − Ψ₀ − ik/(4π|x|): bounded, evaluated without cancellation.
fn psi_remainder(k: C64, x: Vec3) -> [C64; 4] {
    let r = norm(x);
    let ik = C64::i() * k;
    if r == 0.0 {
        return [ik * ik / (4.0 * PI), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    }
    let z = ik * r;
    // (e^z - 1)/r and (e^z (1 - z) - 1)/r³
    let (e1, e2) = if z.norm() < 0.5 {
        let mut s1 = C64::new(0.0, 0.0);
        let mut s2 = C64::new(0.0, 0.0);
        let mut zn = C64::new(1.0, 0.0);
        let mut fact = 1.0;
        for n in 1..24 {
            zn *= z;
            fact *= n as f64;
            s1 += zn / fact;
            if n >= 2 {
                s2 += zn * ((1.0 - n as f64) / fact);
            }
        }
        (s1, s2)
    } else {
        let ez = z.exp();
        (ez - 1.0, ez * (1.0 - z) - 1.0)
    };
    let scalar = ik * e1 / (4.0 * PI * r);
    let c = e2 / (4.0 * PI * r * r * r);
    [scalar, c * x[0], c * x[1], c * x[2]]
}

/// Collapsed Cauchy kernel on a flat-panel surface: the scalar-plus-vector multivector
/// G_ij ≈ (2/|T_i|) ∫_{T_i} ∫_{T_j} Ψ_k(y − x) dσ(y) dσ(x), so that E_k has blocks G_ij ν_j.
#[derive(Clone, Debug)]
pub struct CauchyKernel3d {
    pub surface: Surface3D,
    pub k: WaveNumber<f64>,
    n: usize,
    /// Row-major n×n array of (scalar, e1, e2, e3) coefficients.
    g: Vec<[C64; 4]>,
}

impl CauchyKernel3d {
    pub fn new(surface: &Surface3D, k: WaveNumber<f64>) -> Result<Self> {
        Self::with_rule(surface, k, NearFieldRule::default())
    }

    pub fn with_rule(surface: &Surface3D, k: WaveNumber<f64>, rule: NearFieldRule) -> Result<Self> {
        let n = surface.len();
        check_dense(n, 64)?;
        let kv = k.value();
        let diam: Vec<f64> = (0..n).map(|t| surface.diameter(t)).collect();
        let panels: Vec<[Vec3; 3]> = (0..n).map(|t| surface.panel(t)).collect();
        let six = TriangleRule::six();
        let outer_rule = TriangleRule::seven().subdivided(rule.outer_levels);
        let inner_rule = TriangleRule::six().subdivided(1);
        let gauss: Vec<Vec<(Vec3, f64)>> =
            (0..n).map(|t| six.on(&panels[t], surface.areas[t])).collect();
        let outer: Vec<Vec<(Vec3, f64)>> = (0..n)
            .map(|t| outer_rule.on(&panels[t], surface.areas[t]))
            .collect();
        let inner: Vec<Vec<(Vec3, f64)>> = (0..n)
            .map(|t| inner_rule.on(&panels[t], surface.areas[t]))
            .collect();

        let zero = C64::new(0.0, 0.0);
        let mut g = vec![[zero; 4]; n * n];
        // raw near-field static parts, antisymmetrized below
        let mut near_static: Vec<(usize, usize, Vec3)> = Vec::new();
        let ik4pi = C64::i() * kv / (4.0 * PI);
        for i in 0..n {
            let ci = surface.centroids[i];
            for j in 0..n {
                let dist = norm(sub(surface.centroids[j], ci));
                let h = diam[i].max(diam[j]);
                let mut acc = [zero; 4];
                if i == j || dist < rule.near * h {
                    // ∫_{T_i} [static closed form + ik/(4π) ∫ 1/R + bounded remainder]
                    let mut stat = [0.0; 3];
                    let mut inv_r = 0.0;
                    for &(x, w) in &outer[i] {
                        let (v, s) = static_panel_integrals(&panels[j], surface.normals[j], x);
                        if i != j {
                            for a in 0..3 {
                                stat[a] += w * v[a];
                            }
                        }
                        inv_r += w * s;
                        if !k.is_zero() {
                            for &(y, wy) in &inner[j] {
                                let rem = psi_remainder(kv, sub(y, x));
                                for a in 0..4 {
                                    acc[a] += rem[a] * (w * wy);
                                }
                            }
                        }
                    }
                    acc[0] += ik4pi * inv_r;
                    if i != j {
                        near_static.push((i, j, stat));
                    }
                } else if dist < rule.medium * h {
                    for &(x, w) in &gauss[i] {
                        for &(y, wy) in &gauss[j] {
                            let (s, v) = psi3_parts(k, sub(y, x))?;
                            acc[0] += s * (w * wy);
                            for a in 0..3 {
                                acc[a + 1] += v[a] * (w * wy);
                            }
                        }
                    }
                } else {
                    let (s, v) = psi3_parts(k, sub(surface.centroids[j], ci))?;
                    let w = surface.areas[i] * surface.areas[j];
                    acc[0] = s * w;
                    for a in 0..3 {
                        acc[a + 1] = v[a] * w;
                    }
                }
                g[i * n + j] = acc;
            }
        }
        // the exact static double integral is antisymmetric in (i, j)
        let mut lookup = std::collections::HashMap::with_capacity(near_static.len());
        for (i, j, v) in &near_static {
            lookup.insert((*i, *j), *v);
        }
        for (i, j, v) in &near_static {
            let vt = lookup[&(*j, *i)];
            for a in 0..3 {
                let s = 0.5 * (v[a] - vt[a]) / (4.0 * PI);
                g[i * n + j][a + 1] += C64::new(s, 0.0);
            }
        }
        for i in 0..n {
            let f = 2.0 / surface.areas[i];
            for j in 0..n {
                for c in g[i * n + j].iter_mut() {
                    *c *= f;
                }
            }
        }
        Ok(CauchyKernel3d {
            surface: surface.clone(),
            k,
            n,
            g,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// G_ij as a multivector.
    pub fn entry(&self, i: usize, j: usize) -> Mv {
        let c = self.g[i * self.n + j];
        let mut m = Mv::scalar(Dim::Three, c[0]);
        for a in 0..3 {
            m.set_coeff(a + 1, c[a + 1]);
        }
        m
    }

    /// Assembles P_i^H L_i (α δ_ij + β G_ij ν_j^{s}) R_j P_j in the local coordinates of
    /// `space`, where L, R are pointwise maps and ν_j is included iff `with_normal`.
    pub fn assemble(
        &self,
        space: &Space,
        alpha: f64,
        beta: f64,
        with_normal: bool,
        left: &dyn Fn(usize) -> LocalMap,
        right: &dyn Fn(usize) -> LocalMap,
        label: &str,
    ) -> Result<ComplexOperator> {
        if space.dim != Dim::Three || space.nodes() != self.n || space.realified {
            return Err(Error::Dimension("space does not match the surface".into()));
        }
        let size = space.size();
        check_dense(size, 16)?;
        let r = space.rank();
        let n = self.n;
        let normals = mesh_normals(&Mesh::Surface(self.surface.clone()));
        let basis = |node: usize| -> Vec<Mv> {
            (0..r).map(|a| space.local.vector(Dim::Three, node, a)).collect()
        };
        // lb[i]: r×8 rows P_i^H L_i
        let mut lb: Vec<Vec<[C64; 8]>> = Vec::with_capacity(n);
        // rb[j]: 8×r columns (ν_j) R_j P_j, stored as r columns of 8
        let mut rb: Vec<Vec<[C64; 8]>> = Vec::with_capacity(n);
        let mut diag: Vec<Vec<C64>> = Vec::with_capacity(n);
        for node in 0..n {
            let b = basis(node);
            let l = left(node);
            let rt = right(node);
            let lr = compose_local(&l, &rt);
            let rows: Vec<[C64; 8]> = b
                .iter()
                .map(|u| {
                    let mut row = [C64::new(0.0, 0.0); 8];
                    for (c, item) in row.iter_mut().enumerate() {
                        for (a, uc) in u.coeffs().iter().enumerate() {
                            *item += uc.conj() * l[a][c];
                        }
                    }
                    row
                })
                .collect();
            let nmap = if with_normal {
                compose_local(&left_mul_map(normals[node].as_multivector()), &rt)
            } else {
                rt
            };
            let cols: Vec<[C64; 8]> = b
                .iter()
                .map(|v| {
                    let mut col = [C64::new(0.0, 0.0); 8];
                    for (a, item) in col.iter_mut().enumerate() {
                        for (c, vc) in v.coeffs().iter().enumerate() {
                            *item += nmap[a][c] * vc;
                        }
                    }
                    col
                })
                .collect();
            let mut d = vec![C64::new(0.0, 0.0); r * r];
            for (p, u) in b.iter().enumerate() {
                for (q, v) in b.iter().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for a in 0..8 {
                        for c in 0..8 {
                            acc += u.coeff(a).conj() * lr[a][c] * v.coeff(c);
                        }
                    }
                    d[p * r + q] = acc;
                }
            }
            lb.push(rows);
            rb.push(cols);
            diag.push(d);
        }
        // Left multiplication by e_a: signed permutations of the 8 blades.
        let lmul: Vec<LocalMap> = (0..4)
            .map(|a| left_mul_map(&Mv::basis(Dim::Three, a)))
            .collect();
        let perm: Vec<[(usize, f64); 8]> = lmul
            .iter()
            .map(|m| {
                let mut p = [(0usize, 0.0f64); 8];
                for (c, item) in p.iter_mut().enumerate() {
                    for (row, mrow) in m.iter().enumerate() {
                        if mrow[c].re != 0.0 {
                            *item = (row, mrow[c].re);
                        }
                    }
                }
                p
            })
            .collect();
        // q[i][a]: r×8 rows of P_i^H L_i L(e_a)
        let q: Vec<Vec<Vec<[C64; 8]>>> = lb
            .iter()
            .map(|rows| {
                (0..4)
                    .map(|a| {
                        rows.iter()
                            .map(|row| {
                                let mut out = [C64::new(0.0, 0.0); 8];
                                for c in 0..8 {
                                    let (to, s) = perm[a][c];
                                    out[c] = row[to] * s;
                                }
                                out
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut m = Mat::<c64>::zeros(size, size);
        let zero = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let g = self.g[i * n + j];
                for p in 0..r {
                    // combined row Σ_a g_a q[i][a][p]
                    let mut row = [zero; 8];
                    for a in 0..4 {
                        let ga = g[a] * beta;
                        if ga == zero {
                            continue;
                        }
                        let qa = &q[i][a][p];
                        for c in 0..8 {
                            row[c] += ga * qa[c];
                        }
                    }
                    for (qq, col) in rb[j].iter().enumerate() {
                        let mut acc = zero;
                        for c in 0..8 {
                            acc += row[c] * col[c];
                        }
                        m[(i * r + p, j * r + qq)] = acc;
                    }
                }
            }
            if alpha != 0.0 {
                for p in 0..r {
                    for qq in 0..r {
                        add_to(&mut m, space, i * r + p, i * r + qq, diag[i][p * r + qq] * alpha);
                    }
                }
            }
        }
        Operator::new(m, space.clone(), label)
    }

    /// (E u)_i = Σ_j G_ij ν_j u_j for panel values u, without assembling a matrix.
    pub fn apply(&self, u: &[Mv]) -> Result<Vec<Mv>> {
        if u.len() != self.n {
            return Err(Error::Dimension(format!("{} values for {} panels", u.len(), self.n)));
        }
        let normals = mesh_normals(&Mesh::Surface(self.surface.clone()));
        let nu: Vec<Mv> = u
            .iter()
            .zip(&normals)
            .map(|(v, n)| n.as_multivector().clifford(v))
            .collect();
        Ok((0..self.n)
            .map(|i| {
                let mut acc = Mv::zero(Dim::Three);
                for (j, v) in nu.iter().enumerate() {
                    acc = acc + self.entry(i, j).clifford(v);
                }
                acc
            })
            .collect())
    }

    /// Assembles the multiplication by pointwise maps only through E (α = 0, β = 1).
    pub fn cauchy(&self, space: &Space) -> Result<ComplexOperator> {
        let id = identity_map();
        self.assemble(space, 0.0, 1.0, true, &|_| id, &|_| id, "E")
    }
}

pub fn identity_map() -> LocalMap {
    let mut m = [[C64::new(0.0, 0.0); 8]; 8];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C64::new(1.0, 0.0);
    }
    m
}

/// E_k on the full algebra over a flat-panel surface.
pub fn assemble_e_3d(surface: &Surface3D, k: WaveNumber<f64>) -> Result<ComplexOperator> {
    let kernel = CauchyKernel3d::new(surface, k)?;
    let space = Space::of_surface(surface, Local::all(Dim::Three));
    kernel.cauchy(&space)
}

/// Panel averages (1/|T|)∫_T f, 6-point rule.
pub fn panel_average(surface: &Surface3D, f: &dyn Fn(Vec3) -> Result<Mv>) -> Result<Vec<Mv>> {
    let rule = TriangleRule::six();
    (0..surface.len())
        .map(|t| {
            let mut acc = Mv::zero(Dim::Three);
            for (p, w) in rule.on(&surface.panel(t), 1.0) {
                acc = acc + f(p)?.scale_re(w);
            }
            Ok(acc)
        })
        .collect()
}

/// ∫_Σ Ψ_k(y − x) ν(y) u(y) dσ(y) for piecewise constant u and x off the surface.
/// Panels within 4 diameters use a 96-point composite rule; x must be at least a
/// quarter of the local panel diameter away from every panel centroid.
pub fn cauchy_integral(
    surface: &Surface3D,
    k: WaveNumber<f64>,
    density: &[Mv],
    x: Vec3,
) -> Result<Mv> {
    let (nearest, dist) = surface.nearest_panel(x);
    let need = 0.25 * surface.diameter(nearest);
    let plane_dist = dot(sub(x, surface.centroids[nearest]), surface.normals[nearest]).abs();
    if dist < need || plane_dist < 1e-3 * need {
        return Err(Error::TooClose(x, dist, need));
    }
    let normals = mesh_normals(&Mesh::Surface(surface.clone()));
    let fine = TriangleRule::six().subdivided(2);
    let coarse = TriangleRule::six();
    let mut out = Mv::zero(Dim::Three);
    for t in 0..surface.len() {
        let d = norm(sub(surface.centroids[t], x));
        let rule = if d < 4.0 * surface.diameter(t) { &fine } else { &coarse };
        let mut kern = Mv::zero(Dim::Three);
        for (y, w) in rule.on(&surface.panel(t), surface.areas[t]) {
            let (s, v) = psi3_parts(k, sub(y, x))?;
            let mut m = Mv::scalar(Dim::Three, s * w);
            for a in 0..3 {
                m.set_coeff(a + 1, v[a] * w);
            }
            kern = kern + m;
        }
        out = out + kern.clifford(normals[t].as_multivector()).clifford(&density[t]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_icosphere;
    use crate::kernels::dipole_field;
    use crate::operators::GridFunction;

    #[test]
    fn interior_dipole_trace_is_exterior_trace() {
        let s = make_icosphere(1.0, 2).unwrap();
        let k = WaveNumber::real(1.0);
        let e = assemble_e_3d(&s, k).unwrap();
        let moment = Mv::vector(Dim::Three, &[0.3, 0.5, -0.2]) + Mv::one(Dim::Three);
        let field = dipole_field(k, [0.2, -0.1, 0.3], moment);
        let f = GridFunction { dim: Dim::Three, values: panel_average(&s, &|x| field(x)).unwrap() };
        let ef = e.apply(&f).unwrap();
        let plus = ef.sub(&f).norm(&s.areas) / f.norm(&s.areas);
        let minus = GridFunction { dim: Dim::Three, values: ef.values.iter().zip(&f.values).map(|(a, b)| *a + *b).collect() };
        let minus = minus.norm(&s.areas) / f.norm(&s.areas);
        assert!(minus < 0.1, "|Ef + f| = {minus:.3e}");
        assert!(plus > 1.5, "|Ef - f| = {plus:.3e}");
    }
}
