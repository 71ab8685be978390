//! Boundary discretizations: closed curves in the plane and closed triangulated surfaces.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveShape {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    Lens { theta: f64, grading_q: f64 },
}

/// A closed counterclockwise curve sampled at M nodes, uniformly spaced in the
/// parameter s in [0, 2π).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Curve2D {
    pub shape: CurveShape,
    pub nodes: Vec<C64>,
    /// w_i = |z'(s_i)| Δs
    pub weights: Vec<f64>,
    pub tangents: Vec<C64>,
    /// Outward normal ν = -j t.
    pub normals: Vec<C64>,
    pub params: Vec<f64>,
    pub curvature: Vec<f64>,
    pub corner_flags: Vec<usize>,
}

struct CurvePoint {
    z: C64,
    /// dz/ds
    dz: C64,
    kappa: f64,
}

fn check_m(m: usize) -> Result<()> {
    if m < 8 || !m.is_multiple_of(2) {
        return Err(Error::Mesh(format!("node count must be even and >= 8, got {m}")));
    }
    Ok(())
}

impl Curve2D {
    fn sample(shape: CurveShape, m: usize, eval: impl Fn(f64) -> CurvePoint) -> Curve2D {
        let ds = 2.0 * PI / m as f64;
        let mut c = Curve2D {
            shape,
            nodes: Vec::with_capacity(m),
            weights: Vec::with_capacity(m),
            tangents: Vec::with_capacity(m),
            normals: Vec::with_capacity(m),
            params: Vec::with_capacity(m),
            curvature: Vec::with_capacity(m),
            corner_flags: Vec::new(),
        };
        for i in 0..m {
            let s = match shape {
                CurveShape::Lens { .. } => (i as f64 + 0.5) * ds,
                _ => i as f64 * ds,
            };
            let p = eval(s);
            let speed = p.dz.norm();
            let t = p.dz / speed;
            c.nodes.push(p.z);
            c.weights.push(speed * ds);
            c.tangents.push(t);
            c.normals.push(-C64::i() * t);
            c.params.push(s);
            c.curvature.push(p.kappa);
        }
        c
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// True when the curve has no corners.
    pub fn is_smooth(&self) -> bool {
        !matches!(self.shape, CurveShape::Lens { theta, .. } if theta < PI)
    }

    pub fn length(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Σ w_i κ_i, the total turning of the smooth part.
    pub fn total_turning(&self) -> f64 {
        self.weights.iter().zip(&self.curvature).map(|(w, k)| w * k).sum()
    }

    /// Winding number about `z0` by the discrete argument principle.
    pub fn winding_number(&self, z0: C64) -> f64 {
        let m = self.len();
        let mut total = 0.0;
        for i in 0..m {
            let a = self.nodes[i] - z0;
            let b = self.nodes[(i + 1) % m] - z0;
            total += (b / a).arg();
        }
        total / (2.0 * PI)
    }

    /// Minimum distance from `z` to the nodes, scaled by the local node spacing there.
    pub fn distance_in_widths(&self, z: C64) -> f64 {
        let (i, d) = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (i, (n - z).norm()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        d / self.weights[i]
    }

    pub fn refine(&self) -> Result<Curve2D> {
        let m = 2 * self.len();
        match self.shape {
            CurveShape::Circle { radius } => make_circle(radius, m),
            CurveShape::Ellipse { a, b } => make_ellipse(a, b, m),
            CurveShape::Lens { theta, grading_q } => make_corner_curve(theta, m, grading_q),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Curve2D> {
        let c: Curve2D = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.len();
        check_m(m)?;
        if [self.weights.len(), self.tangents.len(), self.normals.len(), self.params.len()]
            .iter()
            .any(|&l| l != m)
        {
            return Err(Error::Mesh("curve arrays have inconsistent lengths".into()));
        }
        for i in 0..m {
            if !(self.weights[i] > 0.0) {
                return Err(Error::Mesh(format!("non-positive weight at node {i}")));
            }
            if (self.tangents[i].norm() - 1.0).abs() > 1e-12 {
                return Err(Error::Mesh(format!("tangent {i} is not unit")));
            }
            if (self.normals[i] + C64::i() * self.tangents[i]).norm() > 1e-12 {
                return Err(Error::Mesh(format!("normal {i} is not -j t")));
            }
        }
        Ok(())
    }
}

pub fn make_circle(radius: f64, m: usize) -> Result<Curve2D> {
    check_m(m)?;
    if !(radius > 0.0) {
        return Err(Error::Invalid("radius must be positive".into()));
    }
    Ok(Curve2D::sample(CurveShape::Circle { radius }, m, |s| {
        let e = C64::from_polar(1.0, s);
        CurvePoint {
            z: e * radius,
            dz: C64::i() * e * radius,
            kappa: 1.0 / radius,
        }
    }))
}

pub fn make_ellipse(a: f64, b: f64, m: usize) -> Result<Curve2D> {
    check_m(m)?;
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Invalid("semi-axes must be positive".into()));
    }
    Ok(Curve2D::sample(CurveShape::Ellipse { a, b }, m, |s| {
        let (sn, cs) = s.sin_cos();
        let dz = C64::new(-a * sn, b * cs);
        CurvePoint {
            z: C64::new(a * cs, b * sn),
            dz,
            kappa: a * b / dz.norm().powi(3),
        }
    }))
}

/// Grading map on [0, 1] with w(τ) ~ τ^q near both ends.
fn grading(tau: f64, q: f64) -> (f64, f64) {
    let a = tau.powf(q);
    let b = (1.0 - tau).powf(q);
    let w = a / (a + b);
    let dw = q * tau.powf(q - 1.0) * (1.0 - tau).powf(q - 1.0) / (a + b).powi(2);
    (w, dw)
}

/// Lens with corners at 0 and 1: one arc below the chord, one above, each meeting
/// the chord at angle θ/2. Returns (center, radius, start angle, signed sweep).
pub fn lens_arc(theta: f64, upper: bool) -> (C64, f64, f64, f64) {
    let phi = theta / 2.0;
    let r = 1.0 / (2.0 * phi.sin());
    let h = 0.5 * phi.cos() / phi.sin();
    if upper {
        (C64::new(0.5, -h), r, PI / 2.0 - phi, 2.0 * phi)
    } else {
        (C64::new(0.5, h), r, -PI / 2.0 - phi, 2.0 * phi)
    }
}

/// Interior angle between the two arcs at the corner z = 0.
pub fn lens_corner_angle(theta: f64) -> f64 {
    let (_, _, a0, _) = lens_arc(theta, false);
    let (_, _, b0, bsweep) = lens_arc(theta, true);
    // leaving 0 along the lower arc, and along the reversed upper arc
    let t_lower = C64::i() * C64::from_polar(1.0, a0);
    let t_upper_rev = -C64::i() * C64::from_polar(1.0, b0 + bsweep);
    (t_upper_rev / t_lower).arg().abs()
}

pub fn make_corner_curve(theta: f64, m: usize, grading_q: f64) -> Result<Curve2D> {
    if !(theta > 0.0 && theta <= PI) {
        return Err(Error::Invalid(format!("corner angle must lie in (0, π], got {theta}")));
    }
    if !(grading_q >= 1.0) {
        return Err(Error::Invalid("grading exponent must be >= 1".into()));
    }
    check_m(m)?;
    let half = m / 2;
    let mut c = Curve2D::sample(CurveShape::Lens { theta, grading_q }, m, |s| {
        let upper = s >= PI;
        let tau = if upper { s / PI - 1.0 } else { s / PI };
        let (w, dw) = grading(tau, grading_q);
        let (center, r, start, sweep) = lens_arc(theta, upper);
        let e = C64::from_polar(1.0, start + sweep * w);
        CurvePoint {
            z: center + e * r,
            // dψ/ds = sweep · w'(τ) / π
            dz: C64::i() * e * r * sweep * dw / PI,
            kappa: 1.0 / r,
        }
    });
    c.corner_flags = vec![0, half - 1, half, m - 1];
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceShape {
    Sphere { radius: f64, center: Vec3, subdivisions: usize },
    General,
}

/// Closed triangulated surface with flat panels and outward normals.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Surface3D {
    pub shape: SurfaceShape,
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    #[serde(default)]
    pub centroids: Vec<Vec3>,
    #[serde(default)]
    pub areas: Vec<f64>,
    #[serde(default)]
    pub normals: Vec<Vec3>,
}

pub const MAX_SUBDIVISIONS: usize = 5;

impl Surface3D {
    /// Builds panel data and validates closedness and orientation.
    pub fn new(shape: SurfaceShape, vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut s = Surface3D {
            shape,
            vertices,
            triangles,
            centroids: Vec::new(),
            areas: Vec::new(),
            normals: Vec::new(),
        };
        s.compute_panels()?;
        s.validate()?;
        Ok(s)
    }

    fn compute_panels(&mut self) -> Result<()> {
        self.centroids.clear();
        self.areas.clear();
        self.normals.clear();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= self.vertices.len()) {
                return Err(Error::Mesh(format!("triangle {t} references a missing vertex")));
            }
            let [a, b, c] = tri.map(|v| self.vertices[v]);
            let n = cross(sub(b, a), sub(c, a));
            let len = norm(n);
            let scale_ref = norm(sub(b, a)).max(norm(sub(c, a))).powi(2);
            if !(len > 1e-14 * scale_ref) {
                return Err(Error::Mesh(format!("degenerate triangle {t}")));
            }
            self.centroids.push(scale(add(add(a, b), c), 1.0 / 3.0));
            self.areas.push(0.5 * len);
            self.normals.push(scale(n, 1.0 / len));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.triangles.is_empty() {
            return Err(Error::Mesh("empty surface".into()));
        }
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                *edges.entry((tri[k], tri[(k + 1) % 3])).or_default() += 1;
            }
        }
        for (&(a, b), &count) in &edges {
            if count != 1 || edges.get(&(b, a)) != Some(&1) {
                return Err(Error::Mesh(format!(
                    "edge ({a}, {b}) is not shared by exactly two oppositely oriented triangles"
                )));
            }
        }
        let total: f64 = self.areas.iter().sum();
        let mut flux = [0.0; 3];
        for (a, n) in self.areas.iter().zip(&self.normals) {
            flux = add(flux, scale(*n, *a));
        }
        if norm(flux) > 1e-10 * total {
            return Err(Error::Mesh("discrete Gauss identity fails".into()));
        }
        if self.signed_volume() <= 0.0 {
            return Err(Error::Mesh("normals point inward".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|v| self.vertices[v]);
                dot(a, cross(b, c)) / 6.0
            })
            .sum()
    }

    /// Panel vertex coordinates.
    pub fn panel(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    /// Longest edge of panel t.
    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.panel(t);
        norm(sub(a, b)).max(norm(sub(b, c))).max(norm(sub(c, a)))
    }

    pub fn mesh_width(&self) -> f64 {
        (0..self.len()).map(|t| self.diameter(t)).fold(0.0, f64::max)
    }

    /// Distance from x to the nearest panel centroid and the diameter of that panel.
    pub fn nearest_panel(&self, x: Vec3) -> (usize, f64) {
        self.centroids
            .iter()
            .enumerate()
            .map(|(i, c)| (i, norm(sub(*c, x))))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }

    /// Midpoint subdivision; sphere meshes project new vertices back to the sphere.
    pub fn refine(&self) -> Result<Surface3D> {
        match self.shape {
            SurfaceShape::Sphere {
                radius,
                center,
                subdivisions,
            } => {
                if subdivisions + 1 > MAX_SUBDIVISIONS {
                    return Err(Error::TooLarge(20 << (2 * (subdivisions + 1))));
                }
                let (v, t) = subdivide(&self.vertices, &self.triangles, Some((center, radius)));
                Surface3D::new(
                    SurfaceShape::Sphere {
                        radius,
                        center,
                        subdivisions: subdivisions + 1,
                    },
                    v,
                    t,
                )
            }
            SurfaceShape::General => {
                let (v, t) = subdivide(&self.vertices, &self.triangles, None);
                Surface3D::new(SurfaceShape::General, v, t)
            }
        }
    }

    pub fn translated(&self, shift: Vec3) -> Result<Surface3D> {
        let shape = match self.shape {
            SurfaceShape::Sphere {
                radius,
                center,
                subdivisions,
            } => SurfaceShape::Sphere {
                radius,
                center: add(center, shift),
                subdivisions,
            },
            s => s,
        };
        let v = self.vertices.iter().map(|&p| add(p, shift)).collect();
        Surface3D::new(shape, v, self.triangles.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses a mesh; only vertices and triangles are required, panel data is recomputed.
    pub fn from_json(s: &str) -> Result<Surface3D> {
        let raw: Surface3D = serde_json::from_str(s)?;
        Surface3D::new(raw.shape, raw.vertices, raw.triangles)
    }

    pub fn load(path: &Path) -> Result<Surface3D> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn subdivide(
    vertices: &[Vec3],
    triangles: &[[usize; 3]],
    sphere: Option<(Vec3, f64)>,
) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let mut v = vertices.to_vec();
    let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, v: &mut Vec<Vec3>| -> usize {
        let key = (a.min(b), a.max(b));
        *mids.entry(key).or_insert_with(|| {
            let mut p = scale(add(v[a], v[b]), 0.5);
            if let Some((c, r)) = sphere {
                let d = sub(p, c);
                p = add(c, scale(d, r / norm(d)));
            }
            v.push(p);
            v.len() - 1
        })
    };
    let mut t = Vec::with_capacity(4 * triangles.len());
    for &[a, b, c] in triangles {
        let ab = mid(a, b, &mut v);
        let bc = mid(b, c, &mut v);
        let ca = mid(c, a, &mut v);
        t.push([a, ab, ca]);
        t.push([ab, b, bc]);
        t.push([ca, bc, c]);
        t.push([ab, bc, ca]);
    }
    (v, t)
}

pub fn make_icosphere(radius: f64, subdivisions: usize) -> Result<Surface3D> {
    make_icosphere_at(radius, [0.0; 3], subdivisions)
}

pub fn make_icosphere_at(radius: f64, center: Vec3, subdivisions: usize) -> Result<Surface3D> {
    if subdivisions > MAX_SUBDIVISIONS {
        return Err(Error::TooLarge(20 << (2 * subdivisions)));
    }
    if !(radius > 0.0) {
        return Err(Error::Invalid("radius must be positive".into()));
    }
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let base: [Vec3; 12] = [
        [-1.0, p, 0.0],
        [1.0, p, 0.0],
        [-1.0, -p, 0.0],
        [1.0, -p, 0.0],
        [0.0, -1.0, p],
        [0.0, 1.0, p],
        [0.0, -1.0, -p],
        [0.0, 1.0, -p],
        [p, 0.0, -1.0],
        [p, 0.0, 1.0],
        [-p, 0.0, -1.0],
        [-p, 0.0, 1.0],
    ];
    let tris: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let mut v: Vec<Vec3> = base
        .iter()
        .map(|&b| add(center, scale(b, radius / norm(b))))
        .collect();
    let mut t = tris;
    for _ in 0..subdivisions {
        let (nv, nt) = subdivide(&v, &t, Some((center, radius)));
        v = nv;
        t = nt;
    }
    Surface3D::new(
        SurfaceShape::Sphere {
            radius,
            center,
            subdivisions,
        },
        v,
        t,
    )
}

/// Either kind of boundary.
#[derive(Clone, Debug)]
pub enum Mesh {
    Curve(Curve2D),
    Surface(Surface3D),
}

impl Mesh {
    pub fn refine(&self) -> Result<Mesh> {
        Ok(match self {
            Mesh::Curve(c) => Mesh::Curve(c.refine()?),
            Mesh::Surface(s) => Mesh::Surface(s.refine()?),
        })
    }

    pub fn nodes(&self) -> usize {
        match self {
            Mesh::Curve(c) => c.len(),
            Mesh::Surface(s) => s.len(),
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        match self {
            Mesh::Curve(c) => c.weights.clone(),
            Mesh::Surface(s) => s.areas.clone(),
        }
    }

    /// FNV-1a hash of the node coordinates, used to tag operator dumps.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut feed = |x: f64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        match self {
            Mesh::Curve(c) => c.nodes.iter().for_each(|z| {
                feed(z.re);
                feed(z.im)
            }),
            Mesh::Surface(s) => s.vertices.iter().flatten().for_each(|&x| feed(x)),
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_basics() {
        let c = make_circle(1.0, 16).unwrap();
        assert!((c.length() - 2.0 * PI).abs() < 1e-12);
        for (z, n) in c.nodes.iter().zip(&c.normals) {
            assert!((z / z.norm() - n).norm() < 1e-14);
        }
        assert!(make_circle(1.0, 15).is_err());
        assert!((c.winding_number(C64::new(0.1, 0.2)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lens_degenerates_to_circle() {
        let c = make_corner_curve(PI, 64, 1.0).unwrap();
        for z in &c.nodes {
            assert!(((z - C64::new(0.5, 0.0)).norm() - 0.5).abs() < 1e-14);
        }
        assert!((c.length() - PI).abs() < 1e-12);
    }

    #[test]
    fn lens_corner_angle_matches() {
        for theta in [PI / 2.0, PI / 4.0, 0.3] {
            assert!((lens_corner_angle(theta) - theta).abs() < 1e-10);
        }
        assert!(make_corner_curve(0.0, 64, 3.0).is_err());
    }

    #[test]
    fn icosphere_counts() {
        let s = make_icosphere(1.0, 0).unwrap();
        assert_eq!(s.len(), 20);
        let s2 = make_icosphere(1.0, 2).unwrap();
        assert_eq!(s2.len(), 320);
        assert!((s2.total_area() - 4.0 * PI).abs() < 0.02 * 4.0 * PI);
        assert!(make_icosphere(1.0, 6).is_err());
    }
}
