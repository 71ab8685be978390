//! Triangle quadrature and closed-form static panel integrals.

use crate::geometry::{add, cross, dot, norm, scale, sub, Vec3};

/// Barycentric points (λ1, λ2) and weights summing to 1.
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    pub fn centroid() -> Self {
        TriangleRule {
            points: vec![[1.0 / 3.0; 3]],
            weights: vec![1.0],
        }
    }

    /// Degree 2, interior points.
    pub fn three() -> Self {
        TriangleRule {
            points: vec![
                [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
                [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
                [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
            ],
            weights: vec![1.0 / 3.0; 3],
        }
    }

    /// Degree 4 (Dunavant), no centroid.
    pub fn six() -> Self {
        let (a, b) = (0.445948490915965, 0.091576213509771);
        let (wa, wb) = (0.223381589678011, 0.109951743655322);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (x, w) in [(a, wa), (b, wb)] {
            let y = 1.0 - 2.0 * x;
            points.extend([[y, x, x], [x, y, x], [x, x, y]]);
            weights.extend([w; 3]);
        }
        TriangleRule { points, weights }
    }

    /// Degree 5 (Dunavant).
    pub fn seven() -> Self {
        let (a, b) = (0.470142064105115, 0.101286507323456);
        let (wa, wb) = (0.132394152788506, 0.125939180544827);
        let mut points = vec![[1.0 / 3.0; 3]];
        let mut weights = vec![0.225];
        for (x, w) in [(a, wa), (b, wb)] {
            let y = 1.0 - 2.0 * x;
            points.extend([[y, x, x], [x, y, x], [x, x, y]]);
            weights.extend([w; 3]);
        }
        TriangleRule { points, weights }
    }

    /// Composite rule on the 4^levels midpoint subdivision.
    pub fn subdivided(&self, levels: u32) -> Self {
        let mut tris: Vec<[[f64; 3]; 3]> =
            vec![[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]];
        for _ in 0..levels {
            let mut next = Vec::with_capacity(4 * tris.len());
            for [a, b, c] in tris {
                let mid = |p: [f64; 3], q: [f64; 3]| {
                    [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0]
                };
                let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
                next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
            }
            tris = next;
        }
        let share = 1.0 / tris.len() as f64;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for t in &tris {
            for (p, w) in self.points.iter().zip(&self.weights) {
                let mut q = [0.0; 3];
                for k in 0..3 {
                    q[k] = p[0] * t[0][k] + p[1] * t[1][k] + p[2] * t[2][k];
                }
                points.push(q);
                weights.push(w * share);
            }
        }
        TriangleRule { points, weights }
    }

    /// Physical points and weights (summing to the area) on a triangle.
    pub fn on(&self, tri: &[Vec3; 3], area: f64) -> Vec<(Vec3, f64)> {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(l, w)| {
                let p = add(add(scale(tri[0], l[0]), scale(tri[1], l[1])), scale(tri[2], l[2]));
                (p, w * area)
            })
            .collect()
    }
}

/// ∫_e dl / |y - x| along a segment, given the signed endpoint coordinates
/// l⁻ < l⁺ along the edge and the endpoint distances R⁻, R⁺.
fn edge_log(lm: f64, lp: f64, rm: f64, rp: f64) -> f64 {
    if lp + lm >= 0.0 {
        ((rp + lp) / (rm + lm)).ln()
    } else {
        ((rm - lm) / (rp - lp)).ln()
    }
}

/// Closed-form integrals over a flat triangle with unit normal `n`
/// (vertices counterclockwise about n) seen from `x`:
/// returns (∫_T (y-x)/|y-x|³ dA, ∫_T 1/|y-x| dA).
///
/// For x in the plane of T the normal (solid angle) term is dropped, which is
/// the principal value when x lies inside T.
pub fn static_panel_integrals(tri: &[Vec3; 3], n: Vec3, x: Vec3) -> (Vec3, f64) {
    let d = dot(sub(x, tri[0]), n);
    let rho = sub(x, scale(n, d));
    let diam = norm(sub(tri[1], tri[0])).max(norm(sub(tri[2], tri[0])));
    let mut tangential = [0.0; 3];
    let mut inv_r = 0.0;
    let mut beta_sum = 0.0;
    for k in 0..3 {
        let a = tri[k];
        let b = tri[(k + 1) % 3];
        let len = norm(sub(b, a));
        let s = scale(sub(b, a), 1.0 / len);
        let m = cross(s, n);
        let lm = dot(sub(a, rho), s);
        let lp = dot(sub(b, rho), s);
        let t = dot(sub(a, rho), m);
        let rm = norm(sub(a, x));
        let rp = norm(sub(b, x));
        let r0sq = t * t + d * d;
        let f = if r0sq < 1e-28 * diam * diam {
            0.0
        } else {
            edge_log(lm, lp, rm, rp)
        };
        tangential = sub(tangential, scale(m, f));
        inv_r += t * f;
        if d.abs() > 0.0 && t.abs() > 0.0 {
            let ad = d.abs();
            beta_sum += (t * lp / (r0sq + ad * rp)).atan() - (t * lm / (r0sq + ad * rm)).atan();
        }
    }
    inv_r -= d.abs() * beta_sum;
    // signed solid angle, positive for x on the side n points to
    let normal = if d.abs() <= 1e-12 * diam {
        [0.0; 3]
    } else {
        let a0 = sub(tri[0], x);
        let a1 = sub(tri[1], x);
        let a2 = sub(tri[2], x);
        let (n0, n1, n2) = (norm(a0), norm(a1), norm(a2));
        let num = dot(a0, cross(a1, a2));
        let den = n0 * n1 * n2 + dot(a0, a1) * n2 + dot(a0, a2) * n1 + dot(a1, a2) * n0;
        let omega = -2.0 * num.atan2(den);
        scale(n, -omega)
    };
    (add(tangential, normal), inv_r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(tri: &[Vec3; 3], x: Vec3) -> (Vec3, f64) {
        let area = 0.5 * norm(cross(sub(tri[1], tri[0]), sub(tri[2], tri[0])));
        let rule = TriangleRule::seven().subdivided(6);
        let mut v = [0.0; 3];
        let mut s = 0.0;
        for (p, w) in rule.on(tri, area) {
            let r = sub(p, x);
            let rn = norm(r);
            v = add(v, scale(r, w / rn.powi(3)));
            s += w / rn;
        }
        (v, s)
    }

    #[test]
    fn matches_brute_force_off_panel() {
        let tri = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.2, 0.9, 0.0]];
        let n = [0.0, 0.0, 1.0];
        for x in [[0.3, 0.3, 0.5], [1.5, -0.4, -0.3], [0.4, 0.2, -0.2], [-1.0, 2.0, 0.0]] {
            let (v, s) = static_panel_integrals(&tri, n, x);
            let (bv, bs) = brute(&tri, x);
            assert!(norm(sub(v, bv)) < 1e-6 * norm(bv).max(1.0), "{x:?}: {v:?} vs {bv:?}");
            assert!((s - bs).abs() < 1e-6 * bs, "{x:?}: {s} vs {bs}");
        }
    }

    #[test]
    fn rules_integrate_polynomials() {
        let tri = [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        for rule in [TriangleRule::six(), TriangleRule::seven().subdivided(2)] {
            let s: f64 = rule.on(&tri, 1.0).iter().map(|(p, w)| w * p[0] * p[0] * p[1]).sum();
            // ∫ x² y over the triangle = 2/15
            assert!((s - 2.0 / 15.0).abs() < 1e-12);
        }
    }
}
