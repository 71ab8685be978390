use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::clifford::{Dim, Multivector};
use crate::error::{Error, Result};
use crate::geometry::{norm, sub, Vec3};

type Mv = Multivector<f64>;
type CVec = [C64; 3];

/// Time-harmonic electromagnetic field (E, H) with ∇×E = ikH, ∇×H = −ikE,
/// packed as the multivector F = E + *H, which satisfies DF = ikF.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElectromagneticField {
    Zero,
    /// Radiating electric dipole: H = ∇φ × p, E = (i/k)(∇(∇φ·p) + k²φp), φ = Φ_k(x − position).
    Dipole {
        position: Vec3,
        moment: CVec,
        k: C64,
    },
    /// E = p e^{ik d·x}, H = d × p e^{ik d·x}.
    PlaneWave {
        direction: Vec3,
        polarization: CVec,
        k: C64,
    },
    Sum {
        fields: Vec<ElectromagneticField>,
    },
    Scaled {
        factor: C64,
        field: Box<ElectromagneticField>,
    },
}

fn cross_c(a: CVec, b: CVec) -> CVec {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn real_c(v: Vec3) -> CVec {
    v.map(|x| C64::new(x, 0.0))
}

impl ElectromagneticField {
    pub fn dipole(position: Vec3, moment: CVec, k: C64) -> Self {
        ElectromagneticField::Dipole { position, moment, k }
    }

    pub fn plane_wave(direction: Vec3, polarization: CVec, k: C64) -> Self {
        ElectromagneticField::PlaneWave {
            direction,
            polarization,
            k,
        }
    }

    pub fn negated(self) -> Self {
        ElectromagneticField::Scaled {
            factor: C64::new(-1.0, 0.0),
            field: Box::new(self),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ElectromagneticField::Zero => Ok(()),
            ElectromagneticField::Dipole { k, .. } => check_k(*k),
            ElectromagneticField::PlaneWave {
                direction,
                polarization,
                k,
            } => {
                check_k(*k)?;
                if (norm(*direction) - 1.0).abs() > 1e-12 {
                    return Err(Error::Invalid("plane wave direction must be a unit vector".into()));
                }
                let d: C64 = (0..3).map(|a| polarization[a] * direction[a]).sum();
                if d.norm() > 1e-12 * polarization.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0) {
                    return Err(Error::Invalid("plane wave polarization must be orthogonal to the direction".into()));
                }
                Ok(())
            }
            ElectromagneticField::Sum { fields } => fields.iter().try_for_each(|f| f.validate()),
            ElectromagneticField::Scaled { field, .. } => field.validate(),
        }
    }

    /// (E, H) at x.
    pub fn eh(&self, x: Vec3) -> Result<(CVec, CVec)> {
        let zero = [C64::new(0.0, 0.0); 3];
        match self {
            ElectromagneticField::Zero => Ok((zero, zero)),
            ElectromagneticField::Dipole { position, moment, k } => {
                check_k(*k)?;
                let d = sub(x, *position);
                let r = norm(d);
                if r == 0.0 {
                    return Err(Error::Invalid("dipole field evaluated at its source".into()));
                }
                let n = d.map(|c| c / r);
                let ik = C64::i() * k;
                let phi = -(ik * r).exp() / (4.0 * PI * r);
                let dphi = phi * (ik - 1.0 / r);
                let ddphi = phi * ((ik - 1.0 / r).powi(2) + 1.0 / (r * r));
                let grad = real_c(n).map(|c| c * dphi);
                let h = cross_c(grad, *moment);
                let np: C64 = (0..3).map(|a| moment[a] * n[a]).sum();
                let mut e = zero;
                for a in 0..3 {
                    // Hess φ · p = φ'' n (n·p) + (φ'/r)(p − n (n·p))
                    let hess = ddphi * n[a] * np + dphi / r * (moment[a] - np * n[a]);
                    e[a] = C64::i() / k * (hess + k * k * phi * moment[a]);
                }
                Ok((e, h))
            }
            ElectromagneticField::PlaneWave {
                direction,
                polarization,
                k,
            } => {
                let phase = (C64::i() * k * crate::geometry::dot(*direction, x)).exp();
                let e = polarization.map(|c| c * phase);
                let h = cross_c(real_c(*direction), e);
                Ok((e, h))
            }
            ElectromagneticField::Sum { fields } => {
                let (mut e, mut h) = (zero, zero);
                for f in fields {
                    let (fe, fh) = f.eh(x)?;
                    for a in 0..3 {
                        e[a] += fe[a];
                        h[a] += fh[a];
                    }
                }
                Ok((e, h))
            }
            ElectromagneticField::Scaled { factor: c, field } => {
                let (e, h) = field.eh(x)?;
                Ok((e.map(|v| v * c), h.map(|v| v * c)))
            }
        }
    }

    /// F = E + *H.
    pub fn multivector(&self, x: Vec3) -> Result<Mv> {
        let (e, h) = self.eh(x)?;
        Ok(pack(e, h))
    }
}

fn check_k(k: C64) -> Result<()> {
    if k.norm() == 0.0 || k.im < 0.0 || !k.re.is_finite() || !k.im.is_finite() {
        return Err(Error::Invalid(format!("field wave number must be nonzero with Im k >= 0, got {k}")));
    }
    Ok(())
}

/// E + *H, with *e1 = e23, *e2 = −e13, *e3 = e12.
pub fn pack(e: CVec, h: CVec) -> Mv {
    let mut m = Mv::zero(Dim::Three);
    for a in 0..3 {
        m.set_coeff(a + 1, e[a]);
    }
    let mut hv = Mv::zero(Dim::Three);
    for a in 0..3 {
        hv.set_coeff(a + 1, h[a]);
    }
    m + hv.hodge_star()
}

/// (E, H) from F = E + *H, ignoring ∧⁰ and ∧³ parts.
pub fn unpack(f: &Mv) -> (CVec, CVec) {
    let mut e = [C64::new(0.0, 0.0); 3];
    let hs = f.grade(2).hodge_star();
    let mut h = [C64::new(0.0, 0.0); 3];
    for a in 0..3 {
        e[a] = f.coeff(a + 1);
        h[a] = hs.coeff(a + 1);
    }
    (e, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_curl(f: &dyn Fn(Vec3) -> CVec, x: Vec3, eps: f64) -> CVec {
        let d = |a: usize, b: usize| {
            let mut p = x;
            let mut m = x;
            p[b] += eps;
            m[b] -= eps;
            (f(p)[a] - f(m)[a]) / (2.0 * eps)
        };
        [d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)]
    }

    fn fd_div(f: &dyn Fn(Vec3) -> CVec, x: Vec3, eps: f64) -> C64 {
        (0..3)
            .map(|a| {
                let mut p = x;
                let mut m = x;
                p[a] += eps;
                m[a] -= eps;
                (f(p)[a] - f(m)[a]) / (2.0 * eps)
            })
            .sum()
    }

    fn check_maxwell(field: &ElectromagneticField, k: C64, x: Vec3) {
        let e = |p: Vec3| field.eh(p).unwrap().0;
        let h = |p: Vec3| field.eh(p).unwrap().1;
        let (e0, h0) = field.eh(x).unwrap();
        let scale = e0.iter().chain(&h0).map(|c| c.norm()).fold(0.0, f64::max);
        let ce = fd_curl(&e, x, 1e-5);
        let ch = fd_curl(&h, x, 1e-5);
        for a in 0..3 {
            assert!((ce[a] - C64::i() * k * h0[a]).norm() < 1e-6 * scale, "curl E");
            assert!((ch[a] + C64::i() * k * e0[a]).norm() < 1e-6 * scale, "curl H");
        }
        assert!(fd_div(&e, x, 1e-5).norm() < 1e-6 * scale);
        assert!(fd_div(&h, x, 1e-5).norm() < 1e-6 * scale);
    }

    #[test]
    fn dipole_solves_maxwell() {
        let k = C64::new(2.0, 0.3);
        let f = ElectromagneticField::dipole(
            [0.1, -0.2, 0.3],
            [C64::new(1.0, 0.5), C64::new(-0.3, 0.0), C64::new(0.2, -1.0)],
            k,
        );
        for x in [[1.0, 0.5, -0.4], [-0.7, 1.1, 0.9]] {
            check_maxwell(&f, k, x);
        }
    }

    #[test]
    fn plane_wave_solves_maxwell() {
        let k = C64::new(3.0, 0.0);
        let d = [0.6, 0.0, 0.8];
        let f = ElectromagneticField::plane_wave(d, [C64::new(0.8, 0.0), C64::new(0.0, 1.0), C64::new(-0.6, 0.0)], k);
        f.validate().unwrap();
        check_maxwell(&f, k, [0.3, -0.2, 0.5]);
        let bad = ElectromagneticField::plane_wave(d, [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)], k);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn pack_roundtrip_and_dirac_residual() {
        let e = [C64::new(1.0, 2.0), C64::new(-3.0, 0.5), C64::new(0.0, 1.0)];
        let h = [C64::new(0.5, 0.0), C64::new(2.0, -1.0), C64::new(-1.0, 1.0)];
        let (e2, h2) = unpack(&pack(e, h));
        for a in 0..3 {
            assert!((e2[a] - e[a]).norm() < 1e-15 && (h2[a] - h[a]).norm() < 1e-15);
        }
        // D F = ik F by central differences, D = Σ e_a ∂_a
        let k = C64::new(1.5, 0.0);
        let f = ElectromagneticField::dipole([0.0; 3], [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.5, 0.0)], k);
        let x = [0.8, -0.3, 0.6];
        let eps = 1e-5;
        let mut df = Mv::zero(Dim::Three);
        for a in 0..3 {
            let mut p = x;
            let mut m = x;
            p[a] += eps;
            m[a] -= eps;
            let deriv = (f.multivector(p).unwrap() - f.multivector(m).unwrap()).scale_re(0.5 / eps);
            df = df + Mv::basis(Dim::Three, a + 1).clifford(&deriv);
        }
        let want = f.multivector(x).unwrap().scale(C64::i() * k);
        assert!(df.max_diff(&want) < 1e-6 * want.norm());
    }
}
