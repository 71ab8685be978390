//! End-to-end boundary integral drivers and field evaluation.

mod fields;
mod maxwell;
mod plane;
mod transmission;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::clifford::{Dim, Multivector, UnitVector};
use crate::error::{Error, Result};
use crate::geometry::{dot, Surface3D, Vec3};
use crate::kernels::WaveNumber;
use crate::operators::{
    cauchy_integral, compose_local, half_map, local_map, reflection_map, LocalMap, Reflection,
};

pub use fields::{pack, unpack, ElectromagneticField};
pub use maxwell::{
    calderon_check, half_space_inverse_norms, resonance_sweep, skew_defect, solve_dirac_generic,
    solve_maxwell_pec, CalderonRow, DiracSolution, HalfSpaceRow, MaxwellSolution, ResonanceRow,
};
pub use plane::{
    corner_sweep, evaluate_field_2d, CORNER_DEFLATION, solve_dirac_generic_2d, solve_dirichlet2d_classical,
    solve_dirichlet2d_spin, CornerRow, Dirichlet2dSolution,
};
pub use transmission::{
    jump_data, jump_residual, solve_transmission, solve_transmission_with_data, transmission_operator,
    Body, TransmissionConfig,
    TransmissionSolution,
};

type Mv = Multivector<f64>;

/// The constants of the spin formulations, in one place.
pub mod constants {
    /// 2D Dirichlet: the even block of T⁺S⁻N⁺E⁺S⁻ is scaled by this ...
    pub const DIRICHLET2D_OPERATOR_SCALE: f64 = 4.0;
    /// ... and the data g by this, giving h + (K-type terms) = 2g.
    pub const DIRICHLET2D_DATA_SCALE: f64 = 2.0;
    /// Classical double layer equation (I + K) f = 2g.
    pub const CLASSICAL_DATA_SCALE: f64 = 2.0;
    /// T⁺S^∓N^±S^∓ h = ¼ h for even h: the identity part of the spin systems.
    pub const SPIN_IDENTITY: f64 = 0.25;
    /// Printed Maxwell multiplier M = 2·T⁺S⁺N⁺.
    pub const MULTIPLIER_FACTOR: f64 = 2.0;
    /// Exterior field F(x) = −½ ∫ Ψ_k(y − x)(1 + ν) h dσ.
    pub const EXTERIOR_FIELD_SCALE: f64 = -0.5;
    /// Interior field in region Ω_j: F = ½ ∫ Ψ_{k_j}(y − x)(ν_j − 1) h dσ.
    pub const INTERIOR_FIELD_SCALE: f64 = 0.5;
    /// E^± = ½(I ± E).
    pub const HARDY_HALF: f64 = 0.5;
}

/// Which side of the boundary a problem or field lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Interior,
    Exterior,
}

/// Boundary condition part N^±: tangential (N⁺) or normal (N⁻).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Tangential,
    Normal,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Interior => 1.0,
            Side::Exterior => -1.0,
        }
    }
}

impl Part {
    fn sign(self) -> f64 {
        match self {
            Part::Tangential => 1.0,
            Part::Normal => -1.0,
        }
    }
}

/// Homogeneous isotropic material at angular frequency ω.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub epsilon: f64,
    pub mu: f64,
    #[serde(default)]
    pub sigma_c: f64,
    pub omega: f64,
}

impl MaterialParams {
    pub fn new(epsilon: f64, mu: f64, sigma_c: f64, omega: f64) -> Result<Self> {
        let m = MaterialParams {
            epsilon,
            mu,
            sigma_c,
            omega,
        };
        m.validate()?;
        Ok(m)
    }

    /// Vacuum-like material (ε = μ = 1, σ = 0) with k = ω.
    pub fn vacuum(omega: f64) -> Result<Self> {
        Self::new(1.0, 1.0, 0.0, omega)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.epsilon > 0.0
            && self.mu > 0.0
            && self.sigma_c >= 0.0
            && self.omega > 0.0
            && [self.epsilon, self.mu, self.sigma_c, self.omega]
                .iter()
                .all(|x| x.is_finite());
        if !ok {
            return Err(Error::Invalid(format!("invalid material {self:?}")));
        }
        Ok(())
    }

    /// α = (ε + iσ/ω)^{1/2}, principal branch.
    pub fn alpha(&self) -> C64 {
        C64::new(self.epsilon, self.sigma_c / self.omega).sqrt()
    }

    /// β = μ^{-1/2}.
    pub fn beta(&self) -> C64 {
        C64::new(self.mu.powf(-0.5), 0.0)
    }

    /// k = ω α / β.
    pub fn k(&self) -> C64 {
        self.alpha() / self.beta() * self.omega
    }

    pub fn wave_number(&self) -> Result<WaveNumber<f64>> {
        self.validate()?;
        WaveNumber::new(self.k())
    }
}

pub(crate) fn normal_of(n: Vec3) -> UnitVector<f64> {
    UnitVector::normalized(Dim::Three, &n).expect("unit normal")
}

/// N^± as a local map: ½(I ± N).
pub(crate) fn n_part_map(nu: &UnitVector<f64>, part: Part) -> LocalMap {
    half_map(&reflection_map(Reflection::N, nu), part.sign())
}

pub(crate) fn s_map(nu: &UnitVector<f64>, sign: f64) -> LocalMap {
    half_map(&reflection_map(Reflection::S, nu), sign)
}

pub(crate) fn t_plus_map(nu: &UnitVector<f64>) -> LocalMap {
    half_map(&reflection_map(Reflection::T, nu), 1.0)
}

/// T⁺ S^{s} N^{part} at a node.
pub(crate) fn spin_left_map(nu: &UnitVector<f64>, s_sign: f64, part: Part) -> LocalMap {
    compose_local(
        &t_plus_map(nu),
        &compose_local(&s_map(nu, s_sign), &n_part_map(nu, part)),
    )
}

/// Transmission map f ↦ ν∧(β⁻¹T⁺f + α⁻¹T⁻f) + ν⌟(βT⁺f + αT⁻f).
pub fn transmission_map(nu: &UnitVector<f64>, alpha: C64, beta: C64) -> LocalMap {
    let n = *nu.as_multivector();
    local_map(Dim::Three, move |f| {
        let (ev, od) = (f.even(), f.odd());
        let a = ev.scale(beta.inv()) + od.scale(alpha.inv());
        let b = ev.scale(beta) + od.scale(alpha);
        n.wedge(&a) + n.lcontract(&b)
    })
}

/// Field of a boundary density h through the spin representation:
/// interior F = C(S⁻h), exterior F = −C(S⁺h), where C u(x) = ∫ Ψ_k(y − x) ν u dσ.
///
/// The point must be at least a quarter of the nearest panel diameter off the surface.
pub fn evaluate_field(
    surface: &Surface3D,
    k: WaveNumber<f64>,
    side: Side,
    density: &[Mv],
    x: Vec3,
) -> Result<Mv> {
    if density.len() != surface.len() {
        return Err(Error::Dimension(format!(
            "density has {} values for {} panels",
            density.len(),
            surface.len()
        )));
    }
    let s = -side.sign();
    let projected: Vec<Mv> = density
        .iter()
        .zip(&surface.normals)
        .map(|(h, n)| {
            let nu = normal_of(*n);
            (*h + nu.as_multivector().clifford(h).scale_re(s)).scale_re(0.5)
        })
        .collect();
    let c = cauchy_integral(surface, k, &projected, x)?;
    Ok(c.scale_re(side.sign()))
}

/// Which side of a closed surface x lies on, by the solid angle it subtends.
pub fn side_of(surface: &Surface3D, x: Vec3) -> Side {
    let mut omega = 0.0;
    for t in 0..surface.len() {
        let d = crate::geometry::sub(surface.centroids[t], x);
        let r = crate::geometry::norm(d);
        omega += surface.areas[t] * dot(d, surface.normals[t]) / (r * r * r);
    }
    if omega > 2.0 * std::f64::consts::PI {
        Side::Interior
    } else {
        Side::Exterior
    }
}

/// L2 norm √(Σ w |f|²) of panel values.
pub fn weighted_norm(values: &[Mv], weights: &[f64]) -> f64 {
    values
        .iter()
        .zip(weights)
        .map(|(v, w)| w * v.norm().powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Relative weighted L2 error ‖a − b‖/‖b‖.
pub fn relative_error(a: &[Mv], b: &[Mv], weights: &[f64]) -> f64 {
    let diff: Vec<Mv> = a.iter().zip(b).map(|(x, y)| *x - *y).collect();
    weighted_norm(&diff, weights) / weighted_norm(b, weights)
}

/// Energy flux Σ w_i (f_i, ν_i f_i) of panel values.
pub fn boundary_flux(surface: &Surface3D, f: &[Mv]) -> C64 {
    f.iter()
        .enumerate()
        .map(|(i, fi)| {
            let nu = normal_of(surface.normals[i]);
            fi.inner(&nu.as_multivector().clifford(fi)) * surface.areas[i]
        })
        .sum()
}

/// ∧⁰ + ∧³ share of a field: |F₀|² + |F₃|² over |F|², as a norm ratio.
pub fn grade_residual(f: &Mv) -> f64 {
    let bad = f.grade(0) + f.grade(3);
    let n = f.norm();
    if n == 0.0 {
        0.0
    } else {
        bad.norm() / n
    }
}

/// Quasi-uniform points on a sphere (Fibonacci lattice).
pub fn sphere_points(center: Vec3, radius: f64, count: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [
                center[0] + radius * r * phi.cos(),
                center[1] + radius * r * phi.sin(),
                center[2] + radius * z,
            ]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_icosphere;

    #[test]
    fn material_derived_quantities() {
        let m = MaterialParams::new(4.0, 1.0, 0.0, 2.0).unwrap();
        assert!((m.alpha() - C64::new(2.0, 0.0)).norm() < 1e-15);
        assert!((m.k() - C64::new(4.0, 0.0)).norm() < 1e-15);
        let lossy = MaterialParams::new(1.0, 2.0, 3.0, 1.5).unwrap();
        assert!(lossy.alpha().re > 0.0 && lossy.k().im > 0.0);
        assert!(MaterialParams::new(-1.0, 1.0, 0.0, 1.0).is_err());
        assert!(MaterialParams::new(1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn spin_identity_part_is_a_quarter() {
        let nu = UnitVector::normalized(Dim::Three, &[0.3, -0.5, 0.8]).unwrap();
        for (s, part) in [(1.0, Part::Tangential), (1.0, Part::Normal), (-1.0, Part::Tangential), (-1.0, Part::Normal)] {
            let l = compose_local(&spin_left_map(&nu, s, part), &s_map(&nu, s));
            for b in [0usize, 4, 5, 6] {
                let h = Mv::basis(Dim::Three, b);
                let mut out = Mv::zero(Dim::Three);
                for i in 0..8 {
                    out.set_coeff(i, (0..8).map(|j| l[i][j] * h.coeff(j)).sum());
                }
                let want = h.scale_re(constants::SPIN_IDENTITY);
                assert!(out.max_diff(&want) < 1e-15, "{s} {part:?} {b}");
            }
        }
    }

    #[test]
    fn side_detection() {
        let s = make_icosphere(1.0, 1).unwrap();
        assert_eq!(side_of(&s, [0.1, 0.2, -0.1]), Side::Interior);
        assert_eq!(side_of(&s, [1.5, 0.2, -0.1]), Side::Exterior);
    }

    #[test]
    fn zero_density_gives_zero_field() {
        let s = make_icosphere(1.0, 1).unwrap();
        let h = vec![Mv::zero(Dim::Three); s.len()];
        let f = evaluate_field(&s, WaveNumber::real(1.0), Side::Exterior, &h, [2.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.norm(), 0.0);
        assert!(evaluate_field(&s, WaveNumber::real(1.0), Side::Exterior, &h, s.centroids[0]).is_err());
    }
}
