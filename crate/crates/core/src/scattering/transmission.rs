use serde::{Deserialize, Serialize};

use super::{
    constants, evaluate_field, normal_of, s_map, side_of, transmission_map, weighted_norm,
    ElectromagneticField, MaterialParams, Side,
};
use crate::clifford::{Dim, Multivector, UnitVector};
use crate::error::{Error, Result};
use crate::geometry::{add, scale, Surface3D, SurfaceShape, Vec3};
use crate::kernels::WaveNumber;
use crate::operators::{
    panel_average, CauchyKernel3d, ComplexOperator, GridFunction, Local, LocalMap, Space,
};
use crate::solvers::{solve_dense, SolveReport};

type Mv = Multivector<f64>;

pub const MAX_BODIES: usize = 3;

/// A bounded region Ω_j with outward-oriented boundary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Body {
    pub surface: Surface3D,
    pub material: MaterialParams,
}

/// Exterior region Ω₀ and up to three disjoint bodies Ω₁..Ω_N. On ∂Ω_j the body
/// normal ν_j is the mesh normal and the exterior normal is ν₀ = −ν_j.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransmissionConfig {
    pub exterior: MaterialParams,
    pub bodies: Vec<Body>,
}

impl TransmissionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bodies.is_empty() || self.bodies.len() > MAX_BODIES {
            return Err(Error::Invalid(format!(
                "transmission needs 1 to {MAX_BODIES} bodies, got {}",
                self.bodies.len()
            )));
        }
        self.exterior.validate()?;
        for (j, b) in self.bodies.iter().enumerate() {
            b.material.validate()?;
            b.surface.validate()?;
            if (b.material.omega - self.exterior.omega).abs() > 1e-12 * self.exterior.omega {
                return Err(Error::Invalid(format!("body {} has a different frequency", j + 1)));
            }
        }
        for a in 0..self.bodies.len() {
            for b in 0..self.bodies.len() {
                if a == b {
                    continue;
                }
                let (sa, sb) = (&self.bodies[a].surface, &self.bodies[b].surface);
                for v in &sa.vertices {
                    let (t, d) = sb.nearest_panel(*v);
                    if d < 0.5 * sb.diameter(t) || side_of(sb, *v) == Side::Interior {
                        return Err(Error::Invalid(format!(
                            "bodies {} and {} touch or overlap; only disjoint closed surfaces are supported",
                            a + 1,
                            b + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Σ as one surface, with panel offsets of each body.
    pub fn interface(&self) -> Result<(Surface3D, Vec<usize>)> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut offsets = Vec::new();
        for b in &self.bodies {
            offsets.push(triangles.len());
            let base = vertices.len();
            vertices.extend(b.surface.vertices.iter().copied());
            triangles.extend(b.surface.triangles.iter().map(|t| t.map(|v| v + base)));
        }
        offsets.push(triangles.len());
        Ok((Surface3D::new(SurfaceShape::General, vertices, triangles)?, offsets))
    }

    fn wave_numbers(&self) -> Result<Vec<WaveNumber<f64>>> {
        std::iter::once(&self.exterior)
            .chain(self.bodies.iter().map(|b| &b.material))
            .map(|m| m.wave_number())
            .collect()
    }

    fn material(&self, region: usize) -> &MaterialParams {
        if region == 0 {
            &self.exterior
        } else {
            &self.bodies[region - 1].material
        }
    }
}

/// N_j f at a point with normal ν of the body; region 0 uses −ν.
fn region_map(cfg: &TransmissionConfig, region: usize, nu: Vec3) -> LocalMap {
    let m = cfg.material(region);
    let n = if region == 0 { scale(nu, -1.0) } else { nu };
    transmission_map(&normal_of(n), m.alpha(), m.beta())
}

fn apply_map(m: &LocalMap, f: &Mv) -> Mv {
    let mut out = Mv::zero(Dim::Three);
    for i in 0..8 {
        out.set_coeff(i, (0..8).map(|j| m[i][j] * f.coeff(j)).sum());
    }
    out
}

/// Densities, traces and field evaluators of a transmission solve.
#[derive(Clone, Debug)]
pub struct TransmissionSolution {
    pub config: TransmissionConfig,
    pub interface: Surface3D,
    /// Panel ranges of the bodies within Σ.
    pub offsets: Vec<usize>,
    pub wave_numbers: Vec<WaveNumber<f64>>,
    /// h on Σ, full algebra.
    pub density: Vec<Mv>,
    /// Discrete traces: index 0 the exterior trace on Σ, index j ≥ 1 the trace on ∂Ω_j.
    pub traces: Vec<Vec<Mv>>,
    /// Jump data g on Σ.
    pub data: Vec<Mv>,
    pub incident: Option<ElectromagneticField>,
    pub report: SolveReport,
}

impl TransmissionSolution {
    /// Region containing x: 0 for the exterior.
    pub fn region_of(&self, x: Vec3) -> usize {
        for (j, b) in self.config.bodies.iter().enumerate() {
            if side_of(&b.surface, x) == Side::Interior {
                return j + 1;
            }
        }
        0
    }

    /// Field of region `region` represented by h (scattered field in Ω₀).
    pub fn field(&self, region: usize, x: Vec3) -> Result<Mv> {
        if region > self.config.bodies.len() {
            return Err(Error::Invalid(format!("no region {region}")));
        }
        if self.region_of(x) != region {
            return Err(Error::Invalid(format!("point {x:?} is not in region {region}")));
        }
        if region == 0 {
            evaluate_field(&self.interface, self.wave_numbers[0], Side::Exterior, &self.density, x)
        } else {
            let (a, b) = (self.offsets[region - 1], self.offsets[region]);
            evaluate_field(
                &self.config.bodies[region - 1].surface,
                self.wave_numbers[region],
                Side::Interior,
                &self.density[a..b],
                x,
            )
        }
    }

    /// Total field at x: scattered plus incident in Ω₀, transmitted elsewhere.
    pub fn total_field(&self, x: Vec3) -> Result<Mv> {
        let region = self.region_of(x);
        let f = self.field(region, x)?;
        match (&self.incident, region) {
            (Some(inc), 0) => Ok(f + inc.multivector(x)?),
            _ => Ok(f),
        }
    }
}

/// Algorithm of the transmission problem: solves Σ_j N_j E_j S_j h = −g with
/// E_j the Hardy projection of Ω_j and S_j h = ½(1 − ν_j)h, where g = N₀(F^inc).
pub fn solve_transmission(
    config: &TransmissionConfig,
    incident: &ElectromagneticField,
) -> Result<TransmissionSolution> {
    config.validate()?;
    incident.validate()?;
    let (sigma, _) = config.interface()?;
    let f_inc = panel_average(&sigma, &|x| incident.multivector(x))?;
    let g: Vec<Mv> = f_inc
        .iter()
        .enumerate()
        .map(|(i, f)| apply_map(&region_map(config, 0, sigma.normals[i]), f))
        .collect();
    let mut sol = solve_transmission_with_data(config, &g)?;
    sol.incident = Some(incident.clone());
    Ok(sol)
}

/// The transmission system for given jump data g on Σ: Σ_j N_j E_j S_j h = −g.
pub fn solve_transmission_with_data(
    config: &TransmissionConfig,
    g: &[Mv],
) -> Result<TransmissionSolution> {
    config.validate()?;
    let (sigma, offsets) = config.interface()?;
    if g.len() != sigma.len() {
        return Err(Error::Dimension(format!("{} data values for {} panels", g.len(), sigma.len())));
    }
    let ks = config.wave_numbers()?;
    let normals: Vec<UnitVector<f64>> = sigma.normals.iter().map(|n| normal_of(*n)).collect();
    let a = assemble_system(config, &sigma, &offsets, &ks)?;
    let rhs = GridFunction {
        dim: Dim::Three,
        values: g.iter().map(|v| -*v).collect(),
    };
    let (h, report) = solve_dense(&a, &rhs)?;
    let h = h.values;

    let mut traces = Vec::with_capacity(config.bodies.len() + 1);
    let kernel0 = CauchyKernel3d::new(&sigma, ks[0])?;
    let u0: Vec<Mv> = h.iter().enumerate().map(|(i, v)| apply_map(&s_map(&normals[i], 1.0), v)).collect();
    let e0 = kernel0.apply(&u0)?;
    traces.push(half_trace(&u0, &e0, -1.0));
    drop(kernel0);
    for (j, body) in config.bodies.iter().enumerate() {
        let kernel = CauchyKernel3d::new(&body.surface, ks[j + 1])?;
        let (lo, hi) = (offsets[j], offsets[j + 1]);
        let u: Vec<Mv> = (lo..hi).map(|i| apply_map(&s_map(&normals[i], -1.0), &h[i])).collect();
        let e = kernel.apply(&u)?;
        traces.push(half_trace(&u, &e, 1.0));
    }
    Ok(TransmissionSolution {
        config: config.clone(),
        interface: sigma,
        offsets,
        wave_numbers: ks,
        density: h,
        traces,
        data: g.to_vec(),
        incident: None,
        report,
    })
}

fn half_trace(u: &[Mv], eu: &[Mv], sign: f64) -> Vec<Mv> {
    u.iter()
        .zip(eu)
        .map(|(a, b)| (*a + b.scale_re(sign)).scale_re(constants::HARDY_HALF))
        .collect()
}

/// The matrix of Σ_j N_j E_j S_j on Σ (full algebra per panel). For identical
/// materials N₀ = −N₁ and it reduces to ½N₁(E − S).
pub fn transmission_operator(config: &TransmissionConfig) -> Result<ComplexOperator> {
    config.validate()?;
    let (sigma, offsets) = config.interface()?;
    let ks = config.wave_numbers()?;
    assemble_system(config, &sigma, &offsets, &ks)
}

fn assemble_system(
    config: &TransmissionConfig,
    sigma: &Surface3D,
    offsets: &[usize],
    ks: &[WaveNumber<f64>],
) -> Result<ComplexOperator> {
    let space = Space::of_surface(sigma, Local::all(Dim::Three));
    let normals: Vec<UnitVector<f64>> = sigma.normals.iter().map(|n| normal_of(*n)).collect();
    // Ω₀: N₀ ½(I − E_Σ) ½(1 + ν)
    let kernel0 = CauchyKernel3d::new(sigma, ks[0])?;
    let left0 = |i: usize| region_map(config, 0, sigma.normals[i]);
    let right0 = |j: usize| s_map(&normals[j], 1.0);
    let h = constants::HARDY_HALF;
    let mut a = kernel0.assemble(&space, h, -h, true, &left0, &right0, "B S")?;
    drop(kernel0);
    // Ω_j: N_j ½(I + E_j) ½(1 − ν)
    for (j, body) in config.bodies.iter().enumerate() {
        let kernel = CauchyKernel3d::new(&body.surface, ks[j + 1])?;
        let off = offsets[j];
        let sub_space = Space::of_surface(&body.surface, Local::all(Dim::Three));
        let left = |i: usize| region_map(config, j + 1, body.surface.normals[i]);
        let right = |i: usize| s_map(&normals[off + i], -1.0);
        let block = kernel.assemble(&sub_space, h, h, true, &left, &right, "N E S")?;
        let base = 8 * off;
        let m = block.matrix.nrows();
        for c in 0..m {
            for r in 0..m {
                a.matrix[(base + r, base + c)] += block.matrix[(r, c)];
            }
        }
    }
    Ok(a)
}

/// Relative jump residual of the computed fields: at each panel the one-sided limits
/// F₀ (scattered) and F_j are extrapolated linearly from the points c ± δν and c ± 2δν,
/// δ = `offset` times the panel diameter, and ‖N₀F₀ + N_jF_j + g‖ / ‖g‖ is returned.
pub fn jump_residual(sol: &TransmissionSolution, offset: f64) -> Result<f64> {
    let sigma = &sol.interface;
    let mut res = Vec::with_capacity(sigma.len());
    for j in 0..sol.config.bodies.len() {
        for i in sol.offsets[j]..sol.offsets[j + 1] {
            let c = sigma.centroids[i];
            let nu = sigma.normals[i];
            let d = offset * sigma.diameter(i);
            let at = |t: f64| add(c, scale(nu, t));
            let limit = |region: usize, s: f64| -> Result<Mv> {
                let f1 = sol.field(region, at(s * d))?;
                let f2 = sol.field(region, at(2.0 * s * d))?;
                Ok(f1.scale_re(2.0) - f2)
            };
            let l0 = limit(0, 1.0)?;
            let lj = limit(j + 1, -1.0)?;
            let r = apply_map(&region_map(&sol.config, 0, nu), &l0)
                + apply_map(&region_map(&sol.config, j + 1, nu), &lj)
                + sol.data[i];
            res.push(r);
        }
    }
    Ok(weighted_norm(&res, &sigma.areas) / weighted_norm(&sol.data, &sigma.areas))
}

/// Jump data g = −N₀F⁰ − Σ_j N_jF^j of a given exterior/interior field pair.
pub fn jump_data(
    config: &TransmissionConfig,
    exterior: &dyn Fn(Vec3) -> Result<Mv>,
    interior: &[&dyn Fn(Vec3) -> Result<Mv>],
) -> Result<Vec<Mv>> {
    let (sigma, offsets) = config.interface()?;
    if interior.len() != config.bodies.len() {
        return Err(Error::Dimension("one interior field per body".into()));
    }
    let f0 = panel_average(&sigma, exterior)?;
    let mut g = Vec::with_capacity(sigma.len());
    for (j, fj) in interior.iter().enumerate() {
        let vals = panel_average(&config.bodies[j].surface, *fj)?;
        for (q, i) in (offsets[j]..offsets[j + 1]).enumerate() {
            let nu = sigma.normals[i];
            let v = apply_map(&region_map(config, 0, nu), &f0[i])
                + apply_map(&region_map(config, j + 1, nu), &vals[q]);
            g.push(-v);
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_icosphere, make_icosphere_at};
    use num_complex::Complex64 as C64;

    fn body(center: Vec3, eps: f64) -> Body {
        Body {
            surface: make_icosphere_at(0.5, center, 0).unwrap(),
            material: MaterialParams::new(eps, 1.0, 0.0, 2.0).unwrap(),
        }
    }

    fn config(bodies: Vec<Body>) -> TransmissionConfig {
        TransmissionConfig { exterior: MaterialParams::vacuum(2.0).unwrap(), bodies }
    }

    #[test]
    fn validation_rules() {
        assert!(config(vec![]).validate().is_err());
        let four = (0..4).map(|i| body([3.0 * i as f64, 0.0, 0.0], 2.0)).collect();
        assert!(config(four).validate().is_err());
        assert!(config(vec![body([0.0; 3], 2.0), body([0.2, 0.0, 0.0], 2.0)]).validate().is_err());
        let mut other = body([3.0, 0.0, 0.0], 2.0);
        other.material.omega = 3.0;
        assert!(config(vec![body([0.0; 3], 2.0), other]).validate().is_err());
        assert!(config(vec![body([0.0; 3], 2.0), body([3.0, 0.0, 0.0], 4.0)]).validate().is_ok());
    }

    #[test]
    fn interface_offsets_and_regions() {
        let cfg = config(vec![body([0.0; 3], 2.0), body([3.0, 0.0, 0.0], 4.0)]);
        let (sigma, offsets) = cfg.interface().unwrap();
        assert_eq!(offsets, vec![0, 20, 40]);
        assert_eq!(sigma.len(), 40);
        let sol = solve_transmission(&cfg, &ElectromagneticField::Zero).unwrap();
        assert_eq!(sol.region_of([0.0; 3]), 1);
        assert_eq!(sol.region_of([3.1, 0.0, 0.0]), 2);
        assert_eq!(sol.region_of([1.5, 2.0, 0.0]), 0);
    }

    #[test]
    fn zero_incident_gives_zero_density() {
        let cfg = config(vec![body([0.0; 3], 2.0)]);
        let sol = solve_transmission(&cfg, &ElectromagneticField::Zero).unwrap();
        assert!(sol.density.iter().all(|h| h.norm() == 0.0));
        assert_eq!(sol.total_field([2.0, 0.0, 0.0]).unwrap().norm(), 0.0);
    }

    #[test]
    fn no_contrast_reflects_little() {
        let m = MaterialParams::vacuum(2.0).unwrap();
        let cfg = TransmissionConfig {
            exterior: m,
            bodies: vec![Body { surface: make_icosphere(1.0, 1).unwrap(), material: m }],
        };
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let inc = ElectromagneticField::plane_wave([0.0, 0.0, 1.0], [one, zero, zero], C64::new(2.0, 0.0));
        let sol = solve_transmission(&cfg, &inc).unwrap();
        let x = [0.0, 2.5, 0.5];
        let r = sol.field(0, x).unwrap().norm() / inc.multivector(x).unwrap().norm();
        assert!(r < 5e-2, "reflected {r:.2e}");
    }
}
