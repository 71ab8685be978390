use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    constants, evaluate_field, n_part_map, normal_of, s_map, spin_left_map, ElectromagneticField,
    Part, Side,
};
use crate::clifford::{Dim, Multivector};
use crate::error::{Error, Result};
use crate::geometry::{cross, norm, Curve2D, Mesh, Surface3D, Vec3};
use crate::kernels::WaveNumber;
use crate::operators::{
    assemble_e_2d, assemble_reflection, identity_map, panel_average, CauchyKernel3d,
    ComplexOperator, GridFunction, Local, LocalMap, Operator, Scalar, Reflection, RealLinearOperator, Space,
    reflection_map,
};
use crate::solvers::{SVD_LIMIT, restricted_operator, norm_inverse, singular_values, solve_dense, SolveReport};

type Mv = Multivector<f64>;

/// Solution of a three-dimensional spin system.
#[derive(Clone, Debug)]
pub struct DiracSolution {
    pub surface: Surface3D,
    pub k: WaveNumber<f64>,
    pub side: Side,
    pub part: Part,
    /// Even density h, one value per panel.
    pub density: Vec<Mv>,
    /// Discrete boundary trace f = E^±S^∓h.
    pub trace: Vec<Mv>,
    pub report: SolveReport,
}

impl DiracSolution {
    pub fn field(&self, x: Vec3) -> Result<Mv> {
        evaluate_field(&self.surface, self.k, self.side, &self.density, x)
    }
}

/// Exterior Maxwell (perfect conductor) solution: h, the scattered trace and field.
#[derive(Clone, Debug)]
pub struct MaxwellSolution {
    pub inner: DiracSolution,
    /// Panel averages of the incident field.
    pub incident_trace: Vec<Mv>,
}

impl MaxwellSolution {
    pub fn density(&self) -> &[Mv] {
        &self.inner.density
    }

    /// Scattered trace on the panels.
    pub fn trace(&self) -> &[Mv] {
        &self.inner.trace
    }

    pub fn report(&self) -> &SolveReport {
        &self.inner.report
    }

    /// Scattered field E + *H at an exterior point.
    pub fn scattered(&self, x: Vec3) -> Result<Mv> {
        self.inner.field(x)
    }
}

fn side_signs(side: Side) -> (f64, f64) {
    // (sign of S in the ansatz, sign of E in the Hardy projection)
    match side {
        Side::Interior => (-1.0, 1.0),
        Side::Exterior => (1.0, -1.0),
    }
}

fn apply_local(m: &LocalMap, f: &Mv) -> Mv {
    let mut out = Mv::zero(Dim::Three);
    for i in 0..8 {
        out.set_coeff(i, (0..8).map(|j| m[i][j] * f.coeff(j)).sum());
    }
    out
}

/// T⁺S^∓N^±E^±S^∓ on the even block, assembled from a kernel.
pub(crate) fn spin_operator(kernel: &CauchyKernel3d, side: Side, part: Part) -> Result<ComplexOperator> {
    let surface = &kernel.surface;
    let (s_sign, e_sign) = side_signs(side);
    let normals: Vec<_> = surface.normals.iter().map(|n| normal_of(*n)).collect();
    let space = Space::of_surface(surface, Local::even(Dim::Three));
    let left = |i: usize| spin_left_map(&normals[i], s_sign, part);
    let right = |j: usize| s_map(&normals[j], s_sign);
    kernel.assemble(
        &space,
        constants::HARDY_HALF,
        constants::HARDY_HALF * e_sign,
        true,
        &left,
        &right,
        "spin",
    )
}

/// Solves T⁺S⁻N^±E_k⁺S⁻h = T⁺S⁻N^±g (interior) or T⁺S⁺N^±E_k⁻S⁺h = T⁺S⁺N^±g (exterior)
/// for even h; the data is taken through N^±, so only its N^± part matters.
pub fn solve_dirac_generic(
    surface: &Surface3D,
    k: WaveNumber<f64>,
    side: Side,
    part: Part,
    g: &[Mv],
) -> Result<DiracSolution> {
    if g.len() != surface.len() {
        return Err(Error::Dimension(format!("{} data values for {} panels", g.len(), surface.len())));
    }
    let kernel = CauchyKernel3d::new(surface, k)?;
    solve_with_kernel(&kernel, side, part, g)
}

fn solve_with_kernel(kernel: &CauchyKernel3d, side: Side, part: Part, g: &[Mv]) -> Result<DiracSolution> {
    let surface = &kernel.surface;
    let (s_sign, e_sign) = side_signs(side);
    let a = spin_operator(kernel, side, part)?;
    let normals: Vec<_> = surface.normals.iter().map(|n| normal_of(*n)).collect();
    let rhs = GridFunction::from_fn(Dim::Three, surface.len(), |i| {
        apply_local(&spin_left_map(&normals[i], s_sign, part), &g[i])
    });
    let (h, report) = solve_dense(&a, &rhs)?;
    let u: Vec<Mv> = h
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| apply_local(&s_map(&normals[i], s_sign), v))
        .collect();
    let eu = kernel.apply(&u)?;
    let trace = u
        .iter()
        .zip(&eu)
        .map(|(a, b)| (*a + b.scale_re(e_sign)).scale_re(constants::HARDY_HALF))
        .collect();
    Ok(DiracSolution {
        surface: surface.clone(),
        k: kernel.k,
        side,
        part,
        density: h.values,
        trace,
        report,
    })
}

/// Exterior perfect-conductor scattering: with g = −N⁺F⁰ for the incident F⁰, solves
/// ¼h − T⁺S⁺N⁺ ∫Ψ_k(y − x)(1 + ν)h dσ = 2T⁺S⁺g, i.e. T⁺S⁺N⁺E_k⁻S⁺h = T⁺S⁺g.
pub fn solve_maxwell_pec(
    surface: &Surface3D,
    k: WaveNumber<f64>,
    incident: &ElectromagneticField,
) -> Result<MaxwellSolution> {
    if k.is_zero() {
        return Err(Error::Invalid("the exterior Maxwell problem needs k != 0".into()));
    }
    incident.validate()?;
    let f0 = panel_average(surface, &|x| incident.multivector(x))?;
    let g: Vec<Mv> = f0.iter().map(|v| -*v).collect();
    let inner = solve_dirac_generic(surface, k, Side::Exterior, Part::Tangential, &g)?;
    Ok(MaxwellSolution {
        inner,
        incident_trace: f0,
    })
}

/// σ_min of both three-dimensional formulations at one wave number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceRow {
    pub k: f64,
    pub sigma_min_spin: f64,
    pub sigma_max_spin: f64,
    pub sigma_min_ansatz: f64,
    pub sigma_max_ansatz: f64,
}

/// Per-panel orthonormal basis {1, t1, t2, t1t2} of the tangential subspace N⁺.
fn tangential_basis(surface: &Surface3D) -> Local {
    let basis = surface
        .normals
        .iter()
        .map(|n| {
            let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            let t1 = cross(*n, helper);
            let t1 = t1.map(|c| c / norm(t1));
            let t2 = cross(*n, t1);
            let v1 = Mv::vector(Dim::Three, &t1);
            let v2 = Mv::vector(Dim::Three, &t2);
            vec![Mv::one(Dim::Three), v1, v2, v1.wedge(&v2)]
        })
        .collect();
    Local::Basis(Arc::new(basis))
}

/// The N-ansatz comparison system N⁺E_k⁻N⁺ on the tangential subspace.
pub(crate) fn ansatz_operator(kernel: &CauchyKernel3d) -> Result<ComplexOperator> {
    let surface = &kernel.surface;
    let normals: Vec<_> = surface.normals.iter().map(|n| normal_of(*n)).collect();
    let space = Space::of_surface(surface, tangential_basis(surface));
    let left = |i: usize| n_part_map(&normals[i], Part::Tangential);
    let id = identity_map();
    let right = |_| id;
    kernel.assemble(&space, constants::HARDY_HALF, -constants::HARDY_HALF, true, &left, &right, "N-ansatz")
}

fn extreme_sv(op: &ComplexOperator) -> Result<(f64, f64)> {
    let s = singular_values(&op.weighted_matrix())?;
    Ok((s[s.len() - 1], s[0]))
}

/// σ_min of the spin system and of the N-ansatz system over real wave numbers.
pub fn resonance_sweep(surface: &Surface3D, ks: &[f64]) -> Result<Vec<ResonanceRow>> {
    ks.iter()
        .map(|&k| {
            let kernel = CauchyKernel3d::new(surface, WaveNumber::real(k))?;
            let (smin_s, smax_s) = extreme_sv(&spin_operator(&kernel, Side::Exterior, Part::Tangential)?)?;
            let (smin_a, smax_a) = extreme_sv(&ansatz_operator(&kernel)?)?;
            Ok(ResonanceRow {
                k,
                sigma_min_spin: smin_s,
                sigma_max_spin: smax_s,
                sigma_min_ansatz: smin_a,
                sigma_max_ansatz: smax_a,
            })
        })
        .collect()
}

/// Orthonormal basis of the left ideal generated by (1 + e3)/2; E_k and S preserve it.
pub fn left_ideal_basis(nodes: usize) -> Local {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let b: Vec<Mv> = [
        Mv::blade(Dim::Three, &[]) + Mv::blade(Dim::Three, &[3]),
        Mv::blade(Dim::Three, &[1]) + Mv::blade(Dim::Three, &[1, 3]),
        Mv::blade(Dim::Three, &[2]) + Mv::blade(Dim::Three, &[2, 3]),
        Mv::blade(Dim::Three, &[1, 2]) + Mv::blade(Dim::Three, &[1, 2, 3]),
    ]
    .into_iter()
    .map(|m| m.scale_re(s))
    .collect();
    Local::Basis(Arc::new(vec![b; nodes]))
}

/// Discrete Calderón and skew-adjointness diagnostics on one mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalderonRow {
    pub mesh: String,
    pub nodes: usize,
    pub k: f64,
    /// ‖E² − I‖
    pub e2_minus_i: f64,
    /// ‖(ES)* + ES‖ / ‖ES‖
    pub skew_defect: f64,
}

/// ‖E² − I‖ and the skew defect of ES. Planar meshes require k = 0. Surfaces are
/// treated on a left ideal, where right multiplication by e1 shows the norms equal
/// those on the full algebra.
pub fn calderon_check(mesh: &Mesh, k: f64) -> Result<CalderonRow> {
    match mesh {
        Mesh::Curve(c) => {
            if k != 0.0 {
                return Err(Error::Invalid("planar operators are static (k = 0)".into()));
            }
            calderon_2d(c)
        }
        Mesh::Surface(s) => {
            let kernel = CauchyKernel3d::new(s, WaveNumber::real(k))?;
            let space = Space::of_surface(s, left_ideal_basis(s.len()));
            let e = kernel.cauchy(&space)?;
            let ee = e.compose(&e)?.try_sub(&ComplexOperator::identity(&space))?;
            Ok(CalderonRow {
                mesh: format!("{:?}", s.shape),
                nodes: s.len(),
                k,
                e2_minus_i: ee.norm()?,
                skew_defect: skew_3d(&kernel, &space)?,
            })
        }
    }
}

/// ‖(ES)* + ES‖ / ‖ES‖ alone, without forming E². Beyond the dense SVD size the
/// numerator is the Frobenius norm, so the value is an upper bound.
pub fn skew_defect(mesh: &Mesh, k: f64) -> Result<f64> {
    match mesh {
        Mesh::Curve(c) => Ok(calderon_check(&Mesh::Curve(c.clone()), k)?.skew_defect),
        Mesh::Surface(s) => {
            let kernel = CauchyKernel3d::new(s, WaveNumber::real(k))?;
            skew_3d(&kernel, &Space::of_surface(s, left_ideal_basis(s.len())))
        }
    }
}

fn skew_3d(kernel: &CauchyKernel3d, space: &Space) -> Result<f64> {
    let normals: Vec<_> = kernel.surface.normals.iter().map(|n| normal_of(*n)).collect();
    let id = identity_map();
    let right = |j: usize| reflection_map(Reflection::S, &normals[j]);
    let es = kernel.assemble(space, 0.0, 1.0, true, &|_| id, &right, "ES")?;
    let sum = es.adjoint()?.try_add(&es)?;
    // above the SVD limit the Frobenius norm bounds the 2-norm from above
    let top = if sum.size() <= SVD_LIMIT { sum.norm()? } else { sum.weighted_matrix().norm_l2() };
    Ok(top / es.norm()?)
}

fn calderon_2d(c: &Curve2D) -> Result<CalderonRow> {
    let e = assemble_e_2d(c)?;
    let ee = e.compose(&e)?.try_sub(&RealLinearOperator::identity(&e.space))?;
    let sop: RealLinearOperator = assemble_reflection(&Mesh::Curve(c.clone()), Reflection::S, &e.space)?;
    let es = e.compose(&sop)?;
    let skew = es.adjoint()?.try_add(&es)?.norm()? / es.norm()?;
    Ok(CalderonRow {
        mesh: format!("{:?}", c.shape),
        nodes: c.len(),
        k: 0.0,
        e2_minus_i: ee.norm()?,
        skew_defect: skew,
    })
}

/// ‖(E⁺ : S⁻ → E⁺)⁻¹‖ and ‖(E⁻ : S⁺ → E⁻)⁻¹‖ at one wave number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpaceRow {
    pub mesh: String,
    pub nodes: usize,
    pub k: f64,
    pub inv_norm_plus: f64,
    pub inv_norm_minus: f64,
}

/// Norms of the inverses of the Hardy projections restricted to the ranges of S^∓,
/// computed as 1/σ_min in orthonormal bases of the ranges.
pub fn half_space_inverse_norms(mesh: &Mesh, k: f64) -> Result<HalfSpaceRow> {
    let (nodes, row) = match mesh {
        Mesh::Curve(c) => {
            if k != 0.0 {
                return Err(Error::Invalid("planar operators are static (k = 0)".into()));
            }
            let e = assemble_e_2d(c)?;
            let id = RealLinearOperator::identity(&e.space);
            let sop: RealLinearOperator = assemble_reflection(mesh, Reflection::S, &e.space)?;
            let (sp, sm) = sop.projections();
            let ep = id.try_add(&e)?.scaled(0.5);
            let em = id.try_sub(&e)?.scaled(0.5);
            let plus = sigma_on_range(&ep, &sm)?;
            let minus = sigma_on_range(&em, &sp)?;
            (c.len(), (plus, minus))
        }
        Mesh::Surface(s) => {
            let kernel = CauchyKernel3d::new(s, WaveNumber::real(k))?;
            let space = Space::of_surface(s, left_ideal_basis(s.len()));
            let e = kernel.cauchy(&space)?;
            let id = ComplexOperator::identity(&space);
            let sop: ComplexOperator = assemble_reflection(mesh, Reflection::S, &space)?;
            let (sp, sm) = sop.projections();
            let ep = id.try_add(&e)?.scaled(0.5);
            let em = id.try_sub(&e)?.scaled(0.5);
            let plus = sigma_on_range(&ep, &sm)?;
            let minus = sigma_on_range(&em, &sp)?;
            (s.len(), (plus, minus))
        }
    };
    Ok(HalfSpaceRow {
        mesh: match mesh {
            Mesh::Curve(c) => format!("{:?}", c.shape),
            Mesh::Surface(s) => format!("{:?}", s.shape),
        },
        nodes,
        k,
        inv_norm_plus: row.0,
        inv_norm_minus: row.1,
    })
}

/// 1/σ_min of A on range(P), measured in the full space: σ_min(A U) for an orthonormal U.
fn sigma_on_range<T: Scalar>(a: &Operator<T>, p: &Operator<T>) -> Result<f64> {
    let m = restricted_operator(a, p, &Operator::identity(&a.space))?;
    norm_inverse(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_icosphere;
    use num_complex::Complex64 as C64;

    #[test]
    fn left_ideal_basis_is_orthonormal() {
        let Local::Basis(b) = left_ideal_basis(1) else { panic!("expected a basis") };
        for (i, u) in b[0].iter().enumerate() {
            for (j, v) in b[0].iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((u.inner(v).re - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn pec_rejects_static_and_zero_incident_is_trivial() {
        let s = make_icosphere(1.0, 0).unwrap();
        assert!(solve_maxwell_pec(&s, WaveNumber::real(0.0), &ElectromagneticField::Zero).is_err());
        let sol = solve_maxwell_pec(&s, WaveNumber::real(1.0), &ElectromagneticField::Zero).unwrap();
        assert!(sol.density().iter().all(|h| h.norm() == 0.0));
    }

    #[test]
    fn scattered_field_decays_like_inverse_distance() {
        let s = make_icosphere(1.0, 1).unwrap();
        let k = 1.5;
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let inc = ElectromagneticField::plane_wave([1.0, 0.0, 0.0], [zero, one, zero], C64::new(k, 0.0));
        let sol = solve_maxwell_pec(&s, WaveNumber::real(k), &inc).unwrap();
        let d = [0.3, 0.5, 0.81];
        let at = |r: f64| sol.scattered(d.map(|c| c * r)).unwrap().norm();
        let ratio = at(20.0) / at(40.0);
        assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn circle_calderon_and_half_space_norm() {
        let mesh = Mesh::Curve(crate::geometry::make_circle(1.0, 64).unwrap());
        let row = calderon_check(&mesh, 0.0).unwrap();
        assert!(row.e2_minus_i < 1e-10 && row.skew_defect < 1e-10);
        assert!(calderon_check(&mesh, 1.0).is_err());
        let h = half_space_inverse_norms(&mesh, 0.0).unwrap();
        assert!(h.inv_norm_plus <= 2.0 + 1e-8, "{h:?}");
    }
}
