use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{constants, Part, Side};
use crate::clifford::{Dim, Multivector};
use crate::error::{Error, Result};
use crate::geometry::{make_corner_curve, Curve2D, Mesh};
use crate::kernels::psi2_static;
use crate::operators::{
    assemble_e_2d, assemble_k_2d, assemble_reflection, GridFunction, Reflection,
    RealLinearOperator,
};
use crate::solvers::{deflated_condition, pinv_solve, singular_values, solve_dense, SolveReport};

type Mv = Multivector<f64>;

const EVEN: [usize; 2] = [0, 3];
/// Relative cutoff of the truncated solves of the planar spin systems, which have
/// a kernel (constant bivector densities for the interior tangential problem).
const PINV_RTOL: f64 = 1e-10;
/// Minimum distance of evaluation points from the curve, in local node spacings.
const MIN_WIDTHS: f64 = 2.0;

fn vec2(z: C64) -> Mv {
    Mv::vector(Dim::Two, &[z.re, z.im])
}

/// Planar density solution and its boundary trace.
#[derive(Clone, Debug)]
pub struct Dirichlet2dSolution {
    pub curve: Curve2D,
    /// Spin: the even density h. Classical: the scalar double layer density f.
    pub density: GridFunction,
    /// Discrete boundary trace of the represented field.
    pub trace: GridFunction,
    pub side: Side,
    pub spin: bool,
    pub report: SolveReport,
}

impl Dirichlet2dSolution {
    /// The represented field at an off-boundary point.
    pub fn field(&self, z: C64) -> Result<Mv> {
        if self.spin {
            evaluate_field_2d(&self.curve, self.side, &self.density, z)
        } else {
            check_point(&self.curve, Side::Interior, z)?;
            Ok(cauchy_2d(&self.curve, &self.density.values, z))
        }
    }

    /// Harmonic function u = scalar part of the field.
    pub fn potential(&self, z: C64) -> Result<f64> {
        Ok(self.field(z)?.scalar_part().re)
    }
}

fn check_point(curve: &Curve2D, side: Side, z: C64) -> Result<()> {
    let widths = curve.distance_in_widths(z);
    if widths < MIN_WIDTHS {
        let d = curve.nodes.iter().map(|n| (n - z).norm()).fold(f64::INFINITY, f64::min);
        return Err(Error::TooClose([z.re, z.im, 0.0], d, d * MIN_WIDTHS / widths));
    }
    let inside = curve.winding_number(z).abs() > 0.5;
    if inside != (side == Side::Interior) {
        return Err(Error::Invalid(format!("point {z} is not on the {side:?} side")));
    }
    Ok(())
}

/// Σ_j Ψ₀(x_j − z) ν_j u_j w_j, trapezoidal.
fn cauchy_2d(curve: &Curve2D, u: &[Mv], z: C64) -> Mv {
    let mut out = Mv::zero(Dim::Two);
    for j in 0..curve.len() {
        let psi = psi2_static(curve.nodes[j] - z).expect("point off the curve");
        let k = vec2(psi).clifford(&vec2(curve.normals[j])).scale_re(curve.weights[j]);
        out = out + k.clifford(&u[j]);
    }
    out
}

/// Planar field of a spin density: interior C(S⁻h), exterior −C(S⁺h).
pub fn evaluate_field_2d(curve: &Curve2D, side: Side, density: &GridFunction, z: C64) -> Result<Mv> {
    if density.len() != curve.len() || density.dim != Dim::Two {
        return Err(Error::Dimension("density does not match the curve".into()));
    }
    check_point(curve, side, z)?;
    let s = -side.sign();
    let projected: Vec<Mv> = density
        .values
        .iter()
        .zip(&curve.normals)
        .map(|(h, n)| (*h + vec2(*n).clifford(h).scale_re(s)).scale_re(0.5))
        .collect();
    Ok(cauchy_2d(curve, &projected, z).scale_re(side.sign()))
}

struct PlaneOps {
    e: RealLinearOperator,
    s: (RealLinearOperator, RealLinearOperator),
    n: (RealLinearOperator, RealLinearOperator),
    t_plus: RealLinearOperator,
}

fn plane_ops(curve: &Curve2D) -> Result<PlaneOps> {
    let e = assemble_e_2d(curve)?;
    let mesh = Mesh::Curve(curve.clone());
    let refl = |w| assemble_reflection::<f64>(&mesh, w, &e.space);
    let s = refl(Reflection::S)?.projections();
    let n = refl(Reflection::N)?.projections();
    let t_plus = refl(Reflection::T)?.projections().0;
    Ok(PlaneOps { e, s, n, t_plus })
}

fn pick(pair: &(RealLinearOperator, RealLinearOperator), sign: f64) -> &RealLinearOperator {
    if sign > 0.0 {
        &pair.0
    } else {
        &pair.1
    }
}

/// 4·T⁺S^∓N^±E^±S^∓ on the full algebra, and the projections E^± and S^∓.
fn spin_system(ops: &PlaneOps, side: Side, part: Part) -> Result<(RealLinearOperator, RealLinearOperator, RealLinearOperator)> {
    let id = RealLinearOperator::identity(&ops.e.space);
    let ep = id.try_add(&ops.e.scaled(side.sign()))?.scaled(constants::HARDY_HALF);
    let s = pick(&ops.s, -side.sign()).clone();
    let n = pick(&ops.n, part.sign());
    let a = ops
        .t_plus
        .compose(&s)?
        .compose(n)?
        .compose(&ep)?
        .compose(&s)?
        .scaled(constants::DIRICHLET2D_OPERATOR_SCALE);
    Ok((a, ep, s))
}

/// Theorem-4.5-type planar Dirac problem at k = 0: solves T⁺S^∓N^±E^±S^∓ h = T⁺S^∓ g
/// for even h, with E^± on the requested side. Returns h and the trace f = E^±S^∓h.
pub fn solve_dirac_generic_2d(
    curve: &Curve2D,
    side: Side,
    part: Part,
    g: &GridFunction,
) -> Result<Dirichlet2dSolution> {
    curve.validate()?;
    if g.len() != curve.len() || g.dim != Dim::Two {
        return Err(Error::Dimension("data does not match the curve".into()));
    }
    let ops = plane_ops(curve)?;
    let (a, ep, s) = spin_system(&ops, side, part)?;
    let rhs_full = ops
        .t_plus
        .compose(&s)?
        .scaled(constants::DIRICHLET2D_OPERATOR_SCALE)
        .apply(g)?;
    let a_even = a.restrict_blades(&EVEN)?;
    let b = rhs_full.to_coords::<f64>(&a_even.space)?;
    let w = weights_sqrt(&a_even.space);
    let bw = Mat::from_fn(b.nrows(), 1, |i, _| b[(i, 0)] * w[i]);
    let (xw, report) = pinv_solve(&a_even.weighted_matrix(), &bw, PINV_RTOL)?;
    let x = Mat::from_fn(xw.nrows(), 1, |i, _| xw[(i, 0)] / w[i]);
    let h = GridFunction::from_coords::<f64>(&a_even.space, &x);
    let trace = ep.compose(&s)?.apply(&h)?;
    Ok(Dirichlet2dSolution {
        curve: curve.clone(),
        density: h,
        trace,
        side,
        spin: true,
        report,
    })
}

fn weights_sqrt(space: &crate::operators::Space) -> Vec<f64> {
    (0..space.size()).map(|i| space.weight_of(i).sqrt()).collect()
}

fn scalar_data(curve: &Curve2D, g: &[f64]) -> Result<GridFunction> {
    if g.len() != curve.len() {
        return Err(Error::Dimension(format!("{} data values for {} nodes", g.len(), curve.len())));
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::Invalid("non-finite boundary data".into()));
    }
    Ok(GridFunction::from_fn(Dim::Two, curve.len(), |i| {
        Mv::scalar(Dim::Two, C64::new(g[i], 0.0))
    }))
}

/// Interior Dirichlet problem through the spin system
/// 4·T⁺S⁻N⁺E⁺S⁻ h = 2g on the even block; u is the scalar part of C(S⁻h).
pub fn solve_dirichlet2d_spin(curve: &Curve2D, g: &[f64]) -> Result<Dirichlet2dSolution> {
    let data = scalar_data(curve, g)?;
    solve_dirac_generic_2d(curve, Side::Interior, Part::Tangential, &data)
}

/// Interior Dirichlet problem through the double layer equation (I + K) f = 2g;
/// u is the scalar part of C f.
pub fn solve_dirichlet2d_classical(curve: &Curve2D, g: &[f64]) -> Result<Dirichlet2dSolution> {
    curve.validate()?;
    let data = scalar_data(curve, g)?;
    let k = assemble_k_2d(curve)?;
    let a = RealLinearOperator::identity(&k.space).try_add(&k)?;
    let rhs = data.map(|_, v| v.scale_re(constants::CLASSICAL_DATA_SCALE));
    let (f, report) = solve_dense(&a, &rhs)?;
    let trace = a.apply(&f)?.map(|_, v| v.scale_re(0.5));
    Ok(Dirichlet2dSolution {
        curve: curve.clone(),
        density: f,
        trace,
        side: Side::Interior,
        spin: false,
        report,
    })
}

/// Condition numbers of both planar formulations on a lens with corner angle θ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerRow {
    pub theta: f64,
    pub nodes: usize,
    pub kappa_classical_raw: f64,
    pub kappa_classical: f64,
    pub kappa_spin_raw: f64,
    pub kappa_spin: f64,
    /// Deflated κ(I + K) over deflated κ(spin).
    pub ratio: f64,
}

/// Outlier singular values dropped from both ends of the comparison, one per corner node cluster.
pub const CORNER_DEFLATION: usize = 2;

/// κ(I + K) against κ of the interior spin system over corner angles.
pub fn corner_sweep(thetas: &[f64], nodes: usize, grading_q: f64) -> Result<Vec<CornerRow>> {
    thetas
        .iter()
        .map(|&theta| {
            let curve = make_corner_curve(theta, nodes, grading_q)?;
            let k = assemble_k_2d(&curve)?;
            let ik = RealLinearOperator::identity(&k.space).try_add(&k)?;
            let sc = singular_values(&ik.weighted_matrix())?;
            let ops = plane_ops(&curve)?;
            let (a, _, _) = spin_system(&ops, Side::Interior, Part::Tangential)?;
            let sv = singular_values(&a.restrict_blades(&EVEN)?.weighted_matrix())?;
            let kappa_classical = deflated_condition(&sc, CORNER_DEFLATION);
            let kappa_spin = deflated_condition(&sv, CORNER_DEFLATION);
            Ok(CornerRow {
                theta,
                nodes,
                kappa_classical_raw: deflated_condition(&sc, 0),
                kappa_classical,
                kappa_spin_raw: deflated_condition(&sv, 0),
                kappa_spin,
                ratio: kappa_classical / kappa_spin,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_circle, make_ellipse};

    fn re_z(curve: &Curve2D, p: u32) -> Vec<f64> {
        curve.nodes.iter().map(|z| z.powu(p).re).collect()
    }

    #[test]
    fn spin_reproduces_harmonic_polynomial_on_circle() {
        let c = make_circle(1.0, 128).unwrap();
        let sol = solve_dirichlet2d_spin(&c, &re_z(&c, 1)).unwrap();
        let err = c
            .nodes
            .iter()
            .zip(&sol.trace.values)
            .map(|(z, f)| (f.scalar_part().re - z.re).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "retrace {err:.2e}");
        for z in [C64::new(0.2, 0.1), C64::new(-0.4, 0.5)] {
            let u = sol.potential(z).unwrap();
            assert!((u - z.re).abs() < 1e-9, "{z}: {u}");
        }
        assert!(sol.field(C64::new(0.999, 0.0)).is_err());
        assert!(sol.field(C64::new(2.0, 0.0)).is_err());
    }

    #[test]
    fn constants_are_reproduced() {
        let c = make_ellipse(2.0, 1.0, 64).unwrap();
        let ones = vec![1.0; 64];
        for sol in [solve_dirichlet2d_spin(&c, &ones).unwrap(), solve_dirichlet2d_classical(&c, &ones).unwrap()] {
            let u = sol.potential(C64::new(0.3, 0.2)).unwrap();
            assert!((u - 1.0).abs() < 1e-10, "{u}");
        }
    }

    #[test]
    fn classical_matches_polynomial() {
        let c = make_ellipse(2.0, 1.0, 128).unwrap();
        let sol = solve_dirichlet2d_classical(&c, &re_z(&c, 3)).unwrap();
        let z = C64::new(0.5, -0.3);
        assert!((sol.potential(z).unwrap() - z.powu(3).re).abs() < 1e-8);
        assert!(sol.report.condition_estimate < 10.0);
    }
}
