use faer::Mat;

use super::{left_mul_map, put, Local, Operator, RealLinearOperator, Space};
use crate::clifford::{Dim, Multivector};
use crate::error::{Error, Result};
use crate::geometry::{Curve2D, Mesh};
use crate::kernels::psi2_static;

type Mv = Multivector<f64>;

/// Principal value rules for the planar Cauchy integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PvRule {
    /// Trapezoidal rule with target and sources on alternate nodes (odd index offsets),
    /// weights doubled. Spectrally accurate on smooth curves.
    Alternating,
    /// All sources except the target, with the constant density subtracted
    /// (E1 = 1 fixes the diagonal).
    Subtraction,
}

fn vec2(z: num_complex::Complex64) -> Mv {
    Mv::vector(Dim::Two, &[z.re, z.im])
}

/// Kernel multivector 2Ψ₀(x_j − x_i)ν_j (without the quadrature weight).
fn kernel(curve: &Curve2D, i: usize, j: usize) -> Result<Mv> {
    let psi = psi2_static(curve.nodes[j] - curve.nodes[i])?;
    Ok(vec2(psi).scale_re(2.0).clifford(&vec2(curve.normals[j])))
}

fn kernel_blocks(curve: &Curve2D, rule: PvRule) -> Result<Vec<Vec<Mv>>> {
    let m = curve.len();
    if m == 0 || !m.is_multiple_of(2) {
        return Err(Error::Mesh(format!("planar Cauchy operator needs an even node count, got {m}")));
    }
    let mut blocks = vec![vec![Mv::zero(Dim::Two); m]; m];
    for i in 0..m {
        let mut acc = Mv::zero(Dim::Two);
        for j in 0..m {
            if i == j {
                continue;
            }
            let w = match rule {
                PvRule::Alternating if (i + j) % 2 == 0 => continue,
                PvRule::Alternating => 2.0 * curve.weights[j],
                PvRule::Subtraction => curve.weights[j],
            };
            let k = kernel(curve, i, j)?.scale_re(w);
            acc = acc + k;
            blocks[i][j] = k;
        }
        if rule == PvRule::Subtraction {
            blocks[i][i] = Mv::one(Dim::Two) - acc;
        }
    }
    Ok(blocks)
}

/// Planar Cauchy singular integral operator on real multivector fields.
pub fn assemble_e_2d(curve: &Curve2D) -> Result<RealLinearOperator> {
    let rule = if curve.is_smooth() {
        PvRule::Alternating
    } else {
        PvRule::Subtraction
    };
    assemble_e_2d_with(curve, rule)
}

pub fn assemble_e_2d_with(curve: &Curve2D, rule: PvRule) -> Result<RealLinearOperator> {
    let blocks = kernel_blocks(curve, rule)?;
    let space = Space::new(&Mesh::Curve(curve.clone()), Local::all(Dim::Two));
    let m = curve.len();
    let mut mat = Mat::<f64>::zeros(4 * m, 4 * m);
    for (i, row) in blocks.iter().enumerate() {
        for (j, k) in row.iter().enumerate() {
            if k.coeffs().iter().all(|c| c.re == 0.0 && c.im == 0.0) {
                continue;
            }
            let l = left_mul_map(k);
            for a in 0..4 {
                for b in 0..4 {
                    put(&mut mat, &space, 4 * i + a, 4 * j + b, l[a][b]);
                }
            }
        }
    }
    Operator::new(mat, space, "E")
}

/// Double layer potential K, the scalar block of E on scalar fields. Its kernel is
/// smooth along each smooth arc, so the (graded) trapezoidal rule is used with the
/// curvature limit κ_i w_i / (2π) on the diagonal.
pub fn assemble_k_2d(curve: &Curve2D) -> Result<RealLinearOperator> {
    let m = curve.len();
    let space = Space::new(&Mesh::Curve(curve.clone()), Local::Blades(vec![0]));
    let mut mat = Mat::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            mat[(i, j)] = if i == j {
                curve.curvature[i] * curve.weights[i] / (2.0 * std::f64::consts::PI)
            } else {
                kernel(curve, i, j)?.scalar_part().re * curve.weights[j]
            };
        }
    }
    Operator::new(mat, space, "K")
}

/// Weighted transpose of K.
pub fn assemble_kstar_2d(curve: &Curve2D) -> Result<RealLinearOperator> {
    Ok(assemble_k_2d(curve)?.adjoint()?.relabel("K*"))
}
