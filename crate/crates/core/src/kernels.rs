//! Fundamental solutions of the Helmholtz and Dirac operators.

use std::fmt;

use num_complex::Complex;
use num_traits::{Float, FloatConst};
use serde::{Deserialize, Serialize};

use crate::clifford::{Dim, Multivector};
use crate::error::{Error, Result};

/// Complex wave number with Im k >= 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveNumber<T> {
    k: Complex<T>,
}

impl<T: Float> WaveNumber<T> {
    pub fn new(k: Complex<T>) -> Result<Self> {
        if !(k.im >= T::zero()) || !k.re.is_finite() {
            return Err(Error::Invalid(format!(
                "wave number must have Im k >= 0 (got Im k = {:?})",
                k.im.to_f64()
            )));
        }
        Ok(WaveNumber { k })
    }

    pub fn real(k: T) -> Self {
        WaveNumber {
            k: Complex::new(k, T::zero()),
        }
    }

    pub fn zero() -> Self {
        Self::real(T::zero())
    }

    pub fn value(&self) -> Complex<T> {
        self.k
    }

    pub fn is_zero(&self) -> bool {
        self.k.re == T::zero() && self.k.im == T::zero()
    }
}

fn radius<T: Float>(x: &[T; 3]) -> Result<T> {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if r == T::zero() {
        return Err(Error::Invalid("kernel evaluated at its singular point".into()));
    }
    Ok(r)
}

fn four_pi<T: Float + FloatConst>() -> T {
    T::PI() * T::from(4.0).unwrap()
}

/// Φ_k(x) = -e^{ik|x|} / (4π|x|).
pub fn phi3<T: Float + FloatConst>(k: WaveNumber<T>, x: [T; 3]) -> Result<Complex<T>> {
    let r = radius(&x)?;
    let ikr = Complex::new(T::zero(), T::one()) * k.k * r;
    Ok(-ikr.exp() / (four_pi::<T>() * r))
}

/// Ψ_k = (D - ik)Φ_k as (scalar part, vector part).
pub fn psi3_parts<T: Float + FloatConst>(
    k: WaveNumber<T>,
    x: [T; 3],
) -> Result<(Complex<T>, [Complex<T>; 3])> {
    let r = radius(&x)?;
    let i = Complex::new(T::zero(), T::one());
    let ik = i * k.k;
    let phi = -(ik * r).exp() / (four_pi::<T>() * r);
    let radial = (ik / r - Complex::new(T::one() / (r * r), T::zero())) * phi;
    Ok((
        -ik * phi,
        [radial * x[0], radial * x[1], radial * x[2]],
    ))
}

/// Ψ_k(x) = (-x/|x|² + ik(x/|x| - 1)) Φ_k(x).
pub fn psi3<T: Float + FloatConst + fmt::Debug>(
    k: WaveNumber<T>,
    x: [T; 3],
) -> Result<Multivector<T>> {
    let (s, v) = psi3_parts(k, x)?;
    let mut m = Multivector::scalar(Dim::Three, s);
    for (a, c) in v.iter().enumerate() {
        m.set_coeff(a + 1, *c);
    }
    Ok(m)
}

/// Static planar kernel Ψ_0(x) = x / (2π|x|²) = 1 / (2π x̄), vectors as complex numbers.
pub fn psi2_static<T: Float + FloatConst>(x: Complex<T>) -> Result<Complex<T>> {
    let r2 = x.norm_sqr();
    if r2 == T::zero() {
        return Err(Error::Invalid("kernel evaluated at its singular point".into()));
    }
    Ok(x / (T::PI() * (T::one() + T::one()) * r2))
}

/// The radiating Dirac solution x ↦ Ψ_k(source - x) · moment.
pub fn dipole_field<T: Float + FloatConst + fmt::Debug>(
    k: WaveNumber<T>,
    source: [T; 3],
    moment: Multivector<T>,
) -> impl Fn([T; 3]) -> Result<Multivector<T>> {
    move |x: [T; 3]| {
        let d = [source[0] - x[0], source[1] - x[1], source[2] - x[2]];
        Ok(psi3(k, d)?.clifford(&moment))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn phi_values() {
        let v = phi3(WaveNumber::zero(), [0.0, 1.0, 0.0]).unwrap();
        assert!((v.re + 1.0 / (4.0 * PI)).abs() < 1e-15);
        let v = phi3(WaveNumber::real(1.0), [1.0, 0.0, 0.0]).unwrap();
        let want = -Complex64::new(0.0, 1.0).exp() / (4.0 * PI);
        assert!((v - want).norm() < 1e-15);
        assert!(phi3(WaveNumber::<f64>::zero(), [0.0; 3]).is_err());
    }

    #[test]
    fn psi_static_value() {
        let m = psi3(WaveNumber::zero(), [2.0, 0.0, 0.0]).unwrap();
        assert!((m.coeff(1).re - 1.0 / (16.0 * PI)).abs() < 1e-16);
        assert_eq!(m.coeff(0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn psi2_values() {
        let v = psi2_static(Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.re - 1.0 / (2.0 * PI)).abs() < 1e-16);
        let v = psi2_static(Complex64::new(0.0, 1.0)).unwrap();
        assert!((v - Complex64::new(0.0, 1.0 / (2.0 * PI))).norm() < 1e-16);
    }

    #[test]
    fn rejects_negative_imaginary_part() {
        assert!(WaveNumber::new(Complex64::new(1.0, -0.1)).is_err());
    }
}
