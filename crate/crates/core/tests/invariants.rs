use num_complex::Complex64;
use proptest::prelude::*;
use spinbie::clifford::{
    normal_part, reflect_n, reflect_s, reflect_t, tangential_part, Dim, Multivector, UnitVector,
};
use spinbie::geometry::{make_circle, make_icosphere};
use spinbie::kernels::{phi3, WaveNumber};
use spinbie::mellin::Bicomplex;

fn coeffs(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), n)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn mv3() -> impl Strategy<Value = Multivector<f64>> {
    coeffs(8).prop_map(|c| Multivector::from_coeffs(Dim::Three, &c).unwrap())
}

fn mv2() -> impl Strategy<Value = Multivector<f64>> {
    coeffs(4).prop_map(|c| Multivector::from_coeffs(Dim::Two, &c).unwrap())
}

fn unit3() -> impl Strategy<Value = UnitVector<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("nonzero", |(x, y, z)| x * x + y * y + z * z > 1e-2)
        .prop_map(|(x, y, z)| UnitVector::normalized(Dim::Three, &[x, y, z]).unwrap())
}

fn close(a: &Multivector<f64>, b: &Multivector<f64>) -> bool {
    a.max_diff(b) < 1e-11
}

proptest! {
    #[test]
    fn clifford_product_is_associative(a in mv3(), b in mv3(), c in mv3()) {
        prop_assert!(close(&a.clifford(&b).clifford(&c), &a.clifford(&b.clifford(&c))));
    }

    #[test]
    fn planar_product_is_associative(a in mv2(), b in mv2(), c in mv2()) {
        prop_assert!(close(&a.clifford(&b).clifford(&c), &a.clifford(&b.clifford(&c))));
    }

    #[test]
    fn wedge_is_associative(a in mv3(), b in mv3(), c in mv3()) {
        prop_assert!(close(&a.wedge(&b).wedge(&c), &a.wedge(&b.wedge(&c))));
    }

    #[test]
    fn involutions_square_to_identity(a in mv3()) {
        prop_assert!(close(&a.involution().involution(), &a));
        prop_assert!(close(&a.reversion().reversion(), &a));
        prop_assert!(close(&a.conjugate().conjugate(), &a));
    }

    #[test]
    fn involution_is_multiplicative_and_reversion_antimultiplicative(a in mv3(), b in mv3()) {
        prop_assert!(close(&a.clifford(&b).involution(), &a.involution().clifford(&b.involution())));
        prop_assert!(close(&a.clifford(&b).reversion(), &b.reversion().clifford(&a.reversion())));
    }

    #[test]
    fn riesz_splits_vector_products(v in unit3(), w in mv3()) {
        let a = v.as_multivector();
        let (wedge, contract) = Multivector::riesz(a, &w);
        prop_assert!(close(&wedge, &a.wedge(&w)));
        prop_assert!(close(&contract, &a.lcontract(&w)));
        prop_assert!(close(&(wedge + contract), &a.clifford(&w)));
    }

    #[test]
    fn reflections_are_involutions(nu in unit3(), f in mv3()) {
        prop_assert!(close(&reflect_n(&nu, &reflect_n(&nu, &f)), &f));
        prop_assert!(close(&reflect_s(&nu, &reflect_s(&nu, &f)), &f));
        prop_assert!(close(&reflect_t(&reflect_t(&f)), &f));
    }

    #[test]
    fn normal_split_is_complementary(nu in unit3(), f in mv3()) {
        let t = tangential_part(&nu, &f);
        let n = normal_part(&nu, &f);
        prop_assert!(close(&(t + n), &f));
        prop_assert!(close(&tangential_part(&nu, &t), &t));
        prop_assert!(tangential_part(&nu, &n).norm() < 1e-11);
        prop_assert!(close(&reflect_n(&nu, &f), &(t - n)));
    }

    #[test]
    fn hodge_star_is_an_involution_in_three_dimensions(a in mv3()) {
        prop_assert!(close(&a.hodge_star().hodge_star(), &a));
    }

    #[test]
    fn phi3_is_radial_and_decays(
        k in 0.0..5.0f64,
        (x, y, z) in (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64),
        q in -1.0..1.0f64,
    ) {
        let r = (x * x + y * y + z * z).sqrt();
        prop_assume!(r > 1e-2);
        let k = WaveNumber::real(k);
        let p = phi3(k, [x, y, z]).unwrap();
        let m = phi3(k, [-x, -y, -z]).unwrap();
        prop_assert!((p - m).norm() < 1e-14 * p.norm().max(1.0));
        let rot = phi3(k, [r * q, r * (1.0 - q * q).sqrt(), 0.0]).unwrap();
        prop_assert!((p - rot).norm() < 1e-12 * p.norm());
        prop_assert!((p.norm() * 4.0 * std::f64::consts::PI * r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bicomplex_inverse(a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64, d in -2.0..2.0f64) {
        let x = Bicomplex::new(a, b, c, d);
        if let Some(inv) = x.inverse() {
            let e = x * inv - Bicomplex::one();
            prop_assert!(e.z().norm() + e.w().norm() < 1e-8 * (1.0 + x.z().norm() + x.w().norm()).powi(4));
        }
    }

    #[test]
    fn circles_have_unit_winding_and_full_turning(half in 4usize..100, r in 0.1..10.0f64) {
        let m = 2 * half;
        let c = make_circle(r, m).unwrap();
        prop_assert!((c.winding_number(Complex64::new(0.0, 0.0)) - 1.0).abs() < 1e-9);
        prop_assert!((c.total_turning() - 2.0 * std::f64::consts::PI).abs() < 1e-9);
        prop_assert!((c.length() - 2.0 * std::f64::consts::PI * r).abs() < 1e-6 * r);
    }
}

#[test]
fn icosphere_refinement_converges_to_the_ball() {
    let mut prev = f64::INFINITY;
    for s in 0..4 {
        let m = make_icosphere(1.0, s).unwrap();
        let err = (m.signed_volume() - 4.0 / 3.0 * std::f64::consts::PI).abs();
        assert!(err < prev, "subdivision {s}: {err} >= {prev}");
        prev = err;
    }
}
