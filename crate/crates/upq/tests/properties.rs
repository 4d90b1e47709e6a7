//! Property tests for the algebraic invariants that must hold on arbitrary
//! well-formed inputs, not just on the seeded samples of the unit tests.

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use upq::group::Signature;
use upq::iwasawa::{heis_mul, p_mul, s_act, HeisenbergElement, IwasawaElement, TriangularS};
use upq::matrix::CMatrix;

fn small(x: f64) -> f64 {
    // keep matrix entries in a numerically comfortable range
    1.5 * (x - 0.5)
}

fn arb_triangular(p: usize) -> impl Strategy<Value = TriangularS> {
    let sig = Signature::new(p, p + 1).unwrap();
    proptest::collection::vec(0.0f64..1.0, p * p).prop_map(move |coords| {
        let mut c: Vec<f64> = coords.iter().map(|x| small(*x)).collect();
        for d in c.iter_mut().take(p) {
            *d = d.abs().max(0.05) + 0.2;
        }
        TriangularS::from_coords(sig, &c)
    })
}

fn arb_heisenberg(p: usize) -> impl Strategy<Value = HeisenbergElement> {
    let sig = Signature::new(p, p + 1).unwrap();
    let n_len = 2 * p * p;
    let z_len = 2 * p;
    proptest::collection::vec(0.0f64..1.0, n_len + z_len).prop_map(move |v| {
        let a = CMatrix::from_fn(p, p, |i, j| {
            C64::new(small(v[2 * (i * p + j)]), small(v[2 * (i * p + j) + 1]))
        });
        let n = a.sub(&a.adjoint()).scale(C64::new(0.5, 0.0));
        let z = CMatrix::from_fn(p, 1, |i, _| {
            C64::new(small(v[n_len + 2 * i]), small(v[n_len + 2 * i + 1]))
        });
        HeisenbergElement::new(sig, n, z).unwrap()
    })
}

fn arb_iwasawa(p: usize) -> impl Strategy<Value = IwasawaElement> {
    (arb_triangular(p), arb_heisenberg(p))
        .prop_map(|(s, h)| IwasawaElement::new(s, h).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cholesky_round_trip(v in proptest::collection::vec(0.0f64..1.0, 18)) {
        let a = CMatrix::from_fn(3, 3, |i, j| {
            C64::new(small(v[2 * (3 * i + j)]), small(v[2 * (3 * i + j) + 1]))
        });
        // a a* + I is Hermitian positive definite
        let m = a.mul(&a.adjoint()).add(&CMatrix::identity(3));
        let l = m.cholesky_lower().unwrap();
        let back = l.mul(&l.adjoint());
        prop_assert!(back.sub(&m).frobenius_norm() < 1e-10 * m.frobenius_norm());
    }

    #[test]
    fn inverse_round_trip(v in proptest::collection::vec(0.0f64..1.0, 18)) {
        let a = CMatrix::from_fn(3, 3, |i, j| {
            C64::new(small(v[2 * (3 * i + j)]), small(v[2 * (3 * i + j) + 1]))
        }).add(&CMatrix::identity(3).scale(C64::new(3.0, 0.0)));
        let inv = a.inverse().unwrap();
        let dev = a.mul(&inv).sub(&CMatrix::identity(3)).frobenius_norm();
        prop_assert!(dev < 1e-10);
    }

    #[test]
    fn heisenberg_group_axioms(
        h1 in arb_heisenberg(2),
        h2 in arb_heisenberg(2),
        h3 in arb_heisenberg(2),
    ) {
        let l = heis_mul(&heis_mul(&h1, &h2).unwrap(), &h3).unwrap();
        let r = heis_mul(&h1, &heis_mul(&h2, &h3).unwrap()).unwrap();
        prop_assert!(l.n.sub(&r.n).max_abs() < 1e-12);
        prop_assert!(l.z.sub(&r.z).max_abs() < 1e-12);
        let e = heis_mul(&h1, &h1.inverse()).unwrap();
        prop_assert!(e.n.max_abs() < 1e-12 && e.z.max_abs() < 1e-12);
    }

    #[test]
    fn s_action_is_automorphism(
        s in arb_triangular(2),
        h1 in arb_heisenberg(2),
        h2 in arb_heisenberg(2),
    ) {
        let lhs = s_act(&s, &heis_mul(&h1, &h2).unwrap()).unwrap();
        let rhs = heis_mul(&s_act(&s, &h1).unwrap(), &s_act(&s, &h2).unwrap()).unwrap();
        prop_assert!(lhs.n.sub(&rhs.n).max_abs() < 1e-9);
        prop_assert!(lhs.z.sub(&rhs.z).max_abs() < 1e-9);
    }

    #[test]
    fn semidirect_product_axioms(
        a in arb_iwasawa(2),
        b in arb_iwasawa(2),
        c in arb_iwasawa(2),
    ) {
        let l = p_mul(&p_mul(&a, &b).unwrap(), &c).unwrap();
        let r = p_mul(&a, &p_mul(&b, &c).unwrap()).unwrap();
        prop_assert!(l.distance(&r) < 1e-8);
        let e = p_mul(&a, &a.inverse()).unwrap();
        prop_assert!(e.is_identity(1e-8));
    }

    #[test]
    fn embedding_is_homomorphism(a in arb_iwasawa(2), b in arb_iwasawa(2)) {
        let lhs = upq::iwasawa::embed(&p_mul(&a, &b).unwrap());
        let rhs = upq::iwasawa::embed(&a).mul(&upq::iwasawa::embed(&b));
        let rel = lhs.m.sub(&rhs.m).frobenius_norm() / rhs.m.frobenius_norm();
        prop_assert!(rel < 1e-9);
    }
}
