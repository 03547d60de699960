use faer::{c64, Mat};
use pencilkit::dhcheck::{default_structure_tol, dh_common_kernel, verify_dh_structure};
use pencilkit::fixtures::random_dh_section;
use pencilkit::linalg::{self, CMat};
use pencilkit::opmodel::{Pencil, PencilAction, SpaceDescriptor, StructuredOperator, WeightRule};
use pencilkit::sections::{joint_kernel_defect, section, SectionedPencil};
use pencilkit::singpoly::{verify_singular_polynomial, Side, VectorPolynomial};
use pencilkit::SparseVec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cplx() -> impl Strategy<Value = c64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| c64::new(a, b))
}

fn dense(n: usize, m: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec(cplx(), n * m).prop_map(move |v| Mat::from_fn(n, m, |i, j| v[i * m + j]))
}

fn sparse_vec() -> impl Strategy<Value = SparseVec> {
    prop::collection::vec((-6i64..=6, cplx()), 0..6).prop_map(|v| v.into_iter().collect())
}

fn vec_in(space: SpaceDescriptor) -> impl Strategy<Value = SparseVec> {
    let lo = if space == SpaceDescriptor::L2N { 1 } else { -6 };
    prop::collection::vec((lo..=8i64, cplx()), 0..6).prop_map(|v| v.into_iter().collect())
}

fn weight() -> impl Strategy<Value = WeightRule> {
    prop_oneof![
        cplx().prop_map(WeightRule::Constant),
        Just(WeightRule::ReciprocalIndex),
        Just(WeightRule::FactorialRatio),
        Just(WeightRule::IndexPlusOne),
    ]
}

fn operator(space: SpaceDescriptor) -> impl Strategy<Value = StructuredOperator> {
    (weight(), -2i64..=2, any::<bool>()).prop_map(move |(w, off, diag)| {
        if diag {
            StructuredOperator::diagonal(space, w)
        } else {
            StructuredOperator::shift(space, off, w)
        }
    })
}

fn space() -> impl Strategy<Value = SpaceDescriptor> {
    prop_oneof![Just(SpaceDescriptor::L2N), Just(SpaceDescriptor::L2Z)]
}

fn pencil() -> impl Strategy<Value = Pencil> {
    space()
        .prop_flat_map(|s| (operator(s), operator(s)))
        .prop_map(|(e, a)| Pencil::new(e, a).unwrap())
}

/// A pencil with two vectors from its space.
fn pencil_and_vectors() -> impl Strategy<Value = (Pencil, SparseVec, SparseVec)> {
    space().prop_flat_map(|s| {
        (operator(s), operator(s), vec_in(s), vec_in(s))
            .prop_map(|(e, a, x, y)| (Pencil::new(e, a).unwrap(), x, y))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reversal_is_an_involution(p in pencil()) {
        prop_assert_eq!(p.reverse().reverse(), p);
    }

    #[test]
    fn reversal_swaps_operators((p, x, _y) in pencil_and_vectors(), l in cplx()) {
        let lhs = p.reverse().apply_pencil(l, &x).unwrap();
        let mut rhs = p.apply_a(&x).unwrap().scaled(l);
        rhs.axpy(c64::new(-1.0, 0.0), &p.apply_e(&x).unwrap());
        prop_assert!(lhs.sub(&rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn adjoint_is_the_inner_product_adjoint((p, x, y) in pencil_and_vectors()) {
        let adj = p.adjoint();
        let lhs = p.apply_e(&x).unwrap().inner(&y);
        let rhs = x.inner(&adj.apply_e(&y).unwrap());
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn section_of_adjoint_is_adjoint_of_section(p in pencil(), n in 1usize..6) {
        let s = section(&p, n).unwrap();
        let t = section(&p.adjoint(), n).unwrap();
        let ea = linalg::adjoint(s.e.as_ref());
        let aa = linalg::adjoint(s.a.as_ref());
        prop_assert!(linalg::approx_eq(t.e.as_ref(), ea.as_ref()) <= 1e-14);
        prop_assert!(linalg::approx_eq(t.a.as_ref(), aa.as_ref()) <= 1e-14);
    }

    #[test]
    fn json_round_trip(p in pencil()) {
        let text = p.to_json_string().unwrap();
        prop_assert_eq!(Pencil::from_json_str(&text).unwrap(), p);
    }

    #[test]
    fn stacked_bound_controls_every_point(e in dense(4, 4), a in dense(4, 4), l in cplx()) {
        // sigma_min(l E - A) <= sqrt(1 + |l|^2) sigma_min([A; E]).
        let s = SectionedPencil::from_matrices(e, a).unwrap();
        let d = joint_kernel_defect(&s).unwrap().value;
        let pt = linalg::sigma_min(s.at(l).as_ref()).unwrap();
        prop_assert!(pt <= (1.0 + l.norm_sqr()).sqrt() * d * (1.0 + 1e-10) + 1e-12);
    }

    #[test]
    fn sigma_min_is_lipschitz_in_lambda(e in dense(3, 3), a in dense(3, 3), l in cplx(), m in cplx()) {
        let s = SectionedPencil::from_matrices(e, a).unwrap();
        let ne = linalg::spectral_norm(s.e.as_ref()).unwrap();
        let x = linalg::sigma_min(s.at(l).as_ref()).unwrap();
        let y = linalg::sigma_min(s.at(m).as_ref()).unwrap();
        prop_assert!((x - y).abs() <= ne * (l - m).norm() + 1e-10);
    }

    #[test]
    fn polynomial_reversal_involution(cs in prop::collection::vec(sparse_vec(), 1..5)) {
        let q = VectorPolynomial::new(cs, SpaceDescriptor::L2Z);
        prop_assume!(!q.is_zero());
        prop_assume!(!q.coeffs[0].is_zero());
        prop_assert_eq!(q.reversed().reversed(), q);
    }

    #[test]
    fn gram_bound_on_norms(cs in prop::collection::vec(sparse_vec(), 1..5), l in cplx()) {
        let q = VectorPolynomial::new(cs, SpaceDescriptor::L2Z);
        prop_assume!(!q.is_zero());
        let g = pencilkit::approxsing::gram_matrix(&q);
        let xi = linalg::hermitian_eigenvalues(g.as_ref()).unwrap()[0];
        let weight: f64 = (0..q.coeffs.len()).map(|j| l.norm_sqr().powi(j as i32)).sum();
        prop_assert!(q.eval(l).norm_sqr() >= xi * weight - 1e-9 * (1.0 + weight * linalg::frobenius(g.as_ref())));
    }

    #[test]
    fn singular_residual_scales_linearly(k in 1usize..5, s in cplx()) {
        prop_assume!(s.norm() > 1e-3);
        let sin = SpaceDescriptor::Finite(k + 2);
        let p = Pencil::new(
            StructuredOperator::identity(sin),
            StructuredOperator::shift(sin, -1, WeightRule::one()),
        ).unwrap();
        let q = VectorPolynomial::new(vec![SparseVec::basis(1), SparseVec::basis(2)], sin);
        let probes = [c64::new(0.3, 0.1), c64::new(-1.0, 0.5), c64::new(2.0, 0.0)];
        let r = verify_singular_polynomial(&p, &q, Side::Right, &probes).unwrap();
        let qs = VectorPolynomial::new(q.coeffs.iter().map(|c| c.scaled(s)).collect(), sin);
        let rs = verify_singular_polynomial(&p, &qs, Side::Right, &probes).unwrap();
        prop_assert!((rs - s.norm() * r).abs() <= 1e-12 * (1.0 + rs));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_dh_sections_are_structured(seed in any::<u64>(), n in 2usize..9, kdim in 0usize..3) {
        prop_assume!(kdim < n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_dh_section(n, kdim, &mut rng).unwrap();
        let d = verify_dh_structure(&s, default_structure_tol(&s).unwrap()).unwrap();
        prop_assert!(d.ok());
        prop_assert_eq!(dh_common_kernel(&s, None).unwrap().dim, kdim);
    }
}
