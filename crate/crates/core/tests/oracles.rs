// Closed forms checked against quantities built independently of the
// library's section and fixture code.

use faer::{c64, Mat};
use pencilkit::fixtures::{
    approxchain_alpha, get_fixture, rescaled_polynomial_residual, FixtureParams, SingularFunction,
};
use pencilkit::linalg::{self, CMat};
use pencilkit::opmodel::PencilAction;
use pencilkit::sections::{joint_kernel_defect, section};
use pencilkit::SparseVec;

fn c(x: f64) -> c64 {
    c64::new(x, 0.0)
}

fn params() -> FixtureParams {
    FixtureParams::default()
}

/// Block n of the approximate chain written entry by entry (1-based).
fn hand_block(n: usize, alpha: f64) -> (CMat, CMat) {
    let d = 2 * n + 1;
    let mut e = Mat::<c64>::zeros(d, d);
    let mut a = Mat::<c64>::zeros(d, d);
    let set = |m: &mut CMat, row: usize, col: usize, v: f64| m[(row - 1, col - 1)] = c(v);
    for j in 1..=n {
        set(&mut e, n + 1 + j, j, 1.0);
        set(&mut e, j, n + 1 + j, 1.0);
        set(&mut a, n + 1 + j, 1 + j, 1.0);
        set(&mut a, 1 + j, n + 1 + j, 1.0);
    }
    set(&mut e, n + 1, n + 1, alpha);
    set(&mut a, 1, 1, alpha);
    (e, a)
}

#[test]
fn approxchain_section_matches_hand_blocks() {
    let f = get_fixture("approxchain", &FixtureParams { n: 3, ..params() }).unwrap();
    let s = section(f.pencil().unwrap(), 15).unwrap();
    let blocks: Vec<(CMat, CMat)> = (1..=3)
        .map(|n| hand_block(n, approxchain_alpha(n)))
        .collect();
    let e = linalg::block_diag(&blocks.iter().map(|b| b.0.as_ref()).collect::<Vec<_>>());
    let a = linalg::block_diag(&blocks.iter().map(|b| b.1.as_ref()).collect::<Vec<_>>());
    assert_eq!(linalg::approx_eq(s.e.as_ref(), e.as_ref()), 0.0);
    assert_eq!(linalg::approx_eq(s.a.as_ref(), a.as_ref()), 0.0);
}

#[test]
fn approxchain_residual_from_dense_blocks() {
    for n in 1..=5 {
        let alpha = approxchain_alpha(n);
        let (e, a) = hand_block(n, alpha);
        for l in [
            c(0.0),
            c(1.0),
            c(-1.0),
            c64::new(1.0, 1.0),
            c64::new(0.3, -2.0),
        ] {
            let mut p = vec![c(0.0); 2 * n + 1];
            let mut pw = c(1.0);
            for slot in p.iter_mut().take(n + 1) {
                *slot = pw;
                pw *= l;
            }
            let m = linalg::pencil_at(e.as_ref(), a.as_ref(), l);
            let r = linalg::vec_norm(&linalg::mat_vec(m.as_ref(), &p));
            let expected = alpha * (1.0 + l.norm().powi(2 * (n as i32 + 1))).sqrt();
            assert!(
                (r - expected).abs() <= 1e-13 * expected,
                "n={n} l={l}: {r} vs {expected}"
            );
        }
    }
}

#[test]
fn approxchain_block_window_stacked_sigma_is_near_one() {
    // The block-window distance does not shrink with alpha_n.
    for n in 1..=6 {
        let (e, a) = hand_block(n, approxchain_alpha(n));
        let stacked = linalg::vstack(&[a.as_ref(), e.as_ref()]);
        let sv = linalg::singular_values(stacked.as_ref()).unwrap();
        let lib = joint_kernel_defect(
            &pencilkit::sections::SectionedPencil::from_matrices(e.clone(), a.clone()).unwrap(),
        )
        .unwrap()
        .value;
        assert!((sv.last().unwrap() - lib).abs() < 1e-14);
        assert!(lib > 0.99 && lib > 2f64.sqrt() * approxchain_alpha(n));
    }
}

#[test]
fn rescaled_polynomial_residual_from_dense_blocks() {
    for n in 1..=5 {
        let d = 2 * n + 1;
        let s = 1.0 / n as f64;
        let mut e = Mat::<c64>::zeros(d, d);
        let mut a = Mat::<c64>::zeros(d, d);
        e[(0, 0)] = c(s);
        a[(n, n)] = c(s);
        for j in 1..=n {
            e[(j, n + j)] = c(s);
            e[(n + j, j)] = c(s);
            a[(j - 1, n + j)] = c(s);
            a[(n + j, j - 1)] = c(s);
        }
        for l in [c(0.5), c(2.0), c64::new(0.0, 1.0)] {
            let p: Vec<c64> = (0..d)
                .map(|j| if j <= n { l.powi(j as i32) } else { c(0.0) })
                .collect();
            let m = linalg::pencil_at(e.as_ref(), a.as_ref(), l);
            let r = linalg::vec_norm(&linalg::mat_vec(m.as_ref(), &p));
            let expected = rescaled_polynomial_residual(n, l);
            assert!(
                (r - expected).abs() <= 1e-13 * expected.max(1e-300),
                "n={n}: {r} vs {expected}"
            );
        }
    }
}

#[test]
fn diag_reciprocal_stacked_sigma_is_sqrt2_over_n() {
    let f = get_fixture("diag_reciprocal", &params()).unwrap();
    for n in [3usize, 7, 20] {
        let s = section(f.pencil().unwrap(), n).unwrap();
        let hand = Mat::<c64>::from_fn(2 * n, n, |i, j| {
            if i % n == j {
                c(1.0 / (j + 1) as f64)
            } else {
                c(0.0)
            }
        });
        let sv = linalg::singular_values(hand.as_ref()).unwrap();
        let v = joint_kernel_defect(&s).unwrap().value;
        assert!((v - sv[n - 1]).abs() < 1e-15);
        assert!((v - 2f64.sqrt() / n as f64).abs() < 1e-15);
        assert_eq!(
            joint_kernel_defect(&s).unwrap().witness_support_center(),
            n as f64
        );
    }
}

#[test]
fn tail_bounds_dominate_longer_truncations() {
    let ia = get_fixture("backward_shift_diag", &params()).unwrap();
    let ni = get_fixture("bilateral_weighted", &params()).unwrap();
    let cases = [
        (
            &ia,
            SingularFunction::BackwardShiftDiag,
            vec![c(1.0), c(-2.0), c64::new(0.0, 1.0)],
        ),
        (
            &ni,
            SingularFunction::BilateralWeighted,
            vec![c(2.0), c(-0.5), c64::new(0.0, 1.5)],
        ),
    ];
    for (f, sf, probes) in cases {
        let p = f.pencil().unwrap();
        for l in probes {
            let n = 12;
            let tail = sf.truncated(l, n + 60).sub(&sf.truncated(l, n));
            let r = p.apply_pencil(l, &tail).unwrap().norm();
            assert!(r <= sf.tail_bound(l, n) * (1.0 + 1e-12), "{sf:?} {l}");
        }
    }
}

#[test]
fn factorial_weights_by_recursion() {
    let f = get_fixture("bilateral_weighted", &params()).unwrap();
    let a = &f.pencil().unwrap().a;
    let mut fact = [1.0f64; 12];
    for k in 1..12 {
        fact[k] = fact[k - 1] * k as f64;
    }
    for j in -10i64..=10 {
        let w = a.apply_basis(j).unwrap().get(j - 1).re;
        let expected = fact[j.unsigned_abs() as usize] / fact[(j - 1).unsigned_abs() as usize];
        assert!((w - expected).abs() <= 1e-15 * expected, "j={j}");
    }
    assert!((a.apply_basis(-2).unwrap().get(-3).re - 1.0 / 3.0).abs() < 1e-16);
}

#[test]
fn shift_identity_residual_is_inverse_factorial() {
    let f = get_fixture("shift_identity", &params()).unwrap();
    let g = f.witnesses.generator.clone().unwrap();
    for m in [5usize, 10, 15] {
        for t in [0.5, 1.0, -0.7] {
            let tr = pencilkit::odae::series_solution(f.pencil().unwrap(), &g, &[t], m).unwrap();
            let oracle = (1..=m).fold(1.0f64, |acc, k| acc * t.abs() / k as f64);
            assert!((tr.residual_classical[0] - oracle).abs() <= 1e-12 * oracle);
        }
    }
}

#[test]
fn bilateral_shift_window_is_nilpotent() {
    let f = get_fixture("bilateral_shift", &params()).unwrap();
    let s = section(f.pencil().unwrap(), 3).unwrap();
    let hand = Mat::<c64>::from_fn(7, 7, |i, j| if i == j + 1 { c(1.0) } else { c(0.0) });
    assert_eq!(linalg::approx_eq(s.a.as_ref(), hand.as_ref()), 0.0);
    assert_eq!(s.window_in.indices(), (-3..=3).collect::<Vec<i64>>());
    let w = joint_kernel_defect(&s).unwrap().witness;
    assert!((w.norm() - 1.0).abs() < 1e-14 && (w.get(3).norm() - 1.0).abs() < 1e-14);
}

#[test]
fn stokes_kernel_is_constant_pressure() {
    let (e, j, r) = pencilkit::fixtures::stokes_matrices(5);
    let n = e.nrows();
    let x: Vec<c64> = (0..n)
        .map(|i| if i >= 4 { c(1.0) } else { c(0.0) })
        .collect();
    let b = &j - &r;
    assert_eq!(linalg::vec_norm(&linalg::mat_vec(e.as_ref(), &x)), 0.0);
    assert_eq!(linalg::vec_norm(&linalg::mat_vec(b.as_ref(), &x)), 0.0);
    let xs: SparseVec = x
        .iter()
        .enumerate()
        .map(|(i, z)| (i as i64 + 1, *z))
        .collect();
    assert_eq!(xs.len(), 5);
}
