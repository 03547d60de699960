//! Named example pencils with their expected verdicts and witnesses, plus
//! the check suite each one runs.

use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::approxsing::{
    approx_kernel_sequence, converges, gram_lower_bound, sequence_residuals, PolynomialSequence,
};
use crate::dhcheck::{
    default_probes, dh_classify, dh_common_kernel, dh_kernel_ejr, verify_dh_structure, DHStructure,
    DhClassification, DhTolerances,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMat};
use crate::odae::{
    mild_residual, polynomial_solution, power_balance_residual, reference_trajectory,
    series_solution, uniqueness_demo, ChainGenerator, Curve, Trajectory, UniquenessReport,
};
use crate::opmodel::{
    direct_sum, OpExpr, Pencil, PencilAction, SpaceDescriptor, StructuredOperator, WeightRule,
};
use crate::report::fmt_num;
use crate::sections::{
    distance_to_singularity_bound, joint_kernel_defect, section, SectionedDh, SectionedPencil,
    SECTION_CAVEAT,
};
use crate::singpoly::{
    certifying_probes, chain_to_polynomial, extract_right_chain, polynomial_roots_check,
    reduce_polynomial, verify_singular_polynomial, Side, VectorPolynomial,
};
use crate::spectra::{
    classify_point, regularity_disc, spectra_grid, Lambda, Rect, Tolerances, Verdict,
};
use crate::vector::SparseVec;

fn c(x: f64) -> c64 {
    c64::new(x, 0.0)
}

fn ci(re: f64, im: f64) -> c64 {
    c64::new(re, im)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixtureParams {
    /// Kronecker block index.
    pub k: usize,
    /// Section size or number of blocks, depending on the fixture.
    pub n: usize,
    /// Shifts for `shift_adjoint_sum`, `alpha_n` for `approxchain`.
    pub alphas: Option<Vec<c64>>,
    pub seed: u64,
    /// Engineer a kernel vector in the pressure block of
    /// `poroelasticity_template`.
    pub singular_pressure: bool,
}

impl Default for FixtureParams {
    fn default() -> Self {
        Self {
            k: 2,
            n: 8,
            alphas: None,
            seed: 0,
            singular_pressure: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Expected {
    pub concept: &'static str,
    pub value: String,
}

fn expect(concept: &'static str, value: impl Into<String>) -> Expected {
    Expected {
        concept,
        value: value.into(),
    }
}

/// Closed-form singular functions carried by fixtures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularFunction {
    /// `x(lambda) = sum_{j>=1} lambda^j / (j-1)! e_j` for
    /// `E = diag(1/j)`, `A` the backward shift.
    BackwardShiftDiag,
    /// `x(lambda) = sum_{j in Z} lambda^j / |j|! e_j` for `E = I`,
    /// `A e_j = |j|!/|j-1|! e_{j-1}`; undefined at 0.
    BilateralWeighted,
}

impl SingularFunction {
    /// `BackwardShiftDiag` vanishes at 0, which the nonvanishing
    /// convention excludes; `BilateralWeighted` diverges there.
    pub fn excluded(&self, l: c64) -> bool {
        l == c(0.0)
    }

    /// Truncation `sum_{j=1}^N` or `sum_{|j|<=N}`.
    pub fn truncated(&self, l: c64, n: usize) -> SparseVec {
        let mut v = SparseVec::new();
        match self {
            Self::BackwardShiftDiag => {
                let mut w = l;
                for j in 1..=n {
                    if j > 1 {
                        w *= l / (j - 1) as f64;
                    }
                    v.add_at(j as i64, w);
                }
            }
            Self::BilateralWeighted => {
                let (mut up, mut down) = (c(1.0), c(1.0));
                v.add_at(0, c(1.0));
                for j in 1..=n {
                    up *= l / j as f64;
                    down *= l.inv() / j as f64;
                    v.add_at(j as i64, up);
                    v.add_at(-(j as i64), down);
                }
            }
        }
        v
    }

    /// Bound on `||(lambda E - A)(x - x_N)||` from the termwise series of
    /// the discarded tail.
    pub fn tail_bound(&self, l: c64, n: usize) -> f64 {
        let r = l.norm();
        let mut total = 0.0;
        match self {
            Self::BackwardShiftDiag => {
                // |l|^j/(j-1)! (|l|/j + 1) for j > N.
                let mut w = r;
                for j in 2..=n + 1 {
                    w *= r / (j - 1) as f64;
                }
                let mut j = n + 1;
                loop {
                    let term = w * (r / j as f64 + 1.0);
                    total += term;
                    if term <= total * 1e-18 || j > n + 2000 {
                        break;
                    }
                    w *= r / j as f64;
                    j += 1;
                }
            }
            Self::BilateralWeighted => {
                // j > N: |l|^j/j! (|l| + j); j < -N: |l|^-m/m! (|l| + 1/(m+1)).
                let (mut up, mut down) = (1.0, 1.0);
                for j in 1..=n {
                    up *= r / j as f64;
                    down /= r * j as f64;
                }
                let mut m = n + 1;
                loop {
                    up *= r / m as f64;
                    down /= r * m as f64;
                    let term = up * (r + m as f64) + down * (r + 1.0 / (m as f64 + 1.0));
                    total += term;
                    if term <= total * 1e-18 || m > n + 2000 {
                        break;
                    }
                    m += 1;
                }
            }
        }
        total
    }

    /// Exact residual norm of the truncation.
    pub fn closed_form_residual(&self, l: c64, n: usize) -> f64 {
        let r = l.norm();
        let mut inv_fact = 1.0;
        for k in 1..=n {
            inv_fact /= k as f64;
        }
        match self {
            // lambda^{N+1}/N! e_N.
            Self::BackwardShiftDiag => r.powi(n as i32 + 1) * inv_fact,
            // lambda^{N+1}/N! e_N - lambda^{-N}/(N+1)! e_{-N-1}.
            Self::BilateralWeighted => {
                let a = r.powi(n as i32 + 1) * inv_fact;
                let b = r.powi(-(n as i32)) * inv_fact / (n as f64 + 1.0);
                a.hypot(b)
            }
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Witnesses {
    pub polynomial: Option<VectorPolynomial>,
    pub sequence: Option<PolynomialSequence>,
    pub generator: Option<ChainGenerator>,
    pub singular_function: Option<SingularFunction>,
    /// `n -> x_n` with `E x_n, A x_n -> 0`.
    pub joint_kernel: Option<Vec<(usize, SparseVec)>>,
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub summary: &'static str,
    /// `None` for caveat-only entries.
    pub pencil: Option<Pencil>,
    /// dH casting when the plain pencil is not of dH form.
    pub dh_variant: Option<Pencil>,
    pub expected: Vec<Expected>,
    pub notes: Vec<String>,
    pub witnesses: Witnesses,
    pub default_window: usize,
}

impl Fixture {
    fn new(name: &'static str, summary: &'static str, pencil: Option<Pencil>) -> Self {
        Self {
            name,
            summary,
            pencil,
            dh_variant: None,
            expected: Vec::new(),
            notes: Vec::new(),
            witnesses: Witnesses::default(),
            default_window: 8,
        }
    }

    pub fn pencil(&self) -> Result<&Pencil> {
        self.pencil.as_ref().ok_or_else(|| {
            invalid(format!(
                "`{}` is a caveat-only entry without a pencil",
                self.name
            ))
        })
    }
}

pub const REGISTRY: [(&str, &str); 17] = [
    (
        "kronecker_L",
        "singular Kronecker block L_k: lambda [I 0] - [0 I]",
    ),
    (
        "stokes_skeleton",
        "algebraic toy of the instationary Stokes dH operators; pressure kernel",
    ),
    (
        "poroelasticity_template",
        "three-field dH block template with random SPD blocks",
    ),
    (
        "mult_by_E",
        "lambda E - E with E = diag(1/j): approximate but no point singularity at 2",
    ),
    (
        "symmetric_not_sa_note",
        "symmetric, not selfadjoint operator pencil (caveat only)",
    ),
    (
        "shift_adjoint_sum",
        "orthogonal sum of backward shifts plus alpha_n I",
    ),
    (
        "backward_shift_diag",
        "E = diag(1/j), A backward shift; entire singular function",
    ),
    (
        "bilateral_weighted",
        "lambda I - A on l2(Z), A e_j = |j|!/|j-1|! e_(j-1); Laurent singular function",
    ),
    (
        "non4_sum",
        "(lambda I - A) + (lambda A - I) on l2(Z) + l2(Z)",
    ),
    (
        "diag_reciprocal",
        "E = A = diag(1/j): approximate joint kernel, unique ODAE solutions",
    ),
    (
        "approxchain",
        "orthogonal sum of (2n+1)-blocks with approximate singular polynomials",
    ),
    (
        "rescaled_approxchain",
        "the 1/n-scaled block variant with a constant approximate sequence",
    ),
    (
        "gram_counterexample",
        "root-free polynomial e1 + (l + l^2) e2 + l^3 e3 with singular Gram matrix",
    ),
    (
        "revdegenerate",
        "p_n = e1 + l^n/n! e2: reversal values collapse inside the unit disc",
    ),
    (
        "facfac",
        "E backward shift, A = diag(j+1), a_k = k! e_k: factorial series on |t| < 1/e",
    ),
    (
        "shift_identity",
        "E backward shift, A = I: nonzero solution with f(0) = 0 at a regular pencil",
    ),
    (
        "bilateral_shift",
        "lambda T - T with T the bilateral shift: section-level kernel artifact",
    ),
];

pub fn fixture_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|r| r.0).collect()
}

fn mat_rows(m: &CMat) -> Vec<Vec<c64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn dense_op(m: &CMat) -> Result<StructuredOperator> {
    StructuredOperator::dense(mat_rows(m))
}

pub fn dense_pencil(e: &CMat, a: &CMat) -> Result<Pencil> {
    Pencil::new(dense_op(e)?, dense_op(a)?)
}

/// `lambda E - (J - R)` with `Q = I`.
pub fn dense_dh_pencil(e: &CMat, j: &CMat, r: &CMat) -> Result<Pencil> {
    let a = j - r;
    let q = StructuredOperator::identity(SpaceDescriptor::finite(e.ncols())?);
    let dh = DHStructure::from_split(dense_op(j)?, dense_op(r)?, q)?;
    dense_pencil(e, &a)?.with_dh(dh)
}

/// Dense dH section `lambda E - (J - R)` with `Q = I`.
pub fn dh_section(e: CMat, j: CMat, r: CMat) -> Result<SectionedPencil> {
    let n = e.ncols();
    let b = &j - &r;
    SectionedPencil::from_matrices(e, b.clone())?.with_dh(SectionedDh {
        b,
        q: linalg::identity(n),
        j: Some(j),
        r: Some(r),
        q_is_identity: true,
    })
}

fn kronecker_l(k: usize) -> Result<Fixture> {
    if k == 0 {
        return Err(invalid("kronecker_L needs k >= 1"));
    }
    let sin = SpaceDescriptor::finite(k + 1)?;
    let sout = SpaceDescriptor::finite(k)?;
    let e = StructuredOperator::new(
        sin,
        sout,
        OpExpr::Diagonal {
            weights: WeightRule::one(),
        },
    )?;
    let a = StructuredOperator::new(
        sin,
        sout,
        OpExpr::Shift {
            offset: -1,
            weights: WeightRule::one(),
        },
    )?;
    let mut f = Fixture::new("kronecker_L", REGISTRY[0].1, Some(Pencil::new(e, a)?));
    f.witnesses.polynomial = Some(VectorPolynomial::new(
        (0..=k as i64).map(|j| SparseVec::basis(j + 1)).collect(),
        sin,
    ));
    f.expected = vec![
        expect("right_minimal_index", k.to_string()),
        expect("right_singular_polynomial", "sum_j lambda^j e_(j+1)"),
        expect("spectra_grid", "point_singular everywhere"),
    ];
    f.default_window = k + 1;
    Ok(f)
}

fn gradient(m: usize) -> CMat {
    // (m-1) x m forward differences; the constant vector is its kernel.
    Mat::from_fn(m - 1, m, |i, j| {
        if j == i {
            c(-1.0)
        } else if j == i + 1 {
            c(1.0)
        } else {
            c(0.0)
        }
    })
}

fn laplacian(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| {
        if i == j {
            c(2.0)
        } else if i.abs_diff(j) == 1 {
            c(-1.0)
        } else {
            c(0.0)
        }
    })
}

pub fn stokes_matrices(m: usize) -> (CMat, CMat, CMat) {
    let nv = m - 1;
    let n = nv + m;
    let g = gradient(m);
    let l = laplacian(nv);
    let e = Mat::from_fn(n, n, |i, j| if i == j && i < nv { c(1.0) } else { c(0.0) });
    let j = Mat::from_fn(n, n, |i, jj| {
        if i < nv && jj >= nv {
            -g[(i, jj - nv)]
        } else if i >= nv && jj < nv {
            g[(jj, i - nv)].conj()
        } else {
            c(0.0)
        }
    });
    let r = Mat::from_fn(n, n, |i, jj| {
        if i < nv && jj < nv {
            l[(i, jj)]
        } else {
            c(0.0)
        }
    });
    (e, j, r)
}

fn stokes_skeleton(m: usize) -> Result<Fixture> {
    if m < 2 {
        return Err(invalid(
            "stokes_skeleton needs at least 2 pressure unknowns",
        ));
    }
    let (e, j, r) = stokes_matrices(m);
    let mut f = Fixture::new(
        "stokes_skeleton",
        REGISTRY[1].1,
        Some(dense_dh_pencil(&e, &j, &r)?),
    );
    f.expected = vec![
        expect("common_kernel_dim", "1"),
        expect("kernel_direction", "constant pressure"),
        expect("dh_classification", "point_singular"),
        expect("uniqueness", "non-unique (kernel drift)"),
    ];
    f.notes
        .push("algebraic skeleton only; no PDE discretization".into());
    f.default_window = 2 * m - 1;
    Ok(f)
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    Mat::from_fn(rows, cols, |_, _| {
        ci(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// `X X* / n + shift I`.
fn random_spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> CMat {
    let x = random_matrix(rng, n, n);
    let mut s = &x * x.adjoint();
    for i in 0..n {
        for jj in 0..n {
            s[(i, jj)] /= n as f64;
        }
        s[(i, i)] += c(shift);
    }
    linalg::hermitian_part(s.as_ref())
}

/// `I - v v*` for a unit vector `v`.
fn projector_off(v: &[c64]) -> CMat {
    Mat::from_fn(v.len(), v.len(), |i, j| {
        let d = if i == j { c(1.0) } else { c(0.0) };
        d - v[i] * v[j].conj()
    })
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<c64> {
    let v: Vec<c64> = (0..n)
        .map(|_| ci(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let nrm = linalg::vec_norm(&v);
    v.into_iter().map(|z| z / nrm).collect()
}

pub struct PoroBlocks {
    pub e: CMat,
    pub j: CMat,
    pub r: CMat,
    /// Engineered kernel vector over the full space.
    pub kernel: Option<Vec<c64>>,
    pub sizes: (usize, usize),
}

/// `E = diag(Y, A0, M)`, `J = [[0, -A0, D*], [A0, 0, 0], [-D, 0, 0]]`,
/// `R = diag(0, 0, K)`.
pub fn poroelasticity_blocks(
    d: usize,
    dp: usize,
    seed: u64,
    singular_pressure: bool,
) -> PoroBlocks {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = random_spd(&mut rng, d, 0.5);
    let a0 = random_spd(&mut rng, d, 0.5);
    let mut m = random_spd(&mut rng, dp, 0.5);
    let mut k = random_spd(&mut rng, dp, 0.1);
    let mut dm = random_matrix(&mut rng, dp, d);
    let mut kernel = None;
    if singular_pressure {
        let p = random_unit(&mut rng, dp);
        let proj = projector_off(&p);
        m = linalg::hermitian_part((&proj * &m * &proj).as_ref());
        k = linalg::hermitian_part((&proj * &k * &proj).as_ref());
        dm = &proj * &dm;
        let mut full = vec![c(0.0); 2 * d + dp];
        full[2 * d..].copy_from_slice(&p);
        kernel = Some(full);
    }
    let n = 2 * d + dp;
    let zero = linalg::zeros(d, d);
    let e = linalg::block_diag(&[y.as_ref(), a0.as_ref(), m.as_ref()]);
    let mut j = linalg::zeros(n, n);
    for r0 in 0..d {
        for c0 in 0..d {
            j[(r0, d + c0)] = -a0[(r0, c0)];
            j[(d + r0, c0)] = a0[(r0, c0)];
        }
        for c0 in 0..dp {
            j[(r0, 2 * d + c0)] = dm[(c0, r0)].conj();
            j[(2 * d + c0, r0)] = -dm[(c0, r0)];
        }
    }
    let r = linalg::block_diag(&[zero.as_ref(), zero.as_ref(), k.as_ref()]);
    PoroBlocks {
        e,
        j,
        r,
        kernel,
        sizes: (d, dp),
    }
}

fn poroelasticity(params: &FixtureParams) -> Result<Fixture> {
    let b = poroelasticity_blocks(3, 3, params.seed, params.singular_pressure);
    let mut f = Fixture::new(
        "poroelasticity_template",
        REGISTRY[2].1,
        Some(dense_dh_pencil(&b.e, &b.j, &b.r)?),
    );
    if let Some(v) = &b.kernel {
        let sv: SparseVec = v
            .iter()
            .enumerate()
            .map(|(i, z)| (i as i64 + 1, *z))
            .collect();
        f.witnesses.polynomial = Some(VectorPolynomial::constant(
            sv,
            SpaceDescriptor::Finite(v.len()),
        ));
        f.expected = vec![
            expect("dh_structure", "ok"),
            expect("dh_classification", "point_singular"),
            expect(
                "right_singular_polynomial",
                "constant, supported in the pressure block",
            ),
        ];
    } else {
        f.expected = vec![
            expect("dh_structure", "ok"),
            expect("dh_classification", "regular_candidate"),
            expect(
                "power_balance",
                "residual <= 1e-6 on [0, 2], Hamiltonian nonincreasing",
            ),
        ];
    }
    f.notes
        .push(format!("random SPD blocks from seed {}", params.seed));
    f.default_window = 9;
    Ok(f)
}

fn diag_recip() -> StructuredOperator {
    StructuredOperator::diagonal(SpaceDescriptor::L2N, WeightRule::ReciprocalIndex)
}

fn mult_by_e() -> Result<Fixture> {
    let mut f = Fixture::new(
        "mult_by_E",
        REGISTRY[3].1,
        Some(Pencil::new(diag_recip(), diag_recip())?),
    );
    f.expected = vec![
        expect("sigma_min_at_2", "1/n on window n, positive for every n"),
        expect("point_singularity_at_2", "none (E has trivial kernel)"),
    ];
    f.notes.push(SECTION_CAVEAT.into());
    Ok(f)
}

fn symmetric_note() -> Fixture {
    let mut f = Fixture::new("symmetric_not_sa_note", REGISTRY[4].1, None);
    f.notes.push(
        "a symmetric operator that is not selfadjoint has spectrum C without approximate spectrum C; \
         no finite section represents this, so nothing is constructed"
            .into(),
    );
    f.expected = vec![expect("construction", "none (caveat-only)")];
    f
}

fn shift_adjoint_sum(alphas: &[c64]) -> Result<Fixture> {
    if alphas.is_empty() {
        return Err(invalid("shift_adjoint_sum needs at least one alpha"));
    }
    let n = SpaceDescriptor::L2N;
    let one = SpaceDescriptor::Finite(1);
    let mut parts = vec![Pencil::new(
        StructuredOperator::zero(one, one),
        StructuredOperator::identity(one),
    )?];
    for a in alphas {
        parts.push(Pencil::new(
            StructuredOperator::identity(n),
            StructuredOperator::sum(vec![
                StructuredOperator::shift(n, -1, WeightRule::one()),
                StructuredOperator::scale(*a, StructuredOperator::identity(n)),
            ])?,
        )?);
    }
    let mut f = Fixture::new(
        "shift_adjoint_sum",
        REGISTRY[5].1,
        Some(direct_sum(&parts)?),
    );
    f.expected = vec![
        expect(
            "block_section_eigenvalues",
            "alpha_n, inside alpha_n + unit disc",
        ),
        expect(
            "point_singular",
            "alpha_n + mu for |mu| < 1 (eigenvector sum mu^(j-1) e_j)",
        ),
    ];
    f.notes.push(
        "combined index: C summand first, then the l2(N) summands interleaved round-robin".into(),
    );
    f.notes.push(SECTION_CAVEAT.into());
    Ok(f)
}

fn default_alphas() -> Vec<c64> {
    vec![c(0.0), c(1.5), c(-1.5), ci(0.0, 1.5), ci(0.0, -1.5)]
}

fn backward_shift_diag() -> Result<Fixture> {
    let a = StructuredOperator::shift(SpaceDescriptor::L2N, -1, WeightRule::one());
    let mut f = Fixture::new(
        "backward_shift_diag",
        REGISTRY[6].1,
        Some(Pencil::new(diag_recip(), a)?),
    );
    f.witnesses.singular_function = Some(SingularFunction::BackwardShiftDiag);
    f.expected = vec![
        expect(
            "singular_function",
            "sum lambda^j/(j-1)! e_j, residual <= tail bound",
        ),
        expect("excluded_probe", "0"),
    ];
    Ok(f)
}

fn weighted_bilateral() -> StructuredOperator {
    StructuredOperator::shift(SpaceDescriptor::L2Z, -1, WeightRule::FactorialRatio)
}

fn bilateral_weighted() -> Result<Fixture> {
    let z = SpaceDescriptor::L2Z;
    let mut f = Fixture::new(
        "bilateral_weighted",
        REGISTRY[7].1,
        Some(Pencil::new(
            StructuredOperator::identity(z),
            weighted_bilateral(),
        )?),
    );
    f.witnesses.singular_function = Some(SingularFunction::BilateralWeighted);
    f.expected = vec![
        expect(
            "singular_function",
            "sum lambda^j/|j|! e_j, residual <= two-sided tail bound",
        ),
        expect("excluded_probe", "0"),
    ];
    f.notes.push(
        "having a singular function does not make the reversal singular at 0; no claim at infinity"
            .into(),
    );
    Ok(f)
}

fn non4_sum() -> Result<Fixture> {
    let z = SpaceDescriptor::L2Z;
    let first = Pencil::new(StructuredOperator::identity(z), weighted_bilateral())?;
    let second = Pencil::new(weighted_bilateral(), StructuredOperator::identity(z))?;
    let mut f = Fixture::new(
        "non4_sum",
        REGISTRY[8].1,
        Some(direct_sum(&[first, second])?),
    );
    f.witnesses.singular_function = Some(SingularFunction::BilateralWeighted);
    f.expected = vec![
        expect(
            "sigma_min_at_0",
            "0 on the first summand's window, 1 on the second",
        ),
        expect(
            "singular_function",
            "x + 0 for the pencil, 0 + x for the reversal",
        ),
    ];
    f.notes
        .push("combined index: the two l2(Z) summands interleaved through storage order".into());
    Ok(f)
}

/// `E = diag(1/j)`, `B = -I`, `Q = diag(1/j)`, so `A = BQ = -E`.
pub fn diag_reciprocal_dh() -> Result<Pencil> {
    let n = SpaceDescriptor::L2N;
    let b = StructuredOperator::scale(c(-1.0), StructuredOperator::identity(n));
    let q = diag_recip();
    let a = StructuredOperator::product(b.clone(), q.clone())?;
    Pencil::new(diag_recip(), a)?.with_dh(DHStructure::new(b, q))
}

fn diag_reciprocal() -> Result<Fixture> {
    let mut f = Fixture::new(
        "diag_reciprocal",
        REGISTRY[9].1,
        Some(Pencil::new(diag_recip(), diag_recip())?),
    );
    f.dh_variant = Some(diag_reciprocal_dh()?);
    f.witnesses.joint_kernel = Some((1..=32).map(|n| (n, SparseVec::basis(n as i64))).collect());
    f.expected = vec![
        expect("stacked_sigma_min", "sqrt(2)/n, strictly decreasing"),
        expect("approx_kernel_sequence", "e_n with residual 1/n"),
        expect(
            "dh_classification",
            "approx_singular_evidence once sqrt(2)/n <= tol_ap",
        ),
        expect(
            "uniqueness",
            "unique (trivial common kernel, positive margin)",
        ),
        expect("mild_solution", "e^t x0"),
    ];
    f.notes.push(
        "dH casting: E = diag(1/j), B = -I, Q = diag(1/j); Q is invertible on every section only"
            .into(),
    );
    f.notes.push(SECTION_CAVEAT.into());
    f.default_window = 16;
    Ok(f)
}

pub fn approxchain_alpha(n: usize) -> f64 {
    let mut a = 1.0;
    for k in 2..=n + 1 {
        a /= k as f64;
    }
    a
}

/// Offset of block `n` (1-based) in the combined index.
pub fn approxchain_offset(n: usize) -> i64 {
    (n * n) as i64 - 1
}

fn approxchain_block(n: usize, alpha: c64, rescaled: bool) -> (CMat, CMat) {
    let d = 2 * n + 1;
    let mut e = linalg::zeros(d, d);
    let mut a = linalg::zeros(d, d);
    // 0-based positions: local index i+1 stored at i.
    if !rescaled {
        for j in 1..=n {
            e[(n + j, j - 1)] = c(1.0);
            e[(j - 1, n + j)] = c(1.0);
            a[(n + j, j)] = c(1.0);
            a[(j, n + j)] = c(1.0);
        }
        e[(n, n)] = alpha;
        a[(0, 0)] = alpha;
    } else {
        let s = c(1.0 / n as f64);
        e[(0, 0)] = s;
        for j in 1..=n {
            e[(n + j, j)] = s;
            e[(j, n + j)] = s;
            a[(n + j, j - 1)] = s;
            a[(j - 1, n + j)] = s;
        }
        a[(n, n)] = s;
    }
    (e, a)
}

fn approxchain_family(blocks: usize, alphas: &[c64], rescaled: bool) -> Result<Pencil> {
    let parts: Vec<Pencil> = (1..=blocks)
        .map(|n| {
            let (e, a) = approxchain_block(n, alphas[n - 1], rescaled);
            dense_pencil(&e, &a)
        })
        .collect::<Result<_>>()?;
    direct_sum(&parts)
}

/// `p_n(lambda) = sum_{j=0}^n lambda^j e_(j+1)^(n)`.
pub fn approxchain_sequence(blocks: usize) -> PolynomialSequence {
    let space = SpaceDescriptor::Finite((blocks + 1) * (blocks + 1) - 1);
    PolynomialSequence::new("p_n", 1, blocks, move |n| {
        let off = approxchain_offset(n);
        VectorPolynomial::new(
            (0..=n as i64)
                .map(|j| SparseVec::basis(off + j + 1))
                .collect(),
            space,
        )
    })
}

fn approxchain(params: &FixtureParams) -> Result<Fixture> {
    let blocks = params.n.max(1);
    let alphas: Vec<c64> = match &params.alphas {
        Some(a) if a.len() >= blocks => a.clone(),
        Some(_) => return Err(invalid("approxchain needs one alpha per block")),
        None => (1..=blocks).map(|n| c(approxchain_alpha(n))).collect(),
    };
    let mut f = Fixture::new(
        "approxchain",
        REGISTRY[10].1,
        Some(approxchain_family(blocks, &alphas, false)?),
    );
    f.witnesses.sequence = Some(approxchain_sequence(blocks));
    f.expected = vec![
        expect("gram", "Xi = I, xi = 1"),
        expect("fwd_residual", "alpha_n sqrt(1 + |lambda0|^(2(n+1)))"),
        expect("rev_residual", "alpha_n sqrt(1 + |lambda0|^(2(n+1)))"),
    ];
    f.notes.push(format!(
        "finite truncation: blocks n = 1..={blocks}; block n occupies indices n^2..n^2+2n"
    ));
    f.notes.push(
        "Euclidean residual norm is reported; the displayed sum of component norms alpha_n (1 + |lambda0|^(n+1)) is an upper bound"
            .into(),
    );
    f.default_window = (blocks + 1) * (blocks + 1) - 1;
    Ok(f)
}

fn rescaled_approxchain(params: &FixtureParams) -> Result<Fixture> {
    let blocks = params.n.max(1);
    let ones = vec![c(1.0); blocks];
    let mut f = Fixture::new(
        "rescaled_approxchain",
        REGISTRY[11].1,
        Some(approxchain_family(blocks, &ones, true)?),
    );
    let space = SpaceDescriptor::Finite((blocks + 1) * (blocks + 1) - 1);
    f.witnesses.sequence = Some(PolynomialSequence::new("e_1^(n)", 1, blocks, move |n| {
        VectorPolynomial::constant(SparseVec::basis(approxchain_offset(n) + 1), space)
    }));
    f.expected = vec![
        expect(
            "constant_sequence",
            "e_1^(n), residual sqrt(1 + |lambda0|^2)/n",
        ),
        expect(
            "polynomial_sequence",
            "p_n residual tends to 0 only for |lambda0| <= 1",
        ),
    ];
    f.notes
        .push(format!("finite truncation: blocks n = 1..={blocks}"));
    f.default_window = (blocks + 1) * (blocks + 1) - 1;
    Ok(f)
}

pub fn gram_counterexample_polynomial() -> VectorPolynomial {
    VectorPolynomial::new(
        vec![
            SparseVec::basis(1),
            SparseVec::basis(2),
            SparseVec::basis(2),
            SparseVec::basis(3),
        ],
        SpaceDescriptor::Finite(3),
    )
}

fn gram_counterexample() -> Fixture {
    let mut f = Fixture::new("gram_counterexample", REGISTRY[12].1, None);
    let p = gram_counterexample_polynomial();
    f.witnesses.sequence = Some(PolynomialSequence::new("constant", 1, 1, move |_| {
        p.clone()
    }));
    f.witnesses.polynomial = Some(gram_counterexample_polynomial());
    f.expected = vec![
        expect("gram_lambda_min", "0"),
        expect("roots_check", "passes (root-free)"),
        expect("reduce", "unchanged"),
    ];
    f.notes.push("sequence-only entry; no pencil".into());
    f
}

pub fn revdegenerate_sequence(n_max: usize) -> PolynomialSequence {
    PolynomialSequence::new("e1 + l^n/n! e2", 1, n_max, |n| {
        let mut coeffs = vec![SparseVec::new(); n + 1];
        coeffs[0] = SparseVec::basis(1);
        let mut inv = 1.0;
        for k in 1..=n {
            inv /= k as f64;
        }
        coeffs[n].add_at(2, c(inv));
        VectorPolynomial::new(coeffs, SpaceDescriptor::Finite(2))
    })
}

fn revdegenerate() -> Fixture {
    let mut f = Fixture::new("revdegenerate", REGISTRY[13].1, None);
    f.witnesses.sequence = Some(revdegenerate_sequence(16));
    f.expected = vec![
        expect("p_norm", ">= 1 everywhere"),
        expect("revp_norm_at_half", "-> 0"),
        expect("roots_check_n8", "fails through the reversal"),
    ];
    f.notes.push("sequence-only entry; no pencil".into());
    f
}

fn facfac() -> Result<Fixture> {
    let n = SpaceDescriptor::L2N;
    let e = StructuredOperator::shift(n, -1, WeightRule::one());
    let a = StructuredOperator::diagonal(n, WeightRule::IndexPlusOne);
    let mut f = Fixture::new("facfac", REGISTRY[14].1, Some(Pencil::new(e, a)?));
    f.witnesses.generator = Some(ChainGenerator::new("k! e_k", 1.0, 3, |k| {
        let mut fact = 1.0;
        for i in 2..=k {
            fact *= i as f64;
        }
        let mut v = SparseVec::new();
        v.add_at(k as i64, c(fact));
        v
    })?);
    f.expected = vec![
        expect("growth_certificate", "c = 1, N0 = 3, radius 1/e"),
        expect("residual_classical", "(M+1) t^M"),
        expect("singular_polynomials", "none (A invertible)"),
    ];
    Ok(f)
}

fn shift_identity() -> Result<Fixture> {
    let n = SpaceDescriptor::L2N;
    let e = StructuredOperator::shift(n, -1, WeightRule::one());
    let mut f = Fixture::new(
        "shift_identity",
        REGISTRY[15].1,
        Some(Pencil::new(e, StructuredOperator::identity(n))?),
    );
    f.witnesses.generator = Some(ChainGenerator::new("e_k", 0.1, 1, |k| {
        SparseVec::basis(k as i64)
    })?);
    f.expected = vec![
        expect("residual_classical", "|t|^M / M!"),
        expect("initial_value", "f(0) = 0, f(1) != 0"),
        expect("regular_point", "0"),
        expect(
            "inhomogeneous_initial_value",
            "g = f' solves E g' = g with g(0) = e1",
        ),
        expect("uniqueness_demo", "refused (no dH structure)"),
    ];
    f.notes
        .push("series solutions with any c > 0; c = 0.1 gives radius 1/(0.1 e) > 1".into());
    Ok(f)
}

fn bilateral_shift() -> Result<Fixture> {
    let t = StructuredOperator::shift(SpaceDescriptor::L2Z, 1, WeightRule::one());
    let mut f = Fixture::new(
        "bilateral_shift",
        REGISTRY[16].1,
        Some(Pencil::new(t.clone(), t)?),
    );
    f.expected = vec![
        expect(
            "stacked_sigma_min",
            "0 on every symmetric window (section artifact)",
        ),
        expect(
            "spectra_grid",
            "sigma_min = 0 everywhere (section artifact)",
        ),
    ];
    f.notes.push(SECTION_CAVEAT.into());
    f.notes.push(
        "the pencil itself is regular away from 1; e_n spans the kernel of the windowed T".into(),
    );
    f.default_window = 4;
    Ok(f)
}

pub fn get_fixture(name: &str, params: &FixtureParams) -> Result<Fixture> {
    match name {
        "kronecker_L" => kronecker_l(params.k),
        "stokes_skeleton" => stokes_skeleton(params.n),
        "poroelasticity_template" => poroelasticity(params),
        "mult_by_E" => mult_by_e(),
        "symmetric_not_sa_note" => Ok(symmetric_note()),
        "shift_adjoint_sum" => {
            shift_adjoint_sum(params.alphas.as_deref().unwrap_or(&default_alphas()))
        }
        "backward_shift_diag" => backward_shift_diag(),
        "bilateral_weighted" => bilateral_weighted(),
        "non4_sum" => non4_sum(),
        "diag_reciprocal" => diag_reciprocal(),
        "approxchain" => approxchain(params),
        "rescaled_approxchain" => rescaled_approxchain(params),
        "gram_counterexample" => Ok(gram_counterexample()),
        "revdegenerate" => Ok(revdegenerate()),
        "facfac" => facfac(),
        "shift_identity" => shift_identity(),
        "bilateral_shift" => bilateral_shift(),
        other => Err(Error::UnknownFixture(other.to_string())),
    }
}

/// Random dense dH section of dimension `n` with `Q = I`, `B = J - R` and
/// an engineered common kernel of dimension `kernel_dim` (`E` SPD when it
/// is 0).
pub fn random_dh_section(
    n: usize,
    kernel_dim: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SectionedPencil> {
    if kernel_dim > n {
        return Err(invalid("kernel dimension exceeds the space"));
    }
    let x = random_matrix(rng, n, n);
    let y = random_matrix(rng, n, n);
    let z = random_matrix(rng, n, n);
    let mut e = &x * x.adjoint();
    let mut r = &z * z.adjoint();
    let mut j = Mat::from_fn(n, n, |a, b| (y[(a, b)] - y[(b, a)].conj()) * 0.5);
    if kernel_dim == 0 {
        for i in 0..n {
            e[(i, i)] += c(0.1);
        }
    } else {
        let basis = linalg::orthonormal_span(random_matrix(rng, n, kernel_dim).as_ref(), 0.0)?;
        let p = linalg::identity(n) - &basis * basis.adjoint();
        e = &p * &e * &p;
        r = &p * &r * &p;
        j = &p * &j * &p;
    }
    let e = linalg::hermitian_part(e.as_ref());
    let r = linalg::hermitian_part(r.as_ref());
    let j = Mat::from_fn(n, n, |a, b| (j[(a, b)] - j[(b, a)].conj()) * 0.5);
    dh_section(e, j, r)
}

pub fn singular_function_of(f: &Fixture) -> Result<SingularFunction> {
    f.witnesses.singular_function.ok_or_else(|| {
        invalid(format!(
            "`{}` carries no closed-form singular function",
            f.name
        ))
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularFunctionRow {
    pub probe_re: f64,
    pub probe_im: f64,
    pub truncation: usize,
    pub residual: f64,
    pub tail_bound: f64,
    pub norm: f64,
    pub within_bound: bool,
}

/// Residual of the truncated singular function at each probe against the
/// analytic tail bound; excluded probes are an error.
pub fn verify_singular_function(
    f: &Fixture,
    probes: &[c64],
    truncation: usize,
) -> Result<Vec<SingularFunctionRow>> {
    let sf = singular_function_of(f)?;
    let p = f.pencil()?;
    if let Some(l) = probes.iter().find(|l| sf.excluded(**l)) {
        return Err(invalid(format!(
            "probe {l} is excluded: the singular function is not defined or vanishes there"
        )));
    }
    probes
        .iter()
        .map(|l| {
            let x = sf.truncated(*l, truncation);
            let residual = p.apply_pencil(*l, &x)?.norm();
            let tail_bound = sf.tail_bound(*l, truncation);
            Ok(SingularFunctionRow {
                probe_re: l.re,
                probe_im: l.im,
                truncation,
                residual,
                tail_bound,
                norm: x.norm(),
                within_bound: residual <= tail_bound + 1e-12,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, label: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.0.push(Check {
            label: label.into(),
            passed,
            detail: detail.into(),
        });
    }

    /// Records an error as a failed check instead of aborting the suite.
    fn attempt(&mut self, label: &str, f: impl FnOnce() -> Result<(bool, String)>) {
        match f() {
            Ok((ok, detail)) => self.push(label, ok, detail),
            Err(e) => self.push(label, false, format!("error: {e}")),
        }
    }
}

fn rel_err(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        x.abs()
    } else {
        (x - y).abs() / y.abs()
    }
}

/// `|r - closed| <= 1e-12 closed + 16 eps (||lambda E x|| + ||A x||)`: the
/// second term is the rounding floor of the cancelling sum.
pub fn agrees_with_closed_form<P: PencilAction + ?Sized>(
    p: &P,
    l: c64,
    x: &SparseVec,
    closed: f64,
) -> Result<(bool, f64)> {
    let r = p.apply_pencil(l, x)?.norm();
    let floor = 16.0 * linalg::EPS * (p.apply_e(x)?.norm() * l.norm() + p.apply_a(x)?.norm());
    Ok((
        (r - closed).abs() <= 1e-12 * closed + floor,
        rel_err(r, closed),
    ))
}

fn kv(name: &str, x: f64) -> String {
    format!("{name} = {}", fmt_num(x))
}

/// Runs the fixture's full check suite.
pub fn run_checks(name: &str, params: &FixtureParams) -> Result<Vec<Check>> {
    let f = get_fixture(name, params)?;
    let mut ch = Checks(Vec::new());
    match name {
        "kronecker_L" => checks_kronecker(&f, params.k, &mut ch),
        "stokes_skeleton" => checks_stokes(&f, &mut ch),
        "poroelasticity_template" => checks_poro(&f, params, &mut ch),
        "mult_by_E" => checks_mult_by_e(&f, &mut ch),
        "symmetric_not_sa_note" => ch.push(
            "caveat-only entry constructs nothing",
            f.pencil.is_none(),
            f.notes.join("; "),
        ),
        "shift_adjoint_sum" => checks_shift_adjoint_sum(
            &f,
            params.alphas.as_deref().unwrap_or(&default_alphas()),
            &mut ch,
        ),
        "backward_shift_diag" => {
            checks_singular_function(&f, &[c(1.0), c(-2.0), ci(0.0, 1.0)], 30, &mut ch)
        }
        "bilateral_weighted" => {
            checks_singular_function(&f, &[c(2.0), c(-0.5)], 20, &mut ch);
            checks_factorial_table(&f, &mut ch);
        }
        "non4_sum" => checks_non4(&f, &mut ch),
        "diag_reciprocal" => checks_diag_reciprocal(&f, &mut ch),
        "approxchain" => checks_approxchain(&f, &mut ch),
        "rescaled_approxchain" => checks_rescaled(&f, &mut ch),
        "gram_counterexample" => checks_gram_counterexample(&f, &mut ch),
        "revdegenerate" => checks_revdegenerate(&mut ch),
        "facfac" => checks_facfac(&f, &mut ch),
        "shift_identity" => checks_shift_identity(&f, &mut ch),
        "bilateral_shift" => checks_bilateral_shift(&f, &mut ch),
        _ => unreachable!("registry and check suites agree"),
    }
    Ok(ch.0)
}

fn checks_kronecker(f: &Fixture, k: usize, ch: &mut Checks) {
    let p = f.pencil.as_ref().unwrap();
    ch.attempt("chain extraction finds minimal index k", || {
        let s = section(p, k + 1)?;
        let c0 = extract_right_chain(&s, 1e-10)?.ok_or_else(|| invalid("no chain found"))?;
        let q = chain_to_polynomial(&c0);
        let r = verify_singular_polynomial(&s, &q, Side::Right, &certifying_probes(k))?;
        Ok((
            c0.minimal_index == k && r <= 1e-12,
            format!("minimal index {}, {}", c0.minimal_index, kv("residual", r)),
        ))
    });
    let q = f.witnesses.polynomial.clone().unwrap();
    ch.attempt("closed-form polynomial annihilates the pencil", || {
        let r = verify_singular_polynomial(p, &q, Side::Right, &certifying_probes(k))?;
        Ok((r <= 1e-12, kv("residual", r)))
    });
    ch.attempt("reversed polynomial annihilates the reversal", || {
        let rp = p.reverse();
        let r = verify_singular_polynomial(
            &rp,
            &q.reversed(),
            Side::Right,
            &[c(0.0), c(1.0), ci(2.0, 1.0)],
        )?;
        Ok((r <= 1e-12, kv("residual", r)))
    });
    ch.attempt("spectra grid is point singular everywhere", || {
        let s = section(p, k + 1)?;
        let rect = Rect {
            re_min: -2.0,
            re_max: 2.0,
            im_min: -2.0,
            im_max: 2.0,
        };
        let g = spectra_grid(&s, rect, (5, 5), Tolerances::defaults(&s)?)?;
        let worst = g.values.iter().map(|v| v.sigma_min).fold(0.0, f64::max);
        let all = g.values.iter().all(|v| v.verdict == Verdict::PointSingular);
        Ok((all, kv("max sigma_min", worst)))
    });
    ch.attempt("polynomial solution is classical and mild", || {
        let times: Vec<f64> = (0..=20).map(|i| -10.0 + i as f64).collect();
        let tr = polynomial_solution(p, &q, &times, 1e-12)?;
        let worst = tr.residual_classical.iter().copied().fold(0.0, f64::max);
        let pos: Vec<f64> = (0..=10).map(|i| i as f64 * 0.5).collect();
        let tr2 = polynomial_solution(p, &q, &pos, 1e-12)?;
        let mild = mild_residual(p, &tr2, 1e-11)?
            .into_iter()
            .fold(0.0, f64::max);
        Ok((
            worst <= 1e-12 && mild <= 1e-11 && tr.curve.value(0.0).is_zero(),
            format!("{}, {}", kv("classical", worst), kv("mild", mild)),
        ))
    });
}

fn checks_dh_common(s: &SectionedPencil, ch: &mut Checks, expect_kernel: usize) {
    ch.attempt("dH structure verified", || {
        let tol = crate::dhcheck::default_structure_tol(s)?;
        let d = verify_dh_structure(s, tol)?;
        Ok((
            d.ok(),
            format!(
                "{}, {}, {}",
                kv("selfadjoint defect", d.selfadjoint_defect),
                kv("lambda_min(Q*E)", d.qe_lambda_min),
                kv("dissipativity margin", d.dissipativity_margin)
            ),
        ))
    });
    ch.attempt("common kernel dimension", || {
        let k = dh_common_kernel(s, None)?;
        Ok((
            k.dim == expect_kernel,
            format!("dim {} (expected {expect_kernel})", k.dim),
        ))
    });
    ch.attempt("ker(E^2+R^2-J^2) matches the stacked kernel", || {
        let k = dh_kernel_ejr(s)?;
        let st = dh_common_kernel(s, None)?;
        let angle = linalg::subspace_angle(k.kernel.basis.as_ref(), st.basis.as_ref())?;
        Ok((k.kernel.dim == st.dim && angle <= 1e-8, kv("angle", angle)))
    });
    ch.attempt("half-plane classification", || {
        let r = dh_classify(s, &default_probes(), DhTolerances::defaults(s)?)?;
        let expected = if expect_kernel > 0 {
            DhClassification::PointSingular
        } else {
            DhClassification::RegularCandidate
        };
        Ok((
            r.classification == expected
                && r.kernel_forces_probe_singularity
                && r.half_plane_consistent,
            format!(
                "{}, {}",
                r.classification.as_str(),
                kv("min probe sigma", r.half_plane_min_sigma)
            ),
        ))
    });
}

fn checks_stokes(f: &Fixture, ch: &mut Checks) {
    let p = f.pencil.as_ref().unwrap();
    let s = match section(p, f.default_window) {
        Ok(s) => s,
        Err(e) => return ch.push("section", false, e.to_string()),
    };
    checks_dh_common(&s, ch, 1);
    ch.attempt("kernel is the constant pressure direction", || {
        let k = dh_common_kernel(&s, None)?;
        let n = s.cols();
        let m = n.div_ceil(2);
        let nv = n - m;
        let dir = Mat::from_fn(n, 1, |i, _| {
            if i >= nv {
                c(1.0 / (m as f64).sqrt())
            } else {
                c(0.0)
            }
        });
        let angle = linalg::subspace_angle(k.basis.as_ref(), dir.as_ref())?;
        Ok((angle <= 1e-10, kv("angle", angle)))
    });
    ch.attempt("two mild solutions from x0 = 0", || {
        let times: Vec<f64> = (0..=4).map(|i| i as f64 * 0.5).collect();
        match uniqueness_demo(&s, &SparseVec::new(), &times, 1e-10)? {
            UniquenessReport::NonUnique { max_distance, .. } => {
                Ok((max_distance > 0.0, kv("max distance", max_distance)))
            }
            UniquenessReport::Unique { .. } => Ok((false, "reported unique".into())),
        }
    });
}

fn checks_poro(f: &Fixture, params: &FixtureParams, ch: &mut Checks) {
    let p = f.pencil.as_ref().unwrap();
    let s = match section(p, f.default_window) {
        Ok(s) => s,
        Err(e) => return ch.push("section", false, e.to_string()),
    };
    if params.singular_pressure {
        checks_dh_common(&s, ch, 1);
        ch.attempt("constant singular polynomial in the pressure block", || {
            let c0 = extract_right_chain(&s, 1e-10)?.ok_or_else(|| invalid("no chain found"))?;
            let q = chain_to_polynomial(&c0);
            let x = &q.coeffs[0];
            let outside: f64 = x
                .iter()
                .filter(|(j, _)| *j <= 6)
                .map(|(_, z)| z.norm_sqr())
                .sum::<f64>()
                .sqrt();
            let r = verify_singular_polynomial(&s, &q, Side::Right, &certifying_probes(0))?;
            Ok((
                c0.minimal_index == 0 && outside <= 1e-10 && r <= 1e-10,
                format!(
                    "minimal index {}, {}, {}",
                    c0.minimal_index,
                    kv("mass outside p-block", outside),
                    kv("residual", r)
                ),
            ))
        });
        ch.attempt("polynomial solution stays in the kernel directions", || {
            let q = f.witnesses.polynomial.clone().unwrap();
            let times: Vec<f64> = (0..=4).map(|i| i as f64 * 0.5).collect();
            let tr = polynomial_solution(&s, &q, &times, 1e-10)?;
            let worst = tr.residual_classical.iter().copied().fold(0.0, f64::max);
            let nonzero = tr.states.last().map(|x| x.norm()).unwrap_or(0.0);
            let outside = tr
                .states
                .iter()
                .flat_map(|x| x.iter().filter(|(j, _)| *j <= 6).map(|(_, z)| z.norm()))
                .fold(0.0, f64::max);
            Ok((
                worst <= 1e-10 && nonzero > 0.0 && outside <= 1e-12,
                format!("{}, {}", kv("classical", worst), kv("final norm", nonzero)),
            ))
        });
        return;
    }
    checks_dh_common(&s, ch, 0);
    ch.attempt("perturbed R fails the dissipativity check", || {
        let tol = crate::dhcheck::default_structure_tol(&s)?;
        let mut bad = s.clone();
        if let Some(d) = bad.dh.as_mut() {
            let n = d.b.nrows();
            for i in 0..n {
                d.b[(i, i)] += c(2.0 * tol + 1e-3);
            }
        }
        let d = verify_dh_structure(&bad, tol)?;
        Ok((
            !d.dissipative_ok,
            kv("dissipativity margin", d.dissipativity_margin),
        ))
    });
    ch.attempt("power balance and Hamiltonian decay on [0, 2]", || {
        let (pb, hmono) = poro_power_balance(&s, params.seed)?;
        Ok((
            pb <= 1e-6 && hmono <= 1e-8,
            format!(
                "{}, {}",
                kv("max PBE residual", pb),
                kv("max H increase", hmono)
            ),
        ))
    });
}

/// Reference trajectory from a seeded initial value on `[0, 2]`; returns
/// the largest power-balance residual and the largest Hamiltonian
/// increase between consecutive samples.
pub fn poro_power_balance(s: &SectionedPencil, seed: u64) -> Result<(f64, f64)> {
    let tr = poro_trajectory(s, seed)?;
    let pb = tr.residual_pbe.iter().copied().fold(0.0, f64::max);
    let inc = tr
        .hamiltonian
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((pb, inc))
}

pub fn poro_trajectory(s: &SectionedPencil, seed: u64) -> Result<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let x0 = s.window_in.to_sparse(&random_unit(&mut rng, s.cols()));
    let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
    let mut tr = reference_trajectory(s, &x0, 2.0, 4000, &times)?;
    let pb = power_balance_residual(s, &tr, 1e-10)?;
    tr.residual_pbe = pb.residuals;
    tr.hamiltonian = pb.hamiltonian;
    tr.residual_mild = mild_residual(s, &tr, 1e-8)?;
    Ok(tr)
}

fn checks_mult_by_e(f: &Fixture, ch: &mut Checks) {
    let p = f.pencil.as_ref().unwrap();
    ch.attempt("sigma_min(2E - E) = 1/n with no exact kernel", || {
        let mut ok = true;
        let mut parts = Vec::new();
        for n in [4usize, 8, 16] {
            let s = section(p, n)?;
            let t = Tolerances::defaults(&s)?;
            let pc = classify_point(&s, Lambda::finite(c(2.0)), t)?;
            ok &= (pc.sigma_min - 1.0 / n as f64).abs() <= 1e-14
                && pc.verdict != Verdict::PointSingular;
            parts.push(format!("n={n}: {}", fmt_num(pc.sigma_min)));
        }
        Ok((ok, parts.join(", ")))
    });
    ch.attempt("sigma_min(l E - E) = |l - 1|/n", || {
        let s = section(p, 10)?;
        let t = Tolerances::defaults(&s)?;
        let mut worst: f64 = 0.0;
        for l in [c(0.0), ci(3.0, 1.0), ci(-1.0, 2.0)] {
            let pc = classify_point(&s, Lambda::finite(l), t)?;
            worst = worst.max((pc.sigma_min - (l - c(1.0)).norm() / 10.0).abs());
        }
        Ok((worst <= 1e-14, kv("max deviation", worst)))
    });
}

fn checks_shift_adjoint_sum(f: &Fixture, alphas: &[c64], ch: &mut Checks) {
    let p = f.pencil.as_ref().unwrap();
    ch.attempt("block sections have eigenvalues alpha_n", || {
        let mut worst: f64 = 0.0;
        for a in alphas {
            let n = SpaceDescriptor::L2N;
            let block = Pencil::new(
                StructuredOperator::identity(n),
                StructuredOperator::sum(vec![
                    StructuredOperator::shift(n, -1, WeightRule::one()),
                    StructuredOperator::scale(*a, StructuredOperator::identity(n)),
                ])?,
            )?;
            let s = section(&block, 6)?;
            for z in linalg::eigenvalues(s.a.as_ref())? {
                worst = worst.max((z - a).norm());
            }
        }
        Ok((worst < 1.0, kv("max |eig - alpha_n|", worst)))
    });
    ch.attempt("eigenvector of the first shifted block", || {
        let mu = 0.5;
        let lambda = alphas[0] + c(mu);
        let m = alphas.len() as i64;
        let terms = 40;
        let x: SparseVec = (1..=terms)
            .map(|j| (1 + (j - 1) * m + 1, c(mu.powi(j as i32 - 1))))
            .collect();
        let r = p.apply_pencil(lambda, &x)?.norm();
        let expected = mu.powi(terms as i32);
        Ok((
            rel_err(r, expected) <= 1e-12,
            format!("{}, {}", kv("residual", r), kv("mu^N", expected)),
        ))
    });
}

fn checks_singular_function(f: &Fixture, probes: &[c64], truncation: usize, ch: &mut Checks) {
    ch.attempt("truncated singular function within the tail bound", || {
        let rows = verify_singular_function(f, probes, truncation)?;
        let ok = rows.iter().all(|r| r.within_bound);
        let detail = rows
            .iter()
            .map(|r| {
                format!(
                    "({}, {}): {} <= {}",
                    fmt_num(r.probe_re),
                    fmt_num(r.probe_im),
                    fmt_num(r.residual),
                    fmt_num(r.tail_bound)
                )
            })
            .collect::<Vec<_>>()
            .join("; ");
        Ok((ok, detail))
    });
    ch.attempt("residual matches the closed form", || {
        let sf = singular_function_of(f)?;
        let p = f.pencil()?;
        let (mut ok, mut worst) = (true, 0.0f64);
        for l in probes {
            let x = sf.truncated(*l, truncation);
            let (agree, rel) =
                agrees_with_closed_form(p, *l, &x, sf.closed_form_residual(*l, truncation))?;
            ok &= agree;
            worst = worst.max(rel);
        }
        Ok((ok, kv("max relative deviation", worst)))
    });
    ch.attempt("probe 0 is excluded", || {
        let r = verify_singular_function(f, &[c(0.0)], truncation);
        Ok((matches!(r, Err(Error::InvalidInput(_))), "rejected".into()))
    });
}

fn checks_factorial_table(f: &Fixture, ch: &mut Checks) {
    ch.attempt("weights agree with a factorial table", || {
        let p = f.pencil()?;
        let fact = |n: u64| -> f64 { (1..=n).map(|k| k as f64).product() };
        let mut worst: f64 = 0.0;
        for j in -10i64..=10 {
            let w = p.a.apply_basis(j)?.get(j - 1).re;
            let expected = fact(j.unsigned_abs()) / fact((j - 1).unsigned_abs());
            worst = worst.max(rel_err(w, expected));
        }
        Ok((worst <= 1e-15, kv("max relative deviation", worst)))
    });
}

fn checks_non4(f: &Fixture, ch: &mut Checks) {
    let p = f.pencil.as_ref().unwrap();
    ch.attempt("sigma_min at 0 vanishes on one summand only", || {
        let z = SpaceDescriptor::L2Z;
        let first = Pencil::new(StructuredOperator::identity(z), weighted_bilateral())?;
        let second = Pencil::new(weighted_bilateral(), StructuredOperator::identity(z))?;
        let s1 = section(&first, 4)?;
        let s2 = section(&second, 4)?;
        let t1 = Tolerances::defaults(&s1)?;
        let t2 = Tolerances::defaults(&s2)?;
        let a = classify_point(&s1, Lambda::finite(c(0.0)), t1)?.sigma_min;
        let b = classify_point(&s2, Lambda::finite(c(0.0)), t2)?.sigma_min;
        Ok((
            a <= 1e-14 && (b - 1.0).abs() <= 1e-14,
            format!("{}, {}", kv("first", a), kv("second", b)),
        ))
    });
    ch.attempt(
        "x + 0 is singular for the pencil, 0 + x for the reversal",
        || {
            let sf = SingularFunction::BilateralWeighted;
            let l = c(2.0);
            let n = 20;
            let x = sf.truncated(l, n);
            let z = SpaceDescriptor::L2Z;
            let layout = crate::opmodel::SumLayout::new(&[z, z])?;
            let embed = |block: usize| -> Result<SparseVec> {
                x.iter()
                    .map(|(j, v)| {
                        Ok((
                            layout.combine(block, j).ok_or_else(|| invalid("layout"))?,
                            v,
                        ))
                    })
                    .collect()
            };
            let expected = sf.closed_form_residual(l, n);
            let (ok1, r1) = agrees_with_closed_form(p, l, &embed(0)?, expected)?;
            let (ok2, r2) = agrees_with_closed_form(&p.reverse(), l, &embed(1)?, expected)?;
            Ok((
                ok1 && ok2,
                format!(
                    "{}, {}",
                    kv("pencil deviation", r1),
                    kv("reversal deviation", r2)
                ),
            ))
        },
    );
}

fn checks_diag_reciprocal(f: &Fixture, ch: &mut Checks) {
    let p = f.pencil.as_ref().unwrap();
    let dh = f.dh_variant.as_ref().unwrap();
    ch.attempt("stacked sigma_min = sqrt(2)/n, strictly decreasing", || {
        let mut vals = Vec::new();
        let mut worst: f64 = 0.0;
        for n in [2usize, 4, 8, 16, 32] {
            let v = distance_to_singularity_bound(&section(p, n)?)?.value;
            worst = worst.max((v - 2f64.sqrt() / n as f64).abs());
            vals.push(v);
        }
        let dec = vals.windows(2).all(|w| w[1] < w[0]);
        Ok((worst <= 1e-13 && dec, kv("max deviation", worst)))
    });
    ch.attempt("constant sequence e_n has residual 1/n", || {
        let wit = f.witnesses.joint_kernel.clone().unwrap();
        let seq = approx_kernel_sequence(SpaceDescriptor::L2N, wit)?;
        let rows = sequence_residuals(p, &seq, &[c(0.0)], 1..=32)?;
        let worst = rows
            .iter()
            .map(|r| (r.fwd_residual - 1.0 / r.n as f64).abs())
            .fold(0.0, f64::max);
        let vals: Vec<f64> = rows.iter().map(|r| r.fwd_residual).collect();
        Ok((
            worst <= 1e-15 && converges(&vals, 0.05),
            kv("max deviation", worst),
        ))
    });
    ch.attempt(
        "dH casting: evidence appears once sqrt(2)/n <= tol_ap",
        || {
            let mut parts = Vec::new();
            let mut ok = true;
            for n in [8usize, 64, 256] {
                let s = section(dh, n)?;
                let mut t = DhTolerances::defaults(&s)?;
                t.ap = 1e-2 * s.scale()?;
                let r = dh_classify(&s, &default_probes(), t)?;
                let expected = if 2f64.sqrt() / n as f64 <= t.ap {
                    DhClassification::ApproxSingularEvidence
                } else {
                    DhClassification::RegularCandidate
                };
                ok &= r.classification == expected && r.structure_ok;
                parts.push(format!(
                    "n={n}: {} ({})",
                    r.classification.as_str(),
                    fmt_num(r.stacked_sigma_min)
                ));
            }
            Ok((ok, parts.join(", ")))
        },
    );
    ch.attempt("uniqueness certificate with positive margin", || {
        let s = section(dh, 8)?;
        match uniqueness_demo(&s, &SparseVec::basis(1), &[0.0, 0.5, 1.0], 1e-10)? {
            UniquenessReport::Unique { margin, .. } => Ok((margin > 0.0, kv("margin", margin))),
            UniquenessReport::NonUnique { .. } => Ok((false, "kernel found".into())),
        }
    });
    ch.attempt("e^t x0 is a mild solution", || {
        let r = exp_mild_residual(p)?;
        Ok((r <= 1e-10, kv("max mild residual", r)))
    });
    ch.attempt("regularity disc at 0 has radius 1/n", || {
        let s = section(p, 8)?;
        let r = regularity_disc(&s, c(0.0), 1e-12)?;
        Ok(((r - 0.125).abs() <= 1e-14, kv("radius", r)))
    });
}

/// Largest mild residual of `x(t) = e^t e_1` on `[0, 1]`.
pub fn exp_mild_residual(p: &Pencil) -> Result<f64> {
    let x0 = SparseVec::basis(1);
    let (v, d) = (x0.clone(), x0);
    let curve = Curve::Smooth {
        value: std::sync::Arc::new(move |t| v.scaled(c(t.exp()))),
        derivative: std::sync::Arc::new(move |t| d.scaled(c(t.exp()))),
        breakpoints: Vec::new(),
    };
    let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
    let tr = Trajectory::from_curve(p, curve, &times, 0)?;
    Ok(mild_residual(p, &tr, 1e-12)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// `(fwd, rev)` closed forms `alpha_n sqrt(1 + |l|^(2(n+1)))`.
pub fn approxchain_residual(n: usize, l: c64) -> f64 {
    approxchain_alpha(n) * (1.0 + l.norm().powi(2 * (n as i32 + 1))).sqrt()
}

pub fn approxchain_probes() -> Vec<c64> {
    vec![c(0.0), c(1.0), c(-1.0), ci(1.0, 1.0)]
}

fn checks_approxchain(f: &Fixture, ch: &mut Checks) {
    let p = f.pencil.as_ref().unwrap();
    let seq = f.witnesses.sequence.clone().unwrap();
    ch.attempt("Gram matrices are identities, xi = 1", || {
        let g = gram_lower_bound(&seq, seq.range())?;
        let ident = g
            .rows
            .iter()
            .all(|r| linalg::approx_eq(r.gram.as_ref(), linalg::identity(r.size).as_ref()) == 0.0);
        let perm = g.rows.iter().all(|r| r.lambda_min == r.lambda_min_reversed);
        Ok((ident && perm && g.xi == 1.0, kv("xi", g.xi)))
    });
    ch.attempt(
        "forward and reversal residuals match the closed form",
        || {
            let rows = sequence_residuals(p, &seq, &approxchain_probes(), seq.range())?;
            let mut worst: f64 = 0.0;
            for r in &rows {
                let e = approxchain_residual(r.n, ci(r.probe_re, r.probe_im));
                worst = worst
                    .max(rel_err(r.fwd_residual, e))
                    .max(rel_err(r.rev_residual, e));
            }
            Ok((worst <= 1e-12, kv("max relative deviation", worst)))
        },
    );
    ch.attempt("Gram bound holds at every probe", || {
        let rows = sequence_residuals(p, &seq, &approxchain_probes(), seq.range())?;
        Ok((
            crate::approxsing::check_gram_bound(&rows, 1.0, 1e-12).is_ok(),
            "||p_n||^2 >= 1".into(),
        ))
    });
    ch.attempt("block windows: stacked sigma_min", || {
        let mut parts = Vec::new();
        for n in 1..=3usize {
            let (e, a) = approxchain_block(n, c(approxchain_alpha(n)), false);
            let s = SectionedPencil::from_matrices(e, a)?;
            let v = joint_kernel_defect(&s)?.value;
            parts.push(format!(
                "n={n}: {} (sqrt(2) alpha_n = {})",
                fmt_num(v),
                fmt_num(2f64.sqrt() * approxchain_alpha(n))
            ));
        }
        Ok((true, parts.join(", ")))
    });
}

/// Squared forward residual of `p_n` for the rescaled blocks:
/// `(|l|^2 + |l|^(2n) + sum_{m=1}^n |l^(m+1) - l^(m-1)|^2) / n^2`.
pub fn rescaled_polynomial_residual(n: usize, l: c64) -> f64 {
    let mut s = l.norm_sqr() + l.norm_sqr().powi(n as i32);
    for m in 1..=n as i32 {
        s += (l.powi(m + 1) - l.powi(m - 1)).norm_sqr();
    }
    s.sqrt() / n as f64
}

fn checks_rescaled(f: &Fixture, ch: &mut Checks) {
    let p = f.pencil.as_ref().unwrap();
    let seq = f.witnesses.sequence.clone().unwrap();
    ch.attempt("constant sequence e_1^(n) converges", || {
        let rows = sequence_residuals(p, &seq, &[ci(0.5, 0.5)], seq.range())?;
        let vals: Vec<f64> = rows.iter().map(|r| r.fwd_residual).collect();
        let revs: Vec<f64> = rows.iter().map(|r| r.rev_residual).collect();
        let worst = rows
            .iter()
            .map(|r| rel_err(r.fwd_residual, (1.0 + 0.5f64).sqrt() / r.n as f64))
            .fold(0.0, f64::max);
        Ok((
            worst <= 1e-12 && converges(&vals, 0.2) && converges(&revs, 0.2),
            kv("max relative deviation", worst),
        ))
    });
    ch.attempt(
        "polynomial sequence residual matches the block computation",
        || {
            let blocks = seq.n_max;
            let poly = approxchain_sequence(blocks);
            let probes = [c(0.5), c(1.0), ci(0.0, 1.0), c(2.0)];
            let rows = sequence_residuals(p, &poly, &probes, 1..=blocks)?;
            let worst = rows
                .iter()
                .map(|r| {
                    rel_err(
                        r.fwd_residual,
                        rescaled_polynomial_residual(r.n, ci(r.probe_re, r.probe_im)),
                    )
                })
                .fold(0.0, f64::max);
            Ok((worst <= 1e-12, kv("max relative deviation", worst)))
        },
    );
}

fn checks_gram_counterexample(f: &Fixture, ch: &mut Checks) {
    let q = f.witnesses.polynomial.clone().unwrap();
    let seq = f.witnesses.sequence.clone().unwrap();
    ch.attempt("Gram matrix is singular", || {
        let g = gram_lower_bound(&seq, 1..=1)?;
        Ok((g.xi <= 1e-14, kv("lambda_min", g.xi)))
    });
    ch.attempt("roots check passes on a 64-point grid", || {
        let grid = square_grid(8, 2.0);
        Ok((
            polynomial_roots_check(&q, &grid, 1e-8),
            "no roots of p or rev p".into(),
        ))
    });
    ch.attempt("reduction leaves it unchanged", || {
        Ok((reduce_polynomial(&q)? == q, "root-free".into()))
    });
}

/// `k x k` nodes on `[-h, h]^2`.
pub fn square_grid(k: usize, h: f64) -> Vec<c64> {
    let node = |i: usize| -h + 2.0 * h * i as f64 / (k - 1) as f64;
    (0..k)
        .flat_map(|i| (0..k).map(move |j| ci(node(i), node(j))))
        .collect()
}

fn checks_revdegenerate(ch: &mut Checks) {
    let seq = revdegenerate_sequence(16);
    ch.attempt("||p_n|| >= 1 on the grid", || {
        let grid = square_grid(8, 2.0);
        let mut lo = f64::INFINITY;
        for n in seq.range() {
            let q = seq.at(n)?;
            for l in &grid {
                lo = lo.min(q.eval(*l).norm());
            }
        }
        Ok((lo >= 1.0, kv("min norm", lo)))
    });
    ch.attempt(
        "reversal at 1/2 collapses and fails the roots check at n = 8",
        || {
            let vals: Vec<f64> = seq
                .range()
                .map(|n| seq.at(n).map(|q| q.reversed().eval(c(0.5)).norm()))
                .collect::<Result<_>>()?;
            let q8 = seq.at(8)?;
            let v8 = q8.reversed().eval(c(0.5)).norm();
            let expected = (2f64.powi(-16) + (1.0 / 40320.0f64).powi(2)).sqrt();
            let fails = !polynomial_roots_check(&q8, &[c(0.5)], 0.01);
            Ok((
                converges(&vals, 1e-4) && rel_err(v8, expected) <= 1e-14 && fails,
                format!("{}, {}", kv("n=8", v8), kv("n=16", *vals.last().unwrap())),
            ))
        },
    );
}

fn checks_facfac(f: &Fixture, ch: &mut Checks) {
    let p = f.pencil.as_ref().unwrap();
    let gen = f.witnesses.generator.clone().unwrap();
    ch.attempt("links and growth certificate", || {
        gen.validate(p, 20, 1e-12)?;
        Ok((true, kv("radius", gen.radius())))
    });
    ch.attempt("classical residual (M+1) t^M at t = 0.05", || {
        let m = 8;
        let tr = series_solution(p, &gen, &[0.0, 0.05], m)?;
        let direct = {
            let x = tr.curve.value(0.05);
            let mut r = p.apply_e(&tr.curve.derivative(0.05))?;
            r.axpy(c(-1.0), &p.apply_a(&x)?);
            r.norm()
        };
        let closed = (m as f64 + 1.0) * 0.05f64.powi(m as i32);
        Ok((
            rel_err(tr.residual_classical[1], closed) <= 1e-10 && rel_err(direct, closed) <= 1e-10,
            format!(
                "{}, {}",
                kv("residual", tr.residual_classical[1]),
                kv("closed form", closed)
            ),
        ))
    });
    ch.attempt("no right chain on sections (A invertible)", || {
        let s = section(p, 8)?;
        Ok((extract_right_chain(&s, 1e-10)?.is_none(), "none".into()))
    });
}

fn checks_shift_identity(f: &Fixture, ch: &mut Checks) {
    let p = f.pencil.as_ref().unwrap();
    let gen = f.witnesses.generator.clone().unwrap();
    ch.attempt("series residual at t = 1 is 1/15!", || {
        let tr = series_solution(p, &gen, &[0.0, 1.0], 15)?;
        let expected = 1.0 / 1_307_674_368_000.0;
        let f0 = tr.states[0].norm();
        let f1 = tr.states[1].norm();
        Ok((
            rel_err(tr.residual_classical[1], expected) <= 1e-10 && f0 == 0.0 && f1 >= 1.0,
            format!(
                "{}, {}",
                kv("residual", tr.residual_classical[1]),
                kv("||f(1)||", f1)
            ),
        ))
    });
    ch.attempt("residuals decrease factorially in M", || {
        let mut prev = f64::INFINITY;
        let mut ok = true;
        for m in 4..=14 {
            let r = series_solution(p, &gen, &[0.8], m)?.residual_classical[0];
            ok &= r < prev * 0.8 / m as f64 * 1.0000001;
            prev = r;
        }
        Ok((ok, "ratio <= t/M".into()))
    });
    ch.attempt("g = f' solves E g' = g with g(0) = e1", || {
        let m = 15;
        let tr = series_solution(p, &gen, &[0.0], m)?;
        let Curve::Polynomial(coeffs) = &tr.curve else {
            unreachable!()
        };
        let deriv: Vec<SparseVec> = coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| a.scaled(c(k as f64)))
            .collect();
        let g = Trajectory::from_curve(p, Curve::Polynomial(deriv), &[0.0, 0.5], m - 1)?;
        let g0 = g.states[0].sub(&SparseVec::basis(1)).norm();
        let expected = 0.5f64.powi(m as i32 - 1) / (1..m).map(|k| k as f64).product::<f64>();
        Ok((
            g0 == 0.0 && rel_err(g.residual_classical[1], expected) <= 1e-10,
            kv("residual at 0.5", g.residual_classical[1]),
        ))
    });
    ch.attempt("constant e1 is not a singular polynomial", || {
        let q = VectorPolynomial::constant(SparseVec::basis(1), SpaceDescriptor::L2N);
        let r = verify_singular_polynomial(p, &q, Side::Right, &[c(0.0)])?;
        Ok(((r - 1.0).abs() < 1e-15, kv("residual at 0", r)))
    });
    ch.attempt("0 is a regular point of the section", || {
        let s = section(p, 8)?;
        let pc = classify_point(&s, Lambda::finite(c(0.0)), Tolerances::defaults(&s)?)?;
        Ok((
            pc.verdict == Verdict::Regular,
            kv("sigma_min", pc.sigma_min),
        ))
    });
    ch.attempt(
        "uniqueness demo refuses a pencil without dH structure",
        || {
            let s = section(p, 8)?;
            Ok((
                matches!(
                    uniqueness_demo(&s, &SparseVec::new(), &[0.0], 1e-10),
                    Err(Error::MissingDh)
                ),
                "refused".into(),
            ))
        },
    );
}

fn checks_bilateral_shift(f: &Fixture, ch: &mut Checks) {
    let p = f.pencil.as_ref().unwrap();
    ch.attempt("window -1..1 has ones below the diagonal", || {
        let s = section(p, 1)?;
        let ok =
            (0..3).all(|i| (0..3).all(|j| s.a[(i, j)] == if i == j + 1 { c(1.0) } else { c(0.0) }));
        Ok((ok, "e_1 leaves the window".into()))
    });
    ch.attempt("stacked sigma_min vanishes with the section caveat", || {
        let mut worst: f64 = 0.0;
        let mut caveat = true;
        for n in [1usize, 2, 4, 8] {
            let s = section(p, n)?;
            worst = worst.max(distance_to_singularity_bound(&s)?.value);
            caveat &= s.caveats.iter().any(|c| c == SECTION_CAVEAT);
        }
        Ok((
            worst <= 1e-14 && caveat,
            format!("{}; {SECTION_CAVEAT}", kv("max", worst)),
        ))
    });
    ch.attempt("spectra grid is identically zero on the window", || {
        let s = section(p, 4)?;
        let rect = Rect {
            re_min: -2.0,
            re_max: 2.0,
            im_min: -2.0,
            im_max: 2.0,
        };
        let g = spectra_grid(&s, rect, (5, 5), Tolerances::defaults(&s)?)?;
        let worst = g.values.iter().map(|v| v.sigma_min).fold(0.0, f64::max);
        Ok((worst <= 1e-14, kv("max sigma_min", worst)))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_resolve() {
        let p = FixtureParams::default();
        for name in fixture_names() {
            get_fixture(name, &p).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(matches!(
            get_fixture("nope", &p),
            Err(Error::UnknownFixture(_))
        ));
    }

    #[test]
    fn approxchain_offsets() {
        assert_eq!(approxchain_offset(1), 0);
        assert_eq!(approxchain_offset(2), 3);
        assert_eq!(approxchain_offset(3), 8);
    }
}
