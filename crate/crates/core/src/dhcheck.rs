//! Dissipative-Hamiltonian pencils `lambda E - BQ`: structure checks,
//! common kernels and the half-plane classification.
//!
//! Maximal dissipativity is not tested separately: every dissipative matrix
//! is maximally dissipative, so a section cannot witness it.

use faer::{c64, Mat};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMat};
use crate::opmodel::{OpExpr, SpaceDescriptor, StructuredOperator};
use crate::sections::{default_rank_tol, SectionedDh, SectionedPencil};

/// `A = BQ` with `B` dissipative and `Q` boundedly invertible; optionally
/// `B = J - R`.
#[derive(Clone, Debug, PartialEq)]
pub struct DHStructure {
    pub b: StructuredOperator,
    pub q: StructuredOperator,
    pub j: Option<StructuredOperator>,
    pub r: Option<StructuredOperator>,
    pub q_is_identity: bool,
}

impl DHStructure {
    pub fn new(b: StructuredOperator, q: StructuredOperator) -> Self {
        let q_is_identity = matches!(q.expr, OpExpr::Identity);
        Self {
            b,
            q,
            j: None,
            r: None,
            q_is_identity,
        }
    }

    /// `B = J - R`.
    pub fn from_split(
        j: StructuredOperator,
        r: StructuredOperator,
        q: StructuredOperator,
    ) -> Result<Self> {
        let b = StructuredOperator::sum(vec![
            j.clone(),
            StructuredOperator::scale(c64::new(-1.0, 0.0), r.clone()),
        ])?;
        let mut d = Self::new(b, q);
        d.j = Some(j);
        d.r = Some(r);
        Ok(d)
    }

    pub fn validate_against(&self, sin: SpaceDescriptor, sout: SpaceDescriptor) -> Result<()> {
        let check =
            |name: &str, op: &StructuredOperator, i: SpaceDescriptor, o: SpaceDescriptor| {
                op.validate()?;
                if op.space_in != i || op.space_out != o {
                    return Err(Error::SpaceMismatch(format!(
                        "{name} acts {} -> {}, expected {i} -> {o}",
                        op.space_in, op.space_out
                    )));
                }
                Ok(())
            };
        check("B", &self.b, sout, sout)?;
        check("Q", &self.q, sin, sout)?;
        if let Some(j) = &self.j {
            check("J", j, sout, sout)?;
        }
        if let Some(r) = &self.r {
            check("R", r, sout, sout)?;
        }
        if self.q_is_identity && (sin != sout || !matches!(self.q.expr, OpExpr::Identity)) {
            return Err(invalid("q_is_identity set but Q is not the identity"));
        }
        Ok(())
    }

    pub fn direct_sum(parts: &[&DHStructure]) -> Result<DHStructure> {
        let b = StructuredOperator::direct_sum(parts.iter().map(|d| d.b.clone()).collect())?;
        let q = StructuredOperator::direct_sum(parts.iter().map(|d| d.q.clone()).collect())?;
        let js: Option<Vec<_>> = parts.iter().map(|d| d.j.clone()).collect();
        let rs: Option<Vec<_>> = parts.iter().map(|d| d.r.clone()).collect();
        let (j, r) = match (js, rs) {
            (Some(js), Some(rs)) => (
                Some(StructuredOperator::direct_sum(js)?),
                Some(StructuredOperator::direct_sum(rs)?),
            ),
            _ => (None, None),
        };
        Ok(DHStructure {
            b,
            q,
            j,
            r,
            q_is_identity: false,
        })
    }
}

/// Per-condition margins; a check passes when its margin is `>= -tol`
/// (or the defect is `<= tol`).
#[derive(Clone, Debug, Serialize)]
pub struct DhDiagnostics {
    pub tol: f64,
    /// `||Q*E - (Q*E)*||_2`.
    pub selfadjoint_defect: f64,
    /// `lambda_min(sym(Q*E))`.
    pub qe_lambda_min: f64,
    /// `-lambda_max(sym(B))`.
    pub dissipativity_margin: f64,
    /// `sigma_min(Q)`.
    pub q_sigma_min: f64,
    /// `||A - BQ||_2`.
    pub factorization_defect: f64,
    pub j_skew_defect: Option<f64>,
    pub r_selfadjoint_defect: Option<f64>,
    pub r_lambda_min: Option<f64>,
    /// `||B - (J - R)||_2`.
    pub split_defect: Option<f64>,
    pub selfadjoint_ok: bool,
    pub nonnegative_ok: bool,
    pub dissipative_ok: bool,
    pub q_invertible_ok: bool,
    pub factorization_ok: bool,
    pub split_ok: bool,
}

impl DhDiagnostics {
    pub fn ok(&self) -> bool {
        self.selfadjoint_ok
            && self.nonnegative_ok
            && self.dissipative_ok
            && self.q_invertible_ok
            && self.factorization_ok
            && self.split_ok
    }
}

fn sub(a: &CMat, b: &CMat) -> CMat {
    a - b
}

fn dh_of(s: &SectionedPencil) -> Result<&SectionedDh> {
    s.dh.as_ref().ok_or(Error::MissingDh)
}

/// Default tolerance for structure checks, relative to the section scale.
pub fn default_structure_tol(s: &SectionedPencil) -> Result<f64> {
    let k = s.rows().max(s.cols()) as f64;
    Ok(1e2 * k * linalg::EPS * s.scale()?.max(1.0))
}

pub fn verify_dh_structure(s: &SectionedPencil, tol: f64) -> Result<DhDiagnostics> {
    let dh = dh_of(s)?;
    let qe = linalg::adjoint(dh.q.as_ref()) * &s.e;
    let selfadjoint_defect =
        linalg::spectral_norm(sub(&qe, &linalg::adjoint(qe.as_ref())).as_ref())?;
    let qe_lambda_min =
        linalg::hermitian_eigenvalues(linalg::hermitian_part(qe.as_ref()).as_ref())?[0];
    let b_eigs = linalg::hermitian_eigenvalues(linalg::hermitian_part(dh.b.as_ref()).as_ref())?;
    let dissipativity_margin = -b_eigs.last().copied().unwrap_or(0.0);
    let q_sigma_min = if dh.q.nrows() == dh.q.ncols() {
        linalg::sigma_min(dh.q.as_ref())?
    } else {
        0.0
    };
    let bq = &dh.b * &dh.q;
    let factorization_defect = linalg::spectral_norm(sub(&s.a, &bq).as_ref())?;

    let mut d = DhDiagnostics {
        tol,
        selfadjoint_defect,
        qe_lambda_min,
        dissipativity_margin,
        q_sigma_min,
        factorization_defect,
        j_skew_defect: None,
        r_selfadjoint_defect: None,
        r_lambda_min: None,
        split_defect: None,
        selfadjoint_ok: selfadjoint_defect <= tol,
        nonnegative_ok: qe_lambda_min >= -tol,
        dissipative_ok: dissipativity_margin >= -tol,
        q_invertible_ok: q_sigma_min > tol,
        factorization_ok: factorization_defect <= tol,
        split_ok: true,
    };
    if let (Some(j), Some(r)) = (&dh.j, &dh.r) {
        let jj = j + linalg::adjoint(j.as_ref());
        let j_skew = linalg::spectral_norm(jj.as_ref())?;
        let r_sa = linalg::spectral_norm(sub(r, &linalg::adjoint(r.as_ref())).as_ref())?;
        let r_min = linalg::hermitian_eigenvalues(linalg::hermitian_part(r.as_ref()).as_ref())?[0];
        let split = linalg::spectral_norm(sub(&dh.b, &sub(j, r)).as_ref())?;
        d.split_ok = j_skew <= tol && r_sa <= tol && r_min >= -tol && split <= tol;
        d.j_skew_defect = Some(j_skew);
        d.r_selfadjoint_defect = Some(r_sa);
        d.r_lambda_min = Some(r_min);
        d.split_defect = Some(split);
    }
    Ok(d)
}

/// `[E; BQ]`.
fn stacked_e_bq(s: &SectionedPencil, dh: &SectionedDh) -> CMat {
    let bq = &dh.b * &dh.q;
    linalg::vstack(&[s.e.as_ref(), bq.as_ref()])
}

#[derive(Clone, Debug)]
pub struct KernelBasis {
    pub dim: usize,
    /// Orthonormal columns over the input window.
    pub basis: CMat,
    /// Smallest singular value above the cutoff (`+inf` when the kernel is
    /// everything).
    pub margin: f64,
}

/// `ker E ∩ ker(BQ)` as the numerical kernel of `[E; BQ]`; `tol = None`
/// uses the rank convention.
pub fn dh_common_kernel(s: &SectionedPencil, tol: Option<f64>) -> Result<KernelBasis> {
    let dh = dh_of(s)?;
    let m = stacked_e_bq(s, dh);
    let tol = match tol {
        Some(t) => t,
        None => default_rank_tol(&m)?,
    };
    let rs = linalg::right_singular(m.as_ref())?;
    let dim = rs.nullity(tol);
    Ok(KernelBasis {
        dim,
        basis: rs.kernel(tol),
        margin: rs.values.get(dim).copied().unwrap_or(f64::INFINITY),
    })
}

#[derive(Clone, Debug)]
pub struct EjrKernel {
    pub kernel: KernelBasis,
    /// Angle to `ker E ∩ ker J ∩ ker R` from the stacked SVD.
    pub angle_to_stacked: f64,
}

/// Kernel of the nonnegative matrix `E^2 + R^2 - J^2` (with `Q = I`).
/// Eigenvalues `mu <= 10 k eps lambda_max` count as zero.
pub fn dh_kernel_ejr(s: &SectionedPencil) -> Result<EjrKernel> {
    let dh = dh_of(s)?;
    let (j, r) = match (&dh.j, &dh.r) {
        (Some(j), Some(r)) => (j, r),
        _ => return Err(invalid("dh_kernel_ejr needs the J, R split")),
    };
    if !dh.q_is_identity {
        return Err(invalid("dh_kernel_ejr needs Q = I"));
    }
    let k = &s.e * &s.e + r * r - j * j;
    let k = linalg::hermitian_part(k.as_ref());
    let (mu, vecs) = linalg::hermitian_eigen(k.as_ref())?;
    let n = k.nrows();
    let lambda_max = mu.last().copied().unwrap_or(0.0).max(0.0);
    let cut = 10.0 * n as f64 * linalg::EPS * lambda_max;
    let dim = mu.iter().take_while(|m| **m <= cut).count();
    let basis = Mat::from_fn(n, dim, |i, c| vecs[(i, c)]);
    let margin = mu
        .get(dim)
        .map(|m| m.max(0.0).sqrt())
        .unwrap_or(f64::INFINITY);

    let stacked = linalg::vstack(&[s.e.as_ref(), j.as_ref(), r.as_ref()]);
    let tol = default_rank_tol(&stacked)?;
    let reference = linalg::right_singular(stacked.as_ref())?.kernel(tol);
    let angle_to_stacked = linalg::subspace_angle(basis.as_ref(), reference.as_ref())?;
    Ok(EjrKernel {
        kernel: KernelBasis { dim, basis, margin },
        angle_to_stacked,
    })
}

pub fn default_probes() -> Vec<c64> {
    vec![
        c64::new(1.0, 0.0),
        c64::new(2.0, 0.0),
        c64::new(1.0, 1.0),
        c64::new(1.0, -1.0),
        c64::new(0.01, 10.0),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DhClassification {
    RegularCandidate,
    PointSingular,
    ApproxSingularEvidence,
}

impl DhClassification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::RegularCandidate => "regular_candidate",
            Self::PointSingular => "point_singular",
            Self::ApproxSingularEvidence => "approx_singular_evidence",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeSigma {
    pub re: f64,
    pub im: f64,
    pub sigma_min: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DhReport {
    pub structure_ok: bool,
    pub diagnostics: DhDiagnostics,
    pub common_kernel_dim: usize,
    #[serde(skip)]
    pub kernel_basis: CMat,
    pub stacked_sigma_min: f64,
    pub probes: Vec<ProbeSigma>,
    pub half_plane_min_sigma: f64,
    pub classification: DhClassification,
    /// Nontrivial common kernel forces `sigma_min <= tol_point` at every
    /// right-half-plane probe.
    pub kernel_forces_probe_singularity: bool,
    /// A single regular probe implies every probe is regular.
    pub half_plane_consistent: bool,
    pub note: String,
}

#[derive(Clone, Copy, Debug)]
pub struct DhTolerances {
    pub structure: f64,
    pub point: f64,
    pub ap: f64,
}

impl DhTolerances {
    pub fn defaults(s: &SectionedPencil) -> Result<Self> {
        let scale = s.scale()?;
        Ok(Self {
            structure: default_structure_tol(s)?,
            point: 1e-10 * scale,
            ap: 1e-6 * scale,
        })
    }
}

pub fn dh_classify(s: &SectionedPencil, probes: &[c64], tols: DhTolerances) -> Result<DhReport> {
    if probes.is_empty() {
        return Err(invalid("empty probe list"));
    }
    if let Some(p) = probes.iter().find(|p| p.re <= 0.0) {
        return Err(invalid(format!(
            "probe {p} is not in the open right half plane"
        )));
    }
    let diagnostics = verify_dh_structure(s, tols.structure)?;
    let dh = dh_of(s)?;
    let kernel = dh_common_kernel(s, None)?;
    let stacked = stacked_e_bq(s, dh);
    let stacked_sigma_min = linalg::right_singular(stacked.as_ref())?.min();
    let bq = &dh.b * &dh.q;

    use rayon::prelude::*;
    let sigmas: Vec<ProbeSigma> = probes
        .par_iter()
        .map(|l| {
            let m = linalg::pencil_at(s.e.as_ref(), bq.as_ref(), *l);
            Ok(ProbeSigma {
                re: l.re,
                im: l.im,
                sigma_min: linalg::sigma_min(m.as_ref())?,
            })
        })
        .collect::<Result<_>>()?;
    let half_plane_min_sigma = sigmas
        .iter()
        .map(|p| p.sigma_min)
        .fold(f64::INFINITY, f64::min);

    let classification = if kernel.dim >= 1 {
        DhClassification::PointSingular
    } else if stacked_sigma_min <= tols.ap {
        DhClassification::ApproxSingularEvidence
    } else {
        DhClassification::RegularCandidate
    };
    let kernel_forces_probe_singularity =
        kernel.dim == 0 || sigmas.iter().all(|p| p.sigma_min <= tols.point);
    let regular = sigmas.iter().filter(|p| p.sigma_min > tols.point).count();
    let half_plane_consistent = regular == 0 || regular == sigmas.len();

    Ok(DhReport {
        structure_ok: diagnostics.ok(),
        diagnostics,
        common_kernel_dim: kernel.dim,
        kernel_basis: kernel.basis,
        stacked_sigma_min,
        probes: sigmas,
        half_plane_min_sigma,
        classification,
        kernel_forces_probe_singularity,
        half_plane_consistent,
        note: "maximal dissipativity is automatic for matrices and is not tested separately".into(),
    })
}

/// Largest real part over the finite generalized eigenvalues of
/// `lambda E - A` (`|beta| > tol |alpha|` counts as finite).
pub fn max_real_generalized_eigenvalue(s: &SectionedPencil, tol: f64) -> Result<Option<f64>> {
    if !s.is_square() {
        return Err(invalid("generalized eigenvalues need a square section"));
    }
    let pairs = linalg::generalized_eigenvalues(s.a.as_ref(), s.e.as_ref())?;
    Ok(pairs
        .iter()
        .filter(|(alpha, beta)| beta.norm() > tol * alpha.norm().max(1.0))
        .map(|(alpha, beta)| (alpha / beta).re)
        .fold(None, |acc: Option<f64>, x| {
            Some(acc.map_or(x, |a| a.max(x)))
        }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> c64 {
        c64::new(x, 0.0)
    }

    fn diag(v: &[f64]) -> CMat {
        Mat::from_fn(
            v.len(),
            v.len(),
            |i, j| if i == j { c(v[i]) } else { c(0.0) },
        )
    }

    fn dh_section(e: CMat, b: CMat, q: CMat) -> SectionedPencil {
        let a = &b * &q;
        SectionedPencil::from_matrices(e, a)
            .unwrap()
            .with_dh(SectionedDh {
                b,
                q,
                j: None,
                r: None,
                q_is_identity: false,
            })
            .unwrap()
    }

    #[test]
    fn identity_structure_margins() {
        let s = dh_section(linalg::identity(3), diag(&[-1.0; 3]), linalg::identity(3));
        let d = verify_dh_structure(&s, 1e-12).unwrap();
        assert!(d.ok());
        assert_eq!(d.selfadjoint_defect, 0.0);
        assert_eq!(d.qe_lambda_min, 1.0);
        assert_eq!(d.dissipativity_margin, 1.0);
        assert!((d.q_sigma_min - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_selfadjoint_qe_fails() {
        let e = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 1 { c(1.0) } else { c(0.0) });
        let s = dh_section(e, diag(&[-1.0, -1.0]), linalg::identity(2));
        let d = verify_dh_structure(&s, 1e-12).unwrap();
        assert!(!d.selfadjoint_ok);
        assert!((d.selfadjoint_defect - 1.0).abs() < 1e-14);
    }

    #[test]
    fn common_kernel_of_diagonal_example() {
        let s = dh_section(diag(&[1.0, 0.0]), diag(&[-1.0, 0.0]), linalg::identity(2));
        let k = dh_common_kernel(&s, None).unwrap();
        assert_eq!(k.dim, 1);
        assert!((k.basis[(1, 0)].norm() - 1.0).abs() < 1e-14);
        let r = dh_classify(
            &s,
            &[c64::new(1.0, 0.0), c64::new(2.0, 1.0)],
            DhTolerances::defaults(&s).unwrap(),
        )
        .unwrap();
        assert_eq!(r.classification, DhClassification::PointSingular);
        assert!(r.probes.iter().all(|p| p.sigma_min <= 1e-12));
    }

    #[test]
    fn ejr_kernel_small_cases() {
        let with = |e: CMat, j: CMat, r: CMat| {
            let b = &j - &r;
            SectionedPencil::from_matrices(e, b.clone())
                .unwrap()
                .with_dh(SectionedDh {
                    b,
                    q: linalg::identity(2),
                    j: Some(j),
                    r: Some(r),
                    q_is_identity: true,
                })
                .unwrap()
        };
        let s = with(diag(&[1.0, 0.0]), linalg::zeros(2, 2), linalg::zeros(2, 2));
        assert_eq!(dh_kernel_ejr(&s).unwrap().kernel.dim, 1);
        let j = Mat::from_fn(2, 2, |r, col| match (r, col) {
            (0, 1) => c(1.0),
            (1, 0) => c(-1.0),
            _ => c(0.0),
        });
        let s = with(linalg::zeros(2, 2), j, linalg::zeros(2, 2));
        assert_eq!(dh_kernel_ejr(&s).unwrap().kernel.dim, 0);
    }

    #[test]
    fn left_half_plane_probe_rejected() {
        let s = dh_section(
            linalg::identity(2),
            diag(&[-1.0, -1.0]),
            linalg::identity(2),
        );
        let t = DhTolerances::defaults(&s).unwrap();
        assert!(dh_classify(&s, &[c64::new(-1.0, 0.0)], t).is_err());
    }
}
