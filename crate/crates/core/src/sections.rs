//! Finite sections `Q_n (lambda E - A)|ran P_n` on canonical index windows
//! and the stacked smallest-singular-value certificate for the distance to
//! singularity.

use faer::{c64, Mat};
use serde::Serialize;

use crate::dhcheck::DHStructure;
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMat};
use crate::opmodel::{DhAction, Pencil, PencilAction, SpaceDescriptor, StructuredOperator};
use crate::vector::SparseVec;

pub const SECTION_CAVEAT: &str =
    "section-level verdict: finite sections of an infinite pencil need not reflect the pencil itself";

/// Canonical window: `1..=n` on `l2(N)` and finite spaces (clamped to the
/// dimension), `-n..=n` on `l2(Z)`. Matrix rows and columns follow the
/// logical order of the indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SectionWindow {
    pub space: SpaceDescriptor,
    pub n: usize,
}

impl SectionWindow {
    pub fn new(space: SpaceDescriptor, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("section size must be >= 1"));
        }
        let n = match space {
            SpaceDescriptor::Finite(d) => n.min(d),
            _ => n,
        };
        Ok(Self { space, n })
    }

    pub fn len(&self) -> usize {
        match self.space {
            SpaceDescriptor::L2Z => 2 * self.n + 1,
            _ => self.n,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> i64 {
        match self.space {
            SpaceDescriptor::L2Z => -(self.n as i64),
            _ => 1,
        }
    }

    pub fn indices(&self) -> Vec<i64> {
        let f = self.first();
        (0..self.len() as i64).map(|k| f + k).collect()
    }

    pub fn contains(&self, j: i64) -> bool {
        let f = self.first();
        j >= f && j < f + self.len() as i64
    }

    /// Matrix position of a logical index.
    pub fn position(&self, j: i64) -> Option<usize> {
        self.contains(j).then(|| (j - self.first()) as usize)
    }

    pub fn to_dense(&self, x: &SparseVec) -> Result<Vec<c64>> {
        let mut out = vec![c64::new(0.0, 0.0); self.len()];
        for (j, z) in x.iter() {
            let p = self.position(j).ok_or(Error::IndexOutOfRange {
                index: j,
                space: self.space,
            })?;
            out[p] += z;
        }
        Ok(out)
    }

    pub fn to_sparse(&self, x: &[c64]) -> SparseVec {
        let f = self.first();
        x.iter()
            .enumerate()
            .map(|(k, z)| (f + k as i64, *z))
            .collect()
    }
}

/// Sectioned dH factors: `B` on the output window, `Q` from the input to
/// the output window.
#[derive(Clone, Debug)]
pub struct SectionedDh {
    pub b: CMat,
    pub q: CMat,
    pub j: Option<CMat>,
    pub r: Option<CMat>,
    pub q_is_identity: bool,
}

#[derive(Clone, Debug)]
pub struct SectionedPencil {
    pub window_in: SectionWindow,
    pub window_out: SectionWindow,
    pub e: CMat,
    pub a: CMat,
    pub dh: Option<SectionedDh>,
    pub source: String,
    pub caveats: Vec<String>,
}

fn compress(
    op: &StructuredOperator,
    win_in: &SectionWindow,
    win_out: &SectionWindow,
) -> Result<CMat> {
    let mut m = linalg::zeros(win_out.len(), win_in.len());
    for (col, j) in win_in.indices().into_iter().enumerate() {
        for (i, z) in op.apply_basis(j)?.iter() {
            if let Some(row) = win_out.position(i) {
                m[(row, col)] += z;
            }
        }
    }
    Ok(m)
}

/// Orthogonal compression of `p` onto the canonical windows of size `n`.
pub fn section(p: &Pencil, n: usize) -> Result<SectionedPencil> {
    let window_in = SectionWindow::new(p.space_in(), n)?;
    let window_out = SectionWindow::new(p.space_out(), n)?;
    let e = compress(&p.e, &window_in, &window_out)?;
    let a = compress(&p.a, &window_in, &window_out)?;
    let dh = match &p.dh {
        None => None,
        Some(d) => Some(section_dh(d, &window_in, &window_out)?),
    };
    let mut caveats = Vec::new();
    if p.space_in().is_infinite() || p.space_out().is_infinite() {
        caveats.push(SECTION_CAVEAT.to_string());
    }
    Ok(SectionedPencil {
        window_in,
        window_out,
        e,
        a,
        dh,
        source: format!("{} -> {}, n = {}", p.space_in(), p.space_out(), n),
        caveats,
    })
}

fn section_dh(
    d: &DHStructure,
    win_in: &SectionWindow,
    win_out: &SectionWindow,
) -> Result<SectionedDh> {
    Ok(SectionedDh {
        b: compress(&d.b, win_out, win_out)?,
        q: compress(&d.q, win_in, win_out)?,
        j: d.j
            .as_ref()
            .map(|x| compress(x, win_out, win_out))
            .transpose()?,
        r: d.r
            .as_ref()
            .map(|x| compress(x, win_out, win_out))
            .transpose()?,
        q_is_identity: d.q_is_identity,
    })
}

impl SectionedPencil {
    /// Dense pencil on `C^cols -> C^rows`.
    pub fn from_matrices(e: CMat, a: CMat) -> Result<Self> {
        if e.nrows() != a.nrows() || e.ncols() != a.ncols() {
            return Err(Error::SpaceMismatch(format!(
                "E is {}x{} but A is {}x{}",
                e.nrows(),
                e.ncols(),
                a.nrows(),
                a.ncols()
            )));
        }
        let window_in = SectionWindow::new(SpaceDescriptor::finite(e.ncols())?, e.ncols())?;
        let window_out = SectionWindow::new(SpaceDescriptor::finite(e.nrows())?, e.nrows())?;
        Ok(Self {
            window_in,
            window_out,
            e,
            a,
            dh: None,
            source: "dense matrices".into(),
            caveats: Vec::new(),
        })
    }

    /// Attaches `A = BQ` factors; `B = J - R` when the split is given.
    pub fn with_dh(mut self, dh: SectionedDh) -> Result<Self> {
        let (m, n) = (self.e.nrows(), self.e.ncols());
        let shape_ok = |x: &CMat, r: usize, c: usize| x.nrows() == r && x.ncols() == c;
        if !shape_ok(&dh.b, m, m)
            || !shape_ok(&dh.q, m, n)
            || dh.j.as_ref().is_some_and(|x| !shape_ok(x, m, m))
            || dh.r.as_ref().is_some_and(|x| !shape_ok(x, m, m))
        {
            return Err(Error::SpaceMismatch(
                "dH factors do not match the section shape".into(),
            ));
        }
        self.dh = Some(dh);
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.e.nrows()
    }

    pub fn cols(&self) -> usize {
        self.e.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// `lambda E - A` as a dense matrix.
    pub fn at(&self, lambda: c64) -> CMat {
        linalg::pencil_at(self.e.as_ref(), self.a.as_ref(), lambda)
    }

    /// The minus sign keeps `lambda A - E` at `lambda = 0`.
    pub fn at_infinity(&self) -> CMat {
        Mat::from_fn(self.rows(), self.cols(), |i, j| -self.e[(i, j)])
    }

    pub fn reverse(&self) -> SectionedPencil {
        SectionedPencil {
            e: self.a.clone(),
            a: self.e.clone(),
            dh: None,
            ..self.clone()
        }
    }

    pub fn adjoint(&self) -> SectionedPencil {
        SectionedPencil {
            window_in: self.window_out,
            window_out: self.window_in,
            e: linalg::adjoint(self.e.as_ref()),
            a: linalg::adjoint(self.a.as_ref()),
            dh: None,
            source: format!("adjoint of {}", self.source),
            caveats: self.caveats.clone(),
        }
    }

    /// `[A; E]`.
    pub fn stacked(&self) -> CMat {
        linalg::vstack(&[self.a.as_ref(), self.e.as_ref()])
    }

    /// Largest singular value of `[A; E]`, the scale used by default
    /// tolerances.
    pub fn scale(&self) -> Result<f64> {
        linalg::spectral_norm(self.stacked().as_ref())
    }

    /// Restriction to a smaller canonical window.
    pub fn restrict(&self, n: usize) -> Result<SectionedPencil> {
        let win_in = SectionWindow::new(self.window_in.space, n.min(self.window_in.n))?;
        let win_out = SectionWindow::new(self.window_out.space, n.min(self.window_out.n))?;
        let pick = |m: &CMat,
                    rows: &SectionWindow,
                    cols: &SectionWindow,
                    rw: &SectionWindow,
                    cw: &SectionWindow| {
            let ri: Vec<usize> = rows
                .indices()
                .iter()
                .map(|j| rw.position(*j).unwrap())
                .collect();
            let ci: Vec<usize> = cols
                .indices()
                .iter()
                .map(|j| cw.position(*j).unwrap())
                .collect();
            Mat::from_fn(ri.len(), ci.len(), |i, j| m[(ri[i], ci[j])])
        };
        let (wi, wo) = (&self.window_in, &self.window_out);
        let dh = self.dh.as_ref().map(|d| SectionedDh {
            b: pick(&d.b, &win_out, &win_out, wo, wo),
            q: pick(&d.q, &win_out, &win_in, wo, wi),
            j: d.j.as_ref().map(|x| pick(x, &win_out, &win_out, wo, wo)),
            r: d.r.as_ref().map(|x| pick(x, &win_out, &win_out, wo, wo)),
            q_is_identity: d.q_is_identity,
        });
        Ok(SectionedPencil {
            window_in: win_in,
            window_out: win_out,
            e: pick(&self.e, &win_out, &win_in, wo, wi),
            a: pick(&self.a, &win_out, &win_in, wo, wi),
            dh,
            source: format!("{} restricted to n = {n}", self.source),
            caveats: self.caveats.clone(),
        })
    }

    fn apply_mat(
        &self,
        m: &CMat,
        from: &SectionWindow,
        to: &SectionWindow,
        x: &SparseVec,
    ) -> Result<SparseVec> {
        let xd = from.to_dense(x)?;
        Ok(to.to_sparse(&linalg::mat_vec(m.as_ref(), &xd)))
    }

    fn dh_ref(&self) -> Result<&SectionedDh> {
        self.dh.as_ref().ok_or(Error::MissingDh)
    }
}

impl PencilAction for SectionedPencil {
    fn space_in(&self) -> SpaceDescriptor {
        self.window_in.space
    }
    fn space_out(&self) -> SpaceDescriptor {
        self.window_out.space
    }
    fn apply_e(&self, x: &SparseVec) -> Result<SparseVec> {
        self.apply_mat(&self.e, &self.window_in, &self.window_out, x)
    }
    fn apply_a(&self, x: &SparseVec) -> Result<SparseVec> {
        self.apply_mat(&self.a, &self.window_in, &self.window_out, x)
    }
    fn apply_e_adjoint(&self, y: &SparseVec) -> Result<SparseVec> {
        let m = linalg::adjoint(self.e.as_ref());
        self.apply_mat(&m, &self.window_out, &self.window_in, y)
    }
    fn apply_a_adjoint(&self, y: &SparseVec) -> Result<SparseVec> {
        let m = linalg::adjoint(self.a.as_ref());
        self.apply_mat(&m, &self.window_out, &self.window_in, y)
    }
}

impl DhAction for SectionedPencil {
    fn apply_b(&self, y: &SparseVec) -> Result<SparseVec> {
        let b = &self.dh_ref()?.b;
        self.apply_mat(b, &self.window_out, &self.window_out, y)
    }
    fn apply_q(&self, x: &SparseVec) -> Result<SparseVec> {
        let q = &self.dh_ref()?.q;
        self.apply_mat(q, &self.window_in, &self.window_out, x)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct JointKernelDefect {
    pub value: f64,
    /// Unit minimizer over the input window, in logical indices.
    pub witness: SparseVec,
}

impl JointKernelDefect {
    pub fn witness_support_center(&self) -> f64 {
        self.witness.support_center().unwrap_or(f64::NAN)
    }
}

fn stacked_minimum(s: &SectionedPencil) -> Result<JointKernelDefect> {
    let rs = linalg::right_singular(s.stacked().as_ref())?;
    Ok(JointKernelDefect {
        value: rs.min(),
        witness: s.window_in.to_sparse(&rs.min_vector()),
    })
}

/// `sigma_min([A; E])` with its minimizing unit vector. Tends to zero along
/// sections whenever the distance to singularity does.
pub fn distance_to_singularity_bound(s: &SectionedPencil) -> Result<JointKernelDefect> {
    stacked_minimum(s)
}

/// The same quantity read as an approximate joint kernel:
/// `||E x||^2 + ||A x||^2 = value^2` for the witness `x`.
pub fn joint_kernel_defect(s: &SectionedPencil) -> Result<JointKernelDefect> {
    stacked_minimum(s)
}

/// Numerical-rank tolerance `k * sigma_max * 2^-52`.
pub fn default_rank_tol(m: &CMat) -> Result<f64> {
    let k = m.nrows().max(m.ncols()) as f64;
    Ok(k * linalg::spectral_norm(m.as_ref())? * linalg::EPS)
}

#[derive(Clone, Debug, Serialize)]
pub struct DistanceRow {
    pub n: usize,
    pub stacked_sigma_min: f64,
    pub witness_support_center: f64,
}

/// Stacked certificate over a list of section sizes, evaluated in parallel.
pub fn distance_sweep(p: &Pencil, sizes: &[usize]) -> Result<Vec<DistanceRow>> {
    use rayon::prelude::*;
    sizes
        .par_iter()
        .map(|&n| {
            let s = section(p, n)?;
            let d = distance_to_singularity_bound(&s)?;
            Ok(DistanceRow {
                n,
                stacked_sigma_min: d.value,
                witness_support_center: d.witness_support_center(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opmodel::WeightRule;

    fn c(x: f64) -> c64 {
        c64::new(x, 0.0)
    }

    fn diag_pencil() -> Pencil {
        let d = StructuredOperator::diagonal(SpaceDescriptor::L2N, WeightRule::ReciprocalIndex);
        Pencil::new(d.clone(), d).unwrap()
    }

    #[test]
    fn diagonal_section() {
        let s = section(&diag_pencil(), 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j {
                    c(1.0 / (i + 1) as f64)
                } else {
                    c(0.0)
                };
                assert_eq!(s.e[(i, j)], expected);
                assert_eq!(s.a[(i, j)], expected);
            }
        }
        assert_eq!(s.caveats.len(), 1);
    }

    #[test]
    fn diagonal_stacked_sigma_and_witness() {
        let s = section(&diag_pencil(), 5).unwrap();
        let d = joint_kernel_defect(&s).unwrap();
        assert!((d.value - 2f64.sqrt() / 5.0).abs() < 1e-15);
        assert!((d.witness.get(5).norm() - 1.0).abs() < 1e-14);
        assert!((d.witness_support_center() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn bilateral_shift_window_has_kernel() {
        let t = StructuredOperator::shift(SpaceDescriptor::L2Z, 1, WeightRule::one());
        let p = Pencil::new(t.clone(), t).unwrap();
        let s = section(&p, 1).unwrap();
        assert_eq!(s.window_in.indices(), vec![-1, 0, 1]);
        assert_eq!(s.a[(1, 0)], c(1.0));
        assert_eq!(s.a[(2, 1)], c(1.0));
        let col2: f64 = (0..3).map(|i| s.a[(i, 2)].norm()).sum();
        assert_eq!(col2, 0.0);
        assert!(distance_to_singularity_bound(&s).unwrap().value < 1e-15);
    }

    #[test]
    fn finite_window_is_clamped() {
        let i = StructuredOperator::identity(SpaceDescriptor::Finite(3));
        let s = section(&Pencil::new(i.clone(), i).unwrap(), 10).unwrap();
        assert_eq!((s.rows(), s.cols()), (3, 3));
        assert!(s.caveats.is_empty());
    }

    #[test]
    fn common_kernel_gives_zero() {
        let e = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 0 { c(1.0) } else { c(0.0) });
        let a = linalg::zeros(2, 2);
        let s = SectionedPencil::from_matrices(e, a).unwrap();
        let d = joint_kernel_defect(&s).unwrap();
        assert!(d.value < 1e-15);
        assert!((d.witness.get(2).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn restriction_matches_smaller_section() {
        let p = diag_pencil();
        let big = section(&p, 7).unwrap().restrict(4).unwrap();
        let small = section(&p, 4).unwrap();
        assert_eq!(linalg::approx_eq(big.e.as_ref(), small.e.as_ref()), 0.0);
    }
}
