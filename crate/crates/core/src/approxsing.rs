//! Approximate singular polynomial sequences: residuals of `p_n` and
//! `rev p_n`, and the Gram-matrix lower bound on their norms.

use std::ops::RangeInclusive;
use std::sync::Arc;

use faer::{c64, Mat};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMat};
use crate::opmodel::{PencilAction, SpaceDescriptor};
use crate::sections::JointKernelDefect;
use crate::singpoly::VectorPolynomial;
use crate::vector::SparseVec;

pub type Generator = Arc<dyn Fn(usize) -> VectorPolynomial + Send + Sync>;

/// `n -> p_n`, evaluated lazily up to `n_max`.
#[derive(Clone)]
pub struct PolynomialSequence {
    pub name: String,
    pub n_min: usize,
    pub n_max: usize,
    generator: Generator,
}

impl std::fmt::Debug for PolynomialSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PolynomialSequence")
            .field("name", &self.name)
            .field("n_min", &self.n_min)
            .field("n_max", &self.n_max)
            .finish()
    }
}

impl PolynomialSequence {
    pub fn new(
        name: impl Into<String>,
        n_min: usize,
        n_max: usize,
        generator: impl Fn(usize) -> VectorPolynomial + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            n_min,
            n_max,
            generator: Arc::new(generator),
        }
    }

    /// The same vector for every `n`.
    pub fn constant(v: SparseVec, space: SpaceDescriptor) -> Self {
        Self::new("constant", 1, 1, move |_| {
            VectorPolynomial::constant(v.clone(), space)
        })
    }

    pub fn at(&self, n: usize) -> Result<VectorPolynomial> {
        if n < self.n_min || n > self.n_max {
            return Err(invalid(format!(
                "sequence `{}` is defined for n in {}..={}",
                self.name, self.n_min, self.n_max
            )));
        }
        let p = (self.generator)(n);
        if p.is_zero() {
            return Err(invalid(format!(
                "sequence `{}` produced the zero polynomial at n = {n}",
                self.name
            )));
        }
        Ok(p)
    }

    pub fn range(&self) -> RangeInclusive<usize> {
        self.n_min..=self.n_max
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResidualRow {
    pub n: usize,
    pub probe_re: f64,
    pub probe_im: f64,
    /// `||(lambda0 E - A) p_n(lambda0)||`.
    pub fwd_residual: f64,
    /// `||(lambda0 A - E) rev p_n(lambda0)||`.
    pub rev_residual: f64,
    pub p_norm: f64,
    pub revp_norm: f64,
}

/// Residual table ordered by `n`, then by probe.
pub fn sequence_residuals<P: PencilAction + Sync + ?Sized>(
    p: &P,
    seq: &PolynomialSequence,
    probes: &[c64],
    n_range: RangeInclusive<usize>,
) -> Result<Vec<ResidualRow>> {
    if probes.is_empty() {
        return Err(invalid("probe list is empty"));
    }
    let ns: Vec<usize> = n_range.collect();
    let per_n: Vec<Vec<ResidualRow>> = ns
        .par_iter()
        .map(|&n| {
            let q = seq.at(n)?;
            let r = q.reversed();
            probes
                .iter()
                .map(|l| {
                    let v = q.eval(*l);
                    let w = r.eval(*l);
                    let fwd = p.apply_pencil(*l, &v)?;
                    let mut rev = p.apply_a(&w)?.scaled(*l);
                    rev.axpy(c64::new(-1.0, 0.0), &p.apply_e(&w)?);
                    Ok(ResidualRow {
                        n,
                        probe_re: l.re,
                        probe_im: l.im,
                        fwd_residual: fwd.norm(),
                        rev_residual: rev.norm(),
                        p_norm: v.norm(),
                        revp_norm: w.norm(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(per_n.into_iter().flatten().collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct GramRow {
    pub n: usize,
    pub size: usize,
    pub lambda_min: f64,
    /// `lambda_min(S Xi S)` for the index-reversing permutation `S`.
    pub lambda_min_reversed: f64,
    #[serde(skip)]
    pub gram: CMat,
}

#[derive(Clone, Debug, Serialize)]
pub struct GramReport {
    pub rows: Vec<GramRow>,
    /// Infimum of `lambda_min` over the range.
    pub xi: f64,
}

/// `Xi_ij = <x_i, x_j>` for the coefficients of `q`.
pub fn gram_matrix(q: &VectorPolynomial) -> CMat {
    let k = q.coeffs.len();
    Mat::from_fn(k, k, |i, j| q.coeffs[i].inner(&q.coeffs[j]))
}

pub fn gram_lower_bound(
    seq: &PolynomialSequence,
    n_range: RangeInclusive<usize>,
) -> Result<GramReport> {
    let rows = n_range
        .map(|n| {
            let q = seq.at(n)?;
            let gram = gram_matrix(&q);
            let k = gram.nrows();
            let rev = Mat::from_fn(k, k, |i, j| gram[(k - 1 - i, k - 1 - j)]);
            let lambda_min = linalg::hermitian_eigenvalues(gram.as_ref())?[0];
            let lambda_min_reversed = linalg::hermitian_eigenvalues(rev.as_ref())?[0];
            Ok(GramRow {
                n,
                size: k,
                lambda_min,
                lambda_min_reversed,
                gram,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xi = rows
        .iter()
        .map(|r| r.lambda_min)
        .fold(f64::INFINITY, f64::min);
    Ok(GramReport { rows, xi })
}

/// Constant polynomials `p_n = x_n` from a family of joint-kernel
/// witnesses.
pub fn approx_kernel_sequence(
    space: SpaceDescriptor,
    witnesses: Vec<(usize, SparseVec)>,
) -> Result<PolynomialSequence> {
    if witnesses.is_empty() {
        return Err(invalid("no joint-kernel witness family available"));
    }
    let n_min = witnesses.iter().map(|w| w.0).min().unwrap();
    let n_max = witnesses.iter().map(|w| w.0).max().unwrap();
    let table: Vec<(usize, SparseVec)> = witnesses;
    Ok(PolynomialSequence::new(
        "joint-kernel witnesses",
        n_min,
        n_max,
        move |n| {
            let v = table
                .iter()
                .find(|(m, _)| *m == n)
                .map(|(_, v)| v.clone())
                .unwrap_or_default();
            VectorPolynomial::constant(v, space)
        },
    ))
}

/// Witness family from section defects `n -> (value, witness)`.
pub fn witnesses_from_sections(
    defects: Vec<(usize, JointKernelDefect)>,
) -> Vec<(usize, SparseVec)> {
    defects.into_iter().map(|(n, d)| (n, d.witness)).collect()
}

/// Residual at the last sample below `eps` and nonincreasing over the last
/// five samples. Finite evidence of a limit, not a proof.
pub fn converges(values: &[f64], eps: f64) -> bool {
    let Some(last) = values.last() else {
        return false;
    };
    let tail = &values[values.len().saturating_sub(5)..];
    *last < eps && tail.windows(2).all(|w| w[1] <= w[0])
}

/// Ensures every row respects the Gram bound
/// `||p_n||^2 >= xi` and `||rev p_n||^2 >= xi`.
pub fn check_gram_bound(rows: &[ResidualRow], xi: f64, slack: f64) -> Result<()> {
    if xi <= 0.0 {
        return Ok(());
    }
    for r in rows {
        if r.p_norm.powi(2) < xi - slack || r.revp_norm.powi(2) < xi - slack {
            return Err(Error::VerificationFailed(format!(
                "Gram bound violated at n = {}, probe {}+{}i",
                r.n, r.probe_re, r.probe_im
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_of_counterexample_is_singular() {
        let q = VectorPolynomial::new(
            vec![
                SparseVec::basis(1),
                SparseVec::basis(2),
                SparseVec::basis(2),
                SparseVec::basis(3),
            ],
            SpaceDescriptor::Finite(3),
        );
        let seq = PolynomialSequence::new("x", 1, 3, move |_| q.clone());
        let g = gram_lower_bound(&seq, 1..=3).unwrap();
        assert!(g.xi.abs() < 1e-14);
        assert_eq!(g.rows[0].size, 4);
    }

    #[test]
    fn unit_constant_has_unit_gram() {
        let seq = PolynomialSequence::constant(SparseVec::basis(4), SpaceDescriptor::L2N);
        let g = gram_lower_bound(&seq, 1..=1).unwrap();
        assert_eq!(g.xi, 1.0);
    }

    #[test]
    fn convergence_rule() {
        assert!(converges(&[1.0, 0.5, 0.1, 0.01, 0.001], 0.01));
        assert!(!converges(&[1.0, 0.5, 0.1, 0.2, 0.001], 0.01));
        assert!(!converges(&[1.0, 0.5], 0.01));
    }

    #[test]
    fn out_of_range_index_rejected() {
        let seq = PolynomialSequence::constant(SparseVec::basis(1), SpaceDescriptor::L2N);
        assert!(seq.at(2).is_err());
    }
}
