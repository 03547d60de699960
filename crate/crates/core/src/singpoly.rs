//! Right and left singular chains of matrix pencils, the vector
//! polynomials they generate, and root-free reduction.

use faer::{c64, Mat};
use serde::Serialize;
use serde_json::json;

use crate::error::{invalid, Result};
use crate::linalg::{self, CMat};
use crate::opmodel::{PencilAction, SpaceDescriptor};
use crate::sections::{SectionWindow, SectionedPencil};
use crate::vector::SparseVec;

/// `sum_j lambda^j a_j` with finitely supported coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VectorPolynomial {
    pub coeffs: Vec<SparseVec>,
    pub space: SpaceDescriptor,
}

impl VectorPolynomial {
    /// Trailing zero coefficients are dropped.
    pub fn new(mut coeffs: Vec<SparseVec>, space: SpaceDescriptor) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs, space }
    }

    pub fn constant(v: SparseVec, space: SpaceDescriptor) -> Self {
        Self::new(vec![v], space)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, lambda: c64) -> SparseVec {
        // Horner from the top coefficient.
        let mut acc = SparseVec::new();
        for a in self.coeffs.iter().rev() {
            acc = acc.scaled(lambda);
            acc.axpy(c64::new(1.0, 0.0), a);
        }
        acc
    }

    /// `lambda^k p(1/lambda)` for `k = deg p`.
    pub fn reversed(&self) -> VectorPolynomial {
        let mut c = self.coeffs.clone();
        c.reverse();
        Self {
            coeffs: c,
            space: self.space,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Right,
    Left,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub side: Side,
    /// `x_0..x_k` over the window the chain lives on.
    pub chain: Vec<SparseVec>,
    pub minimal_index: usize,
    /// `||A x_0||, ||A x_1 - E x_0||, ..., ||E x_k||` (with `E*`, `A*` for
    /// left chains).
    pub residuals: Vec<f64>,
    /// `sigma_min` of the matrix with the chain vectors as columns.
    pub independence_margin: f64,
    #[serde(skip)]
    pub window: SectionWindow,
}

impl ChainReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Side, minimal index, residuals and dense vectors over the window.
    pub fn to_json(&self) -> serde_json::Value {
        let vectors: Vec<Vec<[f64; 2]>> = self
            .chain
            .iter()
            .map(|x| {
                self.window
                    .to_dense(x)
                    .unwrap_or_default()
                    .iter()
                    .map(|z| [z.re, z.im])
                    .collect()
            })
            .collect();
        json!({
            "side": self.side,
            "minimal_index": self.minimal_index,
            "residuals": self.residuals,
            "independence_margin": self.independence_margin,
            "window": self.window.indices(),
            "vectors": vectors,
        })
    }
}

/// Block Toeplitz matrix whose kernel holds the coefficients of degree-`k`
/// polynomials annihilated by `lambda e - a`: block row `i` is
/// `e x_{i-1} - a x_i`.
fn chain_matrix(e: &CMat, a: &CMat, k: usize) -> CMat {
    let (m, n) = (e.nrows(), e.ncols());
    let mut out = linalg::zeros((k + 2) * m, (k + 1) * n);
    for j in 0..=k {
        for r in 0..m {
            for c in 0..n {
                out[(j * m + r, j * n + c)] = -a[(r, c)];
                out[((j + 1) * m + r, j * n + c)] = e[(r, c)];
            }
        }
    }
    out
}

/// Scales so that `x_0` has unit norm and its largest entry is real
/// positive.
fn normalize_chain(xs: &mut [Vec<c64>]) {
    let x0 = &xs[0];
    let norm = linalg::vec_norm(x0);
    if norm == 0.0 {
        return;
    }
    let pivot = x0
        .iter()
        .copied()
        .max_by(|p, q| p.norm().total_cmp(&q.norm()))
        .unwrap();
    let phase = pivot.conj() / pivot.norm();
    let s = phase / norm;
    for x in xs.iter_mut() {
        for z in x.iter_mut() {
            *z *= s;
        }
    }
}

fn extract_chain(
    e: &CMat,
    a: &CMat,
    tol: f64,
    side: Side,
    window: SectionWindow,
) -> Result<Option<ChainReport>> {
    let (m, n) = (e.nrows(), e.ncols());
    if n == 0 {
        return Ok(None);
    }
    let scale = linalg::spectral_norm(e.as_ref())? + linalg::spectral_norm(a.as_ref())?;
    let cut = tol * scale.max(f64::MIN_POSITIVE);

    // A right singular polynomial exists iff lambda e - a has a kernel at
    // every lambda; three generic samples rule it out cheaply.
    if m >= n {
        for l in [
            c64::new(0.37, 0.81),
            c64::new(-1.13, 0.29),
            c64::new(0.55, -1.71),
        ] {
            let s = linalg::sigma_min(linalg::pencil_at(e.as_ref(), a.as_ref(), l).as_ref())?;
            if s > cut * l.norm().max(1.0) {
                return Ok(None);
            }
        }
    }

    for k in 0..=n {
        let big = chain_matrix(e, a, k);
        let rs = linalg::right_singular(big.as_ref())?;
        if rs.min() > cut {
            continue;
        }
        let v = rs.min_vector();
        let mut xs: Vec<Vec<c64>> = (0..=k).map(|j| v[j * n..(j + 1) * n].to_vec()).collect();
        normalize_chain(&mut xs);
        let mut residuals = Vec::with_capacity(k + 2);
        for i in 0..=k + 1 {
            let mut r = vec![c64::new(0.0, 0.0); m];
            if i <= k {
                for (ri, z) in linalg::mat_vec(a.as_ref(), &xs[i]).into_iter().enumerate() {
                    r[ri] -= z;
                }
            }
            if i >= 1 {
                for (ri, z) in linalg::mat_vec(e.as_ref(), &xs[i - 1])
                    .into_iter()
                    .enumerate()
                {
                    r[ri] += z;
                }
            }
            residuals.push(linalg::vec_norm(&r));
        }
        let independence_margin = linalg::sigma_min(linalg::from_columns(n, &xs).as_ref())?;
        return Ok(Some(ChainReport {
            side,
            chain: xs.iter().map(|x| window.to_sparse(x)).collect(),
            minimal_index: k,
            residuals,
            independence_margin,
            window,
        }));
    }
    Ok(None)
}

/// Shortest right singular chain `A x_0 = 0, A x_{j+1} = E x_j, E x_k = 0`
/// of the section, or `None` when the section has no right minimal index.
/// The kernel cutoff is `tol * (||E|| + ||A||)`.
pub fn extract_right_chain(s: &SectionedPencil, tol: f64) -> Result<Option<ChainReport>> {
    extract_chain(&s.e, &s.a, tol, Side::Right, s.window_in)
}

/// Right chain of the adjoint pencil `lambda E* - A*`.
pub fn extract_left_chain(s: &SectionedPencil, tol: f64) -> Result<Option<ChainReport>> {
    let e = linalg::adjoint(s.e.as_ref());
    let a = linalg::adjoint(s.a.as_ref());
    extract_chain(&e, &a, tol, Side::Left, s.window_out)
}

pub fn chain_to_polynomial(c: &ChainReport) -> VectorPolynomial {
    VectorPolynomial::new(c.chain.clone(), c.window.space)
}

fn check_probes(probes: &[c64]) -> Result<()> {
    if probes.is_empty() {
        return Err(invalid("probe list is empty"));
    }
    for (i, p) in probes.iter().enumerate() {
        for q in &probes[i + 1..] {
            if (p - q).norm() <= 1e-14 * p.norm().max(q.norm()).max(1.0) {
                return Err(invalid(format!("repeated probe {p}")));
            }
        }
    }
    Ok(())
}

/// `max ||(lambda E - A) q(lambda)||` over the probes (adjoint pencil for
/// the left side). `deg q + 2` distinct probes certify identical
/// vanishing.
pub fn verify_singular_polynomial<P: PencilAction + ?Sized>(
    p: &P,
    q: &VectorPolynomial,
    side: Side,
    probes: &[c64],
) -> Result<f64> {
    check_probes(probes)?;
    let mut worst: f64 = 0.0;
    for l in probes {
        let v = q.eval(*l);
        let r = match side {
            Side::Right => p.apply_pencil(*l, &v)?,
            Side::Left => p.apply_adjoint_pencil(*l, &v)?,
        };
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// `k + 2` fixed distinct probes for a degree-`k` polynomial.
pub fn certifying_probes(k: usize) -> Vec<c64> {
    (0..k + 2)
        .map(|j| {
            let t = j as f64;
            c64::new(0.5 + 0.25 * t, 0.3 * t - 0.2)
        })
        .collect()
}

fn scalar_roots(c: &[c64]) -> Result<Vec<c64>> {
    let d = c.len() - 1;
    let lead = c[d];
    let comp = Mat::from_fn(d, d, |i, j| {
        if i == 0 {
            -c[d - 1 - j] / lead
        } else if i == j + 1 {
            c64::new(1.0, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    linalg::eigenvalues(comp.as_ref())
}

fn trim(c: &[c64], tol: f64) -> &[c64] {
    let mut d = c.len();
    while d > 0 && c[d - 1].norm() <= tol {
        d -= 1;
    }
    &c[..d]
}

/// Root-free reduction: divides out `lambda` and every common root of the
/// coordinate polynomials in an orthonormal frame of the coefficient span.
/// Roots of different coordinates are matched within
/// `sqrt(cluster_tol) * max(1, |r|)`; a division is accepted when its
/// remainder is at most `cluster_tol` times the coefficient norm.
pub fn reduce_polynomial_with(q: &VectorPolynomial, cluster_tol: f64) -> Result<VectorPolynomial> {
    if q.is_zero() {
        return Err(invalid("cannot reduce the zero polynomial"));
    }
    let mut coeffs = q.coeffs.clone();
    while coeffs.first().is_some_and(|c| c.is_zero()) {
        coeffs.remove(0);
    }

    loop {
        if coeffs.len() <= 1 {
            break;
        }
        let mut support: Vec<i64> = coeffs.iter().flat_map(|c| c.support()).collect();
        support.sort_unstable();
        support.dedup();
        let dense = Mat::from_fn(support.len(), coeffs.len(), |i, j| {
            coeffs[j].get(support[i])
        });
        let scale = linalg::frobenius(dense.as_ref());
        let frame = linalg::orthonormal_span(dense.as_ref(), 1e-14 * scale)?;
        let coords = frame.adjoint() * &dense;
        let polys: Vec<Vec<c64>> = (0..coords.nrows())
            .map(|i| (0..coords.ncols()).map(|j| coords[(i, j)]).collect())
            .collect();
        let tiny = 1e-14 * scale;
        let trimmed: Vec<&[c64]> = polys
            .iter()
            .map(|p| trim(p, tiny))
            .filter(|p| !p.is_empty())
            .collect();
        if trimmed.iter().any(|p| p.len() == 1) {
            break;
        }
        let mut roots: Vec<Vec<c64>> = Vec::with_capacity(trimmed.len());
        for p in &trimmed {
            roots.push(scalar_roots(p)?);
        }
        let pivot = (0..roots.len()).min_by_key(|i| roots[*i].len()).unwrap();
        let mut common = None;
        'cand: for r in &roots[pivot] {
            // Multiple roots split by about sqrt(eps); averaging the cluster
            // recovers them.
            let radius = cluster_tol.sqrt() * r.norm().max(1.0);
            let mut sum = c64::new(0.0, 0.0);
            let mut count = 0usize;
            for rs in &roots {
                let near: Vec<&c64> = rs.iter().filter(|m| (*m - r).norm() <= radius).collect();
                if near.is_empty() {
                    continue 'cand;
                }
                count += near.len();
                sum = near.into_iter().fold(sum, |acc, m| acc + m);
            }
            common = Some(sum / count as f64);
            break;
        }
        let Some(root) = common else { break };
        // Synthetic division by (lambda - root).
        let k = coeffs.len() - 1;
        let mut quotient = vec![SparseVec::new(); k];
        quotient[k - 1] = coeffs[k].clone();
        for j in (1..k).rev() {
            let mut next = coeffs[j].clone();
            next.axpy(root, &quotient[j]);
            quotient[j - 1] = next;
        }
        let mut remainder = coeffs[0].clone();
        remainder.axpy(root, &quotient[0]);
        if remainder.norm() > cluster_tol * scale {
            break;
        }
        coeffs = quotient;
    }
    Ok(VectorPolynomial::new(coeffs, q.space))
}

pub fn reduce_polynomial(q: &VectorPolynomial) -> Result<VectorPolynomial> {
    reduce_polynomial_with(q, 1e-8)
}

/// `true` iff both `q` and `rev q` stay above `tol` in norm on the grid.
/// A falsification probe, not a proof.
pub fn polynomial_roots_check(q: &VectorPolynomial, grid: &[c64], tol: f64) -> bool {
    let r = q.reversed();
    grid.iter()
        .all(|l| q.eval(*l).norm() > tol && r.eval(*l).norm() > tol)
}

/// `n` equispaced points on the circle of the given radius.
pub fn circle_grid(n: usize, radius: f64) -> Vec<c64> {
    (0..n)
        .map(|k| c64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> c64 {
        c64::new(x, 0.0)
    }

    fn fin(n: usize) -> SpaceDescriptor {
        SpaceDescriptor::Finite(n)
    }

    fn l_block(k: usize) -> SectionedPencil {
        let e = Mat::from_fn(k, k + 1, |i, j| if i == j { c(1.0) } else { c(0.0) });
        let a = Mat::from_fn(k, k + 1, |i, j| if j == i + 1 { c(1.0) } else { c(0.0) });
        SectionedPencil::from_matrices(e, a).unwrap()
    }

    fn poly(cs: Vec<Vec<(i64, f64)>>, n: usize) -> VectorPolynomial {
        VectorPolynomial::new(
            cs.into_iter()
                .map(|v| v.into_iter().map(|(j, x)| (j, c(x))).collect())
                .collect(),
            fin(n),
        )
    }

    #[test]
    fn l_block_chain_is_the_canonical_basis() {
        let s = l_block(2);
        let ch = extract_right_chain(&s, 1e-10).unwrap().unwrap();
        assert_eq!(ch.minimal_index, 2);
        for (j, x) in ch.chain.iter().enumerate() {
            let e = SparseVec::basis(j as i64 + 1);
            assert!(x.sub(&e).norm() < 1e-12, "x_{j} = {x:?}");
        }
        let p = chain_to_polynomial(&ch);
        let probes = [c(0.0), c(1.0), c(-1.0), c64::new(0.0, 2.0)];
        assert!(verify_singular_polynomial(&s, &p, Side::Right, &probes).unwrap() <= 1e-13);
    }

    #[test]
    fn identity_has_no_chain() {
        let s = SectionedPencil::from_matrices(linalg::identity(3), linalg::identity(3)).unwrap();
        assert!(extract_right_chain(&s, 1e-10).unwrap().is_none());
    }

    #[test]
    fn corrupted_polynomial_is_detected() {
        let s = l_block(2);
        let p = poly(vec![vec![(1, 1.0)], vec![(2, 1.0)], vec![(3, 1.01)]], 3);
        assert!(verify_singular_polynomial(&s, &p, Side::Right, &[c(1.0)]).unwrap() > 1e-3);
    }

    #[test]
    fn repeated_probes_rejected() {
        let s = l_block(1);
        let p = poly(vec![vec![(1, 1.0)], vec![(2, 1.0)]], 2);
        assert!(verify_singular_polynomial(&s, &p, Side::Right, &[c(1.0), c(1.0)]).is_err());
    }

    #[test]
    fn common_factor_lambda_removed() {
        let q = poly(vec![vec![], vec![(1, 1.0)], vec![(2, 1.0)]], 3);
        let r = reduce_polynomial(&q).unwrap();
        assert_eq!(r, poly(vec![vec![(1, 1.0)], vec![(2, 1.0)]], 3));
    }

    #[test]
    fn common_root_one_removed() {
        // (lambda - 1)(e1 + lambda e3) = -e1 + lambda (e1 - e3) + lambda^2 e3.
        let q = poly(
            vec![vec![(1, -1.0)], vec![(1, 1.0), (3, -1.0)], vec![(3, 1.0)]],
            3,
        );
        let r = reduce_polynomial(&q).unwrap();
        assert_eq!(r.degree(), Some(1));
        assert!(r.coeffs[0].sub(&SparseVec::basis(1)).norm() < 1e-12);
        assert!(r.coeffs[1].sub(&SparseVec::basis(3)).norm() < 1e-12);
    }

    #[test]
    fn root_free_input_unchanged() {
        let q = poly(
            vec![
                vec![(1, 1.0)],
                vec![(2, 1.0)],
                vec![(2, 1.0)],
                vec![(3, 1.0)],
            ],
            3,
        );
        assert_eq!(reduce_polynomial(&q).unwrap(), q);
    }

    #[test]
    fn zero_polynomial_rejected() {
        assert!(reduce_polynomial(&VectorPolynomial::new(vec![], fin(2))).is_err());
    }

    #[test]
    fn roots_check_cases() {
        let grid = circle_grid(16, 1.0);
        let p = poly(vec![vec![(1, 1.0)], vec![(2, 1.0)]], 2);
        assert!(polynomial_roots_check(&p, &grid, 1e-8));
        let q = poly(vec![vec![(1, -1.0)], vec![(1, 1.0)]], 1);
        assert!(!polynomial_roots_check(&q, &grid, 1e-8));
    }
}
