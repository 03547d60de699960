//! Structured operators on `C^n`, `l2(N)` and `l2(Z)` defined by their
//! action on canonical basis vectors, and pencils `lambda E - A` built from
//! them.
//!
//! Logical indices start at 1 for finite spaces and `l2(N)`. For `l2(Z)`
//! every integer is an index; storage order interleaves them as
//! `0, -1, 1, -2, 2, ...` so that symmetric windows `-n..=n` are prefixes.
//!
//! The domain of every operator is the span of the basis vectors; closures
//! are not modeled.

use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dhcheck::DHStructure;
use crate::error::{invalid, Error, Result};
use crate::vector::SparseVec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SpaceDescriptor {
    Finite(usize),
    L2N,
    L2Z,
}

impl SpaceDescriptor {
    pub fn finite(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("finite spaces need dimension >= 1"));
        }
        Ok(Self::Finite(dim))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Finite(0) => Err(invalid("finite spaces need dimension >= 1")),
            _ => Ok(()),
        }
    }

    pub fn is_infinite(&self) -> bool {
        !matches!(self, Self::Finite(_))
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Finite(d) => Some(*d),
            _ => None,
        }
    }

    pub fn contains(&self, j: i64) -> bool {
        match self {
            Self::Finite(d) => j >= 1 && j <= *d as i64,
            Self::L2N => j >= 1,
            Self::L2Z => true,
        }
    }

    /// 0-based storage position of a logical index.
    pub fn storage_of(&self, j: i64) -> Option<usize> {
        if !self.contains(j) {
            return None;
        }
        Some(match self {
            Self::Finite(_) | Self::L2N => (j - 1) as usize,
            Self::L2Z => {
                if j >= 0 {
                    (2 * j) as usize
                } else {
                    (-2 * j - 1) as usize
                }
            }
        })
    }

    /// Logical index at a 0-based storage position.
    pub fn index_at(&self, s: usize) -> Option<i64> {
        match self {
            Self::Finite(d) if s >= *d => None,
            Self::Finite(_) | Self::L2N => Some(s as i64 + 1),
            Self::L2Z => {
                let s = s as i64;
                Some(if s % 2 == 0 { s / 2 } else { -(s + 1) / 2 })
            }
        }
    }

    fn same_kind(&self, other: &Self) -> bool {
        matches!(
            (self, other),
            (Self::Finite(_), Self::Finite(_)) | (Self::L2N, Self::L2N) | (Self::L2Z, Self::L2Z)
        )
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(d) => write!(f, "C^{d}"),
            Self::L2N => write!(f, "l2(N)"),
            Self::L2Z => write!(f, "l2(Z)"),
        }
    }
}

/// Index-dependent weights `j -> w(j)`, total over every index set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum WeightRule {
    Constant(C64),
    /// `1 / max(|j|, 1)`.
    ReciprocalIndex,
    /// `|j|! / |j-1|!`.
    FactorialRatio,
    /// `1 / |j|!`.
    InverseFactorial,
    /// `j + 1`.
    IndexPlusOne,
    /// `values[j - start]` inside the table, `outside` elsewhere.
    #[serde(rename_all = "camelCase")]
    Table {
        start: i64,
        values: Vec<C64>,
        outside: C64,
    },
    /// `w(j + by)`, conjugated when requested.
    Shifted {
        rule: Box<WeightRule>,
        by: i64,
        conjugate: bool,
    },
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

impl WeightRule {
    pub fn one() -> Self {
        Self::Constant(real(1.0))
    }

    pub fn eval(&self, j: i64) -> C64 {
        match self {
            Self::Constant(c) => *c,
            Self::ReciprocalIndex => real(1.0 / (j.unsigned_abs().max(1) as f64)),
            Self::FactorialRatio => {
                // |j|!/|j-1|! is j for j >= 1 and 1/(|j|+1) for j <= 0.
                if j >= 1 {
                    real(j as f64)
                } else {
                    real(1.0 / (j.unsigned_abs() as f64 + 1.0))
                }
            }
            Self::InverseFactorial => {
                let mut w = 1.0;
                for k in 2..=j.unsigned_abs() {
                    w /= k as f64;
                }
                real(w)
            }
            Self::IndexPlusOne => real(j as f64 + 1.0),
            Self::Table {
                start,
                values,
                outside,
            } => {
                let k = j - start;
                if k >= 0 && (k as usize) < values.len() {
                    values[k as usize]
                } else {
                    *outside
                }
            }
            Self::Shifted {
                rule,
                by,
                conjugate,
            } => {
                let w = rule.eval(j + by);
                if *conjugate {
                    w.conj()
                } else {
                    w
                }
            }
        }
    }

    fn is_real(&self) -> bool {
        match self {
            Self::Constant(c) => c.im == 0.0,
            Self::Table {
                values, outside, ..
            } => outside.im == 0.0 && values.iter().all(|v| v.im == 0.0),
            Self::Shifted { rule, .. } => rule.is_real(),
            _ => true,
        }
    }

    /// The rule `j -> w(j + by)`, conjugated when `conjugate` is set, in the
    /// simplest representation available.
    pub fn reindexed(&self, by: i64, conjugate: bool) -> WeightRule {
        let conjugate = conjugate && !self.is_real();
        match self {
            Self::Constant(c) => Self::Constant(if conjugate { c.conj() } else { *c }),
            Self::Table {
                start,
                values,
                outside,
            } => Self::Table {
                start: start - by,
                values: values
                    .iter()
                    .map(|v| if conjugate { v.conj() } else { *v })
                    .collect(),
                outside: if conjugate { outside.conj() } else { *outside },
            },
            Self::Shifted {
                rule,
                by: b0,
                conjugate: c0,
            } => {
                let (by, conjugate) = (b0 + by, *c0 ^ conjugate);
                if by == 0 && !conjugate {
                    (**rule).clone()
                } else {
                    Self::Shifted {
                        rule: rule.clone(),
                        by,
                        conjugate,
                    }
                }
            }
            _ if by == 0 => self.clone(),
            _ => Self::Shifted {
                rule: Box::new(self.clone()),
                by,
                conjugate: false,
            },
        }
    }
}

/// Expression tree of a structured operator. Shift nodes map
/// `e_j -> w(j) e_{j+offset}`; images falling outside the target space are
/// dropped, which makes backward shifts on `l2(N)` annihilate `e_1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum OpExpr {
    Identity,
    Zero,
    Diagonal {
        weights: WeightRule,
    },
    Shift {
        offset: i64,
        weights: WeightRule,
    },
    /// Dense matrix whose entry `(r, c)` maps `e_{col_start + c}` onto
    /// `e_{row_start + r}`.
    Dense {
        row_start: i64,
        col_start: i64,
        rows: Vec<Vec<C64>>,
    },
    DirectSum {
        blocks: Vec<StructuredOperator>,
    },
    Sum {
        terms: Vec<OpExpr>,
    },
    Scale {
        factor: C64,
        of: Box<OpExpr>,
    },
    /// `left * right`.
    Product {
        left: Box<StructuredOperator>,
        right: Box<StructuredOperator>,
    },
    Adjoint {
        of: Box<OpExpr>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuredOperator {
    pub space_in: SpaceDescriptor,
    pub space_out: SpaceDescriptor,
    pub expr: OpExpr,
}

/// Index bookkeeping of an orthogonal sum. Finite summands come first, in
/// list order; infinite summands (all of one kind) are interleaved after
/// them through their storage order, so the combined space is `l2(N)`.
#[derive(Clone, Debug)]
pub struct SumLayout {
    spaces: Vec<SpaceDescriptor>,
    finite_offsets: Vec<Option<usize>>,
    finite_total: usize,
    infinite: Vec<usize>,
    combined: SpaceDescriptor,
}

impl SumLayout {
    pub fn new(spaces: &[SpaceDescriptor]) -> Result<Self> {
        if spaces.is_empty() {
            return Err(invalid("direct sum of an empty list"));
        }
        let mut finite_offsets = Vec::with_capacity(spaces.len());
        let mut finite_total = 0usize;
        let mut infinite = Vec::new();
        let mut kind: Option<SpaceDescriptor> = None;
        for (b, s) in spaces.iter().enumerate() {
            s.validate()?;
            match s {
                SpaceDescriptor::Finite(d) => {
                    finite_offsets.push(Some(finite_total));
                    finite_total += d;
                }
                other => {
                    if let Some(k) = kind {
                        if k != *other {
                            return Err(Error::SpaceMismatch(
                                "direct sum mixes l2(N) and l2(Z) summands".into(),
                            ));
                        }
                    }
                    kind = Some(*other);
                    finite_offsets.push(None);
                    infinite.push(b);
                }
            }
        }
        let combined = if infinite.is_empty() {
            SpaceDescriptor::Finite(finite_total)
        } else {
            SpaceDescriptor::L2N
        };
        Ok(Self {
            spaces: spaces.to_vec(),
            finite_offsets,
            finite_total,
            infinite,
            combined,
        })
    }

    pub fn combined(&self) -> SpaceDescriptor {
        self.combined
    }

    pub fn blocks(&self) -> usize {
        self.spaces.len()
    }

    /// Combined index of a summand's local index.
    pub fn combine(&self, block: usize, local: i64) -> Option<i64> {
        let space = self.spaces.get(block)?;
        if !space.contains(local) {
            return None;
        }
        match self.finite_offsets[block] {
            Some(off) => Some(off as i64 + local),
            None => {
                let pos = self.infinite.iter().position(|b| *b == block)?;
                let s = space.storage_of(local)?;
                let r = s * self.infinite.len() + pos;
                Some((self.finite_total + 1 + r) as i64)
            }
        }
    }

    /// Summand and local index of a combined index.
    pub fn locate(&self, j: i64) -> Option<(usize, i64)> {
        if !self.combined.contains(j) {
            return None;
        }
        let j0 = (j - 1) as usize;
        if j0 < self.finite_total {
            for (b, off) in self.finite_offsets.iter().enumerate() {
                if let (Some(off), SpaceDescriptor::Finite(d)) = (off, self.spaces[b]) {
                    if j0 >= *off && j0 < off + d {
                        return Some((b, (j0 - off) as i64 + 1));
                    }
                }
            }
            return None;
        }
        let r = j0 - self.finite_total;
        let m = self.infinite.len();
        let block = self.infinite[r % m];
        let local = self.spaces[block].index_at(r / m)?;
        Some((block, local))
    }
}

fn validate_expr(expr: &OpExpr, sin: SpaceDescriptor, sout: SpaceDescriptor) -> Result<()> {
    sin.validate()?;
    sout.validate()?;
    match expr {
        OpExpr::Identity => {
            if sin != sout {
                return Err(Error::SpaceMismatch(format!(
                    "identity from {sin} to {sout}"
                )));
            }
        }
        OpExpr::Zero => {}
        OpExpr::Diagonal { .. } | OpExpr::Shift { .. } => {
            if !sin.same_kind(&sout) {
                return Err(Error::SpaceMismatch(format!(
                    "weighted shift/diagonal from {sin} to {sout}"
                )));
            }
        }
        OpExpr::Dense {
            row_start,
            col_start,
            rows,
        } => {
            let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
            if rows.is_empty() || ncols == 0 {
                return Err(invalid("dense block must be nonempty"));
            }
            if rows.iter().any(|r| r.len() != ncols) {
                return Err(invalid("dense block rows have different lengths"));
            }
            let fits = |s: SpaceDescriptor, start: i64, len: usize| {
                s.contains(start) && s.contains(start + len as i64 - 1)
            };
            if !fits(sin, *col_start, ncols) {
                return Err(Error::SpaceMismatch(format!(
                    "dense block columns {col_start}..{} do not fit {sin}",
                    col_start + ncols as i64 - 1
                )));
            }
            if !fits(sout, *row_start, rows.len()) {
                return Err(Error::SpaceMismatch(format!(
                    "dense block rows {row_start}..{} do not fit {sout}",
                    row_start + rows.len() as i64 - 1
                )));
            }
        }
        OpExpr::DirectSum { blocks } => {
            for b in blocks {
                b.validate()?;
            }
            let lin = SumLayout::new(&blocks.iter().map(|b| b.space_in).collect::<Vec<_>>())?;
            let lout = SumLayout::new(&blocks.iter().map(|b| b.space_out).collect::<Vec<_>>())?;
            if lin.combined() != sin || lout.combined() != sout {
                return Err(Error::SpaceMismatch(format!(
                    "direct sum acts {} -> {}, declared {sin} -> {sout}",
                    lin.combined(),
                    lout.combined()
                )));
            }
        }
        OpExpr::Sum { terms } => {
            for t in terms {
                validate_expr(t, sin, sout)?;
            }
        }
        OpExpr::Scale { of, .. } => validate_expr(of, sin, sout)?,
        OpExpr::Product { left, right } => {
            left.validate()?;
            right.validate()?;
            if right.space_in != sin || left.space_out != sout || left.space_in != right.space_out {
                return Err(Error::SpaceMismatch(format!(
                    "product {} -> {} -> {} declared {sin} -> {sout}",
                    right.space_in, right.space_out, left.space_out
                )));
            }
        }
        OpExpr::Adjoint { of } => validate_expr(of, sout, sin)?,
    }
    Ok(())
}

fn adjoint_expr(expr: &OpExpr) -> OpExpr {
    match expr {
        OpExpr::Identity => OpExpr::Identity,
        OpExpr::Zero => OpExpr::Zero,
        OpExpr::Diagonal { weights } => OpExpr::Diagonal {
            weights: weights.reindexed(0, true),
        },
        OpExpr::Shift { offset, weights } => OpExpr::Shift {
            offset: -offset,
            weights: weights.reindexed(-offset, true),
        },
        OpExpr::Dense {
            row_start,
            col_start,
            rows,
        } => {
            let ncols = rows[0].len();
            OpExpr::Dense {
                row_start: *col_start,
                col_start: *row_start,
                rows: (0..ncols)
                    .map(|c| rows.iter().map(|r| r[c].conj()).collect())
                    .collect(),
            }
        }
        OpExpr::DirectSum { blocks } => OpExpr::DirectSum {
            blocks: blocks.iter().map(StructuredOperator::adjoint).collect(),
        },
        OpExpr::Sum { terms } => OpExpr::Sum {
            terms: terms.iter().map(adjoint_expr).collect(),
        },
        OpExpr::Scale { factor, of } => OpExpr::Scale {
            factor: factor.conj(),
            of: Box::new(adjoint_expr(of)),
        },
        OpExpr::Product { left, right } => OpExpr::Product {
            left: Box::new(right.adjoint()),
            right: Box::new(left.adjoint()),
        },
        OpExpr::Adjoint { of } => (**of).clone(),
    }
}

fn apply_expr(
    expr: &OpExpr,
    sin: SpaceDescriptor,
    sout: SpaceDescriptor,
    j: i64,
) -> Result<SparseVec> {
    Ok(match expr {
        OpExpr::Identity => SparseVec::basis(j),
        OpExpr::Zero => SparseVec::new(),
        OpExpr::Diagonal { weights } => {
            let mut v = SparseVec::new();
            if sout.contains(j) {
                v.add_at(j, weights.eval(j));
            }
            v
        }
        OpExpr::Shift { offset, weights } => {
            let mut v = SparseVec::new();
            let t = j + offset;
            if sout.contains(t) {
                v.add_at(t, weights.eval(j));
            }
            v
        }
        OpExpr::Dense {
            row_start,
            col_start,
            rows,
        } => {
            let mut v = SparseVec::new();
            let c = j - col_start;
            if c >= 0 && (c as usize) < rows[0].len() {
                for (r, row) in rows.iter().enumerate() {
                    v.add_at(row_start + r as i64, row[c as usize]);
                }
            }
            v
        }
        OpExpr::DirectSum { blocks } => {
            let lin = SumLayout::new(&blocks.iter().map(|b| b.space_in).collect::<Vec<_>>())?;
            let lout = SumLayout::new(&blocks.iter().map(|b| b.space_out).collect::<Vec<_>>())?;
            let (b, local) = lin.locate(j).ok_or(Error::IndexOutOfRange {
                index: j,
                space: sin,
            })?;
            let image = blocks[b].apply_basis(local)?;
            let mut v = SparseVec::new();
            for (i, z) in image.iter() {
                let g = lout.combine(b, i).ok_or(Error::IndexOutOfRange {
                    index: i,
                    space: blocks[b].space_out,
                })?;
                v.add_at(g, z);
            }
            v
        }
        OpExpr::Sum { terms } => {
            let mut v = SparseVec::new();
            for t in terms {
                v.axpy(real(1.0), &apply_expr(t, sin, sout, j)?);
            }
            v
        }
        OpExpr::Scale { factor, of } => apply_expr(of, sin, sout, j)?.scaled(*factor),
        OpExpr::Product { left, right } => left.apply(&right.apply_basis(j)?)?,
        OpExpr::Adjoint { of } => apply_expr(&adjoint_expr(of), sin, sout, j)?,
    })
}

impl StructuredOperator {
    pub fn new(
        space_in: SpaceDescriptor,
        space_out: SpaceDescriptor,
        expr: OpExpr,
    ) -> Result<Self> {
        let op = Self {
            space_in,
            space_out,
            expr,
        };
        op.validate()?;
        Ok(op)
    }

    pub fn validate(&self) -> Result<()> {
        validate_expr(&self.expr, self.space_in, self.space_out)
    }

    pub fn identity(space: SpaceDescriptor) -> Self {
        Self {
            space_in: space,
            space_out: space,
            expr: OpExpr::Identity,
        }
    }

    pub fn zero(space_in: SpaceDescriptor, space_out: SpaceDescriptor) -> Self {
        Self {
            space_in,
            space_out,
            expr: OpExpr::Zero,
        }
    }

    pub fn diagonal(space: SpaceDescriptor, weights: WeightRule) -> Self {
        Self {
            space_in: space,
            space_out: space,
            expr: OpExpr::Diagonal { weights },
        }
    }

    pub fn shift(space: SpaceDescriptor, offset: i64, weights: WeightRule) -> Self {
        Self {
            space_in: space,
            space_out: space,
            expr: OpExpr::Shift { offset, weights },
        }
    }

    /// Dense matrix on `C^cols -> C^rows`.
    pub fn dense(rows: Vec<Vec<C64>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
        Self::new(
            SpaceDescriptor::finite(ncols)?,
            SpaceDescriptor::finite(nrows)?,
            OpExpr::Dense {
                row_start: 1,
                col_start: 1,
                rows,
            },
        )
    }

    pub fn direct_sum(blocks: Vec<StructuredOperator>) -> Result<Self> {
        let lin = SumLayout::new(&blocks.iter().map(|b| b.space_in).collect::<Vec<_>>())?;
        let lout = SumLayout::new(&blocks.iter().map(|b| b.space_out).collect::<Vec<_>>())?;
        Self::new(
            lin.combined(),
            lout.combined(),
            OpExpr::DirectSum { blocks },
        )
    }

    pub fn sum(terms: Vec<StructuredOperator>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| invalid("sum of an empty list"))?;
        let (sin, sout) = (first.space_in, first.space_out);
        if terms
            .iter()
            .any(|t| t.space_in != sin || t.space_out != sout)
        {
            return Err(Error::SpaceMismatch(
                "sum terms act between different spaces".into(),
            ));
        }
        Self::new(
            sin,
            sout,
            OpExpr::Sum {
                terms: terms.into_iter().map(|t| t.expr).collect(),
            },
        )
    }

    pub fn scale(factor: C64, op: StructuredOperator) -> Self {
        Self {
            space_in: op.space_in,
            space_out: op.space_out,
            expr: OpExpr::Scale {
                factor,
                of: Box::new(op.expr),
            },
        }
    }

    pub fn product(left: StructuredOperator, right: StructuredOperator) -> Result<Self> {
        Self::new(
            right.space_in,
            left.space_out,
            OpExpr::Product {
                left: Box::new(left),
                right: Box::new(right),
            },
        )
    }

    /// Structural adjoint: shifts become opposite shifts with reindexed
    /// conjugate weights, dense blocks are conjugate-transposed.
    pub fn adjoint(&self) -> Self {
        Self {
            space_in: self.space_out,
            space_out: self.space_in,
            expr: adjoint_expr(&self.expr),
        }
    }

    pub fn apply_basis(&self, j: i64) -> Result<SparseVec> {
        if !self.space_in.contains(j) {
            return Err(Error::IndexOutOfRange {
                index: j,
                space: self.space_in,
            });
        }
        apply_expr(&self.expr, self.space_in, self.space_out, j)
    }

    pub fn apply(&self, x: &SparseVec) -> Result<SparseVec> {
        let mut out = SparseVec::new();
        for (j, z) in x.iter() {
            out.axpy(z, &self.apply_basis(j)?);
        }
        Ok(out)
    }
}

/// Exact action of `op` on the basis vector `e_j`.
pub fn apply_basis(op: &StructuredOperator, j: i64) -> Result<SparseVec> {
    op.apply_basis(j)
}

/// The pencil `lambda E - A`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pencil {
    pub e: StructuredOperator,
    pub a: StructuredOperator,
    pub dh: Option<DHStructure>,
}

impl Pencil {
    pub fn new(e: StructuredOperator, a: StructuredOperator) -> Result<Self> {
        e.validate()?;
        a.validate()?;
        if e.space_in != a.space_in || e.space_out != a.space_out {
            return Err(Error::SpaceMismatch(format!(
                "E acts {} -> {} but A acts {} -> {}",
                e.space_in, e.space_out, a.space_in, a.space_out
            )));
        }
        Ok(Self { e, a, dh: None })
    }

    pub fn with_dh(mut self, dh: DHStructure) -> Result<Self> {
        dh.validate_against(self.space_in(), self.space_out())?;
        self.dh = Some(dh);
        Ok(self)
    }

    pub fn space_in(&self) -> SpaceDescriptor {
        self.e.space_in
    }

    pub fn space_out(&self) -> SpaceDescriptor {
        self.e.space_out
    }

    /// `lambda A - E`. The dH metadata describes `E` and `A = BQ` and is
    /// not carried over.
    pub fn reverse(&self) -> Pencil {
        Pencil {
            e: self.a.clone(),
            a: self.e.clone(),
            dh: None,
        }
    }

    /// `lambda E* - A*`, built structurally.
    pub fn adjoint(&self) -> Pencil {
        Pencil {
            e: self.e.adjoint(),
            a: self.a.adjoint(),
            dh: None,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Pencil> {
        let file: PencilFile = serde_json::from_str(s)?;
        file.into_pencil()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&PencilFile::from_pencil(
            self,
        ))?)
    }
}

pub fn reverse_pencil(p: &Pencil) -> Pencil {
    p.reverse()
}

pub fn adjoint_pencil(p: &Pencil) -> Pencil {
    p.adjoint()
}

/// Orthogonal sum of pencils; see [`SumLayout`] for the index bookkeeping.
/// dH metadata survives when every summand carries it.
pub fn direct_sum(ps: &[Pencil]) -> Result<Pencil> {
    if ps.is_empty() {
        return Err(invalid("direct sum of an empty list"));
    }
    let e = StructuredOperator::direct_sum(ps.iter().map(|p| p.e.clone()).collect())?;
    let a = StructuredOperator::direct_sum(ps.iter().map(|p| p.a.clone()).collect())?;
    let pencil = Pencil::new(e, a)?;
    let dhs: Option<Vec<&DHStructure>> = ps.iter().map(|p| p.dh.as_ref()).collect();
    match dhs {
        Some(dhs) => {
            let dh = DHStructure::direct_sum(&dhs)?;
            pencil.with_dh(dh)
        }
        None => Ok(pencil),
    }
}

/// Pencils seen through their action on finitely supported vectors.
pub trait PencilAction {
    fn space_in(&self) -> SpaceDescriptor;
    fn space_out(&self) -> SpaceDescriptor;
    fn apply_e(&self, x: &SparseVec) -> Result<SparseVec>;
    fn apply_a(&self, x: &SparseVec) -> Result<SparseVec>;
    fn apply_e_adjoint(&self, y: &SparseVec) -> Result<SparseVec>;
    fn apply_a_adjoint(&self, y: &SparseVec) -> Result<SparseVec>;

    /// `(lambda E - A) x`.
    fn apply_pencil(&self, lambda: C64, x: &SparseVec) -> Result<SparseVec> {
        let mut out = self.apply_e(x)?.scaled(lambda);
        out.axpy(real(-1.0), &self.apply_a(x)?);
        Ok(out)
    }

    /// `(lambda E* - A*) y`.
    fn apply_adjoint_pencil(&self, lambda: C64, y: &SparseVec) -> Result<SparseVec> {
        let mut out = self.apply_e_adjoint(y)?.scaled(lambda);
        out.axpy(real(-1.0), &self.apply_a_adjoint(y)?);
        Ok(out)
    }
}

/// Access to the `B` and `Q` factors of `A = BQ`.
pub trait DhAction: PencilAction {
    fn apply_b(&self, y: &SparseVec) -> Result<SparseVec>;
    fn apply_q(&self, x: &SparseVec) -> Result<SparseVec>;
}

impl PencilAction for Pencil {
    fn space_in(&self) -> SpaceDescriptor {
        self.e.space_in
    }
    fn space_out(&self) -> SpaceDescriptor {
        self.e.space_out
    }
    fn apply_e(&self, x: &SparseVec) -> Result<SparseVec> {
        self.e.apply(x)
    }
    fn apply_a(&self, x: &SparseVec) -> Result<SparseVec> {
        self.a.apply(x)
    }
    fn apply_e_adjoint(&self, y: &SparseVec) -> Result<SparseVec> {
        self.e.adjoint().apply(y)
    }
    fn apply_a_adjoint(&self, y: &SparseVec) -> Result<SparseVec> {
        self.a.adjoint().apply(y)
    }
}

impl DhAction for Pencil {
    fn apply_b(&self, y: &SparseVec) -> Result<SparseVec> {
        self.dh.as_ref().ok_or(Error::MissingDh)?.b.apply(y)
    }
    fn apply_q(&self, x: &SparseVec) -> Result<SparseVec> {
        self.dh.as_ref().ok_or(Error::MissingDh)?.q.apply(x)
    }
}

pub const FORMAT_VERSION: u32 = 1;

/// On-disk pencil description, version 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PencilFile {
    pub format: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space_in: Option<SpaceDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space_out: Option<SpaceDescriptor>,
    #[serde(rename = "E")]
    pub e: OpExpr,
    #[serde(rename = "A")]
    pub a: OpExpr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dh: Option<DhFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DhFile {
    #[serde(rename = "B")]
    pub b: OpExpr,
    #[serde(rename = "Q")]
    pub q: OpExpr,
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    pub j: Option<OpExpr>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<OpExpr>,
}

impl PencilFile {
    pub fn into_pencil(self) -> Result<Pencil> {
        if self.format != FORMAT_VERSION {
            return Err(invalid(format!(
                "unsupported format version {} (expected {FORMAT_VERSION})",
                self.format
            )));
        }
        let sin = self
            .space_in
            .or(self.space)
            .ok_or_else(|| invalid("missing \"space\" (or \"space_in\")"))?;
        let sout = self
            .space_out
            .or(self.space)
            .ok_or_else(|| invalid("missing \"space\" (or \"space_out\")"))?;
        let e = StructuredOperator::new(sin, sout, self.e)?;
        let a = StructuredOperator::new(sin, sout, self.a)?;
        let pencil = Pencil::new(e, a)?;
        match self.dh {
            None => Ok(pencil),
            Some(dh) => {
                let q_is_identity = matches!(dh.q, OpExpr::Identity);
                let b = StructuredOperator::new(sout, sout, dh.b)?;
                let q = StructuredOperator::new(sin, sout, dh.q)?;
                let j =
                    dh.j.map(|x| StructuredOperator::new(sout, sout, x))
                        .transpose()?;
                let r =
                    dh.r.map(|x| StructuredOperator::new(sout, sout, x))
                        .transpose()?;
                pencil.with_dh(DHStructure {
                    b,
                    q,
                    j,
                    r,
                    q_is_identity,
                })
            }
        }
    }

    pub fn from_pencil(p: &Pencil) -> Self {
        let (sin, sout) = (p.space_in(), p.space_out());
        let (space, space_in, space_out) = if sin == sout {
            (Some(sin), None, None)
        } else {
            (None, Some(sin), Some(sout))
        };
        Self {
            format: FORMAT_VERSION,
            space,
            space_in,
            space_out,
            e: p.e.expr.clone(),
            a: p.a.expr.clone(),
            dh: p.dh.as_ref().map(|d| DhFile {
                b: d.b.expr.clone(),
                q: d.q.expr.clone(),
                j: d.j.as_ref().map(|x| x.expr.clone()),
                r: d.r.as_ref().map(|x| x.expr.clone()),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn factorial(n: u64) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn backward_shift_kills_first_basis_vector() {
        let a = StructuredOperator::shift(SpaceDescriptor::L2N, -1, WeightRule::one());
        assert!(a.apply_basis(1).unwrap().is_zero());
        assert_eq!(a.apply_basis(4).unwrap(), SparseVec::basis(3));
    }

    #[test]
    fn identity_on_basis_vector() {
        let i = StructuredOperator::identity(SpaceDescriptor::L2N);
        assert_eq!(i.apply_basis(5).unwrap(), SparseVec::basis(5));
    }

    #[test]
    fn out_of_range_index_is_an_error() {
        let i = StructuredOperator::identity(SpaceDescriptor::Finite(3));
        assert!(matches!(
            i.apply_basis(4),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            i.apply_basis(0),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn factorial_ratio_matches_literal_table() {
        // |j|!/|j-1|! from explicit factorials.
        let a = StructuredOperator::shift(SpaceDescriptor::L2Z, -1, WeightRule::FactorialRatio);
        for j in -10i64..=10 {
            let expected = factorial(j.unsigned_abs()) / factorial((j - 1).unsigned_abs());
            let v = a.apply_basis(j).unwrap();
            assert_eq!(v.len(), 1);
            let got = v.get(j - 1);
            assert!((got - c(expected)).norm() <= 1e-15 * expected, "j = {j}");
        }
        assert!((a.apply_basis(-2).unwrap().get(-3) - c(1.0 / 3.0)).norm() < 1e-16);
    }

    #[test]
    fn z_storage_interleaves() {
        let z = SpaceDescriptor::L2Z;
        let order: Vec<i64> = (0..5).map(|s| z.index_at(s).unwrap()).collect();
        assert_eq!(order, vec![0, -1, 1, -2, 2]);
        for s in 0..50 {
            assert_eq!(z.storage_of(z.index_at(s).unwrap()), Some(s));
        }
    }

    #[test]
    fn adjoint_of_backward_shift_is_forward_shift() {
        let a = StructuredOperator::shift(SpaceDescriptor::L2N, -1, WeightRule::one());
        let s = a.adjoint();
        assert_eq!(
            s.expr,
            OpExpr::Shift {
                offset: 1,
                weights: WeightRule::one()
            }
        );
        assert_eq!(s.apply_basis(1).unwrap(), SparseVec::basis(2));
    }

    #[test]
    fn real_diagonal_is_self_adjoint() {
        let d = StructuredOperator::diagonal(SpaceDescriptor::L2N, WeightRule::ReciprocalIndex);
        assert_eq!(d.adjoint(), d);
    }

    #[test]
    fn reverse_is_involutive() {
        let p = Pencil::new(
            StructuredOperator::diagonal(SpaceDescriptor::L2N, WeightRule::ReciprocalIndex),
            StructuredOperator::shift(SpaceDescriptor::L2N, -1, WeightRule::one()),
        )
        .unwrap();
        let r = reverse_pencil(&p);
        assert_eq!(r.e, p.a);
        assert_eq!(r.a, p.e);
        assert_eq!(reverse_pencil(&r), p);
    }

    #[test]
    fn direct_sum_of_identities() {
        let i2 = StructuredOperator::identity(SpaceDescriptor::Finite(2));
        let p = Pencil::new(i2.clone(), i2).unwrap();
        let s = direct_sum(&[p.clone(), p]).unwrap();
        assert_eq!(s.space_in(), SpaceDescriptor::Finite(4));
        for j in 1..=4 {
            assert_eq!(s.e.apply_basis(j).unwrap(), SparseVec::basis(j));
        }
    }

    #[test]
    fn direct_sum_rejects_mixed_infinite_kinds() {
        let n = StructuredOperator::identity(SpaceDescriptor::L2N);
        let z = StructuredOperator::identity(SpaceDescriptor::L2Z);
        let pn = Pencil::new(n.clone(), n).unwrap();
        let pz = Pencil::new(z.clone(), z).unwrap();
        assert!(matches!(
            direct_sum(&[pn, pz]),
            Err(Error::SpaceMismatch(_))
        ));
    }

    #[test]
    fn layout_round_trip_with_finite_and_infinite_summands() {
        let spaces = [
            SpaceDescriptor::Finite(2),
            SpaceDescriptor::L2Z,
            SpaceDescriptor::L2Z,
            SpaceDescriptor::Finite(1),
        ];
        let l = SumLayout::new(&spaces).unwrap();
        assert_eq!(l.combined(), SpaceDescriptor::L2N);
        for j in 1..60 {
            let (b, local) = l.locate(j).unwrap();
            assert_eq!(l.combine(b, local), Some(j));
        }
        assert_eq!(l.locate(3), Some((3, 1)));
        assert_eq!(l.locate(4), Some((1, 0)));
        assert_eq!(l.locate(5), Some((2, 0)));
        assert_eq!(l.locate(6), Some((1, -1)));
    }

    #[test]
    fn dense_block_must_fit() {
        let e = OpExpr::Dense {
            row_start: 2,
            col_start: 1,
            rows: vec![vec![c(1.0)], vec![c(1.0)]],
        };
        let f2 = SpaceDescriptor::Finite(2);
        assert!(StructuredOperator::new(f2, f2, e).is_err());
    }

    #[test]
    fn json_round_trip_of_a_weighted_pencil() {
        let p = Pencil::new(
            StructuredOperator::diagonal(SpaceDescriptor::L2N, WeightRule::ReciprocalIndex),
            StructuredOperator::sum(vec![
                StructuredOperator::shift(SpaceDescriptor::L2N, -1, WeightRule::one()),
                StructuredOperator::scale(
                    C64::new(0.5, -1.0),
                    StructuredOperator::identity(SpaceDescriptor::L2N),
                ),
            ])
            .unwrap(),
        )
        .unwrap();
        let s = p.to_json_string().unwrap();
        assert!(s.contains("\"format\": 1"));
        let q = Pencil::from_json_str(&s).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn json_parses_hand_written_description() {
        let s = r#"{
            "format": 1,
            "space_in": {"finite": 3},
            "space_out": {"finite": 2},
            "E": {"op": "diagonal", "weights": {"constant": [1.0, 0.0]}},
            "A": {"op": "shift", "offset": -1, "weights": {"constant": [1.0, 0.0]}}
        }"#;
        let p = Pencil::from_json_str(s).unwrap();
        assert_eq!(p.space_in(), SpaceDescriptor::Finite(3));
        assert!(p.e.apply_basis(3).unwrap().is_zero());
        assert_eq!(p.a.apply_basis(3).unwrap(), SparseVec::basis(2));
    }

    #[test]
    fn json_rejects_wrong_version() {
        let s = r#"{"format": 2, "space": "l2N", "E": {"op": "identity"}, "A": {"op": "zero"}}"#;
        assert!(matches!(
            Pencil::from_json_str(s),
            Err(Error::InvalidInput(_))
        ));
    }
}
