use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Finitely supported vector over logical basis indices.
///
/// The inner product is linear in the first argument.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SparseVec(BTreeMap<i64, C64>);

impl SparseVec {
    pub fn new() -> Self {
        Self(BTreeMap::new())
    }

    pub fn basis(j: i64) -> Self {
        let mut v = Self::new();
        v.0.insert(j, C64::new(1.0, 0.0));
        v
    }

    pub fn from_pairs<I: IntoIterator<Item = (i64, C64)>>(pairs: I) -> Self {
        let mut v = Self::new();
        for (j, z) in pairs {
            v.add_at(j, z);
        }
        v
    }

    pub fn get(&self, j: i64) -> C64 {
        self.0.get(&j).copied().unwrap_or_default()
    }

    pub fn add_at(&mut self, j: i64, z: C64) {
        if z == C64::new(0.0, 0.0) {
            return;
        }
        *self.0.entry(j).or_default() += z;
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: C64, other: &SparseVec) {
        for (j, z) in &other.0 {
            self.add_at(*j, c * z);
        }
    }

    pub fn scaled(&self, c: C64) -> SparseVec {
        let mut out = SparseVec::new();
        out.axpy(c, self);
        out
    }

    pub fn sub(&self, other: &SparseVec) -> SparseVec {
        let mut out = self.clone();
        out.axpy(C64::new(-1.0, 0.0), other);
        out
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.values().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self, other> = sum self_j * conj(other_j)`.
    pub fn inner(&self, other: &SparseVec) -> C64 {
        self.0.iter().map(|(j, z)| z * other.get(*j).conj()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.values().all(|z| *z == C64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.0.iter().map(|(j, z)| (*j, *z))
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.0.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Mean logical index weighted by `|x_j|^2`; `None` for the zero vector.
    pub fn support_center(&self) -> Option<f64> {
        let w = self.norm_sqr();
        if w == 0.0 {
            return None;
        }
        Some(
            self.0
                .iter()
                .map(|(j, z)| *j as f64 * z.norm_sqr())
                .sum::<f64>()
                / w,
        )
    }

    pub fn conj(&self) -> SparseVec {
        SparseVec(self.0.iter().map(|(j, z)| (*j, z.conj())).collect())
    }
}

impl FromIterator<(i64, C64)> for SparseVec {
    fn from_iter<I: IntoIterator<Item = (i64, C64)>>(iter: I) -> Self {
        Self::from_pairs(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_is_linear_in_first_argument() {
        let x = SparseVec::from_pairs([(1, C64::new(0.0, 1.0)), (2, C64::new(2.0, 0.0))]);
        let y = SparseVec::from_pairs([(1, C64::new(1.0, 0.0)), (3, C64::new(5.0, 0.0))]);
        let i = C64::new(0.0, 1.0);
        assert_eq!(x.scaled(i).inner(&y), i * x.inner(&y));
        assert_eq!(x.inner(&y.scaled(i)), i.conj() * x.inner(&y));
        assert_eq!(x.norm_sqr(), 5.0);
    }

    #[test]
    fn zero_entries_are_not_stored() {
        let mut v = SparseVec::basis(4);
        v.add_at(7, C64::new(0.0, 0.0));
        assert_eq!(v.len(), 1);
        assert_eq!(v.support_center(), Some(4.0));
    }
}
