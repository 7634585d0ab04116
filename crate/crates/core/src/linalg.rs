//! Sparse exact-rational matrices. Row `i` holds the entries `(i, j)`; when a
//! matrix stands for a Markov kernel, row = source state, column = target.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::qnum::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<BTreeMap<usize, Rational>>,
}

/// Concrete matrix of an algebra element over an enumerated tensor basis.
pub type OperatorMatrix = SparseMatrix;

impl SparseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        SparseMatrix {
            n_rows,
            n_cols,
            rows: vec![BTreeMap::new(); n_rows],
        }
    }

    pub fn square(n: usize) -> Self {
        Self::zeros(n, n)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::square(n);
        for i in 0..n {
            m.rows[i].insert(i, Rational::one());
        }
        m
    }

    pub fn diagonal(entries: &[Rational]) -> Self {
        let mut m = Self::square(entries.len());
        for (i, v) in entries.iter().enumerate() {
            m.set(i, i, v.clone());
        }
        m
    }

    pub fn from_dense(rows: Vec<Vec<Rational>>) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(n_rows, n_cols);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), n_cols, "ragged dense matrix");
            for (j, v) in row.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.rows[i].get(&j).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, &Rational)> + '_ {
        self.rows[i].iter().map(|(j, v)| (*j, v))
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        assert!(i < self.n_rows && j < self.n_cols, "index out of range");
        if v.is_zero() {
            self.rows[i].remove(&j);
        } else {
            self.rows[i].insert(j, v);
        }
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &Rational) {
        if v.is_zero() {
            return;
        }
        let slot = self.rows[i].entry(j).or_insert_with(Rational::zero);
        *slot += v;
        if slot.is_zero() {
            self.rows[i].remove(&j);
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.n_rows != other.n_rows {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows,
                actual: other.n_rows,
            });
        }
        if self.n_cols != other.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                actual: other.n_cols,
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n_cols != other.n_rows {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                actual: other.n_rows,
            });
        }
        let rows = self
            .rows
            .par_iter()
            .map(|row| {
                let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
                for (k, a) in row {
                    for (j, b) in &other.rows[*k] {
                        *acc.entry(*j).or_insert_with(Rational::zero) += a * b;
                    }
                }
                acc.retain(|_, v| !v.is_zero());
                acc
            })
            .collect();
        Ok(SparseMatrix {
            n_rows: self.n_rows,
            n_cols: other.n_cols,
            rows,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (i, row) in other.rows.iter().enumerate() {
            for (j, v) in row {
                out.add_to(i, *j, v);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (i, row) in other.rows.iter().enumerate() {
            for (j, v) in row {
                out.add_to(i, *j, &-v);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zeros(self.n_rows, self.n_cols);
        }
        let mut out = self.clone();
        for row in &mut out.rows {
            for v in row.values_mut() {
                *v *= c;
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.n_cols, self.n_rows);
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                out.rows[*j].insert(i, v.clone());
            }
        }
        out
    }

    /// Kronecker product; the left factor is the most significant index.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.n_rows * other.n_rows, self.n_cols * other.n_cols);
        for (i, row) in self.rows.iter().enumerate() {
            for (j, a) in row {
                for (k, orow) in other.rows.iter().enumerate() {
                    for (l, b) in orow {
                        out.rows[i * other.n_rows + k].insert(j * other.n_cols + l, a * b);
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut acc = Self::identity(self.n_rows);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BTreeMap::is_empty)
    }

    pub fn row_sums(&self) -> Vec<Rational> {
        self.rows
            .iter()
            .map(|r| r.values().fold(Rational::zero(), |a, v| a + v))
            .collect()
    }

    pub fn is_row_stochastic(&self) -> bool {
        self.rows.iter().all(|r| r.values().all(|v| !v.is_negative()))
            && self.row_sums().iter().all(One::is_one)
    }

    /// Largest absolute entry and the lexicographically first position
    /// attaining a nonzero entry (not necessarily the maximum).
    pub fn max_abs(&self) -> (Rational, Option<(usize, usize)>) {
        let mut best = Rational::zero();
        let mut first = None;
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                if first.is_none() {
                    first = Some((i, *j));
                }
                let a = v.abs();
                if a > best {
                    best = a;
                }
            }
        }
        (best, first)
    }

    /// Matrix conjugated by a permutation of the basis: entry
    /// `(perm[i], perm[j])` of the result is entry `(i, j)` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n_rows);
        assert!(self.is_square());
        let mut out = Self::square(self.n_rows);
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                out.rows[perm[i]].insert(perm[*j], v.clone());
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        (0..self.n_rows)
            .map(|i| (0..self.n_cols).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// `{states, entries: [[i, j, "p/q"], ...]}`.
    pub fn to_json(&self, states: Option<Vec<String>>) -> serde_json::Value {
        let states =
            states.unwrap_or_else(|| (0..self.n_rows).map(|i| i.to_string()).collect::<Vec<_>>());
        let entries: Vec<_> = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |(j, v)| json!([i, j, v.to_string()])))
            .collect();
        json!({ "states": states, "entries": entries })
    }
}

/// Places a local operator on consecutive tensor factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SiteEmbedding {
    pub n_factors: usize,
    pub local_dim: usize,
    /// First factor touched (0-based).
    pub position: usize,
}

impl SiteEmbedding {
    pub fn new(n_factors: usize, local_dim: usize, position: usize) -> Self {
        SiteEmbedding {
            n_factors,
            local_dim,
            position,
        }
    }

    /// `1^{⊗position} ⊗ local ⊗ 1^{⊗rest}`; `local` may span several factors.
    pub fn embed(&self, local: &SparseMatrix) -> Result<SparseMatrix> {
        let span = factor_span(local.n_rows(), self.local_dim)?;
        if self.position + span > self.n_factors {
            return Err(Error::InvalidParameter(format!(
                "operator on {span} factors does not fit at position {} of {}",
                self.position, self.n_factors
            )));
        }
        let left = SparseMatrix::identity(self.local_dim.pow(self.position as u32));
        let right =
            SparseMatrix::identity(self.local_dim.pow((self.n_factors - self.position - span) as u32));
        Ok(left.kron(local).kron(&right))
    }
}

fn factor_span(dim: usize, local_dim: usize) -> Result<usize> {
    let mut span = 0;
    let mut d = 1;
    while d < dim {
        d *= local_dim;
        span += 1;
    }
    if d != dim {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: dim,
        });
    }
    Ok(span)
}

impl fmt::Display for SparseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dense = self.to_dense();
        let cells: Vec<Vec<String>> = dense
            .iter()
            .map(|r| r.iter().map(ToString::to_string).collect())
            .collect();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
        for row in cells {
            let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            writeln!(f, "[{}]", line.join(" "))?;
        }
        Ok(())
    }
}
