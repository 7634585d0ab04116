//! Continuous-time generators of the three exclusion processes as sparse
//! rational matrices (row = source state).

use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::fusion::{self, Fission};
use crate::linalg::SparseMatrix;
use crate::qnum::{self, q_binomial, q_pochhammer, BinomialConvention, Rational};
use crate::states::{Model, StateSpace};

/// The four elementary rates of the bulk and boundary dynamics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateConvention {
    /// Larger label hops right past a smaller one.
    pub right_move: Rational,
    /// Larger label hops left past a smaller one.
    pub left_move: Rational,
    /// Boundary flip `-k -> k`.
    pub flip_up: Rational,
    /// Boundary flip `k -> -k`.
    pub flip_down: Rational,
}

impl RateConvention {
    /// Rates `q^2, 1, Q^2, 1` read off the stochastic local matrices.
    pub fn squared(q: &Rational, big_q: &Rational) -> Self {
        RateConvention {
            right_move: q * q,
            left_move: Rational::one(),
            flip_up: big_q * big_q,
            flip_down: Rational::one(),
        }
    }

    /// Rates `q, 1, Q, 1`.
    pub fn linear(q: &Rational, big_q: &Rational) -> Self {
        RateConvention {
            right_move: q.clone(),
            left_move: Rational::one(),
            flip_up: big_q.clone(),
            flip_down: Rational::one(),
        }
    }
}

/// Local rate table on one bond (two sites) or on the boundary site.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalRule {
    /// First site (vector position) the rule touches.
    pub position: usize,
    /// Local labels, in the row/column order of `table`.
    pub basis: Vec<Vec<i32>>,
    pub table: SparseMatrix,
}

impl LocalRule {
    pub fn rows_sum_to_zero(&self) -> bool {
        self.table.row_sums().iter().all(Zero::is_zero)
    }
}

#[derive(Clone, Debug)]
pub struct SparseGenerator {
    space: Arc<StateSpace>,
    off: SparseMatrix,
}

impl SparseGenerator {
    /// Wraps off-diagonal rates; diagonal entries of `off` are ignored.
    pub fn from_offdiagonal(space: Arc<StateSpace>, mut off: SparseMatrix) -> Result<Self> {
        if off.n_rows() != space.len() || !off.is_square() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                actual: off.n_rows(),
            });
        }
        for i in 0..off.n_rows() {
            off.set(i, i, Rational::zero());
            if let Some((j, v)) = off.row(i).find(|(_, v)| v.is_negative()) {
                return Err(Error::InvalidParameter(format!(
                    "negative rate {v} from state {i} to {j}"
                )));
            }
        }
        Ok(SparseGenerator { space, off })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn shared_space(&self) -> Arc<StateSpace> {
        Arc::clone(&self.space)
    }

    pub fn len(&self) -> usize {
        self.off.n_rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn offdiagonal(&self) -> &SparseMatrix {
        &self.off
    }

    pub fn exit_rate(&self, i: usize) -> Rational {
        self.off.row(i).fold(Rational::zero(), |a, (_, v)| a + v)
    }

    pub fn rate(&self, i: usize, j: usize) -> Rational {
        if i == j {
            -self.exit_rate(i)
        } else {
            self.off.get(i, j)
        }
    }

    pub fn transitions(&self, i: usize) -> impl Iterator<Item = (usize, &Rational)> + '_ {
        self.off.row(i)
    }

    /// Full matrix including the diagonal.
    pub fn matrix(&self) -> SparseMatrix {
        let mut m = self.off.clone();
        for i in 0..m.n_rows() {
            let d = -self.exit_rate(i);
            m.set(i, i, d);
        }
        m
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = self.matrix().to_json(Some(self.space.state_names()));
        v["model"] = json!(self.space.model().to_string());
        v
    }

    /// True when every transition stays inside its conserved sector.
    pub fn conserves_sectors(&self) -> bool {
        (0..self.len()).all(|i| {
            let s = self.space.sector(&self.space.config(i));
            self.off
                .row(i)
                .all(|(j, _)| self.space.sector(&self.space.config(j)) == s)
        })
    }
}

fn assemble(
    space: StateSpace,
    bulk: &dyn Fn(i32, i32) -> Vec<(i32, i32, Rational)>,
    boundary: Option<&dyn Fn(i32) -> Vec<(i32, Rational)>>,
) -> Result<SparseGenerator> {
    let n = space.len();
    let mut off = SparseMatrix::square(n);
    for i in 0..n {
        let c = space.config(i);
        for x in 0..c.len().saturating_sub(1) {
            for (a, b, r) in bulk(c[x], c[x + 1]) {
                let mut t = c.clone();
                t[x] = a;
                t[x + 1] = b;
                off.add_to(i, space.index_of(&t)?, &r);
            }
        }
        if let Some(bd) = boundary {
            for (a, r) in bd(c[0]) {
                let mut t = c.clone();
                t[0] = a;
                off.add_to(i, space.index_of(&t)?, &r);
            }
        }
    }
    SparseGenerator::from_offdiagonal(Arc::new(space), off)
}

fn exchange(conv: &RateConvention) -> impl Fn(i32, i32) -> Vec<(i32, i32, Rational)> + '_ {
    move |a, b| match a.cmp(&b) {
        std::cmp::Ordering::Greater => vec![(b, a, conv.right_move.clone())],
        std::cmp::Ordering::Less => vec![(b, a, conv.left_move.clone())],
        std::cmp::Ordering::Equal => vec![],
    }
}

pub fn build_msasep(l: usize, n: u32, q: &Rational) -> Result<SparseGenerator> {
    build_msasep_with(l, n, &RateConvention::squared(q, &Rational::one()))
}

pub fn build_msasep_with(l: usize, n: u32, conv: &RateConvention) -> Result<SparseGenerator> {
    if l < 2 {
        return Err(Error::InvalidParameter("closed lattice needs L >= 2".into()));
    }
    let space = StateSpace::enumerate(Model::Msasep, l, n)?;
    assemble(space, &exchange(conv), None)
}

/// Open lattice `{0..L}` with the sign-flip boundary at site 0.
pub fn build_open(l: usize, r: u32, q: &Rational, big_q: &Rational) -> Result<SparseGenerator> {
    build_open_with(l, r, &RateConvention::squared(q, big_q))
}

pub fn build_open_with(l: usize, r: u32, conv: &RateConvention) -> Result<SparseGenerator> {
    let space = StateSpace::enumerate(Model::Open, l, r)?;
    let flip = |z: i32| match z.signum() {
        -1 => vec![(-z, conv.flip_up.clone())],
        1 => vec![(-z, conv.flip_down.clone())],
        _ => vec![],
    };
    assemble(space, &exchange(conv), Some(&flip))
}

/// Bulk and boundary local rules of the open process, for inspection.
pub fn open_local_rules(r: u32, conv: &RateConvention) -> (LocalRule, LocalRule) {
    let labels: Vec<i32> = (-(r as i32)..=r as i32).collect();
    let d = labels.len();
    let idx = |v: i32| (v + r as i32) as usize;
    let mut bulk = SparseMatrix::square(d * d);
    let ex = exchange(conv);
    let mut basis2 = Vec::new();
    for &a in &labels {
        for &b in &labels {
            basis2.push(vec![a, b]);
            let i = idx(a) * d + idx(b);
            for (c, e, rate) in ex(a, b) {
                bulk.add_to(i, idx(c) * d + idx(e), &rate);
                bulk.add_to(i, i, &-rate);
            }
        }
    }
    let mut bd = SparseMatrix::square(d);
    for &z in &labels {
        let rate = match z.signum() {
            -1 => conv.flip_up.clone(),
            1 => conv.flip_down.clone(),
            _ => continue,
        };
        bd.add_to(idx(z), idx(-z), &rate);
        bd.add_to(idx(z), idx(z), &-rate);
    }
    (
        LocalRule {
            position: 0,
            basis: basis2,
            table: bulk,
        },
        LocalRule {
            position: 0,
            basis: labels.iter().map(|&v| vec![v]).collect(),
            table: bd,
        },
    )
}

/// Bond transition probability from left/right occupancies `(k1, k2)` to
/// `(k1 + k2 - l2, l2)`; includes the staying probability when `l2 = k2`.
pub fn braided_rate(m: u32, k1: u32, k2: u32, l2: u32, q: &Rational) -> Rational {
    braided_rate_with(m, k1, k2, l2, q, BinomialConvention::Standard)
}

pub fn braided_rate_with(
    m: u32,
    k1: u32,
    k2: u32,
    l2: u32,
    q: &Rational,
    conv: BinomialConvention,
) -> Rational {
    let l1 = k1 as i64 + k2 as i64 - l2 as i64;
    if k1 > m || k2 > m || l2 > m || l1 < 0 || l1 > m as i64 {
        return Rational::zero();
    }
    braided_rate_formula(m as i64, k1 as i64, k2 as i64, l2 as i64, q, conv)
}

/// The closed-form expression without the capacity checks, for formal
/// evaluation at occupancies above `m`.
pub fn braided_rate_formula(m: i64, k1: i64, k2: i64, l2: i64, q: &Rational, conv: BinomialConvention) -> Rational {
    if l2 < 0 || l2 > k1 {
        return Rational::zero();
    }
    let binom = q_binomial(k1, l2, q, conv);
    let poch = q_pochhammer(&qnum::pow(q, 2 * (m - k2)), &qnum::pow(q, -2), (k1 - l2) as u32);
    binom * poch * qnum::pow(q, 2 * (m - k2 - k1 + l2) * l2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BraidedSource {
    ClosedForm,
    FusionOracle,
}

/// Stochastic bond matrix on `(k1, k2)`, index `k1 * (m + 1) + k2`.
pub fn braided_bond_matrix(m: u32, q: &Rational, source: BraidedSource) -> Result<SparseMatrix> {
    let d = m as usize + 1;
    match source {
        BraidedSource::ClosedForm => {
            let mut p = SparseMatrix::square(d * d);
            for k1 in 0..=m {
                for k2 in 0..=m {
                    for l2 in 0..=m {
                        let v = braided_rate(m, k1, k2, l2, q);
                        if !v.is_zero() {
                            let l1 = (k1 + k2 - l2) as usize;
                            p.set(k1 as usize * d + k2 as usize, l1 * d + l2 as usize, v);
                        }
                    }
                }
            }
            Ok(p)
        }
        BraidedSource::FusionOracle => {
            let fused = fusion::fused_bond_matrix(m, q, Fission::Deterministic)?;
            let perm: Vec<usize> = (0..d * d).map(|i| (i % d) * d + i / d).collect();
            Ok(fused.permuted(&perm))
        }
    }
}

pub fn build_braided(
    l: usize,
    m: u32,
    q: &Rational,
    source: BraidedSource,
) -> Result<SparseGenerator> {
    if l < 2 {
        return Err(Error::InvalidParameter("braided lattice needs L >= 2".into()));
    }
    let space = StateSpace::enumerate(Model::Braided, l, m)?;
    let bond = braided_bond_matrix(m, q, source)?;
    let d = m as i32 + 1;
    let local = move |a: i32, b: i32| {
        let i = (a * d + b) as usize;
        bond.row(i)
            .filter(|&(j, _)| j != i)
            .map(|(j, v)| (j as i32 / d, j as i32 % d, v.clone()))
            .collect()
    };
    assemble(space, &local, None)
}
