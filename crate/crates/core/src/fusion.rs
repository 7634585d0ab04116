//! The fused bond matrix built from products of `Š` on `(C^2)^{⊗2m}`, the
//! auxiliary particle process that describes it, and the rate recurrence.
//!
//! Tensor legs are numbered `1..=2m` with leg 1 the most significant bit of a
//! basis index; bit value 1 is a particle. Occupancy pairs `(a, b)` count the
//! particles in legs `1..=m` and `m+1..=2m` and have index `a * (m + 1) + b`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::generators::braided_rate;
use crate::hecke::{check_braid_relation, s_check};
use crate::linalg::{OperatorMatrix, SiteEmbedding, SparseMatrix};
use crate::qnum::{self, Rational};

pub const MAX_LEGS: u32 = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fission {
    /// Left block `1^{k1} 0^{m-k1}`, right block `0^{m-k2} 1^{k2}`.
    Deterministic,
    /// Each block arrangement weighted by `s^{inv}`, `inv` counting
    /// (particle, hole) pairs with the particle first.
    Weighted(Rational),
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    if 2 * m > MAX_LEGS {
        return Err(Error::InvalidParameter(format!(
            "m = {m} needs {} tensor legs, above the cap of {MAX_LEGS}",
            2 * m
        )));
    }
    Ok(())
}

fn leg_bit(m: u32, leg: u32) -> u32 {
    2 * m - leg
}

/// `(particles in legs 1..=m, particles in legs m+1..=2m)`.
pub fn block_counts(m: u32, state: u32) -> (u32, u32) {
    let right_mask = (1u32 << m) - 1;
    ((state >> m).count_ones(), (state & right_mask).count_ones())
}

/// The Š word, in application order to row vectors: for `j = 0..m`, legs
/// `σ_{m+j}, σ_{m+j-1}, …, σ_{1+j}`.
pub fn sigma_word(m: u32) -> Vec<u32> {
    (0..m).flat_map(|j| (1 + j..=m + j).rev()).collect()
}

fn inversions(bits: &[bool]) -> u32 {
    let mut inv = 0;
    for i in 0..bits.len() {
        if bits[i] {
            inv += bits[i + 1..].iter().filter(|&&b| !b).count() as u32;
        }
    }
    inv
}

/// Block arrangements of `k` particles in `m` slots with their `s^{inv}`
/// weights, normalised. Bits are listed most significant first.
fn block_distribution(m: u32, k: u32, s: &Rational) -> Vec<(u32, Rational)> {
    let mut out = Vec::new();
    let mut total = Rational::zero();
    for mask in 0u32..(1 << m) {
        if mask.count_ones() != k {
            continue;
        }
        let bits: Vec<bool> = (0..m).rev().map(|b| mask >> b & 1 == 1).collect();
        let w = qnum::pow(s, inversions(&bits) as i64);
        total += &w;
        out.push((mask, w));
    }
    for (_, w) in &mut out {
        *w /= &total;
    }
    out
}

/// Fission row for the occupancy pair `(k1, k2)` as a distribution on legs.
pub fn fission_row(m: u32, k1: u32, k2: u32, fission: &Fission) -> Vec<(u32, Rational)> {
    match fission {
        Fission::Deterministic => {
            let left = ((1u32 << k1) - 1) << (m - k1);
            let right = (1u32 << k2) - 1;
            vec![(left << m | right, Rational::one())]
        }
        Fission::Weighted(s) => {
            let left = block_distribution(m, k1, s);
            let right = block_distribution(m, k2, s);
            let mut out = Vec::with_capacity(left.len() * right.len());
            for (a, wa) in &left {
                for (b, wb) in &right {
                    out.push((a << m | b, wa * wb));
                }
            }
            out
        }
    }
}

/// Λ and Φ as explicit matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct FusionMaps {
    pub m: u32,
    /// `(m+1)^2 x 2^{2m}`, rows are probability vectors.
    pub lambda: SparseMatrix,
    /// `2^{2m} x (m+1)^2`, 0/1 entries.
    pub phi: SparseMatrix,
}

impl FusionMaps {
    pub fn new(m: u32, fission: &Fission) -> Result<Self> {
        check_m(m)?;
        let d = m as usize + 1;
        let n = 1usize << (2 * m);
        let mut lambda = SparseMatrix::zeros(d * d, n);
        for k1 in 0..=m {
            for k2 in 0..=m {
                for (state, w) in fission_row(m, k1, k2, fission) {
                    lambda.set(k1 as usize * d + k2 as usize, state as usize, w);
                }
            }
        }
        let mut phi = SparseMatrix::zeros(n, d * d);
        for state in 0..n as u32 {
            let (a, b) = block_counts(m, state);
            phi.set(state as usize, a as usize * d + b as usize, Rational::one());
        }
        Ok(FusionMaps { m, lambda, phi })
    }

    /// Φ∘Λ restricted to the fused space.
    pub fn is_right_inverse(&self) -> Result<bool> {
        let d = self.m as usize + 1;
        Ok(self.lambda.mul(&self.phi)? == SparseMatrix::identity(d * d))
    }
}

/// Applies `Š` on legs `(leg, leg + 1)` to a row distribution.
fn apply_sigma(m: u32, leg: u32, dist: BTreeMap<u32, Rational>, q2: &Rational) -> BTreeMap<u32, Rational> {
    let hi = leg_bit(m, leg);
    let lo = leg_bit(m, leg + 1);
    let mut out: BTreeMap<u32, Rational> = BTreeMap::new();
    let mut push = |s: u32, p: Rational| {
        if !p.is_zero() {
            *out.entry(s).or_insert_with(Rational::zero) += p;
        }
    };
    for (s, p) in dist {
        let a = s >> hi & 1;
        let b = s >> lo & 1;
        let swapped = s ^ (1 << hi) ^ (1 << lo);
        match (a, b) {
            (0, 1) => {
                push(s, &p * (Rational::one() - q2));
                push(swapped, p * q2);
            }
            (1, 0) => push(swapped, p),
            _ => push(s, p),
        }
    }
    out
}

/// `Λ · (Š word) · Φ` on occupancy pairs, by propagating each fission row.
pub fn fused_bond_matrix(m: u32, q: &Rational, fission: Fission) -> Result<OperatorMatrix> {
    check_m(m)?;
    let d = m as usize + 1;
    let q2 = q * q;
    let word = sigma_word(m);
    let mut out = SparseMatrix::square(d * d);
    for k1 in 0..=m {
        for k2 in 0..=m {
            let mut dist: BTreeMap<u32, Rational> = fission_row(m, k1, k2, &fission).into_iter().collect();
            for &leg in &word {
                dist = apply_sigma(m, leg, dist, &q2);
            }
            let row = k1 as usize * d + k2 as usize;
            for (s, p) in dist {
                let (a, b) = block_counts(m, s);
                out.add_to(row, a as usize * d + b as usize, &p);
            }
        }
    }
    Ok(out)
}

/// The full `2^{2m}`-dimensional product of embedded `Š` matrices.
pub fn fused_product_matrix(m: u32, q: &Rational) -> Result<OperatorMatrix> {
    check_m(m)?;
    if m > 4 {
        return Err(Error::Unsupported("dense product limited to m <= 4".into()));
    }
    let s = s_check(q);
    let legs = 2 * m as usize;
    let mut acc = SparseMatrix::identity(1 << legs);
    for leg in sigma_word(m) {
        let e = SiteEmbedding::new(legs, 2, leg as usize - 1).embed(&s)?;
        acc = acc.mul(&e)?;
    }
    Ok(acc)
}

/// Probability that a bond with left/right occupancies `(k1, k2)` ends with
/// `l2` on the right, read from the fused matrix. The tensor frame is the
/// lattice frame mirrored, so this is the entry `((k2, k1), (l2, l1))`.
pub fn fused_bond_probability(m: u32, k1: u32, k2: u32, l2: u32, q: &Rational) -> Result<Rational> {
    let fused = fused_bond_matrix(m, q, Fission::Deterministic)?;
    Ok(read_mirrored(&fused, m, k1, k2, l2))
}

fn read_mirrored(fused: &SparseMatrix, m: u32, k1: u32, k2: u32, l2: u32) -> Rational {
    if k1 > m || k2 > m || l2 > m || k1 + k2 < l2 || k1 + k2 - l2 > m {
        return Rational::zero();
    }
    let d = m as usize + 1;
    let l1 = (k1 + k2 - l2) as usize;
    fused.get(k2 as usize * d + k1 as usize, l2 as usize * d + l1)
}

/// Particle positions `1..=2m` stored as bit `p - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AuxState(pub u32);

impl AuxState {
    pub fn from_positions(positions: &[u32]) -> Self {
        AuxState(positions.iter().fold(0, |acc, p| acc | 1 << (p - 1)))
    }

    pub fn positions(&self) -> Vec<u32> {
        (0..32).filter(|b| self.0 >> b & 1 == 1).map(|b| b + 1).collect()
    }

    pub fn occupied(&self, p: u32) -> bool {
        p >= 1 && self.0 >> (p - 1) & 1 == 1
    }
}

fn shift_left_in(positions: &mut [u32], after: u32, hi: u32) {
    for p in positions.iter_mut() {
        if *p > after && *p <= hi {
            *p -= 1;
        }
    }
}

/// One update on the window `[lo, hi]`: the particle at `lo` (if any) jumps a
/// truncated geometric distance; a full jump hands over to the next particle,
/// a short one pulls every later particle in the window one step left. An
/// empty `lo` pulls the whole window left.
pub fn aux_sweep(state: AuxState, lo: u32, hi: u32, q: &Rational) -> Vec<(AuxState, Rational)> {
    let positions = state.positions();
    if !state.occupied(lo) {
        let mut next = positions;
        shift_left_in(&mut next, lo, hi);
        return vec![(AuxState::from_positions(&next), Rational::one())];
    }
    let q2 = q * q;
    let mut out = Vec::new();
    let start = positions.iter().position(|&p| p == lo).expect("occupied");
    let mut stack = vec![(positions, start, Rational::one())];
    while let Some((cur, active, prob)) = stack.pop() {
        let p = cur[active];
        let next = cur.get(active + 1).copied().filter(|&n| n <= hi);
        let d_max = match next {
            Some(n) => n - 1 - p,
            None => hi - p,
        };
        for j in 0..=d_max {
            let pr = if j < d_max {
                qnum::pow(&q2, j as i64) * (Rational::one() - &q2)
            } else {
                qnum::pow(&q2, d_max as i64)
            };
            if pr.is_zero() {
                continue;
            }
            let mut moved = cur.clone();
            moved[active] = p + j;
            let prob = &prob * pr;
            if j < d_max {
                shift_left_in(&mut moved, p + j + 1, hi);
                out.push((AuxState::from_positions(&moved), prob));
            } else if next.is_none() {
                out.push((AuxState::from_positions(&moved), prob));
            } else {
                stack.push((moved, active + 1, prob));
            }
        }
    }
    out
}

fn aux_initial(m: u32, k1: u32, k2: u32) -> AuxState {
    let positions: Vec<u32> = (1..=k1).chain(2 * m - k2 + 1..=2 * m).collect();
    AuxState::from_positions(&positions)
}

/// Exact law of the number of particles in `{m+1..2m}` after the `m`
/// updates; the left block starts at `{1..k1}`, the right at `{2m-k2+1..2m}`.
pub fn aux_process_distribution(m: u32, k1: u32, k2: u32, q: &Rational) -> Result<Vec<Rational>> {
    check_m(m)?;
    if k1 > m || k2 > m {
        return Err(Error::InvalidParameter(format!("occupancies ({k1}, {k2}) exceed m = {m}")));
    }
    let mut dist: BTreeMap<AuxState, Rational> = BTreeMap::new();
    dist.insert(aux_initial(m, k1, k2), Rational::one());
    for t in 0..m {
        let (lo, hi) = (m - t, 2 * m - t);
        let mut next: BTreeMap<AuxState, Rational> = BTreeMap::new();
        for (s, p) in dist {
            for (s2, p2) in aux_sweep(s, lo, hi, q) {
                *next.entry(s2).or_insert_with(Rational::zero) += &p * p2;
            }
        }
        dist = next;
    }
    let mut law = vec![Rational::zero(); m as usize + 1];
    for (s, p) in dist {
        let j = s.positions().iter().filter(|&&x| x > m).count();
        law[j] += p;
    }
    Ok(law)
}

/// Reduced chain of the recurrence argument: particles at `{1..k1}` and
/// `{m-k2+k1+1..m+k1}`, `k1` updates on windows `[k1-t, m+k1-t]`. Returns the
/// joint law of (state, times the block's first particle stayed put) after
/// each update.
fn reduced_chain(m: u32, k1: u32, k2: u32, q: &Rational) -> Vec<BTreeMap<(AuxState, u32), Rational>> {
    let positions: Vec<u32> = (1..=k1).chain(m - k2 + k1 + 1..=m + k1).collect();
    let mut dist: BTreeMap<(AuxState, u32), Rational> = BTreeMap::new();
    dist.insert((AuxState::from_positions(&positions), 0), Rational::one());
    let mut history = vec![dist.clone()];
    for t in 0..k1 {
        let (lo, hi) = (k1 - t, m + k1 - t);
        let mut next: BTreeMap<(AuxState, u32), Rational> = BTreeMap::new();
        for ((s, stays), p) in dist {
            let y1 = s.positions()[k1 as usize];
            for (s2, p2) in aux_sweep(s, lo, hi, q) {
                let stayed = u32::from(s2.positions()[k1 as usize] == y1);
                *next.entry((s2, stays + stayed)).or_insert_with(Rational::zero) += &p * p2;
            }
        }
        dist = next;
        history.push(dist.clone());
    }
    history
}

/// Checks the closed-form recurrence in `k1` and the same recurrence for the
/// auxiliary law.
pub fn check_rate_recurrence(m: u32, q: &Rational) -> Result<bool> {
    check_m(m)?;
    let mi = m as i64;
    let coef = |k1: u32, k2: u32, l2: u32, shift: i64| {
        qnum::pow(q, 2 * (mi - k2 as i64 - k1 as i64 + l2 as i64 + shift))
    };
    let p = |k1: u32, k2: u32, l2: i64| {
        if l2 < 0 {
            Rational::zero()
        } else {
            braided_rate(m, k1, k2, l2 as u32, q)
        }
    };
    for k1 in 1..=m {
        for k2 in 0..=m {
            let aux_now = aux_process_distribution(m, k1, k2, q)?;
            let aux_prev = aux_process_distribution(m, k1 - 1, k2, q)?;
            let at = |law: &[Rational], l: i64| {
                if l < 0 { Rational::zero() } else { law[l as usize].clone() }
            };
            for l2 in 0..=k1.min(m) {
                let a = coef(k1, k2, l2, 0);
                let b = Rational::one() - coef(k1, k2, l2, 1);
                let rhs = &a * p(k1 - 1, k2, l2 as i64 - 1) + &b * p(k1 - 1, k2, l2 as i64);
                if p(k1, k2, l2 as i64) != rhs {
                    return Ok(false);
                }
                let rhs_aux = &a * at(&aux_prev, l2 as i64 - 1) + &b * at(&aux_prev, l2 as i64);
                if at(&aux_now, l2 as i64) != rhs_aux {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Triples `(k1, k2, l2)` where the one-step conditional probability that
/// the block's first particle stays put differs from `q^{2(m-k2+l2-k1)}`.
pub fn conditional_step_failures(m: u32, q: &Rational) -> Result<Vec<(u32, u32, u32)>> {
    check_m(m)?;
    let mut bad = Vec::new();
    for k1 in 1..=m {
        for k2 in 1..=m {
            let hist = reduced_chain(m, k1, k2, q);
            let before = &hist[k1 as usize - 1];
            for l2 in 1..=k1 {
                let mass: Rational = before
                    .iter()
                    .filter(|((_, c), _)| *c == l2 - 1)
                    .map(|(_, p)| p.clone())
                    .fold(Rational::zero(), |a, b| a + b);
                if mass.is_zero() {
                    continue;
                }
                let stay = conditional_stay(m, k1, k2, q, l2 - 1, before);
                let expected = qnum::pow(q, 2 * (m as i64 - k2 as i64 + l2 as i64 - k1 as i64));
                if stay / &mass != expected {
                    bad.push((k1, k2, l2));
                }
            }
        }
    }
    Ok(bad)
}

fn conditional_stay(
    m: u32,
    k1: u32,
    _k2: u32,
    q: &Rational,
    count: u32,
    before: &BTreeMap<(AuxState, u32), Rational>,
) -> Rational {
    let (lo, hi) = (1, m + 1);
    let mut acc = Rational::zero();
    for ((s, c), p) in before {
        if *c != count {
            continue;
        }
        let y1 = s.positions()[k1 as usize];
        for (s2, p2) in aux_sweep(*s, lo, hi, q) {
            if s2.positions()[k1 as usize] == y1 {
                acc += p * p2;
            }
        }
    }
    acc
}

/// `Σ_1 Σ_2 Σ_1 = Σ_2 Σ_1 Σ_2` for the fused bond matrix on three sites.
pub fn check_fused_braid(m: u32, q: &Rational) -> Result<bool> {
    let sigma = fused_bond_matrix(m, q, Fission::Deterministic)?;
    check_braid_relation(&sigma)
}
