//! The three self-duality functionals and the symmetry-derived form of the
//! open one.
//!
//! Closed-lattice sites are numbered `1..=L` (vector position + 1); open and
//! braided sites are numbered from 0 (vector position).

use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::coideal::{g_closed_form, symmetry_series};
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::qnum::{self, q_binomial, BinomialConvention, Powers, Rational};
use crate::states::{left_count, left_total, right_count, right_count_at_least, species_sites, Model, StateSpace};

/// Which configuration the counting statistic of the closed functional reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MsasepReading {
    /// `N→` of `η` (the reading that makes the duality hold).
    RightOfEta,
    /// `N→` of `ξ`.
    RightOfXi,
    /// `N←` of `η` with the opposite sign; equal up to sector constants.
    LeftOfEta,
}

fn same_len(eta: &[i32], xi: &[i32]) -> Result<()> {
    if eta.len() != xi.len() {
        return Err(Error::DimensionMismatch {
            expected: eta.len(),
            actual: xi.len(),
        });
    }
    Ok(())
}

pub fn duality_msasep(eta: &[i32], xi: &[i32], q: &Rational) -> Result<Rational> {
    duality_msasep_with(eta, xi, q, MsasepReading::RightOfEta)
}

pub fn duality_msasep_with(eta: &[i32], xi: &[i32], q: &Rational, reading: MsasepReading) -> Result<Rational> {
    same_len(eta, xi)?;
    let mut exp = 0i64;
    for (x, &k) in xi.iter().enumerate() {
        if k == 0 {
            continue;
        }
        if eta[x] < k {
            return Ok(Rational::zero());
        }
        let site = x as i64 + 1;
        exp += match reading {
            MsasepReading::RightOfEta => -2 * site - 2 * right_count_at_least(eta, x, k) as i64,
            MsasepReading::RightOfXi => -2 * site - 2 * right_count_at_least(xi, x, k) as i64,
            MsasepReading::LeftOfEta => {
                let left = eta[..x].iter().filter(|&&l| l >= k).count() as i64;
                -2 * site + 2 * left
            }
        };
    }
    Ok(qnum::pow(q, exp))
}

/// Sign of the `N←_y^{-1}(η)` term in the open functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpenSign {
    /// `q^{2y - 2 N←_y^{-1}(η)}`, the form that is self-dual.
    Minus,
    /// `q^{2y + 2 N←_y^{-1}(η)}`, kept for comparison.
    Plus,
}

pub fn duality_open(eta: &[i32], xi: &[i32], q: &Rational, big_q: &Rational) -> Result<Rational> {
    duality_open_with(eta, xi, q, big_q, OpenSign::Minus)
}

pub fn duality_open_with(
    eta: &[i32],
    xi: &[i32],
    q: &Rational,
    big_q: &Rational,
    sign: OpenSign,
) -> Result<Rational> {
    same_len(eta, xi)?;
    if let Some(&bad) = eta.iter().chain(xi).find(|v| v.abs() > 1) {
        return Err(Error::Unsupported(format!(
            "open duality is defined for r = 1 only (label {bad})"
        )));
    }
    for (x, &k) in xi.iter().enumerate() {
        if k != 0 && eta[x] != k {
            return Ok(Rational::zero());
        }
    }
    let a1_xi = species_sites(xi, 1);
    let am_xi = species_sites(xi, -1);
    let a1_eta = species_sites(eta, 1).len() as i64;
    let mut q_exp = 0i64;
    for &x in &a1_xi {
        q_exp += -2 * x as i64 - 2 * right_count(eta, x, 1) as i64;
    }
    let s = match sign {
        OpenSign::Minus => -2,
        OpenSign::Plus => 2,
    };
    for &y in &am_xi {
        q_exp += 2 * y as i64 + s * left_count(eta, y, -1) as i64 + 2 * right_count(xi, y, 1) as i64;
    }
    let n1 = a1_xi.len() as i64;
    q_exp += -2 * am_xi.len() as i64 * a1_eta + n1 * (n1 - 1);
    Ok(qnum::pow(big_q, -2 * n1) * qnum::pow(q, q_exp))
}

pub fn duality_braided(eta: &[i32], xi: &[i32], q: &Rational, m: u32) -> Result<Rational> {
    duality_braided_with(eta, xi, q, m, BinomialConvention::Standard)
}

pub fn duality_braided_with(
    eta: &[i32],
    xi: &[i32],
    q: &Rational,
    m: u32,
    conv: BinomialConvention,
) -> Result<Rational> {
    same_len(eta, xi)?;
    let m = m as i64;
    let mut value = Rational::one();
    let mut exp = 0i64;
    for (x, (&e, &k)) in eta.iter().zip(xi).enumerate() {
        if k == 0 {
            continue;
        }
        let (e, k) = (e as i64, k as i64);
        let num = q_binomial(e, k, q, conv);
        if num.is_zero() {
            return Ok(Rational::zero());
        }
        value *= num / q_binomial(m, k, q, conv);
        exp += k * (-2 * m * x as i64 + 2 * left_total(eta, x));
    }
    Ok(value * qnum::pow(q, exp))
}

/// `D(η, ξ)` over one state space; row = `η`, column = `ξ`.
#[derive(Clone, Debug)]
pub struct DualityMatrix {
    pub space: Arc<StateSpace>,
    pub entries: SparseMatrix,
}

impl DualityMatrix {
    /// Evaluates `f` on every pair, keeping nonzeros.
    pub fn build<F>(space: Arc<StateSpace>, f: F) -> Result<Self>
    where
        F: Fn(&[i32], &[i32]) -> Result<Rational> + Sync,
    {
        let n = space.len();
        let configs: Vec<Vec<i32>> = space.iter().collect();
        let rows: Vec<Vec<(usize, Rational)>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = Vec::new();
                for (j, xi) in configs.iter().enumerate() {
                    let v = f(&configs[i], xi)?;
                    if !v.is_zero() {
                        row.push((j, v));
                    }
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        let mut entries = SparseMatrix::square(n);
        for (i, row) in rows.into_iter().enumerate() {
            for (j, v) in row {
                entries.set(i, j, v);
            }
        }
        Ok(DualityMatrix { space, entries })
    }

    pub fn get(&self, eta: &[i32], xi: &[i32]) -> Result<Rational> {
        Ok(self.entries.get(self.space.index_of(eta)?, self.space.index_of(xi)?))
    }

    /// True when `self / other` is constant on each pair of conserved
    /// sectors, and both vanish together.
    pub fn ratio_constant_on_sectors(&self, other: &DualityMatrix) -> bool {
        let mut seen: std::collections::HashMap<(Vec<i64>, Vec<i64>), Rational> = Default::default();
        for i in 0..self.entries.n_rows() {
            let si = self.space.sector(&self.space.config(i));
            let cols: std::collections::BTreeSet<usize> = self
                .entries
                .row(i)
                .map(|(j, _)| j)
                .chain(other.entries.row(i).map(|(j, _)| j))
                .collect();
            for j in cols {
                let (a, b) = (self.entries.get(i, j), other.entries.get(i, j));
                if a.is_zero() || b.is_zero() {
                    return false;
                }
                let key = (si.clone(), self.space.sector(&self.space.config(j)));
                let r = a / b;
                match seen.get(&key) {
                    Some(prev) if *prev != r => return false,
                    Some(_) => {}
                    None => {
                        seen.insert(key, r);
                    }
                }
            }
        }
        true
    }
}

pub fn msasep_matrix(l: usize, n: u32, q: &Rational, reading: MsasepReading) -> Result<DualityMatrix> {
    let space = Arc::new(StateSpace::enumerate(Model::Msasep, l, n)?);
    DualityMatrix::build(space, |e, x| duality_msasep_with(e, x, q, reading))
}

pub fn open_matrix(l: usize, q: &Rational, big_q: &Rational, sign: OpenSign) -> Result<DualityMatrix> {
    let space = Arc::new(StateSpace::enumerate(Model::Open, l, 1)?);
    DualityMatrix::build(space, |e, x| duality_open_with(e, x, q, big_q, sign))
}

pub fn braided_matrix(l: usize, m: u32, q: &Rational) -> Result<DualityMatrix> {
    let space = Arc::new(StateSpace::enumerate(Model::Braided, l, m)?);
    DualityMatrix::build(space, |e, x| duality_braided(e, x, q, m))
}

/// `q^{2L d(ξ)} q^{-d(ξ)(d(ξ)-1)} (G^{-1} S G^{-1})(η, ξ)` with
/// `S = Σ_d q^{d(d-1)} Δ(f)^d / [d]!` and the closed-form `G`.
pub fn duality_open_from_symmetry(l: usize, q: &Rational, big_q: &Rational) -> Result<DualityMatrix> {
    let space = Arc::new(StateSpace::enumerate(Model::Open, l, 1)?);
    let s = symmetry_series(l, q, big_q)?;
    let configs: Vec<Vec<i32>> = space.iter().collect();
    let g_inv: Vec<Rational> = configs.iter().map(|b| g_closed_form(b, q, big_q).recip()).collect();
    let pw = Powers::new(q, 4 * (l + 1) * (l + 2));
    let mut entries = SparseMatrix::square(space.len());
    for i in 0..s.n_rows() {
        for (j, v) in s.row(i) {
            let d = configs[j].iter().filter(|&&c| c != 0).count() as i64;
            let scale = pw.get(2 * l as i64 * d - d * (d - 1));
            entries.set(i, j, v * &g_inv[i] * &g_inv[j] * scale);
        }
    }
    Ok(DualityMatrix { space, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnum::{int, q_int, rat};

    #[test]
    fn msasep_values() {
        let q = rat(1, 2);
        assert_eq!(duality_msasep(&[2, 1, 0], &[0, 0, 0], &q).unwrap(), int(1));
        assert_eq!(duality_msasep(&[1, 0, 0], &[2, 0, 0], &q).unwrap(), int(0));
        // single particle at site 2 with one particle to its right in eta
        let v = duality_msasep(&[0, 1, 1], &[0, 1, 0], &q).unwrap();
        assert_eq!(v, qnum::pow(&q, -4 - 2));
        assert!(duality_msasep(&[0, 1], &[0], &q).is_err());
    }

    #[test]
    fn open_worked_example() {
        let (q, bq) = (rat(1, 2), rat(1, 3));
        let hat = [1, -1, 1, 1];
        let xi = [1, -1, 0, 1];
        let expected = qnum::pow(&bq, -4) * qnum::pow(&q, -4 - 6 + 2 - 6 + 2 + 2);
        assert_eq!(duality_open(&hat, &xi, &q, &bq).unwrap(), expected);
        assert_eq!(duality_open(&hat, &[0, 0, 0, 0], &q, &bq).unwrap(), int(1));
        assert!(duality_open(&[2, 0], &[0, 0], &q, &bq).is_err());
    }

    #[test]
    fn open_minus_one_only() {
        let (q, bq) = (rat(1, 2), rat(1, 3));
        let eta = [0, -1, 1, -1];
        let xi = [0, -1, 0, -1];
        // 2y - 2 N<-(eta) at y = 1, 3 and the boundary term with |A_1(eta)| = 1
        let (a_minus, a_plus) = (2, 1);
        let expected = qnum::pow(&q, 2 + (6 - 2) - 2 * a_minus * a_plus);
        assert_eq!(duality_open(&eta, &xi, &q, &bq).unwrap(), expected);
    }

    #[test]
    fn braided_values() {
        let q = rat(1, 2);
        let m = 3;
        let v = duality_braided(&[3, 0], &[2, 0], &q, m).unwrap();
        let std = BinomialConvention::Standard;
        assert_eq!(v, q_binomial(3, 2, &q, std) / q_binomial(3, 2, &q, std));
        assert_eq!(duality_braided(&[1, 2], &[2, 0], &q, m).unwrap(), int(0));
        assert_eq!(duality_braided(&[1, 2], &[0, 0], &q, m).unwrap(), int(1));
        let v = duality_braided(&[2, 1], &[1, 1], &q, m).unwrap();
        let m1 = q_int(m, &q).unwrap();
        assert_eq!(v, q_int(2, &q).unwrap() / (&m1 * &m1) * qnum::pow(&q, -2 * m as i64 + 4));
    }

    #[test]
    fn msasep_readings_differ_by_sector_constants() {
        let q = rat(1, 3);
        let right = msasep_matrix(4, 2, &q, MsasepReading::RightOfEta).unwrap();
        let left = msasep_matrix(4, 2, &q, MsasepReading::LeftOfEta).unwrap();
        assert!(right.ratio_constant_on_sectors(&left));
    }

    #[test]
    fn braided_m1_matches_single_species() {
        let q = rat(1, 2);
        let b = braided_matrix(4, 1, &q).unwrap();
        let a = msasep_matrix(4, 1, &q, MsasepReading::RightOfEta).unwrap();
        assert!(b.ratio_constant_on_sectors(&a));
    }

    #[test]
    fn symmetry_form_matches() {
        for (q, bq) in [(rat(1, 2), rat(1, 3)), (rat(2, 3), rat(1, 5))] {
            for l in 1..=2 {
                let a = duality_open_from_symmetry(l, &q, &bq).unwrap();
                let b = open_matrix(l, &q, &bq, OpenSign::Minus).unwrap();
                assert_eq!(a.entries, b.entries, "L={l}");
            }
        }
    }
}
