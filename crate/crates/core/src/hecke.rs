//! R-matrices and Hecke generators of types A and B on two tensor legs, and
//! exact checkers for their defining relations.
//!
//! A two-leg basis vector `(a, b)` over a label list `labels` has index
//! `pos(a) * d + pos(b)`. Row = source, column = target.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{OperatorMatrix, SiteEmbedding, SparseMatrix};
use crate::qnum::Rational;

struct TwoLeg {
    labels: Vec<i32>,
    m: SparseMatrix,
}

impl TwoLeg {
    fn new(labels: Vec<i32>) -> Self {
        let d = labels.len();
        TwoLeg {
            labels,
            m: SparseMatrix::square(d * d),
        }
    }

    fn index(&self, a: i32, b: i32) -> usize {
        let pos = |v| self.labels.iter().position(|&l| l == v).expect("label");
        pos(a) * self.labels.len() + pos(b)
    }

    /// `E_{a,c} ⊗ E_{b,d}` scaled by `v`: source `(a, b)`, target `(c, d)`.
    fn add(&mut self, src: (i32, i32), dst: (i32, i32), v: &Rational) {
        let (i, j) = (self.index(src.0, src.1), self.index(dst.0, dst.1));
        self.m.add_to(i, j, v);
    }
}

/// Hecke generator built from per-pair coefficients: `diag` on `(i, i)`,
/// `down` for `(j, i) -> (i, j)`, `up` for `(i, j) -> (j, i)`, and `stay` on
/// the diagonal at `(j, i)`, always with `i < j`.
fn exchange_matrix(
    labels: Vec<i32>,
    diag: &Rational,
    down: &Rational,
    up: &Rational,
    stay: &Rational,
) -> OperatorMatrix {
    let mut t = TwoLeg::new(labels.clone());
    for &i in &labels {
        t.add((i, i), (i, i), diag);
        for &j in labels.iter().filter(|&&j| j > i) {
            t.add((j, i), (i, j), down);
            t.add((i, j), (j, i), up);
            t.add((j, i), (j, i), stay);
        }
    }
    t.m
}

fn type_a_labels(n: u32) -> Vec<i32> {
    (0..=n as i32).collect()
}

fn type_b_labels(r: u32) -> Vec<i32> {
    (-(r as i32)..=r as i32).collect()
}

/// One-parameter type-A R-matrix on `(C^{n+1})^{⊗2}`.
pub fn r_matrix_type_a(n: u32, q: &Rational) -> OperatorMatrix {
    let one = Rational::one();
    let qi = q.recip();
    exchange_matrix(type_a_labels(n), &one, &one, &qi, &(&one - &qi))
}

/// Two-parameter R-matrix; `s * R` satisfies `A^2 = (s - r) A + rs`.
pub fn r_matrix_two_param(n: u32, r: &Rational, s: &Rational) -> OperatorMatrix {
    let one = Rational::one();
    let si = s.recip();
    exchange_matrix(type_a_labels(n), &one, r, &si, &(&one - r * &si))
}

/// Type-B bulk generator over labels `{-r..r}`; `(T - q^{-1})(T + q) = 0`.
pub fn hecke_type_b_bulk(r: u32, q: &Rational) -> OperatorMatrix {
    let one = Rational::one();
    let qi = q.recip();
    exchange_matrix(type_b_labels(r), &qi, &one, &one, &(&qi - q))
}

/// Type-B boundary generator on one leg; `(T_0 - Q^{-1})(T_0 + Q) = 0`.
pub fn hecke_type_b_boundary(r: u32, big_q: &Rational) -> OperatorMatrix {
    let labels = type_b_labels(r);
    let d = labels.len();
    let pos = |v: i32| (v + r as i32) as usize;
    let qi = big_q.recip();
    let mut t = SparseMatrix::square(d);
    t.set(pos(0), pos(0), qi.clone());
    for i in 1..=r as i32 {
        t.set(pos(-i), pos(i), Rational::one());
        t.set(pos(i), pos(-i), Rational::one());
        t.set(pos(-i), pos(-i), &qi - big_q);
    }
    t
}

/// Row-stochastic bulk matrix: larger label moves right with probability q^2.
pub fn stochastic_bulk(r: u32, q: &Rational) -> OperatorMatrix {
    let one = Rational::one();
    let q2 = q * q;
    exchange_matrix(type_b_labels(r), &one, &q2, &one, &(&one - &q2))
}

/// Row-stochastic boundary matrix: `-k -> k` with probability Q^2.
pub fn stochastic_boundary(r: u32, big_q: &Rational) -> OperatorMatrix {
    let labels = type_b_labels(r);
    let d = labels.len();
    let pos = |v: i32| (v + r as i32) as usize;
    let q2 = big_q * big_q;
    let mut t = SparseMatrix::square(d);
    t.set(pos(0), pos(0), Rational::one());
    for i in 1..=r as i32 {
        t.set(pos(-i), pos(i), q2.clone());
        t.set(pos(-i), pos(-i), Rational::one() - &q2);
        t.set(pos(i), pos(-i), Rational::one());
    }
    t
}

/// Diagonal `g` with `g^{-1} (q T) g = stochastic_bulk`: weight q on every
/// ascending pair `(i, j)`, `i < j`.
pub fn bulk_gauge(r: u32, q: &Rational) -> OperatorMatrix {
    let labels = type_b_labels(r);
    let diag: Vec<Rational> = labels
        .iter()
        .flat_map(|&a| labels.iter().map(move |&b| (a, b)))
        .map(|(a, b)| if a < b { q.clone() } else { Rational::one() })
        .collect();
    SparseMatrix::diagonal(&diag)
}

/// Diagonal `g` with `g^{-1} (Q T_0) g = stochastic_boundary`.
pub fn boundary_gauge(r: u32, big_q: &Rational) -> OperatorMatrix {
    let diag: Vec<Rational> = type_b_labels(r)
        .into_iter()
        .map(|z| if z > 0 { big_q.clone() } else { Rational::one() })
        .collect();
    SparseMatrix::diagonal(&diag)
}

/// The 4x4 stochastic matrix on `R^2 ⊗ R^2`, basis `00, 01, 10, 11`.
pub fn s_check(q: &Rational) -> OperatorMatrix {
    let one = Rational::one();
    let zero = Rational::zero();
    let q2 = q * q;
    SparseMatrix::from_dense(vec![
        vec![one.clone(), zero.clone(), zero.clone(), zero.clone()],
        vec![zero.clone(), &one - &q2, q2, zero.clone()],
        vec![zero.clone(), one.clone(), zero.clone(), zero.clone()],
        vec![zero.clone(), zero.clone(), zero, one],
    ])
}

/// `Ř` on `C^2 ⊗ C^2` over labels `{1, 2}` (basis `11, 12, 21, 22`).
pub fn r_check(q: &Rational) -> OperatorMatrix {
    let mut t = TwoLeg::new(vec![1, 2]);
    let one = Rational::one();
    for i in 1..=2 {
        t.add((i, i), (i, i), q);
        for j in 1..=2 {
            if i != j {
                t.add((j, i), (i, j), &one);
            }
        }
    }
    t.add((1, 2), (1, 2), &(q - q.recip()));
    t.m
}

fn local_dim_of(a: &SparseMatrix) -> Result<usize> {
    let n = a.n_rows();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n || !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            actual: n,
        });
    }
    Ok(d)
}

/// `A_1 A_2 A_1 - A_2 A_1 A_2` with `A` on legs (1,2) and (2,3) of three.
pub fn braid_residual(a: &SparseMatrix) -> Result<SparseMatrix> {
    let d = local_dim_of(a)?;
    let a1 = SiteEmbedding::new(3, d, 0).embed(a)?;
    let a2 = SiteEmbedding::new(3, d, 1).embed(a)?;
    let lhs = a1.mul(&a2)?.mul(&a1)?;
    let rhs = a2.mul(&a1)?.mul(&a2)?;
    lhs.sub(&rhs)
}

pub fn check_braid_relation(a: &SparseMatrix) -> Result<bool> {
    Ok(braid_residual(a)?.is_zero())
}

/// `A^2 - a A - b Id`.
pub fn quadratic_residual(m: &SparseMatrix, a: &Rational, b: &Rational) -> Result<SparseMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.n_rows(),
            actual: m.n_cols(),
        });
    }
    let rhs = m.scale(a).add(&SparseMatrix::identity(m.n_rows()).scale(b))?;
    m.mul(m)?.sub(&rhs)
}

pub fn check_hecke_quadratic(m: &SparseMatrix, a: &Rational, b: &Rational) -> Result<bool> {
    Ok(quadratic_residual(m, a, b)?.is_zero())
}

/// `T_0 T_1 T_0 T_1 - T_1 T_0 T_1 T_0` with `T_0` on leg 1 and `T_1` on legs
/// (1,2).
pub fn type_b_mixed_residual(t0: &SparseMatrix, t1: &SparseMatrix) -> Result<SparseMatrix> {
    let d = t0.n_rows();
    if t1.n_rows() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            actual: t1.n_rows(),
        });
    }
    let t0 = SiteEmbedding::new(2, d, 0).embed(t0)?;
    let lhs = t0.mul(t1)?.mul(&t0)?.mul(t1)?;
    let rhs = t1.mul(&t0)?.mul(t1)?.mul(&t0)?;
    lhs.sub(&rhs)
}

pub fn check_type_b_mixed(t0: &SparseMatrix, t1: &SparseMatrix) -> Result<bool> {
    Ok(type_b_mixed_residual(t0, t1)?.is_zero())
}

/// Commutator of the embeddings on legs (1,2) and (3,4).
pub fn far_commutation_residual(a: &SparseMatrix) -> Result<SparseMatrix> {
    let d = local_dim_of(a)?;
    let a1 = SiteEmbedding::new(4, d, 0).embed(a)?;
    let a3 = SiteEmbedding::new(4, d, 2).embed(a)?;
    a1.mul(&a3)?.sub(&a3.mul(&a1)?)
}

pub fn check_far_commutation(a: &SparseMatrix) -> Result<bool> {
    Ok(far_commutation_residual(a)?.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnum::{int, rat};

    fn qs() -> [Rational; 3] {
        [rat(1, 3), rat(1, 2), rat(2, 3)]
    }

    #[test]
    fn type_a_relations() {
        for q in qs() {
            for n in 1..=2 {
                let r = r_matrix_type_a(n, &q);
                let qi = q.recip();
                assert!(check_hecke_quadratic(&r, &(int(1) - &qi), &qi).unwrap());
                let t = r.scale(&q);
                assert!(check_hecke_quadratic(&t, &(&q - int(1)), &q).unwrap());
                assert!(check_braid_relation(&r).unwrap());
                assert!(check_far_commutation(&r).unwrap());
            }
        }
    }

    #[test]
    fn type_a_fixes_equal_labels() {
        let r = r_matrix_type_a(1, &rat(1, 2));
        assert_eq!(r.get(0, 0), int(1));
        assert_eq!(r.get(3, 3), int(1));
    }

    #[test]
    fn two_param_relations() {
        let (r, s) = (rat(1, 3), rat(3, 4));
        let m = r_matrix_two_param(2, &r, &s);
        let t = m.scale(&s);
        assert!(check_hecke_quadratic(&t, &(&s - &r), &(&r * &s)).unwrap());
        assert!(check_braid_relation(&m).unwrap());
    }

    #[test]
    fn two_param_specialisations() {
        let q = rat(1, 2);
        assert_eq!(r_matrix_two_param(2, &int(1), &q), r_matrix_type_a(2, &q));
        let b = hecke_type_b_bulk(1, &q).scale(&q);
        assert_eq!(r_matrix_two_param(2, &q, &q.recip()), b);
    }

    #[test]
    fn type_b_relations() {
        for q in qs() {
            let bq = rat(1, 5);
            for r in 1..=2 {
                let t = hecke_type_b_bulk(r, &q);
                let t0 = hecke_type_b_boundary(r, &bq);
                assert!(check_hecke_quadratic(&t, &(q.recip() - &q), &int(1)).unwrap());
                assert!(check_hecke_quadratic(&t0, &(bq.recip() - &bq), &int(1)).unwrap());
                assert!(check_type_b_mixed(&t0, &t).unwrap());
                if r == 1 {
                    assert!(check_braid_relation(&t).unwrap());
                }
            }
        }
    }

    #[test]
    fn stochastic_forms_are_gauge_conjugates() {
        let (q, bq) = (rat(1, 2), rat(1, 3));
        for r in 1..=2 {
            let sb = stochastic_bulk(r, &q);
            let sd = stochastic_boundary(r, &bq);
            assert!(sb.is_row_stochastic());
            assert!(sd.is_row_stochastic());
            let g = bulk_gauge(r, &q);
            let gi = bulk_gauge(r, &q.recip());
            let conj = gi.mul(&hecke_type_b_bulk(r, &q).scale(&q)).unwrap().mul(&g).unwrap();
            assert_eq!(conj, sb);
            let g = boundary_gauge(r, &bq);
            let gi = boundary_gauge(r, &bq.recip());
            let conj = gi.mul(&hecke_type_b_boundary(r, &bq).scale(&bq)).unwrap().mul(&g).unwrap();
            assert_eq!(conj, sd);
        }
        assert!(!hecke_type_b_bulk(1, &q).scale(&q).is_row_stochastic());
    }

    #[test]
    fn s_check_properties() {
        let q = rat(1, 2);
        let s = s_check(&q);
        assert!(s.is_row_stochastic());
        assert!(check_braid_relation(&s).unwrap());
        let s1 = s_check(&int(1));
        assert_eq!(s1.get(1, 2), int(1));
        assert_eq!(s1.get(2, 1), int(1));
        assert_eq!(s1.get(1, 1), int(0));
    }

    #[test]
    fn s_check_from_r_check() {
        for q in qs() {
            let shifted = r_check(&q).sub(&SparseMatrix::identity(4).scale(&(&q - q.recip()))).unwrap();
            // label 2 -> bit 0, label 1 -> bit 1: basis 11,12,21,22 -> 11,10,01,00
            let relabelled = shifted.permuted(&[3, 2, 1, 0]);
            let g = SparseMatrix::diagonal(&[int(1), int(1), q.clone(), int(1)]);
            let gi = SparseMatrix::diagonal(&[int(1), int(1), q.recip(), int(1)]);
            let s = gi.mul(&relabelled).unwrap().mul(&g).unwrap().scale(&q);
            assert_eq!(s, s_check(&q));
        }
    }

    #[test]
    fn dimension_errors() {
        let bad = SparseMatrix::square(3);
        assert!(check_braid_relation(&bad).is_err());
        assert!(check_type_b_mixed(&SparseMatrix::square(3), &SparseMatrix::square(4)).is_err());
        assert!(check_hecke_quadratic(&SparseMatrix::identity(3), &int(1), &int(0)).unwrap());
    }
}
