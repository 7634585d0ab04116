//! Operators of the type-B symmetry on `(C^3)^{⊗(L+1)}`: the a-operators,
//! the coproduct `Δ^{(L)}(f_{1/2})`, the Hamiltonian and the ground-state
//! transform `G`.
//!
//! Operators here act on column vectors, so entry `(dst, src)` is the
//! coefficient of `u_dst` in the image of `u_src`. The local basis is
//! `u_{-1}, u_0, u_1` (indices 0, 1, 2), which makes the tensor basis agree
//! with the open-model state space for `r = 1`. Factor 0 is the boundary site.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::hecke::{hecke_type_b_boundary, hecke_type_b_bulk};
use crate::linalg::{OperatorMatrix, SiteEmbedding, SparseMatrix};
use crate::qnum::{self, q_factorial, Rational};
use crate::states::{right_count, Model, StateSpace};

const U_NEG: usize = 0;
const U_ZERO: usize = 1;
const U_POS: usize = 2;

/// Generators of the natural representation on `C^3`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalQOperators {
    /// `E_{-1/2}`: `u_0 -> u_{-1}`.
    pub e_minus: SparseMatrix,
    /// `F_{1/2}`: `u_0 -> u_1`.
    pub f_plus: SparseMatrix,
    /// `K_{-1/2} = diag(q, q^{-1}, 1)`.
    pub k_minus: SparseMatrix,
    pub k_minus_inv: SparseMatrix,
    /// `K_{1/2} = diag(1, q, q^{-1})`.
    pub k_plus: SparseMatrix,
    /// `k_{1/2} = K_{1/2} K_{-1/2}^{-1}`.
    pub k_half: SparseMatrix,
    /// `f_{1/2} = E_{-1/2} + Q K_{-1/2}^{-1} F_{1/2}`.
    pub f_half: SparseMatrix,
}

impl LocalQOperators {
    pub fn new(q: &Rational, big_q: &Rational) -> Result<Self> {
        let qi = q.recip();
        let one = Rational::one();
        let mut e_minus = SparseMatrix::square(3);
        e_minus.set(U_NEG, U_ZERO, one.clone());
        let mut f_plus = SparseMatrix::square(3);
        f_plus.set(U_POS, U_ZERO, one.clone());
        let k_minus = SparseMatrix::diagonal(&[q.clone(), qi.clone(), one.clone()]);
        let k_minus_inv = SparseMatrix::diagonal(&[qi.clone(), q.clone(), one.clone()]);
        let k_plus = SparseMatrix::diagonal(&[one, q.clone(), qi]);
        let k_half = k_plus.mul(&k_minus_inv)?;
        let f_half = e_minus.add(&k_minus_inv.mul(&f_plus)?.scale(big_q))?;
        Ok(LocalQOperators {
            e_minus,
            f_plus,
            k_minus,
            k_minus_inv,
            k_plus,
            k_half,
            f_half,
        })
    }

    /// `K^{-1} F` as used by the `a^-` operators.
    pub fn kinv_f(&self) -> SparseMatrix {
        self.k_minus_inv.mul(&self.f_plus).expect("3x3")
    }
}

/// `a_0`, `a_j^+` and `a_j^-` for `j = 1..=L` (index `j - 1` in the vectors).
#[derive(Clone, Debug)]
pub struct AOperators {
    pub l: usize,
    pub a0: OperatorMatrix,
    pub a_plus: Vec<OperatorMatrix>,
    pub a_minus: Vec<OperatorMatrix>,
}

fn tensor(factors: &[&SparseMatrix]) -> SparseMatrix {
    let mut acc = SparseMatrix::identity(1);
    for f in factors {
        acc = acc.kron(f);
    }
    acc
}

fn check_dim(l: usize) -> Result<()> {
    if l < 1 {
        return Err(Error::InvalidParameter("L must be at least 1".into()));
    }
    StateSpace::enumerate(Model::Open, l, 1).map(|_| ())
}

pub fn build_a_operators(l: usize, q: &Rational, big_q: &Rational) -> Result<AOperators> {
    check_dim(l)?;
    let ops = LocalQOperators::new(q, big_q)?;
    let id = SparseMatrix::identity(3);
    let kinv_f = ops.kinv_f();
    let mut factors: Vec<&SparseMatrix> = vec![&ops.f_half];
    factors.extend(std::iter::repeat_n(&ops.k_minus_inv, l));
    let a0 = tensor(&factors);
    let mut a_plus = Vec::with_capacity(l);
    let mut a_minus = Vec::with_capacity(l);
    for j in 1..=l {
        let mut fp: Vec<&SparseMatrix> = std::iter::repeat_n(&id, j).collect();
        fp.push(&ops.e_minus);
        fp.extend(std::iter::repeat_n(&ops.k_minus_inv, l - j));
        a_plus.push(tensor(&fp));
        let mut fm: Vec<&SparseMatrix> = std::iter::repeat_n(&ops.k_half, j).collect();
        fm.push(&kinv_f);
        fm.extend(std::iter::repeat_n(&ops.k_minus_inv, l - j));
        a_minus.push(tensor(&fm).scale(big_q));
    }
    Ok(AOperators {
        l,
        a0,
        a_plus,
        a_minus,
    })
}

impl AOperators {
    pub fn plus(&self, j: usize) -> &SparseMatrix {
        &self.a_plus[j - 1]
    }

    pub fn minus(&self, j: usize) -> &SparseMatrix {
        &self.a_minus[j - 1]
    }

    pub fn sum(&self) -> Result<SparseMatrix> {
        let mut acc = self.a0.clone();
        for m in self.a_plus.iter().chain(&self.a_minus) {
            acc = acc.add(m)?;
        }
        Ok(acc)
    }

    /// Largest absolute residual of each of the six q-commutation identities
    /// (over all `l < j`) and the three nilpotency identities.
    pub fn relation_residuals(&self, q: &Rational) -> Result<Vec<(&'static str, Rational)>> {
        let q2 = q * q;
        let qc = |a: &SparseMatrix, b: &SparseMatrix, c: &SparseMatrix, d: &SparseMatrix| -> Result<Rational> {
            Ok(a.mul(b)?.sub(&c.mul(d)?.scale(&q2))?.max_abs().0)
        };
        let mut res: [Rational; 6] = Default::default();
        let bump = |slot: &mut Rational, v: Rational| {
            if v > *slot {
                *slot = v;
            }
        };
        for j in 1..=self.l {
            for l in 1..j {
                bump(&mut res[0], qc(self.plus(j), self.plus(l), self.plus(l), self.plus(j))?);
                bump(&mut res[1], qc(self.minus(l), self.minus(j), self.minus(j), self.minus(l))?);
                bump(&mut res[2], qc(self.plus(l), self.minus(j), self.minus(j), self.plus(l))?);
                bump(&mut res[3], qc(self.plus(j), self.minus(l), self.minus(l), self.plus(j))?);
            }
            bump(&mut res[4], qc(self.plus(j), &self.a0, &self.a0, self.plus(j))?);
            bump(&mut res[5], qc(&self.a0, self.minus(j), self.minus(j), &self.a0)?);
        }
        let sq = |m: &SparseMatrix| m.mul(m).map(|p| p.max_abs().0);
        let mut nil_plus = Rational::zero();
        let mut nil_minus = Rational::zero();
        for j in 1..=self.l {
            bump(&mut nil_plus, sq(self.plus(j))?);
            bump(&mut nil_minus, sq(self.minus(j))?);
        }
        let [r0, r1, r2, r3, r4, r5] = res;
        Ok(vec![
            ("a+_j a+_l = q^2 a+_l a+_j", r0),
            ("a-_l a-_j = q^2 a-_j a-_l", r1),
            ("a+_l a-_j = q^2 a-_j a+_l", r2),
            ("a+_j a-_l = q^2 a-_l a+_j", r3),
            ("a+_j a0 = q^2 a0 a+_j", r4),
            ("a0 a-_j = q^2 a-_j a0", r5),
            ("a0^2 = 0", sq(&self.a0)?),
            ("(a+_y)^2 = 0", nil_plus),
            ("(a-_x)^2 = 0", nil_minus),
        ])
    }

    pub fn check_relations(&self, q: &Rational) -> Result<Vec<(&'static str, bool)>> {
        Ok(self
            .relation_residuals(q)?
            .into_iter()
            .map(|(name, r)| (name, r.is_zero()))
            .collect())
    }
}

/// `Δ^{(L)}(f_{1/2})` from the coproduct recursion
/// `Δ^{(n)} = Δ^{(n-1)} ⊗ K^{-1} + 1^{⊗n} ⊗ E + Q k^{⊗n} ⊗ K^{-1} F`.
pub fn coproduct_f(l: usize, q: &Rational, big_q: &Rational) -> Result<OperatorMatrix> {
    check_dim(l)?;
    let ops = LocalQOperators::new(q, big_q)?;
    let kinv_f = ops.kinv_f().scale(big_q);
    let mut acc = ops.f_half.clone();
    let mut k_pow = ops.k_half.clone();
    for n in 1..=l {
        let id = SparseMatrix::identity(3usize.pow(n as u32));
        acc = acc
            .kron(&ops.k_minus_inv)
            .add(&id.kron(&ops.e_minus))?
            .add(&k_pow.kron(&kinv_f))?;
        k_pow = k_pow.kron(&ops.k_half);
    }
    Ok(acc)
}

/// `H = Q T_0 + Σ_x q T_x` on `L + 1` factors.
pub fn hamiltonian(l: usize, q: &Rational, big_q: &Rational) -> Result<OperatorMatrix> {
    check_dim(l)?;
    let factors = l + 1;
    let t0 = hecke_type_b_boundary(1, big_q).scale(big_q);
    let tb = hecke_type_b_bulk(1, q).scale(q);
    let mut h = SiteEmbedding::new(factors, 3, 0).embed(&t0)?;
    for x in 0..l {
        h = h.add(&SiteEmbedding::new(factors, 3, x).embed(&tb)?)?;
    }
    Ok(h)
}

/// Particle count `d(b)`.
fn particles(b: &[i32]) -> i64 {
    b.iter().filter(|&&v| v != 0).count() as i64
}

/// Closed-form ground-state transform entry for an open configuration
/// `b` on `{0..L}` with labels in `{-1, 0, 1}`.
pub fn g_closed_form(b: &[i32], q: &Rational, big_q: &Rational) -> Rational {
    let l = b.len() as i64 - 1;
    let d1 = b[1..].iter().filter(|&&v| v == 1).count() as i64;
    let mut g = Rational::one();
    for x in 1..b.len() {
        let n = right_count(b, x, 1) as i64;
        match b[x] {
            1 => g *= big_q * qnum::pow(q, l + x as i64 - n),
            -1 => g *= qnum::pow(q, l - x as i64 - n),
            _ => {}
        }
    }
    let zeta = match b[0] {
        1 => big_q * qnum::pow(q, l - d1),
        -1 => qnum::pow(q, l - d1),
        _ => Rational::one(),
    };
    g * zeta
}

/// The rewritten form `Q^{d_1} q^{L d} Π_x q^{x - N_x} Π_y q^{-y - N_y}` with
/// site 0 included.
pub fn g_rewritten_form(b: &[i32], q: &Rational, big_q: &Rational) -> Rational {
    let l = b.len() as i64 - 1;
    let d1 = b.iter().filter(|&&v| v == 1).count() as i64;
    let mut g = qnum::pow(big_q, d1) * qnum::pow(q, l * particles(b));
    for (x, &v) in b.iter().enumerate() {
        let n = right_count(b, x, 1) as i64;
        match v {
            1 => g *= qnum::pow(q, x as i64 - n),
            -1 => g *= qnum::pow(q, -(x as i64) - n),
            _ => {}
        }
    }
    g
}

#[derive(Clone, Debug)]
pub struct GroundFrame {
    pub l: usize,
    pub space: StateSpace,
    pub h: OperatorMatrix,
    pub lambda: Rational,
    pub omega: usize,
    /// Diagonal of `G` from the closed formula.
    pub g: Vec<Rational>,
    /// Diagonal of `G` read from `S^d Ω`, normalised by `[d]! q^{-d(d-1)}`.
    pub g_from_symmetry: Vec<Rational>,
    /// Number of `d` for which each configuration appears in `S^d Ω`.
    pub appearances: Vec<u32>,
}

pub fn build_ground_frame(l: usize, q: &Rational, big_q: &Rational) -> Result<GroundFrame> {
    let space = StateSpace::enumerate(Model::Open, l, 1)?;
    let h = hamiltonian(l, q, big_q)?;
    let omega = space.index_of(&vec![0; l + 1])?;
    let lambda = h.get(omega, omega);
    for (i, v) in (0..h.n_rows()).map(|i| (i, h.get(i, omega))) {
        if i != omega && !v.is_zero() {
            return Err(Error::NotAnEigenvector);
        }
    }
    let g: Vec<Rational> = space.iter().map(|b| g_closed_form(&b, q, big_q)).collect();
    let s = coproduct_f(l, q, big_q)?;
    let n = space.len();
    let mut g_sym = vec![Rational::zero(); n];
    let mut appearances = vec![0u32; n];
    let mut v = vec![Rational::zero(); n];
    v[omega] = Rational::one();
    let mut d = 0u32;
    while v.iter().any(|x| !x.is_zero()) {
        let norm = q_factorial(d, q)? * qnum::pow(q, -(d as i64) * (d as i64 - 1));
        for (i, c) in v.iter().enumerate() {
            if !c.is_zero() {
                appearances[i] += 1;
                g_sym[i] = c / &norm;
            }
        }
        v = apply(&s, &v);
        d += 1;
    }
    Ok(GroundFrame {
        l,
        space,
        h,
        lambda,
        omega,
        g,
        g_from_symmetry: g_sym,
        appearances,
    })
}

/// Column-convention action on a vector.
fn apply(m: &SparseMatrix, v: &[Rational]) -> Vec<Rational> {
    (0..m.n_rows())
        .map(|i| m.row(i).fold(Rational::zero(), |a, (j, c)| a + c * &v[j]))
        .collect()
}

impl GroundFrame {
    pub fn g_matrix(&self) -> SparseMatrix {
        SparseMatrix::diagonal(&self.g)
    }

    pub fn g_inverse(&self) -> SparseMatrix {
        let inv: Vec<Rational> = self.g.iter().map(Rational::recip).collect();
        SparseMatrix::diagonal(&inv)
    }

    /// `G^{-1} (H - λ I) G`.
    pub fn generator(&self) -> Result<SparseMatrix> {
        let shifted = self
            .h
            .sub(&SparseMatrix::identity(self.h.n_rows()).scale(&self.lambda))?;
        self.g_inverse().mul(&shifted)?.mul(&self.g_matrix())
    }

    pub fn symmetry_route_agrees(&self) -> bool {
        self.g == self.g_from_symmetry
    }

    pub fn h_is_symmetric(&self) -> bool {
        self.h == self.h.transpose()
    }

    pub fn unique_degree(&self) -> bool {
        self.appearances.iter().all(|&a| a == 1)
    }
}

/// `[H, Δ^{(L)}(f_{1/2})] = 0`.
pub fn check_symmetry_commutation(l: usize, q: &Rational, big_q: &Rational) -> Result<bool> {
    let h = hamiltonian(l, q, big_q)?;
    let s = coproduct_f(l, q, big_q)?;
    Ok(h.mul(&s)? == s.mul(&h)?)
}

/// `([d]_{q^2}!)^{-1} Δ^{(L)}(f_{1/2})^d`.
pub fn expand_symmetry_power(l: usize, d: u32, q: &Rational, big_q: &Rational) -> Result<OperatorMatrix> {
    if d as usize > 2 * (l + 1) {
        return Err(Error::InvalidParameter(format!("d = {d} above 2(L+1)")));
    }
    let s = coproduct_f(l, q, big_q)?;
    Ok(s.pow(d)?.scale(&q_factorial(d, q)?.recip()))
}

/// Ordered product `a^+_{y_k} ⋯ a^+_{y_1} a_0 a^-_{x_1} ⋯ a^-_{x_j}` applied
/// to `Ω` and projected onto `c_b` (`a_0` only when site 0 is occupied).
pub fn ordered_coefficient(ops: &AOperators, space: &StateSpace, b: &[i32]) -> Result<Rational> {
    let n = space.len();
    let omega = space.index_of(&vec![0; b.len()])?;
    let mut v = vec![Rational::zero(); n];
    v[omega] = Rational::one();
    for x in (1..b.len()).rev().filter(|&x| b[x] == 1) {
        v = apply(ops.minus(x), &v);
    }
    if b[0] != 0 {
        v = apply(&ops.a0, &v);
    }
    for y in (1..b.len()).filter(|&y| b[y] == -1) {
        v = apply(ops.plus(y), &v);
    }
    Ok(v[space.index_of(b)?].clone())
}

/// The `Ω` column of `q^{d(d-1)} ([d]!)^{-1} Δ^d` against the ordered
/// expansion summed over configurations with `d` particles.
pub fn check_ordered_expansion(l: usize, d: u32, q: &Rational, big_q: &Rational) -> Result<bool> {
    let ops = build_a_operators(l, q, big_q)?;
    let space = StateSpace::enumerate(Model::Open, l, 1)?;
    let power = expand_symmetry_power(l, d, q, big_q)?;
    let omega = space.index_of(&vec![0; l + 1])?;
    let shift = qnum::pow(q, d as i64 * (d as i64 - 1));
    for (i, b) in space.iter().enumerate() {
        let col = power.get(i, omega) * &shift;
        let pred = if particles(&b) == d as i64 {
            ordered_coefficient(&ops, &space, &b)?
        } else {
            Rational::zero()
        };
        if col != pred {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `π(b) = G(b,b)^2`.
pub fn reversible_measure_open(l: usize, q: &Rational, big_q: &Rational) -> Result<Vec<Rational>> {
    let space = StateSpace::enumerate(Model::Open, l, 1)?;
    Ok(space
        .iter()
        .map(|b| {
            let g = g_closed_form(&b, q, big_q);
            &g * &g
        })
        .collect())
}

/// `Σ_d q^{d(d-1)} ([d]!)^{-1} Δ^d`, a finite sum by nilpotency.
pub fn symmetry_series(l: usize, q: &Rational, big_q: &Rational) -> Result<OperatorMatrix> {
    let s = coproduct_f(l, q, big_q)?;
    let n = s.n_rows();
    let mut total = SparseMatrix::square(n);
    let mut power = SparseMatrix::identity(n);
    let mut d = 0u32;
    while !power.is_zero() {
        let c = qnum::pow(q, d as i64 * (d as i64 - 1)) / q_factorial(d, q)?;
        total = total.add(&power.scale(&c))?;
        power = s.mul(&power)?;
        d += 1;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::build_open;
    use crate::qnum::{int, rat};

    fn params() -> [(Rational, Rational); 2] {
        [(rat(1, 2), rat(1, 3)), (rat(2, 3), rat(1, 5))]
    }

    #[test]
    fn local_relations() {
        let q = rat(1, 2);
        let o = LocalQOperators::new(&q, &rat(1, 3)).unwrap();
        let q2 = &q * &q;
        let q3 = &q2 * &q;
        let e_kinv = o.e_minus.mul(&o.k_minus_inv).unwrap();
        assert_eq!(e_kinv, o.k_minus_inv.mul(&o.e_minus).unwrap().scale(&q2));
        assert_eq!(o.kinv_f(), o.f_plus.mul(&o.k_minus_inv).unwrap().scale(&q.recip()));
        assert_eq!(o.f_plus.mul(&o.k_half).unwrap(), o.k_half.mul(&o.f_plus).unwrap().scale(&q3));
        assert_eq!(o.e_minus.mul(&o.k_half).unwrap(), o.k_half.mul(&o.e_minus).unwrap().scale(&q3));
        assert_eq!(o.f_half.mul(&o.k_half).unwrap(), o.k_half.mul(&o.f_half).unwrap().scale(&q3));
        assert_eq!(o.k_minus.mul(&o.k_minus_inv).unwrap(), SparseMatrix::identity(3));
    }

    #[test]
    fn a_operator_relations() {
        for (q, bq) in params() {
            for l in 1..=3 {
                let ops = build_a_operators(l, &q, &bq).unwrap();
                for (name, ok) in ops.check_relations(&q).unwrap() {
                    assert!(ok, "L={l}: {name}");
                }
            }
        }
    }

    #[test]
    fn a_operators_sum_to_coproduct() {
        let (q, bq) = (rat(1, 2), rat(1, 3));
        for l in 1..=3 {
            let ops = build_a_operators(l, &q, &bq).unwrap();
            assert_eq!(ops.sum().unwrap(), coproduct_f(l, &q, &bq).unwrap());
        }
    }

    #[test]
    fn commutation() {
        for (q, bq) in params() {
            for l in 1..=2 {
                assert!(check_symmetry_commutation(l, &q, &bq).unwrap());
            }
        }
    }

    #[test]
    fn ground_frame() {
        for (q, bq) in params() {
            for l in 1..=3 {
                let f = build_ground_frame(l, &q, &bq).unwrap();
                assert!(f.h_is_symmetric());
                assert_eq!(f.lambda, int(l as i64 + 1));
                assert!(f.symmetry_route_agrees(), "L={l}");
                assert!(f.unique_degree());
                assert_eq!(f.g[f.omega], int(1));
                assert_eq!(f.generator().unwrap(), build_open(l, 1, &q, &bq).unwrap().matrix());
            }
        }
    }

    #[test]
    fn g_single_particle() {
        let (q, bq) = (rat(1, 2), rat(1, 3));
        let l = 3;
        for x in 1..=l {
            let mut b = vec![0; l + 1];
            b[x] = 1;
            assert_eq!(g_closed_form(&b, &q, &bq), &bq * qnum::pow(&q, (l + x) as i64));
        }
    }

    #[test]
    fn rewritten_form_agrees() {
        let (q, bq) = (rat(1, 3), rat(1, 2));
        for l in 1..=3 {
            let space = StateSpace::enumerate(Model::Open, l, 1).unwrap();
            for b in space.iter() {
                assert_eq!(g_closed_form(&b, &q, &bq), g_rewritten_form(&b, &q, &bq), "{b:?}");
            }
        }
    }

    #[test]
    fn symmetry_powers() {
        let (q, bq) = (rat(1, 2), rat(1, 3));
        let n = 27;
        assert_eq!(expand_symmetry_power(2, 0, &q, &bq).unwrap(), SparseMatrix::identity(n));
        assert!(!expand_symmetry_power(2, 3, &q, &bq).unwrap().is_zero());
        assert!(expand_symmetry_power(2, 4, &q, &bq).unwrap().is_zero());
        assert!(expand_symmetry_power(2, 7, &q, &bq).is_err());
        for l in 1..=3 {
            for d in 0..=(2 * (l as u32 + 1)) {
                assert!(check_ordered_expansion(l, d, &q, &bq).unwrap(), "L={l} d={d}");
            }
        }
    }

    #[test]
    fn reversible_measure() {
        let (q, bq) = (rat(1, 2), rat(1, 3));
        let pi = reversible_measure_open(3, &q, &bq).unwrap();
        let g = build_open(3, 1, &q, &bq).unwrap().matrix();
        let space = StateSpace::enumerate(Model::Open, 3, 1).unwrap();
        assert_eq!(pi[space.index_of(&[0, 0, 0, 0]).unwrap()], int(1));
        for i in 0..g.n_rows() {
            for (j, v) in g.row(i) {
                assert_eq!(&pi[i] * v, &pi[j] * g.get(j, i));
            }
        }
    }
}
