//! Exact rationals and the q-deformed integers, factorials, binomials and
//! Pochhammer symbols, all in the q^2 parameterisation used by the rates.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use num_rational::BigRational as Rational;

/// `n/d` as an exact rational. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"`, or a terminating decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((whole, frac)) = s.split_once('.') {
        if s.contains('/') || frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("bad decimal {s:?}")));
        }
        let digits: BigInt = format!("{whole}{frac}")
            .parse()
            .map_err(|_| Error::Parse(format!("bad decimal {s:?}")))?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(digits, den));
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator in {s:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational denominator in {s:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `q^e` for any integer exponent. `q` must be nonzero when `e < 0`.
pub fn pow(q: &Rational, e: i64) -> Rational {
    if e >= 0 {
        num_traits::pow(q.clone(), e as usize)
    } else {
        num_traits::pow(q.recip(), e.unsigned_abs() as usize)
    }
}

/// Table of integer powers of a fixed base, for hot loops.
#[derive(Clone, Debug)]
pub struct Powers {
    base: Rational,
    pos: Vec<Rational>,
    neg: Vec<Rational>,
}

impl Powers {
    pub fn new(base: &Rational, max_abs: usize) -> Self {
        let mut pos = Vec::with_capacity(max_abs + 1);
        let mut neg = Vec::with_capacity(max_abs + 1);
        pos.push(Rational::one());
        neg.push(Rational::one());
        let inv = base.recip();
        for i in 0..max_abs {
            pos.push(&pos[i] * base);
            neg.push(&neg[i] * &inv);
        }
        Powers {
            base: base.clone(),
            pos,
            neg,
        }
    }

    pub fn get(&self, e: i64) -> Rational {
        let idx = e.unsigned_abs() as usize;
        let table = if e >= 0 { &self.pos } else { &self.neg };
        match table.get(idx) {
            Some(v) => v.clone(),
            None => pow(&self.base, e),
        }
    }
}

/// `[n]_{q^2} = (1 - q^{2n}) / (1 - q^2)`.
pub fn q_int(n: u32, q: &Rational) -> Result<Rational> {
    if q.is_one() {
        return Err(Error::QEqualsOne);
    }
    let q2 = q * q;
    Ok((Rational::one() - pow(&q2, n as i64)) / (Rational::one() - q2))
}

pub fn q_factorial(n: u32, q: &Rational) -> Result<Rational> {
    let mut acc = Rational::one();
    for i in 1..=n {
        acc *= q_int(i, q)?;
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum BinomialConvention {
    /// The plain ratio of q^2-factorials.
    #[default]
    Standard,
    /// `Standard * q^{-k(n-k)}`, invariant under q -> 1/q.
    Symmetric,
}

/// Gaussian binomial in the q^2 parameterisation; zero outside `0 <= k <= n`.
/// At `q = 1` this is the ordinary binomial coefficient.
pub fn q_binomial(n: i64, k: i64, q: &Rational, convention: BinomialConvention) -> Rational {
    if k < 0 || n < 0 || k > n {
        return Rational::zero();
    }
    let standard = if q.is_one() {
        let mut acc = Rational::one();
        for i in 0..k {
            acc = acc * int(n - i) / int(i + 1);
        }
        acc
    } else {
        // q != 1 so none of these q-factorials divide by zero unless q = -1
        let num = q_factorial(n as u32, q).expect("q != 1");
        let den = q_factorial(k as u32, q).expect("q != 1") * q_factorial((n - k) as u32, q).expect("q != 1");
        num / den
    };
    match convention {
        BinomialConvention::Standard => standard,
        BinomialConvention::Symmetric => standard * pow(q, -k * (n - k)),
    }
}

/// `(a; base)_n = (1 - a)(1 - a base) ... (1 - a base^{n-1})`.
pub fn q_pochhammer(a: &Rational, base: &Rational, n: u32) -> Rational {
    let mut acc = Rational::one();
    let mut term = a.clone();
    for _ in 0..n {
        acc *= Rational::one() - &term;
        term *= base;
    }
    acc
}

/// Validated deformation parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct QParams {
    pub q: Rational,
    pub big_q: Option<Rational>,
    pub m: Option<u32>,
}

impl QParams {
    pub fn new(q: Rational, big_q: Option<Rational>, m: Option<u32>) -> Result<Self> {
        check_unit_interval("q", &q)?;
        if let Some(bq) = &big_q {
            check_unit_interval("Q", bq)?;
        }
        if m == Some(0) {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        Ok(QParams { q, big_q, m })
    }
}

/// Rejects values outside the open interval (0, 1).
pub fn check_unit_interval(name: &str, x: &Rational) -> Result<()> {
    if !x.is_positive() || *x >= Rational::one() {
        return Err(Error::InvalidParameter(format!(
            "{name} = {x} must lie strictly inside (0, 1)"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn term_sum(n: u32, q: &Rational) -> Rational {
        let q2 = q * q;
        let mut acc = Rational::zero();
        let mut t = Rational::one();
        for _ in 0..n {
            acc += &t;
            t *= &q2;
        }
        acc
    }

    #[test]
    fn q_int_values() {
        let h = rat(1, 2);
        assert_eq!(q_int(0, &h).unwrap(), int(0));
        assert_eq!(q_int(1, &rat(2, 7)).unwrap(), int(1));
        assert_eq!(q_int(3, &h).unwrap(), rat(21, 16));
        assert_eq!(q_int(3, &int(1)), Err(Error::QEqualsOne));
    }

    #[test]
    fn q_factorial_values() {
        let h = rat(1, 2);
        assert_eq!(q_factorial(0, &h).unwrap(), int(1));
        assert_eq!(q_factorial(1, &h).unwrap(), int(1));
        assert_eq!(q_factorial(3, &h).unwrap(), rat(105, 64));
    }

    #[test]
    fn q_binomial_values() {
        let q = rat(1, 3);
        let q2 = &q * &q;
        let std = BinomialConvention::Standard;
        let sym = BinomialConvention::Symmetric;
        assert_eq!(q_binomial(2, 3, &q, std), int(0));
        assert_eq!(q_binomial(3, -1, &q, std), int(0));
        assert_eq!(q_binomial(3, 0, &q, std), int(1));
        let expected = int(1) + &q2 + &q2 * &q2;
        assert_eq!(q_binomial(3, 2, &q, std), expected);
        assert_eq!(q_binomial(3, 2, &q, sym), q2.recip() + int(1) + &q2);
        assert_eq!(q_binomial(5, 2, &int(1), std), int(10));
    }

    #[test]
    fn pochhammer_values() {
        let q = rat(1, 2);
        let a = rat(3, 5);
        assert_eq!(q_pochhammer(&a, &q, 0), int(1));
        assert_eq!(q_pochhammer(&a, &q, 1), rat(2, 5));
        // a = q^{2(m - k2)} with m = 2, k2 = 1, base q^{-2}
        let a = pow(&q, 2);
        assert_eq!(q_pochhammer(&a, &pow(&q, -2), 1), rat(3, 4));
        assert_eq!(q_pochhammer(&a, &pow(&q, -2), 2), int(0));
    }

    #[test]
    fn parse_and_render() {
        assert_eq!(parse_rational("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rational(" -3 ").unwrap(), int(-3));
        assert_eq!(parse_rational("4/6").unwrap().to_string(), "2/3");
        assert_eq!(int(5).to_string(), "5");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert!(parse_rational("1.").is_err());
        assert!(parse_rational("1.2/3").is_err());
    }

    #[test]
    fn params_validation() {
        assert!(QParams::new(rat(1, 2), Some(rat(1, 3)), Some(2)).is_ok());
        assert!(QParams::new(int(1), None, None).is_err());
        assert!(QParams::new(rat(1, 2), Some(int(0)), None).is_err());
        assert!(QParams::new(rat(1, 2), None, Some(0)).is_err());
    }

    #[test]
    fn pascal_identity() {
        for q in [rat(1, 3), rat(1, 2), rat(2, 3)] {
            for n in 1..=12i64 {
                for k in 0..=n {
                    let lhs = q_binomial(n - 1, k - 1, &q, BinomialConvention::Standard)
                        + pow(&q, 2 * k) * q_binomial(n - 1, k, &q, BinomialConvention::Standard);
                    assert_eq!(lhs, q_binomial(n, k, &q, BinomialConvention::Standard), "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn powers_table_matches_pow() {
        let q = rat(2, 3);
        let t = Powers::new(&q, 4);
        for e in -9..=9 {
            assert_eq!(t.get(e), pow(&q, e));
        }
    }

    proptest! {
        #[test]
        fn q_int_is_geometric_sum(n in 0u32..20, p in 1i64..9, d in 10i64..13) {
            let q = rat(p, d);
            prop_assert_eq!(q_int(n, &q).unwrap(), term_sum(n, &q));
        }

        #[test]
        fn q_binomial_symmetric(n in 0i64..10, k in 0i64..10, p in 1i64..5) {
            let q = rat(p, 5);
            for conv in [BinomialConvention::Standard, BinomialConvention::Symmetric] {
                prop_assert_eq!(q_binomial(n, k, &q, conv), q_binomial(n, n - k, &q, conv));
            }
        }
    }
}
