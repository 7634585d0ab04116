//! Exact verification engines, the appendix fixtures, and the named suites
//! behind `mdl verify`.

use std::collections::BTreeMap;
use std::time::Instant;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::coideal::{build_a_operators, build_ground_frame, coproduct_f, hamiltonian, reversible_measure_open};
use crate::duality::{
    braided_matrix, duality_braided, duality_open, duality_open_from_symmetry, msasep_matrix, open_matrix,
    DualityMatrix, MsasepReading, OpenSign,
};
use crate::error::{Error, Result};
use crate::fusion::{self, aux_process_distribution, check_rate_recurrence, fused_bond_matrix, Fission, FusionMaps};
use crate::generators::{
    braided_rate, braided_rate_formula, build_braided, build_msasep, build_open, BraidedSource, SparseGenerator,
};
use crate::hecke::{self, s_check};
use crate::linalg::SparseMatrix;
use crate::qnum::{self, q_int, rat, BinomialConvention, Rational};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub identity: String,
    pub params: BTreeMap<String, String>,
    pub pass: bool,
    pub max_residual: String,
    pub witness: Option<[usize; 2]>,
    pub seconds: f64,
}

impl DualityReport {
    /// Report for a residual matrix: pass iff it is identically zero.
    pub fn from_residual(identity: &str, residual: &SparseMatrix, started: Instant) -> Self {
        let (max, witness) = residual.max_abs();
        DualityReport {
            identity: identity.to_string(),
            params: BTreeMap::new(),
            pass: max.is_zero(),
            max_residual: max.to_string(),
            witness: witness.map(|(i, j)| [i, j]),
            seconds: started.elapsed().as_secs_f64(),
        }
    }

    /// Report comparing two scalars.
    pub fn from_values(identity: &str, lhs: &Rational, rhs: &Rational, started: Instant) -> Self {
        let diff = (lhs - rhs).abs();
        DualityReport {
            identity: identity.to_string(),
            params: BTreeMap::from([("lhs".to_string(), lhs.to_string()), ("rhs".to_string(), rhs.to_string())]),
            pass: diff.is_zero(),
            max_residual: diff.to_string(),
            witness: None,
            seconds: started.elapsed().as_secs_f64(),
        }
    }

    pub fn named(mut self, identity: impl Into<String>) -> Self {
        self.identity = identity.into();
        self
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serialises")
    }
}

fn check_square(expected: usize, m: &SparseMatrix) -> Result<()> {
    if m.n_rows() != expected || m.n_cols() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: m.n_rows(),
        });
    }
    Ok(())
}

/// `L D - D L^T` on a generator and a duality matrix over the same space.
pub fn check_markov_duality(gen: &SparseGenerator, d: &DualityMatrix) -> Result<DualityReport> {
    let started = Instant::now();
    check_square(gen.len(), &d.entries)?;
    let l = gen.matrix();
    let residual = l.mul(&d.entries)?.sub(&d.entries.mul(&l.transpose())?)?;
    let space = gen.space();
    Ok(DualityReport::from_residual("markov_duality", &residual, started)
        .with_param("model", space.model())
        .with_param("L", space.l())
        .with_param("param", space.param()))
}

/// Residual matrix `π(x) L(x, y) - π(y) L(y, x)`.
pub fn detailed_balance_residual(gen: &SparseMatrix, pi: &[Rational]) -> Result<SparseMatrix> {
    check_square(pi.len(), gen)?;
    let mut out = SparseMatrix::square(pi.len());
    for i in 0..pi.len() {
        for (j, v) in gen.row(i) {
            if i != j {
                out.set(i, j, &pi[i] * v - &pi[j] * gen.get(j, i));
            }
        }
    }
    Ok(out)
}

pub fn check_detailed_balance(gen: &SparseGenerator, pi: &[Rational]) -> Result<DualityReport> {
    let started = Instant::now();
    let residual = detailed_balance_residual(&gen.matrix(), pi)?;
    Ok(DualityReport::from_residual("detailed_balance", &residual, started)
        .with_param("model", gen.space().model())
        .with_param("L", gen.space().l()))
}

/// `AB - BA`.
pub fn check_commutation(a: &SparseMatrix, b: &SparseMatrix) -> Result<DualityReport> {
    let started = Instant::now();
    let residual = a.mul(b)?.sub(&b.mul(a)?)?;
    Ok(DualityReport::from_residual("commutation", &residual, started))
}

fn matrix_report(identity: &str, lhs: &SparseMatrix, rhs: &SparseMatrix, started: Instant) -> Result<DualityReport> {
    Ok(DualityReport::from_residual(identity, &lhs.sub(rhs)?, started))
}

/// The matrices printed in the appendix, typed in by hand.
pub mod fixtures {
    use super::*;

    /// `Σ c q^e`.
    fn poly(q: &Rational, terms: &[(i64, i64)]) -> Rational {
        terms.iter().map(|&(c, e)| qnum::int(c) * qnum::pow(q, e)).fold(Rational::zero(), |a, b| a + b)
    }

    fn sparse(n_rows: usize, n_cols: usize, entries: Vec<(usize, usize, Rational)>) -> SparseMatrix {
        let mut m = SparseMatrix::zeros(n_rows, n_cols);
        for (i, j, v) in entries {
            m.set(i, j, v);
        }
        m
    }

    pub fn s_matrix(q: &Rational) -> SparseMatrix {
        let p = |t: &[(i64, i64)]| poly(q, t);
        sparse(4, 4, vec![
            (0, 0, p(&[(1, 0)])),
            (1, 1, p(&[(1, 0), (-1, 2)])),
            (1, 2, p(&[(1, 2)])),
            (2, 1, p(&[(1, 0)])),
            (3, 3, p(&[(1, 0)])),
        ])
    }

    /// `S_23 S_12 S_34 S_23 - Id_16`.
    pub fn fused_16(q: &Rational) -> SparseMatrix {
        let p = |t: &[(i64, i64)]| poly(q, t);
        sparse(16, 16, vec![
            (1, 1, p(&[(-1, 2)])),
            (1, 2, p(&[(1, 2), (-1, 4)])),
            (1, 4, p(&[(1, 4)])),
            (2, 1, p(&[(1, 0), (-1, 2)])),
            (2, 2, p(&[(-1, 4), (1, 2), (-1, 0)])),
            (2, 8, p(&[(1, 4)])),
            (3, 3, p(&[(1, 6), (-1, 4), (-1, 2)])),
            (3, 5, p(&[(1, 2), (-1, 4)])),
            (3, 6, p(&[(1, 4), (-1, 6)])),
            (3, 9, p(&[(1, 4), (-1, 6)])),
            (3, 10, p(&[(1, 6), (-1, 8)])),
            (3, 12, p(&[(1, 8)])),
            (4, 1, p(&[(1, 0)])),
            (4, 4, p(&[(-1, 0)])),
            (5, 3, p(&[(1, 0), (-1, 2)])),
            (5, 5, p(&[(1, 2), (-1, 0)])),
            (6, 3, p(&[(1, 0), (-1, 2)])),
            (6, 6, p(&[(-1, 0)])),
            (6, 9, p(&[(1, 2)])),
            (7, 7, p(&[(-1, 2)])),
            (7, 11, p(&[(1, 2), (-1, 4)])),
            (7, 13, p(&[(1, 4)])),
            (8, 2, p(&[(1, 0)])),
            (8, 8, p(&[(-1, 0)])),
            (9, 3, p(&[(1, 0), (-1, 2)])),
            (9, 6, p(&[(1, 2)])),
            (9, 9, p(&[(-1, 0)])),
            (10, 3, p(&[(1, 0), (-1, 2)])),
            (10, 10, p(&[(1, 2), (-1, 0)])),
            (11, 7, p(&[(1, 0), (-1, 2)])),
            (11, 11, p(&[(-1, 4), (1, 2), (-1, 0)])),
            (11, 14, p(&[(1, 4)])),
            (12, 3, p(&[(1, 0)])),
            (12, 12, p(&[(-1, 0)])),
            (13, 7, p(&[(1, 0)])),
            (13, 13, p(&[(-1, 0)])),
            (14, 11, p(&[(1, 0)])),
            (14, 14, p(&[(-1, 0)])),
        ])
    }

    pub fn lambda(s: &Rational) -> SparseMatrix {
        let one = Rational::one();
        let a = (&one + s).recip();
        let b = s * &a;
        let a2 = &a * &a;
        sparse(9, 16, vec![
            (0, 0, one.clone()),
            (1, 1, a.clone()),
            (1, 2, b.clone()),
            (2, 3, one.clone()),
            (3, 4, a.clone()),
            (3, 8, b.clone()),
            (4, 5, a2.clone()),
            (4, 6, s * &a2),
            (4, 9, s * &a2),
            (4, 10, s * s * &a2),
            (5, 7, a.clone()),
            (5, 11, b.clone()),
            (6, 12, one.clone()),
            (7, 13, a),
            (7, 14, b),
            (8, 15, one),
        ])
    }

    pub fn phi() -> SparseMatrix {
        let cols = [0, 1, 1, 2, 3, 4, 4, 5, 3, 4, 4, 5, 6, 7, 7, 8];
        sparse(16, 9, cols.iter().enumerate().map(|(i, &j)| (i, j, Rational::one())).collect())
    }

    /// `Λ L Φ` on `Sym^2 ⊗ Sym^2`.
    pub fn llp(q: &Rational) -> SparseMatrix {
        let p = |t: &[(i64, i64)]| poly(q, t);
        let q3q = p(&[(1, 3), (1, 1)]);
        sparse(9, 9, vec![
            (1, 1, p(&[(-1, 4)])),
            (1, 3, p(&[(1, 4)])),
            (2, 2, p(&[(1, 6), (-1, 4), (-1, 2)])),
            (2, 4, p(&[(1, 0), (-1, 2)]) * &q3q * &q3q),
            (2, 6, p(&[(1, 8)])),
            (3, 1, p(&[(1, 0)])),
            (3, 3, p(&[(-1, 0)])),
            (4, 2, p(&[(1, 0), (-1, 2)])),
            (4, 4, p(&[(1, 2), (-1, 0)])),
            (5, 5, p(&[(-1, 4)])),
            (5, 7, p(&[(1, 4)])),
            (6, 2, p(&[(1, 0)])),
            (6, 6, p(&[(-1, 0)])),
            (7, 5, p(&[(1, 0)])),
            (7, 7, p(&[(-1, 0)])),
        ])
    }

    /// Diagonal of `G`.
    pub fn g_diagonal(q: &Rational) -> Vec<Rational> {
        let one = Rational::one();
        let mid = (q * (&one + q * q)).recip();
        vec![
            one.clone(),
            one.clone(),
            one.clone(),
            qnum::pow(q, -2),
            mid,
            one.clone(),
            qnum::pow(q, -4),
            qnum::pow(q, -2),
            one,
        ]
    }
}

/// One report per appendix fixture.
pub fn appendix_reports(q: &Rational, s_values: &[Rational]) -> Result<Vec<DualityReport>> {
    let mut out = Vec::new();
    let qs = q.to_string();
    let tag = |r: DualityReport| r.with_param("q", &qs);

    let t = Instant::now();
    out.push(tag(matrix_report("appendix_s_matrix", &s_check(q), &fixtures::s_matrix(q), t)?));

    let t = Instant::now();
    let product = fusion::fused_product_matrix(2, q)?;
    let generator16 = product.sub(&SparseMatrix::identity(16))?;
    out.push(tag(matrix_report("appendix_fused_16", &generator16, &fixtures::fused_16(q), t)?));

    let t = Instant::now();
    let phi_ok = FusionMaps::new(2, &Fission::Deterministic)?.phi;
    out.push(tag(matrix_report("appendix_phi", &phi_ok, &fixtures::phi(), t)?));

    let target = fixtures::llp(q);
    let mut first: Option<SparseMatrix> = None;
    for s in s_values {
        let t = Instant::now();
        let maps = FusionMaps::new(2, &Fission::Weighted(s.clone()))?;
        out.push(
            tag(matrix_report("appendix_lambda", &maps.lambda, &fixtures::lambda(s), t)?).with_param("s", s),
        );
        let t = Instant::now();
        let llp = maps.lambda.mul(&generator16)?.mul(&maps.phi)?;
        out.push(tag(matrix_report("appendix_llp", &llp, &target, t)?).with_param("s", s));
        let t = Instant::now();
        let fused = fused_bond_matrix(2, q, Fission::Weighted(s.clone()))?.sub(&SparseMatrix::identity(9))?;
        out.push(tag(matrix_report("appendix_llp_via_fusion", &fused, &target, t)?).with_param("s", s));
        match &first {
            None => first = Some(llp),
            Some(f) => {
                let t = Instant::now();
                out.push(tag(matrix_report("appendix_llp_s_independent", &llp, f, t)?).with_param("s", s));
            }
        }
    }

    let t = Instant::now();
    let g2: Vec<Rational> = fixtures::g_diagonal(q).iter().map(|g| g * g).collect();
    let g2_inv: Vec<Rational> = g2.iter().map(Rational::recip).collect();
    let conj = SparseMatrix::diagonal(&g2_inv).mul(&target)?.mul(&SparseMatrix::diagonal(&g2))?;
    out.push(tag(matrix_report("appendix_g_conjugation", &target.transpose(), &conj, t)?));
    Ok(out)
}

/// All appendix fixtures folded into one report.
pub fn check_appendix_fixtures(q: &Rational, s_values: &[Rational]) -> Result<DualityReport> {
    let started = Instant::now();
    let reports = appendix_reports(q, s_values)?;
    Ok(fold_reports("appendix_fixtures", &reports, started).with_param("q", q))
}

fn fold_reports(identity: &str, reports: &[DualityReport], started: Instant) -> DualityReport {
    let mut max = Rational::zero();
    for r in reports {
        let v = qnum::parse_rational(&r.max_residual).expect("residual strings are rationals");
        if v > max {
            max = v;
        }
    }
    let failed = reports.iter().find(|r| !r.pass);
    let mut out = DualityReport {
        identity: identity.to_string(),
        params: BTreeMap::new(),
        pass: failed.is_none(),
        max_residual: max.to_string(),
        witness: failed.and_then(|r| r.witness),
        seconds: started.elapsed().as_secs_f64(),
    };
    if let Some(f) = failed {
        out.params.insert("first_failure".into(), f.identity.clone());
    }
    out
}

/// The two sides of the worked open example on `{0..3}`:
/// `L(η, η̂) D(η̂, ξ)` and `D(η, ξ̂) L(ξ, ξ̂)`.
pub fn open_worked_contributions(q: &Rational, big_q: &Rational) -> Result<(Rational, Rational)> {
    let gen = build_open(3, 1, q, big_q)?;
    let sp = gen.space();
    let eta = [-1, -1, 1, 1];
    let xi = [1, -1, 0, 1];
    let eta_hat = [1, -1, 1, 1];
    let xi_hat = [-1, -1, 0, 1];
    let lhs = gen.rate(sp.index_of(&eta)?, sp.index_of(&eta_hat)?) * duality_open(&eta_hat, &xi, q, big_q)?;
    let rhs = duality_open(&eta, &xi_hat, q, big_q)? * gen.rate(sp.index_of(&xi)?, sp.index_of(&xi_hat)?);
    Ok((lhs, rhs))
}

/// The interacting-pair example at site `x > 0`: `ξ` has `1` at `x` and `-1`
/// at `x + 1`, `η` the swap. Returns `L(ξ, η) D(η, η)` and `D(ξ, ξ) L(η, ξ)`.
pub fn open_interacting_contributions(
    l: usize,
    x: usize,
    q: &Rational,
    big_q: &Rational,
) -> Result<(Rational, Rational)> {
    if x == 0 || x + 1 > l {
        return Err(Error::InvalidParameter(format!("need 0 < x < L, got x = {x}, L = {l}")));
    }
    let gen = build_open(l, 1, q, big_q)?;
    let sp = gen.space();
    let mut xi = vec![0; l + 1];
    xi[x] = 1;
    xi[x + 1] = -1;
    let mut eta = vec![0; l + 1];
    eta[x] = -1;
    eta[x + 1] = 1;
    let (i_xi, i_eta) = (sp.index_of(&xi)?, sp.index_of(&eta)?);
    let lhs = gen.rate(i_xi, i_eta) * duality_open(&eta, &eta, q, big_q)?;
    let rhs = duality_open(&xi, &xi, q, big_q)? * gen.rate(i_eta, i_xi);
    Ok((lhs, rhs))
}

/// `[3]_q (1 - q^{2m}) [2]_q / [m]_q^2`.
pub fn braided_example_one_target(m: u32, q: &Rational) -> Result<Rational> {
    let mm = q_int(m, q)?;
    Ok(q_int(3, q)? * (Rational::one() - qnum::pow(q, 2 * m as i64)) * q_int(2, q)? / (&mm * &mm))
}

/// Both sides of `LD(3 0, 1 1) = DL^T(3 0, 1 1)` assembled from the nonzero
/// contributions, evaluated formally in `m` (so `m = 2` is admissible even
/// though `3 > m`).
pub fn braided_example_one_formal(m: u32, q: &Rational) -> Result<(Rational, Rational)> {
    let mi = m as i64;
    let std = BinomialConvention::Standard;
    let p = |k1, k2, l2| braided_rate_formula(mi, k1, k2, l2, q, std);
    let lhs = p(3, 0, 1) * duality_braided(&[2, 1], &[1, 1], q, m)?
        + p(3, 0, 2) * duality_braided(&[1, 2], &[1, 1], q, m)?;
    let rhs = duality_braided(&[3, 0], &[2, 0], q, m)? * p(1, 1, 0);
    Ok((lhs, rhs))
}

/// `(LD)(η, ξ)` and `(DL^T)(η, ξ)` read from the full matrices on two sites.
pub fn braided_entry_pair(m: u32, q: &Rational, eta: &[i32], xi: &[i32]) -> Result<(Rational, Rational)> {
    let gen = build_braided(eta.len(), m, q, BraidedSource::ClosedForm)?;
    let d = braided_matrix(eta.len(), m, q)?;
    let l = gen.matrix();
    let (i, j) = (d.space.index_of(eta)?, d.space.index_of(xi)?);
    let ld: Rational = l.row(i).map(|(k, v)| v * d.entries.get(k, j)).fold(Rational::zero(), |a, b| a + b);
    let dlt: Rational = d.entries.row(i).map(|(k, v)| v * l.get(j, k)).fold(Rational::zero(), |a, b| a + b);
    Ok((ld, dlt))
}

/// The two displayed closed forms for `(2 4, 3 1)`.
pub fn braided_example_two_targets(m: u32, q: &Rational) -> Result<(Rational, Rational)> {
    if m < 4 {
        return Err(Error::InvalidParameter(format!("(2 4, 3 1) needs m >= 4, got {m}")));
    }
    let qi = |n: u32| q_int(n, q);
    let pref = qi(2)? * qi(3)? * qi(4)? / (qi(m)? * qi(m)? * qi(m - 1)? * qi(m - 2)?);
    let t = qnum::pow(q, 2 * m as i64 - 8);
    let one = Rational::one();
    let ld = &pref * (&t * qi(2)? - (&t - &one) * qi(5)?);
    let dlt = &pref * (qi(m - 2)? * (&one - q * q) * qi(3)? + qnum::pow(q, 6) * qi(2)?);
    Ok((ld, dlt))
}

/// Self-duality check for both readings of the counting statistic; returns the
/// readings that pass.
pub fn resolve_msasep_reading(q: &Rational) -> Result<Vec<MsasepReading>> {
    let gen = build_msasep(4, 2, q)?;
    let mut ok = Vec::new();
    for reading in [MsasepReading::RightOfEta, MsasepReading::RightOfXi] {
        if check_markov_duality(&gen, &msasep_matrix(4, 2, q, reading)?)?.pass {
            ok.push(reading);
        }
    }
    Ok(ok)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Msasep,
    Open,
    Braided,
    Algebra,
    Appendix,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "msasep" => Ok(Suite::Msasep),
            "open" => Ok(Suite::Open),
            "braided" => Ok(Suite::Braided),
            "algebra" => Ok(Suite::Algebra),
            "appendix" => Ok(Suite::Appendix),
            "all" => Ok(Suite::All),
            other => Err(Error::Parse(format!("unknown suite {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteParams {
    pub l: usize,
    pub n: u32,
    pub m: u32,
    pub q: Rational,
    pub big_q: Rational,
    pub s_values: Vec<Rational>,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            l: 3,
            n: 2,
            m: 2,
            q: rat(1, 2),
            big_q: rat(1, 3),
            s_values: vec![rat(1, 3), rat(1, 2)],
        }
    }
}

fn bool_report(identity: &str, ok: bool, started: Instant) -> DualityReport {
    DualityReport {
        identity: identity.to_string(),
        params: BTreeMap::new(),
        pass: ok,
        max_residual: if ok { "0".into() } else { "1".into() },
        witness: None,
        seconds: started.elapsed().as_secs_f64(),
    }
}

pub fn suite_msasep(p: &SuiteParams) -> Result<Vec<DualityReport>> {
    let mut out = Vec::new();
    let gen = build_msasep(p.l, p.n, &p.q)?;
    let d = msasep_matrix(p.l, p.n, &p.q, MsasepReading::RightOfEta)?;
    out.push(check_markov_duality(&gen, &d)?.named("msasep_self_duality").with_param("q", &p.q));

    let t = Instant::now();
    let readings = resolve_msasep_reading(&p.q)?;
    out.push(
        bool_report("msasep_reading_search", readings == [MsasepReading::RightOfEta], t)
            .with_param("passing", format!("{readings:?}")),
    );

    let t = Instant::now();
    let left = msasep_matrix(p.l, p.n, &p.q, MsasepReading::LeftOfEta)?;
    out.push(bool_report("msasep_left_form_sector_constant", d.ratio_constant_on_sectors(&left), t));
    Ok(out)
}

pub fn suite_open(p: &SuiteParams) -> Result<Vec<DualityReport>> {
    let mut out = Vec::new();
    let tag = |r: DualityReport| r.with_param("q", &p.q).with_param("Q", &p.big_q);
    let gen = build_open(p.l, 1, &p.q, &p.big_q)?;
    let d = open_matrix(p.l, &p.q, &p.big_q, OpenSign::Minus)?;
    out.push(tag(check_markov_duality(&gen, &d)?.named("open_self_duality")));

    let t = Instant::now();
    let (lhs, rhs) = open_worked_contributions(&p.q, &p.big_q)?;
    let target = qnum::pow(&p.big_q, -2) * qnum::pow(&p.q, -10);
    out.push(tag(DualityReport::from_values("open_worked_example_lhs", &lhs, &target, t)));
    out.push(tag(DualityReport::from_values("open_worked_example_rhs", &rhs, &target, t)));

    if p.l >= 2 {
        let t = Instant::now();
        let (lhs, rhs) = open_interacting_contributions(p.l, 1, &p.q, &p.big_q)?;
        out.push(tag(DualityReport::from_values("open_interacting_pair_sides_agree", &lhs, &rhs, t)));
    }

    let pi = reversible_measure_open(p.l, &p.q, &p.big_q)?;
    out.push(tag(check_detailed_balance(&gen, &pi)?.named("open_reversible_g_squared")));
    Ok(out)
}

pub fn suite_braided(p: &SuiteParams) -> Result<Vec<DualityReport>> {
    let mut out = Vec::new();
    let q = &p.q;
    let l = p.l.max(2);
    let gen = build_braided(l, p.m, q, BraidedSource::ClosedForm)?;
    let d = braided_matrix(l, p.m, q)?;
    out.push(check_markov_duality(&gen, &d)?.named("braided_self_duality").with_param("q", q));

    let t = Instant::now();
    let (lhs, rhs) = braided_example_one_formal(p.m, q)?;
    let target = braided_example_one_target(p.m, q)?;
    out.push(DualityReport::from_values("braided_example_30_11_ld", &lhs, &target, t).with_param("m", p.m));
    out.push(DualityReport::from_values("braided_example_30_11_dlt", &rhs, &target, t).with_param("m", p.m));

    let t = Instant::now();
    let triangle = oracle_triangle_residual(p.m, q)?;
    out.push(DualityReport::from_residual("braided_oracle_triangle", &triangle, t).with_param("m", p.m));

    let t = Instant::now();
    out.push(bool_report("braided_rate_recurrence", check_rate_recurrence(p.m, q)?, t).with_param("m", p.m));

    if p.m == 2 {
        let two = build_braided(2, 2, q, BraidedSource::ClosedForm)?;
        out.push(check_detailed_balance(&two, &appendix_measure_lattice(&two, q)?)?.named("braided_reversible_appendix_g"));
    }
    Ok(out)
}

/// `G^{-2}` from the appendix moved to lattice order: the lattice pair
/// `(k1, k2)` is the fused pair `(k2, k1)`.
pub fn appendix_measure_lattice(gen: &SparseGenerator, q: &Rational) -> Result<Vec<Rational>> {
    let g = fixtures::g_diagonal(q);
    gen.space()
        .iter()
        .map(|c| match c.as_slice() {
            [k1, k2] => Ok((&g[(*k2 * 3 + *k1) as usize] * &g[(*k2 * 3 + *k1) as usize]).recip()),
            _ => Err(Error::Unsupported("appendix measure is for two sites".into())),
        })
        .collect()
}

/// Stacked differences between the closed form, the fused matrix, and the
/// auxiliary law, as one `(m+1)^2 x 2(m+1)^2` residual.
pub fn oracle_triangle_residual(m: u32, q: &Rational) -> Result<SparseMatrix> {
    let d = m as usize + 1;
    let closed = crate::generators::braided_bond_matrix(m, q, BraidedSource::ClosedForm)?;
    let fused = crate::generators::braided_bond_matrix(m, q, BraidedSource::FusionOracle)?;
    let mut out = SparseMatrix::zeros(d * d, 2 * d * d);
    for k1 in 0..=m {
        for k2 in 0..=m {
            let row = k1 as usize * d + k2 as usize;
            let law = aux_process_distribution(m, k1, k2, q)?;
            for (l2, pa) in law.iter().enumerate() {
                let l1 = (k1 + k2) as i64 - l2 as i64;
                let cf = braided_rate(m, k1, k2, l2 as u32, q);
                if l1 >= 0 && l1 <= m as i64 {
                    out.set(row, l1 as usize * d + l2, &cf - pa);
                } else if !pa.is_zero() {
                    out.set(row, d * d, pa.clone());
                }
            }
            for j in 0..d * d {
                out.set(row, d * d + j, closed.get(row, j) - fused.get(row, j));
            }
        }
    }
    Ok(out)
}

pub fn suite_algebra(p: &SuiteParams) -> Result<Vec<DualityReport>> {
    let mut out = Vec::new();
    let (q, bq) = (&p.q, &p.big_q);
    let one = Rational::one();
    let qi = q.recip();
    let bqi = bq.recip();
    let push = |out: &mut Vec<DualityReport>, name: &str, t: Instant, m: Result<SparseMatrix>| -> Result<()> {
        out.push(DualityReport::from_residual(name, &m?, t).with_param("q", q).with_param("Q", bq));
        Ok(())
    };

    let ra = hecke::r_matrix_type_a(2, q);
    push(&mut out, "type_a_braid", Instant::now(), hecke::braid_residual(&ra))?;
    push(&mut out, "type_a_quadratic", Instant::now(), hecke::quadratic_residual(&ra, &(&one - &qi), &qi))?;

    let (r, s) = (q.clone(), bq.clone());
    let two = hecke::r_matrix_two_param(2, &r, &s).scale(&s);
    push(&mut out, "two_param_braid", Instant::now(), hecke::braid_residual(&two))?;
    push(&mut out, "two_param_quadratic", Instant::now(), hecke::quadratic_residual(&two, &(&s - &r), &(&r * &s)))?;

    let tb = hecke::hecke_type_b_bulk(1, q);
    let t0 = hecke::hecke_type_b_boundary(1, bq);
    push(&mut out, "type_b_bulk_braid", Instant::now(), hecke::braid_residual(&tb))?;
    push(&mut out, "type_b_bulk_quadratic", Instant::now(), hecke::quadratic_residual(&tb, &(&qi - q), &one))?;
    push(&mut out, "type_b_boundary_quadratic", Instant::now(), hecke::quadratic_residual(&t0, &(&bqi - bq), &one))?;
    push(&mut out, "type_b_mixed", Instant::now(), hecke::type_b_mixed_residual(&t0, &tb))?;
    push(&mut out, "far_commutation", Instant::now(), hecke::far_commutation_residual(&tb))?;

    let t = Instant::now();
    let g = hecke::bulk_gauge(1, q);
    let ginv = SparseMatrix::diagonal(&(0..9).map(|i| g.get(i, i).recip()).collect::<Vec<_>>());
    let conj = ginv.mul(&tb.scale(q))?.mul(&g)?;
    push(&mut out, "bulk_gauge_stochastic", t, conj.sub(&hecke::stochastic_bulk(1, q)))?;
    let t = Instant::now();
    let g0 = hecke::boundary_gauge(1, bq);
    let g0inv = SparseMatrix::diagonal(&(0..3).map(|i| g0.get(i, i).recip()).collect::<Vec<_>>());
    let conj0 = g0inv.mul(&t0.scale(bq))?.mul(&g0)?;
    push(&mut out, "boundary_gauge_stochastic", t, conj0.sub(&hecke::stochastic_boundary(1, bq)))?;

    push(&mut out, "s_matrix_braid", Instant::now(), hecke::braid_residual(&s_check(q)))?;
    for m in 1..=p.m.min(3) {
        let t = Instant::now();
        let sigma = fused_bond_matrix(m, q, Fission::Deterministic)?;
        out.push(DualityReport::from_residual("fused_braid", &hecke::braid_residual(&sigma)?, t).with_param("m", m));
    }

    let lc = p.l.min(3);
    let ops = build_a_operators(lc, q, bq)?;
    for (name, res) in ops.relation_residuals(q)? {
        let t = Instant::now();
        out.push(DualityReport {
            identity: format!("a_operator: {name}"),
            params: BTreeMap::from([("L".to_string(), lc.to_string())]),
            pass: res.is_zero(),
            max_residual: res.to_string(),
            witness: None,
            seconds: t.elapsed().as_secs_f64(),
        });
    }

    let l2 = p.l.min(2);
    let h = hamiltonian(l2, q, bq)?;
    let f = coproduct_f(l2, q, bq)?;
    out.push(check_commutation(&h, &f)?.named("hamiltonian_symmetry_commute").with_param("L", l2));

    let t = Instant::now();
    let frame = build_ground_frame(lc, q, bq)?;
    out.push(bool_report("ground_state_g_matches_formula", frame.symmetry_route_agrees() && frame.unique_degree(), t).with_param("L", lc));
    let t = Instant::now();
    let open_gen = build_open(lc, 1, q, bq)?;
    push(&mut out, "ground_state_transform_generator", t, frame.generator()?.sub(&open_gen.matrix()))?;

    let t = Instant::now();
    let sym = duality_open_from_symmetry(l2, q, bq)?;
    let direct = open_matrix(l2, q, bq, OpenSign::Minus)?;
    push(&mut out, "open_duality_from_symmetry", t, sym.entries.sub(&direct.entries))?;

    Ok(out)
}

pub fn suite_appendix(p: &SuiteParams) -> Result<Vec<DualityReport>> {
    appendix_reports(&p.q, &p.s_values)
}

pub fn run_suite(suite: Suite, p: &SuiteParams) -> Result<Vec<DualityReport>> {
    match suite {
        Suite::Msasep => suite_msasep(p),
        Suite::Open => suite_open(p),
        Suite::Braided => suite_braided(p),
        Suite::Algebra => suite_algebra(p),
        Suite::Appendix => suite_appendix(p),
        Suite::All => {
            let mut out = Vec::new();
            for s in [Suite::Msasep, Suite::Open, Suite::Braided, Suite::Algebra, Suite::Appendix] {
                out.extend(run_suite(s, p)?);
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_generator_passes() {
        let space = std::sync::Arc::new(crate::states::StateSpace::enumerate(crate::states::Model::Msasep, 2, 1).unwrap());
        let gen = SparseGenerator::from_offdiagonal(space.clone(), SparseMatrix::square(4)).unwrap();
        let d = DualityMatrix::build(space, |e, x| crate::duality::duality_msasep(e, x, &rat(1, 2))).unwrap();
        let r = check_markov_duality(&gen, &d).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_residual, "0");
        assert_eq!(r.witness, None);
    }

    #[test]
    fn msasep_duality_small() {
        let q = rat(1, 2);
        let gen = build_msasep(4, 2, &q).unwrap();
        let d = msasep_matrix(4, 2, &q, MsasepReading::RightOfEta).unwrap();
        assert!(check_markov_duality(&gen, &d).unwrap().pass);
    }

    #[test]
    fn wrong_reading_fails_with_witness() {
        let q = rat(1, 2);
        let gen = build_msasep(4, 2, &q).unwrap();
        let d = msasep_matrix(4, 2, &q, MsasepReading::RightOfXi).unwrap();
        let r = check_markov_duality(&gen, &d).unwrap();
        assert!(!r.pass);
        assert!(r.witness.is_some());
        assert_eq!(resolve_msasep_reading(&q).unwrap(), vec![MsasepReading::RightOfEta]);
    }

    #[test]
    fn printed_open_sign_fails() {
        let (q, bq) = (rat(1, 2), rat(1, 3));
        let gen = build_open(2, 1, &q, &bq).unwrap();
        let plus = open_matrix(2, &q, &bq, OpenSign::Plus).unwrap();
        assert!(!check_markov_duality(&gen, &plus).unwrap().pass);
    }

    #[test]
    fn open_worked_example() {
        let (q, bq) = (rat(1, 2), rat(1, 3));
        let (lhs, rhs) = open_worked_contributions(&q, &bq).unwrap();
        let target = qnum::pow(&bq, -2) * qnum::pow(&q, -10);
        assert_eq!(lhs, target);
        assert_eq!(rhs, target);
    }

    #[test]
    fn open_interacting_pair() {
        let (q, bq) = (rat(1, 2), rat(1, 3));
        for x in 1..3 {
            let (lhs, rhs) = open_interacting_contributions(3, x, &q, &bq).unwrap();
            assert_eq!(lhs, rhs);
            assert_eq!(lhs, qnum::pow(&bq, -2));
        }
        assert!(open_interacting_contributions(3, 0, &q, &bq).is_err());
    }

    #[test]
    fn braided_examples() {
        let q = rat(1, 2);
        for m in [2, 3] {
            let (lhs, rhs) = braided_example_one_formal(m, &q).unwrap();
            let target = braided_example_one_target(m, &q).unwrap();
            assert_eq!(lhs, target, "m={m}");
            assert_eq!(rhs, target, "m={m}");
        }
        let (ld, dlt) = braided_entry_pair(3, &q, &[3, 0], &[1, 1]).unwrap();
        assert_eq!(ld, braided_example_one_target(3, &q).unwrap());
        assert_eq!(dlt, ld);
        let (ld, dlt) = braided_entry_pair(4, &q, &[2, 4], &[3, 1]).unwrap();
        let (t1, t2) = braided_example_two_targets(4, &q).unwrap();
        assert_eq!(ld, dlt);
        assert_eq!(ld, t1);
        assert_eq!(ld, t2);
    }

    #[test]
    fn appendix_all_pass() {
        for q in [rat(1, 3), rat(1, 2)] {
            for r in appendix_reports(&q, &[rat(1, 3), rat(1, 2)]).unwrap() {
                assert!(r.pass, "{} residual {}", r.identity, r.max_residual);
            }
        }
    }

    #[test]
    fn appendix_q_one_swap() {
        let s = fixtures::s_matrix(&rat(1, 1));
        assert_eq!(s.get(1, 2), rat(1, 1));
        assert_eq!(s.get(1, 1), rat(0, 1));
    }

    #[test]
    fn appendix_diagonal_entry() {
        let q = rat(1, 2);
        let f = fixtures::fused_16(&q);
        let q2 = &q * &q;
        assert_eq!(f.get(3, 3), &q2 * (&q2 * &q2 - &q2 - rat(1, 1)));
    }

    #[test]
    fn commutation_with_identity() {
        let a = hecke::s_check(&rat(1, 2));
        assert!(check_commutation(&SparseMatrix::identity(4), &a).unwrap().pass);
    }

    #[test]
    fn suites_pass_on_defaults() {
        let p = SuiteParams::default();
        let reports = run_suite(Suite::All, &p).unwrap();
        assert!(reports.len() >= 12);
        for r in &reports {
            assert!(r.pass, "{} {:?}", r.identity, r.params);
        }
    }

    #[test]
    fn report_json_shape() {
        let r = bool_report("x", true, Instant::now());
        let v = r.to_json();
        assert_eq!(v["pass"], serde_json::Value::Bool(true));
        assert!(v["witness"].is_null());
    }
}
