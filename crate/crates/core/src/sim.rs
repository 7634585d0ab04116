//! Continuous-time Monte-Carlo for the three generators and the stochastic
//! form of the duality identity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::duality::{braided_matrix, msasep_matrix, open_matrix, DualityMatrix, MsasepReading, OpenSign};
use crate::error::{Error, Result};
use crate::generators::{build_braided, build_msasep, build_open, BraidedSource, SparseGenerator};
use crate::qnum::{to_f64, Rational};
use crate::states::Model;

/// Float copy of a generator for sampling.
#[derive(Clone, Debug)]
pub struct FloatChain {
    exit: Vec<f64>,
    /// Per state: targets and cumulative rates.
    jumps: Vec<Vec<(usize, f64)>>,
}

impl FloatChain {
    pub fn new(gen: &SparseGenerator) -> Self {
        let n = gen.len();
        let mut exit = Vec::with_capacity(n);
        let mut jumps = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = 0.0;
            let row: Vec<(usize, f64)> = gen
                .transitions(i)
                .map(|(j, r)| {
                    acc += to_f64(r);
                    (j, acc)
                })
                .collect();
            exit.push(acc);
            jumps.push(row);
        }
        FloatChain { exit, jumps }
    }

    pub fn len(&self) -> usize {
        self.exit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exit.is_empty()
    }

    fn step<R: Rng>(&self, state: usize, rng: &mut R) -> Option<(f64, usize)> {
        let rate = self.exit[state];
        if rate <= 0.0 {
            return None;
        }
        let hold = -(1.0 - rng.gen::<f64>()).ln() / rate;
        let u = rng.gen::<f64>() * rate;
        let row = &self.jumps[state];
        let k = row.partition_point(|&(_, c)| c <= u).min(row.len() - 1);
        Some((hold, row[k].0))
    }

    /// State at time `t_max` without recording events.
    pub fn run_to<R: Rng>(&self, start: usize, t_max: f64, rng: &mut R) -> usize {
        let mut state = start;
        let mut t = 0.0;
        while let Some((hold, next)) = self.step(state, rng) {
            t += hold;
            if t > t_max {
                break;
            }
            state = next;
        }
        state
    }
}

/// RNG for trajectory `index` of a run seeded by `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial: Vec<i32>,
    /// `(time, state index entered)`, times strictly increasing.
    pub events: Vec<(f64, usize)>,
    pub final_state: Vec<i32>,
}

pub fn run_trajectory(gen: &SparseGenerator, start: &[i32], t_max: f64, seed: u64) -> Result<Trajectory> {
    if t_max.is_nan() || t_max < 0.0 {
        return Err(Error::InvalidParameter(format!("t_max must be >= 0, got {t_max}")));
    }
    let chain = FloatChain::new(gen);
    let space = gen.space();
    let mut state = space.index_of(start)?;
    let mut rng = trajectory_rng(seed, 0);
    let mut t = 0.0;
    let mut events = Vec::new();
    while let Some((hold, next)) = chain.step(state, &mut rng) {
        t += hold;
        if t > t_max {
            break;
        }
        state = next;
        events.push((t, next));
    }
    Ok(Trajectory {
        initial: start.to_vec(),
        events,
        final_state: space.config(state),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub count: usize,
    pub seed: u64,
}

impl McEstimate {
    /// Sequential mean and `sd / sqrt(n)` over samples in index order.
    pub fn from_samples(samples: &[f64], seed: u64) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        McEstimate { mean, se, count: n, seed }
    }
}

/// `|m1 - m2| / sqrt(se1^2 + se2^2)`, 0 when both sides agree exactly.
pub fn z_score(a: &McEstimate, b: &McEstimate) -> f64 {
    let diff = (a.mean - b.mean).abs();
    let se = (a.se * a.se + b.se * b.se).sqrt();
    if diff == 0.0 {
        0.0
    } else if se == 0.0 {
        f64::INFINITY
    } else {
        diff / se
    }
}

fn sample_side(chain: &FloatChain, start: usize, values: &[f64], t: f64, n: usize, seed: u64, stream0: u64) -> Vec<f64> {
    (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = trajectory_rng(seed, stream0 + 2 * k as u64);
            values[chain.run_to(start, t, &mut rng)]
        })
        .collect()
}

/// MC estimates of `E_x[D(X(t), y)]` and `E_y[D(x, Y(t))]` from independent
/// batches (even and odd streams).
pub fn estimate_duality_gap_with(
    gen: &SparseGenerator,
    d: &DualityMatrix,
    x: &[i32],
    y: &[i32],
    t: f64,
    n_traj: usize,
    seed: u64,
) -> Result<(McEstimate, McEstimate)> {
    if n_traj == 0 {
        return Err(Error::InvalidParameter("n_traj must be at least 1".into()));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("t must be >= 0, got {t}")));
    }
    let space = gen.space();
    let (ix, iy) = (space.index_of(x)?, space.index_of(y)?);
    let n = space.len();
    let col: Vec<f64> = (0..n).map(|i| to_f64(&d.entries.get(i, iy))).collect();
    let row: Vec<f64> = (0..n).map(|j| to_f64(&d.entries.get(ix, j))).collect();
    let chain = FloatChain::new(gen);
    let s1 = sample_side(&chain, ix, &col, t, n_traj, seed, 0);
    let s2 = sample_side(&chain, iy, &row, t, n_traj, seed, 1);
    Ok((McEstimate::from_samples(&s1, seed), McEstimate::from_samples(&s2, seed)))
}

/// Model parameters for building a generator together with its duality
/// matrix.
#[derive(Clone, Debug)]
pub struct ModelParams {
    pub model: Model,
    pub l: usize,
    /// `n`, `r`, or `m`.
    pub param: u32,
    pub q: Rational,
    pub big_q: Rational,
}

pub fn build_system(p: &ModelParams) -> Result<(SparseGenerator, DualityMatrix)> {
    match p.model {
        Model::Msasep => Ok((
            build_msasep(p.l, p.param, &p.q)?,
            msasep_matrix(p.l, p.param, &p.q, MsasepReading::RightOfEta)?,
        )),
        Model::Open => {
            if p.param != 1 {
                return Err(Error::Unsupported("open duality is defined for r = 1 only".into()));
            }
            Ok((build_open(p.l, 1, &p.q, &p.big_q)?, open_matrix(p.l, &p.q, &p.big_q, OpenSign::Minus)?))
        }
        Model::Braided => Ok((
            build_braided(p.l, p.param, &p.q, BraidedSource::ClosedForm)?,
            braided_matrix(p.l, p.param, &p.q)?,
        )),
    }
}

pub fn estimate_duality_gap(
    p: &ModelParams,
    x: &[i32],
    y: &[i32],
    t: f64,
    n_traj: usize,
    seed: u64,
) -> Result<(McEstimate, McEstimate)> {
    let (gen, d) = build_system(p)?;
    estimate_duality_gap_with(&gen, &d, x, y, t, n_traj, seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactExpectation {
    /// `(e^{tL} D)(x, y)` truncated.
    pub side1: f64,
    /// `(D e^{tL^T})(x, y)` truncated.
    pub side2: f64,
    /// Bound on the omitted tail of either series.
    pub remainder_bound: f64,
}

/// Both sides of the duality identity from `Σ_{k≤K} t^k/k! L^k` applied to
/// the relevant column and row of `D`. The tail is bounded by
/// `M (tN)^{K+1}/(K+1)! · 1/(1 - tN/(K+2))` with `N` the row-sum norm of `L`
/// and `M` the largest entry used; the order must satisfy `tN < K + 2`.
pub fn exact_expectation(
    gen: &SparseGenerator,
    d: &DualityMatrix,
    x: &[i32],
    y: &[i32],
    t: f64,
    order: usize,
) -> Result<ExactExpectation> {
    let space = gen.space();
    let (ix, iy) = (space.index_of(x)?, space.index_of(y)?);
    let n = space.len();
    let chain = FloatChain::new(gen);
    let norm = 2.0 * chain.exit.iter().cloned().fold(0.0, f64::max);
    let scale = t * norm;
    if scale >= (order + 2) as f64 {
        return Err(Error::TruncationBound { order, scale });
    }
    let col: Vec<f64> = (0..n).map(|i| to_f64(&d.entries.get(i, iy))).collect();
    let row: Vec<f64> = (0..n).map(|j| to_f64(&d.entries.get(ix, j))).collect();
    let apply = |v: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let mut acc = -chain.exit[i] * v[i];
                for (j, r) in gen.transitions(i) {
                    acc += to_f64(r) * v[j];
                }
                acc
            })
            .collect()
    };
    let series = |mut v: Vec<f64>, at: usize| {
        let mut sum = v[at];
        let mut coef = 1.0;
        for k in 1..=order {
            v = apply(&v);
            coef *= t / k as f64;
            sum += coef * v[at];
        }
        sum
    };
    let m = col.iter().chain(&row).fold(0.0f64, |a, v| a.max(v.abs()));
    let mut tail = m;
    for k in 1..=order + 1 {
        tail *= scale / k as f64;
    }
    let remainder_bound = tail / (1.0 - scale / (order + 2) as f64);
    Ok(ExactExpectation {
        side1: series(col, ix),
        side2: series(row, iy),
        remainder_bound,
    })
}
