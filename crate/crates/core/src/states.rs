//! Configurations, their enumeration, and the counting statistics used by the
//! duality functionals.
//!
//! A configuration is stored as a plain label vector. Position `i` of the
//! vector is site `i + 1` for closed and braided lattices and site `i` for the
//! open lattice `{0..L}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_STATE_CAP: u128 = 10_000_000;
pub const STATE_CAP_ENV: &str = "MDL_STATE_CAP";

/// Cap from `MDL_STATE_CAP` if set and parseable, else [`DEFAULT_STATE_CAP`].
pub fn state_cap() -> u128 {
    std::env::var(STATE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_STATE_CAP)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Msasep,
    Open,
    Braided,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Msasep => "msasep",
            Model::Open => "open",
            Model::Braided => "braided",
        })
    }
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "msasep" | "closed" => Ok(Model::Msasep),
            "open" => Ok(Model::Open),
            "braided" => Ok(Model::Braided),
            other => Err(Error::Parse(format!("unknown model '{other}'"))),
        }
    }
}

/// Parses "-1 -1 1 1" or "3,0".
pub fn parse_labels(s: &str) -> Result<Vec<i32>> {
    let labels: Vec<i32> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<i32>()
                .map_err(|_| Error::Parse(format!("bad label '{t}' in '{s}'")))
        })
        .collect::<Result<_>>()?;
    if labels.is_empty() {
        return Err(Error::Parse("empty configuration".into()));
    }
    Ok(labels)
}

pub fn format_labels(labels: &[i32]) -> String {
    labels
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

/// `|{y > x : labels[y] = j}|`, positions are vector indices.
pub fn right_count(labels: &[i32], x: usize, j: i32) -> usize {
    labels[x + 1..].iter().filter(|&&l| l == j).count()
}

/// `|{y < x : labels[y] = j}|`.
pub fn left_count(labels: &[i32], x: usize, j: i32) -> usize {
    labels[..x].iter().filter(|&&l| l == j).count()
}

/// Particles strictly to the right with label at least `j`.
pub fn right_count_at_least(labels: &[i32], x: usize, j: i32) -> usize {
    labels[x + 1..].iter().filter(|&&l| l >= j).count()
}

/// Total occupancy strictly left of `x` (braided lattices).
pub fn left_total(occupancy: &[i32], x: usize) -> i64 {
    occupancy[..x].iter().map(|&v| v as i64).sum()
}

/// Positions carrying label `k`, ascending.
pub fn species_sites(labels: &[i32], k: i32) -> Vec<usize> {
    labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == k)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClosedConfig(pub Vec<i32>);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OpenConfig(pub Vec<i32>);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BraidedConfig(pub Vec<i32>);

impl ClosedConfig {
    pub fn new(labels: Vec<i32>, n: u32) -> Result<Self> {
        check_range(&labels, 0, n as i32)?;
        Ok(ClosedConfig(labels))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Count of species `j` strictly right of site `x` (sites 1..L).
    pub fn right_count(&self, x: usize, j: i32) -> usize {
        right_count(&self.0, x - 1, j)
    }

    pub fn left_count(&self, x: usize, j: i32) -> usize {
        left_count(&self.0, x - 1, j)
    }

    /// Sites (1-based) holding species `k`.
    pub fn species_sites(&self, k: i32) -> Vec<usize> {
        species_sites(&self.0, k).into_iter().map(|i| i + 1).collect()
    }
}

/// The `(x_{d(1)},…,x_1; z₀; y_1,…,y_{d(−1)})` description of a single-species
/// open configuration. `xs` and `ys` are ascending and exclude site 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeqForm {
    pub len: usize,
    pub xs: Vec<usize>,
    pub z0: i32,
    pub ys: Vec<usize>,
}

impl OpenConfig {
    pub fn new(labels: Vec<i32>, r: u32) -> Result<Self> {
        check_range(&labels, -(r as i32), r as i32)?;
        Ok(OpenConfig(labels))
    }

    /// Number of bulk sites `L`; the lattice is `{0..L}`.
    pub fn bulk_len(&self) -> usize {
        self.0.len() - 1
    }

    pub fn right_count(&self, x: usize, j: i32) -> usize {
        right_count(&self.0, x, j)
    }

    pub fn left_count(&self, x: usize, j: i32) -> usize {
        left_count(&self.0, x, j)
    }

    pub fn species_sites(&self, k: i32) -> Vec<usize> {
        species_sites(&self.0, k)
    }

    pub fn to_seq(&self) -> Result<SeqForm> {
        check_range(&self.0, -1, 1)?;
        let bulk = |k| species_sites(&self.0, k).into_iter().filter(|&x| x > 0).collect();
        Ok(SeqForm {
            len: self.0.len(),
            xs: bulk(1),
            z0: self.0[0],
            ys: bulk(-1),
        })
    }

    pub fn from_seq(seq: &SeqForm) -> Result<Self> {
        let mut labels = vec![0; seq.len];
        labels[0] = seq.z0;
        for (sites, label) in [(&seq.xs, 1), (&seq.ys, -1)] {
            if sites.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParameter("sites must be strictly increasing".into()));
            }
            for &x in sites {
                if x == 0 || x >= seq.len || labels[x] != 0 {
                    return Err(Error::InvalidParameter(format!("bad site {x} in sequence form")));
                }
                labels[x] = label;
            }
        }
        OpenConfig::new(labels, 1)
    }
}

impl BraidedConfig {
    pub fn new(occupancy: Vec<i32>, m: u32) -> Result<Self> {
        check_range(&occupancy, 0, m as i32)?;
        Ok(BraidedConfig(occupancy))
    }

    pub fn total(&self) -> i64 {
        self.0.iter().map(|&v| v as i64).sum()
    }

    /// Total occupancy strictly left of site `x` (sites 1..L).
    pub fn left_count(&self, x: usize) -> i64 {
        left_total(&self.0, x - 1)
    }

    pub fn right_count(&self, x: usize) -> i64 {
        self.0[x..].iter().map(|&v| v as i64).sum()
    }
}

fn check_range(labels: &[i32], lo: i32, hi: i32) -> Result<()> {
    match labels.iter().find(|&&l| l < lo || l > hi) {
        Some(l) => Err(Error::InvalidParameter(format!(
            "label {l} outside [{lo}, {hi}]"
        ))),
        None => Ok(()),
    }
}

/// All configurations of one model, indexed lexicographically with the first
/// site most significant and labels ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateSpace {
    model: Model,
    l: usize,
    param: u32,
    n_sites: usize,
    low: i32,
    radix: usize,
    size: usize,
}

impl StateSpace {
    /// `param` is `n`, `r` or `m` according to the model.
    pub fn enumerate(model: Model, l: usize, param: u32) -> Result<Self> {
        Self::with_cap(model, l, param, state_cap())
    }

    pub fn with_cap(model: Model, l: usize, param: u32, cap: u128) -> Result<Self> {
        if l < 1 {
            return Err(Error::InvalidParameter("L must be at least 1".into()));
        }
        if param < 1 {
            return Err(Error::InvalidParameter(format!("{model} needs a parameter >= 1")));
        }
        let (n_sites, low, radix) = match model {
            Model::Msasep => (l, 0, param as usize + 1),
            Model::Open => (l + 1, -(param as i32), 2 * param as usize + 1),
            Model::Braided => (l, 0, param as usize + 1),
        };
        let mut count: u128 = 1;
        for _ in 0..n_sites {
            count = count.saturating_mul(radix as u128);
            if count > cap {
                return Err(Error::StateCapExceeded { count, cap });
            }
        }
        Ok(StateSpace {
            model,
            l,
            param,
            n_sites,
            low,
            radix,
            size: count as usize,
        })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    /// Lattice parameter `L`.
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn param(&self) -> u32 {
        self.param
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn labels(&self) -> std::ops::RangeInclusive<i32> {
        self.low..=self.low + self.radix as i32 - 1
    }

    pub fn config(&self, mut index: usize) -> Vec<i32> {
        assert!(index < self.size, "state index out of range");
        let mut out = vec![0; self.n_sites];
        for slot in out.iter_mut().rev() {
            *slot = (index % self.radix) as i32 + self.low;
            index /= self.radix;
        }
        out
    }

    pub fn index_of(&self, labels: &[i32]) -> Result<usize> {
        if labels.len() != self.n_sites {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites,
                actual: labels.len(),
            });
        }
        let mut idx = 0usize;
        for &l in labels {
            let d = l - self.low;
            if d < 0 || d as usize >= self.radix {
                return Err(Error::InvalidParameter(format!(
                    "label {l} not valid for {}",
                    self.model
                )));
            }
            idx = idx * self.radix + d as usize;
        }
        Ok(idx)
    }

    pub fn parse(&self, s: &str) -> Result<Vec<i32>> {
        let labels = parse_labels(s)?;
        self.index_of(&labels)?;
        Ok(labels)
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<i32>> + '_ {
        (0..self.size).map(|i| self.config(i))
    }

    /// Conserved quantities: per-species counts (closed), per-|k| counts
    /// (open), total occupancy (braided).
    pub fn sector(&self, labels: &[i32]) -> Vec<i64> {
        match self.model {
            Model::Msasep => (1..=self.param as i32)
                .map(|k| labels.iter().filter(|&&l| l == k).count() as i64)
                .collect(),
            Model::Open => (1..=self.param as i32)
                .map(|k| labels.iter().filter(|&&l| l.abs() == k).count() as i64)
                .collect(),
            Model::Braided => vec![labels.iter().map(|&v| v as i64).sum()],
        }
    }

    pub fn state_names(&self) -> Vec<String> {
        self.iter().map(|c| format_labels(&c)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sizes() {
        assert_eq!(StateSpace::enumerate(Model::Msasep, 2, 1).unwrap().len(), 4);
        assert_eq!(StateSpace::enumerate(Model::Open, 1, 1).unwrap().len(), 9);
        assert_eq!(StateSpace::enumerate(Model::Braided, 2, 2).unwrap().len(), 9);
        assert_eq!(StateSpace::enumerate(Model::Msasep, 4, 3).unwrap().len(), 256);
    }

    #[test]
    fn braided_order_matches_pair_basis() {
        let s = StateSpace::enumerate(Model::Braided, 2, 2).unwrap();
        let names: Vec<_> = s.iter().collect();
        assert_eq!(names[0], vec![0, 0]);
        assert_eq!(names[1], vec![0, 1]);
        assert_eq!(names[2], vec![0, 2]);
        assert_eq!(names[3], vec![1, 0]);
    }

    #[test]
    fn cap_is_enforced() {
        let err = StateSpace::with_cap(Model::Msasep, 10, 3, 1000).unwrap_err();
        assert!(matches!(err, Error::StateCapExceeded { .. }));
        assert!(StateSpace::enumerate(Model::Open, 0, 1).is_err());
    }

    #[test]
    fn counting_examples() {
        let c = ClosedConfig::new(vec![1, 0, 1], 1).unwrap();
        assert_eq!(c.right_count(1, 1), 1);
        assert_eq!(c.right_count(3, 1), 0);
        assert_eq!(c.left_count(1, 1), 0);
        let o = OpenConfig::new(vec![-1, -1, 1, 1], 1).unwrap();
        assert_eq!(o.right_count(0, 1), 2);
        assert_eq!(o.left_count(1, -1), 1);
        let xi = OpenConfig::new(vec![1, -1, 0, 1], 1).unwrap();
        assert_eq!(xi.species_sites(1), vec![0, 3]);
        assert_eq!(xi.species_sites(-1), vec![1]);
        let b = BraidedConfig::new(vec![3, 0, 2], 3).unwrap();
        assert_eq!(b.left_count(3), 3);
        assert_eq!(b.left_count(1), 0);
    }

    #[test]
    fn parse_and_reject() {
        let s = StateSpace::enumerate(Model::Open, 3, 1).unwrap();
        assert_eq!(s.parse("-1 -1 1 1").unwrap(), vec![-1, -1, 1, 1]);
        assert_eq!(s.parse("-1,-1,1,1").unwrap(), vec![-1, -1, 1, 1]);
        assert!(s.parse("2 0 0 0").is_err());
        assert!(s.parse("0 0").is_err());
        assert!(parse_labels("a b").is_err());
    }

    #[test]
    fn seq_form_of_example() {
        let o = OpenConfig::new(vec![-1, 1, 0, -1, 1], 1).unwrap();
        let seq = o.to_seq().unwrap();
        assert_eq!(seq.xs, vec![1, 4]);
        assert_eq!(seq.ys, vec![3]);
        assert_eq!(seq.z0, -1);
        assert_eq!(OpenConfig::from_seq(&seq).unwrap(), o);
    }

    proptest! {
        #[test]
        fn index_round_trip(l in 1usize..5, n in 1u32..4, seed in any::<u64>()) {
            let s = StateSpace::enumerate(Model::Open, l, n).unwrap();
            let i = (seed % s.len() as u64) as usize;
            prop_assert_eq!(s.index_of(&s.config(i)).unwrap(), i);
        }

        #[test]
        fn counts_partition(labels in proptest::collection::vec(-2i32..=2, 1..8), j in -2i32..=2) {
            let total = species_sites(&labels, j).len();
            for x in 0..labels.len() {
                let here = usize::from(labels[x] == j);
                prop_assert_eq!(right_count(&labels, x, j) + left_count(&labels, x, j) + here, total);
            }
        }

        #[test]
        fn seq_round_trip(labels in proptest::collection::vec(-1i32..=1, 1..8)) {
            let o = OpenConfig::new(labels, 1).unwrap();
            let seq = o.to_seq().unwrap();
            prop_assert!(seq.xs.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(OpenConfig::from_seq(&seq).unwrap(), o);
        }
    }
}
