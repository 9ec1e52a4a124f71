//! Benchmark instances and the measurement sweep.

mod selftest;
mod sweep;

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::model::{GroupModel, ModelError, NormMode, WeightVector};
use crate::rng;
use crate::sensing::{expander_from_rng, gaussian_from_rng, SensingError, SensingMatrix};

pub use selftest::{selftest, SelftestCheck, SelftestReport};
pub use sweep::{
    gnuplot_script, sweep, write_csv, write_json, write_outputs, write_plot_data, CsvRecord, MSummary, SweepConfig,
    SweepError, SweepReport, CSV_HEADER,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapMode {
    /// Consecutive blocks share `ceil((l - 1) / 2)` elements.
    Half,
    /// Consecutive blocks share `l - 1` elements.
    Full,
}

impl FromStr for OverlapMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "half" => Ok(OverlapMode::Half),
            "full" => Ok(OverlapMode::Full),
            _ => Err(format!("unknown overlap mode {s:?} (expected half or full)")),
        }
    }
}

impl fmt::Display for OverlapMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OverlapMode::Half => "half",
            OverlapMode::Full => "full",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockModelSpec {
    pub n: usize,
    pub block_len: usize,
    pub overlap: usize,
}

impl BlockModelSpec {
    /// Blocks of length `floor(0.02 N)`.
    pub fn new(n: usize, mode: OverlapMode) -> Result<Self, ModelError> {
        let l = n / 50;
        if l < 1 {
            return Err(ModelError::EmptyGroundSet);
        }
        let overlap = match mode {
            OverlapMode::Half => (l - 1).div_ceil(2),
            OverlapMode::Full => l - 1,
        };
        Ok(BlockModelSpec { n, block_len: l, overlap })
    }

    pub fn step(&self) -> usize {
        self.block_len - self.overlap
    }

    /// Blocks start at `0, step, 2 step, ...`; the last one reaches `N - 1` (clipped).
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = Vec::new();
        let mut start = 0;
        loop {
            let end = (start + self.block_len).min(self.n);
            groups.push((start..end).collect());
            if end == self.n {
                break;
            }
            start += self.step();
        }
        groups
    }
}

/// Block model with group budget 1 and no element budget; set `G` with
/// [`GroupModel::with_budget`].
pub fn gen_block_model(n: usize, mode: OverlapMode) -> Result<GroupModel, ModelError> {
    let spec = BlockModelSpec::new(n, mode)?;
    GroupModel::new(n, spec.groups(), 1, n)
}

/// `floor(2 ln N / ln(G l))`, at least 1.
pub fn expander_degree(n: usize, g: usize, l: usize) -> usize {
    let d = (2.0 * (n as f64).ln() / ((g * l) as f64).ln()).floor();
    if d.is_finite() && d >= 1.0 {
        d as usize
    } else {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    Gaussian,
    Expander,
}

impl MatrixKind {
    pub fn name(self) -> &'static str {
        match self {
            MatrixKind::Gaussian => "gaussian",
            MatrixKind::Expander => "expander",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialInstance {
    pub a: SensingMatrix,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub groups: Vec<usize>,
}

/// Signal on the union of `G` uniformly chosen groups with standard normal
/// entries, an `m x N` matrix of the given kind (expander degree `d`) and
/// noiseless measurements.
pub fn gen_instance(
    model: &GroupModel,
    g: usize,
    m: usize,
    kind: MatrixKind,
    d: usize,
    rng: &mut impl Rng,
) -> Result<TrialInstance, SensingError> {
    let n = model.ground_size();
    let a = match kind {
        MatrixKind::Gaussian => SensingMatrix::Dense(gaussian_from_rng(m, n, rng)?),
        MatrixKind::Expander => SensingMatrix::Expander(expander_from_rng(m, n, d, rng)?),
    };
    let mut groups = sample(rng, model.num_groups(), g.min(model.num_groups())).into_vec();
    groups.sort_unstable();
    let mask = model.cover_mask(&groups);
    let x: Vec<f64> = mask.iter().map(|&on| if on { rng.sample(StandardNormal) } else { 0.0 }).collect();
    let y = a.apply(&x)?;
    Ok(TrialInstance { a, x, y, groups })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteInstance {
    pub model: GroupModel,
    pub weights: WeightVector,
}

/// Random model with `N <= 24`, `M <= 8`, `G <= 3`, `K` one of `N`,
/// `ceil(N/2)`, 2. Weights are squared integers in `[0, 10]`, or squared
/// reals in `[0, 10)` when `float` is set.
pub fn random_suite_instance(seed: u64, float: bool) -> SuiteInstance {
    let mut r = rng::stream(seed, &[0x5017e]);
    let n = r.random_range(2..=24);
    let m = r.random_range(1..=8);
    let mut groups: Vec<Vec<usize>> = (0..m)
        .map(|_| {
            let size = r.random_range(1..=n.min(6));
            sample(&mut r, n, size).into_vec()
        })
        .collect();
    for i in 0..n {
        if !groups.iter().any(|g| g.contains(&i)) {
            let j = r.random_range(0..m);
            groups[j].push(i);
        }
    }
    let g = r.random_range(1..=m.min(3));
    let k = match r.random_range(0..3) {
        0 => n,
        1 => n.div_ceil(2),
        _ => 2.min(n),
    };
    let weights: Vec<f64> = (0..n)
        .map(|_| {
            if float {
                r.random_range(0.0..10.0f64).powi(2)
            } else {
                (r.random_range(0..=10u32) as f64).powi(2)
            }
        })
        .collect();
    SuiteInstance {
        model: GroupModel::new(n, groups, g, k).expect("suite models are valid"),
        weights: WeightVector::new(weights, NormMode::L2).expect("suite weights are valid"),
    }
}

pub fn random_suite(count: usize, seed: u64, float: bool) -> Vec<SuiteInstance> {
    (0..count as u64).map(|i| random_suite_instance(rng::derive_seed(seed, &[i]), float)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_model_examples() {
        let spec = BlockModelSpec::new(200, OverlapMode::Half).unwrap();
        assert_eq!((spec.block_len, spec.overlap, spec.step()), (4, 2, 2));
        let groups = spec.groups();
        assert_eq!(groups[0], vec![0, 1, 2, 3]);
        assert_eq!(groups[1], vec![2, 3, 4, 5]);
        assert_eq!(groups.last().unwrap(), &vec![196, 197, 198, 199]);
        assert_eq!(gen_block_model(200, OverlapMode::Half).unwrap().frequency(), 2);

        let full = gen_block_model(100, OverlapMode::Full).unwrap();
        assert_eq!(full.num_groups(), 99);
        assert_eq!(full.group(0), &[0, 1]);
        assert_eq!(full.frequency(), 2);
        let wide = gen_block_model(800, OverlapMode::Full).unwrap();
        assert_eq!(wide.frequency(), 16);
        assert!(gen_block_model(40, OverlapMode::Half).is_err());
    }

    #[test]
    fn degree_formula() {
        assert_eq!(expander_degree(800, 5, 16), 3);
        assert_eq!(expander_degree(200, 5, 4), 3);
        assert_eq!(expander_degree(10, 1, 1), 1);
    }

    #[test]
    fn instances_are_deterministic() {
        let model = gen_block_model(100, OverlapMode::Half).unwrap();
        let a = gen_instance(&model, 3, 40, MatrixKind::Expander, 3, &mut rng::stream(1, &[2])).unwrap();
        let b = gen_instance(&model, 3, 40, MatrixKind::Expander, 3, &mut rng::stream(1, &[2])).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.groups.len(), 3);
        let mask = model.cover_mask(&a.groups);
        assert!(a.x.iter().zip(&mask).all(|(v, &on)| on || *v == 0.0));
        assert_eq!(a.y, a.a.apply(&a.x).unwrap());
    }

    #[test]
    fn suite_bounds() {
        for inst in random_suite(200, 3, false) {
            let m = &inst.model;
            assert!(m.ground_size() <= 24 && m.num_groups() <= 8 && m.budget() <= 3);
            assert!(inst.weights.as_slice().iter().all(|w| w.sqrt().fract() == 0.0));
        }
    }
}
