//! Group models, weights and support projections.
//!
//! A [`GroupModel`] is a collection of index sets (groups) over the ground set
//! `0..N` together with a group budget `G` and an element budget `K`. A
//! support is model-sparse when it is covered by at most `G` groups and has at
//! most `K` elements. Projecting a signal onto the model reduces to a maximum
//! weight coverage problem over [`WeightVector`]s derived from the signal.
//!
//! Indices are 0-based everywhere in the library; the text instance format in
//! [`instance`] is 1-based.

pub mod instance;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Enumeration guard for [`brute_force_projection`].
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("ground set must be non-empty")]
    EmptyGroundSet,
    #[error("model must contain at least one group")]
    NoGroups,
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("group {group} contains index {index}, outside 0..{n}")]
    IndexOutOfRange { group: usize, index: usize, n: usize },
    #[error("element {0} is not covered by any group")]
    Uncovered(usize),
    #[error("group budget {g} outside 1..={m}")]
    BudgetOutOfRange { g: usize, m: usize },
    #[error("sparsity {k} outside 1..={n}")]
    SparsityOutOfRange { k: usize, n: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("weight {index} is negative or not finite")]
    InvalidWeight { index: usize },
    #[error("support index {index} outside 0..{n}")]
    SupportOutOfRange { index: usize, n: usize },
    #[error("brute force would enumerate {subsets} group subsets (limit {BRUTE_FORCE_LIMIT})")]
    TooLarge { subsets: u128 },
}

/// Groups over `0..N` with a group budget `G` and an element budget `K`.
///
/// `K == N` means no element-sparsity constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupModel {
    ground_size: usize,
    groups: Vec<Vec<usize>>,
    budget: usize,
    sparsity: usize,
    #[serde(skip)]
    memberships: Vec<Vec<usize>>,
}

impl GroupModel {
    /// Builds a model from 0-based groups. Each group is sorted and deduplicated.
    pub fn new(
        ground_size: usize,
        groups: Vec<Vec<usize>>,
        budget: usize,
        sparsity: usize,
    ) -> Result<Self, ModelError> {
        if ground_size == 0 {
            return Err(ModelError::EmptyGroundSet);
        }
        if groups.is_empty() {
            return Err(ModelError::NoGroups);
        }
        let mut groups = groups;
        for (j, g) in groups.iter_mut().enumerate() {
            if g.is_empty() {
                return Err(ModelError::EmptyGroup(j));
            }
            g.sort_unstable();
            g.dedup();
            if let Some(&index) = g.iter().find(|&&i| i >= ground_size) {
                return Err(ModelError::IndexOutOfRange { group: j, index, n: ground_size });
            }
        }
        let m = groups.len();
        if budget == 0 || budget > m {
            return Err(ModelError::BudgetOutOfRange { g: budget, m });
        }
        if sparsity == 0 || sparsity > ground_size {
            return Err(ModelError::SparsityOutOfRange { k: sparsity, n: ground_size });
        }
        let mut memberships = vec![Vec::new(); ground_size];
        for (j, g) in groups.iter().enumerate() {
            for &i in g {
                memberships[i].push(j);
            }
        }
        if let Some(i) = memberships.iter().position(|m| m.is_empty()) {
            return Err(ModelError::Uncovered(i));
        }
        for a in 0..m {
            for b in (a + 1)..m {
                if groups[a] == groups[b] {
                    log::debug!("groups {} and {} are identical", a, b);
                }
            }
        }
        Ok(GroupModel { ground_size, groups, budget, sparsity, memberships })
    }

    /// Builds a model from 1-based groups, as written in instance files.
    pub fn from_one_based(
        ground_size: usize,
        groups: &[&[usize]],
        budget: usize,
        sparsity: usize,
    ) -> Result<Self, ModelError> {
        let mut zero_based = Vec::with_capacity(groups.len());
        for (j, g) in groups.iter().enumerate() {
            let mut out = Vec::with_capacity(g.len());
            for &i in g.iter() {
                if i == 0 || i > ground_size {
                    return Err(ModelError::IndexOutOfRange { group: j, index: i, n: ground_size });
                }
                out.push(i - 1);
            }
            zero_based.push(out);
        }
        GroupModel::new(ground_size, zero_based, budget, sparsity)
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group(&self, j: usize) -> &[usize] {
        &self.groups[j]
    }

    /// Group budget `G`.
    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Element budget `K`.
    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    /// True when `K < N`, i.e. the element budget can bind.
    pub fn sparsity_active(&self) -> bool {
        self.sparsity < self.ground_size
    }

    /// Groups containing element `i`, ascending.
    pub fn memberships(&self, i: usize) -> &[usize] {
        &self.memberships[i]
    }

    pub fn largest_group(&self) -> usize {
        self.groups.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn with_budget(&self, budget: usize) -> Result<Self, ModelError> {
        let m = self.num_groups();
        if budget == 0 || budget > m {
            return Err(ModelError::BudgetOutOfRange { g: budget, m });
        }
        Ok(GroupModel { budget, ..self.clone() })
    }

    pub fn with_sparsity(&self, sparsity: usize) -> Result<Self, ModelError> {
        if sparsity == 0 || sparsity > self.ground_size {
            return Err(ModelError::SparsityOutOfRange { k: sparsity, n: self.ground_size });
        }
        Ok(GroupModel { sparsity, ..self.clone() })
    }

    /// Frequency: the largest number of groups any single element belongs to.
    pub fn frequency(&self) -> usize {
        self.memberships.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Union of the given groups as a membership mask of length `N`.
    pub fn cover_mask(&self, groups: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.ground_size];
        for &j in groups {
            for &i in &self.groups[j] {
                mask[i] = true;
            }
        }
        mask
    }

    /// Restores the membership cache after deserialization.
    pub fn rebuild(self) -> Result<Self, ModelError> {
        GroupModel::new(self.ground_size, self.groups, self.budget, self.sparsity)
    }
}

/// How a [`WeightVector`] was derived from a signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormMode {
    /// `w_i = |x_i|`
    L1,
    /// `w_i = x_i^2`
    L2,
}

impl NormMode {
    pub fn from_p(p: u32) -> Option<NormMode> {
        match p {
            1 => Some(NormMode::L1),
            2 => Some(NormMode::L2),
            _ => None,
        }
    }

    pub fn p(self) -> u32 {
        match self {
            NormMode::L1 => 1,
            NormMode::L2 => 2,
        }
    }

    /// `sum |x_i|^p` over all entries.
    pub fn power_sum(self, x: &[f64]) -> f64 {
        match self {
            NormMode::L1 => x.iter().map(|v| v.abs()).sum(),
            NormMode::L2 => x.iter().map(|v| v * v).sum(),
        }
    }

    pub fn norm(self, x: &[f64]) -> f64 {
        match self {
            NormMode::L1 => self.power_sum(x),
            NormMode::L2 => self.power_sum(x).sqrt(),
        }
    }
}

/// Non-negative element weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    weights: Vec<f64>,
    norm_mode: NormMode,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>, norm_mode: NormMode) -> Result<Self, ModelError> {
        if let Some(index) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(ModelError::InvalidWeight { index });
        }
        Ok(WeightVector { weights, norm_mode })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn norm_mode(&self) -> NormMode {
        self.norm_mode
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Sum of weights over `indices`.
    pub fn sum_over(&self, indices: &[usize]) -> f64 {
        indices.iter().map(|&i| self.weights[i]).sum()
    }
}

impl std::ops::Index<usize> for WeightVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.weights[i]
    }
}

/// `w_i = x_i^2` for `L2`, `w_i = |x_i|` for `L1`.
pub fn weights_from_signal(x: &[f64], mode: NormMode) -> WeightVector {
    let weights = match mode {
        NormMode::L1 => x.iter().map(|v| v.abs()).collect(),
        NormMode::L2 => x.iter().map(|v| v * v).collect(),
    };
    WeightVector { weights, norm_mode: mode }
}

/// Copies `x` on `support` and zeroes everything else.
pub fn apply_support(x: &[f64], support: &[usize]) -> Result<Vec<f64>, ModelError> {
    let n = x.len();
    let mut out = vec![0.0; n];
    for &i in support {
        if i >= n {
            return Err(ModelError::SupportOutOfRange { index: i, n });
        }
        out[i] = x[i];
    }
    Ok(out)
}

/// The `k` heaviest indices covered by `groups`, ascending.
///
/// Equal weights are ranked by ascending index.
pub fn heaviest_covered(model: &GroupModel, w: &WeightVector, groups: &[usize], k: usize) -> Vec<usize> {
    let mask = model.cover_mask(groups);
    let mut covered: Vec<usize> = (0..model.ground_size()).filter(|&i| mask[i]).collect();
    if covered.len() > k {
        // stable: ties keep ascending index order
        covered.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap_or(std::cmp::Ordering::Equal));
        covered.truncate(k);
        covered.sort_unstable();
    }
    covered
}

/// Selected groups, support and covered weight of a model projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub selected_groups: Vec<usize>,
    pub support: Vec<usize>,
    pub covered_weight: f64,
    pub projected_vector: Option<Vec<f64>>,
}

impl ProjectionResult {
    /// Support = the `K` heaviest elements covered by `groups`.
    pub fn from_groups(model: &GroupModel, w: &WeightVector, groups: Vec<usize>) -> Self {
        let mut groups = groups;
        groups.sort_unstable();
        groups.dedup();
        let support = heaviest_covered(model, w, &groups, model.sparsity());
        let covered_weight = w.sum_over(&support);
        ProjectionResult { selected_groups: groups, support, covered_weight, projected_vector: None }
    }

    /// Attaches `x` restricted to the support.
    pub fn with_signal(mut self, x: &[f64]) -> Result<Self, ModelError> {
        self.projected_vector = Some(apply_support(x, &self.support)?);
        Ok(self)
    }

    /// Checks the result is feasible for `model` and its weight is consistent.
    pub fn is_feasible(&self, model: &GroupModel, w: &WeightVector) -> bool {
        if self.selected_groups.len() > model.budget() {
            return false;
        }
        if self.selected_groups.iter().any(|&j| j >= model.num_groups()) {
            return false;
        }
        if self.support.len() > model.sparsity() {
            return false;
        }
        let mask = model.cover_mask(&self.selected_groups);
        if self.support.iter().any(|&i| i >= mask.len() || !mask[i]) {
            return false;
        }
        let recomputed = w.sum_over(&self.support);
        (recomputed - self.covered_weight).abs() <= 1e-12 * recomputed.abs().max(1.0)
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Exhaustive projection: every subset of at most `G` groups, keeping the `K`
/// heaviest covered elements.
///
/// Among maximizers the lexicographically smallest group-index list wins.
pub fn brute_force_projection(model: &GroupModel, w: &WeightVector) -> Result<ProjectionResult, ModelError> {
    let m = model.num_groups();
    let g = model.budget();
    if w.len() != model.ground_size() {
        return Err(ModelError::LengthMismatch { expected: model.ground_size(), got: w.len() });
    }
    let subsets = binomial(m, g);
    if subsets > BRUTE_FORCE_LIMIT {
        return Err(ModelError::TooLarge { subsets });
    }

    let mut best = ProjectionResult::from_groups(model, w, Vec::new());
    let mut current = Vec::with_capacity(g);
    // depth-first, include-first: visits subsets in lexicographic order
    fn visit(
        model: &GroupModel,
        w: &WeightVector,
        start: usize,
        current: &mut Vec<usize>,
        best: &mut ProjectionResult,
    ) {
        for j in start..model.num_groups() {
            current.push(j);
            let candidate = ProjectionResult::from_groups(model, w, current.clone());
            if candidate.covered_weight > best.covered_weight {
                *best = candidate;
            }
            if current.len() < model.budget() {
                visit(model, w, j + 1, current, best);
            }
            current.pop();
        }
    }
    visit(model, w, 0, &mut current, &mut best);
    Ok(best)
}
