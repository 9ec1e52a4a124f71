//! Exact projection for arbitrary group models by Benders' decomposition.
//!
//! The master problem chooses groups; for a fixed choice the coverage
//! subproblem is solved in closed form together with an optimal dual vertex,
//! which yields an optimality cut `mu <= alpha*K + sum(gamma) + sum_j v_j * coef_j`.

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::approx::greedy_cover;
use crate::model::{heaviest_covered, GroupModel, ModelError, ProjectionResult, WeightVector};

#[derive(Debug, Error)]
pub enum BendersError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("Benders iteration cap of {cap} reached; best incumbent covers {}", best.covered_weight)]
    IterationCap { cap: usize, best: Box<ProjectionResult> },
    #[error("dual vertex violates feasibility or strong duality at iteration {iteration}")]
    DualCheck { iteration: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualVertex {
    pub alpha: f64,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl DualVertex {
    /// `alpha + beta_i + gamma_i >= w_i` for every element, all components non-negative.
    pub fn is_feasible(&self, w: &WeightVector) -> bool {
        self.alpha >= 0.0
            && (0..w.len()).all(|i| {
                self.beta[i] >= 0.0 && self.gamma[i] >= 0.0 && self.alpha + self.beta[i] + self.gamma[i] >= w[i] - 1e-12
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityCut {
    pub dual: DualVertex,
    /// `alpha * K`.
    pub alpha_k: f64,
    /// `sum_i gamma_i`.
    pub gamma_sum: f64,
    /// Per group `j`: `sum_{i in group j} beta_i`.
    pub coefficients: Vec<f64>,
}

impl OptimalityCut {
    pub fn new(model: &GroupModel, dual: DualVertex, k: usize) -> Self {
        let coefficients = model.groups().iter().map(|g| g.iter().map(|&i| dual.beta[i]).sum()).collect();
        OptimalityCut {
            alpha_k: dual.alpha * k as f64,
            gamma_sum: dual.gamma.iter().sum(),
            coefficients,
            dual,
        }
    }

    pub fn constant(&self) -> f64 {
        self.alpha_k + self.gamma_sum
    }

    /// Cut value at the selection `groups` (group indices).
    pub fn value(&self, groups: &[usize]) -> f64 {
        self.constant() + groups.iter().map(|&j| self.coefficients[j]).sum::<f64>()
    }
}

/// Optimal dual of the coverage subproblem for the selection `groups`.
///
/// With `I` the covered elements and `I^K` the `k` heaviest of them,
/// `alpha` is the largest weight in `I \ I^K` (0 if empty), and
/// `(beta_i, gamma_i)` is `(w_i, 0)` outside `I`, `(0, 0)` on `I \ I^K` and
/// `(0, w_i - alpha)` on `I^K`.
pub fn subproblem_closed_form(model: &GroupModel, groups: &[usize], w: &WeightVector, k: usize) -> DualVertex {
    let n = model.ground_size();
    let covered = model.cover_mask(groups);
    let top = heaviest_covered(model, w, groups, k);
    let mut in_top = vec![false; n];
    for &i in &top {
        in_top[i] = true;
    }
    let alpha = (0..n).filter(|&i| covered[i] && !in_top[i]).map(|i| w[i]).fold(0.0, f64::max);
    let mut beta = vec![0.0; n];
    let mut gamma = vec![0.0; n];
    for i in 0..n {
        if !covered[i] {
            beta[i] = w[i];
        } else if in_top[i] {
            gamma[i] = w[i] - alpha;
        }
    }
    DualVertex { alpha, beta, gamma }
}

#[derive(Debug, Clone, Default)]
pub struct MasterState {
    pub cuts: Vec<OptimalityCut>,
    pub incumbent: Vec<usize>,
    pub bound: f64,
}

/// Maximizes `min_c cut_c(v)` over selections of at most `G` groups.
///
/// Cut coefficients are non-negative, so some optimum uses exactly
/// `min(G, M)` groups and only those are searched, depth-first with groups
/// included before they are excluded. The first optimum found in that order
/// (the lexicographically smallest index list) is kept.
pub fn master_solve(cuts: &[OptimalityCut], model: &GroupModel) -> (Vec<usize>, f64) {
    assert!(!cuts.is_empty(), "master needs at least one cut");
    let m = model.num_groups();
    let size = model.budget().min(m);
    // per cut: group indices by descending coefficient
    let order: Vec<Vec<usize>> = cuts
        .iter()
        .map(|c| {
            let mut idx: Vec<usize> = (0..m).collect();
            idx.sort_by(|&a, &b| c.coefficients[b].total_cmp(&c.coefficients[a]).then(a.cmp(&b)));
            idx
        })
        .collect();

    struct Search<'a> {
        cuts: &'a [OptimalityCut],
        order: &'a [Vec<usize>],
        m: usize,
        size: usize,
        partial: Vec<f64>,
        chosen: Vec<usize>,
        best: Vec<usize>,
        best_value: f64,
    }

    impl Search<'_> {
        fn bound(&self, next: usize) -> f64 {
            let free = self.size - self.chosen.len();
            let mut bound = f64::INFINITY;
            for (c, cut) in self.cuts.iter().enumerate() {
                let mut value = self.partial[c];
                let mut taken = 0;
                for &j in &self.order[c] {
                    if taken == free {
                        break;
                    }
                    if j >= next {
                        value += cut.coefficients[j];
                        taken += 1;
                    }
                }
                bound = bound.min(value);
            }
            bound
        }

        fn visit(&mut self, next: usize) {
            if self.chosen.len() == self.size {
                let value = self.partial.iter().copied().fold(f64::INFINITY, f64::min);
                if value > self.best_value {
                    self.best_value = value;
                    self.best = self.chosen.clone();
                }
                return;
            }
            if self.m - next < self.size - self.chosen.len() || self.bound(next) <= self.best_value {
                return;
            }
            self.chosen.push(next);
            for (c, cut) in self.cuts.iter().enumerate() {
                self.partial[c] += cut.coefficients[next];
            }
            self.visit(next + 1);
            for (c, cut) in self.cuts.iter().enumerate() {
                self.partial[c] -= cut.coefficients[next];
            }
            self.chosen.pop();
            self.visit(next + 1);
        }
    }

    let mut search = Search {
        cuts,
        order: &order,
        m,
        size,
        partial: cuts.iter().map(OptimalityCut::constant).collect(),
        chosen: Vec::with_capacity(size),
        best: Vec::new(),
        best_value: f64::NEG_INFINITY,
    };
    search.visit(0);
    (search.best, search.best_value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutLogEntry {
    pub iteration: usize,
    pub mu: f64,
    pub violation: f64,
}

#[derive(Debug, Clone, Default)]
pub struct BendersOptions {
    /// Defaults to `10 * M * G`.
    pub max_iterations: Option<usize>,
    pub record_cuts: bool,
}

#[derive(Debug, Clone)]
pub struct BendersOutcome {
    pub result: ProjectionResult,
    pub iterations: usize,
    pub state: MasterState,
    pub log: Vec<CutLogEntry>,
}

pub fn benders_project(model: &GroupModel, w: &WeightVector) -> Result<ProjectionResult, BendersError> {
    Ok(benders_project_with(model, w, &BendersOptions::default())?.result)
}

pub fn benders_project_with(
    model: &GroupModel,
    w: &WeightVector,
    options: &BendersOptions,
) -> Result<BendersOutcome, BendersError> {
    let n = model.ground_size();
    if w.len() != n {
        return Err(ModelError::LengthMismatch { expected: n, got: w.len() }.into());
    }
    let k = model.sparsity();
    let cap = options.max_iterations.unwrap_or(10 * model.num_groups() * model.budget()).max(1);

    let make_cut = |groups: &[usize], iteration: usize| -> Result<OptimalityCut, BendersError> {
        let dual = subproblem_closed_form(model, groups, w, k);
        let cut = OptimalityCut::new(model, dual, k);
        let primal = w.sum_over(&heaviest_covered(model, w, groups, k));
        let dual_value = cut.value(groups);
        if !cut.dual.is_feasible(w) || (dual_value - primal).abs() > 1e-9 * primal.abs().max(1.0) {
            return Err(BendersError::DualCheck { iteration });
        }
        Ok(cut)
    };

    let warm = greedy_cover(model, w, model.budget()).0;
    let mut state = MasterState { cuts: vec![make_cut(&warm, 0)?], incumbent: warm.clone(), bound: f64::INFINITY };
    let mut best = ProjectionResult::from_groups(model, w, warm);
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut log = Vec::new();

    for iteration in 1..=cap {
        let (v, mu) = master_solve(&state.cuts, model);
        state.incumbent = v.clone();
        state.bound = mu;
        let cut = make_cut(&v, iteration)?;
        let value = cut.value(&v);
        let candidate = ProjectionResult::from_groups(model, w, v.clone());
        if candidate.covered_weight > best.covered_weight {
            best = candidate;
        }
        let violation = mu - value;
        if options.record_cuts {
            log.push(CutLogEntry { iteration, mu, violation });
        }
        log::trace!("benders iteration {iteration}: mu {mu}, cut value {value}");
        if violation <= 1e-9 * (1.0 + mu.abs()) {
            return Ok(BendersOutcome { result: best, iterations: iteration, state, log });
        }
        // the same selection can only come back if its exact cut was already present
        assert!(seen.insert(v), "Benders revisited a separated selection");
        state.cuts.push(cut);
    }
    log::warn!("Benders reached its iteration cap of {cap}");
    Err(BendersError::IterationCap { cap, best: Box::new(best) })
}

/// CSV with header `iteration,mu,violation`.
pub fn cut_log_csv(log: &[CutLogEntry]) -> String {
    let mut out = String::from("iteration,mu,violation\n");
    for e in log {
        let _ = writeln!(out, "{},{},{}", e.iteration, e.mu, e.violation);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{four_groups, four_groups_weights};
    use crate::model::{brute_force_projection, NormMode};

    #[test]
    fn closed_form_four_groups_group_b() {
        let model = four_groups(1, 2);
        let dual = subproblem_closed_form(&model, &[1], &four_groups_weights(), 2);
        assert_eq!(dual.alpha, 1.0);
        assert_eq!(dual.beta, vec![0.0, 0.0, 0.0, 9.0]);
        assert_eq!(dual.gamma, vec![3.0, 0.0, 1.0, 0.0]);
        let cut = OptimalityCut::new(&model, dual, 2);
        assert_eq!(cut.value(&[1]), 6.0);
        assert!(cut.dual.is_feasible(&four_groups_weights()));
    }

    #[test]
    fn closed_form_trivial_covers() {
        let model = four_groups(4, 4);
        let w = four_groups_weights();
        let full = subproblem_closed_form(&model, &[0, 1, 2, 3], &w, 4);
        assert_eq!(full.alpha, 0.0);
        assert_eq!(full.beta, vec![0.0; 4]);
        assert_eq!(full.gamma, w.as_slice());
        let empty = subproblem_closed_form(&model, &[], &w, 4);
        assert_eq!(empty.alpha, 0.0);
        assert_eq!(empty.beta, w.as_slice());
        assert_eq!(OptimalityCut::new(&model, empty, 4).value(&[]), 0.0);
    }

    #[test]
    fn master_with_singleton_cuts() {
        let model = four_groups(1, 4);
        let w = four_groups_weights();
        let cuts: Vec<_> =
            (0..4).map(|j| OptimalityCut::new(&model, subproblem_closed_form(&model, &[j], &w, 4), 4)).collect();
        let (v, mu) = master_solve(&cuts, &model);
        assert_eq!(v, vec![3]);
        assert_eq!(mu, 11.0);
    }

    #[test]
    fn master_single_cut_and_ties() {
        let model = four_groups(4, 4);
        let w = four_groups_weights();
        let cut = OptimalityCut::new(&model, subproblem_closed_form(&model, &[], &w, 4), 4);
        let (v, mu) = master_solve(std::slice::from_ref(&cut), &model);
        assert_eq!(mu, cut.value(&v));
        // a cut that is flat in v makes every selection tie
        let zero = WeightVector::new(vec![0.0; 4], NormMode::L2).unwrap();
        let model = four_groups(2, 4);
        let flat = OptimalityCut::new(&model, subproblem_closed_form(&model, &[], &zero, 4), 4);
        assert_eq!(master_solve(&[flat], &model), (vec![0, 1], 0.0));
    }

    #[test]
    fn benders_four_groups() {
        let w = four_groups_weights();
        let r = benders_project(&four_groups(1, 4), &w).unwrap();
        assert_eq!((r.covered_weight, r.selected_groups.clone()), (11.0, vec![3]));
        assert_eq!(benders_project(&four_groups(2, 2), &w).unwrap().covered_weight, 13.0);
    }

    #[test]
    fn zero_weights_stop_immediately() {
        let zero = WeightVector::new(vec![0.0; 4], NormMode::L2).unwrap();
        let out = benders_project_with(&four_groups(2, 4), &zero, &BendersOptions::default()).unwrap();
        assert_eq!(out.result.covered_weight, 0.0);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn cut_log_and_cap() {
        let model = GroupModel::from_one_based(6, &[&[1, 2], &[3, 4], &[5, 6], &[1, 6]], 2, 6).unwrap();
        let w = WeightVector::new(vec![5.0, 1.0, 4.0, 4.0, 1.0, 5.0], NormMode::L2).unwrap();
        let out = benders_project_with(&model, &w, &BendersOptions { max_iterations: None, record_cuts: true }).unwrap();
        assert_eq!(out.result.covered_weight, brute_force_projection(&model, &w).unwrap().covered_weight);
        assert_eq!(out.log.len(), out.iterations);
        assert!(cut_log_csv(&out.log).starts_with("iteration,mu,violation\n"));
        if out.iterations > 1 {
            let capped = benders_project_with(&model, &w, &BendersOptions { max_iterations: Some(1), record_cuts: false });
            assert!(matches!(capped, Err(BendersError::IterationCap { cap: 1, .. })));
        }
    }
}
