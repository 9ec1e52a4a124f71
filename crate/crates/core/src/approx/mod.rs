//! Head approximation by greedy coverage and tail approximation by rounding
//! the coverage LP.

pub mod simplex;

use thiserror::Error;

use crate::model::{apply_support, GroupModel, ModelError, WeightVector};
use simplex::{LinearProgram, SimplexError, StartingBasis};

/// Largest `N + M` accepted by the dense LP.
pub const LP_SIZE_LIMIT: usize = 20_000;

#[derive(Debug, Error)]
pub enum ApproxError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("accuracy parameter {0} is out of range")]
    InvalidEpsilon(f64),
    #[error("LP with N + M = {0} exceeds the dense solver limit of {LP_SIZE_LIMIT}")]
    TooLarge(usize),
    #[error(transparent)]
    Simplex(#[from] SimplexError),
}

/// Picks up to `rounds` groups, each maximizing the weight it adds to the cover.
///
/// Ties go to the lowest group index. Stops early once no group adds positive
/// weight. Returns the groups (ascending) and the cover mask.
pub fn greedy_cover(model: &GroupModel, w: &WeightVector, rounds: usize) -> (Vec<usize>, Vec<bool>) {
    let m = model.num_groups();
    let mut covered = vec![false; model.ground_size()];
    let mut used = vec![false; m];
    let mut chosen = Vec::new();
    for _ in 0..rounds.min(m) {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..m).filter(|&j| !used[j]) {
            let gain: f64 = model.group(j).iter().filter(|&&i| !covered[i]).map(|&i| w[i]).sum();
            if gain > 0.0 && best.is_none_or(|(_, g)| gain > g) {
                best = Some((j, gain));
            }
        }
        let Some((j, _)) = best else { break };
        used[j] = true;
        chosen.push(j);
        for &i in model.group(j) {
            covered[i] = true;
        }
    }
    chosen.sort_unstable();
    (chosen, covered)
}

/// `ceil(x)` that ignores rounding noise just above an integer.
fn ceil_count(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

/// Number of greedy rounds `ceil(G * log2(1/eps))`.
pub fn head_rounds(g: usize, eps: f64) -> usize {
    ceil_count(g as f64 * (1.0 / eps).log2())
}

/// Group budget `ceil((1 + 1/eps) * f * G)` of the tail approximation.
pub fn tail_budget(g: usize, f: usize, eps: f64) -> usize {
    ceil_count((1.0 + 1.0 / eps) * f as f64 * g as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadResult {
    pub selected_groups: Vec<usize>,
    pub support: Vec<usize>,
    pub covered_weight: f64,
    pub head_vector: Option<Vec<f64>>,
}

impl HeadResult {
    pub fn with_signal(mut self, x: &[f64]) -> Result<Self, ModelError> {
        self.head_vector = Some(apply_support(x, &self.support)?);
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailResult {
    pub selected_groups: Vec<usize>,
    pub support: Vec<usize>,
    pub residual_weight: f64,
    pub tail_vector: Option<Vec<f64>>,
}

impl TailResult {
    pub fn with_signal(mut self, x: &[f64]) -> Result<Self, ModelError> {
        self.tail_vector = Some(apply_support(x, &self.support)?);
        Ok(self)
    }
}

fn support_of(mask: &[bool]) -> Vec<usize> {
    (0..mask.len()).filter(|&i| mask[i]).collect()
}

fn check_length(model: &GroupModel, w: &WeightVector) -> Result<(), ModelError> {
    if w.len() != model.ground_size() {
        return Err(ModelError::LengthMismatch { expected: model.ground_size(), got: w.len() });
    }
    Ok(())
}

/// Greedy head approximation with `ceil(G log2(1/eps))` groups; covers at
/// least `(1 - eps)` times the best weight coverable by `G` groups.
pub fn head_greedy(model: &GroupModel, w: &WeightVector, g: usize, eps: f64) -> Result<HeadResult, ApproxError> {
    check_length(model, w)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ApproxError::InvalidEpsilon(eps));
    }
    let (selected_groups, mask) = greedy_cover(model, w, head_rounds(g, eps));
    let support = support_of(&mask);
    let covered_weight = w.sum_over(&support);
    Ok(HeadResult { selected_groups, support, covered_weight, head_vector: None })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LPSolution {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub objective: f64,
}

/// Solves `max w.u` subject to `u_j <= sum_{i : j in group i} v_i`,
/// `sum_i v_i = min(G, M)` and `0 <= u, v <= 1`.
pub fn lp_solve(model: &GroupModel, w: &WeightVector, g: usize) -> Result<LPSolution, ApproxError> {
    check_length(model, w)?;
    let (n, m) = (model.ground_size(), model.num_groups());
    if n + m > LP_SIZE_LIMIT {
        return Err(ApproxError::TooLarge(n + m));
    }
    let g = g.min(m);
    // columns: u (n), v (m), slacks (n), artificial for the budget row
    let rows = n + 1;
    let cols = 2 * n + m + 1;
    let mut a = vec![0.0; rows * cols];
    for j in 0..n {
        a[j * cols + j] = 1.0;
        for &i in model.memberships(j) {
            a[j * cols + n + i] = -1.0;
        }
        a[j * cols + n + m + j] = 1.0;
    }
    for i in 0..m {
        a[n * cols + n + i] = 1.0;
    }
    a[n * cols + cols - 1] = 1.0;
    let mut b = vec![0.0; rows];
    b[n] = g as f64;
    let mut upper = vec![1.0; cols];
    upper[n + m..2 * n + m].fill(f64::INFINITY);
    upper[cols - 1] = 0.0;
    let mut c = vec![0.0; cols];
    c[..n].copy_from_slice(w.as_slice());
    let lp = LinearProgram { rows, cols, a, b, upper, c };

    let mut at_upper = vec![false; cols];
    at_upper[n..n + g].fill(true);
    let basic = (0..n).map(|j| n + m + j).chain(std::iter::once(cols - 1)).collect();
    let sol = simplex::solve(&lp, &StartingBasis { basic, at_upper })?;
    log::trace!("coverage LP: {} simplex iterations", sol.iterations);
    Ok(LPSolution { u: sol.x[..n].to_vec(), v: sol.x[n..n + m].to_vec(), objective: sol.objective })
}

/// Tail approximation: keeps every group whose LP value is at least
/// `1 / ((1 + 1/eps) f)`; the uncovered weight is at most `(1 + eps)` times
/// the smallest achievable with `G` groups.
pub fn tail_lp_round(model: &GroupModel, w: &WeightVector, g: usize, eps: f64) -> Result<TailResult, ApproxError> {
    check_length(model, w)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(ApproxError::InvalidEpsilon(eps));
    }
    let lp = lp_solve(model, w, g)?;
    let alpha = (1.0 + 1.0 / eps) * model.frequency() as f64;
    let threshold = 1.0 / alpha - 1e-9;
    let selected_groups: Vec<usize> = (0..model.num_groups()).filter(|&i| lp.v[i] >= threshold).collect();
    let support = support_of(&model.cover_mask(&selected_groups));
    let residual_weight = w.total() - w.sum_over(&support);
    Ok(TailResult { selected_groups, support, residual_weight, tail_vector: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{four_groups, four_groups_weights};
    use crate::model::{brute_force_projection, weights_from_signal, NormMode};
    use proptest::prelude::*;

    fn blocks() -> (GroupModel, WeightVector) {
        let model = GroupModel::from_one_based(4, &[&[1, 2], &[3, 4]], 1, 4).unwrap();
        (model, WeightVector::new(vec![1.0, 2.0, 3.0, 4.0], NormMode::L2).unwrap())
    }

    #[test]
    fn round_counts() {
        assert_eq!(head_rounds(1, 0.5), 1);
        assert_eq!(head_rounds(3, 0.25), 6);
        assert_eq!(head_rounds(1, 0.05), 5);
        assert_eq!(tail_budget(1, 3, 1.0), 6);
        assert_eq!(tail_budget(5, 2, 1.0 / 19.0), 200);
    }

    #[test]
    fn head_examples() {
        let h = head_greedy(&four_groups(1, 4), &four_groups_weights(), 1, 0.5).unwrap();
        assert_eq!((h.selected_groups.clone(), h.covered_weight), (vec![3], 11.0));
        let (model, w) = blocks();
        assert_eq!(head_greedy(&model, &w, 2, 0.25).unwrap().covered_weight, 10.0);
        let zero = WeightVector::new(vec![0.0; 4], NormMode::L2).unwrap();
        assert_eq!(head_greedy(&model, &zero, 1, 0.5).unwrap().covered_weight, 0.0);
        assert!(matches!(head_greedy(&model, &w, 1, 1.0), Err(ApproxError::InvalidEpsilon(_))));
    }

    #[test]
    fn lp_examples() {
        let (model, w) = blocks();
        let lp = lp_solve(&model, &w, 1).unwrap();
        assert!((lp.objective - 7.0).abs() < 1e-12);
        assert!((lp.v[0]).abs() < 1e-12 && (lp.v[1] - 1.0).abs() < 1e-12);
        assert!((lp_solve(&model, &w, 2).unwrap().objective - 10.0).abs() < 1e-12);
        let zero = WeightVector::new(vec![0.0; 4], NormMode::L2).unwrap();
        assert_eq!(lp_solve(&model, &zero, 1).unwrap().objective, 0.0);
    }

    #[test]
    fn tail_examples() {
        let (model, w) = blocks();
        let t = tail_lp_round(&model, &w, 1, 1.0).unwrap();
        assert_eq!(t.selected_groups, vec![1]);
        assert_eq!(t.residual_weight, 3.0);

        let t = tail_lp_round(&four_groups(1, 4), &four_groups_weights(), 1, 1.0).unwrap();
        assert!(t.selected_groups.len() <= 6);
        assert!(t.residual_weight <= 10.0 + 1e-9);

        // signal living on a single group
        let model = four_groups(1, 4);
        let w = WeightVector::new(vec![0.0, 0.0, 5.0, 3.0], NormMode::L2).unwrap();
        assert_eq!(tail_lp_round(&model, &w, 1, 0.5).unwrap().residual_weight, 0.0);
    }

    #[test]
    fn l2_norm_guarantees() {
        // head/tail on squared entries give sqrt(1 - eps) and sqrt(1 + eps) in l2
        let model = four_groups(1, 4);
        let x = [2.0, -1.0, 1.5, 3.0];
        let w = weights_from_signal(&x, NormMode::L2);
        let opt = brute_force_projection(&model, &w).unwrap();
        let best_head = NormMode::L2.norm(&apply_support(&x, &opt.support).unwrap());
        let residual = x.iter().zip(&apply_support(&x, &opt.support).unwrap()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let eps = 0.25;
        let h = head_greedy(&model, &w, 1, eps).unwrap().with_signal(&x).unwrap();
        assert!(NormMode::L2.norm(h.head_vector.as_ref().unwrap()) >= (1.0 - eps).sqrt() * best_head - 1e-12);
        let t = tail_lp_round(&model, &w, 1, eps).unwrap().with_signal(&x).unwrap();
        let tail_res: f64 =
            x.iter().zip(t.tail_vector.as_ref().unwrap()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(tail_res <= (1.0 + eps).sqrt() * residual + 1e-12);
    }

    fn suite_instance(seed: u64) -> (GroupModel, WeightVector) {
        let inst = crate::bench::random_suite_instance(seed, false);
        (inst.model, inst.weights)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn lp_dominates_integer_optimum(seed in any::<u64>()) {
            let (model, w) = suite_instance(seed);
            let model = model.with_sparsity(model.ground_size()).unwrap();
            let lp = lp_solve(&model, &w, model.budget()).unwrap();
            let opt = brute_force_projection(&model, &w).unwrap().covered_weight;
            prop_assert!(lp.objective >= opt - 1e-9 * opt.max(1.0));
            let total: f64 = lp.v.iter().sum();
            prop_assert!((total - model.budget().min(model.num_groups()) as f64).abs() <= 1e-7);
            for j in 0..model.ground_size() {
                let cap: f64 = model.memberships(j).iter().map(|&i| lp.v[i]).sum();
                prop_assert!(lp.u[j] <= cap + 1e-7);
            }
        }
    }
}
