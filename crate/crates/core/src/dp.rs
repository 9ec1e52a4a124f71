//! Exact group-model projection by dynamic programming over a nice tree
//! decomposition of the incidence graph.
//!
//! Every bag vertex carries a colour. A group is `Zero` (not chosen) or `One`
//! (chosen). An element is `Zero` (outside the support), `One` (in the support
//! and covered by a chosen group already seen in the subtree) or `Pending` (in
//! the support, to be covered by a group introduced further up). A table entry
//! `(i, k, colouring)` holds the best total weight of support elements seen in
//! the subtree using `i` chosen groups and `k` support elements; `k` is only
//! tracked when the element budget is active.
//!
//! The group budget is the model's `G` and the optional element counter
//! enforces `K`.

use thiserror::Error;

use crate::graphs::{
    compute_decomposition, incidence_graph, to_nice, IncidenceGraph, NiceKind, NiceTreeDecomposition, Violation,
    DEFAULT_EXACT_WIDTH_LIMIT,
};
use crate::model::{GroupModel, ModelError, ProjectionResult, WeightVector};

/// Widest decomposition the DP accepts.
pub const MAX_DP_WIDTH: usize = 14;
/// Largest number of table entries allocated for a single node.
const MAX_TABLE_ENTRIES: usize = 1 << 26;
const NO_CHILD: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum DpError {
    #[error("decomposition is not a valid nice decomposition of the incidence graph: {0}")]
    InvalidDecomposition(#[from] Violation),
    #[error("decomposition width {width} exceeds {MAX_DP_WIDTH}; use the Benders projector for this model")]
    WidthTooLarge { width: usize },
    #[error("DP table with {entries} entries is too large")]
    TableTooLarge { entries: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("solution reconstruction failed: {0}")]
    Reconstruction(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Colour {
    Zero,
    One,
    /// In the support but not yet covered (the `1?` label).
    Pending,
}

impl Colour {
    fn digit(self) -> usize {
        match self {
            Colour::Zero => 0,
            Colour::One => 1,
            Colour::Pending => 2,
        }
    }
}

/// True iff every bag element adjacent to a bag group coloured `One` is itself `One`.
pub fn is_consistent(bag: &[usize], colours: &[Colour], inc: &IncidenceGraph) -> bool {
    assert_eq!(bag.len(), colours.len());
    for (a, &g) in bag.iter().enumerate() {
        if !inc.is_group(g) || colours[a] != Colour::One {
            continue;
        }
        for (b, &e) in bag.iter().enumerate() {
            if !inc.is_group(e) && inc.graph.has_edge(g, e) && colours[b] != Colour::One {
                return false;
            }
        }
    }
    true
}

/// Packs colours in bag order as base-3 digits (first bag vertex = lowest digit).
pub fn encode(colours: &[Colour]) -> usize {
    colours.iter().rev().fold(0, |acc, c| acc * 3 + c.digit())
}

fn pow3(e: usize) -> usize {
    3usize.pow(e as u32)
}

fn digit(code: usize, pos: usize) -> usize {
    code / pow3(pos) % 3
}

fn insert_digit(code: usize, pos: usize, d: usize) -> usize {
    let p = pow3(pos);
    let low = code % p;
    let high = code / p;
    low + d * p + high * p * 3
}

fn remove_digit(code: usize, pos: usize) -> usize {
    let p = pow3(pos);
    let low = code % p;
    let high = code / (p * 3);
    low + high * p
}

fn set_digit(code: usize, pos: usize, d: usize) -> usize {
    let p = pow3(pos);
    code - digit(code, pos) * p + d * p
}

/// Dense table for one node, indexed `((i * kdim) + k) * codes + code`.
struct Table {
    kdim: usize,
    codes: usize,
    values: Vec<f64>,
    back: Vec<(u32, u32)>,
}

impl Table {
    fn new(gdim: usize, kdim: usize, bag_len: usize) -> Result<Table, DpError> {
        let codes = pow3(bag_len);
        let entries = gdim
            .checked_mul(kdim)
            .and_then(|v| v.checked_mul(codes))
            .filter(|&e| e <= MAX_TABLE_ENTRIES)
            .ok_or(DpError::TableTooLarge { entries: gdim.saturating_mul(kdim).saturating_mul(codes) })?;
        Ok(Table { kdim, codes, values: vec![f64::NEG_INFINITY; entries], back: vec![(NO_CHILD, NO_CHILD); entries] })
    }

    fn index(&self, i: usize, k: usize, code: usize) -> usize {
        (i * self.kdim + k) * self.codes + code
    }

    fn split(&self, idx: usize) -> (usize, usize, usize) {
        let code = idx % self.codes;
        let rest = idx / self.codes;
        (rest / self.kdim, rest % self.kdim, code)
    }

    fn offer(&mut self, idx: usize, value: f64, back: (u32, u32)) {
        if value > self.values[idx] {
            self.values[idx] = value;
            self.back[idx] = back;
        }
    }

    fn live(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().copied().enumerate().filter(|(_, v)| *v > f64::NEG_INFINITY)
    }
}

/// Cached decomposition for repeated projections onto one model.
#[derive(Debug, Clone)]
pub struct DpProjector {
    model: GroupModel,
    inc: IncidenceGraph,
    nice: NiceTreeDecomposition,
}

impl DpProjector {
    /// Decomposes the incidence graph (min-fill plus exact search for small widths).
    pub fn new(model: &GroupModel) -> Result<Self, DpError> {
        let inc = incidence_graph(model);
        let td = compute_decomposition(&inc.graph, DEFAULT_EXACT_WIDTH_LIMIT);
        let nice = to_nice(&td);
        DpProjector::with_decomposition(model, nice)
    }

    /// Uses a caller-supplied nice decomposition of the incidence graph.
    pub fn with_decomposition(model: &GroupModel, nice: NiceTreeDecomposition) -> Result<Self, DpError> {
        let inc = incidence_graph(model);
        nice.validate(&inc.graph)?;
        if nice.width() > MAX_DP_WIDTH {
            return Err(DpError::WidthTooLarge { width: nice.width() });
        }
        Ok(DpProjector { model: model.clone(), inc, nice })
    }

    pub fn width(&self) -> usize {
        self.nice.width()
    }

    pub fn decomposition(&self) -> &NiceTreeDecomposition {
        &self.nice
    }

    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    /// Projects with the element budget enabled exactly when `K < N`.
    pub fn project(&self, w: &WeightVector) -> Result<ProjectionResult, DpError> {
        self.project_with(w, self.model.sparsity_active())
    }

    pub fn project_with(&self, w: &WeightVector, k_extension: bool) -> Result<ProjectionResult, DpError> {
        let model = &self.model;
        let n = model.ground_size();
        if w.len() != n {
            return Err(ModelError::LengthMismatch { expected: n, got: w.len() }.into());
        }
        let g_max = model.budget();
        let k_max = if k_extension { model.sparsity() } else { 0 };
        let gdim = g_max + 1;
        let kdim = k_max + 1;
        let strict = !k_extension;
        let is_group = |v: usize| v >= n;
        let nodes = self.nice.nodes();
        let mut tables: Vec<Table> = Vec::with_capacity(nodes.len());

        for (x, node) in nodes.iter().enumerate() {
            let bag = &node.bag;
            let mut table = Table::new(gdim, kdim, bag.len())?;
            match node.kind {
                NiceKind::Leaf => {
                    let idx = table.index(0, 0, 0);
                    table.values[idx] = 0.0;
                }
                NiceKind::Introduce(v) => {
                    let child = &tables[node.children[0]];
                    let child_bag = &nodes[node.children[0]].bag;
                    let pos = bag.binary_search(&v).expect("introduced vertex is in the bag");
                    // bag-local neighbours of v, as positions in the child bag
                    let adjacent: Vec<usize> = child_bag
                        .iter()
                        .enumerate()
                        .filter(|&(_, &u)| is_group(u) != is_group(v) && self.inc.graph.has_edge(u, v))
                        .map(|(q, _)| q)
                        .collect();
                    for (cidx, value) in child.live() {
                        let (i, k, code) = child.split(cidx);
                        let back = (cidx as u32, NO_CHILD);
                        if is_group(v) {
                            table.offer(table.index(i, k, insert_digit(code, pos, 0)), value, back);
                            if i < g_max {
                                let mut next = code;
                                let mut ok = true;
                                for &q in &adjacent {
                                    match digit(code, q) {
                                        0 if strict => ok = false,
                                        2 => next = set_digit(next, q, 1),
                                        _ => {}
                                    }
                                }
                                if ok {
                                    table.offer(table.index(i + 1, k, insert_digit(next, pos, 1)), value, back);
                                }
                            }
                        } else {
                            let covered = adjacent.iter().any(|&q| digit(code, q) == 1);
                            if !(strict && covered) {
                                table.offer(table.index(i, k, insert_digit(code, pos, 0)), value, back);
                            }
                            let k_next = if k_extension { k + 1 } else { 0 };
                            if k_next <= k_max {
                                let d = if covered { 1 } else { 2 };
                                table.offer(table.index(i, k_next, insert_digit(code, pos, d)), value + w[v], back);
                            }
                        }
                    }
                }
                NiceKind::Forget(v) => {
                    let child = &tables[node.children[0]];
                    let child_bag = &nodes[node.children[0]].bag;
                    let pos = child_bag.binary_search(&v).expect("forgotten vertex is in the child bag");
                    for (cidx, value) in child.live() {
                        let (i, k, code) = child.split(cidx);
                        if !is_group(v) && digit(code, pos) == 2 {
                            // every group adjacent to v has been seen; v can no longer be covered
                            continue;
                        }
                        table.offer(table.index(i, k, remove_digit(code, pos)), value, (cidx as u32, NO_CHILD));
                    }
                }
                NiceKind::Join => {
                    let (left, right) = (&tables[node.children[0]], &tables[node.children[1]]);
                    let b = bag.len();
                    let group_mask: Vec<bool> = bag.iter().map(|&u| is_group(u)).collect();
                    let mut by_code: Vec<Vec<(usize, f64)>> = vec![Vec::new(); right.codes];
                    for (idx, value) in right.live() {
                        by_code[idx % right.codes].push((idx, value));
                    }
                    for (lidx, lval) in left.live() {
                        let (i1, k1, c1) = left.split(lidx);
                        let mut chosen = 0;
                        let mut support = 0;
                        let mut shared_weight = 0.0;
                        for q in 0..b {
                            let d = digit(c1, q);
                            if group_mask[q] {
                                chosen += usize::from(d == 1);
                            } else if d != 0 {
                                support += 1;
                                shared_weight += w[bag[q]];
                            }
                        }
                        for c2 in 0..right.codes {
                            if by_code[c2].is_empty() {
                                continue;
                            }
                            let mut merged = c1;
                            let mut compatible = true;
                            for q in 0..b {
                                let (d1, d2) = (digit(c1, q), digit(c2, q));
                                if group_mask[q] {
                                    compatible = d1 == d2;
                                } else {
                                    compatible = (d1 == 0) == (d2 == 0);
                                    if compatible && d1 == 2 && d2 == 1 {
                                        merged = set_digit(merged, q, 1);
                                    }
                                }
                                if !compatible {
                                    break;
                                }
                            }
                            if !compatible {
                                continue;
                            }
                            for &(ridx, rval) in &by_code[c2] {
                                let (i2, k2, _) = right.split(ridx);
                                let i = i1 + i2 - chosen;
                                if i > g_max {
                                    continue;
                                }
                                let k = if k_extension { k1 + k2 - support } else { 0 };
                                if k > k_max {
                                    continue;
                                }
                                let value = lval + rval - shared_weight;
                                table.offer(table.index(i, k, merged), value, (lidx as u32, ridx as u32));
                            }
                        }
                    }
                }
            }
            log::debug!("dp node {x} {:?}: bag size {}, {} live entries", node.kind, bag.len(), table.live().count());
            tables.push(table);
        }

        let root = self.nice.root();
        let (best_idx, best_value) = tables[root]
            .live()
            .fold(None, |acc: Option<(usize, f64)>, (idx, v)| match acc {
                Some((_, bv)) if bv >= v => acc,
                _ => Some((idx, v)),
            })
            .ok_or_else(|| DpError::Reconstruction("no feasible root entry".into()))?;

        let mut groups = Vec::new();
        let mut support = Vec::new();
        let mut stack = vec![(root, best_idx)];
        while let Some((x, idx)) = stack.pop() {
            let node = &nodes[x];
            let table = &tables[x];
            let (_, _, code) = table.split(idx);
            for (q, &u) in node.bag.iter().enumerate() {
                let d = digit(code, q);
                if is_group(u) && d == 1 {
                    groups.push(u - n);
                } else if !is_group(u) && d != 0 {
                    support.push(u);
                }
            }
            let (a, b) = table.back[idx];
            match node.kind {
                NiceKind::Leaf => {}
                NiceKind::Introduce(_) | NiceKind::Forget(_) => stack.push((node.children[0], a as usize)),
                NiceKind::Join => {
                    stack.push((node.children[0], a as usize));
                    stack.push((node.children[1], b as usize));
                }
            }
        }
        groups.sort_unstable();
        groups.dedup();
        support.sort_unstable();
        support.dedup();

        let result =
            ProjectionResult { covered_weight: w.sum_over(&support), selected_groups: groups, support, projected_vector: None };
        let budget_model = if k_extension { model.clone() } else { model.with_sparsity(n)? };
        if !result.is_feasible(&budget_model, w) {
            return Err(DpError::Reconstruction(format!(
                "reconstructed solution is infeasible: groups {:?}, support {:?}",
                result.selected_groups, result.support
            )));
        }
        let tol = 1e-9 * best_value.abs().max(1.0);
        if (result.covered_weight - best_value).abs() > tol {
            return Err(DpError::Reconstruction(format!(
                "reconstructed weight {} differs from table optimum {}",
                result.covered_weight, best_value
            )));
        }
        Ok(result)
    }
}

/// One-shot projection with a given nice decomposition of the incidence graph.
pub fn dp_project(
    model: &GroupModel,
    w: &WeightVector,
    nice: &NiceTreeDecomposition,
    k_extension: bool,
) -> Result<ProjectionResult, DpError> {
    DpProjector::with_decomposition(model, nice.clone())?.project_with(w, k_extension)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{four_groups, four_groups_weights};
    use crate::model::{brute_force_projection, NormMode};
    use proptest::prelude::*;

    #[test]
    fn digits_round_trip() {
        let code = encode(&[Colour::Pending, Colour::Zero, Colour::One]);
        assert_eq!(code, 2 + 9);
        assert_eq!(digit(code, 0), 2);
        assert_eq!(remove_digit(code, 1), 2 + 3);
        assert_eq!(insert_digit(remove_digit(code, 1), 1, 0), code);
        assert_eq!(set_digit(code, 0, 1), 1 + 9);
    }

    #[test]
    fn consistency_examples() {
        // element 1 (vertex 0) and group A (vertex N + 0)
        let model = four_groups(1, 4);
        let inc = incidence_graph(&model);
        let bag = [0, 4];
        assert!(is_consistent(&bag, &[Colour::One, Colour::One], &inc));
        assert!(!is_consistent(&bag, &[Colour::Zero, Colour::One], &inc));
        assert!(is_consistent(&bag, &[Colour::Zero, Colour::Zero], &inc));
        assert!(is_consistent(&bag, &[Colour::Pending, Colour::Zero], &inc));
    }

    #[test]
    fn disjoint_blocks() {
        let model = GroupModel::from_one_based(4, &[&[1, 2], &[3, 4]], 1, 4).unwrap();
        let w = WeightVector::new(vec![1.0, 2.0, 3.0, 4.0], NormMode::L2).unwrap();
        let r = DpProjector::new(&model).unwrap().project(&w).unwrap();
        assert_eq!(r.covered_weight, 7.0);
        assert_eq!(r.selected_groups, vec![1]);
    }

    #[test]
    fn four_groups_examples() {
        let w = four_groups_weights();
        let r = DpProjector::new(&four_groups(1, 4)).unwrap().project(&w).unwrap();
        assert_eq!(r.covered_weight, 11.0);
        assert_eq!(r.selected_groups, vec![3]);
        let r = DpProjector::new(&four_groups(2, 2)).unwrap().project_with(&w, true).unwrap();
        assert_eq!(r.covered_weight, 13.0);
        assert!(r.is_feasible(&four_groups(2, 2), &w));
    }

    #[test]
    fn width_guard() {
        // one group holding 16 elements plus pairwise overlaps gives a wide incidence graph
        let n = 16;
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                groups.push(vec![a, b]);
            }
        }
        let model = GroupModel::new(n, groups, 1, n).unwrap();
        match DpProjector::new(&model) {
            Err(DpError::WidthTooLarge { width }) => assert!(width > MAX_DP_WIDTH),
            other => panic!("expected width guard, got {:?}", other.map(|p| p.width())),
        }
    }

    #[test]
    fn rejects_foreign_decomposition() {
        let model = four_groups(1, 4);
        let other = GroupModel::from_one_based(4, &[&[1, 2], &[3, 4]], 1, 4).unwrap();
        let nice = DpProjector::new(&other).unwrap().decomposition().clone();
        assert!(matches!(
            dp_project(&model, &four_groups_weights(), &nice, false),
            Err(DpError::InvalidDecomposition(_))
        ));
    }

    fn random_instance(seed: u64) -> (GroupModel, WeightVector) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(3..=14);
        let m = rng.random_range(2..=6);
        let mut groups: Vec<Vec<usize>> = (0..m)
            .map(|_| {
                let size = rng.random_range(1..=n.min(5));
                (0..size).map(|_| rng.random_range(0..n)).collect()
            })
            .collect();
        for i in 0..n {
            if !groups.iter().any(|g| g.contains(&i)) {
                let j = rng.random_range(0..m);
                groups[j].push(i);
            }
        }
        let g = rng.random_range(1..=m.min(3));
        let k = match rng.random_range(0..3) {
            0 => n,
            1 => n.div_ceil(2),
            _ => 2,
        };
        let w: Vec<f64> = (0..n).map(|_| (rng.random_range(0..=10u32) as f64).powi(2)).collect();
        (GroupModel::new(n, groups, g, k).unwrap(), WeightVector::new(w, NormMode::L2).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn matches_brute_force(seed in any::<u64>()) {
            let (model, w) = random_instance(seed);
            let dp = DpProjector::new(&model).unwrap().project(&w).unwrap();
            let oracle = brute_force_projection(&model, &w).unwrap();
            prop_assert_eq!(dp.covered_weight, oracle.covered_weight);
            prop_assert!(dp.is_feasible(&model, &w));
        }

        #[test]
        fn monotone_in_budget(seed in any::<u64>()) {
            let (model, w) = random_instance(seed);
            let dp = DpProjector::new(&model).unwrap();
            let mut last = 0.0;
            for g in 1..=model.num_groups() {
                let m = model.with_budget(g).unwrap();
                let v = DpProjector::with_decomposition(&m, dp.decomposition().clone()).unwrap().project(&w).unwrap().covered_weight;
                prop_assert!(v >= last);
                last = v;
            }
        }
    }
}
