//! Tree decompositions from elimination orderings.
//!
//! A min-fill ordering gives the initial decomposition. When its width is at
//! most the exact limit, a branch-and-bound search over elimination orderings
//! tries to prove it optimal or find a better one.

use std::collections::HashMap;

use super::{Graph, TreeDecomposition};

pub const DEFAULT_EXACT_WIDTH_LIMIT: usize = 8;

/// Graphs above this size only get the heuristic ordering.
const EXACT_MAX_VERTICES: usize = 128;
/// Search nodes before the exact search gives up and keeps its best ordering.
const EXACT_NODE_BUDGET: usize = 200_000;

/// Dense symmetric adjacency used while eliminating.
struct EliminationGraph {
    adj: Vec<Vec<bool>>,
    alive: Vec<bool>,
}

impl EliminationGraph {
    fn new(g: &Graph) -> Self {
        let n = g.num_vertices();
        let mut adj = vec![vec![false; n]; n];
        for (u, v) in g.edges() {
            adj[u][v] = true;
            adj[v][u] = true;
        }
        EliminationGraph { adj, alive: vec![true; n] }
    }

    fn live_neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.adj.len()).filter(|&u| self.alive[u] && self.adj[v][u]).collect()
    }

    fn fill_in(&self, v: usize) -> usize {
        let nb = self.live_neighbors(v);
        let mut missing = 0;
        for (a, &x) in nb.iter().enumerate() {
            for &y in &nb[a + 1..] {
                if !self.adj[x][y] {
                    missing += 1;
                }
            }
        }
        missing
    }

    fn eliminate(&mut self, v: usize) -> Vec<usize> {
        let nb = self.live_neighbors(v);
        for (a, &x) in nb.iter().enumerate() {
            for &y in &nb[a + 1..] {
                self.adj[x][y] = true;
                self.adj[y][x] = true;
            }
        }
        self.alive[v] = false;
        nb
    }
}

/// Greedy min-fill ordering; ties by smaller degree, then smaller id.
pub fn min_fill_order(g: &Graph) -> Vec<usize> {
    let n = g.num_vertices();
    let mut eg = EliminationGraph::new(g);
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| eg.alive[v])
            .min_by_key(|&v| (eg.fill_in(v), eg.live_neighbors(v).len(), v))
            .expect("a live vertex remains");
        eg.eliminate(v);
        order.push(v);
    }
    order
}

/// Decomposition induced by an elimination ordering of all vertices.
///
/// Eliminating `v` yields the bag `{v} ∪ later neighbours`; its parent is the
/// bag of the earliest-eliminated later neighbour. Components are joined under
/// an extra empty-bag root.
pub fn elimination_decomposition(g: &Graph, order: &[usize]) -> TreeDecomposition {
    let n = g.num_vertices();
    assert_eq!(order.len(), n, "ordering must list every vertex");
    if n == 0 {
        return TreeDecomposition::single_bag(Vec::new());
    }
    let mut pos = vec![0; n];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }
    let mut eg = EliminationGraph::new(g);
    let mut bags = Vec::with_capacity(n + 1);
    let mut parent = Vec::with_capacity(n + 1);
    for &v in order {
        let later = eg.eliminate(v);
        let p = later.iter().copied().min_by_key(|&u| pos[u]).map(|u| pos[u]);
        let mut bag = later;
        bag.push(v);
        bags.push(bag);
        parent.push(p);
    }
    let roots: Vec<usize> = (0..n).filter(|&x| parent[x].is_none()).collect();
    if roots.len() > 1 {
        let top = bags.len();
        bags.push(Vec::new());
        parent.push(None);
        for r in roots {
            parent[r] = Some(top);
        }
    }
    TreeDecomposition::new(bags, parent)
}

fn ordering_width(g: &Graph, order: &[usize]) -> usize {
    let mut eg = EliminationGraph::new(g);
    order.iter().map(|&v| eg.eliminate(v).len()).max().unwrap_or(0)
}

/// Bitmask branch and bound over elimination orderings (graphs of at most 128 vertices).
struct ExactSearch {
    best_width: usize,
    best_order: Option<Vec<usize>>,
    /// Smallest running width seen for each remaining set.
    memo: HashMap<u128, usize>,
    expansions: usize,
    exhausted: bool,
}

fn bits(mut mask: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let v = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(v)
        }
    })
}

/// Minor-min-width lower bound on the treewidth of the graph induced by `remaining`.
fn minor_min_width(adj: &[u128], remaining: u128) -> usize {
    let mut adj: Vec<u128> = adj.iter().map(|a| a & remaining).collect();
    let mut live = remaining;
    let mut lb = 0;
    while live != 0 {
        let v = bits(live).min_by_key(|&v| (adj[v] & live).count_ones()).unwrap();
        let nb = adj[v] & live;
        lb = lb.max(nb.count_ones() as usize);
        live &= !(1u128 << v);
        if nb != 0 {
            // contract v into its lowest-degree neighbour
            let u = bits(nb).min_by_key(|&u| (adj[u] & live).count_ones()).unwrap();
            let merged = (adj[u] | nb) & !(1u128 << u) & live;
            adj[u] = merged;
            for w in bits(merged) {
                adj[w] |= 1u128 << u;
            }
        }
    }
    lb
}

impl ExactSearch {
    fn dfs(&mut self, adj: &[u128], remaining: u128, width: usize, order: &mut Vec<usize>) {
        if self.exhausted {
            return;
        }
        let count = remaining.count_ones() as usize;
        if count == 0 || count <= width + 1 {
            // the rest cannot push the width beyond max(width, count - 1)
            let total = width.max(count.saturating_sub(1));
            if total < self.best_width {
                self.best_width = total;
                let mut full = order.clone();
                full.extend(bits(remaining));
                self.best_order = Some(full);
            }
            return;
        }
        if width.max(minor_min_width(adj, remaining)) >= self.best_width {
            return;
        }
        if let Some(&seen) = self.memo.get(&remaining) {
            if seen <= width {
                return;
            }
        }
        self.memo.insert(remaining, width);
        self.expansions += 1;
        if self.expansions > EXACT_NODE_BUDGET {
            self.exhausted = true;
            return;
        }

        let is_clique = |nb: u128| bits(nb).all(|x| (adj[x] | (1u128 << x)) & nb == nb);
        // a simplicial vertex can always be eliminated first
        let simplicial = bits(remaining).find(|&v| is_clique(adj[v] & remaining));
        let candidates: Vec<usize> = match simplicial {
            Some(v) => vec![v],
            None => {
                let mut c: Vec<(usize, usize)> = bits(remaining)
                    .map(|v| {
                        let nb = adj[v] & remaining;
                        let fill: usize = bits(nb).map(|x| (nb & !adj[x] & !(1u128 << x)).count_ones() as usize).sum();
                        (fill, v)
                    })
                    .collect();
                c.sort_unstable();
                c.into_iter().map(|(_, v)| v).collect()
            }
        };
        for v in candidates {
            let nb = adj[v] & remaining;
            let deg = nb.count_ones() as usize;
            if deg.max(width) >= self.best_width {
                continue;
            }
            let mut next = adj.to_vec();
            for x in bits(nb) {
                next[x] |= nb & !(1u128 << x);
            }
            order.push(v);
            self.dfs(&next, remaining & !(1u128 << v), width.max(deg), order);
            order.pop();
            if self.exhausted {
                return;
            }
        }
    }
}

fn exact_order(g: &Graph, upper: usize) -> Option<Vec<usize>> {
    let n = g.num_vertices();
    let mut adj = vec![0u128; n];
    for (u, v) in g.edges() {
        adj[u] |= 1u128 << v;
        adj[v] |= 1u128 << u;
    }
    let all = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    if minor_min_width(&adj, all) >= upper {
        return None;
    }
    let mut search = ExactSearch { best_width: upper, best_order: None, memo: HashMap::new(), expansions: 0, exhausted: false };
    search.dfs(&adj, all, 0, &mut Vec::with_capacity(n));
    if search.exhausted {
        log::debug!("exact treewidth search hit its node budget; keeping best ordering found");
    }
    search.best_order
}

/// Tree decomposition of `g`.
///
/// The min-fill heuristic runs first; if its width is at most
/// `exact_width_limit`, branch and bound looks for a narrower ordering. When the
/// search completes within its budget the returned width is the treewidth.
pub fn compute_decomposition(g: &Graph, exact_width_limit: usize) -> TreeDecomposition {
    let mut order = min_fill_order(g);
    let heuristic = ordering_width(g, &order);
    if heuristic <= exact_width_limit && g.num_vertices() <= EXACT_MAX_VERTICES && heuristic > 0 {
        if let Some(better) = exact_order(g, heuristic) {
            order = better;
        }
    }
    elimination_decomposition(g, &order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>())
    }

    fn clique(n: usize) -> Graph {
        let mut e = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                e.push((a, b));
            }
        }
        Graph::from_edges(n, &e)
    }

    /// Treewidth by trying every elimination ordering (tiny graphs only).
    fn brute_treewidth(g: &Graph) -> usize {
        fn permute(g: &Graph, rest: &mut Vec<usize>, order: &mut Vec<usize>, best: &mut usize) {
            if rest.is_empty() {
                *best = (*best).min(ordering_width(g, order));
                return;
            }
            for k in 0..rest.len() {
                let v = rest.remove(k);
                order.push(v);
                permute(g, rest, order, best);
                order.pop();
                rest.insert(k, v);
            }
        }
        let mut best = usize::MAX;
        permute(g, &mut (0..g.num_vertices()).collect(), &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn tree_has_width_one() {
        let g = Graph::from_edges(7, &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (5, 6)]);
        let td = compute_decomposition(&g, 8);
        assert_eq!(td.validate(&g), Ok(()));
        assert_eq!(td.width(), 1);
    }

    #[test]
    fn cycle_has_width_two() {
        for n in 3..10 {
            let g = cycle(n);
            let td = compute_decomposition(&g, 8);
            assert_eq!(td.validate(&g), Ok(()));
            assert_eq!(td.width(), 2);
        }
    }

    #[test]
    fn clique_has_width_size_minus_one() {
        for t in 0..6 {
            let g = clique(t + 2);
            let td = compute_decomposition(&g, 8);
            assert_eq!(td.validate(&g), Ok(()));
            assert_eq!(td.width(), t + 1);
        }
    }

    #[test]
    fn disconnected_components_join_under_empty_root() {
        let g = Graph::from_edges(5, &[(0, 1), (2, 3)]);
        let td = compute_decomposition(&g, 8);
        assert_eq!(td.validate(&g), Ok(()));
        let root = td.root().unwrap();
        assert!(td.bag(root).is_empty());
        assert_eq!(td.width(), 1);
    }

    #[test]
    fn exact_search_beats_weak_order() {
        // 3x3 grid: treewidth 3
        let mut e = Vec::new();
        for r in 0..3 {
            for c in 0..3 {
                let v = r * 3 + c;
                if c < 2 {
                    e.push((v, v + 1));
                }
                if r < 2 {
                    e.push((v, v + 3));
                }
            }
        }
        let g = Graph::from_edges(9, &e);
        let td = compute_decomposition(&g, 8);
        assert_eq!(td.validate(&g), Ok(()));
        assert_eq!(td.width(), 3);
    }

    #[test]
    fn empty_graph() {
        let g = Graph::new(0);
        let td = compute_decomposition(&g, 8);
        assert_eq!(td.num_nodes(), 1);
        let g = Graph::new(3);
        let td = compute_decomposition(&g, 8);
        assert_eq!(td.validate(&g), Ok(()));
        assert_eq!(td.width(), 0);
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut g = Graph::new(n);
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(p) {
                    g.add_edge(a, b);
                }
            }
        }
        g
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn decompositions_are_valid(n in 1usize..=20, p in 0.05f64..0.6, seed in any::<u64>()) {
            let g = random_graph(n, p, seed);
            let td = compute_decomposition(&g, DEFAULT_EXACT_WIDTH_LIMIT);
            prop_assert_eq!(td.validate(&g), Ok(()));
        }

        #[test]
        fn exact_width_matches_permutation_oracle(n in 1usize..=7, p in 0.1f64..0.9, seed in any::<u64>()) {
            let g = random_graph(n, p, seed);
            let td = compute_decomposition(&g, DEFAULT_EXACT_WIDTH_LIMIT);
            prop_assert_eq!(td.width(), brute_treewidth(&g));
        }
    }
}
