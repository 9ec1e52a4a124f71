use super::{Graph, TreeDecomposition, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NiceKind {
    Leaf,
    Introduce(usize),
    Forget(usize),
    Join,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceNode {
    pub kind: NiceKind,
    /// Sorted.
    pub bag: Vec<usize>,
    pub children: Vec<usize>,
}

/// Nodes are stored children-first, so index order is a valid bottom-up
/// schedule; the root is the last node and has an empty bag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceTreeDecomposition {
    nodes: Vec<NiceNode>,
}

impl NiceTreeDecomposition {
    pub fn nodes(&self) -> &[NiceNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn width(&self) -> usize {
        self.nodes.iter().map(|n| n.bag.len()).max().unwrap_or(0).saturating_sub(1)
    }

    pub fn kinds(&self) -> Vec<NiceKind> {
        self.nodes.iter().map(|n| n.kind).collect()
    }

    pub fn as_tree_decomposition(&self) -> TreeDecomposition {
        let mut parent = vec![None; self.nodes.len()];
        for (x, node) in self.nodes.iter().enumerate() {
            for &c in &node.children {
                parent[c] = Some(x);
            }
        }
        TreeDecomposition::new(self.nodes.iter().map(|n| n.bag.clone()).collect(), parent)
    }

    /// Node typing rules, empty leaf and root bags, then the decomposition properties.
    pub fn validate(&self, g: &Graph) -> Result<(), Violation> {
        let bad = |msg: String| Err(Violation::NotATree(msg));
        if self.nodes.is_empty() {
            return Err(Violation::Empty);
        }
        if !self.nodes[self.root()].bag.is_empty() {
            return bad("root bag is not empty".into());
        }
        for (x, node) in self.nodes.iter().enumerate() {
            if node.children.iter().any(|&c| c >= x) {
                return bad(format!("node {x} lists a child stored after it"));
            }
            let child_bag = |k: usize| &self.nodes[node.children[k]].bag;
            let ok = match node.kind {
                NiceKind::Leaf => node.children.is_empty() && node.bag.is_empty(),
                NiceKind::Introduce(v) => {
                    node.children.len() == 1 && {
                        let c = child_bag(0);
                        c.binary_search(&v).is_err() && {
                            let mut with = c.clone();
                            with.push(v);
                            with.sort_unstable();
                            with == node.bag
                        }
                    }
                }
                NiceKind::Forget(v) => {
                    node.children.len() == 1 && {
                        let c = child_bag(0);
                        node.bag.binary_search(&v).is_err() && {
                            let mut with = node.bag.clone();
                            with.push(v);
                            with.sort_unstable();
                            &with == c
                        }
                    }
                }
                NiceKind::Join => {
                    node.children.len() == 2 && child_bag(0) == &node.bag && child_bag(1) == &node.bag
                }
            };
            if !ok {
                return bad(format!("node {x} violates the {:?} typing rule", node.kind));
            }
        }
        self.as_tree_decomposition().validate(g)
    }
}

struct Builder<'a> {
    td: &'a TreeDecomposition,
    children: Vec<Vec<usize>>,
    nodes: Vec<NiceNode>,
}

impl Builder<'_> {
    fn push(&mut self, kind: NiceKind, bag: Vec<usize>, children: Vec<usize>) -> usize {
        self.nodes.push(NiceNode { kind, bag, children });
        self.nodes.len() - 1
    }

    /// Forgets `from \ to` in descending order, then introduces `to \ from` ascending.
    fn morph(&mut self, mut top: usize, to: &[usize]) -> usize {
        let from = self.nodes[top].bag.clone();
        for &v in from.iter().rev() {
            if to.binary_search(&v).is_err() {
                let bag: Vec<usize> = self.nodes[top].bag.iter().copied().filter(|&u| u != v).collect();
                top = self.push(NiceKind::Forget(v), bag, vec![top]);
            }
        }
        for &v in to {
            if from.binary_search(&v).is_err() {
                let mut bag = self.nodes[top].bag.clone();
                let pos = bag.binary_search(&v).unwrap_err();
                bag.insert(pos, v);
                top = self.push(NiceKind::Introduce(v), bag, vec![top]);
            }
        }
        top
    }

    /// Nice subtree whose top node has exactly the bag of `x`.
    fn build(&mut self, x: usize) -> usize {
        let bag = self.td.bag(x).to_vec();
        let kids = self.children[x].clone();
        if kids.is_empty() {
            let leaf = self.push(NiceKind::Leaf, Vec::new(), Vec::new());
            return self.morph(leaf, &bag);
        }
        let mut branches = Vec::with_capacity(kids.len());
        for c in kids {
            let sub = self.build(c);
            branches.push(self.morph(sub, &bag));
        }
        let mut acc = branches[0];
        for &b in &branches[1..] {
            acc = self.push(NiceKind::Join, bag.clone(), vec![acc, b]);
        }
        acc
    }
}

/// Converts a valid tree decomposition into a nice one of the same width.
///
/// Vertices are introduced in ascending and forgotten in descending order;
/// nodes with more than two children become chains of binary joins.
pub fn to_nice(td: &TreeDecomposition) -> NiceTreeDecomposition {
    let root = td.root().expect("decomposition must have a root");
    let mut b = Builder { td, children: td.children(), nodes: Vec::new() };
    let top = b.build(root);
    b.morph(top, &[]);
    NiceTreeDecomposition { nodes: b.nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::compute_decomposition;
    use proptest::prelude::*;

    #[test]
    fn single_bag_chain() {
        let td = TreeDecomposition::single_bag(vec![3, 7]);
        let nice = to_nice(&td);
        assert_eq!(
            nice.kinds(),
            vec![
                NiceKind::Leaf,
                NiceKind::Introduce(3),
                NiceKind::Introduce(7),
                NiceKind::Forget(7),
                NiceKind::Forget(3)
            ]
        );
        assert!(nice.nodes()[nice.root()].bag.is_empty());
        let g2 = Graph::from_edges(2, &[(0, 1)]);
        let nice2 = to_nice(&TreeDecomposition::single_bag(vec![0, 1]));
        assert_eq!(nice2.validate(&g2), Ok(()));
    }

    #[test]
    fn equal_adjacent_bags_merge() {
        let td = TreeDecomposition::new(vec![vec![0, 1], vec![0, 1]], vec![None, Some(0)]);
        let nice = to_nice(&td);
        assert!(!nice.kinds().contains(&NiceKind::Join));
        assert_eq!(nice.nodes().len(), 5);
    }

    #[test]
    fn three_children_become_two_joins() {
        let td = TreeDecomposition::new(
            vec![vec![0], vec![0, 1], vec![0, 2], vec![0, 3]],
            vec![None, Some(0), Some(0), Some(0)],
        );
        let nice = to_nice(&td);
        let joins = nice.kinds().iter().filter(|k| **k == NiceKind::Join).count();
        assert_eq!(joins, 2);
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(nice.validate(&g), Ok(()));
        assert_eq!(nice.width(), 1);
    }

    #[test]
    fn typing_violations_detected() {
        let g = Graph::from_edges(2, &[(0, 1)]);
        let mut nice = to_nice(&TreeDecomposition::single_bag(vec![0, 1]));
        nice.nodes[1].kind = NiceKind::Forget(0);
        assert!(matches!(nice.validate(&g), Err(Violation::NotATree(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn nice_preserves_width_and_validity(n in 1usize..=18, p in 0.05f64..0.5, seed in any::<u64>()) {
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
            let td = compute_decomposition(&g, 8);
            let nice = to_nice(&td);
            prop_assert_eq!(nice.width(), td.width());
            prop_assert_eq!(nice.validate(&g), Ok(()));
        }
    }
}
