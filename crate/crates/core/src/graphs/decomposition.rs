use std::fmt::Write as _;

use thiserror::Error;

use super::{intersection_graph, Graph};
use crate::model::GroupModel;

/// A rooted tree decomposition: one bag per node, `parent[root] == None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    bags: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
}

/// First violated tree-decomposition property, with a witness.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("decomposition has no nodes")]
    Empty,
    #[error("node structure is not a tree: {0}")]
    NotATree(String),
    #[error("bag of node {node} contains vertex {vertex} not in the graph")]
    UnknownVertex { node: usize, vertex: usize },
    #[error("property 1: vertex {vertex} is in no bag")]
    VertexUncovered { vertex: usize },
    #[error("property 2: bags containing vertex {vertex} are disconnected (nodes {first} and {second})")]
    VertexDisconnected { vertex: usize, first: usize, second: usize },
    #[error("property 3: edge ({u}, {v}) is in no bag")]
    EdgeUncovered { u: usize, v: usize },
}

impl TreeDecomposition {
    /// Bags are sorted and deduplicated. Structure is checked by [`validate`](Self::validate).
    pub fn new(bags: Vec<Vec<usize>>, parent: Vec<Option<usize>>) -> Self {
        assert_eq!(bags.len(), parent.len(), "one parent entry per bag");
        let bags = bags
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b.dedup();
                b
            })
            .collect();
        TreeDecomposition { bags, parent }
    }

    pub fn single_bag(vertices: Vec<usize>) -> Self {
        TreeDecomposition::new(vec![vertices], vec![None])
    }

    pub fn num_nodes(&self) -> usize {
        self.bags.len()
    }

    pub fn bag(&self, node: usize) -> &[usize] {
        &self.bags[node]
    }

    pub fn bags(&self) -> &[Vec<usize>] {
        &self.bags
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn root(&self) -> Option<usize> {
        self.parent.iter().position(Option::is_none)
    }

    /// Children lists, ascending.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.bags.len()];
        for (x, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                ch[*p].push(x);
            }
        }
        ch
    }

    /// Largest bag size minus one (0 when every bag is empty).
    pub fn width(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(0).saturating_sub(1)
    }

    fn check_tree(&self) -> Result<usize, Violation> {
        let t = self.bags.len();
        if t == 0 {
            return Err(Violation::Empty);
        }
        let roots: Vec<usize> = (0..t).filter(|&x| self.parent[x].is_none()).collect();
        if roots.len() != 1 {
            return Err(Violation::NotATree(format!("expected one root, found {}", roots.len())));
        }
        for (x, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= t {
                    return Err(Violation::NotATree(format!("node {x} has unknown parent {p}")));
                }
            }
        }
        // every node must reach the root; depth memo keeps this linear
        let mut state = vec![0u8; t]; // 0 unknown, 1 on path, 2 reaches root
        for start in 0..t {
            let mut path = Vec::new();
            let mut x = start;
            loop {
                match state[x] {
                    2 => break,
                    1 => return Err(Violation::NotATree(format!("cycle through node {x}"))),
                    _ => {}
                }
                state[x] = 1;
                path.push(x);
                match self.parent[x] {
                    Some(p) => x = p,
                    None => break,
                }
            }
            for y in path {
                state[y] = 2;
            }
        }
        Ok(roots[0])
    }

    /// Per-vertex list of nodes whose bag contains it.
    fn occurrences(&self, n: usize) -> Result<Vec<Vec<usize>>, Violation> {
        let mut occ = vec![Vec::new(); n];
        for (x, bag) in self.bags.iter().enumerate() {
            for &v in bag {
                if v >= n {
                    return Err(Violation::UnknownVertex { node: x, vertex: v });
                }
                occ[v].push(x);
            }
        }
        Ok(occ)
    }

    /// Checks the tree structure and the three decomposition properties, in order.
    pub fn validate(&self, g: &Graph) -> Result<(), Violation> {
        self.check_tree()?;
        let n = g.num_vertices();
        let occ = self.occurrences(n)?;
        if let Some(vertex) = occ.iter().position(Vec::is_empty) {
            return Err(Violation::VertexUncovered { vertex });
        }
        // connected iff exactly one occurrence has a parent outside the occurrence set
        let mut contains = vec![false; self.bags.len()];
        for (vertex, nodes) in occ.iter().enumerate() {
            for &x in nodes {
                contains[x] = true;
            }
            let tops: Vec<usize> = nodes
                .iter()
                .copied()
                .filter(|&x| self.parent[x].is_none_or(|p| !contains[p]))
                .take(2)
                .collect();
            for &x in nodes {
                contains[x] = false;
            }
            if tops.len() > 1 {
                return Err(Violation::VertexDisconnected { vertex, first: tops[0], second: tops[1] });
            }
        }
        for (u, v) in g.edges() {
            let (a, b) = (&occ[u], &occ[v]);
            let (mut i, mut j) = (0, 0);
            let mut shared = false;
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        shared = true;
                        break;
                    }
                }
            }
            if !shared {
                return Err(Violation::EdgeUncovered { u, v });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecompositionError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid decomposition: {0}")]
    Invalid(#[from] Violation),
}

/// One line per node: `<node> <parent|-> <bag vertices...>`. Lines starting with `#` are comments.
pub fn write_decomposition(td: &TreeDecomposition) -> String {
    let mut out = String::from("# node parent bag...\n");
    for x in 0..td.num_nodes() {
        let parent = td.parent(x).map_or_else(|| "-".to_string(), |p| p.to_string());
        let _ = write!(out, "{x} {parent}");
        for v in td.bag(x) {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

/// Parses the format of [`write_decomposition`]; node ids must be exactly `0..t`.
pub fn parse_decomposition(text: &str) -> Result<TreeDecomposition, DecompositionError> {
    let mut rows: Vec<(usize, Option<usize>, Vec<usize>, usize)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        let err = |message: String| DecompositionError::Syntax { line, message };
        let node = toks
            .next()
            .and_then(|t| t.parse::<usize>().ok())
            .ok_or_else(|| err("missing or invalid node id".into()))?;
        let parent = match toks.next() {
            Some("-") => None,
            Some(t) => Some(t.parse::<usize>().map_err(|_| err(format!("invalid parent '{t}'")))?),
            None => return Err(err("missing parent field".into())),
        };
        let bag = toks
            .map(|t| t.parse::<usize>().map_err(|_| err(format!("invalid vertex '{t}'"))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push((node, parent, bag, line));
    }
    let t = rows.len();
    let mut bags = vec![None; t];
    let mut parents = vec![None; t];
    for (node, parent, bag, line) in rows {
        if node >= t || bags[node].is_some() {
            return Err(DecompositionError::Syntax { line, message: format!("node id {node} repeated or outside 0..{t}") });
        }
        bags[node] = Some(bag);
        parents[node] = parent;
    }
    Ok(TreeDecomposition::new(bags.into_iter().map(Option::unwrap).collect(), parents))
}

impl TreeDecomposition {
    /// Parses and validates against `g`.
    pub fn load(text: &str, g: &Graph) -> Result<TreeDecomposition, DecompositionError> {
        let td = parse_decomposition(text)?;
        td.validate(g)?;
        Ok(td)
    }
}

/// Turns a decomposition of the intersection graph into one of the incidence graph.
///
/// For every element `i`, the groups containing it form a clique of the
/// intersection graph, so some bag holds all of them; a new leaf with bag
/// `groups(i) ∪ {i}` is attached there. Group `j` becomes vertex `N + j`.
pub fn lift_intersection_to_incidence(
    td: &TreeDecomposition,
    model: &GroupModel,
) -> Result<TreeDecomposition, Violation> {
    let int = intersection_graph(model);
    td.validate(&int.graph)?;
    let n = model.ground_size();
    let mut bags: Vec<Vec<usize>> = td.bags().iter().map(|b| b.iter().map(|&j| n + j).collect()).collect();
    let mut parent: Vec<Option<usize>> = (0..td.num_nodes()).map(|x| td.parent(x)).collect();
    for i in 0..n {
        let owners = model.memberships(i);
        let host = (0..td.num_nodes())
            .find(|&x| owners.iter().all(|j| td.bag(x).binary_search(j).is_ok()))
            .ok_or_else(|| Violation::NotATree(format!("no bag holds all groups of element {i}")))?;
        let mut bag: Vec<usize> = owners.iter().map(|&j| n + j).collect();
        bag.push(i);
        bags.push(bag);
        parent.push(Some(host));
    }
    Ok(TreeDecomposition::new(bags, parent))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{compute_decomposition, incidence_graph};
    use crate::model::tests::four_groups;

    fn sample_graph() -> Graph {
        // two triangles glued along edge 1-2 plus a pendant path: width 2
        Graph::from_edges(6, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (3, 4), (4, 5), (2, 4)])
    }

    #[test]
    fn single_bag_is_valid() {
        let g = sample_graph();
        let td = TreeDecomposition::single_bag((0..6).collect());
        assert_eq!(td.validate(&g), Ok(()));
        assert_eq!(td.width(), 5);
    }

    #[test]
    fn width_two_decomposition_is_valid() {
        let g = sample_graph();
        let td = TreeDecomposition::new(
            vec![vec![0, 1, 2], vec![1, 2, 3], vec![2, 3, 4], vec![4, 5]],
            vec![Some(1), None, Some(1), Some(2)],
        );
        assert_eq!(td.validate(&g), Ok(()));
        assert_eq!(td.width(), 2);
    }

    #[test]
    fn split_vertex_is_reported() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        let td = TreeDecomposition::new(vec![vec![0, 1], vec![1, 2], vec![0]], vec![None, Some(0), Some(1)]);
        assert_eq!(td.validate(&g), Err(Violation::VertexDisconnected { vertex: 0, first: 0, second: 2 }));
    }

    #[test]
    fn uncovered_vertex_and_edge() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let td = TreeDecomposition::new(vec![vec![0, 1], vec![1, 2]], vec![None, Some(0)]);
        assert_eq!(td.validate(&g), Err(Violation::EdgeUncovered { u: 0, v: 2 }));
        let td = TreeDecomposition::new(vec![vec![0, 1]], vec![None]);
        assert_eq!(td.validate(&g), Err(Violation::VertexUncovered { vertex: 2 }));
    }

    #[test]
    fn broken_trees_rejected() {
        let g = Graph::new(1);
        let td = TreeDecomposition::new(vec![vec![0], vec![0]], vec![None, None]);
        assert!(matches!(td.validate(&g), Err(Violation::NotATree(_))));
        let td = TreeDecomposition::new(vec![vec![0], vec![0], vec![0]], vec![None, Some(2), Some(1)]);
        assert!(matches!(td.validate(&g), Err(Violation::NotATree(_))));
    }

    #[test]
    fn text_round_trip_and_load() {
        let g = sample_graph();
        let td = compute_decomposition(&g, 8);
        let text = write_decomposition(&td);
        assert_eq!(TreeDecomposition::load(&text, &g).unwrap(), td);
        let bad = "0 - 0 1\n1 0 1 2\n";
        assert!(matches!(TreeDecomposition::load(bad, &g), Err(DecompositionError::Invalid(_))));
        assert!(matches!(parse_decomposition("0 x 1\n"), Err(DecompositionError::Syntax { line: 1, .. })));
        assert!(matches!(parse_decomposition("0 -\n0 - 1\n"), Err(DecompositionError::Syntax { line: 2, .. })));
    }

    #[test]
    fn lift_star_model() {
        for t in 0..=4usize {
            let n = t + 3;
            let groups: Vec<Vec<usize>> = (0..t + 2).map(|i| vec![i, t + 2]).collect();
            let model = GroupModel::new(n, groups, 1, n).unwrap();
            let int = intersection_graph(&model);
            let td_int = compute_decomposition(&int.graph, 8);
            assert_eq!(td_int.width(), t + 1);
            let lifted = lift_intersection_to_incidence(&td_int, &model).unwrap();
            let inc = incidence_graph(&model);
            assert_eq!(lifted.validate(&inc.graph), Ok(()));
            assert!(lifted.width() <= t + 2);
            // the incidence graph is a tree: its own decomposition has width 1
            assert_eq!(compute_decomposition(&inc.graph, 8).width(), 1);
        }
    }

    #[test]
    fn lift_disjoint_blocks() {
        let model = GroupModel::from_one_based(4, &[&[1, 2], &[3, 4]], 1, 4).unwrap();
        let td = TreeDecomposition::new(vec![vec![], vec![0], vec![1]], vec![None, Some(0), Some(0)]);
        assert_eq!(td.width(), 0);
        let lifted = lift_intersection_to_incidence(&td, &model).unwrap();
        assert!(lifted.width() <= 1);
        assert_eq!(lifted.validate(&incidence_graph(&model).graph), Ok(()));
    }

    #[test]
    fn lift_four_groups() {
        let model = four_groups(1, 4);
        let int = intersection_graph(&model);
        let td = compute_decomposition(&int.graph, 8);
        assert_eq!(td.width(), 2);
        let lifted = lift_intersection_to_incidence(&td, &model).unwrap();
        assert!(lifted.width() <= 3);
        assert_eq!(lifted.validate(&incidence_graph(&model).graph), Ok(()));
    }

    #[test]
    fn lift_rejects_invalid_input() {
        let model = four_groups(1, 4);
        let td = TreeDecomposition::single_bag(vec![0, 1, 2]);
        assert!(lift_intersection_to_incidence(&td, &model).is_err());
    }
}
