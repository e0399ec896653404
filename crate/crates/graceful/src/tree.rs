//! Tree and rooted-forest representation, generation, canonical codes and
//! the edge-list text format shared by every other module.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("vertex id {id} out of range 0..{n}")]
    IdOutOfRange { id: usize, n: usize },
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("order {0} outside supported range 1..={1}")]
    UnsupportedOrder(usize, usize),
    #[error("root {0} not in tree of order {1}")]
    RootNotInTree(usize, usize),
}

/// An unrooted tree on dense vertex ids `0..n-1`.
///
/// Invariants enforced at construction: exactly `n-1` edges, connected,
/// no self-loops, no duplicate edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Tree {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self, TreeError> {
        if n == 0 {
            return Err(TreeError::NotATree("zero vertices".into()));
        }
        if edges.len() != n - 1 {
            return Err(TreeError::NotATree(format!(
                "{} edges on {} vertices",
                edges.len(),
                n
            )));
        }
        let mut adj = vec![Vec::new(); n];
        let mut seen = std::collections::HashSet::new();
        for &(u, v) in &edges {
            if u >= n {
                return Err(TreeError::IdOutOfRange { id: u, n });
            }
            if v >= n {
                return Err(TreeError::IdOutOfRange { id: v, n });
            }
            if u == v {
                return Err(TreeError::SelfLoop(u));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(TreeError::DuplicateEdge(key.0, key.1));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let tree = Tree { n, edges, adj };
        // n-1 edges and connected implies acyclic.
        let mut reached = 0usize;
        let mut visited = vec![false; n];
        let mut stack = vec![0usize];
        visited[0] = true;
        while let Some(u) = stack.pop() {
            reached += 1;
            for &w in &tree.adj[u] {
                if !visited[w] {
                    visited[w] = true;
                    stack.push(w);
                }
            }
        }
        if reached != n {
            return Err(TreeError::NotATree(format!(
                "disconnected: reached {reached} of {n} vertices"
            )));
        }
        Ok(tree)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.degree(v) == 1).collect()
    }

    /// Parses the edge-list document: first non-comment line holds `n`,
    /// each following line two ids. Lines starting with `#` are comments.
    pub fn parse(text: &str) -> Result<Self, TreeError> {
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if n.is_none() {
                n = Some(line.parse().map_err(|_| TreeError::Parse {
                    line: idx + 1,
                    msg: format!("expected vertex count, got {line:?}"),
                })?);
                continue;
            }
            let mut it = line.split_whitespace();
            let parse_id = |tok: Option<&str>| -> Result<usize, TreeError> {
                tok.ok_or(TreeError::Parse {
                    line: idx + 1,
                    msg: "expected two vertex ids".into(),
                })?
                .parse()
                .map_err(|_| TreeError::Parse {
                    line: idx + 1,
                    msg: format!("bad vertex id in {line:?}"),
                })
            };
            let u = parse_id(it.next())?;
            let v = parse_id(it.next())?;
            if it.next().is_some() {
                return Err(TreeError::Parse {
                    line: idx + 1,
                    msg: "trailing tokens after edge".into(),
                });
            }
            edges.push((u, v));
        }
        let n = n.ok_or(TreeError::Parse {
            line: 0,
            msg: "empty document".into(),
        })?;
        Tree::new(n, edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    /// Prüfer sequence of this tree (empty for n <= 2).
    pub fn prufer_sequence(&self) -> Vec<usize> {
        let n = self.n;
        if n <= 2 {
            return Vec::new();
        }
        let mut degree: Vec<usize> = (0..n).map(|v| self.degree(v)).collect();
        let mut removed = vec![false; n];
        let mut seq = Vec::with_capacity(n - 2);
        use std::collections::BinaryHeap;
        let mut leaves: BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
            .filter(|&v| degree[v] == 1)
            .map(std::cmp::Reverse)
            .collect();
        for _ in 0..n - 2 {
            let std::cmp::Reverse(leaf) = leaves.pop().expect("leaf available");
            removed[leaf] = true;
            let parent = *self.adj[leaf]
                .iter()
                .find(|&&w| !removed[w])
                .expect("parent of leaf");
            seq.push(parent);
            degree[parent] -= 1;
            if degree[parent] == 1 {
                leaves.push(std::cmp::Reverse(parent));
            }
        }
        seq
    }

    /// Decodes a Prüfer sequence over ids `0..n-1` into a labelled tree.
    pub fn from_prufer(n: usize, seq: &[usize]) -> Result<Self, TreeError> {
        if n == 0 {
            return Err(TreeError::NotATree("zero vertices".into()));
        }
        if n <= 2 {
            let edges = if n == 2 { vec![(0, 1)] } else { vec![] };
            return Tree::new(n, edges);
        }
        assert_eq!(seq.len(), n - 2, "prufer length");
        let mut count = vec![0usize; n];
        for &v in seq {
            assert!(v < n, "prufer id in range");
            count[v] += 1;
        }
        let mut edges = Vec::with_capacity(n - 1);
        use std::collections::BinaryHeap;
        let mut leaves: BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
            .filter(|&v| count[v] == 0)
            .map(std::cmp::Reverse)
            .collect();
        for &v in seq {
            let std::cmp::Reverse(leaf) = leaves.pop().expect("leaf available");
            edges.push((leaf, v));
            count[v] -= 1;
            if count[v] == 0 {
                leaves.push(std::cmp::Reverse(v));
            }
        }
        let std::cmp::Reverse(a) = leaves.pop().unwrap();
        let std::cmp::Reverse(b) = leaves.pop().unwrap();
        edges.push((a, b));
        Tree::new(n, edges)
    }
}

/// Uniform labelled tree on `n` vertices via a seeded Prüfer sequence.
pub fn random_tree(n: usize, seed: u64) -> Tree {
    assert!(n >= 1);
    if n <= 2 {
        return Tree::from_prufer(n, &[]).unwrap();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    Tree::from_prufer(n, &seq).unwrap()
}

pub const ENUMERATION_CAP: usize = 12;

/// One representative per isomorphism class of trees on `n` vertices.
///
/// Built by leaf extension from the classes on `n-1` vertices with
/// canonical-code deduplication, sorted by canonical code.
pub fn enumerate_trees(n: usize) -> Result<Vec<Tree>, TreeError> {
    if n == 0 || n > ENUMERATION_CAP {
        return Err(TreeError::UnsupportedOrder(n, ENUMERATION_CAP));
    }
    let mut current: BTreeMap<String, Tree> = BTreeMap::new();
    current.insert(
        free_code(&Tree::new(1, vec![]).unwrap()),
        Tree::new(1, vec![]).unwrap(),
    );
    for k in 2..=n {
        let mut next: BTreeMap<String, Tree> = BTreeMap::new();
        for tree in current.values() {
            for attach in 0..k - 1 {
                let mut edges = tree.edges().to_vec();
                edges.push((attach, k - 1));
                let extended = Tree::new(k, edges).unwrap();
                let code = free_code(&extended);
                next.entry(code).or_insert(extended);
            }
        }
        current = next;
    }
    Ok(current.into_values().collect())
}

/// AHU canonical code of `tree` rooted at `root`.
///
/// Equal codes iff rooted-isomorphic. The code is the usual parenthesis
/// encoding with children sorted lexicographically by their codes.
pub fn rooted_code(tree: &Tree, root: usize) -> Result<String, TreeError> {
    if root >= tree.n() {
        return Err(TreeError::RootNotInTree(root, tree.n()));
    }
    Ok(rooted_code_adj(&|v| tree.neighbours(v).to_vec(), tree.n(), root).0)
}

/// AHU code together with a canonical vertex ordering: position `k` in
/// the returned vector is the vertex matched to position `k` in any other
/// rooted tree with the same code.
pub fn rooted_code_order(tree: &Tree, root: usize) -> Result<(String, Vec<usize>), TreeError> {
    if root >= tree.n() {
        return Err(TreeError::RootNotInTree(root, tree.n()));
    }
    Ok(rooted_code_adj(&|v| tree.neighbours(v).to_vec(), tree.n(), root))
}

/// AHU code over an adjacency closure; iterative so deep paths are fine.
pub(crate) fn rooted_code_adj<F>(adj: &F, n: usize, root: usize) -> (String, Vec<usize>)
where
    F: Fn(usize) -> Vec<usize>,
{
    // Post-order pass computing codes, then a preorder pass emitting the
    // canonical vertex order with children sorted by code.
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![root];
    let mut seen = vec![false; n];
    seen[root] = true;
    while let Some(u) = stack.pop() {
        order.push(u);
        for w in adj(u) {
            if !seen[w] {
                seen[w] = true;
                parent[w] = u;
                stack.push(w);
            }
        }
    }
    let mut code: Vec<Option<String>> = vec![None; n];
    let mut children_sorted: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &u in order.iter().rev() {
        let mut kids: Vec<(String, usize)> = adj(u)
            .into_iter()
            .filter(|&w| parent[w] == u)
            .map(|w| (code[w].clone().expect("child code computed"), w))
            .collect();
        kids.sort();
        let mut s = String::from("(");
        for (c, _) in &kids {
            s.push_str(c);
        }
        s.push(')');
        children_sorted[u] = kids.into_iter().map(|(_, w)| w).collect();
        code[u] = Some(s);
    }
    let mut canon = Vec::with_capacity(order.len());
    let mut pre = vec![root];
    while let Some(u) = pre.pop() {
        canon.push(u);
        for &w in children_sorted[u].iter().rev() {
            pre.push(w);
        }
    }
    (code[root].take().unwrap(), canon)
}

/// Number of vertices encoded by an AHU code.
pub fn code_order(code: &str) -> usize {
    code.len() / 2
}

/// Canonical code of an unrooted tree: the minimum rooted code over the
/// tree's one or two centroids.
pub fn free_code(tree: &Tree) -> String {
    centroids(tree)
        .into_iter()
        .map(|c| rooted_code(tree, c).unwrap())
        .min()
        .unwrap()
}

/// The one or two vertices minimizing the maximum component order of
/// `T - v`; that minimum is always <= n/2.
pub fn centroids(tree: &Tree) -> Vec<usize> {
    let n = tree.n();
    if n == 1 {
        return vec![0];
    }
    // Subtree sizes from an arbitrary root.
    let mut parent = vec![usize::MAX; n];
    let mut bfs = vec![0usize];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut visit = Vec::with_capacity(n);
    while let Some(u) = bfs.pop() {
        visit.push(u);
        for &w in tree.neighbours(u) {
            if !seen[w] {
                seen[w] = true;
                parent[w] = u;
                bfs.push(w);
            }
        }
    }
    let mut size = vec![1usize; n];
    for &u in visit.iter().rev() {
        if parent[u] != usize::MAX {
            size[parent[u]] += size[u];
        }
    }
    let mut best = usize::MAX;
    let mut result = Vec::new();
    for v in 0..n {
        let mut worst = n - size[v];
        for &w in tree.neighbours(v) {
            if parent[w] == v {
                worst = worst.max(size[w]);
            }
        }
        match worst.cmp(&best) {
            std::cmp::Ordering::Less => {
                best = worst;
                result = vec![v];
            }
            std::cmp::Ordering::Equal => result.push(v),
            std::cmp::Ordering::Greater => {}
        }
    }
    debug_assert!(best * 2 <= n);
    result
}

/// One rooted component of a forest living in a shared vertex-id space.
#[derive(Debug, Clone)]
pub struct RootedComponent {
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub root: usize,
}

impl RootedComponent {
    pub fn order(&self) -> usize {
        self.vertices.len()
    }

    /// AHU code of the component rooted at its root, plus the matching
    /// canonical vertex order (original ids).
    pub fn rooted_code_order(&self) -> (String, Vec<usize>) {
        let index: std::collections::HashMap<usize, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i))
            .collect();
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(u, v) in &self.edges {
            let (iu, iv) = (index[&u], index[&v]);
            adj[iu].push(iv);
            adj[iv].push(iu);
        }
        let (code, local) =
            rooted_code_adj(&|v| adj[v].clone(), self.vertices.len(), index[&self.root]);
        (code, local.into_iter().map(|i| self.vertices[i]).collect())
    }
}

/// Forest with one distinguished root per component, vertex ids drawn
/// from a shared space (typically ids of an enclosing tree).
#[derive(Debug, Clone, Default)]
pub struct RootedForest {
    pub components: Vec<RootedComponent>,
}

impl RootedForest {
    pub fn total_order(&self) -> usize {
        self.components.iter().map(|c| c.order()).sum()
    }
}

/// Canonical rooted-tree codes with multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ForestShape {
    pub counts: BTreeMap<String, usize>,
}

impl ForestShape {
    pub fn total_vertices(&self) -> usize {
        self.counts
            .iter()
            .map(|(code, count)| code_order(code) * count)
            .sum()
    }

    pub fn class_count(&self) -> usize {
        self.counts.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Tree {
        Tree::new(n, (0..n - 1).map(|i| (i, i + 1)).collect()).unwrap()
    }

    #[test]
    fn parse_single_edge() {
        let t = Tree::parse("2\n0 1").unwrap();
        assert_eq!(t.n(), 2);
        assert_eq!(t.edges(), &[(0, 1)]);
    }

    #[test]
    fn parse_path5() {
        let t = Tree::parse("5\n0 1\n1 2\n2 3\n3 4").unwrap();
        assert_eq!(t.n(), 5);
        assert_eq!(t.degree(0), 1);
        assert_eq!(t.degree(2), 2);
    }

    #[test]
    fn parse_triangle_rejected() {
        let err = Tree::parse("4\n0 1\n1 2\n0 2").unwrap_err();
        assert!(matches!(err, TreeError::NotATree(_)));
    }

    #[test]
    fn parse_rejects_bad_ids_and_duplicates() {
        assert!(matches!(
            Tree::parse("3\n0 1\n1 5"),
            Err(TreeError::IdOutOfRange { id: 5, n: 3 })
        ));
        assert!(matches!(
            Tree::parse("3\n0 1\n1 0"),
            Err(TreeError::DuplicateEdge(0, 1))
        ));
    }

    #[test]
    fn parse_comments_allowed() {
        let t = Tree::parse("# a path\n3\n0 1\n# middle\n1 2\n").unwrap();
        assert_eq!(t.n(), 3);
    }

    #[test]
    fn random_tree_tiny_orders() {
        for seed in 0..5 {
            assert_eq!(random_tree(1, seed).n(), 1);
            assert_eq!(random_tree(2, seed).edges(), &[(0, 1)]);
        }
    }

    #[test]
    fn random_tree_deterministic_per_seed() {
        assert_eq!(random_tree(20, 7), random_tree(20, 7));
        assert_ne!(random_tree(20, 7), random_tree(20, 8));
    }

    #[test]
    fn prufer_round_trip() {
        for seed in 0..50 {
            let t = random_tree(9, seed);
            let seq = t.prufer_sequence();
            assert_eq!(Tree::from_prufer(9, &seq).unwrap(), t);
        }
    }

    #[test]
    fn enumeration_counts_small() {
        // 1, 1, 1, 2, 3, 6, 11, 23, 47, 106, 235, 551
        let expect = [1, 1, 1, 2, 3, 6, 11, 23, 47, 106];
        for (i, &want) in expect.iter().enumerate() {
            assert_eq!(enumerate_trees(i + 1).unwrap().len(), want, "n={}", i + 1);
        }
    }

    #[test]
    fn enumeration_cap_enforced() {
        assert!(enumerate_trees(13).is_err());
        assert!(enumerate_trees(0).is_err());
    }

    #[test]
    fn rooted_code_p3_cases() {
        let p3 = path(3);
        let centre = rooted_code(&p3, 1).unwrap();
        let leaf_a = rooted_code(&p3, 0).unwrap();
        let leaf_b = rooted_code(&p3, 2).unwrap();
        assert_ne!(centre, leaf_a);
        assert_eq!(leaf_a, leaf_b);
    }

    #[test]
    fn rooted_code_rejects_missing_root() {
        assert!(rooted_code(&path(3), 3).is_err());
    }

    #[test]
    fn rooted_class_counts_small_orders() {
        // Rooted tree classes per order: 1, 1, 2, 4, 9 (cumulative 8 at order 4).
        let mut per_order = Vec::new();
        for n in 1..=5 {
            let mut codes = std::collections::HashSet::new();
            for t in enumerate_trees(n).unwrap() {
                for root in 0..t.n() {
                    codes.insert(rooted_code(&t, root).unwrap());
                }
            }
            per_order.push(codes.len());
        }
        assert_eq!(per_order, vec![1, 1, 2, 4, 9]);
    }

    #[test]
    fn centroid_of_path_is_middle() {
        let cs = centroids(&path(5));
        assert_eq!(cs, vec![2]);
        let cs = centroids(&path(4));
        assert_eq!(cs, vec![1, 2]);
    }

    #[test]
    fn bfs_reaches_all_and_edge_count() {
        for seed in 0..20 {
            let t = random_tree(40, seed);
            assert_eq!(t.edges().len(), t.n() - 1);
            let mut seen = vec![false; t.n()];
            let mut stack = vec![0];
            seen[0] = true;
            let mut reached = 0;
            while let Some(u) = stack.pop() {
                reached += 1;
                for &w in t.neighbours(u) {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            assert_eq!(reached, t.n());
        }
    }
}
