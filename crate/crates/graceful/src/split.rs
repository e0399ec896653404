//! Tree splitting: given a protected set S, delete a small waste set W so
//! that what remains of the tree is an exact multiple of a uniform rooted
//! forest whose roots carry all the adjacency to S.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use crate::tree::{ForestShape, RootedComponent, RootedForest, Tree};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SplitError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("order {0} too small: {1}")]
    TooSmall(usize, String),
}

/// Configuration for `split_structure`.
///
/// When `zeta` is unset the multiplicity is chosen adaptively as the
/// largest value whose trimming step deletes at most `delta * n / 2`
/// vertices.
#[derive(Debug, Clone)]
pub struct SplitConfig {
    pub m: usize,
    pub delta: f64,
    pub zeta: Option<f64>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            m: 8,
            delta: 0.1,
            zeta: None,
        }
    }
}

/// The `(S, W, F, multiplicity)` decomposition certificate.
#[derive(Debug, Clone)]
pub struct SplitResult {
    pub s: Vec<usize>,
    pub w: Vec<usize>,
    pub shape: ForestShape,
    pub multiplicity: usize,
    pub forest: RootedForest,
}

impl SplitResult {
    /// Structural re-verification: the rooted-code census of the surviving
    /// forest equals `shape x multiplicity` exactly, W and S are disjoint,
    /// and per component only the root may neighbour S (at most once).
    pub fn verify(&self, tree: &Tree) -> Result<(), String> {
        let s_set: HashSet<usize> = self.s.iter().copied().collect();
        let w_set: HashSet<usize> = self.w.iter().copied().collect();
        if !s_set.is_disjoint(&w_set) {
            return Err("W intersects S".into());
        }
        let mut census: BTreeMap<String, usize> = BTreeMap::new();
        for comp in &self.forest.components {
            let (code, _) = comp.rooted_code_order();
            *census.entry(code).or_insert(0) += 1;
            let mut s_edges = 0usize;
            for &v in &comp.vertices {
                let touches = tree
                    .neighbours(v)
                    .iter()
                    .filter(|w| s_set.contains(w))
                    .count();
                if touches > 0 && v != comp.root {
                    return Err(format!("non-root vertex {v} neighbours S"));
                }
                s_edges += touches;
            }
            if s_edges > 1 {
                return Err(format!(
                    "component rooted at {} sends {s_edges} edges to S",
                    comp.root
                ));
            }
        }
        for (code, count) in &census {
            match self.shape.counts.get(code) {
                Some(&per_copy) if per_copy * self.multiplicity == *count => {}
                _ => return Err(format!("census mismatch for class {code}")),
            }
        }
        if census.len() != self.shape.counts.len() {
            return Err("shape lists classes absent from the forest".into());
        }
        Ok(())
    }

    /// Debug document: S, W, shape classes with counts, multiplicity.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("multiplicity {}\n", self.multiplicity));
        out.push_str(&format!(
            "S {}\n",
            self.s
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        ));
        out.push_str(&format!(
            "W {}\n",
            self.w
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        ));
        for (code, count) in &self.shape.counts {
            out.push_str(&format!("class {count} {code}\n"));
        }
        out
    }
}

/// Connected components of the tree restricted to non-removed vertices,
/// each sorted, in ascending order of minimum vertex id.
pub(crate) fn alive_components(tree: &Tree, removed: &[bool]) -> Vec<Vec<usize>> {
    let n = tree.n();
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for start in 0..n {
        if removed[start] || seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            comp.push(u);
            for &w in tree.neighbours(u) {
                if !removed[w] && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// A vertex of the induced component whose removal leaves pieces of order
/// at most `|comp| / 2`, found by descending into the heavy subtree.
fn component_centroid(tree: &Tree, comp: &[usize], removed: &[bool]) -> usize {
    if comp.len() == 1 {
        return comp[0];
    }
    let index: std::collections::HashMap<usize, usize> =
        comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let k = comp.len();
    let root = comp[0];
    let mut parent = vec![usize::MAX; k];
    let mut order = Vec::with_capacity(k);
    let mut stack = vec![root];
    let mut seen = vec![false; k];
    seen[index[&root]] = true;
    while let Some(u) = stack.pop() {
        order.push(u);
        for &w in tree.neighbours(u) {
            if removed[w] {
                continue;
            }
            let iw = index[&w];
            if !seen[iw] {
                seen[iw] = true;
                parent[iw] = u;
                stack.push(w);
            }
        }
    }
    let mut size = vec![1usize; k];
    for &u in order.iter().rev() {
        let p = parent[index[&u]];
        if p != usize::MAX {
            size[index[&p]] += size[index[&u]];
        }
    }
    let mut v = root;
    loop {
        let mut heavy: Option<usize> = None;
        for &w in tree.neighbours(v) {
            if removed[w] || parent[index[&w]] != v {
                continue;
            }
            if 2 * size[index[&w]] > k {
                heavy = Some(w);
                break;
            }
        }
        match heavy {
            Some(w) => {
                // Reroot bookkeeping: moving into w flips the subtree sizes.
                size[index[&v]] = k - size[index[&w]];
                size[index[&w]] = k;
                parent[index[&v]] = w;
                parent[index[&w]] = usize::MAX;
                v = w;
            }
            None => return v,
        }
    }
}

/// Vertex whose removal leaves components of order <= n/2.
pub fn centroid_vertex(tree: &Tree) -> usize {
    let comp: Vec<usize> = (0..tree.n()).collect();
    component_centroid(tree, &comp, &vec![false; tree.n()])
}

/// `W = N_{T_S}(S) \ S` for the minimal subtree `T_S` spanning S.
///
/// Guarantees `|W| <= 6|S|` and that every component of `T \ (S u W)`
/// sends at most one edge into S.
pub fn steiner_separator(tree: &Tree, s: &[usize]) -> Vec<usize> {
    let n = tree.n();
    let s_set: HashSet<usize> = s.iter().copied().collect();
    if s_set.len() <= 1 {
        return Vec::new();
    }
    // Peel leaves not in S to expose the minimal spanning subtree.
    let mut in_ts = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|v| tree.degree(v)).collect();
    let mut queue: Vec<usize> = (0..n)
        .filter(|&v| degree[v] == 1 && !s_set.contains(&v))
        .collect();
    while let Some(v) = queue.pop() {
        in_ts[v] = false;
        for &w in tree.neighbours(v) {
            if in_ts[w] {
                degree[w] -= 1;
                if degree[w] == 1 && !s_set.contains(&w) {
                    queue.push(w);
                }
            }
        }
    }
    let mut w: Vec<usize> = (0..n)
        .filter(|&v| {
            in_ts[v]
                && !s_set.contains(&v)
                && tree
                    .neighbours(v)
                    .iter()
                    .any(|u| in_ts[*u] && s_set.contains(u))
        })
        .collect();
    w.sort_unstable();
    debug_assert!(w.len() <= 6 * s_set.len());
    w
}

/// Returns `(#leaves, sum over d >= 3 of (d - 2), + 2)`; the two numbers
/// are equal on every tree with at least two vertices.
pub fn leaf_count_identity(tree: &Tree) -> Result<(usize, usize), SplitError> {
    let n = tree.n();
    if n < 2 {
        return Err(SplitError::TooSmall(n, "identity needs n >= 2".into()));
    }
    let leaves = (0..n).filter(|&v| tree.degree(v) == 1).count();
    let branch: usize = (0..n)
        .map(|v| tree.degree(v))
        .filter(|&d| d >= 3)
        .map(|d| d - 2)
        .sum();
    Ok((leaves, branch + 2))
}

/// Recursive centroid deletion: after `k` rounds, `|W| <= 2^{k+1} - 1`
/// and every component of `T \ W` has order at most `n / 2^k`.
pub fn split_small_components(tree: &Tree, k: u32) -> Vec<usize> {
    let n = tree.n();
    let mut removed = vec![false; n];
    for step in 1..=k {
        let comps = alive_components(tree, &removed);
        for comp in comps {
            // Component order must drop to n / 2^step this round.
            if (comp.len() as u128) << step > n as u128 {
                let c = component_centroid(tree, &comp, &removed);
                removed[c] = true;
            }
        }
    }
    (0..n).filter(|&v| removed[v]).collect()
}

/// Deletion set with `|W| <= 4n/m` leaving every component of order <= m.
pub fn bound_components(tree: &Tree, m: usize) -> Vec<usize> {
    assert!(m >= 1);
    let n = tree.n();
    if n <= m {
        return Vec::new();
    }
    // k = ceil(log2(n / m))
    let mut k = 0u32;
    while (m as u128) << k < n as u128 {
        k += 1;
    }
    split_small_components(tree, k)
}

/// Outcome of the class-count trimming step.
#[derive(Debug, Clone)]
pub struct TrimResult {
    pub w3: Vec<usize>,
    pub shape: ForestShape,
    pub surviving: RootedForest,
}

/// Deletes whole components so that every surviving rooted-code class has
/// count divisible by `d` (classes with fewer than `d` copies vanish).
pub fn trim_to_uniform_forest(forest: &RootedForest, d: usize) -> TrimResult {
    assert!(d >= 1);
    let mut by_class: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (idx, comp) in forest.components.iter().enumerate() {
        let (code, _) = comp.rooted_code_order();
        by_class.entry(code).or_default().push(idx);
    }
    let mut w3 = Vec::new();
    let mut shape = ForestShape::default();
    let mut surviving = RootedForest::default();
    for (code, mut idxs) in by_class {
        // Keep the earliest components (by minimum vertex id).
        idxs.sort_by_key(|&i| forest.components[i].vertices[0]);
        let keep = (idxs.len() / d) * d;
        for &i in &idxs[..keep] {
            surviving.components.push(forest.components[i].clone());
        }
        for &i in &idxs[keep..] {
            w3.extend(forest.components[i].vertices.iter().copied());
        }
        if keep > 0 {
            shape.counts.insert(code, keep / d);
        }
    }
    w3.sort_unstable();
    TrimResult {
        w3,
        shape,
        surviving,
    }
}

fn rooted_forest_after_removal(tree: &Tree, removed: &[bool], s_set: &HashSet<usize>) -> RootedForest {
    let mut forest = RootedForest::default();
    for comp in alive_components(tree, removed) {
        let comp_set: HashSet<usize> = comp.iter().copied().collect();
        let mut edges = Vec::new();
        for &v in &comp {
            for &w in tree.neighbours(v) {
                if v < w && comp_set.contains(&w) {
                    edges.push((v, w));
                }
            }
        }
        let s_adjacent: Vec<usize> = comp
            .iter()
            .copied()
            .filter(|&v| tree.neighbours(v).iter().any(|u| s_set.contains(u)))
            .collect();
        // The Steiner separator guarantees at most one S-adjacent vertex
        // per component; more than one is a pipeline-order bug.
        assert!(
            s_adjacent.len() <= 1,
            "component with {} S-adjacent vertices",
            s_adjacent.len()
        );
        let root = s_adjacent.first().copied().unwrap_or(comp[0]);
        forest.components.push(RootedComponent {
            vertices: comp,
            edges,
            root,
        });
    }
    forest
}

/// Full splitting pipeline: Steiner separation, component bounding, root
/// marking, and class-count trimming.
pub fn split_structure(
    tree: &Tree,
    s: &[usize],
    config: &SplitConfig,
) -> Result<SplitResult, SplitError> {
    let n = tree.n();
    if config.m < 1 {
        return Err(SplitError::InvalidParams("m must be >= 1".into()));
    }
    if !(config.delta > 0.0 && config.delta < 1.0) {
        return Err(SplitError::InvalidParams(format!(
            "delta {} outside (0,1)",
            config.delta
        )));
    }
    let s_set: HashSet<usize> = s.iter().copied().collect();
    if s_set.len() as f64 > config.delta * n as f64 / 10.0 {
        return Err(SplitError::InvalidParams(format!(
            "|S| = {} exceeds delta n / 10 = {}",
            s_set.len(),
            config.delta * n as f64 / 10.0
        )));
    }
    for &v in s {
        if v >= n {
            return Err(SplitError::InvalidParams(format!("S vertex {v} not in tree")));
        }
    }

    let w1 = steiner_separator(tree, s);
    let w2 = bound_components(tree, config.m);
    let mut removed = vec![false; n];
    for &v in s.iter().chain(w1.iter()).chain(w2.iter()) {
        removed[v] = true;
    }
    let forest = rooted_forest_after_removal(tree, &removed, &s_set);

    // Census for multiplicity selection.
    let mut class_stats: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for comp in &forest.components {
        let (code, _) = comp.rooted_code_order();
        let entry = class_stats.entry(code).or_insert((0, comp.order()));
        entry.0 += 1;
    }
    let trim_cost = |d: usize| -> usize {
        class_stats
            .values()
            .map(|&(count, order)| (count % d) * order)
            .sum()
    };
    let d = match config.zeta {
        Some(z) => {
            let d = (z * n as f64).floor() as usize;
            if d < 1 {
                return Err(SplitError::InvalidParams(format!(
                    "zeta {z} gives multiplicity {d} < 1"
                )));
            }
            d
        }
        None => {
            let budget = (config.delta * n as f64 / 2.0).floor() as usize;
            let d_max = class_stats.values().map(|&(c, _)| c).max().unwrap_or(1);
            (1..=d_max)
                .rev()
                .find(|&d| trim_cost(d) <= budget)
                .unwrap_or(1)
        }
    };

    let trim = trim_to_uniform_forest(&forest, d);
    if trim.shape.counts.is_empty() && !forest.components.is_empty() {
        return Err(SplitError::Infeasible(format!(
            "multiplicity {d} deletes every class (max class count {})",
            class_stats.values().map(|&(c, _)| c).max().unwrap_or(0)
        )));
    }

    let mut w_set: HashSet<usize> = w1.into_iter().chain(w2).chain(trim.w3).collect();
    for v in &s_set {
        w_set.remove(v);
    }
    let mut w: Vec<usize> = w_set.into_iter().collect();
    w.sort_unstable();

    let mut s_sorted: Vec<usize> = s_set.into_iter().collect();
    s_sorted.sort_unstable();
    let result = SplitResult {
        s: s_sorted,
        w,
        shape: trim.shape,
        multiplicity: d,
        forest: trim.surviving,
    };
    debug_assert_eq!(result.verify(tree), Ok(()));
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{enumerate_trees, random_tree};

    fn path(n: usize) -> Tree {
        Tree::new(n, (0..n - 1).map(|i| (i, i + 1)).collect()).unwrap()
    }

    fn star(n: usize) -> Tree {
        Tree::new(n, (1..n).map(|v| (0, v)).collect()).unwrap()
    }

    fn one_edge_property(tree: &Tree, s: &[usize], w: &[usize]) -> bool {
        let s_set: HashSet<usize> = s.iter().copied().collect();
        let mut removed = vec![false; tree.n()];
        for &v in s.iter().chain(w.iter()) {
            removed[v] = true;
        }
        alive_components(tree, &removed).into_iter().all(|comp| {
            let count: usize = comp
                .iter()
                .map(|&v| {
                    tree.neighbours(v)
                        .iter()
                        .filter(|u| s_set.contains(u))
                        .count()
                })
                .sum();
            count <= 1
        })
    }

    #[test]
    fn steiner_empty_s() {
        assert!(steiner_separator(&path(7), &[]).is_empty());
        assert!(steiner_separator(&path(7), &[3]).is_empty());
    }

    #[test]
    fn steiner_path_endpoints() {
        let t = path(7);
        let w = steiner_separator(&t, &[0, 6]);
        assert_eq!(w, vec![1, 5]);
        assert!(one_edge_property(&t, &[0, 6], &w));
    }

    #[test]
    fn steiner_random_sweep() {
        use rand::seq::SliceRandom;
        use rand_chacha::rand_core::SeedableRng;
        for seed in 0..50 {
            let t = random_tree(200, seed);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut ids: Vec<usize> = (0..200).collect();
            ids.shuffle(&mut rng);
            let s = &ids[..10];
            let w = steiner_separator(&t, s);
            assert!(w.len() <= 6 * s.len());
            assert!(one_edge_property(&t, s, &w));
        }
    }

    #[test]
    fn leaf_identity_examples() {
        assert_eq!(leaf_count_identity(&path(5)).unwrap(), (2, 2));
        assert_eq!(leaf_count_identity(&star(7)).unwrap(), (6, 6));
        assert!(leaf_count_identity(&Tree::new(1, vec![]).unwrap()).is_err());
    }

    #[test]
    fn leaf_identity_exhaustive() {
        for n in 2..=9 {
            for t in enumerate_trees(n).unwrap() {
                let (a, b) = leaf_count_identity(&t).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn centroid_examples() {
        assert_eq!(centroid_vertex(&path(3)), 1);
        assert_eq!(centroid_vertex(&star(10)), 0);
    }

    #[test]
    fn centroid_bound_exhaustive() {
        for n in 1..=10 {
            for t in enumerate_trees(n).unwrap() {
                let c = centroid_vertex(&t);
                let mut removed = vec![false; t.n()];
                removed[c] = true;
                for comp in alive_components(&t, &removed) {
                    assert!(2 * comp.len() <= t.n());
                }
            }
        }
    }

    #[test]
    fn split_small_k0_trivial() {
        assert!(split_small_components(&path(8), 0).is_empty());
    }

    #[test]
    fn split_small_p8_k1() {
        let t = path(8);
        let w = split_small_components(&t, 1);
        assert!(w.len() <= 3);
        let mut removed = vec![false; 8];
        for &v in &w {
            removed[v] = true;
        }
        for comp in alive_components(&t, &removed) {
            assert!(comp.len() <= 4);
        }
    }

    #[test]
    fn split_small_random_bounds() {
        for seed in 0..10 {
            let t = random_tree(2000, seed);
            for k in 0..=6u32 {
                let w = split_small_components(&t, k);
                assert!(w.len() as u128 <= (1u128 << (k + 1)) - 1);
                let mut removed = vec![false; t.n()];
                for &v in &w {
                    removed[v] = true;
                }
                for comp in alive_components(&t, &removed) {
                    assert!((comp.len() as u128) << k <= t.n() as u128);
                }
            }
        }
    }

    #[test]
    fn bound_components_bounds() {
        let t = star(10);
        assert!(bound_components(&t, 10).is_empty());
        let w = bound_components(&t, 2);
        assert!(w.len() * 2 <= 4 * 10);
        let mut removed = vec![false; 10];
        for &v in &w {
            removed[v] = true;
        }
        for comp in alive_components(&t, &removed) {
            assert!(comp.len() <= 2);
        }
    }

    fn p2_forest(copies: usize) -> RootedForest {
        let mut f = RootedForest::default();
        for i in 0..copies {
            f.components.push(RootedComponent {
                vertices: vec![2 * i, 2 * i + 1],
                edges: vec![(2 * i, 2 * i + 1)],
                root: 2 * i,
            });
        }
        f
    }

    #[test]
    fn trim_five_p2_by_two() {
        let trim = trim_to_uniform_forest(&p2_forest(5), 2);
        assert_eq!(trim.w3.len(), 2);
        assert_eq!(trim.surviving.components.len(), 4);
        assert_eq!(trim.shape.counts.values().copied().sum::<usize>(), 2);
    }

    #[test]
    fn trim_mixed_classes() {
        // 3 copies of rooted P2 plus 7 single vertices, d = 3:
        // keep 3 P2s and 6 singles, delete 1 single.
        let mut f = p2_forest(3);
        for i in 0..7 {
            f.components.push(RootedComponent {
                vertices: vec![100 + i],
                edges: vec![],
                root: 100 + i,
            });
        }
        let trim = trim_to_uniform_forest(&f, 3);
        assert_eq!(trim.w3, vec![106]);
        assert_eq!(trim.surviving.components.len(), 9);
    }

    #[test]
    fn split_structure_path9() {
        let t = path(9);
        let cfg = SplitConfig {
            m: 3,
            delta: 0.9,
            zeta: None,
        };
        let result = split_structure(&t, &[], &cfg).unwrap();
        result.verify(&t).unwrap();
        assert!(result.multiplicity >= 1);
    }

    #[test]
    fn split_structure_random_invariants() {
        for seed in 0..10 {
            let t = random_tree(1000, seed);
            let s: Vec<usize> = (0..5).map(|i| i * 97).collect();
            let cfg = SplitConfig {
                m: 8,
                delta: 0.9,
                zeta: None,
            };
            let result = split_structure(&t, &s, &cfg).unwrap();
            result.verify(&t).unwrap();
        }
    }

    #[test]
    fn split_structure_rejects_large_s() {
        let t = path(50);
        let s: Vec<usize> = (0..30).collect();
        assert!(matches!(
            split_structure(&t, &s, &SplitConfig::default()),
            Err(SplitError::InvalidParams(_))
        ));
    }
}
