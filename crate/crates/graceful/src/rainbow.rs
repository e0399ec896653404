//! Difference-coloured bipartite views, their tripartite hypergraph
//! counterparts, explicit spanning and interval matchings, and a greedy
//! matching engine with (2,1)-swap local search.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RainbowError {
    #[error("degenerate edge ({0},{0})")]
    DegenerateEdge(usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("edge ({0},{1}) outside the view")]
    OutsideView(usize, usize),
}

/// A hyperedge `{a, b, c}` with `c = b - a`; the three slots are distinct
/// vertex classes even when values coincide numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hyperedge {
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

impl Hyperedge {
    pub fn disjoint(&self, other: &Hyperedge) -> bool {
        self.a != other.a && self.b != other.b && self.c != other.c
    }
}

/// Maps an edge to its difference hyperedge, normalising so `a < b`.
pub fn theta(a: usize, b: usize) -> Result<Hyperedge, RainbowError> {
    if a == b {
        return Err(RainbowError::DegenerateEdge(a));
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    Ok(Hyperedge {
        a: lo,
        b: hi,
        c: hi - lo,
    })
}

pub fn theta_inverse(h: &Hyperedge) -> (usize, usize) {
    (h.a, h.b)
}

/// Bipartite subgraph of the difference-coloured complete graph: edges run
/// from A to B and carry colour `|b - a|` drawn from C.
#[derive(Debug, Clone)]
pub struct ColouredBipartiteView {
    pub a: BTreeSet<usize>,
    pub b: BTreeSet<usize>,
    pub c: BTreeSet<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl ColouredBipartiteView {
    pub fn new(
        a: BTreeSet<usize>,
        b: BTreeSet<usize>,
        c: BTreeSet<usize>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self, RainbowError> {
        if !a.is_disjoint(&b) {
            return Err(RainbowError::InvalidParams("A and B intersect".into()));
        }
        for &(x, y) in &edges {
            let colour = x.abs_diff(y);
            if !a.contains(&x) || !b.contains(&y) || !c.contains(&colour) {
                return Err(RainbowError::OutsideView(x, y));
            }
        }
        Ok(ColouredBipartiteView { a, b, c, edges })
    }

    pub fn hypergraph(&self) -> TripartiteHypergraph {
        let edges = self
            .edges
            .iter()
            .map(|&(x, y)| theta(x, y).unwrap())
            .collect();
        TripartiteHypergraph { edges }
    }
}

/// 3-partite 3-uniform hypergraph of difference triples.
#[derive(Debug, Clone, Default)]
pub struct TripartiteHypergraph {
    pub edges: Vec<Hyperedge>,
}

impl TripartiteHypergraph {
    /// Total tagged vertices across the three slots.
    pub fn vertex_count(&self) -> usize {
        let a: HashSet<usize> = self.edges.iter().map(|e| e.a).collect();
        let b: HashSet<usize> = self.edges.iter().map(|e| e.b).collect();
        let c: HashSet<usize> = self.edges.iter().map(|e| e.c).collect();
        a.len() + b.len() + c.len()
    }

    /// Any two distinct hyperedges share at most one slot value.
    pub fn is_linear(&self) -> bool {
        for (i, e) in self.edges.iter().enumerate() {
            for f in &self.edges[i + 1..] {
                let shared = (e.a == f.a) as usize + (e.b == f.b) as usize + (e.c == f.c) as usize;
                if shared > 1 {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_matching(&self, m: &[Hyperedge]) -> bool {
        for (i, e) in m.iter().enumerate() {
            for f in &m[i + 1..] {
                if !e.disjoint(f) {
                    return false;
                }
            }
        }
        true
    }
}

/// Vertex-disjoint edges with pairwise distinct difference colours.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RainbowMatching {
    pub edges: Vec<(usize, usize)>,
}

impl RainbowMatching {
    pub fn colours(&self) -> Vec<usize> {
        self.edges.iter().map(|&(a, b)| a.abs_diff(b)).collect()
    }

    pub fn is_valid(&self) -> bool {
        let mut verts = HashSet::new();
        let mut cols = HashSet::new();
        for &(a, b) in &self.edges {
            if a == b || !verts.insert(a) || !verts.insert(b) || !cols.insert(a.abs_diff(b)) {
                return false;
            }
        }
        true
    }
}

/// Evaluates both sides of the rainbow/hypergraph correspondence for an
/// edge set `m` drawn from `view`; the two verdicts always agree.
pub fn rainbow_iff_matching_check(
    m: &[(usize, usize)],
    view: &ColouredBipartiteView,
) -> Result<(bool, bool), RainbowError> {
    let in_view: HashSet<(usize, usize)> = view.edges.iter().copied().collect();
    for &(a, b) in m {
        if !in_view.contains(&(a, b)) {
            return Err(RainbowError::OutsideView(a, b));
        }
    }
    let rainbow = RainbowMatching { edges: m.to_vec() }.is_valid();
    let image: Vec<Hyperedge> = m.iter().map(|&(a, b)| theta(a, b).unwrap()).collect();
    let matching = view.hypergraph().is_matching(&image);
    Ok((rainbow, matching))
}

/// Spanning gadget on `[n]`: `A = [1, n/2]`, `B = [n/2+1, n]`, and for each
/// colour `c >= 2` the arithmetic family `{((n-c+i)/2, (n+c+i)/2)}` over
/// `i in [2s]`, kept when both endpoints are integers inside `A x B`.
///
/// Every colour in `[2s, n-2s]` appears on exactly `s` edges, no edge has
/// colour 1, and degrees stay at most `2s`.
pub fn spanning_difference_graph(n: usize, s: usize) -> Result<ColouredBipartiteView, RainbowError> {
    if n < 2 || n % 2 != 0 {
        return Err(RainbowError::InvalidParams(format!("n = {n} not even")));
    }
    if s < 1 || s > n / 2 {
        return Err(RainbowError::InvalidParams(format!(
            "s = {s} outside [1, {}]",
            n / 2
        )));
    }
    let half = n / 2;
    let a: BTreeSet<usize> = (1..=half).collect();
    let b: BTreeSet<usize> = (half + 1..=n).collect();
    let mut edges = Vec::new();
    let mut colours = BTreeSet::new();
    for c in 2..n {
        for i in 1..=2 * s {
            if (n + i) < c || (n - c + i) % 2 != 0 {
                continue;
            }
            let x = (n - c + i) / 2;
            let y = (n + c + i) / 2;
            if x >= 1 && x <= half && y > half && y <= n {
                edges.push((x, y));
                colours.insert(c);
            }
        }
    }
    ColouredBipartiteView::new(a, b, colours, edges)
}

/// Explicit rainbow perfect matching between the intervals
/// `I_i = [i*ell + 1, (i+1)*ell]` and `I_j` of the same odd length.
///
/// Colours are exactly the `ell` values centred on `(j - i) * ell`; the
/// first half of the pairs uses the odd offsets, the second half the even.
pub fn interval_matching(
    i: usize,
    j: usize,
    ell: usize,
    n: usize,
) -> Result<RainbowMatching, RainbowError> {
    if ell % 2 == 0 || ell == 0 {
        return Err(RainbowError::InvalidParams(format!("length {ell} not odd")));
    }
    if i >= j {
        return Err(RainbowError::InvalidParams(format!("need i < j, got {i}, {j}")));
    }
    if (j + 1) * ell > n {
        return Err(RainbowError::InvalidParams(format!(
            "interval {j} overflows [{n}]"
        )));
    }
    let half_up = ell.div_ceil(2);
    let mut edges = Vec::new();
    for y in 1..=half_up {
        edges.push((i * ell + y, j * ell + half_up + 1 - y));
    }
    for z in 1..=ell / 2 {
        edges.push((i * ell + half_up + z, (j + 1) * ell + 1 - z));
    }
    let m = RainbowMatching { edges };
    debug_assert!(m.is_valid());
    debug_assert!(m
        .colours()
        .iter()
        .all(|&c| c + ell / 2 >= (j - i) * ell && c <= (j - i) * ell + ell / 2));
    Ok(m)
}

/// Colour block of `interval_matching(i, j, ...)`.
pub fn interval_colour_block(i: usize, j: usize, ell: usize) -> (usize, usize) {
    ((j - i) * ell - ell / 2, (j - i) * ell + ell / 2)
}

fn greedy_fill(
    edges: &[Hyperedge],
    matching: &mut Vec<Hyperedge>,
    occ: &mut [HashMap<usize, usize>; 3],
) {
    for &e in edges {
        if !occ[0].contains_key(&e.a) && !occ[1].contains_key(&e.b) && !occ[2].contains_key(&e.c) {
            let idx = matching.len();
            occ[0].insert(e.a, idx);
            occ[1].insert(e.b, idx);
            occ[2].insert(e.c, idx);
            matching.push(e);
        }
    }
}

fn conflicts(e: &Hyperedge, occ: &[HashMap<usize, usize>; 3]) -> Vec<usize> {
    let mut out = Vec::with_capacity(3);
    for (slot, key) in [(0, e.a), (1, e.b), (2, e.c)] {
        if let Some(&idx) = occ[slot].get(&key) {
            if !out.contains(&idx) {
                out.push(idx);
            }
        }
    }
    out
}

/// Best-effort hypergraph matching: greedy insertion in seeded random
/// order, then (2,1)-swaps (drop one matched edge, insert two) until no
/// pass improves. Output is always a valid matching; the returned fraction
/// is the share of tagged vertices left uncovered.
pub fn hypergraph_matching(
    h: &TripartiteHypergraph,
    target_uncovered: f64,
    seed: u64,
) -> (Vec<Hyperedge>, f64) {
    let total = h.vertex_count();
    if total == 0 {
        return (Vec::new(), 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = h.edges.clone();
    order.sort_unstable();
    order.dedup();
    order.shuffle(&mut rng);

    let mut matching: Vec<Hyperedge> = Vec::new();
    let mut occ: [HashMap<usize, usize>; 3] = Default::default();
    greedy_fill(&order, &mut matching, &mut occ);

    let uncovered =
        |m: &Vec<Hyperedge>| (total - 3 * m.len().min(total / 3)) as f64 / total as f64;

    for _pass in 0..10 {
        if uncovered(&matching) <= target_uncovered {
            break;
        }
        // Bucket candidate edges by the unique matched edge they clash with.
        let mut buckets: HashMap<usize, Vec<Hyperedge>> = HashMap::new();
        for &e in &order {
            let cf = conflicts(&e, &occ);
            if cf.len() == 1 {
                buckets.entry(cf[0]).or_default().push(e);
            }
        }
        let mut improved = false;
        let mut victims: Vec<usize> = buckets.keys().copied().collect();
        victims.sort_unstable();
        for v in victims {
            let bucket = &buckets[&v];
            if v >= matching.len() {
                continue;
            }
            let mut done = false;
            let mut checked = 0usize;
            'pairs: for (p, e) in bucket.iter().enumerate() {
                // Buckets go stale after swaps elsewhere; revalidate now.
                if conflicts(e, &occ) != vec![v] {
                    continue;
                }
                for f in &bucket[p + 1..] {
                    checked += 1;
                    if checked > 5000 {
                        break 'pairs;
                    }
                    if e.disjoint(f) && conflicts(f, &occ) == vec![v] {
                        let old = matching[v];
                        for (slot, key) in [(0, old.a), (1, old.b), (2, old.c)] {
                            occ[slot].remove(&key);
                        }
                        matching[v] = *e;
                        for (slot, key) in [(0, e.a), (1, e.b), (2, e.c)] {
                            occ[slot].insert(key, v);
                        }
                        let idx = matching.len();
                        for (slot, key) in [(0, f.a), (1, f.b), (2, f.c)] {
                            occ[slot].insert(key, idx);
                        }
                        matching.push(*f);
                        improved = true;
                        done = true;
                        break 'pairs;
                    }
                }
            }
            let _ = done;
        }
        // Swaps can free slots for edges that were doubly blocked before.
        greedy_fill(&order, &mut matching, &mut occ);
        if !improved {
            break;
        }
    }
    debug_assert!(h.is_matching(&matching));
    let frac = uncovered(&matching);
    (matching, frac)
}

/// Spanning gadget edges grouped by colour, for repeated restricted
/// matching queries against one ambient `[n]`.
#[derive(Debug, Clone)]
pub struct GadgetIndex {
    pub n: usize,
    pub by_colour: std::collections::BTreeMap<usize, Vec<(usize, usize)>>,
}

pub fn gadget_index(n: usize, s: usize) -> Result<GadgetIndex, RainbowError> {
    let g = spanning_difference_graph(n, s)?;
    let mut by_colour: std::collections::BTreeMap<usize, Vec<(usize, usize)>> =
        std::collections::BTreeMap::new();
    for &(x, y) in &g.edges {
        by_colour.entry(y - x).or_default().push((x, y));
    }
    Ok(GadgetIndex { n, by_colour })
}

/// Coverage report for `random_pair_rainbow_matching`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCoverage {
    pub uncovered_s1: usize,
    pub uncovered_s2: usize,
    pub target: usize,
    pub met: bool,
}

/// Rainbow matching between two disjoint label sets whose colours also lie
/// in `S2`, avoiding colour 1. The instance splits along a seeded fair
/// colour bipartition into two linear hypergraphs handled independently;
/// fresh sub-seeds retry up to 20 times and the best coverage wins.
pub fn random_pair_rainbow_matching(
    n: usize,
    s1: &BTreeSet<usize>,
    s2: &BTreeSet<usize>,
    mu: f64,
    seed: u64,
) -> Result<(RainbowMatching, PairCoverage), RainbowError> {
    if n < 2 || n % 2 != 0 {
        return Err(RainbowError::InvalidParams(format!("n = {n} not even")));
    }
    if !s1.is_disjoint(s2) {
        return Err(RainbowError::InvalidParams("S1 and S2 intersect".into()));
    }
    // Dense enough for coverage, cheap enough to enumerate.
    let s_param = (n / 4).clamp(1, n / 2);
    let gadget = gadget_index(n, s_param)?;
    random_pair_rainbow_matching_indexed(&gadget, s1, s2, mu, seed)
}

/// As `random_pair_rainbow_matching`, reusing a prebuilt gadget index.
pub fn random_pair_rainbow_matching_indexed(
    gadget: &GadgetIndex,
    s1: &BTreeSet<usize>,
    s2: &BTreeSet<usize>,
    mu: f64,
    seed: u64,
) -> Result<(RainbowMatching, PairCoverage), RainbowError> {
    if !s1.is_disjoint(s2) {
        return Err(RainbowError::InvalidParams("S1 and S2 intersect".into()));
    }
    let target = (2.0 * mu * s1.len().max(s2.len()) as f64).floor() as usize;
    if s1.is_empty() || s2.is_empty() {
        let cov = PairCoverage {
            uncovered_s1: s1.len(),
            uncovered_s2: s2.len(),
            target,
            met: s1.len().max(s2.len()) <= target,
        };
        return Ok((RainbowMatching::default(), cov));
    }
    let half = gadget.n / 2;

    let mut best: Option<(RainbowMatching, PairCoverage)> = None;
    for attempt in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(crate::sub_seed(seed, "pair").wrapping_add(attempt));
        let mut p = HashSet::new();
        for &c in gadget.by_colour.keys() {
            if rand::Rng::gen_bool(&mut rng, 0.5) {
                p.insert(c);
            }
        }

        let mut h_p = TripartiteHypergraph::default();
        let mut h_q = TripartiteHypergraph::default();
        for &c in s2 {
            if c == 1 {
                continue;
            }
            let Some(pairs) = gadget.by_colour.get(&c) else {
                continue;
            };
            for &(x, y) in pairs {
                debug_assert!(x <= half && y > half);
                if s1.contains(&x) && s2.contains(&y) && p.contains(&c) {
                    h_p.edges.push(Hyperedge { a: x, b: y, c });
                }
                if s2.contains(&x) && s1.contains(&y) && !p.contains(&c) {
                    h_q.edges.push(Hyperedge { a: x, b: y, c });
                }
            }
        }

        let (m_p, _) = hypergraph_matching(&h_p, 0.0, crate::sub_seed(seed, "hp") ^ attempt);
        let (m_q, _) = hypergraph_matching(&h_q, 0.0, crate::sub_seed(seed, "hq") ^ attempt);
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut used_colours = HashSet::new();
        for e in m_p.iter().chain(m_q.iter()) {
            // The halves are vertex-disjoint by S1/S2 and colour-disjoint
            // by the bipartition, so the union stays rainbow.
            debug_assert!(used_colours.insert(e.c));
            edges.push((e.a, e.b));
        }
        let m = RainbowMatching { edges };
        debug_assert!(m.is_valid());

        let matched: HashSet<usize> = m.edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        let cov = PairCoverage {
            uncovered_s1: s1.iter().filter(|v| !matched.contains(v)).count(),
            uncovered_s2: s2.iter().filter(|v| !matched.contains(v)).count(),
            target,
            met: false,
        };
        let cov = PairCoverage {
            met: cov.uncovered_s1.max(cov.uncovered_s2) <= target,
            ..cov
        };
        let better = match &best {
            None => true,
            Some((_, old)) => {
                cov.uncovered_s1 + cov.uncovered_s2 < old.uncovered_s1 + old.uncovered_s2
            }
        };
        if better {
            let met = cov.met;
            best = Some((m, cov));
            if met {
                break;
            }
        }
    }
    Ok(best.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_examples() {
        assert_eq!(theta(1, 5).unwrap(), Hyperedge { a: 1, b: 5, c: 4 });
        assert_eq!(theta(7, 3).unwrap(), Hyperedge { a: 3, b: 7, c: 4 });
        assert!(theta(4, 4).is_err());
    }

    #[test]
    fn theta_round_trip() {
        for a in 1..=50 {
            for b in (a + 1)..=50 {
                assert_eq!(theta_inverse(&theta(a, b).unwrap()), (a, b));
            }
        }
    }

    fn small_view() -> ColouredBipartiteView {
        let a: BTreeSet<usize> = (1..=4).collect();
        let b: BTreeSet<usize> = (6..=9).collect();
        let c: BTreeSet<usize> = (2..=8).collect();
        let mut edges = Vec::new();
        for &x in &a {
            for &y in &b {
                if c.contains(&(y - x)) {
                    edges.push((x, y));
                }
            }
        }
        ColouredBipartiteView::new(a, b, c, edges).unwrap()
    }

    #[test]
    fn equivalence_small_cases() {
        let view = small_view();
        assert_eq!(rainbow_iff_matching_check(&[], &view).unwrap(), (true, true));
        assert_eq!(
            rainbow_iff_matching_check(&[(1, 5)], &view),
            Err(RainbowError::OutsideView(1, 5))
        );
        assert_eq!(
            rainbow_iff_matching_check(&[(2, 6), (3, 7)], &view).unwrap(),
            (false, false)
        );
        assert_eq!(
            rainbow_iff_matching_check(&[(1, 6), (2, 9)], &view).unwrap(),
            (true, true)
        );
    }

    #[test]
    fn equivalence_exhaustive_pairs() {
        let view = small_view();
        let e = &view.edges;
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                let (r, m) = rainbow_iff_matching_check(&[e[i], e[j]], &view).unwrap();
                assert_eq!(r, m);
            }
        }
    }

    #[test]
    fn linearity_when_parts_ordered() {
        assert!(small_view().hypergraph().is_linear());
    }

    #[test]
    fn gadget_example_n10() {
        let g = spanning_difference_graph(10, 2).unwrap();
        let colour4: Vec<(usize, usize)> = g
            .edges
            .iter()
            .copied()
            .filter(|&(x, y)| y - x == 4)
            .collect();
        assert_eq!(colour4, vec![(4, 8), (5, 9)]);
    }

    #[test]
    fn gadget_no_colour_one() {
        for n in (4..=60).step_by(2) {
            for s in 1..=n / 4 {
                let g = spanning_difference_graph(n, s).unwrap();
                assert!(g.edges.iter().all(|&(x, y)| y - x != 1));
            }
        }
    }

    #[test]
    fn gadget_census_small() {
        for n in [20usize, 24, 32, 40] {
            for s in [1usize, 2, n / 8] {
                let g = spanning_difference_graph(n, s).unwrap();
                let mut degree: HashMap<usize, usize> = HashMap::new();
                let mut colour: HashMap<usize, usize> = HashMap::new();
                for &(x, y) in &g.edges {
                    *degree.entry(x).or_insert(0) += 1;
                    *degree.entry(y).or_insert(0) += 1;
                    *colour.entry(y - x).or_insert(0) += 1;
                }
                assert!(degree.values().all(|&d| d <= 2 * s));
                for v in (2 * s..=n / 2 - s).chain(n / 2 + 2 * s..=n - s) {
                    assert_eq!(degree.get(&v).copied().unwrap_or(0), 2 * s, "v={v} n={n} s={s}");
                }
                for c in 2..=n {
                    let m = colour.get(&c).copied().unwrap_or(0);
                    assert!(m <= s);
                    if (2 * s..=n - 2 * s).contains(&c) {
                        assert_eq!(m, s, "c={c} n={n} s={s}");
                    }
                }
            }
        }
    }

    #[test]
    fn gadget_rejects_bad_params() {
        assert!(spanning_difference_graph(9, 1).is_err());
        assert!(spanning_difference_graph(10, 0).is_err());
        assert!(spanning_difference_graph(10, 6).is_err());
    }

    #[test]
    fn interval_figure_instance() {
        let m = interval_matching(0, 2, 7, 21).unwrap();
        let expect = vec![(1, 18), (2, 17), (3, 16), (4, 15), (5, 21), (6, 20), (7, 19)];
        assert_eq!(m.edges, expect);
        let mut cols = m.colours();
        cols.sort_unstable();
        assert_eq!(cols, (11..=17).collect::<Vec<_>>());
    }

    #[test]
    fn interval_unit_length() {
        let m = interval_matching(2, 5, 1, 6).unwrap();
        assert_eq!(m.edges, vec![(3, 6)]);
        assert_eq!(m.colours(), vec![3]);
        assert_eq!(interval_colour_block(2, 5, 1), (3, 3));
    }

    #[test]
    fn interval_exhaustive() {
        for ell in (1..=9usize).step_by(2) {
            for i in 0..6 {
                for j in i + 1..=6 {
                    let n = (j + 1) * ell;
                    let m = interval_matching(i, j, ell, n).unwrap();
                    assert!(m.is_valid());
                    assert_eq!(m.edges.len(), ell);
                    let src: BTreeSet<usize> = m.edges.iter().map(|e| e.0).collect();
                    let dst: BTreeSet<usize> = m.edges.iter().map(|e| e.1).collect();
                    assert_eq!(src, (i * ell + 1..=(i + 1) * ell).collect());
                    assert_eq!(dst, (j * ell + 1..=(j + 1) * ell).collect());
                    let (lo, hi) = interval_colour_block(i, j, ell);
                    let mut cols = m.colours();
                    cols.sort_unstable();
                    assert_eq!(cols, (lo..=hi).collect::<Vec<_>>());
                    let half_up = ell.div_ceil(2);
                    let p1: BTreeSet<usize> =
                        m.edges[..half_up].iter().map(|&(a, b)| (b - a) % 2).collect();
                    let p2: BTreeSet<usize> =
                        m.edges[half_up..].iter().map(|&(a, b)| (b - a) % 2).collect();
                    assert!(p1.len() <= 1 && p2.len() <= 1);
                    if ell > 1 {
                        assert!(p1.is_disjoint(&p2));
                    }
                }
            }
        }
    }

    #[test]
    fn interval_rejects_bad_params() {
        assert!(interval_matching(0, 1, 4, 100).is_err());
        assert!(interval_matching(1, 1, 3, 100).is_err());
        assert!(interval_matching(0, 5, 7, 41).is_err());
    }

    #[test]
    fn matching_single_edge() {
        let h = TripartiteHypergraph {
            edges: vec![Hyperedge { a: 1, b: 5, c: 4 }],
        };
        let (m, frac) = hypergraph_matching(&h, 0.0, 1);
        assert_eq!(m.len(), 1);
        assert_eq!(frac, 0.0);
    }

    #[test]
    fn matching_toy_full_cover() {
        let h = TripartiteHypergraph {
            edges: vec![
                Hyperedge { a: 1, b: 12, c: 11 },
                Hyperedge { a: 2, b: 11, c: 9 },
            ],
        };
        for seed in 0..5 {
            let (m, frac) = hypergraph_matching(&h, 0.0, seed);
            assert_eq!(m.len(), 2);
            assert_eq!(frac, 0.0);
        }
    }

    #[test]
    fn matching_always_valid() {
        for seed in 0..10 {
            let g = spanning_difference_graph(200, 20).unwrap();
            let h = g.hypergraph();
            let (m, frac) = hypergraph_matching(&h, 0.02, seed);
            assert!(h.is_matching(&m));
            assert!((0.0..=1.0).contains(&frac));
        }
    }

    #[test]
    fn swap_search_improves_forced_instance() {
        // A single blocking edge that greedy may pick first; two swaps in.
        let h = TripartiteHypergraph {
            edges: vec![
                Hyperedge { a: 1, b: 10, c: 9 },
                Hyperedge { a: 1, b: 11, c: 10 },
                Hyperedge { a: 2, b: 10, c: 8 },
            ],
        };
        for seed in 0..20 {
            let (m, _) = hypergraph_matching(&h, 0.0, seed);
            assert_eq!(m.len(), 2);
        }
    }

    #[test]
    fn pair_matching_degenerate() {
        let empty = BTreeSet::new();
        let other: BTreeSet<usize> = [5].into();
        let (m, cov) = random_pair_rainbow_matching(10, &empty, &other, 0.1, 1).unwrap();
        assert!(m.edges.is_empty());
        assert_eq!(cov.uncovered_s2, 1);

        let s1: BTreeSet<usize> = [2].into();
        let s2: BTreeSet<usize> = [5].into();
        let (m, _) = random_pair_rainbow_matching(10, &s1, &s2, 0.1, 1).unwrap();
        assert!(m.edges.is_empty());
    }

    #[test]
    fn pair_matching_contract() {
        use rand::Rng;
        let n = 400;
        for seed in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s1 = BTreeSet::new();
            let mut s2 = BTreeSet::new();
            for v in 1..=n {
                if rng.gen_bool(0.1) {
                    s1.insert(v);
                } else if rng.gen_bool(0.1) {
                    s2.insert(v);
                }
            }
            let (m, cov) = random_pair_rainbow_matching(n, &s1, &s2, 0.05, seed).unwrap();
            assert!(m.is_valid());
            for &(a, b) in &m.edges {
                let c = b.abs_diff(a);
                assert_ne!(c, 1);
                assert!(s2.contains(&c));
                assert!(
                    (s1.contains(&a) && s2.contains(&b)) || (s2.contains(&a) && s1.contains(&b))
                );
            }
            assert!(cov.uncovered_s1 <= s1.len());
        }
    }
}
