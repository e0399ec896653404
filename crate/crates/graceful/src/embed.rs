//! Embedding pipeline: hub-and-small-components trees, rooted forest
//! structures over interval layouts, the degree-window top level, a leaf
//! trimming reduction onto the exact label range, and a repair pass.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::rainbow::{gadget_index, interval_matching, random_pair_rainbow_matching_indexed};
use crate::split::{alive_components, split_structure, SplitConfig, SplitError, SplitResult};
use crate::tree::{RootedComponent, Tree};
use crate::verify::{check_report, EmbeddingReport, Labelling};

#[derive(Debug, Error, PartialEq)]
pub enum EmbedError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("retries exhausted: {0}")]
    RetriesExhausted(String),
}

/// Largest component order accepted around a splitting vertex.
const COMPONENT_CAP: usize = 64;
/// Below this order the hub embedding is found by exact search.
const EXACT_CUTOFF: usize = 34;

/// Labels for a subset of a tree's vertices, injective within `[bound]`.
#[derive(Debug, Clone)]
pub struct PartialLabelling {
    pub labels: Vec<Option<usize>>,
    pub bound: usize,
}

impl PartialLabelling {
    pub fn assigned(&self) -> usize {
        self.labels.iter().flatten().count()
    }
}

/// Interval layout used by the rooted-structure embedding: `eta + 1`
/// consecutive intervals of odd length `ell = b + 3s` partition `[m~]`,
/// with the middle of interval 0 reserved for the separator set.
#[derive(Debug, Clone, Copy)]
pub struct IntervalLayout {
    pub ell: usize,
    pub eta: usize,
    pub s_size: usize,
    pub block: usize,
}

impl IntervalLayout {
    pub fn new(block: usize, s_size: usize, eta: usize) -> Result<Self, EmbedError> {
        let ell = block + 3 * s_size;
        if ell % 2 == 0 {
            return Err(EmbedError::BadParams(format!("even interval length {ell}")));
        }
        Ok(IntervalLayout {
            ell,
            eta,
            s_size,
            block,
        })
    }

    pub fn span(&self) -> usize {
        (self.eta + 1) * self.ell
    }

    pub fn interval(&self, j: usize) -> (usize, usize) {
        (j * self.ell + 1, (j + 1) * self.ell)
    }

    /// Separator subinterval: `3s + 1` labels centred in interval 0.
    pub fn separator_interval(&self) -> (usize, usize) {
        let lo = (self.ell + 1) / 2 - (3 * self.s_size).div_ceil(2);
        (lo, lo + 3 * self.s_size)
    }

    /// Colours available to separator-internal edges.
    pub fn separator_colour_max(&self) -> usize {
        3 * self.s_size
    }

    /// Colour block of a matching between intervals `gap` apart.
    pub fn colour_block(&self, gap: usize) -> (usize, usize) {
        crate::rainbow::interval_colour_block(0, gap, self.ell)
    }
}

/// Auxiliary tree collapsing each set of component copies to one vertex;
/// vertex 0 is the hub standing for the separator set.
#[derive(Debug, Clone)]
pub struct AuxTree {
    pub tree: Tree,
    pub hub: usize,
    pub members: Vec<Vec<usize>>,
}

fn bfs_order(adj: &dyn Fn(usize) -> Vec<usize>, start: usize, n_hint: usize) -> Vec<usize> {
    let mut order = vec![start];
    let mut seen = HashSet::with_capacity(n_hint);
    seen.insert(start);
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for w in adj(u) {
            if seen.insert(w) {
                order.push(w);
            }
        }
    }
    order
}

/// Canonical vertex list of a rooted component plus, per canonical
/// position, the canonical position of its parent (root excluded).
fn comp_canonical(comp: &RootedComponent) -> (Vec<usize>, Vec<Option<usize>>) {
    let (_, canon) = comp.rooted_code_order();
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(u, v) in &comp.edges {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    let order = bfs_order(
        &|u| adj.get(&u).cloned().unwrap_or_default(),
        comp.root,
        comp.order(),
    );
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut seen: HashSet<usize> = HashSet::new();
    for &u in &order {
        seen.insert(u);
        for w in adj.get(&u).cloned().unwrap_or_default() {
            if !seen.contains(&w) {
                parent.insert(w, u);
            }
        }
    }
    let pos_of: HashMap<usize, usize> = canon.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let parent_pos = canon
        .iter()
        .map(|v| parent.get(v).map(|p| pos_of[p]))
        .collect();
    (canon, parent_pos)
}

fn hub_contract_holds(
    tree: &Tree,
    v: usize,
    labels: &[usize],
    bound: usize,
    min_colour: usize,
) -> bool {
    if labels[v] != 0 {
        return false;
    }
    let min_label = min_colour;
    let mut seen_labels = HashSet::new();
    for (u, &l) in labels.iter().enumerate() {
        if u != v && (l < min_label || l > bound) {
            return false;
        }
        if !seen_labels.insert(l) {
            return false;
        }
    }
    let mut seen_colours = HashSet::new();
    for &(x, y) in tree.edges() {
        let c = labels[x].abs_diff(labels[y]);
        if c < min_colour || !seen_colours.insert(c) {
            return false;
        }
    }
    true
}

/// Randomized backtracking for hub instances: hub at 0, other labels in
/// `{min_colour..bound}`, all colours distinct and at least `min_colour`.
/// Candidate order is shuffled per call so restarts explore differently.
fn exact_hub_search(
    tree: &Tree,
    v: usize,
    bound: usize,
    budget: u64,
    min_colour: usize,
    seed: u64,
) -> Option<Vec<usize>> {
    let n = tree.n();
    let order = bfs_order(&|u| tree.neighbours(u).to_vec(), v, n);
    let mut parent = vec![usize::MAX; n];
    {
        let mut seen = vec![false; n];
        seen[v] = true;
        for &u in &order {
            for &w in tree.neighbours(u) {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = u;
                }
            }
        }
    }
    let mut candidates: Vec<usize> = (min_colour..=bound).collect();
    if seed != 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        candidates.shuffle(&mut rng);
    }
    let mut labels = vec![usize::MAX; n];
    labels[v] = 0;
    let mut used_label = vec![false; bound + 1];
    let mut used_colour = vec![false; bound + 1];
    let mut nodes = 0u64;

    struct Ctx<'a> {
        order: &'a [usize],
        parent: &'a [usize],
        candidates: &'a [usize],
        bound: usize,
        min_colour: usize,
        budget: u64,
    }

    fn go(
        ctx: &Ctx,
        depth: usize,
        labels: &mut [usize],
        used_label: &mut [bool],
        used_colour: &mut [bool],
        nodes: &mut u64,
    ) -> bool {
        if depth == ctx.order.len() {
            return true;
        }
        let u = ctx.order[depth];
        let p = labels[ctx.parent[u]];
        for &x in ctx.candidates {
            if used_label[x] {
                continue;
            }
            let c = x.abs_diff(p);
            if c < ctx.min_colour || c > ctx.bound || used_colour[c] {
                continue;
            }
            *nodes += 1;
            if *nodes > ctx.budget {
                return false;
            }
            labels[u] = x;
            used_label[x] = true;
            used_colour[c] = true;
            if go(ctx, depth + 1, labels, used_label, used_colour, nodes) {
                return true;
            }
            labels[u] = usize::MAX;
            used_label[x] = false;
            used_colour[c] = false;
        }
        false
    }

    let ctx = Ctx {
        order: &order,
        parent: &parent,
        candidates: &candidates,
        bound,
        min_colour,
        budget,
    };
    if go(&ctx, 1, &mut labels, &mut used_label, &mut used_colour, &mut nodes) {
        Some(labels)
    } else {
        None
    }
}

/// Greedy hub labelling: BFS from the hub, each vertex takes a label whose
/// colour towards its parent is fresh and not 1. Candidate order rotates
/// with the seed so restarts explore different label patterns.
fn greedy_hub_fill(
    tree: &Tree,
    v: usize,
    bound: usize,
    labels: &mut [usize],
    unused: &mut BTreeSet<usize>,
    used_colour: &mut [bool],
    min_colour: usize,
    seed: u64,
) -> bool {
    let order = bfs_order(&|u| tree.neighbours(u).to_vec(), v, tree.n());
    let mut parent = vec![usize::MAX; tree.n()];
    {
        let mut seen = vec![false; tree.n()];
        seen[v] = true;
        for &u in &order {
            for &w in tree.neighbours(u) {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = u;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &u in order.iter().skip(1) {
        if labels[u] != usize::MAX {
            continue;
        }
        let p = labels[parent[u]];
        debug_assert_ne!(p, usize::MAX);
        let pivot = rng.gen_range(1..=bound);
        let pick = unused
            .range(pivot..)
            .chain(unused.range(..pivot))
            .copied()
            .find(|&x| {
                let c = x.abs_diff(p);
                c >= min_colour && c <= bound && !used_colour[c]
            });
        match pick {
            Some(x) => {
                labels[u] = x;
                unused.remove(&x);
                used_colour[x.abs_diff(p)] = true;
            }
            None => return false,
        }
    }
    true
}

fn classes_of(comps: Vec<RootedComponent>) -> Vec<(String, Vec<RootedComponent>)> {
    let mut by_class: BTreeMap<String, Vec<RootedComponent>> = BTreeMap::new();
    for comp in comps {
        let (code, _) = comp.rooted_code_order();
        by_class.entry(code).or_default().push(comp);
    }
    let mut out: Vec<(String, Vec<RootedComponent>)> = by_class.into_iter().collect();
    for (_, comps) in out.iter_mut() {
        comps.sort_by_key(|c| c.vertices[0]);
    }
    out
}

/// Matching-based hub embedding: partition the label pool into one part
/// per component-class vertex, connect consecutive parts by rainbow
/// matchings, read complete label chains off as component copies, and
/// finish stragglers greedily.
fn matched_hub_fill(
    tree: &Tree,
    v: usize,
    bound: usize,
    seed: u64,
) -> Result<Vec<usize>, EmbedError> {
    let n = tree.n();
    let mut removed = vec![false; n];
    removed[v] = true;
    let classes = classes_of(
        alive_components(tree, &removed)
            .into_iter()
            .map(|comp| {
                let comp_set: HashSet<usize> = comp.iter().copied().collect();
                let root = *comp
                    .iter()
                    .find(|&&u| tree.neighbours(u).contains(&v))
                    .expect("component touches hub");
                let mut edges = Vec::new();
                for &a in &comp {
                    for &b in tree.neighbours(a) {
                        if a < b && comp_set.contains(&b) {
                            edges.push((a, b));
                        }
                    }
                }
                RootedComponent {
                    vertices: comp,
                    edges,
                    root,
                }
            })
            .collect(),
    );
    let nn = n - 1;
    let per_class: Vec<(Vec<usize>, Vec<Option<usize>>, usize)> = classes
        .iter()
        .map(|(_, comps)| {
            let (canon, parents) = comp_canonical(&comps[0]);
            (canon, parents, comps.len())
        })
        .collect();

    for attempt in 0..3u64 {
        let aseed = crate::sub_seed(seed, "hub-fill").wrapping_add(attempt);
        let mut rng = ChaCha8Rng::seed_from_u64(aseed);
        let mut pool: Vec<usize> = (2..=bound).collect();
        pool.shuffle(&mut rng);

        // One label part per (class, canonical position), sized by demand.
        let mut parts: Vec<Vec<BTreeSet<usize>>> = Vec::new();
        let mut cursor = 0usize;
        for (canon, _, demand) in &per_class {
            let mut class_parts = Vec::new();
            for _ in 0..canon.len() {
                let take = (demand * pool.len() / nn).max(1).min(pool.len() - cursor);
                let part: BTreeSet<usize> = pool[cursor..cursor + take].iter().copied().collect();
                cursor += take;
                class_parts.push(part);
            }
            parts.push(class_parts);
        }
        for (i, label) in pool[cursor..].iter().enumerate() {
            let t = i % parts.len();
            let q = (i / parts.len()) % parts[t].len();
            parts[t][q].insert(*label);
        }

        let gadget_n = if bound % 2 == 0 { bound } else { bound - 1 };
        let gadget = gadget_index(gadget_n, (gadget_n / 8).clamp(1, 128))
            .map_err(|e| EmbedError::BadParams(e.to_string()))?;

        // Partner maps along each class-tree edge.
        let mut partners: Vec<Vec<HashMap<usize, usize>>> = Vec::new();
        for (t, (canon, parent_pos, _)) in per_class.iter().enumerate() {
            let mut maps = vec![HashMap::new(); canon.len()];
            for q in 1..canon.len() {
                let p = parent_pos[q].unwrap();
                let (m, _) = random_pair_rainbow_matching_indexed(
                    &gadget,
                    &parts[t][p],
                    &parts[t][q],
                    0.2,
                    aseed ^ ((t as u64) << 20) ^ (q as u64),
                )
                .map_err(|e| EmbedError::BadParams(e.to_string()))?;
                let mut map = HashMap::new();
                for &(a, b) in &m.edges {
                    if parts[t][p].contains(&a) {
                        map.insert(a, b);
                    } else {
                        map.insert(b, a);
                    }
                }
                maps[q] = map;
            }
            partners.push(maps);
        }

        let mut labels = vec![usize::MAX; n];
        labels[v] = 0;
        let mut unused: BTreeSet<usize> = (2..=bound).collect();
        let mut used_colour = vec![false; bound + 1];

        for (t, (_, comps)) in classes.iter().enumerate() {
            let (canon_rep, parent_pos, demand) = &per_class[t];
            let order = canon_rep.len();
            // Complete chains become whole copies.
            let mut chains: Vec<Vec<usize>> = Vec::new();
            'roots: for &x in &parts[t][0] {
                if chains.len() == *demand {
                    break;
                }
                let mut chain = vec![0usize; order];
                chain[0] = x;
                for q in 1..order {
                    match partners[t][q].get(&chain[parent_pos[q].unwrap()]) {
                        Some(&y) => chain[q] = y,
                        None => continue 'roots,
                    }
                }
                chains.push(chain);
            }
            for (comp, chain) in comps.iter().zip(&chains) {
                let (canon, _) = comp_canonical(comp);
                for (q, &orig) in canon.iter().enumerate() {
                    labels[orig] = chain[q];
                    unused.remove(&chain[q]);
                }
                for q in 0..order {
                    let c = match parent_pos[q] {
                        Some(p) => chain[q].abs_diff(chain[p]),
                        None => chain[0],
                    };
                    if c <= 1 || used_colour[c] {
                        return Err(EmbedError::Infeasible(
                            "matching produced a colour clash".into(),
                        ));
                    }
                    used_colour[c] = true;
                }
            }
        }

        if greedy_hub_fill(
            tree,
            v,
            bound,
            &mut labels,
            &mut unused,
            &mut used_colour,
            2,
            crate::sub_seed(aseed, "finish"),
        ) && hub_contract_holds(tree, v, &labels, bound, 2)
        {
            return Ok(labels);
        }
    }
    Err(EmbedError::RetriesExhausted(
        "matched hub fill failed".into(),
    ))
}

fn embed_splitting_vertex_bounded(
    tree: &Tree,
    v: usize,
    bound: usize,
    seed: u64,
    min_colour: usize,
) -> Result<Labelling, EmbedError> {
    let n = tree.n();
    if v >= n {
        return Err(EmbedError::BadParams(format!("vertex {v} not in tree")));
    }
    if bound < n {
        return Err(EmbedError::Infeasible(format!(
            "bound {bound} below order {n}"
        )));
    }
    let mut removed = vec![false; n];
    removed[v] = true;
    let comps = alive_components(tree, &removed);
    if let Some(big) = comps.iter().find(|c| c.len() > COMPONENT_CAP) {
        return Err(EmbedError::BadParams(format!(
            "component of order {} exceeds cap {COMPONENT_CAP}",
            big.len()
        )));
    }

    // Star: hand the leaves consecutive labels.
    if n >= 2 && comps.iter().all(|c| c.len() == 1) && bound >= n + min_colour - 2 {
        let mut labels = vec![0usize; n];
        let mut next = min_colour;
        for u in 0..n {
            if u != v {
                labels[u] = next;
                next += 1;
            }
        }
        debug_assert!(hub_contract_holds(tree, v, &labels, bound, min_colour));
        return Labelling::new(labels, bound).map_err(|e| EmbedError::BadParams(e.to_string()));
    }

    let (budget, attempts) = if n <= EXACT_CUTOFF {
        (2_000_000u64, 3u64)
    } else {
        (400_000u64, 10u64)
    };
    for attempt in 0..attempts {
        let aseed = if attempt == 0 {
            0
        } else {
            crate::sub_seed(seed, "hub-search").wrapping_add(attempt)
        };
        if let Some(labels) = exact_hub_search(tree, v, bound, budget, min_colour, aseed) {
            debug_assert!(hub_contract_holds(tree, v, &labels, bound, min_colour));
            return Labelling::new(labels, bound)
                .map_err(|e| EmbedError::BadParams(e.to_string()));
        }
    }

    if n > EXACT_CUTOFF && min_colour >= 2 {
        if let Ok(labels) = matched_hub_fill(tree, v, bound, seed) {
            return Labelling::new(labels, bound)
                .map_err(|e| EmbedError::BadParams(e.to_string()));
        }
    }

    // Plain greedy restarts as the last constructive resort.
    for attempt in 0..6u64 {
        let mut labels = vec![usize::MAX; n];
        labels[v] = 0;
        let mut unused: BTreeSet<usize> = (min_colour..=bound).collect();
        let mut used_colour = vec![false; bound + 1];
        if greedy_hub_fill(
            tree,
            v,
            bound,
            &mut labels,
            &mut unused,
            &mut used_colour,
            min_colour,
            crate::sub_seed(seed, "greedy").wrapping_add(attempt),
        ) {
            debug_assert!(hub_contract_holds(tree, v, &labels, bound, min_colour));
            return Labelling::new(labels, bound)
                .map_err(|e| EmbedError::BadParams(e.to_string()));
        }
    }
    Err(EmbedError::RetriesExhausted(format!(
        "no hub labelling within bound {bound}"
    )))
}

/// Labels a tree whose components away from `v` are all small: `v` gets 0,
/// every other vertex a distinct label in `[(1+eps)(n-1)]`, all edge
/// colours distinct and none equal to 1.
pub fn embed_splitting_vertex_tree(
    tree: &Tree,
    v: usize,
    epsilon: f64,
    seed: u64,
) -> Result<Labelling, EmbedError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(EmbedError::BadParams(format!("epsilon {epsilon}")));
    }
    let nn = tree.n().saturating_sub(1);
    let bound = (((1.0 + epsilon) * nn as f64) + 1e-9).floor() as usize;
    embed_splitting_vertex_bounded(tree, v, bound.max(tree.n()), seed, 2)
}

struct GroupPlacement {
    class_idx: usize,
    aux_base: usize,
    copies: Vec<Vec<usize>>,
}

/// Embeds `T` minus its waste set: separator vertices go to the middle of
/// interval 0, component copies fill the other intervals, guided by a
/// labelling of the auxiliary tree and explicit interval matchings.
pub fn embed_rooted_structure(
    tree: &Tree,
    split: &SplitResult,
    epsilon: f64,
    seed: u64,
) -> Result<PartialLabelling, EmbedError> {
    if !(epsilon > 0.0) {
        return Err(EmbedError::BadParams(format!("epsilon {epsilon}")));
    }
    let s_size = split.s.len();
    let d = split.multiplicity;
    let m = split.forest.total_order() + s_size;
    let bound = (((1.0 + epsilon) * m as f64) + 1e-9).floor() as usize;

    let block = if (d + 3 * s_size) % 2 == 1 { d } else { d + 1 };
    if s_size > 0 && block < 3 * s_size {
        return Err(EmbedError::Infeasible(format!(
            "copy count {d} too small against separator of {s_size}"
        )));
    }
    let ell = block + 3 * s_size;

    let classes = classes_of(split.forest.components.clone());
    let per_class: Vec<(Vec<usize>, Vec<Option<usize>>)> = classes
        .iter()
        .map(|(_, comps)| comp_canonical(&comps[0]))
        .collect();

    // Aux tree: hub 0, then one vertex per (class, group, position).
    let mut aux_edges: Vec<(usize, usize)> = Vec::new();
    let mut members: Vec<Vec<usize>> = vec![split.s.clone()];
    let mut groups: Vec<GroupPlacement> = Vec::new();
    let mut next_id = 1usize;
    for (t, (_, comps)) in classes.iter().enumerate() {
        let (canon_rep, parent_pos) = &per_class[t];
        let order = canon_rep.len();
        debug_assert_eq!(comps.len() % d, 0);
        for chunk in comps.chunks(d) {
            let base = next_id;
            next_id += order;
            let copies: Vec<Vec<usize>> = chunk.iter().map(|c| comp_canonical(c).0).collect();
            for q in 0..order {
                members.push((0..d).map(|k| copies[k][q]).collect());
            }
            aux_edges.push((0, base));
            for q in 1..order {
                aux_edges.push((base + parent_pos[q].unwrap(), base + q));
            }
            groups.push(GroupPlacement {
                class_idx: t,
                aux_base: base,
                copies,
            });
        }
    }
    let aux_order = next_id;
    let aux_tree =
        Tree::new(aux_order, aux_edges).map_err(|e| EmbedError::BadParams(e.to_string()));
    let aux_tree = aux_tree?;
    let aux = AuxTree {
        tree: aux_tree,
        hub: 0,
        members,
    };

    let eta_max = bound / ell;
    if eta_max < aux_order {
        return Err(EmbedError::Infeasible(format!(
            "layout needs {aux_order} intervals of {ell}, bound {bound} allows {eta_max}"
        )));
    }
    let phi_aux = embed_splitting_vertex_bounded(
        &aux.tree,
        aux.hub,
        eta_max - 1,
        crate::sub_seed(seed, "aux"),
        1,
    )?;
    let eta = phi_aux.max_label();
    let layout = IntervalLayout::new(block, s_size, eta)?;
    let m_span = layout.span();
    debug_assert!(m_span <= bound);

    let n = tree.n();
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut used_colour: HashSet<usize> = HashSet::new();
    let s_set: HashSet<usize> = split.s.iter().copied().collect();

    // Separator: greedy placement inside the reserved middle of interval 0.
    if s_size > 0 {
        let (lo0, hi0) = layout.separator_interval();
        let mut taken: BTreeSet<usize> = BTreeSet::new();
        let s_adj = |u: usize| -> Vec<usize> {
            tree.neighbours(u)
                .iter()
                .copied()
                .filter(|w| s_set.contains(w))
                .collect()
        };
        let mut placed: HashSet<usize> = HashSet::new();
        for &start in &split.s {
            if placed.contains(&start) {
                continue;
            }
            for u in bfs_order(&s_adj, start, s_size) {
                placed.insert(u);
                let prior: Vec<usize> = s_adj(u)
                    .into_iter()
                    .filter(|w| labels[*w].is_some())
                    .collect();
                debug_assert!(prior.len() <= 1);
                let choice = (lo0..=hi0).find(|x| {
                    if taken.contains(x) {
                        return false;
                    }
                    prior.iter().all(|&w| {
                        let c = x.abs_diff(labels[w].unwrap());
                        c >= 1 && !used_colour.contains(&c)
                    })
                });
                let x = choice.ok_or_else(|| {
                    EmbedError::Infeasible("separator interval exhausted".into())
                })?;
                taken.insert(x);
                labels[u] = Some(x);
                for &w in &prior {
                    used_colour.insert(x.abs_diff(labels[w].unwrap()));
                }
            }
        }
    }

    // Root blocks: sorted against separator labels so the real colours
    // increase strictly and stay inside one colour block per interval gap.
    let (lo0, hi0) = layout.separator_interval();
    let offset = if s_size > 0 {
        hi0.saturating_sub(1).saturating_sub((ell - 1) / 2)
    } else {
        0
    };
    if s_size > 0 && offset + d > (ell - 1) / 2 + lo0 {
        return Err(EmbedError::Infeasible("root offset out of range".into()));
    }

    for group in &groups {
        let (_, comps) = &classes[group.class_idx];
        let chunk_start = groups
            .iter()
            .take_while(|g| !std::ptr::eq(*g, group))
            .filter(|g| g.class_idx == group.class_idx)
            .count()
            * d;
        let j = phi_aux.label(group.aux_base);
        debug_assert!(j >= 1);

        let mut order_keys: Vec<(usize, usize)> = (0..d)
            .map(|k| {
                let comp = &comps[chunk_start + k];
                let psi = tree
                    .neighbours(comp.root)
                    .iter()
                    .find(|w| s_set.contains(w))
                    .map(|&w| labels[w].expect("separator placed"))
                    .unwrap_or(0);
                (k, psi)
            })
            .collect();
        order_keys.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

        let mut prev_colour = 0usize;
        let mut positions = vec![0usize; d];
        for (slot, &(k, psi)) in order_keys.iter().enumerate() {
            let p = j * ell + offset + slot + 1;
            positions[k] = p;
            if psi > 0 {
                let c = p - psi;
                assert!(c > prev_colour, "root colours must increase");
                prev_colour = c;
                if !used_colour.insert(c) {
                    return Err(EmbedError::Infeasible("root colour clash".into()));
                }
            }
        }
        for k in 0..d {
            labels[group.copies[k][0]] = Some(positions[k]);
        }

        // Children inherit positions through the interval matchings.
        let (_, parent_pos) = &per_class[group.class_idx];
        let order = group.copies[0].len();
        let mut pos_table: Vec<Vec<usize>> = vec![positions.clone()];
        for q in 1..order {
            let i_lab = phi_aux.label(group.aux_base + parent_pos[q].unwrap());
            let j_lab = phi_aux.label(group.aux_base + q);
            let (lo, hi) = (i_lab.min(j_lab), i_lab.max(j_lab));
            let matching = interval_matching(lo, hi, ell, m_span)
                .map_err(|e| EmbedError::Infeasible(e.to_string()))?;
            let mut partner: HashMap<usize, usize> = HashMap::new();
            for &(a, b) in &matching.edges {
                partner.insert(a, b);
                partner.insert(b, a);
            }
            let mut row = vec![0usize; d];
            for k in 0..d {
                let pp = pos_table[parent_pos[q].unwrap()][k];
                let child = *partner
                    .get(&pp)
                    .ok_or_else(|| EmbedError::Infeasible("unmatched position".into()))?;
                row[k] = child;
                labels[group.copies[k][q]] = Some(child);
                let c = child.abs_diff(pp);
                if !used_colour.insert(c) {
                    return Err(EmbedError::Infeasible("matching colour clash".into()));
                }
            }
            pos_table.push(row);
        }
    }

    let partial = PartialLabelling { labels, bound };
    verify_partial(tree, &partial)?;
    Ok(partial)
}

fn verify_partial(tree: &Tree, partial: &PartialLabelling) -> Result<(), EmbedError> {
    let mut seen = HashSet::new();
    for l in partial.labels.iter().flatten() {
        if *l < 1 || *l > partial.bound || !seen.insert(*l) {
            return Err(EmbedError::Infeasible(format!("label {l} invalid")));
        }
    }
    let mut colours = HashSet::new();
    for &(x, y) in tree.edges() {
        if let (Some(a), Some(b)) = (partial.labels[x], partial.labels[y]) {
            if !colours.insert(a.abs_diff(b)) {
                return Err(EmbedError::Infeasible(format!(
                    "colour {} repeated",
                    a.abs_diff(b)
                )));
            }
        }
    }
    Ok(())
}

/// Geometric degree ladder starting at 8.
fn ladder(n: usize) -> Vec<usize> {
    let mut out = vec![8usize];
    while *out.last().unwrap() <= n {
        out.push(out.last().unwrap() * 4);
    }
    out
}

/// Picks the first degree window `[delta, delta~)` touched by at most
/// `eps * n / 2` edges; such a window exists because each edge meets at
/// most two windows. Also returns the heavy set above the window.
pub fn degree_window(tree: &Tree, epsilon: f64) -> (usize, usize, Vec<usize>, Vec<usize>) {
    assert!(epsilon > 0.0 && epsilon < 1.0);
    let n = tree.n();
    let rungs = ladder(n);
    let budget = epsilon * n as f64 / 2.0;
    for w in rungs.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let in_window = |v: usize| tree.degree(v) >= lo && tree.degree(v) < hi;
        let edge_count = tree
            .edges()
            .iter()
            .filter(|&&(a, b)| in_window(a) || in_window(b))
            .count();
        if (edge_count as f64) <= budget {
            let u: Vec<usize> = (0..n).filter(|&v| in_window(v)).collect();
            let s_high: Vec<usize> = (0..n).filter(|&v| tree.degree(v) >= hi).collect();
            return (lo, hi, u, s_high);
        }
    }
    unreachable!("a window above the maximum degree is always empty");
}

/// Greedy duplicate-colour repair: relabels an endpoint of a repeated
/// colour with an unused label when that strictly increases the distinct
/// colour count. Never decreases the count; deterministic.
pub fn repair_pass(tree: &Tree, lab: &Labelling, budget: usize) -> Labelling {
    let bound = lab.label_bound();
    let mut labels = lab.labels().to_vec();
    let mut count = vec![0u32; bound + 1];
    for &(x, y) in tree.edges() {
        count[labels[x].abs_diff(labels[y])] += 1;
    }
    let mut unused: BTreeSet<usize> = (1..=bound).collect();
    for &l in &labels {
        unused.remove(&l);
    }

    for _iter in 0..budget {
        let mut improved = false;
        for &(x, y) in tree.edges() {
            let c = labels[x].abs_diff(labels[y]);
            if count[c] < 2 {
                continue;
            }
            let mut ends = [x, y];
            ends.sort_by_key(|&v| tree.degree(v));
            'ends: for &v in &ends {
                let old = labels[v];
                let old_cols: Vec<usize> = tree
                    .neighbours(v)
                    .iter()
                    .map(|&w| old.abs_diff(labels[w]))
                    .collect();
                // Pull v's colours out of the census; colours that drop to
                // zero are the ones a relabel would lose.
                for &col in &old_cols {
                    count[col] -= 1;
                }
                let mut lost = 0usize;
                for (i, &col) in old_cols.iter().enumerate() {
                    if count[col] == 0 && !old_cols[..i].contains(&col) {
                        lost += 1;
                    }
                }
                let mut fresh: Vec<usize> = Vec::with_capacity(old_cols.len());
                let mut chosen = None;
                for (scanned, &cand) in unused.iter().enumerate() {
                    if scanned > 600 {
                        break;
                    }
                    fresh.clear();
                    for &w in tree.neighbours(v) {
                        let col = cand.abs_diff(labels[w]);
                        if col <= bound && count[col] == 0 && !fresh.contains(&col) {
                            fresh.push(col);
                        }
                    }
                    if fresh.len() > lost {
                        chosen = Some(cand);
                        break;
                    }
                }
                match chosen {
                    Some(cand) => {
                        for &w in tree.neighbours(v) {
                            count[cand.abs_diff(labels[w])] += 1;
                        }
                        unused.remove(&cand);
                        unused.insert(old);
                        labels[v] = cand;
                        improved = true;
                        break 'ends;
                    }
                    None => {
                        for &col in &old_cols {
                            count[col] += 1;
                        }
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    Labelling::new(labels, bound).expect("repair keeps labels valid")
}

fn distinct_count(tree: &Tree, labels: &[usize]) -> usize {
    let set: HashSet<usize> = tree
        .edges()
        .iter()
        .map(|&(x, y)| labels[x].abs_diff(labels[y]))
        .collect();
    set.len()
}

fn constructive_attempt(
    tree: &Tree,
    epsilon: f64,
    bound: usize,
    seed: u64,
    log: &mut Vec<(String, String)>,
) -> Result<Labelling, EmbedError> {
    let n = tree.n();
    let (_, hi, _, s_high) = degree_window(tree, epsilon);
    log.push(("degree-window".into(), format!("high>= {hi}, |S|={}", s_high.len())));

    let mut split: Option<SplitResult> = None;
    for delta in [0.1, 0.5, 0.9] {
        let cfg = SplitConfig {
            m: 8,
            delta,
            zeta: None,
        };
        match split_structure(tree, &s_high, &cfg) {
            Ok(sr) => {
                split = Some(sr);
                break;
            }
            Err(SplitError::InvalidParams(_)) => continue,
            Err(e) => return Err(EmbedError::Infeasible(e.to_string())),
        }
    }
    let mut split = split.ok_or_else(|| EmbedError::Infeasible("no viable split".into()))?;
    log.push((
        "split".into(),
        format!(
            "d={} |W|={} classes={}",
            split.multiplicity,
            split.w.len(),
            split.shape.class_count()
        ),
    ));

    let mut partial = None;
    for _ in 0..5 {
        let m = split.forest.total_order() + split.s.len();
        let eps_inner = bound as f64 / m as f64 - 1.0;
        if eps_inner <= 0.0 {
            break;
        }
        match embed_rooted_structure(tree, &split, eps_inner, seed) {
            Ok(p) => {
                partial = Some(p);
                break;
            }
            Err(EmbedError::Infeasible(_)) if split.multiplicity >= 2 => {
                let zeta = (split.multiplicity / 2) as f64 / n as f64;
                let cfg = SplitConfig {
                    m: 8,
                    delta: 0.9,
                    zeta: Some(zeta),
                };
                match split_structure(tree, &s_high, &cfg) {
                    Ok(sr) => split = sr,
                    Err(_) => break,
                }
            }
            Err(e) => return Err(e),
        }
    }
    let partial = partial.ok_or_else(|| EmbedError::Infeasible("rooted embed failed".into()))?;
    log.push(("rooted-embed".into(), format!("placed {}", partial.assigned())));

    // Waste vertices take the smallest unused labels in id order.
    let mut unused: BTreeSet<usize> = (1..=bound).collect();
    for l in partial.labels.iter().flatten() {
        unused.remove(l);
    }
    let mut labels = vec![0usize; n];
    for (v, l) in partial.labels.iter().enumerate() {
        if let Some(x) = l {
            labels[v] = *x;
        }
    }
    let mut holes: Vec<usize> = (0..n).filter(|&v| partial.labels[v].is_none()).collect();
    holes.sort_unstable();
    for v in holes {
        let x = *unused.iter().next().expect("enough labels for waste");
        unused.remove(&x);
        labels[v] = x;
    }
    log.push(("waste-place".into(), format!("|W|={}", split.w.len())));
    Labelling::new(labels, bound).map_err(|e| EmbedError::BadParams(e.to_string()))
}

/// End-to-end driver: always emits a valid injective labelling into
/// `[(1+eps)n]` plus a truthful report of its distinct-colour count.
pub fn near_graceful(
    tree: &Tree,
    epsilon: f64,
    seed: u64,
) -> Result<(Labelling, EmbeddingReport), EmbedError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(EmbedError::BadParams(format!("epsilon {epsilon}")));
    }
    let n = tree.n();
    let bound = ((((1.0 + epsilon) * n as f64) + 1e-9).floor() as usize).max(n);
    let mut log: Vec<(String, String)> = Vec::new();

    if n <= 12 {
        if let (Some(lab), _) = crate::exact::solve_graceful(tree, 5_000_000) {
            log.push(("exact".into(), "graceful".to_string()));
            let mut report = check_report(tree, &lab, epsilon)
                .map_err(|e| EmbedError::BadParams(e.to_string()))?;
            report.stage_log = log;
            return Ok((lab, report));
        }
    }

    let constructive = constructive_attempt(tree, epsilon, bound, seed, &mut log);
    let lab = match constructive {
        Ok(lab) => lab,
        Err(e) => {
            log.push(("fallback-random".into(), e.to_string()));
            let mut rng = ChaCha8Rng::seed_from_u64(crate::sub_seed(seed, "fallback"));
            let mut pool: Vec<usize> = (1..=bound).collect();
            pool.shuffle(&mut rng);
            let labels: Vec<usize> = pool[..n].to_vec();
            Labelling::new(labels, bound).expect("shuffled labels are injective")
        }
    };

    let before = distinct_count(tree, lab.labels());
    let lab = repair_pass(tree, &lab, 12);
    let after = distinct_count(tree, lab.labels());
    debug_assert!(after >= before);
    log.push(("repair".into(), format!("{before} -> {after}")));

    let mut report =
        check_report(tree, &lab, epsilon).map_err(|e| EmbedError::BadParams(e.to_string()))?;
    report.stage_log = log;
    Ok((lab, report))
}

/// Bijective variant: trims enough leaves to run the pipeline at a lower
/// rate, then folds the leaves back so the labels are exactly `[n]`.
pub fn near_graceful_bijective(
    tree: &Tree,
    epsilon: f64,
    seed: u64,
) -> Result<(Labelling, EmbeddingReport), EmbedError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(EmbedError::BadParams(format!("epsilon {epsilon}")));
    }
    let n = tree.n();
    if n <= 12 {
        if let (Some(lab), _) = crate::exact::solve_graceful(tree, 5_000_000) {
            let mut report = check_report(tree, &lab, epsilon)
                .map_err(|e| EmbedError::BadParams(e.to_string()))?;
            report.stage_log = vec![("exact".into(), "graceful".into())];
            return Ok((lab, report));
        }
    }
    let t = ((epsilon * n as f64) / (2.0 + epsilon)).ceil() as usize;
    let t = t.min(n - 2);

    // Peel the highest-id leaf t times.
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|v| tree.degree(v)).collect();
    let mut peeled: Vec<(usize, usize)> = Vec::new();
    for _ in 0..t {
        let leaf = (0..n)
            .rev()
            .find(|&v| alive[v] && degree[v] == 1)
            .expect("a tree always has a leaf");
        let nb = *tree
            .neighbours(leaf)
            .iter()
            .find(|&&w| alive[w])
            .expect("leaf keeps one live neighbour");
        alive[leaf] = false;
        degree[nb] -= 1;
        peeled.push((leaf, nb));
    }

    let kept: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    let index: HashMap<usize, usize> = kept.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let sub_edges: Vec<(usize, usize)> = tree
        .edges()
        .iter()
        .filter(|&&(a, b)| alive[a] && alive[b])
        .map(|&(a, b)| (index[&a], index[&b]))
        .collect();
    let sub = Tree::new(kept.len(), sub_edges).expect("peeling preserves connectivity");

    let (sub_lab, _) = near_graceful(&sub, epsilon / 2.0, seed)?;
    assert!(sub_lab.max_label() <= n, "trim rate keeps labels within [n]");

    let mut labels = vec![0usize; n];
    for (i, &v) in kept.iter().enumerate() {
        labels[v] = sub_lab.label(i);
    }
    let mut unused: BTreeSet<usize> = (1..=n).collect();
    for &v in &kept {
        unused.remove(&labels[v]);
    }
    let mut count: HashMap<usize, u32> = HashMap::new();
    for &(a, b) in sub.edges() {
        *count.entry(sub_lab.label(a).abs_diff(sub_lab.label(b))).or_insert(0) += 1;
    }
    for &(leaf, nb) in peeled.iter().rev() {
        let fresh = unused
            .iter()
            .copied()
            .find(|&x| !count.contains_key(&x.abs_diff(labels[nb])));
        let x = fresh.unwrap_or_else(|| *unused.iter().next().expect("one label per vertex"));
        unused.remove(&x);
        labels[leaf] = x;
        *count.entry(x.abs_diff(labels[nb])).or_insert(0) += 1;
    }

    let lab = Labelling::new(labels, n).expect("fill-in is bijective");
    debug_assert!(lab.is_bijective());
    let lab = repair_pass(tree, &lab, 6);
    let mut report =
        check_report(tree, &lab, epsilon).map_err(|e| EmbedError::BadParams(e.to_string()))?;
    report.stage_log = vec![("leaf-trim".into(), format!("t={t}"))];
    Ok((lab, report))
}
