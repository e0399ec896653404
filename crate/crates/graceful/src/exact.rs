//! Exhaustive / branch-and-bound oracle for graceful labellings and true
//! gracesize on small trees.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::tree::Tree;
use crate::verify::Labelling;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("order {0} exceeds exact-mode cap {1}")]
    TooLarge(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub best_found: usize,
    pub proven_optimal: bool,
    pub elapsed: Duration,
}

pub const GRACESIZE_CAP: usize = 11;

/// Vertex branch order: decreasing degree, ties by id.
fn branch_order(tree: &Tree) -> Vec<usize> {
    let mut order: Vec<usize> = (0..tree.n()).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(tree.degree(v)), v));
    order
}

/// Label try order: by distance from the extremes {1, n}, extremes first.
fn label_order(n: usize) -> Vec<usize> {
    let mut labels: Vec<usize> = (1..=n).collect();
    labels.sort_by_key(|&l| ((l - 1).min(n - l), l));
    labels
}

struct GracefulSearch<'a> {
    tree: &'a Tree,
    order: Vec<usize>,
    labels: Vec<usize>,
    assigned: Vec<usize>, // 0 = unassigned
    label_used: Vec<bool>,
    colour_used: Vec<bool>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl<'a> GracefulSearch<'a> {
    fn run(&mut self, depth: usize) -> bool {
        let n = self.tree.n();
        if depth == n {
            return true;
        }
        let v = self.order[depth];
        let half = n.div_ceil(2);
        for idx in 0..self.labels.len() {
            let l = self.labels[idx];
            // Complementation symmetry phi <-> n+1-phi: pin the first
            // branched vertex into the lower half.
            if depth == 0 && l > half {
                continue;
            }
            if self.label_used[l] {
                continue;
            }
            if self.nodes >= self.budget {
                self.exhausted = true;
                return false;
            }
            self.nodes += 1;
            let mut ok = true;
            let mut placed_colours: Vec<usize> = Vec::new();
            for &w in self.tree.neighbours(v) {
                let lw = self.assigned[w];
                if lw == 0 {
                    continue;
                }
                let c = l.abs_diff(lw);
                if self.colour_used[c] {
                    ok = false;
                    break;
                }
                self.colour_used[c] = true;
                placed_colours.push(c);
            }
            if ok {
                self.assigned[v] = l;
                self.label_used[l] = true;
                if self.run(depth + 1) {
                    return true;
                }
                self.assigned[v] = 0;
                self.label_used[l] = false;
            }
            for c in placed_colours {
                self.colour_used[c] = false;
            }
            if self.exhausted {
                return false;
            }
        }
        false
    }
}

/// Backtracking search for a graceful labelling. Returns the witness (if
/// any) together with search statistics; a `None` witness with
/// `proven_optimal = true` means the complete search found none.
pub fn solve_graceful(tree: &Tree, budget: u64) -> (Option<Labelling>, SearchStats) {
    let start = Instant::now();
    let n = tree.n();
    if n == 1 {
        // Single vertex: the empty edge set is vacuously graceful.
        let lab = Labelling::new(vec![1], 1).unwrap();
        return (
            Some(lab),
            SearchStats {
                nodes_expanded: 0,
                best_found: 0,
                proven_optimal: true,
                elapsed: start.elapsed(),
            },
        );
    }
    let mut search = GracefulSearch {
        tree,
        order: branch_order(tree),
        labels: label_order(n),
        assigned: vec![0; n],
        label_used: vec![false; n + 1],
        colour_used: vec![false; n],
        nodes: 0,
        budget: budget.max(1),
        exhausted: false,
    };
    let found = search.run(0);
    let witness = if found {
        Some(Labelling::new(search.assigned.clone(), n).expect("search output injective"))
    } else {
        None
    };
    let stats = SearchStats {
        nodes_expanded: search.nodes,
        best_found: if found { n - 1 } else { 0 },
        proven_optimal: !search.exhausted,
        elapsed: start.elapsed(),
    };
    (witness, stats)
}

struct GracesizeSearch<'a> {
    tree: &'a Tree,
    order: Vec<usize>,
    assigned: Vec<usize>,
    label_used: Vec<bool>,
    colour_count: Vec<u32>,
    distinct: usize,
    placed_edges: usize,
    best: usize,
    best_assignment: Vec<usize>,
    nodes: u64,
}

impl<'a> GracesizeSearch<'a> {
    fn run(&mut self, depth: usize) {
        let n = self.tree.n();
        let total_edges = n - 1;
        if depth == n {
            if self.distinct > self.best {
                self.best = self.distinct;
                self.best_assignment = self.assigned.clone();
            }
            return;
        }
        // Each still-unplaced edge can add at most one new colour.
        if self.distinct + (total_edges - self.placed_edges) <= self.best {
            return;
        }
        let v = self.order[depth];
        let half = n.div_ceil(2);
        for l in 1..=n {
            if depth == 0 && l > half {
                continue;
            }
            if self.label_used[l] {
                continue;
            }
            self.nodes += 1;
            let mut placed: Vec<usize> = Vec::new();
            for &w in self.tree.neighbours(v) {
                let lw = self.assigned[w];
                if lw == 0 {
                    continue;
                }
                let c = l.abs_diff(lw);
                if self.colour_count[c] == 0 {
                    self.distinct += 1;
                }
                self.colour_count[c] += 1;
                placed.push(c);
            }
            self.assigned[v] = l;
            self.label_used[l] = true;
            self.placed_edges += placed.len();
            self.run(depth + 1);
            self.placed_edges -= placed.len();
            self.assigned[v] = 0;
            self.label_used[l] = false;
            for c in placed {
                self.colour_count[c] -= 1;
                if self.colour_count[c] == 0 {
                    self.distinct -= 1;
                }
            }
        }
    }
}

/// Exact gracesize by pruned permutation search, with a witnessing
/// bijective labelling into `{1..n}`.
pub fn max_gracesize(tree: &Tree) -> Result<(Labelling, usize, SearchStats), SolveError> {
    let n = tree.n();
    if n > GRACESIZE_CAP {
        return Err(SolveError::TooLarge(n, GRACESIZE_CAP));
    }
    let start = Instant::now();
    if n == 1 {
        let lab = Labelling::new(vec![1], 1).unwrap();
        return Ok((
            lab,
            0,
            SearchStats {
                nodes_expanded: 0,
                best_found: 0,
                proven_optimal: true,
                elapsed: start.elapsed(),
            },
        ));
    }
    let mut search = GracesizeSearch {
        tree,
        order: branch_order(tree),
        assigned: vec![0; n],
        label_used: vec![false; n + 1],
        colour_count: vec![0; n],
        distinct: 0,
        placed_edges: 0,
        best: 0,
        best_assignment: vec![0; n],
        nodes: 0,
    };
    search.run(0);
    let lab = Labelling::new(search.best_assignment.clone(), n).expect("witness injective");
    let stats = SearchStats {
        nodes_expanded: search.nodes,
        best_found: search.best,
        proven_optimal: true,
        elapsed: start.elapsed(),
    };
    Ok((lab, search.best, stats))
}
