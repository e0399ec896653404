//! Edge-difference computation and graceful / near-graceful certification.
//!
//! Everything here is pure; this module is the ground truth the search and
//! embedding modules are tested against.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::tree::Tree;

#[derive(Debug, Error, PartialEq)]
pub enum LabellingError {
    #[error("vertex {0} has no label")]
    Unassigned(usize),
    #[error("label {label} used by vertices {a} and {b}")]
    NotInjective { label: usize, a: usize, b: usize },
    #[error("label {label} of vertex {vertex} outside [{low}, {bound}]")]
    OutOfBounds {
        vertex: usize,
        label: usize,
        low: usize,
        bound: usize,
    },
    #[error("labelling covers {have} vertices, tree has {want}")]
    SizeMismatch { have: usize, want: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("epsilon {0} outside (0, 1)")]
    BadEpsilon(f64),
}

/// Injective assignment of integer labels to the vertices `0..n-1`.
///
/// Labels live in `[1, label_bound]`; label `0` is additionally permitted
/// as the distinguished hub label used by the splitting-vertex embedder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labelling {
    labels: Vec<usize>,
    label_bound: usize,
}

impl Labelling {
    pub fn new(labels: Vec<usize>, label_bound: usize) -> Result<Self, LabellingError> {
        let mut owner: std::collections::HashMap<usize, usize> = Default::default();
        for (v, &l) in labels.iter().enumerate() {
            if l > label_bound {
                return Err(LabellingError::OutOfBounds {
                    vertex: v,
                    label: l,
                    low: 0,
                    bound: label_bound,
                });
            }
            if let Some(&other) = owner.get(&l) {
                return Err(LabellingError::NotInjective {
                    label: l,
                    a: other,
                    b: v,
                });
            }
            owner.insert(l, v);
        }
        Ok(Labelling {
            labels,
            label_bound,
        })
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_bound(&self) -> usize {
        self.label_bound
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn max_label(&self) -> usize {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// True iff the label multiset is exactly `{1..n}`.
    pub fn is_bijective(&self) -> bool {
        let n = self.labels.len();
        let mut seen = vec![false; n + 1];
        for &l in &self.labels {
            if l == 0 || l > n {
                return false;
            }
            seen[l] = true;
        }
        seen[1..=n].iter().all(|&b| b)
    }

    /// Parses the labelling document: lines `vertex_id label`, comments
    /// with `#`. The bound defaults to the maximum label unless given.
    pub fn parse(text: &str, n: usize, bound: Option<usize>) -> Result<Self, LabellingError> {
        let mut labels: Vec<Option<usize>> = vec![None; n];
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse_num = |tok: Option<&str>| -> Result<usize, LabellingError> {
                tok.ok_or(LabellingError::Parse {
                    line: idx + 1,
                    msg: "expected `vertex_id label`".into(),
                })?
                .parse()
                .map_err(|_| LabellingError::Parse {
                    line: idx + 1,
                    msg: format!("bad number in {line:?}"),
                })
            };
            let v = parse_num(it.next())?;
            let l = parse_num(it.next())?;
            if v >= n {
                return Err(LabellingError::Parse {
                    line: idx + 1,
                    msg: format!("vertex id {v} out of range 0..{n}"),
                });
            }
            labels[v] = Some(l);
        }
        let labels: Vec<usize> = labels
            .into_iter()
            .enumerate()
            .map(|(v, l)| l.ok_or(LabellingError::Unassigned(v)))
            .collect::<Result<_, _>>()?;
        let bound = bound.unwrap_or_else(|| labels.iter().copied().max().unwrap_or(0));
        Labelling::new(labels, bound)
    }

    pub fn to_document(&self) -> String {
        let mut out = String::new();
        for (v, &l) in self.labels.iter().enumerate() {
            out.push_str(&format!("{v} {l}\n"));
        }
        out
    }
}

/// Per-labelling diagnostics; `distinct_colours + excess repeats = e(T)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub labels_used: usize,
    pub max_label: usize,
    pub label_bound: usize,
    pub distinct_colours: usize,
    pub repeated_colours: Vec<(usize, usize)>,
    pub graceful: bool,
    pub near_graceful: bool,
    pub epsilon: f64,
    pub stage_log: Vec<(String, String)>,
}

impl EmbeddingReport {
    /// Deterministic serialization with fixed field order.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn excess_repeats(&self) -> usize {
        self.repeated_colours.iter().map(|&(_, m)| m - 1).sum()
    }
}

fn check_assignment(tree: &Tree, lab: &Labelling) -> Result<(), LabellingError> {
    if lab.n() != tree.n() {
        return Err(LabellingError::SizeMismatch {
            have: lab.n(),
            want: tree.n(),
        });
    }
    Ok(())
}

/// The multiset of edge colours `|phi(x) - phi(y)|`, sorted.
pub fn edge_differences(tree: &Tree, lab: &Labelling) -> Result<Vec<usize>, LabellingError> {
    check_assignment(tree, lab)?;
    let mut colours: Vec<usize> = tree
        .edges()
        .iter()
        .map(|&(u, v)| lab.label(u).abs_diff(lab.label(v)))
        .collect();
    colours.sort_unstable();
    Ok(colours)
}

/// Number of distinct edge-differences under `lab`.
pub fn gracesize_of(tree: &Tree, lab: &Labelling) -> Result<usize, LabellingError> {
    let mut colours = edge_differences(tree, lab)?;
    colours.dedup();
    Ok(colours.len())
}

/// True iff `lab` is a graceful labelling of `tree`: bijective into
/// `{1..n}` with all `n-1` edge-differences distinct.
pub fn is_graceful(tree: &Tree, lab: &Labelling) -> Result<bool, LabellingError> {
    let distinct = gracesize_of(tree, lab)?;
    let verdict = distinct == tree.n() - 1 && lab.label_bound() == tree.n() && lab.is_bijective();
    if verdict {
        // A graceful n-vertex tree uses colours exactly {1..n-1}.
        let colours = edge_differences(tree, lab)?;
        debug_assert_eq!(colours, (1..tree.n()).collect::<Vec<_>>());
    }
    Ok(verdict)
}

/// Integer thresholds for the near-graceful verdict; rounded so they are
/// at least as hard to pass as the real-valued versions.
pub fn near_graceful_thresholds(n: usize, epsilon: f64) -> (usize, usize) {
    // A tree has only n - 1 edges, so the distinct-colour demand is capped
    // there; otherwise no labelling could pass at small n.
    let need_distinct = ((((1.0 - epsilon) * n as f64).ceil()) as usize).min(n.saturating_sub(1));
    let max_label = (((1.0 + epsilon) * n as f64).floor()) as usize;
    (need_distinct, max_label)
}

/// Full report for `lab` on `tree` against the `(1 - eps)` distinct-colour
/// and `(1 + eps)` label-range contract.
pub fn check_report(
    tree: &Tree,
    lab: &Labelling,
    epsilon: f64,
) -> Result<EmbeddingReport, LabellingError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(LabellingError::BadEpsilon(epsilon));
    }
    let colours = edge_differences(tree, lab)?;
    let mut mult: BTreeMap<usize, usize> = BTreeMap::new();
    for c in &colours {
        *mult.entry(*c).or_insert(0) += 1;
    }
    let distinct = mult.len();
    let repeated: Vec<(usize, usize)> = mult.into_iter().filter(|&(_, m)| m >= 2).collect();
    let n = tree.n();
    let (need_distinct, max_allowed) = near_graceful_thresholds(n, epsilon);
    let report = EmbeddingReport {
        labels_used: lab.n(),
        max_label: lab.max_label(),
        label_bound: lab.label_bound(),
        distinct_colours: distinct,
        repeated_colours: repeated,
        graceful: is_graceful(tree, lab)?,
        near_graceful: distinct >= need_distinct && lab.max_label() <= max_allowed,
        epsilon,
        stage_log: Vec::new(),
    };
    debug_assert_eq!(report.distinct_colours + report.excess_repeats(), n - 1);
    Ok(report)
}
