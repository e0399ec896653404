//! Command line front end: tree generation, labelling, verification,
//! exact solving, benchmarking, and DOT export.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use graceful::embed::near_graceful;
use graceful::exact::solve_graceful;
use graceful::sub_seed;
use graceful::tree::{enumerate_trees, random_tree, Tree};
use graceful::verify::{check_report, near_graceful_thresholds, Labelling};

#[derive(Parser)]
#[command(name = "graceful", about = "near-graceful tree labelling toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a tree and write its edge list.
    Gen {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value = "random")]
        family: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Label a tree near-gracefully and write the labelling plus a report.
    Label {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        family: Option<String>,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long,
            help = "edge-list file; overrides --family/--n")]
        r#in: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute a report for a tree + labelling pair; nonzero exit unless
    /// the labelling meets the epsilon targets.
    Verify {
        #[arg(long)]
        r#in: PathBuf,
        /// labelling document path
        labels: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
    },
    /// Run the exact graceful solver.
    SolveExact {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        family: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        r#in: Option<PathBuf>,
        #[arg(long, default_value_t = 50_000_000)]
        budget: u64,
        /// solve every isomorphism class of the given order
        #[arg(long, default_value_t = false)]
        all: bool,
    },
    /// Sweep (family x n x seed) and emit CSV rows.
    Bench {
        #[arg(long, help = "restrict to one order")]
        n: Option<usize>,
        #[arg(long, help = "restrict to one family")]
        family: Option<String>,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        #[arg(long, default_value_t = 0, help = "base seed; 10 seeds per cell")]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a DOT document with labels as node captions and colours as
    /// edge captions.
    ExportDot {
        #[arg(long)]
        r#in: PathBuf,
        /// labelling document path
        labels: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn gen_family(family: &str, n: usize, seed: u64) -> Result<Tree> {
    if n == 0 {
        bail!("n must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, family));
    let tree = match family {
        "random" => random_tree(n, seed),
        "path" => Tree::new(n, (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect())?,
        "star" => Tree::new(n, (1..n).map(|v| (0, v)).collect())?,
        "caterpillar" => {
            // Path spine, seeded pendant counts per spine vertex.
            let spine = (n / 2).max(1);
            let mut edges: Vec<(usize, usize)> =
                (0..spine.saturating_sub(1)).map(|i| (i, i + 1)).collect();
            let mut next = spine;
            while next < n {
                edges.push((rng.gen_range(0..spine), next));
                next += 1;
            }
            Tree::new(n, edges)?
        }
        "spider" => {
            // Seeded number of legs from one centre, lengths as even as
            // possible.
            let legs = rng.gen_range(3..=(n - 1).clamp(3, 100));
            let mut edges = Vec::new();
            let mut next = 1;
            for leg in 0..legs {
                let len = (n - 1) / legs + usize::from(leg < (n - 1) % legs);
                let mut prev = 0;
                for _ in 0..len {
                    edges.push((prev, next));
                    prev = next;
                    next += 1;
                }
            }
            Tree::new(n, edges)?
        }
        "binary" => Tree::new(n, (1..n).map(|v| ((v - 1) / 2, v)).collect())?,
        other => bail!("unknown family {other:?}"),
    };
    Ok(tree)
}

fn load_tree(path: &PathBuf) -> Result<Tree> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Tree::parse(&text).map_err(|e| anyhow!("parsing {}: {e}", path.display()))
}

fn input_tree(
    path: &Option<PathBuf>,
    family: &Option<String>,
    n: Option<usize>,
    seed: u64,
) -> Result<Tree> {
    match path {
        Some(p) => load_tree(p),
        None => {
            let family = family.as_deref().unwrap_or("random");
            gen_family(family, n.unwrap_or(100), seed)
        }
    }
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn stage_digest(stage_log: &[(String, String)]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for (a, b) in stage_log {
        for byte in a.bytes().chain(b.bytes()).chain([0u8]) {
            h ^= byte as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    format!("{h:016x}")
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Gen { n, family, seed, out } => {
            let tree = gen_family(&family, n, seed)?;
            write_out(&out, &tree.to_edge_list())
        }
        Command::Label { n, family, epsilon, seed, r#in, out } => {
            let tree = input_tree(&r#in, &family, n, seed)?;
            let (lab, report) = near_graceful(&tree, epsilon, seed)
                .map_err(|e| anyhow!("labelling failed: {e}"))?;
            // In-process re-verification before anything is written.
            let recheck = check_report(&tree, &lab, epsilon)?;
            if recheck.distinct_colours != report.distinct_colours
                || recheck.max_label != report.max_label
            {
                bail!("report mismatch on re-verification");
            }
            write_out(&out, &lab.to_document())?;
            println!("{}", report.to_json());
            Ok(())
        }
        Command::Verify { r#in, labels, epsilon } => {
            let tree = load_tree(&r#in)?;
            let text = fs::read_to_string(&labels)
                .with_context(|| format!("reading {}", labels.display()))?;
            let lab = Labelling::parse(&text, tree.n(), None)
                .map_err(|e| anyhow!("parsing labelling: {e}"))?;
            let report = check_report(&tree, &lab, epsilon)?;
            println!("{}", report.to_json());
            if !report.near_graceful {
                bail!(
                    "labelling misses the target: {} distinct of {} needed",
                    report.distinct_colours,
                    near_graceful_thresholds(tree.n(), epsilon).0
                );
            }
            Ok(())
        }
        Command::SolveExact { n, family, seed, r#in, budget, all } => {
            if all {
                let order = n.ok_or_else(|| anyhow!("--all needs --n"))?;
                let trees = enumerate_trees(order).map_err(|e| anyhow!("{e}"))?;
                let mut solved = 0;
                for tree in &trees {
                    let (lab, _) = solve_graceful(tree, budget);
                    match lab {
                        Some(lab) if graceful::verify::is_graceful(tree, &lab)? => solved += 1,
                        _ => bail!("no graceful labelling found for a class at n={order}"),
                    }
                }
                println!("{} classes at n={}, all graceful", solved, order);
                return Ok(());
            }
            let tree = input_tree(&r#in, &family, n, seed)?;
            let (lab, stats) = solve_graceful(&tree, budget);
            match lab {
                Some(lab) => {
                    print!("{}", lab.to_document());
                    eprintln!("nodes expanded: {}", stats.nodes_expanded);
                    Ok(())
                }
                None => bail!("search exhausted budget {budget} without a labelling"),
            }
        }
        Command::Bench { n, family, epsilon, seed, out } => {
            let families: Vec<&str> = match &family {
                Some(f) => vec![f.as_str()],
                None => vec!["random", "caterpillar", "spider", "binary"],
            };
            let orders: Vec<usize> = match n {
                Some(one) => vec![one],
                None => vec![1_000, 10_000, 100_000],
            };
            let mut rows = Vec::new();
            for fam in &families {
                for &order in &orders {
                    for s in seed..seed + 10 {
                        let tree = gen_family(fam, order, s)?;
                        let start = Instant::now();
                        let (lab, report) = near_graceful(&tree, epsilon, s)
                            .map_err(|e| anyhow!("labelling failed: {e}"))?;
                        let elapsed_ms = start.elapsed().as_millis();
                        rows.push((
                            fam.to_string(),
                            order,
                            s,
                            format!(
                                "{},{},{},{},{},{:.4},{},{},{}",
                                fam,
                                order,
                                epsilon,
                                s,
                                report.distinct_colours,
                                report.distinct_colours as f64 / order as f64,
                                lab.max_label(),
                                elapsed_ms,
                                stage_digest(&report.stage_log)
                            ),
                        ));
                    }
                }
            }
            rows.sort();
            let mut csv =
                String::from("family,n,epsilon,seed,distinct,fraction,max_label,elapsed_ms,digest\n");
            for (_, _, _, row) in rows {
                csv.push_str(&row);
                csv.push('\n');
            }
            write_out(&out, &csv)
        }
        Command::ExportDot { r#in, labels, out } => {
            let tree = load_tree(&r#in)?;
            let text = fs::read_to_string(&labels)
                .with_context(|| format!("reading {}", labels.display()))?;
            let lab = Labelling::parse(&text, tree.n(), None)
                .map_err(|e| anyhow!("parsing labelling: {e}"))?;
            let mut dot = String::from("graph tree {\n");
            for v in 0..tree.n() {
                dot.push_str(&format!("  v{} [label=\"{}\"];\n", v, lab.label(v)));
            }
            for &(x, y) in tree.edges() {
                dot.push_str(&format!(
                    "  v{} -- v{} [label=\"{}\"];\n",
                    x,
                    y,
                    lab.label(x).abs_diff(lab.label(y))
                ));
            }
            dot.push_str("}\n");
            write_out(&out, &dot)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
