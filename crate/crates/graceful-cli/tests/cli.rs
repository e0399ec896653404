use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_graceful"))
}

#[test]
fn gen_path_edge_list() {
    let out = bin().args(["gen", "--family", "path", "--n", "4"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    assert!(lines.iter().any(|l| l.contains("0") && l.contains("1")));
    assert_eq!(lines.iter().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn gen_rejects_unknown_family() {
    let out = bin().args(["gen", "--family", "wheel", "--n", "4"]).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error: "), "stderr was {err:?}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn label_path_reports_graceful_range() {
    let out = bin()
        .args(["label", "--family", "path", "--n", "5", "--epsilon", "0.2", "--seed", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let json = &text[text.find('{').unwrap()..];
    let report: serde_json::Value = serde_json::from_str(json).unwrap();
    assert!(report["distinct_colours"].as_u64().unwrap() >= 4);
}

#[test]
fn label_verify_round_trip() {
    let dir = std::env::temp_dir().join(format!("graceful-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let tree_path = dir.join("tree.txt");
    let lab_path = dir.join("labels.txt");

    let gen = bin()
        .args(["gen", "--family", "caterpillar", "--n", "60", "--seed", "3"])
        .arg("--out")
        .arg(&tree_path)
        .output()
        .unwrap();
    assert!(gen.status.success());

    let label = bin()
        .args(["label", "--epsilon", "0.3", "--seed", "3", "--in"])
        .arg(&tree_path)
        .arg("--out")
        .arg(&lab_path)
        .output()
        .unwrap();
    assert!(label.status.success());

    let verify = bin()
        .args(["verify", "--epsilon", "0.3", "--in"])
        .arg(&tree_path)
        .arg(&lab_path)
        .output()
        .unwrap();
    assert!(verify.status.success(), "{}", String::from_utf8_lossy(&verify.stderr));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_rejects_bad_labelling() {
    let dir = std::env::temp_dir().join(format!("graceful-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let tree_path = dir.join("tree.txt");
    let lab_path = dir.join("labels.txt");
    std::fs::write(&tree_path, "3\n0 1\n1 2\n").unwrap();
    // Monotone labels: both colours equal, misses any threshold above 1.
    std::fs::write(&lab_path, "0 1\n1 2\n2 3\n").unwrap();
    let verify = bin()
        .args(["verify", "--epsilon", "0.1", "--in"])
        .arg(&tree_path)
        .arg(&lab_path)
        .output()
        .unwrap();
    assert!(!verify.status.success());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn solve_exact_all_classes_at_nine() {
    let out = bin()
        .args(["solve-exact", "--n", "9", "--all"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("47 classes"), "got {text:?}");
}

#[test]
fn bench_csv_schema() {
    let out = bin()
        .args(["bench", "--family", "path", "--n", "60", "--epsilon", "0.25"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "family,n,epsilon,seed,distinct,fraction,max_label,elapsed_ms,digest"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    let seeds: Vec<&str> = rows.iter().map(|r| r.split(',').nth(3).unwrap()).collect();
    let mut sorted = seeds.clone();
    sorted.sort_by_key(|s| s.parse::<u64>().unwrap());
    assert_eq!(seeds, sorted);
}

#[test]
fn export_dot_captions() {
    let dir = std::env::temp_dir().join(format!("graceful-cli-dot-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let tree_path = dir.join("tree.txt");
    let lab_path = dir.join("labels.txt");
    std::fs::write(&tree_path, "3\n0 1\n1 2\n").unwrap();
    std::fs::write(&lab_path, "0 1\n1 3\n2 2\n").unwrap();
    let out = bin()
        .args(["export-dot", "--in"])
        .arg(&tree_path)
        .arg(&lab_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dot = String::from_utf8(out.stdout).unwrap();
    assert!(dot.contains("v0 [label=\"1\"]"));
    assert!(dot.contains("v0 -- v1 [label=\"2\"]"));
    assert!(dot.contains("v1 -- v2 [label=\"1\"]"));
    // Node captions recover the labelling exactly.
    let mut recovered = vec![0usize; 3];
    for line in dot.lines() {
        let line = line.trim();
        if line.starts_with('v') && !line.contains("--") && line.contains("label=") {
            let v: usize = line[1..line.find(' ').unwrap()].parse().unwrap();
            let q1 = line.find('"').unwrap() + 1;
            let q2 = line.rfind('"').unwrap();
            recovered[v] = line[q1..q2].parse().unwrap();
        }
    }
    assert_eq!(recovered, vec![1, 3, 2]);
    std::fs::remove_dir_all(&dir).ok();
}
