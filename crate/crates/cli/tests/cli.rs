use std::path::Path;
use std::process::{Command, Output};

use treecover::labels::{read_bundle, write_bundle};
use treecover::points::{format_points, parse_points, uniform_points};
use treecover_core::assembly::ImplicitCover;
use treecover_core::partial_nonsteiner::StripTreeStrategy;
use treecover_core::quadtree::CoverParams;
use treecover_core::routing::build_labels;
use treecover_core::tree_model::{deserialize, serialize, Mode};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treecover")).args(args).output().expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn write_points(dir: &Path, name: &str, dim: usize, n: usize, seed: u64) -> String {
    let path = dir.join(name);
    std::fs::write(&path, format_points(&uniform_points(dim, n, seed))).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn build_then_verify_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write_points(dir.path(), "p.txt", 2, 40, 1);
    let (a, b) = (dir.path().join("a.tc"), dir.path().join("b.tc"));
    for out in [&a, &b] {
        let o = run(&["build", "--input", &pts, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", text(&o.stderr));
        assert!(text(&o.stdout).contains("max_point_degree="));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let o = run(&["verify", "--input", &pts, a.to_str().unwrap()]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(text(&o.stdout).starts_with("PASS"));
    let o = run(&["verify", "--input", &pts, "--mode", "steiner"]);
    assert!(o.status.success(), "{}", text(&o.stderr));
}

#[test]
fn truncated_cover_fails_naming_a_pair() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write_points(dir.path(), "p.txt", 2, 30, 2);
    let full = dir.path().join("full.tc");
    assert!(run(&["build", "--input", &pts, "--out", full.to_str().unwrap()]).status.success());
    let mut cover = deserialize(&std::fs::read_to_string(&full).unwrap()).unwrap();
    assert!(cover.trees.len() > 1);
    cover.trees.truncate(1);
    let cut = dir.path().join("cut.tc");
    std::fs::write(&cut, serialize(&cover)).unwrap();
    let o = run(&["verify", "--input", &pts, cut.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("FAIL pair ("), "{}", text(&o.stderr));
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write_points(dir.path(), "p.txt", 2, 10, 3);
    let o = run(&["build", "--input", &pts, "--eps", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "2 2\n0 0\n1 x\n").unwrap();
    let o = run(&["stats", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("line 3"), "{}", text(&o.stderr));
    let o = run(&["route", "--input", &pts, "--mode", "steiner"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["verify", "--input", &pts, bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stats_of_a_single_point() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write_points(dir.path(), "one.txt", 3, 1, 4);
    let o = run(&["stats", "--input", &pts]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("sampled max_point_degree=0"), "{}", text(&o.stdout));
}

#[test]
fn route_decodes_every_pair() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write_points(dir.path(), "p.txt", 2, 24, 5);
    let labels = dir.path().join("labels.txt");
    let o = run(&["route", "--input", &pts, "--out", labels.to_str().unwrap()]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let out = text(&o.stdout);
    assert!(out.contains("routes=552 undecoded=0"), "{out}");
    let bundle = read_bundle(&std::fs::read_to_string(&labels).unwrap()).unwrap();
    assert_eq!(bundle.labels.len(), 24);
}

#[test]
fn bench_prints_one_row_per_size() {
    let o = run(&["bench", "2", "32", "64"]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let out = text(&o.stdout);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("32,") && lines[2].starts_with("64,"), "{out}");
}

#[test]
fn bundles_round_trip() {
    let x = uniform_points(2, 20, 6);
    let p = CoverParams::new(2, 0.1, Mode::NonSteiner, StripTreeStrategy::DyadicBinary).unwrap();
    let bundle = build_labels(&ImplicitCover::build(&x, &p).unwrap()).unwrap();
    let (written, table) = write_bundle(&bundle);
    assert!(table.max_total() > 0);
    assert_eq!(read_bundle(&written).unwrap(), bundle);
    assert_eq!(write_bundle(&read_bundle(&written).unwrap()).0, written);
}

#[test]
fn points_round_trip_and_comments() {
    let x = uniform_points(3, 12, 7);
    assert_eq!(parse_points(&format_points(&x)).unwrap(), x);
    let y = parse_points("# header\n1 2 # one dimension\n0.5\n\n-2 # last\n").unwrap();
    assert_eq!(y.raw(), &[0.5, -2.0]);
    assert!(parse_points("1 3\n0\n1\n").unwrap_err().message.contains("found 2"));
}
