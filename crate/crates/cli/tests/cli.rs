use std::path::Path;
use std::process::{Command, Output};

use tentkit::io::{load_hsf1, save_boundary_hsf1, save_hsf1};
use tentkit::kernels::{extend, KernelSpec};
use tentkit::tent::tent_norm;
use tentkit::{AverageSpec, Boundary, Domain, ExponentTuple, Field};

fn tentkit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tentkit")).args(args).current_dir(dir).output().expect("binary runs")
}

fn small_config(extra: &str) -> String {
    format!(
        "seed = 7\n{extra}\
         [domain]\nside_log2 = 3\nresolutions = [32, 64]\nk_low = -1\noctaves = 2\nm_scale = 2\n\
         [families]\ncount = 4\nmax_mode = 6\nboundary_count = 2\n\
         [exponents]\ntuples = [{{ p = 2, q = 2, r = 2, beta = 0 }}]\n"
    )
}

fn sample_field(dom: &Domain) -> Field {
    Field::from_fn(dom, |s, y| (-s * s).exp() * (0.7 * y[0]).sin() + 0.1 * s).unwrap()
}

#[test]
fn norm_prints_one_number() {
    let dir = tempfile::tempdir().unwrap();
    let dom = Domain::aligned(1, 4, 64, -2, 3, 4).unwrap();
    let f = sample_field(&dom);
    save_hsf1(&f, dir.path().join("field.hsf1")).unwrap();
    let out = tentkit(&["norm", "--p", "2", "--q", "2", "--r", "2", "--beta", "0", "field.hsf1"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    let v: f64 = text.trim().parse().unwrap();
    let e = ExponentTuple::new(2.0, 2.0, 2.0, 0.0).unwrap();
    assert_eq!(v, tent_norm(&f, &e, &AverageSpec::STANDARD).unwrap().value);

    let out = tentkit(&["norm", "--p", "inf", "--q", "1/2", "--r", "1", "--beta", "-0.5", "--variant", "dyadic", "field.hsf1"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = tentkit(&["norm", "--p", "2", "--q", "2", "--r", "2", "--json", "field.hsf1"], dir.path());
    let json = String::from_utf8(out.stdout).unwrap();
    assert!(json.contains("\"variant\"") && json.contains("\"t_range\""));
}

#[test]
fn extend_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let dom = Domain::aligned(1, 4, 64, -2, 3, 4).unwrap();
    let b = Boundary::from_fn(&dom, |y| (2.0 * std::f64::consts::PI * 3.0 * y[0] / 16.0).cos()).unwrap();
    save_boundary_hsf1(&b, dir.path().join("b.hsf1")).unwrap();
    let out = tentkit(&["extend", "--kernel", "gw:2", "--s-min", "0.125", "--s-max", "1", "b.hsf1", "u.hsf1"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let u: Field = load_hsf1(dir.path().join("u.hsf1")).unwrap();
    let target = Domain::new(1, 16.0, 64, 0.125, 1.0, 8).unwrap();
    let expected = extend(&b, &KernelSpec::GaussWeierstrass { order: 2 }, &target).unwrap();
    assert_eq!(u.domain(), &target);
    assert_eq!(u.magnitudes(), expected.magnitudes());
}

#[test]
fn suite_writes_reports_and_report_merges_them() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.toml"), small_config("")).unwrap();
    let out = tentkit(&["suite", "duality,equivalences", "cfg.toml", "--out", "a.jsonl", "--csv", "a.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let a = std::fs::read_to_string(dir.path().join("a.jsonl")).unwrap();
    assert!(a.lines().all(|l| l.starts_with("{\"record\":")));
    assert!(a.contains("\"suite\":\"duality\"") && a.contains("\"suite\":\"equivalences\""));
    assert!(std::fs::read_to_string(dir.path().join("a.csv")).unwrap().lines().count() > 1);

    // same config, same bytes
    tentkit(&["suite", "duality,equivalences", "cfg.toml", "--out", "b.jsonl"], dir.path());
    assert_eq!(a, std::fs::read_to_string(dir.path().join("b.jsonl")).unwrap());

    let out = tentkit(&["report", "a.jsonl", "b.jsonl", "--format", "json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2 * a.lines().count());
    let out = tentkit(&["report", "a.jsonl", "--out", "merged.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("merged.csv").exists());
}

#[test]
fn failing_band_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.toml"), small_config("")).unwrap();
    let mut text = small_config("");
    text.push_str("[bands]\nequivalence = [100.0, 200.0]\n");
    std::fs::write(dir.path().join("strict.toml"), text).unwrap();
    let out = tentkit(&["suite", "equivalences", "strict.toml", "--out", "s.jsonl"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
    let out = tentkit(&["report", "s.jsonl", "--out", "s.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_and_file_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["norm", "--bogus"],
        &["norm", "--p", "2", "--q", "2", "--r", "2", "missing.hsf1"],
        &["norm", "--p", "-1", "--q", "2", "--r", "2", "missing.hsf1"],
        &["suite", "nonsense"],
        &["suite", "duality", "missing.toml"],
        &["report", "missing.jsonl"],
        &["extend", "--kernel", "gw:x", "--s-min", "1", "--s-max", "2", "a", "b"],
        &["frobnicate"],
    ];
    for args in cases {
        let out = tentkit(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
    std::fs::write(dir.path().join("bad.toml"), "[domain]\nunknown_key = 1\n").unwrap();
    assert_eq!(tentkit(&["suite", "duality", "bad.toml"], dir.path()).status.code(), Some(2));

    let out = Command::new(env!("CARGO_BIN_EXE_tentkit"))
        .args(["suite", "duality"])
        .env("TENTKIT_THREADS", "many")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(tentkit(&["--help"], dir.path()).status.code(), Some(0));
}
