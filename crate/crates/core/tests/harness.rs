use std::process::Command;

use smallbox::harness::emit::{parse_csv, parse_json, read_records};
use smallbox::harness::{cache_key, run, run_cached, Cache, ExperimentKind, ExperimentSpec};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_smallbox"))
}

fn census(threads: usize) -> ExperimentSpec {
    let mut s = ExperimentSpec::new(ExperimentKind::Census)
        .with("p", 101)
        .with("g", 1)
        .with("M", 12);
    s.threads = threads;
    s
}

#[test]
fn cli_count_curve_example() {
    let out = bin()
        .args([
            "count-curve",
            "--p",
            "5",
            "--f",
            "0,0,0,1",
            "--box",
            "0,0,1",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let recs = parse_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(recs[0].value, 1.0);
    assert_eq!(recs[0].kind, "count_curve");
}

#[test]
fn cli_json_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.json");
    let status = bin()
        .args([
            "vinogradov",
            "--k",
            "1",
            "--m",
            "1",
            "--H",
            "3",
            "--format",
            "json",
            "--out",
        ])
        .arg(&path)
        .status()
        .unwrap();
    assert!(status.success());
    let recs = read_records(&path).unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0].value, 3.0);
    let direct = run(&ExperimentSpec::new(ExperimentKind::Vinogradov)
        .with("k", 1)
        .with("m", 1)
        .with("H", 3))
    .unwrap();
    assert_eq!(recs[0].without_runtime(), direct[0].without_runtime());
    assert_eq!(
        parse_json(&std::fs::read_to_string(&path).unwrap()).unwrap(),
        recs
    );
}

#[test]
fn cli_config_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# census\np = 101\ng = 1\nM = 4\n").unwrap();
    let out = bin()
        .args(["curve-classes", "--M", "8", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let recs = parse_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(recs[0].params, "M=8;g=1;p=101");
    // frozen census value for p = 101, M = 8
    assert_eq!(recs[0].value, 58.0);

    let out = bin()
        .args(["run", "--kind", "census", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    let recs = parse_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(recs[0].value, 15.0);
}

#[test]
fn cli_errors_exit_2() {
    let out = bin()
        .args(["weil", "--p", "101", "--f", "1,0,0,1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`box`"));
    let out = bin()
        .args(["count-curve", "--p", "9", "--f", "1", "--box", "0,0,1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["run", "--kind", "census", "--set", "p=101"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cli_failing_record_exits_1() {
    let out = bin().args(["acceptance", "--only", "6"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("FAIL [ 6]"));
}

#[test]
fn results_do_not_depend_on_threads() {
    let base: Vec<_> = run(&census(1))
        .unwrap()
        .iter()
        .map(|r| r.without_runtime())
        .collect();
    for t in [2, 3, 8] {
        let other: Vec<_> = run(&census(t))
            .unwrap()
            .iter()
            .map(|r| r.without_runtime())
            .collect();
        assert_eq!(base, other, "threads = {t}");
    }
    let lattice = |t| {
        let mut s = ExperimentSpec::new(ExperimentKind::Lattice)
            .with("coeffs", "1,37,-12")
            .with("p", 211)
            .with("halfwidths", "10,3,5");
        s.threads = t;
        run(&s)
            .unwrap()
            .iter()
            .map(|r| r.without_runtime())
            .collect::<Vec<_>>()
    };
    assert_eq!(lattice(1), lattice(4));
}

#[test]
fn cache_key_ignores_threads_only() {
    assert_eq!(cache_key(&census(1)), cache_key(&census(7)));
    let mut seeded = census(1);
    seeded.seed += 1;
    assert_ne!(cache_key(&census(1)), cache_key(&seeded));
    assert_ne!(cache_key(&census(1)), cache_key(&census(1).with("M", 13)));
}

#[test]
fn cache_hit_miss_and_eviction() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::open(dir.path()).unwrap();
    let spec = census(2);
    assert!(cache.lookup(&spec).is_none());
    let first = run_cached(&spec, Some(&cache)).unwrap();
    let hit = cache
        .lookup(&census(5))
        .expect("threads do not change the key");
    assert_eq!(hit, first);

    let entry = dir.path().join(format!("{}.json", cache_key(&spec)));
    std::fs::write(&entry, "{ not json").unwrap();
    assert!(cache.lookup(&spec).is_none());
    assert!(!entry.exists(), "corrupted entry is removed");
    let again = run_cached(&spec, Some(&cache)).unwrap();
    assert_eq!(
        again
            .iter()
            .map(|r| r.without_runtime())
            .collect::<Vec<_>>(),
        first
            .iter()
            .map(|r| r.without_runtime())
            .collect::<Vec<_>>()
    );
    assert!(entry.exists());
}

#[test]
fn cli_cache_dir_reuses_results() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sharpness",
        "--p",
        "1009",
        "--g",
        "1",
        "--M",
        "64",
        "--cache",
    ];
    let a = bin().args(args).arg(dir.path()).output().unwrap();
    let b = bin().args(args).arg(dir.path()).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}
