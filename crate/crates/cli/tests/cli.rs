use std::path::Path;
use std::process::{Command, Output};

fn largesol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_largesol"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn manifest_value(dir: &Path, key: &str) -> Option<String> {
    let text = std::fs::read_to_string(dir.join("manifest.txt")).ok()?;
    text.lines().find_map(|l| {
        let (k, v) = l.split_once('=')?;
        (k.trim() == key).then(|| v.trim().to_string())
    })
}

fn simulate(dir: &Path, extra: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut args = vec![
        "simulate", "--domain", "disk:1", "--radial", "--h", "0.0625", "--T", "0.2", "--tau",
        "0.01", "--out", out,
    ];
    args.extend_from_slice(extra);
    largesol(&args)
}

#[test]
fn cheeger_square_prints_constant() {
    let o = largesol(&["cheeger", "--shape", "square:1"]);
    assert!(o.status.success());
    assert!(
        stdout(&o).lines().any(|l| l == "h = 3.7724539"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn cheeger_raster_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    let o = largesol(&[
        "cheeger",
        "--shape",
        "disk:1",
        "--raster",
        "8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,H_C"));
    for l in lines {
        let h: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
        assert!((h - 2.0).abs() < 1e-9, "{l}");
    }
}

#[test]
fn example51_initial_value_at_three_quarters() {
    let o = largesol(&["example51", "--t", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("rho,value"));
    let value = text
        .lines()
        .skip(1)
        .map(|l| l.split_once(',').unwrap())
        .find(|(r, _)| r.parse::<f64>().unwrap() == 0.75)
        .map(|(_, v)| v.parse::<f64>().unwrap())
        .unwrap();
    assert!((value - 1.0986123).abs() < 5e-8, "{value}");
}

#[test]
fn usage_errors_exit_2() {
    let o = largesol(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(
        largesol(&["simulate", "--domain", "disk:1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        largesol(&["cheeger", "--shape", "blob:3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        largesol(&["nonexistence", "--p", "1.5"]).status.code(),
        Some(2)
    );
}

#[test]
fn nonexistence_for_p2_diverges() {
    let o = largesol(&["nonexistence", "--p", "2", "--radial", "--h", "0.0625"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("classification = DIVERGING"));
}

#[test]
fn simulate_is_reproducible_with_one_manifest() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [a.path(), b.path()] {
        let o = simulate(d, &["--p", "1.5", "--n", "4", "--u0", "const:1"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names
            .iter()
            .filter(|n| n.as_str() == "manifest.txt")
            .count(),
        1
    );
    assert!(names.iter().filter(|n| n.ends_with(".csv")).count() >= 11);
    for n in names.iter().filter(|n| n.ends_with(".csv")) {
        let x = std::fs::read_to_string(a.path().join(n)).unwrap();
        let y = std::fs::read_to_string(b.path().join(n)).unwrap();
        assert_eq!(x, y, "{n} differs between identical runs");
    }
}

#[test]
fn config_file_fills_missing_flags_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "p = 1.5\nn = 3\nsnapshot_count = 4\n").unwrap();
    let out = dir.path().join("run");
    let o = largesol(&[
        "--config",
        cfg.to_str().unwrap(),
        "simulate",
        "--domain",
        "disk:1",
        "--radial",
        "--h",
        "0.0625",
        "--T",
        "0.1",
        "--p",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        manifest_value(&out, "p").unwrap().parse::<f64>().unwrap(),
        2.0
    );
    assert_eq!(
        manifest_value(&out, "n").unwrap().parse::<f64>().unwrap(),
        3.0
    );
    assert_eq!(
        manifest_value(&out, "snapshot_times")
            .unwrap()
            .split(',')
            .count(),
        5
    );
}

#[test]
fn solver_failure_exits_3_and_names_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate(dir.path(), &["--p", "1", "--n", "10", "--max-iter", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("manifest.txt"));
    assert_eq!(
        manifest_value(dir.path(), "status").as_deref(),
        Some("failed")
    );
}

#[test]
fn verify_sup_bound_and_contraction() {
    let u = tempfile::tempdir().unwrap();
    let v = tempfile::tempdir().unwrap();
    assert!(
        simulate(u.path(), &["--p", "1", "--n", "1", "--u0", "const:0.5"])
            .status
            .success()
    );
    assert!(
        simulate(v.path(), &["--p", "1", "--n", "1", "--u0", "zero"])
            .status
            .success()
    );

    let pass = largesol(&[
        "verify",
        "--suite",
        "sup-bound",
        "--in",
        u.path().to_str().unwrap(),
    ]);
    assert_eq!(pass.status.code(), Some(0), "{}", stdout(&pass));
    assert!(stdout(&pass).starts_with("check,value,threshold,verdict"));

    let forced = largesol(&[
        "verify",
        "--suite",
        "sup-bound",
        "--in",
        u.path().to_str().unwrap(),
        "--threshold=-1",
    ]);
    assert_eq!(forced.status.code(), Some(1));
    assert!(stdout(&forced).contains("FAIL"));

    let c = largesol(&[
        "verify",
        "--suite",
        "contraction",
        "--in",
        u.path().to_str().unwrap(),
        "--against",
        v.path().to_str().unwrap(),
    ]);
    assert_eq!(c.status.code(), Some(0), "{}", stdout(&c));
}

#[test]
fn ladder_levels_feed_linearity_and_monotone_suites() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = largesol(&[
        "ladder",
        "--domain",
        "disk:1",
        "--radial",
        "--h",
        "0.0625",
        "--p",
        "2",
        "--T",
        "0.2",
        "--n0",
        "4",
        "--levels",
        "3",
        "--save-levels",
        "--out",
        out,
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("classification = DIVERGING"));
    let csv = std::fs::read_to_string(dir.path().join("ladder.csv")).unwrap();
    assert!(csv.starts_with("level,n,time,L1_K,sup_K,diff_prev,violations"));
    for suite in ["p2-linearity", "monotone"] {
        let v = largesol(&["verify", "--suite", suite, "--in", out]);
        assert_eq!(v.status.code(), Some(0), "{suite}: {}", stdout(&v));
    }
}

#[test]
fn ladder_plots_barrier_exponents() {
    let dir = tempfile::tempdir().unwrap();
    let o = largesol(&[
        "--jobs",
        "2",
        "ladder",
        "--domain",
        "disk:1",
        "--radial",
        "--h",
        "0.015625",
        "--p",
        "1.5",
        "--T",
        "0.5",
        "--n0",
        "4",
        "--levels",
        "19",
        "--snapshot-count",
        "20",
        "--plot",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["barrier_time.svg", "barrier_distance.svg"] {
        let svg = std::fs::read_to_string(dir.path().join(f)).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("slope"));
    }
    let te: f64 = manifest_value(dir.path(), "barrier_time_exponent")
        .unwrap()
        .parse()
        .unwrap();
    assert!((te - 2.0).abs() < 0.1, "{te}");
}

#[test]
fn example51_compare_reports_small_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = largesol(&[
        "simulate",
        "--domain",
        "disk:1",
        "--radial",
        "--h",
        "0.0078125",
        "--p",
        "1",
        "--n",
        "128",
        "--T",
        "0.5",
        "--tau",
        "0.0025",
        "--u0",
        "example51",
        "--snapshots",
        "0.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let c = largesol(&[
        "example51",
        "--t",
        "0.5",
        "--compare",
        dir.path().to_str().unwrap(),
    ]);
    assert!(c.status.success());
    let err: f64 = stdout(&c)
        .lines()
        .find_map(|l| l.strip_prefix("# relative_l1_error = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(err < 5e-2, "{err}");
}
