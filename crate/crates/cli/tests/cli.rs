use std::path::Path;
use std::process::{Command, Output};

fn knnsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knnsp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value(text: &str, key: &str) -> Option<String> {
    text.lines().find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_string))
}

#[test]
fn constants_prints_the_block() {
    let o = knnsp(&["constants", "--n", "10000", "--k", "28", "--d", "2", "--lambda", "0.1", "--a", "0.3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    for key in ["eta_d", "r_low", "r_up", "varsigma", "e1", "e2", "e3", "rescale", "probability_bound", "admissible"] {
        assert!(value(&out, key).is_some(), "missing {key} in\n{out}");
    }
    assert_eq!(value(&out, "eta_d").unwrap(), "3.1415926536");
    let r_low: f64 = value(&out, "r_low").unwrap().parse().unwrap();
    let expected = (28.0 / (std::f64::consts::PI * 10000.0 * 1.1f64)).sqrt();
    assert!((r_low - expected).abs() < 1e-9);
    // Echoed config comes first, on stderr.
    assert!(stderr(&o).starts_with("n = 10000\nk = 28\n"));
}

#[test]
fn sp_on_a_three_vertex_path() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    std::fs::write(&g, "# n=3 d=1 mode=knn param=1 scheme=unit seed=0\n0 1 1\n1 2 1\n").unwrap();
    let o = knnsp(&["sp", "--graph", g.to_str().unwrap(), "--source", "0", "--target", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(value(&stdout(&o), "length").as_deref(), Some("2"));
    assert_eq!(value(&stdout(&o), "path").as_deref(), Some("0 1 2"));
}

#[test]
fn unreachable_target_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    std::fs::write(&g, "# n=4 d=1 mode=knn param=1 scheme=unit seed=0\n0 1 1\n2 3 1\n").unwrap();
    let o = knnsp(&["sp", "--graph", g.to_str().unwrap(), "--source", "0", "--target", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("not reachable"));
}

#[test]
fn missing_flag_exits_with_usage() {
    let o = knnsp(&["sp", "--source", "0", "--target", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("graph") && err.contains("Usage"), "{err}");
}

#[test]
fn unknown_subcommand_and_key_exit_two() {
    assert_eq!(knnsp(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.txt");
    std::fs::write(&cfg, "n = 100\nbogus = 1\n").unwrap();
    let o = knnsp(&["--config", cfg.to_str().unwrap(), "constants", "--k", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.txt");
    std::fs::write(&cfg, "# shared\nn = 100\nk = 10\n").unwrap();
    let o = knnsp(&["--config", cfg.to_str().unwrap(), "constants", "--k", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(value(&stdout(&o), "k").as_deref(), Some("20"));
    assert_eq!(value(&stdout(&o), "n").as_deref(), Some("100"));
}

#[test]
fn build_graph_round_trips_through_sp() {
    let dir = tempfile::tempdir().unwrap();
    let (g, again) = (dir.path().join("g.txt"), dir.path().join("again.txt"));
    let o = knnsp(&[
        "build-graph",
        "--density",
        "two-squares",
        "--n",
        "400",
        "--k",
        "6",
        "--scheme",
        "h-power:0.5",
        "--seed",
        "3",
        "--out",
        g.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = knnsp(&[
        "sp",
        "--graph",
        g.to_str().unwrap(),
        "--source",
        "0",
        "--target",
        "1",
        "--write-graph",
        again.to_str().unwrap(),
    ]);
    assert!(matches!(o.status.code(), Some(0) | Some(3)), "{}", stderr(&o));
    assert_eq!(std::fs::read(&g).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn oracle_dist_unit_field_is_euclidean() {
    let o = knnsp(&["oracle-dist", "--field", "one", "--m", "128", "--x", "0.1 0.5", "--y", "0.9,0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let d: f64 = value(&stdout(&o), "distance").unwrap().parse().unwrap();
    // Endpoint links carry the stencil distortion over at most a cell each.
    assert!(d >= 0.8 - 1e-12 && d - 0.8 < 2.0 * 0.0131 / 128.0, "{d}");
}

fn only_run_dir(root: &Path) -> std::path::PathBuf {
    let mut dirs: Vec<_> = std::fs::read_dir(root).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1);
    dirs.pop().unwrap()
}

#[test]
fn experiment_writes_a_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = knnsp(&[
        "exp-weighted",
        "--density",
        "uniform:d=2",
        "--n",
        "800",
        "--trials",
        "2",
        "--oracle-m",
        "64",
        "--outdir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("experiment = weighted\n"));
    assert!(value(&stdout(&o), "median_ratio").is_some());
    let run = only_run_dir(&dir.path().join("weighted"));
    for f in ["rows.csv", "constants.txt"] {
        assert!(run.join(f).is_file(), "missing {f}");
    }
}

#[test]
fn experiment_config_errors_exit_two() {
    let o = knnsp(&["exp-convergence", "--trials", "zero"]);
    assert_eq!(o.status.code(), Some(2));
    let o = knnsp(&["exp-weighted", "--scheme", "h-custom:square"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}
