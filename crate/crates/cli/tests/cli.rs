use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const TRINOMIAL: &str = r#"
[system]
alphabet = 3
weights = ["1/3", "1/3", "1/3"]

[cocycle]
group = { kind = "lattice", dim = 1 }
values = [[-1], [0], [1]]

[experiment]
kind = "ratio"
n_end = 60
"#;

fn gmlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmlab")).args(args).output().expect("binary runs")
}

fn run(dir: &Path, name: &str, config: &str, extra: &[&str]) -> (i32, PathBuf) {
    let cfg = dir.join(format!("{name}.toml"));
    fs::write(&cfg, config).unwrap();
    let out = dir.join(name);
    let mut args = vec!["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = gmlab(&args);
    (o.status.code().expect("exited"), out)
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn trinomial_ratio_writes_its_table() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, out) = run(tmp.path(), "ratio", TRINOMIAL, &[]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(out.join("ratio.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows[0], "n,ratio,deviation");
    assert_eq!(rows.len(), 61);
    assert!(csv.starts_with("# system.alphabet = 3"), "{csv}");
    // mu^2(0) / mu^1(0) = (3/9) / (1/3)
    let first: Vec<f64> = rows[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 1.0);
    assert!((first[1] - 1.0).abs() < 1e-15);
}

#[test]
fn rational_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = TRINOMIAL.replace("kind = \"ratio\"\nn_end = 60", "kind = \"pressure\"\nn_max = 40");
    let (c1, a) = run(tmp.path(), "a", &cfg, &[]);
    let (c2, b) = run(tmp.path(), "b", &cfg, &[]);
    assert_eq!((c1, c2), (0, 0));
    let strip = |p: &Path| {
        fs::read_to_string(p.join("pressure.csv"))
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("# output.dir"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn periodic_walk_fails_the_aperiodicity_check() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "example = \"simple_walk\"\n[experiment]\nkind = \"spectral-scan\"\nresolution = 64\n";
    let (code, out) = run(tmp.path(), "scan", cfg, &[]);
    assert_eq!(code, 1);
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("check.aperiodicity.passed = false"), "{manifest}");
    assert!(manifest.contains("run.exit_code = 1"));
}

#[test]
fn oversized_heisenberg_trips_the_guard() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "example = \"heisenberg_symmetric\"\n[experiment]\nkind = \"kesten\"\nk_max = 40\nmax_cells = 2000\n";
    let (code, out) = run(tmp.path(), "kesten", cfg, &["--mode", "float"]);
    assert_eq!(code, 3);
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("last completed step Some("), "{manifest}");
}

#[test]
fn partial_cocycle_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = TRINOMIAL.replace("values = [[-1], [0], [1]]", "values = [[-1], [1]]");
    let path = tmp.path().join("bad.toml");
    fs::write(&path, cfg).unwrap();
    let o = gmlab(&["ratio", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("cocycle not total"), "{err}");
}

#[test]
fn subcommand_must_match_the_configured_kind() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("cfg.toml");
    fs::write(&path, TRINOMIAL).unwrap();
    let o = gmlab(&["mixing", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn manifest_reruns_the_experiment() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, first) = run(tmp.path(), "first", TRINOMIAL, &[]);
    assert_eq!(code, 0);
    let manifest = first.join("manifest.txt");
    let second = tmp.path().join("second");
    let o = gmlab(&["run", "--config", manifest.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let body = |p: &Path| data_rows(&fs::read_to_string(p.join("ratio.csv")).unwrap()).join("\n");
    assert_eq!(body(&first), body(&second));
}

#[test]
fn shipped_oracle_config_agrees() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let tmp = tempfile::tempdir().unwrap();
    let cfg = dir.join("oracle_compare.toml");
    let out = tmp.path().join("oracle");
    let o = gmlab(&["oracle-compare", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("oracle_compare.csv")).unwrap();
    assert!(data_rows(&csv)[1..].iter().all(|r| r.ends_with(",true")));
    assert!(fs::read_dir(&dir).unwrap().count() >= 5);
}

#[test]
fn examples_lists_the_catalogue() {
    let o = gmlab(&["examples"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("heisenberg_asymmetric")));
    assert_eq!(text.lines().count(), 11);
}
