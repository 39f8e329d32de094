use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SUBCOMMANDS: [&str; 8] =
    ["truncate-sweep", "stationary", "interchange", "fte", "ctmc", "counterexample", "lindley", "ifs"];

fn chaintrunc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaintrunc")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_periodic(dir: &Path) -> String {
    let path = dir.join("periodic.mc");
    fs::write(&path, "mc-matrix v1 N=2\n0 1 1\n1 0 1\n").unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn help_and_version_exit_zero() {
    for sub in SUBCOMMANDS {
        let o = chaintrunc(&[sub, "--help"]);
        assert_eq!(code(&o), 0, "{sub} --help");
        assert!(String::from_utf8_lossy(&o.stdout).contains("Usage"));
        let o = chaintrunc(&[sub, "--version"]);
        assert_eq!(code(&o), 0, "{sub} --version");
        assert!(String::from_utf8_lossy(&o.stdout).contains(env!("CARGO_PKG_VERSION")));
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&chaintrunc(&["bogus"])), 1);
    assert_eq!(code(&chaintrunc(&["truncate-sweep", "--kernel", "birth-death:p=2"])), 1);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = chaintrunc(&[
        "interchange",
        "--kernel",
        "birth-death:p=1/3",
        "--n-list",
        "10,20",
        "--n-ref",
        "20",
        "--out",
        out,
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("n-ref"));
    let o = chaintrunc(&["lindley", "--samples", "50", "--out", out]);
    assert_eq!(code(&o), 1);
}

#[test]
fn numerical_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write_periodic(dir.path());
    let out = dir.path().join("out");
    let o = chaintrunc(&[
        "stationary",
        "--matrix-file",
        &matrix,
        "--method",
        "power",
        "--max-steps",
        "1000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let o = chaintrunc(&["stationary", "--matrix-file", &matrix, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let dist = fs::read_to_string(out.join("stationary.dist")).unwrap();
    assert!(dist.starts_with("# chaintrunc "));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "# sweep\nkernel = birth-death:p=0.2\nn-list = 5,10\n").unwrap();
    let out = dir.path().join("out");
    let o = chaintrunc(&[
        "truncate-sweep",
        "--config",
        conf.to_str().unwrap(),
        "--n-list",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("truncate-sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("# chaintrunc 0.1.0 truncate-sweep kernel=birth-death:p=0.2 n-list=7 scheme=redirect:0 seed=0")
    );
    assert_eq!(lines.next(), Some("n,scheme,max_lost_mass"));
    assert!(lines.next().unwrap().starts_with("7,redirect:0,"));
    assert!(out.join("truncated_n7.mc").exists());
    assert!(!out.join("truncated_n5.mc").exists());
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "horizon = 3\n").unwrap();
    let o = chaintrunc(&["truncate-sweep", "--config", conf.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "ifs",
        "--a-law",
        "uniform:lo=0,hi=1",
        "--b-law",
        "constant:c=1",
        "--k-list",
        "1,4,8",
        "--samples",
        "500",
        "--seed",
        "9",
    ];
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(i.to_string());
        let o = Command::new(env!("CARGO_BIN_EXE_chaintrunc"))
            .args(args)
            .args(["--threads", threads, "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(fs::read(out.join("ifs.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(String::from_utf8_lossy(&outputs[0]).contains("seed=9"));
}
