//! End-to-end runs of the `timeblock` binary on small studies.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn timeblock(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_timeblock"))
        .args(["--workers", "2"])
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL: &str = r#"
name = "small"
seed = 3

[instances]
n = 6
count = 2
seed = 10

[ansatz]
base = "qaoa"
k = [3, 6]
p = [1, 2]

[search]
strategy = "random"
angle_sets = 4
orderings = 3

[sampling]
shots = 50
baseline_reps = 20
"#;

fn read_tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(root).unwrap().display().to_string(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn run_writes_logs_summary_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    let out = timeblock(&["run", "small.toml"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));

    let root = dir.path().join("out/small");
    let summary = fs::read_to_string(root.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "instance,base,n,k,p,depth_fraction,two_qubit_gates,best_ar,mean_go_best_ar,baseline_best_ar");
    assert_eq!(lines.len(), 1 + 2 * 2 * 2);
    for line in &lines[1..] {
        let cols: Vec<&str> = line.split(',').collect();
        let (n, k, p): (f64, f64, f64) = (cols[2].parse().unwrap(), cols[3].parse().unwrap(), cols[4].parse().unwrap());
        assert_eq!(cols[5].parse::<f64>().unwrap(), p * k / n);
        if k == n {
            assert_eq!(cols[6].parse::<f64>().unwrap(), p * n * (n - 1.0));
        }
        assert!(!cols[7].is_empty() && !cols[9].is_empty());
    }
    let log = fs::read_to_string(root.join("instance_1/k3_p2.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 12);
    assert!(root.join("instance_0/instance.json").exists());
    assert_eq!(fs::read_to_string(root.join("config.toml")).unwrap(), SMALL);

    let out = timeblock(&["verify", "small.toml"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));

    // A tampered summary is caught.
    fs::write(root.join("summary.csv"), summary.replacen(",0.", ",1.", 1)).unwrap();
    let out = timeblock(&["verify", "small.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn identical_configs_give_identical_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        fs::write(d.path().join("small.toml"), SMALL).unwrap();
    }
    assert!(timeblock(&["run", "small.toml"], a.path()).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_timeblock"))
        .args(["--workers", "1", "run", "small.toml"])
        .current_dir(b.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(read_tree(&a.path().join("out")), read_tree(&b.path().join("out")));
}

#[test]
fn tails_and_spread_tables() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    assert!(timeblock(&["run", "small.toml"], dir.path()).status.success());

    let out = timeblock(&["tails", "small.toml"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let root = dir.path().join("out/small");
    // depth fractions in [1, 2]: k=3 with p=2, k=6 with p=1 and p=2
    for k in [3, 6] {
        let text = fs::read_to_string(root.join(format!("tails_k{k}.csv"))).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "s_tilde,mean_renormalized_ar,stderr");
        assert_eq!(lines.last().unwrap().split(',').next().unwrap(), "50");
    }

    let out = timeblock(&["spread", "small.toml"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(root.join("spread.csv")).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("k,p,depth_fraction,delta_max_over_orderings,delta_max_over_angles\n"));
}

#[test]
fn generate_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let out = timeblock(&["generate", "--n", "8", "--count", "3", "--seed", "5", "--out", "a"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    timeblock(&["generate", "--n", "8", "--count", "3", "--seed", "5", "--out", "b"], dir.path());
    let a = read_tree(&dir.path().join("a"));
    assert_eq!(a.len(), 3);
    assert_eq!(a, read_tree(&dir.path().join("b")));
    assert!(a.iter().all(|(name, bytes)| name.starts_with("sk_n8_i")
        && String::from_utf8_lossy(bytes).contains("c_min")));

    let out = timeblock(&["generate", "--n", "8", "--count", "0", "--out", "empty"], dir.path());
    assert!(out.status.success());
    assert_eq!(fs::read_dir(dir.path().join("empty")).unwrap().count(), 0);
}

#[test]
fn config_files_from_generate() {
    let dir = tempfile::tempdir().unwrap();
    assert!(timeblock(&["generate", "--n", "5", "--count", "2", "--out", "inst"], dir.path()).status.success());
    let cfg = "name = \"files\"\n[instances]\nfiles = [\"inst/sk_n5_i0.json\", \"inst/sk_n5_i1.json\"]\n\
               [ansatz]\nbase = \"qampa\"\nk = [2]\np = [3]\n[search]\nstrategy = \"tpe\"\ntrials = 15\nbatch = 3\n\
               [sampling]\nshots = 40\nbaseline_reps = 5\n";
    fs::write(dir.path().join("files.toml"), cfg).unwrap();
    let out = timeblock(&["run", "files.toml"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let log = fs::read_to_string(dir.path().join("out/files/instance_0/k2_p3.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 15);
    assert!(log.lines().next().unwrap().contains("\"gammas\":[0.1,0.1,0.1]"));
    assert!(timeblock(&["verify", "files.toml"], dir.path()).status.success());
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = SMALL.replace("shots = 50", "shots = 0");
    fs::write(dir.path().join("bad.toml"), bad).unwrap();
    let out = timeblock(&["run", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("sampling.shots"), "{}", stderr(&out));

    let out = timeblock(&["run", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_ground_energy_exits_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    // 27 variables with no stored spectrum: too large to enumerate.
    let mut text = String::from("{\"n\":27,\"seed\":0,\"couplings\":[\n");
    let pairs: Vec<String> =
        (0..27).flat_map(|i| ((i + 1)..27).map(move |j| format!("[{i},{j},1]"))).collect();
    text.push_str(&pairs.join(",\n"));
    text.push_str("\n]}\n");
    fs::write(dir.path().join("big.json"), text).unwrap();
    let out = timeblock(&["attractor", "--instance", "big.json", "--masks", "2", "--shots", "2"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn attractor_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = timeblock(
        &[
            "attractor", "--n", "6", "--masks", "5", "--angle-sets", "3", "--orderings", "2", "--shots", "30", "--p", "2",
            "--out", "att.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("att.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "mask,r0,best_ar");
    assert_eq!(lines.len(), 6);
    assert!(lines.iter().any(|l| l.starts_with("000000,")));
}
