use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, sub: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_halfline"))
        .arg(sub)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .env_remove("HALFLINE_OUT_DIR")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

/// Data rows of an output file, past the metadata block and header.
fn data_rows(path: &Path) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(str::to_string).collect()
}

const SIM: &str = r#"
[run]
seed = 7

[model]
initial = "one_shock"
m1 = 2
m2 = 2
alpha = 0.4

[simulate]
times = [5.0, 10.0]
replicas = 200
observables = ["f", "f_exited"]
"#;

#[test]
fn zero_replicas_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "simulate", &SIM.replace("replicas = 200", "replicas = 0"), &[]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "simulate", &format!("{SIM}\nbogus = 1\n"), &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_config_file_is_a_config_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_halfline"))
        .args(["exact", "--config", "/nonexistent/halfline.toml"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(a.path(), "simulate", SIM, &["--workers", "1"])), 0);
    assert_eq!(code(&run(b.path(), "simulate", SIM, &["--workers", "2"])), 0);
    let ra = data_rows(&a.path().join("out/simulate_records.csv"));
    let rb = data_rows(&b.path().join("out/simulate_records.csv"));
    assert_eq!(ra.len(), 200 * 2 * 2);
    assert_eq!(ra, rb);

    let c = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(c.path(), "simulate", SIM, &["--seed", "8"])), 0);
    assert_ne!(ra, data_rows(&c.path().join("out/simulate_records.csv")));
}

#[test]
fn output_carries_metadata_then_header() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), "simulate", SIM, &[])), 0);
    let text = fs::read_to_string(dir.path().join("out/simulate_summary.csv")).unwrap();
    assert!(text.contains("# seed: 7"));
    assert!(text.contains("#   initial = \"one_shock\""));
    let first = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(first, "t,observable,value,count,frequency");
    // frequencies of each (t, observable) sum to one
    let mut total = std::collections::BTreeMap::<(String, String), f64>::new();
    for row in data_rows(&dir.path().join("out/simulate_summary.csv")) {
        let f: Vec<&str> = row.split(',').collect();
        *total.entry((f[0].into(), f[1].into())).or_default() += f[4].parse::<f64>().unwrap();
    }
    assert_eq!(total.len(), 4);
    for v in total.values() {
        assert!((v - 1.0).abs() < 1e-12);
    }
}

#[test]
fn exact_one_shock_exist() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[exact]\nfamily = \"one_shock_exist\"\nalpha = \"0.4\"\nm1 = 1\nm2 = 1\n";
    let o = run(dir.path(), "exact", cfg, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&dir.path().join("out/exact.csv"));
    assert_eq!(rows.len(), 1);
    let f: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(f[5], "bernoulli");
    assert_eq!(f[6], "false");
    assert_eq!(f[7], "81/125");
    assert!((f[8].parse::<f64>().unwrap() - 0.648).abs() < 1e-12);
}

#[test]
fn exact_height_support_sums_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[exact]\nfamily = \"one_shock_height\"\nalpha = \"3/4\"\nm1 = 2\nm2 = 2\n";
    assert_eq!(code(&run(dir.path(), "exact", cfg, &[])), 0);
    let rows = data_rows(&dir.path().join("out/exact.csv"));
    assert_eq!(rows.len(), 4);
    let sum: f64 = rows.iter().map(|r| r.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum();
    assert!((sum - 1.0).abs() < 1e-12);
    assert!(rows.iter().all(|r| r.contains(",mpa,true,")));
}

#[test]
fn exact_dehp_word() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[exact]\nfamily = \"dehp\"\nalpha = \"3/4\"\nword = \"100\"\n";
    assert_eq!(code(&run(dir.path(), "exact", cfg, &[])), 0);
    let rows = data_rows(&dir.path().join("out/exact.csv"));
    assert_eq!(rows[0], "100,3/4,mpa,true,Z_0,7/144,0.04861111111111111");
    assert!(rows[1].starts_with("100,3/4,mpa,true,Z_1,1/16,"));
    assert!(rows.last().unwrap().contains(",probability,"));
}

#[test]
fn rate_outside_unit_interval_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[exact]\nfamily = \"one_shock_exist\"\nalpha = 1.2\nm1 = 1\nm2 = 1\n";
    assert_eq!(code(&run(dir.path(), "exact", cfg, &[])), 2);
}

#[test]
fn enumeration_cap_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[exact]\nfamily = \"one_shock_exist\"\nalpha = \"3/4\"\nm1 = 10\nm2 = 10\n";
    assert_eq!(code(&run(dir.path(), "exact", cfg, &[])), 2);
}

#[test]
fn sweep_covers_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[sweep]\nfamily = \"two_shock_exist\"\nalpha = [\"0.3\", \"3/4\"]\np = [1, 2]\nq = [1]\n";
    let o = run(dir.path(), "sweep", cfg, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&dir.path().join("out/sweep.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("two_shock_exist,1,1,,3/10,bernoulli,false,"));
    assert!(rows[3].starts_with("two_shock_exist,2,1,,3/4,mpa,true,"));
}

#[test]
fn verify_dehp_oracle_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "verify", "[verify]\nsuite = \"dehp-oracle\"\n", &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/verify_dehp-oracle.json")).unwrap())
            .unwrap();
    assert_eq!(json["report"]["pass"], true);
    assert_eq!(json["report"]["criteria"].as_array().unwrap().len(), 4);
    assert_eq!(json["meta"]["command"], "verify");
}

#[test]
fn unknown_suite_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), "verify", "[verify]\nsuite = \"nope\"\n", &[])), 2);
}

#[test]
fn verification_failure_exits_one() {
    // At alpha = 3/4 the t = 100 frequencies are still far from their limit.
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[verify]\nsuite = \"laws42\"\nreplica_scale = 0.1\n";
    let o = run(dir.path(), "verify", cfg, &[]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stdout));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/verify_laws42.json")).unwrap())
            .unwrap();
    assert_eq!(json["report"]["pass"], false);
}

#[test]
fn hecke_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        "[hecke]\nn = 3\nalpha = [0.3, 0.7]\nt = [0.5, 2.0]\nwords = [[], [0], [1, 0, 2], [2, 1, 0, 0]]\n";
    let o = run(dir.path(), "hecke-check", cfg, &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(data_rows(&dir.path().join("out/hecke_check.csv")).len(), 16);
}

#[test]
fn shipped_configs_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for (sub, name) in [
        ("exact", "exact_one_shock.toml"),
        ("exact", "exact_dehp.toml"),
        ("sweep", "sweep_two_shock.toml"),
        ("hecke-check", "hecke_check.toml"),
        ("simulate", "simulate_step.toml"),
        ("simulate", "simulate_kpz.toml"),
        ("simulate", "simulate_one_shock.toml"),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let text = fs::read_to_string(root.join(name)).unwrap();
        let o = run(dir.path(), sub, &text, &[]);
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
    // The verification config parses; running it is the acceptance target's job.
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(root.join("verify_laws.toml")).unwrap();
    let o = run(dir.path(), "verify", &text.replace("laws42", "unknown"), &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown"));
}
