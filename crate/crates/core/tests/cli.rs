use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use noisecorr::cli::read_record;

const BIN: &str = env!("CARGO_BIN_EXE_noisecorr");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, out: &str) -> String {
    let text = format!(
        r#"seed = 21
output_dir = "{out}"

[layout]
sets = [[0], [1], [2], [3]]

[noise.random]
n_qubits = 4
error_range = [0.005, 0.02]
correlated_pairs = [[1, 2]]
correlated_strength = 0.02

[spam]
prep_flip = [0.01, 0.02, 0.01, 0.02]
readout_flip = [0.02, 0.01, 0.03, 0.02]

[schedule]
lengths = [1, 2, 4, 8, 16]
sequences_per_length = 6
shots = 1000

[grf]
cliques = [[0, 1], [1, 2], [2, 3]]

[bootstrap]
n_reps = 50

[chain_scaling]
lengths = [4, 8, 16]
instances = 3
shots_per_marginal = 2000
mc_samples = 2000
"#
    );
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn full_pipeline_and_bitwise_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let cfg = write_config(dir, "run.toml", "out");
    for cmd in [vec!["simulate"], vec!["reconstruct", "out/record.json"], vec!["analyze", "out/record.json"],
                vec!["grf", "out/record.json"], vec!["bootstrap", "out/record.json"], vec!["chain-scaling"]] {
        let mut args = vec!["--config", cfg.as_str()];
        args.extend(cmd.iter().copied());
        let o = run(dir, &args);
        assert!(o.status.success(), "{cmd:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let out = dir.join("out");
    for f in ["record.json", "truth_eigenvalues.json", "reconstruction.json", "reconstruction.csv", "correlation.csv",
              "covariance.csv", "mutual_information.csv", "fidelity.csv", "analysis.json", "grf.json", "grf_model.json",
              "bootstrap_summary.json", "bootstrap_ci.csv", "bootstrap_jsd.json", "chain_scaling.json", "chain_scaling.csv"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let csv = fs::read_to_string(out.join("reconstruction.csv")).unwrap();
    assert!(csv.starts_with("# command=reconstruct config_hash="));
    assert!(csv.lines().nth(1).unwrap() == "index,bits,eigenvalue,A,observed_rate");

    // rerun from the embedded seed into a second directory: identical bytes
    let cfg2 = write_config(dir, "rerun.toml", "again");
    let o = run(dir, &["--config", &cfg2, "simulate"]);
    assert!(o.status.success());
    let o = run(dir, &["--config", &cfg2, "bootstrap", "again/record.json"]);
    assert!(o.status.success());
    for f in ["record.json", "bootstrap_summary.json", "bootstrap_jsd.json"] {
        let (a, b) = (fs::read_to_string(out.join(f)).unwrap(), fs::read_to_string(dir.join("again").join(f)).unwrap());
        assert!(a == b, "{f} differs between reruns");
    }
    // a different seed changes the data
    let o = run(dir, &["--config", &cfg2, "--seed", "22", "--output-dir", "other", "simulate"]);
    assert!(o.status.success());
    assert!(fs::read(out.join("record.json")).unwrap() != fs::read(dir.join("other/record.json")).unwrap());
}

#[test]
fn json_config_is_equivalent() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let toml_path = write_config(dir, "run.toml", "a");
    let cfg = noisecorr::cli::RunConfig::load(Path::new(&toml_path)).unwrap();
    let json = serde_json::to_string(&noisecorr::cli::RunConfig { output_dir: "b".into(), ..cfg.clone() }).unwrap();
    fs::write(dir.join("run.json"), json).unwrap();
    assert!(run(dir, &["--config", &toml_path, "simulate"]).status.success());
    assert!(run(dir, &["--config", "run.json", "simulate"]).status.success());
    let a = read_record(&dir.join("a/record.json")).unwrap();
    let b = read_record(&dir.join("b/record.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn ingest_round_trips_simulated_records() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let cfg = write_config(dir, "run.toml", "out");
    assert!(run(dir, &["--config", &cfg, "simulate"]).status.success());
    let original = read_record(&dir.join("out/record.json")).unwrap();

    let o = run(dir, &["--config", &cfg, "--output-dir", "native", "ingest", "--format", "native", "out/record.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_record(&dir.join("native/record.json")).unwrap(), original);

    // export as device counts with qubit 0 first, then ingest back
    let mut sequences = Vec::new();
    for (m, tables) in original.data() {
        for t in tables {
            let counts: serde_json::Map<String, serde_json::Value> =
                t.iter().map(|(o, c)| (o.to_string().chars().rev().collect(), (*c).into())).collect();
            sequences.push(serde_json::json!({"length": m, "counts": counts}));
        }
    }
    let export = serde_json::json!({"n_qubits": 4, "shots": original.shots(), "bit_order": "qubit0_first",
                                    "layout": [[0], [1], [2], [3]], "sequences": sequences});
    fs::write(dir.join("device.json"), export.to_string()).unwrap();
    let o = run(dir, &["--config", &cfg, "--output-dir", "dev", "ingest", "device.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let back = read_record(&dir.join("dev/record.json")).unwrap();
    assert_eq!(back.data(), original.data());
    let log = fs::read_to_string(dir.join("dev/ingest_log.json")).unwrap();
    assert!(log.contains("reversed"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let cfg = write_config(dir, "run.toml", "out");

    fs::write(dir.join("bad.toml"), "seed = 1\nunknown_key = 3\n").unwrap();
    assert_eq!(run(dir, &["--config", "bad.toml", "simulate"]).status.code(), Some(2));
    assert_eq!(run(dir, &["--config", "missing.toml", "simulate"]).status.code(), Some(2));
    // simulate without the sections it needs
    fs::write(dir.join("empty.toml"), "seed = 1\n").unwrap();
    assert_eq!(run(dir, &["--config", "empty.toml", "simulate"]).status.code(), Some(2));

    fs::write(dir.join("broken.json"), r#"{"layout": [[0]], "n_qubits": 1, "shots": 10, "data": {"1": [{"0": 3}]}}"#).unwrap();
    let o = run(dir, &["--config", &cfg, "reconstruct", "broken.json"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("m=1 seq=0"));
    fs::write(dir.join("nolength.json"), r#"{"sequences": [{"counts": {"0": 1}}]}"#).unwrap();
    assert_eq!(run(dir, &["--config", &cfg, "ingest", "nolength.json"]).status.code(), Some(3));
    assert_eq!(run(dir, &["--config", &cfg, "reconstruct", "absent.json"]).status.code(), Some(3));
}
