use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn anontx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anontx"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read_to_string(path).expect("golden file exists")
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn golden_outputs_are_reproduced() {
    let cases: [(&str, &[&str]); 5] = [
        ("threshold_179_185.csv", &["threshold", "--n-range", "179:185"]),
        (
            "sweep_w_depolarizing.csv",
            &[
                "sweep",
                "--protocol",
                "w",
                "--channel",
                "depolarizing",
                "--nodes",
                "4,10,50",
                "--q-range",
                "0:1:0.25",
            ],
        ),
        (
            "sweep_ghz_dephasing.csv",
            &[
                "sweep",
                "--protocol",
                "ghz",
                "--channel",
                "dephasing",
                "--nodes",
                "4",
                "--q-range",
                "0.5:1:0.1",
            ],
        ),
        (
            "sweep_w_loss.csv",
            &[
                "sweep",
                "--protocol",
                "w_loss",
                "--channel",
                "depolarizing",
                "--nodes",
                "5",
                "--q",
                "0.5,0.9",
            ],
        ),
        ("relay_6.csv", &["relay"]),
    ];
    for (file, args) in cases {
        let out = anontx(args);
        assert_eq!(out.status.code(), Some(0), "{file}");
        assert_eq!(stdout(&out), golden(file), "{file}");
    }
}

#[test]
fn sweep_output_is_byte_stable() {
    let args = [
        "sweep",
        "--protocol",
        "w",
        "--channel",
        "depolarizing",
        "--nodes",
        "4,5",
        "--mode",
        "both",
        "--q-range",
        "0:1:0.05",
    ];
    let a = anontx(&args);
    let b = anontx(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn exact_and_analytic_sweeps_agree() {
    let out = anontx(&[
        "sweep",
        "--protocol",
        "w",
        "--channel",
        "dephasing",
        "--nodes",
        "6",
        "--q",
        "0.7",
        "--mode",
        "both",
    ]);
    let csv = stdout(&out);
    assert!(csv.contains("protocol,channel,N,q,F_AE,P_success,useful,mode,F_AE_exact,delta\n"));
    let row = &rows(&csv)[0];
    assert!(row[9].parse::<f64>().unwrap() <= 1e-10);
    for protocol in ["ghz", "relay"] {
        let out = anontx(&[
            "sweep",
            "--protocol",
            protocol,
            "--channel",
            "depolarizing",
            "--nodes",
            "5",
            "--q",
            "0.3,0.9",
            "--mode",
            "both",
        ]);
        for row in rows(&stdout(&out)) {
            assert!(row[9].parse::<f64>().unwrap() <= 1e-10, "{protocol}: {row:?}");
        }
    }
}

#[test]
fn threshold_reports_crossover_and_small_networks() {
    let csv = stdout(&anontx(&["threshold", "--nodes", "10"]));
    assert!(csv.contains("# crossover_n: 183\n"));
    let row = &rows(&csv)[0];
    assert!(row[1].parse::<f64>().unwrap() < row[2].parse::<f64>().unwrap());
    assert_eq!(row[3], "true");
}

#[test]
fn relay_at_q_one_is_perfect() {
    let csv = stdout(&anontx(&["relay", "--q", "1"]));
    let rows = rows(&csv);
    assert_eq!(rows.len(), 30);
    assert!(rows.iter().all(|r| (r[4].parse::<f64>().unwrap() - 1.0).abs() < 1e-12));
}

#[test]
fn sampled_runs_abort_at_the_w_rate() {
    let out = anontx(&["run", "--nodes", "5", "--samples", "10000", "--seed", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 10_001);
    let summary: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    let rate = summary["summary"]["abort_rate"].as_f64().unwrap();
    assert!((rate - 0.6).abs() <= 0.015, "{rate}");

    let ghz = stdout(&anontx(&[
        "run",
        "--protocol",
        "ghz",
        "--nodes",
        "5",
        "--samples",
        "500",
    ]));
    let summary: Value = serde_json::from_str(ghz.lines().last().unwrap()).unwrap();
    assert_eq!(summary["summary"]["abort_rate"].as_f64(), Some(0.0));
}

#[test]
fn lost_node_run_and_transcript() {
    let dir = std::env::temp_dir().join(format!("anontx-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let transcript = dir.join("t.jsonl");
    let out = anontx(&[
        "run",
        "--nodes",
        "5",
        "--lost",
        "4",
        "--transcript",
        transcript.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!((v["ae_fidelity"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    let lines = std::fs::read_to_string(&transcript).unwrap();
    let first: Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    for key in ["round", "kind", "actor", "visibility", "payload"] {
        assert!(first.get(key).is_some(), "{key}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_files_and_flags() {
    let dir = std::env::temp_dir().join(format!("anontx-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let good = dir.join("good.cfg");
    std::fs::write(&good, "protocol = ghz\nnodes = 4\nchannel = dephasing:q=0.6\n").unwrap();
    let v: Value = serde_json::from_str(stdout(&anontx(&["run", "--config", good.to_str().unwrap()])).trim()).unwrap();
    assert!((v["ae_fidelity"].as_f64().unwrap() - 0.5008).abs() < 1e-12);
    // flags override the file
    let v: Value = serde_json::from_str(
        stdout(&anontx(&[
            "run",
            "--config",
            good.to_str().unwrap(),
            "--channel",
            "identity",
        ]))
        .trim(),
    )
    .unwrap();
    assert!((v["ae_fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let bad = dir.join("bad.cfg");
    std::fs::write(&bad, "nodes = 4\ncolour = blue\n").unwrap();
    let out = anontx(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn security_reports() {
    for channel in ["identity", "depolarizing:q=0.8"] {
        let out = anontx(&["security", "--nodes", "5", "--adversaries", "4,5", "--channel", channel]);
        assert_eq!(out.status.code(), Some(0));
        let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
        for role in ["sender", "receiver"] {
            assert_eq!(v[role]["certificate"], "state-independence");
            assert!((v[role]["guessing_probability"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
        }
    }
    let out = anontx(&[
        "security",
        "--nodes",
        "5",
        "--adversaries",
        "5",
        "--channel",
        "depolarizing:q=0.8",
        "--override",
        "node3=depolarizing:q=0.82",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let eps = v["epsilon_bound"].as_f64().unwrap();
    assert!((eps - 0.1).abs() < 1e-4);
    assert!(v["sender"]["guessing_probability"].as_f64().unwrap() <= 0.25 + eps);

    let out = anontx(&["security", "--nodes", "8"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["sweep", "--protocol", "w", "--q-range", "1:0:0.1"][..],
        &["sweep", "--protocol", "w", "--channel", "purple"],
        &["sweep", "--protocol", "relay", "--nodes", "3"],
        &["run", "--protocol", "ghz", "--lost", "3"],
        &["threshold", "--nodes", "2"],
        &["frobnicate"],
    ] {
        assert_eq!(anontx(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn out_and_json_flags() {
    let dir = std::env::temp_dir().join(format!("anontx-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("t.json");
    let out = anontx(&[
        "threshold",
        "--nodes",
        "182,183",
        "--json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert_eq!(v["rows"][1]["W_better"], false);
    assert_eq!(v["meta"]["crossover_n"], "183");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn oracle_check_flags_the_printed_loss_formula() {
    let out = anontx(&["oracle-check", "--n-range", "4:5", "--q-range", "0:1:0.5"]);
    let csv = stdout(&out);
    let failing: Vec<String> = rows(&csv)
        .into_iter()
        .filter(|r| r[4] != "pass")
        .map(|r| r[0].clone())
        .collect();
    assert_eq!(failing, vec!["w_loss_printed_closed_vs_dense".to_string()]);
    assert_eq!(out.status.code(), Some(1));
}
