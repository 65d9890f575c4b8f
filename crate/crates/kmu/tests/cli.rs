use std::fs;
use std::process::{Command, Output};

fn kmu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kmu"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn gen_then_run_each_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("a.csv");
    stdout(&kmu(&["gen", "grid-a", "--out", data.to_str().unwrap()]));
    assert_eq!(fs::read_to_string(&data).unwrap().lines().count(), 1296);

    let mut sse = Vec::new();
    for algo in ["km", "kmpp", "kmu", "kms"] {
        let text = stdout(&kmu(&[
            "run",
            "--algo",
            algo,
            "--k",
            "36",
            "--seed",
            "4",
            "--input",
            data.to_str().unwrap(),
        ]));
        let mut lines = text.lines();
        assert!(lines
            .next()
            .unwrap()
            .starts_with("dataset,algorithm,k,run,seed,sse"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[1], algo);
        sse.push(row[5].parse::<f64>().unwrap());
    }
    // kmu and kms refine the same k-means++ result
    assert!(sse[2] <= sse[1] && sse[3] <= sse[2]);
}

#[test]
fn run_writes_trace_and_centers() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("b.csv");
    let trace = dir.path().join("t.jsonl");
    let centers = dir.path().join("c.csv");
    let report = dir.path().join("r.csv");
    stdout(&kmu(&[
        "gen",
        "flat-b",
        "--n-side",
        "12",
        "--out",
        data.to_str().unwrap(),
    ]));
    stdout(&kmu(&[
        "run",
        "--algo",
        "kms",
        "--k",
        "9",
        "--input",
        data.to_str().unwrap(),
        "--retries",
        "1",
        "--trace",
        trace.to_str().unwrap(),
        "--centers",
        centers.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]));
    let lines = fs::read_to_string(&trace).unwrap();
    assert!(lines.lines().count() >= 2);
    for line in lines.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("lambda").is_some() && v.get("accepted").is_some());
    }
    assert_eq!(fs::read_to_string(&centers).unwrap().lines().count(), 9);
    let reports = kmu::report::read_reports(&report).unwrap();
    assert_eq!(reports[0].jumps_attempted, lines.lines().count());
}

#[test]
fn bench_and_report_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("plan.toml");
    fs::write(&cfg, "k = [9, 16]\nruns = 2\nseed = 3\n[params]\nrestarts = 2\n[dataset]\nkind = \"flat-b\"\nn_side = 12\n").unwrap();
    let out = dir.path().join("out");
    kmu(&[
        "bench",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--traces",
    ])
    .status
    .success()
    .then_some(())
    .unwrap();
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.starts_with("k,algo,mean_impr,min_impr,max_impr,overhead_pct,frac_improved\n"));
    assert_eq!(summary.lines().count(), 5);
    let rebuilt = stdout(&kmu(&[
        "report",
        "--runs",
        out.join("runs.csv").to_str().unwrap(),
    ]));
    assert_eq!(rebuilt, summary);
    assert!(out.join("traces.jsonl").exists());
}

#[test]
fn analyze_prints_closed_forms() {
    assert_eq!(
        stdout(&kmu(&["analyze", "pcorr", "--g", "2"])),
        "g,pcorr\n2,8e-1\n"
    );
    let table = stdout(&kmu(&["analyze", "pcorr", "--g", "2", "--through", "24"]));
    assert_eq!(table.lines().count(), 24);
    let last: f64 = table
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(last < 1e-4);
    assert!(stdout(&kmu(&["analyze", "f-ratio"])).ends_with(",4\n"));
    let pf: f64 = stdout(&kmu(&[
        "analyze", "pf", "--i", "5", "--g", "10", "--eta", "10",
    ]))
    .trim()
    .parse()
    .unwrap();
    assert!((pf - 1.0 / 1201.0).abs() < 1e-15);
}

#[test]
fn usage_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    for args in [
        vec!["frobnicate"],
        vec!["run", "--algo", "kmx", "--k", "3", "--input", "x.csv"],
        vec![
            "run",
            "--algo",
            "kmpp",
            "--k",
            "3",
            "--input",
            missing.to_str().unwrap(),
        ],
        vec!["analyze", "pcorr", "--g", "0"],
        vec!["analyze", "pf", "--i", "3", "--g", "2", "--eta", "1"],
        vec!["gen", "oned", "--g", "3"],
    ] {
        let out = kmu(&args);
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn run_rejects_k_larger_than_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("tiny.csv");
    fs::write(&data, "0,0\n1,1\n").unwrap();
    let out = kmu(&[
        "run",
        "--algo",
        "kmpp",
        "--k",
        "5",
        "--input",
        data.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
}
