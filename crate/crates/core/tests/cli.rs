use std::path::Path;
use std::process::Command;

fn czwalk(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_czwalk")).args(args).arg("--out").arg(out).output().unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn characterize_writes_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = czwalk(&["characterize", "--alpha", "pi/4,pi/16"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&dir.path().join("characterize.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("alpha,phi0,phi1,p0,p1,valid"));
    let top: Vec<f64> = lines.next().unwrap().split(',').take(5).map(|x| x.parse().unwrap()).collect();
    let pi = std::f64::consts::PI;
    assert!(((top[1].abs()) - pi).abs() < 1e-12 && (top[2] - pi).abs() < 1e-12 && (top[4] - 0.5).abs() < 1e-12);
    let summary: serde_json::Value = serde_json::from_str(&read(&dir.path().join("characterize.summary.json"))).unwrap();
    assert_eq!(summary["experiment"], "characterize");
    assert!(summary["wall_clock_seconds"].is_number());
}

#[test]
fn config_file_runs_are_byte_identical_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "experiment = fig4-histogram\nalpha = pi/16\nepsilon = pi/100\ntrials = 2000\nseed = 17\n").unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = czwalk(&["run", "--config", cfg.to_str().unwrap()], out);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ha = read(&a.join("fig4-histogram.csv"));
    assert!(ha.starts_with("hitting_time,count\n"));
    assert_eq!(ha, read(&b.join("fig4-histogram.csv")));

    let c = dir.path().join("c");
    let o = czwalk(&["run", "--config", cfg.to_str().unwrap(), "--trials", "10"], &c);
    assert!(o.status.success());
    let summary: serde_json::Value = serde_json::from_str(&read(&c.join("fig4-histogram.summary.json"))).unwrap();
    assert_eq!(summary["stats"]["n_trials"], 10);
    assert_eq!(summary["seed"], 17);
}

#[test]
fn threshold_and_expectation_schemas() {
    let dir = tempfile::tempdir().unwrap();
    assert!(czwalk(&["threshold"], dir.path()).status.success());
    let t = read(&dir.path().join("threshold.csv"));
    assert!(t.starts_with("alpha_star,ratio_to_max\n"));
    let ratio: f64 = t.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((0.725..=0.735).contains(&ratio));

    let o = czwalk(&["compare", "--alpha", "0.5", "--trials", "300", "--strategy", "flip-undo,1p1d"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let e = read(&dir.path().join("compare.csv"));
    assert!(e.starts_with("alpha,strategy,mean,std,n999\n"));
    assert_eq!(e.lines().count(), 3);
}

#[test]
fn protocol_writes_a_replayable_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let o = czwalk(&["protocol", "--alpha", "pi/16", "--trials", "500", "--seed", "3"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&dir.path().join("protocol.transcript.txt"));
    let t = czwalk::protocol::read_transcript(text.as_bytes()).unwrap();
    assert_eq!(t.seed, Some(3));
    assert_eq!(t.packet_size, 95);
}

#[test]
fn figure_datasets_run() {
    let dir = tempfile::tempdir().unwrap();
    for (name, extra) in [
        ("fig6-expectation", vec!["--alpha", "pi/8", "--trials", "200"]),
        ("fig7-ancilla-count", vec!["--alpha", "pi/8,0.7"]),
        ("fig8-port-modes", vec!["--alpha", "0.7", "--trials", "200"]),
        ("fig9-maxsteps", vec!["--alpha", "0.2..0.78:5"]),
    ] {
        let mut args = vec!["figures", name];
        args.extend(extra);
        let o = czwalk(&args, dir.path());
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(dir.path().join(format!("{name}.csv")).exists());
    }
    assert!(read(&dir.path().join("fig9-maxsteps.csv")).starts_with("alpha,p1,p2,max_steps\n"));
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(czwalk(&["figures", "fig5"], dir.path()).status.code(), Some(2));
    assert_eq!(czwalk(&["simulate", "--alpha", "1.2"], dir.path()).status.code(), Some(2));
    assert_eq!(czwalk(&["simulate", "--epsilon", "nope"], dir.path()).status.code(), Some(2));
    assert_eq!(czwalk(&["protocol", "--alpha", "0.7", "--strategy", "2p2d"], dir.path()).status.code(), Some(2));
    let file = dir.path().join("not-a-dir");
    std::fs::write(&file, "").unwrap();
    assert_eq!(czwalk(&["threshold"], &file).status.code(), Some(3));
}
