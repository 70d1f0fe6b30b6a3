use std::path::Path;
use std::process::{Command, Output};

fn eventperm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eventperm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_prices(path: &Path, n: usize) {
    let mut s = String::from("date,adj_close\n");
    let start = chrono::NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let mut p = 100.0;
    for i in 0..n {
        let d = start + chrono::Duration::days(i as i64);
        p *= 1.0 + 0.01 * ((i * 7919 % 13) as f64 - 6.0) / 6.0;
        s.push_str(&format!("{d},{p}\n"));
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn simulate_shows_variance_jump_at_event() {
    let out = eventperm(&["simulate", "--model", "a", "--jump-c", "3.5", "--seed", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("minute_index,return,sigma2"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 390);
    let jump = rows[195][2] - rows[194][2];
    assert!((jump - 7.0).abs() < 0.5, "jump {jump}");
}

#[test]
fn simulate_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("day.csv");
    let out = eventperm(&["simulate", "--model", "b", "--seed", "1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(path).unwrap().lines().count(), 391);
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(eventperm(&["simulate", "--bogus"]).status.code(), Some(1));
    assert_eq!(eventperm(&[]).status.code(), Some(1));
}

#[test]
fn help_lists_flags() {
    let out = eventperm(&["power", "--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for flag in ["--jump-c", "--trials", "--permutations", "--seed", "--out"] {
        assert!(text.contains(flag), "{flag}");
    }
}

#[test]
fn empty_jump_list_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = eventperm(&["power", "--jump-c", "", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn window_too_large_fails() {
    let dir = tempfile::tempdir().unwrap();
    let prices = dir.path().join("p.csv");
    write_prices(&prices, 20);
    let out = eventperm(&[
        "test", "--input", prices.to_str().unwrap(), "--event-date", "2020-01-10", "--k", "15",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("error"));
}

#[test]
fn test_machine_line() {
    let dir = tempfile::tempdir().unwrap();
    let prices = dir.path().join("p.csv");
    write_prices(&prices, 40);
    let out = eventperm(&[
        "test", "--input", prices.to_str().unwrap(), "--event-date", "2020-01-20", "--k", "8", "--machine",
    ]);
    assert!(out.status.success());
    let line = String::from_utf8(out.stdout).unwrap();
    let keys: Vec<&str> = line.trim().split(' ').map(|kv| kv.split('=').next().unwrap()).collect();
    assert_eq!(
        keys,
        [
            "event_date", "k1", "k2", "statistic", "critical_value", "m_total", "m_plus", "m_zero",
            "phat", "phi", "p_value", "randomized", "decision"
        ]
    );
    assert!(line.contains("k1=8 k2=8"));
}

#[test]
fn bad_price_file_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let prices = dir.path().join("p.csv");
    std::fs::write(&prices, "date,adj_close\n2020-01-01,100\n2020-01-02,abc\n").unwrap();
    let out = eventperm(&["test", "--input", prices.to_str().unwrap(), "--event-date", "2020-01-02", "--k", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn small_size_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = eventperm(&[
        "size", "--trials", "200", "--model", "a", "--driver", "brownian", "--quiet", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("size.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("model,driver,k,c,test,rejection_rate,trials,standard_error")
    );
    let perm: Vec<f64> = lines
        .filter(|l| l.split(',').nth(4) == Some("perm"))
        .map(|l| l.split(',').nth(5).unwrap().parse().unwrap())
        .collect();
    assert_eq!(perm.len(), 4);
    for r in perm {
        assert!((0.01..=0.10).contains(&r), "{r}");
    }
    assert!(dir.path().join("size.txt").exists());
}
