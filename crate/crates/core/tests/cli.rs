// Drives the `sfpa` binary: exit codes, output files, determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const DEFAULT: &str = r#"
n = 4
m = 3
seed = 11
utility = { kind = "additive_synergy", alpha = 0.3 }

[sweep]
strategies = 20
"#;

fn sfpa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfpa"))
        .args(args)
        .env("SFPA_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn scenario(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn solve_writes_csvs_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let scn = scenario(&dir, "a.toml", DEFAULT);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = sfpa(&["solve", s(&scn), "--out", s(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for file in ["summary.csv", "strategies.csv", "strategy1.csv", "strategy2.csv"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    let summary = fs::read_to_string(a.join("summary.csv")).unwrap();
    assert!(summary.starts_with("status,iterations,max_regret\n"));
    let strategies = fs::read_to_string(a.join("strategies.csv")).unwrap();
    assert!(strategies.starts_with("bidder,x1,x2,b1,b2,regret\n"));
    assert_eq!(strategies.lines().count(), 1 + 2 * 9);
}

#[test]
fn solved_strategies_feed_back_into_simulate() {
    let dir = TempDir::new().unwrap();
    let scn = scenario(&dir, "a.toml", DEFAULT);
    let solved = dir.path().join("solved");
    assert_eq!(sfpa(&["solve", s(&scn), "--out", s(&solved)]).status.code(), Some(0));
    let s1 = solved.join("strategy1.csv");
    let s2 = solved.join("strategy2.csv");
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|k| {
            let out = dir.path().join(format!("sim{k}"));
            let o = sfpa(&["simulate", s(&scn), "--draws", "20000", "--s1", s(&s1), "--s2", s(&s2), "--out", s(&out)]);
            assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
            [fs::read(out.join("outcomes.csv")).unwrap(), fs::read(out.join("stats.csv")).unwrap()].concat()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    let text = String::from_utf8(runs[0].clone()).unwrap();
    assert!(text.starts_with("bidder,both,only1,only2,neither\n"));

    // without strategy files the scenario is solved first
    let o = sfpa(&["simulate", s(&scn), "--draws", "1000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("# stats.csv"));
}

#[test]
fn verify_passes_on_default_and_renders_case_table() {
    let dir = TempDir::new().unwrap();
    let scn = scenario(&dir, "a.toml", DEFAULT);
    let out = dir.path().join("v");
    let o = sfpa(&["verify", s(&scn), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = fs::read_to_string(out.join("table1.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "category,d_case,h_case,h,d,h_minus_d,count");
    // category 1: H = D = 0, 1/2, 1 on the diagonal
    assert!(rows.iter().any(|r| r.starts_with("1,1,1,0,0,0,")));
    assert!(rows.iter().any(|r| r.starts_with("1,3,3,1,1,0,")));
    assert!(rows.iter().any(|r| r.starts_with("2,1,3,1/2,0,1/2,")));
    assert!(rows.iter().any(|r| r.starts_with("1,2,2,undefined")));
    let props = fs::read_to_string(out.join("properties.csv")).unwrap();
    assert_eq!(props.lines().filter(|l| l.ends_with(",pass")).count(), 3);
    assert!(fs::read_to_string(out.join("table1.txt")).unwrap().contains('⊘'));
}

#[test]
fn verify_exits_2_on_falling_synergy() {
    let dir = TempDir::new().unwrap();
    let scn = scenario(
        &dir,
        "bad.toml",
        r#"
n = 4
m = 5
seed = 0
utility = { kind = "polynomial", coefficients = [[0.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, -0.75]] }
[sweep]
strategies = 50
"#,
    );
    let out = dir.path().join("v");
    let o = sfpa(&["verify", s(&scn), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let witnesses = fs::read_to_string(out.join("witnesses.csv")).unwrap();
    assert!(witnesses.lines().skip(1).any(|l| l.starts_with("WSC,")), "{witnesses}");
}

#[test]
fn config_errors_exit_1_and_name_the_field() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("n = 0\nm = 3\nutility = { kind = \"multiplicative\" }\n", "`n`"),
        ("n = 4\nm = 3\nu_bar = 0.3\nutility = { kind = \"multiplicative\" }\n", "`u_bar`"),
        ("n = 4\nm = 3\nu_bar = 5.0\nutility = { kind = \"multiplicative\" }\n", "`u_bar`"),
        ("n = 4\nm = 3\nutility = { kind = \"cubic\" }\n", "cubic"),
        ("n = 4\nm = 3\n", "utility"),
    ];
    for (k, (text, needle)) in cases.iter().enumerate() {
        let scn = scenario(&dir, &format!("c{k}.toml"), text);
        let o = sfpa(&["solve", s(&scn)]);
        assert_eq!(o.status.code(), Some(1), "{text}");
        assert!(stderr(&o).contains(needle), "{text}: {}", stderr(&o));
    }
    assert_eq!(sfpa(&["solve", "/nonexistent/scenario.toml"]).status.code(), Some(1));
    assert_eq!(sfpa(&["solve"]).status.code(), Some(1));
    assert_eq!(sfpa(&["bogus"]).status.code(), Some(1));
    assert_eq!(sfpa(&["--help"]).status.code(), Some(0));
}

#[test]
fn probe_reports_tie_probabilities() {
    let dir = TempDir::new().unwrap();
    let scn = scenario(&dir, "a.toml", DEFAULT);
    let o = sfpa(&["probe", s(&scn), "--b1", "0", "--b2", "0", "--x1", "0.5", "--x2", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("b1,b2,q1,q2,q3,p1,p2,p3,V"));
    let v: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(&v[..8], &[0.0, 0.0, 0.5, 0.5, 0.25, 0.25, 0.25, 0.25]);
    // V = 0.5*0.5 + 0.5*0.5 + 0.25*0.3
    assert!((v[8] - 0.575).abs() < 1e-12);

    let o = sfpa(&["probe", s(&scn), "--b1", "1/4", "--b2", "0.5", "--x1", "1", "--x2", "1", "--opp-b1", "1/4", "--opp-b2", "1/4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let v: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(&v[2..5], &[0.5, 1.0, 0.5]);

    let o = sfpa(&["probe", s(&scn), "--b1", "0.3", "--b2", "0", "--x1", "0.5", "--x2", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn enumerate_lists_equilibria_of_a_tiny_game() {
    let dir = TempDir::new().unwrap();
    let scn = scenario(&dir, "tiny.toml", "n = 1\nm = 1\nutility = { kind = \"multiplicative\" }\n");
    let o = sfpa(&["enumerate", s(&scn)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("# enumeration.csv\nequilibria,strategies_searched,truncated\n"));
    assert!(text.contains(",false\n"));
}
