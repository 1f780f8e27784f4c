use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn warriors() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/warriors")
}

fn classic(name: &str) -> PathBuf {
    warriors().join(format!("{name}.red"))
}

fn drq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drq")).args(args).output().expect("spawn drq")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn rows(csv_text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn parse_prints_canonical_form() {
    let o = drq(&["parse", s(&classic("imp"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("MOV.I"));
}

#[test]
fn parse_error_reports_line_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.red");
    std::fs::write(&bad, "MOV 0, 1\nFOO 1, 2\n").unwrap();
    let o = drq(&["parse", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.red:2:"), "{}", stderr(&o));

    let o = drq(&["parse", "--json", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["ok"], false);
    assert_eq!(v["line"], 2);
}

#[test]
fn parse_json_has_digest() {
    let o = drq(&["parse", "--json", s(&classic("dwarf"))]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["ok"], true);
    assert_eq!(v["digest"].as_str().unwrap().len(), 64);
}

#[test]
fn imp_mirror_match_sums_to_two_per_seed() {
    let imp = classic("imp");
    let o = drq(&["battle", s(&imp), s(&imp), "--preset", "desk", "--seeds", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = rows(&stdout(&o));
    for seed in ["0", "1", "2"] {
        let total: f64 = table.iter().filter(|r| r[0] == seed).map(|r| r[3].parse::<f64>().unwrap()).sum();
        assert!((total - 2.0).abs() < 1e-9, "seed {seed}: {total}");
    }
    assert_eq!(table.iter().filter(|r| r[0] == "mean").count(), 2);
}

#[test]
fn battle_is_reproducible() {
    let (a, b) = (classic("dwarf"), classic("scanner"));
    let args = ["battle", s(&a), s(&b), "--preset", "desk", "--seeds", "1", "--rng", "7"];
    let a = drq(&args);
    let b = drq(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn battle_render_writes_frames() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("frames");
    let spec = format!("every=100,out={},width=40,scale=1", s(&frames));
    let imp = classic("imp");
    let o =
        drq(&["battle", s(&imp), s(&imp), "--preset", "desk", "--cycles", "1000", "--seeds", "1", "--render", &spec]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ppm = std::fs::read_dir(&frames)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "ppm"))
        .count();
    // Two imps never die, so the battle runs its full 1000 cycles.
    assert_eq!(ppm, 10);
    assert!(frames.join("legend.csv").exists());
    assert!(frames.join("frame_0000100.txt").exists());
}

#[test]
fn battle_that_cannot_be_placed_exits_3() {
    let o = drq(&[
        "battle",
        s(&classic("dwarf")),
        s(&classic("dwarf")),
        "--core-size",
        "30",
        "--max-length",
        "20",
        "--min-distance",
        "20",
        "--seeds",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

fn drq_run(out: &Path, rounds: &str, iters: &str, extra: &[&str]) -> Output {
    let init = classic("dwarf");
    let mut args = vec![
        "drq",
        "--init",
        s(&init),
        "--out",
        s(out),
        "--rounds",
        rounds,
        "--iters",
        iters,
        "--batch-size",
        "8",
        "--selection-candidates",
        "2",
        "--seeds",
        "2",
        "--preset",
        "desk",
        "--cycles",
        "800",
    ];
    args.extend_from_slice(extra);
    drq(&args)
}

#[test]
fn interrupted_run_resumes_to_the_same_lineage() {
    let dir = tempfile::tempdir().unwrap();
    let whole = dir.path().join("whole");
    let split = dir.path().join("split");
    let o = drq_run(&whole, "2", "32", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(drq_run(&split, "1", "32", &[]).status.success());
    let o = drq_run(&split, "2", "32", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("resuming"));
    let index = |d: &Path| std::fs::read(d.join("lineage.index")).unwrap();
    assert_eq!(index(&whole), index(&split));
    for t in 0..=2 {
        let champ = |d: &Path| std::fs::read(d.join(format!("round_{t}/champion.red"))).unwrap();
        assert_eq!(champ(&whole), champ(&split));
    }
}

#[test]
fn zero_iterations_keep_the_initial_program() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = drq_run(&out, "2", "0", &["--init-with-champions"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = rows(&stdout(&o));
    assert_eq!(table.len(), 3);
    assert!(table.iter().all(|r| r[2] == table[0][2]), "{table:?}");
}

fn corpus_dir(root: &Path, names: &[&str]) -> PathBuf {
    let dir = root.join("corpus");
    std::fs::create_dir_all(&dir).unwrap();
    for n in names {
        std::fs::copy(classic(n), dir.join(format!("{n}.red"))).unwrap();
    }
    dir
}

#[test]
fn eval_reports_generality_and_skips() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus_dir(dir.path(), &["imp", "dwarf", "stone"]);
    std::fs::write(corpus.join("broken.red"), "JMP\n").unwrap();
    let matchups = dir.path().join("m.csv");
    let o = drq(&[
        "eval",
        "--warrior",
        s(&classic("scanner")),
        "--corpus",
        s(&corpus),
        "--matchups",
        s(&matchups),
        "--preset",
        "desk",
        "--seeds",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("broken.red"));
    let table = rows(&stdout(&o));
    assert_eq!(table.len(), 1);
    assert_eq!(table[0][1], "3");
    let (w, t, l): (usize, usize, usize) =
        (table[0][2].parse().unwrap(), table[0][3].parse().unwrap(), table[0][4].parse().unwrap());
    assert_eq!(w + t + l, 3);
    let g: f64 = table[0][5].parse().unwrap();
    assert!((g - (w + t) as f64 / 3.0).abs() < 1e-12);
    assert_eq!(rows(&std::fs::read_to_string(&matchups).unwrap()).len(), 3);
}

#[test]
fn eval_on_empty_corpus_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = drq(&["eval", "--warrior", s(&classic("imp")), "--corpus", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn matrix_is_antisymmetric() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus_dir(dir.path(), &["imp", "dwarf", "stone", "scanner"]);
    let o = drq(&["matrix", "--dir", s(&corpus), "--preset", "desk", "--seeds", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("anti-symmetric: yes"), "{}", stderr(&o));
    let table = rows(&stdout(&o));
    assert_eq!(table.len(), 4);
    for i in 0..4 {
        assert_eq!(table[i][i + 1], "-");
    }
}

#[test]
fn analyze_on_static_runs_reports_no_change() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (run, rng) in [(&a, "1"), (&b, "2")] {
        let o = drq_run(run, "2", "0", &["--init-with-champions", "--rng", rng]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let corpus = corpus_dir(dir.path(), &["imp", "stone", "scanner"]);
    let out = dir.path().join("tables");
    let o = drq(&["analyze", "--runs", s(&a), s(&b), "--corpus", s(&corpus), "--out", s(&out), "--seeds", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let per_round = rows(&std::fs::read_to_string(out.join("per_round.csv")).unwrap());
    assert_eq!(per_round.len(), 3);
    for r in &per_round {
        assert_eq!(r[3].parse::<f64>().unwrap(), 0.0, "variance {r:?}");
        if r[0] != "0" {
            assert_eq!(r[4].parse::<f64>().unwrap(), 0.0, "rate {r:?}");
        }
    }
    for f in ["trends.csv", "cycles.csv", "champions.csv", "probe.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let cycles = rows(&std::fs::read_to_string(out.join("cycles.csv")).unwrap());
    assert!(cycles.iter().all(|r| r[3] == "true"));
}

#[test]
fn render_archive_single_average_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    assert!(drq_run(&run, "1", "32", &[]).status.success());
    let snap = run.join("round_1/archive.snapshot");
    let image = dir.path().join("grid.ppm");
    let one = drq(&["render-archive", s(&snap), "--image", s(&image)]);
    assert!(one.status.success(), "{}", stderr(&one));
    assert!(std::fs::read(&image).unwrap().starts_with(b"P6"));
    let two = drq(&["render-archive", s(&snap), s(&snap)]);
    assert!(two.status.success());
    // Averaging a snapshot with itself changes nothing.
    assert_eq!(one.stdout, two.stdout);
    assert!(rows(&stdout(&one)).iter().flatten().skip(1).any(|c| !c.is_empty()));

    let empty = run.join("round_0/archive.snapshot");
    if empty.exists() {
        assert!(drq(&["render-archive", s(&empty)]).status.success());
    }
    let missing = drq(&["render-archive", s(&dir.path().join("nope.snapshot"))]);
    assert_eq!(missing.status.code(), Some(2));
}

/// Answers every chat request with the same fenced program.
fn mock_chat_server(reply: &'static str) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut length = 0;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 {
                    break;
                }
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    length = v.trim().parse().unwrap_or(0);
                }
                if line == "\r\n" {
                    break;
                }
            }
            let mut body = vec![0; length];
            let _ = reader.read_exact(&mut body);
            let payload = serde_json::json!({
                "choices": [{ "message": { "role": "assistant", "content": reply } }]
            })
            .to_string();
            let _ = write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                payload.len()
            );
        }
    });
    format!("http://{addr}/v1")
}

#[test]
fn llm_mutator_uses_the_endpoint() {
    let endpoint = mock_chat_server("Here you go:\n```redcode\nSPL 0\nMOV 0, 1\n```\n");
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let o = drq_run(
        &run,
        "1",
        "8",
        &["--mutator", "llm", "--llm-endpoint", &endpoint, "--llm-model", "mock", "--strict-llm"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let events = std::fs::read_to_string(run.join("round_1/events.log")).unwrap();
    assert!(events.contains("\"llm\""), "{events}");
}

fn closed_port() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    format!("http://{addr}/v1")
}

#[test]
fn unreachable_llm_in_strict_mode_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let endpoint = closed_port();
    let o = drq_run(
        &dir.path().join("run"),
        "1",
        "8",
        &["--mutator", "llm", "--llm-endpoint", &endpoint, "--llm-model", "m", "--strict-llm"],
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn llm_without_endpoint_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = drq_run(&dir.path().join("run"), "1", "8", &["--mutator", "llm"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(drq(&["battle"]).status.code(), Some(2));
    assert_eq!(drq(&["--help"]).status.code(), Some(0));
}

#[test]
fn eval_generality_on_known_outcomes() {
    // A program that dies at once ties other instant deaths and loses to the imp.
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus_dir(dir.path(), &["imp"]);
    for (i, line) in ["DAT 0, 0", "DAT 1, 1", "DAT 2, 2"].iter().enumerate() {
        std::fs::write(corpus.join(format!("dead{i}.red")), line).unwrap();
    }
    let suicide = dir.path().join("suicide.red");
    std::fs::write(&suicide, "DAT 3, 3\n").unwrap();
    let o = drq(&["eval", "--warrior", s(&suicide), "--corpus", s(&corpus), "--preset", "desk", "--seeds", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = rows(&stdout(&o));
    assert_eq!(table[0][1..], ["4", "0", "3", "1", "0.75"]);
}

fn brute_force_3cycles(m: &[Vec<String>]) -> usize {
    let n = m.len();
    let beats = |i: usize, j: usize| m[i][j + 1] == "W";
    let mut count = 0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if (beats(i, j) && beats(j, k) && beats(k, i)) || (beats(j, i) && beats(k, j) && beats(i, k)) {
                    count += 1;
                }
            }
        }
    }
    count
}

#[test]
fn analyze_cycle_count_matches_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let o = drq_run(&run, "4", "48", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let champs = dir.path().join("champs");
    std::fs::create_dir_all(&champs).unwrap();
    for t in 0..=4 {
        std::fs::copy(run.join(format!("round_{t}/champion.red")), champs.join(format!("round_{t}.red"))).unwrap();
    }
    let battle = ["--preset", "desk", "--cycles", "800", "--seeds", "2"];
    let mut args = vec!["matrix", "--dir", s(&champs)];
    args.extend_from_slice(&battle);
    let o = drq(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let expected = brute_force_3cycles(&rows(&stdout(&o)));

    let corpus = corpus_dir(dir.path(), &["imp", "stone"]);
    let out = dir.path().join("tables");
    let o = drq(&["analyze", "--runs", s(&run), "--corpus", s(&corpus), "--out", s(&out), "--seeds", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let cycles = rows(&std::fs::read_to_string(out.join("cycles.csv")).unwrap());
    assert_eq!(cycles[0][1], "5");
    assert_eq!(cycles[0][2], expected.to_string());
}
