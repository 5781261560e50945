use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use mixscript_core::{write_wav, AudioBuffer, SampleFormat};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mixscript"));
    cmd.env_remove("SONICRAG_LLM_ENDPOINT");
    cmd
}

fn run(cmd: &mut Command, stdin: &str) -> Output {
    let mut child = cmd
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn tone(freq: f64, seconds: f64, decay: f64) -> AudioBuffer {
    let n = (seconds * 48000.0) as usize;
    let s = (0..n)
        .map(|i| {
            let t = i as f64 / 48000.0;
            (0.4 * (-decay * t).exp() * (2.0 * PI * freq * t).sin()) as f32
        })
        .collect();
    AudioBuffer::mono(48000, s).unwrap()
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let assets = dir.path().join("assets");
        std::fs::create_dir(&assets).unwrap();
        write_wav(
            assets.join("coin_drop.wav"),
            &tone(2400.0, 1.0, 8.0),
            SampleFormat::Pcm24,
        )
        .unwrap();
        write_wav(
            assets.join("wooden_table_knock.wav"),
            &tone(180.0, 0.5, 20.0),
            SampleFormat::Pcm24,
        )
        .unwrap();
        write_wav(
            assets.join("glass_break.wav"),
            &tone(3100.0, 1.5, 3.0),
            SampleFormat::Pcm24,
        )
        .unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn cmd(&self) -> Command {
        let mut cmd = bin();
        cmd.current_dir(self.dir.path());
        cmd
    }

    fn ingest(&self) -> Output {
        run(self.cmd().args(["ingest", "assets"]), "")
    }

    fn write(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, contents).unwrap();
        p
    }
}

#[test]
fn ingest_prints_one_line_per_asset() {
    let ws = Workspace::new();
    let out = ws.ingest();
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert_eq!(stdout.lines().count(), 3, "{stdout}");
    assert!(stdout.contains("coin_drop"));
    assert!(ws.path("catalog.mxcat").exists());
}

#[test]
fn ingest_empty_dir_warns() {
    let ws = Workspace::new();
    std::fs::create_dir(ws.path("empty")).unwrap();
    let out = run(ws.cmd().args(["ingest", "empty"]), "");
    assert_eq!(out.status.code(), Some(0));
    assert!(text(&out.stderr).contains("empty catalog"));
    assert!(out.stdout.is_empty());
}

#[test]
fn ingest_failures_exit_1() {
    let ws = Workspace::new();
    let out = run(ws.cmd().args(["ingest", "no_such_dir"]), "");
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    assert!(out.stdout.is_empty());

    let out = run(
        ws.cmd()
            .args(["--catalog", "missing/dir/c.mxcat", "ingest", "assets"]),
        "",
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn query_and_inspect() {
    let ws = Workspace::new();
    ws.ingest();
    let out = run(ws.cmd().args(["query", "glass", "-k", "2"]), "");
    assert_eq!(out.status.code(), Some(0));
    let stdout = text(&out.stdout);
    assert_eq!(stdout.lines().count(), 2);
    assert!(stdout.lines().next().unwrap().contains("glass_break"));

    let out = run(ws.cmd().args(["--json", "query", "coin"]), "");
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["hits"][0]["name"], "coin_drop");

    let out = run(ws.cmd().args(["inspect", "assets/glass_break.wav"]), "");
    assert_eq!(out.status.code(), Some(0));
    assert!(text(&out.stdout).contains("name: glass_break"));

    let out = run(ws.cmd().args(["inspect", "nope.wav"]), "");
    assert_eq!(out.status.code(), Some(1));

    // no catalog yet
    let fresh = Workspace::new();
    assert_eq!(
        run(fresh.cmd().args(["query", "coin"]), "").status.code(),
        Some(1)
    );
}

#[test]
fn validate_reports_positions() {
    let ws = Workspace::new();
    ws.ingest();
    ws.write(
        "ok.mix",
        "\"coin_drop\".Volume(targetLUFS=-20)  # comment\n",
    );
    let out = run(ws.cmd().args(["validate", "ok.mix", "--canonical"]), "");
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert_eq!(text(&out.stdout), "\"coin_drop\".Volume(-20)\n");

    ws.write(
        "bad.mix",
        "\"coin_drop\".Volume(-20)\n\"glass_break\".Volume(-20).Echo(1)\n",
    );
    let out = run(ws.cmd().args(["validate", "bad.mix"]), "");
    assert_eq!(out.status.code(), Some(2));
    let stderr = text(&out.stderr);
    assert!(
        stderr.contains("bad.mix:2:27: error: unknown method 'Echo'"),
        "{stderr}"
    );
    assert!(out.stdout.is_empty());

    ws.write("asset.mix", "\"door_slam\"\n");
    assert_eq!(
        run(ws.cmd().args(["validate", "asset.mix"]), "")
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn render_writes_deterministic_wav() {
    let ws = Workspace::new();
    ws.ingest();
    ws.write(
        "demo.mix",
        "\"coin_drop\".Volume(-18).Reverb(0.5, 0.25).StartAt(0.3)\n\
         \"wooden_table_knock\".Volume(-22).LowPassFilter(2000).StartAt(0.3)\n",
    );
    let first = run(ws.cmd().args(["render", "demo.mix", "-o", "a.wav"]), "");
    assert_eq!(first.status.code(), Some(0), "{}", text(&first.stderr));
    assert!(text(&first.stdout).contains("wrote a.wav"));
    run(ws.cmd().args(["render", "demo.mix", "-o", "b.wav"]), "");
    let (a, b) = (
        std::fs::read(ws.path("a.wav")).unwrap(),
        std::fs::read(ws.path("b.wav")).unwrap(),
    );
    assert!(a.len() > 44);
    assert_eq!(a, b);

    let out = run(
        ws.cmd().args([
            "--rate", "96000", "--format", "float32", "render", "demo.mix", "-o", "c.wav",
        ]),
        "",
    );
    assert_eq!(out.status.code(), Some(0));
    let buf = mixscript_core::read_wav(ws.path("c.wav")).unwrap();
    assert_eq!(buf.sample_rate(), 96000);

    ws.write("bad.mix", "\"coin_drop\".Reverb(0.5)\n");
    let out = run(ws.cmd().args(["render", "bad.mix"]), "");
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("bad.mix:1:"));
    assert!(!ws.path("out.wav").exists());
}

const FIXTURE: &str = r#"{"turns": [
  {"prompt": "a coin drop", "responses": ["```\n\"coin_drop\".Volume(-18)\n```"]},
  {"prompt": "make it louder", "responses": ["```\n\"coin_drop\".Volume(-12)\n```"]}
]}"#;

fn chat(ws: &Workspace, input: &str) -> Output {
    ws.write("fixture.json", FIXTURE);
    run(
        ws.cmd()
            .args(["chat", "--mock", "fixture.json", "--out-dir", "session"]),
        input,
    )
}

#[test]
fn mock_chat_writes_turn_files() {
    let ws = Workspace::new();
    ws.ingest();
    let out = chat(&ws, "a coin drop\nmake it louder\n:quit\n");
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(
        stdout.contains("# retrieval: new query \"a coin drop\""),
        "{stdout}"
    );
    assert!(stdout.contains("# retrieval: reuse"), "{stdout}");
    assert!(stdout.contains("\"coin_drop\".Volume(-12)"));
    for f in ["turn_1.wav", "turn_2.wav", "session.log"] {
        assert!(ws.path("session").join(f).exists(), "{f} missing");
    }
    assert!(!ws.path("session").join("turn_3.wav").exists());
    let log = std::fs::read_to_string(ws.path("session/session.log")).unwrap();
    assert!(log.contains("make it louder"));
}

#[test]
fn quit_first_writes_nothing() {
    let ws = Workspace::new();
    ws.ingest();
    let out = chat(&ws, ":quit\nA coin drop\n");
    assert_eq!(out.status.code(), Some(0));
    assert!(!ws.path("session").exists());
    assert!(out.stdout.is_empty());
}

#[test]
fn failed_turn_sets_exit_code() {
    let ws = Workspace::new();
    ws.ingest();
    let out = chat(&ws, "a coin drop\nsomething unscripted\n");
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("no scripted response"));
    assert!(ws.path("session/turn_1.wav").exists());
}

#[test]
fn live_mode_needs_endpoint() {
    let ws = Workspace::new();
    ws.ingest();
    let out = run(ws.cmd().arg("chat"), "hello\n");
    assert_eq!(out.status.code(), Some(1));
    let stderr = text(&out.stderr);
    assert!(
        stderr.contains("SONICRAG_LLM_ENDPOINT") && stderr.contains("--mock"),
        "{stderr}"
    );
}

#[test]
fn mock_mode_makes_no_connections() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    listener.set_nonblocking(true).unwrap();
    let endpoint = format!(
        "http://{}/v1/chat/completions",
        listener.local_addr().unwrap()
    );
    let ws = Workspace::new();
    ws.ingest();
    ws.write("fixture.json", FIXTURE);
    let out = run(
        ws.cmd().env("SONICRAG_LLM_ENDPOINT", &endpoint).args([
            "chat",
            "--mock",
            "fixture.json",
            "--out-dir",
            "session",
        ]),
        "a coin drop\nmake it louder\n",
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    match listener.accept() {
        Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {}
        other => panic!("unexpected connection: {other:?}"),
    }
}

#[test]
fn bad_arguments_are_config_errors() {
    let out = run(bin().args(["--rate", "22050", "query", "x"]), "");
    assert_eq!(out.status.code(), Some(1));
    let out = run(bin().args(["--format", "mp3", "query", "x"]), "");
    assert_eq!(out.status.code(), Some(1));
    assert!(Path::new(env!("CARGO_BIN_EXE_mixscript")).exists());
}
