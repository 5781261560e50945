use std::io::{BufRead, IsTerminal, Write};
use std::path::Path;

use mixscript_core::orchestrator::{
    step, LoopConfig, MockGenerator, OrchestratorError, RemoteConfig, RemoteGenerator, Role,
    ScriptGenerator, SessionState, TranscriptEntry,
};
use mixscript_core::{write_wav, RenderSession};
use serde_json::json;

use crate::args::GlobalOpts;
use crate::commands::{describe_buffer, load_catalog, render_failure, CmdResult, Failure};

const QUIT: &str = ":quit";

fn turn_failure(e: OrchestratorError) -> Failure {
    match e {
        OrchestratorError::InvalidScript { .. } => Failure::script(e.to_string()),
        OrchestratorError::Render(r) => render_failure(r),
        other => Failure::io(other.to_string()),
    }
}

/// Read prompts until `:quit` or end of input. Turn failures are reported and
/// the session continues; the exit code reflects the worst failure seen.
pub fn chat(opts: &GlobalOpts, mock: Option<&Path>, out_dir: &Path, k: usize) -> CmdResult {
    let mut generator: Box<dyn ScriptGenerator> = match mock {
        Some(path) => {
            Box::new(MockGenerator::from_file(path).map_err(|e| Failure::io(e.to_string()))?)
        }
        None => Box::new(RemoteGenerator::new(
            RemoteConfig::from_env().map_err(|e| Failure::io(e.to_string()))?,
        )),
    };
    let catalog = load_catalog(opts)?;
    let config = LoopConfig {
        k,
        session: RenderSession::with_rate(opts.rate),
    };

    let interactive = std::io::stdin().is_terminal();
    let mut state = SessionState::new();
    let mut worst: Option<Failure> = None;
    let mut prompts = 0;
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    loop {
        if interactive {
            eprint!("> ");
            let _ = std::io::stderr().flush();
        }
        let Some(line) = lines.next() else { break };
        let line = line.map_err(|e| Failure::io(format!("stdin: {e}")))?;
        let prompt = line.trim();
        if prompt == QUIT {
            break;
        }
        if prompt.is_empty() {
            continue;
        }
        if prompts == 0 {
            std::fs::create_dir_all(out_dir)
                .map_err(|e| Failure::io(format!("{}: {e}", out_dir.display())))?;
        }
        prompts += 1;

        match step(&state, prompt, generator.as_mut(), &catalog, &config) {
            Ok(outcome) => {
                let n = outcome.state.turn;
                let wav = out_dir.join(format!("turn_{n}.wav"));
                write_wav(&wav, &outcome.audio.buffer, opts.format.into())
                    .map_err(|e| Failure::io(format!("{}: {e}", wav.display())))?;
                if opts.json {
                    println!(
                        "{}",
                        json!({
                            "turn": n,
                            "retrieval": outcome.decision.to_string(),
                            "assets": outcome.state.retrieval.as_ref().map(|r| r.names()).unwrap_or_default(),
                            "script": outcome.script_text,
                            "repairs": outcome.repairs,
                            "wav": wav.display().to_string(),
                        })
                    );
                } else {
                    println!("# retrieval: {}", outcome.decision);
                    print!("{}", outcome.script_text);
                    println!(
                        "# wrote {}: {}",
                        wav.display(),
                        describe_buffer(&outcome.audio.buffer)
                    );
                }
                for warning in &outcome.warnings {
                    eprintln!("warning: {warning}");
                }
                if opts.verbose > 0 {
                    eprintln!("{}", outcome.context.system_text());
                }
                state = outcome.state;
            }
            Err(e) => {
                let failure = turn_failure(e);
                eprintln!("error: {failure}");
                state.transcript.push(TranscriptEntry {
                    role: Role::User,
                    text: prompt.to_string(),
                });
                state.transcript.push(TranscriptEntry {
                    role: Role::System,
                    text: format!("turn failed: {failure}"),
                });
                if worst.as_ref().is_none_or(|w| failure.code > w.code) {
                    worst = Some(failure);
                }
            }
        }
        let log = out_dir.join("session.log");
        std::fs::write(&log, state.transcript_text())
            .map_err(|e| Failure::io(format!("{}: {e}", log.display())))?;
    }
    match worst {
        Some(f) => Err(Failure {
            code: f.code,
            message: "session finished with failed turns".into(),
        }),
        None => Ok(()),
    }
}
