use std::fmt;
use std::path::Path;
use std::sync::Arc;

use mixscript_core::catalog::{Catalog, CatalogError, TrigramEmbedder};
use mixscript_core::dsp::{render, OutputLength, RenderError, RenderSession};
use mixscript_core::script::{
    format_script, has_errors, parse_script, validate_for_rate, AssetIndex, Diagnostic, ScriptAst,
};
use mixscript_core::{extract_metadata, write_wav, AudioBuffer, SoundObject};
use serde_json::{json, Value};

use crate::args::GlobalOpts;

/// A failed command: message for stderr plus the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn script(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<CatalogError> for Failure {
    fn from(e: CatalogError) -> Self {
        Failure::io(e.to_string())
    }
}

pub type CmdResult = Result<(), Failure>;

pub fn load_catalog(opts: &GlobalOpts) -> Result<Catalog, Failure> {
    Catalog::load(&opts.catalog, Arc::new(TrigramEmbedder)).map_err(|e| {
        Failure::io(format!(
            "cannot load catalog {}: {e} (run `mixscript ingest <dir>` first)",
            opts.catalog.display()
        ))
    })
}

pub fn object_json(obj: &SoundObject) -> Value {
    json!({
        "name": obj.name,
        "description": obj.description,
        "loudness_lufs": obj.loudness.lufs(),
        "onset_ms": obj.onset_ms,
        "pitch_hz": obj.pitch.hz(),
        "duration_s": obj.duration_s,
        "sample_rate": obj.sample_rate,
        "source_path": obj.source_path,
    })
}

fn summary_line(obj: &SoundObject) -> String {
    format!(
        "{:<28} {:>9} LUFS  onset {:>8.1} ms  pitch {:>10}  {:>7.3} s  {} Hz",
        obj.name,
        obj.loudness.to_string(),
        obj.onset_ms,
        obj.pitch.to_string(),
        obj.duration_s,
        obj.sample_rate
    )
}

fn diagnostics_text(path: &Path, diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .iter()
        .map(|d| format!("{}:{d}", path.display()))
        .collect::<Vec<_>>()
        .join("\n")
}

fn diagnostics_json(diagnostics: &[Diagnostic]) -> Value {
    Value::Array(
        diagnostics
            .iter()
            .map(|d| {
                json!({
                    "severity": if d.is_error() { "error" } else { "warning" },
                    "line": d.line,
                    "column": d.column,
                    "message": d.message,
                })
            })
            .collect(),
    )
}

fn print_json(value: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable")
    );
}

pub fn ingest(opts: &GlobalOpts, dir: &Path) -> CmdResult {
    let ingested = Catalog::ingest(dir, Arc::new(TrigramEmbedder))?;
    for warning in &ingested.warnings {
        eprintln!("warning: {warning}");
    }
    let catalog = ingested.catalog;
    if catalog.is_empty() {
        eprintln!(
            "warning: empty catalog: no readable .wav files in {}",
            dir.display()
        );
    }
    catalog.save(&opts.catalog)?;
    if opts.json {
        print_json(&Value::Array(
            catalog.entries().iter().map(object_json).collect(),
        ));
    } else {
        for obj in catalog.entries() {
            println!("{}", summary_line(obj));
        }
    }
    if opts.verbose > 0 {
        eprintln!(
            "saved {} entries to {}",
            catalog.len(),
            opts.catalog.display()
        );
    }
    Ok(())
}

pub fn query(opts: &GlobalOpts, text: &str, k: usize) -> CmdResult {
    let catalog = load_catalog(opts)?;
    let result = catalog.query(text, k)?;
    if opts.json {
        let hits: Vec<Value> = result
            .hits
            .iter()
            .map(|h| {
                let mut v = object_json(&h.object);
                v["score"] = json!(h.score);
                v
            })
            .collect();
        print_json(&json!({ "query": result.query, "hits": hits }));
        return Ok(());
    }
    for (rank, hit) in result.hits.iter().enumerate() {
        println!(
            "{:>2}. {:.4}  {:<28} {}",
            rank + 1,
            hit.score,
            hit.object.name,
            hit.object.description
        );
    }
    Ok(())
}

pub fn inspect(opts: &GlobalOpts, wav: &Path) -> CmdResult {
    let obj = extract_metadata(wav).map_err(|e| Failure::io(format!("{}: {e}", wav.display())))?;
    if opts.json {
        print_json(&object_json(&obj));
    } else {
        print!("{}", obj.to_record());
    }
    Ok(())
}

struct AnyAsset;

impl AssetIndex for AnyAsset {
    fn contains_asset(&self, _name: &str) -> bool {
        true
    }
}

fn read_script(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

/// Parse and validate, reporting diagnostics on stderr (or stdout as JSON).
fn check_script(
    opts: &GlobalOpts,
    path: &Path,
    text: &str,
    index: &dyn AssetIndex,
) -> Result<ScriptAst, Failure> {
    let (ast, diagnostics) = match parse_script(text) {
        Ok(ast) => {
            let d = validate_for_rate(&ast, index, opts.rate);
            (Some(ast), d)
        }
        Err(d) => (None, d),
    };
    if opts.json {
        print_json(
            &json!({ "valid": !has_errors(&diagnostics), "diagnostics": diagnostics_json(&diagnostics) }),
        );
    }
    if !diagnostics.is_empty() {
        eprintln!("{}", diagnostics_text(path, &diagnostics));
    }
    match ast {
        Some(ast) if !has_errors(&diagnostics) => Ok(ast),
        _ => {
            let errors = diagnostics.iter().filter(|d| d.is_error()).count();
            Err(Failure::script(format!(
                "{}: {errors} error(s)",
                path.display()
            )))
        }
    }
}

pub fn validate(opts: &GlobalOpts, path: &Path, canonical: bool) -> CmdResult {
    let text = read_script(path)?;
    let catalog = if opts.catalog.exists() {
        Some(load_catalog(opts)?)
    } else {
        None
    };
    let index: &dyn AssetIndex = match &catalog {
        Some(c) => c,
        None => {
            eprintln!(
                "warning: catalog {} not found; asset names not checked",
                opts.catalog.display()
            );
            &AnyAsset
        }
    };
    let ast = check_script(opts, path, &text, index)?;
    if opts.json {
        return Ok(());
    }
    if canonical {
        print!("{}", format_script(&ast));
    } else {
        println!("ok: {} track(s)", ast.tracks.len());
    }
    Ok(())
}

pub fn describe_buffer(buf: &AudioBuffer) -> String {
    let peak = buf.peak();
    let peak_db = if peak > 0.0 {
        format!("{:.1} dBFS", 20.0 * (peak as f64).log10())
    } else {
        "silent".into()
    };
    format!(
        "{:.3} s, {} Hz, {} ch, peak {peak_db}",
        buf.duration_s(),
        buf.sample_rate(),
        buf.num_channels()
    )
}

pub fn render_failure(e: RenderError) -> Failure {
    match e {
        RenderError::Validation(d) => Failure::script(
            d.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("\n"),
        ),
        other => Failure::io(other.to_string()),
    }
}

pub fn render_script(opts: &GlobalOpts, path: &Path, out: &Path, length: Option<f64>) -> CmdResult {
    let text = read_script(path)?;
    let catalog = load_catalog(opts)?;
    let ast = check_script(opts, path, &text, &catalog)?;
    let session = RenderSession {
        sample_rate: opts.rate,
        length: length.map_or(OutputLength::Auto, OutputLength::Seconds),
    };
    let rendered = render(&ast, &catalog, &session).map_err(render_failure)?;
    for warning in &rendered.warnings {
        eprintln!("warning: {warning}");
    }
    write_wav(out, &rendered.buffer, opts.format.into())
        .map_err(|e| Failure::io(format!("{}: {e}", out.display())))?;
    if !opts.json {
        println!(
            "wrote {}: {}",
            out.display(),
            describe_buffer(&rendered.buffer)
        );
    }
    Ok(())
}
