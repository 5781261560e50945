//! Sound-effect synthesis from recorded assets.
//!
//! Scripts in the Mixer Script language describe one processed asset per
//! line; [`dsp::render`] turns a parsed script into audio. Assets live in a
//! [`catalog::Catalog`] of [`metadata::SoundObject`]s searchable by text,
//! and [`orchestrator::step`] runs one turn of the retrieve-then-generate
//! loop around a pluggable script generator.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod dsp;
pub mod metadata;
pub mod orchestrator;
pub mod script;
pub mod wav;

pub use catalog::{Catalog, Embedder, RetrievalSet, TrigramEmbedder};
pub use dsp::{render, AudioBuffer, Loudness, OutputLength, RenderSession, Rendered};
pub use metadata::{extract_metadata, Pitch, SoundObject};
pub use orchestrator::{
    step, LoopConfig, MockGenerator, RemoteGenerator, ScriptGenerator, SessionState,
};
pub use script::{format_script, parse_script, validate, Diagnostic, Method, ScriptAst};
pub use wav::{read_wav, write_wav, SampleFormat};
