//! Mixer Script: lexer, parser, canonical formatter and validator.
//!
//! ```text
//! script   = { line } ;
//! line     = [ track ] [ comment ] newline ;
//! track    = asset , { call } , [ ";" ] ;
//! asset    = '"' chars '"' | identifier ;
//! call     = "." method "(" [ arg { "," arg } ] ")" ;
//! arg      = [ identifier "=" ] number ;
//! comment  = "#" { any-char-except-newline } ;
//! ```

mod ast;
mod format;
mod lexer;
mod parser;
mod validate;

pub use ast::{
    has_errors, Diagnostic, EffectOp, Method, OpSpans, ScriptAst, Severity, Span, SpanMap, Track,
    TrackSpans,
};
pub use format::{format_number, format_script};
pub use lexer::parse_decimal;
pub use parser::parse_script;
pub use validate::{validate, validate_for_rate, AssetIndex, MAX_TIME_S};
