use std::fmt;

/// One of the eight processing methods a track chain may call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Volume,
    Compressor,
    Reverb,
    PeakFilter,
    LowPassFilter,
    HighPassFilter,
    StartAt,
    StopAt,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Volume,
        Method::Compressor,
        Method::Reverb,
        Method::PeakFilter,
        Method::LowPassFilter,
        Method::HighPassFilter,
        Method::StartAt,
        Method::StopAt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Volume => "Volume",
            Method::Compressor => "Compressor",
            Method::Reverb => "Reverb",
            Method::PeakFilter => "PeakFilter",
            Method::LowPassFilter => "LowPassFilter",
            Method::HighPassFilter => "HighPassFilter",
            Method::StartAt => "StartAt",
            Method::StopAt => "StopAt",
        }
    }

    /// Case-sensitive lookup.
    pub fn from_name(name: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Parameter names in positional order.
    pub fn params(self) -> &'static [&'static str] {
        match self {
            Method::Volume => &["targetLUFS"],
            Method::Compressor => &["threshold", "ratio", "attack_ms", "release_ms"],
            Method::Reverb => &["room_size", "dry_wet"],
            Method::PeakFilter => &["frequency", "q_factor", "gain"],
            Method::LowPassFilter | Method::HighPassFilter => &["frequency"],
            Method::StartAt => &["at"],
            Method::StopAt => &["at", "fade_out_duration"],
        }
    }

    /// Number of arguments that must be present. Only `StopAt` has an
    /// optional trailing parameter.
    pub fn required_args(self) -> usize {
        match self {
            Method::StopAt => 1,
            m => m.params().len(),
        }
    }

    /// Resolve a named argument to its positional slot.
    pub fn param_index(self, name: &str) -> Option<usize> {
        // `q_facter` is the spelling used by some generated scripts.
        let name = if self == Method::PeakFilter && name == "q_facter" {
            "q_factor"
        } else {
            name
        };
        self.params().iter().position(|p| *p == name)
    }

    pub fn is_placement(self) -> bool {
        matches!(self, Method::StartAt | Method::StopAt)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A method call with its arguments resolved to positional order.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectOp {
    pub method: Method,
    pub args: Vec<f64>,
}

impl EffectOp {
    pub fn new(method: Method, args: Vec<f64>) -> Self {
        Self { method, args }
    }

    /// Argument value by parameter name, if present.
    pub fn arg(&self, name: &str) -> Option<f64> {
        self.method
            .param_index(name)
            .and_then(|i| self.args.get(i).copied())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub asset_ref: String,
    pub chain: Vec<EffectOp>,
}

impl Track {
    pub fn new(asset_ref: impl Into<String>) -> Self {
        Self {
            asset_ref: asset_ref.into(),
            chain: Vec::new(),
        }
    }

    pub fn with(mut self, method: Method, args: &[f64]) -> Self {
        self.chain.push(EffectOp::new(method, args.to_vec()));
        self
    }

    /// Last occurrence of a placement method wins.
    pub fn last_op(&self, method: Method) -> Option<&EffectOp> {
        self.chain.iter().rev().find(|op| op.method == method)
    }
}

/// 1-based line/column position (columns count characters).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl Span {
    pub fn new(line: usize, column: usize) -> Self {
        Self { line, column }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OpSpans {
    pub method: Span,
    /// Span of each resolved argument, in positional order.
    pub args: Vec<Span>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrackSpans {
    pub asset: Span,
    pub ops: Vec<OpSpans>,
}

/// Source positions for every node of a parsed script. Empty for
/// programmatically built ASTs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpanMap {
    pub tracks: Vec<TrackSpans>,
}

impl SpanMap {
    pub fn asset(&self, track: usize) -> Span {
        self.tracks
            .get(track)
            .map(|t| t.asset)
            .unwrap_or(Span::new(1, 1))
    }

    pub fn method(&self, track: usize, op: usize) -> Span {
        self.tracks
            .get(track)
            .and_then(|t| t.ops.get(op))
            .map(|o| o.method)
            .unwrap_or_else(|| self.asset(track))
    }

    pub fn arg(&self, track: usize, op: usize, arg: usize) -> Span {
        self.tracks
            .get(track)
            .and_then(|t| t.ops.get(op))
            .and_then(|o| o.args.get(arg))
            .copied()
            .unwrap_or_else(|| self.method(track, op))
    }
}

/// A parsed Mixer Script. Equality is structural: spans are ignored.
#[derive(Debug, Clone, Default)]
pub struct ScriptAst {
    pub tracks: Vec<Track>,
    pub spans: SpanMap,
}

impl ScriptAst {
    pub fn new(tracks: Vec<Track>) -> Self {
        Self {
            tracks,
            spans: SpanMap::default(),
        }
    }
}

impl PartialEq for ScriptAst {
    fn eq(&self, other: &Self) -> bool {
        self.tracks == other.tracks
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

impl Diagnostic {
    pub fn error(span: Span, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            message: message.into(),
            line: span.line,
            column: span.column,
        }
    }

    pub fn warning(span: Span, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            message: message.into(),
            line: span.line,
            column: span.column,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.line, self.column, self.severity, self.message
        )
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}
