//! Recursive-descent parser for Mixer Script.
//!
//! One track per line: an asset reference followed by dot-chained method
//! calls, an optional `;` and an optional `#` comment. Errors are recovered
//! per line so that a single pass reports every malformed line.

use super::ast::{
    Diagnostic, EffectOp, Method, OpSpans, ScriptAst, Span, SpanMap, Track, TrackSpans,
};
use super::lexer::{tokenize, Token, TokenKind};

/// Parse script text. On failure every diagnostic carries a position.
pub fn parse_script(text: &str) -> Result<ScriptAst, Vec<Diagnostic>> {
    let (tokens, mut diagnostics) = tokenize(text);
    let mut parser = Parser { tokens, pos: 0 };
    let mut tracks = Vec::new();
    let mut spans = SpanMap::default();

    loop {
        while parser.peek().kind == TokenKind::Newline {
            parser.pos += 1;
        }
        if parser.peek().kind == TokenKind::Eof {
            break;
        }
        match parser.line() {
            Ok((track, track_spans)) => {
                tracks.push(track);
                spans.tracks.push(track_spans);
            }
            Err(diag) => {
                diagnostics.extend(diag);
                parser.skip_line();
            }
        }
    }

    if !diagnostics.is_empty() {
        diagnostics.sort_by_key(|d| (d.line, d.column));
        return Err(diagnostics);
    }
    if tracks.is_empty() {
        return Err(vec![Diagnostic::error(
            Span::new(1, 1),
            "script contains no tracks",
        )]);
    }
    Ok(ScriptAst { tracks, spans })
}

struct RawArg {
    name: Option<(String, Span)>,
    value: f64,
    span: Span,
}

/// `Err(None)` means the error was already reported by the lexer.
type LineResult<T> = Result<T, Option<Diagnostic>>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let token = self.tokens[self.pos].clone();
        if token.kind != TokenKind::Eof {
            self.pos += 1;
        }
        token
    }

    fn skip_line(&mut self) {
        while !matches!(self.peek().kind, TokenKind::Newline | TokenKind::Eof) {
            self.pos += 1;
        }
    }

    /// Position for an error at the current token. End of input is reported
    /// at the last real token so the position stays inside the text.
    fn here(&self) -> Span {
        let token = self.peek();
        if token.kind == TokenKind::Eof && self.pos > 0 {
            self.tokens[self.pos - 1].span
        } else {
            token.span
        }
    }

    fn fail<T>(&self, message: impl Into<String>) -> LineResult<T> {
        if self.peek().kind == TokenKind::Invalid {
            return Err(None);
        }
        Err(Some(Diagnostic::error(self.here(), message)))
    }

    fn describe(&self) -> String {
        match &self.peek().kind {
            TokenKind::Str(s) => format!("string \"{s}\""),
            TokenKind::Ident(s) => format!("'{s}'"),
            TokenKind::Number(_) => "number".into(),
            TokenKind::Dot => "'.'".into(),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
            TokenKind::Comma => "','".into(),
            TokenKind::Equals => "'='".into(),
            TokenKind::Semicolon => "';'".into(),
            TokenKind::Newline => "end of line".into(),
            TokenKind::Invalid => "invalid token".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }

    fn line(&mut self) -> LineResult<(Track, TrackSpans)> {
        let asset_span = self.peek().span;
        let asset_ref = match self.peek().kind.clone() {
            TokenKind::Str(s) if s.is_empty() => {
                return self.fail("asset reference must not be empty");
            }
            TokenKind::Str(s) | TokenKind::Ident(s) => {
                self.advance();
                s
            }
            _ => return self.fail(format!("expected asset name, found {}", self.describe())),
        };

        let mut track = Track::new(asset_ref);
        let mut spans = TrackSpans {
            asset: asset_span,
            ops: Vec::new(),
        };
        while self.peek().kind == TokenKind::Dot {
            self.advance();
            let (op, op_spans) = self.call()?;
            track.chain.push(op);
            spans.ops.push(op_spans);
        }

        if self.peek().kind == TokenKind::Semicolon {
            self.advance();
        }
        match self.peek().kind {
            TokenKind::Newline | TokenKind::Eof => Ok((track, spans)),
            _ => self.fail(format!(
                "expected '.', ';' or end of line, found {}",
                self.describe()
            )),
        }
    }

    fn call(&mut self) -> LineResult<(EffectOp, OpSpans)> {
        let method_span = self.peek().span;
        let name = match self.peek().kind.clone() {
            TokenKind::Ident(name) => name,
            _ => {
                return self.fail(format!(
                    "expected method name after '.', found {}",
                    self.describe()
                ))
            }
        };
        let Some(method) = Method::from_name(&name) else {
            let known: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
            return self.fail(format!(
                "unknown method '{name}'; expected one of {}",
                known.join(", ")
            ));
        };
        self.advance();
        if self.peek().kind != TokenKind::LParen {
            return self.fail(format!(
                "expected '(' after {method}, found {}",
                self.describe()
            ));
        }
        self.advance();

        let mut raw = Vec::new();
        if self.peek().kind == TokenKind::RParen {
            self.advance();
        } else {
            loop {
                raw.push(self.arg()?);
                match self.peek().kind {
                    TokenKind::Comma => {
                        self.advance();
                    }
                    TokenKind::RParen => {
                        self.advance();
                        break;
                    }
                    _ => {
                        return self.fail(format!("expected ',' or ')', found {}", self.describe()))
                    }
                }
            }
        }

        let (args, arg_spans) = bind(method, method_span, raw).map_err(Some)?;
        Ok((
            EffectOp::new(method, args),
            OpSpans {
                method: method_span,
                args: arg_spans,
            },
        ))
    }

    fn arg(&mut self) -> LineResult<RawArg> {
        let mut name = None;
        if let TokenKind::Ident(ident) = self.peek().kind.clone() {
            let span = self.peek().span;
            if self.tokens.get(self.pos + 1).map(|t| &t.kind) == Some(&TokenKind::Equals) {
                self.pos += 2;
                name = Some((ident, span));
            }
        }
        let span = self.peek().span;
        match self.peek().kind {
            TokenKind::Number(value) => {
                self.advance();
                Ok(RawArg { name, value, span })
            }
            _ => self.fail(format!("expected number, found {}", self.describe())),
        }
    }
}

fn arity_text(method: Method) -> String {
    let params = method.params();
    let count = if method.required_args() == params.len() {
        params.len().to_string()
    } else {
        format!("{} to {}", method.required_args(), params.len())
    };
    let noun = if params.len() == 1 {
        "argument"
    } else {
        "arguments"
    };
    format!("{method} takes {count} {noun} ({})", params.join(", "))
}

/// Resolve positional and named arguments into positional slots.
fn bind(
    method: Method,
    method_span: Span,
    raw: Vec<RawArg>,
) -> Result<(Vec<f64>, Vec<Span>), Diagnostic> {
    let params = method.params();
    if raw.len() > params.len() || raw.len() < method.required_args() {
        return Err(Diagnostic::error(
            method_span,
            format!("wrong arity: {}, got {}", arity_text(method), raw.len()),
        ));
    }

    let mut slots: Vec<Option<(f64, Span)>> = vec![None; params.len()];
    let mut seen_named = false;
    for (position, arg) in raw.into_iter().enumerate() {
        let index = match &arg.name {
            Some((name, span)) => {
                seen_named = true;
                method.param_index(name).ok_or_else(|| {
                    Diagnostic::error(
                        *span,
                        format!(
                            "unknown parameter '{name}' for {method} (expected {})",
                            params.join(", ")
                        ),
                    )
                })?
            }
            None if seen_named => {
                return Err(Diagnostic::error(
                    arg.span,
                    "positional argument after named argument",
                ))
            }
            None => position,
        };
        if slots[index].is_some() {
            let span = arg.name.as_ref().map_or(arg.span, |(_, s)| *s);
            return Err(Diagnostic::error(
                span,
                format!("duplicate argument '{}' for {method}", params[index]),
            ));
        }
        slots[index] = Some((arg.value, arg.span));
    }

    if let Some(missing) = (0..method.required_args()).find(|&i| slots[i].is_none()) {
        return Err(Diagnostic::error(
            method_span,
            format!("missing argument '{}' for {method}", params[missing]),
        ));
    }
    Ok(slots.into_iter().flatten().unzip())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str) -> Vec<Diagnostic> {
        parse_script(text).expect_err("expected parse failure")
    }

    #[test]
    fn single_track_with_chain() {
        let ast = parse_script("\"coin_drop\".Volume(-18).StartAt(0.5)").unwrap();
        assert_eq!(ast.tracks.len(), 1);
        let track = &ast.tracks[0];
        assert_eq!(track.asset_ref, "coin_drop");
        assert_eq!(
            track.chain,
            vec![
                EffectOp::new(Method::Volume, vec![-18.0]),
                EffectOp::new(Method::StartAt, vec![0.5]),
            ]
        );
        assert_eq!(ast.spans.method(0, 1), Span::new(1, 25));
    }

    #[test]
    fn bare_asset_has_empty_chain() {
        let ast = parse_script("\"a\"").unwrap();
        assert_eq!(ast.tracks, vec![Track::new("a")]);
    }

    #[test]
    fn identifiers_comments_blank_lines_and_semicolons() {
        let text = "# header\n\ncoin.Reverb(0.5, 0.2); # wet\n\n  glass.StopAt(1)\n";
        let ast = parse_script(text).unwrap();
        assert_eq!(ast.tracks.len(), 2);
        assert_eq!(ast.tracks[0].asset_ref, "coin");
        assert_eq!(ast.spans.asset(1), Span::new(5, 3));
        assert_eq!(ast.tracks[1].chain[0].args, vec![1.0]);
    }

    #[test]
    fn named_arguments_resolve_to_positions() {
        let ast =
            parse_script("a.Compressor(release_ms=100, threshold=-20, attack_ms=10, ratio=4)")
                .unwrap();
        assert_eq!(ast.tracks[0].chain[0].args, vec![-20.0, 4.0, 10.0, 100.0]);

        let mixed = parse_script("a.PeakFilter(1000, gain=6, q_facter=2)").unwrap();
        assert_eq!(mixed.tracks[0].chain[0].args, vec![1000.0, 2.0, 6.0]);
        assert_eq!(mixed.tracks[0].chain[0].arg("q_factor"), Some(2.0));
    }

    #[test]
    fn stop_at_optional_fade() {
        let ast = parse_script("a.StopAt(2)\nb.StopAt(at=2, fade_out_duration=0.5)").unwrap();
        assert_eq!(ast.tracks[0].chain[0].args, vec![2.0]);
        assert_eq!(ast.tracks[1].chain[0].args, vec![2.0, 0.5]);
        let diags = errors("a.StopAt(fade_out_duration=0.5)");
        assert_eq!(diags[0].message, "missing argument 'at' for StopAt");
    }

    #[test]
    fn unknown_method_is_positioned() {
        let diags = errors("\"a\".Volume(-3)\n\"b\".volume(-3)");
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.starts_with("unknown method 'volume'"));
        assert_eq!((diags[0].line, diags[0].column), (2, 5));
    }

    #[test]
    fn wrong_arity() {
        let diags = errors("a.Compressor(-20, 4)");
        assert_eq!(
            diags[0].message,
            "wrong arity: Compressor takes 4 arguments (threshold, ratio, attack_ms, release_ms), got 2"
        );
        assert_eq!((diags[0].line, diags[0].column), (1, 3));
        assert!(errors("a.Volume()")[0].message.starts_with("wrong arity"));
        assert!(errors("a.StopAt(1, 2, 3)")[0]
            .message
            .contains("StopAt takes 1 to 2 arguments"));
    }

    #[test]
    fn argument_binding_errors() {
        assert_eq!(
            errors("a.Volume(level=-3)")[0].message,
            "unknown parameter 'level' for Volume (expected targetLUFS)"
        );
        assert_eq!(
            errors("a.Reverb(room_size=0.1, 0.2)")[0].message,
            "positional argument after named argument"
        );
        assert_eq!(
            errors("a.Reverb(0.1, room_size=0.2)")[0].message,
            "duplicate argument 'room_size' for Reverb"
        );
    }

    #[test]
    fn every_bad_line_is_reported() {
        let diags = errors("a.Volume(1e3)\nb.Foo(1)\n\"c\n\"d\".Volume(-3) extra");
        let lines: Vec<_> = diags.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![1, 2, 3, 4]);
        assert_eq!(diags[2].message, "unterminated string");
    }

    #[test]
    fn end_of_input_errors_point_inside_text() {
        let text = "a.Volume(";
        let diags = errors(text);
        assert_eq!(diags.len(), 1);
        assert_eq!((diags[0].line, diags[0].column), (1, 9));
    }

    #[test]
    fn empty_script_is_an_error() {
        assert_eq!(
            errors("# nothing\n")[0].message,
            "script contains no tracks"
        );
        assert_eq!(errors("")[0].message, "script contains no tracks");
        assert_eq!(
            errors("\"\"")[0].message,
            "asset reference must not be empty"
        );
    }
}
