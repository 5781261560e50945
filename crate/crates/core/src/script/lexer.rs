use super::ast::{Diagnostic, Span};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Str(String),
    Ident(String),
    Number(f64),
    Dot,
    LParen,
    RParen,
    Comma,
    Equals,
    Semicolon,
    Newline,
    /// A lexical error already reported as a diagnostic.
    Invalid,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
    tokens: Vec<Token>,
    diagnostics: Vec<Diagnostic>,
}

/// Tokenize a script. Never fails: malformed input yields `Invalid` tokens
/// with matching diagnostics.
pub fn tokenize(text: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut lexer = Lexer {
        chars: text.chars().peekable(),
        line: 1,
        column: 1,
        tokens: Vec::new(),
        diagnostics: Vec::new(),
    };
    lexer.run();
    (lexer.tokens, lexer.diagnostics)
}

/// Decimal literal: optional sign, digits, optional `.digits`. No exponent.
pub fn parse_decimal(word: &str) -> Option<f64> {
    let body = word.strip_prefix(['+', '-']).unwrap_or(word);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(int) || frac.is_some_and(|f| !digits(f)) {
        return None;
    }
    word.parse::<f64>().ok().filter(|v| v.is_finite())
}

impl Lexer<'_> {
    fn span(&self) -> Span {
        Span::new(self.line, self.column)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn push(&mut self, kind: TokenKind, span: Span) {
        self.tokens.push(Token { kind, span });
    }

    fn run(&mut self) {
        while let Some(&c) = self.chars.peek() {
            let span = self.span();
            match c {
                ' ' | '\t' | '\r' => {
                    self.bump();
                }
                '\n' => {
                    self.bump();
                    self.push(TokenKind::Newline, span);
                }
                '#' => {
                    while self.chars.peek().is_some_and(|&c| c != '\n') {
                        self.bump();
                    }
                }
                '.' => self.single(TokenKind::Dot),
                '(' => self.single(TokenKind::LParen),
                ')' => self.single(TokenKind::RParen),
                ',' => self.single(TokenKind::Comma),
                '=' => self.single(TokenKind::Equals),
                ';' => self.single(TokenKind::Semicolon),
                '"' => self.string(),
                c if c.is_ascii_digit() || c == '-' || c == '+' => self.number(),
                c if c.is_ascii_alphabetic() || c == '_' => self.ident(),
                other => {
                    self.bump();
                    self.diagnostics.push(Diagnostic::error(
                        span,
                        format!("unexpected character '{}'", other.escape_debug()),
                    ));
                    self.push(TokenKind::Invalid, span);
                }
            }
        }
        let span = self.span();
        self.push(TokenKind::Eof, span);
    }

    fn single(&mut self, kind: TokenKind) {
        let span = self.span();
        self.bump();
        self.push(kind, span);
    }

    fn string(&mut self) {
        let span = self.span();
        self.bump();
        let mut value = String::new();
        loop {
            match self.chars.peek() {
                Some('"') => {
                    self.bump();
                    self.push(TokenKind::Str(value), span);
                    return;
                }
                Some('\n') | None => {
                    self.diagnostics
                        .push(Diagnostic::error(span, "unterminated string"));
                    self.push(TokenKind::Invalid, span);
                    return;
                }
                Some(_) => value.extend(self.bump()),
            }
        }
    }

    fn number(&mut self) {
        let span = self.span();
        let mut word = String::new();
        word.extend(self.bump());
        while self
            .chars
            .peek()
            .is_some_and(|&c| c.is_ascii_alphanumeric() || c == '.' || c == '_')
        {
            word.extend(self.bump());
        }
        match parse_decimal(&word) {
            Some(v) => self.push(TokenKind::Number(v), span),
            None => {
                self.diagnostics.push(Diagnostic::error(
                    span,
                    format!("malformed number '{word}'"),
                ));
                self.push(TokenKind::Invalid, span);
            }
        }
    }

    fn ident(&mut self) {
        let span = self.span();
        let mut word = String::new();
        while self
            .chars
            .peek()
            .is_some_and(|&c| c.is_ascii_alphanumeric() || c == '_')
        {
            word.extend(self.bump());
        }
        self.push(TokenKind::Ident(word), span);
    }
}
