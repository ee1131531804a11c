//! Lexer for the concrete syntax.
//!
//! ASCII-first with Unicode aliases on input: `Π` lexes like `Pi`, `λ` like
//! `\`, `→` like `->`, `⊢` like `|-`, and `⊸`/`⊃` lex as the identifiers
//! `lolli`/`imp`. `--` starts a line comment. Identifiers start with a letter
//! or `_` and continue with letters, digits, `_` and `'`.

use std::rc::Rc;

use super::{Span, SurfaceError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum TokKind {
    Ident(String),
    KwType,
    KwPi,
    KwLock,
    KwUnlock,
    KwSignature,
    KwContext,
    KwEnd,
    KwCheck,
    KwSynth,
    KwSolve,
    KwExpect,
    KwValid,
    KwInvalid,
    KwError,
    KwWitness,
    KwNowitness,
    KwUnlocks,
    KwSystem,
    KwFamily,
    KwKind,
    KwLint,
    KwFlagged,
    KwClean,
    PercentSystem,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Colon,
    Dot,
    Backslash,
    Arrow,
    Turnstile,
    CheckArrow,
    Eof,
}

impl TokKind {
    pub(crate) fn describe(&self) -> String {
        match self {
            TokKind::Ident(s) => format!("identifier `{s}`"),
            TokKind::KwType => "`Type`".into(),
            TokKind::KwPi => "`Pi`".into(),
            TokKind::KwLock => "`lock`".into(),
            TokKind::KwUnlock => "`unlock`".into(),
            TokKind::KwSignature => "`signature`".into(),
            TokKind::KwContext => "`context`".into(),
            TokKind::KwEnd => "`end`".into(),
            TokKind::KwCheck => "`check`".into(),
            TokKind::KwSynth => "`synth`".into(),
            TokKind::KwSolve => "`solve`".into(),
            TokKind::KwExpect => "`expect`".into(),
            TokKind::KwValid => "`valid`".into(),
            TokKind::KwInvalid => "`invalid`".into(),
            TokKind::KwError => "`error`".into(),
            TokKind::KwWitness => "`witness`".into(),
            TokKind::KwNowitness => "`nowitness`".into(),
            TokKind::KwUnlocks => "`unlocks`".into(),
            TokKind::KwSystem => "`system`".into(),
            TokKind::KwFamily => "`family`".into(),
            TokKind::KwKind => "`kind`".into(),
            TokKind::KwLint => "`lint`".into(),
            TokKind::KwFlagged => "`flagged`".into(),
            TokKind::KwClean => "`clean`".into(),
            TokKind::PercentSystem => "`%system`".into(),
            TokKind::LParen => "`(`".into(),
            TokKind::RParen => "`)`".into(),
            TokKind::LBracket => "`[`".into(),
            TokKind::RBracket => "`]`".into(),
            TokKind::Semi => "`;`".into(),
            TokKind::Colon => "`:`".into(),
            TokKind::Dot => "`.`".into(),
            TokKind::Backslash => "`\\`".into(),
            TokKind::Arrow => "`->`".into(),
            TokKind::Turnstile => "`|-`".into(),
            TokKind::CheckArrow => "`<=`".into(),
            TokKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Tok {
    pub kind: TokKind,
    pub span: Span,
}

fn keyword(s: &str) -> Option<TokKind> {
    Some(match s {
        "Type" => TokKind::KwType,
        "Pi" => TokKind::KwPi,
        "lock" => TokKind::KwLock,
        "unlock" => TokKind::KwUnlock,
        "signature" => TokKind::KwSignature,
        "context" => TokKind::KwContext,
        "end" => TokKind::KwEnd,
        "check" => TokKind::KwCheck,
        "synth" => TokKind::KwSynth,
        "solve" => TokKind::KwSolve,
        "expect" => TokKind::KwExpect,
        "valid" => TokKind::KwValid,
        "invalid" => TokKind::KwInvalid,
        "error" => TokKind::KwError,
        "witness" => TokKind::KwWitness,
        "nowitness" => TokKind::KwNowitness,
        "unlocks" => TokKind::KwUnlocks,
        "system" => TokKind::KwSystem,
        "family" => TokKind::KwFamily,
        "kind" => TokKind::KwKind,
        "lint" => TokKind::KwLint,
        "flagged" => TokKind::KwFlagged,
        "clean" => TokKind::KwClean,
        _ => return None,
    })
}

fn ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn ident_continue(c: char) -> bool {
    c == '_' || c == '\'' || c.is_alphanumeric()
}

struct Lexer<'s> {
    src: &'s str,
    file: Rc<str>,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'s> Lexer<'s> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.src[self.pos..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span_from(&self, start: usize, line: u32, col: u32) -> Span {
        Span { file: self.file.clone(), start, end: self.pos, line, col }
    }

    fn here(&self) -> Span {
        Span {
            file: self.file.clone(),
            start: self.pos,
            end: self.pos,
            line: self.line,
            col: self.col,
        }
    }

    fn err(&self, span: Span, msg: impl Into<String>) -> SurfaceError {
        SurfaceError::syntax(span, msg.into())
    }

    fn run(&mut self) -> Result<Vec<Tok>, SurfaceError> {
        let mut toks = Vec::new();
        loop {
            while let Some(c) = self.peek() {
                if c == '-' && self.peek2() == Some('-') {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                } else if c.is_whitespace() {
                    self.bump();
                } else {
                    break;
                }
            }
            let (start, line, col) = (self.pos, self.line, self.col);
            let Some(c) = self.peek() else {
                toks.push(Tok { kind: TokKind::Eof, span: self.here() });
                return Ok(toks);
            };
            let kind = match c {
                '(' => {
                    self.bump();
                    TokKind::LParen
                }
                ')' => {
                    self.bump();
                    TokKind::RParen
                }
                '[' => {
                    self.bump();
                    TokKind::LBracket
                }
                ']' => {
                    self.bump();
                    TokKind::RBracket
                }
                ';' => {
                    self.bump();
                    TokKind::Semi
                }
                ':' => {
                    self.bump();
                    TokKind::Colon
                }
                '.' => {
                    self.bump();
                    TokKind::Dot
                }
                '\\' | 'λ' => {
                    self.bump();
                    TokKind::Backslash
                }
                '→' => {
                    self.bump();
                    TokKind::Arrow
                }
                '⊢' => {
                    self.bump();
                    TokKind::Turnstile
                }
                '-' => {
                    self.bump();
                    if self.peek() == Some('>') {
                        self.bump();
                        TokKind::Arrow
                    } else {
                        let span = self.span_from(start, line, col);
                        return Err(self.err(span, "expected `->` or `--` after `-`"));
                    }
                }
                '|' => {
                    self.bump();
                    if self.peek() == Some('-') {
                        self.bump();
                        TokKind::Turnstile
                    } else {
                        let span = self.span_from(start, line, col);
                        return Err(self.err(span, "expected `|-`"));
                    }
                }
                '<' => {
                    self.bump();
                    if self.peek() == Some('=') {
                        self.bump();
                        TokKind::CheckArrow
                    } else {
                        let span = self.span_from(start, line, col);
                        return Err(self.err(span, "expected `<=`"));
                    }
                }
                '%' => {
                    self.bump();
                    let ws = self.pos;
                    while self.peek().map(ident_continue).unwrap_or(false) {
                        self.bump();
                    }
                    if &self.src[ws..self.pos] == "system" {
                        TokKind::PercentSystem
                    } else {
                        let span = self.span_from(start, line, col);
                        return Err(self.err(span, "unknown `%` directive (expected `%system`)"));
                    }
                }
                '⊸' => {
                    self.bump();
                    TokKind::Ident("lolli".to_string())
                }
                '⊃' => {
                    self.bump();
                    TokKind::Ident("imp".to_string())
                }
                'Π' => {
                    self.bump();
                    TokKind::KwPi
                }
                c if ident_start(c) => {
                    while self.peek().map(ident_continue).unwrap_or(false) {
                        self.bump();
                    }
                    let text = &self.src[start..self.pos];
                    keyword(text).unwrap_or_else(|| TokKind::Ident(text.to_string()))
                }
                other => {
                    self.bump();
                    let span = self.span_from(start, line, col);
                    return Err(self.err(span, format!("unexpected character `{other}`")));
                }
            };
            let span = self.span_from(start, line, col);
            toks.push(Tok { kind, span });
        }
    }
}

pub(crate) fn lex(src: &str, file: &str) -> Result<Vec<Tok>, SurfaceError> {
    Lexer { src, file: file.into(), pos: 0, line: 1, col: 1 }.run()
}
