//! Hand-written lexer.
//!
//! Identifiers may end in primes (`s'`) and may be qualified with a single
//! slash (`ord/first`, `util/ordering`), which the lexer folds into one
//! token. Comments: `//`, `--`, and `/* ... */`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::ast::Span;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(u32),
    // keywords
    Abstract,
    All,
    And,
    As,
    Assert,
    But,
    Check,
    Disj,
    Else,
    Exactly,
    Expect,
    Extends,
    Fact,
    For,
    Fun,
    Iden,
    Iff,
    Implies,
    In,
    Let,
    Lone,
    No,
    NoneKw,
    Not,
    One,
    Open,
    Or,
    Pred,
    Run,
    Set,
    Sig,
    Some,
    Univ,
    // punctuation and operators
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Colon,
    Dot,
    Arrow,
    FatArrow,
    IffArrow,
    AmpAmp,
    BarBar,
    Bar,
    Bang,
    Tilde,
    Caret,
    Star,
    Plus,
    Minus,
    Amp,
    EqSign,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        use TokenKind::*;
        match self {
            Ident(s) => alloc::format!("identifier `{}`", s),
            Int(n) => alloc::format!("integer `{}`", n),
            Eof => String::from("end of input"),
            other => alloc::format!("`{}`", keyword_or_symbol(other)),
        }
    }
}

fn keyword_or_symbol(kind: &TokenKind) -> &'static str {
    use TokenKind::*;
    match kind {
        Abstract => "abstract",
        All => "all",
        And => "and",
        As => "as",
        Assert => "assert",
        But => "but",
        Check => "check",
        Disj => "disj",
        Else => "else",
        Exactly => "exactly",
        Expect => "expect",
        Extends => "extends",
        Fact => "fact",
        For => "for",
        Fun => "fun",
        Iden => "iden",
        Iff => "iff",
        Implies => "implies",
        In => "in",
        Let => "let",
        Lone => "lone",
        No => "no",
        NoneKw => "none",
        Not => "not",
        One => "one",
        Open => "open",
        Or => "or",
        Pred => "pred",
        Run => "run",
        Set => "set",
        Sig => "sig",
        Some => "some",
        Univ => "univ",
        LBrace => "{",
        RBrace => "}",
        LBracket => "[",
        RBracket => "]",
        LParen => "(",
        RParen => ")",
        Comma => ",",
        Colon => ":",
        Dot => ".",
        Arrow => "->",
        FatArrow => "=>",
        IffArrow => "<=>",
        AmpAmp => "&&",
        BarBar => "||",
        Bar => "|",
        Bang => "!",
        Tilde => "~",
        Caret => "^",
        Star => "*",
        Plus => "+",
        Minus => "-",
        Amp => "&",
        EqSign => "=",
        Ident(_) | Int(_) | Eof => "",
    }
}

fn keyword(word: &str) -> Option<TokenKind> {
    use TokenKind::*;
    Option::Some(match word {
        "abstract" => Abstract,
        "all" => All,
        "and" => And,
        "as" => As,
        "assert" => Assert,
        "but" => But,
        "check" => Check,
        "disj" => Disj,
        "else" => Else,
        "exactly" => Exactly,
        "expect" => Expect,
        "extends" => Extends,
        "fact" => Fact,
        "for" => For,
        "fun" => Fun,
        "iden" => Iden,
        "iff" => Iff,
        "implies" => Implies,
        "in" => In,
        "let" => Let,
        "lone" => Lone,
        "no" => No,
        "none" => NoneKw,
        "not" => Not,
        "one" => One,
        "open" => Open,
        "or" => Or,
        "pred" => Pred,
        "run" => Run,
        "set" => Set,
        "sig" => Sig,
        "some" => Some,
        "univ" => Univ,
        _ => return Option::None,
    })
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

pub struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
    file: u16,
}

impl<'a> Lexer<'a> {
    pub fn new(source: &'a str, file: u16) -> Self {
        Lexer { src: source.as_bytes(), pos: 0, line: 1, col: 1, file }
    }

    pub fn tokenize(mut self) -> Result<Vec<Token>> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia()?;
            let (line, col, start) = (self.line, self.col, self.pos);
            if self.pos >= self.src.len() {
                out.push(Token {
                    kind: TokenKind::Eof,
                    span: self.span(start, line, col),
                });
                return Ok(out);
            }
            let kind = self.next_kind()?;
            out.push(Token { kind, span: self.span(start, line, col) });
        }
    }

    fn span(&self, start: usize, line: u32, col: u32) -> Span {
        Span { file: self.file, start: start as u32, end: self.pos as u32, line, col }
    }

    fn bump(&mut self) -> u8 {
        let b = self.src[self.pos];
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        b
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn skip_trivia(&mut self) -> Result<()> {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'/') if self.peek2() == Some(b'/') => self.line_comment(),
                Some(b'-') if self.peek2() == Some(b'-') => self.line_comment(),
                Some(b'/') if self.peek2() == Some(b'*') => {
                    let (line, col, start) = (self.line, self.col, self.pos);
                    self.bump();
                    self.bump();
                    loop {
                        match self.peek() {
                            Some(b'*') if self.peek2() == Some(b'/') => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            Some(_) => {
                                self.bump();
                            }
                            None => {
                                return Err(Error::Syntax {
                                    message: String::from("unterminated block comment"),
                                    span: self.span(start, line, col),
                                })
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn line_comment(&mut self) {
        while let Some(b) = self.peek() {
            if b == b'\n' {
                break;
            }
            self.bump();
        }
    }

    fn next_kind(&mut self) -> Result<TokenKind> {
        let (line, col, start) = (self.line, self.col, self.pos);
        let b = self.bump();
        use TokenKind::*;
        Ok(match b {
            b'{' => LBrace,
            b'}' => RBrace,
            b'[' => LBracket,
            b']' => RBracket,
            b'(' => LParen,
            b')' => RParen,
            b',' => Comma,
            b':' => Colon,
            b'.' => Dot,
            b'|' => {
                if self.peek() == Option::Some(b'|') {
                    self.bump();
                    BarBar
                } else {
                    Bar
                }
            }
            b'&' => {
                if self.peek() == Option::Some(b'&') {
                    self.bump();
                    AmpAmp
                } else {
                    Amp
                }
            }
            b'=' => {
                if self.peek() == Option::Some(b'>') {
                    self.bump();
                    FatArrow
                } else {
                    EqSign
                }
            }
            b'<' => {
                if self.peek() == Option::Some(b'=') && self.peek2() == Option::Some(b'>') {
                    self.bump();
                    self.bump();
                    IffArrow
                } else {
                    return Err(Error::Syntax {
                        message: String::from("expected `<=>`"),
                        span: self.span(start, line, col),
                    });
                }
            }
            b'-' => {
                if self.peek() == Option::Some(b'>') {
                    self.bump();
                    Arrow
                } else {
                    Minus
                }
            }
            b'!' => Bang,
            b'~' => Tilde,
            b'^' => Caret,
            b'*' => Star,
            b'+' => Plus,
            b'0'..=b'9' => {
                let mut value = (b - b'0') as u32;
                while let Option::Some(d @ b'0'..=b'9') = self.peek() {
                    self.bump();
                    value = value.saturating_mul(10).saturating_add((d - b'0') as u32);
                }
                Int(value)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let word = self.read_word(start);
                // Qualified name: ident/ident (ordering primitives, open path).
                if self.peek() == Option::Some(b'/')
                    && self
                        .peek2()
                        .is_some_and(|c| c.is_ascii_alphabetic() || c == b'_')
                {
                    self.bump();
                    let second_start = self.pos;
                    let second = self.read_word(second_start);
                    if keyword(&second).is_some() {
                        return Err(Error::Syntax {
                            message: alloc::format!(
                                "keyword `{}` cannot follow `/` in a qualified name",
                                second
                            ),
                            span: self.span(start, line, col),
                        });
                    }
                    return Ok(Ident(alloc::format!("{}/{}", word, second)));
                }
                match keyword(&word) {
                    Option::Some(kw) => kw,
                    Option::None => Ident(word),
                }
            }
            other => {
                return Err(Error::Syntax {
                    message: alloc::format!("unexpected character `{}`", other as char),
                    span: self.span(start, line, col),
                })
            }
        })
    }

    fn read_word(&mut self, start: usize) -> String {
        while let Some(b) = self.peek() {
            if b.is_ascii_alphanumeric() || b == b'_' {
                self.bump();
            } else {
                break;
            }
        }
        // Trailing primes are part of the identifier.
        while self.peek() == Some(b'\'') {
            self.bump();
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }
}
