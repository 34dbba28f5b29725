use std::fmt;

use crate::parser::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keyword {
    Spec,
    Const,
    Var,
    Init,
    In,
    Domain,
    Action,
    When,
    Any,
    If,
    Then,
    Else,
    Invariant,
    Property,
    Forall,
    Always,
    Eventually,
    Leadsto,
    And,
    Or,
    Not,
    Implies,
    True,
    False,
    Int,
    Bool,
    String,
}

impl Keyword {
    const ALL: [(Keyword, &'static str); 27] = [
        (Keyword::Spec, "spec"),
        (Keyword::Const, "const"),
        (Keyword::Var, "var"),
        (Keyword::Init, "init"),
        (Keyword::In, "in"),
        (Keyword::Domain, "domain"),
        (Keyword::Action, "action"),
        (Keyword::When, "when"),
        (Keyword::Any, "any"),
        (Keyword::If, "if"),
        (Keyword::Then, "then"),
        (Keyword::Else, "else"),
        (Keyword::Invariant, "invariant"),
        (Keyword::Property, "property"),
        (Keyword::Forall, "forall"),
        (Keyword::Always, "always"),
        (Keyword::Eventually, "eventually"),
        (Keyword::Leadsto, "leadsto"),
        (Keyword::And, "and"),
        (Keyword::Or, "or"),
        (Keyword::Not, "not"),
        (Keyword::Implies, "implies"),
        (Keyword::True, "true"),
        (Keyword::False, "false"),
        (Keyword::Int, "int"),
        (Keyword::Bool, "bool"),
        (Keyword::String, "string"),
    ];

    pub fn from_word(word: &str) -> Option<Keyword> {
        Self::ALL.iter().find(|(_, w)| *w == word).map(|(k, _)| *k)
    }

    pub fn as_str(self) -> &'static str {
        Self::ALL
            .iter()
            .find(|(k, _)| *k == self)
            .map(|(_, w)| *w)
            .unwrap()
    }

    pub fn is_reserved(word: &str) -> bool {
        Self::from_word(word).is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident(String),
    Int(i64),
    Str(String),
    // operators
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    DotDot,
    Prime,
    // punctuation
    Colon,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eof,
}

/// Coarse token classes, used for "expected ..." diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenCategory {
    Keyword,
    Identifier,
    IntegerLiteral,
    StringLiteral,
    Operator,
    Punctuation,
    EndOfInput,
}

impl TokenKind {
    pub fn category(&self) -> TokenCategory {
        use TokenKind::*;
        match self {
            Keyword(_) => TokenCategory::Keyword,
            Ident(_) => TokenCategory::Identifier,
            Int(_) => TokenCategory::IntegerLiteral,
            Str(_) => TokenCategory::StringLiteral,
            Eq | Ne | Lt | Le | Gt | Ge | Plus | Minus | Star | DotDot | Prime => {
                TokenCategory::Operator
            }
            Colon | Comma | LParen | RParen | LBrace | RBrace => TokenCategory::Punctuation,
            Eof => TokenCategory::EndOfInput,
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TokenKind::*;
        let s = match self {
            Keyword(k) => return write!(f, "`{}`", k.as_str()),
            Ident(name) => return write!(f, "identifier `{name}`"),
            Int(i) => return write!(f, "integer `{i}`"),
            Str(s) => return write!(f, "string \"{s}\""),
            Eq => "`=`",
            Ne => "`/=`",
            Lt => "`<`",
            Le => "`<=`",
            Gt => "`>`",
            Ge => "`>=`",
            Plus => "`+`",
            Minus => "`-`",
            Star => "`*`",
            DotDot => "`..`",
            Prime => "`'`",
            Colon => "`:`",
            Comma => "`,`",
            LParen => "`(`",
            RParen => "`)`",
            LBrace => "`{`",
            RBrace => "`}`",
            Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Source lexeme; string literals carry their contents without quotes.
    pub text: String,
    pub line: u32,
    pub column: u32,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|(_, c)| *c)
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map(|(i, _)| *i).unwrap_or(self.src.len())
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat(&mut self, expected: char) -> bool {
        if self.peek() == Some(expected) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn second(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
    }
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor {
        chars: source.char_indices().peekable(),
        src: source,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    loop {
        // whitespace and comments
        loop {
            match cur.peek() {
                Some(c) if c.is_whitespace() => {
                    cur.bump();
                }
                Some('/') if cur.second() == Some('/') => {
                    while let Some(c) = cur.peek() {
                        if c == '\n' {
                            break;
                        }
                        cur.bump();
                    }
                }
                _ => break,
            }
        }
        let (line, column) = (cur.line, cur.column);
        let start = cur.offset();
        let Some(c) = cur.bump() else {
            tokens.push(Token {
                kind: TokenKind::Eof,
                text: String::new(),
                line,
                column,
            });
            return Ok(tokens);
        };
        let kind = match c {
            'a'..='z' | 'A'..='Z' | '_' => {
                while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    cur.bump();
                }
                let word = &source[start..cur.offset()];
                match Keyword::from_word(word) {
                    Some(k) => TokenKind::Keyword(k),
                    None => TokenKind::Ident(word.to_string()),
                }
            }
            '0'..='9' => {
                while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
                    cur.bump();
                }
                let digits = &source[start..cur.offset()];
                let value = digits.parse::<i64>().map_err(|_| {
                    ParseError::new(
                        format!("integer literal `{digits}` is out of the 64-bit range"),
                        line,
                        column,
                    )
                })?;
                TokenKind::Int(value)
            }
            '"' => {
                let body_start = cur.offset();
                loop {
                    match cur.peek() {
                        Some('"') => break,
                        Some('\n') | None => {
                            return Err(ParseError::new(
                                "unterminated string literal",
                                line,
                                column,
                            ));
                        }
                        Some(_) => {
                            cur.bump();
                        }
                    }
                }
                let body = source[body_start..cur.offset()].to_string();
                cur.bump();
                tokens.push(Token {
                    kind: TokenKind::Str(body.clone()),
                    text: body,
                    line,
                    column,
                });
                continue;
            }
            '=' => TokenKind::Eq,
            '/' if cur.eat('=') => TokenKind::Ne,
            '<' if cur.eat('=') => TokenKind::Le,
            '<' => TokenKind::Lt,
            '>' if cur.eat('=') => TokenKind::Ge,
            '>' => TokenKind::Gt,
            '+' => TokenKind::Plus,
            '-' => TokenKind::Minus,
            '*' => TokenKind::Star,
            '.' if cur.eat('.') => TokenKind::DotDot,
            '\'' => TokenKind::Prime,
            ':' => TokenKind::Colon,
            ',' => TokenKind::Comma,
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            '{' => TokenKind::LBrace,
            '}' => TokenKind::RBrace,
            other => {
                return Err(ParseError::new(
                    format!("illegal character `{}`", other.escape_debug()),
                    line,
                    column,
                ));
            }
        };
        tokens.push(Token {
            kind,
            text: source[start..cur.offset()].to_string(),
            line,
            column,
        });
    }
}
