use std::fmt;

use super::diag::{Diagnostic, Pos, EOF_TOKEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Posedge,
    Negedge,
    Disable,
    Iff,
    Not,
    And,
    Or,
    Until,
    Within,
    Logic,
}

impl Keyword {
    fn lookup(word: &str) -> Option<Keyword> {
        Some(match word {
            "posedge" => Keyword::Posedge,
            "negedge" => Keyword::Negedge,
            "disable" => Keyword::Disable,
            "iff" => Keyword::Iff,
            "not" => Keyword::Not,
            "and" => Keyword::And,
            "or" => Keyword::Or,
            "until" => Keyword::Until,
            "within" => Keyword::Within,
            "logic" => Keyword::Logic,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Posedge => "posedge",
            Keyword::Negedge => "negedge",
            Keyword::Disable => "disable",
            Keyword::Iff => "iff",
            Keyword::Not => "not",
            Keyword::And => "and",
            Keyword::Or => "or",
            Keyword::Until => "until",
            Keyword::Within => "within",
            Keyword::Logic => "logic",
        }
    }
}

/// SystemVerilog keywords outside the supported fragment. They lex as
/// identifiers but may not be used as signal names.
pub const RESERVED: &[&str] = &[
    "accept_on",
    "always",
    "assert",
    "assume",
    "bit",
    "case",
    "cover",
    "else",
    "endproperty",
    "endsequence",
    "eventually",
    "first_match",
    "if",
    "implies",
    "int",
    "intersect",
    "nexttime",
    "property",
    "reject_on",
    "s_always",
    "s_eventually",
    "s_nexttime",
    "s_until",
    "s_until_with",
    "sequence",
    "strong",
    "sync_accept_on",
    "sync_reject_on",
    "throughout",
    "until_with",
    "weak",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `$rose`, `$past`, ... (the name includes the dollar sign).
    SysIdent(String),
    Int(u64),
    /// Sized or based literal such as `1'b1`.
    Literal(String),
    Kw(Keyword),
    At,
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    LBracket,
    RBracket,
    Dollar,
    HashHash,
    StarBracket,
    GotoBracket,
    EqBracket,
    ImplOverlap,
    ImplNonOverlap,
    AndAnd,
    OrOr,
    Bang,
    EqEq,
    NotEq,
    Assign,
    Amp,
    Pipe,
    Caret,
    Tilde,
    Lt,
    Gt,
    Le,
    Ge,
    Arrow,
    FatArrow,
    Plus,
    Minus,
    Star,
    Slash,
    Apostrophe,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) | Tok::SysIdent(s) | Tok::Literal(s) => return f.write_str(s),
            Tok::Int(n) => return write!(f, "{n}"),
            Tok::Kw(k) => k.as_str(),
            Tok::At => "@",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Dollar => "$",
            Tok::HashHash => "##",
            Tok::StarBracket => "[*",
            Tok::GotoBracket => "[->",
            Tok::EqBracket => "[=",
            Tok::ImplOverlap => "|->",
            Tok::ImplNonOverlap => "|=>",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Bang => "!",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            Tok::Assign => "=",
            Tok::Amp => "&",
            Tok::Pipe => "|",
            Tok::Caret => "^",
            Tok::Tilde => "~",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::Arrow => "->",
            Tok::FatArrow => "=>",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Apostrophe => "'",
            Tok::Eof => EOF_TOKEN,
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

/// Operators, longest first so that maximal munch falls out of a linear scan.
const PUNCT: &[(&str, Tok)] = &[
    ("[->", Tok::GotoBracket),
    ("|->", Tok::ImplOverlap),
    ("|=>", Tok::ImplNonOverlap),
    ("##", Tok::HashHash),
    ("[*", Tok::StarBracket),
    ("[=", Tok::EqBracket),
    ("&&", Tok::AndAnd),
    ("||", Tok::OrOr),
    ("==", Tok::EqEq),
    ("!=", Tok::NotEq),
    ("<=", Tok::Le),
    (">=", Tok::Ge),
    ("->", Tok::Arrow),
    ("=>", Tok::FatArrow),
    ("@", Tok::At),
    ("(", Tok::LParen),
    (")", Tok::RParen),
    (",", Tok::Comma),
    (";", Tok::Semi),
    (":", Tok::Colon),
    ("[", Tok::LBracket),
    ("]", Tok::RBracket),
    ("!", Tok::Bang),
    ("=", Tok::Assign),
    ("&", Tok::Amp),
    ("|", Tok::Pipe),
    ("^", Tok::Caret),
    ("~", Tok::Tilde),
    ("<", Tok::Lt),
    (">", Tok::Gt),
    ("+", Tok::Plus),
    ("-", Tok::Minus),
    ("*", Tok::Star),
    ("/", Tok::Slash),
    ("'", Tok::Apostrophe),
];

struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    pos: Pos,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.offset..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn bump_n(&mut self, bytes: usize) {
        let end = self.offset + bytes;
        while self.offset < end {
            self.bump();
        }
    }

    fn eat_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let start = self.offset;
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
        &self.src[start..self.offset]
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

/// Splits `src` into tokens. The returned list always ends with `Tok::Eof`.
pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut cur = Cursor {
        src,
        offset: 0,
        pos: Pos { line: 1, col: 1 },
    };
    let mut out = Vec::new();
    loop {
        // whitespace and comments
        loop {
            cur.eat_while(char::is_whitespace);
            if cur.rest().starts_with("//") {
                cur.eat_while(|c| c != '\n');
            } else if cur.rest().starts_with("/*") {
                let start = cur.pos;
                match cur.rest()[2..].find("*/") {
                    Some(end) => cur.bump_n(end + 4),
                    None => return Err(Diagnostic::new(start, "/*", "unterminated block comment")),
                }
            } else {
                break;
            }
        }
        let pos = cur.pos;
        let Some(c) = cur.peek() else {
            out.push(Token { tok: Tok::Eof, pos });
            return Ok(out);
        };
        let tok = if is_ident_start(c) {
            let word = cur.eat_while(is_ident_char);
            match Keyword::lookup(word) {
                Some(kw) => Tok::Kw(kw),
                None => Tok::Ident(word.to_string()),
            }
        } else if c == '$' {
            cur.bump();
            let name = cur.eat_while(is_ident_char);
            if name.is_empty() {
                Tok::Dollar
            } else {
                Tok::SysIdent(format!("${name}"))
            }
        } else if c.is_ascii_digit() {
            let digits = cur.eat_while(|c| c.is_ascii_digit() || c == '_');
            let based = cur.rest().starts_with('\'')
                && cur.rest()[1..].starts_with(|c: char| "bBoOdDhHsS".contains(c));
            if based {
                cur.bump();
                let tail = cur.eat_while(|c| c.is_ascii_alphanumeric() || c == '_' || c == '?');
                Tok::Literal(format!("{digits}'{tail}"))
            } else {
                let clean: String = digits.chars().filter(|&c| c != '_').collect();
                match clean.parse::<u64>() {
                    Ok(n) => Tok::Int(n),
                    Err(_) => return Err(Diagnostic::new(pos, digits, "integer constant is too large")),
                }
            }
        } else if let Some((text, tok)) = PUNCT.iter().find(|(p, _)| cur.rest().starts_with(p)) {
            cur.bump_n(text.len());
            tok.clone()
        } else {
            return Err(Diagnostic::new(pos, c.to_string(), format!("unknown character '{c}'")));
        };
        out.push(Token { tok, pos });
    }
}
