use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Num(String),
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    Assign,
    Arrow,
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    And,
    Bang,
    Star,
    Slash,
    Plus,
    Minus,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Num(s) => return write!(f, "number {s}"),
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LBrack => "`[`",
            Tok::RBrack => "`]`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::Colon => "`:`",
            Tok::Assign => "`:=`",
            Tok::Arrow => "`->`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Eq => "`=`",
            Tok::Ge => "`>=`",
            Tok::Gt => "`>`",
            Tok::And => "`&&`",
            Tok::Bang => "`!`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

/// Splits `src` into tokens. Comments run from `//` or `#` to end of line.
pub(crate) fn lex(src: &str) -> Result<Vec<Token>, (Pos, String)> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let peek = chars.get(i + 1).copied();
        let mut adv = 1;
        let tok = match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '/' if peek == Some('/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            ':' if peek == Some('=') => {
                adv = 2;
                Tok::Assign
            }
            ':' => Tok::Colon,
            '-' if peek == Some('>') => {
                adv = 2;
                Tok::Arrow
            }
            '-' => Tok::Minus,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '<' if peek == Some('=') => {
                adv = 2;
                Tok::Le
            }
            '<' => Tok::Lt,
            '>' if peek == Some('=') => {
                adv = 2;
                Tok::Ge
            }
            '>' => Tok::Gt,
            '=' if peek == Some('=') => {
                adv = 2;
                Tok::Eq
            }
            '=' => Tok::Eq,
            '&' if peek == Some('&') => {
                adv = 2;
                Tok::And
            }
            '!' => Tok::Bang,
            c if c.is_ascii_digit() || (c == '.' && peek.is_some_and(|p| p.is_ascii_digit())) => {
                let start = i;
                let mut j = i;
                let mut seen_dot = false;
                while j < chars.len()
                    && (chars[j].is_ascii_digit() || (chars[j] == '.' && !seen_dot))
                {
                    seen_dot |= chars[j] == '.';
                    j += 1;
                }
                adv = j - start;
                Tok::Num(chars[start..j].iter().collect())
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len()
                    && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'')
                {
                    j += 1;
                }
                adv = j - start;
                Tok::Ident(chars[start..j].iter().collect())
            }
            other => return Err((pos, format!("unexpected character `{other}`"))),
        };
        out.push(Token { tok, pos });
        i += adv;
        col += adv;
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}
