use super::ast::Span;
use super::diagnostic::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// `.decl`, `.init`, ... (the name without the dot)
    Directive(String),
    Ident(String),
    Number(i64),
    True,
    False,
    Underscore,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Turnstile,
    Dot,
    Assign,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Directive(d) => format!("`.{d}`"),
            Tok::Ident(i) => format!("identifier `{i}`"),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Underscore => "`_`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Turnstile => "`:-`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Assign => "`=`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::NotEq => "`!=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span(&self) -> Span {
        Span::new(self.line, self.col)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut cur = Cursor {
        chars: src.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        // whitespace and comments
        loop {
            match cur.peek() {
                Some(c) if c.is_whitespace() => {
                    cur.bump();
                }
                Some('/') => {
                    let mut look = cur.chars.clone();
                    look.next();
                    match look.next() {
                        Some('/') => {
                            while let Some(c) = cur.bump() {
                                if c == '\n' {
                                    break;
                                }
                            }
                        }
                        Some('*') => {
                            let start = cur.span();
                            cur.bump();
                            cur.bump();
                            let mut closed = false;
                            while let Some(c) = cur.bump() {
                                if c == '*' && cur.eat('/') {
                                    closed = true;
                                    break;
                                }
                            }
                            if !closed {
                                return Err(Diagnostic::error(start, "unterminated block comment"));
                            }
                        }
                        _ => break,
                    }
                }
                _ => break,
            }
        }
        let span = cur.span();
        let Some(c) = cur.bump() else {
            out.push(Token { tok: Tok::Eof, span });
            return Ok(out);
        };
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            ':' => {
                if cur.eat('-') {
                    Tok::Turnstile
                } else {
                    Tok::Colon
                }
            }
            '.' => match cur.peek() {
                Some(c) if is_ident_start(c) => {
                    let mut name = String::new();
                    while let Some(c) = cur.peek().filter(|c| is_ident_char(*c)) {
                        name.push(c);
                        cur.bump();
                    }
                    Tok::Directive(name)
                }
                _ => Tok::Dot,
            },
            '=' => {
                if cur.eat('=') {
                    Tok::EqEq
                } else {
                    Tok::Assign
                }
            }
            '!' => {
                if cur.eat('=') {
                    Tok::NotEq
                } else {
                    return Err(Diagnostic::error(span, "unexpected character `!`"));
                }
            }
            '<' => {
                if cur.eat('=') {
                    Tok::Le
                } else {
                    Tok::Lt
                }
            }
            '>' => {
                if cur.eat('=') {
                    Tok::Ge
                } else {
                    Tok::Gt
                }
            }
            '_' => {
                if cur.peek().is_some_and(is_ident_char) {
                    return Err(Diagnostic::error(
                        span,
                        "identifiers may not start with `_`",
                    ));
                }
                Tok::Underscore
            }
            c if c.is_ascii_digit() => {
                let mut digits = String::from(c);
                while let Some(d) = cur.peek().filter(|d| d.is_ascii_digit()) {
                    digits.push(d);
                    cur.bump();
                }
                match digits.parse::<i64>() {
                    Ok(n) => Tok::Number(n),
                    Err(_) => {
                        return Err(Diagnostic::error(
                            span,
                            format!("integer literal `{digits}` is out of range"),
                        ))
                    }
                }
            }
            c if is_ident_start(c) => {
                let mut name = String::from(c);
                while let Some(c) = cur.peek().filter(|c| is_ident_char(*c)) {
                    name.push(c);
                    cur.bump();
                }
                match name.as_str() {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(name),
                }
            }
            other => {
                return Err(Diagnostic::error(
                    span,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        out.push(Token { tok, span });
    }
}
