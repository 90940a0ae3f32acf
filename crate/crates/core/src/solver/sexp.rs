//! Minimal S-expression reader for solver output.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            Sexp::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(xs) => Some(xs),
            Sexp::Atom(_) => None,
        }
    }

    /// `(head ...)` with an atom head.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|xs| xs.first()).and_then(Sexp::atom)
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::List(xs) => {
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Parse every top-level expression in `src`. Quoted symbols `|a b|` come
/// back without the bars.
pub fn parse_all(src: &str) -> Result<Vec<Sexp>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    while i < chars.len() {
        let c = chars[i];
        match c {
            ';' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_whitespace() => i += 1,
            '(' => {
                stack.push(Vec::new());
                i += 1;
            }
            ')' => {
                if stack.len() < 2 {
                    return Err("unbalanced `)`".into());
                }
                let done = stack.pop().unwrap();
                stack.last_mut().unwrap().push(Sexp::List(done));
                i += 1;
            }
            '|' => {
                let start = i + 1;
                i += 1;
                while i < chars.len() && chars[i] != '|' {
                    i += 1;
                }
                if i >= chars.len() {
                    return Err("unterminated quoted symbol".into());
                }
                stack.last_mut().unwrap().push(Sexp::Atom(chars[start..i].iter().collect()));
                i += 1;
            }
            '"' => {
                let mut s = String::from('"');
                i += 1;
                loop {
                    if i >= chars.len() {
                        return Err("unterminated string".into());
                    }
                    if chars[i] == '"' {
                        // "" escapes a quote
                        if i + 1 < chars.len() && chars[i + 1] == '"' {
                            s.push('"');
                            i += 2;
                            continue;
                        }
                        i += 1;
                        break;
                    }
                    s.push(chars[i]);
                    i += 1;
                }
                s.push('"');
                stack.last_mut().unwrap().push(Sexp::Atom(s));
            }
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !matches!(chars[i], '(' | ')' | ';' | '|' | '"') {
                    i += 1;
                }
                stack.last_mut().unwrap().push(Sexp::Atom(chars[start..i].iter().collect()));
            }
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced `(`".into());
    }
    Ok(stack.pop().unwrap())
}

/// Net parenthesis depth of a chunk, ignoring strings, quoted symbols and
/// comments. Used to find where a multi-line response ends.
pub fn depth_delta(line: &str) -> i64 {
    let mut d = 0;
    let mut in_str = false;
    let mut in_sym = false;
    for c in line.chars() {
        match c {
            '"' if !in_sym => in_str = !in_str,
            '|' if !in_str => in_sym = !in_sym,
            ';' if !in_str && !in_sym => break,
            '(' if !in_str && !in_sym => d += 1,
            ')' if !in_str && !in_sym => d -= 1,
            _ => {}
        }
    }
    d
}
