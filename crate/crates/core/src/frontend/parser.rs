//! Recursive-descent parser for DeCon source text.
//!
//! Parsing is purely syntactic. Declaredness, arity and typing are checked
//! later by [`validate`](super::validate).

use super::ast::*;
use super::diagnostic::Diagnostic;
use super::lexer::{tokenize, Tok, Token};

/// Parse a contract. `name` is usually the file stem.
pub fn parse(name: &str, src: &str) -> Result<Contract, Vec<Diagnostic>> {
    let tokens = tokenize(src).map_err(|d| vec![d])?;
    let mut p = Parser {
        tokens,
        pos: 0,
        wildcards: 0,
    };
    let mut contract = Contract {
        name: name.to_string(),
        decls: Vec::new(),
        annotations: Vec::new(),
        rules: Vec::new(),
    };
    let mut diags = Vec::new();
    while p.peek() != &Tok::Eof {
        if let Err(d) = p.item(&mut contract) {
            diags.push(d);
            p.recover();
        }
    }
    if diags.is_empty() {
        Ok(contract)
    } else {
        Err(diags)
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    wildcards: u32,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, what: &str) -> Diagnostic {
        Diagnostic::error(
            self.span(),
            format!("expected {what}, found {}", self.peek().describe()),
        )
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().span;
                Ok((name, span))
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    /// Skip past the current statement after an error.
    fn recover(&mut self) {
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Dot => {
                    self.bump();
                    return;
                }
                Tok::Directive(_) => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn item(&mut self, c: &mut Contract) -> PResult<()> {
        match self.peek().clone() {
            Tok::Directive(d) => {
                let span = self.bump().span;
                match d.as_str() {
                    "decl" => {
                        let decl = self.decl(span)?;
                        c.decls.push(decl);
                    }
                    "init" | "violation" | "public" => {
                        let kind = match d.as_str() {
                            "init" => AnnotationKind::Init,
                            "violation" => AnnotationKind::Violation,
                            _ => AnnotationKind::Public,
                        };
                        let (relation, _) = self.ident()?;
                        c.annotations.push(Annotation {
                            kind,
                            relation,
                            span,
                        });
                    }
                    other => {
                        return Err(Diagnostic::error(
                            span,
                            format!("unknown directive `.{other}`"),
                        ))
                    }
                }
                Ok(())
            }
            Tok::Ident(_) => {
                let rule = self.rule()?;
                c.rules.push(rule);
                Ok(())
            }
            _ => Err(self.unexpected("declaration, annotation or rule")),
        }
    }

    fn decl(&mut self, span: Span) -> PResult<RelationDecl> {
        let singleton = if *self.peek() == Tok::Star {
            self.bump();
            true
        } else {
            false
        };
        let (name, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut columns = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let (col, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let ty_span = self.span();
                let (ty, _) = self.ident()?;
                let ty = ColumnType::from_keyword(&ty).ok_or_else(|| {
                    Diagnostic::error(
                        ty_span,
                        format!("unknown type `{ty}` (expected address, uint, int or bool)"),
                    )
                })?;
                columns.push(ColumnDecl { name: col, ty });
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        let mut keys = Vec::new();
        if *self.peek() == Tok::LBracket {
            let bspan = self.bump().span;
            loop {
                match self.peek().clone() {
                    Tok::Number(n) => {
                        self.bump();
                        keys.push(n as usize);
                    }
                    _ => return Err(self.unexpected("key column index")),
                }
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect(Tok::RBracket)?;
            if singleton {
                return Err(Diagnostic::error(
                    bspan,
                    format!("singleton relation `{name}` cannot declare primary keys"),
                ));
            }
        }
        Ok(RelationDecl {
            name,
            columns,
            keys,
            singleton,
            span,
        })
    }

    fn fresh_wildcard(&mut self) -> String {
        let n = self.wildcards;
        self.wildcards += 1;
        format!("_{n}")
    }

    fn arg(&mut self) -> PResult<Arg> {
        match self.peek().clone() {
            Tok::Ident(v) => {
                self.bump();
                Ok(Arg::Var(v))
            }
            Tok::Number(n) => {
                self.bump();
                Ok(Arg::Const(Const::Int(n)))
            }
            Tok::True => {
                self.bump();
                Ok(Arg::Const(Const::Bool(true)))
            }
            Tok::False => {
                self.bump();
                Ok(Arg::Const(Const::Bool(false)))
            }
            Tok::Underscore => {
                self.bump();
                Ok(Arg::Var(self.fresh_wildcard()))
            }
            _ => Err(self.unexpected("variable, constant or `_`")),
        }
    }

    fn atom(&mut self) -> PResult<Atom> {
        let (relation, span) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.arg()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(Atom {
            relation,
            args,
            span,
        })
    }

    fn rule(&mut self) -> PResult<Rule> {
        let head = self.atom()?;
        let span = head.span;
        self.expect(Tok::Turnstile)?;
        let mut body = vec![self.literal()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            body.push(self.literal()?);
        }
        self.expect(Tok::Dot)?;
        Ok(Rule { head, body, span })
    }

    fn cmp_op(tok: &Tok) -> Option<CmpOp> {
        Some(match tok {
            Tok::Gt => CmpOp::Gt,
            Tok::Lt => CmpOp::Lt,
            Tok::Ge => CmpOp::Ge,
            Tok::Le => CmpOp::Le,
            Tok::NotEq => CmpOp::Ne,
            Tok::EqEq => CmpOp::Eq,
            _ => return None,
        })
    }

    fn fn_op(tok: &Tok) -> Option<FnOp> {
        Some(match tok {
            Tok::Plus => FnOp::Add,
            Tok::Minus => FnOp::Sub,
            Tok::Star => FnOp::Mul,
            Tok::Slash => FnOp::Div,
            _ => return None,
        })
    }

    fn literal(&mut self) -> PResult<Literal> {
        let span = self.span();
        if matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::LParen {
            return Ok(Literal::Atom(self.atom()?));
        }
        if let (Tok::Ident(out), Tok::Assign) = (self.peek().clone(), self.peek_at(1).clone()) {
            self.bump();
            self.bump();
            // aggregate: `y = count: R(..)` or `y = sum n: R(..)`
            if let Tok::Ident(kw) = self.peek().clone() {
                if let Some(kind) = AggKind::from_keyword(&kw) {
                    let is_agg = match self.peek_at(1) {
                        Tok::Colon => true,
                        Tok::Ident(_) => *self.peek_at(2) == Tok::Colon,
                        _ => false,
                    };
                    if is_agg {
                        self.bump();
                        let var = if let Tok::Ident(v) = self.peek().clone() {
                            self.bump();
                            Some(v)
                        } else {
                            None
                        };
                        self.expect(Tok::Colon)?;
                        let atom = self.atom()?;
                        return Ok(Literal::Aggregate {
                            out,
                            kind,
                            var,
                            atom,
                            span,
                        });
                    }
                }
            }
            let lhs = self.arg()?;
            let op = Self::fn_op(self.peek())
                .ok_or_else(|| self.unexpected("arithmetic operator (+, -, *, /)"))?;
            self.bump();
            let rhs = self.arg()?;
            return Ok(Literal::Function {
                out,
                op,
                lhs,
                rhs,
                span,
            });
        }
        let lhs = self.arg()?;
        let op = Self::cmp_op(self.peek())
            .ok_or_else(|| self.unexpected("comparison operator"))?;
        self.bump();
        let rhs = self.arg()?;
        Ok(Literal::Condition { lhs, op, rhs, span })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_program() {
        let c = parse("t", ".decl t(x: uint)").unwrap();
        assert_eq!(c.decls.len(), 1);
        assert!(c.rules.is_empty());
    }

    #[test]
    fn undeclared_relation_still_parses() {
        let c = parse("t", "vote(v,p) :- recv_vote(p).").unwrap();
        assert_eq!(c.rules.len(), 1);
    }

    #[test]
    fn aggregate_forms() {
        let c = parse(
            "t",
            "a(p,c) :- r(_,p), c = count: r(_,p).\nb(s) :- r(x,n), s = sum n: r(x,n).",
        )
        .unwrap();
        match &c.rules[0].body[1] {
            Literal::Aggregate { kind, var, .. } => {
                assert_eq!(*kind, AggKind::Count);
                assert!(var.is_none());
            }
            other => panic!("{other:?}"),
        }
        match &c.rules[1].body[1] {
            Literal::Aggregate { kind, var, .. } => {
                assert_eq!(*kind, AggKind::Sum);
                assert_eq!(var.as_deref(), Some("n"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wildcards_get_fresh_names() {
        let c = parse("t", "a(p) :- r(_, p), s(_, p).").unwrap();
        let names: Vec<_> = c.rules[0]
            .body
            .iter()
            .map(|l| l.as_atom().unwrap().args[0].clone())
            .collect();
        assert_eq!(names, vec![Arg::Var("_0".into()), Arg::Var("_1".into())]);
    }

    #[test]
    fn function_needs_operator() {
        let err = parse("t", "a(x) :- b(y), x = y.").unwrap_err();
        assert!(err[0].message.contains("arithmetic operator"), "{err:?}");
    }

    #[test]
    fn singleton_with_keys_rejected() {
        assert!(parse("t", ".decl *s(x: uint)[0]").is_err());
    }

    #[test]
    fn several_errors_are_collected() {
        let err = parse("t", "a( :- b.\n.decl x(y: float)\n.decl ok(z: int)").unwrap_err();
        assert_eq!(err.len(), 2);
        assert_eq!(err[1].line, 2);
    }
}
