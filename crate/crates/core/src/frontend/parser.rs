//! Recursive-descent parser for the stencil DSL.
//!
//! ```text
//! program := (decl ";")+
//! decl    := "input" NAME ("weight" INT)? | "let" NAME "=" expr | "output" NAME "=" expr
//! expr    := term (("+"|"-") term)*
//! term    := factor (("*"|"/") factor)*
//! factor  := NUMBER | NAME | "-" factor | SHIFT "(" expr ")" | "(" expr ")"
//! ```
//!
//! `#` and `//` start a comment that runs to the end of the line.

use super::expr::{parse_scalar, BinOp, ExprId, Shift};
use super::{FrontendError, ProgramBuilder, StencilProgram};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Punct(char),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, FrontendError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: tl, column: tc });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            col += i - start;
            out.push(Token { tok: Tok::Number(chars[start..i].iter().collect()), line: tl, column: tc });
            continue;
        }
        if "+-*/()=;".contains(c) {
            out.push(Token { tok: Tok::Punct(c), line: tl, column: tc });
            i += 1;
            col += 1;
            continue;
        }
        return Err(FrontendError::Parse { line: tl, column: tc, message: format!("unexpected character `{c}`") });
    }
    out.push(Token { tok: Tok::Eof, line, column: col });
    Ok(out)
}

const KEYWORDS: [&str; 4] = ["input", "let", "output", "weight"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    b: ProgramBuilder,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, t: &Token, message: impl Into<String>) -> Result<T, FrontendError> {
        Err(FrontendError::Parse { line: t.line, column: t.column, message: message.into() })
    }

    fn expect_punct(&mut self, c: char) -> Result<(), FrontendError> {
        let t = self.next();
        if t.tok == Tok::Punct(c) {
            Ok(())
        } else {
            self.err(&t, format!("expected `{c}`, found {}", describe(&t.tok)))
        }
    }

    fn name(&mut self) -> Result<String, FrontendError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) || Shift::from_name(s).is_some() => {
                self.err(&t, format!("`{s}` is reserved and cannot be used as a name"))
            }
            Tok::Ident(s) => Ok(s.clone()),
            other => self.err(&t, format!("expected a name, found {}", describe(other))),
        }
    }

    fn program(mut self) -> Result<StencilProgram, FrontendError> {
        loop {
            let t = self.next();
            match &t.tok {
                Tok::Eof => break,
                Tok::Ident(k) if k == "input" => {
                    let name = self.name()?;
                    let mut weight = 1;
                    if matches!(&self.peek().tok, Tok::Ident(w) if w == "weight") {
                        self.next();
                        let wt = self.next();
                        weight = match &wt.tok {
                            Tok::Number(s) => match s.parse::<u32>() {
                                Ok(w) if w >= 1 => w,
                                _ => return self.err(&wt, "weight must be an integer >= 1"),
                            },
                            other => return self.err(&wt, format!("expected weight, found {}", describe(other))),
                        };
                    }
                    self.b.input(&name, weight)?;
                }
                Tok::Ident(k) if k == "let" => {
                    let name = self.name()?;
                    self.expect_punct('=')?;
                    let e = self.expr()?;
                    self.b.bind(&name, e)?;
                }
                Tok::Ident(k) if k == "output" => {
                    let name = self.name()?;
                    self.expect_punct('=')?;
                    let e = self.expr()?;
                    self.b.output(&name, e)?;
                }
                other => {
                    return self.err(&t, format!("expected `input`, `let` or `output`, found {}", describe(other)))
                }
            }
            self.expect_punct(';')?;
        }
        self.b.finish()
    }

    fn expr(&mut self) -> Result<ExprId, FrontendError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Punct('+') => BinOp::Add,
                Tok::Punct('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.term()?;
            lhs = self.b.arena.binary(op, lhs, rhs)?;
        }
    }

    fn term(&mut self) -> Result<ExprId, FrontendError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek().tok {
                Tok::Punct('*') => BinOp::Mul,
                Tok::Punct('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.factor()?;
            lhs = self.b.arena.binary(op, lhs, rhs)?;
        }
    }

    fn factor(&mut self) -> Result<ExprId, FrontendError> {
        let t = self.next();
        match &t.tok {
            Tok::Number(s) => match parse_scalar(s) {
                Some(v) => Ok(self.b.arena.constant(v)),
                None => self.err(&t, format!("malformed number `{s}`")),
            },
            Tok::Punct('-') => {
                let inner = self.factor()?;
                Ok(self.b.arena.neg(inner))
            }
            Tok::Punct('(') => {
                let e = self.expr()?;
                self.expect_punct(')')?;
                Ok(e)
            }
            Tok::Ident(s) => {
                if let Some(dir) = Shift::from_name(s) {
                    self.expect_punct('(')?;
                    let e = self.expr()?;
                    self.expect_punct(')')?;
                    return Ok(self.b.arena.shift(dir, e));
                }
                match self.b.lookup(s) {
                    Some(id) => Ok(id),
                    None => Err(FrontendError::UnknownName { name: s.clone(), line: t.line }),
                }
            }
            other => self.err(&t, format!("expected an operand, found {}", describe(other))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Number(s) => format!("number `{s}`"),
        Tok::Punct(c) => format!("`{c}`"),
        Tok::Eof => "end of input".to_string(),
    }
}

/// Parses DSL text into a checked program with constants folded and
/// repeated subexpressions shared.
pub fn parse(text: &str) -> Result<StencilProgram, FrontendError> {
    let toks = lex(text)?;
    Parser { toks, pos: 0, b: ProgramBuilder::new() }.program()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::StencilExpr;

    #[test]
    fn minimal_program() {
        let p = parse("input u; output r = u + 1;").unwrap();
        assert_eq!(p.inputs.len(), 1);
        assert_eq!(p.outputs.len(), 1);
        assert_eq!(p.outputs[0].0, "r");
    }

    #[test]
    fn chained_shifts() {
        let p = parse("input u; output r = im(im(u));").unwrap();
        let r = p.outputs[0].1;
        let StencilExpr::Shift(Shift::Im, inner) = *p.arena.get(r) else { panic!() };
        assert!(matches!(p.arena.get(inner), StencilExpr::Shift(Shift::Im, _)));
    }

    #[test]
    fn precedence_and_folding() {
        // 2*3 folds; (a - b) - c is left associative
        let p = parse("input a weight 3; let k = 2 * 3 / 4; output r = a - k - a * k;").unwrap();
        assert_eq!(p.inputs[0].weight, 3);
        let r = p.outputs[0].1;
        let StencilExpr::Binary(BinOp::Sub, lhs, rhs) = *p.arena.get(r) else { panic!() };
        assert!(matches!(p.arena.get(lhs), StencilExpr::Binary(BinOp::Sub, _, _)));
        assert!(matches!(p.arena.get(rhs), StencilExpr::Binary(BinOp::Mul, _, _)));
        let k = p.lets[0].1;
        assert_eq!(crate::frontend::format_scalar(p.arena.as_const(k).unwrap()), "1.5");
    }

    #[test]
    fn errors() {
        assert!(matches!(parse("input u; output r = v;"), Err(FrontendError::UnknownName { .. })));
        assert!(matches!(
            parse("input u; let z = 1 - 1; output r = u / z;"),
            Err(FrontendError::DivisionByZeroConstant)
        ));
        assert!(matches!(parse("input u output r = u;"), Err(FrontendError::Parse { line: 1, .. })));
        assert!(matches!(parse("input u;\noutput r = u $ 1;"), Err(FrontendError::Parse { line: 2, column: 14, .. })));
        assert!(matches!(parse("input u; input u; output r = u;"), Err(FrontendError::DuplicateName(_))));
        assert!(matches!(parse("input u; output r = 3;"), Err(FrontendError::ConstantOutput(_))));
        assert!(matches!(parse("output r = 3;"), Err(FrontendError::MissingInput)));
        assert!(matches!(parse("input u;"), Err(FrontendError::MissingOutput)));
        assert!(matches!(parse("input im; output r = im;"), Err(FrontendError::Parse { .. })));
        assert!(matches!(parse("input u weight 0; output r = u;"), Err(FrontendError::Parse { .. })));
        assert!(matches!(
            parse("input u; let a = u + 1; output r = a; output s = a * 2;"),
            Err(FrontendError::OutputConsumed(n)) if n == "r"
        ));
    }

    #[test]
    fn comments_are_ignored() {
        let p = parse("# heat\ninput u; // state\noutput r = ip(u) - u; # done\n").unwrap();
        assert_eq!(p.outputs.len(), 1);
    }
}
