//! Precedence-climbing parser for the expression grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := postfix ('^' unary)?
//! postfix := primary '\''*
//! primary := integer | ident | ident '(' args ')' | '(' expr ')'
//! ```
//!
//! Calls are `exp(e)`, `ln(e)`, `f(x)` (an abstract function of `x`) and
//! `D(f, v1, v2, ...)` where each `v` is `x` or, when enabled, the time
//! variable. A bare identifier that is differentiated anywhere in the input
//! is read as a function of `x` everywhere in it.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::{Atom, Expr, ExprError, FuncAtom, Rational, Symbol, TimeDeriv, SPACE_VAR};

/// Parser settings.
#[derive(Clone, Debug, Default)]
pub struct ParseOptions {
    /// Time variable accepted inside `D(u, t, ...)`.
    pub time: Option<Symbol>,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ExprError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Int(s.parse().expect("digits")),
                line: l0,
                column: c0,
            });
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: l0,
                column: c0,
            });
            continue;
        }
        if "+-*/^(),'".contains(c) {
            out.push(Token {
                tok: Tok::Op(c),
                line: l0,
                column: c0,
            });
            i += 1;
            col += 1;
            continue;
        }
        return Err(ExprError::Syntax {
            line: l0,
            column: c0,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    opts: &'a ParseOptions,
    differentiated: BTreeSet<Symbol>,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, t: &Token, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            line: t.line,
            column: t.column,
            message: message.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        let t = self.next();
        if t.tok == Tok::Op(c) {
            Ok(())
        } else {
            self.syntax(&t, format!("expected `{c}`"))
        }
    }

    fn at_op(&self, c: char) -> bool {
        self.peek().tok == Tok::Op(c)
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.at_op('+') {
                self.next();
                acc += self.term()?;
            } else if self.at_op('-') {
                self.next();
                acc -= &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.at_op('*') {
                self.next();
                acc = acc * self.unary()?;
            } else if self.at_op('/') {
                let t = self.next();
                let d = self.unary()?;
                acc = match acc.checked_div(&d) {
                    Ok(e) => e,
                    Err(_) => return self.syntax(&t, "division by zero"),
                };
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.at_op('-') {
            self.next();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.postfix()?;
        if !self.at_op('^') {
            return Ok(base);
        }
        let t = self.next();
        let exp = self.unary()?;
        let k = exp
            .to_rational()
            .filter(|q| q.is_integer())
            .and_then(|q| q.to_integer().to_i32());
        let Some(k) = k else {
            return self.syntax(&t, "exponent must be an integer constant");
        };
        match base.pow(k) {
            Ok(e) => Ok(e),
            Err(_) => self.syntax(&t, "zero raised to a negative power"),
        }
    }

    fn postfix(&mut self) -> Result<Expr, ExprError> {
        let mut e = self.primary()?;
        while self.at_op('\'') {
            let t = self.next();
            let f = match (e.as_symbol(), e.as_func()) {
                (Some(s), _) => FuncAtom {
                    name: s.clone(),
                    order: 0,
                    time: None,
                },
                (_, Some(f)) => f.clone(),
                _ => return self.syntax(&t, "prime applied to something other than a function"),
            };
            self.differentiated.insert(f.name.clone());
            e = Expr::func_atom(FuncAtom {
                order: f.order + 1,
                ..f
            });
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let t = self.next();
        match t.tok.clone() {
            Tok::Int(n) => Ok(Expr::rational(Rational::from_integer(n))),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if !self.at_op('(') {
                    return Ok(Expr::symbol(&name));
                }
                self.next();
                match name.as_str() {
                    "exp" => {
                        let a = self.expr()?;
                        self.expect(')')?;
                        Ok(a.exp())
                    }
                    "ln" => {
                        let a = self.expr()?;
                        self.expect(')')?;
                        match a.ln() {
                            Ok(e) => Ok(e),
                            Err(_) => self.syntax(&t, "logarithm of zero"),
                        }
                    }
                    "D" => self.derivative(&t),
                    _ => {
                        let v = self.next();
                        if v.tok != Tok::Ident(SPACE_VAR.to_string()) {
                            return self.syntax(
                                &v,
                                format!("`{name}(...)` must be applied to `{SPACE_VAR}`"),
                            );
                        }
                        self.expect(')')?;
                        self.differentiated.insert(Symbol::new(&name));
                        Ok(Expr::func(&name, 0))
                    }
                }
            }
            Tok::End => self.syntax(&t, "unexpected end of input"),
            Tok::Op(c) => self.syntax(&t, format!("unexpected `{c}`")),
        }
    }

    fn derivative(&mut self, at: &Token) -> Result<Expr, ExprError> {
        let ft = self.next();
        let Tok::Ident(fname) = ft.tok.clone() else {
            return self.syntax(&ft, "D expects a function name");
        };
        // Optional `(x)` after the name.
        if self.at_op('(') {
            self.next();
            let v = self.next();
            if v.tok != Tok::Ident(SPACE_VAR.to_string()) {
                return self.syntax(&v, format!("expected `{SPACE_VAR}`"));
            }
            self.expect(')')?;
        }
        let mut x_order = 0u32;
        let mut t_order = 0u32;
        while self.at_op(',') {
            self.next();
            let v = self.next();
            let Tok::Ident(var) = v.tok.clone() else {
                return self.syntax(&v, "expected a differentiation variable");
            };
            if var == SPACE_VAR {
                x_order += 1;
            } else if self.opts.time.as_ref().is_some_and(|t| t.as_str() == var) {
                t_order += 1;
            } else {
                return Err(ExprError::UnknownDerivative {
                    line: v.line,
                    column: v.column,
                    message: format!("cannot differentiate in `{var}`"),
                });
            }
        }
        self.expect(')')?;
        if x_order == 0 && t_order == 0 {
            return Err(ExprError::UnknownDerivative {
                line: at.line,
                column: at.column,
                message: "D needs at least one variable".into(),
            });
        }
        let name = Symbol::new(&fname);
        self.differentiated.insert(name.clone());
        let time = (t_order > 0).then(|| TimeDeriv {
            var: self.opts.time.clone().unwrap(),
            order: t_order,
        });
        Ok(Expr::func_atom(FuncAtom {
            name,
            order: x_order,
            time,
        }))
    }
}

/// Parses `text` into canonical form.
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    parse_with(text, &ParseOptions::default())
}

/// Parses `text` with explicit options.
pub fn parse_with(text: &str, opts: &ParseOptions) -> Result<Expr, ExprError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        opts,
        differentiated: BTreeSet::new(),
    };
    let e = p.expr()?;
    let t = p.peek().clone();
    if t.tok != Tok::End {
        return p.syntax(&t, "unexpected trailing input");
    }
    if p.differentiated.is_empty() {
        return Ok(e);
    }
    let funcs = p.differentiated;
    e.map_atoms(&mut |a: &Atom| match a {
        Atom::Sym(s) if funcs.contains(s) => Ok(Some(Expr::func_atom(FuncAtom {
            name: s.clone(),
            order: 0,
            time: None,
        }))),
        _ => Ok(None),
    })
}
