//! `.lamg` surface syntax.
//!
//! ```text
//! type  ::= sum ('->' type)?
//! sum   ::= prod ('+' sum)?
//! prod  ::= tatom ('*' prod)?
//! tatom ::= '?' | '1' | '(' type ')'
//!
//! expr  ::= 'fun' '(' x ':' type ')' '->' expr
//!         | 'match' expr 'with' '(' x ',' y ')' '->' expr
//!         | 'case' expr 'of' 'inl' x '->' expr '|' 'inr' y '->' expr
//!         | 'err' ':' type
//!         | app
//! app   ::= prefix prefix*
//! prefix::= '<' type '=>' type '>' prefix
//!         | 'inl' '[' type ']' prefix | 'inr' '[' type ']' prefix
//!         | atom
//! atom  ::= x | '(' ')' | '(' expr ')' | '(' expr ',' expr ')'
//! ```
//!
//! The annotation on `inl`/`inr` is the whole sum type. `#` starts a line comment.

use super::{GTerm, GType};
use crate::text::{var_name, var_ref, Cursor, ParseError, Scope, Tok};

pub fn parse_type(src: &str) -> Result<GType, ParseError> {
    let mut c = Cursor::new(src)?;
    let ty = ty(&mut c)?;
    c.finish()?;
    Ok(ty)
}

/// Parses a closed `.lamg` term.
pub fn parse_term(src: &str) -> Result<GTerm, ParseError> {
    let mut c = Cursor::new(src)?;
    let mut scope = Scope::default();
    let t = expr(&mut c, &mut scope)?;
    c.finish()?;
    Ok(t)
}

pub(crate) fn ty(c: &mut Cursor) -> Result<GType, ParseError> {
    let lhs = sum(c)?;
    if c.eat(&Tok::Arrow) {
        Ok(GType::fun(lhs, ty(c)?))
    } else {
        Ok(lhs)
    }
}

fn sum(c: &mut Cursor) -> Result<GType, ParseError> {
    let lhs = prod(c)?;
    if c.eat(&Tok::Plus) {
        Ok(GType::sum(lhs, sum(c)?))
    } else {
        Ok(lhs)
    }
}

fn prod(c: &mut Cursor) -> Result<GType, ParseError> {
    let lhs = tatom(c)?;
    if c.eat(&Tok::Star) {
        Ok(GType::prod(lhs, prod(c)?))
    } else {
        Ok(lhs)
    }
}

fn tatom(c: &mut Cursor) -> Result<GType, ParseError> {
    match c.peek() {
        Tok::Question => {
            c.bump();
            Ok(GType::Dyn)
        }
        Tok::One => {
            c.bump();
            Ok(GType::Unit)
        }
        Tok::LParen => {
            c.bump();
            let t = ty(c)?;
            c.expect(&Tok::RParen)?;
            Ok(t)
        }
        _ => Err(c.unexpected("a type")),
    }
}

fn expr(c: &mut Cursor, scope: &mut Scope) -> Result<GTerm, ParseError> {
    match c.peek() {
        Tok::Fun => {
            c.bump();
            c.expect(&Tok::LParen)?;
            let x = c.ident()?;
            c.expect(&Tok::Colon)?;
            let dom = ty(c)?;
            c.expect(&Tok::RParen)?;
            c.expect(&Tok::Arrow)?;
            scope.push(x);
            let body = expr(c, scope);
            scope.pop();
            Ok(GTerm::lam(dom, body?))
        }
        Tok::Match => {
            c.bump();
            let s = expr(c, scope)?;
            c.expect(&Tok::With)?;
            c.expect(&Tok::LParen)?;
            let x = c.ident()?;
            c.expect(&Tok::Comma)?;
            let y = c.ident()?;
            c.expect(&Tok::RParen)?;
            c.expect(&Tok::Arrow)?;
            scope.push(x);
            scope.push(y);
            let body = expr(c, scope);
            scope.pop();
            scope.pop();
            Ok(GTerm::match_pair(s, body?))
        }
        Tok::Case => {
            c.bump();
            let s = expr(c, scope)?;
            c.expect(&Tok::Of)?;
            c.expect(&Tok::Inl)?;
            let x = c.ident()?;
            c.expect(&Tok::Arrow)?;
            scope.push(x);
            let left = expr(c, scope);
            scope.pop();
            let left = left?;
            c.expect(&Tok::Bar)?;
            c.expect(&Tok::Inr)?;
            let y = c.ident()?;
            c.expect(&Tok::Arrow)?;
            scope.push(y);
            let right = expr(c, scope);
            scope.pop();
            Ok(GTerm::case(s, left, right?))
        }
        Tok::Err => {
            c.bump();
            c.expect(&Tok::Colon)?;
            Ok(GTerm::Err(ty(c)?))
        }
        _ => app(c, scope),
    }
}

fn starts_prefix(tok: &Tok) -> bool {
    matches!(tok, Tok::Ident(_) | Tok::LParen | Tok::Lt | Tok::Inl | Tok::Inr)
}

fn app(c: &mut Cursor, scope: &mut Scope) -> Result<GTerm, ParseError> {
    let mut f = prefix(c, scope)?;
    while starts_prefix(c.peek()) {
        let a = prefix(c, scope)?;
        f = GTerm::app(f, a);
    }
    Ok(f)
}

fn prefix(c: &mut Cursor, scope: &mut Scope) -> Result<GTerm, ParseError> {
    match c.peek() {
        Tok::Lt => {
            c.bump();
            let from = ty(c)?;
            c.expect(&Tok::FatArrow)?;
            let to = ty(c)?;
            c.expect(&Tok::Gt)?;
            Ok(GTerm::cast(from, to, prefix(c, scope)?))
        }
        Tok::Inl | Tok::Inr => {
            let left = c.bump() == Tok::Inl;
            c.expect(&Tok::LBracket)?;
            let sum = ty(c)?;
            c.expect(&Tok::RBracket)?;
            let body = prefix(c, scope)?;
            Ok(if left { GTerm::inl(sum, body) } else { GTerm::inr(sum, body) })
        }
        _ => atom(c, scope),
    }
}

fn atom(c: &mut Cursor, scope: &mut Scope) -> Result<GTerm, ParseError> {
    let pos = c.pos();
    match c.peek().clone() {
        Tok::Ident(name) => {
            c.bump();
            scope
                .index_of(&name)
                .map(GTerm::Var)
                .ok_or_else(|| ParseError::new(pos, format!("unbound variable `{name}`")))
        }
        Tok::LParen => {
            c.bump();
            if c.eat(&Tok::RParen) {
                return Ok(GTerm::Unit);
            }
            let first = expr(c, scope)?;
            if c.eat(&Tok::Comma) {
                let second = expr(c, scope)?;
                c.expect(&Tok::RParen)?;
                Ok(GTerm::pair(first, second))
            } else {
                c.expect(&Tok::RParen)?;
                Ok(first)
            }
        }
        _ => Err(c.unexpected("a term")),
    }
}

// Printing. Term precedence: 0 any, 1 application, 2 prefix operand, 3 atom.

pub(crate) fn print_type(t: &GType) -> String {
    let mut out = String::new();
    write_type(&mut out, t, 0);
    out
}

fn write_type(out: &mut String, t: &GType, prec: u8) {
    let (mine, l, r, op) = match t {
        GType::Dyn => return out.push('?'),
        GType::Unit => return out.push('1'),
        GType::Fun(a, b) => (0, (a, 1), (b, 0), " -> "),
        GType::Sum(a, b) => (1, (a, 2), (b, 1), " + "),
        GType::Prod(a, b) => (2, (a, 3), (b, 2), " * "),
    };
    if prec > mine {
        out.push('(');
    }
    write_type(out, l.0, l.1);
    out.push_str(op);
    write_type(out, r.0, r.1);
    if prec > mine {
        out.push(')');
    }
}

pub(crate) fn print_term(t: &GTerm) -> String {
    let mut out = String::new();
    write_term(&mut out, t, 0, 0);
    out
}

fn open(out: &mut String, prec: u8, f: impl FnOnce(&mut String)) {
    if prec > 0 {
        out.push('(');
    }
    f(out);
    if prec > 0 {
        out.push(')');
    }
}

fn write_term(out: &mut String, t: &GTerm, depth: usize, prec: u8) {
    match t {
        GTerm::Var(i) => out.push_str(&var_ref(*i, depth)),
        GTerm::Unit => out.push_str("()"),
        GTerm::Err(ty) => open(out, prec, |out| {
            out.push_str("err : ");
            out.push_str(&print_type(ty));
        }),
        GTerm::Lam(dom, body) => open(out, prec, |out| {
            out.push_str(&format!("fun ({} : {}) -> ", var_name(depth), print_type(dom)));
            write_term(out, body, depth + 1, 0);
        }),
        GTerm::MatchPair(s, body) => open(out, prec, |out| {
            out.push_str("match ");
            write_term(out, s, depth, 1);
            out.push_str(&format!(" with ({}, {}) -> ", var_name(depth), var_name(depth + 1)));
            write_term(out, body, depth + 2, 0);
        }),
        GTerm::Case(s, l, r) => open(out, prec, |out| {
            out.push_str("case ");
            write_term(out, s, depth, 1);
            out.push_str(&format!(" of inl {} -> ", var_name(depth)));
            write_term(out, l, depth + 1, 1);
            out.push_str(&format!(" | inr {} -> ", var_name(depth)));
            write_term(out, r, depth + 1, 0);
        }),
        GTerm::App(f, a) => {
            if prec > 1 {
                out.push('(');
            }
            write_term(out, f, depth, 1);
            out.push(' ');
            write_term(out, a, depth, 2);
            if prec > 1 {
                out.push(')');
            }
        }
        GTerm::Cast(_, _, body) | GTerm::Inl(_, body) | GTerm::Inr(_, body) => {
            if prec > 2 {
                out.push('(');
            }
            match t {
                GTerm::Cast(from, to, _) => {
                    out.push_str(&format!("<{} => {}> ", print_type(from), print_type(to)))
                }
                GTerm::Inl(sum, _) => out.push_str(&format!("inl [{}] ", print_type(sum))),
                GTerm::Inr(sum, _) => out.push_str(&format!("inr [{}] ", print_type(sum))),
                _ => unreachable!(),
            }
            write_term(out, body, depth, 2);
            if prec > 2 {
                out.push(')');
            }
        }
        GTerm::Pair(a, b) => {
            out.push('(');
            write_term(out, a, depth, 0);
            out.push_str(", ");
            write_term(out, b, depth, 0);
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type_precedence() {
        let t = parse_type("1 * ? + 1 -> ? -> 1").unwrap();
        assert_eq!(
            t,
            GType::fun(
                GType::sum(GType::prod(GType::Unit, GType::Dyn), GType::Unit),
                GType::fun(GType::Dyn, GType::Unit)
            )
        );
        assert_eq!(print_type(&t), "1 * ? + 1 -> ? -> 1");
        let nested = GType::prod(GType::fun(GType::Unit, GType::Unit), GType::Dyn);
        assert_eq!(print_type(&nested), "(1 -> 1) * ?");
    }

    #[test]
    fn parses_all_forms() {
        let src = "match ((), <1 => ?> ()) with (a, b) -> \
                   case inl [1 + ?] a of inl l -> (fun (z : ?) -> z) b | inr r -> r";
        let t = parse_term(src).unwrap();
        let printed = print_term(&t);
        assert_eq!(parse_term(&printed).unwrap(), t);
    }

    #[test]
    fn cast_binds_tighter_than_application() {
        let t = parse_term("fun (f : ?) -> <? => ? -> ?> f f").unwrap();
        let GTerm::Lam(_, body) = t else { panic!() };
        assert!(matches!(*body, GTerm::App(ref f, _) if matches!(**f, GTerm::Cast(..))));
    }

    #[test]
    fn nested_case_in_left_branch_round_trips() {
        let inner = GTerm::case(
            GTerm::inl(GType::sum(GType::Unit, GType::Unit), GTerm::Unit),
            GTerm::Var(0),
            GTerm::Var(1),
        );
        let outer = GTerm::case(
            GTerm::inl(GType::sum(GType::Unit, GType::Unit), GTerm::Unit),
            inner,
            GTerm::Unit,
        );
        assert_eq!(parse_term(&print_term(&outer)).unwrap(), outer);
    }

    #[test]
    fn unbound_variable_is_reported_with_position() {
        let err = parse_term("fun (x : 1) ->\n  y").unwrap_err();
        assert_eq!((err.pos.line, err.pos.col), (2, 3));
    }

    #[test]
    fn err_needs_ascription() {
        assert_eq!(parse_term("err : 1 -> 1").unwrap(), GTerm::Err(GType::fun(GType::Unit, GType::Unit)));
        assert!(parse_term("err").is_err());
        assert_eq!(parse_term("℧ : ?").unwrap(), GTerm::Err(GType::Dyn));
    }
}
