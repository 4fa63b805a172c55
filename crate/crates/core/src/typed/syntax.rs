//! `.lamt` surface syntax: the `.lamg` grammar plus
//!
//! ```text
//! type   ::= 'mu' a '.' type | sum ('->' type)?
//! tatom  ::= '1' | '?' | a | '(' type ')'
//! expr   ::= ... | 'let' x '=' expr 'in' expr
//! prefix ::= ... | 'roll' '[' type ']' prefix | 'unroll' prefix
//! atom   ::= ... | '[' ']'
//! ```
//!
//! `?` abbreviates the translation of the dynamic type.

use super::{TTerm, TType};
use crate::elaborate::dyn_type;
use crate::text::{var_name, var_ref, Cursor, ParseError, Scope, Tok};

pub fn parse_ttype(src: &str) -> Result<TType, ParseError> {
    let mut c = Cursor::new(src)?;
    let t = ty(&mut c, &mut Scope::default())?;
    c.finish()?;
    Ok(t)
}

pub fn parse_tterm(src: &str) -> Result<TTerm, ParseError> {
    let mut c = Cursor::new(src)?;
    let t = expr(&mut c, &mut Scope::default())?;
    c.finish()?;
    Ok(t)
}

fn ty(c: &mut Cursor, tvars: &mut Scope) -> Result<TType, ParseError> {
    if c.eat(&Tok::Mu) {
        let a = c.ident()?;
        c.expect(&Tok::Dot)?;
        tvars.push(a);
        let body = ty(c, tvars);
        tvars.pop();
        return Ok(TType::mu(body?));
    }
    let lhs = sum(c, tvars)?;
    if c.eat(&Tok::Arrow) {
        Ok(TType::fun(lhs, ty(c, tvars)?))
    } else {
        Ok(lhs)
    }
}

fn sum(c: &mut Cursor, tvars: &mut Scope) -> Result<TType, ParseError> {
    let lhs = prod(c, tvars)?;
    if c.eat(&Tok::Plus) {
        Ok(TType::sum(lhs, sum(c, tvars)?))
    } else {
        Ok(lhs)
    }
}

fn prod(c: &mut Cursor, tvars: &mut Scope) -> Result<TType, ParseError> {
    let lhs = tatom(c, tvars)?;
    if c.eat(&Tok::Star) {
        Ok(TType::prod(lhs, prod(c, tvars)?))
    } else {
        Ok(lhs)
    }
}

fn tatom(c: &mut Cursor, tvars: &mut Scope) -> Result<TType, ParseError> {
    let pos = c.pos();
    match c.peek().clone() {
        Tok::One => {
            c.bump();
            Ok(TType::Unit)
        }
        Tok::Question => {
            c.bump();
            Ok(dyn_type())
        }
        Tok::Ident(name) => {
            c.bump();
            tvars
                .index_of(&name)
                .map(TType::Var)
                .ok_or_else(|| ParseError::new(pos, format!("unbound type variable `{name}`")))
        }
        Tok::LParen => {
            c.bump();
            let t = ty(c, tvars)?;
            c.expect(&Tok::RParen)?;
            Ok(t)
        }
        _ => Err(c.unexpected("a type")),
    }
}

/// Annotations in terms are closed types.
fn closed_ty(c: &mut Cursor) -> Result<TType, ParseError> {
    ty(c, &mut Scope::default())
}

fn bind<R>(scope: &mut Scope, names: Vec<String>, f: impl FnOnce(&mut Scope) -> R) -> R {
    let n = names.len();
    for name in names {
        scope.push(name);
    }
    let r = f(scope);
    for _ in 0..n {
        scope.pop();
    }
    r
}

fn expr(c: &mut Cursor, scope: &mut Scope) -> Result<TTerm, ParseError> {
    match c.peek() {
        Tok::Fun => {
            c.bump();
            c.expect(&Tok::LParen)?;
            let x = c.ident()?;
            c.expect(&Tok::Colon)?;
            let dom = closed_ty(c)?;
            c.expect(&Tok::RParen)?;
            c.expect(&Tok::Arrow)?;
            let body = bind(scope, vec![x], |s| expr(c, s))?;
            Ok(TTerm::lam(dom, body))
        }
        Tok::Let => {
            c.bump();
            let x = c.ident()?;
            c.expect(&Tok::Equals)?;
            let bound = expr(c, scope)?;
            c.expect(&Tok::In)?;
            let body = bind(scope, vec![x], |s| expr(c, s))?;
            Ok(TTerm::let_in(bound, body))
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
            let body = bind(scope, vec![x, y], |sc| expr(c, sc))?;
            Ok(TTerm::match_pair(s, body))
        }
        Tok::Case => {
            c.bump();
            let s = expr(c, scope)?;
            c.expect(&Tok::Of)?;
            c.expect(&Tok::Inl)?;
            let x = c.ident()?;
            c.expect(&Tok::Arrow)?;
            let left = bind(scope, vec![x], |sc| expr(c, sc))?;
            c.expect(&Tok::Bar)?;
            c.expect(&Tok::Inr)?;
            let y = c.ident()?;
            c.expect(&Tok::Arrow)?;
            let right = bind(scope, vec![y], |sc| expr(c, sc))?;
            Ok(TTerm::case(s, left, right))
        }
        Tok::Err => {
            c.bump();
            c.expect(&Tok::Colon)?;
            Ok(TTerm::Err(closed_ty(c)?))
        }
        _ => app(c, scope),
    }
}

fn starts_prefix(tok: &Tok) -> bool {
    matches!(
        tok,
        Tok::Ident(_) | Tok::LParen | Tok::LBracket | Tok::Inl | Tok::Inr | Tok::Roll | Tok::Unroll
    )
}

fn app(c: &mut Cursor, scope: &mut Scope) -> Result<TTerm, ParseError> {
    let mut f = prefix(c, scope)?;
    while starts_prefix(c.peek()) {
        let a = prefix(c, scope)?;
        f = TTerm::app(f, a);
    }
    Ok(f)
}

fn bracketed_type(c: &mut Cursor) -> Result<TType, ParseError> {
    c.expect(&Tok::LBracket)?;
    let t = closed_ty(c)?;
    c.expect(&Tok::RBracket)?;
    Ok(t)
}

fn prefix(c: &mut Cursor, scope: &mut Scope) -> Result<TTerm, ParseError> {
    match c.peek() {
        Tok::Inl => {
            c.bump();
            let sum = bracketed_type(c)?;
            Ok(TTerm::inl(sum, prefix(c, scope)?))
        }
        Tok::Inr => {
            c.bump();
            let sum = bracketed_type(c)?;
            Ok(TTerm::inr(sum, prefix(c, scope)?))
        }
        Tok::Roll => {
            c.bump();
            let mu = bracketed_type(c)?;
            Ok(TTerm::roll(mu, prefix(c, scope)?))
        }
        Tok::Unroll => {
            c.bump();
            Ok(TTerm::unroll(prefix(c, scope)?))
        }
        _ => atom(c, scope),
    }
}

fn atom(c: &mut Cursor, scope: &mut Scope) -> Result<TTerm, ParseError> {
    let pos = c.pos();
    match c.peek().clone() {
        Tok::Ident(name) => {
            c.bump();
            scope
                .index_of(&name)
                .map(TTerm::Var)
                .ok_or_else(|| ParseError::new(pos, format!("unbound variable `{name}`")))
        }
        Tok::LBracket => {
            c.bump();
            c.expect(&Tok::RBracket)?;
            Ok(TTerm::Hole)
        }
        Tok::LParen => {
            c.bump();
            if c.eat(&Tok::RParen) {
                return Ok(TTerm::Unit);
            }
            let first = expr(c, scope)?;
            if c.eat(&Tok::Comma) {
                let second = expr(c, scope)?;
                c.expect(&Tok::RParen)?;
                Ok(TTerm::pair(first, second))
            } else {
                c.expect(&Tok::RParen)?;
                Ok(first)
            }
        }
        _ => Err(c.unexpected("a term")),
    }
}

// Printing uses the same precedence levels as `.lamg`.

pub(crate) fn print_ttype(t: &TType) -> String {
    let mut out = String::new();
    write_type(&mut out, t, 0, 0, &dyn_type());
    out
}

fn tvar_ref(index: usize, depth: usize) -> String {
    if index < depth {
        format!("a{}", depth - 1 - index)
    } else {
        format!("free_a{}", index - depth)
    }
}

fn write_type(out: &mut String, t: &TType, depth: usize, prec: u8, dynamic: &TType) {
    if t == dynamic {
        return out.push('?');
    }
    let (mine, l, r, op) = match t {
        TType::Unit => return out.push('1'),
        TType::Var(i) => return out.push_str(&tvar_ref(*i, depth)),
        TType::Mu(body) => {
            if prec > 0 {
                out.push('(');
            }
            out.push_str(&format!("mu a{depth}. "));
            write_type(out, body, depth + 1, 0, dynamic);
            if prec > 0 {
                out.push(')');
            }
            return;
        }
        TType::Fun(a, b) => (0, (a, 1), (b, 0), " -> "),
        TType::Sum(a, b) => (1, (a, 2), (b, 1), " + "),
        TType::Prod(a, b) => (2, (a, 3), (b, 2), " * "),
    };
    if prec > mine {
        out.push('(');
    }
    write_type(out, l.0, depth, l.1, dynamic);
    out.push_str(op);
    write_type(out, r.0, depth, r.1, dynamic);
    if prec > mine {
        out.push(')');
    }
}

pub(crate) fn print_tterm(t: &TTerm) -> String {
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

fn write_term(out: &mut String, t: &TTerm, depth: usize, prec: u8) {
    match t {
        TTerm::Var(i) => out.push_str(&var_ref(*i, depth)),
        TTerm::Unit => out.push_str("()"),
        TTerm::Hole => out.push_str("[]"),
        TTerm::Err(ty) => open(out, prec, |out| {
            out.push_str(&format!("err : {ty}"));
        }),
        TTerm::Lam(dom, body) => open(out, prec, |out| {
            out.push_str(&format!("fun ({} : {dom}) -> ", var_name(depth)));
            write_term(out, body, depth + 1, 0);
        }),
        TTerm::Let(bound, body) => open(out, prec, |out| {
            out.push_str(&format!("let {} = ", var_name(depth)));
            write_term(out, bound, depth, 1);
            out.push_str(" in ");
            write_term(out, body, depth + 1, 0);
        }),
        TTerm::MatchPair(s, body) => open(out, prec, |out| {
            out.push_str("match ");
            write_term(out, s, depth, 1);
            out.push_str(&format!(" with ({}, {}) -> ", var_name(depth), var_name(depth + 1)));
            write_term(out, body, depth + 2, 0);
        }),
        TTerm::Case(s, l, r) => open(out, prec, |out| {
            out.push_str("case ");
            write_term(out, s, depth, 1);
            out.push_str(&format!(" of inl {} -> ", var_name(depth)));
            write_term(out, l, depth + 1, 1);
            out.push_str(&format!(" | inr {} -> ", var_name(depth)));
            write_term(out, r, depth + 1, 0);
        }),
        TTerm::App(f, a) => {
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
        TTerm::Roll(_, body) | TTerm::Unroll(body) | TTerm::Inl(_, body) | TTerm::Inr(_, body) => {
            if prec > 2 {
                out.push('(');
            }
            match t {
                TTerm::Roll(ty, _) => out.push_str(&format!("roll [{ty}] ")),
                TTerm::Inl(ty, _) => out.push_str(&format!("inl [{ty}] ")),
                TTerm::Inr(ty, _) => out.push_str(&format!("inr [{ty}] ")),
                _ => out.push_str("unroll "),
            }
            write_term(out, body, depth, 2);
            if prec > 2 {
                out.push(')');
            }
        }
        TTerm::Pair(a, b) => {
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
    fn mu_types_round_trip() {
        let t = parse_ttype("mu a. 1 + (mu b. a * b) -> a").unwrap();
        assert_eq!(parse_ttype(&print_ttype(&t)).unwrap(), t);
        assert_eq!(print_ttype(&t), "mu a0. 1 + (mu a1. a0 * a1) -> a0");
    }

    #[test]
    fn question_mark_is_the_dynamic_translation() {
        assert_eq!(parse_ttype("?").unwrap(), dyn_type());
        assert_eq!(print_ttype(&TType::fun(dyn_type(), TType::Unit)), "? -> 1");
    }

    #[test]
    fn terms_round_trip() {
        let src = "let f = fun (x : ?) -> unroll x in case unroll roll [mu a. 1 + a] inl [1 + (mu a. 1 + a)] () \
                   of inl l -> (f, [], l) | inr r -> err : 1";
        let t = parse_tterm(src);
        assert!(t.is_err(), "triples are not pairs");
        let src = "let f = fun (x : ?) -> unroll x in case unroll roll [mu a. 1 + a] inl [1 + (mu a. 1 + a)] () \
                   of inl l -> (f, ([], l)) | inr r -> err : 1 * 1";
        let t = parse_tterm(src).unwrap();
        assert_eq!(parse_tterm(&print_tterm(&t)).unwrap(), t);
    }

    #[test]
    fn unbound_type_variable() {
        assert!(parse_ttype("mu a. b").is_err());
    }
}
