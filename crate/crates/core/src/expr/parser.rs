use crate::error::{Error, Location, Result};
use crate::numeric::Value;

use super::ast::Expr;
use super::lexer::{tokenize, Cursor, Tok};

const START: Location = Location { line: 1, column: 1 };

/// Parses an sg-polynomial expression, accepting any identifier as a term.
pub fn parse(text: &str) -> Result<Expr> {
    parse_at(text, START, &|_| true)
}

/// Parses an expression whose terms must all satisfy `known`; others are
/// reported as [`Error::UnknownIdentifier`].
pub fn parse_with_terms(text: &str, known: &dyn Fn(&str) -> bool) -> Result<Expr> {
    parse_at(text, START, known)
}

/// Like [`parse_with_terms`], with positions reported relative to `origin`.
pub fn parse_at(text: &str, origin: Location, known: &dyn Fn(&str) -> bool) -> Result<Expr> {
    let mut cur = Cursor::new(tokenize(text, origin)?);
    let e = expr(&mut cur, known)?;
    cur.expect_eof()?;
    Ok(e)
}

pub(crate) fn expr(cur: &mut Cursor, known: &dyn Fn(&str) -> bool) -> Result<Expr> {
    let mut acc = term(cur, known)?;
    loop {
        if cur.eat(&Tok::Plus) {
            acc = acc + term(cur, known)?;
        } else if cur.eat(&Tok::Minus) {
            acc = acc - term(cur, known)?;
        } else {
            return Ok(acc);
        }
    }
}

fn term(cur: &mut Cursor, known: &dyn Fn(&str) -> bool) -> Result<Expr> {
    let mut acc = factor(cur, known)?;
    while cur.eat(&Tok::Star) {
        acc = acc * factor(cur, known)?;
    }
    Ok(acc)
}

fn factor(cur: &mut Cursor, known: &dyn Fn(&str) -> bool) -> Result<Expr> {
    let tok = cur.peek().clone();
    match tok.tok {
        Tok::Int(v) => {
            cur.bump();
            Ok(Expr::Const(v))
        }
        Tok::Minus => {
            cur.bump();
            Ok(match factor(cur, known)? {
                Expr::Const(v) => Expr::Const(-v),
                e => Expr::Const(Value::from(-1)) * e,
            })
        }
        Tok::LParen => {
            cur.bump();
            let e = expr(cur, known)?;
            cur.expect(&Tok::RParen, "to close `(`")?;
            Ok(e)
        }
        Tok::Ident(name) if name == "sg" => {
            cur.bump();
            cur.expect(&Tok::LParen, "after `sg`")?;
            let e = expr(cur, known)?;
            cur.expect(&Tok::RParen, "to close `sg(`")?;
            Ok(Expr::sg(e))
        }
        Tok::Ident(name) => {
            if !known(&name) {
                return Err(Error::UnknownIdentifier {
                    name,
                    location: tok.at,
                });
            }
            cur.bump();
            Ok(Expr::Term(name))
        }
        _ => Err(cur.unexpected("expected an operand")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(n: &str) -> Expr {
        Expr::term(n)
    }

    #[test]
    fn grammar_examples() {
        assert_eq!(
            parse("sg(x) * y + 3").unwrap(),
            Expr::sg(t("x")) * t("y") + Expr::constant(3)
        );
        assert_eq!(parse("x - -2").unwrap(), t("x") - Expr::constant(-2));
        assert!(matches!(parse("sg x"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            parse("a - b - c").unwrap(),
            (t("a") - t("b")) - t("c")
        );
        assert_eq!(
            parse("a + b * c").unwrap(),
            t("a") + t("b") * t("c")
        );
        assert_eq!(parse("-x").unwrap(), Expr::constant(-1) * t("x"));
        assert_eq!(parse("0b101").unwrap(), Expr::constant(5));
        assert_eq!(parse("f.0 * h.p2").unwrap(), t("f.0") * t("h.p2"));
    }

    #[test]
    fn errors_carry_positions() {
        match parse("x +\n  * y") {
            Err(Error::Syntax { location, .. }) => assert_eq!(location, Location { line: 2, column: 3 }),
            other => panic!("unexpected {other:?}"),
        }
        match parse_with_terms("x + q", &|n| n == "x") {
            Err(Error::UnknownIdentifier { name, location }) => {
                assert_eq!(name, "q");
                assert_eq!(location.column, 5);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("(x").is_err());
        assert!(parse("x y").is_err());
        assert!(parse("").is_err());
        assert!(parse("sg(x").is_err());
        assert!(parse("12a").is_err());
    }
}
