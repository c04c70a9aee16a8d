use crate::error::Result;
use crate::symbolic::{name, Domain, SymAction};
use crate::syntax::{Parser, Tok};

use super::Formula;

/// Parses a recHML formula. Names in patterns and conditions that are not
/// bound by an enclosing pattern are values; with a domain they must be
/// declared ports or payloads.
pub fn parse_formula(text: &str, domain: Option<&Domain>) -> Result<Formula> {
    parse_formula_at(text, 1, domain)
}

pub fn parse_formula_at(text: &str, line0: usize, domain: Option<&Domain>) -> Result<Formula> {
    let mut p = Parser::new(text, line0, domain)?;
    let f = or(&mut p)?;
    p.finish()?;
    Ok(f)
}

fn or(p: &mut Parser) -> Result<Formula> {
    let mut parts = vec![and(p)?];
    while p.eat(&Tok::OrOr) {
        parts.push(and(p)?);
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
}

fn and(p: &mut Parser) -> Result<Formula> {
    let mut parts = vec![prefix(p)?];
    while p.eat(&Tok::AndAnd) {
        parts.push(prefix(p)?);
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
}

fn prefix(p: &mut Parser) -> Result<Formula> {
    for (open, close, nec) in [(Tok::LBrack, Tok::RBrack, true), (Tok::LAngle, Tok::RAngle, false)] {
        if p.eat(&open) {
            let (pattern, cond, n) = p.sym_action()?;
            p.expect(&close)?;
            let body = prefix(p);
            p.pop_scope(n);
            let sa = SymAction::new(pattern, cond);
            return Ok(if nec { Formula::nec(sa, body?) } else { Formula::dia(sa, body?) });
        }
    }
    for kw in ["max", "min"] {
        if p.eat_keyword(kw) {
            let x = lvar(p)?;
            p.expect(&Tok::Dot)?;
            let body = or(p)?;
            return Ok(if kw == "max" { Formula::max(&x, body) } else { Formula::min(&x, body) });
        }
    }
    atom(p)
}

fn lvar(p: &mut Parser) -> Result<String> {
    let x = p.ident("a logical variable")?;
    if !x.starts_with(|c: char| c.is_ascii_uppercase()) {
        p.bump_back();
        return Err(p.error(format!("logical variables start with an upper-case letter, found `{x}`")));
    }
    Ok(x)
}

fn atom(p: &mut Parser) -> Result<Formula> {
    if p.eat_keyword("tt") {
        return Ok(Formula::Tt);
    }
    if p.eat_keyword("ff") {
        return Ok(Formula::Ff);
    }
    if p.eat(&Tok::LParen) {
        let f = or(p)?;
        p.expect(&Tok::RParen)?;
        return Ok(f);
    }
    if matches!(p.peek(), Tok::Ident(_)) {
        let x = lvar(p)?;
        return Ok(Formula::Var(name(&x)));
    }
    Err(p.unexpected("a formula"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::symbolic::{Cond, Dir, Pattern, Slot, Term};

    #[test]
    fn phi1_ast() {
        let f = parse_formula("max X.[(x)?req when x!=j]([x!ans]X && [x?req]ff)", None).unwrap();
        let x = name("x");
        let guard = SymAction::new(
            Pattern::new(Slot::Bind(x.clone()), Dir::Input, Slot::Lit(name("req"))),
            Cond::Neq(Term::Var(x.clone()), Term::Val(name("j"))),
        );
        let ans = SymAction::new(Pattern::new(Slot::Var(x.clone()), Dir::Output, Slot::Lit(name("ans"))), Cond::True);
        let req = SymAction::new(Pattern::new(Slot::Var(x.clone()), Dir::Input, Slot::Lit(name("req"))), Cond::True);
        let expected = Formula::max(
            "X",
            Formula::nec(
                guard,
                Formula::And(vec![Formula::nec(ans, Formula::var("X")), Formula::nec(req, Formula::Ff)]),
            ),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn small_forms() {
        assert_eq!(parse_formula("tt", None).unwrap(), Formula::Tt);
        let f = parse_formula("[i?req]ff || [i!ans]ff", None).unwrap();
        assert!(matches!(f, Formula::Or(ref v) if v.len() == 2));
    }

    #[test]
    fn unbound_data_variable_with_domain() {
        let d = Domain::new(["i", "j"], ["req", "ans"]).unwrap();
        let err = parse_formula("[(x)?req][y!ans]ff", Some(&d)).unwrap_err();
        assert!(matches!(err, Error::Parse { ref msg, .. } if msg.contains("`y`")));
        assert!(parse_formula("[(x)?req][x!ans]ff", Some(&d)).is_ok());
        // a bound name leaves scope after its continuation
        assert!(parse_formula("[(x)?req]tt && [x!ans]ff", Some(&d)).is_err());
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_formula("max X.[i?req]\n  ([i!ans]X &&)", None).unwrap_err();
        assert_eq!(err, Error::parse(2, 15, "expected a formula, found `)`"));
    }
}
