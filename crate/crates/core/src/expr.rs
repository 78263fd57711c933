//! A small expression language for candidate operations.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('^' factor)*
//! factor := rational '*' factor | '-' factor | atom ('*' factor)?
//! atom   := 'd' '(' expr ')' | 'w' INT | 'x' INT | '(' expr ')'
//! rational := '-'? INT ('/' INT)?
//! ```
//!
//! `^` is the wedge product; `atom * factor` is a wedge too, which is how a
//! coordinate function multiplies a form (`x1 * d(w1)`). Indices are 1-based.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::classifier::{NaturalOp, Signature};
use crate::error::{Error, Result};
use crate::form::DiffForm;
use crate::poly::Poly;
use crate::scalar::{self, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprNode {
    FormVar(usize),
    Coord(usize),
    D(Box<ExprNode>),
    Wedge(Box<ExprNode>, Box<ExprNode>),
    Add(Box<ExprNode>, Box<ExprNode>),
    Scale(Scalar, Box<ExprNode>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Slash,
    Star,
    Caret,
    Plus,
    Minus,
    LParen,
    RParen,
    D,
    W(usize),
    X(usize),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let digits = |i: &mut usize| -> String {
        let start = *i;
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            *i += 1;
        }
        chars[start..*i].iter().collect()
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = i;
        let single = match c {
            '/' => Some(Tok::Slash),
            '*' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            out.push((pos, t));
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let d = digits(&mut i);
            out.push((pos, Tok::Int(d.parse().unwrap())));
        } else if c == 'w' || c == 'x' {
            i += 1;
            let d = digits(&mut i);
            let n: usize = d
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| Error::Parse {
                    pos,
                    msg: format!("expected a positive index after '{c}'"),
                })?;
            out.push((pos, if c == 'w' { Tok::W(n) } else { Tok::X(n) }));
        } else if c == 'd' {
            out.push((pos, Tok::D));
            i += 1;
        } else {
            return Err(Error::Parse {
                pos,
                msg: format!("unknown token '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.at + 1).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.len, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&want) {
            self.at += 1;
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<ExprNode> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.at += 1;
                    let rhs = self.term()?;
                    lhs = ExprNode::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.at += 1;
                    let rhs = self.term()?;
                    lhs = ExprNode::Add(
                        Box::new(lhs),
                        Box::new(ExprNode::Scale(-Scalar::one(), Box::new(rhs))),
                    );
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ExprNode> {
        let mut lhs = self.factor()?;
        while self.peek() == Some(&Tok::Caret) {
            self.at += 1;
            let rhs = self.factor()?;
            lhs = ExprNode::Wedge(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn rational(&mut self) -> Result<Scalar> {
        let negative = if self.peek() == Some(&Tok::Minus) {
            self.at += 1;
            true
        } else {
            false
        };
        let Some(Tok::Int(n)) = self.bump() else {
            self.at -= 1;
            return self.error("expected an integer");
        };
        let mut value = BigRational::from_integer(n);
        if self.peek() == Some(&Tok::Slash) {
            self.at += 1;
            match self.bump() {
                Some(Tok::Int(d)) if !d.is_zero() => value /= BigRational::from_integer(d),
                _ => {
                    self.at -= 1;
                    return self.error("expected a non-zero denominator");
                }
            }
        }
        Ok(if negative { -value } else { value })
    }

    fn factor(&mut self) -> Result<ExprNode> {
        let starts_rational = match self.peek() {
            Some(Tok::Int(_)) => true,
            Some(Tok::Minus) => matches!(self.peek2(), Some(Tok::Int(_))),
            _ => false,
        };
        if starts_rational {
            let c = self.rational()?;
            self.expect(Tok::Star, "'*' after a coefficient")?;
            let inner = self.factor()?;
            return Ok(ExprNode::Scale(c, Box::new(inner)));
        }
        if self.peek() == Some(&Tok::Minus) {
            self.at += 1;
            let inner = self.factor()?;
            return Ok(ExprNode::Scale(-Scalar::one(), Box::new(inner)));
        }
        let atom = self.atom()?;
        if self.peek() == Some(&Tok::Star) {
            self.at += 1;
            let rhs = self.factor()?;
            return Ok(ExprNode::Wedge(Box::new(atom), Box::new(rhs)));
        }
        Ok(atom)
    }

    fn atom(&mut self) -> Result<ExprNode> {
        match self.bump() {
            Some(Tok::D) => {
                self.expect(Tok::LParen, "'(' after 'd'")?;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(ExprNode::D(Box::new(inner)))
            }
            Some(Tok::W(i)) => Ok(ExprNode::FormVar(i)),
            Some(Tok::X(j)) => Ok(ExprNode::Coord(j)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(_) => {
                self.at -= 1;
                self.error("expected 'd(', 'w<i>', 'x<j>' or '('")
            }
            None => self.error("unexpected end of input"),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<ExprNode> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        len: text.chars().count(),
    };
    let e = p.expr()?;
    if p.at < p.toks.len() {
        return p.error("unexpected trailing input");
    }
    Ok(e)
}

impl fmt::Display for ExprNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(e: &ExprNode, paren: bool) -> String {
            if paren {
                format!("({e})")
            } else {
                e.to_string()
            }
        }
        use ExprNode::*;
        match self {
            FormVar(i) => write!(f, "w{i}"),
            Coord(j) => write!(f, "x{j}"),
            D(e) => write!(f, "d({e})"),
            Wedge(l, r) => write!(
                f,
                "{} ^ {}",
                wrap(l, matches!(**l, Add(..))),
                wrap(r, matches!(**r, Add(..) | Wedge(..)))
            ),
            Add(l, r) => write!(f, "{} + {}", l, wrap(r, matches!(**r, Add(..)))),
            Scale(c, e) => write!(
                f,
                "{} * {}",
                scalar::render(c),
                wrap(e, matches!(**e, Add(..) | Wedge(..)))
            ),
        }
    }
}

impl ExprNode {
    /// Grade of the value, checking indices and sum compatibility.
    pub fn grade(&self, sig: &Signature) -> Result<usize> {
        use ExprNode::*;
        match self {
            FormVar(i) => sig
                .source_degrees()
                .get(i.wrapping_sub(1))
                .map(|&p| p as usize)
                .ok_or_else(|| {
                    Error::Bind(format!("w{i} is out of range for {} input forms", sig.k()))
                }),
            Coord(_) => Ok(0),
            D(e) => Ok(e.grade(sig)? + 1),
            Wedge(l, r) => Ok(l.grade(sig)? + r.grade(sig)?),
            Add(l, r) => {
                let (a, b) = (l.grade(sig)?, r.grade(sig)?);
                if a != b {
                    return Err(Error::Bind(format!("cannot add a {a}-form and a {b}-form")));
                }
                Ok(a)
            }
            Scale(_, e) => e.grade(sig),
        }
    }

    /// Coordinates beyond the ambient dimension evaluate to zero.
    pub fn eval(&self, dim: usize, forms: &[DiffForm]) -> Result<DiffForm> {
        use ExprNode::*;
        match self {
            FormVar(i) => Ok(forms[i - 1].clone()),
            Coord(j) => Ok(if *j <= dim {
                DiffForm::function(Poly::var(dim, j - 1))
            } else {
                DiffForm::zero(dim, 0)
            }),
            D(e) => Ok(e.eval(dim, forms)?.ext_d()),
            Wedge(l, r) => l.eval(dim, forms)?.wedge(&r.eval(dim, forms)?),
            Add(l, r) => l.eval(dim, forms)?.try_add(&r.eval(dim, forms)?),
            Scale(c, e) => Ok(e.eval(dim, forms)?.scale(c)),
        }
    }
}

/// An expression bound to a signature.
#[derive(Clone, Debug)]
pub struct BoundExpr {
    expr: ExprNode,
    sig: Signature,
}

impl BoundExpr {
    pub fn expr(&self) -> &ExprNode {
        &self.expr
    }
}

pub fn bind(expr: ExprNode, sig: &Signature) -> Result<BoundExpr> {
    let g = expr.grade(sig)?;
    if g != sig.q() {
        return Err(Error::Bind(format!(
            "expression has degree {g}, target degree is {}",
            sig.q()
        )));
    }
    Ok(BoundExpr {
        expr,
        sig: sig.clone(),
    })
}

impl NaturalOp for BoundExpr {
    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn apply(&self, dim: usize, forms: &[DiffForm]) -> Result<DiffForm> {
        self.sig.check_inputs(dim, forms)?;
        self.expr.eval(dim, forms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{check_naturality, decompose, DecomposeOptions, NaturalityOptions};
    use proptest::prelude::*;
    use ExprNode::*;

    fn bx(e: ExprNode) -> Box<ExprNode> {
        Box::new(e)
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_expr("d(w1)").unwrap(), D(bx(FormVar(1))));
        assert_eq!(
            parse_expr("w1 ^ d(w1)").unwrap(),
            Wedge(bx(FormVar(1)), bx(D(bx(FormVar(1)))))
        );
        assert_eq!(
            parse_expr("x1 * d(w1)").unwrap(),
            Wedge(bx(Coord(1)), bx(D(bx(FormVar(1)))))
        );
        assert_eq!(
            parse_expr(" 3/2*w1 -w2").unwrap(),
            Add(
                bx(Scale(scalar::frac(3, 2), bx(FormVar(1)))),
                bx(Scale(scalar::int(-1), bx(FormVar(2))))
            )
        );
    }

    #[test]
    fn parse_errors_carry_positions() {
        assert_eq!(
            parse_expr("d(w1").unwrap_err(),
            Error::Parse {
                pos: 4,
                msg: "expected ')'".into()
            }
        );
        assert!(matches!(
            parse_expr("w1 $ w2"),
            Err(Error::Parse { pos: 3, .. })
        ));
        assert!(matches!(parse_expr("w0"), Err(Error::Parse { pos: 0, .. })));
        assert!(matches!(
            parse_expr("2 w1"),
            Err(Error::Parse { pos: 2, .. })
        ));
        assert!(matches!(
            parse_expr("w1 w2"),
            Err(Error::Parse { pos: 3, .. })
        ));
        assert!(matches!(parse_expr("1/0 * w1"), Err(Error::Parse { .. })));
    }

    #[test]
    fn bind_checks_grades() {
        let s = Signature::new(vec![1], 2).unwrap();
        assert!(bind(parse_expr("d(w1)").unwrap(), &s).is_ok());
        assert!(matches!(
            bind(parse_expr("w1 + d(w1)").unwrap(), &s),
            Err(Error::Bind(_))
        ));
        assert!(matches!(
            bind(parse_expr("w2").unwrap(), &s),
            Err(Error::Bind(_))
        ));
        assert!(matches!(
            bind(parse_expr("w1").unwrap(), &s),
            Err(Error::Bind(_))
        ));
    }

    #[test]
    fn bound_expressions_behave() {
        let s = Signature::new(vec![1], 2).unwrap();
        let d = bind(parse_expr("d(w1)").unwrap(), &s).unwrap();
        let w = DiffForm::term(&Poly::var(3, 0) * &Poly::var(3, 2), &[1]).unwrap();
        assert_eq!(d.apply(3, std::slice::from_ref(&w)).unwrap(), w.ext_d());

        let s2 = Signature::new(vec![1, 1], 2).unwrap();
        let wedge = bind(parse_expr("w1 ^ w2").unwrap(), &s2).unwrap();
        let v = DiffForm::dx(3, 2);
        assert_eq!(
            wedge.apply(3, &[w.clone(), v.clone()]).unwrap(),
            w.wedge(&v).unwrap()
        );

        let s4 = Signature::new(vec![1], 4).unwrap();
        let dd = bind(parse_expr("d(w1) ^ d(w1)").unwrap(), &s4).unwrap();
        let w4 = &DiffForm::term(Poly::var(4, 0), &[1]).unwrap()
            + &DiffForm::term(Poly::var(4, 2), &[3]).unwrap();
        let dw = w4.ext_d();
        assert_eq!(dd.apply(4, &[w4]).unwrap(), dw.wedge(&dw).unwrap());
        assert_eq!(
            decompose(&dd, &DecomposeOptions::default())
                .unwrap()
                .poly
                .to_string(),
            "v1^2"
        );
    }

    #[test]
    fn coordinate_candidate_is_rejected() {
        let s = Signature::new(vec![1], 2).unwrap();
        let op = bind(parse_expr("x1 * d(w1)").unwrap(), &s).unwrap();
        let opts = NaturalityOptions {
            trials: 10,
            seed: 7,
            ..Default::default()
        };
        assert!(!check_naturality(&op, &opts).unwrap().is_pass());
    }

    fn arb_expr() -> impl Strategy<Value = ExprNode> {
        let leaf = prop_oneof![(1usize..4).prop_map(FormVar), (1usize..4).prop_map(Coord)];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| D(Box::new(e))),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Wedge(Box::new(l), Box::new(r))),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Add(Box::new(l), Box::new(r))),
                (-5i64..5, 1i64..4, inner)
                    .prop_map(|(n, d, e)| Scale(scalar::frac(n, d), Box::new(e))),
            ]
        })
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(e in arb_expr()) {
            let text = e.to_string();
            prop_assert_eq!(parse_expr(&text).unwrap(), e, "{}", text);
        }
    }
}
