use thiserror::Error;

use crate::{Polynomial, Variables};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("unexpected character `{ch}` at byte {pos}")]
    UnexpectedChar { ch: char, pos: usize },
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected token at byte {0}")]
    UnexpectedToken(usize),
    #[error("invalid number `{0}`")]
    BadNumber(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("exponent must be a nonnegative integer at byte {0}")]
    BadExponent(usize),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(s: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((Tok::Plus, i));
                i += 1
            }
            '-' => {
                out.push((Tok::Minus, i));
                i += 1
            }
            '*' => {
                out.push((Tok::Star, i));
                i += 1
            }
            '^' => {
                out.push((Tok::Caret, i));
                i += 1
            }
            '(' => {
                out.push((Tok::LParen, i));
                i += 1
            }
            ')' => {
                out.push((Tok::RParen, i));
                i += 1
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &s[start..i];
                let v: f64 = text.parse().map_err(|_| ParseError::BadNumber(text.to_string()))?;
                out.push((Tok::Num(v, text.to_string()), start));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(s[start..i].to_string()), start));
            }
            other => return Err(ParseError::UnexpectedChar { ch: other, pos: i }),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a Variables,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(usize::MAX, |(_, p)| *p)
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                -self.term()?
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.pos += 1;
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let at = self.offset();
            match self.toks.get(self.pos) {
                Some((Tok::Num(_, text), _)) => {
                    let e: u32 = text.parse().map_err(|_| ParseError::BadExponent(at))?;
                    self.pos += 1;
                    return Ok(base.pow(e));
                }
                Some(_) => return Err(ParseError::BadExponent(at)),
                None => return Err(ParseError::UnexpectedEnd),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial, ParseError> {
        let at = self.offset();
        let tok = self.toks.get(self.pos).map(|(t, _)| t.clone()).ok_or(ParseError::UnexpectedEnd)?;
        self.pos += 1;
        match tok {
            Tok::Num(v, _) => Ok(Polynomial::constant(self.vars.clone(), v)),
            Tok::Ident(name) => match self.vars.iter().position(|v| *v == name) {
                Some(i) => Ok(Polynomial::var(self.vars.clone(), i)),
                None => Err(ParseError::UnknownVariable(name)),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    Some(_) => Err(ParseError::UnexpectedToken(self.offset())),
                    None => Err(ParseError::UnexpectedEnd),
                }
            }
            Tok::Minus => Ok(-self.factor()?),
            _ => Err(ParseError::UnexpectedToken(at)),
        }
    }
}

/// Parses infix text such as `3*b1^2 - b1*b2 + 0.5` over the given variables.
pub fn parse_polynomial(text: &str, vars: &Variables) -> Result<Polynomial, ParseError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(ParseError::UnexpectedEnd);
    }
    let mut p = Parser { toks, pos: 0, vars };
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(ParseError::UnexpectedToken(p.offset()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variables;

    #[test]
    fn parses_term_syntax() {
        let v = variables(&["b1", "b2", "b3"]);
        let p = parse_polynomial("2*b1^2*b2 - b3 + 0.5", &v).unwrap();
        assert_eq!(p.eval(&[1.0, 2.0, 3.0]).unwrap(), 4.0 - 3.0 + 0.5);
        let q = parse_polynomial(" b1 +b2-0.5 ", &v).unwrap();
        assert_eq!(q.eval(&[0.2, 0.2, 0.6]).unwrap(), 0.2 + 0.2 - 0.5);
        assert_eq!(parse_polynomial("-(b1 - 1)^2", &v).unwrap().eval(&[3.0, 0.0, 0.0]).unwrap(), -4.0);
        assert_eq!(parse_polynomial("1e-3*b1", &v).unwrap().eval(&[2.0, 0.0, 0.0]).unwrap(), 2e-3);
    }

    #[test]
    fn rejects_bad_input() {
        let v = variables(&["b1"]);
        assert_eq!(parse_polynomial("b7", &v), Err(ParseError::UnknownVariable("b7".into())));
        assert!(parse_polynomial("b1 +", &v).is_err());
        assert!(parse_polynomial("b1^0.5", &v).is_err());
        assert!(parse_polynomial("", &v).is_err());
        assert!(parse_polynomial("b1 $", &v).is_err());
    }

    #[test]
    fn display_round_trip() {
        let v = variables(&["b1", "b2"]);
        let p = parse_polynomial("0.1*b1^3 - 2.5e-7*b1*b2 + 1/3", &v);
        assert!(p.is_err(), "division is not part of the syntax");
        let p = parse_polynomial("0.1*b1^3 - 2.5e-7*b1*b2 + 0.3333333333333333 - b2", &v).unwrap();
        let q = parse_polynomial(&p.to_string(), &v).unwrap();
        assert_eq!(p, q);
    }
}
