use num_bigint::BigInt;

use super::{Decimal, WeightExpr};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Decimal),
    Int(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(d) => format!("number {d}"),
            Tok::Int(s) => format!("number {s}"),
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn syntax(offset: usize, expected: &[&str], found: &Tok) -> Error {
    Error::Syntax {
        offset,
        expected: expected.iter().map(|s| s.to_string()).collect(),
        found: found.describe(),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((i, Tok::Plus)),
            b'-' => out.push((i, Tok::Minus)),
            b'*' => out.push((i, Tok::Star)),
            b'^' => out.push((i, Tok::Caret)),
            b'(' => out.push((i, Tok::LParen)),
            b')' => out.push((i, Tok::RParen)),
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let int_part = &text[start..i];
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    let frac_start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if frac_start == i {
                        return Err(Error::Syntax {
                            offset: i,
                            expected: vec!["digit".into()],
                            found: describe_byte(text, i),
                        });
                    }
                    let frac = &text[frac_start..i];
                    let mantissa: BigInt = format!("{int_part}{frac}").parse().expect("digits");
                    out.push((start, Tok::Num(Decimal::new(mantissa, frac.len() as u32))));
                } else {
                    out.push((start, Tok::Int(int_part.to_string())));
                }
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                return Err(Error::Syntax {
                    offset: i,
                    expected: vec!["token".into()],
                    found: describe_byte(text, i),
                })
            }
        }
        i += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

fn describe_byte(text: &str, i: usize) -> String {
    text[i..]
        .chars()
        .next()
        .map(|c| format!("{c:?}"))
        .unwrap_or_else(|| "end of input".into())
}

const ATOM_START: &[&str] = &["number", "x", "abs", "exp", "'('"];

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, label: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.offset(), &[label], self.peek()))
        }
    }

    fn expr(&mut self) -> Result<WeightExpr> {
        let mut acc = if *self.peek() == Tok::Minus {
            self.bump();
            WeightExpr::negate(self.term()?)
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = WeightExpr::sum(acc, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = WeightExpr::sum(acc, WeightExpr::negate(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<WeightExpr> {
        let mut acc = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = WeightExpr::product(acc, self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<WeightExpr> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let off = self.offset();
        match self.bump() {
            Tok::Int(s) => {
                let n: u32 = s.parse().map_err(|_| Error::Syntax {
                    offset: off,
                    expected: vec!["exponent below 2^32".into()],
                    found: format!("number {s}"),
                })?;
                Ok(WeightExpr::pow(base, n))
            }
            other => Err(syntax(off, &["nonnegative integer"], &other)),
        }
    }

    fn atom(&mut self) -> Result<WeightExpr> {
        let off = self.offset();
        match self.bump() {
            Tok::Num(d) => Ok(WeightExpr::Const(d)),
            Tok::Int(s) => Ok(WeightExpr::Const(Decimal::new(s.parse::<BigInt>().expect("digits"), 0))),
            Tok::Ident(name) => match name.as_str() {
                "x" | "t" => Ok(WeightExpr::X),
                "abs" | "exp" => {
                    self.expect(Tok::LParen, "'('")?;
                    let inner = self.expr()?;
                    self.expect(Tok::RParen, "')'")?;
                    Ok(if name == "abs" {
                        WeightExpr::abs(inner)
                    } else {
                        WeightExpr::exp(inner)
                    })
                }
                _ => Err(syntax(off, ATOM_START, &Tok::Ident(name))),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            other => Err(syntax(off, ATOM_START, &other)),
        }
    }
}

/// Parse a weight expression. Whitespace is ignored.
pub fn parse_weight(text: &str) -> Result<WeightExpr> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    if *p.peek() == Tok::End {
        return Err(syntax(0, ATOM_START, &Tok::End));
    }
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.offset(), &["'+'", "'-'", "'*'", "'^'", "end of input"], p.peek()));
    }
    Ok(e)
}
