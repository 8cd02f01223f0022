//! Command-line function specs.
//!
//! ```text
//! spec   := json | trig { "@" name } | name { "@" name }
//! trig   := ["+"|"-"] term { ("+"|"-") term }
//! term   := [num ["*"]] ("cos"|"sin") "(" [num ["*"]] "t" ")" | num
//! num    := factor { "*" factor }
//! factor := decimal | "pi" | "sqrt" decimal | "sqrt(" decimal ")"
//! ```
//!
//! Names are the decaying perturbations `inv_quad` (`1/(1+t^2)`),
//! `inv_abs` (`1/(1+|t|)`), `exp_abs` (`e^{-|t|}`) and `zero`.

use crate::apfun::{FunctionHandle, TrigPoly};
use crate::error::{Error, Result};

pub const PERTURBATIONS: [&str; 4] = ["inv_quad", "inv_abs", "exp_abs", "zero"];

fn perturbation(name: &str) -> Result<FunctionHandle> {
    Ok(match name {
        "inv_quad" => FunctionHandle::scalar(|t| 1.0 / (1.0 + t * t)).with_sup_bound(1.0),
        "inv_abs" => FunctionHandle::scalar(|t| 1.0 / (1.0 + t.abs()))
            .with_sup_bound(1.0)
            .with_breaks(vec![0.0]),
        "exp_abs" => FunctionHandle::scalar(|t| (-t.abs()).exp())
            .with_sup_bound(1.0)
            .with_breaks(vec![0.0]),
        "zero" => FunctionHandle::zero(1),
        _ => {
            return Err(Error::FunctionSpec(format!(
                "unknown function {name:?}; expected one of {}",
                PERTURBATIONS.join(", ")
            )))
        }
    })
}

/// Parsed spec: an optional polynomial part plus named ergodic parts.
#[derive(Debug, Clone)]
pub struct FunctionSpec {
    pub text: String,
    pub poly: Option<TrigPoly>,
    pub perturbations: Vec<String>,
}

impl FunctionSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(Error::FunctionSpec("empty function spec".into()));
        }
        if trimmed.starts_with('{') {
            let poly: TrigPoly = serde_json::from_str(trimmed)?;
            return Ok(FunctionSpec {
                text: trimmed.into(),
                poly: Some(poly),
                perturbations: Vec::new(),
            });
        }
        let mut parts = trimmed.split('@').map(str::trim);
        let head = parts.next().unwrap_or_default();
        let mut perturbations: Vec<String> = parts.map(String::from).collect();
        let poly = if PERTURBATIONS.contains(&head) {
            perturbations.insert(0, head.to_string());
            None
        } else {
            Some(parse_trig(head)?)
        };
        for p in &perturbations {
            perturbation(p)?;
        }
        Ok(FunctionSpec {
            text: trimmed.into(),
            poly,
            perturbations,
        })
    }

    /// The polynomial when there is no ergodic part.
    pub fn trig(&self) -> Option<&TrigPoly> {
        if self.perturbations.is_empty() {
            self.poly.as_ref()
        } else {
            None
        }
    }

    /// Sum of the named parts, if any.
    pub fn ergodic_part(&self) -> Result<Option<FunctionHandle>> {
        let mut acc: Option<FunctionHandle> = None;
        for p in &self.perturbations {
            let h = perturbation(p)?;
            acc = Some(match acc {
                Some(a) => a.add(&h)?,
                None => h,
            });
        }
        Ok(acc)
    }

    pub fn handle(&self) -> Result<FunctionHandle> {
        let base = self.poly.as_ref().map(TrigPoly::to_handle);
        Ok(match (base, self.ergodic_part()?) {
            (Some(b), Some(e)) => b.add(&e)?,
            (Some(b), None) => b,
            (None, Some(e)) => e,
            (None, None) => FunctionHandle::zero(1),
        })
    }
}

struct Lexer<'a> {
    s: &'a [u8],
    pos: usize,
    text: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            s: text.as_bytes(),
            pos: 0,
            text,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn rest(&mut self) -> &'a str {
        self.skip_ws();
        &self.text[self.pos..]
    }

    fn eat(&mut self, tok: &str) -> bool {
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(&format!("expected {tok:?}")))
        }
    }

    fn error(&mut self, msg: &str) -> Error {
        let at = self.pos;
        Error::FunctionSpec(format!("{msg} at offset {at} in {:?}", self.text))
    }

    fn decimal(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < self.s.len() && matches!(self.s[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.s.len() && matches!(self.s[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = save;
            }
        }
        self.text[start..self.pos]
            .parse()
            .map_err(|_| {
                self.pos = start;
                self.error("expected a number")
            })
    }

    fn starts_factor(&mut self) -> bool {
        let r = self.rest();
        r.starts_with("pi") || r.starts_with("sqrt") || r.starts_with(|c: char| c.is_ascii_digit() || c == '.')
    }

    fn factor(&mut self) -> Result<f64> {
        if self.eat("pi") {
            Ok(std::f64::consts::PI)
        } else if self.eat("sqrt") {
            let v = if self.eat("(") {
                let v = self.decimal()?;
                self.expect(")")?;
                v
            } else {
                self.decimal()?
            };
            Ok(v.sqrt())
        } else {
            self.decimal()
        }
    }

    /// `factor { "*" factor }`, leaving a `*` that precedes `t` or a
    /// trig call for the caller.
    fn number(&mut self) -> Result<f64> {
        let mut v = self.factor()?;
        loop {
            let save = self.pos;
            if self.eat("*") && self.starts_factor() {
                v *= self.factor()?;
            } else {
                self.pos = save;
                return Ok(v);
            }
        }
    }
}

/// Comma-separated numbers in the `num` syntax, e.g. `0, 1, sqrt2`.
pub fn parse_number_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let mut lx = Lexer::new(item);
            let neg = lx.eat("-");
            let v = lx.number()?;
            if lx.peek().is_some() {
                return Err(lx.error("trailing input"));
            }
            Ok(if neg { -v } else { v })
        })
        .collect()
}

/// Real trigonometric polynomial `c + sum a cos(l t) + sum b sin(l t)`.
pub fn parse_trig(text: &str) -> Result<TrigPoly> {
    let mut lx = Lexer::new(text);
    let (mut c, mut cos, mut sin) = (0.0, Vec::new(), Vec::new());
    let mut first = true;
    loop {
        let sign = if lx.eat("+") {
            1.0
        } else if lx.eat("-") {
            -1.0
        } else if first {
            1.0
        } else if lx.peek().is_none() {
            break;
        } else {
            return Err(lx.error("expected '+' or '-'"));
        };
        first = false;
        let coeff = if lx.starts_factor() {
            let v = lx.number()?;
            lx.eat("*");
            Some(v)
        } else {
            None
        };
        let kind = if lx.eat("cos") {
            Some(true)
        } else if lx.eat("sin") {
            Some(false)
        } else {
            None
        };
        match (kind, coeff) {
            (Some(is_cos), coeff) => {
                lx.expect("(")?;
                let lambda = if lx.starts_factor() {
                    let v = lx.number()?;
                    lx.eat("*");
                    v
                } else {
                    1.0
                };
                lx.expect("t")?;
                lx.expect(")")?;
                let a = sign * coeff.unwrap_or(1.0);
                if is_cos {
                    cos.push((a, lambda));
                } else {
                    sin.push((a, lambda));
                }
            }
            (None, Some(v)) => c += sign * v,
            (None, None) => return Err(lx.error("expected a number, cos or sin")),
        }
        if lx.peek().is_none() {
            break;
        }
    }
    Ok(TrigPoly::real(c, &cos, &sin))
}
