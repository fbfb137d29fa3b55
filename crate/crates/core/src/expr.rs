//! Closed-form initial data: sums of `a*sin(k*x)` and `a*x*(L-x)` terms.
//!
//! ```text
//! expr  := "0" | term (("+" | "-") term)*
//! term  := [number ["*"]] atom
//! atom  := "sin(" [number ["*"]] "x)" | "x" ["*"] "(L-x)"
//! ```
//!
//! Whitespace is ignored. Both atoms vanish at `x = 0` and `x = L` when `k` is
//! an integer, matching the Dirichlet boundary.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Term {
    Sine { amplitude: f64, wavenumber: f64 },
    Bubble { amplitude: f64 },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct InitialProfile {
    pub terms: Vec<Term>,
}

impl InitialProfile {
    pub fn sine(amplitude: f64, wavenumber: f64) -> Self {
        InitialProfile {
            terms: vec![Term::Sine {
                amplitude,
                wavenumber,
            }],
        }
    }

    pub fn eval(&self, x: f64, length: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| match *t {
                Term::Sine {
                    amplitude,
                    wavenumber,
                } => amplitude * (wavenumber * x).sin(),
                Term::Bubble { amplitude } => amplitude * x * (length - x),
            })
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| match t {
            Term::Sine { amplitude, .. } | Term::Bubble { amplitude } => *amplitude == 0.0,
        })
    }
}

impl fmt::Display for InitialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let (amp, body) = match *t {
                Term::Sine {
                    amplitude,
                    wavenumber,
                } => (amplitude, format!("sin({wavenumber}*x)")),
                Term::Bubble { amplitude } => (amplitude, "x*(L-x)".to_string()),
            };
            if i > 0 {
                f.write_str(if amp < 0.0 { " - " } else { " + " })?;
                write!(f, "{}*{body}", amp.abs())?;
            } else {
                write!(f, "{amp}*{body}")?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            source_name: format!("expression '{}'", self.src),
            line: 1,
            message: format!("{} (at column {})", message.into(), self.pos + 1),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_str(&mut self, s: &str) -> bool {
        let n = s.chars().count();
        if self.chars[self.pos..].iter().take(n).copied().eq(s.chars()) {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat_str(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{s}'")))
        }
    }

    fn number(&mut self) -> Result<Option<f64>> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            let prev = if self.pos > start {
                Some(self.chars[self.pos - 1])
            } else {
                None
            };
            let exponent_sign = (c == '-' || c == '+') && matches!(prev, Some('e' | 'E'));
            if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exponent_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Ok(None);
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map(Some)
            .map_err(|_| self.error(format!("bad number '{text}'")))
    }

    fn term(&mut self, sign: f64) -> Result<Term> {
        let coefficient = self.number()?;
        if coefficient.is_some() {
            self.eat('*');
        }
        let amplitude = sign * coefficient.unwrap_or(1.0);
        if self.eat_str("sin(") {
            let k = self.number()?;
            if k.is_some() {
                self.eat('*');
            }
            self.expect("x)")?;
            Ok(Term::Sine {
                amplitude,
                wavenumber: k.unwrap_or(1.0),
            })
        } else if self.eat('x') {
            self.eat('*');
            self.expect("(L-x)")?;
            Ok(Term::Bubble { amplitude })
        } else if coefficient == Some(0.0) {
            Ok(Term::Bubble { amplitude: 0.0 })
        } else {
            Err(self.error("expected 'sin(' or 'x*(L-x)'"))
        }
    }
}

impl FromStr for InitialProfile {
    type Err = Error;

    fn from_str(src: &str) -> Result<Self> {
        let chars: Vec<char> = src.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = Parser { src, chars, pos: 0 };
        if p.chars.is_empty() {
            return Err(p.error("empty expression"));
        }
        let mut terms = Vec::new();
        let mut sign = if p.eat('-') {
            -1.0
        } else {
            p.eat('+');
            1.0
        };
        loop {
            let term = p.term(sign)?;
            if !matches!(term, Term::Bubble { amplitude } if amplitude == 0.0) {
                terms.push(term);
            }
            if p.eat('+') {
                sign = 1.0;
            } else if p.eat('-') {
                sign = -1.0;
            } else if p.peek().is_none() {
                break;
            } else {
                return Err(p.error("unexpected character"));
            }
        }
        Ok(InitialProfile { terms })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn parses_reference_data() {
        let z0: InitialProfile = "sin(x)".parse().unwrap();
        let z1: InitialProfile = "sin(2*x)".parse().unwrap();
        assert_eq!(z0, InitialProfile::sine(1.0, 1.0));
        assert_eq!(z1, InitialProfile::sine(1.0, 2.0));
        assert!((z1.eval(PI / 4.0, PI) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parses_sums_and_bubbles() {
        let p: InitialProfile = " -0.5 * sin(3x) + 2x(L-x) - 1e-1*x*(L-x)".parse().unwrap();
        assert_eq!(
            p.terms,
            vec![
                Term::Sine { amplitude: -0.5, wavenumber: 3.0 },
                Term::Bubble { amplitude: 2.0 },
                Term::Bubble { amplitude: -0.1 },
            ]
        );
        let x = 1.0;
        let expected = -0.5 * 3.0f64.sin() + 1.9 * x * (PI - x);
        assert!((p.eval(x, PI) - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_is_empty_sum() {
        let p: InitialProfile = "0".parse().unwrap();
        assert!(p.terms.is_empty());
        assert!(p.is_zero());
        assert_eq!(p.eval(1.3, PI), 0.0);
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "cos(x)", "sin(x", "x*(L+x)", "sin(x)*2", "1.2.3*sin(x)", "3"] {
            assert!(bad.parse::<InitialProfile>().is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn display_round_trips() {
        let p: InitialProfile = "0.25*sin(2*x) - 3*x*(L-x)".parse().unwrap();
        let again: InitialProfile = p.to_string().parse().unwrap();
        assert_eq!(p, again);
    }
}
