//! Surface syntax for correlators.
//!
//! ```text
//! correlator := term (WS term)*
//! term       := "tau" "[" fields "]" ("^" INT)?
//! fields     := field ("," field)*
//! field      := ("u" | "m" | "c") "=" INT
//! ```
//!
//! Omitted fields are 0 and `^k` repeats a term `k` times, so
//! `tau[c=3]^5 tau[m=1,c=2]` is `<tau_0(3)^5 tau_0^1(2)>`. `r` and `d` are
//! supplied separately.

use crate::correlator::{Correlator, Insertion};
use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { offset, message: message.into() })
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, literal: &str) -> Result<()> {
        if self.src[self.pos..].starts_with(literal.as_bytes()) {
            self.pos += literal.len();
            Ok(())
        } else {
            self.err(self.pos, format!("expected {literal:?}"))
        }
    }

    fn skip_ws(&mut self) -> bool {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        self.pos > start
    }

    fn int(&mut self) -> Result<u32> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            return self.err(start, "negative integers are not allowed");
        }
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err(start, "expected an integer");
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match digits.parse::<u32>() {
            Ok(v) => Ok(v),
            Err(_) => self.err(start, format!("integer {digits} is out of range")),
        }
    }

    fn term(&mut self, out: &mut Vec<Insertion>) -> Result<()> {
        self.expect("tau")?;
        self.expect("[")?;
        let mut ins = Insertion::default();
        let mut seen = [false; 3];
        loop {
            let at = self.pos;
            let slot = match self.peek() {
                Some(b'u') => 0,
                Some(b'm') => 1,
                Some(b'c') => 2,
                _ => return self.err(at, "expected field name u, m or c"),
            };
            if seen[slot] {
                return self.err(at, "field given twice");
            }
            seen[slot] = true;
            self.pos += 1;
            self.expect("=")?;
            let v = self.int()?;
            match slot {
                0 => ins.u = v,
                1 => ins.m = v,
                _ => ins.c = v,
            }
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b']') => {
                    self.pos += 1;
                    break;
                }
                _ => return self.err(self.pos, "expected ',' or ']'"),
            }
        }
        let mut repeat = 1;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let at = self.pos;
            repeat = self.int()?;
            if repeat == 0 {
                return self.err(at, "repetition count must be positive");
            }
        }
        out.extend(std::iter::repeat_n(ins, repeat as usize));
        Ok(())
    }
}

/// Parses the insertion list; stability is not checked here.
pub fn parse_insertions(text: &str) -> Result<Vec<Insertion>> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let mut out = Vec::new();
    p.skip_ws();
    p.term(&mut out)?;
    loop {
        let had_ws = p.skip_ws();
        if p.peek().is_none() {
            return Ok(out);
        }
        if !had_ws {
            return p.err(p.pos, "expected whitespace between terms");
        }
        p.term(&mut out)?;
    }
}

pub fn parse_correlator(text: &str, r: u32, d: u32) -> Result<Correlator> {
    Correlator::new(r, d, parse_insertions(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn offset(text: &str) -> usize {
        match parse_insertions(text) {
            Err(Error::Parse { offset, .. }) => offset,
            other => panic!("expected a parse error for {text:?}, got {other:?}"),
        }
    }

    #[test]
    fn tangent_at_line_integrand() {
        let c = parse_correlator("tau[c=3]^5 tau[m=1,c=2]", 3, 3).unwrap();
        let mut expected = vec![Insertion::eta(3); 5];
        expected.push(Insertion::new(0, 1, 2));
        assert_eq!(c.insertions(), &expected[..]);
        assert_eq!((c.r(), c.d()), (3, 3));
    }

    #[test]
    fn stability_is_separate() {
        assert_eq!(parse_insertions("tau[u=1]").unwrap(), vec![Insertion::new(1, 0, 0)]);
        assert!(matches!(parse_correlator("tau[u=1]", 2, 0), Err(Error::InvalidCorrelator(_))));
    }

    #[test]
    fn syntax_errors() {
        assert_eq!(offset("tau[x=1]"), 4);
        assert_eq!(offset("tau[c=-1]"), 6);
        assert_eq!(offset("tau[c=2]^0"), 9);
        assert_eq!(offset("tau[c=2]tau[c=2]"), 8);
        assert_eq!(offset("tau[]"), 4);
        assert_eq!(offset("tau[c=1,c=2]"), 8);
        assert_eq!(offset("tau[c=99999999999]"), 6);
        assert_eq!(offset(""), 0);
        assert_eq!(offset("tau[c=2"), 7);
    }

    #[test]
    fn whitespace_and_defaults() {
        let ins = parse_insertions("  tau[u=2,c=1]\ttau[m=1]^2  ").unwrap();
        assert_eq!(ins, vec![Insertion::new(2, 0, 1), Insertion::new(0, 1, 0), Insertion::new(0, 1, 0)]);
    }

    proptest! {
        #[test]
        fn display_round_trips(ins in prop::collection::vec((0u32..5, 0u32..5, 0u32..5), 1..8)) {
            let ins: Vec<Insertion> = ins.into_iter().map(|(u, m, c)| Insertion::new(u, m, c)).collect();
            let text: Vec<String> = ins.iter().map(|i| i.to_string()).collect();
            prop_assert_eq!(parse_insertions(&text.join(" ")).unwrap(), ins);
        }
    }
}
