//! Line-oriented text form of an [`OperatorPoly`]:
//!
//! ```text
//! 1e0 0e0 0 0 : ad(s) a(s)
//! 1e0 0e0 0 0 : I
//! ```
//!
//! Each line is `re im gain gain_conj : word`. Floats use Rust's shortest
//! round-trip exponent form, so parsing a serialized poly reproduces it bit
//! for bit and a canonical poly always serializes to the same bytes.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_complex::Complex64;

use super::{GainDegree, LadderKind, LadderOp, ModeId, OperatorPoly, OperatorWord};
use crate::error::{Error, Result};

fn canonical_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

impl OperatorPoly {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (word, degree, c) in self.terms() {
            writeln!(
                out,
                "{:e} {:e} {} {} : {}",
                canonical_zero(c.re),
                canonical_zero(c.im),
                degree.gain,
                degree.gain_conj,
                word
            )
            .expect("writing to a String cannot fail");
        }
        out
    }

    /// Parses the text form. Blank lines and `#` comments are ignored;
    /// repeated terms are summed.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            terms.push(parse_line(line).map_err(|message| Error::Parse {
                line: idx + 1,
                message,
            })?);
        }
        Ok(OperatorPoly::from_terms(terms))
    }
}

fn parse_line(line: &str) -> std::result::Result<(OperatorWord, GainDegree, Complex64), String> {
    let (head, word) = line
        .split_once(':')
        .ok_or_else(|| "missing ':' separator".to_string())?;
    let fields: Vec<&str> = head.split_whitespace().collect();
    let [re, im, d, dc] = fields[..] else {
        return Err(format!("expected 4 header fields, found {}", fields.len()));
    };
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| format!("bad number {s:?}: {e}"))
    };
    let deg = |s: &str| {
        s.parse::<u32>()
            .map_err(|e| format!("bad degree {s:?}: {e}"))
    };
    let coeff = Complex64::new(num(re)?, num(im)?);
    let degree = GainDegree::new(deg(d)?, deg(dc)?);
    Ok((parse_word(word.trim())?, degree, coeff))
}

fn parse_word(text: &str) -> std::result::Result<OperatorWord, String> {
    if text == "I" {
        return Ok(OperatorWord::identity());
    }
    text.split_whitespace().map(parse_op).collect()
}

fn parse_op(token: &str) -> std::result::Result<LadderOp, String> {
    let (kind, rest) = if let Some(rest) = token.strip_prefix("ad(") {
        (LadderKind::Create, rest)
    } else if let Some(rest) = token.strip_prefix("a(") {
        (LadderKind::Annihilate, rest)
    } else {
        return Err(format!("bad operator {token:?}"));
    };
    let label = rest
        .strip_suffix(')')
        .ok_or_else(|| format!("unterminated operator {token:?}"))?;
    let mode = ModeId::new(label).map_err(|e| e.to_string())?;
    Ok(LadderOp { mode, kind })
}

impl fmt::Display for OperatorPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for OperatorPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OperatorPoly::parse_text(s)
    }
}
