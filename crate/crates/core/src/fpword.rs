//! Reduced words in the free product pi1(W) = G1 * ... * Gk * F(x1..xl).
//!
//! Text format: whitespace-separated letters. `a.b^-1@2` is the element
//! `a.b^-1` of factor 2, `x1` and `x1^-1` are handle letters, and `e` is the
//! empty word. `g2` with no `@` abbreviates the first generator of factor 2.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::group::GroupElem;
use crate::manifold::Manifold;

/// A letter of pi1(W). Factor indices and handle indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FpLetter {
    Factor(usize, GroupElem),
    Handle { j: usize, inv: bool },
}

impl FpLetter {
    pub fn x(j: usize) -> Self {
        FpLetter::Handle { j, inv: false }
    }

    pub fn x_inv(j: usize) -> Self {
        FpLetter::Handle { j, inv: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FPWord {
    letters: Vec<FpLetter>,
}

fn check_letter(m: &Manifold, letter: &FpLetter) -> Result<()> {
    match letter {
        FpLetter::Factor(i, g) => {
            m.check_summand(*i)?;
            if !m.summand_type(*i).pi1().contains(g) {
                return Err(Error::Oracle(format!("element is not in factor {i}")));
            }
        }
        FpLetter::Handle { j, .. } => m.check_handle(*j)?,
    }
    Ok(())
}

/// Appends one letter, merging or cancelling against the last one.
fn push(m: &Manifold, out: &mut Vec<FpLetter>, letter: FpLetter) {
    match (out.last(), &letter) {
        (Some(FpLetter::Factor(i, a)), FpLetter::Factor(i2, b)) if i == i2 => {
            let oracle = m.summand_type(*i).pi1();
            let c = oracle.mul(a, b);
            let i = *i;
            out.pop();
            if !oracle.is_identity(&c) {
                out.push(FpLetter::Factor(i, c));
            }
        }
        (Some(FpLetter::Handle { j, inv }), FpLetter::Handle { j: j2, inv: inv2 })
            if j == j2 && inv != inv2 =>
        {
            out.pop();
        }
        (_, FpLetter::Factor(i, g)) if m.summand_type(*i).pi1().is_identity(g) => {}
        _ => out.push(letter),
    }
}

/// Canonical reduced form of a raw letter sequence.
pub fn fp_reduce(m: &Manifold, raw: impl IntoIterator<Item = FpLetter>) -> Result<FPWord> {
    let mut out = Vec::new();
    for letter in raw {
        check_letter(m, &letter)?;
        push(m, &mut out, letter);
    }
    Ok(FPWord { letters: out })
}

impl FPWord {
    pub fn empty() -> Self {
        FPWord::default()
    }

    pub fn letters(&self) -> &[FpLetter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Letters are assumed valid for `m`.
    pub(crate) fn from_valid(m: &Manifold, raw: impl IntoIterator<Item = FpLetter>) -> Self {
        let mut out = Vec::new();
        for letter in raw {
            push(m, &mut out, letter);
        }
        FPWord { letters: out }
    }

    /// Wraps letters that are already reduced.
    pub(crate) fn from_reduced(letters: Vec<FpLetter>) -> Self {
        FPWord { letters }
    }

    pub fn letter(m: &Manifold, letter: FpLetter) -> Self {
        Self::from_valid(m, [letter])
    }

    pub fn concat(&self, m: &Manifold, other: &FPWord) -> FPWord {
        let mut out = self.letters.clone();
        for l in &other.letters {
            push(m, &mut out, l.clone());
        }
        FPWord { letters: out }
    }

    pub fn inverse(&self, m: &Manifold) -> FPWord {
        FPWord {
            letters: self
                .letters
                .iter()
                .rev()
                .map(|l| match l {
                    FpLetter::Factor(i, g) => {
                        FpLetter::Factor(*i, m.summand_type(*i).pi1().inv(g))
                    }
                    FpLetter::Handle { j, inv } => FpLetter::Handle { j: *j, inv: !inv },
                })
                .collect(),
        }
    }

    /// `c^-1 . self . c`
    pub fn conjugate(&self, m: &Manifold, c: &FPWord) -> FPWord {
        c.inverse(m).concat(m, self).concat(m, c)
    }

    /// Replaces every letter by a word and reduces.
    pub fn substitute(&self, m: &Manifold, mut f: impl FnMut(&FpLetter) -> FPWord) -> FPWord {
        let mut out = Vec::new();
        for l in &self.letters {
            for x in f(l).letters {
                push(m, &mut out, x);
            }
        }
        FPWord { letters: out }
    }

    pub fn uses_factor(&self, i: usize) -> bool {
        self.letters
            .iter()
            .any(|l| matches!(l, FpLetter::Factor(i2, _) if *i2 == i))
    }

    pub fn uses_handle(&self, j: usize) -> bool {
        self.letters
            .iter()
            .any(|l| matches!(l, FpLetter::Handle { j: j2, .. } if *j2 == j))
    }

    /// Handle letters in order, as `(j, inverted)`.
    pub fn handle_letters(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.letters.iter().filter_map(|l| match l {
            FpLetter::Handle { j, inv } => Some((*j, *inv)),
            FpLetter::Factor(..) => None,
        })
    }

    pub fn parse(m: &Manifold, text: &str) -> Result<FPWord> {
        let text = text.trim();
        if text == "e" || text.is_empty() {
            return Ok(FPWord::empty());
        }
        let mut raw = Vec::new();
        for tok in text.split_whitespace() {
            parse_token(m, tok, &mut raw)?;
        }
        fp_reduce(m, raw)
    }

    pub fn format(&self, m: &Manifold) -> String {
        if self.letters.is_empty() {
            return "e".to_string();
        }
        let mut out = String::new();
        for (n, l) in self.letters.iter().enumerate() {
            if n > 0 {
                out.push(' ');
            }
            match l {
                FpLetter::Factor(i, g) => {
                    let _ = write!(out, "{}@{i}", m.summand_type(*i).pi1().format_elem(g));
                }
                FpLetter::Handle { j, inv: false } => {
                    let _ = write!(out, "x{j}");
                }
                FpLetter::Handle { j, inv: true } => {
                    let _ = write!(out, "x{j}^-1");
                }
            }
        }
        out
    }
}

fn bad(tok: &str) -> Error {
    Error::InvalidWord(format!("bad path letter `{tok}`"))
}

fn parse_token(m: &Manifold, tok: &str, raw: &mut Vec<FpLetter>) -> Result<()> {
    if let Some((elem, factor)) = tok.rsplit_once('@') {
        let i: usize = factor.parse().map_err(|_| bad(tok))?;
        m.check_summand(i)?;
        let g = m.summand_type(i).pi1().parse_elem(elem)?;
        raw.push(FpLetter::Factor(i, g));
        return Ok(());
    }
    if let Some(rest) = tok.strip_prefix('x') {
        let (j, exp) = match rest.split_once('^') {
            Some((j, e)) => (j, e.parse::<i64>().map_err(|_| bad(tok))?),
            None => (rest, 1),
        };
        let j: usize = j.parse().map_err(|_| bad(tok))?;
        m.check_handle(j)?;
        for _ in 0..exp.unsigned_abs() {
            raw.push(FpLetter::Handle { j, inv: exp < 0 });
        }
        return Ok(());
    }
    if let Some(rest) = tok.strip_prefix('g') {
        let (i, exp) = match rest.split_once('^') {
            Some((i, e)) => (i, e.parse::<i64>().map_err(|_| bad(tok))?),
            None => (rest, 1),
        };
        let i: usize = i.parse().map_err(|_| bad(tok))?;
        m.check_summand(i)?;
        let pi1 = m.summand_type(i).pi1();
        if pi1.rank() == 0 {
            return Err(Error::InvalidWord(format!("factor {i} has no generators")));
        }
        raw.push(FpLetter::Factor(i, pi1.pow(&pi1.generator(0), exp)));
        return Ok(());
    }
    Err(bad(tok))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::build_manifold;

    fn m() -> Manifold {
        build_manifold(
            "type A pi1=Z/2<g1> mcg=Z/2<tau> act=tau:g1\n\
             type T pi1=F2<a,b> mcg=Z/3<r> act=r:b,b^-1.a^-1\n\
             summand 1 A\nsummand 2 T\nhandles 2",
        )
        .unwrap()
    }

    #[test]
    fn reduction_examples() {
        let m = m();
        assert!(FPWord::parse(&m, "g1@1 g1@1").unwrap().is_empty());
        assert_eq!(FPWord::parse(&m, "x1 x1^-1 g1@1").unwrap().format(&m), "g1@1");
        let alt = FPWord::parse(&m, "g1@1 a@2 g1@1").unwrap();
        assert_eq!(alt.len(), 3);
        assert_eq!(FPWord::parse(&m, "a@2 b@2").unwrap().format(&m), "a.b@2");
        assert_eq!(FPWord::parse(&m, "g2 g2^-1 x2^2").unwrap().format(&m), "x2 x2");
    }

    #[test]
    fn inverse_and_round_trip() {
        let m = m();
        let w = FPWord::parse(&m, "x1 a.b^-1@2 g1@1 x2^-1").unwrap();
        assert!(w.concat(&m, &w.inverse(&m)).is_empty());
        assert_eq!(FPWord::parse(&m, &w.format(&m)).unwrap(), w);
        assert_eq!(FPWord::parse(&m, "e").unwrap(), FPWord::empty());
    }

    #[test]
    fn bad_letters() {
        let m = m();
        assert_eq!(FPWord::parse(&m, "x3").unwrap_err().kind(), "IndexError");
        assert_eq!(FPWord::parse(&m, "c@2").unwrap_err().kind(), "OracleError");
        assert_eq!(FPWord::parse(&m, "y1").unwrap_err().kind(), "InvalidWord");
    }
}
