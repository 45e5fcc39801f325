//! Spotted manifolds: one capped irreducible V0 with `p` marked balls.
//!
//! Words over the spotted alphabet project to pairs `(f_c, rho)`: the
//! capped mapping class and the permutation of the balls.

use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group::GroupElem;
use crate::manifold::HomeoType;
use crate::sequence::{perm_then, transpositions};
use crate::words::split_tokens;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpottedMarking {
    cap: HomeoType,
    spots: usize,
}

impl SpottedMarking {
    pub fn new(cap: HomeoType, spots: usize) -> Result<Self> {
        if spots == 0 {
            return Err(Error::InvalidWord("a spotted manifold needs at least one spot".into()));
        }
        Ok(SpottedMarking { cap, spots })
    }

    pub fn cap(&self) -> &HomeoType {
        &self.cap
    }

    pub fn spots(&self) -> usize {
        self.spots
    }

    /// Lines `type ...`, optional `cap <name>` and `spots <p>`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut types: Vec<HomeoType> = Vec::new();
        let mut cap: Option<(usize, String)> = None;
        let mut spots = None;
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (directive, rest) = content
                .split_once(char::is_whitespace)
                .unwrap_or((content, ""));
            match directive {
                "type" => types.push(HomeoType::parse(line, rest)?),
                "cap" => cap = Some((line, rest.trim().to_string())),
                "spots" => {
                    let p: usize = rest
                        .trim()
                        .parse()
                        .map_err(|_| Error::parse(line, format!("bad spot count `{rest}`")))?;
                    if p == 0 {
                        return Err(Error::parse(line, "spot count must be at least 1"));
                    }
                    spots = Some(p);
                }
                other => return Err(Error::parse(line, format!("unknown directive `{other}`"))),
            }
        }
        let spots = spots.ok_or_else(|| Error::parse(1, "missing `spots` line"))?;
        let cap = match cap {
            Some((line, name)) => types
                .into_iter()
                .find(|t| t.name() == name)
                .ok_or_else(|| Error::parse(line, format!("unknown type `{name}`")))?,
            None if types.len() == 1 => types.pop().unwrap(),
            None => return Err(Error::parse(1, "expected exactly one type or a `cap` line")),
        };
        SpottedMarking::new(cap, spots)
    }
}

impl fmt::Display for SpottedMarking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.cap)?;
        writeln!(f, "cap {}", self.cap.name())?;
        writeln!(f, "spots {}", self.spots)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SpottedLetter {
    /// Drag ball `a` around a loop in pi1(V0).
    Slide { a: usize, path: GroupElem },
    Swap(usize, usize),
    /// Twist on the sphere bounding ball `a`.
    Twist(usize),
    CapAut(GroupElem),
}

impl SpottedLetter {
    pub fn validate(&self, mk: &SpottedMarking) -> Result<()> {
        let spot = |a: usize| {
            if a == 0 || a > mk.spots {
                Err(Error::InvalidWord(format!("spot {a} out of range 1..{}", mk.spots)))
            } else {
                Ok(())
            }
        };
        match self {
            SpottedLetter::Slide { a, path } => {
                spot(*a)?;
                if !mk.cap.pi1().contains(path) {
                    return Err(Error::InvalidWord("slide path is not in pi1".into()));
                }
            }
            SpottedLetter::Swap(a, b) => {
                spot(*a)?;
                spot(*b)?;
                if a == b {
                    return Err(Error::InvalidWord(format!("spotSwap({a},{b}) needs distinct spots")));
                }
            }
            SpottedLetter::Twist(a) => spot(*a)?,
            SpottedLetter::CapAut(m) => {
                if !mk.cap.mcg().contains(m) {
                    return Err(Error::InvalidWord("capAut token is not in the mcg".into()));
                }
            }
        }
        Ok(())
    }

    pub fn format(&self, mk: &SpottedMarking) -> String {
        match self {
            SpottedLetter::Slide { a, path } => {
                format!("spotSlide({a}; {})", mk.cap.pi1().format_elem(path))
            }
            SpottedLetter::Swap(a, b) => format!("spotSwap({a},{b})"),
            SpottedLetter::Twist(a) => format!("spotTwist({a})"),
            SpottedLetter::CapAut(m) => format!("capAut({})", mk.cap.mcg().format_elem(m)),
        }
    }

    pub fn parse(mk: &SpottedMarking, tok: &str) -> Result<Self> {
        let bad = || Error::InvalidWord(format!("unrecognized spotted letter `{tok}`"));
        let (head, rest) = tok.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let index = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
        let letter = match head {
            "spotSlide" => {
                let (a, p) = args.split_once(';').or_else(|| args.split_once(',')).ok_or_else(bad)?;
                let path = mk
                    .cap
                    .pi1()
                    .parse_elem(p)
                    .map_err(|e| Error::InvalidWord(e.to_string()))?;
                SpottedLetter::Slide { a: index(a)?, path }
            }
            "spotSwap" => {
                let (a, b) = args.split_once(',').ok_or_else(bad)?;
                SpottedLetter::Swap(index(a)?, index(b)?)
            }
            "spotTwist" => SpottedLetter::Twist(index(args)?),
            "capAut" => SpottedLetter::CapAut(
                mk.cap
                    .mcg()
                    .parse_elem(args)
                    .map_err(|e| Error::InvalidWord(e.to_string()))?,
            ),
            _ => return Err(bad()),
        };
        letter.validate(mk)?;
        Ok(letter)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SpottedWord {
    pub letters: Vec<SpottedLetter>,
}

impl SpottedWord {
    pub fn concat(&self, other: &SpottedWord) -> SpottedWord {
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        SpottedWord { letters }
    }

    pub fn parse(mk: &SpottedMarking, text: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("").trim();
            for tok in split_tokens(content).map_err(|msg| Error::parse(n + 1, msg))? {
                if tok != "e" {
                    letters.push(SpottedLetter::parse(mk, &tok)?);
                }
            }
        }
        Ok(SpottedWord { letters })
    }

    pub fn format(&self, mk: &SpottedMarking) -> String {
        if self.letters.is_empty() {
            return "e".into();
        }
        self.letters.iter().map(|l| l.format(mk)).collect::<Vec<_>>().join(" ")
    }
}

/// Slides along each pi1 generator and its inverse, swaps `a < b`, twists
/// and capAut letters for each mcg generator and its inverse.
pub fn spotted_alphabet(mk: &SpottedMarking) -> Vec<SpottedLetter> {
    let mut out = Vec::new();
    let (pi1, mcg) = (mk.cap.pi1(), mk.cap.mcg());
    for a in 1..=mk.spots {
        for g in 0..pi1.rank() {
            let x = pi1.generator(g);
            for path in [x.clone(), pi1.inv(&x)] {
                let l = SpottedLetter::Slide { a, path };
                if !out.contains(&l) {
                    out.push(l);
                }
            }
        }
    }
    for a in 1..=mk.spots {
        for b in a + 1..=mk.spots {
            out.push(SpottedLetter::Swap(a, b));
        }
    }
    out.extend((1..=mk.spots).map(SpottedLetter::Twist));
    for g in 0..mcg.rank() {
        let x = mcg.generator(g);
        for tok in [x.clone(), mcg.inv(&x)] {
            let l = SpottedLetter::CapAut(tok);
            if !out.contains(&l) {
                out.push(l);
            }
        }
    }
    out
}

/// Capped mapping class and 0-based permutation of the spots.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpottedImage {
    pub cap: GroupElem,
    pub perm: Vec<usize>,
}

impl SpottedImage {
    pub fn identity(mk: &SpottedMarking) -> Self {
        SpottedImage { cap: mk.cap.mcg().identity(), perm: (0..mk.spots).collect() }
    }

    pub fn is_identity(&self, mk: &SpottedMarking) -> bool {
        *self == Self::identity(mk)
    }

    pub fn then(&self, mk: &SpottedMarking, next: &SpottedImage) -> SpottedImage {
        SpottedImage {
            cap: mk.cap.mcg().mul(&self.cap, &next.cap),
            perm: perm_then(&self.perm, &next.perm),
        }
    }

    pub fn to_json(&self, mk: &SpottedMarking) -> Value {
        json!({
            "cap": mk.cap.mcg().format_elem(&self.cap),
            "perm": self.perm.iter().map(|p| p + 1).collect::<Vec<_>>(),
        })
    }
}

pub fn spotted_educe(mk: &SpottedMarking, w: &SpottedWord) -> Result<SpottedImage> {
    let mut acc = SpottedImage::identity(mk);
    for letter in &w.letters {
        letter.validate(mk)?;
        let mut step = SpottedImage::identity(mk);
        match letter {
            SpottedLetter::Slide { .. } | SpottedLetter::Twist(_) => continue,
            SpottedLetter::Swap(a, b) => step.perm.swap(a - 1, b - 1),
            SpottedLetter::CapAut(m) => step.cap = m.clone(),
        }
        acc = acc.then(mk, &step);
    }
    Ok(acc)
}

/// Spot swaps realizing the permutation, then one capAut letter.
pub fn spotted_lift(mk: &SpottedMarking, h: &SpottedImage) -> SpottedWord {
    let mut letters: Vec<SpottedLetter> = transpositions(&h.perm)
        .into_iter()
        .map(|(a, b)| SpottedLetter::Swap(a + 1, b + 1))
        .collect();
    if !mk.cap.mcg().is_identity(&h.cap) {
        letters.push(SpottedLetter::CapAut(h.cap.clone()));
    }
    SpottedWord { letters }
}

/// Every pair (capped class, spot permutation), when the mcg oracle is finite.
pub fn enumerate_spotted(mk: &SpottedMarking) -> Result<Vec<SpottedImage>> {
    let caps = mk
        .cap
        .mcg()
        .elements()
        .ok_or_else(|| Error::Oracle("the capped mcg oracle is infinite".into()))?;
    let mut perms = Vec::new();
    crate::classify::permutations(mk.spots, &mut |p| perms.push(p.to_vec()));
    Ok(caps
        .iter()
        .flat_map(|c| perms.iter().map(move |p| SpottedImage { cap: c.clone(), perm: p.clone() }))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MARKING: &str = "type A pi1=Z/2<g1> mcg=Z/2<tau> act=tau:g1\nspots 3\n";

    #[test]
    fn eduction_examples() {
        let mk = SpottedMarking::parse(MARKING).unwrap();
        let e = |s: &str| {
            spotted_educe(&mk, &SpottedWord::parse(&mk, s).unwrap()).unwrap().to_json(&mk).to_string()
        };
        assert_eq!(e("spotSwap(1,2)"), r#"{"cap":"1","perm":[2,1,3]}"#);
        assert_eq!(e("spotTwist(1)"), r#"{"cap":"1","perm":[1,2,3]}"#);
        assert_eq!(e("capAut(tau) spotSwap(1,2) spotSwap(1,2)"), r#"{"cap":"tau","perm":[1,2,3]}"#);
        assert_eq!(e("spotSlide(2; g1)"), e("e"));
    }

    #[test]
    fn lifts_cover_the_group() {
        let mk = SpottedMarking::parse(MARKING).unwrap();
        let all = enumerate_spotted(&mk).unwrap();
        assert_eq!(all.len(), 12);
        for h in all {
            assert_eq!(spotted_educe(&mk, &spotted_lift(&mk, &h)).unwrap(), h);
        }
    }

    #[test]
    fn rejects_bad_letters() {
        let mk = SpottedMarking::parse(MARKING).unwrap();
        for bad in ["spotSwap(1,1)", "spotTwist(4)", "capAut(sigma)", "spotSpin(1)"] {
            assert_eq!(SpottedWord::parse(&mk, bad).unwrap_err().kind(), "InvalidWord", "{bad}");
        }
        assert!(SpottedMarking::parse("type A pi1=1 mcg=1\nspots 0").unwrap_err().is_parse());
        let round = SpottedMarking::parse(&mk.to_string()).unwrap();
        assert_eq!(round, mk);
    }
}
