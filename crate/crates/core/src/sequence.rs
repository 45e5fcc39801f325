//! Eduction to the mapping class group of V, its section, and discrepant
//! factorization.
//!
//! An [`EductionImage`] `(p, t)` sends summand `i` to `p(i)` and applies the
//! token `t_i` on the way. Composition follows the word convention: `h1`
//! then `h2` is `(p2 . p1, i -> t1_i * t2_{p1(i)})`, where `a * b` in an mcg
//! oracle means `a`, then `b`.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::group::GroupElem;
use crate::manifold::Manifold;
use crate::words::{normalize_word, Generator, Word};

/// Swaps realizing `perm` (0-based images): each cycle `(c1 c2 .. cn)`,
/// smallest element first, becomes `(c1 c2), (c1 c3), .., (c1 cn)`.
pub(crate) fn transpositions(perm: &[usize]) -> Vec<(usize, usize)> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut cur = perm[start];
        while cur != start {
            seen[cur] = true;
            out.push((start, cur));
            cur = perm[cur];
        }
    }
    out
}

/// Composition of permutations given as image lists: `first`, then `second`.
pub(crate) fn perm_then(first: &[usize], second: &[usize]) -> Vec<usize> {
    first.iter().map(|&x| second[x]).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EductionImage {
    /// 0-based images of the summands.
    pub perm: Vec<usize>,
    /// Token applied to each summand, in its own mcg oracle.
    pub tokens: Vec<GroupElem>,
}

impl EductionImage {
    pub fn identity(m: &Manifold) -> Self {
        EductionImage {
            perm: (0..m.k()).collect(),
            tokens: (1..=m.k()).map(|i| m.summand_type(i).mcg().identity()).collect(),
        }
    }

    pub fn is_identity(&self, m: &Manifold) -> bool {
        *self == Self::identity(m)
    }

    fn transposition(m: &Manifold, a: usize, b: usize) -> Self {
        let mut h = Self::identity(m);
        h.perm.swap(a - 1, b - 1);
        h
    }

    fn token(m: &Manifold, i: usize, tok: GroupElem) -> Self {
        let mut h = Self::identity(m);
        h.tokens[i - 1] = tok;
        h
    }

    /// `self`, then `next`.
    pub fn then(&self, m: &Manifold, next: &EductionImage) -> EductionImage {
        EductionImage {
            perm: perm_then(&self.perm, &next.perm),
            tokens: (0..self.perm.len())
                .map(|i| {
                    let mcg = m.summand_type(i + 1).mcg();
                    mcg.mul(&self.tokens[i], &next.tokens[self.perm[i]])
                })
                .collect(),
        }
    }

    pub fn validate(&self, m: &Manifold) -> Result<()> {
        let k = m.k();
        if self.perm.len() != k || self.tokens.len() != k {
            return Err(Error::Index(format!("eduction image must have {k} entries")));
        }
        let mut hit = vec![false; k];
        for &p in &self.perm {
            if p >= k || std::mem::replace(&mut hit[p], true) {
                return Err(Error::Index("perm is not a permutation".into()));
            }
        }
        for i in 0..k {
            if !m.same_type(i + 1, self.perm[i] + 1) {
                return Err(Error::TypeMismatch(format!(
                    "summand {} is sent to summand {} of a different type",
                    i + 1,
                    self.perm[i] + 1
                )));
            }
            if !m.summand_type(i + 1).mcg().contains(&self.tokens[i]) {
                return Err(Error::Oracle(format!("token {} is not in its mcg", i + 1)));
            }
        }
        Ok(())
    }

    /// `{"perm":[..],"tokens":{"1":..,..}}` with 1-based indices.
    pub fn to_json(&self, m: &Manifold) -> Value {
        let mut tokens = Map::new();
        for (i, t) in self.tokens.iter().enumerate() {
            tokens.insert(
                (i + 1).to_string(),
                Value::String(m.summand_type(i + 1).mcg().format_elem(t)),
            );
        }
        json!({
            "perm": self.perm.iter().map(|p| p + 1).collect::<Vec<_>>(),
            "tokens": tokens,
        })
    }

    pub fn from_json(m: &Manifold, v: &Value) -> Result<Self> {
        let bad = |msg: &str| Error::parse(1, format!("eduction image: {msg}"));
        let perm = v
            .get("perm")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing perm array"))?
            .iter()
            .map(|p| {
                p.as_u64()
                    .filter(|&p| p >= 1)
                    .map(|p| p as usize - 1)
                    .ok_or_else(|| bad("perm entries are positive integers"))
            })
            .collect::<Result<Vec<_>>>()?;
        let tokens_obj = v.get("tokens").and_then(Value::as_object);
        let mut tokens = Vec::new();
        for i in 1..=m.k() {
            let mcg = m.summand_type(i).mcg();
            let tok = match tokens_obj.and_then(|o| o.get(&i.to_string())) {
                None => mcg.identity(),
                Some(Value::String(s)) => mcg.parse_elem(s)?,
                Some(_) => return Err(bad("tokens are strings")),
            };
            tokens.push(tok);
        }
        if let Some(o) = tokens_obj {
            if o.keys().any(|key| key.parse::<usize>().map_or(true, |i| i == 0 || i > m.k())) {
                return Err(Error::Index("token index out of range".into()));
            }
        }
        let h = EductionImage { perm, tokens };
        h.validate(m)?;
        Ok(h)
    }
}

/// Projection of a word to the mapping class group of V.
pub fn educe(m: &Manifold, w: &Word) -> Result<EductionImage> {
    w.check_ambient(m)?;
    let mut acc = EductionImage::identity(m);
    for g in w.letters() {
        g.validate(m)?;
        let step = match g {
            Generator::Aut { i, m: tok } => EductionImage::token(m, *i, tok.clone()),
            Generator::SwapIrr(a, b) => EductionImage::transposition(m, *a, *b),
            _ => continue,
        };
        acc = acc.then(m, &step);
    }
    Ok(acc)
}

/// The fixed section: summand swaps realizing the permutation, then one
/// aut letter per nontrivial token in order of target index.
pub fn lift(m: &Manifold, h: &EductionImage) -> Result<Word> {
    h.validate(m)?;
    let mut letters: Vec<Generator> = transpositions(&h.perm)
        .into_iter()
        .map(|(a, b)| Generator::SwapIrr(a + 1, b + 1))
        .collect();
    let mut inverse = vec![0; h.perm.len()];
    for (i, &p) in h.perm.iter().enumerate() {
        inverse[p] = i;
    }
    for (target, &source) in inverse.iter().enumerate() {
        let tok = &h.tokens[source];
        if !m.summand_type(source + 1).mcg().is_identity(tok) {
            letters.push(Generator::Aut { i: target + 1, m: tok.clone() });
        }
    }
    Word::new(m, letters)
}

pub fn is_discrepant(m: &Manifold, w: &Word) -> Result<bool> {
    Ok(educe(m, w)?.is_identity(m))
}

/// Rewrites a discrepant word into slides, twists, spins and handle swaps.
pub fn factor_discrepant(m: &Manifold, w: &Word) -> Result<Word> {
    let h = educe(m, w)?;
    if !h.is_identity(m) {
        return Err(Error::NotDiscrepant(h.to_json(m).to_string()));
    }
    let normal = normalize_word(m, w)?;
    let split = normal
        .letters()
        .iter()
        .position(|g| !g.is_discrepant())
        .unwrap_or(normal.len());
    let head = Word::new(m, normal.letters()[..split].to_vec())?;
    let tail = Word::new(m, normal.letters()[split..].to_vec())?;
    if !educe(m, &tail)?.is_identity(m) {
        return Err(Error::Oracle(
            "trailing aut and swap letters do not evaluate to the identity".into(),
        ));
    }
    Ok(head)
}

/// All elements of the mapping class group of V, when every summand has a
/// finite mcg oracle.
pub fn enumerate_hv(m: &Manifold) -> Result<Vec<EductionImage>> {
    let k = m.k();
    let mut per_summand = Vec::new();
    for i in 1..=k {
        per_summand.push(m.summand_type(i).mcg().elements().ok_or_else(|| {
            Error::Oracle(format!("summand {i} has an infinite mcg oracle"))
        })?);
    }
    let mut perms = Vec::new();
    crate::classify::permutations(k, &mut |p| {
        if (0..k).all(|i| m.same_type(i + 1, p[i] + 1)) {
            perms.push(p.to_vec());
        }
    });
    let mut out = Vec::new();
    for perm in perms {
        let mut idx = vec![0usize; k];
        loop {
            out.push(EductionImage {
                perm: perm.clone(),
                tokens: (0..k).map(|i| per_summand[i][idx[i]].clone()).collect(),
            });
            let mut c = 0;
            while c < k {
                idx[c] += 1;
                if idx[c] < per_summand[c].len() {
                    break;
                }
                idx[c] = 0;
                c += 1;
            }
            if c == k {
                break;
            }
        }
    }
    Ok(out)
}
