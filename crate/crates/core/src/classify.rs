//! Symmetric systems and allowable assignments.
//!
//! Assignment text format, one line per standard duplicate:
//!
//! ```text
//! assign d1 {s1}
//! assign d1+ {e1+} +
//! assign d1- {e1+} -
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::{Block, LaminarFamily, Label, Sign, Universe};
use crate::manifold::Manifold;

/// The canonical system: one sphere around each irreducible summand and one
/// around the `+` end of each handle.
pub fn standard_system(m: &Manifold) -> LaminarFamily {
    let u = m.universe();
    let mut blocks: Vec<Block> = (1..=m.k()).map(|i| Block(u.bit(Label::S(i)))).collect();
    blocks.extend((1..=m.l()).map(|j| Block(u.bit(Label::E(j, Sign::Plus)))));
    LaminarFamily::new(u, blocks).expect("standard system is laminar")
}

/// The separating sphere cutting off both ends of handle `j`.
pub fn associated_separating(m: &Manifold, j: usize) -> Result<Block> {
    m.check_handle(j)?;
    Ok(Block(m.universe().pair(j)))
}

pub fn is_separating(u: Universe, b: Block) -> bool {
    (1..=u.l()).all(|j| !b.splits(u.pair(j)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockClass {
    #[serde(skip)]
    pub mask: Block,
    pub block: String,
    pub separating: bool,
    /// Labels whose innermost enclosing block is this one.
    pub chamber_labels: Vec<String>,
    pub children: usize,
    /// Set when the block cuts off exactly one irreducible summand.
    pub one_holed: Option<usize>,
    pub homeo_type: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SystemClass {
    pub blocks: Vec<BlockClass>,
    pub is_symmetric: bool,
    /// Why the family fails to be symmetric.
    pub reason: Option<String>,
}

impl SystemClass {
    pub fn block(&self, b: Block) -> Option<&BlockClass> {
        self.blocks.iter().find(|c| c.mask == b)
    }

    /// Homeomorphism-type census of the one-holed blocks, sorted.
    pub fn type_census(&self) -> Vec<String> {
        let mut v: Vec<String> = self.blocks.iter().filter_map(|c| c.homeo_type.clone()).collect();
        v.sort();
        v
    }
}

pub fn classify_system(m: &Manifold, f: &LaminarFamily) -> Result<SystemClass> {
    let u = m.universe();
    if f.universe() != u {
        return Err(Error::InvalidFamily(
            "family is over a different label universe".into(),
        ));
    }
    let forest = f.forest();
    let mut blocks = Vec::new();
    for (t, &b) in f.blocks().iter().enumerate() {
        let separating = is_separating(u, b);
        let chamber = forest.chamber_labels(Some(t), u);
        let children = forest.children(Some(t)).len();
        let one_holed = match (separating, children, chamber.count_ones()) {
            (true, 0, 1) => match u.label(chamber.trailing_zeros() as usize) {
                Label::S(i) => Some(i),
                Label::E(..) => None,
            },
            _ => None,
        };
        blocks.push(BlockClass {
            mask: b,
            block: u.format_block(b),
            separating,
            chamber_labels: u
                .labels()
                .filter(|&l| chamber & u.bit(l) != 0)
                .map(|l| l.to_string())
                .collect(),
            children,
            one_holed,
            homeo_type: one_holed.map(|i| m.summand_type(i).name().to_string()),
        });
    }
    let reason = symmetric_failure(m, f, &blocks);
    Ok(SystemClass {
        blocks,
        is_symmetric: reason.is_none(),
        reason,
    })
}

fn symmetric_failure(m: &Manifold, f: &LaminarFamily, blocks: &[BlockClass]) -> Option<String> {
    let (k, l) = (m.k(), m.l());
    if f.len() != k + l {
        return Some(format!("{} blocks, expected {}", f.len(), k + l));
    }
    if f.has_duplicates() {
        return Some("parallel blocks".into());
    }
    for c in blocks.iter().filter(|c| c.separating) {
        if c.one_holed.is_none() {
            return Some(format!(
                "separating block {} does not cut off a single summand",
                c.block
            ));
        }
    }
    let separating = blocks.iter().filter(|c| c.separating).count();
    if separating != k {
        return Some(format!("{separating} separating blocks, expected {k}"));
    }
    // Pieces left after cutting: root plus the chambers of non-separating
    // blocks. The handles must join them into a single tree.
    let u = m.universe();
    let forest = f.forest();
    let node = |c: Option<usize>| c.map_or(0, |t| t + 1);
    let mut parent: Vec<usize> = (0..=f.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for j in 1..=l {
        let a = node(forest.chamber(u.bit(Label::E(j, Sign::Plus))));
        let b = node(forest.chamber(u.bit(Label::E(j, Sign::Minus))));
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return Some(format!(
                "handle {j} closes a loop; the reglued complement is not one holed sphere"
            ));
        }
        parent[ra] = rb;
    }
    None
}

/// A standard duplicate sphere: `d(i)` for summand `i`, `d(j, sign)` for the
/// ends of handle `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Duplicate {
    Irr(usize),
    End(usize, Sign),
}

impl fmt::Display for Duplicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Duplicate::Irr(i) => write!(f, "d{i}"),
            Duplicate::End(j, s) => write!(f, "d{j}{}", s.symbol()),
        }
    }
}

impl Duplicate {
    pub fn parse(s: &str) -> Option<Duplicate> {
        let rest = s.strip_prefix('d')?;
        match rest.find(|c: char| !c.is_ascii_digit()) {
            None => rest.parse().ok().filter(|&i| i > 0).map(Duplicate::Irr),
            Some(split) => {
                let j: usize = rest[..split].parse().ok().filter(|&j| j > 0)?;
                Sign::parse(&rest[split..]).map(|s| Duplicate::End(j, s))
            }
        }
    }

    pub fn all(m: &Manifold) -> Vec<Duplicate> {
        let mut v: Vec<Duplicate> = (1..=m.k()).map(Duplicate::Irr).collect();
        for j in 1..=m.l() {
            v.push(Duplicate::End(j, Sign::Plus));
            v.push(Duplicate::End(j, Sign::Minus));
        }
        v
    }
}

/// A duplicate of a target block; non-separating blocks carry a side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TargetDuplicate {
    pub block: Block,
    pub side: Option<Sign>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Assignment {
    pub map: BTreeMap<Duplicate, TargetDuplicate>,
}

impl Assignment {
    /// The assignment of the standard system onto itself.
    pub fn identity(m: &Manifold) -> Self {
        let u = m.universe();
        let mut map = BTreeMap::new();
        for i in 1..=m.k() {
            map.insert(
                Duplicate::Irr(i),
                TargetDuplicate {
                    block: Block(u.bit(Label::S(i))),
                    side: None,
                },
            );
        }
        for j in 1..=m.l() {
            let block = Block(u.bit(Label::E(j, Sign::Plus)));
            for s in [Sign::Plus, Sign::Minus] {
                map.insert(Duplicate::End(j, s), TargetDuplicate { block, side: Some(s) });
            }
        }
        Assignment { map }
    }

    pub fn get(&self, d: Duplicate) -> Option<&TargetDuplicate> {
        self.map.get(&d)
    }

    pub fn format(&self, u: Universe) -> String {
        let mut out = String::new();
        for (d, t) in &self.map {
            out.push_str(&format!("assign {d} {}", u.format_block(t.block)));
            if let Some(s) = t.side {
                out.push_str(&format!(" {}", s.symbol()));
            }
            out.push('\n');
        }
        out
    }

    /// `d1 -> {s1}` style pairs for JSON output.
    pub fn entries(&self, u: Universe) -> Vec<(String, String)> {
        self.map
            .iter()
            .map(|(d, t)| {
                let mut target = u.format_block(t.block);
                if let Some(s) = t.side {
                    target.push(' ');
                    target.push(s.symbol());
                }
                (d.to_string(), target)
            })
            .collect()
    }

    pub fn parse(u: Universe, text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let (dup, block, side) = match fields[..] {
                ["assign", d, b] => (d, b, None),
                ["assign", d, b, s] => (d, b, Some(s)),
                _ => return Err(Error::parse(line, format!("expected `assign <dup> {{..}} [side]`, got `{content}`"))),
            };
            let d = Duplicate::parse(dup)
                .ok_or_else(|| Error::parse(line, format!("bad duplicate `{dup}`")))?;
            let block = u.parse_block(block).map_err(|e| Error::parse(line, e.to_string()))?;
            let side = match side {
                None => None,
                Some(s) => Some(
                    Sign::parse(s).ok_or_else(|| Error::parse(line, format!("bad side `{s}`")))?,
                ),
            };
            if map.insert(d, TargetDuplicate { block, side }).is_some() {
                return Err(Error::parse(line, format!("{d} assigned twice")));
            }
        }
        Ok(Assignment { map })
    }
}

/// `Ok(None)` when `a` is allowable onto `target`, otherwise the reason.
pub fn allowable_reason(
    m: &Manifold,
    target: &LaminarFamily,
    a: &Assignment,
) -> Result<Option<String>> {
    let class = classify_system(m, target)?;
    if !class.is_symmetric {
        return Err(Error::NotSymmetric(class.reason.unwrap_or_default()));
    }
    let all = Duplicate::all(m);
    if a.map.len() != all.len() || all.iter().any(|d| !a.map.contains_key(d)) {
        return Ok(Some("assignment must cover every standard duplicate exactly".into()));
    }
    let mut seen = BTreeSet::new();
    for (d, t) in &a.map {
        if !seen.insert(*t) {
            return Ok(Some(format!("{d} shares its target with another duplicate")));
        }
        let Some(c) = class.block(t.block) else {
            return Ok(Some(format!("{d} targets a block outside the family")));
        };
        match *d {
            Duplicate::Irr(i) => {
                let Some(i2) = c.one_holed.filter(|_| t.side.is_none()) else {
                    return Ok(Some(format!("{d} must target a separating block without side")));
                };
                if !m.same_type(i, i2) {
                    return Ok(Some(format!("{d} targets a summand of a different type")));
                }
            }
            Duplicate::End(j, s) => {
                if c.separating || t.side.is_none() {
                    return Ok(Some(format!("{d} must target a side of a non-separating block")));
                }
                let other = a.map[&Duplicate::End(j, s.flip())];
                if other.block != t.block || other.side == t.side {
                    return Ok(Some(format!("d{j}+ and d{j}- must target opposite sides of one block")));
                }
            }
        }
    }
    Ok(None)
}

pub fn allowable(m: &Manifold, target: &LaminarFamily, a: &Assignment) -> Result<bool> {
    Ok(allowable_reason(m, target, a)?.is_none())
}

/// Every allowable assignment onto a symmetric family, in a fixed order.
pub fn allowable_assignments(m: &Manifold, target: &LaminarFamily) -> Result<Vec<Assignment>> {
    let class = classify_system(m, target)?;
    if !class.is_symmetric {
        return Err(Error::NotSymmetric(class.reason.unwrap_or_default()));
    }
    let sep: Vec<&BlockClass> = class.blocks.iter().filter(|c| c.separating).collect();
    let nonsep: Vec<Block> = class
        .blocks
        .iter()
        .filter(|c| !c.separating)
        .map(|c| c.mask)
        .collect();
    let mut sep_choices: Vec<Vec<Block>> = Vec::new();
    permutations(sep.len(), &mut |perm| {
        let ok = (0..sep.len())
            .all(|i| m.same_type(i + 1, sep[perm[i]].one_holed.expect("symmetric")));
        if ok {
            sep_choices.push(perm.iter().map(|&p| sep[p].mask).collect());
        }
    });
    let mut out = Vec::new();
    for choice in &sep_choices {
        permutations(nonsep.len(), &mut |perm| {
            for sides in 0..(1u64 << nonsep.len()) {
                let mut map = BTreeMap::new();
                for (i, &b) in choice.iter().enumerate() {
                    map.insert(Duplicate::Irr(i + 1), TargetDuplicate { block: b, side: None });
                }
                for j in 0..nonsep.len() {
                    let plus = if sides >> j & 1 == 0 { Sign::Plus } else { Sign::Minus };
                    let block = nonsep[perm[j]];
                    map.insert(Duplicate::End(j + 1, Sign::Plus), TargetDuplicate { block, side: Some(plus) });
                    map.insert(
                        Duplicate::End(j + 1, Sign::Minus),
                        TargetDuplicate { block, side: Some(plus.flip()) },
                    );
                }
                out.push(Assignment { map });
            }
        });
    }
    Ok(out)
}

/// Calls `f` on every permutation of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], f: &mut dyn FnMut(&[usize])) {
        if cur.len() == used.len() {
            f(cur);
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                cur.push(x);
                rec(cur, used, f);
                cur.pop();
                used[x] = false;
            }
        }
    }
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], f);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::build_manifold;

    fn m21() -> Manifold {
        build_manifold(
            "type A pi1=Z/2<g1> mcg=Z/2<tau> act=tau:g1\n\
             type B pi1=Z/3<h> mcg=1\n\
             summand 1 A\nsummand 2 B\nhandles 1",
        )
        .unwrap()
    }

    fn fam(m: &Manifold, text: &str) -> LaminarFamily {
        LaminarFamily::parse(m.universe(), text).unwrap()
    }

    #[test]
    fn standard_systems() {
        for (k, l) in [(2, 1), (0, 2), (1, 1)] {
            let mut text = String::from("type A pi1=1 mcg=1\n");
            for i in 1..=k {
                text.push_str(&format!("summand {i} A\n"));
            }
            text.push_str(&format!("handles {l}\n"));
            let m = build_manifold(&text).unwrap();
            let s = standard_system(&m);
            assert_eq!(s.len(), k + l);
            assert!(classify_system(&m, &s).unwrap().is_symmetric);
        }
        let m = m21();
        assert_eq!(standard_system(&m).to_string(), "block {s1}\nblock {s2}\nblock {e1+}\n");
    }

    #[test]
    fn nested_symmetric_example() {
        let m = m21();
        let c = classify_system(&m, &fam(&m, "block {s1}\nblock {s1,e1+}\nblock {s2}")).unwrap();
        assert!(c.is_symmetric, "{:?}", c.reason);
        let outer = &c.blocks[1];
        assert_eq!(outer.block, "{s1,e1+}");
        assert!(!outer.separating);
        assert_eq!(c.blocks[0].one_holed, Some(1));
        assert_eq!(c.blocks[2].one_holed, Some(2));
        assert_eq!(c.type_census(), ["A", "B"]);

        let short = classify_system(&m, &fam(&m, "block {s1}\nblock {s2}")).unwrap();
        assert!(!short.is_symmetric);
    }

    #[test]
    fn loops_and_fat_separating_blocks_are_rejected() {
        let m = m21();
        // e1+ and e1- share the root chamber: the handle closes a loop.
        let c = classify_system(&m, &fam(&m, "block {s1}\nblock {s2}\nblock {s1,s2}")).unwrap();
        assert!(!c.is_symmetric);
        let c = classify_system(&m, &fam(&m, "block {s1}\nblock {s2}\nblock {e1+,e1-}")).unwrap();
        assert!(!c.is_symmetric);
    }

    #[test]
    fn associated_spheres() {
        let m = build_manifold("handles 2").unwrap();
        assert_eq!(m.universe().format_block(associated_separating(&m, 1).unwrap()), "{e1+,e1-}");
        assert_eq!(m.universe().format_block(associated_separating(&m, 2).unwrap()), "{e2+,e2-}");
        assert_eq!(associated_separating(&m, 3).unwrap_err().kind(), "IndexError");
    }

    #[test]
    fn allowability() {
        let m = m21();
        let u = m.universe();
        let std = standard_system(&m);
        let id = Assignment::identity(&m);
        assert!(allowable(&m, &std, &id).unwrap());
        assert_eq!(Assignment::parse(u, &id.format(u)).unwrap(), id);

        // d1 onto the summand of type B.
        let mut wrong_type = id.clone();
        wrong_type.map.insert(Duplicate::Irr(1), TargetDuplicate { block: Block(u.bit(Label::S(2))), side: None });
        wrong_type.map.insert(Duplicate::Irr(2), TargetDuplicate { block: Block(u.bit(Label::S(1))), side: None });
        assert!(!allowable(&m, &std, &wrong_type).unwrap());

        let not_sym = fam(&m, "block {s1}");
        assert_eq!(allowable(&m, &not_sym, &id).unwrap_err().kind(), "NotSymmetric");
        assert_eq!(allowable_assignments(&m, &std).unwrap().len(), 2);
    }

    #[test]
    fn broken_pairing() {
        let m = build_manifold("handles 2").unwrap();
        let u = m.universe();
        let std = standard_system(&m);
        let text = "assign d1+ {e1+} +\nassign d1- {e2+} -\nassign d2+ {e2+} +\nassign d2- {e1+} -\n";
        let a = Assignment::parse(u, text).unwrap();
        assert!(!allowable(&m, &std, &a).unwrap());
        assert_eq!(allowable_assignments(&m, &std).unwrap().len(), 8);
    }
}
