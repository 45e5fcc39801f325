//! Boundary labels of the holed sphere and laminar families of label sets.
//!
//! A sphere in normal position is recorded by the set of labels it encloses,
//! "inside" being the side away from the root chamber. Blocks are bitmasks
//! over the label order `s1..sk, e1+, e1-, e2+, e2-, ...`.
//!
//! Family text format: one `block {s1,e1+}` line per block.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    pub fn parse(s: &str) -> Option<Sign> {
        match s {
            "+" => Some(Sign::Plus),
            "-" | "\u{2212}" => Some(Sign::Minus),
            _ => None,
        }
    }
}

/// A boundary sphere of the holed 3-sphere: `s(i)` or `e(j, sign)`, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    S(usize),
    E(usize, Sign),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::S(i) => write!(f, "s{i}"),
            Label::E(j, s) => write!(f, "e{j}{}", s.symbol()),
        }
    }
}

impl Label {
    pub fn parse(s: &str) -> Option<Label> {
        let s = s.trim();
        if let Some(n) = s.strip_prefix('s') {
            return n.parse().ok().filter(|&i| i > 0).map(Label::S);
        }
        let rest = s.strip_prefix('e')?;
        let split = rest.find(|c: char| !c.is_ascii_digit())?;
        let j: usize = rest[..split].parse().ok().filter(|&j| j > 0)?;
        Sign::parse(&rest[split..]).map(|sign| Label::E(j, sign))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Universe {
    k: usize,
    l: usize,
}

impl Universe {
    pub fn new(k: usize, l: usize) -> Self {
        assert!(k + 2 * l <= 64, "label universe limited to 64 labels");
        Universe { k, l }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn len(&self) -> usize {
        self.k + 2 * self.l
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn full(&self) -> u64 {
        if self.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.len()) - 1
        }
    }

    pub fn index(&self, label: Label) -> Option<usize> {
        match label {
            Label::S(i) if (1..=self.k).contains(&i) => Some(i - 1),
            Label::E(j, s) if (1..=self.l).contains(&j) => {
                Some(self.k + 2 * (j - 1) + usize::from(s == Sign::Minus))
            }
            _ => None,
        }
    }

    pub fn label(&self, idx: usize) -> Label {
        assert!(idx < self.len(), "label index out of range");
        if idx < self.k {
            Label::S(idx + 1)
        } else {
            let r = idx - self.k;
            let sign = if r % 2 == 0 { Sign::Plus } else { Sign::Minus };
            Label::E(r / 2 + 1, sign)
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        (0..self.len()).map(|i| self.label(i))
    }

    pub fn bit(&self, label: Label) -> u64 {
        1u64 << self.index(label).expect("label outside universe")
    }

    /// Mask of the two ends of handle `j`.
    pub fn pair(&self, j: usize) -> u64 {
        self.bit(Label::E(j, Sign::Plus)) | self.bit(Label::E(j, Sign::Minus))
    }

    pub fn block(&self, labels: &[Label]) -> Result<Block> {
        let mut mask = 0;
        for &l in labels {
            let idx = self
                .index(l)
                .ok_or_else(|| Error::InvalidFamily(format!("label {l} outside the universe")))?;
            mask |= 1 << idx;
        }
        Ok(Block(mask))
    }

    pub fn format_block(&self, b: Block) -> String {
        let names: Vec<String> = self
            .labels()
            .filter(|&l| b.contains(self.bit(l)))
            .map(|l| l.to_string())
            .collect();
        format!("{{{}}}", names.join(","))
    }

    /// Parses `{s1,e1+}`.
    pub fn parse_block(&self, s: &str) -> Result<Block> {
        let body = s
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| Error::InvalidFamily(format!("expected {{...}}, got `{s}`")))?;
        let mut labels = Vec::new();
        for part in body.split(',').filter(|p| !p.trim().is_empty()) {
            labels.push(
                Label::parse(part)
                    .ok_or_else(|| Error::InvalidFamily(format!("bad label `{}`", part.trim())))?,
            );
        }
        self.block(&labels)
    }
}

/// A set of labels. Ordered lexicographically as sorted label lists, so
/// `{s1} < {s1,e1+} < {s2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Block(pub u64);

impl Block {
    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, mask: u64) -> bool {
        self.0 & mask == mask
    }

    pub fn is_subset(self, other: Block) -> bool {
        self.0 & other.0 == self.0
    }

    pub fn disjoint(self, other: Block) -> bool {
        self.0 & other.0 == 0
    }

    pub fn nested_or_disjoint(self, other: Block) -> bool {
        self.disjoint(other) || self.is_subset(other) || other.is_subset(self)
    }

    /// Whether the block separates the two ends of the pair `mask`.
    pub fn splits(self, pair: u64) -> bool {
        let inside = self.0 & pair;
        inside != 0 && inside != pair
    }

    pub fn toggle(self, mask: u64) -> Block {
        Block(self.0 ^ mask)
    }

    /// Exchanges the memberships of the bits `a` and `b`.
    pub fn swap_bits(self, a: u64, b: u64) -> Block {
        let has_a = self.0 & a != 0;
        let has_b = self.0 & b != 0;
        let mut out = self.0 & !(a | b);
        if has_a {
            out |= b;
        }
        if has_b {
            out |= a;
        }
        Block(out)
    }
}

impl Ord for Block {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.0 ^ other.0;
        if d == 0 {
            return Ordering::Equal;
        }
        let t = d.trailing_zeros();
        let self_owns = self.0 >> t & 1 == 1;
        let non_owner = if self_owns { other.0 } else { self.0 };
        // The set owning bit t is larger only if the other one ends before t.
        let owner_greater = non_owner >> t == 0;
        if self_owns == owner_greater {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
}

impl PartialOrd for Block {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Empty { block: usize },
    Full { block: usize },
    OutsideUniverse { block: usize },
    Overlap { first: usize, second: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty { block } => write!(f, "block {block} is empty"),
            Violation::Full { block } => write!(f, "block {block} equals the whole label set"),
            Violation::OutsideUniverse { block } => {
                write!(f, "block {block} uses labels outside the universe")
            }
            Violation::Overlap { first, second } => {
                write!(f, "blocks {first} and {second} overlap without nesting")
            }
        }
    }
}

/// Outcome of [`validate_laminar`]; block indices are 1-based positions in
/// the input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    pub valid: bool,
    pub violations: Vec<Violation>,
    /// Pairs of equal blocks. Allowed, but never part of a symmetric system.
    pub duplicates: Vec<(usize, usize)>,
}

pub fn validate_laminar(universe: Universe, blocks: &[Block]) -> Diagnostics {
    let mut violations = Vec::new();
    let mut duplicates = Vec::new();
    for (a, &b) in blocks.iter().enumerate() {
        if b.0 & !universe.full() != 0 {
            violations.push(Violation::OutsideUniverse { block: a + 1 });
        } else if b.is_empty() {
            violations.push(Violation::Empty { block: a + 1 });
        } else if b.0 == universe.full() {
            violations.push(Violation::Full { block: a + 1 });
        }
    }
    for a in 0..blocks.len() {
        for c in a + 1..blocks.len() {
            if blocks[a] == blocks[c] {
                duplicates.push((a + 1, c + 1));
            } else if !blocks[a].nested_or_disjoint(blocks[c]) {
                violations.push(Violation::Overlap {
                    first: a + 1,
                    second: c + 1,
                });
            }
        }
    }
    Diagnostics {
        valid: violations.is_empty(),
        violations,
        duplicates,
    }
}

/// A validated laminar multiset of blocks, kept in canonical (sorted) order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaminarFamily {
    universe: Universe,
    blocks: Vec<Block>,
}

impl LaminarFamily {
    pub fn new(universe: Universe, mut blocks: Vec<Block>) -> Result<Self> {
        let diag = validate_laminar(universe, &blocks);
        if let Some(v) = diag.violations.first() {
            return Err(Error::InvalidFamily(v.to_string()));
        }
        blocks.sort();
        Ok(LaminarFamily { universe, blocks })
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn has_duplicates(&self) -> bool {
        self.blocks.windows(2).any(|w| w[0] == w[1])
    }

    pub fn forest(&self) -> Forest {
        Forest::new(&self.blocks)
    }

    pub fn parse(universe: Universe, text: &str) -> Result<Self> {
        Self::new(universe, parse_blocks(universe, text)?)
    }

    /// Graphviz rendering of the forest, with labels as leaves of their chambers.
    pub fn to_dot(&self) -> String {
        let forest = self.forest();
        let mut out = String::from("digraph family {\n  root [label=\"root\", shape=box];\n");
        for (t, &b) in self.blocks.iter().enumerate() {
            out.push_str(&format!(
                "  b{t} [label=\"{}\", shape=box];\n",
                self.universe.format_block(b)
            ));
            let parent = match forest.parent(t) {
                Some(p) => format!("b{p}"),
                None => "root".to_string(),
            };
            out.push_str(&format!("  {parent} -> b{t};\n"));
        }
        for label in self.universe.labels() {
            let name = label.to_string();
            let chamber = match forest.chamber(self.universe.bit(label)) {
                Some(c) => format!("b{c}"),
                None => "root".to_string(),
            };
            out.push_str(&format!("  \"{name}\" [shape=plaintext];\n  {chamber} -> \"{name}\";\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// Reads `block {..}` lines without checking laminarity.
pub fn parse_blocks(universe: Universe, text: &str) -> Result<Vec<Block>> {
    let mut blocks = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let rest = content
            .strip_prefix("block")
            .filter(|r| r.starts_with(char::is_whitespace))
            .ok_or_else(|| Error::parse(n + 1, format!("expected `block {{...}}`, got `{content}`")))?;
        let block = universe.parse_block(rest).map_err(|e| match e {
            Error::InvalidFamily(msg) => Error::parse(n + 1, msg),
            other => other,
        })?;
        blocks.push(block);
    }
    Ok(blocks)
}

impl fmt::Display for LaminarFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.blocks {
            writeln!(f, "block {}", self.universe.format_block(b))?;
        }
        Ok(())
    }
}

/// Nesting forest of a laminar block list. Node `t` is block `t`; `None`
/// stands for the root chamber. Equal blocks chain, the earlier one inside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Forest {
    blocks: Vec<Block>,
    parent: Vec<Option<usize>>,
}

impl Forest {
    pub fn new(blocks: &[Block]) -> Self {
        let n = blocks.len();
        let key = |t: usize| (blocks[t].len(), t);
        let parent = (0..n)
            .map(|t| {
                (0..n)
                    .filter(|&u| key(u) > key(t) && blocks[t].is_subset(blocks[u]))
                    .min_by_key(|&u| key(u))
            })
            .collect();
        Forest {
            blocks: blocks.to_vec(),
            parent,
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn parent(&self, t: usize) -> Option<usize> {
        self.parent[t]
    }

    pub fn children(&self, t: Option<usize>) -> Vec<usize> {
        (0..self.len()).filter(|&u| self.parent[u] == t).collect()
    }

    /// Innermost block containing every bit of `mask`.
    pub fn chamber(&self, mask: u64) -> Option<usize> {
        (0..self.len())
            .filter(|&t| self.blocks[t].contains(mask))
            .min_by_key(|&t| (self.blocks[t].len(), t))
    }

    /// Labels (as a mask) whose chamber is `t`.
    pub fn chamber_labels(&self, t: Option<usize>, universe: Universe) -> u64 {
        (0..universe.len())
            .map(|i| 1u64 << i)
            .filter(|&bit| self.chamber(bit) == t)
            .fold(0, |acc, bit| acc | bit)
    }

    /// Chambers from `t` up to the root, `t` first.
    pub fn ancestors(&self, t: Option<usize>) -> Vec<Option<usize>> {
        let mut out = vec![t];
        let mut cur = t;
        while let Some(c) = cur {
            cur = self.parent[c];
            out.push(cur);
        }
        out
    }

    pub fn depth(&self, t: Option<usize>) -> usize {
        self.ancestors(t).len() - 1
    }

    /// Blocks whose boundary lies on the forest path between two chambers.
    pub fn path_blocks(&self, from: Option<usize>, to: Option<usize>) -> Vec<usize> {
        let up_from = self.ancestors(from);
        let up_to = self.ancestors(to);
        let meet = up_from
            .iter()
            .find(|c| up_to.contains(c))
            .copied()
            .unwrap_or(None);
        let mut out = Vec::new();
        for side in [&up_from, &up_to] {
            for c in side.iter() {
                if *c == meet {
                    break;
                }
                out.push(c.expect("only the root lacks a block"));
            }
        }
        out
    }
}
