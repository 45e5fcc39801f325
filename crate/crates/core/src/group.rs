//! Group oracles with a decidable word problem.
//!
//! Four kinds are supported: finite cyclic, free, free abelian, and finite
//! groups given by a multiplication table. Elements are stored in the
//! canonical form of their kind, so structural equality is group equality.
//!
//! Products are read left to right: `mul(a, b)` is "a, then b". For table
//! groups the row is the left operand.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

const MAX_TABLE_ORDER: usize = 256;

/// Canonical element of some oracle group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElem {
    Cyclic(u64),
    Abelian(Vec<i64>),
    /// Freely reduced syllables `(generator, nonzero exponent)`.
    Free(Vec<(usize, i64)>),
    Table(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableGroup {
    names: Vec<String>,
    gens: Vec<usize>,
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
    /// Shortest positive word (indices into `gens`) for every element.
    words: Vec<Vec<usize>>,
    /// Canonical representative of the commutator coset of each element.
    ab_rep: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleKind {
    Cyclic { order: u64 },
    Free { rank: usize },
    FreeAbelian { rank: usize },
    Table(TableGroup),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupOracle {
    kind: OracleKind,
    gens: Vec<String>,
}

pub(crate) fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn oracle_err(msg: impl Into<String>) -> Error {
    Error::Oracle(msg.into())
}

fn split_names(body: &str) -> Result<Vec<String>> {
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|n| {
            let n = n.trim();
            if valid_name(n) {
                Ok(n.to_string())
            } else {
                Err(oracle_err(format!("invalid name `{n}`")))
            }
        })
        .collect()
}

/// Splits `head<names>` into the head and the optional name list.
fn split_gen_list(spec: &str) -> Result<(&str, Option<Vec<String>>)> {
    match spec.find('<') {
        None => Ok((spec, None)),
        Some(pos) => {
            let rest = &spec[pos + 1..];
            let body = rest
                .strip_suffix('>')
                .ok_or_else(|| oracle_err(format!("unterminated generator list in `{spec}`")))?;
            Ok((&spec[..pos], Some(split_names(body)?)))
        }
    }
}

fn default_names(prefix: &str, rank: usize) -> Vec<String> {
    (1..=rank).map(|i| format!("{prefix}{i}")).collect()
}

fn parse_count(s: &str, what: &str) -> Result<u64> {
    s.parse::<u64>()
        .map_err(|_| oracle_err(format!("bad {what} `{s}`")))
}

impl TableGroup {
    fn build(names: Vec<String>, gen_names: &[String], rows: Vec<Vec<String>>) -> Result<Self> {
        let n = names.len();
        if n == 0 || n > MAX_TABLE_ORDER {
            return Err(oracle_err(format!(
                "table group order must be in 1..={MAX_TABLE_ORDER}"
            )));
        }
        let mut index = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if !valid_name(name) {
                return Err(oracle_err(format!("invalid element name `{name}`")));
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(oracle_err(format!("duplicate element name `{name}`")));
            }
        }
        if rows.len() != n {
            return Err(oracle_err(format!("table has {} rows, expected {n}", rows.len())));
        }
        let mut mul = vec![vec![0; n]; n];
        for (a, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(oracle_err(format!("table row {a} has {} entries", row.len())));
            }
            for (b, entry) in row.iter().enumerate() {
                mul[a][b] = *index
                    .get(entry.as_str())
                    .ok_or_else(|| oracle_err(format!("unknown element `{entry}` in table")))?;
            }
        }
        for x in 0..n {
            if mul[0][x] != x || mul[x][0] != x {
                return Err(oracle_err("first element is not an identity"));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(oracle_err("multiplication table is not associative"));
                    }
                }
            }
        }
        let mut inv = vec![0; n];
        for a in 0..n {
            inv[a] = (0..n)
                .find(|&b| mul[a][b] == 0)
                .ok_or_else(|| oracle_err(format!("element `{}` has no inverse", names[a])))?;
        }
        let mut gens = Vec::new();
        for g in gen_names {
            let idx = *index
                .get(g.as_str())
                .ok_or_else(|| oracle_err(format!("generator `{g}` is not an element")))?;
            if idx == 0 {
                return Err(oracle_err(format!("generator `{g}` is the identity")));
            }
            gens.push(idx);
        }
        let mut words: Vec<Option<Vec<usize>>> = vec![None; n];
        let mut order = Vec::with_capacity(n);
        words[0] = Some(Vec::new());
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for (gi, &g) in gens.iter().enumerate() {
                let y = mul[x][g];
                if words[y].is_none() {
                    let mut w = words[x].clone().unwrap_or_default();
                    w.push(gi);
                    words[y] = Some(w);
                    queue.push_back(y);
                }
            }
        }
        if order.len() != n {
            return Err(oracle_err("generators do not generate the table group"));
        }
        let words: Vec<Vec<usize>> = words.into_iter().map(Option::unwrap_or_default).collect();

        // Commutator subgroup: closure of all commutators under products.
        let mut in_comm = vec![false; n];
        in_comm[0] = true;
        let mut comm = vec![0usize];
        for a in 0..n {
            for b in 0..n {
                let c = mul[mul[inv[a]][inv[b]]][mul[a][b]];
                if !in_comm[c] {
                    in_comm[c] = true;
                    comm.push(c);
                }
            }
        }
        let mut grew = true;
        while grew {
            grew = false;
            let snapshot = comm.clone();
            for &a in &snapshot {
                for &b in &snapshot {
                    let c = mul[a][b];
                    if !in_comm[c] {
                        in_comm[c] = true;
                        comm.push(c);
                        grew = true;
                    }
                }
            }
        }
        // Representative of a coset = its element discovered first by the BFS.
        let mut ab_rep = vec![usize::MAX; n];
        for &x in &order {
            if ab_rep[x] != usize::MAX {
                continue;
            }
            for &c in &comm {
                ab_rep[mul[x][c]] = x;
            }
        }
        Ok(TableGroup {
            names,
            gens,
            mul,
            inv,
            words,
            ab_rep,
        })
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }
}

impl GroupOracle {
    /// Parses an oracle spec: `1`, `Z/n<g>`, `Z^r<a,b>`, `Fr<a,b>`, or
    /// `table(elems=..;gens=..;rows=../..)`. Unnamed generators get
    /// `prefix1`, `prefix2`, ... .
    pub fn parse(spec: &str, prefix: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec == "1" {
            return Ok(GroupOracle {
                kind: OracleKind::Cyclic { order: 1 },
                gens: Vec::new(),
            });
        }
        if let Some(body) = spec.strip_prefix("table(") {
            let body = body
                .strip_suffix(')')
                .ok_or_else(|| oracle_err("unterminated table spec"))?;
            let mut elems = None;
            let mut gens = None;
            let mut rows = None;
            for part in body.split(';') {
                let (key, value) = part
                    .split_once('=')
                    .ok_or_else(|| oracle_err(format!("bad table field `{part}`")))?;
                match key.trim() {
                    "elems" => elems = Some(split_names(value)?),
                    "gens" => gens = Some(split_names(value)?),
                    "rows" => {
                        rows = Some(
                            value
                                .split('/')
                                .map(|r| r.split(',').map(|e| e.trim().to_string()).collect())
                                .collect::<Vec<Vec<String>>>(),
                        )
                    }
                    other => return Err(oracle_err(format!("unknown table field `{other}`"))),
                }
            }
            let elems = elems.ok_or_else(|| oracle_err("table spec needs elems="))?;
            let gens = gens.ok_or_else(|| oracle_err("table spec needs gens="))?;
            let rows = rows.ok_or_else(|| oracle_err("table spec needs rows="))?;
            let table = TableGroup::build(elems, &gens, rows)?;
            return Ok(GroupOracle {
                kind: OracleKind::Table(table),
                gens,
            });
        }
        let (head, names) = split_gen_list(spec)?;
        let (kind, rank) = if let Some(n) = head.strip_prefix("Z/") {
            let order = parse_count(n, "cyclic order")?;
            if order == 0 {
                return Err(oracle_err("cyclic order must be positive"));
            }
            (OracleKind::Cyclic { order }, usize::from(order > 1))
        } else if head == "Z" {
            (OracleKind::FreeAbelian { rank: 1 }, 1)
        } else if let Some(r) = head.strip_prefix("Z^") {
            let rank = parse_count(r, "rank")? as usize;
            (OracleKind::FreeAbelian { rank }, rank)
        } else if let Some(r) = head.strip_prefix('F') {
            let rank = parse_count(r, "rank")? as usize;
            (OracleKind::Free { rank }, rank)
        } else {
            return Err(oracle_err(format!("unknown group spec `{spec}`")));
        };
        let gens = match names {
            Some(names) => {
                if names.len() != rank {
                    return Err(oracle_err(format!(
                        "`{spec}` needs {rank} generator names, got {}",
                        names.len()
                    )));
                }
                names
            }
            None => default_names(prefix, rank),
        };
        let mut seen = std::collections::HashSet::new();
        for g in &gens {
            if !seen.insert(g) {
                return Err(oracle_err(format!("duplicate generator name `{g}`")));
            }
        }
        Ok(GroupOracle { kind, gens })
    }

    pub fn kind(&self) -> &OracleKind {
        &self.kind
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn gen_names(&self) -> &[String] {
        &self.gens
    }

    pub fn identity(&self) -> GroupElem {
        match &self.kind {
            OracleKind::Cyclic { .. } => GroupElem::Cyclic(0),
            OracleKind::Free { .. } => GroupElem::Free(Vec::new()),
            OracleKind::FreeAbelian { rank } => GroupElem::Abelian(vec![0; *rank]),
            OracleKind::Table(_) => GroupElem::Table(0),
        }
    }

    pub fn is_identity(&self, a: &GroupElem) -> bool {
        *a == self.identity()
    }

    pub fn generator(&self, k: usize) -> GroupElem {
        assert!(k < self.rank(), "generator index out of range");
        match &self.kind {
            OracleKind::Cyclic { .. } => GroupElem::Cyclic(1),
            OracleKind::Free { .. } => GroupElem::Free(vec![(k, 1)]),
            OracleKind::FreeAbelian { rank } => {
                let mut v = vec![0; *rank];
                v[k] = 1;
                GroupElem::Abelian(v)
            }
            OracleKind::Table(t) => GroupElem::Table(t.gens[k]),
        }
    }

    /// Whether `a` is a well-formed element of this group.
    pub fn contains(&self, a: &GroupElem) -> bool {
        match (&self.kind, a) {
            (OracleKind::Cyclic { order }, GroupElem::Cyclic(x)) => x < order,
            (OracleKind::FreeAbelian { rank }, GroupElem::Abelian(v)) => v.len() == *rank,
            (OracleKind::Free { rank }, GroupElem::Free(s)) => {
                s.iter().all(|&(g, e)| g < *rank && e != 0)
                    && s.windows(2).all(|w| w[0].0 != w[1].0)
            }
            (OracleKind::Table(t), GroupElem::Table(x)) => *x < t.order(),
            _ => false,
        }
    }

    pub fn mul(&self, a: &GroupElem, b: &GroupElem) -> GroupElem {
        match (&self.kind, a, b) {
            (OracleKind::Cyclic { order }, GroupElem::Cyclic(x), GroupElem::Cyclic(y)) => {
                GroupElem::Cyclic((x + y) % order)
            }
            (OracleKind::FreeAbelian { .. }, GroupElem::Abelian(x), GroupElem::Abelian(y)) => {
                GroupElem::Abelian(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            (OracleKind::Free { .. }, GroupElem::Free(x), GroupElem::Free(y)) => {
                let mut out = x.clone();
                for &(g, e) in y {
                    push_syllable(&mut out, g, e);
                }
                GroupElem::Free(out)
            }
            (OracleKind::Table(t), GroupElem::Table(x), GroupElem::Table(y)) => {
                GroupElem::Table(t.mul[*x][*y])
            }
            _ => panic!("element kind does not match oracle"),
        }
    }

    pub fn inv(&self, a: &GroupElem) -> GroupElem {
        match (&self.kind, a) {
            (OracleKind::Cyclic { order }, GroupElem::Cyclic(x)) => {
                GroupElem::Cyclic((order - x) % order)
            }
            (OracleKind::FreeAbelian { .. }, GroupElem::Abelian(x)) => {
                GroupElem::Abelian(x.iter().map(|p| -p).collect())
            }
            (OracleKind::Free { .. }, GroupElem::Free(x)) => {
                GroupElem::Free(x.iter().rev().map(|&(g, e)| (g, -e)).collect())
            }
            (OracleKind::Table(t), GroupElem::Table(x)) => GroupElem::Table(t.inv[*x]),
            _ => panic!("element kind does not match oracle"),
        }
    }

    pub fn pow(&self, a: &GroupElem, n: i64) -> GroupElem {
        let base = if n < 0 { self.inv(a) } else { a.clone() };
        let mut acc = self.identity();
        let mut sq = base;
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &sq);
            }
            sq = self.mul(&sq, &sq);
            e >>= 1;
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        match &self.kind {
            OracleKind::Cyclic { .. } | OracleKind::Table(_) => true,
            OracleKind::Free { rank } | OracleKind::FreeAbelian { rank } => *rank == 0,
        }
    }

    /// All elements in canonical order, when the group is finite.
    pub fn elements(&self) -> Option<Vec<GroupElem>> {
        match &self.kind {
            OracleKind::Cyclic { order } => Some((0..*order).map(GroupElem::Cyclic).collect()),
            OracleKind::Table(t) => Some((0..t.order()).map(GroupElem::Table).collect()),
            _ if self.is_finite() => Some(vec![self.identity()]),
            _ => None,
        }
    }

    /// Order of `a`, or `None` when it has infinite order.
    pub fn elem_order(&self, a: &GroupElem) -> Option<u64> {
        match (&self.kind, a) {
            (OracleKind::Cyclic { order }, GroupElem::Cyclic(x)) => {
                Some(order / gcd(*order, *x))
            }
            (OracleKind::Table(_), _) => {
                let mut k = 1;
                let mut p = a.clone();
                while !self.is_identity(&p) {
                    p = self.mul(&p, a);
                    k += 1;
                }
                Some(k)
            }
            _ => self.is_identity(a).then_some(1),
        }
    }

    /// A word `[(generator, exponent)]` whose left-to-right product is `a`.
    pub fn word_in_gens(&self, a: &GroupElem) -> Vec<(usize, i64)> {
        match (&self.kind, a) {
            (OracleKind::Cyclic { .. }, GroupElem::Cyclic(x)) => {
                if *x == 0 {
                    Vec::new()
                } else {
                    vec![(0, *x as i64)]
                }
            }
            (OracleKind::FreeAbelian { .. }, GroupElem::Abelian(v)) => v
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(g, &c)| (g, c))
                .collect(),
            (OracleKind::Free { .. }, GroupElem::Free(s)) => s.clone(),
            (OracleKind::Table(t), GroupElem::Table(x)) => {
                t.words[*x].iter().map(|&g| (g, 1)).collect()
            }
            _ => panic!("element kind does not match oracle"),
        }
    }

    /// Coefficients of the image of `a` in the abelianization, in canonical form.
    pub fn ab_coeffs(&self, a: &GroupElem) -> Vec<i64> {
        let mut v = vec![0; self.rank()];
        for (g, e) in self.word_in_gens(a) {
            v[g] += e;
        }
        self.ab_canon(&v)
    }

    /// Canonical coefficient vector of the abelianization class of `v`.
    pub fn ab_canon(&self, v: &[i64]) -> Vec<i64> {
        match &self.kind {
            OracleKind::Cyclic { order } => v.iter().map(|c| c.rem_euclid(*order as i64)).collect(),
            OracleKind::Free { .. } | OracleKind::FreeAbelian { .. } => v.to_vec(),
            OracleKind::Table(t) => {
                let mut x = self.identity();
                for (g, &c) in v.iter().enumerate() {
                    x = self.mul(&x, &self.pow(&self.generator(g), c));
                }
                let GroupElem::Table(idx) = x else { unreachable!() };
                let mut out = vec![0; self.rank()];
                for &g in &t.words[t.ab_rep[idx]] {
                    out[g] += 1;
                }
                out
            }
        }
    }

    /// Parses `1`, `name`, `name^n`, or a `.`-separated product of those.
    pub fn parse_elem(&self, s: &str) -> Result<GroupElem> {
        let s = s.trim();
        if s == "1" {
            return Ok(self.identity());
        }
        if s.is_empty() {
            return Err(oracle_err("empty element"));
        }
        let mut acc = self.identity();
        for tok in s.split('.') {
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => (
                    n,
                    e.parse::<i64>()
                        .map_err(|_| oracle_err(format!("bad exponent in `{tok}`")))?,
                ),
                None => (tok, 1),
            };
            let base = if let Some(k) = self.gens.iter().position(|g| g == name) {
                self.generator(k)
            } else if let OracleKind::Table(t) = &self.kind {
                match t.names.iter().position(|n| n == name) {
                    Some(idx) => GroupElem::Table(idx),
                    None => return Err(oracle_err(format!("unknown element `{name}`"))),
                }
            } else {
                return Err(oracle_err(format!("unknown generator `{name}`")));
            };
            acc = self.mul(&acc, &self.pow(&base, exp));
        }
        Ok(acc)
    }

    pub fn format_elem(&self, a: &GroupElem) -> String {
        if let (OracleKind::Table(t), GroupElem::Table(x)) = (&self.kind, a) {
            return t.names[*x].clone();
        }
        let word = self.word_in_gens(a);
        if word.is_empty() {
            return "1".to_string();
        }
        word.iter()
            .map(|&(g, e)| {
                if e == 1 {
                    self.gens[g].clone()
                } else {
                    format!("{}^{}", self.gens[g], e)
                }
            })
            .collect::<Vec<_>>()
            .join(".")
    }
}

impl fmt::Display for GroupOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.gens.join(",");
        match &self.kind {
            OracleKind::Cyclic { order: 1 } => write!(f, "1"),
            OracleKind::Cyclic { order } => write!(f, "Z/{order}<{names}>"),
            OracleKind::FreeAbelian { rank } => write!(f, "Z^{rank}<{names}>"),
            OracleKind::Free { rank } => write!(f, "F{rank}<{names}>"),
            OracleKind::Table(t) => {
                let rows = t
                    .mul
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|&x| t.names[x].as_str())
                            .collect::<Vec<_>>()
                            .join(",")
                    })
                    .collect::<Vec<_>>()
                    .join("/");
                write!(
                    f,
                    "table(elems={};gens={};rows={})",
                    t.names.join(","),
                    names,
                    rows
                )
            }
        }
    }
}

fn push_syllable(out: &mut Vec<(usize, i64)>, g: usize, e: i64) {
    if let Some(last) = out.last_mut() {
        if last.0 == g {
            last.1 += e;
            if last.1 == 0 {
                out.pop();
            }
            return;
        }
    }
    if e != 0 {
        out.push((g, e));
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KLEIN: &str = "table(elems=e,a,b,c;gens=a,b;rows=e,a,b,c/a,e,c,b/b,c,e,a/c,b,a,e)";
    // S3 with r = (123), s = (12); rows are "row then column".
    const S3: &str = "table(elems=e,r,rr,s,sr,srr;gens=r,s;rows=\
        e,r,rr,s,sr,srr/r,rr,e,srr,s,sr/rr,e,r,sr,srr,s/\
        s,sr,srr,e,r,rr/sr,srr,s,rr,e,r/srr,s,sr,r,rr,e)";

    #[test]
    fn cyclic_arithmetic() {
        let g = GroupOracle::parse("Z/3<t>", "g").unwrap();
        let t = g.generator(0);
        assert_eq!(g.pow(&t, 3), g.identity());
        assert_eq!(g.format_elem(&g.pow(&t, 2)), "t^2");
        assert_eq!(g.parse_elem("t^-1").unwrap(), g.pow(&t, 2));
        assert_eq!(g.elem_order(&t), Some(3));
    }

    #[test]
    fn free_reduction() {
        let g = GroupOracle::parse("F2<a,b>", "g").unwrap();
        let x = g.parse_elem("a.b.b^-1.a").unwrap();
        assert_eq!(g.format_elem(&x), "a^2");
        assert!(g.is_identity(&g.mul(&x, &g.inv(&x))));
        assert_eq!(g.elem_order(&x), None);
    }

    #[test]
    fn default_names_and_display() {
        let g = GroupOracle::parse("Z^2", "g").unwrap();
        assert_eq!(g.gen_names(), ["g1", "g2"]);
        assert_eq!(g.to_string(), "Z^2<g1,g2>");
        assert_eq!(GroupOracle::parse("1", "g").unwrap().rank(), 0);
        assert_eq!(GroupOracle::parse("Z/1", "g").unwrap().to_string(), "1");
    }

    #[test]
    fn table_groups() {
        let k = GroupOracle::parse(KLEIN, "g").unwrap();
        assert_eq!(k.elements().unwrap().len(), 4);
        let c = k.parse_elem("c").unwrap();
        assert_eq!(k.parse_elem("a.b").unwrap(), c);
        assert_eq!(GroupOracle::parse(&k.to_string(), "g").unwrap(), k);

        let s3 = GroupOracle::parse(S3, "g").unwrap();
        // S3 abelianizes to Z/2: r is a commutator class, s is not.
        assert_eq!(s3.ab_coeffs(&s3.parse_elem("r").unwrap()), vec![0, 0]);
        let s = s3.ab_coeffs(&s3.parse_elem("s").unwrap());
        assert_eq!(s3.ab_coeffs(&s3.parse_elem("sr").unwrap()), s);
        assert_ne!(s, vec![0, 0]);
    }

    #[test]
    fn malformed_tables_are_rejected() {
        let not_assoc = "table(elems=e,a,b;gens=a;rows=e,a,b/a,a,e/b,e,b)";
        assert!(GroupOracle::parse(not_assoc, "g").is_err());
        let not_generated = "table(elems=e,a,b,c;gens=a;rows=e,a,b,c/a,e,c,b/b,c,e,a/c,b,a,e)";
        assert!(GroupOracle::parse(not_generated, "g").is_err());
        assert!(GroupOracle::parse("Z/0", "g").is_err());
        assert!(GroupOracle::parse("Q8", "g").is_err());
    }
}
