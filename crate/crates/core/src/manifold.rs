//! Homeomorphism types of irreducible summands and prime decompositions.
//!
//! Text format, one directive per line (`#` starts a comment):
//!
//! ```text
//! type A pi1=Z/2<g1> mcg=Z/2<tau> act=tau:g1
//! summand 1 A
//! summand 2 A
//! handles 2
//! ```
//!
//! `act` lists, for each mcg generator, the images of the pi1 generators
//! (comma separated, entries separated by `;`). An entry for `tau^-1`
//! declares an inverse table; otherwise the inverse is derived from the
//! generator's finite order.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::family::Universe;
use crate::group::{valid_name, GroupElem, GroupOracle, OracleKind};

/// An automorphism of a summand's fundamental group, given by the images
/// of its generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactorAut {
    pub images: Vec<GroupElem>,
}

impl FactorAut {
    pub fn identity(pi1: &GroupOracle) -> Self {
        FactorAut {
            images: (0..pi1.rank()).map(|g| pi1.generator(g)).collect(),
        }
    }

    pub fn apply(&self, pi1: &GroupOracle, h: &GroupElem) -> GroupElem {
        let mut acc = pi1.identity();
        for (g, e) in pi1.word_in_gens(h) {
            acc = pi1.mul(&acc, &pi1.pow(&self.images[g], e));
        }
        acc
    }

    /// `self`, then `next`.
    pub fn then(&self, pi1: &GroupOracle, next: &FactorAut) -> FactorAut {
        FactorAut {
            images: self.images.iter().map(|x| next.apply(pi1, x)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomeoType {
    name: String,
    pi1: GroupOracle,
    mcg: GroupOracle,
    act: Vec<FactorAut>,
    act_inv: Vec<FactorAut>,
    declared_inv: Vec<bool>,
}

impl HomeoType {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn pi1(&self) -> &GroupOracle {
        &self.pi1
    }

    pub fn mcg(&self) -> &GroupOracle {
        &self.mcg
    }

    /// Table of a single mcg generator, or of its inverse.
    pub fn generator_aut(&self, g: usize, inverse: bool) -> &FactorAut {
        if inverse {
            &self.act_inv[g]
        } else {
            &self.act[g]
        }
    }

    /// The pi1 automorphism induced by an mcg element.
    pub fn aut_of(&self, m: &GroupElem) -> FactorAut {
        let mut acc = FactorAut::identity(&self.pi1);
        for (g, e) in self.mcg.word_in_gens(m) {
            let step = self.generator_aut(g, e < 0);
            for _ in 0..e.unsigned_abs() {
                acc = acc.then(&self.pi1, step);
            }
        }
        acc
    }

    /// Parses the body of a `type` directive (everything after `type`).
    pub(crate) fn parse(line: usize, rest: &str) -> Result<Self> {
        let mut parts = rest.split_whitespace();
        let name = parts
            .next()
            .ok_or_else(|| Error::parse(line, "type directive needs a name"))?;
        if !valid_name(name) {
            return Err(Error::parse(line, format!("invalid type name `{name}`")));
        }
        let mut pi1 = None;
        let mut mcg = None;
        let mut act = None;
        for part in parts {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::parse(line, format!("expected key=value, got `{part}`")))?;
            let slot = match key {
                "pi1" => &mut pi1,
                "mcg" => &mut mcg,
                "act" => &mut act,
                other => return Err(Error::parse(line, format!("unknown type field `{other}`"))),
            };
            if slot.replace(value.to_string()).is_some() {
                return Err(Error::parse(line, format!("duplicate field `{key}`")));
            }
        }
        let pi1 = GroupOracle::parse(
            &pi1.ok_or_else(|| Error::parse(line, "type needs pi1="))?,
            "g",
        )?;
        let mcg = GroupOracle::parse(
            &mcg.ok_or_else(|| Error::parse(line, "type needs mcg="))?,
            "m",
        )?;
        let mut entries: BTreeMap<(usize, bool), FactorAut> = BTreeMap::new();
        if let Some(act) = act.filter(|a| !a.is_empty()) {
            for entry in act.split(';') {
                let (token, images) = entry
                    .split_once(':')
                    .ok_or_else(|| Error::parse(line, format!("bad act entry `{entry}`")))?;
                let (gen_name, inverse) = match token.strip_suffix("^-1") {
                    Some(base) => (base, true),
                    None => (token, false),
                };
                let g = mcg
                    .gen_names()
                    .iter()
                    .position(|n| n == gen_name)
                    .ok_or_else(|| Error::Oracle(format!("unknown mcg generator `{token}`")))?;
                let images: Vec<GroupElem> = if images.trim().is_empty() {
                    Vec::new()
                } else {
                    images
                        .split(',')
                        .map(|s| pi1.parse_elem(s))
                        .collect::<Result<_>>()?
                };
                if images.len() != pi1.rank() {
                    return Err(Error::Oracle(format!(
                        "act entry `{token}` has {} images, pi1 has {} generators",
                        images.len(),
                        pi1.rank()
                    )));
                }
                if entries.insert((g, inverse), FactorAut { images }).is_some() {
                    return Err(Error::Oracle(format!("duplicate act entry `{token}`")));
                }
            }
        }
        Self::build(name.to_string(), pi1, mcg, entries)
    }

    fn build(
        name: String,
        pi1: GroupOracle,
        mcg: GroupOracle,
        mut entries: BTreeMap<(usize, bool), FactorAut>,
    ) -> Result<Self> {
        let id = FactorAut::identity(&pi1);
        let mut act = Vec::new();
        let mut act_inv = Vec::new();
        let mut declared_inv = Vec::new();
        for g in 0..mcg.rank() {
            let gname = &mcg.gen_names()[g];
            let fwd = match entries.remove(&(g, false)) {
                Some(t) => t,
                None if pi1.rank() == 0 => id.clone(),
                None => {
                    return Err(Error::Oracle(format!(
                        "mcg generator `{gname}` of type `{name}` has no act entry"
                    )))
                }
            };
            check_homomorphism(&pi1, &fwd, gname)?;
            let (inv, declared) = match entries.remove(&(g, true)) {
                Some(t) => {
                    check_homomorphism(&pi1, &t, gname)?;
                    (t, true)
                }
                None if pi1.rank() == 0 => (id.clone(), false),
                None => {
                    let order = mcg.elem_order(&mcg.generator(g)).ok_or_else(|| {
                        Error::Oracle(format!(
                            "generator `{gname}` has infinite order; declare `{gname}^-1`"
                        ))
                    })?;
                    let mut p = id.clone();
                    for _ in 1..order {
                        p = p.then(&pi1, &fwd);
                    }
                    (p, false)
                }
            };
            if fwd.then(&pi1, &inv) != id || inv.then(&pi1, &fwd) != id {
                return Err(Error::Oracle(format!(
                    "table of `{gname}` is not inverted by `{gname}^-1`"
                )));
            }
            act.push(fwd);
            act_inv.push(inv);
            declared_inv.push(declared);
        }
        let ty = HomeoType {
            name,
            pi1,
            mcg,
            act,
            act_inv,
            declared_inv,
        };
        ty.check_relations()?;
        Ok(ty)
    }

    /// The generator tables must respect the relations of the mcg oracle.
    fn check_relations(&self) -> Result<()> {
        let id = FactorAut::identity(&self.pi1);
        let bad = |what: &str| {
            Err(Error::Oracle(format!(
                "act tables of type `{}` violate mcg relation: {what}",
                self.name
            )))
        };
        match self.mcg.kind() {
            OracleKind::Cyclic { order } if self.mcg.rank() == 1 => {
                let mut p = id.clone();
                for _ in 0..*order {
                    p = p.then(&self.pi1, &self.act[0]);
                }
                if p != id {
                    return bad("generator power");
                }
            }
            OracleKind::FreeAbelian { .. } => {
                for a in 0..self.act.len() {
                    for b in a + 1..self.act.len() {
                        let ab = self.act[a].then(&self.pi1, &self.act[b]);
                        let ba = self.act[b].then(&self.pi1, &self.act[a]);
                        if ab != ba {
                            return bad("generators commute");
                        }
                    }
                }
            }
            OracleKind::Table(_) => {
                for x in self.mcg.elements().unwrap_or_default() {
                    let ax = self.aut_of(&x);
                    for g in 0..self.mcg.rank() {
                        let xg = self.mcg.mul(&x, &self.mcg.generator(g));
                        if self.aut_of(&xg) != ax.then(&self.pi1, &self.act[g]) {
                            return bad("multiplication table");
                        }
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Only table groups can fail to extend a generator assignment to a homomorphism.
fn check_homomorphism(pi1: &GroupOracle, t: &FactorAut, gname: &str) -> Result<()> {
    if let OracleKind::Table(_) = pi1.kind() {
        for x in pi1.elements().unwrap_or_default() {
            let fx = t.apply(pi1, &x);
            for g in 0..pi1.rank() {
                let xg = pi1.mul(&x, &pi1.generator(g));
                if t.apply(pi1, &xg) != pi1.mul(&fx, &t.images[g]) {
                    return Err(Error::Oracle(format!(
                        "table of `{gname}` is not a homomorphism"
                    )));
                }
            }
        }
    }
    Ok(())
}

impl fmt::Display for HomeoType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "type {} pi1={} mcg={}", self.name, self.pi1, self.mcg)?;
        let mut entries = Vec::new();
        for g in 0..self.mcg.rank() {
            let gname = &self.mcg.gen_names()[g];
            let fmt_table = |t: &FactorAut| {
                t.images
                    .iter()
                    .map(|x| self.pi1.format_elem(x))
                    .collect::<Vec<_>>()
                    .join(",")
            };
            entries.push(format!("{gname}:{}", fmt_table(&self.act[g])));
            if self.declared_inv[g] {
                entries.push(format!("{gname}^-1:{}", fmt_table(&self.act_inv[g])));
            }
        }
        if !entries.is_empty() && self.pi1.rank() > 0 {
            write!(f, " act={}", entries.join(";"))?;
        }
        Ok(())
    }
}

/// W as irreducible summands `1..=k` (each with a homeomorphism type) plus
/// `l` copies of S^2 x S^1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifold {
    types: Vec<HomeoType>,
    summands: Vec<usize>,
    handles: usize,
}

impl Manifold {
    pub fn new(types: Vec<HomeoType>, summands: Vec<usize>, handles: usize) -> Result<Self> {
        if summands.iter().any(|&t| t >= types.len()) {
            return Err(Error::Index("summand type out of range".into()));
        }
        let k = summands.len();
        if k + handles < 2 && handles == 0 {
            return Err(Error::NotReducible(format!(
                "{k} irreducible summand(s) and no S2xS1 summands"
            )));
        }
        if k + 2 * handles > 64 {
            return Err(Error::Index("at most 64 boundary labels are supported".into()));
        }
        Ok(Manifold {
            types,
            summands,
            handles,
        })
    }

    pub fn k(&self) -> usize {
        self.summands.len()
    }

    pub fn l(&self) -> usize {
        self.handles
    }

    pub fn universe(&self) -> Universe {
        Universe::new(self.k(), self.l())
    }

    pub fn types(&self) -> &[HomeoType] {
        &self.types
    }

    /// Homeomorphism type of summand `i` (1-based).
    pub fn summand_type(&self, i: usize) -> &HomeoType {
        &self.types[self.summands[i - 1]]
    }

    pub fn summand_type_index(&self, i: usize) -> usize {
        self.summands[i - 1]
    }

    pub fn same_type(&self, i1: usize, i2: usize) -> bool {
        self.summands[i1 - 1] == self.summands[i2 - 1]
    }

    pub fn check_summand(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.k() {
            return Err(Error::Index(format!("summand {i} not in 1..={}", self.k())));
        }
        Ok(())
    }

    pub fn check_handle(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.l() {
            return Err(Error::Index(format!("handle {j} not in 1..={}", self.l())));
        }
        Ok(())
    }

    /// Stable identity used to detect words built for different manifolds.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.to_string().hash(&mut h);
        h.finish()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut types: Vec<HomeoType> = Vec::new();
        let mut type_index: HashMap<String, usize> = HashMap::new();
        let mut summands: BTreeMap<usize, (usize, String)> = BTreeMap::new();
        let mut handles = None;
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
                "type" => {
                    let ty = HomeoType::parse(line, rest)?;
                    if type_index.insert(ty.name.clone(), types.len()).is_some() {
                        return Err(Error::parse(line, format!("type `{}` redefined", ty.name)));
                    }
                    types.push(ty);
                }
                "summand" => {
                    let fields: Vec<&str> = rest.split_whitespace().collect();
                    let [idx, name] = fields[..] else {
                        return Err(Error::parse(line, "expected `summand <i> <type>`"));
                    };
                    let idx: usize = idx
                        .parse()
                        .map_err(|_| Error::parse(line, format!("bad summand index `{idx}`")))?;
                    if summands.insert(idx, (line, name.to_string())).is_some() {
                        return Err(Error::parse(line, format!("summand {idx} declared twice")));
                    }
                }
                "handles" => {
                    let count: usize = rest
                        .trim()
                        .parse()
                        .map_err(|_| Error::parse(line, format!("bad handle count `{rest}`")))?;
                    if handles.replace(count).is_some() {
                        return Err(Error::parse(line, "handles declared twice"));
                    }
                }
                other => return Err(Error::parse(line, format!("unknown directive `{other}`"))),
            }
        }
        let mut resolved = Vec::new();
        for (expected, (idx, (line, name))) in summands.into_iter().enumerate() {
            if idx != expected + 1 {
                return Err(Error::parse(
                    line,
                    format!("summand indices must be 1..k without gaps, found {idx}"),
                ));
            }
            let t = *type_index
                .get(&name)
                .ok_or_else(|| Error::parse(line, format!("unknown type `{name}`")))?;
            resolved.push(t);
        }
        Manifold::new(types, resolved, handles.unwrap_or(0))
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.types {
            writeln!(f, "{t}")?;
        }
        for (i, &t) in self.summands.iter().enumerate() {
            writeln!(f, "summand {} {}", i + 1, self.types[t].name)?;
        }
        writeln!(f, "handles {}", self.handles)
    }
}

/// Parses and validates a manifold description.
pub fn build_manifold(spec: &str) -> Result<Manifold> {
    Manifold::parse(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_manifold() {
        let m = build_manifold(crate::REFERENCE_MANIFOLD).unwrap();
        assert_eq!((m.k(), m.l()), (2, 2));
        assert_eq!(Manifold::parse(&m.to_string()).unwrap(), m);
    }

    #[test]
    fn reducibility() {
        let one = "type A pi1=Z/2 mcg=Z/2 act=m1:g1\nsummand 1 A\n";
        assert_eq!(build_manifold(one).unwrap_err().kind(), "NotReducible");
        let handles_only = build_manifold("handles 2").unwrap();
        assert_eq!(handles_only.universe().len(), 4);
        assert!(build_manifold("handles 1").is_ok());
        let mixed = format!("{one}summand 2 A\nhandles 1");
        assert_eq!(build_manifold(&mixed).unwrap().universe().len(), 4);
    }

    #[test]
    fn parse_errors_carry_lines() {
        let err = build_manifold("handles 2\nfrobnicate 3").unwrap_err();
        assert_eq!(err, Error::parse(2, "unknown directive `frobnicate`"));
        assert!(build_manifold("summand 1 B\nhandles 1").unwrap_err().is_parse());
        let gap = "type A pi1=1 mcg=1\nsummand 2 A\nhandles 1";
        assert!(build_manifold(gap).unwrap_err().is_parse());
    }

    #[test]
    fn order_three_automorphism() {
        let m = build_manifold(
            "type T pi1=F2<a,b> mcg=Z/3<r> act=r:b,b^-1.a^-1\nsummand 1 T\nhandles 1",
        )
        .unwrap();
        let t = m.summand_type(1);
        let r = t.mcg().generator(0);
        let r_inv = t.mcg().inv(&r);
        let back = t.aut_of(&r).then(t.pi1(), &t.aut_of(&r_inv));
        assert_eq!(back, FactorAut::identity(t.pi1()));
        assert_ne!(t.aut_of(&r), t.aut_of(&r_inv));
    }

    #[test]
    fn invalid_tables_are_rejected() {
        // Not invertible: a -> a^2.
        let bad = "type T pi1=F1<a> mcg=Z/2<r> act=r:a^2\nhandles 1\nsummand 1 T";
        assert_eq!(build_manifold(bad).unwrap_err().kind(), "OracleError");
        // Invertible, but of order 3 while the mcg says order 2.
        let bad = "type T pi1=F2<a,b> mcg=Z/2<r> act=r:b,b^-1.a^-1\nhandles 1\nsummand 1 T";
        assert_eq!(build_manifold(bad).unwrap_err().kind(), "OracleError");
        // Missing entry.
        let bad = "type T pi1=Z/2 mcg=Z/2\nhandles 1\nsummand 1 T";
        assert_eq!(build_manifold(bad).unwrap_err().kind(), "OracleError");
        // Infinite order without a declared inverse.
        let bad = "type T pi1=Z^2<a,b> mcg=Z<r> act=r:a.b,b\nhandles 1\nsummand 1 T";
        assert_eq!(build_manifold(bad).unwrap_err().kind(), "OracleError");
        let good = "type T pi1=Z^2<a,b> mcg=Z<r> act=r:a.b,b;r^-1:a.b^-1,b\nhandles 1\nsummand 1 T";
        let m = build_manifold(good).unwrap();
        assert_eq!(Manifold::parse(&m.to_string()).unwrap(), m);
    }
}
