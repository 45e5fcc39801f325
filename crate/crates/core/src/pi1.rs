//! Action of generator words on pi1(W) and on its abelianization.
//!
//! Letter formulas (on generators; everything not mentioned is fixed):
//!
//! | letter               | action                        |
//! |----------------------|-------------------------------|
//! | `slideIrr(i; c)`     | `g -> c^-1 g c` for g in G_i  |
//! | `slideEnd(j,+; c)`   | `x_j -> x_j c`                |
//! | `slideEnd(j,-; c)`   | `x_j -> c^-1 x_j`             |
//! | `slideHandle(j; c)`  | `x_j -> c^-1 x_j c`           |
//! | `spin(j)`, inverse   | `x_j -> x_j^-1`               |
//! | `twist(..)`          | identity                      |
//! | `swapHandles(a,b)`   | `x_a <-> x_b`                 |
//! | `swapIrr(a,b)`       | `G_a <-> G_b`                 |
//! | `aut(i,m)`           | table of `m` on G_i           |

use serde::Serialize;

use crate::error::Result;
use crate::family::Sign;
use crate::fpword::{FPWord, FpLetter};
use crate::manifold::{FactorAut, Manifold};
use crate::words::{Generator, Word};

/// Images of every factor generator and every handle letter.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AutTable {
    /// `factors[i - 1][g]` is the image of generator `g` of factor `i`.
    pub factors: Vec<Vec<FPWord>>,
    /// `handles[j - 1]` is the image of `x_j`.
    pub handles: Vec<FPWord>,
}

/// Generators of pi1(W) as words, in table order.
pub fn generators(m: &Manifold) -> Vec<FPWord> {
    let mut out = Vec::new();
    for i in 1..=m.k() {
        let pi1 = m.summand_type(i).pi1();
        for g in 0..pi1.rank() {
            out.push(FPWord::letter(m, FpLetter::Factor(i, pi1.generator(g))));
        }
    }
    for j in 1..=m.l() {
        out.push(FPWord::letter(m, FpLetter::x(j)));
    }
    out
}

impl AutTable {
    pub fn identity(m: &Manifold) -> Self {
        Self::tabulate(m, |u| Ok(u.clone())).expect("identity is infallible")
    }

    fn tabulate(m: &Manifold, mut f: impl FnMut(&FPWord) -> Result<FPWord>) -> Result<Self> {
        let mut factors = Vec::new();
        for i in 1..=m.k() {
            let pi1 = m.summand_type(i).pi1();
            let mut row = Vec::new();
            for g in 0..pi1.rank() {
                row.push(f(&FPWord::letter(m, FpLetter::Factor(i, pi1.generator(g))))?);
            }
            factors.push(row);
        }
        let mut handles = Vec::new();
        for j in 1..=m.l() {
            handles.push(f(&FPWord::letter(m, FpLetter::x(j)))?);
        }
        Ok(AutTable { factors, handles })
    }

    /// Images in generator order, matching [`generators`].
    pub fn images(&self) -> impl Iterator<Item = &FPWord> {
        self.factors.iter().flatten().chain(self.handles.iter())
    }

    /// Applies the endomorphism defined by the table to `u`.
    pub fn apply(&self, m: &Manifold, u: &FPWord) -> FPWord {
        u.substitute(m, |l| match l {
            FpLetter::Factor(i, h) => {
                let pi1 = m.summand_type(*i).pi1();
                let mut acc = FPWord::empty();
                for (g, e) in pi1.word_in_gens(h) {
                    let img = &self.factors[i - 1][g];
                    let step = if e < 0 { img.inverse(m) } else { img.clone() };
                    for _ in 0..e.unsigned_abs() {
                        acc = acc.concat(m, &step);
                    }
                }
                acc
            }
            FpLetter::Handle { j, inv } => {
                let img = &self.handles[j - 1];
                if *inv {
                    img.inverse(m)
                } else {
                    img.clone()
                }
            }
        })
    }

    /// `self`, then `next`.
    pub fn then(&self, m: &Manifold, next: &AutTable) -> AutTable {
        AutTable {
            factors: self
                .factors
                .iter()
                .map(|row| row.iter().map(|u| next.apply(m, u)).collect())
                .collect(),
            handles: self.handles.iter().map(|u| next.apply(m, u)).collect(),
        }
    }

    pub fn is_identity(&self, m: &Manifold) -> bool {
        *self == AutTable::identity(m)
    }
}

/// Image of one letter of pi1 under one generator.
fn letter_image(m: &Manifold, g: &Generator, table: Option<&FactorAut>, l: &FpLetter) -> FPWord {
    let same = || FPWord::letter(m, l.clone());
    match (g, l) {
        (Generator::SlideIrr { i, path }, FpLetter::Factor(i2, _)) if i == i2 => {
            same().conjugate(m, path)
        }
        (Generator::SlideEnd { j, sign, path }, FpLetter::Handle { j: j2, inv }) if j == j2 => {
            let x = FPWord::letter(m, FpLetter::x(*j));
            let img = match sign {
                Sign::Plus => x.concat(m, path),
                Sign::Minus => path.inverse(m).concat(m, &x),
            };
            if *inv {
                img.inverse(m)
            } else {
                img
            }
        }
        (Generator::SlideHandle { j, path }, FpLetter::Handle { j: j2, .. }) if j == j2 => {
            same().conjugate(m, path)
        }
        (Generator::Spin { j, .. }, FpLetter::Handle { j: j2, inv }) if j == j2 => {
            FPWord::letter(m, FpLetter::Handle { j: *j, inv: !inv })
        }
        (Generator::SwapHandles(a, b), FpLetter::Handle { j, inv }) if j == a || j == b => {
            let other = if j == a { *b } else { *a };
            FPWord::letter(m, FpLetter::Handle { j: other, inv: *inv })
        }
        (Generator::SwapIrr(a, b), FpLetter::Factor(i, h)) if i == a || i == b => {
            let other = if i == a { *b } else { *a };
            FPWord::letter(m, FpLetter::Factor(other, h.clone()))
        }
        (Generator::Aut { i, .. }, FpLetter::Factor(i2, h)) if i == i2 => {
            let pi1 = m.summand_type(*i).pi1();
            let t = table.expect("aut letters carry their table");
            FPWord::letter(m, FpLetter::Factor(*i, t.apply(pi1, h)))
        }
        _ => same(),
    }
}

fn act_letter(m: &Manifold, g: &Generator, u: &FPWord) -> FPWord {
    let table = match g {
        Generator::Aut { i, m: tok } => Some(m.summand_type(*i).aut_of(tok)),
        _ => None,
    };
    u.substitute(m, |l| letter_image(m, g, table.as_ref(), l))
}

/// Image of `u` under `w`, folding letters left to right.
pub fn act_pi1(m: &Manifold, w: &Word, u: &FPWord) -> Result<FPWord> {
    w.check_ambient(m)?;
    let mut cur = u.clone();
    for g in w.letters() {
        g.validate(m)?;
        cur = act_letter(m, g, &cur);
    }
    Ok(cur)
}

pub fn aut_of_word(m: &Manifold, w: &Word) -> Result<AutTable> {
    w.check_ambient(m)?;
    for g in w.letters() {
        g.validate(m)?;
    }
    AutTable::tabulate(m, |u| act_pi1(m, w, u))
}

/// Coordinates of H1(W): the generators of each factor, then the handles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct H1Layout {
    pub names: Vec<String>,
    #[serde(skip)]
    offsets: Vec<usize>,
    #[serde(skip)]
    handle_offset: usize,
}

impl H1Layout {
    pub fn new(m: &Manifold) -> Self {
        let mut names = Vec::new();
        let mut offsets = Vec::new();
        for i in 1..=m.k() {
            offsets.push(names.len());
            for g in m.summand_type(i).pi1().gen_names() {
                names.push(format!("{g}@{i}"));
            }
        }
        let handle_offset = names.len();
        names.extend((1..=m.l()).map(|j| format!("x{j}")));
        H1Layout {
            names,
            offsets,
            handle_offset,
        }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn factor(&self, i: usize) -> usize {
        self.offsets[i - 1]
    }

    pub fn handle(&self, j: usize) -> usize {
        self.handle_offset + j - 1
    }

    pub fn unit(&self, c: usize) -> Vec<i64> {
        let mut v = vec![0; self.dim()];
        v[c] = 1;
        v
    }

    /// Reduces each factor block to its oracle's canonical representative.
    pub fn canon(&self, m: &Manifold, v: &mut [i64]) {
        for i in 1..=m.k() {
            let pi1 = m.summand_type(i).pi1();
            let o = self.factor(i);
            let block = pi1.ab_canon(&v[o..o + pi1.rank()]);
            v[o..o + pi1.rank()].copy_from_slice(&block);
        }
    }

    pub fn ab_word(&self, m: &Manifold, u: &FPWord) -> Vec<i64> {
        let mut v = vec![0; self.dim()];
        for l in u.letters() {
            match l {
                FpLetter::Factor(i, h) => {
                    let pi1 = m.summand_type(*i).pi1();
                    let o = self.factor(*i);
                    for (c, x) in pi1.ab_coeffs(h).into_iter().enumerate() {
                        v[o + c] += x;
                    }
                }
                FpLetter::Handle { j, inv } => v[self.handle(*j)] += if *inv { -1 } else { 1 },
            }
        }
        self.canon(m, &mut v);
        v
    }
}

/// A map on H1(W); row `r` is the image of coordinate `r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbMap {
    pub coordinates: Vec<String>,
    pub rows: Vec<Vec<i64>>,
}

impl AbMap {
    fn identity(layout: &H1Layout) -> Self {
        AbMap {
            coordinates: layout.names.clone(),
            rows: (0..layout.dim()).map(|r| layout.unit(r)).collect(),
        }
    }

    /// `self`, then `next`.
    fn then(&self, m: &Manifold, layout: &H1Layout, next: &AbMap) -> AbMap {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut out = vec![0; layout.dim()];
                for (s, &c) in row.iter().enumerate() {
                    if c != 0 {
                        for (t, x) in next.rows[s].iter().enumerate() {
                            out[t] += c * x;
                        }
                    }
                }
                layout.canon(m, &mut out);
                out
            })
            .collect();
        AbMap {
            coordinates: self.coordinates.clone(),
            rows,
        }
    }

    /// Entry for the image of coordinate `row` along coordinate `col`.
    pub fn entry(&self, row: usize, col: usize) -> i64 {
        self.rows[row][col]
    }
}

fn letter_matrix(m: &Manifold, layout: &H1Layout, g: &Generator) -> AbMap {
    let mut map = AbMap::identity(layout);
    match g {
        Generator::SlideEnd { j, sign, path } => {
            let r = layout.handle(*j);
            let p = layout.ab_word(m, path);
            let s = if *sign == Sign::Plus { 1 } else { -1 };
            for (c, x) in p.into_iter().enumerate() {
                map.rows[r][c] += s * x;
            }
            layout.canon(m, &mut map.rows[r]);
        }
        Generator::Spin { j, .. } => {
            let r = layout.handle(*j);
            map.rows[r][r] = -1;
        }
        Generator::SwapHandles(a, b) => {
            let (ra, rb) = (layout.handle(*a), layout.handle(*b));
            map.rows[ra] = layout.unit(rb);
            map.rows[rb] = layout.unit(ra);
        }
        Generator::SwapIrr(a, b) => {
            let rank = m.summand_type(*a).pi1().rank();
            let (oa, ob) = (layout.factor(*a), layout.factor(*b));
            for g in 0..rank {
                map.rows[oa + g] = layout.unit(ob + g);
                map.rows[ob + g] = layout.unit(oa + g);
            }
        }
        Generator::Aut { i, m: tok } => {
            let ty = m.summand_type(*i);
            let t = ty.aut_of(tok);
            let o = layout.factor(*i);
            for (g, img) in t.images.iter().enumerate() {
                let mut row = vec![0; layout.dim()];
                for (c, x) in ty.pi1().ab_coeffs(img).into_iter().enumerate() {
                    row[o + c] = x;
                }
                map.rows[o + g] = row;
            }
        }
        // Conjugations and twists are homologically trivial.
        Generator::SlideIrr { .. } | Generator::SlideHandle { .. } | Generator::Twist(_) => {}
    }
    map
}

/// The induced map on H1(W), built from per-letter matrices without going
/// through pi1.
pub fn abelianized_action(m: &Manifold, w: &Word) -> Result<AbMap> {
    w.check_ambient(m)?;
    let layout = H1Layout::new(m);
    let mut acc = AbMap::identity(&layout);
    for g in w.letters() {
        g.validate(m)?;
        acc = acc.then(m, &layout, &letter_matrix(m, &layout, g));
    }
    Ok(acc)
}

/// Abelianization of a pi1 table.
pub fn abelianize_table(m: &Manifold, t: &AutTable) -> AbMap {
    let layout = H1Layout::new(m);
    AbMap {
        coordinates: layout.names.clone(),
        rows: t.images().map(|u| layout.ab_word(m, u)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::build_manifold;

    fn mstar() -> Manifold {
        build_manifold(crate::REFERENCE_MANIFOLD).unwrap()
    }

    fn act(m: &Manifold, w: &str, u: &str) -> String {
        let w = Word::parse(m, w).unwrap();
        act_pi1(m, &w, &FPWord::parse(m, u).unwrap()).unwrap().format(m)
    }

    #[test]
    fn letter_examples() {
        let m = mstar();
        assert_eq!(act(&m, "slideIrr(1; x1)", "g1@1"), "x1^-1 g1@1 x1");
        assert_eq!(act(&m, "spin(1)", "x1"), "x1^-1");
        assert_eq!(act(&m, "twist(nonsep1)", "x1 g1@2 x2^-1"), "x1 g1@2 x2^-1");
        assert_eq!(act(&m, "slideEnd(1,-; g1@2)", "x1"), "g1@2 x1");
        assert_eq!(act(&m, "swapIrr(1,2)", "g1@1 x1"), "g1@2 x1");
    }

    #[test]
    fn table_examples() {
        let m = mstar();
        assert!(aut_of_word(&m, &Word::empty(&m)).unwrap().is_identity(&m));
        let t = aut_of_word(&m, &Word::parse(&m, "swapHandles(1,2)").unwrap()).unwrap();
        assert_eq!(t.handles[0].format(&m), "x2");
        assert_eq!(t.handles[1].format(&m), "x1");
        assert_eq!(t.factors[0][0].format(&m), "g1@1");
        let t = aut_of_word(&m, &Word::parse(&m, "slideEnd(1,+; g1@1)").unwrap()).unwrap();
        assert_eq!(t.handles[0].format(&m), "x1 g1@1");
    }

    #[test]
    fn abelian_examples() {
        let m = mstar();
        let layout = H1Layout::new(&m);
        let ab = |s: &str| abelianized_action(&m, &Word::parse(&m, s).unwrap()).unwrap();
        let spin = ab("spin(1)");
        assert_eq!(spin.entry(layout.handle(1), layout.handle(1)), -1);
        assert_eq!(spin.entry(layout.handle(2), layout.handle(2)), 1);
        assert_eq!(ab("slideIrr(1; x1 g1@2)"), ab("e"));
        let tv = ab("slideEnd(1,+; x2)");
        assert_eq!(tv.entry(layout.handle(1), layout.handle(2)), 1);
        // Torsion coordinates are reduced mod 2.
        let t = ab("slideEnd(1,-; g1@1)");
        assert_eq!(t.entry(layout.handle(1), layout.factor(1)), 1);
    }

    #[test]
    fn abelianization_agrees_with_tables() {
        let m = build_manifold(
            "type T pi1=F2<a,b> mcg=Z/3<r> act=r:b,b^-1.a^-1\n\
             type A pi1=Z/2<g1> mcg=Z/2<tau> act=tau:g1\n\
             summand 1 T\nsummand 2 T\nsummand 3 A\nhandles 2",
        )
        .unwrap();
        let w = Word::parse(
            &m,
            "aut(1,r) slideEnd(1,-; a@2 g1@3) swapIrr(1,2) spin(2) slideEnd(2,+; x1 b@1) aut(2,r^-1)",
        )
        .unwrap();
        let t = aut_of_word(&m, &w).unwrap();
        assert_eq!(abelianized_action(&m, &w).unwrap(), abelianize_table(&m, &t));
    }
}
