//! Alphabets, seeded random words and exhaustive enumerations used by the
//! verification suites.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::classify::classify_system;
use crate::error::Result;
use crate::family::{Block, LaminarFamily, Sign, Universe};
use crate::fpword::{fp_reduce, FPWord, FpLetter};
use crate::manifold::Manifold;
use crate::words::{Generator, TwistRef, Word};

pub use rand::SeedableRng;

pub type SuiteRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SuiteRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Letters of pi1(W) of length one: factor generators and their inverses,
/// handle letters and their inverses.
pub fn single_letters(m: &Manifold) -> Vec<FpLetter> {
    let mut out = Vec::new();
    for i in 1..=m.k() {
        let pi1 = m.summand_type(i).pi1();
        for g in 0..pi1.rank() {
            let a = pi1.generator(g);
            for e in [a.clone(), pi1.inv(&a)] {
                let l = FpLetter::Factor(i, e.clone());
                if !pi1.is_identity(&e) && !out.contains(&l) {
                    out.push(l);
                }
            }
        }
    }
    for j in 1..=m.l() {
        out.push(FpLetter::x(j));
        out.push(FpLetter::x_inv(j));
    }
    out
}

fn slides(m: &Manifold, path: FPWord) -> Vec<Generator> {
    let mut out = Vec::new();
    for i in 1..=m.k() {
        out.push(Generator::SlideIrr { i, path: path.clone() });
    }
    for j in 1..=m.l() {
        for sign in [Sign::Plus, Sign::Minus] {
            out.push(Generator::SlideEnd { j, sign, path: path.clone() });
        }
        out.push(Generator::SlideHandle { j, path: path.clone() });
    }
    out.into_iter().filter(|g| g.validate(m).is_ok()).collect()
}

/// Slides along single-letter paths, spins and their inverses, all twists
/// and handle swaps.
pub fn discrepant_alphabet(m: &Manifold) -> Vec<Generator> {
    let mut slide_letters: Vec<Generator> = single_letters(m)
        .into_iter()
        .flat_map(|l| slides(m, FPWord::letter(m, l)))
        .collect();
    slide_letters.sort();
    let mut out = slide_letters;
    for j in 1..=m.l() {
        out.push(Generator::spin(j));
        out.push(Generator::Spin { j, inverse: true });
    }
    for i in 1..=m.k() {
        out.push(Generator::Twist(TwistRef::Sep(i)));
    }
    for j in 1..=m.l() {
        out.push(Generator::Twist(TwistRef::Nonsep(j)));
        out.push(Generator::Twist(TwistRef::Assoc(j)));
    }
    for a in 1..=m.l() {
        for b in a + 1..=m.l() {
            out.push(Generator::SwapHandles(a, b));
        }
    }
    out
}

/// The discrepant alphabet plus aut letters for each mcg generator and
/// summand swaps between summands of the same type.
pub fn mixed_alphabet(m: &Manifold) -> Vec<Generator> {
    let mut out = discrepant_alphabet(m);
    for i in 1..=m.k() {
        let mcg = m.summand_type(i).mcg();
        for g in 0..mcg.rank() {
            let a = mcg.generator(g);
            for tok in [a.clone(), mcg.inv(&a)] {
                let letter = Generator::Aut { i, m: tok.clone() };
                if !mcg.is_identity(&tok) && !out.contains(&letter) {
                    out.push(letter);
                }
            }
        }
    }
    for a in 1..=m.k() {
        for b in a + 1..=m.k() {
            if m.same_type(a, b) {
                out.push(Generator::SwapIrr(a, b));
            }
        }
    }
    out
}

/// Calls `f` on every index sequence of length `0..=max_len` over an
/// alphabet of `n` letters, in shortlex order.
pub fn for_each_index_word(
    n: usize,
    max_len: usize,
    f: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    for len in 0..=max_len {
        if len > 0 && n == 0 {
            break;
        }
        let mut idx = vec![0usize; len];
        loop {
            f(&idx)?;
            let mut pos = len;
            while pos > 0 {
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < n {
                    break;
                }
                idx[pos] = 0;
            }
            if idx.iter().all(|&c| c == 0) {
                break;
            }
        }
    }
    Ok(())
}

/// Calls `f` on every word of length `0..=max_len` over `alphabet`, in
/// shortlex order.
pub fn for_each_word(
    m: &Manifold,
    alphabet: &[Generator],
    max_len: usize,
    f: &mut dyn FnMut(&Word) -> Result<()>,
) -> Result<()> {
    for_each_index_word(alphabet.len(), max_len, &mut |idx| {
        let letters = idx.iter().map(|&c| alphabet[c].clone()).collect();
        f(&Word::new(m, letters)?)
    })
}

pub fn count_words(alphabet_len: usize, max_len: usize) -> u64 {
    (0..=max_len as u32).map(|n| (alphabet_len as u64).pow(n)).sum()
}

pub fn random_path(m: &Manifold, rng: &mut SuiteRng, max_len: usize) -> FPWord {
    let letters = single_letters(m);
    let len = rng.gen_range(0..=max_len);
    let raw: Vec<FpLetter> = (0..len)
        .filter_map(|_| letters.choose(rng).cloned())
        .collect();
    fp_reduce(m, raw).expect("single letters are valid")
}

/// A random element of pi1(W) avoiding one factor or handle, so it can
/// serve as a slide path.
fn random_slide(m: &Manifold, rng: &mut SuiteRng, template: &Generator, max_path: usize) -> Generator {
    let letters: Vec<FpLetter> = single_letters(m)
        .into_iter()
        .filter(|l| match (template, l) {
            (Generator::SlideIrr { i, .. }, FpLetter::Factor(f, _)) => f != i,
            (
                Generator::SlideEnd { j, .. } | Generator::SlideHandle { j, .. },
                FpLetter::Handle { j: h, .. },
            ) => h != j,
            _ => true,
        })
        .collect();
    let len = rng.gen_range(1..=max_path.max(1));
    let raw: Vec<FpLetter> = (0..len).filter_map(|_| letters.choose(rng).cloned()).collect();
    let path = fp_reduce(m, raw).expect("single letters are valid");
    match template {
        Generator::SlideIrr { i, .. } => Generator::SlideIrr { i: *i, path },
        Generator::SlideEnd { j, sign, .. } => Generator::SlideEnd { j: *j, sign: *sign, path },
        Generator::SlideHandle { j, .. } => Generator::SlideHandle { j: *j, path },
        other => other.clone(),
    }
}

/// A random word over `alphabet` of length `0..=max_len`; slide letters get
/// fresh random paths of length up to `max_path`.
pub fn random_word(
    m: &Manifold,
    rng: &mut SuiteRng,
    alphabet: &[Generator],
    max_len: usize,
    max_path: usize,
) -> Word {
    let len = rng.gen_range(0..=max_len);
    let mut letters = Vec::with_capacity(len);
    for _ in 0..len {
        let Some(g) = alphabet.choose(rng) else { break };
        letters.push(if g.path().is_some() { random_slide(m, rng, g, max_path) } else { g.clone() });
    }
    Word::new(m, letters).expect("alphabet letters are valid")
}

/// Every laminar family over `u` (no empty or full blocks, no repeats).
pub fn all_laminar_families(u: Universe) -> Vec<LaminarFamily> {
    let full = u.full();
    let candidates: Vec<Block> = (1..full).map(Block).collect();
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    fn go(
        u: Universe,
        candidates: &[Block],
        start: usize,
        chosen: &mut Vec<Block>,
        out: &mut Vec<LaminarFamily>,
    ) {
        out.push(LaminarFamily::new(u, chosen.clone()).expect("laminar by construction"));
        for c in start..candidates.len() {
            let b = candidates[c];
            if chosen.iter().all(|&x| x.nested_or_disjoint(b)) {
                chosen.push(b);
                go(u, candidates, c + 1, chosen, out);
                chosen.pop();
            }
        }
    }
    go(u, &candidates, 0, &mut chosen, &mut out);
    out
}

pub fn symmetric_families(m: &Manifold) -> Result<Vec<LaminarFamily>> {
    let mut out = Vec::new();
    for f in all_laminar_families(m.universe()) {
        if classify_system(m, &f)?.is_symmetric {
            out.push(f);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::build_manifold;

    #[test]
    fn alphabet_sizes() {
        let m = build_manifold(crate::REFERENCE_MANIFOLD).unwrap();
        let d = discrepant_alphabet(&m);
        assert_eq!(d.len(), 45);
        assert!(d.iter().all(Generator::is_discrepant));
        assert_eq!(mixed_alphabet(&m).len(), 48);
    }

    #[test]
    fn word_enumeration_counts() {
        let m = build_manifold("handles 2").unwrap();
        let a = vec![Generator::spin(1), Generator::spin(2), Generator::SwapHandles(1, 2)];
        let mut n = 0u64;
        for_each_word(&m, &a, 3, &mut |_| {
            n += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(n, count_words(3, 3));
        assert_eq!(n, 1 + 3 + 9 + 27);
    }

    #[test]
    fn laminar_family_counts() {
        // Laminar families of nonempty proper subsets of an n-set.
        assert_eq!(all_laminar_families(Universe::new(0, 1)).len(), 4);
        assert_eq!(all_laminar_families(Universe::new(0, 3)).len(), 176_128);
        let m = build_manifold(crate::REFERENCE_MANIFOLD).unwrap();
        assert_eq!(symmetric_families(&m).unwrap().len(), 324);
    }

    #[test]
    fn random_words_are_reproducible() {
        let m = build_manifold(crate::REFERENCE_MANIFOLD).unwrap();
        let a = mixed_alphabet(&m);
        let draw = |seed| {
            let mut r = rng(seed);
            (0..20).map(|_| random_word(&m, &mut r, &a, 6, 3).format(&m)).collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
    }
}
