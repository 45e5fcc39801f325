//! Action of words on sphere systems and the normalization search.
//!
//! A slide drags the slid label around its path. The path is read as a
//! walk through the chambers of the nesting forest: a factor letter of G_m
//! visits the chamber of `s(m)` and comes back, a handle letter `x_j`
//! walks to the chamber of `e(j,+)` and reappears at `e(j,-)` (`x_j^-1`
//! the other way round), and the walk finally returns to its start. The
//! slid label changes sides of exactly the blocks crossed an odd number of
//! times.
//!
//! Orientation bookkeeping lives in [`TrackedState`]: one block per
//! standard sphere plus one bit per handle recording whether `d(j,+)` now
//! sits on the `-` side of its block. Only spins toggle the bit.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::classify::{allowable_reason, classify_system, Assignment, Duplicate, TargetDuplicate};
use crate::error::{Error, Result};
use crate::family::{validate_laminar, Block, Forest, LaminarFamily, Label, Sign, Universe};
use crate::fpword::{FPWord, FpLetter};
use crate::manifold::Manifold;
use crate::words::{Generator, Word};

/// Default cap on the number of states a single search may visit.
pub const DEFAULT_SEARCH_LIMIT: usize = 1_000_000;

/// Chambers visited while reading a slide path, with per-block crossing
/// counts. `None` is the root chamber.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChamberWalk {
    pub chambers: Vec<Option<usize>>,
    pub crossings: Vec<u32>,
}

impl ChamberWalk {
    pub fn new(forest: &Forest, u: Universe, start: u64, path: &FPWord) -> Self {
        let origin = forest.chamber(start);
        let mut walk = ChamberWalk {
            chambers: vec![origin],
            crossings: vec![0; forest.len()],
        };
        for l in path.letters() {
            match l {
                FpLetter::Factor(i, _) => {
                    let here = walk.position();
                    walk.go(forest, forest.chamber(u.bit(Label::S(*i))));
                    walk.go(forest, here);
                }
                FpLetter::Handle { j, inv } => {
                    let (enter, exit) = if *inv {
                        (Sign::Minus, Sign::Plus)
                    } else {
                        (Sign::Plus, Sign::Minus)
                    };
                    walk.go(forest, forest.chamber(u.bit(Label::E(*j, enter))));
                    walk.chambers.push(forest.chamber(u.bit(Label::E(*j, exit))));
                }
            }
        }
        walk.go(forest, origin);
        walk
    }

    fn position(&self) -> Option<usize> {
        *self.chambers.last().expect("walk is never empty")
    }

    fn go(&mut self, forest: &Forest, to: Option<usize>) {
        for b in forest.path_blocks(self.position(), to) {
            self.crossings[b] += 1;
        }
        self.chambers.push(to);
    }

    pub fn odd(&self, block: usize) -> bool {
        self.crossings[block] % 2 == 1
    }
}

/// Applies one letter to a block list, keeping positions. `position` is the
/// 1-based letter index used in error reports.
fn act_blocks(
    m: &Manifold,
    g: &Generator,
    blocks: &[Block],
    position: usize,
) -> Result<Vec<Block>> {
    let u = m.universe();
    let slide = |start: u64, moving: u64, path: &FPWord| -> Result<Vec<Block>> {
        let forest = Forest::new(blocks);
        let walk = ChamberWalk::new(&forest, u, start, path);
        let out: Vec<Block> = blocks
            .iter()
            .enumerate()
            .map(|(t, &b)| if walk.odd(t) { b.toggle(moving) } else { b })
            .collect();
        let diag = validate_laminar(u, &out);
        if let Some(v) = diag.violations.first() {
            return Err(Error::NotLaminarAfterSlide {
                position,
                letter: g.format(m),
                detail: v.to_string(),
            });
        }
        Ok(out)
    };
    let relabel = |f: &dyn Fn(Block) -> Block| blocks.iter().map(|&b| f(b)).collect();
    let plus = |j: usize| u.bit(Label::E(j, Sign::Plus));
    let minus = |j: usize| u.bit(Label::E(j, Sign::Minus));
    Ok(match g {
        Generator::SlideIrr { i, path } => {
            let s = u.bit(Label::S(*i));
            slide(s, s, path)?
        }
        Generator::SlideEnd { j, sign, path } => {
            let e = u.bit(Label::E(*j, *sign));
            slide(e, e, path)?
        }
        Generator::SlideHandle { j, path } => slide(plus(*j), u.pair(*j), path)?,
        Generator::Spin { j, .. } => relabel(&|b| b.swap_bits(plus(*j), minus(*j))),
        Generator::SwapIrr(a, b) => {
            let (sa, sb) = (u.bit(Label::S(*a)), u.bit(Label::S(*b)));
            relabel(&|x| x.swap_bits(sa, sb))
        }
        Generator::SwapHandles(a, b) => relabel(&|x| {
            x.swap_bits(plus(*a), plus(*b)).swap_bits(minus(*a), minus(*b))
        }),
        Generator::Twist(_) | Generator::Aut { .. } => blocks.to_vec(),
    })
}

/// Image of a family under a word, folding letters left to right.
pub fn act_system(m: &Manifold, w: &Word, f: &LaminarFamily) -> Result<LaminarFamily> {
    w.check_ambient(m)?;
    if f.universe() != m.universe() {
        return Err(Error::InvalidFamily("family is over a different label universe".into()));
    }
    let mut blocks = f.blocks().to_vec();
    for (n, g) in w.letters().iter().enumerate() {
        g.validate(m)?;
        blocks = act_blocks(m, g, &blocks, n + 1)?;
    }
    LaminarFamily::new(m.universe(), blocks)
}

/// Image of the standard system with orientation data: `blocks[i - 1]` is
/// where the sphere around summand `i` went, `blocks[k + j - 1]` where the
/// non-separating sphere of handle `j` went.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrackedState {
    pub blocks: Vec<Block>,
    /// Bit `j - 1` set when `d(j,+)` sits on the `-` side of its block.
    pub flips: u64,
}

impl TrackedState {
    pub fn standard(m: &Manifold) -> Self {
        let u = m.universe();
        let mut blocks: Vec<Block> = (1..=m.k()).map(|i| Block(u.bit(Label::S(i)))).collect();
        blocks.extend((1..=m.l()).map(|j| Block(u.bit(Label::E(j, Sign::Plus)))));
        TrackedState { blocks, flips: 0 }
    }

    pub fn apply(&self, m: &Manifold, g: &Generator, position: usize) -> Result<TrackedState> {
        let blocks = act_blocks(m, g, &self.blocks, position)?;
        let flips = match g {
            Generator::Spin { j, .. } => self.flips ^ (1 << (j - 1)),
            _ => self.flips,
        };
        Ok(TrackedState { blocks, flips })
    }

    pub fn family(&self, m: &Manifold) -> Result<LaminarFamily> {
        LaminarFamily::new(m.universe(), self.blocks.clone())
    }

    pub fn assignment(&self, m: &Manifold) -> Assignment {
        let k = m.k();
        let mut a = Assignment::default();
        for i in 1..=k {
            a.map.insert(
                Duplicate::Irr(i),
                TargetDuplicate { block: self.blocks[i - 1], side: None },
            );
        }
        for j in 1..=m.l() {
            let block = self.blocks[k + j - 1];
            let plus = if self.flips >> (j - 1) & 1 == 1 { Sign::Minus } else { Sign::Plus };
            a.map.insert(Duplicate::End(j, Sign::Plus), TargetDuplicate { block, side: Some(plus) });
            a.map.insert(
                Duplicate::End(j, Sign::Minus),
                TargetDuplicate { block, side: Some(plus.flip()) },
            );
        }
        a
    }

    /// The state an allowable assignment asks for.
    pub fn from_assignment(m: &Manifold, a: &Assignment) -> Result<TrackedState> {
        let missing = |d: Duplicate| Error::NotAllowable(format!("{d} is not assigned"));
        let mut blocks = Vec::new();
        for i in 1..=m.k() {
            blocks.push(a.get(Duplicate::Irr(i)).ok_or_else(|| missing(Duplicate::Irr(i)))?.block);
        }
        let mut flips = 0;
        for j in 1..=m.l() {
            let d = Duplicate::End(j, Sign::Plus);
            let t = a.get(d).ok_or_else(|| missing(d))?;
            blocks.push(t.block);
            if t.side == Some(Sign::Minus) {
                flips |= 1 << (j - 1);
            }
        }
        Ok(TrackedState { blocks, flips })
    }
}

/// Image of the standard system with orientation data under `w`.
pub fn tracked_image(m: &Manifold, w: &Word) -> Result<TrackedState> {
    w.check_ambient(m)?;
    let mut state = TrackedState::standard(m);
    for (n, g) in w.letters().iter().enumerate() {
        g.validate(m)?;
        state = state.apply(m, g, n + 1)?;
    }
    Ok(state)
}

/// Where each standard duplicate is carried by `w`.
pub fn trace_assignment(m: &Manifold, w: &Word) -> Result<Assignment> {
    let state = tracked_image(m, w)?;
    let family = state.family(m)?;
    let class = classify_system(m, &family)?;
    if !class.is_symmetric {
        return Err(Error::NotSymmetric(class.reason.unwrap_or_default()));
    }
    Ok(state.assignment(m))
}

/// The search alphabet, in the order that defines lexicographic minimality:
/// irreducible slides, end slides, handle slides, spins, handle swaps,
/// summand swaps. Slide paths are single positive handle letters.
pub fn normalization_moves(m: &Manifold) -> Vec<Generator> {
    let (k, l) = (m.k(), m.l());
    let x = |j: usize| FPWord::letter(m, FpLetter::x(j));
    let mut out = Vec::new();
    for i in 1..=k {
        for j in 1..=l {
            out.push(Generator::SlideIrr { i, path: x(j) });
        }
    }
    for j in 1..=l {
        for sign in [Sign::Plus, Sign::Minus] {
            for j2 in (1..=l).filter(|&j2| j2 != j) {
                out.push(Generator::SlideEnd { j, sign, path: x(j2) });
            }
        }
    }
    for j in 1..=l {
        for j2 in (1..=l).filter(|&j2| j2 != j) {
            out.push(Generator::SlideHandle { j, path: x(j2) });
        }
    }
    for j in 1..=l {
        out.push(Generator::spin(j));
    }
    for a in 1..=l {
        for b in a + 1..=l {
            out.push(Generator::SwapHandles(a, b));
        }
    }
    for a in 1..=k {
        for b in a + 1..=k {
            if m.same_type(a, b) {
                out.push(Generator::SwapIrr(a, b));
            }
        }
    }
    out
}

/// Breadth-first search tree over tracked states, rooted at the standard
/// system. Nodes keep the first parent that reached them, so each path is
/// the lexicographically least shortest word in move order.
struct SearchTree {
    states: Vec<TrackedState>,
    parent: Vec<Option<(usize, usize)>>,
    index: HashMap<TrackedState, usize>,
}

impl SearchTree {
    fn grow(
        m: &Manifold,
        moves: &[Generator],
        limit: usize,
        stop_at: Option<&TrackedState>,
    ) -> Result<SearchTree> {
        let root = TrackedState::standard(m);
        let mut tree = SearchTree {
            states: vec![root.clone()],
            parent: vec![None],
            index: HashMap::from([(root, 0)]),
        };
        if stop_at == Some(&tree.states[0]) {
            return Ok(tree);
        }
        let mut queue = VecDeque::from([0usize]);
        while let Some(cur) = queue.pop_front() {
            for (mi, g) in moves.iter().enumerate() {
                let Ok(next) = tree.states[cur].apply(m, g, 1) else {
                    continue;
                };
                if tree.index.contains_key(&next) {
                    continue;
                }
                if tree.states.len() >= limit {
                    return Err(Error::SearchLimit(limit));
                }
                let id = tree.states.len();
                tree.index.insert(next.clone(), id);
                tree.states.push(next.clone());
                tree.parent.push(Some((cur, mi)));
                if stop_at == Some(&next) {
                    log::debug!("search hit its target after {} states", tree.states.len());
                    return Ok(tree);
                }
                queue.push_back(id);
            }
        }
        log::debug!("search exhausted {} states", tree.states.len());
        Ok(tree)
    }

    fn path_to(&self, target: &TrackedState) -> Option<Vec<usize>> {
        let mut node = *self.index.get(target)?;
        let mut moves = Vec::new();
        while let Some((p, mi)) = self.parent[node] {
            moves.push(mi);
            node = p;
        }
        moves.reverse();
        Some(moves)
    }
}

/// Checks the preconditions of normalization and returns the target state.
fn target_state(m: &Manifold, target: &LaminarFamily, a: &Assignment) -> Result<TrackedState> {
    if let Some(reason) = allowable_reason(m, target, a)? {
        return Err(Error::NotAllowable(reason));
    }
    TrackedState::from_assignment(m, a)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub letter: String,
    pub family: Vec<String>,
}

/// A normalization certificate with per-move snapshots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalization {
    pub word: Word,
    pub states_visited: usize,
    pub steps: Vec<TraceStep>,
    /// Set when the assignment permutes summands, so the word needs
    /// `swapIrr` letters and is not rel V.
    pub needs_summand_swaps: bool,
}

/// Shortest word (lexicographically least among shortest) taking the
/// standard system to `target` and inducing the assignment `a`.
pub fn normalize_system(m: &Manifold, target: &LaminarFamily, a: &Assignment) -> Result<Word> {
    Ok(normalize_system_traced(m, target, a, DEFAULT_SEARCH_LIMIT)?.word)
}

pub fn normalize_system_traced(
    m: &Manifold,
    target: &LaminarFamily,
    a: &Assignment,
    limit: usize,
) -> Result<Normalization> {
    let goal = target_state(m, target, a)?;
    let moves = normalization_moves(m);
    let tree = SearchTree::grow(m, &moves, limit, Some(&goal))?;
    let path = tree
        .path_to(&goal)
        .ok_or(Error::Unreachable(tree.states.len()))?;
    certificate(m, &moves, &path, tree.states.len())
}

fn certificate(
    m: &Manifold,
    moves: &[Generator],
    path: &[usize],
    states_visited: usize,
) -> Result<Normalization> {
    let letters: Vec<Generator> = path.iter().map(|&mi| moves[mi].clone()).collect();
    let mut state = TrackedState::standard(m);
    let u = m.universe();
    let mut steps = Vec::new();
    for (n, g) in letters.iter().enumerate() {
        state = state.apply(m, g, n + 1)?;
        steps.push(TraceStep {
            letter: g.format(m),
            family: state.blocks.iter().map(|&b| u.format_block(b)).collect(),
        });
    }
    let needs_summand_swaps = letters.iter().any(|g| matches!(g, Generator::SwapIrr(..)));
    Ok(Normalization {
        word: Word::new(m, letters)?,
        states_visited,
        steps,
        needs_summand_swaps,
    })
}

/// Normalizes many targets with a single exhaustive search.
pub struct Normalizer<'a> {
    m: &'a Manifold,
    moves: Vec<Generator>,
    tree: SearchTree,
}

impl<'a> Normalizer<'a> {
    pub fn new(m: &'a Manifold, limit: usize) -> Result<Self> {
        let moves = normalization_moves(m);
        let tree = SearchTree::grow(m, &moves, limit, None)?;
        Ok(Normalizer { m, moves, tree })
    }

    /// Number of reachable tracked states.
    pub fn reachable(&self) -> usize {
        self.tree.states.len()
    }

    /// Longest certificate length.
    pub fn max_depth(&self) -> usize {
        let mut depth = vec![0usize; self.tree.states.len()];
        for n in 1..depth.len() {
            if let Some((p, _)) = self.tree.parent[n] {
                depth[n] = depth[p] + 1;
            }
        }
        depth.into_iter().max().unwrap_or(0)
    }

    pub fn normalize(&self, target: &LaminarFamily, a: &Assignment) -> Result<Word> {
        let goal = target_state(self.m, target, a)?;
        let path = self
            .tree
            .path_to(&goal)
            .ok_or(Error::Unreachable(self.tree.states.len()))?;
        Ok(certificate(self.m, &self.moves, &path, self.tree.states.len())?.word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::standard_system;
    use crate::manifold::build_manifold;

    fn m21() -> Manifold {
        build_manifold(
            "type A pi1=Z/2<g1> mcg=Z/2<tau> act=tau:g1\nsummand 1 A\nsummand 2 A\nhandles 1",
        )
        .unwrap()
    }

    fn fam(m: &Manifold, s: &str) -> LaminarFamily {
        LaminarFamily::parse(m.universe(), s).unwrap()
    }

    fn word(m: &Manifold, s: &str) -> Word {
        Word::parse(m, s).unwrap()
    }

    #[test]
    fn spin_swaps_ends() {
        let m = m21();
        let out = act_system(&m, &word(&m, "spin(1)"), &standard_system(&m)).unwrap();
        assert_eq!(out, fam(&m, "block {s1}\nblock {s2}\nblock {e1-}"));
    }

    #[test]
    fn slide_walk_example() {
        let m = m21();
        let f = fam(&m, "block {s1}\nblock {s1,e1+}\nblock {s2}");
        let out = act_system(&m, &word(&m, "slideIrr(1; x1)"), &f).unwrap();
        assert_eq!(out, standard_system(&m));

        let u = m.universe();
        let forest = f.forest();
        let path = FPWord::parse(&m, "x1").unwrap();
        let walk = ChamberWalk::new(&forest, u, u.bit(Label::S(1)), &path);
        // {s1}, then {s1,e1+}: out through both, teleport to the root, back in.
        assert_eq!(walk.crossings, vec![2, 1, 0]);
        assert_eq!(walk.chambers, vec![Some(0), Some(1), None, Some(0)]);
    }

    #[test]
    fn twists_and_auts_fix_families() {
        let m = m21();
        let f = fam(&m, "block {s1}\nblock {s1,e1+}\nblock {s2}");
        for s in ["twist(assoc1)", "twist(sep2)", "aut(1,tau)"] {
            assert_eq!(act_system(&m, &word(&m, s), &f).unwrap(), f);
        }
    }

    #[test]
    fn non_laminar_slides_are_reported() {
        let m = build_manifold("type A pi1=1 mcg=1\nsummand 1 A\nhandles 2").unwrap();
        let f = fam(&m, "block {e2+}\nblock {s1,e1+}");
        // s1 joins {e2+} but stays in {s1,e1+}, so the two blocks overlap.
        let err = act_system(&m, &word(&m, "slideIrr(1; x2)"), &f).unwrap_err();
        assert!(matches!(err, Error::NotLaminarAfterSlide { position: 1, .. }), "{err}");
    }

    #[test]
    fn traces() {
        let m = build_manifold("handles 2").unwrap();
        let u = m.universe();
        assert_eq!(trace_assignment(&m, &Word::empty(&m)).unwrap(), Assignment::identity(&m));
        let t = trace_assignment(&m, &word(&m, "spin(1)")).unwrap();
        let e1m = Block(u.bit(Label::E(1, Sign::Minus)));
        assert_eq!(t.map[&Duplicate::End(1, Sign::Plus)], TargetDuplicate { block: e1m, side: Some(Sign::Minus) });
        assert_eq!(t.map[&Duplicate::End(1, Sign::Minus)], TargetDuplicate { block: e1m, side: Some(Sign::Plus) });
        let t = trace_assignment(&m, &word(&m, "swapHandles(1,2)")).unwrap();
        let e2p = Block(u.bit(Label::E(2, Sign::Plus)));
        assert_eq!(t.map[&Duplicate::End(1, Sign::Plus)], TargetDuplicate { block: e2p, side: Some(Sign::Plus) });
    }

    #[test]
    fn normalization_examples() {
        let m = m21();
        let u = m.universe();
        let std = standard_system(&m);
        assert!(normalize_system(&m, &std, &Assignment::identity(&m)).unwrap().is_empty());

        let nested = fam(&m, "block {s1}\nblock {s1,e1+}\nblock {s2}");
        let outer = u.parse_block("{s1,e1+}").unwrap();
        let a = Assignment::parse(
            u,
            &format!("assign d1 {{s1}}\nassign d2 {{s2}}\nassign d1+ {} +\nassign d1- {} -", u.format_block(outer), u.format_block(outer)),
        )
        .unwrap();
        let w = normalize_system(&m, &nested, &a).unwrap();
        assert_eq!(w.format(&m), "slideIrr(1; x1)");
        assert_eq!(act_system(&m, &w, &std).unwrap(), nested);
        assert_eq!(trace_assignment(&m, &w).unwrap(), a);

        let flipped_family = fam(&m, "block {s1}\nblock {s2}\nblock {e1-}");
        let a = Assignment::parse(
            u,
            "assign d1 {s1}\nassign d2 {s2}\nassign d1+ {e1-} -\nassign d1- {e1-} +",
        )
        .unwrap();
        assert_eq!(normalize_system(&m, &flipped_family, &a).unwrap().format(&m), "spin(1)");
    }

    #[test]
    fn rejects_bad_targets() {
        let m = m21();
        let short = fam(&m, "block {s1}");
        let err = normalize_system(&m, &short, &Assignment::identity(&m)).unwrap_err();
        assert_eq!(err.kind(), "NotSymmetric");
        let mut broken = Assignment::identity(&m);
        broken.map.remove(&Duplicate::Irr(2));
        let err = normalize_system(&m, &standard_system(&m), &broken).unwrap_err();
        assert_eq!(err.kind(), "NotAllowable");
    }

    #[test]
    fn search_limit_is_enforced() {
        let m = m21();
        let u = m.universe();
        let nested = fam(&m, "block {s1}\nblock {s1,e1+}\nblock {s2}");
        let a = TrackedState {
            blocks: vec![Block(u.bit(Label::S(1))), Block(u.bit(Label::S(2))), u.parse_block("{s1,e1+}").unwrap()],
            flips: 1,
        }
        .assignment(&m);
        let err = normalize_system_traced(&m, &nested, &a, 2).unwrap_err();
        assert_eq!(err, Error::SearchLimit(2));
    }

    #[test]
    fn batch_agrees_with_single_search() {
        let m = build_manifold(crate::REFERENCE_MANIFOLD).unwrap();
        let n = Normalizer::new(&m, DEFAULT_SEARCH_LIMIT).unwrap();
        let nested = fam(&m, "block {s1}\nblock {s1,e1+}\nblock {s2}\nblock {e2+}");
        for a in crate::classify::allowable_assignments(&m, &nested).unwrap() {
            assert_eq!(n.normalize(&nested, &a).unwrap(), normalize_system(&m, &nested, &a).unwrap());
        }
    }

    #[test]
    fn single_handle_orientation_is_locked_to_the_family() {
        // With one handle only spins move the handle ends, so the side of
        // d(1,+) is determined by which end its block contains.
        let m = m21();
        let n = Normalizer::new(&m, DEFAULT_SEARCH_LIMIT).unwrap();
        let nested = fam(&m, "block {s1}\nblock {s1,e1+}\nblock {s2}");
        let mut reached = 0;
        for a in crate::classify::allowable_assignments(&m, &nested).unwrap() {
            match n.normalize(&nested, &a) {
                Ok(_) => reached += 1,
                Err(e) => assert_eq!(e.kind(), "Unreachable"),
            }
        }
        assert_eq!(reached, 2);
    }
}
