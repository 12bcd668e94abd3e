//! Depth-first walks over the Cayley tree relative to an anchor ray.
//!
//! In [`EnumerationMode::Exhaustive`] every reduced word is visited once.
//! In [`EnumerationMode::Orbit`] siblings that are exchanged by a tree
//! automorphism fixing `e` and the anchor ray pointwise are collapsed into one
//! representative (the lowest index) carrying their count as multiplicity.
//! This is only valid for visitors whose summand is invariant under those
//! automorphisms: anything built from word lengths, Gromov products and
//! horofunctions relative to the anchor, and `ν` itself.

use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::word::{Letter, Rank, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EnumerationMode {
    Exhaustive,
    #[default]
    Orbit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Descend,
    Prune,
}

/// A visited word and how many words it stands for.
#[derive(Debug)]
pub struct Node<'a> {
    pub letters: &'a [Letter],
    pub multiplicity: u128,
    /// The word is a prefix of the anchor.
    pub on_ray: bool,
}

impl Node<'_> {
    pub fn word(&self) -> Word {
        Word::from_reduced(self.letters.to_vec())
    }

    pub fn depth(&self) -> usize {
        self.letters.len()
    }
}

pub struct TreeWalk<'a> {
    rank: Rank,
    anchor: &'a [Letter],
    max_depth: usize,
    mode: EnumerationMode,
}

impl<'a> TreeWalk<'a> {
    pub fn new(rank: Rank, anchor: &'a [Letter], max_depth: usize, mode: EnumerationMode) -> Self {
        TreeWalk {
            rank,
            anchor,
            max_depth,
            mode,
        }
    }

    fn children(&self, letters: &[Letter], mult: u128, on_ray: bool) -> Result<Vec<(Letter, u128, bool)>> {
        let d = letters.len();
        let valid: Vec<Letter> = self.rank.successors(letters.last().copied()).collect();
        let ray_next = if on_ray { self.anchor.get(d).copied() } else { None };
        match self.mode {
            EnumerationMode::Exhaustive => Ok(valid
                .into_iter()
                .map(|c| (c, mult, ray_next == Some(c)))
                .collect()),
            EnumerationMode::Orbit => {
                if on_ray && ray_next.is_none() {
                    return Err(Error::PrefixTooShort {
                        needed: d + 1,
                        available: self.anchor.len(),
                    });
                }
                let others: Vec<Letter> = valid.into_iter().filter(|&c| Some(c) != ray_next).collect();
                let mut out = Vec::with_capacity(2);
                if let Some(c) = ray_next {
                    out.push((c, mult, true));
                }
                if let Some(&rep) = others.first() {
                    let m = mult
                        .checked_mul(others.len() as u128)
                        .ok_or(Error::Overflow("orbit multiplicity"))?;
                    out.push((rep, m, false));
                }
                out.sort_by_key(|(c, _, _)| *c);
                Ok(out)
            }
        }
    }

    fn descend<A, F>(
        &self,
        letters: &mut Vec<Letter>,
        mult: u128,
        on_ray: bool,
        acc: &mut A,
        visit: &F,
        budget: &Budget,
    ) -> Result<()>
    where
        F: Fn(&mut A, &Node<'_>) -> Result<Step>,
    {
        budget.charge(1)?;
        let step = visit(
            acc,
            &Node {
                letters,
                multiplicity: mult,
                on_ray,
            },
        )?;
        if step == Step::Prune || letters.len() >= self.max_depth {
            return Ok(());
        }
        for (c, m, ray) in self.children(letters, mult, on_ray)? {
            letters.push(c);
            self.descend(letters, m, ray, acc, visit, budget)?;
            letters.pop();
        }
        Ok(())
    }

    /// Visits the identity, then each depth-1 subtree on its own thread.
    ///
    /// Returns one accumulator per subtree in deterministic order (identity
    /// first), so callers can merge without depending on scheduling.
    pub fn fold<A, I, F>(&self, budget: &Budget, init: I, visit: F) -> Result<Vec<A>>
    where
        A: Send,
        I: Fn() -> A + Sync,
        F: Fn(&mut A, &Node<'_>) -> Result<Step> + Sync,
    {
        let mut root_acc = init();
        budget.charge(1)?;
        let step = visit(
            &mut root_acc,
            &Node {
                letters: &[],
                multiplicity: 1,
                on_ray: true,
            },
        )?;
        let mut out = vec![root_acc];
        if step == Step::Prune || self.max_depth == 0 {
            return Ok(out);
        }
        let roots = self.children(&[], 1, true)?;
        let subtrees: Vec<Result<A>> = roots
            .into_par_iter()
            .map(|(c, m, ray)| {
                let mut acc = init();
                let mut letters = vec![c];
                self.descend(&mut letters, m, ray, &mut acc, &visit, budget)?;
                Ok(acc)
            })
            .collect();
        for s in subtrees {
            out.push(s?);
        }
        Ok(out)
    }
}
