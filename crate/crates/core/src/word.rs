//! Free-group words, the word metric and sphere enumeration on the Cayley tree.
//!
//! Generator `s_i` is letter index `2i`, its inverse is `2i + 1`, so inversion
//! is `index ^ 1`. Words print as `a, b, ...` for generators and `A, B, ...`
//! for inverses; the identity prints as `e`.

use std::fmt;

use num_bigint::BigUint;
use num_rational::Rational64;
use num_traits::{One, Pow};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::budget::Budget;
use crate::error::{Error, Result};

/// Number of free generators, `2 <= r <= 26`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rank(u8);

impl Rank {
    pub fn new(r: u32) -> Result<Self> {
        if (2..=26).contains(&r) {
            Ok(Rank(r as u8))
        } else {
            Err(Error::InvalidRank(r))
        }
    }

    pub fn get(self) -> u32 {
        u32::from(self.0)
    }

    /// Size of the symmetric generating set, `2r`.
    pub fn alphabet_size(self) -> u8 {
        2 * self.0
    }

    /// `2r - 1`, the branching number of the Cayley tree.
    pub fn branching(self) -> u32 {
        2 * self.get() - 1
    }

    pub fn letters(self) -> impl Iterator<Item = Letter> + Clone {
        (0..self.alphabet_size()).map(Letter)
    }

    /// Letters that may follow `last` in a reduced word (all letters at the root).
    pub fn successors(self, last: Option<Letter>) -> impl Iterator<Item = Letter> + Clone {
        self.letters()
            .filter(move |&c| last.map_or(true, |l| c != l.inverse()))
    }

    /// `|{g : |g| = m}|`, which is `1` for `m = 0` and `2r (2r-1)^(m-1)` otherwise.
    pub fn sphere_count(self, m: usize) -> BigUint {
        if m == 0 {
            return BigUint::one();
        }
        BigUint::from(2 * self.get()) * BigUint::from(self.branching()).pow(m as u32 - 1)
    }

    pub fn ball_count(self, radius: usize) -> BigUint {
        (0..=radius).map(|m| self.sphere_count(m)).sum()
    }

    /// Reduced words of length `m` in lexicographic order of letter indices.
    pub fn sphere_iter(self, m: usize) -> Extensions {
        Extensions::new(self, Word::identity(), m, &[])
    }

    /// Spheres `0..=radius` concatenated.
    pub fn ball_iter(self, radius: usize) -> impl Iterator<Item = Word> {
        (0..=radius).flat_map(move |m| self.sphere_iter(m))
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One element of the symmetric generating set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u8);

impl Letter {
    pub fn new(index: u8) -> Self {
        Letter(index)
    }

    pub fn generator(i: u8) -> Self {
        Letter(2 * i)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }

    /// Index of the underlying generator `s_i`.
    pub fn generator_index(self) -> u8 {
        self.0 >> 1
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn to_char(self) -> char {
        let base = if self.is_inverse() { b'A' } else { b'a' };
        (base + self.generator_index()) as char
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a'..='z' => Some(Letter::generator(c as u8 - b'a')),
            'A'..='Z' => Some(Letter::generator(c as u8 - b'A').inverse()),
            _ => None,
        }
    }
}

/// A reduced word: no letter is followed by its inverse.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Result<Self> {
        if let Some(i) = letters.windows(2).position(|w| w[1] == w[0].inverse()) {
            let w = Word(letters.clone());
            return Err(Error::InvalidWord {
                word: w.to_string(),
                reason: format!("letters {} and {} cancel", i, i + 1),
            });
        }
        Ok(Word(letters))
    }

    /// Caller guarantees reducedness.
    pub(crate) fn from_reduced(letters: Vec<Letter>) -> Self {
        debug_assert!(letters.windows(2).all(|w| w[1] != w[0].inverse()));
        Word(letters)
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for c in letters {
            if out.last() == Some(&c.inverse()) {
                out.pop();
            } else {
                out.push(c);
            }
        }
        Word(out)
    }

    /// Parses the `a`/`A` serialization. `""` and `"e"` denote the identity.
    pub fn parse(s: &str, rank: Rank) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(Word::identity());
        }
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            let l = Letter::from_char(c).filter(|l| l.index() < rank.alphabet_size());
            match l {
                Some(l) => letters.push(l),
                None => {
                    return Err(Error::InvalidWord {
                        word: s.to_string(),
                        reason: format!("letter {c:?} is not a generator of rank {rank}"),
                    })
                }
            }
        }
        Word::from_letters(letters).map_err(|_| Error::InvalidWord {
            word: s.to_string(),
            reason: "not reduced".to_string(),
        })
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.len())].to_vec())
    }

    pub fn is_prefix_of(&self, other: &[Letter]) -> bool {
        other.starts_with(&self.0)
    }

    /// Appends `c` if the result stays reduced.
    pub fn child(&self, c: Letter) -> Option<Word> {
        if self.last() == Some(c.inverse()) {
            return None;
        }
        let mut v = self.0.clone();
        v.push(c);
        Some(Word(v))
    }

    pub fn children(&self, rank: Rank) -> impl Iterator<Item = Word> + '_ {
        rank.successors(self.last()).map(move |c| {
            let mut v = self.0.clone();
            v.push(c);
            Word(v)
        })
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|c| c.inverse()).collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for c in &self.0 {
            write!(f, "{}", c.to_char())?;
        }
        Ok(())
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn common_prefix_len(x: &[Letter], y: &[Letter]) -> usize {
    x.iter().zip(y).take_while(|(a, b)| a == b).count()
}

/// Group multiplication: the reduced form of `x·y`.
pub fn reduce_concat(x: &Word, y: &Word) -> Word {
    let xs = x.letters();
    let ys = y.letters();
    let mut k = 0;
    while k < xs.len() && k < ys.len() && xs[xs.len() - 1 - k] == ys[k].inverse() {
        k += 1;
    }
    let mut out = Vec::with_capacity(xs.len() + ys.len() - 2 * k);
    out.extend_from_slice(&xs[..xs.len() - k]);
    out.extend_from_slice(&ys[k..]);
    Word(out)
}

pub fn inverse(x: &Word) -> Word {
    x.inverse()
}

/// Left-invariant word metric, `|g^-1 h|`.
pub fn word_distance(g: &Word, h: &Word) -> usize {
    let p = common_prefix_len(g.letters(), h.letters());
    g.len() + h.len() - 2 * p
}

/// `(x|y)_z = (d(x,z) + d(y,z) - d(x,y)) / 2`.
pub fn gromov_product_points(x: &Word, y: &Word, z: &Word) -> Rational64 {
    let num = word_distance(x, z) as i64 + word_distance(y, z) as i64 - word_distance(x, y) as i64;
    Rational64::new(num, 2)
}

/// Iterates reduced words that extend a fixed prefix to a fixed length, in
/// lexicographic order of letter indices.
///
/// The letter right after the prefix may additionally be restricted by an
/// exclusion list. With an empty prefix and no exclusions this is a sphere.
#[derive(Clone, Debug)]
pub struct Extensions {
    rank: Rank,
    fixed: usize,
    exclude: Vec<Letter>,
    current: Option<Vec<Letter>>,
}

impl Extensions {
    pub fn new(rank: Rank, prefix: Word, len: usize, exclude: &[Letter]) -> Self {
        let fixed = prefix.len();
        let mut it = Extensions {
            rank,
            fixed,
            exclude: exclude.to_vec(),
            current: None,
        };
        if len < fixed {
            return it;
        }
        let mut letters = prefix.into_letters();
        for pos in fixed..len {
            match it.first_valid(&letters, pos, None) {
                Some(c) => letters.push(c),
                None => return it,
            }
        }
        it.current = Some(letters);
        it
    }

    /// Smallest admissible letter at `pos` strictly above `after`.
    fn first_valid(&self, letters: &[Letter], pos: usize, after: Option<Letter>) -> Option<Letter> {
        let prev = pos.checked_sub(1).map(|i| letters[i]);
        self.rank.successors(prev).find(|&c| {
            after.map_or(true, |a| c > a) && !(pos == self.fixed && self.exclude.contains(&c))
        })
    }

    fn advance(&mut self) {
        let Some(mut letters) = self.current.take() else {
            return;
        };
        let len = letters.len();
        let mut pos = len;
        while pos > self.fixed {
            pos -= 1;
            let old = letters[pos];
            letters.truncate(pos);
            if let Some(c) = self.first_valid(&letters, pos, Some(old)) {
                letters.push(c);
                for q in pos + 1..len {
                    let c = self
                        .first_valid(&letters, q, None)
                        .expect("a reduced continuation always exists");
                    letters.push(c);
                }
                self.current = Some(letters);
                return;
            }
        }
    }
}

impl Iterator for Extensions {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let out = Word(self.current.as_ref()?.clone());
        self.advance();
        Some(out)
    }
}

/// The least `δ` for which the four-point condition
/// `(x|y)_w >= min{(x|z)_w, (y|z)_w} - δ` holds on the ball of `radius`.
///
/// Charges the number of quadruples `N^4` against the budget up front.
pub fn hyperbolicity_defect(rank: Rank, radius: usize, budget: &Budget) -> Result<Rational64> {
    if radius == 0 {
        return Err(Error::params("hyperbolicity defect needs radius >= 1"));
    }
    let ball: Vec<Word> = {
        let size = rank.ball_count(radius);
        let size: u128 = u128::try_from(size).map_err(|_| Error::Overflow("ball size"))?;
        budget.require(size.saturating_pow(4))?;
        budget.charge(size.saturating_pow(4) as u64)?;
        rank.ball_iter(radius).collect()
    };
    let n = ball.len();
    let mut dist = vec![0u16; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = word_distance(&ball[i], &ball[j]) as u16;
        }
    }
    // Doubled Gromov products keep everything integral.
    let worst = (0..n)
        .into_par_iter()
        .map(|w| {
            let mut g = vec![0i32; n * n];
            for x in 0..n {
                for y in 0..n {
                    g[x * n + y] = i32::from(dist[x * n + w]) + i32::from(dist[y * n + w])
                        - i32::from(dist[x * n + y]);
                }
            }
            let mut worst = i32::MIN;
            for x in 0..n {
                let gx = &g[x * n..(x + 1) * n];
                for y in x..n {
                    let gy = &g[y * n..(y + 1) * n];
                    let best_z = gx.iter().zip(gy).map(|(a, b)| *a.min(b)).max().unwrap_or(0);
                    worst = worst.max(best_z - gx[y]);
                }
            }
            worst
        })
        .max()
        .unwrap_or(0);
    Ok(Rational64::new(i64::from(worst), 2))
}
