//! The boundary `∂F_r` through finite prefixes and cylinder sets, the uniform
//! Markov measure, the boundary action and its Radon–Nikodym cocycle.
//!
//! Boundary points are only ever seen through a finite prefix. Every
//! operation checks that the letters it needs are present and otherwise
//! returns [`Error::PrefixTooShort`].
//!
//! Log-derivatives live on the lattice `𝔳·ℤ` with `𝔳 = ln(2r-1)` and are
//! stored as the integer coefficient ([`LatticeLog`]); measures are exact
//! rationals ([`RationalMass`]).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::word::{common_prefix_len, reduce_concat, Letter, Rank, Word};

/// `num/den` in lowest terms, always with an explicit denominator.
pub fn ratio_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// An exact non-negative rational, used for every measure value.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalMass(BigRational);

impl RationalMass {
    pub fn new(q: BigRational) -> Self {
        RationalMass(q)
    }

    pub fn from_ratio(num: u64, den: u64) -> Self {
        RationalMass(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Self {
        RationalMass(BigRational::zero())
    }

    pub fn one() -> Self {
        RationalMass(BigRational::one())
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn into_inner(self) -> BigRational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn recip(&self) -> RationalMass {
        RationalMass(self.0.recip())
    }
}

impl fmt::Display for RationalMass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&ratio_string(&self.0))
    }
}

impl Serialize for RationalMass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Add for RationalMass {
    type Output = RationalMass;
    fn add(self, rhs: Self) -> RationalMass {
        RationalMass(self.0 + rhs.0)
    }
}

impl AddAssign<&RationalMass> for RationalMass {
    fn add_assign(&mut self, rhs: &RationalMass) {
        self.0 += &rhs.0;
    }
}

impl Mul for RationalMass {
    type Output = RationalMass;
    fn mul(self, rhs: Self) -> RationalMass {
        RationalMass(self.0 * rhs.0)
    }
}

impl std::iter::Sum for RationalMass {
    fn sum<I: Iterator<Item = RationalMass>>(iter: I) -> RationalMass {
        RationalMass(iter.map(|m| m.0).sum())
    }
}

/// The real number `k·𝔳` with `𝔳 = ln(2r-1)`, stored as `k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct LatticeLog(pub i64);

impl LatticeLog {
    pub fn k(self) -> i64 {
        self.0
    }

    /// `k·ln(2r-1)`; presentation only.
    pub fn to_f64(self, rank: Rank) -> f64 {
        self.0 as f64 * f64::from(rank.branching()).ln()
    }

    /// `e^{k𝔳} = (2r-1)^k` as an exact rational.
    pub fn exp(self, rank: Rank) -> BigRational {
        lattice_power(rank, self.0)
    }
}

impl fmt::Display for LatticeLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for LatticeLog {
    type Output = LatticeLog;
    fn add(self, rhs: Self) -> LatticeLog {
        LatticeLog(self.0 + rhs.0)
    }
}

impl Sub for LatticeLog {
    type Output = LatticeLog;
    fn sub(self, rhs: Self) -> LatticeLog {
        LatticeLog(self.0 - rhs.0)
    }
}

impl Neg for LatticeLog {
    type Output = LatticeLog;
    fn neg(self) -> LatticeLog {
        LatticeLog(-self.0)
    }
}

/// `(2r-1)^k` for any integer `k`.
pub fn lattice_power(rank: Rank, k: i64) -> BigRational {
    let base = BigInt::from(rank.branching());
    let p = base.pow(k.unsigned_abs() as u32);
    if k >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

/// The `k` with `q = (2r-1)^k`, if `q` lies on the lattice.
pub fn lattice_exponent_of(rank: Rank, q: &BigRational) -> Option<i64> {
    if !q.is_positive() {
        return None;
    }
    let base = BigInt::from(rank.branching());
    let log_of = |x: &BigInt| -> Option<i64> {
        let mut x = x.clone();
        let mut k = 0i64;
        while x > BigInt::one() {
            if !(&x % &base).is_zero() {
                return None;
            }
            x /= &base;
            k += 1;
        }
        Some(k)
    };
    if q.denom().is_one() {
        log_of(q.numer())
    } else if q.numer().is_one() {
        log_of(q.denom()).map(|k| -k)
    } else {
        None
    }
}

/// The first letters `ξ_1 ξ_2 …` of a boundary point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundaryPrefix(Word);

impl BoundaryPrefix {
    pub fn new(word: Word) -> Self {
        BoundaryPrefix(word)
    }

    pub fn parse(s: &str, rank: Rank) -> Result<Self> {
        Word::parse(s, rank).map(BoundaryPrefix)
    }

    /// Extends `word` by the lowest admissible letters up to `len`.
    pub fn canonical_extension(word: &Word, rank: Rank, len: usize) -> Self {
        let mut letters = word.letters().to_vec();
        while letters.len() < len {
            let c = rank
                .successors(letters.last().copied())
                .next()
                .expect("rank >= 2 always leaves a successor");
            letters.push(c);
        }
        BoundaryPrefix(Word::from_reduced(letters))
    }

    /// A uniformly distributed prefix of the given length, i.e. a sample of
    /// the cylinder law of `ν`.
    pub fn random<R: Rng + ?Sized>(rank: Rank, len: usize, rng: &mut R) -> Self {
        let mut letters: Vec<Letter> = Vec::with_capacity(len);
        for _ in 0..len {
            let choices: Vec<Letter> = rank.successors(letters.last().copied()).collect();
            letters.push(choices[rng.gen_range(0..choices.len())]);
        }
        BoundaryPrefix(Word::from_reduced(letters))
    }

    pub fn word(&self) -> &Word {
        &self.0
    }

    pub fn letters(&self) -> &[Letter] {
        self.0.letters()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn require(&self, needed: usize) -> Result<()> {
        if self.len() < needed {
            return Err(Error::PrefixTooShort {
                needed,
                available: self.len(),
            });
        }
        Ok(())
    }

    pub fn prefix(&self, n: usize) -> Result<Word> {
        self.require(n)?;
        Ok(self.0.prefix(n))
    }
}

impl fmt::Display for BoundaryPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}…", self.0)
    }
}

impl Serialize for BoundaryPrefix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// Common prefix length of a word with a boundary point, capped at `|word|`.
///
/// Fails when the prefix runs out before either a mismatch or the end of
/// `word` is reached.
pub(crate) fn determined_overlap(word: &[Letter], xi: &BoundaryPrefix) -> Result<usize> {
    let k = common_prefix_len(word, xi.letters());
    if k < word.len() && k == xi.len() {
        return Err(Error::PrefixTooShort {
            needed: word.len(),
            available: xi.len(),
        });
    }
    Ok(k)
}

/// The cylinder `{ξ : ξ starts with w}`; `Cylinder(e)` is the whole boundary.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cylinder(pub Word);

impl Cylinder {
    pub fn new(w: Word) -> Self {
        Cylinder(w)
    }

    pub fn word(&self) -> &Word {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for Cylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for Cylinder {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// `ν` of a cylinder of the given depth: `1` at depth 0, else
/// `(2r)^-1 (2r-1)^-(depth-1)`.
pub fn cylinder_mass_at_depth(rank: Rank, depth: usize) -> RationalMass {
    if depth == 0 {
        return RationalMass::one();
    }
    let den = BigInt::from(2 * rank.get()) * BigInt::from(rank.branching()).pow(depth as u32 - 1);
    RationalMass(BigRational::new(BigInt::one(), den))
}

pub fn cylinder_measure(rank: Rank, c: &Cylinder) -> RationalMass {
    cylinder_mass_at_depth(rank, c.depth())
}

/// A finite disjoint union of cylinders in canonical form: no part contains
/// another, and no complete family of siblings is left unmerged.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CylinderUnion {
    rank: Rank,
    parts: BTreeSet<Word>,
}

impl CylinderUnion {
    pub fn new(rank: Rank, parts: impl IntoIterator<Item = Word>) -> Self {
        let mut u = CylinderUnion {
            rank,
            parts: parts.into_iter().collect(),
        };
        u.canonicalize();
        u
    }

    pub fn empty(rank: Rank) -> Self {
        CylinderUnion {
            rank,
            parts: BTreeSet::new(),
        }
    }

    pub fn whole(rank: Rank) -> Self {
        CylinderUnion::new(rank, [Word::identity()])
    }

    pub fn single(rank: Rank, w: Word) -> Self {
        CylinderUnion::new(rank, [w])
    }

    pub fn parse(rank: Rank, words: &[&str]) -> Result<Self> {
        let parts = words
            .iter()
            .map(|s| Word::parse(s, rank))
            .collect::<Result<Vec<_>>>()?;
        Ok(CylinderUnion::new(rank, parts))
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn parts(&self) -> impl Iterator<Item = &Word> {
        self.parts.iter()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    fn canonicalize(&mut self) {
        // Drop parts already covered by a shorter part. In lexicographic
        // order every extension of `p` sorts directly after `p`.
        let mut kept: Vec<Word> = Vec::with_capacity(self.parts.len());
        for w in std::mem::take(&mut self.parts) {
            if kept.last().is_some_and(|p| p.is_prefix_of(w.letters())) {
                continue;
            }
            kept.push(w);
        }
        self.parts = kept.into_iter().collect();

        loop {
            let mut by_parent: BTreeMap<Word, usize> = BTreeMap::new();
            for w in &self.parts {
                if !w.is_empty() {
                    *by_parent.entry(w.prefix(w.len() - 1)).or_default() += 1;
                }
            }
            let complete: Vec<Word> = by_parent
                .into_iter()
                .filter(|(parent, count)| *count == parent.children(self.rank).count())
                .map(|(parent, _)| parent)
                .collect();
            if complete.is_empty() {
                break;
            }
            for parent in complete {
                for child in parent.children(self.rank) {
                    self.parts.remove(&child);
                }
                self.parts.insert(parent);
            }
        }
    }

    /// Whether the cylinder `w` lies inside the union.
    pub fn contains_cylinder(&self, w: &Word) -> bool {
        // Canonical form means coverage by deeper parts alone is impossible.
        (0..=w.len()).any(|i| self.parts.contains(&w.prefix(i)))
    }

    pub fn is_subset_of(&self, other: &CylinderUnion) -> bool {
        self.parts.iter().all(|w| other.contains_cylinder(w))
    }

    pub fn union(&self, other: &CylinderUnion) -> CylinderUnion {
        CylinderUnion::new(self.rank, self.parts.iter().chain(&other.parts).cloned())
    }

    pub fn measure(&self) -> RationalMass {
        measure_of_union(self)
    }
}

impl fmt::Display for CylinderUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.parts.iter().map(|w| w.to_string()).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

impl Serialize for CylinderUnion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.parts.iter())
    }
}

pub fn measure_of_union(u: &CylinderUnion) -> RationalMass {
    u.parts
        .iter()
        .map(|w| cylinder_mass_at_depth(u.rank, w.len()))
        .sum()
}

/// `gξ = (t_1,…,t_{n-k}, ξ_{k+1}, …)` where `k` is the cancellation between
/// `g = t_1⋯t_n` and `ξ`.
///
/// Returns the longest determined prefix of the image.
pub fn boundary_action(g: &Word, xi: &BoundaryPrefix) -> Result<BoundaryPrefix> {
    let ginv = g.inverse();
    let k = determined_overlap(ginv.letters(), xi)?;
    let n = g.len();
    let mut out = Vec::with_capacity(n + xi.len() - 2 * k);
    out.extend_from_slice(&g.letters()[..n - k]);
    out.extend_from_slice(&xi.letters()[k..]);
    if out.is_empty() {
        return Err(Error::PrefixTooShort {
            needed: xi.len() + 1,
            available: xi.len(),
        });
    }
    Ok(BoundaryPrefix(Word::from_reduced(out)))
}

/// The exact image `g·cyl(w)` as a canonical union.
///
/// Fails with [`Error::RefineCylinder`] when `w` is swallowed by a strictly
/// longer tail of `g`, since the image then depends on letters past `w`.
pub fn cylinder_image(rank: Rank, g: &Word, c: &Cylinder) -> Result<CylinderUnion> {
    let w = c.word();
    if g.is_identity() || w.is_identity() {
        return Ok(CylinderUnion::single(rank, w.clone()));
    }
    let ginv = g.inverse();
    let k = common_prefix_len(ginv.letters(), w.letters());
    if k == w.len() && k < g.len() {
        return Err(Error::RefineCylinder {
            cylinder: w.to_string(),
            word: g.to_string(),
        });
    }
    if k == w.len() && k == g.len() {
        // w = g^-1: the image is every point not starting with g_1.
        let forbidden = g.letters()[0];
        let parts = rank
            .letters()
            .filter(|&c| c != forbidden)
            .map(|c| Word::from_reduced(vec![c]));
        return Ok(CylinderUnion::new(rank, parts));
    }
    Ok(CylinderUnion::single(rank, reduce_concat(g, w)))
}

/// `log_{2r-1}` of `dν∘g/dν(ξ)`: `2k - |g|` with `k` the overlap of `g^-1`
/// and `ξ`.
pub fn rn_exponent(g: &Word, xi: &BoundaryPrefix) -> Result<LatticeLog> {
    let k = determined_overlap(g.inverse().letters(), xi)?;
    Ok(LatticeLog(2 * k as i64 - g.len() as i64))
}

/// Busemann function of the ray to `ξ`: `h_ξ(g) = |g| - 2(ξ|g)_e`.
pub fn horofunction_value(xi: &BoundaryPrefix, g: &Word) -> Result<i64> {
    let p = determined_overlap(g.letters(), xi)?;
    Ok(g.len() as i64 - 2 * p as i64)
}

/// `R(g, ξ) = -h_ξ(g^-1)` in lattice units.
pub fn cocycle_r(g: &Word, xi: &BoundaryPrefix) -> Result<LatticeLog> {
    Ok(LatticeLog(-horofunction_value(xi, &g.inverse())?))
}

/// Second argument of a boundary Gromov product.
#[derive(Clone, Copy, Debug)]
pub enum GromovArg<'a> {
    Boundary(&'a BoundaryPrefix),
    Point(&'a Word),
}

/// `(ξ|η)_e`, the common prefix length.
pub fn boundary_gromov_product(xi: &BoundaryPrefix, eta: GromovArg<'_>) -> Result<usize> {
    match eta {
        GromovArg::Point(g) => determined_overlap(g.letters(), xi),
        GromovArg::Boundary(eta) => {
            let k = common_prefix_len(xi.letters(), eta.letters());
            if k == xi.len().min(eta.len()) {
                return Err(Error::PrefixTooShort {
                    needed: k + 1,
                    available: k,
                });
            }
            Ok(k)
        }
    }
}

/// `ν({ξ' : (ξ|ξ')_e >= n})`, the shadow of the `n`-th ray point.
pub fn shadow_measure(rank: Rank, xi: &BoundaryPrefix, n: usize) -> Result<RationalMass> {
    if n == 0 {
        return Err(Error::params("shadow depth must be >= 1"));
    }
    let w = xi.prefix(n)?;
    Ok(cylinder_measure(rank, &Cylinder(w)))
}

/// The constant `C = 2r/(2r-1)` with
/// `C^-1 e^{-𝔳n} <= ν(shadow_n) <= C e^{-𝔳n}`.
pub fn shadow_constant(rank: Rank) -> RationalMass {
    RationalMass::from_ratio(2 * u64::from(rank.get()), u64::from(rank.branching()))
}

/// Integer power helper for counts.
pub(crate) fn branching_pow(rank: Rank, e: u32) -> BigUint {
    BigUint::from(rank.branching()).pow(e)
}
