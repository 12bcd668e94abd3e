//! Ratio-set witnesses on the cylinder algebra and finite-scale probes of the
//! stable ratio set through products with finite pmp actions.
//!
//! A witness for `t` on `A` is a word `g ≠ e` and a cylinder `A' ⊆ A` with
//! `gA' ⊆ A` on which `dν∘g/dν` is constant and within `ε` of `t`. The
//! search only ever reaches finitely many `(g, A')`; an exhaustion report
//! says that no witness exists inside the declared `(L, D)` window and
//! nothing more.
//!
//! For products the `X` factor is measure preserving, so the derivative is
//! the base one; only containment sees the fiber.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::boundary::{
    cylinder_image, lattice_power, ratio_string, Cylinder, CylinderUnion, LatticeLog, RationalMass,
};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::word::{common_prefix_len, Extensions, Letter, Rank, Word};

/// Parses `p/q`, an integer, or a decimal such as `0.25` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::params(format!("not a rational number: {s:?}"));
    if let Ok(q) = BigRational::from_str(s) {
        return Ok(q);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').ok_or_else(bad)?;
    if int.is_empty() && frac.is_empty()
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let q = BigRational::new(num, den);
    Ok(if neg { -q } else { q })
}

/// The value `t` a witness should approximate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Ratio(BigRational),
    /// `(2r-1)^k`.
    Lattice(LatticeLog),
}

impl Target {
    /// Accepts everything [`parse_rational`] does, plus `lattice:k`.
    pub fn parse(s: &str) -> Result<Target> {
        if let Some(k) = s.trim().strip_prefix("lattice:") {
            let k = k
                .trim()
                .parse::<i64>()
                .map_err(|_| Error::params(format!("bad lattice exponent in {s:?}")))?;
            return Ok(Target::Lattice(LatticeLog(k)));
        }
        Ok(Target::Ratio(parse_rational(s)?))
    }

    pub fn value(&self, rank: Rank) -> BigRational {
        match self {
            Target::Ratio(q) => q.clone(),
            Target::Lattice(k) => k.exp(rank),
        }
    }
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Target::Ratio(q) => f.write_str(&ratio_string(q)),
            Target::Lattice(k) => write!(f, "lattice:{k}"),
        }
    }
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A measure-preserving action of the free group on `{0, …, m-1}`.
///
/// Any assignment of permutations to the generators extends to an action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePmpAction {
    weights: Vec<RationalMass>,
    perms: Vec<Vec<usize>>,
    inverse_perms: Vec<Vec<usize>>,
}

impl FinitePmpAction {
    pub fn new(rank: Rank, weights: Vec<RationalMass>, perms: Vec<Vec<usize>>) -> Result<Self> {
        let m = weights.len();
        if m == 0 {
            return Err(Error::params("a pmp action needs at least one point"));
        }
        if weights.iter().any(|w| w.value().is_negative()) {
            return Err(Error::params("weights must be nonnegative"));
        }
        if weights.iter().cloned().sum::<RationalMass>() != RationalMass::one() {
            return Err(Error::params("weights must sum to 1"));
        }
        if perms.len() != rank.get() as usize {
            return Err(Error::params(format!(
                "expected {} generator permutations, got {}",
                rank.get(),
                perms.len()
            )));
        }
        let mut inverse_perms = Vec::with_capacity(perms.len());
        for p in &perms {
            let mut inv = vec![usize::MAX; m];
            if p.len() != m {
                return Err(Error::params("permutation has the wrong size"));
            }
            for (i, &j) in p.iter().enumerate() {
                if j >= m || inv[j] != usize::MAX {
                    return Err(Error::params("generator map is not a permutation"));
                }
                inv[j] = i;
            }
            if (0..m).any(|i| weights[p[i]] != weights[i]) {
                return Err(Error::params("permutation does not preserve the weights"));
            }
            inverse_perms.push(inv);
        }
        Ok(FinitePmpAction {
            weights,
            perms,
            inverse_perms,
        })
    }

    /// The one-point space.
    pub fn trivial(rank: Rank) -> Self {
        FinitePmpAction::new(rank, vec![RationalMass::one()], vec![vec![0]; rank.get() as usize])
            .expect("trivial action is valid")
    }

    /// `Z/2` with every generator swapping the two points.
    pub fn sign(rank: Rank) -> Self {
        let half = RationalMass::from_ratio(1, 2);
        FinitePmpAction::new(rank, vec![half.clone(), half], vec![vec![1, 0]; rank.get() as usize])
            .expect("sign action is valid")
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, x: usize) -> &RationalMass {
        &self.weights[x]
    }

    pub fn apply_letter(&self, s: Letter, x: usize) -> usize {
        let i = s.generator_index() as usize;
        if s.is_inverse() {
            self.inverse_perms[i][x]
        } else {
            self.perms[i][x]
        }
    }

    /// `g·x`, applying the last letter of `g` first.
    pub fn apply_word(&self, g: &Word, x: usize) -> usize {
        g.letters()
            .iter()
            .rev()
            .fold(x, |x, &s| self.apply_letter(s, x))
    }
}

/// A finite disjoint union of sets `cyl(w) × {x}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductSet {
    rank: Rank,
    fibers: BTreeMap<usize, CylinderUnion>,
}

impl ProductSet {
    pub fn new(rank: Rank, parts: impl IntoIterator<Item = (Word, usize)>) -> Self {
        let mut grouped: BTreeMap<usize, Vec<Word>> = BTreeMap::new();
        for (w, x) in parts {
            grouped.entry(x).or_default().push(w);
        }
        let fibers = grouped
            .into_iter()
            .map(|(x, ws)| (x, CylinderUnion::new(rank, ws)))
            .filter(|(_, u)| !u.is_empty())
            .collect();
        ProductSet { rank, fibers }
    }

    /// `A × {x}`.
    pub fn from_base(a: &CylinderUnion, x: usize) -> Self {
        ProductSet::new(a.rank(), a.parts().map(|w| (w.clone(), x)))
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn is_empty(&self) -> bool {
        self.fibers.is_empty()
    }

    pub fn fiber(&self, x: usize) -> Option<&CylinderUnion> {
        self.fibers.get(&x)
    }

    pub fn parts(&self) -> impl Iterator<Item = (&Word, usize)> {
        self.fibers
            .iter()
            .flat_map(|(&x, u)| u.parts().map(move |w| (w, x)))
    }

    /// `(ν × μ)` of the set.
    pub fn measure(&self, action: &FinitePmpAction) -> Result<RationalMass> {
        let mut total = RationalMass::zero();
        for (&x, u) in &self.fibers {
            if x >= action.size() {
                return Err(Error::params(format!("point {x} is outside the action")));
            }
            total += &(u.measure() * action.weight(x).clone());
        }
        Ok(total)
    }
}

impl Serialize for ProductSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Part<'a> {
            cylinder: &'a Word,
            point: usize,
        }
        s.collect_seq(self.parts().map(|(w, x)| Part { cylinder: w, point: x }))
    }
}

/// `g` together with `A'` and the constant exponent of `dν∘g/dν` on `A'`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub g: Word,
    pub subset: ProductSet,
    pub exponent: LatticeLog,
}

impl Witness {
    pub fn derivative(&self) -> BigRational {
        self.exponent.exp(self.subset.rank())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchParams {
    pub target: Target,
    pub eps: BigRational,
    pub max_len: usize,
    pub depth: usize,
}

impl SearchParams {
    pub fn new(target: Target, eps: BigRational, max_len: usize, depth: usize) -> Result<Self> {
        if !eps.is_positive() {
            return Err(Error::params("eps must be positive"));
        }
        if max_len == 0 || depth == 0 {
            return Err(Error::params("max_len and depth must be at least 1"));
        }
        Ok(SearchParams {
            target,
            eps,
            max_len,
            depth,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStatus {
    Witness,
    Exhausted,
}

/// Result of a witness search. On exhaustion the counts cover the whole
/// declared window.
#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub status: SearchStatus,
    pub g: Option<Word>,
    pub subset: Option<ProductSet>,
    pub exponent: Option<LatticeLog>,
    pub derivative_num: Option<String>,
    pub derivative_den: Option<String>,
    pub derivative_real: Option<f64>,
    pub searched_g_count: u64,
    pub searched_sets_count: u64,
    pub target: Target,
    pub eps: String,
    pub max_len: usize,
    pub depth: usize,
    pub fiber_size: usize,
}

impl SearchReport {
    pub fn witness(&self) -> Option<Witness> {
        Some(Witness {
            g: self.g.clone()?,
            subset: self.subset.clone()?,
            exponent: self.exponent?,
        })
    }
}

/// `k` with `dν∘g/dν = (2r-1)^{2k-|g|}` on all of `cyl(w)`, if constant there.
fn constant_overlap(ginv: &Word, w: &Word) -> Option<usize> {
    let c = common_prefix_len(ginv.letters(), w.letters());
    if c == w.len() && c < ginv.len() {
        None
    } else {
        Some(c)
    }
}

fn candidate_sets(a: &ProductSet, action: &FinitePmpAction, depth: usize) -> Vec<(Word, usize)> {
    let rank = a.rank();
    let mut out = Vec::new();
    for d in 0..=depth {
        for (&x, u) in &a.fibers {
            if action.weight(x).is_zero() {
                continue;
            }
            for w in u.parts().filter(|w| w.len() <= d) {
                out.extend(Extensions::new(rank, w.clone(), d, &[]).map(|c| (c, x)));
            }
        }
    }
    out
}

struct GOutcome {
    found: Option<(usize, Witness)>,
}

fn search_one_g(
    g: &Word,
    a: &ProductSet,
    action: &FinitePmpAction,
    cands: &[(Word, usize)],
    close: &dyn Fn(i64) -> bool,
) -> Result<GOutcome> {
    let rank = a.rank();
    let ginv = g.inverse();
    let len = g.len() as i64;
    if !(0..=len).any(|k| close(2 * k - len)) {
        return Ok(GOutcome { found: None });
    }
    let empty = CylinderUnion::empty(rank);
    for (i, (w, x)) in cands.iter().enumerate() {
        let Some(k) = constant_overlap(&ginv, w) else {
            continue;
        };
        let e = 2 * k as i64 - len;
        if !close(e) {
            continue;
        }
        let image = cylinder_image(rank, g, &Cylinder::new(w.clone()))?;
        let target = a.fiber(action.apply_word(g, *x)).unwrap_or(&empty);
        if image.is_subset_of(target) {
            return Ok(GOutcome {
                found: Some((
                    i,
                    Witness {
                        g: g.clone(),
                        subset: ProductSet::new(rank, [(w.clone(), *x)]),
                        exponent: LatticeLog(e),
                    },
                )),
            });
        }
    }
    Ok(GOutcome { found: None })
}

/// First witness in the order: `|g|`, then `g` lexicographically, then
/// depth of `A'`, then fiber point, then `A'` lexicographically.
pub fn stable_witness_search(
    a: &ProductSet,
    action: &FinitePmpAction,
    params: &SearchParams,
    budget: &Budget,
) -> Result<SearchReport> {
    let rank = a.rank();
    if a.measure(action)?.is_zero() {
        return Err(Error::params("A must have positive measure"));
    }
    let t = params.target.value(rank);
    if !t.is_positive() {
        return Err(Error::params("t must be positive"));
    }
    let cands = candidate_sets(a, action, params.depth);
    let per_g = cands.len() as u64;
    let g_total = rank.ball_count(params.max_len) - 1u32;
    let g_total = g_total
        .to_u128()
        .ok_or(Error::Overflow("search window size"))?;
    budget.require(g_total.saturating_mul(u128::from(per_g)))?;
    budget.charge(u64::try_from(g_total * u128::from(per_g)).map_err(|_| Error::Overflow("budget"))?)?;

    let close = |e: i64| (lattice_power(rank, e) - &t).abs() < params.eps;
    let mut report = SearchReport {
        status: SearchStatus::Exhausted,
        g: None,
        subset: None,
        exponent: None,
        derivative_num: None,
        derivative_den: None,
        derivative_real: None,
        searched_g_count: 0,
        searched_sets_count: 0,
        target: params.target.clone(),
        eps: ratio_string(&params.eps),
        max_len: params.max_len,
        depth: params.depth,
        fiber_size: action.size(),
    };
    for len in 1..=params.max_len {
        let words: Vec<Word> = rank.sphere_iter(len).collect();
        let results: Vec<Result<GOutcome>> = words
            .par_iter()
            .map(|g| search_one_g(g, a, action, &cands, &close))
            .collect();
        for r in results {
            let r = r?;
            report.searched_g_count += 1;
            if let Some((i, w)) = r.found {
                report.searched_sets_count += i as u64 + 1;
                let d = w.derivative();
                report.status = SearchStatus::Witness;
                report.derivative_num = Some(d.numer().to_string());
                report.derivative_den = Some(d.denom().to_string());
                report.derivative_real = d.to_f64();
                report.exponent = Some(w.exponent);
                report.g = Some(w.g);
                report.subset = Some(w.subset);
                return Ok(report);
            }
            report.searched_sets_count += per_g;
        }
    }
    Ok(report)
}

pub fn ratio_witness_search(
    a: &CylinderUnion,
    params: &SearchParams,
    budget: &Budget,
) -> Result<SearchReport> {
    stable_witness_search(
        &ProductSet::from_base(a, 0),
        &FinitePmpAction::trivial(a.rank()),
        params,
        budget,
    )
}

/// Exact re-check of `gA' ⊆ A`, of positivity of `A'`, and that the
/// derivative is the recorded constant on `A'`.
pub fn verify_product_witness(a: &ProductSet, action: &FinitePmpAction, w: &Witness) -> Result<bool> {
    let rank = a.rank();
    if w.g.is_identity() || w.subset.measure(action)?.is_zero() {
        return Ok(false);
    }
    let ginv = w.g.inverse();
    let empty = CylinderUnion::empty(rank);
    for (c, x) in w.subset.parts() {
        match constant_overlap(&ginv, c) {
            Some(k) if 2 * k as i64 - w.g.len() as i64 == w.exponent.k() => {}
            _ => return Ok(false),
        }
        let image = cylinder_image(rank, &w.g, &Cylinder::new(c.clone()))?;
        let target = a.fiber(action.apply_word(&w.g, x)).unwrap_or(&empty);
        if !image.is_subset_of(target) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn verify_witness(a: &CylinderUnion, w: &Witness) -> Result<bool> {
    verify_product_witness(&ProductSet::from_base(a, 0), &FinitePmpAction::trivial(a.rank()), w)
}

/// Counts for the parity argument under the sign action.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParityReport {
    pub max_len: usize,
    pub g_count: u64,
    pub cylinder_pairs: u64,
    /// Pairs `(g, c)` with `g·(c × {0})` inside `B × {0}`.
    pub fiber_preserving_pairs: u64,
    pub odd_length_violations: u64,
    pub odd_exponent_violations: u64,
    /// Exponents of `dν∘g/dν` over fiber-preserving pairs.
    pub exponent_histogram: BTreeMap<i64, u64>,
}

/// Every `g` with `|g| <= L` against every cylinder of depth `|g|`.
pub fn parity_obstruction_check(rank: Rank, max_len: usize, budget: &Budget) -> Result<ParityReport> {
    if max_len == 0 {
        return Err(Error::params("max_len must be at least 1"));
    }
    let action = FinitePmpAction::sign(rank);
    let mut report = ParityReport {
        max_len,
        g_count: 0,
        cylinder_pairs: 0,
        fiber_preserving_pairs: 0,
        odd_length_violations: 0,
        odd_exponent_violations: 0,
        exponent_histogram: BTreeMap::new(),
    };
    for len in 1..=max_len {
        let sphere = rank.sphere_count(len);
        let pairs = &sphere * &sphere;
        budget.require(pairs.to_u128().ok_or(Error::Overflow("parity window"))?)?;
        budget.charge(pairs.to_u64().ok_or(Error::Overflow("parity window"))?)?;
        let words: Vec<Word> = rank.sphere_iter(len).collect();
        let per_g: Vec<(u64, BTreeMap<i64, u64>)> = words
            .par_iter()
            .map(|g| {
                let mut hist = BTreeMap::new();
                let mut n = 0u64;
                if action.apply_word(g, 0) != 0 {
                    return (0, hist);
                }
                let ginv = g.inverse();
                for c in rank.sphere_iter(len) {
                    let k = common_prefix_len(ginv.letters(), c.letters()) as i64;
                    *hist.entry(2 * k - len as i64).or_insert(0) += 1;
                    n += 1;
                }
                (n, hist)
            })
            .collect();
        for (n, hist) in per_g {
            report.g_count += 1;
            report.cylinder_pairs += words.len() as u64;
            if n == 0 {
                continue;
            }
            report.fiber_preserving_pairs += n;
            if len % 2 == 1 {
                report.odd_length_violations += n;
            }
            for (e, c) in hist {
                if e % 2 != 0 {
                    report.odd_exponent_violations += c;
                }
                *report.exponent_histogram.entry(e).or_insert(0) += c;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r2() -> Rank {
        Rank::new(2).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(s, r2()).unwrap()
    }

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn params(t: &str, eps: &str, l: usize, d: usize) -> SearchParams {
        SearchParams::new(Target::parse(t).unwrap(), q(eps), l, d).unwrap()
    }

    fn cyl_a() -> CylinderUnion {
        CylinderUnion::parse(r2(), &["a"]).unwrap()
    }

    #[test]
    fn parses_numbers() {
        assert_eq!(q("1/9"), BigRational::new(1.into(), 9.into()));
        assert_eq!(q("0.5"), BigRational::new(1.into(), 2.into()));
        assert_eq!(q("-1.25"), BigRational::new((-5).into(), 4.into()));
        assert_eq!(q("3"), BigRational::from_integer(3.into()));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational(".").is_err());
        assert_eq!(Target::parse("lattice:-2").unwrap().value(r2()), q("1/9"));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SearchParams::new(Target::parse("1").unwrap(), q("0"), 6, 8).is_err());
        assert!(SearchParams::new(Target::parse("1").unwrap(), q("1/2"), 0, 8).is_err());
        let empty = CylinderUnion::empty(r2());
        assert!(ratio_witness_search(&empty, &params("1", "1/2", 2, 2), &Budget::default()).is_err());
    }

    #[test]
    fn witness_for_one_ninth_on_cyl_a() {
        let a = cyl_a();
        let rep = ratio_witness_search(&a, &params("1/9", "1/100", 6, 8), &Budget::default()).unwrap();
        assert_eq!(rep.status, SearchStatus::Witness);
        let wit = rep.witness().unwrap();
        // lexicographically "aa" precedes "ab"
        assert_eq!(wit.g, w("aa"));
        assert_eq!(wit.derivative(), q("1/9"));
        assert!(verify_witness(&a, &wit).unwrap());
        let listed = Witness {
            g: w("ab"),
            subset: ProductSet::from_base(&a, 0),
            exponent: LatticeLog(-2),
        };
        assert!(verify_witness(&a, &listed).unwrap());
    }

    #[test]
    fn witness_for_one_on_whole_boundary() {
        let a = CylinderUnion::whole(r2());
        let rep = ratio_witness_search(&a, &params("1", "1/100", 6, 8), &Budget::default()).unwrap();
        let wit = rep.witness().unwrap();
        assert_eq!(wit.derivative(), q("1"));
        assert_eq!((wit.g.clone(), wit.subset.parts().next().unwrap().0.clone()), (w("aa"), w("Ab")));
        assert!(verify_witness(&a, &wit).unwrap());
        let listed = Witness {
            g: w("ab"),
            subset: ProductSet::new(r2(), [(w("Ba"), 0)]),
            exponent: LatticeLog(0),
        };
        assert!(verify_witness(&a, &listed).unwrap());
    }

    #[test]
    fn exhaustion_for_two() {
        let rep = ratio_witness_search(&cyl_a(), &params("2", "1/2", 6, 8), &Budget::default()).unwrap();
        assert_eq!(rep.status, SearchStatus::Exhausted);
        assert_eq!(rep.searched_g_count, 1456);
        assert_eq!(rep.searched_sets_count, 1456 * 3280);
        assert!(rep.witness().is_none());
    }

    #[test]
    fn tampered_and_empty_witnesses_fail() {
        let a = cyl_a();
        let good = ratio_witness_search(&a, &params("1/9", "1/100", 6, 8), &Budget::default())
            .unwrap()
            .witness()
            .unwrap();
        let mut bad = good.clone();
        bad.g = crate::word::reduce_concat(&good.g, &w("a"));
        assert!(!verify_witness(&a, &bad).unwrap());
        let mut empty = good.clone();
        empty.subset = ProductSet::new(r2(), []);
        assert!(!verify_witness(&a, &empty).unwrap());
        let outside = Witness {
            g: w("B"),
            subset: ProductSet::new(r2(), [(w("a"), 0)]),
            exponent: LatticeLog(-1),
        };
        assert!(!verify_witness(&a, &outside).unwrap());
    }

    #[test]
    fn trivial_product_matches_base_search() {
        let a = CylinderUnion::parse(r2(), &["ab", "B"]).unwrap();
        for t in ["1/9", "1/3", "1", "3", "9", "2"] {
            let p = params(t, "1/100", 4, 5);
            let base = ratio_witness_search(&a, &p, &Budget::default()).unwrap();
            let prod = stable_witness_search(
                &ProductSet::from_base(&a, 0),
                &FinitePmpAction::trivial(r2()),
                &p,
                &Budget::default(),
            )
            .unwrap();
            assert_eq!(serde_json::to_string(&base).unwrap(), serde_json::to_string(&prod).unwrap());
        }
    }

    #[test]
    fn sign_action_excludes_odd_exponents() {
        let sign = FinitePmpAction::sign(r2());
        let a = ProductSet::from_base(&CylinderUnion::whole(r2()), 0);
        let rep = stable_witness_search(&a, &sign, &params("1/3", "1/10", 6, 8), &Budget::default()).unwrap();
        assert_eq!(rep.status, SearchStatus::Exhausted);
        let a = ProductSet::from_base(&cyl_a(), 0);
        let rep = stable_witness_search(&a, &sign, &params("1/9", "1/100", 6, 8), &Budget::default()).unwrap();
        let wit = rep.witness().unwrap();
        assert_eq!(wit.g.len() % 2, 0);
        assert!(verify_product_witness(&a, &sign, &wit).unwrap());
        // the base search does find 1/3
        let base = ratio_witness_search(&CylinderUnion::whole(r2()), &params("1/3", "1/10", 6, 8), &Budget::default())
            .unwrap();
        assert_eq!(base.status, SearchStatus::Witness);
    }

    #[test]
    fn group_law_probe() {
        let a = cyl_a();
        let b = Budget::default();
        for (t1, t2) in [("1/9", "1/9"), ("1/9", "3"), ("3", "3"), ("1/3", "9")] {
            let w1 = ratio_witness_search(&a, &params(t1, "1/1000", 4, 6), &b).unwrap().witness().unwrap();
            let w2 = ratio_witness_search(&a, &params(t2, "1/1000", 4, 6), &b).unwrap().witness().unwrap();
            let prod = q(t1) * q(t2);
            let bound = w1.g.len() + w2.g.len();
            let p = SearchParams::new(Target::Ratio(prod.clone()), q("1/100000"), bound, 8).unwrap();
            let w3 = ratio_witness_search(&a, &p, &b).unwrap().witness().unwrap();
            assert_eq!(w3.derivative(), prod);
        }
    }

    #[test]
    fn larger_window_keeps_witnesses() {
        let a = cyl_a();
        let b = Budget::default();
        for t in ["1/27", "1/9", "1/3", "1", "3", "9", "27"] {
            let small = ratio_witness_search(&a, &params(t, "1/1000", 4, 5), &b).unwrap();
            let large = ratio_witness_search(&a, &params(t, "1/1000", 5, 6), &b).unwrap();
            if small.status == SearchStatus::Witness {
                assert_eq!(large.status, SearchStatus::Witness);
            }
        }
    }

    #[test]
    fn search_respects_budget() {
        let res = ratio_witness_search(&cyl_a(), &params("2", "1/2", 6, 8), &Budget::new(1_000_000));
        assert!(matches!(res, Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn parity_check_small_windows() {
        let b = Budget::default();
        let one = parity_obstruction_check(r2(), 1, &b).unwrap();
        assert_eq!(one.fiber_preserving_pairs, 0);
        let six = parity_obstruction_check(r2(), 6, &b).unwrap();
        assert_eq!(six.odd_length_violations, 0);
        assert_eq!(six.odd_exponent_violations, 0);
        assert!(six.exponent_histogram.keys().all(|e| e % 2 == 0));
        // Oracle: fiber-preserving pairs are exactly the even-length spheres squared.
        let expected: u64 = [2usize, 4, 6]
            .iter()
            .map(|&l| r2().sphere_count(l).to_u64().unwrap().pow(2))
            .sum();
        assert_eq!(six.fiber_preserving_pairs, expected);
    }

    #[test]
    fn pmp_action_validation() {
        let r = r2();
        let half = RationalMass::from_ratio(1, 2);
        let third = RationalMass::from_ratio(1, 3);
        assert!(FinitePmpAction::new(r, vec![half.clone()], vec![vec![0], vec![0]]).is_err());
        assert!(FinitePmpAction::new(r, vec![half.clone(), half.clone()], vec![vec![0, 0], vec![0, 1]]).is_err());
        let uneven = vec![third.clone(), RationalMass::from_ratio(2, 3)];
        assert!(FinitePmpAction::new(r, uneven, vec![vec![1, 0], vec![0, 1]]).is_err());
        let z3 = FinitePmpAction::new(
            r,
            vec![third.clone(), third.clone(), third],
            vec![vec![1, 2, 0], vec![0, 1, 2]],
        )
        .unwrap();
        assert_eq!(z3.apply_word(&w("aa"), 0), 2);
        assert_eq!(z3.apply_word(&w("A"), 0), 2);
        assert_eq!(z3.apply_word(&w("aBa").inverse(), 1), 2);
        let g = w("abAB");
        assert_eq!(z3.apply_word(&g.inverse(), z3.apply_word(&g, 2)), 2);
    }
}
