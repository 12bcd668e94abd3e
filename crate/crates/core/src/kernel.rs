//! The kernel family `Υ_n(g, ξ, ξ') = 1_{Y_n(ξ)}(g)/|Y_n(ξ)| · 1_{Z_n(g)}(ξ')/ν(Z_n(g))`
//! and the measures `ζ_n` it induces on log-derivative differences.
//!
//! The open real intervals of the construction are read on integers:
//!
//! * `g ∈ Y_n(ξ)` iff `|g| ∈ {2n-2ρ+1, …, 2n-1}` and `h_ξ(g) ∈ {2ρ+1, …, 4ρ-1}`,
//! * `ξ' ∈ Z_n(g)` iff `(ξ'|g)_e ∈ {n+1, …, n+ρ-1}`.
//!
//! With `n >= 3ρ` every class below has a common prefix `p >= 1` with `ξ`
//! and `m < |g|`, so the class formulas hold without edge cases.
//!
//! Two independent routes compute `ζ_n`: [`zeta_closed_form`] sums over
//! `(L, h, m)` classes with closed-form counts, and [`zeta_bruteforce`] walks
//! concrete words and cylinders through the boundary primitives.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::boundary::{
    boundary_action, boundary_gromov_product, cocycle_r, cylinder_mass_at_depth, horofunction_value,
    lattice_power, rn_exponent, BoundaryPrefix, GromovArg, LatticeLog, RationalMass,
};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::walk::{EnumerationMode, Node, Step, TreeWalk};
use crate::word::{Extensions, Rank, Word};

/// `(r, ρ, n)`; see the module docs for the integer ranges they induce.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct KernelParams {
    #[serde(serialize_with = "ser_rank")]
    rank: Rank,
    rho: u32,
    n: u32,
}

fn ser_rank<S: Serializer>(r: &Rank, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u32(r.get())
}

impl KernelParams {
    pub fn new(rank: Rank, rho: u32, n: u32) -> Result<Self> {
        if rho < 2 {
            return Err(Error::params(format!("rho must be >= 2, got {rho}")));
        }
        if n < 3 * rho {
            return Err(Error::params(format!("n must be >= 3*rho = {}, got {n}", 3 * rho)));
        }
        Ok(KernelParams { rank, rho, n })
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn rho(&self) -> u32 {
        self.rho
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn with_n(&self, n: u32) -> Result<Self> {
        KernelParams::new(self.rank, self.rho, n)
    }

    /// Admissible word lengths `|g|`, inclusive.
    pub fn length_range(&self) -> (usize, usize) {
        let (n, rho) = (self.n as usize, self.rho as usize);
        (2 * n - 2 * rho + 1, 2 * n - 1)
    }

    /// Admissible horofunction values `h_ξ(g)`, inclusive.
    pub fn horo_range(&self) -> (i64, i64) {
        let rho = i64::from(self.rho);
        (2 * rho + 1, 4 * rho - 1)
    }

    /// Admissible values of `(ξ'|g)_e`, inclusive.
    pub fn match_range(&self) -> (usize, usize) {
        let (n, rho) = (self.n as usize, self.rho as usize);
        (n + 1, n + rho - 1)
    }

    fn in_length(&self, l: usize) -> bool {
        let (lo, hi) = self.length_range();
        (lo..=hi).contains(&l)
    }

    fn in_horo(&self, h: i64) -> bool {
        let (lo, hi) = self.horo_range();
        (lo..=hi).contains(&h)
    }

    fn in_match(&self, m: usize) -> bool {
        let (lo, hi) = self.match_range();
        (lo..=hi).contains(&m)
    }

    /// The `(|g|, h_ξ(g))` pairs making up `Y_n(ξ)`, parity-filtered.
    pub fn y_classes(&self) -> Vec<(usize, i64)> {
        let (llo, lhi) = self.length_range();
        let (hlo, hhi) = self.horo_range();
        let mut out = Vec::new();
        for l in llo..=lhi {
            for h in hlo..=hhi {
                if (l as i64 - h).rem_euclid(2) == 0 {
                    out.push((l, h));
                }
            }
        }
        out
    }

    pub fn support_classes(&self) -> Vec<SupportClass> {
        let (mlo, mhi) = self.match_range();
        let mut out = Vec::new();
        for (length, horo) in self.y_classes() {
            for match_len in mlo..=mhi {
                let class = SupportClass {
                    length,
                    horo,
                    match_len,
                };
                debug_assert!(class.common_prefix() >= 1 && match_len < length);
                out.push(class);
            }
        }
        out
    }

    /// Prefix length every operation at this scale may need from `ξ`.
    pub fn required_prefix(&self) -> usize {
        2 * self.n as usize
    }
}

/// One `(|g|, h_ξ(g), (ξ'|g)_e)` class of the support of `Υ_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SupportClass {
    pub length: usize,
    pub horo: i64,
    pub match_len: usize,
}

impl SupportClass {
    /// `p = (L - h)/2 = (ξ|g)_e`.
    pub fn common_prefix(&self) -> usize {
        ((self.length as i64 - self.horo) / 2) as usize
    }

    /// `R(g^-1, ξ') - R(g^-1, ξ) = h_ξ(g) - h_ξ'(g)` in lattice units.
    pub fn exponent(&self) -> LatticeLog {
        LatticeLog(self.horo - (self.length as i64 - 2 * self.match_len as i64))
    }
}

/// A finitely supported measure on the lattice `𝔳·ℤ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteLatticeMeasure {
    rank: Rank,
    atoms: BTreeMap<LatticeLog, RationalMass>,
}

impl DiscreteLatticeMeasure {
    pub fn new(rank: Rank) -> Self {
        DiscreteLatticeMeasure {
            rank,
            atoms: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, k: LatticeLog, mass: RationalMass) {
        if mass.is_zero() {
            return;
        }
        *self.atoms.entry(k).or_insert_with(RationalMass::zero) += &mass;
    }

    pub fn atoms(&self) -> &BTreeMap<LatticeLog, RationalMass> {
        &self.atoms
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn total_mass(&self) -> RationalMass {
        self.atoms.values().cloned().sum()
    }

    pub fn min_exponent(&self) -> Option<LatticeLog> {
        self.atoms.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<LatticeLog> {
        self.atoms.keys().next_back().copied()
    }

    /// Columns `exponent_k, value_real, mass_num, mass_den`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["exponent_k", "value_real", "mass_num", "mass_den"])?;
        for (k, m) in &self.atoms {
            w.write_record([
                k.to_string(),
                k.to_f64(self.rank).to_string(),
                m.numer().to_string(),
                m.denom().to_string(),
            ])?;
        }
        w.flush()
    }
}

impl Serialize for DiscreteLatticeMeasure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Atom {
            mass: String,
            mass_num: String,
            mass_den: String,
            value_real: f64,
        }
        let mut map = s.serialize_map(Some(self.atoms.len()))?;
        for (k, m) in &self.atoms {
            map.serialize_entry(
                &k.to_string(),
                &Atom {
                    mass: m.to_string(),
                    mass_num: m.numer().to_string(),
                    mass_den: m.denom().to_string(),
                    value_real: k.to_f64(self.rank),
                },
            )?;
        }
        map.end()
    }
}

pub fn y_membership(g: &Word, xi: &BoundaryPrefix, params: &KernelParams) -> Result<bool> {
    xi.require(params.required_prefix())?;
    if !params.in_length(g.len()) {
        return Ok(false);
    }
    Ok(params.in_horo(horofunction_value(xi, g)?))
}

/// Every `g ∈ Y_n(ξ)` exactly once, class by class.
///
/// For a class `(L, h)` the word copies `p = (L-h)/2` letters of `ξ`, then
/// leaves the ray, then continues freely.
pub fn y_enumerate<'a>(
    xi: &'a BoundaryPrefix,
    params: &KernelParams,
) -> Result<impl Iterator<Item = Word> + 'a> {
    xi.require(params.required_prefix())?;
    let rank = params.rank;
    let classes = params.y_classes();
    Ok(classes.into_iter().flat_map(move |(l, h)| {
        let p = ((l as i64 - h) / 2) as usize;
        let prefix = xi.word().prefix(p);
        Extensions::new(rank, prefix, l, &[xi.letters()[p]])
    }))
}

/// `|Y_n(ξ)| = Σ_{(L,h)} (2r-2)(2r-1)^{(L+h)/2 - 1}`, independent of `ξ`.
pub fn y_count_closed_form(params: &KernelParams) -> BigUint {
    params
        .y_classes()
        .into_iter()
        .map(|(l, h)| class_count(params.rank, l, ((l as i64 - h) / 2) as usize))
        .sum()
}

/// Words of length `l` sharing exactly `p` letters with a fixed ray, `1 <= p < l`.
fn class_count(rank: Rank, l: usize, p: usize) -> BigUint {
    BigUint::from(rank.branching() - 1) * BigUint::from(rank.branching()).pow((l - p - 1) as u32)
}

/// `ν` of the points sharing exactly `m` letters with a word longer than `m`.
fn exact_match_mass(rank: Rank, m: usize) -> BigRational {
    let r2 = BigInt::from(2 * rank.get());
    BigRational::new(BigInt::from(rank.branching() - 1), r2) * lattice_power(rank, -(m as i64))
}

/// `ν(Z_n(g)) = Σ_{m} (2r-2)(2r)^-1(2r-1)^-m`, valid once `|g| >= n + ρ`.
pub fn z_nu_measure(g: &Word, params: &KernelParams) -> Result<RationalMass> {
    let need = (params.n + params.rho) as usize;
    if g.len() < need {
        return Err(Error::Precondition(format!(
            "|g| = {} < n + rho = {need}",
            g.len()
        )));
    }
    Ok(z_measure(params))
}

fn z_measure(params: &KernelParams) -> RationalMass {
    let (lo, hi) = params.match_range();
    RationalMass::new((lo..=hi).map(|m| exact_match_mass(params.rank, m)).sum())
}

/// The constant value `1/(|Y_n| ν(Z_n))` of `Υ_n` on its support.
pub fn upsilon_support_value(params: &KernelParams) -> RationalMass {
    let ny = BigRational::from_integer(BigInt::from(y_count_closed_form(params)));
    RationalMass::new((ny * z_measure(params).into_inner()).recip())
}

/// `Υ_n(g, ξ, ξ')` for concrete prefixes.
pub fn upsilon_weight(
    g: &Word,
    xi: &BoundaryPrefix,
    xi_prime: &BoundaryPrefix,
    params: &KernelParams,
) -> Result<RationalMass> {
    if !y_membership(g, xi, params)? {
        return Ok(RationalMass::zero());
    }
    let m = boundary_gromov_product(xi_prime, GromovArg::Point(g))?;
    if !params.in_match(m) {
        return Ok(RationalMass::zero());
    }
    Ok(upsilon_support_value(params))
}

/// `ζ_n` by class counting.
pub fn zeta_closed_form(params: &KernelParams) -> DiscreteLatticeMeasure {
    let rank = params.rank;
    let ny = BigRational::from_integer(BigInt::from(y_count_closed_form(params)));
    let nz = z_measure(params).into_inner();
    let mut out = DiscreteLatticeMeasure::new(rank);
    for class in params.support_classes() {
        let count = BigRational::from_integer(BigInt::from(class_count(
            rank,
            class.length,
            class.common_prefix(),
        )));
        let q = exact_match_mass(rank, class.match_len);
        out.add(class.exponent(), RationalMass::new(count / &ny * q / &nz));
    }
    out
}

/// `(min_k, max_k)` of the atoms of `ζ_n`; `min_k·𝔳` is the realized separation.
pub fn zeta_support_bounds(params: &KernelParams) -> (i64, i64) {
    let z = zeta_closed_form(params);
    (
        z.min_exponent().map_or(0, |k| k.k()),
        z.max_exponent().map_or(0, |k| k.k()),
    )
}

/// The cylinders partitioning the points whose exact overlap with `g` is an
/// admissible `m`, found by testing every sibling of the path to `g`.
fn z_class_cylinders(g: &Word, params: &KernelParams) -> Result<Vec<Word>> {
    let rank = params.rank;
    let letters = g.letters();
    let mut out = Vec::new();
    for j in 0..letters.len() {
        let base = g.prefix(j);
        for c in rank.successors(base.last()) {
            if c == letters[j] {
                continue;
            }
            let sib = base.child(c).expect("successor keeps the word reduced");
            let probe = BoundaryPrefix::canonical_extension(&sib, rank, g.len() + 1);
            if params.in_match(boundary_gromov_product(&probe, GromovArg::Point(g))?) {
                out.push(sib);
            }
        }
    }
    Ok(out)
}

/// `ν({ξ : g ∈ Y_n(ξ)})` by testing one point in each exact-overlap cylinder.
fn y_set_measure(g: &Word, params: &KernelParams) -> Result<BigRational> {
    let rank = params.rank;
    let need = params.required_prefix().max(g.len() + 1);
    let mut cylinders: Vec<Word> = Vec::new();
    for j in 0..g.len() {
        let base = g.prefix(j);
        for c in rank.successors(base.last()) {
            if c != g.letters()[j] {
                cylinders.push(base.child(c).expect("successor keeps the word reduced"));
            }
        }
    }
    cylinders.push(g.clone());
    let mut total = BigRational::zero();
    for cyl in cylinders {
        let probe = BoundaryPrefix::canonical_extension(&cyl, rank, need);
        if y_membership(g, &probe, params)? {
            total += cylinder_mass_at_depth(rank, cyl.len()).into_inner();
        }
    }
    Ok(total)
}

fn mult_ratio(m: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(m))
}

/// Skips subtrees off the ray to `ξ` that can no longer reach `Y_n(ξ)`.
///
/// Off the ray the overlap with `ξ` is frozen, so each further letter raises
/// `h_ξ` by exactly one.
fn y_reachable(node: &Node<'_>, xi: &BoundaryPrefix, params: &KernelParams) -> Result<bool> {
    if node.on_ray {
        return Ok(true);
    }
    let d = node.depth();
    let h = horofunction_value(xi, &node.word())?;
    let (llo, lhi) = params.length_range();
    Ok(((d + 1).max(llo)..=lhi).any(|l| params.in_horo(h + (l - d) as i64)))
}

#[derive(Default)]
struct ZetaTally {
    members: u128,
    // sorted (exponent, cylinder depth) list per member -> multiplicity
    signatures: BTreeMap<Vec<(i64, usize)>, u128>,
}

/// `ζ_n` by walking `Y_n(ξ)` word by word and integrating over concrete
/// `ξ'`-cylinders with `R(g^-1, ξ') - R(g^-1, ξ)`.
///
/// [`EnumerationMode::Exhaustive`] visits every member of `Y_n(ξ)`;
/// [`EnumerationMode::Orbit`] visits one representative per orbit of the
/// stabilizer of the ray to `ξ`.
pub fn zeta_bruteforce(
    xi: &BoundaryPrefix,
    params: &KernelParams,
    mode: EnumerationMode,
    budget: &Budget,
) -> Result<DiscreteLatticeMeasure> {
    xi.require(params.required_prefix())?;
    let rank = params.rank;
    let (llo, lhi) = params.length_range();
    let walk = TreeWalk::new(rank, xi.letters(), lhi, mode);
    let parts = walk.fold(budget, ZetaTally::default, |tally, node| {
        let d = node.depth();
        if d >= llo {
            let g = node.word();
            if y_membership(&g, xi, params)? {
                let ginv = g.inverse();
                let base = cocycle_r(&ginv, xi)?;
                let mut sig = Vec::new();
                for cyl in z_class_cylinders(&g, params)? {
                    let probe = BoundaryPrefix::canonical_extension(&cyl, rank, g.len() + 1);
                    let k = cocycle_r(&ginv, &probe)? - base;
                    sig.push((k.k(), cyl.len()));
                }
                sig.sort_unstable();
                tally.members += node.multiplicity;
                *tally.signatures.entry(sig).or_insert(0) += node.multiplicity;
            }
        }
        Ok(if y_reachable(node, xi, params)? {
            Step::Descend
        } else {
            Step::Prune
        })
    })?;

    let mut members = 0u128;
    let mut signatures: BTreeMap<Vec<(i64, usize)>, u128> = BTreeMap::new();
    for p in parts {
        members += p.members;
        for (sig, c) in p.signatures {
            *signatures.entry(sig).or_insert(0) += c;
        }
    }
    if members == 0 {
        return Err(Error::OracleMismatch("Y_n(ξ) is empty".into()));
    }
    let ny = mult_ratio(members);
    let mut out = DiscreteLatticeMeasure::new(rank);
    for (sig, count) in signatures {
        let nz: BigRational = sig
            .iter()
            .map(|&(_, depth)| cylinder_mass_at_depth(rank, depth).into_inner())
            .sum();
        if nz.is_zero() {
            return Err(Error::OracleMismatch("Z_n(g) is empty".into()));
        }
        let weight = mult_ratio(count) / (&ny * &nz);
        for (k, depth) in sig {
            let mass = cylinder_mass_at_depth(rank, depth).into_inner() * &weight;
            out.add(LatticeLog(k), RationalMass::new(mass));
        }
    }
    Ok(out)
}

/// Extremes over the support `S_n` of the quantities the admissibility
/// conditions and the companion lemmas constrain.
#[derive(Clone, Debug, Default)]
struct SupportStats {
    members: u128,
    /// Σ over members of multiplicity · ν(Z_n(g)) found by cylinder scan.
    z_mass: BigRational,
    gromov_pair: Option<usize>,
    gromov_translated: Option<usize>,
    c3: Option<i64>,
    horo_prime: Option<(i64, i64)>,
    horo_back_prime: Option<i64>,
    horo_back: Option<i64>,
    separation: Option<i64>,
}

fn fold_min<T: Ord + Copy>(a: Option<T>, b: Option<T>) -> Option<T> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn fold_max<T: Ord + Copy>(a: Option<T>, b: Option<T>) -> Option<T> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl SupportStats {
    fn merge(mut self, o: SupportStats) -> SupportStats {
        self.members += o.members;
        self.z_mass += o.z_mass;
        self.gromov_pair = fold_min(self.gromov_pair, o.gromov_pair);
        self.gromov_translated = fold_min(self.gromov_translated, o.gromov_translated);
        self.c3 = fold_max(self.c3, o.c3);
        self.horo_prime = match (self.horo_prime, o.horo_prime) {
            (Some(a), Some(b)) => Some((a.0.min(b.0), a.1.max(b.1))),
            (a, None) => a,
            (None, b) => b,
        };
        self.horo_back_prime = fold_min(self.horo_back_prime, o.horo_back_prime);
        self.horo_back = fold_min(self.horo_back, o.horo_back);
        self.separation = fold_min(self.separation, o.separation);
        self
    }
}

fn support_scan(
    xi: &BoundaryPrefix,
    params: &KernelParams,
    mode: EnumerationMode,
    budget: &Budget,
) -> Result<SupportStats> {
    let rank = params.rank;
    let (llo, lhi) = params.length_range();
    let walk = TreeWalk::new(rank, xi.letters(), lhi, mode);
    let parts = walk.fold(budget, SupportStats::default, |st, node| {
        if node.depth() >= llo {
            let g = node.word();
            if y_membership(&g, xi, params)? {
                let ginv = g.inverse();
                let r_xi = cocycle_r(&ginv, xi)?;
                let moved_xi = boundary_action(&ginv, xi)?;
                st.members += node.multiplicity;
                let mut local = SupportStats {
                    horo_back: Some(horofunction_value(&moved_xi, &ginv)?),
                    ..SupportStats::default()
                };
                let mut zm = BigRational::zero();
                for cyl in z_class_cylinders(&g, params)? {
                    zm += cylinder_mass_at_depth(rank, cyl.len()).into_inner();
                    let probe = BoundaryPrefix::canonical_extension(&cyl, rank, g.len() + 1);
                    let r_prime = cocycle_r(&ginv, &probe)?;
                    let moved = boundary_action(&ginv, &probe)?;
                    let h_prime = horofunction_value(&probe, &g)?;
                    let one = SupportStats {
                        gromov_pair: Some(boundary_gromov_product(xi, GromovArg::Boundary(&probe))?),
                        gromov_translated: Some(boundary_gromov_product(
                            &moved_xi,
                            GromovArg::Boundary(&moved),
                        )?),
                        c3: Some(r_xi.k().abs() + r_prime.k().abs()),
                        horo_prime: Some((h_prime, h_prime)),
                        horo_back_prime: Some(horofunction_value(&moved, &ginv)?),
                        separation: Some((r_prime - r_xi).k().abs()),
                        ..SupportStats::default()
                    };
                    local = local.merge(one);
                }
                st.z_mass += mult_ratio(node.multiplicity) * zm;
                let taken = std::mem::take(st);
                *st = taken.merge(SupportStats { members: 0, ..local });
            }
        }
        Ok(if y_reachable(node, xi, params)? {
            Step::Descend
        } else {
            Step::Prune
        })
    })?;
    Ok(parts.into_iter().fold(SupportStats::default(), SupportStats::merge))
}

/// The three integrals of the fourth admissibility condition at one point.
///
/// * `int_1(ξ') = ∫ Σ_g Υ_n(g, ξ, ξ') dν(ξ)`
/// * `int_2(ξ') = ∫ Σ_g Υ_n(g, ξ, gξ') dν∘g/dν(ξ') dν(ξ)`
/// * `int_3(ξ)  = ∫ Σ_g Υ_n(g, gξ, ξ') dν∘g/dν(ξ) dν(ξ')`
pub fn condition4_integrals(
    point: &BoundaryPrefix,
    params: &KernelParams,
    mode: EnumerationMode,
    budget: &Budget,
) -> Result<[RationalMass; 3]> {
    let rank = params.rank;
    let n = params.n as usize;
    point.require(4 * n + 2)?;
    let (llo, lhi) = params.length_range();
    let ny = BigRational::from_integer(BigInt::from(y_count_closed_form(params)));
    let nz = z_measure(params).into_inner();
    let norm = (&ny * &nz).recip();

    // g walked directly, anchored at ξ'.
    let walk = TreeWalk::new(rank, point.letters(), lhi, mode);
    let first = walk.fold(budget, BigRational::zero, |acc, node| {
        let g = node.word();
        let m = boundary_gromov_product(point, GromovArg::Point(&g))?;
        if node.depth() >= llo && params.in_match(m) {
            *acc += mult_ratio(node.multiplicity) * y_set_measure(&g, params)?;
        }
        // Off the ray the overlap with ξ' is frozen.
        Ok(if node.on_ray || params.in_match(m) {
            Step::Descend
        } else {
            Step::Prune
        })
    })?;
    let int1: BigRational = first.into_iter().sum::<BigRational>() * &norm;

    // g = w^-1 with w walked anchored at ξ'.
    let second = walk.fold(budget, BigRational::zero, |acc, node| {
        if node.depth() >= llo {
            let g = node.word().inverse();
            let moved = boundary_action(&g, point)?;
            let m = boundary_gromov_product(&moved, GromovArg::Point(&g))?;
            if params.in_match(m) {
                let rn = rn_exponent(&g, point)?;
                *acc += mult_ratio(node.multiplicity) * y_set_measure(&g, params)? * rn.exp(rank);
            }
        }
        Ok(Step::Descend)
    })?;
    let int2: BigRational = second.into_iter().sum::<BigRational>() * &norm;

    // g = w^-1 with w walked anchored at ξ.
    let third = walk.fold(budget, BigRational::zero, |acc, node| {
        if node.depth() >= llo {
            let g = node.word().inverse();
            let moved = boundary_action(&g, point)?;
            if y_membership(&g, &moved, params)? {
                let rn = rn_exponent(&g, point)?;
                let zm: BigRational = z_class_cylinders(&g, params)?
                    .iter()
                    .map(|c| cylinder_mass_at_depth(rank, c.len()).into_inner())
                    .sum();
                *acc += mult_ratio(node.multiplicity) * rn.exp(rank) * zm / &nz;
            }
        }
        Ok(Step::Descend)
    })?;
    let int3: BigRational = third.into_iter().sum::<BigRational>() / &ny;

    Ok([
        RationalMass::new(int1),
        RationalMass::new(int2),
        RationalMass::new(int3),
    ])
}

/// Exact certificate for the admissibility conditions at one scale.
#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityReport {
    pub params: KernelParams,
    pub mode: EnumerationMode,
    /// Condition 1: `Σ_g ∫ Υ_n(g, ξ, ξ') dν(ξ')`; must be exactly 1.
    pub c1_total: RationalMass,
    pub y_count: String,
    pub y_count_enumerated: String,
    /// Condition 2 via the visual metric `e^{-ε(·|·)_e}`.
    pub gromov_min_pair: usize,
    pub gromov_min_translated: usize,
    pub gromov_guarantee_pair: i64,
    pub gromov_guarantee_translated: i64,
    pub epsilon_visual: f64,
    pub beta_n: f64,
    pub beta_n_translated: f64,
    /// Condition 3: `sup |R(g^-1, ξ)| + |R(g^-1, ξ')|` over the support.
    pub c3_sup: LatticeLog,
    pub c3_envelope: LatticeLog,
    pub c3_coarse_bound: LatticeLog,
    /// Condition 4, maximized over the probed representatives.
    pub c4_bounds: [RationalMass; 3],
    pub c4_bounds_real: [f64; 3],
    pub c4_representatives: usize,
    pub c4_representatives_agree: bool,
    /// Range of `h_ξ'(g)` on the support, against the window `(-5ρ, ρ)`.
    pub horo_prime_range: (i64, i64),
    pub horo_prime_window_holds: bool,
    /// Minima of `h_{g^-1ξ'}(g^-1)` and `h_{g^-1ξ}(g^-1)` on the support.
    pub horo_back_prime_min: i64,
    pub horo_back_min: i64,
    /// Realized lower bound of `|R(g^-1, ξ) - R(g^-1, ξ')|` on the support.
    pub separation_min: LatticeLog,
    /// `ν(Z_n)·e^{𝔳n}` and `|Y_n|·e^{-𝔳n}` with the brackets `[1/C, C]` they fix.
    pub z_scaled: RationalMass,
    pub z_constant: f64,
    pub y_scaled: RationalMass,
    pub y_constant: f64,
}

/// `C` with `q ∈ [1/C, C]`.
fn bracket_constant(q: &BigRational) -> f64 {
    let v = q.to_f64().unwrap_or(f64::NAN);
    v.max(1.0 / v)
}

/// Points for which condition 4 is evaluated; by homogeneity of the tree
/// the integrals should not depend on the choice.
pub fn default_representatives(rank: Rank, params: &KernelParams, seed: u64) -> Vec<BoundaryPrefix> {
    use rand::SeedableRng;
    let len = 4 * params.n as usize + 8;
    let letters: Vec<_> = rank.letters().collect();
    let alternating: Vec<_> = (0..len).map(|i| letters[2 * (i % 2)]).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    vec![
        BoundaryPrefix::canonical_extension(&Word::identity(), rank, len),
        BoundaryPrefix::new(Word::from_reduced(alternating)),
        BoundaryPrefix::random(rank, len, &mut rng),
    ]
}

pub fn admissibility_report(
    params: &KernelParams,
    representatives: &[BoundaryPrefix],
    epsilon_visual: f64,
    mode: EnumerationMode,
    budget: &Budget,
) -> Result<AdmissibilityReport> {
    let rank = params.rank;
    let Some(xi) = representatives.first() else {
        return Err(Error::params("at least one representative point is required"));
    };
    let (n, rho) = (i64::from(params.n), i64::from(params.rho));
    let ny_int = y_count_closed_form(params);
    let ny = BigRational::from_integer(BigInt::from(ny_int.clone()));
    let nz = z_measure(params).into_inner();

    let stats = support_scan(xi, params, mode, budget)?;
    let c1_total = RationalMass::new(stats.z_mass.clone() / (&ny * &nz));
    let missing = || Error::OracleMismatch("support of Υ_n is empty".into());

    let mut c4: Option<[RationalMass; 3]> = None;
    let mut agree = true;
    for p in representatives {
        let vals = condition4_integrals(p, params, mode, budget)?;
        c4 = Some(match c4 {
            None => vals,
            Some(prev) => {
                agree &= prev == vals;
                let [a, b, c] = prev;
                let [x, y, z] = vals;
                [a.max(x), b.max(y), c.max(z)]
            }
        });
    }
    let c4 = c4.expect("representatives is nonempty");

    let gromov_min_pair = stats.gromov_pair.ok_or_else(missing)?;
    let gromov_min_translated = stats.gromov_translated.ok_or_else(missing)?;
    let horo_prime_range = stats.horo_prime.ok_or_else(missing)?;
    let z_scaled = nz.clone() * lattice_power(rank, n);
    let y_scaled = ny.clone() * lattice_power(rank, -n);

    Ok(AdmissibilityReport {
        params: *params,
        mode,
        c1_total,
        y_count: ny_int.to_string(),
        y_count_enumerated: stats.members.to_string(),
        gromov_min_pair,
        gromov_min_translated,
        gromov_guarantee_pair: n - 5 * rho,
        gromov_guarantee_translated: n - 10 * rho,
        epsilon_visual,
        beta_n: (-epsilon_visual * gromov_min_pair as f64).exp(),
        beta_n_translated: (-epsilon_visual * gromov_min_translated as f64).exp(),
        c3_sup: LatticeLog(stats.c3.ok_or_else(missing)?),
        c3_envelope: LatticeLog(8 * rho - 4),
        c3_coarse_bound: LatticeLog(10 * rho),
        c4_bounds_real: [c4[0].to_f64(), c4[1].to_f64(), c4[2].to_f64()],
        c4_bounds: c4,
        c4_representatives: representatives.len(),
        c4_representatives_agree: agree,
        horo_prime_window_holds: horo_prime_range.0 > -5 * rho && horo_prime_range.1 < rho,
        horo_prime_range,
        horo_back_prime_min: stats.horo_back_prime.ok_or_else(missing)?,
        horo_back_min: stats.horo_back.ok_or_else(missing)?,
        separation_min: LatticeLog(stats.separation.ok_or_else(missing)?),
        z_constant: bracket_constant(&z_scaled),
        z_scaled: RationalMass::new(z_scaled),
        y_constant: bracket_constant(&y_scaled),
        y_scaled: RationalMass::new(y_scaled),
    })
}

/// Real-valued `ν(Z_n)·e^{𝔳n}` for presentation.
pub fn z_scaled_value(params: &KernelParams) -> BigRational {
    z_measure(params).into_inner() * lattice_power(params.rank, i64::from(params.n))
}
