//! Exact counts of balls, spheres and bands cut by horofunction slabs.
//!
//! On the tree `h_ξ(g) = |g| - 2p` with `p = (ξ|g)_e`, so the words at
//! level `(|g|, h)` are counted by how far they follow `ξ`. Everything is
//! independent of `ξ`; the prefix is only required so that `h_ξ` is
//! determined on the words involved. The tree is geodesic and 0-hyperbolic,
//! so the additive slack constants of the general statements are all zero.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{branching_pow, horofunction_value, BoundaryPrefix};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::word::{Rank, Word};

/// `|{g : |g| = m, h_ξ(g) = h}|`.
pub fn horosphere_level_count(rank: Rank, m: usize, h: i64, xi: &BoundaryPrefix) -> Result<BigUint> {
    xi.require(m)?;
    if (m as i64 - h).rem_euclid(2) != 0 {
        return Err(Error::params(format!("level (m={m}, h={h}) violates h ≡ m (mod 2)")));
    }
    Ok(level_count(rank, m, h))
}

fn level_count(rank: Rank, m: usize, h: i64) -> BigUint {
    let twice_p = m as i64 - h;
    if twice_p < 0 || twice_p % 2 != 0 || twice_p / 2 > m as i64 {
        return BigUint::zero();
    }
    let p = (twice_p / 2) as usize;
    if p == m {
        BigUint::from(1u32)
    } else if p == 0 {
        // first letter avoids ξ_1 only: (2r-1)·(2r-1)^(m-1)
        branching_pow(rank, m as u32)
    } else {
        BigUint::from(rank.branching() - 1) * branching_pow(rank, (m - p - 1) as u32)
    }
}

/// A ball (`a = 0`) or band `S(e; r-a, r)` query on the slab `h_ξ ∈ [T1, T2]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlabQuery {
    pub xi: BoundaryPrefix,
    pub t1: i64,
    pub t2: i64,
    pub r_outer: usize,
    pub a: usize,
}

impl SlabQuery {
    pub fn new(xi: BoundaryPrefix, t1: i64, t2: i64, r_outer: usize, a: usize) -> Result<Self> {
        if t1 > t2 {
            return Err(Error::params(format!("slab bounds T1={t1} > T2={t2}")));
        }
        if (r_outer as i64) < t1.abs().max(t2.abs()) {
            return Err(Error::params(format!(
                "r_outer={r_outer} must be >= max(|T1|, |T2|) = {}",
                t1.abs().max(t2.abs())
            )));
        }
        if a > r_outer {
            return Err(Error::params(format!("band width a={a} exceeds r_outer={r_outer}")));
        }
        xi.require(r_outer)?;
        Ok(SlabQuery {
            xi,
            t1,
            t2,
            r_outer,
            a,
        })
    }

    /// Levels `m` in the query, inclusive.
    fn level_range(&self) -> (usize, usize) {
        if self.a == 0 {
            (0, self.r_outer)
        } else {
            (self.r_outer - self.a + 1, self.r_outer)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountReport {
    pub r_outer: usize,
    pub a: usize,
    pub t1: i64,
    pub t2: i64,
    pub exact_count: String,
    /// `r_outer + T2`; the predicted scale is `(2r-1)^{scale_exponent_doubled/2}`.
    pub scale_exponent_doubled: i64,
    pub predicted_scale: f64,
    pub ratio: f64,
    /// `[1/C, C]` with `C = max(ratio, 1/ratio)`.
    pub constant_bracket: [f64; 2],
    /// Whether `e` itself is counted (only balls whose slab contains 0).
    pub includes_origin: bool,
}

fn make_report(rank: Rank, q: &SlabQuery, count: BigUint) -> CountReport {
    let doubled = q.r_outer as i64 + q.t2;
    let scale = (f64::from(rank.branching()).ln() * doubled as f64 / 2.0).exp();
    let ratio = count.to_f64().unwrap_or(f64::INFINITY) / scale;
    let c = ratio.max(1.0 / ratio);
    CountReport {
        r_outer: q.r_outer,
        a: q.a,
        t1: q.t1,
        t2: q.t2,
        exact_count: count.to_string(),
        scale_exponent_doubled: doubled,
        predicted_scale: scale,
        ratio,
        constant_bracket: [1.0 / c, c],
        includes_origin: q.level_range().0 == 0 && q.t1 <= 0 && 0 <= q.t2,
    }
}

fn slab_sum(rank: Rank, q: &SlabQuery) -> BigUint {
    let (lo, hi) = q.level_range();
    let mut total = BigUint::zero();
    for m in lo..=hi {
        for h in q.t1..=q.t2 {
            total += level_count(rank, m, h);
        }
    }
    total
}

/// `|B(e, r) ∩ h_ξ^{-1}[T1, T2]|`.
pub fn ball_slab_count(rank: Rank, q: &SlabQuery) -> Result<CountReport> {
    if q.a != 0 {
        return Err(Error::params("ball query needs a = 0"));
    }
    Ok(make_report(rank, q, slab_sum(rank, q)))
}

/// `|S(e; r-a, r) ∩ h_ξ^{-1}[T1, T2]|`, computed as a difference of balls.
pub fn band_slab_count(rank: Rank, q: &SlabQuery) -> Result<CountReport> {
    if q.a == 0 {
        return Err(Error::params("band query needs a >= 1"));
    }
    let outer = SlabQuery { a: 0, ..q.clone() };
    let inner_r = q.r_outer - q.a;
    let mut inner_total = BigUint::zero();
    for m in 0..=inner_r {
        for h in q.t1..=q.t2 {
            inner_total += level_count(rank, m, h);
        }
    }
    let count = slab_sum(rank, &outer) - inner_total;
    Ok(make_report(rank, q, count))
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub rows: Vec<CountReport>,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// `C = max(ratio_max, 1/ratio_min)`.
    pub constant: f64,
    /// Smallest band width and slab width used; every row satisfied the bracket.
    pub a0: usize,
    pub t0: i64,
}

impl SweepReport {
    /// Columns `r_outer, a, T1, T2, exact_count, predicted_scale, ratio`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r_outer", "a", "T1", "T2", "exact_count", "predicted_scale", "ratio"])?;
        for r in &self.rows {
            w.write_record([
                r.r_outer.to_string(),
                r.a.to_string(),
                r.t1.to_string(),
                r.t2.to_string(),
                r.exact_count.clone(),
                r.predicted_scale.to_string(),
                r.ratio.to_string(),
            ])?;
        }
        w.flush()
    }
}

/// Band counts over every `r_outer` in the range, every `a` and slab width
/// in the lists, and every `T2` with `|T1|, |T2| <= r_outer`.
pub fn band_sweep(
    rank: Rank,
    xi: &BoundaryPrefix,
    r_range: (usize, usize),
    widths_a: &[usize],
    slab_widths: &[i64],
) -> Result<SweepReport> {
    if widths_a.is_empty() || slab_widths.is_empty() || r_range.0 > r_range.1 {
        return Err(Error::params("empty sweep"));
    }
    let mut queries = Vec::new();
    for r_outer in r_range.0..=r_range.1 {
        for &a in widths_a {
            for &w in slab_widths {
                let r = r_outer as i64;
                for t2 in (-r + w)..=r {
                    queries.push(SlabQuery::new(xi.clone(), t2 - w, t2, r_outer, a)?);
                }
            }
        }
    }
    let rows = queries
        .par_iter()
        .map(|q| band_slab_count(rank, q))
        .collect::<Result<Vec<_>>>()?;
    let ratio_min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let ratio_max = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(SweepReport {
        ratio_min,
        ratio_max,
        constant: ratio_max.max(1.0 / ratio_min),
        a0: *widths_a.iter().min().expect("nonempty"),
        t0: *slab_widths.iter().min().expect("nonempty"),
        rows,
    })
}

/// The sweep fixed for the band-count acceptance check.
pub fn default_band_sweep(rank: Rank, xi: &BoundaryPrefix) -> Result<SweepReport> {
    band_sweep(rank, xi, (8, 14), &[2, 3], &[2, 4])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EllipseReport {
    pub r_outer: usize,
    pub t: i64,
    /// The vertex of the ray at depth `floor((r-T)/2)`.
    pub center: Word,
    /// `r - T`; odd values put the true center at the midpoint of the next edge.
    pub center_depth_doubled: i64,
    pub radius_doubled: i64,
    /// `|B(e,r) ∩ h_ξ^{-1}(-∞, T]|` and `|B(x, (r+T)/2)|`.
    pub slab_count: u64,
    pub ball_count: u64,
    pub inner_inclusion: bool,
    pub outer_inclusion: bool,
    pub vacuous: bool,
    pub scanned: u64,
}

/// Checks `B(x, (r+T)/2) ⊆ B(e,r) ∩ h_ξ^{-1}(-∞,T] ⊆ B(x, (r+T)/2)` by
/// scanning `B(e, r+2)`, with `x` at depth `(r-T)/2` on the ray to `ξ`.
pub fn ellipse_inclusion_check(
    rank: Rank,
    r_outer: usize,
    t: i64,
    xi: &BoundaryPrefix,
    budget: &Budget,
) -> Result<EllipseReport> {
    let r = r_outer as i64;
    if r_outer == 0 {
        return Err(Error::params("r_outer must be positive"));
    }
    if t > r {
        return Err(Error::params(format!("T={t} exceeds r_outer={r_outer}")));
    }
    let scan_radius = r_outer + 2;
    xi.require(scan_radius)?;
    budget.require(
        rank.ball_count(scan_radius)
            .to_u128()
            .ok_or(Error::Overflow("ellipse scan"))?,
    )?;
    let s = r - t;
    let radius2 = r + t;
    let center = xi.word().prefix(((s / 2) as usize).min(xi.len()));
    let words: Vec<Word> = rank.ball_iter(scan_radius).collect();
    budget.charge(words.len() as u64)?;
    let flags = words
        .par_iter()
        .map(|g| {
            let h = horofunction_value(xi, g)?;
            let len = g.len() as i64;
            let p = (len - h) / 2;
            let d2 = 2 * len + s - 2 * (2 * p).min(s);
            let in_slab = len <= r && h <= t;
            let in_ball = d2 <= radius2;
            Ok((in_slab, in_ball))
        })
        .collect::<Result<Vec<(bool, bool)>>>()?;
    let slab_count = flags.iter().filter(|f| f.0).count() as u64;
    let ball_count = flags.iter().filter(|f| f.1).count() as u64;
    Ok(EllipseReport {
        r_outer,
        t,
        center,
        center_depth_doubled: s,
        radius_doubled: radius2,
        slab_count,
        ball_count,
        inner_inclusion: flags.iter().all(|&(slab, ball)| !ball || slab),
        outer_inclusion: flags.iter().all(|&(slab, ball)| !slab || ball),
        vacuous: slab_count == 0 && ball_count == 0,
        scanned: words.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn xi(rank: Rank, len: usize, seed: u64) -> BoundaryPrefix {
        BoundaryPrefix::random(rank, len, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn scan_levels(rank: Rank, radius: usize, xi: &BoundaryPrefix) -> BTreeMap<(usize, i64), u64> {
        let mut out = BTreeMap::new();
        for g in rank.ball_iter(radius) {
            *out.entry((g.len(), horofunction_value(xi, &g).unwrap())).or_insert(0) += 1;
        }
        out
    }

    #[test]
    fn level_counts_match_enumeration() {
        for r in [2u32, 3] {
            let rank = Rank::new(r).unwrap();
            let radius = if r == 2 { 8 } else { 6 };
            let x = xi(rank, radius, u64::from(r));
            let scan = scan_levels(rank, radius, &x);
            for m in 0..=radius {
                for h in -(m as i64)..=(m as i64) {
                    if (m as i64 - h) % 2 != 0 {
                        continue;
                    }
                    let got = horosphere_level_count(rank, m, h, &x).unwrap();
                    let want = scan.get(&(m, h)).copied().unwrap_or(0);
                    assert_eq!(got, BigUint::from(want), "m={m} h={h}");
                }
            }
        }
    }

    #[test]
    fn level_count_examples() {
        let rank = Rank::new(2).unwrap();
        let x = xi(rank, 10, 0);
        assert_eq!(horosphere_level_count(rank, 3, 1, &x).unwrap(), BigUint::from(6u32));
        assert_eq!(horosphere_level_count(rank, 4, 4, &x).unwrap(), BigUint::from(81u32));
        assert_eq!(horosphere_level_count(rank, 5, -5, &x).unwrap(), BigUint::from(1u32));
        assert_eq!(horosphere_level_count(rank, 5, 7, &x).unwrap(), BigUint::zero());
        assert!(horosphere_level_count(rank, 3, 0, &x).is_err());
        assert!(horosphere_level_count(rank, 12, 0, &x).is_err());
    }

    #[test]
    fn ball_and_band_match_enumeration() {
        let rank = Rank::new(2).unwrap();
        for seed in 0..3 {
            let x = xi(rank, 8, seed);
            let scan = scan_levels(rank, 8, &x);
            for r_outer in 4..=8usize {
                for t1 in -(r_outer as i64)..=(r_outer as i64) {
                    for t2 in t1..=(r_outer as i64) {
                        for a in [0usize, 1, 2, 3, r_outer] {
                            let lo = if a == 0 { 0 } else { r_outer - a + 1 };
                            let want: u64 = scan
                                .iter()
                                .filter(|((m, h), _)| (lo..=r_outer).contains(m) && (t1..=t2).contains(h))
                                .map(|(_, c)| c)
                                .sum();
                            let q = SlabQuery::new(x.clone(), t1, t2, r_outer, a).unwrap();
                            let rep = if a == 0 {
                                ball_slab_count(rank, &q).unwrap()
                            } else {
                                band_slab_count(rank, &q).unwrap()
                            };
                            assert_eq!(rep.exact_count, want.to_string());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn full_band_is_ball_without_origin() {
        let rank = Rank::new(2).unwrap();
        let x = xi(rank, 10, 9);
        let ball = ball_slab_count(rank, &SlabQuery::new(x.clone(), -2, 2, 10, 0).unwrap()).unwrap();
        let band = band_slab_count(rank, &SlabQuery::new(x, -2, 2, 10, 10).unwrap()).unwrap();
        assert!(ball.includes_origin && !band.includes_origin);
        let b: u64 = ball.exact_count.parse().unwrap();
        let s: u64 = band.exact_count.parse().unwrap();
        assert_eq!(b, s + 1);
    }

    #[test]
    fn monotone_in_t2_and_a() {
        let rank = Rank::new(3).unwrap();
        let x = xi(rank, 12, 2);
        let count = |t2, a| {
            let q = SlabQuery::new(x.clone(), -4, t2, 12, a).unwrap();
            let rep = if a == 0 { ball_slab_count(rank, &q) } else { band_slab_count(rank, &q) };
            rep.unwrap().exact_count.parse::<u128>().unwrap()
        };
        for t2 in -4..12 {
            assert!(count(t2, 0) <= count(t2 + 1, 0));
        }
        for a in 1..12 {
            assert!(count(6, a) <= count(6, a + 1));
        }
    }

    #[test]
    fn query_validation() {
        let rank = Rank::new(2).unwrap();
        let x = xi(rank, 4, 0);
        assert!(SlabQuery::new(x.clone(), 2, 1, 4, 0).is_err());
        assert!(SlabQuery::new(x.clone(), -5, 1, 4, 0).is_err());
        assert!(SlabQuery::new(x.clone(), 0, 1, 4, 5).is_err());
        assert!(SlabQuery::new(x.clone(), 0, 1, 6, 0).is_err());
        let q = SlabQuery::new(x, 0, 1, 4, 0).unwrap();
        assert!(band_slab_count(rank, &q).is_err());
    }

    #[test]
    fn sweep_bracket_is_bounded() {
        let rank = Rank::new(2).unwrap();
        let x = xi(rank, 14, 0);
        let sweep = default_band_sweep(rank, &x).unwrap();
        assert!(sweep.constant <= 10.0, "C = {}", sweep.constant);
        assert!(sweep.rows.iter().all(|r| r.ratio >= sweep.ratio_min && r.ratio <= sweep.ratio_max));
        let other = default_band_sweep(rank, &xi(rank, 14, 5)).unwrap();
        assert_eq!(
            sweep.rows.iter().map(|r| &r.exact_count).collect::<Vec<_>>(),
            other.rows.iter().map(|r| &r.exact_count).collect::<Vec<_>>()
        );
        let mut csv = Vec::new();
        sweep.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("r_outer,a,T1,T2,exact_count,predicted_scale,ratio\n"));
        assert_eq!(text.lines().count(), sweep.rows.len() + 1);
    }

    #[test]
    fn ellipse_inclusions() {
        let rank = Rank::new(2).unwrap();
        let b = Budget::default();
        let x = xi(rank, 12, 4);
        for t in -10..=8 {
            let rep = ellipse_inclusion_check(rank, 8, t, &x, &b).unwrap();
            assert!(rep.inner_inclusion && rep.outer_inclusion, "T={t}");
            assert_eq!(rep.vacuous, t < -8);
        }
        let rep = ellipse_inclusion_check(rank, 8, 8, &x, &b).unwrap();
        assert!(rep.center.is_identity());
        assert_eq!(rep.ball_count as u128, rank.ball_count(8).to_u128().unwrap());
        assert!(ellipse_inclusion_check(rank, 8, 9, &x, &b).is_err());
        assert!(ellipse_inclusion_check(rank, 8, 0, &x, &Budget::new(100)).is_err());
    }
}
