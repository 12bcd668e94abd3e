//! Orbits of the Maharam extension `g(ξ, t) = (gξ, t - log dν∘g/dν(ξ))`.
//!
//! `t` is kept in lattice units, so starting from `t = 0` every coordinate
//! is an integer by construction. The certificate recomputes each step's
//! derivative independently as a ratio of cylinder measures and checks that
//! it lands on `(2r-1)^ℤ` and agrees with the recorded jump.

use std::collections::VecDeque;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boundary::{
    boundary_action, cylinder_image, lattice_exponent_of, rn_exponent, BoundaryPrefix, Cylinder,
    LatticeLog,
};
use crate::error::{Error, Result};
use crate::ratio::FinitePmpAction;
use crate::word::{Letter, Rank, Word};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaharamPoint {
    pub base: BoundaryPrefix,
    pub t_exponent: LatticeLog,
}

impl MaharamPoint {
    pub fn new(base: BoundaryPrefix, t_exponent: LatticeLog) -> Self {
        MaharamPoint { base, t_exponent }
    }
}

pub fn maharam_apply(g: &Word, p: &MaharamPoint) -> Result<MaharamPoint> {
    if g.is_identity() {
        return Ok(p.clone());
    }
    let rn = rn_exponent(g, &p.base)?;
    Ok(MaharamPoint {
        base: boundary_action(g, &p.base)?,
        t_exponent: p.t_exponent - rn,
    })
}

/// One orbit point together with its fiber coordinate, if any.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitStep {
    pub step: usize,
    pub letter: Option<Word>,
    pub point: MaharamPoint,
    pub fiber: Option<usize>,
}

/// Summary of the lattice checks along an orbit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LatticeCertificate {
    pub steps: usize,
    /// Steps whose measure-ratio derivative failed to be a power of `2r-1`
    /// or disagreed with the recorded jump in `t`.
    pub exceptions: usize,
    /// Steps whose real-valued jump `t_real` differed from `k·𝔳` beyond rounding.
    pub real_mismatches: usize,
    pub t_min: LatticeLog,
    pub t_max: LatticeLog,
    pub fiber_returns: usize,
    pub odd_fiber_returns: usize,
}

struct OrbitState {
    front: VecDeque<Letter>,
    t: i64,
    fiber: Option<usize>,
}

impl OrbitState {
    fn prefix(&self, len: usize) -> Result<BoundaryPrefix> {
        if self.front.len() < len {
            return Err(Error::PrefixTooShort {
                needed: len,
                available: self.front.len(),
            });
        }
        Ok(BoundaryPrefix::new(Word::from_reduced(
            self.front.iter().take(len).copied().collect(),
        )))
    }

    /// Applies one letter in place; returns its `rn_exponent`.
    fn apply(&mut self, s: Letter, action: Option<&FinitePmpAction>) -> Result<i64> {
        let Some(&first) = self.front.front() else {
            return Err(Error::PrefixTooShort {
                needed: 1,
                available: 0,
            });
        };
        let rn = if first == s.inverse() {
            self.front.pop_front();
            1
        } else {
            self.front.push_front(s);
            -1
        };
        self.t -= rn;
        if let (Some(a), Some(x)) = (action, self.fiber) {
            self.fiber = Some(a.apply_letter(s, x));
        }
        Ok(rn)
    }
}

fn run_orbit(
    rank: Rank,
    p: &MaharamPoint,
    fiber: Option<(&FinitePmpAction, usize)>,
    word_len: usize,
    steps: usize,
    seed: u64,
) -> Result<Vec<OrbitStep>> {
    if word_len == 0 {
        return Err(Error::params("word_len must be at least 1"));
    }
    p.base.require(word_len + steps)?;
    if let Some((a, x)) = fiber {
        if x >= a.size() {
            return Err(Error::params(format!("fiber point {x} is outside the action")));
        }
    }
    let letters: Vec<Letter> = rank.letters().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = OrbitState {
        front: p.base.letters().iter().copied().collect(),
        t: p.t_exponent.k(),
        fiber: fiber.map(|(_, x)| x),
    };
    let action = fiber.map(|(a, _)| a);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(OrbitStep {
        step: 0,
        letter: None,
        point: MaharamPoint::new(state.prefix(word_len)?, LatticeLog(state.t)),
        fiber: state.fiber,
    });
    for step in 1..=steps {
        let s = letters[rng.gen_range(0..letters.len())];
        state.apply(s, action)?;
        out.push(OrbitStep {
            step,
            letter: Some(Word::from_reduced(vec![s])),
            point: MaharamPoint::new(state.prefix(word_len)?, LatticeLog(state.t)),
            fiber: state.fiber,
        });
    }
    Ok(out)
}

/// `steps` seeded uniformly random generator moves starting from `p`.
///
/// The prefix of `p` must hold `word_len + steps` letters so that every
/// recorded point keeps `word_len` determined letters.
pub fn maharam_orbit(
    rank: Rank,
    p: &MaharamPoint,
    word_len: usize,
    steps: usize,
    seed: u64,
) -> Result<Vec<OrbitStep>> {
    run_orbit(rank, p, None, word_len, steps, seed)
}

/// The same walk on the product with a finite pmp action, tracking the
/// fiber coordinate as well.
pub fn maharam_product_orbit(
    rank: Rank,
    p: &MaharamPoint,
    action: &FinitePmpAction,
    fiber_start: usize,
    word_len: usize,
    steps: usize,
    seed: u64,
) -> Result<Vec<OrbitStep>> {
    run_orbit(rank, p, Some((action, fiber_start)), word_len, steps, seed)
}

/// Re-derives each jump of `t` from `ν(s·C)/ν(C)` for the cylinder `C`
/// spanned by the recorded prefix and checks it against the orbit.
pub fn lattice_certificate(rank: Rank, orbit: &[OrbitStep]) -> Result<LatticeCertificate> {
    let Some(first) = orbit.first() else {
        return Err(Error::params("empty orbit"));
    };
    let mut cert = LatticeCertificate {
        steps: orbit.len() - 1,
        exceptions: 0,
        real_mismatches: 0,
        t_min: first.point.t_exponent,
        t_max: first.point.t_exponent,
        fiber_returns: 0,
        odd_fiber_returns: 0,
    };
    let start_fiber = first.fiber;
    for pair in orbit.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        let s = next
            .letter
            .as_ref()
            .ok_or_else(|| Error::params("orbit step without a letter"))?;
        let jump = prev.point.t_exponent - next.point.t_exponent;
        let c = Cylinder::new(prev.point.base.word().clone());
        let ratio = cylinder_image(rank, s, &c)?.measure().into_inner() / c_measure(rank, &c);
        match lattice_exponent_of(rank, &ratio) {
            Some(k) if k == jump.k() => {}
            _ => cert.exceptions += 1,
        }
        let real = -(ratio.to_f64().unwrap_or(f64::NAN)).ln();
        let t_real = prev.point.t_exponent.to_f64(rank) + real;
        if (t_real - next.point.t_exponent.to_f64(rank)).abs() > 1e-9 * (1.0 + t_real.abs()) {
            cert.real_mismatches += 1;
        }
        cert.t_min = cert.t_min.min(next.point.t_exponent);
        cert.t_max = cert.t_max.max(next.point.t_exponent);
        if start_fiber.is_some() && next.fiber == start_fiber {
            cert.fiber_returns += 1;
            if next.point.t_exponent.k() % 2 != 0 {
                cert.odd_fiber_returns += 1;
            }
        }
    }
    Ok(cert)
}

fn c_measure(rank: Rank, c: &Cylinder) -> num_rational::BigRational {
    crate::boundary::cylinder_measure(rank, c).into_inner()
}
