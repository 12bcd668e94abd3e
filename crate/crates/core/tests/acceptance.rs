//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::process::Command;
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stable_ratio::boundary::{
    boundary_action, cocycle_r, cylinder_image, cylinder_measure, horofunction_value, rn_exponent,
    BoundaryPrefix, Cylinder, CylinderUnion, LatticeLog, RationalMass,
};
use stable_ratio::budget::Budget;
use stable_ratio::counting::{default_band_sweep, horosphere_level_count};
use stable_ratio::kernel::{
    admissibility_report, default_representatives, zeta_bruteforce, zeta_closed_form, KernelParams,
};
use stable_ratio::maharam::{lattice_certificate, maharam_orbit, maharam_product_orbit, MaharamPoint};
use stable_ratio::ratio::{
    parity_obstruction_check, ratio_witness_search, verify_witness, FinitePmpAction, ProductSet,
    SearchParams, SearchStatus, Target, Witness,
};
use stable_ratio::walk::EnumerationMode;
use stable_ratio::word::{hyperbolicity_defect, reduce_concat, Rank, Word};

/// Largest band-count constant C allowed for the sweep bracket [1/C, C].
const SWEEP_MAX_CONSTANT: f64 = 10.0;
/// Condition-4 integrals across n must stay within a factor of this.
const C4_STABILITY_FACTOR: i64 = 2;
const C4_N_RANGE: (u32, u32) = (6, 10);
const CONFORMAL_SAMPLES: usize = 10_000;
const CHANGE_OF_VARIABLES_SAMPLES: usize = 1_000;
const MAHARAM_STEPS: usize = 10_000;
const DEFECT_RADIUS: usize = 4;
/// The defect scan charges N^4 quadruples; N = |B(e,4)| = 161 for rank 2.
const DEFECT_BUDGET: u64 = 1_000_000_000;

fn rank(r: u32) -> Rank {
    Rank::new(r).unwrap()
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_zeta_dual_oracle() -> Check {
    let mut checked = 0;
    for r in [2u32, 3] {
        for rho in [2u32, 3] {
            for n in 3 * rho..=3 * rho + 3 {
                let p = KernelParams::new(rank(r), rho, n).unwrap();
                let closed = zeta_closed_form(&p);
                let mut rng = ChaCha8Rng::seed_from_u64(u64::from(100 * r + 10 * rho + n));
                let xi = BoundaryPrefix::random(p.rank(), p.required_prefix() + 4, &mut rng);
                let brute = zeta_bruteforce(&xi, &p, EnumerationMode::Orbit, &Budget::default())
                    .map_err(|e| format!("r={r} rho={rho} n={n}: {e}"))?;
                ensure(brute == closed, || format!("orbit oracle differs at r={r} rho={rho} n={n}"))?;
                ensure(closed.total_mass() == RationalMass::one(), || {
                    format!("total mass != 1 at r={r} rho={rho} n={n}")
                })?;
                checked += 1;
            }
        }
    }
    let mut exhaustive = 0;
    for (r, rho, n) in [(2u32, 2u32, 6u32), (2, 2, 7), (2, 2, 8), (3, 2, 6)] {
        let p = KernelParams::new(rank(r), rho, n).unwrap();
        let xi = BoundaryPrefix::random(p.rank(), p.required_prefix(), &mut ChaCha8Rng::seed_from_u64(7));
        let brute = zeta_bruteforce(&xi, &p, EnumerationMode::Exhaustive, &Budget::default())
            .map_err(|e| format!("exhaustive r={r} rho={rho} n={n}: {e}"))?;
        ensure(brute == zeta_closed_form(&p), || format!("exhaustive oracle differs at r={r} rho={rho} n={n}"))?;
        exhaustive += 1;
    }
    let p = KernelParams::new(rank(2), 2, 6).unwrap();
    let fixture: Vec<(LatticeLog, RationalMass)> = vec![
        (LatticeLog(8), RationalMass::new(q(3, 19))),
        (LatticeLog(10), RationalMass::new(q(13, 19))),
        (LatticeLog(12), RationalMass::new(q(3, 19))),
    ];
    let got: Vec<(LatticeLog, RationalMass)> =
        zeta_closed_form(&p).atoms().iter().map(|(k, m)| (*k, m.clone())).collect();
    ensure(got == fixture, || format!("fixture mismatch: {got:?}"))?;
    Ok(format!(
        "{checked} (r,rho,n) configs orbit-enumerated, {exhaustive} exhaustive, fixture {{8: 3/19, 10: 13/19, 12: 3/19}}"
    ))
}

fn c2_stationarity_positivity() -> Check {
    let mut lines = Vec::new();
    for r in [2u32, 3] {
        for rho in [2u32, 3] {
            let base = zeta_closed_form(&KernelParams::new(rank(r), rho, 3 * rho).unwrap());
            for n in 3 * rho..=3 * rho + 6 {
                let z = zeta_closed_form(&KernelParams::new(rank(r), rho, n).unwrap());
                ensure(z == base, || format!("zeta changes at r={r} rho={rho} n={n}"))?;
            }
            let min_k = base.min_exponent().unwrap().k();
            ensure(min_k >= 2 * i64::from(rho) + 4 && min_k > 0, || {
                format!("min exponent {min_k} below 2rho+4 at r={r} rho={rho}")
            })?;
            lines.push(format!("r={r},rho={rho}:min_k={min_k}"));
        }
    }
    Ok(format!("stationary for n in [3rho, 3rho+6]; {}", lines.join(" ")))
}

fn c3_admissibility() -> Check {
    let mut c4_values: Vec<[RationalMass; 3]> = Vec::new();
    let mut c3 = None;
    for n in C4_N_RANGE.0..=C4_N_RANGE.1 {
        let p = KernelParams::new(rank(2), 2, n).unwrap();
        let reps = default_representatives(p.rank(), &p, 0);
        let rep = admissibility_report(&p, &reps, 3f64.ln(), EnumerationMode::Orbit, &Budget::default())
            .map_err(|e| format!("n={n}: {e}"))?;
        ensure(rep.c1_total == RationalMass::one(), || format!("c1_total = {} at n={n}", rep.c1_total))?;
        ensure(rep.c3_sup == LatticeLog(12), || format!("c3_sup = {} at n={n}", rep.c3_sup))?;
        ensure(rep.gromov_min_pair as i64 >= rep.gromov_guarantee_pair, || format!("pair minimum at n={n}"))?;
        ensure(
            rep.gromov_min_translated as i64 >= rep.gromov_guarantee_translated,
            || format!("translated minimum at n={n}"),
        )?;
        ensure(rep.c4_bounds_real.iter().all(|v| v.is_finite()), || format!("c4 not finite at n={n}"))?;
        c3 = Some(rep.c3_sup);
        c4_values.push(rep.c4_bounds.clone());
    }
    let factor = BigRational::from_integer(C4_STABILITY_FACTOR.into());
    let mut brackets = Vec::new();
    for i in 0..3 {
        let lo = c4_values.iter().map(|v| &v[i]).min().unwrap().value().clone();
        let hi = c4_values.iter().map(|v| &v[i]).max().unwrap().value().clone();
        ensure(!lo.is_zero() && hi <= &lo * &factor, || format!("c4[{i}] drifts: [{lo}, {hi}]"))?;
        brackets.push(format!("[{lo}, {hi}]"));
    }
    Ok(format!(
        "c1 = 1 exactly, c3_sup = {} lattice units, c4 brackets over n in [{}, {}]: {}",
        c3.unwrap(),
        C4_N_RANGE.0,
        C4_N_RANGE.1,
        brackets.join(" ")
    ))
}

/// `∫_C dν∘g/dν dν`, refining `C` until the derivative is constant.
fn integrate_derivative(r: Rank, g: &Word, c: &Word) -> BigRational {
    let ginv = g.inverse();
    let k = stable_ratio::word::common_prefix_len(ginv.letters(), c.letters());
    if k == c.len() && k < g.len() {
        return c.children(r).map(|child| integrate_derivative(r, g, &child)).sum();
    }
    let e = 2 * k as i64 - g.len() as i64;
    LatticeLog(e).exp(r) * cylinder_measure(r, &Cylinder::new(c.clone())).into_inner()
}

fn random_word(r: Rank, max_len: usize, rng: &mut ChaCha8Rng) -> Word {
    let len = rng.gen_range(0..=max_len);
    let letters: Vec<_> = r.letters().collect();
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let s = letters[rng.gen_range(0..letters.len())];
        if out.last() != Some(&s.inverse()) {
            out.push(s);
        }
    }
    Word::from_letters(out).unwrap()
}

fn c4_conformality_cocycle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..CONFORMAL_SAMPLES {
        let r = rank(rng.gen_range(2..=4));
        let g = random_word(r, 10, &mut rng);
        let h = random_word(r, 10, &mut rng);
        let xi = BoundaryPrefix::random(r, 40, &mut rng);
        let rn = rn_exponent(&g, &xi).map_err(|e| e.to_string())?;
        let horo = horofunction_value(&xi, &g.inverse()).map_err(|e| e.to_string())?;
        ensure(rn.k() == -horo, || format!("sample {i}: rn {rn} vs -h {}", -horo))?;
        let lhs = cocycle_r(&reduce_concat(&g, &h), &xi).map_err(|e| e.to_string())?;
        let hxi = boundary_action(&h, &xi).map_err(|e| e.to_string())?;
        let rhs = cocycle_r(&g, &hxi).map_err(|e| e.to_string())? + cocycle_r(&h, &xi).map_err(|e| e.to_string())?;
        ensure(lhs == rhs, || format!("sample {i}: cocycle {lhs} vs {rhs}"))?;
    }
    for i in 0..CHANGE_OF_VARIABLES_SAMPLES {
        let r = rank(rng.gen_range(2..=3));
        let g = random_word(r, 6, &mut rng);
        let c = loop {
            let w = random_word(r, 6, &mut rng);
            // skip the cases whose image needs refinement
            let k = stable_ratio::word::common_prefix_len(g.inverse().letters(), w.letters());
            if !(k == w.len() && k < g.len()) {
                break w;
            }
        };
        let image = cylinder_image(r, &g, &Cylinder::new(c.clone())).map_err(|e| e.to_string())?;
        let lhs = image.measure().into_inner();
        let rhs = integrate_derivative(r, &g, &c);
        ensure(lhs == rhs, || format!("pair {i}: nu(gC) = {lhs} but integral = {rhs}"))?;
    }
    Ok(format!(
        "{CONFORMAL_SAMPLES} conformality + cocycle samples, {CHANGE_OF_VARIABLES_SAMPLES} change-of-variables pairs, all exact"
    ))
}

fn c5_free_group_example() -> Check {
    let r = rank(2);
    let a = CylinderUnion::parse(r, &["a"]).unwrap();
    let b = Budget::default();
    let mut found = Vec::new();
    for k in -2..=2i64 {
        let p = SearchParams::new(Target::Lattice(LatticeLog(k)), q(1, 100), 6, 8).unwrap();
        let rep = ratio_witness_search(&a, &p, &b).map_err(|e| e.to_string())?;
        let w = rep.witness().ok_or_else(|| format!("no witness for 3^{k}"))?;
        ensure(verify_witness(&a, &w).unwrap_or(false), || format!("witness for 3^{k} fails verification"))?;
        ensure(w.exponent == LatticeLog(k), || format!("witness exponent {} for 3^{k}", w.exponent))?;
        found.push(format!("3^{k}:g={}", w.g));
    }
    let listed = Witness {
        g: Word::parse("ab", r).unwrap(),
        subset: ProductSet::from_base(&a, 0),
        exponent: LatticeLog(-2),
    };
    ensure(verify_witness(&a, &listed).unwrap_or(false), || "witness (ab, cyl(a)) fails".into())?;
    let p = SearchParams::new(Target::Ratio(q(2, 1)), q(1, 2), 6, 8).unwrap();
    let rep = ratio_witness_search(&a, &p, &b).map_err(|e| e.to_string())?;
    ensure(rep.status == SearchStatus::Exhausted, || "t=2 found a witness".into())?;
    let parity = parity_obstruction_check(r, 6, &b).map_err(|e| e.to_string())?;
    ensure(
        parity.odd_length_violations == 0 && parity.odd_exponent_violations == 0,
        || format!("parity violations: {parity:?}"),
    )?;
    Ok(format!(
        "{}; t=2 exhausted over {} g x {} pairs; parity L=6: {} fiber-preserving pairs, 0 odd",
        found.join(" "),
        rep.searched_g_count,
        rep.searched_sets_count,
        parity.fiber_preserving_pairs
    ))
}

fn c6_maharam_lattice() -> Check {
    let mut parts = Vec::new();
    for (r, seed) in [(2u32, 0u64), (2, 1), (3, 2)] {
        let r = rank(r);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = MaharamPoint::new(BoundaryPrefix::random(r, MAHARAM_STEPS + 8, &mut rng), LatticeLog(0));
        let orbit = maharam_orbit(r, &start, 8, MAHARAM_STEPS, seed).map_err(|e| e.to_string())?;
        let cert = lattice_certificate(r, &orbit).map_err(|e| e.to_string())?;
        ensure(cert.exceptions == 0 && cert.real_mismatches == 0, || format!("lattice exceptions: {cert:?}"))?;
        let sign = FinitePmpAction::sign(r);
        let fib = maharam_product_orbit(r, &start, &sign, 0, 8, MAHARAM_STEPS, seed).map_err(|e| e.to_string())?;
        let fcert = lattice_certificate(r, &fib).map_err(|e| e.to_string())?;
        ensure(fcert.exceptions == 0 && fcert.odd_fiber_returns == 0, || format!("fiber replay: {fcert:?}"))?;
        parts.push(format!(
            "r={} seed={seed}: t in [{}, {}], {} even returns",
            r.get(),
            cert.t_min,
            cert.t_max,
            fcert.fiber_returns
        ));
    }
    Ok(format!("{MAHARAM_STEPS}-step orbits, 0 exceptions; {}", parts.join("; ")))
}

fn c7_counting() -> Check {
    let r = rank(2);
    let xi = BoundaryPrefix::random(r, 14, &mut ChaCha8Rng::seed_from_u64(3));
    let mut scan = std::collections::BTreeMap::<(usize, i64), u64>::new();
    for g in r.ball_iter(8) {
        *scan.entry((g.len(), horofunction_value(&xi, &g).unwrap())).or_insert(0) += 1;
    }
    for m in 0..=8usize {
        for h in (-(m as i64)..=m as i64).step_by(2) {
            let got = horosphere_level_count(r, m, h, &xi).map_err(|e| e.to_string())?;
            let want = BigUint::from(scan.get(&(m, h)).copied().unwrap_or(0));
            ensure(got == want, || format!("level (m={m}, h={h}): {got} vs {want}"))?;
        }
    }
    let sweep = default_band_sweep(r, &xi).map_err(|e| e.to_string())?;
    ensure(sweep.constant <= SWEEP_MAX_CONSTANT, || format!("sweep constant {}", sweep.constant))?;
    let defect = hyperbolicity_defect(r, DEFECT_RADIUS, &Budget::new(DEFECT_BUDGET)).map_err(|e| e.to_string())?;
    ensure(defect == 0.into(), || format!("defect {defect}"))?;
    Ok(format!(
        "levels m<=8 exact; sweep of {} bands within [{:.4}, {:.4}], C = {:.4} (a0 = {}, T0 = {}); defect 0 through radius {DEFECT_RADIUS}",
        sweep.rows.len(),
        sweep.ratio_min,
        sweep.ratio_max,
        sweep.constant,
        sweep.a0,
        sweep.t0
    ))
}

fn run_cli(args: &[&str], threads: Option<&str>) -> (i32, Vec<u8>) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_stable-ratio"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t);
    }
    let out = cmd.output().expect("binary runs");
    let mut bytes = out.stdout;
    bytes.extend_from_slice(b"\n--stderr--\n");
    bytes.extend_from_slice(&out.stderr);
    (out.status.code().unwrap_or(-1), bytes)
}

fn c8_determinism() -> Check {
    let commands: Vec<Vec<&str>> = vec![
        vec!["zeta"],
        vec!["zeta", "--format", "csv"],
        vec!["zeta", "--rank", "3", "--rho", "3", "--n-max", "10"],
        vec!["admissibility"],
        vec!["ratio-search", "--set", "a", "--t", "1/9"],
        vec!["ratio-search", "--set", "a", "--t", "2", "--eps", "0.5"],
        vec!["stable-search", "--set", "e", "--t", "1/3", "--eps", "1/10"],
        vec!["parity", "--max-len", "6"],
        vec!["maharam", "--seed", "5"],
        vec!["count", "level", "--m", "5", "--h", "1"],
        vec!["count", "ball", "--r-outer", "10", "--t1", "-2", "--t2", "2"],
        vec!["count", "band", "--r-outer", "10", "--t1", "-2", "--t2", "2", "--a", "3"],
        vec!["count", "sweep", "--format", "csv"],
        vec!["ellipse", "--r-outer", "8", "--t", "0"],
        vec!["defect", "--radius", "3"],
        vec!["zeta", "--rho", "1"],
    ];
    let max_threads = std::thread::available_parallelism().map_or(8, |n| n.get()).max(8).to_string();
    for args in &commands {
        let first = run_cli(args, None);
        for threads in [None, Some("1"), Some(max_threads.as_str())] {
            let again = run_cli(args, threads);
            ensure(again == first, || format!("output differs for {args:?} with threads {threads:?}"))?;
        }
    }
    Ok(format!(
        "{} commands byte-identical across repeated runs and RAYON_NUM_THREADS in {{default, 1, {max_threads}}}",
        commands.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("zeta dual-oracle equality", c1_zeta_dual_oracle),
        ("stationarity and positivity", c2_stationarity_positivity),
        ("admissibility", c3_admissibility),
        ("exact conformality and cocycle", c4_conformality_cocycle),
        ("free-group example", c5_free_group_example),
        ("Maharam lattice certificate", c6_maharam_lattice),
        ("counting lemmas", c7_counting),
        ("determinism", c8_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = f();
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS criterion {}: {name} ({secs:.1}s) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({secs:.1}s) {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
