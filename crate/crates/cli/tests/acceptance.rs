//! Acceptance checks 1 to 13. Each test prints one PASS/FAIL line and then
//! asserts. Oracles are computed here from first principles wherever the
//! library result is being checked.

use std::collections::BTreeMap;
use std::process::Command;

use dyadic_core::chains::{build_block_matrix, build_edge_matrix, rng_from_seed, Chain, ChainConfig, ChainKind};
use dyadic_core::combinatorics;
use dyadic_core::coupling::{
    classify_case, contraction_survey, sample_pairs_in_case, CaseLabel, CoupledPair, DistanceParams,
};
use dyadic_core::enumeration::{boundary_set, enumerate_ladder, upsilon_set, TilingIndex};
use dyadic_core::mixing::sandwich;
use dyadic_core::spectral::{lower_bound_check, spectral_gap, verify_gap_recursion, SolverOptions};
use dyadic_core::tiling::HALF;
use dyadic_core::{Quadrant, Side, Tiling};
use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

// Pinned tolerances.
const GAP_K1_TOL: f64 = 1e-9;
const DENSE_TOL: f64 = 1e-8;
const RECURSION_SLACK: f64 = 1e-8;
const LIMIT_TOL: f64 = 1e-3;
const PLUS_RATIO_SLACK: f64 = 1e-12;
const SIGMAS: f64 = 3.0;
const FAITHFULNESS_STEPS: u64 = 1_000_000;
const COUPLING_B: u64 = 64;
const SAMPLED_1A_PAIRS: usize = 1000;
const SEED: u64 = 0x5eed_0001;

fn verdict(id: u32, name: &str, ok: bool, detail: String) {
    println!("{} criterion {id:>2} ({name}): {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} failed: {detail}");
}

fn big(n: usize) -> BigUint {
    BigUint::from(n)
}

/// `A_0 = 1`, `A_1 = 2`, `A_k = 2A_{k−1}² − A_{k−2}⁴`.
fn counts_oracle(k_max: usize) -> Vec<BigUint> {
    let mut a = vec![BigUint::one(), BigUint::from(2u32)];
    for k in 2..=k_max {
        let s = &a[k - 1] * &a[k - 1];
        let q = &a[k - 2] * &a[k - 2];
        a.push(BigUint::from(2u32) * s - &q * &q);
    }
    a.truncate(k_max + 1);
    a
}

fn rat(n: &BigUint, d: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(n.clone()), BigInt::from(d.clone()))
}

/// No rectangle interior crosses `x = 1/2` (or `y = 1/2`).
fn crosses_free(t: &Tiling, vertical: bool) -> bool {
    t.rectangles().iter().all(|r| {
        let iv = if vertical { r.x } else { r.y };
        iv.hi() <= HALF || iv.lo() >= HALF
    })
}

/// `r ≥ √5`, decided in integers.
fn at_least_sqrt5(r: &BigRational) -> bool {
    let (p, q) = (r.numer().clone(), r.denom().clone());
    !p.is_negative() && &p * &p >= BigInt::from(5) * &q * &q
}

fn fib_lucas(m: u32) -> (BigInt, BigInt) {
    let (mut f, mut f1) = (BigInt::zero(), BigInt::one());
    for _ in 0..m {
        let t = &f + &f1;
        f = std::mem::replace(&mut f1, t);
    }
    // L_m = F_{m−1} + F_{m+1} = 2F_{m+1} − F_m
    let l = BigInt::from(2) * &f1 - &f;
    (f, l)
}

#[test]
fn criterion_01_enumeration_counts() {
    let ladder = enumerate_ladder(4).unwrap();
    let got: Vec<usize> = ladder.iter().map(TilingIndex::len).collect();
    let oracle = counts_oracle(4);
    let ok = got == [1, 2, 7, 82, 11047]
        && got.iter().zip(&oracle).all(|(g, o)| big(*g) == *o)
        && (0..=4).all(|k| combinatorics::count_tilings(k) == oracle[k as usize]);
    verdict(1, "enumeration counts", ok, format!("|Ω_k| = {got:?}"));
}

#[test]
fn criterion_02_subset_counts() {
    let ladder = enumerate_ladder(4).unwrap();
    let mut ok = true;
    let mut rows = Vec::new();
    for k in 2..=4usize {
        let ix = &ladder[k];
        let v = ix.tilings().iter().filter(|t| crosses_free(t, true)).count();
        let h = ix.tilings().iter().filter(|t| crosses_free(t, false)).count();
        let b = ix.tilings().iter().filter(|t| crosses_free(t, true) && crosses_free(t, false)).count();
        let a1 = big(ladder[k - 1].len());
        let a2 = big(ladder[k - 2].len());
        ok &= big(v) == &a1 * &a1 && big(h) == &a1 * &a1 && big(b) == a2.pow(4);
        let lib = combinatorics::subset_counts(k as u32);
        ok &= lib.vertical == big(v) && lib.horizontal == big(h) && lib.both == big(b);
        rows.push((v, h, b));
    }
    verdict(2, "subset counts", ok, format!("(|Ω^||, |Ω^-|, |Ω^+|) for k=2..4: {rows:?}"));
}

#[test]
fn criterion_03_half_bisector_fraction() {
    let a = counts_oracle(12);
    let mut ok = true;
    let mut prev: Option<BigRational> = None;
    for k in 3..=12usize {
        // fraction of half-size tilings with a half-bisector
        let oracle = rat(&(&a[k - 2] * &a[k - 2]), &a[k - 1]);
        ok &= combinatorics::half_bisector_fraction(k as u32) == oracle;
        ok &= combinatorics::half_bisector_fraction_by_recurrence(k as u32) == oracle;
        // f < (√5−1)/2  ⇔  2f + 1 < √5
        let two_f_plus_one = &oracle * BigRational::from_integer(BigInt::from(2)) + BigRational::one();
        ok &= !at_least_sqrt5(&two_f_plus_one);
        if let Some(p) = &prev {
            ok &= oracle > *p;
        }
        prev = Some(oracle);
    }
    let f12 = prev.unwrap().to_f64().unwrap();
    let limit = (5f64.sqrt() - 1.0) / 2.0;
    ok &= (limit - f12).abs() <= LIMIT_TOL;
    verdict(3, "half-bisector fraction", ok, format!("f_12 = {f12:.9}, limit {limit:.9}"));
}

#[test]
fn criterion_04_plus_ratio() {
    let a = counts_oracle(12);
    let limit = 2.0 * (1.0 + 5f64.sqrt()) / 2.0 + 1.0;
    let mut ok = true;
    let mut last = 0.0;
    for k in 2..=12usize {
        let plus = a[k - 2].pow(4);
        let r = rat(&a[k], &plus);
        let f = rat(&(&a[k - 2] * &a[k - 2]), &a[k - 1]);
        let identity = BigRational::from_integer(BigInt::from(2)) / (&f * &f) - BigRational::one();
        ok &= r == identity && combinatorics::plus_ratio(k as u32) == r;
        // r ≥ 2φ + 1 = 2 + √5  ⇔  r − 2 ≥ √5
        ok &= at_least_sqrt5(&(&r - BigRational::from_integer(BigInt::from(2))));
        last = r.to_f64().unwrap();
        ok &= last >= limit - PLUS_RATIO_SLACK;
    }
    ok &= (last - limit).abs() <= LIMIT_TOL;
    verdict(4, "plus ratio identity", ok, format!("ratio at k=12 {last:.9}, 2φ+1 = {limit:.9}"));
}

/// Distinct tilings reachable by one edge flip, computed straight from the
/// flip rule over every (rectangle, side) selection.
fn flip_targets(t: &Tiling) -> BTreeMap<String, u32> {
    let mut m = BTreeMap::new();
    for i in 0..t.size() {
        for side in Side::ALL {
            if let Some(u) = t.edge_flip(i, side) {
                *m.entry(u.encode()).or_insert(0) += 1;
            }
        }
    }
    m
}

#[test]
fn criterion_05_boundary_set() {
    let ladder = enumerate_ladder(4).unwrap();
    let a = counts_oracle(4);
    let mut ok = true;
    let mut sizes = Vec::new();
    for k in 2..=4usize {
        let ix = &ladder[k];
        let n = 1usize << k;
        let expected: BigUint = big(n / 2) * (0..=k - 2).map(|i| &a[i] * &a[i]).product::<BigUint>();
        // direct scan: tilings without a vertical bisector one flip away from one
        let mut scanned = 0usize;
        for t in ix.tilings().iter().filter(|t| !crosses_free(t, true)) {
            let into: Vec<String> = flip_targets(t)
                .into_keys()
                .filter(|e| crosses_free(&Tiling::decode(e).unwrap(), true))
                .collect();
            if !into.is_empty() {
                scanned += 1;
                ok &= into.len() == 1;
            }
        }
        let lib = boundary_set(ix).unwrap();
        ok &= big(scanned) == expected && lib.len() == scanned;
        ok &= lib.iter().all(|b| {
            let into: Vec<String> = flip_targets(&b.tiling)
                .into_keys()
                .filter(|e| crosses_free(&Tiling::decode(e).unwrap(), true))
                .collect();
            into == [b.partner.encode()]
        });
        sizes.push(scanned);
    }
    ok &= sizes == [2, 16, 1568];
    verdict(5, "boundary set", ok, format!("sizes {sizes:?}, each with one flip into Ω^|"));
}

#[test]
fn criterion_06_upsilon_family() {
    let ladder = enumerate_ladder(4).unwrap();
    let a = counts_oracle(4);
    let mut ok = true;
    let mut sizes = Vec::new();
    for k in 2..=4usize {
        let set = upsilon_set(&ladder, k as u32).unwrap();
        let product: BigUint = (0..=k - 2).map(|i| &a[i] * &a[i]).product();
        ok &= big(set.len()) == product;
        ok &= set.iter().all(|t| crosses_free(t, true) && crosses_free(t, false));
        let distinct: std::collections::BTreeSet<String> = set.iter().map(Tiling::encode).collect();
        ok &= distinct.len() == set.len();
        ok &= set.iter().all(|t| ladder[k].index_of(t).is_some());
        // |Υ|/A ≤ φ^{−m}, m = 2k−2  ⇔  |Υ|(L_m + F_m√5) ≤ 2A
        let m = 2 * k as u32 - 2;
        let (f, l) = fib_lucas(m);
        let u = BigInt::from(set.len());
        let rhs = BigInt::from(2) * BigInt::from(a[k].clone()) - &u * &l;
        let lhs = &u * &f;
        ok &= !rhs.is_negative() && BigInt::from(5) * &lhs * &lhs <= &rhs * &rhs;
        sizes.push(set.len());
    }
    verdict(6, "upsilon family", ok, format!("|Υ_k| = {sizes:?}"));
}

/// Dense edge-flip matrix straight from the move rule: a uniform rectangle
/// and a uniform side, flipped when the flip is valid.
fn dense_edge(ix: &TilingIndex) -> DMatrix<f64> {
    let n = ix.len();
    let cells = (1usize << ix.k()) as f64;
    let mut m = DMatrix::zeros(n, n);
    for (x, t) in ix.tilings().iter().enumerate() {
        for i in 0..t.size() {
            for side in Side::ALL {
                let y = match t.edge_flip(i, side) {
                    Some(u) => ix.index_of(&u).unwrap(),
                    None => x,
                };
                m[(x, y)] += 1.0 / (4.0 * cells);
            }
        }
    }
    m
}

/// Dense block matrix: a uniform half and a uniform half-size tiling.
fn dense_block(ix: &TilingIndex, halves: &TilingIndex) -> DMatrix<f64> {
    let n = ix.len();
    let w = 1.0 / (4.0 * halves.len() as f64);
    let mut m = DMatrix::zeros(n, n);
    for (x, t) in ix.tilings().iter().enumerate() {
        for side in Side::ALL {
            for rho in halves.tilings() {
                let y = match t.retile(side, rho) {
                    Some(u) => ix.index_of(&u).unwrap(),
                    None => x,
                };
                m[(x, y)] += w;
            }
        }
    }
    m
}

fn eigenvalues_desc(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

#[test]
fn criterion_07_spectral_solver() {
    let opts = SolverOptions::default();
    let ladder = enumerate_ladder(3).unwrap();
    let g1 = spectral_gap(&build_edge_matrix(&ladder[1]).unwrap(), &opts).unwrap().gap;
    let mut ok = (g1 - 0.5).abs() <= GAP_K1_TOL;
    let mut worst: f64 = 0.0;
    let mut entries: f64 = 0.0;
    for k in 1..=3usize {
        let mut pairs = vec![(build_edge_matrix(&ladder[k]).unwrap(), dense_edge(&ladder[k]))];
        if k >= 2 {
            pairs.push((build_block_matrix(&ladder[k], &ladder[k - 1]).unwrap(), dense_block(&ladder[k], &ladder[k - 1])));
        }
        for (sparse, dense) in pairs {
            let n = sparse.dim();
            let lib = sparse.to_dense();
            for i in 0..n {
                for j in 0..n {
                    entries = entries.max((lib[i * n + j] - dense[(i, j)]).abs());
                }
            }
            let oracle = 1.0 - eigenvalues_desc(&dense)[1];
            worst = worst.max((spectral_gap(&sparse, &opts).unwrap().gap - oracle).abs());
        }
    }
    ok &= worst <= DENSE_TOL && entries <= 1e-15;
    verdict(7, "spectral solver", ok, format!("γ_1 = {g1}, max |sparse − dense| = {worst:.2e}"));
}

#[test]
fn criterion_08_gap_recursion() {
    let opts = SolverOptions::default();
    let ladder = enumerate_ladder(3).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for k in [3u32, 4] {
        let r = verify_gap_recursion(k, &opts).unwrap();
        ok &= r.gap_k - r.gap_block * r.gap_k_minus_1 >= -RECURSION_SLACK;
        if k == 3 {
            // all three gaps against the dense oracle
            let e3 = 1.0 - eigenvalues_desc(&dense_edge(&ladder[3]))[1];
            let e2 = 1.0 - eigenvalues_desc(&dense_edge(&ladder[2]))[1];
            let b3 = 1.0 - eigenvalues_desc(&dense_block(&ladder[3], &ladder[2]))[1];
            ok &= (r.gap_k - e3).abs() <= DENSE_TOL
                && (r.gap_k_minus_1 - e2).abs() <= DENSE_TOL
                && (r.gap_block - b3).abs() <= DENSE_TOL;
        }
        detail.push(format!("k={k}: {:.6} ≥ {:.6}·{:.6}", r.gap_k, r.gap_block, r.gap_k_minus_1));
    }
    verdict(8, "gap recursion", ok, detail.join("; "));
}

#[test]
fn criterion_09_lower_bound_test_function() {
    let opts = SolverOptions::default();
    let ladder = enumerate_ladder(4).unwrap();
    let a = counts_oracle(4);
    let mut ok = true;
    let mut detail = Vec::new();
    for k in 2..=4usize {
        let ix = &ladder[k];
        let n = 1u64 << k;
        let f: Vec<bool> = ix.tilings().iter().map(|t| crosses_free(t, true)).collect();
        // Dirichlet form from the flip rule: Σ_x π(x) Σ_y P(x,y) (f(x) − f(y))² / 2.
        let mut crossing = 0u64;
        for (x, t) in ix.tilings().iter().enumerate() {
            for (enc, mult) in flip_targets(t) {
                let y = ix.index_of_encoding(&enc).unwrap();
                if f[x] != f[y] {
                    crossing += mult as u64;
                }
            }
        }
        let dirichlet = BigRational::new(BigInt::from(crossing), BigInt::from(2 * 4 * n * ix.len() as u64));
        let p = rat(&(&a[k - 1] * &a[k - 1]), &a[k]);
        let variance = &p * (BigRational::one() - &p);
        let boundary = big(n as usize / 2) * (0..=k - 2).map(|i| &a[i] * &a[i]).product::<BigUint>();
        let closed_dirichlet = rat(&boundary, &(big(2 * n as usize) * &a[k]));
        let r = lower_bound_check(k as u32, &opts).unwrap();
        ok &= dirichlet == closed_dirichlet && r.dirichlet == dirichlet && r.variance == variance;
        let rq = (&dirichlet / &variance).to_f64().unwrap();
        ok &= r.gap <= rq + RECURSION_SLACK && r.holds;
        detail.push(format!("k={k}: E = {}, var = {}, γ = {:.6} ≤ {rq:.6}", dirichlet, variance, r.gap));
    }
    verdict(9, "lower-bound test function", ok, detail.join("; "));
}

/// Worst-start mixing time of a dense chain from the uniform law.
fn dense_mixing_time(p: &DMatrix<f64>, eps: f64) -> u64 {
    let n = p.nrows();
    let mut m = DMatrix::<f64>::identity(n, n);
    let u = 1.0 / n as f64;
    for t in 0.. {
        let worst = (0..n)
            .map(|x| 0.5 * (0..n).map(|y| (m[(x, y)] - u).abs()).sum::<f64>())
            .fold(0.0, f64::max);
        if worst <= eps + 1e-12 {
            return t;
        }
        m = &m * p;
    }
    unreachable!()
}

#[test]
fn criterion_10_sandwich() {
    let opts = SolverOptions::default();
    let ladder = enumerate_ladder(3).unwrap();
    let eps = 0.25;
    let mut ok = true;
    let mut detail = Vec::new();
    for k in [2u32, 3] {
        let dense = dense_edge(&ladder[k as usize]);
        let t_mix = dense_mixing_time(&dense, eps);
        let t_rel = 1.0 / (1.0 - eigenvalues_desc(&dense)[1]);
        let pi_min = 1.0 / ladder[k as usize].len() as f64;
        let lower = (t_rel - 1.0) * (1.0 / (2.0 * eps)).ln();
        let upper = (1.0 / (eps * pi_min)).ln() * t_rel;
        ok &= lower <= t_mix as f64 && t_mix as f64 <= upper;
        let r = sandwich(&ladder, k, eps, &opts).unwrap();
        ok &= r.t_mix == t_mix && (r.t_rel - t_rel).abs() <= 1e-6 && r.holds;
        detail.push(format!("k={k}: {lower:.3} ≤ {t_mix} ≤ {upper:.3}"));
    }
    verdict(10, "relaxation/mixing sandwich", ok, detail.join("; "));
}

fn distance(x: &Tiling, y: &Tiling, b: u64) -> u64 {
    let (hx, hy) = (x.half_bisectors(), y.half_bisectors());
    let l1 = Side::ALL.iter().filter(|&&s| hx.contains(s) != hy.contains(s)).count() as u64;
    let l2 = Quadrant::ALL.iter().filter(|&&q| !Tiling::quadrant_equal(x, y, q)).count() as u64;
    b * l1 + l2
}

/// Exact `E[d′]` under the shared block move, averaged over every
/// (half, half-size tiling) draw.
fn expected_after(x: &Tiling, y: &Tiling, halves: &TilingIndex, b: u64) -> BigRational {
    let mut total = 0u64;
    for side in Side::ALL {
        for rho in halves.tilings() {
            let x2 = x.retile(side, rho).unwrap_or_else(|| x.clone());
            let y2 = y.retile(side, rho).unwrap_or_else(|| y.clone());
            total += distance(&x2, &y2, b);
        }
    }
    BigRational::new(BigInt::from(total), BigInt::from(4 * halves.len() as u64))
}

#[test]
fn criterion_11_coupling_case_bounds() {
    let params = DistanceParams::new(COUPLING_B).unwrap();
    let ladder = enumerate_ladder(4).unwrap();
    let b = BigRational::from_integer(BigInt::from(COUPLING_B));
    let mut ok = true;

    // k = 3: every unordered pair
    let ix = &ladder[3];
    let f3 = combinatorics::half_bisector_fraction(3);
    let mut ones = 0;
    for i in 0..ix.len() {
        for j in i + 1..ix.len() {
            let (x, y) = (ix.tiling(i), ix.tiling(j));
            let pair = CoupledPair::new(x.clone(), y.clone()).unwrap();
            if classify_case(&pair).unwrap() == CaseLabel::OneA {
                ones += 1;
                let d = BigRational::from_integer(BigInt::from(distance(x, y, COUPLING_B)));
                ok &= expected_after(x, y, &ladder[2], COUPLING_B) == d - &f3 * &b;
            }
        }
    }
    ok &= ones > 0;
    let mut rng = rng_from_seed(SEED);
    let s3 = contraction_survey(ix, &ladder[2], &params, 0, None, &mut rng).unwrap();
    ok &= s3.exhaustive && s3.bounds_hold;

    // k = 4: seeded Case-1a pairs, then a seeded survey of all cases
    let f4 = combinatorics::half_bisector_fraction(4);
    let pairs =
        sample_pairs_in_case(&ladder[4], |l| l == CaseLabel::OneA, SAMPLED_1A_PAIRS, 50_000_000, &mut rng).unwrap();
    ok &= pairs.len() == SAMPLED_1A_PAIRS;
    for pair in &pairs {
        let d = BigRational::from_integer(BigInt::from(distance(pair.x(), pair.y(), COUPLING_B)));
        ok &= expected_after(pair.x(), pair.y(), &ladder[3], COUPLING_B) == d - &f4 * &b;
    }
    let s4 = contraction_survey(&ladder[4], &ladder[3], &params, 1000, Some(SEED), &mut rng).unwrap();
    ok &= s4.bounds_hold;
    verdict(
        11,
        "coupling case bounds",
        ok,
        format!(
            "k=3: {ones} Case-1a pairs of {}; k=4: {} Case-1a pairs, {} surveyed; all case bounds hold = {}",
            s3.pairs,
            pairs.len(),
            s4.pairs,
            s3.bounds_hold && s4.bounds_hold
        ),
    );
}

#[test]
fn criterion_12_chain_faithfulness() {
    let ladder = enumerate_ladder(2).unwrap();
    let ix = &ladder[2];
    let n = ix.len();
    let t = FAITHFULNESS_STEPS as f64;
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for (c, kind) in [ChainKind::Edge, ChainKind::Block].into_iter().enumerate() {
        let dense = match kind {
            ChainKind::Edge => dense_edge(ix),
            ChainKind::Block => dense_block(ix, &ladder[1]),
        };
        let chain = Chain::new(ChainConfig { k: 2, kind, seed: SEED + c as u64 }).unwrap();
        let mut rng = chain.rng();
        for start in [0, n / 2, n - 1] {
            let x = ix.tiling(start);
            let mut hits = vec![0u64; n];
            for _ in 0..FAITHFULNESS_STEPS {
                hits[ix.index_of(&chain.step(x, &mut rng)).unwrap()] += 1;
            }
            for (j, &h) in hits.iter().enumerate() {
                let q = dense[(start, j)];
                let sd = (q * (1.0 - q) / t).sqrt();
                let dev = (h as f64 / t - q).abs();
                if sd == 0.0 {
                    ok &= dev == 0.0;
                } else {
                    worst = worst.max(dev / sd);
                    ok &= dev <= SIGMAS * sd;
                }
            }
        }
        // long-run occupancy with the reversible-chain variance
        let ev = eigenvalues_desc(&dense);
        let lam = ev[1].abs().max(ev[n - 1].abs());
        let pi = 1.0 / n as f64;
        let sd = (pi * (1.0 - pi) * (1.0 + lam) / (1.0 - lam) / t).sqrt();
        let mut occ = vec![0u64; n];
        let mut x = ix.tiling(0).clone();
        for _ in 0..FAITHFULNESS_STEPS {
            x = chain.step(&x, &mut rng);
            occ[ix.index_of(&x).unwrap()] += 1;
        }
        for &o in &occ {
            let dev = (o as f64 / t - pi).abs();
            worst = worst.max(dev / sd);
            ok &= dev <= SIGMAS * sd;
        }
    }
    verdict(12, "chain faithfulness", ok, format!("{FAITHFULNESS_STEPS} steps per start, worst {worst:.2}σ"));
}

fn run_stripped(threads: &str, args: &[&str]) -> (String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_dyadic"))
        .args(["--threads", threads, "--compact"])
        .args(args)
        .env_remove("DYADIC_OUT_DIR")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let meta = v.as_object_mut().unwrap().remove("metadata").unwrap();
    (serde_json::to_string(&v).unwrap(), meta["threads"].to_string())
}

#[test]
fn criterion_13_determinism() {
    let runs: [&[&str]; 5] = [
        &["count", "--k", "5", "--streaming"],
        &["gap", "--k", "3", "--recursion"],
        &["couple", "--k", "4", "--samples", "200", "--seed", "11"],
        &["mix", "--k", "3", "--t-max", "60", "--statistic-samples", "30000", "--statistic-t", "20", "--seed", "5"],
        &["sample", "--k", "4", "--chain", "block", "--steps", "3000", "--every", "7", "--seed", "5"],
    ];
    let mut ok = true;
    let mut bytes = 0;
    for args in runs {
        let (a, ta) = run_stripped("1", args);
        let (b, _) = run_stripped("1", args);
        let (c, tc) = run_stripped("4", args);
        let (d, _) = run_stripped("4", args);
        ok &= a == b && a == c && a == d && ta == "1" && tc == "4";
        bytes += a.len();
    }
    verdict(13, "determinism", ok, format!("5 subcommands, {bytes} bytes each run, identical over 1/4 threads"));
}
