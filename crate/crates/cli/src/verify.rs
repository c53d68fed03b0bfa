//! The acceptance checks behind `verify-all`.

use std::fmt;

use dyadic_core::chains::{build_block_matrix, build_edge_matrix, rng_from_seed, Chain, ChainConfig, ChainKind};
use dyadic_core::combinatorics::{self, CountTable};
use dyadic_core::coupling::{
    contraction_survey, evaluate_pair, sample_pairs_in_case, CaseLabel, DistanceParams, DEFAULT_B,
};
use dyadic_core::enumeration::{boundary_set, enumerate_ladder, neighbors, upsilon_set, TilingIndex};
use dyadic_core::mixing::sandwich;
use dyadic_core::sparse::SparseSymmetricStochastic;
use dyadic_core::spectral::{
    lower_bound_check, spectral_gap, verify_gap_recursion, SolverOptions, GAP_SLACK,
};
use dyadic_core::{BigCount, Error};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::*;

pub const DEFAULT_SEED: u64 = 20_240_517;

/// Single-step and long-run sample sizes for the faithfulness check.
pub const FAITHFULNESS_STEPS: u64 = 1_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:>2} {}: {}", self.id, self.title, self.detail)
    }
}

type Outcome = Result<(bool, String), Error>;

fn result(id: u32, title: &'static str, r: Outcome) -> CheckResult {
    match r {
        Ok((passed, detail)) => CheckResult { id, title, passed, detail },
        Err(e) => CheckResult { id, title, passed: false, detail: format!("error: {e}") },
    }
}

pub fn run_all(seed: u64) -> Vec<CheckResult> {
    vec![
        check(1, seed),
        check(2, seed),
        check(3, seed),
        check(4, seed),
        check(5, seed),
        check(6, seed),
        check(7, seed),
        check(8, seed),
        check(9, seed),
        check(10, seed),
        check(11, seed),
        check(12, seed),
        check(13, seed),
    ]
}

pub fn check(id: u32, seed: u64) -> CheckResult {
    match id {
        1 => result(1, "enumeration counts", counts()),
        2 => result(2, "subset counts", subsets()),
        3 => result(3, "half-bisector fraction", fractions()),
        4 => result(4, "plus ratio", plus_ratios()),
        5 => result(5, "boundary set", boundary()),
        6 => result(6, "upsilon family", upsilon()),
        7 => result(7, "spectral solver", solver()),
        8 => result(8, "gap recursion", recursion()),
        9 => result(9, "lower-bound test function", lower_bound()),
        10 => result(10, "relaxation/mixing sandwich", sandwiches()),
        11 => result(11, "coupling case bounds", coupling(seed)),
        12 => result(12, "chain faithfulness", faithfulness(seed)),
        13 => result(13, "determinism", determinism(seed)),
        _ => CheckResult { id, title: "unknown", passed: false, detail: "no such check".into() },
    }
}

fn sq(a: &BigCount) -> BigCount {
    a * a
}

fn counts() -> Outcome {
    let ladder = enumerate_ladder(4)?;
    let got: Vec<usize> = ladder.iter().map(TilingIndex::len).collect();
    let ok = got == [1, 2, 7, 82, 11047]
        && ladder
            .iter()
            .enumerate()
            .all(|(k, ix)| combinatorics::count_tilings(k as u32) == BigCount::from(ix.len()));
    Ok((ok, format!("|Ω_k| = {got:?}")))
}

fn subsets() -> Outcome {
    let ladder = enumerate_ladder(4)?;
    let mut ok = true;
    for k in 2..=4u32 {
        let ix = &ladder[k as usize];
        let v = ix.select(|t| t.has_vertical_bisector()).len();
        let h = ix.select(|t| t.has_horizontal_bisector()).len();
        let b = ix.select(|t| t.has_vertical_bisector() && t.has_horizontal_bisector()).len();
        let a1 = BigCount::from(ladder[k as usize - 1].len());
        let a2 = BigCount::from(ladder[k as usize - 2].len());
        let c = combinatorics::subset_counts(k);
        ok &= BigCount::from(v) == sq(&a1) && BigCount::from(h) == sq(&a1) && BigCount::from(b) == sq(&sq(&a2));
        ok &= c.vertical == BigCount::from(v) && c.horizontal == BigCount::from(h) && c.both == BigCount::from(b);
    }
    Ok((ok, "scans match A_{k-1}², A_{k-1}², A_{k-2}⁴ for k = 2..4".into()))
}

fn fractions() -> Outcome {
    let mut ok = true;
    let mut prev = None;
    for k in 3..=12 {
        let f = combinatorics::half_bisector_fraction(k);
        ok &= f == combinatorics::half_bisector_fraction_by_recurrence(k);
        ok &= combinatorics::fraction_below_limit(k);
        if let Some(p) = prev {
            ok &= f > p;
        }
        prev = Some(f);
    }
    let f12 = combinatorics::ratio_to_f64(&combinatorics::half_bisector_fraction(12));
    let gap = (combinatorics::INV_PHI - f12).abs();
    ok &= gap < 1e-3;
    Ok((ok, format!("f_12 = {f12:.9}, |1/φ − f_12| = {gap:.2e}")))
}

fn plus_ratios() -> Outcome {
    let limit = 2.0 * combinatorics::PHI + 1.0;
    let mut ok = true;
    for k in 2..=12 {
        let r = combinatorics::plus_ratio(k);
        ok &= r == combinatorics::plus_ratio_from_fraction(k);
        ok &= combinatorics::plus_ratio_above_limit(k);
        ok &= combinatorics::ratio_to_f64(&r) >= limit - 1e-12;
    }
    let r12 = combinatorics::ratio_to_f64(&combinatorics::plus_ratio(12));
    ok &= (r12 - limit).abs() < 1e-3;
    Ok((ok, format!("ratio at k = 12: {r12:.9} vs 2φ+1 = {limit:.9}")))
}

fn boundary() -> Outcome {
    let ladder = enumerate_ladder(4)?;
    let mut sizes = Vec::new();
    let mut ok = true;
    for k in 2..=4u32 {
        let set = boundary_set(&ladder[k as usize])?;
        ok &= BigCount::from(set.len()) == combinatorics::boundary_count(k);
        for b in &set {
            let mut into: Vec<String> = neighbors(&b.tiling)
                .into_iter()
                .filter(|(t, _)| t.has_vertical_bisector())
                .map(|(t, _)| t.encode())
                .collect();
            into.dedup();
            ok &= into.len() == 1 && into[0] == b.partner.encode();
        }
        sizes.push(set.len());
    }
    ok &= sizes == [2, 16, 1568];
    Ok((ok, format!("sizes {sizes:?}, each with a unique flip into Ω^|")))
}

fn upsilon() -> Outcome {
    let ladder = enumerate_ladder(4)?;
    let mut sizes = Vec::new();
    let mut ok = true;
    for k in 2..=4u32 {
        let set = upsilon_set(&ladder, k)?;
        let product: BigCount = (0..=k - 2).map(|i| sq(&combinatorics::count_tilings(i))).product();
        ok &= BigCount::from(set.len()) == product;
        ok &= set.iter().all(|t| t.has_vertical_bisector() && t.has_horizontal_bisector());
        ok &= combinatorics::upsilon_ratio_within_phi_bound(k);
        sizes.push(set.len());
    }
    Ok((ok, format!("|Υ_k| = {sizes:?}, inside Ω^+, within the φ bound")))
}

fn dense_gap(p: &SparseSymmetricStochastic) -> f64 {
    let n = p.dim();
    let m = DMatrix::from_row_slice(n, n, &p.to_dense());
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    1.0 - ev[1]
}

fn solver() -> Outcome {
    let opts = SolverOptions::default();
    let ladder = enumerate_ladder(3)?;
    let g1 = spectral_gap(&build_edge_matrix(&ladder[1])?, &opts)?.gap;
    let mut ok = (g1 - 0.5).abs() <= 1e-9;
    let mut worst: f64 = 0.0;
    for k in 1..=3usize {
        let mut ms = vec![build_edge_matrix(&ladder[k])?];
        if k >= 2 {
            ms.push(build_block_matrix(&ladder[k], &ladder[k - 1])?);
        }
        for p in ms {
            let d = (spectral_gap(&p, &opts)?.gap - dense_gap(&p)).abs();
            worst = worst.max(d);
        }
    }
    ok &= worst <= 1e-8;
    Ok((ok, format!("γ_1 = {g1}, max |sparse − dense| = {worst:.2e}")))
}

fn recursion() -> Outcome {
    let opts = SolverOptions::default();
    let mut ok = true;
    let mut detail = Vec::new();
    for k in [3, 4] {
        let r = verify_gap_recursion(k, &opts)?;
        ok &= r.gap_k - r.product >= -GAP_SLACK;
        detail.push(format!("k={k}: {:.6} ≥ {:.6}", r.gap_k, r.product));
    }
    Ok((ok, detail.join(", ")))
}

fn lower_bound() -> Outcome {
    let opts = SolverOptions::default();
    let table = CountTable::up_to(4)?;
    let mut ok = true;
    let mut detail = Vec::new();
    for k in 2..=4 {
        let r = lower_bound_check(k, &opts)?;
        ok &= r.holds;
        ok &= r.dirichlet == table.dirichlet_vertical_indicator(k);
        ok &= r.variance == table.variance_vertical_indicator(k);
        detail.push(format!("k={k}: γ = {:.6} ≤ {:.6}", r.gap, r.rayleigh_f64));
    }
    Ok((ok, detail.join(", ")))
}

fn sandwiches() -> Outcome {
    let opts = SolverOptions::default();
    let ladder = enumerate_ladder(3)?;
    let mut ok = true;
    let mut detail = Vec::new();
    for k in [2, 3] {
        let r = sandwich(&ladder, k, 0.25, &opts)?;
        ok &= r.holds;
        detail.push(format!("k={k}: {:.3} ≤ {} ≤ {:.3}", r.lower, r.t_mix, r.upper));
    }
    Ok((ok, detail.join(", ")))
}

fn coupling(seed: u64) -> Outcome {
    let params = DistanceParams::new(DEFAULT_B)?;
    let ladder = enumerate_ladder(4)?;
    let mut rng = rng_from_seed(seed);
    let s3 = contraction_survey(&ladder[3], &ladder[2], &params, 0, None, &mut rng)?;
    let ones3: u64 = s3.cases.iter().filter(|c| c.label == CaseLabel::OneA).map(|c| c.pairs).sum();
    let mut ok = s3.bounds_hold && s3.cases.iter().all(|c| c.identity_violations == 0) && ones3 > 0;

    let f4 = combinatorics::half_bisector_fraction(4);
    let pairs = sample_pairs_in_case(&ladder[4], |l| l == CaseLabel::OneA, 1000, 50_000_000, &mut rng)?;
    ok &= pairs.len() == 1000;
    for pair in &pairs {
        let o = evaluate_pair(pair, &ladder[3], &params, &f4)?;
        ok &= o.expected == o.bound;
    }
    let s4 = contraction_survey(&ladder[4], &ladder[3], &params, 1000, Some(seed), &mut rng)?;
    ok &= s4.bounds_hold;
    Ok((
        ok,
        format!(
            "k=3: {} pairs ({} in 1a), k=4: {} 1a pairs, {} sampled pairs; worst ratio {:.4}",
            s3.pairs,
            ones3,
            pairs.len(),
            s4.pairs,
            s4.max_ratio_f64.max(s3.max_ratio_f64)
        ),
    ))
}

/// Largest nontrivial |eigenvalue| of a small chain.
fn second_modulus(p: &SparseSymmetricStochastic) -> f64 {
    let n = p.dim();
    let m = DMatrix::from_row_slice(n, n, &p.to_dense());
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().map(|x| x.abs()).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev[1]
}

fn faithfulness(seed: u64) -> Outcome {
    let ladder = enumerate_ladder(2)?;
    let index = &ladder[2];
    let n = index.len();
    let steps = FAITHFULNESS_STEPS;
    let mut ok = true;
    let mut worst_z: f64 = 0.0;
    for (c, kind) in [ChainKind::Edge, ChainKind::Block].into_iter().enumerate() {
        let p = match kind {
            ChainKind::Edge => build_edge_matrix(index)?,
            ChainKind::Block => build_block_matrix(index, &ladder[1])?,
        };
        let chain = Chain::new(ChainConfig { k: 2, kind, seed: seed.wrapping_add(c as u64) })?;
        let mut rng = chain.rng();
        for start in [0, n / 2, n - 1] {
            let x = index.tiling(start);
            let mut hits = vec![0u64; n];
            for _ in 0..steps {
                let y = chain.step(x, &mut rng);
                hits[index.index_of(&y).expect("stays in Ω")] += 1;
            }
            for (j, &h) in hits.iter().enumerate() {
                let q = p.value(start, j);
                let sd = (q * (1.0 - q) / steps as f64).sqrt();
                let dev = (h as f64 / steps as f64 - q).abs();
                if sd == 0.0 {
                    ok &= h == 0 || q == 1.0;
                } else {
                    worst_z = worst_z.max(dev / sd);
                    ok &= dev <= 3.0 * sd;
                }
            }
        }
        let lam = second_modulus(&p);
        let pi = 1.0 / n as f64;
        let sd = (pi * (1.0 - pi) * (1.0 + lam) / (1.0 - lam) / steps as f64).sqrt();
        let mut occ = vec![0u64; n];
        let mut x = index.tiling(0).clone();
        for _ in 0..steps {
            x = chain.step(&x, &mut rng);
            occ[index.index_of(&x).expect("stays in Ω")] += 1;
        }
        for &o in &occ {
            let dev = (o as f64 / steps as f64 - pi).abs();
            worst_z = worst_z.max(dev / sd);
            ok &= dev <= 3.0 * sd;
        }
    }
    Ok((ok, format!("{steps} steps per start, worst deviation {worst_z:.2}σ")))
}

/// Runs the payload builders on 1- and 4-thread pools and twice on each.
fn determinism(seed: u64) -> Outcome {
    let payloads = || -> Result<Vec<String>, CliError> {
        let solver = SolverArgs { tol: 1e-12, residual_tol: 1e-6, max_iterations: 1_000_000 };
        let mut out = Vec::new();
        out.push(commands::count_payload(&CountArgs { k: 4, cap: 16, streaming: false })?.to_string());
        let gap = GapArgs {
            k: 3,
            chain: ChainArg::Edge,
            recursion: true,
            lower_bound: true,
            solver: solver.clone(),
            matrix: None,
        };
        out.push(commands::gap_payload(&gap)?.0.to_string());
        let couple = CoupleArgs { k: 3, b: DEFAULT_B, exhaustive: true, samples: None, seed };
        out.push(commands::couple_payload(&couple)?.0.to_string());
        let mix = MixArgs {
            k: 3,
            chain: ChainArg::Edge,
            epsilon: 0.25,
            start: None,
            t_max: 50,
            mixing_time: Some(StartsArg::Surrogate),
            random_starts: 10,
            sandwich: false,
            scaling: None,
            statistic_samples: Some(20_000),
            statistic_t: 20,
            seed,
            solver,
            csv: None,
        };
        out.push(commands::mix_payload(&mix)?.0.to_string());
        let sample = SampleArgs {
            k: 3,
            chain: ChainArg::Block,
            steps: 2000,
            seed,
            start: None,
            statistic: StatisticArg::HalfBisectorCount,
            every: 10,
            csv: None,
        };
        out.push(commands::sample_payload(&sample)?.to_string());
        Ok(out)
    };
    let mut runs = Vec::new();
    for threads in [1, 4, 1, 4] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Invariant(e.to_string()))?;
        let r = pool.install(payloads).map_err(|e| Error::Invariant(e.to_string()))?;
        runs.push(r);
    }
    let ok = runs.windows(2).all(|w| w[0] == w[1]);
    let bytes: usize = runs[0].iter().map(String::len).sum();
    Ok((ok, format!("5 payloads ({bytes} bytes) identical across 1/4 threads and repeats")))
}
