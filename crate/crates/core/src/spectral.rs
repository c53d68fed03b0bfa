//! Spectral gaps by deflated power iteration, plus variance and Dirichlet
//! forms under the uniform distribution.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::chains::{build_block_matrix, build_edge_matrix, ChainKind};
use crate::enumeration::{enumerate_ladder, TilingIndex};
use crate::sparse::{dot, sum, SparseSymmetricStochastic, CHUNK};
use crate::Error;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SolverOptions {
    /// Relative change of the eigenvalue estimate over one window.
    pub tol: f64,
    pub window: usize,
    pub max_iterations: usize,
    /// Bound on `‖P v − λ₂ v‖` for a unit vector `v`.
    pub residual_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-12,
            window: 100,
            max_iterations: 1_000_000,
            residual_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub k: Option<u32>,
    pub chain: Option<ChainKind>,
    pub dimension: usize,
    pub lambda2: f64,
    pub gap: f64,
    pub relaxation_time: f64,
    pub residual: f64,
    pub iterations: usize,
    pub options: SolverOptions,
}

/// Deterministic pseudo-random start vector in `[-1, 1]`.
fn start_vector(n: usize) -> Vec<f64> {
    (0..n as u64)
        .map(|i| {
            let mut z = i.wrapping_add(0x9E37_79B9_7F4A_7C15);
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect()
}

fn center(v: &mut [f64]) {
    let mean = sum(v) / v.len() as f64;
    v.par_iter_mut().for_each(|x| *x -= mean);
}

fn scale(v: &mut [f64], s: f64) {
    v.par_iter_mut().for_each(|x| *x *= s);
}

/// Second-largest eigenvalue of a symmetric stochastic matrix. Iterates on
/// `(P + I)/2`, projecting out the constant vector at every step.
pub fn spectral_gap(p: &SparseSymmetricStochastic, opts: &SolverOptions) -> Result<SpectralReport, Error> {
    let n = p.dim();
    if n < 2 {
        return Err(Error::InvalidArgument("spectral gap needs at least two states".into()));
    }
    if !(opts.tol > 0.0) || !(opts.residual_tol > 0.0) || opts.window == 0 {
        return Err(Error::InvalidArgument("solver tolerances must be positive".into()));
    }
    if !p.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut v = start_vector(n);
    center(&mut v);
    let nv = dot(&v, &v).sqrt();
    scale(&mut v, 1.0 / nv);
    let mut w = vec![0.0; n];
    let mut mu = 0.0;
    let mut checkpoint = f64::NAN;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        p.matvec(&v, &mut w);
        w.par_iter_mut().zip(&v).for_each(|(a, b)| *a = 0.5 * (*a + b));
        center(&mut w);
        mu = dot(&v, &w);
        let norm = dot(&w, &w).sqrt();
        if it % opts.window == 0 {
            let r2: f64 = {
                let partial: Vec<f64> = w
                    .par_chunks(CHUNK)
                    .zip(v.par_chunks(CHUNK))
                    .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - mu * y).powi(2)).sum::<f64>())
                    .collect();
                partial.iter().sum()
            };
            // residual for P is twice that of the lazy matrix
            residual = 2.0 * r2.sqrt();
            let settled = ((mu - checkpoint) / mu).abs() < opts.tol;
            checkpoint = mu;
            if settled && residual < opts.residual_tol {
                return Ok(report(n, mu, residual, it, opts));
            }
        }
        if norm == 0.0 {
            // v lies in the kernel of the lazy matrix: λ₂′ = 0
            return Ok(report(n, 0.0, 0.0, it, opts));
        }
        std::mem::swap(&mut v, &mut w);
        scale(&mut v, 1.0 / norm);
    }
    let _ = mu;
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        residual,
    })
}

fn report(n: usize, mu: f64, residual: f64, iterations: usize, opts: &SolverOptions) -> SpectralReport {
    let gap = 2.0 * (1.0 - mu);
    SpectralReport {
        k: None,
        chain: None,
        dimension: n,
        lambda2: 1.0 - gap,
        gap,
        relaxation_time: 1.0 / gap,
        residual,
        iterations,
        options: *opts,
    }
}

/// Gap of the edge-flip or block chain on `Ω_k` (`k <= 4`).
pub fn chain_gap(k: u32, kind: ChainKind, opts: &SolverOptions) -> Result<SpectralReport, Error> {
    let ladder = enumerate_ladder(k)?;
    chain_gap_from_ladder(&ladder, k, kind, opts)
}

/// As [`chain_gap`], reusing an enumerated ladder containing `Ω_k`.
pub fn chain_gap_from_ladder(
    ladder: &[TilingIndex],
    k: u32,
    kind: ChainKind,
    opts: &SolverOptions,
) -> Result<SpectralReport, Error> {
    let p = match kind {
        ChainKind::Edge => build_edge_matrix(&ladder[k as usize])?,
        ChainKind::Block => {
            if k < 2 {
                return Err(Error::TooSmall { what: "block chain gap", k, min: 2 });
            }
            build_block_matrix(&ladder[k as usize], &ladder[k as usize - 1])?
        }
    };
    let mut r = spectral_gap(&p, opts)?;
    r.k = Some(k);
    r.chain = Some(kind);
    Ok(r)
}

/// Real-valued function on an indexed state space.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction(pub Vec<f64>);

impl TestFunction {
    pub fn indicator(index: &TilingIndex, pred: impl Fn(&crate::Tiling) -> bool + Sync) -> Self {
        TestFunction(index.tilings().par_iter().map(|t| pred(t) as u8 as f64).collect())
    }

    pub fn exact(&self) -> Vec<BigRational> {
        self.0
            .iter()
            .map(|&x| BigRational::from_float(x).expect("finite test function"))
            .collect()
    }
}

/// `Σ π(x) (f(x) − E f)²` under the uniform distribution.
pub fn variance(f: &TestFunction) -> f64 {
    let n = f.0.len() as f64;
    let mean = sum(&f.0) / n;
    let centered: Vec<f64> = f.0.iter().map(|x| (x - mean) * (x - mean)).collect();
    sum(&centered) / n
}

/// `(1/2) Σ_{x,y} π(x)π(y)(f(x) − f(y))²`, quadratic in the state count.
pub fn variance_pairwise(f: &TestFunction) -> f64 {
    let v = &f.0;
    let n = v.len() as f64;
    let rows: Vec<f64> = v
        .par_iter()
        .map(|&a| v.iter().map(|&b| (a - b) * (a - b)).sum::<f64>())
        .collect();
    0.5 * sum(&rows) / (n * n)
}

/// `(1/2) Σ_{x≠y} π(x) P(x,y) (f(x) − f(y))²`.
pub fn dirichlet(p: &SparseSymmetricStochastic, f: &TestFunction) -> f64 {
    let v = &f.0;
    let rows: Vec<f64> = (0..p.dim())
        .into_par_iter()
        .map(|i| {
            p.row(i)
                .map(|(j, c)| c as f64 * (v[i] - v[j]) * (v[i] - v[j]))
                .sum::<f64>()
        })
        .collect();
    0.5 * sum(&rows) / (p.dim() as f64 * p.denominator() as f64)
}

pub fn variance_exact(f: &[BigRational]) -> BigRational {
    let n = BigInt::from(f.len());
    let mean = f.iter().fold(BigRational::zero(), |a, b| a + b) / n.clone();
    f.iter()
        .map(|x| {
            let d = x - &mean;
            &d * &d
        })
        .fold(BigRational::zero(), |a, b| a + b)
        / n
}

pub fn dirichlet_exact(p: &SparseSymmetricStochastic, f: &[BigRational]) -> BigRational {
    let total = (0..p.dim())
        .map(|i| {
            p.row(i).fold(BigRational::zero(), |acc, (j, c)| {
                let d = &f[i] - &f[j];
                acc + &d * &d * BigInt::from(c)
            })
        })
        .fold(BigRational::zero(), |a, b| a + b);
    total / (BigInt::from(2) * BigInt::from(p.dim()) * BigInt::from(p.denominator()))
}

/// `E(f) / var(f)`.
pub fn rayleigh_quotient(p: &SparseSymmetricStochastic, f: &TestFunction) -> Result<f64, Error> {
    let var = variance(f);
    if var <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(dirichlet(p, f) / var)
}

/// Slack allowed when comparing numerically computed gaps.
pub const GAP_SLACK: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct GapRecursionReport {
    pub k: u32,
    pub gap_k: f64,
    pub gap_k_minus_1: f64,
    pub gap_block: f64,
    pub product: f64,
    /// `gap_k / (gap_block · gap_k_minus_1)`.
    pub ratio: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Checks `γ_k ≥ γ_{k,block} · γ_{k−1}` numerically.
pub fn verify_gap_recursion(k: u32, opts: &SolverOptions) -> Result<GapRecursionReport, Error> {
    if k < 3 {
        return Err(Error::TooSmall { what: "gap recursion", k, min: 3 });
    }
    let ladder = enumerate_ladder(k)?;
    let gk = chain_gap_from_ladder(&ladder, k, ChainKind::Edge, opts)?.gap;
    let gk1 = chain_gap_from_ladder(&ladder, k - 1, ChainKind::Edge, opts)?.gap;
    let gb = chain_gap_from_ladder(&ladder, k, ChainKind::Block, opts)?.gap;
    let product = gb * gk1;
    Ok(GapRecursionReport {
        k,
        gap_k: gk,
        gap_k_minus_1: gk1,
        gap_block: gb,
        product,
        ratio: gk / product,
        slack: GAP_SLACK,
        holds: gk >= product - GAP_SLACK,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundReport {
    pub k: u32,
    pub gap: f64,
    #[serde(serialize_with = "crate::serde_util::ratio_string")]
    pub dirichlet: BigRational,
    #[serde(serialize_with = "crate::serde_util::ratio_string")]
    pub variance: BigRational,
    #[serde(serialize_with = "crate::serde_util::ratio_string")]
    pub rayleigh: BigRational,
    pub rayleigh_f64: f64,
    pub holds: bool,
}

/// Compares the edge-flip gap with the exact Rayleigh quotient of the
/// vertical-bisector indicator.
pub fn lower_bound_check(k: u32, opts: &SolverOptions) -> Result<LowerBoundReport, Error> {
    if k < 2 {
        return Err(Error::TooSmall { what: "lower-bound check", k, min: 2 });
    }
    let ladder = enumerate_ladder(k)?;
    let index = &ladder[k as usize];
    let p = build_edge_matrix(index)?;
    let gap = spectral_gap(&p, opts)?.gap;
    let f = TestFunction::indicator(index, |t| t.has_vertical_bisector()).exact();
    let dir = dirichlet_exact(&p, &f);
    let var = variance_exact(&f);
    let rq = &dir / &var;
    let rq_f = rq.to_f64().unwrap_or(f64::NAN);
    Ok(LowerBoundReport {
        k,
        gap,
        dirichlet: dir,
        variance: var,
        rayleigh: rq,
        rayleigh_f64: rq_f,
        holds: gap <= rq_f + GAP_SLACK,
    })
}
