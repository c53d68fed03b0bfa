//! Total-variation curves, mixing times, the relaxation/mixing sandwich,
//! and Monte-Carlo statistic distances.

use std::io::{self, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chains::{split_rng, Chain, ChainConfig, ChainKind, Statistic};
use crate::combinatorics::CountTable;
use crate::enumeration::{boundary_set, TilingIndex};
use crate::sparse::{sum, SparseSymmetricStochastic};
use crate::spectral::{chain_gap_from_ladder, SolverOptions};
use crate::tiling::Tiling;
use crate::Error;

/// Slack when comparing a computed distance with `ε`.
pub const TV_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct TVCurve {
    pub k: u32,
    pub chain: ChainKind,
    pub start: String,
    /// `(t, TV)` pairs for `t = 0..=t_max`.
    pub points: Vec<(u64, f64)>,
}

impl TVCurve {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,tv")?;
        for (t, v) in &self.points {
            writeln!(w, "{t},{v}")?;
        }
        Ok(())
    }
}

fn tv_to_uniform(mu: &[f64]) -> f64 {
    let u = 1.0 / mu.len() as f64;
    let dev: Vec<f64> = mu.iter().map(|m| (m - u).abs()).collect();
    0.5 * sum(&dev)
}

fn point_mass(n: usize, start: usize) -> Vec<f64> {
    let mut mu = vec![0.0; n];
    mu[start] = 1.0;
    mu
}

/// Distance to uniform of the law after `t` steps from `start`, for
/// `t = 0..=t_max`. `P` is symmetric, so `μP = Pμ`.
pub fn exact_tv_curve(
    p: &SparseSymmetricStochastic,
    index: &TilingIndex,
    kind: ChainKind,
    start: usize,
    t_max: u64,
) -> Result<TVCurve, Error> {
    if start >= p.dim() || p.dim() != index.len() {
        return Err(Error::InvalidArgument("start not in the state space".into()));
    }
    let mut mu = point_mass(p.dim(), start);
    let mut next = vec![0.0; p.dim()];
    let mut points = Vec::with_capacity(t_max as usize + 1);
    points.push((0, tv_to_uniform(&mu)));
    for t in 1..=t_max {
        p.matvec(&mu, &mut next);
        std::mem::swap(&mut mu, &mut next);
        points.push((t, tv_to_uniform(&mu)));
    }
    Ok(TVCurve {
        k: index.k(),
        chain: kind,
        start: index.encoding(start).to_string(),
        points,
    })
}

/// The same curve in exact rational arithmetic (small state spaces only).
pub fn exact_tv_curve_rational(
    p: &SparseSymmetricStochastic,
    start: usize,
    t_max: u64,
) -> Result<Vec<BigRational>, Error> {
    if p.dim() > 100 {
        return Err(Error::InvalidArgument("rational evolution is for small chains".into()));
    }
    let n = p.dim();
    let u = BigRational::new(BigInt::one(), BigInt::from(n));
    let mut mu: Vec<BigRational> = (0..n)
        .map(|i| if i == start { BigRational::one() } else { BigRational::zero() })
        .collect();
    let tv = |mu: &[BigRational]| {
        mu.iter()
            .map(|m| (m - &u).abs())
            .fold(BigRational::zero(), |a, b| a + b)
            / BigInt::from(2)
    };
    let mut out = vec![tv(&mu)];
    for _ in 0..t_max {
        mu = p.matvec_exact(&mu);
        out.push(tv(&mu));
    }
    Ok(out)
}

/// Starting states for a mixing-time computation.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StartSet {
    /// Every state: the true worst case.
    All,
    /// Boundary tilings, double-bisector tilings and seeded random states.
    /// Gives a lower bound on the worst case.
    Surrogate { random: usize, seed: u64 },
    Explicit { indices: Vec<usize> },
}

impl StartSet {
    pub fn resolve(&self, index: &TilingIndex) -> Result<Vec<usize>, Error> {
        let mut v = match self {
            StartSet::All => (0..index.len()).collect(),
            StartSet::Explicit { indices } => {
                if indices.iter().any(|&i| i >= index.len()) {
                    return Err(Error::InvalidArgument("start index out of range".into()));
                }
                indices.clone()
            }
            StartSet::Surrogate { random, seed } => {
                let mut v: Vec<usize> = boundary_set(index)?
                    .iter()
                    .map(|b| index.index_of(&b.tiling).expect("member of the index"))
                    .collect();
                v.extend(index.select(|t| t.has_vertical_bisector() && t.has_horizontal_bisector()));
                let mut rng = split_rng(*seed, 0);
                v.extend((0..*random).map(|_| rng.gen_range(0..index.len())));
                v
            }
        };
        v.sort_unstable();
        v.dedup();
        Ok(v)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MixingTime {
    pub k: u32,
    pub chain: ChainKind,
    pub epsilon: f64,
    pub starts: usize,
    pub worst_case: bool,
    pub t_mix: u64,
    /// Encoding of a start attaining `t_mix`.
    pub slowest_start: String,
}

/// First `t` with `TV_x(t) ≤ ε` for every start `x` in the set. Distance
/// to stationarity is nonincreasing in `t`, so this is the mixing time.
pub fn mixing_time(
    p: &SparseSymmetricStochastic,
    index: &TilingIndex,
    kind: ChainKind,
    starts: &StartSet,
    epsilon: f64,
    t_cap: u64,
) -> Result<MixingTime, Error> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument("ε must lie in (0, 1)".into()));
    }
    let list = starts.resolve(index)?;
    let n = p.dim();
    let times = list
        .par_iter()
        .map(|&s| {
            let mut mu = point_mass(n, s);
            let mut next = vec![0.0; n];
            let mut t = 0;
            while tv_to_uniform(&mu) > epsilon + TV_SLACK {
                if t == t_cap {
                    return Err(Error::NoConvergence {
                        iterations: t_cap as usize,
                        residual: tv_to_uniform(&mu),
                    });
                }
                mat_step(p, &mu, &mut next);
                std::mem::swap(&mut mu, &mut next);
                t += 1;
            }
            Ok((t, s))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let (t_mix, slow) = times
        .iter()
        .copied()
        .max_by_key(|&(t, s)| (t, std::cmp::Reverse(s)))
        .unwrap_or((0, 0));
    Ok(MixingTime {
        k: index.k(),
        chain: kind,
        epsilon,
        starts: list.len(),
        worst_case: matches!(starts, StartSet::All),
        t_mix,
        slowest_start: index.encoding(slow).to_string(),
    })
}

// Sequential product for use inside an outer parallel loop.
fn mat_step(p: &SparseSymmetricStochastic, x: &[f64], y: &mut [f64]) {
    let d = p.denominator() as f64;
    for (i, yi) in y.iter_mut().enumerate() {
        let mut acc = p.count(i, i) as f64 * x[i];
        for (j, c) in p.row(i) {
            acc += c as f64 * x[j];
        }
        *yi = acc / d;
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub k: u32,
    pub epsilon: f64,
    pub t_rel: f64,
    pub t_mix: u64,
    pub pi_min: f64,
    /// `(t_rel − 1)·ln(1/(2ε))`.
    pub lower: f64,
    /// `ln(1/(ε·π_min))·t_rel`.
    pub upper: f64,
    pub holds: bool,
    /// The same bounds with base-2 logarithms.
    pub lower_log2: f64,
    pub upper_log2: f64,
    pub holds_log2: bool,
    /// Upper bound with `1/π_min` replaced by `2^n`.
    pub loose_upper: f64,
    pub loose_holds: bool,
}

/// Checks the relaxation/mixing sandwich for the edge chain.
pub fn sandwich(
    ladder: &[TilingIndex],
    k: u32,
    epsilon: f64,
    opts: &SolverOptions,
) -> Result<SandwichReport, Error> {
    let index = &ladder[k as usize];
    let p = crate::chains::build_edge_matrix(index)?;
    let t_rel = chain_gap_from_ladder(ladder, k, ChainKind::Edge, opts)?.relaxation_time;
    let t_mix = mixing_time(&p, index, ChainKind::Edge, &StartSet::All, epsilon, 10_000_000)?.t_mix;
    sandwich_from(k, epsilon, t_rel, t_mix, index.len())
}

pub fn sandwich_from(k: u32, epsilon: f64, t_rel: f64, t_mix: u64, states: usize) -> Result<SandwichReport, Error> {
    let pi_min = 1.0 / states as f64;
    let n = (1u64 << k) as f64;
    let lower = (t_rel - 1.0) * (1.0 / (2.0 * epsilon)).ln();
    let upper = (1.0 / (epsilon * pi_min)).ln() * t_rel;
    let lower_log2 = (t_rel - 1.0) * (1.0 / (2.0 * epsilon)).log2();
    let upper_log2 = (1.0 / (epsilon * pi_min)).log2() * t_rel;
    let loose_upper = ((1.0 / epsilon).ln() + n * std::f64::consts::LN_2) * t_rel;
    let tm = t_mix as f64;
    Ok(SandwichReport {
        k,
        epsilon,
        t_rel,
        t_mix,
        pi_min,
        lower,
        upper,
        holds: lower <= tm && tm <= upper,
        lower_log2,
        upper_log2,
        holds_log2: lower_log2 <= tm && tm <= upper_log2,
        loose_upper,
        loose_holds: (states as f64) < n.exp2() && tm <= loose_upper,
    })
}

/// Stationary probability of a vertical bisector, `A_{k−1}²/A_k`.
pub fn vertical_stationary(k: u32) -> Result<BigRational, Error> {
    if k == 0 {
        return Ok(BigRational::zero());
    }
    let table = CountTable::up_to(k)?;
    let a = BigInt::from(table.count(k - 1).clone());
    Ok(BigRational::new(&a * &a, BigInt::from(table.count(k).clone())))
}

#[derive(Clone, Debug, Serialize)]
pub struct StatisticTV {
    pub k: u32,
    pub chain: ChainKind,
    pub t: u64,
    pub samples: u64,
    pub seed: u64,
    pub start: String,
    pub stationary: f64,
    pub empirical: f64,
    /// `|empirical − stationary|`, a lower bound on the full distance.
    pub tv: f64,
    /// Normal-approximation 95% half-width of the empirical frequency.
    pub ci_half_width: f64,
}

/// Samples per independently seeded batch.
pub const BATCH: u64 = 4096;

/// Monte-Carlo distance of the vertical-bisector statistic after `t` steps.
/// Batch `i` uses stream `i` of the master seed, so results do not depend
/// on the thread count.
pub fn statistic_tv_lower_bound(
    chain: &Chain,
    start: &Tiling,
    t: u64,
    samples: u64,
) -> Result<StatisticTV, Error> {
    let ChainConfig { k, kind, seed } = *chain.config();
    if k < 2 {
        return Err(Error::TooSmall { what: "statistic distance", k, min: 2 });
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let stationary = vertical_stationary(k)?.to_f64().unwrap_or(f64::NAN);
    let batches = samples.div_ceil(BATCH);
    let hits: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = split_rng(seed, b);
            let m = BATCH.min(samples - b * BATCH);
            let mut h = 0;
            for _ in 0..m {
                let mut cur = start.clone();
                for _ in 0..t {
                    if let Some(next) = chain.propose(&cur, &mut rng) {
                        cur = next;
                    }
                }
                h += Statistic::VerticalBisector.eval(&cur) as u64;
            }
            h
        })
        .sum();
    let emp = hits as f64 / samples as f64;
    Ok(StatisticTV {
        k,
        chain: kind,
        t,
        samples,
        seed,
        start: start.encode(),
        stationary,
        empirical: emp,
        tv: (emp - stationary).abs(),
        ci_half_width: 1.96 * (emp * (1.0 - emp) / samples as f64).sqrt(),
    })
}

/// Exact distance of the statistic's law from its stationary law after `t`.
pub fn statistic_tv_exact(
    p: &SparseSymmetricStochastic,
    index: &TilingIndex,
    start: usize,
    t: u64,
) -> Result<f64, Error> {
    let mut mu = point_mass(p.dim(), start);
    let mut next = vec![0.0; p.dim()];
    for _ in 0..t {
        p.matvec(&mu, &mut next);
        std::mem::swap(&mut mu, &mut next);
    }
    let mass: Vec<f64> = index
        .tilings()
        .iter()
        .zip(&mu)
        .map(|(x, m)| if x.has_vertical_bisector() { *m } else { 0.0 })
        .collect();
    let stationary = vertical_stationary(index.k())?.to_f64().unwrap_or(f64::NAN);
    Ok((sum(&mass) - stationary).abs())
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingRow {
    pub k: u32,
    pub n: u64,
    pub gap: f64,
    pub t_rel: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of `log t_rel` against `log n`.
    pub slope: f64,
    pub lower_exponent: f64,
    pub upper_exponent: f64,
    /// Whether the fitted slope lies between the two exponents.
    pub bracketed: bool,
}

/// Relaxation times of the edge chain for `k = 1..=k_max`. Diagnostic only.
pub fn scaling_report(ladder: &[TilingIndex], k_max: u32, opts: &SolverOptions) -> Result<ScalingReport, Error> {
    if k_max < 2 {
        return Err(Error::TooSmall { what: "scaling report", k: k_max, min: 2 });
    }
    let rows = (1..=k_max)
        .map(|k| {
            let r = chain_gap_from_ladder(ladder, k, ChainKind::Edge, opts)?;
            Ok(ScalingRow { k, n: 1 << k, gap: r.gap, t_rel: r.relaxation_time })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).log2()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.t_rel.log2()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = cov / var;
    let lower_exponent = 2.0 * crate::combinatorics::PHI.log2();
    let upper_exponent = 17f64.log2();
    Ok(ScalingReport {
        rows,
        slope,
        lower_exponent,
        upper_exponent,
        bracketed: (lower_exponent..=upper_exponent).contains(&slope),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::transition_matrix;
    use crate::enumeration::enumerate_ladder;

    #[test]
    fn two_state_curve() {
        let ladder = enumerate_ladder(1).unwrap();
        let p = transition_matrix(1, ChainKind::Edge).unwrap();
        let c = exact_tv_curve(&p, &ladder[1], ChainKind::Edge, 0, 20).unwrap();
        for &(t, v) in &c.points {
            assert!((v - 0.5 * 0.5f64.powi(t as i32)).abs() < 1e-15);
        }
        let exact = exact_tv_curve_rational(&p, 0, 5).unwrap();
        for (t, v) in exact.iter().enumerate() {
            assert_eq!(*v, BigRational::new(BigInt::one(), BigInt::from(2u64 << t)));
        }
        let m = mixing_time(&p, &ladder[1], ChainKind::Edge, &StartSet::All, 0.25, 100).unwrap();
        assert_eq!(m.t_mix, 1);
    }

    #[test]
    fn stationary_vertical() {
        assert_eq!(vertical_stationary(2).unwrap(), BigRational::new(4.into(), 7.into()));
    }
}
