//! Coupling of two block-dynamics copies under a shared move, the weighted
//! distance `d = b·ℓ₁ + ℓ₂`, and exact one-step contraction checks.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::combinatorics::CountTable;
use crate::enumeration::TilingIndex;
use crate::tiling::{Axis, HalfBisectorSet, Quadrant, Side, Tiling};
use crate::Error;

pub const DEFAULT_B: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DistanceParams {
    pub b: u64,
}

impl DistanceParams {
    pub fn new(b: u64) -> Result<Self, Error> {
        if b == 0 {
            return Err(Error::InvalidArgument("distance weight b must be at least 1".into()));
        }
        Ok(DistanceParams { b })
    }
}

impl Default for DistanceParams {
    fn default() -> Self {
        DistanceParams { b: DEFAULT_B }
    }
}

/// Two tilings of the same size with cached comparison data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoupledPair {
    x: Tiling,
    y: Tiling,
    hx: HalfBisectorSet,
    hy: HalfBisectorSet,
    equal: [bool; 4],
}

impl CoupledPair {
    pub fn new(x: Tiling, y: Tiling) -> Result<Self, Error> {
        if x.k() != y.k() {
            return Err(Error::InvalidArgument(format!(
                "pair sizes differ: k = {} and k = {}",
                x.k(),
                y.k()
            )));
        }
        if x.k() < 2 {
            return Err(Error::TooSmall { what: "coupled pair", k: x.k(), min: 2 });
        }
        Ok(Self::build(x, y))
    }

    fn build(x: Tiling, y: Tiling) -> Self {
        let equal = Quadrant::ALL.map(|q| Tiling::quadrant_equal(&x, &y, q));
        CoupledPair {
            hx: x.half_bisectors(),
            hy: y.half_bisectors(),
            x,
            y,
            equal,
        }
    }

    pub fn x(&self) -> &Tiling {
        &self.x
    }

    pub fn y(&self) -> &Tiling {
        &self.y
    }

    pub fn swapped(&self) -> Self {
        CoupledPair {
            x: self.y.clone(),
            y: self.x.clone(),
            hx: self.hy,
            hy: self.hx,
            equal: self.equal,
        }
    }

    pub fn quadrant_equal(&self, q: Quadrant) -> bool {
        self.equal[q as usize]
    }

    /// Half-bisectors present in exactly one of the two tilings.
    pub fn l1(&self) -> u32 {
        self.hx.symmetric_difference(self.hy).len()
    }

    /// Quadrants on which the two tilings differ.
    pub fn l2(&self) -> u32 {
        self.equal.iter().filter(|e| !**e).count() as u32
    }

    pub fn distance(&self, params: &DistanceParams) -> u64 {
        params.b * self.l1() as u64 + self.l2() as u64
    }

    /// Applies one shared move to both copies.
    pub fn apply(&self, half: Side, rho: &Tiling) -> Self {
        let x = self.x.retile(half, rho).unwrap_or_else(|| self.x.clone());
        let y = self.y.retile(half, rho).unwrap_or_else(|| self.y.clone());
        Self::build(x, y)
    }

    /// One coupled step: `ρ` and then the half are drawn exactly as in a
    /// single block step, and both copies use the same draw.
    pub fn coupled_step<R: Rng + ?Sized>(&self, halves: &TilingIndex, rng: &mut R) -> Self {
        let rho = halves.tiling(rng.gen_range(0..halves.len()));
        let half = Side::ALL[rng.gen_range(0..4)];
        self.apply(half, rho)
    }
}

/// Exact `E[d(x′, y′)]` over all `4·|Ω_{k−1}|` equally likely moves.
pub fn expected_distance_after_step(
    pair: &CoupledPair,
    halves: &TilingIndex,
    params: &DistanceParams,
) -> Result<BigRational, Error> {
    let k = pair.x.k();
    if halves.k() + 1 != k {
        return Err(Error::InvalidArgument("halves must index Ω_{k-1}".into()));
    }
    if k > crate::enumeration::MAX_MATERIALIZED_K {
        return Err(Error::SizeGuard {
            what: "exact expected distance",
            k,
            max: crate::enumeration::MAX_MATERIALIZED_K,
        });
    }
    let d0 = pair.distance(params);
    let mut total: u64 = 0;
    for half in Side::ALL {
        let axis = half.axis();
        if !pair.x.has_bisector(axis) && !pair.y.has_bisector(axis) {
            total += d0 * halves.len() as u64;
            continue;
        }
        for rho in halves.tilings() {
            total += pair.apply(half, rho).distance(params);
        }
    }
    Ok(BigRational::new(
        BigInt::from(total),
        BigInt::from(4 * halves.len() as u64),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Case2Config {
    /// Neither copy has an extra half-bisector.
    Neither,
    /// Exactly one copy has one.
    OneSided,
    /// Both have the same extra half-bisector.
    Same,
    /// Both have one, on opposite halves.
    Different,
}

/// Case of an unequal pair. `i` counts equal quadrants where it matters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CaseLabel {
    OneA,
    OneB,
    OneC { i: u32 },
    Two { config: Case2Config, i: u32 },
    ThreeA,
    ThreeB { i: u32 },
    ThreeC,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseLabel::OneA => write!(f, "1a"),
            CaseLabel::OneB => write!(f, "1b"),
            CaseLabel::OneC { i } => write!(f, "1c(i={i})"),
            CaseLabel::Two { config, i } => {
                let c = match config {
                    Case2Config::Neither => "neither",
                    Case2Config::OneSided => "one",
                    Case2Config::Same => "same",
                    Case2Config::Different => "different",
                };
                write!(f, "2[{c}](i={i})")
            }
            CaseLabel::ThreeA => write!(f, "3a"),
            CaseLabel::ThreeB { i } => write!(f, "3b(i={i})"),
            CaseLabel::ThreeC => write!(f, "3c"),
        }
    }
}

impl Serialize for CaseLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn has_both(h: HalfBisectorSet) -> bool {
    h.has_vertical_bisector() && h.has_horizontal_bisector()
}

/// Case of an unequal pair, after the symmetry reductions of the argument.
pub fn classify_case(pair: &CoupledPair) -> Result<CaseLabel, Error> {
    if pair.x == pair.y {
        return Err(Error::InvalidArgument("classification needs x != y".into()));
    }
    let (hx, hy) = (pair.hx, pair.hy);
    let equal_count = 4 - pair.l2();
    if has_both(hx) || has_both(hy) {
        // arrange for y to have both bisectors
        let hx = if has_both(hy) { hx } else { hy };
        return Ok(match hx.len() {
            2 => CaseLabel::ThreeA,
            3 => CaseLabel::ThreeB { i: equal_count },
            _ => CaseLabel::ThreeC,
        });
    }
    let common_axis = [Axis::Vertical, Axis::Horizontal].into_iter().find(|&a| {
        let has = |h: HalfBisectorSet| match a {
            Axis::Vertical => h.has_vertical_bisector(),
            Axis::Horizontal => h.has_horizontal_bisector(),
        };
        has(hx) && has(hy)
    });
    if let Some(axis) = common_axis {
        let extras: Vec<Side> = Side::ALL.into_iter().filter(|s| s.axis() == axis).collect();
        let ex = |h: HalfBisectorSet| extras.iter().copied().find(|&s| h.contains(s));
        let config = match (ex(hx), ex(hy)) {
            (None, None) => Case2Config::Neither,
            (Some(_), None) | (None, Some(_)) => Case2Config::OneSided,
            (Some(a), Some(b)) if a == b => Case2Config::Same,
            _ => Case2Config::Different,
        };
        return Ok(CaseLabel::Two { config, i: equal_count });
    }
    Ok(match hx.intersection(hy).len() {
        0 => CaseLabel::OneA,
        1 => CaseLabel::OneB,
        _ => CaseLabel::OneC { i: equal_count },
    })
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Upper bound on `E[d′]` from the argument for this case, with `f = f_k`.
/// The Case 1a, 2 and 3c expressions are exact in the argument; the rest
/// are upper bounds.
pub fn case_bound(label: CaseLabel, d: u64, b: u64, f: &BigRational) -> BigRational {
    let d = BigRational::from_integer(BigInt::from(d));
    let b = BigRational::from_integer(BigInt::from(b));
    let one = q(1, 1);
    let g = &one - f;
    match label {
        CaseLabel::OneA => &d - f * &b,
        CaseLabel::OneB => &d - q(3, 4) * f * &b + q(1, 4) * &g * &b,
        CaseLabel::OneC { i } => {
            &d - q(2, 4) * f * &b + q(2, 4) * &g * &b + q(2 * i as i64, 4)
        }
        CaseLabel::Two { .. } => q(3, 4) * &d,
        CaseLabel::ThreeA => &d - q(2, 4) * (&b + q(2, 1)) + q(2, 4) * &g * &b,
        CaseLabel::ThreeB { i } => {
            &d - (&b + q(4 - i as i64, 1)) * q(1, 4) + q(2, 4) * &g * &b + q(2, 4)
        }
        CaseLabel::ThreeC => q(1, 2) * &d,
    }
}

/// Cases whose bound is stated as an identity in the argument.
pub fn bound_is_identity(label: CaseLabel) -> bool {
    matches!(label, CaseLabel::OneA)
}

/// Target contraction factor `1 − 1/17`.
pub fn target_ratio() -> BigRational {
    q(16, 17)
}

fn ratio_string<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", v.numer(), v.denom()))
}

#[derive(Clone, Debug, Serialize)]
pub struct PairOutcome {
    pub label: CaseLabel,
    pub distance: u64,
    #[serde(serialize_with = "ratio_string")]
    pub expected: BigRational,
    #[serde(serialize_with = "ratio_string")]
    pub bound: BigRational,
}

impl PairOutcome {
    pub fn ratio(&self) -> BigRational {
        &self.expected / BigRational::from_integer(BigInt::from(self.distance))
    }

    pub fn bound_ratio(&self) -> BigRational {
        &self.bound / BigRational::from_integer(BigInt::from(self.distance))
    }
}

pub fn evaluate_pair(
    pair: &CoupledPair,
    halves: &TilingIndex,
    params: &DistanceParams,
    f: &BigRational,
) -> Result<PairOutcome, Error> {
    let label = classify_case(pair)?;
    let distance = pair.distance(params);
    let expected = expected_distance_after_step(pair, halves, params)?;
    let bound = case_bound(label, distance, params.b, f);
    Ok(PairOutcome { label, distance, expected, bound })
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseSummary {
    pub label: CaseLabel,
    pub pairs: u64,
    #[serde(serialize_with = "ratio_string")]
    pub max_ratio: BigRational,
    pub max_ratio_f64: f64,
    /// Largest `bound/d` over the pairs of this case.
    #[serde(serialize_with = "ratio_string")]
    pub max_bound_ratio: BigRational,
    pub bound_violations: u64,
    pub identity_violations: u64,
    /// Whether the case bound alone gives a ratio of at most `16/17`.
    pub bound_implies_target: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SurveyReport {
    pub k: u32,
    pub params: DistanceParams,
    pub seed: Option<u64>,
    pub exhaustive: bool,
    pub pairs: u64,
    #[serde(serialize_with = "ratio_string")]
    pub f_k: BigRational,
    pub cases: Vec<CaseSummary>,
    #[serde(serialize_with = "ratio_string")]
    pub max_ratio: BigRational,
    pub max_ratio_f64: f64,
    #[serde(serialize_with = "ratio_string")]
    pub target: BigRational,
    /// Every case bound dominates the exact expectation.
    pub bounds_hold: bool,
    /// Every observed case's bound implies the target contraction.
    pub bounds_imply_target: bool,
    /// Observed `max E[d′]/d ≤ 16/17`.
    pub target_observed: bool,
    /// `1 − max E[d′]/d`, the empirical contraction.
    pub observed_delta_f64: f64,
}

fn summarize(k: u32, params: DistanceParams, seed: Option<u64>, exhaustive: bool, f: BigRational, outcomes: Vec<PairOutcome>) -> SurveyReport {
    let target = target_ratio();
    let mut by_case: BTreeMap<CaseLabel, CaseSummary> = BTreeMap::new();
    let mut max_ratio = BigRational::zero();
    for o in &outcomes {
        let r = o.ratio();
        let br = o.bound_ratio();
        let entry = by_case.entry(o.label).or_insert_with(|| CaseSummary {
            label: o.label,
            pairs: 0,
            max_ratio: BigRational::zero(),
            max_ratio_f64: 0.0,
            max_bound_ratio: BigRational::zero(),
            bound_violations: 0,
            identity_violations: 0,
            bound_implies_target: true,
        });
        entry.pairs += 1;
        if o.expected > o.bound {
            entry.bound_violations += 1;
        }
        if bound_is_identity(o.label) && o.expected != o.bound {
            entry.identity_violations += 1;
        }
        if br > entry.max_bound_ratio {
            entry.max_bound_ratio = br;
        }
        if r > entry.max_ratio {
            entry.max_ratio = r.clone();
        }
        if r > max_ratio {
            max_ratio = r;
        }
    }
    let cases: Vec<CaseSummary> = by_case
        .into_values()
        .map(|mut c| {
            c.max_ratio_f64 = c.max_ratio.to_f64().unwrap_or(f64::NAN);
            c.bound_implies_target = c.max_bound_ratio <= target;
            c
        })
        .collect();
    let max_f = max_ratio.to_f64().unwrap_or(f64::NAN);
    SurveyReport {
        k,
        params,
        seed,
        exhaustive,
        pairs: outcomes.len() as u64,
        f_k: f,
        bounds_hold: cases.iter().all(|c| c.bound_violations == 0 && c.identity_violations == 0),
        bounds_imply_target: cases.iter().all(|c| c.bound_implies_target),
        target_observed: max_ratio <= target,
        observed_delta_f64: 1.0 - max_f,
        cases,
        max_ratio,
        max_ratio_f64: max_f,
        target,
    }
}

/// Largest `k` with an exhaustive survey over all pairs.
pub const MAX_EXHAUSTIVE_SURVEY_K: u32 = 3;

/// Exact contraction survey. Exhaustive over unordered pairs for `k <= 3`;
/// `sample_size` uniformly drawn distinct pairs for `k = 4`.
pub fn contraction_survey<R: Rng + ?Sized>(
    index: &TilingIndex,
    halves: &TilingIndex,
    params: &DistanceParams,
    sample_size: usize,
    seed: Option<u64>,
    rng: &mut R,
) -> Result<SurveyReport, Error> {
    let k = index.k();
    if k < 2 {
        return Err(Error::TooSmall { what: "contraction survey", k, min: 2 });
    }
    if k > crate::enumeration::MAX_MATERIALIZED_K {
        return Err(Error::SizeGuard {
            what: "contraction survey",
            k,
            max: crate::enumeration::MAX_MATERIALIZED_K,
        });
    }
    let f = CountTable::up_to(k)?.half_bisector_fraction(k);
    let n = index.len();
    let exhaustive = k <= MAX_EXHAUSTIVE_SURVEY_K;
    let pairs: Vec<(usize, usize)> = if exhaustive {
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
    } else {
        (0..sample_size)
            .map(|_| loop {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                if i != j {
                    break (i, j);
                }
            })
            .collect()
    };
    let outcomes = pairs
        .par_iter()
        .map(|&(i, j)| {
            let pair = CoupledPair::build(index.tiling(i).clone(), index.tiling(j).clone());
            evaluate_pair(&pair, halves, params, &f)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(summarize(k, *params, seed, exhaustive, f, outcomes))
}

/// Draws `count` pairs whose case satisfies `want`, by rejection from
/// uniform pairs. Gives up after `max_draws` draws.
pub fn sample_pairs_in_case<R: Rng + ?Sized>(
    index: &TilingIndex,
    want: impl Fn(CaseLabel) -> bool,
    count: usize,
    max_draws: usize,
    rng: &mut R,
) -> Result<Vec<CoupledPair>, Error> {
    let n = index.len();
    let mut out = Vec::with_capacity(count);
    for _ in 0..max_draws {
        if out.len() == count {
            break;
        }
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i == j {
            continue;
        }
        let pair = CoupledPair::build(index.tiling(i).clone(), index.tiling(j).clone());
        if want(classify_case(&pair)?) {
            out.push(pair);
        }
    }
    if out.len() < count {
        return Err(Error::Invariant(format!(
            "found only {} of {count} pairs in {max_draws} draws",
            out.len()
        )));
    }
    Ok(out)
}
