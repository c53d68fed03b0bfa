//! The edge-flip chain and the block-dynamics chain: single steps,
//! trajectories, and exact transition matrices.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumeration::{enumerate_ladder, TilingIndex, MAX_MATERIALIZED_K};
use crate::sparse::SparseSymmetricStochastic;
use crate::tiling::{Side, Tiling};
use crate::Error;

/// Generator behind every random choice in the crate.
pub type ChainRng = ChaCha8Rng;

/// Human-readable identity of [`ChainRng`] and the seeding rule.
pub const RNG_IDENTITY: &str = "ChaCha8 (rand_chacha 0.3), seed_from_u64(seed), stream i for worker i";

pub fn rng_from_seed(seed: u64) -> ChainRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for worker `stream` under a master seed.
pub fn split_rng(seed: u64, stream: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainKind {
    Edge,
    Block,
}

impl std::fmt::Display for ChainKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChainKind::Edge => "edge",
            ChainKind::Block => "block",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub k: u32,
    pub kind: ChainKind,
    pub seed: u64,
}

/// One edge-flip proposal: a uniform rectangle, then a uniform side.
/// Returns the new tiling, or `None` when the selection is rejected.
pub fn edge_flip_move<R: Rng + ?Sized>(t: &Tiling, rng: &mut R) -> Option<Tiling> {
    let i = rng.gen_range(0..t.size());
    let side = Side::ALL[rng.gen_range(0..4)];
    t.edge_flip(i, side)
}

pub fn edge_flip_step<R: Rng + ?Sized>(t: &Tiling, rng: &mut R) -> Tiling {
    edge_flip_move(t, rng).unwrap_or_else(|| t.clone())
}

/// One block proposal: a uniform `ρ` from `Ω_{k-1}`, then a uniform half.
pub fn block_move<R: Rng + ?Sized>(t: &Tiling, halves: &TilingIndex, rng: &mut R) -> Option<Tiling> {
    let rho = halves.tiling(rng.gen_range(0..halves.len()));
    let half = Side::ALL[rng.gen_range(0..4)];
    t.retile(half, rho)
}

pub fn block_step<R: Rng + ?Sized>(t: &Tiling, halves: &TilingIndex, rng: &mut R) -> Tiling {
    block_move(t, halves, rng).unwrap_or_else(|| t.clone())
}

/// Exact edge-flip transition matrix over an enumerated `Ω_k`.
pub fn build_edge_matrix(index: &TilingIndex) -> Result<SparseSymmetricStochastic, Error> {
    let k = index.k();
    if k == 0 {
        return Err(Error::TooSmall { what: "edge-flip chain", k, min: 1 });
    }
    let n = 1u64 << k;
    let rows = index
        .tilings()
        .par_iter()
        .map(|t| {
            let mut row = Vec::new();
            for i in 0..t.size() {
                for side in Side::ALL {
                    if let Some(u) = t.edge_flip(i, side) {
                        let j = index.index_of(&u).expect("flip stays in the state space");
                        row.push((j as u32, 1u64));
                    }
                }
            }
            row
        })
        .collect();
    SparseSymmetricStochastic::from_rows(4 * n, rows)
}

/// Exact block transition matrix. `halves` must index `Ω_{k-1}`.
pub fn build_block_matrix(
    index: &TilingIndex,
    halves: &TilingIndex,
) -> Result<SparseSymmetricStochastic, Error> {
    let k = index.k();
    if k == 0 {
        return Err(Error::TooSmall { what: "block chain", k, min: 1 });
    }
    if halves.k() + 1 != k {
        return Err(Error::InvalidArgument(format!(
            "block chain on Ω_{k} needs Ω_{} for the halves",
            k - 1
        )));
    }
    let rows = index
        .tilings()
        .par_iter()
        .map(|t| {
            let mut row = Vec::new();
            for half in Side::ALL {
                if !t.has_bisector(half.axis()) {
                    continue;
                }
                for rho in halves.tilings() {
                    let u = t.retile(half, rho).expect("bisector present");
                    if &u != t {
                        let j = index.index_of(&u).expect("retiling stays in the state space");
                        row.push((j as u32, 1u64));
                    }
                }
            }
            row
        })
        .collect();
    SparseSymmetricStochastic::from_rows(4 * halves.len() as u64, rows)
}

/// Transition matrix of either chain for `k <= 4`.
pub fn transition_matrix(k: u32, kind: ChainKind) -> Result<SparseSymmetricStochastic, Error> {
    let ladder = enumerate_ladder(k)?;
    match kind {
        ChainKind::Edge => build_edge_matrix(&ladder[k as usize]),
        ChainKind::Block => {
            if k == 0 {
                return Err(Error::TooSmall { what: "block chain", k, min: 1 });
            }
            build_block_matrix(&ladder[k as usize], &ladder[k as usize - 1])
        }
    }
}

/// Observable recorded along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    VerticalBisector,
    HorizontalBisector,
    BothBisectors,
    HalfBisectorCount,
}

impl Statistic {
    pub fn eval(self, t: &Tiling) -> f64 {
        if t.k() == 0 {
            return 0.0;
        }
        match self {
            Statistic::VerticalBisector => t.has_vertical_bisector() as u8 as f64,
            Statistic::HorizontalBisector => t.has_horizontal_bisector() as u8 as f64,
            Statistic::BothBisectors => {
                (t.has_vertical_bisector() && t.has_horizontal_bisector()) as u8 as f64
            }
            Statistic::HalfBisectorCount => t.half_bisectors().len() as f64,
        }
    }
}

/// A runnable chain: configuration plus the `Ω_{k-1}` index the block
/// chain draws from.
#[derive(Clone, Debug)]
pub struct Chain {
    config: ChainConfig,
    halves: Option<TilingIndex>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub start: Tiling,
    pub end: Tiling,
    pub steps: u64,
    pub accepted: u64,
    /// `(step, value)` samples; step 0 is the start.
    pub trace: Vec<(u64, f64)>,
}

impl Trajectory {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "step,value")?;
        for (s, v) in &self.trace {
            writeln!(w, "{s},{v}")?;
        }
        Ok(())
    }
}

impl Chain {
    pub fn new(config: ChainConfig) -> Result<Self, Error> {
        let halves = match config.kind {
            ChainKind::Edge => None,
            ChainKind::Block => {
                if config.k == 0 {
                    return Err(Error::TooSmall { what: "block chain", k: 0, min: 1 });
                }
                if config.k > MAX_MATERIALIZED_K + 1 {
                    return Err(Error::SizeGuard {
                        what: "block chain",
                        k: config.k,
                        max: MAX_MATERIALIZED_K + 1,
                    });
                }
                Some(enumerate_ladder(config.k - 1)?.pop().expect("non-empty"))
            }
        };
        if config.kind == ChainKind::Edge && config.k == 0 {
            return Err(Error::TooSmall { what: "edge-flip chain", k: 0, min: 1 });
        }
        Ok(Chain { config, halves })
    }

    /// Builds with an already enumerated `Ω_{k-1}`.
    pub fn with_halves(config: ChainConfig, halves: TilingIndex) -> Result<Self, Error> {
        if config.k == 0 || halves.k() + 1 != config.k {
            return Err(Error::InvalidArgument("halves must index Ω_{k-1}".into()));
        }
        Ok(Chain { config, halves: Some(halves) })
    }

    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn rng(&self) -> ChainRng {
        rng_from_seed(self.config.seed)
    }

    pub fn propose<R: Rng + ?Sized>(&self, t: &Tiling, rng: &mut R) -> Option<Tiling> {
        match &self.halves {
            None => edge_flip_move(t, rng),
            Some(h) => block_move(t, h, rng),
        }
    }

    pub fn step<R: Rng + ?Sized>(&self, t: &Tiling, rng: &mut R) -> Tiling {
        self.propose(t, rng).unwrap_or_else(|| t.clone())
    }

    /// Runs `steps` steps, recording `stat` every `every` steps.
    pub fn run<R: Rng + ?Sized>(
        &self,
        start: &Tiling,
        steps: u64,
        stat: Option<(Statistic, u64)>,
        rng: &mut R,
    ) -> Result<Trajectory, Error> {
        if start.k() != self.config.k {
            return Err(Error::InvalidArgument(format!(
                "start has k = {}, chain has k = {}",
                start.k(),
                self.config.k
            )));
        }
        let mut trace = Vec::new();
        let mut cur = start.clone();
        let mut accepted = 0;
        if let Some((s, _)) = stat {
            trace.push((0, s.eval(&cur)));
        }
        for step in 1..=steps {
            if let Some(next) = self.propose(&cur, rng) {
                if next != cur {
                    accepted += 1;
                }
                cur = next;
            }
            if let Some((s, every)) = stat {
                if step % every.max(1) == 0 {
                    trace.push((step, s.eval(&cur)));
                }
            }
        }
        Ok(Trajectory {
            start: start.clone(),
            end: cur,
            steps,
            accepted,
            trace,
        })
    }
}
