//! Exhaustive generation of `Ω_k`, the edge-flip graph, and the
//! distinguished subsets used by the lower-bound argument.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;
use std::io::{self, Write};

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::tiling::{Axis, Side, Tiling};
use crate::Error;

/// Largest `k` for which `Ω_k` is materialized.
pub const MAX_MATERIALIZED_K: u32 = 4;
/// Largest `k` for which the streaming count runs.
pub const MAX_STREAMING_K: u32 = 5;

/// Dense indexing of `Ω_k`, ordered lexicographically by canonical encoding.
#[derive(Clone, Debug)]
pub struct TilingIndex {
    k: u32,
    tilings: Vec<Tiling>,
    encodings: Vec<String>,
    lookup: HashMap<Tiling, usize>,
}

impl TilingIndex {
    fn from_unsorted(k: u32, tilings: Vec<Tiling>) -> Self {
        let mut pairs: Vec<(String, Tiling)> =
            tilings.into_par_iter().map(|t| (t.encode(), t)).collect();
        pairs.par_sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let (encodings, tilings): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let lookup = tilings
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        TilingIndex {
            k,
            tilings,
            encodings,
            lookup,
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.tilings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tilings.is_empty()
    }

    pub fn tiling(&self, i: usize) -> &Tiling {
        &self.tilings[i]
    }

    pub fn tilings(&self) -> &[Tiling] {
        &self.tilings
    }

    pub fn encoding(&self, i: usize) -> &str {
        &self.encodings[i]
    }

    pub fn encodings(&self) -> &[String] {
        &self.encodings
    }

    pub fn index_of(&self, t: &Tiling) -> Option<usize> {
        self.lookup.get(t).copied()
    }

    pub fn index_of_encoding(&self, enc: &str) -> Option<usize> {
        self.encodings
            .binary_search_by(|e| e.as_str().cmp(enc))
            .ok()
    }

    /// Writes one canonical encoding per line.
    pub fn write_encodings<W: Write>(&self, mut w: W) -> io::Result<()> {
        for e in &self.encodings {
            writeln!(w, "{e}")?;
        }
        Ok(())
    }

    /// Indices of tilings satisfying a predicate, in index order.
    pub fn select(&self, pred: impl Fn(&Tiling) -> bool + Sync) -> Vec<usize> {
        (0..self.len())
            .into_par_iter()
            .filter(|&i| pred(&self.tilings[i]))
            .collect()
    }
}

fn next_level(prev: &[Tiling]) -> Vec<Tiling> {
    let joined: Vec<Vec<Tiling>> = prev
        .par_iter()
        .map(|a| {
            let mut out = Vec::with_capacity(2 * prev.len());
            for b in prev {
                out.push(Tiling::join(a, b, Axis::Vertical).expect("equal sizes"));
                out.push(Tiling::join(a, b, Axis::Horizontal).expect("equal sizes"));
            }
            out
        })
        .collect();
    let mut seen = HashSet::with_capacity(2 * prev.len() * prev.len());
    let mut level = Vec::new();
    for t in joined.into_iter().flatten() {
        if seen.insert(t.clone()) {
            level.push(t);
        }
    }
    level
}

/// Indices of `Ω_0 ..= Ω_k_max`.
pub fn enumerate_ladder(k_max: u32) -> Result<Vec<TilingIndex>, Error> {
    if k_max > MAX_MATERIALIZED_K {
        return Err(Error::SizeGuard {
            what: "materialized enumeration",
            k: k_max,
            max: MAX_MATERIALIZED_K,
        });
    }
    let mut ladder = vec![TilingIndex::from_unsorted(0, vec![Tiling::unit()])];
    for k in 1..=k_max {
        let level = next_level(ladder[k as usize - 1].tilings());
        ladder.push(TilingIndex::from_unsorted(k, level));
    }
    Ok(ladder)
}

/// All tilings of size `2^k`, each exactly once.
pub fn enumerate(k: u32) -> Result<TilingIndex, Error> {
    Ok(enumerate_ladder(k)?.pop().expect("non-empty ladder"))
}

/// Counts `Ω_k` without materializing it: every tiling is a vertical join of
/// two halves, or a horizontal join whose halves do not both have vertical
/// bisectors (otherwise its canonical root is vertical).
pub fn count_streaming(k: u32) -> Result<BigUint, Error> {
    if k > MAX_STREAMING_K {
        return Err(Error::SizeGuard {
            what: "streaming count",
            k,
            max: MAX_STREAMING_K,
        });
    }
    if k == 0 {
        return Ok(BigUint::from(1u32));
    }
    let prev = enumerate(k - 1)?;
    let vertical: Vec<bool> = prev
        .tilings()
        .par_iter()
        .map(|t| t.k() > 0 && t.has_vertical_bisector())
        .collect();
    let total: u64 = vertical
        .par_iter()
        .map(|&va| {
            let mut c = 0u64;
            for &vb in &vertical {
                c += 1; // vertical join
                if !(va && vb) {
                    c += 1; // horizontal join with horizontal canonical root
                }
            }
            c
        })
        .sum();
    Ok(BigUint::from(total))
}

/// Distinct single edge flips from `t`, each with the number of
/// (rectangle, side) selections that produce it.
pub fn neighbors(t: &Tiling) -> Vec<(Tiling, u32)> {
    let mut out: Vec<(Tiling, u32)> = Vec::new();
    for i in 0..t.size() {
        for side in Side::ALL {
            if let Some(u) = t.edge_flip(i, side) {
                match out.iter_mut().find(|(v, _)| *v == u) {
                    Some(entry) => entry.1 += 1,
                    None => out.push((u, 1)),
                }
            }
        }
    }
    out
}

/// Undirected edge-flip graph over a [`TilingIndex`].
#[derive(Clone, Debug)]
pub struct FlipGraph {
    k: u32,
    adjacency: Vec<Vec<(u32, u32)>>,
}

impl FlipGraph {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// `(neighbor, multiplicity)` pairs, sorted by neighbor.
    pub fn adjacent(&self, v: usize) -> &[(u32, u32)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.adjacency.iter().enumerate().all(|(v, adj)| {
            adj.iter().all(|&(u, m)| {
                self.adjacency[u as usize]
                    .binary_search_by_key(&(v as u32), |e| e.0)
                    .map(|pos| self.adjacency[u as usize][pos].1 == m)
                    .unwrap_or(false)
            })
        })
    }

    fn distances_from(&self, src: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.adjacency.len()];
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(v) = queue.pop_front() {
            for &(u, _) in &self.adjacency[v] {
                let u = u as usize;
                if dist[u] == u32::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.adjacency.is_empty() || self.distances_from(0).iter().all(|&d| d != u32::MAX)
    }

    /// Edge list, one `i j multiplicity` line per edge with `i < j`.
    pub fn edge_list(&self) -> String {
        let mut s = String::new();
        for (v, adj) in self.adjacency.iter().enumerate() {
            for &(u, m) in adj {
                if (v as u32) < u {
                    let _ = writeln!(s, "{v} {u} {m}");
                }
            }
        }
        s
    }
}

/// Builds the flip graph of an enumerated state space.
pub fn flip_graph(index: &TilingIndex) -> Result<FlipGraph, Error> {
    let k = index.k();
    if k == 0 {
        return Err(Error::TooSmall {
            what: "flip graph",
            k,
            min: 1,
        });
    }
    let adjacency = index
        .tilings()
        .par_iter()
        .map(|t| {
            let mut adj: Vec<(u32, u32)> = neighbors(t)
                .into_iter()
                .map(|(u, m)| {
                    let j = index
                        .index_of(&u)
                        .expect("edge flips stay inside the state space");
                    (j as u32, m)
                })
                .collect();
            adj.sort_unstable();
            adj
        })
        .collect();
    Ok(FlipGraph { k, adjacency })
}

/// Exact diameter by breadth-first search from every vertex.
pub fn diameter(g: &FlipGraph) -> Result<u32, Error> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    Ok((0..g.vertex_count())
        .into_par_iter()
        .map(|v| *g.distances_from(v).iter().max().unwrap_or(&0))
        .max()
        .unwrap_or(0))
}

/// A tiling one edge flip away from having a vertical bisector.
#[derive(Clone, Debug)]
pub struct BoundaryTiling {
    pub tiling: Tiling,
    /// The unique neighbor with a vertical bisector.
    pub partner: Tiling,
    /// Selections `(rectangle index, side)` realizing the pivotal flip.
    pub pivotal: Vec<(usize, Side)>,
}

impl BoundaryTiling {
    /// The pivotal edge is a horizontal edge of length 1 whose flip yields a
    /// vertical edge of length `2/n` on the line `x = 1/2`.
    pub fn pivotal_edge_is_full_width(&self) -> bool {
        let rects = self.tiling.rectangles();
        self.pivotal.iter().all(|&(i, side)| {
            let r = rects[i];
            matches!(side, Side::Top | Side::Bottom)
                && r.x.scale() == 0
                && r.y.scale() == self.tiling.k()
        }) && {
            // The partner gains two rectangles of width 1/2 and height 2/n.
            let k = self.tiling.k();
            self.partner
                .rectangles()
                .iter()
                .filter(|r| r.x.scale() == 1 && r.y.scale() + 1 == k)
                .count()
                >= 2
        }
    }
}

/// Tilings without a vertical bisector that have a flip neighbor with one.
/// Errors if some member has more than one such neighbor.
pub fn boundary_set(index: &TilingIndex) -> Result<Vec<BoundaryTiling>, Error> {
    let k = index.k();
    if k < 2 {
        return Err(Error::TooSmall {
            what: "boundary set",
            k,
            min: 2,
        });
    }
    let found: Vec<Option<Result<BoundaryTiling, Error>>> = index
        .tilings()
        .par_iter()
        .map(|t| {
            if t.has_vertical_bisector() {
                return None;
            }
            let mut partners: Vec<Tiling> = Vec::new();
            let mut pivotal = Vec::new();
            for i in 0..t.size() {
                for side in Side::ALL {
                    if let Some(u) = t.edge_flip(i, side) {
                        if u.has_vertical_bisector() {
                            pivotal.push((i, side));
                            if !partners.contains(&u) {
                                partners.push(u);
                            }
                        }
                    }
                }
            }
            match partners.len() {
                0 => None,
                1 => Some(Ok(BoundaryTiling {
                    tiling: t.clone(),
                    partner: partners.pop().expect("one partner"),
                    pivotal,
                })),
                m => Some(Err(Error::Invariant(format!(
                    "{t} has {m} flips into a vertical bisector"
                )))),
            }
        })
        .collect();
    found.into_iter().flatten().collect()
}

/// Tilings of size `2^level` built by the quadrant construction: both
/// bisectors, left quadrants free, top-right quadrant vertically bisected
/// with free halves, recursion in the bottom-right quadrant. A region of
/// two cells gets a horizontal bisector only.
fn upsilon_region(level: u32, ladder: &[TilingIndex]) -> Vec<Tiling> {
    match level {
        0 => vec![Tiling::unit()],
        1 => vec![Tiling::horizontal_strips(1)],
        _ => {
            let quarter = ladder[level as usize - 2].tilings();
            let top_right: Vec<Tiling> = if level >= 3 {
                let eighth = ladder[level as usize - 3].tilings();
                eighth
                    .iter()
                    .flat_map(|a| {
                        eighth
                            .iter()
                            .map(move |b| Tiling::join(a, b, Axis::Vertical).expect("equal sizes"))
                    })
                    .collect()
            } else {
                vec![Tiling::unit()]
            };
            let bottom_right = upsilon_region(level - 2, ladder);
            let mut out = Vec::new();
            for bl in quarter {
                for tl in quarter {
                    let left = Tiling::join(bl, tl, Axis::Horizontal).expect("equal sizes");
                    for br in &bottom_right {
                        for tr in &top_right {
                            let right = Tiling::join(br, tr, Axis::Horizontal).expect("equal sizes");
                            out.push(Tiling::join(&left, &right, Axis::Vertical).expect("equal sizes"));
                        }
                    }
                }
            }
            out
        }
    }
}

/// The subfamily `Υ_k` of double-bisector tilings.
pub fn upsilon_set(ladder: &[TilingIndex], k: u32) -> Result<Vec<Tiling>, Error> {
    if k < 2 {
        return Err(Error::TooSmall {
            what: "upsilon set",
            k,
            min: 2,
        });
    }
    if k as usize > ladder.len() + 1 {
        return Err(Error::InvalidArgument(format!(
            "upsilon set for k = {k} needs Ω_{} enumerated",
            k - 2
        )));
    }
    Ok(upsilon_region(k, ladder))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Tiling {
        Tiling::decode(s).unwrap()
    }

    #[test]
    fn small_enumerations() {
        let ladder = enumerate_ladder(3).unwrap();
        let sizes: Vec<usize> = ladder.iter().map(TilingIndex::len).collect();
        assert_eq!(sizes, vec![1, 2, 7, 82]);
        assert_eq!(ladder[1].encodings(), &["H(.,.)", "V(.,.)"]);
        let omega2 = &ladder[2];
        assert!(omega2.encodings().windows(2).all(|w| w[0] < w[1]));
        for (i, e) in omega2.encodings().iter().enumerate() {
            assert_eq!(omega2.index_of_encoding(e), Some(i));
            assert_eq!(omega2.index_of(&t(e)), Some(i));
        }
        assert!(matches!(enumerate(5), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn neighbors_of_two_state_space() {
        assert_eq!(neighbors(&t("V(.,.)")), vec![(t("H(.,.)"), 2)]);
    }

    #[test]
    fn flip_graph_small() {
        let ladder = enumerate_ladder(2).unwrap();
        let g1 = flip_graph(&ladder[1]).unwrap();
        assert_eq!((g1.vertex_count(), g1.edge_count()), (2, 1));
        assert_eq!(diameter(&g1).unwrap(), 1);
        assert_eq!(g1.edge_list(), "0 1 2\n");
        let g2 = flip_graph(&ladder[2]).unwrap();
        assert_eq!(g2.vertex_count(), 7);
        assert!(g2.is_connected());
        assert!(g2.is_symmetric());
        assert!(flip_graph(&ladder[0]).is_err());
    }

    #[test]
    fn upsilon_two_is_four_squares() {
        let ladder = enumerate_ladder(2).unwrap();
        assert_eq!(upsilon_set(&ladder, 2).unwrap(), vec![t("V(H(.,.),H(.,.))")]);
    }

    #[test]
    fn boundary_two() {
        let ladder = enumerate_ladder(2).unwrap();
        let set = boundary_set(&ladder[2]).unwrap();
        assert_eq!(set.len(), 2);
        for b in &set {
            assert!(b.tiling.has_horizontal_bisector());
            assert!(b.pivotal_edge_is_full_width());
            assert_eq!(b.pivotal.len(), 2);
        }
    }
}
