//! Dyadic intervals, rectangles and tilings of the unit square.
//!
//! Coordinates are exact: every endpoint is a dyadic rational and is stored
//! as a 32.32 fixed-point integer, so all geometric predicates are integer
//! comparisons. A [`Tiling`] keeps its rectangles sorted (bottom-to-top, then
//! left-to-right), which makes the rectangle set its own canonical form for
//! equality and hashing. The recursive bisector decomposition is derived on
//! demand by [`Tiling::canonical_tree`].

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Number of fractional bits in the fixed-point coordinate representation.
pub const FIXED_BITS: u32 = 32;
/// The coordinate `1` in fixed point.
pub const ONE: u64 = 1 << FIXED_BITS;
/// The coordinate `1/2` in fixed point.
pub const HALF: u64 = 1 << (FIXED_BITS - 1);
/// Largest supported size exponent.
pub const MAX_K: u32 = FIXED_BITS;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TilingError {
    #[error("expected {expected} rectangles, found {found}")]
    WrongCount { expected: u64, found: usize },
    #[error("rectangle {index} does not have area 2^-{k}")]
    WrongArea { index: usize, k: u32 },
    #[error("rectangles {first} and {second} overlap")]
    Overlap { first: usize, second: usize },
    #[error("rectangles do not cover the unit square")]
    CoverageGap,
    #[error("rectangle {index} has a side that is not a dyadic interval")]
    NonDyadicInterval { index: usize },
    #[error("tiling has no {0} bisector")]
    NoSuchBisector(Axis),
    #[error("cannot join tilings of sizes 2^{left} and 2^{right}")]
    MismatchedSizes { left: u32, right: u32 },
    #[error("size exponent {0} exceeds the supported maximum")]
    TooLarge(u32),
    #[error("malformed encoding at byte {pos}: {reason}")]
    Malformed { pos: usize, reason: &'static str },
    #[error("encoding is valid but not canonical (expected {expected})")]
    NonCanonical { expected: String },
}

/// The interval `[a 2^-s, (a+1) 2^-s]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    a: u32,
    s: u8,
}

impl DyadicInterval {
    pub const UNIT: DyadicInterval = DyadicInterval { a: 0, s: 0 };

    pub fn new(a: u32, s: u32) -> Option<Self> {
        if s > FIXED_BITS || (a as u64) >= (1u64 << s) {
            return None;
        }
        Some(DyadicInterval { a, s: s as u8 })
    }

    /// Recognises `[lo, hi]` (fixed point) as a dyadic interval.
    pub fn from_bounds(lo: u64, hi: u64) -> Option<Self> {
        if hi <= lo || hi > ONE {
            return None;
        }
        let len = hi - lo;
        if !len.is_power_of_two() || lo % len != 0 {
            return None;
        }
        let s = FIXED_BITS - len.trailing_zeros();
        Some(DyadicInterval {
            a: (lo / len) as u32,
            s: s as u8,
        })
    }

    pub fn position(&self) -> u32 {
        self.a
    }

    pub fn scale(&self) -> u32 {
        self.s as u32
    }

    #[inline]
    pub fn lo(&self) -> u64 {
        (self.a as u64) << (FIXED_BITS - self.s as u32)
    }

    #[inline]
    pub fn hi(&self) -> u64 {
        (self.a as u64 + 1) << (FIXED_BITS - self.s as u32)
    }

    #[inline]
    fn straddles_half(&self) -> bool {
        self.lo() < HALF && HALF < self.hi()
    }

    /// Image under `t -> 2t` (lower half) or `t -> 2t - 1` (upper half).
    fn dilate(self, upper: bool) -> Self {
        debug_assert!(self.s >= 1);
        let s = self.s - 1;
        let a = if upper { self.a - (1u32 << s) } else { self.a };
        DyadicInterval { a, s }
    }

    /// Image under `t -> t/2` (lower) or `t -> (t+1)/2` (upper).
    fn contract(self, upper: bool) -> Self {
        let a = if upper { self.a + (1u32 << self.s) } else { self.a };
        DyadicInterval { a, s: self.s + 1 }
    }

    /// Splits into its two dyadic halves.
    fn halves(self) -> (Self, Self) {
        let s = self.s + 1;
        (
            DyadicInterval { a: 2 * self.a, s },
            DyadicInterval { a: 2 * self.a + 1, s },
        )
    }
}

/// Product of two dyadic intervals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DyadicRectangle {
    pub x: DyadicInterval,
    pub y: DyadicInterval,
}

impl DyadicRectangle {
    pub const UNIT: DyadicRectangle = DyadicRectangle {
        x: DyadicInterval::UNIT,
        y: DyadicInterval::UNIT,
    };

    pub fn new(x: DyadicInterval, y: DyadicInterval) -> Self {
        DyadicRectangle { x, y }
    }

    /// `e` such that the area is `2^-e`.
    pub fn area_exponent(&self) -> u32 {
        self.x.s as u32 + self.y.s as u32
    }

    pub fn interiors_overlap(&self, other: &DyadicRectangle) -> bool {
        self.x.lo() < other.x.hi()
            && other.x.lo() < self.x.hi()
            && self.y.lo() < other.y.hi()
            && other.y.lo() < self.y.hi()
    }

    pub fn meets_quadrant(&self, q: Quadrant) -> bool {
        let left = self.x.lo() < HALF;
        let right = self.x.hi() > HALF;
        let bottom = self.y.lo() < HALF;
        let top = self.y.hi() > HALF;
        match q {
            Quadrant::TopLeft => top && left,
            Quadrant::TopRight => top && right,
            Quadrant::BottomLeft => bottom && left,
            Quadrant::BottomRight => bottom && right,
        }
    }
}

impl Ord for DyadicRectangle {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y.lo(), self.x.lo(), self.y.hi(), self.x.hi()).cmp(&(
            other.y.lo(),
            other.x.lo(),
            other.y.hi(),
            other.x.hi(),
        ))
    }
}

impl PartialOrd for DyadicRectangle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Unvalidated axis-aligned rectangle in fixed-point coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RawRect {
    pub x0: u64,
    pub x1: u64,
    pub y0: u64,
    pub y1: u64,
}

impl RawRect {
    /// Rectangle with integer corners on the grid of spacing `2^-grid`.
    pub fn on_grid(grid: u32, x0: u64, x1: u64, y0: u64, y1: u64) -> Self {
        let sh = FIXED_BITS - grid;
        RawRect {
            x0: x0 << sh,
            x1: x1 << sh,
            y0: y0 << sh,
            y1: y1 << sh,
        }
    }
}

impl From<DyadicRectangle> for RawRect {
    fn from(r: DyadicRectangle) -> Self {
        RawRect {
            x0: r.x.lo(),
            x1: r.x.hi(),
            y0: r.y.lo(),
            y1: r.y.hi(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// The line `x = 1/2`; splitting along it gives left and right halves.
    Vertical,
    /// The line `y = 1/2`; splitting along it gives bottom and top halves.
    Horizontal,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Vertical => "vertical",
            Axis::Horizontal => "horizontal",
        })
    }
}

/// The four sides of a rectangle, the four halves of the square, and the four
/// half-bisectors all share these labels. The declaration order is the order
/// used when drawing a side uniformly at random.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Top, Side::Bottom];

    fn bit(self) -> u8 {
        1 << (self as u8)
    }

    /// Axis of the bisector that must exist for this half to be retiled.
    pub fn axis(self) -> Axis {
        match self {
            Side::Left | Side::Right => Axis::Vertical,
            Side::Top | Side::Bottom => Axis::Horizontal,
        }
    }

    /// Whether this is the upper/right member of its half pair.
    fn is_upper(self) -> bool {
        matches!(self, Side::Right | Side::Top)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrant {
    TopLeft,
    TopRight,
    BottomLeft,
    BottomRight,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [
        Quadrant::TopLeft,
        Quadrant::TopRight,
        Quadrant::BottomLeft,
        Quadrant::BottomRight,
    ];
}

/// Which of the four half-bisector segments avoid every rectangle interior.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct HalfBisectorSet(u8);

impl HalfBisectorSet {
    pub const EMPTY: HalfBisectorSet = HalfBisectorSet(0);
    pub const ALL: HalfBisectorSet = HalfBisectorSet(0b1111);

    pub fn contains(&self, side: Side) -> bool {
        self.0 & side.bit() != 0
    }

    pub fn insert(&mut self, side: Side) {
        self.0 |= side.bit();
    }

    pub fn len(&self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn intersection(self, other: Self) -> Self {
        HalfBisectorSet(self.0 & other.0)
    }

    pub fn symmetric_difference(self, other: Self) -> Self {
        HalfBisectorSet(self.0 ^ other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = Side> {
        Side::ALL.into_iter().filter(move |s| self.contains(*s))
    }

    pub fn has_horizontal_bisector(&self) -> bool {
        self.contains(Side::Left) && self.contains(Side::Right)
    }

    pub fn has_vertical_bisector(&self) -> bool {
        self.contains(Side::Top) && self.contains(Side::Bottom)
    }
}

impl FromIterator<Side> for HalfBisectorSet {
    fn from_iter<I: IntoIterator<Item = Side>>(iter: I) -> Self {
        let mut set = HalfBisectorSet::EMPTY;
        for s in iter {
            set.insert(s);
        }
        set
    }
}

impl fmt::Debug for HalfBisectorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Recursive bisector decomposition. `Vertical(left, right)` and
/// `Horizontal(bottom, top)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TilingTree {
    Leaf,
    Vertical(Box<TilingTree>, Box<TilingTree>),
    Horizontal(Box<TilingTree>, Box<TilingTree>),
}

impl TilingTree {
    fn write_to(&self, out: &mut String) {
        match self {
            TilingTree::Leaf => out.push('.'),
            TilingTree::Vertical(a, b) | TilingTree::Horizontal(a, b) => {
                out.push(if matches!(self, TilingTree::Vertical(..)) {
                    'V'
                } else {
                    'H'
                });
                out.push('(');
                a.write_to(out);
                out.push(',');
                b.write_to(out);
                out.push(')');
            }
        }
    }
}

impl fmt::Display for TilingTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_to(&mut s);
        f.write_str(&s)
    }
}

/// A dyadic tiling of size `2^k`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Tiling {
    k: u32,
    rects: Vec<DyadicRectangle>,
}

impl Tiling {
    /// The single-rectangle tiling of size 1.
    pub fn unit() -> Self {
        Tiling {
            k: 0,
            rects: vec![DyadicRectangle::UNIT],
        }
    }

    /// Tiling by `2^k` vertical strips.
    pub fn vertical_strips(k: u32) -> Self {
        let rects = (0..1u32 << k)
            .map(|a| DyadicRectangle::new(DyadicInterval { a, s: k as u8 }, DyadicInterval::UNIT))
            .collect();
        Tiling::from_sorted(k, rects)
    }

    /// Tiling by `2^k` horizontal strips.
    pub fn horizontal_strips(k: u32) -> Self {
        let rects = (0..1u32 << k)
            .map(|b| DyadicRectangle::new(DyadicInterval::UNIT, DyadicInterval { a: b, s: k as u8 }))
            .collect();
        Tiling::from_sorted(k, rects)
    }

    fn from_sorted(k: u32, mut rects: Vec<DyadicRectangle>) -> Self {
        rects.sort_unstable();
        Tiling { k, rects }
    }

    /// Builds a tiling from dyadic rectangles, checking area, overlap and
    /// coverage.
    pub fn from_rectangles(k: u32, rects: Vec<DyadicRectangle>) -> Result<Self, TilingError> {
        if k > MAX_K {
            return Err(TilingError::TooLarge(k));
        }
        let expected = 1u64 << k;
        if rects.len() as u64 > expected {
            return Err(TilingError::WrongCount {
                expected,
                found: rects.len(),
            });
        }
        for (index, r) in rects.iter().enumerate() {
            if r.area_exponent() != k {
                return Err(TilingError::WrongArea { index, k });
            }
        }
        for i in 0..rects.len() {
            for j in i + 1..rects.len() {
                if rects[i].interiors_overlap(&rects[j]) {
                    return Err(TilingError::Overlap {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        // Disjoint rectangles of area 2^-k inside the square: coverage is a count.
        if (rects.len() as u64) < expected {
            return Err(TilingError::CoverageGap);
        }
        Ok(Tiling::from_sorted(k, rects))
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of rectangles, `n = 2^k`.
    pub fn size(&self) -> usize {
        self.rects.len()
    }

    pub fn rectangles(&self) -> &[DyadicRectangle] {
        &self.rects
    }

    pub fn has_bisector(&self, axis: Axis) -> bool {
        match axis {
            Axis::Vertical => !self.rects.iter().any(|r| r.x.straddles_half()),
            Axis::Horizontal => !self.rects.iter().any(|r| r.y.straddles_half()),
        }
    }

    pub fn has_vertical_bisector(&self) -> bool {
        self.has_bisector(Axis::Vertical)
    }

    pub fn has_horizontal_bisector(&self) -> bool {
        self.has_bisector(Axis::Horizontal)
    }

    pub fn half_bisectors(&self) -> HalfBisectorSet {
        let mut blocked = 0u8;
        for r in &self.rects {
            if r.y.straddles_half() {
                if r.x.lo() < HALF {
                    blocked |= Side::Left.bit();
                }
                if r.x.hi() > HALF {
                    blocked |= Side::Right.bit();
                }
            }
            if r.x.straddles_half() {
                if r.y.hi() > HALF {
                    blocked |= Side::Top.bit();
                }
                if r.y.lo() < HALF {
                    blocked |= Side::Bottom.bit();
                }
            }
        }
        HalfBisectorSet(!blocked & 0b1111)
    }

    /// Splits along a bisector into (left, right) or (bottom, top), each
    /// rescaled to a tiling of the unit square of size `2^(k-1)`.
    pub fn split(&self, axis: Axis) -> Result<(Tiling, Tiling), TilingError> {
        if self.k == 0 || !self.has_bisector(axis) {
            return Err(TilingError::NoSuchBisector(axis));
        }
        let half = self.rects.len() / 2;
        let mut lower = Vec::with_capacity(half);
        let mut upper = Vec::with_capacity(half);
        for r in &self.rects {
            match axis {
                Axis::Vertical => {
                    let up = r.x.lo() >= HALF;
                    let d = DyadicRectangle::new(r.x.dilate(up), r.y);
                    if up { upper.push(d) } else { lower.push(d) }
                }
                Axis::Horizontal => {
                    let up = r.y.lo() >= HALF;
                    let d = DyadicRectangle::new(r.x, r.y.dilate(up));
                    if up { upper.push(d) } else { lower.push(d) }
                }
            }
        }
        Ok((
            Tiling::from_sorted(self.k - 1, lower),
            Tiling::from_sorted(self.k - 1, upper),
        ))
    }

    /// Places `lower` in the left (bottom) half and `upper` in the right
    /// (top) half.
    pub fn join(lower: &Tiling, upper: &Tiling, axis: Axis) -> Result<Tiling, TilingError> {
        if lower.k != upper.k {
            return Err(TilingError::MismatchedSizes {
                left: lower.k,
                right: upper.k,
            });
        }
        if lower.k >= MAX_K {
            return Err(TilingError::TooLarge(lower.k + 1));
        }
        let place = |r: &DyadicRectangle, up: bool| match axis {
            Axis::Vertical => DyadicRectangle::new(r.x.contract(up), r.y),
            Axis::Horizontal => DyadicRectangle::new(r.x, r.y.contract(up)),
        };
        let rects = lower
            .rects
            .iter()
            .map(|r| place(r, false))
            .chain(upper.rects.iter().map(|r| place(r, true)))
            .collect();
        Ok(Tiling::from_sorted(lower.k + 1, rects))
    }

    /// Replaces one half with `rho`, if the required bisector exists.
    pub fn retile(&self, half: Side, rho: &Tiling) -> Option<Tiling> {
        let axis = half.axis();
        let (lower, upper) = self.split(axis).ok()?;
        let joined = if half.is_upper() {
            Tiling::join(&lower, rho, axis)
        } else {
            Tiling::join(rho, &upper, axis)
        };
        joined.ok()
    }

    pub fn quadrant_rectangles(&self, q: Quadrant) -> impl Iterator<Item = &DyadicRectangle> {
        self.rects.iter().filter(move |r| r.meets_quadrant(q))
    }

    /// Recursive decomposition preferring a vertical split whenever both
    /// bisectors exist.
    pub fn canonical_tree(&self) -> TilingTree {
        fn build(t: &Tiling) -> TilingTree {
            if t.k == 0 {
                return TilingTree::Leaf;
            }
            let axis = if t.has_vertical_bisector() {
                Axis::Vertical
            } else {
                Axis::Horizontal
            };
            let (a, b) = t
                .split(axis)
                .expect("every dyadic tiling of size >= 2 has a bisector");
            let (a, b) = (Box::new(build(&a)), Box::new(build(&b)));
            match axis {
                Axis::Vertical => TilingTree::Vertical(a, b),
                Axis::Horizontal => TilingTree::Horizontal(a, b),
            }
        }
        build(self)
    }

    pub fn encode(&self) -> String {
        let mut s = String::with_capacity(4 * self.rects.len());
        self.canonical_tree().write_to(&mut s);
        s
    }

    /// Builds the tiling described by a tree. Any tree whose leaves all sit at
    /// the same depth describes a tiling.
    pub fn from_tree(tree: &TilingTree) -> Result<Tiling, TilingError> {
        match tree {
            TilingTree::Leaf => Ok(Tiling::unit()),
            TilingTree::Vertical(a, b) => {
                Tiling::join(&Tiling::from_tree(a)?, &Tiling::from_tree(b)?, Axis::Vertical)
            }
            TilingTree::Horizontal(a, b) => Tiling::join(
                &Tiling::from_tree(a)?,
                &Tiling::from_tree(b)?,
                Axis::Horizontal,
            ),
        }
    }

    /// Parses a canonical encoding; rejects malformed and non-canonical input.
    pub fn decode(s: &str) -> Result<Tiling, TilingError> {
        let tree = parse_tree(s.as_bytes())?;
        let tiling = Tiling::from_tree(&tree)?;
        let canonical = tiling.encode();
        if canonical != s {
            return Err(TilingError::NonCanonical {
                expected: canonical,
            });
        }
        Ok(tiling)
    }

    /// Whether `x` and `y` have the same rectangles meeting quadrant `q`.
    pub fn quadrant_equal(x: &Tiling, y: &Tiling, q: Quadrant) -> bool {
        x.quadrant_rectangles(q).eq(y.quadrant_rectangles(q))
    }

    /// Locates the rectangle across side `side` of rectangle `i` that shares
    /// that whole side, if any.
    fn full_side_neighbor(&self, i: usize, side: Side) -> Option<usize> {
        let r = &self.rects[i];
        self.rects.iter().position(|o| match side {
            Side::Left => o.x.hi() == r.x.lo() && o.y == r.y,
            Side::Right => o.x.lo() == r.x.hi() && o.y == r.y,
            Side::Top => o.y.lo() == r.y.hi() && o.x == r.x,
            Side::Bottom => o.y.hi() == r.y.lo() && o.x == r.x,
        })
    }

    /// The edge flip selected by rectangle `i` and one of its sides: the side
    /// must bisect a rectangle of twice the cell area (so the neighbour across
    /// it shares the whole side), that rectangle must be dyadic, and the side
    /// is then replaced by the perpendicular bisector. `None` if the selection
    /// is not a valid move.
    pub fn edge_flip(&self, i: usize, side: Side) -> Option<Tiling> {
        let j = self.full_side_neighbor(i, side)?;
        let (r, o) = (self.rects[i], self.rects[j]);
        let (first, second) = match side {
            Side::Left => {
                // union x-interval starts at the neighbour
                if o.x.a % 2 != 0 {
                    return None;
                }
                let ux = DyadicInterval { a: o.x.a / 2, s: o.x.s - 1 };
                let (lo, hi) = r.y.halves();
                (DyadicRectangle::new(ux, lo), DyadicRectangle::new(ux, hi))
            }
            Side::Right => {
                if r.x.a % 2 != 0 {
                    return None;
                }
                let ux = DyadicInterval { a: r.x.a / 2, s: r.x.s - 1 };
                let (lo, hi) = r.y.halves();
                (DyadicRectangle::new(ux, lo), DyadicRectangle::new(ux, hi))
            }
            Side::Bottom => {
                if o.y.a % 2 != 0 {
                    return None;
                }
                let uy = DyadicInterval { a: o.y.a / 2, s: o.y.s - 1 };
                let (lo, hi) = r.x.halves();
                (DyadicRectangle::new(lo, uy), DyadicRectangle::new(hi, uy))
            }
            Side::Top => {
                if r.y.a % 2 != 0 {
                    return None;
                }
                let uy = DyadicInterval { a: r.y.a / 2, s: r.y.s - 1 };
                let (lo, hi) = r.x.halves();
                (DyadicRectangle::new(lo, uy), DyadicRectangle::new(hi, uy))
            }
        };
        let mut rects: Vec<DyadicRectangle> = self
            .rects
            .iter()
            .enumerate()
            .filter(|&(idx, _)| idx != i && idx != j)
            .map(|(_, r)| *r)
            .collect();
        rects.push(first);
        rects.push(second);
        Some(Tiling::from_sorted(self.k, rects))
    }
}

/// Validates raw rectangles as a dyadic tiling of size `2^k`.
pub fn validate(rects: &[RawRect], k: u32) -> Result<Tiling, TilingError> {
    if k > MAX_K {
        return Err(TilingError::TooLarge(k));
    }
    if rects.len() as u64 > 1u64 << k {
        return Err(TilingError::WrongCount {
            expected: 1 << k,
            found: rects.len(),
        });
    }
    let mut dyadic = Vec::with_capacity(rects.len());
    for (index, r) in rects.iter().enumerate() {
        let x = DyadicInterval::from_bounds(r.x0, r.x1);
        let y = DyadicInterval::from_bounds(r.y0, r.y1);
        match (x, y) {
            (Some(x), Some(y)) => dyadic.push(DyadicRectangle::new(x, y)),
            _ => return Err(TilingError::NonDyadicInterval { index }),
        }
    }
    Tiling::from_rectangles(k, dyadic)
}

fn parse_tree(bytes: &[u8]) -> Result<TilingTree, TilingError> {
    struct Parser<'a> {
        bytes: &'a [u8],
        pos: usize,
    }
    impl Parser<'_> {
        fn expect(&mut self, c: u8, reason: &'static str) -> Result<(), TilingError> {
            if self.bytes.get(self.pos) == Some(&c) {
                self.pos += 1;
                Ok(())
            } else {
                Err(TilingError::Malformed { pos: self.pos, reason })
            }
        }
        fn node(&mut self, depth: u32) -> Result<TilingTree, TilingError> {
            if depth > MAX_K {
                return Err(TilingError::Malformed {
                    pos: self.pos,
                    reason: "nesting too deep",
                });
            }
            let c = *self.bytes.get(self.pos).ok_or(TilingError::Malformed {
                pos: self.pos,
                reason: "unexpected end of input",
            })?;
            self.pos += 1;
            match c {
                b'.' => Ok(TilingTree::Leaf),
                b'V' | b'H' => {
                    self.expect(b'(', "expected '('")?;
                    let a = Box::new(self.node(depth + 1)?);
                    self.expect(b',', "expected ','")?;
                    let b = Box::new(self.node(depth + 1)?);
                    self.expect(b')', "expected ')'")?;
                    Ok(if c == b'V' {
                        TilingTree::Vertical(a, b)
                    } else {
                        TilingTree::Horizontal(a, b)
                    })
                }
                _ => Err(TilingError::Malformed {
                    pos: self.pos - 1,
                    reason: "expected '.', 'V' or 'H'",
                }),
            }
        }
    }
    let mut p = Parser { bytes, pos: 0 };
    let tree = p.node(0)?;
    if p.pos != bytes.len() {
        return Err(TilingError::Malformed {
            pos: p.pos,
            reason: "trailing input",
        });
    }
    Ok(tree)
}

impl fmt::Display for Tiling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

impl fmt::Debug for Tiling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tiling({})", self.encode())
    }
}

impl FromStr for Tiling {
    type Err = TilingError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tiling::decode(s)
    }
}

impl Serialize for Tiling {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.encode())
    }
}

impl<'de> Deserialize<'de> for Tiling {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Tiling::decode(&s).map_err(serde::de::Error::custom)
    }
}

/// Concrete tilings used as fixtures in tests and reports.
pub mod fixtures {
    use super::Tiling;

    /// Size-16 tiling with a vertical bisector and top, right and bottom
    /// half-bisectors but no left half-bisector.
    pub const VERTICAL_NO_LEFT: &str =
        "V(V(V(V(.,.),V(.,.)),V(V(.,.),V(.,.))),H(V(H(.,.),H(.,.)),H(H(.,.),H(.,.))))";
    /// Size-16 tiling with both bisectors, agreeing with [`VERTICAL_NO_LEFT`]
    /// on the bottom-right quadrant only.
    pub const BOTH_BISECTORS: &str =
        "V(H(H(H(.,.),H(.,.)),H(H(.,.),H(.,.))),H(V(H(.,.),H(.,.)),H(V(.,.),H(.,.))))";

    pub fn vertical_no_left() -> Tiling {
        Tiling::decode(VERTICAL_NO_LEFT).expect("fixture is canonical")
    }

    pub fn both_bisectors() -> Tiling {
        Tiling::decode(BOTH_BISECTORS).expect("fixture is canonical")
    }
}
