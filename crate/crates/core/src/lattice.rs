//! Integer geometry of the hexagonal lattice and its dual triangular lattice.
//!
//! Hexagons are flat-top with side length one mesh unit and are addressed by
//! axial coordinates `(q, r)`. Every lattice quantity used by the topology
//! code has an exact integer form: vertices live on the grid
//! `X = 2x / mesh`, `Y = 2y / (mesh * sqrt(3))`, so hexagon centres sit at
//! `(3q, 2r + q)` and corners at `(3q ± 2, 2r + q)` or `(3q ± 1, 2r + q ± 1)`.
//! Floating point only enters when a caller asks for a Cartesian position.

use num_complex::Complex64;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

/// Axial offsets of the six neighbours, counterclockwise, starting with the
/// neighbour across the edge whose outward normal points at 30 degrees.
///
/// Edge `k` of a hexagon joins corner `k` (at `60k` degrees) to corner `k+1`
/// and is shared with the neighbour at `NEIGHBOR_OFFSETS[k]`.
pub const NEIGHBOR_OFFSETS: [(i32, i32); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HexCoord {
    pub q: i32,
    pub r: i32,
}

impl HexCoord {
    pub const fn new(q: i32, r: i32) -> Self {
        Self { q, r }
    }

    pub fn neighbor(self, k: usize) -> HexCoord {
        let (dq, dr) = NEIGHBOR_OFFSETS[k % 6];
        HexCoord::new(self.q + dq, self.r + dr)
    }

    /// The six neighbours in counterclockwise order (see [`NEIGHBOR_OFFSETS`]).
    pub fn neighbors(self) -> [HexCoord; 6] {
        std::array::from_fn(|k| self.neighbor(k))
    }

    /// Index `k` such that `other == self.neighbor(k)`.
    pub fn direction_to(self, other: HexCoord) -> Option<usize> {
        let d = (other.q - self.q, other.r - self.r);
        NEIGHBOR_OFFSETS.iter().position(|&o| o == d)
    }

    pub fn is_adjacent(self, other: HexCoord) -> bool {
        self.direction_to(other).is_some()
    }

    /// Centre on the integer `(X, Y)` grid.
    pub fn lattice_xy(self) -> (i64, i64) {
        (3 * self.q as i64, 2 * self.r as i64 + self.q as i64)
    }

    /// Cartesian centre for the given mesh.
    pub fn center(self, mesh: f64) -> Complex64 {
        lattice_to_plane(self.lattice_xy(), mesh)
    }

    /// Corner `j` (at `60j` degrees from the centre).
    pub fn corner(self, j: usize) -> HexVertex {
        let (q, r) = (self.q, self.r);
        match j % 6 {
            0 => HexVertex::east(q, r),
            1 => HexVertex::west(q + 1, r),
            2 => HexVertex::east(q - 1, r + 1),
            3 => HexVertex::west(q, r),
            4 => HexVertex::east(q - 1, r),
            _ => HexVertex::west(q + 1, r - 1),
        }
    }

    pub fn corners(self) -> [HexVertex; 6] {
        std::array::from_fn(|j| self.corner(j))
    }

    /// Hexagon whose interior contains the Cartesian point `p` (ties on edges
    /// resolve deterministically through cube rounding).
    pub fn containing(p: Complex64, mesh: f64) -> HexCoord {
        let qf = p.re / (1.5 * mesh);
        let rf = p.im / (SQRT3 * mesh) - qf / 2.0;
        let sf = -qf - rf;
        let (mut q, mut r, s) = (qf.round(), rf.round(), sf.round());
        let (dq, dr, ds) = ((q - qf).abs(), (r - rf).abs(), (s - sf).abs());
        if dq > dr && dq > ds {
            q = -r - s;
        } else if dr > ds {
            r = -q - s;
        }
        HexCoord::new(q as i32, r as i32)
    }

    /// Hexagonal (graph) distance.
    pub fn distance(self, other: HexCoord) -> i32 {
        let dq = other.q - self.q;
        let dr = other.r - self.r;
        (dq.abs() + dr.abs() + (dq + dr).abs()) / 2
    }
}

/// Converts integer lattice coordinates to a Cartesian point.
pub fn lattice_to_plane((x, y): (i64, i64), mesh: f64) -> Complex64 {
    Complex64::new(x as f64 * mesh * 0.5, y as f64 * mesh * SQRT3 * 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    /// Rightmost corner (0 degrees) of hexagon `(u, v)`.
    Even,
    /// Leftmost corner (180 degrees) of hexagon `(u, v)`.
    Odd,
}

/// A vertex of the hexagonal lattice. Every vertex is either the east corner
/// or the west corner of exactly one hexagon, which makes the representation
/// canonical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HexVertex {
    pub u: i32,
    pub v: i32,
    pub parity: Parity,
}

impl HexVertex {
    pub const fn east(u: i32, v: i32) -> Self {
        Self {
            u,
            v,
            parity: Parity::Even,
        }
    }

    pub const fn west(u: i32, v: i32) -> Self {
        Self {
            u,
            v,
            parity: Parity::Odd,
        }
    }

    pub fn lattice_xy(self) -> (i64, i64) {
        let (u, v) = (self.u as i64, self.v as i64);
        match self.parity {
            Parity::Even => (3 * u + 2, 2 * v + u),
            Parity::Odd => (3 * u - 2, 2 * v + u),
        }
    }

    pub fn position(self, mesh: f64) -> Complex64 {
        lattice_to_plane(self.lattice_xy(), mesh)
    }

    /// The three hexagons meeting at this vertex, counterclockwise.
    pub fn hexes(self) -> [HexCoord; 3] {
        let (u, v) = (self.u, self.v);
        match self.parity {
            Parity::Even => [
                HexCoord::new(u, v),
                HexCoord::new(u + 1, v - 1),
                HexCoord::new(u + 1, v),
            ],
            Parity::Odd => [
                HexCoord::new(u, v),
                HexCoord::new(u - 1, v + 1),
                HexCoord::new(u - 1, v),
            ],
        }
    }

    /// The three undirected edges at this vertex, each as the pair of
    /// hexagons it separates.
    pub fn edges(self) -> [(HexCoord, HexCoord); 3] {
        let [a, b, c] = self.hexes();
        [(a, b), (b, c), (c, a)]
    }
}

/// An oriented edge of the hexagonal lattice, identified by the hexagons on
/// its right and on its left. Reversing the orientation swaps the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DirEdge {
    pub right: HexCoord,
    pub left: HexCoord,
}

impl DirEdge {
    /// Panics if the hexagons are not adjacent.
    pub fn new(right: HexCoord, left: HexCoord) -> Self {
        debug_assert!(
            right.is_adjacent(left),
            "edge between non-adjacent hexagons"
        );
        Self { right, left }
    }

    fn dir(self) -> usize {
        self.left
            .direction_to(self.right)
            .expect("edge between non-adjacent hexagons")
    }

    pub fn reversed(self) -> Self {
        Self {
            right: self.left,
            left: self.right,
        }
    }

    /// The edge traverses the left hexagon's boundary counterclockwise, from
    /// its corner `k` to corner `k + 1`.
    pub fn tail(self) -> HexVertex {
        self.left.corner(self.dir())
    }

    pub fn head(self) -> HexVertex {
        self.left.corner(self.dir() + 1)
    }

    /// Third hexagon at the head vertex.
    pub fn hex_ahead(self) -> HexCoord {
        self.left.neighbor(self.dir() + 1)
    }

    /// Third hexagon at the tail vertex.
    pub fn hex_behind(self) -> HexCoord {
        self.left.neighbor(self.dir() + 5)
    }

    /// Same undirected edge regardless of orientation.
    pub fn undirected(self) -> (HexCoord, HexCoord) {
        if self.right <= self.left {
            (self.right, self.left)
        } else {
            (self.left, self.right)
        }
    }

    /// Midpoint on the doubled integer grid: `(X_tail + X_head, Y_tail + Y_head)`.
    pub fn midpoint2(self) -> (i64, i64) {
        let (a, b) = (self.tail().lattice_xy(), self.head().lattice_xy());
        (a.0 + b.0, a.1 + b.1)
    }

    /// `[u1, v1, u2, v2]` of the tail and head integer positions, the wire
    /// form used by the JSON artifacts.
    pub fn wire(self) -> [i64; 4] {
        let (a, b) = (self.tail().lattice_xy(), self.head().lattice_xy());
        [a.0, a.1, b.0, b.1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    Yellow,
    Blue,
}

impl Color {
    pub fn value(self) -> i8 {
        match self {
            Color::Yellow => -1,
            Color::Blue => 1,
        }
    }

    pub fn negate(self) -> Color {
        match self {
            Color::Yellow => Color::Blue,
            Color::Blue => Color::Yellow,
        }
    }
}

impl std::ops::Neg for Color {
    type Output = Color;
    fn neg(self) -> Color {
        self.negate()
    }
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based hash of a seed and two 64-bit counters. Site colours and
/// per-sample seeds are both derived from it.
pub fn hash3(seed: u64, a: u64, b: u64) -> u64 {
    mix64(mix64(mix64(seed) ^ a) ^ b.rotate_left(32))
}

/// Per-sample seed: `hash3(seed0, index, 0x5eed)`.
pub fn split_seed(seed0: u64, index: u64) -> u64 {
    hash3(seed0, index, 0x5eed)
}

/// A percolation configuration evaluated lazily: the colour of a site is a
/// pure function of `(seed, q, r)` unless an override is present.
///
/// Nothing is stored per sampled site, so the structure is `Sync` and can be
/// queried from many threads once the overrides are in place.
#[derive(Debug, Clone, Default)]
pub struct SiteColoring {
    pub seed: u64,
    overrides: FxHashMap<HexCoord, Color>,
    /// Colour used for every non-overridden site, replacing the fair coin.
    uniform: Option<Color>,
}

impl SiteColoring {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            overrides: FxHashMap::default(),
            uniform: None,
        }
    }

    /// A configuration in which every site has the given colour.
    pub fn constant(color: Color) -> Self {
        Self {
            seed: 0,
            overrides: FxHashMap::default(),
            uniform: Some(color),
        }
    }

    pub fn set_override(&mut self, site: HexCoord, color: Color) {
        self.overrides.insert(site, color);
    }

    pub fn with_overrides<I: IntoIterator<Item = (HexCoord, Color)>>(mut self, it: I) -> Self {
        self.overrides.extend(it);
        self
    }

    pub fn override_of(&self, site: HexCoord) -> Option<Color> {
        self.overrides.get(&site).copied()
    }

    pub fn overrides(&self) -> impl Iterator<Item = (HexCoord, Color)> + '_ {
        self.overrides.iter().map(|(&h, &c)| (h, c))
    }

    /// The fair-coin colour before overrides.
    pub fn sampled(&self, site: HexCoord) -> Color {
        if let Some(c) = self.uniform {
            return c;
        }
        let h = hash3(self.seed, site.q as i64 as u64, site.r as i64 as u64);
        if h >> 63 == 1 {
            Color::Blue
        } else {
            Color::Yellow
        }
    }

    pub fn color(&self, site: HexCoord) -> Color {
        match self.overrides.get(&site) {
            Some(&c) => c,
            None => self.sampled(site),
        }
    }

    /// Colour with every sampled and overridden value negated.
    pub fn negated(&self) -> NegatedColoring<'_> {
        NegatedColoring(self)
    }
}

/// Any site-colour oracle. Implemented by [`SiteColoring`] and a few adapters
/// used to express colour symmetries in tests and observables.
pub trait Coloring: Sync {
    fn color_of(&self, site: HexCoord) -> Color;
}

impl Coloring for SiteColoring {
    fn color_of(&self, site: HexCoord) -> Color {
        self.color(site)
    }
}

pub struct NegatedColoring<'a>(&'a SiteColoring);

impl Coloring for NegatedColoring<'_> {
    fn color_of(&self, site: HexCoord) -> Color {
        self.0.color(site).negate()
    }
}

impl<F: Fn(HexCoord) -> Color + Sync> Coloring for F {
    fn color_of(&self, site: HexCoord) -> Color {
        self(site)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn neighbors_of_origin_are_the_fixed_offsets() {
        let n = HexCoord::new(0, 0).neighbors();
        for (k, h) in n.iter().enumerate() {
            assert_eq!((h.q, h.r), NEIGHBOR_OFFSETS[k]);
        }
    }

    #[test]
    fn neighbor_order_is_counterclockwise_from_30_degrees() {
        let c = HexCoord::new(0, 0);
        let mut last = -1.0;
        for h in c.neighbors() {
            let p = h.center(1.0);
            let mut a = p.im.atan2(p.re).to_degrees();
            if a < 0.0 {
                a += 360.0;
            }
            assert!(a > last);
            last = a;
        }
        let p = c.neighbor(0).center(1.0);
        assert!((p.im.atan2(p.re).to_degrees() - 30.0).abs() < 1e-9);
    }

    #[test]
    fn neighbor_relation_is_symmetric_on_patch() {
        for q in -10..10 {
            for r in -10..10 {
                let a = HexCoord::new(q, r);
                for b in a.neighbors() {
                    assert!(b.neighbors().contains(&a));
                }
            }
        }
    }

    #[test]
    fn six_distinct_neighbors_on_patch() {
        for q in -25..25 {
            for r in -25..25 {
                let a = HexCoord::new(q, r);
                let set: HashSet<_> = a.neighbors().into_iter().collect();
                assert_eq!(set.len(), 6);
                assert!(!set.contains(&a));
            }
        }
    }

    #[test]
    fn corners_agree_with_geometry() {
        let h = HexCoord::new(3, -2);
        let c = h.center(1.0);
        for j in 0..6 {
            let p = h.corner(j).position(1.0);
            let ang = (60.0 * j as f64).to_radians();
            assert!((p - c - Complex64::new(ang.cos(), ang.sin())).norm() < 1e-12);
            // the corner is shared by exactly the hexagons listed by the vertex
            let hexes = h.corner(j).hexes();
            assert!(hexes.contains(&h));
            for o in hexes {
                assert!((o.center(1.0) - p).norm() < 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn directed_edge_endpoints_and_third_hexes() {
        let l = HexCoord::new(1, 1);
        for k in 0..6 {
            let e = DirEdge::new(l.neighbor(k), l);
            assert_eq!(e.tail(), l.corner(k));
            assert_eq!(e.head(), l.corner(k + 1));
            assert!(e.head().hexes().contains(&e.hex_ahead()));
            assert!(e.tail().hexes().contains(&e.hex_behind()));
            assert_eq!(e.reversed().head(), e.tail());
            assert_eq!(e.reversed().tail(), e.head());
            // right hexagon really is on the right of the direction of travel
            let d = e.head().position(1.0) - e.tail().position(1.0);
            let to_right = e.right.center(1.0) - e.tail().position(1.0);
            assert!(d.re * to_right.im - d.im * to_right.re < 0.0);
        }
    }

    #[test]
    fn containing_inverts_center() {
        for q in -5..5 {
            for r in -5..5 {
                let h = HexCoord::new(q, r);
                assert_eq!(HexCoord::containing(h.center(0.1), 0.1), h);
            }
        }
    }

    #[test]
    fn override_wins_and_colors_are_pure() {
        let mut c = SiteColoring::new(17);
        let h = HexCoord::new(4, 9);
        c.set_override(h, Color::Blue);
        for s in 0..20 {
            let mut d = SiteColoring::new(s);
            d.set_override(h, Color::Blue);
            assert_eq!(d.color(h), Color::Blue);
        }
        let g = HexCoord::new(-3, 2);
        assert_eq!(c.color(g), c.color(g));
        assert_eq!(c.color(g), SiteColoring::new(17).color(g));
    }

    #[test]
    fn fair_coin_frequency() {
        let c = SiteColoring::new(20_240_601);
        let mut blue = 0u64;
        let n = 1_000_000u64;
        for i in 0..1000 {
            for j in 0..1000 {
                if c.color(HexCoord::new(i - 500, j - 500)) == Color::Blue {
                    blue += 1;
                }
            }
        }
        let f = blue as f64 / n as f64;
        assert!((0.498..=0.502).contains(&f), "blue fraction {f}");
    }

    #[test]
    fn negation_is_an_involution() {
        for c in [Color::Blue, Color::Yellow] {
            assert_eq!(c.negate().negate(), c);
            assert_ne!(c.negate(), c);
            assert_eq!(c.value(), -(c.negate().value()));
        }
    }
}
