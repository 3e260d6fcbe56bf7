//! Direct extraction of cluster boundaries from a fully coloured region.

use std::collections::VecDeque;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::domain::JordanSet;
use crate::error::{Error, Result};
use crate::exploration::Orientation;
use crate::lattice::{Color, Coloring, DirEdge, HexCoord, HexVertex};

/// Where a loop produced by the construction came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopProvenance {
    pub step: usize,
    pub excursion_len: usize,
    pub closing_len: usize,
    pub boundary_len: usize,
}

/// A simple closed path on the hexagonal lattice with blue on its right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteLoop {
    /// Rotated so that the smallest edge comes first.
    pub cycle: Vec<DirEdge>,
    pub orientation: Orientation,
    pub enclosed_color: Color,
    pub provenance: Option<LoopProvenance>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoopWire {
    pub orientation: Orientation,
    pub enclosed_color: Color,
    pub edges: Vec<[i64; 4]>,
}

impl DiscreteLoop {
    pub fn from_cycle(mut cycle: Vec<DirEdge>) -> Result<Self> {
        let n = cycle.len();
        if n < 6 {
            return Err(Error::NotClosed(format!("cycle of length {n}")));
        }
        let mut tails = FxHashSet::default();
        let mut edges = FxHashSet::default();
        for i in 0..n {
            if cycle[i].head() != cycle[(i + 1) % n].tail() {
                return Err(Error::NotClosed(format!("gap after edge {i}")));
            }
            if !edges.insert(cycle[i].undirected()) {
                return Err(Error::NotClosed(format!("edge {i} repeated")));
            }
            if !tails.insert(cycle[i].tail()) {
                return Err(Error::NotClosed(format!(
                    "vertex at edge {i} visited twice"
                )));
            }
        }
        let start = (0..n).min_by_key(|&i| cycle[i]).unwrap();
        cycle.rotate_left(start);
        let area2: i64 = cycle
            .iter()
            .map(|e| {
                let (a, b) = (e.tail().lattice_xy(), e.head().lattice_xy());
                a.0 * b.1 - a.1 * b.0
            })
            .sum();
        // blue on the right: a counterclockwise loop has blue outside
        let (orientation, enclosed_color) = if area2 > 0 {
            (Orientation::Ccw, Color::Yellow)
        } else {
            (Orientation::Cw, Color::Blue)
        };
        Ok(Self {
            cycle,
            orientation,
            enclosed_color,
            provenance: None,
        })
    }

    pub fn len(&self) -> usize {
        self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycle.is_empty()
    }

    pub fn vertices(&self) -> impl Iterator<Item = HexVertex> + '_ {
        self.cycle.iter().map(|e| e.tail())
    }

    /// Euclidean diameter of the vertex set.
    pub fn diameter(&self, mesh: f64) -> f64 {
        let pts: Vec<(i64, i64)> = self.vertices().map(|v| v.lattice_xy()).collect();
        lattice_diameter(&pts) * mesh
    }

    /// Twice the lattice-grid shoelace area (grid units, not length units).
    pub fn area2(&self) -> i64 {
        self.cycle
            .iter()
            .map(|e| {
                let (a, b) = (e.tail().lattice_xy(), e.head().lattice_xy());
                a.0 * b.1 - a.1 * b.0
            })
            .sum::<i64>()
            .abs()
    }

    /// Hexagons adjacent to the loop on its blue and yellow sides.
    pub fn adjacent_hexes(&self) -> FxHashSet<HexCoord> {
        self.cycle.iter().flat_map(|e| [e.left, e.right]).collect()
    }

    pub fn wire(&self) -> LoopWire {
        LoopWire {
            orientation: self.orientation,
            enclosed_color: self.enclosed_color,
            edges: self.cycle.iter().map(|e| e.wire()).collect(),
        }
    }

    /// A point strictly off every lattice vertex and edge row: the doubled
    /// midpoint of the first slanted edge.
    fn probe(&self) -> (i64, i64) {
        let e = self
            .cycle
            .iter()
            .find(|e| e.tail().lattice_xy().1 != e.head().lattice_xy().1)
            .unwrap();
        e.midpoint2()
    }

    /// Even-odd test of a doubled-grid point with odd Y coordinate.
    pub fn encloses_probe(&self, p: (i64, i64)) -> bool {
        debug_assert!(p.1 % 2 != 0);
        let mut inside = false;
        for e in &self.cycle {
            let (a, b) = (e.tail().lattice_xy(), e.head().lattice_xy());
            let (ax, ay, bx, by) = (2 * a.0, 2 * a.1, 2 * b.0, 2 * b.1);
            if (ay < p.1) != (by < p.1) {
                // x of the crossing compared with p.0, cleared of the division
                let num = ax * (by - ay) + (p.1 - ay) * (bx - ax);
                let den = by - ay;
                let right = if den > 0 {
                    num > p.0 * den
                } else {
                    num < p.0 * den
                };
                if right {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

/// Largest distance between integer-grid points, in mesh units.
pub fn lattice_diameter(pts: &[(i64, i64)]) -> f64 {
    let hull = convex_hull(pts);
    let mut best = 0i64;
    for i in 0..hull.len() {
        for j in i + 1..hull.len() {
            let dx = hull[i].0 - hull[j].0;
            let dy = hull[i].1 - hull[j].1;
            // x = X/2, y = Y*sqrt(3)/2
            best = best.max(dx * dx + 3 * dy * dy);
        }
    }
    (best as f64).sqrt() / 2.0
}

fn convex_hull(pts: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut p: Vec<(i64, i64)> = pts.to_vec();
    p.sort();
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[derive(Debug, Clone)]
pub struct ClusterLabeling {
    pub label: FxHashMap<HexCoord, u32>,
    pub color_of: Vec<Color>,
}

impl ClusterLabeling {
    pub fn count(&self) -> usize {
        self.color_of.len()
    }
}

/// Monochromatic clusters of `region` together with its s-boundary.
pub fn label_clusters<C: Coloring + ?Sized>(region: &JordanSet, col: &C) -> ClusterLabeling {
    let mut sites: Vec<HexCoord> = region.sorted_hexes();
    sites.extend(region.s_boundary());
    let present: FxHashSet<HexCoord> = sites.iter().copied().collect();
    let mut label = FxHashMap::default();
    let mut color_of = Vec::new();
    for &s in &sites {
        if label.contains_key(&s) {
            continue;
        }
        let id = color_of.len() as u32;
        let c = col.color_of(s);
        color_of.push(c);
        label.insert(s, id);
        let mut q = VecDeque::from([s]);
        while let Some(h) = q.pop_front() {
            for n in h.neighbors() {
                if present.contains(&n) && !label.contains_key(&n) && col.color_of(n) == c {
                    label.insert(n, id);
                    q.push_back(n);
                }
            }
        }
    }
    ClusterLabeling { label, color_of }
}

#[derive(Debug, Clone, Default)]
pub struct ContourSet {
    pub loops: Vec<DiscreteLoop>,
    /// Interface chains cut by a change of boundary colour; empty for
    /// monochromatic boundary conditions.
    pub open: Vec<Vec<DirEdge>>,
    pub vertex_use: FxHashMap<HexVertex, u8>,
    pub mesh: f64,
}

/// All blue/yellow interfaces with at least one side in `region`, oriented
/// with blue on the right. `col` supplies the boundary colours on the s-boundary.
pub fn extract_contours<C: Coloring + ?Sized>(region: &JordanSet, col: &C) -> ContourSet {
    let mut next: FxHashMap<HexVertex, DirEdge> = FxHashMap::default();
    let mut has_pred: FxHashSet<HexVertex> = FxHashSet::default();
    let mut vertex_use: FxHashMap<HexVertex, u8> = FxHashMap::default();
    for &h in &region.sorted_hexes() {
        let ch = col.color_of(h);
        for n in h.neighbors() {
            if region.contains(n) && n < h {
                continue;
            }
            let cn = col.color_of(n);
            if cn == ch {
                continue;
            }
            let e = if ch == Color::Blue {
                DirEdge::new(h, n)
            } else {
                DirEdge::new(n, h)
            };
            let prev = next.insert(e.tail(), e);
            assert!(prev.is_none(), "two contour edges leave one vertex");
            has_pred.insert(e.head());
            *vertex_use.entry(e.tail()).or_default() += 1;
            *vertex_use.entry(e.head()).or_default() += 1;
        }
    }
    assert!(vertex_use.values().all(|&u| u <= 2));
    let mut used: FxHashSet<HexVertex> = FxHashSet::default();
    let mut open = Vec::new();
    // chains first: they start where no edge comes in
    let mut starts: Vec<HexVertex> = next
        .keys()
        .copied()
        .filter(|v| !has_pred.contains(v))
        .collect();
    starts.sort_by_key(|v| (v.lattice_xy(), v.parity));
    for s in starts {
        let mut chain = Vec::new();
        let mut v = s;
        while let Some(&e) = next.get(&v) {
            used.insert(v);
            chain.push(e);
            v = e.head();
        }
        open.push(chain);
    }
    let mut tails: Vec<HexVertex> = next.keys().copied().collect();
    tails.sort_by_key(|v| (v.lattice_xy(), v.parity));
    let mut loops = Vec::new();
    for s in tails {
        if used.contains(&s) {
            continue;
        }
        let mut cycle = Vec::new();
        let mut v = s;
        loop {
            used.insert(v);
            let e = next[&v];
            cycle.push(e);
            v = e.head();
            if v == s {
                break;
            }
        }
        loops.push(DiscreteLoop::from_cycle(cycle).expect("contour cycle is simple"));
    }
    loops.sort_by(|a, b| a.cycle[0].cmp(&b.cycle[0]));
    ContourSet {
        loops,
        open,
        vertex_use,
        mesh: region.mesh,
    }
}

#[derive(Debug, Clone)]
pub struct NestingForest {
    pub parent: Vec<Option<usize>>,
    pub depth: Vec<usize>,
}

/// Innermost enclosing loop of every loop, by scanline ray casting.
pub fn nesting_forest(cs: &ContourSet) -> NestingForest {
    let n = cs.loops.len();
    let probes: Vec<(i64, i64)> = cs.loops.iter().map(|l| l.probe()).collect();
    let areas: Vec<i64> = cs.loops.iter().map(|l| l.area2()).collect();
    let mut rows: FxHashMap<i64, Vec<usize>> = FxHashMap::default();
    for (i, p) in probes.iter().enumerate() {
        rows.entry(p.1).or_default().push(i);
    }
    // crossings of every loop with every probe row, as (doubled x, loop id)
    let mut crossings: FxHashMap<i64, Vec<(i64, usize)>> = FxHashMap::default();
    for (id, l) in cs.loops.iter().enumerate() {
        for e in &l.cycle {
            let (a, b) = (e.tail().lattice_xy(), e.head().lattice_xy());
            if a.1 == b.1 {
                continue;
            }
            // slanted edges span one grid row; the probe row is its doubled midpoint
            let y = a.1 + b.1;
            if rows.contains_key(&y) {
                crossings.entry(y).or_default().push((a.0 + b.0, id));
            }
        }
    }
    let mut parent = vec![None; n];
    for (y, ids) in &rows {
        let mut row = crossings.remove(y).unwrap_or_default();
        row.sort();
        for &i in ids {
            let mut parity: FxHashMap<usize, bool> = FxHashMap::default();
            for &(x, id) in row.iter().rev() {
                if x <= probes[i].0 {
                    break;
                }
                if id != i {
                    *parity.entry(id).or_default() ^= true;
                }
            }
            parent[i] = parity
                .into_iter()
                .filter(|&(_, odd)| odd)
                .map(|(id, _)| id)
                .min_by_key(|&id| areas[id]);
        }
    }
    let mut depth = vec![usize::MAX; n];
    fn fill(i: usize, parent: &[Option<usize>], depth: &mut [usize]) -> usize {
        if depth[i] != usize::MAX {
            return depth[i];
        }
        let d = match parent[i] {
            None => 0,
            Some(p) => fill(p, parent, depth) + 1,
        };
        depth[i] = d;
        d
    }
    for i in 0..n {
        fill(i, &parent, &mut depth);
    }
    NestingForest { parent, depth }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    /// Indices into the candidate list of loops not found in the oracle.
    pub spurious: Vec<usize>,
    /// Indices into the oracle's loops of diameter above the cutoff that
    /// the candidate list lacks.
    pub missing: Vec<usize>,
}

impl CompareReport {
    pub fn is_empty(&self) -> bool {
        self.spurious.is_empty() && self.missing.is_empty()
    }
}

pub fn compare_loop_sets(a: &[DiscreteLoop], b: &ContourSet, cutoff: f64) -> CompareReport {
    let oracle: FxHashMap<&[DirEdge], usize> = b
        .loops
        .iter()
        .enumerate()
        .map(|(i, l)| (l.cycle.as_slice(), i))
        .collect();
    let found: FxHashSet<&[DirEdge]> = a.iter().map(|l| l.cycle.as_slice()).collect();
    let spurious = a
        .iter()
        .enumerate()
        .filter(|(_, l)| !oracle.contains_key(l.cycle.as_slice()))
        .map(|(i, _)| i)
        .collect();
    let missing = b
        .loops
        .iter()
        .enumerate()
        .filter(|(_, l)| l.diameter(b.mesh) > cutoff && !found.contains(l.cycle.as_slice()))
        .map(|(i, _)| i)
        .collect();
    CompareReport { spurious, missing }
}
