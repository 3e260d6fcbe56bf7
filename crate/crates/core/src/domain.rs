//! Jordan sets of hexagons: boundary cycles, s-boundaries, e-vertices and
//! discretisation of planar shapes.

use std::collections::VecDeque;

use num_complex::Complex64;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{lattice_to_plane, DirEdge, HexCoord, HexVertex};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Planar regions accepted by [`discretize_domain`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Disc {
        cx: f64,
        cy: f64,
        radius: f64,
    },
    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    Rect {
        x0: f64,
        y0: f64,
        x1: f64,
        y1: f64,
    },
    /// Rhombus with a 60 degree angle at `(x0, y0)`, one side along the x axis.
    Rhombus {
        x0: f64,
        y0: f64,
        side: f64,
    },
}

impl Shape {
    pub fn unit_disc() -> Self {
        Shape::Disc {
            cx: 0.0,
            cy: 0.0,
            radius: 1.0,
        }
    }

    pub fn contains(&self, p: Complex64) -> bool {
        match *self {
            Shape::Disc { cx, cy, radius } => {
                (p - Complex64::new(cx, cy)).norm_sqr() <= radius * radius
            }
            Shape::Rect { x0, y0, x1, y1 } => p.re >= x0 && p.re <= x1 && p.im >= y0 && p.im <= y1,
            Shape::Rhombus { x0, y0, side } => {
                // p = o + a*(1,0) + b*(1/2, sqrt3/2) with a, b in [0, side]
                let d = p - Complex64::new(x0, y0);
                let b = d.im * 2.0 / SQRT3;
                let a = d.re - b * 0.5;
                a >= 0.0 && a <= side && b >= 0.0 && b <= side
            }
        }
    }

    /// Axis-aligned bounding box `(xmin, ymin, xmax, ymax)`.
    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        match *self {
            Shape::Disc { cx, cy, radius } => (cx - radius, cy - radius, cx + radius, cy + radius),
            Shape::Rect { x0, y0, x1, y1 } => (x0, y0, x1, y1),
            Shape::Rhombus { x0, y0, side } => (x0, y0, x0 + 1.5 * side, y0 + side * SQRT3 / 2.0),
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Shape::Disc { radius, .. } => 2.0 * radius,
            Shape::Rect { x0, y0, x1, y1 } => ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt(),
            Shape::Rhombus { side, .. } => side * SQRT3,
        }
    }

    pub fn center(&self) -> Complex64 {
        let (a, b, c, d) = self.bbox();
        match *self {
            Shape::Disc { cx, cy, .. } => Complex64::new(cx, cy),
            Shape::Rhombus { x0, y0, side } => {
                Complex64::new(x0 + 0.75 * side, y0 + side * SQRT3 / 4.0)
            }
            _ => Complex64::new((a + c) / 2.0, (b + d) / 2.0),
        }
    }

    /// Lowest and highest points of the shape (the analogues of `-i` and `i`
    /// on the unit circle), used to seed the first exploration.
    pub fn bottom_top(&self) -> (Complex64, Complex64) {
        match *self {
            Shape::Disc { cx, cy, radius } => (
                Complex64::new(cx, cy - radius),
                Complex64::new(cx, cy + radius),
            ),
            Shape::Rect { x0, y0, x1, y1 } => {
                let mx = (x0 + x1) / 2.0;
                (Complex64::new(mx, y0), Complex64::new(mx, y1))
            }
            Shape::Rhombus { x0, y0, side } => {
                let h = side * SQRT3 / 2.0;
                (
                    Complex64::new(x0 + side / 2.0, y0),
                    Complex64::new(x0 + side, y0 + h),
                )
            }
        }
    }
}

/// A bounded simply connected set of hexagons whose s-boundary is a
/// simple closed chain of hexagons.
#[derive(Debug, Clone)]
pub struct JordanSet {
    pub mesh: f64,
    hexes: FxHashSet<HexCoord>,
    /// Counterclockwise boundary: every edge has the set on its left.
    boundary_cycle: Vec<DirEdge>,
    s_boundary: Vec<HexCoord>,
    e_vertices: Vec<HexVertex>,
    /// Position in `boundary_cycle` of the edge leaving each boundary vertex.
    boundary_index: FxHashMap<HexVertex, usize>,
    extent: (i64, i64, i64, i64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JordanSetWire {
    pub mesh: f64,
    pub hexes: Vec<[i32; 2]>,
}

impl JordanSet {
    pub fn from_hexes<I: IntoIterator<Item = HexCoord>>(hexes: I, mesh: f64) -> Result<Self> {
        let set: FxHashSet<HexCoord> = hexes.into_iter().collect();
        Self::from_set(set, mesh)
    }

    pub fn from_set(hexes: FxHashSet<HexCoord>, mesh: f64) -> Result<Self> {
        if hexes.is_empty() {
            return Err(Error::NotJordan("empty set".into()));
        }
        if !(mesh > 0.0) {
            return Err(Error::NotJordan("mesh must be positive".into()));
        }
        let start = *hexes.iter().min().unwrap();
        if connected_size(&hexes, start) != hexes.len() {
            return Err(Error::NotJordan("set is not connected".into()));
        }

        let mut out_of: FxHashMap<HexVertex, DirEdge> = FxHashMap::default();
        for &h in &hexes {
            for k in 0..6 {
                let n = h.neighbor(k);
                if !hexes.contains(&n) {
                    let e = DirEdge::new(n, h);
                    out_of.insert(e.tail(), e);
                }
            }
        }
        let first = *out_of
            .keys()
            .min_by_key(|v| (v.lattice_xy(), v.parity))
            .unwrap();
        let mut cycle = Vec::with_capacity(out_of.len());
        let mut v = first;
        loop {
            let e = out_of[&v];
            cycle.push(e);
            v = e.head();
            if v == first || cycle.len() > out_of.len() {
                break;
            }
        }
        if cycle.len() != out_of.len() {
            return Err(Error::NotJordan(
                "boundary has more than one component".into(),
            ));
        }

        let n = cycle.len();
        let mut e_vertices = Vec::new();
        let mut s_boundary: Vec<HexCoord> = Vec::new();
        // begin the run list at an e-vertex so runs are not split by the seam
        let offset = (0..n)
            .find(|&i| cycle[(i + n - 1) % n].right != cycle[i].right)
            .unwrap_or(0);
        for j in 0..n {
            let i = (offset + j) % n;
            let prev = cycle[(i + n - 1) % n];
            if prev.right != cycle[i].right {
                e_vertices.push(cycle[i].tail());
                s_boundary.push(cycle[i].right);
            }
        }
        let distinct: FxHashSet<HexCoord> = s_boundary.iter().copied().collect();
        if distinct.len() != s_boundary.len() {
            return Err(Error::NotJordan("s-boundary is not a simple chain".into()));
        }
        // keep e-vertices in boundary-cycle order starting from the seam
        e_vertices.sort_by_key(|v| {
            let tail_pos = cycle.iter().position(|e| e.tail() == *v).unwrap();
            tail_pos
        });
        let boundary_index: FxHashMap<HexVertex, usize> = cycle
            .iter()
            .enumerate()
            .map(|(i, e)| (e.tail(), i))
            .collect();
        let mut extent = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
        for e in &cycle {
            let (x, y) = e.tail().lattice_xy();
            extent.0 = extent.0.min(x);
            extent.1 = extent.1.max(x);
            extent.2 = extent.2.min(y);
            extent.3 = extent.3.max(y);
        }
        Ok(Self {
            mesh,
            hexes,
            boundary_cycle: cycle,
            s_boundary,
            e_vertices,
            boundary_index,
            extent,
        })
    }

    pub fn hexes(&self) -> &FxHashSet<HexCoord> {
        &self.hexes
    }

    pub fn sorted_hexes(&self) -> Vec<HexCoord> {
        let mut v: Vec<_> = self.hexes.iter().copied().collect();
        v.sort();
        v
    }

    pub fn len(&self) -> usize {
        self.hexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hexes.is_empty()
    }

    pub fn contains(&self, h: HexCoord) -> bool {
        self.hexes.contains(&h)
    }

    pub fn boundary_cycle(&self) -> &[DirEdge] {
        &self.boundary_cycle
    }

    /// External site boundary in boundary-cycle order.
    pub fn s_boundary(&self) -> &[HexCoord] {
        &self.s_boundary
    }

    pub fn e_vertices(&self) -> &[HexVertex] {
        &self.e_vertices
    }

    pub fn is_e_vertex(&self, v: HexVertex) -> bool {
        match self.boundary_index.get(&v) {
            Some(&i) => {
                let n = self.boundary_cycle.len();
                self.boundary_cycle[(i + n - 1) % n].right != self.boundary_cycle[i].right
            }
            None => false,
        }
    }

    /// Position of the boundary edge leaving `v`, if `v` is on the boundary.
    pub fn boundary_position(&self, v: HexVertex) -> Option<usize> {
        self.boundary_index.get(&v).copied()
    }

    pub fn on_boundary(&self, v: HexVertex) -> bool {
        self.boundary_index.contains_key(&v)
    }

    /// Boundary edges met going counterclockwise from `from` to `to`.
    pub fn ccw_arc(&self, from: HexVertex, to: HexVertex) -> Option<Vec<DirEdge>> {
        let n = self.boundary_cycle.len();
        let i = *self.boundary_index.get(&from)?;
        let j = *self.boundary_index.get(&to)?;
        let len = (j + n - i) % n;
        Some((0..len).map(|s| self.boundary_cycle[(i + s) % n]).collect())
    }

    /// The edge at an e-vertex that leaves the boundary, oriented towards the
    /// vertex: the hexagon on its right is the one after the vertex in
    /// counterclockwise order.
    pub fn entry_edge(&self, v: HexVertex) -> Option<DirEdge> {
        let i = *self.boundary_index.get(&v)?;
        let n = self.boundary_cycle.len();
        let before = self.boundary_cycle[(i + n - 1) % n].right;
        let after = self.boundary_cycle[i].right;
        (before != after).then(|| DirEdge::new(after, before))
    }

    /// Integer extent `(xmin, xmax, ymin, ymax)` of the boundary vertices.
    pub fn lattice_extent(&self) -> (i64, i64, i64, i64) {
        self.extent
    }

    /// Cartesian x- and y-extents of the boundary.
    pub fn extents(&self) -> (f64, f64) {
        let (x0, x1, y0, y1) = self.extent;
        (
            (x1 - x0) as f64 * self.mesh * 0.5,
            (y1 - y0) as f64 * self.mesh * SQRT3 * 0.5,
        )
    }

    /// Larger of the boundary's x- and y-extents.
    pub fn d_m(&self) -> f64 {
        let (dx, dy) = self.extents();
        dx.max(dy)
    }

    pub fn position(&self, v: HexVertex) -> Complex64 {
        v.position(self.mesh)
    }

    /// The e-vertex closest to `target`; ties go to the smaller real part,
    /// then the smaller imaginary part.
    pub fn nearest_e_vertex(&self, target: Complex64) -> Result<HexVertex> {
        if self.e_vertices.len() < 2 {
            return Err(Error::TooFewEVertices);
        }
        let tol = 1e-9 * self.mesh * self.mesh;
        let mut best: Option<(f64, Complex64, HexVertex)> = None;
        for &v in &self.e_vertices {
            let p = v.position(self.mesh);
            let d = (p - target).norm_sqr();
            best = match best {
                None => Some((d, p, v)),
                Some((bd, bp, bv)) => {
                    if d < bd - tol {
                        Some((d, p, v))
                    } else if d <= bd + tol && (p.re, p.im) < (bp.re, bp.im) {
                        Some((d, p, v))
                    } else {
                        Some((bd, bp, bv))
                    }
                }
            };
        }
        Ok(best.unwrap().2)
    }

    pub fn wire(&self) -> JordanSetWire {
        JordanSetWire {
            mesh: self.mesh,
            hexes: self.sorted_hexes().iter().map(|h| [h.q, h.r]).collect(),
        }
    }

    pub fn from_wire(w: &JordanSetWire) -> Result<Self> {
        Self::from_hexes(w.hexes.iter().map(|&[q, r]| HexCoord::new(q, r)), w.mesh)
    }

    /// Centroid of the hexagon centres.
    pub fn centroid(&self) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for h in &self.hexes {
            s += h.center(self.mesh);
        }
        s / self.hexes.len() as f64
    }

    /// Whether the boundary vertex position lies at integer coords `xy`.
    pub fn vertex_plane(&self, xy: (i64, i64)) -> Complex64 {
        lattice_to_plane(xy, self.mesh)
    }
}

fn connected_size(set: &FxHashSet<HexCoord>, start: HexCoord) -> usize {
    let mut seen = FxHashSet::default();
    let mut queue = VecDeque::from([start]);
    seen.insert(start);
    while let Some(h) = queue.pop_front() {
        for n in h.neighbors() {
            if set.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.len()
}

/// Connected components of `set`, each sorted, in order of their smallest hexagon.
pub fn components(set: &FxHashSet<HexCoord>) -> Vec<Vec<HexCoord>> {
    let mut sorted: Vec<_> = set.iter().copied().collect();
    sorted.sort();
    let mut seen = FxHashSet::default();
    let mut out = Vec::new();
    for s in sorted {
        if !seen.insert(s) {
            continue;
        }
        let mut comp = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(h) = queue.pop_front() {
            for n in h.neighbors() {
                if set.contains(&n) && seen.insert(n) {
                    comp.push(n);
                    queue.push_back(n);
                }
            }
        }
        comp.sort();
        out.push(comp);
    }
    out
}

/// Hexagons lying entirely inside `shape` (all six corners inside).
pub fn hexes_inside(shape: &Shape, mesh: f64) -> FxHashSet<HexCoord> {
    let (x0, y0, x1, y1) = shape.bbox();
    let qmin = (x0 / (1.5 * mesh)).floor() as i32 - 1;
    let qmax = (x1 / (1.5 * mesh)).ceil() as i32 + 1;
    let mut out = FxHashSet::default();
    for q in qmin..=qmax {
        let rmin = (y0 / (SQRT3 * mesh) - q as f64 / 2.0).floor() as i32 - 1;
        let rmax = (y1 / (SQRT3 * mesh) - q as f64 / 2.0).ceil() as i32 + 1;
        for r in rmin..=rmax {
            let h = HexCoord::new(q, r);
            if h.corners().iter().all(|v| shape.contains(v.position(mesh))) {
                out.insert(h);
            }
        }
    }
    out
}

/// The largest Jordan set of hexagons of mesh `mesh` contained in `shape`.
///
/// For convex shapes the hexagons entirely inside form a single lattice-convex
/// blob, which is already a Jordan set. Pinches at sharp corners are removed
/// by dropping the hexagons that touch a doubly visited s-boundary site.
pub fn discretize_domain(shape: &Shape, mesh: f64) -> Result<JordanSet> {
    if !(mesh > 0.0) || shape.diameter() < 4.0 * mesh {
        return Err(Error::ShapeTooSmall);
    }
    let mut set = hexes_inside(shape, mesh);
    loop {
        let comps = components(&set);
        let Some(biggest) = comps.into_iter().max_by_key(|c| c.len()) else {
            return Err(Error::ShapeTooSmall);
        };
        if biggest.len() < 7 {
            return Err(Error::ShapeTooSmall);
        }
        set = biggest.into_iter().collect();
        fill_holes(&mut set);
        match JordanSet::from_set(set.clone(), mesh) {
            Ok(j) => return Ok(j),
            Err(_) => {
                let pinch = doubled_s_boundary_sites(&set);
                if pinch.is_empty() {
                    return Err(Error::ShapeTooSmall);
                }
                for p in pinch {
                    for n in p.neighbors() {
                        set.remove(&n);
                    }
                }
            }
        }
    }
}

fn fill_holes(set: &mut FxHashSet<HexCoord>) {
    let mut q0 = i32::MAX;
    let mut q1 = i32::MIN;
    let mut r0 = i32::MAX;
    let mut r1 = i32::MIN;
    for h in set.iter() {
        q0 = q0.min(h.q);
        q1 = q1.max(h.q);
        r0 = r0.min(h.r);
        r1 = r1.max(h.r);
    }
    let inside_box = |h: HexCoord| h.q >= q0 - 1 && h.q <= q1 + 1 && h.r >= r0 - 1 && h.r <= r1 + 1;
    let start = HexCoord::new(q0 - 1, r0 - 1);
    let mut outside = FxHashSet::default();
    outside.insert(start);
    let mut queue = VecDeque::from([start]);
    while let Some(h) = queue.pop_front() {
        for n in h.neighbors() {
            if inside_box(n) && !set.contains(&n) && outside.insert(n) {
                queue.push_back(n);
            }
        }
    }
    for q in q0..=q1 {
        for r in r0..=r1 {
            let h = HexCoord::new(q, r);
            if !outside.contains(&h) {
                set.insert(h);
            }
        }
    }
}

fn doubled_s_boundary_sites(set: &FxHashSet<HexCoord>) -> Vec<HexCoord> {
    let mut runs: FxHashMap<HexCoord, usize> = FxHashMap::default();
    let mut seen_outside = FxHashSet::default();
    for &h in set {
        for n in h.neighbors() {
            if !set.contains(&n) && seen_outside.insert(n) {
                // count maximal runs of in-set neighbours around n
                let inside: Vec<bool> = n.neighbors().iter().map(|m| set.contains(m)).collect();
                let count = (0..6)
                    .filter(|&k| inside[k] && !inside[(k + 5) % 6])
                    .count();
                runs.insert(n, count);
            }
        }
    }
    let mut v: Vec<_> = runs
        .into_iter()
        .filter(|&(_, c)| c > 1)
        .map(|(h, _)| h)
        .collect();
    v.sort();
    v
}
