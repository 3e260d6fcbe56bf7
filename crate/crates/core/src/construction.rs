//! Priority-ordered iterated exploration that discovers cluster boundaries,
//! and the inverse reconstruction of an exploration path from loops.

use std::collections::BTreeMap;
use std::rc::Rc;

use num_complex::Complex64;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::domain::{discretize_domain, JordanSet, Shape};
use crate::error::{Error, Result};
use crate::exploration::{
    components_after, explore, split_excursions, BoundaryCondition, DomainType, Excursion,
    ExplorationResult, Side, SubdomainRecord,
};
use crate::lattice::{Color, DirEdge, HexCoord, HexVertex, SiteColoring};
use crate::oracle::{lattice_diameter, ContourSet, DiscreteLoop, LoopProvenance, LoopWire};

/// Dyadic points of a square window, ordered by refinement level, then by
/// Chebyshev ring around the centre, then by angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseOrderedPoints {
    pub center: Complex64,
    pub half_width: f64,
}

impl DenseOrderedPoints {
    pub const VERSION: &'static str = "dyadic-spiral-v1";

    pub fn new(center: Complex64, half_width: f64) -> Self {
        Self { center, half_width }
    }

    pub fn for_shape(shape: &Shape) -> Self {
        let (x0, y0, x1, y1) = shape.bbox();
        let c = Complex64::new((x0 + x1) / 2.0, (y0 + y1) / 2.0);
        Self::new(c, ((x1 - x0).max(y1 - y0) / 2.0) * 1.000_001)
    }

    fn is_new(level: u32, i: i64, j: i64) -> bool {
        level == 0 || i % 2 != 0 || j % 2 != 0
    }

    fn angle(i: i64, j: i64) -> f64 {
        let a = (j as f64).atan2(i as f64);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }

    fn ring_points(level: u32, k: i64) -> Vec<(i64, i64)> {
        if k == 0 {
            return if level == 0 { vec![(0, 0)] } else { vec![] };
        }
        let mut v = Vec::with_capacity(8 * k as usize);
        for t in -k..=k {
            v.push((t, -k));
            v.push((t, k));
        }
        for t in -k + 1..k {
            v.push((-k, t));
            v.push((k, t));
        }
        v.retain(|&(i, j)| Self::is_new(level, i, j));
        v.sort_by(|a, b| Self::angle(a.0, a.1).total_cmp(&Self::angle(b.0, b.1)));
        v
    }

    fn ring_count(level: u32, k: i64) -> u64 {
        match (level, k) {
            (0, 0) => 1,
            (_, 0) => 0,
            (0, _) => 8 * k as u64,
            _ if k % 2 != 0 => 8 * k as u64,
            _ => 4 * k as u64,
        }
    }

    fn points_before_level(level: u32) -> u64 {
        if level == 0 {
            0
        } else {
            let n = 1u64 << (level - 1);
            (2 * n + 1) * (2 * n + 1)
        }
    }

    /// Rank of the grid point `(i, j)` at spacing `half_width / 2^level`.
    pub fn rank_of(level: u32, i: i64, j: i64) -> Option<u64> {
        let n = 1i64 << level;
        if i.abs() > n || j.abs() > n || !Self::is_new(level, i, j) {
            return None;
        }
        let k = i.abs().max(j.abs());
        let mut r = Self::points_before_level(level);
        for m in 0..k {
            r += Self::ring_count(level, m);
        }
        let pos = Self::ring_points(level, k)
            .iter()
            .position(|&p| p == (i, j))?;
        Some(r + pos as u64)
    }

    pub fn point(&self, rank: u64) -> Complex64 {
        let mut level = 0;
        while Self::points_before_level(level + 1) <= rank {
            level += 1;
        }
        let mut r = rank - Self::points_before_level(level);
        let mut k = 0;
        while Self::ring_count(level, k) <= r {
            r -= Self::ring_count(level, k);
            k += 1;
        }
        let (i, j) = Self::ring_points(level, k)[r as usize];
        self.grid(level, i, j)
    }

    fn grid(&self, level: u32, i: i64, j: i64) -> Complex64 {
        let s = self.half_width / (1u64 << level) as f64;
        self.center + Complex64::new(i as f64 * s, j as f64 * s)
    }

    /// Smallest rank of a point lying in a hexagon of `region`.
    pub fn min_rank_in(&self, region: &JordanSet) -> Option<u64> {
        let mesh = region.mesh;
        let (x0, x1, y0, y1) = region.lattice_extent();
        let (px0, px1) = (x0 as f64 * mesh / 2.0, x1 as f64 * mesh / 2.0);
        let sq = 3f64.sqrt() / 2.0 * mesh;
        let (py0, py1) = (y0 as f64 * sq, y1 as f64 * sq);
        let mut level = 0;
        loop {
            let n = 1i64 << level;
            let s = self.half_width / n as f64;
            let lo = |a: f64, c: f64| (((a - c) / s).ceil() as i64).max(-n);
            let hi = |a: f64, c: f64| (((a - c) / s).floor() as i64).min(n);
            let mut best: Option<(i64, f64, i64, i64)> = None;
            for i in lo(px0, self.center.re)..=hi(px1, self.center.re) {
                for j in lo(py0, self.center.im)..=hi(py1, self.center.im) {
                    if !Self::is_new(level, i, j) {
                        continue;
                    }
                    if !region.contains(HexCoord::containing(self.grid(level, i, j), mesh)) {
                        continue;
                    }
                    let key = (i.abs().max(j.abs()), Self::angle(i, j), i, j);
                    if best.is_none_or(|b| (key.0, key.1) < (b.0, b.1)) {
                        best = Some(key);
                    }
                }
            }
            if let Some((_, _, i, j)) = best {
                return Self::rank_of(level, i, j);
            }
            if s < mesh / 4.0 || level >= 40 {
                return None;
            }
            level += 1;
        }
    }
}

/// Exact integer form of `d_m`: `max(dX^2, 3 dY^2)` on the vertex grid, so
/// that `d_m = sqrt(key) * mesh / 2`.
pub fn dm_key(extent: (i64, i64, i64, i64)) -> i64 {
    let dx = extent.1 - extent.0;
    let dy = extent.3 - extent.2;
    (dx * dx).max(3 * dy * dy)
}

pub fn dm_from_key(key: i64, mesh: f64) -> f64 {
    (key as f64).sqrt() * mesh / 2.0
}

fn extent_of<I: IntoIterator<Item = HexVertex>>(vs: I) -> (i64, i64, i64, i64) {
    let mut e = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
    for v in vs {
        let (x, y) = v.lattice_xy();
        e = (e.0.min(x), e.1.max(x), e.2.min(y), e.3.max(y));
    }
    e
}

fn vertex_key(v: HexVertex) -> (i64, i64, u8) {
    let (x, y) = v.lattice_xy();
    (x, y, v.parity as u8)
}

/// Ordering data of a queued domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueueKey {
    pub dm_key: i64,
    pub rank: Option<u64>,
    pub lex: (i64, i64, u8),
}

impl QueueKey {
    /// Larger `d_m` first, then smaller rank (an absent rank loses), then
    /// smaller boundary vertex.
    pub fn priority_cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .dm_key
            .cmp(&self.dm_key)
            .then_with(|| match (self.rank, other.rank) {
                (Some(a), Some(b)) => a.cmp(&b),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, Some(_)) => std::cmp::Ordering::Greater,
                (None, None) => std::cmp::Ordering::Equal,
            })
            .then_with(|| self.lex.cmp(&other.lex))
    }
}

pub fn priority_order(entries: &mut [QueueKey]) {
    entries.sort_by(|a, b| a.priority_cmp(b));
}

/// Endpoints for a domain with monochromatic boundary: the e-vertex pair
/// maximising the dominant coordinate gap, then the other gap, then the
/// pair holding the point with smallest real and imaginary part.
pub fn choose_endpoints_mono(d: &JordanSet) -> Result<(HexVertex, HexVertex)> {
    let ev = d.e_vertices();
    if ev.len() < 2 {
        return Err(Error::TooFewEVertices);
    }
    let xy: Vec<(i64, i64)> = ev.iter().map(|v| v.lattice_xy()).collect();
    let (xmin, xmax) = (
        xy.iter().map(|p| p.0).min().unwrap(),
        xy.iter().map(|p| p.0).max().unwrap(),
    );
    let (ymin, ymax) = (
        xy.iter().map(|p| p.1).min().unwrap(),
        xy.iter().map(|p| p.1).max().unwrap(),
    );
    let dx = xmax - xmin;
    let dy = ymax - ymin;
    let by = |f: &dyn Fn(&(i64, i64)) -> bool| -> Vec<usize> {
        (0..ev.len()).filter(|&i| f(&xy[i])).collect()
    };
    // |Re| = dX/2, |Im| = dY*sqrt(3)/2
    let re_first = dx * dx >= 3 * dy * dy;
    let (lo_set, hi_set) = if re_first {
        (by(&|p| p.0 == xmin), by(&|p| p.0 == xmax))
    } else {
        (by(&|p| p.1 == ymin), by(&|p| p.1 == ymax))
    };
    let other = |i: usize, j: usize| {
        if re_first {
            (xy[i].1 - xy[j].1).abs()
        } else {
            (xy[i].0 - xy[j].0).abs()
        }
    };
    let mut best = -1;
    let mut pairs = Vec::new();
    for &i in &lo_set {
        for &j in &hi_set {
            let g = other(i, j);
            if g > best {
                best = g;
                pairs.clear();
            }
            if g == best {
                pairs.push((i, j));
            }
        }
    }
    let pos = |i: usize| (xy[i].0, xy[i].1);
    let pick = pairs
        .into_iter()
        .min_by_key(|&(i, j)| pos(i).min(pos(j)))
        .unwrap();
    let (a, b) = if pos(pick.0) <= pos(pick.1) {
        pick
    } else {
        (pick.1, pick.0)
    };
    Ok((ev[a], ev[b]))
}

/// Loop through an excursion, the exploration paths run in the regions it
/// cut off, and boundary edges of the parent domain. Boundary edges are
/// walked counterclockwise for a blue parent and clockwise for a yellow one.
pub fn paste_loop(
    exc: &Excursion,
    closing: &[ExplorationResult],
    d_parent: &JordanSet,
    parent_color: Color,
) -> Result<DiscreteLoop> {
    let mut known: FxHashMap<HexVertex, DirEdge> = FxHashMap::default();
    for e in exc
        .edges
        .iter()
        .chain(closing.iter().flat_map(|c| c.path.iter()))
    {
        if known.insert(e.tail(), *e).is_some() {
            return Err(Error::NotClosed("two pieces leave one vertex".into()));
        }
    }
    let cycle_edges = d_parent.boundary_cycle();
    let n = cycle_edges.len();
    let start = exc.endpoints.0;
    let mut v = start;
    let mut cycle = Vec::new();
    let mut boundary_len = 0;
    let cap = known.len() + n + 1;
    loop {
        let e = match known.get(&v) {
            Some(&e) => e,
            None => {
                let p = d_parent
                    .boundary_position(v)
                    .ok_or_else(|| Error::NotClosed("piece ends off the parent boundary".into()))?;
                boundary_len += 1;
                match parent_color {
                    Color::Blue => cycle_edges[p],
                    Color::Yellow => cycle_edges[(p + n - 1) % n].reversed(),
                }
            }
        };
        cycle.push(e);
        v = e.head();
        if v == start {
            break;
        }
        if cycle.len() > cap {
            return Err(Error::NotClosed("walk does not return to the start".into()));
        }
    }
    if cycle.len() - boundary_len != known.len() {
        return Err(Error::NotClosed("some pieces were not used".into()));
    }
    let mut lp = DiscreteLoop::from_cycle(cycle)?;
    lp.provenance = Some(LoopProvenance {
        step: 0,
        excursion_len: exc.edges.len(),
        closing_len: closing.iter().map(|c| c.path.len()).sum(),
        boundary_len,
    });
    Ok(lp)
}

enum Work {
    Domain(SubdomainRecord),
    /// An excursion of a monochromatic parent together with the mixed
    /// regions it cut off; processing it closes one loop.
    Loop {
        parent: Rc<JordanSet>,
        color: Color,
        excursion: Excursion,
        pockets: Vec<SubdomainRecord>,
        extent: (i64, i64, i64, i64),
    },
}

struct Entry {
    id: usize,
    work: Work,
    dm_key: i64,
    rank: Option<Option<u64>>,
    lex: (i64, i64, u8),
}

impl Entry {
    fn regions(&self) -> Vec<&JordanSet> {
        match &self.work {
            Work::Domain(r) => vec![&r.region],
            Work::Loop { pockets, .. } => pockets.iter().map(|p| &p.region).collect(),
        }
    }

    fn rank(&mut self, points: &DenseOrderedPoints) -> Option<u64> {
        if self.rank.is_none() {
            let r = self
                .regions()
                .iter()
                .filter_map(|g| points.min_rank_in(g))
                .min();
            self.rank = Some(r);
        }
        self.rank.unwrap()
    }

    fn key(&self) -> QueueKey {
        QueueKey {
            dm_key: self.dm_key,
            rank: self.rank.flatten(),
            lex: self.lex,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepRecord {
    pub domain_id: usize,
    pub dtype: DomainType,
    pub dm: f64,
    pub explorations: Vec<ExplorationResult>,
    /// Size of the region explored, or of the pockets for a loop step.
    pub hexes: usize,
}

#[derive(Debug, Clone)]
pub struct ConstructionResult {
    pub loops: Vec<DiscreteLoop>,
    pub steps: Vec<StepRecord>,
    pub k_steps_to_cutoff: usize,
    pub cutoff: f64,
    pub mesh: f64,
    /// Largest `d_m` left in the queue at termination.
    pub max_pending_dm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepWire {
    pub domain_id: usize,
    pub dtype: DomainType,
    pub dm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstructionWire {
    pub cutoff: f64,
    pub k_steps: usize,
    pub loops: Vec<LoopWire>,
    pub steps: Vec<StepWire>,
}

impl ConstructionResult {
    pub fn wire(&self) -> ConstructionWire {
        ConstructionWire {
            cutoff: self.cutoff,
            k_steps: self.k_steps_to_cutoff,
            loops: self.loops.iter().map(|l| l.wire()).collect(),
            steps: self
                .steps
                .iter()
                .map(|s| StepWire {
                    domain_id: s.domain_id,
                    dtype: s.dtype,
                    dm: s.dm,
                })
                .collect(),
        }
    }
}

struct Builder<'a> {
    col: &'a SiteColoring,
    queue: BTreeMap<i64, Vec<Entry>>,
    next_id: usize,
}

impl Builder<'_> {
    fn push(&mut self, work: Work) {
        let (dm_key, lex) = match &work {
            Work::Domain(r) => (
                dm_key(r.region.lattice_extent()),
                vertex_key(r.region.boundary_cycle()[0].tail()),
            ),
            Work::Loop {
                excursion, extent, ..
            } => (dm_key(*extent), vertex_key(excursion.endpoints.0)),
        };
        let id = self.next_id;
        self.next_id += 1;
        self.queue.entry(dm_key).or_default().push(Entry {
            id,
            work,
            dm_key,
            rank: None,
            lex,
        });
    }

    fn pop(&mut self, points: &DenseOrderedPoints) -> Option<Entry> {
        let mut slot = self.queue.last_entry()?;
        let bucket = slot.get_mut();
        let idx = if bucket.len() == 1 {
            0
        } else {
            for e in bucket.iter_mut() {
                e.rank(points);
            }
            (0..bucket.len())
                .min_by(|&i, &j| bucket[i].key().priority_cmp(&bucket[j].key()))
                .unwrap()
        };
        let e = bucket.swap_remove(idx);
        if bucket.is_empty() {
            slot.remove();
        }
        Some(e)
    }

    /// Explores a monochromatic domain and queues what it leaves behind.
    fn mono_step(
        &mut self,
        d: Rc<JordanSet>,
        color: Color,
        x: HexVertex,
        y: HexVertex,
    ) -> Result<ExplorationResult> {
        let res = explore(&d, x, y, self.col)?;
        let comps = components_after(&d, &res, self.col)?;
        let side = if color == Color::Blue {
            Side::Left
        } else {
            Side::Right
        };
        let excursions = split_excursions(&res, &d, side);
        let n = d.boundary_cycle().len();
        // boundary positions enclosed by each excursion
        let segments: Vec<(usize, usize)> = excursions
            .iter()
            .map(|ex| {
                let p0 = d
                    .boundary_position(ex.endpoints.0)
                    .expect("excursion starts on the boundary");
                let p1 = d
                    .boundary_position(ex.endpoints.1)
                    .expect("excursion ends on the boundary");
                match side {
                    Side::Left => (p1, (p0 + n - p1) % n),
                    Side::Right => (p0, (p1 + n - p0) % n),
                }
            })
            .collect();
        let mut pockets: Vec<Vec<SubdomainRecord>> = vec![Vec::new(); excursions.len()];
        for c in comps {
            if c.dtype != DomainType::T1 {
                self.push(Work::Domain(c));
                continue;
            }
            let p = d
                .boundary_cycle()
                .iter()
                .position(|e| c.region.contains(e.left))
                .ok_or_else(|| {
                    Error::InconsistentInput("mixed region away from the parent boundary".into())
                })?;
            let k = segments
                .iter()
                .position(|&(s, len)| (p + n - s) % n < len)
                .ok_or_else(|| {
                    Error::InconsistentInput("mixed region outside every excursion".into())
                })?;
            pockets[k].push(c);
        }
        for (k, ex) in excursions.into_iter().enumerate() {
            let (s, len) = segments[k];
            let arc = (0..=len).map(|t| d.boundary_cycle()[(s + t) % n].tail());
            let verts = ex
                .edges
                .iter()
                .map(|e| e.tail())
                .chain([ex.endpoints.1])
                .chain(arc);
            let extent = extent_of(verts);
            let pk = std::mem::take(&mut pockets[k]);
            self.push(Work::Loop {
                parent: d.clone(),
                color,
                excursion: ex,
                pockets: pk,
                extent,
            });
        }
        Ok(res)
    }

    fn mixed_step(
        &mut self,
        region: &JordanSet,
        a: HexVertex,
        b: HexVertex,
    ) -> Result<ExplorationResult> {
        let res = explore(region, b, a, self.col)?;
        for c in components_after(region, &res, self.col)? {
            if c.dtype == DomainType::T1 {
                return Err(Error::InconsistentInput(
                    "mixed region inside a mixed region".into(),
                ));
            }
            self.push(Work::Domain(c));
        }
        Ok(res)
    }
}

/// The discretised shape and its colouring with the boundary condition on the s-boundary.
pub fn prepare(
    shape: &Shape,
    mesh: f64,
    seed: u64,
    bc: Color,
) -> Result<(JordanSet, SiteColoring)> {
    let d = discretize_domain(shape, mesh)?;
    let col = SiteColoring::new(seed).with_overrides(d.s_boundary().iter().map(|&h| (h, bc)));
    Ok((d, col))
}

/// Initial endpoints: e-vertices closest to the lowest and highest points of the shape.
pub fn initial_endpoints(shape: &Shape, d: &JordanSet) -> Result<(HexVertex, HexVertex)> {
    let (lo, hi) = shape.bottom_top();
    let x = d.nearest_e_vertex(lo)?;
    let y = d.nearest_e_vertex(hi)?;
    if x == y {
        return Err(Error::InvalidEndpoints("initial endpoints coincide".into()));
    }
    Ok((x, y))
}

pub fn run_full_construction(
    shape: &Shape,
    mesh: f64,
    eps: f64,
    seed: u64,
    bc: Color,
) -> Result<ConstructionResult> {
    if eps <= 3.0 * mesh {
        return Err(Error::CutoffTooFine { eps, mesh });
    }
    let (d, col) = prepare(shape, mesh, seed, bc)?;
    let (x, y) = initial_endpoints(shape, &d)?;
    run_construction(
        d,
        &col,
        eps,
        bc,
        (x, y),
        &DenseOrderedPoints::for_shape(shape),
    )
}

/// The construction on a prepared domain; `col` must carry the boundary
/// colour `bc` on the s-boundary of `d`.
pub fn run_construction(
    d: JordanSet,
    col: &SiteColoring,
    eps: f64,
    bc: Color,
    (x, y): (HexVertex, HexVertex),
    points: &DenseOrderedPoints,
) -> Result<ConstructionResult> {
    let mesh = d.mesh;
    if eps <= 3.0 * mesh {
        return Err(Error::CutoffTooFine { eps, mesh });
    }
    let mut b = Builder {
        col,
        queue: BTreeMap::new(),
        next_id: 1,
    };
    let d = Rc::new(d);
    let dm0 = d.d_m();
    let size0 = d.len();
    let first = b.mono_step(d, bc, x, y)?;
    let mut steps = vec![StepRecord {
        domain_id: 0,
        dtype: DomainType::T2,
        dm: dm0,
        explorations: vec![first],
        hexes: size0,
    }];
    let mut loops = Vec::new();
    // d_m >= eps / sqrt(2)  <=>  key * (mesh/2)^2 >= eps^2 / 2
    let threshold = |key: i64| key as f64 * mesh * mesh / 4.0 >= eps * eps / 2.0 * (1.0 - 1e-12);
    while let Some((&key, _)) = b.queue.last_key_value() {
        if !threshold(key) {
            break;
        }
        let entry = b.pop(points).unwrap();
        let dm = dm_from_key(entry.dm_key, mesh);
        match entry.work {
            Work::Domain(rec) => {
                let BoundaryCondition::Mono { color, .. } = rec.bc else {
                    return Err(Error::InconsistentInput("mixed region queued alone".into()));
                };
                let (a, bb) = choose_endpoints_mono(&rec.region)?;
                let hexes = rec.region.len();
                let res = b.mono_step(Rc::new(rec.region), color, a, bb)?;
                steps.push(StepRecord {
                    domain_id: entry.id,
                    dtype: rec.dtype,
                    dm,
                    explorations: vec![res],
                    hexes,
                });
            }
            Work::Loop {
                parent,
                color,
                excursion,
                mut pockets,
                ..
            } => {
                pockets.sort_by(|p, q| {
                    let kp = QueueKey {
                        dm_key: dm_key(p.region.lattice_extent()),
                        rank: None,
                        lex: vertex_key(p.region.boundary_cycle()[0].tail()),
                    };
                    let kq = QueueKey {
                        dm_key: dm_key(q.region.lattice_extent()),
                        rank: None,
                        lex: vertex_key(q.region.boundary_cycle()[0].tail()),
                    };
                    kp.priority_cmp(&kq)
                });
                let mut closing = Vec::new();
                let mut hexes = 0;
                for p in &pockets {
                    let BoundaryCondition::PlusMinus { a, b: bb } = p.bc else {
                        unreachable!()
                    };
                    hexes += p.region.len();
                    closing.push(b.mixed_step(&p.region, a, bb)?);
                }
                let mut lp = paste_loop(&excursion, &closing, &parent, color)?;
                if let Some(pv) = lp.provenance.as_mut() {
                    pv.step = steps.len();
                }
                loops.push(lp);
                steps.push(StepRecord {
                    domain_id: entry.id,
                    dtype: DomainType::T1,
                    dm,
                    explorations: closing,
                    hexes,
                });
            }
        }
    }
    let max_pending_dm = b
        .queue
        .last_key_value()
        .map(|(&k, _)| dm_from_key(k, mesh))
        .unwrap_or(0.0);
    Ok(ConstructionResult {
        loops,
        k_steps_to_cutoff: steps.len(),
        steps,
        cutoff: eps,
        mesh,
        max_pending_dm,
    })
}

/// Rebuilds the exploration path of `d` from `a` to `b` out of the maximal
/// portions of contours running through the interior of `d`, joined by
/// boundary edges. Only contours of diameter above `eps` contribute; at
/// `eps` below one mesh unit the result is the exploration path itself.
pub fn reconstruct_chordal_path(
    cs: &ContourSet,
    d: &JordanSet,
    a: HexVertex,
    b: HexVertex,
    eps: f64,
) -> Result<Vec<DirEdge>> {
    let pa = d.boundary_position(a).filter(|_| d.is_e_vertex(a));
    let pb = d.boundary_position(b).filter(|_| d.is_e_vertex(b));
    let (Some(pa), Some(pb)) = (pa, pb) else {
        return Err(Error::InvalidEndpoints(
            "endpoint is not an e-vertex".into(),
        ));
    };
    if pa == pb {
        return Err(Error::InvalidEndpoints("a and b coincide".into()));
    }
    let interior = |e: &DirEdge| d.contains(e.left) && d.contains(e.right);
    let mut portions: FxHashMap<HexVertex, Vec<DirEdge>> = FxHashMap::default();
    let mut interior_edges: FxHashMap<(HexCoord, HexCoord), DirEdge> = FxHashMap::default();
    let mut boundary_out: FxHashMap<HexVertex, DirEdge> = FxHashMap::default();
    let mut add_runs = |edges: &[DirEdge], cyclic: bool| -> Result<()> {
        let n = edges.len();
        let offset = if cyclic {
            match (0..n).find(|&i| !interior(&edges[i])) {
                Some(i) => i + 1,
                None => return Ok(()),
            }
        } else {
            0
        };
        let mut run: Vec<DirEdge> = Vec::new();
        let mut flush = |run: &mut Vec<DirEdge>| -> Result<()> {
            if let Some(first) = run.first() {
                let start = first.tail();
                if !d.on_boundary(start) {
                    return Err(Error::InconsistentInput(
                        "interior portion starts inside the domain".into(),
                    ));
                }
                if portions.insert(start, std::mem::take(run)).is_some() {
                    return Err(Error::InconsistentInput(
                        "two portions start at one vertex".into(),
                    ));
                }
            }
            Ok(())
        };
        for t in 0..n {
            let e = edges[(offset + t) % n];
            if interior(&e) {
                interior_edges.insert(e.undirected(), e);
                run.push(e);
            } else {
                flush(&mut run)?;
                if d.contains(e.left) != d.contains(e.right) {
                    boundary_out.insert(e.tail(), e);
                }
            }
        }
        flush(&mut run)
    };
    for l in &cs.loops {
        if l.diameter(d.mesh) > eps {
            add_runs(&l.cycle, true)?;
        }
    }
    for c in &cs.open {
        let pts: Vec<(i64, i64)> = c.iter().map(|e| e.tail().lattice_xy()).collect();
        if lattice_diameter(&pts) * d.mesh > eps {
            add_runs(c, false)?;
        }
    }
    let cyc = d.boundary_cycle();
    let n = cyc.len();
    let span = (pb + n - pa) % n;
    let forward = |v: HexVertex| -> Option<DirEdge> { d.boundary_position(v).map(|p| cyc[p]) };
    let backward = |v: HexVertex| -> Option<DirEdge> {
        d.boundary_position(v)
            .map(|p| cyc[(p + n - 1) % n].reversed())
    };
    let first_ccw = match boundary_out.get(&a) {
        Some(e) if Some(*e) == forward(a) => true,
        Some(e) if Some(*e) == backward(a) => false,
        _ => first_move_from_portions(d, &interior_edges, pa, pb)?,
    };
    let mut path: Vec<DirEdge> = Vec::new();
    let mut v = a;
    let cap = interior_edges.len() + n + 1;
    while v != b {
        if let Some(run) = portions.get(&v) {
            path.extend(run);
        } else {
            let p = d
                .boundary_position(v)
                .ok_or_else(|| Error::InconsistentInput("portion ends inside the domain".into()))?;
            let on_right = if v == a {
                first_ccw
            } else {
                (p + n - pa) % n < span
            };
            path.push(if on_right {
                forward(v).unwrap()
            } else {
                backward(v).unwrap()
            });
        }
        v = path.last().unwrap().head();
        if path.len() > cap {
            return Err(Error::InconsistentInput(
                "reconstruction does not reach b".into(),
            ));
        }
    }
    Ok(path)
}

/// Whether the path leaves `a` along the counterclockwise arc, read off the
/// first interior interface met along the boundary in either direction.
fn first_move_from_portions(
    d: &JordanSet,
    interior_edges: &FxHashMap<(HexCoord, HexCoord), DirEdge>,
    pa: usize,
    pb: usize,
) -> Result<bool> {
    let cyc = d.boundary_cycle();
    let n = cyc.len();
    let probe = |p: usize| -> Option<DirEdge> {
        // the interior edge at a boundary vertex joins its two inside hexagons
        let v = cyc[p].tail();
        let inside: Vec<HexCoord> = v.hexes().into_iter().filter(|h| d.contains(*h)).collect();
        (inside.len() == 2)
            .then(|| {
                let key = if inside[0] < inside[1] {
                    (inside[0], inside[1])
                } else {
                    (inside[1], inside[0])
                };
                interior_edges.get(&key).copied()
            })
            .flatten()
    };
    let mut p = (pa + 1) % n;
    while p != pb {
        if let Some(e) = probe(p) {
            return Ok(e.tail() == cyc[p].tail());
        }
        p = (p + 1) % n;
    }
    let mut p = (pa + n - 1) % n;
    while p != pb {
        if let Some(e) = probe(p) {
            return Ok(e.tail() != cyc[p].tail());
        }
        p = (p + n - 1) % n;
    }
    Err(Error::InconsistentInput(
        "no interface reaches the boundary; first step undetermined".into(),
    ))
}
