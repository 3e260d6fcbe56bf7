//! The exploration process between two e-vertices, its excursions, and the
//! subdomains it leaves behind.

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::domain::{components, JordanSet};
use crate::error::{Error, Result};
use crate::lattice::{Color, Coloring, DirEdge, HexCoord, HexVertex};

#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationResult {
    pub x: HexVertex,
    pub y: HexVertex,
    /// Edges from `x` to `y`; the off-boundary edges at the endpoints are not included.
    pub path: Vec<DirEdge>,
    /// Hexagons on the right of the path, in order of first contact.
    pub gamma_b: Vec<HexCoord>,
    pub gamma_y: Vec<HexCoord>,
    /// Interior hexagons whose colour had to be looked up.
    pub flips: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExplorationWire {
    pub path: Vec<[i64; 4]>,
    #[serde(rename = "gammaB")]
    pub gamma_b: Vec<[i32; 2]>,
    #[serde(rename = "gammaY")]
    pub gamma_y: Vec<[i32; 2]>,
    pub flips: usize,
}

impl ExplorationResult {
    pub fn wire(&self) -> ExplorationWire {
        ExplorationWire {
            path: self.path.iter().map(|e| e.wire()).collect(),
            gamma_b: self.gamma_b.iter().map(|h| [h.q, h.r]).collect(),
            gamma_y: self.gamma_y.iter().map(|h| [h.q, h.r]).collect(),
            flips: self.flips,
        }
    }

    pub fn explored(&self) -> FxHashSet<HexCoord> {
        self.gamma_b.iter().chain(&self.gamma_y).copied().collect()
    }

    /// Vertices visited by the path, starting at `x` and ending at `y`.
    pub fn vertices(&self) -> Vec<HexVertex> {
        let mut v = Vec::with_capacity(self.path.len() + 1);
        v.push(self.x);
        v.extend(self.path.iter().map(|e| e.head()));
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Excursion {
    pub side: Side,
    pub edges: Vec<DirEdge>,
    pub endpoints: (HexVertex, HexVertex),
    /// Index of the first edge within the path.
    pub start: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainType {
    T1,
    T2,
    T3,
    T4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Cw,
    Ccw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryCondition {
    /// Mixed boundary; the next exploration runs from `b` to `a` with the
    /// blue part of the s-boundary on its right.
    PlusMinus { a: HexVertex, b: HexVertex },
    Mono {
        color: Color,
        orientation: Orientation,
    },
}

impl BoundaryCondition {
    pub fn mono(color: Color) -> Self {
        let orientation = match color {
            Color::Blue => Orientation::Cw,
            Color::Yellow => Orientation::Ccw,
        };
        BoundaryCondition::Mono { color, orientation }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Excursion {
        side: Side,
        index: usize,
    },
    /// The two explored hexagons whose near-touch closed the component off.
    Pinch(HexCoord, HexCoord),
    /// The component is not bounded by any excursion of the relevant side.
    Boundary,
}

#[derive(Debug, Clone)]
pub struct SubdomainRecord {
    pub region: JordanSet,
    pub dtype: DomainType,
    pub bc: BoundaryCondition,
    pub provenance: Provenance,
}

/// Hexagons of the s-boundary of `d` on the counterclockwise arc from `x` to `y`.
pub fn right_arc(d: &JordanSet, x: HexVertex, y: HexVertex) -> Result<FxHashSet<HexCoord>> {
    let ev = d.e_vertices();
    let ix = ev.iter().position(|&v| v == x);
    let iy = ev.iter().position(|&v| v == y);
    let (Some(ix), Some(iy)) = (ix, iy) else {
        return Err(Error::InvalidEndpoints(
            "endpoint is not an e-vertex".into(),
        ));
    };
    if ix == iy {
        return Err(Error::InvalidEndpoints("x and y coincide".into()));
    }
    let n = ev.len();
    let sb = d.s_boundary();
    let mut out = FxHashSet::default();
    let mut i = ix;
    while i != iy {
        out.insert(sb[i]);
        i = (i + 1) % n;
    }
    Ok(out)
}

/// Runs the exploration process in `d` from `x` to `y`. Interior colours come
/// from `col`; the s-boundary is coloured blue on the counterclockwise arc
/// from `x` to `y` and yellow on the other, whatever `col` says there.
pub fn explore<C: Coloring + ?Sized>(
    d: &JordanSet,
    x: HexVertex,
    y: HexVertex,
    col: &C,
) -> Result<ExplorationResult> {
    let right = right_arc(d, x, y)?;
    let color = |h: HexCoord| {
        if d.contains(h) {
            col.color_of(h)
        } else if right.contains(&h) {
            Color::Blue
        } else {
            Color::Yellow
        }
    };
    let mut e = d
        .entry_edge(x)
        .ok_or_else(|| Error::InvalidEndpoints("x is not an e-vertex".into()))?;
    let mut path = Vec::new();
    let mut gamma_b = Vec::new();
    let mut gamma_y = Vec::new();
    let mut seen = FxHashSet::default();
    let mut flips = 0;
    let cap = 3 * d.len() + d.boundary_cycle().len() + 6;
    loop {
        let xi = e.hex_ahead();
        if !d.contains(xi) && !d.s_boundary().contains(&xi) {
            return Err(Error::InconsistentInput(
                "exploration left the domain".into(),
            ));
        }
        if seen.insert(xi) && d.contains(xi) {
            flips += 1;
        }
        e = if color(xi) == Color::Blue {
            DirEdge::new(xi, e.left)
        } else {
            DirEdge::new(e.right, xi)
        };
        path.push(e);
        if path.len() > cap {
            return Err(Error::InconsistentInput(
                "exploration did not reach y".into(),
            ));
        }
        if e.head() == y {
            break;
        }
    }
    let mut on_b = FxHashSet::default();
    let mut on_y = FxHashSet::default();
    for e in &path {
        if on_b.insert(e.right) {
            gamma_b.push(e.right);
        }
        if on_y.insert(e.left) {
            gamma_y.push(e.left);
        }
    }
    Ok(ExplorationResult {
        x,
        y,
        path,
        gamma_b,
        gamma_y,
        flips,
    })
}

/// Whether a path edge of an exploration in `d` runs along the given boundary arc.
pub fn on_arc(d: &JordanSet, e: DirEdge, side: Side) -> bool {
    match side {
        Side::Left => !d.contains(e.left),
        Side::Right => !d.contains(e.right),
    }
}

/// Maximal runs of path edges avoiding the boundary arc on `side`.
pub fn split_excursions(res: &ExplorationResult, d: &JordanSet, side: Side) -> Vec<Excursion> {
    let mut out = Vec::new();
    let mut i = 0;
    let p = &res.path;
    while i < p.len() {
        if on_arc(d, p[i], side) {
            i += 1;
            continue;
        }
        let start = i;
        while i < p.len() && !on_arc(d, p[i], side) {
            i += 1;
        }
        let edges = p[start..i].to_vec();
        let endpoints = (edges[0].tail(), edges[edges.len() - 1].head());
        out.push(Excursion {
            side,
            edges,
            endpoints,
            start,
        });
    }
    out
}

/// Runs of colour along a cyclic sequence of s-boundary hexagons, as
/// `(start index, colour)` pairs.
fn color_runs<C: Coloring + ?Sized>(sb: &[HexCoord], col: &C) -> Vec<(usize, Color)> {
    let n = sb.len();
    let c: Vec<Color> = sb.iter().map(|&h| col.color_of(h)).collect();
    let runs: Vec<(usize, Color)> = (0..n)
        .filter(|&i| c[i] != c[(i + n - 1) % n])
        .map(|i| (i, c[i]))
        .collect();
    if runs.is_empty() {
        vec![(0, c[0])]
    } else {
        runs
    }
}

/// Classifies a Jordan set by the real colours of its s-boundary. `parent`
/// decides between the two kinds of monochromatic component.
pub fn classify<C: Coloring + ?Sized>(
    region: &JordanSet,
    parent: &JordanSet,
    col: &C,
) -> Result<(DomainType, BoundaryCondition)> {
    let sb = region.s_boundary();
    let ev = region.e_vertices();
    let runs = color_runs(sb, col);
    match runs.len() {
        1 => {
            let color = runs[0].1;
            let touches_parent_boundary = sb.iter().any(|h| !parent.contains(*h));
            let dtype = if touches_parent_boundary {
                DomainType::T2
            } else if color == Color::Yellow {
                DomainType::T3
            } else {
                DomainType::T4
            };
            Ok((dtype, BoundaryCondition::mono(color)))
        }
        2 => {
            let (blue_start, yellow_start) = if runs[0].1 == Color::Blue {
                (runs[0].0, runs[1].0)
            } else {
                (runs[1].0, runs[0].0)
            };
            Ok((
                DomainType::T1,
                BoundaryCondition::PlusMinus {
                    a: ev[yellow_start],
                    b: ev[blue_start],
                },
            ))
        }
        k => Err(Error::InconsistentInput(format!(
            "s-boundary has {k} colour runs"
        ))),
    }
}

/// Components of `d` minus the explored hexagons, typed by their boundary colours.
pub fn components_after<C: Coloring + ?Sized>(
    d: &JordanSet,
    res: &ExplorationResult,
    col: &C,
) -> Result<Vec<SubdomainRecord>> {
    let explored = res.explored();
    let rest: FxHashSet<HexCoord> = d
        .hexes()
        .iter()
        .copied()
        .filter(|h| !explored.contains(h))
        .collect();
    let mut first_touch: FxHashMap<HexCoord, usize> = FxHashMap::default();
    for (i, e) in res.path.iter().enumerate() {
        first_touch.entry(e.right).or_insert(i);
        first_touch.entry(e.left).or_insert(i);
    }
    let right = right_arc(d, res.x, res.y)?;
    let mut excursions = [
        split_excursions(res, d, Side::Left),
        split_excursions(res, d, Side::Right),
    ];
    let mut out = Vec::new();
    for comp in components(&rest) {
        let region = JordanSet::from_hexes(comp, d.mesh)?;
        let (dtype, bc) = classify(&region, d, col)?;
        let outside: Vec<HexCoord> = region
            .s_boundary()
            .iter()
            .copied()
            .filter(|h| !d.contains(*h))
            .collect();
        let provenance = if outside.is_empty() {
            pinch_of(&region, &first_touch)
        } else {
            let side = if right.contains(&outside[0]) {
                Side::Right
            } else {
                Side::Left
            };
            let exc = &mut excursions[(side == Side::Right) as usize];
            excursion_of(&region, exc, side)
        };
        out.push(SubdomainRecord {
            region,
            dtype,
            bc,
            provenance,
        });
    }
    Ok(out)
}

fn pinch_of(region: &JordanSet, first_touch: &FxHashMap<HexCoord, usize>) -> Provenance {
    let sb = region.s_boundary();
    let n = sb.len();
    let mut best: Option<(usize, HexCoord, HexCoord)> = None;
    for i in 0..n {
        let (a, b) = (sb[i], sb[(i + 1) % n]);
        let (Some(&ta), Some(&tb)) = (first_touch.get(&a), first_touch.get(&b)) else {
            continue;
        };
        let gap = ta.abs_diff(tb);
        if best.is_none_or(|(g, _, _)| gap > g) {
            best = Some((gap, a.min(b), a.max(b)));
        }
    }
    match best {
        Some((_, a, b)) => Provenance::Pinch(a, b),
        None => Provenance::Boundary,
    }
}

fn excursion_of(region: &JordanSet, excursions: &mut [Excursion], side: Side) -> Provenance {
    let sb: FxHashSet<HexCoord> = region.s_boundary().iter().copied().collect();
    for (index, exc) in excursions.iter().enumerate() {
        if exc
            .edges
            .iter()
            .any(|e| sb.contains(&e.right) || sb.contains(&e.left))
        {
            return Provenance::Excursion { side, index };
        }
    }
    Provenance::Boundary
}
