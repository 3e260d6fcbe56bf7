//! Monte Carlo estimators built on the lattice, the loop oracle and the construction.

pub mod arms;
pub mod metrics;
pub mod steps;

use std::collections::VecDeque;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{discretize_domain, JordanSet, Shape};
use crate::lattice::{split_seed, Color, HexCoord, SiteColoring, NEIGHBOR_OFFSETS};
use crate::oracle::{extract_contours, nesting_forest, ContourSet, DiscreteLoop};
use crate::stats::{wilson, EstimateWithCI, Z95};
use crate::{Error, Result};

/// Hexagons of a bounded region on a dense axial grid. Each site carries a class byte,
/// 0 meaning "not part of the patch".
#[derive(Clone, Debug)]
pub(crate) struct Patch {
    q0: i32,
    r0: i32,
    nq: usize,
    nr: usize,
    pub class: Vec<u8>,
}

impl Patch {
    /// Classifies every hexagon whose centre lies in the box by `f(centre)`.
    pub fn from_fn(
        bbox: (f64, f64, f64, f64),
        mesh: f64,
        f: impl Fn(HexCoord, Complex64) -> u8,
    ) -> Self {
        let (x0, y0, x1, y1) = bbox;
        let q0 = (x0 / (1.5 * mesh)).floor() as i32 - 1;
        let q1 = (x1 / (1.5 * mesh)).ceil() as i32 + 1;
        // r = y / (sqrt3 mesh) - q / 2
        let s = 3f64.sqrt() * mesh;
        let r0 = (y0 / s - q1 as f64 / 2.0).floor() as i32 - 1;
        let r1 = (y1 / s - q0 as f64 / 2.0).ceil() as i32 + 1;
        let nq = (q1 - q0 + 1) as usize;
        let nr = (r1 - r0 + 1) as usize;
        let mut class = vec![0u8; nq * nr];
        for j in 0..nr {
            for i in 0..nq {
                let h = HexCoord::new(q0 + i as i32, r0 + j as i32);
                class[j * nq + i] = f(h, h.center(mesh));
            }
        }
        Patch {
            q0,
            r0,
            nq,
            nr,
            class,
        }
    }

    /// The lattice rhombus 0 ≤ q, r < n, all sites of class 1.
    pub fn rhombus(n: usize) -> Self {
        Patch {
            q0: 0,
            r0: 0,
            nq: n,
            nr: n,
            class: vec![1; n * n],
        }
    }

    pub fn len(&self) -> usize {
        self.class.len()
    }

    pub fn hex(&self, idx: usize) -> HexCoord {
        HexCoord::new(
            self.q0 + (idx % self.nq) as i32,
            self.r0 + (idx / self.nq) as i32,
        )
    }

    #[inline]
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = ((idx % self.nq) as i32, (idx / self.nq) as i32);
        NEIGHBOR_OFFSETS.iter().filter_map(move |&(dq, dr)| {
            let (a, b) = (i + dq, j + dr);
            (a >= 0 && b >= 0 && (a as usize) < self.nq && (b as usize) < self.nr)
                .then(|| b as usize * self.nq + a as usize)
        })
    }

    /// Site colours of the whole grid.
    pub fn colors(&self, col: &SiteColoring) -> Vec<Color> {
        (0..self.len()).map(|i| col.color(self.hex(i))).collect()
    }

    /// Whether a path of sites accepted by `allowed` joins a source to a target.
    pub fn connects(
        &self,
        allowed: impl Fn(usize) -> bool,
        source: impl Fn(usize) -> bool,
        target: impl Fn(usize) -> bool,
    ) -> bool {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::new();
        for i in 0..self.len() {
            if allowed(i) && source(i) {
                if target(i) {
                    return true;
                }
                seen[i] = true;
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            for n in self.neighbors(i) {
                if !seen[n] && allowed(n) {
                    if target(n) {
                        return true;
                    }
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        false
    }
}

/// Sample seeds derived from `seed0` with the counter-based splitter.
pub fn sample_seeds(seed0: u64, n: usize) -> Vec<u64> {
    (0..n as u64).map(|i| split_seed(seed0, i)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CrossingShape {
    /// Lattice-aligned rhombus of n × n hexagons; crossing between the q = 0 and q = n − 1 sides.
    Rhombus { n: usize },
    /// Rectangle of height 1 and width `aspect`; crossing between the vertical sides.
    Rectangle { aspect: f64 },
}

struct CrossingSetup {
    patch: Patch,
    left: Vec<bool>,
    right: Vec<bool>,
}

fn crossing_setup(shape: CrossingShape, mesh: f64) -> Result<CrossingSetup> {
    let patch = match shape {
        CrossingShape::Rhombus { n } => {
            if n < 2 {
                return Err(Error::config("n", "rhombus side must be at least 2"));
            }
            Patch::rhombus(n)
        }
        CrossingShape::Rectangle { aspect } => {
            if !(aspect > 0.0) || !(mesh > 0.0) || mesh * 8.0 > aspect.min(1.0) {
                return Err(Error::config(
                    "delta",
                    "rectangle must span at least 8 mesh units",
                ));
            }
            let eps = 1e-9 * mesh;
            Patch::from_fn((0.0, 0.0, aspect, 1.0), mesh, |_, c| {
                (c.re >= -eps && c.re <= aspect + eps && c.im >= -eps && c.im <= 1.0 + eps) as u8
            })
        }
    };
    let inside: Vec<usize> = (0..patch.len()).filter(|&i| patch.class[i] != 0).collect();
    let qmin = inside.iter().map(|&i| patch.hex(i).q).min().unwrap();
    let qmax = inside.iter().map(|&i| patch.hex(i).q).max().unwrap();
    let left = (0..patch.len())
        .map(|i| patch.class[i] != 0 && patch.hex(i).q == qmin)
        .collect();
    let right = (0..patch.len())
        .map(|i| patch.class[i] != 0 && patch.hex(i).q == qmax)
        .collect();
    Ok(CrossingSetup { patch, left, right })
}

fn crossed(s: &CrossingSetup, col: &SiteColoring) -> bool {
    let colors = s.patch.colors(col);
    s.patch.connects(
        |i| s.patch.class[i] != 0 && colors[i] == Color::Blue,
        |i| s.left[i],
        |i| s.right[i],
    )
}

/// Fraction of colourings with a blue crossing between the designated sides.
pub fn crossing_probability(
    shape: CrossingShape,
    mesh: f64,
    n_samples: usize,
    seed0: u64,
) -> Result<EstimateWithCI> {
    if n_samples < 100 {
        return Err(Error::config(
            "samples",
            "at least 100 samples are required",
        ));
    }
    let setup = crossing_setup(shape, mesh)?;
    let k = sample_seeds(seed0, n_samples)
        .into_par_iter()
        .filter(|&s| crossed(&setup, &SiteColoring::new(s)))
        .count();
    Ok(wilson(k, n_samples, Z95))
}

/// Cardy's probability of a crossing between the short sides of a rectangle of aspect
/// ratio `aspect` (width over height, crossing along the width).
///
/// The rectangle is the Schwarz–Christoffel image of the upper half-plane with corners
/// ±1, ±1/k, so aspect = 2K(k)/K(k′) and the cross-ratio is η = ((1 − k)/(1 + k))².
pub fn cardy_rectangle(aspect: f64) -> f64 {
    let k = modulus_for_aspect(aspect);
    let eta = ((1.0 - k) / (1.0 + k)).powi(2);
    cardy_eta(eta)
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    while (a - b).abs() > 1e-15 * a {
        let m = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = m;
    }
    a
}

/// Complete elliptic integral of the first kind, K(k) = π / (2 agm(1, k′)).
pub fn ellip_k(k: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 / agm(1.0, (1.0 - k * k).sqrt())
}

fn modulus_for_aspect(aspect: f64) -> f64 {
    let rho = |k: f64| 2.0 * ellip_k(k) / ellip_k((1.0 - k * k).sqrt());
    let (mut lo, mut hi) = (1e-15, 1.0 - 1e-15);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rho(mid) < aspect {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// ∫₀^η t^(−2/3)(1 − t)^(−2/3) dt / B(1/3, 1/3), integrated in u = t^(1/3).
pub fn cardy_eta(eta: f64) -> f64 {
    use statrs::function::beta::beta;
    let end = eta.cbrt();
    let n = 20_000;
    let h = end / n as f64;
    let f = |u: f64| 3.0 * (1.0 - u * u * u).powf(-2.0 / 3.0);
    let mut acc = f(0.0) + f(end);
    for i in 1..n {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0 / beta(1.0 / 3.0, 1.0 / 3.0)
}

/// Same value from 3Γ(2/3)/Γ(1/3)² · η^(1/3) ₂F₁(1/3, 2/3; 4/3; η) (series, η < 1).
pub fn cardy_eta_series(eta: f64) -> f64 {
    use statrs::function::gamma::gamma;
    let (a, b, c) = (1.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0);
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..100_000 {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * eta;
        sum += term;
        if term.abs() < 1e-17 {
            break;
        }
    }
    3.0 * gamma(2.0 / 3.0) / gamma(1.0 / 3.0).powi(2) * eta.cbrt() * sum
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSpec {
    pub center: [f64; 2],
    pub r_inner: f64,
    pub r_outer: f64,
}

impl AnnulusSpec {
    pub fn new(center: Complex64, r_inner: f64, r_outer: f64) -> Result<Self> {
        if !(r_inner > 0.0 && r_inner < r_outer) {
            return Err(Error::config("r_inner", "need 0 < r_inner < r_outer"));
        }
        Ok(AnnulusSpec {
            center: [center.re, center.im],
            r_inner,
            r_outer,
        })
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.center[0], self.center[1])
    }
}

pub(crate) const INNER: u8 = 1;
pub(crate) const RING: u8 = 2;
pub(crate) const OUTER: u8 = 3;

/// Hexagons by centre distance: inner disc (≤ r₁), open ring, and a collar beyond r₂.
/// With `half_plane`, only hexagons strictly above the horizontal line through z count.
pub(crate) fn annulus_patch(spec: &AnnulusSpec, mesh: f64, half_plane: bool) -> Patch {
    let z = spec.z();
    let m = spec.r_outer + 3.0 * mesh;
    Patch::from_fn((z.re - m, z.im - m, z.re + m, z.im + m), mesh, |_, c| {
        if half_plane && c.im <= z.im {
            return 0;
        }
        let d = (c - z).norm();
        if d <= spec.r_inner {
            INNER
        } else if d < spec.r_outer {
            RING
        } else {
            OUTER
        }
    })
}

/// Source and target flags of ring sites touching the inner disc and the outer collar.
pub(crate) fn ring_ends(p: &Patch) -> (Vec<bool>, Vec<bool>) {
    let mut s = vec![false; p.len()];
    let mut t = vec![false; p.len()];
    for i in 0..p.len() {
        if p.class[i] == RING {
            for n in p.neighbors(i) {
                s[i] |= p.class[n] == INNER;
                t[i] |= p.class[n] == OUTER;
            }
        }
    }
    (s, t)
}

/// Whether the ring is crossed from inside to outside by a path of either colour.
pub fn annulus_crossed(spec: &AnnulusSpec, mesh: f64, col: &SiteColoring) -> bool {
    let p = annulus_patch(spec, mesh, false);
    let (s, t) = ring_ends(&p);
    let colors = p.colors(col);
    [Color::Blue, Color::Yellow]
        .into_iter()
        .any(|c| p.connects(|i| p.class[i] == RING && colors[i] == c, |i| s[i], |i| t[i]))
}

fn check_annulus(spec: &AnnulusSpec, mesh: f64) -> Result<()> {
    if !(mesh > 0.0) {
        return Err(Error::config("delta", "must be positive"));
    }
    if !(spec.r_outer - spec.r_inner > 4.0 * mesh) {
        return Err(Error::config(
            "r_inner",
            "annulus must be wider than four mesh units",
        ));
    }
    Ok(())
}

/// Fraction of colourings in which the annulus is crossed by a monochromatic path.
pub fn annulus_crossing(
    spec: &AnnulusSpec,
    mesh: f64,
    n_samples: usize,
    seed0: u64,
) -> Result<EstimateWithCI> {
    check_annulus(spec, mesh)?;
    let k = sample_seeds(seed0, n_samples)
        .into_par_iter()
        .filter(|&s| annulus_crossed(spec, mesh, &SiteColoring::new(s)))
        .count();
    Ok(wilson(k, n_samples, Z95))
}

/// Doubled-grid probe point inside hexagon `h` for the loop ray-casting test.
pub fn hex_probe(h: HexCoord) -> (i64, i64) {
    let (x, y) = h.lattice_xy();
    (2 * x, 2 * y + 1)
}

/// Closed contours of a window coloured by `col` (the window's s-boundary keeps its sampled colours).
pub fn window_contours(
    window: &Shape,
    mesh: f64,
    col: &SiteColoring,
) -> Result<(JordanSet, ContourSet)> {
    let d = discretize_domain(window, mesh)?;
    let cs = extract_contours(&d, col);
    Ok((d, cs))
}

fn loop_in_ring(l: &DiscreteLoop, spec: &AnnulusSpec, mesh: f64, zhex: HexCoord) -> bool {
    let z = spec.z();
    l.encloses_probe(hex_probe(zhex))
        && l.adjacent_hexes().iter().all(|h| {
            let d = (h.center(mesh) - z).norm();
            d > spec.r_inner && d < spec.r_outer
        })
}

/// N(z, r₁, r₂): loops surrounding z whose hexagon layers lie in the open ring.
/// The count is read off the nesting forest: candidates form one chain of ancestors.
pub fn nesting_count(
    spec: &AnnulusSpec,
    window: &Shape,
    mesh: f64,
    col: &SiteColoring,
) -> Result<usize> {
    if spec.r_inner >= spec.r_outer {
        return Ok(0);
    }
    let (_, cs) = window_contours(window, mesh, col)?;
    Ok(nesting_count_in(spec, &cs))
}

pub fn nesting_count_in(spec: &AnnulusSpec, cs: &ContourSet) -> usize {
    let zhex = HexCoord::containing(spec.z(), cs.mesh);
    let forest = nesting_forest(cs);
    let around: Vec<usize> = (0..cs.loops.len())
        .filter(|&i| cs.loops[i].encloses_probe(hex_probe(zhex)))
        .collect();
    // loops around a common point are totally ordered by nesting
    debug_assert!(around
        .iter()
        .all(|&i| forest.parent[i].is_none_or(|p| around.contains(&p))));
    around
        .into_iter()
        .filter(|&i| loop_in_ring(&cs.loops[i], spec, cs.mesh, zhex))
        .count()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscSpec {
    pub center: [f64; 2],
    pub radius: f64,
}

impl DiscSpec {
    fn z(&self) -> Complex64 {
        Complex64::new(self.center[0], self.center[1])
    }

    fn holds(&self, h: HexCoord, mesh: f64) -> bool {
        (h.center(mesh) - self.z()).norm() <= self.radius
    }
}

/// (N₁, N₂): loops with D₁ strictly inside and D₂ strictly outside, and vice versa.
pub fn separating_counts(
    d1: &DiscSpec,
    d2: &DiscSpec,
    window: &Shape,
    mesh: f64,
    col: &SiteColoring,
) -> Result<(usize, usize)> {
    if (d1.z() - d2.z()).norm() <= d1.radius + d2.radius {
        return Err(Error::config("discs", "discs must be disjoint"));
    }
    let (_, cs) = window_contours(window, mesh, col)?;
    Ok(separating_counts_in(d1, d2, &cs))
}

pub fn separating_counts_in(d1: &DiscSpec, d2: &DiscSpec, cs: &ContourSet) -> (usize, usize) {
    let mesh = cs.mesh;
    let p1 = hex_probe(HexCoord::containing(d1.z(), mesh));
    let p2 = hex_probe(HexCoord::containing(d2.z(), mesh));
    let (mut n1, mut n2) = (0, 0);
    for l in &cs.loops {
        if l.adjacent_hexes()
            .iter()
            .any(|&h| d1.holds(h, mesh) || d2.holds(h, mesh))
        {
            continue;
        }
        match (l.encloses_probe(p1), l.encloses_probe(p2)) {
            (true, false) => n1 += 1,
            (false, true) => n2 += 1,
            _ => {}
        }
    }
    (n1, n2)
}

/// Whether a monochromatic path in the window joins hexagons touching D₁ and D₂.
pub fn discs_connected(
    d1: &DiscSpec,
    d2: &DiscSpec,
    window: &Shape,
    mesh: f64,
    col: &SiteColoring,
) -> bool {
    let (x0, y0, x1, y1) = window.bbox();
    let p = Patch::from_fn((x0, y0, x1, y1), mesh, |h, c| {
        if d1.holds(h, mesh) {
            INNER
        } else if d2.holds(h, mesh) {
            OUTER
        } else {
            window.contains(c) as u8 * RING
        }
    });
    let (s, t) = ring_ends(&p);
    let colors = p.colors(col);
    [Color::Blue, Color::Yellow]
        .into_iter()
        .any(|c| p.connects(|i| p.class[i] == RING && colors[i] == c, |i| s[i], |i| t[i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardy_oracle_evaluations_agree() {
        for eta in [0.01, 0.1, 0.3, 0.5, 0.7] {
            assert!(
                (cardy_eta(eta) - cardy_eta_series(eta)).abs() < 1e-9,
                "{eta}"
            );
        }
        assert!((cardy_rectangle(1.0) - 0.5).abs() < 1e-9);
        let p = [1.0, 1.5, 2.0, 3.0].map(cardy_rectangle);
        assert!(p.windows(2).all(|w| w[0] > w[1]));
        // duality: crossing the long way plus crossing the short way is certain
        assert!((cardy_rectangle(2.0) + cardy_rectangle(0.5) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn elliptic_k_reference() {
        assert!((ellip_k(0.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        // K(1/√2) = Γ(1/4)² / (4√π)
        let g = statrs::function::gamma::gamma(0.25);
        assert!(
            (ellip_k(0.5f64.sqrt()) - g * g / (4.0 * std::f64::consts::PI.sqrt())).abs() < 1e-13
        );
    }

    #[test]
    fn rhombus_crossing_is_exclusive_with_dual() {
        // exactly one of: blue left-right crossing, yellow crossing between the other sides
        let n = 24;
        let s = crossing_setup(CrossingShape::Rhombus { n }, 1.0).unwrap();
        for seed in 0..200 {
            let col = SiteColoring::new(seed);
            let colors = s.patch.colors(&col);
            let blue = crossed(&s, &col);
            let yellow = s.patch.connects(
                |i| colors[i] == Color::Yellow,
                |i| s.patch.hex(i).r == 0,
                |i| s.patch.hex(i).r == n as i32 - 1,
            );
            assert_ne!(blue, yellow);
        }
    }

    #[test]
    fn monochrome_crossings() {
        let s = crossing_setup(CrossingShape::Rectangle { aspect: 2.0 }, 1.0 / 32.0).unwrap();
        assert!(crossed(&s, &SiteColoring::constant(Color::Blue)));
        assert!(!crossed(&s, &SiteColoring::constant(Color::Yellow)));
        assert!(crossing_probability(CrossingShape::Rhombus { n: 8 }, 1.0, 50, 0).is_err());
    }

    #[test]
    fn thin_annulus_is_crossed() {
        let spec = AnnulusSpec::new(Complex64::new(0.0, 0.0), 10.0, 15.5).unwrap();
        let e = annulus_crossing(&spec, 1.0, 200, 3).unwrap();
        assert!(e.mean > 0.95, "{e:?}");
        let bad = AnnulusSpec::new(Complex64::new(0.0, 0.0), 10.0, 13.0).unwrap();
        assert!(annulus_crossing(&bad, 1.0, 10, 3).is_err());
    }

    #[test]
    fn nesting_trivial_cases() {
        let window = Shape::Disc {
            cx: 0.0,
            cy: 0.0,
            radius: 20.0,
        };
        let spec = AnnulusSpec::new(Complex64::new(0.0, 0.0), 2.0, 12.0).unwrap();
        assert_eq!(
            nesting_count(&spec, &window, 1.0, &SiteColoring::constant(Color::Blue)).unwrap(),
            0
        );
        let empty = AnnulusSpec {
            center: [0.0, 0.0],
            r_inner: 5.0,
            r_outer: 5.0,
        };
        assert_eq!(
            nesting_count(&empty, &window, 1.0, &SiteColoring::new(1)).unwrap(),
            0
        );
        // single yellow hexagon at the centre: its loop has hexagons at distance ≤ 1.8
        let col = SiteColoring::constant(Color::Blue)
            .with_overrides([(HexCoord::new(0, 0), Color::Yellow)]);
        assert_eq!(nesting_count(&spec, &window, 1.0, &col).unwrap(), 0);
        let small = AnnulusSpec::new(Complex64::new(0.0, 0.0), 0.5, 12.0).unwrap();
        assert_eq!(nesting_count(&small, &window, 1.0, &col).unwrap(), 0);
        // a yellow ring at hex distance 5 bounds two loops, both in the annulus
        let ring: Vec<HexCoord> = (-8..=8)
            .flat_map(|q| (-8..=8).map(move |r| HexCoord::new(q, r)))
            .filter(|h| h.distance(HexCoord::new(0, 0)) == 5)
            .collect();
        let col = SiteColoring::constant(Color::Blue)
            .with_overrides(ring.iter().map(|&h| (h, Color::Yellow)));
        assert_eq!(nesting_count(&spec, &window, 1.0, &col).unwrap(), 2);
        // the inner loop's layer reaches in to distance 6, the outer one out to about 10.4
        let tight = AnnulusSpec::new(Complex64::new(0.0, 0.0), 6.5, 12.0).unwrap();
        assert_eq!(nesting_count(&tight, &window, 1.0, &col).unwrap(), 1);
        let narrow = AnnulusSpec::new(Complex64::new(0.0, 0.0), 6.5, 9.5).unwrap();
        assert_eq!(nesting_count(&narrow, &window, 1.0, &col).unwrap(), 0);
    }

    #[test]
    fn annulus_complementarity_per_sample() {
        let spec = AnnulusSpec::new(Complex64::new(0.3, -0.2), 2.0, 24.0).unwrap();
        let window = Shape::Disc {
            cx: 0.0,
            cy: 0.0,
            radius: 30.0,
        };
        let mut both = [0, 0];
        for seed in 0..300 {
            let col = SiteColoring::new(seed);
            let crossed = annulus_crossed(&spec, 1.0, &col);
            let n = nesting_count(&spec, &window, 1.0, &col).unwrap();
            assert_eq!(crossed, n == 0, "seed {seed}");
            both[crossed as usize] += 1;
        }
        assert!(both[0] > 0 && both[1] > 0, "{both:?}");
    }

    #[test]
    fn separating_counts_symmetry() {
        let window = Shape::Disc {
            cx: 0.0,
            cy: 0.0,
            radius: 24.0,
        };
        let d1 = DiscSpec {
            center: [-6.0, 0.0],
            radius: 2.0,
        };
        let d2 = DiscSpec {
            center: [6.0, 0.0],
            radius: 2.0,
        };
        assert_eq!(
            separating_counts(&d1, &d2, &window, 1.0, &SiteColoring::constant(Color::Blue))
                .unwrap(),
            (0, 0)
        );
        for seed in 0..20 {
            let col = SiteColoring::new(seed);
            let (a, b) = separating_counts(&d1, &d2, &window, 1.0, &col).unwrap();
            assert_eq!(
                separating_counts(&d2, &d1, &window, 1.0, &col).unwrap(),
                (b, a)
            );
            // a separating loop blocks both colours
            if a + b > 0 {
                assert!(!discs_connected(&d1, &d2, &window, 1.0, &col));
            }
        }
        let overlap = DiscSpec {
            center: [-4.0, 0.0],
            radius: 3.0,
        };
        assert!(separating_counts(&d1, &overlap, &window, 1.0, &SiteColoring::new(0)).is_err());
    }
}
