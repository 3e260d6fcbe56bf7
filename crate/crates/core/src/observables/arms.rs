//! Disjoint monochromatic crossings of annuli and half-annuli.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{annulus_patch, ring_ends, sample_seeds, AnnulusSpec, Patch, RING};
use crate::lattice::{Color, SiteColoring};
use crate::stats::{weighted_fit, wilson, EstimateWithCI, LinearFit, Z95};
use crate::{Error, Result};

pub const MAX_ARMS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmGeometry {
    FullPlane,
    HalfPlane,
}

/// Required arm colours. `colors: None` asks for `k` arms that are not all of one colour.
///
/// Detection compares colour counts, so a cyclic sequence is matched up to any
/// rearrangement. That coincides with matching up to rotation whenever one colour
/// occurs at most once; patterns with two or more arms of each colour are treated
/// as their colour multiset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmPattern {
    pub k: usize,
    pub colors: Option<Vec<Color>>,
    pub geometry: ArmGeometry,
}

impl ArmPattern {
    pub fn polychromatic(k: usize, geometry: ArmGeometry) -> Self {
        ArmPattern {
            k,
            colors: None,
            geometry,
        }
    }

    pub fn exact(colors: Vec<Color>, geometry: ArmGeometry) -> Self {
        ArmPattern {
            k: colors.len(),
            colors: Some(colors),
            geometry,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > MAX_ARMS {
            return Err(Error::config(
                "k",
                format!("arm count must be in 1..={MAX_ARMS}"),
            ));
        }
        if self.colors.as_ref().is_some_and(|c| c.len() != self.k) {
            return Err(Error::config("colors", "length must equal k"));
        }
        if self.colors.is_none() && self.k < 2 {
            return Err(Error::config("k", "a polychromatic event needs two arms"));
        }
        Ok(())
    }

    /// Whether maximal disjoint crossing counts (capped at k) realise the pattern.
    pub fn realized(&self, blue: usize, yellow: usize) -> bool {
        match &self.colors {
            Some(c) => {
                let nb = c.iter().filter(|&&x| x == Color::Blue).count();
                blue >= nb && yellow >= self.k - nb
            }
            None => blue >= 1 && yellow >= 1 && blue + yellow >= self.k,
        }
    }
}

/// Unit-capacity flow network on sites, split into in/out nodes.
struct Flow {
    head: Vec<usize>,
    next: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<u8>,
}

impl Flow {
    fn new(nodes: usize) -> Self {
        Flow {
            head: vec![usize::MAX; nodes],
            next: Vec::new(),
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add(&mut self, a: usize, b: usize) {
        for (x, y, c) in [(a, b, 1u8), (b, a, 0u8)] {
            self.to.push(y);
            self.cap.push(c);
            self.next.push(self.head[x]);
            self.head[x] = self.to.len() - 1;
        }
    }

    /// Augments along BFS paths until `limit` units flow or none remain.
    fn max_flow(&mut self, s: usize, t: usize, limit: usize) -> usize {
        let n = self.head.len();
        let mut flow = 0;
        let mut via = vec![usize::MAX; n];
        let mut queue = Vec::with_capacity(n);
        while flow < limit {
            via.iter_mut().for_each(|v| *v = usize::MAX);
            queue.clear();
            queue.push(s);
            via[s] = usize::MAX - 1;
            let mut qi = 0;
            while qi < queue.len() && via[t] == usize::MAX {
                let u = queue[qi];
                qi += 1;
                let mut e = self.head[u];
                while e != usize::MAX {
                    let v = self.to[e];
                    if self.cap[e] > 0 && via[v] == usize::MAX {
                        via[v] = e;
                        queue.push(v);
                    }
                    e = self.next[e];
                }
            }
            if via[t] == usize::MAX {
                break;
            }
            let mut v = t;
            while v != s {
                let e = via[v];
                self.cap[e] -= 1;
                self.cap[e ^ 1] += 1;
                v = self.to[e ^ 1];
            }
            flow += 1;
        }
        flow
    }
}

/// Maximum number of vertex-disjoint crossings of colour `c`, capped at `limit`.
fn disjoint_crossings(
    p: &Patch,
    colors: &[Color],
    s: &[bool],
    t: &[bool],
    c: Color,
    limit: usize,
) -> usize {
    let sites: Vec<usize> = (0..p.len())
        .filter(|&i| p.class[i] == RING && colors[i] == c)
        .collect();
    let mut id = vec![usize::MAX; p.len()];
    for (k, &i) in sites.iter().enumerate() {
        id[i] = k;
    }
    let m = sites.len();
    let (src, snk) = (2 * m, 2 * m + 1);
    let mut g = Flow::new(2 * m + 2);
    for (k, &i) in sites.iter().enumerate() {
        g.add(2 * k, 2 * k + 1);
        if s[i] {
            g.add(src, 2 * k);
        }
        if t[i] {
            g.add(2 * k + 1, snk);
        }
        for n in p.neighbors(i) {
            if id[n] != usize::MAX {
                g.add(2 * k + 1, 2 * id[n]);
            }
        }
    }
    g.max_flow(src, snk, limit)
}

/// Disjoint crossing counts (blue, yellow) of one colouring, each capped at k.
pub fn arm_counts(
    pattern: &ArmPattern,
    spec: &AnnulusSpec,
    mesh: f64,
    col: &SiteColoring,
) -> (usize, usize) {
    let p = annulus_patch(spec, mesh, pattern.geometry == ArmGeometry::HalfPlane);
    let (s, t) = ring_ends(&p);
    let colors = p.colors(col);
    let b = disjoint_crossings(&p, &colors, &s, &t, Color::Blue, pattern.k);
    let y = disjoint_crossings(&p, &colors, &s, &t, Color::Yellow, pattern.k);
    (b, y)
}

pub fn arm_event_probability(
    pattern: &ArmPattern,
    spec: &AnnulusSpec,
    mesh: f64,
    n_samples: usize,
    seed0: u64,
) -> Result<EstimateWithCI> {
    pattern.validate()?;
    if !(spec.r_inner > 3.0 * mesh) {
        return Err(Error::config(
            "r_inner",
            "inner radius must exceed three mesh units",
        ));
    }
    let k = sample_seeds(seed0, n_samples)
        .into_par_iter()
        .filter(|&s| {
            let (b, y) = arm_counts(pattern, spec, mesh, &SiteColoring::new(s));
            pattern.realized(b, y)
        })
        .count();
    Ok(wilson(k, n_samples, Z95))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArmDecay {
    pub ratios: Vec<f64>,
    pub estimates: Vec<EstimateWithCI>,
    pub fit: LinearFit,
}

/// Arm-event probabilities with the outer radius fixed and the inner radius
/// `r_outer · ratio`, fitted by least squares as log P = a + slope · log ratio.
pub fn arm_decay(
    pattern: &ArmPattern,
    r_outer: f64,
    ratios: &[f64],
    mesh: f64,
    n_samples: usize,
    seed0: u64,
) -> Result<ArmDecay> {
    if ratios.len() < 2 {
        return Err(Error::config("ratios", "need at least two radii"));
    }
    if ratios.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::config("ratios", "ratios must lie in (0, 1)"));
    }
    let mut estimates = Vec::new();
    for (j, &ratio) in ratios.iter().enumerate() {
        let spec = AnnulusSpec::new(
            num_complex::Complex64::new(0.0, 0.0),
            r_outer * ratio,
            r_outer,
        )?;
        estimates.push(arm_event_probability(
            pattern,
            &spec,
            mesh,
            n_samples,
            seed0.wrapping_add(j as u64 * 0x1_0000_0001),
        )?);
    }
    if estimates.iter().any(|e| e.mean <= 0.0) {
        return Err(Error::InconsistentInput(
            "an arm event was never observed; increase samples".into(),
        ));
    }
    let x: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    let y: Vec<f64> = estimates.iter().map(|e| e.mean.ln()).collect();
    Ok(ArmDecay {
        ratios: ratios.to_vec(),
        estimates,
        fit: weighted_fit(&x, &y, None),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn decay_fit_is_positive() {
        let pat = ArmPattern::polychromatic(2, ArmGeometry::FullPlane);
        let d = arm_decay(&pat, 32.0, &[0.5, 0.25, 0.125], 1.0, 200, 4).unwrap();
        assert!(d.fit.slope > 0.0);
        assert!(arm_decay(&pat, 32.0, &[0.5], 1.0, 10, 4).is_err());
        assert!(arm_decay(&pat, 32.0, &[0.5, 1.5], 1.0, 10, 4).is_err());
    }

    fn spec(r1: f64, r2: f64) -> AnnulusSpec {
        AnnulusSpec::new(Complex64::new(0.0, 0.0), r1, r2).unwrap()
    }

    #[test]
    fn monochrome_counts_match_ring_width() {
        let pat = ArmPattern::polychromatic(8, ArmGeometry::FullPlane);
        let (b, y) = arm_counts(
            &pat,
            &spec(4.0, 12.0),
            1.0,
            &SiteColoring::constant(Color::Blue),
        );
        assert_eq!((b, y), (8, 0));
        assert!(!pat.realized(b, y));
    }

    #[test]
    fn one_arm_thin_annulus() {
        let pat = ArmPattern::exact(vec![Color::Blue], ArmGeometry::FullPlane);
        let p = ArmPattern::polychromatic(1, ArmGeometry::FullPlane);
        assert!(p.validate().is_err());
        // one arm of either colour: a blue arm or a yellow arm always exists across a thin ring
        let e = arm_event_probability(&pat, &spec(10.0, 15.0), 1.0, 200, 1).unwrap();
        assert!(e.mean > 0.3);
        let mut any = 0;
        for s in 0..200 {
            let (b, y) = arm_counts(&pat, &spec(10.0, 15.0), 1.0, &SiteColoring::new(s));
            any += (b + y >= 1) as usize;
        }
        assert!(any as f64 / 200.0 > 0.95);
    }

    #[test]
    fn hand_built_arms() {
        // a blue line through the centre gives two blue arms in a yellow sea
        let r = spec(4.0, 14.0);
        let col = SiteColoring::constant(Color::Yellow).with_overrides((0..20).flat_map(|q| {
            [
                (crate::lattice::HexCoord::new(q, 0), Color::Blue),
                (crate::lattice::HexCoord::new(-q, 0), Color::Blue),
            ]
        }));
        let pat = ArmPattern::exact(
            vec![Color::Blue, Color::Blue, Color::Yellow],
            ArmGeometry::FullPlane,
        );
        let (b, y) = arm_counts(&pat, &r, 1.0, &col);
        assert_eq!(b, 2);
        assert!(y >= 1);
        assert!(pat.realized(b, y));
    }

    #[test]
    fn antitone_in_k() {
        let r = spec(4.0, 16.0);
        for s in 0..40 {
            let col = SiteColoring::new(s);
            let mut prev = true;
            for k in 2..=6 {
                let pat = ArmPattern::polychromatic(k, ArmGeometry::FullPlane);
                let (b, y) = arm_counts(&pat, &r, 1.0, &col);
                let now = pat.realized(b, y);
                assert!(prev || !now);
                prev = now;
            }
        }
    }

    #[test]
    fn half_plane_excludes_lower_sites() {
        let pat = ArmPattern::polychromatic(3, ArmGeometry::HalfPlane);
        let (b, _) = arm_counts(
            &pat,
            &spec(4.0, 12.0),
            1.0,
            &SiteColoring::constant(Color::Blue),
        );
        let (bf, _) = arm_counts(
            &ArmPattern::polychromatic(8, ArmGeometry::FullPlane),
            &spec(4.0, 12.0),
            1.0,
            &SiteColoring::constant(Color::Blue),
        );
        assert!(b <= 3 && bf == 8 && b == 3);
    }
}
