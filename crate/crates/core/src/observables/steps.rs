//! Statistics of construction steps: chopping, step counts, loop adjacency and the
//! subdomain types left by the first exploration.

use num_complex::Complex64;
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use super::sample_seeds;
use crate::construction::{initial_endpoints, prepare, run_full_construction};
use crate::domain::{JordanSet, Shape};
use crate::exploration::{components_after, explore, ExplorationResult, SubdomainRecord};
use crate::lattice::{Color, SiteColoring};
use crate::oracle::extract_contours;
use crate::sle::{disc_trace, type_index, TraceRaster};
use crate::stats::{mean_var, quantile, wilson, EstimateWithCI, Z95};
use crate::{Error, Result};

/// The first exploration of the blue-boundary unit disc and the typed components it leaves.
pub struct FirstStep {
    pub domain: JordanSet,
    pub coloring: SiteColoring,
    pub exploration: ExplorationResult,
    pub daughters: Vec<SubdomainRecord>,
}

pub fn first_step(mesh: f64, seed: u64) -> Result<FirstStep> {
    let shape = Shape::unit_disc();
    let (d, col) = prepare(&shape, mesh, seed, Color::Blue)?;
    let (x, y) = initial_endpoints(&shape, &d)?;
    let res = explore(&d, x, y, &col)?;
    let daughters = components_after(&d, &res, &col)?;
    Ok(FirstStep {
        domain: d,
        coloring: col,
        exploration: res,
        daughters,
    })
}

impl FirstStep {
    /// Largest daughter dominant extent relative to the parent's.
    pub fn max_daughter_ratio(&self) -> f64 {
        let dm = self.domain.d_m();
        self.daughters
            .iter()
            .map(|r| r.region.d_m() / dm)
            .fold(0.0, f64::max)
    }
}

/// Fraction of first steps after which every daughter's dominant extent is at most
/// `fraction` of the parent's.
pub fn chopping_probability(
    mesh: f64,
    n_samples: usize,
    seed0: u64,
    fraction: f64,
) -> Result<EstimateWithCI> {
    let hits = sample_seeds(seed0, n_samples)
        .into_par_iter()
        .map(|s| Ok(first_step(mesh, s)?.max_daughter_ratio() <= fraction))
        .collect::<Result<Vec<bool>>>()?;
    Ok(wilson(hits.iter().filter(|&&h| h).count(), n_samples, Z95))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KDistribution {
    pub mesh: f64,
    pub eps: f64,
    pub ks: Vec<usize>,
    pub median: f64,
    pub p95: f64,
}

/// Step counts K_δ(ε) of the full construction in the unit disc, one row per mesh.
pub fn k_steps_distribution(
    eps: f64,
    meshes: &[f64],
    n_samples: usize,
    seed0: u64,
) -> Result<Vec<KDistribution>> {
    let worst = meshes.iter().copied().fold(0.0, f64::max);
    if !(eps > 3.0 * worst) {
        return Err(Error::CutoffTooFine { eps, mesh: worst });
    }
    let shape = Shape::unit_disc();
    let mut out = Vec::new();
    for &mesh in meshes {
        let ks = sample_seeds(seed0, n_samples)
            .into_par_iter()
            .map(
                |s| Ok(run_full_construction(&shape, mesh, eps, s, Color::Blue)?.k_steps_to_cutoff),
            )
            .collect::<Result<Vec<usize>>>()?;
        let f: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
        out.push(KDistribution {
            mesh,
            eps,
            median: quantile(&f, 0.5),
            p95: quantile(&f, 0.95),
            ks,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdjacencyReport {
    pub loops: usize,
    pub large_loops: usize,
    /// Components of the touching graph that contain a large loop.
    pub large_components: usize,
    pub connected: bool,
}

/// Graph on the closed loops of a blue-boundary window, two loops touching when their
/// hexagon layers are within lattice distance one. Large means diameter above a tenth
/// of the window's.
pub fn loop_adjacency_connected(window: &Shape, mesh: f64, seed: u64) -> Result<AdjacencyReport> {
    let (d, col) = prepare(window, mesh, seed, Color::Blue)?;
    let cs = extract_contours(&d, &col);
    let n = cs.loops.len();
    let layers: Vec<FxHashSet<_>> = cs.loops.iter().map(|l| l.adjacent_hexes()).collect();
    let mut owners: FxHashMap<_, Vec<usize>> = FxHashMap::default();
    for (i, hs) in layers.iter().enumerate() {
        for &h in hs {
            owners.entry(h).or_default().push(i);
        }
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (i, hs) in layers.iter().enumerate() {
        for &h in hs {
            for g in std::iter::once(h).chain(h.neighbors()) {
                if let Some(js) = owners.get(&g) {
                    for &j in js {
                        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                        parent[a] = b;
                    }
                }
            }
        }
    }
    let cut = window.diameter() / 10.0;
    let large: Vec<usize> = (0..n)
        .filter(|&i| cs.loops[i].diameter(mesh) > cut)
        .collect();
    let roots: FxHashSet<usize> = large.iter().map(|&i| find(&mut parent, i)).collect();
    Ok(AdjacencyReport {
        loops: n,
        large_loops: large.len(),
        large_components: roots.len(),
        connected: roots.len() <= 1,
    })
}

/// Area fractions of the four subdomain types for one sample.
pub type TypeFractions = [f64; 4];

fn normalize(by: [usize; 4]) -> Option<TypeFractions> {
    let total: usize = by.iter().sum();
    (total > 0).then(|| by.map(|a| a as f64 / total as f64))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeTypeSample {
    /// Hexagon counts of the typed components, normalised.
    pub native: TypeFractions,
    /// The exploration path pushed through the same raster classifier as continuum traces.
    pub raster: Option<TypeFractions>,
}

/// Exploration path as a planar polyline; vertices on boundary-running edges are put on
/// the unit circle, since there the path touches the domain boundary.
pub fn exploration_polyline(fs: &FirstStep) -> Vec<Complex64> {
    let d = &fs.domain;
    let res = &fs.exploration;
    let mut pts: Vec<Complex64> = res.vertices().iter().map(|&v| d.position(v)).collect();
    let on_boundary = |k: usize| !d.contains(res.path[k].left) || !d.contains(res.path[k].right);
    for k in 0..res.path.len() {
        if on_boundary(k) {
            for j in [k, k + 1] {
                let r = pts[j].norm();
                pts[j] /= r;
            }
        }
    }
    pts
}

pub fn lattice_type_sample(mesh: f64, h: f64, seed: u64) -> Result<LatticeTypeSample> {
    let fs = first_step(mesh, seed)?;
    let mut by = [0usize; 4];
    for r in &fs.daughters {
        by[type_index(r.dtype)] += r.region.len();
    }
    let native =
        normalize(by).ok_or_else(|| Error::InconsistentInput("no unexplored hexagons".into()))?;
    let pts = exploration_polyline(&fs);
    let a = pts[0] / pts[0].norm();
    let b = pts[pts.len() - 1] / pts[pts.len() - 1].norm();
    let raster = normalize(TraceRaster::new(&pts, a, b, h).type_areas().0);
    Ok(LatticeTypeSample { native, raster })
}

/// Raster area fractions of the component types for an SLE₆ trace from −i to i.
pub fn sle_type_sample(h: f64, seed: u64) -> Result<Option<TypeFractions>> {
    let path = disc_trace(6.0, h, seed)?;
    let (a, b) = (Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0));
    Ok(normalize(TraceRaster::new(&path, a, b, h).type_areas().0))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ComponentComparison {
    pub lattice_mean: f64,
    pub lattice_se: f64,
    pub continuum_mean: f64,
    pub continuum_se: f64,
    /// Difference in units of the combined standard error.
    pub z: f64,
}

pub fn compare_type_fractions(
    lattice: &[TypeFractions],
    continuum: &[TypeFractions],
) -> [ComponentComparison; 4] {
    std::array::from_fn(|i| {
        let l: Vec<f64> = lattice.iter().map(|f| f[i]).collect();
        let c: Vec<f64> = continuum.iter().map(|f| f[i]).collect();
        let (ml, vl) = mean_var(&l);
        let (mc, vc) = mean_var(&c);
        let (sl, sc) = ((vl / l.len() as f64).sqrt(), (vc / c.len() as f64).sqrt());
        let se = (sl * sl + sc * sc).sqrt();
        let z = if se > 0.0 {
            (ml - mc) / se
        } else if ml == mc {
            0.0
        } else {
            f64::INFINITY
        };
        ComponentComparison {
            lattice_mean: ml,
            lattice_se: sl,
            continuum_mean: mc,
            continuum_se: sc,
            z,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chopping_is_monotone_in_threshold() {
        for s in 0..20 {
            let fs = first_step(1.0 / 16.0, s).unwrap();
            let r = fs.max_daughter_ratio();
            assert!(r > 0.0 && r <= 1.0);
        }
        let a = chopping_probability(1.0 / 16.0, 40, 5, 2.0 / 3.0).unwrap();
        let b = chopping_probability(1.0 / 16.0, 40, 5, 0.75).unwrap();
        assert!(a.mean <= b.mean);
        assert!(a.lower <= a.mean && a.mean <= a.upper && a.upper <= 1.0);
    }

    #[test]
    fn k_counts_at_least_loops() {
        let shape = Shape::unit_disc();
        for s in 0..5 {
            let r = run_full_construction(&shape, 1.0 / 16.0, 0.25, s, Color::Blue).unwrap();
            assert!(r.k_steps_to_cutoff >= r.loops.len());
        }
        let rows = k_steps_distribution(0.25, &[1.0 / 16.0], 5, 1).unwrap();
        assert_eq!(rows[0].ks.len(), 5);
        assert!(k_steps_distribution(0.1, &[1.0 / 16.0], 5, 1).is_err());
    }

    #[test]
    fn adjacency_reports() {
        let w = Shape::Disc {
            cx: 0.0,
            cy: 0.0,
            radius: 1.0,
        };
        let mut connected = 0;
        for s in 0..10 {
            let r = loop_adjacency_connected(&w, 1.0 / 24.0, s).unwrap();
            assert!(r.large_loops <= r.loops);
            connected += r.connected as usize;
        }
        assert!(connected >= 9);
    }

    #[test]
    fn lattice_fractions_sum_to_one() {
        for s in 0..4 {
            let t = lattice_type_sample(1.0 / 32.0, 1.0 / 16.0, s).unwrap();
            assert!((t.native.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let r = t.raster.unwrap();
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn comparison_of_identical_samples_is_zero() {
        let a = vec![[0.5, 0.4, 0.05, 0.05], [0.4, 0.5, 0.1, 0.0]];
        let c = compare_type_fractions(&a, &a);
        assert!(c.iter().all(|x| x.z == 0.0));
    }
}
