use num_complex::Complex64;
use proptest::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};

use loopsim::construction::{initial_endpoints, prepare, run_full_construction};
use loopsim::domain::{discretize_domain, Shape};
use loopsim::exploration::{components_after, explore, DomainType};
use loopsim::lattice::{Color, DirEdge, HexVertex, SiteColoring};
use loopsim::observables::arms::{arm_counts, ArmGeometry, ArmPattern};
use loopsim::observables::metrics::curve_distance;
use loopsim::observables::{
    annulus_crossed, crossing_probability, nesting_count, AnnulusSpec, CrossingShape,
};
use loopsim::oracle::{compare_loop_sets, extract_contours, nesting_forest, DiscreteLoop};
use loopsim::sle::{hull_capacity, sample_driving};

fn mesh() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![1.0 / 12.0, 1.0 / 16.0, 1.0 / 24.0, 1.0 / 32.0])
}

fn shape() -> impl Strategy<Value = Shape> {
    prop_oneof![
        (-0.3f64..0.3, -0.3f64..0.3, 0.6f64..1.2).prop_map(|(cx, cy, radius)| Shape::Disc {
            cx,
            cy,
            radius
        }),
        (0.8f64..1.6, 0.8f64..1.6).prop_map(|(w, h)| Shape::Rect {
            x0: 0.0,
            y0: 0.0,
            x1: w,
            y1: h
        }),
    ]
}

fn reversed(l: &DiscreteLoop) -> Vec<DirEdge> {
    DiscreteLoop::from_cycle(l.cycle.iter().rev().map(|e| e.reversed()).collect())
        .unwrap()
        .cycle
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn jordan_set_boundary_is_one_simple_cycle(s in shape(), m in mesh()) {
        let d = discretize_domain(&s, m).unwrap();
        let cyc = d.boundary_cycle();
        let mut tails = FxHashSet::default();
        let mut heads = FxHashSet::default();
        for w in cyc.windows(2) {
            prop_assert_eq!(w[0].head(), w[1].tail());
        }
        prop_assert_eq!(cyc[cyc.len() - 1].head(), cyc[0].tail());
        for e in cyc {
            prop_assert!(tails.insert(e.tail()));
            prop_assert!(heads.insert(e.head()));
            prop_assert!(d.contains(e.left) != d.contains(e.right));
        }
        for h in d.s_boundary() {
            prop_assert!(!d.contains(*h));
            prop_assert!(h.neighbors().iter().any(|n| d.contains(*n)));
        }
    }

    #[test]
    fn exploration_ignores_boundary_colors_and_swaps_under_negation(seed in any::<u64>(), m in mesh()) {
        let (d, col) = prepare(&Shape::unit_disc(), m, seed, Color::Blue).unwrap();
        let (x, y) = initial_endpoints(&Shape::unit_disc(), &d).unwrap();
        let res = explore(&d, x, y, &col).unwrap();
        prop_assert_eq!(&explore(&d, x, y, &col).unwrap(), &res);
        let flipped = col.clone().with_overrides(d.s_boundary().iter().map(|&h| (h, Color::Yellow)));
        prop_assert_eq!(&explore(&d, x, y, &flipped).unwrap().path, &res.path);
        let back = explore(&d, y, x, &col.negated()).unwrap();
        let rev: Vec<DirEdge> = res.path.iter().rev().map(|e| e.reversed()).collect();
        prop_assert_eq!(back.path, rev);
    }

    #[test]
    fn daughters_partition_the_unexplored_hexagons(seed in any::<u64>(), m in mesh()) {
        let (d, col) = prepare(&Shape::unit_disc(), m, seed, Color::Blue).unwrap();
        let (x, y) = initial_endpoints(&Shape::unit_disc(), &d).unwrap();
        let res = explore(&d, x, y, &col).unwrap();
        let explored = res.explored();
        let comps = components_after(&d, &res, &col).unwrap();
        let mut seen = FxHashSet::default();
        for c in &comps {
            for h in c.region.hexes() {
                prop_assert!(d.contains(*h) && !explored.contains(h));
                prop_assert!(seen.insert(*h));
            }
        }
        prop_assert_eq!(seen.len() + d.hexes().iter().filter(|h| explored.contains(h)).count(), d.len());
    }

    #[test]
    fn contours_use_vertices_at_most_twice_and_alternate(seed in any::<u64>(), m in mesh()) {
        let (d, col) = prepare(&Shape::unit_disc(), m, seed, Color::Blue).unwrap();
        let cs = extract_contours(&d, &col);
        let mut uses: FxHashMap<HexVertex, usize> = FxHashMap::default();
        for l in &cs.loops {
            for e in &l.cycle {
                *uses.entry(e.tail()).or_default() += 1;
            }
        }
        // a vertex touched by a contour lies on exactly one of them, once
        prop_assert!(uses.values().all(|&u| u == 1));
        prop_assert!(cs.vertex_use.values().all(|&u| u <= 2));
        let f = nesting_forest(&cs);
        for (i, l) in cs.loops.iter().enumerate() {
            if let Some(p) = f.parent[i] {
                prop_assert_ne!(cs.loops[p].orientation, l.orientation);
            }
        }
        let neg = extract_contours(&d, &col.negated());
        let rev: FxHashSet<Vec<DirEdge>> = neg.loops.iter().map(reversed).collect();
        prop_assert_eq!(neg.loops.len(), cs.loops.len());
        for l in &cs.loops {
            prop_assert!(rev.contains(&l.cycle));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn construction_matches_oracle_and_refines_monotonically(seed in any::<u64>(), m in mesh(), k in 4.0f64..12.0) {
        let shape = Shape::unit_disc();
        let eps = k * m;
        let coarse = run_full_construction(&shape, m, 2.0 * eps, seed, Color::Blue).unwrap();
        let fine = run_full_construction(&shape, m, eps, seed, Color::Blue).unwrap();
        let (d, col) = prepare(&shape, m, seed, Color::Blue).unwrap();
        let cs = extract_contours(&d, &col);
        prop_assert!(compare_loop_sets(&fine.loops, &cs, eps).is_empty());
        let fine_set: FxHashSet<&Vec<DirEdge>> = fine.loops.iter().map(|l| &l.cycle).collect();
        for l in &coarse.loops {
            prop_assert!(fine_set.contains(&l.cycle));
        }
        // one loop per T1 step, none from the others
        let t1_steps: FxHashSet<usize> = fine.steps.iter().enumerate().filter(|(_, s)| s.dtype == DomainType::T1).map(|(i, _)| i).collect();
        let loop_steps: Vec<usize> = fine.loops.iter().map(|l| l.provenance.as_ref().unwrap().step).collect();
        let distinct: FxHashSet<usize> = loop_steps.iter().copied().collect();
        prop_assert_eq!(distinct.len(), loop_steps.len());
        prop_assert_eq!(distinct, t1_steps);
    }

    #[test]
    fn capacity_is_normalized(seed in any::<u64>(), kappa in 0.0f64..8.0, horizon in 0.1f64..2.0) {
        let drv = sample_driving(kappa, horizon, horizon / 400.0, seed).unwrap();
        let cap = hull_capacity(&drv, 1e7);
        prop_assert!((cap / drv.horizon() - 1.0).abs() < 1e-6, "{}", cap);
    }

    #[test]
    fn annulus_crossing_complements_nesting(seed in any::<u64>(), r1 in 1.5f64..6.0, w in 2.0f64..12.0, cx in -0.5f64..0.5) {
        let spec = AnnulusSpec::new(Complex64::new(cx, 0.2), r1, r1 + w).unwrap();
        let col = SiteColoring::new(seed);
        let window = Shape::Disc { cx: 0.0, cy: 0.0, radius: r1 + w + 4.0 };
        prop_assert_eq!(annulus_crossed(&spec, 1.0, &col), nesting_count(&spec, &window, 1.0, &col).unwrap() == 0);
    }

    #[test]
    fn arm_events_shrink_with_k(seed in any::<u64>(), half in any::<bool>()) {
        let g = if half { ArmGeometry::HalfPlane } else { ArmGeometry::FullPlane };
        let spec = AnnulusSpec::new(Complex64::new(0.0, 0.0), 4.0, 16.0).unwrap();
        let col = SiteColoring::new(seed);
        let hits: Vec<bool> = (2..=6)
            .map(|k| {
                let p = ArmPattern::polychromatic(k, g);
                let (b, y) = arm_counts(&p, &spec, 1.0, &col);
                p.realized(b, y)
            })
            .collect();
        for w in hits.windows(2) {
            prop_assert!(w[0] || !w[1]);
        }
    }

    #[test]
    fn estimators_are_seed_deterministic(seed in any::<u64>()) {
        let a = crossing_probability(CrossingShape::Rhombus { n: 8 }, 1.0, 100, seed).unwrap();
        let b = crossing_probability(CrossingShape::Rhombus { n: 8 }, 1.0, 100, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn curve_distance_triangle(pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..18), cut1 in 1usize..6, cut2 in 1usize..6) {
        let c: Vec<Complex64> = pts.iter().map(|&(x, y)| Complex64::new(x, y)).collect();
        let n = c.len();
        let (i, j) = ((cut1 % (n - 1)) + 1, (cut2 % (n - 1)) + 1);
        let (a, b, d) = (&c[..i], &c[i.min(j)..], &c[..j]);
        prop_assert!(curve_distance(a, d) <= curve_distance(a, b) + curve_distance(b, d) + 1e-12);
    }
}
