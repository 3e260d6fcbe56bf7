//! Distances between curves and between finite sets of curves.

use num_complex::Complex64;

/// Discrete Fréchet distance between two polylines given by their vertices.
pub fn curve_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "curves must be nonempty");
    let m = b.len();
    let mut prev = vec![0.0f64; m];
    let mut cur = vec![0.0f64; m];
    for (i, &p) in a.iter().enumerate() {
        for j in 0..m {
            let d = (p - b[j]).norm();
            cur[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => cur[j - 1].max(d),
                (_, 0) => prev[0].max(d),
                _ => prev[j].min(prev[j - 1]).min(cur[j - 1]).max(d),
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

/// Hausdorff distance between finite curve families under [`curve_distance`].
pub fn loopset_distance(f1: &[Vec<Complex64>], f2: &[Vec<Complex64>]) -> f64 {
    assert!(
        !f1.is_empty() && !f2.is_empty(),
        "families must be nonempty"
    );
    let directed = |x: &[Vec<Complex64>], y: &[Vec<Complex64>]| {
        x.iter()
            .map(|c| {
                y.iter()
                    .map(|d| curve_distance(c, d))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    directed(f1, f2).max(directed(f2, f1))
}
