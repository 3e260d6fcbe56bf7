//! Chordal SLE in the upper half-plane by reverse composition of vertical-slit maps,
//! transport to the unit disc, and component classification of the resulting trace.

use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::exploration::DomainType;
use crate::lattice::split_seed;
use crate::stats::{wilson, EstimateWithCI, Z95};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrivingFunction {
    pub kappa: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl DrivingFunction {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0) {
            return Err(Error::config("kappa", "must be nonnegative"));
        }
        if self.times.len() != self.values.len() || self.times.is_empty() {
            return Err(Error::InconsistentInput(
                "times and values differ in length".into(),
            ));
        }
        if self.times[0] != 0.0 || self.values[0] != 0.0 {
            return Err(Error::InconsistentInput(
                "driving function must start at (0, 0)".into(),
            ));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InconsistentInput(
                "times must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Brownian-bridge midpoint refinement: halves every step, keeping existing values.
    pub fn refine(&self, seed: u64) -> DrivingFunction {
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x6272_6964_6765);
        let mut times = Vec::with_capacity(2 * self.len());
        let mut values = Vec::with_capacity(2 * self.len());
        times.push(self.times[0]);
        values.push(self.values[0]);
        for k in 1..self.len() {
            let (t0, t1) = (self.times[k - 1], self.times[k]);
            let (u0, u1) = (self.values[k - 1], self.values[k]);
            let g: f64 = StandardNormal.sample(&mut rng);
            times.push(0.5 * (t0 + t1));
            values.push(0.5 * (u0 + u1) + g * (self.kappa * (t1 - t0) / 4.0).sqrt());
            times.push(t1);
            values.push(u1);
        }
        DrivingFunction {
            kappa: self.kappa,
            times,
            values,
        }
    }

    /// U'_t = λ U_{t/λ²}.
    pub fn rescaled(&self, lambda: f64) -> DrivingFunction {
        DrivingFunction {
            kappa: self.kappa,
            times: self.times.iter().map(|t| t * lambda * lambda).collect(),
            values: self.values.iter().map(|u| u * lambda).collect(),
        }
    }

    pub fn shifted(&self, c: f64) -> DrivingFunction {
        let mut d = self.clone();
        for v in d.values.iter_mut().skip(1) {
            *v += c;
        }
        d
    }
}

/// √κ·B on the uniform grid {0, dt, …, T}.
pub fn sample_driving(kappa: f64, horizon: f64, dt: f64, seed: u64) -> Result<DrivingFunction> {
    if !(dt > 0.0) {
        return Err(Error::config("dt", "must be positive"));
    }
    if !(horizon >= dt) {
        return Err(Error::config("horizon", "must be at least one step"));
    }
    let n = (horizon / dt).round() as usize;
    let times = (0..=n).map(|k| k as f64 * dt).collect();
    sample_driving_on_grid(kappa, times, seed)
}

/// √κ·B sampled on an arbitrary increasing grid starting at 0.
pub fn sample_driving_on_grid(kappa: f64, times: Vec<f64>, seed: u64) -> Result<DrivingFunction> {
    if !(kappa >= 0.0) {
        return Err(Error::config("kappa", "must be nonnegative"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(times.len());
    values.push(0.0);
    for k in 1..times.len() {
        let g: f64 = StandardNormal.sample(&mut rng);
        values.push(values[k - 1] + g * (kappa * (times[k] - times[k - 1])).sqrt());
    }
    let d = DrivingFunction {
        kappa,
        times,
        values,
    };
    d.validate()?;
    Ok(d)
}

/// Time grid whose steps shrink near the start so that, after transport to the disc,
/// consecutive trace points are roughly `h` apart: dt(t) = (h (1 + 5t) / 5)².
pub fn disc_time_grid(h: f64, horizon: f64) -> Vec<f64> {
    let mut t = 0.0;
    let mut times = vec![0.0];
    while t < horizon {
        let s = h * (1.0 + 5.0 * t) / 5.0;
        t += s * s;
        times.push(t);
    }
    times
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceH {
    /// Slit tips.
    pub points: Vec<Complex64>,
    /// Where each slit is attached to the hull built before it. Away from swallowing
    /// times this is the previous tip; when the driving function jumps past the image of
    /// an earlier part of the curve it lands there, closing the enclosed region.
    pub bases: Vec<Complex64>,
    pub capacity_times: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
pub struct TraceWire {
    pub kappa: f64,
    pub dt: f64,
    pub seed: u64,
    pub points: Vec<[f64; 2]>,
}

impl TraceH {
    /// Tips and attachment points interleaved: 0, b₁, γ₁, b₂, γ₂, …
    pub fn polyline(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(2 * self.points.len());
        out.push(self.points[0]);
        for k in 1..self.points.len() {
            out.push(self.bases[k]);
            out.push(self.points[k]);
        }
        out
    }

    pub fn wire(&self, kappa: f64, dt: f64, seed: u64) -> TraceWire {
        TraceWire {
            kappa,
            dt,
            seed,
            points: self.points.iter().map(|p| [p.re, p.im]).collect(),
        }
    }
}

/// Square root of `s` in the closed upper half-plane; on the real axis the sign follows `hint`.
#[inline]
fn sqrt_upper(s: Complex64, hint: f64) -> Complex64 {
    let (x, y) = (s.re, s.im);
    let r = (x * x + y * y).sqrt();
    if y == 0.0 {
        return if x >= 0.0 {
            Complex64::new(x.sqrt().copysign(hint), 0.0)
        } else {
            Complex64::new(0.0, (-x).sqrt())
        };
    }
    if x >= 0.0 {
        let a = (0.5 * (r + x)).sqrt();
        Complex64::new(a.copysign(y), y.abs() / (2.0 * a))
    } else {
        let b = (0.5 * (r - x)).sqrt();
        Complex64::new(y / (2.0 * b), b)
    }
}

/// One forward step g ↦ U + √((g − U)² + 4dt).
#[inline]
fn forward(w: Complex64, u: f64, dt: f64) -> Complex64 {
    let d = w - u;
    u + sqrt_upper(d * d + 4.0 * dt, d.re)
}

/// One inverse step w ↦ U + √((w − U)² − 4dt).
#[inline]
fn inverse(w: Complex64, u: f64, dt: f64) -> Complex64 {
    let d = w - u;
    u + sqrt_upper(d * d - 4.0 * dt, d.re)
}

/// Trace points γ(t_n) = h₁⁻¹∘…∘h_{n−1}⁻¹(U_n + 2i√dt_n), driving held at U_k over step k,
/// together with the hull point each slit grows from, h₁⁻¹∘…∘h_{n−1}⁻¹(U_n).
pub fn trace_from_driving(drv: &DrivingFunction) -> Result<TraceH> {
    drv.validate()?;
    let n = drv.len();
    let dts: Vec<f64> = (1..n).map(|k| drv.times[k] - drv.times[k - 1]).collect();
    let pull = |k: usize, mut w: Complex64| -> Result<Complex64> {
        for j in (1..k).rev() {
            w = inverse(w, drv.values[j], dts[j - 1]);
            if !w.re.is_finite() || !w.im.is_finite() || w.im < -1e-12 {
                return Err(Error::StepUnstable(k));
            }
        }
        Ok(Complex64::new(w.re, w.im.max(0.0)))
    };
    let mut points = vec![Complex64::new(0.0, 0.0)];
    let mut bases = vec![Complex64::new(0.0, 0.0)];
    for k in 1..n {
        points.push(pull(
            k,
            Complex64::new(drv.values[k], 2.0 * dts[k - 1].sqrt()),
        )?);
        bases.push(pull(k, Complex64::new(drv.values[k], 0.0))?);
    }
    Ok(TraceH {
        points,
        bases,
        capacity_times: drv.times.clone(),
    })
}

/// Retries with Brownian-bridge refined driving (dt halved) after StepUnstable.
pub fn trace_with_refinement(
    drv: &DrivingFunction,
    seed: u64,
    max_halvings: u32,
) -> Result<(DrivingFunction, TraceH)> {
    let mut d = drv.clone();
    let mut halvings = 0;
    loop {
        match trace_from_driving(&d) {
            Ok(t) => return Ok((d, t)),
            Err(Error::StepUnstable(_)) if halvings < max_halvings => {
                halvings += 1;
                d = d.refine(seed.wrapping_add(halvings as u64));
            }
            Err(e) => return Err(e),
        }
    }
}

/// Half-plane capacity of the discrete hull, read off g(z) = z + 2t/z + … at large z.
/// Increments are accumulated in the cancellation-free form 4dt / (√(d² + 4dt) + d).
pub fn hull_capacity(drv: &DrivingFunction, probe: f64) -> f64 {
    let z = Complex64::new(0.0, probe);
    let mut w = z;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..drv.len() {
        let dt = drv.times[k] - drv.times[k - 1];
        let d = w - drv.values[k];
        let r = sqrt_upper(d * d + 4.0 * dt, d.re);
        let inc = 4.0 * dt / (r + d);
        acc += inc;
        w += inc;
    }
    (z * acc).re / 2.0
}

/// Side of `z` relative to the curve: `Some(true)` when the curve passes to the right of z.
/// Decided when arg(g_t(z) − U_t) comes within `theta` of 0 or π; `None` if undecided by the horizon.
pub fn passes_right(drv: &DrivingFunction, z: Complex64, theta: f64) -> Option<bool> {
    let mut w = z;
    for k in 1..drv.len() {
        let dt = drv.times[k] - drv.times[k - 1];
        w = forward(w, drv.values[k], dt);
        let d = w - drv.values[k];
        let arg = d.im.atan2(d.re);
        if arg < theta {
            return Some(false);
        }
        if arg > PI - theta {
            return Some(true);
        }
    }
    None
}

/// Side of z at the end of the driving function, decided as in [`passes_right`] with
/// θ = 10⁻⁴ and by the sign of Re(g_T(z) − U_T) when still undecided.
pub fn ends_left_of_curve(drv: &DrivingFunction, z: Complex64) -> bool {
    passes_right(drv, z, 1e-4).unwrap_or_else(|| {
        let mut w = z;
        for j in 1..drv.len() {
            w = forward(w, drv.values[j], drv.times[j] - drv.times[j - 1]);
        }
        (w - drv.values[drv.len() - 1]).re < 0.0
    })
}

/// Fraction of driving samples whose curve passes to the left of z (z ends up on its
/// right), the event of [`schramm_left`], with a Wilson interval at normal quantile `zq`.
pub fn left_passage_stat(drvs: &[DrivingFunction], z: Complex64, zq: f64) -> EstimateWithCI {
    let k = drvs.iter().filter(|d| !ends_left_of_curve(d, z)).count();
    wilson(k, drvs.len(), zq)
}

/// [`left_passage_stat`] over `n_samples` fresh driving functions on a uniform grid,
/// generated one at a time from the split seeds of `seed0`.
pub fn left_passage_probability(
    kappa: f64,
    z: Complex64,
    horizon: f64,
    dt: f64,
    n_samples: usize,
    seed0: u64,
) -> Result<EstimateWithCI> {
    if !(z.im > 0.0) {
        return Err(Error::config("z", "point must lie in the upper half-plane"));
    }
    let hits = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            Ok(!ends_left_of_curve(
                &sample_driving(kappa, horizon, dt, split_seed(seed0, i))?,
                z,
            ))
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(wilson(hits.iter().filter(|&&b| b).count(), n_samples, Z95))
}

fn schramm_constant(kappa: f64) -> f64 {
    let a = 4.0 / kappa;
    gamma(a) / (PI.sqrt() * gamma(a - 0.5))
}

/// ∫₀^x (1 + s²)^(−a) ds, as ∫₀^{atan x} cos^(2a−2) u du by composite Simpson.
fn schramm_integral_quadrature(x: f64, a: f64) -> f64 {
    let n = 20_000;
    let end = x.atan();
    let h = end / n as f64;
    let f = |u: f64| u.cos().powf(2.0 * a - 2.0);
    let mut acc = f(0.0) + f(end);
    for i in 1..n {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// x·₂F₁(1/2, a; 3/2; −x²) by its power series, valid for |x| < 1.
fn schramm_integral_series(x: f64, a: f64) -> f64 {
    assert!(x.abs() < 1.0);
    let y = -x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..10_000 {
        let nf = n as f64;
        term *= (0.5 + nf) * (a + nf) / ((1.5 + nf) * (nf + 1.0)) * y;
        sum += term;
        if term.abs() < 1e-17 {
            break;
        }
    }
    x * sum
}

/// Probability that the chordal trace from 0 to ∞ passes to the left of z.
pub fn schramm_left(kappa: f64, z: Complex64) -> f64 {
    let x = z.re / z.im;
    0.5 + schramm_constant(kappa) * schramm_integral_quadrature(x, 4.0 / kappa)
}

/// Same value through the hypergeometric series (|Re z| < Im z only).
pub fn schramm_left_series(kappa: f64, z: Complex64) -> f64 {
    let x = z.re / z.im;
    0.5 + schramm_constant(kappa) * schramm_integral_series(x, 4.0 / kappa)
}

/// z ↦ (αz + β)/(γz + θ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusMap {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub theta: Complex64,
}

impl MobiusMap {
    /// ℍ → 𝔻 with 0 ↦ a and ∞ ↦ b; f(z) = (bz + aλ)/(z + λ), λ = −i(bā − 1)/|bā − 1|.
    /// When a = −b this sends i to the center.
    pub fn half_plane_to_disc(a: Complex64, b: Complex64) -> Result<Self> {
        if (a.norm() - 1.0).abs() > 1e-9 || (b.norm() - 1.0).abs() > 1e-9 || (a - b).norm() < 1e-12
        {
            return Err(Error::InvalidEndpoints(
                "a, b must be distinct points of the unit circle".into(),
            ));
        }
        let c = b * a.conj() - 1.0;
        let lambda = Complex64::new(0.0, -1.0) * c / c.norm();
        Ok(MobiusMap {
            alpha: b,
            beta: a * lambda,
            gamma: Complex64::new(1.0, 0.0),
            theta: lambda,
        })
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.alpha * z + self.beta) / (self.gamma * z + self.theta)
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap {
            alpha: self.theta,
            beta: -self.beta,
            gamma: -self.gamma,
            theta: self.alpha,
        }
    }

    pub fn determinant(&self) -> Complex64 {
        self.alpha * self.theta - self.beta * self.gamma
    }
}

/// Transport of an ℍ-trace into the disc; the image starts at a.
pub fn map_to_disc(tr: &TraceH, a: Complex64, b: Complex64) -> Result<Vec<Complex64>> {
    let f = MobiusMap::half_plane_to_disc(a, b)?;
    Ok(tr.points.iter().map(|&z| f.apply(z)).collect())
}

/// SLE_κ trace in 𝔻 from −i to i resolved at spacing about `h`, run until the ℍ-trace
/// reaches modulus ~4/h, so the disc image ends within ~h of i.
pub fn disc_trace(kappa: f64, h: f64, seed: u64) -> Result<Vec<Complex64>> {
    let horizon = (4.0 / h).powi(2) / (2.0 * kappa.max(1.0));
    let drv = sample_driving_on_grid(kappa, disc_time_grid(h, horizon), seed)?;
    let (_, tr) = trace_with_refinement(&drv, seed, 3)?;
    let f = MobiusMap::half_plane_to_disc(Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0))?;
    Ok(tr.polyline().into_iter().map(|z| f.apply(z)).collect())
}

const OUT: i32 = -2;
const PATH: i32 = -1;
const FREE: i32 = -3;

/// Rasterized complement of a curve in 𝔻 from a to b, split into 4-connected components.
#[derive(Clone, Debug)]
pub struct TraceRaster {
    n: usize,
    h: f64,
    origin: f64,
    cells: Vec<i32>,
    comp_type: Vec<Option<DomainType>>,
    comp_area: Vec<usize>,
}

impl TraceRaster {
    pub fn new(path: &[Complex64], a: Complex64, b: Complex64, h: f64) -> Self {
        let origin = -(1.0 + 4.0 * h);
        let n = ((2.0 * -origin) / h).ceil() as usize;
        let mut cells = vec![OUT; n * n];
        let center = |i: usize| origin + (i as f64 + 0.5) * h;
        for j in 0..n {
            for i in 0..n {
                if Complex64::new(center(i), center(j)).norm() < 1.0 {
                    cells[j * n + i] = FREE;
                }
            }
        }
        // closing stubs through the rim at both ends
        let mut ext = Vec::with_capacity(path.len() + 3);
        ext.push(a * (1.0 + 3.0 * h));
        ext.extend_from_slice(path);
        ext.push(b);
        ext.push(b * (1.0 + 3.0 * h));
        let mut seg_lo = vec![usize::MAX; n * n];
        let mut seg_hi = vec![0usize; n * n];
        let cell_of = |p: Complex64| -> Option<usize> {
            let i = ((p.re - origin) / h).floor();
            let j = ((p.im - origin) / h).floor();
            if i < 0.0 || j < 0.0 || i >= n as f64 || j >= n as f64 {
                None
            } else {
                Some(j as usize * n + i as usize)
            }
        };
        let mut segs: Vec<(usize, Complex64, Complex64)> = (0..ext.len() - 1)
            .map(|s| (s, ext[s], ext[s + 1]))
            .collect();
        // points within half a cell of the circle count as boundary contacts
        for (s, &p) in ext.iter().enumerate().take(ext.len() - 1) {
            let r = p.norm();
            if r > 1.0 - 0.5 * h && r > 0.0 {
                segs.push((s, p, p / r * (1.0 + 2.0 * h)));
            }
        }
        for (s, p, q) in segs {
            let m = ((q - p).norm() / (0.25 * h)).ceil().max(1.0) as usize;
            for k in 0..=m {
                let x = p + (q - p) * (k as f64 / m as f64);
                if let Some(c) = cell_of(x) {
                    cells[c] = PATH;
                    seg_lo[c] = seg_lo[c].min(s);
                    seg_hi[c] = seg_hi[c].max(s);
                }
            }
        }
        let arc_ab = ccw_angle(a, b);
        let mut comp_type = Vec::new();
        let mut comp_area = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..n * n {
            if cells[start] != FREE {
                continue;
            }
            let id = comp_type.len() as i32;
            cells[start] = id;
            queue.push_back(start);
            let (mut right, mut left, mut area) = (false, false, 0usize);
            let (mut t0, mut t1) = (usize::MAX, 0usize);
            while let Some(c) = queue.pop_front() {
                area += 1;
                let (i, j) = (c % n, c / n);
                let nbrs = [
                    (i > 0).then(|| c - 1),
                    (i + 1 < n).then(|| c + 1),
                    (j > 0).then(|| c - n),
                    (j + 1 < n).then(|| c + n),
                ];
                for nb in nbrs {
                    let Some(nb) = nb else {
                        continue;
                    };
                    match cells[nb] {
                        FREE => {
                            cells[nb] = id;
                            queue.push_back(nb);
                        }
                        OUT => {
                            let p = Complex64::new(center(i), center(j));
                            if ccw_angle(a, p) < arc_ab {
                                right = true;
                            } else {
                                left = true;
                            }
                        }
                        PATH => {
                            t0 = t0.min(seg_lo[nb]);
                            t1 = t1.max(seg_hi[nb]);
                        }
                        _ => {}
                    }
                }
            }
            let dtype = match (right, left) {
                (true, false) => Some(DomainType::T2),
                (false, true) => Some(DomainType::T1),
                (true, true) => None,
                (false, false) if t0 <= t1 => {
                    let p = Complex64::new(center(start % n), center(start / n));
                    match winding(&ext[t0..=(t1 + 1).min(ext.len() - 1)], p) {
                        1 => Some(DomainType::T3),
                        -1 => Some(DomainType::T4),
                        _ => None,
                    }
                }
                _ => None,
            };
            comp_type.push(dtype);
            comp_area.push(area);
        }
        TraceRaster {
            n,
            h,
            origin,
            cells,
            comp_type,
            comp_area,
        }
    }

    pub fn resolution(&self) -> f64 {
        self.h
    }

    pub fn classify(&self, z: Complex64) -> Result<DomainType> {
        let n = self.n as i64;
        let i = ((z.re - self.origin) / self.h).floor() as i64;
        let j = ((z.im - self.origin) / self.h).floor() as i64;
        if i < 0 || j < 0 || i >= n || j >= n {
            return Err(Error::Indeterminate);
        }
        for dj in -2..=2 {
            for di in -2..=2 {
                let (x, y) = (i + di, j + dj);
                if x >= 0 && y >= 0 && x < n && y < n && self.cells[(y * n + x) as usize] == PATH {
                    return Err(Error::Indeterminate);
                }
            }
        }
        let c = self.cells[(j * n + i) as usize];
        if c < 0 {
            return Err(Error::Indeterminate);
        }
        self.comp_type[c as usize].ok_or(Error::Indeterminate)
    }

    /// Area (cell counts) per type T1..T4 and unclassified area.
    pub fn type_areas(&self) -> ([usize; 4], usize) {
        let mut by = [0usize; 4];
        let mut none = 0;
        for (t, &a) in self.comp_type.iter().zip(&self.comp_area) {
            match t {
                Some(t) => by[type_index(*t)] += a,
                None => none += a,
            }
        }
        (by, none)
    }
}

pub fn type_index(t: DomainType) -> usize {
    match t {
        DomainType::T1 => 0,
        DomainType::T2 => 1,
        DomainType::T3 => 2,
        DomainType::T4 => 3,
    }
}

fn ccw_angle(from: Complex64, to: Complex64) -> f64 {
    let d = to.arg() - from.arg();
    d.rem_euclid(2.0 * PI)
}

/// Winding number of the closed polyline (last point joined back to the first) around p.
fn winding(poly: &[Complex64], p: Complex64) -> i64 {
    let mut total = 0.0;
    for k in 0..poly.len() {
        let u = poly[k] - p;
        let v = poly[(k + 1) % poly.len()] - p;
        total += (v / u).arg();
    }
    (total / (2.0 * PI)).round() as i64
}

/// Type of the component of 𝔻 ∖ path holding z, at raster resolution h.
pub fn classify_domains_of_trace(
    path: &[Complex64],
    a: Complex64,
    b: Complex64,
    z: Complex64,
    h: f64,
) -> Result<DomainType> {
    TraceRaster::new(path, a, b, h).classify(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_driving_is_vertical_slit() {
        let drv = sample_driving(0.0, 1.0, 1e-3, 1).unwrap();
        assert!(drv.values.iter().all(|&u| u == 0.0));
        let tr = trace_from_driving(&drv).unwrap();
        for (p, t) in tr.points.iter().zip(&tr.capacity_times).skip(1) {
            let want = 2.0 * t.sqrt();
            assert!(p.re.abs() < 1e-9);
            assert!((p.im - want).abs() / want < 1e-3);
        }
    }

    #[test]
    fn slit_bases() {
        let drv = sample_driving(0.0, 0.1, 1e-3, 1).unwrap();
        let tr = trace_from_driving(&drv).unwrap();
        for k in 2..tr.points.len() {
            assert!((tr.bases[k] - tr.points[k - 1]).norm() < 1e-9);
        }
        // a jump clear of the hull attaches the next slit to the real line
        let jump = DrivingFunction {
            kappa: 0.0,
            times: vec![0.0, 0.01, 0.02],
            values: vec![0.0, 0.0, 1.0],
        };
        let tr = trace_from_driving(&jump).unwrap();
        assert!(tr.bases[2].im == 0.0 && tr.bases[2].re > 0.2);
        // a jump onto the slit's image attaches to the slit's right side, below its tip
        let onto = DrivingFunction {
            kappa: 0.0,
            times: vec![0.0, 0.01, 0.02],
            values: vec![0.0, 0.0, 0.1],
        };
        let tr = trace_from_driving(&onto).unwrap();
        let b = tr.bases[2];
        assert!(b.re.abs() < 1e-9 && b.im > 0.0 && b.im < tr.points[1].im);
        assert_eq!(tr.polyline().len(), 5);
    }

    #[test]
    fn constant_shift_translates() {
        let drv = sample_driving(6.0, 0.2, 1e-3, 5).unwrap();
        let a = trace_from_driving(&drv).unwrap();
        let b = trace_from_driving(&drv.shifted(0.7)).unwrap();
        // U ≡ c after the first step: every point moves by c except the origin
        for (p, q) in a.points.iter().zip(&b.points).skip(1) {
            assert!((q - p - 0.7).norm() < 1e-9);
        }
    }

    #[test]
    fn brownian_scaling() {
        let drv = sample_driving(6.0, 0.5, 1e-3, 9).unwrap();
        let a = trace_from_driving(&drv).unwrap();
        let b = trace_from_driving(&drv.rescaled(3.0)).unwrap();
        for (p, q) in a.points.iter().zip(&b.points) {
            assert!((q - p * 3.0).norm() < 1e-8 * (1.0 + q.norm()));
        }
    }

    #[test]
    fn driving_moments() {
        let n = 10_000;
        let mut ends = Vec::with_capacity(n);
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for s in 0..n as u64 {
            let d = sample_driving(6.0, 1.0, 0.1, s).unwrap();
            ends.push(d.values[10]);
            a.push(d.values[3]);
            b.push(d.values[8] - d.values[5]);
        }
        let var = ends.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((var - 6.0).abs() / 6.0 < 0.05, "{var}");
        let (ma, va) = crate::stats::mean_var(&a);
        let (mb, vb) = crate::stats::mean_var(&b);
        let cov = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - ma) * (y - mb))
            .sum::<f64>()
            / n as f64;
        assert!((cov / (va * vb).sqrt()).abs() < 0.05);
        assert_eq!(
            sample_driving(6.0, 1.0, 0.1, 3).unwrap(),
            sample_driving(6.0, 1.0, 0.1, 3).unwrap()
        );
    }

    #[test]
    fn capacity_normalization() {
        for seed in 0..5 {
            let drv = sample_driving(6.0, 1.0, 1e-3, seed).unwrap();
            let cap = hull_capacity(&drv, 1e7);
            assert!((cap - 1.0).abs() < 1e-6, "{cap}");
        }
        let g = sample_driving_on_grid(6.0, disc_time_grid(1.0 / 16.0, 3.0), 2).unwrap();
        assert!((hull_capacity(&g, 1e7) / g.horizon() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn refinement_keeps_grid_values() {
        let drv = sample_driving(6.0, 0.1, 0.01, 4).unwrap();
        let r = drv.refine(1);
        assert_eq!(r.len(), 2 * drv.len() - 1);
        for k in 0..drv.len() {
            assert_eq!(r.values[2 * k], drv.values[k]);
        }
        let (_, tr) = trace_with_refinement(&drv, 1, 2).unwrap();
        assert!(tr.points.iter().all(|p| p.im >= 0.0));
    }

    #[test]
    fn mobius_normalization() {
        let f = MobiusMap::half_plane_to_disc(-I, I).unwrap();
        assert!(f.apply(I).norm() < 1e-15);
        assert!((f.apply(c(0.0, 0.0)) + I).norm() < 1e-15);
        assert!((f.apply(c(1e12, 0.0)) - I).norm() < 1e-9);
        let (a, b) = (
            Complex64::from_polar(1.0, 0.3),
            Complex64::from_polar(1.0, 2.1),
        );
        let g = MobiusMap::half_plane_to_disc(a, b).unwrap();
        assert!(g.determinant().norm() > 0.0);
        assert!((g.apply(c(0.0, 0.0)) - a).norm() < 1e-12);
        for x in [-50.0, -1.0, -0.2, 0.0, 0.4, 3.0, 1e3] {
            assert!((g.apply(c(x, 0.0)).norm() - 1.0).abs() < 1e-12);
        }
        let inv = g.inverse();
        for z in [c(0.3, 0.7), c(-2.0, 0.1), c(5.0, 9.0)] {
            assert!(g.apply(z).norm() < 1.0);
            assert!((inv.apply(g.apply(z)) - z).norm() < 1e-10);
        }
    }

    #[test]
    fn chord_classification() {
        let path: Vec<Complex64> = (0..=200).map(|k| c(0.0, -1.0 + k as f64 / 100.0)).collect();
        let h = 1.0 / 128.0;
        assert_eq!(
            classify_domains_of_trace(&path, -I, I, c(0.5, 0.0), h).unwrap(),
            DomainType::T2
        );
        assert_eq!(
            classify_domains_of_trace(&path, -I, I, c(-0.5, 0.0), h).unwrap(),
            DomainType::T1
        );
        assert!(matches!(
            classify_domains_of_trace(&path, -I, I, c(0.01, 0.2), h),
            Err(Error::Indeterminate)
        ));
    }

    #[test]
    fn loop_bubbles_follow_winding() {
        let h = 1.0 / 128.0;
        // chord with a ccw detour loop around (-0.3, 0) attached at (0, 0)
        let mut path = vec![];
        for k in 0..=100 {
            path.push(c(0.0, -1.0 + k as f64 / 100.0));
        }
        for k in 1..=200 {
            let th = 2.0 * PI * k as f64 / 200.0;
            path.push(c(-0.3 + 0.3 * th.cos(), 0.3 * th.sin()));
        }
        for k in 1..=100 {
            path.push(c(0.0, k as f64 / 100.0));
        }
        let r = TraceRaster::new(&path, -I, I, h);
        assert_eq!(r.classify(c(-0.3, 0.0)).unwrap(), DomainType::T3);
        let mirrored: Vec<Complex64> = path.iter().map(|p| c(-p.re, p.im)).collect();
        let r = TraceRaster::new(&mirrored, -I, I, h);
        assert_eq!(r.classify(c(0.3, 0.0)).unwrap(), DomainType::T4);
    }

    #[test]
    fn sle_trace_classification_stable_under_refinement() {
        let h = 1.0 / 64.0;
        let path = disc_trace(6.0, h, 11).unwrap();
        let coarse = TraceRaster::new(&path, -I, I, h);
        let fine = TraceRaster::new(&path, -I, I, h / 2.0);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let (mut tested, mut agree) = (0, 0);
        while tested < 1000 {
            let z = c(
                rand::Rng::random_range(&mut rng, -1.0..1.0),
                rand::Rng::random_range(&mut rng, -1.0..1.0),
            );
            if z.norm() >= 1.0 {
                continue;
            }
            let (Ok(x), Ok(y)) = (coarse.classify(z), fine.classify(z)) else {
                continue;
            };
            tested += 1;
            if x == y {
                agree += 1;
            }
        }
        assert!(agree as f64 >= 0.99 * tested as f64, "{agree}/{tested}");
    }

    #[test]
    fn schramm_formula_two_evaluations_agree() {
        for x in [-0.9, -0.3, 0.0, 0.25, 0.577, 0.8] {
            let z = c(x, 1.0);
            assert!((schramm_left(6.0, z) - schramm_left_series(6.0, z)).abs() < 1e-10);
        }
        assert!((schramm_left(6.0, I) - 0.5).abs() < 1e-15);
        for x in [0.1, 1.0, 7.0] {
            let p = schramm_left(6.0, c(x, 1.0));
            assert!((p + schramm_left(6.0, c(-x, 1.0)) - 1.0).abs() < 1e-12);
            assert!(p > 0.5);
        }
        // at κ = 4 the constant is 1/π and the integral is arctan: P = 1/2 + arctan(x)/π
        let z = c(0.7, 1.3);
        let want = 0.5 + (0.7f64 / 1.3).atan() / PI;
        assert!((schramm_left(4.0, z) - want).abs() < 1e-10);
    }

    #[test]
    fn deterministic_passage() {
        let drv = sample_driving(0.0, 20.0, 1e-3, 0).unwrap();
        assert_eq!(passes_right(&drv, c(-1.0, 1.0), 0.05), Some(true));
        assert_eq!(passes_right(&drv, c(1.0, 1.0), 0.05), Some(false));
        // the slit passes to the left of points on its right
        let e = left_passage_stat(&[drv.clone(), drv.clone()], c(1.0, 1.0), 1.96);
        assert_eq!(e.mean, 1.0);
        assert_eq!(left_passage_stat(&[drv], c(-1.0, 1.0), 1.96).mean, 0.0);
    }

    #[test]
    fn invalid_inputs() {
        assert!(sample_driving(-1.0, 1.0, 0.1, 0).is_err());
        assert!(sample_driving(1.0, 1.0, 0.0, 0).is_err());
        assert!(MobiusMap::half_plane_to_disc(I, I).is_err());
    }
}
