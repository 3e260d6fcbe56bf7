//! Reproducible experiment runs: JSON configuration, artifacts with sha256 digests,
//! pooled reports with acceptance flags, and SVG rendering of loops and traces.
//!
//! Per-sample seeds are `split_seed(seed0, i)` for i = 0, 1, …, the same counter hash
//! that colours sites, so any single sample can be replayed from (seed0, i).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::construction::{prepare, run_full_construction, ConstructionWire};
use crate::domain::Shape;
use crate::exploration::Orientation;
use crate::lattice::{lattice_to_plane, split_seed, Color};
use crate::observables::arms::{arm_decay, ArmGeometry, ArmPattern};
use crate::observables::steps::{
    chopping_probability, k_steps_distribution, lattice_type_sample, sle_type_sample, TypeFractions,
};
use crate::observables::{
    annulus_crossing, cardy_rectangle, crossing_probability, sample_seeds, AnnulusSpec,
    CrossingShape,
};
use crate::oracle::{compare_loop_sets, extract_contours, CompareReport, DiscreteLoop, LoopWire};
use crate::sle::{disc_trace, left_passage_probability, schramm_left};
use crate::stats::{mean_ci, wilson, EstimateWithCI, Z95};
use crate::{Error, Result};

pub const CONFIG_VERSION: &str = "loopsim-run/1";
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SEED_SPLITTER: &str = "hash3(seed0, i, 0x5eed)";

/// What a run measures. Lengths are in the units of the shape (unit disc, unit-height
/// rectangle); `delta` of the enclosing config is the mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    Crossing {
        shape: CrossingShape,
    },
    Annulus {
        r_inner: f64,
        r_outer: f64,
    },
    ArmDecay {
        pattern: ArmPattern,
        r_outer: f64,
        ratios: Vec<f64>,
    },
    Chopping {
        #[serde(default = "two_thirds")]
        fraction: f64,
        #[serde(default)]
        meshes: Vec<f64>,
    },
    KSteps {
        #[serde(default)]
        meshes: Vec<f64>,
    },
    /// Full construction checked against the contour oracle, one sample per seed.
    Construction {
        #[serde(default = "Shape::unit_disc")]
        shape: Shape,
    },
    LeftPassage {
        z: [f64; 2],
        horizon: f64,
    },
    SleTrace {
        h: f64,
    },
    /// Lattice first exploration at mesh `delta` against SLE₆ traces, both rasterised at `h`.
    Types {
        h: f64,
    },
}

fn two_thirds() -> f64 {
    2.0 / 3.0
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Crossing { .. } => "crossing",
            Experiment::Annulus { .. } => "annulus",
            Experiment::ArmDecay { .. } => "arm_decay",
            Experiment::Chopping { .. } => "chopping",
            Experiment::KSteps { .. } => "k_steps",
            Experiment::Construction { .. } => "construction",
            Experiment::LeftPassage { .. } => "left_passage",
            Experiment::SleTrace { .. } => "sle_trace",
            Experiment::Types { .. } => "types",
        }
    }
}

fn default_kappa() -> f64 {
    6.0
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_jobs() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: String,
    pub experiment: Experiment,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub samples: usize,
    pub seed0: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(
            field,
            format!("must be a positive finite number, got {v}"),
        ))
    }
}

impl RunConfig {
    pub fn new(experiment: Experiment, delta: f64, samples: usize, seed0: u64) -> Self {
        RunConfig {
            version: CONFIG_VERSION.into(),
            experiment,
            delta,
            eps: None,
            kappa: 6.0,
            dt: None,
            samples,
            seed0,
            out: default_out(),
            jobs: 1,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::config(
                "version",
                format!("expected {CONFIG_VERSION}, got {}", self.version),
            ));
        }
        positive("delta", self.delta)?;
        if self.samples == 0 {
            return Err(Error::config("samples", "must be at least 1"));
        }
        if self.jobs == 0 {
            return Err(Error::config("jobs", "must be at least 1"));
        }
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(Error::config("kappa", "must be finite and nonnegative"));
        }
        if let Some(dt) = self.dt {
            positive("dt", dt)?;
        }
        if let Some(eps) = self.eps {
            positive("eps", eps)?;
            if eps <= 3.0 * self.delta {
                return Err(Error::config("eps", "cutoff must exceed three mesh units"));
            }
        }
        match &self.experiment {
            Experiment::Annulus { r_inner, r_outer } => {
                positive("r_inner", *r_inner)?;
                if !(r_outer > r_inner) {
                    return Err(Error::config("r_outer", "must exceed r_inner"));
                }
            }
            Experiment::ArmDecay {
                r_outer, ratios, ..
            } => {
                positive("r_outer", *r_outer)?;
                if ratios.len() < 2 {
                    return Err(Error::config("ratios", "need at least two radii"));
                }
            }
            Experiment::Chopping { fraction, meshes } => {
                if !(*fraction > 0.0 && *fraction <= 1.0) {
                    return Err(Error::config("fraction", "must lie in (0, 1]"));
                }
                for &m in meshes {
                    positive("meshes", m)?;
                }
            }
            Experiment::KSteps { meshes } => {
                if self.eps.is_none() {
                    return Err(Error::config("eps", "k_steps needs a cutoff"));
                }
                for &m in meshes {
                    positive("meshes", m)?;
                }
            }
            Experiment::Construction { .. } => {
                if self.eps.is_none() {
                    return Err(Error::config("eps", "construction needs a cutoff"));
                }
            }
            Experiment::LeftPassage { z, horizon } => {
                positive("horizon", *horizon)?;
                if !(z[1] > 0.0) {
                    return Err(Error::config("z", "point must lie in the upper half-plane"));
                }
            }
            Experiment::SleTrace { h } | Experiment::Types { h } => positive("h", *h)?,
            Experiment::Crossing { .. } => {}
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        sample_seeds(self.seed0, self.samples)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRange {
    pub seed0: u64,
    pub count: usize,
    pub splitter: String,
}

/// One estimate. `successes` is set for proportions, which pool exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub observable: String,
    pub label: String,
    pub params: Value,
    pub mean: f64,
    pub ci: [f64; 2],
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub successes: Option<usize>,
    pub seeds: SeedRange,
}

impl EstimateRow {
    fn from_ci(
        observable: &str,
        label: impl Into<String>,
        params: Value,
        e: &EstimateWithCI,
        seeds: SeedRange,
    ) -> Self {
        EstimateRow {
            observable: observable.into(),
            label: label.into(),
            params,
            mean: e.mean,
            ci: [e.lower, e.upper],
            n: e.n,
            successes: None,
            seeds,
        }
    }

    fn proportion(
        observable: &str,
        label: impl Into<String>,
        params: Value,
        e: &EstimateWithCI,
        seeds: SeedRange,
    ) -> Self {
        let mut r = Self::from_ci(observable, label, params, e, seeds);
        r.successes = Some((e.mean * e.n as f64).round() as usize);
        r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub code_version: String,
    pub seed_splitter: String,
    /// Per-sample seeds of the primary sample stream.
    pub seeds: Vec<u64>,
    pub wall_seconds: f64,
    pub estimates: Vec<EstimateRow>,
    pub outputs: Vec<OutputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    /// Artifacts in `dir` whose content no longer matches the recorded digest.
    pub fn tampered(&self, dir: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for o in &self.outputs {
            match fs::read(dir.join(&o.file)) {
                Ok(bytes) if sha256_hex(&bytes) == o.sha256 => {}
                _ => bad.push(o.file.clone()),
            }
        }
        Ok(bad)
    }
}

struct Writer {
    dir: PathBuf,
    outputs: Vec<OutputDigest>,
}

impl Writer {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.outputs.push(OutputDigest {
            file: name.into(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }
}

fn estimates_csv(rows: &[EstimateRow]) -> String {
    let mut s = String::from("observable,label,mean,lower,upper,n\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.observable, r.label, r.mean, r.ci[0], r.ci[1], r.n
        ));
    }
    s
}

/// Runs the configured experiment on a pool of `cfg.jobs` threads, writes
/// `estimates.json`, `estimates.csv`, any experiment artifacts and `manifest.json` into
/// `cfg.out`. Everything except `manifest.json` is a function of the config alone.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunManifest> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::config("jobs", e.to_string()))?;
    let start = Instant::now();
    let mut w = Writer {
        dir: cfg.out.clone(),
        outputs: Vec::new(),
    };
    let estimates = pool.install(|| dispatch(cfg, &mut w))?;
    w.json("estimates.json", &estimates)?;
    w.write("estimates.csv", estimates_csv(&estimates).as_bytes())?;
    let manifest = RunManifest {
        config: cfg.clone(),
        code_version: CODE_VERSION.into(),
        seed_splitter: SEED_SPLITTER.into(),
        seeds: cfg.seeds(),
        wall_seconds: start.elapsed().as_secs_f64(),
        estimates,
        outputs: w.outputs,
    };
    fs::write(
        cfg.out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(manifest)
}

/// Seed of the second, independent stream (SLE samples of a type comparison).
pub fn secondary_seed0(seed0: u64) -> u64 {
    split_seed(seed0, u64::MAX)
}

#[derive(Serialize)]
struct ConstructionSample {
    seed: u64,
    construction: ConstructionWire,
    discrepancies: CompareReport,
}

fn dispatch(cfg: &RunConfig, w: &mut Writer) -> Result<Vec<EstimateRow>> {
    let n = cfg.samples;
    let seeds = SeedRange {
        seed0: cfg.seed0,
        count: n,
        splitter: SEED_SPLITTER.into(),
    };
    let name = cfg.experiment.name();
    let delta = cfg.delta;
    let rows = match &cfg.experiment {
        Experiment::Crossing { shape } => {
            let e = crossing_probability(*shape, delta, n, cfg.seed0)?;
            let mut params = json!({ "shape": shape, "delta": delta });
            if let CrossingShape::Rectangle { aspect } = shape {
                params["cardy"] = json!(cardy_rectangle(*aspect));
            }
            vec![EstimateRow::proportion(name, "crossed", params, &e, seeds)]
        }
        Experiment::Annulus { r_inner, r_outer } => {
            let spec = AnnulusSpec::new(Complex64::new(0.0, 0.0), *r_inner, *r_outer)?;
            let e = annulus_crossing(&spec, delta, n, cfg.seed0)?;
            vec![EstimateRow::proportion(
                name,
                "crossed",
                json!({ "r_inner": r_inner, "r_outer": r_outer, "delta": delta }),
                &e,
                seeds,
            )]
        }
        Experiment::ArmDecay {
            pattern,
            r_outer,
            ratios,
        } => {
            let d = arm_decay(pattern, *r_outer, ratios, delta, n, cfg.seed0)?;
            w.json("arm_decay.json", &d)?;
            let mut rows: Vec<EstimateRow> = d
                .ratios
                .iter()
                .zip(&d.estimates)
                .map(|(r, e)| {
                    EstimateRow::proportion(
                        name,
                        format!("ratio={r}"),
                        json!({ "ratio": r, "r_outer": r_outer }),
                        e,
                        seeds.clone(),
                    )
                })
                .collect();
            let f = d.fit;
            let hw = 2.0 * f.slope_stderr;
            rows.push(EstimateRow {
                observable: name.into(),
                label: "slope".into(),
                params: json!({ "k": pattern.k, "geometry": pattern.geometry, "polychromatic": pattern.colors.is_none(), "stderr": f.slope_stderr, "intercept": f.intercept }),
                mean: f.slope,
                ci: [f.slope - hw, f.slope + hw],
                n,
                successes: None,
                seeds,
            });
            rows
        }
        Experiment::Chopping { fraction, meshes } => {
            let meshes = if meshes.is_empty() {
                vec![delta]
            } else {
                meshes.clone()
            };
            let mut rows = Vec::new();
            for m in meshes {
                let e = chopping_probability(m, n, cfg.seed0, *fraction)?;
                rows.push(EstimateRow::proportion(
                    name,
                    format!("mesh={m}"),
                    json!({ "mesh": m, "fraction": fraction }),
                    &e,
                    seeds.clone(),
                ));
            }
            rows
        }
        Experiment::KSteps { meshes } => {
            let meshes = if meshes.is_empty() {
                vec![delta]
            } else {
                meshes.clone()
            };
            let eps = cfg.eps.expect("validated");
            let dists = k_steps_distribution(eps, &meshes, n, cfg.seed0)?;
            w.json("k_steps.json", &dists)?;
            dists
                .iter()
                .map(|d| {
                    let ks: Vec<f64> = d.ks.iter().map(|&k| k as f64).collect();
                    let e = mean_ci(&ks, Z95);
                    let params =
                        json!({ "mesh": d.mesh, "eps": eps, "median": d.median, "p95": d.p95 });
                    EstimateRow::from_ci(
                        name,
                        format!("mesh={}", d.mesh),
                        params,
                        &e,
                        seeds.clone(),
                    )
                })
                .collect()
        }
        Experiment::Construction { shape } => {
            let eps = cfg.eps.expect("validated");
            let samples = cfg
                .seeds()
                .into_par_iter()
                .map(|s| {
                    let res = run_full_construction(shape, delta, eps, s, Color::Blue)?;
                    let (d, col) = prepare(shape, delta, s, Color::Blue)?;
                    let cs = extract_contours(&d, &col);
                    let discrepancies = compare_loop_sets(&res.loops, &cs, eps);
                    Ok(ConstructionSample {
                        seed: s,
                        construction: res.wire(),
                        discrepancies,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            w.json("constructions.json", &samples)?;
            let agree = samples
                .iter()
                .filter(|s| s.discrepancies.is_empty())
                .count();
            let e = wilson(agree, n, Z95);
            vec![EstimateRow::proportion(
                name,
                "oracle_agreement",
                json!({ "shape": shape, "delta": delta, "eps": eps }),
                &e,
                seeds,
            )]
        }
        Experiment::LeftPassage { z, horizon } => {
            let zc = Complex64::new(z[0], z[1]);
            let dt = cfg.dt.unwrap_or(1e-3);
            let e = left_passage_probability(cfg.kappa, zc, *horizon, dt, n, cfg.seed0)?;
            let params = json!({ "z": z, "kappa": cfg.kappa, "dt": dt, "horizon": horizon, "schramm": schramm_left(cfg.kappa, zc) });
            vec![EstimateRow::proportion(name, "left", params, &e, seeds)]
        }
        Experiment::SleTrace { h } => {
            let traces = cfg
                .seeds()
                .into_par_iter()
                .map(|s| {
                    Ok(disc_trace(cfg.kappa, *h, s)?
                        .iter()
                        .map(|p| [p.re, p.im])
                        .collect::<Vec<_>>())
                })
                .collect::<Result<Vec<Vec<[f64; 2]>>>>()?;
            w.json("traces.json", &json!({ "kappa": cfg.kappa, "h": h, "a": [0.0, -1.0], "b": [0.0, 1.0], "traces": traces }))?;
            let lens: Vec<f64> = traces.iter().map(|t| t.len() as f64).collect();
            vec![EstimateRow::from_ci(
                name,
                "points",
                json!({ "kappa": cfg.kappa, "h": h }),
                &mean_ci(&lens, Z95),
                seeds,
            )]
        }
        Experiment::Types { h } => {
            let lattice = cfg
                .seeds()
                .into_par_iter()
                .map(|s| Ok(lattice_type_sample(delta, *h, s)?.raster))
                .collect::<Result<Vec<_>>>()?;
            let sle = sample_seeds(secondary_seed0(cfg.seed0), n)
                .into_par_iter()
                .map(|s| sle_type_sample(*h, s))
                .collect::<Result<Vec<_>>>()?;
            let lattice: Vec<TypeFractions> = lattice.into_iter().flatten().collect();
            let sle: Vec<TypeFractions> = sle.into_iter().flatten().collect();
            let mut rows = Vec::new();
            for (side, set, seed0) in [
                ("lattice", &lattice, cfg.seed0),
                ("sle", &sle, secondary_seed0(cfg.seed0)),
            ] {
                for t in 0..4 {
                    let xs: Vec<f64> = set.iter().map(|f| f[t]).collect();
                    if xs.is_empty() {
                        continue;
                    }
                    let e = mean_ci(&xs, Z95);
                    let sr = SeedRange {
                        seed0,
                        count: n,
                        splitter: SEED_SPLITTER.into(),
                    };
                    rows.push(EstimateRow::from_ci(
                        name,
                        format!("{side}:T{}", t + 1),
                        json!({ "delta": delta, "h": h }),
                        &e,
                        sr,
                    ));
                }
            }
            rows
        }
    };
    Ok(rows)
}

/// Pass/fail verdict for one acceptance threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceFlag {
    pub criterion: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub observable: String,
    pub manifests: usize,
    pub estimates: Vec<EstimateRow>,
    pub acceptance: Vec<AcceptanceFlag>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.acceptance.iter().all(|a| a.passed)
    }
}

/// Pools proportions exactly (summed successes, Wilson interval) and other means as
/// n-weighted averages with standard errors combined in quadrature.
pub fn pool_rows(rows: &[&EstimateRow]) -> EstimateRow {
    let first = rows[0];
    let n: usize = rows.iter().map(|r| r.n).sum();
    let seeds = SeedRange {
        seed0: first.seeds.seed0,
        count: rows.iter().map(|r| r.seeds.count).sum(),
        splitter: first.seeds.splitter.clone(),
    };
    if rows.iter().all(|r| r.successes.is_some()) {
        let k: usize = rows.iter().map(|r| r.successes.unwrap()).sum();
        let mut out = EstimateRow::proportion(
            &first.observable,
            first.label.clone(),
            first.params.clone(),
            &wilson(k, n, Z95),
            seeds,
        );
        out.successes = Some(k);
        return out;
    }
    let nf = n as f64;
    let mean = rows.iter().map(|r| r.n as f64 * r.mean).sum::<f64>() / nf;
    let var: f64 = rows
        .iter()
        .map(|r| {
            let se = (r.ci[1] - r.ci[0]) / (2.0 * Z95);
            (r.n as f64 / nf * se).powi(2)
        })
        .sum();
    let hw = Z95 * var.sqrt();
    EstimateRow {
        observable: first.observable.clone(),
        label: first.label.clone(),
        params: first.params.clone(),
        mean,
        ci: [mean - hw, mean + hw],
        n,
        successes: None,
        seeds,
    }
}

fn comparable(a: &RunConfig, b: &RunConfig) -> bool {
    a.experiment == b.experiment
        && a.delta == b.delta
        && a.eps == b.eps
        && a.kappa == b.kappa
        && a.dt == b.dt
}

pub fn emit_report(manifests: &[RunManifest]) -> Result<Report> {
    let Some(first) = manifests.first() else {
        return Err(Error::InconsistentInput("no manifests to report on".into()));
    };
    for m in &manifests[1..] {
        if !comparable(&first.config, &m.config) {
            return Err(Error::MixedObservables(
                serde_json::to_string(&first.config.experiment)?,
                serde_json::to_string(&m.config.experiment)?,
            ));
        }
    }
    let mut labels: Vec<&str> = Vec::new();
    for r in &first.estimates {
        if !labels.contains(&r.label.as_str()) {
            labels.push(&r.label);
        }
    }
    let estimates: Vec<EstimateRow> = labels
        .iter()
        .map(|l| {
            let rows: Vec<&EstimateRow> = manifests
                .iter()
                .flat_map(|m| m.estimates.iter().filter(|r| r.label == *l))
                .collect();
            pool_rows(&rows)
        })
        .collect();
    let acceptance = acceptance_flags(&first.config, &estimates);
    Ok(Report {
        observable: first.config.experiment.name().into(),
        manifests: manifests.len(),
        estimates,
        acceptance,
    })
}

fn row<'a>(rows: &'a [EstimateRow], label: &str) -> Option<&'a EstimateRow> {
    rows.iter().find(|r| r.label == label)
}

/// Thresholds of the acceptance table that can be judged from one experiment's pooled rows.
pub fn acceptance_flags(cfg: &RunConfig, rows: &[EstimateRow]) -> Vec<AcceptanceFlag> {
    let flag = |criterion: &str, passed: bool, detail: String| AcceptanceFlag {
        criterion: criterion.into(),
        passed,
        detail,
    };
    let mut out = Vec::new();
    match &cfg.experiment {
        Experiment::Crossing { shape } => {
            let r = &rows[0];
            let (target, tol) = match shape {
                CrossingShape::Rhombus { .. } => (0.5, 0.015),
                CrossingShape::Rectangle { aspect } => (cardy_rectangle(*aspect), 0.01),
            };
            out.push(flag(
                "crossing_probability",
                (r.mean - target).abs() <= tol,
                format!("{:.5} vs {target:.5} ± {tol}", r.mean),
            ));
        }
        Experiment::ArmDecay { pattern, .. } => {
            if let (Some(r), None) = (row(rows, "slope"), &pattern.colors) {
                let se = r.params["stderr"].as_f64().unwrap_or(f64::NAN);
                let bound = match (pattern.k, pattern.geometry) {
                    (6, ArmGeometry::FullPlane) => Some(2.0),
                    (3, ArmGeometry::HalfPlane) => Some(1.0),
                    _ => None,
                };
                if let Some(b) = bound {
                    let lo = r.mean - 2.0 * se;
                    out.push(flag(
                        "arm_slope",
                        lo > b,
                        format!("slope {:.3} − 2·{se:.3} = {lo:.3} vs {b}", r.mean),
                    ));
                }
            }
        }
        Experiment::Chopping { .. } => {
            let lowest = rows.iter().map(|r| r.ci[0]).fold(f64::INFINITY, f64::min);
            out.push(flag(
                "chopping_floor",
                rows.iter().all(|r| r.mean >= 0.05 && r.ci[0] > 0.0),
                format!("lowest lower bound {lowest:.4}"),
            ));
        }
        Experiment::KSteps { .. } if rows.len() > 1 => {
            let p95: Vec<f64> = rows
                .iter()
                .filter_map(|r| r.params["p95"].as_f64())
                .collect();
            let (lo, hi) = p95
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
            let var = (hi - lo) / lo;
            out.push(flag(
                "k_p95_stability",
                var < 0.25,
                format!("p95 {p95:?}, variation {:.1}%", 100.0 * var),
            ));
        }
        Experiment::Construction { .. } => {
            let r = &rows[0];
            out.push(flag(
                "oracle_equivalence",
                r.successes == Some(r.n),
                format!("{} of {} samples agree", r.successes.unwrap_or(0), r.n),
            ));
        }
        Experiment::LeftPassage { .. } => {
            let r = &rows[0];
            let s = r.params["schramm"].as_f64().unwrap_or(f64::NAN);
            out.push(flag(
                "left_passage",
                r.ci[0] <= s && s <= r.ci[1],
                format!("{:.4} [{:.4}, {:.4}] vs {s:.4}", r.mean, r.ci[0], r.ci[1]),
            ));
        }
        Experiment::Types { .. } => {
            for t in 1..=4 {
                if let (Some(l), Some(c)) = (
                    row(rows, &format!("lattice:T{t}")),
                    row(rows, &format!("sle:T{t}")),
                ) {
                    let se = |r: &EstimateRow| (r.ci[1] - r.ci[0]) / (2.0 * Z95);
                    let s = (se(l).powi(2) + se(c).powi(2)).sqrt();
                    let z = if s > 0.0 { (l.mean - c.mean) / s } else { 0.0 };
                    out.push(flag(
                        &format!("type_T{t}"),
                        z.abs() <= 3.0,
                        format!("lattice {:.4} sle {:.4} z {z:.2}", l.mean, c.mean),
                    ));
                }
            }
        }
        _ => {}
    }
    out
}

/// p95 values of a k_steps run, in mesh order.
pub fn k_p95(rows: &[EstimateRow]) -> Vec<f64> {
    rows.iter()
        .filter_map(|r| r.params["p95"].as_f64())
        .collect()
}

/// A polyline to draw; closed curves get a final `Z`.
#[derive(Clone, Debug, PartialEq)]
pub struct SvgCurve {
    pub points: Vec<Complex64>,
    pub closed: bool,
    pub stroke: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvgStyle {
    /// Stroke width in plane units.
    pub width: f64,
    pub margin: f64,
    /// Drawn under the curves, e.g. the unit circle.
    pub frame: Option<Shape>,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            width: 0.004,
            margin: 0.05,
            frame: None,
        }
    }
}

pub const CW_STROKE: &str = "#1f5fbf";
pub const CCW_STROKE: &str = "#d08a00";
pub const TRACE_STROKE: &str = "#202020";

pub fn loop_curves(loops: &[DiscreteLoop], mesh: f64) -> Vec<SvgCurve> {
    loops
        .iter()
        .map(|l| SvgCurve {
            points: l.cycle.iter().map(|e| e.tail().position(mesh)).collect(),
            closed: true,
            stroke: orientation_stroke(l.orientation).into(),
        })
        .collect()
}

/// Same as [`loop_curves`] for loops read back from a JSON artifact.
pub fn wire_loop_curves(loops: &[LoopWire], mesh: f64) -> Vec<SvgCurve> {
    loops
        .iter()
        .map(|l| SvgCurve {
            points: l
                .edges
                .iter()
                .map(|e| lattice_to_plane((e[0], e[1]), mesh))
                .collect(),
            closed: true,
            stroke: orientation_stroke(l.orientation).into(),
        })
        .collect()
}

fn orientation_stroke(o: Orientation) -> &'static str {
    match o {
        Orientation::Cw => CW_STROKE,
        Orientation::Ccw => CCW_STROKE,
    }
}

pub fn trace_curve(points: &[Complex64]) -> SvgCurve {
    SvgCurve {
        points: points.to_vec(),
        closed: false,
        stroke: TRACE_STROKE.into(),
    }
}

/// One `<path>` per curve, in Cartesian orientation (y up).
pub fn render_svg(curves: &[SvgCurve], style: &SvgStyle) -> String {
    let mut pts = curves
        .iter()
        .flat_map(|c| c.points.iter().copied())
        .collect::<Vec<_>>();
    if let Some(f) = style.frame {
        let (x0, y0, x1, y1) = f.bbox();
        pts.extend([Complex64::new(x0, y0), Complex64::new(x1, y1)]);
    }
    if pts.is_empty() {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1 1\"/>\n".into();
    }
    let (mut x0, mut y0, mut x1, mut y1) = (
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for p in &pts {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(p.im);
        y1 = y1.max(p.im);
    }
    let m = style.margin;
    let (w, h) = ((x1 - x0) + 2.0 * m, (y1 - y0) + 2.0 * m);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n<g transform=\"scale(1,-1)\" fill=\"none\" stroke-width=\"{}\" stroke-linejoin=\"round\">\n",
        x0 - m,
        -(y1 + m),
        w,
        h,
        style.width
    );
    match style.frame {
        Some(Shape::Disc { cx, cy, radius }) => {
            s.push_str(&format!(
                "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"{radius}\" stroke=\"#999999\"/>\n"
            ));
        }
        Some(Shape::Rect { x0, y0, x1, y1 }) => {
            s.push_str(&format!(
                "<rect x=\"{x0}\" y=\"{y0}\" width=\"{}\" height=\"{}\" stroke=\"#999999\"/>\n",
                x1 - x0,
                y1 - y0
            ));
        }
        _ => {}
    }
    for c in curves {
        if c.points.is_empty() {
            continue;
        }
        let mut d = String::new();
        for (i, p) in c.points.iter().enumerate() {
            d.push_str(&format!(
                "{}{:.6} {:.6}",
                if i == 0 { "M" } else { " L" },
                p.re,
                p.im
            ));
        }
        if c.closed {
            d.push_str(" Z");
        }
        s.push_str(&format!("<path stroke=\"{}\" d=\"{d}\"/>\n", c.stroke));
    }
    s.push_str("</g>\n</svg>\n");
    s
}
