use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use loopsim::construction::{initial_endpoints, prepare, run_full_construction};
use loopsim::domain::Shape;
use loopsim::exploration::explore;
use loopsim::harness::{
    emit_report, render_svg, run_experiment, trace_curve, wire_loop_curves, Experiment, RunConfig,
    RunManifest, SvgStyle,
};
use loopsim::lattice::{split_seed, Color};
use loopsim::observables::arms::{ArmGeometry, ArmPattern};
use loopsim::observables::CrossingShape;
use loopsim::oracle::{extract_contours, LoopWire};
use loopsim::Error;

/// Percolation interface loops on the hexagonal lattice, their discrete
/// construction, and SLE₆ comparisons.
///
/// Settings come from `--config` (a run configuration JSON document) and are then
/// overridden field by field by any command-line flag that is given.
#[derive(Parser)]
#[command(name = "loopsim", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Common {
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed0: Option<u64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    delta: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Colour the discretised unit disc and write `coloring.json`.
    Gen(Common),
    /// Explore the unit disc from bottom to top and write `exploration.json`.
    Explore(Common),
    /// Run the full loop construction and write `construction.json`.
    Build(Common),
    /// Extract every interface loop directly and write `contours.json`.
    Oracle(Common),
    /// Check construction against oracle on `samples` seeds; exit 3 on any discrepancy.
    Compare(Common),
    /// Estimate an observable and write estimates with a manifest.
    Stats {
        observable: Observable,
        #[command(flatten)]
        common: Common,
    },
    /// SLE₆ traces and left-passage probabilities.
    Sle {
        #[command(subcommand)]
        cmd: SleCmd,
    },
    /// Draw loops or traces from a JSON artifact as SVG.
    Render {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Pool run manifests and check acceptance thresholds; exit 3 if any fails.
    Report {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum SleCmd {
    /// Chordal traces mapped into the unit disc from −i to i.
    Trace {
        /// Spatial resolution of the trace.
        #[arg(long, default_value_t = 1.0 / 32.0)]
        h: f64,
        #[arg(long)]
        kappa: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Probability that the trace passes to the right of `z`, leaving it on its left.
    LeftPassage {
        #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true, default_values_t = [0.0, 1.0])]
        z: Vec<f64>,
        #[arg(long, default_value_t = 20.0)]
        horizon: f64,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        kappa: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Observable {
    Crossing,
    Cardy,
    Annulus,
    SixArm,
    ThreeArm,
    Chopping,
    KSteps,
    Construction,
    Types,
}

/// Experiment used by `stats` when no config is given.
fn default_experiment(o: Observable) -> (Experiment, f64) {
    let arms = |pattern| Experiment::ArmDecay {
        pattern,
        r_outer: 64.0,
        ratios: vec![0.5, 0.25, 0.125, 0.0625],
    };
    match o {
        Observable::Crossing => (
            Experiment::Crossing {
                shape: CrossingShape::Rhombus { n: 32 },
            },
            1.0,
        ),
        Observable::Cardy => (
            Experiment::Crossing {
                shape: CrossingShape::Rectangle { aspect: 2.0 },
            },
            1.0 / 64.0,
        ),
        Observable::Annulus => (
            Experiment::Annulus {
                r_inner: 0.25,
                r_outer: 0.5,
            },
            1.0 / 64.0,
        ),
        Observable::SixArm => (
            arms(ArmPattern::polychromatic(6, ArmGeometry::FullPlane)),
            1.0,
        ),
        Observable::ThreeArm => (
            arms(ArmPattern::polychromatic(3, ArmGeometry::HalfPlane)),
            1.0,
        ),
        Observable::Chopping => (
            Experiment::Chopping {
                fraction: 2.0 / 3.0,
                meshes: vec![],
            },
            1.0 / 32.0,
        ),
        Observable::KSteps => (Experiment::KSteps { meshes: vec![] }, 1.0 / 64.0),
        Observable::Construction => (
            Experiment::Construction {
                shape: Shape::unit_disc(),
            },
            1.0 / 64.0,
        ),
        Observable::Types => (Experiment::Types { h: 1.0 / 32.0 }, 1.0 / 128.0),
    }
}

fn observable_matches(o: Observable, e: &Experiment) -> bool {
    match (o, e) {
        (
            Observable::Crossing,
            Experiment::Crossing {
                shape: CrossingShape::Rhombus { .. },
            },
        ) => true,
        (
            Observable::Cardy,
            Experiment::Crossing {
                shape: CrossingShape::Rectangle { .. },
            },
        ) => true,
        (Observable::SixArm | Observable::ThreeArm, Experiment::ArmDecay { .. }) => true,
        (Observable::Annulus, Experiment::Annulus { .. }) => true,
        (Observable::Chopping, Experiment::Chopping { .. }) => true,
        (Observable::KSteps, Experiment::KSteps { .. }) => true,
        (Observable::Construction, Experiment::Construction { .. }) => true,
        (Observable::Types, Experiment::Types { .. }) => true,
        _ => false,
    }
}

/// Loads `--config` if given, else starts from `fallback`, then applies flag overrides.
fn resolve(common: &Common, fallback: impl FnOnce() -> RunConfig) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            RunConfig::from_json(&text)?
        }
        None => fallback(),
    };
    if let Some(v) = common.seed0 {
        cfg.seed0 = v;
    }
    if let Some(v) = common.delta {
        cfg.delta = v;
    }
    if let Some(v) = common.eps {
        cfg.eps = Some(v);
    }
    if let Some(v) = common.samples {
        cfg.samples = v;
    }
    if let Some(v) = &common.out {
        cfg.out = v.clone();
    }
    if let Some(v) = common.jobs {
        cfg.jobs = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn lattice_config(common: &Common, samples: usize) -> anyhow::Result<RunConfig> {
    resolve(common, || {
        let mut c = RunConfig::new(
            Experiment::Construction {
                shape: Shape::unit_disc(),
            },
            1.0 / 64.0,
            samples,
            0,
        );
        c.eps = Some(0.125);
        c
    })
}

fn shape_of(cfg: &RunConfig) -> Shape {
    match &cfg.experiment {
        Experiment::Construction { shape } => *shape,
        _ => Shape::unit_disc(),
    }
}

fn write_json(dir: &Path, name: &str, v: &Value) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v)? + "\n")?;
    println!("wrote {}", p.display());
    Ok(p)
}

fn print_manifest(m: &RunManifest) {
    for r in &m.estimates {
        println!(
            "{} {}: {:.6} [{:.6}, {:.6}] n={}",
            r.observable, r.label, r.mean, r.ci[0], r.ci[1], r.n
        );
    }
    println!("wrote {}", m.config.out.join("manifest.json").display());
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.cmd {
        Cmd::Gen(common) => {
            let cfg = lattice_config(&common, 1)?;
            let seed = split_seed(cfg.seed0, 0);
            let (d, col) = prepare(&shape_of(&cfg), cfg.delta, seed, Color::Blue)?;
            let sites: Vec<Value> = d
                .sorted_hexes()
                .into_iter()
                .map(|h| json!([h.q, h.r, col.color(h)]))
                .collect();
            write_json(
                &cfg.out,
                "coloring.json",
                &json!({ "mesh": cfg.delta, "seed": seed, "sites": sites }),
            )?;
        }
        Cmd::Explore(common) => {
            let cfg = lattice_config(&common, 1)?;
            let seed = split_seed(cfg.seed0, 0);
            let shape = shape_of(&cfg);
            let (d, col) = prepare(&shape, cfg.delta, seed, Color::Blue)?;
            let (x, y) = initial_endpoints(&shape, &d)?;
            let res = explore(&d, x, y, &col)?;
            let v = json!({ "mesh": cfg.delta, "seed": seed, "x": x.lattice_xy(), "y": y.lattice_xy(), "exploration": res.wire() });
            write_json(&cfg.out, "exploration.json", &v)?;
        }
        Cmd::Build(common) => {
            let cfg = lattice_config(&common, 1)?;
            let seed = split_seed(cfg.seed0, 0);
            let eps = cfg.eps.context("build needs --eps")?;
            let res = run_full_construction(&shape_of(&cfg), cfg.delta, eps, seed, Color::Blue)?;
            let mut v = serde_json::to_value(res.wire())?;
            v["mesh"] = json!(cfg.delta);
            v["seed"] = json!(seed);
            write_json(&cfg.out, "construction.json", &v)?;
            println!("{} loops, K = {}", res.loops.len(), res.k_steps_to_cutoff);
        }
        Cmd::Oracle(common) => {
            let cfg = lattice_config(&common, 1)?;
            let seed = split_seed(cfg.seed0, 0);
            let (d, col) = prepare(&shape_of(&cfg), cfg.delta, seed, Color::Blue)?;
            let cs = extract_contours(&d, &col);
            let loops: Vec<LoopWire> = cs.loops.iter().map(|l| l.wire()).collect();
            write_json(
                &cfg.out,
                "contours.json",
                &json!({ "mesh": cfg.delta, "seed": seed, "loops": loops }),
            )?;
            println!("{} loops", loops.len());
        }
        Cmd::Compare(common) => {
            let cfg = lattice_config(&common, 1)?;
            if !matches!(cfg.experiment, Experiment::Construction { .. }) {
                bail!(Error::config(
                    "experiment",
                    "compare runs a construction experiment"
                ));
            }
            let m = run_experiment(&cfg)?;
            print_manifest(&m);
            if m.estimates[0].successes != Some(m.estimates[0].n) {
                eprintln!(
                    "discrepancies found; see {}",
                    cfg.out.join("constructions.json").display()
                );
                return Ok(ExitCode::from(3));
            }
        }
        Cmd::Stats { observable, common } => {
            let cfg = resolve(&common, || {
                let (e, delta) = default_experiment(observable);
                let mut c = RunConfig::new(e, delta, 1000, 0);
                if matches!(observable, Observable::KSteps | Observable::Construction) {
                    c.eps = Some(0.125);
                    c.samples = 20;
                }
                c
            })?;
            if !observable_matches(observable, &cfg.experiment) {
                bail!(Error::config(
                    "experiment",
                    format!(
                        "config describes {}, not the requested observable",
                        cfg.experiment.name()
                    )
                ));
            }
            print_manifest(&run_experiment(&cfg)?);
        }
        Cmd::Sle { cmd } => {
            let (common, kappa, dt, experiment) = match cmd {
                SleCmd::Trace { h, kappa, common } => {
                    (common, kappa, None, Experiment::SleTrace { h })
                }
                SleCmd::LeftPassage {
                    z,
                    horizon,
                    dt,
                    kappa,
                    common,
                } => (
                    common,
                    kappa,
                    dt,
                    Experiment::LeftPassage {
                        z: [z[0], z[1]],
                        horizon,
                    },
                ),
            };
            let samples = if matches!(experiment, Experiment::SleTrace { .. }) {
                1
            } else {
                1000
            };
            let mut cfg = resolve(&common, || {
                RunConfig::new(experiment.clone(), 1.0, samples, 0)
            })?;
            if let Some(k) = kappa {
                cfg.kappa = k;
            }
            if dt.is_some() {
                cfg.dt = dt;
            }
            cfg.validate()?;
            print_manifest(&run_experiment(&cfg)?);
        }
        Cmd::Render { input, common } => {
            let v: Value = serde_json::from_str(
                &fs::read_to_string(&input)
                    .with_context(|| format!("reading {}", input.display()))?,
            )?;
            let (curves, frame) = if let Some(traces) = v.get("traces") {
                let traces: Vec<Vec<[f64; 2]>> = serde_json::from_value(traces.clone())?;
                let curves = traces
                    .iter()
                    .map(|t| {
                        trace_curve(
                            &t.iter()
                                .map(|p| Complex64::new(p[0], p[1]))
                                .collect::<Vec<_>>(),
                        )
                    })
                    .collect();
                (curves, Some(Shape::unit_disc()))
            } else if let Some(loops) = v.get("loops") {
                let mesh = common
                    .delta
                    .or(v.get("mesh").and_then(Value::as_f64))
                    .context("artifact has no mesh; pass --delta")?;
                let loops: Vec<LoopWire> = serde_json::from_value(loops.clone())?;
                (wire_loop_curves(&loops, mesh), None)
            } else {
                bail!("{} holds neither loops nor traces", input.display());
            };
            let out = common.out.unwrap_or_else(|| PathBuf::from("out"));
            fs::create_dir_all(&out)?;
            let p = out.join(input.with_extension("svg").file_name().unwrap());
            fs::write(
                &p,
                render_svg(
                    &curves,
                    &SvgStyle {
                        frame,
                        ..SvgStyle::default()
                    },
                ),
            )?;
            println!("wrote {} ({} paths)", p.display(), curves.len());
        }
        Cmd::Report { manifests, common } => {
            let mut ms = Vec::new();
            for p in &manifests {
                let m = RunManifest::read(p).with_context(|| format!("reading {}", p.display()))?;
                let dir = p.parent().unwrap_or(Path::new("."));
                let bad = m.tampered(dir)?;
                if !bad.is_empty() {
                    bail!(
                        "{}: artifacts do not match their digests: {}",
                        p.display(),
                        bad.join(", ")
                    );
                }
                ms.push(m);
            }
            let report = emit_report(&ms)?;
            for r in &report.estimates {
                println!(
                    "{} {}: {:.6} [{:.6}, {:.6}] n={}",
                    r.observable, r.label, r.mean, r.ci[0], r.ci[1], r.n
                );
            }
            for a in &report.acceptance {
                println!(
                    "{} {}: {}",
                    if a.passed { "PASS" } else { "FAIL" },
                    a.criterion,
                    a.detail
                );
            }
            let out = common.out.unwrap_or_else(|| PathBuf::from("out"));
            write_json(&out, "report.json", &serde_json::to_value(&report)?)?;
            if !report.all_passed() {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = matches!(
                e.downcast_ref::<Error>(),
                Some(Error::ConfigInvalid { .. } | Error::MixedObservables(..))
            );
            ExitCode::from(if config { 2 } else { 1 })
        }
    }
}
