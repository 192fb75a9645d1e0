//! Subcommand implementations. Each returns the text printed to stdout and
//! writes its artifacts under the output directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ConfigError, OutputKind, RunConfig, Slice};
use super::svg;
use crate::error::Error;
use crate::extremal::{alt_integrate, hamiltonian_at, integrate, switching_at, ExtremalState, Trajectory};
use crate::legendre::{leaf_chart_flat, leaf_chart_numeric, project_pi_prime};
use crate::metric::{frame_from_metric, OrthonormalFrame};
use crate::pendulum::{pendulum_energy, reduce_flat, FlatPendulum, Regime};
use crate::sampling::{random_state, random_straight_state};
use crate::singularity::{classify_pair, detect_events, ClassificationPair, SingularEvent, ALLOWED_PAIRS};

/// Command failure, mapped to the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("integration failed: {0}")]
    Integration(Error),
    #[error("classification contract violated: {0}")]
    Contract(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Threshold(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Integration(_) | Failure::Io { .. } => 3,
            Failure::Contract(_) | Failure::Threshold(_) => 4,
        }
    }
}

fn classify_error(e: Error) -> Failure {
    match e {
        Error::ForbiddenPair(..) | Error::RootCluster(_) | Error::InconsistentState => Failure::Contract(e.to_string()),
        other => Failure::Integration(other),
    }
}

pub struct Context {
    pub config: RunConfig,
    pub out: PathBuf,
}

impl Context {
    fn write(&self, name: &str, contents: &str) -> Result<PathBuf, Failure> {
        std::fs::create_dir_all(&self.out).map_err(|source| Failure::Io { path: self.out.display().to_string(), source })?;
        let path = self.out.join(name);
        std::fs::write(&path, contents).map_err(|source| Failure::Io { path: path.display().to_string(), source })?;
        Ok(path)
    }

    fn frame(&self) -> Result<OrthonormalFrame, Failure> {
        Ok(frame_from_metric(&self.config.chart()?))
    }

    fn trajectory(&self) -> Result<Trajectory, Failure> {
        let frame = self.frame()?;
        let s0 = self.config.initial_state()?;
        let [t0, t1] = self.config.window;
        integrate(&frame, &s0, (t0, t1), self.config.tol).map_err(Failure::Integration)
    }

    fn wants(&self, kind: OutputKind) -> bool {
        self.config.outputs.contains(&kind)
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let frame = traj.frame();
    let mut out = String::from("t,x1,x2,theta,p1,p2,phi,A,B,H\n");
    for (t, s) in traj.nodes() {
        let fv = frame.at_unchecked(s.x1, s.x2);
        let sw = switching_at(&fv, &s);
        let h = hamiltonian_at(&fv, &s);
        let row = [t, s.x1, s.x2, s.theta, s.p1, s.p2, s.phi, sw.a, sw.b, h].map(num);
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parses rows written by [`trajectory_csv`] into `(t, state)` pairs.
pub fn read_trajectory_csv(text: &str) -> Result<Vec<(f64, ExtremalState)>, String> {
    let mut lines = text.lines();
    if lines.next() != Some("t,x1,x2,theta,p1,p2,phi,A,B,H") {
        return Err("unexpected header".into());
    }
    lines
        .map(|line| {
            let v: Vec<f64> = line.split(',').map(|c| c.parse::<f64>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
            if v.len() != 10 {
                return Err(format!("expected 10 columns, got {}", v.len()));
            }
            Ok((v[0], ExtremalState::new(v[1], v[2], v[3], v[4], v[5], v[6])))
        })
        .collect()
}

fn summary(traj: &Trajectory, cfg: &RunConfig) -> String {
    let mut s = String::new();
    let (t0, t1) = traj.window();
    let stats = traj.stats();
    let _ = writeln!(s, "metric: {}", traj.frame().chart().name());
    let _ = writeln!(s, "window: [{t0}, {t1}]  tol: {:e}", cfg.tol);
    let _ = writeln!(s, "steps: {} accepted, {} rejected", stats.steps, stats.rejected);
    match traj.exited_domain() {
        Some(t) => {
            let _ = writeln!(s, "termination: domain-exit at t = {t}");
        }
        None => {
            let _ = writeln!(s, "termination: completed");
        }
    }
    let _ = writeln!(s, "hamiltonian: {:.12e}  drift: {:.3e}", traj.hamiltonian(t0).unwrap_or(f64::NAN), traj.hamiltonian_drift());
    if traj.frame().chart().is_flat() {
        let p = reduce_flat(&traj.initial());
        let e0 = pendulum_energy(&traj.initial(), &p);
        let drift = traj.nodes().map(|(_, s)| (pendulum_energy(&s, &p) - e0).abs()).fold(0.0, f64::max);
        let _ = writeln!(s, "pendulum energy: {e0:.12e}  drift: {drift:.3e}");
    }
    s
}

#[derive(Debug, Serialize)]
pub struct EventRecord {
    pub t: f64,
    pub projection: String,
    pub class: Option<String>,
    pub pair: String,
    pub delta: Option<f64>,
    pub kappa_c: Option<f64>,
}

fn records(t0: f64, pair0: ClassificationPair, events: &[SingularEvent]) -> Vec<EventRecord> {
    let mut out = vec![EventRecord { t: t0, projection: "germ".into(), class: None, pair: pair0.to_string(), delta: None, kappa_c: None }];
    out.extend(events.iter().map(|e| EventRecord {
        t: e.t,
        projection: serde_json::to_value(e.projection).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        class: Some(e.clazz.to_string()),
        pair: e.pair.to_string(),
        delta: Some(e.delta),
        kappa_c: e.kappa_c,
    }));
    out
}

fn classify_traj(traj: &Trajectory) -> Result<(ClassificationPair, Vec<SingularEvent>), Failure> {
    let pair0 = classify_pair(traj.frame(), &traj.initial()).map_err(classify_error)?;
    let events = detect_events(traj).map_err(classify_error)?;
    Ok((pair0, events))
}

fn front_svg(ctx: &Context, traj: &Trajectory, events: &[SingularEvent]) -> Result<String, Failure> {
    let per = ctx.config.render.samples_per_step.max(1);
    let mut panels = vec![svg::front_panel(traj, events, per)];
    if ctx.config.render.leaf {
        let frame = traj.frame();
        let leaf = if frame.chart().is_flat() {
            leaf_chart_flat()
        } else {
            leaf_chart_numeric(frame, &traj.initial()).map_err(Failure::Integration)?
        };
        let curve = project_pi_prime(traj, &leaf, per);
        let marks = events
            .iter()
            .filter(|e| e.projection == crate::singularity::Projection::PiPrime)
            .filter_map(|e| leaf.eval_state(&e.state).ok().map(|p| (p, None)))
            .collect();
        panels.push(svg::Panel { title: "leaf space (F, E)".into(), points: curve.samples.into_iter().map(|(_, p)| p).collect(), marks });
    }
    Ok(svg::render(&panels, ctx.config.render.width))
}

fn extras(ctx: &Context, traj: &Trajectory, report: &str, skip: OutputKind) -> Result<(), Failure> {
    if ctx.wants(OutputKind::TrajectoryCsv) && skip != OutputKind::TrajectoryCsv {
        ctx.write(OutputKind::TrajectoryCsv.file_name(), &trajectory_csv(traj))?;
    }
    let need_events = (ctx.wants(OutputKind::EventsJson) && skip != OutputKind::EventsJson)
        || (ctx.wants(OutputKind::FrontSvg) && skip != OutputKind::FrontSvg);
    if need_events {
        let (pair0, events) = classify_traj(traj)?;
        if ctx.wants(OutputKind::EventsJson) && skip != OutputKind::EventsJson {
            let json = serde_json::to_string_pretty(&records(traj.window().0, pair0, &events)).expect("serializable");
            ctx.write(OutputKind::EventsJson.file_name(), &(json + "\n"))?;
        }
        if ctx.wants(OutputKind::FrontSvg) && skip != OutputKind::FrontSvg {
            ctx.write(OutputKind::FrontSvg.file_name(), &front_svg(ctx, traj, &events)?)?;
        }
    }
    if ctx.wants(OutputKind::ReportText) && skip != OutputKind::ReportText {
        ctx.write(OutputKind::ReportText.file_name(), report)?;
    }
    Ok(())
}

pub fn simulate(ctx: &Context) -> Result<String, Failure> {
    let traj = ctx.trajectory()?;
    let path = ctx.write(OutputKind::TrajectoryCsv.file_name(), &trajectory_csv(&traj))?;
    let mut report = summary(&traj, &ctx.config);
    let _ = writeln!(report, "wrote {}", path.display());
    extras(ctx, &traj, &report, OutputKind::TrajectoryCsv)?;
    Ok(report)
}

pub fn classify(ctx: &Context) -> Result<String, Failure> {
    let traj = ctx.trajectory()?;
    let (pair0, events) = classify_traj(&traj)?;
    let json = serde_json::to_string_pretty(&records(traj.window().0, pair0, &events)).expect("serializable");
    let path = ctx.write(OutputKind::EventsJson.file_name(), &(json + "\n"))?;
    let mut report = String::new();
    let _ = writeln!(report, "germ pair at t = {}: {pair0}", traj.window().0);
    for e in &events {
        let kc = e.kappa_c.map(|k| format!("  kappa_c {k:.9e}")).unwrap_or_default();
        let _ = writeln!(report, "t = {:.12}  {:<3} {:<3} pair {}  delta {:.9e}{kc}", e.t, e.projection, e.clazz, e.pair, e.delta);
    }
    if let Some(t) = traj.exited_domain() {
        let _ = writeln!(report, "domain-exit at t = {t}");
    }
    let _ = writeln!(report, "{} events; wrote {}", events.len(), path.display());
    extras(ctx, &traj, &report, OutputKind::EventsJson)?;
    Ok(report)
}

#[derive(Debug, Default)]
struct SweepRun {
    pairs: Vec<ClassificationPair>,
    violation: Option<String>,
    failure: Option<String>,
    domain_exit: bool,
    events: usize,
}

pub fn sweep(ctx: &Context) -> Result<String, Failure> {
    let cfg = &ctx.config;
    let frame = ctx.frame()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let states: Vec<ExtremalState> = (0..cfg.sweep.count)
        .map(|_| match cfg.sweep.slice {
            Slice::All => random_state(frame.chart(), &mut rng, cfg.sweep.momentum),
            Slice::Straight => random_straight_state(&frame, &mut rng, cfg.sweep.momentum),
        })
        .collect();
    let [t0, t1] = cfg.window;
    let runs: Vec<SweepRun> = states
        .par_iter()
        .map(|s| {
            let mut run = SweepRun::default();
            let traj = match integrate(&frame, s, (t0, t1), cfg.tol) {
                Ok(t) => t,
                Err(e) => {
                    run.failure = Some(e.to_string());
                    return run;
                }
            };
            run.domain_exit = traj.exited_domain().is_some();
            match classify_pair(&frame, s) {
                Ok(p) => run.pairs.push(p),
                Err(e) => run.violation = Some(e.to_string()),
            }
            match detect_events(&traj) {
                Ok(ev) => {
                    run.events = ev.len();
                    run.pairs.extend(ev.iter().map(|e| e.pair));
                }
                Err(e @ (Error::ForbiddenPair(..) | Error::RootCluster(_))) => run.violation = Some(e.to_string()),
                Err(e) => run.failure = Some(e.to_string()),
            }
            run
        })
        .collect();
    let mut report = String::new();
    let slice = match cfg.sweep.slice {
        Slice::All => "all",
        Slice::Straight => "straight",
    };
    let _ = writeln!(
        report,
        "sweep: metric={} count={} seed={} slice={slice} window=[{t0}, {t1}] tol={:e}",
        frame.chart().name(),
        cfg.sweep.count,
        cfg.seed,
        cfg.tol
    );
    let germ_pairs: Vec<ClassificationPair> = runs.iter().filter_map(|r| r.pairs.first().copied()).collect();
    let _ = writeln!(report, "germ pairs:");
    for (a, b) in ALLOWED_PAIRS {
        let n = germ_pairs.iter().filter(|p| (p.pi, p.pi_prime) == (a, b)).count();
        let _ = writeln!(report, "  ({a},{b}) {n}");
    }
    let all: Vec<ClassificationPair> = runs.iter().flat_map(|r| r.pairs.iter().copied()).collect();
    let _ = writeln!(report, "event pairs:");
    for (a, b) in ALLOWED_PAIRS {
        let n = all.iter().filter(|p| (p.pi, p.pi_prime) == (a, b)).count()
            - germ_pairs.iter().filter(|p| (p.pi, p.pi_prime) == (a, b)).count();
        let _ = writeln!(report, "  ({a},{b}) {n}");
    }
    let violations: Vec<(usize, &String)> = runs.iter().enumerate().filter_map(|(i, r)| r.violation.as_ref().map(|v| (i, v))).collect();
    let failures = runs.iter().filter(|r| r.failure.is_some()).count();
    let _ = writeln!(report, "events: {}", runs.iter().map(|r| r.events).sum::<usize>());
    let _ = writeln!(report, "domain exits: {}", runs.iter().filter(|r| r.domain_exit).count());
    let _ = writeln!(report, "integration failures: {failures}");
    let _ = writeln!(report, "violations: {}", violations.len());
    for (i, v) in &violations {
        let _ = writeln!(report, "  sample {i}: {v}");
    }
    ctx.write("sweep.txt", &report)?;
    if !violations.is_empty() {
        return Err(Failure::Contract(format!("{} of {} samples\n{report}", violations.len(), cfg.sweep.count)));
    }
    Ok(report)
}

pub const ORACLE_THETA_TOL: f64 = 1e-8;
pub const ORACLE_ALT_TOL: f64 = 1e-7;

pub fn oracle(ctx: &Context) -> Result<String, Failure> {
    let frame = ctx.frame()?;
    if !frame.chart().is_flat() {
        return Err(ConfigError::Invalid("oracle requires the flat metric".into()).into());
    }
    let traj = ctx.trajectory()?;
    let s0 = traj.initial();
    let fp = FlatPendulum::new(&s0).map_err(Failure::Integration)?;
    let (t0, _) = traj.window();
    let times = traj.sample_times(4);
    let theta_err = times.iter().map(|&t| (traj.eval(t).expect("inside").theta - fp.eval(t - t0).0).abs()).fold(0.0, f64::max);
    let [a, b] = ctx.config.window;
    let alt = alt_integrate(&frame, &s0, (a, b), ctx.config.tol).map_err(Failure::Integration)?;
    let alt_err = times.iter().map(|&t| traj.eval(t).expect("inside").distance(&alt.eval(t).expect("inside"))).fold(0.0, f64::max);
    let regime = match fp.regime {
        Regime::Degenerate => "degenerate (linear drift)",
        Regime::Libration => "libration",
        Regime::Rotation => "rotation",
        Regime::Separatrix => "separatrix",
    };
    let mut report = String::new();
    let _ = writeln!(report, "regime: {regime}");
    let _ = writeln!(report, "pendulum energy: {:.12e}  r/2: {:.12e}", fp.energy, 0.5 * fp.params.r);
    let _ = writeln!(report, "max |theta - closed form|: {theta_err:.3e} (limit {ORACLE_THETA_TOL:e})");
    let _ = writeln!(report, "max |integrate - alt_integrate|: {alt_err:.3e} (limit {ORACLE_ALT_TOL:e})");
    if ctx.wants(OutputKind::ReportText) {
        ctx.write(OutputKind::ReportText.file_name(), &report)?;
    }
    if theta_err > ORACLE_THETA_TOL || alt_err > ORACLE_ALT_TOL {
        return Err(Failure::Threshold(format!("oracle thresholds exceeded\n{report}")));
    }
    Ok(report)
}

pub fn render(ctx: &Context) -> Result<String, Failure> {
    let traj = ctx.trajectory()?;
    let (_, events) = classify_traj(&traj)?;
    let path = ctx.write(OutputKind::FrontSvg.file_name(), &front_svg(ctx, &traj, &events)?)?;
    let report = format!("wrote {}\n", path.display());
    extras(ctx, &traj, &report, OutputKind::FrontSvg)?;
    Ok(report)
}

pub fn output_dir(out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."))
}
