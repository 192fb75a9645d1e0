//! The invariant suite: twelve numeric criteria run on seeded samples.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Error;
use crate::extremal::{alt_integrate, hamiltonian_at, integrate, ExtremalState, Trajectory};
use crate::legendre::{integrate_flow, integrate_geodesic, leaf_chart_flat, leaf_chart_numeric, leaf_jet, pi_jet};
use crate::metric::{christoffel, frame_from_metric, validate_geodesic_parallel, MetricChart, OrthonormalFrame};
use crate::pendulum::{pendulum_energy, reduce_flat, FlatPendulum};
use crate::sampling::{librating_flat, oracle_states, random_state};
use crate::singularity::{
    classify_jet, classify_pair, cuspidal_curvature, cuspidal_curvature_flat, detect_events, germ, jet_step, zigzag_report, Alternation,
    NormalFormClass, Projection, SingularEvent,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} [{:>2}] {}: {}", self.id, self.name, self.detail)
    }
}

pub const ORACLE_COUNT: usize = 50;
pub const SWEEP_COUNT: usize = 1000;
pub const SWEEP_WINDOW: (f64, f64) = (0.0, 10.0);
pub const TOL: f64 = 1e-10;

fn outcome(id: u8, name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { id, name, passed, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

struct OracleRun {
    theta_err: f64,
    h_drift: f64,
    e_drift: f64,
}

fn oracle_run(frame: &OrthonormalFrame, s0: &ExtremalState) -> Result<OracleRun, Error> {
    let traj = integrate(frame, s0, (0.0, 20.0), TOL)?;
    let fp = FlatPendulum::new(s0)?;
    let times = traj.sample_times(4);
    let mut theta_err = 0.0_f64;
    for &t in &times {
        theta_err = theta_err.max((traj.eval(t)?.theta - fp.eval(t).0).abs());
    }
    let h0 = hamiltonian_at(&frame.at_unchecked(s0.x1, s0.x2), s0);
    let h_drift = traj.hamiltonian_drift() / h0.max(f64::MIN_POSITIVE);
    let params = reduce_flat(s0);
    let e0 = pendulum_energy(s0, &params);
    // the energy ranges over [-r/2, inf); it is measured against r/2 so that
    // the separatrix level does not degenerate the ratio
    let scale = e0.abs().max(0.5 * params.r).max(f64::MIN_POSITIVE);
    let e_drift = traj.nodes().map(|(_, s)| (pendulum_energy(&s, &params) - e0).abs()).fold(0.0, f64::max) / scale;
    Ok(OracleRun { theta_err, h_drift, e_drift })
}

fn oracle_checks(seed: u64) -> Vec<CheckOutcome> {
    let frame = frame_from_metric(&MetricChart::flat());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = oracle_states(&mut rng, ORACLE_COUNT);
    let start = Instant::now();
    let runs: Vec<Result<OracleRun, Error>> = states.iter().map(|(_, s)| oracle_run(&frame, s)).collect();
    let elapsed = start.elapsed().as_secs_f64();
    let failures = runs.iter().filter(|r| r.is_err()).count();
    let ok: Vec<&OracleRun> = runs.iter().filter_map(|r| r.as_ref().ok()).collect();
    let theta = ok.iter().map(|r| r.theta_err).fold(0.0, f64::max);
    let h = ok.iter().map(|r| r.h_drift).fold(0.0, f64::max);
    let e = ok.iter().map(|r| r.e_drift).fold(0.0, f64::max);
    vec![
        outcome(
            1,
            "oracle equivalence (flat)",
            failures == 0 && theta <= 1e-8 && elapsed < 5.0,
            format!("{} states, max |dtheta| = {theta:.2e} (<= 1e-8), {elapsed:.2} s (< 5 s), {failures} failures", states.len()),
        ),
        outcome(
            2,
            "conservation",
            failures == 0 && h <= 1e-8 && e <= 1e-8,
            format!("max relative drift H = {h:.2e}, pendulum energy = {e:.2e} (<= 1e-8)"),
        ),
    ]
}

/// One trajectory of the classification sweep.
#[derive(Debug, Default)]
struct SweepRun {
    violation: Option<String>,
    events: Vec<SingularEvent>,
    /// `min over samples of max(|A|, |phi|) / sqrt(2 H(t0))`.
    exclusion_margin: f64,
    nonconstant: bool,
}

fn sweep_run(frame: &OrthonormalFrame, s0: &ExtremalState) -> SweepRun {
    let mut run = SweepRun { exclusion_margin: f64::INFINITY, ..Default::default() };
    let traj = match integrate(frame, s0, SWEEP_WINDOW, TOL) {
        Ok(t) => t,
        Err(e) => {
            run.violation = Some(format!("integration: {e}"));
            return run;
        }
    };
    match classify_pair(frame, s0) {
        Ok(p) => run.nonconstant = p.pi != NormalFormClass::I,
        Err(e) => {
            run.violation = Some(e.to_string());
            return run;
        }
    }
    match detect_events(&traj) {
        Ok(ev) => run.events = ev,
        Err(e) => {
            run.violation = Some(e.to_string());
            return run;
        }
    }
    if run.nonconstant {
        run.exclusion_margin = exclusion_margin(&traj, &run.events);
    }
    run
}

fn exclusion_margin(traj: &Trajectory, events: &[SingularEvent]) -> f64 {
    let frame = traj.frame();
    let s0 = traj.initial();
    let speed = (hamiltonian_at(&frame.at_unchecked(s0.x1, s0.x2), &s0) * 2.0).sqrt();
    let mut margin = f64::INFINITY;
    let mut visit = |s: &ExtremalState| {
        if let Ok(g) = germ(frame, s) {
            margin = margin.min(g.a.abs().max(g.phi.abs()) / speed.max(f64::MIN_POSITIVE));
        }
    };
    for t in traj.sample_times(4) {
        if let Ok(s) = traj.eval(t) {
            visit(&s);
        }
    }
    for e in events {
        visit(&e.state);
    }
    margin
}

struct ChartSweep {
    name: &'static str,
    frame: OrthonormalFrame,
    runs: Vec<SweepRun>,
    seconds: f64,
}

fn chart_sweep(chart: MetricChart, name: &'static str, seed: u64, count: usize) -> ChartSweep {
    let frame = frame_from_metric(&chart);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<ExtremalState> = (0..count).map(|_| random_state(frame.chart(), &mut rng, 1.0)).collect();
    let start = Instant::now();
    let runs = states.par_iter().map(|s| sweep_run(&frame, s)).collect();
    ChartSweep { name, frame, runs, seconds: start.elapsed().as_secs_f64() }
}

fn cusps(sweep: &ChartSweep) -> impl Iterator<Item = &SingularEvent> {
    sweep.runs.iter().flat_map(|r| r.events.iter()).filter(|e| e.projection == Projection::Pi && e.clazz == NormalFormClass::IV)
}

/// Worst relative deviation between finite-difference and analytic values
/// over a set of cusps, with the number of cusps compared.
fn worst<'a>(
    events: impl Iterator<Item = &'a SingularEvent>,
    f: impl Fn(&SingularEvent) -> Result<f64, Error> + Sync,
) -> (usize, f64, usize) {
    let evs: Vec<&SingularEvent> = events.collect();
    let errs: Vec<Result<f64, Error>> = evs.par_iter().map(|e| f(e)).collect();
    let failures = errs.iter().filter(|r| r.is_err()).count();
    let max = errs.iter().filter_map(|r| r.as_ref().ok()).copied().fold(0.0, f64::max);
    (evs.len(), max, failures)
}

fn delta_checks(flat: &ChartSweep, curved: &[&ChartSweep]) -> Vec<CheckOutcome> {
    let frame = &flat.frame;
    let (n, err, fail) = worst(cusps(flat), |e| {
        let s = &e.state;
        let jet = pi_jet(frame, s, jet_step(frame, s)?)?;
        let want = 2.0 * s.phi.powi(3) * (s.p1 * s.p1 + s.p2 * s.p2);
        Ok(rel(jet.delta(), want))
    });
    let c3 = outcome(
        3,
        "cusp determinant (flat)",
        n > 0 && fail == 0 && err <= 1e-5,
        format!("{n} cusps, max relative error {err:.2e} (<= 1e-5), {fail} failures"),
    );

    let mut parts = Vec::new();
    let mut pass = true;
    for sw in curved {
        let frame = &sw.frame;
        let (n, err, fail) = worst(cusps(sw), |e| {
            let jet = pi_jet(frame, &e.state, jet_step(frame, &e.state)?)?;
            Ok(rel(jet.delta(), e.delta))
        });
        pass &= n > 0 && fail == 0 && err <= 1e-4;
        parts.push(format!("{}: {n} cusps, max relative error {err:.2e}, {fail} failures", sw.name));
    }
    let c4 = outcome(4, "cusp determinant (general)", pass, parts.join("; ") + " (<= 1e-4)");

    let (n, err, fail) = worst(cusps(flat), |e| {
        let fd = cuspidal_curvature(frame, &e.state)?;
        let want = cuspidal_curvature_flat(&e.state);
        let analytic = e.kappa_c.ok_or(Error::NotACusp)?;
        Ok(rel(fd, want).max(rel(analytic, want)))
    });
    let c5 = outcome(
        5,
        "cuspidal curvature",
        n > 0 && fail == 0 && err <= 1e-6,
        format!("{n} cusps, max relative error {err:.2e} (<= 1e-6), {fail} failures"),
    );
    vec![c3, c4, c5]
}

fn closure_checks(sweeps: &[&ChartSweep]) -> Vec<CheckOutcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    let mut margin = f64::INFINITY;
    for sw in sweeps {
        let violations: Vec<&String> = sw.runs.iter().filter_map(|r| r.violation.as_ref()).collect();
        let events: usize = sw.runs.iter().map(|r| r.events.len()).sum();
        pass &= violations.is_empty() && sw.seconds < 60.0;
        let first = violations.first().map(|v| format!(" first: {v}")).unwrap_or_default();
        parts.push(format!(
            "{}: {} runs, {events} events, {} violations, {:.1} s{first}",
            sw.name,
            sw.runs.len(),
            violations.len(),
            sw.seconds
        ));
        margin = margin.min(sw.runs.iter().filter(|r| r.nonconstant).map(|r| r.exclusion_margin).fold(f64::INFINITY, f64::min));
    }
    vec![
        outcome(6, "classification closure", pass, parts.join("; ") + " (< 60 s each)"),
        outcome(
            7,
            "mutual exclusion",
            margin > 1e-9,
            format!("min over samples and events of max(|A|, |theta'|)/sqrt(2H(0)) = {margin:.2e} (> 1e-9)"),
        ),
    ]
}

fn zigzag_checks(seed: u64) -> Vec<CheckOutcome> {
    let frame = frame_from_metric(&MetricChart::flat());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7a16);
    let states: Vec<ExtremalState> = (0..20).map(|_| librating_flat(&mut rng)).collect();
    let reports: Vec<Result<(Alternation, f64, usize), Error>> = states
        .par_iter()
        .map(|s| {
            let period = FlatPendulum::new(s)?.period().ok_or(Error::DegeneratePendulum)?;
            let traj = integrate(&frame, s, (0.0, 2.2 * period), TOL)?;
            let rep = zigzag_report(&traj)?;
            Ok((rep.alternation, rep.max_cusp_angle, rep.cusp_angles.len()))
        })
        .collect();
    let interleaved = reports.iter().filter(|r| matches!(r, Ok((Alternation::Interleaved, _, _)))).count();
    let angle = reports.iter().filter_map(|r| r.as_ref().ok()).map(|r| r.1).fold(0.0, f64::max);
    let cusps: usize = reports.iter().filter_map(|r| r.as_ref().ok()).map(|r| r.2).sum();
    let failures = reports.iter().filter(|r| r.is_err()).count();
    vec![
        outcome(
            8,
            "zigzag alternation",
            interleaved == states.len(),
            format!("{interleaved}/{} librating runs over 2.2 periods interleave", states.len()),
        ),
        outcome(
            9,
            "parallel cusp directions",
            failures == 0 && cusps > 0 && angle <= 1e-6,
            format!("{cusps} cusps, max angle {angle:.2e} rad (<= 1e-6), {failures} failures"),
        ),
    ]
}

fn chart_check() -> CheckOutcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for chart in [MetricChart::sphere(), MetricChart::hyperbolic()] {
        let rep = validate_geodesic_parallel(&chart, 41);
        let gamma = christoffel(&chart, 0.0, 0.0).map(|g| g.max_abs()).unwrap_or(f64::INFINITY);
        let v = rep.max_violation();
        pass &= v <= 1e-12 && gamma <= 1e-12;
        parts.push(format!("{}: conditions {v:.1e}, Gamma(0) {gamma:.1e}", chart.name()));
    }
    outcome(10, "chart validation", pass, parts.join("; ") + " (<= 1e-12)")
}

fn flow_distance(chart: MetricChart, start: [f64; 3]) -> Result<f64, Error> {
    let frame = frame_from_metric(&chart);
    let flow = integrate_flow(&frame, start, 5.0, 1e-12)?;
    let v0 = frame.at(start[0], start[1])?.unit(start[2]);
    let geo = integrate_geodesic(&chart, [start[0], start[1]], v0, 5.0, 1e-12)?;
    let mut d = 0.0_f64;
    for i in 0..=200 {
        let t = 0.025 * i as f64;
        let (a, b) = (flow.eval(t)?, geo.eval(t)?);
        d = d.max((a[0] - b[0]).hypot(a[1] - b[1]));
    }
    Ok(d)
}

fn leaf_residual(chart: MetricChart, base: ExtremalState, seed: u64) -> Result<f64, Error> {
    let frame = frame_from_metric(&chart);
    let leaf = leaf_chart_numeric(&frame, &base)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let pt = [base.x1 + rng.random_range(-0.1..0.1), base.x2 + rng.random_range(-0.1..0.1), base.theta + rng.random_range(-0.3..0.3)];
        let r = leaf.flow_residual(&frame, pt)?;
        worst = worst.max(r[0].abs()).max(r[1].abs());
    }
    Ok(worst)
}

/// Class of the `pi'` event read off the finite-difference jet in a leaf chart.
fn leaf_class(frame: &OrthonormalFrame, e: &SingularEvent, numeric: bool) -> Result<Option<NormalFormClass>, Error> {
    let g = germ(frame, &e.state)?;
    let leaf = if numeric { leaf_chart_numeric(frame, &e.state)? } else { leaf_chart_flat() };
    let jet = leaf_jet(frame, &leaf, &e.state, jet_step(frame, &e.state)?)?;
    Ok(classify_jet(&jet, g.scale))
}

fn leaf_check(flat: &ChartSweep) -> CheckOutcome {
    let flows = [
        ("flat", flow_distance(MetricChart::flat(), [0.0, 0.0, 0.7])),
        ("sphere", flow_distance(MetricChart::sphere(), [-0.2, -3.0, 0.6])),
        ("hyperbolic", flow_distance(MetricChart::hyperbolic(), [-2.9, -0.3, 0.05])),
    ];
    let flow_err = flows.iter().map(|(_, d)| d.clone().unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
    let residual = [
        leaf_residual(MetricChart::sphere(), ExtremalState::new(0.3, 0.4, 1.0, 0.0, 0.0, 0.0), 1),
        leaf_residual(MetricChart::hyperbolic(), ExtremalState::new(-0.2, 0.5, -0.4, 0.0, 0.0, 0.0), 2),
        leaf_residual(MetricChart::flat(), ExtremalState::new(0.1, -0.3, 2.0, 0.0, 0.0, 0.0), 3),
    ]
    .iter()
    .map(|r| r.clone().unwrap_or(f64::INFINITY))
    .fold(0.0, f64::max);
    let frame = &flat.frame;
    let events: Vec<&SingularEvent> =
        flat.runs.iter().flat_map(|r| r.events.iter()).filter(|e| e.projection == Projection::PiPrime).collect();
    let agree: Vec<bool> = events
        .par_iter()
        .map(|e| {
            let explicit = leaf_class(frame, e, false);
            let numeric = leaf_class(frame, e, true);
            matches!((explicit, numeric), (Ok(Some(a)), Ok(Some(b))) if a == b && a == e.clazz)
        })
        .collect();
    let agreeing = agree.iter().filter(|a| **a).count();
    outcome(
        11,
        "flow and leaf validation",
        flow_err <= 1e-8 && residual <= 1e-6 && !events.is_empty() && agreeing == events.len(),
        format!(
            "flow vs geodesic {flow_err:.2e} (<= 1e-8), leaf residual {residual:.2e} (<= 1e-6), pi' classes agree on {agreeing}/{} flat events",
            events.len()
        ),
    )
}

fn two_hamiltonian_check(seed: u64) -> CheckOutcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (i, chart) in [MetricChart::flat(), MetricChart::sphere(), MetricChart::hyperbolic()].into_iter().enumerate() {
        let frame = frame_from_metric(&chart);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(100 + i as u64));
        let states: Vec<ExtremalState> = (0..100).map(|_| random_state(frame.chart(), &mut rng, 1.0)).collect();
        let dists: Vec<Result<f64, Error>> = states
            .par_iter()
            .map(|s| {
                let a = integrate(&frame, s, (0.0, 10.0), TOL)?;
                let b = alt_integrate(&frame, s, (0.0, 10.0), TOL)?;
                let end = a.window().1.min(b.window().1);
                let mut d = 0.0_f64;
                for t in a.sample_times(2).into_iter().filter(|t| *t <= end) {
                    d = d.max(a.eval(t)?.distance(&b.eval(t)?));
                }
                Ok(d)
            })
            .collect();
        let failures = dists.iter().filter(|d| d.is_err()).count();
        let max = dists.iter().filter_map(|d| d.as_ref().ok()).copied().fold(0.0, f64::max);
        pass &= failures == 0 && max <= 1e-7;
        parts.push(format!("{}: {max:.2e}", chart.name()));
    }
    outcome(12, "two-Hamiltonian agreement", pass, parts.join(", ") + " (<= 1e-7)")
}

/// Runs all criteria with samples drawn from `seed`.
pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    run_with(seed, SWEEP_COUNT)
}

/// Like [`run_all`] with `count` sweep samples per chart.
pub fn run_with(seed: u64, count: usize) -> Vec<CheckOutcome> {
    let mut out = oracle_checks(seed);
    let flat = chart_sweep(MetricChart::flat(), "flat", seed.wrapping_add(1), count);
    let sphere = chart_sweep(MetricChart::sphere(), "sphere", seed.wrapping_add(2), count);
    let hyperbolic = chart_sweep(MetricChart::hyperbolic(), "hyperbolic", seed.wrapping_add(3), count);
    out.extend(delta_checks(&flat, &[&sphere, &hyperbolic]));
    out.extend(closure_checks(&[&flat, &sphere, &hyperbolic]));
    out.extend(zigzag_checks(seed));
    out.push(chart_check());
    out.push(leaf_check(&flat));
    out.push(two_hamiltonian_check(seed));
    out
}
