//! Dormand-Prince 5(4) integrator with PI step control and continuous output.
//!
//! The integrator works on fixed-size states `[f64; N]`, runs forward or
//! backward in time, stops gracefully when an `inside` predicate fails (the
//! exit time is located on the dense output), and can be forced to land on a
//! list of stop times.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const MAX_SHRINK: f64 = 5.0; // 1/fac1 with fac1 = 0.2
const MAX_GROW: f64 = 0.1; // 1/fac2 with fac2 = 10

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Upper bound on `|h|`; `None` means the window length.
    pub max_step: Option<f64>,
}

impl Settings {
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, max_steps: 2_000_000, max_step: None }
    }
}

/// How an integration ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    /// The `inside` predicate failed; the solution is truncated at `t`.
    DomainExit {
        t: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Stats {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    /// End of validity; equals `t + h` except for a step truncated at a domain exit.
    end: f64,
    rcont: [[f64; N]; 4],
}

impl<const N: usize> DenseStep<N> {
    fn theta(&self, t: f64) -> f64 {
        (t - self.t) / self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        if t == self.t {
            return self.y0;
        }
        if t == self.end {
            return self.y1;
        }
        let th = self.theta(t);
        let th1 = 1.0 - th;
        let [r2, r3, r4, r5] = &self.rcont;
        std::array::from_fn(|i| self.y0[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i]))))
    }

    /// Time derivative of the continuous extension.
    pub fn eval_derivative(&self, t: f64) -> [f64; N] {
        let th = self.theta(t);
        let th1 = 1.0 - th;
        let [r2, r3, r4, r5] = &self.rcont;
        std::array::from_fn(|i| {
            let s = r4[i] + th1 * r5[i];
            let ds = -r5[i];
            let r = r3[i] + th * s;
            let dr = s + th * ds;
            let q = r2[i] + th1 * r;
            let dq = -r + th1 * dr;
            (q + th * dq) / self.h
        })
    }

    pub fn t_end(&self) -> f64 {
        self.end
    }
}

/// Dense solution over `[t0, t_end]` (or `[t_end, t0]` when integrating backward).
#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    pub t0: f64,
    pub y0: [f64; N],
    pub t_end: f64,
    pub steps: Vec<DenseStep<N>>,
    pub termination: Termination,
    pub stats: Stats,
}

impl<const N: usize> Solution<N> {
    fn direction(&self) -> f64 {
        if self.t_end >= self.t0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        let (a, b) = self.interval();
        t >= a && t <= b
    }

    /// `(min, max)` of the covered time interval.
    pub fn interval(&self) -> (f64, f64) {
        (self.t0.min(self.t_end), self.t0.max(self.t_end))
    }

    fn step_index(&self, t: f64) -> usize {
        let dir = self.direction();
        // first step whose end is at or beyond t in the integration direction
        let idx = self.steps.partition_point(|s| dir * (s.t_end() - t) < 0.0);
        idx.min(self.steps.len() - 1)
    }

    pub fn eval(&self, t: f64) -> Result<[f64; N]> {
        if !self.contains(t) {
            let (start, end) = self.interval();
            return Err(Error::OutsideWindow { t, start, end });
        }
        if self.steps.is_empty() {
            return Ok(self.y0);
        }
        Ok(self.steps[self.step_index(t)].eval(t))
    }

    pub fn eval_derivative(&self, t: f64) -> Result<[f64; N]> {
        if !self.contains(t) {
            let (start, end) = self.interval();
            return Err(Error::OutsideWindow { t, start, end });
        }
        if self.steps.is_empty() {
            return Ok([0.0; N]);
        }
        Ok(self.steps[self.step_index(t)].eval_derivative(t))
    }

    /// Accepted node times, starting with `t0`.
    pub fn node_times(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.t0).chain(self.steps.iter().map(|s| s.t_end()))
    }

    /// Accepted node states, starting with `y0`.
    pub fn node_states(&self) -> impl Iterator<Item = [f64; N]> + '_ {
        std::iter::once(self.y0).chain(self.steps.iter().map(|s| s.y1))
    }

    pub fn final_state(&self) -> [f64; N] {
        self.steps.last().map(|s| s.y1).unwrap_or(self.y0)
    }

    /// Sample times with at least `per_step` samples per accepted step, in
    /// increasing time order.
    pub fn sample_times(&self, per_step: usize) -> Vec<f64> {
        let per_step = per_step.max(1);
        let mut out = vec![self.t0];
        for s in &self.steps {
            for j in 1..=per_step {
                out.push(if j == per_step { s.t_end() } else { s.t + (s.end - s.t) * j as f64 / per_step as f64 });
            }
        }
        if self.direction() < 0.0 {
            out.reverse();
        }
        out
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn all_finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Integrates `y' = f(t, y)` from `t0` to `t1`.
///
/// `inside` is evaluated at accepted nodes; when it fails the exit time is
/// located by bisection on the continuous extension and the solution is
/// truncated there. `stops` are times the integrator must land on exactly.
pub fn integrate<const N: usize, F, G>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    settings: &Settings,
    inside: G,
    stops: &[f64],
) -> Result<Solution<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: Fn(&[f64; N]) -> bool,
{
    if !(t1 != t0 && t0.is_finite() && t1.is_finite()) {
        return Err(Error::EmptyWindow(t0, t1));
    }
    if !all_finite(&y0) {
        return Err(Error::NonFinite(t0));
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let hmax = settings.max_step.unwrap_or(span).min(span);
    let mut stops: Vec<f64> = stops.iter().copied().filter(|s| dir * (s - t0) > 0.0 && dir * (t1 - s) > 0.0).collect();
    stops.sort_by(|a, b| (dir * a).total_cmp(&(dir * b)));
    let mut next_stop = 0;

    let mut stats = Stats::default();
    let mut k1 = f(t0, &y0);
    stats.evaluations += 1;
    let mut h = dir * initial_step(&f, t0, &y0, &k1, settings, hmax, &mut stats);
    let mut t = t0;
    let mut y = y0;
    let mut steps = Vec::new();
    let mut facold = 1e-4_f64;
    let mut last_rejected = false;
    let scale = |a: f64, b: f64| settings.atol + settings.rtol * a.abs().max(b.abs());

    loop {
        if stats.steps >= settings.max_steps {
            return Err(Error::TooManySteps(settings.max_steps));
        }
        // land exactly on stops and on t1
        let mut target = t1;
        while next_stop < stops.len() && dir * (stops[next_stop] - t) <= 0.0 {
            next_stop += 1;
        }
        if next_stop < stops.len() {
            target = stops[next_stop];
        }
        let mut hit_target = false;
        if dir * (t + h - target) >= 0.0 || (target - t - h).abs() <= 1e-13 * target.abs().max(1.0) {
            h = target - t;
            hit_target = true;
        }
        if h.abs() < 1e-15 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t, h });
        }

        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(t + h, &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y1 = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + h, &y1);
        stats.evaluations += 6;

        let mut err = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = scale(y[i], y1[i]);
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() || !all_finite(&y1) {
            // treat as a rejection with a hard shrink
            stats.rejected += 1;
            h *= 0.1;
            last_rejected = true;
            continue;
        }

        let fac11 = err.powf(0.2 - BETA * 0.75);
        if err <= 1.0 {
            let fac = (fac11 / facold.powf(BETA) / SAFETY).clamp(MAX_GROW, MAX_SHRINK);
            let mut hnew = h / fac;
            facold = err.max(1e-4);
            stats.steps += 1;

            let ydiff: [f64; N] = std::array::from_fn(|i| y1[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
            let rcont = [
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
                std::array::from_fn(|i| h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])),
            ];
            let t_new = if hit_target { target } else { t + h };
            let step = DenseStep { t, h: t_new - t, y0: y, y1, end: t_new, rcont };

            if !inside(&y1) {
                let exit = locate_exit(&step, &inside);
                let mut trunc = step;
                trunc.y1 = trunc.eval(exit);
                trunc.end = exit;
                steps.push(trunc);
                return Ok(Solution { t0, y0, t_end: exit, steps, termination: Termination::DomainExit { t: exit }, stats });
            }
            steps.push(step);
            t = t_new;
            y = y1;
            k1 = k7;
            if hit_target && target == t1 {
                return Ok(Solution { t0, y0, t_end: t1, steps, termination: Termination::Completed, stats });
            }
            if last_rejected {
                hnew = dir * hnew.abs().min(h.abs());
            }
            last_rejected = false;
            h = dir * hnew.abs().min(hmax);
        } else {
            stats.rejected += 1;
            h /= (fac11 / SAFETY).min(MAX_SHRINK);
            last_rejected = true;
        }
    }
}

fn locate_exit<const N: usize, G: Fn(&[f64; N]) -> bool>(step: &DenseStep<N>, inside: &G) -> f64 {
    let (mut lo, mut hi) = (step.t, step.t_end());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if inside(&step.eval(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn initial_step<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    f: &F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    s: &Settings,
    hmax: f64,
    stats: &mut Stats,
) -> f64 {
    let sc: [f64; N] = std::array::from_fn(|i| s.atol + s.rtol * y0[i].abs());
    let norm = |v: &[f64; N]| (v.iter().zip(&sc).map(|(a, b)| (a / b).powi(2)).sum::<f64>() / N as f64).sqrt();
    let d0 = norm(y0);
    let d1 = norm(f0);
    let mut h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(hmax);
    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let f1 = f(t0 + h0, &y1);
    stats.evaluations += 1;
    let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(hmax)
}

/// Roots of a scalar function of the solution, found by sign changes on the
/// samples from [`Solution::sample_times`] and refined by bisection to `t_tol`.
pub fn find_roots<const N: usize, G>(sol: &Solution<N>, per_step: usize, t_tol: f64, g: G) -> Vec<f64>
where
    G: Fn(f64, &[f64; N]) -> f64,
{
    let times = sol.sample_times(per_step);
    let val = |t: f64| g(t, &sol.eval(t).expect("sample inside window"));
    let mut roots = Vec::new();
    let mut prev_t = times[0];
    let mut prev_v = val(prev_t);
    if prev_v == 0.0 {
        roots.push(prev_t);
    }
    for &t in &times[1..] {
        let v = val(t);
        if v == 0.0 {
            roots.push(t);
        } else if prev_v != 0.0 && prev_v.signum() != v.signum() {
            roots.push(bisect(&val, prev_t, prev_v, t, t_tol));
        }
        prev_t = t;
        prev_v = v;
    }
    roots
}

fn bisect(g: &impl Fn(f64) -> f64, mut a: f64, mut ga: f64, mut b: f64, tol: f64) -> f64 {
    while (b - a).abs() > tol {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    // secant refinement inside the final bracket
    let gb = g(b);
    if ga != gb {
        let s = a - ga * (b - a) / (gb - ga);
        if s >= a.min(b) && s <= a.max(b) {
            return s;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(_: f64, y: &[f64; 2]) -> [f64; 2] {
        [y[1], -y[0]]
    }

    #[test]
    fn harmonic_oscillator_accuracy() {
        let sol = integrate(harmonic, 0.0, [0.0, 1.0], 10.0, &Settings::with_tol(1e-10), |_| true, &[]).unwrap();
        assert_eq!(sol.termination, Termination::Completed);
        for i in 0..=200 {
            let t = i as f64 * 0.05;
            let y = sol.eval(t).unwrap();
            assert!((y[0] - t.sin()).abs() < 1e-8, "t={t} err={}", (y[0] - t.sin()).abs());
            let dy = sol.eval_derivative(t).unwrap();
            assert!((dy[0] - t.cos()).abs() < 1e-6);
        }
    }

    #[test]
    fn nodes_are_exact() {
        let sol = integrate(harmonic, 0.0, [0.0, 1.0], 3.0, &Settings::with_tol(1e-8), |_| true, &[]).unwrap();
        for s in &sol.steps {
            assert_eq!(sol.eval(s.t_end()).unwrap(), s.y1);
        }
    }

    #[test]
    fn backward_and_stops() {
        let stops = [-0.5, -1.25];
        let sol = integrate(harmonic, 0.0, [0.0, 1.0], -2.0, &Settings::with_tol(1e-10), |_| true, &stops).unwrap();
        let times: Vec<f64> = sol.node_times().collect();
        for s in stops {
            assert!(times.contains(&s));
        }
        let y = sol.eval(-2.0).unwrap();
        assert!((y[0] - (-2.0_f64).sin()).abs() < 1e-8);
    }

    #[test]
    fn domain_exit_truncates() {
        // y' = 1 leaves y < 1 at t = 1
        let sol = integrate(|_, _| [1.0], 0.0, [0.0], 5.0, &Settings::with_tol(1e-10), |y| y[0] < 1.0, &[]).unwrap();
        match sol.termination {
            Termination::DomainExit { t } => assert!((t - 1.0).abs() < 1e-12, "{t}"),
            other => panic!("{other:?}"),
        }
        assert!((sol.final_state()[0] - 1.0).abs() < 1e-12);
        assert!(sol.eval(4.0).is_err());
    }

    #[test]
    fn roots_of_sine() {
        let sol = integrate(harmonic, 0.0, [0.0, 1.0], 10.0, &Settings::with_tol(1e-12), |_| true, &[]).unwrap();
        let roots = find_roots(&sol, 8, 1e-12, |_, y| y[0]);
        let expected = [0.0, std::f64::consts::PI, 2.0 * std::f64::consts::PI, 3.0 * std::f64::consts::PI];
        assert_eq!(roots.len(), 4);
        for (r, e) in roots.iter().zip(expected) {
            assert!((r - e).abs() < 1e-9, "{r} vs {e}");
        }
    }

    #[test]
    fn empty_window_rejected() {
        assert!(matches!(integrate(harmonic, 1.0, [0.0, 1.0], 1.0, &Settings::with_tol(1e-8), |_| true, &[]), Err(Error::EmptyWindow(..))));
    }
}
