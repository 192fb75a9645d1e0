//! Normal extremals of the sub-Riemannian energy problem on the unit tangent
//! bundle, with the multiplier normalized to `c = -1`.
//!
//! The state is `(x1, x2, theta, p1, p2, phi)`; the controls are `u1 = A` and
//! `u2 = phi`, where `A` is the switching function below.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{FrameValue, OrthonormalFrame};
use crate::ode::{self, Settings, Solution, Stats, Termination};

/// Phase point of the constrained Hamiltonian system. `theta` is never wrapped.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExtremalState {
    pub x1: f64,
    pub x2: f64,
    pub theta: f64,
    pub p1: f64,
    pub p2: f64,
    pub phi: f64,
}

impl ExtremalState {
    pub fn new(x1: f64, x2: f64, theta: f64, p1: f64, p2: f64, phi: f64) -> Self {
        Self { x1, x2, theta, p1, p2, phi }
    }

    pub fn to_array(self) -> [f64; 6] {
        [self.x1, self.x2, self.theta, self.p1, self.p2, self.phi]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Euclidean distance between two phase points.
    pub fn distance(&self, other: &Self) -> f64 {
        self.to_array().iter().zip(other.to_array()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }
}

/// Controls `(u1, u2)` of a normal extremal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlValue {
    pub u1: f64,
    pub u2: f64,
}

/// Switching values `A` (horizontal control) and `B` (its theta-derivative).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Switching {
    pub a: f64,
    pub b: f64,
}

/// Frame-contracted momenta `(k p1 + l p2, m p1 + n p2)`.
pub(crate) fn frame_momenta(fv: &FrameValue, s: &ExtremalState) -> (f64, f64) {
    (fv.k * s.p1 + fv.l * s.p2, fv.m * s.p1 + fv.n * s.p2)
}

pub(crate) fn switching_at(fv: &FrameValue, s: &ExtremalState) -> Switching {
    let (q1, q2) = frame_momenta(fv, s);
    let (sn, cs) = s.theta.sin_cos();
    Switching { a: q1 * cs + q2 * sn, b: -q1 * sn + q2 * cs }
}

pub fn switching_values(frame: &OrthonormalFrame, s: &ExtremalState) -> Result<Switching> {
    Ok(switching_at(&frame.at(s.x1, s.x2)?, s))
}

pub fn control(frame: &OrthonormalFrame, s: &ExtremalState) -> Result<ControlValue> {
    Ok(ControlValue { u1: switching_values(frame, s)?.a, u2: s.phi })
}

pub(crate) fn field_at(fv: &FrameValue, s: &ExtremalState) -> [f64; 6] {
    let sw = switching_at(fv, s);
    let (sn, cs) = s.theta.sin_cos();
    let a = sw.a;
    let dp = |i: usize| {
        let [dk, dl, dm, dn] = fv.d[i];
        -a * ((dk * s.p1 + dl * s.p2) * cs + (dm * s.p1 + dn * s.p2) * sn)
    };
    [a * (fv.k * cs + fv.m * sn), a * (fv.l * cs + fv.n * sn), s.phi, dp(0), dp(1), -a * sw.b]
}

/// Right-hand side of the extremal system.
pub fn extremal_field(frame: &OrthonormalFrame, s: &ExtremalState) -> Result<[f64; 6]> {
    Ok(field_at(&frame.at(s.x1, s.x2)?, s))
}

/// `H = (A^2 + phi^2) / 2`.
pub fn hamiltonian_value(frame: &OrthonormalFrame, s: &ExtremalState) -> Result<f64> {
    let a = switching_values(frame, s)?.a;
    Ok(0.5 * (a * a + s.phi * s.phi))
}

pub(crate) fn hamiltonian_at(fv: &FrameValue, s: &ExtremalState) -> f64 {
    let a = switching_at(fv, s).a;
    0.5 * (a * a + s.phi * s.phi)
}

/// Forward-mode dual number used to differentiate the alternate Hamiltonian.
#[derive(Debug, Clone, Copy)]
struct Dual {
    v: f64,
    d: f64,
}

impl Dual {
    fn var(v: f64, seeded: bool) -> Self {
        Self { v, d: if seeded { 1.0 } else { 0.0 } }
    }
    fn add(self, o: Self) -> Self {
        Self { v: self.v + o.v, d: self.d + o.d }
    }
    fn mul(self, o: Self) -> Self {
        Self { v: self.v * o.v, d: self.d * o.v + self.v * o.d }
    }
    fn sin(self) -> Self {
        Self { v: self.v.sin(), d: self.d * self.v.cos() }
    }
    fn cos(self) -> Self {
        Self { v: self.v.cos(), d: -self.d * self.v.sin() }
    }
}

/// `H~ = (<p, V1>^2 + <phi, V2>^2) / 2` evaluated on duals, with the frame
/// coefficients lifted through their first partials.
fn alt_hamiltonian(fv: &FrameValue, y: [Dual; 6]) -> Dual {
    let [x1, x2, th, p1, p2, phi] = y;
    let lift = |c: f64, j: usize| Dual { v: c, d: fv.d[0][j] * x1.d + fv.d[1][j] * x2.d };
    let (k, l, m, n) = (lift(fv.k, 0), lift(fv.l, 1), lift(fv.m, 2), lift(fv.n, 3));
    let (c, s) = (th.cos(), th.sin());
    // V1 = (k c + m s) d/dx1 + (l c + n s) d/dx2, V2 = d/dtheta
    let v1x = k.mul(c).add(m.mul(s));
    let v1y = l.mul(c).add(n.mul(s));
    let pv1 = p1.mul(v1x).add(p2.mul(v1y));
    let half = Dual { v: 0.5, d: 0.0 };
    half.mul(pv1.mul(pv1).add(phi.mul(phi)))
}

fn alt_field_at(fv: &FrameValue, s: &ExtremalState) -> [f64; 6] {
    let y = s.to_array();
    let grad: [f64; 6] = std::array::from_fn(|i| {
        let duals = std::array::from_fn(|j| Dual::var(y[j], i == j));
        alt_hamiltonian(fv, duals).d
    });
    // canonical equations: q' = dH/dp, p' = -dH/dq with q = (x1, x2, theta)
    [grad[3], grad[4], grad[5], -grad[0], -grad[1], -grad[2]]
}

/// Which Hamiltonian formulation produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    /// The explicit constrained system with `u1 = A`, `u2 = phi`.
    Constrained,
    /// Canonical equations of the alternate Hamiltonian, differentiated automatically.
    Alternate,
}

/// Dense solution of the extremal system over a time window.
#[derive(Debug, Clone)]
pub struct Trajectory {
    frame: OrthonormalFrame,
    solution: Solution<6>,
    tol: f64,
    formulation: Formulation,
}

/// Ratio between the local error tolerance handed to the integrator and the
/// user tolerance, so that global errors over long windows stay near `tol`.
pub const LOCAL_TOL_RATIO: f64 = 1e-2;

pub(crate) fn settings(tol: f64) -> Settings {
    Settings::with_tol((tol * LOCAL_TOL_RATIO).max(1e-15))
}

pub fn check_tol(tol: f64) -> Result<()> {
    if (1e-14..=1e-3).contains(&tol) {
        Ok(())
    } else {
        Err(Error::Tolerance(tol))
    }
}

fn run(
    frame: &OrthonormalFrame,
    s0: &ExtremalState,
    window: (f64, f64),
    tol: f64,
    formulation: Formulation,
    stops: &[f64],
) -> Result<Trajectory> {
    check_tol(tol)?;
    if !s0.is_finite() {
        return Err(Error::InconsistentState);
    }
    frame.at(s0.x1, s0.x2)?;
    let chart = frame.chart();
    let rhs = |_: f64, y: &[f64; 6]| {
        let s = ExtremalState::from_array(*y);
        let fv = frame.at_unchecked(s.x1, s.x2);
        match formulation {
            Formulation::Constrained => field_at(&fv, &s),
            Formulation::Alternate => alt_field_at(&fv, &s),
        }
    };
    let inside = |y: &[f64; 6]| chart.contains(y[0], y[1]);
    let solution = ode::integrate(rhs, window.0, s0.to_array(), window.1, &settings(tol), inside, stops)?;
    Ok(Trajectory { frame: frame.clone(), solution, tol, formulation })
}

/// Integrates the extremal system on `window = (t0, t1)` (backward if `t1 < t0`).
pub fn integrate(frame: &OrthonormalFrame, s0: &ExtremalState, window: (f64, f64), tol: f64) -> Result<Trajectory> {
    run(frame, s0, window, tol, Formulation::Constrained, &[])
}

/// Like [`integrate`], landing exactly on every time in `stops`.
pub fn integrate_with_stops(
    frame: &OrthonormalFrame,
    s0: &ExtremalState,
    window: (f64, f64),
    tol: f64,
    stops: &[f64],
) -> Result<Trajectory> {
    run(frame, s0, window, tol, Formulation::Constrained, stops)
}

/// Integrates the canonical equations of the alternate Hamiltonian.
pub fn alt_integrate(frame: &OrthonormalFrame, s0: &ExtremalState, window: (f64, f64), tol: f64) -> Result<Trajectory> {
    run(frame, s0, window, tol, Formulation::Alternate, &[])
}

impl Trajectory {
    pub fn frame(&self) -> &OrthonormalFrame {
        &self.frame
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn solution(&self) -> &Solution<6> {
        &self.solution
    }

    pub fn stats(&self) -> Stats {
        self.solution.stats
    }

    pub fn termination(&self) -> Termination {
        self.solution.termination
    }

    pub fn exited_domain(&self) -> Option<f64> {
        match self.solution.termination {
            Termination::DomainExit { t } => Some(t),
            Termination::Completed => None,
        }
    }

    /// `(t_start, t_end)` as integrated (`t_end` may be a domain-exit time).
    pub fn window(&self) -> (f64, f64) {
        (self.solution.t0, self.solution.t_end)
    }

    pub fn initial(&self) -> ExtremalState {
        ExtremalState::from_array(self.solution.y0)
    }

    pub fn eval(&self, t: f64) -> Result<ExtremalState> {
        self.solution.eval(t).map(ExtremalState::from_array)
    }

    /// First derivative, from the vector field at the interpolated state.
    pub fn derivative(&self, t: f64) -> Result<[f64; 6]> {
        let s = self.eval(t)?;
        Ok(self.field(&s))
    }

    /// Second derivative, as the derivative of the field along itself.
    pub fn second_derivative(&self, t: f64) -> Result<[f64; 6]> {
        let s = self.eval(t)?;
        let f = self.field(&s);
        let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok([0.0; 6]);
        }
        let h = 1e-5 / norm.max(1.0);
        let y = s.to_array();
        let shift = |sign: f64| ExtremalState::from_array(std::array::from_fn(|i| y[i] + sign * h * f[i]));
        let fp = self.field(&shift(1.0));
        let fm = self.field(&shift(-1.0));
        Ok(std::array::from_fn(|i| (fp[i] - fm[i]) / (2.0 * h)))
    }

    fn field(&self, s: &ExtremalState) -> [f64; 6] {
        let fv = self.frame.at_unchecked(s.x1, s.x2);
        match self.formulation {
            Formulation::Constrained => field_at(&fv, s),
            Formulation::Alternate => alt_field_at(&fv, s),
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, ExtremalState)> + '_ {
        self.solution.node_times().zip(self.solution.node_states()).map(|(t, y)| (t, ExtremalState::from_array(y)))
    }

    pub fn hamiltonian(&self, t: f64) -> Result<f64> {
        let s = self.eval(t)?;
        Ok(hamiltonian_at(&self.frame.at_unchecked(s.x1, s.x2), &s))
    }

    /// `max |H(t) - H(t0)|` over the accepted nodes.
    pub fn hamiltonian_drift(&self) -> f64 {
        let h0 = hamiltonian_at(&self.frame.at_unchecked(self.initial().x1, self.initial().x2), &self.initial());
        self.nodes().map(|(_, s)| (hamiltonian_at(&self.frame.at_unchecked(s.x1, s.x2), &s) - h0).abs()).fold(0.0, f64::max)
    }

    /// Sample times with `per_step` samples per accepted step, increasing.
    pub fn sample_times(&self, per_step: usize) -> Vec<f64> {
        self.solution.sample_times(per_step)
    }
}

/// Returns `true` iff `A = B = 0` forces `p = 0`, i.e. the rotation-times-frame
/// matrix is invertible at the point.
pub fn abnormal_triviality_check(frame: &OrthonormalFrame, x1: f64, x2: f64, theta: f64) -> Result<bool> {
    abnormal_triviality_at(&frame.at(x1, x2)?, theta, (x1, x2))
}

pub fn abnormal_triviality_at(fv: &FrameValue, theta: f64, at: (f64, f64)) -> Result<bool> {
    let orient = fv.orientation();
    if orient.abs() <= f64::EPSILON * (fv.k * fv.n).abs().max((fv.l * fv.m).abs()).max(1.0) {
        return Err(Error::DegenerateFrame { x1: at.0, x2: at.1, det: orient });
    }
    let (s, c) = theta.sin_cos();
    // [[c, s], [-s, c]] * [[k, l], [m, n]]
    let r = [[c * fv.k + s * fv.m, c * fv.l + s * fv.n], [-s * fv.k + c * fv.m, -s * fv.l + c * fv.n]];
    let det = r[0][0] * r[1][1] - r[0][1] * r[1][0];
    Ok(det != 0.0)
}

/// Sub-Riemannian length `int sqrt(u1^2 + u2^2) dt`, by adaptive Simpson
/// quadrature on every accepted step.
pub fn arc_length(traj: &Trajectory) -> f64 {
    let speed = |t: f64| {
        let s = traj.eval(t).expect("inside window");
        let a = switching_at(&traj.frame.at_unchecked(s.x1, s.x2), &s).a;
        (a * a + s.phi * s.phi).sqrt()
    };
    let times: Vec<f64> = traj.sample_times(1);
    times.windows(2).map(|w| adaptive_simpson(&speed, w[0], w[1], 1e-13, 20)).sum()
}

pub(crate) fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, depth)
}

/// States at `t0 + offsets[i]` obtained by re-integrating from `s0` with
/// tolerance `tol`, landing exactly on each requested time. Used to build
/// finite-difference jets that are free of interpolation noise.
pub fn sample_states(frame: &OrthonormalFrame, s0: &ExtremalState, offsets: &[f64], tol: f64) -> Result<Vec<ExtremalState>> {
    let fwd: Vec<f64> = offsets.iter().copied().filter(|o| *o > 0.0).collect();
    let bwd: Vec<f64> = offsets.iter().copied().filter(|o| *o < 0.0).collect();
    let reach = |v: &[f64], f: fn(f64, f64) -> f64, init: f64| v.iter().copied().fold(init, f);
    let fwd_traj = if fwd.is_empty() { None } else { Some(integrate_with_stops(frame, s0, (0.0, reach(&fwd, f64::max, 0.0)), tol, &fwd)?) };
    let bwd_traj = if bwd.is_empty() { None } else { Some(integrate_with_stops(frame, s0, (0.0, reach(&bwd, f64::min, 0.0)), tol, &bwd)?) };
    offsets
        .iter()
        .map(|&o| {
            if o == 0.0 {
                Ok(*s0)
            } else if o > 0.0 {
                fwd_traj.as_ref().expect("forward run").eval(o)
            } else {
                bwd_traj.as_ref().expect("backward run").eval(o)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{frame_from_metric, MetricChart};
    use std::f64::consts::{FRAC_PI_4, PI};

    fn flat() -> OrthonormalFrame {
        frame_from_metric(&MetricChart::flat())
    }

    #[test]
    fn switching_examples() {
        let f = flat();
        let sw = switching_values(&f, &ExtremalState::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!((sw.a, sw.b), (1.0, 0.0));
        let sw = switching_values(&f, &ExtremalState::new(0.0, 0.0, 0.0, 0.0, 1.0, 0.0)).unwrap();
        assert_eq!((sw.a, sw.b), (0.0, 1.0));
    }

    #[test]
    fn field_examples() {
        let f = flat();
        let fiber = extremal_field(&f, &ExtremalState::new(1.0, 2.0, 0.3, 0.0, 0.0, 0.7)).unwrap();
        assert_eq!(fiber, [0.0, 0.0, 0.7, 0.0, 0.0, 0.0]);
        let line = extremal_field(&f, &ExtremalState::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(line, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let d = extremal_field(&f, &ExtremalState::new(0.0, 0.0, FRAC_PI_4, 0.0, 1.0, 0.0)).unwrap();
        let want = [0.5, 0.5, 0.0, 0.0, 0.0, -0.5];
        for i in 0..6 {
            assert!((d[i] - want[i]).abs() < 1e-15, "{d:?}");
        }
        let sphere = frame_from_metric(&MetricChart::sphere());
        assert!(matches!(extremal_field(&sphere, &ExtremalState::new(1.6, 0.0, 0.0, 1.0, 0.0, 0.0)), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn hamiltonian_examples() {
        let f = flat();
        assert_eq!(hamiltonian_value(&f, &ExtremalState::default()).unwrap(), 0.0);
        assert_eq!(hamiltonian_value(&f, &ExtremalState::new(0.0, 0.0, 0.0, 0.0, 1.0, 1.0)).unwrap(), 0.5);
    }

    #[test]
    fn alt_field_matches_constrained_field() {
        for chart in [MetricChart::flat(), MetricChart::sphere(), MetricChart::hyperbolic()] {
            let frame = frame_from_metric(&chart);
            let s = ExtremalState::new(0.3, -0.2, 1.1, 0.7, -0.4, 0.25);
            let fv = frame.at(s.x1, s.x2).unwrap();
            let a = field_at(&fv, &s);
            let b = alt_field_at(&fv, &s);
            for i in 0..6 {
                assert!((a[i] - b[i]).abs() < 1e-14, "{}: {a:?} vs {b:?}", chart.name());
            }
        }
    }

    #[test]
    fn constant_and_fiber_trajectories() {
        let f = flat();
        let s0 = ExtremalState::new(0.5, -0.5, 0.2, 0.0, 0.0, 0.0);
        let traj = integrate(&f, &s0, (0.0, 5.0), 1e-10).unwrap();
        assert_eq!(traj.eval(3.3).unwrap(), s0);
        assert_eq!(arc_length(&traj), 0.0);

        let fiber = ExtremalState::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        let traj = alt_integrate(&f, &fiber, (0.0, 2.0 * PI), 1e-10).unwrap();
        let s = traj.eval(2.0).unwrap();
        assert!((s.theta - 2.0).abs() < 1e-12 && s.x1 == 0.0 && s.x2 == 0.0);
        assert!((arc_length(&traj) - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn conservation_and_constant_momenta() {
        let f = flat();
        let s0 = ExtremalState::new(0.0, 0.0, 0.3, 0.6, -0.8, 0.9);
        let traj = integrate(&f, &s0, (0.0, 20.0), 1e-10).unwrap();
        assert!(traj.hamiltonian_drift() <= 100.0 * 1e-10, "{}", traj.hamiltonian_drift());
        for (_, s) in traj.nodes() {
            assert!((s.p1 - 0.6).abs() < 1e-8 && (s.p2 + 0.8).abs() < 1e-8);
        }
        let h = hamiltonian_value(&f, &s0).unwrap();
        let len = arc_length(&traj);
        assert!((len - (2.0 * h).sqrt() * 20.0).abs() < 1e-8, "{len}");
    }

    #[test]
    fn time_reversal() {
        let frame = frame_from_metric(&MetricChart::sphere());
        let s0 = ExtremalState::new(0.1, 0.2, 0.4, 0.5, 0.3, -0.6);
        let tol = 1e-10;
        let fwd = integrate(&frame, &s0, (0.0, 3.0), tol).unwrap();
        let s1 = fwd.eval(3.0).unwrap();
        let back = integrate(&frame, &s1, (3.0, 0.0), tol).unwrap();
        assert!(back.eval(0.0).unwrap().distance(&s0) <= 100.0 * tol);
    }

    #[test]
    fn second_derivative_matches_difference_of_first() {
        let frame = frame_from_metric(&MetricChart::hyperbolic());
        let traj = integrate(&frame, &ExtremalState::new(0.1, 0.0, 0.2, 0.4, 0.9, 0.3), (0.0, 2.0), 1e-12).unwrap();
        let h = 1e-4;
        let d2 = traj.second_derivative(1.0).unwrap();
        let a = traj.derivative(1.0 + h).unwrap();
        let b = traj.derivative(1.0 - h).unwrap();
        for i in 0..6 {
            assert!((d2[i] - (a[i] - b[i]) / (2.0 * h)).abs() < 1e-6);
        }
    }

    #[test]
    fn domain_exit_is_graceful() {
        let frame = frame_from_metric(&MetricChart::sphere());
        let traj = integrate(&frame, &ExtremalState::new(1.3, 0.0, 0.0, 1.0, 0.0, 0.0), (0.0, 5.0), 1e-10).unwrap();
        let t = traj.exited_domain().expect("exit");
        assert!((t - (std::f64::consts::FRAC_PI_2 - 0.1 - 1.3)).abs() < 1e-9, "{t}");
    }

    #[test]
    fn tolerance_bounds() {
        let f = flat();
        assert!(matches!(integrate(&f, &ExtremalState::default(), (0.0, 1.0), 1e-2), Err(Error::Tolerance(_))));
        assert!(matches!(integrate(&f, &ExtremalState::default(), (0.0, 1.0), 1e-15), Err(Error::Tolerance(_))));
    }

    #[test]
    fn abnormal_check() {
        let f = flat();
        assert!(abnormal_triviality_check(&f, 0.0, 0.0, 1.3).unwrap());
        let s = frame_from_metric(&MetricChart::sphere());
        assert!(abnormal_triviality_check(&s, 0.4, -1.0, 2.2).unwrap());
        let degenerate = FrameValue { k: 1.0, l: 2.0, m: 0.5, n: 1.0, d: [[0.0; 4]; 2] };
        assert!(matches!(abnormal_triviality_at(&degenerate, 0.3, (0.0, 0.0)), Err(Error::DegenerateFrame { .. })));
    }

    #[test]
    fn sampled_states_land_on_offsets() {
        let f = flat();
        let s0 = ExtremalState::new(0.0, 0.0, 0.0, 0.0, 1.0, 1.0);
        let offs = [-0.02, -0.01, 0.0, 0.01, 0.02];
        let st = sample_states(&f, &s0, &offs, 1e-13).unwrap();
        assert_eq!(st[2], s0);
        let direct = integrate(&f, &s0, (0.0, 0.02), 1e-13).unwrap().eval(0.02).unwrap();
        assert!(st[4].distance(&direct) < 1e-12);
    }
}
