//! Singular parameter values of `pi` and `pi'` along normal extremals, their
//! normal-form classes, and curvature diagnostics of the projected fronts.
//!
//! Classes: `I` constant curve, `II` fiber-type embedding (the projection is
//! constant), `III` immersion, `IV` cusp.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::{field_at, switching_at, ExtremalState, Trajectory};
use crate::jet::{det, norm, PlaneJet};
use crate::legendre::{default_form, flow_unchecked, pi_jet};
use crate::metric::OrthonormalFrame;
use crate::ode::find_roots;
use crate::pendulum::{FlatPendulum, Regime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NormalFormClass {
    I,
    II,
    III,
    IV,
}

impl fmt::Display for NormalFormClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormalFormClass::I => "I",
            NormalFormClass::II => "II",
            NormalFormClass::III => "III",
            NormalFormClass::IV => "IV",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    Pi,
    PiPrime,
}

impl fmt::Display for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Projection::Pi => "pi",
            Projection::PiPrime => "pi'",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassificationPair {
    pub pi: NormalFormClass,
    pub pi_prime: NormalFormClass,
}

use NormalFormClass::{I, II, III, IV};

/// The only pairs a normal geodesic germ can realize.
pub const ALLOWED_PAIRS: [(NormalFormClass, NormalFormClass); 6] = [(I, I), (II, III), (III, II), (III, III), (III, IV), (IV, III)];

impl ClassificationPair {
    pub fn is_allowed(&self) -> bool {
        ALLOWED_PAIRS.contains(&(self.pi, self.pi_prime))
    }
}

impl fmt::Display for ClassificationPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.pi, self.pi_prime)
    }
}

/// Relative threshold of the momentum-level classification.
pub const EPS_CLASS: f64 = 1e-11;
/// Relaxed threshold applied to the defining quantity at a located event.
pub const EPS_EVENT: f64 = 1e-7;
/// Localization tolerance of event times.
pub const EVENT_T_TOL: f64 = 1e-12;

/// Momentum-level quantities deciding both classes at a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Germ {
    pub a: f64,
    pub b: f64,
    pub phi: f64,
    /// `phi - W A`: the `d/dtheta` component of the velocity modulo the flow.
    pub big_phi: f64,
    pub big_phi_dot: f64,
    /// `kn - lm`.
    pub orientation: f64,
    /// `sqrt(A^2 + phi^2) = sqrt(2H)`.
    pub speed: f64,
    /// `sqrt(A^2 + B^2 + phi^2)`.
    pub scale: f64,
    pub flat: bool,
}

fn big_phi(frame: &OrthonormalFrame, s: &ExtremalState) -> f64 {
    let fv = frame.at_unchecked(s.x1, s.x2);
    let a = switching_at(&fv, s).a;
    let w = if frame.chart().is_flat() { 0.0 } else { flow_unchecked(frame, s.x1, s.x2, s.theta, default_form(frame.chart())).w };
    s.phi - w * a
}

pub fn germ(frame: &OrthonormalFrame, s: &ExtremalState) -> Result<Germ> {
    if !s.is_finite() {
        return Err(Error::InconsistentState);
    }
    let fv = frame.at(s.x1, s.x2)?;
    let sw = switching_at(&fv, s);
    let flat = frame.chart().is_flat();
    let bp = big_phi(frame, s);
    let bp_dot = if flat {
        -sw.a * sw.b
    } else {
        let f = field_at(&fv, s);
        let fnorm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        if fnorm == 0.0 {
            0.0
        } else {
            let h = 1e-5 / fnorm.max(1.0);
            let y = s.to_array();
            let at = |sg: f64| big_phi(frame, &ExtremalState::from_array(std::array::from_fn(|i| y[i] + sg * h * f[i])));
            (at(1.0) - at(-1.0)) / (2.0 * h)
        }
    };
    Ok(Germ {
        a: sw.a,
        b: sw.b,
        phi: s.phi,
        big_phi: bp,
        big_phi_dot: bp_dot,
        orientation: fv.orientation(),
        speed: sw.a.hypot(s.phi),
        scale: sw.a.hypot(sw.b).hypot(s.phi),
        flat,
    })
}

impl Germ {
    fn constant(&self) -> bool {
        self.scale == 0.0 || self.speed <= EPS_CLASS * self.scale
    }

    pub fn classify_pi(&self, eps: f64) -> NormalFormClass {
        if self.constant() {
            I
        } else if self.a.hypot(self.b) <= EPS_CLASS * self.scale {
            II
        } else if self.a.abs() > eps * self.scale {
            III
        } else {
            IV
        }
    }

    pub fn classify_pi_prime(&self, eps: f64) -> NormalFormClass {
        let dot_eps = if self.flat { EPS_CLASS } else { 1e-8 };
        if self.constant() {
            I
        } else if self.big_phi.abs() > eps * self.scale {
            III
        } else if self.big_phi_dot.abs() <= dot_eps * self.scale * self.scale {
            II
        } else {
            IV
        }
    }
}

/// `det(second, third)`; nonzero iff a curve with vanishing velocity has a cusp.
pub fn cusp_delta(second: [f64; 2], third: [f64; 2]) -> f64 {
    det(second, third)
}

pub fn classify_pi(frame: &OrthonormalFrame, s: &ExtremalState) -> Result<NormalFormClass> {
    Ok(germ(frame, s)?.classify_pi(EPS_CLASS))
}

pub fn classify_pi_prime(frame: &OrthonormalFrame, s: &ExtremalState) -> Result<NormalFormClass> {
    Ok(germ(frame, s)?.classify_pi_prime(EPS_CLASS))
}

fn checked(pair: ClassificationPair) -> Result<ClassificationPair> {
    if pair.is_allowed() {
        Ok(pair)
    } else {
        Err(Error::ForbiddenPair(pair.pi.to_string(), pair.pi_prime.to_string()))
    }
}

pub fn classify_pair(frame: &OrthonormalFrame, s: &ExtremalState) -> Result<ClassificationPair> {
    let g = germ(frame, s)?;
    checked(ClassificationPair { pi: g.classify_pi(EPS_CLASS), pi_prime: g.classify_pi_prime(EPS_CLASS) })
}

/// Pair at a located event, with the relaxed threshold on the projection
/// whose defining quantity vanishes there.
pub fn classify_pair_at_event(frame: &OrthonormalFrame, s: &ExtremalState, projection: Projection) -> Result<ClassificationPair> {
    let g = germ(frame, s)?;
    let (ep, epp) = match projection {
        Projection::Pi => (EPS_EVENT, EPS_CLASS),
        Projection::PiPrime => (EPS_CLASS, EPS_EVENT),
    };
    checked(ClassificationPair { pi: g.classify_pi(ep), pi_prime: g.classify_pi_prime(epp) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularEvent {
    pub t: f64,
    pub projection: Projection,
    pub refined_t_tol: f64,
    #[serde(rename = "class")]
    pub clazz: NormalFormClass,
    pub pair: ClassificationPair,
    /// Cusp determinant: `2 B^2 (kn - lm) theta'^3` for `pi`, and
    /// `2 Phi'^2 A` in a leaf chart centered at the event for `pi'`.
    pub delta: f64,
    pub kappa_c: Option<f64>,
    pub state: ExtremalState,
}

/// `det(x'', x''') / |x''|^{5/2}` from the exact jet at a `pi`-cusp, where
/// `x'' = B phi (R, S)`.
fn analytic_cusp(frame: &OrthonormalFrame, s: &ExtremalState, g: &Germ) -> (f64, f64) {
    let delta = 2.0 * g.b * g.b * g.orientation * g.phi.powi(3);
    let u = frame.at_unchecked(s.x1, s.x2).unit(s.theta);
    let acc = norm(u) * (g.b * g.phi).abs();
    (delta, delta / acc.powf(2.5))
}

/// Locates and classifies all zeros of `A` and of `Phi` on the trajectory.
pub fn detect_events(traj: &Trajectory) -> Result<Vec<SingularEvent>> {
    let frame = traj.frame();
    let s0 = traj.initial();
    let g0 = germ(frame, &s0)?;
    let pi0 = g0.classify_pi(EPS_CLASS);
    let pp0 = g0.classify_pi_prime(EPS_CLASS);
    if pi0 == I {
        return Ok(Vec::new());
    }
    let sol = traj.solution();
    let mut events = Vec::new();
    let mut scan = |projection: Projection, f: &dyn Fn(&ExtremalState) -> f64| -> Result<()> {
        let roots = find_roots(sol, 8, EVENT_T_TOL, |_, y| f(&ExtremalState::from_array(*y)));
        for w in roots.windows(2) {
            if (w[1] - w[0]).abs() <= EVENT_T_TOL {
                return Err(Error::RootCluster(w[0]));
            }
        }
        for t in roots {
            let s = traj.eval(t)?;
            let g = germ(frame, &s)?;
            let pair = classify_pair_at_event(frame, &s, projection)?;
            let (clazz, delta, kappa_c) = match projection {
                Projection::Pi => {
                    let (delta, kc) = analytic_cusp(frame, &s, &g);
                    (pair.pi, delta, (pair.pi == IV).then_some(kc))
                }
                Projection::PiPrime => (pair.pi_prime, 2.0 * g.big_phi_dot.powi(2) * g.a, None),
            };
            events.push(SingularEvent { t, projection, refined_t_tol: EVENT_T_TOL, clazz, pair, delta, kappa_c, state: s });
        }
        Ok(())
    };
    if pi0 != II {
        let f = |s: &ExtremalState| switching_at(&frame.at_unchecked(s.x1, s.x2), s).a;
        scan(Projection::Pi, &f)?;
    }
    if pp0 != II {
        let f = |s: &ExtremalState| big_phi(frame, s);
        scan(Projection::PiPrime, &f)?;
    }
    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(events)
}

/// Step of the finite-difference jets at a state.
pub fn jet_step(frame: &OrthonormalFrame, s: &ExtremalState) -> Result<f64> {
    Ok(1e-2 / germ(frame, s)?.scale.max(1.0))
}

/// Class of a plane-curve germ from its finite-difference jet, with `rate`
/// the inverse time scale of the motion. `None` when the velocity vanishes
/// without a cusp.
pub fn classify_jet(jet: &PlaneJet, rate: f64) -> Option<NormalFormClass> {
    let (v, a, j) = (norm(jet.d1), norm(jet.d2), norm(jet.d3));
    let rate = rate.max(f64::MIN_POSITIVE);
    let reference = v.max(a / rate).max(j / (rate * rate));
    if reference <= 1e-9 {
        Some(II)
    } else if v > 1e-6 * reference {
        Some(III)
    } else if jet.delta().abs() > 1e-6 * a * j {
        Some(IV)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Curvature {
    /// `Phi / |A|`; equals `theta' / |A|` in the flat chart.
    pub value: f64,
    /// Coordinate curvature `det(x', x'') / |x'|^3` by finite differences.
    pub fd: f64,
    /// `false` off the flat chart, where the formula is not established.
    pub validated: bool,
}

pub fn curvature(frame: &OrthonormalFrame, s: &ExtremalState) -> Result<Curvature> {
    let g = germ(frame, s)?;
    if g.a.abs() <= EPS_CLASS * g.scale {
        return Err(Error::NotImmersive);
    }
    let jet = pi_jet(frame, s, jet_step(frame, s)?)?;
    let fd = det(jet.d1, jet.d2) / norm(jet.d1).powi(3);
    Ok(Curvature { value: g.big_phi / g.a.abs(), fd, validated: g.flat })
}

/// `det(x'', x''') / |x''|^{5/2}` by finite differences at a `pi`-cusp.
pub fn cuspidal_curvature(frame: &OrthonormalFrame, s: &ExtremalState) -> Result<f64> {
    let g = germ(frame, s)?;
    if g.classify_pi(EPS_EVENT) != IV {
        return Err(Error::NotACusp);
    }
    let jet = pi_jet(frame, s, jet_step(frame, s)?)?;
    Ok(jet.delta() / norm(jet.d2).powf(2.5))
}

/// `2 sign(theta') |theta'|^{1/2} / |p|^{1/2}` (flat chart).
pub fn cuspidal_curvature_flat(s: &ExtremalState) -> f64 {
    2.0 * s.phi.signum() * s.phi.abs().sqrt() / s.p1.hypot(s.p2).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternation {
    Interleaved,
    Broken,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZigzagReport {
    pub events: Vec<SingularEvent>,
    pub alternation: Alternation,
    /// Angle between the second derivative of `pi` at each cusp and `(p2, -p1)`.
    pub cusp_angles: Vec<f64>,
    pub max_cusp_angle: f64,
    pub directions_parallel: bool,
}

pub const CUSP_ANGLE_TOL: f64 = 1e-6;

pub fn zigzag_report(traj: &Trajectory) -> Result<ZigzagReport> {
    let frame = traj.frame();
    let events = detect_events(traj)?;
    let s0 = traj.initial();
    let librating = frame.chart().is_flat() && FlatPendulum::new(&s0)?.regime == Regime::Libration;
    let alternation = if !librating || events.is_empty() {
        Alternation::NotApplicable
    } else if events.windows(2).all(|w| w[0].projection != w[1].projection) && events.len() >= 2 {
        Alternation::Interleaved
    } else {
        Alternation::Broken
    };
    let fixed = [s0.p2, -s0.p1];
    let mut cusp_angles = Vec::new();
    if frame.chart().is_flat() {
        for e in events.iter().filter(|e| e.projection == Projection::Pi && e.clazz == IV) {
            let jet = pi_jet(frame, &e.state, jet_step(frame, &e.state)?)?;
            let d2 = jet.d2;
            let dot = d2[0] * fixed[0] + d2[1] * fixed[1];
            cusp_angles.push(det(d2, fixed).abs().atan2(dot.abs()));
        }
    }
    let max_cusp_angle = cusp_angles.iter().copied().fold(0.0, f64::max);
    Ok(ZigzagReport { events, alternation, directions_parallel: max_cusp_angle <= CUSP_ANGLE_TOL, cusp_angles, max_cusp_angle })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremal::integrate;
    use crate::metric::{frame_from_metric, MetricChart};
    use crate::pendulum::closed_form_flat;
    use std::f64::consts::FRAC_PI_4;

    fn flat() -> OrthonormalFrame {
        frame_from_metric(&MetricChart::flat())
    }

    fn st(theta: f64, p1: f64, p2: f64, phi: f64) -> ExtremalState {
        ExtremalState::new(0.0, 0.0, theta, p1, p2, phi)
    }

    #[test]
    fn delta_of_model_curves() {
        assert_eq!(cusp_delta([1.0, 0.0], [0.0, 2.0]), 2.0);
        // (t^2, t^4): second (2, 0), third (0, 0)
        assert_eq!(cusp_delta([2.0, 0.0], [0.0, 0.0]), 0.0);
    }

    #[test]
    fn state_classes() {
        let f = flat();
        assert_eq!(classify_pi(&f, &st(0.0, 0.0, 0.0, 0.0)).unwrap(), I);
        assert_eq!(classify_pi(&f, &st(0.0, 0.0, 0.0, 1.0)).unwrap(), II);
        assert_eq!(classify_pi(&f, &st(0.0, 0.0, 1.0, 1.0)).unwrap(), IV);
        assert_eq!(classify_pi_prime(&f, &st(0.0, 0.0, 0.0, 0.0)).unwrap(), I);
        assert_eq!(classify_pi_prime(&f, &st(0.0, 1.0, 0.0, 0.0)).unwrap(), II);
        assert_eq!(classify_pi_prime(&f, &st(FRAC_PI_4, 0.0, 1.0, 0.0)).unwrap(), IV);
        let pair = |s| classify_pair(&f, &s).unwrap();
        assert_eq!(pair(st(0.0, 0.0, 0.0, 0.0)), ClassificationPair { pi: I, pi_prime: I });
        assert_eq!(pair(st(0.0, 0.0, 0.0, 1.0)), ClassificationPair { pi: II, pi_prime: III });
        assert_eq!(pair(st(0.0, 0.0, 1.0, 1.0)), ClassificationPair { pi: IV, pi_prime: III });
        assert_eq!(pair(st(0.0, 1.0, 0.0, 0.0)), ClassificationPair { pi: III, pi_prime: II });
        assert!(classify_pair(&f, &st(f64::NAN, 0.0, 0.0, 0.0)).is_err());
        // A = phi = 0 with B != 0 is an equilibrium of the extremal system
        assert_eq!(pair(st(FRAC_PI_4 * 2.0, 1.0, 0.0, 0.0)).pi, I);
    }

    #[test]
    fn no_events_for_lines_and_fibers() {
        let f = flat();
        let line = integrate(&f, &st(0.0, 1.0, 0.0, 0.0), (0.0, 5.0), 1e-10).unwrap();
        assert!(detect_events(&line).unwrap().is_empty());
        let fiber = integrate(&f, &st(0.0, 0.0, 0.0, 1.0), (0.0, 5.0), 1e-10).unwrap();
        assert!(detect_events(&fiber).unwrap().is_empty());
    }

    #[test]
    fn cusp_at_the_start() {
        let f = flat();
        let traj = integrate(&f, &st(0.0, 0.0, 1.0, 1.0), (0.0, 3.0), 1e-10).unwrap();
        let ev = detect_events(&traj).unwrap();
        let first = &ev[0];
        assert_eq!((first.t, first.projection, first.clazz), (0.0, Projection::Pi, IV));
        assert!((first.delta - 2.0).abs() < 1e-12);
        assert!((first.kappa_c.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn libration_events_alternate_and_match_the_closed_form() {
        let f = flat();
        let s0 = st(0.0, 0.0, 1.0, 0.5);
        let traj = integrate(&f, &s0, (0.0, 20.0), 1e-10).unwrap();
        let ev = detect_events(&traj).unwrap();
        assert!(ev.len() > 4);
        for w in ev.windows(2) {
            assert_ne!(w[0].projection, w[1].projection);
        }
        for e in &ev {
            assert_eq!(e.clazz, IV, "{e:?}");
            let (th, thd) = closed_form_flat(&s0, e.t).unwrap();
            match e.projection {
                Projection::Pi => assert!(th.sin().abs() < 1e-9),
                Projection::PiPrime => assert!(thd.abs() < 1e-9),
            }
        }
    }

    #[test]
    fn curvature_values() {
        let f = flat();
        assert_eq!(curvature(&f, &st(0.0, 1.0, 0.0, 0.0)).unwrap().value, 0.0);
        let c = curvature(&f, &st(0.0, 1.0, 0.0, 2.0)).unwrap();
        assert_eq!(c.value, 2.0);
        assert!((c.fd - 2.0).abs() < 1e-7, "{c:?}");
        assert!(matches!(curvature(&f, &st(0.0, 0.0, 1.0, 1.0)), Err(Error::NotImmersive)));
    }

    #[test]
    fn cuspidal_curvature_values() {
        let f = flat();
        for (phi, want) in [(1.0, 2.0), (4.0, 4.0), (-4.0, -4.0)] {
            let s = st(0.0, 0.0, 1.0, phi);
            assert_eq!(cuspidal_curvature_flat(&s), want);
            let fd = cuspidal_curvature(&f, &s).unwrap();
            assert!((fd - want).abs() < 1e-6 * want.abs(), "{fd} {want}");
        }
        assert!(matches!(cuspidal_curvature(&f, &st(0.0, 1.0, 0.0, 1.0)), Err(Error::NotACusp)));
    }

    #[test]
    fn zigzag() {
        let f = flat();
        let s0 = st(0.2, 0.0, 1.0, 0.0);
        let period = FlatPendulum::new(&s0).unwrap().period().unwrap();
        let traj = integrate(&f, &s0, (0.0, 2.0 * period + 0.1), 1e-10).unwrap();
        let rep = zigzag_report(&traj).unwrap();
        assert_eq!(rep.alternation, Alternation::Interleaved);
        assert!(rep.directions_parallel && !rep.cusp_angles.is_empty(), "{:?}", rep.cusp_angles);
        let rot = integrate(&f, &st(0.0, 0.0, 1.0, 3.0), (0.0, 10.0), 1e-10).unwrap();
        let rep = zigzag_report(&rot).unwrap();
        assert_eq!(rep.alternation, Alternation::NotApplicable);
        assert!(rep.events.iter().all(|e| e.projection == Projection::Pi));
    }

    #[test]
    fn general_chart_cusp_delta() {
        let frame = frame_from_metric(&MetricChart::sphere());
        let s = ExtremalState::new(0.3, 0.2, 0.0, 0.0, 0.8, 0.9);
        let fv = frame.at(0.3, 0.2).unwrap();
        assert!(switching_at(&fv, &s).a.abs() < 1e-15);
        let g = germ(&frame, &s).unwrap();
        let h = jet_step(&frame, &s).unwrap();
        let jet = pi_jet(&frame, &s, h).unwrap();
        let want = 2.0 * g.b * g.b * g.orientation * g.phi.powi(3);
        assert!((jet.delta() - want).abs() < 1e-4 * want.abs(), "{} {want}", jet.delta());
    }
}
