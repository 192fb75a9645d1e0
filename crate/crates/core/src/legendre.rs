//! The two Legendre projections of the unit tangent bundle: `pi` to the
//! surface and `pi'` to the local leaf space of the geodesic flow.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::extremal::{check_tol, sample_states, settings, ExtremalState, Trajectory};
use crate::jet::{central_jet, PlaneJet, STENCIL};
use crate::metric::{christoffel_from, MetricChart, OrthonormalFrame};
use crate::ode::{self, Solution};

/// `pi(x, theta) = x`.
pub fn project_pi(s: &ExtremalState) -> [f64; 2] {
    [s.x1, s.x2]
}

/// Generator `V = R d/dx1 + S d/dx2 + W d/dtheta` of the geodesic flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowValue {
    pub r: f64,
    pub s: f64,
    pub w: f64,
}

/// How the angular component `W` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WForm {
    /// `W = -(d1 G / 2G) sin(theta)` for metrics `dx1^2 + G dx2^2`.
    Liouville,
    /// `W = g(J u, -Gamma(u, u) - cos(theta) D_u v1 - sin(theta) D_u v2)`.
    Christoffel,
}

pub(crate) fn default_form(chart: &MetricChart) -> WForm {
    if chart.claims_geodesic_parallel() {
        WForm::Liouville
    } else {
        WForm::Christoffel
    }
}

pub(crate) fn flow_unchecked(frame: &OrthonormalFrame, x1: f64, x2: f64, theta: f64, form: WForm) -> FlowValue {
    let chart = frame.chart();
    let fv = frame.at_unchecked(x1, x2);
    let [r, s] = fv.unit(theta);
    let w = match form {
        WForm::Liouville => {
            let g22 = chart.coeffs(x1, x2).g22;
            let d1g22 = chart.partials(x1, x2)[0].g22;
            -d1g22 / (2.0 * g22) * theta.sin()
        }
        WForm::Christoffel => {
            let g = chart.coeffs(x1, x2);
            let gamma = christoffel_from(g, chart.partials(x1, x2));
            let u = [r, s];
            let normal = fv.unit(theta + FRAC_PI_2);
            let along = |j: usize| u[0] * fv.d[0][j] + u[1] * fv.d[1][j];
            let dv1 = [along(0), along(1)];
            let dv2 = [along(2), along(3)];
            let (sn, cs) = theta.sin_cos();
            let gu = gamma.contract(u, u);
            let acc = [-gu[0] - cs * dv1[0] - sn * dv2[0], -gu[1] - cs * dv1[1] - sn * dv2[1]];
            g.inner(normal, acc)
        }
    };
    FlowValue { r, s, w }
}

/// The geodesic-flow generator at `(x1, x2, theta)`. Charts declared geodesic
/// parallel use the Liouville form, all others the Christoffel form.
pub fn geodesic_flow(frame: &OrthonormalFrame, x1: f64, x2: f64, theta: f64) -> Result<FlowValue> {
    geodesic_flow_with(frame, x1, x2, theta, default_form(frame.chart()))
}

pub fn geodesic_flow_with(frame: &OrthonormalFrame, x1: f64, x2: f64, theta: f64, form: WForm) -> Result<FlowValue> {
    frame.chart().metric_at(x1, x2)?;
    Ok(flow_unchecked(frame, x1, x2, theta, form))
}

/// Integral curve of the geodesic flow through `(x1, x2, theta)` on `[0, t1]`.
pub fn integrate_flow(frame: &OrthonormalFrame, start: [f64; 3], t1: f64, tol: f64) -> Result<Solution<3>> {
    check_tol(tol)?;
    frame.chart().metric_at(start[0], start[1])?;
    let form = default_form(frame.chart());
    let rhs = |_: f64, y: &[f64; 3]| {
        let v = flow_unchecked(frame, y[0], y[1], y[2], form);
        [v.r, v.s, v.w]
    };
    let chart = frame.chart();
    ode::integrate(rhs, 0.0, start, t1, &settings(tol), |y| chart.contains(y[0], y[1]), &[])
}

/// Riemannian geodesic `x'' = -Gamma(x', x')` with state `(x1, x2, v1, v2)`.
pub fn integrate_geodesic(chart: &MetricChart, x0: [f64; 2], v0: [f64; 2], t1: f64, tol: f64) -> Result<Solution<4>> {
    check_tol(tol)?;
    chart.metric_at(x0[0], x0[1])?;
    let rhs = |_: f64, y: &[f64; 4]| {
        let gamma = christoffel_from(chart.coeffs(y[0], y[1]), chart.partials(y[0], y[1]));
        let a = gamma.contract([y[2], y[3]], [y[2], y[3]]);
        [y[2], y[3], -a[0], -a[1]]
    };
    ode::integrate(rhs, 0.0, [x0[0], x0[1], v0[0], v0[1]], t1, &settings(tol), |y| chart.contains(y[0], y[1]), &[])
}

/// Two first integrals `(F, E)` of the geodesic flow near a base point.
#[derive(Debug, Clone)]
pub enum LeafChart {
    /// `F = -x1 sin(theta) + x2 cos(theta)`, `E = theta`.
    Flat,
    Numeric(NumericLeaf),
}

/// Coordinates of the crossing with the section through the base point
/// spanned by `d/dtheta` and a surface direction `dir`.
#[derive(Debug, Clone)]
pub struct NumericLeaf {
    frame: OrthonormalFrame,
    form: WForm,
    base: [f64; 3],
    /// Coordinate vector spanning the surface part of the section, unit at the base.
    dir: [f64; 2],
    /// Covector vanishing on `dir`.
    normal: [f64; 2],
    /// Rotation of the section away from the normal to the flow.
    pub tilt: f64,
}

const LEAF_TOL: f64 = 1e-13;
const TANGENCY: f64 = 1e-8;

impl NumericLeaf {
    fn new(frame: &OrthonormalFrame, base: &ExtremalState, tilt: f64) -> Result<Self> {
        let chart = frame.chart();
        let g = chart.metric_at(base.x1, base.x2)?;
        let fv = frame.at(base.x1, base.x2)?;
        let dir = fv.unit(base.theta + FRAC_PI_2 - tilt);
        let perp = fv.unit(base.theta - tilt);
        let normal = [g.g11 * perp[0] + g.g12 * perp[1], g.g12 * perp[0] + g.g22 * perp[1]];
        Ok(Self { frame: frame.clone(), form: default_form(chart), base: [base.x1, base.x2, base.theta], dir, normal, tilt })
    }

    fn sigma(&self, y: &[f64; 3]) -> f64 {
        self.normal[0] * (y[0] - self.base[0]) + self.normal[1] * (y[1] - self.base[1])
    }

    fn eval(&self, q: [f64; 3]) -> Result<[f64; 2]> {
        let mut y = q;
        let nn = self.normal[0].hypot(self.normal[1]);
        for _ in 0..40 {
            let v = flow_unchecked(&self.frame, y[0], y[1], y[2], self.form);
            let rate = self.normal[0] * v.r + self.normal[1] * v.s;
            if rate.abs() < TANGENCY * nn * v.r.hypot(v.s) {
                return Err(Error::SectionTangent(rate));
            }
            let sigma = self.sigma(&y);
            let dt = -sigma / rate;
            if dt.abs() <= 1e-15 {
                let g = self.frame.chart().coeffs(self.base[0], self.base[1]);
                let dx = [y[0] - self.base[0], y[1] - self.base[1]];
                return Ok([g.inner(self.dir, dx), y[2] - self.base[2]]);
            }
            let sol = integrate_flow(&self.frame, y, dt, LEAF_TOL)?;
            if sol.termination != ode::Termination::Completed {
                return Err(Error::SectionMissed);
            }
            y = sol.final_state();
        }
        Err(Error::SectionMissed)
    }
}

impl LeafChart {
    pub fn is_numeric(&self) -> bool {
        matches!(self, LeafChart::Numeric(_))
    }

    pub fn eval(&self, x1: f64, x2: f64, theta: f64) -> Result<[f64; 2]> {
        match self {
            LeafChart::Flat => {
                let (s, c) = theta.sin_cos();
                Ok([-x1 * s + x2 * c, theta])
            }
            LeafChart::Numeric(n) => n.eval([x1, x2, theta]),
        }
    }

    pub fn eval_state(&self, s: &ExtremalState) -> Result<[f64; 2]> {
        self.eval(s.x1, s.x2, s.theta)
    }

    /// `(dF(V), dE(V))` at a point, by central differences along the flow.
    pub fn flow_residual(&self, frame: &OrthonormalFrame, pt: [f64; 3]) -> Result<[f64; 2]> {
        let v = geodesic_flow(frame, pt[0], pt[1], pt[2])?;
        let h = 1e-4;
        let shift = |sgn: f64| self.eval(pt[0] + sgn * h * v.r, pt[1] + sgn * h * v.s, pt[2] + sgn * h * v.w);
        let (a, b) = (shift(1.0)?, shift(-1.0)?);
        Ok([(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)])
    }
}

pub fn leaf_chart_flat() -> LeafChart {
    LeafChart::Flat
}

/// Numeric leaf chart centered at `base`. The section is first taken normal
/// to the flow; if the flow is tangent to it anywhere on a probe ring around
/// the base, the section is rotated once and the probe repeated.
pub fn leaf_chart_numeric(frame: &OrthonormalFrame, base: &ExtremalState) -> Result<LeafChart> {
    let mut last = Error::SectionMissed;
    for tilt in [0.0, std::f64::consts::FRAC_PI_6] {
        let leaf = NumericLeaf::new(frame, base, tilt)?;
        let probe = [[0.05, 0.0, 0.0], [-0.05, 0.0, 0.0], [0.0, 0.05, 0.0], [0.0, -0.05, 0.0], [0.0, 0.0, 0.3], [0.0, 0.0, -0.3]];
        let mut ok = true;
        for d in probe {
            let q = [base.x1 + d[0], base.x2 + d[1], base.theta + d[2]];
            if !frame.chart().contains(q[0], q[1]) {
                continue;
            }
            if let Err(e @ Error::SectionTangent(_)) = leaf.eval(q) {
                last = e;
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(LeafChart::Numeric(leaf));
        }
    }
    Err(last)
}

/// `(f, e)(t)` along a trajectory, stopped at the first point the leaf chart
/// cannot resolve.
#[derive(Debug, Clone)]
pub struct LeafCurve {
    pub samples: Vec<(f64, [f64; 2])>,
    pub truncated_at: Option<f64>,
}

pub fn project_pi_prime(traj: &Trajectory, leaf: &LeafChart, per_step: usize) -> LeafCurve {
    let mut samples = Vec::new();
    for t in traj.sample_times(per_step) {
        let s = traj.eval(t).expect("sample inside window");
        match leaf.eval_state(&s) {
            Ok(p) => samples.push((t, p)),
            Err(_) => return LeafCurve { samples, truncated_at: Some(t) },
        }
    }
    LeafCurve { samples, truncated_at: None }
}

/// States on the jet stencil around `s`, by local re-integration.
pub fn stencil_states(frame: &OrthonormalFrame, s: &ExtremalState, h: f64) -> Result<[ExtremalState; 7]> {
    let st = sample_states(frame, s, &STENCIL.map(|o| o * h), LEAF_TOL)?;
    Ok(std::array::from_fn(|i| st[i]))
}

/// Finite-difference jet of `pi` along the extremal through `s`.
pub fn pi_jet(frame: &OrthonormalFrame, s: &ExtremalState, h: f64) -> Result<PlaneJet> {
    let st = stencil_states(frame, s, h)?;
    Ok(central_jet(&st.map(|q| project_pi(&q)), h))
}

/// Finite-difference jet of `pi'` in the given leaf chart.
pub fn leaf_jet(frame: &OrthonormalFrame, leaf: &LeafChart, s: &ExtremalState, h: f64) -> Result<PlaneJet> {
    let st = stencil_states(frame, s, h)?;
    let mut p = [[0.0; 2]; 7];
    for (o, q) in p.iter_mut().zip(st.iter()) {
        *o = leaf.eval_state(q)?;
    }
    Ok(central_jet(&p, h))
}
