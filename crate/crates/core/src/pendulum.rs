//! Pendulum reduction of the fiber angle and the flat closed form.
//!
//! With `q = (k p1 + l p2, m p1 + n p2)` the angle obeys
//! `theta'' = -r sin(2 theta + rho)`, where `r = |q|^2 / 2`,
//! `r sin(rho) = q1 q2` and `r cos(rho) = -(q1^2 - q2^2) / 2`.
//! In the flat chart `r` and `rho` are constants of motion and
//! `Theta = 2 theta + rho` is a simple pendulum of frequency `omega = sqrt(2 r)`.

use std::f64::consts::PI;

use crate::elliptic::{complete_k, gd, incomplete_f, jacobi};
use crate::error::{Error, Result};
use crate::extremal::{frame_momenta, ExtremalState};
use crate::metric::{FrameValue, OrthonormalFrame};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumParams {
    pub r: f64,
    /// Phase; `0` when `degenerate`.
    pub rho: f64,
    pub omega: f64,
    /// Reduced angle `2 theta + rho`.
    pub big_theta: f64,
    /// `r = 0`: momenta vanish in the frame, `rho` is undefined.
    pub degenerate: bool,
}

pub(crate) fn reduce_at(fv: &FrameValue, s: &ExtremalState) -> PendulumParams {
    let (q1, q2) = frame_momenta(fv, s);
    let r = 0.5 * (q1 * q1 + q2 * q2);
    if r == 0.0 {
        return PendulumParams { r, rho: 0.0, omega: 0.0, big_theta: 2.0 * s.theta, degenerate: true };
    }
    let rho = (q1 * q2).atan2(-0.5 * (q1 * q1 - q2 * q2));
    PendulumParams { r, rho, omega: (2.0 * r).sqrt(), big_theta: 2.0 * s.theta + rho, degenerate: false }
}

pub fn reduce(frame: &OrthonormalFrame, s: &ExtremalState) -> Result<PendulumParams> {
    Ok(reduce_at(&frame.at(s.x1, s.x2)?, s))
}

/// `theta'^2 / 2 - (r / 2) cos(2 theta + rho)`; conserved in the flat chart.
pub fn pendulum_energy(s: &ExtremalState, params: &PendulumParams) -> f64 {
    0.5 * s.phi * s.phi - 0.5 * params.r * (2.0 * s.theta + params.rho).cos()
}

/// Flat reduction, using `p` directly as the frame-contracted momenta.
pub fn reduce_flat(s: &ExtremalState) -> PendulumParams {
    let fv = FrameValue { k: 1.0, l: 0.0, m: 0.0, n: 1.0, d: [[0.0; 4]; 2] };
    reduce_at(&fv, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `r = 0`: the angle drifts linearly.
    Degenerate,
    /// Energy below the separatrix.
    Libration,
    /// Energy above the separatrix.
    Rotation,
    /// Energy on the separatrix (to `1e-12 max(1, r)`).
    Separatrix,
}

pub fn regime(energy: f64, params: &PendulumParams) -> Regime {
    if params.degenerate {
        return Regime::Degenerate;
    }
    let gap = energy - 0.5 * params.r;
    if gap.abs() < 1e-12 * params.r.max(1.0) {
        Regime::Separatrix
    } else if gap < 0.0 {
        Regime::Libration
    } else {
        Regime::Rotation
    }
}

#[derive(Debug, Clone, Copy)]
enum Branch {
    Drift { theta0: f64, rate: f64 },
    Fixed { big_theta: f64 },
    Libration { k: f64, m: f64, u0: f64, offset: f64 },
    Rotation { m: f64, rate: f64, u0: f64 },
    Separatrix { rate: f64, u0: f64, offset: f64 },
}

/// Exact flat solution of the angle dynamics, prepared once for repeated evaluation.
#[derive(Debug, Clone, Copy)]
pub struct FlatPendulum {
    pub params: PendulumParams,
    pub energy: f64,
    pub regime: Regime,
    omega: f64,
    rho: f64,
    branch: Branch,
}

impl FlatPendulum {
    pub fn new(s0: &ExtremalState) -> Result<Self> {
        if !s0.is_finite() {
            return Err(Error::InconsistentState);
        }
        let params = reduce_flat(s0);
        let energy = pendulum_energy(s0, &params);
        let regime = regime(energy, &params);
        let omega = params.omega;
        let w2 = omega * omega;
        let big_dot = 2.0 * s0.phi;
        // continuous offset so that the reduced initial angle lies in (-pi, pi]
        let turns = (params.big_theta / (2.0 * PI)).round();
        let offset = 2.0 * PI * turns;
        let th0 = params.big_theta - offset;
        let e_big = 0.5 * big_dot * big_dot - w2 * th0.cos();
        let branch = match regime {
            Regime::Degenerate => Branch::Drift { theta0: s0.theta, rate: s0.phi },
            Regime::Libration => {
                let m = ((e_big + w2) / (2.0 * w2)).clamp(0.0, 1.0);
                let k = m.sqrt();
                if k == 0.0 {
                    Branch::Fixed { big_theta: params.big_theta }
                } else {
                    // amplitude from both sn and cn, well conditioned at turning points
                    let am0 = ((0.5 * th0).sin() / k).atan2(big_dot / (2.0 * k * omega));
                    Branch::Libration { k, m, u0: incomplete_f(am0, m)?, offset }
                }
            }
            Regime::Rotation => {
                let m = (2.0 * w2 / (e_big + w2)).clamp(0.0, 1.0);
                let rate = big_dot.signum() * omega / m.sqrt();
                Branch::Rotation { m, rate, u0: incomplete_f(0.5 * params.big_theta, m)? }
            }
            Regime::Separatrix => {
                let half = 0.5 * th0;
                if big_dot == 0.0 || (half.cos()).abs() < 1e-300 {
                    Branch::Fixed { big_theta: params.big_theta }
                } else {
                    Branch::Separatrix { rate: big_dot.signum() * omega, u0: half.sin().atanh(), offset }
                }
            }
        };
        Ok(Self { params, energy, regime, omega, rho: params.rho, branch })
    }

    /// `(theta, theta')` at time `t` after the initial state.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let (big, big_dot) = match self.branch {
            Branch::Drift { theta0, rate } => return (theta0 + rate * t, rate),
            Branch::Fixed { big_theta } => (big_theta, 0.0),
            Branch::Libration { k, m, u0, offset } => {
                let j = jacobi(self.omega * t + u0, m).expect("parameter in range");
                (2.0 * (k * j.sn).clamp(-1.0, 1.0).asin() + offset, 2.0 * k * self.omega * j.cn)
            }
            Branch::Rotation { m, rate, u0 } => {
                let j = jacobi(rate * t + u0, m).expect("parameter in range");
                (2.0 * j.am, 2.0 * rate * j.dn)
            }
            Branch::Separatrix { rate, u0, offset } => {
                let v = rate * t + u0;
                (2.0 * gd(v) + offset, 2.0 * rate / v.cosh())
            }
        };
        (0.5 * (big - self.rho), 0.5 * big_dot)
    }

    /// Period of `Theta` for libration, or of `Theta mod 2 pi` for rotation.
    pub fn period(&self) -> Option<f64> {
        match self.branch {
            Branch::Libration { m, .. } => Some(4.0 * complete_k(m).ok()? / self.omega),
            Branch::Rotation { m, rate, .. } => Some(2.0 * complete_k(m).ok()? / rate.abs()),
            _ => None,
        }
    }
}

/// `(theta(t), theta'(t))` of the flat extremal through `s0`.
pub fn closed_form_flat(s0: &ExtremalState, t: f64) -> Result<(f64, f64)> {
    Ok(FlatPendulum::new(s0)?.eval(t))
}
