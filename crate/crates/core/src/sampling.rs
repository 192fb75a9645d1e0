//! Seeded random initial states for sweeps and the acceptance suite.

use std::f64::consts::PI;

use rand::Rng;

use crate::extremal::ExtremalState;
use crate::metric::{Builtin, Domain, MetricChart, OrthonormalFrame};
use crate::pendulum::reduce_flat;

/// Region of the chart the sampler draws base points from.
pub fn sample_region(chart: &MetricChart) -> Domain {
    match chart.builtin_kind() {
        Some(Builtin::Flat) => Domain::new((-1.0, 1.0), (-1.0, 1.0)),
        Some(Builtin::Sphere) => Domain::new((-0.5, 0.5), (-1.0, 1.0)),
        Some(Builtin::Hyperbolic) => Domain::new((-1.0, 1.0), (-1.0, 1.0)),
        None => {
            let d = chart.domain();
            let mid = |(a, b): (f64, f64)| {
                let (c, w) = (0.5 * (a + b), 0.25 * (b - a));
                (c - w, c + w)
            };
            Domain::new(mid(d.x1), mid(d.x2))
        }
    }
}

/// Uniform state with `p1, p2, phi` in `[-momentum, momentum]`.
pub fn random_state<R: Rng>(chart: &MetricChart, rng: &mut R, momentum: f64) -> ExtremalState {
    let d = sample_region(chart);
    ExtremalState::new(
        rng.random_range(d.x1.0..=d.x1.1),
        rng.random_range(d.x2.0..=d.x2.1),
        rng.random_range(-PI..=PI),
        rng.random_range(-momentum..=momentum),
        rng.random_range(-momentum..=momentum),
        rng.random_range(-momentum..=momentum),
    )
}

/// State with `phi = 0` and `B = 0`: the frame-contracted momentum points
/// along the unit vector of `theta`.
pub fn random_straight_state<R: Rng>(frame: &OrthonormalFrame, rng: &mut R, momentum: f64) -> ExtremalState {
    let d = sample_region(frame.chart());
    let (x1, x2) = (rng.random_range(d.x1.0..=d.x1.1), rng.random_range(d.x2.0..=d.x2.1));
    let theta = rng.random_range(-PI..=PI);
    let lambda = rng.random_range(0.1 * momentum..=momentum) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let fv = frame.at_unchecked(x1, x2);
    let (q1, q2) = (lambda * theta.cos(), lambda * theta.sin());
    // solve [[k, l], [m, n]] p = q
    let det = fv.orientation();
    let p1 = (fv.n * q1 - fv.l * q2) / det;
    let p2 = (fv.k * q2 - fv.m * q1) / det;
    ExtremalState::new(x1, x2, theta, p1, p2, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleRegime {
    Libration,
    Rotation,
    NearSeparatrix,
}

/// Flat state whose pendulum energy is `(r/2)(1 + gap)`.
pub fn flat_state_with_gap<R: Rng>(rng: &mut R, gap: f64) -> ExtremalState {
    let alpha = rng.random_range(-PI..=PI);
    let mag = rng.random_range(0.5..=1.5);
    let (p1, p2) = (mag * alpha.cos(), mag * alpha.sin());
    let rho = reduce_flat(&ExtremalState::new(0.0, 0.0, 0.0, p1, p2, 0.0)).rho;
    let r = 0.5 * mag * mag;
    // phi^2 = r (1 + gap + cos(Theta)) must be nonnegative
    let big = if gap < 0.0 {
        let reach = (-gap - 1.0).clamp(-1.0, 1.0).acos();
        rng.random_range(-reach..=reach)
    } else {
        rng.random_range(-PI..=PI)
    };
    let theta = 0.5 * (big - rho) + PI * rng.random_range(-1..=1) as f64;
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let phi = sign * (r * (1.0 + gap + big.cos())).max(0.0).sqrt();
    let x = (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
    ExtremalState::new(x.0, x.1, theta, p1, p2, phi)
}

/// Librating flat state, strictly below the separatrix.
pub fn librating_flat<R: Rng>(rng: &mut R) -> ExtremalState {
    let gap = -rng.random_range(0.05..=1.5);
    flat_state_with_gap(rng, gap)
}

/// `n` flat states cycling through libration, rotation and near-separatrix
/// energies (relative gap between `1e-3` and `1e-2`).
pub fn oracle_states<R: Rng>(rng: &mut R, n: usize) -> Vec<(OracleRegime, ExtremalState)> {
    (0..n)
        .map(|i| match i % 5 {
            0 | 1 => (OracleRegime::Libration, librating_flat(rng)),
            2 | 3 => {
                let gap = rng.random_range(0.05..=3.0);
                (OracleRegime::Rotation, flat_state_with_gap(rng, gap))
            }
            _ => {
                let mag = rng.random_range(1e-3..=1e-2);
                let gap = if rng.random_bool(0.5) { mag } else { -mag };
                (OracleRegime::NearSeparatrix, flat_state_with_gap(rng, gap))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::frame_from_metric;
    use crate::pendulum::{pendulum_energy, FlatPendulum, Regime};
    use crate::singularity::classify_pair;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn energies_land_where_asked() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for gap in [-1.5, -0.5, -1e-3, 1e-3, 2.0] {
            for _ in 0..50 {
                let s = flat_state_with_gap(&mut rng, gap);
                let p = reduce_flat(&s);
                let e = pendulum_energy(&s, &p);
                assert!((e - 0.5 * p.r * (1.0 + gap)).abs() < 1e-12, "{gap}");
            }
        }
        for (reg, s) in oracle_states(&mut rng, 50) {
            let fp = FlatPendulum::new(&s).unwrap();
            match reg {
                OracleRegime::Libration => assert_eq!(fp.regime, Regime::Libration),
                OracleRegime::Rotation => assert_eq!(fp.regime, Regime::Rotation),
                OracleRegime::NearSeparatrix => assert_ne!(fp.regime, Regime::Separatrix),
            }
        }
    }

    #[test]
    fn straight_slice() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let frame = frame_from_metric(&MetricChart::flat());
        for _ in 0..100 {
            let s = random_straight_state(&frame, &mut rng, 1.0);
            let pair = classify_pair(&frame, &s).unwrap();
            assert_eq!(pair.to_string(), "(III,II)");
        }
    }
}
