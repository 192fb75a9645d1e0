//! Real Jacobi elliptic functions and the complete and incomplete integrals of
//! the first kind, all in terms of the parameter `m = k^2`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobi {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
    /// Continuous amplitude, `am(u + 2K) = am(u) + pi`.
    pub am: f64,
}

fn check_m(m: f64) -> Result<()> {
    if (0.0..=1.0).contains(&m) {
        Ok(())
    } else {
        Err(Error::EllipticParameter(m))
    }
}

/// Gudermannian `gd(u) = 2 atan(tanh(u / 2))`.
pub fn gd(u: f64) -> f64 {
    2.0 * (0.5 * u).tanh().atan()
}

/// Complete integral `K(m)` via the arithmetic-geometric mean. `K(1) = inf`.
pub fn complete_k(m: f64) -> Result<f64> {
    check_m(m)?;
    if m == 1.0 {
        return Ok(f64::INFINITY);
    }
    let (mut a, mut b) = (1.0_f64, (1.0 - m).sqrt());
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    Ok(PI / (a + b))
}

/// Carlson's symmetric integral `R_F(x, y, z)` by duplication.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    for _ in 0..100 {
        let mu = (x + y + z) / 3.0;
        let (dx, dy, dz) = (1.0 - x / mu, 1.0 - y / mu, 1.0 - z / mu);
        if dx.abs().max(dy.abs()).max(dz.abs()) < 1e-4 {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / mu.sqrt();
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
    }
    1.0 / ((x + y + z) / 3.0).sqrt()
}

/// Incomplete integral `F(phi | m)` for any real `phi`, odd in `phi`.
pub fn incomplete_f(phi: f64, m: f64) -> Result<f64> {
    check_m(m)?;
    if m == 1.0 {
        if phi.abs() >= FRAC_PI_2 {
            return Ok(phi.signum() * f64::INFINITY);
        }
        return Ok(phi.tan().asinh());
    }
    let n = (phi / PI).round();
    let r = phi - n * PI;
    let (s, c) = r.sin_cos();
    let base = s * carlson_rf(c * c, 1.0 - m * s * s, 1.0);
    let shift = if n == 0.0 { 0.0 } else { 2.0 * n * complete_k(m)? };
    Ok(base + shift)
}

fn jacobi_reduced(u: f64, m: f64) -> Jacobi {
    if m == 0.0 {
        return Jacobi { sn: u.sin(), cn: u.cos(), dn: 1.0, am: u };
    }
    // descending Landen transformation (arithmetic-geometric mean form)
    let mut a = [0.0_f64; 32];
    let mut c = [0.0_f64; 32];
    a[0] = 1.0;
    let mut b = (1.0 - m).sqrt();
    c[0] = m.sqrt();
    let mut n = 0;
    while c[n].abs() > 1e-16 * a[n] && n < 31 {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    Jacobi { sn, cn, dn: (1.0 - m * sn * sn).max(0.0).sqrt(), am: phi }
}

/// `sn, cn, dn, am` of real argument `u` and parameter `m` in `[0, 1]`.
pub fn jacobi(u: f64, m: f64) -> Result<Jacobi> {
    check_m(m)?;
    if m == 1.0 {
        let sech = 1.0 / u.cosh();
        return Ok(Jacobi { sn: u.tanh(), cn: sech, dn: sech, am: gd(u) });
    }
    if m == 0.0 {
        return Ok(jacobi_reduced(u, 0.0));
    }
    let half_period = 2.0 * complete_k(m)?;
    let n = (u / half_period).round();
    let mut j = jacobi_reduced(u - n * half_period, m);
    if n != 0.0 {
        if n.rem_euclid(2.0) == 1.0 {
            j.sn = -j.sn;
            j.cn = -j.cn;
        }
        j.am += n * PI;
    }
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `K(m)` by Gauss-Legendre quadrature of `1/sqrt(1 - m sin^2 t)`.
    fn k_quadrature(m: f64) -> f64 {
        let nodes = 400;
        let h = FRAC_PI_2 / nodes as f64;
        let g = [(-(3.0_f64 / 5.0).sqrt(), 5.0 / 9.0), (0.0, 8.0 / 9.0), ((3.0_f64 / 5.0).sqrt(), 5.0 / 9.0)];
        (0..nodes)
            .map(|i| {
                let mid = (i as f64 + 0.5) * h;
                g.iter()
                    .map(|(x, w)| {
                        let t = mid + 0.5 * h * x;
                        0.5 * h * w / (1.0 - m * t.sin().powi(2)).sqrt()
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    #[test]
    fn limits() {
        for u in [-3.0, -0.4, 0.0, 1.2, 7.5] {
            let j = jacobi(u, 0.0).unwrap();
            assert_eq!((j.sn, j.cn, j.dn, j.am), (u.sin(), u.cos(), 1.0, u));
            let j = jacobi(u, 1.0).unwrap();
            assert!((j.sn - u.tanh()).abs() < 1e-15);
            assert!((j.cn - 1.0 / u.cosh()).abs() < 1e-15 && j.cn == j.dn);
            assert!((j.am - (u.sinh()).atan()).abs() < 1e-15);
        }
        assert!(matches!(jacobi(0.3, 1.5), Err(Error::EllipticParameter(_))));
        assert!(matches!(jacobi(0.3, -0.1), Err(Error::EllipticParameter(_))));
    }

    #[test]
    fn quarter_period() {
        let k = complete_k(0.5).unwrap();
        assert!((k - 1.854_074_677_301_372).abs() < 1e-14);
        for m in [0.1, 0.5, 0.9] {
            assert!((complete_k(m).unwrap() - k_quadrature(m)).abs() < 1e-12);
        }
        let j = jacobi(k, 0.5).unwrap();
        assert!((j.sn - 1.0).abs() < 1e-12 && j.cn.abs() < 1e-12);
        assert!((j.am - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn identities() {
        for m in [0.0, 0.25, 0.5, 0.75, 0.99] {
            for i in 0..=200 {
                let u = -10.0 + 0.1 * i as f64;
                let j = jacobi(u, m).unwrap();
                assert!((j.sn * j.sn + j.cn * j.cn - 1.0).abs() < 1e-12);
                assert!((j.dn * j.dn + m * j.sn * j.sn - 1.0).abs() < 1e-12);
                assert!((j.am.sin() - j.sn).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn amplitude_is_continuous_and_inverts_f() {
        let m = 0.8;
        let mut prev = jacobi(-12.0, m).unwrap().am;
        for i in 1..=2400 {
            let u = -12.0 + 0.01 * i as f64;
            let j = jacobi(u, m).unwrap();
            assert!(j.am > prev && j.am - prev < 0.02, "{u}");
            prev = j.am;
            assert!((incomplete_f(j.am, m).unwrap() - u).abs() < 1e-12, "{u}");
        }
    }

    #[test]
    fn derivative_of_sn() {
        // d sn / du = cn dn
        let (m, h) = (0.6, 1e-5);
        for u in [-2.0, 0.3, 4.0] {
            let d = (jacobi(u + h, m).unwrap().sn - jacobi(u - h, m).unwrap().sn) / (2.0 * h);
            let j = jacobi(u, m).unwrap();
            assert!((d - j.cn * j.dn).abs() < 1e-9);
        }
    }

    #[test]
    fn incomplete_limits() {
        assert!((incomplete_f(FRAC_PI_2, 0.5).unwrap() - complete_k(0.5).unwrap()).abs() < 1e-14);
        assert!((incomplete_f(0.7, 0.0).unwrap() - 0.7).abs() < 1e-15);
        assert!((incomplete_f(0.7, 1.0).unwrap() - 0.7_f64.tan().asinh()).abs() < 1e-15);
        assert!((incomplete_f(-0.7, 0.3).unwrap() + incomplete_f(0.7, 0.3).unwrap()).abs() < 1e-15);
    }
}
