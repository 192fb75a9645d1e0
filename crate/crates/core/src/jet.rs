//! Finite-difference jets of plane curves on a seven-point stencil.

/// Offsets, in units of `h`, of the samples fed to [`central_jet`].
pub const STENCIL: [f64; 7] = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];

/// First three derivatives of a plane curve at the stencil center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneJet {
    pub d1: [f64; 2],
    pub d2: [f64; 2],
    pub d3: [f64; 2],
}

impl PlaneJet {
    /// `det(d2, d3)`.
    pub fn delta(&self) -> f64 {
        det(self.d2, self.d3)
    }
}

pub fn det(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

/// Fourth-order central differences from samples at `STENCIL[i] * h`.
pub fn central_jet(p: &[[f64; 2]; 7], h: f64) -> PlaneJet {
    let comp = |i: usize| {
        let f = |j: usize| p[j][i];
        let d1 = (f(1) - 8.0 * f(2) + 8.0 * f(4) - f(5)) / (12.0 * h);
        let d2 = (-f(1) + 16.0 * f(2) - 30.0 * f(3) + 16.0 * f(4) - f(5)) / (12.0 * h * h);
        let d3 = (f(0) - 8.0 * f(1) + 13.0 * f(2) - 13.0 * f(4) + 8.0 * f(5) - f(6)) / (8.0 * h * h * h);
        (d1, d2, d3)
    };
    let (a, b) = (comp(0), comp(1));
    PlaneJet { d1: [a.0, b.0], d2: [a.1, b.1], d3: [a.2, b.2] }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_cusp() {
        let h = 0.01;
        let p = STENCIL.map(|o| {
            let t = o * h;
            [0.5 * t * t, t * t * t / 3.0]
        });
        let j = central_jet(&p, h);
        assert!(norm(j.d1) < 1e-12);
        assert!((j.delta() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn smooth_curve() {
        let h = 0.01;
        let t0 = 0.4_f64;
        let p = STENCIL.map(|o| {
            let t = t0 + o * h;
            [t.sin(), t.exp()]
        });
        let j = central_jet(&p, h);
        assert!((j.d1[0] - t0.cos()).abs() < 1e-9);
        assert!((j.d2[0] + t0.sin()).abs() < 1e-8);
        assert!((j.d3[1] - t0.exp()).abs() < 1e-6);
    }
}
