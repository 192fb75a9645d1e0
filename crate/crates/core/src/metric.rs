//! Riemannian surface metrics in a single rectangular chart.
//!
//! A [`MetricChart`] carries the coefficients `g11, g12, g22` as callables,
//! optionally with their analytic first partials. Charts without partials fall
//! back to central differences, and every tolerance built on top of them relaxes
//! from `1e-12` to `1e-6`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Tolerance used for analytic charts.
pub const ANALYTIC_TOL: f64 = 1e-12;
/// Tolerance used for charts whose partials come from finite differences.
pub const FD_TOL: f64 = 1e-6;

/// Closed rectangle `[x1_min, x1_max] x [x2_min, x2_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x1: (f64, f64),
    pub x2: (f64, f64),
}

impl Domain {
    pub fn new(x1: (f64, f64), x2: (f64, f64)) -> Self {
        Self { x1, x2 }
    }

    pub fn contains(&self, x1: f64, x2: f64) -> bool {
        x1 >= self.x1.0 && x1 <= self.x1.1 && x2 >= self.x2.0 && x2 <= self.x2.1
    }
}

/// The three metric coefficients at a point (or their partials in one direction).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricCoeffs {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
}

impl MetricCoeffs {
    pub fn det(&self) -> f64 {
        self.g11 * self.g22 - self.g12 * self.g12
    }

    /// `g(u, v)` for coordinate vectors.
    pub fn inner(&self, u: [f64; 2], v: [f64; 2]) -> f64 {
        self.g11 * u[0] * v[0] + self.g12 * (u[0] * v[1] + u[1] * v[0]) + self.g22 * u[1] * v[1]
    }

    fn as_matrix(&self) -> [[f64; 2]; 2] {
        [[self.g11, self.g12], [self.g12, self.g22]]
    }
}

pub type MetricFn = dyn Fn(f64, f64) -> MetricCoeffs + Send + Sync;
/// Returns `[d/dx1, d/dx2]` of the coefficients.
pub type MetricPartialsFn = dyn Fn(f64, f64) -> [MetricCoeffs; 2] + Send + Sync;

/// Which builtin geometry a chart represents, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Flat,
    Sphere,
    Hyperbolic,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Flat => "flat",
            Builtin::Sphere => "sphere",
            Builtin::Hyperbolic => "hyperbolic",
        }
    }
}

/// A surface metric `g11 dx1^2 + 2 g12 dx1 dx2 + g22 dx2^2` on a rectangle.
#[derive(Clone)]
pub struct MetricChart {
    name: String,
    builtin: Option<Builtin>,
    domain: Domain,
    metric: Arc<MetricFn>,
    partials: Option<Arc<MetricPartialsFn>>,
    geodesic_parallel: bool,
}

impl fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricChart")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("analytic_partials", &self.partials.is_some())
            .field("geodesic_parallel", &self.geodesic_parallel)
            .finish()
    }
}

/// Metric of the form `dx1^2 + G(x1) dx2^2` with analytic `G` and `G'`.
fn parallel_chart(builtin: Builtin, domain: Domain, g22: fn(f64) -> f64, dg22: fn(f64) -> f64) -> MetricChart {
    MetricChart {
        name: builtin.name().to_string(),
        builtin: Some(builtin),
        domain,
        metric: Arc::new(move |x1, _| MetricCoeffs { g11: 1.0, g12: 0.0, g22: g22(x1) }),
        partials: Some(Arc::new(move |x1, _| [MetricCoeffs { g11: 0.0, g12: 0.0, g22: dg22(x1) }, MetricCoeffs::default()])),
        geodesic_parallel: true,
    }
}

impl MetricChart {
    /// Euclidean plane.
    pub fn flat() -> Self {
        parallel_chart(Builtin::Flat, Domain::new((-1e6, 1e6), (-1e6, 1e6)), |_| 1.0, |_| 0.0)
    }

    /// Unit sphere, `dx1^2 + cos^2(x1) dx2^2`, kept 0.1 away from the poles.
    pub fn sphere() -> Self {
        let lat = std::f64::consts::FRAC_PI_2 - 0.1;
        parallel_chart(
            Builtin::Sphere,
            Domain::new((-lat, lat), (-std::f64::consts::PI, std::f64::consts::PI)),
            |x1| x1.cos().powi(2),
            |x1| -2.0 * x1.cos() * x1.sin(),
        )
    }

    /// Hyperbolic plane of curvature -1, `dx1^2 + cosh^2(x1) dx2^2`.
    pub fn hyperbolic() -> Self {
        parallel_chart(Builtin::Hyperbolic, Domain::new((-3.0, 3.0), (-3.0, 3.0)), |x1| x1.cosh().powi(2), |x1| 2.0 * x1.cosh() * x1.sinh())
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "flat" => Ok(Self::flat()),
            "sphere" => Ok(Self::sphere()),
            "hyperbolic" => Ok(Self::hyperbolic()),
            other => Err(Error::UnknownMetric(other.to_string())),
        }
    }

    /// Chart from callables. `partials` may be `None`, in which case central
    /// differences are used.
    pub fn from_fns(
        name: impl Into<String>,
        domain: Domain,
        metric: Arc<MetricFn>,
        partials: Option<Arc<MetricPartialsFn>>,
        geodesic_parallel: bool,
    ) -> Self {
        Self { name: name.into(), builtin: None, domain, metric, partials, geodesic_parallel }
    }

    /// Chart from expression strings in the variables `x1`, `x2`.
    pub fn from_expressions(g11: &str, g12: &str, g22: &str, domain: Domain, geodesic_parallel: bool) -> Result<Self> {
        let parse =
            |src: &str| -> Result<Expr> { Expr::parse(src).map_err(|e| Error::Expression { expr: src.into(), reason: e.to_string() }) };
        let (f11, f12, f22) = (parse(g11)?, parse(g12)?, parse(g22)?);
        let metric: Arc<MetricFn> =
            Arc::new(move |x1, x2| MetricCoeffs { g11: f11.eval(x1, x2), g12: f12.eval(x1, x2), g22: f22.eval(x1, x2) });
        Ok(Self::from_fns(format!("g11={g11}; g12={g12}; g22={g22}"), domain, metric, None, geodesic_parallel))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn builtin_kind(&self) -> Option<Builtin> {
        self.builtin
    }

    pub fn is_flat(&self) -> bool {
        self.builtin == Some(Builtin::Flat)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn claims_geodesic_parallel(&self) -> bool {
        self.geodesic_parallel
    }

    pub fn has_analytic_partials(&self) -> bool {
        self.partials.is_some()
    }

    /// `1e-12` for analytic charts, `1e-6` otherwise.
    pub fn tolerance(&self) -> f64 {
        if self.has_analytic_partials() {
            ANALYTIC_TOL
        } else {
            FD_TOL
        }
    }

    pub fn contains(&self, x1: f64, x2: f64) -> bool {
        self.domain.contains(x1, x2)
    }

    /// Coefficients without domain or definiteness checks.
    pub fn coeffs(&self, x1: f64, x2: f64) -> MetricCoeffs {
        (self.metric)(x1, x2)
    }

    /// Coefficients at a point, checked for domain membership and positive definiteness.
    pub fn metric_at(&self, x1: f64, x2: f64) -> Result<MetricCoeffs> {
        if !self.contains(x1, x2) {
            return Err(Error::OutsideDomain { x1, x2 });
        }
        let g = self.coeffs(x1, x2);
        let det = g.det();
        if !(g.g11 > 0.0 && det > 0.0) {
            return Err(Error::DegenerateMetric { x1, x2, det });
        }
        Ok(g)
    }

    /// First partials `[d/dx1, d/dx2]` without checks.
    pub fn partials(&self, x1: f64, x2: f64) -> [MetricCoeffs; 2] {
        match &self.partials {
            Some(p) => p(x1, x2),
            None => fd_partials(|a, b| self.coeffs(a, b), x1, x2),
        }
    }
}

/// Central-difference step `cbrt(eps) * max(1, |x|)`.
pub(crate) fn fd_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

fn fd_partials(g: impl Fn(f64, f64) -> MetricCoeffs, x1: f64, x2: f64) -> [MetricCoeffs; 2] {
    let diff = |a: MetricCoeffs, b: MetricCoeffs, h: f64| MetricCoeffs {
        g11: (a.g11 - b.g11) / (2.0 * h),
        g12: (a.g12 - b.g12) / (2.0 * h),
        g22: (a.g22 - b.g22) / (2.0 * h),
    };
    let h1 = fd_step(x1);
    let h2 = fd_step(x2);
    [diff(g(x1 + h1, x2), g(x1 - h1, x2), h1), diff(g(x1, x2 + h2), g(x1, x2 - h2), h2)]
}

/// Christoffel symbols of the second kind, indexed `[k][i][j]` (0-based) for
/// `Gamma^k_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Christoffel(pub [[[f64; 2]; 2]; 2]);

impl Christoffel {
    /// `Gamma^k_ij` with 1-based indices as they appear in formulas.
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.0[k - 1][i - 1][j - 1]
    }

    /// `Gamma^k(u, v) = Gamma^k_ij u^i v^j`.
    pub fn contract(&self, u: [f64; 2], v: [f64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (k, o) in out.iter_mut().enumerate() {
            for (row, ui) in self.0[k].iter().zip(u) {
                for (g, vj) in row.iter().zip(v) {
                    *o += g * ui * vj;
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// `Gamma^k_ij = 1/2 g^{kl} (d_j g_li + d_i g_lj - d_l g_ij)`.
pub fn christoffel(chart: &MetricChart, x1: f64, x2: f64) -> Result<Christoffel> {
    let g = chart.metric_at(x1, x2)?;
    Ok(christoffel_from(g, chart.partials(x1, x2)))
}

pub(crate) fn christoffel_from(g: MetricCoeffs, dg: [MetricCoeffs; 2]) -> Christoffel {
    let det = g.det();
    let inv = [[g.g22 / det, -g.g12 / det], [-g.g12 / det, g.g11 / det]];
    let d: [[[f64; 2]; 2]; 2] = [dg[0].as_matrix(), dg[1].as_matrix()]; // d[l][i][j] = d_l g_ij
    let mut out = [[[0.0; 2]; 2]; 2];
    for (k, row) in out.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                row[i][j] = (0..2).map(|l| 0.5 * inv[k][l] * (d[j][l][i] + d[i][l][j] - d[l][i][j])).sum();
            }
        }
    }
    Christoffel(out)
}

/// Frame coefficients `k, l, m, n` at a point, with first partials.
///
/// `v1 = k d1 + l d2`, `v2 = m d1 + n d2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameValue {
    pub k: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    /// `d[i] = [dk, dl, dm, dn]` with respect to `x_{i+1}`.
    pub d: [[f64; 4]; 2],
}

impl FrameValue {
    /// Orientation `kn - lm`.
    pub fn orientation(&self) -> f64 {
        self.k * self.n - self.l * self.m
    }

    pub fn v1(&self) -> [f64; 2] {
        [self.k, self.l]
    }

    pub fn v2(&self) -> [f64; 2] {
        [self.m, self.n]
    }

    /// Coordinate components of the unit vector `cos(theta) v1 + sin(theta) v2`.
    pub fn unit(&self, theta: f64) -> [f64; 2] {
        let (s, c) = theta.sin_cos();
        [self.k * c + self.m * s, self.l * c + self.n * s]
    }
}

/// Gram-Schmidt orthonormal frame of a chart.
#[derive(Debug, Clone)]
pub struct OrthonormalFrame {
    chart: MetricChart,
}

/// Builds the frame `k = 1/sqrt(g11)`, `l = 0`, `m = -g12/(sqrt(g11) sqrt(det))`,
/// `n = sqrt(g11)/sqrt(det)`.
pub fn frame_from_metric(chart: &MetricChart) -> OrthonormalFrame {
    OrthonormalFrame { chart: chart.clone() }
}

impl OrthonormalFrame {
    pub fn chart(&self) -> &MetricChart {
        &self.chart
    }

    /// Frame at a point, with domain and definiteness checks.
    pub fn at(&self, x1: f64, x2: f64) -> Result<FrameValue> {
        let g = self.chart.metric_at(x1, x2)?;
        Ok(frame_value(g, self.chart.partials(x1, x2)))
    }

    /// Frame at a point without checks; used inside integrators where stage
    /// points may leave the domain slightly.
    pub fn at_unchecked(&self, x1: f64, x2: f64) -> FrameValue {
        frame_value(self.chart.coeffs(x1, x2), self.chart.partials(x1, x2))
    }
}

fn frame_value(g: MetricCoeffs, dg: [MetricCoeffs; 2]) -> FrameValue {
    let s = g.g11.sqrt();
    let det = g.det();
    let q = det.sqrt();
    let k = 1.0 / s;
    let m = -g.g12 / (s * q);
    let n = s / q;
    let mut d = [[0.0; 4]; 2];
    for (i, di) in d.iter_mut().enumerate() {
        let dg = dg[i];
        let ds = dg.g11 / (2.0 * s);
        let ddet = dg.g11 * g.g22 + g.g11 * dg.g22 - 2.0 * g.g12 * dg.g12;
        let dq = ddet / (2.0 * q);
        let dk = -ds / (s * s);
        let dm = -dg.g12 / (s * q) + g.g12 * (ds * q + s * dq) / (s * q).powi(2);
        let dn = ds / q - s * dq / (q * q);
        *di = [dk, 0.0, dm, dn];
    }
    FrameValue { k, l: 0.0, m, n, d }
}

/// Maximum violations of the geodesic-parallel conditions over a sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelReport {
    /// `max |g11 - 1|` over the grid.
    pub g11: f64,
    /// `max |g12|` over the grid.
    pub g12: f64,
    /// `max |g22(0, x2) - 1|`.
    pub g22_axis: f64,
    /// `max |d g22/dx1 (0, x2)|`.
    pub dg22_axis: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl ParallelReport {
    pub fn max_violation(&self) -> f64 {
        self.g11.max(self.g12).max(self.g22_axis).max(self.dg22_axis)
    }
}

/// Checks the four geodesic-parallel conditions on a `grid x grid` lattice of
/// the domain (and `grid` points along the axis `x1 = 0`).
pub fn validate_geodesic_parallel(chart: &MetricChart, grid: usize) -> ParallelReport {
    let grid = grid.max(2);
    let dom = chart.domain();
    let lerp = |(a, b): (f64, f64), i: usize| a + (b - a) * i as f64 / (grid - 1) as f64;
    let (mut v11, mut v12, mut v22, mut vd22) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..grid {
        for j in 0..grid {
            let g = chart.coeffs(lerp(dom.x1, i), lerp(dom.x2, j));
            v11 = v11.max((g.g11 - 1.0).abs());
            v12 = v12.max(g.g12.abs());
        }
    }
    if dom.x1.0 <= 0.0 && dom.x1.1 >= 0.0 {
        for j in 0..grid {
            let x2 = lerp(dom.x2, j);
            v22 = v22.max((chart.coeffs(0.0, x2).g22 - 1.0).abs());
            vd22 = vd22.max(chart.partials(0.0, x2)[0].g22.abs());
        }
    } else {
        v22 = f64::INFINITY;
        vd22 = f64::INFINITY;
    }
    let tolerance = chart.tolerance();
    let passed = [v11, v12, v22, vd22].iter().all(|v| *v <= tolerance);
    ParallelReport { g11: v11, g12: v12, g22_axis: v22, dg22_axis: vd22, tolerance, passed }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_christoffel(chart: &MetricChart, x1: f64, x2: f64) -> Christoffel {
        let h = 1e-5;
        let g = chart.coeffs(x1, x2);
        let d = |f: &dyn Fn(MetricCoeffs) -> f64| {
            [
                (f(chart.coeffs(x1 + h, x2)) - f(chart.coeffs(x1 - h, x2))) / (2.0 * h),
                (f(chart.coeffs(x1, x2 + h)) - f(chart.coeffs(x1, x2 - h))) / (2.0 * h),
            ]
        };
        let d11 = d(&|c| c.g11);
        let d12 = d(&|c| c.g12);
        let d22 = d(&|c| c.g22);
        christoffel_from(
            g,
            [MetricCoeffs { g11: d11[0], g12: d12[0], g22: d22[0] }, MetricCoeffs { g11: d11[1], g12: d12[1], g22: d22[1] }],
        )
    }

    #[test]
    fn flat_christoffels_vanish() {
        let c = christoffel(&MetricChart::flat(), 3.0, -7.0).unwrap();
        assert_eq!(c.max_abs(), 0.0);
    }

    #[test]
    fn sphere_christoffels() {
        let chart = MetricChart::sphere();
        assert!(christoffel(&chart, 0.0, 0.0).unwrap().max_abs() < 1e-12);
        let c = christoffel(&chart, 0.3, 0.1).unwrap();
        assert!((c.get(2, 1, 2) + 0.3_f64.tan()).abs() < 1e-14);
        assert!((c.get(2, 2, 1) + 0.3_f64.tan()).abs() < 1e-14);
        assert!((c.get(1, 2, 2) - 0.3_f64.cos() * 0.3_f64.sin()).abs() < 1e-14);
        let fd = fd_christoffel(&chart, 0.3, 0.1);
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    assert!((fd.0[k][i][j] - c.0[k][i][j]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn christoffel_errors() {
        let chart = MetricChart::sphere();
        assert!(matches!(christoffel(&chart, 2.0, 0.0), Err(Error::OutsideDomain { .. })));
        let bad = MetricChart::from_expressions("1", "1", "1", Domain::new((-1.0, 1.0), (-1.0, 1.0)), false).unwrap();
        assert!(matches!(christoffel(&bad, 0.0, 0.0), Err(Error::DegenerateMetric { .. })));
    }

    #[test]
    fn frames_of_builtins() {
        let flat = frame_from_metric(&MetricChart::flat()).at(1.0, 2.0).unwrap();
        assert_eq!((flat.k, flat.l, flat.m, flat.n), (1.0, 0.0, 0.0, 1.0));
        assert!(flat.d.iter().flatten().all(|v| *v == 0.0));

        let hyp = frame_from_metric(&MetricChart::hyperbolic());
        let f = hyp.at(0.7, 0.2).unwrap();
        assert!((f.n - 1.0 / 0.7_f64.cosh()).abs() < 1e-15);
        let h = 1e-6;
        let fd = (hyp.at(0.7 + h, 0.2).unwrap().n - hyp.at(0.7 - h, 0.2).unwrap().n) / (2.0 * h);
        assert!((f.d[0][3] - fd).abs() < 1e-8);
        assert_eq!(hyp.at(0.0, 1.0).unwrap().d[0][3], 0.0);

        let sph = frame_from_metric(&MetricChart::sphere()).at(0.0, 0.0).unwrap();
        assert!(sph.d.iter().flatten().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn general_frame_is_orthonormal() {
        let chart =
            MetricChart::from_expressions("2 + sin(x1)", "0.3*x2", "1 + x1^2", Domain::new((-1.0, 1.0), (-1.0, 1.0)), false).unwrap();
        let frame = frame_from_metric(&chart);
        for &(x1, x2) in &[(0.1, 0.2), (-0.5, 0.9), (0.8, -0.7)] {
            let f = frame.at(x1, x2).unwrap();
            let g = chart.metric_at(x1, x2).unwrap();
            assert!((g.inner(f.v1(), f.v1()) - 1.0).abs() < 1e-12);
            assert!((g.inner(f.v2(), f.v2()) - 1.0).abs() < 1e-12);
            assert!(g.inner(f.v1(), f.v2()).abs() < 1e-12);
            assert!(f.orientation() > 0.0);
            // chain-rule partials against differences of the frame itself
            let h = 1e-5;
            let a = frame.at(x1 + h, x2).unwrap();
            let b = frame.at(x1 - h, x2).unwrap();
            assert!((f.d[0][2] - (a.m - b.m) / (2.0 * h)).abs() < 1e-6);
            assert!((f.d[0][3] - (a.n - b.n) / (2.0 * h)).abs() < 1e-6);
        }
    }

    #[test]
    fn parallel_validation() {
        assert_eq!(validate_geodesic_parallel(&MetricChart::flat(), 11).max_violation(), 0.0);
        let s = validate_geodesic_parallel(&MetricChart::sphere(), 21);
        assert!(s.passed, "{s:?}");
        let h = validate_geodesic_parallel(&MetricChart::hyperbolic(), 21);
        assert!(h.passed, "{h:?}");

        let bad = MetricChart::from_expressions("1", "0", "1 + x1", Domain::new((-0.5, 0.5), (-1.0, 1.0)), true).unwrap();
        let r = validate_geodesic_parallel(&bad, 11);
        assert!(!r.passed);
        assert!((r.dg22_axis - 1.0).abs() < 1e-6);
        assert_eq!(r.tolerance, FD_TOL);
    }

    #[test]
    fn bad_expression_is_reported() {
        let r = MetricChart::from_expressions("1 +", "0", "1", Domain::new((0.0, 1.0), (0.0, 1.0)), false);
        assert!(matches!(r, Err(Error::Expression { .. })));
        let r = MetricChart::from_expressions("y", "0", "1", Domain::new((0.0, 1.0), (0.0, 1.0)), false);
        assert!(matches!(r, Err(Error::Expression { .. })));
    }
}
