//! Deterministic SVG rendering of projected fronts.

use std::fmt::Write;

use crate::extremal::Trajectory;
use crate::legendre::project_pi;
use crate::singularity::{NormalFormClass, Projection, SingularEvent};

pub struct Panel {
    pub title: String,
    pub points: Vec<[f64; 2]>,
    /// Marked points with an optional tick direction.
    pub marks: Vec<([f64; 2], Option<[f64; 2]>)>,
}

fn bbox(points: &[[f64; 2]]) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        b = (b.0.min(p[0]), b.1.min(p[1]), b.2.max(p[0]), b.3.max(p[1]));
    }
    if !b.0.is_finite() {
        return (-1.0, -1.0, 1.0, 1.0);
    }
    b
}

fn panel_svg(out: &mut String, panel: &Panel, x_off: f64, size: f64) {
    let (x0, y0, x1, y1) = bbox(&panel.points);
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let pad = 0.08 * span;
    let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let half = 0.5 * span + pad;
    // y is flipped so that x2 points up
    let map = |p: [f64; 2]| [(p[0] - cx + half) / (2.0 * half) * size + x_off, (cy - p[1] + half) / (2.0 * half) * size];
    let _ = writeln!(out, r##"<rect x="{x_off:.3}" y="0" width="{size:.3}" height="{size:.3}" fill="#fff" stroke="#ccc"/>"##);
    let _ = writeln!(
        out,
        r##"<text x="{:.3}" y="16" font-family="sans-serif" font-size="12" fill="#444">{}</text>"##,
        x_off + 8.0,
        panel.title
    );
    if !panel.points.is_empty() {
        let mut d = String::new();
        for (i, p) in panel.points.iter().enumerate() {
            let q = map(*p);
            let _ = write!(d, "{}{:.3},{:.3}", if i == 0 { "M" } else { " L" }, q[0], q[1]);
        }
        let _ = writeln!(out, r##"<path d="{d}" fill="none" stroke="#1f4e8c" stroke-width="1.2"/>"##);
    }
    let tick = 0.04 * size;
    for (p, dir) in &panel.marks {
        let q = map(*p);
        if let Some(v) = dir {
            let n = v[0].hypot(v[1]);
            if n > 0.0 {
                let (tx, ty) = (q[0] + tick * v[0] / n, q[1] - tick * v[1] / n);
                let _ = writeln!(
                    out,
                    r##"<line x1="{:.3}" y1="{:.3}" x2="{tx:.3}" y2="{ty:.3}" stroke="#b03a2e" stroke-width="1"/>"##,
                    q[0], q[1]
                );
            }
        }
        let _ = writeln!(out, r##"<circle cx="{:.3}" cy="{:.3}" r="2.5" fill="#b03a2e"/>"##, q[0], q[1]);
    }
}

pub fn render(panels: &[Panel], size: f64) -> String {
    let width = size * panels.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{size:.0}" viewBox="0 0 {width:.3} {size:.3}">"#
    );
    for (i, p) in panels.iter().enumerate() {
        panel_svg(&mut out, p, i as f64 * size, size);
    }
    out.push_str("</svg>\n");
    out
}

/// The `pi` front with cusps marked and ticked along the left normal of the
/// contact element.
pub fn front_panel(traj: &Trajectory, events: &[SingularEvent], per_step: usize) -> Panel {
    let points = traj.sample_times(per_step).into_iter().map(|t| project_pi(&traj.eval(t).expect("sample inside window"))).collect();
    let frame = traj.frame();
    let marks = events
        .iter()
        .filter(|e| e.projection == Projection::Pi && e.clazz == NormalFormClass::IV)
        .map(|e| {
            let left = frame.at_unchecked(e.state.x1, e.state.x2).unit(e.state.theta + std::f64::consts::FRAC_PI_2);
            (project_pi(&e.state), Some(left))
        })
        .collect();
    Panel { title: format!("front in {}", frame.chart().name()), points, marks }
}
