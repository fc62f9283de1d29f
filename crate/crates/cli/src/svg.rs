//! Minimal static line charts of a trajectory.

use std::fmt::Write as _;

use gensync_core::sim::Trajectory;
use gensync_core::supervisor::{wrap_phase, SyncThresholds};

const WIDTH: f64 = 900.0;
const PANEL_H: f64 = 180.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const GAP: f64 = 40.0;

struct Panel<'a> {
    title: &'a str,
    values: Vec<f64>,
    /// Symmetric threshold drawn as dashed lines at `±band`.
    band: f64,
}

/// Three stacked panels: bus frequency deviation with the `±freq_band`
/// lines, speed error `e` with `±max_speed_error`, and the measured phase
/// error with `±max_phase_error`. Values are clipped to three times the
/// threshold so the interesting part stays readable; the connection time, if
/// any, is marked in every panel.
pub fn render(traj: &Trajectory, thresholds: &SyncThresholds, omega0: f64) -> String {
    let t: Vec<f64> = traj.records.iter().map(|r| r.t).collect();
    let panels = [
        Panel {
            title: "omega3 - omega0 [rad/s]",
            values: traj.records.iter().map(|r| r.omega3 - omega0).collect(),
            band: thresholds.freq_band,
        },
        Panel {
            title: "e = omega2 - omega3 [rad/s]",
            values: traj.records.iter().map(|r| r.e).collect(),
            band: thresholds.max_speed_error,
        },
        Panel {
            title: "measured phase error [rad]",
            values: traj.records.iter().map(|r| wrap_phase(r.theta2 - r.theta3 - r.d)).collect(),
            band: thresholds.max_phase_error,
        },
    ];
    let height = GAP + panels.len() as f64 * (PANEL_H + GAP);
    let t_end = t.last().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE);
    let sx = |x: f64| MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) * x / t_end;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        let top = GAP + i as f64 * (PANEL_H + GAP);
        let lim = 3.0 * p.band;
        let sy = |y: f64| top + PANEL_H * (1.0 - (y.clamp(-lim, lim) + lim) / (2.0 * lim));
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN_L}" y="{top}" width="{}" height="{PANEL_H}" fill="none" stroke="black"/>"#,
            WIDTH - MARGIN_L - MARGIN_R
        );
        let _ = writeln!(out, r#"<text x="{MARGIN_L}" y="{}">{}</text>"#, top - 6.0, p.title);
        for (y, label) in [(lim, format!("{lim:.3}")), (0.0, "0".to_string()), (-lim, format!("{:.3}", -lim))] {
            let _ = writeln!(out, r#"<text x="4" y="{:.2}">{label}</text>"#, sy(y) + 4.0);
        }
        for y in [p.band, -p.band] {
            let _ = writeln!(
                out,
                r##"<line x1="{MARGIN_L}" x2="{}" y1="{:.2}" y2="{:.2}" stroke="#c33" stroke-dasharray="5,4"/>"##,
                WIDTH - MARGIN_R,
                sy(y),
                sy(y)
            );
        }
        if let Some(tc) = traj.connection_time() {
            let _ = writeln!(
                out,
                r##"<line x1="{x:.2}" x2="{x:.2}" y1="{top}" y2="{}" stroke="#393" stroke-dasharray="2,3"/>"##,
                top + PANEL_H,
                x = sx(tc)
            );
        }
        let mut pts = String::with_capacity(16 * t.len());
        for (x, y) in t.iter().zip(&p.values) {
            let _ = write!(pts, "{:.2},{:.2} ", sx(*x), sy(*y));
        }
        let _ = writeln!(out, r##"<polyline fill="none" stroke="#236" stroke-width="1" points="{}"/>"##, pts.trim_end());
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">t [s], 0 .. {t_end}</text>"#,
        WIDTH - MARGIN_R,
        height - 8.0
    );
    out.push_str("</svg>\n");
    out
}
