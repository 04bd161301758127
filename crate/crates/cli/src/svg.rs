//! Plain SVG rendering of a sweep report, one panel per wind direction.

use std::fmt::Write;

use vesselpower_core::harness::{SweepColumn, SweepReport, SweepRow};
use vesselpower_core::model::PreparedData;

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 280.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 32.0;
const MARGIN_B: f64 = 40.0;

const SERIES: [(SweepColumn, &str, &str, &str); 3] = [
    (SweepColumn::Baseline, "baseline", "#444444", "6 4"),
    (SweepColumn::Pure, "pure", "#d95f02", "none"),
    (SweepColumn::Hybrid, "hybrid", "#1b9e77", "none"),
];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    left: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        self.left + MARGIN_L + (v - self.x0) / (self.x1 - self.x0) * (PANEL_W - MARGIN_L - MARGIN_R)
    }

    fn y(&self, p: f64) -> f64 {
        MARGIN_T + (self.y1 - p) / (self.y1 - self.y0) * (PANEL_H - MARGIN_T - MARGIN_B)
    }
}

fn groups(rows: &[SweepRow]) -> Vec<&[SweepRow]> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let d = rows[start].direction_deg;
        let len = rows[start..].iter().take_while(|r| r.direction_deg == d).count();
        out.push(&rows[start..start + len]);
        start += len;
    }
    out
}

/// Nearest training samples as circles and nearest test samples as
/// squares, at their measured speed and power.
pub fn render_sweep(report: &SweepReport, data: &PreparedData) -> String {
    let panels = groups(&report.rows);
    let sample = |i: usize| (data.features[i].speed, data.power[i]);

    let mut x0 = f64::INFINITY;
    let mut x1 = f64::NEG_INFINITY;
    let mut y0 = f64::INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    for r in &report.rows {
        x0 = x0.min(r.speed_kn);
        x1 = x1.max(r.speed_kn);
        for (col, ..) in SERIES {
            y0 = y0.min(r.get(col));
            y1 = y1.max(r.get(col));
        }
        for i in [r.nearest_train_index, r.nearest_test_index] {
            let (_, p) = sample(i);
            y0 = y0.min(p);
            y1 = y1.max(p);
        }
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);

    let width = PANEL_W * panels.len().max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{PANEL_H:.0}" viewBox="0 0 {width:.0} {PANEL_H:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, rows) in panels.iter().enumerate() {
        let f = Frame {
            x0,
            x1,
            y0,
            y1,
            left: k as f64 * PANEL_W,
        };
        let (ax, ay) = (f.x(x0), f.y(y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="18" text-anchor="middle">wind {:.0}° at {} kn, draft {} m</text>"#,
            f.left + PANEL_W / 2.0,
            rows[0].direction_deg,
            report.wind_speed_kn,
            report.draft_m
        );
        let _ = writeln!(
            s,
            r#"<path d="M{ax:.2},{:.2} L{ax:.2},{ay:.2} L{:.2},{ay:.2}" fill="none" stroke="black"/>"#,
            f.y(y1),
            f.x(x1)
        );
        for t in 0..=4 {
            let p = y0 + (y1 - y0) * t as f64 / 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.0}</text>"#,
                ax - 4.0,
                f.y(p) + 4.0,
                p
            );
        }
        let mut v = x0.ceil();
        while v <= x1 {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{v:.0}</text>"#,
                f.x(v),
                ay + 14.0
            );
            v += 1.0;
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">speed [kn]</text>"#,
            f.x((x0 + x1) / 2.0),
            PANEL_H - 8.0
        );

        for r in rows.iter() {
            let (v, p) = sample(r.nearest_train_index);
            let _ = writeln!(
                s,
                r##"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="#7570b3" fill-opacity="0.5"/>"##,
                f.x(v),
                f.y(p)
            );
            let (v, p) = sample(r.nearest_test_index);
            let _ = writeln!(
                s,
                r##"<rect x="{:.2}" y="{:.2}" width="4" height="4" fill="#e7298a" fill-opacity="0.5"/>"##,
                f.x(v) - 2.0,
                f.y(p) - 2.0
            );
        }
        for (col, _, color, dash) in SERIES {
            let mut d = String::new();
            for (i, r) in rows.iter().enumerate() {
                let _ = write!(
                    d,
                    "{}{:.2},{:.2}",
                    if i == 0 { "M" } else { " L" },
                    f.x(r.speed_kn),
                    f.y(r.get(col))
                );
            }
            let _ = writeln!(
                s,
                r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.6" stroke-dasharray="{dash}"/>"#
            );
        }
        for (j, (_, name, color, _)) in SERIES.iter().enumerate() {
            let ly = MARGIN_T + 4.0 + 14.0 * j as f64;
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{ly:.2}" fill="{color}">{name}</text>"#,
                ax + 8.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
