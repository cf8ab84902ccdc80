//! Gantt chart of a multi-level trace.
//!
//! One group of rows per reduction level, real processors at the bottom
//! and the highest level on top. Labels are task ids on level zero and
//! node ids above.

use std::fmt::Write as _;

use crate::trace::ScheduleTrace;

const ROW: f64 = 22.0;
const GAP: f64 = 18.0;
const LEFT: f64 = 70.0;
const WIDTH: f64 = 720.0;

fn color(key: u32) -> String {
    let hue = (key as u64 * 137) % 360;
    format!("hsl({hue},55%,70%)")
}

pub fn render_svg(trace: &ScheduleTrace) -> String {
    let levels = trace.levels().max(1) as usize;
    let rows: Vec<u32> =
        (0..levels).map(|l| trace.level_processors.get(l).copied().unwrap_or(trace.processors)).collect();
    let horizon = trace.horizon.to_f64().max(f64::MIN_POSITIVE);
    let scale = WIDTH / horizon;
    let total_rows: u32 = rows.iter().sum();
    let height = total_rows as f64 * ROW + levels as f64 * GAP + 30.0;

    // top of each level group, highest level first
    let mut top = vec![0.0; levels];
    let mut y = 10.0;
    for l in (0..levels).rev() {
        top[l] = y;
        y += rows[l] as f64 * ROW + GAP;
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{height}" font-family="monospace" font-size="10">"#,
        LEFT + WIDTH + 10.0
    );
    for l in 0..levels {
        let _ = writeln!(out, r#"<g class="level" data-level="{l}">"#);
        for p in 0..rows[l] {
            let ry = top[l] + p as f64 * ROW;
            let _ = writeln!(out, r#"<text x="4" y="{}">L{l} P{p}</text>"#, ry + ROW * 0.65);
            let _ = writeln!(
                out,
                r##"<line x1="{LEFT}" y1="{0}" x2="{1}" y2="{0}" stroke="#999"/>"##,
                ry + ROW,
                LEFT + WIDTH
            );
        }
        for iv in trace.level(l as u32) {
            let x = LEFT + iv.start.to_f64() * scale;
            let w = (iv.end.to_f64() - iv.start.to_f64()) * scale;
            let ry = top[l] + iv.proc as f64 * ROW + 2.0;
            let (key, label) = match iv.task {
                Some(t) => (t.0, format!("{}", t.0)),
                None => (iv.node.0 + 1000, format!("s{}", iv.node.0)),
            };
            let _ = writeln!(
                out,
                r##"<rect x="{x:.3}" y="{ry:.3}" width="{w:.3}" height="{}" fill="{}" stroke="#333"><title>{label} [{}, {})</title></rect>"##,
                ROW - 4.0,
                color(key),
                iv.start,
                iv.end
            );
            if w > 14.0 {
                let _ = writeln!(out, r#"<text x="{:.3}" y="{:.3}">{label}</text>"#, x + 2.0, ry + ROW * 0.55);
            }
        }
        let _ = writeln!(out, "</g>");
    }
    let axis = y - GAP + 12.0;
    let step = (horizon / 12.0).ceil().max(1.0);
    let mut t = 0.0;
    while t <= horizon + 1e-9 {
        let _ = writeln!(out, r#"<text x="{:.3}" y="{axis}">{t}</text>"#, LEFT + t * scale);
        t += step;
    }
    out.push_str("</svg>\n");
    out
}
