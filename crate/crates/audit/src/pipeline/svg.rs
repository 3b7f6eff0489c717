//! Minimal deterministic SVG bar charts. Coordinates are printed with fixed
//! precision so identical inputs produce identical bytes.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 40.0;
const MARGIN_TOP: f64 = 30.0;

pub fn bar_chart(title: &str, labels: &[&str], values: &[f64]) -> String {
    let plot_w = WIDTH - MARGIN_LEFT - 10.0;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let max = values.iter().cloned().fold(0.0f64, f64::max).max(1e-12);
    let n = values.len().max(1) as f64;
    let slot = plot_w / n;
    let bar_w = slot * 0.7;

    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" viewBox=\"0 0 {WIDTH:.0} {HEIGHT:.0}\">"
    )
    .unwrap();
    writeln!(
        out,
        "  <text x=\"{:.1}\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        escape(title)
    )
    .unwrap();
    // axes
    writeln!(
        out,
        "  <line x1=\"{MARGIN_LEFT:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h
    )
    .unwrap();
    writeln!(
        out,
        "  <line x1=\"{MARGIN_LEFT:.1}\" y1=\"{MARGIN_TOP:.1}\" x2=\"{MARGIN_LEFT:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
        MARGIN_TOP + plot_h
    )
    .unwrap();

    for (i, (&v, &label)) in values.iter().zip(labels).enumerate() {
        let h = (v / max) * plot_h;
        let x = MARGIN_LEFT + slot * i as f64 + (slot - bar_w) / 2.0;
        let y = MARGIN_TOP + plot_h - h;
        writeln!(
            out,
            "  <rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{bar_w:.2}\" height=\"{h:.2}\" fill=\"#4878a8\"/>"
        )
        .unwrap();
        writeln!(
            out,
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{}</text>",
            x + bar_w / 2.0,
            MARGIN_TOP + plot_h + 14.0,
            escape(label)
        )
        .unwrap();
        writeln!(
            out,
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"middle\">{:.4}</text>",
            x + bar_w / 2.0,
            (y - 3.0).max(MARGIN_TOP),
            v
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
