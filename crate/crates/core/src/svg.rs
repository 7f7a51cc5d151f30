//! Static SVG snapshots of crack sets.

use std::fmt::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::geometry::{CrackSet, DomainBox};

const PALETTE: [&str; 8] = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Clone, Debug, Default)]
pub struct SvgOptions {
    pub title: Option<String>,
    /// Omit the generation-time comment so output is byte-reproducible.
    pub reproducible: bool,
    pub width_px: Option<f64>,
}

/// Renders the domain outline and one stroke color per crack component.
pub fn crack_svg(k: &CrackSet, domain: &DomainBox, opts: &SvgOptions) -> String {
    let [x0, y0, x1, y1] = domain.bounding_box();
    let (w, h) = (x1 - x0, y1 - y0);
    let width = opts.width_px.unwrap_or(600.0);
    let scale = width / w;
    let height = h * scale;
    let pad = 10.0;
    let tx = |x: f64| pad + (x - x0) * scale;
    let ty = |y: f64| pad + (y1 - y) * scale;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.1}" height="{:.1}">"#,
        width + 2.0 * pad,
        height + 2.0 * pad
    );
    if !opts.reproducible {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let _ = writeln!(out, "<!-- generated at unix time {secs} -->");
    }
    if let Some(title) = &opts.title {
        let _ = writeln!(out, "<title>{}</title>", escape(title));
    }
    let outline: Vec<String> = domain
        .boundary()
        .iter()
        .map(|p| format!("{:.3},{:.3}", tx(p.x), ty(p.y)))
        .collect();
    let _ = writeln!(
        out,
        r##"<polygon points="{}" fill="#f7f7f7" stroke="black" stroke-width="1"/>"##,
        outline.join(" ")
    );
    for (s, label) in k.segments().iter().zip(k.component_labels()) {
        let _ = writeln!(
            out,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{}" stroke-width="3" stroke-linecap="round"/>"#,
            tx(s.a.x),
            ty(s.a.y),
            tx(s.b.x),
            ty(s.b.y),
            PALETTE[label % PALETTE.len()]
        );
    }
    for (p, label) in k.points().iter().zip(k.point_labels()) {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.3}" cy="{:.3}" r="3" fill="{}"/>"#,
            tx(p.x),
            ty(p.y),
            PALETTE[label % PALETTE.len()]
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
