//! Static SVG pages: the presentation grid and the comparison chart page.

use std::f64::consts::PI;
use std::fmt::Write as _;

use limbscope_core::{default_catalog, MuscleGroup, MuscleId, ProportionSummary, Side};

use crate::engine::{ChartPayload, ComparisonPayload};
use crate::session::PresentationDoc;

const GROUP_COLORS: [(MuscleGroup, [&str; 2]); 4] = [
    (MuscleGroup::Pushing, ["#a6cee3", "#1f78b4"]),
    (MuscleGroup::Forearm, ["#b2df8a", "#33a02c"]),
    (MuscleGroup::Back, ["#fb9a99", "#e31a1c"]),
    (MuscleGroup::Finger, ["#ffe066", "#e6ab02"]),
];

const UNKNOWN_COLOR: &str = "#999999";

/// Fixed color of a muscle: its group's hue, light or dark depending on the muscle.
pub fn color_of(muscle: &MuscleId) -> &'static str {
    let shades = GROUP_COLORS.iter().find(|(g, _)| *g == muscle.group).map(|(_, s)| s).expect("every group has colors");
    let shade = default_catalog()
        .iter()
        .filter(|m| m.group == muscle.group)
        .position(|m| m.name == muscle.name)
        .unwrap_or_else(|| muscle.name.bytes().fold(0usize, |acc, b| acc + b as usize) % 2);
    shades[shade.min(1)]
}

/// Color for a bare muscle name; names outside the default catalog are grey.
pub fn color_of_name(name: &str) -> &'static str {
    default_catalog().iter().find(|m| m.name == name).map(color_of).unwrap_or(UNKNOWN_COLOR)
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn open_svg(out: &mut String, width: f64, height: f64) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="Helvetica, Arial, sans-serif">"#
    )
    .unwrap();
    writeln!(out, r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#).unwrap();
}

/// Donut of a proportion summary centered at (cx, cy) with a label per muscle.
fn donut(out: &mut String, summary: &ProportionSummary, cx: f64, cy: f64, r: f64) {
    let width = r * 0.45;
    let circumference = 2.0 * PI * r;
    writeln!(out, r#"<g class="donut">"#).unwrap();
    if summary.shares.is_empty() {
        writeln!(
            out,
            r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="none" stroke="#dddddd" stroke-width="{width:.2}"/>"##
        )
        .unwrap();
    }
    let mut offset = 0.0;
    for (name, share) in &summary.shares {
        let len = share * circumference;
        writeln!(
            out,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="none" stroke="{}" stroke-width="{width:.2}" stroke-dasharray="{len:.3} {:.3}" stroke-dashoffset="{:.3}" transform="rotate(-90 {cx:.2} {cy:.2})"><title>{} {:.1}%</title></circle>"#,
            color_of_name(name),
            circumference - len,
            -offset,
            escape(name),
            share * 100.0
        )
        .unwrap();
        offset += len;
    }
    let lx = cx + r + width + 12.0;
    let mut ly = cy - r;
    for (name, pct) in summary.percentages() {
        writeln!(
            out,
            r#"<rect x="{lx:.2}" y="{:.2}" width="10" height="10" fill="{}"/><text x="{:.2}" y="{:.2}" font-size="11">{} {pct:.1}%</text>"#,
            ly,
            color_of_name(name),
            lx + 14.0,
            ly + 9.0,
            escape(name)
        )
        .unwrap();
        ly += 14.0;
    }
    writeln!(out, "</g>").unwrap();
}

/// One self-contained SVG page: titles, the labeled grid, a donut with percentages per
/// cell and the cell annotations.
pub fn presentation_svg(doc: &PresentationDoc) -> String {
    const COL_W: f64 = 330.0;
    const ROW_H: f64 = 230.0;
    const LABEL_W: f64 = 130.0;
    const TOP: f64 = 110.0;
    let width = (LABEL_W + COL_W * doc.columns.len() as f64 + 40.0).max(600.0);
    let height = TOP + ROW_H * doc.rows.len() as f64 + 40.0;
    let mut out = String::new();
    open_svg(&mut out, width, height);
    writeln!(
        out,
        r#"<text class="title" x="20" y="40" font-size="24" font-weight="bold">{}</text>"#,
        escape(&doc.title)
    )
    .unwrap();
    if !doc.subtitle.is_empty() {
        writeln!(
            out,
            r##"<text class="subtitle" x="20" y="66" font-size="15" fill="#555555">{}</text>"##,
            escape(&doc.subtitle)
        )
        .unwrap();
    }
    for (j, column) in doc.columns.iter().enumerate() {
        let x = LABEL_W + COL_W * j as f64;
        writeln!(
            out,
            r#"<text class="column-label" x="{:.2}" y="{:.2}" font-size="16" font-weight="bold" text-anchor="middle">{}</text>"#,
            x + COL_W / 2.0,
            TOP - 14.0,
            escape(column)
        )
        .unwrap();
    }
    for (i, row) in doc.rows.iter().enumerate() {
        let y = TOP + ROW_H * i as f64;
        writeln!(out, r##"<line x1="20" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#cccccc"/>"##, width - 20.0)
            .unwrap();
        writeln!(
            out,
            r#"<text class="row-label" x="20" y="{:.2}" font-size="15" font-weight="bold">{}</text>"#,
            y + ROW_H / 2.0,
            escape(row)
        )
        .unwrap();
        for (j, column) in doc.columns.iter().enumerate() {
            let Some(cell) = doc.cell(row, column) else { continue };
            let x = LABEL_W + COL_W * j as f64;
            writeln!(out, r#"<g class="cell" data-row="{}" data-column="{}">"#, escape(row), escape(column)).unwrap();
            writeln!(
                out,
                r##"<text x="{:.2}" y="{:.2}" font-size="11" fill="#555555">{} side, {:.2} to {:.2} s</text>"##,
                x + 10.0,
                y + 20.0,
                cell.snapshot.side,
                cell.snapshot.interval.t0,
                cell.snapshot.interval.t1
            )
            .unwrap();
            donut(&mut out, &cell.snapshot, x + 75.0, y + 100.0, 48.0);
            if !cell.annotation.is_empty() {
                writeln!(
                    out,
                    r#"<text class="annotation" x="{:.2}" y="{:.2}" font-size="12" font-style="italic">{}</text>"#,
                    x + 10.0,
                    y + ROW_H - 24.0,
                    escape(&cell.annotation)
                )
                .unwrap();
            }
            writeln!(out, "</g>").unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    t0: f64,
    t1: f64,
    vmax: f64,
}

fn chart(out: &mut String, c: &ChartPayload, color: &str, f: Frame) {
    let Frame { x0, y0, w, h, t0, t1, vmax } = f;
    let span = (t1 - t0).max(f64::MIN_POSITIVE);
    let vmax = if vmax > 0.0 { vmax } else { 1.0 };
    let px = |t: f64| x0 + (t - t0) / span * w;
    let py = |v: f64| y0 + h - v / vmax * h;
    writeln!(out, r##"<rect x="{x0:.2}" y="{y0:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="#eeeeee"/>"##)
        .unwrap();
    if c.times.is_empty() {
        return;
    }
    let mut area = format!("M{:.2},{:.2}", px(c.times[0]), py(0.0));
    for (t, v) in c.times.iter().zip(&c.highlighted) {
        write!(area, " L{:.2},{:.2}", px(*t), py(*v)).unwrap();
    }
    write!(area, " L{:.2},{:.2} Z", px(*c.times.last().unwrap()), py(0.0)).unwrap();
    writeln!(out, r#"<path class="highlighted" d="{area}" fill="{color}" fill-opacity="0.75" stroke="none"/>"#)
        .unwrap();
    let mut line = String::new();
    for (t, v) in c.times.iter().zip(&c.base) {
        write!(line, "{:.2},{:.2} ", px(*t), py(*v)).unwrap();
    }
    writeln!(
        out,
        r#"<polyline class="base" points="{}" fill="none" stroke="{color}" stroke-width="1"/>"#,
        line.trim_end()
    )
    .unwrap();
}

/// Chart page for a comparison: one row per muscle, affected on the left and
/// unaffected on the right. The base envelope is an unfilled stroke and the highlighted
/// series a filled area; collapsed rows are faded.
pub fn comparison_svg(p: &ComparisonPayload) -> String {
    const LABEL_W: f64 = 90.0;
    const CHART_W: f64 = 420.0;
    const ROW_H: f64 = 70.0;
    const GAP: f64 = 20.0;
    const TOP: f64 = 80.0;
    let width = LABEL_W + 2.0 * CHART_W + 3.0 * GAP;
    let height = TOP + ROW_H * p.muscles.len() as f64 + 30.0;
    let mut out = String::new();
    open_svg(&mut out, width, height);
    writeln!(
        out,
        r#"<text class="title" x="20" y="30" font-size="18" font-weight="bold">{} / {}  tau = {:.2}</text>"#,
        escape(&p.patient_id),
        escape(&p.motion_type),
        p.tau
    )
    .unwrap();
    for (k, side) in Side::BOTH.iter().enumerate() {
        let x = LABEL_W + GAP + k as f64 * (CHART_W + GAP);
        writeln!(out, r#"<text x="{:.2}" y="60" font-size="14" text-anchor="middle">{side}</text>"#, x + CHART_W / 2.0)
            .unwrap();
    }
    for (i, m) in p.muscles.iter().enumerate() {
        let y = TOP + ROW_H * i as f64;
        let faded = if m.collapsed || m.muted { r#" opacity="0.25""# } else { "" };
        writeln!(
            out,
            r#"<g class="muscle" data-muscle="{}" data-collapsed="{}"{faded}>"#,
            escape(&m.muscle),
            m.collapsed
        )
        .unwrap();
        let mut label = m.muscle.clone();
        if m.muted {
            label.push_str(" (muted)");
        }
        writeln!(
            out,
            r#"<rect x="10" y="{:.2}" width="10" height="10" fill="{}"/><text x="24" y="{:.2}" font-size="12">{}</text>"#,
            y + ROW_H / 2.0 - 9.0,
            m.color,
            y + ROW_H / 2.0,
            escape(&label)
        )
        .unwrap();
        let vmax = m.affected.base.iter().chain(&m.unaffected.base).fold(0.0f64, |a, &b| a.max(b));
        for (k, side) in Side::BOTH.iter().enumerate() {
            let c = if *side == Side::Affected { &m.affected } else { &m.unaffected };
            let r = p.retained.get(*side);
            let x = LABEL_W + GAP + k as f64 * (CHART_W + GAP);
            chart(
                &mut out,
                c,
                &m.color,
                Frame { x0: x, y0: y + 4.0, w: CHART_W, h: ROW_H - 8.0, t0: r.t0, t1: r.t1, vmax },
            );
        }
        writeln!(out, "</g>").unwrap();
    }
    out.push_str("</svg>\n");
    out
}
