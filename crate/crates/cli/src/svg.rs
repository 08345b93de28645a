//! Scatter plot of the first two h-plot dimensions.
//!
//! To-profiles are set in bold, from-profiles in italics, and each occasion
//! has its own color.

use std::fmt::Write as _;

use triway_core::{Direction, ProfileMatrix};

pub const PALETTE_ENV: &str = "TRIWAY_COLOR_PALETTE";

pub const DEFAULT_PALETTE: [&str; 8] = [
    "black", "red", "blue", "#008000", "#ff8c00", "#800080", "#8b4513", "#008080",
];

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 70.0;
const BOTTOM: f64 = 60.0;

/// Colors from `TRIWAY_COLOR_PALETTE` (comma separated), or the default.
pub fn palette_from_env() -> anyhow::Result<Vec<String>> {
    match std::env::var(PALETTE_ENV) {
        Ok(value) => parse_palette(&value),
        Err(_) => Ok(DEFAULT_PALETTE.iter().map(|c| c.to_string()).collect()),
    }
}

pub fn parse_palette(value: &str) -> anyhow::Result<Vec<String>> {
    let colors: Vec<String> = value.split(',').map(|c| c.trim().to_string()).collect();
    if colors.iter().any(|c| c.is_empty() || !c.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '#')) {
        anyhow::bail!("{PALETTE_ENV} must be a comma-separated list of color names or #rrggbb values");
    }
    Ok(colors)
}

struct Axis {
    lo: f64,
    hi: f64,
    ticks: Vec<f64>,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() || hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            let c = if lo.is_finite() { lo } else { 0.0 };
            lo = c - 1.0;
            hi = c + 1.0;
        }
        let pad = 0.08 * (hi - lo);
        lo -= pad;
        hi += pad;
        let step = nice_step((hi - lo) / 5.0);
        let first = (lo / step).ceil() as i64;
        let last = (hi / step).floor() as i64;
        let ticks = (first..=last).map(|i| i as f64 * step).collect();
        Self { lo, hi, ticks }
    }

    fn map(&self, v: f64, from: f64, to: f64) -> f64 {
        from + (v - self.lo) / (self.hi - self.lo) * (to - from)
    }
}

fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let nice = if f < 1.5 {
        1.0
    } else if f < 3.5 {
        2.0
    } else if f < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Renders the embedding as a standalone SVG document.
pub fn render(profile: &ProfileMatrix, palette: &[String]) -> String {
    let coords = &profile.hplot.coordinates;
    let second = |row: usize| if profile.dims > 1 { coords[[row, 1]] } else { 0.0 };
    let xa = Axis::new(coords.column(0).iter().copied());
    let ya = Axis::new((0..coords.nrows()).map(second));
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="Helvetica, Arial, sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="28" font-size="16" text-anchor="middle">h-plot</text>"#,
        (x0 + x1) / 2.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="48" font-size="12" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        escape(&subtitle(profile))
    );

    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{y1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for &t in &xa.ticks {
        let x = xa.map(t, x0, x1);
        let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{:.1}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            y0 + 18.0,
            tick_label(t)
        );
    }
    for &t in &ya.ticks {
        let y = ya.map(t, y0, y1);
        let _ = writeln!(out, r#"<line x1="{:.1}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            y + 4.0,
            tick_label(t)
        );
    }
    if xa.lo < 0.0 && xa.hi > 0.0 {
        let x = xa.map(0.0, x0, x1);
        let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{y1}" stroke="#bbbbbb" stroke-dasharray="4 3"/>"##);
    }
    if ya.lo < 0.0 && ya.hi > 0.0 {
        let y = ya.map(0.0, y0, y1);
        let _ = writeln!(out, r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#bbbbbb" stroke-dasharray="4 3"/>"##);
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">Dimension 1</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.1}" font-size="13" text-anchor="middle" transform="rotate(-90 20 {:.1})">Dimension 2</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    for (row, tag) in profile.tags.iter().enumerate() {
        let x = xa.map(coords[[row, 0]], x0, x1);
        let y = ya.map(second(row), y0, y1);
        let color = &palette[tag.occasion.unwrap_or(0) % palette.len()];
        let style = match tag.direction {
            Direction::To => r#"font-weight="bold""#,
            Direction::From => r#"font-style="italic""#,
        };
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{color}"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="13" fill="{color}" {style}>{}</text>"#,
            x + 4.0,
            y - 4.0,
            escape(&profile.labels[tag.object])
        );
    }

    legend(&mut out, profile, palette, x1 + 20.0);
    out.push_str("</svg>\n");
    out
}

fn subtitle(profile: &ProfileMatrix) -> String {
    let g = &profile.hplot.gof_cumulative;
    let mut s = format!("GOF Dimension 1: {:.2}%", 100.0 * g[0]);
    if profile.dims > 1 {
        let _ = write!(s, ", Dimensions 1-2: {:.2}%", 100.0 * g[1]);
    }
    s
}

fn legend(out: &mut String, profile: &ProfileMatrix, palette: &[String], x: f64) {
    let mut y = TOP + 10.0;
    if !profile.case.is_conditional() && profile.occasions.len() > 1 {
        for (i, name) in profile.occasions.iter().enumerate() {
            let color = &palette[i % palette.len()];
            let _ = writeln!(out, r#"<rect x="{x:.1}" y="{:.1}" width="10" height="10" fill="{color}"/>"#, y - 9.0);
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{y:.1}" font-size="12">occasion {}</text>"#,
                x + 16.0,
                escape(name)
            );
            y += 18.0;
        }
        y += 8.0;
    }
    let _ = writeln!(out, r#"<text x="{x:.1}" y="{y:.1}" font-size="12" font-weight="bold">to (column)</text>"#);
    if profile.case.is_asymmetric() {
        let _ = writeln!(
            out,
            r#"<text x="{x:.1}" y="{:.1}" font-size="12" font-style="italic">from (row)</text>"#,
            y + 18.0
        );
    }
}
