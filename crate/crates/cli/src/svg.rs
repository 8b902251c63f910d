//! Static SVG figures: layout, thermal map and Pareto overlay.

use std::collections::BTreeMap;
use std::fmt::Write;

use chiplet_place::analysis::MethodFront;
use chiplet_place::grid::PlacementState;
use chiplet_place::model::BenchmarkConfig;
use chiplet_place::thermal::ThermalField;

/// Drawing scale for layout and thermal figures.
pub const PX_PER_MM: f64 = 8.0;
const MARGIN: f64 = 20.0;

fn kind_color(i: usize) -> &'static str {
    const PALETTE: [&str; 8] = [
        "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f",
    ];
    PALETTE[i % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Placed chiplets drawn to scale, one labeled rectangle each.
pub fn layout_svg(config: &BenchmarkConfig, state: &PlacementState) -> String {
    let w = config.canvas_width * PX_PER_MM;
    let h = config.canvas_height * PX_PER_MM;
    let mut kinds: Vec<&str> = config.chiplets.iter().map(|c| c.kind.as_str()).collect();
    kinds.dedup();
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.1}" height="{:.1}" data-px-per-mm="{PX_PER_MM}">"#,
        w + 2.0 * MARGIN,
        h + 2.0 * MARGIN
    )
    .unwrap();
    writeln!(
        s,
        r##"<rect class="canvas" x="{MARGIN}" y="{MARGIN}" width="{w:.3}" height="{h:.3}" fill="#f7f7f7" stroke="#333"/>"##
    )
    .unwrap();
    for p in state.placed() {
        let c = &config.chiplets[p.chiplet];
        let (cw, ch) = c.oriented_dims(p.orientation);
        let x = MARGIN + p.footprint.origin.col as f64 * config.cell_width() * PX_PER_MM;
        let y = MARGIN + p.footprint.origin.row as f64 * config.cell_height() * PX_PER_MM;
        let (rw, rh) = (cw * PX_PER_MM, ch * PX_PER_MM);
        let color = kind_color(kinds.iter().position(|k| *k == c.kind).unwrap_or(0));
        writeln!(
            s,
            r##"<rect class="chiplet" data-id="{id}" x="{x:.3}" y="{y:.3}" width="{rw:.3}" height="{rh:.3}" fill="{color}" fill-opacity="0.8" stroke="#222"/>"##,
            id = escape(&c.id)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"#,
            x + rw / 2.0,
            y + rh / 2.0 + 3.0,
            escape(&c.id)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Blue-to-red ramp over `t` in [0, 1].
pub fn heat_color(t: f64) -> String {
    const STOPS: [(f64, [f64; 3]); 5] = [
        (0.0, [49.0, 54.0, 149.0]),
        (0.25, [69.0, 117.0, 180.0]),
        (0.5, [254.0, 224.0, 144.0]),
        (0.75, [244.0, 109.0, 67.0]),
        (1.0, [165.0, 0.0, 38.0]),
    ];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let k = STOPS.iter().position(|s| s.0 >= t).unwrap_or(STOPS.len() - 1).max(1);
    let (t0, c0) = STOPS[k - 1];
    let (t1, c1) = STOPS[k];
    let f = (t - t0) / (t1 - t0);
    let c: Vec<u8> = (0..3).map(|i| (c0[i] + f * (c1[i] - c0[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Colour-mapped temperature grid with a hotspot marker and scale bar.
pub fn thermal_svg(config: &BenchmarkConfig, field: &ThermalField) -> String {
    let n = field.grid_n;
    let cw = config.cell_width() * PX_PER_MM;
    let ch = config.cell_height() * PX_PER_MM;
    let w = n as f64 * cw;
    let h = n as f64 * ch;
    let lo = field.temps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = field.hotspot;
    let span = hi - lo;
    let norm = |t: f64| if span > 0.0 { (t - lo) / span } else { 0.0 };
    let bar_x = MARGIN + w + 20.0;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.1}" height="{:.1}" data-hotspot-c="{:.4}">"#,
        bar_x + 80.0,
        h + 2.0 * MARGIN + 20.0,
        field.hotspot
    )
    .unwrap();
    for r in 0..n {
        for c in 0..n {
            let t = field.temps[r * n + c];
            writeln!(
                s,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                MARGIN + c as f64 * cw,
                MARGIN + r as f64 * ch,
                cw + 0.05,
                ch + 0.05,
                heat_color(norm(t))
            )
            .unwrap();
        }
    }
    let hx = MARGIN + (field.hotspot_cell.col as f64 + 0.5) * cw;
    let hy = MARGIN + (field.hotspot_cell.row as f64 + 0.5) * ch;
    writeln!(
        s,
        r##"<circle class="hotspot" cx="{hx:.3}" cy="{hy:.3}" r="6" fill="none" stroke="#000" stroke-width="2"/>"##
    )
    .unwrap();
    writeln!(
        s,
        r#"<text class="hotspot-label" x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="12">hotspot {:.1} °C</text>"#,
        MARGIN,
        MARGIN + h + 16.0,
        field.hotspot
    )
    .unwrap();
    // Scale bar: 20 bands from bottom (min) to top (max).
    let bands = 20;
    for b in 0..bands {
        let t = (b as f64 + 0.5) / bands as f64;
        let y = MARGIN + h - (b + 1) as f64 * h / bands as f64;
        writeln!(
            s,
            r#"<rect class="scale" x="{bar_x:.3}" y="{y:.3}" width="16" height="{:.3}" fill="{}"/>"#,
            h / bands as f64 + 0.05,
            heat_color(t)
        )
        .unwrap();
    }
    for (frac, label) in [(0.0, lo), (0.5, lo + span / 2.0), (1.0, hi)] {
        writeln!(
            s,
            r#"<text class="scale-label" x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="11">{label:.1} °C</text>"#,
            bar_x + 20.0,
            MARGIN + h - frac * h + 4.0
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Scatter of every method's cloud with its front drawn as a staircase.
pub fn pareto_svg(methods: &BTreeMap<String, MethodFront>, title: &str) -> String {
    let (pw, ph) = (560.0, 400.0);
    let (left, top) = (70.0, 40.0);
    let all: Vec<(f64, f64)> = methods
        .values()
        .flat_map(|m| m.cloud.iter().map(|p| (p.wl_mm, p.temp_c)))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = all.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad = |lo: f64, hi: f64| {
        let d = if hi > lo { (hi - lo) * 0.05 } else { 1.0 };
        (lo - d, hi + d)
    };
    let (x0, x1) = pad(x0, x1);
    let (y0, y1) = pad(y0, y1);
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}">"#,
        left + pw + 170.0,
        top + ph + 60.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{left}" y="24" font-family="sans-serif" font-size="14">{}</text>"#,
        escape(title)
    )
    .unwrap();
    writeln!(
        s,
        r##"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    )
    .unwrap();
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="middle">{xv:.0}</text>"#,
            sx(xv),
            top + ph + 14.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="end">{yv:.1}</text>"#,
            left - 4.0,
            sy(yv) + 3.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">wirelength (mm)</text>"#,
        left + pw / 2.0,
        top + ph + 34.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{:.1}" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {:.1})" text-anchor="middle">hotspot (°C)</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    )
    .unwrap();

    for (i, (name, m)) in methods.iter().enumerate() {
        let color = kind_color(i);
        writeln!(s, r#"<g class="series" data-method="{}">"#, escape(name)).unwrap();
        for p in &m.cloud {
            writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{color}" fill-opacity="0.35"/>"#,
                sx(p.wl_mm),
                sy(p.temp_c)
            )
            .unwrap();
        }
        let mut path = String::new();
        for (k, p) in m.front.points.iter().enumerate() {
            if k > 0 {
                write!(path, " {:.2},{:.2}", sx(p.wl_mm), sy(m.front.points[k - 1].temp_c)).unwrap();
            }
            write!(path, " {:.2},{:.2}", sx(p.wl_mm), sy(p.temp_c)).unwrap();
        }
        writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path.trim()
        )
        .unwrap();
        for p in &m.front.points {
            writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"/>"#,
                sx(p.wl_mm),
                sy(p.temp_c)
            )
            .unwrap();
        }
        s.push_str("</g>\n");
        let ly = top + 10.0 + 18.0 * i as f64;
        writeln!(
            s,
            r#"<g class="legend"><rect x="{:.1}" y="{:.1}" width="12" height="12" fill="{color}"/><text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text></g>"#,
            left + pw + 16.0,
            ly,
            left + pw + 34.0,
            ly + 10.0,
            escape(name)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
