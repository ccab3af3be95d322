//! Minimal SVG line/marker plots for diagnostic output.

use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesStyle {
    Line,
    Markers,
    LineAndMarkers,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub style: SeriesStyle,
    pub color: String,
}

impl Series {
    pub fn new(
        name: impl Into<String>,
        points: Vec<(f64, f64)>,
        style: SeriesStyle,
        color: &str,
    ) -> Self {
        Self {
            name: name.into(),
            points,
            style,
            color: color.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Range { lo: 0.0, hi: 1.0 };
        }
        if hi - lo < 1e-12 * hi.abs().max(1.0) {
            let pad = 0.5 * hi.abs().max(1.0);
            return Range {
                lo: lo - pad,
                hi: hi + pad,
            };
        }
        Range { lo, hi }
    }

    fn ticks(&self, count: usize) -> Vec<f64> {
        (0..=count)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / count as f64)
            .collect()
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
        }
    }

    pub fn with_series(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    /// Renders the plot into a `width × height` SVG panel placed at
    /// `(ox, oy)`. Used directly for multi-panel figures.
    pub fn render_panel(&self, out: &mut String, ox: f64, oy: f64, width: f64, height: f64) {
        let (ml, mr, mt, mb) = (70.0, 20.0, 36.0, 50.0);
        let (pw, ph) = (width - ml - mr, height - mt - mb);
        let xr = Range::of(
            self.series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.0)),
        );
        let mut yr = Range::of(
            self.series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.1)),
        );
        yr.lo = yr.lo.min(0.0);
        let sx = |x: f64| ox + ml + (x - xr.lo) / (xr.hi - xr.lo) * pw;
        let sy = |y: f64| oy + mt + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph;

        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="black"/>"#,
            ox + ml,
            oy + mt
        );
        for t in xr.ticks(5) {
            let x = sx(t);
            let _ = writeln!(
                out,
                r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
                oy + mt + ph,
                oy + mt + ph + 5.0,
                oy + mt + ph + 18.0,
                fmt_tick(t)
            );
        }
        for t in yr.ticks(5) {
            let y = sy(t);
            let _ = writeln!(
                out,
                r#"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{}</text>"#,
                ox + ml - 5.0,
                ox + ml,
                ox + ml - 8.0,
                y + 4.0,
                fmt_tick(t)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">{}</text>"#,
            ox + ml + pw / 2.0,
            oy + 22.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{}</text>"#,
            ox + ml + pw / 2.0,
            oy + height - 10.0,
            escape(&self.x_label)
        );
        let (lx, ly) = (ox + 16.0, oy + mt + ph / 2.0);
        let _ = writeln!(
            out,
            r#"<text x="{lx:.1}" y="{ly:.1}" font-size="12" text-anchor="middle" transform="rotate(-90 {lx:.1} {ly:.1})">{}</text>"#,
            escape(&self.y_label)
        );

        for (k, s) in self.series.iter().enumerate() {
            if matches!(s.style, SeriesStyle::Line | SeriesStyle::LineAndMarkers)
                && !s.points.is_empty()
            {
                let pts: Vec<String> = s
                    .points
                    .iter()
                    .filter(|p| p.0.is_finite() && p.1.is_finite())
                    .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                    .collect();
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                    s.color,
                    pts.join(" ")
                );
            }
            if matches!(s.style, SeriesStyle::Markers | SeriesStyle::LineAndMarkers) {
                for &(x, y) in s
                    .points
                    .iter()
                    .filter(|p| p.0.is_finite() && p.1.is_finite())
                {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#,
                        sx(x),
                        sy(y),
                        s.color
                    );
                }
            }
            let ly = oy + mt + 14.0 + 16.0 * k as f64;
            let lx = ox + ml + pw - 130.0;
            let _ = writeln!(
                out,
                r#"<rect x="{lx:.1}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{ly:.1}" font-size="11">{}</text>"#,
                ly - 9.0,
                s.color,
                lx + 14.0,
                escape(&s.name)
            );
        }
    }

    pub fn to_svg(&self, width: f64, height: f64) -> String {
        render_panels(std::slice::from_ref(self), width, height)
    }
}

/// Lays panels out side by side in one SVG document.
pub fn render_panels(panels: &[Plot], panel_width: f64, height: f64) -> String {
    let total = panel_width * panels.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total:.0}" height="{height:.0}" viewBox="0 0 {total:.0} {height:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        p.render_panel(&mut out, panel_width * i as f64, 0.0, panel_width, height);
    }
    out.push_str("</svg>\n");
    out
}
