//! Minimal SVG figures: planar curve plots with equal aspect and simple line charts.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::flow::{LevelSetStats, PerimeterFit};
use crate::wulff::BoundaryPolyline;
use crate::Vec2;

const SIZE: f64 = 640.0;
const PAD: f64 = 48.0;

/// Stroke style of one series.
#[derive(Clone, Debug)]
pub struct Style {
    pub stroke: String,
    pub width: f64,
    pub dash: Option<String>,
}

impl Style {
    pub fn solid(stroke: &str, width: f64) -> Self {
        Self { stroke: stroke.to_string(), width, dash: None }
    }

    pub fn dashed(stroke: &str, width: f64) -> Self {
        Self { stroke: stroke.to_string(), width, dash: Some("6 4".to_string()) }
    }
}

/// A figure in world coordinates mapped onto a fixed pixel canvas.
pub struct Figure {
    lo: Vec2,
    hi: Vec2,
    scale: Vec2,
    body: String,
    title: String,
}

impl Figure {
    /// Canvas covering `[lo, hi]`; with `equal_aspect` both axes share one scale.
    pub fn new(lo: Vec2, hi: Vec2, equal_aspect: bool, title: &str) -> Self {
        let span = Vec2::new((hi.x - lo.x).max(1e-12), (hi.y - lo.y).max(1e-12));
        let avail = SIZE - 2.0 * PAD;
        let scale = if equal_aspect {
            let s = avail / span.x.max(span.y);
            Vec2::new(s, s)
        } else {
            Vec2::new(avail / span.x, avail / span.y)
        };
        Self { lo, hi, scale, body: String::new(), title: title.to_string() }
    }

    /// Equal-aspect figure around a set of points with 5% margin.
    pub fn around(points: impl IntoIterator<Item = Vec2>, title: &str) -> Self {
        let (mut lo, mut hi) = (Vec2::repeat(f64::INFINITY), Vec2::repeat(f64::NEG_INFINITY));
        for p in points {
            lo = lo.inf(&p);
            hi = hi.sup(&p);
        }
        if !lo.x.is_finite() {
            (lo, hi) = (Vec2::repeat(-1.0), Vec2::repeat(1.0));
        }
        let m = 0.05 * (hi - lo).max();
        Self::new(lo - Vec2::repeat(m), hi + Vec2::repeat(m), true, title)
    }

    fn px(&self, p: Vec2) -> (f64, f64) {
        (PAD + (p.x - self.lo.x) * self.scale.x, SIZE - PAD - (p.y - self.lo.y) * self.scale.y)
    }

    pub fn polyline(&mut self, points: &[Vec2], closed: bool, style: &Style) {
        if points.is_empty() {
            return;
        }
        let mut d = String::new();
        for (i, p) in points.iter().enumerate() {
            let (x, y) = self.px(*p);
            let _ = write!(d, "{}{x:.2},{y:.2}", if i == 0 { "M" } else { " L" });
        }
        if closed {
            d.push_str(" Z");
        }
        let dash = style.dash.as_ref().map(|a| format!(" stroke-dasharray=\"{a}\"")).unwrap_or_default();
        let _ = writeln!(
            self.body,
            "<path d=\"{d}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"{dash}/>",
            style.stroke, style.width
        );
    }

    pub fn curve(&mut self, c: &BoundaryPolyline, style: &Style) {
        self.polyline(c.vertices(), true, style);
    }

    pub fn markers(&mut self, points: &[Vec2], radius: f64, fill: &str) {
        for p in points {
            let (x, y) = self.px(*p);
            let _ = writeln!(self.body, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{radius}\" fill=\"{fill}\"/>");
        }
    }

    pub fn label(&mut self, at: Vec2, text: &str) {
        let (x, y) = self.px(at);
        let _ = writeln!(self.body, "<text x=\"{x:.2}\" y=\"{y:.2}\" font-size=\"12\">{}</text>", escape(text));
    }

    /// Frame with min/max tick labels on both axes.
    pub fn axes(&mut self, x_label: &str, y_label: &str) {
        let (x0, y0) = self.px(self.lo);
        let (x1, y1) = self.px(self.hi);
        let _ = writeln!(
            self.body,
            "<rect x=\"{x0:.2}\" y=\"{y1:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#888\"/>",
            x1 - x0,
            y0 - y1
        );
        let t = |v: f64| format!("{v:.3}");
        let _ = writeln!(self.body, "<text x=\"{x0:.2}\" y=\"{:.2}\" font-size=\"11\">{}</text>", y0 + 16.0, t(self.lo.x));
        let _ = writeln!(self.body, "<text x=\"{x1:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>", y0 + 16.0, t(self.hi.x));
        let _ = writeln!(self.body, "<text x=\"{:.2}\" y=\"{y0:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>", x0 - 4.0, t(self.lo.y));
        let _ = writeln!(self.body, "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>", x0 - 4.0, y1 + 10.0, t(self.hi.y));
        let _ = writeln!(self.body, "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{}</text>", 0.5 * (x0 + x1), y0 + 32.0, escape(x_label));
        let _ = writeln!(
            self.body,
            "<text x=\"14\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.2})\">{}</text>",
            0.5 * (y0 + y1),
            0.5 * (y0 + y1),
            escape(y_label)
        );
    }

    pub fn render(&self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
             <text x=\"{}\" y=\"24\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n{}</svg>\n",
            SIZE / 2.0,
            escape(&self.title),
            self.body
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Color ramp from blue (first) to red (last).
pub fn ramp(i: usize, n: usize) -> String {
    let s = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
    format!("rgb({},{},{})", (40.0 + 200.0 * s) as u8, 60, (230.0 - 190.0 * s) as u8)
}

/// Level curves colored by level, the domain in black and optional dashed comparators.
pub fn level_figure(title: &str, domain: Option<&BoundaryPolyline>, levels: &[LevelSetStats], comparators: &[BoundaryPolyline]) -> Figure {
    let pts = levels.iter().flat_map(|s| s.curves.iter().flat_map(|c| c.vertices().iter().copied())).chain(domain.into_iter().flat_map(|d| d.vertices().iter().copied()));
    let mut fig = Figure::around(pts.collect::<Vec<_>>(), title);
    for (i, s) in levels.iter().enumerate() {
        let style = Style::solid(&ramp(i, levels.len()), 1.0);
        for c in &s.curves {
            fig.curve(c, &style);
        }
    }
    for c in comparators {
        fig.curve(c, &Style::dashed("#2a2", 1.0));
    }
    if let Some(d) = domain {
        fig.curve(d, &Style::solid("black", 2.0));
    }
    fig
}

/// `log |∂E_t|_F` against `t` with the unit-slope fit line.
pub fn perimeter_figure(levels: &[LevelSetStats], fit: &PerimeterFit) -> Figure {
    let pts: Vec<Vec2> = levels.iter().map(|s| Vec2::new(s.t, s.perimeter_f.ln())).collect();
    let (t0, t1) = (pts.first().map_or(0.0, |p| p.x), pts.last().map_or(1.0, |p| p.x));
    let c = fit.hull_perimeter.ln();
    let line = [Vec2::new(t0, t0 + c), Vec2::new(t1, t1 + c)];
    let (mut lo, mut hi) = (Vec2::new(t0, f64::INFINITY), Vec2::new(t1, f64::NEG_INFINITY));
    for p in pts.iter().chain(&line) {
        lo.y = lo.y.min(p.y);
        hi.y = hi.y.max(p.y);
    }
    let mut fig = Figure::new(lo, hi, false, &format!("log perimeter, fitted slope {:.4}", fit.slope));
    fig.axes("t", "log |dE_t|_F");
    fig.polyline(&line, false, &Style::dashed("#c33", 1.5));
    let trusted: Vec<Vec2> = levels.iter().zip(&pts).filter(|(s, _)| s.trusted).map(|(_, p)| *p).collect();
    let other: Vec<Vec2> = levels.iter().zip(&pts).filter(|(s, _)| !s.trusted).map(|(_, p)| *p).collect();
    fig.markers(&trusted, 3.0, "#227");
    fig.markers(&other, 3.0, "#aaa");
    fig
}
