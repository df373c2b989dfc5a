//! Deterministic SVG figures for a run directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};
use crate::trace::{read_beliefs, read_summary, read_trace, BeliefLine, TraceRow};

pub const FIGURES: [&str; 4] = [
    "trajectory.svg",
    "relative_position.svg",
    "belief.svg",
    "bonuses.svg",
];

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: [f64; 4] = [40.0, 20.0, 50.0, 60.0]; // top, right, bottom, left
const LEADER: &str = "#c0392b";
const FOLLOWER: &str = "#2471a3";
const PALETTE: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2",
];

/// Fixed-precision number formatting keeps output byte-stable.
fn n(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

struct Figure {
    x: (f64, f64),
    y: (f64, f64),
    body: String,
}

impl Figure {
    fn new(title: &str, x_label: &str, y_label: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let pad = |(lo, hi): (f64, f64)| {
            if hi - lo > 1e-12 {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        };
        let mut f = Figure {
            x: pad(x),
            y: pad(y),
            body: String::new(),
        };
        let (l, r, t, b) = (MARGIN[3], WIDTH - MARGIN[1], MARGIN[0], HEIGHT - MARGIN[2]);
        let _ = write!(
            f.body,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
            n(l),
            n(t),
            n(r - l),
            n(b - t)
        );
        f.text(WIDTH / 2.0, 24.0, title, "middle", 15);
        f.text((l + r) / 2.0, HEIGHT - 12.0, x_label, "middle", 12);
        let _ = write!(
            f.body,
            r#"<text x="16" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            n((t + b) / 2.0),
            n((t + b) / 2.0),
            escape(y_label)
        );
        for k in 0..=4 {
            let xv = f.x.0 + (f.x.1 - f.x.0) * k as f64 / 4.0;
            let yv = f.y.0 + (f.y.1 - f.y.0) * k as f64 / 4.0;
            let (px, py) = (f.px(xv), f.py(yv));
            f.line((px, b), (px, b + 5.0), "#444", None);
            f.text(px, b + 18.0, &n(xv), "middle", 10);
            f.line((l - 5.0, py), (l, py), "#444", None);
            f.text(l - 8.0, py + 3.0, &n(yv), "end", 10);
        }
        f
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN[3] + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - MARGIN[1] - MARGIN[3])
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT
            - MARGIN[2]
            - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - MARGIN[0] - MARGIN[2])
    }

    fn text(&mut self, x: f64, y: f64, text: &str, anchor: &str, size: u32) {
        let _ = write!(
            self.body,
            r#"<text x="{}" y="{}" font-size="{size}" text-anchor="{anchor}">{}</text>"#,
            n(x),
            n(y),
            escape(text)
        );
    }

    /// Line in pixel coordinates.
    fn line(&mut self, a: (f64, f64), b: (f64, f64), color: &str, dash: Option<&str>) {
        let dash = dash
            .map(|d| format!(r#" stroke-dasharray="{d}""#))
            .unwrap_or_default();
        let _ = write!(
            self.body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}"{dash}/>"#,
            n(a.0),
            n(a.1),
            n(b.0),
            n(b.1)
        );
    }

    fn data_line(&mut self, a: (f64, f64), b: (f64, f64), color: &str, dash: Option<&str>) {
        let (a, b) = ((self.px(a.0), self.py(a.1)), (self.px(b.0), self.py(b.1)));
        self.line(a, b, color, dash);
    }

    fn polyline(&mut self, points: &[(f64, f64)], color: &str) {
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{},{}", n(self.px(x)), n(self.py(y))))
            .collect();
        let _ = write!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            coords.join(" ")
        );
        for &(x, y) in points {
            let _ = write!(
                self.body,
                r#"<circle cx="{}" cy="{}" r="2.5" fill="{color}"/>"#,
                n(self.px(x)),
                n(self.py(y))
            );
        }
    }

    /// Rectangle spanning data coordinates `x0..x1`, `y0..y1`.
    fn rect(
        &mut self,
        (x0, x1): (f64, f64),
        (y0, y1): (f64, f64),
        fill: &str,
        opacity: f64,
        stroke: Option<&str>,
    ) {
        let (l, r) = (self.px(x0.min(x1)), self.px(x0.max(x1)));
        let (t, b) = (self.py(y0.max(y1)), self.py(y0.min(y1)));
        let stroke = stroke
            .map(|s| format!(r#" stroke="{s}" stroke-width="1.5""#))
            .unwrap_or_default();
        let _ = write!(
            self.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}" fill-opacity="{}"{stroke}/>"#,
            n(l),
            n(t),
            n((r - l).max(0.5)),
            n((b - t).max(0.5)),
            n(opacity)
        );
    }

    fn legend(&mut self, entries: &[(&str, &str)]) {
        for (k, (label, color)) in entries.iter().enumerate() {
            let x = MARGIN[3] + 10.0 + 110.0 * k as f64;
            let _ = write!(
                self.body,
                r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/>"#,
                n(x),
                n(MARGIN[0] + 8.0)
            );
            self.text(x + 14.0, MARGIN[0] + 17.0, label, "start", 11);
        }
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}\n</svg>\n",
            self.body,
            w = WIDTH,
            h = HEIGHT
        )
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

fn path_of<'a>(rows: &'a [TraceRow], vehicle: &'a str) -> impl Iterator<Item = &'a TraceRow> {
    rows.iter().filter(move |r| r.vehicle == vehicle)
}

pub fn trajectory(rows: &[TraceRow], lane_centers: [f64; 2]) -> String {
    let [left, right] = lane_centers;
    let half = (right - left) / 2.0;
    let edges = [left - half, (left + right) / 2.0, right + half];
    let (xlo, xhi) = bounds(rows.iter().map(|r| r.x).chain(edges));
    let (ylo, yhi) = bounds(rows.iter().map(|r| r.y));
    let mut f = Figure::new(
        "Trajectories",
        "lateral position x (m)",
        "longitudinal position y (m)",
        (xlo - 0.5, xhi + 0.5),
        (ylo - 2.0, yhi + 2.0),
    );
    for (k, &x) in edges.iter().enumerate() {
        let dash = if k == 1 { Some("8 6") } else { None };
        f.data_line((x, f.y.0), (x, f.y.1), "#777", dash);
    }
    for (vehicle, color) in [("leader", LEADER), ("follower", FOLLOWER)] {
        let points: Vec<(f64, f64)> = path_of(rows, vehicle).map(|r| (r.x, r.y)).collect();
        f.polyline(&points, color);
    }
    f.legend(&[("leader", LEADER), ("follower", FOLLOWER)]);
    f.finish()
}

pub fn relative_position(rows: &[TraceRow]) -> String {
    let gaps: Vec<(f64, f64)> = path_of(rows, "leader")
        .zip(path_of(rows, "follower"))
        .map(|(l, c)| (l.step as f64, l.y - c.y))
        .collect();
    let (slo, shi) = bounds(gaps.iter().map(|g| g.0));
    let (glo, ghi) = bounds(gaps.iter().map(|g| g.1).chain([0.0]));
    let mut f = Figure::new(
        "Leader minus follower position",
        "step",
        "gap (m)",
        (slo, shi),
        (glo - 1.0, ghi + 1.0),
    );
    f.data_line((f.x.0, 0.0), (f.x.1, 0.0), "#777", Some("4 4"));
    f.polyline(&gaps, LEADER);
    f.finish()
}

pub fn belief(lines: &[BeliefLine]) -> String {
    let (slo, shi) = bounds(lines.iter().map(|l| l.step as f64));
    let mut f = Figure::new(
        "Belief over alpha",
        "step",
        "alpha",
        (slo - 0.5, shi + 0.5),
        (0.0, 1.0),
    );
    for line in lines {
        let cells: Vec<_> = line.belief.cells().filter(|c| c.mass > 1e-9).collect();
        let density = |c: &active_altruism::BeliefCell| c.mass / (c.hi - c.lo).max(1e-3);
        let peak = cells.iter().map(density).fold(0.0, f64::max);
        let x = line.step as f64;
        for c in &cells {
            let opacity = if peak > 0.0 {
                (density(c) / peak).clamp(0.05, 1.0)
            } else {
                0.0
            };
            f.rect((x - 0.45, x + 0.45), (c.lo, c.hi), "#6c3483", opacity, None);
        }
    }
    f.finish()
}

pub fn bonuses(lines: &[BeliefLine], actions: &[String]) -> String {
    let (slo, shi) = bounds(lines.iter().map(|l| l.step as f64));
    let values = lines
        .iter()
        .flat_map(|l| l.evaluations.iter())
        .flat_map(|e| [e.expected_reward, e.total]);
    let (vlo, vhi) = bounds(values.chain([0.0]));
    let mut f = Figure::new(
        "Expected reward and exploration bonus",
        "step",
        "value",
        (slo - 0.5, shi + 0.5),
        (vlo, vhi + 0.1 * (vhi - vlo).max(1.0)),
    );
    f.data_line((f.x.0, 0.0), (f.x.1, 0.0), "#777", None);
    for line in lines {
        let count = line.evaluations.len().max(1) as f64;
        let slot = 0.9 / count;
        for (k, e) in line.evaluations.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let x0 = line.step as f64 - 0.45 + slot * k as f64;
            let span = (x0, x0 + slot);
            let outline = (e.action == line.cell[0]).then_some("#000");
            f.rect(span, (0.0, e.expected_reward), color, 0.45, None);
            f.rect(span, (e.expected_reward, e.total), color, 0.95, None);
            if outline.is_some() {
                f.rect(
                    span,
                    (0.0_f64.min(e.expected_reward), e.total.max(0.0)),
                    "none",
                    0.0,
                    outline,
                );
            }
        }
    }
    let entries: Vec<(&str, &str)> = actions
        .iter()
        .enumerate()
        .map(|(k, a)| (a.as_str(), PALETTE[k % PALETTE.len()]))
        .collect();
    f.legend(&entries);
    f.finish()
}

/// Writes the four figures into `dir` and returns their paths.
pub fn render_dir(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let rows = read_trace(dir)?;
    let lines = read_beliefs(dir)?;
    let summary = read_summary(dir)?;
    if lines.is_empty() || !rows.iter().any(|r| r.step > 0) {
        return Err(CliError::Invalid(format!(
            "{}: empty trace, nothing to plot",
            dir.display()
        )));
    }
    let figures = [
        trajectory(&rows, summary.lane_centers),
        relative_position(&rows),
        belief(&lines),
        bonuses(&lines, &summary.leader_actions),
    ];
    let mut paths = Vec::with_capacity(FIGURES.len());
    for (name, svg) in FIGURES.iter().zip(figures) {
        let path = dir.join(name);
        std::fs::write(&path, svg).map_err(CliError::io(&path))?;
        paths.push(path);
    }
    Ok(paths)
}
