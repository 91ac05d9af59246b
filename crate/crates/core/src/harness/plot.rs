//! SVG line charts and their plain-text data files.
//!
//! Each figure family gets `<name>.svg` and `<name>.dat`; the data file holds
//! exactly the plotted points, one whitespace-separated row per point, after
//! a `#` header line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::experiment::{read_csv, SummaryRow, TrendSummaryRow};
use crate::error::{Error, Result};

/// One strategy's aggregated results.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategySeries {
    pub name: String,
    pub summary: Vec<SummaryRow>,
    pub trends: Vec<TrendSummaryRow>,
}

impl StrategySeries {
    /// Reads `summary.csv` and, when present, `trends.csv` from `dir`.
    pub fn load(name: &str, dir: &Path) -> Result<Self> {
        let summary = read_csv(&dir.join("summary.csv"))?;
        let trends_path = dir.join("trends.csv");
        let trends = if trends_path.is_file() {
            summarize_trends(&read_csv(&trends_path)?)
        } else {
            Vec::new()
        };
        Ok(StrategySeries {
            name: name.to_string(),
            summary,
            trends,
        })
    }
}

fn summarize_trends(rows: &[super::experiment::TrendRow]) -> Vec<TrendSummaryRow> {
    let iterations = rows.iter().map(|r| r.iteration + 1).max().unwrap_or(0);
    (0..iterations)
        .map(|t| {
            let at: Vec<_> = rows.iter().filter(|r| r.iteration == t).collect();
            let n = at.len().max(1) as f64;
            TrendSummaryRow {
                iteration: t,
                hard_mean: at.iter().map(|r| r.hard as f64).sum::<f64>() / n,
                conflict_mean: at.iter().map(|r| r.conflict as f64).sum::<f64>() / n,
            }
        })
        .collect()
}

/// Every strategy subdirectory of `dir` holding a `summary.csv`, by name.
pub fn load_results_dir(dir: &Path) -> Result<Vec<StrategySeries>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("summary.csv").is_file())
        .collect();
    dirs.sort();
    dirs.iter()
        .map(|p| {
            let name = p
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            StrategySeries::load(&name, p)
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Line {
    name: String,
    points: Vec<(f64, f64, f64)>,
}

struct Chart<'a> {
    title: &'a str,
    x_label: &'a str,
    y_label: &'a str,
    lines: Vec<Line>,
}

const PALETTE: [&str; 6] = ["#1b6ca8", "#d1495b", "#3a8f5c", "#edae49", "#6c4f9c", "#555555"];
const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(t);
        t += step;
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart<'_> {
    fn render(&self) -> String {
        let finite = |v: f64| v.is_finite();
        let pts = || {
            self.lines
                .iter()
                .flat_map(|l| l.points.iter())
                .filter(|p| finite(p.0) && finite(p.1))
        };
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y, e) in pts() {
            let e = if finite(e) { e } else { 0.0 };
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y - e);
            y1 = y1.max(y + e);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-12 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 < 1e-12 {
            y1 = y0 + 1.0;
        }
        let pad = (y1 - y0) * 0.05;
        let (y0, y1) = (y0 - pad, y1 + pad);
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + pw / 2.0,
            escape(self.title)
        );
        for t in nice_ticks(x0, x1) {
            let x = sx(t);
            let _ = writeln!(
                s,
                r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#e3e3e3"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
                TOP,
                TOP + ph,
                TOP + ph + 16.0,
                fmt_tick(t)
            );
        }
        for t in nice_ticks(y0, y1) {
            let y = sy(t);
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#e3e3e3"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
                LEFT + pw,
                LEFT - 6.0,
                y + 4.0,
                fmt_tick(t)
            );
        }
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            H - 12.0,
            escape(self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(self.y_label)
        );

        for (i, line) in self.lines.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let p: Vec<_> = line.points.iter().filter(|p| finite(p.0) && finite(p.1)).collect();
            if p.iter().any(|q| finite(q.2) && q.2 > 0.0) {
                let upper = p
                    .iter()
                    .map(|q| format!("{:.2},{:.2}", sx(q.0), sy(q.1 + q.2.max(0.0))));
                let lower = p
                    .iter()
                    .rev()
                    .map(|q| format!("{:.2},{:.2}", sx(q.0), sy(q.1 - q.2.max(0.0))));
                let poly: Vec<String> = upper.chain(lower).collect();
                let _ = writeln!(
                    s,
                    r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
                    poly.join(" ")
                );
            }
            let path: Vec<String> = p.iter().map(|q| format!("{:.2},{:.2}", sx(q.0), sy(q.1))).collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                path.join(" ")
            );
            for q in &p {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                    sx(q.0),
                    sy(q.1)
                );
            }
            let ly = TOP + 12.0 + i as f64 * 18.0;
            let lx = LEFT + pw + 12.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
                lx + 20.0,
                lx + 26.0,
                ly + 4.0,
                escape(&line.name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn fmt_tick(v: f64) -> String {
    let r = (v * 1e6).round() / 1e6;
    if r == r.trunc() {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Writes the micro-F1, selected-batch MeanIR and pool-trend figures under
/// `out_dir`. Returns the files written; empty input writes nothing.
pub fn emit_plots(series: &[StrategySeries], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if series.iter().all(|s| s.summary.is_empty()) {
        log::warn!("no results to plot");
        return Ok(Vec::new());
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let mut emit = |name: &str, chart: Chart, dat: String| -> Result<()> {
        let svg = out_dir.join(format!("{name}.svg"));
        let data = out_dir.join(format!("{name}.dat"));
        write(&svg, &chart.render())?;
        write(&data, &dat)?;
        written.push(svg);
        written.push(data);
        Ok(())
    };

    let mut dat = String::from("# strategy labeled_size micro_f1_mean micro_f1_std\n");
    let mut lines = Vec::new();
    for s in series {
        let mut points = Vec::new();
        for r in &s.summary {
            let _ = writeln!(
                dat,
                "{} {} {} {}",
                s.name, r.labeled_size, r.micro_f1_mean, r.micro_f1_std
            );
            let err = if r.seeds > 1 { r.micro_f1_std } else { f64::NAN };
            points.push((r.labeled_size, r.micro_f1_mean, err));
        }
        lines.push(Line {
            name: s.name.clone(),
            points,
        });
    }
    emit(
        "micro_f1",
        Chart {
            title: "Micro-F1 vs labelled pool size",
            x_label: "labelled instances",
            y_label: "micro-F1",
            lines,
        },
        dat,
    )?;

    let mut dat = String::from("# strategy iteration mean_ir_selected_mean mean_ir_selected_std\n");
    let mut lines = Vec::new();
    for s in series {
        let mut points = Vec::new();
        for r in &s.summary {
            let _ = writeln!(
                dat,
                "{} {} {} {}",
                s.name, r.iteration, r.mean_ir_selected_mean, r.mean_ir_selected_std
            );
            let err = if r.seeds > 1 { r.mean_ir_selected_std } else { f64::NAN };
            points.push((r.iteration as f64, r.mean_ir_selected_mean, err));
        }
        lines.push(Line {
            name: s.name.clone(),
            points,
        });
    }
    emit(
        "mean_ir",
        Chart {
            title: "MeanIR of selected batches",
            x_label: "iteration",
            y_label: "MeanIR",
            lines,
        },
        dat,
    )?;

    if series.iter().any(|s| !s.trends.is_empty()) {
        let mut dat = String::from("# strategy iteration hard_mean conflict_mean\n");
        let mut lines = Vec::new();
        for s in series {
            let mut hard = Vec::new();
            let mut conflict = Vec::new();
            for r in &s.trends {
                let _ = writeln!(dat, "{} {} {} {}", s.name, r.iteration, r.hard_mean, r.conflict_mean);
                hard.push((r.iteration as f64, r.hard_mean, f64::NAN));
                conflict.push((r.iteration as f64, r.conflict_mean, f64::NAN));
            }
            lines.push(Line {
                name: format!("{} hard", s.name),
                points: hard,
            });
            lines.push(Line {
                name: format!("{} conflict", s.name),
                points: conflict,
            });
        }
        emit(
            "pool_trends",
            Chart {
                title: "Hard-to-learn and conflicted instances",
                x_label: "iteration",
                y_label: "unlabelled instances",
                lines,
            },
            dat,
        )?;
    }
    Ok(written)
}
