//! Minimal deterministic SVG charts for the experiment CSVs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::{HarnessError, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

#[derive(Clone, Debug)]
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        Self { lo, hi, log }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    /// Tick positions in data units with their labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let step = ((self.hi - self.lo) / 8.0).ceil().max(1.0) as i64;
            (self.lo as i64..=self.hi as i64)
                .step_by(step as usize)
                .map(|e| (10f64.powi(e as i32), format!("1e{e}")))
                .collect()
        } else {
            (0..=4)
                .map(|i| {
                    let v = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
                    (v, format!("{}", (v * 1000.0).round() / 1000.0))
                })
                .collect()
        }
    }
}

fn usable(v: f64, log: bool) -> bool {
    v.is_finite() && (!log || v > 0.0)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Figure {
    pub fn to_svg(&self) -> String {
        let keep = |&(x, y): &(f64, f64)| usable(x, self.log_x) && usable(y, self.log_y);
        let all: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied().filter(keep))
            .collect();
        let xa = Axis::fit(all.iter().map(|p| p.0), self.log_x);
        let ya = Axis::fit(all.iter().map(|p| p.1), self.log_y);
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let px = |x: f64| LEFT + xa.unit(x) * pw;
        let py = |y: f64| TOP + (1.0 - ya.unit(y)) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
        );
        for (v, label) in xa.ticks() {
            let x = px(v);
            let _ = writeln!(
                s,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{TOP}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                TOP + ph,
                TOP + ph + 15.0,
                escape(&label)
            );
        }
        for (v, label) in ya.ticks() {
            let y = py(v);
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                LEFT + pw,
                LEFT - 5.0,
                y + 4.0,
                escape(&label)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );
        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<(f64, f64)> = series.points.iter().copied().filter(keep).collect();
            match series.style {
                Style::Line => {
                    let coords: Vec<String> = pts
                        .iter()
                        .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                        .collect();
                    let _ = writeln!(
                        s,
                        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                        coords.join(" ")
                    );
                }
                Style::Markers => {
                    for &(x, y) in &pts {
                        let _ = writeln!(
                            s,
                            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                            px(x),
                            py(y)
                        );
                    }
                }
            }
            let ly = TOP + 12.0 + 16.0 * i as f64;
            let lx = WIDTH - RIGHT + 10.0;
            let _ = writeln!(
                s,
                r#"<rect x="{lx:.2}" y="{:.2}" width="12" height="4" fill="{color}"/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
                ly - 5.0,
                lx + 16.0,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Header and rows of a CSV file; an empty file or one without data rows is an error.
fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let parse_err = |message: String| HarnessError::Parse {
        file: path.display().to_string(),
        message,
    };
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(parse_err("empty file".into()));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| parse_err(e.to_string()))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    if rows.is_empty() {
        return Err(parse_err("no data rows".into()));
    }
    Ok((header, rows))
}

struct Table {
    file: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn load(path: &Path) -> Result<Self> {
        let (header, rows) = read_table(path)?;
        Ok(Self {
            file: path.display().to_string(),
            header,
            rows,
        })
    }

    fn col(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::Parse {
                file: self.file.clone(),
                message: format!("missing column `{name}`"),
            })
    }

    fn num(&self, row: &[String], col: usize) -> Result<f64> {
        let v = row.get(col).map(String::as_str).unwrap_or("");
        if v.is_empty() {
            return Ok(f64::NAN);
        }
        v.parse().map_err(|_| HarnessError::Parse {
            file: self.file.clone(),
            message: format!("invalid number `{v}`"),
        })
    }

    /// Groups `(x, y)` by the joined values of `keys`, keeping only rows whose
    /// `filter` column equals the first value seen in it.
    fn grouped(&self, keys: &[&str], x: &str, y: &str, first_of: Option<&str>) -> Result<BTreeMap<String, Vec<(f64, f64)>>> {
        let key_cols: Vec<usize> = keys.iter().map(|k| self.col(k)).collect::<Result<_>>()?;
        let (xc, yc) = (self.col(x)?, self.col(y)?);
        let filter = match first_of {
            Some(c) => {
                let c = self.col(c)?;
                Some((c, self.rows[0].get(c).cloned().unwrap_or_default()))
            }
            None => None,
        };
        let mut out: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for row in &self.rows {
            if let Some((c, ref v)) = filter {
                if row.get(c) != Some(v) {
                    continue;
                }
            }
            let key = key_cols
                .iter()
                .map(|&c| row.get(c).cloned().unwrap_or_default())
                .collect::<Vec<_>>()
                .join(" ");
            out.entry(key)
                .or_default()
                .push((self.num(row, xc)?, self.num(row, yc)?));
        }
        Ok(out)
    }
}

fn lines(groups: BTreeMap<String, Vec<(f64, f64)>>, style: Style) -> Vec<Series> {
    groups
        .into_iter()
        .map(|(label, points)| Series {
            label,
            points,
            style,
        })
        .collect()
}

/// Builds every figure derivable from the CSVs in `csv_dir`, keyed by output name.
pub fn figures(csv_dir: &Path) -> Result<Vec<(String, Figure)>> {
    let mut names: Vec<String> = fs::read_dir(csv_dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();

    let mut out = Vec::new();
    let mut convergence: BTreeMap<String, Vec<Series>> = BTreeMap::new();
    for name in &names {
        let path = csv_dir.join(name);
        let stem = name.trim_end_matches(".csv");
        if let Some(rest) = stem.strip_prefix("convergence_") {
            if rest == "summary" {
                continue;
            }
            let t = Table::load(&path)?;
            let parts: Vec<&str> = rest.split('_').collect();
            let (label, condition) = match parts.as_slice() {
                [alg, alpha, cond] => (
                    format!("{} α={}", alg.to_uppercase(), alpha.trim_start_matches('a')),
                    cond.to_string(),
                ),
                _ => (rest.to_string(), "all".to_string()),
            };
            let points = t
                .grouped(&[], "iter", "err_w", Some("seed"))?
                .into_values()
                .next()
                .unwrap_or_default();
            convergence.entry(condition).or_default().push(Series {
                label,
                points,
                style: Style::Line,
            });
            continue;
        }
        let figure = match stem {
            "m_star_sweep_summary" | "k_sweep_summary" => {
                let t = Table::load(&path)?;
                let x = if stem.starts_with('k') { "k" } else { "m_star" };
                Some(Figure {
                    title: format!("Median final error vs {x}"),
                    x_label: x.to_string(),
                    y_label: "median ‖w − x*‖²".into(),
                    log_x: false,
                    log_y: true,
                    series: lines(t.grouped(&["algorithm", "alpha"], x, "median_final_err_w", None)?, Style::Line),
                })
            }
            "noise_estimation" => {
                let t = Table::load(&path)?;
                let mut series = lines(t.grouped(&[], "true_std", "estimated_std", None)?, Style::Markers);
                if let Some(s) = series.first_mut() {
                    s.label = "estimated".into();
                }
                let truth: Vec<(f64, f64)> = series
                    .first()
                    .map(|s| s.points.iter().map(|&(x, _)| (x, x)).collect())
                    .unwrap_or_default();
                series.push(Series {
                    label: "truth".into(),
                    points: truth,
                    style: Style::Line,
                });
                Some(Figure {
                    title: "Noise estimation".into(),
                    x_label: "true std".into(),
                    y_label: "estimated std".into(),
                    log_x: true,
                    log_y: true,
                    series,
                })
            }
            "image_trace" => {
                let t = Table::load(&path)?;
                Some(Figure {
                    title: "Image reconstruction PSNR".into(),
                    x_label: "iteration".into(),
                    y_label: "PSNR (dB)".into(),
                    log_x: false,
                    log_y: false,
                    series: lines(t.grouped(&["algorithm", "condition"], "iter", "psnr", Some("seed"))?, Style::Line),
                })
            }
            "theory_grid" => {
                let t = Table::load(&path)?;
                let mut series = Vec::new();
                for (other, label) in [("gamma3", "γ3* (AIT a)"), ("gamma4", "γ4* (AIT b)")] {
                    let pts = t.grouped(&[], "gamma1", other, None)?.into_values().next().unwrap_or_default();
                    series.push(Series {
                        label: label.into(),
                        points: pts,
                        style: Style::Markers,
                    });
                }
                Some(Figure {
                    title: "Optimal rates: GAP vs AIT".into(),
                    x_label: "γ1* (GAP)".into(),
                    y_label: "AIT optimal rate".into(),
                    log_x: true,
                    log_y: true,
                    series,
                })
            }
            _ => None,
        };
        if let Some(f) = figure {
            out.push((stem.trim_end_matches("_summary").to_string(), f));
        }
    }
    for (condition, series) in convergence {
        out.push((
            format!("convergence_{condition}"),
            Figure {
                title: format!("Convergence ({condition})"),
                x_label: "iteration".into(),
                y_label: "‖w_t − x*‖²".into(),
                log_x: false,
                log_y: true,
                series,
            },
        ));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Renders all figures; nothing is written unless every input parses.
pub fn render_plots(csv_dir: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let figs = figures(csv_dir)?;
    if figs.is_empty() {
        return Err(HarnessError::Parse {
            file: csv_dir.display().to_string(),
            message: "no experiment CSVs found".into(),
        });
    }
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for (name, fig) in figs {
        let path = out_dir.join(format!("{name}.svg"));
        fs::write(&path, fig.to_svg())?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_axis_ticks_are_decades() {
        let a = Axis::fit([1e-3, 5e2].into_iter(), true);
        assert_eq!((a.lo, a.hi), (-3.0, 3.0));
        assert_eq!(a.ticks().first().unwrap().1, "1e-3");
    }

    #[test]
    fn nonpositive_points_are_dropped_on_log_axes() {
        let fig = Figure {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            log_x: false,
            log_y: true,
            series: vec![Series {
                label: "s".into(),
                points: vec![(0.0, 1.0), (1.0, 0.0), (2.0, 1e-2)],
                style: Style::Line,
            }],
        };
        let svg = fig.to_svg();
        assert_eq!(svg.matches("<polyline").count(), 1);
        let points = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(points.split(' ').count(), 2);
    }
}
