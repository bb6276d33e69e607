//! Per-day emotionality scores, the least-squares trendline, and CSV/SVG
//! rendering of the series.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::{DateTime, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Artifact, LabelClass};

#[derive(Debug, Error)]
pub enum MoodError {
    #[error("no labeled sentences to aggregate")]
    Empty,
    #[error("a trend needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("trend points must have distinct x values")]
    DegenerateX,
    #[error("timestamp {0} is out of range")]
    Timestamp(i64),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub fn class_to_score(class: LabelClass) -> i32 {
    match class {
        LabelClass::Positive => 1,
        LabelClass::Neutral => 0,
        LabelClass::Negative => -1,
    }
}

/// A labeled sentence reduced to its parent message time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimedLabel {
    /// Unix seconds.
    pub timestamp: i64,
    pub class: LabelClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayPoint {
    pub date: NaiveDate,
    pub mean_score: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    /// Score change per day.
    pub slope: f64,
    pub intercept: f64,
}

impl Trend {
    pub fn at(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoodSeries {
    pub points: Vec<DayPoint>,
    /// Absent for a single-day series.
    pub trend: Option<Trend>,
    pub offset_minutes: i32,
}

impl MoodSeries {
    /// Day offsets from the first observed day.
    pub fn day_indices(&self) -> Vec<f64> {
        let Some(first) = self.points.first() else {
            return Vec::new();
        };
        self.points
            .iter()
            .map(|p| (p.date - first.date).num_days() as f64)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,mean_score,count\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", p.date.format("%Y-%m-%d"), p.mean_score, p.count);
        }
        out
    }

    pub fn to_svg(&self, title: &str) -> String {
        render_svg(self, title)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), MoodError> {
        write_file(path, &self.to_csv())
    }

    pub fn write_svg(&self, path: &Path, title: &str) -> Result<(), MoodError> {
        write_file(path, &self.to_svg(title))
    }
}

impl Artifact for MoodSeries {
    const KIND: &'static str = "mood-series";

    fn check(&self) -> Result<(), String> {
        if self.points.windows(2).any(|w| w[0].date >= w[1].date) {
            return Err("dates must be strictly increasing".into());
        }
        if self.points.iter().any(|p| p.count == 0 || !(-1.0..=1.0).contains(&p.mean_score)) {
            return Err("each day needs count >= 1 and a mean in [-1, 1]".into());
        }
        Ok(())
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), MoodError> {
    let io = |source| MoodError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    std::fs::write(path, text).map_err(io)
}

/// Calendar date of a Unix timestamp shifted by `offset_minutes`.
pub fn local_date(timestamp: i64, offset_minutes: i32) -> Result<NaiveDate, MoodError> {
    let shifted = timestamp
        .checked_add(i64::from(offset_minutes) * 60)
        .ok_or(MoodError::Timestamp(timestamp))?;
    DateTime::from_timestamp(shifted, 0)
        .map(|dt| dt.date_naive())
        .ok_or(MoodError::Timestamp(timestamp))
}

/// Per-sentence mean score per calendar day; days without sentences are
/// omitted.
pub fn daily_series(items: &[TimedLabel], offset_minutes: i32) -> Result<MoodSeries, MoodError> {
    if items.is_empty() {
        return Err(MoodError::Empty);
    }
    let mut days: BTreeMap<NaiveDate, (i64, usize)> = BTreeMap::new();
    for item in items {
        let day = days.entry(local_date(item.timestamp, offset_minutes)?).or_default();
        day.0 += i64::from(class_to_score(item.class));
        day.1 += 1;
    }
    let points: Vec<DayPoint> = days
        .into_iter()
        .map(|(date, (sum, count))| DayPoint {
            date,
            mean_score: sum as f64 / count as f64,
            count,
        })
        .collect();
    let mut series = MoodSeries {
        points,
        trend: None,
        offset_minutes,
    };
    if series.points.len() >= 2 {
        let xy: Vec<(f64, f64)> = series
            .day_indices()
            .into_iter()
            .zip(series.points.iter().map(|p| p.mean_score))
            .collect();
        series.trend = Some(fit_trend(&xy)?);
    }
    Ok(series)
}

/// Ordinary least squares on centered data.
pub fn fit_trend(points: &[(f64, f64)]) -> Result<Trend, MoodError> {
    if points.len() < 2 {
        return Err(MoodError::TooFewPoints(points.len()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(MoodError::DegenerateX);
    }
    let slope = sxy / sxx;
    Ok(Trend {
        slope,
        intercept: my - slope * mx,
    })
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 48.0;

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Line chart with a fixed [-1, 1] y range: one solid data path and, when
/// a trend exists, one dashed trend path.
fn render_svg(series: &MoodSeries, title: &str) -> String {
    let xs = series.day_indices();
    let span = xs.last().copied().unwrap_or(0.0).max(1.0);
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let px = |x: f64| MARGIN + x / span * plot_w;
    let py = |y: f64| MARGIN + (1.0 - y) / 2.0 * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (y, label) in [(1.0, "+1"), (0.0, "0"), (-1.0, "-1")] {
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#ccc"/><text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{label}</text>"##,
            MARGIN,
            py(y),
            WIDTH - MARGIN,
            py(y),
            MARGIN - 6.0,
            py(y) + 4.0
        );
    }
    if let (Some(first), Some(last)) = (series.points.first(), series.points.last()) {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="12">{}</text><text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
            MARGIN,
            HEIGHT - MARGIN / 3.0,
            first.date,
            WIDTH - MARGIN,
            HEIGHT - MARGIN / 3.0,
            last.date
        );
    }

    let mut d = String::new();
    for (i, (x, p)) in xs.iter().zip(&series.points).enumerate() {
        let _ = write!(d, "{}{:.2} {:.2}", if i == 0 { "M" } else { " L" }, px(*x), py(p.mean_score));
    }
    let _ = writeln!(out, r##"<path class="data" d="{d}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##);
    if let Some(t) = series.trend {
        let _ = writeln!(
            out,
            r##"<path class="trend" d="M{:.2} {:.2} L{:.2} {:.2}" fill="none" stroke="#d62728" stroke-width="1.5" stroke-dasharray="6 4"/>"##,
            px(0.0),
            py(t.at(0.0).clamp(-1.0, 1.0)),
            px(span),
            py(t.at(span).clamp(-1.0, 1.0))
        );
    }
    out.push_str("</svg>\n");
    out
}
