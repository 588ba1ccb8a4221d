//! The run report, its percent tables and radar series, and correlation
//! analysis over per-sample scores.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use locot2v_core::aggregate::{correlate, ols, Line, Summary};
use locot2v_core::{Category, Dimension, MetricId, ScoreReport};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::provider::cache::write_atomic;

/// Everything a run produces, in a stable layout with no timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub method: String,
    pub samples: Vec<ScoreReport>,
    pub metric_means: BTreeMap<MetricId, f64>,
    pub dimension_means: BTreeMap<Dimension, f64>,
    pub overall_mean: Option<f64>,
    pub by_category: BTreeMap<Category, Summary>,
    pub correlations: Vec<CorrelationRow>,
    pub metadata: Value,
}

impl Report {
    pub fn summary(&self) -> Summary {
        Summary {
            metric_means: self.metric_means.clone(),
            dimension_means: self.dimension_means.clone(),
            overall_mean: self.overall_mean,
            samples: self.samples.len(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::json("report", e))?;
        s.push('\n');
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Report> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }
}

// -- correlation -----------------------------------------------------------------

/// A per-sample score series: a dimension average, a single metric, or the
/// overall average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SeriesKey {
    Dimension(Dimension),
    Metric(MetricId),
    Overall,
}

impl SeriesKey {
    pub fn parse(s: &str) -> Option<SeriesKey> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("overall") {
            return Some(SeriesKey::Overall);
        }
        MetricId::parse(s)
            .map(SeriesKey::Metric)
            .or_else(|| Dimension::parse(s).map(SeriesKey::Dimension))
    }

    pub fn id(self) -> &'static str {
        match self {
            SeriesKey::Dimension(d) => d.as_str(),
            SeriesKey::Metric(m) => m.as_str(),
            SeriesKey::Overall => "overall",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SeriesKey::Dimension(d) => d.label(),
            SeriesKey::Metric(m) => metric_title(m),
            SeriesKey::Overall => "Overall",
        }
    }

    pub fn value(self, r: &ScoreReport) -> Option<f64> {
        match self {
            SeriesKey::Dimension(d) => r.dimension_averages.get(&d).copied(),
            SeriesKey::Metric(m) => r.metrics.get(&m).and_then(|s| s.value()),
            SeriesKey::Overall => r.overall_average,
        }
    }
}

/// Spelled-out metric name for correlation tables.
pub fn metric_title(m: MetricId) -> &'static str {
    use MetricId::*;
    match m {
        AestheticQuality => "Aesthetic Quality",
        TechnicalQuality => "Technical Quality",
        OverallAlignment => "Overall Alignment",
        EventAlignment => "Event-level Alignment",
        IntraEventSubjectConsistency => "Intra-event Subject Consistency",
        IntraEventBackgroundConsistency => "Intra-event Background Consistency",
        InterEventSubjectConsistency => "Inter-event Subject Consistency",
        InterEventBackgroundConsistency => "Inter-event Background Consistency",
        ThemeClarity => "Theme Clarity",
        LogicalStructure => "Logical Structure",
        InformationCompleteness => "Information Completeness",
        InformationConsistency => "Information Consistency",
        other => other.short_label(),
    }
}

/// Static quality against each other dimension, then event alignment
/// against the four event-level consistency metrics.
pub fn default_pairs() -> Vec<(SeriesKey, SeriesKey)> {
    use SeriesKey::{Dimension as D, Metric as M};
    let sq = D(Dimension::StaticQuality);
    let ea = M(MetricId::EventAlignment);
    vec![
        (sq, D(Dimension::TemporalQuality)),
        (sq, D(Dimension::TextVideoAlignment)),
        (sq, D(Dimension::ContentClarity)),
        (sq, D(Dimension::Herd)),
        (ea, M(MetricId::IntraEventSubjectConsistency)),
        (ea, M(MetricId::IntraEventBackgroundConsistency)),
        (ea, M(MetricId::InterEventSubjectConsistency)),
        (ea, M(MetricId::InterEventBackgroundConsistency)),
    ]
}

pub fn parse_pair(s: &str) -> Result<(SeriesKey, SeriesKey)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::Usage(format!("metric pair must look like a:b, got {s:?}")))?;
    let key = |k: &str| SeriesKey::parse(k).ok_or_else(|| Error::Usage(format!("unknown metric or dimension {k:?}")));
    Ok((key(a)?, key(b)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStatus {
    Ok,
    /// Enough points, but a coefficient is undefined (a constant series).
    NotApplicable,
    /// Fewer than three samples carry both scores.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub metric_1: String,
    pub metric_2: String,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub kendall: Option<f64>,
    pub n: usize,
    pub status: PairStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ols: Option<Line>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub sample_id: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scatter {
    pub metric_1: String,
    pub metric_2: String,
    pub points: Vec<ScatterPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ols: Option<Line>,
}

/// Correlates each pair over the samples that have both scores.
pub fn correlate_pairs(samples: &[ScoreReport], pairs: &[(SeriesKey, SeriesKey)]) -> Vec<(CorrelationRow, Scatter)> {
    pairs
        .iter()
        .map(|&(a, b)| {
            let points: Vec<ScatterPoint> = samples
                .iter()
                .filter_map(|r| {
                    Some(ScatterPoint {
                        sample_id: r.sample_id.clone(),
                        x: a.value(r)?,
                        y: b.value(r)?,
                    })
                })
                .collect();
            let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
            let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
            let line = ols(&xs, &ys);
            let mut row = CorrelationRow {
                metric_1: a.id().into(),
                metric_2: b.id().into(),
                pearson: None,
                spearman: None,
                kendall: None,
                n: points.len(),
                status: PairStatus::Skipped,
                ols: line,
                note: None,
            };
            match correlate(&xs, &ys) {
                Ok(c) => {
                    row.pearson = c.pearson;
                    row.spearman = c.spearman;
                    row.kendall = c.kendall;
                    let all = c.pearson.is_some() && c.spearman.is_some() && c.kendall.is_some();
                    row.status = if all { PairStatus::Ok } else { PairStatus::NotApplicable };
                    if !all {
                        row.note = Some("constant series".into());
                    }
                }
                Err(e) => row.note = Some(e.to_string()),
            }
            let scatter = Scatter {
                metric_1: row.metric_1.clone(),
                metric_2: row.metric_2.clone(),
                points,
                ols: line,
            };
            (row, scatter)
        })
        .collect()
}

// -- tables ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl TableFormat {
    pub fn parse(s: &str) -> Result<TableFormat> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "md" | "markdown" => Ok(TableFormat::Markdown),
            other => Err(Error::Usage(format!("unknown table format {other:?} (expected csv or markdown)"))),
        }
    }

    fn extension(self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Markdown => "md",
        }
    }
}

/// A table of fractions, one row per method, rendered as percents.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub headers: Vec<String>,
    pub rows: Vec<(Vec<String>, Vec<Option<f64>>)>,
}

/// Two decimals on the percent scale; missing cells show as an em dash.
pub fn percent_cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{:.2}", x * 100.0),
        None => "\u{2014}".into(),
    }
}

impl Table {
    fn string_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|(labels, vals)| labels.iter().cloned().chain(vals.iter().map(|v| percent_cell(*v))).collect())
            .collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let werr = |e: csv::Error| Error::Usage(format!("writing CSV: {e}"));
        w.write_record(&self.headers).map_err(werr)?;
        for row in self.string_rows() {
            w.write_record(&row).map_err(werr)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Usage(format!("writing CSV: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Usage(format!("writing CSV: {e}")))
    }

    pub fn to_markdown(&self) -> String {
        let esc = |s: &str| s.replace('|', "\\|");
        let n_labels = self.headers.len() - self.rows.first().map_or(0, |r| r.1.len());
        let mut out = format!("| {} |\n|", self.headers.iter().map(|h| esc(h)).collect::<Vec<_>>().join(" | "));
        for i in 0..self.headers.len() {
            out.push_str(if i < n_labels { " --- |" } else { " ---: |" });
        }
        out.push('\n');
        for row in self.string_rows() {
            out.push_str(&format!("| {} |\n", row.iter().map(|c| esc(c)).collect::<Vec<_>>().join(" | ")));
        }
        out
    }

    pub fn render(&self, format: TableFormat) -> Result<String> {
        match format {
            TableFormat::Csv => self.to_csv(),
            TableFormat::Markdown => Ok(self.to_markdown()),
        }
    }
}

/// Methods with their method-level summaries, in row order.
pub type MethodRows<'a> = [(&'a str, Summary)];

/// Per-dimension overview: sub-metrics and average for static quality,
/// alignment and clarity, averages only for temporal quality and HERD.
pub fn dimensions_table(methods: &MethodRows) -> Table {
    #[derive(Clone, Copy)]
    enum Col {
        Metric(MetricId),
        Dim(Dimension),
        Overall,
    }
    let mut cols = Vec::new();
    let mut headers = vec!["Method".to_string()];
    for d in Dimension::ALL {
        let expanded = !matches!(d, Dimension::TemporalQuality | Dimension::Herd);
        if expanded {
            for &m in d.metrics() {
                cols.push(Col::Metric(m));
                headers.push(m.short_label().into());
            }
            headers.push(format!("{} Avg.", d.label()));
        } else {
            headers.push(d.label().into());
        }
        cols.push(Col::Dim(d));
    }
    cols.push(Col::Overall);
    headers.push("Avg.".into());
    let rows = methods
        .iter()
        .map(|(name, s)| {
            let vals = cols
                .iter()
                .map(|c| match c {
                    Col::Metric(m) => s.metric_means.get(m).copied(),
                    Col::Dim(d) => s.dimension_means.get(d).copied(),
                    Col::Overall => s.overall_mean,
                })
                .collect();
            (vec![name.to_string()], vals)
        })
        .collect();
    Table {
        name: "dimensions",
        headers,
        rows,
    }
}

fn sub_metric_table(name: &'static str, dim: Dimension, methods: &MethodRows) -> Table {
    let mut headers = vec!["Method".to_string()];
    headers.extend(dim.metrics().iter().map(|m| m.short_label().to_string()));
    headers.push("Avg.".into());
    let rows = methods
        .iter()
        .map(|(n, s)| {
            let mut vals: Vec<Option<f64>> = dim.metrics().iter().map(|m| s.metric_means.get(m).copied()).collect();
            vals.push(s.dimension_means.get(&dim).copied());
            (vec![n.to_string()], vals)
        })
        .collect();
    Table { name, headers, rows }
}

pub fn temporal_table(methods: &MethodRows) -> Table {
    sub_metric_table("temporal", Dimension::TemporalQuality, methods)
}

pub fn herd_table(methods: &MethodRows) -> Table {
    sub_metric_table("herd", Dimension::Herd, methods)
}

/// Dimension averages per method and theme category.
pub fn categories_table(reports: &[&Report]) -> Table {
    let mut headers = vec!["Method".to_string(), "Category".to_string()];
    headers.extend(Dimension::ALL.iter().map(|d| d.label().to_string()));
    headers.push("Avg.".into());
    let mut rows = Vec::new();
    for r in reports {
        for (cat, s) in &r.by_category {
            let mut vals: Vec<Option<f64>> = Dimension::ALL.iter().map(|d| s.dimension_means.get(d).copied()).collect();
            vals.push(s.overall_mean);
            rows.push((vec![r.method.clone(), cat.as_str().to_string()], vals));
        }
    }
    Table {
        name: "categories",
        headers,
        rows,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadarSeries {
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    /// Percent values in axis order; null where missing.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadarData {
    pub axes: Vec<&'static str>,
    pub series: Vec<RadarSeries>,
}

pub fn radar_data(reports: &[&Report]) -> RadarData {
    let pct = |s: &Summary| -> Vec<Option<f64>> {
        Dimension::ALL
            .iter()
            .map(|d| s.dimension_means.get(d).map(|v| v * 100.0))
            .collect()
    };
    let mut series = Vec::new();
    for r in reports {
        series.push(RadarSeries {
            method: r.method.clone(),
            category: None,
            values: pct(&r.summary()),
        });
        for (cat, s) in &r.by_category {
            series.push(RadarSeries {
                method: r.method.clone(),
                category: Some(cat.as_str().into()),
                values: pct(s),
            });
        }
    }
    RadarData {
        axes: Dimension::ALL.iter().map(|d| d.label()).collect(),
        series,
    }
}

/// Writes the four tables in `format` plus `radar.json` into `dir` and
/// returns the written paths.
pub fn emit_tables(reports: &[Report], format: TableFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    if reports.is_empty() {
        return Err(Error::Usage("no reports given".into()));
    }
    let methods: Vec<(&str, Summary)> = reports.iter().map(|r| (r.method.as_str(), r.summary())).collect();
    let refs: Vec<&Report> = reports.iter().collect();
    let tables = [
        dimensions_table(&methods),
        temporal_table(&methods),
        herd_table(&methods),
        categories_table(&refs),
    ];
    let mut written = Vec::new();
    for t in &tables {
        let path = dir.join(format!("{}.{}", t.name, format.extension()));
        write_atomic(&path, t.render(format)?.as_bytes())?;
        written.push(path);
    }
    let path = dir.join("radar.json");
    let mut body = serde_json::to_vec_pretty(&radar_data(&refs)).map_err(|e| Error::json("radar", e))?;
    body.push(b'\n');
    write_atomic(&path, &body)?;
    written.push(path);
    Ok(written)
}

fn coefficient_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "\u{2014}".into(), |x| format!("{x:.4}"))
}

/// Correlation rows as a table with spelled-out metric names.
pub fn correlation_table(rows: &[CorrelationRow]) -> (Vec<String>, Vec<Vec<String>>) {
    let headers = ["Metric 1", "Metric 2", "Pearson", "Spearman", "Kendall", "n", "Status"]
        .map(String::from)
        .to_vec();
    let label = |id: &str| SeriesKey::parse(id).map_or(id.to_string(), |k| k.label().to_string());
    let body = rows
        .iter()
        .map(|r| {
            vec![
                label(&r.metric_1),
                label(&r.metric_2),
                coefficient_cell(r.pearson),
                coefficient_cell(r.spearman),
                coefficient_cell(r.kendall),
                r.n.to_string(),
                match r.status {
                    PairStatus::Ok => "ok".into(),
                    PairStatus::NotApplicable => "not_applicable".into(),
                    PairStatus::Skipped => "skipped".into(),
                },
            ]
        })
        .collect();
    (headers, body)
}

/// Writes `correlations.csv`, `correlations.md` and `scatter.json`.
pub fn emit_correlations(
    samples: &[ScoreReport],
    pairs: &[(SeriesKey, SeriesKey)],
    dir: &Path,
) -> Result<(Vec<CorrelationRow>, Vec<PathBuf>)> {
    let results = correlate_pairs(samples, pairs);
    let rows: Vec<CorrelationRow> = results.iter().map(|(r, _)| r.clone()).collect();
    let scatter: Vec<&Scatter> = results.iter().map(|(_, s)| s).collect();
    let (headers, body) = correlation_table(&rows);

    let mut w = csv::Writer::from_writer(Vec::new());
    let werr = |e: csv::Error| Error::Usage(format!("writing CSV: {e}"));
    w.write_record(&headers).map_err(werr)?;
    for r in &body {
        w.write_record(r).map_err(werr)?;
    }
    let csv_bytes = w.into_inner().map_err(|e| Error::Usage(format!("writing CSV: {e}")))?;

    let mut md = format!("| {} |\n| --- | --- | ---: | ---: | ---: | ---: | --- |\n", headers.join(" | "));
    for r in &body {
        md.push_str(&format!("| {} |\n", r.join(" | ")));
    }
    let mut scatter_json =
        serde_json::to_vec_pretty(&serde_json::json!({ "pairs": scatter })).map_err(|e| Error::json("scatter", e))?;
    scatter_json.push(b'\n');

    let paths = [
        (dir.join("correlations.csv"), csv_bytes),
        (dir.join("correlations.md"), md.into_bytes()),
        (dir.join("scatter.json"), scatter_json),
    ];
    let mut written = Vec::new();
    for (p, bytes) in paths {
        write_atomic(&p, &bytes)?;
        written.push(p);
    }
    Ok((rows, written))
}

#[cfg(test)]
mod tests {
    use super::*;
    use locot2v_core::MetricScore;

    fn sample(id: &str, vals: &[(MetricId, f64)]) -> ScoreReport {
        ScoreReport::from_metrics(id, vals.iter().map(|&(m, v)| MetricScore::ok(m, v, v)))
    }

    #[test]
    fn percent_cells() {
        assert_eq!(percent_cell(Some(0.5523)), "55.23");
        assert_eq!(percent_cell(Some(1.0)), "100.00");
        assert_eq!(percent_cell(None), "\u{2014}");
    }

    #[test]
    fn single_method_tables_have_one_row() {
        let r = sample("a", &[(MetricId::AestheticQuality, 0.6538), (MetricId::TechnicalQuality, 0.7134)]);
        let s = locot2v_core::aggregate::summarize([&r]);
        let t = dimensions_table(&[("m", s)]);
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.headers.len(), 15);
        let md = t.to_markdown();
        assert!(md.contains("| m | 65.38 | 71.34 | 68.36 | \u{2014} |"), "{md}");
        assert_eq!(md.lines().count(), 3);
        let csv = t.to_csv().unwrap();
        assert!(csv.starts_with("Method,AQ,TQ,Static Quality Avg.,OA,EA"));
    }

    #[test]
    fn default_pairs_and_parsing() {
        let p = default_pairs();
        assert_eq!(p.len(), 8);
        assert_eq!(p[0].0.label(), "Static Quality");
        assert_eq!(p[7].1.label(), "Inter-event Background Consistency");
        let (a, b) = parse_pair("static_quality:herd_themes").unwrap();
        assert_eq!(a, SeriesKey::Dimension(Dimension::StaticQuality));
        assert_eq!(b, SeriesKey::Metric(MetricId::HerdThemes));
        assert!(parse_pair("nope:herd").is_err());
        assert!(parse_pair("herd").is_err());
    }

    #[test]
    fn pair_statuses() {
        let ids = ["a", "b", "c", "d"];
        let samples: Vec<ScoreReport> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| {
                sample(
                    id,
                    &[
                        (MetricId::AestheticQuality, i as f64 / 4.0),
                        (MetricId::EventAlignment, 0.5),
                        (MetricId::HerdThemes, (i * i) as f64 / 16.0),
                    ],
                )
            })
            .collect();
        let aq = SeriesKey::Metric(MetricId::AestheticQuality);
        let pairs = [
            (aq, aq),
            (aq, SeriesKey::Metric(MetricId::EventAlignment)),
            (aq, SeriesKey::Metric(MetricId::ThemeClarity)),
        ];
        let out = correlate_pairs(&samples, &pairs);
        let self_pair = &out[0].0;
        assert_eq!(self_pair.status, PairStatus::Ok);
        assert_eq!((self_pair.pearson, self_pair.spearman, self_pair.kendall), (Some(1.0), Some(1.0), Some(1.0)));
        assert_eq!(out[0].1.points.len(), 4);
        assert_eq!(out[1].0.status, PairStatus::NotApplicable);
        assert_eq!(out[2].0.status, PairStatus::Skipped);
        assert_eq!(out[2].0.n, 0);
    }

    #[test]
    fn unknown_format_is_usage_error() {
        assert!(matches!(TableFormat::parse("xlsx"), Err(Error::Usage(_))));
        assert_eq!(TableFormat::parse("MD").unwrap(), TableFormat::Markdown);
    }
}
