//! Result tables, CSV persistence and SVG plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 6] = [
    "sweep_var",
    "sweep_value",
    "metric",
    "value",
    "stderr",
    "drops",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    PFd,
    PHd,
    PSelf,
    AvgRateFd,
    AvgRateHd,
    AvgDownloadFd,
    AvgDownloadHd,
    OutageFrac,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::PFd,
        Metric::PHd,
        Metric::PSelf,
        Metric::AvgRateFd,
        Metric::AvgRateHd,
        Metric::AvgDownloadFd,
        Metric::AvgDownloadHd,
        Metric::OutageFrac,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::PFd => "P_FD",
            Metric::PHd => "P_HD",
            Metric::PSelf => "P_self",
            Metric::AvgRateFd => "avg_rate_FD",
            Metric::AvgRateHd => "avg_rate_HD",
            Metric::AvgDownloadFd => "avg_download_FD",
            Metric::AvgDownloadHd => "avg_download_HD",
            Metric::OutageFrac => "outage_frac",
        }
    }

    pub fn is_probability(self) -> bool {
        matches!(self, Metric::PFd | Metric::PHd | Metric::PSelf)
    }

    /// Needs link capacities, not just the request graph.
    pub fn needs_channel(self) -> bool {
        !self.is_probability()
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown metric `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_var: String,
    pub sweep_value: f64,
    pub metric: Metric,
    pub value: f64,
    pub stderr: f64,
    pub drops: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    rows: Vec<ResultRow>,
}

/// Nine significant digits.
fn sig9(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.8e}")
    } else {
        v.to_string()
    }
}

impl ResultTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: ResultRow) {
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[ResultRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn extend(&mut self, other: ResultTable) {
        self.rows.extend(other.rows);
    }

    pub fn get(&self, sweep_var: &str, sweep_value: f64, metric: Metric) -> Option<&ResultRow> {
        self.rows.iter().find(|r| {
            r.sweep_var == sweep_var && r.sweep_value == sweep_value && r.metric == metric
        })
    }

    /// Rows of one metric along one sweep, in table order.
    pub fn series(&self, sweep_var: &str, metric: Metric) -> Vec<&ResultRow> {
        self.rows
            .iter()
            .filter(|r| r.sweep_var == sweep_var && r.metric == metric)
            .collect()
    }

    /// Distinct sweep labels in first-seen order.
    pub fn sweep_vars(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.sweep_var.as_str()) {
                out.push(&r.sweep_var);
            }
        }
        out
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.sweep_var.clone(),
                r.sweep_value.to_string(),
                r.metric.name().to_string(),
                sig9(r.value),
                sig9(r.stderr),
                r.drops.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    pub fn from_csv_str(text: &str) -> std::result::Result<Self, String> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| e.to_string())?;
        if header.iter().ne(CSV_HEADER) {
            return Err(format!("unexpected header {header:?}"));
        }
        let mut table = ResultTable::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| e.to_string())?;
            let field = |j: usize| rec.get(j).unwrap_or_default();
            let num = |j: usize| {
                field(j)
                    .parse::<f64>()
                    .map_err(|_| format!("row {}: bad number `{}`", i + 1, field(j)))
            };
            table.push(ResultRow {
                sweep_var: field(0).to_string(),
                sweep_value: num(1)?,
                metric: field(2)
                    .parse()
                    .map_err(|e: Error| format!("row {}: {e}", i + 1))?,
                value: num(3)?,
                stderr: num(4)?,
                drops: field(5)
                    .parse()
                    .map_err(|_| format!("row {}: bad drop count `{}`", i + 1, field(5)))?,
            });
        }
        Ok(table)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv_str(&text).map_err(|msg| Error::Parse {
            path: path.to_path_buf(),
            msg,
        })
    }
}

/// Writes the table as CSV (values in bits/s and seconds).
pub fn write_results(table: &ResultTable, path: &Path) -> Result<()> {
    fs::write(path, table.to_csv_string()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One SVG line plot per metric present in the table, one polyline per
/// sweep label. Returns the written paths.
pub fn write_svg_plots(table: &ResultTable, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for metric in Metric::ALL {
        let series: Vec<(&str, Vec<(f64, f64)>)> = table
            .sweep_vars()
            .into_iter()
            .map(|var| {
                let pts = table
                    .series(var, metric)
                    .into_iter()
                    .filter(|r| r.value.is_finite())
                    .map(|r| (r.sweep_value, r.value))
                    .collect();
                (var, pts)
            })
            .filter(|(_, pts): &(&str, Vec<(f64, f64)>)| !pts.is_empty())
            .collect();
        if series.is_empty() {
            continue;
        }
        let path = dir.join(format!("{stem}_{}.svg", metric.name()));
        fs::write(&path, render_svg(metric.name(), &series)).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}

fn render_svg(title: &str, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 60.0;
    const COLORS: [&str; 6] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
    ];
    let all = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{title}</text>"#,
        W / 2.0
    );
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="{}" text-anchor="middle">{}</text>"#,
        H - PAD + 18.0,
        sig9(x0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W - PAD,
        H - PAD + 18.0,
        sig9(x1)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        PAD - 4.0,
        H - PAD,
        sig9(y0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        PAD - 4.0,
        PAD + 4.0,
        sig9(y1)
    );
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            coords.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{label}</text>"#,
            W - PAD - 100.0,
            PAD + 16.0 * (i + 1) as f64
        );
    }
    s.push_str("</svg>\n");
    s
}
