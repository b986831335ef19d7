//! Artifact emission: CSV tables with an audit header, SVG views of
//! direction CSVs, and the no-overwrite guard.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of the JSON serialisation of a config value.
pub fn config_hash(config: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(config).expect("json values serialise");
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// A CSV table. Cells never contain commas or quotes in our artifacts, so
/// no quoting is done; [`Csv::push`] rejects such cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Csv {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest round-trip float formatting.
pub fn num(x: f64) -> String {
    format!("{x}")
}

impl Csv {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Csv {
            comments: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Header line `# logcompact <version> config=<hash>`.
    pub fn with_header(mut self, config_hash: &str) -> Self {
        self.comments
            .insert(0, format!("logcompact {VERSION} config={config_hash}"));
        self
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        assert!(
            row.iter().all(|c| !c.contains([',', '"', '\n'])),
            "unquotable cell"
        );
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.comments {
            let _ = writeln!(s, "# {c}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut comments = Vec::new();
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = loop {
            match lines.next() {
                Some(l) if l.starts_with('#') => {
                    comments.push(l.trim_start_matches('#').trim().to_string())
                }
                Some(l) => break l,
                None => return Err("csv has no header row".into()),
            }
        };
        let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, l) in lines.enumerate() {
            let r: Vec<String> = l.split(',').map(|c| c.trim().to_string()).collect();
            if r.len() != columns.len() {
                return Err(format!(
                    "row {} has {} cells, expected {}",
                    i + 1,
                    r.len(),
                    columns.len()
                ));
            }
            rows.push(r);
        }
        Ok(Csv {
            comments,
            columns,
            rows,
        })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Writes `contents` to `path`, refusing to replace an existing file unless
/// `force`.
pub fn write_new(path: &Path, contents: &str, force: bool) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    if force {
        return fs::write(path, contents);
    }
    use io::Write;
    let mut f = fs::OpenOptions::new()
        .write(true)
        .create_new(true)
        .open(path)?;
    f.write_all(contents.as_bytes())
}

/// Plot data: points in a chart of the unit circle plus optional labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub points: Vec<[f64; 2]>,
    pub labels: Vec<Option<String>>,
    pub title: String,
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    crate::logmap::normalize(v)
}

/// Directions in the plane are drawn on the unit circle. Directions in
/// space go through the stereographic projection from the antipode of
/// their mean, which sends the hemisphere around the mean onto the unit
/// disk. Points within `1e-6` of the pole are dropped.
pub fn chart_from_directions(
    dirs: &[Vec<f64>],
    labels: Vec<Option<String>>,
    title: &str,
) -> Result<Chart, String> {
    let dim = dirs.first().map(Vec::len).unwrap_or(2);
    if dirs.iter().any(|d| d.len() != dim) {
        return Err("directions of mixed dimension".into());
    }
    let mut points = Vec::new();
    let mut kept = Vec::new();
    match dim {
        2 => {
            for (d, l) in dirs.iter().zip(labels) {
                if let Some(u) = unit(d) {
                    points.push([u[0], u[1]]);
                    kept.push(l);
                }
            }
        }
        3 => {
            let sum = dirs.iter().fold(vec![0.0; 3], |a, d| {
                let u = unit(d).unwrap_or_else(|| vec![0.0; 3]);
                vec![a[0] + u[0], a[1] + u[1], a[2] + u[2]]
            });
            let c = unit(&sum).unwrap_or_else(|| vec![0.0, 0.0, 1.0]);
            let (e1, e2) = crate::linalg::orthonormal_complement(&[c[0], c[1], c[2]]);
            for (d, l) in dirs.iter().zip(labels) {
                let Some(u) = unit(d) else { continue };
                let dot = |e: &[f64; 3]| e[0] * u[0] + e[1] * u[1] + e[2] * u[2];
                let h = 1.0 + u[0] * c[0] + u[1] * c[1] + u[2] * c[2];
                if h < 1e-6 {
                    continue;
                }
                points.push([dot(&e1) / h, dot(&e2) / h]);
                kept.push(l);
            }
        }
        n => return Err(format!("cannot chart directions in dimension {n}")),
    }
    Ok(Chart {
        points,
        labels: kept,
        title: title.to_string(),
    })
}

/// Reads a direction CSV: columns `d0, d1[, d2]`, optional `label`.
pub fn chart_from_csv(csv: &Csv) -> Result<Chart, String> {
    let idx: Vec<usize> = (0..).map_while(|i| csv.column(&format!("d{i}"))).collect();
    if idx.len() < 2 {
        return Err("csv needs direction columns d0, d1".into());
    }
    let label = csv.column("label");
    let mut dirs = Vec::new();
    let mut labels = Vec::new();
    for (i, r) in csv.rows.iter().enumerate() {
        let d = idx
            .iter()
            .map(|&j| {
                r[j].parse::<f64>()
                    .map_err(|_| format!("row {}: bad number {:?}", i + 1, r[j]))
            })
            .collect::<Result<Vec<_>, _>>()?;
        dirs.push(d);
        labels.push(label.map(|j| r[j].clone()));
    }
    let title = csv.comments.first().cloned().unwrap_or_default();
    chart_from_directions(&dirs, labels, &title)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// SVG of the unit boundary circle with the chart points. Coordinates are
/// printed at fixed precision so the output is a pure function of the chart.
pub fn render_svg(chart: &Chart) -> String {
    let size = 480.0;
    let scale = 200.0;
    let c = size / 2.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<circle cx="{c}" cy="{c}" r="{scale}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    if !chart.title.is_empty() {
        let _ = writeln!(
            s,
            r#"<text x="8" y="16" font-size="11">{}</text>"#,
            escape(&chart.title)
        );
    }
    for (p, l) in chart.points.iter().zip(&chart.labels) {
        let (x, y) = (c + scale * p[0], c - scale * p[1]);
        if !(x.is_finite() && y.is_finite()) || x.abs() > 4.0 * size || y.abs() > 4.0 * size {
            continue;
        }
        let _ = writeln!(
            s,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="2" fill="steelblue"/>"#
        );
        if let Some(l) = l {
            let _ = writeln!(
                s,
                r#"<text x="{:.3}" y="{:.3}" font-size="11">{}</text>"#,
                x + 4.0,
                y - 4.0,
                escape(l)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
