//! CSV tables and SVG figures.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::density::{DensityModel, Domain, SampleSet};
use crate::error::{Error, Result};

/// A rectangular table of already formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Row types that render into a [`Table`].
pub trait Tabular {
    fn columns() -> &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn from_rows<T: Tabular>(rows: &[T]) -> Self {
        let mut t = Self::new(T::columns());
        t.rows = rows.iter().map(Tabular::cells).collect();
        t
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column; unparsable cells become NaN.
    pub fn numbers(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column(name)?;
        Some(self.rows.iter().map(|r| r[i].parse().unwrap_or(f64::NAN)).collect())
    }
}

/// Writes `# key=value` metadata lines, the header row and the body.
pub fn write_csv<W: Write>(table: &Table, metadata: &[(String, String)], mut out: W) -> Result<()> {
    let io = |e| Error::io("<csv>", e);
    for (k, v) in metadata {
        writeln!(out, "# {k}={v}").map_err(io)?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        if row.len() != table.columns.len() {
            return Err(Error::InvalidArgument(format!(
                "row has {} cells for {} columns",
                row.len(),
                table.columns.len()
            )));
        }
        w.write_record(row)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

pub fn emit_csv(table: &Table, metadata: &[(String, String)], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(table, metadata, std::io::BufWriter::new(file))
}

/// Reads a file written by [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<(Vec<(String, String)>, Table)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut meta = Vec::new();
    let mut body = String::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if let Some(m) = line.strip_prefix("# ") {
            let (k, v) = m.split_once('=').ok_or_else(|| Error::parse("csv", format!("bad metadata `{line}`")))?;
            meta.push((k.to_string(), v.to_string()));
        } else {
            body.push_str(&line);
            body.push('\n');
        }
    }
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let columns = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok((meta, Table { columns, rows }))
}

/// A polyline in data coordinates with a CSS class.
#[derive(Debug, Clone, PartialEq)]
pub struct SvgPath {
    pub class: String,
    pub points: Vec<[f64; 2]>,
}

pub const SVG_SIZE: usize = 600;
const RASTER: usize = 60;

const STYLE: &str = ".pt{fill:#1f4e9c;opacity:0.5}\
.unweighted{stroke:#d62728;stroke-width:2;fill:none}\
.euclidean{stroke:#000;stroke-width:2;fill:none}\
.weighted{stroke:#2ca02c;stroke-width:2;fill:none}\
.oracle{stroke:#ff7f0e;stroke-width:2;stroke-dasharray:6 3;fill:none}\
.high{fill:#d62728}.low{fill:#1f77b4}.ramp{fill:#999}";

/// Renders sample points and paths over an optional grayscale density
/// raster (darker is denser). Only the first two coordinates are drawn.
pub fn render_svg(
    domain: &Domain,
    density: Option<&DensityModel>,
    points: &[([f64; 2], &str)],
    paths: &[SvgPath],
) -> String {
    let (x0, y0) = (domain.lower()[0], domain.lower()[1.min(domain.dim() - 1)]);
    let (wx, wy) = (domain.extent(0), domain.extent(1.min(domain.dim() - 1)));
    let size = SVG_SIZE as f64;
    let map = |p: &[f64; 2]| ((p[0] - x0) / wx * size, size - (p[1] - y0) / wy * size);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_SIZE}\" height=\"{SVG_SIZE}\" viewBox=\"0 0 {SVG_SIZE} {SVG_SIZE}\">"
    );
    let _ = writeln!(s, "<style>{STYLE}</style>");
    let _ = writeln!(s, "<rect width=\"{SVG_SIZE}\" height=\"{SVG_SIZE}\" fill=\"#fff\"/>");
    if let Some(model) = density {
        let cell = size / RASTER as f64;
        let mut vals = Vec::with_capacity(RASTER * RASTER);
        let mut x = vec![0.0; domain.dim()];
        for (a, v) in x.iter_mut().enumerate().skip(2) {
            *v = domain.lower()[a] + domain.extent(a) / 2.0;
        }
        for i in 0..RASTER {
            for j in 0..RASTER {
                x[0] = x0 + (i as f64 + 0.5) / RASTER as f64 * wx;
                x[1] = y0 + (j as f64 + 0.5) / RASTER as f64 * wy;
                vals.push(model.density_unchecked(&x));
            }
        }
        let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        let _ = writeln!(s, "<g class=\"density\">");
        for i in 0..RASTER {
            for j in 0..RASTER {
                let v = vals[i * RASTER + j];
                let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
                let g = (235.0 - 175.0 * t).round() as u8;
                let _ = writeln!(
                    s,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({g},{g},{g})\"/>",
                    i as f64 * cell,
                    size - (j + 1) as f64 * cell,
                    cell,
                    cell
                );
            }
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "<g class=\"points\">");
    for (p, class) in points {
        let (cx, cy) = map(p);
        let _ = writeln!(s, "<circle class=\"{class}\" cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"1.2\"/>");
    }
    let _ = writeln!(s, "</g>");
    for path in paths {
        let coords: Vec<String> = path
            .points
            .iter()
            .map(|p| {
                let (x, y) = map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(s, "<polyline class=\"{}\" points=\"{}\"/>", path.class, coords.join(" "));
    }
    s.push_str("</svg>\n");
    s
}

/// Writes [`render_svg`] output for a sample over its density.
pub fn emit_svg_paths(model: &DensityModel, points: &SampleSet, paths: &[SvgPath], path: &Path) -> Result<()> {
    if model.dim() < 2 {
        return Err(Error::InvalidArgument("figures need at least two dimensions".into()));
    }
    let pts: Vec<([f64; 2], &str)> = points.iter().map(|p| ([p[0], p[1]], "pt")).collect();
    let svg = render_svg(model.domain(), Some(model), &pts, paths);
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}

/// `<outdir>/<experiment>/<timestamp>`, created on demand. A numeric
/// suffix keeps repeated runs within one second apart.
pub fn run_directory(outdir: &Path, experiment: &str) -> Result<PathBuf> {
    let stamp = chrono_stamp();
    let base = outdir.join(experiment);
    let mut dir = base.join(&stamp);
    let mut i = 1;
    while dir.exists() {
        dir = base.join(format!("{stamp}-{i}"));
        i += 1;
    }
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn chrono_stamp() -> String {
    chrono::Utc::now().format("%Y%m%dT%H%M%S").to_string()
}
