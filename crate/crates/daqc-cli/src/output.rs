//! Result files: atomic writes, versioned CSV tables and SVG line plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

pub const SWEEP_HEADER: &str = "# daqc sweep csv v1";
pub const RUNS_HEADER: &str = "# daqc runs csv v1";
pub const COUPLINGS_HEADER: &str = "# daqc couplings csv v1";

/// Writes to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path.file_name().context("output path has no file name")?.to_string_lossy();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}

/// One row of the sweep table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub sweep_var: f64,
    pub mode: String,
    pub mean_fidelity: Option<f64>,
    pub stderr: Option<f64>,
    pub total_analog_time: Option<f64>,
    pub wall_time: f64,
    pub status: String,
}

impl Row {
    pub fn failed(sweep_var: f64, mode: String, wall_time: f64, err: impl std::fmt::Display) -> Row {
        Row {
            sweep_var,
            mode,
            mean_fidelity: None,
            stderr: None,
            total_analog_time: None,
            wall_time,
            status: format!("error: {err}"),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRow {
    pub sweep_var: f64,
    pub mode: String,
    pub run: usize,
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingRow {
    pub distance: usize,
    pub series: String,
    pub coupling: f64,
}

/// CSV text with a version comment line before the column header.
pub fn csv_table<T: Serialize>(version: &str, rows: &[T]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let body = String::from_utf8(w.into_inner()?)?;
    Ok(format!("{version}\n{body}"))
}

/// Column header of the sweep table, for files with no rows.
pub fn sweep_csv(rows: &[Row]) -> anyhow::Result<String> {
    if rows.is_empty() {
        return Ok(format!(
            "{SWEEP_HEADER}\nsweep_var,mode,mean_fidelity,stderr,total_analog_time,wall_time,status\n"
        ));
    }
    csv_table(SWEEP_HEADER, rows)
}

/// Line chart of `(x, y)` series, one polyline per name.
pub fn svg_plot(title: &str, x_label: &str, y_label: &str, series: &BTreeMap<String, Vec<(f64, f64)>>) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 60.0;
    const COLORS: [&str; 8] = [
        "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
    ];
    let pts: Vec<(f64, f64)> = series.values().flatten().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    let span = |v: Vec<f64>| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        match (lo.is_finite(), hi > lo) {
            (false, _) => (0.0, 1.0),
            (true, true) => (lo, hi),
            (true, false) => (lo - 0.5, lo + 0.5),
        }
    };
    let (x0, x1) = span(pts.iter().map(|p| p.0).collect());
    let (y0, y1) = span(pts.iter().map(|p| p.1).collect());
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="black" points="{M},{M} {M},{} {},{}"/>"#,
        H - M,
        W - M,
        H - M
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, sx(xv), H - M + 16.0, tick(xv));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, M - 6.0, sy(yv) + 4.0, tick(yv));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 16.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    for (i, (name, points)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
        let ly = M + 14.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}">{}</text>"#,
            W - M + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{:.3}", v)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_version_line_and_columns() {
        let rows = vec![
            Row {
                sweep_var: 8.0,
                mode: "sdaqc".into(),
                mean_fidelity: Some(0.9),
                stderr: Some(0.0),
                total_analog_time: Some(1.5),
                wall_time: 0.1,
                status: "ok".into(),
            },
            Row::failed(8.0, "bdaqc@0.1".into(), 0.0, "boom"),
        ];
        let text = sweep_csv(&rows).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(SWEEP_HEADER));
        assert_eq!(
            lines.next(),
            Some("sweep_var,mode,mean_fidelity,stderr,total_analog_time,wall_time,status")
        );
        assert_eq!(lines.next(), Some("8.0,sdaqc,0.9,0.0,1.5,0.1,ok"));
        assert_eq!(lines.next(), Some("8.0,bdaqc@0.1,,,,0.0,error: boom"));
        assert_eq!(sweep_csv(&[]).unwrap().lines().count(), 2);
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = std::env::temp_dir().join(format!("daqc-out-{}", std::process::id()));
        let p = dir.join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn plot_draws_one_line_per_series() {
        let mut series = BTreeMap::new();
        series.insert("a".to_string(), vec![(1.0, 0.5), (2.0, 0.7)]);
        series.insert("b".to_string(), vec![(1.0, 0.6), (2.0, f64::NAN)]);
        let svg = svg_plot("t", "x", "y", &series);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("stroke-width=\"1.5\"").count(), 2);
    }
}
