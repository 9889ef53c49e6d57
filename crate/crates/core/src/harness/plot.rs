//! SVG figures from a run directory.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::learner::LearnReport;

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Plot(e.to_string())
}

/// `(lo, hi)` padded by a factor on both sides, for a log axis.
fn log_bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| *v > 0.0 && v.is_finite())
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    (hi > 0.0).then(|| (lo / 2.0, hi * 2.0))
}

fn loglog_svg(path: &Path, title: &str, xlab: &str, ylab: &str, pts: &[(f64, f64)], log_x: bool) -> Result<()> {
    let (y0, y1) = log_bounds(pts.iter().map(|p| p.1)).ok_or_else(|| Error::Plot(format!("{title}: no positive values")))?;
    let (xmin, xmax) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let root = SVGBackend::new(path, (640, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut builder = ChartBuilder::on(&root);
    builder.caption(title, ("sans-serif", 20)).margin(12).x_label_area_size(40).y_label_area_size(70);
    macro_rules! draw {
        ($chart:expr) => {{
            let mut chart = $chart;
            chart.configure_mesh().x_desc(xlab).y_desc(ylab).draw().map_err(plot_err)?;
            chart.draw_series(LineSeries::new(pts.iter().copied(), &BLUE)).map_err(plot_err)?;
            chart
                .draw_series(pts.iter().map(|&p| Circle::new(p, 3, BLUE.filled())))
                .map_err(plot_err)?;
        }};
    }
    if log_x {
        let (x0, x1) = log_bounds(pts.iter().map(|p| p.0)).unwrap_or((0.5, 2.0));
        draw!(builder.build_cartesian_2d((x0..x1).log_scale(), (y0..y1).log_scale()).map_err(plot_err)?);
    } else {
        let pad = ((xmax - xmin) * 0.05).max(0.5);
        draw!(builder.build_cartesian_2d((xmin - pad)..(xmax + pad), (y0..y1).log_scale()).map_err(plot_err)?);
    }
    root.present().map_err(plot_err)?;
    Ok(())
}

/// `(param, measured)` for rows labelled `error` in a sweep CSV.
fn sweep_errors(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut pts = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if &rec[1] == "error" {
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Plot(format!("{}: {e}", path.display())));
            pts.push((parse(&rec[2])?, parse(&rec[3])?));
        }
    }
    Ok(pts)
}

/// Writes every figure the directory has data for and returns their paths.
///
/// Learn reports give an error-versus-shots figure; `lr.csv` and
/// `trotter.csv` from `verify` give sweeps on a logarithmic error axis.
pub fn plot_run(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::Plot(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    if entries.is_empty() {
        return Err(Error::Plot(format!("{} is empty", dir.display())));
    }
    let mut written = Vec::new();
    let mut reports: Vec<LearnReport> = entries
        .iter()
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("report_") && n.ends_with(".json")))
        .map(|p| LearnReport::read_json(p))
        .collect::<Result<_>>()?;
    if !reports.is_empty() {
        reports.sort_by_key(|r| (r.shots_per_setting, r.seed));
        let pts: Vec<(f64, f64)> = reports
            .iter()
            .map(|r| ((r.shots_per_setting.max(1)) as f64, r.max_error.max(f64::MIN_POSITIVE)))
            .collect();
        let path = dir.join("error_vs_samples.svg");
        loglog_svg(&path, "coefficient error", "shots per setting", "max |λ̂ - λ|", &pts, true)?;
        written.push(path);
    }
    for (file, title, xlab, log_x) in [
        ("lr.csv", "localized evolution error", "radius", false),
        ("trotter.csv", "product formula error", "steps n", true),
    ] {
        let src = dir.join(file);
        if src.is_file() {
            let pts = sweep_errors(&src)?;
            if !pts.is_empty() {
                let path = src.with_extension("svg");
                loglog_svg(&path, title, xlab, "error", &pts, log_x)?;
                written.push(path);
            }
        }
    }
    if written.is_empty() {
        return Err(Error::Plot(format!("no learn reports or sweep tables in {}", dir.display())));
    }
    Ok(written)
}
