//! SVG figures: top view, side profile and yaw-rate trace.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::world::World;

use super::log::TrajectoryLog;

const SIZE: (u32, u32) = (900, 640);

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Plot(e.to_string())
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (-1.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(1.0);
    (lo - pad, hi + pad)
}

fn extent<I: Iterator<Item = f64>>(values: I) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn label(log: &TrajectoryLog) -> String {
    if log.algo.is_empty() {
        "trajectory".to_string()
    } else {
        format!("{} (seed {})", log.algo, log.seed)
    }
}

/// Writes `<stem>_top.svg`, `<stem>_side.svg` and `<stem>_yaw.svg` into
/// `dir`, overlaying every log. Obstacle outlines are drawn when a world is
/// given.
pub fn emit_plots(logs: &[TrajectoryLog], world: Option<&World>, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    if logs.is_empty() {
        return Err(Error::Plot("no logs to plot".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let top = dir.join(format!("{stem}_top.svg"));
    let side = dir.join(format!("{stem}_side.svg"));
    let yaw = dir.join(format!("{stem}_yaw.svg"));
    top_view(logs, world, &top)?;
    series(logs, &side, "Side profile", "x (m)", "z (m)", |r| (r.x, r.z))?;
    series(logs, &yaw, "Yaw rate", "t (s)", "r (rad/s)", |r| (r.time, r.yaw_rate))?;
    Ok(vec![top, side, yaw])
}

fn top_view(logs: &[TrajectoryLog], world: Option<&World>, path: &Path) -> Result<()> {
    let outlines: Vec<Vec<(f64, f64)>> = world
        .map(|w| w.obstacles.iter().map(|o| o.outline_xy(48)).collect())
        .unwrap_or_default();
    let pts = logs.iter().flat_map(|l| l.records.iter().map(|r| (r.x, r.y)));
    let (xr, yr) = {
        let all: Vec<(f64, f64)> = pts.collect();
        (extent(all.iter().map(|p| p.0)), extent(all.iter().map(|p| p.1)))
    };
    let (x, y) = (padded(xr.0 - 20.0, xr.1 + 20.0), padded(yr.0 - 20.0, yr.1 + 20.0));
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Top view", ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(48)
        .build_cartesian_2d(x.0..x.1, y.0..y.1)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("x (m)")
        .y_desc("y (m)")
        .draw()
        .map_err(plot_err)?;
    for o in outlines {
        let clipped: Vec<(f64, f64)> = o
            .into_iter()
            .map(|(a, b)| (a.clamp(x.0, x.1), b.clamp(y.0, y.1)))
            .collect();
        chart
            .draw_series(std::iter::once(Polygon::new(clipped, RGBColor(150, 150, 150).mix(0.5).filled())))
            .map_err(plot_err)?;
    }
    draw_lines(&mut chart, logs, |r| (r.x, r.y))?;
    root.present().map_err(plot_err)?;
    Ok(())
}

fn series(
    logs: &[TrajectoryLog],
    path: &Path,
    caption: &str,
    x_desc: &str,
    y_desc: &str,
    f: impl Fn(&super::log::LogRecord) -> (f64, f64) + Copy,
) -> Result<()> {
    let all: Vec<(f64, f64)> = logs.iter().flat_map(|l| l.records.iter().map(f)).collect();
    let x = padded(extent(all.iter().map(|p| p.0)).0, extent(all.iter().map(|p| p.0)).1);
    let (ylo, yhi) = extent(all.iter().map(|p| p.1));
    let pad = ((yhi - ylo) * 0.1).max(0.05);
    let y = if ylo.is_finite() { (ylo - pad, yhi + pad) } else { (-1.0, 1.0) };
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(caption, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(56)
        .build_cartesian_2d(x.0..x.1, y.0..y.1)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc(x_desc)
        .y_desc(y_desc)
        .draw()
        .map_err(plot_err)?;
    draw_lines(&mut chart, logs, f)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

type Chart<'a> = ChartContext<'a, SVGBackend<'a>, Cartesian2d<plotters::coord::types::RangedCoordf64, plotters::coord::types::RangedCoordf64>>;

fn draw_lines<'a>(
    chart: &mut Chart<'a>,
    logs: &[TrajectoryLog],
    f: impl Fn(&super::log::LogRecord) -> (f64, f64),
) -> Result<()> {
    for (k, log) in logs.iter().enumerate() {
        let color = Palette99::pick(k).to_rgba();
        chart
            .draw_series(LineSeries::new(log.records.iter().map(&f), color.stroke_width(2)))
            .map_err(plot_err)?
            .label(label(log))
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
    }
    if logs.len() > 1 {
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(plot_err)?;
    }
    Ok(())
}
