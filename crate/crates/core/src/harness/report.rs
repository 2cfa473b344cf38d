//! CSV and SVG output for traces and experiment reports.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::fig1::Fig1Triple;
use super::fit::FitTrace;
use super::sweep::ExperimentReport;
use crate::error::Result;

fn num(v: f64) -> String {
    format!("{v}")
}

/// One row per step: `step,cx,cy,w,h,theta,loss,exact_iou,grad_norm`.
pub fn trace_csv(trace: &FitTrace) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["step", "cx", "cy", "w", "h", "theta", "loss", "exact_iou", "grad_norm", "status"])?;
    for r in &trace.records {
        let p = r.params;
        w.write_record([
            r.step.to_string(),
            num(p.cx()),
            num(p.cy()),
            num(p.w()),
            num(p.h()),
            num(p.theta()),
            num(r.loss),
            num(r.exact_iou),
            num(r.grad_norm),
            trace.status.name().to_string(),
        ])?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// Report rows. Wall-clock time is only written when `timings` is set, so
/// that the default output is byte-identical across runs.
pub fn reports_csv(reports: &[ExperimentReport], timings: bool) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["scenario", "loss", "k", "seed", "final_iou", "steps_to_0.9", "steps_run", "status"];
    if timings {
        header.push("wall_clock_s");
    }
    w.write_record(&header)?;
    for r in reports {
        let mut row = vec![
            r.scenario.clone(),
            r.loss.name().to_string(),
            r.k.map(num).unwrap_or_default(),
            r.seed.to_string(),
            num(r.final_iou),
            r.steps_to_reach.map(|s| s.to_string()).unwrap_or_default(),
            r.steps_run.to_string(),
            r.status.name().to_string(),
        ];
        if timings {
            row.push(format!("{:.6}", r.wall_clock.as_secs_f64()));
        }
        w.write_record(&row)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn fig1_csv(triples: &[Fig1Triple]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "gt_w", "gt_h", "pred_a_theta_deg", "compensation", "smooth_l1_a", "smooth_l1_b", "iou_a", "iou_b",
        "piou_loss_a", "piou_loss_b",
    ])?;
    for t in triples {
        w.write_record([
            num(t.gt.w()),
            num(t.gt.h()),
            num(t.pred_a.theta().to_degrees()),
            t.compensation.to_string(),
            num(t.smooth_l1_a),
            num(t.smooth_l1_b),
            num(t.iou_a),
            num(t.iou_b),
            num(t.piou_loss_a),
            num(t.piou_loss_b),
        ])?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// A named polyline for [`svg_line_plot`].
pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Self-contained SVG 1.1 line plot.
pub fn svg_line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>]) -> String {
    let (w, h) = (640.0, 400.0);
    let (left, right, top, bottom) = (64.0, 16.0, 36.0, 48.0);
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let sy = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<line x1="{left}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>
<line x1="{left}" y1="{top}" x2="{left}" y2="{0}" stroke="black"/>"#,
        h - bottom,
        w - right
    );
    for n in 0..=4 {
        let f = n as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>
<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="end">{}</text>"#,
            sx(xv),
            h - bottom + 14.0,
            tick(xv),
            left - 4.0,
            sy(yv) + 3.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>
<text x="14" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        left + (w - left - right) / 2.0,
        h - 10.0,
        escape(x_label),
        top + (h - top - bottom) / 2.0,
        top + (h - top - bottom) / 2.0,
        escape(y_label)
    );
    for (n, s) in series.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>
<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            path.join(" "),
            w - right - 120.0,
            top + 14.0 * (n as f64 + 1.0),
            escape(s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Loss and exact IoU against step, one series each.
pub fn trace_svg(title: &str, trace: &FitTrace) -> String {
    let loss = Series {
        name: "loss",
        points: trace.records.iter().map(|r| (r.step as f64, r.loss)).collect(),
    };
    let iou = Series {
        name: "exact IoU",
        points: trace.records.iter().map(|r| (r.step as f64, r.exact_iou)).collect(),
    };
    svg_line_plot(title, "step", "value", &[loss, iou])
}

/// Final IoU per scenario index, one series per `(loss, k)` combination.
pub fn reports_svg(title: &str, reports: &[ExperimentReport]) -> String {
    let mut keys: Vec<String> = Vec::new();
    for r in reports {
        let key = match r.k {
            Some(k) => format!("{} k={k}", r.loss),
            None => r.loss.to_string(),
        };
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut scenarios: Vec<&str> = Vec::new();
    for r in reports {
        if !scenarios.contains(&r.scenario.as_str()) {
            scenarios.push(&r.scenario);
        }
    }
    let series: Vec<Series<'_>> = keys
        .iter()
        .map(|key| Series {
            name: key,
            points: reports
                .iter()
                .filter(|r| match r.k {
                    Some(k) => format!("{} k={k}", r.loss) == *key,
                    None => r.loss.to_string() == *key,
                })
                .map(|r| {
                    let x = scenarios.iter().position(|s| *s == r.scenario).unwrap_or(0);
                    (x as f64, r.final_iou)
                })
                .collect(),
        })
        .collect();
    svg_line_plot(title, "scenario index", "final exact IoU", &series)
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_well_formed_enough() {
        let s = svg_line_plot(
            "a < b",
            "x",
            "y",
            &[Series {
                name: "s",
                points: vec![(0.0, 1.0), (1.0, 2.0), (2.0, f64::NAN)],
            }],
        );
        assert!(s.starts_with("<?xml"));
        assert!(s.contains("<polyline"));
        assert!(s.contains("a &lt; b"));
        assert!(s.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
