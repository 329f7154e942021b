//! Machine-readable and graphical output of stability paths.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Result, StadionError};
use crate::stability::{trade_off_table, Aggregation, SelectionReport, StadionPath, TradeOffRow};

pub const CSV_HEADER: &str = "K,epsilon,stab_b,stab_w,stadion";

/// One row per (K, ε). Floats use the shortest representation that parses
/// back to the same value.
pub fn paths_csv(paths: &[StadionPath]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in paths {
        for i in 0..p.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                p.k, p.epsilons[i], p.stab_b[i], p.stab_w[i], p.stadion[i]
            );
        }
    }
    out
}

pub fn report_json(report: &SelectionReport) -> Result<String> {
    let mut s =
        serde_json::to_string_pretty(report).map_err(|e| StadionError::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn paths_json(paths: &[StadionPath]) -> Result<String> {
    let mut s =
        serde_json::to_string_pretty(paths).map_err(|e| StadionError::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| StadionError::io(path, std::io::Error::other("not a file path")))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(StadionError::io(path, e));
    }
    Ok(())
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

const PANEL_W: f64 = 460.0;
const PANEL_H: f64 = 340.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 46.0;

struct Frame {
    x0: f64,
    y0: f64,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let w = PANEL_W - MARGIN_L - MARGIN_R;
        self.x0 + MARGIN_L + (x - self.xmin) / (self.xmax - self.xmin) * w
    }

    fn py(&self, y: f64) -> f64 {
        let h = PANEL_H - MARGIN_T - MARGIN_B;
        self.y0 + MARGIN_T + (self.ymax - y) / (self.ymax - self.ymin) * h
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn axes(svg: &mut String, f: &Frame, title: &str, xlabel: &str) {
    let (l, r) = (f.px(f.xmin), f.px(f.xmax));
    let (t, b) = (f.py(f.ymax), f.py(f.ymin));
    let _ = writeln!(
        svg,
        r##"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#000" stroke-width="1"/>"##,
        r - l,
        b - t
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{title}</text>"#,
        (l + r) / 2.0,
        f.y0 + 22.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{xlabel}</text>"#,
        (l + r) / 2.0,
        b + 36.0
    );
    for i in 0..=4 {
        let fx = f.xmin + (f.xmax - f.xmin) * i as f64 / 4.0;
        let fy = f.ymin + (f.ymax - f.ymin) * i as f64 / 4.0;
        let (x, y) = (f.px(fx), f.py(fy));
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{b:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000"/><text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="10">{fx:.2}</text>"##,
            b + 4.0,
            b + 16.0
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{l:.2}" y2="{y:.2}" stroke="#000"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{fy:.2}</text>"##,
            l - 4.0,
            l - 6.0,
            y + 3.0
        );
    }
}

fn polyline(svg: &mut String, f: &Frame, xs: &[f64], ys: &[f64], color: &str, label: &str) {
    let points: Vec<String> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
        .collect();
    let _ = writeln!(
        svg,
        r#"<polyline data-series="{label}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
        points.join(" ")
    );
}

fn legend(svg: &mut String, f: &Frame, entries: &[(String, &str)]) {
    let x = f.px(f.xmax) - 70.0;
    for (i, (label, color)) in entries.iter().enumerate() {
        let y = f.py(f.ymax) + 12.0 + 13.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-size="10">{label}</text>"#,
            x + 16.0,
            x + 20.0,
            y + 3.0
        );
    }
}

fn path_panel(
    svg: &mut String,
    x0: f64,
    y0: f64,
    paths: &[StadionPath],
    title: &str,
    pick: fn(&StadionPath) -> &[f64],
) {
    let xs = paths.first().map(|p| p.epsilons.as_slice()).unwrap_or(&[]);
    let (xmin, xmax) = range(xs.iter().copied());
    let xmin = if xs.is_empty() { xmin } else { xs[0] };
    let xmax = if xs.len() > 1 { xs[xs.len() - 1] } else { xmax };
    let (ymin, ymax) = range(paths.iter().flat_map(|p| pick(p).iter().copied()));
    let f = Frame {
        x0,
        y0,
        xmin,
        xmax,
        ymin,
        ymax,
    };
    axes(svg, &f, title, "epsilon");
    let _ = writeln!(svg, r#"<g class="paths">"#);
    let mut entries = Vec::new();
    for (i, p) in paths.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let label = format!("K={}", p.k);
        polyline(svg, &f, &p.epsilons, pick(p), color, &label);
        entries.push((label, color));
    }
    let _ = writeln!(svg, "</g>");
    legend(svg, &f, &entries[..entries.len().min(20)]);
}

fn trade_off_panel(svg: &mut String, x0: f64, y0: f64, rows: &[TradeOffRow], agg: Aggregation) {
    let ks: Vec<f64> = rows.iter().map(|r| r.k as f64).collect();
    let (mut xmin, mut xmax) = (
        ks.first().copied().unwrap_or(0.0),
        ks.last().copied().unwrap_or(1.0),
    );
    if xmax <= xmin {
        xmin -= 0.5;
        xmax += 0.5;
    }
    let (ymin, ymax) = range(rows.iter().flat_map(|r| [r.stab_b, r.stab_w, r.stadion]));
    let f = Frame {
        x0,
        y0,
        xmin,
        xmax,
        ymin,
        ymax,
    };
    axes(svg, &f, &format!("Trade-off ({agg})"), "K");
    let series: [(&str, &str, Vec<f64>); 3] = [
        (
            "stab_b",
            PALETTE[0],
            rows.iter().map(|r| r.stab_b).collect(),
        ),
        (
            "stab_w",
            PALETTE[1],
            rows.iter().map(|r| r.stab_w).collect(),
        ),
        (
            "stadion",
            PALETTE[3],
            rows.iter().map(|r| r.stadion).collect(),
        ),
    ];
    let _ = writeln!(svg, r#"<g class="trade-off">"#);
    for (name, color, ys) in &series {
        polyline(svg, &f, &ks, ys, color, name);
    }
    let _ = writeln!(svg, "</g>");
    let entries: Vec<(String, &str)> = series.iter().map(|(n, c, _)| (n.to_string(), *c)).collect();
    legend(svg, &f, &entries);
}

/// Four panels: between-cluster, within-cluster and Stadion paths, and the
/// per-K trade-off under `agg`.
pub fn paths_svg(
    paths: &[StadionPath],
    trade_off: Option<(&[TradeOffRow], Aggregation)>,
) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#,
        w = 2.0 * PANEL_W,
        h = 2.0 * PANEL_H
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="#fff"/>"##);
    path_panel(
        &mut svg,
        0.0,
        0.0,
        paths,
        "Between-cluster stability",
        |p| &p.stab_b,
    );
    path_panel(
        &mut svg,
        PANEL_W,
        0.0,
        paths,
        "Within-cluster stability",
        |p| &p.stab_w,
    );
    path_panel(&mut svg, 0.0, PANEL_H, paths, "Stadion", |p| &p.stadion);
    if let Some((rows, agg)) = trade_off {
        trade_off_panel(&mut svg, PANEL_W, PANEL_H, rows, agg);
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn report_svg(report: &SelectionReport) -> String {
    let rows = trade_off_table(report);
    paths_svg(&report.paths, Some((&rows, report.aggregation)))
}
