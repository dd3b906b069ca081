//! Standalone SVG line charts: estimate against log set size, one series per
//! operator, with the fitted power of log n overlaid when a fit is possible.

use super::{fit_exponent, NormEstimate};
use std::collections::BTreeMap;
use std::fmt::Write;

const W: f64 = 720.0;
const H: f64 = 480.0;
const ML: f64 = 70.0;
const MR: f64 = 25.0;
const MT: f64 = 30.0;
const MB: f64 = 55.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub fn render_svg(rows: &[NormEstimate]) -> String {
    let mut series: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for r in rows {
        series.entry(r.operator.clone()).or_default().push((r.set_size, r.value));
    }
    for pts in series.values_mut() {
        pts.sort_by_key(|p| p.0);
    }

    let xs: Vec<f64> = rows.iter().map(|r| (r.set_size.max(2) as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let (xmin, xmax) = bounds(&xs, 0.05);
    let (ymin, ymax) = bounds(&ys, 0.1);
    let sx = move |x: f64| ML + (x - xmin) / (xmax - xmin) * (W - ML - MR);
    let sy = move |y: f64| H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    );
    // axes
    let _ = write!(
        svg,
        "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR,
        H - MB,
        H - MB
    );
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">log #directions</text>\n\
         <text x=\"18\" y=\"{}\" transform=\"rotate(-90 18 {})\" text-anchor=\"middle\" font-size=\"13\">estimate</text>\n",
        (ML + W - MR) / 2.0,
        H - 14.0,
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0
    );
    // y ticks
    for i in 0..=4 {
        let y = ymin + (ymax - ymin) * i as f64 / 4.0;
        let py = sy(y);
        let _ = write!(
            svg,
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{ML}\" y2=\"{py}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\">{y:.3}</text>\n",
            ML - 5.0,
            ML - 8.0,
            py + 4.0
        );
    }

    for (si, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        // fitted curve first so the data sits on top
        if let Ok(fit) = fit_exponent(pts) {
            let mut d = String::new();
            for i in 0..=60 {
                let x = xmin + (xmax - xmin) * i as f64 / 60.0;
                let v = fit.log_c.exp() * x.max(1e-9).powf(fit.alpha);
                let cmd = if i == 0 { 'M' } else { 'L' };
                let _ = write!(d, "{cmd}{:.2} {:.2} ", sx(x), sy(v.clamp(ymin, ymax)));
            }
            let _ = write!(
                svg,
                "<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-dasharray=\"5 4\" opacity=\"0.6\"/>\n"
            );
        }
        let mut d = String::new();
        for (i, (n, v)) in pts.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{cmd}{:.2} {:.2} ", sx((*n as f64).ln()), sy(*v));
        }
        let _ = write!(svg, "<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n");
        for (n, v) in pts {
            let _ = write!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                sx((*n as f64).ln()),
                sy(*v)
            );
        }
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{name}</text>\n",
            W - MR - 170.0,
            MT + 16.0 * si as f64 + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(vals: &[f64], pad: f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let span = hi - lo;
    (lo - pad * span, hi + pad * span)
}
