//! Bare-bones SVG: axes, polylines and dot markers.

use std::fmt::Write as _;

use crate::boundary::Boundary;
use crate::montecarlo::Cluster;
use crate::performance::MesaGrid;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
/// Markers drawn per cluster; the CSV keeps all points.
pub const MAX_MARKERS: usize = 2000;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * MARGIN)
    }

    fn open(&self, xlabel: &str, ylabel: &str) -> String {
        let mut s = format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
        );
        let (x0, x1, y0, y1) = (self.px(self.x.0), self.px(self.x.1), self.py(self.y.0), self.py(self.y.1));
        let _ = writeln!(s, "<g stroke=\"black\" fill=\"none\"><line x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{x1:.1}\" y2=\"{y0:.1}\"/><line x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{x0:.1}\" y2=\"{y1:.1}\"/></g>");
        let _ = writeln!(s, "<g font-family=\"sans-serif\" font-size=\"11\">");
        for t in 0..=4 {
            let f = t as f64 / 4.0;
            let (xv, yv) = (self.x.0 + f * (self.x.1 - self.x.0), self.y.0 + f * (self.y.1 - self.y.0));
            let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>", self.px(xv), y0 + 16.0, tick(xv));
            let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>", x0 - 6.0, self.py(yv) + 4.0, tick(yv));
        }
        let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>", W / 2.0, H - 12.0, escape(xlabel));
        let _ = writeln!(s, "<text x=\"14\" y=\"{:.1}\" transform=\"rotate(-90 14 {:.1})\" text-anchor=\"middle\">{}</text>", H / 2.0, H / 2.0, escape(ylabel));
        s.push_str("</g>\n");
        s
    }

    fn path(&self, pts: &[Option<(f64, f64)>]) -> String {
        let mut d = String::new();
        let mut pen_down = false;
        for p in pts {
            match p {
                Some((x, y)) => {
                    let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, self.px(*x), self.py(*y));
                    pen_down = true;
                }
                None => pen_down = false,
            }
        }
        d.trim_end().to_string()
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn legend(s: &mut String, labels: &[String]) {
    for (i, l) in labels.iter().enumerate() {
        let y = MARGIN + 14.0 * i as f64;
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{y:.1}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{}\">{}</text>",
            W - MARGIN - 150.0,
            PALETTE[i % PALETTE.len()],
            escape(l)
        );
    }
}

/// Iso-Pd contours over the (cos²θ, SNR) plane: one `<path>` per detector
/// and level.
pub fn mesa_contours(grids: &[(String, MesaGrid)], levels: &[f64]) -> String {
    let (mut lmin, mut lmax, mut gmin, mut gmax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (_, g) in grids {
        for &l in &g.lambda {
            lmin = lmin.min(l);
            lmax = lmax.max(l);
        }
        for &x in &g.gamma_db {
            gmin = gmin.min(x);
            gmax = gmax.max(x);
        }
    }
    if !(lmax > lmin) {
        lmax = lmin + 1.0;
    }
    if !(gmax > gmin) {
        gmax = gmin + 1.0;
    }
    let fr = Frame { x: (lmin, lmax), y: (gmin, gmax) };
    let mut s = fr.open("cos² θ", "SNR (dB)");
    for (i, (label, g)) in grids.iter().enumerate() {
        let mut order: Vec<usize> = (0..g.lambda.len()).collect();
        order.sort_by(|&a, &b| g.lambda[a].total_cmp(&g.lambda[b]));
        for (li, &level) in levels.iter().enumerate() {
            let c = g.iso_contour(level);
            let pts: Vec<Option<(f64, f64)>> = order.iter().map(|&j| c[j].map(|y| (g.lambda[j], y))).collect();
            let dash = ["", " stroke-dasharray=\"6 3\"", " stroke-dasharray=\"2 2\""][li % 3];
            let _ = writeln!(
                s,
                "<path data-label=\"{}\" data-level=\"{level}\" d=\"{}\" stroke=\"{}\" fill=\"none\" stroke-width=\"1.5\"{dash}/>",
                escape(label),
                fr.path(&pts),
                PALETTE[i % PALETTE.len()]
            );
        }
    }
    legend(&mut s, &grids.iter().map(|(l, _)| l.clone()).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

/// Feature-plane scatter with boundary overlays.
pub fn feature_scatter(clusters: &[Cluster], boundaries: &[(String, Boundary)]) -> String {
    let mut ts: Vec<f64> = clusters.iter().flat_map(|c| c.points.iter().map(|p| p.t_tilde)).collect();
    ts.sort_by(f64::total_cmp);
    let top = ts.get(ts.len().saturating_sub(1) * 99 / 100).copied().unwrap_or(1.0).max(1e-3);
    let fr = Frame { x: (0.0, 1.0), y: (0.0, top) };
    let mut s = fr.open("β", "t̃");
    for (i, c) in clusters.iter().enumerate() {
        let _ = writeln!(s, "<g fill=\"{}\" fill-opacity=\"0.4\" data-label=\"{}\">", PALETTE[i % PALETTE.len()], escape(&c.label));
        for p in c.points.iter().filter(|p| p.t_tilde <= top).take(MAX_MARKERS) {
            let _ = writeln!(s, "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"1.5\"/>", fr.px(p.beta), fr.py(p.t_tilde));
        }
        s.push_str("</g>\n");
    }
    for (label, b) in boundaries {
        let pts: Vec<Option<(f64, f64)>> = (0..=400)
            .map(|j| {
                let x = j as f64 / 400.0;
                Some((x, b.value(x).min(top)))
            })
            .collect();
        let _ = writeln!(s, "<path data-label=\"{}\" d=\"{}\" stroke=\"black\" fill=\"none\" stroke-width=\"1.5\"/>", escape(label), fr.path(&pts));
    }
    legend(&mut s, &clusters.iter().map(|c| c.label.clone()).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}
