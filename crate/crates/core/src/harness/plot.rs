//! Static SVG of residual histories: `log10(R)` against iteration.

use super::csv::History;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Vertical extent in whole decades.
fn decades(series: &[History]) -> (i32, i32) {
    let logs = series.iter().flat_map(|h| h.points.iter()).map(|p| p.1).filter(|r| *r > 0.0 && r.is_finite());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in logs {
        lo = lo.min(r.log10());
        hi = hi.max(r.log10());
    }
    if !lo.is_finite() {
        return (-1, 0);
    }
    let (lo, hi) = (lo.floor() as i32, hi.ceil() as i32);
    if lo == hi {
        (lo, hi + 1)
    } else {
        (lo, hi)
    }
}

fn tick_step(max: usize) -> usize {
    let mut step = 1;
    loop {
        for m in [1, 2, 5] {
            if max / (step * m) <= 10 {
                return step * m;
            }
        }
        step *= 10;
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render(series: &[History]) -> String {
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let (lo, hi) = decades(series);
    let xmax = series.iter().flat_map(|h| h.points.iter()).map(|p| p.0).max().unwrap_or(0).max(1);
    let px = |it: usize| LEFT + it as f64 / xmax as f64 * pw;
    let py = |lg: f64| TOP + (hi as f64 - lg.clamp(lo as f64, hi as f64)) / (hi - lo) as f64 * ph;

    let mut s = String::new();
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += &format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    );
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += &format!(
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>\n"
    );

    s += "<g font-family=\"sans-serif\" font-size=\"11\" stroke=\"#dddddd\">\n";
    for d in lo..=hi {
        let y = py(d as f64);
        s += &format!("<line x1=\"{LEFT}\" y1=\"{y:.3}\" x2=\"{:.3}\" y2=\"{y:.3}\"/>\n", LEFT + pw);
        s += &format!(
            "<text x=\"{:.3}\" y=\"{:.3}\" text-anchor=\"end\" stroke=\"none\" fill=\"black\">1e{d}</text>\n",
            LEFT - 6.0,
            y + 4.0
        );
    }
    let step = tick_step(xmax);
    for it in (0..=xmax).step_by(step) {
        let x = px(it);
        s += &format!("<line x1=\"{x:.3}\" y1=\"{TOP}\" x2=\"{x:.3}\" y2=\"{:.3}\"/>\n", TOP + ph);
        s += &format!(
            "<text x=\"{x:.3}\" y=\"{:.3}\" text-anchor=\"middle\" stroke=\"none\" fill=\"black\">{it}</text>\n",
            TOP + ph + 16.0
        );
    }
    s += "</g>\n";
    s += &format!(
        "<text x=\"{:.3}\" y=\"{:.3}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">iteration</text>\n",
        LEFT + pw / 2.0,
        HEIGHT - 12.0
    );
    s += &format!(
        "<text x=\"16\" y=\"{:.3}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.3})\">R</text>\n",
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (n, h) in series.iter().enumerate() {
        let colour = PALETTE[n % PALETTE.len()];
        let pts: Vec<String> = h
            .points
            .iter()
            .filter(|p| !p.1.is_nan())
            .map(|&(it, r)| {
                let lg = if r > 0.0 { r.log10() } else { lo as f64 };
                format!("{:.3},{:.3}", px(it), py(lg))
            })
            .collect();
        s += &format!(
            "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.join(" ")
        );
        let ly = TOP + 10.0 + 18.0 * n as f64;
        let lx = LEFT + pw + 12.0;
        s += &format!(
            "<line x1=\"{lx:.3}\" y1=\"{ly:.3}\" x2=\"{:.3}\" y2=\"{ly:.3}\" stroke=\"{colour}\" stroke-width=\"2\"/>\n",
            lx + 20.0
        );
        s += &format!(
            "<text x=\"{:.3}\" y=\"{:.3}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            lx + 26.0,
            ly + 4.0,
            escape(&h.label)
        );
    }
    s += "</svg>\n";
    s
}
