//! Minimal SVG emission: scree plot, the five-zone fit-versus-zero-ratio
//! map, and dimension-pair factor maps. Pure string rendering of a
//! [`ResultBundle`](crate::bundle::ResultBundle); nothing here touches the
//! numbers.

use crate::bundle::ResultBundle;
use crate::tuning::ZoneThresholds;

const W: f64 = 560.0;
const H: f64 = 420.0;
const MARGIN: f64 = 56.0;

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        W / 2.0,
        escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Bar scree plot of the eigenvalues with their inertia percentages.
pub fn scree_svg(bundle: &ResultBundle) -> String {
    let eig = &bundle.eigenvalues;
    let mut out = header(&format!("Scree plot ({})", bundle.method));
    let max = eig.iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
    let plot_w = W - 2.0 * MARGIN;
    let plot_h = H - 2.0 * MARGIN;
    let n = eig.len().max(1) as f64;
    let slot = plot_w / n;
    for (l, &e) in eig.iter().enumerate() {
        let bar_h = plot_h * (e / max);
        let x = MARGIN + slot * l as f64 + slot * 0.15;
        let y = H - MARGIN - bar_h;
        out.push_str(&format!(
            "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{:.1}\" height=\"{bar_h:.1}\" \
             fill=\"#7a5195\"/>\n",
            slot * 0.7
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            x + slot * 0.35,
            H - MARGIN + 14.0,
            l + 1
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"9\">{:.4} ({:.1}%)</text>\n",
            x + slot * 0.35,
            y - 4.0,
            e,
            bundle.percent_inertia.get(l).copied().unwrap_or(0.0)
        ));
    }
    out.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        H - MARGIN,
        W - MARGIN,
        H - MARGIN
    ));
    out.push_str("</svg>\n");
    out
}

/// Fit-versus-zero-ratio map with the five zones shaded and every tuning
/// cell plotted; the argmax cell is highlighted.
pub fn sparsity_map_svg(bundle: &ResultBundle, thresholds: &ZoneThresholds) -> String {
    let mut out = header("Fit vs zero ratio");
    let plot_w = W - 2.0 * MARGIN;
    let plot_h = H - 2.0 * MARGIN;
    let sx = |zr: f64| MARGIN + plot_w * zr;
    let sy = |fit: f64| H - MARGIN - plot_h * fit;
    let lo = thresholds.near_zero;
    let hi = thresholds.high;
    // Zone shading: 1 bottom-left, 2 left column, 3 bottom strip,
    // 4 top-right corner, 5 the rest.
    let zones: [(f64, f64, f64, f64, &str, &str); 5] = [
        (0.0, 0.0, lo, lo, "#d9d9d9", "1"),
        (0.0, lo, lo, 1.0, "#c6dbef", "2"),
        (lo, 0.0, 1.0, lo, "#fdd0a2", "3"),
        (hi, hi, 1.0, 1.0, "#a1d99b", "4"),
        (lo, lo, 1.0, 1.0, "#f2f0f7", "5"),
    ];
    // Paint zone 5 first so the corner zones sit on top of it.
    for &idx in &[4usize, 0, 1, 2, 3] {
        let (x0, y0, x1, y1, fill, label) = zones[idx];
        out.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{fill}\" \
             fill-opacity=\"0.8\"/>\n",
            sx(x0),
            sy(y1),
            plot_w * (x1 - x0),
            plot_h * (y1 - y0),
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" fill=\"#555\">{label}</text>\n",
            sx((x0 + x1) / 2.0),
            sy((y0 + y1) / 2.0),
        ));
    }
    if let Some(grid) = &bundle.tuning {
        for (i, cell) in grid.cells.iter().enumerate() {
            if let Some(s) = &cell.indices {
                let best = grid.best == Some(i);
                let (r, color) = if best { (6.0, "#bc5090") } else { (3.0, "#003f5c") };
                out.push_str(&format!(
                    "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"{r}\" fill=\"{color}\"/>\n",
                    sx(s.zero_ratio),
                    sy(s.fit)
                ));
            }
        }
    } else if let Some(sparsity) = &bundle.sparsity {
        if let Some(s) = &sparsity.indices {
            out.push_str(&format!(
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"6\" fill=\"#bc5090\"/>\n",
                sx(s.zero_ratio),
                sy(s.fit)
            ));
        }
    }
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">zero ratio</text>\n",
        W / 2.0,
        H - 18.0
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">fit</text>\n",
        H / 2.0,
        H / 2.0
    ));
    out.push_str("</svg>\n");
    out
}

/// Symmetric factor map of one dimension pair: rows as circles, columns as
/// triangles, labels alongside.
pub fn factor_map_svg(bundle: &ResultBundle, da: usize, db: usize) -> String {
    let mut out = header(&format!(
        "Factor map: dimensions {} and {} ({})",
        da + 1,
        db + 1,
        bundle.method
    ));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for row in bundle.row_scores.iter().chain(bundle.col_scores.iter()) {
        xs.push(row.get(da).copied().unwrap_or(0.0));
        ys.push(row.get(db).copied().unwrap_or(0.0));
    }
    let span = xs
        .iter()
        .chain(ys.iter())
        .fold(1e-9_f64, |m, v| m.max(v.abs()))
        * 1.15;
    let plot = (W.min(H)) - 2.0 * MARGIN;
    let cx = W / 2.0;
    let cy = H / 2.0;
    let sx = |v: f64| cx + plot / 2.0 * (v / span);
    let sy = |v: f64| cy - plot / 2.0 * (v / span);
    out.push_str(&format!(
        "<line x1=\"{:.1}\" y1=\"{cy:.1}\" x2=\"{:.1}\" y2=\"{cy:.1}\" stroke=\"#bbb\"/>\n",
        cx - plot / 2.0,
        cx + plot / 2.0
    ));
    out.push_str(&format!(
        "<line x1=\"{cx:.1}\" y1=\"{:.1}\" x2=\"{cx:.1}\" y2=\"{:.1}\" stroke=\"#bbb\"/>\n",
        cy - plot / 2.0,
        cy + plot / 2.0
    ));
    for (label, row) in bundle.row_labels.iter().zip(bundle.row_scores.iter()) {
        let x = sx(row.get(da).copied().unwrap_or(0.0));
        let y = sy(row.get(db).copied().unwrap_or(0.0));
        out.push_str(&format!(
            "<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"3\" fill=\"#003f5c\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" fill=\"#003f5c\" font-size=\"9\">{}</text>\n",
            x + 5.0,
            y - 3.0,
            escape(label)
        ));
    }
    for (label, row) in bundle.col_labels.iter().zip(bundle.col_scores.iter()) {
        let x = sx(row.get(da).copied().unwrap_or(0.0));
        let y = sy(row.get(db).copied().unwrap_or(0.0));
        out.push_str(&format!(
            "<path d=\"M {x:.1} {:.1} L {:.1} {:.1} L {:.1} {:.1} Z\" fill=\"#ffa600\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" fill=\"#b26a00\" font-size=\"9\">{}</text>\n",
            y - 4.0,
            x - 3.5,
            y + 3.0,
            x + 3.5,
            y + 3.0,
            x + 5.0,
            y + 9.0,
            escape(label)
        ));
    }
    out.push_str("</svg>\n");
    out
}
