//! Minimal SVG line plots. Decorative output only; nothing reads these
//! back.

/// Render one curve as an SVG polyline with a frame and axis labels.
pub fn line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    xs: &[f64],
    ys: &[f64],
) -> String {
    let (w, h) = (860.0, 520.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 50.0);
    let finite: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| (x, y))
        .collect();
    let (x0, x1) = bounds(finite.iter().map(|p| p.0));
    let (y0, y1) = bounds(finite.iter().map(|p| p.1));
    let sx = |x: f64| ml + (x - x0) / (x1 - x0).max(f64::MIN_POSITIVE) * (w - ml - mr);
    let sy = |y: f64| h - mb - (y - y0) / (y1 - y0).max(f64::MIN_POSITIVE) * (h - mt - mb);
    let points: Vec<String> = finite
        .iter()
        .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
        .collect();
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<rect x=\"{ml}\" y=\"{mt}\" width=\"{iw}\" height=\"{ih}\" fill=\"none\" ",
            "stroke=\"#444\"/>\n",
            "<text x=\"{tx}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" ",
            "font-size=\"15\">{title}</text>\n",
            "<text x=\"{tx}\" y=\"{bx}\" text-anchor=\"middle\" font-family=\"sans-serif\" ",
            "font-size=\"12\">{xl} [{x0:.4e} .. {x1:.4e}]</text>\n",
            "<text x=\"16\" y=\"{my}\" text-anchor=\"middle\" font-family=\"sans-serif\" ",
            "font-size=\"12\" transform=\"rotate(-90 16 {my})\">{yl} [{y0:.4e} .. {y1:.4e}]</text>\n",
            "<polyline fill=\"none\" stroke=\"#1f4e8c\" stroke-width=\"1.2\" points=\"{pts}\"/>\n",
            "</svg>\n"
        ),
        w = w,
        h = h,
        ml = ml,
        mt = mt,
        iw = w - ml - mr,
        ih = h - mt - mb,
        tx = ml + (w - ml - mr) / 2.0,
        bx = h - 14.0,
        my = h / 2.0,
        title = title,
        xl = x_label,
        yl = y_label,
        x0 = x0,
        x1 = x1,
        y0 = y0,
        y1 = y1,
        pts = points.join(" "),
    )
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}
