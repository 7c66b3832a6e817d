//! Minimal SVG line charts for response/correction curve CSVs.
//!
//! Input CSV: a header row (`input,output[,more...]`) followed by numeric
//! rows. Column 0 is the x axis; every further column becomes one polyline.
//! Axes are labeled on a 0-100% scale.

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 580.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 460.0;

const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#ff7f0e", "#2ca02c", "#9467bd"];

pub struct Chart {
    pub labels: Vec<String>,
    /// One series of (x, y) points per label.
    pub series: Vec<Vec<(f64, f64)>>,
}

/// Parses a curve CSV into chart series. Errors on an empty file, a header
/// with fewer than two columns, ragged rows, or non-numeric cells.
pub fn parse_curve_csv(text: &str) -> Result<Chart, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("CSV is empty")?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.len() < 2 {
        return Err(format!(
            "CSV header needs at least 2 columns, got `{}`",
            header
        ));
    }
    let labels: Vec<String> = columns[1..].iter().map(|s| s.to_string()).collect();

    let mut series = vec![Vec::new(); labels.len()];
    let mut rows = 0usize;
    for (lineno, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != columns.len() {
            return Err(format!(
                "row {}: expected {} cells, got {}",
                lineno + 2,
                columns.len(),
                cells.len()
            ));
        }
        let mut values = Vec::with_capacity(cells.len());
        for cell in &cells {
            let v: f64 = cell
                .parse()
                .map_err(|_| format!("row {}: bad number `{}`", lineno + 2, cell))?;
            if !v.is_finite() {
                return Err(format!("row {}: non-finite value", lineno + 2));
            }
            values.push(v);
        }
        for (curve, &y) in series.iter_mut().zip(&values[1..]) {
            curve.push((values[0], y));
        }
        rows += 1;
    }
    if rows == 0 {
        return Err("CSV has a header but no data rows".into());
    }
    Ok(Chart { labels, series })
}

fn map_x(x: f64) -> f64 {
    LEFT + x.clamp(0.0, 1.0) * (RIGHT - LEFT)
}

fn map_y(y: f64) -> f64 {
    BOTTOM - y.clamp(0.0, 1.0) * (BOTTOM - TOP)
}

/// Renders the chart as a standalone SVG document.
pub fn render_svg(chart: &Chart) -> String {
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
        w = WIDTH,
        h = HEIGHT
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Gridlines and tick labels every 25%.
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (x, y) = (map_x(f), map_y(f));
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#dddddd\"/>\n",
            x, BOTTOM, x, TOP
        ));
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#dddddd\"/>\n",
            LEFT, y, RIGHT, y
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\">{}%</text>\n",
            x,
            BOTTOM + 20.0,
            i * 25
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"end\">{}%</text>\n",
            LEFT - 8.0,
            y + 4.0,
            i * 25
        ));
    }

    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{l}\" y1=\"{b}\" x2=\"{l}\" y2=\"{t}\" stroke=\"black\"/>\n",
        l = LEFT,
        r = RIGHT,
        t = TOP,
        b = BOTTOM
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"14\" text-anchor=\"middle\">input (%)</text>\n",
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 42.0
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{:.1}\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">output (%)</text>\n",
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0
    ));

    // One polyline per series plus a legend entry.
    for (i, (label, points)) in chart.labels.iter().zip(&chart.series).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", map_x(x), map_y(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n",
            color,
            coords.join(" ")
        ));
        let ly = TOP + 14.0 + 22.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
            RIGHT + 14.0,
            ly,
            RIGHT + 44.0,
            ly,
            color
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\">{}</text>\n",
            RIGHT + 50.0,
            ly + 4.0,
            escape_xml(label)
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

fn escape_xml(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
