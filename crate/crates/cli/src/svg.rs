//! Monochrome heatmap of a two-axis sweep, for quick visual inspection.
//!
//! Fixed linear ramp from white (grid minimum) to black (grid maximum);
//! cells without a value stay background. The first axis runs bottom to
//! top, the second left to right, matching the usual surface-plot
//! orientation.

use tanp::sweep::{format_real, AxisSpec, SweepRecord};

const LEFT: usize = 70;
const TOP: usize = 30;
const BOTTOM: usize = 50;
const RIGHT: usize = 20;

pub fn render_heatmap(records: &[SweepRecord], rows_axis: &AxisSpec, cols_axis: &AxisSpec) -> String {
    let rows = rows_axis.len();
    let cols = cols_axis.len();
    debug_assert_eq!(records.len(), rows * cols);
    let cell = (720 / rows.max(cols)).clamp(2, 24);
    let width = LEFT + cols * cell + RIGHT;
    let height = TOP + rows * cell + BOTTOM;

    let defined: Vec<f64> = records.iter().filter_map(|r| r.value).collect();
    let lo = defined.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = defined.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut svg = String::with_capacity(records.len() * 64);
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>\n"
    ));
    for (i, record) in records.iter().enumerate() {
        let Some(value) = record.value else { continue };
        let row = i / cols;
        let col = i % cols;
        let t = if hi > lo { (value - lo) / (hi - lo) } else { 0.5 };
        let gray = 255 - (t.clamp(0.0, 1.0) * 255.0).round() as u32;
        let x = LEFT + col * cell;
        let y = TOP + (rows - 1 - row) * cell;
        svg.push_str(&format!(
            "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" \
             fill=\"#{gray:02x}{gray:02x}{gray:02x}\"/>\n"
        ));
    }
    let legend = if defined.is_empty() {
        "value: no defined cells".to_string()
    } else {
        format!("value: {} (white) to {} (black)", format_real(lo), format_real(hi))
    };
    svg.push_str(&format!(
        "<text x=\"{LEFT}\" y=\"18\" font-family=\"monospace\" font-size=\"12\">{legend}</text>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{LEFT}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">{}: {} to {}</text>\n",
        height - 16,
        cols_axis.name,
        format_real(cols_axis.start),
        format_real(cols_axis.stop),
    ));
    svg.push_str(&format!(
        "<text x=\"14\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" \
         transform=\"rotate(-90 14 {})\">{}: {} to {}</text>\n",
        TOP + rows * cell,
        TOP + rows * cell,
        rows_axis.name,
        format_real(rows_axis.start),
        format_real(rows_axis.stop),
    ));
    svg.push_str("</svg>\n");
    svg
}
