//! CSV tables and SVG line charts.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;
use crate::experiment::Table;

/// Writes `table` as CSV with a header row. Numbers use Rust's shortest
/// round-trip formatting, so identical tables give identical bytes.
pub fn write_csv(table: &Table, path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Table, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    let columns = r.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|v| v.parse::<f64>().map_err(|e| CliError::Config(format!("bad CSV number {v:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Plots every non-half-width column against the first one.
pub fn render_svg(table: &Table, title: &str, log_x: bool) -> String {
    let xs: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    let series: Vec<usize> = (1..table.columns.len()).filter(|&i| !table.columns[i].ends_with("_hw")).collect();
    let map_x = |x: f64| if log_x && x > 0.0 { x.log10() } else { x };
    let finite = |v: &f64| v.is_finite();
    let (x_lo, x_hi) = bounds(xs.iter().map(|&x| map_x(x)).filter(finite));
    let (y_lo, y_hi) = bounds(series.iter().flat_map(|&i| table.rows.iter().map(move |r| r[i])).filter(finite));
    let px = |x: f64| MARGIN + (map_x(x) - x_lo) / (x_hi - x_lo) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let x_label = if log_x { format!("log10({})", table.columns[0]) } else { table.columns[0].clone() };
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 15.0, escape(&x_label));
    for (value, anchor, x) in [(x_lo, "start", MARGIN), (x_hi, "end", WIDTH - MARGIN)] {
        let _ = writeln!(svg, r#"<text x="{x}" y="{}" text-anchor="{anchor}">{value:.3e}</text>"#, HEIGHT - MARGIN + 16.0);
    }
    for (value, y) in [(y_lo, HEIGHT - MARGIN), (y_hi, MARGIN + 10.0)] {
        let _ = writeln!(svg, r#"<text x="{}" y="{y}" text-anchor="end">{value:.3e}</text>"#, MARGIN - 4.0);
    }
    for (k, &i) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = table
            .rows
            .iter()
            .filter(|r| r[0].is_finite() && r[i].is_finite() && (!log_x || r[0] > 0.0))
            .map(|r| format!("{:.2},{:.2}", px(r[0]), py(r[i])))
            .collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, points.join(" "));
        let ly = MARGIN + 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{ly}" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 150.0,
            escape(&table.columns[i])
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        let pad = lo.abs().max(1.0) * 0.5;
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Table {
        Table {
            columns: vec!["x".into(), "a".into(), "a_hw".into()],
            rows: vec![vec![1e-4, 0.9, 0.01], vec![1e-3, 0.5, 0.02], vec![1e-2, 0.1, 0.01]],
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = std::env::temp_dir().join(format!("uavsec-cli-csv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        let t = Table { rows: vec![vec![0.1 + 0.2, 1.0 / 3.0, 1e-300]], ..table() };
        write_csv(&t, &path).unwrap();
        assert_eq!(read_csv(&path).unwrap(), t);
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn svg_skips_half_widths() {
        let svg = render_svg(&table(), "t", true);
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("log10(x)"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn degenerate_bounds_are_padded() {
        let (lo, hi) = bounds([2.0, 2.0].into_iter());
        assert!(lo < 2.0 && hi > 2.0);
        assert_eq!(bounds(std::iter::empty()), (0.0, 1.0));
    }
}
