//! `tshap report` — optional self-contained SVG rendering of the heatmap
//! CSVs already emitted by `evaluate`. CSV remains the interface of record.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::ExperimentConfig;
use tshap_core::{Result, TshapError};

const CELL: f64 = 6.0;
const MARGIN: f64 = 30.0;

fn parse_grid(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.is_empty() {
            continue; // header
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| TshapError::Parse(format!("bad value `{v}` at line {}", i + 1)))
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(TshapError::Parse("heatmap CSV has no data rows".into()));
    }
    Ok(rows)
}

/// Diverging blue–white–red color for v scaled into [-1, 1].
fn color(v: f64) -> String {
    let v = v.clamp(-1.0, 1.0);
    let (r, g, b) = if v >= 0.0 {
        (255.0, 255.0 * (1.0 - v), 255.0 * (1.0 - v))
    } else {
        (255.0 * (1.0 + v), 255.0 * (1.0 + v), 255.0)
    };
    format!("rgb({},{},{})", r as u8, g as u8, b as u8)
}

pub fn grid_to_svg(grid: &[Vec<f64>], title: &str) -> String {
    let t_len = grid.len();
    let g_len = grid[0].len();
    let scale = grid
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    // Frames run left-to-right, players top-to-bottom.
    let width = MARGIN * 2.0 + CELL * t_len as f64;
    let height = MARGIN * 2.0 + CELL * g_len as f64;
    let mut svg = String::new();
    write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">"
    )
    .unwrap();
    write!(
        svg,
        "<text x=\"{MARGIN}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">{title}</text>",
        MARGIN - 10.0
    )
    .unwrap();
    for (t, row) in grid.iter().enumerate() {
        for (g, &v) in row.iter().enumerate() {
            write!(
                svg,
                "<rect x=\"{}\" y=\"{}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{}\"/>",
                MARGIN + CELL * t as f64,
                MARGIN + CELL * g as f64,
                color(v / scale)
            )
            .unwrap();
        }
    }
    write!(
        svg,
        "<text x=\"{MARGIN}\" y=\"{}\" font-family=\"monospace\" font-size=\"10\">frames →, \
         players ↓, |max| = {scale:.3e}</text>",
        height - 8.0
    )
    .unwrap();
    svg.push_str("</svg>");
    svg
}

pub fn run(cfg: &ExperimentConfig) -> Result<()> {
    let out = super::out_dir(cfg);
    if !out.exists() {
        return Err(TshapError::invalid(format!(
            "{} not found; run `tshap evaluate` first",
            out.display()
        )));
    }
    let mut rendered = 0usize;
    let mut entries: Vec<_> = std::fs::read_dir(&out)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .collect();
    entries.sort();
    for path in entries {
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if !name.starts_with("heatmap_") || !name.ends_with(".csv") {
            continue;
        }
        let grid = parse_grid(&std::fs::read_to_string(&path)?)?;
        let title = name.trim_end_matches(".csv").trim_start_matches("heatmap_");
        let svg = grid_to_svg(&grid, title);
        let svg_path: &Path = &path.with_extension("svg");
        tshap_core::io::write_atomic(svg_path, svg.as_bytes())?;
        println!("rendered {}", svg_path.display());
        rendered += 1;
    }
    if rendered == 0 {
        return Err(TshapError::invalid(
            "no heatmap_*.csv files found; run `tshap evaluate` first",
        ));
    }
    Ok(())
}
