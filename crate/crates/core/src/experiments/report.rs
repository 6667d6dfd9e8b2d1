//! Plain-text and CSV rendering. Both renderings of a table go through the
//! same cell formatter, so they always carry the same digits.

use std::fmt::Write as _;

use super::blocks::{BlockId, BlockSummary, ResultRow};
use super::calibrate::CalibrationReport;
use super::solve::SolveReport;
use super::validate::ValidationReport;
use crate::geometry::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Precision {
    pub coordinates: usize,
    pub throughput: usize,
    pub busy: usize,
}

impl Default for Precision {
    fn default() -> Self {
        Self { coordinates: 3, throughput: 3, busy: 6 }
    }
}

impl Precision {
    /// Digits used in block tables.
    pub fn table() -> Self {
        Self { coordinates: 4, throughput: 4, busy: 4 }
    }
}

pub const RESULT_COLUMNS: [&str; 10] = [
    "dist_loc",
    "demand_total",
    "demand_min",
    "demand_max",
    "trucks_weighted",
    "trucks_unweighted",
    "throughput_weighted",
    "throughput_unweighted",
    "busy_weighted",
    "busy_unweighted",
];

fn trucks_cell(n: Option<usize>) -> String {
    n.map_or_else(|| "--".to_string(), |n| n.to_string())
}

/// Cells of a result row in [`RESULT_COLUMNS`] order.
pub fn result_cells(row: &ResultRow, p: &Precision) -> [String; 10] {
    [
        format!("{:.*}", p.coordinates, row.dist_loc),
        format!("{}", row.demand_total),
        format!("{}", row.demand_min),
        format!("{}", row.demand_max),
        trucks_cell(row.trucks_weighted),
        trucks_cell(row.trucks_unweighted),
        format!("{:.*}", p.throughput, row.throughput_weighted),
        format!("{:.*}", p.throughput, row.throughput_unweighted),
        format!("{:.*}", p.busy, row.busy_weighted),
        format!("{:.*}", p.busy, row.busy_unweighted),
    ]
}

pub fn render_block_table(block: BlockId, rows: &[ResultRow], p: &Precision) -> String {
    let mut out = String::new();
    let header = ["DistLoc", "Demand to/min/max", "Trucks +/-", "Throughput/day +/-", "P(X1>0) +/-"];
    let body: Vec<[String; 5]> = rows
        .iter()
        .map(|r| {
            let c = result_cells(r, p);
            [
                c[0].clone(),
                format!("{}/{}/{}", c[1], c[2], c[3]),
                format!("{}/{}", c[4], c[5]),
                format!("{}/{}", c[6], c[7]),
                format!("{}/{}", c[8], c[9]),
            ]
        })
        .collect();
    let widths: Vec<usize> =
        (0..5).map(|i| body.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap_or(0)).collect();
    writeln!(out, "Block {block}").unwrap();
    let line = |cells: &[&str]| {
        cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect::<Vec<_>>().join(" | ")
    };
    writeln!(out, "{}", line(&header)).unwrap();
    writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-")).unwrap();
    for r in &body {
        let cells: Vec<&str> = r.iter().map(String::as_str).collect();
        writeln!(out, "{}", line(&cells)).unwrap();
    }
    out
}

pub fn rows_to_csv(rows: &[ResultRow], p: &Precision) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RESULT_COLUMNS)?;
    for r in rows {
        w.write_record(result_cells(r, p))?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// One column per block, in the order given.
pub fn render_summary(blocks: &[(BlockId, Vec<u32>, f64, BlockSummary)]) -> String {
    let mut out = String::new();
    let mut row = |label: &str, cell: &dyn Fn(&(BlockId, Vec<u32>, f64, BlockSummary)) -> String| {
        let cells: Vec<String> = blocks.iter().map(|b| format!("{:>12}", cell(b))).collect();
        writeln!(out, "{label:<10}{}", cells.join("")).unwrap();
    };
    row("", &|b| format!("({})", b.0));
    row("Exp", &|b| format!("{:.4}", set_mean(&b.1)));
    row("Var", &|b| format!("{:.4}", set_variance(&b.1)));
    row("mu1", &|b| format!("{}", b.2));
    row("MinDist", &|b| format!("{:.4}", b.3.min_dist));
    row("MaxDist", &|b| format!("{:.4}", b.3.max_dist));
    row("MinDem", &|b| format!("{}", b.3.min_demand));
    row("MaxDem", &|b| format!("{}", b.3.max_demand));
    row("Num<Tru", &|b| format!("{}", b.3.fewer_trucks));
    row("Num∞Tru", &|b| format!("{}", b.3.infeasible));
    out
}

/// Mean of the uniform distribution on a demand set.
pub fn set_mean(set: &[u32]) -> f64 {
    set.iter().map(|&v| v as f64).sum::<f64>() / set.len() as f64
}

/// Population variance of the uniform distribution on a demand set.
pub fn set_variance(set: &[u32]) -> f64 {
    let m = set_mean(set);
    set.iter().map(|&v| (v as f64 - m).powi(2)).sum::<f64>() / set.len() as f64
}

pub fn render_solve(r: &SolveReport, p: &Precision) -> String {
    let mut out = String::new();
    let a = &r.analysis;
    let located = if r.weber.is_some() { "weber point" } else { "given" };
    writeln!(out, "center ({located}): {:.*}", p.coordinates, r.center).unwrap();
    if let Some(w) = &r.weber {
        writeln!(out, "weber objective: {:.6} ({} iterations)", w.objective, w.iterations).unwrap();
    }
    writeln!(out, "demand/day: {}", r.fleet.demand).unwrap();
    match r.fleet.trucks {
        Some(n) => writeln!(out, "trucks: {n}").unwrap(),
        None => writeln!(
            out,
            "trucks: infeasible ({})",
            r.fleet.infeasibility.map(|i| i.to_string()).unwrap_or_default()
        )
        .unwrap(),
    }
    writeln!(out, "analyzed fleet: {}", r.trucks).unwrap();
    writeln!(out, "throughput/day: {:.*}", p.throughput, a.warehouse_throughput_per_day()).unwrap();
    writeln!(out, "P(center busy): {:.*}", p.busy, a.busy_center).unwrap();
    writeln!(out, "passage time (h): {:.6}", a.passage_time).unwrap();
    writeln!(out, "travel term h (h): {:.6}", r.travel_term).unwrap();
    writeln!(
        out,
        "ceiling/day: {:.*} (binding: {})",
        p.throughput,
        r.bottleneck.ceiling_per_day(),
        r.bottleneck.binding
    )
    .unwrap();
    out
}

pub fn solve_csv(r: &SolveReport, p: &Precision) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "center_x",
        "center_y",
        "trucks",
        "analyzed_trucks",
        "throughput_per_day",
        "busy_center",
        "passage_time_hours",
        "ceiling_per_day",
        "binding",
    ])?;
    w.write_record([
        format!("{:.*}", p.coordinates, r.center.x),
        format!("{:.*}", p.coordinates, r.center.y),
        trucks_cell(r.fleet.trucks),
        r.trucks.to_string(),
        format!("{:.*}", p.throughput, r.analysis.warehouse_throughput_per_day()),
        format!("{:.*}", p.busy, r.analysis.busy_center),
        format!("{:.6}", r.analysis.passage_time),
        format!("{:.*}", p.throughput, r.bottleneck.ceiling_per_day()),
        r.bottleneck.binding.to_string(),
    ])?;
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Grid points with travel term and throughput per day, best first.
pub fn render_grid(points: &[(Point, f64, f64)], p: &Precision) -> String {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| b.2.total_cmp(&a.2));
    let mut out = String::new();
    writeln!(out, "{:>24} {:>12} {:>16}", "center", "h (h)", "throughput/day").unwrap();
    for (x, h, th) in sorted {
        writeln!(out, "{:>24} {:>12.6} {:>16.*}", format!("{:.*}", p.coordinates, x), h, p.throughput + 3, th).unwrap();
    }
    out
}

pub fn render_calibration(r: &CalibrationReport) -> String {
    let mut out = String::new();
    writeln!(out, "{:>8}  {}", "speed", r.cases.iter().map(|c| format!("{:>22}", c.label)).collect::<String>()).unwrap();
    for row in &r.rows {
        let cells: String = row
            .outcomes
            .iter()
            .map(|o| {
                let mark = if o.matches { "ok" } else if o.trucks_match { "~ " } else { "  " };
                format!("{:>22}", format!("{}/{} {mark}", trucks_cell(o.trucks.0), trucks_cell(o.trucks.1)))
            })
            .collect();
        writeln!(out, "{:>8.2}  {cells}", row.speed).unwrap();
    }
    match r.matching_speeds().as_slice() {
        [] => {
            writeln!(out, "no single speed matches every case; best speed per case:").unwrap();
            for (i, c) in r.cases.iter().enumerate() {
                let speeds: Vec<String> = r.rows.iter().filter(|row| row.outcomes[i].matches).map(|row| format!("{:.2}", row.speed)).collect();
                writeln!(out, "  {}: {}", c.label, if speeds.is_empty() { "none".into() } else { speeds.join(", ") }).unwrap();
            }
        }
        speeds => {
            let list: Vec<String> = speeds.iter().map(|s| format!("{s:.2}")).collect();
            writeln!(out, "speeds matching every case: {}", list.join(", ")).unwrap();
        }
    }
    out
}

pub fn render_validation(r: &ValidationReport) -> String {
    let mut out = String::new();
    for c in &r.checks {
        writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail).unwrap();
    }
    writeln!(out, "{} of {} checks passed", r.checks.iter().filter(|c| c.passed).count(), r.checks.len()).unwrap();
    out
}
