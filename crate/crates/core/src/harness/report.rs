//! Aggregation of run records into the success-rate table and cactus data.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::runner::{runs_dir, write_atomic, Manifest, RunRecord};
use super::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct RepetitionSummary {
    pub repetition: usize,
    pub success: bool,
    pub simulations: usize,
    pub wall_seconds: Option<f64>,
}

/// All repetitions of one (benchmark, optimizer) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub label: String,
    pub optimizer: String,
    pub repetitions: Vec<RepetitionSummary>,
}

impl CellResult {
    pub fn successes(&self) -> usize {
        self.repetitions.iter().filter(|r| r.success).count()
    }

    /// Percentage of successful repetitions.
    pub fn success_rate(&self) -> f64 {
        if self.repetitions.is_empty() {
            return 0.0;
        }
        100.0 * self.successes() as f64 / self.repetitions.len() as f64
    }

    /// Mean simulations to falsify over successful repetitions only.
    pub fn avg_sims(&self) -> Option<f64> {
        let wins: Vec<usize> = self
            .repetitions
            .iter()
            .filter(|r| r.success)
            .map(|r| r.simulations)
            .collect();
        (!wins.is_empty()).then(|| wins.iter().sum::<usize>() as f64 / wins.len() as f64)
    }
}

/// `"R (S)"`: success rate in percent and the mean simulation count
/// rounded half-to-even, or `-` when nothing succeeded.
pub fn format_cell(cell: &CellResult) -> String {
    let rate = cell.success_rate();
    let rate = if rate.fract() == 0.0 {
        format!("{rate:.0}")
    } else {
        format!("{rate:.1}")
    };
    match cell.avg_sims() {
        Some(s) => format!("{rate} ({})", s.round_ties_even() as u64),
        None => format!("{rate} (-)"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub csv: String,
    pub text: String,
}

type Grid<'a> = (Vec<&'a str>, Vec<&'a str>, BTreeMap<(&'a str, &'a str), &'a CellResult>);

fn grid(cells: &[CellResult]) -> Grid<'_> {
    let mut labels = Vec::new();
    let mut opts = Vec::new();
    let mut map = BTreeMap::new();
    for c in cells {
        if !labels.contains(&c.label.as_str()) {
            labels.push(&c.label);
        }
        if !opts.contains(&c.optimizer.as_str()) {
            opts.push(&c.optimizer);
        }
        map.insert((c.label.as_str(), c.optimizer.as_str()), c);
    }
    (labels, opts, map)
}

/// Benchmarks as rows, optimizers as columns, in first-seen order.
pub fn emit_table(cells: &[CellResult]) -> Table {
    let (labels, opts, map) = grid(cells);
    let rows: Vec<Vec<String>> = labels
        .iter()
        .map(|l| {
            std::iter::once(l.to_string())
                .chain(
                    opts.iter()
                        .map(|o| map.get(&(*l, *o)).map_or_else(String::new, |c| format_cell(c))),
                )
                .collect()
        })
        .collect();
    let header: Vec<String> = std::iter::once("benchmark".to_string())
        .chain(opts.iter().map(|o| o.to_string()))
        .collect();

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for r in &rows {
        w.write_record(r).expect("in-memory write");
    }
    let csv = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields");

    let widths: Vec<usize> = (0..header.len())
        .map(|i| {
            std::iter::once(&header)
                .chain(&rows)
                .map(|r| r[i].len())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut text = String::new();
    for r in std::iter::once(&header).chain(&rows) {
        let line: Vec<String> = r.iter().zip(&widths).map(|(v, w)| format!("{v:<w$}")).collect();
        let _ = writeln!(text, "{}", line.join("  ").trim_end());
    }
    Table { csv, text }
}

/// Per optimizer, the sorted simulation counts of every successful
/// repetition across all benchmarks.
pub fn cactus_series(cells: &[CellResult]) -> Vec<(String, Vec<usize>)> {
    let mut series: Vec<(String, Vec<usize>)> = Vec::new();
    for c in cells {
        let idx = match series.iter().position(|(o, _)| *o == c.optimizer) {
            Some(i) => i,
            None => {
                series.push((c.optimizer.clone(), Vec::new()));
                series.len() - 1
            }
        };
        series[idx]
            .1
            .extend(c.repetitions.iter().filter(|r| r.success).map(|r| r.simulations));
    }
    for (_, s) in &mut series {
        s.sort_unstable();
    }
    series
}

/// CSV of `optimizer,rank,simulations`: the k-th row of an optimizer says
/// k instances were falsified within that many simulations.
pub fn emit_cactus(cells: &[CellResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["optimizer", "rank", "simulations"])
        .expect("in-memory write");
    for (opt, sims) in cactus_series(cells) {
        for (k, s) in sims.iter().enumerate() {
            w.write_record([opt.clone(), (k + 1).to_string(), s.to_string()])
                .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Reads every record under `dir/runs`. Cells follow the manifest order
/// when present, sorted keys otherwise; repetitions are sorted.
pub fn load_results(dir: &Path) -> Result<Vec<CellResult>, HarnessError> {
    let runs = runs_dir(dir);
    let entries = std::fs::read_dir(&runs).map_err(HarnessError::io(&runs))?;
    let mut by_cell: BTreeMap<(String, String), Vec<RepetitionSummary>> = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(HarnessError::io(&runs))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let bytes = std::fs::read(&path).map_err(HarnessError::io(&path))?;
        let rec: RunRecord = serde_json::from_slice(&bytes).map_err(|e| HarnessError::Record {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let wall_seconds = std::fs::read_to_string(path.with_extension("wall"))
            .ok()
            .and_then(|s| s.trim().parse().ok());
        by_cell
            .entry((rec.label, rec.optimizer))
            .or_default()
            .push(RepetitionSummary {
                repetition: rec.repetition,
                success: rec.success,
                simulations: rec.simulations,
                wall_seconds,
            });
    }
    let mut cells: Vec<CellResult> = by_cell
        .into_iter()
        .map(|((label, optimizer), mut repetitions)| {
            repetitions.sort_by_key(|r| r.repetition);
            CellResult {
                label,
                optimizer,
                repetitions,
            }
        })
        .collect();

    let manifest = std::fs::read(dir.join("manifest.json"))
        .ok()
        .and_then(|b| serde_json::from_slice::<Manifest>(&b).ok());
    if let Some(m) = manifest {
        let rank = |list: &[String], key: &str| list.iter().position(|k| k == key).unwrap_or(usize::MAX);
        cells.sort_by_key(|c| (rank(&m.benchmarks, &c.label), rank(&m.optimizers, &c.optimizer)));
    }
    Ok(cells)
}

/// Writes `table.csv`, `table.txt` and `cactus.csv` into `dir`.
pub fn write_reports(dir: &Path, cells: &[CellResult]) -> Result<(), HarnessError> {
    let table = emit_table(cells);
    write_atomic(&dir.join("table.csv"), table.csv.as_bytes())?;
    write_atomic(&dir.join("table.txt"), table.text.as_bytes())?;
    write_atomic(&dir.join("cactus.csv"), emit_cactus(cells).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(label: &str, opt: &str, outcomes: &[(bool, usize)]) -> CellResult {
        CellResult {
            label: label.into(),
            optimizer: opt.into(),
            repetitions: outcomes
                .iter()
                .enumerate()
                .map(|(i, &(success, simulations))| RepetitionSummary {
                    repetition: i,
                    success,
                    simulations,
                    wall_seconds: None,
                })
                .collect(),
        }
    }

    #[test]
    fn cells_average_successes_only() {
        let c = cell("a", "x", &[(true, 10), (false, 1000), (true, 20), (false, 1000)]);
        assert_eq!(c.success_rate(), 50.0);
        assert_eq!(c.avg_sims(), Some(15.0));
        assert_eq!(format_cell(&c), "50 (15)");
        assert_eq!(format_cell(&cell("a", "x", &[(false, 5)])), "0 (-)");
        assert_eq!(
            format_cell(&cell("a", "x", &[(true, 1), (false, 5), (false, 5)])),
            "33.3 (1)"
        );
    }

    #[test]
    fn averages_round_half_to_even() {
        assert_eq!(format_cell(&cell("a", "x", &[(true, 12), (true, 13)])), "100 (12)");
        assert_eq!(format_cell(&cell("a", "x", &[(true, 13), (true, 14)])), "100 (14)");
    }

    #[test]
    fn table_layout() {
        let cells = vec![
            cell("ss", "vanilla", &[(true, 12), (true, 13)]),
            cell("ss", "hcr", &[(true, 3)]),
            cell("ds", "vanilla", &[(false, 9)]),
        ];
        let t = emit_table(&cells);
        assert_eq!(t.csv, "benchmark,vanilla,hcr\nss,100 (12),100 (3)\nds,0 (-),\n");
        assert_eq!(
            t.text,
            "benchmark  vanilla   hcr\nss         100 (12)  100 (3)\nds         0 (-)\n"
        );
    }

    #[test]
    fn cactus_is_sorted_per_optimizer() {
        let cells = vec![
            cell("a", "x", &[(true, 30), (false, 1), (true, 5)]),
            cell("b", "x", &[(true, 7)]),
            cell("a", "y", &[(false, 2)]),
        ];
        assert_eq!(
            cactus_series(&cells),
            vec![("x".into(), vec![5, 7, 30]), ("y".into(), vec![])]
        );
        assert_eq!(
            emit_cactus(&cells),
            "optimizer,rank,simulations\nx,1,5\nx,2,7\nx,3,30\n"
        );
    }
}
