//! Per-trial result rows, per-cell aggregates and their on-disk form.
//!
//! The CSV file starts with a `#` block echoing the spec in config syntax,
//! the schema version and the per-cell generation budgets, followed by the
//! columns `kind, n, lambda, chi, alpha, beta, epsilon, delta, r, trial,
//! seed, hit, T_interactions, generations, wall_ms`. Aggregates go to a JSON
//! file next to it with extension `.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{Cell, ExperimentSpec};
use crate::error::{HarnessError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// One trial. `seed` is the master seed; the trial drew from stream
/// `cell_index · trials + trial` of it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub kind: String,
    pub n: usize,
    pub lambda: usize,
    pub chi: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub r: f64,
    pub trial: usize,
    pub seed: u64,
    pub hit: bool,
    #[serde(rename = "T_interactions")]
    pub t_interactions: u64,
    pub generations: u64,
    pub wall_ms: f64,
}

impl TrialRow {
    fn cell(&self) -> Cell {
        Cell {
            n: self.n,
            lambda: self.lambda,
            chi: self.chi,
            delta: self.delta,
            alpha: self.alpha,
            beta: self.beta,
            epsilon: self.epsilon,
            r: self.r,
        }
    }
}

/// Summary of one cell. Hit-time statistics use successful trials only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellAggregate {
    pub n: usize,
    pub lambda: usize,
    pub chi: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub r: f64,
    pub budget_generations: u64,
    pub trials: usize,
    pub hits: usize,
    pub censored: usize,
    pub success_rate: f64,
    pub median_t: Option<f64>,
    pub q25_t: Option<f64>,
    pub q75_t: Option<f64>,
    pub min_t: Option<u64>,
    pub max_t: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub spec: ExperimentSpec,
    /// Generation budget of each cell, in cell order.
    pub budgets: Vec<u64>,
    /// Sorted by cell, then trial.
    pub rows: Vec<TrialRow>,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    schema_version: u32,
    spec: serde_json::Value,
    aggregates: Vec<CellAggregate>,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[u64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(sorted[lo] as f64 + (h - lo as f64) * (sorted[hi] as f64 - sorted[lo] as f64))
}

impl ResultTable {
    /// Rows grouped by cell, in cell order.
    pub fn cell_rows(&self) -> Vec<&[TrialRow]> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.rows.len() {
            if i == self.rows.len() || self.rows[i].cell() != self.rows[start].cell() {
                out.push(&self.rows[start..i]);
                start = i;
            }
        }
        out
    }

    pub fn aggregates(&self) -> Vec<CellAggregate> {
        self.cell_rows()
            .into_iter()
            .zip(&self.budgets)
            .map(|(rows, &budget)| {
                let c = rows[0].cell();
                let mut ts: Vec<u64> = rows.iter().filter(|r| r.hit).map(|r| r.t_interactions).collect();
                ts.sort_unstable();
                let hits = ts.len();
                CellAggregate {
                    n: c.n,
                    lambda: c.lambda,
                    chi: c.chi,
                    alpha: c.alpha,
                    beta: c.beta,
                    epsilon: c.epsilon,
                    delta: c.delta,
                    r: c.r,
                    budget_generations: budget,
                    trials: rows.len(),
                    hits,
                    censored: rows.len() - hits,
                    success_rate: hits as f64 / rows.len() as f64,
                    median_t: quantile(&ts, 0.5),
                    q25_t: quantile(&ts, 0.25),
                    q75_t: quantile(&ts, 0.75),
                    min_t: ts.first().copied(),
                    max_t: ts.last().copied(),
                }
            })
            .collect()
    }

    fn header(&self) -> String {
        let mut h = format!("# pdcoea results\n# schema_version = {SCHEMA_VERSION}\n");
        for line in self.spec.to_config().lines() {
            h.push_str(&format!("# {line}\n"));
        }
        let budgets: Vec<String> = self.budgets.iter().map(|b| b.to_string()).collect();
        h.push_str(&format!("# budgets = {}\n", budgets.join(",")));
        h
    }

    /// The CSV text, header block included.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).map_err(|e| HarnessError::Csv { path: PathBuf::from("<memory>"), source: e })?;
        }
        if self.rows.is_empty() {
            w.write_record(COLUMNS).map_err(|e| HarnessError::Csv { path: PathBuf::from("<memory>"), source: e })?;
        }
        let body = w.into_inner().map_err(|e| HarnessError::io("<memory>", e.into_error()))?;
        Ok(self.header() + &String::from_utf8(body).expect("csv output is UTF-8"))
    }

    pub fn sidecar_json(&self) -> Result<String> {
        let sidecar = Sidecar {
            schema_version: SCHEMA_VERSION,
            spec: serde_json::to_value(&self.spec)?,
            aggregates: self.aggregates(),
        };
        Ok(serde_json::to_string_pretty(&sidecar)? + "\n")
    }

    /// Writes `path` and its `.json` sidecar; returns the sidecar path.
    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        }
        fs::write(path, self.to_csv()?).map_err(|e| HarnessError::io(path, e))?;
        let side = sidecar_path(path);
        fs::write(&side, self.sidecar_json()?).map_err(|e| HarnessError::io(&side, e))?;
        Ok(side)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let malformed = |msg: &str| HarnessError::Malformed { path: path.to_owned(), msg: msg.to_owned() };
        let mut config = String::new();
        let mut budgets = None;
        let mut schema = None;
        for line in text.lines().filter_map(|l| l.strip_prefix('#')) {
            let line = line.trim();
            if let Some(v) = line.strip_prefix("schema_version =") {
                schema = v.trim().parse::<u32>().ok();
            } else if let Some(v) = line.strip_prefix("budgets =") {
                budgets = Some(
                    v.split(',')
                        .map(|b| b.trim().parse::<u64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| malformed("bad budgets line"))?,
                );
            } else if line.contains('=') {
                config.push_str(line);
                config.push('\n');
            }
        }
        if schema != Some(SCHEMA_VERSION) {
            return Err(malformed("missing or unsupported schema_version"));
        }
        let spec = ExperimentSpec::parse(&config)?;
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let rows = reader
            .deserialize()
            .collect::<std::result::Result<Vec<TrialRow>, _>>()
            .map_err(|e| HarnessError::Csv { path: path.to_owned(), source: e })?;
        let budgets = budgets.ok_or_else(|| malformed("missing budgets line"))?;
        let table = ResultTable { spec, budgets, rows };
        if table.cell_rows().len() != table.budgets.len() {
            return Err(malformed("budget count differs from cell count"));
        }
        Ok(table)
    }
}

pub const COLUMNS: [&str; 15] = [
    "kind",
    "n",
    "lambda",
    "chi",
    "alpha",
    "beta",
    "epsilon",
    "delta",
    "r",
    "trial",
    "seed",
    "hit",
    "T_interactions",
    "generations",
    "wall_ms",
];

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Aggregates stored in a sidecar file.
pub fn read_sidecar(path: &Path) -> Result<Vec<CellAggregate>> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let s: Sidecar = serde_json::from_str(&text)?;
    Ok(s.aggregates)
}

/// CSV text with the `wall_ms` column blanked, for byte comparisons.
pub fn strip_wall_time(csv_text: &str) -> String {
    csv_text
        .lines()
        .map(|l| {
            if l.starts_with('#') {
                l.to_owned()
            } else {
                match l.rfind(',') {
                    Some(i) => l[..i].to_owned(),
                    None => l.to_owned(),
                }
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{BudgetRule, ExperimentKind};

    fn cell(n: usize) -> Cell {
        Cell { n, lambda: 4, chi: 0.5, delta: None, alpha: 0.9, beta: 0.05, epsilon: 0.1, r: 1.0 }
    }

    fn row(c: Cell, trial: usize, hit: bool, t: u64) -> TrialRow {
        TrialRow {
            kind: "runtime-scaling".into(),
            n: c.n,
            lambda: c.lambda,
            chi: c.chi,
            alpha: c.alpha,
            beta: c.beta,
            epsilon: c.epsilon,
            delta: c.delta,
            r: c.r,
            trial,
            seed: 9,
            hit,
            t_interactions: t,
            generations: t / c.lambda as u64,
            wall_ms: 0.25,
        }
    }

    fn table() -> ResultTable {
        let mut spec = ExperimentSpec::single(ExperimentKind::RuntimeScaling, cell(20), 3, 9, BudgetRule::Generations(50));
        spec.grid.n = vec![20, 30];
        let rows = vec![
            row(cell(20), 0, true, 40),
            row(cell(20), 1, false, 200),
            row(cell(20), 2, true, 8),
            row(cell(30), 0, true, 12),
            row(cell(30), 1, true, 16),
            row(cell(30), 2, true, 100),
        ];
        ResultTable { spec, budgets: vec![50, 50], rows }
    }

    #[test]
    fn quantiles() {
        assert_eq!(quantile(&[], 0.5), None);
        assert_eq!(quantile(&[7], 0.25), Some(7.0));
        assert_eq!(quantile(&[1, 2, 3, 4], 0.5), Some(2.5));
        assert_eq!(quantile(&[0, 10, 20, 30, 40], 0.25), Some(10.0));
    }

    #[test]
    fn aggregates_count_hits_only() {
        let agg = table().aggregates();
        assert_eq!(agg.len(), 2);
        assert_eq!((agg[0].trials, agg[0].hits, agg[0].censored), (3, 2, 1));
        assert_eq!(agg[0].median_t, Some(24.0));
        assert_eq!(agg[0].max_t, Some(40));
        assert_eq!(agg[1].median_t, Some(16.0));
        assert!((agg[1].success_rate - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/results.csv");
        let t = table();
        let side = t.write(&path).unwrap();
        let back = ResultTable::read(&path).unwrap();
        assert_eq!(back, t);
        assert_eq!(read_sidecar(&side).unwrap(), back.aggregates());
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# pdcoea results\n# schema_version = 1\n# kind = runtime-scaling\n"));
        let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, COLUMNS.join(","));
    }

    #[test]
    fn strips_wall_time() {
        let a = "# x\nkind,wall_ms\nrs,1.5\n";
        let b = "# x\nkind,wall_ms\nrs,2.25\n";
        assert_eq!(strip_wall_time(a), strip_wall_time(b));
    }

    #[test]
    fn unreadable_file() {
        let dir = tempfile::tempdir().unwrap();
        let e = ResultTable::read(&dir.path().join("missing.csv")).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        let p = dir.path().join("bad.csv");
        fs::write(&p, "kind,n\n").unwrap();
        assert_eq!(ResultTable::read(&p).unwrap_err().exit_code(), 3);
    }
}
