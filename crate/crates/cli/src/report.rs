//! Experiment reports: CSV for machines, a markdown table for people.
//!
//! Everything except `timings.csv` is a pure function of the config and the
//! dataset; wall-clock times live in their own file so report bytes stay
//! reproducible.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use geu_core::data::FoldSplit;

use crate::config::MethodSpec;
use crate::error::CliError;

/// Hyperparameters chosen by inner cross-validation. `param` is σ for the
/// uncertainty-aware methods, the ridge factor for RLDA and 0 otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub param: f64,
    pub d: usize,
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldOutcome {
    pub accuracy: f64,
    pub selection: Selection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Compare,
    SizeCurve,
}

/// One evaluated (method, noise, [size], repeat, fold).
#[derive(Debug, Clone)]
pub struct RawEntry {
    pub method: MethodSpec,
    pub noise: f64,
    pub train_size: Option<usize>,
    pub repeat: usize,
    pub fold: usize,
    /// Fingerprint of the sample assignment this entry was evaluated on.
    pub split_hash: u64,
    pub outcome: Result<FoldOutcome, String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub method: MethodSpec,
    pub noise: f64,
    pub train_size: Option<usize>,
    /// Mean over folds per repeat; `None` when every fold failed.
    pub per_repeat: Vec<Option<f64>>,
    pub mean: Option<f64>,
    /// Population variance of the per-repeat accuracies.
    pub variance: Option<f64>,
    pub failures: usize,
}

impl CellSummary {
    pub fn status(&self) -> &'static str {
        match (self.mean, self.failures) {
            (None, _) => "failed",
            (Some(_), 0) => "ok",
            (Some(_), _) => "partial",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub kind: ReportKind,
    pub cells: Vec<CellSummary>,
    pub raw: Vec<RawEntry>,
    pub splits: Vec<FoldSplit>,
}

fn summarize(entries: &[&RawEntry], repeats: usize) -> (Vec<Option<f64>>, Option<f64>, Option<f64>, usize) {
    let mut sums = vec![(0.0, 0usize); repeats];
    let mut failures = 0;
    for e in entries {
        match &e.outcome {
            Ok(o) => {
                sums[e.repeat].0 += o.accuracy;
                sums[e.repeat].1 += 1;
            }
            Err(_) => failures += 1,
        }
    }
    let per_repeat: Vec<Option<f64>> = sums.iter().map(|&(s, n)| (n > 0).then(|| s / n as f64)).collect();
    let ok: Vec<f64> = per_repeat.iter().flatten().copied().collect();
    if ok.is_empty() {
        return (per_repeat, None, None, failures);
    }
    let mean = ok.iter().sum::<f64>() / ok.len() as f64;
    let variance = ok.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / ok.len() as f64;
    (per_repeat, Some(mean), Some(variance), failures)
}

impl ExperimentReport {
    /// Group raw entries into cells, keeping first-appearance order.
    pub fn from_raw(kind: ReportKind, raw: Vec<RawEntry>, splits: Vec<FoldSplit>) -> Self {
        let cells = Self::summaries(&raw);
        Self { kind, cells, raw, splits }
    }

    fn summaries(raw: &[RawEntry]) -> Vec<CellSummary> {
        let mut keys: Vec<(MethodSpec, f64, Option<usize>)> = Vec::new();
        for e in raw {
            let key = (e.method, e.noise, e.train_size);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        let repeats = raw.iter().map(|e| e.repeat + 1).max().unwrap_or(0);
        keys.into_iter()
            .map(|(method, noise, train_size)| {
                let entries: Vec<&RawEntry> = raw
                    .iter()
                    .filter(|e| e.method == method && e.noise == noise && e.train_size == train_size)
                    .collect();
                let (per_repeat, mean, variance, failures) = summarize(&entries, repeats);
                CellSummary { method, noise, train_size, per_repeat, mean, variance, failures }
            })
            .collect()
    }

    pub fn cell(&self, method: MethodSpec, noise: f64) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.method == method && c.noise == noise && c.train_size.is_none())
    }

    pub fn size_cell(&self, method: MethodSpec, noise: f64, size: usize) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.method == method && c.noise == noise && c.train_size == Some(size))
    }

    /// Total wall-clock seconds per method, in first-appearance order.
    pub fn timings(&self) -> Vec<(MethodSpec, f64)> {
        let mut out: Vec<(MethodSpec, f64)> = Vec::new();
        for e in &self.raw {
            match out.iter_mut().find(|t| t.0 == e.method) {
                Some(t) => t.1 += e.seconds,
                None => out.push((e.method, e.seconds)),
            }
        }
        out
    }

    /// Recompute every summary from the raw entries.
    pub fn check_consistency(&self) -> Result<(), CliError> {
        if Self::summaries(&self.raw) != self.cells {
            return Err(CliError::Config("report summaries disagree with raw entries".into()));
        }
        Ok(())
    }

    fn size_column(&self) -> bool {
        self.kind == ReportKind::SizeCurve
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::new();
        let size = self.size_column();
        s.push_str(if size { "method,noise,train_size,mean,variance,repeats,failures,status\n" } else { "method,noise,mean,variance,repeats,failures,status\n" });
        for c in &self.cells {
            let _ = write!(s, "{},{}", c.method, c.noise);
            if size {
                let _ = write!(s, ",{}", c.train_size.unwrap_or(0));
            }
            let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
            let _ = writeln!(
                s,
                ",{},{},{},{},{}",
                opt(c.mean),
                opt(c.variance),
                c.per_repeat.iter().flatten().count(),
                c.failures,
                c.status()
            );
        }
        s
    }

    pub fn raw_csv(&self) -> String {
        let mut s = String::new();
        let size = self.size_column();
        s.push_str("method,noise,");
        if size {
            s.push_str("train_size,");
        }
        s.push_str("repeat,fold,split_hash,accuracy,param,d,k,status\n");
        for e in &self.raw {
            let _ = write!(s, "{},{},", e.method, e.noise);
            if size {
                let _ = write!(s, "{},", e.train_size.unwrap_or(0));
            }
            let _ = write!(s, "{},{},{:016x},", e.repeat, e.fold, e.split_hash);
            match &e.outcome {
                Ok(o) => {
                    let _ = writeln!(s, "{},{},{},{},ok", o.accuracy, o.selection.param, o.selection.d, o.selection.k);
                }
                Err(msg) => {
                    let _ = writeln!(s, ",,,,\"error: {}\"", msg.replace('"', "'"));
                }
            }
        }
        s
    }

    /// Methods as rows, noise levels (and sizes) as columns, `mean ± std`.
    pub fn markdown(&self) -> String {
        let mut methods: Vec<MethodSpec> = Vec::new();
        let mut columns: Vec<(f64, Option<usize>)> = Vec::new();
        for c in &self.cells {
            if !methods.contains(&c.method) {
                methods.push(c.method);
            }
            if !columns.contains(&(c.noise, c.train_size)) {
                columns.push((c.noise, c.train_size));
            }
        }
        let mut s = String::from("| Method |");
        for (noise, size) in &columns {
            match size {
                Some(n) => {
                    let _ = write!(s, " n={n}, noise {:.0}% |", noise * 100.0);
                }
                None => {
                    let _ = write!(s, " noise {:.0}% |", noise * 100.0);
                }
            }
        }
        s.push_str("\n|---|");
        s.push_str(&"---|".repeat(columns.len()));
        s.push('\n');
        for m in methods {
            let _ = write!(s, "| {m} |");
            for &(noise, size) in &columns {
                let cell = self.cells.iter().find(|c| c.method == m && c.noise == noise && c.train_size == size);
                match cell.and_then(|c| c.mean.zip(c.variance).map(|mv| (mv, c.failures))) {
                    Some(((mean, var), 0)) => {
                        let _ = write!(s, " {:.4} ± {:.4} |", mean, var.sqrt());
                    }
                    Some(((mean, var), f)) => {
                        let _ = write!(s, " {:.4} ± {:.4} ({f} failed) |", mean, var.sqrt());
                    }
                    None => s.push_str(" failed |"),
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn folds_csv(&self) -> String {
        let mut s = String::from("repeat,sample_index,fold\n");
        for (r, split) in self.splits.iter().enumerate() {
            for (i, f) in split.assignments.iter().enumerate() {
                let _ = writeln!(s, "{r},{i},{f}");
            }
        }
        s
    }

    pub fn timings_csv(&self) -> String {
        let mut s = String::from("method,seconds\n");
        for (m, t) in self.timings() {
            let _ = writeln!(s, "{m},{t:.3}");
        }
        s
    }

    /// Write `summary.csv`, `raw.csv`, `report.md`, `folds.csv` (compare
    /// only) and `timings.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        self.check_consistency()?;
        fs::create_dir_all(dir)?;
        fs::write(dir.join("summary.csv"), self.summary_csv())?;
        fs::write(dir.join("raw.csv"), self.raw_csv())?;
        fs::write(dir.join("report.md"), self.markdown())?;
        if !self.splits.is_empty() {
            fs::write(dir.join("folds.csv"), self.folds_csv())?;
        }
        fs::write(dir.join("timings.csv"), self.timings_csv())?;
        Ok(())
    }
}
