use serde::{Deserialize, Serialize};
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub config: String,
    pub train_size: usize,
    pub seed: u64,
    pub selected_dims: usize,
    pub feature_richness: f64,
    pub accuracy: f64,
    pub unconverged_classes: usize,
    pub select_seconds: f64,
    pub train_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AccuracyTable {
    pub rows: Vec<AccuracyRow>,
}

const HEADER: [&str; 9] = [
    "config",
    "train_size",
    "seed",
    "selected_dims",
    "feature_richness",
    "accuracy",
    "unconverged_classes",
    "select_seconds",
    "train_seconds",
];

impl AccuracyRow {
    fn cells(&self) -> [String; 9] {
        [
            self.config.clone(),
            self.train_size.to_string(),
            self.seed.to_string(),
            self.selected_dims.to_string(),
            format!("{:.4}", self.feature_richness),
            format!("{:.4}", self.accuracy),
            self.unconverged_classes.to_string(),
            format!("{:.3}", self.select_seconds),
            format!("{:.3}", self.train_seconds),
        ]
    }
}

impl AccuracyTable {
    pub fn to_csv(&self) -> String {
        let mut out = HEADER.join(",");
        out.push('\n');
        for r in &self.rows {
            let mut cells = r.cells();
            if cells[0].contains([',', '"', '\n']) {
                cells[0] = format!("\"{}\"", cells[0].replace('"', "\"\""));
            }
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Markdown table with columns padded to a common width.
    pub fn to_markdown(&self) -> String {
        let body: Vec<[String; 9]> = self.rows.iter().map(AccuracyRow::cells).collect();
        let mut width: Vec<usize> = HEADER.iter().map(|h| h.len()).collect();
        for cells in &body {
            for (w, c) in width.iter_mut().zip(cells) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: &mut dyn Iterator<Item = &str>| {
            out.push('|');
            for (c, w) in cells.zip(&width) {
                let _ = write!(out, " {c:<w$} |");
            }
            out.push('\n');
        };
        line(&mut out, &mut HEADER.iter().copied());
        out.push('|');
        for w in &width {
            let _ = write!(out, "{}|", "-".repeat(w + 2));
        }
        out.push('\n');
        for cells in &body {
            line(&mut out, &mut cells.iter().map(String::as_str));
        }
        out
    }

    pub fn accuracy(&self, config: &str, size: usize, seed: u64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.config == config && r.train_size == size && r.seed == seed)
            .map(|r| r.accuracy)
    }

    /// Seeds (of those present for both) where `better(a, b)` holds for the
    /// accuracies of the two (config, size) cells, and the number compared.
    pub fn seed_wins(
        &self,
        a: (&str, usize),
        b: (&str, usize),
        better: impl Fn(f64, f64) -> bool,
    ) -> (usize, usize) {
        let mut seeds: Vec<u64> = self.rows.iter().map(|r| r.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        let mut wins = 0;
        let mut compared = 0;
        for s in seeds {
            if let (Some(x), Some(y)) = (self.accuracy(a.0, a.1, s), self.accuracy(b.0, b.1, s)) {
                compared += 1;
                wins += better(x, y) as usize;
            }
        }
        (wins, compared)
    }
}
