//! Greedy orthogonal least squares feature selection.
//!
//! For each class the centred 0/1 indicator is regressed on a growing set
//! of feature columns. At every step the candidate whose component
//! orthogonal to the selected columns best explains the current residual is
//! added. Inputs are expected to be column-normalized.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Candidates whose orthogonalized norm falls below this fraction of the
/// original norm are treated as collinear with the selected set.
pub const COLLINEAR_TOL: f64 = 1e-10;
/// Selection stops when the best residual reduction is at most this fraction
/// of the initial residual.
pub const EXHAUSTION_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatselError {
    #[error("cannot select {count} of {dims} columns from {rows} rows (need count <= columns and count < rows)")]
    CountTooLarge { count: usize, dims: usize, rows: usize },
    #[error("selection needs at least two classes, found {0}")]
    SingleClass(usize),
    #[error("target length {target} does not match {rows} rows")]
    TargetLength { target: usize, rows: usize },
    #[error("indicator target must contain both 0 and 1 and nothing else")]
    InvalidTarget,
    #[error("column index {index} out of range for {dims} columns")]
    IndexOutOfRange { index: usize, dims: usize },
    #[error("malformed selection file at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// One-versus-all 0/1 target for class `class`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorTarget {
    pub class: u16,
    pub values: Vec<f64>,
}

impl IndicatorTarget {
    pub fn new(labels: &[u16], class: u16) -> Result<Self, FeatselError> {
        let t = IndicatorTarget {
            class,
            values: labels.iter().map(|&l| if l == class { 1.0 } else { 0.0 }).collect(),
        };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<(), FeatselError> {
        let ones = self.values.iter().filter(|&&v| v == 1.0).count();
        let zeros = self.values.iter().filter(|&&v| v == 0.0).count();
        if ones == 0 || zeros == 0 || ones + zeros != self.values.len() {
            return Err(FeatselError::InvalidTarget);
        }
        Ok(())
    }

    /// Indicator minus its mean, which stands in for an intercept.
    pub fn centred(&self) -> Vec<f64> {
        let mean = self.values.iter().sum::<f64>() / self.values.len() as f64;
        self.values.iter().map(|v| v - mean).collect()
    }
}

/// Ordered picks for one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSelection {
    pub class: u16,
    pub indices: Vec<usize>,
    /// Residual sum of squares before any pick, then after each pick.
    pub residuals: Vec<f64>,
    /// Stopped before reaching the requested count because no remaining
    /// column reduced the residual.
    pub exhausted: bool,
}

impl ClassSelection {
    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("history starts with the initial residual")
    }
}

/// Per-class selections plus their deduplicated union.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsSelection {
    /// Width of the matrix the selection was made on.
    pub dims: usize,
    pub classes: Vec<ClassSelection>,
    /// Ascending column indices chosen by any class.
    pub union: Vec<usize>,
    /// For each union entry, the classes that picked it.
    pub provenance: Vec<Vec<u16>>,
}

impl OlsSelection {
    pub fn from_classes(dims: usize, classes: Vec<ClassSelection>) -> Self {
        let mut owners: BTreeMap<usize, Vec<u16>> = BTreeMap::new();
        for c in &classes {
            for &i in &c.indices {
                owners.entry(i).or_default().push(c.class);
            }
        }
        let (union, provenance) = owners.into_iter().unzip();
        OlsSelection {
            dims,
            classes,
            union,
            provenance,
        }
    }

    /// Union size over `dims`.
    pub fn feature_richness(&self) -> f64 {
        if self.dims == 0 {
            0.0
        } else {
            self.union.len() as f64 / self.dims as f64
        }
    }

    /// Text form: a header, one line per class, and a union line.
    pub fn to_text(&self) -> String {
        let join = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>().join(" ");
        let mut s = String::new();
        writeln!(s, "# dtscatter selection v1").unwrap();
        writeln!(s, "# class <id> | <indices> | <final residual> | <residual history> | ok|exhausted").unwrap();
        writeln!(s, "dims {}", self.dims).unwrap();
        for c in &self.classes {
            writeln!(
                s,
                "class {} | {} | {:e} | {} | {}",
                c.class,
                join(&mut c.indices.iter().map(|i| i.to_string())),
                c.final_residual(),
                join(&mut c.residuals.iter().map(|r| format!("{r:e}"))),
                if c.exhausted { "exhausted" } else { "ok" }
            )
            .unwrap();
        }
        writeln!(s, "union | {}", join(&mut self.union.iter().map(|i| i.to_string()))).unwrap();
        s
    }

    pub fn from_text(text: &str) -> Result<Self, FeatselError> {
        let mut dims = None;
        let mut classes = Vec::new();
        let mut union_line = None;
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let err = |reason: &str| FeatselError::Parse {
                line: line_no,
                reason: reason.to_string(),
            };
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("dims ") {
                dims = Some(rest.trim().parse::<usize>().map_err(|_| err("bad dims"))?);
            } else if let Some(rest) = line.strip_prefix("class ") {
                let fields: Vec<&str> = rest.split('|').map(str::trim).collect();
                if fields.len() != 5 {
                    return Err(err("class line needs 5 fields"));
                }
                let class = fields[0].parse().map_err(|_| err("bad class id"))?;
                let indices = parse_list::<usize>(fields[1]).ok_or_else(|| err("bad index list"))?;
                let residuals = parse_list::<f64>(fields[3]).ok_or_else(|| err("bad residual history"))?;
                let final_residual: f64 = fields[2].parse().map_err(|_| err("bad residual"))?;
                if residuals.last() != Some(&final_residual) || residuals.len() != indices.len() + 1 {
                    return Err(err("residual history inconsistent with picks"));
                }
                let exhausted = match fields[4] {
                    "ok" => false,
                    "exhausted" => true,
                    _ => return Err(err("expected ok or exhausted")),
                };
                classes.push(ClassSelection {
                    class,
                    indices,
                    residuals,
                    exhausted,
                });
            } else if let Some(rest) = line.strip_prefix("union |") {
                union_line = Some((line_no, parse_list::<usize>(rest).ok_or_else(|| err("bad union list"))?));
            } else {
                return Err(err("unrecognised line"));
            }
        }
        let dims = dims.ok_or(FeatselError::Parse {
            line: 0,
            reason: "missing dims line".into(),
        })?;
        let sel = OlsSelection::from_classes(dims, classes);
        match union_line {
            Some((_, u)) if u == sel.union => {}
            Some((line, _)) => {
                return Err(FeatselError::Parse {
                    line,
                    reason: "union does not match class lines".into(),
                })
            }
            None => {
                return Err(FeatselError::Parse {
                    line: 0,
                    reason: "missing union line".into(),
                })
            }
        }
        if let Some(&bad) = sel.union.iter().find(|&&i| i >= dims) {
            return Err(FeatselError::IndexOutOfRange { index: bad, dims });
        }
        Ok(sel)
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Option<Vec<T>> {
    s.split_whitespace().map(|t| t.parse().ok()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Candidate {
    index: usize,
    /// Column orthogonalized against every selected direction so far.
    w: Vec<f64>,
    orig_norm: f64,
}

/// Greedy OLS on one indicator target.
pub fn ols_select(
    features: ArrayView2<'_, f64>,
    target: &IndicatorTarget,
    count: usize,
) -> Result<ClassSelection, FeatselError> {
    let (rows, dims) = features.dim();
    if target.values.len() != rows {
        return Err(FeatselError::TargetLength {
            target: target.values.len(),
            rows,
        });
    }
    target.validate()?;
    if count > dims || count >= rows {
        return Err(FeatselError::CountTooLarge { count, dims, rows });
    }
    let mut r = target.centred();
    let rss0 = dot(&r, &r);
    let mut out = ClassSelection {
        class: target.class,
        indices: Vec::with_capacity(count),
        residuals: vec![rss0],
        exhausted: false,
    };
    if count == 0 {
        return Ok(out);
    }

    let mut cands: Vec<Candidate> = (0..dims)
        .into_par_iter()
        .map(|c| {
            let w = features.column(c).to_vec();
            let orig_norm = dot(&w, &w).sqrt();
            Candidate { index: c, w, orig_norm }
        })
        .filter(|c| c.orig_norm > 0.0)
        .collect();

    while out.indices.len() < count {
        // Score every candidate; the reduction is (w·r)² / ‖w‖².
        let scores: Vec<Option<f64>> = cands
            .par_iter()
            .map(|c| {
                let nn = dot(&c.w, &c.w);
                if nn.sqrt() < COLLINEAR_TOL * c.orig_norm {
                    None
                } else {
                    let p = dot(&c.w, &r);
                    Some(p * p / nn)
                }
            })
            .collect();
        let mut best: Option<(usize, f64)> = None;
        for (pos, s) in scores.iter().enumerate() {
            if let Some(s) = *s {
                if best.is_none_or(|(_, b)| s > b) {
                    best = Some((pos, s));
                }
            }
        }
        let Some((pos, _)) = best.filter(|&(_, s)| s > EXHAUSTION_TOL * rss0) else {
            out.exhausted = true;
            break;
        };
        let chosen_index = cands[pos].index;
        let mut alive = scores.iter().map(Option::is_some);
        cands.retain(|_| alive.next().unwrap());
        let pos = cands.iter().position(|c| c.index == chosen_index).unwrap();
        let chosen = cands.remove(pos);
        let norm = dot(&chosen.w, &chosen.w).sqrt();
        let q: Vec<f64> = chosen.w.iter().map(|v| v / norm).collect();

        let pr = dot(&q, &r);
        r.iter_mut().zip(&q).for_each(|(ri, qi)| *ri -= pr * qi);
        let prev = *out.residuals.last().unwrap();
        out.indices.push(chosen.index);
        out.residuals.push(dot(&r, &r).min(prev));

        cands.par_iter_mut().for_each(|c| {
            let p = dot(&q, &c.w);
            c.w.iter_mut().zip(&q).for_each(|(wi, qi)| *wi -= p * qi);
        });
    }
    Ok(out)
}

/// Runs [`ols_select`] for every class present in `labels`, in ascending
/// class order.
pub fn select_all_classes(
    features: ArrayView2<'_, f64>,
    labels: &[u16],
    per_class_count: usize,
) -> Result<OlsSelection, FeatselError> {
    if labels.len() != features.nrows() {
        return Err(FeatselError::TargetLength {
            target: labels.len(),
            rows: features.nrows(),
        });
    }
    let mut classes: Vec<u16> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(FeatselError::SingleClass(classes.len()));
    }
    let per_class = classes
        .par_iter()
        .map(|&c| ols_select(features, &IndicatorTarget::new(labels, c)?, per_class_count))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OlsSelection::from_classes(features.ncols(), per_class))
}

/// Copies `columns` of `features` in the given order.
pub fn select_columns(features: ArrayView2<'_, f64>, columns: &[usize]) -> Result<Array2<f64>, FeatselError> {
    let dims = features.ncols();
    if let Some(&bad) = columns.iter().find(|&&c| c >= dims) {
        return Err(FeatselError::IndexOutOfRange { index: bad, dims });
    }
    Ok(Array2::from_shape_fn((features.nrows(), columns.len()), |(r, k)| {
        features[[r, columns[k]]]
    }))
}

/// Reduces `features` to the union columns of `selection`.
pub fn apply_selection(features: ArrayView2<'_, f64>, selection: &OlsSelection) -> Result<Array2<f64>, FeatselError> {
    select_columns(features, &selection.union)
}
