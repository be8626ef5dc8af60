//! CSV ingestion and min-max normalization.

use std::collections::HashMap;
use std::path::Path;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::IntervalSample;
use crate::scalar::Scalar;
use crate::ClassId;

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    /// Zero-based column position.
    Index(usize),
    /// Header name; requires a header row.
    Name(String),
    Last,
    /// No label column (prediction input).
    None,
}

impl LabelColumn {
    /// Parses a flag value: an integer index, `last`, or a header name.
    pub fn parse(s: &str) -> Self {
        if s.eq_ignore_ascii_case("last") {
            LabelColumn::Last
        } else if let Ok(i) = s.parse::<usize>() {
            LabelColumn::Index(i)
        } else {
            LabelColumn::Name(s.to_string())
        }
    }
}

/// Parsed but unnormalized table. `lower == upper` for crisp columns.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable<T> {
    pub lower: Vec<Vec<T>>,
    pub upper: Vec<Vec<T>>,
    /// Empty when the table was read without a label column.
    pub labels: Vec<ClassId>,
    pub class_names: Vec<String>,
    pub feature_names: Option<Vec<String>>,
}

impl<T: Scalar> RawTable<T> {
    pub fn n_rows(&self) -> usize {
        self.lower.len()
    }

    pub fn n_features(&self) -> usize {
        self.lower.first().map_or(0, Vec::len)
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Crisp table with labels `0..n_classes` named by their id.
    pub fn from_crisp(rows: Vec<Vec<T>>, labels: Vec<ClassId>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::LengthMismatch {
                truth: labels.len(),
                predicted: rows.len(),
            });
        }
        let n_classes = labels.iter().max().map_or(0, |&c| c + 1);
        let table = Self {
            lower: rows.clone(),
            upper: rows,
            labels,
            class_names: (0..n_classes).map(|c| c.to_string()).collect(),
            feature_names: None,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_rows();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let p = self.n_features();
        if p == 0 {
            return Err(invalid("features", "table has no feature columns"));
        }
        if self.upper.len() != n {
            return Err(Error::LengthMismatch {
                truth: n,
                predicted: self.upper.len(),
            });
        }
        for (lo, up) in self.lower.iter().zip(&self.upper) {
            if lo.len() != p || up.len() != p {
                return Err(Error::Shape {
                    expected: p,
                    found: lo.len().max(up.len()),
                });
            }
            if lo.iter().zip(up).any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite()) {
                return Err(Error::OutOfRange(
                    "interval bounds must be finite with lower <= upper".into(),
                ));
            }
        }
        if !self.labels.is_empty() {
            if self.labels.len() != n {
                return Err(Error::LengthMismatch {
                    truth: self.labels.len(),
                    predicted: n,
                });
            }
            if let Some(&c) = self.labels.iter().find(|&&c| c >= self.n_classes()) {
                return Err(Error::OutOfRange(format!(
                    "label {c} has no class name ({} classes)",
                    self.n_classes()
                )));
            }
        }
        Ok(())
    }

    /// Rows at `indices`, in that order, sharing class and feature names.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            lower: indices.iter().map(|&i| self.lower[i].clone()).collect(),
            upper: indices.iter().map(|&i| self.upper[i].clone()).collect(),
            labels: if self.labels.is_empty() {
                Vec::new()
            } else {
                indices.iter().map(|&i| self.labels[i]).collect()
            },
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
        }
    }
}

/// Per-feature `(min, max)` used by min-max scaling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizationParams<T> {
    pub mins: Vec<T>,
    pub maxs: Vec<T>,
}

impl<T: Scalar> NormalizationParams<T> {
    pub fn fit(table: &RawTable<T>) -> Result<Self> {
        table.validate()?;
        let p = table.n_features();
        let mut mins = vec![T::infinity(); p];
        let mut maxs = vec![T::neg_infinity(); p];
        for (lo, up) in table.lower.iter().zip(&table.upper) {
            for j in 0..p {
                mins[j] = mins[j].min(lo[j]);
                maxs[j] = maxs[j].max(up[j]);
            }
        }
        Ok(Self { mins, maxs })
    }

    pub fn dims(&self) -> usize {
        self.mins.len()
    }

    fn scale(&self, j: usize, x: T) -> T {
        let range = self.maxs[j] - self.mins[j];
        if range > T::zero() {
            (x - self.mins[j]) / range
        } else {
            T::zero()
        }
    }
}

/// Labeled data with every coordinate in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub samples: Vec<IntervalSample<T>>,
    pub n_features: usize,
    pub n_classes: usize,
    pub class_names: Vec<String>,
    pub feature_names: Option<Vec<String>>,
    pub normalization: Option<NormalizationParams<T>>,
}

impl<T: Scalar> Dataset<T> {
    /// Wraps already-normalized samples; every sample must carry a label below `n_classes`.
    pub fn new(samples: Vec<IntervalSample<T>>, n_classes: usize) -> Result<Self> {
        let n_features = samples.first().ok_or(Error::EmptyDataset)?.dims();
        for (i, s) in samples.iter().enumerate() {
            if s.dims() != n_features {
                return Err(Error::Shape {
                    expected: n_features,
                    found: s.dims(),
                });
            }
            match s.class_label {
                None => return Err(Error::Unlabeled(i)),
                Some(c) if c >= n_classes => {
                    return Err(Error::OutOfRange(format!(
                        "sample {i} has label {c} but only {n_classes} classes"
                    )))
                }
                _ => {}
            }
        }
        Ok(Self {
            samples,
            n_features,
            n_classes,
            class_names: (0..n_classes).map(|c| c.to_string()).collect(),
            feature_names: None,
            normalization: None,
        })
    }

    /// Crisp points already in `[0, 1]`.
    pub fn from_crisp(rows: Vec<Vec<T>>, labels: Vec<ClassId>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::LengthMismatch {
                truth: labels.len(),
                predicted: rows.len(),
            });
        }
        let n_classes = labels.iter().max().map_or(0, |&c| c + 1);
        let samples = rows
            .into_iter()
            .zip(&labels)
            .map(|(r, &c)| IntervalSample::crisp(r, Some(c)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(samples, n_classes)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<ClassId> {
        self.samples
            .iter()
            .map(|s| s.class_label.expect("dataset samples are labeled"))
            .collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            ..self.clone_meta()
        }
    }

    fn clone_meta(&self) -> Self {
        Self {
            samples: Vec::new(),
            n_features: self.n_features,
            n_classes: self.n_classes,
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
            normalization: self.normalization.clone(),
        }
    }

    /// Back to a raw table (coordinates as stored).
    pub fn to_table(&self) -> RawTable<T> {
        RawTable {
            lower: self.samples.iter().map(|s| s.lower.clone()).collect(),
            upper: self.samples.iter().map(|s| s.upper.clone()).collect(),
            labels: self.labels(),
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
        }
    }
}

/// Min-max scales a table into `[0, 1]`.
///
/// Without `params` they are fitted on `table`. With `params`, results outside
/// `[0, 1]` are clipped; the second return value counts clipped coordinates.
/// Rows without a label produce unlabeled samples and an empty-class dataset is
/// not an error here, so prediction input goes through the same path.
pub fn normalize_minmax<T: Scalar>(
    table: &RawTable<T>,
    params: Option<&NormalizationParams<T>>,
) -> Result<(Dataset<T>, usize)> {
    table.validate()?;
    let fitted;
    let params = match params {
        Some(p) => {
            if p.dims() != table.n_features() || p.maxs.len() != p.dims() {
                return Err(Error::Shape {
                    expected: p.dims(),
                    found: table.n_features(),
                });
            }
            p
        }
        None => {
            fitted = NormalizationParams::fit(table)?;
            &fitted
        }
    };
    let mut clipped = 0usize;
    let mut samples = Vec::with_capacity(table.n_rows());
    for (i, (lo, up)) in table.lower.iter().zip(&table.upper).enumerate() {
        let p = lo.len();
        let mut lower = Vec::with_capacity(p);
        let mut upper = Vec::with_capacity(p);
        for j in 0..p {
            let (a, b) = (params.scale(j, lo[j]), params.scale(j, up[j]));
            let (ca, cb) = (clamp_unit(a), clamp_unit(b));
            // one count per cell, whether one or both bounds moved
            if ca != a || cb != b {
                clipped += 1;
            }
            lower.push(ca);
            upper.push(cb);
        }
        let label = table.labels.get(i).copied();
        samples.push(IntervalSample::new(lower, upper, label)?);
    }
    let dataset = Dataset {
        samples,
        n_features: table.n_features(),
        n_classes: table.n_classes(),
        class_names: table.class_names.clone(),
        feature_names: table.feature_names.clone(),
        normalization: Some(params.clone()),
    };
    Ok((dataset, clipped))
}

fn clamp_unit<T: Scalar>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

enum Column {
    Crisp(usize),
    Interval(usize, usize),
}

/// Reads a comma-separated table.
///
/// Features named `x.l` / `x.u` in the header are paired into one interval
/// feature `x`. Labels become dense ids in order of first appearance. Rows and
/// columns in error messages are 1-based file positions.
pub fn load_csv<T: Scalar>(
    path: impl AsRef<Path>,
    label_column: &LabelColumn,
    header: bool,
) -> Result<RawTable<T>> {
    let file = std::fs::File::open(path.as_ref()).map_err(|e| {
        Error::Csv(format!("cannot open {}: {e}", path.as_ref().display()))
    })?;
    read_csv(file, label_column, header)
}

/// As [`load_csv`] over any reader.
pub fn read_csv<T: Scalar, R: std::io::Read>(
    reader: R,
    label_column: &LabelColumn,
    header: bool,
) -> Result<RawTable<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let first = match records.next() {
        Some(r) => r.map_err(|e| Error::Csv(e.to_string()))?,
        None => return Err(Error::EmptyDataset),
    };
    let width = first.len();
    let header_names: Option<Vec<String>> =
        header.then(|| first.iter().map(str::to_string).collect());

    let label_idx = match label_column {
        LabelColumn::None => None,
        LabelColumn::Last => Some(width - 1),
        LabelColumn::Index(i) => {
            if *i >= width {
                return Err(invalid(
                    "label_column",
                    format!("index {i} but rows have {width} columns"),
                ));
            }
            Some(*i)
        }
        LabelColumn::Name(name) => {
            let names = header_names
                .as_ref()
                .ok_or_else(|| invalid("label_column", "a column name requires a header row"))?;
            Some(names.iter().position(|n| n == name).ok_or_else(|| {
                invalid("label_column", format!("no column named `{name}`"))
            })?)
        }
    };

    // Group feature columns, pairing `.l` / `.u` suffixes when a header is present.
    let feature_cols: Vec<usize> = (0..width).filter(|&c| Some(c) != label_idx).collect();
    let mut columns: Vec<Column> = Vec::new();
    let mut feature_names: Option<Vec<String>> = None;
    match &header_names {
        Some(names) => {
            let mut out_names = Vec::new();
            let mut pending: HashMap<String, (Option<usize>, Option<usize>, usize)> =
                HashMap::new();
            let mut order: Vec<String> = Vec::new();
            for &c in &feature_cols {
                let name = &names[c];
                let split = name
                    .strip_suffix(".l")
                    .map(|b| (b, true))
                    .or_else(|| name.strip_suffix(".u").map(|b| (b, false)));
                match split {
                    Some((base, is_lower)) => {
                        let entry = pending.entry(base.to_string()).or_insert_with(|| {
                            order.push(base.to_string());
                            (None, None, order.len() - 1)
                        });
                        let slot = if is_lower { &mut entry.0 } else { &mut entry.1 };
                        if slot.is_some() {
                            return Err(Error::Parse {
                                row: 1,
                                column: c + 1,
                                reason: format!("duplicate interval column `{name}`"),
                            });
                        }
                        *slot = Some(c);
                    }
                    None => {
                        order.push(name.clone());
                        pending.insert(format!("\0{}", order.len() - 1), (Some(c), Some(c), order.len() - 1));
                    }
                }
            }
            let mut grouped: Vec<(usize, usize, usize, String)> = Vec::new();
            for (key, (l, u, pos)) in &pending {
                let name = order[*pos].clone();
                match (l, u) {
                    (Some(l), Some(u)) => grouped.push((*pos, *l, *u, name)),
                    (Some(c), None) | (None, Some(c)) => {
                        return Err(Error::Parse {
                            row: 1,
                            column: c + 1,
                            reason: format!("interval column for `{}` lacks its partner", key),
                        })
                    }
                    (None, None) => unreachable!(),
                }
            }
            grouped.sort_by_key(|g| g.0);
            for (_, l, u, name) in grouped {
                columns.push(if l == u { Column::Crisp(l) } else { Column::Interval(l, u) });
                out_names.push(name);
            }
            feature_names = Some(out_names);
        }
        None => columns.extend(feature_cols.iter().map(|&c| Column::Crisp(c))),
    }
    if columns.is_empty() {
        return Err(invalid("features", "no feature columns"));
    }

    let mut table = RawTable {
        lower: Vec::new(),
        upper: Vec::new(),
        labels: Vec::new(),
        class_names: Vec::new(),
        feature_names,
    };
    let mut label_ids: HashMap<String, ClassId> = HashMap::new();

    let data_rows = (!header).then_some(Ok(first)).into_iter().chain(records);
    let offset = if header { 2 } else { 1 };
    for (r, rec) in data_rows.enumerate() {
        let row = r + offset;
        let rec = rec.map_err(|e| Error::Csv(format!("row {row}: {e}")))?;
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue; // blank line
        }
        if rec.len() != width {
            return Err(Error::Parse {
                row,
                column: rec.len().min(width) + 1,
                reason: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        let cell = |c: usize| -> Result<T> {
            let s = &rec[c];
            if s.is_empty() {
                return Err(Error::Parse {
                    row,
                    column: c + 1,
                    reason: "missing value".into(),
                });
            }
            let v: T = s.parse().map_err(|_| Error::Parse {
                row,
                column: c + 1,
                reason: format!("`{s}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: c + 1,
                    reason: format!("`{s}` is not finite"),
                });
            }
            Ok(v)
        };
        let mut lo = Vec::with_capacity(columns.len());
        let mut up = Vec::with_capacity(columns.len());
        for col in &columns {
            match *col {
                Column::Crisp(c) => {
                    let v = cell(c)?;
                    lo.push(v);
                    up.push(v);
                }
                Column::Interval(l, u) => {
                    let (a, b) = (cell(l)?, cell(u)?);
                    if a > b {
                        return Err(Error::Parse {
                            row,
                            column: u + 1,
                            reason: "interval upper bound is below its lower bound".into(),
                        });
                    }
                    lo.push(a);
                    up.push(b);
                }
            }
        }
        table.lower.push(lo);
        table.upper.push(up);
        if let Some(li) = label_idx {
            let name = &rec[li];
            if name.is_empty() {
                return Err(Error::Parse {
                    row,
                    column: li + 1,
                    reason: "missing label".into(),
                });
            }
            let next = label_ids.len();
            let id = *label_ids.entry(name.to_string()).or_insert_with(|| {
                table.class_names.push(name.to_string());
                next
            });
            table.labels.push(id);
        }
    }
    table.validate()?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, label: LabelColumn, header: bool) -> Result<RawTable<f64>> {
        read_csv(text.as_bytes(), &label, header)
    }

    #[test]
    fn labels_follow_first_appearance() {
        let t = parse("1,2,a\n3,4,b\n5,6,a\n", LabelColumn::Last, false).unwrap();
        assert_eq!(t.labels, vec![0, 1, 0]);
        assert_eq!(t.class_names, vec!["a", "b"]);
        assert_eq!(t.lower, vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]);
        assert!(t.feature_names.is_none());
    }

    #[test]
    fn blank_cell_reports_position() {
        let err = parse("x,y,c\n1,2,a\n3,,b\n", LabelColumn::Last, true).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => assert_eq!((row, column), (3, 2)),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn ragged_and_non_numeric_rows_fail() {
        assert!(matches!(
            parse("1,2,a\n3,b\n", LabelColumn::Last, false),
            Err(Error::Parse { row: 2, .. })
        ));
        assert!(matches!(
            parse("1,2,a\nx,4,b\n", LabelColumn::Last, false),
            Err(Error::Parse { row: 2, column: 1, .. })
        ));
    }

    #[test]
    fn header_gives_names_and_label_by_name() {
        let t = parse("cls,x,y\nu,1,2\nv,3,4\r\n", LabelColumn::Name("cls".into()), true).unwrap();
        assert_eq!(t.feature_names.as_deref(), Some(&["x".to_string(), "y".to_string()][..]));
        assert_eq!(t.labels, vec![0, 1]);
        assert_eq!(t.upper[1], vec![3.0, 4.0]);
    }

    #[test]
    fn interval_columns_are_paired() {
        let t = parse("a.l,b,a.u,c\n1,5,2,x\n0,6,3,y\n", LabelColumn::Last, true).unwrap();
        assert_eq!(t.feature_names.as_deref(), Some(&["a".to_string(), "b".to_string()][..]));
        assert_eq!(t.lower[0], vec![1.0, 5.0]);
        assert_eq!(t.upper[0], vec![2.0, 5.0]);
        assert!(parse("a.l,c\n1,x\n", LabelColumn::Last, true).is_err());
        assert!(parse("a.l,a.u,c\n3,2,x\n", LabelColumn::Last, true).is_err());
    }

    #[test]
    fn missing_file_is_an_error() {
        assert!(load_csv::<f64>("/nonexistent/file.csv", &LabelColumn::Last, false).is_err());
    }

    #[test]
    fn minmax_examples() {
        let t = RawTable::from_crisp(vec![vec![2.0, 5.0], vec![4.0, 5.0], vec![6.0, 5.0]], vec![0, 1, 0])
            .unwrap();
        let (d, clipped) = normalize_minmax(&t, None).unwrap();
        assert_eq!(clipped, 0);
        let col0: Vec<f64> = d.samples.iter().map(|s| s.lower[0]).collect();
        let col1: Vec<f64> = d.samples.iter().map(|s| s.lower[1]).collect();
        assert_eq!(col0, vec![0.0, 0.5, 1.0]);
        assert_eq!(col1, vec![0.0, 0.0, 0.0]);

        let params = d.normalization.clone().unwrap();
        let test = RawTable::from_crisp(vec![vec![7.0, 5.0]], vec![0]).unwrap();
        let (dt, clipped) = normalize_minmax(&test, Some(&params)).unwrap();
        assert_eq!(dt.samples[0].lower[0], 1.0);
        assert_eq!(clipped, 1);
    }

    #[test]
    fn normalization_is_idempotent() {
        let t = RawTable::from_crisp(
            vec![vec![-3.0, 10.0], vec![1.5, 12.0], vec![0.25, 11.0], vec![9.0, 10.5]],
            vec![0, 1, 1, 0],
        )
        .unwrap();
        let (d, _) = normalize_minmax(&t, None).unwrap();
        let params = d.normalization.clone().unwrap();
        let (again, clipped) = normalize_minmax(&t, Some(&params)).unwrap();
        assert_eq!(clipped, 0);
        assert_eq!(again.samples, d.samples);
        let (twice, _) = normalize_minmax(&d.to_table(), None).unwrap();
        assert_eq!(twice.samples, d.samples);
    }
}
