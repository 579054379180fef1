//! Mixed-type tabular data: schema, columns, labels and CSV ingestion.
//!
//! A [`Dataset`] is immutable once built. Case identity is the original row
//! index (`0..n`) and is preserved by every downstream operation, including
//! pruning inside the detector.

mod csv_io;
mod schema;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use csv_io::{
    infer_schema, infer_schema_from_path, load_csv, read_labels, read_scores, write_dataset,
    write_dataset_to, write_labels, write_scores, write_scores_to, MissingTokens,
};
pub use schema::{Attribute, AttributeKind, Schema};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("header is empty")]
    EmptyHeader,
    #[error("attribute name at position {0} is empty")]
    EmptyAttributeName(usize),
    #[error("duplicate attribute name `{0}`")]
    DuplicateAttribute(String),
    #[error("line {line}: expected {expected} fields, found {found}")]
    Arity {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column `{column}`: cannot parse `{value}` as a finite number")]
    BadNumber {
        line: u64,
        column: String,
        value: String,
    },
    #[error("header does not match schema: expected `{expected}`, found `{found}`")]
    HeaderMismatch { expected: String, found: String },
    #[error("column `{column}` has {found} cells, expected {expected}")]
    ColumnLength {
        column: String,
        expected: usize,
        found: usize,
    },
    #[error("column `{0}` contains a non-finite number")]
    NonFinite(String),
    #[error("schema has {schema} attributes but {columns} columns were supplied")]
    ColumnCount { schema: usize, columns: usize },
    #[error("column `{0}` does not match the kind declared in the schema")]
    KindMismatch(String),
    #[error("no scores to write")]
    EmptyScores,
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("invalid schema JSON: {0}")]
    SchemaJson(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A single cell as seen by callers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell<'a> {
    Missing,
    Number(f64),
    Category(&'a str),
}

impl Cell<'_> {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }
}

/// Dictionary-encoded categorical column. Levels are kept in order of first
/// appearance so that encoding is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalColumn {
    levels: Vec<String>,
    codes: Vec<Option<u32>>,
}

impl CategoricalColumn {
    pub fn from_values<I, S>(values: I) -> Self
    where
        I: IntoIterator<Item = Option<S>>,
        S: AsRef<str>,
    {
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut levels = Vec::new();
        let codes = values
            .into_iter()
            .map(|v| {
                v.map(|s| {
                    let s = s.as_ref();
                    if let Some(&code) = index.get(s) {
                        code
                    } else {
                        let code = levels.len() as u32;
                        levels.push(s.to_owned());
                        index.insert(s.to_owned(), code);
                        code
                    }
                })
            })
            .collect();
        Self { levels, codes }
    }

    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    pub fn codes(&self) -> &[Option<u32>] {
        &self.codes
    }

    pub fn get(&self, case: usize) -> Option<&str> {
        self.codes[case].map(|c| self.levels[c as usize].as_str())
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numerical(Vec<Option<f64>>),
    Categorical(CategoricalColumn),
}

impl Column {
    /// Numerical column; `None` marks a missing cell.
    pub fn numerical(values: Vec<Option<f64>>) -> Self {
        Column::Numerical(values)
    }

    /// Categorical column; `None` marks a missing cell.
    pub fn categorical<I, S>(values: I) -> Self
    where
        I: IntoIterator<Item = Option<S>>,
        S: AsRef<str>,
    {
        Column::Categorical(CategoricalColumn::from_values(values))
    }

    pub fn len(&self) -> usize {
        match self {
            Column::Numerical(v) => v.len(),
            Column::Categorical(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> AttributeKind {
        match self {
            Column::Numerical(_) => AttributeKind::Numerical,
            Column::Categorical(_) => AttributeKind::Categorical,
        }
    }

    pub fn cell(&self, case: usize) -> Cell<'_> {
        match self {
            Column::Numerical(v) => v[case].map_or(Cell::Missing, Cell::Number),
            Column::Categorical(c) => c.get(case).map_or(Cell::Missing, Cell::Category),
        }
    }
}

/// Columnar mixed-type table with stable case ids `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    columns: Vec<Column>,
    len: usize,
}

impl Dataset {
    pub fn new(schema: Schema, columns: Vec<Column>) -> Result<Self, DataError> {
        if schema.len() != columns.len() {
            return Err(DataError::ColumnCount {
                schema: schema.len(),
                columns: columns.len(),
            });
        }
        let len = columns.first().map_or(0, Column::len);
        for (attr, col) in schema.attributes().iter().zip(&columns) {
            if attr.kind != col.kind() {
                return Err(DataError::KindMismatch(attr.name.clone()));
            }
            if col.len() != len {
                return Err(DataError::ColumnLength {
                    column: attr.name.clone(),
                    expected: len,
                    found: col.len(),
                });
            }
            if let Column::Numerical(values) = col {
                if values.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(DataError::NonFinite(attr.name.clone()));
                }
            }
        }
        Ok(Self {
            schema,
            columns,
            len,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, attr: usize) -> &Column {
        &self.columns[attr]
    }

    /// Number of cases, `n`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of attributes, `p`.
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn case_ids(&self) -> std::ops::Range<usize> {
        0..self.len
    }

    pub fn cell(&self, case: usize, attr: usize) -> Cell<'_> {
        self.columns[attr].cell(case)
    }

    pub fn row(&self, case: usize) -> Vec<Cell<'_>> {
        self.columns.iter().map(|c| c.cell(case)).collect()
    }

    /// New dataset holding the given cases, renumbered `0..ids.len()` in the
    /// order supplied.
    pub fn subset(&self, ids: &[usize]) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|col| match col {
                Column::Numerical(v) => Column::Numerical(ids.iter().map(|&g| v[g]).collect()),
                Column::Categorical(c) => Column::categorical(ids.iter().map(|&g| c.get(g))),
            })
            .collect();
        Dataset {
            schema: self.schema.clone(),
            columns,
            len: ids.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AnomalyType {
    /// Extreme value on one or more numerical attributes.
    I,
    /// Rare categorical value or combination.
    II,
    /// Isolated in joint numerical space without extreme marginals.
    III,
    /// Categorical value common globally but rare in its numerical neighborhood.
    IV,
}

impl AnomalyType {
    pub const ALL: [AnomalyType; 4] = [
        AnomalyType::I,
        AnomalyType::II,
        AnomalyType::III,
        AnomalyType::IV,
    ];
}

impl fmt::Display for AnomalyType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AnomalyType::I => "I",
            AnomalyType::II => "II",
            AnomalyType::III => "III",
            AnomalyType::IV => "IV",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Normal,
    Anomaly(AnomalyType),
}

impl Label {
    pub fn is_anomaly(&self) -> bool {
        matches!(self, Label::Anomaly(_))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Normal => f.write_str("normal"),
            Label::Anomaly(t) => t.fmt(f),
        }
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "normal" => Ok(Label::Normal),
            "I" => Ok(Label::Anomaly(AnomalyType::I)),
            "II" => Ok(Label::Anomaly(AnomalyType::II)),
            "III" => Ok(Label::Anomaly(AnomalyType::III)),
            "IV" => Ok(Label::Anomaly(AnomalyType::IV)),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}

/// A dataset with ground-truth labels, one per case.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub data: Dataset,
    pub labels: Vec<Label>,
}

impl LabeledDataset {
    pub fn new(data: Dataset, labels: Vec<Label>) -> Result<Self, DataError> {
        if labels.len() != data.len() {
            return Err(DataError::ColumnLength {
                column: "label".into(),
                expected: data.len(),
                found: labels.len(),
            });
        }
        Ok(Self { data, labels })
    }

    pub fn anomalies(&self) -> impl Iterator<Item = (usize, AnomalyType)> + '_ {
        self.labels.iter().enumerate().filter_map(|(g, l)| match l {
            Label::Anomaly(t) => Some((g, *t)),
            Label::Normal => None,
        })
    }

    pub fn anomaly_flags(&self) -> Vec<bool> {
        self.labels.iter().map(Label::is_anomaly).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(attrs: &[(&str, AttributeKind)]) -> Schema {
        Schema::new(attrs.iter().map(|(n, k)| Attribute::new(*n, *k)).collect()).unwrap()
    }

    #[test]
    fn missing_never_equals_data() {
        let col = Column::categorical([Some("Missing"), None, Some("")]);
        assert_eq!(col.cell(0), Cell::Category("Missing"));
        assert_eq!(col.cell(1), Cell::Missing);
        assert_ne!(col.cell(1), Cell::Category(""));
        let num = Column::numerical(vec![Some(0.0), None]);
        assert_ne!(num.cell(1), Cell::Number(0.0));
    }

    #[test]
    fn rejects_ragged_columns() {
        let s = schema(&[
            ("x", AttributeKind::Numerical),
            ("c", AttributeKind::Categorical),
        ]);
        let err = Dataset::new(
            s,
            vec![
                Column::numerical(vec![Some(1.0), Some(2.0)]),
                Column::categorical([Some("a")]),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, DataError::ColumnLength { .. }));
    }

    #[test]
    fn rejects_non_finite() {
        let s = schema(&[("x", AttributeKind::Numerical)]);
        let err = Dataset::new(s, vec![Column::numerical(vec![Some(f64::NAN)])]).unwrap_err();
        assert!(matches!(err, DataError::NonFinite(_)));
    }

    #[test]
    fn subset_renumbers_cases() {
        let s = schema(&[
            ("x", AttributeKind::Numerical),
            ("c", AttributeKind::Categorical),
        ]);
        let d = Dataset::new(
            s,
            vec![
                Column::numerical(vec![Some(1.0), None, Some(3.0)]),
                Column::categorical([Some("a"), Some("b"), None]),
            ],
        )
        .unwrap();
        let sub = d.subset(&[2, 0]);
        assert_eq!(sub.len(), 2);
        assert_eq!(sub.row(0), vec![Cell::Number(3.0), Cell::Missing]);
        assert_eq!(sub.row(1), vec![Cell::Number(1.0), Cell::Category("a")]);
    }

    #[test]
    fn label_text_round_trips() {
        for l in [
            Label::Normal,
            Label::Anomaly(AnomalyType::I),
            Label::Anomaly(AnomalyType::IV),
        ] {
            assert_eq!(l.to_string().parse::<Label>().unwrap(), l);
        }
        assert!("V".parse::<Label>().is_err());
    }
}
