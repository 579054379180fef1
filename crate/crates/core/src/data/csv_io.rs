use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Attribute, AttributeKind, Cell, Column, DataError, Dataset, Label, Schema};
use crate::detector::{min_ranks, DetectionResult};

/// Cell values that are read as Missing. Defaults to the empty cell and `NA`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MissingTokens(BTreeSet<String>);

impl Default for MissingTokens {
    fn default() -> Self {
        Self::new(["", "NA"])
    }
}

impl MissingTokens {
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(tokens.into_iter().map(Into::into).collect())
    }

    pub fn contains(&self, cell: &str) -> bool {
        self.0.contains(cell)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

fn parse_finite(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Infers attribute kinds from a header and sample rows. A column is
/// numerical iff every non-missing sample cell parses as a finite real.
pub fn infer_schema<H, R, S>(
    header: &[H],
    sample_rows: &[R],
    missing: &MissingTokens,
) -> Result<Schema, DataError>
where
    H: AsRef<str>,
    R: AsRef<[S]>,
    S: AsRef<str>,
{
    if header.is_empty() {
        return Err(DataError::EmptyHeader);
    }
    let attributes = header
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let numeric =
                sample_rows
                    .iter()
                    .all(|row| match row.as_ref().get(j).map(AsRef::as_ref) {
                        None => true,
                        Some(cell) if missing.contains(cell) => true,
                        Some(cell) => parse_finite(cell).is_some(),
                    });
            let kind = if numeric {
                AttributeKind::Numerical
            } else {
                AttributeKind::Categorical
            };
            Attribute::new(name.as_ref(), kind)
        })
        .collect();
    Schema::new(attributes)
}

fn reader(path: &Path) -> Result<csv::Reader<File>, DataError> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?)
}

/// Reads the header and up to `limit` rows (all rows when `None`) and infers
/// a schema from them.
pub fn infer_schema_from_path(
    path: impl AsRef<Path>,
    missing: &MissingTokens,
    limit: Option<usize>,
) -> Result<Schema, DataError> {
    let mut rdr = reader(path.as_ref())?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.len() == 1 && header[0].is_empty() {
        return Err(DataError::EmptyHeader);
    }
    let mut rows: Vec<Vec<String>> = Vec::new();
    for rec in rdr.records() {
        if limit.is_some_and(|l| rows.len() >= l) {
            break;
        }
        rows.push(rec?.iter().map(str::to_owned).collect());
    }
    infer_schema(&header, &rows, missing)
}

enum Builder {
    Num(Vec<Option<f64>>),
    Cat(Vec<Option<String>>),
}

/// Loads a CSV file under a known schema. Case ids follow row order.
pub fn load_csv(
    path: impl AsRef<Path>,
    schema: &Schema,
    missing: &MissingTokens,
) -> Result<Dataset, DataError> {
    let mut rdr = reader(path.as_ref())?;
    let header = rdr.headers()?.clone();
    let expected: Vec<&str> = schema.names().collect();
    let found: Vec<&str> = header.iter().collect();
    if expected != found {
        return Err(DataError::HeaderMismatch {
            expected: expected.join(","),
            found: found.join(","),
        });
    }

    let mut builders: Vec<Builder> = schema
        .attributes()
        .iter()
        .map(|a| match a.kind {
            AttributeKind::Numerical => Builder::Num(Vec::new()),
            AttributeKind::Categorical => Builder::Cat(Vec::new()),
        })
        .collect();

    let mut record = csv::StringRecord::new();
    while rdr.read_record(&mut record)? {
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != schema.len() {
            return Err(DataError::Arity {
                line,
                expected: schema.len(),
                found: record.len(),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let is_missing = missing.contains(cell);
            match &mut builders[j] {
                Builder::Num(v) => {
                    if is_missing {
                        v.push(None);
                    } else {
                        let x = parse_finite(cell).ok_or_else(|| DataError::BadNumber {
                            line,
                            column: schema.attributes()[j].name.clone(),
                            value: cell.to_owned(),
                        })?;
                        v.push(Some(x));
                    }
                }
                Builder::Cat(v) => v.push((!is_missing).then(|| cell.to_owned())),
            }
        }
    }

    let columns = builders
        .into_iter()
        .map(|b| match b {
            Builder::Num(v) => Column::Numerical(v),
            Builder::Cat(v) => Column::categorical(v),
        })
        .collect();
    Dataset::new(schema.clone(), columns)
}

/// Writes a dataset as CSV. Missing cells are written empty; numbers use the
/// shortest representation that parses back to the same `f64`.
pub fn write_dataset(data: &Dataset, path: impl AsRef<Path>) -> Result<(), DataError> {
    write_dataset_to(data, BufWriter::new(File::create(path)?))
}

pub fn write_dataset_to<W: Write>(data: &Dataset, out: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(data.schema().names())?;
    let mut row: Vec<String> = Vec::with_capacity(data.width());
    for g in data.case_ids() {
        row.clear();
        row.extend(data.row(g).into_iter().map(|c| match c {
            Cell::Missing => String::new(),
            Cell::Number(x) => x.to_string(),
            Cell::Category(s) => s.to_owned(),
        }));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `case_id,aas,rank` rows ordered by case id. Rank 1 is the lowest
/// score; tied scores share the minimum rank of their group.
pub fn write_scores_to<W: Write>(scores: &[f64], out: W) -> Result<(), DataError> {
    if scores.is_empty() {
        return Err(DataError::EmptyScores);
    }
    let ranks = min_ranks(scores);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["case_id", "aas", "rank"])?;
    for (g, (s, r)) in scores.iter().zip(&ranks).enumerate() {
        w.write_record([g.to_string(), s.to_string(), r.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scores(result: &DetectionResult, path: impl AsRef<Path>) -> Result<(), DataError> {
    if result.scores.is_empty() {
        return Err(DataError::EmptyScores);
    }
    let file = BufWriter::new(File::create(path)?);
    write_scores_to(&result.scores, file)
}

pub fn write_labels(labels: &[Label], path: impl AsRef<Path>) -> Result<(), DataError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["case_id", "label"])?;
    for (g, l) in labels.iter().enumerate() {
        w.write_record([g.to_string(), l.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn read_pairs<T>(
    path: &Path,
    value_column: &str,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<Vec<(usize, T)>, DataError> {
    let mut rdr = reader(path)?;
    let header = rdr.headers()?.clone();
    let id_pos = header.iter().position(|h| h == "case_id");
    let val_pos = header.iter().position(|h| h == value_column);
    let (Some(id_pos), Some(val_pos)) = (id_pos, val_pos) else {
        return Err(DataError::Malformed {
            line: 1,
            message: format!("header must contain `case_id` and `{value_column}`"),
        });
    };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |pos: usize| {
            rec.get(pos).ok_or_else(|| DataError::Malformed {
                line,
                message: "row is too short".into(),
            })
        };
        let id = field(id_pos)?
            .trim()
            .parse::<usize>()
            .map_err(|e| DataError::Malformed {
                line,
                message: format!("bad case_id: {e}"),
            })?;
        let value =
            parse(field(val_pos)?).map_err(|message| DataError::Malformed { line, message })?;
        out.push((id, value));
    }
    Ok(out)
}

/// Reads a `case_id,label` file.
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<(usize, Label)>, DataError> {
    read_pairs(path.as_ref(), "label", |s| s.parse::<Label>())
}

/// Reads the `case_id` and `aas` columns of a scores file.
pub fn read_scores(path: impl AsRef<Path>) -> Result<Vec<(usize, f64)>, DataError> {
    read_pairs(path.as_ref(), "aas", |s| {
        parse_finite(s).ok_or_else(|| format!("bad score `{s}`"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(v: &[&[&str]]) -> Vec<Vec<String>> {
        v.iter()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    fn temp_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn infer_basic_kinds() {
        let s = infer_schema(
            &["x", "y", "color"],
            &rows(&[&["1.0", "2", "red"]]),
            &MissingTokens::default(),
        )
        .unwrap();
        let kinds: Vec<_> = s.attributes().iter().map(|a| a.kind).collect();
        assert_eq!(
            kinds,
            [
                AttributeKind::Numerical,
                AttributeKind::Numerical,
                AttributeKind::Categorical
            ]
        );
    }

    #[test]
    fn infer_ignores_missing_tokens() {
        let s = infer_schema(
            &["v"],
            &rows(&[&["1"], &["2"], &["NA"]]),
            &MissingTokens::default(),
        )
        .unwrap();
        assert_eq!(s.attributes()[0].kind, AttributeKind::Numerical);
        let s = infer_schema(
            &["v"],
            &rows(&[&["1"], &["2"], &["two"]]),
            &MissingTokens::default(),
        )
        .unwrap();
        assert_eq!(s.attributes()[0].kind, AttributeKind::Categorical);
    }

    #[test]
    fn infer_treats_nan_text_as_categorical() {
        let s = infer_schema(
            &["v"],
            &rows(&[&["1"], &["inf"]]),
            &MissingTokens::default(),
        )
        .unwrap();
        assert_eq!(s.attributes()[0].kind, AttributeKind::Categorical);
    }

    #[test]
    fn infer_rejects_bad_headers() {
        let m = MissingTokens::default();
        let none: &[Vec<String>] = &[];
        assert!(matches!(
            infer_schema::<&str, _, String>(&[], none, &m),
            Err(DataError::EmptyHeader)
        ));
        assert!(matches!(
            infer_schema(&["a", "a"], none, &m),
            Err(DataError::DuplicateAttribute(_))
        ));
    }

    #[test]
    fn load_assigns_ids_and_missing() {
        let f = temp_csv("x,c\n1.5,a\n,NA\n3,\"b,c\"\n");
        let m = MissingTokens::default();
        let schema = infer_schema_from_path(f.path(), &m, None).unwrap();
        let d = load_csv(f.path(), &schema, &m).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.case_ids().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(d.row(1), vec![Cell::Missing, Cell::Missing]);
        assert_eq!(d.row(2), vec![Cell::Number(3.0), Cell::Category("b,c")]);
    }

    #[test]
    fn load_reports_arity_line() {
        let f = temp_csv("x,y\n1,2\n3\n");
        let schema = Schema::new(vec![
            Attribute::new("x", AttributeKind::Numerical),
            Attribute::new("y", AttributeKind::Numerical),
        ])
        .unwrap();
        let err = load_csv(f.path(), &schema, &MissingTokens::default()).unwrap_err();
        match err {
            DataError::Arity { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn load_reports_bad_number() {
        let f = temp_csv("x\n1\nabc\n");
        let schema = Schema::new(vec![Attribute::new("x", AttributeKind::Numerical)]).unwrap();
        let err = load_csv(f.path(), &schema, &MissingTokens::default()).unwrap_err();
        match err {
            DataError::BadNumber {
                line,
                column,
                value,
            } => {
                assert_eq!((line, column.as_str(), value.as_str()), (3, "x", "abc"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn custom_missing_token() {
        let f = temp_csv("x\n1\n?\n");
        let schema = Schema::new(vec![Attribute::new("x", AttributeKind::Numerical)]).unwrap();
        let d = load_csv(f.path(), &schema, &MissingTokens::new(["?"])).unwrap();
        assert_eq!(d.cell(1, 0), Cell::Missing);
    }

    #[test]
    fn scores_file_layout() {
        let mut buf = Vec::new();
        write_scores_to(&[99.0, 1.0], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "case_id,aas,rank\n0,99,2\n1,1,1\n"
        );

        let mut buf = Vec::new();
        write_scores_to(&[1.0, 1.0, 5.0], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "case_id,aas,rank\n0,1,1\n1,1,1\n2,5,3\n"
        );

        assert!(matches!(
            write_scores_to(&[], Vec::new()),
            Err(DataError::EmptyScores)
        ));
    }

    #[test]
    fn labels_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("labels.csv");
        let labels = vec![
            Label::Normal,
            Label::Anomaly(super::super::AnomalyType::III),
        ];
        write_labels(&labels, &p).unwrap();
        let back = read_labels(&p).unwrap();
        assert_eq!(back, vec![(0, labels[0]), (1, labels[1])]);
    }
}
