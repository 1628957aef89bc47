use std::io::{Read, Write};

use super::pipeline::DEFAULT_SCHOOL_COLUMN;
use super::{DataError, Result};

pub const LABEL_COLUMN: &str = "ALVO_CLASSIFICACAO";
pub const PROCESSED_DELIMITER: u8 = b',';

/// Row-major matrix of `{0,1}` cells.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl BinaryMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(DataError::InvalidArgument(format!(
                "{} cells for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|&v| v > 1) {
            return Err(DataError::InvalidArgument("cells must be 0 or 1".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn with_width(cols: usize) -> Self {
        Self {
            rows: 0,
            cols,
            data: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [u8] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[i * self.cols + j]
    }

    pub(crate) fn push_row(&mut self, row: &[u8]) {
        debug_assert_eq!(row.len(), self.cols);
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut out = Self::with_width(self.cols);
        out.data.reserve(indices.len() * self.cols);
        for &i in indices {
            out.push_row(self.row(i));
        }
        out
    }

    /// Copies the selected rows into a dense `f64` buffer (row-major).
    pub fn rows_as_f64(&self, indices: &[usize], out: &mut Vec<f64>) {
        out.clear();
        out.reserve(indices.len() * self.cols);
        for &i in indices {
            out.extend(self.row(i).iter().map(|&v| f64::from(v)));
        }
    }
}

/// One-hot encoded feature matrix with binary labels and school identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: BinaryMatrix,
    pub labels: Vec<u8>,
    pub school_ids: Vec<i64>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: BinaryMatrix,
        labels: Vec<u8>,
        school_ids: Vec<i64>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if labels.len() != features.rows() || school_ids.len() != features.rows() {
            return Err(DataError::InvalidArgument(format!(
                "{} feature rows, {} labels, {} school ids",
                features.rows(),
                labels.len(),
                school_ids.len()
            )));
        }
        if feature_names.len() != features.cols() {
            return Err(DataError::InvalidArgument(format!(
                "{} feature names for width {}",
                feature_names.len(),
                features.cols()
            )));
        }
        if labels.iter().any(|&y| y > 1) {
            return Err(DataError::InvalidArgument("labels must be 0 or 1".into()));
        }
        Ok(Self {
            features,
            labels,
            school_ids,
            feature_names,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.features.cols()
    }

    /// `[negatives, positives]`.
    pub fn class_counts(&self) -> [usize; 2] {
        let pos = self.labels.iter().filter(|&&y| y == 1).count();
        [self.len() - pos, pos]
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            school_ids: indices.iter().map(|&i| self.school_ids[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Writes the processed-dataset CSV: `ID_ESCOLA`, `ALVO_CLASSIFICACAO`,
    /// then one column per encoded feature.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .delimiter(PROCESSED_DELIMITER)
            .from_writer(writer);
        let mut header = vec![DEFAULT_SCHOOL_COLUMN.to_string(), LABEL_COLUMN.to_string()];
        header.extend(self.feature_names.iter().cloned());
        w.write_record(&header)?;
        let mut line: Vec<String> = Vec::with_capacity(header.len());
        for i in 0..self.len() {
            line.clear();
            line.push(self.school_ids[i].to_string());
            line.push(self.labels[i].to_string());
            line.extend(self.features.row(i).iter().map(|v| v.to_string()));
            w.write_record(&line)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(PROCESSED_DELIMITER)
            .from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.len() < 2 || header[0] != DEFAULT_SCHOOL_COLUMN || header[1] != LABEL_COLUMN {
            return Err(DataError::MissingColumn(format!(
                "{DEFAULT_SCHOOL_COLUMN},{LABEL_COLUMN} leading the header"
            )));
        }
        let names = header[2..].to_vec();
        let mut features = BinaryMatrix::with_width(names.len());
        let mut labels = Vec::new();
        let mut ids = Vec::new();
        let mut row = vec![0u8; names.len()];
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = |column: &str, message: &str| DataError::Schema {
                column: column.to_string(),
                row: r + 1,
                message: message.to_string(),
            };
            ids.push(
                rec[0]
                    .trim()
                    .parse::<i64>()
                    .map_err(|_| bad(&header[0], "expected an integer"))?,
            );
            labels.push(parse_bit(&rec[1]).ok_or_else(|| bad(&header[1], "expected 0 or 1"))?);
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = parse_bit(&rec[j + 2]).ok_or_else(|| bad(&names[j], "expected 0 or 1"))?;
            }
            features.push_row(&row);
        }
        Dataset::new(features, labels, ids, names)
    }
}

fn parse_bit(s: &str) -> Option<u8> {
    match s.trim() {
        "0" | "0.0" => Some(0),
        "1" | "1.0" => Some(1),
        _ => None,
    }
}
