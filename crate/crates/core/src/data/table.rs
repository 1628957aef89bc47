use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use super::{DataError, Result};

/// Untyped categorical table as read from the microdata file.
///
/// A cell is `None` when the file had an empty field. Marker tokens such as
/// `.` are kept verbatim here; the pipeline decides what counts as missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTable {
    column_names: Vec<String>,
    rows: Vec<Vec<Option<String>>>,
}

impl RawTable {
    pub fn new(column_names: Vec<String>, rows: Vec<Vec<Option<String>>>) -> Result<Self> {
        let mut seen = HashSet::new();
        for name in &column_names {
            if !seen.insert(name.as_str()) {
                return Err(DataError::DuplicateColumn(name.clone()));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != column_names.len() {
                return Err(DataError::RaggedRow {
                    row: i + 1,
                    expected: column_names.len(),
                    found: row.len(),
                });
            }
        }
        Ok(Self { column_names, rows })
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn rows(&self) -> &[Vec<Option<String>>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.column_names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    }

    pub fn column(&self, index: usize) -> impl Iterator<Item = Option<&str>> + '_ {
        self.rows.iter().map(move |r| r[index].as_deref())
    }

    pub(crate) fn filter_rows(&self, mut keep: impl FnMut(&[Option<String>]) -> bool) -> Self {
        Self {
            column_names: self.column_names.clone(),
            rows: self.rows.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }

    pub(crate) fn into_rows(self) -> Vec<Vec<Option<String>>> {
        self.rows
    }

    /// Reads a delimited file with a header row.
    ///
    /// When `keep` is given only those columns are retained (in the order they
    /// appear in `keep`); every other column is skipped while parsing.
    pub fn read_csv<R: Read>(reader: R, delimiter: u8, keep: Option<&[String]>) -> Result<Self> {
        let mut rows = Vec::new();
        let columns = for_each_record(reader, delimiter, keep, |row| {
            rows.push(row);
            Ok(())
        })?;
        Ok(Self {
            column_names: columns,
            rows,
        })
    }

    pub fn from_path(path: impl AsRef<Path>, delimiter: u8, keep: Option<&[String]>) -> Result<Self> {
        Self::read_csv(super::open(path.as_ref())?, delimiter, keep)
    }

    pub fn write_csv<W: Write>(&self, writer: W, delimiter: u8) -> Result<()> {
        let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(writer);
        w.write_record(&self.column_names)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.as_deref().unwrap_or("")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Streams records through `sink`, returning the retained column names.
pub(crate) fn for_each_record<R: Read>(
    reader: R,
    delimiter: u8,
    keep: Option<&[String]>,
    mut sink: impl FnMut(Vec<Option<String>>) -> Result<()>,
) -> Result<Vec<String>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let projection: Vec<usize> = match keep {
        Some(cols) => cols
            .iter()
            .map(|c| {
                header
                    .iter()
                    .position(|h| h == c)
                    .ok_or_else(|| DataError::MissingColumn(c.clone()))
            })
            .collect::<Result<_>>()?,
        None => (0..header.len()).collect(),
    };
    let names: Vec<String> = projection.iter().map(|&i| header[i].clone()).collect();
    {
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(DataError::DuplicateColumn(n.clone()));
            }
        }
    }

    let mut record = csv::StringRecord::new();
    let mut row_no = 0;
    while rdr.read_record(&mut record)? {
        row_no += 1;
        if record.len() != header.len() {
            return Err(DataError::RaggedRow {
                row: row_no,
                expected: header.len(),
                found: record.len(),
            });
        }
        let row = projection
            .iter()
            .map(|&i| {
                let cell = record[i].trim();
                (!cell.is_empty()).then(|| cell.to_string())
            })
            .collect();
        sink(row)?;
    }
    Ok(names)
}
