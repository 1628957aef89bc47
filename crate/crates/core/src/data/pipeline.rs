use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::{BinaryMatrix, Dataset};
use super::table::{for_each_record, RawTable};
use super::{DataError, Result};

pub const DEFAULT_SCHOOL_COLUMN: &str = "ID_ESCOLA";
pub const DEFAULT_TARGET_COLUMN: &str = "PROFICIENCIA_MT";

/// Default selection of 11 student-questionnaire columns (parental
/// education, income proxies, household resources, gender, race).
pub const DEFAULT_FEATURE_COLUMNS: [&str; 11] = [
    "TX_RESP_Q01",
    "TX_RESP_Q02",
    "TX_RESP_Q03",
    "TX_RESP_Q04",
    "TX_RESP_Q05a",
    "TX_RESP_Q05b",
    "TX_RESP_Q06",
    "TX_RESP_Q07",
    "TX_RESP_Q08",
    "TX_RESP_Q09",
    "TX_RESP_Q12",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineSpec {
    pub feature_columns: Vec<String>,
    pub school_id_column: String,
    pub target_column: String,
    /// Cell tokens treated as missing in addition to empty cells.
    pub missing_markers: BTreeSet<String>,
}

impl Default for PipelineSpec {
    fn default() -> Self {
        Self {
            feature_columns: DEFAULT_FEATURE_COLUMNS.iter().map(|s| s.to_string()).collect(),
            school_id_column: DEFAULT_SCHOOL_COLUMN.to_string(),
            target_column: DEFAULT_TARGET_COLUMN.to_string(),
            missing_markers: [".", "*"].iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl PipelineSpec {
    pub fn validate(&self) -> Result<()> {
        if self.feature_columns.is_empty() {
            return Err(DataError::InvalidSpec("feature_columns is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for c in &self.feature_columns {
            if c == &self.school_id_column || c == &self.target_column {
                return Err(DataError::InvalidSpec(format!(
                    "feature column `{c}` collides with the id/target column"
                )));
            }
            if !seen.insert(c) {
                return Err(DataError::InvalidSpec(format!("feature column `{c}` listed twice")));
            }
        }
        if self.school_id_column == self.target_column {
            return Err(DataError::InvalidSpec("id and target column are the same".into()));
        }
        Ok(())
    }

    pub fn is_missing(&self, cell: Option<&str>) -> bool {
        match cell {
            None => true,
            Some(c) => c.is_empty() || self.missing_markers.contains(c),
        }
    }

    /// `[school id, target, features...]`, the projection the pipeline reads.
    pub fn required_columns(&self) -> Vec<String> {
        let mut cols = vec![self.school_id_column.clone(), self.target_column.clone()];
        cols.extend(self.feature_columns.iter().cloned());
        cols
    }
}

/// Labels each score 1 iff it lies strictly above the median.
pub fn binarize_target(scores: &[f64]) -> Result<(Vec<u8>, f64)> {
    if scores.is_empty() {
        return Err(DataError::NoScores);
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(DataError::InvalidArgument("non-finite score".into()));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let threshold = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let labels = scores.iter().map(|&s| u8::from(s > threshold)).collect();
    Ok((labels, threshold))
}

pub fn drop_missing_target(table: &RawTable, spec: &PipelineSpec) -> Result<RawTable> {
    let idx = table.column_index(&spec.target_column)?;
    Ok(table.filter_rows(|row| !spec.is_missing(row[idx].as_deref())))
}

fn mode_from_counts<'a>(counts: impl IntoIterator<Item = (&'a str, usize)>) -> Option<&'a str> {
    // Ascending key order plus strict `>` keeps the smallest category on ties.
    let mut best: Option<(&str, usize)> = None;
    for (cat, n) in counts {
        if best.is_none_or(|(_, b)| n > b) {
            best = Some((cat, n));
        }
    }
    best.map(|(c, _)| c)
}

/// Fills missing cells with the most frequent category (ties go to the
/// lexicographically smallest one).
pub fn impute_mode(column: &[Option<String>]) -> Result<Vec<String>> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for cell in column.iter().flatten() {
        *counts.entry(cell.as_str()).or_default() += 1;
    }
    let mode = mode_from_counts(counts)
        .ok_or_else(|| DataError::CannotImpute("<unnamed>".into()))?
        .to_string();
    Ok(column
        .iter()
        .map(|c| c.clone().unwrap_or_else(|| mode.clone()))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnCategories {
    pub column: String,
    /// Sorted lexicographically; position is the offset inside the block.
    pub categories: Vec<String>,
}

/// Fixed categorical-to-binary layout. Unseen or missing categories encode
/// as an all-zero block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneHotEncoder {
    columns: Vec<ColumnCategories>,
    offsets: Vec<usize>,
    width: usize,
}

impl OneHotEncoder {
    pub fn from_categories(mut columns: Vec<ColumnCategories>) -> Self {
        let mut offsets = Vec::with_capacity(columns.len());
        let mut width = 0;
        for c in &mut columns {
            c.categories.sort();
            c.categories.dedup();
            offsets.push(width);
            width += c.categories.len();
        }
        Self {
            columns,
            offsets,
            width,
        }
    }

    /// Discovers the observed (non-missing) categories of each feature column.
    pub fn fit(table: &RawTable, spec: &PipelineSpec) -> Result<Self> {
        let columns = spec
            .feature_columns
            .iter()
            .map(|name| {
                let idx = table.column_index(name)?;
                let cats: BTreeSet<&str> = table.column(idx).filter(|c| !spec.is_missing(*c)).flatten().collect();
                Ok(ColumnCategories {
                    column: name.clone(),
                    categories: cats.into_iter().map(str::to_string).collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_categories(columns))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn columns(&self) -> &[ColumnCategories] {
        &self.columns
    }

    pub fn block(&self, column: usize) -> Range<usize> {
        let start = self.offsets[column];
        start..start + self.columns[column].categories.len()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .flat_map(|c| c.categories.iter().map(move |cat| format!("{}_{}", c.column, cat)))
            .collect()
    }

    /// Writes one encoded row into `out` (length `width`).
    pub fn encode_cells<'a>(&self, cells: impl IntoIterator<Item = Option<&'a str>>, out: &mut [u8]) {
        out.fill(0);
        for (col, cell) in cells.into_iter().enumerate().take(self.columns.len()) {
            if let Some(cell) = cell {
                if let Ok(pos) = self.columns[col].categories.binary_search_by(|c| c.as_str().cmp(cell)) {
                    out[self.offsets[col] + pos] = 1;
                }
            }
        }
    }

    /// Encodes the feature columns of any table with this layout.
    pub fn transform(&self, table: &RawTable, spec: &PipelineSpec) -> Result<BinaryMatrix> {
        let idx: Vec<usize> = self
            .columns
            .iter()
            .map(|c| table.column_index(&c.column))
            .collect::<Result<_>>()?;
        let mut m = BinaryMatrix::zeros(table.len(), self.width);
        for (r, row) in table.rows().iter().enumerate() {
            let cells = idx.iter().map(|&i| {
                let cell = row[i].as_deref();
                if spec.is_missing(cell) {
                    None
                } else {
                    cell
                }
            });
            self.encode_cells(cells, m.row_mut(r));
        }
        Ok(m)
    }

    /// Recovers the category of each column from an encoded row.
    pub fn decode_row(&self, row: &[u8]) -> Vec<Option<&str>> {
        (0..self.columns.len())
            .map(|col| {
                self.block(col)
                    .position(|j| row[j] == 1)
                    .map(|k| self.columns[col].categories[k].as_str())
            })
            .collect()
    }
}

/// Output of the full preprocessing pipeline.
#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub dataset: Dataset,
    pub encoder: OneHotEncoder,
    /// Median proficiency used as the class boundary.
    pub threshold: f64,
}

fn parse_school(cell: Option<&str>, column: &str, row: usize) -> Result<i64> {
    cell.and_then(|c| c.trim().parse::<i64>().ok())
        .ok_or_else(|| DataError::Schema {
            column: column.to_string(),
            row,
            message: format!("expected an integer school id, found {:?}", cell.unwrap_or("")),
        })
}

fn parse_score(cell: Option<&str>, column: &str, row: usize) -> Result<f64> {
    cell.and_then(|c| c.trim().parse::<f64>().ok())
        .filter(|v| v.is_finite())
        .ok_or_else(|| DataError::Schema {
            column: column.to_string(),
            row,
            message: format!("expected a decimal score, found {:?}", cell.unwrap_or("")),
        })
}

/// Checks id and target cells, numbering rows from `first_row`.
fn validate_schema(table: &RawTable, spec: &PipelineSpec, first_row: usize) -> Result<()> {
    let id = table.column_index(&spec.school_id_column)?;
    let target = table.column_index(&spec.target_column)?;
    for c in &spec.feature_columns {
        table.column_index(c)?;
    }
    for (i, row) in table.rows().iter().enumerate() {
        let target_cell = row[target].as_deref();
        if spec.is_missing(target_cell) {
            continue;
        }
        parse_school(row[id].as_deref(), &spec.school_id_column, first_row + i)?;
        parse_score(target_cell, &spec.target_column, first_row + i)?;
    }
    Ok(())
}

fn encode_table(table: &RawTable, spec: &PipelineSpec) -> Result<Preprocessed> {
    spec.validate()?;
    let id = table.column_index(&spec.school_id_column)?;
    let target = table.column_index(&spec.target_column)?;
    for name in &spec.feature_columns {
        let idx = table.column_index(name)?;
        if let Some(r) = table.column(idx).position(|c| spec.is_missing(c)) {
            return Err(DataError::Schema {
                column: name.clone(),
                row: r + 1,
                message: "missing value; impute before encoding".into(),
            });
        }
    }
    let mut ids = Vec::with_capacity(table.len());
    let mut scores = Vec::with_capacity(table.len());
    for (i, row) in table.rows().iter().enumerate() {
        ids.push(parse_school(row[id].as_deref(), &spec.school_id_column, i + 1)?);
        scores.push(parse_score(row[target].as_deref(), &spec.target_column, i + 1)?);
    }
    let (labels, threshold) = binarize_target(&scores)?;
    let encoder = OneHotEncoder::fit(table, spec)?;
    let features = encoder.transform(table, spec)?;
    let dataset = Dataset::new(features, labels, ids, encoder.feature_names())?;
    Ok(Preprocessed {
        dataset,
        encoder,
        threshold,
    })
}

/// Encodes a fully imputed table: feature blocks, school ids, and the
/// median-binarized target.
pub fn one_hot_encode(table: &RawTable, spec: &PipelineSpec) -> Result<Dataset> {
    encode_table(table, spec).map(|p| p.dataset)
}

/// Runs the whole pipeline on an in-memory table: drop rows with a missing
/// target, mode-impute features, one-hot encode.
pub fn preprocess(table: &RawTable, spec: &PipelineSpec) -> Result<Preprocessed> {
    spec.validate()?;
    validate_schema(table, spec, 1)?;
    let kept = drop_missing_target(table, spec)?;
    let feature_idx: Vec<usize> = spec
        .feature_columns
        .iter()
        .map(|c| kept.column_index(c))
        .collect::<Result<_>>()?;
    let mut columns: Vec<Vec<Option<String>>> = feature_idx
        .iter()
        .map(|&j| {
            kept.column(j)
                .map(|c| (!spec.is_missing(c)).then(|| c.unwrap().to_string()))
                .collect()
        })
        .collect();
    let names = kept.column_names().to_vec();
    let mut rows = kept.into_rows();
    for (k, &j) in feature_idx.iter().enumerate() {
        let filled = impute_mode(&columns[k]).map_err(|_| DataError::CannotImpute(spec.feature_columns[k].clone()))?;
        for (row, v) in rows.iter_mut().zip(filled) {
            row[j] = Some(v);
        }
        columns[k].clear();
    }
    encode_table(&RawTable::new(names, rows)?, spec)
}

/// Two-pass chunked variant of [`preprocess`] for files too large to hold
/// as a [`RawTable`]. Only the encoded matrix is kept in memory.
pub fn preprocess_file(
    path: impl AsRef<Path>,
    delimiter: u8,
    spec: &PipelineSpec,
    chunk_size: usize,
) -> Result<Preprocessed> {
    spec.validate()?;
    if chunk_size == 0 {
        return Err(DataError::InvalidArgument("chunk_size must be positive".into()));
    }
    let path = path.as_ref();
    let required = spec.required_columns();
    // Projection order: id, target, features.
    let n_feat = spec.feature_columns.len();

    let mut counts: Vec<BTreeMap<String, usize>> = vec![BTreeMap::new(); n_feat];
    let mut ids = Vec::new();
    let mut scores = Vec::new();
    for_each_chunk(path, delimiter, &required, chunk_size, |chunk, first_row| {
        validate_schema(chunk, spec, first_row)?;
        let kept = drop_missing_target(chunk, spec)?;
        for row in kept.rows() {
            ids.push(parse_school(row[0].as_deref(), "", 0)?);
            scores.push(parse_score(row[1].as_deref(), "", 0)?);
            for (k, cell) in row[2..].iter().enumerate() {
                if !spec.is_missing(cell.as_deref()) {
                    *counts[k].entry(cell.clone().unwrap()).or_default() += 1;
                }
            }
        }
        Ok(())
    })?;

    let (labels, threshold) = binarize_target(&scores)?;
    let modes: Vec<String> = counts
        .iter()
        .zip(&spec.feature_columns)
        .map(|(c, name)| {
            mode_from_counts(c.iter().map(|(k, v)| (k.as_str(), *v)))
                .map(str::to_string)
                .ok_or_else(|| DataError::CannotImpute(name.clone()))
        })
        .collect::<Result<_>>()?;
    let encoder = OneHotEncoder::from_categories(
        spec.feature_columns
            .iter()
            .zip(&counts)
            .map(|(name, c)| ColumnCategories {
                column: name.clone(),
                categories: c.keys().cloned().collect(),
            })
            .collect(),
    );

    let mut features = BinaryMatrix::with_width(encoder.width());
    let mut row_buf = vec![0u8; encoder.width()];
    for_each_chunk(path, delimiter, &required, chunk_size, |chunk, _| {
        let kept = drop_missing_target(chunk, spec)?;
        for row in kept.rows() {
            let cells = row[2..].iter().zip(&modes).map(|(cell, mode)| {
                if spec.is_missing(cell.as_deref()) {
                    Some(mode.as_str())
                } else {
                    cell.as_deref()
                }
            });
            encoder.encode_cells(cells, &mut row_buf);
            features.push_row(&row_buf);
        }
        Ok(())
    })?;

    let dataset = Dataset::new(features, labels, ids, encoder.feature_names())?;
    Ok(Preprocessed {
        dataset,
        encoder,
        threshold,
    })
}

fn for_each_chunk(
    path: &Path,
    delimiter: u8,
    required: &[String],
    chunk_size: usize,
    mut f: impl FnMut(&RawTable, usize) -> Result<()>,
) -> Result<()> {
    let mut buf = Vec::with_capacity(chunk_size);
    let mut first_row = 1;
    let mut flush = |buf: &mut Vec<Vec<Option<String>>>, first_row: &mut usize| -> Result<()> {
        let n = buf.len();
        let chunk = RawTable::new(required.to_vec(), std::mem::take(buf))?;
        f(&chunk, *first_row)?;
        *first_row += n;
        Ok(())
    };
    for_each_record(super::open(path)?, delimiter, Some(required), |row| {
        buf.push(row);
        if buf.len() == chunk_size {
            flush(&mut buf, &mut first_row)?;
        }
        Ok(())
    })?;
    if !buf.is_empty() {
        flush(&mut buf, &mut first_row)?;
    }
    Ok(())
}
