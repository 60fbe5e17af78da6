use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureMode};

/// Dense row-major N×M matrix; row `i` holds the features of article `rows[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub mode: FeatureMode,
    pub schema_digest: String,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(
        rows: Vec<String>,
        columns: Vec<String>,
        mode: FeatureMode,
        schema_digest: String,
        values: Vec<f64>,
    ) -> Result<Self, FeatureError> {
        if values.len() != rows.len() * columns.len() {
            return Err(FeatureError::SchemaMismatch(format!(
                "{} values for a {}x{} matrix",
                values.len(),
                rows.len(),
                columns.len()
            )));
        }
        Ok(Self {
            rows,
            columns,
            mode,
            schema_digest,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.n_cols();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols() + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_of(&self, article_id: &str) -> Option<&[f64]> {
        self.rows.iter().position(|r| r == article_id).map(|i| self.row(i))
    }

    /// Keeps the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.n_cols());
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            columns: self.columns.clone(),
            mode: self.mode,
            schema_digest: self.schema_digest.clone(),
            values,
        }
    }

    /// CSV with a header of column names; the first column is the article id.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), FeatureError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["article_id".to_owned()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for (i, id) in self.rows.iter().enumerate() {
            let mut rec = vec![id.clone()];
            rec.extend(self.row(i).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Class labels aligned to the rows of a [`FeatureMatrix`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelVector {
    pub labels: Vec<String>,
}

impl LabelVector {
    pub fn new(labels: Vec<String>) -> Self {
        Self { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn select(&self, indices: &[usize]) -> LabelVector {
        LabelVector::new(indices.iter().map(|&i| self.labels[i].clone()).collect())
    }
}

impl FromIterator<String> for LabelVector {
    fn from_iter<T: IntoIterator<Item = String>>(iter: T) -> Self {
        Self::new(iter.into_iter().collect())
    }
}
