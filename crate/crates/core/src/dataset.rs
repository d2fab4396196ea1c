//! Column-named numeric data with optional per-column tier labels.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pc::PriorKnowledge;
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("column `{name}` has {len} values, expected {expected}")]
    Ragged { name: String, len: usize, expected: usize },
    #[error("duplicated column name `{0}`")]
    DuplicateName(String),
    #[error("column count {columns} does not match {names} names")]
    NameCount { names: usize, columns: usize },
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column index {index} out of range for {len} columns")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("column `{0}` has zero variance")]
    DegenerateColumn(String),
    #[error("dataset has no columns")]
    Empty,
}

/// Why a source column did not make it into the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DropReason {
    ZeroVariance,
    UniqueKey,
}

impl DropReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::ZeroVariance => "zero variance",
            DropReason::UniqueKey => "unique key",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceEntry {
    pub column: String,
    /// `None` means the column was kept.
    pub dropped: Option<DropReason>,
}

/// Where the data came from and what preprocessing did to each column.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Option<String>,
    pub entries: Vec<ProvenanceEntry>,
    pub standardized: bool,
}

impl Provenance {
    pub fn dropped(&self) -> impl Iterator<Item = (&str, DropReason)> {
        self.entries.iter().filter_map(|e| e.dropped.map(|r| (e.column.as_str(), r)))
    }

    /// Tab-separated `column<TAB>kept|dropped<TAB>reason` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("column\tstatus\treason\n");
        for e in &self.entries {
            match e.dropped {
                None => out.push_str(&format!("{}\tkept\t\n", e.column)),
                Some(r) => out.push_str(&format!("{}\tdropped\t{}\n", e.column, r.as_str())),
            }
        }
        out
    }
}

/// Column-major numeric table. Node `j` of any learned graph is column `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<F> {
    names: Vec<String>,
    columns: Vec<Vec<F>>,
    n_rows: usize,
    tiers: Vec<Option<u32>>,
    provenance: Provenance,
}

impl<F: Scalar> Dataset<F> {
    pub fn from_columns(names: Vec<String>, columns: Vec<Vec<F>>) -> Result<Self, DatasetError> {
        if names.len() != columns.len() {
            return Err(DatasetError::NameCount { names: names.len(), columns: columns.len() });
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n_rows {
                return Err(DatasetError::Ragged {
                    name: name.clone(),
                    len: col.len(),
                    expected: n_rows,
                });
            }
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(DatasetError::DuplicateName(name.clone()));
            }
        }
        let tiers = vec![None; names.len()];
        Ok(Self { names, columns, n_rows, tiers, provenance: Provenance::default() })
    }

    pub fn from_rows(names: Vec<String>, rows: &[Vec<F>]) -> Result<Self, DatasetError> {
        let d = names.len();
        let mut columns = vec![Vec::with_capacity(rows.len()); d];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(DatasetError::Ragged {
                    name: format!("row {i}"),
                    len: row.len(),
                    expected: d,
                });
            }
            for (c, v) in columns.iter_mut().zip(row) {
                c.push(*v);
            }
        }
        Self::from_columns(names, columns)
    }

    /// Columns named `X0`, `X1`, ...
    pub fn with_default_names(columns: Vec<Vec<F>>) -> Result<Self, DatasetError> {
        let names = (0..columns.len()).map(|i| format!("X{i}")).collect();
        Self::from_columns(names, columns)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, j: usize) -> &str {
        &self.names[j]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, j: usize) -> &[F] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<F>] {
        &self.columns
    }

    pub fn row(&self, i: usize) -> Vec<F> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn tiers(&self) -> &[Option<u32>] {
        &self.tiers
    }

    pub fn set_tiers(&mut self, tiers: Vec<Option<u32>>) -> Result<(), DatasetError> {
        if tiers.len() != self.n_cols() {
            return Err(DatasetError::NameCount { names: tiers.len(), columns: self.n_cols() });
        }
        self.tiers = tiers;
        Ok(())
    }

    /// Assigns tiers by column name; names absent from the map stay
    /// unconstrained. Names in the map that are not columns are returned.
    pub fn assign_tiers_by_name(&mut self, tiers: &BTreeMap<String, u32>) -> Vec<String> {
        self.tiers = self.names.iter().map(|n| tiers.get(n).copied()).collect();
        tiers.keys().filter(|k| self.index_of(k).is_none()).cloned().collect()
    }

    pub fn prior_knowledge(&self) -> PriorKnowledge {
        PriorKnowledge::from_tiers(self.tiers.clone())
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn provenance_mut(&mut self) -> &mut Provenance {
        &mut self.provenance
    }

    pub fn set_provenance(&mut self, provenance: Provenance) {
        self.provenance = provenance;
    }

    /// Keeps the given columns in the given order, with names and tiers.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self, DatasetError> {
        for &i in indices {
            if i >= self.n_cols() {
                return Err(DatasetError::IndexOutOfRange { index: i, len: self.n_cols() });
            }
        }
        let mut out = Self::from_columns(
            indices.iter().map(|&i| self.names[i].clone()).collect(),
            indices.iter().map(|&i| self.columns[i].clone()).collect(),
        )?;
        out.tiers = indices.iter().map(|&i| self.tiers[i]).collect();
        out.provenance = self.provenance.clone();
        Ok(out)
    }

    pub fn mean(&self, j: usize) -> F {
        mean(&self.columns[j])
    }

    /// Sample standard deviation (n - 1 denominator).
    pub fn std_dev(&self, j: usize) -> F {
        let c = &self.columns[j];
        let m = mean(c);
        let ss: F = c.iter().map(|v| (*v - m) * (*v - m)).sum();
        (ss / F::from_usize_lossy(c.len().saturating_sub(1).max(1))).sqrt()
    }

    /// Rescales every column to mean 0 and sample variance 1.
    pub fn standardize(&mut self) -> Result<(), DatasetError> {
        for j in 0..self.n_cols() {
            let m = self.mean(j);
            let s = self.std_dev(j);
            if !(s > F::zero()) {
                return Err(DatasetError::DegenerateColumn(self.names[j].clone()));
            }
            for v in &mut self.columns[j] {
                *v = (*v - m) / s;
            }
        }
        self.provenance.standardized = true;
        Ok(())
    }
}

pub(crate) fn mean<F: Scalar>(values: &[F]) -> F {
    if values.is_empty() {
        return F::zero();
    }
    values.iter().copied().sum::<F>() / F::from_usize_lossy(values.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_names() {
        let err = Dataset::<f64>::from_columns(
            vec!["a".into(), "a".into()],
            vec![vec![1.0], vec![2.0]],
        )
        .unwrap_err();
        assert_eq!(err, DatasetError::DuplicateName("a".into()));
    }

    #[test]
    fn rejects_ragged_columns() {
        let err = Dataset::<f64>::from_columns(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 2.0], vec![2.0]],
        )
        .unwrap_err();
        assert!(matches!(err, DatasetError::Ragged { .. }));
    }

    #[test]
    fn standardize_gives_unit_moments() {
        let mut ds = Dataset::with_default_names(vec![
            vec![1.0_f64, 2.0, 4.0, 8.0, 16.0],
            vec![-3.0, 0.5, 0.25, 9.0, 1.0],
        ])
        .unwrap();
        ds.standardize().unwrap();
        for j in 0..2 {
            assert!(ds.mean(j).abs() < 1e-12);
            assert!((ds.std_dev(j) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn standardize_rejects_constant_column() {
        let mut ds = Dataset::with_default_names(vec![vec![2.0_f32; 4]]).unwrap();
        assert_eq!(ds.standardize(), Err(DatasetError::DegenerateColumn("X0".into())));
    }
}
