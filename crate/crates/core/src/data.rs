//! The observational sample.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Column-major numeric table with named variables.
///
/// Column order defines the dense node indices used by every graph built
/// against the dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Dataset {
    /// Validates and builds a dataset. Requires at least one column, equal
    /// column lengths `n >= 1`, unique non-empty names and finite values.
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::InvalidData(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if columns.is_empty() {
            return Err(Error::InvalidData("no variables".into()));
        }
        let n = columns[0].len();
        if n == 0 {
            return Err(Error::InvalidData("no samples".into()));
        }
        let mut seen = BTreeSet::new();
        for (name, col) in names.iter().zip(&columns) {
            if name.is_empty() {
                return Err(Error::InvalidData("empty variable name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidData(format!("duplicate variable name `{name}`")));
            }
            if col.len() != n {
                return Err(Error::InvalidData(format!(
                    "column `{name}` has {} values, expected {n}",
                    col.len()
                )));
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "non-finite value in column `{name}` at row {row}"
                )));
            }
        }
        Ok(Self { names, columns })
    }

    /// Builds a dataset with generated names `X1..Xp`.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let names = (1..=columns.len()).map(|i| format!("X{i}")).collect();
        Self::new(names, columns)
    }

    pub fn n_samples(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n_vars(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// New dataset made of the given rows (repeats allowed), in order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let columns = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&r| c[r]).collect())
            .collect();
        Self::new(self.names.clone(), columns)
    }

    /// New dataset with columns reordered so that column `k` of the result is
    /// column `order[k]` of `self`.
    pub fn permute_columns(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n_vars() {
            return Err(Error::InvalidData("permutation length mismatch".into()));
        }
        let names = order.iter().map(|&i| self.names[i].clone()).collect();
        let columns = order.iter().map(|&i| self.columns[i].clone()).collect();
        Self::new(names, columns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_bad_input() {
        let ok = Dataset::from_columns(vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert!(ok.is_ok());
        assert!(Dataset::from_columns(vec![vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(Dataset::from_columns(vec![vec![1.0, f64::NAN]]).is_err());
        assert!(Dataset::from_columns(vec![vec![]]).is_err());
        assert!(Dataset::new(vec!["a".into(), "a".into()], vec![vec![1.0], vec![2.0]]).is_err());
        assert!(Dataset::new(vec!["".into()], vec![vec![1.0]]).is_err());
    }

    #[test]
    fn row_selection_and_permutation() {
        let d = Dataset::from_columns(vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let s = d.select_rows(&[2, 2, 0]).unwrap();
        assert_eq!(s.column(0), &[3.0, 3.0, 1.0]);
        let p = d.permute_columns(&[1, 0]).unwrap();
        assert_eq!(p.names()[0], "X2");
        assert_eq!(p.column(1), d.column(0));
    }
}
