//! JSON file formats for tensors, CPDs, transforms and search reports.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Elem, Field};
use crate::linalg::Mat;
use crate::tensor::{Cpd, Tensor};

/// `{"field": p, "dims": [...], "data": [...]}` with row-major data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorFile {
    pub field: u64,
    pub dims: Vec<usize>,
    pub data: Vec<i64>,
}

/// `{"field": p, "rank": R, "factors": [...]}`; `factors[d]` has `n_d` rows of `R` entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpdFile {
    pub field: u64,
    pub rank: usize,
    pub factors: Vec<Vec<Vec<i64>>>,
}

/// The per-axis matrices applied by `scramble`, in axis order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformsFile {
    pub field: u64,
    pub transforms: Vec<Vec<Vec<i64>>>,
}

fn to_elem(field: &Field, x: i64) -> Result<Elem> {
    if x < 0 || x >= i64::from(field.p()) {
        return Err(Error::Input(format!("entry {x} is outside 0..{}", field.p())));
    }
    Ok(x as Elem)
}

fn mat_rows(m: &Mat) -> Vec<Vec<i64>> {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|&x| i64::from(x)).collect())
        .collect()
}

fn rows_to_mat(field: &Field, rows: &[Vec<i64>], cols: usize) -> Result<Mat> {
    let mut data = Vec::with_capacity(rows.len() * cols);
    for row in rows {
        if row.len() != cols {
            return Err(Error::Input(format!(
                "factor row has {} entries, expected {cols}",
                row.len()
            )));
        }
        for &x in row {
            data.push(to_elem(field, x)?);
        }
    }
    Mat::from_vec(field, rows.len(), cols, data)
}

impl TensorFile {
    pub fn from_tensor(t: &Tensor) -> Self {
        Self {
            field: u64::from(t.field().p()),
            dims: t.dims().to_vec(),
            data: t.data().iter().map(|&x| i64::from(x)).collect(),
        }
    }

    pub fn to_tensor(&self) -> Result<Tensor> {
        let f = Field::new(self.field)?;
        if self.dims.is_empty() {
            return Err(Error::Input("tensor needs at least one axis".into()));
        }
        let data = self
            .data
            .iter()
            .map(|&x| to_elem(&f, x))
            .collect::<Result<Vec<_>>>()?;
        Tensor::from_vec(&f, &self.dims, data)
    }
}

impl CpdFile {
    pub fn from_cpd(c: &Cpd) -> Self {
        Self {
            field: u64::from(c.field().p()),
            rank: c.rank(),
            factors: c.factors().iter().map(mat_rows).collect(),
        }
    }

    pub fn to_cpd(&self) -> Result<Cpd> {
        let f = Field::new(self.field)?;
        if self.factors.is_empty() {
            return Err(Error::Input("CPD needs at least one factor".into()));
        }
        let factors = self
            .factors
            .iter()
            .map(|rows| rows_to_mat(&f, rows, self.rank))
            .collect::<Result<Vec<_>>>()?;
        Cpd::new(factors)
    }
}

impl TransformsFile {
    pub fn from_mats(field: &Field, mats: &[Mat]) -> Self {
        Self {
            field: u64::from(field.p()),
            transforms: mats.iter().map(mat_rows).collect(),
        }
    }

    pub fn to_mats(&self) -> Result<Vec<Mat>> {
        let f = Field::new(self.field)?;
        self.transforms
            .iter()
            .map(|rows| rows_to_mat(&f, rows, rows.len()))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsReport {
    pub states: u64,
    pub good_pairs: u64,
    pub elapsed_ms: u64,
    pub shortcut: bool,
}

/// Output of `decompose` and `rank`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    /// `"found"` or `"none"`.
    pub status: String,
    /// The threshold `R` of the last search run.
    pub threshold: usize,
    /// Column count of the returned CPD, when one was found.
    pub rank: Option<usize>,
    pub algorithm: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cpd: Option<CpdFile>,
    pub stats: StatsReport,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

pub fn read_tensor(path: &Path) -> Result<Tensor> {
    read_json::<TensorFile>(path)?.to_tensor()
}

pub fn read_cpd(path: &Path) -> Result<Cpd> {
    read_json::<CpdFile>(path)?.to_cpd()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{mmt222_rank7_cpd, random_tensor};

    #[test]
    fn tensor_round_trip() {
        let t = random_tensor(&Field::new(5).unwrap(), &[2, 3, 1], 3);
        let file = TensorFile::from_tensor(&t);
        let text = to_json(&file);
        let back: TensorFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_tensor().unwrap(), t);
    }

    #[test]
    fn cpd_round_trip_including_rank_zero() {
        let c = mmt222_rank7_cpd();
        let back: CpdFile = serde_json::from_str(&to_json(&CpdFile::from_cpd(&c))).unwrap();
        assert_eq!(back.to_cpd().unwrap(), c);
        let e = Cpd::empty(&Field::gf2(), &[2, 3]);
        let back = CpdFile::from_cpd(&e).to_cpd().unwrap();
        assert_eq!(back.dims(), vec![2, 3]);
        assert_eq!(back.rank(), 0);
    }

    #[test]
    fn malformed_inputs_rejected() {
        let bad = TensorFile {
            field: 2,
            dims: vec![2],
            data: vec![0, 2],
        };
        assert!(bad.to_tensor().is_err());
        let bad = TensorFile {
            field: 4,
            dims: vec![1],
            data: vec![0],
        };
        assert!(bad.to_tensor().is_err());
        let bad = TensorFile {
            field: 2,
            dims: vec![2, 2],
            data: vec![0, 1, 1],
        };
        assert!(bad.to_tensor().is_err());
        let bad = CpdFile {
            field: 2,
            rank: 2,
            factors: vec![vec![vec![1, 0]], vec![vec![1]]],
        };
        assert!(bad.to_cpd().is_err());
    }
}
