//! Matrix JSON schema shared by every file-facing surface:
//! `{"n": int, "entries": [[[re, im], ...], ...]}`, row-major.
//!
//! Numbers are written in shortest round-trip form, so a write/read cycle
//! reproduces every entry bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, ComplexMatrixData, DensityMatrix, HermitianMatrix, PsdhMatrix, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let n = m.nrows();
        let entries = (0..n)
            .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
            .collect();
        Self { n, entries }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.entries.len() != self.n || self.entries.iter().any(|row| row.len() != self.n) {
            return Err(Error::Shape(format!("entries must be an {n}x{n} array", n = self.n)));
        }
        Ok(CMatrix::from_fn(self.n, self.n, |r, c| {
            let [re, im] = self.entries[r][c];
            C64::new(re, im)
        }))
    }
}

impl TryFrom<MatrixJson> for ComplexMatrixData {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<Self> {
        ComplexMatrixData::new(j.to_matrix()?)
    }
}

impl From<ComplexMatrixData> for MatrixJson {
    fn from(m: ComplexMatrixData) -> Self {
        MatrixJson::from_matrix(m.as_matrix())
    }
}

impl TryFrom<MatrixJson> for HermitianMatrix {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<Self> {
        HermitianMatrix::new(j.try_into()?)
    }
}

impl From<HermitianMatrix> for MatrixJson {
    fn from(m: HermitianMatrix) -> Self {
        MatrixJson::from_matrix(m.matrix())
    }
}

impl Serialize for HermitianMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(self.matrix()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        HermitianMatrix::try_from(j).map_err(serde::de::Error::custom)
    }
}

impl TryFrom<MatrixJson> for PsdhMatrix {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<Self> {
        PsdhMatrix::new(j.try_into()?)
    }
}

impl From<PsdhMatrix> for MatrixJson {
    fn from(m: PsdhMatrix) -> Self {
        MatrixJson::from_matrix(m.matrix())
    }
}

impl TryFrom<MatrixJson> for DensityMatrix {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<Self> {
        DensityMatrix::new(j.try_into()?)
    }
}

impl From<DensityMatrix> for MatrixJson {
    fn from(m: DensityMatrix) -> Self {
        MatrixJson::from_matrix(m.matrix())
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

/// Reads any matrix type from a JSON file.
pub fn read_matrix<T>(path: impl AsRef<Path>) -> Result<T>
where
    T: TryFrom<MatrixJson, Error = Error>,
{
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Shape(format!("cannot read {}: {e}", path.as_ref().display())))?;
    let j: MatrixJson = serde_json::from_str(&text)?;
    T::try_from(j)
}
