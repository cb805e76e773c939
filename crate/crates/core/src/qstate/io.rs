//! JSON state files: `{"dim": d, "re": [[...]], "im": [[...]]}`, row-major.

use serde::{Deserialize, Serialize};

use super::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cx, Real};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl StateFile {
    pub fn from_state<T: Real>(rho: &DensityMatrix<T>) -> Self {
        let d = rho.dim();
        let part = |f: fn(&num_complex::Complex<T>) -> T| {
            (0..d).map(|i| (0..d).map(|j| f(&rho.get(i, j)).to_f64_lossy()).collect()).collect()
        };
        Self { dim: d, re: part(|z| z.re), im: part(|z| z.im) }
    }

    /// Shape checks, then full state validation.
    pub fn into_state<T: Real>(self) -> Result<DensityMatrix<T>> {
        let d = self.dim;
        for (name, part) in [("re", &self.re), ("im", &self.im)] {
            if part.len() != d {
                return Err(Error::Format(format!("\"{name}\" has {} rows, dim is {d}", part.len())));
            }
            if let Some((i, r)) = part.iter().enumerate().find(|(_, r)| r.len() != d) {
                return Err(Error::Format(format!("\"{name}\" row {i} has {} entries, dim is {d}", r.len())));
            }
        }
        let rows = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| r.iter().zip(i).map(|(&a, &b)| cx(T::lit(a), T::lit(b))).collect())
            .collect();
        DensityMatrix::validate(CMatrix::from_rows(rows)?)
    }
}

pub fn read_state_json<T: Real>(text: &str) -> Result<DensityMatrix<T>> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    file.into_state()
}

pub fn state_to_json<T: Real>(rho: &DensityMatrix<T>) -> String {
    serde_json::to_string_pretty(&StateFile::from_state(rho)).expect("state serializes")
}
