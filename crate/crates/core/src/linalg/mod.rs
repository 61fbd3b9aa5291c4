//! Complex dense kernels: smallest singular values, eigenvalues and the
//! Hamiltonian-style level-crossing test on vertical lines.

mod byers;
mod eigen;
mod svd;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use byers::{byers_vertical_crossings, rotate_to_vertical, VerticalSegment};
pub use eigen::eigenvalues;
pub use svd::{singular_values, smallest_singular_triplet, smallest_singular_value, SigmaMinField, SingularTriplet};

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};

/// Square complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    m: DMatrix<Complex64>,
}

impl ComplexMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() == 0 {
            return Err(Error::invalid("matrix must be nonempty"));
        }
        if m.nrows() != m.ncols() {
            return Err(Error::invalid(format!("matrix must be square, got {}x{}", m.nrows(), m.ncols())));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(Self { m })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix must be square"));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_diagonal(d: &[Complex64]) -> Result<Self> {
        let n = d.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| if i == j { d[i] } else { Complex64::new(0.0, 0.0) }))
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.m
    }

    /// `A - zI`
    pub fn shifted(&self, z: Complex64) -> DMatrix<Complex64> {
        let mut s = self.m.clone();
        for i in 0..self.n() {
            s[(i, i)] -= z;
        }
        s
    }

    pub fn scaled(&self, c: Complex64) -> ComplexMatrix {
        ComplexMatrix { m: &self.m * c }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral norm (largest singular value).
    pub fn norm2(&self) -> Result<f64> {
        Ok(singular_values(&self.m)?.iter().cloned().fold(0.0, f64::max))
    }
}

/// Serialized as `{"n": .., "re": [[..]], "im": [[..]]}` with row-major
/// nested arrays, the same layout the matrix reader accepts.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.n();
        let part = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| f(&self.m[(i, j)])).collect()).collect()
        };
        let mut st = s.serialize_struct("ComplexMatrix", 3)?;
        st.serialize_field("n", &n)?;
        st.serialize_field("re", &part(|z| z.re))?;
        st.serialize_field("im", &part(|z| z.im))?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(ComplexMatrix::new(DMatrix::zeros(2, 3)).is_err());
        assert!(ComplexMatrix::new(DMatrix::zeros(0, 0)).is_err());
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 1)] = Complex64::new(f64::INFINITY, 0.0);
        assert!(ComplexMatrix::new(m).is_err());
    }

    #[test]
    fn shifted_subtracts_diagonal() {
        let a = ComplexMatrix::from_diagonal(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)]).unwrap();
        let s = a.shifted(Complex64::new(1.0, 1.0));
        assert_eq!(s[(0, 0)], Complex64::new(0.0, -1.0));
        assert_eq!(s[(1, 1)], Complex64::new(-1.0, 1.0));
    }
}
