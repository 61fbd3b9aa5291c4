use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};
use crate::field::Objective;

const SVD_MAX_ITER: usize = 10_000;

pub fn singular_values(m: &DMatrix<Complex64>) -> Result<DVector<f64>> {
    SVD::try_new(m.clone(), false, false, f64::EPSILON, SVD_MAX_ITER)
        .map(|s| s.singular_values)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))
}

pub fn smallest_singular_value(a: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(a.as_matrix())?.min())
}

/// Smallest singular value with its left/right vectors:
/// `M v = sigma u`. `gap` is the distance to the next singular value.
#[derive(Debug, Clone)]
pub struct SingularTriplet {
    pub sigma: f64,
    pub u: DVector<Complex64>,
    pub v: DVector<Complex64>,
    pub gap: f64,
}

pub fn smallest_singular_triplet(m: &DMatrix<Complex64>) -> Result<SingularTriplet> {
    let svd = SVD::try_new(m.clone(), true, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let s = &svd.singular_values;
    let k = s.imin();
    let sigma = s[k];
    let gap = s.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, v)| v - sigma).fold(f64::INFINITY, f64::min);
    let u = svd.u.as_ref().unwrap().column(k).into_owned();
    let v = svd.v_t.as_ref().unwrap().row(k).adjoint();
    Ok(SingularTriplet { sigma, u, v, gap })
}

/// `z = x + iy  ->  sigma_min(A - zI)` as a field on the plane.
#[derive(Debug, Clone)]
pub struct SigmaMinField {
    matrix: ComplexMatrix,
}

impl SigmaMinField {
    pub fn new(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn at(&self, z: Complex64) -> f64 {
        singular_values(&self.matrix.shifted(z)).map(|s| s.min()).unwrap_or(f64::NAN)
    }
}

impl Objective for SigmaMinField {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.at(Complex64::new(x[0], x[1]))
    }

    // d sigma = Re(u^H dM v) with dM = -dz I.
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let t = smallest_singular_triplet(&self.matrix.shifted(Complex64::new(x[0], x[1]))).ok()?;
        let w = t.u.dotc(&t.v);
        Some(vec![-w.re, w.im])
    }

    fn has_gradient(&self) -> bool {
        true
    }
}
