use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{eigenvalues, singular_values, ComplexMatrix};
use crate::error::{Error, Result};

const MERGE_TOL: f64 = 1e-10;

/// All `y` where some singular value of `A - (x + iy)I` equals `eps`.
///
/// `eps` is a singular value exactly when `iy` is an eigenvalue of
/// `[[xI - A^H, -eps I], [eps I, A - xI]]`.
pub fn byers_vertical_crossings(a: &ComplexMatrix, x: f64, eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("level must be positive, got {eps}")));
    }
    if !x.is_finite() {
        return Err(Error::invalid("abscissa must be finite"));
    }
    let n = a.n();
    let m = a.as_matrix();
    let xc = Complex64::new(x, 0.0);
    let e = Complex64::new(eps, 0.0);
    let h = DMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => (if i == j { xc } else { Complex64::new(0.0, 0.0) }) - m[(j, i)].conj(),
        (true, false) => {
            if i == j - n {
                -e
            } else {
                Complex64::new(0.0, 0.0)
            }
        }
        (false, true) => {
            if i - n == j {
                e
            } else {
                Complex64::new(0.0, 0.0)
            }
        }
        (false, false) => m[(i - n, j - n)] - if i == j { xc } else { Complex64::new(0.0, 0.0) },
    });
    let h = ComplexMatrix::new(h)?;
    let tol = 1e-8 * (1.0 + h.frobenius_norm());
    let mut ys: Vec<f64> = eigenvalues(&h)?.into_iter().filter(|l| l.re.abs() <= tol).map(|l| l.im).collect();
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(merge_close(&ys, MERGE_TOL))
}

fn merge_close(ys: &[f64], tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(ys.len());
    let mut group: Vec<f64> = Vec::new();
    for &y in ys {
        if let Some(&last) = group.last() {
            if y - last > tol {
                out.push(group.iter().sum::<f64>() / group.len() as f64);
                group.clear();
            }
        }
        group.push(y);
    }
    if !group.is_empty() {
        out.push(group.iter().sum::<f64>() / group.len() as f64);
    }
    out
}

/// The segment `[p, q]` seen through `B = c (A - pI)` with `c = i conj(e)`,
/// `e = (q - p)/|q - p|`. Then `sigma_min(A - (p + s e)I) = sigma_min(B - i s I)`
/// so the segment becomes `{i s : 0 <= s <= length}` on the imaginary axis.
#[derive(Debug, Clone)]
pub struct VerticalSegment {
    pub matrix: ComplexMatrix,
    pub rotation: Complex64,
    pub origin: Complex64,
    pub direction: Complex64,
    pub length: f64,
}

impl VerticalSegment {
    /// Point of the original segment at arclength `s`.
    pub fn point(&self, s: f64) -> Complex64 {
        self.origin + self.direction * s
    }

    pub fn sigma(&self, s: f64) -> f64 {
        self.sigmas(s).map(|v| v.min()).unwrap_or(f64::NAN)
    }

    pub fn sigmas(&self, s: f64) -> Result<nalgebra::DVector<f64>> {
        singular_values(&self.matrix.shifted(Complex64::new(0.0, s)))
    }

    /// Arclengths where some singular value equals `eps`, sorted.
    pub fn crossings(&self, eps: f64) -> Result<Vec<f64>> {
        byers_vertical_crossings(&self.matrix, 0.0, eps)
    }
}

pub fn rotate_to_vertical(a: &ComplexMatrix, p: Complex64, q: Complex64) -> Result<VerticalSegment> {
    let d = q - p;
    let length = d.norm();
    if length == 0.0 || !length.is_finite() {
        return Err(Error::invalid("segment endpoints must differ"));
    }
    let direction = d / length;
    let rotation = Complex64::new(0.0, 1.0) * direction.conj();
    let matrix = ComplexMatrix::new(a.shifted(p) * rotation)?;
    Ok(VerticalSegment { matrix, rotation, origin: p, direction, length })
}
