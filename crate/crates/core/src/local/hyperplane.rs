//! Minimization of a field over an affine subspace inside the region.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::field::{Point, Region, ScalarField};
use crate::vecops;

/// `n - 1` orthonormal vectors spanning the complement of unit vector `d`:
/// columns of the Householder reflection that maps `e_n` to `d`.
pub fn orthogonal_complement(d: &[f64]) -> Vec<Point> {
    let n = d.len();
    let mut v = vecops::scale(d, -1.0);
    v[n - 1] += 1.0;
    let vv = vecops::dot(&v, &v);
    (0..n - 1)
        .map(|j| {
            let mut col = vec![0.0; n];
            col[j] = 1.0;
            if vv > 1e-300 {
                let c = 2.0 * v[j] / vv;
                for (ci, vi) in col.iter_mut().zip(&v) {
                    *ci -= c * vi;
                }
            }
            col
        })
        .collect()
}

#[derive(Debug, Clone)]
pub(crate) struct AffineMin {
    pub point: Point,
    pub value: f64,
    pub boundary: bool,
}

fn project(basis: &[Point], g: &[f64]) -> DVector<f64> {
    DVector::from_iterator(basis.len(), basis.iter().map(|b| vecops::dot(b, g)))
}

fn lift(basis: &[Point], p: &DVector<f64>) -> Point {
    let n = basis[0].len();
    let mut out = vec![0.0; n];
    for (b, c) in basis.iter().zip(p.iter()) {
        for (o, bi) in out.iter_mut().zip(b) {
            *o += c * bi;
        }
    }
    out
}

/// Quasi-Newton (BFGS) descent on `origin + span(basis)`, with Armijo
/// backtracking and every step clipped to the closed region. Stops when the
/// projected gradient is below `tol (1 + |grad f|)` or no progress is made.
/// `boundary` is set when the region wall blocks further descent.
pub(crate) fn minimize_on_affine(
    field: &ScalarField,
    region: &Region,
    origin: &[f64],
    basis: &[Point],
    tol: f64,
    max_iter: usize,
) -> AffineMin {
    let mut x = origin.to_vec();
    let mut fx = field.eval(&x);
    let k = basis.len();
    if k == 0 {
        return AffineMin { point: x, value: fx, boundary: false };
    }
    let mut gfull = field.gradient_or_fd(&x);
    let mut g = project(basis, &gfull);
    let mut hinv = DMatrix::<f64>::identity(k, k);
    let mut first = true;
    let converged = |g: &DVector<f64>, gfull: &[f64]| g.norm() <= tol * (1.0 + vecops::norm(gfull));

    for _ in 0..max_iter {
        if converged(&g, &gfull) {
            break;
        }
        let mut p = -(&hinv * &g);
        if p.dot(&g) >= 0.0 {
            hinv.fill_with_identity();
            p = -g.clone();
        }
        let dir = lift(basis, &p);
        let tmax = region.max_step(&x, &dir);
        if tmax <= 0.0 {
            break;
        }
        let slope = p.dot(&g);
        let mut t = tmax.min(1.0);
        let mut accepted = None;
        for _ in 0..64 {
            let xn = vecops::axpy(&x, t, &dir);
            let fxn = field.eval(&xn);
            if fxn <= fx + 1e-4 * t * slope {
                accepted = Some((xn, fxn));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fxn)) = accepted else { break };
        let gnew_full = field.gradient_or_fd(&xn);
        let gnew = project(basis, &gnew_full);
        let s = &p * t;
        let y = &gnew - &g;
        let sy = s.dot(&y);
        if sy > 1e-14 * s.norm() * y.norm() {
            if first {
                hinv *= sy / y.dot(&y);
                first = false;
            }
            let rho = 1.0 / sy;
            let eye = DMatrix::<f64>::identity(k, k);
            let left = &eye - &s * y.transpose() * rho;
            let right = &eye - &y * s.transpose() * rho;
            hinv = &left * &hinv * &right + &s * s.transpose() * rho;
        }
        let step = s.norm();
        x = xn;
        fx = fxn;
        g = gnew;
        gfull = gnew_full;
        if step <= 1e-15 * (1.0 + vecops::norm(&x)) {
            break;
        }
    }

    let boundary = !converged(&g, &gfull) && {
        let down = lift(basis, &(-&g));
        region.max_step(&x, &down) <= 1e-9 * (1.0 + vecops::norm(&x)) / (1.0 + vecops::norm(&down))
    };
    AffineMin { point: x, value: fx, boundary }
}

/// Minimizer of `f` on the perpendicular bisector hyperplane of `[x, y]`.
pub fn bisector_minimize(field: &ScalarField, region: &Region, x: &[f64], y: &[f64], tol: f64) -> Result<(Point, f64)> {
    let d = vecops::sub(y, x);
    let len = vecops::norm(&d);
    if len == 0.0 {
        return Err(Error::invalid("bisector needs two distinct points"));
    }
    let m = vecops::midpoint(x, y);
    if !region.contains(&m) {
        return Err(Error::precondition("midpoint lies outside the region"));
    }
    let basis = orthogonal_complement(&vecops::scale(&d, 1.0 / len));
    let res = minimize_on_affine(field, region, &m, &basis, tol, 500);
    if res.boundary {
        return Err(Error::BoundaryHit { point: res.point });
    }
    Ok((res.point, res.value))
}
