//! Complex eigenvalues by Householder reduction to Hessenberg form followed
//! by single-shift QR sweeps with Wilkinson shifts.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Eigenvalues in the order they deflate from the bottom of the Hessenberg
/// form. The order is deterministic for a given input.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let mut h = a.as_matrix().clone();
    hessenberg(&mut h);
    hessenberg_qr(&mut h)?;
    Ok((0..h.nrows()).map(|i| h[(i, i)]).collect())
}

pub(crate) fn hessenberg(h: &mut DMatrix<Complex64>) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let tail: f64 = (k + 2..n).map(|i| h[(i, k)].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let xnorm = (tail + x0.norm_sqr()).sqrt();
        let phase = if x0 == ZERO { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;

        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }

        // left: rows k+1.., columns k..
        for j in k..n {
            let s: Complex64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * h[(k + 1 + i, j)]).sum();
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= 2.0 * vi * s;
            }
        }
        // right: all rows, columns k+1..
        for r in 0..n {
            let s: Complex64 = v.iter().enumerate().map(|(i, vi)| h[(r, k + 1 + i)] * vi).sum();
            for (i, vi) in v.iter().enumerate() {
                h[(r, k + 1 + i)] -= 2.0 * s * vi.conj();
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
}

/// Rotation `[c s; -conj(s) c]` taking `(a, b)` to `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let r = na.hypot(nb);
    let phase = a / na;
    (na / r, phase * b.conj() / r)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let m1 = mid + disc;
    let m2 = mid - disc;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

fn hessenberg_qr(h: &mut DMatrix<Complex64>) -> Result<()> {
    let n = h.nrows();
    if n == 1 {
        return Ok(());
    }
    let scale = h.iter().map(|z| abs1(*z)).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut its = 0usize;
    let mut total = 0usize;
    let mut rot: Vec<(f64, Complex64)> = Vec::with_capacity(n);

    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = abs1(h[(l - 1, l - 1)]) + abs1(h[(l, l)]);
            if s == 0.0 {
                s = scale;
            }
            if abs1(h[(l, l - 1)]) <= eps * s {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        total += 1;
        if total > 60 * n {
            return Err(Error::Numerical("eigenvalue QR iteration did not converge".into()));
        }

        let mu = if its.is_multiple_of(10) {
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for k in l..=hi {
            h[(k, k)] -= mu;
        }
        rot.clear();
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = ZERO;
            rot.push((c, s));
        }
        for (idx, &(c, s)) in rot.iter().enumerate() {
            let k = l + idx;
            for r in l..=(k + 1).min(hi) {
                let x = h[(r, k)];
                let y = h[(r, k + 1)];
                h[(r, k)] = x * c + y * s.conj();
                h[(r, k + 1)] = -x * s + y * c;
            }
        }
        for k in l..=hi {
            h[(k, k)] += mu;
        }
    }
    Ok(())
}
