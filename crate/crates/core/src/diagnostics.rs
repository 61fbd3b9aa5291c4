//! Post-hoc checks on solver output: first-order conditions for a closest
//! pair, Morse index of a critical point, and observed convergence ratios.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::vecops::{dot, norm, sub};

/// First-order conditions for a pair `x`, `y` on a common level: the
/// gradient at `x` is a nonnegative multiple of `y - x` and vice versa.
#[derive(Debug, Clone, Serialize)]
pub struct OptimalityReport {
    pub kappa1: f64,
    pub kappa2: f64,
    /// `|grad f(x) - kappa1 (y - x)|`
    pub residual_x: f64,
    pub residual_y: f64,
    /// `|f(x) - level|`, `|f(y) - level|`
    pub level_residuals: (f64, f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPointReport {
    pub grad_norm: f64,
    /// Ascending.
    pub hessian_eigenvalues: Vec<f64>,
    pub morse_index: usize,
    pub nondegenerate: bool,
}

/// Observed contraction `|v_{i+1} - limit| / |v_i - limit|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Rate {
    Ratio(f64),
    /// Both errors are zero.
    Exact,
}

// nonnegative least squares in one variable
fn multiplier(g: &[f64], d: &[f64]) -> (f64, f64) {
    let k = (dot(g, d) / dot(d, d)).max(0.0);
    let r: Vec<f64> = g.iter().zip(d).map(|(gi, di)| gi - k * di).collect();
    (k, norm(&r))
}

/// Returns `None` for fields flagged nonsmooth, where the conditions involve
/// normal cones instead of gradients.
pub fn check_pair_optimality(
    field: &ScalarField,
    x: &[f64],
    y: &[f64],
    level: f64,
) -> Result<Option<OptimalityReport>> {
    if x.len() != field.dim() || y.len() != field.dim() {
        return Err(Error::invalid("points do not match the field dimension"));
    }
    if x == y {
        return Err(Error::invalid("pair must be two distinct points"));
    }
    if !field.is_smooth() {
        return Ok(None);
    }
    let d = sub(y, x);
    let (kappa1, residual_x) = multiplier(&field.gradient_or_fd(x), &d);
    let (kappa2, residual_y) = multiplier(&field.gradient_or_fd(y), &sub(x, y));
    Ok(Some(OptimalityReport {
        kappa1,
        kappa2,
        residual_x,
        residual_y,
        level_residuals: ((field.eval(x) - level).abs(), (field.eval(y) - level).abs()),
    }))
}

/// Symmetrized finite-difference Hessian with `h = 1e-4 (1 + |x_j|)`:
/// differences of the gradient when the field has one, second differences of
/// values otherwise.
pub fn fd_hessian(field: &ScalarField, x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let h: Vec<f64> = x.iter().map(|xi| 1e-4 * (1.0 + xi.abs())).collect();
    let shifted = |moves: &[(usize, f64)]| {
        let mut p = x.to_vec();
        for &(j, s) in moves {
            p[j] += s;
        }
        p
    };
    let mut m = DMatrix::zeros(n, n);
    if field.has_gradient() {
        for j in 0..n {
            let gp = field.gradient_or_fd(&shifted(&[(j, h[j])]));
            let gm = field.gradient_or_fd(&shifted(&[(j, -h[j])]));
            for i in 0..n {
                m[(i, j)] = (gp[i] - gm[i]) / (2.0 * h[j]);
            }
        }
    } else {
        let f0 = field.eval(x);
        for i in 0..n {
            let fp = field.eval(&shifted(&[(i, h[i])]));
            let fm = field.eval(&shifted(&[(i, -h[i])]));
            m[(i, i)] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
            for j in 0..i {
                let pp = field.eval(&shifted(&[(i, h[i]), (j, h[j])]));
                let pm = field.eval(&shifted(&[(i, h[i]), (j, -h[j])]));
                let mp = field.eval(&shifted(&[(i, -h[i]), (j, h[j])]));
                let mm = field.eval(&shifted(&[(i, -h[i]), (j, -h[j])]));
                m[(i, j)] = (pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
                m[(j, i)] = m[(i, j)];
            }
        }
    }
    (&m + m.transpose()) * 0.5
}

/// Classifies `x` by the eigenvalues of the finite-difference Hessian.
/// `tol` bounds `|eigenvalue|` away from zero for nondegeneracy and defaults
/// to `1e-6` times the largest `|eigenvalue|`.
pub fn classify_critical_point(field: &ScalarField, x: &[f64], tol: Option<f64>) -> Result<CriticalPointReport> {
    if x.len() != field.dim() {
        return Err(Error::invalid("point does not match the field dimension"));
    }
    let grad_norm = norm(&field.gradient_or_fd(x));
    let mut ev: Vec<f64> = SymmetricEigen::new(fd_hessian(field, x)).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let largest = ev.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = tol.unwrap_or(1e-6 * largest);
    Ok(CriticalPointReport {
        grad_norm,
        morse_index: ev.iter().filter(|&&v| v < 0.0).count(),
        nondegenerate: ev.iter().all(|v| v.abs() > tol),
        hessian_eigenvalues: ev,
    })
}

pub fn convergence_rates(values: &[f64], limit: f64) -> Result<Vec<Rate>> {
    if values.len() < 3 {
        return Err(Error::invalid("need at least three values"));
    }
    if !limit.is_finite() {
        return Err(Error::invalid("limit must be finite"));
    }
    Ok(values
        .windows(2)
        .map(|w| {
            let (a, b) = ((w[0] - limit).abs(), (w[1] - limit).abs());
            if a == 0.0 && b == 0.0 {
                Rate::Exact
            } else {
                Rate::Ratio(b / a)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{find_problem, make_quadratic_field};

    #[test]
    fn quadratic_pair_is_optimal() {
        let f = make_quadratic_field(&[1.0, -1.0]).unwrap();
        let r = check_pair_optimality(&f, &[0.0, -0.2], &[0.0, 0.2], -0.04).unwrap().unwrap();
        assert_eq!((r.kappa1, r.kappa2), (1.0, 1.0));
        assert_eq!((r.residual_x, r.residual_y), (0.0, 0.0));
        assert!(r.level_residuals.0 < 1e-17 && r.level_residuals.1 < 1e-17);
    }

    #[test]
    fn skewed_pair_is_not() {
        let f = make_quadratic_field(&[1.0, -1.0]).unwrap();
        let r = check_pair_optimality(&f, &[0.1, -0.3], &[-0.05, 0.25], -0.08).unwrap().unwrap();
        assert!(r.residual_x > 1e-3 && r.residual_y > 1e-3);
    }

    #[test]
    fn zero_gradient_gives_zero_multiplier() {
        let f = make_quadratic_field(&[1.0, -1.0]).unwrap();
        let r = check_pair_optimality(&f, &[0.0, 0.0], &[1.0, 0.5], 0.0).unwrap().unwrap();
        assert_eq!((r.kappa1, r.residual_x), (0.0, 0.0));
        assert!(check_pair_optimality(&f, &[1.0, 1.0], &[1.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn nonsmooth_fields_are_not_applicable() {
        let f = find_problem("sqrt-cusp-2d").unwrap().field;
        assert!(check_pair_optimality(&f, &[-1.0, 0.0], &[1.0, 0.0], 0.0).unwrap().is_none());
    }

    #[test]
    fn morse_index_of_quadratics() {
        let f = make_quadratic_field(&[1.0, -1.0]).unwrap();
        let r = classify_critical_point(&f, &[0.0, 0.0], None).unwrap();
        assert!(r.grad_norm <= 1e-8);
        assert!((r.hessian_eigenvalues[0] + 2.0).abs() < 1e-8 && (r.hessian_eigenvalues[1] - 2.0).abs() < 1e-8);
        assert_eq!(r.morse_index, 1);
        assert!(r.nondegenerate);

        let f = make_quadratic_field(&[3.0, 2.0, -1.0]).unwrap();
        assert_eq!(classify_critical_point(&f, &[0.0; 3], None).unwrap().morse_index, 1);
        let f = make_quadratic_field(&[1.0, 0.0]).unwrap();
        assert!(!classify_critical_point(&f, &[0.0, 0.0], None).unwrap().nondegenerate);
    }

    #[test]
    fn value_only_hessian() {
        let f = ScalarField::from_fn(2, |p| p[0] * p[0] - 3.0 * p[0] * p[1] + 0.5 * p[1] * p[1]);
        let h = fd_hessian(&f, &[0.3, -0.2]);
        for (got, want) in h.iter().zip([2.0, -3.0, -3.0, 1.0]) {
            assert!((got - want).abs() < 1e-5, "{h}");
        }
    }

    #[test]
    fn rates() {
        assert_eq!(convergence_rates(&[1.0, 0.5, 0.25], 0.0).unwrap(), vec![Rate::Ratio(0.5), Rate::Ratio(0.5)]);
        assert_eq!(convergence_rates(&[2.0, 2.0, 2.0], 2.0).unwrap(), vec![Rate::Exact, Rate::Exact]);
        assert!(convergence_rates(&[1.0, 0.5], 0.0).is_err());
        assert!(convergence_rates(&[1.0, 0.5, 0.2], f64::NAN).is_err());
    }
}
