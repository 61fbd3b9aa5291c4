//! Scalar fields, regions and the built-in problem catalog.

mod catalog;
mod region;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

pub use catalog::{builtin_problems, find_problem, TestProblem};
pub use region::{Aabb, Region};

use crate::error::{Error, Result};

pub type Point = Vec<f64>;

/// A real function on R^n. Implementors must be deterministic.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn has_gradient(&self) -> bool {
        false
    }

    /// Nonsmooth fields skip gradient-based diagnostics.
    fn smooth(&self) -> bool {
        true
    }
}

#[derive(Default)]
struct Counters {
    values: AtomicU64,
    gradients: AtomicU64,
}

/// Shared handle to an objective plus evaluation counters.
///
/// Clones share the counters.
#[derive(Clone)]
pub struct ScalarField {
    inner: Arc<dyn Objective>,
    counters: Arc<Counters>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField").field("dim", &self.dim()).field("has_gradient", &self.has_gradient()).finish()
    }
}

impl ScalarField {
    pub fn new(obj: impl Objective + 'static) -> Self {
        Self { inner: Arc::new(obj), counters: Arc::new(Counters::default()) }
    }

    pub fn from_fn<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::new(FnObjective { dim, f, g: None::<fn(&[f64]) -> Vec<f64>>, smooth: true })
    }

    pub fn with_gradient<F, G>(dim: usize, f: F, g: G) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self::new(FnObjective { dim, f, g: Some(g), smooth: true })
    }

    /// A gradient-free field flagged as nonsmooth.
    pub fn nonsmooth<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::new(FnObjective { dim, f, g: None::<fn(&[f64]) -> Vec<f64>>, smooth: false })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        self.counters.values.fetch_add(1, Ordering::Relaxed);
        self.inner.value(x)
    }

    /// Analytic gradient if the objective provides one.
    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        if !self.inner.has_gradient() {
            return None;
        }
        self.counters.gradients.fetch_add(1, Ordering::Relaxed);
        self.inner.gradient(x)
    }

    /// Analytic gradient, or central differences with `h = 1e-6 (1 + |x_j|)`.
    pub fn gradient_or_fd(&self, x: &[f64]) -> Vec<f64> {
        match self.gradient(x) {
            Some(g) => g,
            None => fd_gradient(self, x),
        }
    }

    pub fn has_gradient(&self) -> bool {
        self.inner.has_gradient()
    }

    pub fn is_smooth(&self) -> bool {
        self.inner.smooth()
    }

    pub fn eval_count(&self) -> u64 {
        self.counters.values.load(Ordering::Relaxed)
    }

    pub fn gradient_count(&self) -> u64 {
        self.counters.gradients.load(Ordering::Relaxed)
    }

    pub fn reset_counters(&self) {
        self.counters.values.store(0, Ordering::Relaxed);
        self.counters.gradients.store(0, Ordering::Relaxed);
    }
}

pub(crate) fn fd_gradient(field: &ScalarField, x: &[f64]) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|j| {
            let h = 1e-6 * (1.0 + x[j].abs());
            p[j] = x[j] + h;
            let fp = field.eval(&p);
            p[j] = x[j] - h;
            let fm = field.eval(&p);
            p[j] = x[j];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

struct FnObjective<F, G> {
    dim: usize,
    f: F,
    g: Option<G>,
    smooth: bool,
}

impl<F, G> Objective for FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.g.as_ref().map(|g| g(x))
    }

    fn has_gradient(&self) -> bool {
        self.g.is_some()
    }

    fn smooth(&self) -> bool {
        self.smooth
    }
}

/// `f(x) = sum_j d_j x_j^2`
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub diag: Vec<f64>,
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.diag.iter().zip(x).map(|(d, v)| d * v * v).sum()
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(self.diag.iter().zip(x).map(|(d, v)| 2.0 * d * v).collect())
    }

    fn has_gradient(&self) -> bool {
        true
    }
}

/// Diagonal quadratic form with analytic gradient.
pub fn make_quadratic_field(diag: &[f64]) -> Result<ScalarField> {
    if diag.is_empty() {
        return Err(Error::invalid("quadratic needs at least one coefficient"));
    }
    if diag.iter().any(|d| !d.is_finite()) {
        return Err(Error::invalid("quadratic coefficients must be finite"));
    }
    Ok(ScalarField::new(Quadratic { diag: diag.to_vec() }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_values_and_gradient() {
        let f = make_quadratic_field(&[1.0, -1.0]).unwrap();
        assert_eq!(f.eval(&[0.0, 1.0]), -1.0);
        assert_eq!(f.gradient(&[0.0, 1.0]).unwrap(), vec![0.0, -2.0]);
        assert_eq!(f.eval_count(), 1);
        assert_eq!(f.gradient_count(), 1);
    }

    #[test]
    fn quadratic_rejects_bad_input() {
        assert!(make_quadratic_field(&[]).is_err());
        assert!(make_quadratic_field(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn fd_gradient_matches_analytic() {
        let f = make_quadratic_field(&[2.0, 3.0, -1.0]).unwrap();
        let x = [0.3, -0.7, 1.1];
        let g = f.gradient(&x).unwrap();
        let fd = fd_gradient(&f, &x);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn counters_shared_between_clones() {
        let f = ScalarField::from_fn(1, |x| x[0]);
        let g = f.clone();
        f.eval(&[1.0]);
        g.eval(&[2.0]);
        assert_eq!(f.eval_count(), 2);
        f.reset_counters();
        assert_eq!(g.eval_count(), 0);
    }
}
