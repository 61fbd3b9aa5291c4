//! Fast local level-set iteration.
//!
//! Each step minimizes `f` on the hyperplane bisecting the current pair,
//! then pulls both points toward that minimizer as far as the sublevel set
//! allows. Near a nondegenerate index-one saddle the values `f(x_i)` rise to
//! the critical value superlinearly.

mod closest_pair;
mod hyperplane;
mod segment;

use serde::Serialize;

pub use closest_pair::{refine_closest_pair, ClosestPair, MAX_SWEEPS};
pub use hyperplane::{bisector_minimize, orthogonal_complement};
pub use segment::{advance_along_segment, equalize_endpoints, segment_max};

use crate::error::{Error, Result};
use crate::field::{Point, Region, ScalarField};
use crate::path::Polyline;
use crate::vecops;

#[derive(Debug, Clone, Serialize)]
pub struct LocalOptions {
    pub point_tol: f64,
    /// Stop once `M_i - f(z_i) <= gap_tol |M_i|`.
    pub gap_tol: f64,
    pub max_iter: usize,
    pub do_step_1a: bool,
    pub segment_search_samples: usize,
    pub bisector_min_tol: f64,
}

impl Default for LocalOptions {
    fn default() -> Self {
        Self {
            point_tol: 1e-10,
            gap_tol: 1e-12,
            max_iter: 50,
            do_step_1a: false,
            segment_search_samples: 64,
            bisector_min_tol: 1e-12,
        }
    }
}

impl LocalOptions {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in
            [("point_tol", self.point_tol), ("gap_tol", self.gap_tol), ("bisector_min_tol", self.bisector_min_tol)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iter == 0 || self.segment_search_samples == 0 {
            return Err(Error::invalid("max_iter and segment_search_samples must be positive"));
        }
        Ok(())
    }
}

/// One row of the iteration: the pair `(x_i, y_i)`, the bisector minimizer
/// `z_i`, and the bracket `f(z_i) <= v <= M_i`.
#[derive(Debug, Clone, Serialize)]
pub struct LocalIterate {
    pub i: usize,
    pub x: Point,
    pub y: Point,
    pub z: Point,
    pub f_x: f64,
    pub f_z: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub dist: f64,
    pub gap_ratio: f64,
}

fn gap_ratio(m: f64, fx: f64) -> f64 {
    if fx != 0.0 {
        (m - fx) / fx.abs()
    } else {
        m - fx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// The pair collapsed below `point_tol`.
    PointTolerance,
    /// The bracket `[f(z_i), M_i]` closed below `gap_tol`.
    GapTolerance,
    MaxIterations,
    /// The bisector minimum fell below the current level: the hyperplane
    /// does not separate the two valleys.
    BisectorBelowLevel,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalRun {
    pub records: Vec<LocalIterate>,
    pub converged: bool,
    pub stop: StopReason,
    pub refinements: usize,
}

impl LocalRun {
    pub fn last(&self) -> &LocalIterate {
        self.records.last().expect("a run always has at least one record")
    }

    /// Best estimate of the critical value: `f(z)` of the final record.
    pub fn critical_value(&self) -> f64 {
        self.last().f_z
    }
}

/// The four geometric primitives the iteration needs. `FieldOracle` provides
/// them for any field by sampling; the Wilkinson solver supplies exact
/// versions for `sigma_min(A - zI)`.
pub trait LevelSetOracle {
    fn value(&self, p: &[f64]) -> f64;
    fn equalize(&self, x: &[f64], y: &[f64]) -> Result<(Point, Point)>;
    fn bisector_minimize(&self, x: &[f64], y: &[f64]) -> Result<(Point, f64)>;
    fn advance(&self, from: &[f64], to: &[f64], cap: f64) -> Result<Point>;
    fn segment_max(&self, x: &[f64], y: &[f64]) -> Result<(f64, Point)>;
    fn refine_pair(&self, x: &[f64], y: &[f64], level: f64) -> Result<ClosestPair>;
}

pub struct FieldOracle<'a> {
    pub field: &'a ScalarField,
    pub region: &'a Region,
    pub opts: &'a LocalOptions,
}

impl LevelSetOracle for FieldOracle<'_> {
    fn value(&self, p: &[f64]) -> f64 {
        self.field.eval(p)
    }

    fn equalize(&self, x: &[f64], y: &[f64]) -> Result<(Point, Point)> {
        equalize_endpoints(self.field, x, y, self.opts.segment_search_samples)
    }

    fn bisector_minimize(&self, x: &[f64], y: &[f64]) -> Result<(Point, f64)> {
        bisector_minimize(self.field, self.region, x, y, self.opts.bisector_min_tol)
    }

    fn advance(&self, from: &[f64], to: &[f64], cap: f64) -> Result<Point> {
        advance_along_segment(self.field, from, to, cap, self.opts.segment_search_samples)
    }

    fn segment_max(&self, x: &[f64], y: &[f64]) -> Result<(f64, Point)> {
        Ok(segment_max(self.field, x, y, self.opts.segment_search_samples))
    }

    fn refine_pair(&self, x: &[f64], y: &[f64], level: f64) -> Result<ClosestPair> {
        refine_closest_pair(self.field, self.region, x, y, level, self.opts.point_tol)
    }
}

pub fn run_local(
    field: &ScalarField,
    region: &Region,
    x0: &[f64],
    y0: &[f64],
    opts: &LocalOptions,
) -> Result<LocalRun> {
    if x0.len() != field.dim() || y0.len() != field.dim() {
        return Err(Error::invalid("endpoint dimension does not match the field"));
    }
    if !region.contains(x0) || !region.contains(y0) {
        return Err(Error::invalid("endpoints must lie in the region"));
    }
    run_local_with(&FieldOracle { field, region, opts }, x0, y0, opts)
}

pub fn run_local_with(oracle: &impl LevelSetOracle, x0: &[f64], y0: &[f64], opts: &LocalOptions) -> Result<LocalRun> {
    opts.validate()?;
    let (mut x, mut y) = oracle.equalize(x0, y0)?;
    let mut records: Vec<LocalIterate> = Vec::new();
    let mut refinements = 0;
    let mut gap_closed = false;
    let mut last_refine = 0usize;

    for i in 0..=opts.max_iter {
        let fx = oracle.value(&x);
        let mut dist = vecops::dist(&x, &y);

        if dist <= opts.point_tol {
            // pair has collapsed: the segment maximizer stands in for z
            let (m, arg) = if dist > 0.0 { oracle.segment_max(&x, &y)? } else { (fx, x.clone()) };
            records.push(LocalIterate { i, x, y, z: arg, f_x: fx, f_z: m, m, dist, gap_ratio: gap_ratio(m, fx) });
            return Ok(LocalRun { records, converged: true, stop: StopReason::PointTolerance, refinements });
        }
        if i == opts.max_iter && !gap_closed {
            break;
        }

        let stalled = records.len() >= 3 && i >= last_refine + 3 && {
            let old = records[records.len() - 3].dist;
            dist > 0.99 * old
        };
        if !gap_closed && (opts.do_step_1a || stalled) {
            if let Ok(pair) = oracle.refine_pair(&x, &y, fx) {
                if pair.dist < dist {
                    x = pair.x;
                    y = pair.y;
                    dist = pair.dist;
                    refinements += 1;
                }
            }
            last_refine = i;
        }

        let (z, fz) = oracle.bisector_minimize(&x, &y)?;
        let (m, _) = oracle.segment_max(&x, &y)?;
        records.push(LocalIterate {
            i,
            x: x.clone(),
            y: y.clone(),
            z: z.clone(),
            f_x: fx,
            f_z: fz,
            m,
            dist,
            gap_ratio: gap_ratio(m, fx),
        });
        if gap_closed {
            return Ok(LocalRun { records, converged: true, stop: StopReason::GapTolerance, refinements });
        }
        if fz < fx - 1e-12 * (1.0 + fx.abs()) {
            return Ok(LocalRun { records, converged: false, stop: StopReason::BisectorBelowLevel, refinements });
        }
        gap_closed = m - fz <= opts.gap_tol * m.abs();
        let xn = oracle.advance(&x, &z, fz)?;
        let yn = oracle.advance(&y, &z, fz)?;
        x = xn;
        y = yn;
    }
    Ok(LocalRun { records, converged: false, stop: StopReason::MaxIterations, refinements })
}

/// Polyline `x_0, ..., x_k, y_k, ..., y_0` through the iterates.
pub fn assemble_local_path(field: &ScalarField, records: &[LocalIterate]) -> Result<Polyline> {
    if records.is_empty() {
        return Err(Error::invalid("no iterates to join"));
    }
    Ok(Polyline::from_pairs(field, records.iter().map(|r| (&r.x, &r.y))))
}
