//! Global bracketing of the mountain-pass value on planar fields.
//!
//! The level `l` is bisected between a lower bound (endpoints lie in
//! different components of `lev_{<= l}`) and an upper bound (they lie in the
//! same one). Each time the lower bound moves, the pair is replaced by the
//! closest points of the two components at that level.

mod grid;

use serde::Serialize;

pub use grid::{component_distance, same_component, ComponentGap, ComponentQuery, SeparatedPair};

use crate::error::{Error, Result};
use crate::field::{Aabb, Point, Region, ScalarField, TestProblem};
use crate::local::segment_max;
use crate::path::Polyline;
use crate::vecops;

#[derive(Debug, Clone, Serialize)]
pub struct BisectOptions {
    pub value_tol: f64,
    pub point_tol: f64,
    pub max_iter: usize,
    /// Grid cells across the diameter of the search window.
    pub cells: usize,
    /// The window is a square of half-width `window_factor |x_i - y_i|`
    /// around the pair's midpoint, clipped to the region.
    pub window_factor: f64,
    /// Lower `u` to the maximum of `f` along `[x_i, y_i]` when that is
    /// smaller. Off by default because it breaks exact halving of `u - l`.
    pub tighten_upper: bool,
}

impl Default for BisectOptions {
    fn default() -> Self {
        Self { value_tol: 1e-6, point_tol: 1e-10, max_iter: 60, cells: 512, window_factor: 4.0, tighten_upper: false }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BisectionStep {
    pub iteration: usize,
    pub lower: f64,
    pub upper: f64,
    pub x: Point,
    pub y: Point,
    pub dist: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BisectionState {
    pub lower: f64,
    pub upper: f64,
    pub pair: (Point, Point),
    /// Level at which the current pair was produced.
    pub level_of_pair: f64,
    pub history: Vec<BisectionStep>,
    /// `(x_0, y_0), (x_1, y_1), ...` one entry per lower-bound update.
    pub pairs: Vec<(Point, Point)>,
}

impl BisectionState {
    fn record(&mut self) {
        let (x, y) = self.pair.clone();
        let dist = vecops::dist(&x, &y);
        self.history.push(BisectionStep {
            iteration: self.history.len(),
            lower: self.lower,
            upper: self.upper,
            x,
            y,
            dist,
        });
    }
}

fn window(region: &Region, x: &[f64], y: &[f64], factor: f64) -> Option<Aabb> {
    let bb = region.bounding_box();
    let half = factor * vecops::dist(x, y);
    let c = vecops::midpoint(x, y);
    let w = Aabb { lower: c.iter().map(|v| v - half).collect(), upper: c.iter().map(|v| v + half).collect() };
    let covers =
        w.lower.iter().zip(&bb.lower).all(|(a, b)| a <= b) && w.upper.iter().zip(&bb.upper).all(|(a, b)| a >= b);
    if covers {
        None
    } else {
        w.intersect(&bb)
    }
}

pub fn bisect(
    problem: &TestProblem,
    init_lower: Option<f64>,
    init_upper: Option<f64>,
    opts: &BisectOptions,
) -> Result<BisectionState> {
    let (a, b) = &problem.endpoints;
    bisect_field(&problem.field, &problem.region, a, b, init_lower, init_upper, opts)
}

pub fn bisect_field(
    field: &ScalarField,
    region: &Region,
    a: &[f64],
    b: &[f64],
    init_lower: Option<f64>,
    init_upper: Option<f64>,
    opts: &BisectOptions,
) -> Result<BisectionState> {
    if field.dim() != 2 {
        return Err(Error::UnsupportedDimension { expected: 2, found: field.dim() });
    }
    if opts.cells < 8 || !(opts.window_factor >= 1.0) {
        return Err(Error::invalid("grid needs at least 8 cells and a window factor of at least 1"));
    }
    let floor = field.eval(a).max(field.eval(b));
    let lower = init_lower.unwrap_or(floor);
    let upper = match init_upper {
        Some(u) => u,
        None => segment_max(field, a, b, 64).0,
    };
    if !(lower.is_finite() && upper.is_finite()) || lower > upper {
        return Err(Error::invalid(format!("initial bounds [{lower}, {upper}] are inverted")));
    }
    if lower < floor - 1e-12 * (1.0 + floor.abs()) {
        return Err(Error::invalid(format!("initial lower bound {lower} is below the endpoint values {floor}")));
    }

    let mut state = BisectionState {
        lower,
        upper,
        pair: (a.to_vec(), b.to_vec()),
        level_of_pair: lower,
        history: Vec::new(),
        pairs: vec![(a.to_vec(), b.to_vec())],
    };
    state.record();

    for _ in 0..opts.max_iter {
        let (x, y) = state.pair.clone();
        if state.upper - state.lower <= opts.value_tol || vecops::dist(&x, &y) <= opts.point_tol {
            break;
        }
        let level = 0.5 * (state.lower + state.upper);
        let win = window(region, &x, &y, opts.window_factor);
        let diameter = win.as_ref().map_or_else(|| region.diameter(), |w| w.diameter());
        let q = ComponentQuery::new(field, region, level, diameter / opts.cells as f64).with_window(win);
        match component_distance(&q, &x, &y) {
            Ok(ComponentGap::Connected) => state.upper = level,
            Ok(ComponentGap::Separated(p)) => {
                state.lower = level;
                state.level_of_pair = level;
                if opts.tighten_upper {
                    let m = segment_max(field, &p.x, &p.y, 64).0.max(level);
                    state.upper = state.upper.min(m);
                }
                state.pair = (p.x.clone(), p.y.clone());
                state.pairs.push((p.x, p.y));
            }
            Err(Error::ResolutionLimit { message, .. }) => {
                return Err(Error::ResolutionLimit { message, state: Some(Box::new(state)) });
            }
            Err(e) => return Err(e),
        }
        state.record();
    }
    Ok(state)
}

/// Path `x_0, ..., x_i, y_i, ..., y_0` with its maximum value, which bounds
/// the mountain-pass value from above.
pub fn assemble_path(field: &ScalarField, state: &BisectionState) -> Result<Polyline> {
    if state.pairs.is_empty() {
        return Err(Error::invalid("no pairs to join"));
    }
    Ok(Polyline::from_pairs(field, state.pairs.iter().map(|(x, y)| (x, y))))
}
