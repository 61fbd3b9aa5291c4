//! Local closest pair between two components of a sublevel set, by
//! alternating hyperplane minimization and segment trimming.

use serde::Serialize;

use super::hyperplane::{minimize_on_affine, orthogonal_complement};
use super::segment::{advance_along_segment, cap_tolerance};
use crate::error::{Error, Result};
use crate::field::{Point, Region, ScalarField};
use crate::scalar::golden_min;
use crate::vecops;

pub const MAX_SWEEPS: usize = 50;

#[derive(Debug, Clone, Serialize)]
pub struct ClosestPair {
    pub x: Point,
    pub y: Point,
    pub dist: f64,
    pub sweeps: usize,
    pub converged: bool,
    /// A hyperplane minimization stopped on the region wall.
    pub boundary: bool,
}

/// Trims `[x, y]` to the innermost points still joined to `x` and `y`
/// inside `lev <= level`.
fn trim(field: &ScalarField, x: &[f64], y: &[f64], level: f64, samples: usize) -> Result<(Point, Point)> {
    let xn = advance_along_segment(field, x, y, level, samples)?;
    if xn == y {
        return Err(Error::precondition("the segment between the pair stays below the level"));
    }
    let yn = advance_along_segment(field, y, &xn, level, samples)?;
    Ok((xn, yn))
}

pub fn refine_closest_pair(
    field: &ScalarField,
    region: &Region,
    x: &[f64],
    y: &[f64],
    level: f64,
    point_tol: f64,
) -> Result<ClosestPair> {
    let tol = cap_tolerance(level);
    for p in [x, y] {
        if field.eval(p) > level + tol {
            return Err(Error::precondition(format!("point {p:?} lies above the level {level}")));
        }
    }
    if x == y {
        return Ok(ClosestPair {
            x: x.to_vec(),
            y: y.to_vec(),
            dist: 0.0,
            sweeps: 0,
            converged: true,
            boundary: false,
        });
    }
    let samples = 64;
    let (mut x, mut y) = trim(field, x, y, level, samples)?;
    let mut boundary = false;
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let d = vecops::sub(&y, &x);
        let len = vecops::norm(&d);
        if len == 0.0 {
            converged = true;
            break;
        }
        let basis = orthogonal_complement(&vecops::scale(&d, 1.0 / len));
        let xs = minimize_on_affine(field, region, &x, &basis, 1e-12, 200);
        let ys = minimize_on_affine(field, region, &y, &basis, 1e-12, 200);
        boundary |= xs.boundary || ys.boundary;
        // The undamped update can oscillate around a saddle (on x1^2 - x2^2 it
        // reflects the pair across the axis forever), so the step towards the
        // hyperplane minimizers is damped by a search on the trimmed distance.
        let step = |tau: f64| {
            let xt = vecops::lerp(&x, &xs.point, tau);
            let yt = vecops::lerp(&y, &ys.point, tau);
            trim(field, &xt, &yt, level, samples).ok()
        };
        let gap = |tau: f64| step(tau).map_or(f64::INFINITY, |(a, b)| vecops::dist(&a, &b));
        let (mut tau, mut best) = golden_min(gap, 0.0, 1.0, 1e-9);
        let full = gap(1.0);
        if full <= best {
            tau = 1.0;
            best = full;
        }
        if !(best < len - 1e-15 * (1.0 + len)) {
            converged = true;
            break;
        }
        let Some((xn, yn)) = step(tau) else {
            break;
        };
        let moved = vecops::dist(&xn, &x) + vecops::dist(&yn, &y);
        x = xn;
        y = yn;
        if moved < point_tol {
            converged = true;
            break;
        }
    }
    let dist = vecops::dist(&x, &y);
    Ok(ClosestPair { x, y, dist, sweeps, converged, boundary })
}
