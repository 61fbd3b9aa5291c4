//! Searches along a straight segment of a generic field.

use crate::error::{Error, Result};
use crate::field::{Point, ScalarField};
use crate::scalar::golden_max;
use crate::vecops;

pub(crate) fn cap_tolerance(cap: f64) -> f64 {
    1e-12 * (1.0 + cap.abs())
}

/// Parameters checked by `advance_along_segment`: a uniform grid plus
/// samples that cluster geometrically at `t = 1`, where a thin band above
/// the cap tends to sit just before the bisector minimizer.
fn search_parameters(samples: usize) -> Vec<f64> {
    let samples = samples.max(1);
    let mut ts: Vec<f64> = (1..=samples).map(|k| k as f64 / samples as f64).collect();
    let last_uniform = (samples - 1) as f64 / samples as f64;
    for k in 1..=52 {
        let t = 1.0 - (0.5f64).powi(k);
        if t > last_uniform && t < 1.0 {
            ts.push(t);
        }
    }
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup();
    ts
}

/// Furthest point `p` of `[from, to]` with `f <= cap` at every checked point
/// of `[from, p]`. Returns `to` itself when no check fails.
pub fn advance_along_segment(field: &ScalarField, from: &[f64], to: &[f64], cap: f64, samples: usize) -> Result<Point> {
    let tol = cap_tolerance(cap);
    let f0 = field.eval(from);
    if f0 > cap + tol {
        return Err(Error::precondition(format!("start value {f0} exceeds cap {cap}")));
    }
    if from == to {
        return Ok(to.to_vec());
    }
    let at = |t: f64| field.eval(&vecops::lerp(from, to, t));
    let crossing = |mut lo: f64, mut hi: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if at(mid) <= cap {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        vecops::lerp(from, to, lo)
    };
    let ts = search_parameters(samples);
    let mut vals = Vec::with_capacity(ts.len());
    // bisection starts from the last sample at or below the cap itself, so
    // the returned point never sits inside the tolerance band above it
    let mut below = 0.0;
    for &t in &ts {
        let v = at(t);
        if v > cap + tol {
            return Ok(crossing(below, t));
        }
        if v <= cap {
            below = t;
        }
        vals.push(v);
    }
    // a band above the cap can fall between two samples; refine around the
    // largest one before accepting the whole segment
    let k = (0..ts.len()).max_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
    let lo = if k == 0 { 0.0 } else { ts[k - 1] };
    let hi = if k + 1 < ts.len() { ts[k + 1] } else { 1.0 };
    let (t, v) = golden_max(at, lo, hi, 1e-13);
    if v > cap + tol {
        let start = ts.iter().zip(&vals).take_while(|(s, _)| **s < t).filter(|(_, v)| **v <= cap).last();
        return Ok(crossing(start.map_or(0.0, |(s, _)| *s), t));
    }
    Ok(to.to_vec())
}

/// Moves the lower endpoint toward the other one until the values agree.
pub fn equalize_endpoints(field: &ScalarField, x0: &[f64], y0: &[f64], samples: usize) -> Result<(Point, Point)> {
    let fx = field.eval(x0);
    let fy = field.eval(y0);
    if (fx - fy).abs() <= 1e-12 * (1.0 + fx.abs().max(fy.abs())) {
        return Ok((x0.to_vec(), y0.to_vec()));
    }
    if fx < fy {
        Ok((advance_along_segment(field, x0, y0, fy, samples)?, y0.to_vec()))
    } else {
        Ok((x0.to_vec(), advance_along_segment(field, y0, x0, fx, samples)?))
    }
}

/// Maximum of `f` on `[x, y]`: uniform samples, then golden-section
/// refinement around the best sample.
pub fn segment_max(field: &ScalarField, x: &[f64], y: &[f64], samples: usize) -> (f64, Point) {
    let samples = samples.max(2);
    let vals: Vec<f64> = (0..=samples).map(|k| field.eval(&vecops::lerp(x, y, k as f64 / samples as f64))).collect();
    let mut k = 0;
    for (j, v) in vals.iter().enumerate() {
        if *v > vals[k] {
            k = j;
        }
    }
    let mut best_t = k as f64 / samples as f64;
    let mut best = vals[k];
    let a = (k.saturating_sub(1)) as f64 / samples as f64;
    let b = ((k + 1).min(samples)) as f64 / samples as f64;
    let (t, v) = golden_max(|t| field.eval(&vecops::lerp(x, y, t)), a, b, 1e-13);
    if v > best {
        best = v;
        best_t = t;
    }
    (best, vecops::lerp(x, y, best_t))
}
