//! Voronoi diagram of a spectrum by brute-force half-plane clipping, and the
//! edge-minimum heuristic for picking the components that merge first.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::segment::{segment_minimize_sigma, SigmaProfile};
use crate::error::{Error, Result};
use crate::field::Aabb;

#[derive(Debug, Clone, Serialize)]
pub struct VoronoiEdge {
    pub start: Complex64,
    pub end: Complex64,
    /// Indices into the spectrum of the two sites the edge separates.
    pub generators: (usize, usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeMinimum {
    pub edge: VoronoiEdge,
    pub min_sigma: f64,
    pub argmin: Complex64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VoronoiChoice {
    pub pair: (Complex64, Complex64),
    pub seed: Complex64,
    pub edge_min: f64,
    pub edges: Vec<EdgeMinimum>,
}

/// Smallest pairwise gap of `points`, with the pair attaining it.
pub(crate) fn closest_sites(points: &[Complex64]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = (points[i] - points[j]).norm();
            if best.is_none_or(|b| d < b.2) {
                best = Some((i, j, d));
            }
        }
    }
    best
}

/// Clips `t` so that `m + t d` is no farther from `a` than from `c`.
/// Returns false when the clip empties the interval.
fn clip_halfplane(m: Complex64, d: Complex64, a: Complex64, c: Complex64, t0: &mut f64, t1: &mut f64) -> bool {
    // |z - a|^2 <= |z - c|^2  <=>  2 Re(z conj(c - a)) <= |c|^2 - |a|^2
    let w = c - a;
    let rhs = c.norm_sqr() - a.norm_sqr() - 2.0 * (m * w.conj()).re;
    let slope = 2.0 * (d * w.conj()).re;
    if slope.abs() <= f64::EPSILON * w.norm() {
        return rhs >= 0.0;
    }
    let t = rhs / slope;
    if slope > 0.0 {
        *t1 = t1.min(t);
    } else {
        *t0 = t0.max(t);
    }
    t0 < t1
}

fn clip_box(m: Complex64, d: Complex64, bbox: &Aabb, t0: &mut f64, t1: &mut f64) -> bool {
    for (k, (p, v)) in [(m.re, d.re), (m.im, d.im)].into_iter().enumerate() {
        let (lo, hi) = (bbox.lower[k], bbox.upper[k]);
        if v == 0.0 {
            if p < lo || p > hi {
                return false;
            }
            continue;
        }
        let (a, b) = ((lo - p) / v, (hi - p) / v);
        *t0 = t0.max(a.min(b));
        *t1 = t1.min(a.max(b));
    }
    t0 < t1
}

/// Every pair's perpendicular bisector clipped by the other sites'
/// half-planes and by `bbox`; empty pieces are dropped.
pub fn voronoi_edges(sites: &[Complex64], bbox: &Aabb) -> Result<Vec<VoronoiEdge>> {
    if bbox.lower.len() != 2 || bbox.upper.len() != 2 {
        return Err(Error::invalid("bounding box must be planar"));
    }
    match closest_sites(sites) {
        None => return Err(Error::invalid("need at least two sites")),
        Some((_, _, 0.0)) => return Err(Error::invalid("sites must be distinct")),
        _ => {}
    }
    let mut edges = Vec::new();
    for i in 0..sites.len() {
        for j in i + 1..sites.len() {
            let (a, b) = (sites[i], sites[j]);
            let m = 0.5 * (a + b);
            let d = Complex64::new(0.0, 1.0) * (b - a) / (b - a).norm();
            let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
            if !clip_box(m, d, bbox, &mut t0, &mut t1) {
                continue;
            }
            let kept = (0..sites.len())
                .filter(|&k| k != i && k != j)
                .all(|k| clip_halfplane(m, d, a, sites[k], &mut t0, &mut t1));
            let scale = (b - a).norm();
            if kept && t1 - t0 > 1e-12 * scale {
                edges.push(VoronoiEdge { start: m + d * t0, end: m + d * t1, generators: (i, j) });
            }
        }
    }
    Ok(edges)
}

/// Minimizes `sigma_min` over every edge of the spectrum's Voronoi diagram
/// and returns the pair of eigenvalues behind the lowest edge minimum.
pub fn voronoi_choice(profile: &SigmaProfile, spectrum: &[Complex64], bbox: &Aabb) -> Result<VoronoiChoice> {
    let edges = voronoi_edges(spectrum, bbox)?;
    let mins: Vec<Result<EdgeMinimum>> = edges
        .into_par_iter()
        .map(|edge| {
            let (argmin, min_sigma) = segment_minimize_sigma(profile, edge.start, edge.end)?;
            Ok(EdgeMinimum { edge, min_sigma, argmin })
        })
        .collect();
    let edges = mins.into_iter().collect::<Result<Vec<_>>>()?;
    let best = edges
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.min_sigma.total_cmp(&b.1.min_sigma).then(a.0.cmp(&b.0)))
        .map(|(k, _)| k)
        .ok_or_else(|| Error::Numerical("Voronoi diagram has no edges inside the box".into()))?;
    let e = &edges[best];
    Ok(VoronoiChoice {
        pair: (spectrum[e.edge.generators.0], spectrum[e.edge.generators.1]),
        seed: e.argmin,
        edge_min: e.min_sigma,
        edges,
    })
}
