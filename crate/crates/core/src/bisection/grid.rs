//! Cell-centred grids over planar regions and 4-connected component labels.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Aabb, Point, Region, ScalarField};
use crate::local::refine_closest_pair;
use crate::vecops;

/// One component test: is `lev_{<= level} f ∩ U` connected between two
/// points, at grid spacing `resolution`?
#[derive(Debug, Clone)]
pub struct ComponentQuery<'a> {
    pub field: &'a ScalarField,
    pub region: &'a Region,
    pub level: f64,
    pub resolution: f64,
    /// Restricts the grid to part of the region's bounding box.
    pub window: Option<Aabb>,
}

impl<'a> ComponentQuery<'a> {
    pub fn new(field: &'a ScalarField, region: &'a Region, level: f64, resolution: f64) -> Self {
        Self { field, region, level, resolution, window: None }
    }

    pub fn with_window(mut self, window: Option<Aabb>) -> Self {
        self.window = window;
        self
    }

    fn bounds(&self) -> Result<Aabb> {
        let bb = self.region.bounding_box();
        match &self.window {
            None => Ok(bb),
            Some(w) => bb.intersect(w).ok_or_else(|| Error::invalid("window does not meet the region")),
        }
    }

    fn check(&self, a: &[f64], b: &[f64]) -> Result<()> {
        if self.field.dim() != 2 {
            return Err(Error::UnsupportedDimension { expected: 2, found: self.field.dim() });
        }
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return Err(Error::invalid("grid spacing must be positive"));
        }
        let tol = 1e-12 * (1.0 + self.level.abs());
        for p in [a, b] {
            if p.len() != 2 {
                return Err(Error::invalid("points must be planar"));
            }
            let v = self.field.eval(p);
            if v > self.level + tol {
                return Err(Error::precondition(format!("f({p:?}) = {v} exceeds level {}", self.level)));
            }
            if !self.region.contains(p) {
                return Err(Error::precondition(format!("{p:?} lies outside the region")));
            }
        }
        Ok(())
    }
}

pub(crate) struct Grid {
    lower: [f64; 2],
    h: f64,
    nx: usize,
    ny: usize,
    inside: Vec<bool>,
}

const MAX_CELLS: usize = 1 << 24;

impl Grid {
    fn build(q: &ComponentQuery, h: f64) -> Result<Grid> {
        let bb = q.bounds()?;
        let nx = ((bb.upper[0] - bb.lower[0]) / h).ceil().max(1.0) as usize;
        let ny = ((bb.upper[1] - bb.lower[1]) / h).ceil().max(1.0) as usize;
        if nx.saturating_mul(ny) > MAX_CELLS {
            return Err(Error::invalid(format!("grid of {nx}x{ny} cells is too fine")));
        }
        let lower = [bb.lower[0], bb.lower[1]];
        let inside: Vec<bool> = (0..ny)
            .into_par_iter()
            .flat_map_iter(|j| {
                (0..nx).map(move |i| {
                    let c = [lower[0] + (i as f64 + 0.5) * h, lower[1] + (j as f64 + 0.5) * h];
                    q.region.contains(&c) && q.field.eval(&c) <= q.level
                })
            })
            .collect();
        Ok(Grid { lower, h, nx, ny, inside })
    }

    fn center(&self, idx: usize) -> Point {
        let (i, j) = (idx % self.nx, idx / self.nx);
        vec![self.lower[0] + (i as f64 + 0.5) * self.h, self.lower[1] + (j as f64 + 0.5) * self.h]
    }

    /// Nearest marked cell to `p` within three rings of its own cell.
    fn locate(&self, p: &[f64]) -> Option<usize> {
        let ci = ((p[0] - self.lower[0]) / self.h).floor() as i64;
        let cj = ((p[1] - self.lower[1]) / self.h).floor() as i64;
        let ci = ci.clamp(0, self.nx as i64 - 1);
        let cj = cj.clamp(0, self.ny as i64 - 1);
        let mut best: Option<(f64, usize)> = None;
        for r in 0..=3i64 {
            for dj in -r..=r {
                for di in -r..=r {
                    if di.abs() != r && dj.abs() != r {
                        continue;
                    }
                    let (i, j) = (ci + di, cj + dj);
                    if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
                        continue;
                    }
                    let idx = j as usize * self.nx + i as usize;
                    if self.inside[idx] {
                        let d = vecops::dist(&self.center(idx), p);
                        if best.is_none_or(|(bd, bi)| d < bd || (d == bd && idx < bi)) {
                            best = Some((d, idx));
                        }
                    }
                }
            }
            if best.is_some() {
                break;
            }
        }
        best.map(|(_, idx)| idx)
    }

    fn neighbours(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = (idx % self.nx, idx / self.nx);
        let mut out = [usize::MAX; 4];
        if i > 0 {
            out[0] = idx - 1;
        }
        if i + 1 < self.nx {
            out[1] = idx + 1;
        }
        if j > 0 {
            out[2] = idx - self.nx;
        }
        if j + 1 < self.ny {
            out[3] = idx + self.nx;
        }
        out.into_iter().filter(|&k| k != usize::MAX)
    }

    /// Component of `seed` as a membership mask.
    fn flood(&self, seed: usize) -> Vec<bool> {
        let mut seen = vec![false; self.inside.len()];
        let mut queue = VecDeque::from([seed]);
        seen[seed] = true;
        while let Some(c) = queue.pop_front() {
            for k in self.neighbours(c) {
                if self.inside[k] && !seen[k] {
                    seen[k] = true;
                    queue.push_back(k);
                }
            }
        }
        seen
    }

    fn edge_cells(&self, comp: &[bool]) -> Vec<usize> {
        (0..comp.len())
            .filter(|&c| comp[c] && (self.neighbours(c).count() < 4 || self.neighbours(c).any(|k| !comp[k])))
            .collect()
    }
}

struct Labels {
    grid: Grid,
    a: Vec<bool>,
    b: Option<Vec<bool>>,
}

fn label(q: &ComponentQuery, a: &[f64], b: &[f64], h: f64) -> Result<Labels> {
    let grid = Grid::build(q, h)?;
    let resolution_err = |p: &[f64]| Error::ResolutionLimit {
        message: format!("no grid cell below level {} near {p:?} at spacing {h:e}", q.level),
        state: None,
    };
    let sa = grid.locate(a).ok_or_else(|| resolution_err(a))?;
    let sb = grid.locate(b).ok_or_else(|| resolution_err(b))?;
    let ca = grid.flood(sa);
    if ca[sb] {
        return Ok(Labels { grid, a: ca, b: None });
    }
    let cb = grid.flood(sb);
    Ok(Labels { grid, a: ca, b: Some(cb) })
}

pub fn same_component(q: &ComponentQuery, a: &[f64], b: &[f64]) -> Result<bool> {
    q.check(a, b)?;
    Ok(label(q, a, b, q.resolution)?.b.is_none())
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparatedPair {
    pub x: Point,
    pub y: Point,
    pub dist: f64,
    /// Spacing of the grid that separated the components.
    pub spacing: f64,
}

#[derive(Debug, Clone, Serialize)]
pub enum ComponentGap {
    Connected,
    Separated(SeparatedPair),
}

fn closest_cells(labels: &Labels) -> (usize, usize, f64) {
    let g = &labels.grid;
    let ea = g.edge_cells(&labels.a);
    let eb = g.edge_cells(labels.b.as_ref().unwrap());
    let cb: Vec<(usize, Point)> = eb.iter().map(|&c| (c, g.center(c))).collect();
    ea.par_iter()
        .map(|&c| {
            let pc = g.center(c);
            let mut best = (c, usize::MAX, f64::INFINITY);
            for (k, pk) in &cb {
                let d = vecops::dist(&pc, pk);
                if d < best.2 {
                    best = (c, *k, d);
                }
            }
            best
        })
        .reduce(
            || (usize::MAX, usize::MAX, f64::INFINITY),
            |p, q| if q.2 < p.2 || (q.2 == p.2 && (q.0, q.1) < (p.0, p.1)) { q } else { p },
        )
}

/// Closest pair between the components of `a` and `b`, or `Connected`.
///
/// The seed is the closest pair of grid cells; if those lie within four
/// cells of each other the grid is rebuilt once at a quarter of the spacing.
/// The seed is then polished by alternating hyperplane minimization.
pub fn component_distance(q: &ComponentQuery, a: &[f64], b: &[f64]) -> Result<ComponentGap> {
    q.check(a, b)?;
    let mut h = q.resolution;
    let mut labels = label(q, a, b, h)?;
    if labels.b.is_none() {
        return Ok(ComponentGap::Connected);
    }
    let (mut ca, mut cb, mut d) = closest_cells(&labels);
    if d <= 4.0 * h {
        h /= 4.0;
        labels = label(q, a, b, h)?;
        if labels.b.is_none() {
            return Ok(ComponentGap::Connected);
        }
        (ca, cb, d) = closest_cells(&labels);
        if d <= 1.5 * h {
            return Err(Error::ResolutionLimit {
                message: format!("components touch at spacing {h:e} and level {}", q.level),
                state: None,
            });
        }
    }
    let sx = labels.grid.center(ca);
    let sy = labels.grid.center(cb);
    let mut pair = SeparatedPair { x: sx.clone(), y: sy.clone(), dist: d, spacing: h };
    if let Ok(p) = refine_closest_pair(q.field, q.region, &sx, &sy, q.level, 1e-10) {
        if p.dist <= d + h && q.region.contains(&p.x) && q.region.contains(&p.y) && p.dist > 0.0 {
            pair = SeparatedPair { x: p.x, y: p.y, dist: p.dist, spacing: h };
        }
    }
    Ok(ComponentGap::Separated(pair))
}
