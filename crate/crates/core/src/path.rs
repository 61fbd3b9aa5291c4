//! Polylines with a sampled maximum, used as upper-bound certificates.

use serde::Serialize;

use crate::field::{Point, ScalarField};
use crate::local::segment_max;

#[derive(Debug, Clone, Serialize)]
pub struct Polyline {
    pub vertices: Vec<Point>,
    pub max_value: f64,
    pub argmax: Point,
}

impl Polyline {
    /// Builds the polyline and scans each edge for its maximum.
    pub fn through(field: &ScalarField, vertices: Vec<Point>) -> Self {
        let mut max_value = f64::NEG_INFINITY;
        let mut argmax = vertices[0].clone();
        for v in &vertices {
            let f = field.eval(v);
            if f > max_value {
                max_value = f;
                argmax = v.clone();
            }
        }
        for w in vertices.windows(2) {
            if w[0] == w[1] {
                continue;
            }
            let (m, arg) = segment_max(field, &w[0], &w[1], 64);
            if m > max_value {
                max_value = m;
                argmax = arg;
            }
        }
        Polyline { vertices, max_value, argmax }
    }

    /// `x_0, ..., x_k, y_k, ..., y_0`
    pub fn from_pairs<'a>(field: &ScalarField, pairs: impl Iterator<Item = (&'a Point, &'a Point)>) -> Self {
        let (xs, ys): (Vec<&Point>, Vec<&Point>) = pairs.unzip();
        let mut vertices: Vec<Point> = xs.into_iter().cloned().collect();
        vertices.extend(ys.into_iter().rev().cloned());
        Self::through(field, vertices)
    }
}
