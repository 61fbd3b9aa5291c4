use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vecops;

/// Axis-aligned box given by its two corners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Aabb {
    pub fn diameter(&self) -> f64 {
        vecops::dist(&self.lower, &self.upper)
    }

    pub fn intersect(&self, other: &Aabb) -> Option<Aabb> {
        let lower: Vec<f64> = self.lower.iter().zip(&other.lower).map(|(a, b)| a.max(*b)).collect();
        let upper: Vec<f64> = self.upper.iter().zip(&other.upper).map(|(a, b)| a.min(*b)).collect();
        if lower.iter().zip(&upper).all(|(l, u)| l < u) {
            Some(Aabb { lower, upper })
        } else {
            None
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| *l <= *v && *v <= *u)
    }
}

/// Open search region `U`. `contains` tests the closure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl Region {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || !vecops::is_finite(&center) {
            return Err(Error::invalid("ball center must be a finite nonempty point"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Region::Ball { center, radius })
    }

    pub fn cube(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::invalid("box corners must be nonempty and of equal length"));
        }
        if !vecops::is_finite(&lower) || !vecops::is_finite(&upper) {
            return Err(Error::invalid("box corners must be finite"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l >= u) {
            return Err(Error::invalid("box lower corner must be strictly below upper corner"));
        }
        Ok(Region::Box { lower, upper })
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Ball { center, .. } => center.len(),
            Region::Box { lower, .. } => lower.len(),
        }
    }

    /// Membership in the closed region.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Ball { center, radius } => vecops::dist(x, center) <= *radius,
            Region::Box { lower, upper } => {
                x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| *l <= *v && *v <= *u)
            }
        }
    }

    pub fn contains_interior(&self, x: &[f64]) -> bool {
        match self {
            Region::Ball { center, radius } => vecops::dist(x, center) < *radius,
            Region::Box { lower, upper } => x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| *l < *v && *v < *u),
        }
    }

    pub fn bounding_box(&self) -> Aabb {
        match self {
            Region::Ball { center, radius } => Aabb {
                lower: center.iter().map(|c| c - radius).collect(),
                upper: center.iter().map(|c| c + radius).collect(),
            },
            Region::Box { lower, upper } => Aabb { lower: lower.clone(), upper: upper.clone() },
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Region::Ball { radius, .. } => 2.0 * radius,
            Region::Box { lower, upper } => vecops::dist(lower, upper),
        }
    }

    /// Parameter interval `[t0, t1]` of `{p + t d}` inside the closed
    /// region, or `None` when the line misses it.
    pub fn clip_line(&self, p: &[f64], d: &[f64]) -> Option<(f64, f64)> {
        match self {
            Region::Ball { center, radius } => {
                let w = vecops::sub(p, center);
                let a = vecops::dot(d, d);
                if a == 0.0 {
                    return (vecops::norm(&w) <= *radius).then_some((f64::NEG_INFINITY, f64::INFINITY));
                }
                let b = vecops::dot(&w, d);
                let c = vecops::dot(&w, &w) - radius * radius;
                let disc = b * b - a * c;
                if disc < 0.0 {
                    return None;
                }
                let s = disc.sqrt();
                Some(((-b - s) / a, (-b + s) / a))
            }
            Region::Box { lower, upper } => {
                let mut t0 = f64::NEG_INFINITY;
                let mut t1 = f64::INFINITY;
                for j in 0..p.len() {
                    if d[j] == 0.0 {
                        if p[j] < lower[j] || p[j] > upper[j] {
                            return None;
                        }
                        continue;
                    }
                    let a = (lower[j] - p[j]) / d[j];
                    let b = (upper[j] - p[j]) / d[j];
                    t0 = t0.max(a.min(b));
                    t1 = t1.min(a.max(b));
                }
                (t0 <= t1).then_some((t0, t1))
            }
        }
    }

    /// Largest `t >= 0` with `x + t d` in the closed region; `x` must be inside.
    pub fn max_step(&self, x: &[f64], d: &[f64]) -> f64 {
        match self.clip_line(x, d) {
            Some((_, t1)) => t1.max(0.0),
            None => 0.0,
        }
    }
}
