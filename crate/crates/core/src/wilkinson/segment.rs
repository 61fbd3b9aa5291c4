//! Exact one-dimensional subproblems for `sigma_min(A - zI)` along segments.
//!
//! Every search rotates the segment onto the imaginary axis and asks the
//! crossing test where some singular value equals a trial level. Between
//! consecutive crossings `sigma_min - level` keeps its sign, so one value per
//! interval classifies it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{rotate_to_vertical, ComplexMatrix, SigmaMinField, VerticalSegment};
use crate::scalar::{golden_max, golden_min};

const LEVEL_INFLATION: f64 = 2e-8;
const MAX_SWEEPS: usize = 100;

/// `sigma_min` with the matrix norm used to size rounding tolerances.
#[derive(Debug, Clone)]
pub struct SigmaProfile {
    field: SigmaMinField,
    norm: f64,
}

impl SigmaProfile {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        Ok(Self { field: SigmaMinField::new(a.clone()), norm: a.norm2()? })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.field.matrix()
    }

    pub fn at(&self, z: Complex64) -> f64 {
        self.field.at(z)
    }

    /// Values closer than this to a level are treated as on it.
    pub fn rounding(&self, level: f64) -> f64 {
        8.0 * f64::EPSILON * (self.norm + level.abs())
    }

    fn vertical(&self, p: Complex64, q: Complex64) -> Result<VerticalSegment> {
        rotate_to_vertical(self.matrix(), p, q)
    }

    /// Sorted breakpoints `0 = s_0 < ... < s_k = length` made of the ends
    /// and the crossings at `level` strictly inside.
    fn breakpoints(&self, seg: &VerticalSegment, level: f64) -> Result<Vec<f64>> {
        let len = seg.length;
        let mut bps = vec![0.0];
        if level > 0.0 {
            bps.extend(seg.crossings(level)?.into_iter().filter(|&s| s > 0.0 && s < len));
        }
        bps.push(len);
        bps.dedup();
        Ok(bps)
    }
}

/// Global minimum of `sigma_min` over `[p, q]`.
///
/// Level-set iteration: from the best value found so far, raise the level by
/// a relative `2e-8`, take the midpoints of the sublevel intervals as new
/// candidates and repeat until nothing improves; a golden-section pass then
/// polishes inside the last interval.
pub fn segment_minimize_sigma(profile: &SigmaProfile, p: Complex64, q: Complex64) -> Result<(Complex64, f64)> {
    if p == q {
        return Err(Error::invalid("segment endpoints must differ"));
    }
    let seg = profile.vertical(p, q)?;
    let len = seg.length;
    let f = |s: f64| profile.at(seg.point(s));
    let mut best = (0.0, f(0.0));
    for k in 1..=8 {
        let s = len * k as f64 / 8.0;
        let v = f(s);
        if v < best.1 {
            best = (s, v);
        }
    }
    let mut bracket = (0.0, len);
    for _ in 0..MAX_SWEEPS {
        if best.1 <= 0.0 {
            break;
        }
        let level = best.1 * (1.0 + LEVEL_INFLATION);
        let bps = profile.breakpoints(&seg, level)?;
        let mut improved = false;
        let mut widest: f64 = 0.0;
        for w in bps.windows(2) {
            let m = 0.5 * (w[0] + w[1]);
            let v = f(m);
            if v < level {
                widest = widest.max(w[1] - w[0]);
                if v < best.1 {
                    best = (m, v);
                    bracket = (w[0], w[1]);
                    improved = true;
                }
            }
        }
        if !improved || widest <= 1e-12 * len {
            break;
        }
    }
    let (s, v) = golden_min(
        f,
        bracket.0.max(best.0 - 0.5 * (bracket.1 - bracket.0)),
        bracket.1.min(best.0 + 0.5 * (bracket.1 - bracket.0)),
        1e-14 * len,
    );
    if v < best.1 {
        best = (s, v);
    }
    Ok((seg.point(best.0), best.1))
}

/// Global maximum of `sigma_min` over `[p, q]`, by the same scheme run on
/// superlevel intervals.
pub fn segment_maximize_sigma(profile: &SigmaProfile, p: Complex64, q: Complex64) -> Result<(Complex64, f64)> {
    if p == q {
        return Ok((p, profile.at(p)));
    }
    let seg = profile.vertical(p, q)?;
    let len = seg.length;
    let f = |s: f64| profile.at(seg.point(s));
    let mut best = (0.0, f(0.0));
    for k in 1..=8 {
        let s = len * k as f64 / 8.0;
        let v = f(s);
        if v > best.1 {
            best = (s, v);
        }
    }
    let mut bracket = (0.0, len);
    for _ in 0..MAX_SWEEPS {
        let level = best.1 * (1.0 - LEVEL_INFLATION);
        if level <= 0.0 {
            break;
        }
        let bps = profile.breakpoints(&seg, level)?;
        let mut improved = false;
        let mut widest: f64 = 0.0;
        for w in bps.windows(2) {
            let m = 0.5 * (w[0] + w[1]);
            let v = f(m);
            if v > level {
                widest = widest.max(w[1] - w[0]);
                if v > best.1 {
                    best = (m, v);
                    bracket = (w[0], w[1]);
                    improved = true;
                }
            }
        }
        if !improved || widest <= 1e-12 * len {
            break;
        }
    }
    let (s, v) = golden_max(
        f,
        bracket.0.max(best.0 - 0.5 * (bracket.1 - bracket.0)),
        bracket.1.min(best.0 + 0.5 * (bracket.1 - bracket.0)),
        1e-14 * len,
    );
    if v > best.1 {
        best = (s, v);
    }
    Ok((seg.point(best.0), best.1))
}

/// Furthest point `w` of `[from, to]` with `sigma_min <= cap` on all of
/// `[from, w]`; `to` itself when the whole segment qualifies.
pub fn advance_sigma(profile: &SigmaProfile, from: Complex64, to: Complex64, cap: f64) -> Result<Complex64> {
    let tol = profile.rounding(cap);
    let f0 = profile.at(from);
    if f0 > cap + tol {
        return Err(Error::precondition(format!("start value {f0} exceeds cap {cap}")));
    }
    if from == to || cap <= 0.0 {
        return Ok(if from == to { to } else { from });
    }
    let seg = profile.vertical(from, to)?;
    let f = |s: f64| profile.at(seg.point(s));
    let bps = profile.breakpoints(&seg, cap)?;
    let mut ok = 0.0;
    for w in bps.windows(2) {
        let m = 0.5 * (w[0] + w[1]);
        if f(m) > cap + tol {
            // the crossing at w[0] is bracketed by [ok, m]
            let (mut lo, mut hi) = (ok, m);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if f(mid) <= cap {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(seg.point(lo));
        }
        ok = m;
    }
    Ok(to)
}

/// Moves the endpoint with the lower value toward the other one until the
/// two values agree.
pub fn equalize_sigma(profile: &SigmaProfile, x: Complex64, y: Complex64) -> Result<(Complex64, Complex64)> {
    let (fx, fy) = (profile.at(x), profile.at(y));
    if fx == fy {
        return Ok((x, y));
    }
    if fx < fy {
        Ok((advance_sigma(profile, x, y, fy)?, y))
    } else {
        Ok((x, advance_sigma(profile, y, x, fx)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn profile(d: &[Complex64]) -> SigmaProfile {
        SigmaProfile::new(&ComplexMatrix::from_diagonal(d).unwrap()).unwrap()
    }

    #[test]
    fn normal_examples() {
        let p = profile(&[c(0.0, 0.0), c(2.0, 0.0)]);
        let (z, s) = segment_minimize_sigma(&p, c(0.0, 0.0), c(2.0, 0.0)).unwrap();
        assert!(s.abs() < 1e-15 && (z.re == 0.0 || z.re == 2.0));
        let (z, s) = segment_maximize_sigma(&p, c(0.0, 0.0), c(2.0, 0.0)).unwrap();
        assert!((z - c(1.0, 0.0)).norm() < 1e-9 && (s - 1.0).abs() < 1e-15, "{z} {s}");
        let (z, s) = segment_minimize_sigma(&p, c(1.0, -1.0), c(1.0, 1.0)).unwrap();
        assert!((z - c(1.0, 0.0)).norm() < 1e-9 && (s - 1.0).abs() < 1e-15);

        let p = profile(&[c(0.0, 0.0)]);
        let (z, s) = segment_minimize_sigma(&p, c(1.0, -1.0), c(1.0, 1.0)).unwrap();
        assert!((z - c(1.0, 0.0)).norm() < 1e-9 && (s - 1.0).abs() < 1e-15);
        assert!(segment_minimize_sigma(&p, c(1.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn advance_stops_on_the_cap() {
        let p = profile(&[c(0.0, 0.0), c(2.0, 0.0)]);
        let w = advance_sigma(&p, c(0.1, 0.0), c(1.9, 0.0), 0.5).unwrap();
        assert!((w - c(0.5, 0.0)).norm() < 1e-14, "{w}");
        let w = advance_sigma(&p, c(0.1, 0.0), c(0.4, 0.0), 0.5).unwrap();
        assert_eq!(w, c(0.4, 0.0));
        assert!(advance_sigma(&p, c(0.9, 0.0), c(0.1, 0.0), 0.5).is_err());
        let (x, y) = equalize_sigma(&p, c(0.1, 0.0), c(1.7, 0.0)).unwrap();
        assert!((x - c(0.3, 0.0)).norm() < 1e-14 && y == c(1.7, 0.0));
    }

    fn random_profile(rng: &mut ChaCha8Rng) -> SigmaProfile {
        let a = DMatrix::from_fn(5, 5, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        SigmaProfile::new(&ComplexMatrix::new(a).unwrap()).unwrap()
    }

    // dense scan plus golden refinement around the best samples
    fn scan_oracle(p: &SigmaProfile, a: Complex64, b: Complex64, maximize: bool) -> f64 {
        let n = 100_000;
        let g = |t: f64| {
            let v = p.at(a + (b - a) * t);
            if maximize {
                -v
            } else {
                v
            }
        };
        let vals: Vec<f64> = (0..=n).map(|k| g(k as f64 / n as f64)).collect();
        let mut best = f64::INFINITY;
        for k in 0..=n {
            let lo = if k == 0 { 0 } else { k - 1 };
            let hi = (k + 1).min(n);
            if vals[k] <= vals[lo] && vals[k] <= vals[hi] {
                let (_, v) = golden_min(g, lo as f64 / n as f64, hi as f64 / n as f64, 1e-15);
                best = best.min(v.min(vals[k]));
            }
        }
        if maximize {
            -best
        } else {
            best
        }
    }

    #[test]
    fn random_segments_match_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..6 {
            let p = random_profile(&mut rng);
            let a = c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            let b = c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            let (z, v) = segment_minimize_sigma(&p, a, b).unwrap();
            let oracle = scan_oracle(&p, a, b, false);
            assert!(v <= oracle + 1e-9, "min {v} vs {oracle}");
            assert!((p.at(z) - v).abs() <= 1e-15);
            let (_, v) = segment_maximize_sigma(&p, a, b).unwrap();
            let oracle = scan_oracle(&p, a, b, true);
            assert!(v >= oracle - 1e-9, "max {v} vs {oracle}");
        }
    }

    #[test]
    fn advance_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..6 {
            let p = random_profile(&mut rng);
            let a = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let b = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let cap = p.at(a) + 0.05;
            let w = advance_sigma(&p, a, b, cap).unwrap();
            let t_w = (w - a).norm() / (b - a).norm();
            let n = 100_000;
            let first_violation = (0..=n).map(|k| k as f64 / n as f64).find(|&t| p.at(a + (b - a) * t) > cap);
            match first_violation {
                Some(t) => assert!(t_w <= t && t - t_w <= 2.0 / n as f64, "{t_w} vs {t}"),
                None => assert_eq!(w, b),
            }
        }
    }
}
