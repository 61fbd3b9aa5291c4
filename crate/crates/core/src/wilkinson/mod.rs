//! Distance to the nearest matrix with a repeated eigenvalue, found as the
//! level at which two components of `{z : sigma_min(A - zI) <= eps}` merge.
//!
//! A Voronoi heuristic picks the pair of eigenvalues; the local level-set
//! iteration then runs on `sigma_min` with every line search done exactly
//! through the crossing test.

mod input;
mod segment;
mod voronoi;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

pub use input::{bidiagonal_10, bidiagonal_5, builtin_matrix, parse_matrix, read_matrix, BUILTIN_MATRICES};
pub use segment::{advance_sigma, equalize_sigma, segment_maximize_sigma, segment_minimize_sigma, SigmaProfile};
pub use voronoi::{voronoi_choice, voronoi_edges, EdgeMinimum, VoronoiChoice, VoronoiEdge};

use crate::error::{Error, Result};
use crate::field::{Aabb, Point, Region, ScalarField};
use crate::linalg::{eigenvalues, smallest_singular_triplet, ComplexMatrix, SigmaMinField};
use crate::local::{
    refine_closest_pair, run_local_with, ClosestPair, LevelSetOracle, LocalIterate, LocalOptions, StopReason,
};

fn to_c(p: &[f64]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn to_p(z: Complex64) -> Point {
    vec![z.re, z.im]
}

#[derive(Debug, Clone, Serialize)]
pub struct WilkinsonOptions {
    pub local: LocalOptions,
    /// Fraction of the eigenvalue gap by which each start point is moved
    /// off its eigenvalue toward the other one.
    pub pull_in: f64,
    pub exhaustive: bool,
    pub perturbation: bool,
}

impl Default for WilkinsonOptions {
    fn default() -> Self {
        Self { local: LocalOptions::default(), pull_in: 0.02, exhaustive: false, perturbation: false }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Perturbation {
    pub matrix: ComplexMatrix,
    pub norm: f64,
    /// `sigma_min(A + E - z I)`; zero in exact arithmetic.
    pub residual: f64,
    pub singular_gap: f64,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WilkinsonResult {
    pub chosen_pair: (Complex64, Complex64),
    pub coalescence_point: Complex64,
    pub epsilon_bar_estimate: f64,
    pub records: Vec<LocalIterate>,
    pub converged: bool,
    pub stop: Option<StopReason>,
    pub perturbation: Option<Perturbation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairOutcome {
    pub pair: (Complex64, Complex64),
    pub epsilon_bar: Option<f64>,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WilkinsonReport {
    pub spectrum: Vec<Complex64>,
    pub heuristic: Option<VoronoiChoice>,
    pub heuristic_run: Option<WilkinsonResult>,
    /// Smallest converged estimate among the runs performed.
    pub best: WilkinsonResult,
    /// One entry per eigenvalue pair when the search is exhaustive.
    pub alternatives: Vec<PairOutcome>,
}

/// Eigenvalues sorted by real part, then imaginary part.
pub fn sorted_spectrum(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let mut ev = eigenvalues(a)?;
    ev.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(ev)
}

/// Bounding box of the spectrum grown by half its size plus `0.1 (1 + |A|)`.
pub fn spectrum_box(spectrum: &[Complex64], norm: f64) -> Aabb {
    let lo = |f: fn(&Complex64) -> f64| spectrum.iter().map(f).fold(f64::INFINITY, f64::min);
    let hi = |f: fn(&Complex64) -> f64| spectrum.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let (x0, x1, y0, y1) = (lo(|z| z.re), hi(|z| z.re), lo(|z| z.im), hi(|z| z.im));
    let margin = 0.1 * (1.0 + norm);
    let (gx, gy) = (0.25 * (x1 - x0) + margin, 0.25 * (y1 - y0) + margin);
    Aabb { lower: vec![x0 - gx, y0 - gy], upper: vec![x1 + gx, y1 + gy] }
}

/// Line searches for the local iteration, all exact on `sigma_min`.
struct SigmaOracle<'a> {
    profile: &'a SigmaProfile,
    field: &'a ScalarField,
    region: &'a Region,
    opts: &'a LocalOptions,
}

impl LevelSetOracle for SigmaOracle<'_> {
    fn value(&self, p: &[f64]) -> f64 {
        self.field.eval(p)
    }

    fn equalize(&self, x: &[f64], y: &[f64]) -> Result<(Point, Point)> {
        let (a, b) = equalize_sigma(self.profile, to_c(x), to_c(y))?;
        Ok((to_p(a), to_p(b)))
    }

    // The bisector meets the region in a segment, so step 1(b) is a global
    // minimization along it.
    fn bisector_minimize(&self, x: &[f64], y: &[f64]) -> Result<(Point, f64)> {
        let (cx, cy) = (to_c(x), to_c(y));
        if cx == cy {
            return Err(Error::invalid("bisector of a point is undefined"));
        }
        let mid = 0.5 * (cx + cy);
        if !self.region.contains(&to_p(mid)) {
            return Err(Error::precondition("midpoint of the pair lies outside the region"));
        }
        let d = Complex64::new(0.0, 1.0) * (cy - cx) / (cy - cx).norm();
        let (t0, t1) = self
            .region
            .clip_line(&to_p(mid), &to_p(d))
            .ok_or_else(|| Error::precondition("bisector misses the region"))?;
        let (z, v) = segment_minimize_sigma(self.profile, mid + d * t0, mid + d * t1)?;
        let t = ((z - mid) / d).re;
        let edge = 1e-9 * (t1 - t0);
        if t - t0 <= edge || t1 - t <= edge {
            return Err(Error::BoundaryHit { point: to_p(z) });
        }
        Ok((to_p(z), v))
    }

    fn advance(&self, from: &[f64], to: &[f64], cap: f64) -> Result<Point> {
        Ok(to_p(advance_sigma(self.profile, to_c(from), to_c(to), cap)?))
    }

    fn segment_max(&self, x: &[f64], y: &[f64]) -> Result<(f64, Point)> {
        let (z, v) = segment_maximize_sigma(self.profile, to_c(x), to_c(y))?;
        Ok((v, to_p(z)))
    }

    fn refine_pair(&self, x: &[f64], y: &[f64], level: f64) -> Result<ClosestPair> {
        refine_closest_pair(self.field, self.region, x, y, level, self.opts.point_tol)
    }
}

struct Setup {
    profile: SigmaProfile,
    field: ScalarField,
    region: Region,
    spectrum: Vec<Complex64>,
    norm: f64,
}

impl Setup {
    fn new(a: &ComplexMatrix) -> Result<Self> {
        let profile = SigmaProfile::new(a)?;
        let norm = a.norm2()?;
        let spectrum = sorted_spectrum(a)?;
        let bbox = spectrum_box(&spectrum, norm);
        Ok(Self {
            field: ScalarField::new(SigmaMinField::new(a.clone())),
            region: Region::cube(bbox.lower, bbox.upper)?,
            profile,
            spectrum,
            norm,
        })
    }

    fn run(&self, l1: Complex64, l2: Complex64, opts: &WilkinsonOptions) -> Result<WilkinsonResult> {
        if l1 == l2 {
            return Err(Error::invalid("the two eigenvalues must differ"));
        }
        if !(opts.pull_in >= 0.0 && opts.pull_in < 0.5) {
            return Err(Error::invalid(format!("pull-in fraction must lie in [0, 0.5), got {}", opts.pull_in)));
        }
        for l in [l1, l2] {
            let r = self.profile.at(l);
            if r > 1e-8 * (1.0 + self.norm) {
                return Err(Error::invalid(format!("{l} is not an eigenvalue (residual {r:e})")));
            }
        }
        let x0 = l1 + (l2 - l1) * opts.pull_in;
        let y0 = l2 - (l2 - l1) * opts.pull_in;
        let oracle =
            SigmaOracle { profile: &self.profile, field: &self.field, region: &self.region, opts: &opts.local };
        let run = run_local_with(&oracle, &to_p(x0), &to_p(y0), &opts.local)?;
        let last = run.last();
        Ok(WilkinsonResult {
            chosen_pair: (l1, l2),
            coalescence_point: to_c(&last.z),
            epsilon_bar_estimate: last.f_z,
            converged: run.converged,
            stop: Some(run.stop),
            records: run.records,
            perturbation: None,
        })
    }

    /// A pair of eigenvalues closer than `1e-10 |A|`, if any.
    fn repeated(&self) -> Option<Complex64> {
        let (i, j, d) = voronoi::closest_sites(&self.spectrum)?;
        (d <= 1e-10 * self.norm.max(f64::MIN_POSITIVE)).then(|| 0.5 * (self.spectrum[i] + self.spectrum[j]))
    }
}

/// Local iteration between the eigenvalues `l1` and `l2` of `a`.
pub fn wilkinson_local(
    a: &ComplexMatrix,
    l1: Complex64,
    l2: Complex64,
    opts: &WilkinsonOptions,
) -> Result<WilkinsonResult> {
    let setup = Setup::new(a)?;
    let mut res = setup.run(l1, l2, opts)?;
    if opts.perturbation {
        res.perturbation = Some(nearest_defective_perturbation(a, res.coalescence_point)?);
    }
    Ok(res)
}

/// Voronoi pair choice for `a`.
pub fn voronoi_heuristic(a: &ComplexMatrix) -> Result<VoronoiChoice> {
    let setup = Setup::new(a)?;
    if let Some(eigenvalue) = setup.repeated() {
        return Err(Error::DegenerateSpectrum { eigenvalue });
    }
    voronoi_choice(&setup.profile, &setup.spectrum, &setup.region.bounding_box())
}

/// Estimate of the distance from `a` to the nearest matrix with a repeated
/// eigenvalue. This is a local answer: it is the merge level of the pair
/// the heuristic picks, or with `exhaustive` the lowest over all pairs.
pub fn wilkinson_distance(a: &ComplexMatrix, opts: &WilkinsonOptions) -> Result<WilkinsonReport> {
    let setup = Setup::new(a)?;
    if let Some(z) = setup.repeated() {
        let best = WilkinsonResult {
            chosen_pair: (z, z),
            coalescence_point: z,
            epsilon_bar_estimate: 0.0,
            records: Vec::new(),
            converged: true,
            stop: None,
            perturbation: None,
        };
        return Ok(WilkinsonReport {
            spectrum: setup.spectrum,
            heuristic: None,
            heuristic_run: None,
            best,
            alternatives: Vec::new(),
        });
    }
    let choice = voronoi_choice(&setup.profile, &setup.spectrum, &setup.region.bounding_box())?;
    let heuristic_run = setup.run(choice.pair.0, choice.pair.1, opts)?;
    let mut best = heuristic_run.clone();

    let mut alternatives = Vec::new();
    if opts.exhaustive {
        let n = setup.spectrum.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let runs: Vec<(PairOutcome, Option<WilkinsonResult>)> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let pair = (setup.spectrum[i], setup.spectrum[j]);
                match setup.run(pair.0, pair.1, opts) {
                    Ok(r) => (
                        PairOutcome {
                            pair,
                            epsilon_bar: Some(r.epsilon_bar_estimate),
                            converged: r.converged,
                            error: None,
                        },
                        Some(r),
                    ),
                    Err(e) => {
                        (PairOutcome { pair, epsilon_bar: None, converged: false, error: Some(e.to_string()) }, None)
                    }
                }
            })
            .collect();
        for (outcome, run) in runs {
            if let Some(r) = run {
                let better = r.converged && (!best.converged || r.epsilon_bar_estimate < best.epsilon_bar_estimate);
                if better {
                    best = r;
                }
            }
            alternatives.push(outcome);
        }
    }
    if opts.perturbation {
        best.perturbation = Some(nearest_defective_perturbation(a, best.coalescence_point)?);
    }
    Ok(WilkinsonReport {
        spectrum: setup.spectrum,
        heuristic: Some(choice),
        heuristic_run: Some(heuristic_run),
        best,
        alternatives,
    })
}

/// Rank-one `E = -sigma u v^H` built from the smallest singular triplet of
/// `A - zI`, so that `z` is an eigenvalue of `A + E` and `|E|_2 = sigma`.
pub fn nearest_defective_perturbation(a: &ComplexMatrix, z: Complex64) -> Result<Perturbation> {
    let t = smallest_singular_triplet(&a.shifted(z))?;
    let n = a.n();
    let e = if t.sigma == 0.0 { DMatrix::zeros(n, n) } else { (&t.u * t.v.adjoint()) * Complex64::new(-t.sigma, 0.0) };
    let e = ComplexMatrix::new(e)?;
    let sum = ComplexMatrix::new(a.as_matrix() + e.as_matrix())?;
    let residual = SigmaMinField::new(sum).at(z);
    let warning = (t.gap < 1e-10).then(|| {
        format!("smallest singular value is not simple (gap {:e}); the singular vectors are ill-conditioned", t.gap)
    });
    Ok(Perturbation { norm: e.norm2()?, matrix: e, residual, singular_gap: t.gap, warning })
}

#[derive(Debug, Clone, Serialize)]
pub struct PseudospectrumGrid {
    pub lower: (f64, f64),
    pub upper: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    /// Row-major in `y`: `values[j * nx + i]` is the node `(x_i, y_j)`.
    pub values: Vec<f64>,
}

impl PseudospectrumGrid {
    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        let x = self.lower.0 + (self.upper.0 - self.lower.0) * i as f64 / (self.nx - 1) as f64;
        let y = self.lower.1 + (self.upper.1 - self.lower.1) * j as f64 / (self.ny - 1) as f64;
        (x, y)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// `sigma_min(A - zI)` on an `nx` by `ny` lattice of nodes spanning the box
/// `[x0, x1] x [y0, y1]`, corners included.
pub fn pseudospectrum_grid(a: &ComplexMatrix, bbox: [f64; 4], nx: usize, ny: usize) -> Result<PseudospectrumGrid> {
    let [x0, y0, x1, y1] = bbox;
    if nx < 2 || ny < 2 {
        return Err(Error::invalid("grid needs at least two nodes per side"));
    }
    if !(bbox.iter().all(|v| v.is_finite()) && x0 < x1 && y0 < y1) {
        return Err(Error::invalid(format!("invalid box {bbox:?}")));
    }
    let mut grid = PseudospectrumGrid { lower: (x0, y0), upper: (x1, y1), nx, ny, values: Vec::new() };
    let field = SigmaMinField::new(a.clone());
    let rows: Vec<Vec<f64>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            (0..nx)
                .map(|i| {
                    let (x, y) = grid.node(i, j);
                    field.at(Complex64::new(x, y))
                })
                .collect()
        })
        .collect();
    grid.values = rows.concat();
    if grid.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("SVD failed at a grid node".into()));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag02() -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&[c(0.0, 0.0), c(2.0, 0.0)]).unwrap()
    }

    #[test]
    fn normal_pair_merges_halfway() {
        let r = wilkinson_local(&diag02(), c(0.0, 0.0), c(2.0, 0.0), &WilkinsonOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.epsilon_bar_estimate - 1.0).abs() <= 1e-9);
        assert!((r.coalescence_point - c(1.0, 0.0)).norm() <= 1e-9);
    }

    #[test]
    fn rejects_non_eigenvalues() {
        let e = wilkinson_local(&diag02(), c(0.5, 0.0), c(2.0, 0.0), &WilkinsonOptions::default());
        assert!(matches!(e, Err(Error::InvalidArgument(_))));
        let e = wilkinson_local(&diag02(), c(2.0, 0.0), c(2.0, 0.0), &WilkinsonOptions::default());
        assert!(matches!(e, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn repeated_eigenvalue_gives_zero_distance() {
        let a = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
        let r = wilkinson_distance(&a, &WilkinsonOptions::default()).unwrap();
        assert_eq!(r.best.epsilon_bar_estimate, 0.0);
        assert!((r.best.coalescence_point - c(1.0, 0.0)).norm() < 1e-7);
        assert!(matches!(voronoi_heuristic(&a), Err(Error::DegenerateSpectrum { .. })));
    }

    #[test]
    fn perturbation_of_normal_matrix() {
        let p = nearest_defective_perturbation(&diag02(), c(1.0, 0.0)).unwrap();
        assert!((p.norm - 1.0).abs() <= 1e-12);
        assert!(p.residual <= 1e-12);
        // both singular values of A - I equal 1, so the vectors are not unique
        assert!(p.warning.is_some());
        let z = nearest_defective_perturbation(&diag02(), c(2.0, 0.0)).unwrap();
        assert_eq!(z.norm, 0.0);
    }

    #[test]
    fn scalar_grid_is_distance_to_zero() {
        let a = ComplexMatrix::from_diagonal(&[c(0.0, 0.0)]).unwrap();
        let g = pseudospectrum_grid(&a, [-1.0, -1.0, 1.0, 1.0], 3, 3).unwrap();
        assert_eq!(g.value(1, 1), 0.0);
        assert_eq!(g.value(2, 1), 1.0);
        assert_eq!(g.node(2, 1), (1.0, 0.0));
        assert!(pseudospectrum_grid(&a, [1.0, -1.0, -1.0, 1.0], 3, 3).is_err());
        assert!(pseudospectrum_grid(&a, [-1.0, -1.0, 1.0, 1.0], 1, 3).is_err());
    }
}
