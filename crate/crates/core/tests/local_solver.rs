use levelpass::local::{assemble_local_path, run_local, LocalOptions, LocalRun, StopReason};
use levelpass::vecops::{dist, lerp, norm};
use levelpass::{builtin_problems, find_problem, Region, ScalarField};
use proptest::prelude::*;

/// x1^2 - x2^2 + 0.1 x1^3 + 0.05 x2^4 + c x1^2 x2 + e x1 x2^2, with its
/// gradient and Hessian written out by hand.
#[derive(Clone, Copy)]
struct Cubic {
    c: f64,
    e: f64,
}

impl Cubic {
    fn value(&self, x: &[f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        a * a - b * b + 0.1 * a.powi(3) + 0.05 * b.powi(4) + self.c * a * a * b + self.e * a * b * b
    }

    fn grad(&self, x: &[f64]) -> [f64; 2] {
        let (a, b) = (x[0], x[1]);
        [
            2.0 * a + 0.3 * a * a + 2.0 * self.c * a * b + self.e * b * b,
            -2.0 * b + 0.2 * b.powi(3) + self.c * a * a + 2.0 * self.e * a * b,
        ]
    }

    fn hess(&self, x: &[f64]) -> [[f64; 2]; 2] {
        let (a, b) = (x[0], x[1]);
        let off = 2.0 * self.c * a + 2.0 * self.e * b;
        [[2.0 + 0.6 * a + 2.0 * self.c * b, off], [off, -2.0 + 0.6 * b * b + 2.0 * self.e * a]]
    }

    fn field(self) -> ScalarField {
        ScalarField::from_fn(2, move |x: &[f64]| self.value(x))
    }

    /// Damped Newton on grad f = 0, merit |grad f|^2.
    fn saddle(&self, start: [f64; 2]) -> [f64; 2] {
        let mut x = start;
        for _ in 0..100 {
            let g = self.grad(&x);
            let gn = g[0].hypot(g[1]);
            if gn < 1e-15 {
                break;
            }
            let h = self.hess(&x);
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            let step = [-(h[1][1] * g[0] - h[0][1] * g[1]) / det, -(h[0][0] * g[1] - h[1][0] * g[0]) / det];
            let mut t = 1.0;
            loop {
                let cand = [x[0] + t * step[0], x[1] + t * step[1]];
                let gc = self.grad(&cand);
                if gc[0].hypot(gc[1]) < (1.0 - 1e-4 * t) * gn || t < 1e-10 {
                    x = cand;
                    break;
                }
                t *= 0.5;
            }
        }
        x
    }
}

fn suite() -> Vec<(Cubic, [f64; 2], [f64; 2])> {
    vec![
        (Cubic { c: 0.0, e: 0.0 }, [0.3, -1.0], [-0.2, 1.1]),
        (Cubic { c: 0.3, e: 0.2 }, [0.3, -1.0], [-0.2, 1.1]),
        (Cubic { c: 0.5, e: 0.2 }, [-0.4, -0.9], [0.1, 1.0]),
        (Cubic { c: 1.0, e: 0.2 }, [0.2, -1.0], [0.3, 0.9]),
        (Cubic { c: 0.0, e: -0.3 }, [0.0, -1.0], [0.4, 1.0]),
    ]
}

fn square() -> Region {
    Region::cube(vec![-1.5, -1.5], vec![1.5, 1.5]).unwrap()
}

// Segment checks accept f <= cap + 1e-12 (1 + |cap|), so the bracket on the
// pass value holds to that tolerance.
fn check_invariants(field: &ScalarField, run: &LocalRun) {
    for r in &run.records {
        let (fx, fy) = (field.eval(&r.x), field.eval(&r.y));
        assert!((fx - fy).abs() <= 1e-10 * (1.0 + fx.abs()), "f(x) = {fx}, f(y) = {fy}");
        assert!(r.f_x <= r.f_z + 1e-12 * (1.0 + r.f_x.abs()));
        assert!(r.f_z <= r.m + 1e-12 * (1.0 + r.m.abs()));
    }
    for w in run.records.windows(2) {
        assert!(w[1].f_x >= w[0].f_x - 1e-14 * (1.0 + w[0].f_x.abs()));
        assert!(w[1].dist <= w[0].dist + 1e-12);
    }
}

#[test]
fn quadratics_reach_the_saddle_in_one_step() {
    for name in ["quadratic-saddle", "quadratic-3d"] {
        let p = find_problem(name).unwrap();
        let run = run_local(&p.field, &p.region, &p.endpoints.0, &p.endpoints.1, &LocalOptions::default()).unwrap();
        assert!(run.converged);
        assert!(norm(&run.records[0].z) <= 1e-12, "{name}: {:?}", run.records[0].z);
        assert_eq!(run.records.len(), 2);
    }
}

#[test]
fn catalog_runs_bracket_the_known_saddle_value() {
    for p in builtin_problems() {
        let Some((_, v)) = p.known_saddle else { continue };
        let run = match run_local(&p.field, &p.region, &p.endpoints.0, &p.endpoints.1, &LocalOptions::default()) {
            Ok(r) => r,
            Err(e) => panic!("{}: {e}", p.name),
        };
        assert!(run.converged, "{}", p.name);
        check_invariants(&p.field, &run);
        for r in &run.records[1..] {
            assert!(r.f_z <= v + 1e-12 && v <= r.m + 1e-12, "{}: {} {} {}", p.name, r.f_z, v, r.m);
        }
        assert!((run.critical_value() - v).abs() <= 1e-9, "{}", p.name);
    }
}

#[test]
fn one_of_the_points_lands_on_the_bisector_minimizer() {
    for (f, x0, y0) in suite() {
        let field = f.field();
        let run = run_local(&field, &square(), &x0, &y0, &LocalOptions::default()).unwrap();
        assert!(run.converged);
        check_invariants(&field, &run);
        for w in run.records.windows(2) {
            assert!(w[1].x == w[0].z || w[1].y == w[0].z, "iteration {}", w[0].i);
        }
    }
}

#[test]
fn closest_pair_iterates_converge_superlinearly() {
    for (f, x0, y0) in suite() {
        let field = f.field();
        let opts = LocalOptions { do_step_1a: true, ..Default::default() };
        let run = run_local(&field, &square(), &x0, &y0, &opts).unwrap();
        assert!(run.converged);
        let mid = lerp(&x0, &y0, 0.5);
        let sad = f.saddle([mid[0], mid[1]]);
        let errs: Vec<f64> = run.records.iter().map(|r| dist(&r.x, &sad)).collect();
        let ratios: Vec<f64> = errs.windows(2).take_while(|w| w[0] > 0.0).map(|w| w[1] / w[0]).collect();
        assert!(ratios.iter().take(5).any(|&r| r < 0.1), "{ratios:?}");
        for w in ratios.windows(2).rev().take(2) {
            assert!(w[1] < w[0], "{ratios:?}");
        }
        assert!(*errs.last().unwrap() <= 1e-9, "{errs:?}");
    }
}

#[test]
fn without_closest_pairs_values_still_converge() {
    let f = Cubic { c: 0.3, e: 0.2 };
    let field = f.field();
    let run = run_local(&field, &square(), &[0.3, -1.0], &[-0.2, 1.1], &LocalOptions::default()).unwrap();
    let v = f.value(&f.saddle([0.0, 0.0]));
    assert!(run.converged);
    assert!((run.critical_value() - v).abs() <= 1e-12);
    for r in &run.records {
        assert!(r.f_z <= v + 1e-12 && v <= r.m + 1e-12);
    }
}

#[test]
fn upper_bounds_overtake_lower_bounds() {
    let p = find_problem("perturbed-quadratic").unwrap();
    let run = run_local(&p.field, &p.region, &p.endpoints.0, &p.endpoints.1, &LocalOptions::default()).unwrap();
    let last_full = &run.records[run.records.len() - 2];
    assert!(last_full.m <= -last_full.f_x);
}

#[test]
fn path_stays_below_the_last_upper_bound() {
    for (f, x0, y0) in suite() {
        let field = f.field();
        let run = run_local(&field, &square(), &x0, &y0, &LocalOptions::default()).unwrap();
        let path = assemble_local_path(&field, &run.records).unwrap();
        let cap = run.last().m;
        assert!(path.max_value <= cap + 1e-10);
        for w in path.vertices.windows(2) {
            for k in 0..=10_000 {
                let p = lerp(&w[0], &w[1], k as f64 / 10_000.0);
                assert!(field.eval(&p) <= cap + 1e-10);
            }
        }
        assert_eq!(path.vertices.first().unwrap(), &run.records[0].x);
        assert_eq!(path.vertices.last().unwrap(), &run.records[0].y);
    }
}

#[test]
fn single_record_path_has_two_vertices_per_side() {
    let p = find_problem("quadratic-saddle").unwrap();
    let run = run_local(&p.field, &p.region, &p.endpoints.0, &p.endpoints.1, &LocalOptions::default()).unwrap();
    let path = assemble_local_path(&p.field, &run.records[..1]).unwrap();
    assert_eq!(path.vertices.len(), 2);
    let path = assemble_local_path(&p.field, &run.records).unwrap();
    assert_eq!(path.vertices.len(), 4);
    assert!(assemble_local_path(&p.field, &[]).is_err());
}

#[test]
fn iteration_cap_reports_not_converged() {
    let p = find_problem("perturbed-quadratic").unwrap();
    let opts = LocalOptions { max_iter: 2, ..Default::default() };
    let run = run_local(&p.field, &p.region, &p.endpoints.0, &p.endpoints.1, &opts).unwrap();
    assert!(!run.converged);
    assert_eq!(run.stop, StopReason::MaxIterations);
    assert_eq!(run.records.len(), 2);
}

#[test]
fn rejects_bad_options_and_endpoints() {
    let p = find_problem("quadratic-saddle").unwrap();
    let bad = LocalOptions { point_tol: 0.0, ..Default::default() };
    assert!(run_local(&p.field, &p.region, &p.endpoints.0, &p.endpoints.1, &bad).is_err());
    assert!(run_local(&p.field, &p.region, &[0.0, 5.0], &p.endpoints.1, &LocalOptions::default()).is_err());
    assert!(run_local(&p.field, &p.region, &[0.0], &p.endpoints.1, &LocalOptions::default()).is_err());
}

#[test]
fn missing_minimizer_is_reported_as_boundary_hit() {
    let p = find_problem("ps-fail-a").unwrap();
    let err = run_local(&p.field, &p.region, &p.endpoints.0, &p.endpoints.1, &LocalOptions::default()).unwrap_err();
    assert!(matches!(err, levelpass::Error::BoundaryHit { .. }), "{err}");
}

#[test]
fn concurrent_runs_share_a_field() {
    let p = find_problem("perturbed-quadratic").unwrap();
    let serial = run_local(&p.field, &p.region, &p.endpoints.0, &p.endpoints.1, &LocalOptions::default()).unwrap();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..4)
            .map(|_| {
                s.spawn(|| {
                    run_local(&p.field, &p.region, &p.endpoints.0, &p.endpoints.1, &LocalOptions::default()).unwrap()
                })
            })
            .collect();
        for h in handles {
            let r = h.join().unwrap();
            assert_eq!(r.records.len(), serial.records.len());
            assert_eq!(r.critical_value(), serial.critical_value());
        }
    });
}

// Found by the property test below: the band above the cap near the
// bisector minimizer fell between two advance samples, so the pair collapsed
// onto z one step early with M about 1e-12 under the pass value.
#[test]
fn collapse_does_not_skip_the_band_above_the_cap() {
    let f = Cubic { c: 0.3, e: 0.2 };
    let field = f.field();
    let (x0, y0) = ([0.05842331626658634, -0.8778184021385179], [0.022738929768627573, 0.8981121219618033]);
    let run = run_local(&field, &square(), &x0, &y0, &LocalOptions::default()).unwrap();
    assert!(run.converged);
    check_invariants(&field, &run);
    let v = f.value(&f.saddle([0.0, 0.0]));
    for r in &run.records[1..] {
        assert!(r.f_z <= v + 1e-12 && v <= r.m + 1e-12, "{r:?}");
    }
}

// Also from the property test: an advance that stopped inside the tolerance
// band above the cap left f(x) above the level, and the next lower bound
// dropped below it.
#[test]
fn advanced_points_stay_at_or_below_the_cap() {
    let f = Cubic { c: 0.3, e: 0.2 };
    let field = f.field();
    let (x0, y0) = ([0.2957169612719083, -0.8465778282258891], [-0.24076463034712178, 0.7405022796559355]);
    let run = run_local(&field, &square(), &x0, &y0, &LocalOptions::default()).unwrap();
    assert!(run.converged);
    check_invariants(&field, &run);
    for w in run.records.windows(2) {
        assert!(w[1].f_x <= w[0].f_z, "{:?}", w[1]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn invariants_hold_from_random_starts(
        a in -0.3f64..0.3, b in -1.3f64..-0.7, c in -0.3f64..0.3, d in 0.7f64..1.3,
    ) {
        let f = Cubic { c: 0.3, e: 0.2 };
        let field = f.field();
        let run = run_local(&field, &square(), &[a, b], &[c, d], &LocalOptions::default()).unwrap();
        prop_assert!(run.converged);
        check_invariants(&field, &run);
        let v = f.value(&f.saddle([0.0, 0.0]));
        for r in &run.records[1..] {
            prop_assert!(r.f_z <= v + 1e-12 && v <= r.m + 1e-12);
        }
    }
}
