use super::{make_quadratic_field, Point, Region, ScalarField};

/// A named field with a search region and two endpoints in separate valleys.
#[derive(Debug, Clone)]
pub struct TestProblem {
    pub name: &'static str,
    pub description: &'static str,
    pub field: ScalarField,
    pub region: Region,
    pub endpoints: (Point, Point),
    pub known_saddle: Option<(Point, f64)>,
}

fn boxed(lower: &[f64], upper: &[f64]) -> Region {
    Region::cube(lower.to_vec(), upper.to_vec()).expect("catalog boxes are well formed")
}

fn plateau(x: f64) -> f64 {
    if x <= -1.0 {
        x
    } else if x >= 1.0 {
        -x
    } else {
        -1.0
    }
}

pub fn builtin_problems() -> Vec<TestProblem> {
    vec![
        TestProblem {
            name: "quadratic-saddle",
            description: "x1^2 - x2^2, nondegenerate saddle at the origin",
            field: make_quadratic_field(&[1.0, -1.0]).unwrap(),
            region: boxed(&[-2.0, -2.0], &[2.0, 2.0]),
            endpoints: (vec![0.0, -1.0], vec![0.0, 1.0]),
            known_saddle: Some((vec![0.0, 0.0], 0.0)),
        },
        TestProblem {
            name: "perturbed-quadratic",
            description: "x1^2 - x2^2 + 0.1 x1^3 + 0.05 x2^4, saddle at the origin",
            field: ScalarField::with_gradient(
                2,
                |x| x[0] * x[0] - x[1] * x[1] + 0.1 * x[0].powi(3) + 0.05 * x[1].powi(4),
                |x| vec![2.0 * x[0] + 0.3 * x[0] * x[0], -2.0 * x[1] + 0.2 * x[1].powi(3)],
            ),
            region: boxed(&[-1.5, -1.5], &[1.5, 1.5]),
            endpoints: (vec![0.3, -1.0], vec![-0.2, 1.1]),
            known_saddle: Some((vec![0.0, 0.0], 0.0)),
        },
        TestProblem {
            name: "quadratic-3d",
            description: "2 x1^2 + 3 x2^2 - x3^2, index-one saddle in three dimensions",
            field: make_quadratic_field(&[2.0, 3.0, -1.0]).unwrap(),
            region: boxed(&[-2.0; 3], &[2.0; 3]),
            endpoints: (vec![0.0, 0.0, -1.0], vec![0.0, 0.0, 1.0]),
            known_saddle: Some((vec![0.0; 3], 0.0)),
        },
        TestProblem {
            name: "ps-fail-a",
            description: "exp(-x) - y^2, the two valleys approach each other only at infinity",
            field: ScalarField::with_gradient(
                2,
                |p| (-p[0]).exp() - p[1] * p[1],
                |p| vec![-(-p[0]).exp(), -2.0 * p[1]],
            ),
            region: boxed(&[0.0, -2.0], &[10.0, 2.0]),
            endpoints: (vec![1.0, -1.0], vec![1.0, 1.0]),
            known_saddle: None,
        },
        TestProblem {
            name: "ps-fail-b",
            description: "exp(-2x) - y^2 exp(-x), closest pairs drift off to infinity",
            field: ScalarField::with_gradient(
                2,
                |p| (-2.0 * p[0]).exp() - p[1] * p[1] * (-p[0]).exp(),
                |p| {
                    let e = (-p[0]).exp();
                    vec![-2.0 * e * e + p[1] * p[1] * e, -2.0 * p[1] * e]
                },
            ),
            region: boxed(&[0.0, -2.0], &[10.0, 2.0]),
            endpoints: (vec![1.0, -1.0], vec![1.0, 1.0]),
            known_saddle: None,
        },
        TestProblem {
            name: "plateau",
            description: "piecewise linear on the line with a flat top on [-1, 1]",
            field: ScalarField::nonsmooth(1, |x| plateau(x[0])),
            region: boxed(&[-3.0], &[3.0]),
            endpoints: (vec![-2.0], vec![2.0]),
            known_saddle: None,
        },
        TestProblem {
            name: "double-well-curve",
            description: "(x2 - x1^2)(x1 - x2^2), two negative lobes touching at (0,0) and (1,1)",
            field: ScalarField::with_gradient(
                2,
                |x| (x[1] - x[0] * x[0]) * (x[0] - x[1] * x[1]),
                |x| {
                    let u = x[1] - x[0] * x[0];
                    let w = x[0] - x[1] * x[1];
                    vec![-2.0 * x[0] * w + u, w - 2.0 * x[1] * u]
                },
            ),
            region: boxed(&[-0.5, -0.5], &[1.5, 1.5]),
            endpoints: (vec![0.5, 0.1], vec![0.1, 0.5]),
            known_saddle: Some((vec![0.0, 0.0], 0.0)),
        },
        TestProblem {
            name: "sqrt-cusp",
            description: "-sqrt|x| on the line, a nonsmooth pass at 0",
            field: ScalarField::nonsmooth(1, |x| -x[0].abs().sqrt()),
            region: boxed(&[-2.0], &[2.0]),
            endpoints: (vec![-1.0], vec![1.0]),
            known_saddle: Some((vec![0.0], 0.0)),
        },
        TestProblem {
            name: "sqrt-cusp-2d",
            description: "-sqrt|x| + y^2, the cusp embedded in the plane",
            field: ScalarField::nonsmooth(2, |p| -p[0].abs().sqrt() + p[1] * p[1]),
            region: boxed(&[-2.0, -1.0], &[2.0, 1.0]),
            endpoints: (vec![-1.0, 0.0], vec![1.0, 0.0]),
            known_saddle: Some((vec![0.0, 0.0], 0.0)),
        },
    ]
}

pub fn find_problem(name: &str) -> Option<TestProblem> {
    builtin_problems().into_iter().find(|p| p.name == name)
}
