//! Matrix files and the built-in test matrices.
//!
//! Text form: first line `n`, then `n` rows holding either `n` complex
//! tokens (`0.5-0.25j`, `1.5`, `2i`) or `2n` numbers read as `re im` pairs.
//! JSON form: `{"n": 2, "re": [[..], [..]], "im": [[..], [..]]}`.

use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

#[derive(Deserialize)]
struct JsonMatrix {
    n: usize,
    re: Vec<Vec<f64>>,
    im: Option<Vec<Vec<f64>>>,
}

fn complex_token(tok: &str) -> Result<Complex64> {
    // num-complex reads `i` as the imaginary unit; accept `j` too
    let t = tok.replace(['j', 'J'], "i");
    Complex64::from_str(&t).map_err(|_| Error::Parse(format!("bad complex entry {tok:?}")))
}

fn parse_json(text: &str) -> Result<ComplexMatrix> {
    let m: JsonMatrix = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let im = m.im.unwrap_or_else(|| vec![vec![0.0; m.n]; m.n]);
    if m.re.len() != m.n || im.len() != m.n || m.re.iter().chain(&im).any(|r| r.len() != m.n) {
        return Err(Error::Parse(format!("expected {n}x{n} arrays for re and im", n = m.n)));
    }
    let rows: Vec<Vec<Complex64>> =
        (0..m.n).map(|i| (0..m.n).map(|j| Complex64::new(m.re[i][j], im[i][j])).collect()).collect();
    ComplexMatrix::from_rows(&rows)
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let text = text.trim_start_matches('\u{feff}').trim();
    if text.starts_with('{') {
        return parse_json(text);
    }
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let n: usize =
        header.parse().map_err(|_| Error::Parse(format!("first line must be the dimension, got {header:?}")))?;
    if n == 0 {
        return Err(Error::Parse("dimension must be positive".into()));
    }
    let rows: Vec<&str> = lines.collect();
    if rows.len() != n {
        return Err(Error::Parse(format!("expected {n} rows, found {}", rows.len())));
    }
    let mut out = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        let toks: Vec<&str> = row.split_whitespace().collect();
        let entries = if toks.len() == n {
            toks.iter().map(|t| complex_token(t)).collect::<Result<Vec<_>>>()?
        } else if toks.len() == 2 * n {
            let nums = toks
                .iter()
                .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {t:?} in row {}", i + 1))))
                .collect::<Result<Vec<_>>>()?;
            nums.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect()
        } else {
            return Err(Error::Parse(format!("row {} has {} entries, expected {n} or {}", i + 1, toks.len(), 2 * n)));
        };
        out.push(entries);
    }
    ComplexMatrix::from_rows(&out)
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn bidiagonal(diag: &[Complex64], sup: &[Complex64]) -> ComplexMatrix {
    let n = diag.len();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match j {
                    _ if j == i => diag[i],
                    _ if j == i + 1 => sup[i],
                    _ => c(0.0, 0.0),
                })
                .collect()
        })
        .collect();
    ComplexMatrix::from_rows(&rows).expect("built-in matrices are valid")
}

/// 5x5 upper bidiagonal matrix whose pseudospectral components around
/// `.461+.650i` and `.451+.553i` merge first.
pub fn bidiagonal_5() -> ComplexMatrix {
    bidiagonal(
        &[c(0.461, 0.650), c(0.457, 0.983), c(0.451, 0.553), c(0.412, 0.400), c(0.902, 0.199)],
        &[c(0.006, 0.625), c(0.297, 0.733), c(0.049, 0.376), c(0.693, 0.010)],
    )
}

/// 10x10 upper bidiagonal matrix on which the Voronoi edge heuristic picks
/// the wrong pair.
pub fn bidiagonal_10() -> ComplexMatrix {
    bidiagonal(
        &[
            c(0.9850, 0.7550),
            c(0.8030, 0.7810),
            c(0.2590, 0.5110),
            c(0.3840, 0.5310),
            c(0.0080, 0.5360),
            c(0.9780, 0.2720),
            c(0.7190, 0.3100),
            c(0.5560, 0.8370),
            c(0.6350, 0.7630),
            c(0.5110, 0.8870),
        ],
        &[
            c(0.5330, 0.5330),
            c(0.9370, 0.1190),
            c(0.7410, 0.8340),
            c(0.7480, 0.8870),
            c(0.6880, 0.6700),
            c(0.2510, 0.7430),
            c(0.9540, 0.6590),
            c(0.2680, 0.6610),
            c(0.2670, 0.4340),
        ],
    )
}

pub const BUILTIN_MATRICES: [(&str, &str); 3] = [
    ("bidiagonal-5", "5x5 bidiagonal, components near .461+.650i and .451+.553i merge first"),
    ("bidiagonal-10", "10x10 bidiagonal where the Voronoi heuristic picks the wrong pair"),
    ("diag-0-2", "diag(0, 2): normal, distance 1 at z = 1"),
];

pub fn builtin_matrix(name: &str) -> Option<ComplexMatrix> {
    match name {
        "bidiagonal-5" => Some(bidiagonal_5()),
        "bidiagonal-10" => Some(bidiagonal_10()),
        "diag-0-2" => Some(ComplexMatrix::from_diagonal(&[c(0.0, 0.0), c(2.0, 0.0)]).unwrap()),
        _ => None,
    }
}
