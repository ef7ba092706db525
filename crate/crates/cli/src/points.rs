//! Plain-text point files: a `d n` line, then `n` lines of `d` coordinates.
//! `#` starts a comment anywhere on a line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treecover_core::geometry::PointSet;

use crate::Failure;

pub fn parse_points(text: &str) -> Result<PointSet, Failure> {
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line, head) = rows.next().ok_or_else(|| Failure::invalid("points file is empty"))?;
    let head: Vec<&str> = head.split_whitespace().collect();
    let parse_count = |s: &str| s.parse::<usize>().ok();
    let (dim, n) = match head.as_slice() {
        [d, n] => match (parse_count(d), parse_count(n)) {
            (Some(d), Some(n)) if d > 0 => (d, n),
            _ => return Err(Failure::invalid(format!("line {line}: expected `d n` with d > 0"))),
        },
        _ => return Err(Failure::invalid(format!("line {line}: expected `d n`"))),
    };
    let mut coords = Vec::with_capacity(dim * n);
    let mut seen = 0usize;
    for (line, row) in rows {
        if seen == n {
            return Err(Failure::invalid(format!("line {line}: more than {n} points")));
        }
        let mut count = 0;
        for tok in row.split_whitespace() {
            let x: f64 = tok.parse().map_err(|_| Failure::invalid(format!("line {line}: bad coordinate {tok:?}")))?;
            if !x.is_finite() {
                return Err(Failure::invalid(format!("line {line}: non-finite coordinate")));
            }
            coords.push(x);
            count += 1;
        }
        if count != dim {
            return Err(Failure::invalid(format!("line {line}: expected {dim} coordinates, found {count}")));
        }
        seen += 1;
    }
    if seen != n {
        return Err(Failure::invalid(format!("header announces {n} points, found {seen}")));
    }
    if n == 0 {
        return Err(Failure::invalid("points file has no points"));
    }
    PointSet::new(dim, coords).map_err(|e| Failure::invalid(e.to_string()))
}

/// Inverse of [`parse_points`], with round-trip float formatting.
pub fn format_points(points: &PointSet) -> String {
    let mut out = format!("{} {}\n", points.dim(), points.len());
    for p in points.iter() {
        let row: Vec<String> = p.iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// `n` points uniform in the unit cube.
pub fn uniform_points(dim: usize, n: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<f64> = (0..dim * n).map(|_| rng.gen::<f64>()).collect();
    PointSet::new(dim, coords).expect("finite coordinates")
}
