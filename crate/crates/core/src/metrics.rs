//! Front indicators: normalization, exact 3D hypervolume and coverage.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Point = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationBounds {
    pub min: Point,
    pub max: Point,
}

impl NormalizationBounds {
    /// Bounds over every point of every front; `None` if there are no points.
    pub fn of(fronts: &[Vec<Point>]) -> Option<Self> {
        let mut it = fronts.iter().flatten();
        let first = *it.next()?;
        let (mut min, mut max) = (first, first);
        for p in it {
            for i in 0..3 {
                min[i] = min[i].min(p[i]);
                max[i] = max[i].max(p[i]);
            }
        }
        Some(Self { min, max })
    }

    /// Maps into `[0, 1]`; a constant objective maps to 0.
    pub fn apply(&self, p: &Point) -> Point {
        let mut out = [0.0; 3];
        for i in 0..3 {
            let span = self.max[i] - self.min[i];
            out[i] = if span > 0.0 { (p[i] - self.min[i]) / span } else { 0.0 };
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no points to normalize")]
    NoPoints,
    #[error("coverage of an empty front is undefined")]
    EmptyFront,
}

/// Normalizes every front with bounds taken over their union.
pub fn normalize(fronts: &[Vec<Point>]) -> Result<(Vec<Vec<Point>>, NormalizationBounds), MetricsError> {
    let bounds = NormalizationBounds::of(fronts).ok_or(MetricsError::NoPoints)?;
    let out = fronts
        .iter()
        .map(|f| f.iter().map(|p| bounds.apply(p)).collect())
        .collect();
    Ok((out, bounds))
}

/// Area dominated by 2D points inside `[.., rx] x [.., ry]`.
fn area_2d(points: &mut [(f64, f64)], rx: f64, ry: f64) -> f64 {
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut best_y = ry;
    for (i, &(x, y)) in points.iter().enumerate() {
        best_y = best_y.min(y);
        let next_x = points.get(i + 1).map_or(rx, |p| p.0);
        area += (next_x - x) * (ry - best_y);
    }
    area
}

/// Exact volume of the union of boxes `[p, reference]`, by sweeping the
/// third objective and summing 2D slabs. Points not strictly better than
/// the reference in every objective contribute nothing.
pub fn hypervolume(front: &[Point], reference: Point) -> f64 {
    let mut pts: Vec<Point> = front
        .iter()
        .copied()
        .filter(|p| (0..3).all(|i| p[i] < reference[i]))
        .collect();
    pts.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut volume = 0.0;
    let mut slice: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    let mut i = 0;
    while i < pts.len() {
        let z = pts[i][2];
        while i < pts.len() && pts[i][2] == z {
            slice.push((pts[i][0], pts[i][1]));
            i += 1;
        }
        let next_z = pts.get(i).map_or(reference[2], |p| p[2]);
        volume += area_2d(&mut slice, reference[0], reference[1]) * (next_z - z);
    }
    volume
}

/// `a` is no worse everywhere and strictly better somewhere.
pub fn pareto_dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        strict |= x < y;
    }
    strict
}

/// Fraction of `b` dominated by at least one member of `a`.
pub fn coverage(a: &[Point], b: &[Point]) -> Result<f64, MetricsError> {
    if b.is_empty() {
        return Err(MetricsError::EmptyFront);
    }
    let covered = b.iter().filter(|q| a.iter().any(|p| pareto_dominates(p, *q))).count();
    Ok(covered as f64 / b.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normalize_examples() {
        let (n, b) = normalize(&[vec![[5.0, 1.0, 2.0], [10.0, 1.0, 4.0]]]).unwrap();
        assert_eq!(n[0], vec![[0.0, 0.0, 0.0], [1.0, 0.0, 1.0]]);
        assert_eq!(b.min, [5.0, 1.0, 2.0]);
        assert_eq!(normalize(&[vec![]]), Err(MetricsError::NoPoints));
    }

    #[test]
    fn hypervolume_examples() {
        let r = [1.0; 3];
        assert_abs_diff_eq!(hypervolume(&[[0.5; 3]], r), 0.125, epsilon = 1e-12);
        let two = [[0.2, 0.8, 0.8], [0.8, 0.2, 0.8]];
        assert_abs_diff_eq!(hypervolume(&two, r), 0.056, epsilon = 1e-12);
        assert_eq!(hypervolume(&[], r), 0.0);
        assert_eq!(hypervolume(&[[1.0, 0.0, 0.0]], r), 0.0);
        assert_abs_diff_eq!(hypervolume(&[[0.0; 3]], r), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn coverage_examples() {
        let a = [[0.0; 3]];
        let b = [[1.0; 3], [0.0; 3]];
        assert_eq!(coverage(&a, &b), Ok(0.5));
        assert_eq!(coverage(&b, &b), Ok(0.5));
        assert_eq!(coverage(&a, &[]), Err(MetricsError::EmptyFront));
        let front = [[0.0, 1.0, 0.5], [1.0, 0.0, 0.5]];
        assert_eq!(coverage(&front, &front), Ok(0.0));
    }
}
