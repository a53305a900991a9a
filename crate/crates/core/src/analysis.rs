//! Pareto-set utilities and front statistics: dominance filtering,
//! ideal/nadir points, exact hypervolume for up to three objectives and
//! per-objective median/IQR.

use num_rational::Ratio;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("points have different dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("empty point set")]
    Empty,
    #[error("point {0:?} does not strictly dominate the reference {1:?}")]
    NotDominating(Vec<i64>, Vec<i64>),
    #[error("hypervolume supports 1 to 3 objectives, got {0}")]
    UnsupportedDimension(usize),
}

fn dimension(points: &[Vec<i64>]) -> Result<usize, AnalysisError> {
    let d = points.first().map_or(0, Vec::len);
    for p in points {
        if p.len() != d {
            return Err(AnalysisError::DimensionMismatch(d, p.len()));
        }
    }
    Ok(d)
}

/// `a` weakly dominates `b`: no worse anywhere.
pub fn weakly_dominates(a: &[i64], b: &[i64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Nondominated subset, sorted, duplicates collapsed.
pub fn pareto_filter(points: &[Vec<i64>]) -> Result<Vec<Vec<i64>>, AnalysisError> {
    dimension(points)?;
    let mut sorted = points.to_vec();
    sorted.sort();
    sorted.dedup();
    // Lexicographic order: a dominator always precedes what it dominates.
    let mut kept: Vec<Vec<i64>> = Vec::new();
    for p in sorted {
        if !kept.iter().any(|q| weakly_dominates(q, &p)) {
            kept.push(p);
        }
    }
    Ok(kept)
}

/// Componentwise minimum and maximum over the nondominated points.
pub fn ideal_nadir(points: &[Vec<i64>]) -> Result<(Vec<i64>, Vec<i64>), AnalysisError> {
    let front = pareto_filter(points)?;
    let first = front.first().ok_or(AnalysisError::Empty)?;
    let mut ideal = first.clone();
    let mut nadir = first.clone();
    for p in &front[1..] {
        for k in 0..p.len() {
            ideal[k] = ideal[k].min(p[k]);
            nadir[k] = nadir[k].max(p[k]);
        }
    }
    Ok((ideal, nadir))
}

/// Exact volume of the union of the boxes `[p, reference]`.
pub fn hypervolume(points: &[Vec<i64>], reference: &[i64]) -> Result<i128, AnalysisError> {
    dimension(points)?;
    for p in points {
        if p.len() != reference.len() {
            return Err(AnalysisError::DimensionMismatch(reference.len(), p.len()));
        }
        if !p.iter().zip(reference).all(|(x, r)| x < r) {
            return Err(AnalysisError::NotDominating(p.clone(), reference.to_vec()));
        }
    }
    if points.is_empty() {
        return Ok(0);
    }
    let front = pareto_filter(points)?;
    match reference.len() {
        1 => Ok(i128::from(reference[0] - front[0][0])),
        2 => Ok(hv2(front.iter().map(|p| (p[0], p[1])).collect(), reference[0], reference[1])),
        3 => Ok(hv3(&front, reference)),
        d => Err(AnalysisError::UnsupportedDimension(d)),
    }
}

/// Sweep along the first axis over 2-D points.
fn hv2(mut pts: Vec<(i64, i64)>, r0: i64, r1: i64) -> i128 {
    pts.sort();
    let mut area = 0i128;
    let mut best_y = r1;
    for (k, &(x, y)) in pts.iter().enumerate() {
        best_y = best_y.min(y);
        let next_x = pts.get(k + 1).map_or(r0, |p| p.0);
        area += i128::from(next_x - x) * i128::from(r1 - best_y);
    }
    area
}

/// Slices along the third axis; each slab is a 2-D problem.
fn hv3(front: &[Vec<i64>], reference: &[i64]) -> i128 {
    let mut levels: Vec<i64> = front.iter().map(|p| p[2]).collect();
    levels.sort_unstable();
    levels.dedup();
    let mut vol = 0i128;
    for (k, &z) in levels.iter().enumerate() {
        let next = levels.get(k + 1).copied().unwrap_or(reference[2]);
        let slab: Vec<(i64, i64)> = front.iter().filter(|p| p[2] <= z).map(|p| (p[0], p[1])).collect();
        vol += hv2(slab, reference[0], reference[1]) * i128::from(next - z);
    }
    vol
}

/// Hypervolume against `nadir + 1`, divided by the volume of the box
/// between the ideal point and that reference.
pub fn normalized_hv(points: &[Vec<i64>]) -> Result<Ratio<i128>, AnalysisError> {
    // Dominated points may lie beyond the nadir; they add no volume anyway.
    let front = pareto_filter(points)?;
    let (ideal, nadir) = ideal_nadir(&front)?;
    let reference: Vec<i64> = nadir.iter().map(|x| x + 1).collect();
    let hv = hypervolume(&front, &reference)?;
    let total: i128 = reference.iter().zip(&ideal).map(|(r, i)| i128::from(r - i)).product();
    Ok(Ratio::new(hv, total))
}

/// Quantile with linear interpolation between closest ranks.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Median and inter-quartile range of one coordinate.
pub fn median_iqr(values: &[i64]) -> Result<(f64, f64), AnalysisError> {
    if values.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let mut v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
    v.sort_by(f64::total_cmp);
    Ok((quantile(&v, 0.5), quantile(&v, 0.75) - quantile(&v, 0.25)))
}

/// `(median, iqr)` per coordinate.
pub fn objective_stats(points: &[Vec<i64>]) -> Result<Vec<(f64, f64)>, AnalysisError> {
    let d = dimension(points)?;
    if points.is_empty() {
        return Err(AnalysisError::Empty);
    }
    (0..d).map(|k| median_iqr(&points.iter().map(|p| p[k]).collect::<Vec<_>>())).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontStats {
    pub n_solutions: usize,
    pub reference: Vec<i64>,
    pub ideal: Vec<i64>,
    pub nadir: Vec<i64>,
    pub normalized_hv: Ratio<i128>,
    pub per_objective: Vec<(f64, f64)>,
}

impl FrontStats {
    pub fn normalized_hv_f64(&self) -> f64 {
        *self.normalized_hv.numer() as f64 / *self.normalized_hv.denom() as f64
    }
}

pub fn front_stats(points: &[Vec<i64>]) -> Result<FrontStats, AnalysisError> {
    let front = pareto_filter(points)?;
    let (ideal, nadir) = ideal_nadir(&front)?;
    Ok(FrontStats {
        n_solutions: front.len(),
        reference: nadir.iter().map(|x| x + 1).collect(),
        normalized_hv: normalized_hv(&front)?,
        per_objective: objective_stats(&front)?,
        ideal,
        nadir,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[i64]]) -> Vec<Vec<i64>> {
        v.iter().map(|p| p.to_vec()).collect()
    }

    #[test]
    fn filter_drops_dominated() {
        assert_eq!(pareto_filter(&pts(&[&[1, 2], &[2, 1], &[2, 2]])).unwrap(), pts(&[&[1, 2], &[2, 1]]));
        assert_eq!(pareto_filter(&pts(&[&[3, 3], &[3, 3]])).unwrap(), pts(&[&[3, 3]]));
        assert_eq!(pareto_filter(&pts(&[&[1, 2], &[1]])), Err(AnalysisError::DimensionMismatch(2, 1)));
    }

    #[test]
    fn ideal_and_nadir() {
        let (i, n) = ideal_nadir(&pts(&[&[2, 2], &[5, 1], &[6, 0]])).unwrap();
        assert_eq!((i, n), (vec![2, 0], vec![6, 2]));
        let (i, n) = ideal_nadir(&pts(&[&[4, 7]])).unwrap();
        assert_eq!((i, n), (vec![4, 7], vec![4, 7]));
        assert_eq!(ideal_nadir(&[]), Err(AnalysisError::Empty));
    }

    #[test]
    fn hypervolume_small() {
        assert_eq!(hypervolume(&pts(&[&[2, 2], &[5, 1], &[6, 0]]), &[7, 3]).unwrap(), 8);
        assert_eq!(hypervolume(&pts(&[&[2, 2]]), &[7, 3]).unwrap(), 5);
        assert!(matches!(hypervolume(&pts(&[&[7, 2]]), &[7, 3]), Err(AnalysisError::NotDominating(..))));
        // 4 + 2 minus the shared unit cube.
        assert_eq!(hypervolume(&pts(&[&[0, 0, 1], &[1, 1, 0]]), &[2, 2, 2]).unwrap(), 5);
    }

    #[test]
    fn normalized() {
        assert_eq!(normalized_hv(&pts(&[&[2, 2], &[5, 1], &[6, 0]])).unwrap(), Ratio::new(8, 15));
        assert_eq!(normalized_hv(&pts(&[&[3, 14]])).unwrap(), Ratio::from_integer(1));
    }

    #[test]
    fn median_and_iqr() {
        assert_eq!(median_iqr(&[2, 5, 6]).unwrap(), (5.0, 2.0));
        assert_eq!(median_iqr(&[0, 1, 2]).unwrap(), (1.0, 1.0));
        assert_eq!(median_iqr(&[9]).unwrap(), (9.0, 0.0));
        assert_eq!(median_iqr(&[2, 3]).unwrap(), (2.5, 0.5));
    }
}
