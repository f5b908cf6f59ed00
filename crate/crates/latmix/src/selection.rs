//! Distance-based selection of recommendations and precision rounding.

use ndarray::Array2;

use crate::error::SelectionError;
use crate::matrix::SampleMatrix;
use crate::problem::ComponentBounds;

/// Euclidean distances between two row sets: entry `(i, j)` is the distance
/// between row `i` of `a` and row `j` of `b`.
pub fn distance_matrix(a: &SampleMatrix, b: &SampleMatrix) -> Result<Array2<f64>, SelectionError> {
    if a.n_cols() != b.n_cols() {
        return Err(SelectionError::DimensionMismatch {
            left: a.n_cols(),
            right: b.n_cols(),
        });
    }
    let mut out = Array2::zeros((a.n_rows(), b.n_rows()));
    for (i, ra) in a.rows().enumerate() {
        for (j, rb) in b.rows().enumerate() {
            let d2: f64 = ra
                .iter()
                .zip(rb.iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            out[[i, j]] = d2.sqrt();
        }
    }
    Ok(out)
}

/// Per-candidate distance diagnostics against a data set.
#[derive(Debug, Clone)]
pub struct DistanceReport {
    /// Min distance from each candidate to any data row.
    pub to_data_min: Vec<f64>,
    /// Mean distance from each candidate to the data rows.
    pub to_data_mean: Vec<f64>,
    /// Candidate-to-candidate distances; symmetric, zero diagonal.
    pub pairwise: Array2<f64>,
}

pub fn distance_report(
    candidates: &SampleMatrix,
    data: &SampleMatrix,
) -> Result<DistanceReport, SelectionError> {
    let to_data = distance_matrix(candidates, data)?;
    let n_data = data.n_rows();
    let (mut to_data_min, mut to_data_mean) = (Vec::new(), Vec::new());
    for i in 0..candidates.n_rows() {
        let row = to_data.row(i);
        to_data_min.push(row.iter().copied().fold(f64::INFINITY, f64::min));
        to_data_mean.push(if n_data == 0 {
            f64::INFINITY
        } else {
            row.sum() / n_data as f64
        });
    }
    Ok(DistanceReport {
        to_data_min,
        to_data_mean,
        pairwise: distance_matrix(candidates, candidates)?,
    })
}

/// Result of a farthest-point selection.
#[derive(Debug, Clone)]
pub struct FarthestSelection {
    pub rows: SampleMatrix,
    /// Picked candidate indices, in selection order.
    pub indices: Vec<usize>,
    /// Set when `min_mutual` exhausted the candidates before `k` picks.
    pub shortfall: Option<String>,
}

/// Greedy max-min selection: repeatedly pick the candidate with the largest
/// minimum distance to the data rows and the rows already selected. With
/// `min_mutual` set, candidates closer than that to any selected row are
/// skipped. Ties and the empty-reference first pick resolve to the lowest
/// index.
pub fn farthest_from_data(
    candidates: &SampleMatrix,
    data: &SampleMatrix,
    k: usize,
    min_mutual: Option<f64>,
) -> Result<FarthestSelection, SelectionError> {
    if k > candidates.n_rows() {
        return Err(SelectionError::NotEnoughCandidates {
            requested: k,
            available: candidates.n_rows(),
        });
    }
    if data.n_rows() > 0 && data.n_cols() != candidates.n_cols() {
        return Err(SelectionError::DimensionMismatch {
            left: candidates.n_cols(),
            right: data.n_cols(),
        });
    }

    let n = candidates.n_rows();
    // Min distance to data u selected; +inf when both are empty.
    let mut min_dist: Vec<f64> = (0..n)
        .map(|i| {
            data.rows()
                .map(|d| euclidean(candidates.row(i).as_slice().unwrap(), d.as_slice().unwrap()))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut excluded = vec![false; n];
    let mut picked = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<usize> = None;
        for i in 0..n {
            if excluded[i] {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => min_dist[i] > min_dist[b],
            };
            if better {
                best = Some(i);
            }
        }
        let Some(chosen) = best else { break };
        excluded[chosen] = true;
        picked.push(chosen);
        let chosen_row = candidates.row(chosen).to_vec();
        for i in 0..n {
            if excluded[i] {
                continue;
            }
            let d = euclidean(candidates.row(i).as_slice().unwrap(), &chosen_row);
            if let Some(mm) = min_mutual {
                if d < mm {
                    excluded[i] = true;
                    continue;
                }
            }
            if d < min_dist[i] {
                min_dist[i] = d;
            }
        }
    }

    let shortfall = (picked.len() < k).then(|| {
        format!(
            "selected {} of {k} requested rows; min_mutual excluded the rest",
            picked.len()
        )
    });
    Ok(FarthestSelection {
        rows: candidates.select_rows(&picked),
        indices: picked,
        shortfall,
    })
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Round each entry half-to-even at `decimals` places, then add the residual
/// `1 - row sum` to the row's largest component so the row still sums to
/// exactly 1 at that precision.
pub fn round_and_renormalize(samples: &SampleMatrix, decimals: u32) -> SampleMatrix {
    let scale = 10u64.pow(decimals) as f64;
    let mut out = samples.as_array().clone();
    for mut row in out.rows_mut() {
        let mut units: Vec<i64> = row
            .iter()
            .map(|v| (v * scale).round_ties_even() as i64)
            .collect();
        let residual = scale as i64 - units.iter().sum::<i64>();
        if residual != 0 {
            let largest = units
                .iter()
                .enumerate()
                .max_by(|(ia, a), (ib, b)| a.cmp(b).then(ib.cmp(ia)))
                .map(|(i, _)| i)
                .expect("non-empty row");
            units[largest] += residual;
        }
        for (v, u) in row.iter_mut().zip(&units) {
            *v = *u as f64 / scale;
        }
    }
    SampleMatrix::new(out)
}

/// Rows whose entries left their bounds after rounding adjustment; flagged,
/// not failed, since half a rounding step of drift is inherent to the chosen
/// precision.
pub fn flag_bound_violations(
    samples: &SampleMatrix,
    bounds: &[ComponentBounds],
) -> Vec<usize> {
    samples.rows_violating_bounds(bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn distance_matrix_hand_cases() {
        let a = SampleMatrix::new(array![[1.0, 1.0]]);
        let d = distance_matrix(&a, &a).unwrap();
        assert_eq!(d[[0, 0]], 0.0);

        let a = SampleMatrix::new(array![[0.0, 0.0]]);
        let b = SampleMatrix::new(array![[3.0, 4.0]]);
        assert_eq!(distance_matrix(&a, &b).unwrap()[[0, 0]], 5.0);

        let a = SampleMatrix::new(array![[0.0, 0.0], [1.0, 0.0]]);
        let b = SampleMatrix::new(array![[0.0, 1.0], [1.0, 1.0], [2.0, 0.0]]);
        let d = distance_matrix(&a, &b).unwrap();
        assert_eq!(d.shape(), &[2, 3]);
        assert!((d[[0, 1]] - 2.0f64.sqrt()).abs() < 1e-15);
        assert!((d[[1, 2]] - 1.0).abs() < 1e-15);

        let c = SampleMatrix::new(array![[0.0, 0.0, 0.0]]);
        assert!(distance_matrix(&a, &c).is_err());
    }

    #[test]
    fn farthest_prefers_distant_candidate() {
        let data = SampleMatrix::new(array![[0.0, 0.0]]);
        let cands = SampleMatrix::new(array![[1.0, 0.0], [0.2, 0.0]]);
        let sel = farthest_from_data(&cands, &data, 1, None).unwrap();
        assert_eq!(sel.indices, vec![0]);
    }

    #[test]
    fn farthest_exhaustive_returns_everything_ordered() {
        let data = SampleMatrix::new(array![[0.0, 0.0]]);
        let cands = SampleMatrix::new(array![[0.5, 0.0], [1.0, 0.0], [0.2, 0.0]]);
        let sel = farthest_from_data(&cands, &data, 3, None).unwrap();
        assert_eq!(sel.indices, vec![1, 0, 2]);
        assert!(sel.shortfall.is_none());
    }

    #[test]
    fn min_mutual_skips_near_duplicates_with_shortfall() {
        let data = SampleMatrix::new(array![[0.0, 0.0]]);
        let cands = SampleMatrix::new(array![[1.0, 0.0], [0.95, 0.0]]);
        let sel = farthest_from_data(&cands, &data, 2, Some(0.1)).unwrap();
        assert_eq!(sel.indices, vec![0]);
        assert!(sel.shortfall.is_some());
    }

    #[test]
    fn requesting_too_many_rows_errors() {
        let data = SampleMatrix::empty(2);
        let cands = SampleMatrix::new(array![[1.0, 0.0]]);
        assert!(matches!(
            farthest_from_data(&cands, &data, 2, None),
            Err(SelectionError::NotEnoughCandidates { .. })
        ));
    }

    /// Brute-force check of first-pick optimality on small random instances.
    #[test]
    fn greedy_first_pick_is_max_min_optimal() {
        use rand::Rng;
        let mut rng = crate::rng::RngStream::new(99, 0).rng();
        for _ in 0..50 {
            let n_c = rng.random_range(2..=8);
            let n_d = rng.random_range(1..=5);
            let cands = SampleMatrix::from_rows(
                &(0..n_c)
                    .map(|_| vec![rng.random(), rng.random()])
                    .collect::<Vec<_>>(),
                2,
            );
            let data = SampleMatrix::from_rows(
                &(0..n_d)
                    .map(|_| vec![rng.random(), rng.random()])
                    .collect::<Vec<_>>(),
                2,
            );
            let dists = distance_matrix(&cands, &data).unwrap();
            let brute = (0..n_c)
                .map(|i| {
                    dists
                        .row(i)
                        .iter()
                        .copied()
                        .fold(f64::INFINITY, f64::min)
                })
                .enumerate()
                .max_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            let sel = farthest_from_data(&cands, &data, 1, None).unwrap();
            assert_eq!(sel.indices[0], brute);
        }
    }

    #[test]
    fn rounding_examples() {
        let m = SampleMatrix::new(array![[0.8502, 0.0301, 0.0497, 0.0700]]);
        let r = round_and_renormalize(&m, 3);
        assert_eq!(r.row(0).to_vec(), vec![0.850, 0.030, 0.050, 0.070]);

        // Already-rounded rows pass through unchanged.
        let m = SampleMatrix::new(array![[0.85, 0.03, 0.05, 0.07]]);
        assert_eq!(round_and_renormalize(&m, 3), m);

        // A row rounding to 0.999 gets the missing unit on its largest entry.
        let m = SampleMatrix::new(array![[0.4994, 0.2504, 0.2502]]);
        let r = round_and_renormalize(&m, 3);
        assert_eq!(r.row(0).to_vec(), vec![0.500, 0.250, 0.250]);
    }

    #[test]
    fn rounded_rows_sum_exactly_at_precision() {
        use rand::Rng;
        let mut rng = crate::rng::RngStream::new(5, 5).rng();
        for _ in 0..200 {
            let d = rng.random_range(2..=6);
            let mut row: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
            let m = round_and_renormalize(&SampleMatrix::from_rows(&[row], d), 3);
            let units: i64 = m.row(0).iter().map(|v| (v * 1000.0).round() as i64).sum();
            assert_eq!(units, 1000);
        }
    }
}
