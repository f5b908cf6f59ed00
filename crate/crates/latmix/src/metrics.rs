//! Uniformity and spread diagnostics.
//!
//! Centered and wrap-around L2 discrepancies are evaluated with Hickernell's
//! closed forms on unit-cube coordinates; designs are min-max scaled by their
//! component bounds first. Variance is the mean per-dimension unbiased sample
//! variance of the scaled design (1/12 is the uniform benchmark). A standard
//! scale + PCA projection exports plot-ready 2-D coordinates.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use serde::Serialize;

use crate::error::MetricsError;
use crate::matrix::SampleMatrix;
use crate::problem::ComponentBounds;

/// Which row block of the report a metrics row describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricsScope {
    Selected,
    SelectedPlusData,
    Pool,
}

/// Uniformity metrics for one design block.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub scope: MetricsScope,
    pub point_count: usize,
    /// Centered L2 discrepancy.
    pub cd: f64,
    /// Wrap-around L2 discrepancy.
    pub wd: f64,
    /// Mean per-dimension unbiased sample variance; `None` below 2 points.
    pub variance: Option<f64>,
}

/// Min-max scale a design onto the unit cube by component bounds. Entries
/// farther outside their bounds than `slack` are rejected, not clipped;
/// within `slack` (rounding drift) they clamp to the cube edge. Zero-width
/// bounds map their single admissible value to 0.
pub fn unit_scale(
    samples: &SampleMatrix,
    bounds: &[ComponentBounds],
    slack: f64,
) -> Result<SampleMatrix, MetricsError> {
    if samples.n_cols() != bounds.len() {
        return Err(MetricsError::DimensionMismatch {
            left: samples.n_cols(),
            right: bounds.len(),
        });
    }
    let mut out = Array2::zeros((samples.n_rows(), samples.n_cols()));
    for (i, row) in samples.rows().enumerate() {
        for (j, (v, b)) in row.iter().zip(bounds).enumerate() {
            let scaled = if b.width() == 0.0 {
                if (v - b.lower).abs() <= slack {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (v - b.lower) / b.width()
            };
            let slack_units = if b.width() == 0.0 { 0.0 } else { slack / b.width() };
            if scaled < -slack_units || scaled > 1.0 + slack_units || !scaled.is_finite() {
                return Err(MetricsError::OutOfCube {
                    value: *v,
                    row: i,
                    col: j,
                });
            }
            out[[i, j]] = scaled.clamp(0.0, 1.0);
        }
    }
    Ok(SampleMatrix::new(out))
}

fn check_cube(design: &SampleMatrix) -> Result<(), MetricsError> {
    for (i, row) in design.rows().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if !(0.0..=1.0).contains(v) {
                return Err(MetricsError::OutOfCube {
                    value: *v,
                    row: i,
                    col: j,
                });
            }
        }
    }
    Ok(())
}

/// Centered L2 discrepancy of a design in the unit cube.
pub fn centered_l2_discrepancy(design: &SampleMatrix) -> Result<f64, MetricsError> {
    check_cube(design)?;
    let n = design.n_rows();
    if n == 0 {
        return Err(MetricsError::TooFewPoints { needed: 1, got: 0 });
    }
    let d = design.n_cols() as i32;
    let nf = n as f64;

    let mut single = 0.0;
    for row in design.rows() {
        let mut prod = 1.0;
        for x in row.iter() {
            let a = (x - 0.5).abs();
            prod *= 1.0 + 0.5 * a - 0.5 * a * a;
        }
        single += prod;
    }

    let mut double = 0.0;
    for i in 0..n {
        let ri = design.row(i);
        for j in 0..n {
            let rj = design.row(j);
            let mut prod = 1.0;
            for (xi, xj) in ri.iter().zip(rj.iter()) {
                let ai = (xi - 0.5).abs();
                let aj = (xj - 0.5).abs();
                prod *= 1.0 + 0.5 * ai + 0.5 * aj - 0.5 * (xi - xj).abs();
            }
            double += prod;
        }
    }

    let cd2 = (13.0f64 / 12.0).powi(d) - (2.0 / nf) * single + double / (nf * nf);
    Ok(cd2.max(0.0).sqrt())
}

/// Wrap-around L2 discrepancy of a design in the unit cube.
pub fn wraparound_l2_discrepancy(design: &SampleMatrix) -> Result<f64, MetricsError> {
    check_cube(design)?;
    let n = design.n_rows();
    if n == 0 {
        return Err(MetricsError::TooFewPoints { needed: 1, got: 0 });
    }
    let d = design.n_cols() as i32;
    let nf = n as f64;

    let mut double = 0.0;
    for i in 0..n {
        let ri = design.row(i);
        for j in 0..n {
            let rj = design.row(j);
            let mut prod = 1.0;
            for (xi, xj) in ri.iter().zip(rj.iter()) {
                let a = (xi - xj).abs();
                prod *= 1.5 - a * (1.0 - a);
            }
            double += prod;
        }
    }

    let wd2 = -(4.0f64 / 3.0).powi(d) + double / (nf * nf);
    Ok(wd2.max(0.0).sqrt())
}

/// Mean over dimensions of the unbiased per-column sample variance.
pub fn design_variance(design: &SampleMatrix) -> Result<f64, MetricsError> {
    let n = design.n_rows();
    if n < 2 {
        return Err(MetricsError::TooFewPoints { needed: 2, got: n });
    }
    let nf = n as f64;
    let mut total = 0.0;
    for j in 0..design.n_cols() {
        let col = design.as_array().column(j);
        let mean = col.sum() / nf;
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        total += ss / (nf - 1.0);
    }
    Ok(total / design.n_cols() as f64)
}

/// A 2-D principal-component projection of standard-scaled rows.
#[derive(Debug, Clone)]
pub struct PcaProjection {
    /// `n x 2` projected coordinates.
    pub coords: Array2<f64>,
    /// Fraction of total variance per retained axis, non-increasing.
    pub explained: [f64; 2],
    /// Columns dropped for having zero variance.
    pub dropped_columns: Vec<usize>,
}

/// Standard-scale the columns (zero mean, unit population deviation), drop
/// degenerate columns, and project onto the top two principal axes. The sign
/// of each axis is fixed so its largest-magnitude loading is positive.
pub fn pca_project_2d(rows: &SampleMatrix) -> Result<PcaProjection, MetricsError> {
    let n = rows.n_rows();
    if n < 2 {
        return Err(MetricsError::TooFewPoints { needed: 2, got: n });
    }
    let nf = n as f64;
    let mut kept = Vec::new();
    let mut dropped_columns = Vec::new();
    let mut standardized: Vec<Vec<f64>> = Vec::new();
    for j in 0..rows.n_cols() {
        let col = rows.as_array().column(j);
        let mean = col.sum() / nf;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
        if var == 0.0 {
            dropped_columns.push(j);
            continue;
        }
        let sd = var.sqrt();
        kept.push(j);
        standardized.push(col.iter().map(|v| (v - mean) / sd).collect());
    }
    let p = kept.len();
    if p < 2 {
        return Err(MetricsError::DegenerateProjection(p));
    }

    // Covariance of the standardized columns (the correlation matrix).
    let mut cov = DMatrix::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            let s: f64 = standardized[a]
                .iter()
                .zip(&standardized[b])
                .map(|(x, y)| x * y)
                .sum::<f64>()
                / nf;
            cov[(a, b)] = s;
            cov[(b, a)] = s;
        }
    }
    let eigen = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .partial_cmp(&eigen.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let total: f64 = eigen.eigenvalues.iter().map(|l| l.max(0.0)).sum();

    let mut coords = Array2::zeros((n, 2));
    let mut explained = [0.0; 2];
    for axis in 0..2 {
        let col = order[axis];
        let mut loading: Vec<f64> = (0..p).map(|r| eigen.eigenvectors[(r, col)]).collect();
        let anchor = loading
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| {
                a.abs()
                    .partial_cmp(&b.abs())
                    .unwrap()
                    .then(ib.cmp(ia))
            })
            .map(|(i, _)| i)
            .expect("non-empty loading");
        if loading[anchor] < 0.0 {
            loading.iter_mut().for_each(|v| *v = -*v);
        }
        for i in 0..n {
            coords[[i, axis]] = (0..p).map(|r| standardized[r][i] * loading[r]).sum();
        }
        explained[axis] = if total > 0.0 {
            eigen.eigenvalues[col].max(0.0) / total
        } else {
            0.0
        };
    }
    Ok(PcaProjection {
        coords,
        explained,
        dropped_columns,
    })
}

/// Metrics for the three report blocks: the selected design, the selection
/// joined with the prior data, and the working pool. All inputs are raw
/// compositions; scaling happens here.
pub fn metrics_table(
    selected: &SampleMatrix,
    data: &SampleMatrix,
    pool: &SampleMatrix,
    bounds: &[ComponentBounds],
    slack: f64,
) -> Result<Vec<MetricsReport>, MetricsError> {
    let scaled_selected = unit_scale(selected, bounds, slack)?;
    let scaled_pool = unit_scale(pool, bounds, slack)?;
    let with_data = if data.n_rows() == 0 {
        scaled_selected.clone()
    } else {
        scaled_selected.vstack(&unit_scale(data, bounds, slack)?)
    };
    let report = |scope, design: &SampleMatrix| -> Result<MetricsReport, MetricsError> {
        Ok(MetricsReport {
            scope,
            point_count: design.n_rows(),
            cd: centered_l2_discrepancy(design)?,
            wd: wraparound_l2_discrepancy(design)?,
            variance: design_variance(design).ok(),
        })
    };
    Ok(vec![
        report(MetricsScope::Selected, &scaled_selected)?,
        report(MetricsScope::SelectedPlusData, &with_data)?,
        report(MetricsScope::Pool, &scaled_pool)?,
    ])
}
