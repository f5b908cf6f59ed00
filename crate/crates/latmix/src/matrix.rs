//! Row-oriented sample matrices.

use ndarray::{concatenate, Array2, ArrayView1, Axis};

use crate::problem::ComponentBounds;

/// Tolerance for the sum-to-one invariant on unrounded compositions.
pub const SUM_TOL: f64 = 1e-12;

/// An `n x d` matrix of compositions, one experiment per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: Array2<f64>,
}

impl SampleMatrix {
    pub fn new(data: Array2<f64>) -> Self {
        Self { data }
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            data: Array2::zeros((0, dim)),
        }
    }

    /// Build from a list of equally long rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<f64>], dim: usize) -> Self {
        let mut data = Array2::zeros((rows.len(), dim));
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "ragged row {i}");
            for (j, v) in row.iter().enumerate() {
                data[[i, j]] = *v;
            }
        }
        Self { data }
    }

    pub fn n_rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(i)
    }

    pub fn rows(&self) -> impl Iterator<Item = ArrayView1<'_, f64>> {
        self.data.axis_iter(Axis(0))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[[i, j]]
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_array(self) -> Array2<f64> {
        self.data
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        Self {
            data: self.data.select(Axis(0), indices),
        }
    }

    /// Stack `other` below `self`. Panics on column mismatch.
    pub fn vstack(&self, other: &SampleMatrix) -> Self {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        Self {
            data: concatenate(Axis(0), &[self.data.view(), other.data.view()])
                .expect("column mismatch in vstack"),
        }
    }

    /// Indices of rows whose sum deviates from 1 by more than `tol`.
    pub fn rows_violating_sum(&self, tol: f64) -> Vec<usize> {
        self.rows()
            .enumerate()
            .filter(|(_, r)| (r.sum() - 1.0).abs() > tol)
            .map(|(i, _)| i)
            .collect()
    }

    /// Indices of rows with any entry outside the given bounds.
    pub fn rows_violating_bounds(&self, bounds: &[ComponentBounds]) -> Vec<usize> {
        assert_eq!(bounds.len(), self.n_cols());
        self.rows()
            .enumerate()
            .filter(|(_, r)| {
                r.iter()
                    .zip(bounds)
                    .any(|(v, b)| *v < b.lower || *v > b.upper)
            })
            .map(|(i, _)| i)
            .collect()
    }
}

impl From<Array2<f64>> for SampleMatrix {
    fn from(data: Array2<f64>) -> Self {
        Self::new(data)
    }
}
