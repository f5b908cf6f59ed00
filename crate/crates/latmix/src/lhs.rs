//! Unit-hypercube Latin designs: plain LHS and LHS with multidimensional
//! uniformity (LHSMDU), plus scaling onto component bounds.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::matrix::SampleMatrix;
use crate::problem::ComponentBounds;

/// Default candidate oversampling factor for the LHSMDU elimination stage.
pub const DEFAULT_OVERSAMPLE: usize = 5;

/// An `n x d` design with entries in `[0, 1)` satisfying the Latin property:
/// each column has exactly one entry per stratum `[k/n, (k+1)/n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitDesign {
    values: Array2<f64>,
}

impl UnitDesign {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// First column as a vector; the sequential sampler draws one component
    /// at a time.
    pub fn column_vec(&self, j: usize) -> Vec<f64> {
        self.values.column(j).to_vec()
    }
}

/// Standard Latin hypercube design: an independent uniform permutation of the
/// strata per column, with uniform jitter inside each stratum.
pub fn lhs_unit(n: usize, d: usize, rng: &mut ChaCha8Rng) -> UnitDesign {
    assert!(n >= 1 && d >= 1, "lhs_unit needs n >= 1 and d >= 1");
    let mut values = Array2::zeros((n, d));
    for j in 0..d {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(rng);
        for i in 0..n {
            let u: f64 = rng.random();
            values[[i, j]] = (strata[i] as f64 + u) / n as f64;
        }
    }
    UnitDesign { values }
}

/// LHSMDU design: draw `oversample * n` uniform candidates, repeatedly
/// eliminate the candidate with the smallest average distance to its two
/// nearest remaining neighbours, then project the survivors onto Latin strata
/// column by column (rank-based, with fresh jitter inside each stratum).
pub fn lhsmdu_unit(n: usize, d: usize, rng: &mut ChaCha8Rng, oversample: usize) -> UnitDesign {
    assert!(n >= 1 && d >= 1, "lhsmdu_unit needs n >= 1 and d >= 1");
    assert!(oversample >= 2, "oversample factor must be at least 2");
    let m = oversample * n;
    let candidates: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..d).map(|_| rng.random()).collect())
        .collect();

    // Pairwise squared distances once; elimination only shrinks the set.
    let mut dist2 = vec![vec![0.0f64; m]; m];
    for a in 0..m {
        for b in (a + 1)..m {
            let s: f64 = (0..d)
                .map(|k| {
                    let diff = candidates[a][k] - candidates[b][k];
                    diff * diff
                })
                .sum();
            dist2[a][b] = s;
            dist2[b][a] = s;
        }
    }

    let mut alive: Vec<usize> = (0..m).collect();
    while alive.len() > n {
        let mut worst_pos = 0;
        let mut worst_score = f64::INFINITY;
        for (pos, &a) in alive.iter().enumerate() {
            let (mut d1, mut d2) = (f64::INFINITY, f64::INFINITY);
            for &b in &alive {
                if b == a {
                    continue;
                }
                let v = dist2[a][b];
                if v < d1 {
                    d2 = d1;
                    d1 = v;
                } else if v < d2 {
                    d2 = v;
                }
            }
            // Two nearest neighbours, or the single neighbour when only two
            // candidates remain.
            let score = if d2.is_finite() {
                (d1.sqrt() + d2.sqrt()) / 2.0
            } else {
                d1.sqrt()
            };
            if score < worst_score {
                worst_score = score;
                worst_pos = pos;
            }
        }
        alive.remove(worst_pos);
    }

    // Rank-based stratification: the survivor with the k-th smallest value in
    // a column lands in stratum k, keeping the Latin property exact.
    let mut values = Array2::zeros((n, d));
    for j in 0..d {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&p, &q| {
            candidates[alive[p]][j]
                .partial_cmp(&candidates[alive[q]][j])
                .expect("finite candidate coordinates")
        });
        for (rank, &p) in order.iter().enumerate() {
            let u: f64 = rng.random();
            values[[p, j]] = (rank as f64 + u) / n as f64;
        }
    }
    UnitDesign { values }
}

/// Affine map of a unit design onto the bound box: `x -> lower + x * width`.
pub fn scale_to_bounds(design: &UnitDesign, bounds: &[ComponentBounds]) -> SampleMatrix {
    assert_eq!(
        design.d(),
        bounds.len(),
        "design dimension must match bounds"
    );
    let mut out = design.values().clone();
    for (j, b) in bounds.iter().enumerate() {
        for v in out.column_mut(j) {
            *v = b.lower + *v * b.width();
        }
    }
    SampleMatrix::new(out)
}

/// Which engine draws the per-component samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Lhs,
    Lhsmdu,
}

impl Engine {
    pub const BOTH: [Engine; 2] = [Engine::Lhs, Engine::Lhsmdu];

    pub fn label(self) -> &'static str {
        match self {
            Engine::Lhs => "lhs",
            Engine::Lhsmdu => "lhsmdu",
        }
    }

    /// Stable stream-id tag.
    pub fn stream_tag(self) -> u64 {
        match self {
            Engine::Lhs => 0,
            Engine::Lhsmdu => 1,
        }
    }

    /// Draw a unit design with this engine.
    pub fn draw(self, n: usize, d: usize, rng: &mut ChaCha8Rng, oversample: usize) -> UnitDesign {
        match self {
            Engine::Lhs => lhs_unit(n, d, rng),
            Engine::Lhsmdu => lhsmdu_unit(n, d, rng, oversample),
        }
    }
}
