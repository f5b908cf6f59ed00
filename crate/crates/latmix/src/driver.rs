//! Outer bound-permutation loop.
//!
//! Sequential conditioned sampling starves whichever component is drawn last,
//! so the driver runs the sampler once per permutation of the component
//! order, for both engines, restores the original column order, and stacks
//! every feasible row (optionally filtering by incremental distance).

use itertools::Itertools;
use ndarray::Array2;
use rayon::prelude::*;

use crate::error::DriverError;
use crate::lhs::{Engine, DEFAULT_OVERSAMPLE};
use crate::matrix::{SampleMatrix, SUM_TOL};
use crate::problem::ComponentBounds;
use crate::rng::{RngStream, StreamKind};
use crate::sampler::{default_max_rej, sample_conditioned, SamplerConfig};

/// All bound orderings for one subproblem plus the per-permutation budget.
#[derive(Debug, Clone)]
pub struct PermutationPlan {
    /// Lexicographically ordered; the first entry is the identity.
    pub all_perms: Vec<Vec<usize>>,
    pub per_perm_n_samp: usize,
}

impl PermutationPlan {
    /// Split `tot_samp` over the `d!` permutations. The boolean reports
    /// whether the division was exact; otherwise the driver rounds down.
    pub fn new(d: usize, tot_samp: usize) -> Result<(Self, bool), DriverError> {
        let all_perms = enumerate_bound_permutations(d)?;
        let per_perm_n_samp = (tot_samp / all_perms.len()).max(1);
        let exact = per_perm_n_samp * all_perms.len() == tot_samp;
        Ok((
            Self {
                all_perms,
                per_perm_n_samp,
            },
            exact,
        ))
    }
}

/// All `d!` orderings of the component indices, lexicographically. Dimensions
/// above 4 must be partitioned before sampling.
pub fn enumerate_bound_permutations(d: usize) -> Result<Vec<Vec<usize>>, DriverError> {
    if d == 0 {
        return Err(DriverError::DimensionZero);
    }
    if d > 4 {
        return Err(DriverError::DimensionTooLarge(d));
    }
    Ok((0..d).permutations(d).collect())
}

/// Restore original column order for samples drawn under permuted bounds:
/// column `num` of the permuted matrix was drawn for component `combi[num]`.
pub fn reorder_columns(samples: &SampleMatrix, combi: &[usize]) -> SampleMatrix {
    let (n, d) = (samples.n_rows(), samples.n_cols());
    assert_eq!(d, combi.len());
    let mut ordered = Array2::zeros((n, d));
    for (num, &ind) in combi.iter().enumerate() {
        for i in 0..n {
            ordered[[i, ind]] = samples.get(i, num);
        }
    }
    SampleMatrix::new(ordered)
}

/// Greedily pick from `new` the `num_select` rows farthest from the
/// accumulated pool: each pick maximizes the distance to the nearest row of
/// the pool plus earlier picks.
pub fn select_by_distance_incremental(
    pool_so_far: &SampleMatrix,
    new: &SampleMatrix,
    num_select: usize,
) -> SampleMatrix {
    let take = num_select.min(new.n_rows());
    let mut min_dist: Vec<f64> = new
        .rows()
        .map(|row| {
            pool_so_far
                .rows()
                .map(|p| euclidean(&row.to_vec(), &p.to_vec()))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut picked: Vec<usize> = Vec::with_capacity(take);
    let mut taken = vec![false; new.n_rows()];
    for _ in 0..take {
        let mut best = None;
        let mut best_dist = f64::NEG_INFINITY;
        for (i, &t) in taken.iter().enumerate() {
            if !t && min_dist[i] > best_dist {
                best_dist = min_dist[i];
                best = Some(i);
            }
        }
        let chosen = best.expect("take <= available rows");
        taken[chosen] = true;
        picked.push(chosen);
        let chosen_row = new.row(chosen).to_vec();
        for (i, t) in taken.iter().enumerate() {
            if !*t {
                let d = euclidean(&new.row(i).to_vec(), &chosen_row);
                if d < min_dist[i] {
                    min_dist[i] = d;
                }
            }
        }
    }
    new.select_rows(&picked)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Stack-or-filter policy for permutations after the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    /// Stack every feasible row (the default).
    All,
    /// Keep only the given number of most-distant rows per permutation.
    Incremental(usize),
}

/// Driver-level knobs; per-permutation sampler configs derive from these.
#[derive(Debug, Clone)]
pub struct DriverConfig {
    pub tot_samp: usize,
    /// `None` uses the default allowance for the derived per-permutation
    /// count.
    pub max_rej: Option<usize>,
    pub max_iter_dim2: usize,
    pub max_iter_dim3: usize,
    pub oversample: usize,
    pub selection: SelectionMode,
}

impl DriverConfig {
    pub fn new(tot_samp: usize) -> Self {
        Self {
            tot_samp,
            max_rej: None,
            max_iter_dim2: 100,
            max_iter_dim3: 100,
            oversample: DEFAULT_OVERSAMPLE,
            selection: SelectionMode::All,
        }
    }

    fn sampler_config(&self, n_samp: usize, engine: Engine) -> SamplerConfig {
        SamplerConfig {
            tot_samp: self.tot_samp,
            n_samp,
            max_rej: self
                .max_rej
                .unwrap_or_else(|| default_max_rej(n_samp))
                .min(n_samp.saturating_sub(1)),
            max_iter_dim2: self.max_iter_dim2,
            max_iter_dim3: self.max_iter_dim3,
            engine,
            oversample: self.oversample,
        }
    }
}

/// Outcome of one (engine, permutation) sampler run.
#[derive(Debug, Clone)]
pub struct PermOutcome {
    pub engine: Engine,
    pub perm_index: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub bound_removed: usize,
    pub failure: Option<String>,
}

/// Feasible rows stacked across permutations, per engine, in the original
/// component order.
#[derive(Debug, Clone)]
pub struct FeasiblePool {
    pub lhs_samples: SampleMatrix,
    pub lhsmdu_samples: SampleMatrix,
    pub per_perm: Vec<PermOutcome>,
    pub warnings: Vec<String>,
}

impl FeasiblePool {
    pub fn samples(&self, engine: Engine) -> &SampleMatrix {
        match engine {
            Engine::Lhs => &self.lhs_samples,
            Engine::Lhsmdu => &self.lhsmdu_samples,
        }
    }

    /// Accepted counts per permutation for one engine, in permutation order.
    pub fn per_perm_counts(&self, engine: Engine) -> Vec<usize> {
        self.per_perm
            .iter()
            .filter(|o| o.engine == engine)
            .map(|o| o.accepted)
            .collect()
    }
}

/// Run the conditioned sampler for every bound permutation and both engines.
/// Permutations execute in parallel with one RNG stream each; pools are
/// assembled in permutation order regardless of scheduling.
pub fn run_all_permutations(
    bounds: &[ComponentBounds],
    cfg: &DriverConfig,
    seed: u64,
    subproblem_tag: u64,
) -> Result<FeasiblePool, DriverError> {
    let (plan, exact) = PermutationPlan::new(bounds.len(), cfg.tot_samp)?;
    let mut warnings = Vec::new();
    if !exact {
        warnings.push(format!(
            "tot_samp {} is not divisible by {} permutations; sampling {} per permutation",
            cfg.tot_samp,
            plan.all_perms.len(),
            plan.per_perm_n_samp
        ));
    }

    let mut pools: Vec<SampleMatrix> = Vec::with_capacity(2);
    let mut per_perm = Vec::new();
    for engine in Engine::BOTH {
        let samp_cfg = cfg.sampler_config(plan.per_perm_n_samp, engine);
        let results: Vec<_> = plan
            .all_perms
            .par_iter()
            .enumerate()
            .map(|(perm_index, combi)| {
                let perm_bounds: Vec<ComponentBounds> =
                    combi.iter().map(|&c| bounds[c].clone()).collect();
                let mut rng = RngStream::for_stage(
                    seed,
                    subproblem_tag,
                    StreamKind::Permutation {
                        engine: engine.stream_tag(),
                        perm_index: perm_index as u64,
                    },
                )
                .rng();
                sample_conditioned(&perm_bounds, &samp_cfg, &mut rng)
            })
            .collect();

        let mut pool = SampleMatrix::empty(bounds.len());
        for (perm_index, (combi, result)) in plan.all_perms.iter().zip(results).enumerate() {
            match result {
                Ok(set) => {
                    let ordered = reorder_columns(&set.rows, combi);
                    debug_assert!(
                        ordered.rows_violating_sum(SUM_TOL).is_empty()
                            && ordered.rows_violating_bounds(bounds).is_empty(),
                        "permutation {perm_index} produced an infeasible row"
                    );
                    per_perm.push(PermOutcome {
                        engine,
                        perm_index,
                        accepted: ordered.n_rows(),
                        rejected: set.rejected,
                        bound_removed: set.bound_removed,
                        failure: None,
                    });
                    if perm_index == 0 {
                        pool = pool.vstack(&ordered);
                    } else {
                        match cfg.selection {
                            SelectionMode::All => pool = pool.vstack(&ordered),
                            SelectionMode::Incremental(num_select) => {
                                let picked =
                                    select_by_distance_incremental(&pool, &ordered, num_select);
                                pool = pool.vstack(&picked);
                            }
                        }
                    }
                }
                Err(err) => {
                    per_perm.push(PermOutcome {
                        engine,
                        perm_index,
                        accepted: 0,
                        rejected: 0,
                        bound_removed: 0,
                        failure: Some(err.to_string()),
                    });
                }
            }
        }
        pools.push(pool);
    }

    let lhsmdu_samples = pools.pop().expect("two engine pools");
    let lhs_samples = pools.pop().expect("two engine pools");
    if lhs_samples.is_empty() && lhsmdu_samples.is_empty() {
        return Err(DriverError::AggregateInfeasible);
    }
    Ok(FeasiblePool {
        lhs_samples,
        lhsmdu_samples,
        per_perm,
        warnings,
    })
}
