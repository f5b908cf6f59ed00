//! Sequential conditioned sampling for one bound permutation.
//!
//! Components are drawn one vector at a time with the configured engine and
//! paired so partial sums stay below one; the last component closes each row
//! to exactly one and is bound-checked. Dimensions 1 and 2 are direct;
//! dimension 3 pairs two drawn vectors, dimension 4 additionally pairs the
//! resulting partial sums with a third vector. Pairings that fall short are
//! grown by a randomized eviction/reinstall repair pass, and whole draws are
//! retried up to an iteration cap.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::SamplerError;
use crate::lhs::{Engine, DEFAULT_OVERSAMPLE};
use crate::matrix::SampleMatrix;
use crate::problem::ComponentBounds;

/// Knobs of the conditioned sampler for one permutation batch.
#[derive(Debug, Clone)]
pub struct SamplerConfig {
    /// Total sample budget across all permutations (informational).
    pub tot_samp: usize,
    /// Draws per permutation: `tot_samp` integer-divided by the permutation
    /// count.
    pub n_samp: usize,
    /// Rejections tolerated per permutation before a draw counts as failed.
    pub max_rej: usize,
    /// Redraw cap for the first pairing stage (and for restarts after a
    /// failed second stage).
    pub max_iter_dim2: usize,
    /// Redraw cap for the second pairing stage.
    pub max_iter_dim3: usize,
    pub engine: Engine,
    /// LHSMDU candidate oversampling factor.
    pub oversample: usize,
}

impl SamplerConfig {
    /// Config for `tot_samp` split over `n_perms` permutations. Returns the
    /// config and whether the division was exact (callers warn when not).
    pub fn for_permutations(tot_samp: usize, n_perms: usize, engine: Engine) -> (Self, bool) {
        let n_samp = (tot_samp / n_perms).max(1);
        let exact = n_samp * n_perms == tot_samp;
        (
            Self {
                tot_samp,
                n_samp,
                max_rej: default_max_rej(n_samp),
                max_iter_dim2: 100,
                max_iter_dim3: 100,
                engine,
                oversample: DEFAULT_OVERSAMPLE,
            },
            exact,
        )
    }

    /// Minimum matched rows a permutation must deliver.
    pub fn floor(&self) -> usize {
        self.n_samp - self.max_rej
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.n_samp == 0 {
            return Err(SamplerError::BadConfig("n_samp must be positive".into()));
        }
        if self.max_rej >= self.n_samp {
            return Err(SamplerError::BadConfig(format!(
                "max_rej {} must be below n_samp {}",
                self.max_rej, self.n_samp
            )));
        }
        if self.oversample < 2 {
            return Err(SamplerError::BadConfig("oversample must be at least 2".into()));
        }
        Ok(())
    }
}

/// Default rejection allowance: a tenth of the per-permutation draw count.
pub fn default_max_rej(n_samp: usize) -> usize {
    let tenth = (n_samp as f64 * 0.1).ceil() as usize;
    tenth.min(n_samp.saturating_sub(1))
}

/// Draw one component vector: `n` engine samples scaled to its bounds.
fn draw_component(
    engine: Engine,
    n: usize,
    bounds: &ComponentBounds,
    oversample: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let design = engine.draw(n, 1, rng, oversample);
    design
        .column_vec(0)
        .into_iter()
        .map(|x| bounds.lower + x * bounds.width())
        .collect()
}

// ---------------------------------------------------------------------------
// Pairing state
// ---------------------------------------------------------------------------

/// Bipartite pairing between two sample vectors under a sum-feasibility rule.
///
/// `left_indices[j]` is matched with `right_indices[j]`. Unmatched indices sit
/// in the complement lists; the repair pass treats `left_unmatched` as a
/// worklist and re-queues evicted lefts at the back.
#[derive(Debug, Clone)]
pub struct PairingState {
    pub sum_matrix: Array2<f64>,
    /// Feasible (left, right) pairs in row-major scan order.
    pub feasible_pairs: Vec<(usize, usize)>,
    pub left_indices: Vec<usize>,
    pub right_indices: Vec<usize>,
    pub left_unmatched: Vec<usize>,
    pub right_unmatched: Vec<usize>,
    left_matched: Vec<bool>,
    right_matched: Vec<bool>,
    /// Feasible rights per left, for the repair pass.
    pairs_by_left: Vec<Vec<usize>>,
}

impl PairingState {
    /// Build the sum matrix, enumerate feasible pairs, and greedily match
    /// first-available pairs in row-major order. A pair is feasible when its
    /// sum is at most 1, and (for the second pairing stage) strictly positive.
    pub fn build(left: &[f64], right: &[f64], require_positive: bool) -> Self {
        let (nl, nr) = (left.len(), right.len());
        let mut sum_matrix = Array2::zeros((nl, nr));
        let mut feasible_pairs = Vec::new();
        let mut pairs_by_left = vec![Vec::new(); nl];
        let mut left_indices = Vec::new();
        let mut right_indices = Vec::new();
        let mut left_matched = vec![false; nl];
        let mut right_matched = vec![false; nr];
        for i in 0..nl {
            for k in 0..nr {
                let s = left[i] + right[k];
                sum_matrix[[i, k]] = s;
                let feasible = s <= 1.0 && (!require_positive || s > 0.0);
                if feasible {
                    feasible_pairs.push((i, k));
                    pairs_by_left[i].push(k);
                    if !left_matched[i] && !right_matched[k] {
                        left_matched[i] = true;
                        right_matched[k] = true;
                        left_indices.push(i);
                        right_indices.push(k);
                    }
                }
            }
        }
        let left_unmatched = (0..nl).filter(|&i| !left_matched[i]).collect();
        let right_unmatched = (0..nr).filter(|&k| !right_matched[k]).collect();
        let state = Self {
            sum_matrix,
            feasible_pairs,
            left_indices,
            right_indices,
            left_unmatched,
            right_unmatched,
            left_matched,
            right_matched,
            pairs_by_left,
        };
        state.debug_check();
        state
    }

    pub fn matched(&self) -> usize {
        self.left_indices.len()
    }

    /// Largest matching this instance could possibly have.
    pub fn full_target(&self) -> usize {
        self.left_matched.len().min(self.right_matched.len())
    }

    fn install(&mut self, m: usize, r: usize) {
        debug_assert!(!self.left_matched[m] && !self.right_matched[r]);
        self.left_matched[m] = true;
        self.right_matched[r] = true;
        self.left_indices.push(m);
        self.right_indices.push(r);
        self.left_unmatched.retain(|&x| x != m);
        self.right_unmatched.retain(|&x| x != r);
        self.debug_check();
    }

    /// Remove the pair currently holding `r`; returns the evicted left.
    fn evict_right(&mut self, r: usize) -> usize {
        let pos = self
            .right_indices
            .iter()
            .position(|&x| x == r)
            .expect("evict_right called for a matched right");
        let evicted_left = self.left_indices.remove(pos);
        self.right_indices.remove(pos);
        self.left_matched[evicted_left] = false;
        self.right_matched[r] = false;
        self.left_unmatched.push(evicted_left);
        self.right_unmatched.push(r);
        self.debug_check();
        evicted_left
    }

    fn debug_check(&self) {
        #[cfg(debug_assertions)]
        {
            assert_eq!(self.left_indices.len(), self.right_indices.len());
            let mut seen = std::collections::BTreeSet::new();
            for &i in &self.left_indices {
                assert!(seen.insert(i), "duplicate left index {i}");
                assert!(self.left_matched[i]);
            }
            seen.clear();
            for &k in &self.right_indices {
                assert!(seen.insert(k), "duplicate right index {k}");
                assert!(self.right_matched[k]);
            }
            for &i in &self.left_unmatched {
                assert!(!self.left_matched[i]);
            }
            for &k in &self.right_unmatched {
                assert!(!self.right_matched[k]);
            }
        }
    }
}

/// Outcome of one repair pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RepairStats {
    pub installs: usize,
    pub evictions: usize,
    /// Unmatched lefts found without any feasible pair.
    pub dead_lefts: usize,
    /// Pass gave up via a counter rule.
    pub aborted: bool,
    /// Matching reached its full target.
    pub completed: bool,
}

struct RepairPolicy {
    /// Abort once the dead-left count exceeds this.
    dead_threshold: Option<usize>,
    /// Stop once the eviction counter exceeds this (checked at loop top).
    eviction_cap: Option<usize>,
}

/// Grow the matching for each unmatched left: pick one of its feasible pairs
/// at random; a free right is taken directly, an occupied right has its
/// current pair evicted (the evicted left re-enters the worklist).
fn repair_pass(
    state: &mut PairingState,
    policy: &RepairPolicy,
    rng: &mut ChaCha8Rng,
) -> RepairStats {
    let mut stats = RepairStats::default();
    // Iterate a snapshot worklist so mutating the state's unmatched lists
    // cannot shift the cursor; evicted lefts are appended for another visit.
    let mut worklist = state.left_unmatched.clone();
    let mut pos = 0;
    // Livelock guard: eviction chains can cycle through the same right.
    let n = state.full_target().max(1);
    let max_steps = 4 * n * n + 8;
    let mut steps = 0;
    while pos < worklist.len() {
        if state.matched() == state.full_target() {
            break;
        }
        if let Some(cap) = policy.eviction_cap {
            if stats.evictions > cap {
                stats.aborted = true;
                break;
            }
        }
        steps += 1;
        if steps > max_steps {
            stats.aborted = true;
            break;
        }
        let m = worklist[pos];
        pos += 1;
        if state.left_matched[m] {
            continue;
        }
        let options = &state.pairs_by_left[m];
        if options.is_empty() {
            stats.dead_lefts += 1;
            if let Some(threshold) = policy.dead_threshold {
                if stats.dead_lefts > threshold {
                    stats.aborted = true;
                    break;
                }
            }
            continue;
        }
        let r = options[rng.random_range(0..options.len())];
        if state.right_matched[r] {
            let evicted = state.evict_right(r);
            stats.evictions += 1;
            worklist.push(evicted);
        }
        state.install(m, r);
        stats.installs += 1;
    }
    if state.matched() == state.full_target() {
        stats.completed = true;
    }
    stats
}

/// First-stage repair: gives up after more than two dead lefts.
pub fn repair_pairing(
    state: &mut PairingState,
    _cfg: &SamplerConfig,
    rng: &mut ChaCha8Rng,
) -> RepairStats {
    repair_pass(
        state,
        &RepairPolicy {
            dead_threshold: Some(2),
            eviction_cap: None,
        },
        rng,
    )
}

/// Second-stage repair: additionally caps evictions at `n_samp` per pass and
/// gives up once the dead-left count exceeds `max_rej - 1`.
pub fn repair_pairing_gt3(
    state: &mut PairingState,
    cfg: &SamplerConfig,
    rng: &mut ChaCha8Rng,
) -> RepairStats {
    repair_pass(
        state,
        &RepairPolicy {
            dead_threshold: (cfg.max_rej > 0).then(|| cfg.max_rej - 1),
            eviction_cap: Some(cfg.n_samp),
        },
        rng,
    )
}

// ---------------------------------------------------------------------------
// Conditioned sample sets
// ---------------------------------------------------------------------------

/// Raw draws of a one-dimensional problem; the sum constraint forces the
/// single component to equal 1, so most draws cannot close a mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct Dim1Diagnostic {
    pub draws: Vec<f64>,
    /// Indices of draws that are not exactly 1.
    pub sum_infeasible: Vec<usize>,
}

/// Accepted rows of one permutation, in permuted-bound column order.
#[derive(Debug, Clone)]
pub struct ConditionedSampleSet {
    /// Rows summing to 1 with every component inside its bounds.
    pub rows: SampleMatrix,
    /// Pairing-stage rejections; at most `max_rej`.
    pub rejected: usize,
    /// Rows removed by the final bound check on the closing component.
    pub bound_removed: usize,
    pub dim1: Option<Dim1Diagnostic>,
}

impl ConditionedSampleSet {
    pub fn accepted(&self) -> usize {
        self.rows.n_rows()
    }
}

/// Matched first-stage samples: `left[j]` pairs with `right[j]`.
#[derive(Debug, Clone)]
pub struct PairedSamples {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// `left[j] + right[j]`, each at most 1.
    pub sums: Vec<f64>,
    /// `n_samp` minus the matched count.
    pub rejected: usize,
    pub state: PairingState,
}

fn paired_from_state(left: &[f64], right: &[f64], state: PairingState, n_samp: usize) -> PairedSamples {
    let l: Vec<f64> = state.left_indices.iter().map(|&i| left[i]).collect();
    let r: Vec<f64> = state.right_indices.iter().map(|&k| right[k]).collect();
    let sums: Vec<f64> = l.iter().zip(&r).map(|(a, b)| a + b).collect();
    PairedSamples {
        rejected: n_samp - l.len(),
        left: l,
        right: r,
        sums,
        state,
    }
}

/// Dimension 1: draws of the single component. Mixtures need the component to
/// equal 1, so bounds that exclude 1 are an error and off-1 draws are flagged
/// rather than returned as rows.
pub fn sample_dim1(
    bounds: &[ComponentBounds],
    cfg: &SamplerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<ConditionedSampleSet, SamplerError> {
    let b = &bounds[0];
    if !b.contains(1.0) {
        return Err(SamplerError::InfeasibleDim1 {
            lower: b.lower,
            upper: b.upper,
        });
    }
    let draws = draw_component(cfg.engine, cfg.n_samp, b, cfg.oversample, rng);
    let sum_infeasible: Vec<usize> = draws
        .iter()
        .enumerate()
        .filter(|(_, v)| (**v - 1.0).abs() > 1e-12)
        .map(|(i, _)| i)
        .collect();
    let kept: Vec<Vec<f64>> = draws
        .iter()
        .filter(|v| (**v - 1.0).abs() <= 1e-12)
        .map(|v| vec![*v])
        .collect();
    Ok(ConditionedSampleSet {
        rows: SampleMatrix::from_rows(&kept, 1),
        rejected: 0,
        bound_removed: sum_infeasible.len(),
        dim1: Some(Dim1Diagnostic {
            draws,
            sum_infeasible,
        }),
    })
}

/// Dimension 2: the second component is the complement of the first; rows
/// whose complement leaves its bounds are rejected.
pub fn sample_dim2(
    bounds: &[ComponentBounds],
    cfg: &SamplerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<ConditionedSampleSet, SamplerError> {
    let s1 = draw_component(cfg.engine, cfg.n_samp, &bounds[0], cfg.oversample, rng);
    let mut kept = Vec::with_capacity(cfg.n_samp);
    for v in &s1 {
        let complement = 1.0 - v;
        if bounds[1].contains(complement) {
            kept.push(vec![*v, complement]);
        }
    }
    let rejected = cfg.n_samp - kept.len();
    if kept.len() < cfg.floor() {
        return Err(SamplerError::RejectionOverflow {
            accepted: kept.len(),
            n_samp: cfg.n_samp,
            max_rej: cfg.max_rej,
        });
    }
    Ok(ConditionedSampleSet {
        rows: SampleMatrix::from_rows(&kept, 2),
        rejected,
        bound_removed: 0,
        dim1: None,
    })
}

/// One draw + greedy match + repair of the first pairing stage.
fn dim2_attempt(
    bounds: &[ComponentBounds],
    cfg: &SamplerConfig,
    rng: &mut ChaCha8Rng,
) -> PairedSamples {
    let s1 = draw_component(cfg.engine, cfg.n_samp, &bounds[0], cfg.oversample, rng);
    let s2 = draw_component(cfg.engine, cfg.n_samp, &bounds[1], cfg.oversample, rng);
    let mut state = PairingState::build(&s1, &s2, false);
    if state.matched() < state.full_target() {
        repair_pairing(&mut state, cfg, rng);
    }
    paired_from_state(&s1, &s2, state, cfg.n_samp)
}

/// First pairing stage for dimensions above 2: redraw both vectors until the
/// matched count reaches the rejection floor or the iteration cap runs out.
pub fn sample_dim_gt2(
    bounds: &[ComponentBounds],
    cfg: &SamplerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<PairedSamples, SamplerError> {
    let mut last_matched = 0;
    for _ in 0..=cfg.max_iter_dim2 {
        let paired = dim2_attempt(bounds, cfg, rng);
        if paired.left.len() >= cfg.floor() {
            return Ok(paired);
        }
        last_matched = paired.left.len();
    }
    Err(SamplerError::InfeasiblePermutation {
        matched: last_matched,
        n_samp: cfg.n_samp,
        floor: cfg.floor(),
        iterations: cfg.max_iter_dim2,
    })
}

/// Matched second-stage samples for dimension 4.
#[derive(Debug, Clone)]
pub struct ExtendedSamples {
    /// Indices into the first-stage matched rows.
    pub kept_pairs: Vec<usize>,
    /// Third-component values, aligned with `kept_pairs`.
    pub third: Vec<f64>,
    pub rejected: usize,
    pub state: PairingState,
}

/// Second pairing stage: pair the partial sums with a freshly drawn third
/// component under `sum <= 1 and sum > 0`, redrawing the third vector until
/// the floor is reached. Shortfalls below the floor invoke the second-stage
/// repair before the draw counts as failed.
pub fn extend_dim_gt3(
    paired: &PairedSamples,
    third_bounds: &ComponentBounds,
    cfg: &SamplerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<ExtendedSamples, SamplerError> {
    let mut last_matched = 0;
    for _ in 0..=cfg.max_iter_dim3 {
        let s3 = draw_component(cfg.engine, cfg.n_samp, third_bounds, cfg.oversample, rng);
        let mut state = PairingState::build(&paired.sums, &s3, true);
        if state.matched() < cfg.floor() {
            repair_pairing_gt3(&mut state, cfg, rng);
        }
        if state.matched() >= cfg.floor() {
            let kept_pairs = state.left_indices.clone();
            let third: Vec<f64> = state.right_indices.iter().map(|&k| s3[k]).collect();
            return Ok(ExtendedSamples {
                rejected: cfg.n_samp - kept_pairs.len(),
                kept_pairs,
                third,
                state,
            });
        }
        last_matched = state.matched();
    }
    Err(SamplerError::InfeasiblePermutation {
        matched: last_matched,
        n_samp: cfg.n_samp,
        floor: cfg.floor(),
        iterations: cfg.max_iter_dim3,
    })
}

/// Close each partial row with `1 - sum(row)` and drop rows whose closing
/// component leaves its bounds. Removal is the contract, not an error.
pub fn finalize_last_component(
    partial_rows: &[Vec<f64>],
    last_bounds: &ComponentBounds,
) -> (Vec<Vec<f64>>, usize) {
    let mut kept = Vec::with_capacity(partial_rows.len());
    let mut removed = 0;
    for row in partial_rows {
        let partial_sum: f64 = row.iter().sum();
        let last = 1.0 - partial_sum;
        if last_bounds.contains(last) {
            let mut full = row.clone();
            full.push(last);
            kept.push(full);
        } else {
            removed += 1;
        }
    }
    (kept, removed)
}

/// Run the conditioned sampler for one permutation of bounds (dimension 1 to
/// 4), returning rows in the permuted column order.
pub fn sample_conditioned(
    bounds: &[ComponentBounds],
    cfg: &SamplerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<ConditionedSampleSet, SamplerError> {
    cfg.validate()?;
    match bounds.len() {
        1 => sample_dim1(bounds, cfg, rng),
        2 => sample_dim2(bounds, cfg, rng),
        3 => {
            let paired = sample_dim_gt2(&bounds[..2], cfg, rng)?;
            let partial: Vec<Vec<f64>> = paired
                .left
                .iter()
                .zip(&paired.right)
                .map(|(a, b)| vec![*a, *b])
                .collect();
            let (rows, removed) = finalize_last_component(&partial, &bounds[2]);
            Ok(ConditionedSampleSet {
                rows: SampleMatrix::from_rows(&rows, 3),
                rejected: paired.rejected,
                bound_removed: removed,
                dim1: None,
            })
        }
        4 => sample_dim4(bounds, cfg, rng),
        0 => Err(SamplerError::UnsupportedDimension(0)),
        d => Err(SamplerError::UnsupportedDimension(d)),
    }
}

/// Dimension 4: a failed second stage sends the whole attempt back to fresh
/// first-stage draws, within the first-stage iteration budget.
fn sample_dim4(
    bounds: &[ComponentBounds],
    cfg: &SamplerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<ConditionedSampleSet, SamplerError> {
    let mut restarts = 0;
    loop {
        let paired = sample_dim_gt2(&bounds[..2], cfg, rng)?;
        match extend_dim_gt3(&paired, &bounds[2], cfg, rng) {
            Ok(ext) => {
                let partial: Vec<Vec<f64>> = ext
                    .kept_pairs
                    .iter()
                    .zip(&ext.third)
                    .map(|(&j, &v3)| vec![paired.left[j], paired.right[j], v3])
                    .collect();
                let (rows, removed) = finalize_last_component(&partial, &bounds[3]);
                return Ok(ConditionedSampleSet {
                    rows: SampleMatrix::from_rows(&rows, 4),
                    rejected: ext.rejected,
                    bound_removed: removed,
                    dim1: None,
                });
            }
            Err(err) => {
                restarts += 1;
                if restarts > cfg.max_iter_dim2 {
                    return Err(err);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn cfg(n_samp: usize, max_rej: usize) -> SamplerConfig {
        SamplerConfig {
            tot_samp: n_samp,
            n_samp,
            max_rej,
            max_iter_dim2: 100,
            max_iter_dim3: 100,
            engine: Engine::Lhs,
            oversample: DEFAULT_OVERSAMPLE,
        }
    }

    fn b(name: &str, lower: f64, upper: f64) -> ComponentBounds {
        ComponentBounds::new(name, lower, upper)
    }

    #[test]
    fn dim1_forced_bounds_all_ones() {
        let mut rng = RngStream::new(5, 0).rng();
        let set = sample_dim1(&[b("a", 1.0, 1.0)], &cfg(4, 1), &mut rng).unwrap();
        assert_eq!(set.accepted(), 4);
        assert!(set.rows.rows().all(|r| r[0] == 1.0));
        assert!(set.dim1.unwrap().sum_infeasible.is_empty());
    }

    #[test]
    fn dim1_flags_rows_that_cannot_close_the_sum() {
        let mut rng = RngStream::new(5, 1).rng();
        let set = sample_dim1(&[b("a", 0.8, 1.0)], &cfg(3, 1), &mut rng).unwrap();
        let diag = set.dim1.as_ref().unwrap();
        assert_eq!(diag.draws.len(), 3);
        // Continuous draws essentially never hit 1 exactly.
        assert_eq!(diag.sum_infeasible.len() + set.accepted(), 3);
        assert!(set.accepted() <= 1);
    }

    #[test]
    fn dim1_infeasible_bounds_error() {
        let mut rng = RngStream::new(5, 2).rng();
        match sample_dim1(&[b("a", 0.0, 0.5)], &cfg(3, 1), &mut rng) {
            Err(SamplerError::InfeasibleDim1 { upper, .. }) => assert_eq!(upper, 0.5),
            other => panic!("expected infeasible diagnostic, got {other:?}"),
        }
    }

    #[test]
    fn dim2_loose_bounds_accept_everything() {
        let mut rng = RngStream::new(7, 0).rng();
        let set = sample_dim2(&[b("a", 0.0, 1.0), b("b", 0.0, 1.0)], &cfg(6, 1), &mut rng).unwrap();
        assert_eq!(set.accepted(), 6);
        assert_eq!(set.rejected, 0);
        for row in set.rows.rows() {
            assert!((row[0] + row[1] - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn dim2_exact_complement_bounds_accept_everything() {
        let mut rng = RngStream::new(7, 1).rng();
        let set = sample_dim2(&[b("a", 0.95, 1.0), b("b", 0.0, 0.05)], &cfg(5, 1), &mut rng).unwrap();
        assert_eq!(set.accepted(), 5);
    }

    #[test]
    fn dim2_overflow_is_an_error() {
        // Complement of [0.8, 1.0] lands in [0, 0.2]; bounds [0, 0.05] reject
        // around three quarters of draws, far beyond max_rej = 1.
        let mut rng = RngStream::new(7, 2).rng();
        let result = sample_dim2(&[b("a", 0.8, 1.0), b("b", 0.0, 0.05)], &cfg(8, 1), &mut rng);
        assert!(matches!(result, Err(SamplerError::RejectionOverflow { .. })));
    }

    #[test]
    fn greedy_pairing_matches_first_available() {
        // sums: (0,0)=0.9 (0,1)=0.5 feasible; row 1 sums 1.6/1.2 infeasible.
        let state = PairingState::build(&[0.2, 0.9], &[0.7, 0.3], false);
        assert_eq!(state.feasible_pairs, vec![(0, 0), (0, 1)]);
        assert_eq!(state.left_indices, vec![0]);
        assert_eq!(state.right_indices, vec![0]);
        assert_eq!(state.left_unmatched, vec![1]);
    }

    #[test]
    fn all_small_bounds_pair_fully() {
        let state = PairingState::build(&[0.05, 0.01, 0.09], &[0.02, 0.08, 0.03], false);
        assert_eq!(state.matched(), 3);
        assert_eq!(state.feasible_pairs.len(), 9);
    }

    #[test]
    fn no_feasible_pairs_yields_empty_matching() {
        let state = PairingState::build(&[0.9, 0.8], &[0.8, 0.9], false);
        assert!(state.feasible_pairs.is_empty());
        assert_eq!(state.matched(), 0);
    }

    #[test]
    fn positivity_clause_boundary() {
        // 1.0 + 0.0 = 1.0 is feasible (<= 1 and > 0); 0.0 + 0.0 = 0 is not.
        let state = PairingState::build(&[1.0], &[0.0], true);
        assert_eq!(state.feasible_pairs, vec![(0, 0)]);
        let state = PairingState::build(&[0.0], &[0.0], true);
        assert!(state.feasible_pairs.is_empty());
    }

    #[test]
    fn repair_installs_free_right_directly() {
        // Left 1 unmatched, its only pair (1, 1) has a free right.
        let state_input = (&[0.3f64, 0.4], &[0.6f64, 0.55]);
        let mut state = PairingState::build(state_input.0, state_input.1, false);
        // sums: (0,0)=0.9 (0,1)=0.85 (1,0)=1.0 (1,1)=0.95 -- all feasible, so
        // greedy already matches fully; rebuild a sparser instance instead.
        assert_eq!(state.matched(), 2);
        state = PairingState::build(&[0.2, 0.5], &[0.3, 0.8], false);
        // sums: (0,0)=0.5 (0,1)=1.0 (1,0)=0.8; greedy: (0,0); left 1 -> right 0 taken.
        assert_eq!(state.matched(), 1);
        let mut rng = RngStream::new(1, 9).rng();
        let stats = repair_pairing(&mut state, &cfg(2, 1), &mut rng);
        // Only resolution: evict (0,0), install (1,0), requeue 0, install (0,1).
        assert_eq!(state.matched(), 2);
        assert!(stats.evictions >= 1);
        assert!(stats.completed);
    }

    #[test]
    fn repair_eviction_requeues_blocked_left() {
        // Rights: 0 contested by both lefts, right 1 reachable only from left 0.
        let mut state = PairingState::build(&[0.2, 0.5], &[0.3, 0.7], false);
        // sums: (0,0)=0.5 (0,1)=0.9 (1,0)=0.8 (1,1)=1.2; greedy: (0,0), left 1 blocked.
        assert_eq!(state.matched(), 1);
        assert_eq!(state.left_unmatched, vec![1]);
        let mut rng = RngStream::new(3, 9).rng();
        let stats = repair_pairing(&mut state, &cfg(2, 1), &mut rng);
        assert!(stats.evictions >= 1, "left 1 can only enter by eviction");
        assert!(state.matched() >= 1);
        // Either the chain resolved to the full matching or the guard stopped
        // a cycle; the matching never shrinks below the greedy count.
        assert!(state.matched() <= 2);
    }

    #[test]
    fn repair_aborts_after_more_than_two_dead_lefts() {
        // Left 0 pairs with right 0; lefts 1..3 have no feasible pair at all.
        let mut state = PairingState::build(
            &[0.1, 0.99, 0.98, 0.97],
            &[0.1, 0.99, 0.98, 0.97],
            false,
        );
        assert_eq!(state.matched(), 1);
        let mut rng = RngStream::new(4, 9).rng();
        let stats = repair_pairing(&mut state, &cfg(4, 1), &mut rng);
        assert!(stats.aborted);
        assert_eq!(stats.dead_lefts, 3);
        assert_eq!(state.matched(), 1);
    }

    #[test]
    fn repair_gt3_aborts_immediately_when_max_rej_is_one() {
        let mut state = PairingState::build(&[0.1, 0.99], &[0.1, 0.99], false);
        assert_eq!(state.matched(), 1);
        let mut rng = RngStream::new(4, 10).rng();
        let stats = repair_pairing_gt3(&mut state, &cfg(2, 1), &mut rng);
        assert!(stats.aborted);
        assert_eq!(stats.dead_lefts, 1);
    }

    #[test]
    fn repair_gt3_eviction_counter_stops_pass() {
        // Every left is feasible only with right 0: a pure eviction treadmill.
        let n = 3;
        let left = vec![0.5; n];
        let right = vec![0.4, 5.0, 5.0];
        // Keep sums of right 1/2 above 1 so only right 0 is usable.
        let mut state = PairingState::build(&left, &right, false);
        assert_eq!(state.matched(), 1);
        let mut rng = RngStream::new(4, 11).rng();
        let stats = repair_pairing_gt3(&mut state, &cfg(n, 1), &mut rng);
        // The counter is checked at loop top, so at most n_samp + 1 evictions.
        assert!(stats.evictions <= n + 1);
        assert!(stats.aborted || stats.evictions > 0);
        assert_eq!(state.matched(), 1);
    }

    #[test]
    fn dim_gt2_example_accepts_one_pair() {
        // From the greedy example: floor = 1, one matched pair is enough.
        let c = cfg(2, 1);
        let state = PairingState::build(&[0.2, 0.9], &[0.7, 0.3], false);
        assert!(state.matched() >= c.floor());
    }

    #[test]
    fn extend_example_brute_force() {
        // Sumsamp2 rows for sum_vec=[0.95, 0.5] against s3=[0.3, 0.4]:
        // (0,*) = 1.25, 1.35 infeasible; (1,*) = 0.8, 0.9 feasible.
        let state = PairingState::build(&[0.95, 0.5], &[0.3, 0.4], true);
        assert_eq!(state.feasible_pairs, vec![(1, 0), (1, 1)]);
        assert_eq!(state.left_indices, vec![1]);
        assert_eq!(state.right_indices, vec![0]);
    }

    #[test]
    fn extend_full_match_when_all_sums_fit() {
        let state = PairingState::build(&[0.5, 0.6], &[0.3, 0.2], true);
        assert_eq!(state.matched(), 2);
    }

    #[test]
    fn finalize_keeps_rows_inside_last_bounds() {
        let (rows, removed) = finalize_last_component(
            &[vec![0.85, 0.03, 0.05], vec![0.80, 0.0, 0.0]],
            &b("metal", 0.0, 0.14),
        );
        assert_eq!(removed, 1);
        assert_eq!(rows.len(), 1);
        assert!((rows[0][3] - 0.07).abs() < 1e-12);
    }

    #[test]
    fn finalize_boundary_zero_needs_zero_lower_bound() {
        let (rows, removed) =
            finalize_last_component(&[vec![0.6, 0.4]], &b("last", 0.0, 0.2));
        assert_eq!(removed, 0);
        assert_eq!(rows[0][2], 0.0);
        let (rows, removed) =
            finalize_last_component(&[vec![0.6, 0.4]], &b("last", 0.05, 0.2));
        assert_eq!(removed, 1);
        assert!(rows.is_empty());
    }

    #[test]
    fn conditioned_rows_sum_to_one_and_respect_bounds() {
        let bound_sets: Vec<Vec<ComponentBounds>> = vec![
            vec![
                b("PA-56", 0.8, 1.0),
                b("PhA", 0.0, 0.05),
                b("amino", 0.0, 0.1),
                b("metal", 0.0, 0.14),
            ],
            vec![b("x", 0.0, 1.0), b("y", 0.0, 1.0), b("z", 0.0, 1.0)],
            vec![b("u", 0.0, 0.6), b("v", 0.2, 0.8)],
        ];
        for (bi, bounds) in bound_sets.iter().enumerate() {
            for seed in 0..8 {
                let mut rng = RngStream::new(seed, 20 + bi as u64).rng();
                let mut c = cfg(6, 2);
                c.engine = if seed % 2 == 0 { Engine::Lhs } else { Engine::Lhsmdu };
                let set = match sample_conditioned(bounds, &c, &mut rng) {
                    Ok(set) => set,
                    Err(SamplerError::RejectionOverflow { .. })
                    | Err(SamplerError::InfeasiblePermutation { .. }) => continue,
                    Err(other) => panic!("unexpected error: {other:?}"),
                };
                assert!(set.rejected <= c.max_rej);
                for row in set.rows.rows() {
                    assert!((row.sum() - 1.0).abs() <= 1e-12, "row sum {}", row.sum());
                    for (v, bb) in row.iter().zip(bounds) {
                        assert!(bb.contains(*v), "{v} outside {bb:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn conditioned_sampling_is_deterministic() {
        let bounds = vec![
            b("PA-56", 0.8, 1.0),
            b("PhA", 0.0, 0.05),
            b("amino", 0.0, 0.1),
            b("metal", 0.0, 0.14),
        ];
        let c = cfg(6, 2);
        let a = sample_conditioned(&bounds, &c, &mut RngStream::new(77, 3).rng()).unwrap();
        let b2 = sample_conditioned(&bounds, &c, &mut RngStream::new(77, 3).rng()).unwrap();
        assert_eq!(a.rows, b2.rows);
        assert_eq!(a.rejected, b2.rejected);
    }

    #[test]
    fn rejects_unsupported_dimension() {
        let bounds: Vec<ComponentBounds> = (0..5).map(|i| b(&format!("c{i}"), 0.0, 1.0)).collect();
        let mut rng = RngStream::new(1, 0).rng();
        assert!(matches!(
            sample_conditioned(&bounds, &cfg(4, 1), &mut rng),
            Err(SamplerError::UnsupportedDimension(5))
        ));
    }
}
