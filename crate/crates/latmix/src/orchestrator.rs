//! Divide-and-conquer pipeline: sample each subproblem with the permutation
//! driver, enforce synthesis rules, shortlist against prior data, reassemble
//! full-dimensional candidates, and make the final budget selection.

use ndarray::Array2;
use serde::Serialize;

use crate::driver::{run_all_permutations, DriverConfig, PermOutcome, SelectionMode};
use crate::error::{Error, SamplerError, SelectionError};
use crate::lhs::{Engine, DEFAULT_OVERSAMPLE};
use crate::matrix::SampleMatrix;
use crate::metrics::{metrics_table, MetricsReport};
use crate::problem::{
    aggregate_dataset_to_main, rescale_dataset_to_subproblem, ExperimentDataset, MainSlot,
    ProblemSpec, SubproblemKind, SynthesisConstraint,
};
use crate::rng::{RngStream, StreamKind};
use crate::selection::{farthest_from_data, round_and_renormalize};
use crate::synthesis::{apply_onehot_synthesis, apply_pair_synthesis};

/// Run-level configuration; config-file values and CLI flags resolve into
/// this before the pipeline starts.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Sampling budget for subproblems that do not override it.
    pub tot_samp: usize,
    /// Rejection allowance override; `None` derives the default per
    /// subproblem.
    pub max_rej: Option<usize>,
    pub max_iter_dim2: usize,
    pub max_iter_dim3: usize,
    pub oversample: usize,
    /// Working shortlist size per subproblem.
    pub pool_size: usize,
    pub selection: SelectionMode,
    /// Minimum mutual distance between final recommendations.
    pub min_mutual: Option<f64>,
}

impl PipelineConfig {
    pub fn new(seed: u64, tot_samp: usize) -> Self {
        Self {
            seed,
            tot_samp,
            max_rej: None,
            max_iter_dim2: 100,
            max_iter_dim3: 100,
            oversample: DEFAULT_OVERSAMPLE,
            pool_size: 90,
            selection: SelectionMode::All,
            min_mutual: None,
        }
    }

    fn driver_config(&self, tot_samp: usize, max_rej: Option<usize>) -> DriverConfig {
        DriverConfig {
            tot_samp,
            max_rej: max_rej.or(self.max_rej),
            max_iter_dim2: self.max_iter_dim2,
            max_iter_dim3: self.max_iter_dim3,
            oversample: self.oversample,
            selection: self.selection,
        }
    }
}

/// One sampling task: the main problem or one group, with its bounds and
/// rescaled data.
#[derive(Debug, Clone)]
pub struct SubproblemTask {
    /// 0 for the main problem, then groups in partition order.
    pub id: usize,
    pub kind: SubproblemKind,
    /// Partition index for groups.
    pub partition_index: Option<usize>,
    pub label: String,
    pub bounds: Vec<crate::problem::ComponentBounds>,
    pub data: ExperimentDataset,
    pub synthesis: Option<SynthesisConstraint>,
    pub tot_samp: usize,
    pub max_rej: Option<usize>,
    /// Prior rows dropped during rescaling (zero group mass).
    pub dropped_prior_rows: usize,
}

/// Build the task list: the whole problem when no partition is declared,
/// otherwise the main problem over aggregates plus one task per group.
pub fn prepare_tasks(
    spec: &ProblemSpec,
    data: &ExperimentDataset,
    cfg: &PipelineConfig,
) -> Vec<SubproblemTask> {
    if spec.partition.is_empty() {
        return vec![SubproblemTask {
            id: 0,
            kind: SubproblemKind::Main,
            partition_index: None,
            label: "main".into(),
            bounds: spec.components.clone(),
            data: data.clone(),
            synthesis: None,
            tot_samp: cfg.tot_samp,
            max_rej: None,
            dropped_prior_rows: 0,
        }];
    }
    let mut tasks = vec![SubproblemTask {
        id: 0,
        kind: SubproblemKind::Main,
        partition_index: None,
        label: "main".into(),
        bounds: spec.main_bounds(),
        data: aggregate_dataset_to_main(data, spec),
        synthesis: None,
        tot_samp: cfg.tot_samp,
        max_rej: None,
        dropped_prior_rows: 0,
    }];
    for (pos, &g) in spec.group_indices().iter().enumerate() {
        let sub = &spec.partition[g];
        let (sub_data, dropped) = rescale_dataset_to_subproblem(data, sub);
        let label = sub
            .aggregate
            .as_ref()
            .map(|a| a.bounds.name.clone())
            .unwrap_or_else(|| format!("group{pos}"));
        tasks.push(SubproblemTask {
            id: pos + 1,
            kind: SubproblemKind::Group,
            partition_index: Some(g),
            label,
            bounds: spec.subproblem_bounds(sub),
            data: sub_data,
            synthesis: sub.synthesis.clone(),
            tot_samp: sub.tot_samp.unwrap_or(cfg.tot_samp),
            max_rej: sub.max_rej,
            dropped_prior_rows: dropped.len(),
        });
    }
    tasks
}

/// Per-engine outcome of one subproblem.
#[derive(Debug, Clone)]
pub struct EngineSubResult {
    /// Feasible pool after synthesis projection (where configured).
    pub pool: SampleMatrix,
    /// The shortlist, in selection order.
    pub selected: SampleMatrix,
    /// Original pool row of each shortlist row.
    pub selected_source: Vec<usize>,
    pub synthesis_rejected: usize,
}

#[derive(Debug, Clone)]
pub struct SubproblemResult {
    pub task: SubproblemTask,
    pub per_perm: Vec<PermOutcome>,
    pub lhs: EngineSubResult,
    pub lhsmdu: EngineSubResult,
    pub warnings: Vec<String>,
}

impl SubproblemResult {
    pub fn engine(&self, engine: Engine) -> &EngineSubResult {
        match engine {
            Engine::Lhs => &self.lhs,
            Engine::Lhsmdu => &self.lhsmdu,
        }
    }
}

/// Sample one subproblem and shortlist its pool.
///
/// The main problem keeps the `n_exp + budget` rows farthest from its prior
/// data; synthesis-constrained groups draw their shortlist uniformly at
/// random (seeded). Both are capped by the working pool size. Dimension-1
/// groups are degenerate: the only feasible composition is the single
/// component at 1.
pub fn run_subproblem(
    spec: &ProblemSpec,
    task: &SubproblemTask,
    cfg: &PipelineConfig,
) -> Result<SubproblemResult, Error> {
    let mut warnings = Vec::new();

    if task.dim() == 1 {
        let b = &task.bounds[0];
        if !b.contains(1.0) {
            return Err(Error::Sampler(SamplerError::InfeasibleDim1 {
                lower: b.lower,
                upper: b.upper,
            }));
        }
        let rows = vec![vec![1.0]; cfg.pool_size];
        let pool = SampleMatrix::from_rows(&rows, 1);
        let make = || EngineSubResult {
            pool: pool.clone(),
            selected: pool.clone(),
            selected_source: (0..cfg.pool_size).collect(),
            synthesis_rejected: 0,
        };
        return Ok(SubproblemResult {
            task: task.clone(),
            per_perm: Vec::new(),
            lhs: make(),
            lhsmdu: make(),
            warnings,
        });
    }

    let driver_cfg = cfg.driver_config(task.tot_samp, task.max_rej);
    let pool = run_all_permutations(&task.bounds, &driver_cfg, cfg.seed, task.id as u64)?;
    warnings.extend(pool.warnings.iter().cloned());
    if task.tot_samp <= task.data.n_exp() + spec.budget {
        warnings.push(format!(
            "subproblem '{}': tot_samp {} should exceed n_exp + budget = {}",
            task.label,
            task.tot_samp,
            task.data.n_exp() + spec.budget
        ));
    }

    let mut results = Vec::new();
    for engine in Engine::BOTH {
        let raw = pool.samples(engine).clone();
        let (projected, synthesis_rejected) = match &task.synthesis {
            None => (raw, 0),
            Some(constraint) => project_synthesis(&raw, constraint),
        };
        if projected.is_empty() {
            warnings.push(format!(
                "subproblem '{}': empty {} pool",
                task.label,
                engine.label()
            ));
            results.push(EngineSubResult {
                pool: projected.clone(),
                selected: projected,
                selected_source: Vec::new(),
                synthesis_rejected,
            });
            continue;
        }

        let target = match (task.kind, &task.synthesis) {
            // Synthesis-constrained groups are shortlisted at random.
            (SubproblemKind::Group, Some(_)) => cfg.pool_size,
            // Everything else keeps the rows farthest from the prior data.
            _ => cfg.pool_size.min(task.data.n_exp() + spec.budget),
        };
        let k = target.min(projected.n_rows());
        if k < target {
            warnings.push(format!(
                "subproblem '{}': {} pool has {} rows, short of the requested {}",
                task.label,
                engine.label(),
                projected.n_rows(),
                target
            ));
        }

        let (selected, selected_source) = match (task.kind, &task.synthesis) {
            (SubproblemKind::Group, Some(_)) => {
                let mut order: Vec<usize> = (0..projected.n_rows()).collect();
                let mut rng = RngStream::for_stage(
                    cfg.seed,
                    task.id as u64,
                    StreamKind::GroupSelect {
                        engine: engine.stream_tag(),
                    },
                )
                .rng();
                use rand::seq::SliceRandom;
                order.shuffle(&mut rng);
                order.truncate(k);
                (projected.select_rows(&order), order)
            }
            _ => {
                let sel = farthest_from_data(&projected, task.data.matrix(), k, None)
                    .map_err(Error::Selection)?;
                (sel.rows, sel.indices)
            }
        };
        results.push(EngineSubResult {
            pool: projected,
            selected,
            selected_source,
            synthesis_rejected,
        });
    }

    let lhsmdu = results.pop().expect("two engines");
    let lhs = results.pop().expect("two engines");
    Ok(SubproblemResult {
        task: task.clone(),
        per_perm: pool.per_perm,
        lhs,
        lhsmdu,
        warnings,
    })
}

impl SubproblemTask {
    pub fn dim(&self) -> usize {
        self.bounds.len()
    }
}

/// Project every pool row onto its synthesis constraint; rejected rows are
/// dropped and counted.
fn project_synthesis(
    pool: &SampleMatrix,
    constraint: &SynthesisConstraint,
) -> (SampleMatrix, usize) {
    let mut kept = Vec::new();
    let mut rejected = 0;
    for row in pool.rows() {
        let values = row.to_vec();
        match constraint {
            SynthesisConstraint::OneHot => kept.push(apply_onehot_synthesis(&values).row),
            SynthesisConstraint::Pairs { .. } => match apply_pair_synthesis(&values, constraint) {
                Ok(outcome) => kept.push(outcome.row),
                Err(_) => rejected += 1,
            },
        }
    }
    (SampleMatrix::from_rows(&kept, pool.n_cols()), rejected)
}

/// Reassemble full-dimensional candidates: plain main components pass
/// through, each group's fractional pattern is multiplied by its aggregate
/// value. Rows are zipped by shortlist index, so all inputs must be equally
/// long.
pub fn reassemble(
    main_rows: &SampleMatrix,
    group_rows: &[(usize, SampleMatrix)],
    spec: &ProblemSpec,
) -> Result<SampleMatrix, Error> {
    let n = main_rows.n_rows();
    for (g, rows) in group_rows {
        if rows.n_rows() != n {
            return Err(Error::Pipeline(format!(
                "group {g} shortlist has {} rows, main has {n}",
                rows.n_rows()
            )));
        }
    }
    let layout = spec.main_layout();
    if main_rows.n_cols() != layout.len() {
        return Err(Error::Pipeline(format!(
            "main rows have {} columns, layout expects {}",
            main_rows.n_cols(),
            layout.len()
        )));
    }
    let mut out = Array2::zeros((n, spec.dim()));
    for i in 0..n {
        for (j, slot) in layout.iter().enumerate() {
            match slot {
                MainSlot::Component(c) => out[[i, *c]] = main_rows.get(i, j),
                MainSlot::Aggregate(g) => {
                    let aggregate = main_rows.get(i, j);
                    let rows = &group_rows
                        .iter()
                        .find(|(gi, _)| gi == g)
                        .ok_or_else(|| Error::Pipeline(format!("missing group {g} shortlist")))?
                        .1;
                    for (m, &comp) in spec.partition[*g].member_indices.iter().enumerate() {
                        out[[i, comp]] = rows.get(i, m) * aggregate;
                    }
                }
            }
        }
    }
    Ok(SampleMatrix::new(out))
}

/// Provenance of one recommendation row.
#[derive(Debug, Clone, Serialize)]
pub struct RowProvenance {
    /// Index into the working pool of reassembled candidates.
    pub candidate: usize,
    /// Original subproblem pool row per task id (main first).
    pub source_rows: Vec<usize>,
}

/// The final budgeted recommendation for one engine.
#[derive(Debug, Clone)]
pub struct DesignRecommendation {
    /// Rounded rows, summing to exactly 1 at the configured precision.
    pub rows: SampleMatrix,
    /// The same rows before rounding (sum to 1 within 1e-12).
    pub unrounded: SampleMatrix,
    pub provenance: Vec<RowProvenance>,
    /// Metrics for the selected block, selected plus data, and the pool.
    pub metrics: Vec<MetricsReport>,
    /// Rows whose rounded values drifted outside their derived bounds.
    pub bound_flags: Vec<usize>,
}

/// Pick the `des_n_samp` candidates farthest from the prior data, round them,
/// and attach the three-block metrics table.
pub fn final_select(
    candidates: &SampleMatrix,
    data: &ExperimentDataset,
    spec: &ProblemSpec,
    cfg: &PipelineConfig,
    des_n_samp: usize,
    provenance_sources: &[Vec<usize>],
) -> Result<DesignRecommendation, Error> {
    if candidates.n_rows() < des_n_samp {
        return Err(Error::Selection(SelectionError::NotEnoughCandidates {
            requested: des_n_samp,
            available: candidates.n_rows(),
        }));
    }
    let sel = farthest_from_data(candidates, data.matrix(), des_n_samp, cfg.min_mutual)
        .map_err(Error::Selection)?;
    let unrounded = sel.rows.clone();
    let rounded = round_and_renormalize(&unrounded, spec.rounding_decimals);
    let bounds = spec.derived_full_bounds();
    let bound_flags = rounded.rows_violating_bounds(&bounds);
    // Rounded lab data sits within half a rounding step of its bounds.
    let slack = 0.5 * 10f64.powi(-(spec.rounding_decimals as i32));
    let metrics = metrics_table(&unrounded, data.matrix(), candidates, &bounds, slack)
        .map_err(Error::Metrics)?;
    let provenance = sel
        .indices
        .iter()
        .map(|&candidate| RowProvenance {
            candidate,
            source_rows: provenance_sources
                .iter()
                .map(|sources| sources[candidate])
                .collect(),
        })
        .collect();
    Ok(DesignRecommendation {
        rows: rounded,
        unrounded,
        provenance,
        metrics,
        bound_flags,
    })
}

/// Full-pipeline output for one engine.
#[derive(Debug, Clone)]
pub struct EngineRun {
    pub engine: Engine,
    /// Reassembled full-dimensional working pool.
    pub pool: SampleMatrix,
    pub recommendation: DesignRecommendation,
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub subproblems: Vec<SubproblemResult>,
    pub runs: Vec<EngineRun>,
    pub warnings: Vec<String>,
}

/// Run the whole pipeline for the requested engines.
pub fn run_pipeline(
    spec: &ProblemSpec,
    data: &ExperimentDataset,
    cfg: &PipelineConfig,
    engines: &[Engine],
) -> Result<PipelineResult, Error> {
    let budget = spec.budget;
    let tasks = prepare_tasks(spec, data, cfg);
    let mut subproblems = Vec::with_capacity(tasks.len());
    for task in &tasks {
        subproblems.push(run_subproblem(spec, task, cfg)?);
    }
    let mut warnings: Vec<String> = subproblems
        .iter()
        .flat_map(|s| s.warnings.iter().cloned())
        .collect();

    let mut runs = Vec::new();
    for &engine in engines {
        // Zip shortlists at a common length before reassembly.
        let common = subproblems
            .iter()
            .map(|s| s.engine(engine).selected.n_rows())
            .min()
            .unwrap_or(0);
        if common < budget {
            return Err(Error::Pipeline(format!(
                "{} working pool has {common} rows, below the budget {budget}",
                engine.label()
            )));
        }
        if common < cfg.pool_size {
            warnings.push(format!(
                "{} working pool truncated to {common} rows (pool_size {})",
                engine.label(),
                cfg.pool_size
            ));
        }
        let truncate = |result: &EngineSubResult| -> (SampleMatrix, Vec<usize>) {
            let idx: Vec<usize> = (0..common).collect();
            (
                result.selected.select_rows(&idx),
                result.selected_source[..common].to_vec(),
            )
        };

        let (pool, sources) = if spec.partition.is_empty() {
            let (rows, src) = truncate(subproblems[0].engine(engine));
            (rows, vec![src])
        } else {
            let (main_rows, main_src) = truncate(subproblems[0].engine(engine));
            let mut group_rows = Vec::new();
            let mut sources = vec![main_src];
            for sub in &subproblems[1..] {
                let (rows, src) = truncate(sub.engine(engine));
                group_rows.push((
                    sub.task.partition_index.expect("group task has index"),
                    rows,
                ));
                sources.push(src);
            }
            (reassemble(&main_rows, &group_rows, spec)?, sources)
        };

        let recommendation = final_select(&pool, data, spec, cfg, budget, &sources)?;
        runs.push(EngineRun {
            engine,
            pool,
            recommendation,
        });
    }
    Ok(PipelineResult {
        subproblems,
        runs,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{parse_problem_config, AggregateSlot, ComponentBounds, SubproblemSpec};
    use ndarray::array;

    fn nine_dim_spec() -> ProblemSpec {
        let text = r#"{
            "components": [
                {"name": "PA-56", "lower": 0.8, "upper": 1.0},
                {"name": "PhA", "lower": 0.0, "upper": 0.05},
                {"name": "CS", "lower": 0.0, "upper": 1.0},
                {"name": "BN", "lower": 0.0, "upper": 1.0},
                {"name": "THAM", "lower": 0.0, "upper": 1.0},
                {"name": "MEL", "lower": 0.0, "upper": 1.0},
                {"name": "CaBO", "lower": 0.0, "upper": 1.0},
                {"name": "ZnBO", "lower": 0.0, "upper": 1.0},
                {"name": "HNT", "lower": 0.0, "upper": 1.0}
            ],
            "partition": [
                {"kind": "main", "members": ["PA-56", "PhA"]},
                {"kind": "group", "members": ["CS", "BN", "THAM", "MEL"],
                 "aggregate": {"name": "amino", "lower": 0.0, "upper": 0.1, "slot": 2},
                 "synthesis": {"mode": "pairs",
                               "allowed_pairs": [["MEL", "CS"], ["THAM", "CS"], ["MEL", "THAM"]],
                               "allowed_singles": ["CS", "BN", "THAM", "MEL"]},
                 "tot_samp": 72, "max_rej": 2},
                {"kind": "group", "members": ["CaBO", "ZnBO", "HNT"],
                 "aggregate": {"name": "metal", "lower": 0.0, "upper": 0.14, "slot": 3},
                 "synthesis": {"mode": "one_hot"}, "tot_samp": 36, "max_rej": 2}
            ],
            "budget": 5,
            "rounding_decimals": 3
        }"#;
        parse_problem_config(text).unwrap()
    }

    #[test]
    fn reassemble_composes_groups_multiplicatively() {
        let spec = nine_dim_spec();
        let main = SampleMatrix::new(array![[0.85, 0.03, 0.05, 0.07]]);
        let amino = SampleMatrix::new(array![[1.0, 0.0, 0.0, 0.0]]);
        let metal = SampleMatrix::new(array![[0.0, 1.0, 0.0]]);
        let full = reassemble(&main, &[(1, amino), (2, metal)], &spec).unwrap();
        assert_eq!(
            full.row(0).to_vec(),
            vec![0.85, 0.03, 0.05, 0.0, 0.0, 0.0, 0.0, 0.07, 0.0]
        );
        assert!((full.row(0).sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reassemble_zero_aggregate_zeroes_the_group() {
        let spec = nine_dim_spec();
        let main = SampleMatrix::new(array![[0.95, 0.05, 0.0, 0.0]]);
        let amino = SampleMatrix::new(array![[0.5, 0.0, 0.5, 0.0]]);
        let metal = SampleMatrix::new(array![[1.0, 0.0, 0.0]]);
        let full = reassemble(&main, &[(1, amino), (2, metal)], &spec).unwrap();
        for j in 2..9 {
            assert_eq!(full.get(0, j), 0.0);
        }
    }

    #[test]
    fn reassemble_conserves_group_mass_exactly() {
        use rand::Rng;
        let spec = nine_dim_spec();
        let mut rng = crate::rng::RngStream::new(21, 0).rng();
        for _ in 0..50 {
            let a: f64 = rng.random::<f64>() * 0.1;
            let m: f64 = rng.random::<f64>() * 0.14;
            let pa = 1.0 - a - m - 0.02;
            let main = SampleMatrix::from_rows(&[vec![pa, 0.02, a, m]], 4);
            let mut amino: Vec<f64> = (0..4).map(|_| rng.random()).collect();
            let s: f64 = amino.iter().sum();
            amino.iter_mut().for_each(|v| *v /= s);
            let metal = vec![0.0, 0.0, 1.0];
            let full = reassemble(
                &main,
                &[
                    (1, SampleMatrix::from_rows(&[amino.clone()], 4)),
                    (2, SampleMatrix::from_rows(&[metal], 3)),
                ],
                &spec,
            )
            .unwrap();
            let amino_sum: f64 = (2..6).map(|j| full.get(0, j)).sum();
            let metal_sum: f64 = (6..9).map(|j| full.get(0, j)).sum();
            assert!((amino_sum - a).abs() < 1e-15 * 4.0);
            assert!((metal_sum - m).abs() < 1e-15 * 3.0);
        }
    }

    #[test]
    fn identity_partition_passes_main_rows_through() {
        let spec = parse_problem_config(
            r#"{"components": [
                {"name": "a", "lower": 0.0, "upper": 1.0},
                {"name": "b", "lower": 0.0, "upper": 1.0}
            ], "budget": 2}"#,
        )
        .unwrap();
        let main = SampleMatrix::new(array![[0.3, 0.7], [0.6, 0.4]]);
        let full = reassemble(&main, &[], &spec).unwrap();
        assert_eq!(full, main);
    }

    #[test]
    fn degenerate_dim1_group_yields_constant_rows() {
        let spec = ProblemSpec {
            components: vec![
                ComponentBounds::new("x", 0.8, 1.0),
                ComponentBounds::new("y", 0.0, 0.1),
                ComponentBounds::new("solo", 0.0, 1.0),
            ],
            partition: vec![
                SubproblemSpec {
                    kind: SubproblemKind::Main,
                    member_indices: vec![0, 1],
                    aggregate: None,
                    synthesis: None,
                    tot_samp: None,
                    max_rej: None,
                },
                SubproblemSpec {
                    kind: SubproblemKind::Group,
                    member_indices: vec![2],
                    aggregate: Some(AggregateSlot {
                        bounds: ComponentBounds::new("solo_total", 0.0, 0.2),
                        slot: 2,
                    }),
                    synthesis: None,
                    tot_samp: None,
                    max_rej: None,
                },
            ],
            budget: 3,
            rounding_decimals: 3,
        };
        spec.validate().unwrap();
        let cfg = PipelineConfig::new(1, 48);
        let data = ExperimentDataset::empty(3);
        let tasks = prepare_tasks(&spec, &data, &cfg);
        let solo = run_subproblem(&spec, &tasks[1], &cfg).unwrap();
        assert_eq!(solo.lhs.pool.n_rows(), cfg.pool_size);
        assert!(solo.lhs.pool.rows().all(|r| r[0] == 1.0));
        assert_eq!(solo.lhs.selected.n_rows(), cfg.pool_size);
    }

    #[test]
    fn pipeline_is_deterministic() {
        let spec = nine_dim_spec();
        let data = ExperimentDataset::empty(9);
        let mut cfg = PipelineConfig::new(5, 48);
        cfg.pool_size = 12;
        let a = run_pipeline(&spec, &data, &cfg, &Engine::BOTH).unwrap();
        let b = run_pipeline(&spec, &data, &cfg, &Engine::BOTH).unwrap();
        for (ra, rb) in a.runs.iter().zip(&b.runs) {
            assert_eq!(ra.pool, rb.pool);
            assert_eq!(ra.recommendation.rows, rb.recommendation.rows);
        }
    }

    #[test]
    fn pipeline_recommendations_are_feasible() {
        let spec = nine_dim_spec();
        let data = ExperimentDataset::empty(9);
        let mut cfg = PipelineConfig::new(9, 48);
        cfg.pool_size = 12;
        let result = run_pipeline(&spec, &data, &cfg, &Engine::BOTH).unwrap();
        for run in &result.runs {
            assert_eq!(run.recommendation.rows.n_rows(), spec.budget);
            for row in run.recommendation.unrounded.rows() {
                assert!((row.sum() - 1.0).abs() <= 1e-12);
            }
            for row in run.recommendation.rows.rows() {
                let units: i64 = row.iter().map(|v| (v * 1000.0).round() as i64).sum();
                assert_eq!(units, 1000);
                // At most one nonzero metal component.
                let metals = (6..9).filter(|&j| row[j] != 0.0).count();
                assert!(metals <= 1);
            }
        }
    }

    #[test]
    fn final_select_with_budget_equal_to_candidates() {
        let spec = parse_problem_config(
            r#"{"components": [
                {"name": "a", "lower": 0.0, "upper": 1.0},
                {"name": "b", "lower": 0.0, "upper": 1.0}
            ], "budget": 3}"#,
        )
        .unwrap();
        let cfg = PipelineConfig::new(0, 8);
        let candidates = SampleMatrix::new(array![[0.2, 0.8], [0.5, 0.5], [0.9, 0.1]]);
        let data = ExperimentDataset::empty(2);
        let rec = final_select(&candidates, &data, &spec, &cfg, 3, &[vec![0, 1, 2]]).unwrap();
        assert_eq!(rec.rows.n_rows(), 3);
        let err = final_select(&candidates, &data, &spec, &cfg, 4, &[vec![0, 1, 2]]);
        assert!(err.is_err());
    }
}
