//! Problem definition: components, bounds, subproblem partition, synthesis
//! rules, and prior experimental data.
//!
//! A problem is described by a JSON config document:
//!
//! ```json
//! {
//!   "components": [ {"name": "PA-56", "lower": 0.8, "upper": 1.0}, ... ],
//!   "partition": [
//!     {"kind": "main", "members": ["PA-56", "PhA"]},
//!     {"kind": "group", "members": ["CS", "BN", "THAM", "MEL"],
//!      "aggregate": {"name": "amino", "lower": 0.0, "upper": 0.1, "slot": 2},
//!      "synthesis": {"mode": "pairs",
//!                    "allowed_pairs": [["MEL", "CS"], ["THAM", "CS"], ["MEL", "THAM"]],
//!                    "allowed_singles": ["CS", "BN", "THAM", "MEL"]},
//!      "tot_samp": 360, "max_rej": 11}
//!   ],
//!   "budget": 15,
//!   "rounding_decimals": 3,
//!   "sampling": {"tot_samp": 144}
//! }
//! ```
//!
//! `partition` is omitted (or empty) for problems of dimension <= 4; then the
//! whole component list is the main problem. With a partition, the main
//! problem is built from the `main` members plus one aggregate slot per
//! group: the group's total fraction is sampled as a single main component
//! and later distributed over the group members.
//!
//! Experiment data is a CSV with a header of component names and one
//! composition per row, in decimal fractions.

use std::collections::BTreeSet;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::ProblemError;
use crate::matrix::SampleMatrix;

/// Row-sum tolerance accepted on input data. Lab data carries rounding noise.
pub const ROW_SUM_TOL: f64 = 1e-6;

/// Named fraction bounds for one component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentBounds {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

impl ComponentBounds {
    pub fn new(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            lower,
            upper,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower && v <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    fn validate(&self) -> Result<(), ProblemError> {
        let ok = self.lower >= 0.0
            && self.lower <= self.upper
            && self.upper <= 1.0
            && self.lower.is_finite()
            && self.upper.is_finite();
        if ok {
            Ok(())
        } else {
            Err(ProblemError::BadBounds {
                name: self.name.clone(),
                lower: self.lower,
                upper: self.upper,
            })
        }
    }
}

/// Manufacturability restriction on which group members may co-occur.
///
/// Indices are positions within the group's member list.
#[derive(Debug, Clone, PartialEq)]
pub enum SynthesisConstraint {
    /// Only the listed pairs may co-occur; the listed singles may stand alone.
    Pairs {
        allowed_pairs: BTreeSet<(usize, usize)>,
        allowed_singles: BTreeSet<usize>,
    },
    /// Exactly one member takes the whole group fraction.
    OneHot,
}

impl SynthesisConstraint {
    pub fn pairs(
        allowed_pairs: impl IntoIterator<Item = (usize, usize)>,
        allowed_singles: impl IntoIterator<Item = usize>,
    ) -> Self {
        let allowed_pairs = allowed_pairs
            .into_iter()
            .map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
            .collect();
        Self::Pairs {
            allowed_pairs,
            allowed_singles: allowed_singles.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubproblemKind {
    Main,
    Group,
}

/// For a group subproblem: the main-problem slot carrying the group total.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSlot {
    /// Bounds of the group total within the main problem; the name labels the
    /// aggregate in reports.
    pub bounds: ComponentBounds,
    /// Index of this aggregate in the main problem's component vector.
    pub slot: usize,
}

/// One entry of the problem partition.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSpec {
    pub kind: SubproblemKind,
    /// Indices into [`ProblemSpec::components`].
    pub member_indices: Vec<usize>,
    /// Present exactly when `kind == Group`.
    pub aggregate: Option<AggregateSlot>,
    pub synthesis: Option<SynthesisConstraint>,
    /// Per-subproblem sampling budget; falls back to the run-level value.
    pub tot_samp: Option<usize>,
    /// Per-subproblem rejection allowance; falls back to the run-level value.
    pub max_rej: Option<usize>,
}

impl SubproblemSpec {
    pub fn dim(&self) -> usize {
        self.member_indices.len()
    }
}

/// One position of the main problem: either a plain component or a group
/// aggregate (identified by its index in the partition list).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MainSlot {
    Component(usize),
    Aggregate(usize),
}

/// A validated mixture-design problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub components: Vec<ComponentBounds>,
    /// Empty when the problem itself has dimension <= 4.
    pub partition: Vec<SubproblemSpec>,
    /// Number of new experiments to recommend.
    pub budget: usize,
    pub rounding_decimals: u32,
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component_names(&self) -> Vec<String> {
        self.components.iter().map(|c| c.name.clone()).collect()
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    /// Partition indices of the group subproblems, in declaration order.
    pub fn group_indices(&self) -> Vec<usize> {
        self.partition
            .iter()
            .enumerate()
            .filter(|(_, s)| s.kind == SubproblemKind::Group)
            .map(|(i, _)| i)
            .collect()
    }

    fn main_entry(&self) -> Option<&SubproblemSpec> {
        self.partition.iter().find(|s| s.kind == SubproblemKind::Main)
    }

    /// Layout of the main problem when a partition is present: plain main
    /// members fill the slots left free by the group aggregates, in listed
    /// order. Without a partition every component maps to itself.
    pub fn main_layout(&self) -> Vec<MainSlot> {
        if self.partition.is_empty() {
            return (0..self.dim()).map(MainSlot::Component).collect();
        }
        let main = self.main_entry().expect("validated spec has a main entry");
        let groups = self.group_indices();
        let main_dim = main.member_indices.len() + groups.len();
        let mut layout = vec![None; main_dim];
        for &g in &groups {
            let agg = self.partition[g].aggregate.as_ref().expect("group has aggregate");
            layout[agg.slot] = Some(MainSlot::Aggregate(g));
        }
        let mut members = main.member_indices.iter().copied();
        for slot in layout.iter_mut() {
            if slot.is_none() {
                *slot = Some(MainSlot::Component(
                    members.next().expect("main members fill remaining slots"),
                ));
            }
        }
        layout.into_iter().map(|s| s.expect("slot filled")).collect()
    }

    /// Bounds of the main problem, in main-slot order.
    pub fn main_bounds(&self) -> Vec<ComponentBounds> {
        self.main_layout()
            .iter()
            .map(|slot| match slot {
                MainSlot::Component(i) => self.components[*i].clone(),
                MainSlot::Aggregate(g) => self.partition[*g]
                    .aggregate
                    .as_ref()
                    .expect("group has aggregate")
                    .bounds
                    .clone(),
            })
            .collect()
    }

    /// Intra-group bounds of one subproblem (the members' own bounds).
    pub fn subproblem_bounds(&self, sub: &SubproblemSpec) -> Vec<ComponentBounds> {
        sub.member_indices
            .iter()
            .map(|&i| self.components[i].clone())
            .collect()
    }

    /// Bounds each full-dimensional component can actually attain: a group
    /// member's fraction of the whole mixture is its intra-group fraction
    /// times the aggregate value.
    pub fn derived_full_bounds(&self) -> Vec<ComponentBounds> {
        if self.partition.is_empty() {
            return self.components.clone();
        }
        let mut out = self.components.clone();
        for &g in &self.group_indices() {
            let sub = &self.partition[g];
            let agg = sub.aggregate.as_ref().expect("group has aggregate");
            for &m in &sub.member_indices {
                out[m].lower *= agg.bounds.lower;
                out[m].upper *= agg.bounds.upper;
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.components.is_empty() {
            return Err(ProblemError::Schema("no components".into()));
        }
        if self.budget == 0 {
            return Err(ProblemError::Schema("budget must be positive".into()));
        }
        let mut seen = BTreeSet::new();
        for c in &self.components {
            c.validate()?;
            if !seen.insert(c.name.clone()) {
                return Err(ProblemError::Schema(format!(
                    "duplicate component name '{}'",
                    c.name
                )));
            }
        }
        check_mixture_feasible(&self.components)?;

        if self.partition.is_empty() {
            return Ok(());
        }

        let mains: Vec<_> = self
            .partition
            .iter()
            .filter(|s| s.kind == SubproblemKind::Main)
            .collect();
        if mains.len() != 1 {
            return Err(ProblemError::Partition(format!(
                "expected exactly one main entry, found {}",
                mains.len()
            )));
        }
        let mut covered = vec![false; self.dim()];
        for sub in &self.partition {
            if sub.member_indices.is_empty() {
                return Err(ProblemError::Partition("empty subproblem".into()));
            }
            if sub.dim() > 4 {
                return Err(ProblemError::Partition(format!(
                    "subproblem dimension {} exceeds 4",
                    sub.dim()
                )));
            }
            for &m in &sub.member_indices {
                if m >= self.dim() {
                    return Err(ProblemError::Partition(format!(
                        "member index {m} out of range"
                    )));
                }
                if covered[m] {
                    return Err(ProblemError::Partition(format!(
                        "component '{}' appears in more than one subproblem",
                        self.components[m].name
                    )));
                }
                covered[m] = true;
            }
            match (sub.kind, &sub.aggregate) {
                (SubproblemKind::Group, None) => {
                    return Err(ProblemError::Partition(
                        "group subproblem without aggregate slot".into(),
                    ))
                }
                (SubproblemKind::Main, Some(_)) => {
                    return Err(ProblemError::Partition(
                        "main subproblem must not declare an aggregate".into(),
                    ))
                }
                (SubproblemKind::Group, Some(agg)) => agg.bounds.validate()?,
                (SubproblemKind::Main, None) => {}
            }
            // Each group must itself admit a sum-to-one mixture.
            if sub.kind == SubproblemKind::Group {
                check_mixture_feasible(&self.subproblem_bounds(sub))?;
            }
        }
        if let Some(missing) = covered.iter().position(|c| !c) {
            return Err(ProblemError::Partition(format!(
                "component '{}' belongs to no subproblem",
                self.components[missing].name
            )));
        }

        let main = mains[0];
        let groups = self.group_indices();
        let main_dim = main.member_indices.len() + groups.len();
        if main_dim > 4 {
            return Err(ProblemError::Partition(format!(
                "main problem dimension {main_dim} exceeds 4"
            )));
        }
        let mut slots = BTreeSet::new();
        for &g in &groups {
            let agg = self.partition[g].aggregate.as_ref().unwrap();
            if agg.slot >= main_dim {
                return Err(ProblemError::Partition(format!(
                    "aggregate slot {} out of range for main dimension {main_dim}",
                    agg.slot
                )));
            }
            if !slots.insert(agg.slot) {
                return Err(ProblemError::Partition(format!(
                    "aggregate slot {} used twice",
                    agg.slot
                )));
            }
        }
        check_mixture_feasible(&self.main_bounds())?;
        Ok(())
    }
}

fn check_mixture_feasible(bounds: &[ComponentBounds]) -> Result<(), ProblemError> {
    let sum_lower: f64 = bounds.iter().map(|b| b.lower).sum();
    let sum_upper: f64 = bounds.iter().map(|b| b.upper).sum();
    if sum_lower > 1.0 {
        return Err(ProblemError::InfeasibleLowers { sum_lower });
    }
    if sum_upper < 1.0 {
        return Err(ProblemError::InfeasibleUppers { sum_upper });
    }
    Ok(())
}

/// Run-level sampling knobs carried by the config document. All optional;
/// command-line flags override, library defaults fill the rest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SamplingOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tot_samp: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rej: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter_dim2: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter_dim3: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oversample: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_size: Option<usize>,
}

// ---------------------------------------------------------------------------
// Config document (serde layer)
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ConfigDoc {
    components: Vec<ComponentBounds>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    partition: Vec<PartitionDoc>,
    budget: usize,
    #[serde(default = "default_decimals")]
    rounding_decimals: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sampling: Option<SamplingOptions>,
}

fn default_decimals() -> u32 {
    3
}

#[derive(Serialize, Deserialize)]
struct PartitionDoc {
    kind: SubproblemKind,
    members: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    aggregate: Option<AggregateDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    synthesis: Option<SynthesisDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tot_samp: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_rej: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct AggregateDoc {
    name: String,
    lower: f64,
    upper: f64,
    slot: usize,
}

#[derive(Serialize, Deserialize)]
struct SynthesisDoc {
    mode: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    allowed_pairs: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    allowed_singles: Vec<String>,
}

/// Parse and validate a config document, returning the problem only.
pub fn parse_problem_config(text: &str) -> Result<ProblemSpec, ProblemError> {
    parse_config_document(text).map(|(spec, _)| spec)
}

/// Parse and validate a config document, returning the problem and any
/// run-level sampling options it carries.
pub fn parse_config_document(text: &str) -> Result<(ProblemSpec, SamplingOptions), ProblemError> {
    let doc: ConfigDoc =
        serde_json::from_str(text).map_err(|e| ProblemError::Schema(e.to_string()))?;
    let name_index = |name: &str, components: &[ComponentBounds]| -> Result<usize, ProblemError> {
        components
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| ProblemError::Partition(format!("unknown component '{name}'")))
    };

    let mut partition = Vec::with_capacity(doc.partition.len());
    for p in &doc.partition {
        let member_indices = p
            .members
            .iter()
            .map(|m| name_index(m, &doc.components))
            .collect::<Result<Vec<_>, _>>()?;
        let synthesis = match &p.synthesis {
            None => None,
            Some(s) => Some(parse_synthesis(s, &p.members)?),
        };
        let aggregate = p.aggregate.as_ref().map(|a| AggregateSlot {
            bounds: ComponentBounds::new(a.name.clone(), a.lower, a.upper),
            slot: a.slot,
        });
        partition.push(SubproblemSpec {
            kind: p.kind,
            member_indices,
            aggregate,
            synthesis,
            tot_samp: p.tot_samp,
            max_rej: p.max_rej,
        });
    }

    let spec = ProblemSpec {
        components: doc.components,
        partition,
        budget: doc.budget,
        rounding_decimals: doc.rounding_decimals,
    };
    spec.validate()?;
    Ok((spec, doc.sampling.unwrap_or_default()))
}

fn parse_synthesis(s: &SynthesisDoc, members: &[String]) -> Result<SynthesisConstraint, ProblemError> {
    let member_pos = |name: &str| -> Result<usize, ProblemError> {
        members
            .iter()
            .position(|m| m == name)
            .ok_or_else(|| ProblemError::Partition(format!("synthesis names unknown member '{name}'")))
    };
    match s.mode.as_str() {
        "one_hot" => {
            if !s.allowed_pairs.is_empty() || !s.allowed_singles.is_empty() {
                return Err(ProblemError::Schema(
                    "one_hot synthesis takes no allowed_pairs/allowed_singles".into(),
                ));
            }
            Ok(SynthesisConstraint::OneHot)
        }
        "pairs" => {
            let mut pairs = BTreeSet::new();
            for [a, b] in &s.allowed_pairs {
                let (ia, ib) = (member_pos(a)?, member_pos(b)?);
                if ia == ib {
                    return Err(ProblemError::Schema(format!(
                        "allowed pair names the same member twice: '{a}'"
                    )));
                }
                pairs.insert((ia.min(ib), ia.max(ib)));
            }
            let singles = s
                .allowed_singles
                .iter()
                .map(|n| member_pos(n))
                .collect::<Result<BTreeSet<_>, _>>()?;
            if pairs.is_empty() && singles.is_empty() {
                return Err(ProblemError::Schema(
                    "pairs synthesis needs at least one allowed pair or single".into(),
                ));
            }
            Ok(SynthesisConstraint::Pairs {
                allowed_pairs: pairs,
                allowed_singles: singles,
            })
        }
        other => Err(ProblemError::Schema(format!(
            "unknown synthesis mode '{other}' (expected 'pairs' or 'one_hot')"
        ))),
    }
}

/// Serialize a problem back into the config-document schema. Parsing the
/// result reproduces the spec exactly.
pub fn serialize_problem_config(spec: &ProblemSpec) -> String {
    let partition = spec
        .partition
        .iter()
        .map(|sub| {
            let members: Vec<String> = sub
                .member_indices
                .iter()
                .map(|&i| spec.components[i].name.clone())
                .collect();
            let synthesis = sub.synthesis.as_ref().map(|syn| match syn {
                SynthesisConstraint::OneHot => SynthesisDoc {
                    mode: "one_hot".into(),
                    allowed_pairs: vec![],
                    allowed_singles: vec![],
                },
                SynthesisConstraint::Pairs {
                    allowed_pairs,
                    allowed_singles,
                } => SynthesisDoc {
                    mode: "pairs".into(),
                    allowed_pairs: allowed_pairs
                        .iter()
                        .map(|&(a, b)| [members[a].clone(), members[b].clone()])
                        .collect(),
                    allowed_singles: allowed_singles.iter().map(|&i| members[i].clone()).collect(),
                },
            });
            PartitionDoc {
                kind: sub.kind,
                aggregate: sub.aggregate.as_ref().map(|a| AggregateDoc {
                    name: a.bounds.name.clone(),
                    lower: a.bounds.lower,
                    upper: a.bounds.upper,
                    slot: a.slot,
                }),
                members,
                synthesis,
                tot_samp: sub.tot_samp,
                max_rej: sub.max_rej,
            }
        })
        .collect();
    let doc = ConfigDoc {
        components: spec.components.clone(),
        partition,
        budget: spec.budget,
        rounding_decimals: spec.rounding_decimals,
        sampling: None,
    };
    serde_json::to_string_pretty(&doc).expect("config serialization cannot fail")
}

// ---------------------------------------------------------------------------
// Experiment data
// ---------------------------------------------------------------------------

/// Previously collected compositions, columns in [`ProblemSpec`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentDataset {
    matrix: SampleMatrix,
}

impl ExperimentDataset {
    pub fn new(matrix: SampleMatrix) -> Self {
        Self { matrix }
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            matrix: SampleMatrix::empty(dim),
        }
    }

    pub fn n_exp(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.n_cols()
    }

    pub fn matrix(&self) -> &SampleMatrix {
        &self.matrix
    }
}

/// How to treat rows whose sum misses 1 beyond [`ROW_SUM_TOL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RowSumPolicy {
    /// Reject the row, reporting it.
    #[default]
    Strict,
    /// Renormalize the row to sum 1 (opt-in).
    Lenient,
}

/// Per-load diagnostics: rejected rows and kept-but-flagged rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadReport {
    /// (1-based data row, reason) for rows dropped by the sum check.
    pub rejected: Vec<(usize, String)>,
    /// 1-based data rows kept for distance calculations although they violate
    /// the current bounds (e.g. history collected under wider bounds).
    pub out_of_bounds: Vec<usize>,
    /// Rows renormalized under the lenient policy.
    pub renormalized: Vec<usize>,
}

/// Load an experiment CSV whose header names the spec components (any column
/// order). Rows failing the sum tolerance are rejected (or renormalized under
/// [`RowSumPolicy::Lenient`]); rows outside bounds are kept and flagged.
pub fn load_experiment_csv(
    path: impl AsRef<Path>,
    spec: &ProblemSpec,
    policy: RowSumPolicy,
) -> Result<(ExperimentDataset, LoadReport), ProblemError> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    let mut column_of = Vec::with_capacity(spec.dim());
    for c in &spec.components {
        let pos = headers
            .iter()
            .position(|h| h.trim() == c.name)
            .ok_or_else(|| ProblemError::MissingColumn(c.name.clone()))?;
        column_of.push(pos);
    }
    if headers.len() != spec.dim() {
        return Err(ProblemError::Data(format!(
            "expected {} columns, found {} in header",
            spec.dim(),
            headers.len()
        )));
    }

    let mut report = LoadReport::default();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let row_no = idx + 1;
        let mut row = Vec::with_capacity(spec.dim());
        for (comp, &col) in column_of.iter().enumerate() {
            let cell = record.get(col).ok_or_else(|| {
                ProblemError::Data(format!("row {row_no}: missing cell in column {col}"))
            })?;
            let v: f64 = cell.trim().parse().map_err(|_| {
                ProblemError::Data(format!(
                    "row {row_no}: non-numeric value '{}' for component '{}'",
                    cell, spec.components[comp].name
                ))
            })?;
            row.push(v);
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            match policy {
                RowSumPolicy::Strict => {
                    report
                        .rejected
                        .push((row_no, format!("row sum {sum} misses 1 beyond {ROW_SUM_TOL}")));
                    continue;
                }
                RowSumPolicy::Lenient => {
                    if sum <= 0.0 {
                        report
                            .rejected
                            .push((row_no, format!("row sum {sum} cannot be renormalized")));
                        continue;
                    }
                    for v in row.iter_mut() {
                        *v /= sum;
                    }
                    report.renormalized.push(row_no);
                }
            }
        }
        if row
            .iter()
            .zip(&spec.components)
            .any(|(v, b)| !b.contains(*v))
        {
            report.out_of_bounds.push(row_no);
        }
        rows.push(row);
    }

    let mut data = Array2::zeros((rows.len(), spec.dim()));
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            data[[i, j]] = *v;
        }
    }
    Ok((ExperimentDataset::new(SampleMatrix::new(data)), report))
}

/// Restrict a dataset to a group's member columns and renormalize each row to
/// sum 1. Rows with zero mass inside the group carry no information about
/// intra-group ratios and are dropped; their indices are returned.
pub fn rescale_dataset_to_subproblem(
    data: &ExperimentDataset,
    sub: &SubproblemSpec,
) -> (ExperimentDataset, Vec<usize>) {
    let mut kept: Vec<Vec<f64>> = Vec::new();
    let mut dropped = Vec::new();
    for (i, row) in data.matrix().rows().enumerate() {
        let members: Vec<f64> = sub.member_indices.iter().map(|&m| row[m]).collect();
        let sum: f64 = members.iter().sum();
        if sum == 0.0 {
            dropped.push(i);
            continue;
        }
        kept.push(members.iter().map(|v| v / sum).collect());
    }
    (
        ExperimentDataset::new(SampleMatrix::from_rows(&kept, sub.dim())),
        dropped,
    )
}

/// Project a dataset onto the main problem: plain members are copied, each
/// group collapses to the sum of its members.
pub fn aggregate_dataset_to_main(data: &ExperimentDataset, spec: &ProblemSpec) -> ExperimentDataset {
    let layout = spec.main_layout();
    let mut out = Array2::zeros((data.n_exp(), layout.len()));
    for (i, row) in data.matrix().rows().enumerate() {
        for (j, slot) in layout.iter().enumerate() {
            out[[i, j]] = match slot {
                MainSlot::Component(c) => row[*c],
                MainSlot::Aggregate(g) => spec.partition[*g]
                    .member_indices
                    .iter()
                    .map(|&m| row[m])
                    .sum(),
            };
        }
    }
    ExperimentDataset::new(SampleMatrix::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    pub(crate) fn four_dim_config() -> String {
        r#"{
            "components": [
                {"name": "PA-56", "lower": 0.8, "upper": 1.0},
                {"name": "PhA", "lower": 0.0, "upper": 0.05},
                {"name": "amino", "lower": 0.0, "upper": 0.1},
                {"name": "metal", "lower": 0.0, "upper": 0.14}
            ],
            "budget": 15,
            "rounding_decimals": 3
        }"#
        .to_string()
    }

    #[test]
    fn four_component_config_parses() {
        let spec = parse_problem_config(&four_dim_config()).unwrap();
        assert_eq!(spec.dim(), 4);
        assert_eq!(spec.components[0].lower, 0.8);
        assert!(spec.partition.is_empty());
    }

    #[test]
    fn loosest_two_component_config_is_feasible() {
        let text = r#"{
            "components": [
                {"name": "a", "lower": 0.0, "upper": 1.0},
                {"name": "b", "lower": 0.0, "upper": 1.0}
            ],
            "budget": 3
        }"#;
        let spec = parse_problem_config(text).unwrap();
        assert_eq!(spec.rounding_decimals, 3);
    }

    #[test]
    fn infeasible_lowers_rejected() {
        let text = r#"{
            "components": [
                {"name": "a", "lower": 0.6, "upper": 1.0},
                {"name": "b", "lower": 0.6, "upper": 1.0}
            ],
            "budget": 3
        }"#;
        match parse_problem_config(text) {
            Err(ProblemError::InfeasibleLowers { sum_lower }) => {
                assert!((sum_lower - 1.2).abs() < 1e-12)
            }
            other => panic!("expected infeasibility error, got {other:?}"),
        }
    }

    #[test]
    fn overlapping_partition_rejected() {
        let text = r#"{
            "components": [
                {"name": "a", "lower": 0.0, "upper": 1.0},
                {"name": "b", "lower": 0.0, "upper": 1.0}
            ],
            "partition": [
                {"kind": "main", "members": ["a", "b"]},
                {"kind": "group", "members": ["b"],
                 "aggregate": {"name": "g", "lower": 0.0, "upper": 1.0, "slot": 2}}
            ],
            "budget": 3
        }"#;
        assert!(matches!(
            parse_problem_config(text),
            Err(ProblemError::Partition(_))
        ));
    }

    #[test]
    fn main_layout_places_aggregates_at_slots() {
        let text = r#"{
            "components": [
                {"name": "x", "lower": 0.8, "upper": 1.0},
                {"name": "y", "lower": 0.0, "upper": 0.05},
                {"name": "g1", "lower": 0.0, "upper": 1.0},
                {"name": "g2", "lower": 0.0, "upper": 1.0}
            ],
            "partition": [
                {"kind": "main", "members": ["x", "y"]},
                {"kind": "group", "members": ["g1", "g2"],
                 "aggregate": {"name": "agg", "lower": 0.0, "upper": 0.1, "slot": 1}}
            ],
            "budget": 5
        }"#;
        let spec = parse_problem_config(text).unwrap();
        let layout = spec.main_layout();
        assert_eq!(layout[0], MainSlot::Component(0));
        assert_eq!(layout[1], MainSlot::Aggregate(1));
        assert_eq!(layout[2], MainSlot::Component(1));
        let bounds = spec.main_bounds();
        assert_eq!(bounds[1].name, "agg");
        assert_eq!(bounds[1].upper, 0.1);
    }

    #[test]
    fn config_round_trip_identity() {
        let text = r#"{
            "components": [
                {"name": "PA-56", "lower": 0.8, "upper": 1.0},
                {"name": "PhA", "lower": 0.0, "upper": 0.05},
                {"name": "CS", "lower": 0.0, "upper": 1.0},
                {"name": "MEL", "lower": 0.0, "upper": 1.0},
                {"name": "CaBO", "lower": 0.0, "upper": 1.0}
            ],
            "partition": [
                {"kind": "main", "members": ["PA-56", "PhA"]},
                {"kind": "group", "members": ["CS", "MEL"],
                 "aggregate": {"name": "amino", "lower": 0.0, "upper": 0.1, "slot": 2},
                 "synthesis": {"mode": "pairs",
                               "allowed_pairs": [["MEL", "CS"]],
                               "allowed_singles": ["CS", "MEL"]},
                 "tot_samp": 360, "max_rej": 11},
                {"kind": "group", "members": ["CaBO"],
                 "aggregate": {"name": "metal", "lower": 0.0, "upper": 0.14, "slot": 3},
                 "synthesis": {"mode": "one_hot"}}
            ],
            "budget": 15
        }"#;
        let spec = parse_problem_config(text).unwrap();
        let round = parse_problem_config(&serialize_problem_config(&spec)).unwrap();
        assert_eq!(spec, round);
    }

    #[test]
    fn csv_rows_validated() {
        let spec = parse_problem_config(&four_dim_config()).unwrap();
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "PA-56,PhA,amino,metal").unwrap();
        writeln!(file, "0.85,0.03,0.05,0.07").unwrap();
        writeln!(file, "0.9,0.2,0.0,0.0").unwrap();
        file.flush().unwrap();
        let (data, report) = load_experiment_csv(file.path(), &spec, RowSumPolicy::Strict).unwrap();
        assert_eq!(data.n_exp(), 1);
        assert_eq!(report.rejected.len(), 1);
        assert_eq!(report.rejected[0].0, 2);
    }

    #[test]
    fn csv_missing_column_reported() {
        let spec = parse_problem_config(&four_dim_config()).unwrap();
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "PA-56,PhA,amino").unwrap();
        writeln!(file, "0.9,0.05,0.05").unwrap();
        file.flush().unwrap();
        match load_experiment_csv(file.path(), &spec, RowSumPolicy::Strict) {
            Err(ProblemError::MissingColumn(c)) => assert_eq!(c, "metal"),
            other => panic!("expected missing column, got {other:?}"),
        }
    }

    #[test]
    fn rescale_renormalizes_member_columns() {
        let spec = ProblemSpec {
            components: vec![
                ComponentBounds::new("a", 0.0, 1.0),
                ComponentBounds::new("b", 0.0, 1.0),
                ComponentBounds::new("c", 0.0, 1.0),
                ComponentBounds::new("d", 0.0, 1.0),
            ],
            partition: vec![],
            budget: 1,
            rounding_decimals: 3,
        };
        let sub = SubproblemSpec {
            kind: SubproblemKind::Group,
            member_indices: vec![0, 1, 2, 3],
            aggregate: None,
            synthesis: None,
            tot_samp: None,
            max_rej: None,
        };
        let data = ExperimentDataset::new(SampleMatrix::from_rows(
            &[
                vec![0.02, 0.0, 0.02, 0.0],
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.5, 0.0],
            ],
            4,
        ));
        let (sub_data, dropped) = rescale_dataset_to_subproblem(&data, &sub);
        assert_eq!(dropped, vec![1]);
        assert_eq!(sub_data.n_exp(), 2);
        assert_eq!(sub_data.matrix().row(0).to_vec(), vec![0.5, 0.0, 0.5, 0.0]);
        assert_eq!(sub_data.matrix().row(1).to_vec(), vec![0.5, 0.0, 0.5, 0.0]);
        for row in sub_data.matrix().rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
        let _ = spec;
    }
}
