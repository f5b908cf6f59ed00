//! Manufacturability projection of group rows.
//!
//! Sampled group compositions are continuous, but synthesis may only allow
//! certain co-occurrences: either a listed set of pairs/singles, or strict
//! one-component exclusivity. Rows are projected onto the nearest allowed
//! support and renormalized so fractions still sum to one.

use thiserror::Error;

use crate::problem::SynthesisConstraint;

/// Which projection rule produced the output row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisRule {
    /// The dominant component was rounded up to the whole fraction.
    SingleRounded,
    /// An allowed pair was kept and renormalized.
    PairKept,
    /// One-hot exclusivity projection.
    OneHot,
}

/// A synthesizable row: fractions summing to one over an allowed support.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisOutcome {
    pub row: Vec<f64>,
    /// Indices of the nonzero components, ascending.
    pub support: Vec<usize>,
    pub rule_applied: SynthesisRule,
}

#[derive(Debug, Clone, Error)]
#[error("row rejected by synthesis constraint: {reason}")]
pub struct SynthesisReject {
    pub reason: String,
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in row.iter().enumerate().skip(1) {
        if *v > row[best] {
            best = i;
        }
    }
    best
}

fn support_of(row: &[f64]) -> Vec<usize> {
    row.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// Project a row under pair-combination rules.
///
/// With a dominant component (fraction at least 0.5): keep it together with
/// the second-largest component when they form an allowed pair, renormalizing
/// the two survivors; otherwise round the dominant component to 1, which
/// requires it to be an allowed single. Without a dominant component, fall
/// back to the allowed pair or single carrying the greatest mass (pairs with
/// a zero member compete as singles). Ties resolve to the lowest indices.
pub fn apply_pair_synthesis(
    row: &[f64],
    constraint: &SynthesisConstraint,
) -> Result<SynthesisOutcome, SynthesisReject> {
    let SynthesisConstraint::Pairs {
        allowed_pairs,
        allowed_singles,
    } = constraint
    else {
        return Err(SynthesisReject {
            reason: "pair projection called with a non-pairs constraint".into(),
        });
    };

    let k_star = argmax(row);
    if row[k_star] >= 0.5 {
        let mut second = None;
        for (i, v) in row.iter().enumerate() {
            if i == k_star {
                continue;
            }
            let better = match second {
                None => true,
                Some(s) => *v > row[s],
            };
            if better {
                second = Some(i);
            }
        }
        if let Some(second) = second {
            let key = (k_star.min(second), k_star.max(second));
            if row[second] > 0.0 && allowed_pairs.contains(&key) {
                return Ok(keep_pair(row, k_star, second));
            }
        }
        if allowed_singles.contains(&k_star) {
            let mut out = vec![0.0; row.len()];
            out[k_star] = 1.0;
            return Ok(SynthesisOutcome {
                support: vec![k_star],
                row: out,
                rule_applied: SynthesisRule::SingleRounded,
            });
        }
        return Err(SynthesisReject {
            reason: format!(
                "dominant component {k_star} forms no allowed pair and is not an allowed single"
            ),
        });
    }

    // No dominant component: take the allowed combination with the most mass.
    let mut best: Option<(f64, SynthesisOutcome)> = None;
    for &(a, b) in allowed_pairs {
        if row[a] == 0.0 || row[b] == 0.0 {
            continue;
        }
        let mass = row[a] + row[b];
        if best.as_ref().map_or(true, |(m, _)| mass > *m) {
            best = Some((mass, keep_pair(row, a, b)));
        }
    }
    for &s in allowed_singles {
        if row[s] == 0.0 {
            continue;
        }
        if best.as_ref().map_or(true, |(m, _)| row[s] > *m) {
            let mut out = vec![0.0; row.len()];
            out[s] = 1.0;
            best = Some((
                row[s],
                SynthesisOutcome {
                    support: vec![s],
                    row: out,
                    rule_applied: SynthesisRule::SingleRounded,
                },
            ));
        }
    }
    best.map(|(_, outcome)| outcome).ok_or_else(|| SynthesisReject {
        reason: "no allowed pair or single carries any mass".into(),
    })
}

fn keep_pair(row: &[f64], a: usize, b: usize) -> SynthesisOutcome {
    let sum = row[a] + row[b];
    let mut out = vec![0.0; row.len()];
    out[a] = row[a] / sum;
    out[b] = row[b] / sum;
    SynthesisOutcome {
        support: support_of(&out),
        row: out,
        rule_applied: SynthesisRule::PairKept,
    }
}

/// One-hot projection: the component with the maximum fraction takes 1, all
/// others 0. Ties break to the lowest index.
pub fn apply_onehot_synthesis(row: &[f64]) -> SynthesisOutcome {
    let k = argmax(row);
    let mut out = vec![0.0; row.len()];
    out[k] = 1.0;
    SynthesisOutcome {
        support: vec![k],
        row: out,
        rule_applied: SynthesisRule::OneHot,
    }
}
