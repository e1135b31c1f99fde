use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    /// Expanding window over base years.
    Temporal,
    /// Held-out topic groups.
    Topic,
}

impl SplitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitKind::Temporal => "temporal",
            SplitKind::Topic => "topic",
        }
    }
}

impl fmt::Display for SplitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "temporal" => Ok(SplitKind::Temporal),
            "topic" | "topic_group" => Ok(SplitKind::Topic),
            other => Err(format!("unknown split `{other}` (expected temporal or topic)")),
        }
    }
}

/// Row indices of one train/test partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub kind: SplitKind,
    pub n_splits: usize,
    pub folds: Vec<Fold>,
}

/// Year blocks of an expanding-window split: `(train years, test years)`.
///
/// With `m` distinct years, each test block holds `m / (n + 1)` years and
/// the initial training block takes the rest.
pub fn temporal_year_blocks(years: &BTreeSet<i32>, n_splits: usize) -> Result<Vec<(Vec<i32>, Vec<i32>)>, EvalError> {
    let m = years.len();
    if n_splits == 0 || m < n_splits + 1 {
        return Err(EvalError::TooFewGroups {
            what: "distinct base years",
            needed: n_splits.max(1) + 1,
            got: m,
        });
    }
    let sorted: Vec<i32> = years.iter().copied().collect();
    let test_size = m / (n_splits + 1);
    let initial = m - n_splits * test_size;
    Ok((0..n_splits)
        .map(|i| {
            let start = initial + i * test_size;
            (sorted[..start].to_vec(), sorted[start..start + test_size].to_vec())
        })
        .collect())
}

pub fn temporal_splits(base_years: &[i32], n_splits: usize) -> Result<SplitPlan, EvalError> {
    let years: BTreeSet<i32> = base_years.iter().copied().collect();
    let blocks = temporal_year_blocks(&years, n_splits)?;
    let folds = blocks
        .into_iter()
        .map(|(train_years, test_years)| {
            let last_train = *train_years.last().expect("initial block is non-empty");
            let (first_test, last_test) = (test_years[0], *test_years.last().unwrap());
            let pick = |pred: &dyn Fn(i32) -> bool| -> Vec<usize> {
                (0..base_years.len()).filter(|&i| pred(base_years[i])).collect()
            };
            Fold {
                train: pick(&|y| y <= last_train),
                test: pick(&|y| (first_test..=last_test).contains(&y)),
            }
        })
        .collect();
    Ok(SplitPlan {
        kind: SplitKind::Temporal,
        n_splits,
        folds,
    })
}

/// Fold index of each distinct topic: sorted, shuffled with `seed`, then
/// dealt round-robin.
pub fn topic_fold_assignment(topics: &BTreeSet<&str>, n_folds: usize, seed: u64) -> Result<BTreeMap<String, usize>, EvalError> {
    if n_folds == 0 || topics.len() < n_folds {
        return Err(EvalError::TooFewGroups {
            what: "distinct topics",
            needed: n_folds.max(1),
            got: topics.len(),
        });
    }
    let mut order: Vec<&str> = topics.iter().copied().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(i, t)| (t.to_string(), i % n_folds))
        .collect())
}

pub fn topic_splits(topics: &[&str], n_folds: usize, seed: u64) -> Result<SplitPlan, EvalError> {
    let distinct: BTreeSet<&str> = topics.iter().copied().collect();
    let assignment = topic_fold_assignment(&distinct, n_folds, seed)?;
    let folds = (0..n_folds)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..topics.len()).partition(|&i| assignment[topics[i]] == f);
            Fold { train, test }
        })
        .collect();
    Ok(SplitPlan {
        kind: SplitKind::Topic,
        n_splits: n_folds,
        folds,
    })
}
