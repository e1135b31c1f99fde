//! Topic lifecycle dates: first occurrence, first "valid" year, and the
//! first year a topic is eligible for model training.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{MIN_YEAR, MODERN_ERA_START};

/// Publications per year for a single topic. Absent years count as zero.
pub type YearCounts = BTreeMap<i32, u64>;

/// Which five-year window the training-start rule inspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowConvention {
    /// `[y-4, y]`: the candidate year counts toward its own window.
    #[default]
    IncludeCurrent,
    /// `[y-5, y-1]`: only the preceding five years.
    PrecedingOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LifecycleDates {
    pub first_occurrence: Option<i32>,
    pub first_valid: Option<i32>,
    pub training_start: Option<i32>,
}

impl LifecycleDates {
    pub fn compute(series: &YearCounts, convention: WindowConvention) -> Self {
        Self {
            first_occurrence: first_occurrence_year(series),
            first_valid: first_valid_year(series),
            training_start: training_start_year(series, convention),
        }
    }
}

fn active_years(series: &YearCounts) -> impl Iterator<Item = i32> + '_ {
    series
        .range(MIN_YEAR..)
        .filter(|(_, &n)| n > 0)
        .map(|(&y, _)| y)
}

/// Number of active years in `[from, to]`.
fn active_in(series: &YearCounts, from: i32, to: i32) -> usize {
    let from = from.max(MIN_YEAR);
    if from > to {
        return 0;
    }
    series
        .range(from..=to)
        .filter(|(_, &n)| n > 0)
        .count()
}

/// First year (from 1946 on) with at least one publication.
pub fn first_occurrence_year(series: &YearCounts) -> Option<i32> {
    active_years(series).next()
}

/// First active year whose preceding five years hold at least four active
/// years.
pub fn first_valid_year(series: &YearCounts) -> Option<i32> {
    active_years(series).find(|&y| active_in(series, y - 5, y - 1) >= 4)
}

/// First year from 1979 on where four of the last five years are active and
/// at least five active years have accumulated since 1979.
pub fn training_start_year(series: &YearCounts, convention: WindowConvention) -> Option<i32> {
    let last = *series.keys().next_back()?;
    // Both conditions only change at active years or one window-length past
    // them, so scanning every year up to `last + 5` is exhaustive.
    let mut cumulative = 0;
    for y in MODERN_ERA_START..=last + 5 {
        if series.get(&y).is_some_and(|&n| n > 0) {
            cumulative += 1;
        }
        let window = match convention {
            WindowConvention::IncludeCurrent => active_in(series, y - 4, y),
            WindowConvention::PrecedingOnly => active_in(series, y - 5, y - 1),
        };
        if window >= 4 && cumulative >= 5 {
            return Some(y);
        }
    }
    None
}
