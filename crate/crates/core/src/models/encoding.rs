//! Ordered target encoding of the topic categorical.
//!
//! During training each row sees only the targets of rows that precede it
//! in time order, so a row's encoded value never depends on its own target.
//! At inference the full per-topic smoothed mean is used.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

pub const DEFAULT_SMOOTHING: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetEncoding<T> {
    /// Per-topic smoothed mean over all training rows.
    pub table: BTreeMap<String, T>,
    /// Mean of all training targets; the value for unseen topics.
    pub prior: T,
    pub smoothing: T,
}

impl<T: Scalar> TargetEncoding<T> {
    pub fn encode(&self, topic: &str) -> T {
        self.table.get(topic).copied().unwrap_or(self.prior)
    }
}

/// Encodes rows already in time order (base year, then topic id).
///
/// Row `i` gets `(sum of earlier same-topic targets + prior * a) /
/// (count of earlier same-topic rows + a)` where `prior` is the mean of all
/// earlier targets (0 before the first row).
pub fn ordered_target_encode<T: Scalar>(
    topics: &[&str],
    targets: &[T],
    smoothing: T,
) -> (Vec<T>, TargetEncoding<T>) {
    assert_eq!(topics.len(), targets.len());
    let mut per_topic: BTreeMap<&str, (T, usize)> = BTreeMap::new();
    let mut running_sum = T::zero();
    let mut encoded = Vec::with_capacity(targets.len());
    for (i, (&topic, &y)) in topics.iter().zip(targets).enumerate() {
        let prior = if i == 0 {
            T::zero()
        } else {
            running_sum / T::of_usize(i)
        };
        let (sum, count) = per_topic.get(topic).copied().unwrap_or((T::zero(), 0));
        encoded.push((sum + prior * smoothing) / (T::of_usize(count) + smoothing));
        per_topic.insert(topic, (sum + y, count + 1));
        running_sum = running_sum + y;
    }
    let prior = if targets.is_empty() {
        T::zero()
    } else {
        running_sum / T::of_usize(targets.len())
    };
    let table = per_topic
        .into_iter()
        .map(|(topic, (sum, count))| {
            (
                topic.to_string(),
                (sum + prior * smoothing) / (T::of_usize(count) + smoothing),
            )
        })
        .collect();
    (
        encoded,
        TargetEncoding {
            table,
            prior,
            smoothing,
        },
    )
}

/// Sorts rows into (base year, topic) order, encodes, and returns the
/// encoded values in the caller's original order.
pub fn encode_in_time_order<T: Scalar>(
    base_years: &[i32],
    topics: &[&str],
    targets: &[T],
    smoothing: T,
) -> (Vec<T>, TargetEncoding<T>) {
    let mut order: Vec<usize> = (0..topics.len()).collect();
    order.sort_by(|&a, &b| {
        base_years[a]
            .cmp(&base_years[b])
            .then_with(|| topics[a].cmp(topics[b]))
            .then(a.cmp(&b))
    });
    let sorted_topics: Vec<&str> = order.iter().map(|&i| topics[i]).collect();
    let sorted_targets: Vec<T> = order.iter().map(|&i| targets[i]).collect();
    let (encoded_sorted, encoding) = ordered_target_encode(&sorted_topics, &sorted_targets, smoothing);
    let mut encoded = vec![T::zero(); topics.len()];
    for (pos, &i) in order.iter().enumerate() {
        encoded[i] = encoded_sorted[pos];
    }
    (encoded, encoding)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_row_of_a_topic_gets_the_prior() {
        let (enc, _) = ordered_target_encode(&["a", "b"], &[4.0, 9.0], 1.0);
        assert_eq!(enc[0], 0.0);
        // prior is the mean of earlier targets: 4
        assert_eq!(enc[1], 4.0);
    }

    #[test]
    fn one_earlier_row_with_zero_prior() {
        // The other topic's -10 cancels the running mean to exactly 0.
        let (enc, _) = ordered_target_encode(&["z", "a", "a"], &[-10.0, 10.0, 3.0], 1.0);
        assert_eq!(enc[2], (10.0 + 0.0) / (1.0 + 1.0));
        assert_eq!(enc[2], 5.0);
    }

    #[test]
    fn unseen_topic_falls_back_to_global_mean() {
        let (_, table) = ordered_target_encode(&["a", "b", "a"], &[1.0, 2.0, 6.0], 1.0);
        assert_eq!(table.prior, 3.0);
        assert_eq!(table.encode("never seen"), 3.0);
        assert_eq!(table.encode("a"), (7.0 + 3.0) / 3.0);
        assert_eq!(table.encode("b"), (2.0 + 3.0) / 2.0);
    }

    #[test]
    fn own_target_never_leaks() {
        let topics = ["a", "b", "a", "c", "b", "a"];
        let targets = [1.0, 5.0, 2.0, 7.0, 3.0, 8.0];
        let (base, _) = ordered_target_encode(&topics, &targets, 1.0);
        for i in 0..targets.len() {
            let mut mutated = targets;
            mutated[i] += 1000.0;
            let (enc, _) = ordered_target_encode(&topics, &mutated, 1.0);
            assert_eq!(enc[i], base[i]);
        }
    }

    #[test]
    fn time_order_wrapper_scatters_back() {
        let years = [2001, 2000, 2000];
        let topics = ["a", "b", "a"];
        let targets = [3.0, 2.0, 1.0];
        let (enc, _) = encode_in_time_order(&years, &topics, &targets, 1.0);
        // time order: (2000,a)=1, (2000,b)=2, (2001,a)=3
        assert_eq!(enc[2], 0.0);
        assert_eq!(enc[1], 1.0);
        assert_eq!(enc[0], (1.0 + 1.5) / 2.0);
    }
}
