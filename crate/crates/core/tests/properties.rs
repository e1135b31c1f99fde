use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use trendcast::corpus::{
    first_occurrence_year, first_valid_year, training_start_year, CorpusBuilder, CorpusStore, GlobalYearStats,
    WindowConvention, YearCounts,
};
use trendcast::evaluation::{pearson, regression_metrics, temporal_splits, topic_splits};
use trendcast::features::{build_feature_rows, FeatureOptions};

fn brute_active(series: &YearCounts, y: i32) -> bool {
    series.get(&y).copied().unwrap_or(0) > 0
}

fn brute_count(series: &YearCounts, from: i32, to: i32) -> usize {
    (from..=to).filter(|&y| y >= 1946 && brute_active(series, y)).count()
}

fn brute_first_valid(series: &YearCounts) -> Option<i32> {
    (1946..=2035).find(|&y| brute_active(series, y) && brute_count(series, y - 5, y - 1) >= 4)
}

fn brute_training_start(series: &YearCounts, convention: WindowConvention) -> Option<i32> {
    (1979..=2100).find(|&y| {
        let window = match convention {
            WindowConvention::IncludeCurrent => brute_count(series, y - 4, y),
            WindowConvention::PrecedingOnly => brute_count(series, y - 5, y - 1),
        };
        window >= 4 && brute_count(series, 1979, y) >= 5
    })
}

fn series_strategy() -> impl Strategy<Value = YearCounts> {
    (1946..2000i32, prop::collection::vec(prop_oneof![3 => Just(0u64), 7 => 1..50u64], 1..=80)).prop_map(
        |(start, counts)| {
            counts
                .into_iter()
                .enumerate()
                .map(|(i, c)| (start + i as i32, c))
                .filter(|&(y, _)| y <= 2035)
                .collect()
        },
    )
}

/// Random small corpus: topics with yearly counts over a shared span.
fn corpus_strategy() -> impl Strategy<Value = CorpusStore> {
    let topic = prop::collection::vec((prop_oneof![1 => Just(0u64), 4 => 1..400u64], 0..=100u64), 30);
    (prop::collection::vec(topic, 1..5), 1975..1985i32).prop_map(|(topics, first)| {
        let mut b = CorpusBuilder::new();
        for (k, year) in (first..first + 30).enumerate() {
            b.add_global(GlobalYearStats {
                year,
                medline_total: 300_000 + 7_919 * k as u64,
                us_publication_fraction: 0.4,
                patents_total: 5_000,
            })
            .unwrap();
        }
        for (i, series) in topics.iter().enumerate() {
            for (k, &(publications, review_pct)) in series.iter().enumerate() {
                let reviews = publications * review_pct / 100;
                b.add_count(&format!("t{i}"), first + k as i32, publications, reviews).unwrap();
                b.add_patents(&format!("t{i}"), first + k as i32, (publications * 3) % 17).unwrap();
            }
        }
        b.build().unwrap()
    })
}

proptest! {
    #[test]
    fn lifecycle_matches_brute_force(series in series_strategy()) {
        prop_assert_eq!(first_valid_year(&series), brute_first_valid(&series));
        for c in [WindowConvention::IncludeCurrent, WindowConvention::PrecedingOnly] {
            prop_assert_eq!(training_start_year(&series, c), brute_training_start(&series, c));
        }
        let first = first_occurrence_year(&series);
        prop_assert_eq!(first, series.iter().find(|(_, &n)| n > 0).map(|(&y, _)| y));
        if let (Some(o), Some(v)) = (first, first_valid_year(&series)) {
            prop_assert!(o <= v);
        }
        if let (Some(o), Some(s)) = (first, training_start_year(&series, WindowConvention::IncludeCurrent)) {
            prop_assert!(o <= s);
        }
    }

    #[test]
    fn popularity_points_match_raw_counts(store in corpus_strategy()) {
        for topic in store.topics() {
            for (year, point) in &topic.points {
                let count = &topic.counts[year];
                let total = store.global(*year).unwrap().medline_total as f64;
                let expect = 100_000.0 * count.publications as f64 / total;
                prop_assert!((point.popularity - expect).abs() <= 1e-12 * expect.max(1e-300));
                let sum = point.review_popularity + point.research_popularity;
                prop_assert!((sum - point.popularity).abs() <= 1e-9 * point.popularity.max(1e-300));
            }
        }
    }

    #[test]
    fn features_are_deterministic_and_consistent(store in corpus_strategy()) {
        let options = FeatureOptions { from_year: 1979, ..FeatureOptions::default() };
        let a = build_feature_rows(&store, &options).unwrap();
        let b = build_feature_rows(&store, &options).unwrap();
        prop_assert_eq!(&a, &b);
        let lag0 = a.schema.index_of("pop_lag0").unwrap();
        let window = a.schema.index_of("pop_window_mean_5_10").unwrap();
        for row in &a.rows {
            prop_assert_eq!(row.features[lag0], Some(store.popularity(&row.topic_id, row.base_year)));
            let brute: f64 = [5, 6, 7, 8, 9, 10].iter().map(|k| store.popularity(&row.topic_id, row.base_year - k)).sum::<f64>() / 6.0;
            prop_assert!((row.features[window].unwrap() - brute).abs() <= 1e-12 * brute.abs().max(1.0));
        }
    }
}

fn rebuild_with_future_noise(store: &CorpusStore, cutoff: i32, bump: u64) -> CorpusStore {
    let mut b = CorpusBuilder::new();
    for g in store.global_stats() {
        let mut g = g.clone();
        if g.year > cutoff {
            g.medline_total += 1_000 * bump;
            g.us_publication_fraction = 0.9;
            g.patents_total += bump;
        }
        b.add_global(g).unwrap();
    }
    for topic in store.topics() {
        let id = &topic.meta.topic_id;
        for (&year, c) in &topic.counts {
            let extra = if year > cutoff { bump } else { 0 };
            b.add_count(id, year, c.publications + extra, c.review_publications + extra / 2).unwrap();
        }
        for (&year, &p) in &topic.patents {
            b.add_patents(id, year, if year > cutoff { p + bump } else { p }).unwrap();
        }
    }
    b.build().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn future_data_never_reaches_features(store in corpus_strategy(), offset in 0..25i32, bump in 1..500u64) {
        let first = store.global_stats().next().unwrap().year;
        let cutoff = first + offset;
        let changed = rebuild_with_future_noise(&store, cutoff, bump);
        let options = FeatureOptions { from_year: 1979, ..FeatureOptions::default() };
        let before = build_feature_rows(&store, &options).unwrap();
        let after = build_feature_rows(&changed, &options).unwrap();
        let key = |t: &trendcast::FeatureTable| -> BTreeMap<(String, i32), Vec<Option<u64>>> {
            t.rows
                .iter()
                .filter(|r| r.base_year <= cutoff)
                .map(|r| ((r.topic_id.clone(), r.base_year), r.features.iter().map(|v| v.map(f64::to_bits)).collect()))
                .collect()
        };
        // Rows present in both tables agree bit for bit. Future data can only
        // add rows (training start is a property of the whole series).
        let (kb, ka) = (key(&before), key(&after));
        for (k, v) in &kb {
            if let Some(w) = ka.get(k) {
                prop_assert_eq!(v, w, "{:?}", k);
            }
        }
    }
}

fn brute_median(v: &[f64]) -> f64 {
    // Selection by rank counting, independent of sorting.
    let n = v.len();
    let kth = |k: usize| -> f64 {
        *v.iter()
            .find(|&&x| {
                let less = v.iter().filter(|&&y| y < x).count();
                let equal = v.iter().filter(|&&y| y == x).count();
                less <= k && k < less + equal
            })
            .unwrap()
    };
    if n % 2 == 1 {
        kth(n / 2)
    } else {
        (kth(n / 2 - 1) + kth(n / 2)) / 2.0
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn metrics_match_straight_line_formulas(
        pairs in prop::collection::vec((-1e3..1e3f64, -1e3..1e3f64), 2..200)
    ) {
        let y: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let p: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let m = regression_metrics(&y, &p).unwrap();
        let n = y.len() as f64;
        let mut mean = 0.0;
        for v in &y { mean += v; }
        mean /= n;
        let (mut ss_res, mut ss_tot, mut abs_sum) = (0.0, 0.0, 0.0);
        let mut abs = Vec::new();
        for i in 0..y.len() {
            ss_res += (y[i] - p[i]).powi(2);
            ss_tot += (y[i] - mean).powi(2);
            abs_sum += (y[i] - p[i]).abs();
            abs.push((y[i] - p[i]).abs());
        }
        let r2 = 1.0 - ss_res / ss_tot;
        prop_assert!((m.r2.unwrap() - r2).abs() <= 1e-9 * r2.abs().max(1.0));
        prop_assert!((m.mae - abs_sum / n).abs() <= 1e-9);
        prop_assert!((m.medae - brute_median(&abs)).abs() <= 1e-9);
        prop_assert!((m.rmse - (ss_res / n).sqrt()).abs() <= 1e-9);
        prop_assert!(m.rmse >= m.mae - 1e-12);

        if y.len() >= 3 {
            let mp = p.iter().sum::<f64>() / n;
            let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
            for i in 0..y.len() {
                sxy += (y[i] - mean) * (p[i] - mp);
                sxx += (y[i] - mean).powi(2);
                syy += (p[i] - mp).powi(2);
            }
            let r = sxy / (sxx * syy).sqrt();
            prop_assert!((pearson(&y, &p).unwrap().r - r).abs() <= 1e-9);
        }
    }
}

fn rows_strategy() -> impl Strategy<Value = (Vec<(usize, i32)>, usize)> {
    (2..40usize, 1..60usize).prop_flat_map(|(n_topics, n_years)| {
        (
            prop::collection::vec((0..n_topics, 1979..1979 + n_years as i32), 1..300),
            1..=30usize,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn split_invariants((rows, n_splits) in rows_strategy(), seed in any::<u64>()) {
        let years: Vec<i32> = rows.iter().map(|r| r.1).collect();
        let names: Vec<String> = rows.iter().map(|r| format!("t{}", r.0)).collect();
        let topics: Vec<&str> = names.iter().map(String::as_str).collect();

        let distinct_years: BTreeSet<i32> = years.iter().copied().collect();
        match temporal_splits(&years, n_splits) {
            Ok(plan) => {
                prop_assert_eq!(plan.folds.len(), n_splits);
                let mut seen_test = BTreeSet::new();
                let mut previous_train = 0;
                for fold in &plan.folds {
                    let max_train = fold.train.iter().map(|&i| years[i]).max().unwrap();
                    let min_test = fold.test.iter().map(|&i| years[i]).min().unwrap();
                    prop_assert!(max_train < min_test);
                    prop_assert!(fold.train.len() > previous_train);
                    previous_train = fold.train.len();
                    for &i in &fold.test {
                        prop_assert!(seen_test.insert(i));
                    }
                }
            }
            Err(_) => prop_assert!(distinct_years.len() < n_splits + 1),
        }

        let distinct_topics: BTreeSet<&str> = topics.iter().copied().collect();
        match topic_splits(&topics, n_splits, seed) {
            Ok(plan) => {
                let mut tested: BTreeMap<&str, usize> = BTreeMap::new();
                for fold in &plan.folds {
                    let train: BTreeSet<&str> = fold.train.iter().map(|&i| topics[i]).collect();
                    let test: BTreeSet<&str> = fold.test.iter().map(|&i| topics[i]).collect();
                    prop_assert!(train.is_disjoint(&test));
                    prop_assert_eq!(fold.train.len() + fold.test.len(), topics.len());
                    for t in test {
                        *tested.entry(t).or_default() += 1;
                    }
                }
                prop_assert_eq!(tested.len(), distinct_topics.len());
                prop_assert!(tested.values().all(|&c| c == 1));
            }
            Err(_) => prop_assert!(distinct_topics.len() < n_splits),
        }
    }
}
