use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde_json::json;
use trendcast::corpus::{ingest, CorpusPaths, WindowConvention, MAX_YEAR, MIN_YEAR};
use trendcast::evaluation::correlation::{correlation_profile, write_profiles_csv};
use trendcast::evaluation::experiment::{format_pooled_table, write_reports_csv};
use trendcast::evaluation::movers::forecast_movers;
use trendcast::evaluation::{permutation_importance, rank_movers, run_experiment, ExperimentConfig};
use trendcast::features::{build_feature_rows, FeatureOptions, MAX_HORIZON, MIN_HORIZON};
use trendcast::models::persist;
use trendcast::synthetic::{leading_indicator_corpus, SyntheticConfig};
use trendcast::{CorpusStore, FeatureTable, FitConfig, TrainParams, TrainedModel};
use trendcast_service::forecast::{forecast_batch, forecast_topic, ForecastRequest};
use trendcast_service::{Registry, ServeConfig};

use crate::args::*;
use crate::fetch::{fetch_into, PatentClient};
use crate::CliError;

type Result<T, E = CliError> = std::result::Result<T, E>;

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Synth(a) => synth(a),
        Command::Ingest(a) => ingest_cmd(a),
        Command::Featurize(a) => featurize(a),
        Command::Train(a) => train(a),
        Command::BuildRegistry(a) => build_registry(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Predict(a) => predict(a),
        Command::Correlate(a) => correlate(a),
        Command::Importance(a) => importance(a),
        Command::RankMovers(a) => rank_movers_cmd(a),
        Command::Serve(a) => serve(a),
        Command::FetchPatents(a) => fetch_patents(a),
    }
}

fn invalid(message: impl Into<String>) -> CliError {
    CliError::Invalid(message.into())
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_error(path: Option<&Path>) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |source| CliError::Csv {
        path: path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
        source,
    }
}

/// A file, or standard output when no path is given.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p).map_err(io_error(p))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn check_horizon(h: u32) -> Result<()> {
    if (MIN_HORIZON..=MAX_HORIZON).contains(&h) {
        Ok(())
    } else {
        Err(invalid(format!("horizon must be in [{MIN_HORIZON},{MAX_HORIZON}], got {h}")))
    }
}

fn check_years(from: i32, to: i32) -> Result<()> {
    if from > to {
        return Err(invalid(format!("year range reversed: --from {from} is after --to {to}")));
    }
    Ok(())
}

fn load_corpus(args: &CorpusArgs) -> Result<CorpusStore> {
    let dir = args.corpus.as_deref().map(CorpusPaths::in_dir);
    let pick = |flag: &Option<PathBuf>, from_dir: Option<PathBuf>, name: &str| {
        flag.clone()
            .or(from_dir)
            .ok_or_else(|| invalid(format!("--{name} is required unless --corpus is given")))
    };
    let paths = CorpusPaths {
        counts: pick(&args.counts, dir.as_ref().map(|d| d.counts.clone()), "counts")?,
        global: pick(&args.global, dir.as_ref().map(|d| d.global.clone()), "global")?,
        patents: pick(&args.patents, dir.as_ref().map(|d| d.patents.clone()), "patents")?,
        embeddings: args.embeddings.clone().or(dir.and_then(|d| d.embeddings)),
    };
    Ok(ingest(&paths, WindowConvention::default())?)
}

fn feature_options(store: &CorpusStore, window: &WindowArgs, horizon: u32) -> FeatureOptions {
    FeatureOptions {
        horizon,
        embeddings: store.embeddings().is_some() && !window.no_embeddings,
        from_year: window.from,
        to_year: Some(window.to),
    }
}

fn feature_table(store: &CorpusStore, window: &WindowArgs, horizon: u32) -> Result<(FeatureTable, bool)> {
    let options = feature_options(store, window, horizon);
    let table = build_feature_rows(store, &options)?;
    if table.is_empty() {
        return Err(invalid(format!(
            "no feature rows for horizon {horizon} between {} and {}",
            window.from, window.to
        )));
    }
    Ok((table, options.embeddings))
}

fn fit_config(model: &ModelArgs) -> Result<FitConfig> {
    let gbdt = TrainParams {
        rounds: model.rounds,
        max_depth: model.max_depth,
        learning_rate: model.learning_rate,
        min_samples_leaf: model.min_samples_leaf,
        seed: model.seed,
        ..TrainParams::default()
    };
    gbdt.validate()?;
    Ok(FitConfig {
        gbdt,
        ..FitConfig::default()
    })
}

fn print_json(value: &serde_json::Value) {
    println!("{value}");
}

fn synth(a: SynthArgs) -> Result<()> {
    if a.topics == 0 {
        return Err(invalid("--topics must be positive"));
    }
    if a.to - a.from < 20 {
        return Err(invalid("a synthetic corpus needs at least 21 years"));
    }
    let config = SyntheticConfig {
        topics: a.topics,
        first_year: a.from,
        last_year: a.to,
        seed: a.seed,
        embedding_dim: a.embedding_dim,
        ..SyntheticConfig::default()
    };
    let (store, truth) = leading_indicator_corpus(&config)?;
    store.export_dir(&a.out)?;
    print_json(&json!({
        "topics": store.len(),
        "declining_topics": truth.decline_start.len(),
        "out": a.out,
    }));
    Ok(())
}

fn ingest_cmd(a: IngestArgs) -> Result<()> {
    let store = load_corpus(&a.corpus)?;
    store.export_dir(&a.out)?;
    let path = a.out.join("popularity.csv");
    let file = fs::File::create(&path).map_err(io_error(&path))?;
    store.write_popularity_csv(io::BufWriter::new(file)).map_err(csv_error(Some(&path)))?;
    let years: Vec<i32> = store.global_stats().map(|g| g.year).collect();
    let without_start: Vec<&str> = store
        .topics()
        .filter(|t| t.meta.training_start_year.is_none())
        .map(|t| t.meta.topic_id.as_str())
        .collect();
    print_json(&json!({
        "topics": store.len(),
        "first_year": years.first(),
        "last_year": years.last(),
        "topics_missing_embeddings": store.topics_missing_embeddings(),
        "topics_without_training_start": without_start,
    }));
    Ok(())
}

fn featurize(a: FeaturizeArgs) -> Result<()> {
    check_horizon(a.horizon)?;
    check_years(a.window.from, a.window.to)?;
    let store = load_corpus(&a.corpus)?;
    let table = build_feature_rows(&store, &feature_options(&store, &a.window, a.horizon))?;
    table.write_csv(sink(a.out.as_deref())?).map_err(csv_error(a.out.as_deref()))
}

fn train(a: TrainArgs) -> Result<()> {
    check_horizon(a.horizon)?;
    check_years(a.window.from, a.window.to)?;
    let config = fit_config(&a.model)?;
    let store = load_corpus(&a.corpus)?;
    let (table, embeddings) = feature_table(&store, &a.window, a.horizon)?;
    let model = TrainedModel::fit(a.model.model, a.target, embeddings, &table, &config)?;
    persist::save(&model, &config, &a.out)?;
    print_json(&json!({
        "model": a.model.model,
        "target": a.target,
        "horizon": a.horizon,
        "rows": table.with_defined_target(a.target).len(),
        "out": a.out,
    }));
    Ok(())
}

fn build_registry(a: BuildRegistryArgs) -> Result<()> {
    check_horizon(a.horizon)?;
    check_years(a.window.from, a.window.to)?;
    let config = fit_config(&a.model)?;
    let store = load_corpus(&a.corpus)?;
    fs::create_dir_all(&a.out).map_err(io_error(&a.out))?;
    let mut written = Vec::new();
    for horizon in 1..=a.horizon {
        let (table, embeddings) = feature_table(&store, &a.window, horizon)?;
        for target in [trendcast::TargetKind::Pop, trendcast::TargetKind::Pct] {
            let model = TrainedModel::fit(a.model.model, target, embeddings, &table, &config)?;
            let name = persist::registry_file_name(a.model.model, target, horizon);
            persist::save(&model, &config, &a.out.join(&name))?;
            log::info!("wrote {name}");
            written.push(name);
        }
    }
    print_json(&json!({ "out": a.out, "models": written }));
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    check_horizon(a.horizon)?;
    check_years(a.window.from, a.window.to)?;
    let fit = fit_config(&a.model)?;
    let store = load_corpus(&a.corpus)?;
    let (table, embeddings) = feature_table(&store, &a.window, a.horizon)?;
    let config = ExperimentConfig {
        model: a.model.model,
        target: a.target,
        split: a.split,
        n_splits: a.n_splits,
        seed: a.model.seed,
        embeddings,
        fit,
    };
    let report = run_experiment::<f64>(&table, &config)?;
    let reports = [report];
    write_reports_csv(&reports, sink(a.out.as_deref())?).map_err(csv_error(a.out.as_deref()))?;
    if a.out.is_some() {
        print!("{}", format_pooled_table(&reports));
    }
    Ok(())
}

fn predict(a: PredictArgs) -> Result<()> {
    if let Some(h) = a.horizon {
        check_horizon(h)?;
    }
    let store = load_corpus(&a.corpus)?;
    let registry = Registry::with_models_dir(store, &a.models)?;
    let topics: Vec<String> = if a.topics.is_empty() {
        registry.store().topic_ids().map(str::to_string).collect()
    } else {
        a.topics.clone()
    };
    // Validate the horizon exactly as the service does, without its batch cap.
    let probe = ForecastRequest {
        topics: Vec::new(),
        max_horizon: a.horizon,
    };
    let mut response = forecast_batch(&registry, &probe).map_err(|e| invalid(e.to_string()))?;
    response.results = topics
        .iter()
        .map(|t| forecast_topic(&registry, t, response.max_horizon))
        .collect();
    let text = serde_json::to_string(&response).map_err(|e| invalid(e.to_string()))?;
    let mut out = sink(a.out.as_deref())?;
    let target = a.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    writeln!(out, "{text}").and_then(|_| out.flush()).map_err(io_error(&target))
}

fn correlate(a: CorrelateArgs) -> Result<()> {
    check_years(a.from, a.to)?;
    let store = load_corpus(&a.corpus)?;
    let topics: Vec<String> = if a.topics.is_empty() {
        store.topic_ids().map(str::to_string).collect()
    } else {
        a.topics
            .iter()
            .map(|t| {
                store
                    .resolve(t)
                    .map(|r| r.meta.topic_id.clone())
                    .ok_or_else(|| invalid(format!("unknown topic `{t}`")))
            })
            .collect::<Result<_>>()?
    };
    let max = a.max_lag as i32;
    let lags: Vec<i32> = (-max..=max).collect();
    let profiles: Vec<_> = topics
        .iter()
        .flat_map(|t| {
            a.indicators
                .iter()
                .map(|&i| correlation_profile(&store, t, a.series, i, &lags, a.from..=a.to))
        })
        .collect();
    write_profiles_csv(&profiles, sink(a.out.as_deref())?).map_err(csv_error(a.out.as_deref()))
}

fn importance(a: ImportanceArgs) -> Result<()> {
    check_horizon(a.horizon)?;
    check_years(a.window.from, a.window.to)?;
    if a.repeats == 0 {
        return Err(invalid("--repeats must be positive"));
    }
    let config = fit_config(&a.model)?;
    let store = load_corpus(&a.corpus)?;
    let (table, embeddings) = feature_table(&store, &a.window, a.horizon)?;
    let model = TrainedModel::fit(a.model.model, a.target, embeddings, &table, &config)?;
    let report = permutation_importance(&model, &table, a.metric, a.repeats, a.model.seed)?;
    let mut w = csv::Writer::from_writer(sink(a.out.as_deref())?);
    let write = |w: &mut csv::Writer<_>| -> csv::Result<()> {
        w.write_record(["feature", "importance"])?;
        for (name, value) in report.ranked() {
            w.write_record([name, value.to_string()])?;
        }
        w.flush()?;
        Ok(())
    };
    write(&mut w).map_err(csv_error(a.out.as_deref()))
}

fn rank_movers_cmd(a: RankMoversArgs) -> Result<()> {
    let store = load_corpus(&a.corpus)?;
    let model = persist::load::<f64>(&a.model_file)?;
    let last = store.last_year().ok_or_else(|| invalid("the corpus has no years"))?;
    let year = a.year.unwrap_or(last);
    if year > last {
        return Err(invalid(format!("--year {year} is after the last corpus year {last}")));
    }
    let inputs = forecast_movers(&store, &model, year)?;
    let report = rank_movers(&inputs, year);
    let mut w = csv::Writer::from_writer(sink(a.out.as_deref())?);
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let write = |w: &mut csv::Writer<_>| -> csv::Result<()> {
        w.write_record(["section", "rank", "topic", "popularity", "trailing_pct", "predicted_pct"])?;
        for (section, rows) in [("up", &report.up), ("down", &report.down), ("reversal", &report.reversals)] {
            for (rank, m) in rows.iter().enumerate() {
                w.write_record([
                    section.to_string(),
                    (rank + 1).to_string(),
                    m.topic_id.clone(),
                    m.popularity.to_string(),
                    opt(m.trailing_pct),
                    m.predicted_pct.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    };
    write(&mut w).map_err(csv_error(a.out.as_deref()))
}

fn serve(a: ServeArgs) -> Result<()> {
    let config = ServeConfig {
        addr: SocketAddr::new(a.host, a.port),
        models_dir: a.models,
        corpus_dir: a.corpus,
        static_dir: a.static_dir,
    };
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(io_error(Path::new("<runtime>")))?;
    runtime.block_on(trendcast_service::serve(config))?;
    Ok(())
}

fn fetch_patents(a: FetchPatentsArgs) -> Result<()> {
    let query = a.query.trim();
    if query.is_empty() {
        return Err(invalid("--query must not be empty"));
    }
    check_years(a.from, a.to)?;
    if a.from < MIN_YEAR || a.to > MAX_YEAR {
        return Err(invalid(format!("years must lie in [{MIN_YEAR},{MAX_YEAR}]")));
    }
    let topic = a.topic.as_deref().unwrap_or(query);
    let mut client = PatentClient::new(&a.endpoint, a.api_key.clone());
    let summary = fetch_into(&mut client, query, topic, a.from, a.to, &a.out)?;
    print_json(&json!({
        "topic": topic,
        "fetched": summary.fetched,
        "skipped": summary.skipped,
        "out": a.out,
    }));
    Ok(())
}
