use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde_json::Value;

use rhbox::data::{load_csv, normalize_minmax, LabelColumn};
use rhbox::ensemble::{feature_usage, train, vote_distribution};
use rhbox::eval::{feature_cap_sweep, learner_count_sweep, parse_fold_assignments, repeated_cv, CvOptions, SweepCurve};
use rhbox::{
    bound_report, load_model, save_model, Dataset, Error, MaxFeatures, NormMode, NormalizationParams, RawTable,
    RhConfig, RhModel, Sensitivity,
};

use crate::report::{num, opt_num, Manifest, Report};
use crate::{BoundArgs, Cli, Command, DataArgs, EvaluateArgs, Failure, ImportanceArgs, ModelArgs, NormModeArg,
    PredictArgs, TrainArgs};

type Result<T> = std::result::Result<T, Failure>;

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Train(a) => cmd_train(a, cli.json),
        Command::Predict(a) => cmd_predict(a),
        Command::Evaluate(a) => cmd_evaluate(a, cli.json),
        Command::Bound(a) => cmd_bound(a, cli.json),
        Command::Importance(a) => cmd_importance(a, cli.json),
    }
}

fn flag_for(param: &str) -> Option<&'static str> {
    Some(match param {
        "theta" => "--theta",
        "gamma" => "--gamma",
        "n_estimators" => "--n-estimators",
        "max_features" => "--max-features",
        "sample_rate" => "--sample-rate",
        "label_column" => "--label-col",
        "m_values" => "--sweep-m",
        "mf_values" => "--sweep-mf",
        _ => return None,
    })
}

/// Invalid parameters that came from a flag are usage errors; the rest are runtime errors.
fn classify(err: Error) -> Failure {
    let mut inner = &err;
    while let Error::InFold { source, .. } = inner {
        inner = source;
    }
    if let Error::InvalidParameter { name, reason } = inner {
        if let Some(flag) = flag_for(name) {
            return Failure::Usage(format!("invalid value for {flag}: {reason}"));
        }
    }
    Failure::Runtime(err.into())
}

fn label_column(s: &str) -> LabelColumn {
    if s.eq_ignore_ascii_case("none") {
        LabelColumn::None
    } else {
        LabelColumn::parse(s)
    }
}

fn read_table(path: &Path, label_col: &str, header: bool) -> Result<RawTable> {
    let col = label_column(label_col);
    if matches!(col, LabelColumn::Name(_)) && !header {
        return Err(Failure::Usage(format!(
            "invalid value for --label-col: `{label_col}` is a column name but --header was not given"
        )));
    }
    load_csv(path, &col, header)
        .map_err(classify)
        .map_err(|f| match f {
            Failure::Runtime(e) => Failure::Runtime(e.context(format!("reading {}", path.display()))),
            usage => usage,
        })
}

fn labeled_table(args: &DataArgs) -> Result<RawTable> {
    if label_column(&args.label_col) == LabelColumn::None {
        return Err(Failure::Usage("invalid value for --label-col: this command needs labels".into()));
    }
    read_table(&args.data, &args.label_col, args.header)
}

fn model_config(args: &ModelArgs) -> Result<RhConfig> {
    let gammas = args
        .gamma
        .split(',')
        .map(|g| g.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<f64>, _>>()
        .map_err(|_| Failure::Usage(format!("invalid value for --gamma: `{}` is not a number list", args.gamma)))?;
    let gamma = match gammas.as_slice() {
        [g] => Sensitivity::Uniform(*g),
        _ => Sensitivity::PerDimension(gammas),
    };
    let max_features = MaxFeatures::parse(&args.max_features).map_err(classify)?;
    Ok(RhConfig {
        n_estimators: args.n_estimators,
        sample_rate: args.sample_rate,
        max_features,
        theta: args.theta,
        gamma,
        seed: args.seed,
    })
}

fn gamma_value(g: &Sensitivity) -> Value {
    match g {
        Sensitivity::Uniform(x) => num(*x),
        Sensitivity::PerDimension(v) => Value::Array(v.iter().map(|&x| num(x)).collect()),
    }
}

/// Resolved configuration with every default filled in.
fn config_fields(cfg: &RhConfig, resolved_mf: usize) -> Vec<(&'static str, Value)> {
    vec![
        ("n_estimators", Value::from(cfg.n_estimators)),
        ("sample_rate", num(cfg.sample_rate)),
        ("max_features", Value::from(cfg.max_features.to_string())),
        ("max_features_resolved", Value::from(resolved_mf)),
        ("theta", num(cfg.theta)),
        ("gamma", gamma_value(&cfg.gamma)),
        ("seed", Value::from(cfg.seed)),
    ]
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::Runtime)
}

/// Writes the document to `out`, printing `summary`; without `out` the document goes to stdout.
fn emit(report: &Report, out: Option<&Path>, json: bool, summary: &str) -> Result<()> {
    let doc = report.render(json);
    match out {
        Some(path) => {
            write_file(path, &doc)?;
            print!("{summary}");
        }
        None => print!("{doc}"),
    }
    Ok(())
}

fn cmd_train(a: &TrainArgs, json: bool) -> Result<()> {
    let mut manifest = Manifest::new("train");
    manifest.input(&a.data.data)?;
    let table = labeled_table(&a.data)?;
    let cfg = model_config(&a.model)?;
    let (dataset, _) = normalize_minmax(&table, None).map_err(classify)?;
    let model = train(&dataset, &cfg).map_err(classify)?;
    save_model(&model, &a.out)
        .with_context(|| format!("writing {}", a.out.display()))
        .map_err(Failure::Runtime)?;

    manifest.config = config_fields(&cfg, model.max_features());
    let mut report = Report::default();
    report.fields(
        "summary",
        vec![
            ("model", Value::from(a.out.display().to_string())),
            ("n_rows", Value::from(dataset.len())),
            ("n_features", Value::from(model.n_features)),
            ("n_classes", Value::from(model.n_classes)),
            ("learners", Value::from(model.learners.len())),
            ("mean_boxes", num(model.mean_boxes())),
        ],
    );
    manifest.attach(&mut report);
    let mut manifest_path = a.out.clone().into_os_string();
    manifest_path.push(".manifest");
    write_file(&PathBuf::from(manifest_path), &report.render(json))?;
    println!(
        "trained {} learners, {:.2} boxes per learner on average, {:.3}s",
        model.learners.len(),
        model.mean_boxes(),
        manifest.started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn open_model(path: &Path) -> Result<RhModel> {
    load_model(path)
        .with_context(|| format!("loading model {}", path.display()))
        .map_err(Failure::Runtime)
}

/// Applies the model's normalization and maps label names onto the model's class ids.
fn dataset_for_model(table: &RawTable, model: &RhModel) -> Result<Dataset> {
    if table.n_features() != model.n_features {
        return Err(Failure::Runtime(anyhow!(
            "data has {} feature columns but the model expects {}",
            table.n_features(),
            model.n_features
        )));
    }
    let mut t = table.clone();
    t.labels = table
        .labels
        .iter()
        .map(|&l| {
            let name = &table.class_names[l];
            model
                .class_names
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Failure::Runtime(anyhow!("class `{name}` does not occur in the model")))
        })
        .collect::<Result<Vec<_>>>()?;
    t.class_names = model.class_names.clone();
    let identity;
    let params = match &model.normalization {
        Some(p) => p,
        None => {
            identity = NormalizationParams {
                mins: vec![0.0; model.n_features],
                maxs: vec![1.0; model.n_features],
            };
            &identity
        }
    };
    let (data, _) = normalize_minmax(&t, Some(params)).map_err(classify)?;
    Ok(data)
}

fn cmd_predict(a: &PredictArgs) -> Result<()> {
    let model = open_model(&a.model)?;
    let table = read_table(&a.data, &a.label_col, a.header)?;
    let mut unlabeled = table.clone();
    unlabeled.labels.clear();
    let data = dataset_for_model(&unlabeled, &model)?;

    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let mut header = vec!["prediction".to_string()];
        if a.proba {
            header.extend(model.class_names.iter().map(|c| format!("vote:{c}")));
        }
        w.write_record(&header).map_err(|e| Failure::Runtime(e.into()))?;
        for s in &data.samples {
            let votes = vote_distribution(&model, s).map_err(classify)?;
            let mut row = vec![model.class_names[votes.winner()].clone()];
            if a.proba {
                row.extend((0..model.n_classes).map(|c| votes.fraction(c).to_string()));
            }
            w.write_record(&row).map_err(|e| Failure::Runtime(e.into()))?;
        }
        w.flush().map_err(|e| Failure::Runtime(e.into()))?;
    }
    let text = String::from_utf8(buf).expect("csv output is utf-8");
    match &a.out {
        Some(path) => {
            write_file(path, &text)?;
            println!("predicted {} rows", data.len());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_values(flag: &str, spec: &str) -> Result<Vec<usize>> {
    let bad = || Failure::Usage(format!("invalid value for {flag}: `{spec}` is not `a,b,c` or `start:end:step`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let values: Vec<usize> = match parts.as_slice() {
        [start, end, step] => {
            let (s, e, st): (usize, usize, usize) = (
                start.trim().parse().map_err(|_| bad())?,
                end.trim().parse().map_err(|_| bad())?,
                step.trim().parse().map_err(|_| bad())?,
            );
            if st == 0 || s > e {
                return Err(bad());
            }
            (s..=e).step_by(st).collect()
        }
        [list] => list
            .split(',')
            .map(|v| v.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?,
        _ => return Err(bad()),
    };
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

fn sweep_sections(report: &mut Report, name: &str, curve: &SweepCurve<f64>, keys: &[(usize, usize)]) {
    report.table(
        name,
        &["value", "mean_weighted_f1", "std_weighted_f1"],
        curve
            .values
            .iter()
            .zip(curve.mean.iter().zip(&curve.std))
            .map(|(&v, (&m, &s))| vec![Value::from(v), num(m), num(s)])
            .collect(),
    );
    let mut rows = Vec::new();
    for (&v, scores) in curve.values.iter().zip(&curve.scores) {
        for (&(r, f), &s) in keys.iter().zip(scores) {
            rows.push(vec![Value::from(v), Value::from(r), Value::from(f), num(s)]);
        }
    }
    report.table(&format!("{name}_folds"), &["value", "repeat", "fold", "weighted_f1"], rows);
}

fn cmd_evaluate(a: &EvaluateArgs, json: bool) -> Result<()> {
    let mut manifest = Manifest::new("evaluate");
    manifest.input(&a.data.data)?;
    let table = labeled_table(&a.data)?;
    let cfg = model_config(&a.model)?;
    let resolved_mf = cfg.validate(table.n_features()).map_err(classify)?;

    let mut options = CvOptions {
        repeats: a.repeats as usize,
        k: a.folds as usize,
        norm_mode: match a.norm_mode {
            NormModeArg::PerFold => NormMode::PerFold,
            NormModeArg::Whole => NormMode::Whole,
        },
        with_bound: a.bound,
        ..CvOptions::default()
    };
    if let Some(path) = &a.fold_file {
        manifest.input(path)?;
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(Failure::Runtime)?;
        let plans = parse_fold_assignments(&text, table.n_rows())
            .with_context(|| format!("reading {}", path.display()))
            .map_err(Failure::Runtime)?;
        options.repeats = plans.len();
        options.k = plans.first().map_or(options.k, |p| p.k);
        options.plans = Some(plans);
    }
    let sweep_m = a.sweep_m.as_deref().map(|s| parse_values("--sweep-m", s)).transpose()?;
    let sweep_mf = a.sweep_mf.as_deref().map(|s| parse_values("--sweep-mf", s)).transpose()?;

    let cv = repeated_cv(&table, &cfg, &options).map_err(classify)?;
    let keys: Vec<(usize, usize)> = cv.folds.iter().map(|f| (f.repeat, f.fold)).collect();

    let mut config = config_fields(&cfg, resolved_mf);
    config.extend([
        ("folds", Value::from(options.k)),
        ("repeats", Value::from(options.repeats)),
        ("norm_mode", Value::from(options.norm_mode.as_str())),
        ("fold_source", Value::from(if a.fold_file.is_some() { "file" } else { "stratified" })),
        ("bound", Value::from(a.bound)),
    ]);
    manifest.config = config;

    let bounds: Vec<f64> = cv.folds.iter().filter_map(|f| f.bound.as_ref().and_then(|b| b.upper_bound)).collect();
    let mean_bound = (a.bound && bounds.len() == cv.folds.len() && !bounds.is_empty())
        .then(|| bounds.iter().sum::<f64>() / bounds.len() as f64);

    let mut report = Report::default();
    let mut summary = vec![
        ("n_rows", Value::from(table.n_rows())),
        ("n_features", Value::from(table.n_features())),
        ("n_classes", Value::from(table.n_classes())),
        ("evaluations", Value::from(cv.folds.len())),
        ("mean_weighted_f1", num(cv.mean)),
        ("std_weighted_f1", num(cv.std)),
        ("mean_test_error", num(cv.mean_test_error)),
        ("undersized_classes", Value::from(cv.undersized_classes)),
    ];
    if a.bound {
        summary.push(("mean_upper_bound", opt_num(mean_bound)));
    }
    report.fields("summary", summary);

    let mut columns = vec!["repeat", "fold", "n_train", "n_test", "weighted_f1", "test_error", "clipped", "mean_boxes"];
    if a.bound {
        columns.extend(["strength", "correlation", "raw_bound", "upper_bound", "n_pairs_used"]);
    }
    let rows = cv
        .folds
        .iter()
        .map(|f| {
            let mut row = vec![
                Value::from(f.repeat),
                Value::from(f.fold),
                Value::from(f.n_train),
                Value::from(f.n_test),
                num(f.weighted_f1),
                num(f.test_error),
                Value::from(f.clipped),
                num(f.mean_boxes),
            ];
            if let Some(b) = &f.bound {
                row.extend([
                    num(b.strength),
                    opt_num(b.correlation),
                    opt_num(b.raw_bound),
                    opt_num(b.upper_bound),
                    Value::from(b.n_pairs_used),
                ]);
            }
            row
        })
        .collect();
    report.table("folds", &columns, rows);

    if let Some(values) = &sweep_m {
        let curve = learner_count_sweep(&table, &cfg, values, &options).map_err(classify)?;
        sweep_sections(&mut report, "sweep_m", &curve, &keys);
    }
    if let Some(values) = &sweep_mf {
        let curve = feature_cap_sweep(&table, &cfg, values, &options).map_err(classify)?;
        sweep_sections(&mut report, "sweep_mf", &curve, &keys);
    }
    manifest.attach(&mut report);

    let mut text = format!(
        "weighted F1 {:.5} +- {:.5} over {} evaluations, mean test error {:.5}\n",
        cv.mean,
        cv.std,
        cv.folds.len(),
        cv.mean_test_error
    );
    if a.bound {
        match mean_bound {
            Some(b) => text.push_str(&format!("mean upper bound {b:.5}\n")),
            None => text.push_str("upper bound undefined in at least one fold\n"),
        }
    }
    emit(&report, a.out.as_deref(), json, &text)
}

fn cmd_bound(a: &BoundArgs, json: bool) -> Result<()> {
    let mut manifest = Manifest::new("bound");
    manifest.input(&a.model)?;
    manifest.input(&a.data.data)?;
    let model = open_model(&a.model)?;
    let table = labeled_table(&a.data)?;
    let data = dataset_for_model(&table, &model)?;
    let b = bound_report(&model, &data).map_err(classify)?;
    manifest.config = config_fields(&model.config, model.max_features());

    let status = if b.upper_bound.is_some() { "defined" } else { "undefined" };
    let mut report = Report::default();
    report.fields(
        "bound",
        vec![
            ("n_rows", Value::from(data.len())),
            ("strength", num(b.strength)),
            ("correlation", opt_num(b.correlation)),
            ("raw_bound", opt_num(b.raw_bound)),
            ("upper_bound", opt_num(b.upper_bound)),
            ("status", Value::from(status)),
            ("n_pairs_used", Value::from(b.n_pairs_used)),
        ],
    );
    manifest.attach(&mut report);
    let fmt = |x: Option<f64>| x.map_or("undefined".to_string(), |v| format!("{v:.6}"));
    let text = format!(
        "strength {:.6}, correlation {}, bound {} (raw {})\n",
        b.strength,
        fmt(b.correlation),
        fmt(b.upper_bound),
        fmt(b.raw_bound)
    );
    emit(&report, a.out.as_deref(), json, &text)
}

fn cmd_importance(a: &ImportanceArgs, json: bool) -> Result<()> {
    let mut manifest = Manifest::new("importance");
    manifest.input(&a.model)?;
    let model = open_model(&a.model)?;
    manifest.config = config_fields(&model.config, model.max_features());
    let usage = feature_usage(&model);

    let mut order: Vec<usize> = (0..usage.probabilities.len()).collect();
    order.sort_by(|&x, &y| usage.probabilities[y].total_cmp(&usage.probabilities[x]).then(x.cmp(&y)));
    if let Some(k) = a.top {
        order.truncate(k);
    }
    let name = |f: usize| {
        model
            .feature_names
            .as_ref()
            .map_or_else(|| format!("x{f}"), |names| names[f].clone())
    };

    let slots: usize = model.learners.iter().map(|l| l.dims()).sum();
    let mut report = Report::default();
    report.fields(
        "summary",
        vec![
            ("learners", Value::from(model.learners.len())),
            ("n_features", Value::from(model.n_features)),
            ("feature_slots", Value::from(slots)),
        ],
    );
    report.table(
        "features",
        &["rank", "feature", "name", "probability"],
        order
            .iter()
            .enumerate()
            .map(|(rank, &f)| {
                vec![Value::from(rank + 1), Value::from(f), Value::from(name(f)), num(usage.probabilities[f])]
            })
            .collect(),
    );
    report.table(
        "subset_sizes",
        &["d", "learners"],
        usage
            .d_histogram
            .iter()
            .enumerate()
            .map(|(i, &c)| vec![Value::from(i + 1), Value::from(c)])
            .collect(),
    );
    manifest.attach(&mut report);
    let text: String = order
        .iter()
        .map(|&f| format!("{:<24} {:.4}\n", name(f), usage.probabilities[f]))
        .collect();
    emit(&report, a.out.as_deref(), json, &text)
}
