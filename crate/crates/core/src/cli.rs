//! Command-line driver behind the `dtscatter` binary.

use crate::classify::{cross_validate, predict, train, SvmParams};
use crate::data::{
    load_cifar, read_model, read_selection, stratified_indices, write_model, write_selection, CifarVariant,
    FeatureStoreReader, LabeledImageSet,
};
use crate::dtcwt::load_default_filters;
use crate::featsel::select_all_classes;
use crate::pipeline::bench::{
    bench_resolutions, bench_stages, compare_first_layer, resolutions_markdown, stages_markdown,
};
use crate::pipeline::{
    extract_to_store, run_sweep, AccuracyRow, AccuracyTable, PipelineError, RunManifest, SelectedNormalization,
    SweepPoint,
};
use crate::scatter::{
    default_log_grid, tune_log_params, Extractor, FeatureStats, LogMode, LogParams, Resolution, ScatterConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Environment variable holding the default dataset root.
pub const DATA_ENV: &str = "DTSCATTER_DATA";

#[derive(Debug, Parser)]
#[command(name = "dtscatter", version, about = "Dual-tree wavelet scattering features, OLS selection and SVM classification")]
pub struct Cli {
    /// Worker threads for extraction and training (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract scattering features of a dataset into train/test stores.
    Extract(ExtractArgs),
    /// Choose per-scale log offsets by the mean-median rule.
    TuneLog(TuneLogArgs),
    /// Select features per class by orthogonal least squares.
    Select(SelectArgs),
    /// Train the Gaussian-kernel SVM on selected features.
    Train(TrainArgs),
    /// Score a model, or sweep training sizes over extracted stores.
    Eval(EvalArgs),
    /// Time scattering stages and resolution setups.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    #[value(name = "10")]
    Cifar10,
    #[value(name = "100")]
    Cifar100,
}

impl From<VariantArg> for CifarVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Cifar10 => CifarVariant::Cifar10,
            VariantArg::Cifar100 => CifarVariant::Cifar100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogArg {
    Off,
    Fixed,
    Auto,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Dataset root holding the CIFAR binary batches.
    #[arg(long, env = DATA_ENV)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "10")]
    pub variant: VariantArg,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Scattering configuration file (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Resolutions as side:levels[:J], comma separated, e.g. 64:5,48:4.
    #[arg(long, value_delimiter = ',', value_parser = parse_resolution)]
    pub resolutions: Vec<Resolution>,
    #[arg(long, value_enum)]
    pub log: Option<LogArg>,
    /// Log offsets k_1.. for the fixed mode, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub dataset: DatasetArgs,
    #[command(flatten)]
    pub scatter: ConfigArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Stratified subset of the training split (default: all).
    #[arg(long)]
    pub train_count: Option<usize>,
    /// Stratified subset of the test split (default: all).
    #[arg(long)]
    pub test_count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Training images used when --log auto tunes the offsets.
    #[arg(long, default_value_t = 1000)]
    pub tune_samples: usize,
}

#[derive(Debug, Args)]
pub struct TuneLogArgs {
    #[command(flatten)]
    pub dataset: DatasetArgs,
    #[command(flatten)]
    pub scatter: ConfigArgs,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output configuration with the tuned offsets; the per-scale report is
    /// written to `<out>.report.toml`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SubsetArgs {
    /// Stratified subset of the store rows (default: all).
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long, default_value_t = 108)]
    pub per_class: usize,
    #[command(flatten)]
    pub subset: SubsetArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SvmArgs {
    #[arg(long, default_value_t = 14.0)]
    pub c: f64,
    #[arg(long, default_value_t = 2e-5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000_000)]
    pub max_kernel_evals: u64,
    /// Kernel cache budget in MiB.
    #[arg(long, default_value_t = 512)]
    pub cache_mib: usize,
}

impl SvmArgs {
    fn params(&self) -> SvmParams {
        SvmParams {
            c: self.c,
            gamma: self.gamma,
            tol: self.tol,
            max_kernel_evals: self.max_kernel_evals,
            cache_bytes: self.cache_mib << 20,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub selection: PathBuf,
    #[command(flatten)]
    pub svm: SvmArgs,
    #[command(flatten)]
    pub subset: SubsetArgs,
    /// Pick c and gamma by stratified k-fold cross-validation over the grids.
    #[arg(long)]
    pub cv_folds: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub c_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub gamma_grid: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Model to score against --test.
    #[arg(long, requires = "test", conflicts_with = "run")]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// LABEL=DIR where DIR holds train.sctr and test.sctr from `extract`.
    #[arg(long, value_parser = parse_run)]
    pub run: Vec<(String, PathBuf)>,
    /// Training sizes, comma separated (default: every stored row).
    #[arg(long, value_delimiter = ',')]
    pub sweep: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 108)]
    pub per_class: usize,
    #[command(flatten)]
    pub svm: SvmArgs,
    /// Directory for accuracy.csv, accuracy.md and the run manifest.
    #[arg(long)]
    pub report_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub scatter: ConfigArgs,
    #[arg(long, default_value_t = 100)]
    pub iterations: usize,
    /// Also time the FFT-per-band first layer on the first resolution.
    #[arg(long)]
    pub fft: bool,
    /// Images per round for the per-resolution timing.
    #[arg(long, default_value_t = 20)]
    pub images: usize,
    #[arg(long, default_value_t = 5)]
    pub rounds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Markdown report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_resolution(s: &str) -> Result<Resolution, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| p.trim().parse::<usize>().map_err(|e| format!("{s}: {e}"));
    match parts.as_slice() {
        [side, levels] => Ok(Resolution::new(num(side)?, num(levels)?)),
        [side, levels, j] => Ok(Resolution {
            invariance_scale: Some(num(j)?),
            ..Resolution::new(num(side)?, num(levels)?)
        }),
        _ => Err(format!("{s}: expected side:levels or side:levels:J")),
    }
}

fn parse_run(s: &str) -> Result<(String, PathBuf), String> {
    let (label, dir) = s.split_once('=').ok_or_else(|| format!("{s}: expected LABEL=DIR"))?;
    if label.is_empty() {
        return Err(format!("{s}: empty label"));
    }
    Ok((label.to_string(), PathBuf::from(dir)))
}

fn resolve_config(args: &ConfigArgs) -> Result<ScatterConfig, PipelineError> {
    let mut config = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| crate::data::DataError::io(p, e))?;
            ScatterConfig::from_toml(&text)?
        }
        None => ScatterConfig::default(),
    };
    if !args.resolutions.is_empty() {
        config.resolutions = args.resolutions.clone();
    }
    match args.log {
        Some(LogArg::Off) => config.log = LogParams::off(),
        Some(LogArg::Auto) => config.log = LogParams::auto(),
        Some(LogArg::Fixed) => config.log.mode = LogMode::Fixed,
        None => {}
    }
    if !args.k.is_empty() {
        config.log.k = args.k.clone();
        if args.log.is_none() {
            config.log.mode = LogMode::Fixed;
        }
    }
    if config.log.mode == LogMode::Fixed && config.log.k.is_empty() {
        config.log = LogParams::default();
    }
    if config.log.mode != LogMode::Auto {
        config.validate()?;
    }
    Ok(config)
}

fn dataset(args: &DatasetArgs) -> Result<(LabeledImageSet, LabeledImageSet), PipelineError> {
    let root = args
        .data
        .as_ref()
        .ok_or_else(|| PipelineError::Usage(format!("no dataset root; pass --data or set {DATA_ENV}")))?;
    Ok(load_cifar(root, args.variant.into())?)
}

fn subset_indices(labels: &[u16], classes: usize, count: Option<usize>, seed: u64) -> Result<Vec<usize>, PipelineError> {
    match count {
        Some(n) => Ok(stratified_indices(labels, classes, n, seed)?),
        None => Ok((0..labels.len()).collect()),
    }
}

fn class_count(labels: &[u16]) -> usize {
    labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0)
}

fn store_labels(reader: &FeatureStoreReader, path: &Path) -> Result<Vec<u16>, PipelineError> {
    reader
        .labels()
        .map(<[u16]>::to_vec)
        .ok_or_else(|| PipelineError::Usage(format!("{} has no labels", path.display())))
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.toml");
    s.into()
}

fn tune(train: &LabeledImageSet, config: &ScatterConfig, samples: usize, seed: u64) -> Result<(ScatterConfig, crate::scatter::LogParamReport), PipelineError> {
    let idx = stratified_indices(&train.labels, train.class_count, samples, seed)?;
    let images: Vec<_> = idx.iter().map(|&i| train.image(i)).collect();
    let report = tune_log_params(&images, config, &load_default_filters(), &default_log_grid())?;
    let tuned = ScatterConfig {
        log: LogParams::fixed(report.ks()),
        ..config.clone()
    };
    tuned.validate()?;
    Ok((tuned, report))
}

pub fn cmd_extract(a: &ExtractArgs, argv: Vec<String>) -> Result<RunManifest, PipelineError> {
    let mut manifest = RunManifest::new("extract", argv);
    let mut config = resolve_config(&a.scatter)?;
    let t = Instant::now();
    let (train_set, test_set) = dataset(&a.dataset)?;
    manifest.time("load", t.elapsed().as_secs_f64());
    manifest.dataset = a.dataset.data.clone();
    manifest.seeds = vec![a.seed];
    if config.log.mode == LogMode::Auto {
        let t = Instant::now();
        let (tuned, report) = tune(&train_set, &config, a.tune_samples, a.seed)?;
        eprintln!("tuned log offsets: {:?}", report.ks());
        config = tuned;
        manifest.time("tune-log", t.elapsed().as_secs_f64());
    }
    std::fs::create_dir_all(&a.out_dir).map_err(|e| crate::data::DataError::io(&a.out_dir, e))?;
    let extractor = Extractor::new(config.clone(), load_default_filters())?;
    for (set, count, name) in [(&train_set, a.train_count, "train"), (&test_set, a.test_count, "test")] {
        let idx = subset_indices(&set.labels, set.class_count, count, a.seed)?;
        let path = a.out_dir.join(format!("{name}.sctr"));
        let report = extract_to_store(&extractor, set, Some(&idx), &path)?;
        println!(
            "{name}: {} rows x {} features, {:.4} s per image (scattering time), {:.1} s wall",
            report.rows, report.dims, report.mean_image_seconds, report.wall_seconds
        );
        manifest.time(&format!("extract-{name}"), report.wall_seconds);
        manifest.time(&format!("scattering-per-image-{name}"), report.mean_image_seconds);
        manifest.outputs.push(path);
    }
    manifest.config = Some(config);
    manifest.write(&a.out_dir.join("extract.manifest.toml"))?;
    Ok(manifest)
}

pub fn cmd_tune_log(a: &TuneLogArgs, argv: Vec<String>) -> Result<RunManifest, PipelineError> {
    let mut manifest = RunManifest::new("tune-log", argv);
    let config = resolve_config(&a.scatter)?;
    let (train_set, _) = dataset(&a.dataset)?;
    let t = Instant::now();
    let (tuned, report) = tune(&train_set, &config, a.samples, a.seed)?;
    manifest.time("tune-log", t.elapsed().as_secs_f64());
    for s in &report.scales {
        println!(
            "scale {}: k = {:.4}, |mean - median| = {:.3e}, skewness {:.3} -> {:.3}",
            s.scale, s.k, s.mean_median_gap, s.skewness_before, s.skewness_after
        );
    }
    let text = tuned.to_toml();
    crate::data::write_atomic(&a.out, |w| w.write_all(text.as_bytes()))?;
    let mut report_path = a.out.as_os_str().to_owned();
    report_path.push(".report.toml");
    let report_path = PathBuf::from(report_path);
    let report_text = toml::to_string(&report).map_err(|e| PipelineError::Numerical(e.to_string()))?;
    crate::data::write_atomic(&report_path, |w| w.write_all(report_text.as_bytes()))?;
    manifest.dataset = a.dataset.data.clone();
    manifest.seeds = vec![a.seed];
    manifest.config = Some(tuned);
    manifest.outputs = vec![a.out.clone(), report_path];
    manifest.write(&manifest_path(&a.out))?;
    Ok(manifest)
}

pub fn cmd_select(a: &SelectArgs, argv: Vec<String>) -> Result<RunManifest, PipelineError> {
    let mut manifest = RunManifest::new("select", argv);
    let mut reader = FeatureStoreReader::open(&a.train)?;
    let labels = store_labels(&reader, &a.train)?;
    let idx = subset_indices(&labels, class_count(&labels), a.subset.count, a.subset.seed)?;
    let mut x = reader.read(Some(&idx), None)?;
    let y: Vec<u16> = idx.iter().map(|&i| labels[i]).collect();
    FeatureStats::fit(&x)?.apply(&mut x)?;
    let t = Instant::now();
    let selection = select_all_classes(x.view(), &y, a.per_class)?;
    let secs = t.elapsed().as_secs_f64();
    write_selection(&a.out, &selection)?;
    let exhausted = selection.classes.iter().filter(|c| c.exhausted).count();
    println!(
        "selected {} of {} dimensions (feature richness {:.2}%), OLS time {:.2} s{}",
        selection.union.len(),
        selection.dims,
        100.0 * selection.feature_richness(),
        secs,
        if exhausted > 0 {
            format!(", {exhausted} classes stopped early")
        } else {
            String::new()
        }
    );
    manifest.per_class = Some(a.per_class);
    manifest.seeds = vec![a.subset.seed];
    manifest.train_sizes = vec![idx.len()];
    manifest.inputs = vec![a.train.clone()];
    manifest.outputs = vec![a.out.clone()];
    manifest.time("ols", secs);
    manifest.write(&manifest_path(&a.out))?;
    Ok(manifest)
}

pub fn cmd_train(a: &TrainArgs, argv: Vec<String>) -> Result<RunManifest, PipelineError> {
    let mut manifest = RunManifest::new("train", argv);
    let selection = read_selection(&a.selection)?;
    if selection.union.is_empty() {
        return Err(PipelineError::Usage("the selection is empty; nothing to train on".into()));
    }
    let mut reader = FeatureStoreReader::open(&a.train)?;
    if reader.header().dims != selection.dims {
        return Err(PipelineError::Usage(format!(
            "selection is for {} features, store has {}",
            selection.dims,
            reader.header().dims
        )));
    }
    let labels = store_labels(&reader, &a.train)?;
    let idx = subset_indices(&labels, class_count(&labels), a.subset.count, a.subset.seed)?;
    let mut x = reader.read(Some(&idx), Some(&selection.union))?;
    let y: Vec<u16> = idx.iter().map(|&i| labels[i]).collect();
    let stats = FeatureStats::fit(&x)?;
    stats.apply(&mut x)?;
    let mut params = a.svm.params();
    let t = Instant::now();
    if let Some(folds) = a.cv_folds {
        let c_grid = if a.c_grid.is_empty() { vec![params.c] } else { a.c_grid.clone() };
        let g_grid = if a.gamma_grid.is_empty() { vec![params.gamma] } else { a.gamma_grid.clone() };
        let cv = cross_validate(x.view(), &y, &c_grid, &g_grid, folds, &params)?;
        for cell in &cv.cells {
            println!("cv c={} gamma={}: {:.4}", cell.c, cell.gamma, cell.mean_accuracy);
        }
        println!("cross-validation chose c={} gamma={}", cv.best_c, cv.best_gamma);
        params.c = cv.best_c;
        params.gamma = cv.best_gamma;
        manifest.svm_c = c_grid;
        manifest.svm_gamma = g_grid;
        manifest.time("cross-validation", t.elapsed().as_secs_f64());
    } else {
        manifest.svm_c = vec![params.c];
        manifest.svm_gamma = vec![params.gamma];
    }
    let t = Instant::now();
    let model = train(x.view(), &y, &params)?;
    manifest.time("train", t.elapsed().as_secs_f64());
    let unconverged = model.unconverged();
    if !unconverged.is_empty() {
        eprintln!(
            "warning: classes {unconverged:?} hit the kernel-evaluation cap before converging; raise --max-kernel-evals"
        );
    }
    let train_acc = predict(&model, x.view())?.accuracy(&y);
    println!(
        "trained {} classes on {} rows x {} features, training accuracy {:.4}",
        model.classes.len(),
        x.nrows(),
        x.ncols(),
        train_acc
    );
    let norm = SelectedNormalization {
        columns: selection.union.clone(),
        mean: stats.mean,
        std: stats.std,
    };
    write_model(&a.out, &model)?;
    norm.write(&a.out)?;
    manifest.seeds = vec![a.subset.seed];
    manifest.train_sizes = vec![idx.len()];
    manifest.inputs = vec![a.train.clone(), a.selection.clone()];
    manifest.outputs = vec![a.out.clone(), SelectedNormalization::sidecar_path(&a.out)];
    manifest.write(&manifest_path(&a.out))?;
    Ok(manifest)
}

fn write_tables(dir: &Path, table: &AccuracyTable) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir).map_err(|e| crate::data::DataError::io(dir, e))?;
    let csv = table.to_csv();
    crate::data::write_atomic(&dir.join("accuracy.csv"), |w| w.write_all(csv.as_bytes()))?;
    let md = table.to_markdown();
    crate::data::write_atomic(&dir.join("accuracy.md"), |w| w.write_all(md.as_bytes()))?;
    Ok(())
}

fn eval_model(a: &EvalArgs, model_path: &Path, manifest: &mut RunManifest) -> Result<AccuracyTable, PipelineError> {
    let test_path = a.test.as_ref().expect("clap requires --test with --model");
    let model = read_model(model_path)?;
    let norm = SelectedNormalization::read(model_path)?;
    let mut reader = FeatureStoreReader::open(test_path)?;
    let labels = store_labels(&reader, test_path)?;
    let mut x = reader.read(None, Some(&norm.columns))?;
    norm.stats().apply(&mut x)?;
    let t = Instant::now();
    let accuracy = predict(&model, x.view())?.accuracy(&labels);
    manifest.time("predict", t.elapsed().as_secs_f64());
    manifest.inputs = vec![model_path.to_path_buf(), test_path.clone()];
    Ok(AccuracyTable {
        rows: vec![AccuracyRow {
            config: model_path.display().to_string(),
            train_size: 0,
            seed: 0,
            selected_dims: norm.columns.len(),
            feature_richness: norm.columns.len() as f64 / reader.header().dims as f64,
            accuracy,
            unconverged_classes: model.unconverged().len(),
            select_seconds: 0.0,
            train_seconds: 0.0,
        }],
    })
}

fn eval_runs(a: &EvalArgs, manifest: &mut RunManifest) -> Result<AccuracyTable, PipelineError> {
    let params = a.svm.params();
    let mut table = AccuracyTable::default();
    for (label, dir) in &a.run {
        let train_path = dir.join("train.sctr");
        let test_path = dir.join("test.sctr");
        let mut train_reader = FeatureStoreReader::open(&train_path)?;
        let mut test_reader = FeatureStoreReader::open(&test_path)?;
        if train_reader.header().config_hash != test_reader.header().config_hash {
            return Err(PipelineError::Usage(format!(
                "{}: train and test stores come from different configurations",
                dir.display()
            )));
        }
        let pool_labels = store_labels(&train_reader, &train_path)?;
        let test_labels = store_labels(&test_reader, &test_path)?;
        let sizes = if a.sweep.is_empty() { vec![pool_labels.len()] } else { a.sweep.clone() };
        let points: Vec<SweepPoint> = sizes
            .iter()
            .flat_map(|&size| a.seeds.iter().map(move |&seed| SweepPoint { size, seed }))
            .collect();
        let t = Instant::now();
        let rows = run_sweep(
            label,
            &pool_labels,
            class_count(&pool_labels),
            &points,
            a.per_class,
            &params,
            |idx| Ok(train_reader.read(Some(idx), None)?),
            |cols| Ok((test_reader.read(None, Some(cols))?, test_labels.clone())),
        )?;
        for r in &rows {
            eprintln!("{label} n={} seed={}: accuracy {:.4}", r.train_size, r.seed, r.accuracy);
        }
        table.rows.extend(rows);
        manifest.time(&format!("sweep-{label}"), t.elapsed().as_secs_f64());
        manifest.inputs.extend([train_path, test_path]);
        manifest.train_sizes = sizes;
    }
    manifest.seeds = a.seeds.clone();
    manifest.per_class = Some(a.per_class);
    manifest.svm_c = vec![params.c];
    manifest.svm_gamma = vec![params.gamma];
    Ok(table)
}

fn direction_summary(a: &EvalArgs, table: &AccuracyTable) -> String {
    let mut out = String::new();
    let labels: Vec<&str> = a.run.iter().map(|(l, _)| l.as_str()).collect();
    let mut sizes: Vec<usize> = table.rows.iter().map(|r| r.train_size).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if labels.len() >= 2 {
        for &n in &sizes {
            let (w, c) = table.seed_wins((labels[0], n), (labels[1], n), |x, y| x >= y);
            out.push_str(&format!("{} >= {} at n={n}: {w} of {c} seeds\n", labels[0], labels[1]));
        }
    }
    if sizes.len() >= 2 {
        let (lo, hi) = (sizes[0], sizes[sizes.len() - 1]);
        for l in &labels {
            let (w, c) = table.seed_wins((l, hi), (l, lo), |x, y| x > y);
            out.push_str(&format!("{l}: n={hi} beats n={lo} in {w} of {c} seeds\n"));
        }
    }
    out
}

pub fn cmd_eval(a: &EvalArgs, argv: Vec<String>) -> Result<RunManifest, PipelineError> {
    let mut manifest = RunManifest::new("eval", argv);
    let table = match &a.model {
        Some(m) => eval_model(a, m, &mut manifest)?,
        None if !a.run.is_empty() => eval_runs(a, &mut manifest)?,
        None => return Err(PipelineError::Usage("pass --model with --test, or one or more --run LABEL=DIR".into())),
    };
    print!("{}", table.to_markdown());
    print!("{}", direction_summary(a, &table));
    if let Some(dir) = &a.report_dir {
        write_tables(dir, &table)?;
        manifest.outputs = vec![dir.join("accuracy.csv"), dir.join("accuracy.md")];
        manifest.write(&dir.join("eval.manifest.toml"))?;
    }
    Ok(manifest)
}

pub fn cmd_bench(a: &BenchArgs, argv: Vec<String>) -> Result<RunManifest, PipelineError> {
    let mut manifest = RunManifest::new("bench", argv);
    let config = resolve_config(&a.scatter)?;
    if config.log.mode == LogMode::Auto {
        return Err(PipelineError::Usage("bench needs fixed or disabled log offsets".into()));
    }
    let filters = load_default_filters();
    let mut report = String::from("## Scattering benchmark\n\n");
    for (i, res) in config.resolutions.iter().enumerate() {
        let stats = bench_stages(&config, *res, &filters, a.iterations, a.seed)?;
        let title = format!("R{} stages ({}x{}, {} levels, single channel)", i + 1, res.side, res.side, res.levels);
        report.push_str(&stages_markdown(&title, &stats));
        report.push('\n');
        manifest.time(&format!("R{}-total-mean", i + 1), stats.last().map_or(0.0, |s| s.mean_seconds));
    }
    if a.fft {
        let res = config.resolutions[0];
        let (spatial, fft) = compare_first_layer(res.side, res.levels, &filters, a.iterations, a.seed)?;
        report.push_str(&stages_markdown(
            &format!("First layer, {}x{} at {} scales", res.side, res.side, res.levels),
            &[spatial.clone(), fft.clone()],
        ));
        report.push_str(&format!(
            "\nspatial filter bank is {:.2}x the speed of the FFT reference\n\n",
            fft.mean_seconds / spatial.mean_seconds
        ));
    }
    let timings = bench_resolutions(&config, &filters, a.images, a.rounds, a.seed)?;
    report.push_str(&resolutions_markdown(&timings));
    print!("{report}");
    manifest.config = Some(config);
    if let Some(out) = &a.out {
        crate::data::write_atomic(out, |w| w.write_all(report.as_bytes()))?;
        manifest.outputs = vec![out.clone()];
        manifest.write(&manifest_path(out))?;
    }
    Ok(manifest)
}

pub fn run(cli: Cli, argv: Vec<String>) -> Result<RunManifest, PipelineError> {
    if let Some(n) = cli.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Extract(a) => cmd_extract(a, argv),
        Command::TuneLog(a) => cmd_tune_log(a, argv),
        Command::Select(a) => cmd_select(a, argv),
        Command::Train(a) => cmd_train(a, argv),
        Command::Eval(a) => cmd_eval(a, argv),
        Command::Bench(a) => cmd_bench(a, argv),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args(args: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let rest = args.into_iter().skip(2).collect();
    match run(cli, rest) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_resolutions_and_runs() {
        assert_eq!(parse_resolution("64:5").unwrap(), Resolution::new(64, 5));
        assert_eq!(parse_resolution("64:5:6").unwrap().j(), 6);
        assert!(parse_resolution("64").is_err());
        assert_eq!(parse_run("log=out/a").unwrap(), ("log".into(), PathBuf::from("out/a")));
        assert!(parse_run("=x").is_err());
    }

    #[test]
    fn config_overrides() {
        let args = ConfigArgs {
            config: None,
            resolutions: vec![Resolution::new(64, 5)],
            log: Some(LogArg::Off),
            k: vec![],
        };
        let c = resolve_config(&args).unwrap();
        assert_eq!(c.resolutions.len(), 1);
        assert!(!c.log.enabled());
        let bad = ConfigArgs {
            config: None,
            resolutions: vec![],
            log: None,
            k: vec![1.0, -2.0, 1.0, 1.0],
        };
        assert_eq!(PipelineError::from(resolve_config(&bad).unwrap_err()).exit_code(), 2);
    }

    #[test]
    fn usage_errors_exit_two() {
        let code = |a: &[&str]| main_with_args(a.iter().map(|s| s.to_string()).collect());
        assert_eq!(code(&["dtscatter"]), 2);
        assert_eq!(code(&["dtscatter", "frobnicate"]), 2);
        assert_eq!(code(&["dtscatter", "--help"]), 0);
        assert_eq!(code(&["dtscatter", "eval"]), 2);
        assert_eq!(code(&["dtscatter", "bench", "--resolutions", "64:x"]), 2);
    }
}
