//! Command-line front end. Every subcommand parses and validates all of its
//! inputs before the first output file is written.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use crate::activation::{bucketed_profile, histogram, mean_activation};
use crate::config::RunConfig;
use crate::dataset::{load_dataset, Corpus, DatasetFormat};
use crate::error::{Error, Result};
use crate::eval::perplexity;
use crate::llmdcos::{dataset_relevance, llmdcos_profile, semantic_eval, LayerRange, PairId, SampleSet};
use crate::model::{load_checkpoint, train, ModelWeights};
use crate::pruning::{
    build_calibration, build_schedule, prune, CalibrationSet, ComparisonGroup, PruneMethod,
    PruneOptions, SparsitySchedule,
};
use crate::report;
use crate::tokenizer::encode_sample;

pub const THREADS_ENV: &str = "ACTIGRAPH_THREADS";

/// Window of the training-loss moving average written to the training log.
pub const LOSS_WINDOW: usize = 50;

#[derive(Debug, Parser)]
#[command(name = "actigraph", version, about = "Parameter activation analysis for small transformers")]
pub struct Cli {
    /// Worker threads; the ACTIGRAPH_THREADS environment variable takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct FormatArgs {
    /// Corpus format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<DatasetFormat>,
    /// JSONL field holding the text.
    #[arg(long, default_value = "text")]
    pub field: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model from a JSON run configuration.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `paths.corpus`.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Overrides `train.steps`.
        #[arg(long)]
        steps: Option<usize>,
        /// Overrides `paths.checkpoint`.
        #[arg(long)]
        ckpt: Option<PathBuf>,
        /// Overrides `paths.out_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Per-layer activation profiles and histograms of a dataset.
    Activate {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000, value_parser = positive)]
        bucket: usize,
        #[arg(long, default_value_t = 50, value_parser = positive)]
        bins: usize,
        #[arg(long, default_value_t = 64, value_parser = positive)]
        max_samples: usize,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Per-layer LLMDcos between the i-th samples of two datasets.
    Cos {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_parser = parse_range)]
        range: Option<LayerRange>,
        /// Number of pairs; defaults to the smaller dataset.
        #[arg(long, value_parser = positive)]
        pairs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Dataset-by-dataset relevance matrix.
    Relevance {
        #[arg(long)]
        ckpt: PathBuf,
        /// `NAME=PATH` or `PATH` (named after the file stem); repeatable.
        #[arg(long = "data", required = true, num_args = 1..)]
        data: Vec<Labeled>,
        #[arg(long, value_parser = parse_range)]
        range: Option<LayerRange>,
        #[arg(long, default_value_t = 64, value_parser = positive)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64, value_parser = positive)]
        max_samples: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Prune with a uniform or two-band sparsity schedule.
    Prune {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long, value_parser = fraction)]
        global: f64,
        /// Shallow band of layers, e.g. `2-5`.
        #[arg(long, value_parser = parse_range, requires = "shallow_s")]
        shallow: Option<LayerRange>,
        #[arg(long, value_parser = fraction, requires = "shallow")]
        shallow_s: Option<f64>,
        /// Calibration corpora; repeatable.
        #[arg(long, num_args = 1..)]
        calib: Vec<PathBuf>,
        #[arg(long, default_value_t = 16, value_parser = positive)]
        nsamples: usize,
        /// Calibration sequence length; defaults to the model context.
        #[arg(long, value_parser = positive)]
        seqlen: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = PruneMethod::Wanda)]
        method: PruneMethod,
        #[arg(long, value_enum, default_value_t = ComparisonGroup::PerOutput)]
        group: ComparisonGroup,
        #[arg(long)]
        out: PathBuf,
        /// Pruned checkpoint path; defaults to `<out>/pruned.actg`.
        #[arg(long)]
        save: Option<PathBuf>,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Perplexity of each checkpoint on each corpus.
    Eval {
        /// `LABEL=PATH` or `PATH`; repeatable.
        #[arg(long, required = true, num_args = 1..)]
        ckpt: Vec<Labeled>,
        #[arg(long, required = true, num_args = 1..)]
        data: Vec<Labeled>,
        /// Window length; defaults to the model context.
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Correlate range LLMDcos with gold similarity scores.
    Semsim {
        #[arg(long)]
        ckpt: PathBuf,
        /// JSONL with `a`, `b`, `score`, or TSV `a<TAB>b<TAB>score`.
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, value_parser = parse_range)]
        range: Option<LayerRange>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A path with an optional `NAME=` prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeled {
    pub name: String,
    pub path: PathBuf,
}

impl FromStr for Labeled {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, path) = match s.split_once('=') {
            Some((n, p)) if !n.is_empty() && !n.contains(['/', '\\']) => (n.to_string(), PathBuf::from(p)),
            _ => {
                let path = PathBuf::from(s);
                (stem(&path), path)
            }
        };
        if path.as_os_str().is_empty() {
            return Err(format!("`{s}` has an empty path"));
        }
        Ok(Labeled { name, path })
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is not in [0, 1]"))
    }
}

fn parse_range(s: &str) -> Result<LayerRange, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Resolves the worker count: environment, then flag, then all cores.
pub fn resolve_threads(flag: Option<usize>) -> Result<usize, String> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        return positive(v.trim()).map_err(|e| format!("{THREADS_ENV}={v}: {e}"));
    }
    match flag {
        Some(0) => Err("--threads must be at least 1".into()),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code: 0 on success, 2 for usage errors, 1 for
/// pipeline failures.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let threads = match resolve_threads(cli.threads) {
        Ok(n) => n,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return 1;
        }
    };
    match pool.install(|| execute(cli.command)) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            1
        }
    }
}

/// Files produced by a command, written only after everything succeeded.
#[derive(Default)]
struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    fn add(&mut self, path: impl Into<PathBuf>, contents: impl Into<Vec<u8>>) {
        self.files.push((path.into(), contents.into()));
    }

    fn json(&mut self, path: impl Into<PathBuf>, value: &impl serde::Serialize) {
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        self.add(path, text);
    }

    fn write(self) -> Result<()> {
        for (path, contents) in self.files {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

fn check_out_dir(dir: &Path) -> Result<()> {
    if dir.exists() && !dir.is_dir() {
        return Err(Error::Data(format!("output path {} is not a directory", dir.display())));
    }
    Ok(())
}

fn load(path: &Path, fmt: &FormatArgs) -> Result<Corpus> {
    let format = fmt.format.unwrap_or_else(|| DatasetFormat::from_path(path));
    load_dataset(path, format, Some(&fmt.field))
}

fn load_named(l: &Labeled, fmt: &FormatArgs) -> Result<Corpus> {
    let mut c = load(&l.path, fmt)?;
    c.name = l.name.clone();
    Ok(c)
}

/// Analysis samples of a corpus; each fits one loss evaluation.
fn samples_of(corpus: &Corpus, model: &ModelWeights, max: Option<usize>) -> Result<Vec<Vec<usize>>> {
    let mut s = corpus.samples(model.config.context_len + 1);
    if let Some(m) = max {
        s.truncate(m);
    }
    if s.is_empty() {
        return Err(Error::Data(format!("dataset `{}` has no usable samples", corpus.name)));
    }
    Ok(s)
}

fn resolve_range(range: Option<LayerRange>, model: &ModelWeights) -> Result<LayerRange> {
    let r = range.unwrap_or(LayerRange::all(model.config.n_layers));
    r.validate(model.config.n_layers)?;
    Ok(r)
}

fn execute(command: Command) -> Result<serde_json::Value> {
    match command {
        Command::Train { config, data, steps, ckpt, out, format } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(d) = data {
                cfg.paths.corpus = Some(d);
            }
            if let Some(s) = steps {
                cfg.train.steps = s;
            }
            if let Some(c) = ckpt {
                cfg.paths.checkpoint = c;
            }
            if let Some(o) = out {
                cfg.paths.out_dir = o;
            }
            if format.format.is_some() {
                cfg.paths.corpus_format = format.format;
            }
            cfg.validate()?;
            check_out_dir(&cfg.paths.out_dir)?;
            let corpus_path = cfg.paths.corpus.clone().ok_or(Error::Config {
                field: "paths.corpus",
                reason: "a training corpus is required".into(),
            })?;
            let fmt = FormatArgs {
                format: cfg.paths.corpus_format,
                field: cfg.paths.text_field.clone().unwrap_or_else(|| format.field.clone()),
            };
            let corpus = load(&corpus_path, &fmt)?;

            let mut model = ModelWeights::init(cfg.model)?;
            let mut opts = cfg.train.clone();
            opts.seed = cfg.seed;
            let log = train(&mut model, corpus.token_stream(), &opts)?;
            let ma = log.moving_average(LOSS_WINDOW);

            let mut outs = Outputs::default();
            outs.add(&cfg.paths.checkpoint, model.to_bytes()?);
            let mut csv = String::from("step,loss,moving_average\n");
            for (i, (l, m)) in log.losses.iter().zip(&ma).enumerate() {
                csv.push_str(&format!("{},{l},{m}\n", i + 1));
            }
            outs.add(cfg.paths.out_dir.join("training_log.csv"), csv);
            outs.json(cfg.paths.out_dir.join("run_config.json"), &cfg);
            outs.write()?;
            Ok(json!({
                "command": "train",
                "steps": log.losses.len(),
                "first_loss": log.losses.first(),
                "final_loss": log.losses.last(),
                "final_moving_average": ma.last(),
                "checkpoint": cfg.paths.checkpoint,
            }))
        }

        Command::Activate { ckpt, data, out, bucket, bins, max_samples, format } => {
            check_out_dir(&out)?;
            let model = load_checkpoint(&ckpt)?;
            let corpus = load(&data, &format)?;
            let samples = samples_of(&corpus, &model, Some(max_samples))?;
            let v = mean_activation(&model, &samples)?;

            let mut outs = Outputs::default();
            let mut layers = Vec::new();
            for l in 1..=model.config.n_layers {
                let profile = bucketed_profile(&v, l, bucket)?;
                let hist = histogram(&profile.bucket_means, bins)?;
                outs.add(out.join(format!("activation_layer{l}.csv")), report::profile_csv(&profile));
                outs.add(out.join(format!("histogram_layer{l}.csv")), report::histogram_csv(&hist));
                let vals = v.layer(l)?;
                let mean = vals.iter().map(|&x| x as f64).sum::<f64>() / vals.len() as f64;
                let max = vals.iter().copied().fold(0.0f32, f32::max) as f64;
                layers.push(json!({"layer": l, "values": vals.len(), "mean": mean, "max": max, "buckets": profile.bucket_means.len()}));
            }
            let summary = json!({
                "command": "activate",
                "dataset": corpus.name,
                "samples": samples.len(),
                "bucket_size": bucket,
                "bins": bins,
                "layers": layers,
            });
            outs.json(out.join("activation_summary.json"), &summary);
            outs.write()?;
            Ok(summary)
        }

        Command::Cos { ckpt, a, b, range, pairs, out, format } => {
            if let Some(o) = &out {
                check_out_dir(o)?;
            }
            let model = load_checkpoint(&ckpt)?;
            let range = resolve_range(range, &model)?;
            let (ca, cb) = (load(&a, &format)?, load(&b, &format)?);
            let (sa, sb) = (samples_of(&ca, &model, None)?, samples_of(&cb, &model, None)?);
            let n = pairs.unwrap_or(usize::MAX).min(sa.len()).min(sb.len());
            let mut reports = Vec::with_capacity(n);
            for i in 0..n {
                let pair = PairId {
                    dataset_a: ca.name.clone(),
                    index_a: i,
                    dataset_b: cb.name.clone(),
                    index_b: i,
                };
                reports.push(llmdcos_profile(&model, &sa[i], &sb[i], pair)?.with_range(range)?);
            }
            let mean = reports.iter().filter_map(|r| r.range_mean.as_ref()).map(|m| m.mean).sum::<f64>()
                / n as f64;
            let summary = json!({
                "command": "cos",
                "range": range.to_string(),
                "pairs": n,
                "mean_range_llmdcos": mean,
                "reports": reports,
            });
            if let Some(o) = out {
                let mut outs = Outputs::default();
                outs.add(o.join("llmdcos_pairs.csv"), report::pairs_csv(&reports));
                outs.json(o.join("llmdcos.json"), &summary);
                outs.write()?;
            }
            Ok(summary)
        }

        Command::Relevance { ckpt, data, range, pairs, seed, max_samples, out, format } => {
            check_out_dir(&out)?;
            let model = load_checkpoint(&ckpt)?;
            let range = resolve_range(range, &model)?;
            let mut sets = Vec::with_capacity(data.len());
            for d in &data {
                let c = load_named(d, &format)?;
                let samples = samples_of(&c, &model, Some(max_samples))?;
                sets.push(SampleSet { name: c.name, samples });
            }
            let m = dataset_relevance(&model, &sets, pairs, range, seed)?;
            let mut outs = Outputs::default();
            outs.add(out.join("relevance.csv"), report::relevance_csv(&m));
            outs.json(out.join("relevance.json"), &m);
            outs.write()?;
            Ok(json!({"command": "relevance", "range": range.to_string(), "names": m.names, "values": m.values}))
        }

        Command::Prune {
            ckpt,
            global,
            shallow,
            shallow_s,
            calib,
            nsamples,
            seqlen,
            seed,
            method,
            group,
            out,
            save,
            format,
        } => {
            check_out_dir(&out)?;
            let model = load_checkpoint(&ckpt)?;
            let cfg = model.config;
            let schedule = match (shallow, shallow_s) {
                (Some(band), Some(s)) => {
                    band.validate(cfg.n_layers)?;
                    build_schedule(&cfg, global, &band.layers().collect::<Vec<_>>(), s)?
                }
                _ => SparsitySchedule::uniform(cfg.n_layers, global)?,
            };
            let seqlen = seqlen.unwrap_or(cfg.context_len);
            if seqlen > cfg.context_len {
                return Err(Error::Length { len: seqlen, max: cfg.context_len });
            }
            let calibration = if calib.is_empty() {
                if method == PruneMethod::Wanda {
                    return Err(Error::Contract("Wanda pruning needs at least one --calib corpus".into()));
                }
                CalibrationSet { sequences: Vec::new(), sources: Vec::new() }
            } else {
                let mut texts = Vec::new();
                let mut names = Vec::new();
                for p in &calib {
                    let c = load(p, &format)?;
                    texts.extend(c.records.iter().cloned());
                    names.push(c.name.clone());
                }
                build_calibration(&texts, nsamples, seqlen, seed)?.with_sources(names)
            };
            let (pruned, mask) = prune(&model, &schedule, &calibration, PruneOptions { method, group })?;

            let save = save.unwrap_or_else(|| out.join("pruned.actg"));
            let realized: Vec<f64> = (1..=cfg.n_layers).map(|l| mask.layer_sparsity(l)).collect();
            let summary = json!({
                "command": "prune",
                "method": method,
                "group": group,
                "global": global,
                "realized_sparsity": mask.realized_sparsity(),
                "per_layer_target": schedule.per_layer,
                "per_layer_realized": realized,
                "calibration": {
                    "sources": calibration.sources,
                    "sequences": calibration.len(),
                    "seqlen": seqlen,
                    "seed": seed,
                },
                "checkpoint": save,
            });
            let mut outs = Outputs::default();
            outs.add(&save, pruned.to_bytes()?);
            outs.add(out.join("mask.actm"), mask.to_bytes(&cfg)?);
            outs.json(out.join("schedule.json"), &schedule);
            outs.json(out.join("prune_report.json"), &summary);
            outs.write()?;
            Ok(summary)
        }

        Command::Eval { ckpt, data, window, out, format } => {
            if let Some(o) = &out {
                check_out_dir(o)?;
            }
            let mut models = Vec::with_capacity(ckpt.len());
            for c in &ckpt {
                models.push((c.name.clone(), load_checkpoint(&c.path)?));
            }
            let mut corpora = Vec::with_capacity(data.len());
            for d in &data {
                corpora.push(load_named(d, &format)?);
            }
            let mut results = Vec::new();
            for (name, model) in &models {
                let w = window.unwrap_or(model.config.context_len);
                for c in &corpora {
                    let mut r = perplexity(model, &c.name, c.token_stream(), w)?;
                    r.model = name.clone();
                    results.push(r);
                }
            }
            if let Some(o) = out {
                let mut outs = Outputs::default();
                outs.add(o.join("eval.jsonl"), report::eval_jsonl(&results));
                outs.write()?;
            }
            Ok(json!({"command": "eval", "results": results}))
        }

        Command::Semsim { ckpt, pairs, range, out } => {
            if let Some(o) = &out {
                check_out_dir(o)?;
            }
            let model = load_checkpoint(&ckpt)?;
            let range = resolve_range(range, &model)?;
            let max_len = model.config.context_len + 1;
            let items: Vec<_> = load_pairs(&pairs)?
                .into_iter()
                .map(|(a, b, g)| (encode_sample(&a, max_len), encode_sample(&b, max_len), g))
                .collect();
            let e = semantic_eval(&model, &items, range)?;
            let summary = json!({
                "command": "semsim",
                "range": range.to_string(),
                "pairs": items.len(),
                "spearman": e.spearman,
            });
            if let Some(o) = out {
                let mut outs = Outputs::default();
                outs.add(o.join("semsim.csv"), report::semsim_csv(&e));
                outs.json(o.join("semsim.json"), &summary);
                outs.write()?;
            }
            Ok(summary)
        }
    }
}

#[derive(Deserialize)]
struct PairRecord {
    a: String,
    b: String,
    score: f64,
}

/// Reads `(a, b, gold)` triples from JSONL (`.jsonl`) or TSV (anything else).
pub fn load_pairs(path: &Path) -> Result<Vec<(String, String, f64)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let jsonl = DatasetFormat::from_path(path) == DatasetFormat::Jsonl;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let where_ = || format!("{} line {}", path.display(), n + 1);
        if jsonl {
            let r: PairRecord =
                serde_json::from_str(line).map_err(|e| Error::Data(format!("{}: {e}", where_())))?;
            out.push((r.a, r.b, r.score));
        } else {
            let cols: Vec<&str> = line.split('\t').collect();
            let [a, b, s] = cols[..] else {
                return Err(Error::Data(format!("{}: expected 3 tab-separated columns", where_())));
            };
            let score = s
                .trim()
                .parse()
                .map_err(|e| Error::Data(format!("{}: score `{s}`: {e}", where_())))?;
            out.push((a.to_string(), b.to_string(), score));
        }
    }
    if let Some(bad) = out.iter().find(|p| !p.2.is_finite()) {
        return Err(Error::Data(format!("non-finite gold score {}", bad.2)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labeled_paths() {
        let l: Labeled = "a=x/y.txt".parse().unwrap();
        assert_eq!((l.name.as_str(), l.path.as_path()), ("a", Path::new("x/y.txt")));
        let l: Labeled = "x/corpus.jsonl".parse().unwrap();
        assert_eq!(l.name, "corpus");
        let l: Labeled = "dir/k=v.txt".parse().unwrap();
        assert_eq!(l.name, "k=v");
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["actigraph", "prune", "--ckpt", "m", "--global", "1.5", "--out", "o"]), 2);
        assert_eq!(run(["actigraph", "cos", "--ckpt", "m", "--a", "x", "--b", "y", "--range", "8-5"]), 2);
        assert_eq!(run(["actigraph", "nonsense"]), 2);
        assert_eq!(run(["actigraph", "--help"]), 0);
    }

    #[test]
    fn missing_checkpoint_exits_one() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o");
        let code = run([
            "actigraph".into(),
            "activate".into(),
            "--ckpt".into(),
            dir.path().join("missing.actg").into_os_string(),
            "--data".into(),
            dir.path().join("missing.txt").into_os_string(),
            "--out".into(),
            out.clone().into_os_string(),
        ]);
        assert_eq!(code, 1);
        assert!(!out.exists());
    }
}
