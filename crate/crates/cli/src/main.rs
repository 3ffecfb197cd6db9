use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use eeclass::classify::{self, Hyper, Method};
use eeclass::depth::{self, DepthKind, DEFAULT_HMODE_QUANTILE, DEFAULT_PROJECTIONS};
use eeclass::embed::{self, EmbeddingKind};
use eeclass::eval::{self, Source, SuiteConfig, DEFAULT_FOLDS};
use eeclass::extremality::{self, IndexKind};
use eeclass::fdata::{self, format_float, FunctionalDataset};
use eeclass::synth::{self, DEFAULT_GRID_POINTS, DEFAULT_N_PER_GROUP};
use eeclass::Error;

/// Classify functional data through EE-plots (modified epigraph/hypograph
/// indexes) or DD-plots (functional depths).
#[derive(Debug, Parser)]
#[command(name = "eeclass", version)]
struct Cli {
    /// Master seed; every random choice is derived from it.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Only report errors on stderr.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one of the six two-group experiments to CSV.
    Generate {
        /// Experiment preset, 1 to 6.
        #[arg(long)]
        experiment: u32,
        #[arg(long, default_value_t = DEFAULT_N_PER_GROUP)]
        n_per_group: usize,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid_points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-curve extremality index or depth against a reference sample.
    Indexes {
        #[arg(long)]
        input: PathBuf,
        /// Reference sample (default: the input itself).
        #[arg(long)]
        reference: Option<PathBuf>,
        /// ei, hi, mei, mhi, fm, hm or rp.
        #[arg(long)]
        index: String,
        /// Bandwidth quantile for hm.
        #[arg(long, default_value_t = DEFAULT_HMODE_QUANTILE)]
        quantile: f64,
        /// Projection count for rp.
        #[arg(long, default_value_t = DEFAULT_PROJECTIONS)]
        projections: usize,
        /// Output CSV (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Embed curves in the EE or DD plane; write points CSV and optional SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        kind: KindArgs,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, default_value_t = 480)]
        width: u32,
        #[arg(long, default_value_t = 480)]
        height: u32,
    },
    /// Train on one file, predict another; prints accuracy and predictions.
    Classify {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[command(flatten)]
        kind: KindArgs,
        #[arg(long)]
        method: Method,
        #[command(flatten)]
        hyper: HyperArgs,
        /// Write predictions here instead of stdout.
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Stratified k-fold cross-validation on one file.
    Crossval {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        kind: KindArgs,
        #[arg(long)]
        method: Method,
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        folds: usize,
        #[command(flatten)]
        hyper: HyperArgs,
    },
    /// Full benchmark: split 80/20, cross-validate, score the held-out part.
    Suite {
        /// Comma-separated experiment presets.
        #[arg(long, default_value = "1,2,3,4,5,6", conflicts_with = "input")]
        experiments: String,
        /// Run on a labelled CSV instead of the synthetic presets.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Comma list (`1,2,3`) or inclusive range (`1..5`); default: five
        /// seeds starting at --seed.
        #[arg(long)]
        seeds: Option<String>,
        /// Comma-separated embeddings.
        #[arg(long, default_value = "ee-mei,ee-mhi,dd-fm")]
        kinds: String,
        /// Comma-separated methods.
        #[arg(long, default_value = "lda,qda,knn,svm,rf")]
        methods: String,
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        folds: usize,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        #[arg(long, default_value_t = DEFAULT_N_PER_GROUP)]
        n_per_group: usize,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid_points: usize,
        #[command(flatten)]
        hyper: HyperArgs,
        /// Output directory for folds.csv, summary.csv and SVG plots.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct KindArgs {
    /// ee-mei, ee-mhi, dd-fm, dd-hm or dd-rp.
    #[arg(long)]
    kind: EmbeddingKind,
    /// Bandwidth quantile for dd-hm.
    #[arg(long, default_value_t = DEFAULT_HMODE_QUANTILE)]
    quantile: f64,
    /// Projection count for dd-rp (directions are drawn from --seed).
    #[arg(long, default_value_t = DEFAULT_PROJECTIONS)]
    projections: usize,
}

#[derive(Debug, Args)]
struct HyperArgs {
    /// kNN neighbours (odd).
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// SVM box constraint.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// SVM RBF width (default: median heuristic).
    #[arg(long)]
    gamma: Option<f64>,
    /// Random forest size.
    #[arg(long, default_value_t = 200)]
    trees: usize,
}

impl HyperArgs {
    fn hyper(&self) -> Hyper {
        Hyper {
            k: self.k,
            c: self.c,
            gamma: self.gamma,
            trees: self.trees,
            ..Hyper::default()
        }
    }
}

fn resolve_kind(name: &str, quantile: f64, projections: usize, seed: u64) -> Result<EmbeddingKind, Error> {
    Ok(match name.parse::<EmbeddingKind>()? {
        EmbeddingKind::DdHm { .. } => EmbeddingKind::DdHm { quantile },
        EmbeddingKind::DdRp { .. } => EmbeddingKind::DdRp { projections, seed },
        other => other,
    })
}

impl KindArgs {
    fn resolve(&self, seed: u64) -> Result<EmbeddingKind, Error> {
        resolve_kind(self.kind.name(), self.quantile, self.projections, seed)
    }
}

fn read_dataset(path: &Path) -> Result<FunctionalDataset, Error> {
    let file = File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    fdata::load_csv(BufReader::new(file)).map_err(|e| match e {
        Error::Parse { line, column, message } => Error::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

fn write_output(path: Option<&Path>, body: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, body)?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn parse_list<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<Vec<T>, Error> {
    s.split(',').map(|t| t.trim().parse()).collect()
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, Error> {
    let bad = || Error::InvalidInput(format!("cannot parse seeds {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| bad()))
        .collect()
}

fn run(cli: Cli) -> Result<(), Error> {
    let seed = cli.seed;
    match cli.command {
        Command::Generate {
            experiment,
            n_per_group,
            grid_points,
            out,
        } => {
            let spec = synth::experiment_preset(experiment)?.with_size(n_per_group, grid_points);
            let data = synth::generate_experiment(&spec, seed)?;
            fdata::save_csv(&data, File::create(&out)?)?;
        }
        Command::Indexes {
            input,
            reference,
            index,
            quantile,
            projections,
            out,
        } => {
            let eval = read_dataset(&input)?;
            let reference = match reference {
                Some(p) => read_dataset(&p)?,
                None => eval.clone(),
            };
            let values = match index.to_ascii_lowercase().as_str() {
                "fm" => depth::fm_depth(&eval, &reference)?.values,
                "hm" => depth::hmode_depth(&eval, &reference, quantile)?.values,
                "rp" => depth::depth(
                    &eval,
                    &reference,
                    DepthKind::RandomProjection { projections, seed },
                )?
                .values,
                other => {
                    let kind: IndexKind = other.parse()?;
                    extremality::index_vector(&eval, &reference, kind)?.values
                }
            };
            let mut body = String::from("row,label,value\n");
            for (i, v) in values.iter().enumerate() {
                let row = eval.ids().map_or_else(|| i.to_string(), |ids| ids[i].clone());
                let label = &eval.label_names()[eval.labels()[i].index()];
                body.push_str(&format!("{row},{label},{}\n", format_float(*v)));
            }
            write_output(out.as_deref(), &body)?;
        }
        Command::Plot {
            input,
            kind,
            points,
            svg,
            width,
            height,
        } => {
            let data = read_dataset(&input)?;
            let embedded = embed::embed(&data, &data, kind.resolve(seed)?)?;
            std::fs::write(&points, embed::emit_points_csv(&embedded))?;
            if let Some(path) = svg {
                std::fs::write(path, embed::emit_svg(&embedded, width, height)?)?;
            }
        }
        Command::Classify {
            train,
            test,
            kind,
            method,
            hyper,
            predictions,
        } => {
            let train = read_dataset(&train)?;
            let test = read_dataset(&test)?;
            let kind = kind.resolve(seed)?;
            let train_emb = embed::embed(&train, &train, kind)?;
            let test_emb = embed::embed(&test, &train, kind)?;
            let model = classify::train_embedded(&train_emb, method, &hyper.hyper(), seed)?;
            let predicted = model.predict(&test_emb.points);
            let acc = classify::accuracy(&predicted, &test_emb.labels)?;
            let names = train.label_names();
            let mut body = String::from("row,label,predicted\n");
            for (i, p) in predicted.iter().enumerate() {
                let row = test.ids().map_or_else(|| i.to_string(), |ids| ids[i].clone());
                let truth = &test.label_names()[test.labels()[i].index()];
                let pred = names.get(p.index()).cloned().unwrap_or_else(|| p.to_string());
                body.push_str(&format!("{row},{truth},{pred}\n"));
            }
            println!("accuracy {}", format_float(acc));
            write_output(predictions.as_deref(), &body)?;
        }
        Command::Crossval {
            input,
            kind,
            method,
            folds,
            hyper,
        } => {
            let data = read_dataset(&input)?;
            let report = eval::kfold_cv(&data, kind.resolve(seed)?, method, &hyper.hyper(), folds, seed)?;
            println!("{}", report.summary_line());
        }
        Command::Suite {
            experiments,
            input,
            seeds,
            kinds,
            methods,
            folds,
            train_fraction,
            n_per_group,
            grid_points,
            hyper,
            out,
        } => {
            let seeds = match seeds {
                Some(s) => parse_seeds(&s)?,
                None => (seed..seed + 5).collect(),
            };
            let kinds = kinds
                .split(',')
                .map(|k| resolve_kind(k.trim(), DEFAULT_HMODE_QUANTILE, DEFAULT_PROJECTIONS, seed))
                .collect::<Result<Vec<_>, _>>()?;
            let config = SuiteConfig {
                kinds,
                methods: parse_list(&methods)?,
                seeds,
                train_fraction,
                folds,
                hyper: hyper.hyper(),
                n_per_group,
                grid_points,
            };
            let report = match input {
                Some(path) => {
                    let name = path
                        .file_stem()
                        .map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
                    let data = read_dataset(&path)?;
                    eval::run_sources(&[Source::Dataset { name, data }], &config)?
                }
                None => {
                    let ids = experiments
                        .split(',')
                        .map(|t| {
                            t.trim()
                                .parse::<u32>()
                                .map_err(|_| Error::InvalidInput(format!("bad experiment id {t:?}")))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    eval::run_suite(&ids, &config)?
                }
            };
            for path in eval::write_report(&report, &out)? {
                log::info!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.quiet {
            log::LevelFilter::Error
        } else {
            log::LevelFilter::Warn
        })
        .parse_default_env()
        .format_timestamp(None)
        .init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
