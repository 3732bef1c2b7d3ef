use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use formant_norm::corpus::CorpusError;
use formant_norm::pipeline::projected_stats;
use formant_norm::plot::{distance_rays, emit_distance_rays, emit_scatter, scatter_for};
use formant_norm::reproduce::Status;
use formant_norm::stats::STATS_CSV_HEADER;
use formant_norm::{
    evaluate, reproduce_all, Corpus, Highlight, Method, Model, ModelOptions, PlotFormat, Pool, Space, Split, Vowel,
    VowelStatistics,
};

mod config;

/// Vowel formant normalization and classification.
#[derive(Debug, Parser)]
#[command(name = "formant-norm", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Corpus file, raw table or CSV [default: the bundled Peterson & Barney table]
    #[arg(long, global = true, env = "FORMANT_NORM_DATA")]
    input: Option<PathBuf>,
    /// Vowels to drop, comma separated, or `none` [default: ER]
    #[arg(long, global = true)]
    exclude: Option<String>,
    /// Keep only unanimously identified samples
    #[arg(long, global = true)]
    unanimous_only: bool,
    /// Space of the de-normalized statistics and hypothesis distances [default: mel]
    #[arg(long, global = true)]
    space: Option<Space>,
    /// External per-vowel Hz means (`vowel,f1_hz,f2_hz,f3_hz`) for de-normalization
    #[arg(long, global = true)]
    raw_stats: Option<PathBuf>,
    /// Flat key = value file supplying any of the options above
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse the corpus and write it as CSV
    Ingest {
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Per-vowel means and SDs
    Stats {
        #[arg(long, default_value = "raw")]
        method: Method,
        #[arg(long, default_value = "mwc")]
        pool: Pool,
        /// Space of raw statistics
        #[arg(long, default_value = "hz")]
        stats_space: Space,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Normalize every sample of a pool
    Normalize {
        #[arg(long)]
        method: Method,
        #[arg(long, default_value = "mwc")]
        pool: Pool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Accuracy and confusion report as JSON
    Classify {
        #[arg(long)]
        method: Method,
        #[arg(long, default_value = "mwc")]
        pool: Pool,
        #[arg(long, default_value = "insample")]
        split: Split,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Scatter plot with cross-hairs and vowel triangles
    Plot {
        #[arg(long, default_value = "raw")]
        method: Method,
        #[arg(long, default_value = "mwc")]
        pool: Pool,
        #[arg(long, default_value = "svg")]
        format: PlotFormat,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Distance rays from one sample to every vowel mean
    PlotRays {
        #[arg(long, value_enum)]
        mode: RayMode,
        /// SPEAKER:VOWEL:REPETITION, e.g. 2:AA:1
        #[arg(long)]
        sample: String,
        #[arg(long, default_value = "mwc")]
        pool: Pool,
        /// Highlight the smallest weighted distance instead of the shortest ray
        #[arg(long)]
        weighted: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Regenerate every accuracy, check and figure
    ReproduceAll {
        #[arg(long, default_value = "reproduction")]
        output_dir: PathBuf,
        /// Exit with status 3 when a blocking comparison fails
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RayMode {
    Raw,
    Iht,
}

/// Options after merging flags, environment and config file.
struct Run {
    input: Option<PathBuf>,
    exclude: BTreeSet<Vowel>,
    unanimous_only: bool,
    options: ModelOptions,
}

fn parse_exclude(s: &str) -> Result<BTreeSet<Vowel>> {
    if s.trim().eq_ignore_ascii_case("none") || s.trim().is_empty() {
        return Ok(BTreeSet::new());
    }
    s.split(',')
        .map(|v| Vowel::parse_label(v.trim()).ok_or_else(|| anyhow!("unknown vowel `{}`", v.trim())))
        .collect()
}

impl Run {
    fn from_common(c: &Common) -> Result<Self> {
        let file = match &c.config {
            Some(p) => config::load(p).context("config")?,
            None => Default::default(),
        };
        let input = c.input.clone().or_else(|| file.get("input").map(PathBuf::from));
        let exclude = parse_exclude(
            c.exclude
                .as_deref()
                .or(file.get("exclude").map(String::as_str))
                .unwrap_or("ER"),
        )
        .context("config")?;
        let unanimous_only = c.unanimous_only
            || file
                .get("unanimous_only")
                .map(|v| config::truthy(v))
                .transpose()
                .context("config")?
                .unwrap_or(false);
        let space = match (c.space, file.get("space")) {
            (Some(s), _) => s,
            (None, Some(s)) => s.parse().map_err(|e: String| anyhow!(e)).context("config")?,
            (None, None) => Space::Mel,
        };
        let raw_stats = match c.raw_stats.clone().or_else(|| file.get("raw_stats").map(PathBuf::from)) {
            Some(p) => {
                let f = File::open(&p).with_context(|| format!("raw-stats: cannot open {}", p.display()))?;
                Some(VowelStatistics::read_means_csv(BufReader::new(f)).context("raw-stats")?)
            }
            None => None,
        };
        Ok(Self {
            input,
            exclude,
            unanimous_only,
            options: ModelOptions {
                denorm_space: space,
                raw_stats,
            },
        })
    }

    fn corpus(&self) -> Result<Corpus> {
        let all = match &self.input {
            Some(p) => Corpus::open(p).context("corpus")?,
            None => Corpus::peterson_barney(),
        };
        let keep: BTreeSet<Vowel> = Vowel::ALL.into_iter().filter(|v| !self.exclude.contains(v)).collect();
        let mut c = all.filter_vowels(&keep).context("corpus")?;
        if self.unanimous_only {
            c = c.unanimous_only().context("corpus")?;
        }
        Ok(c)
    }
}

fn sink(output: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match output {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("write: cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn parse_sample_key(s: &str) -> Result<(u32, Vowel, u8)> {
    let parts: Vec<&str> = s.split(':').collect();
    let [speaker, vowel, rep] = parts[..] else {
        bail!("expected SPEAKER:VOWEL:REPETITION, got `{s}`");
    };
    Ok((
        speaker.parse().with_context(|| format!("bad speaker `{speaker}`"))?,
        Vowel::parse_label(vowel).ok_or_else(|| anyhow!("unknown vowel `{vowel}`"))?,
        rep.parse().with_context(|| format!("bad repetition `{rep}`"))?,
    ))
}

fn fmt4(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.4}")).unwrap_or_default()
}

fn run(cli: Cli) -> Result<ExitCode> {
    let run = Run::from_common(&cli.common)?;
    let corpus = run.corpus()?;
    let options = &run.options;
    match cli.command {
        Command::Ingest { output } => {
            let mut out = sink(&output)?;
            corpus.write_csv(&mut out).context("write")?;
            out.flush().context("write")?;
            eprintln!(
                "ingested {} samples, {} speakers, {} vowels",
                corpus.len(),
                corpus.speakers().len(),
                corpus.vowels().len()
            );
        }
        Command::Stats {
            method,
            pool,
            stats_space,
            output,
        } => {
            let pooled = corpus.pooled(pool).context("corpus")?;
            let stats = match method {
                Method::Raw => VowelStatistics::raw(&pooled, stats_space).context("stats")?,
                m => {
                    let points = Model::fit(m, &pooled, options)
                        .and_then(|model| model.project_all(&pooled))
                        .context("normalize")?;
                    projected_stats(&points).context("stats")?
                }
            }
            .with_pool(pool.name());
            let mut out = sink(&output)?;
            writeln!(out, "{STATS_CSV_HEADER}").context("write")?;
            stats.write_csv_rows(&mut out).context("write")?;
            out.flush().context("write")?;
        }
        Command::Normalize { method, pool, output } => {
            let pooled = corpus.pooled(pool).context("corpus")?;
            let model = Model::fit(method, &pooled, options).context("normalize")?;
            let three = !matches!(method, Method::Lobanov | Method::Wattfab);
            let mut out = sink(&output)?;
            let x3 = if three { ",x3" } else { "" };
            writeln!(out, "speaker_id,group,vowel,repetition,x1,x2{x3},space,predicted_vowel").context("write")?;
            for s in &pooled {
                let p = model.project(s).context("normalize")?;
                let (predicted, _) = model.classify(s).context("classify")?;
                let x3 = if three {
                    format!(",{}", fmt4(p.native[2]))
                } else {
                    String::new()
                };
                writeln!(
                    out,
                    "{},{},{},{},{},{}{x3},{},{}",
                    s.speaker_id,
                    s.group,
                    s.vowel,
                    s.repetition,
                    fmt4(p.native[0]),
                    fmt4(p.native[1]),
                    p.native_space,
                    predicted
                )
                .context("write")?;
            }
            out.flush().context("write")?;
        }
        Command::Classify {
            method,
            pool,
            split,
            output,
        } => {
            let report = evaluate(&corpus, method, pool, split, options).context("classify")?;
            let mut out = sink(&output)?;
            writeln!(out, "{}", report.to_json()).context("write")?;
            out.flush().context("write")?;
        }
        Command::Plot {
            method,
            pool,
            format,
            output,
        } => {
            let pooled = corpus.pooled(pool).context("corpus")?;
            let spec = scatter_for(method, &pooled, options).context("plot")?;
            let mut out = sink(&output)?;
            emit_scatter(&spec, &mut out, format).context("plot")?;
            out.flush().context("write")?;
        }
        Command::PlotRays {
            mode,
            sample,
            pool,
            weighted,
            output,
        } => {
            let (speaker, vowel, rep) = parse_sample_key(&sample).context("plot-rays")?;
            let pooled = corpus.pooled(pool).context("corpus")?;
            let s = *pooled
                .find(speaker, vowel, rep)
                .ok_or_else(|| anyhow!("no sample {speaker}:{vowel}:{rep} in pool {pool}"))
                .context("plot-rays")?;
            let method = match mode {
                RayMode::Raw => Method::Raw,
                RayMode::Iht => Method::Iht,
            };
            let highlight = if weighted {
                Highlight::Weighted
            } else {
                Highlight::Euclidean
            };
            let spec = distance_rays(method, &pooled, &s, highlight, options).context("plot-rays")?;
            let mut out = sink(&output)?;
            emit_distance_rays(&spec, &mut out).context("plot-rays")?;
            out.flush().context("write")?;
            eprintln!(
                "highlighted {} ({:.4} mel)",
                spec.highlighted_vowel(),
                spec.rays[spec.highlighted].length
            );
        }
        Command::ReproduceAll { output_dir, strict } => {
            let rep = reproduce_all(&corpus, options).context("reproduce")?;
            rep.write_artifacts(&corpus, options, &output_dir)
                .context("reproduce")?;
            print!("{}", rep.table());
            eprintln!("artifacts written to {}", output_dir.display());
            if strict && rep.rows.iter().any(|r| r.status == Status::Fail) {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<CorpusError>().is_some() {
        2
    } else {
        1
    }
}

fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<io::Error>()
            .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            // Causes already quoted by the message above them are skipped.
            let mut msg = String::new();
            for cause in e.chain().map(ToString::to_string) {
                if !msg.ends_with(&cause) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&cause);
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(exit_code(&e))
        }
    }
}
