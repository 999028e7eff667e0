use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{error::ErrorKind, Parser, Subcommand, ValueEnum};

use castline::commands::{self, Overrides, Session};
use castline::subtitle::SubtitleFormat;
use castline::synth::SynthConfig;

#[derive(Parser)]
#[command(name = "castline", version, about = "Character-aware subtitles from audio-visual features")]
struct Cli {
    /// Series config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    unknown_distance: Option<f64>,
    /// DER collar in seconds.
    #[arg(long, global = true)]
    collar: Option<f64>,
    /// Report DER over overlapping speech as well (default).
    #[arg(long, global = true, overrides_with = "no_overlap")]
    overlap: bool,
    #[arg(long, global = true, overrides_with = "overlap")]
    no_overlap: bool,
    /// Evaluate and sweep only segments longer than the long-segment cutoff.
    #[arg(long, global = true)]
    long_only: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Srt,
    Vtt,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Easy,
    Noisy,
}

#[derive(Subcommand)]
enum Command {
    /// Mine voice exemplars and print the yield table.
    Exemplars {
        #[arg(long)]
        out: PathBuf,
    },
    /// Label segments by nearest exemplar centroid.
    Assign {
        /// Defaults to OUT/exemplars.ndjson.
        #[arg(long)]
        exemplars: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build ground truth by aligning transcripts to timed words.
    Align {
        #[arg(long)]
        out: PathBuf,
    },
    /// Score assignments against ground truth.
    Eval {
        /// Directory of EPISODE.assignments.ndjson; defaults to OUT.
        #[arg(long)]
        assignments: Option<PathBuf>,
        /// Directory of EPISODE.truth.ndjson; defaults to the manifests' truth files.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Precision against proportion of classified segments over a threshold grid.
    Sweep {
        #[arg(long)]
        exemplars: Option<PathBuf>,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write character-tagged subtitles.
    Emit {
        #[arg(long)]
        assignments: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic series.
    Synth {
        #[arg(long, value_enum, default_value = "easy")]
        preset: Preset,
        #[arg(long)]
        seed: Option<u64>,
        /// TOML generator settings; replaces the preset.
        #[arg(long)]
        synth_config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// exemplars, assign, emit and (with ground truth) eval.
    Run {
        #[arg(long)]
        out: PathBuf,
    },
    /// Write segment lists for the voice-embedding step.
    Segments {
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse every input file and summarise it.
    Validate,
}

enum Failure {
    Usage(String),
    Data(castline::Error),
}

impl From<castline::Error> for Failure {
    fn from(e: castline::Error) -> Self {
        Failure::Data(e)
    }
}

fn session(cli: &Cli) -> Result<Session, Failure> {
    let path = cli.config.as_deref().ok_or_else(|| Failure::Usage("this command needs --config PATH".into()))?;
    let overrides = Overrides {
        unknown_distance: cli.unknown_distance,
        collar: cli.collar,
        include_overlap: (cli.overlap || cli.no_overlap).then_some(!cli.no_overlap),
        long_only: cli.long_only,
    };
    Ok(Session::open(path, &overrides)?)
}

fn format(cli: &Cli) -> SubtitleFormat {
    match cli.format {
        Some(Format::Vtt) => SubtitleFormat::Vtt,
        _ => SubtitleFormat::Srt,
    }
}

fn dispatch(cli: &Cli) -> Result<String, Failure> {
    let or_out = |p: &Option<PathBuf>, out: &Path, file: &str| {
        p.clone().unwrap_or_else(|| if file.is_empty() { out.to_path_buf() } else { out.join(file) })
    };
    let text = match &cli.command {
        Command::Synth { preset, seed, synth_config, out } => {
            let mut config = match synth_config {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| castline::Error::io(path, e))?;
                    SynthConfig::from_toml(&text)?
                }
                None => match preset {
                    Preset::Easy => SynthConfig::easy(0),
                    Preset::Noisy => SynthConfig::noisy(0),
                },
            };
            if let Some(s) = seed {
                config.seed = *s;
            }
            commands::synth(&config, out)?.1
        }
        Command::Exemplars { out } => commands::exemplars(&session(cli)?, out)?,
        Command::Assign { exemplars, out } => {
            commands::assign(&session(cli)?, &or_out(exemplars, out, "exemplars.ndjson"), out)?
        }
        Command::Align { out } => commands::align(&session(cli)?, out)?,
        Command::Eval { assignments, truth, out } => {
            commands::eval(&session(cli)?, &or_out(assignments, out, ""), truth.as_deref(), out)?
        }
        Command::Sweep { exemplars, truth, out } => {
            commands::sweep(&session(cli)?, &or_out(exemplars, out, "exemplars.ndjson"), truth.as_deref(), out)?
        }
        Command::Emit { assignments, out } => {
            commands::emit(&session(cli)?, &or_out(assignments, out, ""), out, format(cli))?
        }
        Command::Run { out } => commands::run(&session(cli)?, out, format(cli))?,
        Command::Segments { out } => commands::segments(&session(cli)?, out)?,
        Command::Validate => commands::validate(&session(cli)?)?,
    };
    Ok(text)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("CASTLINE_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
