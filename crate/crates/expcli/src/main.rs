use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sgim_expcli::config::ExperimentConfig;
use sgim_expcli::error::ExpError;
use sgim_expcli::{compare, output_root, run_dir, runner, star_run};

/// Intrinsically motivated multi-task learner and maze abstraction runs.
#[derive(Parser)]
#[command(name = "sgim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the learner described by a configuration file.
    Run {
        config: PathBuf,
        /// Seeds to run instead of the configured one; runs execute in
        /// parallel, each in its own directory.
        #[arg(long, value_delimiter = ',')]
        seed: Vec<u64>,
    },
    /// Run the `[star]` section of a configuration file.
    StarRun {
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        seed: Vec<u64>,
    },
    /// Check a configuration file without running it.
    Validate { config: PathBuf },
    /// Compare final evaluation errors of run directories.
    Compare {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Output file; `comparison.csv` under the output root by default.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate evaluation and selection curves of run directories.
    Curves {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Output directory; `curves` under the output root by default.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Width of selection bins, in iterations.
        #[arg(long, default_value_t = 250)]
        bin: usize,
    },
}

struct Failure {
    error: ExpError,
    source: Option<String>,
}

impl From<ExpError> for Failure {
    fn from(error: ExpError) -> Self {
        Self { error, source: None }
    }
}

fn load(path: &Path) -> Result<(ExperimentConfig, String), Failure> {
    let (config, source) = ExperimentConfig::load(path)?;
    Ok((config, source))
}

fn with_source<T>(r: Result<T, ExpError>, source: &str) -> Result<T, Failure> {
    r.map_err(|error| Failure {
        error,
        source: Some(source.to_string()),
    })
}

fn seeded(config: &ExperimentConfig, seeds: &[u64]) -> Vec<ExperimentConfig> {
    if seeds.is_empty() {
        return vec![config.clone()];
    }
    seeds
        .iter()
        .map(|&seed| {
            let mut c = config.clone();
            c.seed = seed;
            if seeds.len() > 1 {
                c.output.dir = None;
            }
            c
        })
        .collect()
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn execute(command: Command) -> Result<(), Failure> {
    let root = output_root();
    match command {
        Command::Run { config, seed } => {
            let (cfg, source) = load(&config)?;
            with_source(cfg.setup().map(|_| ()), &source)?;
            let configs = seeded(&cfg, &seed);
            let results: Vec<Result<PathBuf, ExpError>> = std::thread::scope(|s| {
                let handles: Vec<_> = configs
                    .iter()
                    .map(|c| {
                        let dir = run_dir(c, &root);
                        s.spawn(move || runner::run(c, &dir).map(|_| dir))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("run worker panicked")).collect()
            });
            for r in results {
                println!("{}", r?.display());
            }
        }
        Command::StarRun { config, seed } => {
            let (cfg, source) = load(&config)?;
            let section = cfg.star.clone().ok_or_else(|| ExpError::Invalid {
                key: "star".into(),
                message: "a [star] section is required".into(),
            });
            let setup = with_source(section.and_then(|s| s.setup(&base_dir(&config))), &source)?;
            let configs = seeded(&cfg, &seed);
            let results: Vec<Result<(PathBuf, star_run::StarRecord), ExpError>> = std::thread::scope(|s| {
                let handles: Vec<_> = configs
                    .iter()
                    .map(|c| {
                        let dir = run_dir(c, &root);
                        let setup = &setup;
                        s.spawn(move || {
                            let record = star_run::execute(&c.label, c.seed, setup)?;
                            star_run::write(&record, &dir)?;
                            Ok((dir, record))
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("run worker panicked")).collect()
            });
            for r in results {
                let (dir, record) = r?;
                println!(
                    "{}: success {:.3}, greedy path {}, regions {}",
                    dir.display(),
                    record.success_rate(),
                    record
                        .greedy_steps()
                        .map_or_else(|| "unsuccessful".to_string(), |n| n.to_string()),
                    record.final_abstraction().len()
                );
            }
        }
        Command::Validate { config } => {
            let (cfg, source) = load(&config)?;
            with_source(cfg.setup().map(|_| ()), &source)?;
            if let Some(star) = &cfg.star {
                with_source(star.setup(&base_dir(&config)).map(|_| ()), &source)?;
            }
            println!("{}: ok", config.display());
        }
        Command::Compare { dirs, out } => {
            let table = compare::compare_dirs(&dirs)?;
            let out = out.unwrap_or_else(|| root.join("comparison.csv"));
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(sgim_expcli::error::io_err(parent))?;
            }
            let body = table.to_csv();
            std::fs::write(&out, &body).map_err(sgim_expcli::error::io_err(&out))?;
            print!("{body}");
        }
        Command::Curves { dirs, out, bin } => {
            let out = out.unwrap_or_else(|| root.join("curves"));
            compare::curves(&dirs, bin, &out)?;
            println!("{}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { error, source }) => {
            eprintln!("error: {}", error.describe(source.as_deref()));
            ExitCode::from(error.exit_code() as u8)
        }
    }
}
