use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use treecover::points::parse_points;
use treecover::{Failure, PairSpec, Settings};
use treecover_core::assembly::DegreeReduction;
use treecover_core::geometry::PointSet;
use treecover_core::partial_nonsteiner::StripTreeStrategy;
use treecover_core::tree_model::{deserialize, serialize, Mode};
use treecover_core::verify::BENCH_HEADER;

#[derive(Parser)]
#[command(name = "treecover", version, about = "Euclidean (1+eps) tree covers: build, verify, inspect, route")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the cover and write each selected pair's best tree as a `.tc` file.
    Build {
        #[command(flatten)]
        opts: Opts,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check stretch: exactly over a `.tc` file, or over the rebuilt cover.
    Verify {
        #[command(flatten)]
        opts: Opts,
        #[arg(long)]
        input: PathBuf,
        /// `.tc` cover to check; without it the cover is rebuilt from the flags.
        cover: Option<PathBuf>,
    },
    /// Print parameters, the tree count and degree/diameter per tree.
    Stats {
        #[command(flatten)]
        opts: Opts,
        #[arg(long)]
        input: PathBuf,
        cover: Option<PathBuf>,
    },
    /// Label every point and simulate packet routing between pairs.
    Route {
        #[command(flatten)]
        opts: Opts,
        #[arg(long)]
        input: PathBuf,
        /// Where to write the `LABELS v1` bundle.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time builds on seeded uniform points and print CSV.
    Bench {
        #[command(flatten)]
        opts: Opts,
        /// Dimension of the generated points.
        dim: usize,
        /// Point counts to benchmark.
        #[arg(required = true)]
        sizes: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Opts {
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value = "nonsteiner", value_parser = parse_mode)]
    mode: Mode,
    #[arg(long, default_value = "dyadic-binary", value_parser = parse_strategy)]
    strategy: StripTreeStrategy,
    #[arg(long = "degree-reduction", default_value = "global", value_parser = parse_reduction)]
    degree_reduction: DegreeReduction,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `all` or `sample:<m>`; default is all pairs up to 300 points.
    #[arg(long)]
    pairs: Option<PairSpec>,
}

impl Opts {
    fn settings(&self) -> Settings {
        Settings {
            eps: self.eps,
            mode: self.mode,
            strategy: self.strategy,
            reduction: self.degree_reduction,
            seed: self.seed,
            pairs: self.pairs,
        }
    }
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    Mode::parse(s).ok_or_else(|| "expected nonsteiner or steiner".into())
}

fn parse_strategy(s: &str) -> Result<StripTreeStrategy, String> {
    StripTreeStrategy::parse(s).ok_or_else(|| "expected star, balanced-score, dyadic-kary or dyadic-binary".into())
}

fn parse_reduction(s: &str) -> Result<DegreeReduction, String> {
    DegreeReduction::parse(s).ok_or_else(|| "expected none or global".into())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn load_points(path: &Path) -> Result<PointSet, Failure> {
    parse_points(&read(path)?).map_err(|f| Failure::invalid(format!("{}: {}", path.display(), f.message)))
}

fn load_cover(path: &Path) -> Result<treecover_core::tree_model::ExplicitCover, Failure> {
    deserialize(&read(path)?).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Build { opts, input, out } => {
            let points = load_points(&input)?;
            let b = treecover::build(&points, &opts.settings())?;
            if let Some(out) = out {
                write(&out, &serialize(&b.witnesses))?;
            }
            Ok(b.summary())
        }
        Command::Verify { opts, input, cover } => {
            let points = load_points(&input)?;
            match cover {
                Some(c) => treecover::verify_explicit(&points, &load_cover(&c)?, &opts.settings()),
                None => treecover::verify_implicit(&points, &opts.settings()),
            }
        }
        Command::Stats { opts, input, cover } => {
            let points = load_points(&input)?;
            match cover {
                Some(c) => Ok(treecover::stats_explicit(&points, &load_cover(&c)?)),
                None => treecover::stats_implicit(&points, &opts.settings()),
            }
        }
        Command::Route { opts, input, out } => {
            let points = load_points(&input)?;
            let r = treecover::route(&points, &opts.settings())?;
            if let Some(out) = out {
                write(&out, &r.bundle)?;
            }
            Ok(r.summary())
        }
        Command::Bench { opts, dim, sizes, out } => {
            let rows = treecover::bench(dim, &sizes, &opts.settings(), 3)?;
            let mut csv = String::from(BENCH_HEADER);
            for r in rows {
                csv.push('\n');
                csv.push_str(&r.csv());
            }
            if let Some(out) = out {
                write(&out, &format!("{csv}\n"))?;
            }
            Ok(csv)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => match writeln!(std::io::stdout().lock(), "{}", text.trim_end()) {
            // a closed pipe (`| head`) is not an error
            Err(e) if e.kind() != ErrorKind::BrokenPipe => {
                eprintln!("treecover: {e}");
                ExitCode::FAILURE
            }
            _ => ExitCode::SUCCESS,
        },
        Err(f) => {
            eprintln!("treecover: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
