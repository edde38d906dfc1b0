mod commands;

use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use matchable_core::census::Mode;
use matchable_core::Error;

/// Coprime matchings of divisor sets: decisions, certificates, census tables
/// and proof replay.
///
/// Exit status: 0 success or decision made, 1 verification failure,
/// 2 usage or domain error, 3 capacity exceeded.
#[derive(Parser, Debug)]
#[command(name = "matchable", version, args_conflicts_with_subcommands = true)]
struct Cli {
    /// Worker threads for census and replay (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Decide whether N is matchable (same as `matchable decide N`).
    #[arg(value_name = "N")]
    n: Option<String>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether D(n) matches [1, tau(n)] and name the evidence.
    #[command(alias = "matchable")]
    Decide(DecideArgs),
    /// Build a matching certificate (or a non-matchability proof) for n.
    Match(MatchArgs),
    /// Validate a certificate file from scratch.
    VerifyCert { file: PathBuf },
    /// The explicit matching for M_p = prod_{q <= p} q^(q-1).
    Mp {
        p: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print every pair.
        #[arg(long)]
        pairs: bool,
    },
    /// Census rows c_i for the product of the first l odd primes.
    Census(CensusArgs),
    /// Counts of s in scope with gcd(s, n) = d.
    Gcds {
        #[arg(long)]
        ell: u32,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Comma-separated squarefree divisors.
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<u64>,
        #[arg(long)]
        recompute: bool,
    },
    /// Replay the case analysis for 3 <= l <= 44.
    ReplayFew(ReplayFewArgs),
    /// Verify the inequality cascade for 45 <= l <= 2048.
    ReplaySqfr(ReplaySqfrArgs),
    /// Digits of the M-number density alpha with a certified enclosure.
    Alpha {
        #[arg(long, default_value_t = 14)]
        digits: u32,
    },
    /// Decide strong matchability of n.
    Strong {
        n: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Constants of the lower bound for the density of strongly matchable numbers.
    StrongDensity {
        #[arg(long, default_value_t = 6)]
        digits: u32,
    },
}

#[derive(Args, Debug)]
struct DecideArgs {
    n: String,
    /// Write the decision with its evidence as a certificate.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MatchArgs {
    n: String,
    /// Build the matching block by block from an interval partition.
    #[arg(long)]
    via_partition: bool,
    /// Partition parameter (default: the largest admissible value).
    #[arg(long, requires = "via_partition")]
    j: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CensusArgs {
    /// A single l or a range A..B.
    #[arg(long, value_parser = parse_range)]
    ell: RangeInclusive<u32>,
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Census CSV destination (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the gcd table, showing the columns the replay consults.
    #[arg(long)]
    gcd_out: Option<PathBuf>,
    /// Print 3-significant-digit values from 10^8 on, as in the printed tables.
    #[arg(long)]
    display: bool,
    /// Ignore bundled tables and compute every row.
    #[arg(long)]
    recompute: bool,
    /// Store the computed tables in this data directory.
    #[arg(long)]
    save_data: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReplayFewArgs {
    #[arg(long, value_parser = parse_range, default_value = "3..44")]
    ell: RangeInclusive<u32>,
    /// Mode to replay (default: both).
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Print the rung-by-rung transcript.
    #[arg(long)]
    explain: bool,
    /// Write one certificate per l into this directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    recompute: bool,
}

#[derive(Args, Debug)]
struct ReplaySqfrArgs {
    #[arg(long, value_parser = parse_range, default_value = "45..2048")]
    ell: RangeInclusive<u32>,
    /// Print every inequality.
    #[arg(long)]
    explain: bool,
    /// Print one line per l.
    #[arg(long)]
    verbose: bool,
    /// Write one certificate per l into this directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also run the exact entropy spot check at l = 192.
    #[arg(long)]
    entropy: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Odd,
    Full,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Odd => Mode::Odd,
            ModeArg::Full => Mode::Full,
        }
    }
}

/// `A`, `A..B` or `A..=B`, both ends inclusive.
fn parse_range(s: &str) -> Result<RangeInclusive<u32>, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|_| format!("bad number {t:?} in range {s:?}"))
    };
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let a = num(s)?;
            (a, a)
        }
    };
    if a > b {
        return Err(format!("empty range {s:?}"));
    }
    Ok(a..=b)
}

/// Failure classes of a command, each with its exit status.
#[derive(Debug)]
enum Failure {
    /// A certificate or replay did not verify.
    Verification(String),
    Usage(String),
    Capacity(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Capacity(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verification(m) | Failure::Usage(m) | Failure::Capacity(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let m = e.to_string();
        match e {
            Error::Capacity { .. } => Failure::Capacity(m),
            Error::Domain(_) | Error::Range(_) | Error::Input(_) => Failure::Usage(m),
            Error::Validation(_) | Error::Precondition { .. } | Error::Invariant(_) => Failure::Verification(m),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("i/o error: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .expect("thread pool is configured once");
    }
    let result = match (cli.n, cli.command) {
        (Some(n), None) => commands::decide(&DecideArgs { n, out: None }),
        (None, Some(cmd)) => dispatch(cmd),
        _ => Err(Failure::Usage("expected N or a subcommand; see --help".into())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Decide(a) => commands::decide(&a),
        Command::Match(a) => commands::matching(&a),
        Command::VerifyCert { file } => commands::verify_cert(&file),
        Command::Mp { p, out, pairs } => commands::mp(p, out.as_deref(), pairs),
        Command::Census(a) => commands::census(&a),
        Command::Gcds {
            ell,
            mode,
            d,
            recompute,
        } => commands::gcds(ell, mode.into(), &d, recompute),
        Command::ReplayFew(a) => commands::replay_few(&a),
        Command::ReplaySqfr(a) => commands::replay_sqfr(&a),
        Command::Alpha { digits } => commands::alpha(digits),
        Command::Strong { n, out } => commands::strong(&n, out.as_deref()),
        Command::StrongDensity { digits } => commands::strong_density(digits),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("24").unwrap(), 24..=24);
        assert_eq!(parse_range("3..44").unwrap(), 3..=44);
        assert_eq!(parse_range("3..=44").unwrap(), 3..=44);
        assert!(parse_range("9..3").is_err());
        assert!(parse_range("a..3").is_err());
    }

    #[test]
    fn arguments_parse() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
