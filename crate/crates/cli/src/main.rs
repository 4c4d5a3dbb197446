//! `invdiff`: emit operator symbols, run verification suites, apply operators.

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use invdiff::action::{apply_operator, TestFunction};
use invdiff::jet::ChartMode;
use invdiff::matrix::RatMatrix;
use invdiff::poly::Poly;
use invdiff::suites::{run_suite, Suite, SuiteConfig};
use invdiff::symbols::{project_symbol, Family, ProjectionMode, Space, SymbolPoly};

#[derive(Parser)]
#[command(
    name = "invdiff",
    version,
    about = "Exact invariant differential operators on Pos_n and SPos_n"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the symbol of δ_k or η_k.
    Symbols(SymbolsArgs),
    /// Run a verification suite and print its report.
    Verify(VerifyArgs),
    /// Apply an operator to a polynomial test function at a point.
    Apply(ApplyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    #[value(alias = "maass_selberg", alias = "delta")]
    MaassSelberg,
    #[value(alias = "eta")]
    Minor,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::MaassSelberg => Family::MaassSelberg,
            FamilyArg::Minor => Family::Minor,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Pos,
    Spos,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Latex,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Pos,
    #[value(alias = "spos_projection")]
    SposProjection,
    #[value(alias = "spos_chart", alias = "spos")]
    SposChart,
}

impl From<ModeArg> for ChartMode {
    fn from(m: ModeArg) -> ChartMode {
        match m {
            ModeArg::Pos => ChartMode::Pos,
            ModeArg::SposProjection => ChartMode::SposProjection,
            ModeArg::SposChart => ChartMode::SposChart,
        }
    }
}

#[derive(Args)]
struct SymbolsArgs {
    #[arg(long, ignore_case = true)]
    family: FamilyArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, ignore_case = true, default_value = "pos")]
    space: SpaceArg,
    #[arg(long, ignore_case = true, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    /// KERNEL, PROJECTION_EQUIV, SPLITTING, INVARIANCE, NEWTON, CHARPOLY,
    /// INDEPENDENCE, CHART_AGREEMENT, MORPHISM, COMPOSITION, EQUIVARIANCE,
    /// RECOVERY, EIGENFUNCTION or ALL.
    suite: String,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    /// Largest composite degree in the COMPOSITION suite.
    #[arg(long, default_value_t = 4)]
    degree: u32,
    #[arg(long, ignore_case = true, default_value = "json")]
    format: Format,
    /// Record wall-clock duration in the report (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct ApplyArgs {
    /// Symbol polynomial as JSON over `a_ij`; overrides --family/--k.
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long, ignore_case = true)]
    family: Option<FamilyArg>,
    #[arg(long)]
    k: Option<usize>,
    /// Matrix size; taken from --g when omitted.
    #[arg(long)]
    n: Option<usize>,
    /// Test function as JSON polynomial over `s_ij`, or `@path`.
    #[arg(long)]
    f: String,
    /// Base point as a JSON array of rows, or `@path`; identity when omitted.
    #[arg(long)]
    g: Option<String>,
    #[arg(long, ignore_case = true, default_value = "pos")]
    mode: ModeArg,
}

enum Failure {
    Checks,
    Usage(String),
}

impl From<invdiff::Error> for Failure {
    fn from(e: invdiff::Error) -> Failure {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Symbols(args) => symbols(args),
        Command::Verify(args) => verify(args),
        Command::Apply(args) => apply(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn symbols(args: SymbolsArgs) -> Result<(), Failure> {
    let mut q = Family::from(args.family).symbol(args.n, args.k)?;
    if let SpaceArg::Spos = args.space {
        q = project_symbol(&q, ProjectionMode::Restrict)?;
    }
    match args.format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&q.poly().to_json()).expect("plain data")
        ),
        Format::Latex => println!("{}", q.to_latex()),
        Format::Text => println!("{q}"),
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let suite: Suite = args.suite.parse()?;
    if args.format == Format::Latex {
        return Err(Failure::Usage("reports support json or text".into()));
    }
    let config = SuiteConfig {
        n_max: args.n_max,
        seed: args.seed,
        trials: args.trials,
        degree: args.degree,
    };
    let start = Instant::now();
    let mut report = run_suite(suite, &config)?;
    if args.timing {
        report.duration_ms = Some(start.elapsed().as_millis() as u64);
    }
    match args.format {
        Format::Text => print!("{}", report.to_text()),
        _ => println!("{}", report.to_json()),
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn read_arg(value: &str) -> Result<String, Failure> {
    match value.strip_prefix('@') {
        Some(path) => {
            std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))
        }
        None => Ok(value.to_string()),
    }
}

fn apply(args: ApplyArgs) -> Result<(), Failure> {
    let g = match &args.g {
        Some(text) => Some(
            serde_json::from_str::<RatMatrix>(&read_arg(text)?)
                .map_err(|e| Failure::Usage(format!("--g: {e}")))?,
        ),
        None => None,
    };
    let n = match (args.n, &g) {
        (Some(n), _) => n,
        (None, Some(g)) => g.rows(),
        (None, None) => return Err(Failure::Usage("give --n or --g".into())),
    };
    let g = g.unwrap_or_else(|| RatMatrix::identity(n));
    let mode = ChartMode::from(args.mode);
    let space = if mode == ChartMode::SposChart {
        Space::Spos
    } else {
        Space::Pos
    };

    let q = match (&args.symbol, args.family, args.k) {
        (Some(text), _, _) => {
            SymbolPoly::from_poly(&Poly::from_json_str(&read_arg(text)?)?, n, space)?
        }
        (None, Some(fam), Some(k)) => {
            let q = Family::from(fam).symbol(n, k)?;
            if space == Space::Spos {
                project_symbol(&q, ProjectionMode::Restrict)?
            } else {
                q
            }
        }
        _ => return Err(Failure::Usage("give --symbol, or --family with --k".into())),
    };
    let f = TestFunction::new(&Poly::from_json_str(&read_arg(&args.f)?)?, n)?;
    println!("{}", apply_operator(&q, &f, &g, mode)?);
    Ok(())
}
