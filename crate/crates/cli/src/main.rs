mod commands;
mod render;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use rh_core::blocks::Sign;
use rh_core::index::ConstraintProfile;
use rh_core::spectral::DEFAULT_DEGREE;
use serde_json::{Map, Value};

use commands::{Failure, Settings, EXIT_PARSE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Parser, Debug)]
#[command(name = "rh", version, about = "Index theory and numerics for Riemann-Hilbert problems on the disc")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Block profile "N1:m1,N2:m2,..." (sizes and vanishing orders).
    #[arg(long, global = true)]
    profile: Option<ConstraintProfile>,

    /// Reduce a symbol singular at 1 before classifying.
    #[arg(long, global = true)]
    reduce: bool,

    /// Rotate the singular point e^{iθ} to 1 first (θ in radians).
    #[arg(long, global = true, allow_hyphen_values = true)]
    rotate: Option<f64>,

    /// Cofactor degree of the spectral discretization.
    #[arg(long, global = true, default_value_t = DEFAULT_DEGREE)]
    truncation: usize,

    /// Relative singular value threshold.
    #[arg(long, global = true, env = "RH_TOLERANCE", default_value_t = 1e-8)]
    tolerance: f64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Process every *.json symbol file in a directory.
    #[arg(long, global = true)]
    batch: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Partial indices, surjectivity and kernel dimension.
    Analyze { symbol: Option<String> },
    /// Column reduction of a symbol singular at 1.
    Reduce { symbol: Option<String> },
    /// Reduction, classification and numerical cross-check.
    Pipeline { symbol: Option<String> },
    /// Least-squares solve of the boundary problem.
    Solve {
        symbol: String,
        #[arg(long)]
        rhs: PathBuf,
    },
    /// Numerical kernel basis and dimension.
    Kernel { symbol: Option<String> },
    /// Kernel of f ± ζ^l conj(f) on (1-ζ)^m A.
    Scalar {
        #[arg(long, allow_hyphen_values = true)]
        l: i64,
        #[arg(long)]
        m: usize,
        #[arg(long, value_parser = parse_sign, default_value = "+")]
        sign: Sign,
    },
    /// Solves 2 Re[ζ^{-r} f] = φ for a constrained right-hand side.
    SolveScalar {
        #[arg(long, allow_hyphen_values = true)]
        r: i64,
        rhs: PathBuf,
    },
    /// Built-in consistency checks.
    Selftest,
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    Sign::parse(s).ok_or_else(|| format!("sign must be + or -, got `{s}`"))
}

impl Cli {
    fn settings(&self) -> Settings {
        Settings {
            tolerance: self.tolerance,
            truncation: self.truncation,
            seed: self.seed,
            profile: self.profile.clone(),
            reduce: self.reduce,
            rotate: self.rotate,
        }
    }

    fn name(&self) -> &'static str {
        match self.command {
            Command::Analyze { .. } => "analyze",
            Command::Reduce { .. } => "reduce",
            Command::Pipeline { .. } => "pipeline",
            Command::Solve { .. } => "solve",
            Command::Kernel { .. } => "kernel",
            Command::Scalar { .. } => "scalar",
            Command::SolveScalar { .. } => "solve-scalar",
            Command::Selftest => "selftest",
        }
    }
}

type Run = Result<(Value, i32), Failure>;

fn run_symbol(command: &Command, source: &str, settings: &Settings) -> Run {
    let input = commands::load_symbol(source)?;
    match command {
        Command::Analyze { .. } => commands::analyze(&input, settings).map(|v| (v, 0)),
        Command::Reduce { .. } => commands::reduce(&input, settings).map(|v| (v, 0)),
        Command::Pipeline { .. } => commands::pipeline(&input, settings),
        Command::Kernel { .. } => commands::kernel(&input, settings).map(|v| (v, 0)),
        Command::Solve { rhs, .. } => commands::solve(&input, rhs, settings).map(|v| (v, 0)),
        _ => unreachable!("not a symbol command"),
    }
}

fn symbol_arg(command: &Command) -> Option<Option<&str>> {
    match command {
        Command::Analyze { symbol } | Command::Reduce { symbol } | Command::Pipeline { symbol } | Command::Kernel { symbol } => {
            Some(symbol.as_deref())
        }
        Command::Solve { symbol, .. } => Some(Some(symbol.as_str())),
        _ => None,
    }
}

fn batch(command: &Command, dir: &Path, settings: &Settings) -> Run {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Failure::parse(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let results: Vec<(String, Run)> = files
        .par_iter()
        .map(|p| {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            (name, run_symbol(command, &p.to_string_lossy(), settings))
        })
        .collect();
    let mut map = Map::new();
    let mut code = 0;
    for (name, r) in results {
        let (v, c) = r.unwrap_or_else(|f| (f.to_json(), f.code));
        code = code.max(c);
        map.insert(name, v);
    }
    Ok((Value::Object(map), code))
}

fn run(cli: &Cli) -> Run {
    let settings = cli.settings();
    if let Some(arg) = symbol_arg(&cli.command) {
        return match (&cli.batch, arg) {
            (Some(dir), None) => batch(&cli.command, dir, &settings),
            (None, Some(source)) => run_symbol(&cli.command, source, &settings),
            (Some(_), Some(_)) => Err(Failure::parse("give either a symbol or --batch, not both")),
            (None, None) => Err(Failure::parse("missing symbol (a JSON file or a built-in such as @example)")),
        };
    }
    match &cli.command {
        Command::Scalar { l, m, sign } => Ok((commands::scalar(*sign, *l, *m, &settings), 0)),
        Command::SolveScalar { r, rhs } => commands::solve_scalar_cmd(*r, rhs, &settings),
        Command::Selftest => Ok(commands::selftest(&settings)),
        _ => unreachable!("symbol commands handled above"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_PARSE as u8 } else { 0 });
        }
    };
    let (value, code) = match run(&cli) {
        Ok(r) => r,
        Err(f) => {
            eprintln!("error: {}{}", f.stage.map(|s| format!("[{s}] ")).unwrap_or_default(), f.message);
            (f.to_json(), f.code)
        }
    };
    let out = match cli.format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&value).expect("report serializes")),
        Format::Text => render::text(cli.name(), &value),
    };
    // a closed pipe downstream is not an error
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
    ExitCode::from(code as u8)
}
