mod commands;
mod doc;
mod generators;
mod report;

use std::fmt::Display;
use std::io::{IsTerminal, Read};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use defwb_core::dglie::DgLieError;
use defwb_core::sullivan::SullivanError;

use commands::Ctx;
use doc::WorkbenchDoc;
use report::{Format, Report};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    Validate,
    Cohomology,
    Cech,
    Rgamma,
    Fibrancy,
    Hypercheck,
    Gac,
    Mc,
    Kuranishi,
    DeformAlgebra,
    DeformSheaf,
    Descent,
    Equivariant,
    Oracle,
    Examples,
}

/// Exact-arithmetic workbench for sheaf cohomology on finite sites, dg Lie
/// algebras and formal deformations. Documents are read from --input or
/// standard input.
#[derive(Parser, Debug)]
#[command(name = "defwb", version)]
struct Cli {
    command: Command,
    /// Arguments of `examples`: a generator name and its parameter.
    #[arg(allow_negative_numbers = true)]
    args: Vec<String>,
    #[arg(long)]
    input: Option<PathBuf>,
    /// Artinian base: `k`, `acyclic`, `k[t]/(t^n)` or a named block.
    #[arg(long, allow_hyphen_values = true)]
    base: Option<String>,
    /// Window `D` of the P¹ generators.
    #[arg(long, default_value_t = 4)]
    window: usize,
    /// Truncation bound for Thom–Whitney totalization or chain caps.
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Comma-separated hypercover names.
    #[arg(long, value_delimiter = ',')]
    registry: Option<Vec<String>>,
    /// Built-in algebra: `k`, `kxk`, `m2`, `k[x]/(x^n)`.
    #[arg(long)]
    algebra: Option<String>,
    #[arg(long)]
    object: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    degree: Option<i32>,
}

pub struct Options {
    pub base: Option<String>,
    pub cap: Option<usize>,
    pub registry: Option<Vec<String>>,
    pub algebra: Option<String>,
    pub object: Option<String>,
    pub degree: Option<i32>,
}

#[derive(Debug, Clone)]
pub enum CliError {
    Parse(String),
    Validation(String),
    Cap(String),
    Io(String),
}

impl CliError {
    fn from_display(e: impl Display) -> Self {
        CliError::Validation(e.to_string())
    }

    fn from_dglie(e: DgLieError) -> Self {
        match e {
            DgLieError::CapExceeded { .. } => CliError::Cap(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }

    fn from_sullivan(e: SullivanError) -> Self {
        match e {
            SullivanError::CapExceeded { .. } | SullivanError::NonStabilization { .. } => CliError::Cap(e.to_string()),
            SullivanError::Lie(l) => Self::from_dglie(l),
            _ => CliError::Validation(e.to_string()),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Cap(_) => 2,
            _ => 1,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(s) => write!(f, "parse error: {s}"),
            CliError::Validation(s) => write!(f, "validation failed: {s}"),
            CliError::Cap(s) => write!(f, "cap reached: {s}"),
            CliError::Io(s) => write!(f, "i/o error: {s}"),
        }
    }
}

fn read_stdin() -> Result<String, CliError> {
    let mut s = String::new();
    std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(s)
}

fn read_doc(cli: &Cli) -> Result<WorkbenchDoc, CliError> {
    let self_contained = cli.algebra.is_some() && matches!(cli.command, Command::DeformAlgebra | Command::Oracle);
    let text = match &cli.input {
        Some(p) if p.as_os_str() == "-" => read_stdin()?,
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        None if !self_contained && !std::io::stdin().is_terminal() => read_stdin()?,
        None => String::new(),
    };
    if text.trim().is_empty() {
        return Ok(WorkbenchDoc::default());
    }
    serde_json::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))
}

fn command_name(c: Command) -> String {
    c.to_possible_value().expect("named").get_name().to_string()
}

/// Runs a command and renders its output; `Ok((_, false))` is a completed
/// run whose verdict is a validation failure.
fn run(cli: &Cli) -> Result<(String, bool), CliError> {
    if cli.command == Command::Examples {
        // the bare document, so it can be piped into other commands
        let d = generators::generate(&cli.args, cli.window)?;
        let mut s = serde_json::to_string_pretty(&d).expect("serializable");
        s.push('\n');
        return Ok((s, true));
    }
    let mut r = Report::new(&command_name(cli.command));
    let doc = read_doc(cli)?;
    let opts = Options {
        base: cli.base.clone(),
        cap: cli.cap,
        registry: cli.registry.clone(),
        algebra: cli.algebra.clone(),
        object: cli.object.clone(),
        degree: cli.degree,
    };
    let c = Ctx { doc: &doc, opts: &opts };
    let ok = match cli.command {
        Command::Validate => commands::validate(&c, &mut r)?,
        Command::Cohomology => commands::cohomology_cmd(&c, &mut r).map(|_| true)?,
        Command::Cech => commands::cech(&c, &mut r).map(|_| true)?,
        Command::Rgamma => commands::rgamma_cmd(&c, &mut r).map(|_| true)?,
        Command::Fibrancy => commands::fibrancy(&c, &mut r).map(|_| true)?,
        Command::Hypercheck => commands::hypercheck(&c, &mut r)?,
        Command::Gac => commands::gac(&c, &mut r).map(|_| true)?,
        Command::Mc => commands::mc(&c, &mut r).map(|_| true)?,
        Command::Kuranishi => commands::kuranishi_cmd(&c, &mut r).map(|_| true)?,
        Command::DeformAlgebra => commands::deform_algebra(&c, &mut r).map(|_| true)?,
        Command::DeformSheaf => commands::deform_sheaf(&c, &mut r).map(|_| true)?,
        Command::Descent => commands::descent(&c, &mut r)?,
        Command::Equivariant => commands::equivariant(&c, &mut r).map(|_| true)?,
        Command::Oracle => commands::oracle(&c, &mut r)?,
        Command::Examples => unreachable!("handled above"),
    };
    Ok((r.render(cli.format), ok))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((out, ok)) => {
            print!("{out}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("defwb: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
