use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fgi_cli::{Command, DiagramKind, Flavor, JobSpec, OutFormat, STATUS_PARSE};

/// Exact-arithmetic engine for truncated multivariate power series:
/// Gaussian-moment kernels, diagram species, composition, reversion and
/// Lagrange-Good inversion.
#[derive(Parser)]
#[command(name = "fgi", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: CliCmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormatArg {
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorArg {
    Composition,
    Reversion,
    #[value(name = "lagrange-good")]
    LagrangeGood,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Trees,
    Circuits,
}

#[derive(Args)]
struct IoArgs {
    /// Input file with the JSON payload; stdin when absent.
    #[arg(long = "in")]
    input: Option<PathBuf>,

    /// Working truncation degree (defaults to the input's degree).
    #[arg(long)]
    degree: Option<u32>,

    #[arg(long, value_enum, default_value = "json")]
    out_format: OutFormatArg,
}

#[derive(Subcommand)]
enum CliCmd {
    /// Compose F with G through diagram classes (checked against direct
    /// substitution).
    Compose(IoArgs),
    /// Compositional inverse of a constant-free system.
    Revert(IoArgs),
    /// Solve F_i = X_i G_i(F).
    LgSolve(IoArgs),
    /// Check the Lagrange-Good coefficient identity at one multiindex.
    LgCheck(IoArgs),
    /// Free energy and partition function with route cross-checks.
    ZwCheck(IoArgs),
    /// Check the matrix-X generalized identity up to a degree bound.
    LgMatrixCheck(IoArgs),
    /// Gaussian integral of a paired monomial.
    Wick(IoArgs),
    /// Enumerate diagram classes with automorphism orders.
    Diagrams {
        #[arg(long, value_enum)]
        flavor: FlavorArg,

        /// Grading bound (leaves, nodes or X-degree per flavor).
        #[arg(long)]
        bound: u32,

        #[arg(long, value_enum, default_value = "trees")]
        kind: KindArg,

        #[arg(long, value_enum, default_value = "json")]
        out_format: OutFormatArg,
    },
}

fn read_payload(input: &Option<PathBuf>) -> Result<serde_json::Value, String> {
    let text = match input {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?,
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| format!("cannot read stdin: {e}"))?;
            buf
        }
    };
    fgi_cli::parse_payload(&text).map_err(|e| e.message)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let spec = match build_spec(cli) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(STATUS_PARSE as u8);
        }
    };
    match fgi_cli::run(&spec) {
        Ok(doc) => {
            print!("{doc}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.status as u8)
        }
    }
}

fn build_spec(cli: Cli) -> Result<JobSpec, String> {
    let (command, io, flavor, bound, kind) = match cli.cmd {
        CliCmd::Compose(io) => (Command::Compose, Some(io), None, None, KindArg::Trees),
        CliCmd::Revert(io) => (Command::Revert, Some(io), None, None, KindArg::Trees),
        CliCmd::LgSolve(io) => (Command::LgSolve, Some(io), None, None, KindArg::Trees),
        CliCmd::LgCheck(io) => (Command::LgCheck, Some(io), None, None, KindArg::Trees),
        CliCmd::ZwCheck(io) => (Command::ZwCheck, Some(io), None, None, KindArg::Trees),
        CliCmd::LgMatrixCheck(io) => {
            (Command::LgMatrixCheck, Some(io), None, None, KindArg::Trees)
        }
        CliCmd::Wick(io) => (Command::Wick, Some(io), None, None, KindArg::Trees),
        CliCmd::Diagrams {
            flavor,
            bound,
            kind,
            out_format,
        } => {
            return Ok(JobSpec {
                command: Command::Diagrams,
                payload: serde_json::Value::Null,
                degree: None,
                flavor: Some(match flavor {
                    FlavorArg::Composition => Flavor::Composition,
                    FlavorArg::Reversion => Flavor::Reversion,
                    FlavorArg::LagrangeGood => Flavor::LagrangeGood,
                }),
                bound: Some(bound),
                kind: match kind {
                    KindArg::Trees => DiagramKind::Trees,
                    KindArg::Circuits => DiagramKind::Circuits,
                },
                out_format: match out_format {
                    OutFormatArg::Json => OutFormat::Json,
                    OutFormatArg::Table => OutFormat::Table,
                },
            });
        }
    };
    let io = io.expect("non-diagrams commands carry io args");
    let payload = read_payload(&io.input)?;
    Ok(JobSpec {
        command,
        payload,
        degree: io.degree,
        flavor: flavor.map(|f: FlavorArg| match f {
            FlavorArg::Composition => Flavor::Composition,
            FlavorArg::Reversion => Flavor::Reversion,
            FlavorArg::LagrangeGood => Flavor::LagrangeGood,
        }),
        bound,
        kind: match kind {
            KindArg::Trees => DiagramKind::Trees,
            KindArg::Circuits => DiagramKind::Circuits,
        },
        out_format: match io.out_format {
            OutFormatArg::Json => OutFormat::Json,
            OutFormatArg::Table => OutFormat::Table,
        },
    })
}
