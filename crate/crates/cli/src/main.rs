mod error;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use pivotmodel::io::export_cell_ledger;
use pivotmodel::pivot::PivotModel;
use pivotmodel::trace::{export_docs_csv, resolve_rule, trace_depth, write_trace_csv};
use pivotmodel::view::{write_view_csv, ViewSpec};
use pivotmodel_service::ServiceConfig;

use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "pivotmodel", version, about = "Build, calculate and inspect rule-driven cube models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Inputs {
    /// Model document (JSON).
    model: PathBuf,
    /// Data files (CSV, long or wide layout), loaded in order.
    #[arg(long = "data", value_name = "FILE")]
    data: Vec<PathBuf>,
    /// Carry on when data rows are rejected.
    #[arg(long)]
    allow_rejects: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DocsFormat {
    Text,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that a model builds and its rules cover every hierarchy parent.
    Validate { model: PathBuf },
    /// Load data, calculate, and write the cell ledger.
    Calc {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Materialize a view spec (JSON) to CSV.
    View {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Drill a cell's calculation, following winning rules.
    Trace {
        #[command(flatten)]
        inputs: Inputs,
        /// Cell as DIM=Member pairs, e.g. "ACCTS=Net sales,TIME=Qtr1,...".
        #[arg(long)]
        cell: String,
        /// Explain the root with this rule (name or "DIM - Target") instead of the winner.
        #[arg(long)]
        rule: Option<String>,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Write the hierarchy tables and rule listing.
    Docs {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = DocsFormat::Text)]
        format: DocsFormat,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Print cell counts.
    Stats { model: PathBuf },
    /// List cells whose applicable rules disagree with the stored value.
    Audit {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        #[command(flatten)]
        config: ServiceConfig,
    },
}

fn open_model(path: &Path) -> Result<PivotModel, CliError> {
    PivotModel::open(path).map_err(CliError::model)
}

/// Opens the model, loads every data file and calculates.
fn prepare(inputs: &Inputs) -> Result<PivotModel, CliError> {
    let mut model = open_model(&inputs.model)?;
    let mut rejected = 0;
    for path in &inputs.data {
        let (layout, report) = model.load_path(path).map_err(CliError::data)?;
        eprintln!(
            "{}: {:?} layout, {} of {} rows loaded ({} cells)",
            path.display(),
            layout,
            report.rows_loaded,
            report.rows_total,
            report.cells_loaded
        );
        for r in &report.rejected {
            eprintln!("{}:{}: rejected: {}", path.display(), r.line, r.reason);
        }
        for w in &report.warnings {
            eprintln!("{}: warning: {w}", path.display());
        }
        rejected += report.rejected.len();
    }
    if rejected > 0 && !inputs.allow_rejects {
        return Err(CliError::Data(format!("{rejected} data rows rejected (use --allow-rejects to continue)")));
    }
    let started = Instant::now();
    let report = model.calculate();
    eprintln!("calculated: {} in {:.1} ms", report.summary(), started.elapsed().as_secs_f64() * 1e3);
    Ok(model)
}

/// Runs `write` against the output file, or stdout.
fn emit(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<(), String>) -> Result<(), CliError> {
    let name = out.map_or_else(|| "stdout".to_string(), |p| p.display().to_string());
    let mut sink: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| CliError::write(&name, e))?)),
        None => Box::new(std::io::stdout().lock()),
    };
    write(&mut sink).map_err(|e| CliError::write(&name, e))?;
    sink.flush().map_err(|e| CliError::write(&name, e))
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate { model } => {
            let model = open_model(&model)?;
            let s = model.structure();
            let stats = model.stats();
            println!(
                "model '{}': {} dimensions, {} rules, cells={} input={} calculated={}",
                s.name(),
                s.dimension_count(),
                stats.rules,
                stats.total_cells,
                stats.input_cells,
                stats.calculated_cells
            );
            let findings = model.lint();
            for f in &findings {
                println!("finding: {f}");
            }
            if findings.is_empty() {
                println!("ok");
                Ok(())
            } else {
                Err(CliError::Validation(format!("{} findings", findings.len())))
            }
        }
        Command::Calc { inputs, out } => {
            let model = prepare(&inputs)?;
            emit(out.as_deref(), |w| {
                let rows = export_cell_ledger(model.cube(), model.rules(), w).map_err(|e| e.to_string())?;
                eprintln!("ledger: {rows} rows");
                Ok(())
            })
        }
        Command::View { inputs, spec, out } => {
            let text = std::fs::read_to_string(&spec).map_err(|e| CliError::Usage(format!("{}: {e}", spec.display())))?;
            let spec: ViewSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::Validation(format!("{}: {e}", spec.display())))?;
            let model = prepare(&inputs)?;
            let grid = model.view(&spec).map_err(|e| CliError::Validation(e.to_string()))?;
            emit(out.as_deref(), |w| write_view_csv(&grid, w).map_err(|e| e.to_string()))
        }
        Command::Trace { inputs, cell, rule, depth, out } => {
            let model = prepare(&inputs)?;
            let address = model.address(&cell).map_err(|e| CliError::Validation(e.to_string()))?;
            let chosen = rule
                .map(|r| resolve_rule(model.structure(), model.rules(), &r))
                .transpose()
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let blocks = trace_depth(model.cube(), model.rules(), &address, chosen, depth.max(1))
                .map_err(|e| CliError::Validation(e.to_string()))?;
            emit(out.as_deref(), |w| write_trace_csv(model.structure(), &blocks, w).map_err(|e| e.to_string()))
        }
        Command::Docs { model, format, out } => {
            let model = open_model(&model)?;
            emit(out.as_deref(), |w| match format {
                DocsFormat::Text => w.write_all(model.docs().as_bytes()).map_err(|e| e.to_string()),
                DocsFormat::Csv => export_docs_csv(model.structure(), model.rules(), w).map_err(|e| e.to_string()),
            })
        }
        Command::Stats { model } => {
            let stats = open_model(&model)?.stats();
            println!(
                "cells={} input={} calculated={} rules={}",
                stats.total_cells, stats.input_cells, stats.calculated_cells, stats.rules
            );
            Ok(())
        }
        Command::Audit { inputs, out } => {
            let model = prepare(&inputs)?;
            let flagged = model.audit();
            eprintln!("audit: {} cells where applicable rules disagree", flagged.len());
            emit(out.as_deref(), |w| {
                for report in &flagged {
                    let rules: Vec<String> = report
                        .decompositions
                        .iter()
                        .filter(|d| !d.agrees)
                        .map(|d| format!("{}={}", d.rule, d.value))
                        .collect();
                    writeln!(w, "{}\tstored={}\t{}", report.members.join(" / "), report.stored, rules.join("; "))
                        .map_err(|e| e.to_string())?;
                }
                Ok(())
            })
        }
        Command::Serve { config } => {
            tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env()
                        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
                )
                .with_writer(std::io::stderr)
                .init();
            let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Internal(e.to_string()))?;
            runtime.block_on(pivotmodel_service::serve(config)).map_err(|e| CliError::Internal(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
