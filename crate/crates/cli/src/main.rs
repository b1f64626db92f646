//! `fractool` — validate, analyze, render and empirically check fractal
//! curve systems written in the `.fcs` format.
//!
//! Exit codes: 0 on success, 1 for parse/validation/analysis failures,
//! 2 for I/O failures.

use clap::{Parser, Subcommand};
use fractool::curve::{polyline_with, ExpandOptions, DEFAULT_SEGMENT_CAP};
use fractool::dimension::analyze;
use fractool::empirics::{box_count_dimension, frequency_convergence};
use fractool::export::{render_svg, AnalysisDocument, RenderStyle};
use fractool::model::{FractalSystem, DEFAULT_CLOSURE_TOLERANCE};
use fractool::parse::{parse_document, parse_system_with_tolerance};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fractool",
    version,
    about = "Analyze and render fractal curves with multiple generators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a system file and check every structural and geometric invariant
    Validate {
        file: PathBuf,
        /// Relative tolerance for chain-closure checks
        #[arg(long, default_value_t = DEFAULT_CLOSURE_TOLERANCE)]
        tolerance: f64,
    },
    /// Print the substitution matrix, eigen data and similarity dimension
    Analyze {
        file: PathBuf,
        /// Emit a JSON document instead of the table
        #[arg(long)]
        json: bool,
    },
    /// Render one iteration of the curve as SVG
    Render {
        file: PathBuf,
        /// Rewriting depth to expand
        #[arg(long)]
        iterations: u32,
        /// Output SVG path
        #[arg(long)]
        out: PathBuf,
        /// Draw direction markers at segment midpoints
        #[arg(long)]
        orientation: bool,
        /// Abort beyond this many segments (also via FRACTOOL_MAX_SEGMENTS)
        #[arg(long)]
        max_segments: Option<usize>,
    },
    /// Tabulate census frequencies approaching the eigenvector
    Freq {
        file: PathBuf,
        /// Last iteration to tabulate
        #[arg(long)]
        kmax: u32,
    },
    /// Estimate the dimension empirically by box counting
    Boxdim {
        file: PathBuf,
        /// Rewriting depth of the counted polyline
        #[arg(long)]
        iterations: u32,
        /// Number of dyadic scales in the ladder
        #[arg(long, default_value_t = 6)]
        scales: usize,
    },
}

enum CmdError {
    Domain(String),
    Io(String),
}

impl CmdError {
    fn domain(e: impl std::fmt::Display) -> Self {
        CmdError::Domain(e.to_string())
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Domain(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CmdError::Io(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CmdError> {
    match cli.command {
        Command::Validate { file, tolerance } => cmd_validate(&file, tolerance),
        Command::Analyze { file, json } => cmd_analyze(&file, json),
        Command::Render {
            file,
            iterations,
            out,
            orientation,
            max_segments,
        } => cmd_render(&file, iterations, &out, orientation, max_segments),
        Command::Freq { file, kmax } => cmd_freq(&file, kmax),
        Command::Boxdim {
            file,
            iterations,
            scales,
        } => cmd_boxdim(&file, iterations, scales),
    }
}

fn read_input(path: &Path) -> Result<String, CmdError> {
    std::fs::read_to_string(path)
        .map_err(|e| CmdError::Io(format!("cannot read {}: {e}", path.display())))
}

fn load_system(path: &Path) -> Result<FractalSystem, CmdError> {
    let text = read_input(path)?;
    parse_system_with_tolerance(&text, DEFAULT_CLOSURE_TOLERANCE).map_err(CmdError::domain)
}

fn cmd_validate(path: &Path, tolerance: f64) -> Result<(), CmdError> {
    let text = read_input(path)?;
    let parsed = match parse_document(&text) {
        Ok(parsed) => parsed,
        Err(e) => {
            println!("error[{}] {}: {}", e.kind, e.span, e.message);
            return Err(CmdError::Domain(format!(
                "{} does not parse",
                path.display()
            )));
        }
    };
    let report = parsed.system.validate(tolerance);
    for finding in &report.findings {
        let span = parsed.spans.for_location(finding.location);
        println!(
            "{}[{}] {}: {}",
            finding.severity, finding.code, span, finding.message
        );
    }
    let mut valid = report.is_valid();
    if valid {
        if let Err(e) = parsed.check_declared_scales() {
            println!("error[{}] {}: {}", e.kind, e.span, e.message);
            valid = false;
        }
    }
    if valid {
        println!(
            "ok: {} ({} types)",
            parsed.system.name,
            parsed.system.types.len()
        );
        Ok(())
    } else {
        Err(CmdError::Domain(format!(
            "{} fails validation",
            path.display()
        )))
    }
}

fn cmd_analyze(path: &Path, json: bool) -> Result<(), CmdError> {
    let system = load_system(path)?;
    let analysis = analyze(&system).map_err(CmdError::domain)?;
    if json {
        let doc = AnalysisDocument::from_analysis(&system.name, &analysis);
        let rendered = serde_json::to_string(&doc)
            .map_err(|e| CmdError::Domain(format!("cannot serialize analysis: {e}")))?;
        println!("{rendered}");
    } else {
        print_analysis_table(&system, &analysis);
    }
    if analysis.report.dimension > 2.0 {
        eprintln!(
            "warning: dimension {:.6} exceeds 2; the curve cannot be both planar and self-avoiding",
            analysis.report.dimension
        );
    }
    Ok(())
}

fn print_analysis_table(system: &FractalSystem, analysis: &fractool::dimension::Analysis) {
    println!("system: {}", system.name);
    let types = system
        .types
        .iter()
        .map(|t| format!("{} (length {:.6})", t.name, t.length))
        .collect::<Vec<_>>()
        .join(", ");
    println!("types: {types}");
    println!("substitution matrix (rows produce, columns rewrite):");
    let n = analysis.spectral.matrix.n();
    for r in 0..n {
        let row = analysis.spectral.matrix.row(r);
        let cells = row.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
        println!("  {cells}");
    }
    match analysis.spectral.primitive_exponent {
        Some(e) => println!("primitive exponent: {e}"),
        None => println!("primitive exponent: none"),
    }
    println!("lambda: {:.6}", analysis.spectral.lambda);
    println!("freq: {}", join6(&analysis.spectral.freq));
    println!("scales: {}", join6(&analysis.scales));
    println!("dimension: {:.6}", analysis.report.dimension);
    println!("residual: {:.6e}", analysis.report.residual);
}

fn join6(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.6}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn segment_cap(flag: Option<usize>) -> Result<usize, CmdError> {
    if let Some(cap) = flag {
        return Ok(cap);
    }
    match std::env::var("FRACTOOL_MAX_SEGMENTS") {
        Ok(value) => value.trim().parse().map_err(|_| {
            CmdError::Domain(format!(
                "FRACTOOL_MAX_SEGMENTS must be a positive integer (got `{value}`)"
            ))
        }),
        Err(_) => Ok(DEFAULT_SEGMENT_CAP),
    }
}

fn cmd_render(
    path: &Path,
    iterations: u32,
    out: &Path,
    orientation: bool,
    max_segments: Option<usize>,
) -> Result<(), CmdError> {
    let system = load_system(path)?;
    let options = ExpandOptions {
        max_segments: segment_cap(max_segments)?,
        ..Default::default()
    };
    let curve = polyline_with(&system, iterations, &options).map_err(CmdError::domain)?;
    let style = RenderStyle {
        show_orientation: orientation,
        ..Default::default()
    };
    let svg = render_svg(&curve, &style);
    std::fs::write(out, svg)
        .map_err(|e| CmdError::Io(format!("cannot write {}: {e}", out.display())))?;
    println!(
        "wrote {}: {} segments at iteration {}",
        out.display(),
        curve.segment_count(),
        iterations
    );
    Ok(())
}

fn cmd_freq(path: &Path, kmax: u32) -> Result<(), CmdError> {
    let system = load_system(path)?;
    let series = frequency_convergence(&system, kmax).map_err(CmdError::domain)?;
    println!("limit freq: {}", join6(&series.freq));
    println!("k census | freq | distance");
    for point in &series.entries {
        let census = point
            .census
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        println!(
            "{} {census} | {} | {:.6}",
            point.k,
            join6(&point.normalized()),
            point.distance
        );
    }
    Ok(())
}

fn cmd_boxdim(path: &Path, iterations: u32, scales: usize) -> Result<(), CmdError> {
    let system = load_system(path)?;
    let options = ExpandOptions {
        max_segments: segment_cap(None)?,
        ..Default::default()
    };
    let curve = polyline_with(&system, iterations, &options).map_err(CmdError::domain)?;
    let fit = box_count_dimension(&curve, scales).map_err(CmdError::domain)?;
    let analysis = analyze(&system).map_err(CmdError::domain)?;

    println!("scale boxes");
    for (eps, count) in fit.scales.iter().zip(&fit.counts) {
        println!("{eps:.6} {count}");
    }
    println!("slope: {:.6}", fit.slope);
    println!("r_squared: {:.6}", fit.r_squared);
    println!(
        "dimension (scaling equation): {:.6}",
        analysis.report.dimension
    );
    if fit.r_squared < 0.98 {
        eprintln!(
            "warning: fit quality r_squared = {:.6} is below 0.98; increase iterations or scales",
            fit.r_squared
        );
    }
    Ok(())
}
