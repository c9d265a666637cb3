mod spec;
mod sweep;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nlswap::boxes::{enumerate_ns_vertices, verify_box, BipartiteBox};
use nlswap::functionals::{ch_value, coupler_valid_on};
use nlswap::models::{classify, minimal_xb, perfect_xb, TheoryModel};
use nlswap::swap::{swap, swap_threshold};
use nlswap::wirings::{enumerate_all_wirings, kind_histogram, pairwise_report, WiringKind};
use nlswap::{Error, ExactScalar};
use serde_json::json;

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Lib(e) => e.code(),
            CliError::Io { .. } => "E_IO",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "nlswap", version, about = "Exact non-locality swapping calculator")]
struct Cli {
    /// Decimal digits in rendered values.
    #[arg(long, global = true, env = "NLSWAP_PRECISION", default_value_t = 6)]
    precision: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a coupler to two boxes.
    Swap {
        /// `X_t,X_b`, or `genuine`, `quantum-perfect`, `quantum-minimal`.
        #[arg(long)]
        coupler: String,
        /// Alice–Bob box: pr, anti-pr, mixed, pr:ABC, det:ABCD, noisy:ABCD:XI,
        /// iso:XI, iso:top, iso:threshold or @file.json.
        #[arg(long)]
        ab: String,
        /// Bob–Charlie box, same syntax as --ab.
        #[arg(long)]
        bc: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Classify the coupler `(X_t, X_b)`.
    Classify {
        #[arg(allow_hyphen_values = true)]
        x_top: String,
        #[arg(allow_hyphen_values = true)]
        x_bottom: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Tabulate the coupler boundaries over a grid of X_t values.
    Sweep {
        /// `START:END:N`, inclusive, within (1, 3/2].
        #[arg(long, default_value = "41/40:3/2:20")]
        grid: String,
        /// Write to a file instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Enumerate the extremal wirings.
    Wirings {
        #[arg(long, default_value = "wirings.json")]
        output: PathBuf,
    },
    /// Check a box, or a coupler against a set of boxes.
    Verify {
        #[arg(long = "box", conflicts_with = "coupler")]
        box_spec: Option<String>,
        #[arg(long, required_unless_present = "box_spec")]
        coupler: Option<String>,
        /// Boxes to check the coupler on: `model` (genuine boxes of the
        /// coupler's own theory), `vertices`, or box specs separated by `;`.
        #[arg(long, default_value = "model")]
        against: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn scalar_json(v: &ExactScalar, precision: usize) -> serde_json::Value {
    json!({ "exact": v.to_canonical_string(), "decimal": v.to_decimal(precision) })
}

fn scalar_text(v: &ExactScalar, precision: usize) -> String {
    format!("{v}  ({})", v.to_decimal(precision))
}

fn box_text(out: &mut String, title: &str, bx: &BipartiteBox, precision: usize) {
    let _ = writeln!(out, "{title}:");
    let _ = writeln!(out, "  {:<6}{:>24}{:>24}{:>24}{:>24}", "ab\\xy", "00", "01", "10", "11");
    for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let _ = write!(out, "  {:<6}", format!("{a}{b}"));
        for (x, y) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let v = bx.get(a, b, x, y);
            let _ = write!(out, "{:>24}", format!("{v} ({})", v.to_decimal(precision)));
        }
        let _ = writeln!(out);
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn cmd_swap(coupler: &str, ab: &str, bc: &str, format: Format, precision: usize) -> CliResult<String> {
    let coupler = spec::parse_coupler(coupler)?;
    let ab = spec::parse_box(ab, Some(&coupler))?;
    let bc = spec::parse_box(bc, Some(&coupler))?;
    let outcome = swap(&coupler, &ab.table, &bc.table)?;
    if format == Format::Json {
        let mut doc = outcome.to_json();
        doc["decimal"] = json!({
            "p_success": outcome.p_success.to_decimal(precision),
            "ch_success": outcome.ch_success.to_decimal(precision),
            "ch_failure": outcome.ch_failure.to_decimal(precision),
        });
        return Ok(format!("{}\n", serde_json::to_string_pretty(&doc).expect("valid json")));
    }
    let mut out = String::new();
    let _ = writeln!(out, "p_success  = {}", scalar_text(&outcome.p_success, precision));
    let _ = writeln!(out, "ch_success = {}", scalar_text(&outcome.ch_success, precision));
    let _ = writeln!(out, "ch_failure = {}", scalar_text(&outcome.ch_failure, precision));
    box_text(&mut out, "success box", &outcome.success_box, precision);
    box_text(&mut out, "failure box", &outcome.failure_box, precision);
    Ok(out)
}

fn cmd_classify(x_top: &str, x_bottom: &str, format: Format, precision: usize) -> CliResult<String> {
    let x_top = ExactScalar::parse(x_top)?;
    let x_bottom = ExactScalar::parse(x_bottom)?;
    let class = classify(&x_top, &x_bottom)?;
    let perfect = perfect_xb(&x_top)?;
    let minimal = minimal_xb(&x_top)?;
    if format == Format::Json {
        let doc = json!({
            "class": class.name(),
            "x_top": scalar_json(&x_top, precision),
            "x_bottom": scalar_json(&x_bottom, precision),
            "perfect_xb": scalar_json(&perfect, precision),
            "minimal_xb": scalar_json(&minimal, precision),
        });
        return Ok(format!("{}\n", serde_json::to_string_pretty(&doc).expect("valid json")));
    }
    Ok(format!(
        "{class}\nperfect_xb = {}\nminimal_xb = {}\n",
        scalar_text(&perfect, precision),
        scalar_text(&minimal, precision)
    ))
}

fn cmd_sweep(grid: &str, output: Option<&Path>, format: Format, precision: usize) -> CliResult<String> {
    let rows = sweep::sweep(&sweep::parse_grid(grid)?)?;
    let text = match format {
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&sweep::to_json(&rows, precision)).expect("valid json")
        ),
        _ => sweep::to_csv(&rows, precision),
    };
    match output {
        Some(path) => {
            write_file(path, &text)?;
            Ok(format!("wrote {} rows to {}\n", rows.len(), path.display()))
        }
        None => Ok(text),
    }
}

fn cmd_wirings(output: &Path) -> CliResult<String> {
    let wirings = enumerate_all_wirings()?;
    let hist = kind_histogram(&wirings);
    let report = pairwise_report()?;
    let doc = json!({
        "total": wirings.len(),
        "histogram": WiringKind::ALL.iter().map(|k| (k.name().to_string(), json!(hist[k]))).collect::<serde_json::Map<_, _>>(),
        "pairwise_sums": report,
        "wirings": wirings.iter().map(|w| w.to_json()).collect::<Vec<_>>(),
    });
    write_file(output, &format!("{}\n", serde_json::to_string_pretty(&doc).expect("valid json")))?;
    let mut out = String::new();
    for kind in WiringKind::ALL {
        let _ = writeln!(out, "{}: {}", kind.name(), hist[&kind]);
    }
    let counts: Vec<String> = WiringKind::ALL.iter().map(|k| hist[k].to_string()).collect();
    let _ = writeln!(out, "histogram: {}", counts.join("/"));
    let _ = writeln!(out, "total: {}", wirings.len());
    Ok(out)
}

fn cmd_verify(
    box_spec: Option<&str>,
    coupler: Option<&str>,
    against: &str,
    format: Format,
    precision: usize,
) -> CliResult<String> {
    if let Some(spec) = box_spec {
        // Validity is the thing being reported, so parse without the check.
        let labelled = spec::parse_box_unchecked(spec)?;
        let report = verify_box(&labelled.table);
        let ch = ch_value(&labelled.table);
        if format == Format::Json {
            let doc = json!({
                "valid": report.is_valid(),
                "nonnegative": report.nonneg,
                "normalized": report.normalized,
                "nonsignalling": report.nonsignalling,
                "ch": scalar_json(&ch, precision),
            });
            return Ok(format!("{}\n", serde_json::to_string_pretty(&doc).expect("valid json")));
        }
        return Ok(format!(
            "valid: {}\nnonnegative: {}\nnormalized: {}\nnonsignalling: {}\nch = {}\n",
            report.is_valid(),
            report.nonneg,
            report.normalized,
            report.nonsignalling,
            scalar_text(&ch, precision)
        ));
    }
    let coupler = spec::parse_coupler(coupler.expect("clap requires --box or --coupler"))?;
    let boxes: Vec<BipartiteBox> = match against.trim() {
        "model" => TheoryModel::new(coupler.x_top().clone(), coupler.x_bottom().clone())?.genuine_boxes(),
        "vertices" => enumerate_ns_vertices(),
        list => list
            .split(';')
            .map(|s| spec::parse_box(s, Some(&coupler)).map(|b| b.table))
            .collect::<CliResult<_>>()?,
    };
    let valid = coupler_valid_on(&coupler, &boxes);
    let class = classify(coupler.x_top(), coupler.x_bottom()).ok();
    let threshold = swap_threshold(&coupler).ok();
    if format == Format::Json {
        let doc = json!({
            "valid": valid,
            "boxes_checked": boxes.len(),
            "class": class.map(|c| c.name()),
            "swap_threshold": threshold.as_ref().map(|t| scalar_json(t, precision)),
        });
        return Ok(format!("{}\n", serde_json::to_string_pretty(&doc).expect("valid json")));
    }
    let mut out = format!("valid: {valid}\nboxes checked: {}\n", boxes.len());
    if let Some(class) = class {
        let _ = writeln!(out, "class: {class}");
    }
    if let Some(t) = threshold {
        let _ = writeln!(out, "swap threshold = {}", scalar_text(&t, precision));
    }
    Ok(out)
}

fn run(cli: Cli) -> CliResult<String> {
    let precision = cli.precision;
    match cli.command {
        Command::Swap { coupler, ab, bc, format } => cmd_swap(&coupler, &ab, &bc, format, precision),
        Command::Classify { x_top, x_bottom, format } => cmd_classify(&x_top, &x_bottom, format, precision),
        Command::Sweep { grid, output, format } => cmd_sweep(&grid, output.as_deref(), format, precision),
        Command::Wirings { output } => cmd_wirings(&output),
        Command::Verify {
            box_spec,
            coupler,
            against,
            format,
        } => cmd_verify(box_spec.as_deref(), coupler.as_deref(), &against, format, precision),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}
