//! Command-line front end: construct built-in relay designs, verify design
//! files, run Monte Carlo error-rate sweeps, and fit diversity slopes from
//! the resulting CSV.

use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use dstbc::design::{
    check_cuwd, check_g_group_decodable, check_linear_independence, parse_design, rate_dpcu,
    serialize_design, LinearSpaceTimeDesign,
};
use dstbc::ofdm::derive_row_structure;
use dstbc::sweep::{
    default_relays, estimate_diversity_slope, family_design, parse_result_rows, run_sweep,
    write_csv, DesignFamily, ExperimentConfig,
};

#[derive(Parser)]
#[command(name = "dstbc", version, about = "Distributed space-time block code toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a built-in design and print its verification report.
    Construct {
        /// Design family: alamouti | pciod | regular | field-extension.
        #[arg(long, value_parser = DesignFamily::from_str)]
        family: DesignFamily,
        /// Number of relays; defaults to the family's usual size.
        #[arg(long)]
        relays: Option<usize>,
        /// Write the design file here; without this the design text goes to
        /// stdout with the report appended as comment lines.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run all checks on a design file.
    Verify {
        /// Design file to check.
        file: PathBuf,
    },
    /// Run a Monte Carlo sweep and write the results CSV.
    Sweep {
        /// Key-value config file; built-in defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Extra `key=value` overrides applied after the file; may repeat.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the diversity slope from a results CSV.
    Slope {
        /// Results CSV produced by `sweep`.
        input: PathBuf,
        /// CER window `lo,hi`; only grid points inside it enter the fit.
        #[arg(long, default_value = "1e-4,1e-1")]
        window: String,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn Error>> {
    match cli.command {
        Command::Construct { family, relays, out } => construct(
            family,
            relays.unwrap_or_else(|| default_relays(family)),
            out.as_deref(),
        ),
        Command::Verify { file } => verify(&file),
        Command::Sweep {
            config,
            seed,
            overrides,
            out,
        } => sweep(config.as_deref(), seed, &overrides, out.as_deref()),
        Command::Slope { input, window } => slope(&input, &window),
    }
}

/// One-line check summary in the shape
/// `CUWD: no; 4-group decodable: yes; row-orthogonal relays: yes`.
fn report_line(design: &LinearSpaceTimeDesign) -> String {
    let yn = |b: bool| if b { "yes" } else { "no" };
    let row_orthogonal = derive_row_structure(design)
        .map(|s| s.passes())
        .unwrap_or(false);
    format!(
        "CUWD: {}; {}-group decodable: {}; row-orthogonal relays: {}",
        yn(check_cuwd(design).passed),
        design.num_groups(),
        yn(check_g_group_decodable(design)),
        yn(row_orthogonal),
    )
}

fn summary_line(design: &LinearSpaceTimeDesign) -> Result<String, Box<dyn Error>> {
    Ok(format!(
        "{}x{} design, {} real symbols in {} groups, rate {} dpcu",
        design.t(),
        design.n_t(),
        design.k(),
        design.num_groups(),
        rate_dpcu(design)?,
    ))
}

fn construct(
    family: DesignFamily,
    relays: usize,
    out: Option<&Path>,
) -> Result<(), Box<dyn Error>> {
    let design = family_design(family, relays)?;
    let text = serialize_design(&design);
    match out {
        Some(path) => {
            fs::write(path, &text)?;
            println!("wrote {}", path.display());
            println!("{}", summary_line(&design)?);
            println!("{}", report_line(&design));
        }
        None => {
            print!("{}", text);
            println!("# {}", summary_line(&design)?);
            println!("# {}", report_line(&design));
        }
    }
    Ok(())
}

fn verify(file: &Path) -> Result<(), Box<dyn Error>> {
    let text = fs::read_to_string(file)?;
    let design = parse_design(&text)?;
    if !check_linear_independence(design.weights()) {
        return Err("linear independence: the weight matrices are dependent over the reals".into());
    }
    if !check_g_group_decodable(&design) {
        return Err(format!(
            "group decodability: the stored {}-group partition violates the \
             zero cross-group weight condition",
            design.num_groups()
        )
        .into());
    }
    println!("{}", summary_line(&design)?);
    println!("{}", report_line(&design));
    println!("ok");
    Ok(())
}

fn sweep(
    config: Option<&Path>,
    seed: Option<u64>,
    overrides: &[String],
    out: Option<&Path>,
) -> Result<(), Box<dyn Error>> {
    let mut cfg = match config {
        Some(path) => ExperimentConfig::parse(&fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    for pair in overrides {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| format!("--set expects key=value, got '{}'", pair))?;
        cfg.set(key.trim(), value.trim())?;
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let rows = run_sweep(&cfg)?;
    let csv = write_csv(&cfg, &rows);
    match out {
        Some(path) => fs::write(path, &csv)?,
        None => print!("{}", csv),
    }
    for r in &rows {
        eprintln!(
            "P = {} dB: {} errors / {} trials in {:.2} s",
            r.p_db, r.errors, r.trials, r.wall_seconds
        );
    }
    Ok(())
}

fn slope(input: &Path, window: &str) -> Result<(), Box<dyn Error>> {
    let (lo, hi) = window
        .split_once(',')
        .ok_or("window expects 'lo,hi'")
        .and_then(|(a, b)| {
            match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
                (Ok(lo), Ok(hi)) => Ok((lo, hi)),
                _ => Err("window expects two numbers 'lo,hi'"),
            }
        })?;
    let rows = parse_result_rows(&fs::read_to_string(input)?)?;
    let used = rows
        .iter()
        .filter(|r| r.errors > 0 && r.cer >= lo && r.cer <= hi)
        .count();
    let slope = estimate_diversity_slope(&rows, (lo, hi))?;
    println!("slope = {:.4}", slope);
    println!("fitted over {} of {} grid points", used, rows.len());
    Ok(())
}
