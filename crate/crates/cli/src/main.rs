use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info};

use sonodir_core::containers::table::{balloon_rows, write_balloon_table};
use sonodir_core::containers::{
    read_document, read_fir_bank, read_opendaff, write_fir_bank, write_opendaff, DaffBalloon,
    DirectivityDocument, DocumentKind, DocumentName,
};
use sonodir_core::firgen::{synthesize_bank, DEFAULT_FIR_LENGTH, DEFAULT_SAMPLE_RATE};
use sonodir_core::geometry::make_equiangular_grid;
use sonodir_core::interpolate::{upsample, InterpolatedDirectivity};
use sonodir_core::pipeline::{process, Manifest};
use sonodir_core::{Error, Result};

/// Directivity databases from spherical-array recordings.
#[derive(Parser)]
#[command(name = "sonodir", version)]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full chain for one instrument manifest.
    Process {
        manifest: PathBuf,
        /// Output directory.
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(short, long)]
        jobs: Option<usize>,
    },
    /// Check manifests and output files.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Write one frequency column of a document as a TSV balloon.
    Balloon {
        document: PathBuf,
        /// Band, partial or bin index, depending on the document kind.
        #[arg(short, long)]
        index: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Interpolate a third-octave document onto an equiangular grid (DAFF output).
    Interpolate {
        document: PathBuf,
        #[arg(long, default_value_t = 5.0)]
        step: f64,
        #[arg(long, default_value_t = 0.0)]
        smoothing: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Design a minimum-phase FIR bank from a third-octave document.
    Fir {
        document: PathBuf,
        #[arg(long, default_value_t = 5.0)]
        step: f64,
        #[arg(long, default_value_t = 0.0)]
        smoothing: f64,
        #[arg(long, default_value_t = DEFAULT_FIR_LENGTH)]
        length: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Convert a FIR bank to a DAFF magnitude balloon at the band centres.
    ExportDaff {
        bank: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Print a summary of a file.
    Info { path: PathBuf },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Manifest(_) | Error::InvalidGridStep { .. } | Error::BadFileName(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> std::result::Result<ExitCode, Failure> {
    match command {
        Command::Process {
            manifest,
            out,
            jobs,
        } => {
            if jobs == Some(0) {
                return Err(Failure::Usage("--jobs must be at least 1".into()));
            }
            let manifest = Manifest::load(&manifest).map_err(|e| Failure::Usage(e.to_string()))?;
            let output = process(&manifest, jobs)?;
            for path in output.write(&out)? {
                println!("{}", path.display());
            }
            for f in &output.failures {
                error!("note {} failed: {}", f.midi, f.message);
            }
            if output.failures.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "{} of {} notes failed",
                    output.failures.len(),
                    manifest.notes.len()
                );
                Ok(ExitCode::from(1))
            }
        }
        Command::Validate { paths } => {
            let mut bad = 0;
            for path in &paths {
                match check(path) {
                    Ok(summary) => println!("ok\t{}\t{summary}", path.display()),
                    Err(e) => {
                        bad += 1;
                        println!("invalid\t{}\t{e}", path.display());
                    }
                }
            }
            Ok(if bad == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Balloon {
            document,
            index,
            out,
        } => {
            let doc = read_document(&document)?;
            let (_, rows, cols) = doc.shape();
            if index >= cols {
                return Err(Failure::Usage(format!(
                    "index {index} out of range; document has {cols} frequencies"
                )));
            }
            let magnitude = doc.data_real().zip_map(doc.data_imag(), f64::hypot);
            write_balloon_table(&balloon_rows(doc.receivers(), &magnitude, index)?, &out)?;
            info!(
                "{} directions at {} Hz -> {}",
                rows,
                doc.frequencies()[index],
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Interpolate {
            document,
            step,
            smoothing,
            out,
        } => {
            let hi = interpolated(&document, step, smoothing)?;
            write_opendaff(&DaffBalloon::from_interpolated(&hi)?, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Fir {
            document,
            step,
            smoothing,
            length,
            out,
        } => {
            if length == 0 {
                return Err(Failure::Usage("--length must be at least 1".into()));
            }
            let hi = interpolated(&document, step, smoothing)?;
            write_fir_bank(&synthesize_bank(&hi, length, DEFAULT_SAMPLE_RATE)?, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportDaff { bank, out } => {
            write_opendaff(&DaffBalloon::from_fir_bank(&read_fir_bank(&bank)?)?, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Info { path } => {
            println!("{}", check(&path)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn interpolated(document: &Path, step: f64, smoothing: f64) -> Result<InterpolatedDirectivity> {
    let doc = read_document(document)?;
    if doc.kind() != DocumentKind::ThirdOctave {
        return Err(Error::InvalidDocument(format!(
            "{} is a {} document, expected third_octave",
            document.display(),
            doc.kind()
        )));
    }
    upsample(
        &doc.to_band_directivity()?,
        &make_equiangular_grid(step)?,
        smoothing,
    )
}

fn extension(path: &Path) -> &str {
    path.extension().and_then(|e| e.to_str()).unwrap_or("")
}

/// Reads a file fully and returns a one-line summary.
fn check(path: &Path) -> Result<String> {
    match extension(path) {
        "toml" => {
            let m = Manifest::load(path)?;
            let missing: Vec<_> = m
                .notes
                .iter()
                .map(|n| m.wav_path(n))
                .filter(|p| !p.is_file())
                .collect();
            if let Some(p) = missing.first() {
                return Err(Error::Manifest(format!(
                    "missing recording {}",
                    p.display()
                )));
            }
            Ok(format!(
                "manifest: {} ({}), {} notes",
                m.instrument.name,
                m.instrument.dynamic,
                m.notes.len()
            ))
        }
        "sofalite" => {
            let doc = read_document(path)?;
            let file = path.file_name().and_then(|f| f.to_str()).unwrap_or("");
            let expected = doc.name()?;
            if DocumentName::parse(file).ok().as_ref() != Some(&expected) {
                return Err(Error::BadFileName(format!(
                    "{file} should be named {}",
                    expected.file_name()
                )));
            }
            Ok(summary(&doc))
        }
        "daff" => {
            let b = read_opendaff(path)?;
            Ok(format!(
                "daff: {} records at {}° resolution, {} frequencies",
                b.grid().len(),
                b.step(),
                b.frequencies().len()
            ))
        }
        "firbank" => {
            let bank = read_fir_bank(path)?;
            Ok(format!(
                "fir bank: {} filters of {} taps at {} Hz",
                bank.grid().len(),
                bank.length(),
                bank.sample_rate()
            ))
        }
        other => Err(Error::BadFileName(format!(
            "unknown extension {other:?} on {}",
            path.display()
        ))),
    }
}

fn summary(doc: &DirectivityDocument) -> String {
    let (m, r, n) = doc.shape();
    format!(
        "{} document {}: {m}x{r}x{n}, {:.3}..{:.3} Hz",
        doc.kind(),
        doc.source_name(),
        doc.frequencies().first().copied().unwrap_or(0.0),
        doc.frequencies().last().copied().unwrap_or(0.0)
    )
}
