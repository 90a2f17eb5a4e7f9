use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use wbcquant::bench::{format_table, rows_csv, run_benchmark, Method};
use wbcquant::config::{parse_key_values_file, RunConfig};
use wbcquant::io::{atomic_write, save_image_png};
use wbcquant::pipeline::analyze_batch;
use wbcquant::synth::{generate, SynthSpec};
use wbcquant::Error;

#[derive(Parser)]
#[command(
    name = "wbcquant",
    about = "Segment, count and spatially characterize white blood cells in 100x muscle microscopy images",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a directory of images into per-image JSON reports and an
    /// aggregate CSV.
    Analyze {
        /// Directory of PNG/TIFF images.
        #[arg(long)]
        input: PathBuf,
        /// Output directory for reports.
        #[arg(long)]
        out: PathBuf,
        /// key=value settings file; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write intermediate masks and the ROI matrix.
        #[arg(long)]
        debug_masks: bool,
    },
    /// Render a synthetic ground-truthed image from a spec file.
    Synth {
        /// key=value synthesis spec.
        #[arg(long)]
        spec: PathBuf,
        /// Output directory for the image and its truth JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare threshold methods on a ground-truthed corpus.
    Benchmark {
        /// Directory of image + truth JSON pairs.
        #[arg(long)]
        corpus: PathBuf,
        /// Comma-separated subset of li_otsu,otsu,max_entropy,yen.
        #[arg(long, default_value = "li_otsu,otsu,max_entropy,yen")]
        methods: String,
        /// Output directory for benchmark.csv.
        #[arg(long)]
        out: PathBuf,
    },
}

const EXIT_PARTIAL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_) => EXIT_CONFIG,
        _ => EXIT_PARTIAL,
    }
}

fn run() -> Result<u8, Error> {
    match Cli::parse().command {
        Command::Analyze {
            input,
            out,
            config,
            debug_masks,
        } => {
            let mut cfg = RunConfig::default();
            if let Some(path) = &config {
                cfg.apply(&parse_key_values_file(path)?)?;
            }
            cfg.debug_masks |= debug_masks;
            let outcome = analyze_batch(&input, &out, &cfg)?;
            println!(
                "analyzed {} image(s), {} failed",
                outcome.reports.len(),
                outcome.failures.len()
            );
            for failure in &outcome.failures {
                eprintln!("FAILED {}: {}", failure.path.display(), failure.error);
            }
            Ok(if outcome.failures.is_empty() {
                0
            } else {
                EXIT_PARTIAL
            })
        }
        Command::Synth { spec, out } => {
            let spec = SynthSpec::from_file(&spec)?;
            let (img, truth) = generate(&spec)?;
            std::fs::create_dir_all(&out)?;
            let image_path = out.join(format!("synth_{:08}.png", spec.seed));
            save_image_png(&img, &image_path)?;
            let mut json = serde_json::to_string_pretty(&truth)?;
            json.push('\n');
            atomic_write(&image_path.with_extension("truth.json"), json.as_bytes())?;
            println!("wrote {}", image_path.display());
            Ok(0)
        }
        Command::Benchmark {
            corpus,
            methods,
            out,
        } => {
            let methods = methods
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(Method::from_str)
                .collect::<Result<Vec<_>, _>>()?;
            if methods.is_empty() {
                return Err(Error::InvalidConfig("no methods requested".into()));
            }
            let rows = run_benchmark(&corpus, &methods, &RunConfig::default())?;
            print!("{}", format_table(&rows));
            std::fs::create_dir_all(&out)?;
            atomic_write(&out.join("benchmark.csv"), rows_csv(&rows)?.as_bytes())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
