use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use csms_calib::channel::{noise_var_from_snr, ElementGains, NoiseSpec};
use csms_calib::harness::seed::phase_rng;
use csms_calib::harness::{reproduce_named, run_scenario_with_workers, ScenarioConfig, Scheme};
use csms_calib::pncodes::{
    generate_msequence, msequence_code, periodic_autocorrelation, to_bipolar, walsh_matrix,
    CodeMatrix,
};
use csms_calib::theory::{csms_noise_stats, oma_noise_stats, theory_point};

#[derive(Debug, Parser)]
#[command(version, about = "Parallel phased-array calibration with Walsh and shifted m-sequence codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate or check signature codes
    Codes {
        #[command(subcommand)]
        action: CodesAction,
    },
    /// Evaluate the closed-form RMSE prediction
    Theory {
        #[command(subcommand)]
        action: TheoryAction,
    },
    /// Run a Monte-Carlo scenario from a JSON file
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Regenerate the data behind one of the accuracy figures
    Reproduce {
        /// fig5, fig6, fig7 or fig8
        figure: String,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Master seed (overrides the scenario file)
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per grid point
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CodeFormat {
    /// One chip per line
    Text,
    /// One code per comma-separated row
    Csv,
}

#[derive(Debug, Subcommand)]
enum CodesAction {
    /// Print normalized chips of an m-sequence shift or Walsh codes
    Gen {
        /// LFSR degree (m-sequence of length 2^degree - 1)
        #[arg(long, conflicts_with = "walsh")]
        degree: Option<u32>,
        /// Comma-separated tap set, e.g. 6,5
        #[arg(long, value_delimiter = ',')]
        taps: Option<Vec<u32>>,
        /// Emit shifts 0..elements of the m-sequence, or the first `elements` Walsh codes
        #[arg(long, default_value_t = 1)]
        elements: usize,
        /// Walsh order (power of two)
        #[arg(long)]
        walsh: Option<usize>,
        #[arg(long, value_enum, default_value_t = CodeFormat::Csv)]
        format: CodeFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify period, balance and two-valued autocorrelation of an m-sequence
    Check {
        #[arg(long)]
        degree: u32,
        #[arg(long, value_delimiter = ',')]
        taps: Option<Vec<u32>>,
    },
}

#[derive(Debug, Subcommand)]
enum TheoryAction {
    /// Element-averaged predicted RMSE for one operating point
    Eval {
        #[arg(long, value_parser = parse_scheme)]
        scheme: Scheme,
        /// Code length L
        #[arg(long)]
        length: usize,
        /// Element count V
        #[arg(long)]
        elements: usize,
        /// E_v/N0 in dB
        #[arg(long)]
        snr: f64,
        /// Seed of the element phase draw
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',')]
        taps: Option<Vec<u32>>,
        /// Print per-element values too
        #[arg(long)]
        per_element: bool,
    },
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    s.parse().map_err(|e: csms_calib::Error| e.to_string())
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn codes(action: CodesAction) -> Result<()> {
    match action {
        CodesAction::Gen {
            degree,
            taps,
            elements,
            walsh,
            format,
            out,
        } => {
            let matrix = match (degree, walsh) {
                (Some(r), None) => {
                    let m = msequence_code(r, taps.as_deref())?;
                    CodeMatrix::new((0..elements).map(|q| m.shifted(q)).collect())?
                }
                (None, Some(l)) => walsh_matrix(l, elements)?,
                _ => bail!("give exactly one of --degree or --walsh"),
            };
            let text = match format {
                CodeFormat::Csv => matrix.to_csv(),
                CodeFormat::Text => matrix
                    .columns()
                    .iter()
                    .map(|c| c.to_text())
                    .collect::<Vec<_>>()
                    .join("\n"),
            };
            emit(&text, out.as_ref())
        }
        CodesAction::Check { degree, taps } => {
            let seq = generate_msequence(degree, taps.as_deref())?;
            let code = to_bipolar(&seq);
            let len = seq.len();
            let off_peak = -1.0 / len as f64;
            let worst = (1..len)
                .map(|lag| (periodic_autocorrelation(&code, lag) - off_peak).abs())
                .fold(0.0, f64::max);
            println!("length        {len}");
            println!("ones          {} (expected {})", seq.ones(), 1usize << (degree - 1));
            println!("peak          {}", periodic_autocorrelation(&code, 0));
            println!("off-peak dev  {worst:e} from -1/{len}");
            if seq.ones() != 1 << (degree - 1) || worst > 1e-12 {
                bail!("sequence fails the m-sequence checks");
            }
            println!("ok");
            Ok(())
        }
    }
}

fn theory(action: TheoryAction) -> Result<()> {
    let TheoryAction::Eval {
        scheme,
        length,
        elements,
        snr,
        seed,
        taps,
        per_element,
    } = action;
    let noise = NoiseSpec::new(noise_var_from_snr(snr, 1.0))?;
    let stats = match scheme {
        Scheme::Oma => {
            walsh_matrix(length, elements)?;
            oma_noise_stats(&noise, elements)
        }
        Scheme::Csms => {
            let n = length + 1;
            if !n.is_power_of_two() {
                bail!("CSMS length must be 2^r - 1");
            }
            let m = msequence_code(n.trailing_zeros(), taps.as_deref())?;
            csms_noise_stats(&m, elements, &noise)?
        }
    };
    let gains = ElementGains::uniform_random(elements, &mut phase_rng(seed, 0))?;
    let point = theory_point(&gains, &stats)?;
    let (g, p) = point.average()?;
    println!("scheme,V,L,ev_n0_db,gain_rmse_theory_db,phase_rmse_theory_deg");
    println!("{scheme},{elements},{length},{snr},{g},{p}");
    if per_element {
        println!("element,gain_rmse_theory_db,phase_rmse_theory_deg,sigma2,rho");
        for v in 0..point.gain_db.len() {
            println!(
                "{},{},{},{},{}",
                v + 2,
                point.gain_db[v],
                point.phase_deg[v],
                stats.variances()[v + 1],
                stats.correlations()[v]
            );
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Codes { action } => codes(action),
        Command::Theory { action } => theory(action),
        Command::Simulate { config, run } => {
            let mut cfg = ScenarioConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            if let Some(seed) = run.seed {
                cfg.master_seed = seed;
            }
            if let Some(trials) = run.trials {
                cfg.trials = trials;
            }
            cfg.validate()?;
            let report = run_scenario_with_workers(&cfg, run.workers)?;
            emit(&report.to_csv(), run.out.as_ref())
        }
        Command::Reproduce { figure, run } => {
            let report = reproduce_named(&figure, run.trials, run.seed.unwrap_or(0), run.workers)?;
            emit(&report.to_csv(), run.out.as_ref())
        }
    }
}
