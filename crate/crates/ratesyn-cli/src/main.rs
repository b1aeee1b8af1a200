//! Command-line surface: certify a named algorithm or synthesize the
//! rate-optimal one across a grid of condition ratios, emit CSV
//! reports, and run simulation-based soundness validation.
//!
//! Exit codes: 0 success, 1 usage error, 2 certification failure,
//! 3 soundness violation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use ratesyn_cli::{
    default_ratio_grid, gnuplot_script, parse_algo, run_sweep, run_validation, IqcChoice, SweepSpec,
};

#[derive(Parser, Debug)]
#[command(
    name = "ratesyn",
    version,
    about = "Certify and synthesize worst-case convergence rates of first-order methods"
)]
struct Cli {
    /// Lower curvature bound of the function class
    #[arg(long, default_value_t = 1.0)]
    m: f64,

    /// Upper curvature bound; together with --m selects a single run at
    /// ratio L/m
    #[arg(long = "L", conflicts_with = "ratio")]
    l: Option<f64>,

    /// Comma-separated condition ratios L/m to sweep with m normalized
    /// to 1; defaults to twelve log-spaced points in [1.5, 1000]
    #[arg(long, value_delimiter = ',')]
    ratio: Option<Vec<f64>>,

    /// Gradient class: pointwise sector bound or slope restriction
    #[arg(long, value_enum, default_value_t = IqcArg::Offbyone)]
    iqc: IqcArg,

    /// Algorithm: gd:<alpha>, gd:opt, hb:<alpha>,<beta>, tmm, or synth
    #[arg(long, default_value = "synth")]
    algo: String,

    /// Bisection tolerance on certified rates
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,

    /// Write the CSV report to this path instead of stdout
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Write a gnuplot script rendering the CSV (requires --csv)
    #[arg(long, requires = "csv")]
    plot: Option<PathBuf>,

    /// Seed for randomized validation trials
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Run simulation-based validation with this many trials instead of
    /// a sweep (requires a single ratio)
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum IqcArg {
    Sector,
    Offbyone,
}

impl From<IqcArg> for IqcChoice {
    fn from(arg: IqcArg) -> Self {
        match arg {
            IqcArg::Sector => IqcChoice::Sector,
            IqcArg::Offbyone => IqcChoice::OffByOne,
        }
    }
}

fn usage(msg: String) -> u8 {
    eprintln!("error: {msg}");
    1
}

fn run(cli: Cli) -> u8 {
    let algo = match parse_algo(&cli.algo) {
        Ok(a) => a,
        Err(msg) => return usage(msg),
    };
    if !(cli.m > 0.0 && cli.m.is_finite()) {
        return usage(format!("--m must be positive and finite, got {}", cli.m));
    }
    let iqc: IqcChoice = cli.iqc.into();

    // resolve the class bounds / ratio grid
    let (bounds, ratios): (Option<(f64, f64)>, Vec<f64>) = match (&cli.l, &cli.ratio) {
        (Some(l), _) => {
            if !(l.is_finite() && *l > cli.m) {
                return usage(format!("--L must exceed --m, got L={l} m={}", cli.m));
            }
            (Some((cli.m, *l)), vec![l / cli.m])
        }
        (None, Some(list)) => {
            if cli.m != 1.0 {
                return usage(
                    "--ratio normalizes m to 1; pass --m together with --L instead".into(),
                );
            }
            let single = (list.len() == 1).then(|| (1.0, list[0]));
            (single, list.clone())
        }
        (None, None) => (None, default_ratio_grid()),
    };

    if let Some(trials) = cli.trials {
        let Some((m, l)) = bounds else {
            return usage("--trials needs a single point: pass --m/--L or one --ratio".into());
        };
        if !(l.is_finite() && l > m) {
            return usage(format!(
                "validation needs bounds with L > m, got m={m} L={l}"
            ));
        }
        if !(cli.tol > 0.0 && cli.tol.is_finite()) {
            return usage(format!("--tol must be positive, got {}", cli.tol));
        }
        match run_validation(&algo, iqc, m, l, trials, cli.seed, cli.tol) {
            Ok(report) => {
                print!("{}", report.render());
                return report.exit_code();
            }
            Err(msg) => {
                eprintln!("error: {msg}");
                return 2;
            }
        }
    }

    let spec = SweepSpec {
        ratios,
        iqc,
        tol: cli.tol,
        algo,
    };
    if let Err(msg) = spec.validate() {
        return usage(msg);
    }
    let report = run_sweep(&spec);
    let csv = report.to_csv();
    match &cli.csv {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &csv) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 1;
            }
        }
        None => print!("{csv}"),
    }
    if let Some(plot_path) = &cli.plot {
        let csv_path = cli
            .csv
            .as_ref()
            .expect("clap enforces --plot requires --csv")
            .display()
            .to_string();
        if let Err(e) = std::fs::write(plot_path, gnuplot_script(&csv_path)) {
            eprintln!("error: cannot write {}: {e}", plot_path.display());
            return 1;
        }
    }
    report.exit_code()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    ExitCode::from(run(cli))
}
