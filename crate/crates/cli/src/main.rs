//! `ssh-emergence` — band structure of 1D diatomic square-well crystals,
//! their tight-binding reduction onto the dimerized (SSH) chain, and the
//! gap-preserving deformation connecting the two dimerization patterns.
//!
//! Every command prints a human-readable summary to standard output (or
//! the raw CSV table with `--format csv`) and can write the table to a
//! file with `--output`; a JSON manifest with the resolved parameters and
//! a checksum lands next to every written file. Data files carry no
//! timestamps, so identical invocations produce byte-identical output.

#![forbid(unsafe_code)]
// `!(x > 0.0)` rather than `x <= 0.0`: the negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;
mod resolve;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use ssh_emergence_core::bloch::{dispersion_curve, lowest_bands, CrystalSpec};
use ssh_emergence_core::homotopy::{eps_sample, scan_row, GapScanRow, HomotopyConfig};
use ssh_emergence_core::ssh::{momentum_grid, SshParams};
use ssh_emergence_core::tb::{
    hopping_report, matrix_element, orbital_overlap, rescaled_band_distance, OrbitalBasis,
};
use ssh_emergence_core::well::{ground_state, WellParams};
use ssh_emergence_core::Error as CoreError;

use output::{fmt_float, Artifacts};
use resolve::Resolver;

const EXIT_CODE_HELP: &str = "Exit codes:
  0  success
  1  input/output failure
  2  usage error
  3  invalid parameters (violated precondition, closed gap, overlapping wells)
  4  numerical failure (band scan exhausted, transfer-matrix overflow)
  5  resource guard (requested discretization too large)

Environment:
  SSH_EMERGENCE_THREADS  cap the worker threads of the deformation scan
  SSH_EMERGENCE_SEED     seed for the randomized checks in the test suite";

#[derive(Parser)]
#[command(name = "ssh-emergence", version, about, after_help = EXIT_CODE_HELP)]
struct Cli {
    /// Flat `key = value` config file; command-line flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Write the CSV table to this file (a `.manifest.json` with the
    /// resolved parameters and a SHA-256 of the bytes lands next to it).
    #[arg(long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,

    /// What to print on standard output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Pretty)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    /// Human-readable summary.
    Pretty,
    /// The raw CSV table.
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Dispersion, spectral gap, and winding index of the dimerized chain
    Ssh {
        /// Intra-cell hopping [default: 1]
        #[arg(long, allow_negative_numbers = true)]
        t_in: Option<f64>,
        /// Inter-cell hopping [default: e^(-1/15)]
        #[arg(long, allow_negative_numbers = true)]
        t_out: Option<f64>,
        /// Momentum samples over one half zone [default: 65]
        #[arg(long)]
        n_k: Option<usize>,
        /// Insist on the winding index: fail instead of reporting it as
        /// undefined when the hoppings tie
        #[arg(long)]
        winding: bool,
    },
    /// Ground state of one isolated square well
    SingleWell {
        /// Well depth parameter (the potential is -lambda^2 inside)
        /// [default: 10]
        #[arg(long)]
        lambda: Option<f64>,
        /// Well width [default: 0.1]
        #[arg(long)]
        w: Option<f64>,
    },
    /// Lowest two Bloch bands of a two-well crystal
    Bands {
        /// Squared depth parameter [default: 100]
        #[arg(long)]
        lambda2: Option<f64>,
        /// Center-to-center spacing inside the cell [default: 0.5]
        #[arg(long)]
        d_in: Option<f64>,
        /// Center-to-center spacing across cells [default: 0.5 + 1/150]
        #[arg(long)]
        d_out: Option<f64>,
        /// Width of the first well [default: 0.1]
        #[arg(long)]
        w_a: Option<f64>,
        /// Width of the second well [default: 0.1]
        #[arg(long)]
        w_b: Option<f64>,
        /// Momentum samples per band [default: 65]
        #[arg(long)]
        n_k: Option<usize>,
    },
    /// Tight-binding reduction: hopping integrals and the SSH limit
    Reduce {
        /// Well depth parameter [default: 20]
        #[arg(long)]
        lambda: Option<f64>,
        /// Spacing asymmetry: the long spacing is d + alpha/lambda;
        /// negative values swap the dimerization [default: 1/15]
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        /// Short center-to-center spacing [default: 0.5]
        #[arg(long)]
        d: Option<f64>,
        /// Well width [default: 0.1]
        #[arg(long)]
        w: Option<f64>,
    },
    /// Gap scan along the deformation between the two dimerizations
    Homotopy {
        /// Squared depth parameter [default: 100]
        #[arg(long)]
        lambda2: Option<f64>,
        /// Base spacing [default: 0.5]
        #[arg(long)]
        d: Option<f64>,
        /// Base width [default: 0.1]
        #[arg(long)]
        w: Option<f64>,
        /// Spacing-difference amplitude [default: 1/15]
        #[arg(long)]
        alpha: Option<f64>,
        /// Width-asymmetry amplitude at the midpoint [default: 1/20]
        #[arg(long)]
        beta: Option<f64>,
        /// Samples over [-1, 1] [default: 201]
        #[arg(long)]
        n_eps: Option<usize>,
        /// Also render the four band-edge curves as a standalone SVG chart
        #[arg(long, value_name = "FILE")]
        svg: Option<PathBuf>,
    },
    /// Finite crystal spectrum rescaled onto the dimer bands
    FiniteVolume {
        /// Well depth parameter [default: 20]
        #[arg(long)]
        lambda: Option<f64>,
        /// Spacing asymmetry; negative values swap the dimerization
        /// [default: 1/15]
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        /// Short center-to-center spacing [default: 0.5]
        #[arg(long)]
        d: Option<f64>,
        /// Well width [default: 0.1]
        #[arg(long)]
        w: Option<f64>,
        /// Number of unit cells [default: 8]
        #[arg(long)]
        cells: Option<usize>,
        /// Grid points per unit cell [default: 512]
        #[arg(long)]
        grid_per_cell: Option<usize>,
    },
}

/// Anything the driver can fail with, tagged with its exit code.
#[derive(Debug)]
enum CliError {
    Core(CoreError),
    Io(std::io::Error),
    Config(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 3,
            CliError::Core(e) => match e {
                CoreError::InvalidInput(_)
                | CoreError::GapClosed
                | CoreError::OutsideWindow { .. } => 3,
                CoreError::ScanExhausted { .. } | CoreError::Unstable { .. } => 4,
                CoreError::ResourceLimit { .. } => 5,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Config(e) => write!(f, "{e}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

/// Dispatches the parsed command: resolves parameters (flags over config
/// file over defaults), computes, then routes the CSV table and summary.
fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let mut resolver = Resolver::from_file(cli.config.as_deref())?;
    let (name, csv, summary) = match &cli.command {
        Command::Ssh {
            t_in,
            t_out,
            n_k,
            winding,
        } => run_ssh(&mut resolver, *t_in, *t_out, *n_k, *winding)?,
        Command::SingleWell { lambda, w } => run_single_well(&mut resolver, *lambda, *w)?,
        Command::Bands {
            lambda2,
            d_in,
            d_out,
            w_a,
            w_b,
            n_k,
        } => run_bands(&mut resolver, *lambda2, *d_in, *d_out, *w_a, *w_b, *n_k)?,
        Command::Reduce {
            lambda,
            alpha,
            d,
            w,
        } => run_reduce(&mut resolver, *lambda, *alpha, *d, *w)?,
        Command::Homotopy {
            lambda2,
            d,
            w,
            alpha,
            beta,
            n_eps,
            svg: _,
        } => run_homotopy(&mut resolver, *lambda2, *d, *w, *alpha, *beta, *n_eps)?,
        Command::FiniteVolume {
            lambda,
            alpha,
            d,
            w,
            cells,
            grid_per_cell,
        } => run_finite_volume(
            &mut resolver,
            *lambda,
            *alpha,
            *d,
            *w,
            *cells,
            *grid_per_cell,
        )?,
    };
    resolver.reject_unknown_keys()?;

    let artifacts = Artifacts {
        command: name,
        parameters: resolver.into_resolved(),
        started,
    };
    if let Some(path) = &cli.output {
        artifacts.write(path, csv.as_bytes())?;
    }
    if let Command::Homotopy { svg: Some(path), .. } = &cli.command {
        let chart = output::homotopy_svg(&last_scan_rows(&csv));
        artifacts.write(path, chart.as_bytes())?;
    }
    match cli.format {
        Format::Pretty => print!("{summary}"),
        Format::Csv => print!("{csv}"),
    }
    Ok(())
}

/// Re-reads the scan rows back out of the CSV just built. The chart wants
/// the same numbers the file got, and round-tripping through the emitted
/// text keeps the two artifacts consistent by construction.
fn last_scan_rows(csv: &str) -> Vec<GapScanRow> {
    csv.lines()
        .skip(1)
        .map(|line| {
            let mut it = line.split(',').map(|v| v.parse::<f64>().unwrap());
            GapScanRow {
                eps: it.next().unwrap(),
                mu1_0: it.next().unwrap(),
                mu2_0: it.next().unwrap(),
                mu1_pi: it.next().unwrap(),
                mu2_pi: it.next().unwrap(),
                gap0: it.next().unwrap(),
                gap_pi: it.next().unwrap(),
            }
        })
        .collect()
}

type CommandOutput = (&'static str, String, String);

fn run_ssh(
    resolver: &mut Resolver,
    t_in: Option<f64>,
    t_out: Option<f64>,
    n_k: Option<usize>,
    want_winding: bool,
) -> Result<CommandOutput, CliError> {
    let t_in = resolver.f64("t_in", t_in, 1.0)?;
    let t_out = resolver.f64("t_out", t_out, (-1.0f64 / 15.0).exp())?;
    let n_k = resolver.usize("n_k", n_k, 65)?;
    resolver.note_flag("winding", want_winding);

    let params = SshParams::new(t_in, t_out)?;
    let winding = params.winding();
    if want_winding {
        winding.clone()?;
    }

    let mut csv = String::from("k,e_minus,e_plus\n");
    for k in momentum_grid(n_k) {
        let (lower, upper) = params.dispersion(k);
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_float(k),
            fmt_float(lower),
            fmt_float(upper)
        ));
    }

    let winding_text = match winding {
        Ok(n) => n.to_string(),
        Err(_) => "undefined (hopping magnitudes tie, gap closed)".into(),
    };
    let summary = format!(
        "dimerized chain: t_in = {t_in}, t_out = {t_out}\n\
         spectral gap    = {:.9e}\n\
         winding index   = {winding_text}\n\
         dispersion table: {n_k} momentum samples in [0, pi]\n",
        params.gap()
    );
    Ok(("ssh", csv, summary))
}

fn run_single_well(
    resolver: &mut Resolver,
    lambda: Option<f64>,
    w: Option<f64>,
) -> Result<CommandOutput, CliError> {
    let lambda = resolver.f64("lambda", lambda, 10.0)?;
    let w = resolver.f64("w", w, 0.1)?;

    let state = ground_state(WellParams::new(lambda, w)?)?;
    let csv = format!(
        "lambda,w,e0,q,kappa,amplitude\n{},{},{},{},{},{}\n",
        fmt_float(lambda),
        fmt_float(w),
        fmt_float(state.energy),
        fmt_float(state.q),
        fmt_float(state.kappa),
        fmt_float(state.amplitude)
    );
    let summary = format!(
        "single well: depth parameter lambda = {lambda}, width w = {w}\n\
         ground energy e0 = {:.12e}\n\
         inner momentum q = {:.12e}\n\
         tail decay kappa = {:.12e}\n\
         amplitude A      = {:.12e}\n",
        state.energy, state.q, state.kappa, state.amplitude
    );
    Ok(("single-well", csv, summary))
}

fn run_bands(
    resolver: &mut Resolver,
    lambda2: Option<f64>,
    d_in: Option<f64>,
    d_out: Option<f64>,
    w_a: Option<f64>,
    w_b: Option<f64>,
    n_k: Option<usize>,
) -> Result<CommandOutput, CliError> {
    let lambda2 = resolver.f64("lambda2", lambda2, 100.0)?;
    let d_in = resolver.f64("d_in", d_in, 0.5)?;
    let d_out = resolver.f64("d_out", d_out, 0.5 + 1.0 / 150.0)?;
    let w_a = resolver.f64("w_a", w_a, 0.1)?;
    let w_b = resolver.f64("w_b", w_b, 0.1)?;
    let n_k = resolver.usize("n_k", n_k, 65)?;
    if !(lambda2 >= 0.0) {
        return Err(CliError::Config(format!(
            "lambda2 must be nonnegative, got {lambda2}"
        )));
    }

    let spec = CrystalSpec::new(lambda2.sqrt(), w_a, w_b, d_in, d_out)?;
    let band1 = dispersion_curve(&spec, 1, n_k)?;
    let band2 = dispersion_curve(&spec, 2, n_k)?;

    let mut csv = String::from("k,mu1,mu2\n");
    for (a, b) in band1.iter().zip(band2.iter()) {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_float(a.0),
            fmt_float(a.1),
            fmt_float(b.1)
        ));
    }

    let bands = lowest_bands(&spec)?;
    let summary = format!(
        "two-well crystal: lambda^2 = {lambda2}, spacings ({d_in}, {d_out}), \
         widths ({w_a}, {w_b})\n\
         band 1: [{:.9e}, {:.9e}]\n\
         band 2: [{:.9e}, {:.9e}]\n\
         gap at k = 0  : {:.9e}\n\
         gap at k = pi : {:.9e}\n",
        bands.center[0],
        bands.edge[0],
        bands.edge[1],
        bands.center[1],
        bands.split_center(),
        bands.split_edge()
    );
    Ok(("bands", csv, summary))
}

fn run_reduce(
    resolver: &mut Resolver,
    lambda: Option<f64>,
    alpha: Option<f64>,
    d: Option<f64>,
    w: Option<f64>,
) -> Result<CommandOutput, CliError> {
    let lambda = resolver.f64("lambda", lambda, 20.0)?;
    let alpha = resolver.f64("alpha", alpha, 1.0 / 15.0)?;
    let d = resolver.f64("d", d, 0.5)?;
    let w = resolver.f64("w", w, 0.1)?;
    if !(lambda > 0.0) {
        return Err(CliError::Config(format!(
            "lambda must be positive, got {lambda}"
        )));
    }

    let crystal = CrystalSpec::new(lambda, w, w, d, d + alpha / lambda)?;
    let report = hopping_report(&crystal, alpha)?;
    let basis = OrbitalBasis::new(crystal)?;
    let onsite = matrix_element(&basis, 0, 0)?;
    let overlap = orbital_overlap(&basis, 0, 1)?;
    let limit = ssh_emergence_core::tb::ssh_limit(&report)?;
    let winding = limit.winding()?;

    let csv = format!(
        "lambda,alpha,rho1,rho2,ratio,onsite,overlap,t_in,t_out,winding\n\
         {},{},{},{},{},{},{},{},{},{winding}\n",
        fmt_float(lambda),
        fmt_float(alpha),
        fmt_float(report.rho1),
        fmt_float(report.rho2),
        fmt_float(report.ratio),
        fmt_float(onsite),
        fmt_float(overlap),
        fmt_float(limit.t_in),
        fmt_float(limit.t_out)
    );
    let summary = format!(
        "tight-binding reduction: lambda = {lambda}, alpha = {alpha}, d = {d}, w = {w}\n\
         intra-cell hopping rho1 = {:.9e}\n\
         inter-cell hopping rho2 = {:.9e}\n\
         ratio rho2/rho1         = {:.9e}  (e^-alpha = {:.9e})\n\
         on-site correction      = {:.9e}\n\
         neighbour overlap       = {:.9e}\n\
         SSH limit: t_in = {:.9e}, t_out = {:.9e}, winding = {winding}\n",
        report.rho1,
        report.rho2,
        report.ratio,
        (-alpha).exp(),
        onsite,
        overlap,
        limit.t_in,
        limit.t_out
    );
    Ok(("reduce", csv, summary))
}

fn run_homotopy(
    resolver: &mut Resolver,
    lambda2: Option<f64>,
    d: Option<f64>,
    w: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    n_eps: Option<usize>,
) -> Result<CommandOutput, CliError> {
    let lambda2 = resolver.f64("lambda2", lambda2, 100.0)?;
    let d = resolver.f64("d", d, 0.5)?;
    let w = resolver.f64("w", w, 0.1)?;
    let alpha = resolver.f64("alpha", alpha, 1.0 / 15.0)?;
    let beta = resolver.f64("beta", beta, 1.0 / 20.0)?;
    let n_eps = resolver.usize("n_eps", n_eps, 201)?;
    if !(lambda2 > 0.0) {
        return Err(CliError::Config(format!(
            "lambda2 must be positive, got {lambda2}"
        )));
    }

    let config = HomotopyConfig::new(lambda2.sqrt(), d, w, alpha, beta, n_eps)?;
    let rows = parallel_scan(&config)?;
    let min_gap = rows
        .iter()
        .map(|r| r.gap0.min(r.gap_pi))
        .fold(f64::INFINITY, f64::min);

    let mut csv = String::from("eps,mu1_0,mu2_0,mu1_pi,mu2_pi,gap0,gapPi\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_float(r.eps),
            fmt_float(r.mu1_0),
            fmt_float(r.mu2_0),
            fmt_float(r.mu1_pi),
            fmt_float(r.mu2_pi),
            fmt_float(r.gap0),
            fmt_float(r.gap_pi)
        ));
    }
    let summary = format!(
        "deformation scan: lambda^2 = {lambda2}, d = {d}, w = {w}, alpha = {alpha}, \
         beta = {beta}, {n_eps} samples\n\
         min gap c_lambda = {min_gap:.9e}\n",
    );
    Ok(("homotopy", csv, summary))
}

/// Ordered parallel map over the sample grid. Rows are independent, so
/// the thread count (capped by `SSH_EMERGENCE_THREADS`) cannot change the
/// output bytes, only the wall-clock time.
fn parallel_scan(config: &HomotopyConfig) -> Result<Vec<GapScanRow>, CliError> {
    use rayon::prelude::*;

    if let Some(n) = std::env::var("SSH_EMERGENCE_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
    {
        // Ignore failure: the global pool can only be installed once.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let rows = (0..config.n_eps)
        .into_par_iter()
        .map(|i| scan_row(config, eps_sample(i, config.n_eps)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(rows)
}

fn run_finite_volume(
    resolver: &mut Resolver,
    lambda: Option<f64>,
    alpha: Option<f64>,
    d: Option<f64>,
    w: Option<f64>,
    cells: Option<usize>,
    grid_per_cell: Option<usize>,
) -> Result<CommandOutput, CliError> {
    let lambda = resolver.f64("lambda", lambda, 20.0)?;
    let alpha = resolver.f64("alpha", alpha, 1.0 / 15.0)?;
    let d = resolver.f64("d", d, 0.5)?;
    let w = resolver.f64("w", w, 0.1)?;
    let cells = resolver.usize("cells", cells, 8)?;
    let grid_per_cell = resolver.usize("grid_per_cell", grid_per_cell, 512)?;
    if !(lambda > 0.0) {
        return Err(CliError::Config(format!(
            "lambda must be positive, got {lambda}"
        )));
    }

    let crystal = CrystalSpec::new(lambda, w, w, d, d + alpha / lambda)?;
    let cmp = rescaled_band_distance(&crystal, alpha, cells, grid_per_cell)?;

    let mut csv = String::from("index,scaled\n");
    for (i, x) in cmp.scaled.iter().enumerate() {
        csv.push_str(&format!("{i},{}\n", fmt_float(*x)));
    }
    let r = (cmp.report.rho1 / cmp.report.rho2)
        .abs()
        .min((cmp.report.rho2 / cmp.report.rho1).abs());
    let summary = format!(
        "finite crystal: lambda = {lambda}, alpha = {alpha}, {cells} cells, \
         {grid_per_cell} grid points per cell\n\
         hoppings rho1 = {:.9e}, rho2 = {:.9e} (ratio magnitude r = {r:.9e})\n\
         rescaled eigenvalues kept = {}, wall artifacts excluded = {}\n\
         distance to dimer bands +-[1-r, 1+r] = {:.9e}\n\
         states inside the middle of the gap  = {}\n",
        cmp.report.rho1,
        cmp.report.rho2,
        cmp.scaled.len(),
        cmp.excluded,
        cmp.band_distance,
        cmp.midgap
    );
    Ok(("finite-volume", csv, summary))
}

/// Echo map for the manifest: every resolved parameter as it will be used.
pub(crate) type ParameterMap = BTreeMap<String, String>;
